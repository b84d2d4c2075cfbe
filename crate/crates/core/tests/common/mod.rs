#![allow(dead_code)]

use actdeg::lti::{spectral_abscissa, StateSpace};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

/// Random Hurwitz matrix with spectral abscissa in [-1, -0.1].
pub fn hurwitz(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = gaussian(rng, n, n);
    let shift = spectral_abscissa(&a) + rng.gen_range(0.1..1.0);
    a - DMatrix::identity(n, n) * shift
}

/// Random stable plant with `Dd = 0`.
pub fn plant(rng: &mut ChaCha8Rng, nx: usize, nu: usize, nd: usize, nz: usize) -> StateSpace {
    let a = hurwitz(rng, nx);
    let bu = gaussian(rng, nx, nu);
    let bd = gaussian(rng, nx, nd);
    let cz = gaussian(rng, nz, nx);
    StateSpace::new(a, bu, bd, cz, DMatrix::zeros(nz, nd)).unwrap()
}

/// Frequency band covering every pole of `a` by four decades on each side.
pub fn band(a: &DMatrix<f64>) -> (f64, f64) {
    let mags: Vec<f64> = a.complex_eigenvalues().iter().map(|l| l.norm()).collect();
    let lo = mags.iter().cloned().fold(f64::INFINITY, f64::min).max(1e-8);
    let hi = mags.iter().cloned().fold(0.0, f64::max).max(lo);
    (lo * 1e-4, hi * 1e4)
}
