//! Affine matrix expressions over a registry of named decision blocks, and
//! their lowering to the standard conic form `A x + s = b, s in K`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::backend::{Cone, ConicProblem};
use super::SynthesisSpec;
use crate::error::{Error, Result};
use crate::lti::{NormKind, StateSpace};

/// `constant + sum(coef * x[var])`, terms sorted by variable index with no
/// duplicates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffineExpr {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

impl AffineExpr {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn var(index: usize) -> Self {
        Self {
            constant: 0.0,
            terms: vec![(index, 1.0)],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let next = match (self.terms.get(i), other.terms.get(j)) {
                (Some(&(va, ca)), Some(&(vb, cb))) if va == vb => {
                    i += 1;
                    j += 1;
                    (va, ca + cb)
                }
                (Some(&(va, ca)), Some(&(vb, _))) if va < vb => {
                    i += 1;
                    (va, ca)
                }
                (Some(_), Some(&(vb, cb))) => {
                    j += 1;
                    (vb, cb)
                }
                (Some(&t), None) => {
                    i += 1;
                    t
                }
                (None, Some(&t)) => {
                    j += 1;
                    t
                }
                (None, None) => unreachable!(),
            };
            if next.1 != 0.0 {
                terms.push(next);
            }
        }
        Self {
            constant: self.constant + other.constant,
            terms,
        }
    }

    pub fn scale(&self, f: f64) -> Self {
        if f == 0.0 {
            return Self::default();
        }
        Self {
            constant: self.constant * f,
            terms: self.terms.iter().map(|&(v, c)| (v, c * f)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, &(v, c)| acc + c * x[v])
    }
}

/// Dense matrix of affine expressions, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MatExpr {
    nrows: usize,
    ncols: usize,
    entries: Vec<AffineExpr>,
}

impl MatExpr {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: vec![AffineExpr::default(); nrows * ncols],
        }
    }

    pub fn constant(m: &DMatrix<f64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.entries[i * m.ncols() + j] = AffineExpr::constant(m[(i, j)]);
            }
        }
        out
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(&DMatrix::identity(n, n))
    }

    /// Diagonal matrix with the given expressions on the diagonal.
    pub fn diag(items: &[AffineExpr]) -> Self {
        let n = items.len();
        let mut out = Self::zeros(n, n);
        for (i, e) in items.iter().enumerate() {
            out.entries[i * n + i] = e.clone();
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn get(&self, i: usize, j: usize) -> &AffineExpr {
        &self.entries[i * self.ncols + j]
    }

    fn set(&mut self, i: usize, j: usize, e: AffineExpr) {
        self.entries[i * self.ncols + j] = e;
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "MatExpr::add shape mismatch");
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn scale(&self, f: f64) -> Self {
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            entries: self.entries.iter().map(|e| e.scale(f)).collect(),
        }
    }

    /// `self * m` for a constant matrix `m`.
    pub fn mul_const(&self, m: &DMatrix<f64>) -> Self {
        assert_eq!(self.ncols, m.nrows(), "MatExpr::mul_const shape mismatch");
        let mut out = Self::zeros(self.nrows, m.ncols());
        for i in 0..self.nrows {
            for j in 0..m.ncols() {
                let mut acc = AffineExpr::default();
                for k in 0..self.ncols {
                    let c = m[(k, j)];
                    if c != 0.0 {
                        acc = acc.add(&self.get(i, k).scale(c));
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn trace(&self) -> AffineExpr {
        assert_eq!(self.nrows, self.ncols, "trace of a non-square MatExpr");
        (0..self.nrows).fold(AffineExpr::default(), |acc, i| acc.add(self.get(i, i)))
    }

    /// Assembles a symmetric block matrix from its upper triangle.
    ///
    /// `upper[i][j]` for `j >= i` gives block `(i, j)` (`None` is zero); the
    /// lower triangle is filled with transposes and diagonal blocks are
    /// mirrored from their upper triangles, so the result is exactly
    /// symmetric.
    pub fn symmetric_blocks(sizes: &[usize], upper: &[Vec<Option<MatExpr>>]) -> Self {
        let offsets: Vec<usize> = sizes
            .iter()
            .scan(0, |acc, s| {
                let o = *acc;
                *acc += s;
                Some(o)
            })
            .collect();
        let n: usize = sizes.iter().sum();
        let mut out = Self::zeros(n, n);
        for (bi, row) in upper.iter().enumerate() {
            for (bj, block) in row.iter().enumerate() {
                let Some(block) = block else { continue };
                assert!(bj >= bi, "symmetric_blocks takes the upper triangle only");
                assert_eq!(
                    block.shape(),
                    (sizes[bi], sizes[bj]),
                    "block ({bi}, {bj}) has the wrong shape"
                );
                for i in 0..sizes[bi] {
                    for j in 0..sizes[bj] {
                        if bi == bj && j < i {
                            continue;
                        }
                        let e = block.get(i, j).clone();
                        let (r, c) = (offsets[bi] + i, offsets[bj] + j);
                        out.set(c, r, e.clone());
                        out.set(r, c, e);
                    }
                }
            }
        }
        out
    }

    /// Assembles a general block matrix; `None` blocks are zero.
    pub fn blocks(row_sizes: &[usize], col_sizes: &[usize], grid: &[Vec<Option<MatExpr>>]) -> Self {
        let n: usize = row_sizes.iter().sum();
        let m: usize = col_sizes.iter().sum();
        let mut out = Self::zeros(n, m);
        let mut r0 = 0;
        for (bi, row) in grid.iter().enumerate() {
            let mut c0 = 0;
            for (bj, block) in row.iter().enumerate() {
                if let Some(block) = block {
                    assert_eq!(block.shape(), (row_sizes[bi], col_sizes[bj]));
                    for i in 0..row_sizes[bi] {
                        for j in 0..col_sizes[bj] {
                            out.set(r0 + i, c0 + j, block.get(i, j).clone());
                        }
                    }
                }
                c0 += col_sizes[bj];
            }
            r0 += row_sizes[bi];
        }
        out
    }

    pub fn is_exactly_symmetric(&self) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn evaluate(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.nrows, self.ncols, |i, j| self.get(i, j).evaluate(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Symmetric,
    Full,
    Vector,
    Scalar,
}

/// One named decision block occupying `len` consecutive scalar variables.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableBlock {
    pub name: String,
    pub kind: BlockKind,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
    pub len: usize,
}

impl VariableBlock {
    /// Scalar variable holding entry `(i, j)`; symmetric blocks store the
    /// upper triangle row by row.
    pub fn index(&self, i: usize, j: usize) -> usize {
        match self.kind {
            BlockKind::Symmetric => {
                let (r, c) = if i <= j { (i, j) } else { (j, i) };
                self.offset + r * self.rows - r * (r + 1) / 2 + c
            }
            BlockKind::Full => self.offset + i * self.cols + j,
            BlockKind::Vector | BlockKind::Scalar => self.offset + i + j,
        }
    }

    pub fn expr(&self) -> MatExpr {
        let mut out = MatExpr::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, AffineExpr::var(self.index(i, j)));
            }
        }
        out
    }

    /// Elements of a vector (or scalar) block.
    pub fn items(&self) -> Vec<AffineExpr> {
        (0..self.len).map(|k| AffineExpr::var(self.offset + k)).collect()
    }

    pub fn value(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| x[self.index(i, j)])
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VariableRegistry {
    blocks: Vec<VariableBlock>,
    len: usize,
}

impl VariableRegistry {
    fn push(&mut self, name: &str, kind: BlockKind, rows: usize, cols: usize, len: usize) -> VariableBlock {
        assert!(self.get(name).is_none(), "duplicate variable block '{name}'");
        let b = VariableBlock {
            name: name.to_string(),
            kind,
            rows,
            cols,
            offset: self.len,
            len,
        };
        self.len += len;
        self.blocks.push(b.clone());
        b
    }

    pub fn symmetric(&mut self, name: &str, n: usize) -> VariableBlock {
        self.push(name, BlockKind::Symmetric, n, n, n * (n + 1) / 2)
    }

    pub fn full(&mut self, name: &str, rows: usize, cols: usize) -> VariableBlock {
        self.push(name, BlockKind::Full, rows, cols, rows * cols)
    }

    pub fn vector(&mut self, name: &str, n: usize) -> VariableBlock {
        self.push(name, BlockKind::Vector, n, 1, n)
    }

    pub fn scalar(&mut self, name: &str) -> VariableBlock {
        self.push(name, BlockKind::Scalar, 1, 1, 1)
    }

    pub fn get(&self, name: &str) -> Option<&VariableBlock> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn blocks(&self) -> &[VariableBlock] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Scalar vector from per-block values. Symmetric blocks read their upper
    /// triangle; every block must be supplied.
    pub fn pack(&self, values: &BTreeMap<String, DMatrix<f64>>) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.len];
        for b in &self.blocks {
            let m = values
                .get(&b.name)
                .ok_or_else(|| Error::InvalidInput(format!("no value for variable block '{}'", b.name)))?;
            if m.shape() != (b.rows, b.cols) {
                return Err(Error::InvalidInput(format!(
                    "variable block '{}' is {}x{}, got {}x{}",
                    b.name,
                    b.rows,
                    b.cols,
                    m.nrows(),
                    m.ncols()
                )));
            }
            for i in 0..b.rows {
                for j in 0..b.cols {
                    if b.kind == BlockKind::Symmetric && j < i {
                        continue;
                    }
                    x[b.index(i, j)] = m[(i, j)];
                }
            }
        }
        Ok(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    /// `F(x) >= margin * I`
    PositiveSemidefinite,
    /// `F(x) <= -margin * I`
    NegativeSemidefinite,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintKind {
    Matrix {
        sense: Definiteness,
        margin: f64,
        matrix: MatExpr,
    },
    /// `expr >= 0`
    Linear { expr: AffineExpr },
    /// `||x||_2 <= t`
    SecondOrderCone { t: AffineExpr, x: Vec<AffineExpr> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub kind: ConstraintKind,
}

impl Constraint {
    pub fn is_matrix(&self) -> bool {
        matches!(self.kind, ConstraintKind::Matrix { .. })
    }

    /// Violation of the unshifted constraint at `x`: positive means violated.
    ///
    /// `<= 0` constraints report their largest eigenvalue, `>= 0` ones the
    /// negated smallest eigenvalue; margins are ignored.
    pub fn violation(&self, x: &[f64]) -> f64 {
        match &self.kind {
            ConstraintKind::Matrix { sense, matrix, .. } => {
                let m = matrix.evaluate(x);
                let eig = m.symmetric_eigenvalues();
                match sense {
                    Definiteness::NegativeSemidefinite => eig.max(),
                    Definiteness::PositiveSemidefinite => -eig.min(),
                }
            }
            ConstraintKind::Linear { expr } => -expr.evaluate(x),
            ConstraintKind::SecondOrderCone { t, x: items } => {
                let norm = items
                    .iter()
                    .map(|e| e.evaluate(x).powi(2))
                    .sum::<f64>()
                    .sqrt();
                norm - t.evaluate(x)
            }
        }
    }
}

/// A synthesis program: decision blocks, constraints and a linear objective
/// (norm terms enter through second-order-cone epigraph variables).
#[derive(Debug, Clone)]
pub struct LmiProblem {
    pub kind: NormKind,
    pub plant: StateSpace,
    pub spec: SynthesisSpec,
    pub eps_lmi: f64,
    pub variables: VariableRegistry,
    pub constraints: Vec<Constraint>,
    pub objective: AffineExpr,
}

impl LmiProblem {
    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.name == name)
    }

    pub fn block(&self, name: &str) -> Result<&VariableBlock> {
        self.variables
            .get(name)
            .ok_or_else(|| Error::InvalidInput(format!("problem has no variable block '{name}'")))
    }

    /// Checks that every constraint matrix is exactly symmetric and only
    /// references registered variables.
    pub fn check_well_formed(&self) -> Result<()> {
        let n = self.variables.len();
        let in_range = |e: &AffineExpr| e.terms.iter().all(|&(v, _)| v < n);
        for c in &self.constraints {
            let ok = match &c.kind {
                ConstraintKind::Matrix { matrix, .. } => {
                    if !matrix.is_exactly_symmetric() {
                        return Err(Error::InvalidInput(format!(
                            "constraint '{}' is not symmetric",
                            c.name
                        )));
                    }
                    matrix.entries.iter().all(in_range)
                }
                ConstraintKind::Linear { expr } => in_range(expr),
                ConstraintKind::SecondOrderCone { t, x } => in_range(t) && x.iter().all(in_range),
            };
            if !ok {
                return Err(Error::InvalidInput(format!(
                    "constraint '{}' references an unknown variable",
                    c.name
                )));
            }
        }
        if !in_range(&self.objective) {
            return Err(Error::InvalidInput("objective references an unknown variable".into()));
        }
        Ok(())
    }

    /// Lowers to `min q^T x  s.t.  A x + s = b, s in K`.
    ///
    /// Matrix constraints map to PSD-triangle cones over the upper triangle
    /// in column-major order with off-diagonal entries scaled by `sqrt(2)`.
    pub fn to_conic(&self) -> ConicProblem {
        let n = self.variables.len();
        let mut q = vec![0.0; n];
        for &(v, c) in &self.objective.terms {
            q[v] += c;
        }
        let mut p = ConicProblem {
            n,
            q,
            rows: Vec::new(),
            cols: Vec::new(),
            vals: Vec::new(),
            b: Vec::new(),
            cones: Vec::new(),
        };

        // row of s = b - A x reads s_k = expr_k(x)
        let push_row = |p: &mut ConicProblem, e: &AffineExpr, scale: f64| {
            let row = p.b.len();
            for &(v, c) in &e.terms {
                p.rows.push(row);
                p.cols.push(v);
                p.vals.push(-c * scale);
            }
            p.b.push(e.constant * scale);
        };

        for c in &self.constraints {
            match &c.kind {
                ConstraintKind::Linear { expr } => {
                    push_row(&mut p, expr, 1.0);
                    match p.cones.last_mut() {
                        Some(Cone::Nonnegative(k)) => *k += 1,
                        _ => p.cones.push(Cone::Nonnegative(1)),
                    }
                }
                ConstraintKind::SecondOrderCone { t, x } => {
                    push_row(&mut p, t, 1.0);
                    for e in x {
                        push_row(&mut p, e, 1.0);
                    }
                    p.cones.push(Cone::SecondOrder(1 + x.len()));
                }
                ConstraintKind::Matrix {
                    sense,
                    margin,
                    matrix,
                } => {
                    let dim = matrix.nrows();
                    let sign = match sense {
                        Definiteness::PositiveSemidefinite => 1.0,
                        Definiteness::NegativeSemidefinite => -1.0,
                    };
                    for col in 0..dim {
                        for row in 0..=col {
                            let mut e = matrix.get(row, col).scale(sign);
                            if row == col {
                                e.constant -= margin;
                                push_row(&mut p, &e, 1.0);
                            } else {
                                push_row(&mut p, &e, std::f64::consts::SQRT_2);
                            }
                        }
                    }
                    p.cones.push(Cone::PsdTriangle(dim));
                }
            }
        }
        p
    }

    /// Plain-text listing of variables (with offsets) and constraints.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} synthesis program", self.kind);
        let _ = writeln!(out, "eps_lmi {:e}", self.eps_lmi);
        let _ = writeln!(out, "variables {}", self.variables.len());
        for b in self.variables.blocks() {
            let _ = writeln!(
                out,
                "  {:<10} {:?} {}x{} offset {} len {}",
                b.name, b.kind, b.rows, b.cols, b.offset, b.len
            );
        }
        let _ = writeln!(out, "objective");
        for &(v, c) in &self.objective.terms {
            let _ = writeln!(out, "  {c:e} * x[{v}]");
        }
        let _ = writeln!(out, "constraints {}", self.constraints.len());
        for c in &self.constraints {
            match &c.kind {
                ConstraintKind::Matrix {
                    sense,
                    margin,
                    matrix,
                } => {
                    let rel = match sense {
                        Definiteness::PositiveSemidefinite => ">=",
                        Definiteness::NegativeSemidefinite => "<=",
                    };
                    let bound = match sense {
                        Definiteness::PositiveSemidefinite => *margin,
                        Definiteness::NegativeSemidefinite => -margin,
                    };
                    let _ = writeln!(
                        out,
                        "  {} : matrix {}x{} {rel} {bound:e} I",
                        c.name,
                        matrix.nrows(),
                        matrix.ncols()
                    );
                    for i in 0..matrix.nrows() {
                        let row: Vec<String> = (0..matrix.ncols())
                            .map(|j| format_entry(matrix.get(i, j)))
                            .collect();
                        let _ = writeln!(out, "    [{}]", row.join(", "));
                    }
                }
                ConstraintKind::Linear { expr } => {
                    let _ = writeln!(out, "  {} : {} >= 0", c.name, format_entry(expr));
                }
                ConstraintKind::SecondOrderCone { t, x } => {
                    let _ = writeln!(
                        out,
                        "  {} : ||({})|| <= {}",
                        c.name,
                        x.iter().map(format_entry).collect::<Vec<_>>().join(", "),
                        format_entry(t)
                    );
                }
            }
        }
        out
    }
}

fn format_entry(e: &AffineExpr) -> String {
    if e.is_zero() {
        return "0".into();
    }
    let mut parts = Vec::new();
    if e.constant != 0.0 || e.terms.is_empty() {
        parts.push(format!("{:e}", e.constant));
    }
    for &(v, c) in &e.terms {
        parts.push(format!("{c:e}*x{v}"));
    }
    parts.join(" + ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn affine_add_merges_terms() {
        let a = AffineExpr {
            constant: 1.0,
            terms: vec![(0, 2.0), (3, 1.0)],
        };
        let b = AffineExpr {
            constant: -0.5,
            terms: vec![(1, 1.0), (3, -1.0)],
        };
        let s = a.add(&b);
        assert_eq!(s.constant, 0.5);
        assert_eq!(s.terms, vec![(0, 2.0), (1, 1.0)]);
        assert_eq!(s.evaluate(&[1.0, 2.0, 0.0, 5.0]), 0.5 + 2.0 + 2.0);
    }

    #[test]
    fn symmetric_block_indexing() {
        let mut reg = VariableRegistry::default();
        let y = reg.symmetric("Y", 3);
        let v = reg.full("V", 2, 3);
        assert_eq!(reg.len(), 6 + 6);
        assert_eq!(y.index(0, 2), y.index(2, 0));
        let mut seen: Vec<usize> = (0..3).flat_map(|i| (i..3).map(move |j| (i, j))).map(|(i, j)| y.index(i, j)).collect();
        seen.sort();
        assert_eq!(seen, (0..6).collect::<Vec<_>>());
        assert_eq!(v.index(1, 2), 6 + 5);
    }

    #[test]
    fn pack_and_value_round_trip() {
        let mut reg = VariableRegistry::default();
        let y = reg.symmetric("Y", 2);
        let w = reg.vector("w", 2);
        let mut values = BTreeMap::new();
        values.insert("Y".to_string(), dmatrix![1.0, 2.0; 2.0, 3.0]);
        values.insert("w".to_string(), dmatrix![4.0; 5.0]);
        let x = reg.pack(&values).unwrap();
        assert_eq!(y.value(&x), values["Y"]);
        assert_eq!(w.value(&x), values["w"]);
        values.remove("w");
        assert!(reg.pack(&values).is_err());
    }

    #[test]
    fn mul_const_and_trace() {
        let mut reg = VariableRegistry::default();
        let y = reg.symmetric("Y", 2);
        let a = dmatrix![1.0, 2.0; 3.0, 4.0];
        let ya = y.expr().mul_const(&a);
        let x = vec![1.0, 0.5, 2.0]; // Y = [[1, .5], [.5, 2]]
        let yv = y.value(&x);
        assert_eq!(ya.evaluate(&x), &yv * &a);
        assert_eq!(y.expr().trace().evaluate(&x), 3.0);
    }

    #[test]
    fn symmetric_blocks_are_exact() {
        let mut reg = VariableRegistry::default();
        let y = reg.symmetric("Y", 2);
        let v = reg.full("V", 1, 2);
        let a = dmatrix![0.3, -1.7; 2.1, 0.9];
        let p = y.expr().mul_const(&a);
        let m = MatExpr::symmetric_blocks(
            &[2, 1],
            &[
                vec![Some(p.add(&p.transpose())), Some(v.expr().transpose())],
                vec![None, Some(MatExpr::identity(1).scale(-1.0))],
            ],
        );
        assert!(m.is_exactly_symmetric());
        assert_eq!(m.shape(), (3, 3));
    }

    #[test]
    fn psd_lowering_matches_triangle_convention() {
        // 2x2 constraint [[x0, x1], [x1, 1]] >= 0.1 I
        let mut reg = VariableRegistry::default();
        let s = reg.vector("s", 2);
        let items = s.items();
        let m = MatExpr::symmetric_blocks(
            &[1, 1],
            &[
                vec![Some(MatExpr::diag(&items[..1])), Some(MatExpr::diag(&items[1..]))],
                vec![None, Some(MatExpr::identity(1))],
            ],
        );
        let problem = LmiProblem {
            kind: NormKind::HInf,
            plant: crate::f16::plant(),
            spec: SynthesisSpec::new(NormKind::HInf, 1.0, vec![1.0]),
            eps_lmi: 0.0,
            variables: reg,
            constraints: vec![Constraint {
                name: "c".into(),
                kind: ConstraintKind::Matrix {
                    sense: Definiteness::PositiveSemidefinite,
                    margin: 0.1,
                    matrix: m,
                },
            }],
            objective: AffineExpr::default(),
        };
        let cp = problem.to_conic();
        assert_eq!(cp.cones, vec![Cone::PsdTriangle(2)]);
        // s = b - A x = svec(F(x) - 0.1 I) at x = (2, 3)
        let x = [2.0, 3.0];
        let s = cp.slack(&x);
        let r2 = std::f64::consts::SQRT_2;
        let want = [2.0 - 0.1, 3.0 * r2, 1.0 - 0.1];
        for (a, b) in s.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
