//! Construction of the H-infinity and H2 synthesis programs.
//!
//! Decision variables: `Y` (symmetric, `nx x nx`), `V = diag(omega_c) K`
//! (`nu x nx`), `omega_c`, `kappa_a`, `gamma_xf`, the Gramian bounds `Q`
//! (`Q1`, `Q2` for H2) and, for each norm term with a positive weight, an
//! epigraph scalar. With
//!
//! ```text
//! P   = [[Y A, Y Bu], [V, -diag(omega_c)]]
//! M12 = [[Y Bd, Y Bu], [0, 0]]
//! ```
//!
//! the H-infinity program imposes
//!
//! ```text
//! [[P + P^T, M12,                                [Cz^T; 0]],
//!  [*,       -gamma diag(Wd^-2, kappa_a),        [Dd^T; 0]],
//!  [*,       *,                                  -gamma I ]]  <= -eps I
//! ```
//!
//! and the H2 program
//!
//! ```text
//! [[P + P^T, M12], [*, -diag(Wd^-2, kappa_a)]] <= -eps I
//! [[Q1, Cz, 0], [Cz^T, Y, 0], [0, 0, I]] >= 0,    tr(Q1) <= gamma
//! ```
//!
//! Both bound the actuator-state DC gain through
//! `[[Q, V^T], [V, I]] >= 0, tr(Q) <= gamma_xf`, and both minimize
//! `lambda_a ||kappa_a|| + lambda_wc ||omega_c|| + lambda_xf gamma_xf`.

use nalgebra::DMatrix;

use super::lmi::{
    AffineExpr, Constraint, ConstraintKind, Definiteness, LmiProblem, MatExpr, VariableBlock,
    VariableRegistry,
};
use super::SynthesisSpec;
use crate::error::{Error, Result};
use crate::lti::{NormKind, StateSpace};

struct Common {
    vars: VariableRegistry,
    y: VariableBlock,
    omega: VariableBlock,
    kappa: VariableBlock,
    gamma_xf: VariableBlock,
    /// `P + P^T`
    p_sym: MatExpr,
    m12: MatExpr,
    constraints: Vec<Constraint>,
}

fn check_preconditions(sys: &StateSpace, spec: &SynthesisSpec, kind: NormKind) -> Result<()> {
    spec.validate()?;
    if spec.norm != kind {
        return Err(Error::InvalidInput(format!(
            "spec asks for {} synthesis, building {kind}",
            spec.norm
        )));
    }
    if sys.nu() == 0 {
        return Err(Error::InvalidInput("plant has no control inputs".into()));
    }
    if spec.wd.len() != sys.nd() {
        return Err(Error::InvalidInput(format!(
            "Wd has {} entries, plant has {} disturbances",
            spec.wd.len(),
            sys.nd()
        )));
    }
    Ok(())
}

fn matrix(name: &str, sense: Definiteness, margin: f64, matrix: MatExpr) -> Constraint {
    Constraint {
        name: name.into(),
        kind: ConstraintKind::Matrix {
            sense,
            margin,
            matrix,
        },
    }
}

fn linear(name: String, expr: AffineExpr) -> Constraint {
    Constraint {
        name,
        kind: ConstraintKind::Linear { expr },
    }
}

fn common(sys: &StateSpace, eps: f64, spec: &SynthesisSpec, gram: &str) -> (Common, VariableBlock) {
    let (nx, nu) = (sys.nx(), sys.nu());
    let mut vars = VariableRegistry::default();
    let y = vars.symmetric("Y", nx);
    let v = vars.full("V", nu, nx);
    let omega = vars.vector("omega_c", nu);
    let kappa = vars.vector("kappa_a", nu);
    let gamma_xf = vars.scalar("gamma_xf");
    let q = vars.symmetric(gram, nx);

    let ye = y.expr();
    let ve = v.expr();
    let omega_items = omega.items();
    let p = MatExpr::blocks(
        &[nx, nu],
        &[nx, nu],
        &[
            vec![Some(ye.mul_const(&sys.a)), Some(ye.mul_const(&sys.bu))],
            vec![Some(ve.clone()), Some(MatExpr::diag(&omega_items).scale(-1.0))],
        ],
    );
    let p_sym = p.add(&p.transpose());
    let m12 = MatExpr::blocks(
        &[nx, nu],
        &[sys.nd(), nu],
        &[vec![Some(ye.mul_const(&sys.bd)), Some(ye.mul_const(&sys.bu))], vec![None, None]],
    );

    let mut constraints = Vec::new();
    constraints.push(matrix(
        "xf_gram",
        Definiteness::PositiveSemidefinite,
        0.0,
        MatExpr::symmetric_blocks(
            &[nx, nu],
            &[vec![Some(q.expr()), Some(ve.transpose())], vec![None, Some(MatExpr::identity(nu))]],
        ),
    ));
    let gxf = AffineExpr::var(gamma_xf.offset);
    constraints.push(linear("xf_trace".into(), gxf.add(&q.expr().trace().neg())));
    constraints.push(matrix("y_pd", Definiteness::PositiveSemidefinite, eps, ye));
    for (i, k) in kappa.items().iter().enumerate() {
        constraints.push(linear(
            format!("kappa_floor[{i}]"),
            k.add(&AffineExpr::constant(-spec.kappa_floor)),
        ));
    }
    for (i, w) in omega_items.iter().enumerate() {
        constraints.push(linear(
            format!("omega_floor[{i}]"),
            w.add(&AffineExpr::constant(-spec.omega_floor)),
        ));
    }
    constraints.push(linear("gamma_xf_nonneg".into(), gxf));

    (
        Common {
            vars,
            y,
            omega,
            kappa,
            gamma_xf,
            p_sym,
            m12,
            constraints,
        },
        q,
    )
}

/// Adds epigraph variables for the weighted norm terms and returns the
/// objective.
fn objective(c: &mut Common, spec: &SynthesisSpec) -> AffineExpr {
    let mut obj = AffineExpr::var(c.gamma_xf.offset).scale(spec.lambda_xf);
    let terms = [
        ("t_kappa", "kappa_norm", spec.lambda_a, c.kappa.clone()),
        ("t_omega", "omega_norm", spec.lambda_wc, c.omega.clone()),
    ];
    for (var, name, weight, block) in terms {
        if weight == 0.0 {
            continue;
        }
        let t = c.vars.scalar(var);
        let te = AffineExpr::var(t.offset);
        c.constraints.push(Constraint {
            name: name.into(),
            kind: ConstraintKind::SecondOrderCone {
                t: te.clone(),
                x: block.items(),
            },
        });
        obj = obj.add(&te.scale(weight));
    }
    obj
}

fn disturbance_weights(spec: &SynthesisSpec) -> Vec<AffineExpr> {
    spec.wd
        .iter()
        .map(|w| AffineExpr::constant(1.0 / (w * w)))
        .collect()
}

/// H-infinity program: a feasible point certifies `||G||_inf < gamma`.
pub fn build_hinf_lmi(sys: &StateSpace, spec: &SynthesisSpec) -> Result<LmiProblem> {
    check_preconditions(sys, spec, NormKind::HInf)?;
    let (nx, nu, nd, nz) = (sys.nx(), sys.nu(), sys.nd(), sys.nz());
    let eps = spec.eps_lmi_for(sys);
    let (mut c, _q) = common(sys, eps, spec, "Q");

    let mut diag22 = disturbance_weights(spec);
    diag22.extend(c.kappa.items());
    let g = spec.gamma;
    let cz_t = DMatrix::from_fn(nx + nu, nz, |i, j| if i < nx { sys.cz[(j, i)] } else { 0.0 });
    let dd_t = DMatrix::from_fn(nd + nu, nz, |i, j| if i < nd { sys.dd[(j, i)] } else { 0.0 });
    let main = MatExpr::symmetric_blocks(
        &[nx + nu, nd + nu, nz],
        &[
            vec![Some(c.p_sym.clone()), Some(c.m12.clone()), Some(MatExpr::constant(&cz_t))],
            vec![None, Some(MatExpr::diag(&diag22).scale(-g)), Some(MatExpr::constant(&dd_t))],
            vec![None, None, Some(MatExpr::identity(nz).scale(-g))],
        ],
    );
    c.constraints
        .insert(0, matrix("hinf_lmi", Definiteness::NegativeSemidefinite, eps, main));

    let obj = objective(&mut c, spec);
    finish(NormKind::HInf, sys, spec, eps, c, obj)
}

/// H2 program: a feasible point certifies `||G||_2^2 < gamma` (or
/// `||G||_2 < gamma` under [`super::H2BoundConvention::Norm`]).
pub fn build_h2_lmi(sys: &StateSpace, spec: &SynthesisSpec) -> Result<LmiProblem> {
    check_preconditions(sys, spec, NormKind::H2)?;
    if sys.dd.iter().any(|v| *v != 0.0) {
        return Err(Error::PreconditionViolation(
            "H2 synthesis requires Dd = 0 (the closed loop must be strictly proper)".into(),
        ));
    }
    let (nx, nu, nd, nz) = (sys.nx(), sys.nu(), sys.nd(), sys.nz());
    let eps = spec.eps_lmi_for(sys);
    let (mut c, _q2) = common(sys, eps, spec, "Q2");
    let q1 = c.vars.symmetric("Q1", nz);

    let mut diag22 = disturbance_weights(spec);
    diag22.extend(c.kappa.items());
    let main = MatExpr::symmetric_blocks(
        &[nx + nu, nd + nu],
        &[
            vec![Some(c.p_sym.clone()), Some(c.m12.clone())],
            vec![None, Some(MatExpr::diag(&diag22).scale(-1.0))],
        ],
    );
    let output = MatExpr::symmetric_blocks(
        &[nz, nx, nu],
        &[
            vec![Some(q1.expr()), Some(MatExpr::constant(&sys.cz)), None],
            vec![None, Some(c.y.expr()), None],
            vec![None, None, Some(MatExpr::identity(nu))],
        ],
    );
    let bound = spec.h2_trace_bound();
    let mut head = vec![
        matrix("h2_lmi", Definiteness::NegativeSemidefinite, eps, main),
        matrix("h2_output_gram", Definiteness::PositiveSemidefinite, 0.0, output),
        linear(
            "h2_trace".into(),
            q1.expr().trace().neg().add(&AffineExpr::constant(bound)),
        ),
    ];
    head.append(&mut c.constraints);
    c.constraints = head;

    let obj = objective(&mut c, spec);
    finish(NormKind::H2, sys, spec, eps, c, obj)
}

pub fn build_lmi(sys: &StateSpace, spec: &SynthesisSpec) -> Result<LmiProblem> {
    match spec.norm {
        NormKind::HInf => build_hinf_lmi(sys, spec),
        NormKind::H2 => build_h2_lmi(sys, spec),
    }
}

fn finish(
    kind: NormKind,
    sys: &StateSpace,
    spec: &SynthesisSpec,
    eps: f64,
    c: Common,
    objective: AffineExpr,
) -> Result<LmiProblem> {
    let problem = LmiProblem {
        kind,
        plant: sys.clone(),
        spec: spec.clone(),
        eps_lmi: eps,
        variables: c.vars,
        constraints: c.constraints,
        objective,
    };
    problem.check_well_formed()?;
    Ok(problem)
}
