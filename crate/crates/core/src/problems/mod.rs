//! Desk-scale benchmark instances.
//!
//! Random data is drawn in `f64` from a seeded SplitMix64 stream (uniform
//! draws only) and cast to the working scalar afterwards, so the same seed
//! yields the same instance in every precision.

mod reference;
mod verify;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{LinearMap, Vector};
use crate::methods::{CgSchedule, MethodConfig};
use crate::oracles::{Claim, KnownOptimum, ProblemInstance, ReferenceFn, SimpleFn, SmoothFn};
use crate::scalar::Scalar;
use crate::steprules::{Backtracking, StepRule};

pub use reference::{reference_method, reference_optimum, Bracket, ReferenceOptimum};
pub use verify::{verify_constants, ClaimReport, VerifyReport, VERIFY_RATIO_TOL};

/// Names accepted by [`make_instance`].
pub const REGISTRY: [&str; 6] = [
    "simplex-quadratic",
    "lasso",
    "poisson-burg",
    "l1-regression",
    "holder",
    "cg-ball",
];

/// Upper limit on the primal dimension.
pub const MAX_DIM: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    #[serde(flatten)]
    pub kind: InstanceKind,
    #[serde(default)]
    pub seed: u64,
}

impl InstanceSpec {
    /// Registry instance `name` with default parameters.
    pub fn named(name: &str, seed: u64) -> Result<Self> {
        let kind =
            InstanceKind::defaults(name).ok_or_else(|| Error::UnknownInstance(name.into()))?;
        Ok(Self { kind, seed })
    }
}

impl InstanceKind {
    /// Same values serde fills in for a bare `{"name": ...}`.
    pub fn defaults(name: &str) -> Option<Self> {
        Some(match name {
            "simplex-quadratic" => InstanceKind::SimplexQuadratic {
                m: d_sq_m(),
                n: d_sq_n(),
                reference: ReferenceFn::Entropy,
                q_matrix: None,
                q_vector: None,
            },
            "lasso" => InstanceKind::Lasso {
                m: d_lasso_m(),
                n: d_lasso_n(),
                lambda: None,
                matrix: None,
                target: None,
            },
            "poisson-burg" => InstanceKind::PoissonBurg {
                m: d_pb_m(),
                n: d_pb_n(),
                lower: d_pb_lower(),
                upper: d_pb_upper(),
            },
            "l1-regression" => InstanceKind::L1Regression {
                m: d_l1_m(),
                n: d_l1_n(),
            },
            "holder" => InstanceKind::Holder {
                m: d_h_m(),
                n: d_h_n(),
                nu: d_h_nu(),
            },
            "cg-ball" => InstanceKind::CgBall {
                m: d_cg_m(),
                n: d_cg_n(),
                radius: d_one(),
            },
            _ => return None,
        })
    }
}

fn d_sq_m() -> usize {
    15
}
fn d_sq_n() -> usize {
    20
}
fn d_entropy() -> ReferenceFn {
    ReferenceFn::Entropy
}
fn d_lasso_m() -> usize {
    30
}
fn d_lasso_n() -> usize {
    50
}
fn d_pb_m() -> usize {
    30
}
fn d_pb_n() -> usize {
    10
}
fn d_pb_lower() -> f64 {
    0.1
}
fn d_pb_upper() -> f64 {
    3.0
}
fn d_l1_m() -> usize {
    8
}
fn d_l1_n() -> usize {
    4
}
fn d_h_m() -> usize {
    20
}
fn d_h_n() -> usize {
    10
}
fn d_h_nu() -> f64 {
    0.5
}
fn d_cg_m() -> usize {
    20
}
fn d_cg_n() -> usize {
    30
}
fn d_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum InstanceKind {
    /// `½ xᵀQx + qᵀx` over the unit simplex, `Q = BᵀB` with a planted
    /// interior minimizer unless `q_matrix` is given.
    SimplexQuadratic {
        #[serde(default = "d_sq_m")]
        m: usize,
        #[serde(default = "d_sq_n")]
        n: usize,
        #[serde(default = "d_entropy")]
        reference: ReferenceFn,
        #[serde(default)]
        q_matrix: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        q_vector: Option<Vec<f64>>,
    },
    /// `½‖Bx - b‖² + λ‖x‖₁`.
    Lasso {
        #[serde(default = "d_lasso_m")]
        m: usize,
        #[serde(default = "d_lasso_n")]
        n: usize,
        #[serde(default)]
        lambda: Option<f64>,
        #[serde(default)]
        matrix: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        target: Option<Vec<f64>>,
    },
    /// Poisson log-likelihood over a positive box with the Burg reference.
    PoissonBurg {
        #[serde(default = "d_pb_m")]
        m: usize,
        #[serde(default = "d_pb_n")]
        n: usize,
        #[serde(default = "d_pb_lower")]
        lower: f64,
        #[serde(default = "d_pb_upper")]
        upper: f64,
    },
    /// `‖Bx - b‖₁` over `[-1, 1]^n`.
    L1Regression {
        #[serde(default = "d_l1_m")]
        m: usize,
        #[serde(default = "d_l1_n")]
        n: usize,
    },
    /// `‖Bx - b‖^(1+ν)/(1+ν)` over `[-1, 1]^n`.
    Holder {
        #[serde(default = "d_h_m")]
        m: usize,
        #[serde(default = "d_h_n")]
        n: usize,
        #[serde(default = "d_h_nu")]
        nu: f64,
    },
    /// `½‖Bx - b‖²` over an `ℓ1` ball, solved by linear minimization.
    CgBall {
        #[serde(default = "d_cg_m")]
        m: usize,
        #[serde(default = "d_cg_n")]
        n: usize,
        #[serde(default = "d_one")]
        radius: f64,
    },
}

impl InstanceKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SimplexQuadratic { .. } => "simplex-quadratic",
            Self::Lasso { .. } => "lasso",
            Self::PoissonBurg { .. } => "poisson-burg",
            Self::L1Regression { .. } => "l1-regression",
            Self::Holder { .. } => "holder",
            Self::CgBall { .. } => "cg-ball",
        }
    }
}

struct Draws(SplitMix64);

impl Draws {
    fn new(seed: u64) -> Self {
        Self(SplitMix64::seed_from_u64(seed))
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.0.gen::<f64>()
    }

    fn vector(&mut self, n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|_| self.uniform(lo, hi)).collect()
    }

    fn matrix(&mut self, m: usize, n: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
        (0..m).map(|_| self.vector(n, lo, hi)).collect()
    }
}

fn matvec(rows: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    rows.iter()
        .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

fn to_dmatrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(m, n, |i, j| rows[i][j])
}

/// Largest eigenvalue of `BᵀB`, i.e. `‖B‖₂²`.
pub fn gram_lambda_max(rows: &[Vec<f64>]) -> f64 {
    let b = to_dmatrix(rows);
    let gram = b.transpose() * &b;
    SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, &v| m.max(v))
}

/// `max_j ‖B e_j‖²`.
pub fn max_column_norm_sq(rows: &[Vec<f64>]) -> f64 {
    let n = rows.first().map_or(0, Vec::len);
    (0..n)
        .map(|j| rows.iter().map(|r| r[j] * r[j]).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `max_{σ ∈ {-1,1}^m} ‖Bᵀσ‖²` by enumeration.
pub fn max_signed_row_sum_sq(rows: &[Vec<f64>]) -> Result<f64> {
    let m = rows.len();
    if m > 20 {
        return Err(Error::InvalidParameter(format!(
            "sign enumeration over {m} rows is too large (max 20)"
        )));
    }
    let n = rows.first().map_or(0, Vec::len);
    let mut best = 0.0f64;
    // σ and -σ give the same norm, so fix σ_0 = +1
    for mask in 0..(1u64 << m.saturating_sub(1)) {
        let mut acc = vec![0.0; n];
        for (i, row) in rows.iter().enumerate() {
            let sign = if i > 0 && (mask >> (i - 1)) & 1 == 1 {
                -1.0
            } else {
                1.0
            };
            for j in 0..n {
                acc[j] += sign * row[j];
            }
        }
        best = best.max(acc.iter().map(|v| v * v).sum());
    }
    Ok(best)
}

fn vec_s<S: Scalar>(v: &[f64]) -> Vector<S> {
    Vector::from_f64(v)
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if n == 0 || m == 0 || n > MAX_DIM || m > MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "dimensions {m} x {n} outside 1..={MAX_DIM}"
        )));
    }
    Ok(())
}

fn check_rows(rows: &[Vec<f64>]) -> Result<(usize, usize)> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    check_dims(m, n)?;
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter("ragged matrix".into()));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok((m, n))
}

/// Builds the instance described by `spec`.
pub fn make_instance<S: Scalar>(spec: &InstanceSpec) -> Result<ProblemInstance<S>> {
    let mut draws = Draws::new(spec.seed);
    let inst = match &spec.kind {
        InstanceKind::SimplexQuadratic {
            m,
            n,
            reference,
            q_matrix,
            q_vector,
        } => simplex_quadratic(
            &mut draws,
            *m,
            *n,
            *reference,
            q_matrix.as_deref(),
            q_vector.as_deref(),
        )?,
        InstanceKind::Lasso {
            m,
            n,
            lambda,
            matrix,
            target,
        } => lasso(
            &mut draws,
            *m,
            *n,
            *lambda,
            matrix.as_deref(),
            target.as_deref(),
        )?,
        InstanceKind::PoissonBurg { m, n, lower, upper } => {
            poisson_burg(&mut draws, *m, *n, *lower, *upper)?
        }
        InstanceKind::L1Regression { m, n } => l1_regression(&mut draws, *m, *n)?,
        InstanceKind::Holder { m, n, nu } => holder(&mut draws, *m, *n, *nu)?,
        InstanceKind::CgBall { m, n, radius } => cg_ball(&mut draws, *m, *n, *radius)?,
    };
    inst.validate()?;
    Ok(inst)
}

/// Builds registry instance `name` with default parameters.
pub fn make_named<S: Scalar>(name: &str, seed: u64) -> Result<ProblemInstance<S>> {
    make_instance(&InstanceSpec::named(name, seed)?)
}

fn simplex_quadratic<S: Scalar>(
    draws: &mut Draws,
    m: usize,
    n: usize,
    h: ReferenceFn,
    q_matrix: Option<&[Vec<f64>]>,
    q_vector: Option<&[f64]>,
) -> Result<ProblemInstance<S>> {
    if h == ReferenceFn::Burg {
        return Err(Error::InvalidParameter(
            "simplex-quadratic supports entropy, squared-euclidean or zero".into(),
        ));
    }
    let (rows, target, offset, optimum) = match q_matrix {
        Some(q) => {
            let (rows, target, offset) = factor_quadratic(q, q_vector)?;
            (rows, target, offset, None)
        }
        None => {
            check_dims(m, n)?;
            let rows = draws.matrix(m, n, -1.0, 1.0);
            let w = draws.vector(n, 0.5, 1.5);
            let total: f64 = w.iter().sum();
            let planted: Vec<f64> = w.iter().map(|v| v / total).collect();
            let target = matvec(&rows, &planted);
            (rows, target, 0.0, Some(planted))
        }
    };
    let n = rows[0].len();
    let claims = match h {
        ReferenceFn::Entropy => {
            let l = max_column_norm_sq(&rows);
            vec![
                Claim::RelativeSmooth { l },
                Claim::TriangleSmooth { l, gamma: 2.0 },
            ]
        }
        ReferenceFn::SquaredEuclidean => {
            let l = gram_lambda_max(&rows);
            vec![
                Claim::RelativeSmooth { l },
                Claim::TriangleSmooth { l, gamma: 2.0 },
            ]
        }
        _ => vec![Claim::Curvature {
            m: 4.0 * max_column_norm_sq(&rows),
            nu: 1.0,
        }],
    };
    Ok(ProblemInstance {
        name: "simplex-quadratic".into(),
        a: LinearMap::from_rows(&rows)?,
        f: SmoothFn::LeastSquares {
            target: vec_s(&target),
            offset: S::lit(offset),
        },
        psi: SimpleFn::Simplex,
        h,
        claims,
        known_optimum: optimum.map(|p| KnownOptimum {
            value: S::lit(offset),
            point: vec_s(&p),
        }),
        start: Vector::filled(n, S::one() / S::from_count(n)),
    })
}

/// Writes `½ xᵀQx + qᵀx` as `½‖Bx - b‖² + offset`.
fn factor_quadratic(q: &[Vec<f64>], lin: Option<&[f64]>) -> Result<(Vec<Vec<f64>>, Vec<f64>, f64)> {
    let (rows, n) = check_rows(q)?;
    if rows != n {
        return Err(Error::InvalidParameter("q_matrix must be square".into()));
    }
    let qm = to_dmatrix(q);
    let scale = qm.abs().max().max(1.0);
    if (&qm - qm.transpose()).abs().max() > 1e-12 * scale {
        return Err(Error::InvalidParameter("q_matrix must be symmetric".into()));
    }
    let lin = lin.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    if lin.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: lin.len(),
        });
    }
    let eig = SymmetricEigen::new(qm);
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    if eig.eigenvalues.iter().any(|&l| l < -1e-12 * scale) {
        return Err(Error::InvalidParameter(
            "q_matrix must be positive semidefinite".into(),
        ));
    }
    let mut b_rows = Vec::new();
    let mut target = Vec::new();
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l <= 1e-14 * lmax.max(f64::MIN_POSITIVE) {
            continue;
        }
        let v = eig.eigenvectors.column(i);
        let root = l.sqrt();
        b_rows.push(v.iter().map(|x| root * x).collect::<Vec<_>>());
        let proj: f64 = v.iter().zip(&lin).map(|(a, b)| a * b).sum();
        target.push(-proj / root);
    }
    if b_rows.is_empty() {
        return Err(Error::InvalidParameter("q_matrix must be nonzero".into()));
    }
    // the linear term must lie in the range of Q
    let mut back = lin.clone();
    for (row, &bi) in b_rows.iter().zip(&target) {
        for j in 0..n {
            back[j] += row[j] * bi;
        }
    }
    let lin_norm = lin.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if back.iter().any(|x| x.abs() > 1e-10 * (1.0 + lin_norm)) {
        return Err(Error::InvalidParameter(
            "q_vector must lie in the range of q_matrix".into(),
        ));
    }
    let offset = -0.5 * target.iter().map(|x| x * x).sum::<f64>();
    Ok((b_rows, target, offset))
}

fn lasso<S: Scalar>(
    draws: &mut Draws,
    m: usize,
    n: usize,
    lambda: Option<f64>,
    matrix: Option<&[Vec<f64>]>,
    target: Option<&[f64]>,
) -> Result<ProblemInstance<S>> {
    let (rows, b) = match (matrix, target) {
        (Some(rows), Some(b)) => {
            let (m, _) = check_rows(rows)?;
            if b.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: b.len(),
                });
            }
            (rows.to_vec(), b.to_vec())
        }
        (None, None) => {
            check_dims(m, n)?;
            // decaying column scales make the problem ill-conditioned
            let mut rows = draws.matrix(m, n, -1.0, 1.0);
            for row in rows.iter_mut() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v /= 1.0 + j as f64 / 4.0;
                }
            }
            let mut sparse = vec![0.0; n];
            for j in 0..n.min(5) {
                sparse[j * n / n.min(5)] = draws.uniform(-1.0, 1.0);
            }
            let mut b = matvec(&rows, &sparse);
            for v in b.iter_mut() {
                *v += draws.uniform(-0.1, 0.1);
            }
            (rows, b)
        }
        _ => {
            return Err(Error::InvalidParameter(
                "lasso needs both `matrix` and `target` or neither".into(),
            ))
        }
    };
    let n = rows[0].len();
    let lambda = match lambda {
        Some(l) if l > 0.0 && l.is_finite() => l,
        Some(l) => {
            return Err(Error::InvalidParameter(format!(
                "lambda = {l} must be positive"
            )))
        }
        None => {
            // a tenth of the smallest penalty with a zero solution
            let mut corr = vec![0.0f64; n];
            for (row, bi) in rows.iter().zip(&b) {
                for j in 0..n {
                    corr[j] += row[j] * bi;
                }
            }
            0.1 * corr.iter().fold(0.0f64, |a, c| a.max(c.abs()))
        }
    };
    let l = gram_lambda_max(&rows);
    Ok(ProblemInstance {
        name: "lasso".into(),
        a: LinearMap::from_rows(&rows)?,
        f: SmoothFn::LeastSquares {
            target: vec_s(&b),
            offset: S::zero(),
        },
        psi: SimpleFn::L1 {
            lambda: S::lit(lambda),
        },
        h: ReferenceFn::SquaredEuclidean,
        claims: vec![
            Claim::RelativeSmooth { l },
            Claim::TriangleSmooth { l, gamma: 2.0 },
        ],
        known_optimum: None,
        start: Vector::zeros(n),
    })
}

fn poisson_burg<S: Scalar>(
    draws: &mut Draws,
    m: usize,
    n: usize,
    lower: f64,
    upper: f64,
) -> Result<ProblemInstance<S>> {
    check_dims(m, n)?;
    if !(lower > 0.0 && upper > lower && upper.is_finite()) {
        return Err(Error::InvalidParameter(
            "poisson-burg needs 0 < lower < upper < ∞".into(),
        ));
    }
    let rows = draws.matrix(m, n, 0.1, 1.0);
    let lo = lower.max(0.5).min(upper);
    let hi = upper.min(1.5).max(lo);
    let planted = draws.vector(n, lo, hi);
    let b = matvec(&rows, &planted);
    let l: f64 = b.iter().sum();
    let value: f64 = b.iter().map(|v| v - v * v.ln()).sum();
    let mid = 0.5 * (lower + upper);
    let start = if (lower..=upper).contains(&1.0) {
        1.0
    } else {
        mid
    };
    Ok(ProblemInstance {
        name: "poisson-burg".into(),
        a: LinearMap::from_rows(&rows)?,
        f: SmoothFn::PoissonLikelihood { counts: vec_s(&b) },
        psi: SimpleFn::Box {
            lower: Vector::filled(n, S::lit(lower)),
            upper: Vector::filled(n, S::lit(upper)),
        },
        h: ReferenceFn::Burg,
        claims: vec![
            Claim::RelativeSmooth { l },
            Claim::TriangleSmooth { l, gamma: 1.0 },
        ],
        known_optimum: Some(KnownOptimum {
            value: S::lit(value),
            point: vec_s(&planted),
        }),
        start: Vector::filled(n, S::lit(start)),
    })
}

fn unit_box<S: Scalar>(n: usize) -> SimpleFn<S> {
    SimpleFn::Box {
        lower: Vector::filled(n, -S::one()),
        upper: Vector::filled(n, S::one()),
    }
}

fn l1_regression<S: Scalar>(draws: &mut Draws, m: usize, n: usize) -> Result<ProblemInstance<S>> {
    check_dims(m, n)?;
    let rows = draws.matrix(m, n, -1.0, 1.0);
    let planted = draws.vector(n, -0.5, 0.5);
    let b = matvec(&rows, &planted);
    let mconst = max_signed_row_sum_sq(&rows)?;
    Ok(ProblemInstance {
        name: "l1-regression".into(),
        a: LinearMap::from_rows(&rows)?,
        f: SmoothFn::L1Residual { target: vec_s(&b) },
        psi: unit_box(n),
        h: ReferenceFn::SquaredEuclidean,
        claims: vec![Claim::RelativeContinuity { m: mconst }],
        known_optimum: Some(KnownOptimum {
            value: S::zero(),
            point: vec_s(&planted),
        }),
        start: Vector::zeros(n),
    })
}

fn holder<S: Scalar>(draws: &mut Draws, m: usize, n: usize, nu: f64) -> Result<ProblemInstance<S>> {
    check_dims(m, n)?;
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "holder exponent nu = {nu} outside (0, 1)"
        )));
    }
    let rows = draws.matrix(m, n, -1.0, 1.0);
    let planted = draws.vector(n, -0.5, 0.5);
    let b = matvec(&rows, &planted);
    let norm = gram_lambda_max(&rows).sqrt();
    let mconst = 2f64.powf((1.0 - nu) / 2.0) * norm.powf(1.0 + nu);
    Ok(ProblemInstance {
        name: "holder".into(),
        a: LinearMap::from_rows(&rows)?,
        f: SmoothFn::HolderResidual {
            target: vec_s(&b),
            nu: S::lit(nu),
        },
        psi: unit_box(n),
        h: ReferenceFn::SquaredEuclidean,
        claims: vec![Claim::HolderSmooth { m: mconst, nu }],
        known_optimum: Some(KnownOptimum {
            value: S::zero(),
            point: vec_s(&planted),
        }),
        start: Vector::zeros(n),
    })
}

fn cg_ball<S: Scalar>(
    draws: &mut Draws,
    m: usize,
    n: usize,
    radius: f64,
) -> Result<ProblemInstance<S>> {
    check_dims(m, n)?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "radius = {radius} must be positive"
        )));
    }
    let rows = draws.matrix(m, n, -1.0, 1.0);
    let dir = draws.vector(n, -1.0, 1.0);
    let l1: f64 = dir.iter().map(|v| v.abs()).sum();
    let center: Vec<f64> = dir.iter().map(|v| 0.5 * radius * v / l1).collect();
    let b = matvec(&rows, &center);
    let mconst = 4.0 * radius * radius * max_column_norm_sq(&rows);
    Ok(ProblemInstance {
        name: "cg-ball".into(),
        a: LinearMap::from_rows(&rows)?,
        f: SmoothFn::LeastSquares {
            target: vec_s(&b),
            offset: S::zero(),
        },
        psi: SimpleFn::L1Ball {
            radius: S::lit(radius),
        },
        h: ReferenceFn::Zero,
        claims: vec![Claim::Curvature { m: mconst, nu: 1.0 }],
        known_optimum: Some(KnownOptimum {
            value: S::zero(),
            point: vec_s(&center),
        }),
        start: Vector::basis(n, 0, S::lit(radius)),
    })
}

/// Default configurations of every method that can run on `inst` and whose
/// convergence bound has its constants declared (the subgradient method
/// needs none to run).
pub fn compatible_methods<S: Scalar>(inst: &ProblemInstance<S>) -> Vec<MethodConfig> {
    if inst.h.is_zero() {
        return vec![
            MethodConfig::ConditionalSubgradient {
                nu: None,
                schedule: CgSchedule::Theta,
            },
            MethodConfig::ConditionalSubgradient {
                nu: None,
                schedule: CgSchedule::LineSearch {
                    max_iters: 64,
                    interval_tol: 1e-10,
                },
            },
        ];
    }
    let smooth = StepRule::BacktrackSmooth {
        params: Backtracking::default(),
    };
    let mut out = Vec::new();
    if inst.relative_smooth().is_some() {
        out.push(MethodConfig::ProxGradient {
            rule: smooth.clone(),
        });
    }
    out.push(MethodConfig::ProxSubgradient { c: 1.0 });
    if inst.triangle_smooth().is_some() {
        out.push(MethodConfig::FastGradient {
            gamma: None,
            rule: smooth,
        });
    }
    if inst.holder_smooth().is_some() {
        out.push(MethodConfig::UniversalGradient {
            eps: 1e-3,
            backtracking: Backtracking::default(),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_registry_name_builds() {
        for name in REGISTRY {
            let inst = make_named::<f64>(name, 3).unwrap();
            assert_eq!(inst.name, name);
            inst.validate().unwrap();
            assert!(!compatible_methods(&inst).is_empty());
        }
        assert!(matches!(
            InstanceSpec::named("nope", 0),
            Err(Error::UnknownInstance(_))
        ));
    }

    #[test]
    fn regeneration_is_bit_identical() {
        for name in REGISTRY {
            let a = make_named::<f64>(name, 11).unwrap();
            let b = make_named::<f64>(name, 11).unwrap();
            assert_eq!(a, b);
            let c = make_named::<f64>(name, 12).unwrap();
            assert_ne!(a.a, c.a);
        }
    }

    #[test]
    fn spec_defaults_match_named() {
        let parsed: InstanceSpec =
            serde_json::from_str(r#"{"name": "holder", "seed": 4}"#).unwrap();
        assert_eq!(parsed, InstanceSpec::named("holder", 4).unwrap());
        let parsed: InstanceSpec = serde_json::from_str(r#"{"name": "lasso"}"#).unwrap();
        assert_eq!(parsed, InstanceSpec::named("lasso", 0).unwrap());
    }

    #[test]
    fn quadratic_factorization_reproduces_objective() {
        let q = vec![vec![2.0, 0.5], vec![0.5, 1.0]];
        let lin = [0.3, -0.2];
        let (rows, target, offset) = factor_quadratic(&q, Some(&lin)).unwrap();
        for x in [[0.2, 0.8], [1.0, -3.0]] {
            let direct = 0.5 * (x[0] * (2.0 * x[0] + 0.5 * x[1]) + x[1] * (0.5 * x[0] + x[1]))
                + lin[0] * x[0]
                + lin[1] * x[1];
            let bx = matvec(&rows, &x);
            let via: f64 = 0.5
                * bx.iter()
                    .zip(&target)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                + offset;
            assert!((direct - via).abs() < 1e-13, "{direct} vs {via}");
        }
        let singular = vec![vec![1.0, 0.0], vec![0.0, 0.0]];
        assert!(factor_quadratic(&singular, Some(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn sign_enumeration() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        // σ = (1, 1, 1): (2, 2) -> 8
        assert_eq!(max_signed_row_sum_sq(&rows).unwrap(), 8.0);
    }

    #[test]
    fn planted_optima_are_stationary() {
        let inst = make_named::<f64>("poisson-burg", 5).unwrap();
        let opt = inst.known_optimum.clone().unwrap();
        assert!((inst.objective(&opt.point).unwrap() - opt.value).abs() < 1e-10);
        let g = inst
            .f
            .subgradient(&inst.a.apply(&opt.point).unwrap())
            .unwrap();
        assert!(inst.a.adjoint_apply(&g).unwrap().norm_inf() < 1e-12);
        for name in ["simplex-quadratic", "l1-regression", "holder", "cg-ball"] {
            let inst = make_named::<f64>(name, 5).unwrap();
            let opt = inst.known_optimum.clone().unwrap();
            assert!(inst.objective(&opt.point).unwrap().abs() < 1e-12, "{name}");
        }
    }

    #[test]
    fn single_precision_instances() {
        for name in REGISTRY {
            let inst = make_named::<f32>(name, 2).unwrap();
            inst.validate().unwrap();
        }
    }
}
