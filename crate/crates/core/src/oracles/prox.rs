//! Closed-form solvers for the Bregman proximal subproblem
//!
//! ```text
//! s = argmin_s  t (<c, s> + Ψ(s)) + D_h(s, z)
//! ```
//!
//! Every solver also returns the subgradient `g_psi ∈ ∂Ψ(s)` certifying
//! optimality through `t (c + g_psi) + ∇h(s) - ∇h(z) = 0`.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::oracles::reference::ReferenceFn;
use crate::oracles::simple::SimpleFn;
use crate::scalar::Scalar;

/// Coordinates below this value are treated as underflow for entropy updates.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct ProxSolution<S> {
    pub s: Vector<S>,
    pub g_psi: Vector<S>,
}

/// Whether a closed-form solver exists for the pair `(h, Ψ)`.
pub fn is_registered<S: Scalar>(h: ReferenceFn, psi: &SimpleFn<S>) -> bool {
    use ReferenceFn as H;
    match (h, psi) {
        (H::SquaredEuclidean, SimpleFn::Zero)
        | (H::SquaredEuclidean, SimpleFn::L1 { .. })
        | (H::SquaredEuclidean, SimpleFn::Box { .. })
        | (H::SquaredEuclidean, SimpleFn::Simplex)
        | (H::Entropy, SimpleFn::Simplex)
        | (H::Zero, _) => true,
        (H::Burg, SimpleFn::Box { lower, .. }) => lower.iter().all(|&l| l >= S::zero()),
        _ => false,
    }
}

fn unsupported<S: Scalar>(h: ReferenceFn, psi: &SimpleFn<S>) -> Error {
    Error::UnsupportedPair {
        reference: h.name().into(),
        simple: psi.name().into(),
    }
}

/// Solves the proximal subproblem with linear term `c`, step `t` and
/// prox center `z = s_prev`.
pub fn prox_step<S: Scalar>(
    h: ReferenceFn,
    psi: &SimpleFn<S>,
    c: &Vector<S>,
    t: S,
    s_prev: &Vector<S>,
) -> Result<ProxSolution<S>> {
    if !(t > S::zero()) || !t.is_finite() {
        return Err(Error::InvalidStep(t.to_f64_lossy()));
    }
    c.check_dim(s_prev.dim())?;
    c.check_finite()?;
    if !is_registered(h, psi) {
        return Err(unsupported(h, psi));
    }
    if !h.in_gradient_domain(s_prev) {
        return Err(Error::Domain(format!("reference function `{}`", h.name())));
    }

    match h {
        ReferenceFn::Zero => {
            let s = psi.linmin(c)?;
            Ok(ProxSolution {
                s,
                g_psi: c.scale(-S::one()),
            })
        }
        ReferenceFn::SquaredEuclidean => Ok(euclidean(psi, c, t, s_prev)),
        ReferenceFn::Entropy => entropic_simplex(c, t, s_prev),
        ReferenceFn::Burg => match psi {
            SimpleFn::Box { lower, upper } => burg_box(lower, upper, c, t, s_prev),
            _ => Err(unsupported(h, psi)),
        },
    }
}

fn euclidean<S: Scalar>(psi: &SimpleFn<S>, c: &Vector<S>, t: S, z: &Vector<S>) -> ProxSolution<S> {
    let v = z.axpy(-t, c);
    match psi {
        SimpleFn::Zero => ProxSolution {
            s: v.clone(),
            g_psi: Vector::zeros(v.dim()),
        },
        SimpleFn::L1 { lambda } => {
            let thresh = t * *lambda;
            let mut s = Vector::zeros(v.dim());
            let mut g = Vector::zeros(v.dim());
            for i in 0..v.dim() {
                let vi = v[i];
                if vi > thresh {
                    s[i] = vi - thresh;
                    g[i] = *lambda;
                } else if vi < -thresh {
                    s[i] = vi + thresh;
                    g[i] = -*lambda;
                } else {
                    g[i] = (vi / t).max(-*lambda).min(*lambda);
                }
            }
            ProxSolution { s, g_psi: g }
        }
        SimpleFn::Box { lower, upper } => {
            let mut s = v.clone();
            let mut g = Vector::zeros(v.dim());
            for i in 0..v.dim() {
                if v[i] > upper[i] {
                    s[i] = upper[i];
                    g[i] = (v[i] - upper[i]) / t;
                } else if v[i] < lower[i] {
                    s[i] = lower[i];
                    g[i] = (v[i] - lower[i]) / t;
                }
            }
            ProxSolution { s, g_psi: g }
        }
        SimpleFn::Simplex => {
            let s = project_simplex(&v);
            let g = v.sub(&s).scale(t.recip());
            ProxSolution { s, g_psi: g }
        }
        SimpleFn::L1Ball { .. } => unreachable!("pair rejected by is_registered"),
    }
}

/// Euclidean projection onto the unit simplex (sort-based).
pub fn project_simplex<S: Scalar>(v: &Vector<S>) -> Vector<S> {
    let mut sorted: Vec<S> = v.as_slice().to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite input"));
    let mut cumsum = S::zero();
    let mut tau = S::zero();
    for (j, &u) in sorted.iter().enumerate() {
        cumsum = cumsum + u;
        let candidate = (cumsum - S::one()) / S::from_count(j + 1);
        if u - candidate > S::zero() {
            tau = candidate;
        }
    }
    v.map(|x| (x - tau).max(S::zero()))
}

fn entropic_simplex<S: Scalar>(c: &Vector<S>, t: S, z: &Vector<S>) -> Result<ProxSolution<S>> {
    // log s_i = ln z_i - t c_i - log Z, evaluated with a max shift
    let logits: Vector<S> = z.zip_map(c, |zi, ci| zi.ln() - t * ci);
    let shift = logits.iter().fold(S::neg_infinity(), |m, &a| m.max(a));
    let mut total = S::zero();
    for &l in logits.iter() {
        total = total + (l - shift).exp();
    }
    let log_z = shift + total.ln();
    let s = logits.map(|l| (l - log_z).exp());
    let floor = S::lit(UNDERFLOW_FLOOR);
    if s.iter().any(|&x| !(x >= floor)) {
        return Err(Error::Underflow);
    }
    let g = Vector::filled(s.dim(), log_z / t);
    Ok(ProxSolution { s, g_psi: g })
}

fn burg_box<S: Scalar>(
    lower: &Vector<S>,
    upper: &Vector<S>,
    c: &Vector<S>,
    t: S,
    z: &Vector<S>,
) -> Result<ProxSolution<S>> {
    let n = z.dim();
    let mut s = Vector::zeros(n);
    let mut g = Vector::zeros(n);
    for i in 0..n {
        // stationarity of t c_i s - ln s - s / z_i
        let d = z[i].recip() + t * c[i];
        let free = if d > S::zero() {
            d.recip()
        } else {
            S::infinity()
        };
        if free > upper[i] || free == S::infinity() {
            if !upper[i].is_finite() {
                return Err(Error::NotAdmissible(
                    "Burg subproblem unbounded below on an open box side".into(),
                ));
            }
            s[i] = upper[i];
        } else if free < lower[i] {
            s[i] = lower[i];
        } else {
            s[i] = free;
            continue;
        }
        g[i] = (s[i].recip() - d) / t;
    }
    Ok(ProxSolution { s, g_psi: g })
}

/// `‖t (c + g_psi) + ∇h(s) - ∇h(s_prev)‖_∞`.
pub fn optimality_residual<S: Scalar>(
    h: ReferenceFn,
    c: &Vector<S>,
    t: S,
    s_prev: &Vector<S>,
    sol: &ProxSolution<S>,
) -> Result<S> {
    let gs = h.gradient(&sol.s)?;
    let gz = h.gradient(s_prev)?;
    let mut worst = S::zero();
    for i in 0..c.dim() {
        let r = t * (c[i] + sol.g_psi[i]) + (gs[i] - gz[i]);
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Conjugate value at a subgradient pair via the Fenchel–Young equality:
/// `φ*(g) = <g, point> - φ(point)` whenever `g ∈ ∂φ(point)`.
pub fn fenchel_conjugate_at_subgradient<S: Scalar>(
    value: S,
    point: &Vector<S>,
    g: &Vector<S>,
) -> S {
    g.dot(point) - value
}
