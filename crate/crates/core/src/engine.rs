//! The generic primal–dual iteration and its duality certificates.
//!
//! One iteration is split into [`propose`], which evaluates every quantity
//! that depends on a candidate step size, and [`EngineState::commit`], which
//! folds an accepted proposal into the running sums. Step rules call
//! `propose` as often as they need and commit exactly once.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::oracles::prox::{fenchel_conjugate_at_subgradient, ProxSolution};
use crate::oracles::{ProblemInstance, SimpleFn};
use crate::scalar::{CompensatedSum, Scalar};

/// How the point `y_k` at which `f` is linearized is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YSelector {
    /// `y_k = s_{k-1}`.
    ProxPoint,
    /// `y_k = x_k`.
    CurrentAverage,
    /// `y_k = (1 - θ_k) x_k + θ_k s_{k-1}`.
    FastCombo,
}

/// Which averaged point the certificate evaluates the primal objective at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportMode {
    AverageX,
    AverageZ,
}

/// A step size and its averaging weight `θ = t / (T + t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step<S> {
    pub t: S,
    pub theta: S,
}

impl<S: Scalar> Step<S> {
    pub fn from_t(t: S, t_prev_sum: S) -> Self {
        Self {
            t,
            theta: t / (t_prev_sum + t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct VectorSum<S> {
    parts: Vec<CompensatedSum<S>>,
}

impl<S: Scalar> VectorSum<S> {
    fn new(dim: usize) -> Self {
        Self {
            parts: vec![CompensatedSum::new(); dim],
        }
    }

    fn add_scaled(&mut self, alpha: S, v: &Vector<S>) {
        for (p, &x) in self.parts.iter_mut().zip(v.iter()) {
            p.add(alpha * x);
        }
    }

    fn value(&self) -> Vector<S> {
        self.parts.iter().map(CompensatedSum::value).collect()
    }
}

/// Everything computed for one candidate step.
#[derive(Debug, Clone)]
pub struct Proposal<S> {
    pub step: Step<S>,
    pub y: Vector<S>,
    pub ay: Vector<S>,
    pub g: Vector<S>,
    /// `A* g`, the linear term of the subproblem.
    pub c: Vector<S>,
    pub sol: ProxSolution<S>,
    pub as_: Vector<S>,
    /// `𝒟(x_k, y_k, s_k, θ_k)`.
    pub script_d: S,
    /// `D_h(s_k, s_{k-1})`.
    pub bregman_h: S,
}

impl<S: Scalar> Proposal<S> {
    /// `(t/θ) 𝒟 - D_h(s_k, s_{k-1})`, the per-iteration excess that the
    /// descent conditions bound from above.
    pub fn excess(&self, t_prev_sum: S) -> S {
        (t_prev_sum + self.step.t) * self.script_d - self.bregman_h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineState<S> {
    pub k: usize,
    /// `s_{k-1}`.
    pub s_prev: Vector<S>,
    /// `s_{-1}`.
    pub s_anchor: Vector<S>,
    pub x: Vector<S>,
    pub z: Vector<S>,
    ax: Vector<S>,
    t_sum: CompensatedSum<S>,
    t_sq_sum: CompensatedSum<S>,
    u_sum: VectorSum<S>,
    w_sum: VectorSum<S>,
    gpsi_sum: VectorSum<S>,
    s_weighted: VectorSum<S>,
    y_weighted: VectorSum<S>,
    cf: CompensatedSum<S>,
    cpsi: CompensatedSum<S>,
    sfy: CompensatedSum<S>,
    spsiy: CompensatedSum<S>,
    sprimal_s: CompensatedSum<S>,
    ssub: CompensatedSum<S>,
    sgrad: CompensatedSum<S>,
    eps_sum: Option<CompensatedSum<S>>,
    cggap: Option<S>,
    pub last_step: Option<Step<S>>,
}

impl<S: Scalar> EngineState<S> {
    /// `x_0 = z_0 = s_{-1}` = the instance's starting point.
    pub fn init(inst: &ProblemInstance<S>) -> Result<Self> {
        inst.validate()?;
        let n = inst.dim();
        let m = inst.a.output_dim();
        let start = inst.start.clone();
        Ok(Self {
            k: 0,
            ax: inst.a.apply(&start)?,
            s_prev: start.clone(),
            s_anchor: start.clone(),
            x: start.clone(),
            z: start,
            t_sum: CompensatedSum::new(),
            t_sq_sum: CompensatedSum::new(),
            u_sum: VectorSum::new(m),
            w_sum: VectorSum::new(n),
            gpsi_sum: VectorSum::new(n),
            s_weighted: VectorSum::new(n),
            y_weighted: VectorSum::new(n),
            cf: CompensatedSum::new(),
            cpsi: CompensatedSum::new(),
            sfy: CompensatedSum::new(),
            spsiy: CompensatedSum::new(),
            sprimal_s: CompensatedSum::new(),
            ssub: CompensatedSum::new(),
            sgrad: CompensatedSum::new(),
            eps_sum: Some(CompensatedSum::new()),
            cggap: None,
            last_step: None,
        })
    }

    /// `T_k = Σ_{i<k} t_i`.
    pub fn t_total(&self) -> S {
        self.t_sum.value()
    }

    pub fn t_squared_total(&self) -> S {
        self.t_sq_sum.value()
    }

    /// `A x_k`.
    pub fn ax(&self) -> &Vector<S> {
        &self.ax
    }

    /// `u_k = Σ t_i g_i / T_k`.
    pub fn u(&self) -> Vector<S> {
        self.u_sum.value().scale(self.t_total().recip())
    }

    /// `w_k = Σ t_i (A* g_i + g_i^Ψ) / T_k`.
    pub fn w(&self) -> Vector<S> {
        self.w_sum.value().scale(self.t_total().recip())
    }

    /// `Σ t_i g_i^Ψ / T_k`, which equals `w_k - A* u_k`.
    pub fn v(&self) -> Vector<S> {
        self.gpsi_sum.value().scale(self.t_total().recip())
    }

    /// `x_k` and `z_k` recomputed as weighted sums rather than recursively.
    pub fn averages_from_scratch(&self) -> (Vector<S>, Vector<S>) {
        let inv = self.t_total().recip();
        (
            self.s_weighted.value().scale(inv),
            self.y_weighted.value().scale(inv),
        )
    }

    /// `Σ t_i F(s_i) / T_k`.
    pub fn average_primal_s(&self) -> S {
        self.sprimal_s.value() / self.t_total()
    }

    /// `CGgap_k`, maintained when `h = 0`.
    pub fn cggap(&self) -> Option<S> {
        self.cggap
    }

    /// `Σ ε_i` when every committed step declared its slack.
    pub fn eps_total(&self) -> Option<S> {
        self.eps_sum.map(|s| s.value())
    }

    /// Folds an accepted proposal into the state. `eps` is the slack the
    /// step rule guaranteed for `(t/θ) 𝒟 - D_h(s, s_prev)`, if any.
    pub fn commit(
        &mut self,
        inst: &ProblemInstance<S>,
        p: Proposal<S>,
        eps: Option<S>,
    ) -> Result<()> {
        let Step { t, theta } = p.step;
        let s = &p.sol.s;

        let fy = inst.f.value(&p.ay);
        let psi_y = inst.psi.value(&p.y);
        let fs = inst.f.value(&p.as_);
        let psi_s = inst.psi.value(s);
        let f_star = fenchel_conjugate_at_subgradient(fy, &p.ay, &p.g);
        let psi_star = fenchel_conjugate_at_subgradient(psi_s, s, &p.sol.g_psi);
        for v in [fy, psi_y, psi_s, f_star, psi_star] {
            if !v.is_finite() {
                return Err(Error::Domain(format!(
                    "iteration {} produced a non-finite oracle value",
                    self.k
                )));
            }
        }

        self.t_sum.add(t);
        self.t_sq_sum.add(t * t);
        let t_new = self.t_total();
        self.cf.add(t * f_star);
        self.cpsi.add(t * psi_star);
        self.sfy.add(t * fy);
        self.spsiy.add(t * psi_y);
        self.sprimal_s.add(t * (fs + psi_s));
        let lin = p.c.dot(&s.sub(&p.y));
        self.ssub.add(t * (psi_y - psi_s - lin) - p.bregman_h);
        self.sgrad.add(t_new * p.script_d - p.bregman_h);

        self.u_sum.add_scaled(t, &p.g);
        self.w_sum.add_scaled(t, &p.c.add(&p.sol.g_psi));
        self.gpsi_sum.add_scaled(t, &p.sol.g_psi);
        self.s_weighted.add_scaled(t, s);
        self.y_weighted.add_scaled(t, &p.y);

        if inst.h.is_zero() {
            let prev = self.cggap.unwrap_or(S::zero());
            self.cggap = Some((S::one() - theta) * prev + p.script_d);
        }
        self.eps_sum = match (self.eps_sum, eps) {
            (Some(mut acc), Some(e)) => {
                acc.add(e);
                Some(acc)
            }
            _ => None,
        };

        self.x = self.x.lerp(s, theta);
        self.z = self.z.lerp(&p.y, theta);
        self.ax = inst.a.apply(&self.x)?;
        self.s_prev = p.sol.s;
        self.last_step = Some(p.step);
        self.k += 1;
        Ok(())
    }

    /// `d_k*(-w_k)` in closed form; zero when `h = 0`.
    pub fn d_conjugate(&self, inst: &ProblemInstance<S>) -> Result<S> {
        if self.k == 0 {
            return Err(Error::NoIterations);
        }
        if inst.h.is_zero() {
            return Ok(S::zero());
        }
        let gs = inst.h.gradient(&self.s_prev)?;
        let ga = inst.h.gradient(&self.s_anchor)?;
        let pairing = gs.sub(&ga).dot(&self.s_prev);
        let dist = inst.h.bregman(&self.s_prev, &self.s_anchor)?;
        Ok((pairing - dist) / self.t_total())
    }

    /// Duality certificate after `k >= 1` iterations.
    pub fn certificate(
        &self,
        inst: &ProblemInstance<S>,
        mode: ReportMode,
    ) -> Result<Certificate<S>> {
        if self.k == 0 {
            return Err(Error::NoIterations);
        }
        let tt = self.t_total();
        let point = match mode {
            ReportMode::AverageX => &self.x,
            ReportMode::AverageZ => &self.z,
        };
        let primal = inst.objective(point)?;
        let primal_x = match mode {
            ReportMode::AverageX => primal,
            ReportMode::AverageZ => inst.objective(&self.x)?,
        };
        let d_conj = self.d_conjugate(inst)?;
        let u = self.u();
        let f_star_u = inst.f.conjugate(&u);
        let psi_star_v = inst.psi.conjugate(&self.v());
        let dual_surrogate = -f_star_u - psi_star_v - d_conj;

        let ssub = self.ssub.value() / tt;
        let sgrad = self.sgrad.value() / tt;
        let cf = self.cf.value() / tt;
        let cpsi = self.cpsi.value() / tt;
        let lhs1 = (self.sfy.value() + self.spsiy.value()) / tt + cf + cpsi + d_conj;
        let lhs2 = primal_x + cf + cpsi + d_conj;
        let rel = |lhs: S, rhs: S| (lhs - rhs).abs() / rhs.abs().max(S::one());

        let minus_adj_u = inst.a.adjoint_apply(&u)?.scale(-S::one());
        let fenchel_dual = -f_star_u - inst.psi.conjugate(&minus_adj_u);
        let floor = if inst.h.is_zero() {
            S::zero()
        } else {
            -inst.h.bregman(point, &self.s_anchor)? / tt
        };

        Ok(Certificate {
            primal,
            dual_surrogate,
            gap: primal - dual_surrogate,
            delta: match mode {
                ReportMode::AverageX => sgrad,
                ReportMode::AverageZ => ssub,
            },
            thm1_residual: rel(lhs1, ssub),
            thm2_residual: rel(lhs2, sgrad),
            d_conjugate: d_conj,
            fenchel_dual,
            fenchel_gap: primal - fenchel_dual,
            perturbation_floor: floor,
            cggap: self.cggap,
        })
    }

    /// `D_h(point, x_0) / T_k + δ_k`, an upper bound on `F(report) - F(point)`.
    pub fn probe_bound(&self, inst: &ProblemInstance<S>, point: &Vector<S>, delta: S) -> Result<S> {
        let d = if inst.h.is_zero() {
            S::zero()
        } else {
            inst.h.bregman(point, &self.s_anchor)?
        };
        Ok(d / self.t_total() + delta)
    }
}

/// Primal value, perturbed dual value and the identities behind them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate<S> {
    pub primal: S,
    /// `-f*(u_k) - Ψ*(w_k - A* u_k) - d_k*(-w_k)`.
    pub dual_surrogate: S,
    pub gap: S,
    pub delta: S,
    pub thm1_residual: S,
    pub thm2_residual: S,
    pub d_conjugate: S,
    /// Unperturbed Fenchel dual `-f*(u_k) - Ψ*(-A* u_k)`, possibly `-∞`.
    pub fenchel_dual: S,
    pub fenchel_gap: S,
    /// `-d_k(point)`; the perturbed gap can never drop below this value.
    pub perturbation_floor: S,
    pub cggap: Option<S>,
}

/// Evaluates `y_k`, `g_k`, `s_k` and the descent quantities for one step.
pub fn propose<S: Scalar>(
    state: &EngineState<S>,
    inst: &ProblemInstance<S>,
    ysel: YSelector,
    step: Step<S>,
) -> Result<Proposal<S>> {
    let theta = step.theta;
    let y = match ysel {
        YSelector::ProxPoint => state.s_prev.clone(),
        YSelector::CurrentAverage => state.x.clone(),
        YSelector::FastCombo => state.x.lerp(&state.s_prev, theta),
    };
    let ay = inst.a.apply(&y)?;
    let g = inst.f.subgradient(&ay)?;
    let c = inst.a.adjoint_apply(&g)?;
    let sol = inst.prox(&c, step.t, &state.s_prev)?;
    sol.s.check_finite()?;
    let as_ = inst.a.apply(&sol.s)?;
    let script_d = script_d_mapped(inst, &state.x, &state.ax, &ay, &g, &sol.s, &as_, theta);
    let bregman_h = inst.h.bregman(&sol.s, &state.s_prev)?;
    Ok(Proposal {
        step,
        y,
        ay,
        g,
        c,
        sol,
        as_,
        script_d,
        bregman_h,
    })
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn script_d_mapped<S: Scalar>(
    inst: &ProblemInstance<S>,
    x: &Vector<S>,
    ax: &Vector<S>,
    ay: &Vector<S>,
    g: &Vector<S>,
    s: &Vector<S>,
    as_: &Vector<S>,
    theta: S,
) -> S {
    let link = if theta == S::zero() {
        S::zero()
    } else {
        theta * inst.f.bregman(as_, ay, g)
    };
    link - inst.f.convexity_gap(ax, as_, theta) - inst.psi.convexity_gap(x, s, theta)
}

/// `𝒟(x, y, s, θ) = F(x + θ(s - x)) - (1-θ) F(x) - θ F(s) + θ D_{f∘A}(s, y)`
/// with `F = f∘A + Ψ` and `g ∈ ∂f(Ay)`.
pub fn script_d<S: Scalar>(
    inst: &ProblemInstance<S>,
    x: &Vector<S>,
    y: &Vector<S>,
    g: &Vector<S>,
    s: &Vector<S>,
    theta: S,
) -> Result<S> {
    let ax = inst.a.apply(x)?;
    let ay = inst.a.apply(y)?;
    let as_ = inst.a.apply(s)?;
    check_domain(inst, x, &ax)?;
    check_domain(inst, s, &as_)?;
    Ok(script_d_mapped(inst, x, &ax, &ay, g, s, &as_, theta))
}

/// `D(x, s, θ) = D_f(A x⁺, A x) + Ψ(x⁺) - (1-θ) Ψ(x) - θ Ψ(s)` where
/// `x⁺ = x + θ(s - x)` and `g ∈ ∂f(Ax)`.
pub fn simple_d<S: Scalar>(
    inst: &ProblemInstance<S>,
    x: &Vector<S>,
    g: &Vector<S>,
    s: &Vector<S>,
    theta: S,
) -> Result<S> {
    let ax = inst.a.apply(x)?;
    let as_ = inst.a.apply(s)?;
    check_domain(inst, x, &ax)?;
    check_domain(inst, s, &as_)?;
    Ok(simple_d_mapped(inst, x, &ax, g, s, &as_, theta))
}

pub(crate) fn simple_d_mapped<S: Scalar>(
    inst: &ProblemInstance<S>,
    x: &Vector<S>,
    ax: &Vector<S>,
    g: &Vector<S>,
    s: &Vector<S>,
    as_: &Vector<S>,
    theta: S,
) -> S {
    let mix = ax.lerp(as_, theta);
    inst.f.bregman(&mix, ax, g) - inst.psi.convexity_gap(x, s, theta)
}

fn check_domain<S: Scalar>(inst: &ProblemInstance<S>, x: &Vector<S>, ax: &Vector<S>) -> Result<()> {
    if !inst.f.in_domain(ax) || !inst.psi.contains(x) {
        return Err(Error::Domain("composite objective".into()));
    }
    Ok(())
}

/// `CGgap_{k+1} = (1 - θ_k) CGgap_k + D(x_k, s_k, θ_k)`.
pub fn cggap_update<S: Scalar>(cggap: S, d_val: S, theta: S) -> S {
    (S::one() - theta) * cggap + d_val
}

/// Largest value of the Fenchel dual objective reachable from `u` by
/// rescaling, used to bracket reference optima from below.
///
/// For an `ℓ1` penalty the conjugate is the indicator of a box, so `u` is
/// shrunk until `-A* u` fits; other simple functions use `u` as is.
pub fn fenchel_lower_bound<S: Scalar>(inst: &ProblemInstance<S>, u: &Vector<S>) -> Result<S> {
    let adj = inst.a.adjoint_apply(u)?;
    let u = match &inst.psi {
        SimpleFn::L1 { lambda } => {
            let norm = adj.norm_inf();
            if norm > *lambda {
                u.scale(*lambda / norm * (S::one() - S::lit(1e-15)))
            } else {
                u.clone()
            }
        }
        _ => u.clone(),
    };
    let adj = inst.a.adjoint_apply(&u)?;
    Ok(-inst.f.conjugate(&u) - inst.psi.conjugate(&adj.scale(-S::one())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::LinearMap;
    use crate::oracles::{ReferenceFn, SmoothFn};

    fn v(x: &[f64]) -> Vector<f64> {
        Vector::from_f64(x)
    }

    fn half_square(start: f64) -> ProblemInstance<f64> {
        ProblemInstance {
            name: "half-square".into(),
            a: LinearMap::Identity(1),
            f: SmoothFn::LeastSquares {
                target: v(&[0.0]),
                offset: 0.0,
            },
            psi: SimpleFn::Zero,
            h: ReferenceFn::SquaredEuclidean,
            claims: vec![],
            known_optimum: None,
            start: v(&[start]),
        }
    }

    #[test]
    fn exact_gradient_step_reaches_minimizer() {
        let inst = half_square(1.0);
        let mut st = EngineState::init(&inst).unwrap();
        let p = propose(&st, &inst, YSelector::ProxPoint, Step::from_t(1.0, 0.0)).unwrap();
        assert_eq!(p.g, v(&[1.0]));
        assert_eq!(p.sol.s, v(&[0.0]));
        st.commit(&inst, p, Some(0.0)).unwrap();
        // θ_0 = 1 makes the averages equal the first points
        assert_eq!(st.x, v(&[0.0]));
        assert_eq!(st.z, v(&[1.0]));
        let cert = st.certificate(&inst, ReportMode::AverageX).unwrap();
        assert_eq!(cert.primal, 0.0);
        assert!(cert.thm1_residual < 1e-15 && cert.thm2_residual < 1e-15);
    }

    #[test]
    fn perturbed_gap_can_be_negative() {
        // Ψ = 0, h = |.|^2/2, f = x^2/2, s_{-1} = 1, t = 1/2
        let inst = half_square(1.0);
        let mut st = EngineState::init(&inst).unwrap();
        let p = propose(&st, &inst, YSelector::ProxPoint, Step::from_t(0.5, 0.0)).unwrap();
        st.commit(&inst, p, None).unwrap();
        let cert = st.certificate(&inst, ReportMode::AverageX).unwrap();
        assert!((cert.gap + 0.125).abs() < 1e-15);
        assert!(cert.gap >= cert.perturbation_floor);
        assert!(cert.fenchel_gap >= 0.0);
    }

    #[test]
    fn d_conjugate_examples() {
        let inst = half_square(0.0);
        let mut st = EngineState::init(&inst).unwrap();
        assert_eq!(st.d_conjugate(&inst), Err(Error::NoIterations));
        // drive s_0 = 2 with a single step of length 4: s = 0 - 4 * g, g = -0.5
        let mut shifted = inst.clone();
        shifted.f = SmoothFn::LeastSquares {
            target: v(&[0.5]),
            offset: 0.0,
        };
        let p = propose(&st, &shifted, YSelector::ProxPoint, Step::from_t(4.0, 0.0)).unwrap();
        assert_eq!(p.sol.s, v(&[2.0]));
        st.commit(&shifted, p, None).unwrap();
        assert_eq!(st.d_conjugate(&shifted).unwrap(), 0.5);
    }

    #[test]
    fn script_d_examples() {
        let inst = half_square(0.0);
        let (x, s) = (v(&[0.0]), v(&[1.0]));
        let g = v(&[0.0]);
        assert_eq!(script_d(&inst, &x, &x, &g, &s, 0.0).unwrap(), 0.0);
        assert!((script_d(&inst, &x, &x, &g, &s, 0.5).unwrap() - 0.125).abs() < 1e-16);
        // θ = 1 leaves D_{f∘A}(s, y)
        let y = v(&[0.3]);
        let gy = v(&[0.3]);
        let expected = 0.5 - 0.045 - 0.3 * 0.7;
        assert!((script_d(&inst, &x, &y, &gy, &s, 1.0).unwrap() - expected).abs() < 1e-15);
        for theta in [0.0, 0.25, 0.5, 1.0] {
            let a = simple_d(&inst, &x, &g, &s, theta).unwrap();
            assert!((a - theta * theta / 2.0).abs() < 1e-16);
            assert!((a - script_d(&inst, &x, &x, &g, &s, theta).unwrap()).abs() < 1e-16);
        }
    }

    #[test]
    fn cggap_update_examples() {
        assert_eq!(cggap_update(0.4, 0.0, 0.5), 0.2);
        assert_eq!(cggap_update(7.0, 0.3, 1.0), 0.3);
    }
}
