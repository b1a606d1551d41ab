//! Best-response dynamics in discrete and continuous time, and local stability
//! of the interior equilibrium.

use crate::contest::{check_nonneg, ModelParams};
use crate::equilibrium::{
    attacker_response_raw, defender_response_raw, defender_response_unclamped, EquilibriumResult,
};
use crate::error::{ModelError, Result};
use crate::scalar::Scalar;

/// Investment pair `(d, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvestmentState<T> {
    pub d: T,
    pub a: T,
}

impl<T: Scalar> InvestmentState<T> {
    pub fn new(d: T, a: T) -> Self {
        Self { d, a }
    }

    pub fn sup_dist(&self, other: &Self) -> T {
        (self.d - other.d).abs().max((self.a - other.a).abs())
    }
}

/// Time-indexed path of `(d, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    /// Step indices (discrete) or integration times (continuous).
    pub times: Vec<T>,
    pub d_path: Vec<T>,
    pub a_path: Vec<T>,
    pub converged: bool,
    /// Trailing-window divergence detector fired.
    pub diverged: bool,
    pub fixed_point: Option<InvestmentState<T>>,
    /// Sup-norm best-response residual at the last evaluated state.
    pub sup_norm_residual: T,
    /// Steps at which the attacker's adoption decision flipped.
    pub br_discontinuities: Vec<usize>,
}

impl<T: Scalar> Trajectory<T> {
    fn start(t0: T, s: InvestmentState<T>) -> Self {
        Self {
            times: vec![t0],
            d_path: vec![s.d],
            a_path: vec![s.a],
            converged: false,
            diverged: false,
            fixed_point: None,
            sup_norm_residual: T::infinity(),
            br_discontinuities: Vec::new(),
        }
    }

    fn push(&mut self, t: T, s: InvestmentState<T>) {
        self.times.push(t);
        self.d_path.push(s.d);
        self.a_path.push(s.a);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> InvestmentState<T> {
        let i = self.times.len() - 1;
        InvestmentState::new(self.d_path[i], self.a_path[i])
    }

    pub fn state(&self, i: usize) -> InvestmentState<T> {
        InvestmentState::new(self.d_path[i], self.a_path[i])
    }
}

/// Best responses at a state plus the attacker's adoption decision.
#[derive(Debug, Clone, Copy)]
struct Responses<T> {
    target: InvestmentState<T>,
    adopted: bool,
}

fn responses<T: Scalar>(p: &ModelParams<T>, s_eff: T, x: InvestmentState<T>) -> Responses<T> {
    let d = x.d.max(T::zero());
    let a = x.a.max(T::zero());
    let att = attacker_response_raw(p, d, s_eff);
    Responses {
        target: InvestmentState::new(defender_response_raw(p, a, s_eff), att.a),
        adopted: att.adopted,
    }
}

/// Sup-norm distance between a state and its best responses.
pub fn best_response_residual<T: Scalar>(
    p: &ModelParams<T>,
    s_eff: T,
    x: InvestmentState<T>,
) -> Result<T> {
    check_state(x)?;
    check_signal(s_eff)?;
    Ok(responses(p, s_eff, x).target.sup_dist(&x))
}

fn check_state<T: Scalar>(x: InvestmentState<T>) -> Result<()> {
    check_nonneg("d", x.d)?;
    check_nonneg("a", x.a)
}

fn check_signal<T: Scalar>(s_eff: T) -> Result<()> {
    if s_eff > T::zero() && s_eff.is_finite() {
        Ok(())
    } else {
        Err(ModelError::Domain {
            name: "s_eff",
            value: s_eff.to_f64_lossy(),
            requirement: "finite and > 0",
        })
    }
}

fn check_eta<T: Scalar>(eta: T) -> Result<()> {
    if eta > T::zero() && eta < T::lit(2.0) {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name: "dynamics.eta",
            value: eta.to_f64_lossy(),
            range: "(0, 2)",
        })
    }
}

/// One damped best-response step `x + eta (BR(x) - x)`, clamped to the
/// nonnegative orthant (only binding for over-relaxed `eta > 1`).
pub fn step_discrete<T: Scalar>(
    p: &ModelParams<T>,
    s_eff: T,
    state: InvestmentState<T>,
    eta: T,
) -> Result<InvestmentState<T>> {
    check_state(state)?;
    check_signal(s_eff)?;
    check_eta(eta)?;
    Ok(damped(state, responses(p, s_eff, state).target, eta))
}

fn damped<T: Scalar>(x: InvestmentState<T>, target: InvestmentState<T>, eta: T) -> InvestmentState<T> {
    InvestmentState::new(
        (x.d + eta * (target.d - x.d)).max(T::zero()),
        (x.a + eta * (target.a - x.a)).max(T::zero()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteOptions<T> {
    pub eta: T,
    pub max_steps: usize,
    pub tol: T,
}

impl<T: Scalar> Default for DiscreteOptions<T> {
    fn default() -> Self {
        Self {
            eta: T::lit(0.15),
            max_steps: 50_000,
            tol: T::lit(1e-8),
        }
    }
}

/// Residual accepted as a best-response fixed point.
pub const FIXED_POINT_RESIDUAL: f64 = 1e-6;
const DIVERGENCE_WINDOW: usize = 50;
const DIVERGENCE_FACTOR: f64 = 1e3;

/// Iterates [`step_discrete`] until the step is below `tol * eta`, the
/// divergence detector fires, or `max_steps` is exhausted.
pub fn simulate_discrete<T: Scalar>(
    p: &ModelParams<T>,
    s_eff: T,
    start: InvestmentState<T>,
    opts: &DiscreteOptions<T>,
) -> Result<Trajectory<T>> {
    check_state(start)?;
    check_signal(s_eff)?;
    check_eta(opts.eta)?;
    if !(opts.tol > T::zero()) {
        return Err(ModelError::InvalidParameter {
            name: "dynamics.tol",
            value: opts.tol.to_f64_lossy(),
            range: "(0, inf)",
        });
    }

    let mut traj = Trajectory::start(T::zero(), start);
    let mut x = start;
    let mut window: Vec<T> = Vec::with_capacity(DIVERGENCE_WINDOW + 1);
    let mut prev_adopted: Option<bool> = None;

    for step in 0..=opts.max_steps {
        let br = responses(p, s_eff, x);
        let residual = br.target.sup_dist(&x);
        traj.sup_norm_residual = residual;
        if let Some(prev) = prev_adopted {
            if prev != br.adopted && p.f() > T::zero() {
                traj.br_discontinuities.push(step);
            }
        }
        prev_adopted = Some(br.adopted);

        if residual < opts.tol {
            traj.converged = residual < T::lit(FIXED_POINT_RESIDUAL);
            if traj.converged {
                traj.fixed_point = Some(x);
            }
            break;
        }

        window.push(residual);
        if window.len() > DIVERGENCE_WINDOW {
            window.remove(0);
        }
        if window.len() == DIVERGENCE_WINDOW
            && residual > T::lit(DIVERGENCE_FACTOR) * opts.tol
            && window.windows(2).all(|w| w[1] >= w[0])
        {
            traj.diverged = true;
            break;
        }
        if step == opts.max_steps {
            break;
        }

        x = damped(x, br.target, opts.eta);
        traj.push(T::from_count(step + 1), x);
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousOptions<T> {
    pub t_end: T,
    pub dt: T,
    pub tol: T,
}

impl<T: Scalar> Default for ContinuousOptions<T> {
    fn default() -> Self {
        Self {
            t_end: T::lit(200.0),
            dt: T::lit(0.05),
            tol: T::lit(1e-8),
        }
    }
}

/// Integrates `d' = d^BR(a) - d`, `a' = a^BR(d) - a` with classic RK4,
/// clamping to the nonnegative orthant after each step.
pub fn simulate_continuous<T: Scalar>(
    p: &ModelParams<T>,
    s_eff: T,
    start: InvestmentState<T>,
    opts: &ContinuousOptions<T>,
) -> Result<Trajectory<T>> {
    check_state(start)?;
    check_signal(s_eff)?;
    if !(opts.dt > T::zero() && opts.t_end > T::zero() && opts.tol > T::zero()) {
        return Err(ModelError::InvalidParameter {
            name: "dynamics.dt",
            value: opts.dt.to_f64_lossy(),
            range: "dt > 0, t_end > 0, tol > 0",
        });
    }

    let field = |x: InvestmentState<T>| {
        let br = responses(p, s_eff, x);
        (
            InvestmentState::new(br.target.d - x.d, br.target.a - x.a),
            br.adopted,
        )
    };
    let axpy = |x: InvestmentState<T>, h: T, k: InvestmentState<T>| {
        InvestmentState::new(x.d + h * k.d, x.a + h * k.a)
    };
    let two = T::lit(2.0);
    let six = T::lit(6.0);

    let mut traj = Trajectory::start(T::zero(), start);
    let mut x = start;
    let mut t = T::zero();
    let mut prev_adopted: Option<bool> = None;
    let mut step = 0usize;

    loop {
        let (k1, adopted) = field(x);
        let residual = k1.d.abs().max(k1.a.abs());
        traj.sup_norm_residual = residual;
        if let Some(prev) = prev_adopted {
            if prev != adopted && p.f() > T::zero() {
                traj.br_discontinuities.push(step);
            }
        }
        prev_adopted = Some(adopted);

        if residual < opts.tol {
            traj.converged = residual < T::lit(FIXED_POINT_RESIDUAL);
            if traj.converged {
                traj.fixed_point = Some(x);
            }
            break;
        }
        if t >= opts.t_end {
            break;
        }

        let h = opts.dt.min(opts.t_end - t);
        let (k2, _) = field(axpy(x, h / two, k1));
        let (k3, _) = field(axpy(x, h / two, k2));
        let (k4, _) = field(axpy(x, h, k3));
        let next = InvestmentState::new(
            x.d + h / six * (k1.d + two * k2.d + two * k3.d + k4.d),
            x.a + h / six * (k1.a + two * k2.a + two * k3.a + k4.a),
        );
        if !(next.d.is_finite() && next.a.is_finite()) {
            return Err(ModelError::IntegrationFailure {
                t: t.to_f64_lossy(),
                d: x.d.to_f64_lossy(),
                a: x.a.to_f64_lossy(),
            });
        }
        x = InvestmentState::new(next.d.max(T::zero()), next.a.max(T::zero()));
        t = t + h;
        step += 1;
        traj.push(t, x);
    }
    Ok(traj)
}

/// Local behaviour of the continuous dynamics at a fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityClass {
    StableNode,
    StableSpiral,
    /// `det J < 0`: one expanding direction.
    Saddle,
    Degenerate,
}

/// Linearization of the best-response dynamics at an interior equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport<T> {
    /// `d(d^BR)/da` at the equilibrium.
    pub br_slope_d: T,
    /// `d(a^BR)/dd` at the equilibrium.
    pub br_slope_a: T,
    /// Undamped spectral radius `sqrt(|slope_d slope_a|)`.
    pub rho0: T,
    /// Step-size bound `2 / (rho0 + 1)`.
    pub eta_bound: T,
    /// `det J = 1 - slope_d slope_a` for `J = [[-1, slope_d], [slope_a, -1]]`.
    pub det_j: T,
    pub classification: StabilityClass,
}

impl<T: Scalar> StabilityReport<T> {
    /// Spectral radius of the damped map `(1 - eta) I + eta J0`.
    pub fn discrete_spectral_radius(&self, eta: T) -> T {
        let prod = self.br_slope_d * self.br_slope_a;
        let one_minus = T::one() - eta;
        if prod >= T::zero() {
            let r = prod.sqrt();
            (one_minus + eta * r).abs().max((one_minus - eta * r).abs())
        } else {
            (one_minus * one_minus - eta * eta * prod).sqrt()
        }
    }

    /// Supremum of step sizes for which the damped map is locally contracting.
    /// Equals `eta_bound` when the slopes share a sign; with opposite signs the
    /// eigenvalues are complex and the limit is `2 / (1 + rho0^2)`.
    pub fn eta_limit(&self) -> T {
        let prod = self.br_slope_d * self.br_slope_a;
        if prod >= T::zero() {
            if self.rho0 < T::one() {
                T::lit(2.0) / (T::one() + self.rho0)
            } else {
                T::zero()
            }
        } else {
            T::lit(2.0) / (T::one() + self.rho0 * self.rho0)
        }
    }
}

const SLOPE_STEP: f64 = 1e-5;

/// Best-response slopes by central differences (relative step `1e-5`) and the
/// derived stability quantities.
pub fn stability_report<T: Scalar>(
    p: &ModelParams<T>,
    s_eff: T,
    eq: &EquilibriumResult<T>,
) -> Result<StabilityReport<T>> {
    check_signal(s_eff)?;
    if !eq.interior() {
        return Err(ModelError::CornerEquilibrium);
    }
    let (d, a) = (eq.d_star, eq.a_star);
    let ha = T::lit(SLOPE_STEP) * a;
    let hd = T::lit(SLOPE_STEP) * d;
    let br_slope_d = (defender_response_raw(p, a + ha, s_eff)
        - defender_response_raw(p, a - ha, s_eff))
        / (ha + ha);
    let br_slope_a = (attacker_response_raw(p, d + hd, s_eff).a
        - attacker_response_raw(p, d - hd, s_eff).a)
        / (hd + hd);
    let prod = br_slope_d * br_slope_a;
    let rho0 = prod.abs().sqrt();
    let det_j = T::one() - prod;
    let classification = if det_j < T::zero() {
        StabilityClass::Saddle
    } else if det_j == T::zero() || !det_j.is_finite() {
        StabilityClass::Degenerate
    } else if prod >= T::zero() {
        StabilityClass::StableNode
    } else {
        StabilityClass::StableSpiral
    };
    Ok(StabilityReport {
        br_slope_d,
        br_slope_a,
        rho0,
        eta_bound: T::lit(2.0) / (rho0 + T::one()),
        det_j,
        classification,
    })
}

/// Tabulated best response of one player against a grid of the other's
/// investment.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponseCurve<T> {
    pub grid: Vec<T>,
    pub responses: Vec<T>,
    /// Defender: interior formula was negative. Attacker: not adopting.
    pub clamped: Vec<bool>,
}

/// `d^BR` over `a_grid` and `a^BR` over `d_grid`, returned as
/// `(defender_curve, attacker_curve)`.
pub fn best_response_curves<T: Scalar>(
    p: &ModelParams<T>,
    s_eff: T,
    d_grid: &[T],
    a_grid: &[T],
) -> Result<(BestResponseCurve<T>, BestResponseCurve<T>)> {
    check_signal(s_eff)?;
    if d_grid.is_empty() || a_grid.is_empty() {
        return Err(ModelError::Computation("best-response grids must be nonempty".into()));
    }
    for &x in d_grid {
        check_nonneg("d", x)?;
    }
    for &x in a_grid {
        check_nonneg("a", x)?;
    }
    let mut def = BestResponseCurve {
        grid: a_grid.to_vec(),
        responses: Vec::with_capacity(a_grid.len()),
        clamped: Vec::with_capacity(a_grid.len()),
    };
    for &a in a_grid {
        let raw = defender_response_unclamped(p, a, s_eff);
        def.responses.push(raw.max(T::zero()));
        def.clamped.push(raw <= T::zero());
    }
    let mut att = BestResponseCurve {
        grid: d_grid.to_vec(),
        responses: Vec::with_capacity(d_grid.len()),
        clamped: Vec::with_capacity(d_grid.len()),
    };
    for &d in d_grid {
        let r = attacker_response_raw(p, d, s_eff);
        att.responses.push(r.a);
        att.clamped.push(!r.adopted);
    }
    Ok((def, att))
}
