//! Simple-versus-complex attack choice and the correlation capacity that
//! deters complex campaigns.
//!
//! A complex attack spans `n_a` surfaces with stronger amplification but
//! leaves a cross-surface footprint of correlation `gamma_a`; the defender can
//! exploit `min(gamma_a, gamma_d)`. The net benefit of complexity is
//! `B (P_c - P_s) - c_a (a_c - a_s)`, each side evaluated at its own optimal
//! attacker investment. The fixed adoption cost is left out of the comparison.

use crate::contest::{AmplificationSpec, ModelParams};
use crate::error::{ModelError, Result};
use crate::multisurface::{log_breach_rate, overall_breach};
use crate::optimize::{bisect, brent_root, maximize_bounded};
use crate::scalar::Scalar;

/// How the defender's investment is determined in each attack branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DefenderMode {
    /// `d_fixed` is used against both attacks.
    #[default]
    Fixed,
    /// Defender and attacker settle at the damped best-response fixed point of
    /// each attack branch separately.
    BestResponse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterrenceScenario<T> {
    base: ModelParams<T>,
    d_fixed: T,
    h_simple: AmplificationSpec<T>,
    h_complex: AmplificationSpec<T>,
    n_a: u32,
    gamma_a: T,
    rho: T,
    defender_mode: DefenderMode,
    simple_attack_diluted: bool,
}

fn invalid<T: Scalar>(name: &'static str, value: T, range: &'static str) -> ModelError {
    ModelError::InvalidParameter {
        name,
        value: value.to_f64_lossy(),
        range,
    }
}

impl<T: Scalar> DeterrenceScenario<T> {
    pub fn new(
        base: ModelParams<T>,
        d_fixed: T,
        h_simple: AmplificationSpec<T>,
        h_complex: AmplificationSpec<T>,
        n_a: u32,
        gamma_a: T,
        rho: T,
    ) -> Result<Self> {
        if !(d_fixed >= T::zero() && d_fixed.is_finite()) {
            return Err(invalid("deterrence.d_fixed", d_fixed, "[0, inf)"));
        }
        if n_a < 2 {
            return Err(invalid("deterrence.N_a", T::from_count(n_a as usize), "{2, 3, ...}"));
        }
        if !(gamma_a > T::zero() && gamma_a <= T::one()) {
            return Err(invalid("deterrence.gamma_a", gamma_a, "(0, 1]"));
        }
        if !(rho >= T::zero() && rho <= T::one()) {
            return Err(invalid("deterrence.rho", rho, "[0, 1]"));
        }
        // h_c > h_s on a positive geometric grid from 1e-2 to 1e2
        for i in 0..64 {
            let a = T::lit(10.0).powf(T::lit(-2.0) + T::lit(4.0) * T::from_count(i) / T::lit(63.0));
            if !(h_complex.value(a) > h_simple.value(a)) {
                return Err(invalid("deterrence.h_complex", a, "h_c(a) > h_s(a) for a > 0"));
            }
        }
        Ok(Self {
            base,
            d_fixed,
            h_simple,
            h_complex,
            n_a,
            gamma_a,
            rho,
            defender_mode: DefenderMode::Fixed,
            simple_attack_diluted: false,
        })
    }

    pub fn with_defender_mode(mut self, mode: DefenderMode) -> Self {
        self.defender_mode = mode;
        self
    }

    /// Evaluate the simple attack at the diluted signal `s / N_a^rho` rather
    /// than the full budget.
    pub fn with_simple_attack_diluted(mut self, diluted: bool) -> Self {
        self.simple_attack_diluted = diluted;
        self
    }

    pub fn base(&self) -> &ModelParams<T> {
        &self.base
    }
    pub fn d_fixed(&self) -> T {
        self.d_fixed
    }
    pub fn h_simple(&self) -> &AmplificationSpec<T> {
        &self.h_simple
    }
    pub fn h_complex(&self) -> &AmplificationSpec<T> {
        &self.h_complex
    }
    pub fn n_a(&self) -> u32 {
        self.n_a
    }
    pub fn gamma_a(&self) -> T {
        self.gamma_a
    }
    pub fn rho(&self) -> T {
        self.rho
    }
    pub fn defender_mode(&self) -> DefenderMode {
        self.defender_mode
    }
    pub fn simple_attack_diluted(&self) -> bool {
        self.simple_attack_diluted
    }

    fn rebuilt(&self, base: ModelParams<T>, d_fixed: T, h_complex: AmplificationSpec<T>) -> Result<Self> {
        Ok(Self::new(base, d_fixed, self.h_simple, h_complex, self.n_a, self.gamma_a, self.rho)?
            .with_defender_mode(self.defender_mode)
            .with_simple_attack_diluted(self.simple_attack_diluted))
    }
}

/// One attack branch: parameters with the branch's amplification, the
/// per-surface signal, and the number of surfaces hit.
struct Branch<T> {
    p: ModelParams<T>,
    s_eff: T,
    n: T,
}

impl<T: Scalar> Branch<T> {
    fn breach(&self, a: T, d: T) -> T {
        let q = self.p.breach_raw(a, d, self.s_eff);
        if self.n == T::one() {
            q
        } else {
            overall_breach(log_breach_rate(q, self.n))
        }
    }

    /// `dP/dq = n (1 - P) / (1 - q)`.
    fn chain(&self, a: T, d: T) -> T {
        let q = self.p.breach_raw(a, d, self.s_eff);
        if self.n == T::one() {
            T::one()
        } else {
            self.n * (T::one() - q).powf(self.n - T::one())
        }
    }

    fn best_attack(&self, d: T) -> (T, T) {
        let p = &self.p;
        let peak = maximize_bounded(
            |a| p.b() * self.breach(a, d) - p.c_a() * a,
            Some(|a| p.b() * self.chain(a, d) * p.dq_da_raw(a, d, self.s_eff) - p.c_a()),
            T::zero(),
            p.attacker_bound(),
        );
        (peak.x, peak.value)
    }

    fn best_defense(&self, a: T) -> T {
        let p = &self.p;
        maximize_bounded(
            |d| -p.v() * self.breach(a, d) - p.c_d() * d,
            Some(|d| p.v() * self.chain(a, d) * p.neg_dq_dd_raw(a, d, self.s_eff) - p.c_d()),
            T::zero(),
            p.defender_bound(),
        )
        .x
    }

    /// Attacker optimum `(a, d, P)` under the scenario's defender mode.
    fn settle(&self, mode: DefenderMode, d_fixed: T) -> Result<(T, T, T)> {
        match mode {
            DefenderMode::Fixed => {
                let (a, _) = self.best_attack(d_fixed);
                Ok((a, d_fixed, self.breach(a, d_fixed)))
            }
            DefenderMode::BestResponse => {
                if let Some(found) = self.settle_by_root() {
                    return Ok(found);
                }
                self.settle_by_iteration(d_fixed)
            }
        }
    }

    /// Root of `a^BR(d^BR(a)) - a` on the attacker's strategy interval. `None`
    /// when the composite response jumps across zero instead of crossing it.
    fn settle_by_root(&self) -> Option<(T, T, T)> {
        let gap = |a: T| self.best_attack(self.best_defense(a)).0 - a;
        let a = brent_root(gap, T::zero(), self.p.attacker_bound(), T::lit(ROOT_XTOL), 200);
        let d = self.best_defense(a);
        let (a_br, _) = self.best_attack(d);
        let tol = T::lit(FIXED_POINT_TOL) * (T::one() + a.abs() + d.abs());
        ((a_br - a).abs() <= tol).then(|| (a_br, d, self.breach(a_br, d)))
    }

    fn settle_by_iteration(&self, d_fixed: T) -> Result<(T, T, T)> {
        let (mut d, mut a) = (d_fixed, T::zero());
        for (eta, steps) in [(0.5, 5_000), (0.2, 20_000), (0.05, 80_000)] {
            let eta = T::lit(eta);
            (d, a) = (d_fixed, T::zero());
            for _ in 0..steps {
                let nd = d + eta * (self.best_defense(a) - d);
                let na = a + eta * (self.best_attack(d).0 - a);
                let change = (nd - d).abs().max((na - a).abs());
                d = nd;
                a = na;
                if change < T::lit(1e-12) * (T::one() + d.abs() + a.abs()) {
                    let (a, _) = self.best_attack(d);
                    return Ok((a, d, self.breach(a, d)));
                }
            }
        }
        let residual = (self.best_defense(a) - d).abs().max((self.best_attack(d).0 - a).abs());
        Err(ModelError::FixedPointInconsistency {
            d: d.to_f64_lossy(),
            a: a.to_f64_lossy(),
            residual: residual.to_f64_lossy(),
        })
    }
}

const ROOT_XTOL: f64 = 1e-13;
const FIXED_POINT_TOL: f64 = 1e-9;

/// Components of the net benefit of complexity at one `gamma_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaPiReport<T> {
    pub delta_pi: T,
    pub realized_gamma: T,
    pub a_complex: T,
    pub a_simple: T,
    pub p_complex: T,
    pub p_simple: T,
    pub d_complex: T,
    pub d_simple: T,
}

fn branches<T: Scalar>(sc: &DeterrenceScenario<T>, gamma_d: T) -> Result<(Branch<T>, Branch<T>, T)> {
    let realized = sc.gamma_a.min(gamma_d);
    let s = sc.base.s();
    let n = T::from_count(sc.n_a as usize);
    let dilution = n.powf(sc.rho);
    let complex = Branch {
        p: sc.base.to_builder().h(sc.h_complex).build()?,
        s_eff: s / dilution * (T::one() + realized * (n - T::one())),
        n,
    };
    let simple = Branch {
        p: sc.base.to_builder().h(sc.h_simple).build()?,
        s_eff: if sc.simple_attack_diluted { s / dilution } else { s },
        n: T::one(),
    };
    Ok((complex, simple, realized))
}

/// Full breakdown of the net benefit of complexity.
pub fn delta_pi_report<T: Scalar>(sc: &DeterrenceScenario<T>, gamma_d: T) -> Result<DeltaPiReport<T>> {
    if !(gamma_d >= T::zero() && gamma_d <= T::one()) {
        return Err(invalid("gamma_d", gamma_d, "[0, 1]"));
    }
    let (complex, simple, realized_gamma) = branches(sc, gamma_d)?;
    let (a_c, d_c, p_c) = complex.settle(sc.defender_mode, sc.d_fixed)?;
    let (a_s, d_s, p_s) = simple.settle(sc.defender_mode, sc.d_fixed)?;
    let b = sc.base.b();
    let c_a = sc.base.c_a();
    Ok(DeltaPiReport {
        delta_pi: b * (p_c - p_s) - c_a * (a_c - a_s),
        realized_gamma,
        a_complex: a_c,
        a_simple: a_s,
        p_complex: p_c,
        p_simple: p_s,
        d_complex: d_c,
        d_simple: d_s,
    })
}

/// Net benefit of a complex over a simple attack at defender capacity `gamma_d`.
pub fn delta_pi<T: Scalar>(sc: &DeterrenceScenario<T>, gamma_d: T) -> Result<T> {
    Ok(delta_pi_report(sc, gamma_d)?.delta_pi)
}

/// Why the endpoint conditions for a threshold fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionFailure {
    /// `delta_pi(0) <= 0`.
    ComplexNeverProfitable,
    /// `delta_pi(gamma_a) >= 0`.
    ComplexAlwaysProfitable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeterrenceThreshold<T> {
    Threshold {
        gamma_star: T,
        residual: T,
        /// Net benefit increased somewhere on the 128-point scan.
        monotonicity_violated: bool,
    },
    ConditionsFail {
        reason: ConditionFailure,
        delta_pi_at_zero: T,
        delta_pi_at_gamma_a: T,
    },
}

impl<T: Copy> DeterrenceThreshold<T> {
    pub fn gamma_star(&self) -> Option<T> {
        match self {
            Self::Threshold { gamma_star, .. } => Some(*gamma_star),
            Self::ConditionsFail { .. } => None,
        }
    }
}

const MONOTONICITY_SCAN: usize = 128;

/// Critical correlation capacity `gamma_d*` in `(0, gamma_a)` at which the net
/// benefit of complexity changes sign.
pub fn deterrence_threshold<T: Scalar>(sc: &DeterrenceScenario<T>) -> Result<DeterrenceThreshold<T>> {
    let at_zero = delta_pi(sc, T::zero())?;
    let at_gamma_a = delta_pi(sc, sc.gamma_a)?;
    if !(at_zero > T::zero()) {
        return Ok(DeterrenceThreshold::ConditionsFail {
            reason: ConditionFailure::ComplexNeverProfitable,
            delta_pi_at_zero: at_zero,
            delta_pi_at_gamma_a: at_gamma_a,
        });
    }
    if !(at_gamma_a < T::zero()) {
        return Ok(DeterrenceThreshold::ConditionsFail {
            reason: ConditionFailure::ComplexAlwaysProfitable,
            delta_pi_at_zero: at_zero,
            delta_pi_at_gamma_a: at_gamma_a,
        });
    }

    let grid: Vec<T> = (0..=MONOTONICITY_SCAN)
        .map(|i| sc.gamma_a * T::from_count(i) / T::from_count(MONOTONICITY_SCAN))
        .collect();
    let values = grid
        .iter()
        .map(|&g| delta_pi(sc, g))
        .collect::<Result<Vec<T>>>()?;
    let monotonicity_violated = values.windows(2).any(|w| w[1] > w[0]);
    let i = (0..MONOTONICITY_SCAN)
        .find(|&i| values[i] > T::zero() && values[i + 1] <= T::zero())
        .expect("endpoint signs guarantee a sign change");

    let mut failure = None;
    let gamma_star = bisect(
        |g| match delta_pi(sc, g) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                T::zero()
            }
        },
        grid[i],
        grid[i + 1],
        200,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(DeterrenceThreshold::Threshold {
        gamma_star,
        residual: delta_pi(sc, gamma_star)?,
        monotonicity_violated,
    })
}

/// Parameter whose effect on `gamma_d*` is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensitivityParameter {
    /// Defender signal budget.
    S,
    /// `alpha` of the complex attack's amplification.
    HcAlpha,
    B,
    CA,
    DFixed,
}

fn perturbed<T: Scalar>(
    sc: &DeterrenceScenario<T>,
    param: SensitivityParameter,
    delta: T,
) -> Result<DeterrenceScenario<T>> {
    let b = sc.base.to_builder();
    match param {
        SensitivityParameter::S => sc.rebuilt(b.s(sc.base.s() + delta).build()?, sc.d_fixed, sc.h_complex),
        SensitivityParameter::HcAlpha => sc.rebuilt(
            sc.base,
            sc.d_fixed,
            sc.h_complex.with_alpha(sc.h_complex.alpha() + delta)?,
        ),
        SensitivityParameter::B => sc.rebuilt(b.b(sc.base.b() + delta).build()?, sc.d_fixed, sc.h_complex),
        SensitivityParameter::CA => sc.rebuilt(b.c_a(sc.base.c_a() + delta).build()?, sc.d_fixed, sc.h_complex),
        SensitivityParameter::DFixed => sc.rebuilt(sc.base, sc.d_fixed + delta, sc.h_complex),
    }
}

/// `d gamma_d* / dx` computed two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSensitivity<T> {
    /// Central difference of the re-solved threshold.
    pub resolved: T,
    /// `-(dDeltaPi/dx) / (dDeltaPi/dgamma_d)` at the unperturbed root.
    pub implicit: T,
    pub d_delta_pi_dx: T,
    pub d_delta_pi_dgamma: T,
}

/// Relative agreement required between the two sensitivity routes.
pub const SENSITIVITY_AGREEMENT: f64 = 1e-3;

fn threshold_of<T: Scalar>(sc: &DeterrenceScenario<T>) -> Result<T> {
    deterrence_threshold(sc)?
        .gamma_star()
        .ok_or(ModelError::DegenerateSensitivity("no deterrence threshold for this scenario"))
}

/// Comparative statics of the deterrence threshold in `param`, with
/// perturbation `step`. Errors if the two routes disagree beyond
/// [`SENSITIVITY_AGREEMENT`].
pub fn threshold_sensitivity<T: Scalar>(
    sc: &DeterrenceScenario<T>,
    param: SensitivityParameter,
    step: T,
) -> Result<ThresholdSensitivity<T>> {
    if !(step > T::zero()) {
        return Err(invalid("step", step, "(0, inf)"));
    }
    if param == SensitivityParameter::DFixed && sc.defender_mode == DefenderMode::BestResponse {
        return Err(ModelError::DegenerateSensitivity(
            "d_fixed only seeds the iteration in best-response mode",
        ));
    }
    let root = threshold_of(sc)?;
    let up = perturbed(sc, param, step)?;
    let down = perturbed(sc, param, -step)?;
    let two = T::lit(2.0);
    let resolved = (threshold_of(&up)? - threshold_of(&down)?) / (two * step);

    let d_delta_pi_dx = (delta_pi(&up, root)? - delta_pi(&down, root)?) / (two * step);
    let hg = T::lit(1e-5).min(root / two).min((sc.gamma_a - root) / two);
    let d_delta_pi_dgamma = (delta_pi(sc, root + hg)? - delta_pi(sc, root - hg)?) / (two * hg);
    if d_delta_pi_dgamma.abs() < T::lit(1e-12) {
        return Err(ModelError::DegenerateSensitivity("dDeltaPi/dgamma_d vanishes at the threshold"));
    }
    let implicit = -d_delta_pi_dx / d_delta_pi_dgamma;

    let scale = resolved.abs().max(implicit.abs()).max(T::lit(1e-9));
    if (resolved - implicit).abs() >= T::lit(SENSITIVITY_AGREEMENT) * scale {
        return Err(ModelError::Computation(format!(
            "threshold sensitivity routes disagree: re-solve {} vs implicit {}",
            resolved.to_f64_lossy(),
            implicit.to_f64_lossy()
        )));
    }
    Ok(ThresholdSensitivity {
        resolved,
        implicit,
        d_delta_pi_dx,
        d_delta_pi_dgamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contest::ErosionSpec;

    fn scenario(d: f64, s: f64) -> DeterrenceScenario<f64> {
        let base = ModelParams::builder()
            .q0(0.2)
            .delta(ErosionSpec::hyperbolic(1.0, 0.5).unwrap())
            .s(s)
            .b(10.0)
            .build()
            .unwrap();
        DeterrenceScenario::new(
            base,
            d,
            AmplificationSpec::logarithmic(0.3).unwrap(),
            AmplificationSpec::logarithmic(0.9).unwrap(),
            4,
            0.8,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        let sc = scenario(1.0, 1.0);
        let base = *sc.base();
        let weak = AmplificationSpec::logarithmic(0.2).unwrap();
        let strong = AmplificationSpec::logarithmic(0.9).unwrap();
        assert!(DeterrenceScenario::new(base, 1.0, strong, weak, 4, 0.8, 1.0).is_err());
        assert!(DeterrenceScenario::new(base, 1.0, weak, strong, 1, 0.8, 1.0).is_err());
        assert!(DeterrenceScenario::new(base, 1.0, weak, strong, 4, 0.0, 1.0).is_err());
        assert!(DeterrenceScenario::new(base, -1.0, weak, strong, 4, 0.8, 1.0).is_err());
        assert!(delta_pi(&sc, 1.5).is_err());
    }

    #[test]
    fn flat_beyond_structural_correlation() {
        let sc = scenario(2.0, 1.0);
        let at = delta_pi(&sc, 0.8).unwrap();
        for g in [0.85, 0.9, 1.0] {
            assert_eq!(delta_pi(&sc, g).unwrap(), at);
        }
    }

    #[test]
    fn identical_attacks_give_zero() {
        // With one surface the complex branch equals the simple one when the
        // amplification coincides; construct that directly through branches.
        let sc = scenario(1.0, 1.0);
        let (_, simple, _) = branches(&sc, 0.5).unwrap();
        let twin = Branch {
            p: simple.p,
            s_eff: simple.s_eff,
            n: 1.0,
        };
        let (a1, _, p1) = simple.settle(DefenderMode::Fixed, 1.0).unwrap();
        let (a2, _, p2) = twin.settle(DefenderMode::Fixed, 1.0).unwrap();
        assert_eq!(10.0 * (p1 - p2) - (a1 - a2), 0.0);
    }

    #[test]
    fn decreasing_in_gamma_d() {
        let sc = scenario(2.0, 1.0);
        let mut last = f64::INFINITY;
        for i in 0..=16 {
            let v = delta_pi(&sc, 0.8 * i as f64 / 16.0).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn best_response_mode_runs() {
        let sc = scenario(1.0, 1.0).with_defender_mode(DefenderMode::BestResponse);
        let rep = delta_pi_report(&sc, 0.3).unwrap();
        assert!(rep.d_complex >= 0.0 && rep.d_simple >= 0.0);
        assert!(rep.d_complex <= 10.0 && rep.d_simple <= 10.0);
    }

    fn responsive_scenario() -> DeterrenceScenario<f64> {
        let base = ModelParams::builder()
            .q0(0.2)
            .delta(ErosionSpec::hyperbolic(1.0, 0.5).unwrap())
            .s(1.0)
            .b(10.0)
            .build()
            .unwrap();
        DeterrenceScenario::new(
            base,
            0.0,
            AmplificationSpec::logarithmic(0.3).unwrap(),
            AmplificationSpec::logarithmic(0.6).unwrap(),
            3,
            0.9,
            0.0,
        )
        .unwrap()
        .with_defender_mode(DefenderMode::BestResponse)
    }

    #[test]
    fn fixed_defense_never_deters() {
        let sc = scenario(2.0, 1.0);
        match deterrence_threshold(&sc).unwrap() {
            DeterrenceThreshold::ConditionsFail { reason, delta_pi_at_gamma_a, .. } => {
                assert_eq!(reason, ConditionFailure::ComplexAlwaysProfitable);
                assert!(delta_pi_at_gamma_a > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn responsive_defense_has_threshold() {
        let sc = responsive_scenario();
        let DeterrenceThreshold::Threshold { gamma_star, residual, monotonicity_violated } =
            deterrence_threshold(&sc).unwrap()
        else {
            panic!("expected a threshold");
        };
        assert!(gamma_star > 0.0 && gamma_star < 0.9);
        assert!(residual.abs() < 1e-9);
        assert!(!monotonicity_violated);
        assert!(delta_pi(&sc, gamma_star - 1e-4).unwrap() > 0.0);
        assert!(delta_pi(&sc, gamma_star + 1e-4).unwrap() < 0.0);
    }

    #[test]
    fn sensitivity_signs_follow_partials() {
        let sc = responsive_scenario();
        for param in [SensitivityParameter::S, SensitivityParameter::HcAlpha, SensitivityParameter::B] {
            let r = threshold_sensitivity(&sc, param, 1e-4).unwrap();
            assert!(r.d_delta_pi_dgamma < 0.0);
            assert_eq!(r.resolved.signum(), r.d_delta_pi_dx.signum());
        }
        assert!(threshold_sensitivity(&sc, SensitivityParameter::DFixed, 1e-4).is_err());
    }
}
