//! Best responses, interior equilibrium, uniqueness diagnostics and the
//! provocation threshold.
//!
//! Along the defender's interior branch the first-order condition pins the
//! contest denominator to `Phi(a)^2 = V q0 (1 - q0) h(a) delta(a) s / c_d`, so
//! the defender's best response is available in closed form. The attacker's
//! response is found numerically because the fixed adoption cost `F` makes it
//! discontinuous.

use std::cell::Cell;

use crate::contest::{check_nonneg, ModelParams};
use crate::dynamics::{simulate_discrete, DiscreteOptions, InvestmentState};
use crate::error::{ModelError, Result};
use crate::optimize::{bisect, maximize_bounded, scan_grid, Extremum};
use crate::ratio::r_general;
use crate::scalar::Scalar;

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

/// `Phi(a)` on the defender's interior branch.
#[inline]
pub(crate) fn interior_denominator<T: Scalar>(p: &ModelParams<T>, a: T, s_eff: T) -> T {
    let q0 = p.q0();
    (p.v() * q0 * (T::one() - q0) * p.h().value(a) * p.delta().value(a) * s_eff / p.c_d()).sqrt()
}

/// Interior formula `d*(a)` before clamping at zero.
#[inline]
pub(crate) fn defender_response_unclamped<T: Scalar>(p: &ModelParams<T>, a: T, s_eff: T) -> T {
    let q0 = p.q0();
    let phi = interior_denominator(p, a, s_eff);
    (phi - q0 * p.h().value(a) - (T::one() - q0)) / ((T::one() - q0) * p.delta().value(a) * s_eff)
}

#[inline]
pub(crate) fn defender_response_raw<T: Scalar>(p: &ModelParams<T>, a: T, s_eff: T) -> T {
    defender_response_unclamped(p, a, s_eff).max(T::zero())
}

/// Defender best response `d^BR(a) = max{0, d*(a)}`.
pub fn defender_best_response<T: Scalar>(p: &ModelParams<T>, a: T, s_eff: T) -> Result<T> {
    check_nonneg("a", a)?;
    check_signal(s_eff)?;
    Ok(defender_response_raw(p, a, s_eff))
}

fn interior_branch_active<T: Scalar>(p: &ModelParams<T>, a: T, s_eff: T) -> bool {
    interior_denominator(p, a, s_eff) > p.q0() * p.h().value(a) + (T::one() - p.q0())
}

/// Breach probability along the defender's interior branch,
/// `q*(a) = sqrt(q0 c_d h / (V (1 - q0) delta s))`.
pub fn interior_breach<T: Scalar>(p: &ModelParams<T>, a: T, s_eff: T) -> Result<T> {
    check_nonneg("a", a)?;
    check_signal(s_eff)?;
    if !interior_branch_active(p, a, s_eff) {
        return Err(ModelError::CornerBranch { a: a.to_f64_lossy() });
    }
    let q0 = p.q0();
    Ok((q0 * p.c_d() * p.h().value(a)
        / (p.v() * (T::one() - q0) * p.delta().value(a) * s_eff))
        .sqrt())
}

/// Outcome of the attacker's constrained optimization against fixed `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackerResponse<T> {
    /// Best response (zero when not adopting).
    pub a: T,
    pub adopted: bool,
    /// Maximizer of `B q - c_a a` on `[0, B / c_a]`, ignoring `F`.
    pub peak_a: T,
    /// `B q - c_a a` at `peak_a`.
    pub peak_value: T,
    /// `U_A` at `a = 0`.
    pub payoff_at_zero: T,
}

pub(crate) fn attacker_peak<T: Scalar>(p: &ModelParams<T>, d: T, s_eff: T) -> Extremum<T> {
    maximize_bounded(
        |a| p.attacker_variable_payoff(a, d, s_eff),
        Some(|a| p.b() * p.dq_da_raw(a, d, s_eff) - p.c_a()),
        T::zero(),
        p.attacker_bound(),
    )
}

pub(crate) fn attacker_response_raw<T: Scalar>(
    p: &ModelParams<T>,
    d: T,
    s_eff: T,
) -> AttackerResponse<T> {
    let payoff_at_zero = p.b() * p.breach_raw(T::zero(), d, s_eff);
    let peak = attacker_peak(p, d, s_eff);
    let adopted = peak.x > T::zero() && peak.value - p.f() > payoff_at_zero;
    AttackerResponse {
        a: if adopted { peak.x } else { T::zero() },
        adopted,
        peak_a: peak.x,
        peak_value: peak.value,
        payoff_at_zero,
    }
}

/// Attacker's full constrained response, including the adoption comparison.
pub fn attacker_response<T: Scalar>(p: &ModelParams<T>, d: T, s_eff: T) -> Result<AttackerResponse<T>> {
    check_nonneg("d", d)?;
    check_nonneg("s_eff", s_eff)?;
    Ok(attacker_response_raw(p, d, s_eff))
}

/// Attacker best response `a^BR(d)` maximizing `B q - c_a a - F [a > 0]` over
/// `[0, B / c_a]`; indifference resolves to `a = 0`.
pub fn attacker_best_response<T: Scalar>(p: &ModelParams<T>, d: T, s_eff: T) -> Result<T> {
    Ok(attacker_response(p, d, s_eff)?.a)
}

/// Attacker payoff with the defender on its interior branch,
/// `B sqrt(q0 c_d h / delta / (V (1 - q0) s)) - c_a a`.
pub fn reduced_attacker_objective<T: Scalar>(p: &ModelParams<T>, a: T, s_eff: T) -> Result<T> {
    Ok(p.b() * interior_breach(p, a, s_eff)? - p.c_a() * a)
}

/// Which interior-uniqueness conditions hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessReport<T> {
    pub certified: bool,
    /// `h'' < 0` for the amplification family.
    pub amplification_concave: bool,
    /// `delta delta'' >= 2 delta'^2` for the erosion family.
    pub erosion_rate_condition: bool,
    /// Second differences of `sqrt(h / delta)` on the scan stay `<= 1e-10`.
    pub numeric_scan_ok: bool,
    pub max_second_difference: T,
    pub scan_upper: T,
}

const UNIQUENESS_SCAN_POINTS: usize = 2048;

/// Family-level sufficient conditions plus a numeric concavity scan of
/// `sqrt(h / delta)` on `[0, 4 B / c_a]`.
pub fn uniqueness_check<T: Scalar>(p: &ModelParams<T>) -> UniquenessReport<T> {
    let amplification_concave = p.h().is_strictly_concave();
    let erosion_rate_condition = p.delta().erosion_rate_condition();
    let mut scan_upper = T::lit(4.0) * p.attacker_bound();
    if scan_upper <= T::zero() {
        scan_upper = T::one();
    }
    let f = |a: T| (p.h().value(a) / p.delta().value(a)).sqrt();
    let n = UNIQUENESS_SCAN_POINTS - 1;
    let values: Vec<T> = (0..=n)
        .map(|i| f(scan_upper * T::from_count(i) / T::from_count(n)))
        .collect();
    let max_second_difference = values
        .windows(3)
        .map(|w| w[0] - T::lit(2.0) * w[1] + w[2])
        .fold(T::neg_infinity(), T::max);
    let numeric_scan_ok = max_second_difference <= T::lit(1e-10);
    UniquenessReport {
        certified: amplification_concave && erosion_rate_condition && numeric_scan_ok,
        amplification_concave,
        erosion_rate_condition,
        numeric_scan_ok,
        max_second_difference,
        scan_upper,
    }
}

/// Equilibrium of the single-surface game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumResult<T> {
    pub d_star: T,
    pub a_star: T,
    pub q_star: T,
    /// `R(d*, a*)`.
    pub r_at_eq: T,
    pub defender_interior: bool,
    pub attacker_interior: bool,
    pub uniqueness_certified: bool,
    /// Best-response evaluations spent locating the fixed point.
    pub iterations: usize,
    /// `V (-dq/dd) - c_d` at the solution.
    pub defender_foc_residual: T,
    /// `B dq/da - c_a` at the solution.
    pub attacker_foc_residual: T,
    /// Distinct fixed points of `a -> a^BR(d^BR(a))` found on the scan.
    pub fixed_points_found: usize,
    /// The direct solve failed cross-validation and damped best-response
    /// iteration supplied the point.
    pub fallback_used: bool,
}

impl<T: Scalar> EquilibriumResult<T> {
    pub fn interior(&self) -> bool {
        self.defender_interior && self.attacker_interior
    }
}

const FIXED_POINT_SCAN: usize = 128;
const ATTACKER_CROSS_CHECK: f64 = 1e-6;
const DEFENDER_CROSS_CHECK: f64 = 1e-8;

/// Solves for the Nash equilibrium `(d*, a*)`.
///
/// The defender's closed-form response reduces the problem to the scalar
/// fixed point `a = a^BR(d^BR(a))`, located by scanning `[0, B / c_a]` and
/// bisecting every sign change. Each candidate is cross-validated against
/// direct best responses; if none survives, damped best-response iteration
/// supplies the point and both interior flags are cleared.
pub fn solve_equilibrium<T: Scalar>(p: &ModelParams<T>, s_eff: T) -> Result<EquilibriumResult<T>> {
    check_signal(s_eff)?;
    let uniqueness = uniqueness_check(p);
    let upper = p.attacker_bound();
    let evals = Cell::new(0usize);
    let phi = |a: T| {
        evals.set(evals.get() + 1);
        attacker_response_raw(p, defender_response_raw(p, a, s_eff), s_eff).a - a
    };

    let mut candidates: Vec<T> = Vec::new();
    if upper <= T::zero() {
        candidates.push(T::zero());
    } else {
        let grid = scan_grid(T::zero(), upper, FIXED_POINT_SCAN, 8);
        let values: Vec<T> = grid.iter().map(|&a| phi(a)).collect();
        for i in 0..grid.len() {
            if values[i] == T::zero() {
                candidates.push(grid[i]);
            } else if i + 1 < grid.len() && values[i] > T::zero() && values[i + 1] < T::zero() {
                candidates.push(bisect(&phi, grid[i], grid[i + 1], 200));
            }
        }
    }

    let cross_checked: Vec<T> = candidates
        .into_iter()
        .filter(|&a| {
            let d = defender_response_raw(p, a, s_eff);
            let back = attacker_response_raw(p, d, s_eff).a;
            (back - a).abs() < T::lit(ATTACKER_CROSS_CHECK)
                && (defender_response_raw(p, a, s_eff) - d).abs() < T::lit(DEFENDER_CROSS_CHECK)
        })
        .collect();

    let (d_star, a_star, fallback_used) = match cross_checked.first() {
        Some(&a) => (defender_response_raw(p, a, s_eff), a, false),
        None => {
            let start = InvestmentState {
                d: p.defender_bound() / T::lit(2.0),
                a: upper / T::lit(2.0),
            };
            let traj = simulate_discrete(p, s_eff, start, &DiscreteOptions::default())?;
            match traj.fixed_point {
                Some(fp) if traj.converged => (fp.d, fp.a, true),
                _ => {
                    let last = traj.last();
                    return Err(ModelError::FixedPointInconsistency {
                        d: last.d.to_f64_lossy(),
                        a: last.a.to_f64_lossy(),
                        residual: traj.sup_norm_residual.to_f64_lossy(),
                    });
                }
            }
        }
    };

    let q_star = p.breach_raw(a_star, d_star, s_eff);
    let r_at_eq = r_general(p, a_star, d_star, s_eff)?.r_general;
    Ok(EquilibriumResult {
        d_star,
        a_star,
        q_star,
        r_at_eq,
        defender_interior: !fallback_used && defender_response_unclamped(p, a_star, s_eff) > T::zero(),
        attacker_interior: !fallback_used && a_star > T::zero(),
        uniqueness_certified: uniqueness.certified,
        iterations: evals.get(),
        defender_foc_residual: p.v() * p.neg_dq_dd_raw(a_star, d_star, s_eff) - p.c_d(),
        attacker_foc_residual: p.b() * p.dq_da_raw(a_star, d_star, s_eff) - p.c_a(),
        fixed_points_found: cross_checked.len(),
        fallback_used,
    })
}

/// Smallest defender investment at which AI adoption is weakly profitable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProvocationThreshold<T> {
    Threshold {
        d_hat: T,
        /// Net adoption gain at `d_hat` (zero up to bisection precision).
        gain_at_threshold: T,
        /// The gain changed sign more than once on the scan.
        nonmonotone: bool,
        /// Upper end of the searched bracket, `10 V / c_d`.
        bracket_upper: T,
    },
    NeverAdopts {
        bracket_upper: T,
    },
    AlwaysAdopts,
}

const PROVOCATION_BRACKET_FACTOR: f64 = 10.0;
const PROVOCATION_SCAN: usize = 256;

/// Net adoption gain `max_{a > 0} U_A(a; d) - U_A(0; d)`.
pub fn adoption_gain<T: Scalar>(p: &ModelParams<T>, d: T, s_eff: T) -> Result<T> {
    check_nonneg("d", d)?;
    check_nonneg("s_eff", s_eff)?;
    Ok(adoption_gain_raw(p, d, s_eff))
}

fn adoption_gain_raw<T: Scalar>(p: &ModelParams<T>, d: T, s_eff: T) -> T {
    let peak = attacker_peak(p, d, s_eff);
    peak.value - p.f() - p.b() * p.breach_raw(T::zero(), d, s_eff)
}

/// Locates `d_hat` by scanning `[0, 10 V / c_d]` for the first point where
/// the adoption gain becomes nonnegative and bisecting that bracket.
pub fn provocation_threshold<T: Scalar>(
    p: &ModelParams<T>,
    s_eff: T,
) -> Result<ProvocationThreshold<T>> {
    check_nonneg("s_eff", s_eff)?;
    let bracket_upper = T::lit(PROVOCATION_BRACKET_FACTOR) * p.defender_bound();
    if p.f() == T::zero() {
        return Ok(ProvocationThreshold::AlwaysAdopts);
    }
    if p.f() > p.b() {
        return Ok(ProvocationThreshold::NeverAdopts { bracket_upper });
    }
    let gain = |d: T| adoption_gain_raw(p, d, s_eff);
    let g0 = gain(T::zero());
    if g0 >= T::zero() {
        return Ok(ProvocationThreshold::Threshold {
            d_hat: T::zero(),
            gain_at_threshold: g0,
            nonmonotone: false,
            bracket_upper,
        });
    }
    if bracket_upper <= T::zero() {
        return Ok(ProvocationThreshold::NeverAdopts { bracket_upper });
    }

    let grid: Vec<T> = (0..=PROVOCATION_SCAN)
        .map(|i| bracket_upper * T::from_count(i) / T::from_count(PROVOCATION_SCAN))
        .collect();
    let values: Vec<T> = grid.iter().map(|&d| gain(d)).collect();
    let sign_changes = values
        .windows(2)
        .filter(|w| (w[0] >= T::zero()) != (w[1] >= T::zero()))
        .count();
    let Some(i) = (0..PROVOCATION_SCAN).find(|&i| values[i] < T::zero() && values[i + 1] >= T::zero())
    else {
        return Ok(ProvocationThreshold::NeverAdopts { bracket_upper });
    };
    let d_hat = if values[i + 1] == T::zero() {
        grid[i + 1]
    } else {
        bisect(gain, grid[i], grid[i + 1], 200)
    };
    Ok(ProvocationThreshold::Threshold {
        d_hat,
        gain_at_threshold: gain(d_hat),
        nonmonotone: sign_changes > 1,
        bracket_upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contest::{payoff_attacker, AmplificationSpec, ErosionSpec};

    fn worked(v: f64) -> ModelParams<f64> {
        ModelParams::builder()
            .q0(0.5)
            .v(v)
            .c_d(1.0)
            .delta(ErosionSpec::hyperbolic(1.0, 1.0).unwrap())
            .build()
            .unwrap()
    }

    #[test]
    fn defender_closed_form_worked_point() {
        let p = worked(10.0);
        let d = defender_best_response(&p, 0.0, 1.0).unwrap();
        assert!((interior_denominator(&p, 0.0, 1.0) - 2.5f64.sqrt()).abs() < 1e-15);
        assert!((d - (2.5f64.sqrt() - 1.0) / 0.5).abs() < 1e-14);
        assert!((d - 1.16228).abs() < 1e-5);
        let q_direct = 0.5 / 2.5f64.sqrt();
        let q_closed = interior_breach(&p, 0.0, 1.0).unwrap();
        assert!((q_direct - q_closed).abs() < 1e-15);
        assert!((q_closed - 0.1f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn defender_clamps_when_interior_formula_negative() {
        let p = worked(1.0);
        assert!((interior_denominator(&p, 0.0, 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(defender_best_response(&p, 0.0, 1.0).unwrap(), 0.0);
        assert!(matches!(
            interior_breach(&p, 0.0, 1.0),
            Err(ModelError::CornerBranch { .. })
        ));
        assert!(defender_best_response(&p, 0.0, 0.0).is_err());
    }

    #[test]
    fn interior_breach_scaling() {
        let q1 = interior_breach(&worked(10.0), 0.0, 1.0).unwrap();
        let q4 = interior_breach(&worked(40.0), 0.0, 1.0).unwrap();
        assert!((q4 - q1 / 2.0).abs() < 1e-15);
        // doubling h/delta: halve delta0
        let p = ModelParams::<f64>::builder()
            .q0(0.5)
            .v(10.0)
            .delta(ErosionSpec::hyperbolic(0.5, 1.0).unwrap())
            .build()
            .unwrap();
        let q2 = interior_breach(&p, 0.0, 1.0).unwrap();
        assert!((q2 - q1 * 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn attacker_corner_cases() {
        let tiny = ModelParams::builder().b(0.01).c_a(100.0).build().unwrap();
        assert_eq!(attacker_best_response(&tiny, 0.5, 1.0).unwrap(), 0.0);
        let costly = ModelParams::builder().b(10.0).f(11.0).build().unwrap();
        for d in [0.0, 0.5, 3.0, 30.0] {
            assert_eq!(attacker_best_response(&costly, d, 1.0).unwrap(), 0.0);
        }
        let none = ModelParams::builder().b(0.0).build().unwrap();
        assert_eq!(attacker_best_response(&none, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn attacker_response_beats_grid() {
        let p = ModelParams::<f64>::builder()
            .q0(0.3)
            .delta(ErosionSpec::hyperbolic(1.0, 1.5).unwrap())
            .f(0.05)
            .build()
            .unwrap();
        for d in [0.0, 0.2, 0.6, 1.5, 4.0] {
            let a = attacker_best_response(&p, d, 1.0).unwrap();
            let best = payoff_attacker(&p, a, d, 1.0).unwrap();
            let n = 100_000;
            let grid_best = (0..=n)
                .map(|i| payoff_attacker(&p, 10.0 * i as f64 / n as f64, d, 1.0).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(best >= grid_best - 1e-12, "d = {d}");
        }
    }

    #[test]
    fn reduced_objective_at_zero() {
        let p = ModelParams::<f64>::builder().q0(0.5).v(10.0).b(10.0).build().unwrap();
        let r = reduced_attacker_objective(&p, 0.0, 1.0).unwrap();
        assert!((r - 10.0 * 0.1f64.sqrt()).abs() < 1e-13);
        assert!((r - 3.1623).abs() < 1e-4);
        assert!(reduced_attacker_objective(&worked(1.0), 0.0, 1.0).is_err());
    }

    #[test]
    fn reduced_objective_slope_eventually_below_half_cost() {
        let p = ModelParams::<f64>::builder().q0(0.5).v(1e4).b(10.0).build().unwrap();
        let a = 400.0;
        let slope = reduced_attacker_objective(&p, a + 1.0, 1.0).unwrap()
            - reduced_attacker_objective(&p, a, 1.0).unwrap();
        assert!(slope <= -0.5);
    }

    #[test]
    fn uniqueness_by_family() {
        let base = ModelParams::<f64>::builder();
        let hyp = base.build().unwrap();
        assert!(uniqueness_check(&hyp).certified);
        let pl = base.delta(ErosionSpec::power_law(1.0, 1.0, 1.0).unwrap()).build().unwrap();
        assert!(uniqueness_check(&pl).certified);
        let steep = base
            .delta(ErosionSpec::power_law_steep(1.0, 1.0, 2.0).unwrap())
            .build()
            .unwrap();
        let rep = uniqueness_check(&steep);
        assert!(!rep.certified && !rep.erosion_rate_condition);
        let exp = base.delta(ErosionSpec::exponential(1.0, 1.0).unwrap()).build().unwrap();
        assert!(!uniqueness_check(&exp).certified);
        let sat = base
            .h(AmplificationSpec::saturating(1.0, 0.5).unwrap())
            .build()
            .unwrap();
        assert!(uniqueness_check(&sat).certified);
    }

    #[test]
    fn equilibrium_without_attacker_stake() {
        let p = ModelParams::<f64>::builder().b(0.0).build().unwrap();
        let eq = solve_equilibrium(&p, 1.0).unwrap();
        assert_eq!(eq.a_star, 0.0);
        assert_eq!(eq.d_star, defender_best_response(&p, 0.0, 1.0).unwrap());
        assert!(!eq.attacker_interior);
    }

    #[test]
    fn equilibrium_without_defender_stake() {
        let p = ModelParams::<f64>::builder().v(0.0).f(0.1).build().unwrap();
        let eq = solve_equilibrium(&p, 1.0).unwrap();
        assert_eq!(eq.d_star, 0.0);
        let direct = attacker_best_response(&p, 0.0, 1.0).unwrap();
        assert!((eq.a_star - direct).abs() < 1e-9);
    }

    #[test]
    fn interior_equilibrium_satisfies_both_focs() {
        let p = ModelParams::<f64>::builder()
            .q0(0.3)
            .delta(ErosionSpec::hyperbolic(1.0, 1.5).unwrap())
            .build()
            .unwrap();
        let eq = solve_equilibrium(&p, 1.0).unwrap();
        assert!(eq.interior());
        assert!(eq.defender_foc_residual.abs() < 1e-8 * p.c_d());
        assert!(eq.attacker_foc_residual.abs() < 1e-8 * p.c_a());
        assert!((eq.q_star - p.breach_raw(eq.a_star, eq.d_star, 1.0)).abs() < 1e-12);
        assert_eq!(eq.fixed_points_found, 1);
    }

    #[test]
    fn provocation_trivial_cases() {
        let free = ModelParams::<f64>::builder().build().unwrap();
        assert_eq!(provocation_threshold(&free, 1.0).unwrap(), ProvocationThreshold::AlwaysAdopts);
        let costly = ModelParams::builder().b(10.0).f(12.0).build().unwrap();
        assert!(matches!(
            provocation_threshold(&costly, 1.0).unwrap(),
            ProvocationThreshold::NeverAdopts { .. }
        ));
    }

    #[test]
    fn provocation_interior_matches_dense_grid() {
        let base = ModelParams::<f64>::builder()
            .q0(0.3)
            .delta(ErosionSpec::hyperbolic(1.0, 1.5).unwrap())
            .build()
            .unwrap();
        let g0 = adoption_gain(&base, 0.0, 1.0).unwrap();
        let p = base.to_builder().f(g0 + 0.2).build().unwrap();
        let ProvocationThreshold::Threshold { d_hat, gain_at_threshold, nonmonotone, bracket_upper } =
            provocation_threshold(&p, 1.0).unwrap()
        else {
            panic!("expected an interior threshold");
        };
        assert!(d_hat > 0.0);
        assert!(gain_at_threshold.abs() < 1e-8);
        // the gain falls again once defense is heavy enough
        assert!(nonmonotone);
        let n = 20_000;
        let h = bracket_upper / n as f64;
        let first = (0..=n)
            .map(|i| i as f64 * h)
            .find(|&d| adoption_gain(&p, d, 1.0).unwrap() >= 0.0)
            .unwrap();
        assert!(first >= d_hat && first - d_hat <= h);
    }
}
