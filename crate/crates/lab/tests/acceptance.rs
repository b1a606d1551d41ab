//! Acceptance suite: one line per criterion, `PASS` or `FAIL`.
//!
//! Criteria listed in `KNOWN_FAILURES` are expected to fail on this
//! implementation; the run errors if one of them unexpectedly passes or if any
//! other criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::time::Instant;

use arms_race_core::strategic::{
    delta_pi_report, deterrence_threshold, select_target, threshold_sensitivity, SensitivityParameter,
};
use arms_race_core::{
    asymptotic_breach, attacker_marginal_breakdown, breach_probability, contest_denominator,
    critical_surface_count, defender_best_response, defender_marginal, dgamma_sensitivity_at_zero,
    interior_breach, multi_surface_state, payoff_defender, r0_multi, r_general, reduced_attacker_objective,
    simulate_continuous, simulate_discrete, solve_equilibrium, stability_report,
    uniqueness_check, AmplificationSpec, ContinuousOptions, DefenderProfile, DiscreteOptions, ErosionSpec,
    InvestmentState, ModelParams, ModelParamsF64, StabilityClass, SurfaceConfig, TargetingMode,
};
use arms_race_lab::rng::Lcg;
use arms_race_lab::{execute, parse_csv, parse_scenario, scenario_hash, OutputFormat, Subcommand};

/// Criteria this implementation does not meet; see the project notes.
const KNOWN_FAILURES: &[usize] = &[7];

const SEED: u64 = 42;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn log_uniform(rng: &mut Lcg, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.next_unit()).exp()
}

fn rel_err(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs().max(f64::MIN_POSITIVE)
}

fn random_params(rng: &mut Lcg) -> ModelParamsF64 {
    let q0 = rng.uniform(0.02, 0.98);
    let alpha = log_uniform(rng, 0.01, 10.0);
    let h = if rng.next_unit() < 0.5 {
        AmplificationSpec::logarithmic(alpha).unwrap()
    } else {
        AmplificationSpec::saturating(alpha, log_uniform(rng, 0.1, 10.0)).unwrap()
    };
    let delta0 = log_uniform(rng, 0.05, 1.0);
    let beta = log_uniform(rng, 0.01, 10.0);
    let delta = match (rng.next_unit() * 3.0) as usize {
        0 => ErosionSpec::hyperbolic(delta0, beta).unwrap(),
        1 => ErosionSpec::power_law(delta0, beta, rng.uniform(0.2, 1.0)).unwrap(),
        _ => ErosionSpec::exponential(delta0, beta).unwrap(),
    };
    ModelParams::<f64>::builder()
        .q0(q0)
        .h(h)
        .delta(delta)
        .s(log_uniform(rng, 0.1, 10.0))
        .v(log_uniform(rng, 0.1, 1000.0))
        .b(log_uniform(rng, 0.1, 1000.0))
        .c_d(log_uniform(rng, 0.1, 10.0))
        .c_a(log_uniform(rng, 0.1, 10.0))
        .build()
        .unwrap()
}

/// Fourth-order central difference.
fn derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

fn step_for(x: f64) -> f64 {
    1e-3 * x.max(1e-3)
}

/// Rounding-error bound of [`derivative`] for a function of magnitude `f`.
fn rounding_floor(f: f64, h: f64) -> f64 {
    100.0 * f64::EPSILON * f.abs() / h
}

// 1. Breach probability range, status quo, and partial derivatives.
fn contest_form() -> Outcome {
    const TOL: f64 = 1e-5;
    let mut rng = Lcg::new(SEED);
    let mut worst_a = 0.0f64;
    let mut worst_d = 0.0f64;
    let mut bad_range = 0;
    let mut bad_status_quo = 0;
    let mut noise_limited = 0;
    for _ in 0..1000 {
        let p = random_params(&mut rng);
        let s = p.s();
        let a = log_uniform(&mut rng, 0.01, 50.0);
        let d = log_uniform(&mut rng, 0.01, 50.0);
        let q = breach_probability(&p, a, d, s).unwrap();
        if !(0.0..1.0).contains(&q) {
            bad_range += 1;
        }
        if breach_probability(&p, 0.0, 0.0, s).unwrap() != p.q0() {
            bad_status_quo += 1;
        }
        let (ha, hd) = (step_for(a), step_for(d));
        let fd_a = derivative(|x| breach_probability(&p, x, d, s).unwrap(), a, ha);
        let fd_d = derivative(|x| breach_probability(&p, a, x, s).unwrap(), d, hd);
        let an_a = attacker_marginal_breakdown(&p, a, d, s).unwrap().total;
        let an_d = defender_marginal(&p, a, d, s).unwrap();
        let (floor_a, floor_d) = (rounding_floor(q, ha), rounding_floor(q, hd));
        if floor_a > TOL * an_a.abs() || floor_d > TOL * an_d.abs() {
            noise_limited += 1;
        }
        worst_a = worst_a.max((fd_a - an_a).abs() / (TOL * an_a.abs() + floor_a));
        worst_d = worst_d.max((-fd_d - an_d).abs() / (TOL * an_d.abs() + floor_d));
    }
    outcome(
        bad_range == 0 && bad_status_quo == 0 && worst_a <= 1.0 && worst_d <= 1.0,
        format!(
            "1000 points: out-of-range {bad_range}, status-quo mismatches {bad_status_quo}; \
             worst error / allowance dq/da {worst_a:.2e}, -dq/dd {worst_d:.2e} \
             (allowance {TOL:.0e} relative plus rounding floor, binding at {noise_limited} points)"
        ),
    )
}

// 2. General ratio against the finite-difference ratio of partials.
fn ratio_cancellation() -> Outcome {
    const TOL: f64 = 1e-5;
    let mut rng = Lcg::new(SEED + 1);
    let (mut worst, mut high, mut low, mut noise_limited) = (0.0f64, 0, 0, 0);
    let mut worst_clean = 0.0f64;
    for i in 0..1000 {
        let mut p = random_params(&mut rng);
        let (mut a, mut d) = (log_uniform(&mut rng, 0.01, 50.0), log_uniform(&mut rng, 0.01, 50.0));
        match i % 3 {
            0 => {
                p = p.to_builder().q0(rng.uniform(0.97, 0.999)).build().unwrap();
                d = log_uniform(&mut rng, 1e-3, 0.05);
                a = log_uniform(&mut rng, 1.0, 50.0);
            }
            1 => {
                p = p.to_builder().q0(rng.uniform(0.001, 0.05)).build().unwrap();
            }
            _ => {}
        }
        let s = p.s();
        let q = breach_probability(&p, a, d, s).unwrap();
        if q > 0.9 {
            high += 1;
        }
        if q < 0.1 {
            low += 1;
        }
        let (ha, hd) = (step_for(a), step_for(d));
        let fd_a = derivative(|x| breach_probability(&p, x, d, s).unwrap(), a, ha);
        let fd_d = derivative(|x| breach_probability(&p, a, x, s).unwrap(), d, hd);
        let r = r_general(&p, a, d, s).unwrap().r_general;
        let an_a = attacker_marginal_breakdown(&p, a, d, s).unwrap().total;
        let an_d = defender_marginal(&p, a, d, s).unwrap();
        let noise = rounding_floor(q, ha) / an_a.abs() + rounding_floor(q, hd) / an_d.abs();
        let err = rel_err(r, fd_a / -fd_d);
        if noise > TOL {
            noise_limited += 1;
        } else {
            worst_clean = worst_clean.max(err);
        }
        worst = worst.max(err / (TOL + noise));
    }
    outcome(
        worst <= 1.0 && worst_clean < TOL && high >= 100 && low >= 100,
        format!(
            "1000 points ({high} with q > 0.9, {low} with q < 0.1): max rel err where rounding is negligible \
             {worst_clean:.2e}; worst error / allowance {worst:.2e} \
             (allowance {TOL:.0e} relative plus rounding floor, binding at {noise_limited} points)"
        ),
    )
}

// 3. Closed-form defender best response against a dense grid search.
fn defender_closed_form() -> Outcome {
    const GRID: usize = 100_000;
    let mut rng = Lcg::new(SEED + 2);
    let (mut mismatches, mut clamps, mut interior) = (0, 0, 0);
    for _ in 0..500 {
        let p = random_params(&mut rng);
        let s = p.s();
        let a = log_uniform(&mut rng, 0.01, 50.0);
        let d_closed = defender_best_response(&p, a, s).unwrap();
        let hi = p.defender_bound();
        let step = hi / GRID as f64;
        let u = |d: f64| payoff_defender(&p, a, d, s).unwrap();
        let (mut best_d, mut best_u) = (0.0, u(0.0));
        for i in 1..=GRID {
            let d = step * i as f64;
            let v = u(d);
            if v > best_u {
                best_d = d;
                best_u = v;
            }
        }
        let ok = if d_closed == 0.0 {
            clamps += 1;
            best_d == 0.0 || u(0.0) >= best_u - 1e-12 * best_u.abs().max(1.0)
        } else {
            interior += 1;
            (d_closed - best_d).abs() <= step || u(d_closed) >= best_u - 1e-12 * best_u.abs().max(1.0)
        };
        if !ok {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0 && clamps > 0 && interior > 0,
        format!("500 draws ({interior} interior, {clamps} clamped): {mismatches} disagree with the 1e5-point grid"),
    )
}

// 4. Worked closed-form point.
fn worked_point() -> Outcome {
    let p = ModelParams::<f64>::builder()
        .q0(0.5)
        .v(10.0)
        .c_d(1.0)
        .delta(ErosionSpec::hyperbolic(1.0, 1.0).unwrap())
        .s(1.0)
        .build()
        .unwrap();
    let d = defender_best_response(&p, 0.0, 1.0).unwrap();
    let phi = contest_denominator(&p, 0.0, d, 1.0).unwrap();
    let q_direct = breach_probability(&p, 0.0, d, 1.0).unwrap();
    let q_closed = interior_breach(&p, 0.0, 1.0).unwrap();
    let ok = (phi - 2.5f64.sqrt()).abs() < 1e-12
        && (d - 1.16228).abs() < 5e-6
        && (q_closed - 0.1f64.sqrt()).abs() < 1e-12
        && (q_direct - q_closed).abs() < 1e-12;
    outcome(
        ok,
        format!("Phi = {phi:.15}, d* = {d:.10}, q* = {q_closed:.15}, closed forms differ by {:.1e}", (q_direct - q_closed).abs()),
    )
}

// 5. Uniqueness certificate across families.
fn uniqueness_certificate() -> Outcome {
    let alphas = [0.01, 0.1, 1.0, 10.0];
    let betas = [0.01, 0.1, 1.0, 10.0, 100.0];
    let ks = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0];
    let base = |alpha: f64, delta: ErosionSpec<f64>| {
        ModelParams::<f64>::builder()
            .q0(0.3)
            .h(AmplificationSpec::logarithmic(alpha).unwrap())
            .delta(delta)
            .build()
            .unwrap()
    };
    let mut wrong = Vec::new();
    let mut worst_second_diff = f64::NEG_INFINITY;
    let mut check_objective = |p: &ModelParamsF64| {
        let upper = 4.0 * p.attacker_bound();
        let vals: Vec<Option<f64>> = (0..=2047)
            .map(|i| reduced_attacker_objective(p, upper * i as f64 / 2047.0, p.s()).ok())
            .collect();
        for w in vals.windows(3) {
            if let [Some(x), Some(y), Some(z)] = w {
                worst_second_diff = worst_second_diff.max(x - 2.0 * y + z);
            }
        }
    };
    for &alpha in &alphas {
        for &beta in &betas {
            let p = base(alpha, ErosionSpec::hyperbolic(1.0, beta).unwrap());
            let c = uniqueness_check(&p).certified;
            if !c {
                wrong.push(format!("hyperbolic a={alpha} b={beta}"));
            } else {
                check_objective(&p);
            }
            for &k in &ks {
                let p = base(alpha, ErosionSpec::power_law_steep(1.0, beta, k).unwrap());
                let c = uniqueness_check(&p).certified;
                if c != (k <= 1.0) {
                    wrong.push(format!("power law a={alpha} b={beta} k={k}"));
                }
                if c {
                    check_objective(&p);
                }
            }
            if uniqueness_check(&base(alpha, ErosionSpec::exponential(1.0, beta).unwrap())).certified {
                wrong.push(format!("exponential a={alpha} b={beta}"));
            }
        }
    }
    outcome(
        wrong.is_empty() && worst_second_diff <= 1e-10,
        format!(
            "{} misclassified {:?}; max reduced-objective second difference where certified {worst_second_diff:.2e}",
            wrong.len(),
            wrong.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn dynamics_params(beta: f64, b_over_v: f64, s: f64, v: f64) -> ModelParamsF64 {
    ModelParams::<f64>::builder()
        .q0(0.3)
        .h(AmplificationSpec::logarithmic(0.5).unwrap())
        .delta(ErosionSpec::hyperbolic(1.0, beta).unwrap())
        .s(s)
        .v(v)
        .b(b_over_v * v)
        .build()
        .unwrap()
}

const DYNAMICS_BETAS: [f64; 3] = [0.1, 1.0, 10.0];
const DYNAMICS_RATIOS: [f64; 3] = [0.125, 1.0, 3.0];

// 6. Global convergence of the discrete and continuous dynamics.
fn global_convergence() -> Outcome {
    const SPREAD_TOL: f64 = 1e-6;
    const RK4_TOL: f64 = 1e-4;
    let opts = DiscreteOptions {
        eta: 0.15,
        max_steps: 50_000,
        tol: 1e-12,
    };
    let copts = ContinuousOptions {
        t_end: 400.0,
        dt: 0.05,
        tol: 1e-12,
    };
    let mut failures = Vec::new();
    let (mut worst_spread, mut worst_rk4) = (0.0f64, 0.0f64);
    for &beta in &DYNAMICS_BETAS {
        for &ratio in &DYNAMICS_RATIOS {
            let p = dynamics_params(beta, ratio, 2.0, 100.0);
            let mut rng = Lcg::new(SEED);
            let mut limits = Vec::new();
            for _ in 0..20 {
                let d = rng.uniform(0.0, p.defender_bound());
                let start = InvestmentState::new(d, rng.uniform(0.0, p.attacker_bound()));
                let disc = simulate_discrete(&p, p.s(), start, &opts).unwrap();
                let cont = simulate_continuous(&p, p.s(), start, &copts).unwrap();
                if !disc.converged {
                    failures.push(format!("beta={beta} B/V={ratio} discrete"));
                }
                worst_rk4 = worst_rk4.max(cont.last().sup_dist(&disc.last()));
                limits.push(disc.last());
            }
            for x in &limits {
                worst_spread = worst_spread.max(x.sup_dist(&limits[0]));
            }
        }
    }
    outcome(
        failures.is_empty() && worst_spread < SPREAD_TOL && worst_rk4 < RK4_TOL,
        format!(
            "9 points x 20 starts at eta 0.15: {} non-converged, max limit spread {worst_spread:.2e} (tol {SPREAD_TOL:.0e}), \
             max RK4 gap {worst_rk4:.2e} (tol {RK4_TOL:.0e})",
            failures.len()
        ),
    )
}

// 7. Local stability bound at certified interior equilibria.
fn stability_bound() -> Outcome {
    const PERTURBATION: f64 = 1e-3;
    let mut checked = 0;
    let mut problems = Vec::new();
    for (s, v) in [(2.0, 100.0), (1.0, 10.0)] {
        for &beta in &DYNAMICS_BETAS {
            for &ratio in &DYNAMICS_RATIOS {
                let p = dynamics_params(beta, ratio, s, v);
                let eq = solve_equilibrium(&p, p.s()).unwrap();
                if !(eq.interior() && eq.uniqueness_certified) {
                    continue;
                }
                checked += 1;
                let tag = format!("s={s} V={v} beta={beta} B/V={ratio}");
                let rep = stability_report(&p, p.s(), &eq).unwrap();
                if !(rep.det_j > 0.0) || rep.classification == StabilityClass::Saddle {
                    problems.push(format!("{tag}: det J = {:.3}", rep.det_j));
                    continue;
                }
                let star = InvestmentState::new(eq.d_star, eq.a_star);
                let start = InvestmentState::new(eq.d_star * (1.0 + PERTURBATION), eq.a_star * (1.0 + PERTURBATION));
                let run = |eta: f64| {
                    simulate_discrete(
                        &p,
                        p.s(),
                        start,
                        &DiscreteOptions {
                            eta,
                            max_steps: 20_000,
                            tol: 1e-12,
                        },
                    )
                    .unwrap()
                };
                let inside = run(0.9 * rep.eta_bound);
                let inside_gap = inside.last().sup_dist(&star);
                if !(inside.converged && inside_gap < 1e-6) {
                    problems.push(format!(
                        "{tag}: rho0 = {:.3}, eta = 0.9 x bound = {:.3} does not converge (spectral radius {:.3})",
                        rep.rho0,
                        0.9 * rep.eta_bound,
                        rep.discrete_spectral_radius(0.9 * rep.eta_bound)
                    ));
                }
                if rep.rho0 > 1.0 {
                    let outside = run(1.5 * rep.eta_bound);
                    let gap = outside.last().sup_dist(&star);
                    let scale = PERTURBATION * eq.d_star.max(eq.a_star);
                    if outside.converged && gap < scale {
                        problems.push(format!("{tag}: eta = 1.5 x bound still converges"));
                    }
                }
            }
        }
    }
    outcome(
        problems.is_empty() && checked > 0,
        format!("{checked} certified interior equilibria; {}", if problems.is_empty() { "all satisfy the bound".to_string() } else { problems.join("; ") }),
    )
}

// 8. Surface-count independence at full correlation.
fn n_independence() -> Outcome {
    let p = ModelParams::<f64>::builder().h(AmplificationSpec::logarithmic(0.7).unwrap()).s(1.3).build().unwrap();
    let counts = [1.0, 10.0, 100.0, 1000.0, 1e6];
    let r1 = r0_multi(&p, &SurfaceConfig::new(1.0, 1.0, 1.0, p.s()).unwrap()).unwrap();
    let ulp = f64::from_bits(r1.to_bits() + 1) - r1;
    let worst_flat = counts
        .iter()
        .map(|&n| (r0_multi(&p, &SurfaceConfig::new(n, 1.0, 1.0, p.s()).unwrap()).unwrap() - r1).abs())
        .fold(0.0, f64::max);
    let worst_power = counts
        .iter()
        .map(|&n| {
            let r = r0_multi(&p, &SurfaceConfig::new(n, 0.5, 1.0, p.s()).unwrap()).unwrap();
            rel_err(r * n.sqrt(), r1)
        })
        .fold(0.0, f64::max);
    outcome(
        worst_flat <= ulp && worst_power < 1e-12,
        format!("rho=1: max deviation {worst_flat:.2e} (one ulp {ulp:.2e}); rho=0.5: max rel err of N^-0.5 scaling {worst_power:.2e}"),
    )
}

// 9. Dilution limit.
fn dilution_limit() -> Outcome {
    let p = ModelParams::<f64>::builder().q0(0.3).s(2.0).build().unwrap();
    let (a, d) = (1.0, 1.5);
    let q_inf = asymptotic_breach(&p, a).unwrap();
    let state = |n: f64| multi_surface_state(&p, &SurfaceConfig::new(n, 1.0, 0.0, p.s()).unwrap(), a, d).unwrap();
    let gap = |n: f64| (state(n).q_per_surface - q_inf).abs();
    let ratios: Vec<f64> = [1e4, 1e5].iter().map(|&n| gap(n) / gap(10.0 * n) / 10.0).collect();
    let lam: Vec<f64> = [1e4, 1e5, 1e6].iter().map(|&n| state(2.0 * n).lambda / state(n).lambda).collect();
    let ok = ratios.iter().all(|r| (r - 1.0).abs() <= 0.05) && lam.iter().all(|r| (r / 2.0 - 1.0).abs() <= 0.01);
    outcome(
        ok,
        format!("|q - q_inf| decade ratios / 10: {ratios:.4?}; lambda(2N)/lambda(N): {lam:.6?}"),
    )
}

fn one_sided(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h)
}

// 10. Critical surface count and gamma sensitivities.
fn surface_threshold() -> Outcome {
    let p = ModelParams::<f64>::builder()
        .h(AmplificationSpec::logarithmic(0.1).unwrap())
        .delta(ErosionSpec::hyperbolic(1.0, 1.0).unwrap())
        .s(2.5)
        .build()
        .unwrap();
    let expected = p.delta().delta0() * p.s() / p.h().alpha();
    let cfg0 = SurfaceConfig::new(1.0, 1.0, 0.0, p.s()).unwrap();
    let th = critical_surface_count(&p, &cfg0).unwrap().threshold().unwrap();
    let root_err = rel_err(th.n_star, expected);
    let n_star = |g: f64| {
        critical_surface_count(&p, &cfg0.with_gamma(g).unwrap())
            .unwrap()
            .threshold()
            .unwrap()
            .n_star
    };
    let fd_dn = one_sided(n_star, 0.0, 1e-6);
    let dn_err = rel_err(th.dn_dgamma.unwrap(), fd_dn);

    let cfg = SurfaceConfig::new(10.0, 0.5, 0.0, p.s()).unwrap();
    let r0 = |g: f64| r0_multi(&p, &cfg.with_gamma(g).unwrap()).unwrap();
    let fd_r = one_sided(r0, 0.0, 1e-5);
    let dr_err = rel_err(dgamma_sensitivity_at_zero(&p, &cfg).unwrap(), fd_r);
    let at_one = dgamma_sensitivity_at_zero(&p, &cfg.with_n(1.0).unwrap()).unwrap();
    outcome(
        root_err < 1e-8 && dn_err < 1e-4 && dr_err < 1e-6 && at_one == 0.0,
        format!(
            "N* = {:.12} vs {expected} (rel {root_err:.1e}); dN*/dgamma rel err {dn_err:.1e}; \
             dR0/dgamma rel err {dr_err:.1e}; value at N=1 {at_one}",
            th.n_star
        ),
    )
}

fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn scenario_text(name: &str) -> String {
    std::fs::read_to_string(scenarios_dir().join(name)).unwrap()
}

// 11. Deterrence threshold, flatness, and two-route sensitivities.
fn deterrence() -> Outcome {
    const SCAN: usize = 100_000;
    let sc = parse_scenario(&scenario_text("deterrence.txt")).unwrap();
    let scen = sc.deterrence.unwrap().scenario;
    let ga = scen.gamma_a();
    let dp = |g: f64| delta_pi_report(&scen, g).unwrap().delta_pi;
    let grid: Vec<f64> = (0..64).map(|i| dp(ga * i as f64 / 63.0)).collect();
    let strictly_decreasing = grid.windows(2).all(|w| w[1] < w[0]);
    let at_ga = dp(ga);
    let flat = (0..=16).all(|i| dp(ga + (1.0 - ga) * i as f64 / 16.0) == at_ga);

    let root = deterrence_threshold(&scen).unwrap().gamma_star();
    let h = ga / SCAN as f64;
    let mut prev = dp(0.0);
    let mut cell = None;
    for i in 1..=SCAN {
        let cur = dp(h * i as f64);
        if prev > 0.0 && cur <= 0.0 && cell.is_none() {
            cell = Some((h * (i - 1) as f64, h * i as f64));
        }
        prev = cur;
    }
    let root_ok = matches!((root, cell), (Some(r), Some((lo, hi))) if r >= lo - h && r <= hi + h);

    let mut worst = 0.0f64;
    let mut sens_ok = true;
    for param in [
        SensitivityParameter::S,
        SensitivityParameter::HcAlpha,
        SensitivityParameter::B,
        SensitivityParameter::CA,
    ] {
        match threshold_sensitivity(&scen, param, 1e-4) {
            Ok(s) => worst = worst.max((s.resolved - s.implicit).abs() / s.resolved.abs().max(s.implicit.abs())),
            Err(_) => sens_ok = false,
        }
    }
    outcome(
        strictly_decreasing && flat && root_ok && sens_ok && worst < 1e-3,
        format!(
            "64-point grid strictly decreasing: {strictly_decreasing}; flat on [gamma_a, 1]: {flat}; \
             root {root:?} vs 1e5-scan cell {cell:?}; max sensitivity disagreement {worst:.1e} (tol 1e-3)"
        ),
    )
}

// 12. Target selection.
fn targeting() -> Outcome {
    let p = ModelParams::<f64>::builder().q0(0.9).build().unwrap();
    let prof = |d: f64, b: f64| DefenderProfile::new(d, 1.0, 0.0, 1, b, 10.0).unwrap();
    let sel = select_target(&p, 1.0, &[prof(20.0, 10.0), prof(0.0, 1.0)], TargetingMode::FixedA(0.0)).unwrap();
    let base_ok = sel.index == 0
        && (sel.rows[0].q_k - 0.3).abs() < 1e-12
        && (sel.rows[1].q_k - 0.9).abs() < 1e-12
        && (sel.rows[0].expected_value - 3.0).abs() < 1e-12
        && (sel.rows[1].expected_value - 0.9).abs() < 1e-12;

    let mut rng = Lcg::new(SEED + 12);
    let mut rescale_failures = 0;
    for _ in 0..200 {
        let profiles: Vec<_> = (0..5)
            .map(|_| {
                DefenderProfile::new(
                    rng.uniform(0.0, 20.0),
                    rng.uniform(0.1, 3.0),
                    rng.next_unit(),
                    1 + (rng.next_unit() * 10.0) as u32,
                    log_uniform(&mut rng, 0.1, 100.0),
                    10.0,
                )
                .unwrap()
            })
            .collect();
        let mode = TargetingMode::FixedA(rng.uniform(0.0, 5.0));
        let idx = select_target(&p, 0.7, &profiles, mode).unwrap().index;
        for c in [1e-3, 0.5, 7.0, 1e3] {
            let scaled: Vec<_> = profiles
                .iter()
                .map(|q| DefenderProfile::new(q.d_k, q.s_k, q.gamma_k, q.n_k, q.b_k * c, q.v_k).unwrap())
                .collect();
            if select_target(&p, 0.7, &scaled, mode).unwrap().index != idx {
                rescale_failures += 1;
            }
        }
    }
    let tie = [prof(1.0, 5.0); 4];
    let ties_ok = [TargetingMode::FixedA(0.5), TargetingMode::BestResponsePerTarget]
        .iter()
        .all(|&m| (0..3).all(|_| select_target(&p, 1.0, &tie, m).unwrap().index == 0));
    outcome(
        base_ok && rescale_failures == 0 && ties_ok,
        format!(
            "reference pair selects {} with EV ({:.3}, {:.3}); rescaling changed the argmax {rescale_failures} times in 800; ties resolve to 0: {ties_ok}",
            sel.index, sel.rows[0].expected_value, sel.rows[1].expected_value
        ),
    )
}

// 13. Figure data and caption checks.
fn figures() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    match execute(Subcommand::Figures, &scenario_text("figures.txt"), dir.path(), OutputFormat::Both, None) {
        Ok(inv) => {
            let names: Vec<&str> = inv.tables.iter().map(|t| t.name.as_str()).collect();
            let present = ["fig1_low", "fig1_mid", "fig1_high", "fig2a", "fig2b", "fig3"]
                .iter()
                .all(|n| names.contains(n));
            let svgs = ["fig2a.svg", "fig2b.svg", "fig3.svg", "fig1_mid.svg"]
                .iter()
                .all(|f| dir.path().join(f).exists());
            let passed = inv.checks.iter().filter(|c| c.passed).count();
            outcome(
                present && svgs && passed == inv.checks.len() && !inv.checks.is_empty(),
                format!("{passed}/{} caption checks pass; all series emitted: {present}; charts written: {svgs}", inv.checks.len()),
            )
        }
        Err(e) => outcome(false, format!("figures run failed: {e}")),
    }
}

// 14. CSV round trip and byte-identical reruns.
fn cli_round_trip() -> Outcome {
    let runs = [
        (Subcommand::Ratio, "parity.txt"),
        (Subcommand::Equilibrium, "equilibrium.txt"),
        (Subcommand::Dynamics, "dynamics.txt"),
        (Subcommand::Scaling, "scaling.txt"),
        (Subcommand::Deterrence, "deterrence.txt"),
        (Subcommand::Targeting, "targeting.txt"),
        (Subcommand::Figures, "figures.txt"),
    ];
    let mut files = 0;
    let mut problems = Vec::new();
    for (sub, file) in runs {
        let text = scenario_text(file);
        let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let first = execute(sub, &text, d1.path(), OutputFormat::Both, Some(11)).unwrap();
        execute(sub, &text, d2.path(), OutputFormat::Both, Some(11)).unwrap();
        for t in &first.tables {
            let path = d1.path().join(format!("{}.csv", t.name));
            let back = parse_csv(&path).unwrap();
            files += 1;
            if !back.same_values(t) || back.metadata != t.metadata {
                problems.push(format!("{} does not round-trip", t.name));
            }
            if back.metadata.scenario_hash != scenario_hash(&text) {
                problems.push(format!("{} hash mismatch", t.name));
            }
        }
        for path in &first.written {
            let name = path.file_name().unwrap();
            if std::fs::read(path).unwrap() != std::fs::read(d2.path().join(name)).unwrap() {
                problems.push(format!("{} differs between runs", name.to_string_lossy()));
            }
        }
    }
    outcome(
        problems.is_empty() && files > 0,
        format!("{files} CSV tables across 7 subcommands; {}", if problems.is_empty() { "bit-exact and byte-identical".to_string() } else { problems.join("; ") }),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 14] = [
        ("contest form", contest_form),
        ("ratio cancellation", ratio_cancellation),
        ("defender closed form", defender_closed_form),
        ("worked point", worked_point),
        ("uniqueness certificate", uniqueness_certificate),
        ("global convergence", global_convergence),
        ("stability bound", stability_bound),
        ("surface-count independence", n_independence),
        ("dilution limit", dilution_limit),
        ("surface threshold", surface_threshold),
        ("deterrence", deterrence),
        ("targeting", targeting),
        ("figures", figures),
        ("CLI round trip", cli_round_trip),
    ];
    let mut unexpected = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        let started = Instant::now();
        let out = run();
        let known = KNOWN_FAILURES.contains(&id);
        println!(
            "criterion {id:>2} {} {name}{} [{:.1}s]: {}",
            if out.passed { "PASS" } else { "FAIL" },
            if known { " (known failure)" } else { "" },
            started.elapsed().as_secs_f64(),
            out.detail
        );
        if out.passed == known {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected outcomes for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
