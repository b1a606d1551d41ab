//! Subcommand orchestration: scenario in, result tables out.

use arms_race_core::strategic::{
    deterrence_threshold, delta_pi_report, select_target, threshold_sensitivity, ConditionFailure,
    SensitivityParameter,
};
use arms_race_core::{
    critical_surface_count, dgamma_sensitivity_at_zero, provocation_threshold, r0_multi, r_general,
    scaling_experiment, simulate_continuous, simulate_discrete, solve_equilibrium,
    stability_report, uniqueness_check, ContinuousOptions, CriticalSurfaceCount, DeterrenceThreshold,
    DiscreteOptions, InvestmentState, ModelError, ProvocationThreshold, StabilityClass, TargetingMode,
    effective_signal,
};

use crate::error::{LabError, ScenarioError};
use crate::figures;
use crate::rng::Lcg;
use crate::scenario::{Scenario, Section};
use crate::table::{Cell, Metadata, ResultTable, TOOL_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Subcommand {
    Ratio,
    Equilibrium,
    Dynamics,
    Scaling,
    Deterrence,
    Targeting,
    Figures,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Ratio => "ratio",
            Subcommand::Equilibrium => "equilibrium",
            Subcommand::Dynamics => "dynamics",
            Subcommand::Scaling => "scaling",
            Subcommand::Deterrence => "deterrence",
            Subcommand::Targeting => "targeting",
            Subcommand::Figures => "figures",
        }
    }

    /// Sections the subcommand reads.
    pub fn required_sections(self) -> &'static [Section] {
        match self {
            Subcommand::Ratio | Subcommand::Equilibrium | Subcommand::Figures => &[Section::Model],
            Subcommand::Dynamics => &[Section::Model, Section::Dynamics],
            Subcommand::Scaling => &[Section::Model, Section::Surfaces],
            Subcommand::Deterrence => &[Section::Model, Section::Deterrence],
            Subcommand::Targeting => &[Section::Model, Section::Targeting],
        }
    }
}

/// Errors unless the scenario carries every section `sub` needs.
pub fn check_sections(sc: &Scenario, sub: Subcommand) -> Result<(), ScenarioError> {
    match sub.required_sections().iter().find(|s| !sc.has(**s)) {
        Some(missing) => Err(ScenarioError::MissingSection {
            section: missing.name(),
            subcommand: sub.name(),
        }),
        None => Ok(()),
    }
}

pub(crate) struct Tables<'a> {
    sc: &'a Scenario,
    sub: Subcommand,
    out: Vec<ResultTable>,
}

impl<'a> Tables<'a> {
    pub(crate) fn new(sc: &'a Scenario, sub: Subcommand) -> Self {
        Self { sc, sub, out: Vec::new() }
    }

    pub(crate) fn sc(&self) -> &'a Scenario {
        self.sc
    }

    pub(crate) fn table(&self, name: &str, columns: &[&str]) -> ResultTable {
        ResultTable::new(
            name,
            columns,
            Metadata {
                scenario_hash: self.sc.source_hash.clone(),
                version: TOOL_VERSION.to_string(),
                subcommand: self.sub.name().to_string(),
                extra: Vec::new(),
            },
        )
    }

    pub(crate) fn add(&mut self, t: ResultTable) {
        self.out.push(t);
    }
}

fn opt(x: Option<f64>) -> Cell {
    Cell::Num(x.unwrap_or(f64::NAN))
}

fn class_code(c: StabilityClass) -> f64 {
    match c {
        StabilityClass::StableNode => 0.0,
        StabilityClass::StableSpiral => 1.0,
        StabilityClass::Saddle => 2.0,
        StabilityClass::Degenerate => 3.0,
    }
}

const CLASS_CODES: &str = "0 stable node, 1 stable spiral, 2 saddle, 3 degenerate";

fn ratio(t: &mut Tables) -> Result<(), LabError> {
    let sc = t.sc;
    let p = &sc.model;
    let (a, d) = sc.ratio_point;
    let rep = r_general(p, a, d, p.s())?;
    let q = arms_race_core::breach_probability(p, a, d, p.s())?;
    let mut tab = t.table(
        "ratio",
        &["a", "d", "r0", "r_general", "amplification_component", "erosion_premium", "q"],
    );
    tab.push(vec![
        a.into(),
        d.into(),
        rep.r0.into(),
        rep.r_general.into(),
        rep.amplification_component.into(),
        rep.erosion_premium.into(),
        q.into(),
    ]);
    t.add(tab);
    if let Some(surf) = &sc.surfaces {
        let cfg = &surf.config;
        let mut tab = t.table(
            "ratio_multi",
            &["n", "rho", "gamma", "s_eff", "r0_multi", "dr0_dgamma_at_zero"],
        );
        tab.push(vec![
            cfg.n().into(),
            cfg.rho().into(),
            cfg.gamma().into(),
            effective_signal(cfg).into(),
            r0_multi(p, cfg)?.into(),
            dgamma_sensitivity_at_zero(p, cfg)?.into(),
        ]);
        t.add(tab);
    }
    Ok(())
}

fn equilibrium(t: &mut Tables) -> Result<(), LabError> {
    let p = &t.sc.model;
    let s = p.s();
    let eq = solve_equilibrium(p, s)?;
    let mut tab = t.table(
        "equilibrium",
        &[
            "d_star",
            "a_star",
            "q_star",
            "r_at_eq",
            "defender_interior",
            "attacker_interior",
            "uniqueness_certified",
            "iterations",
            "defender_foc_residual",
            "attacker_foc_residual",
            "fixed_points_found",
            "fallback_used",
        ],
    );
    tab.push(vec![
        eq.d_star.into(),
        eq.a_star.into(),
        eq.q_star.into(),
        eq.r_at_eq.into(),
        eq.defender_interior.into(),
        eq.attacker_interior.into(),
        eq.uniqueness_certified.into(),
        eq.iterations.into(),
        eq.defender_foc_residual.into(),
        eq.attacker_foc_residual.into(),
        eq.fixed_points_found.into(),
        eq.fallback_used.into(),
    ]);
    t.add(tab);

    let u = uniqueness_check(p);
    let mut tab = t.table(
        "uniqueness",
        &[
            "certified",
            "amplification_concave",
            "erosion_rate_condition",
            "numeric_scan_ok",
            "max_second_difference",
            "scan_upper",
        ],
    );
    tab.push(vec![
        u.certified.into(),
        u.amplification_concave.into(),
        u.erosion_rate_condition.into(),
        u.numeric_scan_ok.into(),
        u.max_second_difference.into(),
        u.scan_upper.into(),
    ]);
    t.add(tab);

    let mut tab = t.table(
        "stability",
        &["br_slope_d", "br_slope_a", "rho0", "eta_bound", "eta_limit", "det_j", "classification"],
    );
    tab.note("classification_codes", CLASS_CODES);
    match stability_report(p, s, &eq) {
        Ok(r) => tab.push(vec![
            r.br_slope_d.into(),
            r.br_slope_a.into(),
            r.rho0.into(),
            r.eta_bound.into(),
            r.eta_limit().into(),
            r.det_j.into(),
            class_code(r.classification).into(),
        ]),
        Err(ModelError::CornerEquilibrium) => tab.note("status", "corner equilibrium, no linearization"),
        Err(e) => return Err(e.into()),
    }
    t.add(tab);

    if p.f() > 0.0 {
        let mut tab = t.table(
            "provocation",
            &["outcome", "d_hat", "gain_at_threshold", "nonmonotone", "bracket_upper"],
        );
        tab.note("outcome_codes", "0 threshold, 1 never adopts, 2 always adopts");
        let row = match provocation_threshold(p, s)? {
            ProvocationThreshold::Threshold {
                d_hat,
                gain_at_threshold,
                nonmonotone,
                bracket_upper,
            } => vec![0.0.into(), d_hat.into(), gain_at_threshold.into(), nonmonotone.into(), bracket_upper.into()],
            ProvocationThreshold::NeverAdopts { bracket_upper } => {
                vec![1.0.into(), f64::NAN.into(), f64::NAN.into(), false.into(), bracket_upper.into()]
            }
            ProvocationThreshold::AlwaysAdopts => {
                vec![2.0.into(), 0.0.into(), f64::NAN.into(), false.into(), f64::NAN.into()]
            }
        };
        tab.push(row);
        t.add(tab);
    }
    Ok(())
}

/// Explicit starts followed by `random_starts` uniform draws over the
/// strategy box, defender coordinate first.
pub fn dynamics_starts(sc: &Scenario) -> Vec<InvestmentState<f64>> {
    let Some(dy) = &sc.dynamics else {
        return Vec::new();
    };
    let mut starts = dy.starts.clone();
    let mut rng = Lcg::new(sc.seed);
    let (d_hi, a_hi) = (sc.model.defender_bound(), sc.model.attacker_bound());
    for _ in 0..dy.random_starts {
        let d = rng.uniform(0.0, d_hi);
        let a = rng.uniform(0.0, a_hi);
        starts.push(InvestmentState::new(d, a));
    }
    starts
}

fn dynamics(t: &mut Tables) -> Result<(), LabError> {
    let sc = t.sc;
    let p = &sc.model;
    let dy = sc.dynamics.as_ref().expect("section checked");
    let opts = DiscreteOptions {
        eta: dy.eta,
        max_steps: dy.max_steps,
        tol: dy.tol,
    };
    let copts = ContinuousOptions {
        t_end: dy.t_end,
        dt: dy.dt,
        tol: dy.tol,
    };
    let mut paths = t.table("trajectories", &["series", "step", "d", "a"]);
    let mut summary = t.table(
        "dynamics_summary",
        &[
            "series",
            "start_d",
            "start_a",
            "converged",
            "diverged",
            "steps",
            "end_d",
            "end_a",
            "residual",
            "rk4_converged",
            "rk4_end_d",
            "rk4_end_a",
        ],
    );
    for tab in [&mut paths, &mut summary] {
        tab.note("seed", sc.seed);
        tab.note("eta", dy.eta);
        tab.note("random_starts", dy.random_starts);
    }
    for (k, start) in dynamics_starts(sc).into_iter().enumerate() {
        let traj = simulate_discrete(p, p.s(), start, &opts)?;
        for i in 0..traj.len() {
            let x = traj.state(i);
            paths.push(vec![k.into(), i.into(), x.d.into(), x.a.into()]);
        }
        let cont = simulate_continuous(p, p.s(), start, &copts)?;
        let (end, cend) = (traj.last(), cont.last());
        summary.push(vec![
            k.into(),
            start.d.into(),
            start.a.into(),
            traj.converged.into(),
            traj.diverged.into(),
            (traj.len() - 1).into(),
            end.d.into(),
            end.a.into(),
            traj.sup_norm_residual.into(),
            cont.converged.into(),
            cend.d.into(),
            cend.a.into(),
        ]);
        paths.note(&format!("series.{k}"), format!("start ({}, {})", start.d, start.a));
    }
    t.add(paths);
    t.add(summary);
    Ok(())
}

fn scaling(t: &mut Tables) -> Result<(), LabError> {
    let sc = t.sc;
    let p = &sc.model;
    let surf = sc.surfaces.as_ref().expect("section checked");
    let rows = scaling_experiment(p, &surf.config, &surf.n_grid, surf.a, surf.d)?;
    let mut tab = t.table("scaling", &["n", "s_eff", "q", "lambda", "p_overall", "r0"]);
    tab.note("a", surf.a);
    tab.note("d", surf.d);
    tab.note("rho", surf.config.rho());
    tab.note("gamma", surf.config.gamma());
    for r in rows {
        tab.push(vec![r.n.into(), r.s_eff.into(), r.q.into(), r.lambda.into(), r.p_overall.into(), r.r0.into()]);
    }
    t.add(tab);

    let mut tab = t.table(
        "critical_count",
        &[
            "has_threshold",
            "n_star",
            "n_integer",
            "dn_dgamma",
            "degenerate",
            "multiple_roots_possible",
            "r0_multi",
            "dr0_dgamma_at_zero",
        ],
    );
    let r0 = r0_multi(p, &surf.config)?;
    let dg = dgamma_sensitivity_at_zero(p, &surf.config)?;
    let row = match critical_surface_count(p, &surf.config)? {
        CriticalSurfaceCount::Threshold(th) => vec![
            true.into(),
            th.n_star.into(),
            (th.n_integer as f64).into(),
            opt(th.dn_dgamma),
            th.degenerate.into(),
            th.multiple_roots_possible.into(),
            r0.into(),
            dg.into(),
        ],
        CriticalSurfaceCount::NoThreshold => vec![
            false.into(),
            f64::NAN.into(),
            f64::NAN.into(),
            f64::NAN.into(),
            false.into(),
            false.into(),
            r0.into(),
            dg.into(),
        ],
    };
    tab.push(row);
    t.add(tab);
    Ok(())
}

const SENSITIVITY_PARAMETERS: [(SensitivityParameter, &str); 5] = [
    (SensitivityParameter::S, "s"),
    (SensitivityParameter::HcAlpha, "h_complex.alpha"),
    (SensitivityParameter::B, "B"),
    (SensitivityParameter::CA, "c_a"),
    (SensitivityParameter::DFixed, "d_fixed"),
];

fn deterrence(t: &mut Tables) -> Result<(), LabError> {
    let sc = t.sc;
    let det = sc.deterrence.as_ref().expect("section checked");
    let scen = &det.scenario;
    let mut grid = t.table(
        "deterrence_grid",
        &["gamma_d", "delta_pi", "realized_gamma", "a_complex", "a_simple", "p_complex", "p_simple"],
    );
    let n = det.grid_points;
    for i in 0..n {
        let g = i as f64 / (n - 1) as f64;
        let r = delta_pi_report(scen, g)?;
        grid.push(vec![
            g.into(),
            r.delta_pi.into(),
            r.realized_gamma.into(),
            r.a_complex.into(),
            r.a_simple.into(),
            r.p_complex.into(),
            r.p_simple.into(),
        ]);
    }
    t.add(grid);

    let mut th = t.table(
        "deterrence_threshold",
        &[
            "has_threshold",
            "gamma_star",
            "residual",
            "monotonicity_violated",
            "failure",
            "delta_pi_at_zero",
            "delta_pi_at_gamma_a",
        ],
    );
    th.note("failure_codes", "0 none, 1 complex never profitable, 2 complex always profitable");
    let threshold = deterrence_threshold(scen)?;
    let at = |g: f64| delta_pi_report(scen, g).map(|r| r.delta_pi);
    let row = match threshold {
        DeterrenceThreshold::Threshold {
            gamma_star,
            residual,
            monotonicity_violated,
        } => vec![
            true.into(),
            gamma_star.into(),
            residual.into(),
            monotonicity_violated.into(),
            0.0.into(),
            at(0.0)?.into(),
            at(scen.gamma_a())?.into(),
        ],
        DeterrenceThreshold::ConditionsFail {
            reason,
            delta_pi_at_zero,
            delta_pi_at_gamma_a,
        } => vec![
            false.into(),
            f64::NAN.into(),
            f64::NAN.into(),
            false.into(),
            match reason {
                ConditionFailure::ComplexNeverProfitable => 1.0,
                ConditionFailure::ComplexAlwaysProfitable => 2.0,
            }
            .into(),
            delta_pi_at_zero.into(),
            delta_pi_at_gamma_a.into(),
        ],
    };
    th.push(row);
    t.add(th);

    let mut sens = t.table(
        "deterrence_sensitivity",
        &["parameter", "available", "resolved", "implicit", "d_delta_pi_dx", "d_delta_pi_dgamma"],
    );
    sens.note(
        "parameter_codes",
        SENSITIVITY_PARAMETERS
            .iter()
            .enumerate()
            .map(|(i, (_, n))| format!("{i} {n}"))
            .collect::<Vec<_>>()
            .join(", "),
    );
    sens.note("step", det.sensitivity_step);
    if threshold.gamma_star().is_some() {
        for (i, (param, name)) in SENSITIVITY_PARAMETERS.iter().enumerate() {
            match threshold_sensitivity(scen, *param, det.sensitivity_step) {
                Ok(s) => sens.push(vec![
                    i.into(),
                    true.into(),
                    s.resolved.into(),
                    s.implicit.into(),
                    s.d_delta_pi_dx.into(),
                    s.d_delta_pi_dgamma.into(),
                ]),
                Err(e) => {
                    sens.push(vec![
                        i.into(),
                        false.into(),
                        f64::NAN.into(),
                        f64::NAN.into(),
                        f64::NAN.into(),
                        f64::NAN.into(),
                    ]);
                    sens.note(&format!("unavailable.{name}"), e);
                }
            }
        }
    }
    t.add(sens);
    Ok(())
}

fn targeting(t: &mut Tables) -> Result<(), LabError> {
    let sc = t.sc;
    let tg = sc.targeting.as_ref().expect("section checked");
    let sel = select_target(&sc.model, tg.rho, &tg.profiles, tg.mode)?;
    let mut tab = t.table(
        "targeting",
        &["defender", "a_k", "q_k", "expected_value", "net_payoff", "selected"],
    );
    tab.note(
        "mode",
        match tg.mode {
            TargetingMode::FixedA(a) => format!("fixed_a {a}"),
            TargetingMode::BestResponsePerTarget => "best_response".to_string(),
        },
    );
    for (k, r) in sel.rows.iter().enumerate() {
        tab.push(vec![
            k.into(),
            r.a_k.into(),
            r.q_k.into(),
            r.expected_value.into(),
            r.net_payoff.into(),
            (k == sel.index).into(),
        ]);
    }
    t.add(tab);
    Ok(())
}

/// Runs one subcommand on a validated scenario.
pub fn run_subcommand(sub: Subcommand, sc: &Scenario) -> Result<Vec<ResultTable>, LabError> {
    check_sections(sc, sub)?;
    let mut t = Tables::new(sc, sub);
    match sub {
        Subcommand::Ratio => ratio(&mut t)?,
        Subcommand::Equilibrium => equilibrium(&mut t)?,
        Subcommand::Dynamics => dynamics(&mut t)?,
        Subcommand::Scaling => scaling(&mut t)?,
        Subcommand::Deterrence => deterrence(&mut t)?,
        Subcommand::Targeting => targeting(&mut t)?,
        Subcommand::Figures => figures::build(&mut t)?,
    }
    Ok(t.out)
}
