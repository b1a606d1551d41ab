//! Data series for the three figures and the shape checks run after emission.

use arms_race_core::{
    best_response_curves, multi_surface_state, r0_multi, simulate_discrete, solve_equilibrium, DiscreteOptions,
    InvestmentState, ModelParamsF64, SurfaceConfigF64,
};

use crate::error::LabError;
use crate::rng::Lcg;
use crate::run::Tables;
use crate::table::{Cell, ResultTable};

pub const PANELS: [&str; 3] = ["low", "mid", "high"];
pub const FIG2A_GAMMAS: [f64; 4] = [0.0, 0.2, 0.5, 1.0];
pub const FIG2B_GAMMAS: [f64; 2] = [0.0, 1.0];
pub const FIG3_COUNTS: [f64; 4] = [1.0, 3.0, 10.0, 30.0];
const FIG3_POINTS: usize = 101;
const CURVE_POINTS: usize = 201;
const IMAGE_SCAN: usize = 400;
const WINDOW_MARGIN: f64 = 1.25;
const PATH_STEPS: usize = 20_000;
const PATH_TOL: f64 = 1e-10;

/// Integer surface counts spaced geometrically over `[1, n_max]`.
pub fn surface_grid(n_max: f64, points: usize) -> Vec<f64> {
    let mut out: Vec<f64> = (0..points)
        .map(|i| n_max.powf(i as f64 / (points - 1) as f64).round())
        .collect();
    out.dedup();
    out
}

fn linspace(hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect()
}

fn with_beta(p: &ModelParamsF64, beta: f64) -> Result<ModelParamsF64, LabError> {
    Ok(p.to_builder().delta(p.delta().with_beta(beta)?).build()?)
}

/// Phase-plane window: the best-response image over the full strategy box,
/// enlarged by a fixed margin.
fn window(p: &ModelParamsF64) -> Result<(f64, f64), LabError> {
    let (d_hi, a_hi) = (p.defender_bound(), p.attacker_bound());
    let (dc, ac) = best_response_curves(p, p.s(), &linspace(d_hi, IMAGE_SCAN), &linspace(a_hi, IMAGE_SCAN))?;
    let fit = |resp: &[f64], fallback: f64| {
        let m = resp.iter().cloned().fold(0.0, f64::max);
        if m > 0.0 {
            WINDOW_MARGIN * m
        } else if fallback > 0.0 {
            fallback
        } else {
            1.0
        }
    };
    Ok((fit(&dc.responses, d_hi), fit(&ac.responses, a_hi)))
}

fn fig1_panel(t: &Tables, sc_seed: u64, panel: usize, p: &ModelParamsF64, beta: f64, eta: f64, paths: usize) -> Result<ResultTable, LabError> {
    let (win_d, win_a) = window(p)?;
    let s = p.s();
    let (dc, ac) = best_response_curves(p, s, &linspace(win_d, CURVE_POINTS), &linspace(win_a, CURVE_POINTS))?;
    let mut tab = t.table(&format!("fig1_{}", PANELS[panel]), &["series", "index", "d", "a", "clamped"]);
    tab.note("beta", beta);
    tab.note("eta", eta);
    tab.note("window_d", win_d);
    tab.note("window_a", win_a);
    tab.note("series.0", "defender best response");
    tab.note("series.1", "attacker best response");
    for i in 0..CURVE_POINTS {
        tab.push(vec![0usize.into(), i.into(), dc.responses[i].into(), dc.grid[i].into(), dc.clamped[i].into()]);
    }
    for i in 0..CURVE_POINTS {
        tab.push(vec![1usize.into(), i.into(), ac.grid[i].into(), ac.responses[i].into(), ac.clamped[i].into()]);
    }
    match solve_equilibrium(p, s) {
        Ok(eq) => {
            tab.note("equilibrium_d", eq.d_star);
            tab.note("equilibrium_a", eq.a_star);
            tab.note("equilibrium_interior", eq.interior());
        }
        Err(e) => tab.note("equilibrium", e),
    }
    let corners = [
        InvestmentState::new(0.0, 0.0),
        InvestmentState::new(win_d, 0.0),
        InvestmentState::new(0.0, win_a),
        InvestmentState::new(win_d, win_a),
    ];
    let mut rng = Lcg::new(sc_seed.wrapping_add(panel as u64));
    let opts = DiscreteOptions {
        eta,
        max_steps: PATH_STEPS,
        tol: PATH_TOL,
    };
    for k in 0..paths {
        let start = match corners.get(k) {
            Some(c) => *c,
            None => {
                let d = rng.uniform(0.0, win_d);
                InvestmentState::new(d, rng.uniform(0.0, win_a))
            }
        };
        let traj = simulate_discrete(p, s, start, &opts)?;
        let series = 2 + k;
        tab.note(&format!("series.{series}"), format!("path from ({}, {})", start.d, start.a));
        for i in 0..traj.len() {
            let x = traj.state(i);
            tab.push(vec![series.into(), i.into(), x.d.into(), x.a.into(), false.into()]);
        }
    }
    Ok(tab)
}

fn gamma_label(g: f64) -> String {
    format!("{g}")
}

pub(crate) fn build(t: &mut Tables) -> Result<(), LabError> {
    let sc = t.sc();
    let fig = &sc.figures;
    let p = &sc.model;
    for (i, beta) in fig.betas.iter().enumerate() {
        let pb = with_beta(p, *beta)?;
        let tab = fig1_panel(t, sc.seed, i, &pb, *beta, fig.eta, fig.paths)?;
        t.add(tab);
    }

    let grid = surface_grid(fig.n_max, fig.points);
    let cols: Vec<String> = std::iter::once("n".to_string())
        .chain(FIG2A_GAMMAS.iter().map(|g| format!("r0_gamma_{}", gamma_label(*g))))
        .collect();
    let mut fig2a = t.table("fig2a", &cols.iter().map(String::as_str).collect::<Vec<_>>());
    fig2a.note("rho", 1.0);
    let cfgs = FIG2A_GAMMAS
        .iter()
        .map(|&g| SurfaceConfigF64::new(1.0, 1.0, g, p.s()))
        .collect::<Result<Vec<_>, _>>()?;
    for &n in &grid {
        let mut row: Vec<Cell> = vec![n.into()];
        for cfg in &cfgs {
            row.push(r0_multi(p, &cfg.with_n(n)?)?.into());
        }
        fig2a.push(row);
    }
    t.add(fig2a);

    let cols: Vec<String> = std::iter::once("n".to_string())
        .chain(FIG2B_GAMMAS.iter().map(|g| format!("lambda_gamma_{}", gamma_label(*g))))
        .collect();
    let mut fig2b = t.table("fig2b", &cols.iter().map(String::as_str).collect::<Vec<_>>());
    fig2b.note("rho", 1.0);
    fig2b.note("a", fig.a);
    fig2b.note("d", fig.d);
    for &n in &grid {
        let mut row: Vec<Cell> = vec![n.into()];
        for &g in &FIG2B_GAMMAS {
            let cfg = SurfaceConfigF64::new(n, 1.0, g, p.s())?;
            row.push(multi_surface_state(p, &cfg, fig.a, fig.d)?.lambda.into());
        }
        fig2b.push(row);
    }
    t.add(fig2b);

    let cols: Vec<String> = std::iter::once("gamma".to_string())
        .chain(FIG3_COUNTS.iter().map(|n| format!("r0_n_{n}")))
        .collect();
    let mut fig3 = t.table("fig3", &cols.iter().map(String::as_str).collect::<Vec<_>>());
    fig3.note("rho", 1.0);
    for g in linspace(1.0, FIG3_POINTS) {
        let mut row: Vec<Cell> = vec![g.into()];
        for &n in &FIG3_COUNTS {
            row.push(r0_multi(p, &SurfaceConfigF64::new(n, 1.0, g, p.s())?)?.into());
        }
        fig3.push(row);
    }
    t.add(fig3);
    Ok(())
}

/// Outcome of one post-emission shape check.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureCheck {
    pub name: String,
    pub passed: bool,
    /// Measured quantity the check was decided on.
    pub metric: f64,
}

const FLAT_ULPS: f64 = 4.0;
const LINEAR_R2: f64 = 1.0 - 1e-12;
const MONOTONE_SLACK: f64 = 1e-12;
const TURN_TOL: f64 = 1e-9;

/// Largest relative deviation from the first value.
pub fn flatness(xs: &[f64]) -> f64 {
    let x0 = xs.first().copied().unwrap_or(0.0);
    xs.iter()
        .map(|x| (x - x0).abs() / x0.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Coefficient of determination of the least-squares line through `(x, y)`.
pub fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    let slope = sxy / sxx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    1.0 - sse / syy
}

/// Largest step against the given direction, relative to the series scale.
pub fn worst_reversal(xs: &[f64], increasing: bool) -> f64 {
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    xs.windows(2)
        .map(|w| if increasing { w[0] - w[1] } else { w[1] - w[0] })
        .fold(0.0, f64::max)
        / scale
}

fn find<'a>(tables: &'a [ResultTable], name: &str) -> Option<&'a ResultTable> {
    tables.iter().find(|t| t.name == name)
}

fn series_rows(t: &ResultTable, series: f64) -> Vec<(f64, f64, bool)> {
    let (sj, dj, aj, cj) = (
        t.column_index("series").unwrap(),
        t.column_index("d").unwrap(),
        t.column_index("a").unwrap(),
        t.column_index("clamped").unwrap(),
    );
    t.rows
        .iter()
        .filter(|r| r[sj].num() == Some(series))
        .map(|r| (r[dj].num().unwrap(), r[aj].num().unwrap(), r[cj].flag().unwrap()))
        .collect()
}

/// Shape checks on the `figures` tables. A missing table fails its checks.
pub fn validate(tables: &[ResultTable]) -> Vec<FigureCheck> {
    let mut out = Vec::new();
    let mut check = |name: String, passed: bool, metric: f64| out.push(FigureCheck { name, passed, metric });

    match find(tables, "fig2a") {
        Some(t) => {
            let n = t.column("n").unwrap_or_default();
            let flat = flatness(&t.column("r0_gamma_1").unwrap_or_default());
            check("fig2a gamma=1 series is flat".into(), flat <= FLAT_ULPS * f64::EPSILON, flat);
            let r2 = r_squared(&n, &t.column("r0_gamma_0").unwrap_or_default());
            check("fig2a gamma=0 series is linear in N".into(), r2 > LINEAR_R2, r2);
            for g in [0.0, 0.2, 0.5] {
                let w = worst_reversal(&t.column(&format!("r0_gamma_{g}")).unwrap_or_default(), true);
                check(format!("fig2a gamma={g} series is nondecreasing"), w <= MONOTONE_SLACK, w);
            }
        }
        None => check("fig2a present".into(), false, f64::NAN),
    }
    match find(tables, "fig2b") {
        Some(t) => {
            for g in FIG2B_GAMMAS {
                let w = worst_reversal(&t.column(&format!("lambda_gamma_{g}")).unwrap_or_default(), true);
                check(format!("fig2b gamma={g} series is nondecreasing"), w <= MONOTONE_SLACK, w);
            }
        }
        None => check("fig2b present".into(), false, f64::NAN),
    }
    match find(tables, "fig3") {
        Some(t) => {
            let flat = flatness(&t.column("r0_n_1").unwrap_or_default());
            check("fig3 N=1 series is flat".into(), flat <= FLAT_ULPS * f64::EPSILON, flat);
            for n in &FIG3_COUNTS[1..] {
                let w = worst_reversal(&t.column(&format!("r0_n_{n}")).unwrap_or_default(), false);
                check(format!("fig3 N={n} series is nonincreasing"), w <= MONOTONE_SLACK, w);
            }
        }
        None => check("fig3 present".into(), false, f64::NAN),
    }
    for (i, panel) in PANELS.iter().enumerate() {
        let Some(t) = find(tables, &format!("fig1_{panel}")) else {
            check(format!("fig1_{panel} present"), false, f64::NAN);
            continue;
        };
        let def = series_rows(t, 0.0);
        let scale = def.iter().fold(0.0f64, |m, r| m.max(r.0)).max(f64::MIN_POSITIVE);
        let worst = def
            .windows(2)
            .filter(|w| !w[0].2 && !w[1].2)
            .map(|w| (w[0].0 - w[1].0) / scale)
            .fold(0.0, f64::max);
        check(
            format!("fig1_{panel} defender best response nondecreasing on interior branch"),
            worst <= MONOTONE_SLACK,
            worst,
        );
        if i == 1 {
            let att: Vec<f64> = series_rows(t, 1.0).iter().map(|r| r.1).collect();
            let turn = worst_reversal(&att, false).min(worst_reversal(&att, true));
            check(
                format!("fig1_{panel} attacker best response is non-monotone"),
                turn > TURN_TOL,
                turn,
            );
        }
    }
    out
}
