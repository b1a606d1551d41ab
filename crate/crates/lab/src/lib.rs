//! Scenario files, experiment runner and CSV/SVG output for the contest model.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod figures;
pub mod rng;
pub mod run;
pub mod scenario;
pub mod svg;
pub mod table;

use std::path::{Path, PathBuf};

pub use error::{LabError, ScenarioError};
pub use figures::{validate, FigureCheck};
pub use run::{check_sections, run_subcommand, Subcommand};
pub use scenario::{parse_scenario, scenario_hash, Scenario, Section};
pub use table::{emit_csv, parse_csv, Cell, ResultTable};

/// Which artifacts to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Svg,
    Both,
}

impl OutputFormat {
    fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    fn svg(self) -> bool {
        matches!(self, OutputFormat::Svg | OutputFormat::Both)
    }
}

/// Result of a complete invocation.
#[derive(Debug)]
pub struct Invocation {
    pub tables: Vec<ResultTable>,
    pub written: Vec<PathBuf>,
    pub checks: Vec<FigureCheck>,
}

/// Parses the scenario text, runs the subcommand, writes the artifacts into
/// `out_dir` and, for `figures`, validates the emitted series. A seed given
/// here overrides the scenario's.
pub fn execute(
    sub: Subcommand,
    scenario_text: &str,
    out_dir: &Path,
    format: OutputFormat,
    seed: Option<u64>,
) -> Result<Invocation, LabError> {
    let mut sc = parse_scenario(scenario_text)?;
    if let Some(seed) = seed {
        sc.seed = seed;
    }
    check_sections(&sc, sub)?;
    let mut tables = run_subcommand(sub, &sc)?;
    let checks = if sub == Subcommand::Figures {
        let checks = validate(&tables);
        let mut t = ResultTable::new(
            "figure_checks",
            &["check", "passed", "metric"],
            tables[0].metadata.clone(),
        );
        t.metadata.extra.clear();
        for (i, c) in checks.iter().enumerate() {
            t.note(&format!("check.{i}"), &c.name);
            t.push(vec![i.into(), c.passed.into(), c.metric.into()]);
        }
        tables.push(t);
        checks
    } else {
        Vec::new()
    };
    std::fs::create_dir_all(out_dir).map_err(|source| LabError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for t in &tables {
        if format.csv() {
            let path = out_dir.join(format!("{}.csv", t.name));
            emit_csv(t, &path)?;
            written.push(path);
        }
        if format.svg() {
            if let Some(kind) = svg::default_chart(t) {
                let path = out_dir.join(format!("{}.svg", t.name));
                svg::emit_svg(t, kind, &path)?;
                written.push(path);
            }
        }
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if !failed.is_empty() {
        return Err(LabError::FigureChecks(failed.join("; ")));
    }
    Ok(Invocation { tables, written, checks })
}
