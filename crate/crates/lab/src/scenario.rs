//! Scenario documents: flat `section.key = value` lines.
//!
//! Blank lines and text after `#` are ignored. Lists are comma separated;
//! dynamics starts are written `d:a` pairs, e.g. `dynamics.starts = 0:1, 2.5:0.5`.
//! Targeting profiles are indexed from zero: `targeting.0.B = 10`.

use std::collections::{BTreeMap, BTreeSet};

use arms_race_core::strategic::DefenderMode;
use arms_race_core::{
    AmplificationSpec, AmplificationSpecF64, DefenderProfileF64, DeterrenceScenarioF64, ErosionSpec,
    ErosionSpecF64, InvestmentState, ModelError, ModelParams, ModelParamsF64, SurfaceConfigF64,
    TargetingMode,
};
use sha2::{Digest, Sha256};

use crate::error::ScenarioError;

const STATIC_KEYS: &[&str] = &[
    "seed",
    "model.q0",
    "model.s",
    "model.V",
    "model.B",
    "model.c_d",
    "model.c_a",
    "model.F",
    "model.h.family",
    "model.h.alpha",
    "model.h.saturation",
    "model.delta.family",
    "model.delta.delta0",
    "model.delta.beta",
    "model.delta.k",
    "ratio.a",
    "ratio.d",
    "surfaces.N",
    "surfaces.rho",
    "surfaces.gamma",
    "surfaces.n_grid",
    "surfaces.a",
    "surfaces.d",
    "dynamics.eta",
    "dynamics.max_steps",
    "dynamics.tol",
    "dynamics.starts",
    "dynamics.random_starts",
    "dynamics.t_end",
    "dynamics.dt",
    "deterrence.d_fixed",
    "deterrence.h_simple.family",
    "deterrence.h_simple.alpha",
    "deterrence.h_simple.saturation",
    "deterrence.h_complex.family",
    "deterrence.h_complex.alpha",
    "deterrence.h_complex.saturation",
    "deterrence.N_a",
    "deterrence.gamma_a",
    "deterrence.rho",
    "deterrence.defender_mode",
    "deterrence.simple_attack_diluted",
    "deterrence.grid_points",
    "deterrence.sensitivity_step",
    "targeting.mode",
    "targeting.a",
    "targeting.rho",
    "figures.beta_low",
    "figures.beta_mid",
    "figures.beta_high",
    "figures.n_max",
    "figures.points",
    "figures.a",
    "figures.d",
    "figures.paths",
    "figures.eta",
];

const PROFILE_FIELDS: &[&str] = &["d", "s", "gamma", "N", "B", "V"];

/// Top-level sections a scenario may carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Section {
    Model,
    Ratio,
    Surfaces,
    Dynamics,
    Deterrence,
    Targeting,
    Figures,
}

impl Section {
    pub fn name(self) -> &'static str {
        match self {
            Section::Model => "model",
            Section::Ratio => "ratio",
            Section::Surfaces => "surfaces",
            Section::Dynamics => "dynamics",
            Section::Deterrence => "deterrence",
            Section::Targeting => "targeting",
            Section::Figures => "figures",
        }
    }

    fn of_key(key: &str) -> Option<Self> {
        let head = key.split('.').next()?;
        [
            Section::Model,
            Section::Ratio,
            Section::Surfaces,
            Section::Dynamics,
            Section::Deterrence,
            Section::Targeting,
            Section::Figures,
        ]
        .into_iter()
        .find(|s| s.name() == head)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSettings {
    pub config: SurfaceConfigF64,
    pub n_grid: Vec<f64>,
    pub a: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsSettings {
    pub eta: f64,
    pub max_steps: usize,
    pub tol: f64,
    pub starts: Vec<InvestmentState<f64>>,
    pub random_starts: usize,
    pub t_end: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeterrenceSettings {
    pub scenario: DeterrenceScenarioF64,
    pub grid_points: usize,
    pub sensitivity_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetingSettings {
    pub profiles: Vec<DefenderProfileF64>,
    pub mode: TargetingMode<f64>,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureSettings {
    /// Erosion steepness for the shallow, intermediate and steep panels.
    pub betas: [f64; 3],
    pub n_max: f64,
    pub points: usize,
    pub a: f64,
    pub d: f64,
    pub paths: usize,
    pub eta: f64,
}

impl Default for FigureSettings {
    fn default() -> Self {
        Self {
            betas: [0.2, 1.5, 8.0],
            n_max: 1000.0,
            points: 61,
            a: 1.0,
            d: 1.0,
            paths: 4,
            eta: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub model: ModelParamsF64,
    /// Point `(a, d)` at which the general ratio is reported.
    pub ratio_point: (f64, f64),
    pub surfaces: Option<SurfaceSettings>,
    pub dynamics: Option<DynamicsSettings>,
    pub deterrence: Option<DeterrenceSettings>,
    pub targeting: Option<TargetingSettings>,
    pub figures: FigureSettings,
    pub seed: u64,
    /// Hex SHA-256 of the document text.
    pub source_hash: String,
    pub sections: BTreeSet<Section>,
}

impl Scenario {
    pub fn has(&self, section: Section) -> bool {
        self.sections.contains(&section)
    }
}

/// Hex SHA-256 of a scenario document.
pub fn scenario_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

fn is_known(key: &str) -> bool {
    if STATIC_KEYS.contains(&key) {
        return true;
    }
    let parts: Vec<&str> = key.split('.').collect();
    parts.len() == 3
        && parts[0] == "targeting"
        && parts[1].parse::<usize>().is_ok()
        && PROFILE_FIELDS.contains(&parts[2])
}

fn nearest_key(key: &str) -> Option<String> {
    let mut candidates: Vec<String> = STATIC_KEYS.iter().map(|s| s.to_string()).collect();
    let parts: Vec<&str> = key.split('.').collect();
    let index = parts
        .get(1)
        .filter(|p| p.parse::<usize>().is_ok())
        .copied()
        .unwrap_or("0");
    candidates.extend(PROFILE_FIELDS.iter().map(|f| format!("targeting.{index}.{f}")));
    candidates
        .into_iter()
        .min_by_key(|c| strsim::levenshtein(key, c))
}

struct Doc {
    entries: BTreeMap<String, Entry>,
}

impl Doc {
    fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ScenarioError::Syntax {
                    line,
                    text: content.to_string(),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(ScenarioError::Syntax {
                    line,
                    text: content.to_string(),
                });
            }
            if !is_known(key) {
                return Err(ScenarioError::UnknownKey {
                    key: key.to_string(),
                    line,
                    suggestion: nearest_key(key),
                });
            }
            if let Some(prev) = entries.get(key) {
                return Err(ScenarioError::DuplicateKey {
                    key: key.to_string(),
                    first: prev.line,
                    second: line,
                });
            }
            entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(Self { entries })
    }

    fn sections(&self) -> BTreeSet<Section> {
        self.entries.keys().filter_map(|k| Section::of_key(k)).collect()
    }

    fn bad(&self, key: &str, expected: &'static str) -> ScenarioError {
        let e = &self.entries[key];
        ScenarioError::BadValue {
            key: key.to_string(),
            line: e.line,
            value: e.value.clone(),
            expected,
        }
    }

    fn num(&self, key: &str, default: f64) -> Result<f64, ScenarioError> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(e) => e
                .value
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| self.bad(key, "a finite number")),
        }
    }

    fn count(&self, key: &str, default: u64) -> Result<u64, ScenarioError> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(e) => e
                .value
                .parse::<u64>()
                .map_err(|_| self.bad(key, "a nonnegative integer")),
        }
    }

    fn flag(&self, key: &str, default: bool) -> Result<bool, ScenarioError> {
        match self.entries.get(key).map(|e| e.value.as_str()) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(_) => Err(self.bad(key, "`true` or `false`")),
        }
    }

    fn word<'a>(
        &self,
        key: &str,
        choices: &'a [&'a str],
        expected: &'static str,
    ) -> Result<Option<&'a str>, ScenarioError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => choices
                .iter()
                .find(|c| **c == e.value)
                .copied()
                .map(Some)
                .ok_or_else(|| self.bad(key, expected)),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, ScenarioError> {
        let Some(e) = self.entries.get(key) else {
            return Ok(None);
        };
        e.value
            .split(',')
            .map(|t| t.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .map(Some)
            .ok_or_else(|| self.bad(key, "a comma-separated list of numbers"))
    }

    fn starts(&self, key: &str) -> Result<Vec<InvestmentState<f64>>, ScenarioError> {
        let Some(e) = self.entries.get(key) else {
            return Ok(Vec::new());
        };
        let pair = |t: &str| -> Option<InvestmentState<f64>> {
            let (d, a) = t.trim().split_once(':')?;
            let d = d.trim().parse::<f64>().ok()?;
            let a = a.trim().parse::<f64>().ok()?;
            (d >= 0.0 && a >= 0.0 && d.is_finite() && a.is_finite()).then(|| InvestmentState::new(d, a))
        };
        e.value
            .split(',')
            .map(pair)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| self.bad(key, "a comma-separated list of nonnegative `d:a` pairs"))
    }

    fn profile_indices(&self) -> BTreeSet<usize> {
        self.entries
            .keys()
            .filter_map(|k| {
                let mut parts = k.split('.');
                (parts.next() == Some("targeting"))
                    .then(|| parts.next()?.parse::<usize>().ok())
                    .flatten()
            })
            .collect()
    }
}

fn range(key: &str, value: f64, range: &str) -> ScenarioError {
    ScenarioError::Range {
        key: key.to_string(),
        value,
        range: range.to_string(),
    }
}

/// Converts a model validation error into a range error on the scenario key
/// that supplied the value. `prefix` replaces the generic `h.` / `delta.` head.
fn rekey(err: ModelError, prefix: &str) -> ScenarioError {
    match err {
        ModelError::InvalidParameter { name, value, range: r } => {
            let tail = name.split_once('.').map(|(_, t)| t).unwrap_or(name);
            let key = if name.starts_with("h.") || name.starts_with("delta.") {
                format!("{prefix}{tail}")
            } else {
                name.to_string()
            };
            range(&key, value, r)
        }
        ModelError::Domain {
            name,
            value,
            requirement,
        } => range(&format!("{prefix}{name}"), value, requirement),
        other => ScenarioError::Invalid(other.to_string()),
    }
}

fn amplification(doc: &Doc, prefix: &str, default_alpha: f64) -> Result<AmplificationSpecF64, ScenarioError> {
    let family = doc.word(
        &format!("{prefix}family"),
        &["logarithmic", "saturating"],
        "`logarithmic` or `saturating`",
    )?;
    let alpha = doc.num(&format!("{prefix}alpha"), default_alpha)?;
    match family.unwrap_or("logarithmic") {
        "saturating" => {
            let saturation = doc.num(&format!("{prefix}saturation"), 1.0)?;
            AmplificationSpec::saturating(alpha, saturation)
        }
        _ => AmplificationSpec::logarithmic(alpha),
    }
    .map_err(|e| rekey(e, prefix))
}

fn erosion(doc: &Doc) -> Result<ErosionSpecF64, ScenarioError> {
    let prefix = "model.delta.";
    let family = doc.word(
        "model.delta.family",
        &["hyperbolic", "power_law", "power_law_steep", "exponential"],
        "`hyperbolic`, `power_law`, `power_law_steep` or `exponential`",
    )?;
    let delta0 = doc.num("model.delta.delta0", 1.0)?;
    let beta = doc.num("model.delta.beta", 1.0)?;
    let k = doc.num("model.delta.k", 1.0)?;
    match family.unwrap_or("hyperbolic") {
        "power_law" => ErosionSpec::power_law(delta0, beta, k),
        "power_law_steep" => ErosionSpec::power_law_steep(delta0, beta, k),
        "exponential" => ErosionSpec::exponential(delta0, beta),
        _ => ErosionSpec::hyperbolic(delta0, beta),
    }
    .map_err(|e| rekey(e, prefix))
}

fn model(doc: &Doc) -> Result<ModelParamsF64, ScenarioError> {
    let b = ModelParams::builder();
    b.q0(doc.num("model.q0", b.q0)?)
        .s(doc.num("model.s", b.s)?)
        .v(doc.num("model.V", b.v)?)
        .b(doc.num("model.B", b.b)?)
        .c_d(doc.num("model.c_d", b.c_d)?)
        .c_a(doc.num("model.c_a", b.c_a)?)
        .f(doc.num("model.F", b.f)?)
        .h(amplification(doc, "model.h.", 0.5)?)
        .delta(erosion(doc)?)
        .build()
        .map_err(|e| rekey(e, "model."))
}

fn default_n_grid() -> Vec<f64> {
    (0..=6)
        .flat_map(|e| [1.0, 2.0, 5.0].map(|m| m * 10f64.powi(e)))
        .filter(|&n| n <= 1e6)
        .collect()
}

fn surfaces(doc: &Doc, m: &ModelParamsF64) -> Result<SurfaceSettings, ScenarioError> {
    let config = SurfaceConfigF64::new(
        doc.num("surfaces.N", 1.0)?,
        doc.num("surfaces.rho", 1.0)?,
        doc.num("surfaces.gamma", 0.0)?,
        m.s(),
    )
    .map_err(|e| rekey(e, "surfaces."))?;
    let n_grid = doc.list("surfaces.n_grid")?.unwrap_or_else(default_n_grid);
    if n_grid.windows(2).any(|w| !(w[0] < w[1])) || n_grid.iter().any(|&n| n < 1.0) {
        return Err(range(
            "surfaces.n_grid",
            n_grid.iter().cloned().fold(f64::NAN, f64::min),
            "strictly ascending values in [1, inf)",
        ));
    }
    let a = doc.num("surfaces.a", 1.0)?;
    let d = doc.num("surfaces.d", 1.0)?;
    for (key, x) in [("surfaces.a", a), ("surfaces.d", d)] {
        if x < 0.0 {
            return Err(range(key, x, "[0, inf)"));
        }
    }
    Ok(SurfaceSettings { config, n_grid, a, d })
}

fn dynamics(doc: &Doc) -> Result<DynamicsSettings, ScenarioError> {
    let eta = doc.num("dynamics.eta", 0.15)?;
    if !(eta > 0.0 && eta < 2.0) {
        return Err(range("dynamics.eta", eta, "(0, 2)"));
    }
    let tol = doc.num("dynamics.tol", 1e-8)?;
    if !(tol > 0.0) {
        return Err(range("dynamics.tol", tol, "(0, inf)"));
    }
    let t_end = doc.num("dynamics.t_end", 200.0)?;
    if !(t_end > 0.0) {
        return Err(range("dynamics.t_end", t_end, "(0, inf)"));
    }
    let dt = doc.num("dynamics.dt", 0.05)?;
    if !(dt > 0.0 && dt <= t_end) {
        return Err(range("dynamics.dt", dt, "(0, dynamics.t_end]"));
    }
    let starts = doc.starts("dynamics.starts")?;
    let random_starts = doc.count("dynamics.random_starts", if starts.is_empty() { 4 } else { 0 })? as usize;
    Ok(DynamicsSettings {
        eta,
        max_steps: doc.count("dynamics.max_steps", 50_000)? as usize,
        tol,
        starts,
        random_starts,
        t_end,
        dt,
    })
}

fn deterrence(doc: &Doc, m: &ModelParamsF64) -> Result<DeterrenceSettings, ScenarioError> {
    let n_a = doc.count("deterrence.N_a", 2)?;
    let n_a = u32::try_from(n_a).map_err(|_| range("deterrence.N_a", n_a as f64, "{2, 3, ...}"))?;
    let mode = match doc.word(
        "deterrence.defender_mode",
        &["fixed", "best_response"],
        "`fixed` or `best_response`",
    )? {
        Some("best_response") => DefenderMode::BestResponse,
        _ => DefenderMode::Fixed,
    };
    let scenario = DeterrenceScenarioF64::new(
        *m,
        doc.num("deterrence.d_fixed", 0.0)?,
        amplification(doc, "deterrence.h_simple.", m.h().alpha())?,
        amplification(doc, "deterrence.h_complex.", 2.0 * m.h().alpha())?,
        n_a,
        doc.num("deterrence.gamma_a", 1.0)?,
        doc.num("deterrence.rho", 1.0)?,
    )
    .map_err(|e| rekey(e, "deterrence."))?
    .with_defender_mode(mode)
    .with_simple_attack_diluted(doc.flag("deterrence.simple_attack_diluted", false)?);
    let grid_points = doc.count("deterrence.grid_points", 64)? as usize;
    if grid_points < 2 {
        return Err(range("deterrence.grid_points", grid_points as f64, "{2, 3, ...}"));
    }
    let sensitivity_step = doc.num("deterrence.sensitivity_step", 1e-4)?;
    if !(sensitivity_step > 0.0) {
        return Err(range("deterrence.sensitivity_step", sensitivity_step, "(0, inf)"));
    }
    Ok(DeterrenceSettings {
        scenario,
        grid_points,
        sensitivity_step,
    })
}

fn targeting(doc: &Doc) -> Result<TargetingSettings, ScenarioError> {
    let indices = doc.profile_indices();
    if indices.is_empty() {
        return Err(ScenarioError::Invalid(
            "targeting needs at least one profile (`targeting.0.B = ...`)".into(),
        ));
    }
    let expected: BTreeSet<usize> = (0..indices.len()).collect();
    if indices != expected {
        return Err(ScenarioError::Invalid(
            "targeting profile indices must run 0, 1, 2, ... without gaps".into(),
        ));
    }
    let mut profiles = Vec::with_capacity(indices.len());
    for k in indices {
        let key = |f: &str| format!("targeting.{k}.{f}");
        let n = doc.count(&key("N"), 1)?;
        let n = u32::try_from(n).map_err(|_| range(&key("N"), n as f64, "{1, 2, ...}"))?;
        let prof = DefenderProfileF64::new(
            doc.num(&key("d"), 0.0)?,
            doc.num(&key("s"), 1.0)?,
            doc.num(&key("gamma"), 0.0)?,
            n,
            doc.num(&key("B"), 1.0)?,
            doc.num(&key("V"), 1.0)?,
        )
        .map_err(|e| match e {
            ModelError::InvalidParameter { name, value, range: r } => {
                let field = name.rsplit('.').next().unwrap_or(name);
                range(&key(field), value, r)
            }
            other => ScenarioError::Invalid(other.to_string()),
        })?;
        profiles.push(prof);
    }
    let mode = match doc.word(
        "targeting.mode",
        &["fixed_a", "best_response"],
        "`fixed_a` or `best_response`",
    )? {
        Some("best_response") => TargetingMode::BestResponsePerTarget,
        _ => {
            let a = doc.num("targeting.a", 0.0)?;
            if a < 0.0 {
                return Err(range("targeting.a", a, "[0, inf)"));
            }
            TargetingMode::FixedA(a)
        }
    };
    let rho = doc.num("targeting.rho", 1.0)?;
    if !(0.0..=1.0).contains(&rho) {
        return Err(range("targeting.rho", rho, "[0, 1]"));
    }
    Ok(TargetingSettings { profiles, mode, rho })
}

fn figures(doc: &Doc) -> Result<FigureSettings, ScenarioError> {
    let def = FigureSettings::default();
    let betas = [
        doc.num("figures.beta_low", def.betas[0])?,
        doc.num("figures.beta_mid", def.betas[1])?,
        doc.num("figures.beta_high", def.betas[2])?,
    ];
    for (key, b) in ["figures.beta_low", "figures.beta_mid", "figures.beta_high"]
        .into_iter()
        .zip(betas)
    {
        if !(b > 0.0) {
            return Err(range(key, b, "(0, inf)"));
        }
    }
    let n_max = doc.num("figures.n_max", def.n_max)?;
    if !(n_max >= 2.0) {
        return Err(range("figures.n_max", n_max, "[2, inf)"));
    }
    let points = doc.count("figures.points", def.points as u64)? as usize;
    if points < 3 {
        return Err(range("figures.points", points as f64, "{3, 4, ...}"));
    }
    let eta = doc.num("figures.eta", def.eta)?;
    if !(eta > 0.0 && eta < 2.0) {
        return Err(range("figures.eta", eta, "(0, 2)"));
    }
    let a = doc.num("figures.a", def.a)?;
    let d = doc.num("figures.d", def.d)?;
    for (key, x) in [("figures.a", a), ("figures.d", d)] {
        if x < 0.0 {
            return Err(range(key, x, "[0, inf)"));
        }
    }
    Ok(FigureSettings {
        betas,
        n_max,
        points,
        a,
        d,
        paths: doc.count("figures.paths", def.paths as u64)? as usize,
        eta,
    })
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc = Doc::parse(text)?;
    let sections = doc.sections();
    let model = model(&doc)?;
    let ratio_point = (doc.num("ratio.a", 0.0)?, doc.num("ratio.d", 0.0)?);
    for (key, x) in [("ratio.a", ratio_point.0), ("ratio.d", ratio_point.1)] {
        if x < 0.0 {
            return Err(range(key, x, "[0, inf)"));
        }
    }
    Ok(Scenario {
        ratio_point,
        surfaces: sections
            .contains(&Section::Surfaces)
            .then(|| surfaces(&doc, &model))
            .transpose()?,
        dynamics: sections
            .contains(&Section::Dynamics)
            .then(|| dynamics(&doc))
            .transpose()?,
        deterrence: sections
            .contains(&Section::Deterrence)
            .then(|| deterrence(&doc, &model))
            .transpose()?,
        targeting: sections
            .contains(&Section::Targeting)
            .then(|| targeting(&doc))
            .transpose()?,
        figures: figures(&doc)?,
        seed: doc.count("seed", 0)?,
        source_hash: scenario_hash(text),
        sections,
        model,
    })
}
