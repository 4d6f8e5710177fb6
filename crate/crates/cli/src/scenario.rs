//! Scenario files.
//!
//! A scenario is a TOML document with a top-level `id`, `kind` and optional
//! `description`, plus the tables its kind needs:
//!
//! | kind             | tables                                                   |
//! |------------------|----------------------------------------------------------|
//! | `chsh`           | `[settings]` (a, a_prime, b, b_prime), `[counterfactual]`? , `[annotations]`? |
//! | `counterfactual` | `[settings]` (a, a_prime), `[counterfactual]`            |
//! | `nsbox`          | `[nsbox]` with `isotropic_p` or a `[nsbox.table]` of 16 `"P(A,B\|a,b)"` keys |
//! | `classical`      | `[classical]` with `example = "coin"` or `"shapes"`      |
//! | `sweep`          | `[sweep]` (parameter, min, max, step), `[settings]` for θ sweeps |
//!
//! Any kind may carry `[mc]` with `enabled`, `samples` and `seed`. Angles are
//! in degrees. Unknown keys are rejected.

use std::fmt;
use std::path::Path;

use mucorr_core::montecarlo::{SampleConfig, ShapesMixture};
use mucorr_core::nsbox::{make_isotropic, validate_no_signalling, NsBox};
use mucorr_core::quantum_model::{Direction, SettingsQuad};
use serde::Deserialize;

use crate::error::{CliError, FieldError};

pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_SEED: u64 = 42;

/// Built-in scenarios, embedded from the shipped example files.
pub const BUILTINS: &[(&str, &str)] = &[
    ("paper-standard", include_str!("../scenarios/paper-standard.toml")),
    ("paper-55-35", include_str!("../scenarios/paper-55-35.toml")),
    ("paper-pr-box", include_str!("../scenarios/paper-pr-box.toml")),
    ("paper-coin", include_str!("../scenarios/paper-coin.toml")),
    ("paper-shapes", include_str!("../scenarios/paper-shapes.toml")),
    ("sweep-theta", include_str!("../scenarios/sweep-theta.toml")),
    ("sweep-isotropic", include_str!("../scenarios/sweep-isotropic.toml")),
];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    id: String,
    kind: String,
    #[serde(default)]
    description: String,
    settings: Option<RawSettings>,
    counterfactual: Option<RawCounterfactual>,
    annotations: Option<RawAnnotations>,
    nsbox: Option<RawNsBox>,
    classical: Option<RawClassical>,
    sweep: Option<RawSweep>,
    mc: Option<RawMc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSettings {
    a: Option<f64>,
    a_prime: Option<f64>,
    b: Option<f64>,
    b_prime: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCounterfactual {
    #[serde(default)]
    remote: Vec<f64>,
    assume_ci: Option<bool>,
    scan_step: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnnotations {
    reported_s: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNsBox {
    isotropic_p: Option<f64>,
    table: Option<NsBox>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClassical {
    example: String,
    cube_fraction: Option<f64>,
    red_given_cube: Option<f64>,
    blue_given_sphere: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    parameter: String,
    min: f64,
    max: f64,
    step: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMc {
    #[serde(default = "yes")]
    enabled: bool,
    samples: Option<usize>,
    seed: Option<u64>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterfactualParams {
    pub a: Direction,
    pub a_prime: Direction,
    /// Remote directions; the no-measurement case is always evaluated too.
    pub remote: Vec<Direction>,
    pub assume_ci: bool,
    pub scan_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoxSource {
    Isotropic(f64),
    Table(NsBox),
}

impl BoxSource {
    pub fn build(&self) -> NsBox {
        match self {
            BoxSource::Isotropic(p) => make_isotropic(*p).expect("validated parameter"),
            BoxSource::Table(b) => *b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassicalExample {
    Coin,
    Shapes(ShapesMixture),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    ThetaDegrees,
    IsotropicP,
}

impl SweepParameter {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "theta_degrees" => Some(Self::ThetaDegrees),
            "isotropic_p" => Some(Self::IsotropicP),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::ThetaDegrees => "theta_degrees",
            Self::IsotropicP => "isotropic_p",
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An inclusive, evenly spaced grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl GridRange {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self, Vec<FieldError>> {
        let mut errs = Vec::new();
        if !min.is_finite() {
            errs.push(FieldError::new("sweep.min", "must be finite"));
        }
        if !max.is_finite() {
            errs.push(FieldError::new("sweep.max", "must be finite"));
        }
        if !(step.is_finite() && step > 0.0) {
            errs.push(FieldError::new("sweep.step", "must be finite and > 0"));
        }
        if min.is_finite() && max.is_finite() && max < min {
            errs.push(FieldError::new("sweep.max", "must not be below sweep.min"));
        }
        if errs.is_empty() {
            Ok(Self { min, max, step })
        } else {
            Err(errs)
        }
    }

    /// Grid points `min + i·step` up to `max`, rounded to 12 significant
    /// digits so that decimal grids land on their decimal values.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=count)
            .map(|i| round_sig(self.min + i as f64 * self.step, 12).min(self.max))
            .collect()
    }
}

/// `x` rounded to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioKind {
    Chsh {
        quad: SettingsQuad,
        counterfactual: Option<CounterfactualParams>,
        reported_s: Option<f64>,
    },
    Counterfactual(CounterfactualParams),
    NsBox(BoxSource),
    Classical(ClassicalExample),
    Sweep {
        parameter: SweepParameter,
        range: GridRange,
        /// Local settings for θ sweeps.
        local: Option<(Direction, Direction)>,
    },
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Chsh { .. } => "chsh",
            ScenarioKind::Counterfactual(_) => "counterfactual",
            ScenarioKind::NsBox(_) => "nsbox",
            ScenarioKind::Classical(_) => "classical",
            ScenarioKind::Sweep { .. } => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub description: String,
    pub kind: ScenarioKind,
    /// Present iff Monte Carlo estimates are requested.
    pub mc: Option<SampleConfig>,
}

/// Command-line overrides for the `[mc]` table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct McOverrides {
    pub enable: bool,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| {
            CliError::Validation(vec![FieldError::new("scenario", e.to_string().trim_end())])
        })?;
        raw.validate().map_err(CliError::Validation)
    }

    pub fn builtin(id: &str) -> Option<Self> {
        BUILTINS
            .iter()
            .find(|(name, _)| *name == id)
            .map(|(_, text)| Self::parse(text).expect("built-in scenarios are valid"))
    }

    /// Resolves a built-in id first, then a file path.
    pub fn load(source: &str) -> Result<Self, CliError> {
        if let Some(s) = Self::builtin(source) {
            return Ok(s);
        }
        let path = Path::new(source);
        if !path.exists() {
            return Err(CliError::Validation(vec![FieldError::new(
                "scenario",
                format!("`{source}` is neither a built-in scenario nor an existing file"),
            )]));
        }
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies command-line overrides. Any override enables Monte Carlo.
    pub fn with_mc_overrides(mut self, o: McOverrides) -> Result<Self, CliError> {
        if !(o.enable || o.samples.is_some() || o.seed.is_some()) {
            return Ok(self);
        }
        let base = self.mc.map_or((DEFAULT_SAMPLES, DEFAULT_SEED), |c| (c.n_samples(), c.seed()));
        let n = o.samples.unwrap_or(base.0);
        let seed = o.seed.unwrap_or(base.1);
        self.mc = Some(SampleConfig::new(n, seed).map_err(|_| {
            CliError::Validation(vec![FieldError::new("--samples", "must be at least 1")])
        })?);
        Ok(self)
    }
}

fn angle(errs: &mut Vec<FieldError>, field: &str, value: Option<f64>) -> Option<Direction> {
    match value {
        None => {
            errs.push(FieldError::new(field, "is required"));
            None
        }
        Some(v) => match Direction::from_degrees(v) {
            Ok(d) => Some(d),
            Err(_) => {
                errs.push(FieldError::new(field, "must be a finite angle in degrees"));
                None
            }
        },
    }
}

fn unit(errs: &mut Vec<FieldError>, field: &str, value: f64) -> f64 {
    if !(0.0..=1.0).contains(&value) {
        errs.push(FieldError::new(field, format!("{value} is outside [0, 1]")));
    }
    value
}

impl RawScenario {
    fn validate(self) -> Result<Scenario, Vec<FieldError>> {
        let mut errs = Vec::new();
        if self.id.trim().is_empty() {
            errs.push(FieldError::new("id", "must not be empty"));
        }

        let mc = match &self.mc {
            Some(m) if m.enabled => {
                let n = m.samples.unwrap_or(DEFAULT_SAMPLES);
                match SampleConfig::new(n, m.seed.unwrap_or(DEFAULT_SEED)) {
                    Ok(c) => Some(c),
                    Err(_) => {
                        errs.push(FieldError::new("mc.samples", "must be at least 1"));
                        None
                    }
                }
            }
            _ => None,
        };

        let kind = match self.kind.as_str() {
            "chsh" => self.chsh(&mut errs),
            "counterfactual" => self.counterfactual_kind(&mut errs),
            "nsbox" => self.nsbox_kind(&mut errs),
            "classical" => self.classical_kind(&mut errs),
            "sweep" => self.sweep_kind(&mut errs),
            other => {
                errs.push(FieldError::new(
                    "kind",
                    format!("unknown kind `{other}` (expected chsh, counterfactual, nsbox, classical or sweep)"),
                ));
                None
            }
        };

        match kind {
            Some(kind) if errs.is_empty() => Ok(Scenario {
                id: self.id,
                description: self.description,
                kind,
                mc,
            }),
            _ => Err(errs),
        }
    }

    fn local_pair(&self, errs: &mut Vec<FieldError>) -> Option<(Direction, Direction)> {
        let Some(s) = &self.settings else {
            errs.push(FieldError::new("settings", "table is required"));
            return None;
        };
        let a = angle(errs, "settings.a", s.a);
        let ap = angle(errs, "settings.a_prime", s.a_prime);
        Some((a?, ap?))
    }

    fn counterfactual_params(
        &self,
        errs: &mut Vec<FieldError>,
        a: Direction,
        a_prime: Direction,
    ) -> Option<CounterfactualParams> {
        let c = self.counterfactual.as_ref()?;
        let remote = c
            .remote
            .iter()
            .enumerate()
            .filter_map(|(i, &v)| angle(errs, &format!("counterfactual.remote[{i}]"), Some(v)))
            .collect();
        let scan_step = c.scan_step.unwrap_or(mucorr_core::counterfactual::DEFAULT_SCAN_STEP_DEGREES);
        if !(scan_step.is_finite() && scan_step > 0.0 && scan_step <= 90.0) {
            errs.push(FieldError::new("counterfactual.scan_step", "must be in (0, 90]"));
        }
        if mucorr_core::quantum_model::dot(a, a_prime).abs()
            > mucorr_core::counterfactual::ANALYTIC_TOLERANCE
        {
            errs.push(FieldError::new(
                "settings.a_prime",
                "must be orthogonal to settings.a for counterfactual analysis",
            ));
        }
        Some(CounterfactualParams {
            a,
            a_prime,
            remote,
            assume_ci: c.assume_ci.unwrap_or(true),
            scan_step,
        })
    }

    fn chsh(&self, errs: &mut Vec<FieldError>) -> Option<ScenarioKind> {
        let s = self.settings.as_ref().or_else(|| {
            errs.push(FieldError::new("settings", "table is required"));
            None
        })?;
        let a = angle(errs, "settings.a", s.a);
        let ap = angle(errs, "settings.a_prime", s.a_prime);
        let b = angle(errs, "settings.b", s.b);
        let bp = angle(errs, "settings.b_prime", s.b_prime);
        let quad = SettingsQuad::new(a?, ap?, b?, bp?);
        let counterfactual = self.counterfactual_params(errs, quad.a, quad.a_prime);
        let reported_s = self.annotations.as_ref().and_then(|n| n.reported_s);
        if reported_s.is_some_and(|v| !v.is_finite()) {
            errs.push(FieldError::new("annotations.reported_s", "must be finite"));
        }
        Some(ScenarioKind::Chsh {
            quad,
            counterfactual,
            reported_s,
        })
    }

    fn counterfactual_kind(&self, errs: &mut Vec<FieldError>) -> Option<ScenarioKind> {
        let (a, ap) = self.local_pair(errs)?;
        if self.counterfactual.is_none() {
            errs.push(FieldError::new("counterfactual", "table is required"));
            return None;
        }
        self.counterfactual_params(errs, a, ap).map(ScenarioKind::Counterfactual)
    }

    fn nsbox_kind(&self, errs: &mut Vec<FieldError>) -> Option<ScenarioKind> {
        let Some(nb) = &self.nsbox else {
            errs.push(FieldError::new("nsbox", "table is required"));
            return None;
        };
        match (nb.isotropic_p, &nb.table) {
            (Some(p), None) => Some(ScenarioKind::NsBox(BoxSource::Isotropic(unit(errs, "nsbox.isotropic_p", p)))),
            (None, Some(table)) => {
                if let Err(violations) = validate_no_signalling(table) {
                    for v in violations {
                        errs.push(FieldError::new("nsbox.table", v.to_string()));
                    }
                }
                Some(ScenarioKind::NsBox(BoxSource::Table(*table)))
            }
            _ => {
                errs.push(FieldError::new(
                    "nsbox",
                    "give exactly one of `isotropic_p` or a `table`",
                ));
                None
            }
        }
    }

    fn classical_kind(&self, errs: &mut Vec<FieldError>) -> Option<ScenarioKind> {
        let Some(c) = &self.classical else {
            errs.push(FieldError::new("classical", "table is required"));
            return None;
        };
        match c.example.as_str() {
            "coin" => Some(ScenarioKind::Classical(ClassicalExample::Coin)),
            "shapes" => {
                let d = ShapesMixture::default();
                let mix = ShapesMixture {
                    cube_fraction: unit(errs, "classical.cube_fraction", c.cube_fraction.unwrap_or(d.cube_fraction)),
                    red_given_cube: unit(errs, "classical.red_given_cube", c.red_given_cube.unwrap_or(d.red_given_cube)),
                    blue_given_sphere: unit(
                        errs,
                        "classical.blue_given_sphere",
                        c.blue_given_sphere.unwrap_or(d.blue_given_sphere),
                    ),
                };
                if errs.is_empty() && mix.analytic_rho().is_err() {
                    errs.push(FieldError::new("classical", "shape or colour never varies"));
                }
                Some(ScenarioKind::Classical(ClassicalExample::Shapes(mix)))
            }
            other => {
                errs.push(FieldError::new(
                    "classical.example",
                    format!("unknown example `{other}` (expected coin or shapes)"),
                ));
                None
            }
        }
    }

    fn sweep_kind(&self, errs: &mut Vec<FieldError>) -> Option<ScenarioKind> {
        let Some(s) = &self.sweep else {
            errs.push(FieldError::new("sweep", "table is required"));
            return None;
        };
        let Some(parameter) = SweepParameter::parse(&s.parameter) else {
            errs.push(FieldError::new(
                "sweep.parameter",
                format!("unknown parameter `{}` (expected theta_degrees or isotropic_p)", s.parameter),
            ));
            return None;
        };
        let range = GridRange::new(s.min, s.max, s.step).map_err(|e| errs.extend(e)).ok()?;
        let local = match parameter {
            SweepParameter::ThetaDegrees => {
                let pair = self.local_pair(errs)?;
                if mucorr_core::quantum_model::dot(pair.0, pair.1).abs()
                    > mucorr_core::counterfactual::ANALYTIC_TOLERANCE
                {
                    errs.push(FieldError::new("settings.a_prime", "must be orthogonal to settings.a"));
                }
                Some(pair)
            }
            SweepParameter::IsotropicP => {
                if range.min < 0.0 || range.max > 1.0 {
                    errs.push(FieldError::new("sweep", "isotropic_p range must lie within [0, 1]"));
                }
                None
            }
        };
        Some(ScenarioKind::Sweep {
            parameter,
            range,
            local,
        })
    }
}
