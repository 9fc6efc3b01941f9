//! Declarative scenario configuration and its validation.
//!
//! A configuration is a JSON document; [`parse_config`] reports structural
//! problems with their position, and [`ScenarioConfig::validate`] collects
//! every semantic violation with a field path.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use gamowlab_core::propagators::{Boundary, PropagatorKind, PropagatorSpec, CFL_LIMIT, DEFAULT_DT};
use gamowlab_core::resonances::MAX_RESONANCE_ORDER;
use gamowlab_core::Grid;
use serde::{Deserialize, Serialize};

/// Largest background order accepted by the runner.
pub const MAX_BACKGROUND_ORDER: usize = 60;

/// Largest pole index accepted for residue extraction.
pub const MAX_RESIDUE_ORDER: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub initial: InitialState,
    pub representation: RepresentationChoice,
    pub propagator: PropagatorConfig,
    pub times: Vec<f64>,
    pub outputs: Vec<OutputKind>,
    pub grid: GridConfig,
}

/// Initial state. Non-resonance states are defined in the `(u,v)` picture
/// and mapped by the canonical transform when the scenario runs in `(x,p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// `π^{-1/4} e^{-u²/2}`.
    Gaussian,
    Bump { epsilon: f64 },
    Resonance { n: usize, sign: SignChoice },
    /// CSV with header `u,re,im` on a uniform grid, resampled onto the
    /// scenario grid.
    CustomFile { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignChoice {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepresentationChoice {
    Uv,
    Xp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagatorChoice {
    Exact,
    Pde,
    SplitStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryChoice {
    #[default]
    ZeroFill,
    AbsorbingTaper,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorConfig {
    pub kind: PropagatorChoice,
    pub gamma: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub boundary: BoundaryChoice,
}

impl PropagatorConfig {
    pub fn to_spec(&self) -> gamowlab_core::Result<PropagatorSpec> {
        let kind = match self.kind {
            PropagatorChoice::Exact => PropagatorKind::ExactScaling,
            PropagatorChoice::Pde => PropagatorKind::PdeUv,
            PropagatorChoice::SplitStep => PropagatorKind::SplitStepXp,
        };
        let boundary = match self.boundary {
            BoundaryChoice::ZeroFill => Boundary::ZeroFill,
            BoundaryChoice::AbsorbingTaper => Boundary::AbsorbingTaper,
        };
        PropagatorSpec::new(kind, self.gamma, self.dt, boundary)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub points: usize,
    pub min: f64,
    pub max: f64,
}

impl GridConfig {
    pub fn default_uv() -> Self {
        let g = Grid::default_uv();
        GridConfig {
            points: g.n_points(),
            min: g.u_min(),
            max: g.u_max(),
        }
    }

    pub fn to_grid(&self) -> gamowlab_core::Result<Grid> {
        Grid::new(self.points, self.min, self.max)
    }
}

/// Requested data products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OutputKind {
    /// Evolved field at every scenario time.
    FieldSnapshots,
    /// `C_n(t)` for each listed order.
    CoefficientTraces { n_list: Vec<usize> },
    /// `φ_N^BG` against the state minus its fitted bump.
    Background { order: usize },
    /// Bump fits under every objective, with the fitted bump evolved.
    Fit,
    /// The initial state and its canonical transform, plus extra bumps.
    TransformPair {
        #[serde(default)]
        epsilons: Vec<f64>,
    },
    /// Circle-averaged residues of `χ_+` and detected pole positions.
    SpectraResidues { n_list: Vec<usize> },
}

impl OutputKind {
    pub const NAMES: [&'static str; 6] = [
        "field_snapshots",
        "coefficient_traces",
        "background",
        "fit",
        "transform_pair",
        "spectra_residues",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            OutputKind::FieldSnapshots => "field_snapshots",
            OutputKind::CoefficientTraces { .. } => "coefficient_traces",
            OutputKind::Background { .. } => "background",
            OutputKind::Fit => "fit",
            OutputKind::TransformPair { .. } => "transform_pair",
            OutputKind::SpectraResidues { .. } => "spectra_residues",
        }
    }
}

/// One violation, located by a field path such as `outputs[2].n_list`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Parses a configuration document. Failures carry the offending field path
/// and the line and column of the error.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, Vec<Diagnostic>> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let path = if path == "." { "<root>".to_string() } else { path };
        // serde_json appends the line and column to its message.
        let mut message = inner.to_string();
        if path.starts_with("outputs") && message.contains("unknown variant") && !message.contains("expected one of") {
            message.push_str(&format!("; accepted output kinds: {}", OutputKind::NAMES.join(", ")));
        }
        vec![Diagnostic::new(path, message)]
    })
}

impl ScenarioConfig {
    /// Every semantic violation; an empty list means the configuration runs.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        self.check_name(&mut out);
        self.check_times(&mut out);
        let grid = self.check_grid(&mut out);
        self.check_propagator(grid, &mut out);
        self.check_initial(&mut out);
        self.check_outputs(&mut out);
        out
    }

    fn check_name(&self, out: &mut Vec<Diagnostic>) {
        let valid = !self.name.is_empty()
            && self
                .name
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-');
        if !valid {
            out.push(Diagnostic::new("name", "must be non-empty and use only [a-z0-9_-]"));
        }
    }

    fn check_times(&self, out: &mut Vec<Diagnostic>) {
        if self.times.is_empty() {
            out.push(Diagnostic::new("times", "must contain at least one time"));
        }
        for (k, t) in self.times.iter().enumerate() {
            if !(t.is_finite() && *t >= 0.0) {
                out.push(Diagnostic::new(format!("times[{k}]"), format!("must be finite and non-negative, got {t}")));
            }
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            out.push(Diagnostic::new("times", "must be sorted in strictly ascending order"));
        }
    }

    fn check_grid(&self, out: &mut Vec<Diagnostic>) -> Option<Grid> {
        if self.grid.points < 7 {
            out.push(Diagnostic::new("grid.points", format!("needs at least 7 points, got {}", self.grid.points)));
            return None;
        }
        match self.grid.to_grid() {
            Ok(g) => Some(g),
            Err(e) => {
                out.push(Diagnostic::new("grid", e.to_string()));
                None
            }
        }
    }

    fn check_propagator(&self, grid: Option<Grid>, out: &mut Vec<Diagnostic>) {
        let p = &self.propagator;
        if let Err(e) = p.to_spec() {
            out.push(Diagnostic::new("propagator", e.to_string()));
            return;
        }
        match (p.kind, self.representation) {
            (PropagatorChoice::SplitStep, RepresentationChoice::Uv) => {
                out.push(Diagnostic::new("propagator.kind", "split_step evolves (x,p) states; use representation xp"))
            }
            (PropagatorChoice::Exact | PropagatorChoice::Pde, RepresentationChoice::Xp) => {
                out.push(Diagnostic::new("propagator.kind", "exact and pde evolve (u,v) states; use split_step for xp"))
            }
            _ => {}
        }
        if self.representation == RepresentationChoice::Xp
            && !matches!(self.initial, InitialState::Resonance { .. })
            && !(p.gamma > 0.0)
        {
            out.push(Diagnostic::new("propagator.gamma", "mapping a (u,v) state to (x,p) needs gamma > 0"));
        }
        if let (PropagatorChoice::Pde, Some(g)) = (p.kind, grid) {
            let courant = p.gamma * g.u_min().abs().max(g.u_max().abs()) * p.dt / g.spacing();
            if courant > CFL_LIMIT {
                out.push(Diagnostic::new(
                    "propagator.dt",
                    format!("CFL number {courant:.4} exceeds {CFL_LIMIT}; reduce dt or the domain"),
                ));
            }
        }
    }

    fn check_initial(&self, out: &mut Vec<Diagnostic>) {
        match &self.initial {
            InitialState::Bump { epsilon } if !(epsilon.is_finite() && *epsilon > 0.0) => {
                out.push(Diagnostic::new("initial.epsilon", format!("must be positive, got {epsilon}")))
            }
            InitialState::Resonance { n, .. } if *n > MAX_RESONANCE_ORDER => out.push(Diagnostic::new(
                "initial.n",
                format!("must not exceed {MAX_RESONANCE_ORDER}, got {n}"),
            )),
            InitialState::CustomFile { path } if path.as_os_str().is_empty() => {
                out.push(Diagnostic::new("initial.path", "must name a CSV file"))
            }
            _ => {}
        }
    }

    fn check_outputs(&self, out: &mut Vec<Diagnostic>) {
        if self.outputs.is_empty() {
            out.push(Diagnostic::new("outputs", "must request at least one output"));
        }
        let mut seen = BTreeSet::new();
        let uv = self.representation == RepresentationChoice::Uv;
        let resonance = matches!(self.initial, InitialState::Resonance { .. });
        for (k, o) in self.outputs.iter().enumerate() {
            let at = |field: &str| {
                if field.is_empty() {
                    format!("outputs[{k}]")
                } else {
                    format!("outputs[{k}].{field}")
                }
            };
            if !seen.insert(o.name()) {
                out.push(Diagnostic::new(at(""), format!("duplicate output kind {}", o.name())));
            }
            match o {
                OutputKind::FieldSnapshots => {}
                OutputKind::CoefficientTraces { n_list } => {
                    check_orders(n_list, MAX_RESONANCE_ORDER, &at("n_list"), out);
                }
                OutputKind::Background { order } => {
                    if *order > MAX_BACKGROUND_ORDER {
                        out.push(Diagnostic::new(at("order"), format!("must not exceed {MAX_BACKGROUND_ORDER}, got {order}")));
                    }
                    if !uv {
                        out.push(Diagnostic::new(at(""), "background functions need representation uv"));
                    }
                }
                OutputKind::Fit => {
                    if !uv {
                        out.push(Diagnostic::new(at(""), "bump fits need representation uv"));
                    }
                }
                OutputKind::TransformPair { epsilons } => {
                    if resonance {
                        out.push(Diagnostic::new(at(""), "resonance states have no square-integrable transform"));
                    }
                    if !(self.propagator.gamma > 0.0) {
                        out.push(Diagnostic::new(at(""), "the canonical transform needs gamma > 0"));
                    }
                    for (j, e) in epsilons.iter().enumerate() {
                        if !(e.is_finite() && *e > 0.0) {
                            out.push(Diagnostic::new(format!("outputs[{k}].epsilons[{j}]"), format!("must be positive, got {e}")));
                        }
                    }
                }
                OutputKind::SpectraResidues { n_list } => {
                    check_orders(n_list, MAX_RESIDUE_ORDER, &at("n_list"), out);
                    if !(self.propagator.gamma > 0.0) {
                        out.push(Diagnostic::new(at(""), "continuum families need gamma > 0"));
                    }
                }
            }
        }
    }
}

fn check_orders(n_list: &[usize], max: usize, path: &str, out: &mut Vec<Diagnostic>) {
    if n_list.is_empty() {
        out.push(Diagnostic::new(path, "must list at least one order"));
    }
    if let Some(n) = n_list.iter().find(|&&n| n > max) {
        out.push(Diagnostic::new(path, format!("orders must not exceed {max}, got {n}")));
    }
    if n_list.windows(2).any(|w| !(w[1] > w[0])) {
        out.push(Diagnostic::new(path, "orders must be strictly ascending"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ScenarioConfig {
        ScenarioConfig {
            name: "probe".into(),
            description: String::new(),
            initial: InitialState::Gaussian,
            representation: RepresentationChoice::Uv,
            propagator: PropagatorConfig {
                kind: PropagatorChoice::Exact,
                gamma: 1.0,
                dt: DEFAULT_DT,
                boundary: BoundaryChoice::ZeroFill,
            },
            times: vec![0.0, 1.0],
            outputs: vec![OutputKind::FieldSnapshots],
            grid: GridConfig::default_uv(),
        }
    }

    #[test]
    fn valid_base_has_no_diagnostics() {
        assert!(base().validate().is_empty());
    }

    #[test]
    fn violations_are_all_reported() {
        let mut c = base();
        c.times = vec![1.0, 0.5];
        c.outputs.clear();
        c.name = "Bad Name".into();
        let paths: Vec<String> = c.validate().into_iter().map(|d| d.path).collect();
        assert_eq!(paths, vec!["name", "times", "outputs"]);
    }

    #[test]
    fn pde_cfl_is_checked() {
        let mut c = base();
        c.propagator.kind = PropagatorChoice::Pde;
        c.propagator.dt = 1e-2;
        assert!(c.validate().iter().any(|d| d.path == "propagator.dt"));
    }
}
