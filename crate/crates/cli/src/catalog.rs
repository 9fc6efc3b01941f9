//! Built-in scenarios, one per results figure, keyed by semantic name.

use gamowlab_core::propagators::DEFAULT_DT;

use crate::config::{
    BoundaryChoice, GridConfig, InitialState, OutputKind, PropagatorChoice, PropagatorConfig, RepresentationChoice,
    ScenarioConfig,
};

/// `count` evenly spaced times on `[0, t_end]`.
fn times(t_end: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| t_end * k as f64 / (count - 1) as f64).collect()
}

fn exact() -> PropagatorConfig {
    PropagatorConfig {
        kind: PropagatorChoice::Exact,
        gamma: 1.0,
        dt: DEFAULT_DT,
        boundary: BoundaryChoice::ZeroFill,
    }
}

fn split_step() -> PropagatorConfig {
    PropagatorConfig {
        kind: PropagatorChoice::SplitStep,
        gamma: 1.0,
        dt: DEFAULT_DT,
        boundary: BoundaryChoice::AbsorbingTaper,
    }
}

/// `(x,p)` window wide enough for the unit Gaussian stretched by `e^{2}`.
fn xp_grid() -> GridConfig {
    GridConfig {
        points: 6001,
        min: -60.0,
        max: 60.0,
    }
}

struct Entry {
    name: &'static str,
    description: &'static str,
    initial: InitialState,
    representation: RepresentationChoice,
    propagator: PropagatorConfig,
    times: Vec<f64>,
    outputs: Vec<OutputKind>,
    grid: GridConfig,
}

impl Entry {
    fn uv(name: &'static str, description: &'static str, initial: InitialState, times: Vec<f64>, outputs: Vec<OutputKind>) -> Self {
        Entry {
            name,
            description,
            initial,
            representation: RepresentationChoice::Uv,
            propagator: exact(),
            times,
            outputs,
            grid: GridConfig::default_uv(),
        }
    }

    fn xp(name: &'static str, description: &'static str, initial: InitialState, times: Vec<f64>) -> Self {
        Entry {
            name,
            description,
            initial,
            representation: RepresentationChoice::Xp,
            propagator: split_step(),
            times,
            outputs: vec![OutputKind::FieldSnapshots],
            grid: xp_grid(),
        }
    }

    fn into_config(self) -> ScenarioConfig {
        ScenarioConfig {
            name: self.name.to_string(),
            description: self.description.to_string(),
            initial: self.initial,
            representation: self.representation,
            propagator: self.propagator,
            times: self.times,
            outputs: self.outputs,
            grid: self.grid,
        }
    }
}

/// The catalog, sorted by name.
pub fn builtin_scenarios() -> Vec<ScenarioConfig> {
    let bump1 = || InitialState::Bump { epsilon: 1.0 };
    let half_bump = || InitialState::Bump { epsilon: 0.5 };
    let traces = |n_list: Vec<usize>| vec![OutputKind::CoefficientTraces { n_list }];
    let mut entries = vec![
        Entry::uv(
            "fig_bump_uv",
            "Figure: one-dimensional focusing evolution |phi_1(u,t)| of the epsilon = 1 bump under the exact damped propagator",
            bump1(),
            times(2.0, 9),
            vec![OutputKind::FieldSnapshots],
        ),
        Entry::uv(
            "fig_bump_uv_2d",
            "Figure: surface of |phi_1(u,t)| for the epsilon = 1 bump on a dense time grid",
            bump1(),
            times(2.0, 41),
            vec![OutputKind::FieldSnapshots],
        ),
        Entry::uv(
            "fig_coeff_bump",
            "Figure: semilog projections C_N(t) of the evolving epsilon = 1 bump on f_N^+, quantized rates -(N+1/2)",
            bump1(),
            times(2.0, 21),
            traces((0..=4).collect()),
        ),
        Entry::uv(
            "fig_bump_xp_profiles",
            "Figure: transformed bumps in the (x,p) picture for epsilon = 0.5, 1, 2",
            half_bump(),
            vec![0.0],
            vec![OutputKind::TransformPair { epsilons: vec![1.0, 2.0] }],
        ),
        Entry::xp(
            "fig_bump_xp_evolution",
            "Figure: evolution of the transformed epsilon = 1/2 bump under the reversed oscillator (split-step, absorbing edges)",
            half_bump(),
            times(2.0, 9),
        ),
        Entry::uv(
            "fig_proj_bump",
            "Figure: projections <phi_1|f_n^+>* of the epsilon = 1 bump against n",
            bump1(),
            vec![0.0],
            traces((0..=40).collect()),
        ),
        Entry::uv(
            "fig_proj_gauss",
            "Figure: projections <phi|f_n^+>* of the unit Gaussian against n, with the closed form",
            InitialState::Gaussian,
            vec![0.0],
            traces((0..=40).collect()),
        ),
        Entry::uv(
            "fig_gauss_uv",
            "Figure: one-dimensional evolution of the unit Gaussian under the exact damped propagator",
            InitialState::Gaussian,
            times(2.0, 9),
            vec![OutputKind::FieldSnapshots],
        ),
        Entry::uv(
            "fig_gauss_coeff_linear",
            "Figure: projections C_N(t) of the evolving Gaussian on f_N^+ (linear scale)",
            InitialState::Gaussian,
            times(2.0, 41),
            traces((0..=4).collect()),
        ),
        Entry::uv(
            "fig_gauss_coeff_semilog",
            "Figure: projections C_N(t) of the evolving Gaussian on f_N^+ (semilog scale)",
            InitialState::Gaussian,
            times(2.0, 21),
            traces(vec![0, 2, 4, 6, 8, 10]),
        ),
        Entry::uv(
            "fig_fit_eps0",
            "Figure: best bump fit phi_eps0 of the unit Gaussian, with the alternative-objective report",
            InitialState::Gaussian,
            vec![0.0],
            vec![OutputKind::Fit],
        ),
        Entry::uv(
            "fig_evolution_compare",
            "Figure: Gaussian evolution against the evolution of its fitted bump phi_eps0",
            InitialState::Gaussian,
            times(2.0, 9),
            vec![OutputKind::Fit],
        ),
        Entry::uv(
            "fig_background_tails",
            "Figure: background phi_20^BG against the Gaussian minus its fitted bump, compared on the tails",
            InitialState::Gaussian,
            vec![0.5, 1.0],
            vec![OutputKind::Background { order: 20 }],
        ),
        Entry::xp(
            "fig_gauss_xp",
            "Figure: evolution of the Gaussian in the (x,p) picture under the reversed oscillator (split-step, absorbing edges)",
            InitialState::Gaussian,
            times(2.0, 9),
        ),
    ];
    entries.sort_by_key(|e| e.name);
    entries.into_iter().map(Entry::into_config).collect()
}

pub fn find(name: &str) -> Option<ScenarioConfig> {
    builtin_scenarios().into_iter().find(|s| s.name == name)
}
