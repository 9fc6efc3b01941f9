//! Scenario execution: builds the initial state, runs each requested
//! pipeline, writes CSV files and finally the manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gamowlab_core::background::{background_field, coefficient_decay_order, tail_compare};
use gamowlab_core::bump::{alternative_fits, bump_field, fit_epsilon, FitObjective, DEFAULT_SEARCH};
use gamowlab_core::continuum::{detect_poles, residue_at_pole, ContinuumFamily, FamilyKind, DEFAULT_DELTA};
use gamowlab_core::propagators::{
    coefficient_values, evolve_damped_exact, evolve_pde_uv, evolve_rho_xp, fitted_rate, PropagatorKind, PropagatorSpec,
};
use gamowlab_core::resonances::{
    eval_f_pm_x, eval_f_plus_u, gaussian_projection, mollified_f_minus_field, MollifierSpec, Sign,
};
use gamowlab_core::transform::{forward_transform, TransformParams};
use gamowlab_core::{norm, resample, Error, Grid, Representation, WaveFunction};
use log::info;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{InitialState, OutputKind, RepresentationChoice, ScenarioConfig, SignChoice};
use crate::error::CliError;
use crate::output::{write_csv, Cell, Check, EmittedFile, RunManifest, MANIFEST_NAME};

/// Reference width of the Gaussian's best-fit bump used for comparison.
pub const REFERENCE_EPSILON0: f64 = 1.802425;

/// Accepted distance from [`REFERENCE_EPSILON0`].
pub const EPSILON0_WINDOW: f64 = 0.05;

/// Frozen bound on the median relative tail error of the background.
pub const TAIL_ERROR_BOUND: f64 = 1e-12;

/// Rate tolerance under the exact propagator.
pub const EXACT_RATE_TOL: f64 = 1e-10;

/// Relative rate tolerance under stepped propagators.
pub const STEPPED_RATE_TOL: f64 = 1e-2;

/// Odd-order projections of even states must vanish to this level.
pub const PARITY_TOL: f64 = 1e-10;

/// Relative tolerance of the Gaussian projections against the closed form.
pub const GAUSSIAN_PROJECTION_TOL: f64 = 1e-8;

/// Norm drift tolerated by the norm-preserving propagators.
pub const NORM_DRIFT_TOL: f64 = 1e-4;

/// Tolerance of the transform's norm preservation.
pub const TRANSFORM_NORM_TOL: f64 = 1e-6;

/// Profile tolerance of circle-averaged residues.
pub const RESIDUE_TOL: f64 = 1e-3;

/// Pole positions must be found within this multiple of `γ`.
pub const POLE_TOL: f64 = 1e-6;

/// Command-line overrides applied before validation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOverrides {
    pub grid_points: Option<usize>,
    pub dt: Option<f64>,
}

impl RunOverrides {
    pub fn apply(&self, config: &ScenarioConfig) -> ScenarioConfig {
        let mut c = config.clone();
        if let Some(points) = self.grid_points {
            c.grid.points = points;
        }
        if let Some(dt) = self.dt {
            c.propagator.dt = dt;
        }
        c
    }
}

/// State shared by the output pipelines of one run.
struct Context<'a> {
    config: &'a ScenarioConfig,
    spec: PropagatorSpec,
    grid: Grid,
    /// The initial state in the scenario representation.
    initial: WaveFunction,
    /// Whether the initial state is even, so odd projections vanish.
    even: bool,
}

/// Runs `config`, writing into `out_root/<name>/`. Check failures are
/// reported through the manifest, not as errors.
pub fn run_scenario(config: &ScenarioConfig, out_root: &Path) -> Result<RunManifest, CliError> {
    let started = Instant::now();
    let diagnostics = config.validate();
    if !diagnostics.is_empty() {
        return Err(CliError::Usage(diagnostics));
    }
    let spec = config.propagator.to_spec()?;
    let grid = config.grid.to_grid()?;
    let initial = initial_state(config, &grid)?;
    let even = match config.initial {
        InitialState::Gaussian | InitialState::Bump { .. } => true,
        InitialState::Resonance { .. } | InitialState::CustomFile { .. } => false,
    };
    let dir = out_root.join(&config.name);
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    // A stale manifest would mark this run complete before it is.
    let stale = dir.join(MANIFEST_NAME);
    if stale.exists() {
        fs::remove_file(&stale).map_err(|e| CliError::io(&stale, e))?;
    }
    let ctx = Context {
        config,
        spec,
        grid,
        initial,
        even,
    };
    let mut files = Vec::new();
    let mut checks = Vec::new();
    for output in &config.outputs {
        info!("{}: {}", config.name, output.name());
        let (f, c) = match output {
            OutputKind::FieldSnapshots => field_snapshots(&ctx, &dir)?,
            OutputKind::CoefficientTraces { n_list } => coefficient_traces(&ctx, n_list, &dir)?,
            OutputKind::Background { order } => background(&ctx, *order, &dir)?,
            OutputKind::Fit => fit(&ctx, &dir)?,
            OutputKind::TransformPair { epsilons } => transform_pair(&ctx, epsilons, &dir)?,
            OutputKind::SpectraResidues { n_list } => spectra_residues(&ctx, n_list, &dir)?,
        };
        files.extend(f);
        checks.extend(c);
    }
    let manifest = RunManifest {
        scenario: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: started.elapsed().as_secs_f64(),
        files,
        checks,
    };
    manifest.write_atomic(&dir)?;
    Ok(manifest)
}

fn gaussian(grid: Grid) -> Result<WaveFunction, Error> {
    WaveFunction::from_real_fn(grid, Representation::Uv, |u| {
        std::f64::consts::PI.powf(-0.25) * (-0.5 * u * u).exp()
    })
}

/// Reads a `u,re,im` CSV on a uniform grid.
pub fn load_custom_state(path: &Path) -> Result<WaveFunction, CliError> {
    let input_err = |message: String| CliError::Input {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| input_err(e.to_string()))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| input_err(e.to_string()))?
        .iter()
        .map(str::trim)
        .map(String::from)
        .collect();
    if header != ["u", "re", "im"] {
        return Err(input_err(format!("expected header u,re,im, got {}", header.join(","))));
    }
    let mut us = Vec::new();
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| input_err(e.to_string()))?;
        let field = |k: usize| -> Result<f64, CliError> {
            record
                .get(k)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| input_err(format!("row {}: column {} is not a number", line + 2, k + 1)))
        };
        us.push(field(0)?);
        values.push(Complex64::new(field(1)?, field(2)?));
    }
    if us.len() < 7 {
        return Err(input_err(format!("needs at least 7 rows, got {}", us.len())));
    }
    let grid = Grid::new(us.len(), us[0], us[us.len() - 1]).map_err(|e| input_err(e.to_string()))?;
    let off_grid = us
        .iter()
        .enumerate()
        .map(|(k, u)| (u - grid.point(k)).abs())
        .fold(0.0, f64::max);
    if off_grid > 1e-9 * grid.spacing() {
        return Err(input_err(format!("abscissae are not uniform (deviation {off_grid:e})")));
    }
    WaveFunction::new(grid, values, Representation::Uv).map_err(|e| input_err(e.to_string()))
}

fn initial_uv(initial: &InitialState, grid: &Grid) -> Result<WaveFunction, CliError> {
    Ok(match initial {
        InitialState::Gaussian => gaussian(*grid)?,
        InitialState::Bump { epsilon } => bump_field(*epsilon, grid)?,
        InitialState::Resonance { n, sign: SignChoice::Plus } => {
            WaveFunction::from_real_fn(*grid, Representation::Uv, |u| eval_f_plus_u(*n, u).unwrap_or(f64::NAN))?
        }
        InitialState::Resonance { n, sign: SignChoice::Minus } => {
            mollified_f_minus_field(*n, grid, &MollifierSpec::for_grid(grid))?
        }
        InitialState::CustomFile { path } => resample(&load_custom_state(path)?, grid)?,
    })
}

fn initial_state(config: &ScenarioConfig, grid: &Grid) -> Result<WaveFunction, CliError> {
    let gamma = config.propagator.gamma;
    match (config.representation, &config.initial) {
        (RepresentationChoice::Uv, initial) => initial_uv(initial, grid),
        (RepresentationChoice::Xp, InitialState::Resonance { n, sign }) => {
            let sign = match sign {
                SignChoice::Plus => Sign::Plus,
                SignChoice::Minus => Sign::Minus,
            };
            Ok(WaveFunction::from_fn(*grid, Representation::Xp, |x| {
                eval_f_pm_x(*n, sign, x, gamma).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
            })?)
        }
        (RepresentationChoice::Xp, initial) => {
            let source = uv_source(initial)?;
            Ok(forward_transform(&source, &TransformParams::new(gamma)?, grid)?)
        }
    }
}

/// The `(u,v)` state behind an `(x,p)` scenario: the default grid, or the
/// file's own grid for custom data.
fn uv_source(initial: &InitialState) -> Result<WaveFunction, CliError> {
    match initial {
        InitialState::CustomFile { path } => load_custom_state(path),
        other => initial_uv(other, &Grid::default_uv()),
    }
}

fn evolve_one(phi0: &WaveFunction, t: f64, spec: &PropagatorSpec) -> Result<WaveFunction, Error> {
    match spec.kind() {
        PropagatorKind::ExactScaling => evolve_damped_exact(phi0, t, spec.gamma()),
        PropagatorKind::PdeUv => evolve_pde_uv(phi0, t, spec),
        PropagatorKind::SplitStepXp => evolve_rho_xp(phi0, t, spec),
    }
}

/// The state at every time; stepped propagators march once through them.
fn evolve_all(phi0: &WaveFunction, times: &[f64], spec: &PropagatorSpec) -> Result<Vec<WaveFunction>, Error> {
    if spec.kind() == PropagatorKind::ExactScaling {
        return times.par_iter().map(|&t| evolve_one(phi0, t, spec)).collect();
    }
    let mut out = Vec::with_capacity(times.len());
    let (mut state, mut now) = (phi0.clone(), 0.0);
    for &t in times {
        state = evolve_one(&state, t - now, spec)?;
        now = t;
        out.push(state.clone());
    }
    Ok(out)
}

fn coordinate_name(rep: Representation) -> &'static str {
    match rep {
        Representation::Uv => "u",
        Representation::Xp => "x",
    }
}

fn field_rows(t: f64, field: &WaveFunction, rows: &mut Vec<Vec<Cell>>) {
    for (x, z) in field.grid().points().into_iter().zip(field.samples()) {
        rows.push(vec![Cell::Num(t), Cell::Num(x), Cell::Num(z.re), Cell::Num(z.im), Cell::Num(z.norm())]);
    }
}

type Products = (Vec<EmittedFile>, Vec<Check>);

fn field_snapshots(ctx: &Context, dir: &Path) -> Result<Products, CliError> {
    let times = &ctx.config.times;
    let states = evolve_all(&ctx.initial, times, &ctx.spec)?;
    let mut rows = Vec::with_capacity(states.len() * ctx.grid.n_points());
    for (t, s) in times.iter().zip(&states) {
        field_rows(*t, s, &mut rows);
    }
    let coord = coordinate_name(ctx.initial.representation());
    let file = write_csv(dir, "field_snapshots.csv", "field_snapshots", &["t", coord, "re", "im", "abs"], &rows)?;
    let n0 = norm(&ctx.initial)?;
    let drift = states
        .iter()
        .map(|s| norm(s).map(|n| (n - n0).abs()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut check = Check::at_most("norm_drift", drift, NORM_DRIFT_TOL);
    if ctx.spec.kind() == PropagatorKind::SplitStepXp {
        // Absorbing edges remove the outgoing flux by design.
        check = check.informational();
    }
    Ok((vec![file], vec![check]))
}

fn coefficient_traces(ctx: &Context, n_list: &[usize], dir: &Path) -> Result<Products, CliError> {
    let times = &ctx.config.times;
    let traces = n_list
        .par_iter()
        .map(|&n| coefficient_values(&ctx.initial, &ctx.spec, n, times))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for (&n, values) in n_list.iter().zip(&traces) {
        for (t, c) in times.iter().zip(values) {
            rows.push(vec![Cell::Int(n), Cell::Num(*t), Cell::Num(c.re), Cell::Num(c.im), Cell::Num(c.norm())]);
        }
    }
    let file = write_csv(dir, "coefficient_traces.csv", "coefficient_traces", &["n", "t", "re", "im", "abs"], &rows)?;
    let mut checks = Vec::new();
    let gamma = ctx.spec.gamma();
    for (&n, values) in n_list.iter().zip(&traces) {
        if ctx.even && n % 2 == 1 {
            let largest = values.iter().map(|c| c.norm()).fold(0.0, f64::max);
            checks.push(Check::at_most(format!("parity_c{n}"), largest, PARITY_TOL));
            continue;
        }
        if times.len() >= 2 {
            let expected = -gamma * (n as f64 + 0.5);
            let tol = match ctx.spec.kind() {
                PropagatorKind::ExactScaling => EXACT_RATE_TOL,
                _ => STEPPED_RATE_TOL * expected.abs(),
            };
            let deviation = fitted_rate(times, values).map_or(f64::NAN, |r| (r - expected).abs());
            checks.push(Check::at_most(format!("rate_c{n}"), deviation, tol));
        }
        let gaussian_uv = matches!(ctx.config.initial, InitialState::Gaussian) && ctx.config.representation == RepresentationChoice::Uv;
        if gaussian_uv && times[0] == 0.0 {
            let expected = gaussian_projection(n);
            let rel = (values[0] - expected).norm() / expected;
            checks.push(Check::at_most(format!("gaussian_closed_form_c{n}"), rel, GAUSSIAN_PROJECTION_TOL));
        }
    }
    Ok((vec![file], checks))
}

fn background(ctx: &Context, order: usize, dir: &Path) -> Result<Products, CliError> {
    let times = &ctx.config.times;
    let fit = fit_epsilon(&ctx.initial, DEFAULT_SEARCH)?;
    let epsilon0 = fit.params.epsilon();
    let bump = fit.params.field(&ctx.grid)?;
    let moll = MollifierSpec::for_grid(&ctx.grid);
    let decay = coefficient_decay_order(&ctx.initial, 2, 40)?;
    let report = tail_compare(&ctx.initial, &bump, epsilon0, order, times, &ctx.spec, &moll)?.with_decay(decay);
    let fields = times
        .par_iter()
        .map(|&t| -> Result<_, Error> {
            let bg = background_field(&ctx.initial, Some(order), t, &ctx.spec, &moll)?;
            let diff = evolve_one(&ctx.initial, t, &ctx.spec)?.sub(&evolve_one(&bump, t, &ctx.spec)?)?;
            Ok((bg, diff))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for (t, (bg, diff)) in times.iter().zip(&fields) {
        for ((u, b), d) in ctx.grid.points().into_iter().zip(bg.samples()).zip(diff.samples()) {
            rows.push(vec![
                Cell::Num(*t),
                Cell::Num(u),
                Cell::Num(b.re),
                Cell::Num(b.im),
                Cell::Num(d.re),
                Cell::Num(d.im),
            ]);
        }
    }
    let header = ["t", "u", "background_re", "background_im", "difference_re", "difference_im"];
    let mut files = vec![write_csv(dir, "background.csv", "background", &header, &rows)?];
    let tail_rows: Vec<Vec<Cell>> = report
        .times
        .iter()
        .zip(&report.tail_regions)
        .zip(&report.tail_rel_error)
        .map(|((t, (lo, hi)), e)| vec![Cell::Num(*t), Cell::Num(*lo), Cell::Num(*hi), Cell::Num(*e)])
        .collect();
    files.push(write_csv(dir, "background_tails.csv", "background_tails", &["t", "tail_min", "tail_max", "tail_rel_error"], &tail_rows)?);
    let mut checks: Vec<Check> = report
        .times
        .iter()
        .zip(&report.tail_rel_error)
        .map(|(t, e)| Check::at_most(format!("tail_rel_error_t{t}"), *e, TAIL_ERROR_BOUND))
        .collect();
    if let Some(decay) = &report.decay {
        let decay_rows: Vec<Vec<Cell>> = decay
            .orders
            .iter()
            .zip(&decay.ln_abs)
            .map(|(n, y)| vec![Cell::Int(*n), Cell::Num(*y)])
            .collect();
        files.push(write_csv(dir, "coefficient_decay.csv", "coefficient_decay", &["n", "ln_abs_c"], &decay_rows)?);
        checks.push(Check::report("decay_exponent", decay.exponent));
    }
    checks.push(Check::report("fitted_epsilon0", epsilon0));
    Ok((files, checks))
}

fn fit(ctx: &Context, dir: &Path) -> Result<Products, CliError> {
    let target = &ctx.initial;
    let fits = alternative_fits(target, DEFAULT_SEARCH);
    let gaussian = matches!(ctx.config.initial, InitialState::Gaussian);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (objective, result) in &fits {
        let (eps, k, residual, status) = match result {
            Ok(f) => (f.params.epsilon(), f.params.k_epsilon(), f.residual, "ok".to_string()),
            Err(e) => (f64::NAN, f64::NAN, f64::NAN, e.to_string()),
        };
        rows.push(vec![Cell::Text(objective.name().into()), Cell::Num(eps), Cell::Num(k), Cell::Num(residual), Cell::Text(status)]);
        if gaussian {
            // The objective behind the reference width is unstated, so every
            // objective is reported against it without deciding the exit code.
            let distance = (eps - REFERENCE_EPSILON0).abs();
            checks.push(Check::at_most(format!("{}_epsilon0_vs_reference", objective.name()), distance, EPSILON0_WINDOW).informational());
        }
    }
    let header = ["objective", "epsilon", "k_epsilon", "residual", "status"];
    let mut files = vec![write_csv(dir, "fit_objectives.csv", "fit_objectives", &header, &rows)?];
    let l2 = match fits.into_iter().find(|(o, _)| *o == FitObjective::L2) {
        Some((_, result)) => result?,
        None => fit_epsilon(target, DEFAULT_SEARCH)?,
    };
    checks.push(Check::report("l2_epsilon0", l2.params.epsilon()));
    let bump = l2.params.field(&ctx.grid)?;
    let profile_rows: Vec<Vec<Cell>> = ctx
        .grid
        .points()
        .into_iter()
        .zip(target.samples().iter().zip(bump.samples()))
        .map(|(u, (a, b))| vec![Cell::Num(u), Cell::Num(a.re), Cell::Num(a.im), Cell::Num(b.re)])
        .collect();
    files.push(write_csv(dir, "fit_profile.csv", "fit_profile", &["u", "target_re", "target_im", "bump"], &profile_rows)?);
    let times = &ctx.config.times;
    let states = evolve_all(target, times, &ctx.spec)?;
    let bumps = evolve_all(&bump, times, &ctx.spec)?;
    let mut rows = Vec::new();
    for ((t, s), b) in times.iter().zip(&states).zip(&bumps) {
        for ((u, a), c) in ctx.grid.points().into_iter().zip(s.samples()).zip(b.samples()) {
            rows.push(vec![Cell::Num(*t), Cell::Num(u), Cell::Num(a.re), Cell::Num(a.im), Cell::Num(c.re), Cell::Num(c.im)]);
        }
    }
    let header = ["t", "u", "state_re", "state_im", "bump_re", "bump_im"];
    files.push(write_csv(dir, "fit_evolution.csv", "fit_evolution", &header, &rows)?);
    // Focusing keeps the bump normalised: its support contracts but no norm leaks.
    let drift = bumps
        .iter()
        .map(|b| norm(b).map(|n| (n - 1.0).abs()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::at_most("bump_norm_drift", drift, NORM_DRIFT_TOL));
    Ok((files, checks))
}

fn transform_pair(ctx: &Context, epsilons: &[f64], dir: &Path) -> Result<Products, CliError> {
    let gamma = ctx.spec.gamma();
    let params = TransformParams::new(gamma)?;
    let (source_grid, target_grid, initial_uv) = match ctx.config.representation {
        RepresentationChoice::Uv => {
            let half = 3.0 * ctx.grid.u_min().abs().max(ctx.grid.u_max().abs()) / gamma.sqrt();
            let target = Grid::symmetric(half, ctx.grid.spacing())?;
            (ctx.grid, target, ctx.initial.clone())
        }
        RepresentationChoice::Xp => {
            let source = uv_source(&ctx.config.initial)?;
            (*source.grid(), ctx.grid, source)
        }
    };
    let mut members = vec![("initial".to_string(), initial_uv)];
    for e in epsilons {
        members.push((format!("bump_{e}"), bump_field(*e, &source_grid)?));
    }
    let images = members
        .par_iter()
        .map(|(_, m)| forward_transform(m, &params, &target_grid))
        .collect::<Result<Vec<_>, _>>()?;
    let mut source_rows = Vec::new();
    let mut image_rows = Vec::new();
    let mut checks = Vec::new();
    for ((label, m), img) in members.iter().zip(&images) {
        for (u, z) in m.grid().points().into_iter().zip(m.samples()) {
            source_rows.push(vec![Cell::Text(label.clone()), Cell::Num(u), Cell::Num(z.re), Cell::Num(z.im), Cell::Num(z.norm())]);
        }
        for (x, z) in img.grid().points().into_iter().zip(img.samples()) {
            image_rows.push(vec![Cell::Text(label.clone()), Cell::Num(x), Cell::Num(z.re), Cell::Num(z.im), Cell::Num(z.norm())]);
        }
        let ratio = norm(img)? / norm(m)?;
        checks.push(Check::at_most(format!("transform_norm_{label}"), (ratio - 1.0).abs(), TRANSFORM_NORM_TOL));
    }
    if matches!(ctx.config.initial, InitialState::Gaussian) {
        // The unit Gaussian maps to (γ/π)^{1/4} e^{−γx²/2}.
        let scale = (gamma / std::f64::consts::PI).powf(0.25);
        let image = &images[0];
        let err = image
            .grid()
            .points()
            .into_iter()
            .zip(image.samples())
            .map(|(x, z)| (z - scale * (-0.5 * gamma * x * x).exp()).norm())
            .fold(0.0, f64::max);
        checks.push(Check::at_most("gaussian_image_pointwise", err, TRANSFORM_NORM_TOL));
    }
    let header = ["member", "u", "re", "im", "abs"];
    let mut files = vec![write_csv(dir, "transform_source.csv", "transform_source", &header, &source_rows)?];
    let header = ["member", "x", "re", "im", "abs"];
    files.push(write_csv(dir, "transform_image.csv", "transform_image", &header, &image_rows)?);
    Ok((files, checks))
}

/// Window on which residues are sampled.
fn residue_grid(gamma: f64) -> Result<Grid, Error> {
    Grid::symmetric(3.0 / gamma.sqrt(), 0.05 / gamma.sqrt())
}

fn spectra_residues(ctx: &Context, n_list: &[usize], dir: &Path) -> Result<Products, CliError> {
    let gamma = ctx.spec.gamma();
    let family = ContinuumFamily::new(FamilyKind::ChiPlus, gamma)?;
    let grid = residue_grid(gamma)?;
    let estimates = n_list
        .par_iter()
        .map(|&n| residue_at_pole(&family, n, &grid, DEFAULT_DELTA * gamma))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for r in &estimates {
        for ((x, e), f) in grid.points().into_iter().zip(r.estimate.samples()).zip(r.reference.samples()) {
            rows.push(vec![Cell::Int(r.n), Cell::Num(x), Cell::Num(e.re), Cell::Num(e.im), Cell::Num(f.re), Cell::Num(f.im)]);
        }
        checks.push(Check::at_most(format!("residue_profile_n{}", r.n), r.max_rel_error, RESIDUE_TOL));
    }
    let header = ["n", "x", "residue_re", "residue_im", "reference_re", "reference_im"];
    let mut files = vec![write_csv(dir, "residues.csv", "residues", &header, &rows)?];
    let n_max = *n_list.iter().max().expect("validated non-empty");
    let poles = detect_poles(&family, n_max)?;
    let mut pole_rows = Vec::new();
    for n in 0..=n_max {
        let expected = family.pole(n);
        let found = poles
            .iter()
            .copied()
            .min_by(|a, b| (a - expected).norm().total_cmp(&(b - expected).norm()));
        let distance = found.map_or(f64::NAN, |p| (p - expected).norm());
        let p = found.unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        pole_rows.push(vec![Cell::Int(n), Cell::Num(p.re), Cell::Num(p.im), Cell::Num(expected.re), Cell::Num(expected.im)]);
        checks.push(Check::at_most(format!("pole_position_n{n}"), distance / gamma, POLE_TOL));
    }
    let header = ["n", "found_re", "found_im", "expected_re", "expected_im"];
    files.push(write_csv(dir, "poles.csv", "poles", &header, &pole_rows)?);
    Ok((files, checks))
}

/// Output root: the explicit flag, else `GAMOWLAB_OUT`, else `./gamowlab-out`.
pub fn output_root(explicit: Option<PathBuf>) -> PathBuf {
    explicit
        .or_else(|| std::env::var_os("GAMOWLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("gamowlab-out"))
}
