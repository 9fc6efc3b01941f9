//! Uniform grids, sampled wavefunctions and the quadrature that ties them
//! together.
//!
//! Every field in the crate lives on a [`Grid`]: `n_points` equally spaced
//! abscissae between `u_min` and `u_max` inclusive. Inner products use the
//! composite Simpson rule (with a 3/8 closing panel when the point count is
//! even), so grids built with [`Grid::simpson`] always have an odd number of
//! points.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Which canonical pair a wavefunction is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    /// Damped-motion coordinates, `H = -γ/2 (uv + vu)`.
    Uv,
    /// Reversed-oscillator coordinates, `H = p²/2 - γ²x²/2`.
    Xp,
}

impl std::fmt::Display for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Representation::Uv => f.write_str("uv"),
            Representation::Xp => f.write_str("xp"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_points: usize,
    u_min: f64,
    u_max: f64,
}

impl Grid {
    pub fn new(n_points: usize, u_min: f64, u_max: f64) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::Structural(format!(
                "grid needs at least 2 points, got {n_points}"
            )));
        }
        if !(u_min.is_finite() && u_max.is_finite()) || u_min >= u_max {
            return Err(Error::Structural(format!(
                "grid bounds must satisfy u_min < u_max, got [{u_min}, {u_max}]"
            )));
        }
        Ok(Grid {
            n_points,
            u_min,
            u_max,
        })
    }

    /// Builds a grid with an odd point count, rounding `n_points` up if needed.
    pub fn simpson(n_points: usize, u_min: f64, u_max: f64) -> Result<Self> {
        let n = if n_points % 2 == 0 { n_points + 1 } else { n_points };
        Grid::new(n.max(3), u_min, u_max)
    }

    /// Symmetric grid `[-half_width, half_width]` with the given spacing
    /// (rounded so that the origin is a grid point).
    pub fn symmetric(half_width: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) || !(half_width > 0.0) {
            return Err(Error::Structural(format!(
                "symmetric grid needs positive half width and spacing, got {half_width}, {spacing}"
            )));
        }
        let half = (half_width / spacing).round().max(1.0) as usize;
        let reach = half as f64 * spacing;
        Grid::new(2 * half + 1, -reach, reach)
    }

    /// Default damped-motion grid: `[-20, 20]` with 4001 points.
    pub fn default_uv() -> Self {
        Grid {
            n_points: 4001,
            u_min: -20.0,
            u_max: 20.0,
        }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn u_min(&self) -> f64 {
        self.u_min
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn spacing(&self) -> f64 {
        (self.u_max - self.u_min) / (self.n_points - 1) as f64
    }

    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        self.u_min + k as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n_points)
            .map(|k| self.u_min + k as f64 * h)
            .collect()
    }

    /// Index of the sample closest to `u`, if `u` lies in the grid.
    pub fn nearest_index(&self, u: f64) -> Option<usize> {
        if u < self.u_min - 0.5 * self.spacing() || u > self.u_max + 0.5 * self.spacing() {
            return None;
        }
        let k = ((u - self.u_min) / self.spacing()).round();
        Some((k.max(0.0) as usize).min(self.n_points - 1))
    }

    /// Index of the sample lying exactly (to rounding) at `u = 0`.
    pub fn origin_index(&self) -> Option<usize> {
        let k = self.nearest_index(0.0)?;
        (self.point(k).abs() <= 1e-9 * self.spacing()).then_some(k)
    }

    /// Quadrature weights (including the spacing factor).
    pub fn weights(&self) -> Vec<f64> {
        quadrature_weights(self.n_points, self.spacing())
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n_points == other.n_points && self.u_min == other.u_min && self.u_max == other.u_max
    }
}

/// Composite Simpson weights; an even point count closes with Simpson's 3/8
/// panel, two points fall back to the trapezoid.
pub fn quadrature_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    match n {
        0 | 1 => {}
        2 => {
            w[0] = 0.5 * h;
            w[1] = 0.5 * h;
        }
        _ => {
            let simpson_end = if n % 2 == 1 { n - 1 } else { n - 4 };
            let mut i = 0;
            while i + 2 <= simpson_end {
                w[i] += h / 3.0;
                w[i + 1] += 4.0 * h / 3.0;
                w[i + 2] += h / 3.0;
                i += 2;
            }
            if n % 2 == 0 {
                let s = n - 4;
                w[s] += 3.0 * h / 8.0;
                w[s + 1] += 9.0 * h / 8.0;
                w[s + 2] += 9.0 * h / 8.0;
                w[s + 3] += 3.0 * h / 8.0;
            }
        }
    }
    w
}

/// Complex samples on a grid tagged with their representation.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    samples: Vec<Complex64>,
    representation: Representation,
}

impl WaveFunction {
    pub fn new(grid: Grid, samples: Vec<Complex64>, representation: Representation) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::Structural(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.n_points()
            )));
        }
        if let Some(k) = samples.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Data(format!("non-finite sample at index {k}")));
        }
        Ok(WaveFunction {
            grid,
            samples,
            representation,
        })
    }

    pub fn zeros(grid: Grid, representation: Representation) -> Self {
        WaveFunction {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.n_points()],
            representation,
        }
    }

    /// Samples a function at every grid point.
    pub fn from_fn<F>(grid: Grid, representation: Representation, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        let samples = grid.points().into_iter().map(f).collect();
        WaveFunction::new(grid, samples, representation)
    }

    pub fn from_real_fn<F>(grid: Grid, representation: Representation, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        WaveFunction::from_fn(grid, representation, |u| Complex64::new(f(u), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    /// Same samples, relabelled representation.
    pub fn with_representation(mut self, representation: Representation) -> Self {
        self.representation = representation;
        self
    }

    /// Applies `f(u, ψ(u))` pointwise.
    pub fn map<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(f64, Complex64) -> Complex64,
    {
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, &z)| f(self.grid.point(k), z))
            .collect();
        WaveFunction::new(self.grid, samples, self.representation)
    }

    pub fn scale(&self, factor: Complex64) -> Result<Self> {
        self.map(|_, z| z * factor)
    }

    pub fn conj(&self) -> Self {
        WaveFunction {
            grid: self.grid,
            samples: self.samples.iter().map(|z| z.conj()).collect(),
            representation: self.representation,
        }
    }

    fn check_compatible(&self, other: &WaveFunction) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::Structural(format!(
                "grid mismatch: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        if self.representation != other.representation {
            return Err(Error::Structural(format!(
                "representation mismatch: {} vs {}",
                self.representation, other.representation
            )));
        }
        Ok(())
    }

    /// `self + factor·other`.
    pub fn axpy(&self, factor: Complex64, other: &WaveFunction) -> Result<Self> {
        self.check_compatible(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + factor * b)
            .collect();
        WaveFunction::new(self.grid, samples, self.representation)
    }

    pub fn sub(&self, other: &WaveFunction) -> Result<Self> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `⟨a, b⟩ = ∫ conj(a) b du` by composite Simpson quadrature.
pub fn inner_product(a: &WaveFunction, b: &WaveFunction) -> Result<Complex64> {
    a.check_compatible(b)?;
    let w = a.grid.weights();
    let mut acc = Complex64::new(0.0, 0.0);
    for ((za, zb), wk) in a.samples.iter().zip(&b.samples).zip(&w) {
        acc += za.conj() * zb * wk;
    }
    if !(acc.re.is_finite() && acc.im.is_finite()) {
        return Err(Error::Data("inner product overflowed".into()));
    }
    Ok(acc)
}

pub fn norm(a: &WaveFunction) -> Result<f64> {
    let w = a.grid.weights();
    let acc: f64 = a
        .samples
        .iter()
        .zip(&w)
        .map(|(z, wk)| z.norm_sqr() * wk)
        .sum();
    if !acc.is_finite() {
        return Err(Error::Data("norm overflowed".into()));
    }
    Ok(acc.max(0.0).sqrt())
}

/// `‖a - b‖ / ‖b‖`, or the absolute distance when `b` vanishes.
pub fn relative_l2(a: &WaveFunction, b: &WaveFunction) -> Result<f64> {
    let diff = norm(&a.sub(b)?)?;
    let scale = norm(b)?;
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

/// Four-point Lagrange weights for fractional offset `t ∈ [0, 1]` measured
/// from the second of four equally spaced nodes.
#[inline]
fn lagrange4(t: f64) -> [f64; 4] {
    let tm1 = t - 1.0;
    let tm2 = t - 2.0;
    let tp1 = t + 1.0;
    [
        -t * tm1 * tm2 / 6.0,
        tp1 * tm1 * tm2 / 2.0,
        -tp1 * t * tm2 / 2.0,
        tp1 * t * tm1 / 6.0,
    ]
}

/// Local cubic interpolation of a sampled field at `u`; zero outside the
/// source domain.
pub fn interpolate(a: &WaveFunction, u: f64) -> Complex64 {
    let g = &a.grid;
    let n = g.n_points();
    let h = g.spacing();
    let tol = 1e-12 * h;
    if u < g.u_min() - tol || u > g.u_max() + tol {
        return Complex64::new(0.0, 0.0);
    }
    let s = ((u - g.u_min()) / h).clamp(0.0, (n - 1) as f64);
    if n < 4 {
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        return a.samples[i] * (1.0 - t) + a.samples[i + 1] * t;
    }
    let i = s.floor() as usize;
    if (s - i as f64) == 0.0 {
        return a.samples[i];
    }
    let start = i.saturating_sub(1).min(n - 4);
    let t = s - (start + 1) as f64;
    let w = lagrange4(t);
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, wj) in w.iter().enumerate() {
        acc += a.samples[start + j] * wj;
    }
    acc
}

/// Re-grids `a` onto `target` with local cubic interpolation.
pub fn resample(a: &WaveFunction, target: &Grid) -> Result<WaveFunction> {
    if target.same_as(&a.grid) {
        return Ok(a.clone());
    }
    let samples = target.points().into_iter().map(|u| interpolate(a, u)).collect();
    WaveFunction::new(*target, samples, a.representation)
}
