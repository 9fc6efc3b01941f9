//! Small numerical building blocks shared by the physics modules.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Finite-difference weights for the `order`-th derivative at `x0` from the
/// given nodes (Fornberg's recursion).
pub fn fd_weights(order: usize, x0: f64, nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Half-width (in nodes) of the central stencil for the `order`-th derivative
/// at even accuracy `accuracy`.
pub fn central_half_width(order: usize, accuracy: usize) -> usize {
    (order + 1) / 2 + accuracy / 2 - 1 + usize::from(order == 0)
}

/// Weights of the central stencil on the integer offsets `-r..=r` (unit spacing).
pub fn central_weights(order: usize, accuracy: usize) -> Vec<f64> {
    if order == 0 {
        return vec![1.0];
    }
    let r = central_half_width(order, accuracy) as i64;
    let nodes: Vec<f64> = (-r..=r).map(|k| k as f64).collect();
    fd_weights(order, 0.0, &nodes)
}

/// Richardson extrapolation to `η → 0` of samples taken at `η₀, η₀/2, η₀/4, …`
/// assuming an error expansion in integer powers of `η`. Returns the
/// extrapolated value and the difference to the previous tableau column.
pub fn richardson_halving(values: &[Complex64]) -> (Complex64, f64) {
    let levels = values.len();
    if levels == 1 {
        return (values[0], f64::INFINITY);
    }
    let mut table = values.to_vec();
    let mut previous = table[levels - 1];
    for j in 1..levels {
        let factor = 2f64.powi(j as i32);
        let prev_col = table.clone();
        for i in j..levels {
            table[i] = (prev_col[i] * factor - prev_col[i - 1]) / (factor - 1.0);
        }
        if j == levels - 1 {
            previous = prev_col[levels - 1];
        }
    }
    let best = table[levels - 1];
    (best, (best - previous).norm())
}

/// Neumaier-compensated sum of complex terms.
pub fn compensated_sum<I: IntoIterator<Item = Complex64>>(terms: I) -> Complex64 {
    fn add(sum: &mut f64, comp: &mut f64, x: f64) {
        let t = *sum + x;
        if sum.abs() >= x.abs() {
            *comp += (*sum - t) + x;
        } else {
            *comp += (x - t) + *sum;
        }
        *sum = t;
    }
    let (mut re, mut re_c, mut im, mut im_c) = (0.0, 0.0, 0.0, 0.0);
    for z in terms {
        add(&mut re, &mut re_c, z.re);
        add(&mut im, &mut im_c, z.im);
    }
    Complex64::new(re + re_c, im + im_c)
}

/// Evaluates `y_j = Σ_k a_k e^{iθ j k}` for `j = 0..m` in O((n+m) log(n+m))
/// via Bluestein's chirp factorisation.
pub struct ChirpSum {
    n: usize,
    m: usize,
    theta: f64,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    kernel_hat: Vec<Complex64>,
    len: usize,
}

#[inline]
fn chirp(theta: f64, k: i64) -> Complex64 {
    let phase = 0.5 * theta * (k as f64) * (k as f64);
    Complex64::from_polar(1.0, phase)
}

impl ChirpSum {
    pub fn new(n: usize, m: usize, theta: f64) -> Self {
        let len = (n + m - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(len);
        let ifft = planner.plan_fft_inverse(len);
        let mut kernel = vec![Complex64::new(0.0, 0.0); len];
        for j in 0..m {
            kernel[j] = chirp(-theta, j as i64);
        }
        for k in 1..n {
            kernel[len - k] = chirp(-theta, k as i64);
        }
        fft.process(&mut kernel);
        ChirpSum {
            n,
            m,
            theta,
            fft,
            ifft,
            kernel_hat: kernel,
            len,
        }
    }

    pub fn apply(&self, a: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(a.len(), self.n);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        for (k, ak) in a.iter().enumerate() {
            buf[k] = ak * chirp(self.theta, k as i64);
        }
        self.fft.process(&mut buf);
        for (b, kh) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= kh;
        }
        self.ifft.process(&mut buf);
        let scale = 1.0 / self.len as f64;
        (0..self.m)
            .map(|j| buf[j] * scale * chirp(self.theta, j as i64))
            .collect()
    }
}

/// Ordinary least-squares line `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Residual sum of squares.
    pub rss: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|xi| (xi - mx) * (xi - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let r = yi - intercept - slope * xi;
            r * r
        })
        .sum();
    Some(LineFit {
        slope,
        intercept,
        rss,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenResult {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section minimisation on `[lo, hi]` down to a bracket of width `tol`.
/// An optimum that collapses onto either end of the interval is reported as
/// a search-interval error.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<GoldenResult> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evaluations = 2;
    while (b - a) > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
        evaluations += 1;
    }
    let (x, value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if (x - lo).abs() <= 2.0 * tol || (hi - x).abs() <= 2.0 * tol {
        return Err(Error::SearchInterval { optimum: x, lo, hi });
    }
    Ok(GoldenResult {
        x,
        value,
        evaluations,
    })
}

/// Adaptive Simpson quadrature of a real function on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64> {
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> std::result::Result<f64, f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(delta.abs());
        }
        let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
        let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
        Ok(l + r)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    // Split once so symmetric integrands cannot fool the first comparison.
    let half = |lo: f64, hi: f64, flo: f64, fhi: f64| {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        recurse(f, lo, hi, flo, fmid, fhi, whole, 0.5 * tol, max_depth)
    };
    match (half(a, m, fa, fm), half(m, b, fm, fb)) {
        (Ok(l), Ok(r)) => Ok(l + r),
        (Err(e), _) | (_, Err(e)) => Err(Error::accuracy("adaptive Simpson hit its depth limit", e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_reproduces_textbook_stencils() {
        let w = central_weights(1, 2);
        assert_eq!(w.len(), 3);
        assert!((w[0] + 0.5).abs() < 1e-15 && w[1].abs() < 1e-15 && (w[2] - 0.5).abs() < 1e-15);
        let w = central_weights(2, 4);
        let expected = [-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-13);
        }
        assert_eq!(central_weights(0, 8), vec![1.0]);
        assert_eq!(central_weights(8, 8).len(), 15);
    }

    #[test]
    fn richardson_removes_polynomial_error() {
        let g = |eta: f64| Complex64::new(2.0 + 3.0 * eta - 5.0 * eta * eta, eta);
        let vals: Vec<_> = [0.4, 0.2, 0.1].iter().map(|&e| g(e)).collect();
        let (best, _) = richardson_halving(&vals);
        assert!((best - Complex64::new(2.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn chirp_sum_matches_direct_sum() {
        let n = 37;
        let m = 23;
        let theta = 0.0137;
        let a: Vec<Complex64> = (0..n).map(|k| Complex64::new((k as f64).sin(), 0.1 * k as f64)).collect();
        let fast = ChirpSum::new(n, m, theta).apply(&a);
        for j in 0..m {
            let direct: Complex64 = a
                .iter()
                .enumerate()
                .map(|(k, ak)| ak * Complex64::from_polar(1.0, theta * (j * k) as f64))
                .sum();
            assert!((fast[j] - direct).norm() < 1e-11);
        }
    }

    #[test]
    fn golden_section_finds_interior_minimum() {
        let r = golden_section(|x| (x - 1.3).powi(2), 0.5, 4.0, 1e-8).unwrap();
        assert!((r.x - 1.3).abs() < 1e-7);
        assert!(matches!(
            golden_section(|x| x, 0.5, 4.0, 1e-8),
            Err(Error::SearchInterval { .. })
        ));
    }

    #[test]
    fn line_fit_and_adaptive_simpson() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let fit = fit_line(&x, &y).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-14 && fit.rss < 1e-20);
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12, 40).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
    }
}
