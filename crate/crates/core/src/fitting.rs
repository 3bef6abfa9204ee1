//! Curve fitting for knotting-probability series.

use nalgebra::{Matrix5, Vector5};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 500;
pub const PARAM_TOL: f64 = 1e-9;
const MIN_POINTS: usize = 6;
const DAMPING_LADDER: usize = 40;

/// Fit of `p(n) = a (n − n0)^b e^(−k n − l n²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub a: f64,
    pub b: f64,
    pub k: f64,
    pub l: f64,
    pub n0: f64,
    /// Sum of squared log-residuals.
    pub rss: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Points dropped because their probability was zero.
    pub excluded: usize,
}

impl DecayFit {
    pub fn eval(&self, n: f64) -> f64 {
        self.a * (n - self.n0).powf(self.b) * (-self.k * n - self.l * n * n).exp()
    }
}

/// Parameters `(ln a, b, k, l, n0)`.
type Params = Vector5<f64>;

fn log_model(p: &Params, n: f64) -> f64 {
    p[0] + p[1] * (n - p[4]).ln() - p[2] * n - p[3] * n * n
}

fn rss(p: &Params, data: &[(f64, f64)]) -> f64 {
    let min_n = data[0].0;
    if !(p[4] < min_n) {
        return f64::INFINITY;
    }
    data.iter().map(|&(n, y)| (log_model(p, n) - y).powi(2)).sum()
}

/// Least-squares coefficients of `y ≈ c0 + c1 x + c2 x²`.
fn quadratic_fit(pts: &[(f64, f64)]) -> Option<[f64; 3]> {
    let mut m = nalgebra::Matrix3::<f64>::zeros();
    let mut v = nalgebra::Vector3::<f64>::zeros();
    for &(x, y) in pts {
        let row = nalgebra::Vector3::new(1.0, x, x * x);
        m += row * row.transpose();
        v += row * y;
    }
    let c = m.lu().solve(&v)?;
    Some([c[0], c[1], c[2]])
}

fn initial_guess(data: &[(f64, f64)]) -> Params {
    let n0 = data[0].0 - 1.0;
    let head = &data[..3];
    let xs: Vec<f64> = head.iter().map(|&(n, _)| (n - n0).ln()).collect();
    let xm = xs.iter().sum::<f64>() / 3.0;
    let ym = head.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let sxy: f64 = xs.iter().zip(head).map(|(x, p)| (x - xm) * (p.1 - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let tail = &data[data.len() / 2..];
    let tail = if tail.len() >= 3 { tail } else { &data[data.len() - 3..] };
    let residual: Vec<(f64, f64)> = tail.iter().map(|&(n, y)| (n, y - b * (n - n0).ln())).collect();
    let (k, l) = match quadratic_fit(&residual) {
        Some([_, c1, c2]) => (-c1, -c2),
        None => (0.0, 0.0),
    };
    let &(np, yp) = data.iter().max_by(|x, y| x.1.total_cmp(&y.1)).expect("nonempty");
    let ln_a = yp - b * (np - n0).ln() + k * np + l * np * np;
    Params::new(ln_a, b, k, l, n0)
}

fn jacobian_row(p: &Params, n: f64) -> Vector5<f64> {
    let d = n - p[4];
    Vector5::new(1.0, d.ln(), -n, -n * n, -p[1] / d)
}

fn prepare(points: &[(f64, f64)]) -> Result<(Vec<(f64, f64)>, usize)> {
    if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(Error::InvalidInput("n must be strictly increasing".into()));
    }
    if points.iter().any(|&(n, p)| !n.is_finite() || !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidInput("points must be finite with p >= 0".into()));
    }
    let data: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > 0.0).map(|&(n, p)| (n, p.ln())).collect();
    let excluded = points.len() - data.len();
    if data.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!("need {MIN_POINTS} points with p > 0, got {}", data.len())));
    }
    Ok((data, excluded))
}

fn to_fit(p: &Params, rss: f64, converged: bool, iterations: usize, excluded: usize) -> DecayFit {
    DecayFit { a: p[0].exp(), b: p[1], k: p[2], l: p[3], n0: p[4], rss, converged, iterations, excluded }
}

/// The starting point of [`fit_decay`]: `n0 = min n − 1`, `b` from the
/// log-log slope of the first three points, `k` and `l` from a quadratic fit
/// to the second half, and `a` matching the largest probability.
pub fn decay_initial_guess(points: &[(f64, f64)]) -> Result<DecayFit> {
    let (data, excluded) = prepare(points)?;
    let p = initial_guess(&data);
    Ok(to_fit(&p, rss(&p, &data), false, 0, excluded))
}

/// Damped Gauss–Newton (Levenberg–Marquardt) fit on `ln p`. Points with
/// `p = 0` are skipped; at least six positive points are needed and `n`
/// must be strictly increasing.
pub fn fit_decay(points: &[(f64, f64)]) -> Result<DecayFit> {
    let (data, excluded) = prepare(points)?;
    let mut p = initial_guess(&data);
    let mut cost = rss(&p, &data);
    if !cost.is_finite() {
        return Err(Error::FitDiverged);
    }
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = Matrix5::<f64>::zeros();
        let mut jtr = Vector5::<f64>::zeros();
        for &(n, y) in &data {
            let row = jacobian_row(&p, n);
            jtj += row * row.transpose();
            jtr += row * (log_model(&p, n) - y);
        }
        if jtr.norm() == 0.0 {
            converged = true;
            break;
        }
        let mut improved = None;
        for _ in 0..DAMPING_LADDER {
            let mut a = jtj;
            for i in 0..5 {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            if let Some(step) = a.lu().solve(&(-jtr)) {
                let trial = p + step;
                let c = rss(&trial, &data);
                if c < cost {
                    improved = Some((trial, c, step));
                    break;
                }
            }
            lambda *= 10.0;
        }
        let Some((trial, c, step)) = improved else {
            // No damped step reduces the residual: at a minimum up to
            // rounding, unless nothing was ever gained.
            converged = iterations > 1 || cost < 1e-20;
            break;
        };
        lambda = (lambda / 10.0).max(1e-15);
        let rel = step.iter().zip(trial.iter()).map(|(s, x)| s.abs() / x.abs().max(1.0)).fold(0.0, f64::max);
        p = trial;
        cost = c;
        if rel < PARAM_TOL {
            converged = true;
            break;
        }
    }
    if !converged && iterations < MAX_ITERATIONS {
        return Err(Error::FitDiverged);
    }
    Ok(to_fit(&p, cost, converged, iterations, excluded))
}

/// Natural cubic spline through strictly increasing `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl NaturalSpline {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InsufficientData("a spline needs at least 2 points".into()));
        }
        if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::InvalidInput("spline abscissae must be strictly increasing".into()));
        }
        let x: Vec<f64> = points.iter().map(|p| p.0).collect();
        let y: Vec<f64> = points.iter().map(|p| p.1).collect();
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Tridiagonal system for the interior second derivatives.
            let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
            let size = n - 2;
            let mut diag = vec![0.0; size];
            let mut upper = vec![0.0; size];
            let mut rhs = vec![0.0; size];
            for i in 0..size {
                diag[i] = 2.0 * (h[i] + h[i + 1]);
                upper[i] = h[i + 1];
                rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h[i + 1] - (y[i + 1] - y[i]) / h[i]);
            }
            for i in 1..size {
                let w = h[i] / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[size] = rhs[size - 1] / diag[size - 1];
            for i in (0..size - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Ok(NaturalSpline { x, y, m })
    }

    fn segment(&self, t: f64) -> usize {
        match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            i => (i - 1).min(self.x.len() - 2),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }
}

pub const SPLINE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    /// `(n_B, n_A)` pairs with equal probability.
    pub pairs: Vec<(f64, f64)>,
    /// `n_B` values whose probability lies outside series A's range.
    pub dropped: Vec<f64>,
}

/// For each point of `b`, the `n` at which the natural spline through `a`
/// takes the same probability, found by bisection inside the bracketing
/// knot interval. `a` must be strictly monotone in `p`.
pub fn scale_correspondence(a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<Correspondence> {
    let spline = NaturalSpline::new(a)?;
    let increasing = a.windows(2).all(|w| w[0].1 < w[1].1);
    let decreasing = a.windows(2).all(|w| w[0].1 > w[1].1);
    if !(increasing || decreasing) {
        return Err(Error::NonMonotoneSeries);
    }
    let (lo_p, hi_p) = if increasing { (a[0].1, a[a.len() - 1].1) } else { (a[a.len() - 1].1, a[0].1) };
    let mut out = Correspondence { pairs: Vec::new(), dropped: Vec::new() };
    for &(nb, pb) in b {
        if !(pb >= lo_p && pb <= hi_p) {
            out.dropped.push(nb);
            continue;
        }
        let i = if increasing {
            a.partition_point(|p| p.1 < pb)
        } else {
            a.partition_point(|p| p.1 > pb)
        };
        if i < a.len() && a[i].1 == pb {
            out.pairs.push((nb, a[i].0));
            continue;
        }
        let (mut lo, mut hi) = (a[i - 1].0, a[i].0);
        let sign = |t: f64| (spline.eval(t) - pb) * if increasing { 1.0 } else { -1.0 };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let s = sign(mid);
            if s.abs() <= SPLINE_TOL {
                lo = mid;
                hi = mid;
                break;
            }
            if s < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.pairs.push((nb, 0.5 * (lo + hi)));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    /// `1 − SS_res/SS_tot`; `1` when `y` is constant and fitted exactly.
    pub r_squared: f64,
}

impl LinearFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares line through `points`.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return Err(Error::DegenerateX);
    }
    let xm = points.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - xm).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateX);
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - ym).powi(2)).sum();
    let ss_res: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(LinearFit { intercept, slope, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|x| (x as f64, 2.0 * x as f64 + 3.0)).collect();
        let f = linear_fit(&pts).unwrap();
        assert!((f.intercept - 3.0).abs() < 1e-12);
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_tent_has_no_trend() {
        let f = linear_fit(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]).unwrap();
        assert!(f.slope.abs() < 1e-15);
        assert!(f.r_squared.abs() < 1e-15);
    }

    #[test]
    fn repeated_x_is_degenerate() {
        assert!(matches!(linear_fit(&[(1.0, 0.0), (1.0, 2.0)]), Err(Error::DegenerateX)));
        assert!(matches!(linear_fit(&[(1.0, 0.0)]), Err(Error::DegenerateX)));
    }

    #[test]
    fn spline_interpolates_and_is_exact_on_lines() {
        let pts: Vec<(f64, f64)> = (0..6).map(|i| (i as f64 * 1.5, 4.0 - 0.5 * i as f64 * 1.5)).collect();
        let s = NaturalSpline::new(&pts).unwrap();
        for &(x, y) in &pts {
            assert!((s.eval(x) - y).abs() < 1e-14);
        }
        assert!((s.eval(2.2) - (4.0 - 0.5 * 2.2)).abs() < 1e-13);
    }

    #[test]
    fn spline_has_zero_end_curvature() {
        let pts: Vec<(f64, f64)> = (0..7).map(|i| (i as f64, (i as f64).sin())).collect();
        let s = NaturalSpline::new(&pts).unwrap();
        let h = 1e-4;
        for x in [0.0 + 2.0 * h, 6.0 - 2.0 * h] {
            let d2 = (s.eval(x + h) - 2.0 * s.eval(x) + s.eval(x - h)) / (h * h);
            assert!(d2.abs() < 1e-2, "{d2}");
        }
    }

    #[test]
    fn non_monotone_series_is_rejected() {
        let a = [(1.0, 0.5), (2.0, 0.3), (3.0, 0.4)];
        assert!(matches!(scale_correspondence(&a, &a), Err(Error::NonMonotoneSeries)));
    }

    #[test]
    fn out_of_range_points_are_dropped() {
        let a = [(1.0, 0.9), (2.0, 0.5), (3.0, 0.2)];
        let c = scale_correspondence(&a, &[(5.0, 0.95), (6.0, 0.5), (7.0, 0.1)]).unwrap();
        assert_eq!(c.dropped, vec![5.0, 7.0]);
        assert_eq!(c.pairs, vec![(6.0, 2.0)]);
    }

    #[test]
    fn too_few_positive_points() {
        let pts: Vec<(f64, f64)> = (0..8).map(|i| (i as f64 + 5.0, if i < 3 { 0.1 } else { 0.0 })).collect();
        assert!(matches!(fit_decay(&pts), Err(Error::InsufficientData(_))));
    }
}
