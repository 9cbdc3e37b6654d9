//! Finite-difference machinery: the derivative strategy used for geometric
//! quantities, directional stencils on functions of `(x, y)`, and
//! differencing of uniformly sampled series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffMode {
    /// Use the model's analytic callbacks where present, finite differences otherwise.
    AnalyticIfAvailable,
    /// Ignore analytic callbacks; everything is differenced from the Lagrangian.
    ForcedFiniteDifference,
}

/// Base steps for the fourth-order central stencils.
///
/// `h1` is used for first derivatives of the Lagrangian (and of force fields),
/// `h2` for its second derivatives, `h3` for every derivative taken of an
/// already differentiated quantity (spray, connection, Berwald coefficients).
/// Each is scaled by `max(1, |v|)` over the coordinates being moved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiffStrategy {
    pub mode: DiffMode,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

impl Default for DiffStrategy {
    fn default() -> Self {
        let eps = f64::EPSILON;
        Self {
            mode: DiffMode::AnalyticIfAvailable,
            h1: eps.powf(1.0 / 5.0),
            h2: eps.powf(1.0 / 7.0),
            h3: eps.powf(1.0 / 8.0),
        }
    }
}

impl DiffStrategy {
    pub fn forced_fd() -> Self {
        Self {
            mode: DiffMode::ForcedFiniteDifference,
            ..Self::default()
        }
    }

    pub fn uses_analytic(&self) -> bool {
        self.mode == DiffMode::AnalyticIfAvailable
    }

    pub fn validate(&self) -> Result<()> {
        for (name, h) in [("h1", self.h1), ("h2", self.h2), ("h3", self.h3)] {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidSpec(format!("step {name} must be positive, got {h}")));
            }
        }
        Ok(())
    }
}

/// Directional derivative `d/ds f(x + s dx, y + s dy)` at `s = 0`, by the
/// five-point fourth-order central stencil.
pub fn directional<F>(f: F, x: &[f64], y: &[f64], dx: &[f64], dy: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
{
    let norm = dx.iter().chain(dy).fold(0.0_f64, |m, v| m.max(v.abs()));
    if norm == 0.0 {
        return Ok(vec![0.0; f(x, y)?.len()]);
    }
    let mut scale: f64 = 1.0;
    for (c, d) in x.iter().zip(dx).chain(y.iter().zip(dy)) {
        if *d != 0.0 {
            scale = scale.max(c.abs());
        }
    }
    let step = h * scale;
    let eval = |m: f64| {
        let s = m * step / norm;
        let xs: Vec<f64> = x.iter().zip(dx).map(|(a, d)| a + s * d).collect();
        let ys: Vec<f64> = y.iter().zip(dy).map(|(a, d)| a + s * d).collect();
        f(&xs, &ys)
    };
    let fm2 = eval(-2.0)?;
    let fm1 = eval(-1.0)?;
    let fp1 = eval(1.0)?;
    let fp2 = eval(2.0)?;
    let factor = norm / (12.0 * step);
    Ok((0..fm2.len())
        .map(|c| (fm2[c] - 8.0 * fm1[c] + 8.0 * fp1[c] - fp2[c]) * factor)
        .collect())
}

/// `d f / d x^k`.
pub fn partial_x<F>(f: F, x: &[f64], y: &[f64], k: usize, h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
{
    let dx = unit(x.len(), k);
    directional(f, x, y, &dx, &vec![0.0; y.len()], h)
}

/// `d f / d y^k`.
pub fn partial_y<F>(f: F, x: &[f64], y: &[f64], k: usize, h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
{
    let dy = unit(y.len(), k);
    directional(f, x, y, &vec![0.0; x.len()], &dy, h)
}

pub(crate) fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}

/// Which derivative of a sampled series to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesOrder {
    First,
    Second,
}

/// Number of samples at each end where the series stencils are one-sided.
pub const SERIES_EDGE: usize = 2;

/// Differentiates a uniformly sampled scalar series. Interior samples use
/// fourth-order central stencils; the first and last two samples use
/// one-sided five-point stencils.
pub fn series_derivative(samples: &[f64], dt: f64, order: SeriesOrder) -> Result<Vec<f64>> {
    let m = samples.len();
    if m < 5 {
        return Err(Error::TooFewSamples { needed: 5, got: m });
    }
    let f = samples;
    let mut out = vec![0.0; m];
    match order {
        SeriesOrder::First => {
            let c = 1.0 / (12.0 * dt);
            for i in 2..m - 2 {
                out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * c;
            }
            out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * c;
            out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * c;
            out[m - 1] = -(-25.0 * f[m - 1] + 48.0 * f[m - 2] - 36.0 * f[m - 3] + 16.0 * f[m - 4]
                - 3.0 * f[m - 5])
                * c;
            out[m - 2] =
                -(-3.0 * f[m - 1] - 10.0 * f[m - 2] + 18.0 * f[m - 3] - 6.0 * f[m - 4] + f[m - 5]) * c;
        }
        SeriesOrder::Second => {
            let c = 1.0 / (12.0 * dt * dt);
            for i in 2..m - 2 {
                out[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) * c;
            }
            out[0] = (35.0 * f[0] - 104.0 * f[1] + 114.0 * f[2] - 56.0 * f[3] + 11.0 * f[4]) * c;
            out[1] = (11.0 * f[0] - 20.0 * f[1] + 6.0 * f[2] + 4.0 * f[3] - f[4]) * c;
            out[m - 1] = (35.0 * f[m - 1] - 104.0 * f[m - 2] + 114.0 * f[m - 3] - 56.0 * f[m - 4]
                + 11.0 * f[m - 5])
                * c;
            out[m - 2] =
                (11.0 * f[m - 1] - 20.0 * f[m - 2] + 6.0 * f[m - 3] + 4.0 * f[m - 4] - f[m - 5]) * c;
        }
    }
    Ok(out)
}

/// Componentwise [`series_derivative`] of a sampled vector series `rows[k][i]`.
pub fn vector_series_derivative(rows: &[Vec<f64>], dt: f64, order: SeriesOrder) -> Result<Vec<Vec<f64>>> {
    let m = rows.len();
    if m < 5 {
        return Err(Error::TooFewSamples { needed: 5, got: m });
    }
    let n = rows[0].len();
    let mut out = vec![vec![0.0; n]; m];
    for i in 0..n {
        let column: Vec<f64> = rows.iter().map(|r| r[i]).collect();
        for (k, v) in series_derivative(&column, dt, order)?.into_iter().enumerate() {
            out[k][i] = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic(t: f64) -> f64 {
        1.0 - 2.0 * t + 0.5 * t * t + 3.0 * t.powi(3) - 0.25 * t.powi(4)
    }

    #[test]
    fn directional_stencil_is_exact_on_quartics() {
        let f = |x: &[f64], y: &[f64]| Ok(vec![quartic(x[0]) * y[0], x[0] * x[0] + y[0] * y[0] * y[0]]);
        let d = partial_x(f, &[0.3], &[2.0], 0, 1e-2).unwrap();
        let exact = (-2.0 + 0.3 + 9.0 * 0.09 - 0.027) * 2.0;
        assert!((d[0] - exact).abs() < 1e-12, "{} vs {}", d[0], exact);
        assert!((d[1] - 0.6).abs() < 1e-12);
        let d = partial_y(f, &[0.3], &[2.0], 0, 1e-2).unwrap();
        assert!((d[1] - 12.0).abs() < 1e-11);
    }

    #[test]
    fn zero_direction_gives_zero() {
        let f = |x: &[f64], _: &[f64]| Ok(vec![x[0].exp()]);
        let d = directional(f, &[1.0], &[1.0], &[0.0], &[0.0], 1e-3).unwrap();
        assert_eq!(d, vec![0.0]);
    }

    #[test]
    fn series_stencils_exact_on_low_degree_polynomials() {
        let dt = 0.1;
        // Interior stencils are exact on quartics; the one-sided second-derivative
        // stencils are exact on cubics.
        let cubic = |t: f64| 2.0 - t + 0.7 * t * t - 0.3 * t.powi(3);
        let samples: Vec<f64> = (0..9).map(|k| cubic(k as f64 * dt)).collect();
        let d1 = series_derivative(&samples, dt, SeriesOrder::First).unwrap();
        let d2 = series_derivative(&samples, dt, SeriesOrder::Second).unwrap();
        for (k, (a, b)) in d1.iter().zip(&d2).enumerate() {
            let t = k as f64 * dt;
            assert!((a - (-1.0 + 1.4 * t - 0.9 * t * t)).abs() < 1e-12, "d1 at {k}");
            assert!((b - (1.4 - 1.8 * t)).abs() < 1e-10, "d2 at {k}");
        }
        let samples: Vec<f64> = (0..9).map(|k| quartic(k as f64 * dt)).collect();
        let d2 = series_derivative(&samples, dt, SeriesOrder::Second).unwrap();
        for (k, v) in d2.iter().enumerate().take(7).skip(2) {
            let t = k as f64 * dt;
            assert!((v - (1.0 + 18.0 * t - 3.0 * t * t)).abs() < 1e-10);
        }
    }

    #[test]
    fn series_needs_five_samples() {
        assert_eq!(
            series_derivative(&[0.0; 4], 0.1, SeriesOrder::First).unwrap_err(),
            Error::TooFewSamples { needed: 5, got: 4 }
        );
    }

    #[test]
    fn strategy_validation() {
        assert!(DiffStrategy::default().validate().is_ok());
        let bad = DiffStrategy {
            h2: 0.0,
            ..DiffStrategy::default()
        };
        assert!(bad.validate().is_err());
    }
}
