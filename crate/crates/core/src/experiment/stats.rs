use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Standard Gumbel distribution function `exp(-e^{-x})`.
pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

/// One-sample Kolmogorov–Smirnov distance between `samples` and the standard
/// Gumbel law. Infinite samples are allowed; NaN is rejected.
pub fn ks_gumbel(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(invalid("KS distance needs at least one sample"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(invalid("KS samples must not be NaN"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = gumbel_cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// Mean and standard error of the mean.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub t: f64,
    pub abs_error: f64,
    pub std_err: f64,
}

/// Least-squares fit of `log(abs_error + 3 std_err)` on `log(1 / log t)`.
///
/// A slope of 1 means the error decays like `1 / log t`. When every error is
/// within its noise floor the slope is not identifiable and is left out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub indeterminate: bool,
    pub points: Vec<RatePoint>,
}

pub const NOISE_FLOOR_SIGMAS: f64 = 3.0;

pub fn fit_rate(t: &[f64], abs_error: &[f64], std_err: &[f64]) -> Result<RateFit> {
    if t.len() != abs_error.len() || t.len() != std_err.len() {
        return Err(invalid("rate fit inputs must have equal lengths"));
    }
    if t.len() < 2 {
        return Err(invalid("rate fit needs at least two points"));
    }
    if t.iter().any(|t| !(*t > std::f64::consts::E)) {
        return Err(invalid("rate fit needs t > e so that log log t is defined"));
    }
    let points: Vec<RatePoint> = t
        .iter()
        .zip(abs_error)
        .zip(std_err)
        .map(|((&t, &abs_error), &std_err)| RatePoint { t, abs_error, std_err })
        .collect();
    let indeterminate = points.iter().all(|p| p.abs_error <= NOISE_FLOOR_SIGMAS * p.std_err);
    if indeterminate {
        return Ok(RateFit {
            slope: None,
            intercept: None,
            indeterminate,
            points,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| -p.t.ln().ln()).collect();
    let ys: Vec<f64> = points
        .iter()
        .map(|p| (p.abs_error + NOISE_FLOOR_SIGMAS * p.std_err).max(f64::MIN_POSITIVE).ln())
        .collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(invalid("rate fit needs distinct t values"));
    }
    let slope = sxy / sxx;
    Ok(RateFit {
        slope: Some(slope),
        intercept: Some(my - slope * mx),
        indeterminate,
        points,
    })
}
