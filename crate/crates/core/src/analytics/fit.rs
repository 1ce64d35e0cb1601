//! Least-squares fits on log-transformed data.

use super::icdf::{Icdf, WeightedSample};
use super::{AnalyticsError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = intercept + slope * x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(AnalyticsError::InvalidArgument(
            "x and y lengths differ".into(),
        ));
    }
    let n = xs.len();
    if n < 2 {
        return Err(AnalyticsError::NotEnoughPoints { needed: 2, have: n });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 || !sxx.is_finite() {
        return Err(AnalyticsError::DegenerateFit("zero variance in x".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTailFit {
    /// Slope of `ln I(x)` against `ln x`.
    pub icdf_slope: f64,
    /// Exponent `a` of the density `f(x) ~ x^-a`, equal to `1 - icdf_slope`.
    pub density_exponent: f64,
    pub points_used: usize,
}

/// Power-law fit of an icdf given as `(x, I(x))` points with `x, I > 0`.
pub fn fit_power_tail_points(points: &[(f64, f64)]) -> Result<PowerTailFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|(x, i)| *x > 0.0 && *i > 0.0)
        .map(|&(x, i)| (x.ln(), i.ln()))
        .unzip();
    let fit = linear_fit(&xs, &ys)?;
    Ok(PowerTailFit {
        icdf_slope: fit.slope,
        density_exponent: 1.0 - fit.slope,
        points_used: xs.len(),
    })
}

/// Fits the empirical icdf of `values` on `[x_lo, x_hi]`, evaluated at
/// every distinct sample value in range.
pub fn fit_power_tail(values: &[f64], x_lo: f64, x_hi: f64) -> Result<PowerTailFit> {
    let samples: Vec<WeightedSample> = values.iter().map(|&v| WeightedSample::unit(v)).collect();
    let dist = Icdf::new(&samples)?;
    let points: Vec<(f64, f64)> = dist
        .distinct_values()
        .into_iter()
        .filter(|&x| x >= x_lo && x <= x_hi && x > 0.0)
        .map(|x| (x, dist.eval(x)))
        .filter(|&(_, i)| i > 0.0)
        .collect();
    if points.len() < 10 {
        return Err(AnalyticsError::NotEnoughPoints {
            needed: 10,
            have: points.len(),
        });
    }
    fit_power_tail_points(&points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpDirection {
    Growth,
    Decay,
}

/// `y = amplitude * exp(±l / scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub amplitude: f64,
    pub scale: f64,
    pub direction: ExpDirection,
    pub line: LineFit,
}

impl ExpFit {
    pub fn eval(&self, l: f64) -> f64 {
        self.amplitude * (self.line.slope * l).exp()
    }
}

/// Straight-line fit to `(l, ln y)`, which minimizes relative errors.
pub fn fit_exponential_loglinear(points: &[(f64, f64)]) -> Result<ExpFit> {
    if points.len() < 3 {
        return Err(AnalyticsError::NotEnoughPoints {
            needed: 3,
            have: points.len(),
        });
    }
    if points.iter().any(|&(_, y)| !(y > 0.0 && y.is_finite())) {
        return Err(AnalyticsError::InvalidArgument(
            "exponential fit needs positive finite y".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let line = linear_fit(&xs, &ys)?;
    if line.slope == 0.0 {
        return Err(AnalyticsError::DegenerateFit("flat data has no scale".into()));
    }
    Ok(ExpFit {
        amplitude: line.intercept.exp(),
        scale: 1.0 / line.slope.abs(),
        direction: if line.slope > 0.0 {
            ExpDirection::Growth
        } else {
            ExpDirection::Decay
        },
        line,
    })
}
