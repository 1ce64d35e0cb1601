use super::records::OrderRecord;
use super::{AnalyticsError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedSample {
    pub value: f64,
    pub weight: f64,
}

impl WeightedSample {
    pub fn new(value: f64, weight: f64) -> Self {
        Self { value, weight }
    }

    pub fn unit(value: f64) -> Self {
        Self { value, weight: 1.0 }
    }
}

/// How each order contributes to a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    #[default]
    None,
    Lifetime,
    Volume,
    LifetimeVolume,
}

impl Weighting {
    pub fn weight(self, record: &OrderRecord) -> f64 {
        let tau = record.lifetime_ms as f64;
        let v = record.initial_volume as f64;
        match self {
            Weighting::None => 1.0,
            Weighting::Lifetime => tau,
            Weighting::Volume => v,
            Weighting::LifetimeVolume => tau * v,
        }
    }
}

impl std::str::FromStr for Weighting {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "none" => Weighting::None,
            "lifetime" => Weighting::Lifetime,
            "volume" => Weighting::Volume,
            "lifetime-volume" => Weighting::LifetimeVolume,
            other => return Err(format!("unknown weighting `{other}`")),
        })
    }
}

/// Weighted inverse cumulative distribution `I(x) = W(value > x) / W_total`.
///
/// `total` may exceed the weight of the samples held, which gives the
/// contribution of a subset normalized to the whole population.
#[derive(Debug, Clone)]
pub struct Icdf {
    values: Vec<f64>,
    /// `tail[i]` = weight of samples at sorted positions `i..`.
    tail: Vec<f64>,
    total: f64,
}

impl Icdf {
    pub fn new(samples: &[WeightedSample]) -> Result<Self> {
        let total = checked_total(samples)?;
        if samples.is_empty() {
            return Err(AnalyticsError::NoSamples);
        }
        if total <= 0.0 {
            return Err(AnalyticsError::ZeroWeight);
        }
        Ok(Self::build(samples, total))
    }

    /// Partial distribution of `samples` normalized by `total`.
    pub fn with_total(samples: &[WeightedSample], total: f64) -> Result<Self> {
        checked_total(samples)?;
        if !(total.is_finite() && total > 0.0) {
            return Err(AnalyticsError::ZeroWeight);
        }
        Ok(Self::build(samples, total))
    }

    fn build(samples: &[WeightedSample], total: f64) -> Self {
        let mut sorted: Vec<WeightedSample> = samples.to_vec();
        sorted.sort_by(|a, b| a.value.total_cmp(&b.value));
        let mut tail = vec![0.0; sorted.len() + 1];
        for i in (0..sorted.len()).rev() {
            tail[i] = tail[i + 1] + sorted[i].weight;
        }
        Self {
            values: sorted.iter().map(|s| s.value).collect(),
            tail,
            total,
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.total
    }

    pub fn eval(&self, x: f64) -> f64 {
        let first_above = self.values.partition_point(|&v| v <= x);
        self.tail[first_above] / self.total
    }

    /// Distinct sample values in ascending order.
    pub fn distinct_values(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.dedup();
        v
    }
}

fn checked_total(samples: &[WeightedSample]) -> Result<f64> {
    let mut total = 0.0;
    for s in samples {
        if !(s.weight.is_finite() && s.weight >= 0.0 && s.value.is_finite()) {
            return Err(AnalyticsError::BadWeight);
        }
        total += s.weight;
    }
    Ok(total)
}

/// Evaluates the icdf of `samples` at each query point.
pub fn icdf(samples: &[WeightedSample], query_points: &[f64]) -> Result<Vec<(f64, f64)>> {
    let dist = Icdf::new(samples)?;
    Ok(query_points.iter().map(|&x| (x, dist.eval(x))).collect())
}

/// Icdf evaluated at every distinct sample value.
pub fn icdf_table(samples: &[WeightedSample]) -> Result<Vec<(f64, f64)>> {
    let dist = Icdf::new(samples)?;
    Ok(dist
        .distinct_values()
        .into_iter()
        .map(|x| (x, dist.eval(x)))
        .collect())
}
