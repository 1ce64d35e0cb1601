//! Simulate, reconstruct, analyze and fit in one pass, then compare the
//! fitted model constants with the configured ones.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::analytics::{
    self, average_filling, build_order_records, count_market_orders, excess_kurtosis,
    fit_exponential_loglinear, level_statistics, occupation_profile, quote_series,
    returns_series, spread_histogram, AnalyticsError, ExpDirection, Window,
};
use crate::feed::{validate_stream, EventKind, EventStream};
use crate::sim::{run_simulation, RunReport, SimError, SimParams};

#[derive(Debug, Error)]
#[error("{stage}: {cause}")]
pub struct RoundtripError {
    pub stage: &'static str,
    pub cause: String,
}

impl RoundtripError {
    fn at(stage: &'static str) -> impl FnOnce(AnalyticsError) -> RoundtripError {
        move |e| RoundtripError {
            stage,
            cause: e.to_string(),
        }
    }
}

impl From<SimError> for RoundtripError {
    fn from(e: SimError) -> Self {
        RoundtripError {
            stage: "simulate",
            cause: e.to_string(),
        }
    }
}

/// One configured constant next to its estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Recovered {
    pub configured: f64,
    pub fitted: f64,
    pub relative_error: f64,
}

impl Recovered {
    fn new(configured: f64, fitted: f64) -> Self {
        let relative_error = if configured == 0.0 {
            fitted.abs()
        } else {
            (fitted - configured).abs() / configured.abs()
        };
        Self {
            configured,
            fitted,
            relative_error,
        }
    }
}

/// Estimates of the model constants from an event stream alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FittedModel {
    pub level_scale: f64,
    pub base_lifetime_ms: f64,
    pub lifetime_level_scale: f64,
    pub market_share: f64,
    pub market_orders: u64,
    pub limit_orders: u64,
    pub width_ticks: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundtripReport {
    pub run: RunReport,
    pub level_scale: Recovered,
    pub base_lifetime_ms: Recovered,
    pub lifetime_level_scale: Recovered,
    pub market_share: Recovered,
    pub width_ticks: Option<f64>,
    /// Time-weighted spread frequencies by spread in ticks.
    pub spread_frequencies: BTreeMap<i64, f64>,
    /// Mean resting orders per insertion level, sampled each second.
    pub average_filling: Vec<f64>,
    pub return_excess_kurtosis_1s: Option<f64>,
    pub n_returns_1s: usize,
}

/// Occupation range used for the cushion width: 100 ticks either side.
pub const WIDTH_RANGE_HALF_TICKS: i64 = 200;

/// Fits `l0`, `t_lt`, `l_lt` and the market-order share from a stream.
///
/// Level counts and mean lifetimes come from limit orders whose insertion
/// level (distance from the opposite best) is below `n_levels`. Orders placed
/// at the session start are left out: they form the seeded initial book and
/// were not drawn from the level distribution.
/// Market orders are runs of executions sharing a timestamp and side; the
/// share divides them by market plus limit orders, again without the
/// initial book.
pub fn fit_model(stream: &EventStream, n_levels: usize) -> Result<FittedModel, RoundtripError> {
    let mut records = build_order_records(stream).map_err(RoundtripError::at("reconstruct"))?;
    records.retain(|r| r.insertion_time_ms > stream.session_start_ms);
    let stats = level_statistics(&records, n_levels);
    let counts = fit_exponential_loglinear(&stats.count_points())
        .map_err(RoundtripError::at("fit level counts"))?;
    let lifetimes = fit_exponential_loglinear(&stats.lifetime_points())
        .map_err(RoundtripError::at("fit level lifetimes"))?;
    let signed = |f: &analytics::ExpFit, want: ExpDirection| match f.direction == want {
        true => f.scale,
        false => -f.scale,
    };

    let window = Window::market_hours(stream);
    let market_orders = count_market_orders(stream, window);
    let limit_orders = stream
        .events
        .iter()
        .filter(|e| {
            e.kind == EventKind::Add
                && e.timestamp_ms > stream.session_start_ms
                && window.contains_event(e.timestamp_ms)
        })
        .count() as u64;
    let total = market_orders + limit_orders;
    let market_share = if total == 0 {
        0.0
    } else {
        market_orders as f64 / total as f64
    };
    let width_ticks = occupation_profile(stream, window, WIDTH_RANGE_HALF_TICKS)
        .map_err(RoundtripError::at("occupation"))?
        .width
        .map(|w| w.width_ticks());
    Ok(FittedModel {
        level_scale: signed(&counts, ExpDirection::Decay),
        base_lifetime_ms: lifetimes.amplitude,
        lifetime_level_scale: signed(&lifetimes, ExpDirection::Growth),
        market_share,
        market_orders,
        limit_orders,
        width_ticks,
    })
}

pub fn run_roundtrip(params: &SimParams) -> Result<RoundtripReport, RoundtripError> {
    let out = run_simulation(params)?;
    let stream = out.stream;
    let check = validate_stream(&stream);
    if !check.is_ok() {
        return Err(RoundtripError {
            stage: "validate",
            cause: check.to_string(),
        });
    }
    let fitted = fit_model(&stream, params.levels)?;

    let window = Window::market_hours(&stream);
    let quotes = quote_series(&stream).map_err(RoundtripError::at("reconstruct"))?;
    let spread_frequencies =
        spread_histogram(&quotes, window).map_err(RoundtripError::at("spread"))?;
    let returns: Vec<f64> = returns_series(&quotes, window, 1000, 1000)
        .map_err(RoundtripError::at("returns"))?
        .into_iter()
        .map(|r| r.r)
        .collect();
    let filling = average_filling(&stream, window, 1000, params.levels)
        .map_err(RoundtripError::at("filling"))?;

    Ok(RoundtripReport {
        level_scale: Recovered::new(params.level_scale, fitted.level_scale),
        base_lifetime_ms: Recovered::new(params.base_lifetime_ms, fitted.base_lifetime_ms),
        lifetime_level_scale: Recovered::new(
            params.lifetime_level_scale,
            fitted.lifetime_level_scale,
        ),
        market_share: Recovered::new(params.p_market, fitted.market_share),
        width_ticks: fitted.width_ticks,
        spread_frequencies,
        average_filling: filling,
        return_excess_kurtosis_1s: excess_kurtosis(&returns),
        n_returns_1s: returns.len(),
        run: out.report,
    })
}
