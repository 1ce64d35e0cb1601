use serde::Serialize;

use crate::feed::{EventKind, EventStream};

use super::occupation::occupation_profile;
use super::quotes::{quote_series, returns_series};
use super::{AnalyticsError, Result, Window};

/// Per-dataset characteristics used for cross-dataset scatter plots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub mean_spread_ticks: f64,
    pub mean_midpoint_half_ticks: f64,
    /// Changes of the `(bid, ask)` pair; establishing the first quote is not
    /// a change.
    pub n_quote_changes: u64,
    pub n_trades: u64,
    pub n_market_orders: u64,
    pub n_limit_orders: u64,
    /// Sum of price times volume over trades, in cents times shares.
    pub traded_capital_cents: u128,
    pub width_ticks: Option<f64>,
    pub o_max: f64,
    pub large_tick: bool,
    /// Standard deviation of one-minute midpoint log returns.
    pub volatility_1min: Option<f64>,
}

pub const LARGE_TICK_MAX_SPREAD_CENTS: f64 = 3.0;

/// Summarizes market hours of a stream. `range_half_ticks` bounds the
/// occupation profile used for the cushion width.
pub fn summarize_dataset(stream: &EventStream, range_half_ticks: i64) -> Result<DatasetSummary> {
    let window = Window::market_hours(stream);
    let quotes = quote_series(stream)?;

    let (mut t_total, mut spread_acc, mut mid_acc) = (0i64, 0f64, 0f64);
    for (q, a, z) in quotes.segments(window) {
        if let Some((bid, ask)) = q {
            let dt = z - a;
            t_total += dt;
            spread_acc += ((ask - bid) * dt) as f64;
            mid_acc += ((ask + bid) * dt) as f64;
        }
    }
    if t_total == 0 {
        return Err(AnalyticsError::NoQuoteTime);
    }
    let mean_spread_ticks = spread_acc / t_total as f64;
    let mean_midpoint_half_ticks = mid_acc / t_total as f64;

    let mut n_quote_changes = 0;
    let mut last_valid = None;
    for p in quotes.points() {
        let Some(q) = p.quote else { continue };
        if window.contains_event(p.timestamp_ms) && last_valid.is_some_and(|l| l != q) {
            n_quote_changes += 1;
        }
        last_valid = Some(q);
    }

    let mut n_trades = 0;
    let mut n_limit_orders = 0;
    let mut traded_capital_cents = 0u128;
    for e in stream
        .events
        .iter()
        .filter(|e| window.contains_event(e.timestamp_ms))
    {
        if e.kind.is_trade() {
            n_trades += 1;
            traded_capital_cents +=
                (e.price_ticks * stream.tick_size_cents) as u128 * e.volume_shares as u128;
        } else if e.kind == EventKind::Add {
            n_limit_orders += 1;
        }
    }

    let profile = occupation_profile(stream, window, range_half_ticks)?;

    let returns = returns_series(&quotes, window, 60_000, 60_000)?;
    let volatility_1min = (returns.len() >= 2).then(|| {
        let n = returns.len() as f64;
        let mean = returns.iter().map(|r| r.r).sum::<f64>() / n;
        (returns.iter().map(|r| (r.r - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    });

    Ok(DatasetSummary {
        mean_spread_ticks,
        mean_midpoint_half_ticks,
        n_quote_changes,
        n_trades,
        n_market_orders: count_market_orders(stream, window),
        n_limit_orders,
        traded_capital_cents,
        width_ticks: profile.width.map(|w| w.width_ticks()),
        o_max: profile.o_max,
        large_tick: mean_spread_ticks * stream.tick_size_cents as f64
            <= LARGE_TICK_MAX_SPREAD_CENTS,
        volatility_1min,
    })
}

/// Groups visible executions into market orders: a run of consecutive
/// EXECUTE / EXECUTE_PARTIAL events with one timestamp and one resting side
/// is one market order.
pub fn count_market_orders(stream: &EventStream, window: Window) -> u64 {
    let mut count = 0;
    let mut prev: Option<(i64, crate::feed::Side)> = None;
    for e in &stream.events {
        if matches!(e.kind, EventKind::Execute | EventKind::ExecutePartial) {
            let key = (e.timestamp_ms, e.side);
            if prev != Some(key) && window.contains_event(e.timestamp_ms) {
                count += 1;
            }
            prev = Some(key);
        } else {
            prev = None;
        }
    }
    count
}
