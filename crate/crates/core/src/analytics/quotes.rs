use std::collections::BTreeMap;

use crate::book::{BookState, QuoteSnapshot};
use crate::feed::EventStream;

use super::{AnalyticsError, Result, Window};

/// Quote state after an event that changed it; `None` while one-sided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuotePoint {
    pub timestamp_ms: i64,
    pub quote: Option<(i64, i64)>,
}

/// Every change of `(best_bid, best_ask)` in stream order. Before the first
/// point the book is empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuoteSeries {
    points: Vec<QuotePoint>,
}

impl QuoteSeries {
    pub fn from_points(points: Vec<QuotePoint>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[QuotePoint] {
        &self.points
    }

    /// Valid quotes in order, one per change.
    pub fn snapshots(&self) -> impl Iterator<Item = QuoteSnapshot> + '_ {
        self.points
            .iter()
            .filter_map(|p| p.quote.map(|(b, a)| QuoteSnapshot::from_quotes(p.timestamp_ms, b, a)))
    }

    /// Latest state at or before `t`.
    pub fn at(&self, t: i64) -> Option<QuoteSnapshot> {
        let idx = self.points.partition_point(|p| p.timestamp_ms <= t);
        let p = self.points[..idx].last()?;
        p.quote
            .map(|(b, a)| QuoteSnapshot::from_quotes(p.timestamp_ms, b, a))
    }

    /// Piecewise-constant quote states clipped to `window` as
    /// `(quote, start, end)` with `end > start`.
    pub fn segments(&self, window: Window) -> Vec<(Option<(i64, i64)>, i64, i64)> {
        let mut out = Vec::new();
        let mut state = None;
        let mut since = i64::MIN;
        let emit = |q: Option<(i64, i64)>, a: i64, z: i64, out: &mut Vec<_>| {
            let a = a.max(window.open_ms);
            let z = z.min(window.close_ms);
            if z > a {
                out.push((q, a, z));
            }
        };
        for p in &self.points {
            emit(state, since, p.timestamp_ms, &mut out);
            state = p.quote;
            since = p.timestamp_ms;
        }
        emit(state, since, i64::MAX, &mut out);
        out
    }
}

/// Replays the stream and records every change of the quote pair.
pub fn quote_series(stream: &EventStream) -> Result<QuoteSeries> {
    let mut book = BookState::new();
    let mut points = Vec::new();
    let mut last = None;
    for (index, e) in stream.events.iter().enumerate() {
        book.apply_event(e)
            .map_err(|source| AnalyticsError::Integrity { index, source })?;
        let q = book.bid_ask();
        if q != last {
            points.push(QuotePoint {
                timestamp_ms: e.timestamp_ms,
                quote: q,
            });
            last = q;
        }
    }
    Ok(QuoteSeries { points })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnSample {
    pub t_ms: i64,
    pub r: f64,
}

/// Log midpoint returns `ln(m(t + delta) / m(t))` on the grid
/// `open + k * sample_ms`, skipping samples without a quote at either end.
pub fn returns_series(
    quotes: &QuoteSeries,
    window: Window,
    delta_ms: i64,
    sample_ms: i64,
) -> Result<Vec<ReturnSample>> {
    if delta_ms <= 0 || sample_ms <= 0 {
        return Err(AnalyticsError::InvalidArgument(
            "delta and sampling interval must be positive".into(),
        ));
    }
    let mut out = Vec::new();
    let mut t = window.open_ms;
    while t + delta_ms <= window.close_ms {
        if let (Some(a), Some(b)) = (quotes.at(t), quotes.at(t + delta_ms)) {
            out.push(ReturnSample {
                t_ms: t,
                r: (b.midpoint_half_ticks as f64 / a.midpoint_half_ticks as f64).ln(),
            });
        }
        t += sample_ms;
    }
    Ok(out)
}

/// Fraction of quote-valid window time spent at each spread.
pub fn spread_histogram(quotes: &QuoteSeries, window: Window) -> Result<BTreeMap<i64, f64>> {
    let mut time: BTreeMap<i64, i64> = BTreeMap::new();
    let mut total = 0i64;
    for (q, a, z) in quotes.segments(window) {
        if let Some((bid, ask)) = q {
            *time.entry(ask - bid).or_default() += z - a;
            total += z - a;
        }
    }
    if total == 0 {
        return Err(AnalyticsError::NoQuoteTime);
    }
    Ok(time
        .into_iter()
        .map(|(s, t)| (s, t as f64 / total as f64))
        .collect())
}

/// Sample excess kurtosis `m4 / m2^2 - 3`; `None` for fewer than two values
/// or zero variance.
pub fn excess_kurtosis(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &v in values {
        let d = (v - mean) * (v - mean);
        m2 += d;
        m4 += d * d;
    }
    m2 /= n;
    m4 /= n;
    (m2 > 0.0).then(|| m4 / (m2 * m2) - 3.0)
}
