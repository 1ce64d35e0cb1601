//! Sampled order-count and volume grids around the midpoint.

use crate::feed::{EventStream, Side};

use super::replay::Replayer;
use super::{AnalyticsError, Result, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridCell {
    pub order_count: u64,
    pub volume: u64,
}

/// Rows are sample times, columns relative-price bins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountGrid {
    pub times_ms: Vec<i64>,
    /// Lower edge of each bin in half-ticks from the midpoint.
    pub bin_starts_half_ticks: Vec<i64>,
    pub bin_width_half_ticks: i64,
    /// False where the sample had no two-sided quote; such rows stay zero.
    pub quoted: Vec<bool>,
    pub cells: Vec<Vec<GridCell>>,
}

impl CountGrid {
    pub fn row_totals(&self, row: usize) -> GridCell {
        self.cells[row].iter().fold(
            GridCell {
                order_count: 0,
                volume: 0,
            },
            |acc, c| GridCell {
                order_count: acc.order_count + c.order_count,
                volume: acc.volume + c.volume,
            },
        )
    }
}

fn sample_times(window: Window, sample_ms: i64) -> Result<Vec<i64>> {
    if sample_ms <= 0 {
        return Err(AnalyticsError::InvalidArgument(
            "sampling interval must be positive".into(),
        ));
    }
    let mut out = Vec::new();
    let mut t = window.open_ms;
    while t < window.close_ms {
        out.push(t);
        t += sample_ms;
    }
    Ok(out)
}

/// Samples the book every `sample_ms` and bins order counts and volumes by
/// relative price in `[-range_half_ticks, range_half_ticks]`, `bin_ticks`
/// price levels per bin.
pub fn order_count_grid(
    stream: &EventStream,
    window: Window,
    range_half_ticks: i64,
    sample_ms: i64,
    bin_ticks: i64,
) -> Result<CountGrid> {
    if bin_ticks <= 0 || range_half_ticks < 0 {
        return Err(AnalyticsError::InvalidArgument(
            "bin size must be positive and range non-negative".into(),
        ));
    }
    let width = 2 * bin_ticks;
    let first = (-range_half_ticks).div_euclid(width);
    let last = range_half_ticks.div_euclid(width);
    let bin_starts: Vec<i64> = (first..=last).map(|b| b * width).collect();
    let times = sample_times(window, sample_ms)?;
    let empty = GridCell {
        order_count: 0,
        volume: 0,
    };
    let mut cells = Vec::with_capacity(times.len());
    let mut quoted = Vec::with_capacity(times.len());
    let mut replay = Replayer::new(stream);
    for &t in &times {
        replay.advance_to(t)?;
        let mut row = vec![empty; bin_starts.len()];
        let book = replay.book();
        match book.bid_ask() {
            Some((bid, ask)) => {
                quoted.push(true);
                for d in book.depth_snapshot(bid + ask, (range_half_ticks + 1) / 2) {
                    if d.rel_half_ticks.abs() > range_half_ticks {
                        continue;
                    }
                    let col = (d.rel_half_ticks.div_euclid(width) - first) as usize;
                    row[col].order_count += d.order_count as u64;
                    row[col].volume += d.volume;
                }
            }
            None => quoted.push(false),
        }
        cells.push(row);
    }
    Ok(CountGrid {
        times_ms: times,
        bin_starts_half_ticks: bin_starts,
        bin_width_half_ticks: width,
        quoted,
        cells,
    })
}

/// Mean number of resting orders per insertion level `0..n_levels`, averaged
/// over quoted samples and over both sides. A buy at price `p` sits on level
/// `best_ask - p - 1`, a sell on `p - best_bid - 1`.
pub fn average_filling(
    stream: &EventStream,
    window: Window,
    sample_ms: i64,
    n_levels: usize,
) -> Result<Vec<f64>> {
    let mut sums = vec![0u64; n_levels];
    let mut samples = 0u64;
    let mut replay = Replayer::new(stream);
    let n = n_levels as i64;
    for t in sample_times(window, sample_ms)? {
        replay.advance_to(t)?;
        let book = replay.book();
        let Some((bid, ask)) = book.bid_ask() else {
            continue;
        };
        samples += 1;
        for (&p, level) in book.side_levels(Side::Buy).range(ask - n..ask) {
            sums[(ask - p - 1) as usize] += level.order_count() as u64;
        }
        for (&p, level) in book.side_levels(Side::Sell).range(bid + 1..=bid + n) {
            sums[(p - bid - 1) as usize] += level.order_count() as u64;
        }
    }
    if samples == 0 {
        return Err(AnalyticsError::NoQuoteTime);
    }
    Ok(sums
        .into_iter()
        .map(|s| s as f64 / (2 * samples) as f64)
        .collect())
}
