use std::collections::HashMap;

use crate::book::BookState;
use crate::feed::{EventKind, EventStream, Side};

use super::{AnalyticsError, Result};

/// Insertion and removal facts for one limit order.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderRecord {
    pub order_id: u64,
    pub side: Side,
    pub price_ticks: i64,
    pub insertion_time_ms: i64,
    pub initial_volume: u64,
    pub removal_time_ms: Option<i64>,
    /// Removal minus insertion, or session end minus insertion when censored.
    /// Zero means "less than one millisecond".
    pub lifetime_ms: i64,
    pub censored: bool,
    pub midpoint_at_insertion_half_ticks: Option<i64>,
    /// Signed distance from the midpoint, normalized by it; positive when the
    /// order rests beyond the midpoint on its own side.
    pub relative_insertion_price: Option<f64>,
    /// Best price of the opposite side just before insertion.
    pub opposite_best_at_insertion: Option<i64>,
}

impl OrderRecord {
    /// Distance to the midpoint at insertion in half-ticks, signed like
    /// `relative_insertion_price`.
    pub fn distance_half_ticks(&self) -> Option<i64> {
        let m = self.midpoint_at_insertion_half_ticks?;
        let p2 = 2 * self.price_ticks;
        Some(match self.side {
            Side::Sell => p2 - m,
            Side::Buy => m - p2,
        })
    }

    /// Insertion level measured from the opposite best: a buy at
    /// `best_ask - (l + 1)` has level `l`. Clamped at 0.
    pub fn insertion_level(&self) -> Option<i64> {
        let opp = self.opposite_best_at_insertion?;
        let distance = match self.side {
            Side::Buy => opp - self.price_ticks,
            Side::Sell => self.price_ticks - opp,
        };
        Some((distance - 1).max(0))
    }
}

/// One record per ADD, in insertion order.
pub fn build_order_records(stream: &EventStream) -> Result<Vec<OrderRecord>> {
    let mut book = BookState::new();
    let mut records: Vec<OrderRecord> = Vec::new();
    let mut open: HashMap<u64, usize> = HashMap::new();
    for (index, e) in stream.events.iter().enumerate() {
        if e.kind == EventKind::Add {
            let quote = book.bid_ask();
            let midpoint = quote.map(|(b, a)| a + b);
            let rel = midpoint.map(|m| {
                let p2 = 2 * e.price_ticks;
                let signed = match e.side {
                    Side::Sell => p2 - m,
                    Side::Buy => m - p2,
                };
                signed as f64 / m as f64
            });
            open.insert(e.order_id, records.len());
            records.push(OrderRecord {
                order_id: e.order_id,
                side: e.side,
                price_ticks: e.price_ticks,
                insertion_time_ms: e.timestamp_ms,
                initial_volume: e.volume_shares,
                removal_time_ms: None,
                lifetime_ms: 0,
                censored: true,
                midpoint_at_insertion_half_ticks: midpoint,
                relative_insertion_price: rel,
                opposite_best_at_insertion: book.best(e.side.opposite()),
            });
        }
        book.apply_event(e)
            .map_err(|source| AnalyticsError::Integrity { index, source })?;
        if matches!(e.kind, EventKind::Cancel | EventKind::Execute) {
            if let Some(i) = open.remove(&e.order_id) {
                let r = &mut records[i];
                r.removal_time_ms = Some(e.timestamp_ms);
                r.lifetime_ms = e.timestamp_ms - r.insertion_time_ms;
                r.censored = false;
            }
        }
    }
    for &i in open.values() {
        let r = &mut records[i];
        r.lifetime_ms = stream.session_end_ms - r.insertion_time_ms;
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    Cushion,
    DistantField,
    Unclassified,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Cushion => "cushion",
            Regime::DistantField => "distant_field",
            Regime::Unclassified => "unclassified",
        }
    }
}

/// Cushion when the insertion distance to the midpoint, in cents, is at most
/// half the cushion width.
pub fn classify_regime(record: &OrderRecord, width_ticks: f64, tick_cents: i64) -> Regime {
    let (Some(rel), Some(m_half)) = (
        record.relative_insertion_price,
        record.midpoint_at_insertion_half_ticks,
    ) else {
        return Regime::Unclassified;
    };
    let midpoint_cents = m_half as f64 / 2.0 * tick_cents as f64;
    let distance_cents = rel * midpoint_cents;
    let half_width_cents = width_ticks * tick_cents as f64 / 2.0;
    // relative slack absorbs the rounding of rel * m on the boundary
    if distance_cents <= half_width_cents + 1e-9 * half_width_cents.abs().max(1.0) {
        Regime::Cushion
    } else {
        Regime::DistantField
    }
}
