//! Visible limit order book state.
//!
//! Levels are kept per side in price order, each holding a FIFO queue of
//! resting orders with a cached total. Best bid and ask are cached so quote
//! access is constant time.

use std::collections::{BTreeMap, HashMap, VecDeque};

use thiserror::Error;

use crate::feed::{EventKind, OrderEvent, Side};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BookError {
    #[error("unknown order_id {order_id}")]
    UnknownOrder { order_id: u64 },
    #[error("duplicate add for order_id {order_id}")]
    DuplicateOrder { order_id: u64 },
    #[error("partial reduction of {requested} on order_id {order_id} with {remaining} remaining")]
    OversizedReduction {
        order_id: u64,
        requested: u64,
        remaining: u64,
    },
    #[error("full removal of order_id {order_id} carries {requested} shares but {remaining} remain")]
    VolumeMismatch {
        order_id: u64,
        requested: u64,
        remaining: u64,
    },
    #[error("order_id {order_id} rests as {expected_side:?}@{expected_price}, event says {side:?}@{price}")]
    Mismatch {
        order_id: u64,
        expected_side: Side,
        expected_price: i64,
        side: Side,
        price: i64,
    },
    #[error("add of order_id {order_id} ({side:?}@{price}) would lock or cross opposite best {opposite_best}")]
    CrossingAdd {
        order_id: u64,
        side: Side,
        price: i64,
        opposite_best: i64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiveOrder {
    pub side: Side,
    pub price_ticks: i64,
    pub remaining_volume: u64,
    pub insertion_time_ms: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PriceLevel {
    queue: VecDeque<(u64, u64)>,
    total: u64,
}

impl PriceLevel {
    pub fn total_volume(&self) -> u64 {
        self.total
    }

    pub fn order_count(&self) -> usize {
        self.queue.len()
    }

    /// Resting orders in time priority as `(order_id, remaining_volume)`.
    pub fn orders(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.queue.iter().copied()
    }

    fn position(&self, order_id: u64) -> Option<usize> {
        self.queue.iter().position(|&(id, _)| id == order_id)
    }
}

/// Best bid/ask with derived spread and midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuoteSnapshot {
    pub timestamp_ms: i64,
    pub best_bid_ticks: i64,
    pub best_ask_ticks: i64,
    pub spread_ticks: i64,
    /// Midpoint in half-ticks, i.e. `bid + ask`.
    pub midpoint_half_ticks: i64,
}

impl QuoteSnapshot {
    pub fn from_quotes(timestamp_ms: i64, bid: i64, ask: i64) -> Self {
        Self {
            timestamp_ms,
            best_bid_ticks: bid,
            best_ask_ticks: ask,
            spread_ticks: ask - bid,
            midpoint_half_ticks: ask + bid,
        }
    }

    pub fn midpoint_ticks(&self) -> f64 {
        self.midpoint_half_ticks as f64 / 2.0
    }
}

/// One occupied level inside a depth window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DepthLevel {
    /// `2 * price - center`, in half-ticks.
    pub rel_half_ticks: i64,
    pub side: Side,
    pub volume: u64,
    pub order_count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BookState {
    bids: BTreeMap<i64, PriceLevel>,
    asks: BTreeMap<i64, PriceLevel>,
    live: HashMap<u64, LiveOrder>,
    best_bid: Option<i64>,
    best_ask: Option<i64>,
}

impl BookState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn best_bid(&self) -> Option<i64> {
        self.best_bid
    }

    pub fn best_ask(&self) -> Option<i64> {
        self.best_ask
    }

    pub fn best(&self, side: Side) -> Option<i64> {
        match side {
            Side::Buy => self.best_bid,
            Side::Sell => self.best_ask,
        }
    }

    pub fn bid_ask(&self) -> Option<(i64, i64)> {
        Some((self.best_bid?, self.best_ask?))
    }

    pub fn live_order(&self, order_id: u64) -> Option<&LiveOrder> {
        self.live.get(&order_id)
    }

    pub fn live_order_count(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    pub fn side_levels(&self, side: Side) -> &BTreeMap<i64, PriceLevel> {
        match side {
            Side::Buy => &self.bids,
            Side::Sell => &self.asks,
        }
    }

    pub fn level(&self, side: Side, price_ticks: i64) -> Option<&PriceLevel> {
        self.side_levels(side).get(&price_ticks)
    }

    /// Total visible volume at a price, 0 when unoccupied.
    pub fn volume_at(&self, price_ticks: i64) -> u64 {
        self.bids
            .get(&price_ticks)
            .or_else(|| self.asks.get(&price_ticks))
            .map_or(0, PriceLevel::total_volume)
    }

    /// Current quote; `None` while either side is empty.
    pub fn quote(&self, timestamp_ms: i64) -> Option<QuoteSnapshot> {
        let (bid, ask) = self.bid_ask()?;
        Some(QuoteSnapshot::from_quotes(timestamp_ms, bid, ask))
    }

    /// Occupied levels with `|2 * price - center| <= 2 * half_window_ticks`,
    /// ascending in price.
    pub fn depth_snapshot(&self, center_half_ticks: i64, half_window_ticks: i64) -> Vec<DepthLevel> {
        let half = 2 * half_window_ticks;
        // smallest price p with 2p >= center - half, largest with 2p <= center + half
        let lo = (center_half_ticks - half).div_euclid(2) + i64::from((center_half_ticks - half).rem_euclid(2) != 0);
        let hi = (center_half_ticks + half).div_euclid(2);
        let mut out = Vec::new();
        if lo > hi {
            return out;
        }
        let mut push = |side: Side, price: i64, level: &PriceLevel| {
            out.push(DepthLevel {
                rel_half_ticks: 2 * price - center_half_ticks,
                side,
                volume: level.total,
                order_count: level.queue.len(),
            })
        };
        for (&p, level) in self.bids.range(lo..=hi) {
            push(Side::Buy, p, level);
        }
        for (&p, level) in self.asks.range(lo..=hi) {
            push(Side::Sell, p, level);
        }
        out.sort_by_key(|d| d.rel_half_ticks);
        out
    }

    /// Applies one event. On error the book is left untouched.
    pub fn apply_event(&mut self, event: &OrderEvent) -> Result<(), BookError> {
        match event.kind {
            EventKind::HiddenTrade => Ok(()),
            EventKind::Add => self.add(event),
            EventKind::Cancel | EventKind::Execute => {
                let order = self.check_reference(event)?;
                if event.volume_shares != order.remaining_volume {
                    return Err(BookError::VolumeMismatch {
                        order_id: event.order_id,
                        requested: event.volume_shares,
                        remaining: order.remaining_volume,
                    });
                }
                self.remove(event.order_id, order);
                Ok(())
            }
            EventKind::CancelPartial | EventKind::ExecutePartial => {
                let order = self.check_reference(event)?;
                if event.volume_shares >= order.remaining_volume {
                    return Err(BookError::OversizedReduction {
                        order_id: event.order_id,
                        requested: event.volume_shares,
                        remaining: order.remaining_volume,
                    });
                }
                self.reduce(event.order_id, order, event.volume_shares);
                Ok(())
            }
        }
    }

    fn check_reference(&self, event: &OrderEvent) -> Result<LiveOrder, BookError> {
        let order = *self
            .live
            .get(&event.order_id)
            .ok_or(BookError::UnknownOrder {
                order_id: event.order_id,
            })?;
        if order.side != event.side || order.price_ticks != event.price_ticks {
            return Err(BookError::Mismatch {
                order_id: event.order_id,
                expected_side: order.side,
                expected_price: order.price_ticks,
                side: event.side,
                price: event.price_ticks,
            });
        }
        Ok(order)
    }

    fn add(&mut self, event: &OrderEvent) -> Result<(), BookError> {
        if self.live.contains_key(&event.order_id) {
            return Err(BookError::DuplicateOrder {
                order_id: event.order_id,
            });
        }
        let price = event.price_ticks;
        let crosses = match event.side {
            Side::Buy => self.best_ask.filter(|&ask| price >= ask),
            Side::Sell => self.best_bid.filter(|&bid| price <= bid),
        };
        if let Some(opposite_best) = crosses {
            return Err(BookError::CrossingAdd {
                order_id: event.order_id,
                side: event.side,
                price,
                opposite_best,
            });
        }
        self.live.insert(
            event.order_id,
            LiveOrder {
                side: event.side,
                price_ticks: price,
                remaining_volume: event.volume_shares,
                insertion_time_ms: event.timestamp_ms,
            },
        );
        let level = self.levels_mut(event.side).entry(price).or_default();
        level.queue.push_back((event.order_id, event.volume_shares));
        level.total += event.volume_shares;
        match event.side {
            Side::Buy => {
                if self.best_bid.is_none_or(|b| price > b) {
                    self.best_bid = Some(price);
                }
            }
            Side::Sell => {
                if self.best_ask.is_none_or(|a| price < a) {
                    self.best_ask = Some(price);
                }
            }
        }
        Ok(())
    }

    fn reduce(&mut self, order_id: u64, order: LiveOrder, by: u64) {
        let level = self
            .levels_mut(order.side)
            .get_mut(&order.price_ticks)
            .expect("live order has a level");
        let pos = level.position(order_id).expect("live order is queued");
        level.queue[pos].1 -= by;
        level.total -= by;
        self.live
            .get_mut(&order_id)
            .expect("checked above")
            .remaining_volume -= by;
    }

    fn remove(&mut self, order_id: u64, order: LiveOrder) {
        self.live.remove(&order_id);
        let levels = self.levels_mut(order.side);
        let level = levels
            .get_mut(&order.price_ticks)
            .expect("live order has a level");
        let pos = level.position(order_id).expect("live order is queued");
        let (_, vol) = level.queue.remove(pos).expect("position is valid");
        level.total -= vol;
        if level.queue.is_empty() {
            levels.remove(&order.price_ticks);
            match order.side {
                Side::Buy => {
                    if self.best_bid == Some(order.price_ticks) {
                        self.best_bid = self.bids.last_key_value().map(|(&p, _)| p);
                    }
                }
                Side::Sell => {
                    if self.best_ask == Some(order.price_ticks) {
                        self.best_ask = self.asks.first_key_value().map(|(&p, _)| p);
                    }
                }
            }
        }
    }

    fn levels_mut(&mut self, side: Side) -> &mut BTreeMap<i64, PriceLevel> {
        match side {
            Side::Buy => &mut self.bids,
            Side::Sell => &mut self.asks,
        }
    }
}
