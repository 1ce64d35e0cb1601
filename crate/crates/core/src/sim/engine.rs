use std::collections::{BTreeSet, HashMap};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::book::BookState;
use crate::feed::{validate_stream, EventKind, EventStream, OrderEvent, Side};

use super::{SimError, SimParams, Variant};

/// Generator family behind every simulation. Streams are reproducible for a
/// given seed only within this family.
pub const RNG_FAMILY: &str = "ChaCha8";

/// Insertion-level probabilities `P_0..P_{L-1}`.
pub fn level_probabilities(params: &SimParams) -> Vec<f64> {
    let l = params.levels;
    match params.variant {
        Variant::UniformAll => vec![1.0 / l as f64; l],
        Variant::Full | Variant::UniformLifetime => {
            let raw: Vec<f64> = (0..l)
                .map(|i| (-(i as f64) / params.level_scale).exp())
                .collect();
            let z: f64 = raw.iter().sum();
            raw.into_iter().map(|p| p / z).collect()
        }
    }
}

/// Lifetime in ms of a limit order placed on level `level`.
pub fn lifetime_for_level(params: &SimParams, level: usize) -> f64 {
    match params.variant {
        Variant::Full => {
            params.base_lifetime_ms * (level as f64 / params.lifetime_level_scale).exp()
        }
        Variant::UniformLifetime | Variant::UniformAll => params.uniform_lifetime_ms,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SimCounters {
    pub initial_orders: u64,
    pub market_orders: u64,
    pub market_orders_skipped: u64,
    /// Resting orders consumed by market orders.
    pub executions: u64,
    pub limit_orders: u64,
    pub limit_orders_skipped: u64,
    pub cancellations: u64,
}

/// Outcome of one order draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Draw {
    Market { side: Side, consumed: usize },
    MarketSkipped { side: Side },
    Limit { side: Side, level: usize, order_id: u64, price_ticks: i64 },
    LimitSkipped { side: Side, level: usize },
}

impl Draw {
    /// The random choices alone: side, market flag and level.
    pub fn choices(&self) -> (Side, bool, Option<usize>) {
        match *self {
            Draw::Market { side, .. } | Draw::MarketSkipped { side } => (side, true, None),
            Draw::Limit { side, level, .. } | Draw::LimitSkipped { side, level } => {
                (side, false, Some(level))
            }
        }
    }
}

/// Mutable model state. Every live order has exactly one entry in
/// `pending`, keyed by `(expiry_ms, order_id)`.
pub struct SimState {
    params: SimParams,
    book: BookState,
    clock_ms: i64,
    pending: BTreeSet<(i64, u64)>,
    expiry_of: HashMap<u64, i64>,
    next_order_index: u64,
    next_order_id: u64,
    events: Vec<OrderEvent>,
    counters: SimCounters,
    level_dist: WeightedIndex<f64>,
    rng: ChaCha8Rng,
}

impl SimState {
    /// Fills ticks `S0-1..S0-L` with buys and `S0+1..S0+L` with sells, all
    /// expiring after the initial lifetime.
    pub fn init_book_state(params: &SimParams) -> Result<Self, SimError> {
        params.validate()?;
        let level_dist = WeightedIndex::new(level_probabilities(params))
            .map_err(|e| SimError::InvalidParams(format!("level distribution: {e}")))?;
        let mut st = SimState {
            params: params.clone(),
            book: BookState::new(),
            clock_ms: 0,
            pending: BTreeSet::new(),
            expiry_of: HashMap::new(),
            next_order_index: 0,
            next_order_id: 1,
            events: Vec::new(),
            counters: SimCounters::default(),
            level_dist,
            rng: ChaCha8Rng::seed_from_u64(params.seed),
        };
        let s0 = params.start_price_ticks;
        for d in 1..=params.levels as i64 {
            for (side, price) in [(Side::Buy, s0 - d), (Side::Sell, s0 + d)] {
                for _ in 0..params.initial_orders_per_tick {
                    st.add(side, price, params.initial_lifetime_ms)?;
                    st.counters.initial_orders += 1;
                }
            }
        }
        Ok(st)
    }

    pub fn book(&self) -> &BookState {
        &self.book
    }

    pub fn clock_ms(&self) -> i64 {
        self.clock_ms
    }

    pub fn counters(&self) -> SimCounters {
        self.counters
    }

    pub fn events(&self) -> &[OrderEvent] {
        &self.events
    }

    pub fn pending_cancellations(&self) -> usize {
        self.pending.len()
    }

    pub fn remaining_draws(&self) -> u64 {
        self.params.n_orders - self.next_order_index
    }

    fn emit(&mut self, e: OrderEvent) -> Result<(), SimError> {
        self.book
            .apply_event(&e)
            .map_err(|err| SimError::Invariant(format!("{e}: {err}")))?;
        if let Some((bid, ask)) = self.book.bid_ask() {
            if bid >= ask {
                return Err(SimError::Invariant(format!("crossed book after {e}")));
            }
        }
        self.events.push(e);
        Ok(())
    }

    fn add(&mut self, side: Side, price: i64, expiry_ms: i64) -> Result<u64, SimError> {
        let id = self.next_order_id;
        self.next_order_id += 1;
        let vol = self.params.order_volume_shares;
        self.emit(OrderEvent::new(self.clock_ms, EventKind::Add, id, side, price, vol))?;
        self.pending.insert((expiry_ms, id));
        self.expiry_of.insert(id, expiry_ms);
        Ok(id)
    }

    fn cancel(&mut self, id: u64, at_ms: i64) -> Result<(), SimError> {
        let o = *self
            .book
            .live_order(id)
            .ok_or_else(|| SimError::Invariant(format!("pending cancel of dead order {id}")))?;
        self.emit(OrderEvent::new(
            at_ms,
            EventKind::Cancel,
            id,
            o.side,
            o.price_ticks,
            o.remaining_volume,
        ))?;
        self.counters.cancellations += 1;
        Ok(())
    }

    fn process_cancellations_until(&mut self, t: i64) -> Result<(), SimError> {
        while let Some(&(exp, id)) = self.pending.first() {
            if exp > t {
                break;
            }
            self.pending.pop_first();
            self.expiry_of.remove(&id);
            self.cancel(id, exp)?;
        }
        Ok(())
    }

    /// Advances the clock to the next arrival, cancels everything due, then
    /// draws and places one order.
    pub fn step(&mut self) -> Result<Draw, SimError> {
        if self.next_order_index >= self.params.n_orders {
            return Err(SimError::Invariant("no draws left".into()));
        }
        let k = self.next_order_index + 1;
        let (n, t) = (self.params.n_orders, self.params.session_ms);
        let arrival = (k as i128 * t as i128 / n as i128) as i64;
        self.process_cancellations_until(arrival)?;
        self.clock_ms = arrival;
        self.next_order_index = k;

        let side = if self.rng.random_bool(0.5) { Side::Buy } else { Side::Sell };
        let is_market = self.rng.random_bool(self.params.p_market);
        if is_market {
            return self.market_order(side);
        }
        let level = self.level_dist.sample(&mut self.rng);

        let price = match side {
            Side::Buy => self.book.best_ask().map(|a| a - (level as i64 + 1)),
            Side::Sell => self.book.best_bid().map(|b| b + (level as i64 + 1)),
        };
        let Some(price) = price.filter(|&p| p > 0) else {
            self.counters.limit_orders_skipped += 1;
            return Ok(Draw::LimitSkipped { side, level });
        };
        // expiry from the unrounded insertion time, rounded once
        let exact_insert = k as f64 * t as f64 / n as f64;
        let expiry = (exact_insert + lifetime_for_level(&self.params, level)).floor() as i64;
        let order_id = self.add(side, price, expiry)?;
        self.counters.limit_orders += 1;
        Ok(Draw::Limit {
            side,
            level,
            order_id,
            price_ticks: price,
        })
    }

    /// A buy consumes the whole best ask level, a sell the whole best bid.
    fn market_order(&mut self, side: Side) -> Result<Draw, SimError> {
        let resting = side.opposite();
        let Some(best) = self.book.best(resting) else {
            self.counters.market_orders_skipped += 1;
            return Ok(Draw::MarketSkipped { side });
        };
        let queue: Vec<(u64, u64)> = self
            .book
            .level(resting, best)
            .map(|l| l.orders().collect())
            .unwrap_or_default();
        for &(id, vol) in &queue {
            self.emit(OrderEvent::new(
                self.clock_ms,
                EventKind::Execute,
                id,
                resting,
                best,
                vol,
            ))?;
            if let Some(exp) = self.expiry_of.remove(&id) {
                self.pending.remove(&(exp, id));
            }
        }
        self.counters.market_orders += 1;
        self.counters.executions += queue.len() as u64;
        Ok(Draw::Market {
            side,
            consumed: queue.len(),
        })
    }

    /// Cancels every remaining order at its expiry, capped at the session end.
    pub fn drain(&mut self) -> Result<(), SimError> {
        let t_end = self.params.session_ms;
        while let Some((exp, id)) = self.pending.pop_first() {
            self.expiry_of.remove(&id);
            self.cancel(id, exp.min(t_end))?;
        }
        Ok(())
    }

    pub fn into_stream(self) -> EventStream {
        EventStream::new(self.events, 1, 0, self.params.session_ms)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub rng_family: &'static str,
    pub params: SimParams,
    pub counters: SimCounters,
    pub n_events: usize,
}

pub struct SimOutput {
    pub stream: EventStream,
    pub report: RunReport,
}

/// Initial book, `N` draws and the final drain. The emitted stream is
/// validated before it is returned.
pub fn run_simulation(params: &SimParams) -> Result<SimOutput, SimError> {
    let mut st = SimState::init_book_state(params)?;
    while st.remaining_draws() > 0 {
        st.step()?;
    }
    st.drain()?;
    let counters = st.counters;
    let stream = st.into_stream();
    let report = validate_stream(&stream);
    if !report.is_ok() {
        return Err(SimError::Invariant(format!("emitted stream is invalid: {report}")));
    }
    Ok(SimOutput {
        report: RunReport {
            rng_family: RNG_FAMILY,
            params: params.clone(),
            counters,
            n_events: stream.events.len(),
        },
        stream,
    })
}
