#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use lob_cushion::feed::{EventKind, OrderEvent, Side};
use rand::Rng;

/// Naive order book: a flat list of live orders, rescanned for every query.
#[derive(Default)]
pub struct NaiveBook {
    pub live: Vec<(u64, Side, i64, u64)>,
}

impl NaiveBook {
    pub fn best(&self, side: Side) -> Option<i64> {
        let prices = self.live.iter().filter(|o| o.1 == side).map(|o| o.2);
        match side {
            Side::Buy => prices.max(),
            Side::Sell => prices.min(),
        }
    }

    pub fn levels(&self, side: Side) -> BTreeMap<i64, u64> {
        let mut m = BTreeMap::new();
        for o in self.live.iter().filter(|o| o.1 == side) {
            *m.entry(o.2).or_default() += o.3;
        }
        m
    }
}

/// Generates `n` events that are valid against an initially empty book.
/// Prices wander in a band so levels collide often.
pub struct EventFuzzer<R: Rng> {
    rng: R,
    pub naive: NaiveBook,
    /// Index of each live order in `naive.live`.
    slot: HashMap<u64, usize>,
    next_id: u64,
    clock: i64,
}

impl<R: Rng> EventFuzzer<R> {
    pub fn new(rng: R) -> Self {
        Self {
            rng,
            naive: NaiveBook::default(),
            slot: HashMap::new(),
            next_id: 1,
            clock: 0,
        }
    }

    fn remove_slot(&mut self, i: usize) {
        let (id, ..) = self.naive.live.swap_remove(i);
        self.slot.remove(&id);
        if let Some(moved) = self.naive.live.get(i) {
            self.slot.insert(moved.0, i);
        }
    }

    pub fn next_event(&mut self) -> OrderEvent {
        self.clock += self.rng.random_range(0..3);
        let t = self.clock;
        let roll = self.rng.random_range(0..100);
        if self.naive.live.is_empty() || roll < 45 {
            let mut side = if self.rng.random_bool(0.5) { Side::Buy } else { Side::Sell };
            let mut price = self.rng.random_range(80..=120);
            let cap = |s: Side, p: i64, nb: &NaiveBook| match s {
                Side::Buy => nb.best(Side::Sell).map_or(p, |a| p.min(a - 1)),
                Side::Sell => nb.best(Side::Buy).map_or(p, |b| p.max(b + 1)),
            };
            price = cap(side, price, &self.naive);
            if price < 1 {
                side = Side::Sell;
                price = cap(side, 1, &self.naive);
            }
            let vol = self.rng.random_range(1..=500);
            let id = self.next_id;
            self.next_id += 1;
            self.slot.insert(id, self.naive.live.len());
            self.naive.live.push((id, side, price, vol));
            return OrderEvent::new(t, EventKind::Add, id, side, price, vol);
        }
        if roll < 50 {
            let side = if self.rng.random_bool(0.5) { Side::Buy } else { Side::Sell };
            let price = self.rng.random_range(80..=120);
            return OrderEvent::new(t, EventKind::HiddenTrade, 0, side, price, self.rng.random_range(1..=100));
        }
        let i = self.rng.random_range(0..self.naive.live.len());
        let (id, side, price, rem) = self.naive.live[i];
        let partial = rem > 1 && self.rng.random_bool(0.4);
        let execute = self.rng.random_bool(0.3);
        if partial {
            let v = self.rng.random_range(1..rem);
            self.naive.live[i].3 -= v;
            let kind = if execute { EventKind::ExecutePartial } else { EventKind::CancelPartial };
            OrderEvent::new(t, kind, id, side, price, v)
        } else {
            self.remove_slot(i);
            let kind = if execute { EventKind::Execute } else { EventKind::Cancel };
            OrderEvent::new(t, kind, id, side, price, rem)
        }
    }
}
