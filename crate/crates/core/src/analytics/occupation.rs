//! Time-averaged occupation of price levels relative to the midpoint and the
//! liquidity-cushion width derived from it.

use std::collections::BTreeMap;

use crate::feed::EventStream;

use super::replay::for_each_segment;
use super::{AnalyticsError, Result, Window};

/// Occupation per relative level (half-ticks from the midpoint).
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationProfile {
    pub occupation: BTreeMap<i64, f64>,
    pub o_max: f64,
    pub width: Option<CushionWidth>,
    /// Window time with a valid two-sided quote.
    pub observed_time_ms: i64,
    /// Window time without one; excluded from the average.
    pub excluded_time_ms: i64,
}

impl OccupationProfile {
    /// Profile from precomputed levels, e.g. for synthetic shapes.
    pub fn from_levels(occupation: BTreeMap<i64, f64>) -> Self {
        let o_max = occupation.values().copied().fold(0.0, f64::max);
        let mut profile = Self {
            occupation,
            o_max,
            width: None,
            observed_time_ms: 0,
            excluded_time_ms: 0,
        };
        profile.width = cushion_width(&profile).ok();
        profile
    }

    pub fn get(&self, rel_half_ticks: i64) -> f64 {
        self.occupation.get(&rel_half_ticks).copied().unwrap_or(0.0)
    }

    /// Fraction of window time excluded for lack of a quote.
    pub fn excluded_fraction(&self) -> f64 {
        let total = self.observed_time_ms + self.excluded_time_ms;
        if total == 0 {
            0.0
        } else {
            self.excluded_time_ms as f64 / total as f64
        }
    }
}

/// Fraction of quote-valid window time during which each relative level in
/// `[-range_half_ticks, range_half_ticks]` holds visible volume.
pub fn occupation_profile(
    stream: &EventStream,
    window: Window,
    range_half_ticks: i64,
) -> Result<OccupationProfile> {
    if range_half_ticks < 0 {
        return Err(AnalyticsError::InvalidArgument(
            "negative occupation range".into(),
        ));
    }
    let r = range_half_ticks;
    let mut occupied = vec![0i64; (2 * r + 1) as usize];
    let mut observed = 0i64;
    let mut excluded = 0i64;
    let half_window_ticks = (r + 1) / 2;
    for_each_segment(stream, window, |book, start, end| {
        let dt = end - start;
        let Some((bid, ask)) = book.bid_ask() else {
            excluded += dt;
            return;
        };
        observed += dt;
        for level in book.depth_snapshot(bid + ask, half_window_ticks) {
            if level.rel_half_ticks.abs() <= r {
                occupied[(level.rel_half_ticks + r) as usize] += dt;
            }
        }
    })?;
    if observed == 0 {
        return Err(AnalyticsError::NoQuoteTime);
    }
    let occupation: BTreeMap<i64, f64> = occupied
        .iter()
        .enumerate()
        .map(|(i, &t)| (i as i64 - r, t as f64 / observed as f64))
        .collect();
    let mut profile = OccupationProfile::from_levels(occupation);
    profile.observed_time_ms = observed;
    profile.excluded_time_ms = excluded;
    Ok(profile)
}

/// Full width at two-thirds of the occupation maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CushionWidth {
    /// Outermost super-threshold levels of the region around the maximum.
    pub left_half_ticks: i64,
    pub right_half_ticks: i64,
    /// `right - left` in half-ticks, i.e. twice the width in ticks.
    pub width_half_ticks: i64,
    pub o_max: f64,
    pub argmax_half_ticks: i64,
}

impl CushionWidth {
    pub fn width_ticks(&self) -> f64 {
        self.width_half_ticks as f64 / 2.0
    }
}

/// Longest run of below-threshold levels bridged inside the cushion. Two
/// half-ticks cover the empty midpoint level and the odd/even alternation of
/// relative levels under a one-tick spread.
const MAX_BRIDGED_GAP: i64 = 2;

pub fn cushion_width(profile: &OccupationProfile) -> Result<CushionWidth> {
    let o_max = profile.occupation.values().copied().fold(0.0, f64::max);
    if !(o_max > 0.0) {
        return Err(AnalyticsError::EmptyProfile);
    }
    let argmax = profile
        .occupation
        .iter()
        .filter(|(_, &v)| v == o_max)
        .map(|(&k, _)| k)
        .min_by_key(|&k| (k.abs(), k))
        .expect("maximum exists");
    let threshold = 2.0 / 3.0 * o_max;
    // tolerate rounding when a level sits exactly on the threshold
    let above = |h: i64| profile.get(h) >= threshold * (1.0 - 1e-12);
    let extend = |from: i64, step: i64| {
        let mut edge = from;
        'outer: loop {
            for hop in 1..=MAX_BRIDGED_GAP + 1 {
                if above(edge + step * hop) {
                    edge += step * hop;
                    continue 'outer;
                }
            }
            break edge;
        }
    };
    let right = extend(argmax, 1);
    let left = extend(argmax, -1);
    Ok(CushionWidth {
        left_half_ticks: left,
        right_half_ticks: right,
        width_half_ticks: right - left,
        o_max,
        argmax_half_ticks: argmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feed::{EventKind, OrderEvent, Side};

    fn rectangle(scale: f64) -> OccupationProfile {
        let occ = (-60..=60)
            .map(|h: i64| {
                let v = if h != 0 && h.abs() <= 49 { scale } else { 0.0 };
                (h, v)
            })
            .collect();
        OccupationProfile::from_levels(occ)
    }

    #[test]
    fn rectangle_width() {
        let w = cushion_width(&rectangle(1.0)).unwrap();
        assert_eq!(w.width_half_ticks, 98);
        assert_eq!(w.width_ticks(), 49.0);
        let w = cushion_width(&rectangle(0.123)).unwrap();
        assert_eq!(w.width_ticks(), 49.0);
        assert_eq!(w.o_max, 0.123);
    }

    #[test]
    fn triangle_width_from_closed_form() {
        // 0.9 * (31 - |h|) / 30 meets 0.6 at |h| = 11, so the region is [-11, 11]
        let occ = (-40..=40)
            .map(|h: i64| {
                let a = h.abs();
                let v = if a == 0 || a > 31 {
                    0.0
                } else {
                    0.9 * (31 - a) as f64 / 30.0
                };
                (h, v)
            })
            .collect();
        let w = cushion_width(&OccupationProfile::from_levels(occ)).unwrap();
        assert_eq!((w.left_half_ticks, w.right_half_ticks), (-11, 11));
        assert_eq!(w.width_ticks(), 11.0);
    }

    #[test]
    fn gaps_longer_than_two_are_not_bridged() {
        let mut occ = BTreeMap::new();
        for h in [-5, -3, -1, 1, 3, 7, 8] {
            occ.insert(h, 1.0);
        }
        let w = cushion_width(&OccupationProfile::from_levels(occ)).unwrap();
        assert_eq!((w.left_half_ticks, w.right_half_ticks), (-5, 3));
    }

    #[test]
    fn empty_profile_has_no_width() {
        let occ = (-3..=3).map(|h| (h, 0.0)).collect();
        let p = OccupationProfile::from_levels(occ);
        assert_eq!(cushion_width(&p), Err(AnalyticsError::EmptyProfile));
        assert!(p.width.is_none());
    }

    fn resting_stream(cancel_at: Option<i64>) -> EventStream {
        // bid 99 and ask 101 never move: midpoint 100, ask sits at +2 half-ticks
        let mut ev = vec![
            OrderEvent::new(0, EventKind::Add, 1, Side::Buy, 99, 1),
            OrderEvent::new(0, EventKind::Add, 2, Side::Sell, 101, 1),
            OrderEvent::new(0, EventKind::Add, 3, Side::Sell, 101, 5),
        ];
        if let Some(t) = cancel_at {
            ev.push(OrderEvent::new(t, EventKind::Cancel, 3, Side::Sell, 101, 5));
        }
        EventStream::new(ev, 1, 0, 1000)
    }

    #[test]
    fn constant_occupancy() {
        let p = occupation_profile(&resting_stream(None), Window::new(0, 1000), 6).unwrap();
        assert_eq!(p.get(2), 1.0);
        assert_eq!(p.get(-2), 1.0);
        assert_eq!(p.get(0), 0.0);
        assert_eq!(p.get(4), 0.0);
        assert_eq!(p.occupation.len(), 13);
        assert_eq!(p.observed_time_ms, 1000);
    }

    #[test]
    fn occupancy_fraction_follows_time() {
        // a lone order on +2 half-ticks, quote provided by levels that move away half-way
        let ev = vec![
            OrderEvent::new(0, EventKind::Add, 1, Side::Buy, 99, 1),
            OrderEvent::new(0, EventKind::Add, 2, Side::Sell, 101, 1),
            OrderEvent::new(500, EventKind::Add, 3, Side::Buy, 98, 1),
            OrderEvent::new(500, EventKind::Cancel, 1, Side::Buy, 99, 1),
            OrderEvent::new(500, EventKind::Add, 4, Side::Sell, 102, 1),
            OrderEvent::new(500, EventKind::Cancel, 2, Side::Sell, 101, 1),
        ];
        // after 500 ms the quote is (98, 102): midpoint unchanged, levels at ±4
        let s = EventStream::new(ev, 1, 0, 1000);
        let p = occupation_profile(&s, Window::new(0, 1000), 6).unwrap();
        assert_eq!(p.get(2), 0.5);
        assert_eq!(p.get(-2), 0.5);
        assert_eq!(p.get(4), 0.5);
        assert_eq!(p.o_max, 0.5);
    }

    #[test]
    fn no_quote_time_is_an_error() {
        let ev = vec![OrderEvent::new(0, EventKind::Add, 1, Side::Buy, 99, 1)];
        let s = EventStream::new(ev, 1, 0, 1000);
        assert_eq!(
            occupation_profile(&s, Window::new(0, 1000), 4),
            Err(AnalyticsError::NoQuoteTime)
        );
    }

    #[test]
    fn one_sided_time_is_excluded() {
        let ev = vec![
            OrderEvent::new(0, EventKind::Add, 1, Side::Buy, 99, 1),
            OrderEvent::new(250, EventKind::Add, 2, Side::Sell, 101, 1),
        ];
        let s = EventStream::new(ev, 1, 0, 1000);
        let p = occupation_profile(&s, Window::new(0, 1000), 4).unwrap();
        assert_eq!(p.observed_time_ms, 750);
        assert_eq!(p.excluded_time_ms, 250);
        assert_eq!(p.excluded_fraction(), 0.25);
        assert_eq!(p.get(2), 1.0);
    }
}
