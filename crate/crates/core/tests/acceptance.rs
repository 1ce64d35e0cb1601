//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

use common::EventFuzzer;
use lob_cushion::analytics::{
    average_filling, cushion_width, icdf, linear_fit, occupation_profile, quote_series,
    returns_series, spread_histogram, Icdf, OccupationProfile, WeightedSample, Window,
};
use lob_cushion::book::BookState;
use lob_cushion::feed::{
    parse_event_line, serialize_event_line, EventKind, EventStream, OrderEvent, Side,
};
use lob_cushion::roundtrip::{fit_model, FittedModel};
use lob_cushion::sim::{run_simulation, SimParams, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// Everything criteria 1 to 4 need from one full-size run.
struct DayRun {
    seed: u64,
    fitted: FittedModel,
    spread: BTreeMap<i64, f64>,
    filling: Vec<f64>,
    returns: Vec<f64>,
}

fn day_run(params: SimParams) -> DayRun {
    let out = run_simulation(&params).expect("simulation");
    let stream = out.stream;
    let fitted = fit_model(&stream, params.levels).expect("fit");
    let window = Window::market_hours(&stream);
    let quotes = quote_series(&stream).unwrap();
    DayRun {
        seed: params.seed,
        fitted,
        spread: spread_histogram(&quotes, window).unwrap(),
        filling: average_filling(&stream, window, 1000, params.levels).unwrap(),
        returns: returns_series(&quotes, window, 1000, 1000)
            .unwrap()
            .into_iter()
            .map(|r| r.r)
            .collect(),
    }
}

/// Runs every seed on its own thread; returns the runs and the wall time.
fn parallel_days(variant: Variant) -> (Vec<DayRun>, Duration) {
    let start = Instant::now();
    let runs = std::thread::scope(|s| {
        let handles: Vec<_> = SEEDS
            .iter()
            .map(|&seed| {
                s.spawn(move || {
                    day_run(SimParams {
                        seed,
                        variant,
                        ..SimParams::default()
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    (runs, start.elapsed())
}

fn rel(fitted: f64, target: f64) -> f64 {
    (fitted - target).abs() / target
}

fn parameter_recovery(runs: &[DayRun], elapsed: Duration) -> Verdict {
    let p = SimParams::default();
    let mut ok = elapsed < Duration::from_secs(60);
    let mut worst = [0.0f64; 4];
    for r in runs {
        let errs = [
            rel(r.fitted.level_scale, p.level_scale),
            rel(r.fitted.base_lifetime_ms, p.base_lifetime_ms),
            rel(r.fitted.lifetime_level_scale, p.lifetime_level_scale),
            rel(r.fitted.market_share, p.p_market),
        ];
        let limits = [0.10, 0.15, 0.15, 0.10];
        for i in 0..4 {
            worst[i] = worst[i].max(errs[i]);
            ok &= errs[i] <= limits[i];
        }
    }
    verdict(
        ok,
        format!(
            "worst relative errors over {} seeds: l0 {:.4} (<= 0.10), t_lt {:.4} (<= 0.15), \
             l_lt {:.4} (<= 0.15), market share {:.4} (<= 0.10); wall time {:.1} s (< 60 s)",
            runs.len(),
            worst[0],
            worst[1],
            worst[2],
            worst[3],
            elapsed.as_secs_f64()
        ),
    )
}

fn spread_decay(runs: &[DayRun]) -> Verdict {
    let mut ok = true;
    let mut worst_r2 = 1.0f64;
    let mut notes = Vec::new();
    for r in runs {
        let f: Vec<f64> = (1..=4).map(|s| r.spread.get(&s).copied().unwrap_or(0.0)).collect();
        let monotone = f.windows(2).all(|w| w[1] < w[0]) && f[3] > 0.0;
        if !monotone {
            ok = false;
            notes.push(format!("seed {} not decreasing: {f:?}", r.seed));
            continue;
        }
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = f.iter().map(|v| v.ln()).collect();
        let fit = linear_fit(&xs, &ys).unwrap();
        worst_r2 = worst_r2.min(fit.r_squared);
        ok &= fit.r_squared >= 0.95;
    }
    verdict(
        ok,
        format!(
            "frequencies strictly decreasing over 1..4 ticks; worst log-linear R^2 {worst_r2:.4} (>= 0.95){}",
            if notes.is_empty() { String::new() } else { format!("; {}", notes.join("; ")) }
        ),
    )
}

/// Ranks with ties sharing their mean rank.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[idx[k]] = mean;
        }
        i = j + 1;
    }
    out
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn filling_shape(full: &[DayRun], uniform: &[DayRun]) -> Verdict {
    let mut ok = true;
    let mut worst_rho = -1.0f64;
    for r in full {
        let levels: Vec<f64> = (0..r.filling.len()).map(|l| l as f64).collect();
        let rho = spearman(&levels, &r.filling);
        worst_rho = worst_rho.max(rho);
        ok &= rho <= -0.9;
    }
    let rsd = |v: &[f64]| {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt() / mean
    };
    let mut worst_rsd = 0.0f64;
    let mut worst_far_only = 0.0f64;
    for r in uniform {
        let l = r.filling.len();
        // five boundary levels: two at the quotes, where market orders
        // consume the best levels, and three at the cushion edge
        let kept = &r.filling[2..l - 3];
        worst_rsd = worst_rsd.max(rsd(kept));
        worst_far_only = worst_far_only.max(rsd(&r.filling[..l - 5]));
        ok &= rsd(kept) < 0.10;
    }
    verdict(
        ok,
        format!(
            "full model worst Spearman rho {worst_rho:.4} (<= -0.9); uniform variant worst \
             relative sd over levels 2..21 {worst_rsd:.4} (< 0.10) [levels 0..19 only: \
             {worst_far_only:.4}]"
        ),
    )
}

fn gaussian_two_sided_tail_3() -> f64 {
    let n = 20_000;
    let h = 3.0 / n as f64;
    let pdf = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(0.0) + pdf(3.0);
    for i in 1..n {
        s += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - 2.0 * s * h / 3.0
}

fn return_tails(runs: &[DayRun]) -> Verdict {
    let gauss = gaussian_two_sided_tail_3();
    let mut ok = true;
    let mut min_kurt = f64::INFINITY;
    let mut min_tail = f64::INFINITY;
    for r in runs {
        let n = r.returns.len() as f64;
        let mean = r.returns.iter().sum::<f64>() / n;
        let m2 = r.returns.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let m4 = r.returns.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
        let kurt = m4 / (m2 * m2) - 3.0;
        let sd = m2.sqrt();
        let samples: Vec<WeightedSample> =
            r.returns.iter().map(|x| WeightedSample::unit((x - mean).abs())).collect();
        let tail = Icdf::new(&samples).unwrap().eval(3.0 * sd);
        min_kurt = min_kurt.min(kurt);
        min_tail = min_tail.min(tail);
        ok &= kurt > 0.0 && tail > gauss;
    }
    verdict(
        ok,
        format!(
            "dt = 1 s: min excess kurtosis {min_kurt:.3} (> 0); min P(|r - mean| > 3 sd) \
             {min_tail:.5} vs Gaussian {gauss:.5}"
        ),
    )
}

fn occupation_oracle() -> Verdict {
    let range = 80;
    let mut worst = 0.0f64;
    let mut streams = Vec::new();
    for seed in [1, 2] {
        streams.push(
            run_simulation(&SimParams {
                n_orders: 700,
                session_ms: 60_000,
                seed,
                ..SimParams::default()
            })
            .unwrap()
            .stream,
        );
    }
    // fuzzed stream stretched over the minute
    let mut fuzz = EventFuzzer::new(ChaCha8Rng::seed_from_u64(60));
    let events: Vec<OrderEvent> = (0..20_000)
        .map(|_| {
            let mut e = fuzz.next_event();
            e.timestamp_ms = (e.timestamp_ms * 3).min(59_999);
            e
        })
        .collect();
    streams.push(EventStream::new(events, 1, 0, 60_000));

    for s in &streams {
        let profile = occupation_profile(s, Window::new(0, 60_000), range).unwrap();
        let mut hits = vec![0u64; (2 * range + 1) as usize];
        let mut quoted = 0u64;
        let mut book = BookState::new();
        let mut next = 0;
        for t in 0..60_000 {
            while next < s.events.len() && s.events[next].timestamp_ms <= t {
                book.apply_event(&s.events[next]).unwrap();
                next += 1;
            }
            let Some((bid, ask)) = book.bid_ask() else { continue };
            quoted += 1;
            for h in -range..=range {
                let twice = h + bid + ask;
                if twice % 2 == 0 && book.volume_at(twice / 2) > 0 {
                    hits[(h + range) as usize] += 1;
                }
            }
        }
        for h in -range..=range {
            let oracle = hits[(h + range) as usize] as f64 / quoted as f64;
            worst = worst.max((profile.get(h) - oracle).abs());
        }
    }
    verdict(
        worst <= 1e-9,
        format!("3 streams of 60 s, {} levels each: max |difference| {worst:.2e} (<= 1e-9)", 2 * range + 1),
    )
}

fn book_fuzz() -> Verdict {
    let n = 1_000_000;
    let mut fuzz = EventFuzzer::new(ChaCha8Rng::seed_from_u64(6));
    let mut book = BookState::new();
    let mut added: HashMap<u64, u64> = HashMap::new();
    let mut removed: HashMap<u64, u64> = HashMap::new();
    let mut crossed = 0u64;
    let mut rejected = 0u64;
    for _ in 0..n {
        let e = fuzz.next_event();
        if book.apply_event(&e).is_err() {
            rejected += 1;
        }
        match e.kind {
            EventKind::Add => {
                added.insert(e.order_id, e.volume_shares);
            }
            EventKind::HiddenTrade => {}
            _ => *removed.entry(e.order_id).or_default() += e.volume_shares,
        }
        if let Some((b, a)) = book.bid_ask() {
            crossed += u64::from(b >= a);
        }
    }
    let mut conservation_breaks = 0;
    for (id, vol) in &added {
        let left = book.live_order(*id).map_or(0, |o| o.remaining_volume);
        if removed.get(id).copied().unwrap_or(0) + left != *vol {
            conservation_breaks += 1;
        }
    }
    let mut level_mismatch = 0;
    for side in [Side::Buy, Side::Sell] {
        let got: BTreeMap<i64, u64> = book
            .side_levels(side)
            .iter()
            .map(|(&p, l)| (p, l.total_volume()))
            .collect();
        if got != fuzz.naive.levels(side) {
            level_mismatch += 1;
        }
    }
    verdict(
        crossed == 0 && rejected == 0 && conservation_breaks == 0 && level_mismatch == 0,
        format!(
            "{n} events, {} orders: rejected {rejected}, crossed {crossed}, conservation \
             breaks {conservation_breaks}, mismatching sides {level_mismatch}",
            added.len()
        ),
    )
}

fn width_extraction() -> Verdict {
    let rect = |scale: f64| {
        OccupationProfile::from_levels(
            (-80..=80)
                .map(|h: i64| (h, if h != 0 && h.abs() <= 49 { scale } else { 0.0 }))
                .collect(),
        )
    };
    let a = cushion_width(&rect(1.0)).unwrap().width_ticks();
    let b = cushion_width(&rect(0.123)).unwrap().width_ticks();
    verdict(
        a == 49.0 && b == 49.0,
        format!("rectangle on +-[1, 49] half-ticks: w = {a} ticks at scale 1, {b} ticks at scale 0.123"),
    )
}

fn icdf_correctness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let samples: Vec<WeightedSample> = (0..10_000)
        .map(|_| {
            // coarse values force ties
            let v = (rng.random::<f64>() * 500.0).round() / 5.0;
            WeightedSample::new(v, rng.random::<f64>() * 3.0)
        })
        .collect();
    let queries: Vec<f64> = (0..50).map(|i| i as f64 * 2.1 - 1.0).collect();
    let got = icdf(&samples, &queries).unwrap();
    let total: f64 = samples.iter().map(|s| s.weight).sum();
    let mut worst = 0.0f64;
    for (x, i) in &got {
        let mut above = 0.0;
        for s in &samples {
            if s.value > *x {
                above += s.weight;
            }
        }
        worst = worst.max((i - above / total).abs());
    }
    let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let unit: Vec<WeightedSample> = values.iter().map(|&v| WeightedSample::unit(v)).collect();
    let unit_icdf = icdf(&unit, &queries).unwrap();
    let exact = unit_icdf.iter().all(|&(x, i)| {
        let count = values.iter().filter(|&&v| v > x).count();
        i == count as f64 / values.len() as f64
    });
    verdict(
        worst <= 1e-12 && exact,
        format!(
            "10^4 weighted samples, 50 queries: max error {worst:.2e} (<= 1e-12); unweighted \
             equals unit-weighted exactly: {exact}"
        ),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let params = SimParams {
        seed: 42,
        ..SimParams::default()
    };
    let mut files = Vec::new();
    for name in ["a.txt", "b.txt"] {
        let path = dir.path().join(name);
        let out = run_simulation(&params).unwrap();
        out.stream
            .write_to(std::io::BufWriter::new(std::fs::File::create(&path).unwrap()))
            .unwrap();
        files.push(std::fs::read(&path).unwrap());
    }
    let identical = files[0] == files[1];

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let kinds = [
        EventKind::Add,
        EventKind::Cancel,
        EventKind::CancelPartial,
        EventKind::Execute,
        EventKind::ExecutePartial,
        EventKind::HiddenTrade,
    ];
    let mut broken = 0;
    for _ in 0..10_000 {
        let e = OrderEvent::new(
            rng.random_range(0..=i64::MAX),
            kinds[rng.random_range(0..kinds.len())],
            rng.random(),
            if rng.random_bool(0.5) { Side::Buy } else { Side::Sell },
            rng.random_range(1..=i64::MAX),
            rng.random_range(1..=u64::MAX),
        );
        let line = serialize_event_line(&e);
        match parse_event_line(&line) {
            Ok(back) if back == e && serialize_event_line(&back) == line => {}
            _ => broken += 1,
        }
    }
    verdict(
        identical && broken == 0,
        format!(
            "two full-size runs, seed 42: files identical ({} bytes): {identical}; \
             parse(serialize(e)) != e for {broken} of 10^4 fuzzed events",
            files[0].len()
        ),
    )
}

fn main() {
    let (full, elapsed) = parallel_days(Variant::Full);
    let (uniform, _) = parallel_days(Variant::UniformAll);

    let results: Vec<(u32, &str, Verdict)> = vec![
        (1, "parameter recovery", parameter_recovery(&full, elapsed)),
        (2, "spread distribution", spread_decay(&full)),
        (3, "average filling shape", filling_shape(&full, &uniform)),
        (4, "return tails", return_tails(&full)),
        (5, "occupation oracle", occupation_oracle()),
        (6, "book conservation fuzz", book_fuzz()),
        (7, "width extraction", width_extraction()),
        (8, "icdf correctness", icdf_correctness()),
        (9, "determinism", determinism()),
    ];
    let mut failed = 0;
    for (n, name, v) in &results {
        println!(
            "criterion {n} [{}] {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
