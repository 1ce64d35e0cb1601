use super::records::OrderRecord;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelStat {
    pub level: usize,
    pub insertion_count: u64,
    /// `None` when nothing was inserted at this level.
    pub mean_lifetime_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelStatistics {
    pub levels: Vec<LevelStat>,
    /// Records with no opposite quote at insertion.
    pub excluded_no_quote: u64,
    /// Records at or beyond `n_levels`.
    pub beyond_range: u64,
}

impl LevelStatistics {
    /// `(level, count)` for levels with at least one insertion.
    pub fn count_points(&self) -> Vec<(f64, f64)> {
        self.levels
            .iter()
            .filter(|s| s.insertion_count > 0)
            .map(|s| (s.level as f64, s.insertion_count as f64))
            .collect()
    }

    /// `(level, mean lifetime)` for levels with a positive mean lifetime.
    pub fn lifetime_points(&self) -> Vec<(f64, f64)> {
        self.levels
            .iter()
            .filter_map(|s| s.mean_lifetime_ms.map(|m| (s.level as f64, m)))
            .filter(|&(_, m)| m > 0.0)
            .collect()
    }
}

/// Insertion counts and mean lifetimes per insertion level `0..n_levels`,
/// where the level is measured from the opposite best quote.
pub fn level_statistics(records: &[OrderRecord], n_levels: usize) -> LevelStatistics {
    let mut counts = vec![0u64; n_levels];
    let mut lifetime_sums = vec![0f64; n_levels];
    let mut excluded_no_quote = 0;
    let mut beyond_range = 0;
    for r in records {
        match r.insertion_level() {
            None => excluded_no_quote += 1,
            Some(l) if (l as usize) < n_levels => {
                counts[l as usize] += 1;
                lifetime_sums[l as usize] += r.lifetime_ms as f64;
            }
            Some(_) => beyond_range += 1,
        }
    }
    let levels = counts
        .iter()
        .zip(&lifetime_sums)
        .enumerate()
        .map(|(level, (&c, &sum))| LevelStat {
            level,
            insertion_count: c,
            mean_lifetime_ms: (c > 0).then(|| sum / c as f64),
        })
        .collect();
    LevelStatistics {
        levels,
        excluded_no_quote,
        beyond_range,
    }
}
