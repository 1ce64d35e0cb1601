//! Liquidity statistics computed from an event stream and its replayed book.

mod fit;
mod grid;
mod icdf;
mod levels;
mod occupation;
mod quotes;
mod records;
mod replay;
mod summary;

use thiserror::Error;

use crate::book::BookError;
use crate::feed::EventStream;

pub use fit::{
    fit_exponential_loglinear, fit_power_tail, fit_power_tail_points, linear_fit, ExpDirection,
    ExpFit, LineFit, PowerTailFit,
};
pub use grid::{average_filling, order_count_grid, CountGrid, GridCell};
pub use icdf::{icdf, icdf_table, Icdf, Weighting, WeightedSample};
pub use levels::{level_statistics, LevelStat, LevelStatistics};
pub use occupation::{cushion_width, occupation_profile, CushionWidth, OccupationProfile};
pub use quotes::{
    excess_kurtosis, quote_series, returns_series, spread_histogram, QuotePoint, QuoteSeries,
    ReturnSample,
};
pub use records::{build_order_records, classify_regime, OrderRecord, Regime};
pub use replay::{for_each_segment, Replayer};
pub use summary::{count_market_orders, summarize_dataset, DatasetSummary};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("event {index}: {source}")]
    Integrity {
        index: usize,
        #[source]
        source: BookError,
    },
    #[error("no time with a valid two-sided quote inside the window")]
    NoQuoteTime,
    #[error("no samples")]
    NoSamples,
    #[error("total weight is zero")]
    ZeroWeight,
    #[error("weights must be finite and non-negative")]
    BadWeight,
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("not enough points: need {needed}, have {have}")]
    NotEnoughPoints { needed: usize, have: usize },
    #[error("occupation profile has no positive level")]
    EmptyProfile,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, AnalyticsError>;

/// Half-open analysis window `[open_ms, close_ms)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub open_ms: i64,
    pub close_ms: i64,
}

impl Window {
    pub fn new(open_ms: i64, close_ms: i64) -> Self {
        Self { open_ms, close_ms }
    }

    /// Market hours declared in the stream header.
    pub fn market_hours(stream: &EventStream) -> Self {
        Self::new(stream.market_open_ms, stream.market_close_ms)
    }

    pub fn len_ms(&self) -> i64 {
        (self.close_ms - self.open_ms).max(0)
    }

    /// Events are counted on the closed interval so an order arriving exactly
    /// at the close still belongs to the day.
    pub fn contains_event(&self, t: i64) -> bool {
        t >= self.open_ms && t <= self.close_ms
    }
}
