//! Zero-intelligence model of the liquidity cushion.
//!
//! Orders arrive one at a time on a regular clock. Each is a buy or sell with
//! equal odds, a market order with probability `P_market`, otherwise a limit
//! order placed `l + 1` ticks inside the opposite best, with `l` drawn from
//! an exponential level distribution. Limit orders are cancelled after a
//! lifetime fixed at insertion unless a market order consumes them first.

mod engine;
mod params;

use thiserror::Error;

pub use engine::{
    level_probabilities, lifetime_for_level, run_simulation, Draw, RunReport, SimCounters,
    SimOutput, SimState, RNG_FAMILY,
};
pub use params::{SimParams, Variant};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("internal invariant breached: {0}")]
    Invariant(String),
}
