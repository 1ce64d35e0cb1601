//! Limit order book reconstruction, liquidity-cushion statistics and a
//! zero-intelligence simulator of the cushion.

pub mod analytics;
pub mod book;
pub mod cli;
pub mod feed;
pub mod roundtrip;
pub mod sim;
