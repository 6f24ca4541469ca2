//! Ordinal pattern analysis of time series.
//!
//! - [`patterns`]: order patterns, windows and pattern counts.
//! - [`contrasts`]: the length-3 contrasts `beta, tau, gamma, delta`, their
//!   geometry and sliding-window tracking.
//! - [`entropy`]: permutation entropy and the `Z` statistic.
//! - [`nulls`]: null covariance structure, quantile tables and tests.
//! - [`processes`]: process generators and the coin-tossing order.
//! - [`orders`]: exact pattern measures, interval coding and Markov extension.

pub mod contrasts;
pub mod entropy;
pub mod error;
pub mod nulls;
pub mod orders;
pub mod patterns;
pub mod processes;
pub mod sim;

pub use contrasts::{ContrastVector, PatternDistribution};
pub use error::{Error, Result};
pub use orders::PatternMeasure;
pub use patterns::{Pattern, PatternCounts, TiePolicy, TimeSeries, WindowSpec};
