//! Minimum-variance portfolio analytics.
//!
//! The pipeline runs from daily closing prices ([`market_data`]) through
//! annualized per-asset statistics and CAPM expected returns ([`stats`]) to
//! the closed-form efficient frontier, global minimum-variance portfolio,
//! tangency point and capital market line ([`frontier`]). [`report`] ties the
//! stages together per date window and renders tables, curves and SVG.

// `!(x > y)` is used deliberately so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod frontier;
pub mod linalg;
pub mod market_data;
pub mod oracle;
pub mod report;
pub mod stats;

pub use error::{Error, Result};
