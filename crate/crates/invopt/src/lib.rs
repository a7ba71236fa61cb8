//! Simulation-based inventory optimization for safety-stock MRP systems.
//!
//! The library replays a deterministic safety-stock MRP under empirically
//! sampled supply and demand uncertainties, in a receding-horizon loop, to
//! recommend the reorder parameters (safety stock value and safety time)
//! that minimize inventory cost subject to a service-level constraint.
//!
//! The pipeline has three phases, all exposed here and through the `invopt`
//! CLI binary:
//!
//! * **training** ([`trainer`]) — grid search over (SLP, STP) hyper-parameter
//!   candidates on a historical training period;
//! * **validation** ([`backtest`]) — receding-horizon backtest over a recent
//!   period, scoring recommendations against the actual inventory;
//! * **live recommendation** ([`backtest::recommend_live`]) — the validation
//!   loop run through "today", keeping only the final recommendation.
//!
//! Supporting layers: [`domain`] (calendar-indexed series and cost/service
//! measures), [`ingest`] (CSV ERP extracts), [`mrp`] (the deterministic MRP
//! itself), [`uncertainty`] (empirical residual distributions), [`optimizer`]
//! (forward-looking Monte-Carlo simulation and the SSV lifting loop), and
//! [`synth`] (seeded synthetic datasets for tests and examples).

pub mod backtest;
pub mod cli;
pub mod config;
pub mod domain;
pub mod ingest;
pub mod mrp;
pub mod optimizer;
pub mod rng;
pub mod synth;
pub mod trainer;
pub mod uncertainty;

mod error;

pub use error::{Error, Result};
