//! Benchmark harness and dataset front end for `shapegp`.
//!
//! The `shapegp` binary wraps these modules; everything it does is also
//! callable from here, which is how the integration tests drive it.

pub mod bench;
pub mod config;
pub mod dataset;
pub mod functions;
pub mod model;
pub mod output;
pub mod run;

pub use bench::Record;
pub use config::ExperimentConfig;
pub use functions::TestFunction;
