//! Conflict-free minimum-latency aggregation scheduling in wireless sensor
//! networks modeled as unit disk graphs.
//!
//! The pipeline is: build an [`Instance`] from points and a transmission
//! range, pick an aggregation tree ([`builders`], [`gls`], [`vns`] or
//! [`exact`]), and schedule it under the full interference model with
//! [`scheduler::ndr_schedule`]. [`bench`] runs experiment matrices.

pub mod bench;
pub mod builders;
pub mod exact;
pub mod gls;
pub mod instance;
pub mod latency;
pub mod scheduler;
pub mod tree;
pub mod vns;

pub use instance::{Instance, InstanceError, Point, PointFormat, PointSet, Vertex};
pub use latency::LocalSearch;
pub use scheduler::{FullSchedule, Violation};
pub use tree::{AggTree, TreeError};

/// Seedable generator used throughout; seeded runs reproduce across platforms.
pub type Rng64 = rand_chacha::ChaCha8Rng;

/// Wall clock for traces. Reads 0 where no clock is available (wasm).
pub(crate) struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Stopwatch {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    pub(crate) fn elapsed_ms(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_secs_f64() * 1e3
        }
        #[cfg(target_arch = "wasm32")]
        {
            0.0
        }
    }
}
