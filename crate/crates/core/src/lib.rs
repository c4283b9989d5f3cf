//! Fully dynamic k-center clustering when every point announces its
//! deletion time on arrival.
//!
//! Two streaming structures are provided:
//!
//! - [`TwoApproxClustering`] keeps every active point and answers queries
//!   with a (2+ε)-approximation, using amortized O(k · log_{1+ε/2}(Δ))
//!   work per update.
//! - [`SixApproxClustering`] stores only a few points per guess and answers
//!   with a (6+ε)-approximation.
//!
//! Around them sit an exact enumeration oracle, stream generators, JSONL
//! stream files, invariant audits and a replay harness.
//!
//! ```
//! use kcenter_lifetimes::{Metric, TimedPoint, TwoApproxClustering};
//!
//! let mut clustering = TwoApproxClustering::new(1, 2.0, 1.0, 4.0, Metric::euclidean(1))?;
//! clustering.insert(TimedPoint::at(1, [0.0], 1, 10))?;
//! clustering.insert(TimedPoint::at(2, [4.0], 2, 20))?;
//!
//! let solution = clustering.query(2)?;
//! assert_eq!(solution.center_ids(), vec![1]);
//! assert_eq!(solution.guess_used, Some(2.0));
//! # Ok::<(), kcenter_lifetimes::Error>(())
//! ```

pub mod audit;
pub mod error;
pub mod harness;
pub mod io;
pub mod ladder;
mod list;
pub mod metric;
pub mod model;
pub mod oracle;
pub mod six_approx;
pub mod streamgen;
pub mod two_approx;

pub use error::{Error, Result};
pub use ladder::GuessLadder;
pub use metric::{DistanceMatrix, Metric, MetricKind};
pub use model::{
    validate_stream, DeletionKey, DeletionQueue, EventStream, Payload, PointId, Time, TimedPoint,
};
pub use oracle::{exact_kcenter, greedy_cover, radius, Cover, Solution};
pub use six_approx::SixApproxClustering;
pub use two_approx::TwoApproxClustering;
