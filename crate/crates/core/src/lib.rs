//! Static analysis of PV programs: threads that acquire (`P`) and release
//! (`V`) counting semaphores, run in parallel.
//!
//! The crate detects deadlocks, potential deadlocks and local choice points,
//! classifies executions up to square-swap equivalence, and turns analyses of
//! a bounded number of thread copies into verdicts for every number of copies.

pub mod deadlock;
pub mod geometry;
pub mod model;
pub mod parse;
pub mod serial;
pub mod verdict;

pub use geometry::{ForbiddenRectangle, Grid, LatticePath, SearchError, SearchLimits, State};
pub use model::{Action, ActionKind, CapacityMap, HoldInterval, Program, ResourceId, Thread};
pub use parse::{parse_source, ParseError, SourceModel};
pub use verdict::{Answer, FamilyVerdict, Property, Theorem};
