//! Jump counting, q-variation norms and the parent-partition construction
//! for finitely sampled paths.
//!
//! All quantities are computed exactly on the finite index set: suprema over
//! increasing subsequences become longest-path problems on the complete DAG
//! of time indices and are solved by `O(T²)` dynamic programming.

mod grid;
mod jumps;
mod partition;
mod path;
mod variation;

pub use grid::{make_time_grid, TimeGrid};
pub use jumps::{greedy_jump_count, lazy_jump_count, lazy_jump_pairs};
pub use partition::{build_parent_partition, InvariantReport, ParentPartition};
pub use path::SampledPath;
pub use variation::{hvar, ivar, short_long_split, sup_norm, LongShort};
