//! Equitable strong coloring of k-uniform hypergraphs.
//!
//! A strong r-coloring partitions the vertices into r classes so that every
//! edge intersects every class; it is equitable when all class sizes are
//! `floor(n/r)` or `ceil(n/r)`. For bounded-degree hypergraphs such
//! colorings exist with close to `k / (a ln k)` classes, and this crate
//! constructs them with randomized resampling instead of a bare existence
//! argument:
//!
//! 1. [`phase1`] samples a partial coloring and resamples violated local
//!    conditions until every edge keeps enough uncolored vertices, misses
//!    few colors, no vertex sits in too many deficient edges, and every
//!    class is large enough;
//! 2. [`phase2`] completes the coloring by drawing each uncolored vertex
//!    from the colors its edges still miss, resampling stubborn edges;
//! 3. [`phase3`] dissolves the largest classes into the rest to even out
//!    the sizes (small instances take a sample-and-repair shortcut).
//!
//! [`oracle`] re-checks every output against the definitions and supplies
//! exact brute-force baselines on tiny instances; [`gen`] produces random
//! test instances including a construction whose minimum vertex cover stays
//! too large for any substantially better coloring; [`pipeline`] wires the
//! phases together behind seeded, reproducible reports.

pub mod gen;
pub mod hypergraph;
pub mod matching;
pub mod oracle;
pub mod params;
pub mod phase1;
pub mod phase2;
pub mod phase3;
pub mod pipeline;

pub use gen::{gen_bounded, gen_tight, uniform_ksubset, TightConstructionSpec};
pub use hypergraph::{EdgeId, Hypergraph, SimpleGraph, Vertex};
pub use oracle::{brute_c, brute_min_cover, cover_bound_check, verify_equitable, verify_strong, VerificationResult};
pub use params::{derive_params, derive_params_forced, params_with_override, ColoringParams};
pub use phase1::{run_phase1, Color, PartialColoring, ViolationReport, UNCOLORED};
pub use phase2::{build_missing_table, complete_coloring, MissingColorTable, StrongColoring};
pub use phase3::{finite_case_color, rebalance, rebalance_with_drop, EquitablePartition};
pub use pipeline::{bench_sweep, run_pipeline, tightness_check, Branch, Caps, Overrides, RunReport};
