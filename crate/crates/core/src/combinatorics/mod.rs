//! Combinatorial generic-rank machinery.
//!
//! The generic rank of a pseudorange framework equals the rank of the union
//! of two matroids on the edges of its underlying multigraph: the distance
//! rigidity matroid (edges giving independent rows of a generic distance
//! rigidity matrix) and the cycle matroid (forests). Double edges contribute
//! two parallel elements, one of which may go to each side.
//!
//! The distance matroid is decided by the (2,3) pebble game in the plane and
//! by rank tests at random configurations in higher dimensions.

mod decomposition;
mod oracle;
mod pebble;
mod union;

pub use decomposition::{
    find_gnss_decomposition, find_rigid_decomposition, validate_gnss_decomposition,
    DecompositionOutcome, DecompositionWitness, FlexibleCertificate,
};
pub use oracle::{
    graphic_rank, randomized_distance_rank, DistanceOracle, GraphicMatroid, LamanMatroid,
    LinearDistanceMatroid, MatroidRankOracle, OracleOptions,
};
pub use pebble::{laman_rank_2d, pebble_rank, PebbleGame};
pub use union::{matroid_union, matroid_union_rank, Allowed, Side, UnionAssignment, UnionElement};
