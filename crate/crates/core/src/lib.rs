//! Rigidity of pseudorange frameworks and solvability of cooperative GNSS
//! positioning.
//!
//! A pseudorange `ρ_uv = ‖x_u − x_v‖ + β_v − β_u` couples the positions and
//! clock biases of two agents. This crate builds the corresponding rigidity
//! matrices, decides generic rigidity both numerically (ranks at random
//! configurations) and combinatorially (a matroid union of the distance
//! rigidity matroid and the cycle matroid), applies the same machinery to
//! satellite/receiver networks, and ships a Newton estimator for receiver
//! positions and biases.
//!
//! ```
//! use pseudorange_rigidity::{fixtures, rigidity};
//!
//! let rank = rigidity::generic_rank_numeric(&fixtures::fig2a(), 2, 5, 0).unwrap();
//! assert_eq!((rank.rank, rank.bound), (4, 5));
//! ```

pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod fixtures;
pub mod gnss;
pub mod graphs;
pub mod numeric;
pub mod rigidity;

pub use error::{Error, Result};
