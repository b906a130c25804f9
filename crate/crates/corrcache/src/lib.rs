//! Coded caching for libraries of correlated files.
//!
//! The library holds `n_files` files built from shared blocks: every
//! `overlap`-subset of files owns one exclusive common block, and a file is
//! the concatenation of the blocks of all subsets it belongs to. Users cache
//! block fragments ahead of time; at delivery the server broadcasts XOR
//! combinations of fragments so that every user can reassemble its demanded
//! file.
//!
//! The crate provides:
//! - [`model`]: instances, block/sub-block identifiers, demands and leaders;
//! - [`placement`]: the symmetric uncoded cache placement;
//! - [`scheme`]: the aligned delivery construction and its transmissions;
//! - [`bounds`]: converse load coefficients, convex envelopes, and the
//!   round-division baseline;
//! - [`verify`]: an exact GF(2) decoding oracle and grid sweeps;
//! - [`multireq`]: hand-listed two-request broadcast codes and their bridge
//!   to correlated-file instances.
//!
//! All loads and memory sizes are exact rationals; nothing is floated until
//! a front end renders output.

pub mod bounds;
pub mod combin;
pub mod error;
pub mod model;
pub mod multireq;
pub mod placement;
pub mod rational;
pub mod scheme;
pub mod sets;
pub mod verify;

pub use error::Error;
pub use model::{BlockId, Demand, Leaders, ProblemInstance, SubBlockId};
pub use rational::Rat;
pub use sets::SmallSet;
