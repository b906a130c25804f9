//! Crate-wide error type.
//!
//! Construction errors (bad instance parameters, malformed demands) are kept
//! distinct from delivery-time errors (bad group coordinates, terms outside
//! the sub-block universe) so front ends can map them to different exit
//! codes.

use crate::model::SubBlockId;
use crate::rational::Rat;
use crate::sets::SmallSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("file count {n_files} outside 1..=64")]
    FileCountOutOfRange { n_files: u32 },

    #[error("user count {n_users} outside 1..=64")]
    UserCountOutOfRange { n_users: u32 },

    #[error("block overlap {overlap} outside 1..={n_files} (must pick overlap files per block)")]
    OverlapOutOfRange { overlap: u32, n_files: u32 },

    #[error("cache memory {memory} outside [0, {max}] (library fills at {max} files)")]
    MemoryOutOfRange { memory: Rat, max: Rat },

    #[error("placement needs an integer number of caching users, got t = {t}")]
    NonIntegralPlacement { t: Rat },

    #[error("file {file} outside 1..={n_files}")]
    FileOutOfRange { file: u32, n_files: u32 },

    #[error("demand vector has {got} entries, instance has {expected} users")]
    DemandLength { expected: u32, got: usize },

    #[error("demand entry {file} at position {position} outside 1..={n_files}")]
    DemandEntryOutOfRange {
        position: usize,
        file: u32,
        n_files: u32,
    },

    #[error("leader list has {got} users, demand has {expected} distinct files")]
    LeaderCountMismatch { expected: usize, got: usize },

    #[error("leader {user} outside 1..={n_users}")]
    LeaderNotUser { user: u32, n_users: u32 },

    #[error("two leaders demand file {file}; need one leader per distinct file")]
    DuplicateLeaderFile { file: u32 },

    #[error("demand type {s} outside 1..={max}")]
    TypeOutOfRange { s: u32, max: u32 },

    #[error("per-sub-block cache multiplicity {t} outside 0..={n_users}")]
    MultiplicityOutOfRange { t: u32, n_users: u32 },

    #[error("user set must be non-empty")]
    EmptyUserSet,

    #[error("user {user} outside 1..={n_users}")]
    UserOutOfRange { user: u32, n_users: u32 },

    #[error("delivery step {step} outside 1..={steps}")]
    StepOutOfRange { step: u32, steps: u32 },

    #[error("group user set has {got} users, delivery needs t+1 = {expected}")]
    WrongGroupSize { got: usize, expected: usize },

    #[error("group user set at step {step} must contain leader {leader}")]
    LeaderMissingFromGroup { step: u32, leader: u32 },

    #[error("group user set at step {step} contains earlier leader {user}")]
    EarlierLeaderInGroup { step: u32, user: u32 },

    #[error("no group at step {step} with users {users} and residue {residue}")]
    UnknownGroup {
        step: u32,
        users: SmallSet,
        residue: SmallSet,
    },

    #[error("group blocks out of order at position {position}: leader blocks must come first, each part sorted")]
    GroupOrdering { position: usize },

    #[error("memory {memory} outside envelope domain [0, {max}]")]
    MemoryOutsideEnvelope { memory: Rat, max: Rat },

    #[error("combination term {term} is outside the sub-block universe")]
    TermOutsideUniverse { term: SubBlockId },

    #[error("subfile view needs caching multiplicity t = 1, got {t}")]
    UnsupportedGranularity { t: u32 },
}
