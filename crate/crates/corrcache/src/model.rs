//! Problem instances, block identifiers, demands, and leaders.
//!
//! An instance has `n_files` files and `n_users` users. Every
//! `overlap`-subset of files shares one exclusive common block, so each file
//! consists of `C(n_files - 1, overlap - 1)` blocks and the whole library of
//! `C(n_files, overlap)` blocks fits in `n_files / overlap` file sizes.
//! Placement splits each block into `C(n_users, t)` sub-blocks tagged by the
//! `t`-subset of users caching them, where `t = n_users * memory * overlap /
//! n_files`.

use crate::combin::{binom, binom_usize, surjections};
use crate::error::Error;
use crate::rational::{int, ratio, Rat};
use crate::sets::{k_subsets, SmallSet};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use std::fmt;

/// One shared block, identified by the set of files it belongs to.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId {
    files: SmallSet,
}

impl BlockId {
    pub fn new(files: SmallSet) -> Self {
        BlockId { files }
    }

    pub fn files(self) -> SmallSet {
        self.files
    }

    /// Whether the block is part of the given file.
    pub fn involves(self, file: u32) -> bool {
        self.files.contains(file)
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.files)
    }
}

impl fmt::Debug for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// One placed fragment of a block: the block plus the users caching it.
///
/// Canonical text form: `S{1,2}|V{2,3}` with both sets ascending.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubBlockId {
    pub block: BlockId,
    pub cached_by: SmallSet,
}

impl SubBlockId {
    pub fn new(block: BlockId, cached_by: SmallSet) -> Self {
        SubBlockId { block, cached_by }
    }
}

impl fmt::Display for SubBlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|V{}", self.block, self.cached_by)
    }
}

impl fmt::Debug for SubBlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A shared-link caching instance with correlated files.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProblemInstance {
    n_files: u32,
    n_users: u32,
    memory: Rat,
    overlap: u32,
}

impl ProblemInstance {
    /// Validates parameters: `1 <= overlap <= n_files`, counts within the
    /// packed-set width, and `0 <= memory <= n_files / overlap`.
    ///
    /// ```
    /// use corrcache::{ProblemInstance, rational::frac};
    /// let inst = ProblemInstance::new(3, 5, frac(3, 5), 2).unwrap();
    /// assert_eq!(inst.cache_multiplicity(), frac(2, 1));
    /// assert!(ProblemInstance::new(3, 5, frac(8, 5), 2).is_err());
    /// ```
    pub fn new(n_files: u32, n_users: u32, memory: Rat, overlap: u32) -> Result<Self, Error> {
        if n_files == 0 || n_files > crate::sets::MAX_ELEMENT {
            return Err(Error::FileCountOutOfRange { n_files });
        }
        if n_users == 0 || n_users > crate::sets::MAX_ELEMENT {
            return Err(Error::UserCountOutOfRange { n_users });
        }
        if overlap == 0 || overlap > n_files {
            return Err(Error::OverlapOutOfRange { overlap, n_files });
        }
        let max = ratio(BigInt::from(n_files), BigInt::from(overlap));
        if memory.is_negative() || memory > max {
            return Err(Error::MemoryOutOfRange { memory, max });
        }
        Ok(ProblemInstance {
            n_files,
            n_users,
            memory,
            overlap,
        })
    }

    pub fn n_files(&self) -> u32 {
        self.n_files
    }

    pub fn n_users(&self) -> u32 {
        self.n_users
    }

    pub fn memory(&self) -> &Rat {
        &self.memory
    }

    pub fn overlap(&self) -> u32 {
        self.overlap
    }

    /// Set `{1..n_files}`.
    pub fn files(&self) -> SmallSet {
        SmallSet::full(self.n_files)
    }

    /// Set `{1..n_users}`.
    pub fn users(&self) -> SmallSet {
        SmallSet::full(self.n_users)
    }

    /// Placement parameter `t = n_users * memory * overlap / n_files`: the
    /// number of users holding each cached sub-block, when integral.
    pub fn cache_multiplicity(&self) -> Rat {
        &self.memory * int(i64::from(self.n_users) * i64::from(self.overlap))
            / int(i64::from(self.n_files))
    }

    /// The placement parameter as an integer, or an error when the memory
    /// size does not sit on a placement corner.
    pub fn integral_multiplicity(&self) -> Result<u32, Error> {
        let t = self.cache_multiplicity();
        if !t.is_integer() {
            return Err(Error::NonIntegralPlacement { t });
        }
        // Memory validation bounds t to [0, n_users] already.
        Ok(t.to_integer().to_u32().expect("t within 0..=n_users"))
    }

    /// Blocks per file: `C(n_files - 1, overlap - 1)`.
    pub fn blocks_per_file(&self) -> usize {
        binom_usize(self.n_files - 1, self.overlap - 1)
    }

    /// Total blocks in the library: `C(n_files, overlap)`.
    pub fn block_count(&self) -> usize {
        binom_usize(self.n_files, self.overlap)
    }

    /// Sub-blocks per block at the current placement: `C(n_users, t)`.
    pub fn subblocks_per_block(&self) -> Result<usize, Error> {
        let t = self.integral_multiplicity()?;
        Ok(binom_usize(self.n_users, t))
    }

    /// File size in sub-block units: every sub-block is exactly one unit.
    pub fn file_size_units(&self) -> Result<BigInt, Error> {
        let t = self.integral_multiplicity()?;
        Ok(binom(self.n_files - 1, self.overlap - 1) * binom(self.n_users, t))
    }

    /// All blocks in lexicographic order of their file sets.
    pub fn enumerate_blocks(&self) -> Vec<BlockId> {
        k_subsets(self.files(), self.overlap as usize)
            .into_iter()
            .map(BlockId::new)
            .collect()
    }

    /// Blocks making up one file, in lexicographic order.
    pub fn blocks_of_file(&self, file: u32) -> Result<Vec<BlockId>, Error> {
        if file == 0 || file > self.n_files {
            return Err(Error::FileOutOfRange {
                file,
                n_files: self.n_files,
            });
        }
        let rest = self.files().without(file);
        Ok(k_subsets(rest, self.overlap as usize - 1)
            .into_iter()
            .map(|s| BlockId::new(s.with(file)))
            .collect())
    }
}

/// A demand vector: entry `k - 1` is the file requested by user `k`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Demand {
    entries: Vec<u32>,
}

impl Demand {
    pub fn new(inst: &ProblemInstance, entries: Vec<u32>) -> Result<Self, Error> {
        if entries.len() != inst.n_users() as usize {
            return Err(Error::DemandLength {
                expected: inst.n_users(),
                got: entries.len(),
            });
        }
        for (i, &file) in entries.iter().enumerate() {
            if file == 0 || file > inst.n_files() {
                return Err(Error::DemandEntryOutOfRange {
                    position: i + 1,
                    file,
                    n_files: inst.n_files(),
                });
            }
        }
        Ok(Demand { entries })
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn n_users(&self) -> u32 {
        self.entries.len() as u32
    }

    /// File demanded by `user` (1-based).
    pub fn file_of(&self, user: u32) -> u32 {
        self.entries[user as usize - 1]
    }

    /// Set of distinct demanded files.
    pub fn distinct_files(&self) -> SmallSet {
        SmallSet::from_elems(self.entries.iter().copied())
    }

    /// Number of distinct demanded files (the demand's type).
    pub fn distinct_count(&self) -> usize {
        self.distinct_files().len()
    }
}

/// An ordered pick of one leader user per distinct demanded file.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Leaders {
    users: Vec<u32>,
}

impl Leaders {
    /// Default policy: the first user demanding each distinct file, ordered
    /// by first occurrence in the demand vector.
    pub fn first_occurrence(demand: &Demand) -> Self {
        let mut seen = SmallSet::EMPTY;
        let mut users = Vec::new();
        for (i, &file) in demand.entries().iter().enumerate() {
            if !seen.contains(file) {
                seen.insert(file);
                users.push(i as u32 + 1);
            }
        }
        Leaders { users }
    }

    /// Explicit leader permutation. Any user demanding a file may lead it;
    /// the list must name exactly one leader per distinct demanded file, in
    /// any order.
    pub fn explicit(demand: &Demand, users: Vec<u32>) -> Result<Self, Error> {
        if users.len() != demand.distinct_count() {
            return Err(Error::LeaderCountMismatch {
                expected: demand.distinct_count(),
                got: users.len(),
            });
        }
        let mut led = SmallSet::EMPTY;
        for &u in &users {
            if u == 0 || u > demand.n_users() {
                return Err(Error::LeaderNotUser {
                    user: u,
                    n_users: demand.n_users(),
                });
            }
            let file = demand.file_of(u);
            if led.contains(file) {
                return Err(Error::DuplicateLeaderFile { file });
            }
            led.insert(file);
        }
        Ok(Leaders { users })
    }

    /// Number of leaders, equal to the demand's distinct count.
    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn users(&self) -> &[u32] {
        &self.users
    }

    /// Leader at step `j` (1-based).
    pub fn user(&self, j: u32) -> u32 {
        self.users[j as usize - 1]
    }

    /// Leaders of the first `j` steps as a set.
    pub fn prefix_users(&self, j: u32) -> SmallSet {
        SmallSet::from_elems(self.users[..j as usize].iter().copied())
    }

    /// Files demanded by the first `j` leaders as a set.
    pub fn prefix_files(&self, demand: &Demand, j: u32) -> SmallSet {
        SmallSet::from_elems(self.users[..j as usize].iter().map(|&u| demand.file_of(u)))
    }
}

/// Number of demand vectors over `n_users` users and `n_files` files with
/// exactly `s` distinct entries: `C(n_files, s)` file choices times the
/// surjections of users onto those files.
pub fn count_demands_with_s_distinct(n_files: u32, n_users: u32, s: u32) -> Result<BigInt, Error> {
    let max = n_files.min(n_users);
    if s == 0 || s > max {
        return Err(Error::TypeOutOfRange { s, max });
    }
    Ok(binom(n_files, s) * surjections(n_users, s))
}
