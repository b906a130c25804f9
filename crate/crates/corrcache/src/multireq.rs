//! Multi-request delivery at unit cache granularity.
//!
//! Here each of `K` users requests a set of whole files, every file is
//! split into `K` subfiles, and user `k` caches subfile `F{i}|V{k}` of
//! every file `i`. This is the shape an aligned block delivery takes when
//! each sub-block is cached by exactly one user: blocks become files,
//! sub-blocks become subfiles, and a demand for one composite file becomes
//! a request for the set of blocks it is made of.
//!
//! Four hand-built deliveries for this model are bundled, each beating the
//! best previously published load for its demand pattern. All four are
//! checked by the same GF(2) oracle as the block scheme, and the two whose
//! demand patterns arise from composite-file instances are compared
//! row-for-row against [`crate::scheme::build_delivery`].

use crate::error::Error;
use crate::model::{Demand, Leaders, ProblemInstance};
use crate::rational::{frac, Rat};
use crate::scheme::build_delivery;
use crate::sets::SmallSet;
use crate::verify::Gf2Matrix;
use std::collections::BTreeSet;
use std::fmt;

/// One subfile: file index plus the single user caching it.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subfile {
    pub file: u32,
    pub cached_at: u32,
}

impl fmt::Display for Subfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}|V{{{}}}", self.file, self.cached_at)
    }
}

impl fmt::Debug for Subfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn sf(file: u32, cached_at: u32) -> Subfile {
    Subfile { file, cached_at }
}

/// A complete multi-request instance with its broadcast rows.
#[derive(Clone, Debug)]
pub struct MultiRequestCase {
    pub id: CaseId,
    pub n_files: u32,
    pub n_users: u32,
    /// Requested file set per user, index `k - 1`.
    pub demands: Vec<SmallSet>,
    /// Users granted one new file each, in serving order.
    pub leaders: Vec<u32>,
    /// Best previously published load for this demand pattern.
    pub prior_load: Rat,
    pub rows: Vec<Vec<Subfile>>,
}

impl MultiRequestCase {
    /// Broadcast load in file units: one row costs one subfile.
    pub fn load(&self) -> Rat {
        frac(self.rows.len() as i64, i64::from(self.n_users))
    }
}

/// The bundled demand patterns.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CaseId {
    /// 3 users, 3 files, pairwise-overlapping two-file demands.
    Triangle,
    /// 4 users, 5 files, one demand disjoint from the other three.
    DisjointPair,
    /// 4 users, 4 files, one file requested by three of the users.
    Star,
    /// 4 users, 3 files, two users with identical demands.
    RepeatedPair,
}

impl CaseId {
    pub const ALL: [CaseId; 4] = [
        CaseId::Triangle,
        CaseId::DisjointPair,
        CaseId::Star,
        CaseId::RepeatedPair,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            CaseId::Triangle => "triangle",
            CaseId::DisjointPair => "disjoint-pair",
            CaseId::Star => "star",
            CaseId::RepeatedPair => "repeated-pair",
        }
    }

    pub fn from_slug(slug: &str) -> Option<CaseId> {
        CaseId::ALL.into_iter().find(|c| c.slug() == slug)
    }

    pub fn describe(self) -> &'static str {
        match self {
            CaseId::Triangle => "3 users, 3 files, pairwise-overlapping demands",
            CaseId::DisjointPair => "4 users, 5 files, one demand disjoint from the rest",
            CaseId::Star => "4 users, 4 files, one file shared by three demands",
            CaseId::RepeatedPair => "4 users, 3 files, two identical demands",
        }
    }
}

/// The bundled delivery for one demand pattern.
pub fn case(id: CaseId) -> MultiRequestCase {
    match id {
        CaseId::Triangle => MultiRequestCase {
            id,
            n_files: 3,
            n_users: 3,
            demands: vec![
                SmallSet::from_elems([1, 2]),
                SmallSet::from_elems([1, 3]),
                SmallSet::from_elems([2, 3]),
            ],
            leaders: vec![1, 2, 3],
            prior_load: frac(2, 1),
            rows: vec![
                vec![sf(1, 2), sf(1, 1)],
                vec![sf(1, 3), sf(3, 1)],
                vec![sf(2, 2), sf(3, 1)],
                vec![sf(2, 3), sf(2, 1)],
                vec![sf(3, 3), sf(3, 2)],
            ],
        },
        CaseId::DisjointPair => MultiRequestCase {
            id,
            n_files: 5,
            n_users: 4,
            demands: vec![
                SmallSet::from_elems([1, 2]),
                SmallSet::from_elems([1, 3]),
                SmallSet::from_elems([2, 3]),
                SmallSet::from_elems([4, 5]),
            ],
            leaders: vec![4, 1, 2, 3],
            prior_load: frac(3, 1),
            rows: vec![
                vec![sf(4, 1), sf(1, 4)],
                vec![sf(4, 2), sf(1, 4)],
                vec![sf(4, 3), sf(3, 4)],
                vec![sf(5, 1), sf(2, 4)],
                vec![sf(5, 2), sf(3, 4)],
                vec![sf(5, 3), sf(2, 4)],
                vec![sf(1, 2), sf(1, 1)],
                vec![sf(1, 3), sf(3, 1)],
                vec![sf(2, 2), sf(3, 1)],
                vec![sf(2, 3), sf(2, 1)],
                vec![sf(3, 3), sf(3, 2)],
            ],
        },
        CaseId::Star => MultiRequestCase {
            id,
            n_files: 4,
            n_users: 4,
            demands: vec![
                SmallSet::from_elems([1, 2]),
                SmallSet::from_elems([1, 3]),
                SmallSet::from_elems([1, 4]),
                SmallSet::from_elems([2, 3]),
            ],
            leaders: vec![3, 4, 1, 2],
            prior_load: frac(11, 4),
            rows: vec![
                vec![sf(1, 1), sf(1, 3)],
                vec![sf(1, 2), sf(1, 3)],
                vec![sf(1, 4), sf(3, 3)],
                vec![sf(4, 1), sf(2, 3)],
                vec![sf(4, 2), sf(3, 3)],
                vec![sf(4, 4), sf(2, 3)],
                vec![sf(3, 1), sf(1, 4)],
                vec![sf(3, 2), sf(3, 4)],
                vec![sf(2, 1), sf(2, 4)],
                vec![sf(2, 2), sf(1, 4)],
            ],
        },
        CaseId::RepeatedPair => MultiRequestCase {
            id,
            n_files: 3,
            n_users: 4,
            demands: vec![
                SmallSet::from_elems([1, 2]),
                SmallSet::from_elems([1, 2]),
                SmallSet::from_elems([1, 3]),
                SmallSet::from_elems([2, 3]),
            ],
            leaders: vec![1, 3, 4],
            prior_load: frac(9, 4),
            rows: vec![
                vec![sf(1, 2), sf(1, 1)],
                vec![sf(1, 3), sf(1, 1)],
                vec![sf(1, 4), sf(3, 1)],
                vec![sf(2, 2), sf(2, 1)],
                vec![sf(2, 3), sf(3, 1)],
                vec![sf(2, 4), sf(2, 1)],
                vec![sf(3, 2), sf(2, 3)],
                vec![sf(3, 4), sf(3, 3)],
            ],
        },
    }
}

fn column(case: &MultiRequestCase, s: Subfile) -> Result<usize, Error> {
    if s.file == 0 || s.file > case.n_files {
        return Err(Error::FileOutOfRange {
            file: s.file,
            n_files: case.n_files,
        });
    }
    if s.cached_at == 0 || s.cached_at > case.n_users {
        return Err(Error::UserOutOfRange {
            user: s.cached_at,
            n_users: case.n_users,
        });
    }
    Ok((s.file - 1) as usize * case.n_users as usize + (s.cached_at - 1) as usize)
}

/// Decode outcome for one multi-request user.
#[derive(Clone, Debug)]
pub struct MultiUserDecode {
    pub user: u32,
    pub desired: usize,
    pub recovered: usize,
    pub missing: Vec<Subfile>,
}

/// Oracle verdict on one multi-request delivery.
#[derive(Clone, Debug)]
pub struct MultiVerifyReport {
    pub users: Vec<MultiUserDecode>,
    pub load: Rat,
}

impl MultiVerifyReport {
    pub fn all_decoded(&self) -> bool {
        self.users.iter().all(|u| u.missing.is_empty())
    }
}

/// Checks by GF(2) rank that every user recovers every subfile of every
/// file it requested, from its cache plus the broadcast rows.
pub fn verify_case(case: &MultiRequestCase) -> Result<MultiVerifyReport, Error> {
    let cols = case.n_files as usize * case.n_users as usize;
    let mut broadcast = Gf2Matrix::new(cols);
    for row in &case.rows {
        let mut packed = vec![0u64; cols.div_ceil(64).max(1)];
        for &s in row {
            let c = column(case, s)?;
            packed[c / 64] ^= 1 << (c % 64);
        }
        broadcast.insert(packed);
    }
    let mut users = Vec::new();
    for user in 1..=case.n_users {
        let mut known = broadcast.clone();
        for file in 1..=case.n_files {
            let c = column(case, sf(file, user))?;
            let unit = known.unit(c);
            known.insert(unit);
        }
        let mut desired = 0;
        let mut missing = Vec::new();
        for file in case.demands[user as usize - 1].iter() {
            for holder in 1..=case.n_users {
                desired += 1;
                if !known.contains_unit(column(case, sf(file, holder))?) {
                    missing.push(sf(file, holder));
                }
            }
        }
        users.push(MultiUserDecode {
            user,
            desired,
            recovered: desired - missing.len(),
            missing,
        });
    }
    Ok(MultiVerifyReport {
        users,
        load: case.load(),
    })
}

/// The multi-request demand pattern induced by a composite-file demand:
/// each user's requested file becomes the set of ranks of its blocks.
pub fn blockwise_demands(
    inst: &ProblemInstance,
    demand: &Demand,
) -> Result<Vec<SmallSet>, Error> {
    let blocks = inst.enumerate_blocks();
    let mut out = Vec::with_capacity(inst.n_users() as usize);
    for user in 1..=inst.n_users() {
        let mut set = SmallSet::EMPTY;
        for b in inst.blocks_of_file(demand.file_of(user))? {
            let rank = blocks.binary_search(&b).expect("block enumerated") as u32 + 1;
            set.insert(rank);
        }
        out.push(set);
    }
    Ok(out)
}

/// Re-expresses an aligned block delivery in subfile notation, with blocks
/// numbered by rank. Requires caching multiplicity one, so every
/// sub-block's caching set is a single user.
pub fn delivery_as_subfile_rows(
    inst: &ProblemInstance,
    demand: &Demand,
    leaders: &Leaders,
) -> Result<Vec<Vec<Subfile>>, Error> {
    let t = inst.integral_multiplicity()?;
    if t != 1 {
        return Err(Error::UnsupportedGranularity { t });
    }
    let blocks = inst.enumerate_blocks();
    let tx = build_delivery(inst, demand, leaders)?;
    let mut rows = Vec::with_capacity(tx.combination_count());
    for combo in tx.combinations() {
        let row = combo
            .terms
            .iter()
            .map(|term| {
                let rank = blocks.binary_search(&term.block).expect("block enumerated");
                let holder = term.cached_by.iter().next().expect("one caching user");
                sf(rank as u32 + 1, holder)
            })
            .collect();
        rows.push(row);
    }
    Ok(rows)
}

/// Order-insensitive view of a row list, for comparing deliveries.
pub fn row_set(rows: &[Vec<Subfile>]) -> BTreeSet<BTreeSet<Subfile>> {
    rows.iter()
        .map(|r| r.iter().copied().collect())
        .collect()
}
