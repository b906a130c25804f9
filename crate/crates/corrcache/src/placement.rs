//! Symmetric uncoded cache placement.
//!
//! Each block splits into `C(n_users, t)` equal sub-blocks tagged by the
//! `t`-subsets of users; user `k` caches every sub-block whose tag contains
//! `k`. The placement is demand-oblivious and fills each cache to exactly
//! the memory budget.

use crate::error::Error;
use crate::model::{ProblemInstance, SubBlockId};
use crate::rational::{ratio, Rat};
use crate::sets::k_subsets;
use num_bigint::BigInt;

/// Per-user cache contents, each sorted by sub-block identifier.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CacheAssignment {
    per_user: Vec<Vec<SubBlockId>>,
}

impl CacheAssignment {
    /// Cache of `user` (1-based), sorted.
    pub fn user_cache(&self, user: u32) -> &[SubBlockId] {
        &self.per_user[user as usize - 1]
    }

    pub fn n_users(&self) -> u32 {
        self.per_user.len() as u32
    }

    /// Cache size of `user` in file units; equals the instance memory for
    /// every user.
    pub fn cache_size_files(&self, inst: &ProblemInstance, user: u32) -> Result<Rat, Error> {
        let units = self.user_cache(user).len();
        Ok(ratio(BigInt::from(units), inst.file_size_units()?))
    }
}

/// Builds the placement for an instance whose memory sits on a corner
/// (integral `t`). Every user caches the sub-blocks whose tag contains it.
pub fn man_placement(inst: &ProblemInstance) -> Result<CacheAssignment, Error> {
    let t = inst.integral_multiplicity()?;
    let tags = k_subsets(inst.users(), t as usize);
    let mut per_user: Vec<Vec<SubBlockId>> = vec![Vec::new(); inst.n_users() as usize];
    for block in inst.enumerate_blocks() {
        for &tag in &tags {
            for user in tag.iter() {
                per_user[user as usize - 1].push(SubBlockId::new(block, tag));
            }
        }
    }
    // Blocks ascend outermost and tags ascend innermost, so each cache is
    // already sorted; keep the invariant explicit.
    for cache in &mut per_user {
        debug_assert!(cache.windows(2).all(|w| w[0] < w[1]));
    }
    Ok(CacheAssignment { per_user })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BlockId;
    use crate::rational::{frac, int};

    fn inst(n: u32, k: u32, m: Rat, r: u32) -> ProblemInstance {
        ProblemInstance::new(n, k, m, r).unwrap()
    }

    #[test]
    fn worked_instance_cache_contents() {
        let i = inst(3, 5, frac(3, 5), 2);
        let cache = man_placement(&i).unwrap();
        // 3 blocks times C(4,1) = 4 tags containing the user.
        for user in 1..=5 {
            assert_eq!(cache.user_cache(user).len(), 12);
            assert_eq!(cache.cache_size_files(&i, user).unwrap(), frac(3, 5));
            for sb in cache.user_cache(user) {
                assert!(sb.cached_by.contains(user));
                assert_eq!(sb.cached_by.len(), 2);
            }
        }
        // Spot-check the first entries of user 3's cache.
        let head: Vec<String> = cache.user_cache(3)[..3]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(head, vec!["S{1,2}|V{1,3}", "S{1,2}|V{2,3}", "S{1,2}|V{3,4}"]);
    }

    #[test]
    fn empty_and_full_corners() {
        let empty = inst(3, 4, int(0), 2);
        let cache = man_placement(&empty).unwrap();
        for user in 1..=4 {
            assert!(cache.user_cache(user).is_empty());
            assert_eq!(cache.cache_size_files(&empty, user).unwrap(), int(0));
        }

        let full = inst(3, 4, frac(3, 2), 2);
        let cache = man_placement(&full).unwrap();
        for user in 1..=4 {
            // All 3 blocks in one piece each, tagged by all users.
            assert_eq!(cache.user_cache(user).len(), 3);
            assert_eq!(cache.cache_size_files(&full, user).unwrap(), frac(3, 2));
        }
    }

    #[test]
    fn refuses_non_corner_memory() {
        let i = inst(3, 5, frac(1, 2), 2);
        assert!(matches!(
            man_placement(&i),
            Err(Error::NonIntegralPlacement { .. })
        ));
    }

    #[test]
    fn every_subblock_cached_by_tag_members_only() {
        let i = inst(4, 4, int(1), 2);
        assert_eq!(i.integral_multiplicity().unwrap(), 2);
        let cache = man_placement(&i).unwrap();
        // Each user: C(4,2) = 6 blocks, C(3,1) = 3 tags each.
        for user in 1..=4 {
            assert_eq!(cache.user_cache(user).len(), 18);
            assert_eq!(cache.cache_size_files(&i, user).unwrap(), int(1));
        }
        // Cross-user consistency: k holds S|V exactly when k is in V.
        let all: Vec<SubBlockId> = i
            .enumerate_blocks()
            .into_iter()
            .flat_map(|b: BlockId| {
                k_subsets(i.users(), 2)
                    .into_iter()
                    .map(move |v| SubBlockId::new(b, v))
            })
            .collect();
        for user in 1..=4u32 {
            for sb in &all {
                let held = cache.user_cache(user).binary_search(sb).is_ok();
                assert_eq!(held, sb.cached_by.contains(user));
            }
        }
    }
}
