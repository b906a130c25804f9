//! Helpers shared by the integration suites.
#![allow(dead_code)]

use corrcache::scheme::Transmission;
use corrcache::{BlockId, SmallSet, SubBlockId};
use std::collections::{BTreeMap, BTreeSet};

/// Group contents keyed by tag, with rows as term sets, after relabeling
/// users and files through inverse lookup tables (`inv[old] = new`,
/// index 0 unused).
pub fn canonical_groups(
    tx: &Transmission,
    inv_user: &[u32],
    inv_file: &[u32],
) -> BTreeMap<(u32, SmallSet, SmallSet), BTreeSet<BTreeSet<SubBlockId>>> {
    let map_set = |s: SmallSet, inv: &[u32]| {
        SmallSet::from_elems(s.iter().map(|e| inv[e as usize]))
    };
    let mut out = BTreeMap::new();
    for g in tx.groups() {
        let key = (
            g.tag.step,
            map_set(g.tag.users, inv_user),
            map_set(g.tag.residue, inv_file),
        );
        let rows: BTreeSet<BTreeSet<SubBlockId>> = g
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|term| {
                        SubBlockId::new(
                            BlockId::new(map_set(term.block.files(), inv_file)),
                            map_set(term.cached_by, inv_user),
                        )
                    })
                    .collect()
            })
            .collect();
        let clash = out.insert(key, rows);
        assert!(clash.is_none(), "relabeling must keep group tags distinct");
    }
    out
}

/// Identity lookup table usable with [`canonical_groups`].
pub fn identity_table(len: u32) -> Vec<u32> {
    (0..=len).collect()
}

/// Inverse lookup table of a permutation given as `perm[new - 1] = old`.
pub fn inverse_table(perm: &[u32]) -> Vec<u32> {
    let mut inv = vec![0u32; perm.len() + 1];
    for (i, &old) in perm.iter().enumerate() {
        inv[old as usize] = i as u32 + 1;
    }
    inv
}

/// Demand hitting files cyclically: user `k` asks for file
/// `(k - 1) mod n + 1`.
pub fn cyclic_demand(n_files: u32, n_users: u32) -> Vec<u32> {
    (0..n_users).map(|u| u % n_files + 1).collect()
}

/// Small deterministic generator for seeded pseudo-random test cases.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg(seed | 1)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0
    }

    /// Uniform-ish draw from `0..bound`.
    pub fn below(&mut self, bound: u64) -> u64 {
        (self.next_u64() >> 32) % bound
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
