//! Aligned delivery construction.
//!
//! Delivery runs in steps `j = 1..=min(n_files - overlap + 1, n_users - t,
//! distinct_count)`, one step per leading leader. In step `j`, every
//! `(t+1)`-user set `J` containing leader `u_j` and no earlier leader is
//! served: the blocks demanded inside `J` that contain at most one of the
//! first `j` leader files are partitioned into groups by their residue `B`
//! (files outside the demands of `J`), and each group emits one XOR row per
//! block demanded by `u_j`. Blocks in a group not demanded by `u_j` are
//! folded into every row whose block shares `overlap - 1` files with them,
//! which aligns their interference so non-leaders can cancel it.
//!
//! Rows are emitted in `(step, J, B)` order with all sets compared
//! lexicographically, so a transmission is a deterministic function of the
//! instance, demand, and leader permutation.

use crate::error::Error;
use crate::model::{BlockId, Demand, Leaders, ProblemInstance, SubBlockId};
use crate::sets::{k_subsets, SmallSet};
use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Serialize, Serializer};
use std::collections::BTreeSet;

/// Coordinates of one delivery group: step, user set `J`, residue `B`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct GroupTag {
    pub step: u32,
    pub users: SmallSet,
    pub residue: SmallSet,
}

/// A group before emission: its ordered blocks and how many of them are
/// demanded by the step leader (those come first).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GroupBlocks {
    pub tag: GroupTag,
    pub blocks: Vec<BlockId>,
    pub leader_block_count: usize,
}

/// An emitted group: one XOR row per leader block.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EmittedGroup {
    pub tag: GroupTag,
    pub rows: Vec<Vec<SubBlockId>>,
}

/// One broadcast XOR combination, borrowed from a transmission.
#[derive(Clone, Copy, Debug)]
pub struct LinearCombination<'a> {
    pub origin: &'a GroupTag,
    pub row_index: usize,
    pub terms: &'a [SubBlockId],
}

/// A full delivery: all emitting groups in deterministic order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Transmission {
    groups: Vec<EmittedGroup>,
}

impl Transmission {
    pub fn groups(&self) -> &[EmittedGroup] {
        &self.groups
    }

    /// Assembles a transmission from explicit groups, e.g. to replay or
    /// perturb a stored delivery.
    pub fn from_groups(groups: Vec<EmittedGroup>) -> Self {
        Transmission { groups }
    }

    /// Total number of broadcast combinations.
    pub fn combination_count(&self) -> usize {
        self.groups.iter().map(|g| g.rows.len()).sum()
    }

    /// All combinations in emission order.
    pub fn combinations(&self) -> impl Iterator<Item = LinearCombination<'_>> {
        self.groups.iter().flat_map(|g| {
            g.rows.iter().enumerate().map(move |(i, row)| LinearCombination {
                origin: &g.tag,
                row_index: i + 1,
                terms: row,
            })
        })
    }
}

impl Serialize for EmittedGroup {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Group", 4)?;
        st.serialize_field("step", &self.tag.step)?;
        st.serialize_field("J", &self.tag.users.elems())?;
        st.serialize_field("B", &self.tag.residue.elems())?;
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|row| row.iter().map(|t| t.to_string()).collect())
            .collect();
        st.serialize_field("rows", &rows)?;
        st.end()
    }
}

impl Serialize for Transmission {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.groups.len()))?;
        for g in &self.groups {
            seq.serialize_element(g)?;
        }
        seq.end()
    }
}

/// Number of delivery steps for a demand:
/// `min(n_files - overlap + 1, n_users - t, distinct_count)`.
pub fn delivery_step_count(inst: &ProblemInstance, demand: &Demand) -> Result<u32, Error> {
    let t = inst.integral_multiplicity()?;
    let by_files = inst.n_files() - inst.overlap() + 1;
    let by_users = inst.n_users() - t;
    let by_demand = demand.distinct_count() as u32;
    Ok(by_files.min(by_users).min(by_demand))
}

fn check_users(inst: &ProblemInstance, users: SmallSet) -> Result<(), Error> {
    if users.is_empty() {
        return Err(Error::EmptyUserSet);
    }
    if !users.is_subset_of(inst.users()) {
        let user = users.difference(inst.users()).iter().next().unwrap();
        return Err(Error::UserOutOfRange {
            user,
            n_users: inst.n_users(),
        });
    }
    Ok(())
}

/// Blocks demanded by at least one user in `users`.
pub fn union_blocks(
    inst: &ProblemInstance,
    demand: &Demand,
    users: SmallSet,
) -> Result<Vec<BlockId>, Error> {
    check_users(inst, users)?;
    let mut set = BTreeSet::new();
    for user in users.iter() {
        set.extend(inst.blocks_of_file(demand.file_of(user))?);
    }
    Ok(set.into_iter().collect())
}

/// Blocks demanded by every user in `users`.
pub fn intersection_blocks(
    inst: &ProblemInstance,
    demand: &Demand,
    users: SmallSet,
) -> Result<Vec<BlockId>, Error> {
    check_users(inst, users)?;
    let mut iter = users.iter();
    let first = iter.next().unwrap();
    let mut set: BTreeSet<BlockId> = inst.blocks_of_file(demand.file_of(first))?.into_iter().collect();
    for user in iter {
        let other: BTreeSet<BlockId> =
            inst.blocks_of_file(demand.file_of(user))?.into_iter().collect();
        set.retain(|b| other.contains(b));
    }
    Ok(set.into_iter().collect())
}

/// Checks that `users` is a valid group user set for `step` and returns the
/// placement parameter.
fn check_group_users(
    inst: &ProblemInstance,
    demand: &Demand,
    leaders: &Leaders,
    step: u32,
    users: SmallSet,
) -> Result<u32, Error> {
    let t = inst.integral_multiplicity()?;
    let steps = delivery_step_count(inst, demand)?;
    if step == 0 || step > steps {
        return Err(Error::StepOutOfRange { step, steps });
    }
    check_users(inst, users)?;
    if users.len() != t as usize + 1 {
        return Err(Error::WrongGroupSize {
            got: users.len(),
            expected: t as usize + 1,
        });
    }
    let leader = leaders.user(step);
    if !users.contains(leader) {
        return Err(Error::LeaderMissingFromGroup { step, leader });
    }
    let earlier = users.intersection(leaders.prefix_users(step - 1));
    if let Some(user) = earlier.iter().next() {
        return Err(Error::EarlierLeaderInGroup { step, user });
    }
    Ok(t)
}

/// Blocks served to `users` in `step`: the union of their demanded blocks
/// minus every block containing two or more of the first `step` leader
/// files (those were fully handled in earlier steps).
pub fn candidate_blocks(
    inst: &ProblemInstance,
    demand: &Demand,
    leaders: &Leaders,
    step: u32,
    users: SmallSet,
) -> Result<Vec<BlockId>, Error> {
    check_group_users(inst, demand, leaders, step, users)?;
    let settled = leaders.prefix_files(demand, step);
    Ok(union_blocks(inst, demand, users)?
        .into_iter()
        .filter(|b| b.files().intersection(settled).len() < 2)
        .collect())
}

/// Splits the candidate blocks of `(step, users)` into groups by residue
/// (files outside the demands of `users`), ordered by residue; within each
/// group the leader's blocks come first, both parts sorted.
pub fn partition_groups(
    inst: &ProblemInstance,
    demand: &Demand,
    leaders: &Leaders,
    step: u32,
    users: SmallSet,
) -> Result<Vec<GroupBlocks>, Error> {
    let candidates = candidate_blocks(inst, demand, leaders, step, users)?;
    let demanded: SmallSet =
        SmallSet::from_elems(users.iter().map(|u| demand.file_of(u)));
    let lead_file = demand.file_of(leaders.user(step));
    let mut groups: Vec<GroupBlocks> = Vec::new();
    // Candidates arrive sorted; a stable two-pass split keeps each segment
    // sorted without re-sorting.
    let mut residues: Vec<SmallSet> = candidates
        .iter()
        .map(|b| b.files().difference(demanded))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    residues.sort();
    for residue in residues {
        let mut blocks: Vec<BlockId> = Vec::new();
        let mut rest: Vec<BlockId> = Vec::new();
        for b in &candidates {
            if b.files().difference(demanded) != residue {
                continue;
            }
            if b.involves(lead_file) {
                blocks.push(*b);
            } else {
                rest.push(*b);
            }
        }
        let leader_block_count = blocks.len();
        blocks.extend(rest);
        groups.push(GroupBlocks {
            tag: GroupTag {
                step,
                users,
                residue,
            },
            blocks,
            leader_block_count,
        });
    }
    Ok(groups)
}

/// Number of combinations a group emits: its leader-demanded block count.
pub fn group_combination_count(
    inst: &ProblemInstance,
    demand: &Demand,
    leaders: &Leaders,
    step: u32,
    users: SmallSet,
    residue: SmallSet,
) -> Result<usize, Error> {
    let groups = partition_groups(inst, demand, leaders, step, users)?;
    groups
        .iter()
        .find(|g| g.tag.residue == residue)
        .map(|g| g.leader_block_count)
        .ok_or(Error::UnknownGroup {
            step,
            users,
            residue,
        })
}

/// XOR term a block contributes: one sub-block per group user demanding it,
/// tagged by the other group users.
fn block_term(block: BlockId, users: SmallSet, demand: &Demand) -> Vec<SubBlockId> {
    users
        .iter()
        .filter(|&k| block.involves(demand.file_of(k)))
        .map(|k| SubBlockId::new(block, users.without(k)))
        .collect()
}

/// Emits the XOR rows of one group: row `p` carries the term of the `p`-th
/// leader block, plus the term of every non-leader block sharing all but
/// one file with it.
pub fn emit_group_combinations(
    inst: &ProblemInstance,
    demand: &Demand,
    leaders: &Leaders,
    group: &GroupBlocks,
) -> Result<Vec<Vec<SubBlockId>>, Error> {
    check_group_users(inst, demand, leaders, group.tag.step, group.tag.users)?;
    let lead_file = demand.file_of(leaders.user(group.tag.step));
    let n = group.leader_block_count;
    if n > group.blocks.len() {
        return Err(Error::GroupOrdering {
            position: group.blocks.len() + 1,
        });
    }
    for (i, b) in group.blocks.iter().enumerate() {
        let ordered = if i < n {
            b.involves(lead_file) && (i == 0 || group.blocks[i - 1] < *b)
        } else {
            !b.involves(lead_file) && (i == n || group.blocks[i - 1] < *b)
        };
        if !ordered {
            return Err(Error::GroupOrdering { position: i + 1 });
        }
    }

    let overlap = inst.overlap() as usize;
    let terms: Vec<Vec<SubBlockId>> = group
        .blocks
        .iter()
        .map(|&b| block_term(b, group.tag.users, demand))
        .collect();
    let mut rows: Vec<Vec<SubBlockId>> = terms[..n].to_vec();
    for q in n..group.blocks.len() {
        for p in 0..n {
            let shared = group.blocks[p]
                .files()
                .intersection(group.blocks[q].files())
                .len();
            if shared == overlap - 1 {
                rows[p].extend_from_slice(&terms[q]);
            }
        }
    }
    for row in &mut rows {
        row.sort();
        debug_assert!(row.windows(2).all(|w| w[0] < w[1]), "duplicate XOR term");
    }
    Ok(rows)
}

/// Builds the full delivery for a demand under a leader permutation.
///
/// ```
/// use corrcache::{scheme, Demand, Leaders, ProblemInstance, rational::frac};
/// let inst = ProblemInstance::new(3, 5, frac(3, 5), 2).unwrap();
/// let d = Demand::new(&inst, vec![1, 2, 3, 1, 2]).unwrap();
/// let leaders = Leaders::first_occurrence(&d);
/// let tx = scheme::build_delivery(&inst, &d, &leaders).unwrap();
/// assert_eq!(tx.combination_count(), 15);
/// ```
pub fn build_delivery(
    inst: &ProblemInstance,
    demand: &Demand,
    leaders: &Leaders,
) -> Result<Transmission, Error> {
    // Re-validate the leader list against this demand; an explicit list may
    // have been built elsewhere.
    Leaders::explicit(demand, leaders.users().to_vec())?;
    let t = inst.integral_multiplicity()?;
    let steps = delivery_step_count(inst, demand)?;
    let mut groups: Vec<EmittedGroup> = Vec::new();
    for step in 1..=steps {
        let leader = leaders.user(step);
        let available = inst.users().difference(leaders.prefix_users(step - 1));
        let mut user_sets: Vec<SmallSet> = k_subsets(available.without(leader), t as usize)
            .into_iter()
            .map(|s| s.with(leader))
            .collect();
        user_sets.sort();
        for users in user_sets {
            for group in partition_groups(inst, demand, leaders, step, users)? {
                if group.leader_block_count == 0 {
                    continue;
                }
                let rows = emit_group_combinations(inst, demand, leaders, &group)?;
                groups.push(EmittedGroup {
                    tag: group.tag,
                    rows,
                });
            }
        }
    }
    Ok(Transmission { groups })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combin::binom_usize;
    use crate::rational::{frac, int, Rat};

    fn inst(n: u32, k: u32, m: Rat, r: u32) -> ProblemInstance {
        ProblemInstance::new(n, k, m, r).unwrap()
    }

    fn set(elems: &[u32]) -> SmallSet {
        SmallSet::from_elems(elems.iter().copied())
    }

    fn blocks(sets: &[&[u32]]) -> Vec<BlockId> {
        sets.iter()
            .map(|s| BlockId::new(SmallSet::from_elems(s.iter().copied())))
            .collect()
    }

    fn sb(files: &[u32], tag: &[u32]) -> SubBlockId {
        SubBlockId::new(
            BlockId::new(SmallSet::from_elems(files.iter().copied())),
            SmallSet::from_elems(tag.iter().copied()),
        )
    }

    /// The running example: 3 files sharing pairwise blocks, 5 users.
    fn worked() -> (ProblemInstance, Demand, Leaders) {
        let i = inst(3, 5, frac(3, 5), 2);
        let d = Demand::new(&i, vec![1, 2, 3, 1, 2]).unwrap();
        let l = Leaders::first_occurrence(&d);
        (i, d, l)
    }

    #[test]
    fn union_and_intersection() {
        let (i, d, _) = worked();
        assert_eq!(
            union_blocks(&i, &d, set(&[1, 2])).unwrap(),
            blocks(&[&[1, 2], &[1, 3], &[2, 3]])
        );
        assert_eq!(
            intersection_blocks(&i, &d, set(&[1, 2])).unwrap(),
            blocks(&[&[1, 2]])
        );
        // Users 1 and 4 both demand file 1.
        assert_eq!(
            intersection_blocks(&i, &d, set(&[1, 4])).unwrap(),
            blocks(&[&[1, 2], &[1, 3]])
        );
        assert!(matches!(
            union_blocks(&i, &d, SmallSet::EMPTY),
            Err(Error::EmptyUserSet)
        ));
        assert!(matches!(
            union_blocks(&i, &d, set(&[1, 6])),
            Err(Error::UserOutOfRange { user: 6, .. })
        ));
    }

    #[test]
    fn step_count_bounds() {
        let (i, d, _) = worked();
        // min(3 - 2 + 1, 5 - 2, 3) = 2.
        assert_eq!(delivery_step_count(&i, &d).unwrap(), 2);

        let full = inst(3, 5, frac(3, 2), 2);
        let d = Demand::new(&full, vec![1, 2, 3, 1, 2]).unwrap();
        assert_eq!(delivery_step_count(&full, &d).unwrap(), 0);

        let one_file = inst(3, 4, int(0), 3);
        let d = Demand::new(&one_file, vec![1, 2, 3, 3]).unwrap();
        assert_eq!(delivery_step_count(&one_file, &d).unwrap(), 1);
    }

    #[test]
    fn candidates_drop_settled_blocks() {
        let (i, d, l) = worked();
        // Step 1: only the first leader file is settled, nothing is dropped.
        assert_eq!(
            candidate_blocks(&i, &d, &l, 1, set(&[1, 2, 3])).unwrap(),
            blocks(&[&[1, 2], &[1, 3], &[2, 3]])
        );
        // Step 2: block {1,2} holds both settled files and is dropped.
        assert_eq!(
            candidate_blocks(&i, &d, &l, 2, set(&[2, 3, 5])).unwrap(),
            blocks(&[&[1, 3], &[2, 3]])
        );
    }

    #[test]
    fn group_user_set_validation() {
        let (i, d, l) = worked();
        assert!(matches!(
            candidate_blocks(&i, &d, &l, 3, set(&[1, 2, 3])),
            Err(Error::StepOutOfRange { steps: 2, .. })
        ));
        assert!(matches!(
            candidate_blocks(&i, &d, &l, 1, set(&[1, 2])),
            Err(Error::WrongGroupSize { expected: 3, .. })
        ));
        assert!(matches!(
            candidate_blocks(&i, &d, &l, 2, set(&[3, 4, 5])),
            Err(Error::LeaderMissingFromGroup { step: 2, leader: 2 })
        ));
        assert!(matches!(
            candidate_blocks(&i, &d, &l, 2, set(&[1, 2, 3])),
            Err(Error::EarlierLeaderInGroup { step: 2, user: 1 })
        ));
    }

    #[test]
    fn partition_structure() {
        let (i, d, l) = worked();
        // Step 1, all leaders: every residue is empty, one group of 3 blocks.
        let groups = partition_groups(&i, &d, &l, 1, set(&[1, 2, 3])).unwrap();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].tag.residue, SmallSet::EMPTY);
        assert_eq!(
            groups[0].blocks,
            blocks(&[&[1, 2], &[1, 3], &[2, 3]])
        );
        assert_eq!(groups[0].leader_block_count, 2);

        // Step 2, {2,3,5}: residue {1} group exists but has no leader block.
        let groups = partition_groups(&i, &d, &l, 2, set(&[2, 3, 5])).unwrap();
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].tag.residue, SmallSet::EMPTY);
        assert_eq!(groups[0].blocks, blocks(&[&[2, 3]]));
        assert_eq!(groups[0].leader_block_count, 1);
        assert_eq!(groups[1].tag.residue, set(&[1]));
        assert_eq!(groups[1].blocks, blocks(&[&[1, 3]]));
        assert_eq!(groups[1].leader_block_count, 0);

        assert_eq!(
            group_combination_count(&i, &d, &l, 2, set(&[2, 3, 5]), SmallSet::EMPTY).unwrap(),
            1
        );
        assert_eq!(
            group_combination_count(&i, &d, &l, 2, set(&[2, 3, 5]), set(&[1])).unwrap(),
            0
        );
        assert!(matches!(
            group_combination_count(&i, &d, &l, 2, set(&[2, 3, 5]), set(&[3])),
            Err(Error::UnknownGroup { .. })
        ));
    }

    #[test]
    fn leader_count_closed_form_when_prefix_demanded() {
        // When every settled leader file is demanded inside J, the leader
        // block count is C(|files of J| - step, overlap - |B| - 1).
        let (i, d, l) = worked();
        for step in 1..=2u32 {
            let leader = l.user(step);
            let available = i.users().difference(l.prefix_users(step - 1));
            for users in k_subsets(available.without(leader), 2) {
                let users = users.with(leader);
                let d_j: SmallSet = SmallSet::from_elems(users.iter().map(|u| d.file_of(u)));
                if !l.prefix_files(&d, step).is_subset_of(d_j) {
                    continue;
                }
                for g in partition_groups(&i, &d, &l, step, users).unwrap() {
                    let expected = binom_usize(
                        (d_j.len() - step as usize) as u32,
                        (i.overlap() as usize - g.tag.residue.len() - 1) as u32,
                    );
                    assert_eq!(g.leader_block_count, expected, "{:?}", g.tag);
                }
            }
        }
    }

    #[test]
    fn worked_example_two_row_group() {
        let (i, d, l) = worked();
        let groups = partition_groups(&i, &d, &l, 1, set(&[1, 2, 3])).unwrap();
        let rows = emit_group_combinations(&i, &d, &l, &groups[0]).unwrap();
        assert_eq!(
            rows,
            vec![
                vec![
                    sb(&[1, 2], &[1, 3]),
                    sb(&[1, 2], &[2, 3]),
                    sb(&[2, 3], &[1, 2]),
                    sb(&[2, 3], &[1, 3]),
                ],
                vec![
                    sb(&[1, 3], &[1, 2]),
                    sb(&[1, 3], &[2, 3]),
                    sb(&[2, 3], &[1, 2]),
                    sb(&[2, 3], &[1, 3]),
                ],
            ]
        );
    }

    #[test]
    fn worked_example_aligned_rows() {
        let (i, d, l) = worked();
        // {1,2,4}: users 1 and 4 share file 1; residue {3} aligns block
        // {2,3} onto the {1,3} row.
        let groups = partition_groups(&i, &d, &l, 1, set(&[1, 2, 4])).unwrap();
        assert_eq!(groups.len(), 2);
        let rows0 = emit_group_combinations(&i, &d, &l, &groups[0]).unwrap();
        assert_eq!(
            rows0,
            vec![vec![
                sb(&[1, 2], &[1, 2]),
                sb(&[1, 2], &[1, 4]),
                sb(&[1, 2], &[2, 4]),
            ]]
        );
        let rows1 = emit_group_combinations(&i, &d, &l, &groups[1]).unwrap();
        assert_eq!(
            rows1,
            vec![vec![
                sb(&[1, 3], &[1, 2]),
                sb(&[1, 3], &[2, 4]),
                sb(&[2, 3], &[1, 4]),
            ]]
        );

        // Step-2 groups emit one row each.
        let g235 = partition_groups(&i, &d, &l, 2, set(&[2, 3, 5])).unwrap();
        let rows = emit_group_combinations(&i, &d, &l, &g235[0]).unwrap();
        assert_eq!(
            rows,
            vec![vec![
                sb(&[2, 3], &[2, 3]),
                sb(&[2, 3], &[2, 5]),
                sb(&[2, 3], &[3, 5]),
            ]]
        );
        let g234 = partition_groups(&i, &d, &l, 2, set(&[2, 3, 4])).unwrap();
        let rows = emit_group_combinations(&i, &d, &l, &g234[0]).unwrap();
        assert_eq!(
            rows,
            vec![vec![
                sb(&[1, 3], &[2, 3]),
                sb(&[1, 3], &[2, 4]),
                sb(&[2, 3], &[2, 4]),
                sb(&[2, 3], &[3, 4]),
            ]]
        );
        let g245 = partition_groups(&i, &d, &l, 2, set(&[2, 4, 5])).unwrap();
        let rows = emit_group_combinations(&i, &d, &l, &g245[0]).unwrap();
        assert_eq!(
            rows,
            vec![vec![
                sb(&[1, 3], &[2, 5]),
                sb(&[2, 3], &[2, 4]),
                sb(&[2, 3], &[4, 5]),
            ]]
        );
    }

    #[test]
    fn emit_rejects_misordered_groups() {
        let (i, d, l) = worked();
        let groups = partition_groups(&i, &d, &l, 1, set(&[1, 2, 3])).unwrap();
        let mut bad = groups[0].clone();
        bad.blocks.swap(0, 2);
        assert!(matches!(
            emit_group_combinations(&i, &d, &l, &bad),
            Err(Error::GroupOrdering { .. })
        ));
        let mut wrong_count = groups[0].clone();
        wrong_count.leader_block_count = 3;
        assert!(matches!(
            emit_group_combinations(&i, &d, &l, &wrong_count),
            Err(Error::GroupOrdering { .. })
        ));
    }

    #[test]
    fn full_delivery_counts() {
        let (i, d, l) = worked();
        let tx = build_delivery(&i, &d, &l).unwrap();
        assert_eq!(tx.combination_count(), 15);
        // Per step: C(n_files - j, overlap - 1) * C(n_users - j, t).
        let step1: usize = tx
            .groups()
            .iter()
            .filter(|g| g.tag.step == 1)
            .map(|g| g.rows.len())
            .sum();
        let step2: usize = tx
            .groups()
            .iter()
            .filter(|g| g.tag.step == 2)
            .map(|g| g.rows.len())
            .sum();
        assert_eq!(step1, 12);
        assert_eq!(step2, 3);
        // Emission order: steps ascend, user sets ascend within a step.
        let tags: Vec<(u32, SmallSet)> = tx.groups().iter().map(|g| (g.tag.step, g.tag.users)).collect();
        let mut sorted = tags.clone();
        sorted.sort();
        assert_eq!(tags, sorted);
    }

    #[test]
    fn per_step_count_identity() {
        // Combinations in step j always total
        // C(n_files - j, overlap - 1) * C(n_users - j, t).
        let cases = [
            (inst(3, 3, frac(1, 2), 2), vec![1, 2, 3]),
            (inst(3, 4, frac(3, 8), 2), vec![1, 1, 2, 3]),
            (inst(4, 4, int(1), 2), vec![3, 3, 1, 2]),
            (inst(4, 3, frac(8, 9), 3), vec![2, 4, 2]),
            (inst(5, 4, frac(5, 4), 1), vec![5, 5, 2, 2]),
        ];
        for (i, entries) in cases {
            let t = i.integral_multiplicity().unwrap();
            let d = Demand::new(&i, entries).unwrap();
            let l = Leaders::first_occurrence(&d);
            let tx = build_delivery(&i, &d, &l).unwrap();
            for step in 1..=delivery_step_count(&i, &d).unwrap() {
                let got: usize = tx
                    .groups()
                    .iter()
                    .filter(|g| g.tag.step == step)
                    .map(|g| g.rows.len())
                    .sum();
                let want = binom_usize(i.n_files() - step, i.overlap() - 1)
                    * binom_usize(i.n_users() - step, t);
                assert_eq!(got, want, "{:?} step {step}", i);
            }
        }
    }

    #[test]
    fn corner_multiplicities() {
        // t = n_users: empty transmission.
        let full = inst(3, 4, frac(3, 2), 2);
        let d = Demand::new(&full, vec![1, 2, 3, 1]).unwrap();
        let tx = build_delivery(&full, &d, &Leaders::first_occurrence(&d)).unwrap();
        assert_eq!(tx.combination_count(), 0);

        // t = 0: plain broadcast, every row is a single sub-block with an
        // empty cache tag.
        let zero = inst(3, 4, int(0), 2);
        let d = Demand::new(&zero, vec![1, 2, 3, 1]).unwrap();
        let tx = build_delivery(&zero, &d, &Leaders::first_occurrence(&d)).unwrap();
        for c in tx.combinations() {
            assert_eq!(c.terms.len(), 1);
            assert!(c.terms[0].cached_by.is_empty());
        }
        // Steps: min(2, 4, 3) = 2; 2*1 + 1*1 = 3 combinations.
        assert_eq!(tx.combination_count(), 3);
    }

    #[test]
    fn rejects_leaders_for_other_demand() {
        let (i, d, _) = worked();
        let other = Demand::new(&i, vec![1, 1, 1, 1, 1]).unwrap();
        let l = Leaders::first_occurrence(&other);
        assert!(build_delivery(&i, &d, &l).is_err());
    }

    #[test]
    fn json_shape() {
        let (i, d, l) = worked();
        let tx = build_delivery(&i, &d, &l).unwrap();
        let v = serde_json::to_value(&tx).unwrap();
        let first = &v[0];
        assert_eq!(first["step"], 1);
        assert_eq!(first["J"], serde_json::json!([1, 2, 3]));
        assert_eq!(first["B"], serde_json::json!([]));
        assert_eq!(
            first["rows"][0][0],
            serde_json::Value::String("S{1,2}|V{1,3}".into())
        );
    }
}
