//! Exact decodability oracle over GF(2) and load accounting.
//!
//! Every sub-block is a formal symbol; caches contribute unit vectors and
//! each broadcast combination contributes the indicator vector of its
//! terms. A user can decode a sub-block exactly when its unit vector lies
//! in the GF(2) row span of what that user holds plus what was broadcast.
//! The oracle keeps a fully reduced basis, so membership tests are exact
//! and independent of how the scheme was derived.

use crate::bounds::{corner_memory, load_coefficient};
use crate::error::Error;
use crate::model::{Demand, Leaders, ProblemInstance, SubBlockId};
use crate::placement::{man_placement, CacheAssignment};
use crate::rational::{ratio, Rat};
use crate::scheme::{build_delivery, Transmission};
use crate::sets::k_subsets;
use num_bigint::BigInt;
use std::collections::BTreeMap;

/// Dense column numbering of every sub-block of an instance.
///
/// Columns are ordered by block, then by caching set, both ascending, so
/// the numbering is reproducible across runs.
pub struct Universe {
    columns: Vec<SubBlockId>,
    index: BTreeMap<SubBlockId, usize>,
}

impl Universe {
    pub fn new(inst: &ProblemInstance) -> Result<Self, Error> {
        let t = inst.integral_multiplicity()?;
        let tags = k_subsets(inst.users(), t as usize);
        let mut columns = Vec::with_capacity(inst.block_count() * tags.len());
        for block in inst.enumerate_blocks() {
            for &tag in &tags {
                columns.push(SubBlockId::new(block, tag));
            }
        }
        let index = columns.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        Ok(Universe { columns, index })
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn columns(&self) -> &[SubBlockId] {
        &self.columns
    }

    pub fn column_of(&self, sub: &SubBlockId) -> Result<usize, Error> {
        self.index
            .get(sub)
            .copied()
            .ok_or(Error::TermOutsideUniverse { term: *sub })
    }

    /// Packed indicator vector of a term list; repeated terms cancel.
    pub fn row_of(&self, terms: &[SubBlockId]) -> Result<Vec<u64>, Error> {
        let mut row = vec![0u64; self.len().div_ceil(64).max(1)];
        for term in terms {
            let col = self.column_of(term)?;
            row[col / 64] ^= 1 << (col % 64);
        }
        Ok(row)
    }
}

/// A GF(2) row space kept in fully reduced echelon form.
#[derive(Clone, Debug)]
pub struct Gf2Matrix {
    cols: usize,
    words: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

fn first_set(row: &[u64]) -> Option<usize> {
    row.iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, &w)| i * 64 + w.trailing_zeros() as usize)
}

fn weight(row: &[u64]) -> u32 {
    row.iter().map(|w| w.count_ones()).sum()
}

impl Gf2Matrix {
    pub fn new(cols: usize) -> Self {
        Gf2Matrix {
            cols,
            words: cols.div_ceil(64).max(1),
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Unit row for one column.
    pub fn unit(&self, col: usize) -> Vec<u64> {
        let mut row = vec![0u64; self.words];
        row[col / 64] |= 1 << (col % 64);
        row
    }

    fn reduce_in_place(&self, row: &mut [u64]) {
        // Each basis row holds its own pivot and no other pivot column,
        // so one pass in any order cancels every pivot bit.
        for (basis, &p) in self.rows.iter().zip(&self.pivots) {
            if row[p / 64] >> (p % 64) & 1 == 1 {
                xor_into(row, basis);
            }
        }
    }

    /// Adds a row to the span. Returns false if it was already dependent.
    pub fn insert(&mut self, mut row: Vec<u64>) -> bool {
        debug_assert_eq!(row.len(), self.words);
        self.reduce_in_place(&mut row);
        let Some(p) = first_set(&row) else {
            return false;
        };
        for basis in &mut self.rows {
            if basis[p / 64] >> (p % 64) & 1 == 1 {
                xor_into(basis, &row);
            }
        }
        self.rows.push(row);
        self.pivots.push(p);
        true
    }

    /// Whether the row lies in the span.
    pub fn contains(&self, row: &[u64]) -> bool {
        let mut probe = row.to_vec();
        self.reduce_in_place(&mut probe);
        probe.iter().all(|&w| w == 0)
    }

    /// Whether the unit vector of one column lies in the span.
    ///
    /// In a fully reduced basis that happens exactly when the column is a
    /// pivot whose row has no other set bit.
    pub fn contains_unit(&self, col: usize) -> bool {
        match self.pivots.iter().position(|&p| p == col) {
            Some(i) => weight(&self.rows[i]) == 1,
            None => false,
        }
    }
}

/// Decode outcome for one user.
#[derive(Clone, Debug)]
pub struct UserDecode {
    pub user: u32,
    pub desired: usize,
    pub recovered: usize,
    pub missing: Vec<SubBlockId>,
}

impl UserDecode {
    pub fn decoded(&self) -> bool {
        self.missing.is_empty()
    }
}

/// Decode outcome for every user of an instance.
#[derive(Clone, Debug)]
pub struct DecodeReport {
    pub users: Vec<UserDecode>,
}

impl DecodeReport {
    pub fn all_decoded(&self) -> bool {
        self.users.iter().all(UserDecode::decoded)
    }
}

fn decode_with_universe(
    universe: &Universe,
    inst: &ProblemInstance,
    placement: &CacheAssignment,
    demand: &Demand,
    tx: &Transmission,
) -> Result<DecodeReport, Error> {
    let mut broadcast = Gf2Matrix::new(universe.len());
    for combo in tx.combinations() {
        broadcast.insert(universe.row_of(combo.terms)?);
    }
    let mut users = Vec::with_capacity(inst.n_users() as usize);
    for user in 1..=inst.n_users() {
        let mut known = broadcast.clone();
        for sub in placement.user_cache(user) {
            let col = universe.column_of(sub)?;
            let unit = known.unit(col);
            known.insert(unit);
        }
        let file = demand.file_of(user);
        let mut desired = 0;
        let mut missing = Vec::new();
        for (col, sub) in universe.columns().iter().enumerate() {
            if !sub.block.involves(file) {
                continue;
            }
            desired += 1;
            if !known.contains_unit(col) {
                missing.push(*sub);
            }
        }
        users.push(UserDecode {
            user,
            desired,
            recovered: desired - missing.len(),
            missing,
        });
    }
    Ok(DecodeReport { users })
}

/// Checks that every user can reconstruct every sub-block of its file
/// from its cache plus the broadcast, by exact GF(2) rank computations.
pub fn decode_check(
    inst: &ProblemInstance,
    placement: &CacheAssignment,
    demand: &Demand,
    tx: &Transmission,
) -> Result<DecodeReport, Error> {
    let universe = Universe::new(inst)?;
    decode_with_universe(&universe, inst, placement, demand, tx)
}

/// Broadcast load of a transmission in file-size units.
pub fn measured_load(inst: &ProblemInstance, tx: &Transmission) -> Result<Rat, Error> {
    Ok(ratio(
        BigInt::from(tx.combination_count()),
        inst.file_size_units()?,
    ))
}

/// Everything checked about one delivered demand.
pub struct VerifyOutcome {
    pub transmission: Transmission,
    pub report: DecodeReport,
    pub load: Rat,
    pub expected_load: Rat,
}

impl VerifyOutcome {
    pub fn load_matches(&self) -> bool {
        self.load == self.expected_load
    }

    pub fn passed(&self) -> bool {
        self.report.all_decoded() && self.load_matches()
    }
}

/// Builds placement and delivery for one demand, then checks decodability
/// and that the measured load equals the corner coefficient for the
/// demand's number of distinct files.
pub fn verify_demand(
    inst: &ProblemInstance,
    demand: &Demand,
    leaders: Option<&Leaders>,
) -> Result<VerifyOutcome, Error> {
    let chosen;
    let leaders = match leaders {
        Some(l) => l,
        None => {
            chosen = Leaders::first_occurrence(demand);
            &chosen
        }
    };
    let t = inst.integral_multiplicity()?;
    let placement = man_placement(inst)?;
    let tx = build_delivery(inst, demand, leaders)?;
    let report = decode_check(inst, &placement, demand, &tx)?;
    let load = measured_load(inst, &tx)?;
    let expected_load = load_coefficient(
        inst.n_files(),
        inst.n_users(),
        inst.overlap(),
        t,
        demand.distinct_count() as u32,
    )?;
    Ok(VerifyOutcome {
        transmission: tx,
        report,
        load,
        expected_load,
    })
}

/// Whether the corner load is known to be information-theoretically
/// optimal for demands with `s` distinct files (within the placement
/// family under uncoded prefetching).
pub fn cell_optimality_proven(
    n_files: u32,
    n_users: u32,
    overlap: u32,
    t: u32,
    s: u32,
) -> bool {
    s == n_users
        || overlap <= 2
        || overlap + 1 >= n_files
        || t <= 2
        || t + 1 >= n_users
}

/// [`cell_optimality_proven`] for a concrete demand.
pub fn optimality_proven(inst: &ProblemInstance, demand: &Demand) -> Result<bool, Error> {
    let t = inst.integral_multiplicity()?;
    Ok(cell_optimality_proven(
        inst.n_files(),
        inst.n_users(),
        inst.overlap(),
        t,
        demand.distinct_count() as u32,
    ))
}

/// One verified placement corner of a sweep.
pub struct SweepCell {
    pub n_files: u32,
    pub n_users: u32,
    pub overlap: u32,
    pub t: u32,
    pub demands_checked: u64,
    pub decode_failures: u64,
    pub load_mismatches: u64,
    pub worst_load: Rat,
    /// Whether the worst measured load equals the worst-case coefficient.
    pub worst_load_matches: bool,
    /// Whether optimality is proven for every demand in this cell.
    pub proven_optimal_all_demands: bool,
}

/// Result of verifying every demand at every corner of a parameter grid.
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
    pub demands_checked: u64,
}

impl SweepReport {
    pub fn total_failures(&self) -> u64 {
        self.cells
            .iter()
            .map(|c| c.decode_failures + c.load_mismatches + u64::from(!c.worst_load_matches))
            .sum()
    }

    pub fn all_passed(&self) -> bool {
        self.total_failures() == 0
    }
}

/// Verifies the scheme exhaustively: every file count up to `max_files`,
/// every user count up to `max_users`, every overlap, every placement
/// corner, every demand vector. Decoding uses the GF(2) oracle; loads are
/// compared exactly against the corner coefficients.
pub fn sweep_verify(max_files: u32, max_users: u32) -> Result<SweepReport, Error> {
    let mut cells = Vec::new();
    let mut total: u64 = 0;
    for n in 1..=max_files {
        for k in 1..=max_users {
            for r in 1..=n {
                for t in 0..=k {
                    let inst =
                        ProblemInstance::new(n, k, corner_memory(n, k, r, t), r)?;
                    let placement = man_placement(&inst)?;
                    let universe = Universe::new(&inst)?;
                    let mut cell = SweepCell {
                        n_files: n,
                        n_users: k,
                        overlap: r,
                        t,
                        demands_checked: 0,
                        decode_failures: 0,
                        load_mismatches: 0,
                        worst_load: Rat::from_integer(BigInt::from(0)),
                        worst_load_matches: false,
                        proven_optimal_all_demands: true,
                    };
                    let mut entries = vec![1u32; k as usize];
                    loop {
                        let demand = Demand::new(&inst, entries.clone())?;
                        let leaders = Leaders::first_occurrence(&demand);
                        let tx = build_delivery(&inst, &demand, &leaders)?;
                        let report =
                            decode_with_universe(&universe, &inst, &placement, &demand, &tx)?;
                        if !report.all_decoded() {
                            cell.decode_failures += 1;
                        }
                        let load = measured_load(&inst, &tx)?;
                        let expected = load_coefficient(
                            n,
                            k,
                            r,
                            t,
                            demand.distinct_count() as u32,
                        )?;
                        if load != expected {
                            cell.load_mismatches += 1;
                        }
                        if load > cell.worst_load {
                            cell.worst_load = load;
                        }
                        if !optimality_proven(&inst, &demand)? {
                            cell.proven_optimal_all_demands = false;
                        }
                        cell.demands_checked += 1;

                        // Next demand vector, odometer style.
                        let mut pos = 0;
                        while pos < entries.len() && entries[pos] == n {
                            entries[pos] = 1;
                            pos += 1;
                        }
                        if pos == entries.len() {
                            break;
                        }
                        entries[pos] += 1;
                    }
                    let worst_expected = load_coefficient(n, k, r, t, n.min(k))?;
                    cell.worst_load_matches = cell.worst_load == worst_expected;
                    total += cell.demands_checked;
                    cells.push(cell);
                }
            }
        }
    }
    Ok(SweepReport {
        cells,
        demands_checked: total,
    })
}
