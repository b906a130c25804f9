//! Converse load coefficients, convex envelopes, and the round-division
//! baseline.
//!
//! For a demand with `s` distinct files, the converse on the broadcast load
//! at placement corner `t` is the coefficient
//!
//! ```text
//! c(s, t) = sum_{j=1}^{min(N-r+1, K-t, s)} C(N-j, r-1) C(K-j, t)
//!           ---------------------------------------------------
//!                         C(N-1, r-1) C(K, t)
//! ```
//!
//! with `N` files, `K` users, and overlap `r`. Corner `t` corresponds to
//! memory `M = N t / (K r)`; between corners the bound is the lower convex
//! envelope of the corner points. The demand-averaged bound replaces
//! `c(s, t)` by its expectation over all `N^K` demand vectors. The aligned
//! delivery achieves exactly `c(s, t)` at every corner, so these
//! coefficients serve both as converse values and as scheme loads.

use crate::combin::binom;
use crate::error::Error;
use crate::model::{count_demands_with_s_distinct, Demand, ProblemInstance};
use crate::rational::{ratio, Rat};
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::BTreeSet;

/// Which demand statistic an envelope bounds.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BoundKind {
    /// Worst case over demands with exactly `s` distinct files.
    Type(u32),
    /// Expectation over all demand vectors.
    Average,
}

/// One memory-load corner point.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LoadPoint {
    /// Placement parameter `t` of the corner.
    pub multiplicity: u32,
    pub memory: Rat,
    pub load: Rat,
}

/// Corner points of a bound plus their lower convex envelope.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Envelope {
    pub kind: BoundKind,
    pub points: Vec<LoadPoint>,
    pub hull: Vec<LoadPoint>,
}

fn validate_params(n_files: u32, n_users: u32, overlap: u32) -> Result<(), Error> {
    if n_files == 0 {
        return Err(Error::FileCountOutOfRange { n_files });
    }
    if n_users == 0 {
        return Err(Error::UserCountOutOfRange { n_users });
    }
    if overlap == 0 || overlap > n_files {
        return Err(Error::OverlapOutOfRange { overlap, n_files });
    }
    Ok(())
}

/// Memory size of placement corner `t`: `n_files * t / (n_users * overlap)`.
pub fn corner_memory(n_files: u32, n_users: u32, overlap: u32, t: u32) -> Rat {
    ratio(
        BigInt::from(n_files) * BigInt::from(t),
        BigInt::from(n_users) * BigInt::from(overlap),
    )
}

/// The load coefficient `c(s, t)` for demands with `s` distinct files.
///
/// ```
/// use corrcache::bounds::load_coefficient;
/// use corrcache::rational::frac;
/// assert_eq!(load_coefficient(3, 5, 2, 2, 3).unwrap(), frac(3, 4));
/// ```
pub fn load_coefficient(
    n_files: u32,
    n_users: u32,
    overlap: u32,
    t: u32,
    s: u32,
) -> Result<Rat, Error> {
    validate_params(n_files, n_users, overlap)?;
    if t > n_users {
        return Err(Error::MultiplicityOutOfRange { t, n_users });
    }
    let max_s = n_files.min(n_users);
    if s == 0 || s > max_s {
        return Err(Error::TypeOutOfRange { s, max: max_s });
    }
    let steps = (n_files - overlap + 1).min(n_users - t).min(s);
    let mut num = BigInt::zero();
    for j in 1..=steps {
        num += binom(n_files - j, overlap - 1) * binom(n_users - j, t);
    }
    let den = binom(n_files - 1, overlap - 1) * binom(n_users, t);
    Ok(ratio(num, den))
}

/// Expected coefficient over all `n_files^n_users` demand vectors.
pub fn average_coefficient(
    n_files: u32,
    n_users: u32,
    overlap: u32,
    t: u32,
) -> Result<Rat, Error> {
    validate_params(n_files, n_users, overlap)?;
    if t > n_users {
        return Err(Error::MultiplicityOutOfRange { t, n_users });
    }
    let mut weighted = Rat::zero();
    for s in 1..=n_files.min(n_users) {
        let count = count_demands_with_s_distinct(n_files, n_users, s)?;
        weighted += load_coefficient(n_files, n_users, overlap, t, s)?
            * Rat::from_integer(count);
    }
    Ok(weighted / Rat::from_integer(BigInt::from(n_files).pow(n_users)))
}

/// Lower convex envelope by a monotone scan; input is sorted by memory.
fn lower_hull(points: &[LoadPoint]) -> Vec<LoadPoint> {
    let mut hull: Vec<LoadPoint> = Vec::new();
    for p in points {
        while hull.len() >= 2 {
            let a = &hull[hull.len() - 2];
            let b = &hull[hull.len() - 1];
            // Keep b only if the path a -> b -> p turns left (b strictly
            // below the chord); collinear points are dropped.
            let cross = (&b.memory - &a.memory) * (&p.load - &a.load)
                - (&b.load - &a.load) * (&p.memory - &a.memory);
            if cross <= Rat::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p.clone());
    }
    hull
}

fn envelope(n_files: u32, n_users: u32, overlap: u32, kind: BoundKind) -> Result<Envelope, Error> {
    let mut points = Vec::with_capacity(n_users as usize + 1);
    for t in 0..=n_users {
        let load = match kind {
            BoundKind::Type(s) => load_coefficient(n_files, n_users, overlap, t, s)?,
            BoundKind::Average => average_coefficient(n_files, n_users, overlap, t)?,
        };
        points.push(LoadPoint {
            multiplicity: t,
            memory: corner_memory(n_files, n_users, overlap, t),
            load,
        });
    }
    let hull = lower_hull(&points);
    Ok(Envelope { kind, points, hull })
}

/// Envelope of the type-`s` corner points over `t = 0..=n_users`.
pub fn converse_envelope_type(
    n_files: u32,
    n_users: u32,
    overlap: u32,
    s: u32,
) -> Result<Envelope, Error> {
    // Surface an invalid type before building any point.
    load_coefficient(n_files, n_users, overlap, 0, s)?;
    envelope(n_files, n_users, overlap, BoundKind::Type(s))
}

/// Envelope of the demand-averaged corner points over `t = 0..=n_users`.
pub fn converse_envelope_average(
    n_files: u32,
    n_users: u32,
    overlap: u32,
) -> Result<Envelope, Error> {
    validate_params(n_files, n_users, overlap)?;
    envelope(n_files, n_users, overlap, BoundKind::Average)
}

impl Envelope {
    /// Largest memory the envelope covers (`n_files / overlap`).
    pub fn max_memory(&self) -> &Rat {
        &self.hull.last().expect("envelope has points").memory
    }

    /// Envelope value at `memory`, by linear interpolation on the hull.
    pub fn eval(&self, memory: &Rat) -> Result<Rat, Error> {
        let first = self.hull.first().expect("envelope has points");
        let last = self.hull.last().expect("envelope has points");
        if memory < &first.memory || memory > &last.memory {
            return Err(Error::MemoryOutsideEnvelope {
                memory: memory.clone(),
                max: last.memory.clone(),
            });
        }
        let right = self
            .hull
            .iter()
            .position(|p| &p.memory >= memory)
            .expect("memory within hull range");
        let b = &self.hull[right];
        if &b.memory == memory {
            return Ok(b.load.clone());
        }
        let a = &self.hull[right - 1];
        let slope = (&b.load - &a.load) / (&b.memory - &a.memory);
        Ok(&a.load + slope * (memory - &a.memory))
    }
}

/// Load of the round-division baseline: split delivery into one round per
/// block index, serve every user its round block with the optimal
/// uncorrelated-delivery transmission, and normalize by blocks per file.
pub fn baseline_round_division_load(
    inst: &ProblemInstance,
    demand: &Demand,
) -> Result<Rat, Error> {
    let t = inst.integral_multiplicity()?;
    let k = inst.n_users();
    let per_file: Vec<Vec<crate::model::BlockId>> = (1..=inst.n_files())
        .map(|f| inst.blocks_of_file(f))
        .collect::<Result<_, _>>()?;
    let mut combos = BigInt::zero();
    for round in 0..inst.blocks_per_file() {
        let distinct: BTreeSet<_> = demand
            .entries()
            .iter()
            .map(|&f| per_file[f as usize - 1][round])
            .collect();
        let b = distinct.len() as u32;
        combos += binom(k, t + 1) - binom(k - b, t + 1);
    }
    Ok(ratio(
        combos,
        binom(k, t) * BigInt::from(inst.blocks_per_file() as u64),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    #[test]
    fn coefficient_table_for_small_instance() {
        // (N, K, r) = (3, 5, 2), worst-case type s = 3.
        let want = [
            frac(3, 2),
            frac(11, 10),
            frac(3, 4),
            frac(9, 20),
            frac(1, 5),
            int(0),
        ];
        for (t, w) in want.iter().enumerate() {
            assert_eq!(load_coefficient(3, 5, 2, t as u32, 3).unwrap(), *w, "t={t}");
        }
        // Full caches always yield zero load, for any type.
        for s in 1..=3 {
            assert_eq!(load_coefficient(3, 5, 2, 5, s).unwrap(), int(0));
        }
        assert_eq!(load_coefficient(4, 4, 1, 1, 4).unwrap(), frac(3, 2));
    }

    #[test]
    fn coefficient_validation() {
        assert!(matches!(
            load_coefficient(3, 5, 2, 6, 3),
            Err(Error::MultiplicityOutOfRange { .. })
        ));
        assert!(matches!(
            load_coefficient(3, 5, 2, 2, 4),
            Err(Error::TypeOutOfRange { max: 3, .. })
        ));
        assert!(matches!(
            load_coefficient(3, 5, 2, 2, 0),
            Err(Error::TypeOutOfRange { .. })
        ));
        assert!(matches!(
            load_coefficient(3, 5, 4, 2, 3),
            Err(Error::OverlapOutOfRange { .. })
        ));
    }

    #[test]
    fn single_block_library_matches_closed_form() {
        // overlap = n_files: one block, delivery is a single shared stream.
        for k in 1..=6u32 {
            for t in 0..=k {
                let got = load_coefficient(4, k, 4, t, 1.min(4).min(k)).unwrap();
                let want = ratio(binom(k - 1, t), binom(k, t));
                assert_eq!(got, want, "K={k} t={t}");
            }
        }
    }

    #[test]
    fn unit_overlap_matches_hockey_stick() {
        // overlap = 1 reduces to uncorrelated delivery:
        // c(s, t) = (C(K, t+1) - C(K - min(s, K-t), t+1)) / C(K, t).
        for n in 1..=5u32 {
            for k in 1..=6u32 {
                for t in 0..=k {
                    for s in 1..=n.min(k) {
                        let got = load_coefficient(n, k, 1, t, s).unwrap();
                        let m = s.min(k - t);
                        let want = ratio(
                            binom(k, t + 1) - binom(k - m, t + 1),
                            binom(k, t),
                        );
                        assert_eq!(got, want, "N={n} K={k} t={t} s={s}");
                    }
                }
            }
        }
    }

    #[test]
    fn average_matches_brute_force_expectation() {
        for (n, k, r) in [(2, 2, 1), (3, 3, 2), (3, 4, 3), (4, 3, 2)] {
            for t in 0..=k {
                // Direct expectation: average c(distinct(d), t) over all d.
                let total = u64::from(n).pow(k);
                let mut sum = Rat::zero();
                for code in 0..total {
                    let mut c = code;
                    let mut seen = crate::sets::SmallSet::EMPTY;
                    for _ in 0..k {
                        seen.insert((c % u64::from(n)) as u32 + 1);
                        c /= u64::from(n);
                    }
                    sum += load_coefficient(n, k, r, t, seen.len() as u32).unwrap();
                }
                let want = sum / Rat::from_integer(BigInt::from(total));
                assert_eq!(average_coefficient(n, k, r, t).unwrap(), want);
            }
        }
        assert_eq!(average_coefficient(2, 2, 1, 0).unwrap(), frac(3, 2));
    }

    #[test]
    fn envelope_corners_and_interpolation() {
        let env = converse_envelope_type(3, 5, 2, 3).unwrap();
        assert_eq!(env.points.len(), 6);
        // Strictly decreasing slopes here: every corner is on the hull.
        assert_eq!(env.hull.len(), 6);
        assert_eq!(env.eval(&frac(3, 5)).unwrap(), frac(3, 4));
        assert_eq!(env.eval(&int(0)).unwrap(), frac(3, 2));
        assert_eq!(env.eval(&frac(3, 2)).unwrap(), int(0));
        // Midpoint of the first edge: mean of the corner loads.
        assert_eq!(env.eval(&frac(3, 20)).unwrap(), frac(13, 10));
        assert!(matches!(
            env.eval(&frac(8, 5)),
            Err(Error::MemoryOutsideEnvelope { .. })
        ));
        assert!(matches!(
            env.eval(&int(-1)),
            Err(Error::MemoryOutsideEnvelope { .. })
        ));
    }

    #[test]
    fn envelope_is_convex_and_below_points() {
        for (n, k, r) in [(3, 5, 2), (4, 4, 2), (5, 4, 3), (4, 6, 4), (5, 5, 1)] {
            for s in 1..=n.min(k) {
                let env = converse_envelope_type(n, k, r, s).unwrap();
                for p in &env.points {
                    let at = env.eval(&p.memory).unwrap();
                    assert!(at <= p.load, "hull above corner t={}", p.multiplicity);
                }
                for w in env.hull.windows(3) {
                    let left = (&w[1].load - &w[0].load) / (&w[1].memory - &w[0].memory);
                    let right = (&w[2].load - &w[1].load) / (&w[2].memory - &w[1].memory);
                    assert!(left < right, "hull slopes must increase");
                }
                for w in env.hull.windows(2) {
                    assert!(w[0].load >= w[1].load, "bound must not increase in memory");
                }
            }
            let avg = converse_envelope_average(n, k, r).unwrap();
            assert_eq!(avg.kind, BoundKind::Average);
            assert_eq!(avg.points.len(), k as usize + 1);
        }
    }

    #[test]
    fn corner_points_always_on_envelope() {
        // The corner loads are convex in t, so interpolation never cuts
        // below a corner: evaluating at corner memory returns its load.
        for (n, k, r) in [(3, 5, 2), (5, 4, 3), (4, 6, 2), (6, 4, 5)] {
            for s in 1..=n.min(k) {
                let env = converse_envelope_type(n, k, r, s).unwrap();
                for p in &env.points {
                    assert_eq!(env.eval(&p.memory).unwrap(), p.load);
                }
            }
        }
    }

    #[test]
    fn baseline_round_division() {
        let i = ProblemInstance::new(3, 5, frac(3, 5), 2).unwrap();
        let d = Demand::new(&i, vec![1, 2, 3, 1, 2]).unwrap();
        assert_eq!(baseline_round_division_load(&i, &d).unwrap(), frac(9, 10));

        let i = ProblemInstance::new(3, 3, frac(1, 2), 2).unwrap();
        let d = Demand::new(&i, vec![1, 2, 3]).unwrap();
        assert_eq!(baseline_round_division_load(&i, &d).unwrap(), int(1));

        // One block per file: a single round of plain uncorrelated delivery.
        let i = ProblemInstance::new(3, 4, int(1), 3).unwrap();
        let d = Demand::new(&i, vec![1, 2, 3, 1]).unwrap();
        let t = i.integral_multiplicity().unwrap();
        assert_eq!(t, 4);
        assert_eq!(baseline_round_division_load(&i, &d).unwrap(), int(0));

        let i = ProblemInstance::new(3, 4, frac(1, 4), 3).unwrap();
        let d = Demand::new(&i, vec![1, 2, 3, 1]).unwrap();
        assert_eq!(i.integral_multiplicity().unwrap(), 1);
        // Single round, one distinct block: (C(4,2) - C(3,2)) / C(4,1).
        assert_eq!(baseline_round_division_load(&i, &d).unwrap(), frac(3, 4));
    }

    #[test]
    fn baseline_never_beats_scheme_load() {
        // Round division ignores correlation during delivery; the aligned
        // scheme's corner load is never worse.
        for (n, k, r) in [(3, 4, 2), (4, 4, 2), (4, 3, 3)] {
            for t in 0..=k {
                let inst = ProblemInstance::new(
                    n,
                    k,
                    corner_memory(n, k, r, t),
                    r,
                )
                .unwrap();
                // A demand hitting every file cyclically.
                let entries: Vec<u32> = (0..k).map(|u| u % n + 1).collect();
                let d = Demand::new(&inst, entries).unwrap();
                let s = d.distinct_count() as u32;
                let base = baseline_round_division_load(&inst, &d).unwrap();
                let scheme = load_coefficient(n, k, r, t, s).unwrap();
                assert!(scheme <= base, "N={n} K={k} r={r} t={t}");
            }
        }
    }
}
