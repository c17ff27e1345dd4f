//! Exact solution counting.
//!
//! Everything here returns exact integers. The workhorse routines are
//!
//! * [`count_lines_bruteforce`] / [`count_lines_mitm`]: the number of pairs
//!   `(x, y)` in `[-X, X]^{2s}` on which all four line forms vanish, by full
//!   enumeration and by a meet-in-the-middle hash join (same answer, very
//!   different cost);
//! * [`count_pv`]: solutions of the nine simultaneous difference equations
//!   for the degree-(1,2,3) monomial system over `[1, X]^{4s}`, via a
//!   multiset-of-sums map;
//! * [`count_hua_single`]: ordered 8-tuples in `[1, X]^8` with equal sums of
//!   four cubes, via self-convolution of the two-cube representation counts;
//! * [`count_local`]: solutions of the four form congruences over
//!   `(Z/q)^{2s}`, the arithmetic measuring stick for local averages;
//! * [`fit_exponent`]: log-log least-squares growth rate of a count family.
//!
//! Parallel reductions use fixed chunk boundaries and integer merges, so
//! counts are identical on any worker pool.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::budget::{pow_cost, Budget};
use crate::error::{Error, Result};
use crate::forms::CoefficientVector;
use crate::parallel::try_sum_over_chunks;

/// A labelled exact count with the parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub label: String,
    /// Flat `key=value` parameter echo, in a fixed order.
    pub parameters: Vec<(String, String)>,
    pub count: u128,
    /// Wall-clock seconds; informational only, excluded from canonical
    /// report bytes.
    pub wall_seconds: f64,
}

impl CountRecord {
    pub fn new(label: impl Into<String>, parameters: Vec<(String, String)>, count: u128) -> Self {
        CountRecord {
            label: label.into(),
            parameters,
            count,
            wall_seconds: 0.0,
        }
    }
}

fn add4(a: [i128; 4], b: [i128; 4]) -> [i128; 4] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

/// Weighted monomial vectors `c * (x^3, x^2 y, x y^2, y^3)` of every pair
/// `(x, y)` in `[lo, hi]^2`, the per-coordinate alphabet of the enumerations.
fn weighted_atoms(ci: i64, lo: i64, hi: i64) -> Vec<[i128; 4]> {
    let c = ci as i128;
    let side: Vec<i64> = (lo..=hi).collect();
    let mut atoms = Vec::with_capacity(side.len() * side.len());
    for &x in &side {
        let (x, x2, x3) = (x as i128, (x as i128) * (x as i128), (x as i128).pow(3));
        for &yi in &side {
            let (y, y2) = (yi as i128, (yi as i128) * (yi as i128));
            atoms.push([c * x3, c * x2 * y, c * x * y2, c * y * y2]);
        }
    }
    atoms
}

/// Checks that every partial sum of the enumeration stays far from the
/// 128-bit edge, so the inner loops can use plain adds.
fn check_partial_sum_bound(c: &CoefficientVector, x: i64) -> Result<()> {
    let mut bound: i128 = 0;
    for &ci in c.as_slice() {
        let term = (ci as i128)
            .checked_abs()
            .and_then(|a| a.checked_mul((x as i128).checked_pow(3)?))
            .ok_or(Error::Overflow {
                context: "count_lines bound",
            })?;
        bound = bound.checked_add(term).ok_or(Error::Overflow {
            context: "count_lines bound",
        })?;
    }
    if bound > i128::MAX / 8 {
        return Err(Error::Overflow {
            context: "count_lines bound",
        });
    }
    Ok(())
}

fn count_zero_tails(atoms: &[Vec<[i128; 4]>], level: usize, partial: [i128; 4]) -> u128 {
    if level == atoms.len() {
        return u128::from(partial == [0; 4]);
    }
    let mut acc = 0u128;
    for a in &atoms[level] {
        acc += count_zero_tails(atoms, level + 1, add4(partial, *a));
    }
    acc
}

/// Number of integer pairs `(x, y)` in `[-X, X]^{2s}` with all four line
/// forms zero, by full enumeration over `(2X+1)^{2s}` tuples. The oracle the
/// hash join is measured against.
pub fn count_lines_bruteforce(c: &CoefficientVector, x: i64, budget: &Budget) -> Result<u128> {
    if x < 0 {
        return Err(Error::InvalidInput("box radius X must be >= 0".into()));
    }
    check_partial_sum_bound(c, x)?;
    let side = 2 * x as u128 + 1;
    budget.check_ops(pow_cost(side * side, c.s() as u32))?;

    let atoms: Vec<Vec<[i128; 4]>> = c
        .as_slice()
        .iter()
        .map(|&ci| weighted_atoms(ci, -x, x))
        .collect();
    let top = atoms[0].len() as u64;
    try_sum_over_chunks(top, 1 << 10, |range| {
        let mut acc = 0u128;
        for k in range {
            acc += count_zero_tails(&atoms, 1, atoms[0][k as usize]);
        }
        Ok(acc)
    })
}

/// Split of the coordinate indices for the meet-in-the-middle join.
///
/// The leading half `A` has `ceil(s/2)` indices; the smaller half (the
/// trailing one when `s` is odd, `A` on ties) feeds the hash map, the other
/// half probes it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HashJoinPlan {
    pub map_indices: Vec<usize>,
    pub probe_indices: Vec<usize>,
    /// Offset making every packed component non-negative.
    key_offset: i128,
    pub estimated_map_entries: u128,
}

impl HashJoinPlan {
    pub fn new(c: &CoefficientVector, x: i64) -> Result<Self> {
        if x < 0 {
            return Err(Error::InvalidInput("box radius X must be >= 0".into()));
        }
        let s = c.s();
        let a_len = s.div_ceil(2);
        let a: Vec<usize> = (0..a_len).collect();
        let b: Vec<usize> = (a_len..s).collect();
        let (map_indices, probe_indices) = if b.len() < a.len() { (b, a) } else { (a, b) };

        let mut key_offset: i128 = 0;
        for &ci in c.as_slice() {
            let term = (ci as i128)
                .checked_abs()
                .and_then(|v| v.checked_mul((x as i128).checked_pow(3)?))
                .ok_or(Error::Overflow {
                    context: "hash join key bound",
                })?;
            key_offset = key_offset.checked_add(term).ok_or(Error::Overflow {
                context: "hash join key bound",
            })?;
        }
        if 2 * key_offset >= (1i128 << 32) {
            return Err(Error::InvalidInput(format!(
                "form values up to {key_offset} do not fit the 32-bit key lanes; \
                 shrink X or the coefficients"
            )));
        }
        let side = 2 * x as u128 + 1;
        Ok(HashJoinPlan {
            estimated_map_entries: pow_cost(side * side, map_indices.len() as u32),
            map_indices,
            probe_indices,
            key_offset,
        })
    }

    fn pack(&self, v: [i128; 4]) -> u128 {
        let mut key = 0u128;
        for (l, &vl) in v.iter().enumerate() {
            let w = (vl + self.key_offset) as u128;
            debug_assert!(w < (1 << 32));
            key |= w << (32 * l);
        }
        key
    }
}

fn fill_multiset(
    atoms: &[Vec<[i128; 4]>],
    level: usize,
    partial: [i128; 4],
    plan: &HashJoinPlan,
    map: &mut HashMap<u128, u64>,
) {
    if level == atoms.len() {
        *map.entry(plan.pack(partial)).or_insert(0) += 1;
        return;
    }
    for a in &atoms[level] {
        fill_multiset(atoms, level + 1, add4(partial, *a), plan, map);
    }
}

fn probe_matches(
    atoms: &[Vec<[i128; 4]>],
    level: usize,
    partial: [i128; 4],
    plan: &HashJoinPlan,
    map: &HashMap<u128, u64>,
) -> u128 {
    if level == atoms.len() {
        let negated = [-partial[0], -partial[1], -partial[2], -partial[3]];
        return map.get(&plan.pack(negated)).copied().unwrap_or(0) as u128;
    }
    let mut acc = 0u128;
    for a in &atoms[level] {
        acc += probe_matches(atoms, level + 1, add4(partial, *a), plan, map);
    }
    acc
}

/// Same count as [`count_lines_bruteforce`], via a hash join: one half of
/// the coordinates fills a multiset map of form values, the other half looks
/// up the negated key.
pub fn count_lines_mitm(
    c: &CoefficientVector,
    x: i64,
    plan: &HashJoinPlan,
    budget: &Budget,
) -> Result<u128> {
    check_partial_sum_bound(c, x)?;
    let side = 2 * x as u128 + 1;
    let work = pow_cost(side * side, plan.map_indices.len() as u32)
        .saturating_add(pow_cost(side * side, plan.probe_indices.len() as u32));
    budget.check_ops(work)?;
    // u128 key + u64 count + hash-map slack
    budget.check_bytes(plan.estimated_map_entries.saturating_mul(48))?;

    let atoms_for = |indices: &[usize]| -> Vec<Vec<[i128; 4]>> {
        indices
            .iter()
            .map(|&i| weighted_atoms(c.as_slice()[i], -x, x))
            .collect()
    };
    let map_atoms = atoms_for(&plan.map_indices);
    let mut map = HashMap::new();
    fill_multiset(&map_atoms, 0, [0; 4], plan, &mut map);

    let probe_atoms = atoms_for(&plan.probe_indices);
    if probe_atoms.is_empty() {
        return Ok(map.get(&plan.pack([0; 4])).copied().unwrap_or(0) as u128);
    }
    let top = probe_atoms[0].len() as u64;
    try_sum_over_chunks(top, 1 << 10, |range| {
        let mut acc = 0u128;
        for k in range {
            acc += probe_matches(&probe_atoms, 1, probe_atoms[0][k as usize], plan, &map);
        }
        Ok(acc)
    })
}

/// The nine monomial sums `(x, y, x^2, xy, y^2, x^3, x^2 y, x y^2, y^3)` of
/// one positive pair.
fn nine_vector(x: i64, y: i64) -> [i64; 9] {
    [
        x,
        y,
        x * x,
        x * y,
        y * y,
        x * x * x,
        x * x * y,
        x * y * y,
        y * y * y,
    ]
}

/// Mean-value count for the full degree-(1,2,3) system: the number of
/// `(x, y)` in `[1, X]^{4s}` (2s pairs) whose first and last `s` pairs have
/// equal monomial sums in all nine components. Computed as `sum_v m_v^2`
/// over the multiset of `s`-fold monomial sums.
pub fn count_pv(s: usize, x: i64, budget: &Budget) -> Result<u128> {
    if s == 0 || x < 1 {
        return Err(Error::InvalidInput(
            "count_pv needs s >= 1 and X >= 1".into(),
        ));
    }
    let component_bound = (s as i128) * (x as i128).pow(3);
    if component_bound > i64::MAX as i128 / 4 {
        return Err(Error::Overflow {
            context: "count_pv component bound",
        });
    }
    budget.check_ops(pow_cost(x as u128 * x as u128, s as u32))?;
    budget.check_bytes(pow_cost(x as u128 * x as u128, s as u32).saturating_mul(112))?;

    let atoms: Vec<[i64; 9]> = {
        let mut v = Vec::with_capacity((x * x) as usize);
        for xi in 1..=x {
            for yi in 1..=x {
                v.push(nine_vector(xi, yi));
            }
        }
        v
    };

    let mut sums: HashMap<[i64; 9], u64> = HashMap::new();
    let mut stack = vec![0usize; s];
    // Odometer enumeration of the s-fold atom choices.
    'outer: loop {
        let mut total = [0i64; 9];
        for &k in &stack {
            for (t, a) in total.iter_mut().zip(atoms[k]) {
                *t += a;
            }
        }
        *sums.entry(total).or_insert(0) += 1;
        for slot in (0..s).rev() {
            stack[slot] += 1;
            if stack[slot] < atoms.len() {
                continue 'outer;
            }
            stack[slot] = 0;
        }
        break;
    }

    let mut count: u128 = 0;
    for &m in sums.values() {
        count = count
            .checked_add(u128::from(m) * u128::from(m))
            .ok_or(Error::Overflow {
                context: "count_pv",
            })?;
    }
    Ok(count)
}

/// Ordered 8-tuples in `[1, X]^8` with `x1^3 + ... + x4^3 = x5^3 + ... + x8^3`,
/// as `sum_n R4(n)^2` where `R4` is the self-convolution of the ordered
/// two-cube representation counts.
pub fn count_hua_single(x: u64, budget: &Budget) -> Result<u128> {
    if x < 1 {
        return Err(Error::InvalidInput("count_hua needs X >= 1".into()));
    }
    let x3 = (x as u128).pow(3);
    if 4 * x3 > usize::MAX as u128 / 2 {
        return Err(Error::Overflow {
            context: "count_hua table size",
        });
    }
    let pair_bound = (x as u128) * (x as u128 + 1) / 2;
    budget.check_ops(pair_bound.saturating_mul(pair_bound) / 2 + 8 * x3)?;
    budget.check_bytes(8 * (4 * x3 + 1) + 4 * (2 * x3 + 1))?;

    // Ordered two-cube representation counts, stored sparsely.
    let two_max = (2 * x3) as usize;
    let mut dense2 = vec![0u32; two_max + 1];
    for a in 1..=x {
        let a3 = a * a * a;
        for b in a..=x {
            let s = (a3 + b * b * b) as usize;
            dense2[s] += if a == b { 1 } else { 2 };
        }
    }
    let r2: Vec<(u64, u64)> = dense2
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(s, &c)| (s as u64, u64::from(c)))
        .collect();
    drop(dense2);

    // R4 = r2 * r2 over a dense table; relaxed atomic adds commute exactly.
    let four_max = (4 * x3) as usize;
    let r4: Vec<AtomicU64> = (0..=four_max).map(|_| AtomicU64::new(0)).collect();
    let n = r2.len() as u64;
    try_sum_over_chunks(n, 1 << 8, |range| {
        for i in range {
            let (si, ci) = r2[i as usize];
            for j in i..n {
                let (sj, cj) = r2[j as usize];
                let w = ci * cj * if i == j { 1 } else { 2 };
                r4[(si + sj) as usize].fetch_add(w, Ordering::Relaxed);
            }
        }
        Ok(0u128)
    })?;

    let len = r4.len() as u64;
    try_sum_over_chunks(len, 1 << 16, |range| {
        let mut acc: u128 = 0;
        for k in range {
            let v = r4[k as usize].load(Ordering::Relaxed) as u128;
            acc = acc.checked_add(v * v).ok_or(Error::Overflow {
                context: "count_hua sum of squares",
            })?;
        }
        Ok(acc)
    })
}

/// Number of `(x, y)` in `(Z/q)^{2s}` satisfying all four form congruences
/// modulo `q`, by full enumeration of `q^{2s}` residue tuples.
pub fn count_local(q: u64, c: &CoefficientVector, budget: &Budget) -> Result<u128> {
    if q < 1 {
        return Err(Error::InvalidInput("modulus q must be >= 1".into()));
    }
    if q > 1 << 20 {
        return Err(Error::InvalidInput(
            "modulus too large for enumeration".into(),
        ));
    }
    budget.check_ops(pow_cost(q as u128 * q as u128, c.s() as u32))?;
    budget.check_bytes((q as u128 * q as u128).saturating_mul(16 * c.s() as u128))?;

    // Per-coordinate residue alphabet c_i * nu_3(x, y) mod q.
    let atom_table = |ci: i64| -> Vec<[u32; 4]> {
        let cm = (ci.rem_euclid(q as i64)) as u64;
        let qm = q;
        let mut atoms = Vec::with_capacity((q * q) as usize);
        for xv in 0..qm {
            let x2 = xv * xv % qm;
            let x3 = x2 * xv % qm;
            for yv in 0..qm {
                let y2 = yv * yv % qm;
                atoms.push([
                    (cm * x3 % qm) as u32,
                    (cm * (x2 * yv % qm) % qm) as u32,
                    (cm * (xv * y2 % qm) % qm) as u32,
                    (cm * (yv * y2 % qm) % qm) as u32,
                ]);
            }
        }
        atoms
    };
    let atoms: Vec<Vec<[u32; 4]>> = c.as_slice().iter().map(|&ci| atom_table(ci)).collect();

    fn walk(atoms: &[Vec<[u32; 4]>], level: usize, partial: [u32; 4], q: u32) -> u128 {
        if level == atoms.len() {
            return u128::from(partial == [0; 4]);
        }
        let mut acc = 0u128;
        for a in &atoms[level] {
            let next = [
                (partial[0] + a[0]) % q,
                (partial[1] + a[1]) % q,
                (partial[2] + a[2]) % q,
                (partial[3] + a[3]) % q,
            ];
            acc += walk(atoms, level + 1, next, q);
        }
        acc
    }

    let top = atoms[0].len() as u64;
    try_sum_over_chunks(top, 1 << 10, |range| {
        let mut acc = 0u128;
        for k in range {
            acc += walk(&atoms, 1, atoms[0][k as usize], q as u32);
        }
        Ok(acc)
    })
}

/// Least-squares growth exponent of a count family on the log-log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Fits `log(count) ~ slope * log(X) + intercept`.
pub fn fit_exponent(points: &[(f64, u128)]) -> Result<ExponentFit> {
    if points.len() < 3 {
        return Err(Error::InvalidInput(
            "exponent fit needs at least three points".into(),
        ));
    }
    let mut logs = Vec::with_capacity(points.len());
    for &(x, count) in points {
        if x.is_nan() || x <= 0.0 {
            return Err(Error::InvalidInput("X values must be positive".into()));
        }
        if count == 0 {
            return Err(Error::InvalidInput("counts must be positive".into()));
        }
        logs.push((x.ln(), (count as f64).ln()));
    }
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("X values must be distinct".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    Ok(ExponentFit {
        slope,
        intercept: mean_y - slope * mean_x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(v: &[i64]) -> CoefficientVector {
        CoefficientVector::new(v.to_vec()).unwrap()
    }

    fn unlimited() -> Budget {
        Budget::unlimited()
    }

    // --- line counts, closed forms ---

    #[test]
    fn single_coefficient_box_has_only_the_origin() {
        for x in [0, 1, 5] {
            assert_eq!(
                count_lines_bruteforce(&c(&[1]), x, &unlimited()).unwrap(),
                1
            );
        }
    }

    #[test]
    fn cancelling_pair_counts_the_diagonal() {
        // c = (1, -1): cubes are injective, so the solutions are exactly
        // x2 = x1, y2 = y1, one per (x1, y1) in the box.
        for x in [1i64, 2, 3] {
            let side = (2 * x + 1) as u128;
            assert_eq!(
                count_lines_bruteforce(&c(&[1, -1]), x, &unlimited()).unwrap(),
                side * side
            );
        }
    }

    #[test]
    fn summing_pair_counts_the_antidiagonal() {
        // c = (1, 1): solutions are x2 = -x1, y2 = -y1.
        assert_eq!(
            count_lines_bruteforce(&c(&[1, 1]), 1, &unlimited()).unwrap(),
            9
        );
    }

    #[test]
    fn incommensurable_pair_only_origin() {
        // x1^3 = -2 x2^3 has no nonzero integer solutions.
        assert_eq!(
            count_lines_bruteforce(&c(&[1, 2]), 2, &unlimited()).unwrap(),
            1
        );
    }

    #[test]
    fn bruteforce_rejects_negative_radius() {
        assert!(matches!(
            count_lines_bruteforce(&c(&[1]), -1, &unlimited()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn bruteforce_respects_work_budget() {
        let tiny = Budget {
            max_ops: 10,
            max_bytes: u128::MAX,
        };
        assert!(matches!(
            count_lines_bruteforce(&c(&[1, -1]), 5, &tiny),
            Err(Error::WorkBudget { .. })
        ));
    }

    // --- hash join ---

    #[test]
    fn plan_partitions_indices_and_maps_smaller_half() {
        for s in 1..=6usize {
            let coeffs = c(&vec![1; s]);
            let plan = HashJoinPlan::new(&coeffs, 2).unwrap();
            let mut all: Vec<usize> = plan
                .map_indices
                .iter()
                .chain(&plan.probe_indices)
                .copied()
                .collect();
            all.sort_unstable();
            assert_eq!(all, (0..s).collect::<Vec<_>>());
            assert!(plan.map_indices.len() <= plan.probe_indices.len());
            assert_eq!(plan.probe_indices.len(), s.div_ceil(2));
        }
    }

    #[test]
    fn plan_rejects_keys_wider_than_lanes() {
        assert!(matches!(
            HashJoinPlan::new(&c(&[1]), 2_000),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn mitm_matches_bruteforce_on_frozen_cases() {
        let cases: &[(&[i64], i64)] = &[
            (&[1], 2),
            (&[1, -1], 2),
            (&[1, -1], 10),
            (&[1, 1], 2),
            (&[2, -3], 2),
            (&[1, 1, -2], 1),
            (&[1, 1, 1], 2),
        ];
        for &(coeffs, x) in cases {
            let cv = c(coeffs);
            let plan = HashJoinPlan::new(&cv, x).unwrap();
            let slow = count_lines_bruteforce(&cv, x, &unlimited()).unwrap();
            let fast = count_lines_mitm(&cv, x, &plan, &unlimited()).unwrap();
            assert_eq!(slow, fast, "c = {coeffs:?}, X = {x}");
        }
    }

    #[test]
    fn mitm_cancelling_pair_large_box() {
        let cv = c(&[1, -1]);
        let plan = HashJoinPlan::new(&cv, 10).unwrap();
        assert_eq!(count_lines_mitm(&cv, 10, &plan, &unlimited()).unwrap(), 441);
    }

    // --- mean-value counts ---

    /// Direct oracle for s = 2: enumerate all eight coordinates and compare
    /// the nine monomial sums written out longhand.
    fn pv_two_direct(x: i64) -> u128 {
        let mut count = 0u128;
        let r = 1..=x;
        for x1 in r.clone() {
            for y1 in r.clone() {
                for x2 in r.clone() {
                    for y2 in r.clone() {
                        for x3 in r.clone() {
                            for y3 in r.clone() {
                                for x4 in r.clone() {
                                    for y4 in r.clone() {
                                        let ok = x1 + x2 == x3 + x4
                                            && y1 + y2 == y3 + y4
                                            && x1 * x1 + x2 * x2 == x3 * x3 + x4 * x4
                                            && x1 * y1 + x2 * y2 == x3 * y3 + x4 * y4
                                            && y1 * y1 + y2 * y2 == y3 * y3 + y4 * y4
                                            && x1 * x1 * x1 + x2 * x2 * x2
                                                == x3 * x3 * x3 + x4 * x4 * x4
                                            && x1 * x1 * y1 + x2 * x2 * y2
                                                == x3 * x3 * y3 + x4 * x4 * y4
                                            && x1 * y1 * y1 + x2 * y2 * y2
                                                == x3 * y3 * y3 + x4 * y4 * y4
                                            && y1 * y1 * y1 + y2 * y2 * y2
                                                == y3 * y3 * y3 + y4 * y4 * y4;
                                        count += u128::from(ok);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn pv_single_pair_is_the_square() {
        // One pair per side: the nine sums determine (x, y), so every
        // multiset class has multiplicity one.
        for x in 1..=10 {
            assert_eq!(count_pv(1, x, &unlimited()).unwrap(), (x as u128).pow(2));
        }
    }

    #[test]
    fn pv_two_pairs_matches_direct_enumeration() {
        for x in 1..=3 {
            assert_eq!(
                count_pv(2, x, &unlimited()).unwrap(),
                pv_two_direct(x),
                "X = {x}"
            );
        }
    }

    #[test]
    fn pv_dominates_diagonal_solutions() {
        // Taking the second s pairs equal to the first gives X^{2s}
        // solutions, a lower bound.
        for (s, x) in [(2usize, 4i64), (3, 2)] {
            let lower = (x as u128).pow(2 * s as u32);
            assert!(count_pv(s, x, &unlimited()).unwrap() >= lower);
        }
    }

    #[test]
    fn pv_rejects_empty_ranges() {
        assert!(count_pv(0, 3, &unlimited()).is_err());
        assert!(count_pv(2, 0, &unlimited()).is_err());
    }

    // --- equal sums of four cubes ---

    /// Direct oracle: full eight-fold loop.
    fn hua_direct(x: u64) -> u128 {
        let cube = |v: u64| v * v * v;
        let mut count = 0u128;
        let r = 1..=x;
        for a in r.clone() {
            for b in r.clone() {
                for cc in r.clone() {
                    for d in r.clone() {
                        for e in r.clone() {
                            for f in r.clone() {
                                for g in r.clone() {
                                    for h in r.clone() {
                                        let lhs = cube(a) + cube(b) + cube(cc) + cube(d);
                                        let rhs = cube(e) + cube(f) + cube(g) + cube(h);
                                        count += u128::from(lhs == rhs);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn hua_unit_box() {
        assert_eq!(count_hua_single(1, &unlimited()).unwrap(), 1);
    }

    #[test]
    fn hua_side_two_frozen_value() {
        // r2 over [1,2]^2: 2 -> 1, 9 -> 2, 16 -> 1; R4 has the binomial
        // profile (1, 4, 6, 4, 1) on sums (4, 11, 18, 25, 32), so the sum of
        // squares is 1 + 16 + 36 + 16 + 1 = 70.
        assert_eq!(count_hua_single(2, &unlimited()).unwrap(), 70);
    }

    #[test]
    fn hua_matches_direct_enumeration() {
        for x in [3u64, 4] {
            assert_eq!(count_hua_single(x, &unlimited()).unwrap(), hua_direct(x));
        }
    }

    // --- local counts ---

    #[test]
    fn local_count_trivial_modulus() {
        assert_eq!(count_local(1, &c(&[1, -1]), &unlimited()).unwrap(), 1);
    }

    #[test]
    fn local_count_single_coordinate_small_primes() {
        // Mod 2 and mod 3, x^3 = x, so all four congruences force
        // x = y = 0: exactly one solution.
        assert_eq!(count_local(2, &c(&[1]), &unlimited()).unwrap(), 1);
        assert_eq!(count_local(3, &c(&[1]), &unlimited()).unwrap(), 1);
    }

    #[test]
    fn local_count_cancelling_pair_mod_two() {
        // The congruences reduce to x1 = x2 and y1 = y2 mod 2, with the
        // mixed conditions then automatic: 4 solutions.
        assert_eq!(count_local(2, &c(&[1, -1]), &unlimited()).unwrap(), 4);
    }

    #[test]
    fn local_count_three_ones_mod_two() {
        // Hand count: even-weight x, even-weight y, x . y even; 4 choices of
        // x, and 4, 2, 2, 2 compatible y respectively.
        assert_eq!(count_local(2, &c(&[1, 1, 1]), &unlimited()).unwrap(), 10);
    }

    #[test]
    fn local_count_direct_check_mod_four() {
        // Independent nested-loop check mod 4 for c = (1, -1).
        let q = 4i64;
        let mut expect = 0u128;
        for x1 in 0..q {
            for y1 in 0..q {
                for x2 in 0..q {
                    for y2 in 0..q {
                        let f0 = x1 * x1 * x1 - x2 * x2 * x2;
                        let f1 = x1 * x1 * y1 - x2 * x2 * y2;
                        let f2 = x1 * y1 * y1 - x2 * y2 * y2;
                        let f3 = y1 * y1 * y1 - y2 * y2 * y2;
                        let ok = [f0, f1, f2, f3].iter().all(|v| v.rem_euclid(q) == 0);
                        expect += u128::from(ok);
                    }
                }
            }
        }
        assert_eq!(count_local(4, &c(&[1, -1]), &unlimited()).unwrap(), expect);
    }

    // --- exponent fit ---

    #[test]
    fn fit_recovers_exact_square_law() {
        let points: Vec<(f64, u128)> = [4u128, 8, 16, 32, 64]
            .iter()
            .map(|&x| (x as f64, x * x))
            .collect();
        let fit = fit_exponent(&points).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-9, "slope = {}", fit.slope);
        assert!(fit.intercept.abs() < 1e-9);
    }

    #[test]
    fn fit_rejects_degenerate_inputs() {
        assert!(fit_exponent(&[(2.0, 4), (4.0, 16)]).is_err());
        assert!(fit_exponent(&[(2.0, 4), (4.0, 0), (8.0, 64)]).is_err());
        assert!(fit_exponent(&[(2.0, 4), (2.0, 4), (2.0, 4)]).is_err());
        assert!(fit_exponent(&[(-1.0, 4), (2.0, 4), (3.0, 4)]).is_err());
    }

    // --- invariance properties ---

    fn small_coeffs() -> impl Strategy<Value = Vec<i64>> {
        prop::collection::vec((-3i64..=3).prop_filter("nonzero", |v| *v != 0), 1..=3)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn mitm_always_matches_bruteforce(coeffs in small_coeffs(), x in 0i64..=2) {
            let cv = c(&coeffs);
            let plan = HashJoinPlan::new(&cv, x).unwrap();
            let slow = count_lines_bruteforce(&cv, x, &unlimited()).unwrap();
            let fast = count_lines_mitm(&cv, x, &plan, &unlimited()).unwrap();
            prop_assert_eq!(slow, fast);
        }

        #[test]
        fn count_invariant_under_coefficient_permutation(
            coeffs in small_coeffs(), x in 0i64..=2
        ) {
            let mut rotated = coeffs.clone();
            rotated.rotate_left(1);
            let a = count_lines_bruteforce(&c(&coeffs), x, &unlimited()).unwrap();
            let b = count_lines_bruteforce(&c(&rotated), x, &unlimited()).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn count_invariant_under_sign_flip(coeffs in small_coeffs(), x in 0i64..=2) {
            // Negating one coefficient is absorbed by (x_i, y_i) -> (-x_i, -y_i).
            let mut flipped = coeffs.clone();
            flipped[0] = -flipped[0];
            let a = count_lines_bruteforce(&c(&coeffs), x, &unlimited()).unwrap();
            let b = count_lines_bruteforce(&c(&flipped), x, &unlimited()).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn local_count_invariant_under_permutation(
            coeffs in small_coeffs(), q in 2u64..=5
        ) {
            let mut rotated = coeffs.clone();
            rotated.rotate_left(1);
            let a = count_local(q, &c(&coeffs), &unlimited()).unwrap();
            let b = count_local(q, &c(&rotated), &unlimited()).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
