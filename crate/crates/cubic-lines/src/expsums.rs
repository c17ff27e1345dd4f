//! Exponential sums: truncated Weyl sums, complete sums over residues,
//! local averages, and the singular series they assemble into.
//!
//! The degree-3 monomial vector of a pair is `v(x, y) = (x^3, x^2 y, x y^2,
//! y^3)`; all sums here attach phases to it (and, for the nine-phase
//! variant, to the lower-degree monomials as well).

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::budget::{pow_cost, Budget};
use crate::error::{Error, Result};
use crate::forms::CoefficientVector;
use crate::parallel::try_sum_over_chunks;
use crate::report::IdentityCheck;

/// `e(t) = exp(2 pi i t)`, with the argument reduced mod 1 first so large
/// phases keep full precision.
pub fn e(t: f64) -> Complex64 {
    let r = t.rem_euclid(1.0);
    let (sin, cos) = (TAU * r).sin_cos();
    Complex64::new(cos, sin)
}

/// Summation region for truncated Weyl sums: pairs in `[1, X]^2` or in
/// `[-X, X]^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SummationBox {
    Positive,
    Symmetric,
}

impl SummationBox {
    fn side(self, x: i64) -> std::ops::RangeInclusive<i64> {
        match self {
            SummationBox::Positive => 1..=x,
            SummationBox::Symmetric => -x..=x,
        }
    }

    /// Number of pairs in the region.
    pub fn area(self, x: i64) -> u128 {
        let n = match self {
            SummationBox::Positive => x.max(0) as u128,
            SummationBox::Symmetric => 2 * x.max(0) as u128 + 1,
        };
        n * n
    }
}

fn kahan_add(sum: &mut Complex64, comp: &mut Complex64, term: Complex64) {
    let y = term - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

/// Truncated Weyl sum of one weighted coordinate:
/// `F(alpha) = sum_{(x,y) in box} e(c * (alpha . v(x, y)))`.
pub fn weyl_sum(c: i64, x: i64, alpha: [f64; 4], region: SummationBox) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    let cf = c as f64;
    for xv in region.side(x) {
        let xf = xv as f64;
        let (x3, x2) = (xf * xf * xf, xf * xf);
        for yv in region.side(x) {
            let yf = yv as f64;
            let phase = cf
                * (alpha[0] * x3
                    + alpha[1] * x2 * yf
                    + alpha[2] * xf * yf * yf
                    + alpha[3] * yf * yf * yf);
            kahan_add(&mut sum, &mut comp, e(phase));
        }
    }
    sum
}

/// Phases for the nine-monomial sum: degree 1, 2 and 3 blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NinePhase {
    pub theta: [f64; 2],
    pub beta: [f64; 3],
    pub alpha: [f64; 4],
}

impl NinePhase {
    pub fn cubic_only(alpha: [f64; 4]) -> Self {
        NinePhase {
            theta: [0.0; 2],
            beta: [0.0; 3],
            alpha,
        }
    }
}

/// Truncated sum with phases on all nine monomials of degrees 1..3:
/// `sum_{(x,y) in box} e(theta.(x,y) + beta.(x^2,xy,y^2) + alpha.v(x,y))`.
pub fn weyl_sum_nine(x: i64, phase: &NinePhase, region: SummationBox) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    for xv in region.side(x) {
        let xf = xv as f64;
        for yv in region.side(x) {
            let yf = yv as f64;
            let t = phase.theta[0] * xf
                + phase.theta[1] * yf
                + phase.beta[0] * xf * xf
                + phase.beta[1] * xf * yf
                + phase.beta[2] * yf * yf
                + phase.alpha[0] * xf * xf * xf
                + phase.alpha[1] * xf * xf * yf
                + phase.alpha[2] * xf * yf * yf
                + phase.alpha[3] * yf * yf * yf;
            kahan_add(&mut sum, &mut comp, e(t));
        }
    }
    sum
}

fn reduce_vec(q: u64, a: [i64; 4]) -> [u64; 4] {
    let qm = q as i64;
    [
        a[0].rem_euclid(qm) as u64,
        a[1].rem_euclid(qm) as u64,
        a[2].rem_euclid(qm) as u64,
        a[3].rem_euclid(qm) as u64,
    ]
}

/// Roots of unity `e(r / q)` for `r = 0..q`.
fn root_table(q: u64) -> Vec<Complex64> {
    (0..q).map(|r| e(r as f64 / q as f64)).collect()
}

/// Complete sum `S(q; a) = sum_{x,y mod q} e((a . v(x, y)) / q)` via the
/// residue-multiplicity histogram: one pass over the `q^2` pairs collecting
/// integer counts, then one pass over the `q` roots of unity.
pub fn complete_sum(q: u64, a: [i64; 4], budget: &Budget) -> Result<Complex64> {
    if q < 1 {
        return Err(Error::InvalidInput("modulus q must be >= 1".into()));
    }
    if q > 1 << 20 {
        return Err(Error::InvalidInput(
            "modulus too large for enumeration".into(),
        ));
    }
    budget.check_ops((q as u128) * (q as u128) + q as u128)?;
    let ar = reduce_vec(q, a);
    let mut hist = vec![0u64; q as usize];
    for x in 0..q {
        let x2 = x * x % q;
        let x3 = x2 * x % q;
        for y in 0..q {
            let y2 = y * y % q;
            let r =
                (ar[0] * x3 + ar[1] * (x2 * y % q) + ar[2] * (x * y2 % q) + ar[3] * (y * y2 % q))
                    % q;
            hist[r as usize] += 1;
        }
    }
    let roots = root_table(q);
    let mut sum = Complex64::new(0.0, 0.0);
    for (r, &m) in hist.iter().enumerate() {
        if m > 0 {
            sum += roots[r] * m as f64;
        }
    }
    Ok(sum)
}

/// Same sum as [`complete_sum`], term by term with a fresh exponential per
/// pair. Slow; kept as an independent oracle.
pub fn complete_sum_direct(q: u64, a: [i64; 4]) -> Complex64 {
    let qf = q as f64;
    let ar = reduce_vec(q, a);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    for x in 0..q {
        for y in 0..q {
            let (xf, yf) = (x as f64, y as f64);
            let t = (ar[0] as f64 * xf * xf * xf
                + ar[1] as f64 * xf * xf * yf
                + ar[2] as f64 * xf * yf * yf
                + ar[3] as f64 * yf * yf * yf)
                / qf;
            kahan_add(&mut sum, &mut comp, e(t));
        }
    }
    sum
}

/// All complete sums for a fixed modulus, indexed `a1 + q a2 + q^2 a3 +
/// q^3 a4` over residues `0..q`.
///
/// Starts from the pushforward counts of `v(x, y)` on `(Z/q)^4` and applies
/// a length-`q` transform along each of the four axes, for `4 q^5`
/// multiply-adds total instead of `q^6`.
pub struct CompleteSumTable {
    pub q: u64,
    /// How the table was computed; distinguishes this axis-transform path
    /// from the per-tuple histogram and term-by-term reference evaluations.
    pub method: &'static str,
    values: Vec<Complex64>,
}

impl CompleteSumTable {
    pub fn build(q: u64, budget: &Budget) -> Result<Self> {
        if q < 1 {
            return Err(Error::InvalidInput("modulus q must be >= 1".into()));
        }
        let qq = q as u128;
        budget.check_ops(4 * qq * qq * qq * qq * qq + qq * qq)?;
        budget.check_bytes(2 * 16 * qq * qq * qq * qq)?;
        let n = (q * q * q * q) as usize;

        // Pushforward measure of the monomial map on (Z/q)^4.
        let mut data = vec![Complex64::new(0.0, 0.0); n];
        for x in 0..q {
            let x2 = x * x % q;
            let x3 = x2 * x % q;
            for y in 0..q {
                let y2 = y * y % q;
                let idx = x3 + q * (x2 * y % q) + q * q * (x * y2 % q) + q * q * q * (y * y2 % q);
                data[idx as usize].re += 1.0;
            }
        }

        // One forward transform per axis, reading `data`, writing `out`.
        let roots = root_table(q);
        let qs = q as usize;
        for axis in 0..4 {
            let stride = qs.pow(axis);
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            // Deterministic per-cell computation: each output index is
            // written exactly once, so worker count cannot change results.
            use rayon::prelude::*;
            out.par_chunks_mut(1 << 14)
                .enumerate()
                .for_each(|(chunk_no, chunk)| {
                    let base_idx = chunk_no << 14;
                    for (off, slot) in chunk.iter_mut().enumerate() {
                        let idx = base_idx + off;
                        let k = idx / stride % qs;
                        let line_base = idx - k * stride;
                        let mut acc = Complex64::new(0.0, 0.0);
                        for j in 0..qs {
                            let w = roots[j * k % qs];
                            acc += data[line_base + j * stride] * w;
                        }
                        *slot = acc;
                    }
                });
            data = out;
        }
        Ok(CompleteSumTable {
            q,
            method: "multi-axis transform",
            values: data,
        })
    }

    /// `S(q; a)` for residues `a` in `0..q`.
    pub fn get(&self, a: [u64; 4]) -> Complex64 {
        let q = self.q;
        debug_assert!(a.iter().all(|&v| v < q));
        self.values[(a[0] + q * a[1] + q * q * a[2] + q * q * q * a[3]) as usize]
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Average of the normalized complete-sum product over primitive residue
/// vectors:
/// `A(q) = sum_{a mod q, gcd(a1..a4, q) = 1} prod_i S(q; c_i a) / q^2`.
///
/// The sum of `A(q)` over prime powers is the local density input to the
/// singular series. The result is real up to rounding; a residual imaginary
/// part above `1e-6` (relative) is an error.
pub fn local_average(q: u64, c: &CoefficientVector, budget: &Budget) -> Result<f64> {
    let table = CompleteSumTable::build(q, budget)?;
    let s = c.s();
    budget.check_ops(pow_cost(q as u128, 4).saturating_mul(4 * s as u128 + 8))?;

    // gcd(a1, .., a4, q) = 1 <=> the componentwise gcd(a_l, q) values are
    // jointly coprime.
    let gcd_q: Vec<u64> = (0..q).map(|r| gcd(r, q)).collect();
    // Scaled residue c_i * r mod q, one table per coordinate.
    let scales: Vec<Vec<u64>> = c
        .as_slice()
        .iter()
        .map(|&ci| {
            let cm = ci.rem_euclid(q as i64) as u64;
            (0..q).map(|r| cm * r % q).collect()
        })
        .collect();

    let q2 = (q * q) as f64;
    let n = q * q * q * q;
    let total: Complex64 = try_sum_over_chunks(n, 1 << 16, |range| {
        let mut acc = Complex64::new(0.0, 0.0);
        for idx in range {
            let a1 = idx % q;
            let a2 = idx / q % q;
            let a3 = idx / (q * q) % q;
            let a4 = idx / (q * q * q) % q;
            let g = gcd(
                gcd(gcd_q[a1 as usize], gcd_q[a2 as usize]),
                gcd(gcd_q[a3 as usize], gcd_q[a4 as usize]),
            );
            if g != 1 {
                continue;
            }
            let mut prod = Complex64::new(1.0, 0.0);
            for sc in &scales {
                let a = [
                    sc[a1 as usize],
                    sc[a2 as usize],
                    sc[a3 as usize],
                    sc[a4 as usize],
                ];
                prod *= table.get(a) / q2;
            }
            acc += prod;
        }
        Ok(acc)
    })?;

    let tol = 1e-6 * total.re.abs().max(1.0);
    if total.im.abs() > tol {
        return Err(Error::ImaginaryResidue {
            context: "local average",
            imag: total.im,
            value: total.re,
            tol,
        });
    }
    Ok(total.re)
}

fn primes_up_to(n: u64) -> Vec<u64> {
    let mut sieve = vec![true; (n + 1).max(2) as usize];
    sieve[0] = false;
    sieve[1] = false;
    let mut p = 2usize;
    while p * p <= n as usize {
        if sieve[p] {
            for m in (p * p..=n as usize).step_by(p) {
                sieve[m] = false;
            }
        }
        p += 1;
    }
    (2..=n).filter(|&k| sieve[k as usize]).collect()
}

/// One Euler factor of the singular series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalFactor {
    pub p: u64,
    /// `1 + A(p) + A(p^2) + ...` up to the prime's depth.
    pub factor: f64,
    /// The summed terms `A(p^h)` in order of `h`.
    pub terms: Vec<f64>,
}

/// Truncated singular series: product of local factors with a tail-size
/// diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularSeriesEstimate {
    pub value: f64,
    pub factors: Vec<LocalFactor>,
    /// Relative change contributed by the largest prime, `|chi_p - 1|`; a
    /// proxy for the truncation error of the product.
    pub stability: f64,
}

/// Truncated Euler product `prod_{p <= p_max} (1 + sum_{h <= H(p)} A(p^h))`
/// where `H(p) = deep_h` for `p <= deep_cutoff` and `1` beyond.
pub fn singular_series(
    c: &CoefficientVector,
    p_max: u64,
    deep_h: u32,
    deep_cutoff: u64,
    budget: &Budget,
) -> Result<SingularSeriesEstimate> {
    if p_max < 2 || deep_h < 1 {
        return Err(Error::InvalidInput(
            "singular series needs p_max >= 2 and depth >= 1".into(),
        ));
    }
    let mut factors = Vec::new();
    let mut value = 1.0f64;
    let mut stability = 0.0;
    for p in primes_up_to(p_max) {
        let depth = if p <= deep_cutoff { deep_h } else { 1 };
        let mut terms = Vec::with_capacity(depth as usize);
        let mut chi = 1.0f64;
        for h in 1..=depth {
            let term = local_average(p.pow(h), c, budget)?;
            chi += term;
            terms.push(term);
        }
        if chi <= 0.0 {
            return Err(Error::NonpositiveLocalFactor { p, value: chi });
        }
        value *= chi;
        stability = (chi - 1.0).abs();
        factors.push(LocalFactor {
            p,
            factor: chi,
            terms,
        });
    }
    Ok(SingularSeriesEstimate {
        value,
        factors,
        stability,
    })
}

/// Verifies the prime-power partial-sum identity linking local averages to
/// congruence counts:
/// `1 + A(p) + ... + A(p^h) = p^{h(4 - 2s)} * M(p^h)`,
/// with `M` the solution count of the four form congruences mod `p^h`.
pub fn local_identity_check(
    p: u64,
    h: u32,
    c: &CoefficientVector,
    budget: &Budget,
) -> Result<IdentityCheck> {
    if h < 1 {
        return Err(Error::InvalidInput("identity check needs h >= 1".into()));
    }
    let mut lhs = 1.0f64;
    for j in 1..=h {
        lhs += local_average(p.pow(j), c, budget)?;
    }
    let q = p.pow(h);
    let m = crate::counting::count_local(q, c, budget)? as f64;
    let exponent = h as i32 * (4 - 2 * c.s() as i32);
    let rhs = (p as f64).powi(exponent) * m;
    let tolerance = 1e-6 * rhs.abs().max(1.0);
    Ok(IdentityCheck::new(
        format!(
            "sum_{{0<=j<=h}} A(p^j) = p^{{h(4-2s)}} M(p^h) at p={p}, h={h}, s={}",
            c.s()
        ),
        lhs,
        rhs,
        tolerance,
    ))
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

    // --- truncated Weyl sums ---

    #[test]
    fn zero_phase_counts_the_box() {
        let f = weyl_sum(1, 3, [0.0; 4], SummationBox::Positive);
        assert!((f - Complex64::new(9.0, 0.0)).norm() < 1e-12);
        let g = weyl_sum(2, 3, [0.0; 4], SummationBox::Symmetric);
        assert!((g - Complex64::new(49.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn half_phase_on_cubes_cancels_small_box() {
        // x in {1, 2}: e(x^3 / 2) alternates -1, +1, so the double sum
        // cancels exactly.
        let f = weyl_sum(1, 2, [0.5, 0.0, 0.0, 0.0], SummationBox::Positive);
        assert!(f.norm() < 1e-9, "expected 0, got {f}");
    }

    #[test]
    fn nine_phase_linear_cancellation() {
        let phase = NinePhase {
            theta: [0.5, 0.0],
            beta: [0.0; 3],
            alpha: [0.0; 4],
        };
        let g = weyl_sum_nine(2, &phase, SummationBox::Positive);
        assert!(g.norm() < 1e-9, "expected 0, got {g}");
    }

    #[test]
    fn residue_grid_mean_square_recovers_pair_count() {
        // Mean of |F|^2 over the full (Z/17)^4 phase grid counts pairs of
        // box points with congruent monomial vectors mod 17; the box [1,2]^2
        // has all monomial differences below 17, so only the four diagonal
        // pairs survive.
        let q = 17u64;
        let mut total = 0.0f64;
        for idx in 0..q.pow(4) {
            let a = [
                idx % q,
                idx / q % q,
                idx / (q * q) % q,
                idx / (q * q * q) % q,
            ];
            let alpha = a.map(|v| v as f64 / q as f64);
            total += weyl_sum(1, 2, alpha, SummationBox::Positive).norm_sqr();
        }
        let mean = total / q.pow(4) as f64;
        assert!((mean - 4.0).abs() < 1e-6, "mean = {mean}");
    }

    // --- complete sums ---

    #[test]
    fn complete_sum_trivial_modulus() {
        let s = complete_sum(1, [5, -3, 2, 0], &unlimited()).unwrap();
        assert!((s - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn complete_sum_mod_two_corner_case() {
        // a = (1,0,0,1): terms (-1)^{x+y} over the four residue pairs.
        let s = complete_sum(2, [1, 0, 0, 1], &unlimited()).unwrap();
        assert!(s.norm() < 1e-12, "expected 0, got {s}");
    }

    #[test]
    fn complete_sum_mod_three_pure_cube() {
        // Cubing is a bijection mod 3, so the x-sum is a full character sum.
        let s = complete_sum(3, [1, 0, 0, 0], &unlimited()).unwrap();
        assert!(s.norm() < 1e-12, "expected 0, got {s}");
    }

    #[test]
    fn complete_sum_mod_seven_pure_cube_frozen() {
        // Cubes mod 7 hit {0, 1, 6} with multiplicities (1, 3, 3):
        // S = 7 (1 + 6 cos(2 pi / 7)).
        let s = complete_sum(7, [1, 0, 0, 0], &unlimited()).unwrap();
        let expect = 7.0 * (1.0 + 6.0 * (std::f64::consts::TAU / 7.0).cos());
        assert!(
            (s.re - expect).abs() < 1e-9 && s.im.abs() < 1e-9,
            "{s} vs {expect}"
        );
    }

    #[test]
    fn complete_sum_zero_vector_is_q_squared() {
        for q in [1u64, 2, 5, 12] {
            let s = complete_sum(q, [0; 4], &unlimited()).unwrap();
            assert!((s - Complex64::new((q * q) as f64, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn table_matches_pointwise_sums() {
        let q = 5u64;
        let table = CompleteSumTable::build(q, &unlimited()).unwrap();
        for idx in 0..q.pow(4) {
            let a = [
                idx % q,
                idx / q % q,
                idx / (q * q) % q,
                idx / (q * q * q) % q,
            ];
            let direct = complete_sum(q, a.map(|v| v as i64), &unlimited()).unwrap();
            let got = table.get(a);
            assert!((direct - got).norm() < 1e-9 * (q * q) as f64, "a = {a:?}");
        }
    }

    #[test]
    fn table_respects_byte_budget() {
        let tiny = Budget {
            max_ops: u128::MAX,
            max_bytes: 1 << 10,
        };
        assert!(matches!(
            CompleteSumTable::build(9, &tiny),
            Err(Error::MemoryBudget { .. })
        ));
    }

    // --- local averages and the singular series ---

    #[test]
    fn local_average_trivial_modulus_is_one() {
        for coeffs in [vec![1], vec![1, -1], vec![2, 3, -5]] {
            let a = local_average(1, &c(&coeffs), &unlimited()).unwrap();
            assert!((a - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn local_average_mod_two_single_coordinate() {
        // All sixteen S(2; a) sum to 16 (one solution pair mod 2), the
        // excluded a = 0 term contributes 4, and q^2 = 4: (16 - 4) / 4 = 3.
        let a = local_average(2, &c(&[1]), &unlimited()).unwrap();
        assert!((a - 3.0).abs() < 1e-9, "got {a}");
    }

    #[test]
    fn local_average_mod_three_single_coordinate() {
        let a = local_average(3, &c(&[1]), &unlimited()).unwrap();
        assert!((a - 8.0).abs() < 1e-9, "got {a}");
    }

    #[test]
    fn local_average_mod_two_cancelling_pair() {
        // 1 + A(2) equals the mod-2 solution count 4 when s = 2.
        let a = local_average(2, &c(&[1, -1]), &unlimited()).unwrap();
        assert!((a - 3.0).abs() < 1e-9, "got {a}");
    }

    #[test]
    fn local_average_mod_two_three_ones() {
        // s = 3: 1 + A(2) = 2^{-2} M(2) with M(2) = 10 counted by hand.
        let a = local_average(2, &c(&[1, 1, 1]), &unlimited()).unwrap();
        assert!((a - 1.5).abs() < 1e-9, "got {a}");
    }

    #[test]
    fn singular_series_two_prime_frozen_product() {
        let est = singular_series(&c(&[1]), 3, 1, 7, &unlimited()).unwrap();
        assert_eq!(est.factors.len(), 2);
        assert!((est.factors[0].factor - 4.0).abs() < 1e-9);
        assert!((est.factors[1].factor - 9.0).abs() < 1e-9);
        assert!((est.value - 36.0).abs() < 1e-8);
        assert!((est.stability - 8.0).abs() < 1e-9);
    }

    #[test]
    fn singular_series_three_ones_mod_two_factor() {
        let est = singular_series(&c(&[1, 1, 1]), 2, 1, 7, &unlimited()).unwrap();
        assert!((est.value - 2.5).abs() < 1e-9, "got {}", est.value);
    }

    #[test]
    fn identity_check_prime_cases() {
        let chk = local_identity_check(2, 1, &c(&[1]), &unlimited()).unwrap();
        assert!(chk.pass, "{chk:?}");
        assert!((chk.lhs - 4.0).abs() < 1e-9 && (chk.rhs - 4.0).abs() < 1e-9);

        let chk = local_identity_check(3, 1, &c(&[1]), &unlimited()).unwrap();
        assert!(chk.pass, "{chk:?}");
        assert!((chk.rhs - 9.0).abs() < 1e-9);
    }

    #[test]
    fn identity_check_prime_power_and_higher_s() {
        let chk = local_identity_check(2, 2, &c(&[1, -1]), &unlimited()).unwrap();
        assert!(chk.pass, "{chk:?}");
        let chk = local_identity_check(2, 1, &c(&[1, 1, 1]), &unlimited()).unwrap();
        assert!(chk.pass, "{chk:?}");
        assert!((chk.lhs - 2.5).abs() < 1e-9);
        let chk = local_identity_check(5, 1, &c(&[1, 1, 1]), &unlimited()).unwrap();
        assert!(chk.pass, "{chk:?}");
    }

    // --- properties ---

    fn small_vec4() -> impl Strategy<Value = [i64; 4]> {
        [-20i64..=20, -20i64..=20, -20i64..=20, -20i64..=20]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn weyl_sum_conjugates_under_phase_negation(
            alpha in [0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0],
            cc in 1i64..=3,
            x in 1i64..=4,
        ) {
            let f = weyl_sum(cc, x, alpha, SummationBox::Positive);
            let g = weyl_sum(cc, x, alpha.map(|t| -t), SummationBox::Positive);
            prop_assert!((f.conj() - g).norm() < 1e-9);
        }

        #[test]
        fn weyl_sum_is_one_periodic(
            alpha in [0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0],
            x in 1i64..=3,
        ) {
            let f = weyl_sum(1, x, alpha, SummationBox::Positive);
            let shifted = [alpha[0] + 1.0, alpha[1], alpha[2] + 1.0, alpha[3]];
            let g = weyl_sum(1, x, shifted, SummationBox::Positive);
            prop_assert!((f - g).norm() < 1e-9);
        }

        #[test]
        fn weyl_sum_bounded_by_area(
            alpha in [0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0],
            x in 1i64..=4,
        ) {
            let f = weyl_sum(1, x, alpha, SummationBox::Symmetric);
            let area = SummationBox::Symmetric.area(x) as f64;
            prop_assert!(f.norm() <= area + 1e-9);
        }

        #[test]
        fn nine_phase_reduces_to_cubic_sum(
            alpha in [0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0],
            x in 1i64..=4,
        ) {
            let f = weyl_sum(1, x, alpha, SummationBox::Symmetric);
            let g = weyl_sum_nine(x, &NinePhase::cubic_only(alpha), SummationBox::Symmetric);
            prop_assert!((f - g).norm() < 1e-12);
        }

        #[test]
        fn histogram_sum_matches_direct_sum(q in 1u64..=16, a in small_vec4()) {
            let fast = complete_sum(q, a, &unlimited()).unwrap();
            let slow = complete_sum_direct(q, a);
            prop_assert!((fast - slow).norm() < 1e-8 * (q * q) as f64);
        }

        #[test]
        fn complete_sum_bounded_and_conjugate_symmetric(
            q in 1u64..=12, a in small_vec4()
        ) {
            let s = complete_sum(q, a, &unlimited()).unwrap();
            prop_assert!(s.norm() <= (q * q) as f64 + 1e-9);
            let neg = complete_sum(q, a.map(|v| -v), &unlimited()).unwrap();
            prop_assert!((s.conj() - neg).norm() < 1e-9 * (q * q) as f64);
        }

        #[test]
        fn complete_sum_invariant_under_cube_scaling(
            q in 2u64..=12, a in small_vec4(), lambda in 1u64..=11
        ) {
            prop_assume!(gcd(lambda, q) == 1);
            let l3 = (lambda * lambda * lambda) as i64;
            let scaled = a.map(|v| v.saturating_mul(l3));
            let s = complete_sum(q, a, &unlimited()).unwrap();
            let t = complete_sum(q, scaled, &unlimited()).unwrap();
            prop_assert!((s - t).norm() < 1e-9 * (q * q) as f64);
        }

        #[test]
        fn complete_sum_splits_over_coprime_moduli(
            q1 in 2u64..=9, q2 in 2u64..=9, a in small_vec4()
        ) {
            prop_assume!(gcd(q1, q2) == 1);
            let q = q1 * q2;
            let whole = complete_sum(q, a, &unlimited()).unwrap();
            // Splitting law: the cofactor modulus enters squared.
            let s1 = complete_sum(q1, a.map(|v| v * (q2 * q2) as i64), &unlimited()).unwrap();
            let s2 = complete_sum(q2, a.map(|v| v * (q1 * q1) as i64), &unlimited()).unwrap();
            let product = s1 * s2;
            prop_assert!(
                (whole - product).norm() < 1e-7 * (q * q) as f64,
                "q1={q1} q2={q2} a={a:?}: {whole} vs {product}"
            );
        }
    }
}
