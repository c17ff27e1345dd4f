//! Archimedean densities: oscillatory box integrals and the singular
//! integral they build, estimated two independent ways (smoothed Monte
//! Carlo volume and tensor-grid quadrature).

use num_complex::Complex64;
use rand_core::RngCore;
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::expsums::e;
use crate::forms::CoefficientVector;
use crate::parallel::try_sum_over_chunks;
use crate::rng;

/// 15-point Kronrod nodes on `[-1, 1]`; the odd-index nodes are the
/// embedded 7-point Gauss rule.
const NODES: [f64; 15] = [
    -0.991455371120813,
    -0.949107912342759,
    -0.864864423359769,
    -0.741531185599394,
    -0.586087235467691,
    -0.405845151377397,
    -0.207784955007898,
    0.0,
    0.207784955007898,
    0.405845151377397,
    0.586087235467691,
    0.741531185599394,
    0.864864423359769,
    0.949107912342759,
    0.991455371120813,
];

const K15_WEIGHTS: [f64; 15] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
    0.204432940075298,
    0.190350578064785,
    0.169004726639267,
    0.140653259715525,
    0.104790010322250,
    0.063092092629979,
    0.022935322010529,
];

/// Gauss weights aligned with `NODES[1], NODES[3], ..., NODES[13]`.
const G7_WEIGHTS: [f64; 7] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
    0.381830050505119,
    0.279705391489277,
    0.129484966168870,
];

/// Stopping controls for the adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSettings {
    /// Relative error target (absolute below magnitude one).
    pub tol: f64,
    /// Hard cap on integrand evaluations before giving up.
    pub max_evals: u64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            tol: 1e-8,
            max_evals: 4_000_000,
        }
    }
}

#[derive(Debug)]
struct Panel {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Tensor Gauss-Kronrod rule on one rectangle: the 15x15 Kronrod value and
/// the deviation from the embedded 7x7 Gauss value as error estimate.
fn panel_rule<F: Fn(f64, f64) -> Complex64>(f: &F, x0: f64, x1: f64, y0: f64, y1: f64) -> Panel {
    let (mx, hx) = (0.5 * (x0 + x1), 0.5 * (x1 - x0));
    let (my, hy) = (0.5 * (y0 + y1), 0.5 * (y1 - y0));
    let mut grid = [[Complex64::new(0.0, 0.0); 15]; 15];
    for (i, &ni) in NODES.iter().enumerate() {
        let x = mx + hx * ni;
        for (j, &nj) in NODES.iter().enumerate() {
            grid[i][j] = f(x, my + hy * nj);
        }
    }
    let mut k15 = Complex64::new(0.0, 0.0);
    for i in 0..15 {
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..15 {
            row += grid[i][j] * K15_WEIGHTS[j];
        }
        k15 += row * K15_WEIGHTS[i];
    }
    let mut g7 = Complex64::new(0.0, 0.0);
    for gi in 0..7 {
        let mut row = Complex64::new(0.0, 0.0);
        for gj in 0..7 {
            row += grid[2 * gi + 1][2 * gj + 1] * G7_WEIGHTS[gj];
        }
        g7 += row * G7_WEIGHTS[gi];
    }
    let scale = hx * hy;
    Panel {
        x0,
        x1,
        y0,
        y1,
        value: k15 * scale,
        error: (k15 - g7).norm() * scale.abs(),
    }
}

/// Adaptive 2-d integration over a rectangle: start from an initial grid of
/// panels, repeatedly quarter the worst one until the summed error estimate
/// meets `tol` relative to the running value.
pub fn integrate_box<F: Fn(f64, f64) -> Complex64>(
    f: F,
    x_range: (f64, f64),
    y_range: (f64, f64),
    initial: (usize, usize),
    settings: &QuadratureSettings,
) -> Result<Complex64> {
    let (nx, ny) = (initial.0.max(1), initial.1.max(1));
    if !(x_range.0 < x_range.1 && y_range.0 < y_range.1) {
        return Err(Error::InvalidInput("empty integration rectangle".into()));
    }
    let mut heap = std::collections::BinaryHeap::new();
    let mut evals: u64 = 0;
    let (wx, wy) = (
        (x_range.1 - x_range.0) / nx as f64,
        (y_range.1 - y_range.0) / ny as f64,
    );
    let mut total = Complex64::new(0.0, 0.0);
    let mut total_err = 0.0f64;
    for i in 0..nx {
        for j in 0..ny {
            let p = panel_rule(
                &f,
                x_range.0 + i as f64 * wx,
                x_range.0 + (i + 1) as f64 * wx,
                y_range.0 + j as f64 * wy,
                y_range.0 + (j + 1) as f64 * wy,
            );
            evals += 225;
            total += p.value;
            total_err += p.error;
            heap.push(p);
        }
    }
    loop {
        if total_err <= settings.tol * total.norm().max(1.0) {
            break;
        }
        if evals >= settings.max_evals {
            return Err(Error::NonConvergence(format!(
                "quadrature error {total_err:.3e} above tolerance after {evals} evaluations"
            )));
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        // A panel whose error sits at rounding level cannot be improved.
        if worst.error <= f64::EPSILON * total.norm().max(1.0) {
            heap.push(worst);
            break;
        }
        total -= worst.value;
        total_err -= worst.error;
        let (xm, ym) = (0.5 * (worst.x0 + worst.x1), 0.5 * (worst.y0 + worst.y1));
        for (a, b, c, d) in [
            (worst.x0, xm, worst.y0, ym),
            (xm, worst.x1, worst.y0, ym),
            (worst.x0, xm, ym, worst.y1),
            (xm, worst.x1, ym, worst.y1),
        ] {
            let p = panel_rule(&f, a, b, c, d);
            evals += 225;
            total += p.value;
            total_err += p.error;
            heap.push(p);
        }
    }
    // Re-sum in heap layout order to shed accumulated cancellation.
    Ok(heap.iter().map(|p| p.value).sum())
}

/// Largest phase magnitude the oscillatory integrals accept; beyond this
/// the panel counts explode and a different method is called for.
pub const PHASE_ENVELOPE: f64 = 1e3;

fn phase_dot(gamma: [f64; 4], x: f64, y: f64) -> f64 {
    gamma[0] * x * x * x + gamma[1] * x * x * y + gamma[2] * x * y * y + gamma[3] * y * y * y
}

/// Oscillatory unit-box integral
/// `u(gamma) = integral over [-1,1]^2 of e(gamma . (x^3, x^2 y, x y^2, y^3))`.
///
/// `u(0) = 4`, `u(-gamma)` is the conjugate, and `|u| <= 4` always.
pub fn u_eval(gamma: [f64; 4], settings: &QuadratureSettings) -> Result<Complex64> {
    let spread: f64 = gamma.iter().map(|g| g.abs()).sum();
    if !spread.is_finite() || gamma.iter().any(|g| g.abs() > PHASE_ENVELOPE) {
        return Err(Error::InvalidInput(format!(
            "phase vector {gamma:?} outside the {PHASE_ENVELOPE:.0e} envelope"
        )));
    }
    // More initial panels for faster oscillation.
    let n0 = ((1.0 + spread) / 6.0).ceil() as usize;
    integrate_box(
        |x, y| e(phase_dot(gamma, x, y)),
        (-1.0, 1.0),
        (-1.0, 1.0),
        (n0, n0),
        settings,
    )
}

/// Rescaled box integral `v(P; gamma) = P^2 u(P^3 gamma)`, the size-`P`
/// analogue of `u`.
pub fn v_eval(p: f64, gamma: [f64; 4], settings: &QuadratureSettings) -> Result<Complex64> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::InvalidInput("scale P must be positive".into()));
    }
    let p3 = p * p * p;
    let scaled = gamma.map(|g| g * p3);
    Ok(u_eval(scaled, settings)? * (p * p))
}

/// Direct quadrature of `v`: the same integrand over `[-P, P]^2` with no
/// rescaling. Oracle for [`v_eval`].
pub fn v_direct(p: f64, gamma: [f64; 4], settings: &QuadratureSettings) -> Result<Complex64> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::InvalidInput("scale P must be positive".into()));
    }
    let spread: f64 = gamma.iter().map(|g| g.abs() * p * p * p).sum();
    let n0 = ((1.0 + spread) / 6.0).ceil() as usize;
    integrate_box(
        |x, y| e(phase_dot(gamma, x, y)),
        (-p, p),
        (-p, p),
        (n0, n0),
        settings,
    )
}

/// A Monte Carlo density estimate with its sampling pedigree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub hits: u64,
    pub samples: u64,
    pub sigma: f64,
    pub seed: u64,
}

/// Smoothed singular-integral estimate by Monte Carlo:
/// `(2 sigma)^{-4} * vol{ (x, y) in [-1,1]^{2s} : all four weighted form
/// values lie within sigma }`.
///
/// Sample `i` draws from its own counter-based stream, so the hit count is
/// a pure function of `(seed, samples)` regardless of worker count or
/// chunking.
pub fn singular_integral_mc(
    c: &CoefficientVector,
    sigma: f64,
    samples: u64,
    seed: u64,
    budget: &Budget,
) -> Result<DensityEstimate> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidInput("sigma must be positive".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let s = c.s();
    budget.check_ops((samples as u128).saturating_mul(8 * s as u128))?;
    let coeffs: Vec<f64> = c.as_slice().iter().map(|&v| v as f64).collect();

    let hits: u64 = try_sum_over_chunks(samples, 1 << 16, |range| {
        let mut xs = vec![0.0f64; s];
        let mut local = 0u64;
        for i in range {
            let mut r = rng::stream(seed, i);
            // The first form depends on the x-block alone: draw it first
            // and reject early, which skips the y-draws almost always.
            let mut a = 0.0f64;
            for (x, &cf) in xs.iter_mut().zip(&coeffs) {
                let v = rng::unit_symmetric(r.next_u32());
                *x = v;
                a += cf * v * v * v;
            }
            if a.abs() > sigma {
                continue;
            }
            let (mut b, mut cc, mut d) = (0.0f64, 0.0f64, 0.0f64);
            for (x, &cf) in xs.iter().zip(&coeffs) {
                let y = rng::unit_symmetric(r.next_u32());
                d += cf * y * y * y;
                b += cf * x * x * y;
                cc += cf * x * y * y;
            }
            if d.abs() <= sigma && b.abs() <= sigma && cc.abs() <= sigma {
                local += 1;
            }
        }
        Ok(local)
    })?;

    let n = samples as f64;
    let p_hat = hits as f64 / n;
    let scale = 2f64.powi(2 * s as i32) / (2.0 * sigma).powi(4);
    let se = scale * (p_hat * (1.0 - p_hat) / n).sqrt();
    Ok(DensityEstimate {
        value: scale * p_hat,
        standard_error: se,
        hits,
        samples,
        sigma,
        seed,
    })
}

struct HitPair(u64, u64);

impl std::iter::Sum for HitPair {
    fn sum<I: Iterator<Item = HitPair>>(iter: I) -> Self {
        iter.fold(HitPair(0, 0), |acc, p| HitPair(acc.0 + p.0, acc.1 + p.1))
    }
}

/// Two-point slab-width consistency pass: one sweep over the sample stream
/// tallies hits at `sigma` and at `sigma / 2` simultaneously (the narrower
/// slab is a subset of the wider one). Returns the two estimates in that
/// order; the first is bit-identical to [`singular_integral_mc`] at the same
/// `(seed, samples)` because the draw order per sample index is unchanged.
pub fn singular_integral_mc_pair(
    c: &CoefficientVector,
    sigma: f64,
    samples: u64,
    seed: u64,
    budget: &Budget,
) -> Result<(DensityEstimate, DensityEstimate)> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidInput("sigma must be positive".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let s = c.s();
    budget.check_ops((samples as u128).saturating_mul(8 * s as u128))?;
    let coeffs: Vec<f64> = c.as_slice().iter().map(|&v| v as f64).collect();
    let half = sigma / 2.0;

    let HitPair(hits_full, hits_half) = try_sum_over_chunks(samples, 1 << 16, |range| {
        let mut xs = vec![0.0f64; s];
        let mut full = 0u64;
        let mut narrow = 0u64;
        for i in range {
            let mut r = rng::stream(seed, i);
            let mut a = 0.0f64;
            for (x, &cf) in xs.iter_mut().zip(&coeffs) {
                let v = rng::unit_symmetric(r.next_u32());
                *x = v;
                a += cf * v * v * v;
            }
            if a.abs() > sigma {
                continue;
            }
            let (mut b, mut cc, mut d) = (0.0f64, 0.0f64, 0.0f64);
            for (x, &cf) in xs.iter().zip(&coeffs) {
                let y = rng::unit_symmetric(r.next_u32());
                d += cf * y * y * y;
                b += cf * x * x * y;
                cc += cf * x * y * y;
            }
            let m = a.abs().max(d.abs()).max(b.abs()).max(cc.abs());
            if m <= sigma {
                full += 1;
                if m <= half {
                    narrow += 1;
                }
            }
        }
        Ok(HitPair(full, narrow))
    })?;

    let n = samples as f64;
    let finish = |hits: u64, width: f64| {
        let p_hat = hits as f64 / n;
        let scale = 2f64.powi(2 * s as i32) / (2.0 * width).powi(4);
        DensityEstimate {
            value: scale * p_hat,
            standard_error: scale * (p_hat * (1.0 - p_hat) / n).sqrt(),
            hits,
            samples,
            sigma: width,
            seed,
        }
    };
    Ok((finish(hits_full, sigma), finish(hits_half, half)))
}

/// Singular-integral estimate by tensor quadrature: midpoint rule for
/// `integral over [-R, R]^4 of prod_j u(c_j gamma) d gamma` on an
/// `m^4` grid (odd `m`, so the grid contains 0 where the integrand is
/// `4^s`).
///
/// Distinct coefficient magnitudes share `u` evaluations; negated
/// coefficients reuse them by conjugation.
pub fn singular_integral_quad(
    c: &CoefficientVector,
    r: f64,
    m: usize,
    settings: &QuadratureSettings,
    budget: &Budget,
) -> Result<f64> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::InvalidInput("grid radius R must be positive".into()));
    }
    if m < 1 || m % 2 == 0 {
        return Err(Error::InvalidInput("grid size m must be odd".into()));
    }
    let points = (m as u128).pow(4);
    budget.check_ops(points.saturating_mul(2_000))?;

    // Multiplicities of each positive scale and its negation.
    let mut scale_powers: Vec<(f64, i32, i32)> = Vec::new();
    for &ci in c.as_slice() {
        let mag = ci.unsigned_abs() as f64;
        match scale_powers.iter_mut().find(|(m0, _, _)| *m0 == mag) {
            Some(entry) => {
                if ci > 0 {
                    entry.1 += 1;
                } else {
                    entry.2 += 1;
                }
            }
            None => scale_powers.push((mag, i32::from(ci > 0), i32::from(ci < 0))),
        }
    }

    let step = 2.0 * r / m as f64;
    let n = (m as u64).pow(4);
    let total: Complex64 = try_sum_over_chunks(n, 1 << 10, |range| {
        let mut acc = Complex64::new(0.0, 0.0);
        let coord = |k: u64| -r + (k as f64 + 0.5) * step;
        for idx in range {
            let mu = m as u64;
            let gamma = [
                coord(idx % mu),
                coord(idx / mu % mu),
                coord(idx / (mu * mu) % mu),
                coord(idx / (mu * mu * mu) % mu),
            ];
            let mut prod = Complex64::new(1.0, 0.0);
            for &(mag, pos, neg) in &scale_powers {
                let u = u_eval(gamma.map(|g| g * mag), settings)?;
                prod *= u.powi(pos) * u.conj().powi(neg);
            }
            acc += prod;
        }
        Ok(acc)
    })?;
    let value = total * step.powi(4);

    let tol = 1e-6 * value.re.abs().max(1.0);
    if value.im.abs() > tol {
        return Err(Error::ImaginaryResidue {
            context: "singular integral quadrature",
            imag: value.im,
            value: value.re,
            tol,
        });
    }
    Ok(value.re)
}
