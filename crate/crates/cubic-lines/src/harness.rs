//! Job descriptions and the single dispatch point that turns one job into a
//! deterministic [`Report`].
//!
//! A [`JobSpec`] is a plain serializable value: the command-line front end
//! parses flags into it, tests construct it directly, and the acceptance
//! suite replays the same spec under different worker counts to demonstrate
//! scheduling independence. [`run`] validates the job, executes it under a
//! [`Budget`] and an optional pinned worker count, and assembles every
//! output into a [`Report`] whose canonical bytes are a pure function of the
//! job and its numbers — wall-clock timings ride along but never enter the
//! canonical form.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arcs::{
    classify_joint_arc, classify_single_arc, cover_bound_single_arcs, kernel_k, kernel_t,
    kernel_t_direct, measure_single_arcs, shell_index, JointArc, SingleArc,
};
use crate::budget::Budget;
use crate::counting::{
    count_hua_single, count_lines_bruteforce, count_lines_mitm, count_local, count_pv,
    fit_exponent, CountRecord, HashJoinPlan,
};
use crate::error::{Error, Result};
use crate::expsums::{
    complete_sum, complete_sum_direct, local_average, local_identity_check, singular_series,
    weyl_sum, weyl_sum_nine, NinePhase, SummationBox,
};
use crate::forms::CoefficientVector;
use crate::integral::{
    singular_integral_mc, singular_integral_mc_pair, singular_integral_quad, u_eval, v_direct,
    v_eval, DensityEstimate, QuadratureSettings,
};
use crate::parallel::with_workers;
use crate::report::{IdentityCheck, NamedValue, Report};

/// Which exact line counter a counting job uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    /// Hash-join on half of the coordinate pairs.
    Mitm,
    /// Full enumeration of the box.
    Bruteforce,
}

/// Summation region selector mirroring [`SummationBox`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    Positive,
    Symmetric,
}

impl From<Region> for SummationBox {
    fn from(r: Region) -> SummationBox {
        match r {
            Region::Positive => SummationBox::Positive,
            Region::Symmetric => SummationBox::Symmetric,
        }
    }
}

/// Count family a growth-exponent fit runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountFamily {
    /// Rational lines in the box (needs coefficients).
    Lines,
    /// Translation–dilation invariant mean value (needs `s`).
    Pv,
    /// Equal sums of four cubes.
    Hua,
}

fn default_method() -> CountMethod {
    CountMethod::Mitm
}
fn default_coefficient() -> i64 {
    1
}
fn default_region() -> Region {
    Region::Positive
}
fn default_p_max() -> u64 {
    13
}
fn default_deep_h() -> u32 {
    2
}
fn default_deep_cutoff() -> u64 {
    7
}
fn default_tol() -> f64 {
    QuadratureSettings::default().tol
}
fn default_max_evals() -> u64 {
    QuadratureSettings::default().max_evals
}
fn default_sigma() -> f64 {
    0.05
}
fn default_radius() -> f64 {
    2.0
}
fn default_grid() -> usize {
    41
}
fn default_scale() -> f64 {
    2.0
}

/// One unit of work the harness knows how to run.
///
/// The `job` tag matches the command-line subcommand name; the fields mirror
/// its flags. Serialization of the job is echoed verbatim into the report,
/// so two reports are byte-identical exactly when their jobs and results
/// are.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "job", rename_all = "kebab-case", deny_unknown_fields)]
pub enum JobSpec {
    /// Exact count of rational lines `x + t y` on the diagonal cubic with
    /// coefficients `c`, both coordinate vectors in `[-X, X]^s`.
    CountLines {
        c: Vec<i64>,
        x: i64,
        #[serde(default = "default_method")]
        method: CountMethod,
    },
    /// Solution count of the degree-(1,2,3) translation–dilation invariant
    /// system with `s` variable pairs in `[1, X]^2`.
    CountPv { s: usize, x: i64 },
    /// Ordered 8-tuples in `[1, X]^8` with equal sums of four cubes.
    CountHua { x: u64 },
    /// Solutions of the four form congruences in `(Z/q)^{2s}`.
    CountLocal { q: u64, c: Vec<i64> },
    /// Truncated two-variable cubic Weyl sum at phase vector `alpha`,
    /// optionally with the full nine-phase version (betas and thetas).
    ExpSum {
        x: i64,
        alpha: [f64; 4],
        #[serde(default = "default_coefficient")]
        coefficient: i64,
        #[serde(default)]
        beta: Option<[f64; 3]>,
        #[serde(default)]
        theta: Option<[f64; 2]>,
        #[serde(default = "default_region")]
        region: Region,
    },
    /// Complete exponential sum modulo `q` at integer phase vector `a`.
    CompleteSum {
        q: u64,
        a: [i64; 4],
        /// Also evaluate the direct double sum and check agreement.
        #[serde(default)]
        direct: bool,
    },
    /// Normalized average of complete-sum products over reduced phase
    /// vectors modulo `q`.
    LocalAverage { q: u64, c: Vec<i64> },
    /// Truncated Euler product of local densities.
    SingularSeries {
        c: Vec<i64>,
        #[serde(default = "default_p_max")]
        p_max: u64,
        #[serde(default = "default_deep_h")]
        deep_h: u32,
        #[serde(default = "default_deep_cutoff")]
        deep_cutoff: u64,
    },
    /// Partial-sum identity linking local averages to congruence counts at
    /// one prime power.
    LocalIdentity { p: u64, h: u32, c: Vec<i64> },
    /// Oscillatory unit-box integral at phase vector `gamma`.
    UEval {
        gamma: [f64; 4],
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_max_evals")]
        max_evals: u64,
    },
    /// Rescaled box integral at scale `P`, optionally cross-checked against
    /// direct quadrature over `[-P, P]^2`.
    VEval {
        #[serde(default = "default_scale")]
        p: f64,
        gamma: [f64; 4],
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_max_evals")]
        max_evals: u64,
        #[serde(default)]
        direct: bool,
    },
    /// Monte Carlo estimate of the smoothed real solution density; with
    /// `richardson` the half-width estimate is computed in the same pass.
    SingularIntegralMc {
        c: Vec<i64>,
        #[serde(default = "default_sigma")]
        sigma: f64,
        samples: u64,
        seed: u64,
        #[serde(default)]
        richardson: bool,
    },
    /// Quadrature estimate of the real solution density on a phase grid.
    SingularIntegralQuad {
        c: Vec<i64>,
        #[serde(default = "default_radius")]
        radius: f64,
        #[serde(default = "default_grid")]
        grid: usize,
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_max_evals")]
        max_evals: u64,
    },
    /// Arc classification: four coordinates with `delta` for the joint
    /// major/minor verdict, four coordinates with `height` for the pruning
    /// shell, one coordinate with `height` for the one-dimensional verdict.
    ClassifyArc {
        alpha: Vec<f64>,
        #[serde(default)]
        delta: Option<f64>,
        #[serde(default)]
        height: Option<f64>,
        x: f64,
    },
    /// Exact Lebesgue measure of the one-dimensional major arcs, with the
    /// Euler-phi weighted cover bound.
    MeasureArcs { h: u64, x: u64 },
    /// Two-variable geometric kernel sum over the box `[0, X]^2`.
    KernelK { gamma1: f64, gamma2: f64, x: u64 },
    /// Triple shifted kernel sum, optionally cross-checked against the
    /// direct triple summation.
    KernelT {
        alpha: [f64; 4],
        beta: [f64; 3],
        x: u64,
        y: u64,
        #[serde(default)]
        direct: bool,
    },
    /// Least-squares growth exponent of a count family over an `X` grid.
    FitExponent {
        family: CountFamily,
        #[serde(default)]
        s: Option<usize>,
        #[serde(default)]
        c: Option<Vec<i64>>,
        grid: Vec<i64>,
    },
}

impl JobSpec {
    /// The subcommand-style name of this job.
    pub fn name(&self) -> &'static str {
        match self {
            JobSpec::CountLines { .. } => "count-lines",
            JobSpec::CountPv { .. } => "count-pv",
            JobSpec::CountHua { .. } => "count-hua",
            JobSpec::CountLocal { .. } => "count-local",
            JobSpec::ExpSum { .. } => "exp-sum",
            JobSpec::CompleteSum { .. } => "complete-sum",
            JobSpec::LocalAverage { .. } => "local-average",
            JobSpec::SingularSeries { .. } => "singular-series",
            JobSpec::LocalIdentity { .. } => "local-identity",
            JobSpec::UEval { .. } => "u-eval",
            JobSpec::VEval { .. } => "v-eval",
            JobSpec::SingularIntegralMc { .. } => "singular-integral-mc",
            JobSpec::SingularIntegralQuad { .. } => "singular-integral-quad",
            JobSpec::ClassifyArc { .. } => "classify-arc",
            JobSpec::MeasureArcs { .. } => "measure-arcs",
            JobSpec::KernelK { .. } => "kernel-k",
            JobSpec::KernelT { .. } => "kernel-t",
            JobSpec::FitExponent { .. } => "fit-exponent",
        }
    }
}

/// Runs one job to a finished report.
///
/// `workers` pins the size of the worker pool (`None` uses the global
/// default). All numeric content of the report is independent of that
/// choice; only `wall_seconds` varies.
pub fn run(job: &JobSpec, budget: &Budget, workers: Option<usize>) -> Result<Report> {
    let echo = serde_json::to_value(job)
        .map_err(|err| Error::InvalidInput(format!("job serialization failed: {err}")))?;
    let mut report = Report::new(echo);
    let start = Instant::now();
    with_workers(workers, || dispatch(job, budget, &mut report))??;
    report.wall_seconds = Some(start.elapsed().as_secs_f64());
    Ok(report)
}

fn coefficients(c: &[i64]) -> Result<CoefficientVector> {
    CoefficientVector::new(c.to_vec())
}

fn join_i64(values: &[i64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn push_complex(report: &mut Report, name: &str, z: Complex64) {
    report.values.push(NamedValue::complex(name, z.re, z.im));
    report
        .values
        .push(NamedValue::real(format!("{name}-modulus"), z.norm()));
}

fn push_density(report: &mut Report, prefix: &str, est: &DensityEstimate) {
    report
        .values
        .push(NamedValue::real(format!("{prefix}-value"), est.value));
    report.values.push(NamedValue::real(
        format!("{prefix}-standard-error"),
        est.standard_error,
    ));
    report
        .values
        .push(NamedValue::real(format!("{prefix}-hits"), est.hits as f64));
    report
        .values
        .push(NamedValue::real(format!("{prefix}-sigma"), est.sigma));
}

fn timed_count(
    report: &mut Report,
    label: &str,
    parameters: Vec<(String, String)>,
    count: impl FnOnce() -> Result<u128>,
) -> Result<u128> {
    let start = Instant::now();
    let value = count()?;
    let mut record = CountRecord::new(label, parameters, value);
    record.wall_seconds = start.elapsed().as_secs_f64();
    report.counts.push(record);
    Ok(value)
}

fn param(key: &str, value: impl ToString) -> (String, String) {
    (key.to_string(), value.to_string())
}

fn dispatch(job: &JobSpec, budget: &Budget, report: &mut Report) -> Result<()> {
    match job {
        JobSpec::CountLines { c, x, method } => {
            let cv = coefficients(c)?;
            let params = vec![
                param("s", cv.s()),
                param("c", join_i64(c)),
                param("x", x),
                param(
                    "method",
                    match method {
                        CountMethod::Mitm => "mitm",
                        CountMethod::Bruteforce => "bruteforce",
                    },
                ),
            ];
            timed_count(
                report,
                "rational lines in the box",
                params,
                || match method {
                    CountMethod::Mitm => {
                        let plan = HashJoinPlan::new(&cv, *x)?;
                        count_lines_mitm(&cv, *x, &plan, budget)
                    }
                    CountMethod::Bruteforce => count_lines_bruteforce(&cv, *x, budget),
                },
            )?;
        }
        JobSpec::CountPv { s, x } => {
            let params = vec![param("s", s), param("x", x)];
            timed_count(
                report,
                "translation-dilation invariant mean value",
                params,
                || count_pv(*s, *x, budget),
            )?;
        }
        JobSpec::CountHua { x } => {
            let params = vec![param("x", x)];
            timed_count(report, "equal sums of four cubes", params, || {
                count_hua_single(*x, budget)
            })?;
        }
        JobSpec::CountLocal { q, c } => {
            let cv = coefficients(c)?;
            let params = vec![param("q", q), param("s", cv.s()), param("c", join_i64(c))];
            timed_count(report, "form congruence solutions", params, || {
                count_local(*q, &cv, budget)
            })?;
        }
        JobSpec::ExpSum {
            x,
            alpha,
            coefficient,
            beta,
            theta,
            region,
        } => {
            let region = SummationBox::from(*region);
            let value = if beta.is_some() || theta.is_some() {
                if *coefficient != 1 {
                    return Err(Error::InvalidInput(
                        "the nine-phase sum takes no scalar coefficient; fold it into the phases"
                            .into(),
                    ));
                }
                let phase = NinePhase {
                    theta: theta.unwrap_or([0.0; 2]),
                    beta: beta.unwrap_or([0.0; 3]),
                    alpha: *alpha,
                };
                weyl_sum_nine(*x, &phase, region)
            } else {
                weyl_sum(*coefficient, *x, *alpha, region)
            };
            push_complex(report, "weyl-sum", value);
            report
                .values
                .push(NamedValue::real("points", region.area(*x) as f64));
        }
        JobSpec::CompleteSum { q, a, direct } => {
            let value = complete_sum(*q, *a, budget)?;
            push_complex(report, "complete-sum", value);
            if *direct {
                let reference = complete_sum_direct(*q, *a);
                push_complex(report, "complete-sum-direct", reference);
                let scale = (*q as f64) * (*q as f64);
                report.checks.push(IdentityCheck::new(
                    format!("multi-axis transform equals the direct double sum at q={q}"),
                    (value - reference).norm(),
                    0.0,
                    1e-8 * scale.max(1.0),
                ));
            }
        }
        JobSpec::LocalAverage { q, c } => {
            let cv = coefficients(c)?;
            let value = local_average(*q, &cv, budget)?;
            report.values.push(NamedValue::real("local-average", value));
        }
        JobSpec::SingularSeries {
            c,
            p_max,
            deep_h,
            deep_cutoff,
        } => {
            let cv = coefficients(c)?;
            let estimate = singular_series(&cv, *p_max, *deep_h, *deep_cutoff, budget)?;
            report
                .values
                .push(NamedValue::real("singular-series", estimate.value));
            report
                .values
                .push(NamedValue::real("last-factor-shift", estimate.stability));
            for factor in &estimate.factors {
                report.values.push(NamedValue::real(
                    format!("euler-factor-p{}", factor.p),
                    factor.factor,
                ));
            }
        }
        JobSpec::LocalIdentity { p, h, c } => {
            let cv = coefficients(c)?;
            let check = local_identity_check(*p, *h, &cv, budget)?;
            report
                .values
                .push(NamedValue::real("partial-sum", check.lhs));
            report
                .values
                .push(NamedValue::real("scaled-congruence-count", check.rhs));
            report.checks.push(check);
        }
        JobSpec::UEval {
            gamma,
            tol,
            max_evals,
        } => {
            let settings = QuadratureSettings {
                tol: *tol,
                max_evals: *max_evals,
            };
            let value = u_eval(*gamma, &settings)?;
            push_complex(report, "unit-box-integral", value);
        }
        JobSpec::VEval {
            p,
            gamma,
            tol,
            max_evals,
            direct,
        } => {
            let settings = QuadratureSettings {
                tol: *tol,
                max_evals: *max_evals,
            };
            let value = v_eval(*p, *gamma, &settings)?;
            push_complex(report, "scaled-box-integral", value);
            if *direct {
                let reference = v_direct(*p, *gamma, &settings)?;
                push_complex(report, "scaled-box-integral-direct", reference);
                report.checks.push(IdentityCheck::new(
                    format!("P^2-rescaled unit-box integral equals direct quadrature at P={p}"),
                    (value - reference).norm(),
                    0.0,
                    1e-6,
                ));
            }
        }
        JobSpec::SingularIntegralMc {
            c,
            sigma,
            samples,
            seed,
            richardson,
        } => {
            let cv = coefficients(c)?;
            if *richardson {
                let (full, half) = singular_integral_mc_pair(&cv, *sigma, *samples, *seed, budget)?;
                push_density(report, "density", &full);
                push_density(report, "density-half-width", &half);
                let scale = full.value.abs().max(half.value.abs());
                report.values.push(NamedValue::real(
                    "slab-width-relative-change",
                    if scale > 0.0 {
                        (full.value - half.value).abs() / scale
                    } else {
                        0.0
                    },
                ));
            } else {
                let estimate = singular_integral_mc(&cv, *sigma, *samples, *seed, budget)?;
                push_density(report, "density", &estimate);
            }
        }
        JobSpec::SingularIntegralQuad {
            c,
            radius,
            grid,
            tol,
            max_evals,
        } => {
            let cv = coefficients(c)?;
            let settings = QuadratureSettings {
                tol: *tol,
                max_evals: *max_evals,
            };
            let value = singular_integral_quad(&cv, *radius, *grid, &settings, budget)?;
            report
                .values
                .push(NamedValue::real("density-quadrature", value));
            report
                .values
                .push(NamedValue::real("phase-grid-radius", *radius));
            report
                .values
                .push(NamedValue::real("phase-grid-size", *grid as f64));
        }
        JobSpec::ClassifyArc {
            alpha,
            delta,
            height,
            x,
        } => classify_arc_job(report, alpha, *delta, *height, *x, budget)?,
        JobSpec::MeasureArcs { h, x } => {
            let measure = measure_single_arcs(*h, *x, budget)?;
            let bound = cover_bound_single_arcs(*h, *x)?;
            report
                .values
                .push(NamedValue::real("arc-measure", measure.value()));
            report
                .values
                .push(NamedValue::real("cover-bound", bound.value()));
            report.values.push(NamedValue::real(
                "measure-within-cover-bound",
                if measure.as_ratio() <= bound.as_ratio() {
                    1.0
                } else {
                    0.0
                },
            ));
        }
        JobSpec::KernelK { gamma1, gamma2, x } => {
            let value = kernel_k(*gamma1, *gamma2, *x)?;
            push_complex(report, "kernel-k", value);
        }
        JobSpec::KernelT {
            alpha,
            beta,
            x,
            y,
            direct,
        } => {
            let value = kernel_t(alpha, beta, *x, *y, budget)?;
            report.values.push(NamedValue::real("kernel-t", value));
            if *direct {
                let reference = kernel_t_direct(alpha, beta, *x, *y);
                report
                    .values
                    .push(NamedValue::real("kernel-t-direct", reference));
                let scale = (*x as f64).powi(2) * (2.0 * *y as f64 + 1.0).powi(3);
                report.checks.push(IdentityCheck::new(
                    format!("row-factorized triple kernel equals direct summation at X={x}, Y={y}"),
                    value,
                    reference,
                    1e-9 * scale.max(1.0),
                ));
            }
        }
        JobSpec::FitExponent { family, s, c, grid } => {
            fit_exponent_job(report, *family, *s, c.as_deref(), grid, budget)?;
        }
    }
    Ok(())
}

fn classify_arc_job(
    report: &mut Report,
    alpha: &[f64],
    delta: Option<f64>,
    height: Option<f64>,
    x: f64,
    budget: &Budget,
) -> Result<()> {
    match (alpha.len(), delta, height) {
        (4, maybe_delta, maybe_height) if maybe_delta.is_some() || maybe_height.is_some() => {
            let coords = [alpha[0], alpha[1], alpha[2], alpha[3]];
            if let Some(delta) = maybe_delta {
                match classify_joint_arc(coords, delta, x, budget)? {
                    JointArc::Major {
                        witness,
                        sup_distance,
                    } => {
                        report.values.push(NamedValue::real("joint-major", 1.0));
                        report
                            .values
                            .push(NamedValue::real("witness-q", witness.q as f64));
                        for (i, a) in witness.a.iter().enumerate() {
                            report
                                .values
                                .push(NamedValue::real(format!("witness-a{}", i + 1), *a as f64));
                        }
                        report
                            .values
                            .push(NamedValue::real("sup-distance", sup_distance));
                    }
                    JointArc::Minor => {
                        report.values.push(NamedValue::real("joint-major", 0.0));
                    }
                }
            }
            if let Some(h) = maybe_height {
                let shell = shell_index(&coords, h, x)?;
                report.values.push(NamedValue::real(
                    "pruning-shell",
                    shell.map_or(-1.0, |l| l as f64),
                ));
                for (i, &coordinate) in coords.iter().enumerate() {
                    let verdict = classify_single_arc(coordinate, h, x)?;
                    report.values.push(NamedValue::real(
                        format!("coordinate-{}-major", i + 1),
                        if verdict.is_major() { 1.0 } else { 0.0 },
                    ));
                }
            }
            Ok(())
        }
        (1, None, Some(h)) => {
            match classify_single_arc(alpha[0], h, x)? {
                SingleArc::Major(witness) => {
                    report.values.push(NamedValue::real("single-major", 1.0));
                    report
                        .values
                        .push(NamedValue::real("witness-q", witness.q as f64));
                    report
                        .values
                        .push(NamedValue::real("witness-a", witness.a as f64));
                    report
                        .values
                        .push(NamedValue::real("distance", witness.distance));
                }
                SingleArc::Minor => {
                    report.values.push(NamedValue::real("single-major", 0.0));
                }
            }
            Ok(())
        }
        _ => Err(Error::InvalidInput(
            "classify-arc needs four coordinates with --delta (joint verdict) and/or --height \
             (pruning shell), or exactly one coordinate with --height"
                .into(),
        )),
    }
}

fn fit_exponent_job(
    report: &mut Report,
    family: CountFamily,
    s: Option<usize>,
    c: Option<&[i64]>,
    grid: &[i64],
    budget: &Budget,
) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("the X grid must be non-empty".into()));
    }
    let mut points = Vec::with_capacity(grid.len());
    for &x in grid {
        let count = match family {
            CountFamily::Lines => {
                let c = c.ok_or_else(|| {
                    Error::InvalidInput("fitting the line count needs coefficients".into())
                })?;
                let cv = coefficients(c)?;
                let params = vec![param("c", join_i64(c)), param("x", x)];
                timed_count(report, "rational lines in the box", params, || {
                    let plan = HashJoinPlan::new(&cv, x)?;
                    count_lines_mitm(&cv, x, &plan, budget)
                })?
            }
            CountFamily::Pv => {
                let s = s.ok_or_else(|| {
                    Error::InvalidInput("fitting the mean value needs the pair count s".into())
                })?;
                let params = vec![param("s", s), param("x", x)];
                timed_count(
                    report,
                    "translation-dilation invariant mean value",
                    params,
                    || count_pv(s, x, budget),
                )?
            }
            CountFamily::Hua => {
                if x < 1 {
                    return Err(Error::InvalidInput("the X grid must be positive".into()));
                }
                let params = vec![param("x", x)];
                timed_count(report, "equal sums of four cubes", params, || {
                    count_hua_single(x as u64, budget)
                })?
            }
        };
        points.push((x as f64, count));
    }
    let fit = fit_exponent(&points)?;
    report
        .values
        .push(NamedValue::real("log-log-slope", fit.slope));
    report
        .values
        .push(NamedValue::real("log-log-intercept", fit.intercept));
    Ok(())
}
