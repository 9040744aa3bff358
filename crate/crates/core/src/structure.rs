//! Order properties for convex targets: `S_n f >= f` and monotonic decrease
//! in `n`.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::moments::moment1;
use crate::operator::{apply, apply_on_grid};
use crate::pq::{pq_integer, OperatorSpec};
use crate::scalar::{check_unit_interval, Scalar};
use crate::target::{Convexity, TargetFn};

/// Endpoint values of consecutive operators, kept for inspection only: with
/// a Stancu shift the end nodes move with `n`, so equality is not expected.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointRecord<T> {
    pub n: usize,
    /// `(S_{n-1}(f;0), S_n(f;0))`.
    pub at_zero: (T, T),
    /// `(S_{n-1}(f;1), S_n(f;1))`.
    pub at_one: (T, T),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport<T> {
    pub n_range: RangeInclusive<usize>,
    pub grid: Vec<T>,
    /// Min over grid (and `n`) of `S_n(f;x) - f(x)`.
    pub min_gap_lower: T,
    /// Min over grid and `n` of `S_{n-1}(f;x) - S_n(f;x)`; `None` for a
    /// single-degree report.
    pub min_gap_succ: Option<T>,
    /// `(n, x, gap)` with `gap < -tolerance`, for the asserted property only.
    pub violations: Vec<(usize, T, T)>,
    /// Whether the report's property is a theorem for these parameters.
    /// Unasserted reports carry no violations.
    pub asserted: bool,
    /// Min over grid of `S_n(f;x) - f(S_n(t;x))`, the Jensen bound that does
    /// hold with a Stancu shift. Lower-bound reports only.
    pub min_gap_shifted: Option<T>,
    pub endpoints: Vec<EndpointRecord<T>>,
}

impl<T> MonotonicityReport<T> {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertMethod {
    Declared,
    SecondDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Convex,
    NotConvex,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct ConvexityCertificate<T> {
    pub f: TargetFn<T>,
    pub method: CertMethod,
    pub step: T,
    pub verdict: Verdict,
    /// Smallest second difference seen by the scan.
    pub min_second_difference: Option<T>,
}

/// Second-difference scan at `samples` points spread over `[step, 1-step]`.
/// Declared-convex functions are accepted without a scan.
pub fn certify_convex<T: Scalar>(
    f: &TargetFn<T>,
    samples: usize,
    step: T,
    tolerance: T,
) -> Result<ConvexityCertificate<T>> {
    if f.convexity() == Convexity::Convex {
        return Ok(ConvexityCertificate {
            f: f.clone(),
            method: CertMethod::Declared,
            step,
            verdict: Verdict::Convex,
            min_second_difference: None,
        });
    }
    let two = T::from_count(2);
    if samples < 3 || !(step > T::zero()) || two.clone() * step.clone() >= T::one() {
        return Err(Error::domain(format!(
            "need samples >= 3 and 0 < step < 1/2, got {samples} and {step}"
        )));
    }
    let span = T::one() - two.clone() * step.clone();
    let mut min_d2: Option<T> = None;
    let mut finite = true;
    for i in 0..samples {
        let x = step.clone() + span.clone() * T::from_count(i) / T::from_count(samples - 1);
        let d2 = f.eval(&(x.clone() - step.clone())) - two.clone() * f.eval(&x)
            + f.eval(&(x + step.clone()));
        // Only floats can produce NaN.
        if d2.partial_cmp(&d2).is_none() {
            finite = false;
            continue;
        }
        min_d2 = Some(match min_d2 {
            Some(m) if m <= d2 => m,
            _ => d2,
        });
    }
    let verdict = match &min_d2 {
        Some(m) if *m < -tolerance.clone() => Verdict::NotConvex,
        Some(_) if finite => Verdict::Convex,
        _ => Verdict::Inconclusive,
    };
    Ok(ConvexityCertificate {
        f: f.clone(),
        method: CertMethod::SecondDifference,
        step,
        verdict,
        min_second_difference: min_d2,
    })
}

fn require_convex<T: Scalar>(f: &TargetFn<T>) -> Result<()> {
    let cert = certify_convex(f, 257, T::from_ratio(1, 512), T::zero())?;
    match cert.verdict {
        Verdict::Convex => Ok(()),
        Verdict::NotConvex => Err(Error::contract(format!(
            "'{}' is not convex (second difference {} at step 1/512)",
            f.name(),
            cert.min_second_difference.expect("scan ran")
        ))),
        Verdict::Inconclusive => Err(Error::contract(format!(
            "convexity of '{}' could not be certified",
            f.name()
        ))),
    }
}

fn check_grid<T: Scalar>(grid: &[T]) -> Result<()> {
    grid.iter()
        .try_for_each(|x| check_unit_interval(x, "grid point"))
}

fn min_of<T: Scalar>(acc: Option<T>, v: T) -> Option<T> {
    Some(match acc {
        Some(a) if a <= v => a,
        _ => v,
    })
}

/// `S_n(f;x) >= f(x)` over the grid. Asserted (violations collected) only for
/// `alpha = beta = 0`; otherwise the gap and the shifted Jensen gap are
/// recorded.
pub fn check_lower_bound<T: Scalar>(
    spec: &OperatorSpec<T>,
    f: &TargetFn<T>,
    grid: &[T],
    tolerance: T,
) -> Result<MonotonicityReport<T>> {
    require_convex(f)?;
    check_grid(grid)?;
    let asserted = spec.stancu().is_unshifted();
    let values = apply_on_grid(spec, f, grid)?;
    let (mut min_gap, mut min_shifted) = (None, None);
    let mut violations = Vec::new();
    for (x, s) in grid.iter().zip(values) {
        let gap = s.clone() - f.eval(x);
        if asserted && gap < -tolerance.clone() {
            violations.push((spec.n(), x.clone(), gap.clone()));
        }
        min_gap = min_of(min_gap, gap);
        min_shifted = min_of(min_shifted, s - f.eval(&moment1(spec, x)?));
    }
    let n = spec.n();
    Ok(MonotonicityReport {
        n_range: n..=n,
        grid: grid.to_vec(),
        min_gap_lower: min_gap.unwrap_or_else(T::zero),
        min_gap_succ: None,
        violations,
        asserted,
        min_gap_shifted: min_shifted,
        endpoints: Vec::new(),
    })
}

/// `S_{n-1}(f;x) >= S_n(f;x)` for every `n` in `n_range`, using the `p, q,
/// alpha, beta` of `base` (its own degree is ignored).
pub fn check_monotone_in_n<T: Scalar>(
    base: &OperatorSpec<T>,
    n_range: RangeInclusive<usize>,
    f: &TargetFn<T>,
    grid: &[T],
    tolerance: T,
) -> Result<MonotonicityReport<T>> {
    if *n_range.start() < 2 || n_range.is_empty() {
        return Err(Error::domain(format!(
            "degree range {n_range:?} must be nonempty and start at 2 or more"
        )));
    }
    require_convex(f)?;
    check_grid(grid)?;
    let (zero, one) = (T::zero(), T::one());
    let mut prev_spec = base.with_degree(n_range.start() - 1)?;
    let mut prev = apply_on_grid(&prev_spec, f, grid)?;
    let mut min_lower = None;
    for (x, s) in grid.iter().zip(&prev) {
        min_lower = min_of(min_lower, s.clone() - f.eval(x));
    }
    let (mut min_succ, mut violations, mut endpoints) = (None, Vec::new(), Vec::new());
    for n in n_range.clone() {
        let spec = base.with_degree(n)?;
        let cur = apply_on_grid(&spec, f, grid)?;
        for ((x, a), b) in grid.iter().zip(&prev).zip(&cur) {
            let gap = a.clone() - b.clone();
            if gap < -tolerance.clone() {
                violations.push((n, x.clone(), gap.clone()));
            }
            min_succ = min_of(min_succ, gap);
            min_lower = min_of(min_lower, b.clone() - f.eval(x));
        }
        endpoints.push(EndpointRecord {
            n,
            at_zero: (apply(&prev_spec, f, &zero)?, apply(&spec, f, &zero)?),
            at_one: (apply(&prev_spec, f, &one)?, apply(&spec, f, &one)?),
        });
        prev = cur;
        prev_spec = spec;
    }
    Ok(MonotonicityReport {
        n_range,
        grid: grid.to_vec(),
        min_gap_lower: min_lower.unwrap_or_else(T::zero),
        min_gap_succ: min_succ,
        violations,
        asserted: true,
        min_gap_shifted: None,
        endpoints,
    })
}

/// Convexity gaps `a_k = lambda f(t0) + (1-lambda) f(t1) - f(lambda t0 + (1-lambda) t1)`,
/// `k = 1..n-1`, with `t0 = (p^{n-k}[k] + alpha)/D`, `t1 = (p^{n-k-1}[k] + alpha)/D`,
/// `D = [n] + beta` and `lambda = q^{n-k} [k]/[n]`. Nonnegative for convex `f`.
pub fn theorem52_coefficients<T: Scalar>(
    spec: &OperatorSpec<T>,
    f: &TargetFn<T>,
) -> Result<Vec<T>> {
    let n = spec.n();
    if n < 2 {
        return Err(Error::domain(format!(
            "the coefficients need n >= 2, got {n}"
        )));
    }
    let pq = spec.pq();
    let (p, q) = (pq.p(), pq.q());
    let bracket_n = pq_integer(n, pq);
    let d = spec.denominator();
    let alpha = spec.alpha();
    Ok((1..n)
        .map(|k| {
            let bk = pq_integer(k, pq);
            let t0 = (p.powu(n - k) * bk.clone() + alpha.clone()) / d.clone();
            let t1 = (p.powu(n - k - 1) * bk.clone() + alpha.clone()) / d.clone();
            let lambda = q.powu(n - k) * bk / bracket_n.clone();
            let rest = T::one() - lambda.clone();
            let mid = lambda.clone() * t0.clone() + rest.clone() * t1.clone();
            lambda * f.eval(&t0) + rest * f.eval(&t1) - f.eval(&mid)
        })
        .collect())
}

/// `psi_k(x) = p^{k(k-1)/2} x^k prod_{s=n-k-1}^{n-1} (p^s - q^s x)^{-1}` for
/// `0 <= k <= n-1`, with `n` the degree of `spec`. Undefined where a factor
/// vanishes (`x = 1` with `p = q` or `k = n-1`).
pub fn psi_k<T: Scalar>(spec: &OperatorSpec<T>, k: usize, x: &T) -> Result<T> {
    check_unit_interval(x, "x")?;
    let n = spec.n();
    if k >= n {
        return Err(Error::domain(format!(
            "psi index {k} must be below n = {n}"
        )));
    }
    let pq = spec.pq();
    let (p, q) = (pq.p(), pq.q());
    let mut denom = T::one();
    for s in (n - k - 1)..n {
        // p^s - q^s x, written as a sum of nonnegative terms.
        let factor = p.powu(s) * (T::one() - x.clone())
            + x.clone() * (p.clone() - q.clone()) * pq_integer(s, pq);
        if factor.is_zero() {
            return Err(Error::domain(format!("psi_{k} has a pole at x = {x}")));
        }
        denom = denom * factor;
    }
    Ok(p.powu(k * (k.max(1) - 1) / 2) * x.powu(k) / denom)
}
