//! Asymptotic density, finite-horizon statistical-convergence checks, and
//! Korovkin test-function errors along parameter sequences `(p_n, q_n)`.
//!
//! Statistical limits are asymptotic, so every verdict here is a heuristic
//! over a finite ladder of prefix lengths.

use std::fmt;
use std::sync::Arc;

use num_traits::Float;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::moments::{moment0, moment1, moment2};
use crate::pq::{pq_integer, OperatorSpec, PQParams, StancuParams};
use crate::scalar::Scalar;

pub const DEFAULT_LADDER: &[usize] = &[100, 1_000, 10_000, 100_000];
pub const DEFAULT_DENSITY_THRESHOLD: f64 = 0.02;

type Rule<T> = Arc<dyn Fn(usize) -> (T, T) + Send + Sync>;

/// A rule `n -> (p_n, q_n)`.
#[derive(Clone)]
pub struct ParamSequence<T> {
    rule: Rule<T>,
    description: String,
}

impl<T> fmt::Debug for ParamSequence<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamSequence")
            .field("description", &self.description)
            .finish()
    }
}

impl<T: Scalar> ParamSequence<T> {
    pub fn new(
        description: impl Into<String>,
        rule: impl Fn(usize) -> (T, T) + Send + Sync + 'static,
    ) -> Self {
        ParamSequence {
            rule: Arc::new(rule),
            description: description.into(),
        }
    }

    /// `p_n = 1 - 1/(2n^2)`, `q_n = 1 - 1/n^2`. Gives `q_1 = 0`, so it lies in
    /// the admissible regime from `n = 2` on.
    pub fn default_compliant() -> Self {
        ParamSequence::new("p=1-1/(2n^2), q=1-1/n^2", |n| {
            let n2 = T::from_count(n) * T::from_count(n);
            let one = T::one();
            (
                one.clone() - one.clone() / (T::from_count(2) * n2.clone()),
                one.clone() - one / n2,
            )
        })
    }

    pub fn constant(p: T, q: T) -> Self {
        let desc = format!("p={p}, q={q}");
        ParamSequence::new(desc, move |_| (p.clone(), q.clone()))
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn at(&self, n: usize) -> (T, T) {
        (self.rule)(n)
    }

    /// Validated parameters at `n`.
    pub fn pq_at(&self, n: usize) -> Result<PQParams<T>> {
        let (p, q) = self.at(n);
        PQParams::new(p, q)
            .map_err(|e| Error::Regime(format!("{} at n = {n}: {e}", self.description)))
    }

    /// Checks `0 < q_n < p_n <= 1` (or `p_n = q_n = 1`) for every `n` in the range.
    pub fn check(&self, ns: impl IntoIterator<Item = usize>) -> Result<()> {
        ns.into_iter().try_for_each(|n| self.pq_at(n).map(|_| ()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEstimate {
    pub prefix_length: usize,
    pub count: usize,
    pub density: f64,
}

/// `|{k <= N : k in K}| / N` by counting.
pub fn density_prefix(
    membership: impl Fn(usize) -> bool,
    prefix_length: usize,
) -> Result<DensityEstimate> {
    if prefix_length == 0 {
        return Err(Error::domain("prefix length must be at least 1"));
    }
    let count = (1..=prefix_length).filter(|k| membership(*k)).count();
    Ok(DensityEstimate {
        prefix_length,
        count,
        density: count as f64 / prefix_length as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StVerdict {
    Consistent,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StLimReport {
    /// Exception-set density at each ladder point.
    pub densities: Vec<DensityEstimate>,
    pub verdict: StVerdict,
}

/// Whether `x_n -> L` statistically looks plausible: the density of
/// `{k : |x_k - L| >= epsilon}` must end below `density_threshold` and not
/// increase over the last half of the ladder.
pub fn st_lim_check<T: Scalar>(
    sequence: impl Fn(usize) -> T + Sync,
    candidate_limit: T,
    epsilon: T,
    prefix_ladder: &[usize],
    density_threshold: f64,
) -> Result<StLimReport> {
    if !(epsilon > T::zero()) {
        return Err(Error::domain(format!("epsilon {epsilon} must be positive")));
    }
    if prefix_ladder.is_empty()
        || prefix_ladder[0] == 0
        || prefix_ladder.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::domain(format!(
            "ladder {prefix_ladder:?} must be positive and increasing"
        )));
    }
    let top = *prefix_ladder.last().expect("nonempty");
    let exceptional: Vec<bool> = (1..=top)
        .into_par_iter()
        .map(|k| (sequence(k) - candidate_limit.clone()).abs() >= epsilon)
        .collect();
    let mut densities = Vec::with_capacity(prefix_ladder.len());
    let (mut count, mut seen) = (0usize, 0usize);
    for &n in prefix_ladder {
        count += exceptional[seen..n].iter().filter(|e| **e).count();
        seen = n;
        densities.push(DensityEstimate {
            prefix_length: n,
            count,
            density: count as f64 / n as f64,
        });
    }
    let tail = &densities[densities.len() / 2..];
    let settled = tail.windows(2).all(|w| w[1].density <= w[0].density);
    let small = densities.last().expect("nonempty").density < density_threshold;
    let verdict = if settled && small {
        StVerdict::Consistent
    } else {
        StVerdict::Inconsistent
    };
    Ok(StLimReport { densities, verdict })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Remark51Report<T> {
    pub n: usize,
    pub p: T,
    pub q: T,
    pub p_pow: T,
    pub q_pow: T,
    pub bracket: T,
    /// `[n]` must exceed this (`n / 4`).
    pub growth_floor: T,
    pub compliant: bool,
}

/// Finite-horizon check at `n = n_max` of `p_n, q_n, p_n^n, q_n^n -> 1` (each
/// within `epsilon`) and `[n]_{p_n,q_n} -> infinity` (above `n_max / 4`).
pub fn remark51_check<T: Scalar + Float>(
    seq: &ParamSequence<T>,
    n_max: usize,
    epsilon: T,
) -> Result<Remark51Report<T>> {
    if n_max < 10 {
        return Err(Error::domain(format!(
            "n_max = {n_max} must be at least 10"
        )));
    }
    let pq = seq.pq_at(n_max)?;
    let (p, q) = (*pq.p(), *pq.q());
    let exp = i32::try_from(n_max).map_err(|_| Error::domain("n_max too large"))?;
    let (p_pow, q_pow) = (p.powi(exp), q.powi(exp));
    let bracket = pq_integer(n_max, &pq);
    let growth_floor = T::from_count(n_max) / T::from_count(4);
    let one = T::one();
    let near = |v: T| (v - one).abs() < epsilon;
    let compliant = near(p) && near(q) && near(p_pow) && near(q_pow) && bracket > growth_floor;
    Ok(Remark51Report {
        n: n_max,
        p,
        q,
        p_pow,
        q_pow,
        bracket,
        growth_floor,
        compliant,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KorovkinRow<T> {
    pub n: usize,
    /// `sup_x |S_n(t^nu; x) - x^nu|` for `nu = 0, 1, 2`.
    pub errors: [T; 3],
}

/// Sup-errors over the grid on the test functions `1, t, t^2`, from the
/// closed-form moments, at each `n` of the ladder.
pub fn korovkin_stat_suite<T: Scalar>(
    seq: &ParamSequence<T>,
    stancu: &StancuParams<T>,
    n_ladder: &[usize],
    grid: &[T],
) -> Result<Vec<KorovkinRow<T>>> {
    if n_ladder.is_empty() || n_ladder[0] == 0 || n_ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain(format!(
            "ladder {n_ladder:?} must be positive and increasing"
        )));
    }
    n_ladder
        .par_iter()
        .map(|&n| {
            let spec = OperatorSpec::new(n, seq.pq_at(n)?, stancu.clone())?;
            let mut errors = [T::zero(), T::zero(), T::zero()];
            for x in grid {
                let e = [
                    moment0(&spec, x)? - T::one(),
                    moment1(&spec, x)? - x.clone(),
                    moment2(&spec, x)? - x.clone() * x.clone(),
                ];
                for (acc, v) in errors.iter_mut().zip(e) {
                    *acc = T::max_of(acc.clone(), v.abs());
                }
            }
            Ok(KorovkinRow { n, errors })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{apply, uniform_grid};
    use crate::scalar::Rational;
    use crate::target::TargetFn;
    use proptest::prelude::*;

    fn is_square(k: usize) -> bool {
        let r = (k as f64).sqrt() as usize;
        (r.saturating_sub(1)..=r + 1).any(|s| s * s == k)
    }

    #[test]
    fn density_examples() {
        assert_eq!(density_prefix(|k| k % 2 == 0, 1000).unwrap().density, 0.5);
        let sq = density_prefix(is_square, 10_000).unwrap();
        assert_eq!((sq.count, sq.density), (100, 0.01));
        assert_eq!(density_prefix(|_| true, 37).unwrap().density, 1.0);
        assert!(density_prefix(|_| true, 0).is_err());
    }

    #[test]
    fn st_lim_examples() {
        let v = |r: StLimReport| r.verdict;
        assert_eq!(
            v(st_lim_check(
                |n| 1.0 / n as f64,
                0.0,
                0.01,
                DEFAULT_LADDER,
                DEFAULT_DENSITY_THRESHOLD
            )
            .unwrap()),
            StVerdict::Consistent
        );
        let spiky = |n: usize| if is_square(n) { 1.0 } else { 1.0 / n as f64 };
        let rep = st_lim_check(spiky, 0.0, 0.5, DEFAULT_LADDER, DEFAULT_DENSITY_THRESHOLD).unwrap();
        assert_eq!(rep.verdict, StVerdict::Consistent);
        assert_eq!(rep.densities[3].count, 316 + 1);
        let alt = |n: usize| if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        assert_eq!(
            v(st_lim_check(alt, 0.0, 0.5, DEFAULT_LADDER, DEFAULT_DENSITY_THRESHOLD).unwrap()),
            StVerdict::Inconsistent
        );
        assert!(st_lim_check(|_| 0.0, 0.0, 0.0, DEFAULT_LADDER, 0.02).is_err());
        assert!(st_lim_check(|_| 0.0, 0.0, 0.1, &[10, 5], 0.02).is_err());
    }

    #[test]
    fn convergent_sequences_are_consistent() {
        let corpus: Vec<Box<dyn Fn(usize) -> f64 + Sync>> = vec![
            Box::new(|n| 1.0 / n as f64),
            Box::new(|n| 1.0 / (n as f64).sqrt()),
            Box::new(|n| 0.99f64.powi(n as i32)),
            Box::new(|n| (n as f64).ln() / n as f64),
            Box::new(|n| (-1.0f64).powi(n as i32) / n as f64),
        ];
        for (i, s) in corpus.iter().enumerate() {
            // 1/sqrt(n) leaves the 0.01-band only at n = 10^4, too late for
            // this ladder; 0.05 keeps every member settled within the horizon.
            let rep =
                st_lim_check(s, 0.0, 0.05, DEFAULT_LADDER, DEFAULT_DENSITY_THRESHOLD).unwrap();
            assert_eq!(rep.verdict, StVerdict::Consistent, "sequence {i}: {rep:?}");
        }
    }

    #[test]
    fn remark51_examples() {
        let rep = remark51_check(&ParamSequence::<f64>::default_compliant(), 10_000, 1e-3).unwrap();
        assert!(rep.compliant, "{rep:?}");
        let q_only = ParamSequence::new("p=1", |n: usize| (1.0, 1.0 - 1.0 / (n * n) as f64));
        assert!(remark51_check(&q_only, 10_000, 1e-3).unwrap().compliant);
        let fixed = remark51_check(&ParamSequence::constant(0.9, 0.8), 10_000, 1e-3).unwrap();
        assert!(!fixed.compliant);
        // [n]_{p,q} = (p^n - q^n)/(p - q) -> 0 for p < 1.
        assert!(fixed.bracket < 1e-300 && fixed.p_pow < 1e-300);
        assert!(remark51_check(&ParamSequence::constant(0.9, 0.8), 9, 1e-3).is_err());
    }

    #[test]
    fn default_sequence_regime() {
        let seq = ParamSequence::<f64>::default_compliant();
        assert!(seq.check(2..=1000).is_ok());
        assert!(matches!(seq.pq_at(1), Err(Error::Regime(_))));
    }

    #[test]
    fn korovkin_columns() {
        let grid: Vec<f64> = uniform_grid(101);
        let seq = ParamSequence::default_compliant();
        let rows =
            korovkin_stat_suite(&seq, &StancuParams::unshifted(), &[10, 100, 1000], &grid).unwrap();
        assert!(rows
            .iter()
            .all(|r| r.errors[0] == 0.0 && r.errors[1] < 1e-15));
        assert!(rows.windows(2).all(|w| w[1].errors[2] < w[0].errors[2]));
        assert!(rows[2].errors[2] < 1e-2);

        let shifted = StancuParams::new(1.0, 2.0).unwrap();
        let rows = korovkin_stat_suite(&seq, &shifted, &[10, 100, 1000], &grid).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].errors[1] < w[0].errors[1] && w[1].errors[2] < w[0].errors[2]);
        }
        // nu = 1 error is max_x |alpha - beta x| / D = 1/D at x = 0 and x = 1.
        let d = pq_integer(10, &seq.pq_at(10).unwrap()) + 2.0;
        assert!((rows[0].errors[1] - 1.0 / d).abs() < 1e-15);
    }

    #[test]
    fn korovkin_closed_forms_match_brute_force() {
        let grid: Vec<f64> = uniform_grid(21);
        let seq = ParamSequence::default_compliant();
        let stancu = StancuParams::new(0.5, 1.5).unwrap();
        let ladder: Vec<usize> = (2..=50).step_by(6).collect();
        let rows = korovkin_stat_suite(&seq, &stancu, &ladder, &grid).unwrap();
        for row in rows {
            let spec = OperatorSpec::new(row.n, seq.pq_at(row.n).unwrap(), stancu.clone()).unwrap();
            for nu in 1..=2 {
                let e = TargetFn::<f64>::monomial(nu);
                let brute = grid
                    .iter()
                    .map(|x| (apply(&spec, &e, x).unwrap() - x.powi(nu as i32)).abs())
                    .fold(0.0, f64::max);
                assert!(
                    (brute - row.errors[nu]).abs() < 1e-12,
                    "n={} nu={nu}",
                    row.n
                );
            }
        }
    }

    #[test]
    fn exact_suite_small_n() {
        let seq = ParamSequence::<Rational>::default_compliant();
        let grid: Vec<Rational> = uniform_grid(5);
        let rows =
            korovkin_stat_suite(&seq, &StancuParams::unshifted(), &[2, 4, 8], &grid).unwrap();
        assert!(rows
            .iter()
            .all(|r| r.errors[0] == Rational::from_ratio(0, 1)));
        assert!(rows
            .iter()
            .all(|r| r.errors[1] == Rational::from_ratio(0, 1)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn density_counts_match_bitset(n in 1usize..=1_000_000, m in 2usize..50, r in 0usize..50) {
            let r = r % m;
            let mut bits = vec![false; n + 1];
            let mut k = if r == 0 { m } else { r };
            while k <= n {
                bits[k] = true;
                k += m;
            }
            let oracle = bits.iter().filter(|b| **b).count();
            let est = density_prefix(|k| k % m == r, n).unwrap();
            prop_assert_eq!(est.count, oracle);
            prop_assert!((0.0..=1.0).contains(&est.density));
        }
    }
}
