//! Evaluation of the (p,q)-Bernstein-Stancu operator
//!
//! ```text
//! S_{n,p,q}(f; x) = sum_k lambda_k(x) f(t_k),
//! lambda_k(x) = [n choose k]_{p,q} p^{(k(k-1) - n(n-1))/2} x^k prod_{s<n-k} (p^s - q^s x),
//! t_k = (p^{n-k} [k]_{p,q} + alpha) / ([n]_{p,q} + beta).
//! ```
//!
//! Writing `r = q/p`, every power of `p` in `lambda_k` cancels and
//! `lambda_k = [n choose k]_r x^k prod_{s<n-k} (1 - r^s x)`. The main path
//! evaluates that product with the binomial ratios `[n-k+j]_r / [j]_r >= 1`
//! interleaved with the factors `x <= 1` and `1 - r^s x <= 1`, which keeps
//! intermediates in range well past n = 500. [`basis_weights_log`] sums the
//! logarithms of the same factors instead, and [`direct`] evaluates the
//! formula literally for use as an exact oracle.

use num_traits::Float;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pq::{pq_binomial, pq_integer, pq_power_product, t_integers, OperatorSpec};
use crate::scalar::{check_unit_interval, Mode, Scalar};
use crate::target::TargetFn;

#[derive(Debug, Clone, PartialEq)]
pub struct BasisWeights<T> {
    pub n: usize,
    pub x: T,
    pub weights: Vec<T>,
}

impl<T: Scalar> BasisWeights<T> {
    pub fn sum(&self) -> T {
        self.weights.iter().cloned().fold(T::zero(), |a, b| a + b)
    }

    /// `sum_k lambda_k g_k`.
    pub fn dot(&self, values: &[T]) -> T {
        debug_assert_eq!(values.len(), self.weights.len());
        self.weights
            .iter()
            .zip(values)
            .fold(T::zero(), |acc, (w, v)| acc + w.clone() * v.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector<T> {
    pub n: usize,
    pub nodes: Vec<T>,
}

/// The `n + 1` basis weights at `x`.
// The interleaved loop indexes both factor lists with one counter.
#[allow(clippy::needless_range_loop)]
pub fn basis_weights<T: Scalar>(spec: &OperatorSpec<T>, x: &T) -> Result<BasisWeights<T>> {
    check_unit_interval(x, "x")?;
    let n = spec.n();
    let r = spec.pq().ratio();
    let ints = t_integers(n, &r);
    let tails = one_minus_powers(n, spec, x);
    if T::MODE == Mode::Rational {
        return Ok(BasisWeights {
            n,
            x: x.clone(),
            weights: exact_weights(n, &ints, &tails, x),
        });
    }

    let weights = (0..=n)
        .map(|k| {
            let mut w = T::one();
            for i in 0..k.max(n - k) {
                if i < k {
                    let j = i + 1;
                    w = w * ints[n - k + j].clone() / ints[j].clone() * x.clone();
                }
                if i < n - k {
                    w = w * tails[i].clone();
                }
            }
            w
        })
        .collect();
    Ok(BasisWeights {
        n,
        x: x.clone(),
        weights,
    })
}

/// Exact arithmetic has no range to protect, so the binomials, powers of `x`
/// and tail products are built by recurrences: `O(n)` operations per point
/// instead of the `O(n^2)` interleaved products.
fn exact_weights<T: Scalar>(n: usize, ints: &[T], tails: &[T], x: &T) -> Vec<T> {
    let mut tail_products = Vec::with_capacity(n + 1);
    tail_products.push(T::one());
    for t in tails {
        let next = tail_products.last().expect("nonempty").clone() * t.clone();
        tail_products.push(next);
    }
    let mut weights = Vec::with_capacity(n + 1);
    let (mut binom, mut x_pow) = (T::one(), T::one());
    for k in 0..=n {
        if k > 0 {
            binom = binom * ints[n - k + 1].clone() / ints[k].clone();
            x_pow = x_pow * x.clone();
        }
        weights.push(binom.clone() * x_pow.clone() * tail_products[n - k].clone());
    }
    weights
}

/// Same weights, accumulated as a sum of logarithms and exponentiated once.
pub fn basis_weights_log<T: Scalar + Float>(
    spec: &OperatorSpec<T>,
    x: &T,
) -> Result<BasisWeights<T>> {
    check_unit_interval(x, "x")?;
    let n = spec.n();
    let r = spec.pq().ratio();
    let log_ints: Vec<T> = t_integers(n, &r).into_iter().map(Float::ln).collect();
    let log_tails: Vec<T> = one_minus_powers(n, spec, x)
        .into_iter()
        .map(Float::ln)
        .collect();
    let log_x = Float::ln(*x);

    let weights = (0..=n)
        .map(|k| {
            let mut acc = T::zero();
            for j in 1..=k {
                acc = acc + log_ints[n - k + j] - log_ints[j];
            }
            if k > 0 {
                acc = acc + T::from_count(k) * log_x;
            }
            for t in &log_tails[..n - k] {
                acc = acc + *t;
            }
            Float::exp(acc)
        })
        .collect();
    Ok(BasisWeights { n, x: *x, weights })
}

/// `1 - r^s x` for `s = 0..n`, written as `(1 - x) + x (1 - r) [s]_r` so
/// that every term is nonnegative.
fn one_minus_powers<T: Scalar>(n: usize, spec: &OperatorSpec<T>, x: &T) -> Vec<T> {
    let pq = spec.pq();
    let r = pq.ratio();
    let one_minus_r = (pq.p().clone() - pq.q().clone()) / pq.p().clone();
    let complement = T::one() - x.clone();
    let mut out = Vec::with_capacity(n);
    let mut bracket = T::zero();
    for _ in 0..n {
        out.push(complement.clone() + x.clone() * one_minus_r.clone() * bracket.clone());
        bracket = T::one() + r.clone() * bracket;
    }
    out
}

/// The evaluation nodes `t_0 < t_1 < ... < t_n` in `[0,1]`.
pub fn knots<T: Scalar>(spec: &OperatorSpec<T>) -> KnotVector<T> {
    // p^{n-k} [k]_{p,q} = p^{n-1} [k]_r, so both numerator and denominator
    // share the factor p^{n-1}.
    let n = spec.n();
    let r = spec.pq().ratio();
    let ints = t_integers(n, &r);
    let nodes = if spec.stancu().is_unshifted() {
        (0..=n).map(|k| ints[k].clone() / ints[n].clone()).collect()
    } else {
        let scale = spec.pq().p().powu(n - 1);
        let denom = scale.clone() * ints[n].clone() + spec.beta().clone();
        (0..=n)
            .map(|k| (scale.clone() * ints[k].clone() + spec.alpha().clone()) / denom.clone())
            .collect::<Vec<_>>()
    };
    // Strictly increasing in exact arithmetic; in float mode neighbouring
    // nodes can round together once p^{n-1}[k] is negligible next to alpha.
    let ordered = match T::MODE {
        Mode::Rational => nodes.windows(2).all(|w| w[0] < w[1]),
        Mode::Float => nodes.windows(2).all(|w| w[0] <= w[1]),
    };
    assert!(ordered, "knots out of order for {spec:?}");
    KnotVector { n, nodes }
}

/// `S_{n,p,q}(f; x)`.
pub fn apply<T: Scalar>(spec: &OperatorSpec<T>, f: &TargetFn<T>, x: &T) -> Result<T> {
    let weights = basis_weights(spec, x)?;
    let values: Vec<T> = knots(spec).nodes.iter().map(|t| f.eval(t)).collect();
    Ok(weights.dot(&values))
}

/// [`apply`] through the log-domain weights.
pub fn apply_log<T: Scalar + Float>(spec: &OperatorSpec<T>, f: &TargetFn<T>, x: &T) -> Result<T> {
    let weights = basis_weights_log(spec, x)?;
    let values: Vec<T> = knots(spec).nodes.iter().map(|t| f.eval(t)).collect();
    Ok(weights.dot(&values))
}

/// Pointwise [`apply`] over a grid, evaluated in parallel.
pub fn apply_on_grid<T: Scalar>(
    spec: &OperatorSpec<T>,
    f: &TargetFn<T>,
    grid: &[T],
) -> Result<Vec<T>> {
    if let Some(bad) = grid.iter().find(|x| **x < T::zero() || **x > T::one()) {
        return Err(Error::Domain(format!("grid point {bad} is outside [0,1]")));
    }
    let values: Vec<T> = knots(spec).nodes.iter().map(|t| f.eval(t)).collect();
    grid.par_iter()
        .map(|x| Ok(basis_weights(spec, x)?.dot(&values)))
        .collect()
}

/// `max_x |S_n(f;x) - f(x)|` over the grid.
pub fn sup_error<T: Scalar>(spec: &OperatorSpec<T>, f: &TargetFn<T>, grid: &[T]) -> Result<T> {
    let values = apply_on_grid(spec, f, grid)?;
    Ok(grid.iter().zip(values).fold(T::zero(), |acc, (x, s)| {
        T::max_of(acc, (s - f.eval(x)).abs())
    }))
}

/// `points` equally spaced points `0, 1/(points-1), ..., 1`.
pub fn uniform_grid<T: Scalar>(points: usize) -> Vec<T> {
    assert!(points >= 2, "a grid needs at least two points");
    let m = (points - 1) as i64;
    (0..=m).map(|i| T::from_ratio(i, m)).collect()
}

/// Literal evaluation of the defining formulas, with the explicit
/// `p^{-n(n-1)/2}` prefactor and factorial-formula binomials. Exact in
/// rational mode; overflows in float mode for moderate `n`. Used as the
/// reference the fast paths are checked against.
pub mod direct {
    use super::*;

    /// `lambda_k` straight from the operator definition.
    pub fn basis_weights<T: Scalar>(spec: &OperatorSpec<T>, x: &T) -> Result<Vec<T>> {
        check_unit_interval(x, "x")?;
        let n = spec.n();
        let pq = spec.pq();
        let prefactor = pq.p().powu(n * (n - 1) / 2);
        (0..=n)
            .map(|k| {
                Ok(pq_binomial(n, k, pq)?
                    * pq.p().powu(k * k.saturating_sub(1) / 2)
                    * x.powu(k)
                    * pq_power_product(n - k, x, pq)
                    / prefactor.clone())
            })
            .collect()
    }

    /// Stancu nodes `(p^{n-k}[k] + alpha)/([n] + beta)`.
    pub fn knots<T: Scalar>(spec: &OperatorSpec<T>) -> Vec<T> {
        let n = spec.n();
        let pq = spec.pq();
        let denom = pq_integer(n, pq) + spec.beta().clone();
        (0..=n)
            .map(|k| {
                (pq.p().powu(n - k) * pq_integer(k, pq) + spec.alpha().clone()) / denom.clone()
            })
            .collect()
    }

    pub fn apply<T: Scalar>(spec: &OperatorSpec<T>, f: &TargetFn<T>, x: &T) -> Result<T> {
        let weights = basis_weights(spec, x)?;
        Ok(weights
            .into_iter()
            .zip(knots(spec))
            .fold(T::zero(), |acc, (w, t)| acc + w * f.eval(&t)))
    }

    /// The unshifted (p,q)-Bernstein operator, with its nodes written as
    /// `[k] / (p^{k-n} [n])`.
    pub fn bernstein_apply<T: Scalar>(spec: &OperatorSpec<T>, f: &TargetFn<T>, x: &T) -> Result<T> {
        let n = spec.n();
        let pq = spec.pq();
        let weights = basis_weights(spec, x)?;
        let bracket_n = pq_integer(n, pq);
        Ok(weights
            .into_iter()
            .enumerate()
            .fold(T::zero(), |acc, (k, w)| {
                // p^{k-n} with k <= n is 1 / p^{n-k}
                let node = pq_integer(k, pq) * pq.p().powu(n - k) / bracket_n.clone();
                acc + w * f.eval(&node)
            }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pq::{PQParams, StancuParams};
    use crate::scalar::{relative_error, Rational};
    use num_traits::Signed;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn spec(n: usize, p: (i64, i64), q: (i64, i64), a: i64, b: i64) -> OperatorSpec<Rational> {
        let pq = if p == q {
            PQParams::classical()
        } else {
            PQParams::new(r(p.0, p.1), r(q.0, q.1)).unwrap()
        };
        OperatorSpec::new(n, pq, StancuParams::new(r(a, 1), r(b, 1)).unwrap()).unwrap()
    }

    fn identity<T: Scalar>() -> TargetFn<T> {
        TargetFn::monomial(1)
    }

    #[test]
    fn degree_one_weights() {
        let s = spec(1, (3, 4), (1, 2), 0, 0);
        let x = r(2, 7);
        let w = basis_weights(&s, &x).unwrap();
        assert_eq!(w.weights, vec![r(5, 7), r(2, 7)]);
    }

    #[test]
    fn classical_weights() {
        let s = spec(3, (1, 1), (1, 1), 0, 0);
        let w = basis_weights(&s, &r(1, 2)).unwrap();
        assert_eq!(w.weights, vec![r(1, 8), r(3, 8), r(3, 8), r(1, 8)]);
    }

    #[test]
    fn degree_two_weights_match_literal_formula() {
        let s = spec(2, (3, 4), (1, 2), 0, 0);
        let x = r(1, 2);
        let w = basis_weights(&s, &x).unwrap();
        assert_eq!(w.weights, direct::basis_weights(&s, &x).unwrap());
        assert_eq!(w.sum(), r(1, 1));
        // By hand: r = 2/3, [2]_r = 5/3,
        // lambda = [(1-x)(1-rx), [2]_r x (1-x), x^2] = [1/3, 5/12, 1/4].
        assert_eq!(w.weights, vec![r(1, 3), r(5, 12), r(1, 4)]);
    }

    #[test]
    fn out_of_range_points_are_rejected() {
        let s = spec(3, (3, 4), (1, 2), 0, 0);
        assert!(matches!(
            basis_weights(&s, &r(-1, 10)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            basis_weights(&s, &r(11, 10)),
            Err(Error::Domain(_))
        ));
        let f = identity::<Rational>();
        assert!(apply_on_grid(&s, &f, &[r(0, 1), r(2, 1)]).is_err());
    }

    #[test]
    fn knot_examples() {
        assert_eq!(
            knots(&spec(2, (1, 1), (1, 1), 0, 0)).nodes,
            vec![r(0, 1), r(1, 2), r(1, 1)]
        );
        assert_eq!(
            knots(&spec(2, (1, 1), (1, 1), 1, 2)).nodes,
            vec![r(1, 4), r(1, 2), r(3, 4)]
        );
        let s = spec(3, (3, 4), (1, 2), 0, 0);
        let k = knots(&s).nodes;
        assert_eq!(k, direct::knots(&s));
        assert_eq!(k[3], r(1, 1));
        // [3] = 19/16, p^2 [1] = 9/16, p [2] = 15/16.
        assert_eq!(k, vec![r(0, 1), r(9, 19), r(15, 19), r(1, 1)]);
    }

    #[test]
    fn apply_examples() {
        let one = TargetFn::constant(r(1, 1));
        let t = identity::<Rational>();
        let s = spec(7, (9, 10), (4, 5), 1, 3);
        assert_eq!(apply(&s, &one, &r(3, 10)).unwrap(), r(1, 1));
        let s1 = spec(1, (3, 4), (1, 2), 0, 0);
        assert_eq!(apply(&s1, &t, &r(5, 9)).unwrap(), r(5, 9));
        let s2 = spec(2, (3, 4), (1, 2), 1, 2);
        // ([2] x + alpha) / ([2] + beta) with [2] = 5/4.
        let expected = (r(5, 4) * r(1, 2) + r(1, 1)) / (r(5, 4) + r(2, 1));
        assert_eq!(apply(&s2, &t, &r(1, 2)).unwrap(), expected);
        assert_eq!(direct::apply(&s2, &t, &r(1, 2)).unwrap(), expected);
    }

    #[test]
    fn grid_examples() {
        let s = spec(5, (3, 4), (1, 2), 1, 2);
        let one = TargetFn::constant(r(1, 1));
        let grid = vec![r(0, 1), r(1, 2), r(1, 1)];
        assert_eq!(apply_on_grid(&s, &one, &grid).unwrap(), vec![r(1, 1); 3]);
        assert!(apply_on_grid(&s, &one, &[]).unwrap().is_empty());

        let sq = TargetFn::<Rational>::monomial(2);
        let pointwise: Vec<_> = grid.iter().map(|x| apply(&s, &sq, x).unwrap()).collect();
        assert_eq!(apply_on_grid(&s, &sq, &grid).unwrap(), pointwise);
    }

    #[test]
    fn grid_second_moment_matches_closed_form_in_float() {
        let pq = PQParams::new(0.95, 0.9).unwrap();
        let s = OperatorSpec::new(10, pq.clone(), StancuParams::unshifted()).unwrap();
        let grid = uniform_grid::<f64>(101);
        let got = apply_on_grid(&s, &TargetFn::monomial(2), &grid).unwrap();
        let n = pq_integer(10, &pq);
        let n1 = pq_integer(9, &pq);
        for (x, v) in grid.iter().zip(got) {
            let closed = (0.9 * n * n1 * x * x + n * 0.95f64.powi(9) * x) / (n * n);
            assert!((v - closed).abs() <= 1e-12, "x={x}: {v} vs {closed}");
        }
    }

    #[test]
    fn endpoint_interpolation() {
        let s = spec(6, (4, 5), (3, 5), 1, 3);
        let f = TargetFn::new("cubic-ish", |t: &Rational| {
            t.clone() * t.clone() * t.clone() + r(1, 3)
        });
        let nodes = knots(&s).nodes;
        assert_eq!(apply(&s, &f, &r(0, 1)).unwrap(), f.eval(&nodes[0]));
        assert_eq!(apply(&s, &f, &r(1, 1)).unwrap(), f.eval(&nodes[6]));
        let denom = s.denominator();
        assert_eq!(nodes[0], r(1, 1) / denom.clone());
        assert_eq!(nodes[6], (s.bracket_n() + r(1, 1)) / denom);
    }

    #[test]
    fn unshifted_operator_is_the_pq_bernstein_operator() {
        let s = spec(5, (5, 6), (1, 3), 0, 0);
        let f = TargetFn::new("f", |t: &Rational| (t.clone() - r(1, 3)).abs() * t.clone());
        for i in 0..=8 {
            let x = r(i, 8);
            assert_eq!(
                apply(&s, &f, &x).unwrap(),
                direct::bernstein_apply(&s, &f, &x).unwrap()
            );
        }
    }

    #[test]
    fn classical_second_moment() {
        for n in 1..12 {
            let s = OperatorSpec::<Rational>::bernstein(n).unwrap();
            let sq = TargetFn::monomial(2);
            for i in 0..=6 {
                let x = r(i, 6);
                let expected =
                    x.clone() * x.clone() + x.clone() * (r(1, 1) - x.clone()) / r(n as i64, 1);
                assert_eq!(apply(&s, &sq, &x).unwrap(), expected);
            }
        }
    }

    #[test]
    fn log_path_and_interleaved_path_agree_at_high_degree() {
        let pq = PQParams::new(0.999, 0.99).unwrap();
        for &n in &[50usize, 200, 500] {
            let s = OperatorSpec::new(n, pq.clone(), StancuParams::new(1.0, 2.0).unwrap()).unwrap();
            for &x in &[0.0, 0.013, 0.5, 0.77, 1.0] {
                let a = basis_weights(&s, &x).unwrap();
                let b = basis_weights_log(&s, &x).unwrap();
                assert!(
                    (a.sum() - 1.0).abs() <= 1e-12,
                    "n={n} x={x} sum={}",
                    a.sum()
                );
                assert!(
                    (b.sum() - 1.0).abs() <= 1e-10,
                    "n={n} x={x} sum={}",
                    b.sum()
                );
                let f = TargetFn::<f64>::monomial(2);
                let u = apply(&s, &f, &x).unwrap();
                let v = apply_log(&s, &f, &x).unwrap();
                assert!(relative_error(u, v) <= 1e-10, "n={n} x={x}: {u} vs {v}");
            }
        }
    }

    fn rational_params() -> impl Strategy<Value = (i64, i64, i64, i64, i64, usize, i64)> {
        (2i64..40)
            .prop_flat_map(|d| (1..d).prop_flat_map(move |a| (Just(a), a + 1..=d, Just(d))))
            .prop_flat_map(|(a, b, d)| {
                (
                    Just(a),
                    Just(b),
                    Just(d),
                    0i64..4,
                    0i64..4,
                    1usize..=12,
                    0i64..=16,
                )
            })
            .prop_map(|(a, b, d, al, extra, n, xn)| (a, b, d, al, al + extra, n, xn))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn weights_partition_unity_and_match_literal_formula(
            (qa, pb, d, alpha, beta, n, xn) in rational_params()
        ) {
            let pq = PQParams::new(r(pb, d), r(qa, d)).unwrap();
            let s = OperatorSpec::new(n, pq, StancuParams::new(r(alpha, 1), r(beta, 1)).unwrap()).unwrap();
            let x = r(xn, 16);
            let w = basis_weights(&s, &x).unwrap();
            prop_assert_eq!(w.sum(), r(1, 1));
            prop_assert!(w.weights.iter().all(|v| *v >= r(0, 1)));
            prop_assert_eq!(&w.weights, &direct::basis_weights(&s, &x).unwrap());
            let nodes = knots(&s).nodes;
            prop_assert_eq!(&nodes, &direct::knots(&s));
            prop_assert!(nodes.iter().all(|t| *t >= r(0, 1) && *t <= r(1, 1)));
        }

        #[test]
        fn linear_and_positive(
            (qa, pb, d, alpha, beta, n, xn) in rational_params(),
            a in -5i64..5,
            b in -5i64..5,
        ) {
            let pq = PQParams::new(r(pb, d), r(qa, d)).unwrap();
            let s = OperatorSpec::new(n, pq, StancuParams::new(r(alpha, 1), r(beta, 1)).unwrap()).unwrap();
            let x = r(xn, 16);
            let f = TargetFn::new("f", |t: &Rational| (t.clone() - r(1, 3)).abs());
            let g = TargetFn::<Rational>::monomial(3);
            let (f2, g2) = (f.clone(), g.clone());
            let combo = TargetFn::new("combo", move |t: &Rational| {
                r(a, 1) * f2.eval(t) + r(b, 1) * g2.eval(t)
            });
            let lhs = apply(&s, &combo, &x).unwrap();
            let rhs = r(a, 1) * apply(&s, &f, &x).unwrap() + r(b, 1) * apply(&s, &g, &x).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert!(apply(&s, &f, &x).unwrap() >= r(0, 1));
        }
    }
}
