//! Closed-form moments of `S_{n,p,q}` and brute-force counterparts.
//!
//! With `D = [n] + beta`:
//!
//! ```text
//! S(1; x)       = 1
//! S(t; x)       = ([n] x + alpha) / D
//! S(t^2; x)     = (q [n][n-1] x^2 + [n](2 alpha + p^{n-1}) x + alpha^2) / D^2
//! S((t-x)^2; x) = ((q[n][n-1] - [n]^2 + beta^2) x^2 + (p^{n-1}[n] - 2 alpha beta) x + alpha^2) / D^2
//!               = (p^{n-1}[n] x(1-x) + (beta x - alpha)^2) / D^2
//! ```

use crate::error::Result;
use crate::operator::{basis_weights, knots};
use crate::pq::{pq_integer, OperatorSpec};
use crate::scalar::{check_unit_interval, two, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet<T> {
    pub x: T,
    pub m0: T,
    pub m1: T,
    pub m2: T,
    pub central2: T,
}

/// Quantities shared by the closed forms.
struct Brackets<T> {
    n: T,
    n_minus_1: T,
    p_pow: T,
    denom: T,
}

fn brackets<T: Scalar>(spec: &OperatorSpec<T>) -> Brackets<T> {
    let pq = spec.pq();
    let n = pq_integer(spec.n(), pq);
    Brackets {
        n_minus_1: pq_integer(spec.n() - 1, pq),
        p_pow: pq.p().powu(spec.n() - 1),
        denom: n.clone() + spec.beta().clone(),
        n,
    }
}

pub fn moment0<T: Scalar>(_spec: &OperatorSpec<T>, x: &T) -> Result<T> {
    check_unit_interval(x, "x")?;
    Ok(T::one())
}

pub fn moment1<T: Scalar>(spec: &OperatorSpec<T>, x: &T) -> Result<T> {
    check_unit_interval(x, "x")?;
    let b = brackets(spec);
    Ok((b.n * x.clone() + spec.alpha().clone()) / b.denom)
}

pub fn moment2<T: Scalar>(spec: &OperatorSpec<T>, x: &T) -> Result<T> {
    check_unit_interval(x, "x")?;
    let b = brackets(spec);
    let alpha = spec.alpha().clone();
    let quad = spec.pq().q().clone() * b.n.clone() * b.n_minus_1;
    let lin = b.n * (two::<T>() * alpha.clone() + b.p_pow);
    let num = quad * x.clone() * x.clone() + lin * x.clone() + alpha.clone() * alpha;
    Ok(num / (b.denom.clone() * b.denom))
}

/// The central second moment as the expanded quadratic in `x`.
pub fn central_moment2_expanded<T: Scalar>(spec: &OperatorSpec<T>, x: &T) -> Result<T> {
    check_unit_interval(x, "x")?;
    let b = brackets(spec);
    let (alpha, beta) = (spec.alpha().clone(), spec.beta().clone());
    let quad = spec.pq().q().clone() * b.n.clone() * b.n_minus_1 - b.n.clone() * b.n.clone()
        + beta.clone() * beta.clone();
    let lin = b.p_pow * b.n - two::<T>() * alpha.clone() * beta;
    let num = quad * x.clone() * x.clone() + lin * x.clone() + alpha.clone() * alpha;
    Ok(num / (b.denom.clone() * b.denom))
}

/// `delta_n(x)`, the quantity driving the modulus-of-continuity rate; the
/// same polynomial as [`central_moment2`].
pub fn delta_n<T: Scalar>(spec: &OperatorSpec<T>, x: &T) -> Result<T> {
    central_moment2(spec, x)
}

/// `S((t - x)^2; x)`, evaluated in the factored form
/// `(p^{n-1}[n] phi^2(x) + (beta x - alpha)^2) / ([n]+beta)^2`
/// (from `q[n-1] = [n] - p^{n-1}`). Both terms are nonnegative, so the float
/// path has no cancellation; in rational mode it equals
/// [`central_moment2_expanded`] exactly.
pub fn central_moment2<T: Scalar>(spec: &OperatorSpec<T>, x: &T) -> Result<T> {
    check_unit_interval(x, "x")?;
    let b = brackets(spec);
    let phi2 = x.clone() * (T::one() - x.clone());
    let shift = spec.beta().clone() * x.clone() - spec.alpha().clone();
    Ok((b.p_pow * b.n * phi2 + shift.clone() * shift) / (b.denom.clone() * b.denom))
}

pub fn moment_set<T: Scalar>(spec: &OperatorSpec<T>, x: &T) -> Result<MomentSet<T>> {
    Ok(MomentSet {
        x: x.clone(),
        m0: moment0(spec, x)?,
        m1: moment1(spec, x)?,
        m2: moment2(spec, x)?,
        central2: central_moment2(spec, x)?,
    })
}

/// `S((t - x)^m; x)` by direct summation over the knots, with ordinary
/// powers.
pub fn higher_central_moment<T: Scalar>(spec: &OperatorSpec<T>, m: usize, x: &T) -> Result<T> {
    let weights = basis_weights(spec, x)?;
    let values: Vec<T> = knots(spec)
        .nodes
        .into_iter()
        .map(|t| (t - x.clone()).powu(m))
        .collect();
    Ok(weights.dot(&values))
}

/// `S(t^nu; x)` by direct summation.
pub fn raw_moment_brute<T: Scalar>(spec: &OperatorSpec<T>, nu: usize, x: &T) -> Result<T> {
    let weights = basis_weights(spec, x)?;
    let values: Vec<T> = knots(spec).nodes.into_iter().map(|t| t.powu(nu)).collect();
    Ok(weights.dot(&values))
}

/// The three partial sums of `([n]+beta)^2 S(t^2; x)` obtained by expanding
/// the squared node numerator `(p^{n-k}[k] + alpha)^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondMomentParts<T> {
    /// `sum_k lambda_k (p^{n-k}[k])^2`
    pub squares: T,
    /// `2 alpha sum_k lambda_k p^{n-k}[k]`
    pub cross: T,
    /// `alpha^2 sum_k lambda_k`
    pub shift: T,
}

pub fn second_moment_parts_brute<T: Scalar>(
    spec: &OperatorSpec<T>,
    x: &T,
) -> Result<SecondMomentParts<T>> {
    let n = spec.n();
    let pq = spec.pq();
    let weights = basis_weights(spec, x)?;
    let scaled: Vec<T> = (0..=n)
        .map(|k| pq.p().powu(n - k) * pq_integer(k, pq))
        .collect();
    let alpha = spec.alpha().clone();
    let squares = weights.dot(
        &scaled
            .iter()
            .map(|v| v.clone() * v.clone())
            .collect::<Vec<_>>(),
    );
    let cross = two::<T>() * alpha.clone() * weights.dot(&scaled);
    let shift = alpha.clone() * alpha * weights.sum();
    Ok(SecondMomentParts {
        squares,
        cross,
        shift,
    })
}

/// Closed forms of the same three sums:
/// `p^{n-1}[n] x + q[n][n-1] x^2`, `2 alpha [n] x` and `alpha^2`.
pub fn second_moment_parts_closed<T: Scalar>(
    spec: &OperatorSpec<T>,
    x: &T,
) -> Result<SecondMomentParts<T>> {
    check_unit_interval(x, "x")?;
    let b = brackets(spec);
    let alpha = spec.alpha().clone();
    let squares = b.p_pow * b.n.clone() * x.clone()
        + spec.pq().q().clone() * b.n.clone() * b.n_minus_1 * x.clone() * x.clone();
    Ok(SecondMomentParts {
        squares,
        cross: two::<T>() * alpha.clone() * b.n * x.clone(),
        shift: alpha.clone() * alpha,
    })
}

/// Upper bounds on the central second moment that can be compared with
/// the exact value.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralEnvelope<T> {
    pub central2: T,
    /// `([n] p^{n-1} - 2 alpha beta) / (2([n]+beta)^2) phi^2(x)`
    pub tight_bound: T,
    /// `[n]/([n]+beta) phi^2(x) + alpha^2/([n]+beta)^2`
    pub loose_bound: T,
}

impl<T: Scalar> CentralEnvelope<T> {
    pub fn tight_holds(&self) -> bool {
        self.central2 <= self.tight_bound
    }

    pub fn loose_holds(&self) -> bool {
        self.central2 <= self.loose_bound
    }
}

pub fn central_envelope<T: Scalar>(spec: &OperatorSpec<T>, x: &T) -> Result<CentralEnvelope<T>> {
    let central2 = central_moment2(spec, x)?;
    let b = brackets(spec);
    let phi2 = x.clone() * (T::one() - x.clone());
    let d2 = b.denom.clone() * b.denom.clone();
    let (alpha, beta) = (spec.alpha().clone(), spec.beta().clone());
    let tight_bound = (b.n.clone() * b.p_pow - two::<T>() * alpha.clone() * beta)
        / (two::<T>() * d2.clone())
        * phi2.clone();
    let loose_bound = b.n / b.denom * phi2 + alpha.clone() * alpha / d2;
    Ok(CentralEnvelope {
        central2,
        tight_bound,
        loose_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::apply;
    use crate::pq::{PQParams, StancuParams};
    use crate::scalar::{relative_error, Rational};
    use crate::target::TargetFn;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn exact(n: usize, p: (i64, i64), q: (i64, i64), a: i64, b: i64) -> OperatorSpec<Rational> {
        let pq = if p == q {
            PQParams::classical()
        } else {
            PQParams::new(r(p.0, p.1), r(q.0, q.1)).unwrap()
        };
        OperatorSpec::new(n, pq, StancuParams::new(r(a, 1), r(b, 1)).unwrap()).unwrap()
    }

    fn float(n: usize, p: f64, q: f64, a: f64, b: f64) -> OperatorSpec<f64> {
        OperatorSpec::new(
            n,
            PQParams::new(p, q).unwrap(),
            StancuParams::new(a, b).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zeroth_moment() {
        let s = exact(1, (1, 1), (1, 1), 0, 0);
        assert_eq!(moment0(&s, &r(0, 1)).unwrap(), r(1, 1));
        let s = float(7, 0.9, 0.8, 1.0, 3.0);
        let brute = apply(&s, &TargetFn::constant(1.0), &0.3).unwrap();
        assert!((brute - 1.0).abs() < 1e-15);
        assert_eq!(moment0(&s, &0.3).unwrap(), 1.0);
        assert!(moment0(&s, &1.5).is_err());
    }

    #[test]
    fn first_moment_examples() {
        for n in 1..6 {
            let s = exact(n, (1, 1), (1, 1), 0, 0);
            assert_eq!(moment1(&s, &r(2, 7)).unwrap(), r(2, 7));
        }
        let s = exact(2, (1, 1), (1, 1), 1, 2);
        assert_eq!(moment1(&s, &r(1, 2)).unwrap(), r(1, 2));
        assert_eq!(raw_moment_brute(&s, 1, &r(1, 2)).unwrap(), r(1, 2));

        let s = exact(3, (3, 4), (1, 2), 0, 1);
        assert_eq!(s.bracket_n(), r(19, 16));
        assert_eq!(moment1(&s, &r(1, 4)).unwrap(), r(19, 140));
        assert_eq!(raw_moment_brute(&s, 1, &r(1, 4)).unwrap(), r(19, 140));
    }

    #[test]
    fn second_moment_examples() {
        for n in 1..6 {
            let s = exact(n, (1, 1), (1, 1), 0, 0);
            let x = r(3, 5);
            let classical =
                x.clone() * x.clone() + x.clone() * (r(1, 1) - x.clone()) / r(n as i64, 1);
            assert_eq!(moment2(&s, &x).unwrap(), classical);
        }
        let s = exact(1, (2, 3), (1, 3), 0, 0);
        assert_eq!(moment2(&s, &r(3, 7)).unwrap(), r(3, 7));

        let s = exact(2, (3, 4), (1, 2), 1, 2);
        let x = r(1, 2);
        let closed = moment2(&s, &x).unwrap();
        assert_eq!(closed, raw_moment_brute(&s, 2, &x).unwrap());
        // Hand value: weights [1/3, 5/12, 1/4] on knots [4/13, 7/13, 9/13].
        let by_hand = (r(1, 3) * r(16, 1) + r(5, 12) * r(49, 1) + r(1, 4) * r(81, 1)) / r(169, 1);
        assert_eq!(closed, by_hand);
    }

    #[test]
    fn central_moment_examples() {
        let s = exact(5, (4, 5), (1, 2), 2, 3);
        let d = s.denominator();
        assert_eq!(
            central_moment2(&s, &r(0, 1)).unwrap(),
            r(4, 1) / (d.clone() * d)
        );
        for n in 1..6 {
            let s = exact(n, (1, 1), (1, 1), 0, 0);
            let x = r(1, 3);
            assert_eq!(
                central_moment2(&s, &x).unwrap(),
                x.clone() * (r(1, 1) - x.clone()) / r(n as i64, 1)
            );
        }
        let s = float(4, 0.9, 0.7, 2.0, 5.0);
        let closed = central_moment2(&s, &0.6).unwrap();
        let brute = higher_central_moment(&s, 2, &0.6).unwrap();
        assert!(
            relative_error(closed, brute) <= 1e-13,
            "{closed} vs {brute}"
        );
    }

    #[test]
    fn delta_examples() {
        let s = exact(4, (4, 5), (1, 2), 1, 3);
        let d = s.denominator();
        assert_eq!(delta_n(&s, &r(0, 1)).unwrap(), r(1, 1) / (d.clone() * d));
        let s = OperatorSpec::<Rational>::bernstein(10).unwrap();
        assert_eq!(delta_n(&s, &r(1, 2)).unwrap(), r(1, 40));
        let s = float(6, 0.95, 0.85, 1.0, 2.0);
        assert_eq!(
            delta_n(&s, &0.3).unwrap(),
            central_moment2(&s, &0.3).unwrap()
        );
        let s = exact(6, (19, 20), (17, 20), 1, 2);
        assert_eq!(
            delta_n(&s, &r(3, 10)).unwrap(),
            central_moment2(&s, &r(3, 10)).unwrap()
        );
    }

    #[test]
    fn higher_central_moment_examples() {
        let s = exact(5, (3, 4), (1, 3), 1, 2);
        let x = r(2, 9);
        assert_eq!(
            higher_central_moment(&s, 2, &x).unwrap(),
            central_moment2(&s, &x).unwrap()
        );
        for n in 1..8 {
            let s = OperatorSpec::<Rational>::bernstein(n).unwrap();
            assert_eq!(higher_central_moment(&s, 1, &r(3, 11)).unwrap(), r(0, 1));
        }
        // reverse-order summation as an independent second implementation
        let s = float(8, 0.9, 0.8, 0.0, 0.0);
        let x = 0.5;
        let w = basis_weights(&s, &x).unwrap().weights;
        let t = knots(&s).nodes;
        let reversed: f64 = (0..=8).rev().map(|k| w[k] * (t[k] - x).powi(4)).sum();
        let got = higher_central_moment(&s, 4, &x).unwrap();
        assert!(
            relative_error(got, reversed) <= 1e-14,
            "{got} vs {reversed}"
        );
    }

    #[test]
    fn moment_set_identity() {
        let s = exact(6, (5, 6), (1, 2), 1, 4);
        let x = r(5, 13);
        let m = moment_set(&s, &x).unwrap();
        assert_eq!(m.m0, r(1, 1));
        assert_eq!(
            m.central2,
            m.m2.clone() - r(2, 1) * x.clone() * m.m1.clone()
                + x.clone() * x.clone() * m.m0.clone()
        );
        assert!(m.central2 >= r(0, 1));
    }

    #[test]
    fn printed_tight_envelope_fails_by_a_factor_of_two() {
        // For alpha = beta = 0 the central moment is p^{n-1} phi^2 / [n], exactly
        // twice the printed bound.
        let s = exact(5, (4, 5), (1, 2), 0, 0);
        let x = r(1, 3);
        let env = central_envelope(&s, &x).unwrap();
        assert_eq!(env.central2, r(2, 1) * env.tight_bound.clone());
        assert!(!env.tight_holds());
        assert!(env.loose_holds());
    }

    #[test]
    fn loose_envelope_fails_at_right_endpoint_when_beta_positive() {
        let s = exact(5, (4, 5), (1, 2), 0, 2);
        let env = central_envelope(&s, &r(1, 1)).unwrap();
        // S((t-1)^2; 1) = (beta / ([n] + beta))^2 > 0 while phi(1) = 0.
        let d = s.denominator();
        assert_eq!(env.central2, r(4, 1) / (d.clone() * d));
        assert!(!env.loose_holds());
    }

    #[test]
    fn central_moment_decays_along_compliant_sequence() {
        let n = 400usize;
        let nf = n as f64;
        let s = float(n, 1.0 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf, 0.0, 0.0);
        assert!(delta_n(&s, &0.5).unwrap() < 1e-2);
    }

    fn params() -> impl Strategy<Value = (i64, i64, i64, i64, i64, usize, i64)> {
        (2i64..30)
            .prop_flat_map(|d| (1..d).prop_flat_map(move |a| (Just(a), a + 1..=d, Just(d))))
            .prop_flat_map(|(a, b, d)| {
                (
                    Just(a),
                    Just(b),
                    Just(d),
                    0i64..5,
                    0i64..5,
                    1usize..=10,
                    0i64..=12,
                )
            })
            .prop_map(|(a, b, d, al, extra, n, xn)| (a, b, d, al, al + extra, n, xn))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn closed_forms_equal_brute_force_exactly((qa, pb, d, al, be, n, xn) in params()) {
            let s = OperatorSpec::new(
                n,
                PQParams::new(r(pb, d), r(qa, d)).unwrap(),
                StancuParams::new(r(al, 1), r(be, 1)).unwrap(),
            ).unwrap();
            let x = r(xn, 12);
            prop_assert_eq!(moment1(&s, &x).unwrap(), raw_moment_brute(&s, 1, &x).unwrap());
            prop_assert_eq!(moment2(&s, &x).unwrap(), raw_moment_brute(&s, 2, &x).unwrap());
            let c2 = central_moment2(&s, &x).unwrap();
            prop_assert_eq!(&c2, &higher_central_moment(&s, 2, &x).unwrap());
            prop_assert_eq!(&c2, &central_moment2_expanded(&s, &x).unwrap());
            prop_assert!(c2 >= r(0, 1));
            prop_assert_eq!(
                second_moment_parts_brute(&s, &x).unwrap(),
                second_moment_parts_closed(&s, &x).unwrap()
            );
        }

        #[test]
        fn closed_forms_track_brute_force_in_float(
            n in 1usize..=100,
            p in 0.5f64..1.0,
            shrink in 0.05f64..0.95,
            al in 0.0f64..5.0,
            extra in 0.0f64..5.0,
            x in 0.0f64..=1.0,
        ) {
            let s = float(n, p, p * shrink, al, al + extra);
            let pairs = [
                (moment1(&s, &x).unwrap(), raw_moment_brute(&s, 1, &x).unwrap()),
                (moment2(&s, &x).unwrap(), raw_moment_brute(&s, 2, &x).unwrap()),
                (central_moment2(&s, &x).unwrap(), higher_central_moment(&s, 2, &x).unwrap()),
            ];
            for (closed, brute) in pairs {
                prop_assert!(relative_error(closed, brute) <= 1e-12, "{} vs {}", closed, brute);
            }
        }
    }
}
