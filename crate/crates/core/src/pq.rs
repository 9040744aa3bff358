//! (p,q)-calculus primitives and the parameter types shared by every
//! operator-level module.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which of the two supported parameter regimes a [`PQParams`] lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `0 < q < p <= 1`.
    Generic,
    /// `p = q = 1`: the classical Bernstein limit.
    Classical,
}

/// The deformation pair `(p, q)`.
///
/// Only `0 < q < p <= 1` and `p = q = 1` can be constructed. The `p = q != 1`
/// case has a well-defined `[n]` but lies outside the range where the
/// operator results hold.
#[derive(Debug, Clone, PartialEq)]
pub struct PQParams<T> {
    p: T,
    q: T,
    regime: Regime,
}

impl<T: Scalar> PQParams<T> {
    pub fn new(p: T, q: T) -> Result<Self> {
        if p.is_one() && q.is_one() {
            return Ok(Self::classical());
        }
        if !(q > T::zero() && q < p && p <= T::one()) {
            return Err(Error::regime(format!(
                "(p, q) = ({p}, {q}) must satisfy 0 < q < p <= 1 or p = q = 1"
            )));
        }
        Ok(PQParams {
            p,
            q,
            regime: Regime::Generic,
        })
    }

    pub fn classical() -> Self {
        PQParams {
            p: T::one(),
            q: T::one(),
            regime: Regime::Classical,
        }
    }

    pub fn p(&self) -> &T {
        &self.p
    }

    pub fn q(&self) -> &T {
        &self.q
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn is_classical(&self) -> bool {
        self.regime == Regime::Classical
    }

    /// `q / p`, in `(0, 1]`.
    pub fn ratio(&self) -> T {
        match self.regime {
            Regime::Classical => T::one(),
            Regime::Generic => self.q.clone() / self.p.clone(),
        }
    }

    pub fn to_f64(&self) -> PQParams<f64> {
        PQParams {
            p: self.p.to_f64_lossy(),
            q: self.q.to_f64_lossy(),
            regime: self.regime,
        }
    }
}

/// The Stancu shift `(alpha, beta)` with `0 <= alpha <= beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct StancuParams<T> {
    alpha: T,
    beta: T,
}

impl<T: Scalar> StancuParams<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        if alpha < T::zero() || alpha > beta {
            return Err(Error::regime(format!(
                "(alpha, beta) = ({alpha}, {beta}) must satisfy 0 <= alpha <= beta"
            )));
        }
        Ok(StancuParams { alpha, beta })
    }

    /// `alpha = beta = 0`, which turns the operator into the unshifted
    /// (p,q)-Bernstein operator.
    pub fn unshifted() -> Self {
        StancuParams {
            alpha: T::zero(),
            beta: T::zero(),
        }
    }

    pub fn alpha(&self) -> &T {
        &self.alpha
    }

    pub fn beta(&self) -> &T {
        &self.beta
    }

    pub fn is_unshifted(&self) -> bool {
        self.alpha.is_zero() && self.beta.is_zero()
    }
}

/// Degree plus both parameter pairs; fully determines `S_{n,p,q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec<T> {
    n: usize,
    pq: PQParams<T>,
    stancu: StancuParams<T>,
}

impl<T: Scalar> OperatorSpec<T> {
    pub fn new(n: usize, pq: PQParams<T>, stancu: StancuParams<T>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("operator degree n must be at least 1"));
        }
        Ok(OperatorSpec { n, pq, stancu })
    }

    /// Classical Bernstein operator of degree `n`.
    pub fn bernstein(n: usize) -> Result<Self> {
        Self::new(n, PQParams::classical(), StancuParams::unshifted())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pq(&self) -> &PQParams<T> {
        &self.pq
    }

    pub fn stancu(&self) -> &StancuParams<T> {
        &self.stancu
    }

    pub fn alpha(&self) -> &T {
        self.stancu.alpha()
    }

    pub fn beta(&self) -> &T {
        self.stancu.beta()
    }

    /// The same parameters at a different degree.
    pub fn with_degree(&self, n: usize) -> Result<Self> {
        Self::new(n, self.pq.clone(), self.stancu.clone())
    }

    /// `[n]_{p,q}` for this operator's degree.
    pub fn bracket_n(&self) -> T {
        pq_integer(self.n, &self.pq)
    }

    /// `[n]_{p,q} + beta`, the common node denominator.
    pub fn denominator(&self) -> T {
        self.bracket_n() + self.beta().clone()
    }

    pub fn to_f64(&self) -> OperatorSpec<f64> {
        OperatorSpec {
            n: self.n,
            pq: self.pq.to_f64(),
            stancu: StancuParams {
                alpha: self.alpha().to_f64_lossy(),
                beta: self.beta().to_f64_lossy(),
            },
        }
    }
}

/// `[n]_{p,q} = p^{n-1} + p^{n-2} q + ... + q^{n-1}`, with `[0] = 0`.
///
/// Evaluated by the recurrence `[m] = p^{m-1} + q [m-1]`; the quotient form
/// `(p^n - q^n)/(p - q)` cancels badly as `q -> p`.
pub fn pq_integer<T: Scalar>(n: usize, pq: &PQParams<T>) -> T {
    if pq.is_classical() {
        return T::from_count(n);
    }
    let mut acc = T::zero();
    let mut p_pow = T::one();
    for _ in 0..n {
        acc = p_pow.clone() + pq.q().clone() * acc;
        p_pow = p_pow * pq.p().clone();
    }
    acc
}

/// The one-parameter integer `[n]_t = 1 + t + ... + t^{n-1}`.
pub fn t_integer<T: Scalar>(n: usize, t: &T) -> T {
    let mut acc = T::zero();
    for _ in 0..n {
        acc = T::one() + t.clone() * acc;
    }
    acc
}

/// `[0]_t, [1]_t, ..., [n]_t`.
pub(crate) fn t_integers<T: Scalar>(n: usize, t: &T) -> Vec<T> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(T::zero());
    for m in 1..=n {
        let next = T::one() + t.clone() * out[m - 1].clone();
        out.push(next);
    }
    out
}

/// `[n]_{p,q}! = [1][2]...[n]`, with `[0]! = 1`.
pub fn pq_factorial<T: Scalar>(n: usize, pq: &PQParams<T>) -> T {
    (1..=n).fold(T::one(), |acc, m| acc * pq_integer(m, pq))
}

/// `[n choose k]_{p,q} = [n]! / ([k]! [n-k]!)`.
pub fn pq_binomial<T: Scalar>(n: usize, k: usize, pq: &PQParams<T>) -> Result<T> {
    if k > n {
        return Err(Error::domain(format!(
            "binomial index k = {k} exceeds n = {n}"
        )));
    }
    // prod_j [n-k+j]/[j]; dividing as we go keeps float intermediates out of
    // the subnormal range.
    Ok((1..=k).fold(T::one(), |acc, j| {
        acc * pq_integer(n - k + j, pq) / pq_integer(j, pq)
    }))
}

/// `(1 - x)^n_{p,q} = prod_{s=0}^{n-1} (p^s - q^s x)`.
///
/// Each factor is formed as `p^s (1 - x) + x (p - q) [s]_{p,q}`, a sum of
/// nonnegative terms on `[0,1]`, so no factor suffers cancellation when
/// `q^s x` approaches `p^s`.
pub fn pq_power_product<T: Scalar>(n: usize, x: &T, pq: &PQParams<T>) -> T {
    let complement = T::one() - x.clone();
    let gap = pq.p().clone() - pq.q().clone();
    let mut acc = T::one();
    let mut p_pow = T::one();
    let mut bracket = T::zero();
    for _ in 0..n {
        let factor = p_pow.clone() * complement.clone() + x.clone() * gap.clone() * bracket.clone();
        acc = acc * factor;
        // [s+1] = p^s + q [s]
        bracket = p_pow.clone() + pq.q().clone() * bracket;
        p_pow = p_pow * pq.p().clone();
    }
    acc
}

/// The expanded form
/// `sum_k (-1)^k p^{(n-k)(n-k-1)/2} q^{k(k-1)/2} [n choose k]_{p,q} x^k`,
/// which equals [`pq_power_product`] identically.
pub fn alternating_expansion_check<T: Scalar>(n: usize, x: &T, pq: &PQParams<T>) -> T {
    let mut sum = T::zero();
    let mut x_pow = T::one();
    for k in 0..=n {
        let coeff = pq_binomial(n, k, pq).expect("k <= n")
            * pq.p().powu((n - k) * (n - k).saturating_sub(1) / 2)
            * pq.q().powu(k * k.saturating_sub(1) / 2);
        let term = coeff * x_pow.clone();
        if k % 2 == 0 {
            sum = sum + term;
        } else {
            sum = sum - term;
        }
        x_pow = x_pow * x.clone();
    }
    sum
}
