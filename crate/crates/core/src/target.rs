//! Target functions `f: [0,1] -> R` and the built-in test corpus.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{Mode, Scalar};

type Map<T> = Arc<dyn Fn(&T) -> T + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convexity {
    Convex,
    Unknown,
}

/// A real function on `[0,1]`, optionally with analytic first and second
/// derivatives and a convexity declaration.
///
/// `eval` must be total on `[0,1]` and safe to call from several threads at
/// once; grid evaluation fans out across points.
#[derive(Clone)]
pub struct TargetFn<T> {
    name: String,
    eval: Map<T>,
    d1: Option<Map<T>>,
    d2: Option<Map<T>>,
    convexity: Convexity,
}

impl<T> fmt::Debug for TargetFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetFn")
            .field("name", &self.name)
            .field("d1", &self.d1.is_some())
            .field("d2", &self.d2.is_some())
            .field("convexity", &self.convexity)
            .finish()
    }
}

impl<T: Scalar> TargetFn<T> {
    pub fn new(name: impl Into<String>, eval: impl Fn(&T) -> T + Send + Sync + 'static) -> Self {
        TargetFn {
            name: name.into(),
            eval: Arc::new(eval),
            d1: None,
            d2: None,
            convexity: Convexity::Unknown,
        }
    }

    pub fn with_d1(mut self, d1: impl Fn(&T) -> T + Send + Sync + 'static) -> Self {
        self.d1 = Some(Arc::new(d1));
        self
    }

    pub fn with_d2(mut self, d2: impl Fn(&T) -> T + Send + Sync + 'static) -> Self {
        self.d2 = Some(Arc::new(d2));
        self
    }

    pub fn declare_convex(mut self) -> Self {
        self.convexity = Convexity::Convex;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn convexity(&self) -> Convexity {
        self.convexity
    }

    pub fn eval(&self, t: &T) -> T {
        (self.eval)(t)
    }

    pub fn d1(&self, t: &T) -> Option<T> {
        self.d1.as_ref().map(|d| d(t))
    }

    pub fn d2(&self, t: &T) -> Option<T> {
        self.d2.as_ref().map(|d| d(t))
    }

    pub fn has_d1(&self) -> bool {
        self.d1.is_some()
    }

    pub fn has_d2(&self) -> bool {
        self.d2.is_some()
    }

    pub fn constant(c: T) -> Self {
        let c1 = c.clone();
        TargetFn::new(format!("const({c})"), move |_| c1.clone())
            .with_d1(|_| T::zero())
            .with_d2(|_| T::zero())
            .declare_convex()
    }

    /// `t -> t^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![T::zero(); k + 1];
        coeffs[k] = T::one();
        Self::polynomial(coeffs).renamed(format!("t^{k}"))
    }

    /// `c[0] + c[1] t + c[2] t^2 + ...`, with exact derivatives. Declared
    /// convex when the degree is at most one, or two with a nonnegative
    /// leading coefficient.
    pub fn polynomial(coeffs: Vec<T>) -> Self {
        let d1 = derivative(&coeffs);
        let d2 = derivative(&d1);
        let convex = match coeffs.len() {
            0..=2 => true,
            3 => coeffs[2] >= T::zero(),
            _ => false,
        };
        let name = format!(
            "poly[{}]",
            coeffs
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        let f = TargetFn::new(name, move |t| horner(&coeffs, t))
            .with_d1(move |t| horner(&d1, t))
            .with_d2(move |t| horner(&d2, t));
        if convex {
            f.declare_convex()
        } else {
            f
        }
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Wraps an `f64` function for float backends. Rational mode has no
    /// transcendental functions, so this fails there.
    pub fn from_f64_fn(
        name: &str,
        f: fn(f64) -> f64,
        d1: Option<fn(f64) -> f64>,
        d2: Option<fn(f64) -> f64>,
    ) -> Result<Self> {
        if T::MODE == Mode::Rational {
            return Err(Error::Mode(format!(
                "function '{name}' has no exact-rational evaluation"
            )));
        }
        let lift = |g: fn(f64) -> f64| {
            move |t: &T| T::try_from_f64(g(t.to_f64_lossy())).expect("finite on [0,1]")
        };
        let mut out = TargetFn::new(name, lift(f));
        if let Some(g) = d1 {
            out = out.with_d1(lift(g));
        }
        if let Some(g) = d2 {
            out = out.with_d2(lift(g));
        }
        Ok(out)
    }
}

fn horner<T: Scalar>(coeffs: &[T], t: &T) -> T {
    coeffs
        .iter()
        .rev()
        .fold(T::zero(), |acc, c| acc * t.clone() + c.clone())
}

fn derivative<T: Scalar>(coeffs: &[T]) -> Vec<T> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.clone() * T::from_count(i))
        .collect()
}

/// Named functions used by the CLI and the test suites.
pub mod corpus {
    use super::*;

    /// Every built-in name, in display order.
    pub const NAMES: &[&str] = &[
        "one", "linear", "square", "cube", "abs-half", "exp", "sine", "wiggle",
    ];

    /// Names of the members that are convex on `[0,1]`.
    pub const CONVEX: &[&str] = &["one", "linear", "square", "cube", "abs-half", "exp"];

    /// Members with an exact-rational evaluation.
    pub const RATIONAL: &[&str] = &["one", "linear", "square", "cube", "abs-half"];

    /// Looks up a corpus member:
    ///
    /// * `one`: `1`
    /// * `linear`: `1/2 + 2t`
    /// * `square`: `t^2`
    /// * `cube`: `t^3`
    /// * `abs-half`: `|t - 1/2|`
    /// * `exp`: `e^{2t}`
    /// * `sine`: `sin(2 pi t)`
    /// * `wiggle`: `1 + t^3 sin(14 t)`
    pub fn lookup<T: Scalar>(name: &str) -> Result<TargetFn<T>> {
        let f = match name {
            "one" => TargetFn::constant(T::one()),
            "linear" => TargetFn::polynomial(vec![T::from_ratio(1, 2), T::from_ratio(2, 1)]),
            "square" => TargetFn::monomial(2),
            "cube" => TargetFn::monomial(3).declare_convex(),
            "abs-half" => {
                TargetFn::new("abs-half", |t: &T| (t.clone() - T::from_ratio(1, 2)).abs())
                    .declare_convex()
            }
            "exp" => TargetFn::from_f64_fn(
                "exp",
                |t| (2.0 * t).exp(),
                Some(|t| 2.0 * (2.0 * t).exp()),
                Some(|t| 4.0 * (2.0 * t).exp()),
            )?
            .declare_convex(),
            "sine" => TargetFn::from_f64_fn(
                "sine",
                |t| (std::f64::consts::TAU * t).sin(),
                Some(|t| std::f64::consts::TAU * (std::f64::consts::TAU * t).cos()),
                Some(|t| -std::f64::consts::TAU.powi(2) * (std::f64::consts::TAU * t).sin()),
            )?,
            "wiggle" => TargetFn::from_f64_fn(
                "wiggle",
                |t| 1.0 + t.powi(3) * (14.0 * t).sin(),
                Some(|t| 3.0 * t * t * (14.0 * t).sin() + 14.0 * t.powi(3) * (14.0 * t).cos()),
                Some(|t| {
                    6.0 * t * (14.0 * t).sin() + 84.0 * t * t * (14.0 * t).cos()
                        - 196.0 * t.powi(3) * (14.0 * t).sin()
                }),
            )?,
            other => {
                return Err(Error::Domain(format!(
                    "unknown function '{other}' (known: {})",
                    NAMES.join(", ")
                )))
            }
        };
        Ok(f.renamed(name))
    }
}
