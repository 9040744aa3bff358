//! Moduli of smoothness and the error estimates built on them.
//!
//! Suprema are estimated on uniform grids, so every modulus here is an
//! under-approximation of the true value that converges as the resolution
//! grows (for continuous `f`).

use num_traits::Float;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::moments::{delta_n, higher_central_moment, moment1};
use crate::operator::apply;
use crate::pq::{pq_integer, OperatorSpec};
use crate::scalar::{check_unit_interval, two, Scalar};
use crate::target::TargetFn;

pub const DEFAULT_GRID_RESOLUTION: usize = 1025;
pub const DEFAULT_H_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulusKind {
    Classical,
    DitzianTotik,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulusEstimate<T> {
    pub t: T,
    pub value: T,
    pub grid_resolution: usize,
    pub kind: ModulusKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremTag {
    /// `|S_n f - f| <= 2 omega(f; sqrt(delta_n))`.
    RateBound,
    /// `|S_n f - f| <= C omega_phi(f; ([n]+beta)^{-1/2})`.
    GlobalBound,
    Voronovskaja,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<T> {
    pub x: T,
    pub actual_error: T,
    pub bound: T,
    /// `bound - actual_error`.
    pub slack: T,
    pub theorem_tag: TheoremTag,
}

fn grid_point<T: Scalar>(i: usize, res: usize) -> T {
    T::from_count(i) / T::from_count(res - 1)
}

fn check_resolution(res: usize) -> Result<()> {
    if res < 2 {
        return Err(Error::domain(format!(
            "grid resolution {res} must be at least 2"
        )));
    }
    Ok(())
}

/// Samples of `f` on a uniform grid with range-max/min tables, so that
/// `omega(f; delta)` costs one pass over the grid per `delta`.
pub struct ClassicalModulus<T> {
    f: TargetFn<T>,
    res: usize,
    values: Vec<T>,
    maxes: Vec<Vec<T>>,
    mins: Vec<Vec<T>>,
}

impl<T: Scalar + Float> ClassicalModulus<T> {
    pub fn new(f: &TargetFn<T>, grid_resolution: usize) -> Result<Self> {
        check_resolution(grid_resolution)?;
        let values: Vec<T> = (0..grid_resolution)
            .map(|i| f.eval(&grid_point(i, grid_resolution)))
            .collect();
        let (mut maxes, mut mins) = (vec![values.clone()], vec![values.clone()]);
        let mut width = 1;
        while 2 * width <= grid_resolution {
            let (pm, pn) = (maxes.last().unwrap(), mins.last().unwrap());
            let len = grid_resolution + 1 - 2 * width;
            let next_max = (0..len).map(|i| pm[i].max(pm[i + width])).collect();
            let next_min = (0..len).map(|i| pn[i].min(pn[i + width])).collect();
            maxes.push(next_max);
            mins.push(next_min);
            width *= 2;
        }
        Ok(ClassicalModulus {
            f: f.clone(),
            res: grid_resolution,
            values,
            maxes,
            mins,
        })
    }

    pub fn grid_resolution(&self) -> usize {
        self.res
    }

    /// Spread `max - min` of the samples with indices in `lo..=hi`.
    fn spread(&self, lo: usize, hi: usize) -> T {
        let level = (usize::BITS - 1 - (hi - lo + 1).leading_zeros()) as usize;
        let j = hi + 1 - (1 << level);
        let max = self.maxes[level][lo].max(self.maxes[level][j]);
        let min = self.mins[level][lo].min(self.mins[level][j]);
        max - min
    }

    /// `omega(f; delta)`: the largest spread over windows of grid width
    /// `delta`, together with the off-grid pairs `(x_i, x_i + delta)`. The
    /// second term keeps the estimate sharp when `delta` is below the grid
    /// spacing.
    pub fn at(&self, delta: T) -> Result<ModulusEstimate<T>> {
        if !(delta > T::zero()) {
            return Err(Error::domain(format!(
                "modulus argument {delta} must be positive"
            )));
        }
        let last = self.res - 1;
        let steps = (delta * T::from_count(last))
            .floor()
            .to_usize()
            .unwrap_or(usize::MAX);
        let mut value = T::zero();
        if steps >= last {
            value = self.spread(0, last);
        } else if steps > 0 {
            for lo in 0..self.res - steps {
                value = value.max(self.spread(lo, lo + steps));
            }
        }
        for (i, fx) in self.values.iter().enumerate() {
            let t = grid_point::<T>(i, self.res) + delta;
            if t > T::one() {
                break;
            }
            value = value.max((self.f.eval(&t) - *fx).abs());
        }
        Ok(ModulusEstimate {
            t: delta,
            value,
            grid_resolution: self.res,
            kind: ModulusKind::Classical,
        })
    }

    /// The rate bound at one point, reusing the precomputed samples.
    pub fn rate_bound(&self, spec: &OperatorSpec<T>, x: T) -> Result<BoundReport<T>> {
        let actual_error = (apply(spec, &self.f, &x)? - self.f.eval(&x)).abs();
        let delta = delta_n(spec, &x)?;
        let bound = if delta > T::zero() {
            two::<T>() * self.at(delta.sqrt())?.value
        } else {
            T::zero()
        };
        Ok(BoundReport {
            x,
            actual_error,
            bound,
            slack: bound - actual_error,
            theorem_tag: TheoremTag::RateBound,
        })
    }
}

/// Grid estimate of `sup { |f(t) - f(x)| : x, t in [0,1], |t - x| <= delta }`.
pub fn modulus_classical<T: Scalar + Float>(
    f: &TargetFn<T>,
    delta: T,
    grid_resolution: usize,
) -> Result<ModulusEstimate<T>> {
    if !(delta > T::zero()) {
        return Err(Error::domain(format!(
            "modulus argument {delta} must be positive"
        )));
    }
    ClassicalModulus::new(f, grid_resolution)?.at(delta)
}

/// Ditzian-Totik modulus with `phi(x) = sqrt(x(1-x))`:
/// `sup_{0 < h <= t} sup_x |f(x + h phi/2) - f(x - h phi/2)|`, over grid
/// points `x` whose stencil stays in `[0,1]`. The steps are `h_j = t 2^{-j/8}`,
/// `j < h_samples`, so ladders of `t` in powers of two share their samples.
pub fn modulus_ditzian_totik<T: Scalar + Float>(
    f: &TargetFn<T>,
    t: T,
    grid_resolution: usize,
    h_samples: usize,
) -> Result<ModulusEstimate<T>> {
    if !(t > T::zero()) {
        return Err(Error::domain(format!(
            "modulus argument {t} must be positive"
        )));
    }
    check_resolution(grid_resolution)?;
    if h_samples == 0 {
        return Err(Error::domain("h_samples must be positive"));
    }
    let eighth = T::from_ratio(1, 8);
    let hs: Vec<T> = (0..h_samples)
        .map(|j| t * T::from_count(2).powf(-(T::from_count(j) * eighth)))
        .collect();
    let half = T::from_ratio(1, 2);
    let value = (1..grid_resolution - 1)
        .into_par_iter()
        .map(|i| {
            let x: T = grid_point(i, grid_resolution);
            let phi = (x * (T::one() - x)).sqrt();
            hs.iter().fold(T::zero(), |acc, h| {
                let step = *h * phi * half;
                let (lo, hi) = (x - step, x + step);
                if lo < T::zero() || hi > T::one() {
                    acc
                } else {
                    acc.max((f.eval(&hi) - f.eval(&lo)).abs())
                }
            })
        })
        .reduce(T::zero, |a, b| a.max(b));
    Ok(ModulusEstimate {
        t,
        value,
        grid_resolution,
        kind: ModulusKind::DitzianTotik,
    })
}

/// `|S_n(f;x) - f(x)|` against `2 omega(f; sqrt(delta_n(x)))`.
pub fn rate_bound_sec4<T: Scalar + Float>(
    spec: &OperatorSpec<T>,
    f: &TargetFn<T>,
    x: T,
    grid_resolution: usize,
) -> Result<BoundReport<T>> {
    check_unit_interval(&x, "x")?;
    ClassicalModulus::new(f, grid_resolution)?.rate_bound(spec, x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalBound<T> {
    /// Per grid point; `bound` is the modulus factor itself (unit constant).
    pub reports: Vec<BoundReport<T>>,
    pub modulus: ModulusEstimate<T>,
    /// `max actual_error / modulus factor` over the grid. Errors at rounding
    /// level (a few ulps of `f(x)`) are not fitted; any other positive error
    /// against a vanishing modulus estimate makes this infinite.
    pub fitted_constant: T,
}

/// Errors against `omega_phi(f; ([n]+beta)^{-1/2})` with the default
/// sampling resolutions.
pub fn global_bound_sec6<T: Scalar + Float>(
    spec: &OperatorSpec<T>,
    f: &TargetFn<T>,
    grid: &[T],
) -> Result<GlobalBound<T>> {
    global_bound_sec6_with(spec, f, grid, DEFAULT_GRID_RESOLUTION, DEFAULT_H_SAMPLES)
}

pub fn global_bound_sec6_with<T: Scalar + Float>(
    spec: &OperatorSpec<T>,
    f: &TargetFn<T>,
    grid: &[T],
    grid_resolution: usize,
    h_samples: usize,
) -> Result<GlobalBound<T>> {
    let arg = spec.denominator().sqrt().recip();
    let modulus = modulus_ditzian_totik(f, arg, grid_resolution, h_samples)?;
    let factor = modulus.value;
    let mut fitted = T::zero();
    let mut reports = Vec::with_capacity(grid.len());
    for x in grid {
        check_unit_interval(x, "grid point")?;
        let actual_error = (apply(spec, f, x)? - f.eval(x)).abs();
        let noise = T::from_count(16) * T::epsilon() * T::one().max(f.eval(x).abs());
        if actual_error > noise {
            fitted = fitted.max(if factor > T::zero() {
                actual_error / factor
            } else {
                T::infinity()
            });
        }
        reports.push(BoundReport {
            x: *x,
            actual_error,
            bound: factor,
            slack: factor - actual_error,
            theorem_tag: TheoremTag::GlobalBound,
        });
    }
    Ok(GlobalBound {
        reports,
        modulus,
        fitted_constant: fitted,
    })
}

/// `R_n(x) = D^2 (S_n(f;x) - f(x) - (m1(x) - x) f'(x)) - ((p^{n-1}[n] - 2 alpha beta)/2) phi^2(x) f''(x)`
/// with `D = [n] + beta`. Without `f'` the drift term is dropped, which is
/// only allowed when `alpha = beta = 0` (then `m1(x) = x`).
pub fn voronovskaja_residual<T: Scalar>(
    spec: &OperatorSpec<T>,
    f: &TargetFn<T>,
    x: &T,
) -> Result<T> {
    check_unit_interval(x, "x")?;
    let f2 = f
        .d2(x)
        .ok_or_else(|| Error::contract(format!("'{}' has no second derivative", f.name())))?;
    let drift = match f.d1(x) {
        Some(f1) => (moment1(spec, x)? - x.clone()) * f1,
        None if spec.stancu().is_unshifted() => T::zero(),
        None => {
            return Err(Error::contract(format!(
                "'{}' has no first derivative, required when alpha + beta > 0",
                f.name()
            )))
        }
    };
    let n = spec.n();
    let bracket = pq_integer(n, spec.pq());
    let d = spec.denominator();
    let lead = spec.pq().p().powu(n - 1) * bracket
        - two::<T>() * spec.alpha().clone() * spec.beta().clone();
    let phi2 = x.clone() * (T::one() - x.clone());
    let err = apply(spec, f, x)? - f.eval(x) - drift;
    Ok(d.clone() * d * err - lead / two::<T>() * phi2 * f2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoronovskajaFit<T> {
    /// `(x, R_n(x))` per grid point.
    pub residuals: Vec<(T, T)>,
    /// `D^{1/2} omega_phi(f''; D^{-1/2})`.
    pub scale: T,
    /// `max |R_n| / scale` over the grid.
    pub fitted_constant: T,
}

impl<T: Scalar + Float> VoronovskajaFit<T> {
    /// Whether every residual respects `constant * scale`, up to a relative
    /// tolerance.
    pub fn within(&self, constant: T, rel_tol: T) -> bool {
        let limit = constant * self.scale * (T::one() + rel_tol);
        self.residuals.iter().all(|(_, r)| r.abs() <= limit)
    }
}

/// Residuals over a grid scaled by the `f''` modulus envelope.
pub fn voronovskaja_fit<T: Scalar + Float>(
    spec: &OperatorSpec<T>,
    f: &TargetFn<T>,
    grid: &[T],
    grid_resolution: usize,
    h_samples: usize,
) -> Result<VoronovskajaFit<T>> {
    if !f.has_d2() {
        return Err(Error::contract(format!(
            "'{}' has no second derivative",
            f.name()
        )));
    }
    let g = f.clone();
    let f2 = TargetFn::new(format!("{}''", f.name()), move |t| {
        g.d2(t).expect("checked above")
    });
    let d = spec.denominator();
    let omega = modulus_ditzian_totik(&f2, d.sqrt().recip(), grid_resolution, h_samples)?;
    let scale = d.sqrt() * omega.value;
    let residuals = grid
        .iter()
        .map(|x| Ok((*x, voronovskaja_residual(spec, f, x)?)))
        .collect::<Result<Vec<_>>>()?;
    let worst = residuals
        .iter()
        .fold(T::zero(), |acc, (_, r)| acc.max(r.abs()));
    let fitted_constant = if worst == T::zero() {
        T::zero()
    } else if scale > T::zero() {
        worst / scale
    } else {
        T::infinity()
    };
    Ok(VoronovskajaFit {
        residuals,
        scale,
        fitted_constant,
    })
}

/// Smallest `C` with `|S((t-x)^m; x)| <= C phi^2(x) [n] / ([n]+beta)^{floor((m+1)/2)+1}`
/// on the grid. Defined for `alpha = beta = 0` and `m` in `1..=4`.
pub fn moment_bound_envelope<T: Scalar>(spec: &OperatorSpec<T>, m: usize, grid: &[T]) -> Result<T> {
    if !(1..=4).contains(&m) {
        return Err(Error::domain(format!("moment order {m} is outside 1..=4")));
    }
    if !spec.stancu().is_unshifted() {
        return Err(Error::contract(
            "the moment envelope is fitted only for alpha = beta = 0",
        ));
    }
    let bracket = pq_integer(spec.n(), spec.pq());
    let scale = bracket.clone() / spec.denominator().powu(m.div_ceil(2) + 1);
    let mut fitted = T::zero();
    for x in grid {
        let phi2 = x.clone() * (T::one() - x.clone());
        if phi2 <= T::zero() {
            return Err(Error::domain(format!(
                "grid point {x} has phi(x) = 0; the envelope needs interior points"
            )));
        }
        let ratio = higher_central_moment(spec, m, x)?.abs() / (phi2 * scale.clone());
        fitted = T::max_of(fitted, ratio);
    }
    Ok(fitted)
}

/// `||f - g|| + t ||phi g'||` on a uniform grid: an upper witness for the
/// K-functional at `t`, with `g` a designated smooth approximant of `f`.
pub fn k_functional_witness<T: Scalar + Float>(
    f: &TargetFn<T>,
    g: &TargetFn<T>,
    t: T,
    grid_resolution: usize,
) -> Result<T> {
    check_resolution(grid_resolution)?;
    if !g.has_d1() {
        return Err(Error::contract(format!(
            "approximant '{}' has no derivative",
            g.name()
        )));
    }
    let (mut dist, mut slope) = (T::zero(), T::zero());
    for i in 0..grid_resolution {
        let x: T = grid_point(i, grid_resolution);
        let phi = (x * (T::one() - x)).sqrt();
        dist = dist.max((f.eval(&x) - g.eval(&x)).abs());
        slope = slope.max((phi * g.d1(&x).expect("checked above")).abs());
    }
    Ok(dist + t * slope)
}
