use std::collections::HashSet;

use pq_stancu::moments::moment_set;
use pq_stancu::operator::{apply_on_grid, uniform_grid};
use pq_stancu::smoothness::{global_bound_sec6, ClassicalModulus, DEFAULT_GRID_RESOLUTION};
use pq_stancu::statconv::{korovkin_stat_suite, remark51_check, ParamSequence};
use pq_stancu::structure::{check_lower_bound, check_monotone_in_n};
use pq_stancu::{Mode, OperatorSpec, PQParams, Scalar, StancuParams, TargetFn};

use crate::config::{parse_scalar, Command, FnSel, Settings};
use crate::svg::{line_plot, Series};
use crate::table::{float, num, Table};
use crate::CliError;

/// What a driver produced. `violations` lists every asserted invariant that
/// failed; a nonempty list means exit code 1.
pub struct Outcome {
    pub table: Table,
    pub svg: Option<String>,
    pub summary: Vec<String>,
    pub violations: Vec<String>,
}

pub fn run(s: &Settings) -> Result<Outcome, CliError> {
    let float_only = || -> Result<(), CliError> {
        if s.mode == Mode::Rational {
            return Err(CliError::Usage(format!(
                "'{}' runs in float mode only; rational mode covers eval and moments",
                s.command.name()
            )));
        }
        Ok(())
    };
    if s.out_svg.is_some() && !matches!(s.command, Command::Eval | Command::Figures) {
        return Err(CliError::Usage(format!(
            "'{}' does not draw plots; drop out-svg",
            s.command.name()
        )));
    }
    match (s.command, s.mode) {
        (Command::Eval, Mode::Float) => eval::<f64>(s),
        (Command::Eval, Mode::Rational) => eval::<pq_stancu::Rational>(s),
        (Command::Moments, Mode::Float) => moments::<f64>(s),
        (Command::Moments, Mode::Rational) => moments::<pq_stancu::Rational>(s),
        (Command::Bounds, _) => float_only().and_then(|_| bounds(s)),
        (Command::Monotonic, _) => float_only().and_then(|_| monotonic(s)),
        (Command::Stat, _) => float_only().and_then(|_| stat(s)),
        (Command::Figures, _) => float_only().and_then(|_| figures(s)),
    }
}

fn function<T: Scalar>(s: &Settings, default: &str) -> Result<TargetFn<T>, CliError> {
    s.func
        .clone()
        .unwrap_or_else(|| FnSel::Named(default.into()))
        .resolve()
}

fn sup_gap<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u.clone() - v.clone()).abs().to_f64_lossy())
        .fold(0.0, f64::max)
}

/// `x, f, <curve>...` rows and, on request, the matching plot.
fn series_outcome<T: Scalar>(
    s: &Settings,
    f: &TargetFn<T>,
    grid: &[T],
    curves: Vec<(String, Vec<T>)>,
) -> Outcome {
    let fx: Vec<T> = grid.iter().map(|x| f.eval(x)).collect();
    let mut table = Table::new(["x".to_string(), "f".to_string()]);
    table
        .headers
        .extend(curves.iter().map(|(label, _)| label.clone()));
    for (i, x) in grid.iter().enumerate() {
        let mut row = vec![num(x), num(&fx[i])];
        row.extend(curves.iter().map(|(_, c)| num(&c[i])));
        table.push(row);
    }
    let summary = curves
        .iter()
        .map(|(label, c)| format!("{label}: sup |S_n f - f| = {:.6e}", sup_gap(c, &fx)))
        .collect();
    let svg = s.out_svg.as_ref().map(|_| {
        let lossy = |v: &[T]| v.iter().map(Scalar::to_f64_lossy).collect::<Vec<_>>();
        let mut series = vec![Series {
            label: format!("f = {}", f.name()),
            values: lossy(&fx),
        }];
        series.extend(curves.iter().map(|(label, c)| Series {
            label: label.clone(),
            values: lossy(c),
        }));
        line_plot(
            &format!("S_n(f; x), f = {}", f.name()),
            &lossy(grid),
            &series,
        )
    });
    Outcome {
        table,
        svg,
        summary,
        violations: Vec::new(),
    }
}

fn eval<T: Scalar>(s: &Settings) -> Result<Outcome, CliError> {
    let (pq, stancu) = (s.pq::<T>()?, s.stancu::<T>()?);
    let f = function::<T>(s, "wiggle")?;
    let grid = uniform_grid::<T>(s.grid);
    let mut curves = Vec::new();
    for &n in s.ns.as_deref().unwrap_or(&[10]) {
        let spec = OperatorSpec::new(n, pq.clone(), stancu.clone())?;
        curves.push((format!("S_{n}"), apply_on_grid(&spec, &f, &grid)?));
    }
    Ok(series_outcome(s, &f, &grid, curves))
}

fn moments<T: Scalar>(s: &Settings) -> Result<Outcome, CliError> {
    let (pq, stancu) = (s.pq::<T>()?, s.stancu::<T>()?);
    let default_tol = match T::MODE {
        Mode::Float => T::from_ratio(1, 1_000_000_000_000),
        Mode::Rational => T::zero(),
    };
    let tol = s.tolerance(default_tol)?;
    let grid = uniform_grid::<T>(s.grid);
    let mut table = Table::new(["n", "x", "m0", "m1", "m2", "central2"]);
    let (mut violations, mut summary) = (Vec::new(), Vec::new());
    for &n in s.ns.as_deref().unwrap_or(&[10]) {
        let spec = OperatorSpec::new(n, pq.clone(), stancu.clone())?;
        let mut max_c2 = T::zero();
        for x in &grid {
            let m = moment_set(&spec, x)?;
            let identity =
                m.m2.clone() - T::from_count(2) * x.clone() * m.m1.clone() + x.clone() * x.clone();
            if (m.m0.clone() - T::one()).abs() > tol {
                violations.push(format!("n={n} x={x}: S_n(1) = {} is not 1", m.m0));
            }
            if m.central2 < -tol.clone() {
                violations.push(format!(
                    "n={n} x={x}: negative central moment {}",
                    m.central2
                ));
            }
            if (m.central2.clone() - identity.clone()).abs() > tol {
                violations.push(format!(
                    "n={n} x={x}: central moment {} disagrees with m2 - 2x m1 + x^2 = {identity}",
                    m.central2
                ));
            }
            max_c2 = T::max_of(max_c2, m.central2.clone());
            table.push(vec![
                n.to_string(),
                num(x),
                num(&m.m0),
                num(&m.m1),
                num(&m.m2),
                num(&m.central2),
            ]);
        }
        summary.push(format!(
            "n={n}: max central moment {:.6e}",
            max_c2.to_f64_lossy()
        ));
    }
    Ok(Outcome {
        table,
        svg: None,
        summary,
        violations,
    })
}

fn bounds(s: &Settings) -> Result<Outcome, CliError> {
    let (pq, stancu) = (s.pq::<f64>()?, s.stancu::<f64>()?);
    let f = function::<f64>(s, "wiggle")?;
    let tol = s.tolerance(1e-9)?;
    let grid = uniform_grid::<f64>(s.grid);
    let modulus = ClassicalModulus::new(&f, DEFAULT_GRID_RESOLUTION)?;
    let mut table = Table::new(["n", "x", "error", "rate_bound", "slack", "dt_modulus"]);
    let (mut violations, mut summary) = (Vec::new(), Vec::new());
    for &n in s.ns.as_deref().unwrap_or(&[5, 10, 20, 40]) {
        let spec = OperatorSpec::new(n, pq.clone(), stancu.clone())?;
        let global = global_bound_sec6(&spec, &f, &grid)?;
        let mut min_slack = f64::INFINITY;
        for (x, g) in grid.iter().zip(&global.reports) {
            let r = modulus.rate_bound(&spec, *x)?;
            if r.slack < -tol {
                violations.push(format!(
                    "n={n} x={x}: error {:e} exceeds 2 omega(f; sqrt(delta_n)) = {:e}",
                    r.actual_error, r.bound
                ));
            }
            min_slack = min_slack.min(r.slack);
            table.push(vec![
                n.to_string(),
                float(*x),
                float(r.actual_error),
                float(r.bound),
                float(r.slack),
                float(g.bound),
            ]);
        }
        summary.push(format!(
            "n={n}: min rate slack {min_slack:.6e}, fitted global constant {:.6e}",
            global.fitted_constant
        ));
    }
    Ok(Outcome {
        table,
        svg: None,
        summary,
        violations,
    })
}

fn monotonic(s: &Settings) -> Result<Outcome, CliError> {
    let (pq, stancu) = (s.pq::<f64>()?, s.stancu::<f64>()?);
    let f = function::<f64>(s, "square")?;
    let tol = s.tolerance(1e-12)?;
    let ns = s.ns.clone().unwrap_or_else(|| (2..=10).collect());
    if ns.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(CliError::Usage(format!(
            "monotonic needs a contiguous degree range, got {ns:?}"
        )));
    }
    let (first, last) = (ns[0], ns[ns.len() - 1]);
    let grid = uniform_grid::<f64>(s.grid);
    let base = OperatorSpec::new(first.max(1), pq, stancu)?;
    let succ = check_monotone_in_n(&base, first..=last, &f, &grid, tol)?;

    let mut flagged: HashSet<(usize, u64, &str)> = succ
        .violations
        .iter()
        .map(|(n, x, _)| (*n, x.to_bits(), "succ"))
        .collect();
    let mut lower_min = f64::INFINITY;
    let mut lower_asserted = false;
    let mut shifted_min: Option<f64> = None;
    for &n in &ns {
        let lower = check_lower_bound(&base.with_degree(n)?, &f, &grid, tol)?;
        lower_asserted = lower.asserted;
        lower_min = lower_min.min(lower.min_gap_lower);
        if let Some(g) = lower.min_gap_shifted {
            shifted_min = Some(shifted_min.map_or(g, |m| m.min(g)));
        }
        flagged.extend(
            lower
                .violations
                .iter()
                .map(|(n, x, _)| (*n, x.to_bits(), "lower")),
        );
    }

    let mut table = Table::new(["n", "x", "lower_gap", "succ_gap", "violation"]);
    let fx: Vec<f64> = grid.iter().map(|x| f.eval(x)).collect();
    let mut prev = apply_on_grid(&base.with_degree(first - 1)?, &f, &grid)?;
    for &n in &ns {
        let cur = apply_on_grid(&base.with_degree(n)?, &f, &grid)?;
        for (i, x) in grid.iter().enumerate() {
            let tags: Vec<&str> = ["lower", "succ"]
                .into_iter()
                .filter(|t| flagged.contains(&(n, x.to_bits(), *t)))
                .collect();
            table.push(vec![
                n.to_string(),
                float(*x),
                float(cur[i] - fx[i]),
                float(prev[i] - cur[i]),
                tags.join(";"),
            ]);
        }
        prev = cur;
    }

    let mut summary = vec![format!(
        "S_(n-1) f - S_n f, n = {first}..={last}: min {:.6e}, {} violation(s)",
        succ.min_gap_succ.unwrap_or(0.0),
        succ.violations.len()
    )];
    if lower_asserted {
        summary.push(format!("S_n f - f: min {lower_min:.6e}"));
    } else {
        summary.push(format!(
            "S_n f - f: min {lower_min:.6e} (not asserted with a Stancu shift); S_n f - f(S_n t): min {:.6e}",
            shifted_min.unwrap_or(f64::NAN)
        ));
    }
    let violations = succ
        .violations
        .iter()
        .map(|(n, x, g)| format!("n={n} x={x}: S_(n-1) f - S_n f = {g:e}"))
        .chain(
            flagged
                .iter()
                .filter(|(_, _, t)| *t == "lower")
                .map(|(n, bits, _)| format!("n={n} x={}: S_n f < f", f64::from_bits(*bits))),
        )
        .collect();
    Ok(Outcome {
        table,
        svg: None,
        summary,
        violations,
    })
}

fn stat(s: &Settings) -> Result<Outcome, CliError> {
    let stancu = s.stancu::<f64>()?;
    let ladder = s.ladder.clone().unwrap_or_else(|| vec![10, 100, 1000]);
    let tol = s.tolerance(1e-12)?;
    let epsilon: f64 = parse_scalar("epsilon", s.epsilon.as_deref().unwrap_or("0.05"))?;
    let compliant_default = s.p.is_none() && s.q.is_none();
    let seq = if compliant_default {
        ParamSequence::default_compliant()
    } else {
        let pq = s.pq::<f64>()?;
        ParamSequence::constant(*pq.p(), *pq.q())
    };
    seq.check(ladder.iter().copied())?;
    let grid = uniform_grid::<f64>(s.grid);
    let rows = korovkin_stat_suite(&seq, &stancu, &ladder, &grid)?;

    let mut table = Table::new(["n", "p", "q", "err_one", "err_t", "err_t2"]);
    for r in &rows {
        let (p, q) = seq.at(r.n);
        let mut row = vec![r.n.to_string(), float(p), float(q)];
        row.extend(r.errors.iter().map(|e| float(*e)));
        table.push(row);
    }
    let mut violations = Vec::new();
    if compliant_default {
        for w in rows.windows(2) {
            for (k, name) in ["1", "t", "t^2"].iter().enumerate() {
                if w[1].errors[k] > w[0].errors[k] + tol {
                    violations.push(format!(
                        "sup error on {name} grew from {:e} at n={} to {:e} at n={}",
                        w[0].errors[k], w[0].n, w[1].errors[k], w[1].n
                    ));
                }
            }
        }
    }
    let mut summary = vec![format!("sequence: {}", seq.description())];
    let n_max = *ladder.last().expect("ladder is nonempty");
    if n_max >= 10 {
        let r = remark51_check(&seq, n_max, epsilon)?;
        summary.push(format!(
            "at n={n_max}: p^n={:.6}, q^n={:.6}, [n]={:.6e} (floor {}); {} within epsilon={epsilon}",
            r.p_pow,
            r.q_pow,
            r.bracket,
            r.growth_floor,
            if r.compliant { "convergent" } else { "not convergent" }
        ));
    }
    if !compliant_default {
        summary.push("constant (p,q): decrease of the sup-errors is reported, not asserted".into());
    }
    Ok(Outcome {
        table,
        svg: None,
        summary,
        violations,
    })
}

pub const FIGURE_NS: &[usize] = &[10, 30, 50];
pub const FIGURE_PQ: &[(&str, &str)] = &[("0.95", "0.9"), ("0.999", "0.99")];
pub const FIGURE_SHIFTS: &[(&str, &str)] = &[("0", "0"), ("3", "3")];

fn figures(s: &Settings) -> Result<Outcome, CliError> {
    let f = function::<f64>(s, "wiggle")?;
    let ns = s.ns.clone().unwrap_or_else(|| FIGURE_NS.to_vec());
    let pick =
        |a: &Option<String>, b: &Option<String>, defaults: &[(&str, &str)], da: &str, db: &str| {
            if a.is_none() && b.is_none() {
                defaults
                    .iter()
                    .map(|(x, y)| (x.to_string(), y.to_string()))
                    .collect::<Vec<_>>()
            } else {
                vec![(
                    a.clone().unwrap_or(da.into()),
                    b.clone().unwrap_or(db.into()),
                )]
            }
        };
    let mut sets = Vec::new();
    for (p, q) in pick(&s.p, &s.q, FIGURE_PQ, "0.95", "0.9") {
        let pq = PQParams::new(parse_scalar("p", &p)?, parse_scalar("q", &q)?)?;
        for (a, b) in pick(&s.alpha, &s.beta, FIGURE_SHIFTS, "0", "0") {
            let st = StancuParams::new(parse_scalar("alpha", &a)?, parse_scalar("beta", &b)?)?;
            sets.push((format!("p={p} q={q} a={a} b={b}"), pq.clone(), st));
        }
    }
    let grid = uniform_grid::<f64>(s.grid);
    let mut curves = Vec::new();
    for (label, pq, st) in &sets {
        for &n in &ns {
            let spec = OperatorSpec::new(n, pq.clone(), st.clone())?;
            curves.push((format!("n={n} {label}"), apply_on_grid(&spec, &f, &grid)?));
        }
    }
    Ok(series_outcome(s, &f, &grid, curves))
}
