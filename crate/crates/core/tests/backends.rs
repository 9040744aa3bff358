//! The three scalar backends driven through the public API only.

use pq_stancu::moments::moment_set;
use pq_stancu::operator::{apply, apply_on_grid, direct, uniform_grid};
use pq_stancu::target::corpus;
use pq_stancu::{
    ExactFn, ExactSpec, Fn64, OperatorSpec, PQParams, Rational, Scalar, Spec, StancuParams,
};

fn spec<T: Scalar>(n: usize, p: &str, q: &str, a: &str, b: &str) -> OperatorSpec<T> {
    let s = |v: &str| T::parse_decimal(v).unwrap();
    OperatorSpec::new(
        n,
        PQParams::new(s(p), s(q)).unwrap(),
        StancuParams::new(s(a), s(b)).unwrap(),
    )
    .unwrap()
}

#[test]
fn backends_agree_on_polynomials() {
    let cases = [
        ("1", "1", "0", "0"),
        ("0.9", "0.8", "1", "2"),
        ("3/4", "1/2", "0", "3"),
    ];
    for (p, q, a, b) in cases {
        for n in [1, 4, 12] {
            let exact: ExactSpec = spec(n, p, q, a, b);
            let float: Spec = spec(n, p, q, a, b);
            let single = spec::<f32>(n, p, q, a, b);
            for name in ["one", "linear", "square", "cube", "abs-half"] {
                let fe: ExactFn = corpus::lookup(name).unwrap();
                let ff: Fn64 = corpus::lookup(name).unwrap();
                let fs = corpus::lookup::<f32>(name).unwrap();
                let grid = uniform_grid::<Rational>(9);
                let oracle = apply_on_grid(&exact, &fe, &grid).unwrap();
                for (x, want) in grid.iter().zip(oracle) {
                    let want = want.to_f64_lossy();
                    let got = apply(&float, &ff, &x.to_f64_lossy()).unwrap();
                    let got32 = apply(&single, &fs, &(x.to_f64_lossy() as f32)).unwrap();
                    let ctx = format!("{name} n={n} p={p} q={q} a={a} b={b} x={x}");
                    assert!(
                        (got - want).abs() <= 1e-13 * want.abs().max(1.0),
                        "{ctx}: {got} vs {want}"
                    );
                    assert!(
                        (f64::from(got32) - want).abs() <= 2e-5 * want.abs().max(1.0),
                        "{ctx}: {got32}"
                    );
                }
            }
        }
    }
}

#[test]
fn direct_and_fast_paths_are_identical_in_exact_mode() {
    let s: ExactSpec = spec(9, "5/6", "2/3", "1/2", "5/2");
    let f: ExactFn = corpus::lookup("abs-half").unwrap();
    for x in uniform_grid::<Rational>(7) {
        assert_eq!(
            apply(&s, &f, &x).unwrap(),
            direct::apply(&s, &f, &x).unwrap()
        );
    }
}

#[test]
fn moments_match_operator_on_test_functions() {
    let s: ExactSpec = spec(6, "0.95", "0.9", "2", "3");
    let names = ["one", "square"];
    let fs: Vec<ExactFn> = names.iter().map(|n| corpus::lookup(n).unwrap()).collect();
    let t = ExactFn::monomial(1);
    for x in uniform_grid::<Rational>(5) {
        let m = moment_set(&s, &x).unwrap();
        assert_eq!(apply(&s, &fs[0], &x).unwrap(), m.m0);
        assert_eq!(apply(&s, &t, &x).unwrap(), m.m1);
        assert_eq!(apply(&s, &fs[1], &x).unwrap(), m.m2);
    }
}

#[test]
fn transcendental_members_are_float_only() {
    for name in ["exp", "sine", "wiggle"] {
        assert!(corpus::lookup::<Rational>(name).is_err(), "{name}");
        assert!(corpus::lookup::<f64>(name).is_ok(), "{name}");
    }
    assert!(corpus::lookup::<f64>("nope").is_err());
}
