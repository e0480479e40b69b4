//! Stable scalar functions against 1280-bit reference values.

mod support;

use softsvm::numerics::{asinh_exp, bernoulli_var, expit, log1pe, log_cosh, log_sinh, softplus};
use support::oracle;

fn grid() -> Vec<f64> {
    let mut xs: Vec<f64> = (0..=1400).map(|i| -700.0 + i as f64 + 0.0123).filter(|x: &f64| x.abs() <= 700.0).collect();
    xs.extend([
        -700.0, 700.0, -36.05, -36.04, 36.04, 36.05, -18.03, -18.02, 18.02, 18.03, -1.0, 1.0, -1e-3, 1e-3, -1e-8, 1e-8,
        0.5, -0.5, 2.0,
    ]);
    xs
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn check(name: &str, f: impl Fn(f64) -> f64, oracle: impl Fn(f64) -> f64, skip_zero: bool) {
    let mut worst = (0.0, 0.0);
    for x in grid() {
        if skip_zero && x == 0.0 {
            continue;
        }
        let r = rel(f(x), oracle(x));
        if r > worst.0 {
            worst = (r, x);
        }
    }
    assert!(worst.0 <= 1e-12, "{name}: relative error {:.3e} at x = {}", worst.0, worst.1);
}

#[test]
fn log1pe_matches_oracle() {
    check("log1pe", log1pe, oracle::log1pe, false);
}

#[test]
fn log_cosh_matches_oracle() {
    check("log_cosh", log_cosh, oracle::log_cosh, false);
    assert_eq!(log_cosh(0.0), 0.0);
}

#[test]
fn asinh_exp_matches_oracle() {
    check("asinh_exp", asinh_exp, oracle::asinh_exp, false);
}

#[test]
fn log_sinh_matches_oracle() {
    check("log_sinh", |x| log_sinh(x).unwrap(), oracle::log_sinh, true);
}

#[test]
fn expit_and_variance_match_oracle() {
    check("expit", expit, oracle::expit, false);
    check("bernoulli_var", bernoulli_var, oracle::bernoulli_var, false);
}

#[test]
fn softplus_matches_oracle() {
    for kappa in [0.5, 1.0, 5.0, 50.0] {
        for x in [-10.0, -0.3, 0.0, 0.7, 12.0] {
            let r = rel(softplus(kappa, x).unwrap(), oracle::log1pe(kappa * x) / kappa);
            assert!(r <= 1e-12, "kappa {kappa} x {x}: {r:e}");
        }
    }
}

#[test]
fn huge_arguments_stay_finite() {
    for x in [-1e6, -1e5, 1e5, 1e6] {
        assert!(log1pe(x).is_finite());
        assert!(log_cosh(x).is_finite());
        assert!(asinh_exp(x).is_finite());
        assert!(log_sinh(x).unwrap().is_finite());
        assert!(expit(x).is_finite());
        assert!(bernoulli_var(x).is_finite());
        assert!(softplus(50.0, x).unwrap().is_finite());
    }
    assert_eq!(log1pe(1e6), 1e6);
    assert_eq!(log1pe(-1e6), 0.0);
    assert_eq!(log_cosh(-1e6), 1e6 - std::f64::consts::LN_2);
}
