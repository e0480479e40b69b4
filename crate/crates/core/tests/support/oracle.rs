//! Reference evaluations at 1280 bits, enough to resolve `1 + e^-745`.

#![allow(dead_code)]

use astro_float::{BigFloat, Consts, RoundingMode};

const P: usize = 1280;
const RM: RoundingMode = RoundingMode::ToEven;

struct Ctx {
    cc: Consts,
}

thread_local! {
    static CTX: std::cell::RefCell<Ctx> = std::cell::RefCell::new(Ctx {
        cc: Consts::new().expect("constants cache"),
    });
}

fn with<R>(f: impl FnOnce(&mut Ctx) -> R) -> R {
    CTX.with(|c| f(&mut c.borrow_mut()))
}

impl Ctx {
    fn big(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, P)
    }

    fn exp(&mut self, x: &BigFloat) -> BigFloat {
        x.exp(P, RM, &mut self.cc)
    }

    fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(P, RM, &mut self.cc)
    }
}

fn to_f64(x: &BigFloat) -> f64 {
    let s = format!("{x}");
    s.parse().unwrap_or_else(|_| panic!("cannot parse oracle value {s}"))
}

fn one() -> BigFloat {
    BigFloat::from_f64(1.0, P)
}

/// `log(1 + e^x)`.
pub fn log1pe(x: f64) -> f64 {
    with(|c| {
        let e = c.exp(&c.big(x));
        to_f64(&c.ln(&one().add(&e, P, RM)))
    })
}

/// `log cosh x`.
pub fn log_cosh(x: f64) -> f64 {
    with(|c| {
        let a = c.exp(&c.big(x));
        let b = c.exp(&c.big(-x));
        let half = BigFloat::from_f64(0.5, P);
        to_f64(&c.ln(&a.add(&b, P, RM).mul(&half, P, RM)))
    })
}

/// `log |sinh x|`.
pub fn log_sinh(x: f64) -> f64 {
    with(|c| {
        let a = c.exp(&c.big(x.abs()));
        let b = c.exp(&c.big(-x.abs()));
        let half = BigFloat::from_f64(0.5, P);
        to_f64(&c.ln(&a.sub(&b, P, RM).mul(&half, P, RM)))
    })
}

/// `asinh(e^x) = log(y + sqrt(y^2 + 1))` with `y = e^x`.
pub fn asinh_exp(x: f64) -> f64 {
    with(|c| {
        let y = c.exp(&c.big(x));
        let r = y.mul(&y, P, RM).add(&one(), P, RM).sqrt(P, RM);
        to_f64(&c.ln(&y.add(&r, P, RM)))
    })
}

/// `1 / (1 + e^{-x})`.
pub fn expit(x: f64) -> f64 {
    with(|c| {
        let e = c.exp(&c.big(-x));
        to_f64(&one().div(&one().add(&e, P, RM), P, RM))
    })
}

/// `e^x / (1 + e^x)^2`.
pub fn bernoulli_var(x: f64) -> f64 {
    with(|c| {
        let e = c.exp(&c.big(x));
        let d = one().add(&e, P, RM);
        to_f64(&e.div(&d.mul(&d, P, RM), P, RM))
    })
}
