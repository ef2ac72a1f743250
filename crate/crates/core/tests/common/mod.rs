//! Helpers shared by the integration tests.
#![allow(dead_code)]

use rug::float::Constant;
use rug::Float;

/// ∫_a^∞ f(t) dt by the exp-sinh rule t = a + exp(π/2 · sinh u), halving
/// the step until two successive estimates agree to the working precision.
/// Independent of everything in the crate; meant for smooth integrands that
/// decay at least exponentially.
pub fn exp_sinh<F>(a: &Float, prec: u32, f: F) -> Float
where
    F: Fn(&Float) -> Float,
{
    let wp = prec + 32;
    let half_pi = Float::with_val(wp, Constant::Pi) / 2u32;
    let a = Float::with_val(wp, a);
    let tolerance = Float::with_val(wp, 1) >> (prec as i32);
    let node = |u: &Float| -> Float {
        let e = Float::with_val(wp, &half_pi * &Float::with_val(wp, u.sinh_ref())).exp();
        let t = Float::with_val(wp, &a + &e);
        let dt = Float::with_val(wp, &half_pi * &Float::with_val(wp, u.cosh_ref())) * e;
        if dt.is_zero() || !dt.is_finite() {
            return Float::with_val(wp, 0);
        }
        let value = f(&t);
        if value.is_zero() {
            value
        } else {
            value * dt
        }
    };
    // Sum of f over u = k h for all integers k, stopping each tail once
    // terms are negligible or u passes the point where t overflows usefully.
    let sum_at = |h: &Float| -> Float {
        let mut total = node(&Float::with_val(wp, 0));
        for direction in [1i32, -1] {
            let mut k = 1u32;
            let mut small = 0;
            loop {
                let u = Float::with_val(wp, h * k) * direction;
                if u.clone().abs() > 7 {
                    break;
                }
                let term = node(&u);
                let negligible = Float::with_val(wp, term.abs_ref()) <= Float::with_val(wp, &tolerance * &total).abs();
                total += term;
                small = if negligible { small + 1 } else { 0 };
                if small >= 4 {
                    break;
                }
                k += 1;
            }
        }
        total * h
    };
    let mut h = Float::with_val(wp, 0.5);
    let mut previous = sum_at(&h);
    for _ in 0..10 {
        h /= 2u32;
        let current = sum_at(&h);
        let change = Float::with_val(wp, &current - &previous).abs() / Float::with_val(wp, current.abs_ref());
        previous = current;
        if change <= tolerance.clone() << 16 {
            break;
        }
    }
    Float::with_val(prec, previous)
}

pub fn relative(a: &Float, b: &Float) -> Float {
    let d = Float::with_val(a.prec().max(b.prec()), a - b).abs();
    d / Float::with_val(b.prec(), b.abs_ref())
}
