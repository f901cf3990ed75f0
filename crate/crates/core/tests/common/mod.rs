//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use dirac_stso::{PrecisionContext, Real};
use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

pub fn ctx50() -> PrecisionContext {
    PrecisionContext::default()
}

pub fn ctx(digits: u32) -> PrecisionContext {
    PrecisionContext::with_digits(digits).unwrap()
}

pub fn bits_for(digits: u32) -> u32 {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32 + 16
}

pub fn fl(prec: u32, v: f64) -> Float {
    Float::with_val(prec, v)
}

pub fn to_float(x: &Real, prec: u32) -> Float {
    Float::with_val(prec, x.as_float())
}

/// |a − b| as f64, evaluated in high precision.
pub fn diff(a: &Real, b: &Float) -> f64 {
    let p = a.prec().max(b.prec());
    (Float::with_val(p, a.as_float()) - b).abs().to_f64()
}

pub fn rel_diff(a: &Real, b: &Float) -> f64 {
    diff(a, b) / b.to_f64().abs()
}

/// Tanh-sinh quadrature of `f` over [a, b], refined by halving the step
/// until two levels agree to `tol` (relative).
///
/// `f` receives (x, distance to the nearer endpoint is never rounded to 0);
/// abscissae are generated as endpoint offsets so that singular endpoint
/// behaviour is resolved at full precision.
pub fn tanh_sinh(f: &dyn Fn(&Float) -> Float, a: &Float, b: &Float, tol: f64) -> Float {
    let prec = a.prec();
    let half = Float::with_val(prec, b - a) / 2;
    let pi_2 = Float::with_val(prec, Constant::Pi) / 2;
    let tiny = Float::with_val(prec, 2).pow(-(prec as i32) - 10);

    // contribution of node k·h (both signs) for k ≠ 0
    let node = |t: &Float| -> Float {
        let s = Float::with_val(prec, t.clone().sinh() * &pi_2);
        let cosh_s = s.clone().cosh();
        let w = Float::with_val(prec, &pi_2 * t.clone().cosh()) / cosh_s.clone().square();
        // 1 − tanh(s) = 2 / (e^{2s} + 1)
        let e2s = Float::with_val(prec, &s * 2u32).exp();
        let offset = Float::with_val(prec, &half * 2u32) / (e2s + 1u32);
        if offset <= tiny {
            return Float::with_val(prec, 0);
        }
        let left = Float::with_val(prec, a + &offset);
        let right = Float::with_val(prec, b - &offset);
        (f(&left) + f(&right)) * w
    };

    let center = Float::with_val(prec, a + b) / 2;
    let mut h = Float::with_val(prec, 0.5);
    let mut sum = f(&center) * &pi_2;
    let mut k = 1u32;
    loop {
        let t = Float::with_val(prec, &h * k);
        let c = node(&t);
        if c.is_zero() || t > 6.5 {
            break;
        }
        sum += c;
        k += 1;
    }
    let mut estimate: Float = Float::with_val(prec, &sum * &h) * &half;
    for _level in 0..9 {
        h /= 2;
        // new odd nodes
        let mut k = 1u32;
        loop {
            let t = Float::with_val(prec, &h * k);
            if t > 6.5 {
                break;
            }
            let c = node(&t);
            sum += c;
            k += 2;
        }
        let next: Float = Float::with_val(prec, &sum * &h) * &half;
        let change = Float::with_val(prec, &next - &estimate).abs();
        estimate = next;
        if change <= Float::with_val(prec, estimate.clone().abs() * tol) {
            break;
        }
    }
    estimate
}

/// ∫₀^∞ f via r = s·u/(1 − u), u ∈ (0, 1).
pub fn half_line(f: &dyn Fn(&Float) -> Float, scale: f64, prec: u32, tol: f64) -> Float {
    let s = fl(prec, scale);
    let g = |u: &Float| -> Float {
        let one_minus = Float::with_val(prec, 1u32 - u);
        if one_minus.is_zero() {
            return Float::with_val(prec, 0);
        }
        let r = Float::with_val(prec, &s * u) / &one_minus;
        let jac = Float::with_val(prec, &s / one_minus.square());
        f(&r) * jac
    };
    tanh_sinh(&g, &fl(prec, 0.0), &fl(prec, 1.0), tol)
}

/// Spouge's approximation with parameter `a`, accurate to roughly
/// a·log10(2π) digits; evaluated for x > 0 via Γ(x) = Γ(x+1)/x.
pub fn spouge_gamma(x: &Float, digits: u32) -> Float {
    let prec = x.prec() + 64;
    let a = (f64::from(digits + 10) / (2.0 * std::f64::consts::PI).log10()).ceil() as u32 + 1;
    let z = Float::with_val(prec, x); // Γ(x) = Γ(z+1)/x with z = x
    let af = Float::with_val(prec, a);
    let two_pi = Float::with_val(prec, Constant::Pi) * 2u32;
    let mut sum = two_pi.sqrt();
    let mut fact = Float::with_val(prec, 1); // (k−1)!
    for k in 1..a {
        if k > 1 {
            fact *= k - 1;
        }
        let base = Float::with_val(prec, &af - k);
        let ck = Float::with_val(prec, base.clone().pow(Float::with_val(prec, k) - 0.5f64))
            * Float::with_val(prec, base.exp())
            / &fact;
        let ck = if k % 2 == 0 { -ck } else { ck };
        sum += ck / Float::with_val(prec, &z + k);
    }
    let zpa = Float::with_val(prec, &z + &af);
    let lead = Float::with_val(prec, zpa.clone().pow(Float::with_val(prec, &z + 0.5f64)))
        * Float::with_val(prec, (-zpa).exp());
    let gamma_z1 = lead * sum;
    Float::with_val(x.prec(), gamma_z1 / x)
}

/// Γ(a) from its defining integral ∫₀^∞ t^{a−1} e^{−t} dt.
pub fn gamma_by_quadrature(a: f64, prec: u32, tol: f64) -> Float {
    let am1 = fl(prec, a - 1.0);
    let f =
        |t: &Float| -> Float { Float::with_val(prec, t.clone().pow(&am1)) * Float::with_val(prec, (-t.clone()).exp()) };
    half_line(&f, a.max(1.0), prec, tol)
}

/// Real-valued power helper: t^p e^{−η t}.
pub fn power_exp(t: &Float, p: &Float, eta: &Float) -> Float {
    let prec = t.prec();
    if t.is_zero() {
        return Float::with_val(prec, 0);
    }
    Float::with_val(prec, t.clone().pow(p)) * (-Float::with_val(prec, eta * t)).exp()
}

/// Lower incomplete gamma γ(s, x) from x^s e^{−x} Σ x^k / (s)_{k+1}; all
/// terms positive, so no cancellation.
pub fn lower_gamma_series(s: &Float, x: &Float) -> Float {
    let prec = s.prec();
    let mut term = Float::with_val(prec, s.clone().recip());
    let mut sum = term.clone();
    let mut k = 0u32;
    loop {
        k += 1;
        term *= x;
        term /= Float::with_val(prec, s + k);
        sum += &term;
        if term < Float::with_val(prec, &sum * 1e-60f64) || term.is_zero() {
            break;
        }
        assert!(k < 100_000, "series did not converge");
    }
    Float::with_val(prec, x.clone().pow(s)) * Float::with_val(prec, (-x.clone()).exp()) * sum
}

/// ∫₀^∞∫₀^∞ r₁ⁿ r₂^{n′} e^{−ζr₁−ζ′r₂} r_<^L / r_>^{L+1} dr₂ dr₁.
///
/// The inner integral splits into lower and upper incomplete gamma
/// functions, taken from their power series and Spouge's Γ; the outer one is
/// done by quadrature. Requires n′ − L > 0.
pub fn slater_quadrature(n: f64, np: f64, zeta: f64, zetap: f64, l: i32, prec: u32, tol: f64) -> Float {
    assert!(np - f64::from(l) > 0.0);
    let work = prec + 64;
    let nf = fl(work, n);
    let zf = fl(work, zeta);
    let zpf = fl(work, zetap);
    let s_low = fl(work, np + f64::from(l) + 1.0);
    let s_high = fl(work, np - f64::from(l));
    let digits = (f64::from(work) / std::f64::consts::LOG2_10) as u32;
    let gamma_high = spouge_gamma(&s_high, digits);
    let scale_low = Float::with_val(work, zpf.clone().pow(&s_low)).recip();
    let scale_high = Float::with_val(work, zpf.clone().pow(&s_high)).recip();
    let lpow = fl(work, -f64::from(l) - 1.0);
    let hpow = fl(work, f64::from(l));
    let outer = |r1: &Float| -> Float {
        if r1.is_zero() {
            return Float::with_val(work, 0);
        }
        let r1 = Float::with_val(work, r1);
        // e^{−ζr₁} is far below the working precision out here
        if Float::with_val(work, &zf * &r1) > f64::from(work) + 50.0 {
            return Float::with_val(work, 0);
        }
        let x = Float::with_val(work, &zpf * &r1);
        let low = lower_gamma_series(&s_low, &x) * &scale_low;
        let high = (Float::with_val(work, &gamma_high - lower_gamma_series(&s_high, &x))) * &scale_high;
        let a = Float::with_val(work, r1.clone().pow(&lpow)) * low;
        let b = Float::with_val(work, r1.clone().pow(&hpow)) * high;
        power_exp(&r1, &nf, &zf) * (a + b)
    };
    half_line(&outer, (n + 1.0) / zeta, work, tol)
}
