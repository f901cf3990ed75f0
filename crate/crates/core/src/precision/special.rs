use super::Real;
use crate::error::{Error, Result};

/// Maximum number of terms summed by [`hyp2f1_series`].
pub const HYP2F1_TERM_CAP: usize = 1_000_000;

const CF_ITER_CAP: usize = 200_000;

/// Below this argument the incomplete beta uses its power series.
const SERIES_CUTOFF: f64 = 0.125;

fn eps_for(v: &Real) -> Real {
    v.like(2).powi(-(v.prec() as i32))
}

/// Γ(a) for a > 0 at the precision of `a`.
pub fn gamma(a: &Real) -> Result<Real> {
    if !a.is_finite() || *a <= 0.0 {
        return Err(Error::NonPositiveArgument {
            function: "gamma",
            value: a.to_sci(20),
        });
    }
    a.gamma_unchecked().check("gamma")
}

fn complete_beta(a: &Real, b: &Real) -> Result<Real> {
    let ab = a + b;
    let v = if ab < 150.0 {
        gamma(a)? * gamma(b)? / gamma(&ab)?
    } else {
        (a.ln_gamma_unchecked() + b.ln_gamma_unchecked() - ab.ln_gamma_unchecked()).exp()
    };
    v.check("complete beta")
}

/// Lower incomplete beta B_x(a, b) = ∫₀ˣ t^(a−1) (1−t)^(b−1) dt.
pub fn incomplete_beta(x: &Real, a: &Real, b: &Real) -> Result<Real> {
    let bad = |detail: String| Error::domain("incomplete_beta", detail);
    if !(x.is_finite() && a.is_finite() && b.is_finite()) {
        return Err(bad("non-finite argument".into()));
    }
    if *x < 0.0 || *x > 1.0 {
        return Err(bad(format!("x = {} outside [0, 1]", x.to_sci(20))));
    }
    if *a <= 0.0 || *b <= 0.0 {
        return Err(bad(format!(
            "parameters must be positive (a = {}, b = {})",
            a.to_sci(20),
            b.to_sci(20)
        )));
    }
    let prec = x.prec().max(a.prec()).max(b.prec());
    let (x, a, b) = (x.to_prec(prec), a.to_prec(prec), b.to_prec(prec));
    if x.is_zero() {
        return Ok(x.zero_like());
    }
    if x == 1.0 {
        return complete_beta(&a, &b);
    }
    let one = x.one_like();
    let switch = (&a + 1) / (&a + &b + 2);
    if x <= switch {
        lower_beta(&x, &(&one - &x), &a, &b)
    } else {
        let y = &one - &x;
        Ok(complete_beta(&a, &b)? - lower_beta(&y, &x, &b, &a)?)
    }
}

/// B_x(a,b) on the side of the continued fraction's fast convergence;
/// `y` is 1 − x, passed separately to avoid recomputing it.
fn lower_beta(x: &Real, y: &Real, a: &Real, b: &Real) -> Result<Real> {
    if x.to_f64() <= SERIES_CUTOFF {
        beta_series(x, a, b)
    } else {
        let front = x.pow(a) * y.pow(b) / a;
        Ok(front * beta_cf(x, a, b)?)
    }
}

/// x^a Σ_k (1−b)_k / k! · x^k / (a+k).
fn beta_series(x: &Real, a: &Real, b: &Real) -> Result<Real> {
    let eps = eps_for(x);
    let mut term = x.one_like();
    let mut sum = a.recip();
    for k in 1..CF_ITER_CAP {
        let kf = x.like(k as i64);
        term = term * (&kf - b) / &kf * x;
        let contrib = &term / (a + &kf);
        sum += &contrib;
        if contrib.abs() <= &eps * sum.abs() {
            return (x.pow(a) * sum).check("incomplete_beta series");
        }
    }
    Err(Error::NoConvergence {
        what: "incomplete beta series",
        iterations: CF_ITER_CAP,
    })
}

/// Continued fraction for B_x(a,b) by the modified Lentz method.
fn beta_cf(x: &Real, a: &Real, b: &Real) -> Result<Real> {
    let eps = eps_for(x);
    let tiny = eps.square().square();
    let one = x.one_like();
    let qab = a + b;
    let qap = a + 1;
    let qam = a - 1;
    let mut c = one.clone();
    let mut d = &one - &qab * x / &qap;
    if d.abs() < tiny {
        d = tiny.clone();
    }
    d = d.recip();
    let mut h = d.clone();
    for m in 1..CF_ITER_CAP {
        let m = x.like(m as i64);
        let m2 = &m * 2;
        let aa = &m * (b - &m) * x / ((&qam + &m2) * (a + &m2));
        d = &one + &aa * &d;
        if d.abs() < tiny {
            d = tiny.clone();
        }
        c = &one + &aa / &c;
        if c.abs() < tiny {
            c = tiny.clone();
        }
        d = d.recip();
        h *= &d * &c;
        let aa = -((a + &m) * (&qab + &m) * x) / ((a + &m2) * (&qap + &m2));
        d = &one + &aa * &d;
        if d.abs() < tiny {
            d = tiny.clone();
        }
        c = &one + &aa / &c;
        if c.abs() < tiny {
            c = tiny.clone();
        }
        d = d.recip();
        let del = &d * &c;
        h *= &del;
        if (del - 1).abs() <= eps {
            return h.check("incomplete_beta continued fraction");
        }
    }
    Err(Error::NoConvergence {
        what: "incomplete beta continued fraction",
        iterations: CF_ITER_CAP,
    })
}

/// Gauss series ₂F₁(a, b; c; x), summed until the remaining tail is below
/// the working precision relative to the partial sum.
pub fn hyp2f1_series(a: &Real, b: &Real, c: &Real, x: &Real) -> Result<Real> {
    hyp2f1_series_capped(a, b, c, x, HYP2F1_TERM_CAP)
}

pub(crate) fn hyp2f1_series_capped(a: &Real, b: &Real, c: &Real, x: &Real, cap: usize) -> Result<Real> {
    if !x.is_finite() || x.abs() >= 1.0 {
        return Err(Error::NoConvergence {
            what: "2F1 series (|x| >= 1)",
            iterations: 0,
        });
    }
    let cf = c.to_f64();
    if *c <= 0.0 && *c == cf.round() {
        return Err(Error::domain(
            "hyp2f1_series",
            format!("c = {cf} is a non-positive integer"),
        ));
    }
    let prec = a.prec().max(b.prec()).max(c.prec()).max(x.prec());
    let (a, b, c, x) = (a.to_prec(prec), b.to_prec(prec), c.to_prec(prec), x.to_prec(prec));
    let eps = eps_for(&x);
    let (af, bf, xf) = (a.to_f64(), b.to_f64(), x.to_f64().abs());
    let mut term = x.one_like();
    let mut sum = x.one_like();
    if x.is_zero() {
        return Ok(sum);
    }
    for k in 0..cap {
        let kr = x.like(k as i64);
        term = term * (&a + &kr) * (&b + &kr) / ((&c + &kr) * (&kr + 1)) * &x;
        sum += &term;
        let kf = k as f64 + 1.0;
        let ratio = ((af + kf) * (bf + kf) / ((cf + kf) * (kf + 1.0)) * xf).abs();
        let r = ratio.max(xf);
        if r < 1.0 && term.abs() * (r / (1.0 - r)).max(1.0) <= &eps * sum.abs() {
            return sum.check("hyp2f1_series");
        }
        if term.is_zero() {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence {
        what: "2F1 series",
        iterations: cap,
    })
}

/// ∫₀^∞ r^m e^(−ηr) dr = Γ(m+1)/η^(m+1).
pub fn moment_integral(m: &Real, eta: &Real) -> Result<Real> {
    if !m.is_finite() || *m <= -1.0 {
        return Err(Error::domain(
            "moment_integral",
            format!("power m = {} must exceed -1", m.to_sci(20)),
        ));
    }
    if !eta.is_finite() || *eta <= 0.0 {
        return Err(Error::domain(
            "moment_integral",
            format!("exponent eta = {} must be positive", eta.to_sci(20)),
        ));
    }
    let m1 = m + 1;
    (gamma(&m1)? / eta.pow(&m1)).check("moment_integral")
}
