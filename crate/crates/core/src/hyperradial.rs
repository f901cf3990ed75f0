//! One-center two-electron radial integrals over non-integer Slater
//! functions, evaluated through hyper-radial functions
//!
//! ```text
//! ℛ^L_{n,n'}(ζ,ζ') = ₂F₁(1, n+n'+1; n+L+2; ζ/(ζ+ζ'))
//! ```
//!
//! The base case ℛ⁰ is an incomplete beta function, ℛ¹ follows from ℛ⁰ and
//! higher orders come from an upward three-term recurrence in L. Whenever a
//! recurrence denominator degenerates the public entry points fall back to
//! the Gauss series.

use crate::error::{Error, Result};
use crate::precision::{gamma, hyp2f1_series, incomplete_beta, Real};

/// Combined powers and exponents of the two radial densities plus the
/// multipole order.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPair {
    pub n: Real,
    pub n_prime: Real,
    pub zeta: Real,
    pub zeta_prime: Real,
    pub l: u32,
}

impl RadialPair {
    pub fn new(n: Real, n_prime: Real, zeta: Real, zeta_prime: Real, l: u32) -> Result<Self> {
        let pair = RadialPair {
            n,
            n_prime,
            zeta,
            zeta_prime,
            l,
        };
        pair.validate()?;
        Ok(pair)
    }

    fn validate(&self) -> Result<()> {
        check_args(&self.n, &self.n_prime, &self.zeta, &self.zeta_prime)
    }

    /// The mirrored pair (n', n, ζ', ζ) describing the outer region.
    pub fn swapped(&self) -> Self {
        RadialPair {
            n: self.n_prime.clone(),
            n_prime: self.n.clone(),
            zeta: self.zeta_prime.clone(),
            zeta_prime: self.zeta.clone(),
            l: self.l,
        }
    }

    /// Series argument ζ/(ζ+ζ').
    pub fn x(&self) -> Real {
        &self.zeta / (&self.zeta + &self.zeta_prime)
    }

    fn prec(&self) -> u32 {
        self.n
            .prec()
            .max(self.n_prime.prec())
            .max(self.zeta.prec())
            .max(self.zeta_prime.prec())
    }

    fn to_prec(&self, prec: u32) -> Self {
        RadialPair {
            n: self.n.to_prec(prec),
            n_prime: self.n_prime.to_prec(prec),
            zeta: self.zeta.to_prec(prec),
            zeta_prime: self.zeta_prime.to_prec(prec),
            l: self.l,
        }
    }
}

fn check_args(n: &Real, np: &Real, zeta: &Real, zetap: &Real) -> Result<()> {
    for (name, v) in [("n", n), ("n'", np), ("zeta", zeta), ("zeta'", zetap)] {
        if !v.is_finite() || *v <= 0.0 {
            return Err(Error::domain(
                "hyperradial",
                format!("{name} = {} must be positive", v.to_sci(20)),
            ));
        }
    }
    Ok(())
}

/// Threshold below which a recurrence denominator counts as degenerate:
/// half of the working bits, i.e. 10^(-digits/2).
pub fn degeneracy_threshold(like: &Real) -> Real {
    like.like(2).powi(-(like.prec() as i32) / 2)
}

/// ℛ⁰ from the incomplete beta representation
/// (n+1) x^(-n-1) y^(-n') [B(n+1,n') − B_y(n',n+1)], x = ζ/(ζ+ζ'), y = 1−x.
///
/// The bracket equals the lower incomplete beta B_x(n+1, n'); evaluating it
/// in that form lets `incomplete_beta` pick the cancellation-free branch.
pub fn hyper_r0(n: &Real, n_prime: &Real, zeta: &Real, zeta_prime: &Real) -> Result<Real> {
    check_args(n, n_prime, zeta, zeta_prime)?;
    let s = zeta + zeta_prime;
    let x = zeta / &s;
    let y = zeta_prime / &s;
    let n1 = n + 1;
    let brace = incomplete_beta(&x, &n1, n_prime)?;
    (&n1 * brace / (x.pow(&n1) * y.pow(n_prime))).check("hyper_r0")
}

/// ℛ¹ = (n+2)/(n'−1) · [(ζ'/ζ) ℛ⁰_{n,n'}(ζ,ζ') − (ζ+ζ')/ζ].
///
/// The bracket cancels to O(1) from terms of size ζ'/ζ, so it is formed
/// with that many extra bits and rounded back.
pub fn hyper_r1(n: &Real, n_prime: &Real, zeta: &Real, zeta_prime: &Real) -> Result<Real> {
    check_args(n, n_prime, zeta, zeta_prime)?;
    let denom = n_prime - 1;
    if denom.abs() <= degeneracy_threshold(n_prime) {
        return Err(Error::DegenerateDenominator {
            value: denom.to_sci(10),
        });
    }
    let pair = RadialPair {
        n: n.clone(),
        n_prime: n_prime.clone(),
        zeta: zeta.clone(),
        zeta_prime: zeta_prime.clone(),
        l: 1,
    };
    let prec = pair.prec();
    let hp = pair.to_prec(prec + guard_bits(&pair, denom.to_f64().abs()));
    r1_raw(&hp)?.to_prec(prec).check("hyper_r1")
}

fn r1_raw(p: &RadialPair) -> Result<Real> {
    let (n, np, z, zp) = (&p.n, &p.n_prime, &p.zeta, &p.zeta_prime);
    let r0 = hyper_r0(n, np, z, zp)?;
    Ok((n + 2) / (np - 1) * (zp / z * r0 - (z + zp) / z))
}

/// Extra bits for the upward recurrence: each order amplifies rounding by
/// about 1/x, and small denominators add their own loss.
fn guard_bits(pair: &RadialPair, smallest_denominator: f64) -> u32 {
    let x = pair.x().to_f64();
    let mut extra = 16.0 + f64::from(pair.l + 1) * ((1.0 / x).log2() + 4.0);
    extra += (1.0 / smallest_denominator).log2().max(0.0);
    extra.ceil() as u32
}

/// ℛ^L by the upward recurrence only; fails with `DegenerateDenominator`
/// instead of falling back. Orders 0 and 1 are the base cases.
///
/// The recurrence runs upward against the minimal solution, so it is carried
/// out with extra bits sized to the expected amplification and rounded back
/// at the end.
pub fn hyper_rl_recurrence(pair: &RadialPair) -> Result<Real> {
    pair.validate()?;
    let (n, np, z, zp) = (&pair.n, &pair.n_prime, &pair.zeta, &pair.zeta_prime);
    match pair.l {
        0 => return hyper_r0(n, np, z, zp),
        1 => return hyper_r1(n, np, z, zp),
        _ => {}
    }
    let prec = pair.prec();
    let eps = degeneracy_threshold(&pair.n);
    let l = pair.l;
    // every denominator the recurrence will touch, checked at working precision
    let mut smallest = f64::INFINITY;
    let mut denominators = vec![np - 1];
    denominators.extend((0..l - 1).map(|k| -np + (k as i32 + 2)));
    for d in &denominators {
        if d.abs() <= eps {
            return Err(Error::DegenerateDenominator { value: d.to_sci(10) });
        }
        smallest = smallest.min(d.to_f64().abs());
    }

    let hp = pair.to_prec(prec + guard_bits(pair, smallest));
    let (n, np, z, zp) = (&hp.n, &hp.n_prime, &hp.zeta, &hp.zeta_prime);
    let (mut lo, mut hi) = (hyper_r0(n, np, z, zp)?, r1_raw(&hp)?);
    for k in 0..l - 1 {
        let k = k as i32;
        let a = n + (k + 2);
        let b = -np + (k + 2);
        let pref = (n + (k + 3)) / (z * &a * &b);
        let next = pref * (zp * &a * &lo + (z * (-np + (k + 1)) - zp * &a) * &hi);
        lo = hi;
        hi = next;
    }
    hi.to_prec(prec).check("hyper_rl")
}

/// ℛ^L through the Gauss series.
pub fn hyper_rl_series(pair: &RadialPair) -> Result<Real> {
    pair.validate()?;
    let one = pair.n.one_like();
    let b = &pair.n + &pair.n_prime + 1;
    let c = &pair.n + (pair.l as i32 + 2);
    hyp2f1_series(&one, &b, &c, &pair.x())
}

/// ℛ^L: recurrence when its denominators are safe, series otherwise.
pub fn hyper_rl(pair: &RadialPair) -> Result<Real> {
    match hyper_rl_recurrence(pair) {
        Err(Error::DegenerateDenominator { .. }) => {
            log::debug!("hyper-radial recurrence degenerate, using series");
            hyper_rl_series(pair)
        }
        other => other,
    }
}

/// Slater radial integral
///
/// ```text
/// R^L = ∫∫ r₁ⁿ r₂^n' e^(−ζr₁−ζ'r₂) r<^L / r>^(L+1) dr₁ dr₂
///     = Γ(n+n'+1)/(ζ+ζ')^(n+n'+1) · [ℛ^L_{n,n'}(ζ,ζ')/(n+L+1) + ℛ^L_{n',n}(ζ',ζ)/(n'+L+1)]
/// ```
pub fn slater_radial(pair: &RadialPair) -> Result<Real> {
    pair.validate()?;
    let l = pair.l as i32;
    let inner = hyper_rl(pair)?;
    let outer = hyper_rl(&pair.swapped())?;
    let total = &pair.n + &pair.n_prime + 1;
    let front = gamma(&total)? / (&pair.zeta + &pair.zeta_prime).pow(&total);
    let brace = inner / (&pair.n + (l + 1)) + outer / (&pair.n_prime + (l + 1));
    (front * brace).check("slater_radial")
}
