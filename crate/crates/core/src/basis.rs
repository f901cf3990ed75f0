//! Slater-type spinor orbitals.
//!
//! A spinor carries two radial functions
//! `f^β(r) = (A^β r^n + ζ B^β r^(n+1)) e^(-ζr)` for β = +1 (large) and
//! β = −1 (small), tied together by the first-order coupling
//!
//! ```text
//! d/dr f^β = −β κ/r f^β + ((β N − n − δ)/r + ζ) f^(−β),   δ = [κ > 0]
//! ```
//!
//! Radial functions are in the reduced form (measure dr), so that
//! `⟨f|g⟩ = ∫ f g dr`.

use crate::error::{Error, Result};
use crate::hyperradial::degeneracy_threshold;
use crate::precision::{moment_integral, PrecisionContext, Real};

/// Non-integer principal number from the z-rule,
/// `n* = √(κ² + (Z/c)² (2z − 1))`.
///
/// z = 1/2 gives n* = |κ|; z = 0 gives the point-nucleus Dirac exponent
/// γ = √(κ² − (Z/c)²) for κ = ±1.
pub fn principal_quantum(z_param: &Real, charge: &Real, kappa: i32, c: &Real) -> Result<Real> {
    if kappa == 0 {
        return Err(Error::domain("principal_quantum", "kappa must be nonzero"));
    }
    let alpha_z = charge / c;
    let radicand = z_param.like(kappa * kappa) + alpha_z.square() * (z_param * 2 - 1);
    if !radicand.is_finite() || radicand <= 0.0 {
        return Err(Error::InvalidZParameter {
            z: z_param.to_sci(12),
            charge: charge.to_sci(12),
            kappa,
        });
    }
    Ok(radicand.sqrt())
}

/// Radial coefficients (A⁺, B⁺, A⁻, B⁻) and the apparent principal number.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub a_plus: Real,
    pub b_plus: Real,
    pub a_minus: Real,
    pub b_minus: Real,
    pub n_apparent: Real,
}

/// Rows of the homogeneous system in (A⁺, B⁺, A⁻, B⁻) obtained by matching
/// powers r^(n−1), r^n, r^(n+1) of the coupling for β = ±1.
fn coupling_rows(n: &Real, kappa: i32, big_n: &Real) -> Vec<[Real; 4]> {
    let zero = n.zero_like();
    let one = n.one_like();
    let delta = i32::from(kappa > 0);
    let mut rows = Vec::with_capacity(6);
    for beta in [1i32, -1] {
        let m = big_n * beta - n - delta;
        let bk = beta * kappa;
        let (a_self, b_self, a_other, b_other) = if beta == 1 { (0, 1, 2, 3) } else { (2, 3, 0, 1) };

        let mut low: [Real; 4] = std::array::from_fn(|_| zero.clone());
        low[a_self] = n + bk;
        low[a_other] = -&m;
        rows.push(low);

        let mut mid: [Real; 4] = std::array::from_fn(|_| zero.clone());
        mid[b_self] = n + (1 + bk);
        mid[a_self] = -&one;
        mid[b_other] = -&m;
        mid[a_other] = -&one;
        rows.push(mid);

        let mut high: [Real; 4] = std::array::from_fn(|_| zero.clone());
        high[b_self] = one.clone();
        high[b_other] = one.clone();
        rows.push(high);
    }
    rows
}

/// Null vector of a 6×4 system by Gaussian elimination with partial
/// pivoting. Returns `None` when the system has full column rank.
fn null_vector(mut rows: Vec<[Real; 4]>, tol: &Real) -> Option<[Real; 4]> {
    let zero = rows[0][0].zero_like();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for col in 0..4 {
        let best = (r..rows.len()).max_by(|&i, &j| {
            rows[i][col]
                .abs()
                .partial_cmp(&rows[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let Some(best) = best else { break };
        if rows[best][col].abs() <= *tol {
            continue;
        }
        rows.swap(r, best);
        for i in 0..rows.len() {
            if i == r || rows[i][col].is_zero() {
                continue;
            }
            let f = &rows[i][col] / &rows[r][col];
            let pivot = rows[r].clone();
            for (x, p) in rows[i][col..].iter_mut().zip(&pivot[col..]) {
                *x -= &f * p;
            }
        }
        pivots.push((r, col));
        r += 1;
    }
    if pivots.len() == 4 {
        return None;
    }
    let free = (0..4).find(|c| !pivots.iter().any(|&(_, pc)| pc == *c))?;
    let mut v: [Real; 4] = std::array::from_fn(|_| zero.clone());
    v[free] = zero.one_like();
    for &(row, col) in pivots.iter().rev() {
        let mut acc = zero.clone();
        for k in col + 1..4 {
            acc += &rows[row][k] * &v[k];
        }
        v[col] = -acc / &rows[row][col];
    }
    Some(v)
}

/// Solves the coupling for (A⁺, B⁺, A⁻, B⁻) and N_{nκ}.
///
/// Eliminating A⁺/A⁻ between the two r^(n−1) equations fixes
/// `N² = κ² + (2n+1) δ`; the positive root is used. The returned vector is
/// scaled so that its first nonzero entry is 1.
pub fn couple_components(n_star: &Real, kappa: i32) -> Result<Coupling> {
    if !n_star.is_finite() || *n_star <= 0.0 {
        return Err(Error::NonPositiveArgument {
            function: "couple_components",
            value: n_star.to_sci(20),
        });
    }
    if kappa == 0 {
        return Err(Error::domain("couple_components", "kappa must be nonzero"));
    }
    let delta = i32::from(kappa > 0);
    let big_n = (n_star.like(kappa * kappa) + (n_star * 2 + 1) * delta).sqrt();
    let rows = coupling_rows(n_star, kappa, &big_n);
    let tol = degeneracy_threshold(n_star) * n_star.clone().max(n_star.one_like());
    let v = null_vector(rows, &tol).ok_or(Error::NoConsistentCoupling { kappa })?;
    let lead = v
        .iter()
        .find(|x| x.abs() > tol)
        .cloned()
        .ok_or(Error::NoConsistentCoupling { kappa })?;
    let [a_plus, b_plus, a_minus, b_minus] = v.map(|x| x / &lead);
    Ok(Coupling {
        a_plus,
        b_plus,
        a_minus,
        b_minus,
        n_apparent: big_n,
    })
}

/// Radial function `Σ c_i r^(p_i) e^(−ζr)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Radial {
    pub terms: Vec<(Real, Real)>,
    pub zeta: Real,
}

impl Radial {
    pub fn eval(&self, r: &Real) -> Real {
        let e = (-(&self.zeta * r)).exp();
        let mut acc = r.zero_like();
        for (c, p) in &self.terms {
            acc += c * r.pow(p);
        }
        acc * e
    }

    pub fn derivative(&self, r: &Real) -> Real {
        let e = (-(&self.zeta * r)).exp();
        let mut acc = r.zero_like();
        for (c, p) in &self.terms {
            acc += c * (p * r.pow(&(p - 1)) - &self.zeta * r.pow(p));
        }
        acc * e
    }

    /// `∫ f g r^shift dr` in closed form.
    pub fn product_moment(&self, other: &Radial, shift: i32) -> Result<Real> {
        let eta = &self.zeta + &other.zeta;
        let mut acc = eta.zero_like();
        for (c1, p1) in &self.terms {
            for (c2, p2) in &other.terms {
                acc += c1 * c2 * moment_integral(&(p1 + p2 + shift), &eta)?;
            }
        }
        Ok(acc)
    }
}

/// One Slater-type spinor orbital.
#[derive(Debug, Clone, PartialEq)]
pub struct Spinor {
    pub kappa: i32,
    pub n_star: Real,
    pub zeta: Real,
    pub a_plus: Real,
    pub b_plus: Real,
    pub a_minus: Real,
    pub b_minus: Real,
    pub n_apparent: Real,
    pub label: String,
}

impl Spinor {
    /// Coupled but unnormalized spinor.
    pub fn coupled(n_star: Real, zeta: Real, kappa: i32, label: impl Into<String>) -> Result<Self> {
        if !zeta.is_finite() || zeta <= 0.0 {
            return Err(Error::NonPositiveArgument {
                function: "spinor exponent",
                value: zeta.to_sci(20),
            });
        }
        let cp = couple_components(&n_star, kappa)?;
        Ok(Spinor {
            kappa,
            n_star,
            zeta,
            a_plus: cp.a_plus,
            b_plus: cp.b_plus,
            a_minus: cp.a_minus,
            b_minus: cp.b_minus,
            n_apparent: cp.n_apparent,
            label: label.into(),
        })
    }

    /// Large (β = +1) or small (β = −1) radial function.
    pub fn radial(&self, beta: i32) -> Radial {
        let (a, b) = if beta > 0 {
            (&self.a_plus, &self.b_plus)
        } else {
            (&self.a_minus, &self.b_minus)
        };
        let mut terms = Vec::with_capacity(2);
        if !a.is_zero() {
            terms.push((a.clone(), self.n_star.clone()));
        }
        if !b.is_zero() {
            terms.push((&self.zeta * b, &self.n_star + 1));
        }
        Radial {
            terms,
            zeta: self.zeta.clone(),
        }
    }

    /// `|d f^β/dr − RHS|` of the coupling relation at radius `r`.
    pub fn coupling_residual(&self, r: &Real, beta: i32) -> Real {
        let own = self.radial(beta);
        let other = self.radial(-beta);
        let delta = i32::from(self.kappa > 0);
        let m = &self.n_apparent * beta - &self.n_star - delta;
        let rhs = -(own.eval(r) * (beta * self.kappa)) / r + (m / r + &self.zeta) * other.eval(r);
        (own.derivative(r) - rhs).abs()
    }

    /// Total norm `Σ_β ∫ (f^β)² dr`.
    pub fn norm_squared(&self) -> Result<Real> {
        let p = self.radial(1);
        let m = self.radial(-1);
        Ok(p.product_moment(&p, 0)? + m.product_moment(&m, 0)?)
    }

    fn scaled(&self, s: &Real) -> Spinor {
        Spinor {
            a_plus: &self.a_plus * s,
            b_plus: &self.b_plus * s,
            a_minus: &self.a_minus * s,
            b_minus: &self.b_minus * s,
            ..self.clone()
        }
    }
}

/// Rescales the coefficients to unit total (large + small) norm.
pub fn normalize(spinor: &Spinor) -> Result<Spinor> {
    let coeffs = [&spinor.a_plus, &spinor.b_plus, &spinor.a_minus, &spinor.b_minus];
    if coeffs.iter().all(|c| c.is_zero()) {
        return Err(Error::ZeroFunction);
    }
    let n2 = spinor.norm_squared()?;
    let floor = spinor.zeta.like(2).powi(-(spinor.zeta.prec() as i32));
    if !n2.is_finite() || n2 <= floor {
        return Err(Error::ZeroFunction);
    }
    Ok(spinor.scaled(&n2.sqrt().recip()))
}

/// Ordered spinor basis together with the physical context.
#[derive(Debug, Clone)]
pub struct BasisSet {
    pub spinors: Vec<Spinor>,
    pub charge: Real,
    pub c: Real,
    pub z_param: Real,
    pub ctx: PrecisionContext,
}

/// Exponents of one shell: ζ and, except for the minimal basis, ζ′.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellExponents {
    pub zeta: Real,
    pub zeta_prime: Option<Real>,
}

impl ShellExponents {
    pub fn pair(zeta: Real, zeta_prime: Real) -> Self {
        ShellExponents {
            zeta,
            zeta_prime: Some(zeta_prime),
        }
    }

    pub fn single(zeta: Real) -> Self {
        ShellExponents { zeta, zeta_prime: None }
    }
}

/// Builds `1s(ζ) 1s′(ζ′) 2s(ζ) 2s′(ζ′) …` with n*_k = n*₁ + (k − 1).
///
/// `exponents` holds one entry per shell. Only κ = −1 shells are built.
pub fn build_basis(
    ctx: &PrecisionContext,
    charge: &Real,
    z_param: &Real,
    shells: &[u32],
    exponents: &[ShellExponents],
    c: &Real,
) -> Result<BasisSet> {
    if shells.is_empty() {
        return Err(Error::domain("build_basis", "no shells requested"));
    }
    if shells.len() != exponents.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} shells but {} exponent sets",
            shells.len(),
            exponents.len()
        )));
    }
    let kappa = -1;
    let charge = ctx.adopt(charge);
    let z_param = ctx.adopt(z_param);
    let c = ctx.adopt(c);
    let n1 = principal_quantum(&z_param, &charge, kappa, &c)?;
    let mut spinors = Vec::new();
    for (&k, ex) in shells.iter().zip(exponents) {
        if k == 0 {
            return Err(Error::domain("build_basis", "shell indices start at 1"));
        }
        let n = &n1 + (k as i32 - 1);
        let mut push = |zeta: &Real, prime: bool| -> Result<()> {
            let label = format!("{k}s{}", if prime { "'" } else { "" });
            let sp = Spinor::coupled(n.clone(), ctx.adopt(zeta), kappa, label)?;
            spinors.push(normalize(&sp)?);
            Ok(())
        };
        push(&ex.zeta, false)?;
        if let Some(zp) = &ex.zeta_prime {
            push(zp, true)?;
        }
    }
    let tol = degeneracy_threshold(&charge);
    for i in 0..spinors.len() {
        for j in 0..i {
            let (a, b) = (&spinors[i], &spinors[j]);
            let dn = (&a.n_star - &b.n_star).abs();
            let dz = (&a.zeta - &b.zeta).abs() / (&a.zeta + &b.zeta);
            if dn <= tol && dz <= tol {
                return Err(Error::DuplicateBasisFunction(j, i));
            }
        }
    }
    Ok(BasisSet {
        spinors,
        charge,
        c,
        z_param,
        ctx: *ctx,
    })
}

impl BasisSet {
    /// Basis of `size` ∈ {1, 2, 4, 6, 8} functions sharing (ζ, ζ′) across
    /// shells; `size = 1` uses ζ only.
    pub fn shared(
        ctx: &PrecisionContext,
        charge: &Real,
        z_param: &Real,
        size: usize,
        zeta: &Real,
        zeta_prime: Option<&Real>,
        c: &Real,
    ) -> Result<Self> {
        let (shells, exps) = shared_layout(size, zeta, zeta_prime)?;
        build_basis(ctx, charge, z_param, &shells, &exps, c)
    }

    /// Number of radial functions M (the Fock matrix has dimension 2M).
    pub fn len(&self) -> usize {
        self.spinors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spinors.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.spinors.iter().map(|s| s.label.clone()).collect()
    }
}

/// Shell list and per-shell exponents for a shared-exponent basis.
pub fn shared_layout(size: usize, zeta: &Real, zeta_prime: Option<&Real>) -> Result<(Vec<u32>, Vec<ShellExponents>)> {
    match (size, zeta_prime) {
        (1, _) => Ok((vec![1], vec![ShellExponents::single(zeta.clone())])),
        (s, Some(zp)) if s >= 2 && s % 2 == 0 => {
            let k = (s / 2) as u32;
            Ok((
                (1..=k).collect(),
                (1..=k)
                    .map(|_| ShellExponents::pair(zeta.clone(), zp.clone()))
                    .collect(),
            ))
        }
        (s, None) if s >= 2 => Err(Error::domain(
            "basis layout",
            format!("basis size {s} needs both exponents"),
        )),
        (s, _) => Err(Error::domain(
            "basis layout",
            format!("basis size {s} must be 1 or even"),
        )),
    }
}
