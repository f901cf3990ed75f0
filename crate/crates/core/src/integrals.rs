//! Matrix elements over spinor bases: overlap, nuclear attraction, the
//! kinetic coupling block and the two-electron Coulomb/exchange tensors.

use std::collections::HashMap;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::basis::{BasisSet, Radial};
use crate::error::{Error, Result};
use crate::hyperradial::{slater_radial, RadialPair};
use crate::linalg::{BlockMatrix, Matrix};
use crate::precision::Real;

const BETAS: [i32; 2] = [1, -1];

/// Overlap, nuclear attraction and kinetic blocks.
#[derive(Debug, Clone)]
pub struct OneElectronBlocks {
    pub s: BlockMatrix,
    pub v: BlockMatrix,
    pub pi: BlockMatrix,
}

impl OneElectronBlocks {
    pub fn new(basis: &BasisSet) -> Result<Self> {
        Ok(OneElectronBlocks {
            s: overlap_block(basis)?,
            v: nuclear_block(basis)?,
            pi: kinetic_block(basis)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.s.dim()
    }

    /// Dirac one-electron matrix with the rest mass subtracted:
    /// `[[V, cΠ], [cΠᵀ, V − 2c²S]]`.
    pub fn hamiltonian(&self, c: &Real) -> Result<BlockMatrix> {
        let c2 = c.square() * 2;
        let ss = self.v.block(-1, -1).sub(&self.s.block(-1, -1).scale(&c2))?;
        Ok(BlockMatrix::new(
            self.v.block(1, 1).clone(),
            self.pi.block(1, -1).scale(c),
            self.pi.block(-1, 1).scale(c),
            ss,
        ))
    }
}

fn diagonal_blocks(basis: &BasisSet, f: impl Fn(&Radial, &Radial) -> Result<Real>) -> Result<BlockMatrix> {
    let m = basis.len();
    let like = basis.ctx.zero();
    let mut out = Vec::new();
    for beta in BETAS {
        let radials: Vec<Radial> = basis.spinors.iter().map(|s| s.radial(beta)).collect();
        let mut blk = Matrix::zeros(&like, m, m);
        for p in 0..m {
            for q in 0..=p {
                let v = f(&radials[p], &radials[q])?;
                blk[(q, p)] = v.clone();
                blk[(p, q)] = v;
            }
        }
        out.push(blk);
    }
    let zero = Matrix::zeros(&like, m, m);
    let ss = out.pop().expect("two blocks");
    let ll = out.pop().expect("two blocks");
    Ok(BlockMatrix::new(ll, zero.clone(), zero, ss))
}

/// `S^{ββ}_{pq} = ∫ f_p^β f_q^β dr`; the mixed blocks vanish.
pub fn overlap_block(basis: &BasisSet) -> Result<BlockMatrix> {
    diagonal_blocks(basis, |a, b| a.product_moment(b, 0))
}

/// `V^{ββ}_{pq} = −Z ∫ f_p^β f_q^β r⁻¹ dr`.
pub fn nuclear_block(basis: &BasisSet) -> Result<BlockMatrix> {
    let charge = basis.charge.clone();
    diagonal_blocks(basis, |a, b| {
        if charge.is_zero() {
            return Ok(charge.zero_like());
        }
        Ok(-(&charge * a.product_moment(b, -1)?))
    })
}

/// `(−d/dr + κ/r)` applied to a radial function, as a new term list.
fn kinetic_image(g: &Radial, kappa: i32) -> Radial {
    let mut terms = Vec::with_capacity(2 * g.terms.len());
    for (c, p) in &g.terms {
        terms.push((c * (-p + kappa), p - 1));
        terms.push((c * &g.zeta, p.clone()));
    }
    Radial {
        terms,
        zeta: g.zeta.clone(),
    }
}

/// `Π^{+−}_{pq} = ∫ f_p^+ (−d/dr + κ/r) f_q^− dr` and `Π^{−+} = (Π^{+−})ᵀ`.
///
/// Integrating by parts shows `Π^{−+}_{pq} = ∫ f_p^− (d/dr + κ/r) f_q^+ dr`
/// equals the transpose. The overall sign only flips the small-component
/// coefficients and leaves every eigenvalue unchanged.
pub fn kinetic_block(basis: &BasisSet) -> Result<BlockMatrix> {
    let m = basis.len();
    let like = basis.ctx.zero();
    let large: Vec<Radial> = basis.spinors.iter().map(|s| s.radial(1)).collect();
    let small_img: Vec<Radial> = basis
        .spinors
        .iter()
        .map(|s| kinetic_image(&s.radial(-1), s.kappa))
        .collect();
    let mut ls = Matrix::zeros(&like, m, m);
    for p in 0..m {
        for q in 0..m {
            ls[(p, q)] = large[p].product_moment(&small_img[q], 0)?;
        }
    }
    let sl = ls.transpose();
    let zero = Matrix::zeros(&like, m, m);
    Ok(BlockMatrix::new(zero.clone(), ls, sl, zero))
}

/// A radial product density `Σ c r^power e^(−η r)`, one term at a time.
#[derive(Clone)]
struct DensityTerm {
    coef: Real,
    key: usize,
}

/// Coulomb tensor `J^{ββ'}_{pqrs} = ∫∫ f_p^β f_q^β(1) r>⁻¹ f_r^{β'} f_s^{β'}(2)`
/// restricted to the monopole. The exchange tensor is the index permutation
/// `K^{ββ'}_{pqrs} = J^{ββ'}_{psrq}`.
#[derive(Debug, Clone)]
pub struct EriTensor {
    m: usize,
    j: [Vec<Real>; 4],
    primitives: usize,
}

impl EriTensor {
    fn offset(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.m + q) * self.m + r) * self.m + s
    }

    fn slot(beta: i32, beta_prime: i32) -> usize {
        2 * BlockMatrix::slot(beta) + BlockMatrix::slot(beta_prime)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// Number of distinct radial Slater integrals evaluated.
    pub fn primitive_count(&self) -> usize {
        self.primitives
    }

    pub fn j(&self, beta: i32, beta_prime: i32, p: usize, q: usize, r: usize, s: usize) -> &Real {
        &self.j[Self::slot(beta, beta_prime)][self.offset(p, q, r, s)]
    }

    pub fn k(&self, beta: i32, beta_prime: i32, p: usize, q: usize, r: usize, s: usize) -> &Real {
        self.j(beta, beta_prime, p, s, r, q)
    }
}

/// Builds the two-electron tensors.
///
/// Each product `f_p^β f_q^β` expands into terms `c r^P e^(−(ζ_p+ζ_q) r)`;
/// distinct (P, ζ_p+ζ_q) densities are collected once and the Slater
/// integrals between them are evaluated in parallel.
pub fn eri_tensor(basis: &BasisSet) -> Result<EriTensor> {
    let m = basis.len();
    let radials: [Vec<Radial>; 2] = BETAS.map(|b| basis.spinors.iter().map(|s| s.radial(b)).collect());

    let mut keys: HashMap<(String, String), usize> = HashMap::new();
    let mut densities: Vec<(Real, Real)> = Vec::new();
    // expansion[β][p*m+q] -> terms
    let mut expansion: [Vec<Vec<DensityTerm>>; 2] = [Vec::new(), Vec::new()];
    for (bi, rad) in radials.iter().enumerate() {
        for p in 0..m {
            for q in 0..m {
                let eta = &rad[p].zeta + &rad[q].zeta;
                let mut terms = Vec::new();
                for (c1, p1) in &rad[p].terms {
                    for (c2, p2) in &rad[q].terms {
                        let power = p1 + p2;
                        let id = (power.to_full_string(), eta.to_full_string());
                        let next = densities.len();
                        let key = *keys.entry(id).or_insert(next);
                        if key == next {
                            densities.push((power, eta.clone()));
                        }
                        terms.push(DensityTerm { coef: c1 * c2, key });
                    }
                }
                expansion[bi].push(terms);
            }
        }
    }

    let d = densities.len();
    let tasks: Vec<(usize, usize)> = (0..d).flat_map(|a| (a..d).map(move |b| (a, b))).collect();
    let values: Vec<Result<Real>> = tasks
        .par_iter()
        .map(|&(a, b)| {
            let (na, ea) = &densities[a];
            let (nb, eb) = &densities[b];
            let pair = RadialPair::new(na.clone(), nb.clone(), ea.clone(), eb.clone(), 0)?;
            slater_radial(&pair)
        })
        .collect();
    let zero = basis.ctx.zero();
    let mut table = vec![zero.clone(); d * d];
    for (&(a, b), v) in tasks.iter().zip(values) {
        let v = v?;
        table[a * d + b] = v.clone();
        table[b * d + a] = v;
    }

    let mut j: [Vec<Real>; 4] = std::array::from_fn(|_| Vec::new());
    for (bi, &beta) in BETAS.iter().enumerate() {
        for (bj, &beta_p) in BETAS.iter().enumerate() {
            let slot = EriTensor::slot(beta, beta_p);
            let mut out = Vec::with_capacity(m * m * m * m);
            for pq in 0..m * m {
                for rs in 0..m * m {
                    let mut acc = zero.clone();
                    for t1 in &expansion[bi][pq] {
                        for t2 in &expansion[bj][rs] {
                            acc += &t1.coef * &t2.coef * &table[t1.key * d + t2.key];
                        }
                    }
                    out.push(acc);
                }
            }
            j[slot] = out;
        }
    }
    if j.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NotFinite("eri_tensor"));
    }
    Ok(EriTensor {
        m,
        j,
        primitives: tasks.len(),
    })
}

/// Plain-text dump of S, V, Π (dense 2M×2M) and the Coulomb tensor, one
/// full-precision value per entry, row-major.
pub fn write_debug_dump<W: Write>(out: &mut W, blocks: &OneElectronBlocks, eri: &EriTensor) -> io::Result<()> {
    for (name, mat) in [("S", &blocks.s), ("V", &blocks.v), ("PI", &blocks.pi)] {
        let dense = mat.assemble();
        writeln!(out, "# {name} {}x{}", dense.rows(), dense.cols())?;
        for i in 0..dense.rows() {
            let row: Vec<String> = (0..dense.cols()).map(|j| dense[(i, j)].to_full_string()).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
    }
    let m = eri.dim();
    for beta in BETAS {
        for beta_p in BETAS {
            writeln!(out, "# J beta={beta} beta'={beta_p} {m}^4")?;
            for p in 0..m {
                for q in 0..m {
                    let row: Vec<String> = (0..m)
                        .flat_map(|r| (0..m).map(move |s| (r, s)))
                        .map(|(r, s)| eri.j(beta, beta_p, p, q, r, s).to_full_string())
                        .collect();
                    writeln!(out, "{}", row.join(" "))?;
                }
            }
        }
    }
    Ok(())
}
