//! Closed-shell Dirac-Hartree-Fock iteration for one doubly occupied s1/2
//! spinor.
//!
//! The Fock matrix is `F = h + G[R]` with `h` the rest-mass-shifted Dirac
//! one-electron matrix and
//!
//! ```text
//! G^{ββ}_{pq}  = 2 Σ_β' Σ_rs R^{β'β'}_{sr} J^{ββ'}_{pqrs} − K^{ββ}_{pq}
//! G^{ββ'}_{pq} = −K^{ββ'}_{pq}                                  (β ≠ β')
//! K^{ββ'}_{pq} = Σ_rs R^{ββ'}_{sr} K^{ββ'}_{pqrs}
//! ```
//!
//! where `R^{ββ'}_{sr} = c^β_s c^{β'}_r` is built from the occupied vector.
//! The total energy is `E = 2 tr(R h) + tr(R G[R])`.

use serde::Serialize;

use crate::basis::BasisSet;
use crate::error::{Error, Result};
use crate::integrals::{eri_tensor, EriTensor, OneElectronBlocks};
use crate::linalg::{jacobi_eigensolve, jacobi_eigensolve_from, lowdin_orthogonalizer, BlockMatrix, Matrix};
use crate::precision::{PrecisionContext, Real};

/// Electrons in the closed s1/2 shell.
pub const OCCUPATION: u32 = 2;

/// Nuclear charge from which linear damping switches on by default.
pub const DAMPING_CHARGE_THRESHOLD: f64 = 40.0;

/// Iteration controls.
#[derive(Debug, Clone)]
pub struct ScfConfig {
    /// Energy convergence threshold; `None` means `10^(-digits+15)`.
    pub tol_scf: Option<Real>,
    pub max_iter: usize,
    /// Mixing weight of the previous density; `None` picks 0.3 for
    /// Z ≥ 40 and 0 otherwise.
    pub damping: Option<f64>,
    /// Drop the electron-electron interaction entirely.
    pub two_electron: bool,
}

impl Default for ScfConfig {
    fn default() -> Self {
        ScfConfig {
            tol_scf: None,
            max_iter: 200,
            damping: None,
            two_electron: true,
        }
    }
}

impl ScfConfig {
    pub fn tolerance(&self, ctx: &PrecisionContext) -> Real {
        match &self.tol_scf {
            Some(t) => ctx.adopt(t),
            None => ctx.tolerance(15),
        }
    }

    pub fn damping_for(&self, charge: &Real) -> f64 {
        self.damping
            .unwrap_or(if *charge >= DAMPING_CHARGE_THRESHOLD { 0.3 } else { 0.0 })
    }
}

/// Component-resolved density `R^{ββ'}_{sr}` of the occupied spinor.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub r: BlockMatrix,
    pub occupation: u32,
}

impl DensityMatrix {
    pub fn zero(like: &Real, m: usize) -> Self {
        let z = Matrix::zeros(like, m, m);
        DensityMatrix {
            r: BlockMatrix::new(z.clone(), z.clone(), z.clone(), z),
            occupation: OCCUPATION,
        }
    }

    /// Outer product of a 2M coefficient vector (large first, then small).
    pub fn from_vector(c: &[Real]) -> Result<Self> {
        if !c.len().is_multiple_of(2) || c.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "coefficient vector of odd length {}",
                c.len()
            )));
        }
        let full = Matrix::from_fn(c.len(), c.len(), |i, j| &c[i] * &c[j]);
        Ok(DensityMatrix {
            r: BlockMatrix::from_dense(&full)?,
            occupation: OCCUPATION,
        })
    }

    pub fn dim(&self) -> usize {
        self.r.dim()
    }

    /// `tr(R X) = Σ_{ββ'} Σ_{sr} R^{ββ'}_{sr} X^{β'β}_{rs}`.
    pub fn trace_with(&self, x: &BlockMatrix) -> Result<Real> {
        let a = self.r.assemble();
        let b = x.assemble();
        if a.rows() != b.rows() {
            return Err(Error::DimensionMismatch(format!(
                "density {} against matrix {}",
                a.rows(),
                b.rows()
            )));
        }
        let n = a.rows();
        let mut acc = a[(0, 0)].zero_like();
        for i in 0..n {
            for j in 0..n {
                acc += &a[(i, j)] * &b[(j, i)];
            }
        }
        Ok(acc)
    }
}

fn check_dims(blocks: &OneElectronBlocks, eri: &EriTensor, r: &DensityMatrix) -> Result<()> {
    if blocks.dim() != eri.dim() || blocks.dim() != r.dim() {
        return Err(Error::DimensionMismatch(format!(
            "one-electron {} / two-electron {} / density {}",
            blocks.dim(),
            eri.dim(),
            r.dim()
        )));
    }
    Ok(())
}

/// The electron-interaction matrix `G[R]` (Coulomb minus exchange).
pub fn two_electron_matrix(eri: &EriTensor, r: &DensityMatrix) -> Result<BlockMatrix> {
    if eri.dim() != r.dim() {
        return Err(Error::DimensionMismatch(format!(
            "two-electron {} / density {}",
            eri.dim(),
            r.dim()
        )));
    }
    let m = eri.dim();
    let like = r.r.blocks[0][0][(0, 0)].zero_like();
    let coulomb_weight = like.like(r.occupation);
    let exchange_weight = like.like(r.occupation) / 2;
    let mut out: Vec<Matrix> = Vec::with_capacity(4);
    for beta in [1, -1] {
        for beta_p in [1, -1] {
            let rho = r.r.block(beta, beta_p);
            let mut g = Matrix::zeros(&like, m, m);
            for p in 0..m {
                for q in 0..m {
                    let mut k = like.clone();
                    for rr in 0..m {
                        for s in 0..m {
                            let w = &rho[(s, rr)];
                            if !w.is_zero() {
                                k += w * eri.k(beta, beta_p, p, q, rr, s);
                            }
                        }
                    }
                    let mut val = -(k * &exchange_weight);
                    if beta == beta_p {
                        let mut j = like.clone();
                        for b2 in [1, -1] {
                            let rho2 = r.r.block(b2, b2);
                            for rr in 0..m {
                                for s in 0..m {
                                    let w = &rho2[(s, rr)];
                                    if !w.is_zero() {
                                        j += w * eri.j(beta, b2, p, q, rr, s);
                                    }
                                }
                            }
                        }
                        val += j * &coulomb_weight;
                    }
                    g[(p, q)] = val;
                }
            }
            out.push(g);
        }
    }
    let ss = out.pop().expect("four blocks");
    let sl = out.pop().expect("four blocks");
    let ls = out.pop().expect("four blocks");
    let ll = out.pop().expect("four blocks");
    Ok(BlockMatrix::new(ll, ls, sl, ss))
}

fn add_blocks(a: &BlockMatrix, b: &BlockMatrix) -> Result<BlockMatrix> {
    BlockMatrix::from_dense(&a.assemble().add(&b.assemble())?)
}

/// `F = h + G[R]` with `h = [[V, cΠ], [cΠᵀ, V − 2c²S]]`.
pub fn assemble_fock(blocks: &OneElectronBlocks, eri: &EriTensor, r: &DensityMatrix, c: &Real) -> Result<BlockMatrix> {
    check_dims(blocks, eri, r)?;
    let h = blocks.hamiltonian(c)?;
    let g = two_electron_matrix(eri, r)?;
    add_blocks(&h, &g)
}

/// Closed-shell total energy `occ·tr(R h) + (occ/2)·tr(R G[R])`.
pub fn total_energy(r: &DensityMatrix, blocks: &OneElectronBlocks, eri: &EriTensor, c: &Real) -> Result<Real> {
    check_dims(blocks, eri, r)?;
    let h = blocks.hamiltonian(c)?;
    let g = two_electron_matrix(eri, r)?;
    let occ = f64::from(r.occupation);
    Ok(r.trace_with(&h)? * occ + r.trace_with(&g)? * (occ / 2.0))
}

/// Index of the lowest eigenvalue strictly above −c².
pub fn select_occupied(eigenvalues: &[Real], c: &Real) -> Result<usize> {
    let gap = -c.square();
    eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, e)| **e > gap)
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or(Error::NoElectronicState)
}

/// How many eigenvalues fall below and above −c².
pub fn branch_counts(eigenvalues: &[Real], c: &Real) -> (usize, usize) {
    let gap = -c.square();
    let below = eigenvalues.iter().filter(|e| **e < gap).count();
    (below, eigenvalues.len() - below)
}

/// One SCF step as reported to callers.
#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    #[serde(serialize_with = "crate::cli::ser_real")]
    pub energy: Real,
    #[serde(serialize_with = "crate::cli::ser_real")]
    pub delta: Real,
    #[serde(serialize_with = "crate::cli::ser_real")]
    pub occupied_eigenvalue: Real,
}

#[derive(Debug, Clone)]
pub struct ScfResult {
    /// Ascending eigenvalues of the final Fock matrix (2M of them).
    pub eigenvalues: Vec<Real>,
    /// Eigenvectors in the original basis as columns; `CᵀSC = I`.
    pub coefficients: Matrix,
    pub occupied: usize,
    pub density: DensityMatrix,
    pub energy_total: Real,
    /// `occ · tr(R G[R])`, so that `E = Σ_occ ε − E_2e / 2`.
    pub energy_two_electron: Real,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the energy rose after iteration 2.
    pub oscillatory: bool,
    pub history: Vec<IterationRecord>,
}

impl ScfResult {
    pub fn occupied_eigenvalue(&self) -> &Real {
        &self.eigenvalues[self.occupied]
    }

    pub fn occupied_vector(&self) -> Vec<Real> {
        self.coefficients.column(self.occupied)
    }

    pub fn branch_counts(&self, c: &Real) -> (usize, usize) {
        branch_counts(&self.eigenvalues, c)
    }
}

/// Builds all integrals for `basis` and iterates to self-consistency.
pub fn scf_solve(basis: &BasisSet, cfg: &ScfConfig) -> Result<ScfResult> {
    let blocks = OneElectronBlocks::new(basis)?;
    let eri = eri_tensor(basis)?;
    scf_iterate(&blocks, &eri, &basis.c, &basis.charge, &basis.ctx, cfg)
}

/// SCF on precomputed integrals.
///
/// Iteration 0 diagonalizes the bare one-electron matrix; every later
/// iteration rebuilds `F` from the (optionally damped) density, transforms
/// with `X = S^(-1/2)` and reselects the occupied state. Convergence needs
/// `|ΔE| < tol` on two consecutive iterations.
pub fn scf_iterate(
    blocks: &OneElectronBlocks,
    eri: &EriTensor,
    c: &Real,
    charge: &Real,
    ctx: &PrecisionContext,
    cfg: &ScfConfig,
) -> Result<ScfResult> {
    let m = blocks.dim();
    if eri.dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "one-electron {m} / two-electron {}",
            eri.dim()
        )));
    }
    let tol = cfg.tolerance(ctx);
    let damping = cfg.damping_for(charge);
    let h = blocks.hamiltonian(c)?;
    let h_dense = h.assemble();
    let x = lowdin_orthogonalizer(&blocks.s.assemble(), ctx)?;
    let zero = ctx.zero();

    let mut g_dense = Matrix::zeros(&zero, 2 * m, 2 * m);
    let mut basis_guess: Option<Matrix> = None;
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut prev_energy: Option<Real> = None;
    let mut small_steps = 0;
    let mut oscillatory = false;

    for iteration in 0..=cfg.max_iter {
        let fock = h_dense.add(&g_dense)?;
        let fprime = fock.congruence(&x)?;
        let eig = match &basis_guess {
            Some(v) => jacobi_eigensolve_from(&fprime, v, ctx)?,
            None => jacobi_eigensolve(&fprime, ctx)?,
        };
        let coefficients = x.matmul(&eig.vectors)?;
        let occupied = select_occupied(&eig.values, c)?;
        let vector = coefficients.column(occupied);
        let fresh = DensityMatrix::from_vector(&vector)?;

        let g_fresh = if cfg.two_electron {
            two_electron_matrix(eri, &fresh)?
        } else {
            BlockMatrix::from_dense(&Matrix::zeros(&zero, 2 * m, 2 * m))?
        };
        let occ = f64::from(fresh.occupation);
        let e_one = h_dense.bilinear(&vector, &vector)? * occ;
        let e_two = g_fresh.assemble().bilinear(&vector, &vector)? * (occ / 2.0);
        let energy = &e_one + &e_two;

        let delta = match &prev_energy {
            Some(p) => &energy - p,
            None => energy.clone(),
        };
        if iteration > 2 && delta > tol {
            oscillatory = true;
        }
        history.push(IterationRecord {
            iteration,
            energy: energy.clone(),
            delta: delta.clone(),
            occupied_eigenvalue: eig.values[occupied].clone(),
        });
        log::trace!(
            "scf iter {iteration}: E = {} dE = {}",
            energy.to_sci(20),
            delta.to_sci(3)
        );

        if prev_energy.is_some() && delta.abs() < tol {
            small_steps += 1;
        } else {
            small_steps = 0;
        }
        if small_steps >= 2 || (!cfg.two_electron && iteration >= 1) {
            return Ok(ScfResult {
                eigenvalues: eig.values,
                coefficients,
                occupied,
                density: fresh,
                energy_total: energy,
                energy_two_electron: e_two * 2,
                iterations: iteration,
                converged: true,
                oscillatory,
                history,
            });
        }
        prev_energy = Some(energy);

        let g_fresh_dense = g_fresh.assemble();
        // G is linear in R, so damping the density is damping G
        if damping > 0.0 && iteration > 0 {
            let keep = zero.like(1.0 - damping);
            let take = zero.like(damping);
            g_dense = g_fresh_dense.scale(&keep).add(&g_dense.scale(&take))?;
        } else {
            g_dense = g_fresh_dense;
        }
        basis_guess = Some(eig.vectors);
    }
    Err(Error::NoConvergence {
        what: "SCF iteration",
        iterations: cfg.max_iter,
    })
}

/// Energy of a basis at fixed exponents (full SCF).
pub fn energy_at(basis: &BasisSet, cfg: &ScfConfig) -> Result<Real> {
    Ok(scf_solve(basis, cfg)?.energy_total)
}
