//! Rayleigh-Ritz optimization of orbital exponents by a bounded
//! Nelder-Mead simplex, and the staged protocol 1 → 2 → 4 (optimized)
//! followed by frozen larger bases.

use rayon::prelude::*;
use serde::Serialize;

use crate::basis::BasisSet;
use crate::error::{Error, Result};
use crate::precision::{PrecisionContext, Real};
use crate::scf::{scf_solve, ScfConfig, ScfResult};

/// Largest basis size whose exponents are optimized by [`staged_optimize`].
pub const LAST_OPTIMIZED_STAGE: usize = 4;

/// Everything needed to evaluate E(ζ, ζ′) for one basis size.
#[derive(Debug, Clone)]
pub struct OptimizationTask {
    pub ctx: PrecisionContext,
    pub charge: Real,
    pub z_param: Real,
    pub c: Real,
    /// Basis size N (1 or even).
    pub size: usize,
    /// Start point: [ζ] for N = 1, [ζ, ζ′] otherwise.
    pub seeds: Vec<f64>,
    pub bounds: (f64, f64),
    pub scf: ScfConfig,
    /// Simplex diameter at which a run stops.
    pub opt_tol: f64,
    /// Evaluation budget per simplex run.
    pub max_evals: usize,
    /// Fresh simplices started from the best vertex after the first run.
    pub restarts: usize,
}

impl OptimizationTask {
    /// Task with the default seeds ζ = Z − 5/16, ζ′ = 2Z and bounds
    /// (10⁻³, 10Z + 10).
    pub fn new(ctx: PrecisionContext, charge: &Real, z_param: &Real, c: &Real, size: usize) -> Self {
        let zf = charge.to_f64();
        let seeds = if size == 1 {
            vec![zf - 5.0 / 16.0]
        } else {
            vec![zf - 5.0 / 16.0, 2.0 * zf]
        };
        OptimizationTask {
            ctx,
            charge: ctx.adopt(charge),
            z_param: ctx.adopt(z_param),
            c: ctx.adopt(c),
            size,
            seeds,
            bounds: default_bounds(zf),
            scf: ScfConfig::default(),
            opt_tol: 1e-10,
            max_evals: 2000,
            restarts: 1,
        }
    }

    pub fn dimension(&self) -> usize {
        if self.size == 1 {
            1
        } else {
            2
        }
    }

    /// Basis at a trial point.
    pub fn basis(&self, x: &[f64]) -> Result<BasisSet> {
        let zeta = self.ctx.from_f64(x[0]);
        let zeta_prime = x.get(1).map(|v| self.ctx.from_f64(*v));
        BasisSet::shared(
            &self.ctx,
            &self.charge,
            &self.z_param,
            self.size,
            &zeta,
            zeta_prime.as_ref(),
            &self.c,
        )
    }

    /// Signed SCF energy at a trial point; identical to running
    /// [`scf_solve`] on [`Self::basis`].
    pub fn objective(&self, x: &[f64]) -> Result<Real> {
        let basis = self.basis(x)?;
        Ok(scf_solve(&basis, &self.scf)?.energy_total)
    }
}

pub fn default_bounds(charge: f64) -> (f64, f64) {
    (1e-3, 10.0 * charge + 10.0)
}

/// What happened at one objective evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub evaluation: usize,
    pub point: Vec<f64>,
    /// `None` when the SCF failed at this point.
    #[serde(serialize_with = "crate::cli::ser_opt_real")]
    pub energy: Option<Real>,
    pub step: &'static str,
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub exponents: Vec<f64>,
    pub energy: Real,
    pub evaluations: usize,
    pub trace: Vec<TraceRecord>,
    pub warnings: Vec<String>,
    /// Points where the SCF failed, with the reason.
    pub failures: Vec<(Vec<f64>, String)>,
}

#[derive(Clone)]
struct Vertex {
    x: Vec<f64>,
    e: Option<Real>,
}

fn better(a: &Option<Real>, b: &Option<Real>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        _ => false,
    }
}

struct Run<'a> {
    task: &'a OptimizationTask,
    evaluations: usize,
    trace: Vec<TraceRecord>,
    failures: Vec<(Vec<f64>, String)>,
}

impl Run<'_> {
    fn clamp(&self, x: &mut [f64]) {
        let (lo, hi) = self.task.bounds;
        for v in x.iter_mut() {
            *v = v.clamp(lo, hi);
        }
    }

    fn record(&mut self, x: &[f64], r: Result<Real>, step: &'static str) -> Option<Real> {
        self.evaluations += 1;
        let e = match r {
            Ok(e) => Some(e),
            Err(err) => {
                log::warn!("SCF failed at {x:?}: {err}");
                self.failures.push((x.to_vec(), err.to_string()));
                None
            }
        };
        self.trace.push(TraceRecord {
            evaluation: self.evaluations,
            point: x.to_vec(),
            energy: e.clone(),
            step,
            accepted: false,
        });
        e
    }

    fn eval(&mut self, x: &[f64], step: &'static str) -> Option<Real> {
        let r = self.task.objective(x);
        self.record(x, r, step)
    }

    fn accept_last(&mut self) {
        if let Some(t) = self.trace.last_mut() {
            t.accepted = true;
        }
    }

    fn initial_simplex(&mut self, start: &[f64], start_e: Option<Real>) -> Vec<Vertex> {
        let mut simplex = vec![Vertex {
            x: start.to_vec(),
            e: start_e,
        }];
        for i in 0..start.len() {
            let mut x = start.to_vec();
            let step = (0.05 * x[i].abs()).max(0.025);
            x[i] += step;
            self.clamp(&mut x);
            if x[i] == start[i] {
                x[i] -= step;
                self.clamp(&mut x);
            }
            let e = self.eval(&x, "init");
            simplex.push(Vertex { x, e });
        }
        simplex
    }

    fn diameter(simplex: &[Vertex]) -> f64 {
        let best = &simplex[0].x;
        simplex[1..]
            .iter()
            .map(|v| v.x.iter().zip(best).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    fn sort(simplex: &mut [Vertex]) {
        simplex.sort_by(|a, b| {
            if better(&a.e, &b.e) {
                std::cmp::Ordering::Less
            } else if better(&b.e, &a.e) {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        });
    }

    /// One Nelder-Mead run; returns the best vertex.
    fn nelder_mead(&mut self, start: &[f64], start_e: Option<Real>) -> Vertex {
        let n = start.len();
        let mut simplex = self.initial_simplex(start, start_e);
        let budget = self.evaluations + self.task.max_evals;
        loop {
            Self::sort(&mut simplex);
            if Self::diameter(&simplex) < self.task.opt_tol || self.evaluations >= budget {
                break;
            }
            let worst = simplex[n].clone();
            let mut centroid = vec![0.0; n];
            for v in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(&v.x) {
                    *c += x / n as f64;
                }
            }
            let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.x).map(|(c, w)| c + t * (c - w)).collect() };

            let mut xr = along(1.0);
            self.clamp(&mut xr);
            let er = self.eval(&xr, "reflect");
            if better(&er, &simplex[0].e) {
                let mut xe = along(2.0);
                self.clamp(&mut xe);
                let ee = self.eval(&xe, "expand");
                if better(&ee, &er) {
                    self.accept_last();
                    simplex[n] = Vertex { x: xe, e: ee };
                } else {
                    if let Some(t) = self.trace.iter_mut().rev().nth(1) {
                        t.accepted = true;
                    }
                    simplex[n] = Vertex { x: xr, e: er };
                }
                continue;
            }
            if better(&er, &simplex[n - 1].e) {
                self.accept_last();
                simplex[n] = Vertex { x: xr, e: er };
                continue;
            }
            let outside = better(&er, &worst.e);
            let mut xc = if outside { along(0.5) } else { along(-0.5) };
            self.clamp(&mut xc);
            let ec = self.eval(&xc, "contract");
            let target = if outside { &er } else { &worst.e };
            if better(&ec, target) {
                self.accept_last();
                simplex[n] = Vertex { x: xc, e: ec };
                continue;
            }
            // shrink toward the best vertex
            let best = simplex[0].x.clone();
            let points: Vec<Vec<f64>> = simplex[1..]
                .iter()
                .map(|v| v.x.iter().zip(&best).map(|(x, b)| b + 0.5 * (x - b)).collect())
                .collect();
            let task = self.task;
            let results: Vec<Result<Real>> = points.par_iter().map(|x| task.objective(x)).collect();
            for (i, (x, r)) in points.into_iter().zip(results).enumerate() {
                let e = self.record(&x, r, "shrink");
                self.accept_last();
                simplex[i + 1] = Vertex { x, e };
            }
        }
        Self::sort(&mut simplex);
        simplex.swap_remove(0)
    }
}

/// Nelder-Mead with restarts from the best vertex.
pub fn optimize_exponents(task: &OptimizationTask) -> Result<OptimizationResult> {
    if task.seeds.len() != task.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "basis size {} takes {} exponents, got {} seeds",
            task.size,
            task.dimension(),
            task.seeds.len()
        )));
    }
    let mut run = Run {
        task,
        evaluations: 0,
        trace: Vec::new(),
        failures: Vec::new(),
    };
    let mut seed = task.seeds.clone();
    run.clamp(&mut seed);
    let seed_e = match task.objective(&seed) {
        Ok(e) => e,
        Err(err) => {
            return Err(Error::ScfFailureAtTrialPoint {
                point: seed,
                reason: err.to_string(),
            })
        }
    };
    run.record(&seed, Ok(seed_e.clone()), "seed");
    run.accept_last();

    let mut best = run.nelder_mead(&seed, Some(seed_e.clone()));
    for _ in 0..task.restarts {
        let again = run.nelder_mead(&best.x.clone(), best.e.clone());
        if better(&again.e, &best.e) {
            best = again;
        }
    }
    let energy = match best.e {
        Some(e) => e,
        None => {
            return Err(Error::NoProgress {
                restarts: task.restarts,
            })
        }
    };

    let mut warnings = Vec::new();
    let (lo, hi) = task.bounds;
    let margin = 0.01 * (hi - lo);
    for (i, v) in best.x.iter().enumerate() {
        if *v - lo < margin || hi - *v < margin {
            let w = format!("exponent {i} = {v} lies within 1% of the bound ({lo}, {hi})");
            log::warn!("{w}");
            warnings.push(w);
        }
    }
    Ok(OptimizationResult {
        exponents: best.x,
        energy,
        evaluations: run.evaluations,
        trace: run.trace,
        warnings,
        failures: run.failures,
    })
}

/// Outcome of one stage of [`staged_optimize`].
#[derive(Debug, Clone)]
pub struct StageResult {
    pub size: usize,
    pub exponents: Vec<f64>,
    pub energy: Real,
    /// False when the exponents were carried over from an earlier stage.
    pub optimized: bool,
    pub evaluations: usize,
    pub warnings: Vec<String>,
    pub trace: Vec<TraceRecord>,
    /// Converged SCF at the stage exponents.
    pub scf: ScfResult,
}

/// Runs the stage plan (for example `[1, 2, 4, 6, 8]`).
///
/// Sizes up to 4 are optimized, each seeded from the previous two-exponent
/// optimum; larger sizes reuse the last optimized (ζ, ζ′) unchanged.
/// `template` supplies precision, physics and optimizer settings; its
/// `size` and `seeds` are overridden per stage.
pub fn staged_optimize(template: &OptimizationTask, stages: &[usize]) -> Result<Vec<StageResult>> {
    if stages.is_empty() || stages.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config(
            None,
            format!("stage plan {stages:?} must be strictly ascending"),
        ));
    }
    let mut out: Vec<StageResult> = Vec::new();
    let mut pair: Option<Vec<f64>> = None;
    for &size in stages {
        let mut task = template.clone();
        task.size = size;
        if size <= LAST_OPTIMIZED_STAGE {
            task.seeds = match (size, &pair) {
                (1, _) => vec![template.seeds[0]],
                (_, Some(p)) => p.clone(),
                (_, None) => {
                    OptimizationTask::new(template.ctx, &template.charge, &template.z_param, &template.c, size).seeds
                }
            };
            let r = optimize_exponents(&task)?;
            log::info!(
                "stage N={size}: exponents {:?}, E = {}",
                r.exponents,
                r.energy.to_fixed(15)
            );
            if size >= 2 {
                pair = Some(r.exponents.clone());
            }
            let scf = scf_solve(&task.basis(&r.exponents)?, &task.scf)?;
            out.push(StageResult {
                size,
                exponents: r.exponents,
                energy: r.energy,
                scf,
                optimized: true,
                evaluations: r.evaluations,
                warnings: r.warnings,
                trace: r.trace,
            });
        } else {
            let frozen = pair.clone().ok_or_else(|| {
                Error::config(
                    None,
                    format!("stage N={size} needs an optimized two-exponent stage before it"),
                )
            })?;
            let scf = scf_solve(&task.basis(&frozen)?, &task.scf)?;
            let energy = scf.energy_total.clone();
            log::info!(
                "stage N={size}: frozen exponents {frozen:?}, E = {}",
                energy.to_fixed(15)
            );
            out.push(StageResult {
                size,
                exponents: frozen,
                energy,
                optimized: false,
                evaluations: 1,
                warnings: Vec::new(),
                trace: Vec::new(),
                scf,
            });
        }
    }
    Ok(out)
}
