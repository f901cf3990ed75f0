//! Configuration, run orchestration and report rendering for `dirac-scf`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::basis::{build_basis, ShellExponents};
use crate::error::{Error, Result};
use crate::integrals::{eri_tensor, write_debug_dump, OneElectronBlocks};
use crate::optimize::{staged_optimize, OptimizationTask, StageResult, TraceRecord};
use crate::precision::{PrecisionContext, Real};
use crate::scf::{scf_iterate, IterationRecord, ScfConfig, ScfResult};
use crate::DEFAULT_C;

/// Basis sizes the driver accepts.
pub const SUPPORTED_SIZES: [usize; 5] = [1, 2, 4, 6, 8];

/// Environment variable overriding the default number of digits.
pub const DIGITS_ENV: &str = "DIRAC_SCF_DIGITS";

/// Rows of Table I (He, z scan).
pub const TABLE1_Z_PARAMS: [&str; 7] = ["-0.9", "-0.5", "-0.1", "0", "0.1", "0.5", "0.9"];
pub const TABLE1_STAGES: [usize; 5] = [1, 2, 4, 6, 8];
/// Rows of Table II (isoelectronic series), each at z = 0 and z = 0.5.
pub const TABLE2_CHARGES: [u32; 13] = [4, 8, 10, 14, 16, 18, 20, 30, 40, 50, 60, 70, 80];
pub const TABLE2_Z_PARAMS: [&str; 2] = ["0", "0.5"];
pub const TABLE2_STAGES: [usize; 4] = [1, 2, 4, 6];

const REFERENCE_CSV: &str = include_str!("../data/reference.csv");

pub(crate) fn ser_real<S: Serializer>(v: &Real, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_full_string())
}

pub(crate) fn ser_opt_real<S: Serializer>(v: &Option<Real>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&v.to_full_string()),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

/// Command-line flags. Every option may also come from a `key=value`
/// config file; flags win.
#[derive(Debug, Clone, Default, Parser)]
#[command(
    name = "dirac-scf",
    version,
    about = "Dirac-Hartree-Fock energies of helium-like atoms in a Slater-type spinor basis"
)]
pub struct CliArgs {
    /// key=value configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Nuclear charge
    #[arg(long = "Z", value_name = "Z", allow_hyphen_values = true)]
    pub charge: Option<String>,
    /// z-parameter of the principal-number rule
    #[arg(long = "zparam", allow_hyphen_values = true)]
    pub z_param: Option<String>,
    /// Basis size (1, 2, 4, 6 or 8)
    #[arg(long = "N", value_name = "N")]
    pub size: Option<usize>,
    /// Speed of light in atomic units
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<String>,
    /// Decimal digits of working precision (>= 30)
    #[arg(long)]
    pub digits: Option<u32>,
    /// SCF energy threshold (default 1e-(digits-15))
    #[arg(long = "tol-scf", allow_hyphen_values = true)]
    pub tol_scf: Option<String>,
    /// Optimize the exponents
    #[arg(long)]
    pub opt: bool,
    /// Exponents in basis order, comma separated
    #[arg(long, allow_hyphen_values = true)]
    pub zeta: Option<String>,
    /// Basis sizes of the staged optimization, e.g. 1,2,4,6
    #[arg(long = "stage-plan")]
    pub stage_plan: Option<String>,
    /// Concurrent sweep cells
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_enum)]
    pub output: Option<OutputFormat>,
    /// Reproduce a whole table (1 or 2)
    #[arg(long)]
    pub table: Option<u8>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Density damping weight (default 0.3 for Z >= 40)
    #[arg(long)]
    pub damping: Option<f64>,
    /// Write S, V, Pi and J as plain text to this file
    #[arg(long = "dump-integrals")]
    pub dump_integrals: Option<PathBuf>,
    /// Include the optimizer trace in text output
    #[arg(long)]
    pub trace: bool,
}

/// Full description of one calculation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub charge: String,
    pub z_param: String,
    pub size: usize,
    pub c: String,
    pub digits: u32,
    pub tol_scf: Option<String>,
    pub opt: bool,
    pub exponents: Option<Vec<String>>,
    pub stage_plan: Option<Vec<usize>>,
    pub output: OutputFormat,
    pub jobs: usize,
    pub table: Option<u8>,
    pub max_iter: usize,
    pub damping: Option<f64>,
    pub dump_integrals: Option<PathBuf>,
    pub trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            charge: "2".into(),
            z_param: "0".into(),
            size: 1,
            c: DEFAULT_C.into(),
            digits: 50,
            tol_scf: None,
            opt: false,
            exponents: None,
            stage_plan: None,
            output: OutputFormat::Text,
            jobs: 1,
            table: None,
            max_iter: 200,
            damping: None,
            dump_integrals: None,
            trace: false,
        }
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_sizes(s: &str, loc: Option<String>) -> Result<Vec<usize>> {
    split_list(s)
        .iter()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::config(loc.clone(), format!("bad basis size {t:?} in stage plan")))
        })
        .collect()
}

fn parse_bool(s: &str, loc: Option<String>) -> Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::config(loc, format!("expected a boolean, got {s:?}"))),
    }
}

/// Validation field reported for a config-file key.
fn field_of(key: &str) -> Option<&'static str> {
    Some(match key {
        "Z" | "z_nuc" | "charge" => "Z",
        "zparam" | "z_param" => "zparam",
        "N" | "size" => "N",
        "c" => "c",
        "digits" => "digits",
        "tol_scf" => "tol-scf",
        "zeta" | "exponents" => "zeta",
        "stage_plan" => "stage-plan",
        "jobs" => "jobs",
        "table" => "table",
        "damping" => "damping",
        _ => return None,
    })
}

fn flag_given(a: &CliArgs, field: &str) -> bool {
    match field {
        "Z" => a.charge.is_some(),
        "zparam" => a.z_param.is_some(),
        "N" => a.size.is_some(),
        "c" => a.c.is_some(),
        "digits" => a.digits.is_some(),
        "tol-scf" => a.tol_scf.is_some(),
        "zeta" => a.zeta.is_some(),
        "stage-plan" => a.stage_plan.is_some(),
        "jobs" => a.jobs.is_some(),
        "table" => a.table.is_some(),
        "damping" => a.damping.is_some(),
        _ => false,
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str, origin: &str) -> Result<HashMap<String, (String, usize)>> {
    let mut out = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let loc = Some(format!("{origin}:{}", i + 1));
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::config(loc.clone(), format!("expected key=value, got {line:?}")))?;
        let key = k.trim().replace('-', "_");
        if key.is_empty() {
            return Err(Error::config(loc, "empty key"));
        }
        out.insert(key, (v.trim().to_string(), i + 1));
    }
    Ok(out)
}

impl RunConfig {
    /// Merges defaults, the digits environment override, an optional config
    /// file and the flags, in increasing priority, then validates.
    pub fn resolve(args: &CliArgs, env_digits: Option<&str>) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::config(Some(path.display().to_string()), format!("cannot read: {e}")))?;
                Some((path.display().to_string(), text))
            }
            None => None,
        };
        Self::from_parts(args, file.as_ref().map(|(p, t)| (p.as_str(), t.as_str())), env_digits)
    }

    pub fn from_parts(args: &CliArgs, file: Option<(&str, &str)>, env_digits: Option<&str>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(d) = env_digits {
            cfg.digits = d
                .trim()
                .parse()
                .map_err(|_| Error::config(Some(DIGITS_ENV.into()), format!("expected an integer, got {d:?}")))?;
        }
        let mut from_file = HashMap::new();
        if let Some((origin, text)) = file {
            from_file = parse_config_text(text, origin)?;
            cfg.apply_file(&from_file, origin)?;
        }
        cfg.apply_flags(args)?;
        match cfg.validate() {
            Err(Error::Config {
                location: Some(field),
                message,
            }) if !flag_given(args, &field) => {
                // point at the file line when the bad value came from there
                let key = from_file.keys().find(|k| field_of(k) == Some(field.as_str())).cloned();
                let location = match (key, file) {
                    (Some(k), Some((origin, _))) => format!("{origin}:{} ({k})", from_file[&k].1),
                    _ => field,
                };
                Err(Error::config(Some(location), message))
            }
            other => other.map(|_| cfg),
        }
    }

    fn apply_file(&mut self, kv: &HashMap<String, (String, usize)>, origin: &str) -> Result<()> {
        let mut keys: Vec<_> = kv.iter().collect();
        keys.sort_by_key(|(_, (_, line))| *line);
        for (key, (v, line)) in keys {
            let loc = Some(format!("{origin}:{line} ({key})"));
            let num = |what: &str| Error::config(loc.clone(), format!("expected {what}, got {v:?}"));
            match key.as_str() {
                "Z" | "z_nuc" | "charge" => self.charge = v.clone(),
                "zparam" | "z_param" => self.z_param = v.clone(),
                "N" | "size" => self.size = v.parse().map_err(|_| num("an integer"))?,
                "c" => self.c = v.clone(),
                "digits" => self.digits = v.parse().map_err(|_| num("an integer"))?,
                "tol_scf" => self.tol_scf = Some(v.clone()),
                "opt" => self.opt = parse_bool(v, loc.clone())?,
                "zeta" | "exponents" => self.exponents = Some(split_list(v)),
                "stage_plan" => self.stage_plan = Some(parse_sizes(v, loc.clone())?),
                "output" => {
                    self.output = v
                        .parse()
                        .map_err(|_| Error::config(loc.clone(), format!("unknown output format {v:?}")))?
                }
                "jobs" => self.jobs = v.parse().map_err(|_| num("an integer"))?,
                "table" => self.table = Some(v.parse().map_err(|_| num("1 or 2"))?),
                "max_iter" => self.max_iter = v.parse().map_err(|_| num("an integer"))?,
                "damping" => self.damping = Some(v.parse().map_err(|_| num("a number"))?),
                "trace" => self.trace = parse_bool(v, loc.clone())?,
                _ => return Err(Error::config(loc, format!("unknown key {key:?}"))),
            }
        }
        Ok(())
    }

    fn apply_flags(&mut self, a: &CliArgs) -> Result<()> {
        if let Some(v) = &a.charge {
            self.charge = v.clone();
        }
        if let Some(v) = &a.z_param {
            self.z_param = v.clone();
        }
        if let Some(v) = a.size {
            self.size = v;
        }
        if let Some(v) = &a.c {
            self.c = v.clone();
        }
        if let Some(v) = a.digits {
            self.digits = v;
        }
        if let Some(v) = &a.tol_scf {
            self.tol_scf = Some(v.clone());
        }
        if a.opt {
            self.opt = true;
        }
        if let Some(v) = &a.zeta {
            self.exponents = Some(split_list(v));
        }
        if let Some(v) = &a.stage_plan {
            self.stage_plan = Some(parse_sizes(v, Some("--stage-plan".into()))?);
        }
        if let Some(v) = a.jobs {
            self.jobs = v;
        }
        if let Some(v) = a.output {
            self.output = v;
        }
        if let Some(v) = a.table {
            self.table = Some(v);
        }
        if let Some(v) = a.max_iter {
            self.max_iter = v;
        }
        if let Some(v) = a.damping {
            self.damping = Some(v);
        }
        if let Some(v) = &a.dump_integrals {
            self.dump_integrals = Some(v.clone());
        }
        if a.trace {
            self.trace = true;
        }
        Ok(())
    }

    pub fn context(&self) -> Result<PrecisionContext> {
        PrecisionContext::with_digits(self.digits).map_err(|e| Error::config(Some("digits".into()), e.to_string()))
    }

    fn real(&self, ctx: &PrecisionContext, field: &str, v: &str) -> Result<Real> {
        ctx.parse(v)
            .map_err(|_| Error::config(Some(field.into()), format!("not a number: {v:?}")))
    }

    /// Checks field ranges and cross-field consistency.
    pub fn validate(&self) -> Result<()> {
        let field = |f: &str, msg: String| Err(Error::config(Some(f.into()), msg));
        let ctx = self.context()?;
        let charge = self.real(&ctx, "Z", &self.charge)?;
        if charge <= 0.0 {
            return field("Z", format!("nuclear charge must be positive, got {}", self.charge));
        }
        self.real(&ctx, "zparam", &self.z_param)?;
        let c = self.real(&ctx, "c", &self.c)?;
        if c <= 0.0 {
            return field("c", format!("speed of light must be positive, got {}", self.c));
        }
        if let Some(t) = &self.tol_scf {
            let t = self.real(&ctx, "tol-scf", t)?;
            if t <= 0.0 {
                return field("tol-scf", "must be positive".into());
            }
        }
        if !SUPPORTED_SIZES.contains(&self.size) {
            return field(
                "N",
                format!("unsupported basis size {}; use 1, 2, 4, 6 or 8", self.size),
            );
        }
        if self.jobs == 0 {
            return field("jobs", "must be at least 1".into());
        }
        if let Some(t) = self.table {
            if t != 1 && t != 2 {
                return field("table", format!("no table {t}; use 1 or 2"));
            }
        }
        if let Some(d) = self.damping {
            if !(0.0..1.0).contains(&d) {
                return field("damping", format!("weight {d} outside [0, 1)"));
            }
        }
        if let Some(plan) = &self.stage_plan {
            if plan.is_empty()
                || plan.windows(2).any(|w| w[0] >= w[1])
                || plan.iter().any(|s| !SUPPORTED_SIZES.contains(s))
            {
                return field("stage-plan", format!("{plan:?} must be ascending sizes from 1,2,4,6,8"));
            }
            if self.table.is_none() && plan.last() != Some(&self.size) {
                return field("stage-plan", format!("plan {plan:?} must end at N = {}", self.size));
            }
            if plan.iter().any(|&s| s > 4) && !plan.iter().any(|&s| s == 2 || s == 4) {
                return field("stage-plan", "sizes above 4 reuse an optimized N = 2 or 4 stage".into());
            }
        }
        if !self.opt && self.table.is_none() {
            match &self.exponents {
                None => return field("zeta", "fixed-exponent runs need --zeta (or use --opt)".into()),
                Some(e) if e.len() != self.size => {
                    return field(
                        "zeta",
                        format!("{} exponents given for a basis of N = {}", e.len(), self.size),
                    )
                }
                Some(e) => {
                    for v in e {
                        if self.real(&ctx, "zeta", v)? <= 0.0 {
                            return field("zeta", format!("exponent {v} must be positive"));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn scf_config(&self, ctx: &PrecisionContext) -> Result<ScfConfig> {
        Ok(ScfConfig {
            tol_scf: match &self.tol_scf {
                Some(t) => Some(self.real(ctx, "tol-scf", t)?),
                None => None,
            },
            max_iter: self.max_iter,
            damping: self.damping,
            two_electron: true,
        })
    }

    fn default_plan(&self) -> Vec<usize> {
        TABLE1_STAGES.iter().copied().filter(|&s| s <= self.size).collect()
    }
}

/// Summary of one optimization stage in a report.
#[derive(Debug, Clone, Serialize)]
pub struct StageSummary {
    pub size: usize,
    pub exponents: Vec<f64>,
    #[serde(serialize_with = "ser_real")]
    pub energy: Real,
    pub optimized: bool,
    pub evaluations: usize,
    pub warnings: Vec<String>,
    pub below: usize,
    pub above: usize,
    #[serde(serialize_with = "ser_real")]
    pub occupied_eigenvalue: Real,
    pub trace: Vec<TraceRecord>,
}

impl StageSummary {
    fn from_stage(s: &StageResult, c: &Real) -> Self {
        let (below, above) = s.scf.branch_counts(c);
        StageSummary {
            size: s.size,
            exponents: s.exponents.clone(),
            energy: s.energy.clone(),
            optimized: s.optimized,
            evaluations: s.evaluations,
            warnings: s.warnings.clone(),
            below,
            above,
            occupied_eigenvalue: s.scf.occupied_eigenvalue().clone(),
            trace: s.trace.clone(),
        }
    }
}

/// Everything a run produces.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    #[serde(rename = "Z")]
    pub charge: String,
    pub z_param: String,
    #[serde(rename = "N")]
    pub size: usize,
    pub c: String,
    pub digits: u32,
    pub labels: Vec<String>,
    /// One exponent per basis function, full precision.
    pub exponents: Vec<String>,
    #[serde(serialize_with = "ser_real")]
    pub energy: Real,
    #[serde(serialize_with = "ser_real")]
    pub abs_energy: Real,
    #[serde(serialize_with = "ser_real")]
    pub occupied_eigenvalue: Real,
    pub below: usize,
    pub above: usize,
    pub iterations: usize,
    pub converged: bool,
    pub oscillatory: bool,
    pub scf_trace: Vec<IterationRecord>,
    pub stages: Vec<StageSummary>,
    #[serde(skip)]
    pub show_trace: bool,
}

fn shells_for(size: usize, exps: &[Real]) -> (Vec<u32>, Vec<ShellExponents>) {
    if size == 1 {
        return (vec![1], vec![ShellExponents::single(exps[0].clone())]);
    }
    let shells = (1..=(size / 2) as u32).collect();
    let pairs = exps
        .chunks(2)
        .map(|p| ShellExponents::pair(p[0].clone(), p[1].clone()))
        .collect();
    (shells, pairs)
}

fn expand_shared(size: usize, pair: &[f64]) -> Vec<f64> {
    if size == 1 {
        vec![pair[0]]
    } else {
        (0..size).map(|i| pair[i % 2]).collect()
    }
}

/// Runs one calculation: optional staged optimization, then a final SCF.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let ctx = cfg.context()?;
    let charge = cfg.real(&ctx, "Z", &cfg.charge)?;
    let z_param = cfg.real(&ctx, "zparam", &cfg.z_param)?;
    let c = cfg.real(&ctx, "c", &cfg.c)?;
    let scf_cfg = cfg.scf_config(&ctx)?;

    let mut stages = Vec::new();
    let exps: Vec<Real> = if cfg.opt {
        let mut template = OptimizationTask::new(ctx, &charge, &z_param, &c, cfg.size);
        template.scf = scf_cfg.clone();
        let plan = cfg.stage_plan.clone().unwrap_or_else(|| cfg.default_plan());
        let results = staged_optimize(&template, &plan)?;
        let last = results.last().expect("non-empty plan");
        stages = results.iter().map(|s| StageSummary::from_stage(s, &c)).collect();
        expand_shared(cfg.size, &last.exponents)
            .into_iter()
            .map(|v| ctx.from_f64(v))
            .collect()
    } else {
        let list = cfg.exponents.as_ref().expect("validated");
        list.iter().map(|v| cfg.real(&ctx, "zeta", v)).collect::<Result<_>>()?
    };

    let (shells, shell_exps) = shells_for(cfg.size, &exps);
    let basis = build_basis(&ctx, &charge, &z_param, &shells, &shell_exps, &c)?;
    let blocks = OneElectronBlocks::new(&basis)?;
    let eri = eri_tensor(&basis)?;
    if let Some(path) = &cfg.dump_integrals {
        let mut f =
            std::fs::File::create(path).map_err(|e| Error::config(Some(path.display().to_string()), e.to_string()))?;
        write_debug_dump(&mut f, &blocks, &eri)
            .map_err(|e| Error::config(Some(path.display().to_string()), e.to_string()))?;
    }
    let res = scf_iterate(&blocks, &eri, &basis.c, &basis.charge, &ctx, &scf_cfg)?;
    Ok(make_report(cfg, &basis.labels(), &exps, &res, &c, stages))
}

fn make_report(
    cfg: &RunConfig,
    labels: &[String],
    exps: &[Real],
    res: &ScfResult,
    c: &Real,
    stages: Vec<StageSummary>,
) -> Report {
    let (below, above) = res.branch_counts(c);
    Report {
        charge: cfg.charge.clone(),
        z_param: cfg.z_param.clone(),
        size: cfg.size,
        c: cfg.c.clone(),
        digits: cfg.digits,
        labels: labels.to_vec(),
        exponents: exps.iter().map(Real::to_full_string).collect(),
        energy: res.energy_total.clone(),
        abs_energy: res.energy_total.abs(),
        occupied_eigenvalue: res.occupied_eigenvalue().clone(),
        below,
        above,
        iterations: res.iterations,
        converged: res.converged,
        oscillatory: res.oscillatory,
        scf_trace: res.history.clone(),
        stages,
        show_trace: cfg.trace,
    }
}

impl Report {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Text => self.to_text(),
            OutputFormat::Json => serde_json::to_string_pretty(self).expect("report serializes"),
            OutputFormat::Csv => {
                let mut out = csv_header();
                out.push_str(&self.csv_row());
                out
            }
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "Z = {}  z = {}  N = {}  c = {}  digits = {}",
            self.charge, self.z_param, self.size, self.c, self.digits
        );
        let _ = writeln!(s, "basis      {}", self.labels.join(" "));
        let shown: Vec<String> = self
            .exponents
            .iter()
            .map(|e| format!("{:.12}", e.parse::<f64>().unwrap_or(f64::NAN)))
            .collect();
        let _ = writeln!(s, "exponents  {}", shown.join(" "));
        let _ = writeln!(s, "|E|        {}", self.abs_energy.to_fixed(12));
        let _ = writeln!(s, "E          {}", self.energy.to_fixed(12));
        let _ = writeln!(s, "eps(1s)    {}", self.occupied_eigenvalue.to_fixed(12));
        let _ = writeln!(s, "branches   {} below -c^2, {} above", self.below, self.above);
        let _ = writeln!(
            s,
            "scf        {} after {} iterations{}",
            if self.converged { "converged" } else { "NOT converged" },
            self.iterations,
            if self.oscillatory { " (oscillatory)" } else { "" }
        );
        let _ = writeln!(s, "\n iter  {:>22}  {:>10}  {:>22}", "E", "dE", "eps");
        for r in &self.scf_trace {
            let _ = writeln!(
                s,
                " {:>4}  {:>22}  {:>10}  {:>22}",
                r.iteration,
                r.energy.to_fixed(12),
                r.delta.to_sci(2),
                r.occupied_eigenvalue.to_fixed(12)
            );
        }
        if !self.stages.is_empty() {
            let _ = writeln!(s, "\nstages");
            for st in &self.stages {
                let ex: Vec<String> = st.exponents.iter().map(|v| format!("{v:.10}")).collect();
                let _ = writeln!(
                    s,
                    "  N={}  {:<9}  |E| = {}  exponents [{}]  evaluations {}",
                    st.size,
                    if st.optimized { "optimized" } else { "frozen" },
                    st.energy.abs().to_fixed(12),
                    ex.join(", "),
                    st.evaluations
                );
                for w in &st.warnings {
                    let _ = writeln!(s, "      warning: {w}");
                }
                if self.show_trace {
                    for t in &st.trace {
                        let e = t
                            .energy
                            .as_ref()
                            .map(|e| e.to_fixed(15))
                            .unwrap_or_else(|| "SCF failed".into());
                        let _ = writeln!(
                            s,
                            "      #{:<4} {:<8} {:?} {} {}",
                            t.evaluation,
                            t.step,
                            t.point,
                            e,
                            if t.accepted { "accepted" } else { "rejected" }
                        );
                    }
                }
            }
        }
        s
    }

    pub fn csv_row(&self) -> String {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record([
            self.charge.clone(),
            self.z_param.clone(),
            self.size.to_string(),
            self.energy.to_full_string(),
            self.abs_energy.to_full_string(),
            self.occupied_eigenvalue.to_full_string(),
            self.below.to_string(),
            self.above.to_string(),
            self.iterations.to_string(),
            self.converged.to_string(),
            self.exponents.join(";"),
        ])
        .expect("in-memory csv");
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
    }
}

pub fn csv_header() -> String {
    "Z,z,N,energy,abs_energy,occupied_eigenvalue,below,above,iterations,converged,exponents\n".into()
}

/// One printed reference value.
#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
pub struct ReferenceValue {
    pub table: u8,
    #[serde(rename = "Z")]
    pub charge: u32,
    /// Empty for literature values, which do not depend on z.
    pub z: String,
    #[serde(rename = "N")]
    pub size: usize,
    pub value: String,
    pub source: String,
}

/// The bundled reference table.
pub fn reference_values() -> Vec<ReferenceValue> {
    let mut rdr = csv::Reader::from_reader(REFERENCE_CSV.as_bytes());
    rdr.deserialize()
        .map(|r| r.expect("bundled reference data parses"))
        .collect()
}

/// Printed value of this work for a cell, if any.
pub fn tabulated_value(table: u8, charge: u32, z: &str, size: usize) -> Option<String> {
    let zf: f64 = z.parse().ok()?;
    reference_values()
        .into_iter()
        .find(|r| {
            r.table == table
                && r.charge == charge
                && r.size == size
                && r.source == "table"
                && r.z.parse::<f64>().ok() == Some(zf)
        })
        .map(|r| r.value)
}

/// One row of a sweep: a staged run for a (Z, z) pair.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    #[serde(rename = "Z")]
    pub charge: u32,
    pub z_param: String,
    pub cells: Vec<SweepCell>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    #[serde(rename = "N")]
    pub size: usize,
    pub stage: Option<StageSummary>,
    pub error: Option<String>,
    pub tabulated: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub table: u8,
    pub sizes: Vec<usize>,
    pub rows: Vec<SweepRow>,
    pub literature: Vec<ReferenceValue>,
}

impl SweepReport {
    pub fn failed_cells(&self) -> usize {
        self.rows
            .iter()
            .flat_map(|r| &r.cells)
            .filter(|c| c.stage.is_none())
            .count()
    }
}

/// (Z, z) rows and the stage plan of a table.
pub type TableLayout = (Vec<(u32, String)>, Vec<usize>);

/// Grid of (Z, z) pairs and the stage plan for table 1 or 2.
pub fn table_layout(table: u8) -> Result<TableLayout> {
    match table {
        1 => Ok((
            TABLE1_Z_PARAMS.iter().map(|z| (2, z.to_string())).collect(),
            TABLE1_STAGES.to_vec(),
        )),
        2 => Ok((
            TABLE2_CHARGES
                .iter()
                .flat_map(|&q| TABLE2_Z_PARAMS.iter().map(move |z| (q, z.to_string())))
                .collect(),
            TABLE2_STAGES.to_vec(),
        )),
        t => Err(Error::config(Some("table".into()), format!("no table {t}"))),
    }
}

/// Staged optimization for every row of a table.
///
/// One staged run per (Z, z) row yields all N cells of that row, since the
/// larger bases are seeded from (or frozen at) the smaller ones. Rows run
/// concurrently on up to `template.jobs` threads; the output order is the
/// grid order.
pub fn table_sweep(table: u8, rows: &[(u32, String)], stages: &[usize], template: &RunConfig) -> Result<SweepReport> {
    let ctx = template.context()?;
    let c = template.real(&ctx, "c", &template.c)?;
    let scf_cfg = template.scf_config(&ctx)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(template.jobs)
        .build()
        .map_err(|e| Error::config(Some("jobs".into()), e.to_string()))?;
    let compute = |(charge, z): &(u32, String)| -> SweepRow {
        let outcome = (|| -> Result<Vec<StageResult>> {
            let q = ctx.int(i64::from(*charge));
            let zp = template.real(&ctx, "zparam", z)?;
            let mut task = OptimizationTask::new(ctx, &q, &zp, &c, *stages.last().unwrap_or(&1));
            task.scf = scf_cfg.clone();
            staged_optimize(&task, stages)
        })();
        let cells = match outcome {
            Ok(results) => results
                .iter()
                .map(|s| SweepCell {
                    size: s.size,
                    stage: Some(StageSummary::from_stage(s, &c)),
                    error: None,
                    tabulated: tabulated_value(table, *charge, z, s.size),
                })
                .collect(),
            Err(e) => stages
                .iter()
                .map(|&n| SweepCell {
                    size: n,
                    stage: None,
                    error: Some(e.to_string()),
                    tabulated: tabulated_value(table, *charge, z, n),
                })
                .collect(),
        };
        SweepRow {
            charge: *charge,
            z_param: z.clone(),
            cells,
        }
    };
    let out_rows: Vec<SweepRow> = pool.install(|| rows.par_iter().map(compute).collect());
    let charges: Vec<u32> = rows.iter().map(|r| r.0).collect();
    let literature = reference_values()
        .into_iter()
        .filter(|r| r.table == table && r.source != "table" && charges.contains(&r.charge))
        .collect();
    Ok(SweepReport {
        table,
        sizes: stages.to_vec(),
        rows: out_rows,
        literature,
    })
}

impl SweepReport {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => serde_json::to_string_pretty(self).expect("sweep serializes"),
            OutputFormat::Csv => {
                let mut out = String::from("Z,z,N,abs_energy,tabulated,below,above,error\n");
                for row in &self.rows {
                    for cell in &row.cells {
                        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
                        let (e, b, a) = match &cell.stage {
                            Some(s) => (
                                s.energy.abs().to_full_string(),
                                s.below.to_string(),
                                s.above.to_string(),
                            ),
                            None => (String::new(), String::new(), String::new()),
                        };
                        w.write_record([
                            row.charge.to_string(),
                            row.z_param.clone(),
                            cell.size.to_string(),
                            e,
                            cell.tabulated.clone().unwrap_or_default(),
                            b,
                            a,
                            cell.error.clone().unwrap_or_default(),
                        ])
                        .expect("in-memory csv");
                        out.push_str(&String::from_utf8(w.into_inner().expect("csv")).expect("utf8"));
                    }
                }
                out
            }
            OutputFormat::Text => self.to_text(),
        }
    }

    fn to_text(&self) -> String {
        let mut s = String::new();
        let title = if self.table == 1 {
            "Table I: He, total DHF energies |E| (a.u.) by z and N"
        } else {
            "Table II: He-like ions, total DHF energies |E| (a.u.) by Z and N; lines z = 0 and z = 0.5"
        };
        let _ = writeln!(s, "{title}");
        let _ = write!(s, "{:<5} {:<6}", "Z", "z");
        for n in &self.sizes {
            let _ = write!(s, " {:>22}", format!("N={n}"));
        }
        let _ = writeln!(s);
        for row in &self.rows {
            let _ = write!(s, "{:<5} {:<6}", row.charge, row.z_param);
            for cell in &row.cells {
                let v = match &cell.stage {
                    Some(st) => st.energy.abs().to_fixed(12),
                    None => "FAILED".into(),
                };
                let _ = write!(s, " {v:>22}");
            }
            let _ = writeln!(s);
            let _ = write!(s, "{:<5} {:<6}", "", "table");
            for cell in &row.cells {
                let _ = write!(s, " {:>22}", cell.tabulated.clone().unwrap_or_else(|| "-".into()));
            }
            let _ = writeln!(s);
            for cell in &row.cells {
                if let Some(e) = &cell.error {
                    let _ = writeln!(s, "      N={} failed: {e}", cell.size);
                }
            }
        }
        if !self.literature.is_empty() {
            let _ = writeln!(s, "\nliterature");
            for r in &self.literature {
                let _ = writeln!(s, "  Z={:<3} N={}  {:<20} {}", r.charge, r.size, r.value, r.source);
            }
        }
        s
    }
}

/// Maps an error to the process exit code: 1 for configuration problems,
/// 2 for numerical failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. }
        | Error::InvalidZParameter { .. }
        | Error::PrecisionTooLow(_)
        | Error::DuplicateBasisFunction(..) => 1,
        _ => 2,
    }
}

/// Exit code when a sweep had failing cells.
pub const EXIT_PARTIAL_SWEEP: i32 = 3;
