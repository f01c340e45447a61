//! Experiment runner: TOML configs, the result cache, CSV and manifest output, and the
//! acceptance-suite driver.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::acceptance;
use crate::cutoff::CutoffSpec;
use crate::error::{LabError, Result};
use crate::integrand::{build, ExprSpec, Variant};
use crate::lab::{extrapolate_rungs, rows, sweep, sweep_expr, write_csv, EpsPath, ResultCache, Row, Rung};
use crate::presets::poly;
use crate::quad::{
    fubini_average, integrate_pt_cycle, AxisRule, CachedSampler, CycleGrid, FubiniGrid, GridSpec, Orientation, PtCycle,
    QuadratureResult,
};
use crate::superform::SectionTuple;
use crate::testform::{FlatBump, TestForm};

#[derive(Parser, Debug)]
#[command(name = "residue-lab", version, about = "Numerical experiments on products of residue currents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the experiments of a config file, or a built-in suite.
    Run(RunArgs),
}

#[derive(clap::Args, Debug, Clone)]
pub struct RunArgs {
    /// TOML experiment config.
    pub config: Option<PathBuf>,
    /// Built-in suite to run instead of a config.
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Only these criteria of the suite (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<u8>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Quadrature cache directory (default: <out-dir>/cache).
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, default_value = "results")]
    pub out_dir: PathBuf,
    /// Validate and print the plan without computing or writing anything.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Acceptance,
}

/// Polynomials are given in the text format, one term `re im I1..In J1..Jn` per line (or
/// separated by `;`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionConfig {
    pub components: Vec<String>,
    #[serde(default)]
    pub unit: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormConfig {
    pub poly: String,
    /// Antiholomorphic differentials dz̄_T (0-based), q = |T|.
    #[serde(default)]
    pub t: Vec<usize>,
    #[serde(default)]
    pub bump: FlatBump,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Polydisc quadrature of a regularized integrand.
    #[default]
    Polydisc,
    /// The raw residue integral over {|f|² = ε₁, |g|² = ε₂} for the two-branch pair.
    RawCycle,
    /// The kernel average of the raw cycle integral, equal to BM_PAIR by Fubini.
    Fubini,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    #[serde(default)]
    pub kind: ExperimentKind,
    pub n: usize,
    #[serde(default)]
    pub variant: Option<Variant>,
    #[serde(default)]
    pub f: Option<SectionConfig>,
    #[serde(default)]
    pub g: Option<SectionConfig>,
    #[serde(default)]
    pub chi1: Option<CutoffSpec>,
    #[serde(default)]
    pub chi2: Option<CutoffSpec>,
    pub phi: FormConfig,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub cycle_grid: Option<CycleGrid>,
    #[serde(default)]
    pub fubini_grid: Option<FubiniGrid>,
    pub paths: Vec<EpsPath>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(rename = "experiment")]
    pub experiments: Vec<ExperimentConfig>,
}

/// A validated experiment, ready to run.
#[derive(Clone, Debug)]
pub enum Plan {
    Polydisc { id: String, spec: ExprSpec, grid: GridSpec, paths: Vec<EpsPath> },
    RawCycle { id: String, phi: TestForm, grid: CycleGrid, paths: Vec<EpsPath> },
    Fubini { id: String, phi: TestForm, grid: CycleGrid, fubini: FubiniGrid, paths: Vec<EpsPath> },
}

impl Plan {
    pub fn id(&self) -> &str {
        match self {
            Plan::Polydisc { id, .. } | Plan::RawCycle { id, .. } | Plan::Fubini { id, .. } => id,
        }
    }

    pub fn paths(&self) -> &[EpsPath] {
        match self {
            Plan::Polydisc { paths, .. } | Plan::RawCycle { paths, .. } | Plan::Fubini { paths, .. } => paths,
        }
    }

    pub fn variant(&self) -> &'static str {
        match self {
            Plan::Polydisc { spec, .. } => spec.variant.name(),
            Plan::RawCycle { .. } => "RAW_CYCLE",
            Plan::Fubini { .. } => "FUBINI",
        }
    }
}

fn field_err(id: &str, field: &str, e: impl std::fmt::Display) -> LabError {
    LabError::Config { field: format!("experiment[{id}].{field}"), msg: e.to_string() }
}

fn section(id: &str, field: &str, n: usize, s: &SectionConfig, radius: f64) -> Result<SectionTuple> {
    let comps = s.components.iter().map(|c| poly(n, c)).collect::<Result<Vec<_>>>().map_err(|e| field_err(id, field, e))?;
    let unit = s.unit.as_deref().map(|u| poly(n, u)).transpose().map_err(|e| field_err(id, &format!("{field}.unit"), e))?;
    let t = SectionTuple::new(comps, unit).map_err(|e| field_err(id, field, e))?;
    t.check_unit(radius, UNIT_FLOOR).map_err(|e| field_err(id, &format!("{field}.unit"), e))?;
    Ok(t)
}

/// Smallest admissible modulus of a unit factor on the support polydisc.
pub const UNIT_FLOOR: f64 = 1e-3;

impl ExperimentConfig {
    pub fn plan(&self) -> Result<Plan> {
        let id = self.id.as_str();
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(field_err(id, "id", "use letters, digits, `_` and `-` only"));
        }
        if self.paths.is_empty() {
            return Err(field_err(id, "paths", "at least one path is required"));
        }
        for p in &self.paths {
            p.validate().map_err(|e| field_err(id, "paths", e))?;
        }
        let p = poly(self.n, &self.phi.poly).map_err(|e| field_err(id, "phi.poly", e))?;
        let phi = TestForm::simple(p, &self.phi.t, self.phi.bump).map_err(|e| field_err(id, "phi", e))?;
        let paths = self.paths.clone();
        let no = |field: &str, present: bool| if present { Err(field_err(id, field, "not used by this kind")) } else { Ok(()) };
        match self.kind {
            ExperimentKind::Polydisc => {
                no("cycle_grid", self.cycle_grid.is_some())?;
                no("fubini_grid", self.fubini_grid.is_some())?;
                let variant = self.variant.ok_or_else(|| field_err(id, "variant", "required for polydisc experiments"))?;
                let radius = self.phi.bump.b;
                let f = section(id, "f", self.n, self.f.as_ref().ok_or_else(|| field_err(id, "f", "missing"))?, radius)?;
                let g = self.g.as_ref().map(|g| section(id, "g", self.n, g, radius)).transpose()?;
                let chi1 = self.chi1.unwrap_or(CutoffSpec::canonical(1));
                let chi2 = if variant.is_pair() { Some(self.chi2.unwrap_or(CutoffSpec::canonical(1))) } else { self.chi2 };
                let spec = ExprSpec { variant, f, g, chi1, chi2, eps: [1.0, 1.0], phi };
                build(&spec).map_err(|e| field_err(id, "variant", e))?;
                let grid = self.grid.clone().unwrap_or_else(|| GridSpec::uniform(self.n, AxisRule::default()));
                grid.validate(self.n).map_err(|e| field_err(id, "grid", e))?;
                Ok(Plan::Polydisc { id: id.into(), spec, grid, paths })
            }
            ExperimentKind::RawCycle | ExperimentKind::Fubini => {
                for (field, present) in [("variant", self.variant.is_some()), ("f", self.f.is_some()), ("g", self.g.is_some()), ("grid", self.grid.is_some())] {
                    no(field, present)?;
                }
                if self.n != 2 || !self.phi.t.is_empty() {
                    return Err(field_err(id, "phi", "cycle experiments take a (2,0) test form"));
                }
                let grid = self.cycle_grid.unwrap_or_default();
                if self.kind == ExperimentKind::RawCycle {
                    no("fubini_grid", self.fubini_grid.is_some())?;
                    Ok(Plan::RawCycle { id: id.into(), phi, grid, paths })
                } else {
                    Ok(Plan::Fubini { id: id.into(), phi, grid, fubini: self.fubini_grid.unwrap_or_default(), paths })
                }
            }
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let c: Config = toml::from_str(text).map_err(|e| LabError::Config { field: "toml".into(), msg: e.to_string() })?;
        let mut seen = std::collections::HashSet::new();
        for e in &c.experiments {
            if !seen.insert(e.id.as_str()) {
                return Err(field_err(&e.id, "id", "duplicate experiment id"));
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn plans(&self) -> Result<Vec<Plan>> {
        self.experiments.iter().map(ExperimentConfig::plan).collect()
    }

    /// SHA-256 of the canonical JSON form, so that formatting does not change it.
    pub fn hash(&self) -> Result<String> {
        let body = serde_json::to_string(self).map_err(|e| LabError::Invalid(e.to_string()))?;
        Ok(hex::encode(Sha256::digest(body.as_bytes())))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub experiment: String,
    pub path: String,
    pub eps1: f64,
    pub eps2: f64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub path: String,
    pub limit_re: Option<f64>,
    pub limit_im: Option<f64>,
    pub limit_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub id: String,
    pub variant: String,
    pub rows: usize,
    pub wall_ms: f64,
    pub paths: Vec<PathSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub started_at: String,
    pub rows: usize,
    pub failures: Vec<Failure>,
    pub version: String,
    pub wall_ms: f64,
    pub cache_hits: u64,
    pub quadratures: u64,
    pub experiments: Vec<ExperimentSummary>,
}

fn run_path(plan: &Plan, path: &EpsPath, cache: &ResultCache) -> Result<Vec<Rung>> {
    match plan {
        Plan::Polydisc { spec, grid, .. } => sweep_expr(spec, grid, path, Some(cache)),
        Plan::RawCycle { phi, grid, .. } => sweep(path, |e1, e2| {
            cache.get_or_compute("raw_cycle", &(phi, grid, e1, e2), || {
                let t = Instant::now();
                let v = integrate_pt_cycle(e1, e2, phi, grid)?;
                let coarse = integrate_pt_cycle(e1, e2, phi, &grid.coarsened())?;
                Ok(QuadratureResult { value: v, error_estimate: (v - coarse).norm(), nodes: 0, wall_ms: t.elapsed().as_secs_f64() * 1e3 })
            })
        }),
        Plan::Fubini { phi, grid, fubini, .. } => {
            let sampler = CachedSampler::new(PtCycle { phi: phi.clone(), grid: *grid, orientation: Orientation::CoArea });
            sweep(path, |e1, e2| cache.get_or_compute("fubini", &(phi, grid, fubini, e1, e2), || fubini_average(e1, e2, &sampler, fubini)))
        }
    }
}

/// Runs every plan (experiments in parallel) and writes `<out>/<id>/rows.csv` and
/// `<out>/manifest.json`.
pub fn run_plans(plans: &[Plan], config_hash: &str, out_dir: &Path, cache: &ResultCache) -> Result<Manifest> {
    let started_at = chrono::Utc::now().to_rfc3339();
    let t0 = Instant::now();
    let done: Vec<Result<(ExperimentSummary, Vec<Row>, Vec<Failure>)>> = plans
        .par_iter()
        .map(|plan| {
            let t = Instant::now();
            let mut all = Vec::new();
            let mut failures = Vec::new();
            let mut paths = Vec::new();
            for path in plan.paths() {
                let rungs = run_path(plan, path, cache)?;
                for r in rungs.iter().filter(|r| !r.is_ok()) {
                    failures.push(Failure {
                        experiment: plan.id().into(),
                        path: path.name(),
                        eps1: r.eps1,
                        eps2: r.eps2,
                        message: r.failure.clone().unwrap_or_default(),
                    });
                }
                let x = extrapolate_rungs(&rungs).ok();
                paths.push(PathSummary {
                    path: path.name(),
                    limit_re: x.map(|x| x.limit.re),
                    limit_im: x.map(|x| x.limit.im),
                    limit_error: x.map(|x| x.error),
                });
                all.extend(rows(plan.id(), plan.variant(), &path.name(), &rungs));
            }
            write_csv(&out_dir.join(plan.id()).join("rows.csv"), &all)?;
            let summary = ExperimentSummary { id: plan.id().into(), variant: plan.variant().into(), rows: all.len(), wall_ms: t.elapsed().as_secs_f64() * 1e3, paths };
            Ok((summary, all, failures))
        })
        .collect();
    let mut experiments = Vec::new();
    let mut failures = Vec::new();
    let mut total = 0;
    for d in done {
        let (s, r, f) = d?;
        total += r.len();
        experiments.push(s);
        failures.extend(f);
    }
    let manifest = Manifest {
        config_hash: config_hash.into(),
        started_at,
        rows: total,
        failures,
        version: env!("CARGO_PKG_VERSION").into(),
        wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        cache_hits: cache.hits(),
        quadratures: cache.misses(),
        experiments,
    };
    write_manifest(out_dir, &manifest)?;
    Ok(manifest)
}

fn write_manifest(out_dir: &Path, m: &Manifest) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let text = serde_json::to_string_pretty(m).map_err(|e| LabError::Invalid(e.to_string()))?;
    std::fs::write(out_dir.join("manifest.json"), text + "\n")?;
    Ok(())
}

/// Human-readable plan for `--dry-run`.
pub fn describe(plans: &[Plan]) -> String {
    let mut s = String::new();
    for p in plans {
        s.push_str(&format!("{} [{}]\n", p.id(), p.variant()));
        for path in p.paths() {
            let pts = path.points();
            let (first, last) = (pts[0], pts[pts.len() - 1]);
            s.push_str(&format!(
                "  {} {} rungs, ε from ({:.3e}, {:.3e}) to ({:.3e}, {:.3e})\n",
                path.name(),
                pts.len(),
                first.1,
                first.2,
                last.1,
                last.2
            ));
        }
    }
    s
}

/// Runs the acceptance criteria, writing their sweep rows grouped by experiment id.
pub fn run_acceptance(ids: &[u8], out_dir: Option<&Path>) -> Result<(Vec<acceptance::CriterionReport>, Manifest)> {
    let started_at = chrono::Utc::now().to_rfc3339();
    let t0 = Instant::now();
    let reports: Vec<_> = ids.iter().map(|&id| {
        let r = acceptance::run(id);
        println!("{}", r.line());
        r
    }).collect();
    let mut groups: BTreeMap<&str, Vec<Row>> = BTreeMap::new();
    for r in &reports {
        for row in &r.rows {
            groups.entry(row.experiment_id.as_str()).or_default().push(row.clone());
        }
    }
    let failures = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| Failure { experiment: format!("criterion_{}", r.id), path: String::new(), eps1: f64::NAN, eps2: f64::NAN, message: r.detail.clone() })
        .collect();
    let experiments = groups
        .iter()
        .map(|(id, rows)| ExperimentSummary { id: id.to_string(), variant: rows[0].variant.clone(), rows: rows.len(), wall_ms: rows.iter().map(|r| r.wall_ms).sum(), paths: Vec::new() })
        .collect();
    let hash = hex::encode(Sha256::digest(format!("acceptance {ids:?}").as_bytes()));
    let manifest = Manifest {
        config_hash: hash,
        started_at,
        rows: groups.values().map(Vec::len).sum(),
        failures,
        version: env!("CARGO_PKG_VERSION").into(),
        wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        cache_hits: 0,
        quadratures: 0,
        experiments,
    };
    if let Some(dir) = out_dir {
        for (id, rows) in &groups {
            write_csv(&dir.join(id).join("rows.csv"), rows)?;
        }
        std::fs::create_dir_all(dir)?;
        let text = serde_json::to_string_pretty(&reports).map_err(|e| LabError::Invalid(e.to_string()))?;
        std::fs::write(dir.join("acceptance.json"), text + "\n")?;
        write_manifest(dir, &manifest)?;
    }
    Ok((reports, manifest))
}

fn execute(args: &RunArgs) -> Result<bool> {
    if let Some(j) = args.jobs {
        if j == 0 {
            return Err(LabError::Invalid("--jobs must be positive".into()));
        }
        // fails only if a pool already exists, which then keeps its size
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            log::warn!("thread pool: {e}");
        }
    }
    match (&args.config, args.suite) {
        (Some(_), Some(_)) => Err(LabError::Invalid("give either a config or --suite, not both".into())),
        (None, None) => Err(LabError::Invalid("nothing to run: give a config path or --suite acceptance".into())),
        (None, Some(Suite::Acceptance)) => {
            let ids: Vec<u8> = if args.criteria.is_empty() { acceptance::CRITERIA.iter().map(|c| c.0).collect() } else { args.criteria.clone() };
            if args.dry_run {
                for id in &ids {
                    let t = acceptance::CRITERIA.iter().find(|c| c.0 == *id).ok_or_else(|| LabError::Invalid(format!("no criterion {id}")))?;
                    println!("criterion {:>2}: {}", t.0, t.1);
                }
                return Ok(true);
            }
            let (reports, _) = run_acceptance(&ids, Some(&args.out_dir))?;
            let failed = reports.iter().filter(|r| !r.passed).count();
            println!("{} of {} criteria passed", reports.len() - failed, reports.len());
            Ok(failed == 0)
        }
        (Some(path), None) => {
            let config = Config::load(path)?;
            let plans = config.plans()?;
            if args.dry_run {
                print!("{}", describe(&plans));
                return Ok(true);
            }
            let cache_dir = args.cache_dir.clone().unwrap_or_else(|| args.out_dir.join("cache"));
            let cache = ResultCache::new(cache_dir)?;
            let m = run_plans(&plans, &config.hash()?, &args.out_dir, &cache)?;
            for e in &m.experiments {
                for p in &e.paths {
                    match (p.limit_re, p.limit_im, p.limit_error) {
                        (Some(re), Some(im), Some(err)) => println!("{} {}: limit {re:.8e} {im:+.8e}i ± {err:.1e}", e.id, p.path),
                        _ => println!("{} {}: no limit", e.id, p.path),
                    }
                }
            }
            println!("{} rows, {} quadratures, {} cache hits, {} failures", m.rows, m.quadratures, m.cache_hits, m.failures.len());
            Ok(m.failures.is_empty())
        }
    }
}

/// Entry point of the `residue-lab` binary.
pub fn main_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let Command::Run(args) = cli.command;
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
