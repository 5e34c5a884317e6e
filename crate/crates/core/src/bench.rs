//! Command-line verbs and the files they exchange.
//!
//! Every command writes into an output directory (`--out`, or `HCSP_OUT_DIR`)
//! and leaves a `manifest.json` there with the arguments, the resolved
//! configuration, seeds, timings and the artifacts it produced.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::alns::{AcceptanceRule, DestroyProportion};
use crate::archive::ParetoArchive;
use crate::bialns::{bialns, BialnsConfig};
use crate::error::{Error, Result};
use crate::exact::{augmecon2, EnumerationLimits, ExternalBackend, ExternalSolver, GridConfig, InternalBackend};
use crate::generator::{generate_instance, GeneratorProfile};
use crate::indicators::{compare_fronts, write_report_csv, FrontReport, Point};
use crate::instance::{load_instance, save_instance, Instance, Minutes};
use crate::solution::{check_feasibility, evaluate, ObjectiveWeights, Objectives, Solution, SolutionFile};

/// Version of the front CSV and manifest layouts.
pub const FORMAT_VERSION: u32 = 1;
pub const OUT_DIR_ENV: &str = "HCSP_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "hcsp", version, about = "Biobjective home care scheduling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate seeded instances.
    Generate(GenerateArgs),
    /// Approximate the Pareto front with the metaheuristic.
    Solve(SolveArgs),
    /// Exact front with AUGMECON2.
    Exact(ExactArgs),
    /// Quality indicators between front files.
    Compare(CompareArgs),
    /// Feasibility and objectives of a solution file.
    Eval(EvalArgs),
    /// Solve every instance with several seeds and report indicators.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = "hcsp-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long, required_unless_present = "suite")]
    pub services: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub caregivers: usize,
    /// Instances per size; seeds are consecutive from `--seed`.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// default, solomon-10, solomon-15 or tiny. Chosen from the size when absent.
    #[arg(long)]
    pub profile: Option<String>,
    /// Ten instances each of 10 and 15 services, in two subdirectories.
    #[arg(long)]
    pub suite: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    /// solomon-10, solomon-15, real-week or quick.
    #[arg(long, default_value = "solomon-10")]
    pub preset: String,
    /// A configuration snapshot, e.g. the `config` of an earlier manifest.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: BialnsOverrides,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BialnsOverrides {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Step 1 iterations per direction.
    #[arg(long)]
    pub n: Option<usize>,
    /// Step 1 destroy proportion, e.g. `auto_100%`, `5%` or `0.05`.
    #[arg(long)]
    pub p: Option<DestroyProportion>,
    #[arg(long)]
    pub nroutes: Option<usize>,
    #[arg(long)]
    pub nalns: Option<usize>,
    #[arg(long)]
    pub pr: Option<DestroyProportion>,
    #[arg(long)]
    pub nsols: Option<usize>,
    /// Seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Seconds, per step 1 run.
    #[arg(long)]
    pub step1_time_limit: Option<f64>,
    #[arg(long)]
    pub cooling: Option<f64>,
    /// as-printed or annealing.
    #[arg(long, value_parser = parse_acceptance)]
    pub acceptance: Option<AcceptanceRule>,
}

fn parse_acceptance(s: &str) -> std::result::Result<AcceptanceRule, String> {
    match s {
        "as-printed" => Ok(AcceptanceRule::AsPrinted),
        "annealing" => Ok(AcceptanceRule::Annealing),
        _ => Err(format!("unknown acceptance rule {s:?}; expected as-printed or annealing")),
    }
}

fn seconds(s: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(s).map_err(|_| Error::Usage(format!("bad time limit {s}")))
}

impl BialnsOverrides {
    pub fn apply(&self, c: &mut BialnsConfig) -> Result<()> {
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.n {
            c.n = v;
        }
        if let Some(v) = self.p {
            c.p = v;
        }
        if let Some(v) = self.nroutes {
            c.nroutes = v;
        }
        if let Some(v) = self.nalns {
            c.nalns = v;
        }
        if let Some(v) = self.pr {
            c.pr = v;
        }
        if let Some(v) = self.nsols {
            c.nsols = v;
        }
        if let Some(v) = self.time_limit {
            c.time_limit = Some(seconds(v)?);
        }
        if let Some(v) = self.step1_time_limit {
            c.step1_time_limit = Some(seconds(v)?);
        }
        if let Some(v) = self.cooling {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Usage(format!("cooling {v} outside (0, 1)")));
            }
            c.cooling = v;
        }
        if let Some(v) = self.acceptance {
            c.acceptance = v;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    /// Exhaustive dynamic programming; small instances only.
    Internal,
    /// The MILP handed to an external solver program.
    External,
}

#[derive(Debug, Clone, Args)]
pub struct ExactArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value = "internal")]
    pub backend: BackendKind,
    /// Solver command for the external backend; receives MODEL.lp SOLUTION.txt.
    /// Defaults to the bundled scipy/HiGHS helper.
    #[arg(long)]
    pub solver: Option<String>,
    /// Start-time grid of the internal backend, in minutes.
    #[arg(long, default_value_t = 1)]
    pub step: Minutes,
    /// Grid intervals on the welfare range.
    #[arg(long, default_value_t = 100, conflicts_with = "full_grid")]
    pub intervals: usize,
    /// One interval per unit of the welfare range.
    #[arg(long)]
    pub full_grid: bool,
    /// Augmentation constant, in [1e-6, 1e-3].
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// Writes the LP model of every attempted grid point to this directory.
    #[arg(long)]
    pub emit_lp: Option<PathBuf>,
    #[arg(long, default_value_t = EnumerationLimits::default().max_services)]
    pub max_services: usize,
    #[arg(long, default_value_t = EnumerationLimits::default().max_caregivers)]
    pub max_caregivers: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Front CSV files (at least two).
    #[arg(num_args = 2.., required = true)]
    pub fronts: Vec<PathBuf>,
    /// Method names, one per front; file stems otherwise.
    #[arg(long, value_delimiter = ',')]
    pub labels: Vec<String>,
    /// Instance column of the report.
    #[arg(long, default_value = "instance")]
    pub instance: String,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    pub instance: PathBuf,
    pub solution: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(required = true)]
    pub instances: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
    pub seeds: Vec<u64>,
    #[arg(long, default_value = "quick")]
    pub preset: String,
    #[command(flatten)]
    pub overrides: BialnsOverrides,
    /// Also compute the exhaustive front on this start-time grid (minutes) and
    /// use it as an extra method.
    #[arg(long)]
    pub exact_step: Option<Minutes>,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Everything needed to rerun a command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub tool_version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub instances: Vec<PathBuf>,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
    pub artifacts: Vec<PathBuf>,
}

impl RunManifest {
    fn new(command: &str, argv: &[String]) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            argv: argv.to_vec(),
            instances: Vec::new(),
            config: serde_json::Value::Null,
            seeds: Vec::new(),
            timings: BTreeMap::new(),
            artifacts: Vec::new(),
        }
    }

    fn write(&mut self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        self.artifacts.sort();
        write_text(&path, &(serde_json::to_string_pretty(self)? + "\n"))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// One line of a front CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontRow {
    pub f1: i64,
    pub f2: i64,
    #[serde(default)]
    pub affinity_sum: Option<i64>,
    #[serde(default)]
    pub penalization_sum: Option<i64>,
    #[serde(default)]
    pub overtime_sum: Option<i64>,
    #[serde(default)]
    pub solution_file: Option<String>,
}

impl FrontRow {
    pub fn objectives(&self) -> Objectives {
        Objectives::new(self.f1, self.f2)
    }
}

pub fn write_front_csv(path: &Path, rows: &[FrontRow]) -> Result<()> {
    if let Some(dir) = path.parent() {
        create_dir(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(["f1", "f2", "affinity_sum", "penalization_sum", "overtime_sum", "solution_file"])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_front_csv(path: &Path) -> Result<Vec<FrontRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => Error::Parse(format!("{}: {e}", path.display())),
        _ => Error::Csv(e),
    })?;
    let headers = r.headers()?.clone();
    if !headers.iter().any(|h| h == "f1") || !headers.iter().any(|h| h == "f2") {
        return Err(Error::Parse(format!("{}: front files need f1 and f2 columns", path.display())));
    }
    r.deserialize()
        .enumerate()
        .map(|(k, row)| row.map_err(|e| Error::Parse(format!("{} row {}: {e}", path.display(), k + 1))))
        .collect()
}

/// Writes one solution JSON per archive member under `dir/solutions` and
/// returns the front rows, in archive order.
pub fn export_front<'a>(
    dir: &Path,
    instance: &Instance,
    members: impl IntoIterator<Item = (Objectives, Option<&'a Solution>)>,
    artifacts: &mut Vec<PathBuf>,
) -> Result<Vec<FrontRow>> {
    let weights = ObjectiveWeights::for_instance(instance);
    let mut rows = Vec::new();
    for (k, (o, solution)) in members.into_iter().enumerate() {
        let mut row = FrontRow {
            f1: o.cost,
            f2: o.welfare,
            affinity_sum: None,
            penalization_sum: None,
            overtime_sum: None,
            solution_file: None,
        };
        if let Some(s) = solution {
            let e = evaluate(s, instance, &weights)?;
            row.affinity_sum = Some(e.affinity_total);
            row.penalization_sum = Some(e.penalization_total);
            row.overtime_sum = Some(e.overtime_total());
            let name = format!("solutions/sol_{k:03}.json");
            let path = dir.join(&name);
            write_text(&path, &SolutionFile::from_solution(s, instance).to_json())?;
            artifacts.push(path);
            row.solution_file = Some(name);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Summary printed on stdout by each command.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub command: &'static str,
    pub out_dir: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub details: serde_json::Value,
}

pub fn cmd_generate(args: &GenerateArgs, argv: &[String]) -> Result<Outcome> {
    let out = &args.out.out;
    let mut manifest = RunManifest::new("generate", argv);
    let started = Instant::now();
    let mut batches: Vec<(PathBuf, usize, GeneratorProfile, usize)> = Vec::new();
    if args.suite {
        let count = args.count.unwrap_or(10);
        for (n, profile) in [(10, GeneratorProfile::solomon_10()), (15, GeneratorProfile::solomon_15())] {
            batches.push((out.join(&profile.name), n, profile, count));
        }
    } else {
        let n = args.services.unwrap_or(0);
        if n == 0 {
            return Err(Error::Usage("--services must be at least 1".into()));
        }
        let name = args.profile.clone().unwrap_or_else(|| if n >= 15 { "solomon-15" } else { "solomon-10" }.into());
        let profile =
            GeneratorProfile::by_name(&name).ok_or_else(|| Error::Usage(format!("unknown profile {name:?}")))?;
        batches.push((out.clone(), n, profile, args.count.unwrap_or(1)));
    }
    if args.caregivers == 0 {
        return Err(Error::Usage("--caregivers must be at least 1".into()));
    }
    if batches.iter().any(|b| b.3 == 0) {
        return Err(Error::Usage("--count must be at least 1".into()));
    }
    let mut files = Vec::new();
    for (dir, n, profile, count) in &batches {
        create_dir(dir)?;
        for k in 0..*count as u64 {
            let seed = args.seed.wrapping_add(k);
            let inst = generate_instance(*n, args.caregivers, seed, profile);
            let path = dir.join(format!("{}-n{n}-m{}-s{seed}.json", profile.name, args.caregivers));
            save_instance(&inst, &path)?;
            manifest.seeds.push(seed);
            files.push(path);
        }
    }
    manifest.config = serde_json::json!({
        "caregivers": args.caregivers,
        "batches": batches.iter().map(|(d, n, p, c)| serde_json::json!({
            "dir": d, "services": n, "count": c, "profile": p,
        })).collect::<Vec<_>>(),
    });
    manifest.artifacts = files.clone();
    manifest.timings.insert("total".into(), started.elapsed().as_secs_f64());
    let m = manifest.write(out)?;
    Ok(Outcome {
        command: "generate",
        out_dir: Some(out.clone()),
        manifest: Some(m),
        details: serde_json::json!({ "instances": files }),
    })
}

pub fn resolve_bialns_config(preset: &str, config: Option<&Path>, overrides: &BialnsOverrides) -> Result<BialnsConfig> {
    let mut c = match config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            // A whole manifest works too.
            let value = match value.get("config") {
                Some(inner) if value.get("format_version").is_some() => inner.clone(),
                _ => value,
            };
            serde_json::from_value(value)?
        }
        None => BialnsConfig::preset(preset).ok_or_else(|| Error::Usage(format!("unknown preset {preset:?}")))?,
    };
    overrides.apply(&mut c)?;
    Ok(c)
}

/// Runs the metaheuristic and writes `front.csv`, `solutions/`, `run_log.jsonl`.
pub fn solve_into(
    dir: &Path,
    instance: &Instance,
    config: &BialnsConfig,
    manifest: &mut RunManifest,
) -> Result<Vec<FrontRow>> {
    create_dir(dir)?;
    let started = Instant::now();
    let result = bialns(instance, config)?;
    manifest.timings.insert("bialns".into(), started.elapsed().as_secs_f64());
    let log_path = dir.join("run_log.jsonl");
    let file = fs::File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
    result.write_log(std::io::BufWriter::new(file))?;
    manifest.artifacts.push(log_path);
    let rows = export_front(
        dir,
        instance,
        result.archive.iter().map(|e| (e.objectives, Some(&e.payload))),
        &mut manifest.artifacts,
    )?;
    let front = dir.join("front.csv");
    write_front_csv(&front, &rows)?;
    manifest.artifacts.push(front);
    Ok(rows)
}

pub fn cmd_solve(args: &SolveArgs, argv: &[String]) -> Result<Outcome> {
    let out = &args.out.out;
    let instance = load_instance(&args.instance)?;
    let config = resolve_bialns_config(&args.preset, args.config.as_deref(), &args.overrides)?;
    let mut manifest = RunManifest::new("solve", argv);
    manifest.instances.push(args.instance.clone());
    manifest.config = serde_json::to_value(&config)?;
    manifest.seeds.push(config.seed);
    let rows = solve_into(out, &instance, &config, &mut manifest)?;
    let m = manifest.write(out)?;
    Ok(Outcome {
        command: "solve",
        out_dir: Some(out.clone()),
        manifest: Some(m),
        details: serde_json::json!({ "front_size": rows.len(), "front": rows.iter().map(|r| [r.f1, r.f2]).collect::<Vec<_>>() }),
    })
}

pub fn cmd_exact(args: &ExactArgs, argv: &[String]) -> Result<Outcome> {
    let out = &args.out.out;
    create_dir(out)?;
    let instance = load_instance(&args.instance)?;
    let grid = GridConfig {
        intervals: (!args.full_grid).then_some(args.intervals),
        eps: args.eps,
        emit_lp: args.emit_lp.clone(),
    };
    let limits = EnumerationLimits { max_services: args.max_services, max_caregivers: args.max_caregivers };
    let mut manifest = RunManifest::new("exact", argv);
    manifest.instances.push(args.instance.clone());
    let started = Instant::now();
    let result = match args.backend {
        BackendKind::Internal => {
            let mut backend = InternalBackend::with_limits(&instance, args.step, limits)?;
            augmecon2(&mut backend, &instance, &grid)?
        }
        BackendKind::External => {
            let mut solver = match &args.solver {
                Some(cmd) => ExternalSolver::from_command_line(cmd)?,
                None => ExternalSolver::scipy(),
            };
            solver.work_dir = Some(out.join("subproblems"));
            let mut backend = ExternalBackend::new(&instance, solver);
            augmecon2(&mut backend, &instance, &grid)?
        }
    };
    manifest.timings.insert("augmecon2".into(), started.elapsed().as_secs_f64());
    manifest.config = serde_json::json!({
        "backend": args.backend,
        "solver": args.solver,
        "step": args.step,
        "grid": grid,
        "limits": { "max_services": limits.max_services, "max_caregivers": limits.max_caregivers },
        "ub2": result.ub2,
        "lb2": result.lb2,
        "intervals": result.intervals,
    });
    if let Some(dir) = &args.emit_lp {
        for s in &result.steps {
            manifest.artifacts.push(dir.join(format!("grid_{:05}.lp", s.i2)));
        }
    }
    let steps_path = out.join("grid_steps.jsonl");
    let mut text = String::new();
    for s in &result.steps {
        text += &serde_json::to_string(s)?;
        text.push('\n');
    }
    write_text(&steps_path, &text)?;
    manifest.artifacts.push(steps_path);
    let archive: &ParetoArchive<Option<Solution>> = &result.archive;
    let rows = export_front(
        out,
        &instance,
        archive.iter().map(|e| (e.objectives, e.payload.as_ref())),
        &mut manifest.artifacts,
    )?;
    let front = out.join("front.csv");
    write_front_csv(&front, &rows)?;
    manifest.artifacts.push(front);
    let m = manifest.write(out)?;
    Ok(Outcome {
        command: "exact",
        out_dir: Some(out.clone()),
        manifest: Some(m),
        details: serde_json::json!({
            "front_size": rows.len(),
            "grid_points": result.steps.len(),
            "front": rows.iter().map(|r| [r.f1, r.f2]).collect::<Vec<_>>(),
        }),
    })
}

fn points(rows: &[FrontRow]) -> Vec<Point> {
    rows.iter().map(|r| [r.f1 as f64, r.f2 as f64]).collect()
}

/// `method,f1,f2,f1_norm,f2_norm` for every point of every front.
pub fn write_plot_csv(path: &Path, labelled: &[(String, Vec<Point>)]) -> Result<()> {
    let fronts: Vec<Vec<Point>> = labelled.iter().map(|(_, f)| f.clone()).collect();
    let n = crate::indicators::normalize_fronts(&fronts)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["method", "f1", "f2", "f1_norm", "f2_norm"])?;
    for ((label, raw), norm) in labelled.iter().zip(&n.fronts) {
        for (p, q) in raw.iter().zip(norm) {
            w.write_record([label.clone(), p[0].to_string(), p[1].to_string(), q[0].to_string(), q[1].to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn cmd_compare(args: &CompareArgs, argv: &[String]) -> Result<Outcome> {
    if args.fronts.len() < 2 {
        return Err(Error::Usage("compare needs at least two front files".into()));
    }
    if !args.labels.is_empty() && args.labels.len() != args.fronts.len() {
        return Err(Error::Usage(format!("{} labels for {} fronts", args.labels.len(), args.fronts.len())));
    }
    let out = &args.out.out;
    create_dir(out)?;
    let mut labelled = Vec::new();
    for (k, path) in args.fronts.iter().enumerate() {
        let label = args.labels.get(k).cloned().unwrap_or_else(|| default_label(path, k));
        let rows = read_front_csv(path)?;
        if rows.is_empty() {
            return Err(Error::Parse(format!("{}: empty front", path.display())));
        }
        labelled.push((label, points(&rows)));
    }
    let reports = compare_fronts(&labelled)?;
    let mut manifest = RunManifest::new("compare", argv);
    manifest.instances = args.fronts.clone();
    manifest.config =
        serde_json::json!({ "instance": args.instance, "labels": labelled.iter().map(|l| &l.0).collect::<Vec<_>>() });
    let report = out.join("report.csv");
    let file = fs::File::create(&report).map_err(|e| Error::io(&report, e))?;
    write_report_csv(file, &[(args.instance.clone(), reports.clone())])?;
    let plot = out.join("plot.csv");
    write_plot_csv(&plot, &labelled)?;
    manifest.artifacts = vec![report, plot];
    let m = manifest.write(out)?;
    Ok(Outcome { command: "compare", out_dir: Some(out.clone()), manifest: Some(m), details: report_json(&reports) })
}

fn default_label(path: &Path, k: usize) -> String {
    // front.csv files are told apart by their directory.
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let label = if stem == "front" {
        path.parent().and_then(Path::file_name).map(|s| s.to_string_lossy().into_owned()).unwrap_or(stem)
    } else {
        stem
    };
    if label.is_empty() {
        format!("front{}", k + 1)
    } else {
        label
    }
}

fn report_json(reports: &[FrontReport]) -> serde_json::Value {
    serde_json::Value::Array(
        reports
            .iter()
            .map(|r| serde_json::json!({ "method": r.label, "CV": r.cv, "EPS": r.eps, "GD": r.gd, "IGD": r.igd, "size": r.size }))
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub feasible: bool,
    pub f1: i64,
    pub f2: i64,
    pub violations: Vec<String>,
    pub metrics: Option<crate::solution::SolutionMetrics>,
}

pub fn eval_solution(instance: &Instance, file: &SolutionFile) -> Result<EvalReport> {
    let solution = file.to_solution(instance)?;
    let violations: Vec<String> = check_feasibility(&solution, instance).iter().map(ToString::to_string).collect();
    let e = evaluate(&solution, instance, &ObjectiveWeights::for_instance(instance))?;
    Ok(EvalReport {
        feasible: violations.is_empty(),
        f1: e.objectives.cost,
        f2: e.objectives.welfare,
        violations,
        metrics: SolutionFile::from_solution(&solution, instance).metrics,
    })
}

pub fn cmd_eval(args: &EvalArgs) -> Result<Outcome> {
    let instance = load_instance(&args.instance)?;
    let text = fs::read_to_string(&args.solution).map_err(|e| Error::io(&args.solution, e))?;
    let file: SolutionFile = serde_json::from_str(&text)?;
    let report = eval_solution(&instance, &file)?;
    Ok(Outcome { command: "eval", out_dir: None, manifest: None, details: serde_json::to_value(report)? })
}

pub fn cmd_sweep(args: &SweepArgs, argv: &[String]) -> Result<Outcome> {
    let out = &args.out.out;
    create_dir(out)?;
    let mut manifest = RunManifest::new("sweep", argv);
    manifest.instances = args.instances.clone();
    manifest.seeds = args.seeds.clone();
    let base = resolve_bialns_config(&args.preset, None, &args.overrides)?;
    manifest.config = serde_json::json!({ "bialns": base, "exact_step": args.exact_step });
    let mut rows = Vec::new();
    for path in &args.instances {
        let instance = load_instance(path)?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let mut labelled = Vec::new();
        if let Some(step) = args.exact_step {
            let started = Instant::now();
            let a = crate::exact::brute_force_front(&instance, step)?;
            manifest.timings.insert(format!("{name}/exact"), started.elapsed().as_secs_f64());
            let dir = out.join(&name).join("exact");
            let f = export_front(
                &dir,
                &instance,
                a.iter().map(|e| (e.objectives, Some(&e.payload))),
                &mut manifest.artifacts,
            )?;
            write_front_csv(&dir.join("front.csv"), &f)?;
            manifest.artifacts.push(dir.join("front.csv"));
            labelled.push(("exact".to_string(), points(&f)));
        }
        for &seed in &args.seeds {
            let config = BialnsConfig { seed, ..base.clone() };
            let dir = out.join(&name).join(format!("seed_{seed}"));
            let mut sub = RunManifest::new("solve", argv);
            let f = solve_into(&dir, &instance, &config, &mut sub)?;
            manifest.timings.insert(format!("{name}/seed_{seed}"), sub.timings["bialns"]);
            manifest.artifacts.extend(sub.artifacts);
            labelled.push((format!("bialns_seed_{seed}"), points(&f)));
        }
        rows.push((name, compare_fronts(&labelled)?));
    }
    let report = out.join("report.csv");
    let file = fs::File::create(&report).map_err(|e| Error::io(&report, e))?;
    write_report_csv(file, &rows)?;
    manifest.artifacts.push(report);
    let m = manifest.write(out)?;
    let details = rows.iter().map(|(n, r)| serde_json::json!({ "instance": n, "methods": report_json(r) })).collect();
    Ok(Outcome {
        command: "sweep",
        out_dir: Some(out.clone()),
        manifest: Some(m),
        details: serde_json::Value::Array(details),
    })
}

pub fn run(cli: &Cli, argv: &[String]) -> Result<Outcome> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a, argv),
        Command::Solve(a) => cmd_solve(a, argv),
        Command::Exact(a) => cmd_exact(a, argv),
        Command::Compare(a) => cmd_compare(a, argv),
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a, argv),
    }
}

/// Parses `args`, runs the command and prints its outcome (stdout) or an
/// error object (stderr). Returns the process exit code: 0 on success, 1 on
/// errors and 2 on usage errors.
pub fn main_with_args(args: impl IntoIterator<Item = OsString>) -> i32 {
    let argv: Vec<String> = args.into_iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli, &argv) {
        Ok(outcome) => {
            use std::io::Write;
            // A closed pipe (e.g. `| head`) is not a failure of the command.
            let _ =
                writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&outcome).expect("outcome serializes"));
            0
        }
        Err(e) => {
            let body = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{body}");
            if matches!(e, Error::Usage(_)) {
                2
            } else {
                1
            }
        }
    }
}
