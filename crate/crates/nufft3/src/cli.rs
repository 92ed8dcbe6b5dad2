//! Command-line harness: accuracy sweeps against the direct oracles,
//! variant/strategy benchmarks, oracle verification, PIF runs, and tuning
//! tables mapping kernel width to spreading parameters.
//!
//! Exit codes: 0 success, 2 usage error, 3 validation failure.

use crate::bench::{bench_transform, random_modes, random_particles, BenchProtocol};
use crate::error::{Error, Result};
use crate::interp::InterpOrdering;
use crate::oracle::{nudft_type1, nudft_type2, DEFAULT_COST_CAP};
use crate::pif::{write_diagnostics_csv, PifConfig, PifRun};
use crate::pipeline::{max_rel_error, one_norm, FftStrategy, NufftPlan, PlanConfig};
use crate::spread::{ExecMode, SpreadVariant, TileParams};
use crate::window::select_params;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "nufft3", version, about = "3D nonuniform FFT workbench", disable_help_subcommand = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep tolerances and compare transforms against the direct oracle.
    Accuracy(AccuracyArgs),
    /// Warm-up/timed benchmark of transform executions.
    Bench(BenchArgs),
    /// Run the Landau-damping particle simulation.
    Pif(PifArgs),
    /// Single-instance oracle comparison; fails (exit 3) beyond tolerance.
    Verify(VerifyArgs),
    /// Exhaustive sweep over spreading parameters; writes a tuning table.
    Tune(TuneArgs),
}

/// Flags shared by the transform-driving subcommands.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Transform type: 1 (points to modes) or 2 (modes to points).
    #[arg(long = "type", default_value_t = 1)]
    pub transform_type: u8,
    /// Retained modes per axis (even).
    #[arg(long, default_value_t = 16)]
    pub modes: usize,
    /// Particles per retained mode; point count is density * modes^3.
    #[arg(long, default_value_t = 8.0)]
    pub density: f64,
    /// Spreading variant: atomic, tiled, gridpar, or all.
    #[arg(long, default_value = "atomic")]
    pub variant: String,
    /// Interpolation ordering: direct, morton, or bin.
    #[arg(long, default_value = "direct")]
    pub interp: String,
    /// FFT strategy: full or pruned.
    #[arg(long, default_value = "full")]
    pub fft: String,
    /// Pruned sub-transform concurrency.
    #[arg(long, default_value_t = 4)]
    pub nconc: usize,
    /// Simulated rank grid, e.g. 2,2,1.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 1, 1])]
    pub ranks: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker thread cap for parallel execution paths.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<String>,
    /// Output format: csv or json.
    #[arg(long, default_value = "csv")]
    pub format: String,
    /// Tuning table path consulted for spreading parameters.
    #[arg(long)]
    pub tuning: Option<String>,
}

#[derive(Debug, Args)]
pub struct AccuracyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated tolerance list.
    #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-4,1e-6,1e-8")]
    pub eps: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    /// Comma-separated density list for sweep mode; overrides --density.
    #[arg(long, value_delimiter = ',')]
    pub densities: Option<Vec<f64>>,
    /// Emit per-stage timing columns.
    #[arg(long, default_value_t = false)]
    pub breakdown: bool,
    /// Warm-up iterations before timing.
    #[arg(long, default_value_t = 5)]
    pub warmup: usize,
    /// Timed iterations.
    #[arg(long, default_value_t = 20)]
    pub timed: usize,
}

#[derive(Debug, Args)]
pub struct PifArgs {
    /// TOML config file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<String>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub fft: Option<String>,
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub ranks: Option<Vec<usize>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Diagnostics CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    /// Acceptance factor: fail when max_rel_err > factor * eps.
    #[arg(long, default_value_t = 10.0)]
    pub factor: f64,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    /// Kernel widths to tune, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "5")]
    pub widths: Vec<usize>,
}

/// Spreading parameters for one kernel width in a tuning table.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
pub struct TuningEntry {
    pub tile: [usize; 3],
    pub z_split: usize,
    pub team: usize,
}

impl From<TuningEntry> for TileParams {
    fn from(e: TuningEntry) -> TileParams {
        TileParams { tile: e.tile, z_split: e.z_split, team: e.team }
    }
}

impl From<TileParams> for TuningEntry {
    fn from(p: TileParams) -> TuningEntry {
        TuningEntry { tile: p.tile, z_split: p.z_split, team: p.team }
    }
}

/// Parse a tuning table: one `[wK]` section per kernel width with `tile`,
/// `z_split`, and `team` keys. Missing widths fall back to defaults at
/// lookup time; an empty file is an empty (all-defaults) table.
pub fn load_tuning_table(path: &str) -> Result<BTreeMap<usize, TuningEntry>> {
    let text = std::fs::read_to_string(path)?;
    parse_tuning_table(&text)
}

pub fn parse_tuning_table(text: &str) -> Result<BTreeMap<usize, TuningEntry>> {
    let raw: BTreeMap<String, TuningEntry> =
        toml::from_str(text).map_err(|e| Error::Config(format!("tuning table: {e}")))?;
    let mut map = BTreeMap::new();
    for (key, entry) in raw {
        let w: usize = key
            .strip_prefix('w')
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Config(format!("tuning section '{key}' is not of the form wK")))?;
        if entry.tile.iter().any(|&t| t == 0) || entry.z_split == 0 || entry.team == 0 {
            return Err(Error::Config(format!("tuning section '{key}' has zero-valued parameters")));
        }
        map.insert(w, entry);
    }
    Ok(map)
}

pub fn write_tuning_table(map: &BTreeMap<usize, TuningEntry>) -> String {
    let named: BTreeMap<String, TuningEntry> =
        map.iter().map(|(w, e)| (format!("w{w}"), *e)).collect();
    toml::to_string(&named).expect("tuning table serializes")
}

/// Tile parameters for a width: tuning-table entry if present, else default.
pub fn tile_params_for(table: &BTreeMap<usize, TuningEntry>, width: usize) -> TileParams {
    table.get(&width).copied().map(Into::into).unwrap_or_default()
}

fn parse_variant(name: &str, params: TileParams) -> Result<SpreadVariant> {
    match name {
        "atomic" => Ok(SpreadVariant::Atomic),
        "tiled" => Ok(SpreadVariant::Tiled(params)),
        "gridpar" => Ok(SpreadVariant::GridParallel(params)),
        other => Err(Error::Config(format!("unknown spread variant '{other}'"))),
    }
}

fn parse_interp(name: &str, params: TileParams) -> Result<InterpOrdering> {
    match name {
        "direct" => Ok(InterpOrdering::Direct),
        "morton" => Ok(InterpOrdering::Morton),
        "bin" => Ok(InterpOrdering::Bin(params)),
        other => Err(Error::Config(format!("unknown interpolation ordering '{other}'"))),
    }
}

fn parse_strategy(name: &str, nconc: usize) -> Result<FftStrategy> {
    match name {
        "full" => Ok(FftStrategy::Full),
        "pruned" => Ok(FftStrategy::Pruned(nconc)),
        other => Err(Error::Config(format!("unknown fft strategy '{other}'"))),
    }
}

impl CommonArgs {
    fn ranks_array(&self) -> Result<Option<[usize; 3]>> {
        if self.ranks.len() != 3 {
            return Err(Error::Config(format!("--ranks needs three values, got {}", self.ranks.len())));
        }
        let r = [self.ranks[0], self.ranks[1], self.ranks[2]];
        if r == [1, 1, 1] {
            Ok(None)
        } else {
            Ok(Some(r))
        }
    }

    fn variant_names(&self) -> Result<Vec<&'static str>> {
        match self.variant.as_str() {
            "all" => Ok(vec!["atomic", "tiled", "gridpar"]),
            "atomic" => Ok(vec!["atomic"]),
            "tiled" => Ok(vec!["tiled"]),
            "gridpar" => Ok(vec!["gridpar"]),
            other => Err(Error::Config(format!("unknown spread variant '{other}'"))),
        }
    }

    fn tuning(&self) -> Result<BTreeMap<usize, TuningEntry>> {
        match &self.tuning {
            Some(path) => load_tuning_table(path),
            None => Ok(BTreeMap::new()),
        }
    }

    fn plan_config(&self, eps: f64, variant_name: &str) -> Result<PlanConfig> {
        let spec = select_params(eps, 3)?;
        let params = tile_params_for(&self.tuning()?, spec.width);
        Ok(PlanConfig {
            modes_n: self.modes,
            length: 2.0 * std::f64::consts::PI,
            tolerance: eps,
            dim: 3,
            variant: parse_variant(variant_name, params)?,
            ordering: parse_interp(&self.interp, params)?,
            strategy: parse_strategy(&self.fft, self.nconc)?,
            exec: ExecMode::Deterministic,
            ranks: self.ranks_array()?,
        })
    }

    fn num_points(&self) -> usize {
        (self.density * (self.modes as f64).powi(3)).round() as usize
    }

    fn apply_thread_cap(&self) {
        if let Some(n) = self.threads {
            // Ignore failure: the global pool can only be built once.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// One accuracy-sweep output row.
#[derive(Debug, Serialize)]
pub struct AccuracyRow {
    pub r#type: u8,
    pub n: usize,
    pub np: usize,
    pub eps: f64,
    pub w: usize,
    pub variant: String,
    pub max_rel_err: f64,
    pub runtime_ms: f64,
}

pub const ACCURACY_HEADER: &str = "type,N,Np,eps,w,variant,max_rel_err,runtime_ms";

/// One benchmark output row.
#[derive(Debug, Serialize)]
pub struct BenchRow {
    pub r#type: u8,
    pub n: usize,
    pub np: usize,
    pub rho: f64,
    pub eps: f64,
    pub w: usize,
    pub variant: String,
    pub median_s: f64,
    pub min_s: f64,
    pub max_s: f64,
    pub mpts_per_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_transfer_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_fft_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_deconv_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_halo_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_total_s: Option<f64>,
}

pub const BENCH_HEADER: &str = "type,N,Np,rho,eps,w,variant,median_s,min_s,max_s,mpts_per_s";
pub const BENCH_BREAKDOWN_HEADER: &str =
    "type,N,Np,rho,eps,w,variant,median_s,min_s,max_s,mpts_per_s,t_transfer_s,t_fft_s,t_deconv_s,t_halo_s,t_total_s";

fn write_output(path: &Option<String>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = std::fs::File::create(p)?;
            f.write_all(content.as_bytes())?;
        }
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn emit<T: Serialize>(rows: &[T], header: &str, csv_rows: Vec<String>, args: &CommonArgs) -> Result<()> {
    let content = match args.format.as_str() {
        "csv" => {
            let mut s = String::from(header);
            s.push('\n');
            for r in csv_rows {
                s.push_str(&r);
                s.push('\n');
            }
            s
        }
        "json" => {
            let mut s = serde_json::to_string_pretty(rows).map_err(|e| Error::Config(e.to_string()))?;
            s.push('\n');
            s
        }
        other => return Err(Error::Config(format!("unknown output format '{other}'"))),
    };
    write_output(&args.out, &content)
}

pub fn cmd_accuracy(args: &AccuracyArgs) -> Result<()> {
    if args.eps.is_empty() {
        return Err(Error::Config("tolerance list must not be empty".into()));
    }
    args.common.apply_thread_cap();
    let np = args.common.num_points();
    let mut rows = Vec::new();
    let mut csv = Vec::new();
    for &eps in &args.eps {
        for vname in args.common.variant_names()? {
            let cfg = args.common.plan_config(eps, vname)?;
            let plan = NufftPlan::new(cfg.clone())?;
            let ps = random_particles(np, 3, cfg.length, args.common.seed);
            let t0 = Instant::now();
            let (err, w) = match args.common.transform_type {
                1 => {
                    let got = plan.type1(&ps)?;
                    let want = nudft_type1(&ps, cfg.modes_n, DEFAULT_COST_CAP)?;
                    (max_rel_error(&got.values, &want.values, one_norm(&ps.strengths)), plan.spec.width)
                }
                2 => {
                    let modes = random_modes(cfg.modes_n, 3, args.common.seed ^ 0xabcd);
                    let got = plan.type2(&modes, &ps.positions)?;
                    let want = nudft_type2(&modes, &ps.positions, cfg.length, DEFAULT_COST_CAP)?;
                    (max_rel_error(&got, &want, one_norm(&modes.values)), plan.spec.width)
                }
                other => return Err(Error::Config(format!("transform type must be 1 or 2, got {other}"))),
            };
            let runtime_ms = t0.elapsed().as_secs_f64() * 1e3;
            csv.push(format!(
                "{},{},{},{:e},{},{},{:.6e},{:.3}",
                args.common.transform_type, args.common.modes, np, eps, w, vname, err, runtime_ms
            ));
            rows.push(AccuracyRow {
                r#type: args.common.transform_type,
                n: args.common.modes,
                np,
                eps,
                w,
                variant: vname.into(),
                max_rel_err: err,
                runtime_ms,
            });
        }
    }
    emit(&rows, ACCURACY_HEADER, csv, &args.common)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    args.common.apply_thread_cap();
    let protocol = BenchProtocol { warmup: args.warmup, timed: args.timed };
    let densities = args.densities.clone().unwrap_or_else(|| vec![args.common.density]);
    if densities.is_empty() {
        return Err(Error::Config("density list must not be empty".into()));
    }
    let mut rows = Vec::new();
    let mut csv = Vec::new();
    for &rho in &densities {
        for vname in args.common.variant_names()? {
            let cfg = args.common.plan_config(args.eps, vname)?;
            let np = (rho * (args.common.modes as f64).powi(3)).round() as usize;
            let (res, breakdown) =
                bench_transform(&cfg, args.common.transform_type, np, args.common.seed, protocol)?;
            let w = select_params(args.eps, 3)?.width;
            let mut row = BenchRow {
                r#type: args.common.transform_type,
                n: args.common.modes,
                np,
                rho,
                eps: args.eps,
                w,
                variant: vname.into(),
                median_s: res.median_s,
                min_s: res.min_s,
                max_s: res.max_s,
                mpts_per_s: res.mpts_per_s(np),
                t_transfer_s: None,
                t_fft_s: None,
                t_deconv_s: None,
                t_halo_s: None,
                t_total_s: None,
            };
            let mut line = format!(
                "{},{},{},{},{:e},{},{},{:.6e},{:.6e},{:.6e},{:.4}",
                row.r#type, row.n, row.np, row.rho, row.eps, row.w, row.variant,
                row.median_s, row.min_s, row.max_s, row.mpts_per_s
            );
            if args.breakdown {
                row.t_transfer_s = Some(breakdown.grid_transfer.as_secs_f64());
                row.t_fft_s = Some(breakdown.fft.as_secs_f64());
                row.t_deconv_s = Some(breakdown.deconv.as_secs_f64());
                row.t_halo_s = Some(breakdown.halo.as_secs_f64());
                row.t_total_s = Some(breakdown.total.as_secs_f64());
                line.push_str(&format!(
                    ",{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
                    row.t_transfer_s.unwrap(),
                    row.t_fft_s.unwrap(),
                    row.t_deconv_s.unwrap(),
                    row.t_halo_s.unwrap(),
                    row.t_total_s.unwrap()
                ));
            }
            csv.push(line);
            rows.push(row);
        }
    }
    let header = if args.breakdown { BENCH_BREAKDOWN_HEADER } else { BENCH_HEADER };
    emit(&rows, header, csv, &args.common)
}

pub fn cmd_pif(args: &PifArgs) -> Result<()> {
    let mut config: PifConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("config: {e}")))?
        }
        None => PifConfig::default(),
    };
    if let Some(v) = args.steps {
        config.steps = v;
    }
    if let Some(v) = args.dt {
        config.dt = v;
    }
    if let Some(v) = args.modes {
        config.modes = v;
    }
    if let Some(v) = args.eps {
        config.eps = v;
    }
    if let Some(v) = &args.fft {
        config.fft = v.clone();
    }
    if let Some(v) = &args.variant {
        config.variant = v.clone();
    }
    if let Some(v) = &args.ranks {
        if v.len() != 3 {
            return Err(Error::Config(format!("--ranks needs three values, got {}", v.len())));
        }
        config.ranks = [v[0], v[1], v[2]];
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    let mut run = PifRun::new(config)?;
    run.run()?;
    let mut buf = Vec::new();
    write_diagnostics_csv(&run.rows, &mut buf)?;
    write_output(&args.out, std::str::from_utf8(&buf).expect("csv is utf8"))
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<()> {
    args.common.apply_thread_cap();
    let np = args.common.num_points();
    let mut worst = 0.0f64;
    for vname in args.common.variant_names()? {
        let cfg = args.common.plan_config(args.eps, vname)?;
        let plan = NufftPlan::new(cfg.clone())?;
        let ps = random_particles(np, 3, cfg.length, args.common.seed);
        let err = match args.common.transform_type {
            1 => {
                let got = plan.type1(&ps)?;
                let want = nudft_type1(&ps, cfg.modes_n, DEFAULT_COST_CAP)?;
                max_rel_error(&got.values, &want.values, one_norm(&ps.strengths))
            }
            2 => {
                let modes = random_modes(cfg.modes_n, 3, args.common.seed ^ 0xabcd);
                let got = plan.type2(&modes, &ps.positions)?;
                let want = nudft_type2(&modes, &ps.positions, cfg.length, DEFAULT_COST_CAP)?;
                max_rel_error(&got, &want, one_norm(&modes.values))
            }
            other => return Err(Error::Config(format!("transform type must be 1 or 2, got {other}"))),
        };
        println!(
            "type {} N {} Np {} eps {:e} variant {}: max_rel_err {:.6e} (bound {:.3e})",
            args.common.transform_type, args.common.modes, np, args.eps, vname, err,
            args.factor * args.eps
        );
        worst = worst.max(err);
    }
    if worst > args.factor * args.eps {
        return Err(Error::Validation(format!(
            "max relative error {worst:.6e} exceeds {:.3e}",
            args.factor * args.eps
        )));
    }
    Ok(())
}

pub fn cmd_tune(args: &TuneArgs) -> Result<()> {
    args.common.apply_thread_cap();
    let np = args.common.num_points();
    let protocol = BenchProtocol { warmup: 2, timed: 5 };
    let mut table = BTreeMap::new();
    for &w in &args.widths {
        // The tolerance implied by a width via the selection rule.
        let eps = 10f64.powi(-(w as i32 - 1));
        let mut best: Option<(f64, TuningEntry)> = None;
        for tile in [[4usize, 4, 4], [8, 8, 4], [8, 8, 8], [16, 8, 4]] {
            for z_split in [2usize, 4] {
                for team in [2usize, 4] {
                    let params = TileParams { tile, z_split, team };
                    let cfg = PlanConfig {
                        modes_n: args.common.modes,
                        tolerance: eps,
                        variant: SpreadVariant::Tiled(params),
                        ..args.common.plan_config(eps, "tiled")?
                    };
                    let (res, _) = bench_transform(&cfg, 1, np, args.common.seed, protocol)?;
                    let entry = TuningEntry { tile, z_split, team };
                    if best.map(|(t, _)| res.median_s < t).unwrap_or(true) {
                        best = Some((res.median_s, entry));
                    }
                }
            }
        }
        table.insert(w, best.expect("nonempty lattice").1);
    }
    write_output(&args.common.out, &write_tuning_table(&table))
}

/// Execute a parsed command, mapping errors to exit codes.
pub fn run(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Accuracy(a) => cmd_accuracy(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Pif(a) => cmd_pif(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Tune(a) => cmd_tune(a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Error::Validation(msg)) => {
            eprintln!("validation failure: {msg}");
            EXIT_VALIDATION
        }
        Err(Error::Config(msg)) => {
            eprintln!("usage error: {msg}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_VALIDATION
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuning_table_round_trip() {
        let mut table = BTreeMap::new();
        table.insert(5usize, TuningEntry { tile: [8, 8, 4], z_split: 4, team: 4 });
        table.insert(9usize, TuningEntry { tile: [4, 4, 4], z_split: 2, team: 2 });
        let text = write_tuning_table(&table);
        let back = parse_tuning_table(&text).unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn empty_tuning_table_is_all_defaults() {
        let table = parse_tuning_table("").unwrap();
        assert!(table.is_empty());
        assert_eq!(tile_params_for(&table, 5), TileParams::default());
    }

    #[test]
    fn tuning_entry_overrides_only_its_width() {
        let text = "[w5]\ntile = [16, 8, 4]\nz_split = 2\nteam = 4\n";
        let table = parse_tuning_table(text).unwrap();
        assert_eq!(tile_params_for(&table, 5).tile, [16, 8, 4]);
        assert_eq!(tile_params_for(&table, 7), TileParams::default());
    }

    #[test]
    fn malformed_tuning_tables_rejected() {
        assert!(parse_tuning_table("[q5]\ntile=[1,1,1]\nz_split=1\nteam=1\n").is_err());
        assert!(parse_tuning_table("[w5]\ntile=[0,1,1]\nz_split=1\nteam=1\n").is_err());
        assert!(parse_tuning_table("not toml [").is_err());
    }

    #[test]
    fn cli_parses_subcommands() {
        let cli = Cli::try_parse_from(["nufft3", "accuracy", "--eps", "1e-2,1e-4", "--modes", "8"]).unwrap();
        match cli.command {
            Command::Accuracy(a) => {
                assert_eq!(a.eps, vec![1e-2, 1e-4]);
                assert_eq!(a.common.modes, 8);
            }
            _ => panic!("wrong subcommand"),
        }
        assert!(Cli::try_parse_from(["nufft3", "bogus"]).is_err());
    }

    #[test]
    fn empty_eps_list_is_usage_error() {
        let args = AccuracyArgs {
            common: CommonArgs {
                transform_type: 1,
                modes: 8,
                density: 1.0,
                variant: "atomic".into(),
                interp: "direct".into(),
                fft: "full".into(),
                nconc: 1,
                ranks: vec![1, 1, 1],
                seed: 1,
                threads: None,
                out: None,
                format: "csv".into(),
                tuning: None,
            },
            eps: vec![],
        };
        assert!(matches!(cmd_accuracy(&args), Err(Error::Config(_))));
    }
}
