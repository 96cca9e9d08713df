//! `trajmine`: encode, anonymize, synthesize and mine wLAS databases.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::SeedableRng;

use trajmine::anonymize::{toy_anonymize, validate_anonymization};
use trajmine::grid::{encode_database, CellGrid, Rect};
use trajmine::io::{
    ingest, read_anon_jsonl, read_raw_jsonl, write_anon_jsonl, write_raw_jsonl, write_wlas_jsonl, Format, ReadOptions,
};
use trajmine::oracle::{brute_topk_capped, DEFAULT_CANDIDATE_CAP};
use trajmine::report::{ConfigReport, RunReport};
use trajmine::synth::{random_database, random_raw, SynthParams};
use trajmine::{mine_topk, Error, Exact, MiningConfig, Scalar, TrajectoryPattern, Variant, WlasDatabase};

#[derive(Parser)]
#[command(
    name = "trajmine",
    version,
    about = "Top-k trajectory pattern mining over wLAS databases"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine the top-k patterns and print a JSON run report.
    Mine(MineArgs),
    /// Encode anon-jsonl trajectories on a grid as wlas-jsonl.
    Encode(EncodeArgs),
    /// Toy k-anonymous, l-diverse anonymization of raw-jsonl trajectories.
    Anonymize(AnonymizeArgs),
    /// Write a seeded random database.
    Synth(SynthArgs),
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Study region as `xmin,ymin,xmax,ymax`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    region: Option<Vec<String>>,
    #[arg(long)]
    cell_width: Option<String>,
    #[arg(long)]
    cell_height: Option<String>,
}

impl GridArgs {
    fn grid<S: Scalar>(&self) -> Result<Option<CellGrid<S>>> {
        let (Some(region), Some(w), Some(h)) = (&self.region, &self.cell_width, &self.cell_height) else {
            if self.region.is_some() || self.cell_width.is_some() || self.cell_height.is_some() {
                bail!("--region, --cell-width and --cell-height go together");
            }
            return Ok(None);
        };
        Ok(Some(CellGrid::new(region_rect(region)?, number(w)?, number(h)?)?))
    }
}

fn region_rect<S: Scalar>(values: &[String]) -> Result<Rect<S>> {
    let c: Vec<S> = values.iter().map(|v| number(v)).collect::<Result<_>>()?;
    let [x0, y0, x1, y1]: [S; 4] = c
        .try_into()
        .map_err(|_| anyhow!("--region takes four values xmin,ymin,xmax,ymax"))?;
    Ok(Rect::new(x0, y0, x1, y1)?)
}

fn number<S: Scalar>(text: &str) -> Result<S> {
    S::parse_weight(text.trim()).ok_or_else(|| anyhow!("not a number: `{text}`"))
}

#[derive(Args)]
struct MineArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "wlas-jsonl", value_parser = parse_format)]
    format: Format,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, default_value = "full", value_parser = parse_variant)]
    variant: Variant,
    #[arg(long, overrides_with = "no_ti")]
    ti: bool,
    #[arg(long, overrides_with = "ti")]
    no_ti: bool,
    #[arg(long, overrides_with = "no_tu")]
    tu: bool,
    #[arg(long, overrides_with = "tu")]
    no_tu: bool,
    #[arg(long, overrides_with = "no_width_prune")]
    width_prune: bool,
    #[arg(long, overrides_with = "width_prune")]
    no_width_prune: bool,
    #[arg(long, overrides_with = "no_depth_prune")]
    depth_prune: bool,
    #[arg(long, overrides_with = "depth_prune")]
    no_depth_prune: bool,
    /// Disable both pruning rules (exhaustive search).
    #[arg(long)]
    no_prune: bool,
    #[command(flatten)]
    grid: GridArgs,
    /// Offset between internal cell ids and ids in files and reports.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u32).range(0..=1))]
    id_base: u32,
    /// Echoed in logs; mining itself is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the metrics document to this path.
    #[arg(long)]
    metrics_out: Option<PathBuf>,
    /// Cross-check the results against the brute-force oracle when the
    /// database is small enough.
    #[arg(long)]
    oracle_check: bool,
    /// Run every variant for each k in `--sweep-k` (default: `--k`)
    /// concurrently and print one report per line.
    #[arg(long)]
    sweep: bool,
    #[arg(long, value_delimiter = ',', requires = "sweep", value_parser = clap::value_parser!(u64).range(1..))]
    sweep_k: Vec<u64>,
    /// Use f64 weights instead of exact rationals.
    #[arg(long)]
    float: bool,
    /// Reject wlas-jsonl terms whose weights do not sum to 1.
    #[arg(long)]
    strict_weights: bool,
}

fn parse_format(s: &str) -> std::result::Result<Format, Error> {
    s.parse()
}

fn parse_variant(s: &str) -> std::result::Result<Variant, Error> {
    s.parse()
}

fn toggle(on: bool, off: bool) -> Option<bool> {
    match (on, off) {
        (true, _) => Some(true),
        (_, true) => Some(false),
        _ => None,
    }
}

impl MineArgs {
    fn config(&self, k: usize, variant: Variant) -> MiningConfig {
        let mut c = MiningConfig::new(k, variant);
        if self.no_prune {
            c = c.without_pruning();
        }
        if !self.sweep {
            c.ti = toggle(self.ti, self.no_ti).unwrap_or(c.ti);
            c.tu = toggle(self.tu, self.no_tu).unwrap_or(c.tu);
            c.width_prune = toggle(self.width_prune, self.no_width_prune).unwrap_or(c.width_prune);
            c.depth_prune = toggle(self.depth_prune, self.no_depth_prune).unwrap_or(c.depth_prune);
        }
        c
    }

    fn runs(&self) -> Vec<(MiningConfig, Variant)> {
        if !self.sweep {
            return vec![(self.config(self.k as usize, self.variant), self.variant)];
        }
        let ks = if self.sweep_k.is_empty() {
            vec![self.k]
        } else {
            self.sweep_k.clone()
        };
        ks.iter()
            .flat_map(|&k| Variant::ALL.into_iter().map(move |v| (k as usize, v)))
            .map(|(k, v)| (self.config(k, v), v))
            .collect()
    }
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u32).range(0..=1))]
    id_base: u32,
    /// Defaults to standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AnonymizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    k_anon: usize,
    #[arg(long)]
    l_div: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Size a single-point extent is inflated to.
    #[arg(long, default_value = "1")]
    min_extent: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    /// wLAS sequences (wlas-jsonl).
    Wlas,
    /// Raw point trajectories (raw-jsonl).
    Raw,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(value_enum)]
    kind: SynthKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    sequences: usize,
    #[arg(long, default_value_t = 6)]
    max_terms: usize,
    #[arg(long, default_value_t = 64)]
    cells: u32,
    #[arg(long, default_value_t = 10)]
    activities: usize,
    #[arg(long, default_value_t = 4)]
    max_cells_per_term: usize,
    #[arg(long, default_value_t = 3)]
    max_activities_per_term: usize,
    /// Raw points: region `xmin,ymin,xmax,ymax`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0,4,8")]
    region: Vec<String>,
    /// Raw points per trajectory.
    #[arg(long, default_value_t = 4)]
    points: usize,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u32).range(0..=1))]
    id_base: u32,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn results_agree<S: Scalar>(a: &[(TrajectoryPattern, S)], b: &[(TrajectoryPattern, S)]) -> bool {
    if S::EXACT {
        a == b
    } else {
        a.len() == b.len() && a.iter().zip(b).all(|((_, x), (_, y))| x.approx_eq(y, 1e-9))
    }
}

fn mine<S: Scalar>(args: &MineArgs, backend: &str) -> Result<()> {
    let opts = ReadOptions {
        id_base: args.id_base,
        strict_weights: args.strict_weights,
        ..ReadOptions::default()
    };
    let grid = args.grid.grid::<S>()?;
    let (db, warnings): (WlasDatabase<S>, _) = ingest(&args.input, args.format, grid.as_ref(), &opts)
        .with_context(|| format!("reading {}", args.input.display()))?;
    for w in &warnings {
        log::warn!("{w}");
    }
    if let Some(seed) = args.seed {
        log::info!("seed {seed}");
    }
    let runs = args.runs();
    let reports: Vec<Result<RunReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = runs
            .iter()
            .map(|(config, variant)| {
                let db = &db;
                scope.spawn(move || run_one(db, config, *variant, args, backend))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(anyhow!("mining thread panicked"))))
            .collect()
    });
    let mut out = sink(None)?;
    let mut metrics = args.metrics_out.as_deref().map(|p| sink(Some(p))).transpose()?;
    for report in reports {
        let report = report?;
        if let Some(m) = metrics.as_mut() {
            serde_json::to_writer(&mut *m, &report.metrics)?;
            m.write_all(b"\n")?;
        }
        writeln!(out, "{}", report.to_json())?;
    }
    if let Some(m) = metrics.as_mut() {
        m.flush()?;
    }
    out.flush()?;
    Ok(())
}

fn run_one<S: Scalar>(
    db: &WlasDatabase<S>,
    config: &MiningConfig,
    variant: Variant,
    args: &MineArgs,
    backend: &str,
) -> Result<RunReport> {
    let start = Instant::now();
    let outcome = mine_topk(db, config)?;
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    if args.oracle_check {
        match brute_topk_capped(db, config.k, DEFAULT_CANDIDATE_CAP) {
            Ok(brute) if results_agree(&brute, &outcome.results) => log::info!("oracle check passed"),
            Ok(_) => bail!("oracle check failed: mined results differ from brute force"),
            Err(e @ Error::SizeLimit { .. }) => log::warn!("oracle check skipped: {e}"),
            Err(e) => return Err(e.into()),
        }
    }
    let explicit = !args.sweep
        && [
            args.ti,
            args.no_ti,
            args.tu,
            args.no_tu,
            args.width_prune,
            args.no_width_prune,
            args.depth_prune,
            args.no_depth_prune,
        ]
        .contains(&true);
    let variant = (!explicit).then_some(variant);
    let report = RunReport::new(
        ConfigReport::new(config, variant, backend, args.id_base),
        &outcome.results,
        &outcome.metrics,
        elapsed_ms,
    );
    Ok(report)
}

fn encode(args: &EncodeArgs) -> Result<()> {
    let grid = args
        .grid
        .grid::<Exact>()?
        .ok_or_else(|| anyhow!("encode needs --region, --cell-width and --cell-height"))?;
    let anon = read_anon_jsonl::<Exact, _>(BufReader::new(File::open(&args.input)?))?;
    let db = encode_database(&anon, &grid)?;
    let mut out = sink(args.output.as_deref())?;
    write_wlas_jsonl(&db, args.id_base, &mut out)?;
    out.flush()?;
    Ok(())
}

fn anonymize(args: &AnonymizeArgs) -> Result<()> {
    let raw = read_raw_jsonl::<Exact, _>(BufReader::new(File::open(&args.input)?))?;
    let anon = toy_anonymize(&raw, args.k_anon, args.l_div, args.seed, number(&args.min_extent)?)?;
    validate_anonymization(&raw, &anon, args.k_anon, args.l_div)?;
    let mut out = sink(args.output.as_deref())?;
    write_anon_jsonl(&anon, &mut out)?;
    out.flush()?;
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<()> {
    let mut rng = StdRng::seed_from_u64(args.seed);
    let mut out = sink(args.output.as_deref())?;
    match args.kind {
        SynthKind::Wlas => {
            let params = SynthParams {
                sequences: args.sequences,
                max_terms: args.max_terms,
                cells: args.cells,
                activities: args.activities,
                max_cells_per_term: args.max_cells_per_term,
                max_activities_per_term: args.max_activities_per_term,
                ..SynthParams::default()
            };
            let db: WlasDatabase<Exact> = random_database(&params, &mut rng);
            write_wlas_jsonl(&db, args.id_base, &mut out)?;
        }
        SynthKind::Raw => {
            let region = region_rect::<Exact>(&args.region)?;
            let raw = random_raw(&region, args.sequences, args.points, args.activities, &mut rng);
            write_raw_jsonl(&raw, &mut out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = match Cli::parse().command {
        Command::Mine(args) if args.float => mine::<f64>(&args, "f64"),
        Command::Mine(args) => mine::<Exact>(&args, "exact"),
        Command::Encode(args) => encode(&args),
        Command::Anonymize(args) => anonymize(&args),
        Command::Synth(args) => synth(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
