//! Command-line front end: generate instances, run the coloring pipeline,
//! verify partitions, sweep benchmark grids, and run the tightness check.
//!
//! Reports are deterministic given the seed; wall-clock timing goes to
//! stderr only.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use equicolor::pipeline::{
    bench_sweep, sweep_to_csv, tight_rows_to_csv, tightness_check, BenchConfig, Caps, Overrides,
};
use equicolor::{
    gen_bounded, gen_tight, run_pipeline, verify_strong, EquitablePartition, Hypergraph,
    TightConstructionSpec,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed used when neither --seed nor EQUICOLOR_SEED is given.
const DEFAULT_SEED: u64 = 0;

fn default_seed() -> u64 {
    std::env::var("EQUICOLOR_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

#[derive(Parser)]
#[command(name = "equicolor", about = "Equitable strong coloring of k-uniform hypergraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance and write it with a metadata sidecar.
    Gen(GenArgs),
    /// Color an instance end to end and emit the partition and run report.
    Color(ColorArgs),
    /// Verify a partition file against an instance.
    Verify(VerifyArgs),
    /// Run a grid of seeded pipeline runs from a JSON config, emitting CSV.
    Bench(BenchArgs),
    /// Generate the random cover construction and measure exact covers.
    Tight(TightArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Instance model: "tight" or "bounded".
    #[arg(long)]
    model: String,
    /// Uniformity k (both models).
    #[arg(long)]
    k: usize,
    /// Degree exponent (tight model).
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Slack eps (tight model).
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Vertex count (bounded model).
    #[arg(long)]
    n: Option<usize>,
    /// Degree cap (bounded model).
    #[arg(long)]
    max_deg: Option<usize>,
    /// Edge count (bounded model).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path for the instance text; the sidecar goes to <out>.meta.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ColorArgs {
    /// Instance file in the hypergraph text format.
    #[arg(long = "input")]
    input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Palette-size override (skips the eps window).
    #[arg(long)]
    override_t: Option<usize>,
    /// Sacrificed-class override.
    #[arg(long)]
    override_s: Option<usize>,
    /// Condition-3 threshold override.
    #[arg(long)]
    override_z: Option<usize>,
    /// Proceed (with a warning) when max degree exceeds k^a.
    #[arg(long)]
    allow_degree_excess: bool,
    #[arg(long)]
    resample_cap: Option<usize>,
    #[arg(long)]
    restart_cap: Option<usize>,
    #[arg(long)]
    phase2_cap: Option<usize>,
    #[arg(long)]
    finite_retries: Option<usize>,
    /// Where to write the partition text; stdout if omitted.
    #[arg(long)]
    out_partition: Option<PathBuf>,
    /// Where to write the one-line JSON run report; stdout if omitted.
    #[arg(long)]
    out_report: Option<PathBuf>,
    /// Where to write per-event resampling trace lines.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long = "input")]
    input: PathBuf,
    #[arg(long)]
    partition: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON grid config (see BenchConfig).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TightArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Number of seeds, counted up from --seed.
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_or_stdout(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn load_hypergraph(path: &Path) -> Result<Hypergraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Hypergraph::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let seed = args.seed.unwrap_or_else(default_seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (h, meta) = match args.model.as_str() {
        "tight" => {
            let spec = TightConstructionSpec::new(args.k, args.a, args.eps)?;
            let meta = serde_json::json!({ "model": "tight", "spec": spec, "seed": seed });
            (gen_tight(&spec, &mut rng), meta)
        }
        "bounded" => {
            let (Some(n), Some(max_deg), Some(m)) = (args.n, args.max_deg, args.m) else {
                bail!("bounded model needs --n, --max-deg and --m");
            };
            let meta = serde_json::json!({
                "model": "bounded", "n": n, "k": args.k, "max_deg": max_deg, "m": m, "seed": seed,
            });
            (gen_bounded(n, args.k, max_deg, m, &mut rng)?, meta)
        }
        other => bail!("unknown model {other:?}, expected \"tight\" or \"bounded\""),
    };
    fs::write(&args.out, h.to_string()).with_context(|| format!("writing {}", args.out.display()))?;
    let meta_path = args.out.with_extension("meta.json");
    fs::write(&meta_path, format!("{meta}\n"))
        .with_context(|| format!("writing {}", meta_path.display()))?;
    eprintln!(
        "wrote {} (n={} k={} m={} max_degree={}) and {}",
        args.out.display(),
        h.n(),
        h.k(),
        h.num_edges(),
        h.max_degree(),
        meta_path.display()
    );
    Ok(())
}

fn cmd_color(args: ColorArgs) -> Result<()> {
    let h = load_hypergraph(&args.input)?;
    let seed = args.seed.unwrap_or_else(default_seed);
    let caps = Caps {
        phase1_resamples: args.resample_cap,
        phase1_restarts: args.restart_cap,
        phase2_resamples: args.phase2_cap,
        finite_retries: args.finite_retries,
    };
    let overrides = Overrides {
        t: args.override_t,
        s: args.override_s,
        z: args.override_z,
        allow_degree_excess: args.allow_degree_excess,
    };
    let mut trace_file = match &args.trace {
        Some(p) => Some(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => None,
    };
    let mut trace = trace_file.as_mut().map(|f| f as &mut dyn Write);
    let (report, partition) = run_pipeline(&h, args.a, args.eps, seed, &caps, &overrides, &mut trace)?;
    write_or_stdout(args.out_partition.as_deref(), &partition.to_string())?;
    write_or_stdout(args.out_report.as_deref(), &format!("{}\n", report.to_json_line()))?;
    eprintln!(
        "colored: r={} strong={} equitable={} target={} ({}) wall_ms={:.2}",
        report.r,
        report.strong,
        report.equitable,
        report.target,
        if report.target_met { "met" } else { "unmet" },
        report.wall_ms
    );
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<()> {
    let h = load_hypergraph(&args.input)?;
    let text = fs::read_to_string(&args.partition)
        .with_context(|| format!("reading {}", args.partition.display()))?;
    let partition = EquitablePartition::parse(&text)?;
    let verdict = verify_strong(&h, partition.classes())?;
    println!("{}", serde_json::to_string(&verdict)?);
    if !(verdict.strong && verdict.equitable) {
        std::process::exit(1);
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let config: BenchConfig = serde_json::from_str(&text).context("parsing bench config")?;
    let rows = bench_sweep(&config);
    write_or_stdout(args.out.as_deref(), &sweep_to_csv(&config, &rows))?;
    let ok = rows.iter().filter(|r| r.outcome.is_ok()).count();
    eprintln!("bench: {} runs, {} succeeded", rows.len(), ok);
    Ok(())
}

fn cmd_tight(args: TightArgs) -> Result<()> {
    let spec = TightConstructionSpec::new(args.k, args.a, args.eps)?;
    let start = args.seed.unwrap_or_else(default_seed);
    let seeds: Vec<u64> = (0..args.seeds as u64).map(|i| start + i).collect();
    let rows = tightness_check(&spec, &seeds)?;
    write_or_stdout(args.out.as_deref(), &tight_rows_to_csv(&rows))?;
    let defeated = rows.iter().filter(|r| r.no_small_cover).count();
    let degree_bound = (spec.k as f64).powf(spec.a);
    let degree_ok = rows
        .iter()
        .filter(|r| (r.max_degree as f64) <= degree_bound)
        .count();
    eprintln!(
        "tight: n={} m={} t_cover={}; {}/{} seeds had no cover of size t_cover; {}/{} kept max degree <= k^a",
        spec.n,
        spec.m,
        spec.t_cover,
        defeated,
        rows.len(),
        degree_ok,
        rows.len()
    );
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(args) => cmd_gen(args),
        Command::Color(args) => cmd_color(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Tight(args) => cmd_tight(args),
    }
}
