//! End-to-end orchestration: branch selection, the three phases, verified
//! reporting, benchmark sweeps, and the tightness desk check.
//!
//! Every partition reported as a success has passed the oracle verifier;
//! the success/verdict flags in a report come from the verifier, never from
//! the pipeline's own bookkeeping. Serialized reports contain no wall-clock
//! fields, so identical seeds and inputs yield byte-identical records.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gen::{gen_bounded, gen_tight, GenError, TightConstructionSpec};
use crate::hypergraph::Hypergraph;
use crate::oracle::{self, OracleError};
use crate::params::{derive_params, params_with_override, ColoringParams, ParamsError};
use crate::phase1::{run_phase1, Phase1Error, TraceSink};
use crate::phase2::{build_missing_table, complete_coloring, Phase2Error};
use crate::phase3::{finite_case_color, rebalance, EquitablePartition, Phase3Error};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("max degree {delta} exceeds k^a = {bound}; pass allow_degree_excess to proceed anyway")]
    DegreeExceedsBound { delta: usize, bound: f64 },
    #[error("parameter derivation failed: {0}")]
    Params(#[from] ParamsError),
    #[error("phase 1 failed: {0}")]
    Phase1(#[from] Phase1Error),
    #[error("phase 2 failed: {0}")]
    Phase2(#[from] Phase2Error),
    #[error("phase 3 failed: {0}")]
    Phase3(#[from] Phase3Error),
    #[error("generator failed: {0}")]
    Gen(#[from] GenError),
    #[error("oracle failed: {0}")]
    Oracle(#[from] OracleError),
    #[error("verification failed on a partition the pipeline produced (this is a bug): {0}")]
    VerificationFailed(String),
}

/// Iteration limits for the resampling loops. `None` fields take the
/// instance-sized defaults: `50 * (|E| + n)` phase-1 resamples per attempt
/// and `50 * |E|` phase-2 resamples.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
pub struct Caps {
    pub phase1_resamples: Option<usize>,
    pub phase1_restarts: Option<usize>,
    pub phase2_resamples: Option<usize>,
    pub finite_retries: Option<usize>,
}

impl Caps {
    pub const DEFAULT_RESTARTS: usize = 100;
    pub const DEFAULT_FINITE_RETRIES: usize = 100;

    fn phase1_resamples_for(&self, h: &Hypergraph) -> usize {
        self.phase1_resamples
            .unwrap_or(50 * (h.num_edges() + h.n()))
    }

    fn phase2_resamples_for(&self, h: &Hypergraph) -> usize {
        self.phase2_resamples.unwrap_or((50 * h.num_edges()).max(50))
    }

    fn restarts(&self) -> usize {
        self.phase1_restarts.unwrap_or(Self::DEFAULT_RESTARTS)
    }

    fn retries(&self) -> usize {
        self.finite_retries.unwrap_or(Self::DEFAULT_FINITE_RETRIES)
    }
}

/// Desk-scale escape hatches: small k cannot satisfy the asymptotic
/// parameter window, so t, s, and z can be pinned by hand. Every override
/// is flagged in the report.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
pub struct Overrides {
    pub t: Option<usize>,
    pub s: Option<usize>,
    pub z: Option<usize>,
    pub allow_degree_excess: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    General,
    Finite,
}

/// One run's record. Serialization is a single JSON line with a fixed field
/// order; wall time is kept out of it so equal seeds produce equal bytes.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub max_degree: usize,
    pub seed: u64,
    pub branch: Branch,
    pub params: ColoringParams,
    pub degree_warning: bool,
    pub phase1_resamples: usize,
    pub phase1_restarts: usize,
    pub phase2_resamples: usize,
    pub finite_retries: usize,
    pub finite_repairs: usize,
    pub r: usize,
    /// Verifier verdicts, not pipeline bookkeeping.
    pub strong: bool,
    pub equitable: bool,
    /// `floor((1 - eps) k / (a ln k))`; reported, never enforced.
    pub target: usize,
    pub target_met: bool,
    #[serde(skip)]
    pub wall_ms: f64,
}

impl RunReport {
    /// The canonical line record.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

fn resolve_params(k: usize, a: f64, eps: f64, overrides: &Overrides) -> Result<ColoringParams, ParamsError> {
    let mut params = match overrides.t {
        Some(t) => params_with_override(k, a, t)?,
        None => derive_params(k, a, eps)?,
    };
    if let Some(s) = overrides.s {
        params = params.with_s(s);
    }
    if let Some(z) = overrides.z {
        params = params.with_z(z);
    }
    Ok(params)
}

/// Gate every success through the oracle before a report exists.
#[allow(clippy::too_many_arguments)]
fn assemble_report(
    h: &Hypergraph,
    params: &ColoringParams,
    partition: &EquitablePartition,
    seed: u64,
    eps: f64,
    branch: Branch,
    degree_warning: bool,
    stats: (usize, usize, usize, usize, usize),
    wall_ms: f64,
) -> Result<RunReport, PipelineError> {
    let verdict = oracle::verify_strong(h, partition.classes())?;
    if !verdict.strong || !verdict.equitable {
        return Err(PipelineError::VerificationFailed(format!(
            "strong={} equitable={} witness={:?}",
            verdict.strong, verdict.equitable, verdict.witness_failure
        )));
    }
    let kf = h.k() as f64;
    let target = ((1.0 - eps) * kf / (params.a * kf.ln())).floor().max(0.0) as usize;
    let (p1_res, p1_rst, p2_res, fin_retries, fin_repairs) = stats;
    Ok(RunReport {
        k: h.k(),
        n: h.n(),
        m: h.num_edges(),
        max_degree: h.max_degree(),
        seed,
        branch,
        params: params.clone(),
        degree_warning,
        phase1_resamples: p1_res,
        phase1_restarts: p1_rst,
        phase2_resamples: p2_res,
        finite_retries: fin_retries,
        finite_repairs: fin_repairs,
        r: verdict.r,
        strong: verdict.strong,
        equitable: verdict.equitable,
        target,
        target_met: verdict.r >= target,
        wall_ms,
    })
}

/// Runs the full pipeline on `h`: derive parameters, pick the branch by
/// `n < 2 k ln k`, color, rebalance, verify, report.
pub fn run_pipeline(
    h: &Hypergraph,
    a: f64,
    eps: f64,
    seed: u64,
    caps: &Caps,
    overrides: &Overrides,
    trace: &mut TraceSink<'_>,
) -> Result<(RunReport, EquitablePartition), PipelineError> {
    let start = std::time::Instant::now();
    let delta = h.max_degree();
    let bound = (h.k() as f64).powf(a);
    let degree_warning = (delta as f64) > bound;
    if degree_warning && !overrides.allow_degree_excess {
        return Err(PipelineError::DegreeExceedsBound { delta, bound });
    }
    let params = resolve_params(h.k(), a, eps, overrides)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let finite = (h.n() as f64) < params.finite_cutoff();
    let (partition, stats, branch) = if finite {
        let (partition, fs) =
            finite_case_color(h, &params, &mut rng, caps.retries(), trace)?;
        (partition, (0, 0, 0, fs.retries, fs.repairs), Branch::Finite)
    } else {
        let (pc, s1) = run_phase1(
            h,
            &params,
            &mut rng,
            caps.phase1_resamples_for(h),
            caps.restarts(),
            trace,
        )?;
        let table = build_missing_table(h, &pc, &params)?;
        let (full, s2) = complete_coloring(
            h,
            &pc,
            &table,
            &params,
            &mut rng,
            caps.phase2_resamples_for(h),
            trace,
        )?;
        let partition = rebalance(h, &full, &params)?;
        (
            partition,
            (s1.resamples, s1.restarts, s2.resamples, 0, 0),
            Branch::General,
        )
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let report = assemble_report(
        h,
        &params,
        &partition,
        seed,
        eps,
        branch,
        degree_warning,
        stats,
        wall_ms,
    )?;
    Ok((report, partition))
}

// ---------------------------------------------------------------------------
// Benchmark sweeps
// ---------------------------------------------------------------------------

/// Instance source for one sweep cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Model {
    Tight { k: usize, a: f64, eps: f64 },
    Bounded { n: usize, k: usize, max_deg: usize, m: usize },
}

impl Model {
    fn generate(&self, seed: u64) -> Result<Hypergraph, GenError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match *self {
            Model::Tight { k, a, eps } => {
                let spec = TightConstructionSpec::new(k, a, eps)?;
                Ok(gen_tight(&spec, &mut rng))
            }
            Model::Bounded { n, k, max_deg, m } => gen_bounded(n, k, max_deg, m, &mut rng),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchCell {
    pub name: String,
    pub model: Model,
    pub a: f64,
    pub eps: f64,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default)]
    pub caps: Caps,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchConfig {
    pub cells: Vec<BenchCell>,
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub cell: String,
    pub seed: u64,
    pub outcome: Result<RunReport, String>,
}

#[derive(Debug, Clone)]
pub struct BenchAggregate {
    pub cell: String,
    pub runs: usize,
    pub successes: usize,
    pub r_mean: f64,
    pub r_min: usize,
    pub r_max: usize,
    pub ratio_mean: f64,
    pub resamples_mean: f64,
}

/// Runs every (cell, seed) pair, cells and seeds in parallel, output
/// order-stable by (cell index, seed index). Per-run failures become failed
/// rows; the sweep continues.
pub fn bench_sweep(config: &BenchConfig) -> Vec<BenchRow> {
    let mut jobs: Vec<(usize, usize)> = Vec::new();
    for (ci, cell) in config.cells.iter().enumerate() {
        for si in 0..cell.seeds.len() {
            jobs.push((ci, si));
        }
    }
    let mut rows: Vec<((usize, usize), BenchRow)> = jobs
        .par_iter()
        .map(|&(ci, si)| {
            let cell = &config.cells[ci];
            let seed = cell.seeds[si];
            let outcome = cell
                .model
                .generate(seed)
                .map_err(PipelineError::from)
                .and_then(|h| {
                    run_pipeline(&h, cell.a, cell.eps, seed, &cell.caps, &cell.overrides, &mut None)
                        .map(|(report, _)| report)
                })
                .map_err(|e| e.to_string());
            (
                (ci, si),
                BenchRow {
                    cell: cell.name.clone(),
                    seed,
                    outcome,
                },
            )
        })
        .collect();
    rows.sort_by_key(|(key, _)| *key);
    rows.into_iter().map(|(_, row)| row).collect()
}

/// Per-cell aggregates over the success rows, in cell order.
pub fn aggregate_sweep(config: &BenchConfig, rows: &[BenchRow]) -> Vec<BenchAggregate> {
    config
        .cells
        .iter()
        .map(|cell| {
            let cell_rows: Vec<&BenchRow> = rows.iter().filter(|r| r.cell == cell.name).collect();
            let ok: Vec<&RunReport> = cell_rows
                .iter()
                .filter_map(|r| r.outcome.as_ref().ok())
                .collect();
            let runs = cell_rows.len();
            let successes = ok.len();
            let mean = |f: &dyn Fn(&RunReport) -> f64| {
                if ok.is_empty() {
                    0.0
                } else {
                    ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
                }
            };
            BenchAggregate {
                cell: cell.name.clone(),
                runs,
                successes,
                r_mean: mean(&|r| r.r as f64),
                r_min: ok.iter().map(|r| r.r).min().unwrap_or(0),
                r_max: ok.iter().map(|r| r.r).max().unwrap_or(0),
                ratio_mean: mean(&|r| {
                    if r.target == 0 {
                        0.0
                    } else {
                        r.r as f64 / r.target as f64
                    }
                }),
                resamples_mean: mean(&|r| (r.phase1_resamples + r.phase2_resamples) as f64),
            }
        })
        .collect()
}

pub const SWEEP_CSV_HEADER: &str = "kind,cell,seed,status,k,n,m,max_degree,branch,r,target,ratio,phase1_resamples,phase1_restarts,phase2_resamples,finite_retries,runs,successes,r_mean,r_min,r_max,ratio_mean,resamples_mean";

/// Renders run rows then aggregate rows as one deterministic CSV document.
pub fn sweep_to_csv(config: &BenchConfig, rows: &[BenchRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        match &row.outcome {
            Ok(r) => {
                let branch = match r.branch {
                    Branch::General => "general",
                    Branch::Finite => "finite",
                };
                let ratio = if r.target == 0 {
                    String::new()
                } else {
                    format!("{:.6}", r.r as f64 / r.target as f64)
                };
                out.push_str(&format!(
                    "run,{},{},ok,{},{},{},{},{},{},{},{},{},{},{},{},,,,,,,\n",
                    row.cell,
                    row.seed,
                    r.k,
                    r.n,
                    r.m,
                    r.max_degree,
                    branch,
                    r.r,
                    r.target,
                    ratio,
                    r.phase1_resamples,
                    r.phase1_restarts,
                    r.phase2_resamples,
                    r.finite_retries
                ));
            }
            Err(reason) => {
                let clean = reason.replace([',', '\n'], ";");
                out.push_str(&format!(
                    "run,{},{},\"err: {}\",,,,,,,,,,,,,,,,,,,\n",
                    row.cell, row.seed, clean
                ));
            }
        }
    }
    for agg in aggregate_sweep(config, rows) {
        out.push_str(&format!(
            "agg,{},,,,,,,,,,,,,,,{},{},{:.6},{},{},{:.6},{:.6}\n",
            agg.cell,
            agg.runs,
            agg.successes,
            agg.r_mean,
            agg.r_min,
            agg.r_max,
            agg.ratio_mean,
            agg.resamples_mean
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Tightness desk check
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct TightRow {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub max_degree: usize,
    /// Exact minimum vertex cover size.
    pub tau: usize,
    /// `floor(n / tau)`, an upper bound on the strong coloring number;
    /// absent for the degenerate edgeless case.
    pub cover_bound: Option<usize>,
    /// The cover size the construction is designed to defeat at scale.
    pub t_cover: usize,
    /// Whether no t_cover-subset is a vertex cover here, i.e. tau > t_cover.
    pub no_small_cover: bool,
    pub degenerate: bool,
}

/// Generates the construction per seed and measures its exact cover
/// numbers. Only desk-scale specs are accepted (the exact search caps n).
pub fn tightness_check(
    spec: &TightConstructionSpec,
    seeds: &[u64],
) -> Result<Vec<TightRow>, PipelineError> {
    if spec.n > oracle::BRUTE_COVER_MAX_N {
        return Err(PipelineError::Oracle(OracleError::TooLarge {
            n: spec.n,
            cap: oracle::BRUTE_COVER_MAX_N,
        }));
    }
    let mut rows = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = gen_tight(spec, &mut rng);
        let tau = oracle::brute_min_cover(&h)?;
        rows.push(TightRow {
            seed,
            n: h.n(),
            m: h.num_edges(),
            k: h.k(),
            max_degree: h.max_degree(),
            tau,
            cover_bound: (tau >= 1).then(|| h.n() / tau),
            t_cover: spec.t_cover,
            no_small_cover: tau > spec.t_cover,
            degenerate: h.num_edges() == 0,
        });
    }
    Ok(rows)
}

pub const TIGHT_CSV_HEADER: &str =
    "seed,n,m,k,max_degree,tau,cover_bound,t_cover,no_small_cover,degenerate";

pub fn tight_rows_to_csv(rows: &[TightRow]) -> String {
    let mut out = String::from(TIGHT_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.seed,
            r.n,
            r.m,
            r.k,
            r.max_degree,
            r.tau,
            r.cover_bound.map(|b| b.to_string()).unwrap_or_default(),
            r.t_cover,
            r.no_small_cover,
            r.degenerate
        ));
    }
    out
}
