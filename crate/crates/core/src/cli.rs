//! Command-line front end. The `pseudorange` binary is a thin wrapper around
//! [`run`], which keeps the whole interface testable in-process.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::combinatorics::{find_gnss_decomposition, DecompositionOutcome, OracleOptions};
use crate::error::{Error, Result};
use crate::gnss::{
    estimate, formation_savings, generate_random_scenario, is_solvable, min_measurements,
    simulate_measurements, EstimateOptions, EstimationResult, FormationSavings, GeneratorSpec,
    Init, Scenario, SolvabilityOptions,
};
use crate::graphs::{Edge, GnssGraph, GraphFile, SimpleGraph};
use crate::numeric::TolerancePolicy;
use crate::rigidity::{generic_gnss_rank_numeric, s_p, RankOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_ASSERTION: i32 = 3;

const DEFAULT_GRAPH_DIM: usize = 2;
const DEFAULT_SCENARIO_DIM: usize = 3;
const DEFAULT_RANK_TOL: f64 = TolerancePolicy::DEFAULT_REL_TOL;
const DEFAULT_NEWTON_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(
    name = "pseudorange",
    version,
    about = "Rigidity of pseudorange frameworks and cooperative GNSS solvability"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Emit machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Base seed for random configurations and perturbations.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Dimension (graph files default to 2; generated scenarios to 3).
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Random configurations per rank estimate.
    #[arg(long, global = true, default_value_t = 5)]
    trials: usize,
    /// Relative rank tolerance (analyze, decompose; default 1e-9) or
    /// residual tolerance (estimate; default 1e-10).
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank, bound and verdict of a graph or scenario file.
    Analyze {
        path: PathBuf,
        /// Exit with status 3 when the input is flexible.
        #[arg(long)]
        assert_rigid: bool,
    },
    /// Maximizing decomposition into a distance part and a sync part.
    Decompose { path: PathBuf },
    /// Simulate measurements for a scenario and solve for the receivers.
    Estimate {
        path: PathBuf,
        /// Initial perturbation as a fraction of the scene scale.
        #[arg(long, default_value_t = 0.1)]
        perturb: f64,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
    },
    /// Write a random scenario.
    Generate {
        #[arg(long, default_value_t = 2)]
        receivers: usize,
        #[arg(long, default_value_t = 1)]
        constellations: usize,
        /// Satellites per constellation.
        #[arg(long, default_value_t = 4)]
        sats: usize,
        /// Pseudoranges per receiver per constellation.
        #[arg(long, default_value_t = 2)]
        visibility: usize,
        /// Inter-receiver distance measurements.
        #[arg(long, default_value_t = 1)]
        distances: usize,
        /// Output file (stdout when omitted).
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Measurement counts of pseudorange versus two-way ranging formations.
    Formation {
        /// Largest formation size in the table.
        #[arg(long, default_value_t = 10)]
        agents: usize,
        /// Smallest formation size (default d + 1).
        #[arg(long)]
        from: Option<usize>,
        /// Constellations for the minimum-measurement column.
        #[arg(long, default_value_t = 1)]
        constellations: usize,
    },
}

/// Verdict from the decomposition search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombinatorialVerdict {
    pub rigid: bool,
    pub rank: usize,
    pub rank_d: usize,
    pub rank_s: usize,
    pub deficit: usize,
    pub g_d: Vec<[usize; 2]>,
    pub g_s: Vec<[usize; 2]>,
}

impl CombinatorialVerdict {
    fn new(outcome: &DecompositionOutcome, bound: usize) -> Self {
        let w = outcome.witness();
        let pairs = |g: &SimpleGraph| g.edges().iter().map(|e: &Edge| [e.u(), e.v()]).collect();
        Self {
            rigid: outcome.is_rigid(),
            rank: outcome.rank(),
            rank_d: w.rank_d,
            rank_s: w.rank_s,
            deficit: bound.saturating_sub(outcome.rank()),
            g_d: pairs(&w.decomposition.g_d),
            g_s: pairs(&w.decomposition.g_s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumericVerdict {
    pub rank: usize,
    pub trial_ranks: Vec<usize>,
    pub seeds: Vec<u64>,
}

/// Output of `analyze` and `decompose`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub input: String,
    /// SHA-256 of the input file.
    pub digest: String,
    pub kind: InputKind,
    pub dimension: usize,
    pub agents: usize,
    /// `rigid`, `flexible`, `solvable` or `unsolvable`.
    pub verdict: String,
    pub rigid: bool,
    pub rank: usize,
    pub bound: usize,
    pub flex_dofs: usize,
    pub numeric: NumericVerdict,
    pub combinatorial: Option<CombinatorialVerdict>,
    pub agree: bool,
    /// Vertex labels for scenarios, in vertex order.
    #[serde(default)]
    pub labels: Vec<String>,
    #[serde(default)]
    pub warnings: Vec<String>,
    pub timing_ms: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    Graph,
    Scenario,
}

/// Output of `estimate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub input: String,
    pub digest: String,
    pub result: EstimationResult,
    pub position_errors: Vec<f64>,
    pub max_position_error: f64,
}

/// One row of the `formation` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormationRow {
    #[serde(flatten)]
    pub savings: FormationSavings,
    /// Fewest GNSS measurements for `n` receivers.
    pub min_measurements: usize,
}

enum Input {
    Graph(GnssGraph),
    Scenario(Box<Scenario>),
}

struct Loaded {
    input: Input,
    digest: String,
}

fn load(path: &Path) -> Result<Loaded> {
    let bytes = std::fs::read(path)?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes)
        .map_err(|e| Error::InvalidArgument(format!("input is not UTF-8: {e}")))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let is_scenario = value
        .as_object()
        .is_some_and(|o| o.contains_key("schema") || o.contains_key("constellations"));
    let input = if is_scenario {
        Input::Scenario(Box::new(Scenario::from_json_str(&text)?))
    } else {
        Input::Graph(GraphFile::from_json_str(&text)?.to_gnss_graph()?)
    };
    Ok(Loaded { input, digest })
}

struct Ctx<'a> {
    global: &'a GlobalArgs,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn rank_tol(&self) -> Result<TolerancePolicy> {
        TolerancePolicy::new(self.global.tol.unwrap_or(DEFAULT_RANK_TOL))
    }

    fn graph_dim(&self) -> Result<usize> {
        let d = self.global.dim.unwrap_or(DEFAULT_GRAPH_DIM);
        if d < 2 {
            return Err(Error::InvalidArgument(format!(
                "dimension must be at least 2, got {d}"
            )));
        }
        Ok(d)
    }

    fn scenario_dim(&self, s: &Scenario) -> Result<usize> {
        match self.global.dim {
            Some(d) if d != s.d() => Err(Error::DimensionMismatch {
                expected: s.d(),
                found: d,
            }),
            _ => Ok(s.d()),
        }
    }

    fn emit_json<T: Serialize>(&mut self, value: &T) -> Result<()> {
        writeln!(self.out, "{}", serde_json::to_string_pretty(value)?)?;
        Ok(())
    }
}

fn analysis(ctx: &Ctx, path: &Path) -> Result<AnalysisReport> {
    let start = Instant::now();
    let loaded = load(path)?;
    let tol = ctx.rank_tol()?;
    let (trials, seed) = (ctx.global.trials, ctx.global.seed);
    let mut report = match &loaded.input {
        Input::Graph(gg) => {
            let d = ctx.graph_dim()?;
            let numeric = generic_gnss_rank_numeric(
                gg,
                d,
                RankOptions {
                    trials,
                    seed,
                    tol,
                    ..RankOptions::default()
                },
            )?;
            let outcome = find_gnss_decomposition(gg, d, OracleOptions { trials, seed, tol })?;
            let bound = s_p(gg.n(), d);
            let rigid = numeric.rigid();
            let agree = outcome.is_rigid() == rigid && outcome.rank() == numeric.rank;
            AnalysisReport {
                input: String::new(),
                digest: String::new(),
                kind: InputKind::Graph,
                dimension: d,
                agents: gg.n(),
                verdict: if rigid { "rigid" } else { "flexible" }.into(),
                rigid,
                rank: numeric.rank,
                bound,
                flex_dofs: bound - numeric.rank,
                combinatorial: Some(CombinatorialVerdict::new(&outcome, bound)),
                numeric: NumericVerdict {
                    rank: numeric.rank,
                    trial_ranks: numeric.trial_ranks,
                    seeds: numeric.seeds,
                },
                agree,
                labels: Vec::new(),
                warnings: if agree {
                    Vec::new()
                } else {
                    vec!["numeric and combinatorial verdicts disagree".into()]
                },
                timing_ms: 0.0,
            }
        }
        Input::Scenario(s) => {
            let d = ctx.scenario_dim(s)?;
            let r = is_solvable(s, SolvabilityOptions { trials, seed, tol })?;
            AnalysisReport {
                input: String::new(),
                digest: String::new(),
                kind: InputKind::Scenario,
                dimension: d,
                agents: r.graph.n(),
                verdict: if r.solvable { "solvable" } else { "unsolvable" }.into(),
                rigid: r.solvable,
                rank: r.rank,
                bound: r.bound,
                flex_dofs: r.bound - r.rank,
                combinatorial: r
                    .combinatorial
                    .as_ref()
                    .map(|c| CombinatorialVerdict::new(c, r.bound)),
                numeric: NumericVerdict {
                    rank: r.numeric.rank,
                    trial_ranks: r.numeric.trial_ranks,
                    seeds: r.numeric.seeds,
                },
                agree: r.agree,
                labels: s.vertex_labels(),
                warnings: r.warnings,
                timing_ms: 0.0,
            }
        }
    };
    report.input = path.display().to_string();
    report.digest = loaded.digest;
    report.timing_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

fn fmt_edges(edges: &[[usize; 2]], labels: &[String]) -> String {
    let name = |v: usize| labels.get(v).cloned().unwrap_or_else(|| v.to_string());
    edges
        .iter()
        .map(|[a, b]| format!("{}-{}", name(*a), name(*b)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_analyze(ctx: &mut Ctx, path: &Path, assert_rigid: bool) -> Result<i32> {
    let report = analysis(ctx, path)?;
    if ctx.global.json {
        ctx.emit_json(&report)?;
    } else {
        writeln!(
            ctx.out,
            "{}, rank {} / {}",
            report.verdict, report.rank, report.bound
        )?;
        writeln!(
            ctx.out,
            "numeric rank {} over {} trials {:?}",
            report.numeric.rank,
            report.numeric.trial_ranks.len(),
            report.numeric.trial_ranks
        )?;
        match &report.combinatorial {
            Some(c) => writeln!(
                ctx.out,
                "combinatorial rank {} = {} (distance) + {} (sync), {}",
                c.rank,
                c.rank_d,
                c.rank_s,
                if c.rigid { "rigid" } else { "flexible" }
            )?,
            None => writeln!(ctx.out, "combinatorial check skipped")?,
        }
        if report.flex_dofs > 0 {
            writeln!(ctx.out, "flex degrees of freedom: {}", report.flex_dofs)?;
        }
        for w in &report.warnings {
            writeln!(ctx.out, "warning: {w}")?;
        }
    }
    Ok(if assert_rigid && !report.rigid {
        EXIT_ASSERTION
    } else {
        EXIT_OK
    })
}

fn cmd_decompose(ctx: &mut Ctx, path: &Path) -> Result<i32> {
    let report = analysis(ctx, path)?;
    let Some(c) = report.combinatorial.clone() else {
        return Err(Error::InvalidScenario(
            "too few satellites for a combinatorial decomposition".into(),
        ));
    };
    if ctx.global.json {
        ctx.emit_json(&report)?;
        return Ok(EXIT_OK);
    }
    if c.rigid {
        writeln!(
            ctx.out,
            "rigid decomposition, rank {} / {}",
            c.rank, report.bound
        )?;
    } else {
        writeln!(
            ctx.out,
            "no rigid decomposition: best rank {} / {}, deficit {}",
            c.rank, report.bound, c.deficit
        )?;
    }
    writeln!(ctx.out, "rank_d = {}, rank_s = {}", c.rank_d, c.rank_s)?;
    writeln!(ctx.out, "G_D: {}", fmt_edges(&c.g_d, &report.labels))?;
    writeln!(ctx.out, "G_S: {}", fmt_edges(&c.g_s, &report.labels))?;
    Ok(EXIT_OK)
}

fn cmd_estimate(ctx: &mut Ctx, path: &Path, perturb: f64, max_iter: usize) -> Result<i32> {
    let loaded = load(path)?;
    let Input::Scenario(s) = loaded.input else {
        return Err(Error::InvalidArgument(
            "estimate needs a scenario file".into(),
        ));
    };
    ctx.scenario_dim(&s)?;
    let y = simulate_measurements(&s, ctx.global.seed)?;
    let opts = EstimateOptions {
        init: Init::Perturb(perturb),
        max_iter,
        tol: ctx.global.tol.unwrap_or(DEFAULT_NEWTON_TOL),
        seed: ctx.global.seed,
    };
    let result = estimate(&s, &y, &opts)?;
    let position_errors = result.position_errors(&s);
    let report = EstimateReport {
        input: path.display().to_string(),
        digest: loaded.digest,
        max_position_error: position_errors.iter().copied().fold(0.0, f64::max),
        position_errors,
        result,
    };
    if ctx.global.json {
        ctx.emit_json(&report)?;
    } else {
        let r = &report.result;
        writeln!(
            ctx.out,
            "{} after {} iterations, residual {:.3e}",
            if r.converged {
                "converged"
            } else {
                "not converged"
            },
            r.iterations,
            r.residual
        )?;
        for (rx, err) in s.receivers.iter().zip(&report.position_errors) {
            writeln!(ctx.out, "{}: position error {err:.3e}", rx.id)?;
        }
        writeln!(
            ctx.out,
            "Jacobian column rank {} / {}",
            r.jacobian_rank, r.unknowns
        )?;
        if let Some(d) = &r.diagnostic {
            writeln!(ctx.out, "diagnostic: {d}")?;
        }
    }
    let r = &report.result;
    Ok(if r.converged && r.identifiable {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

fn cmd_generate(ctx: &mut Ctx, spec: GeneratorSpec, out: Option<&Path>) -> Result<i32> {
    let text = generate_random_scenario(spec)?.to_json_string();
    match out {
        Some(p) => {
            std::fs::write(p, format!("{text}\n"))?;
            if !ctx.global.json {
                writeln!(ctx.out, "wrote {}", p.display())?;
            }
        }
        None => writeln!(ctx.out, "{text}")?,
    }
    Ok(EXIT_OK)
}

fn formation_table(
    d: usize,
    from: Option<usize>,
    agents: usize,
    constellations: usize,
) -> Result<Vec<FormationRow>> {
    let from = from.unwrap_or(d + 1);
    if from < d + 1 || agents < from {
        return Err(Error::InvalidArgument(format!(
            "need {} <= from <= agents, got from={from}, agents={agents}",
            d + 1
        )));
    }
    (from..=agents)
        .map(|n| {
            Ok(FormationRow {
                savings: formation_savings(n, d)?,
                min_measurements: min_measurements(n, constellations, d),
            })
        })
        .collect()
}

fn cmd_formation(
    ctx: &mut Ctx,
    agents: usize,
    from: Option<usize>,
    constellations: usize,
) -> Result<i32> {
    if constellations == 0 {
        return Err(Error::InvalidArgument(
            "need at least one constellation".into(),
        ));
    }
    let dims = match ctx.global.dim {
        Some(d) => vec![d],
        None => vec![2, 3],
    };
    let mut tables = Vec::new();
    for d in dims {
        tables.push((d, formation_table(d, from, agents, constellations)?));
    }
    if ctx.global.json {
        let rows: Vec<&FormationRow> = tables.iter().flat_map(|(_, t)| t).collect();
        ctx.emit_json(&rows)?;
        return Ok(EXIT_OK);
    }
    for (d, table) in &tables {
        writeln!(ctx.out, "d = {d}")?;
        writeln!(ctx.out, "n | two-way | pseudorange | ratio | saved | min GNSS measurements (C={constellations})")?;
        for row in table {
            let f = &row.savings;
            writeln!(
                ctx.out,
                "{} | {} | {} | {}% | {} | {}",
                f.n,
                f.two_way,
                f.pseudorange,
                format_percent(f.ratio),
                f.saved,
                row.min_measurements
            )?;
        }
        writeln!(ctx.out)?;
    }
    writeln!(ctx.out, "large-n savings: 25% (2D) / 33% (3D)")?;
    Ok(EXIT_OK)
}

/// Percentage with at most two decimals and no trailing zeros.
fn format_percent(ratio: f64) -> String {
    let s = format!("{:.2}", ratio * 100.0);
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Runs the command line `args` (including the program name), writing normal
/// output to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
            let _ = if code == EXIT_OK {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    let mut ctx = Ctx {
        global: &cli.global,
        out,
    };
    let result = match &cli.command {
        Command::Analyze { path, assert_rigid } => cmd_analyze(&mut ctx, path, *assert_rigid),
        Command::Decompose { path } => cmd_decompose(&mut ctx, path),
        Command::Estimate {
            path,
            perturb,
            max_iter,
        } => cmd_estimate(&mut ctx, path, *perturb, *max_iter),
        Command::Generate {
            receivers,
            constellations,
            sats,
            visibility,
            distances,
            out,
        } => {
            let spec = GeneratorSpec {
                receivers: *receivers,
                constellations: *constellations,
                sats_per_constellation: *sats,
                d: cli.global.dim.unwrap_or(DEFAULT_SCENARIO_DIM),
                visibility: *visibility,
                inter_receiver_edges: *distances,
                seed: cli.global.seed,
            };
            cmd_generate(&mut ctx, spec, out.as_deref())
        }
        Command::Formation {
            agents,
            from,
            constellations,
        } => cmd_formation(&mut ctx, *agents, *from, *constellations),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}
