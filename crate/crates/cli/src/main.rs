//! `ultragw` command-line tool.

mod config;
mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use ultragw::batch::{self, Method};
use ultragw::gw::{self, Cost, FwConfig, StepRule};
use ultragw::phylo::TipMeasure;
use ultragw::synth::{self, GenSpec};
use ultragw::transport;
use ultragw::{bounds, Error, Exec, Mode, ScalarMeasure};

use config::{pick, switch, FileConfig};

#[derive(Parser, Debug)]
#[command(name = "ultragw", version, about = "Gromov-Wasserstein comparison of ultrametric measure spaces")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON file of default parameters; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Ultrametric,
    UltraDissimilarity,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Ultrametric => Mode::Ultrametric,
            ModeArg::UltraDissimilarity => Mode::UltraDissimilarity,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MeasureArg {
    Uniform,
    LengthWeighted,
}

impl From<MeasureArg> for TipMeasure {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::Uniform => TipMeasure::Uniform,
            MeasureArg::LengthWeighted => TipMeasure::LengthWeighted,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StepArg {
    Harmonic,
    ExactLineSearch,
}

impl From<StepArg> for StepRule {
    fn from(s: StepArg) -> Self {
        match s {
            StepArg::Harmonic => StepRule::Harmonic,
            StepArg::ExactLineSearch => StepRule::ExactLineSearch,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct PairArgs {
    a: PathBuf,
    b: PathBuf,
}

#[derive(Args, Debug, Clone, Default)]
struct FwArgs {
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, value_enum)]
    step_rule: Option<StepArg>,
    #[arg(long)]
    hitrun_steps: Option<usize>,
    #[arg(long)]
    tol_stationarity: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a space against the ultrametric or ultra-dissimilarity axioms.
    Validate {
        file: PathBuf,
        /// Defaults to the file's `kind`, else ultrametric.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Convert a Newick tree to a tree-shape space.
    Ingest {
        #[arg(long)]
        newick: PathBuf,
        #[arg(long)]
        unit_edges: bool,
        #[arg(long, value_enum)]
        measure: Option<MeasureArg>,
    },
    /// Sample a synthetic ultrametric space.
    Gen {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        samples_per_block: Option<usize>,
        #[arg(long)]
        subsample: Option<usize>,
    },
    /// Randomly perturb an ultrametric by at most `t`.
    Perturb {
        file: PathBuf,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Quotient of a space at level `t`.
    Quotient {
        file: PathBuf,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Wasserstein distance between two measures on a common ground space.
    Wasserstein {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        p: Option<f64>,
        /// Snowflake exponent on the half-line.
        #[arg(long)]
        q: Option<f64>,
        /// `halfline`, or the path of an ultrametric space whose points carry
        /// the two mass vectors.
        #[arg(long)]
        ground: String,
    },
    /// Ultrametric (or, with --classical, classical) GW by Frank-Wolfe.
    Ugw {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        classical: bool,
        #[command(flatten)]
        fw: FwArgs,
    },
    /// Exact ultrametric GW distance at p = ∞.
    UgwInf {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Exact ultrametric Gromov-Hausdorff distance.
    Ugh {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Sturm-type distance by exhaustive search over isometric embeddings.
    Usturm {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        max_n: Option<usize>,
    },
    /// Lower bounds for one pair.
    Bounds {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        p: Option<f64>,
        /// Comma-separated subset of uflb,uslb,utlb,flb,slb,tlb.
        #[arg(long)]
        which: Option<String>,
    },
    /// Pairwise matrix over a corpus of spaces or trees.
    Matrix {
        /// Directory of space JSON files.
        #[arg(long, conflicts_with = "newick_dir", required_unless_present = "newick_dir")]
        dir: Option<PathBuf>,
        /// Directory of Newick files.
        #[arg(long)]
        newick_dir: Option<PathBuf>,
        #[arg(long)]
        unit_edges: bool,
        #[arg(long, value_enum)]
        measure: Option<MeasureArg>,
        /// One of ugw-inf, ugh, ugw-fw, uslb, utlb, uflb, slb, tlb, flb.
        #[arg(long)]
        which: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        /// Drop spaces that fail validation instead of aborting.
        #[arg(long)]
        skip_invalid: bool,
        #[command(flatten)]
        fw: FwArgs,
    },
    /// Classical MDS coordinates from a CSV distance matrix.
    Mds {
        file: PathBuf,
        #[arg(long)]
        dim: Option<usize>,
    },
}

const BOUND_NAMES: [&str; 6] = ["uflb", "uslb", "utlb", "flb", "slb", "tlb"];

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::Dimension(_)
                | Error::NonPositiveMass { .. }
                | Error::MassSum { .. }
                | Error::Invalid { .. }
                | Error::Parameter(_) => 2,
                Error::Parse { .. } | Error::Format(_) => 3,
                Error::Infeasible(_) | Error::SizeCap(_) => 4,
                Error::Convergence(_) => 1,
            };
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return 3;
        }
    }
    1
}

fn init_threads(threads: Option<usize>) -> Result<()> {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("starting worker pool")?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn require_json(fmt: Format, what: &str) -> Result<()> {
    if fmt != Format::Json {
        return Err(Error::Parameter(format!("{what} only writes JSON")).into());
    }
    Ok(())
}

fn fw_config(args: &FwArgs, file: &FileConfig, seed: u64) -> FwConfig {
    let d = FwConfig::default();
    FwConfig {
        restarts: pick(args.restarts, file.restarts, d.restarts),
        iterations: pick(args.iters, file.iters, d.iterations),
        step_rule: pick(args.step_rule.map(Into::into), file.step_rule, d.step_rule),
        hitrun_steps: pick(args.hitrun_steps, file.hitrun_steps, d.hitrun_steps),
        tol_stationarity: pick(args.tol_stationarity, file.tol_stationarity, d.tol_stationarity),
        seed,
        exec: Exec::Parallel,
    }
}

fn fw_json(cfg: &FwConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

/// Attach the resolved config to a JSON object and write it.
fn finish(out: Option<&Path>, seed: u64, mut body: Value, mut config: Value) -> Result<()> {
    config["seed"] = json!(seed);
    body["config"] = config;
    io::emit_json(out, &body)
}

fn run(cli: Cli) -> Result<()> {
    let g = cli.global;
    init_threads(g.threads)?;
    let file = FileConfig::load(g.config.as_deref())?;
    let seed = pick(g.seed, file.seed, 0);
    let out = g.out.as_deref();

    match cli.command {
        Command::Validate { file: path, mode } => {
            require_json(g.format, "validate")?;
            let (space, kind) = ultragw::UmSpace::from_json_str(&io::read(&path)?)
                .with_context(|| format!("loading space {}", path.display()))?;
            let mode = mode.map(Mode::from).or(kind).unwrap_or(Mode::Ultrametric);
            let report = space.validate(mode);
            let passed = report.passed;
            finish(
                out,
                seed,
                serde_json::to_value(&report)?,
                json!({"command": "validate", "file": path, "mode": mode}),
            )?;
            if !passed {
                return Err(anyhow::Error::new(report.into_result().unwrap_err())
                    .context(format!("{} failed validation", path.display())));
            }
            Ok(())
        }

        Command::Ingest { newick, unit_edges, measure } => {
            require_json(g.format, "ingest")?;
            let unit_edges = switch(unit_edges, file.unit_edges);
            let measure = pick(measure.map(Into::into), file.measure, TipMeasure::default());
            let spaces = io::ingest_file(&newick, unit_edges, measure)?;
            let config = json!({
                "command": "ingest", "newick": newick, "unit_edges": unit_edges, "measure": measure,
            });
            if let [(_, space)] = spaces.as_slice() {
                finish(out, seed, space.to_json(), config)
            } else {
                let list: Vec<Value> = spaces
                    .iter()
                    .map(|(id, s)| json!({"id": id, "space": s.to_json()}))
                    .collect();
                finish(out, seed, json!({"spaces": list}), config)
            }
        }

        Command::Gen { k, samples_per_block, subsample } => {
            require_json(g.format, "gen")?;
            let d = GenSpec::default();
            let spec = GenSpec {
                k: pick(k, file.k, d.k),
                samples_per_block: pick(samples_per_block, file.samples_per_block, d.samples_per_block),
                subsample: pick(subsample, file.subsample, d.subsample),
                seed,
            };
            let space = synth::gen_ultrametric(&spec)?;
            let mut config = serde_json::to_value(&spec)?;
            config["command"] = json!("gen");
            finish(out, seed, space.to_json(), config)
        }

        Command::Perturb { file: path, t } => {
            require_json(g.format, "perturb")?;
            let t = pick(t, file.t, 0.0);
            let space = io::load_space(&path)?;
            let result = synth::perturb(&space, t, seed)?;
            finish(
                out,
                seed,
                result.to_json(),
                json!({"command": "perturb", "file": path, "t": t, "seed": seed}),
            )
        }

        Command::Quotient { file: path, t } => {
            require_json(g.format, "quotient")?;
            let t = t.or(file.t).ok_or_else(|| Error::Parameter("--t is required".into()))?;
            let space = io::load_space(&path)?;
            let q = space.quotient(t)?;
            finish(
                out,
                seed,
                json!({"level": q.level, "blocks": q.blocks, "quotient": q.quotient.to_json()}),
                json!({"command": "quotient", "file": path, "t": t}),
            )
        }

        Command::Wasserstein { pair, p, q, ground } => {
            require_json(g.format, "wasserstein")?;
            let p = pick(p, file.p, 1.0);
            let q = q.or(file.q);
            let value = if ground == "halfline" {
                let a: ScalarMeasure = io::load_measure(&pair.a)?;
                let b: ScalarMeasure = io::load_measure(&pair.b)?;
                match q {
                    Some(q) => transport::w_quantile(&a, &b, p, q)?,
                    None => transport::w_halfline(&a, &b, p)?,
                }
            } else {
                if q.is_some() {
                    bail!(Error::Parameter("--q applies to the half-line ground only".into()));
                }
                let space = io::load_space(Path::new(&ground))?;
                let a = io::load_vector(&pair.a)?;
                let b = io::load_vector(&pair.b)?;
                transport::w_ultrametric(&space, &a, &b, p)?
            };
            finish(
                out,
                seed,
                json!({"value": value}),
                json!({"command": "wasserstein", "a": pair.a, "b": pair.b, "ground": ground, "p": p, "q": q}),
            )
        }

        Command::Ugw { pair, p, classical, fw } => {
            require_json(g.format, "ugw")?;
            let p = pick(p, file.p, 1.0);
            let classical = switch(classical, file.classical);
            let cfg = fw_config(&fw, &file, seed);
            let x = io::load_space(&pair.a)?;
            let y = io::load_space(&pair.b)?;
            let result = if classical {
                gw::dgw_fw(&x, &y, p, &cfg)?
            } else {
                gw::ugw_fw(&x, &y, p, &cfg, Cost::Ultra)?
            };
            finish(
                out,
                seed,
                result.to_json(),
                json!({
                    "command": "ugw", "a": pair.a, "b": pair.b, "p": p,
                    "classical": classical, "fw": fw_json(&cfg),
                }),
            )
        }

        Command::UgwInf { pair } => {
            require_json(g.format, "ugw-inf")?;
            let x = io::load_space(&pair.a)?;
            let y = io::load_space(&pair.b)?;
            let result = gw::ugw_inf_exact(&x, &y)?;
            finish(out, seed, result.to_json(), json!({"command": "ugw-inf", "a": pair.a, "b": pair.b}))
        }

        Command::Ugh { pair } => {
            require_json(g.format, "ugh")?;
            let x = io::load_space(&pair.a)?;
            let y = io::load_space(&pair.b)?;
            let value = gw::ugh_exact(&x, &y)?;
            finish(
                out,
                seed,
                json!({"value": value, "method": "ugh-exact"}),
                json!({"command": "ugh", "a": pair.a, "b": pair.b}),
            )
        }

        Command::Usturm { pair, p, max_n } => {
            require_json(g.format, "usturm")?;
            let p = pick(p, file.p, 1.0);
            let cap = pick(max_n, file.max_n, gw::DEFAULT_SIZE_CAP);
            let x = io::load_space(&pair.a)?;
            let y = io::load_space(&pair.b)?;
            let result = gw::usturm_bruteforce(&x, &y, p, cap)?;
            finish(
                out,
                seed,
                result.to_json(),
                json!({"command": "usturm", "a": pair.a, "b": pair.b, "p": p, "max_n": cap}),
            )
        }

        Command::Bounds { pair, p, which } => {
            require_json(g.format, "bounds")?;
            let p = pick(p, file.p, 1.0);
            let which = which.or(file.which.clone()).unwrap_or_else(|| BOUND_NAMES.join(","));
            let names: Vec<&str> = which.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            let x = io::load_space(&pair.a)?;
            let y = io::load_space(&pair.b)?;
            let mut values = serde_json::Map::new();
            for name in &names {
                let v = match *name {
                    "uflb" => bounds::uflb(&x, &y, p)?,
                    "uslb" => bounds::uslb(&x, &y, p)?,
                    "utlb" => bounds::utlb(&x, &y, p)?,
                    "flb" => bounds::flb(&x, &y, p)?,
                    "slb" => bounds::slb(&x, &y, p)?,
                    "tlb" => bounds::tlb(&x, &y, p)?,
                    other => bail!(Error::Parameter(format!("unknown bound '{other}'"))),
                };
                values.insert(name.to_string(), json!(v));
            }
            finish(
                out,
                seed,
                Value::Object(values),
                json!({"command": "bounds", "a": pair.a, "b": pair.b, "p": p, "which": names}),
            )
        }

        Command::Matrix { dir, newick_dir, unit_edges, measure, which, p, skip_invalid, fw } => {
            let p = pick(p, file.p, 1.0);
            let method: Method = which
                .or(file.which.clone())
                .ok_or_else(|| Error::Parameter("--which is required".into()))?
                .trim()
                .parse()?;
            let skip_invalid = switch(skip_invalid, file.skip_invalid);
            let unit_edges = switch(unit_edges, file.unit_edges);
            let measure = pick(measure.map(Into::into), file.measure, TipMeasure::default());
            let cfg = fw_config(&fw, &file, seed);

            let corpus = match (&dir, &newick_dir) {
                (Some(d), _) => io::load_space_dir(d)?,
                (None, Some(d)) => io::load_newick_dir(d, unit_edges, measure, Exec::Parallel)?,
                (None, None) => unreachable!("clap requires one corpus"),
            };
            let mut ids = Vec::new();
            let mut spaces = Vec::new();
            for (id, path, space) in corpus {
                let mode = if space.is_zero_diagonal() { Mode::Ultrametric } else { Mode::UltraDissimilarity };
                match space.validate(mode).into_result() {
                    Ok(()) => {
                        ids.push(id);
                        spaces.push(space);
                    }
                    Err(e) if skip_invalid => eprintln!("warning: skipping {}: {e}", path.display()),
                    Err(e) => {
                        return Err(anyhow::Error::new(e).context(format!("validating {}", path.display())))
                    }
                }
            }
            let m = batch::matrix(&spaces, method, p, &cfg, Exec::Parallel)?;

            let mut config = json!({
                "command": "matrix", "method": method.name(), "p": p, "seed": seed,
                "dir": dir, "newick_dir": newick_dir, "skip_invalid": skip_invalid,
            });
            if newick_dir.is_some() {
                config["unit_edges"] = json!(unit_edges);
                config["measure"] = json!(measure);
            }
            if method == Method::UgwFw {
                config["fw"] = fw_json(&cfg);
            }
            match g.format {
                Format::Csv => {
                    eprintln!("config: {config}");
                    io::emit(out, &batch::to_csv(&ids, &ids, &m))
                }
                Format::Json => {
                    let rows: Vec<Vec<f64>> = m.rows().into_iter().map(|r| r.to_vec()).collect();
                    finish(out, seed, json!({"ids": ids, "matrix": rows, "method": method.name()}), config)
                }
            }
        }

        Command::Mds { file: path, dim } => {
            let dim = pick(dim, file.dim, 2);
            let (ids, d) = batch::from_csv(&io::read(&path)?)
                .with_context(|| format!("reading matrix {}", path.display()))?;
            let emb = batch::mds(&d, dim)?;
            if emb.clamped {
                eprintln!("warning: negative eigenvalues clamped to zero; matrix is not Euclidean");
            }
            let config = json!({"command": "mds", "file": path, "dim": dim});
            match g.format {
                Format::Csv => {
                    eprintln!("config: {config}");
                    let cols: Vec<String> = (1..=dim).map(|k| format!("x{k}")).collect();
                    io::emit(out, &batch::to_csv(&ids, &cols, &emb.coords))
                }
                Format::Json => {
                    let coords: Vec<Vec<f64>> = emb.coords.rows().into_iter().map(|r| r.to_vec()).collect();
                    finish(
                        out,
                        seed,
                        json!({
                            "ids": ids, "coords": coords,
                            "eigenvalues": emb.eigenvalues, "clamped": emb.clamped,
                        }),
                        config,
                    )
                }
            }
        }
    }
}
