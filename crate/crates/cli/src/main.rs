use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use wcolour::colouring::random_order;
use wcolour::experiments::{p_from_beta, render};
use wcolour::threshold::{colour_count, default_window};
use wcolour::{
    estimate_good_fraction, exact_chi_w, gen_gnp, greedy_colour, local_average_bound, sample_weights, two_stage_colour,
    verify_weighted, Colouring, EdgeWeightMap, Error, ExactOutcome, ExperimentConfig, Graph, OutputFormat,
    PatternGraph, Seed, WeightDistributionSpec,
};

const EXIT_INVALID: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(name = "wcolour", version, about = "Weighted colourings of random graphs")]
struct Cli {
    /// Worker threads for parallel subcommands (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample G(n, p) and print its edge list.
    Gen {
        #[command(flatten)]
        random: RandomGraph,
        /// Also sample edge weights from this distribution.
        #[arg(long)]
        dist: Option<WeightDistributionSpec>,
        /// Where to write the sampled weights (requires --dist).
        #[arg(long, requires = "dist")]
        weights: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Colour a weighted graph greedily or with the two-stage scheme.
    Colour {
        #[command(flatten)]
        input: WeightedInput,
        #[arg(long, value_enum, default_value_t = Method::Greedy)]
        method: Method,
        #[arg(long, value_enum, default_value_t = Order::Id)]
        order: Order,
        /// Mean edge weight for the two-stage cutoff (default: mean of --dist).
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, default_value_t = 0.3)]
        eps: f64,
        /// Write the colouring here as "v colour" lines.
        #[arg(long)]
        colouring: Option<PathBuf>,
    },
    /// Compute the weighted colouring number exactly.
    Exact {
        #[command(flatten)]
        input: WeightedInput,
        /// Search-node budget; exit 3 with the best colouring found if exhausted.
        #[arg(long, default_value_t = 50_000_000)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
        #[arg(long)]
        colouring: Option<PathBuf>,
    },
    /// Check a colouring against a weighted graph.
    Verify {
        #[command(flatten)]
        input: WeightedInput,
        #[arg(long)]
        colouring: PathBuf,
    },
    /// Report whether a pattern graph is balanced.
    Balanced {
        #[arg(long)]
        pattern: String,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
    },
    /// Count (or list) copies of a pattern in a graph.
    Copies {
        #[command(flatten)]
        graph: GraphInput,
        #[arg(long)]
        pattern: String,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
    },
    /// Estimate the fraction of uniform r-colourings with a good pattern copy.
    GoodFraction {
        #[command(flatten)]
        input: WeightedInput,
        #[arg(long)]
        pattern: String,
        #[arg(long, conflicts_with = "theta", required_unless_present = "theta")]
        r: Option<u64>,
        /// Use r = ceil(n^theta) colours.
        #[arg(long)]
        theta: Option<f64>,
        /// Goodness window (default v0 (K + 1)).
        #[arg(long = "M")]
        m: Option<u64>,
        /// Weight cutoff (default from --dist, else 1).
        #[arg(long = "K")]
        k: Option<u64>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
    /// Run a parameter sweep described by a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        /// Output file (default: the config's output, else stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<SweepFormat>,
    },
}

#[derive(Args)]
struct RandomGraph {
    #[arg(long)]
    n: usize,
    #[arg(long, conflicts_with = "beta", required_unless_present = "beta")]
    p: Option<f64>,
    /// Use p = n^-beta.
    #[arg(long)]
    beta: Option<f64>,
    /// Seed, either an integer or a "master/a/b" path from a sweep record.
    #[arg(long, default_value = "0")]
    seed: Seed,
}

impl RandomGraph {
    fn p(&self) -> f64 {
        self.p
            .unwrap_or_else(|| p_from_beta(self.n, self.beta.expect("clap requires p or beta")))
    }

    fn sample(&self) -> wcolour::Result<Graph> {
        gen_gnp(self.n, self.p(), &self.seed.child(0))
    }
}

/// A graph read from `--graph` or sampled from `--n`, `--p | --beta`, `--seed`.
#[derive(Args)]
struct GraphInput {
    /// Edge-list file ("n m" header, then "u v" lines).
    #[arg(long, conflicts_with = "n", required_unless_present = "n")]
    graph: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, conflicts_with = "beta")]
    p: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value = "0")]
    seed: Seed,
}

impl GraphInput {
    fn load(&self) -> wcolour::Result<Graph> {
        match (&self.graph, self.n) {
            (Some(path), _) => Graph::parse_edge_list(&read(path)?),
            (None, Some(n)) => gen_gnp(n, self.p_for(n)?, &self.seed.child(0)),
            (None, None) => unreachable!("clap requires --graph or --n"),
        }
    }

    /// Edge probability for an `n`-vertex graph, if one was given.
    fn p_opt(&self, n: usize) -> Option<f64> {
        self.p.or(self.beta.map(|b| p_from_beta(n, b)))
    }

    fn p_for(&self, n: usize) -> wcolour::Result<f64> {
        self.p_opt(n)
            .ok_or_else(|| Error::InvalidInput("--n needs --p or --beta".into()))
    }
}

#[derive(Args)]
struct WeightedInput {
    #[command(flatten)]
    graph: GraphInput,
    /// Weight file ("u v w" lines in edge-list order).
    #[arg(long, conflicts_with = "dist")]
    weights: Option<PathBuf>,
    /// Sample weights from "constant:W" or "pareto:ALPHA" (default constant:1).
    #[arg(long)]
    dist: Option<WeightDistributionSpec>,
}

impl WeightedInput {
    fn load(&self) -> wcolour::Result<(Graph, EdgeWeightMap)> {
        let g = self.graph.load()?;
        let w = match &self.weights {
            Some(path) => EdgeWeightMap::parse_text(&g, &read(path)?)?,
            None => sample_weights(&g, &self.dist(), &self.graph.seed.child(1))?,
        };
        Ok((g, w))
    }

    fn dist(&self) -> WeightDistributionSpec {
        self.dist.unwrap_or(WeightDistributionSpec::Constant(1))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Greedy,
    TwoStage,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Id,
    Random,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Plain,
    Json,
    Jsonl,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepFormat {
    Csv,
    Jsonl,
    Json,
}

/// A failure with its exit code and one-line message.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Contract(_) => 1,
            _ => EXIT_INVALID,
        };
        Failure(code, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(EXIT_INVALID, msg.into())
}

fn read(path: &Path) -> wcolour::Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_pattern(spec: &str) -> Result<PatternGraph, Failure> {
    if let Ok(p) = PatternGraph::named(spec) {
        return Ok(p);
    }
    let path = Path::new(spec);
    if !path.is_file() {
        return Err(invalid(format!(
            "unknown pattern {spec:?} (not a built-in name or a file)"
        )));
    }
    let g = Graph::parse_edge_list(&read(path)?)?;
    Ok(PatternGraph::new(path.display().to_string(), g)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", line.trim_start_matches("error: "));
            return ExitCode::from(EXIT_INVALID);
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("thread pool: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    }
    match dispatch(cli.command) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.text.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::from(out.code)
        }
        Err(Failure(code, msg)) => {
            eprintln!("{}", msg.replace('\n', " "));
            ExitCode::from(code)
        }
    }
}

/// Text for stdout and the exit code.
struct Output {
    text: String,
    code: u8,
}

impl Output {
    fn ok(text: impl Into<String>) -> Self {
        Output {
            text: text.into(),
            code: 0,
        }
    }

    fn line(text: impl std::fmt::Display) -> Self {
        Self::ok(format!("{text}\n"))
    }
}

fn dispatch(command: Command) -> Result<Output, Failure> {
    match command {
        Command::Gen {
            random,
            dist,
            weights,
            out,
        } => {
            let g = random.sample()?;
            if let (Some(dist), Some(path)) = (dist, &weights) {
                let w = sample_weights(&g, &dist, &random.seed.child(1))?;
                write(path, &w.to_text(&g))?;
            }
            match out {
                Some(path) => {
                    write(&path, &g.to_edge_list())?;
                    Ok(Output::ok(""))
                }
                None => Ok(Output::ok(g.to_edge_list())),
            }
        }

        Command::Colour {
            input,
            method,
            order,
            mu,
            eps,
            colouring,
        } => {
            let (g, w) = input.load()?;
            let bound = local_average_bound(&g, &w);
            let (f, report) = match method {
                Method::Greedy => {
                    let order = match order {
                        Order::Id => (0..g.n()).collect(),
                        Order::Random => random_order(g.n(), &input.graph.seed.child(2)),
                    };
                    (greedy_colour(&g, &w, &order)?, None)
                }
                Method::TwoStage => {
                    let mu = match (mu, &input.weights) {
                        (Some(mu), _) => mu,
                        (None, None) => input
                            .dist()
                            .mean()
                            .ok_or_else(|| invalid("weight mean is infinite; pass --mu"))?,
                        (None, Some(_)) => return Err(invalid("two-stage with a weight file needs --mu")),
                    };
                    let p = input
                        .graph
                        .p_opt(g.n())
                        .ok_or_else(|| invalid("two-stage needs --p or --beta"))?;
                    let (f, rep) = two_stage_colour(&g, &w, mu, p, eps)?;
                    (f, Some(rep))
                }
            };
            if let Some(path) = &colouring {
                write(path, &f.to_text())?;
            }
            let mut value = json!({
                "n": g.n(),
                "edges": g.m(),
                "max_colour": f.max_colour(),
                "local_bound": bound,
                "colours": f.as_slice(),
            });
            if let Some(rep) = report {
                value["two_stage"] = serde_json::to_value(rep).map_err(Error::from)?;
            }
            Ok(Output::line(value))
        }

        Command::Exact {
            input,
            budget,
            format,
            colouring,
        } => {
            let (g, w) = input.load()?;
            let outcome = exact_chi_w(&g, &w, budget);
            if let Some(path) = &colouring {
                write(path, &outcome.colouring().to_text())?;
            }
            let code = if outcome.is_optimal() { 0 } else { EXIT_INCONCLUSIVE };
            let text = match format {
                Format::Plain => format!("{}\n", outcome.value()),
                Format::Json | Format::Jsonl => format!("{}\n", exact_json(&outcome)),
            };
            if code == EXIT_INCONCLUSIVE {
                eprintln!("search budget exhausted; best colouring found uses {}", outcome.value());
            }
            Ok(Output { text, code })
        }

        Command::Verify { input, colouring } => {
            let (g, w) = input.load()?;
            let f = Colouring::parse_text(&read(&colouring)?)?;
            Ok(Output::line(verify_weighted(&g, &w, &f)?))
        }

        Command::Balanced { pattern, format } => {
            let gamma = load_pattern(&pattern)?;
            if format == Format::Plain {
                return Ok(Output::line(gamma.is_balanced()));
            }
            Ok(Output::line(json!({
                "pattern": gamma.name(),
                "v0": gamma.v0(),
                "e0": gamma.e0(),
                "density": gamma.max_subgraph_density().to_string(),
                "balanced": gamma.is_balanced(),
                "automorphisms": gamma.automorphism_count(),
            })))
        }

        Command::Copies { graph, pattern, format } => {
            let g = graph.load()?;
            let gamma = load_pattern(&pattern)?;
            match format {
                Format::Plain => Ok(Output::line(wcolour::patterns::count_copies(&g, &gamma))),
                Format::Json => {
                    let copies: Vec<_> = wcolour::enumerate_copies(&g, &gamma).map(copy_json).collect();
                    Ok(Output::line(json!({"count": copies.len(), "copies": copies})))
                }
                Format::Jsonl => Ok(Output::ok(
                    wcolour::enumerate_copies(&g, &gamma)
                        .map(|c| format!("{}\n", copy_json(c)))
                        .collect::<String>(),
                )),
            }
        }

        Command::GoodFraction {
            input,
            pattern,
            r,
            theta,
            m,
            k,
            trials,
        } => {
            let (g, w) = input.load()?;
            let gamma = load_pattern(&pattern)?;
            let r = match (r, theta) {
                (Some(r), _) => r,
                (None, Some(theta)) => colour_count(g.n(), theta)?,
                (None, None) => unreachable!("clap requires --r or --theta"),
            };
            let k = k.unwrap_or_else(|| input.dist.map_or(1, |d| d.default_cutoff()));
            if k == 0 {
                return Err(invalid("K must be >= 1"));
            }
            let m = m.unwrap_or_else(|| default_window(&gamma, k));
            let est = estimate_good_fraction(&g, &w, &gamma, r, m, trials, &input.graph.seed.child(2))?;
            Ok(Output::line(json!({
                "pattern": gamma.name(),
                "n": g.n(),
                "r": r,
                "M": m,
                "K": k,
                "copies": wcolour::patterns::count_copies(&g, &gamma),
                "fraction": est.fraction,
                "stderr": est.stderr,
                "good": est.good,
                "trials": est.trials,
            })))
        }

        Command::Sweep {
            config,
            seed,
            trials,
            out,
            format,
        } => {
            let mut cfg = ExperimentConfig::from_json_file(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if trials.is_some() {
                cfg.trials = trials;
            }
            let array = matches!(format, Some(SweepFormat::Json));
            match format {
                Some(SweepFormat::Csv) => cfg.format = OutputFormat::Csv,
                Some(SweepFormat::Jsonl) | Some(SweepFormat::Json) => cfg.format = OutputFormat::Jsonl,
                None => {}
            }
            let records = wcolour::experiments::run(&cfg)?;
            let text = if array {
                let mut s = serde_json::to_string_pretty(&records).map_err(Error::from)?;
                s.push('\n');
                s
            } else {
                render(&records, cfg.kind, cfg.format)?
            };
            match out.or(cfg.output) {
                Some(path) => {
                    write(&path, &text)?;
                    Ok(Output::ok(""))
                }
                None => Ok(Output::ok(text)),
            }
        }
    }
}

fn exact_json(outcome: &ExactOutcome) -> serde_json::Value {
    json!({
        "chi_w": outcome.value(),
        "optimal": outcome.is_optimal(),
        "colours": outcome.colouring().as_slice(),
    })
}

fn copy_json(c: wcolour::Copy) -> serde_json::Value {
    json!({"vertices": c.vertices, "edges": c.edges})
}
