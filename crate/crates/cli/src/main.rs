use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tkt_core::automaton::{parse_model, to_dot, write_model};
use tkt_core::eval::{generate_corpus, inject_anomaly, subset_study, AnomalySpec, KFoldOptions, WorkloadSpec};
use tkt_core::trace::write_corpus;
use tkt_core::{accepts, mine, parse_corpus, Confidence, Fixed, MiningConfig, PolicyConfig, TimedTrace};

/// Mine timed automata from begin/end traces and check traces against them.
#[derive(Parser)]
#[command(name = "tkt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine a model from a trace corpus.
    Mine {
        traces: PathBuf,
        /// Model output path (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        policy: PolicyArgs,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Also write `<output>.initial`, `.merged` and `.refined`.
        #[arg(long, requires = "output")]
        dump_stages: bool,
    },
    /// Check each trace of a corpus against a model.
    Check {
        model: PathBuf,
        traces: PathBuf,
        /// Ignore guards on the absolute clock.
        #[arg(long)]
        no_absolute: bool,
    },
    /// Cross-validate guard configurations on valid and invalid corpora.
    Eval {
        #[arg(long)]
        valid: PathBuf,
        #[arg(long)]
        invalid: Option<PathBuf>,
        /// Comma-separated configuration ids, or `all`.
        #[arg(long, default_value = "all")]
        configs: String,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Comma-separated training fractions in (0, 1].
        #[arg(long, default_value = "1")]
        fractions: String,
        /// Random subsets drawn per fraction below 1.
        #[arg(long, default_value_t = 3)]
        extractions: usize,
        /// CSV report path (the summary table always goes to stdout).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Generate a synthetic corpus from a workload description.
    Gen {
        workload: PathBuf,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Override the workload seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Anomaly description applied to every generated trace.
        #[arg(long)]
        anomaly: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Render a model as Graphviz DOT.
    Export {
        model: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyKind {
    Minmax,
    Gamma,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct PolicyArgs {
    /// Standard configuration id (M1..M16, G1..G4).
    #[arg(long, conflicts_with_all = ["policy", "param", "absolute"])]
    config: Option<String>,
    #[arg(long, value_enum, requires = "param")]
    policy: Option<PolicyKind>,
    /// ε for minmax, γ (0.95 or 0.99) for gamma.
    #[arg(long)]
    param: Option<String>,
    #[arg(long, value_enum, default_value = "on")]
    absolute: Switch,
}

/// Failure classes, mapped to distinct exit codes.
enum Failure {
    Input(anyhow::Error),
    Config(anyhow::Error),
    Rejected(usize),
}

type Outcome<T> = Result<T, Failure>;

fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Input(e.into())
}

fn config<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Config(e.into())
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())).map_err(input),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_traces(path: &Path) -> Outcome<Vec<TimedTrace>> {
    let text = read(path).map_err(input)?;
    parse_corpus(&text).with_context(|| format!("in {}", path.display())).map_err(input)
}

fn load_model(path: &Path) -> Outcome<tkt_core::TimedAutomaton> {
    let text = read(path).map_err(input)?;
    parse_model(&text).with_context(|| format!("in {}", path.display())).map_err(config)
}

fn policy_config(args: &PolicyArgs) -> anyhow::Result<PolicyConfig> {
    let absolute = matches!(args.absolute, Switch::On);
    match (&args.config, args.policy) {
        (Some(id), _) => Ok(PolicyConfig::from_id(id)?),
        (None, None) => Ok(PolicyConfig::from_id("M1")?),
        (None, Some(kind)) => {
            let param = args.param.as_deref().ok_or_else(|| anyhow!("--policy needs --param"))?;
            match kind {
                PolicyKind::Minmax => {
                    let eps: Fixed = param.parse().map_err(|e| anyhow!("invalid epsilon `{param}`: {e}"))?;
                    Ok(PolicyConfig::min_max(eps, absolute)?)
                }
                PolicyKind::Gamma => {
                    let c = Confidence::from_gamma(param)
                        .ok_or_else(|| anyhow!("unsupported gamma `{param}` (expected 0.95 or 0.99)"))?;
                    Ok(PolicyConfig::gamma(c, absolute))
                }
            }
        }
    }
}

fn stage_path(base: &Path, stage: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(".");
    s.push(stage);
    PathBuf::from(s)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> anyhow::Result<Vec<T>> {
    s.split(',').map(|x| x.trim().parse().map_err(|_| anyhow!("invalid {what} `{x}`"))).collect()
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::Mine { traces, output, policy, k, dump_stages } => {
            let traces = load_traces(&traces)?;
            let cfg = MiningConfig::new(k, policy_config(&policy).map_err(config)?);
            let mined = mine(&traces, &cfg).map_err(config)?;
            if dump_stages {
                let base = output.as_deref().expect("clap requires --output");
                for (name, a) in [("initial", &mined.stages.initial), ("merged", &mined.stages.merged), ("refined", &mined.stages.refined)] {
                    write_out(Some(&stage_path(base, name)), &write_model(a))?;
                }
            }
            write_out(output.as_deref(), &write_model(&mined.model))?;
            let s = mined.model.stats();
            eprintln!(
                "mined {} events in {:.3}s: {} states, {} transitions, {} clocks",
                mined.events,
                mined.elapsed.as_secs_f64(),
                s.states,
                s.transitions,
                s.clocks
            );
            Ok(())
        }
        Command::Check { model, traces, no_absolute } => {
            let model = load_model(&model)?;
            let traces = load_traces(&traces)?;
            let mut rejected = 0;
            for t in &traces {
                let r = accepts(&model, t, !no_absolute).map_err(input)?;
                if r.accepted {
                    println!("ACCEPT");
                } else {
                    rejected += 1;
                    match r.failure {
                        Some(f) => println!("REJECT {f}"),
                        None => println!("REJECT"),
                    }
                }
            }
            if rejected > 0 {
                return Err(Failure::Rejected(rejected));
            }
            Ok(())
        }
        Command::Eval { valid, invalid, configs, folds, repetitions, seed, k, fractions, extractions, csv } => {
            let valid = load_traces(&valid)?;
            let invalid = match invalid {
                Some(p) => load_traces(&p)?,
                None => Vec::new(),
            };
            let configs = if configs == "all" {
                PolicyConfig::table()
            } else {
                configs.split(',').map(|id| PolicyConfig::from_id(id.trim())).collect::<Result<_, _>>().map_err(config)?
            };
            let fractions: Vec<f64> = parse_list(&fractions, "fraction").map_err(config)?;
            let opts = KFoldOptions { folds, repetitions, seed, k };
            let report = subset_study(&valid, &invalid, &configs, &fractions, extractions, &opts).map_err(config)?;
            if let Some(p) = csv {
                write_out(Some(&p), &report.to_csv())?;
            }
            print!("{}", report.summary_table());
            Ok(())
        }
        Command::Gen { workload, count, seed, anomaly, output } => {
            let mut spec = WorkloadSpec::from_toml(&read(&workload).map_err(input)?)
                .with_context(|| format!("in {}", workload.display()))
                .map_err(config)?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            let mut traces = generate_corpus(&spec, count).map_err(config)?;
            if let Some(p) = anomaly {
                let a = AnomalySpec::from_toml(&read(&p).map_err(input)?)
                    .with_context(|| format!("in {}", p.display()))
                    .map_err(config)?;
                traces = traces
                    .iter()
                    .enumerate()
                    .map(|(i, t)| inject_anomaly(t, &a).with_context(|| format!("trace {i}")))
                    .collect::<anyhow::Result<_>>()
                    .map_err(config)?;
            }
            write_out(output.as_deref(), &write_corpus(&traces))
        }
        Command::Export { model, output } => {
            let model = load_model(&model)?;
            write_out(output.as_deref(), &to_dot(&model))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Rejected(n)) => {
            eprintln!("{n} trace(s) rejected");
            ExitCode::from(3)
        }
    }
}
