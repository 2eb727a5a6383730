use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use lysa::cfa::AnalysisOptions;
use lysa::exec::{self, ExploreOptions};
use lysa::scenario::{corpus, run_scenario, run_scenario_full, NamePattern, Report, Scenario};

#[derive(Parser)]
#[command(name = "lysa", version, about = "Control flow analysis of LySa protocol models")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analyse a model file.
    Analyze {
        file: PathBuf,
        /// Compose with the Dolev-Yao attacker.
        #[arg(long)]
        attacker: bool,
        /// Names whose confidentiality is reported; `*` matches any nonzero index.
        #[arg(long = "secret", value_name = "NAME")]
        secrets: Vec<NamePattern>,
        /// Names handed to the attacker up front.
        #[arg(long = "leak", value_name = "NAME")]
        leaks: Vec<NamePattern>,
        /// Keep index 0 so the attacker also acts as a legitimate principal.
        #[arg(long)]
        legitimate_attacker: bool,
        #[arg(long, default_value_t = 1)]
        rounds: u32,
        /// Override an index set, e.g. `X=1,2`.
        #[arg(long = "set", value_name = "NAME=I,J,..")]
        sets: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        max_universe: Option<usize>,
        /// Also run the concrete oracle to this depth and check coverage.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// The shipped scenarios.
    Corpus {
        #[command(subcommand)]
        cmd: CorpusCmd,
    },
    /// Explore a model concretely and check the analysis covers every event.
    Oracle {
        file: PathBuf,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Keep sent messages available after they are received.
        #[arg(long)]
        replay: bool,
        /// Report a schedule in which two sessions bind this variable to the same fresh value.
        #[arg(long)]
        watch: Option<String>,
        /// Run one session of each role to this depth as a first round, then
        /// explore a second such round in which its messages may be injected.
        #[arg(long, value_name = "DEPTH", requires = "watch")]
        round1: Option<usize>,
        /// Run each replicated role once.
        #[arg(long)]
        single_session: bool,
        #[arg(long = "set", value_name = "NAME=I,J,..")]
        sets: Vec<String>,
        /// Keep index 0 in index sets.
        #[arg(long)]
        legitimate_attacker: bool,
    },
}

#[derive(Subcommand)]
enum CorpusCmd {
    /// Run every scenario, or those whose name contains the filter.
    Run {
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// List scenario names.
    List,
}

fn parse_sets(sets: &[String]) -> Result<BTreeMap<String, std::collections::BTreeSet<u32>>> {
    let mut out = BTreeMap::new();
    for s in sets {
        let (name, vals) = s
            .split_once('=')
            .with_context(|| format!("expected NAME=I,J,.. in `{s}`"))?;
        let vals = vals
            .split(',')
            .filter(|v| !v.trim().is_empty())
            .map(|v| v.trim().parse::<u32>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("bad index in `{s}`"))?;
        out.insert(name.trim().to_string(), vals);
    }
    Ok(out)
}

fn load(file: &PathBuf) -> Result<Scenario> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let name = file
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(Scenario::new(&name, &file.display().to_string(), &text))
}

fn emit(report: &Report, format: Format) {
    match format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!("{}", report.to_json()),
    }
}

fn run() -> Result<u8> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Analyze {
            file,
            attacker,
            secrets,
            leaks,
            legitimate_attacker,
            rounds,
            sets,
            format,
            max_universe,
            depth,
        } => {
            let mut s = load(&file)?;
            s.attacker = attacker;
            s.secrets = secrets;
            s.leaked = leaks;
            s.legitimate_attacker = legitimate_attacker;
            s.rounds = rounds;
            s.index_sets = parse_sets(&sets)?;
            if let Some(cap) = max_universe {
                s.solver.max_universe = cap;
            }
            let (p, r, report) = run_scenario_full(&s)?;
            emit(&report, format);
            if let Some(depth) = depth {
                let ex = exec::explore(
                    &p,
                    &ExploreOptions {
                        depth,
                        ..Default::default()
                    },
                );
                let missing = exec::uncovered(&ex.events, &r);
                eprintln!("oracle: {} states, {} uncovered events", ex.states, missing.len());
                for e in missing {
                    eprintln!("  {e}");
                }
            }
            Ok(report.exit_code() as u8)
        }
        Cmd::Corpus { cmd: CorpusCmd::List } => {
            for s in corpus() {
                println!("{}", s.name);
            }
            Ok(0)
        }
        Cmd::Corpus {
            cmd: CorpusCmd::Run { filter, format },
        } => {
            let mut code = 0;
            let mut any = false;
            for s in corpus() {
                if filter.as_deref().is_some_and(|f| !s.name.contains(f)) {
                    continue;
                }
                any = true;
                let report = run_scenario(&s)?;
                emit(&report, format);
                code = code.max(report.exit_code());
            }
            if !any {
                bail!("no scenario matches the filter");
            }
            Ok(code as u8)
        }
        Cmd::Oracle {
            file,
            depth,
            replay,
            watch,
            round1,
            single_session,
            sets,
            legitimate_attacker,
        } => {
            let mut s = load(&file)?;
            s.attacker = false;
            s.legitimate_attacker = legitimate_attacker;
            s.index_sets = parse_sets(&sets)?;
            let (p, _) = s.process()?;
            let r = lysa::analyze(&p, &AnalysisOptions::default())?;
            let p = if single_session {
                exec::single_session(&p)
            } else {
                p
            };
            let ex = match (round1, watch) {
                (Some(d1), Some(w)) => {
                    let round = exec::capture_round(&p, d1, &w);
                    println!(
                        "first round: {} messages, {} values of {w}",
                        round.captured.len(),
                        round.bound.len()
                    );
                    exec::replay_round(&p, &round, depth, &w)
                }
                (_, watch) => exec::explore(
                    &p,
                    &ExploreOptions {
                        depth,
                        replay,
                        watch,
                        ..Default::default()
                    },
                ),
            };
            let missing = exec::uncovered(&ex.events, &r);
            println!(
                "{} states, {} events{}",
                ex.states,
                ex.events.events.len(),
                if ex.truncated { " (truncated)" } else { "" }
            );
            for e in &missing {
                println!("uncovered: {e}");
            }
            if let Some(w) = &ex.witness {
                println!("reuse witness:");
                for e in &w.events {
                    println!("  {e}");
                }
            }
            Ok(if missing.is_empty() { 0 } else { 2 })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
