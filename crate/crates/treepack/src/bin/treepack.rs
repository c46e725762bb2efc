use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use treepack::oracle::{verify, Decomposition};
use treepack::run::{bench, execute, GenSpec, Mode, RunSpec, Source};
use treepack::{Error, ErrorClass, Result};

const EXIT_CODES: &str = "\
Exit codes:
  0   success (decomposition written and verified)
  2   input error (unreadable or malformed graph/tree, bad flags)
  3   config error (unknown key, parameter hierarchy violated)
  4   classification failure (tree is in none of Cases L, S, P)
  5   abort (a stage stopped: MATCH failure, stuck loop, partition failure)
  6   infeasible (no perfect matching / no decomposition exists)
  7   budget (oracle cap or node budget exceeded)
  70  internal inconsistency (audit or verification failed; a bug)";

#[derive(Parser, Debug)]
#[command(name = "treepack", version, about = "Decompose a graph into n copies of a tree", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// One run: pipeline, oracle or both.
    #[command(after_help = EXIT_CODES)]
    Run(RunArgs),
    /// Many seeds of one spec; writes bench.csv and a text summary.
    Bench {
        #[command(flatten)]
        run: RunArgs,
        /// Number of consecutive seeds starting at --seed.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
    },
    /// Check a decomposition JSON file.
    Verify {
        file: PathBuf,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Host graph: edge list ("n N" header optional) or JSON {n, edges}.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Tree: parent array (-1 at the root) or JSON {n, edges}.
    #[arg(long)]
    tree: Option<PathBuf>,
    /// Generator: complete:N or gnp:N:P, optionally /MODEL[:EDGES] with
    /// MODEL one of uniform, path, star, caterpillar, paths.
    #[arg(long)]
    gen: Option<String>,
    #[arg(long)]
    seed: u64,
    /// pipeline, oracle or hybrid.
    #[arg(long, default_value = "pipeline")]
    mode: String,
    /// JSON object of parameter overrides, applied over the defaults.
    #[arg(long, env = "TREEPACK_CONFIG")]
    cfg: Option<PathBuf>,
    /// KEY=VALUE parameter override, applied last. Repeatable.
    #[arg(long = "set")]
    set: Vec<String>,
    /// Run even if the parameters break the hierarchy (reported as a warning).
    #[arg(long)]
    unchecked: bool,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// On a pipeline stop, try the exact oracle (same as --mode hybrid).
    #[arg(long)]
    fallback_exact: bool,
    /// Stage names to snapshot (start, high, intervals, a0, digraph, approx,
    /// exact) or "all". Repeatable.
    #[arg(long = "snapshot-at")]
    snapshot_at: Vec<String>,
    /// Metrics CSV path; defaults to OUT/metrics.csv.
    #[arg(long)]
    metrics: Option<PathBuf>,
}

impl RunArgs {
    fn spec(&self, seed: u64) -> Result<RunSpec> {
        let source = match (&self.graph, &self.tree, &self.gen) {
            (Some(g), Some(t), None) => Source::Files { graph: g.clone(), tree: t.clone() },
            (None, Some(t), Some(gs)) => {
                let g: GenSpec = gs.parse()?;
                if g.tree.is_some() {
                    return Err(Error::Input("--tree and a generated tree both given".into()));
                }
                Source::Mixed { host: g.host, tree: t.clone() }
            }
            (None, None, Some(gs)) => Source::Gen(gs.parse()?),
            _ => return Err(Error::Input("give --graph with --tree, or --gen (optionally with --tree)".into())),
        };
        let mut mode: Mode = self.mode.parse()?;
        if self.fallback_exact && mode == Mode::Pipeline {
            mode = Mode::Hybrid;
        }
        let overrides = self
            .set
            .iter()
            .map(|kv| {
                kv.split_once('=')
                    .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                    .ok_or_else(|| Error::Config(format!("--set wants KEY=VALUE, got {kv:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RunSpec {
            source,
            seed,
            mode,
            cfg_file: self.cfg.clone(),
            overrides,
            unchecked: self.unchecked,
            snapshot_at: self.snapshot_at.clone(),
        })
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.class().exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run(a) => {
            let spec = match a.spec(a.seed) {
                Ok(s) => s,
                Err(e) => return fail(&e),
            };
            let art = execute(&spec);
            if let Err(e) = art.write(&a.out, a.metrics.as_deref()) {
                return fail(&e);
            }
            let s = &art.summary;
            for w in &s.warnings {
                eprintln!("warning: {w}");
            }
            match &s.reason {
                None => println!(
                    "ok: case {}, solved by {}, written to {}",
                    s.case.as_deref().unwrap_or("-"),
                    s.solved_by.as_deref().unwrap_or("-"),
                    a.out.display()
                ),
                Some(r) => println!("stopped after {}: {r}", s.stage_reached),
            }
            ExitCode::from(art.exit_code() as u8)
        }
        Cmd::Bench { run, seeds } => {
            let specs: Result<Vec<RunSpec>> = (run.seed..run.seed + seeds).map(|s| run.spec(s)).collect();
            let specs = match specs {
                Ok(s) => s,
                Err(e) => return fail(&e),
            };
            let rep = bench(&specs);
            let write = || -> Result<()> {
                std::fs::create_dir_all(&run.out)?;
                std::fs::write(run.out.join("bench.csv"), rep.csv())?;
                std::fs::write(run.out.join("bench.txt"), rep.text())?;
                Ok(())
            };
            if let Err(e) = write() {
                return fail(&e);
            }
            print!("{}", rep.text());
            ExitCode::SUCCESS
        }
        Cmd::Verify { file } => {
            let d = std::fs::read_to_string(&file)
                .map_err(|e| Error::Input(format!("{}: {e}", file.display())))
                .and_then(|t| Decomposition::from_json(&t));
            match d {
                Err(e) => fail(&e),
                Ok(d) => match verify(&d) {
                    Ok(()) => {
                        println!("valid: {} copies of a {}-edge tree", d.copies.len(), d.tree.edge_count());
                        ExitCode::SUCCESS
                    }
                    Err(v) => {
                        println!("invalid: {v:?}");
                        ExitCode::from(ErrorClass::Infeasible.exit_code() as u8)
                    }
                },
            }
        }
    }
}
