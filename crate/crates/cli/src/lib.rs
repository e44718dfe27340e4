//! The `hyperteam` command line: argument parsing, parameter resolution,
//! run manifests and replay.

pub mod manifest;
pub mod output;
pub mod request;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hyperteam_core::csa::CsaParams;
use hyperteam_core::experiments::{ScalingMode, Scheme};
use hyperteam_core::greedy::GreedyParams;
use hyperteam_core::instance::Format;
use hyperteam_core::resilience::Selection;
use serde::Deserialize;

use manifest::RunManifest;
use request::{InputSpec, Method, Request};

/// Bad arguments discovered after parsing (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// 2 for usage errors (including invalid parameters reported by the
/// library), 1 for everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    let usage = err.chain().any(|e| {
        e.is::<UsageError>()
            || matches!(
                e.downcast_ref::<hyperteam_core::Error>(),
                Some(hyperteam_core::Error::InvalidParameter(_))
            )
    });
    if usage {
        2
    } else {
        1
    }
}

#[derive(Debug, Parser)]
#[command(name = "hyperteam", version, about = "Team assignment by hypergraph algebraic connectivity")]
pub struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for repetitions (defaults to all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Echo the primary CSV on stdout.
    #[arg(long, global = true)]
    pub stdout: bool,
    /// JSON file with optional `csa` and `greedy` parameter sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to `json` for `.json` files and `edgelist` otherwise.
    #[arg(long, value_parser = parse_format)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summary statistics of an instance.
    Stats(InputArgs),
    /// Laplacian spectrum and stationary distribution.
    Spectrum {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        allow_disconnected: bool,
        /// Also emit the spectrum of the bipartite walk.
        #[arg(long)]
        bipartite: bool,
    },
    /// Optimize an assignment.
    Optimize {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "csa")]
        method: Method,
        /// Independent CSA runs; the best is kept.
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        #[arg(long)]
        t_max: Option<usize>,
        #[arg(long)]
        pack_size: Option<u64>,
        /// Greedy energy packet size.
        #[arg(long)]
        packet: Option<u64>,
        #[arg(long)]
        random_threshold: Option<usize>,
    },
    /// Remove agents and patch the assignment.
    Attack {
        #[command(flatten)]
        input: InputArgs,
        /// Instance file whose assignment replaces the input's.
        #[arg(long)]
        assignment: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 10)]
        n_exp: usize,
        /// Remove the highest-degree agents instead of random ones.
        #[arg(long)]
        targeted: bool,
    },
    /// Structural experiments.
    #[command(subcommand)]
    Experiment(Experiment),
    /// Rerun a manifest and check that the CSV outputs are identical.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// All connected hypergraphs with n nodes and k hyperedges.
    Enumerate {
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Keep one hypergraph per isomorphism class.
        #[arg(long)]
        dedup: bool,
    },
    /// Finite-size scaling of rewired community structures.
    Scaling {
        #[arg(long, default_value_t = 30)]
        reps: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7,8")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', value_parser = parse_scheme,
              default_value = "one_node,one_edge,head2tail,random")]
        schemes: Vec<Scheme>,
        /// Hold community size at `NODES,EDGES` instead of tying it to the count.
        #[arg(long, value_parser = parse_fixed)]
        fixed: Option<(usize, usize)>,
    },
    /// Budget multipliers against sub-instance size.
    BudgetSweep {
        /// Base instance (defaults to a generated collaboration network).
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_parser = parse_format)]
        format: Option<Format>,
        #[arg(long, value_delimiter = ',', default_value = "1,3,5")]
        betas: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "4,6,8,12,16")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 1000)]
        random_threshold: usize,
    },
    /// Heat diffusion on an instance or on the enumerated representatives.
    Diffuse {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_parser = parse_format)]
        format: Option<Format>,
        #[arg(long, default_value_t = 400.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.05)]
        dt: f64,
        /// Consensus value (defaults to 1/N).
        #[arg(long)]
        target: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
    },
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    s.parse().map_err(|e: hyperteam_core::Error| e.to_string())
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    s.parse().map_err(|e: hyperteam_core::Error| e.to_string())
}

fn parse_fixed(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected NODES,EDGES")?;
    Ok((
        a.trim().parse().map_err(|e| format!("{e}"))?,
        b.trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    csa: Option<CsaParams>,
    #[serde(default)]
    greedy: Option<GreedyParams>,
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| UsageError(format!("config {}: {e}", path.display())).into())
}

fn input_spec(path: &Path, format: Option<Format>) -> Result<InputSpec> {
    let format = format.unwrap_or(if path.extension().is_some_and(|e| e == "json") {
        Format::Json
    } else {
        Format::EdgeList
    });
    let path = std::fs::canonicalize(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(InputSpec { path, format })
}

/// Turns parsed arguments into a fully resolved request. Precedence is
/// defaults, then the config file, then flags.
pub fn resolve(cli: &Cli) -> Result<Request> {
    let config = load_config(cli.config.as_deref())?;
    let seed = cli.seed.unwrap_or(0);
    let mut csa = config.csa.unwrap_or_default();
    let mut greedy = config.greedy.unwrap_or_default();
    if let Some(s) = cli.seed {
        csa.seed = s;
        greedy.seed = s;
    }
    Ok(match &cli.command {
        Command::Stats(i) => Request::Stats {
            input: input_spec(&i.input, i.format)?,
        },
        Command::Spectrum {
            input,
            allow_disconnected,
            bipartite,
        } => Request::Spectrum {
            input: input_spec(&input.input, input.format)?,
            allow_disconnected: *allow_disconnected,
            bipartite: *bipartite,
        },
        Command::Optimize {
            input,
            method,
            restarts,
            t_max,
            pack_size,
            packet,
            random_threshold,
        } => {
            if let Some(t) = t_max {
                csa.t_max = *t;
            }
            if let Some(p) = pack_size {
                csa.pack_size = *p;
            }
            if let Some(h) = packet {
                greedy.h = *h;
            }
            if let Some(r) = random_threshold {
                greedy.random_threshold = *r;
            }
            if *restarts == 0 {
                bail!(UsageError("--restarts must be at least 1".into()));
            }
            Request::Optimize {
                input: input_spec(&input.input, input.format)?,
                method: *method,
                csa,
                greedy,
                restarts: *restarts,
            }
        }
        Command::Attack {
            input,
            assignment,
            m,
            n_exp,
            targeted,
        } => Request::Attack {
            input: input_spec(&input.input, input.format)?,
            assignment: assignment.as_deref().map(|p| input_spec(p, None)).transpose()?,
            m: *m,
            n_exp: *n_exp,
            selection: if *targeted {
                Selection::TargetedDegree
            } else {
                Selection::Uniform
            },
            seed,
        },
        Command::Experiment(e) => match e {
            Experiment::Enumerate { n, k, dedup } => Request::Enumerate {
                n: *n,
                k: *k,
                dedup: *dedup,
            },
            Experiment::Scaling {
                reps,
                sizes,
                schemes,
                fixed,
            } => Request::Scaling {
                schemes: schemes.clone(),
                sizes: sizes.clone(),
                reps: *reps,
                mode: match fixed {
                    Some((nodes_per, edges_per)) => ScalingMode::Fixed {
                        nodes_per: *nodes_per,
                        edges_per: *edges_per,
                    },
                    None => ScalingMode::Coupled,
                },
                seed,
            },
            Experiment::BudgetSweep {
                input,
                format,
                betas,
                sizes,
                reps,
                random_threshold,
            } => {
                greedy.random_threshold = *random_threshold;
                Request::BudgetSweep {
                    input: input.as_deref().map(|p| input_spec(p, *format)).transpose()?,
                    betas: betas.clone(),
                    sizes: sizes.clone(),
                    reps: *reps,
                    seed,
                    greedy,
                }
            }
            Experiment::Diffuse {
                input,
                format,
                t_end,
                dt,
                target,
                eps,
            } => Request::Diffuse {
                input: input.as_deref().map(|p| input_spec(p, *format)).transpose()?,
                t_end: *t_end,
                dt: *dt,
                target: *target,
                eps: *eps,
            },
        },
        Command::Replay { .. } => unreachable!("replay is handled before resolution"),
    })
}

fn configure_jobs(jobs: Option<usize>) -> Result<()> {
    if let Some(j) = jobs {
        if j == 0 {
            bail!(UsageError("--jobs must be at least 1".into()));
        }
        // A second call in the same process fails harmlessly.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    Ok(())
}

fn emit(cli: &Cli, outputs: &output::Outputs, manifest: &RunManifest) -> Result<()> {
    for path in outputs.write_all(&cli.out)? {
        log::info!("wrote {}", path.display());
    }
    output::write_atomic(&cli.out.join(manifest::FILE_NAME), manifest.to_json().as_bytes())?;
    if cli.stdout {
        if let Some(csv) = outputs.primary_csv() {
            std::io::stdout().lock().write_all(csv)?;
        }
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    configure_jobs(cli.jobs)?;
    if let Command::Replay { manifest: path } = &cli.command {
        return replay(cli, path);
    }
    let request = resolve(cli)?;
    log::debug!("resolved request: {request:?}");
    let start = Instant::now();
    let outputs = request.execute()?;
    let manifest = RunManifest::new(&request, cli.jobs, &outputs, start.elapsed().as_secs_f64())?;
    emit(cli, &outputs, &manifest)
}

fn replay(cli: &Cli, path: &Path) -> Result<()> {
    let old = RunManifest::load(path)?;
    let changed = old.changed_inputs()?;
    if !changed.is_empty() {
        bail!("inputs changed since the manifest was written: {changed:?}");
    }
    configure_jobs(old.jobs)?;
    let start = Instant::now();
    let outputs = old.request.execute()?;
    let mismatched = old.csv_mismatches(&outputs);
    if !mismatched.is_empty() {
        bail!("replay produced different bytes for {mismatched:?}");
    }
    let fresh = RunManifest::new(&old.request, old.jobs, &outputs, start.elapsed().as_secs_f64())?;
    emit(cli, &outputs, &fresh)?;
    log::info!("replay of {} matched {} outputs", path.display(), old.outputs.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_classes() {
        assert_eq!(exit_code(&anyhow::Error::new(UsageError("x".into()))), 2);
        let core = anyhow::Error::new(hyperteam_core::Error::InvalidParameter("x".into())).context("while running");
        assert_eq!(exit_code(&core), 2);
        assert_eq!(exit_code(&anyhow::Error::new(hyperteam_core::Error::EmptyTask(0))), 1);
        assert_eq!(exit_code(&anyhow::anyhow!("boom")), 1);
    }

    #[test]
    fn fixed_sizes_parse() {
        assert_eq!(parse_fixed("6, 4"), Ok((6, 4)));
        assert!(parse_fixed("6").is_err());
        assert!(parse_fixed("a,4").is_err());
    }

    #[test]
    fn seed_flag_reaches_every_stream() {
        let cli = Cli::parse_from(["hyperteam", "--seed", "42", "experiment", "scaling", "--reps", "2"]);
        match resolve(&cli).unwrap() {
            Request::Scaling { seed, reps, sizes, mode, .. } => {
                assert_eq!((seed, reps), (42, 2));
                assert_eq!(sizes, (2..=8).collect::<Vec<_>>());
                assert_eq!(mode, ScalingMode::Coupled);
            }
            other => panic!("{other:?}"),
        }
    }
}
