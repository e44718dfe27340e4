//! Fully resolved job descriptions. A request carries every parameter a
//! run depends on, so storing it in the manifest is enough to replay it.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use hyperteam_core::csa::{self, BipartiteObjective, CsaParams, HypergraphObjective, Objective};
use hyperteam_core::experiments::{self, ScalingMode, Scheme};
use hyperteam_core::greedy::{self, GreedyParams};
use hyperteam_core::instance::{self, Format};
use hyperteam_core::resilience::{self, Selection};
use hyperteam_core::spectral::{self, Connectivity, SpectralBundle};
use hyperteam_core::{bipartite, synthetic, ProblemInstance};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::output::Outputs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    pub path: PathBuf,
    pub format: Format,
}

impl InputSpec {
    pub fn load(&self) -> Result<ProblemInstance> {
        instance::load_instance(&self.path, self.format)
            .with_context(|| format!("loading {}", self.path.display()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Csa,
    CsaBipartite,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Request {
    Stats {
        input: InputSpec,
    },
    Spectrum {
        input: InputSpec,
        allow_disconnected: bool,
        bipartite: bool,
    },
    Optimize {
        input: InputSpec,
        method: Method,
        csa: CsaParams,
        greedy: GreedyParams,
        restarts: usize,
    },
    Attack {
        input: InputSpec,
        assignment: Option<InputSpec>,
        m: usize,
        n_exp: usize,
        selection: Selection,
        seed: u64,
    },
    Enumerate {
        n: usize,
        k: usize,
        dedup: bool,
    },
    Scaling {
        schemes: Vec<Scheme>,
        sizes: Vec<usize>,
        reps: usize,
        mode: ScalingMode,
        seed: u64,
    },
    BudgetSweep {
        input: Option<InputSpec>,
        betas: Vec<u64>,
        sizes: Vec<usize>,
        reps: usize,
        seed: u64,
        greedy: GreedyParams,
    },
    Diffuse {
        input: Option<InputSpec>,
        t_end: f64,
        dt: f64,
        target: Option<f64>,
        eps: f64,
    },
}

impl Request {
    pub fn name(&self) -> &'static str {
        match self {
            Request::Stats { .. } => "stats",
            Request::Spectrum { .. } => "spectrum",
            Request::Optimize { .. } => "optimize",
            Request::Attack { .. } => "attack",
            Request::Enumerate { .. } => "enumerate",
            Request::Scaling { .. } => "scaling",
            Request::BudgetSweep { .. } => "budget-sweep",
            Request::Diffuse { .. } => "diffuse",
        }
    }

    pub fn inputs(&self) -> Vec<&InputSpec> {
        match self {
            Request::Stats { input } | Request::Spectrum { input, .. } | Request::Optimize { input, .. } => {
                vec![input]
            }
            Request::Attack { input, assignment, .. } => std::iter::once(input).chain(assignment).collect(),
            Request::BudgetSweep { input, .. } | Request::Diffuse { input, .. } => input.iter().collect(),
            Request::Enumerate { .. } | Request::Scaling { .. } => Vec::new(),
        }
    }

    /// Master seed, when the command is randomized.
    pub fn seed(&self) -> Option<u64> {
        match self {
            Request::Optimize { method: Method::Greedy, greedy, .. } => Some(greedy.seed),
            Request::Optimize { csa, .. } => Some(csa.seed),
            Request::Attack { seed, .. } | Request::Scaling { seed, .. } | Request::BudgetSweep { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    pub fn execute(&self) -> Result<Outputs> {
        let mut out = Outputs::default();
        match self {
            Request::Stats { input } => {
                let inst = input.load()?;
                let name = input.path.file_stem().map_or("input".into(), |s| s.to_string_lossy().into_owned());
                let s = instance::summary_stats(&inst);
                out.add("stats.csv", format!("{}\n{}\n", instance::SummaryStats::CSV_HEADER, s.csv_row(&name)));
            }
            Request::Spectrum {
                input,
                allow_disconnected,
                bipartite: with_bipartite,
            } => {
                let inst = input.load()?;
                let mode = if *allow_disconnected {
                    Connectivity::AllowDisconnected
                } else {
                    Connectivity::Require
                };
                let b = SpectralBundle::from_instance(&inst, mode)?;
                out.add("spectrum.csv", spectral::spectrum_csv(&b.eigenvalues));
                let mut pi = String::from("index,id,pi\n");
                for (i, p) in b.pi.iter().enumerate() {
                    pi.push_str(&format!("{i},{},{p}\n", inst.agent_ids()[i]));
                }
                out.add("stationary.csv", pi);
                if *with_bipartite {
                    let ev = bipartite::bipartite_spectrum(inst.energies(), inst.assignment(), mode)?;
                    out.add("bipartite_spectrum.csv", spectral::spectrum_csv(&ev));
                }
            }
            Request::Optimize {
                input,
                method,
                csa: csa_params,
                greedy: greedy_params,
                restarts,
            } => {
                let inst = input.load()?;
                let before = spectral::active_mu2(inst.energies(), inst.assignment())?;
                let res = match method {
                    Method::Greedy => greedy::greedy_optimize(&inst, greedy_params)?,
                    Method::Csa | Method::CsaBipartite => {
                        let objective: &dyn Objective = match method {
                            Method::CsaBipartite => &BipartiteObjective,
                            _ => &HypergraphObjective,
                        };
                        csa::anneal_restarts(&inst, csa_params, objective, *restarts)?
                    }
                };
                let after = spectral::active_mu2(inst.energies(), &res.best_assignment)?;
                let gain = match (after, before) {
                    (Some(a), Some(b)) if b > 0.0 => Some(resilience::gain(a, b)?),
                    _ => None,
                };
                let optimized = inst.with_assignment(res.best_assignment.clone())?;
                let meta = json!({
                    "method": method,
                    "mu2_initial": before,
                    "mu2_final": after,
                    "gain": gain,
                    "feasible": res.feasible,
                    "iterations": res.iterations_run,
                    "seed": res.seed,
                });
                let fmt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
                out.add(
                    "summary.csv",
                    format!(
                        "method,mu2_initial,mu2_final,gain,feasible,iterations\n{},{},{},{},{},{}\n",
                        serde_json::to_value(method)?.as_str().unwrap_or_default(),
                        fmt(before),
                        fmt(after),
                        fmt(gain),
                        res.feasible,
                        res.iterations_run
                    ),
                );
                out.add("trace.csv", res.trace_csv());
                out.add("result.json", instance::to_json_string(&optimized, Some(meta)));
            }
            Request::Attack {
                input,
                assignment,
                m,
                n_exp,
                selection,
                seed,
            } => {
                let mut inst = input.load()?;
                if let Some(spec) = assignment {
                    let other = spec.load()?;
                    if other.agent_ids() != inst.agent_ids() || other.task_ids() != inst.task_ids() {
                        bail!("assignment file ids do not match the instance");
                    }
                    inst = inst.with_assignment(other.assignment().clone())?;
                }
                if *m >= inst.n_agents() {
                    return Err(crate::UsageError(format!("m = {m} must be below N = {}", inst.n_agents())).into());
                }
                let summary = resilience::attack_experiment(&inst, *m, *n_exp, *seed, *selection)?;
                out.add("experiment.csv", summary.runs_csv(&inst));
                out.add("summary.csv", summary.summary_csv());
            }
            Request::Enumerate { n, k, dedup } => {
                let items = experiments::enumerate_small(*n, *k, *dedup)?;
                out.add("enumeration.csv", experiments::enumeration_csv(&items));
            }
            Request::Scaling {
                schemes,
                sizes,
                reps,
                mode,
                seed,
            } => {
                let res = experiments::scaling_experiment(schemes, sizes, *reps, *mode, *seed)?;
                out.add("scaling_fits.csv", res.fits_csv());
                out.add("scaling_rows.csv", res.rows_csv());
            }
            Request::BudgetSweep {
                input,
                betas,
                sizes,
                reps,
                seed,
                greedy,
            } => {
                let base = match input {
                    Some(spec) => spec.load()?,
                    None => synthetic::sweep_base(*seed)?,
                };
                let sweep = experiments::budget_sweep(&base, betas, sizes, *reps, *seed, greedy)?;
                out.add("sweep_summary.csv", sweep.summary_csv());
                out.add("sweep_rows.csv", sweep.rows_csv());
                let mut slopes = String::from("beta,slope\n");
                for (b, s) in &sweep.slopes {
                    slopes.push_str(&format!("{b},{s}\n"));
                }
                out.add("sweep_slopes.csv", slopes);
            }
            Request::Diffuse {
                input,
                t_end,
                dt,
                target,
                eps,
            } => {
                if !(*dt > 0.0 && *t_end > 0.0) {
                    return Err(crate::UsageError("--t-end and --dt must be positive".into()).into());
                }
                let steps = (t_end / dt).round() as usize;
                let times: Vec<f64> = (0..=steps).map(|i| i as f64 * dt).collect();
                let selected = match input {
                    Some(spec) => {
                        let inst = spec.load()?;
                        vec![experiments::EnumeratedHypergraph {
                            edges: Vec::new(),
                            mu2: SpectralBundle::from_instance(&inst, Connectivity::Require)?.mu2(),
                            instance: inst,
                        }]
                    }
                    None => experiments::representatives(&experiments::enumerate_small(5, 3, false)?)?,
                };
                let mut consensus = String::from("rep,mu2,edges,consensus_time\n");
                let mut traj_csv = String::new();
                for (r, h) in selected.iter().enumerate() {
                    let n = h.instance.n_agents();
                    let mut x0 = vec![0.0; n];
                    x0[0] = 1.0;
                    let traj = &experiments::diffusion_comparison(std::slice::from_ref(h), &x0, &times)?[0];
                    let tgt = target.unwrap_or(1.0 / n as f64);
                    let ct = experiments::consensus_time(traj, tgt, *eps).map_or(String::new(), |t| t.to_string());
                    consensus.push_str(&format!("{r},{},{},{ct}\n", h.mu2, experiments::encode_edges(&h.edges)));
                    let body = traj.csv();
                    let mut lines = body.lines();
                    let header = lines.next().unwrap_or_default();
                    if r == 0 {
                        traj_csv.push_str(&format!("rep,{header}\n"));
                    }
                    for line in lines {
                        traj_csv.push_str(&format!("{r},{line}\n"));
                    }
                }
                out.add("consensus.csv", consensus);
                out.add("trajectories.csv", traj_csv);
            }
        }
        Ok(out)
    }
}
