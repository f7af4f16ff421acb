//! `rfxy`: ground-state search for the random-field XY model.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use rfxy::lattice::Lattice;
use rfxy::local_solvers::SolverOptions;
use rfxy::model::Instance;
use rfxy::oracle::{brute_force_grid, refine_from_grid, GridSpec};

use rfxy_cli::campaign::{self, CampaignSpec};
use rfxy_cli::config::FileConfig;
use rfxy_cli::{bench, instance_io};

#[derive(Parser)]
#[command(name = "rfxy", version, about = "Random-field XY model ground states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonSolverArgs {
    /// Solver configuration file (TOML); defaults cover the standard
    /// protocol.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for starts and perturbations.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for outer runs (0 = all cores, 1 = serial).
    /// Overrides the RFXY_THREADS environment variable.
    #[arg(long)]
    threads: Option<usize>,
    /// Re-validate manifold feasibility at every solver iterate.
    #[arg(long)]
    checked: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a disorder instance file (plus JSON sidecar).
    Gen {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one solver on one instance file.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// One of: mbh, ms, rtr, rcg.
        #[arg(long)]
        solver: String,
        /// Local-search budget for ms (defaults to nr×(mni+1)).
        #[arg(long)]
        budget: Option<usize>,
        /// Write the result as JSON here (otherwise print a summary).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonSolverArgs,
    },
    /// Run a campaign file: a matrix of instances and solvers.
    Campaign {
        #[arg(long)]
        file: PathBuf,
        #[command(flatten)]
        common: CommonSolverArgs,
    },
    /// Time the evaluation kernels in both formulations.
    Bench {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 32)]
        l: usize,
        #[arg(long, default_value_t = 2.0)]
        delta: f64,
        #[arg(long, default_value_t = 300)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write the rows as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the local solvers over repeated random starts
    /// (per-run minima lists suitable for scatter plots).
    CompareLocal {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 200)]
        runs: usize,
        /// Output prefix for the CSV/JSON/energy-list files.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: CommonSolverArgs,
    },
    /// Exhaustive grid search on a tiny instance (oracle targets).
    #[command(hide = true)]
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        /// Angular grid resolution per site.
        #[arg(long)]
        k: usize,
        /// Enumeration-size cap.
        #[arg(long, default_value_t = GridSpec::DEFAULT_CAP)]
        cap: f64,
        /// Also polish the grid minimum with the trust-region solver.
        #[arg(long)]
        refine: bool,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen { d, l, delta, seed, out } => {
            let inst = instance_io::gen_instance(d, l, delta, seed, &out)?;
            println!(
                "wrote {} ({} sites, delta {}, seed {})",
                out.display(),
                inst.n_sites(),
                inst.delta(),
                inst.disorder_seed()
            );
        }
        Command::Solve {
            instance,
            solver,
            budget,
            out,
            common,
        } => {
            let inst = instance_io::read_instance(&instance)?;
            let cfg = load_config(&common)?;
            let outcome = campaign::solve_single(&inst, &solver, &cfg, common.seed, budget)?;
            let json = serde_json::to_string_pretty(&outcome)?;
            match out {
                Some(path) => {
                    std::fs::write(&path, json)?;
                    println!("wrote {}", path.display());
                }
                None => println!("{json}"),
            }
            println!(
                "{}: best energy {} ({} per site), lower bound {}, gap {:.4e}",
                outcome.solver,
                outcome.best_energy,
                outcome.energy_per_site,
                outcome.lower_bound,
                outcome.gap
            );
        }
        Command::Campaign { file, common } => {
            let mut spec = CampaignSpec::load(&file)?;
            spec.master_seed = if common.seed != 0 { common.seed } else { spec.master_seed };
            apply_common_to_spec(&mut spec, &common);
            let report = campaign::run_campaign(&spec)?;
            campaign::write_reports(&report, &spec.output)?;
            println!(
                "campaign done: {} rows -> {}.csv / .json",
                report.rows.len(),
                spec.output.display()
            );
            for row in &report.rows {
                println!(
                    "L={} delta={} field={} {:>4}: best {} ({} searches, {:.2}s){}",
                    row.l,
                    row.delta,
                    row.field,
                    row.solver,
                    row.best_energy,
                    row.local_searches,
                    row.wall_seconds,
                    if row.winner { "  <- best" } else { "" }
                );
            }
        }
        Command::Bench { d, l, delta, reps, seed, out } => {
            let inst = Instance::generate(Lattice::new(d, l)?, delta, seed)?;
            let rows = bench::bench_kernels(&inst, reps)?;
            print!("{}", bench::render_table(&rows));
            if let Some(path) = out {
                std::fs::write(&path, bench::to_csv(&rows)?)?;
                println!("wrote {}", path.display());
            }
        }
        Command::CompareLocal {
            instance,
            runs,
            out,
            common,
        } => {
            let inst = instance_io::read_instance(&instance)?;
            let cfg = load_config(&common)?;
            let spec = CampaignSpec {
                master_seed: common.seed,
                output: out.clone(),
                mode: "compare-local".into(),
                solvers: vec![],
                runs_per_solver: runs,
                local: cfg.local.clone(),
                global: cfg.global.clone(),
                instances: vec![campaign::InstanceSpec {
                    d: inst.dim(),
                    l: inst.lattice().linear_size(),
                    delta: inst.delta(),
                    seed: inst.disorder_seed(),
                    label: instance
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| "instance".into()),
                }],
            };
            let report = campaign::run_campaign(&spec)?;
            campaign::write_reports(&report, &out)?;
            for row in &report.rows {
                println!(
                    "{}: best {} over {} runs, total {:.2}s",
                    row.solver, row.best_energy, row.local_searches, row.wall_seconds
                );
            }
        }
        Command::Oracle {
            instance,
            k,
            cap,
            refine,
        } => {
            let inst = instance_io::read_instance(&instance)?;
            let gm = brute_force_grid(&inst, &GridSpec::with_cap(k, cap))?;
            println!("grid minimum (k={k}): {}", gm.energy);
            if refine {
                let refined = refine_from_grid(&inst, &gm.config, &SolverOptions::default())?;
                println!(
                    "refined: {} (grad norm {:.2e}, {:?})",
                    refined.energy, refined.grad_norm, refined.status
                );
            }
            println!("lower bound: {}", inst.lower_bound());
        }
    }
    Ok(())
}

fn load_config(common: &CommonSolverArgs) -> Result<FileConfig> {
    let mut cfg = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    if let Some(threads) = effective_threads(common) {
        cfg.global.threads = threads;
    }
    if common.checked {
        cfg.local.checked = true;
    }
    Ok(cfg)
}

fn effective_threads(common: &CommonSolverArgs) -> Option<usize> {
    if let Some(t) = common.threads {
        return Some(t);
    }
    std::env::var("RFXY_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
}

fn apply_common_to_spec(spec: &mut CampaignSpec, common: &CommonSolverArgs) {
    if let Some(threads) = effective_threads(common) {
        spec.global.threads = threads;
    }
    if common.checked {
        spec.local.checked = true;
    }
    if let Some(path) = &common.config {
        // Campaign files embed their own sections; an explicit --config
        // replaces both wholesale.
        if let Ok(cfg) = FileConfig::load(path) {
            spec.local = cfg.local;
            spec.global = cfg.global;
        }
    }
}
