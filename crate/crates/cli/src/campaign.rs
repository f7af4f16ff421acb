//! Campaign driver: instance generation/persistence, solver-matrix execution
//! (MBH vs fair-budget MultiStart, or per-run local-solver comparison), and
//! report emission as CSV plus JSON with identical numeric payloads.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use rfxy::certificates::optimality_gap;
use rfxy::global_solvers::{
    budget_report, mbh, multistart_matched, GlobalResult,
};
use rfxy::local_solvers::{rcg, rtr, SolveStatus, SolverOptions};
use rfxy::manifold::random_point_indexed;
use rfxy::model::Instance;

use crate::config::{FileConfig, GlobalSection, LocalSection};
use crate::instance_io;

/// Campaign description (TOML).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSpec {
    pub master_seed: u64,
    /// Output prefix; reports land at `<output>.csv` and `<output>.json`.
    pub output: PathBuf,
    /// `"global"` (MBH vs matched MultiStart) or `"compare-local"`
    /// (trust-region vs conjugate gradient, per-run minima lists).
    #[serde(default = "default_mode")]
    pub mode: String,
    /// Solvers of a global campaign; subset of `["mbh", "ms"]`.
    #[serde(default = "default_solvers")]
    pub solvers: Vec<String>,
    /// Local solves per solver and instance in compare-local mode.
    #[serde(default = "default_runs")]
    pub runs_per_solver: usize,
    #[serde(default)]
    pub local: LocalSection,
    #[serde(default)]
    pub global: GlobalSection,
    pub instances: Vec<InstanceSpec>,
}

fn default_mode() -> String {
    "global".into()
}
fn default_solvers() -> Vec<String> {
    vec!["mbh".into(), "ms".into()]
}
fn default_runs() -> usize {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub d: usize,
    pub l: usize,
    pub delta: f64,
    pub seed: u64,
    pub label: String,
}

impl CampaignSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading campaign {}", path.display()))?;
        let spec: Self = toml::from_str(&text).context("parsing campaign")?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.instances.is_empty() {
            bail!("campaign has no instances");
        }
        match self.mode.as_str() {
            "global" => {
                if self.solvers.is_empty() {
                    bail!("global campaign needs at least one solver");
                }
                for s in &self.solvers {
                    if s != "mbh" && s != "ms" {
                        bail!("unknown global solver {s}");
                    }
                }
            }
            "compare-local" => {
                if self.runs_per_solver == 0 {
                    bail!("compare-local needs runs_per_solver >= 1");
                }
            }
            other => bail!("unknown campaign mode {other}"),
        }
        Ok(())
    }

    fn config(&self) -> FileConfig {
        FileConfig {
            local: self.local.clone(),
            global: self.global.clone(),
        }
    }
}

/// One report line: an (instance, solver) cell of the campaign matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub delta: f64,
    pub field: String,
    pub solver: String,
    pub best_energy: f64,
    pub energy_per_site: f64,
    pub wall_seconds: f64,
    pub local_searches: usize,
    pub gap: f64,
    pub winner: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecordJson {
    pub run: usize,
    pub local_searches: usize,
    pub best_energy: f64,
    pub wall_seconds: f64,
    pub failed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunDetail {
    pub field: String,
    pub solver: String,
    pub records: Vec<RunRecordJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignReport {
    pub master_seed: u64,
    pub mode: String,
    pub rows: Vec<ReportRow>,
    pub runs: Vec<RunDetail>,
}

/// Ties within this absolute tolerance share the winner flag.
pub const WINNER_TIE_TOLERANCE: f64 = 1e-6;

/// Executes the campaign. Instance files are materialized under
/// `<output>_instances/` before any solver runs; in global mode MBH runs
/// first and its per-run budgets feed the matched MultiStart.
pub fn run_campaign(spec: &CampaignSpec) -> Result<CampaignReport> {
    spec.validate()?;
    let cfg = spec.config();

    // Materialize every instance file up front.
    let inst_dir = instance_dir(&spec.output);
    let mut instances = Vec::new();
    for is in &spec.instances {
        let path = inst_dir.join(format!(
            "d{}_L{}_delta{}_seed{}.rfxy",
            is.d, is.l, is.delta, is.seed
        ));
        let inst = instance_io::gen_instance(is.d, is.l, is.delta, is.seed, &path)?;
        instances.push((is.clone(), inst));
    }

    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for (is, inst) in &instances {
        match spec.mode.as_str() {
            "global" => run_global_cell(spec, &cfg, is, inst, &mut rows, &mut runs)?,
            "compare-local" => run_compare_cell(spec, &cfg, is, inst, &mut rows, &mut runs)?,
            _ => unreachable!("validated"),
        }
    }
    flag_winners(&mut rows);
    Ok(CampaignReport {
        master_seed: spec.master_seed,
        mode: spec.mode.clone(),
        rows,
        runs,
    })
}

pub fn instance_dir(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_os_string();
    s.push("_instances");
    s.into()
}

fn run_global_cell(
    spec: &CampaignSpec,
    cfg: &FileConfig,
    is: &InstanceSpec,
    inst: &Instance<f64>,
    rows: &mut Vec<ReportRow>,
    runs: &mut Vec<RunDetail>,
) -> Result<()> {
    let opts = cfg.global_options(spec.master_seed)?;
    let want_mbh = spec.solvers.iter().any(|s| s == "mbh");
    let want_ms = spec.solvers.iter().any(|s| s == "ms");

    let mbh_result = if want_mbh || want_ms {
        Some(mbh(inst, &opts)?)
    } else {
        None
    };

    if want_mbh {
        let r = mbh_result.as_ref().unwrap();
        push_global(rows, runs, is, inst, "mbh", r);
    }
    if want_ms {
        // Fair budget: consume exactly the per-run local-search counts of
        // the paired MBH result.
        let budgets = budget_report(mbh_result.as_ref().unwrap());
        let r = multistart_matched(inst, &opts, &budgets)?;
        push_global(rows, runs, is, inst, "ms", &r);
    }
    Ok(())
}

fn push_global(
    rows: &mut Vec<ReportRow>,
    runs: &mut Vec<RunDetail>,
    is: &InstanceSpec,
    inst: &Instance<f64>,
    solver: &str,
    r: &GlobalResult<f64>,
) {
    rows.push(ReportRow {
        d: is.d,
        l: is.l,
        delta: is.delta,
        field: is.label.clone(),
        solver: solver.into(),
        best_energy: r.best_energy,
        energy_per_site: r.best_energy / inst.n_sites() as f64,
        wall_seconds: r.total_wall_seconds,
        local_searches: r.total_local_searches,
        gap: r.gap.relative_gap,
        winner: false,
    });
    runs.push(RunDetail {
        field: is.label.clone(),
        solver: solver.into(),
        records: r
            .per_run_records
            .iter()
            .map(|rec| RunRecordJson {
                run: rec.run,
                local_searches: rec.local_searches,
                best_energy: rec.best_energy,
                wall_seconds: rec.wall_seconds,
                failed: rec.failed,
            })
            .collect(),
    });
}

fn run_compare_cell(
    spec: &CampaignSpec,
    cfg: &FileConfig,
    is: &InstanceSpec,
    inst: &Instance<f64>,
    rows: &mut Vec<ReportRow>,
    runs: &mut Vec<RunDetail>,
) -> Result<()> {
    let local_opts = cfg.solver_options()?;
    for solver in ["rtr", "rcg"] {
        let mut records = Vec::with_capacity(spec.runs_per_solver);
        let mut best = f64::INFINITY;
        let mut wall = 0.0;
        for run in 0..spec.runs_per_solver {
            // Both solvers share the per-run start, pairing the comparison.
            let x0 = random_point_indexed(inst.lattice(), spec.master_seed, run as u64);
            let result = match solver {
                "rtr" => rtr(inst, &x0, &local_opts),
                _ => rcg(inst, &x0, &local_opts),
            }?;
            let failed = result.status == SolveStatus::NumericalFailure;
            if !failed && result.energy < best {
                best = result.energy;
            }
            records.push(RunRecordJson {
                run,
                local_searches: 1,
                best_energy: result.energy,
                wall_seconds: result.wall_seconds,
                failed,
            });
            wall += result.wall_seconds;
        }
        rows.push(ReportRow {
            d: is.d,
            l: is.l,
            delta: is.delta,
            field: is.label.clone(),
            solver: solver.into(),
            best_energy: best,
            energy_per_site: best / inst.n_sites() as f64,
            wall_seconds: wall,
            local_searches: spec.runs_per_solver,
            gap: optimality_gap(inst, best).relative_gap,
            winner: false,
        });
        runs.push(RunDetail {
            field: is.label.clone(),
            solver: solver.into(),
            records,
        });
    }
    Ok(())
}

/// Flags the best solver per (d, L, Δ, field) group; values within the tie
/// tolerance of the minimum all count as winners.
pub fn flag_winners(rows: &mut [ReportRow]) {
    let mut groups: std::collections::BTreeMap<String, f64> = Default::default();
    for row in rows.iter() {
        let key = group_key(row);
        let best = groups.entry(key).or_insert(f64::INFINITY);
        if row.best_energy < *best {
            *best = row.best_energy;
        }
    }
    for row in rows.iter_mut() {
        let best = groups[&group_key(row)];
        row.winner = row.best_energy <= best + WINNER_TIE_TOLERANCE;
    }
}

fn group_key(row: &ReportRow) -> String {
    format!("{}|{}|{}|{}", row.d, row.l, row.delta, row.field)
}

/// CSV payload of the rows (stable column order, shortest-round-trip floats).
pub fn csv_string(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Writes `<prefix>.csv` and `<prefix>.json`; in compare-local mode also one
/// plain-text energy list per (instance, solver) for plotting.
pub fn write_reports(report: &CampaignReport, prefix: &Path) -> Result<()> {
    if let Some(dir) = prefix.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let csv_path = with_suffix(prefix, ".csv");
    std::fs::write(&csv_path, csv_string(&report.rows)?)?;
    let json_path = with_suffix(prefix, ".json");
    std::fs::write(&json_path, serde_json::to_string_pretty(report)?)?;

    if report.mode == "compare-local" {
        for detail in &report.runs {
            let mut text = String::new();
            for rec in &detail.records {
                writeln!(&mut text, "{}", rec.best_energy)?;
            }
            let path = with_suffix(prefix, &format!("_{}_{}.txt", detail.field, detail.solver));
            std::fs::write(path, text)?;
        }
    }
    Ok(())
}

pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    s.into()
}

/// Single-instance, single-solver entry point behind `solve`.
#[derive(Debug, Serialize)]
pub struct SolveOutcome {
    pub solver: String,
    pub best_energy: f64,
    pub energy_per_site: f64,
    pub grad_norm: Option<f64>,
    pub status: Option<String>,
    pub iterations: Option<usize>,
    pub local_searches: usize,
    pub wall_seconds: f64,
    pub gap: f64,
    pub lower_bound: f64,
}

pub fn solve_single(
    inst: &Instance<f64>,
    solver: &str,
    cfg: &FileConfig,
    master_seed: u64,
    budget: Option<usize>,
) -> Result<SolveOutcome> {
    let n = inst.n_sites() as f64;
    let opts = cfg.global_options(master_seed)?;
    match solver {
        "mbh" => {
            let r = mbh(inst, &opts)?;
            Ok(SolveOutcome {
                solver: solver.into(),
                best_energy: r.best_energy,
                energy_per_site: r.best_energy / n,
                grad_norm: None,
                status: None,
                iterations: None,
                local_searches: r.total_local_searches,
                wall_seconds: r.total_wall_seconds,
                gap: r.gap.relative_gap,
                lower_bound: inst.lower_bound(),
            })
        }
        "ms" => {
            // Explicit budget = that many independent solves; otherwise the
            // minimum schedule of an equally sized MBH (nr runs, mni+1 each).
            let budgets = match budget {
                Some(b) => vec![1; b.max(1)],
                None => vec![opts.mni + 1; opts.nr],
            };
            let r = multistart_matched(inst, &opts, &budgets)?;
            Ok(SolveOutcome {
                solver: solver.into(),
                best_energy: r.best_energy,
                energy_per_site: r.best_energy / n,
                grad_norm: None,
                status: None,
                iterations: None,
                local_searches: r.total_local_searches,
                wall_seconds: r.total_wall_seconds,
                gap: r.gap.relative_gap,
                lower_bound: inst.lower_bound(),
            })
        }
        "rtr" | "rcg" => {
            let local_opts: SolverOptions<f64> = cfg.solver_options()?;
            let x0 = random_point_indexed(inst.lattice(), master_seed, 0);
            let r = if solver == "rtr" {
                rtr(inst, &x0, &local_opts)?
            } else {
                rcg(inst, &x0, &local_opts)?
            };
            Ok(SolveOutcome {
                solver: solver.into(),
                best_energy: r.energy,
                energy_per_site: r.energy / n,
                grad_norm: Some(r.grad_norm),
                status: Some(format!("{:?}", r.status)),
                iterations: Some(r.iterations),
                local_searches: 1,
                wall_seconds: r.wall_seconds,
                gap: optimality_gap(inst, r.energy).relative_gap,
                lower_bound: inst.lower_bound(),
            })
        }
        other => bail!("unknown solver {other}"),
    }
}
