//! Global minimization frameworks: MultiStart and Monotonic Basin Hopping,
//! with the Gaussian angular perturbation and fair-budget accounting.
//!
//! An MBH run draws one random start, solves locally, then repeatedly
//! perturbs the incumbent and re-solves, accepting only strict improvements
//! and stopping after `mni` consecutive non-improving attempts. `nr` such
//! runs are performed and the best result kept. MultiStart performs a given
//! number of independent local solves; in matched mode it consumes exactly
//! the per-run local-search counts of a prior MBH result, so the two
//! frameworks compare on equal budgets.
//!
//! The whole trajectory (starts, perturbations, acceptances) is a
//! deterministic function of `(instance, options, master_seed)`; outer runs
//! draw from independent streams, so they may execute in parallel without
//! changing any number.

use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::certificates::{optimality_gap, OptimalityGap};
use crate::error::{Error, Result};
use crate::local_solvers::{LocalResult, LocalSolve, Rcg, Rtr, SolveStatus, SolverOptions};
use crate::manifold::random_point_rng;
use crate::model::Instance;
use crate::rng::{substream, Purpose};
use crate::scalar::{wrap_angle, Real};
use crate::spin::{AngularConfig, CartesianConfig};

/// Interpretation of `eta_max` in the perturbation `η_i ~ N(0, η_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EtaConvention {
    /// `eta_max` is the standard deviation of the Gaussian draw.
    #[default]
    StdDev,
    /// `eta_max` is the variance of the Gaussian draw.
    Variance,
}

/// Which local solver the frameworks embed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocalAlgorithm {
    #[default]
    Rtr,
    Rcg,
}

/// How a MultiStart budget is chosen in campaigns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BudgetMode {
    /// MBH runs on its own schedule.
    #[default]
    MbhNative,
    /// MultiStart consumes the per-run budgets of a paired MBH result.
    MsMatched,
}

#[derive(Debug, Clone)]
pub struct GlobalOptions<T> {
    /// Number of outer runs.
    pub nr: usize,
    /// Maximum consecutive non-improving perturbations per run.
    pub mni: usize,
    /// Scale of the Gaussian angular perturbation.
    pub eta_max: T,
    pub eta_convention: EtaConvention,
    pub local_algorithm: LocalAlgorithm,
    pub local_opts: SolverOptions<T>,
    pub master_seed: u64,
    pub budget_mode: BudgetMode,
    /// Worker threads for outer runs: 0 = library default, 1 = serial.
    pub threads: usize,
}

impl<T: Real> Default for GlobalOptions<T> {
    fn default() -> Self {
        Self {
            nr: 50,
            mni: 15,
            eta_max: T::from64(0.5),
            eta_convention: EtaConvention::StdDev,
            local_algorithm: LocalAlgorithm::Rtr,
            local_opts: SolverOptions::default(),
            master_seed: 0,
            budget_mode: BudgetMode::MbhNative,
            threads: 0,
        }
    }
}

impl<T: Real> GlobalOptions<T> {
    fn validate(&self) -> Result<()> {
        if self.nr < 1 {
            return Err(Error::param("nr", "must be at least 1"));
        }
        if self.mni < 1 {
            return Err(Error::param("mni", "must be at least 1"));
        }
        if !(self.eta_max > T::zero()) {
            return Err(Error::param("eta_max", "must be positive"));
        }
        Ok(())
    }

    fn solver(&self) -> &'static dyn LocalSolve<T> {
        match self.local_algorithm {
            LocalAlgorithm::Rtr => &Rtr,
            LocalAlgorithm::Rcg => &Rcg,
        }
    }
}

/// Per-run accounting of a global solve.
#[derive(Debug, Clone)]
pub struct RunRecord<T> {
    pub run: usize,
    pub local_searches: usize,
    pub best_energy: T,
    pub wall_seconds: f64,
    /// True when no local search of the run produced a finite energy.
    pub failed: bool,
}

#[derive(Debug, Clone)]
pub struct GlobalResult<T> {
    pub best_config: CartesianConfig<T>,
    pub best_energy: T,
    pub per_run_records: Vec<RunRecord<T>>,
    pub total_local_searches: usize,
    pub total_wall_seconds: f64,
    /// Gap of the best energy against the analytic lower bound.
    pub gap: OptimalityGap<T>,
}

/// Shifts every angle by an independent Gaussian draw and wraps the result
/// into `[0, 2π)`. `eta_max` is the standard deviation.
pub fn perturb<T: Real>(
    theta: &AngularConfig<T>,
    eta_max: T,
    rng: &mut impl Rng,
) -> AngularConfig<T> {
    perturb_with(theta, eta_max, EtaConvention::StdDev, rng)
}

/// [`perturb`] with an explicit convention for `eta_max`.
pub fn perturb_with<T: Real>(
    theta: &AngularConfig<T>,
    eta_max: T,
    convention: EtaConvention,
    rng: &mut impl Rng,
) -> AngularConfig<T> {
    let sd = match convention {
        EtaConvention::StdDev => eta_max.to64(),
        EtaConvention::Variance => eta_max.to64().sqrt(),
    };
    let angles = theta
        .as_slice()
        .iter()
        .map(|&a| {
            let eta: f64 = StandardNormal.sample(rng);
            wrap_angle(a + T::from64(eta * sd))
        })
        .collect();
    AngularConfig::new(angles)
}

/// Monotonic Basin Hopping with the configured local solver.
pub fn mbh<T: Real>(inst: &Instance<T>, opts: &GlobalOptions<T>) -> Result<GlobalResult<T>> {
    mbh_with(inst, opts, opts.solver())
}

/// Monotonic Basin Hopping with an injected local solver.
///
/// Per outer run: draw a random start, solve locally, then loop
/// {perturb the incumbent, solve locally, accept strictly better results,
/// reset the failure counter on improvement} until `mni` consecutive
/// failures. Failed local solves count against the budget.
pub fn mbh_with<T: Real, L: LocalSolve<T> + ?Sized>(
    inst: &Instance<T>,
    opts: &GlobalOptions<T>,
    local: &L,
) -> Result<GlobalResult<T>> {
    opts.validate()?;
    let clock = Instant::now();
    let outcomes = run_parallel(opts.threads, opts.nr, |run| mbh_run(inst, opts, local, run));
    collect(inst, outcomes, clock)
}

struct RunOutcome<T> {
    record: RunRecord<T>,
    config: Option<CartesianConfig<T>>,
}

fn solve_attempt<T: Real, L: LocalSolve<T> + ?Sized>(
    inst: &Instance<T>,
    opts: &SolverOptions<T>,
    local: &L,
    x0: &CartesianConfig<T>,
) -> Option<LocalResult<T>> {
    match local.solve(inst, x0, opts) {
        Ok(r) if r.status != SolveStatus::NumericalFailure && r.energy.is_finite() => Some(r),
        _ => None,
    }
}

fn mbh_run<T: Real, L: LocalSolve<T> + ?Sized>(
    inst: &Instance<T>,
    opts: &GlobalOptions<T>,
    local: &L,
    run: usize,
) -> RunOutcome<T> {
    let clock = Instant::now();
    let mut start_rng = substream(opts.master_seed, Purpose::MbhStart, run as u64, 0);
    let mut perturb_rng = substream(opts.master_seed, Purpose::MbhPerturb, run as u64, 0);

    let x0 = random_point_rng::<T>(inst.lattice(), &mut start_rng);
    let mut searches = 1usize;
    let mut incumbent = match solve_attempt(inst, &opts.local_opts, local, &x0) {
        Some(r) => (r.config, r.energy),
        None => (x0, T::infinity()),
    };

    let mut k = 0usize;
    while k < opts.mni {
        let theta = incumbent.0.to_angles();
        let perturbed = perturb_with(&theta, opts.eta_max, opts.eta_convention, &mut perturb_rng);
        let y0 = perturbed.to_cartesian();
        searches += 1;
        let energy = match solve_attempt(inst, &opts.local_opts, local, &y0) {
            Some(r) => {
                let e = r.energy;
                if e < incumbent.1 {
                    incumbent = (r.config, e);
                    k = 0;
                    continue;
                }
                e
            }
            None => T::infinity(),
        };
        let _ = energy;
        k += 1;
    }

    let failed = !incumbent.1.is_finite();
    RunOutcome {
        record: RunRecord {
            run,
            local_searches: searches,
            best_energy: incumbent.1,
            wall_seconds: clock.elapsed().as_secs_f64(),
            failed,
        },
        config: (!failed).then_some(incumbent.0),
    }
}

/// MultiStart with a flat budget: exactly `budget` independent local solves
/// from fresh random starts, best kept.
pub fn multistart<T: Real>(
    inst: &Instance<T>,
    opts: &GlobalOptions<T>,
    budget: usize,
) -> Result<GlobalResult<T>> {
    if budget < 1 {
        return Err(Error::param("budget", "must be at least 1"));
    }
    multistart_matched(inst, opts, &vec![1; budget])
}

/// MultiStart mirroring per-run budgets (one entry per outer run, each the
/// number of local searches that run may spend).
pub fn multistart_matched<T: Real>(
    inst: &Instance<T>,
    opts: &GlobalOptions<T>,
    per_run_budgets: &[usize],
) -> Result<GlobalResult<T>> {
    multistart_matched_with(inst, opts, per_run_budgets, opts.solver())
}

pub fn multistart_matched_with<T: Real, L: LocalSolve<T> + ?Sized>(
    inst: &Instance<T>,
    opts: &GlobalOptions<T>,
    per_run_budgets: &[usize],
    local: &L,
) -> Result<GlobalResult<T>> {
    opts.validate()?;
    if per_run_budgets.is_empty() || per_run_budgets.iter().any(|&b| b < 1) {
        return Err(Error::param(
            "per_run_budgets",
            "need at least one run with a positive budget",
        ));
    }
    let clock = Instant::now();
    let outcomes = run_parallel(opts.threads, per_run_budgets.len(), |run| {
        ms_run(inst, opts, local, run, per_run_budgets[run])
    });
    collect(inst, outcomes, clock)
}

fn ms_run<T: Real, L: LocalSolve<T> + ?Sized>(
    inst: &Instance<T>,
    opts: &GlobalOptions<T>,
    local: &L,
    run: usize,
    budget: usize,
) -> RunOutcome<T> {
    let clock = Instant::now();
    let mut best: Option<(CartesianConfig<T>, T)> = None;
    for attempt in 0..budget {
        let mut rng = substream(opts.master_seed, Purpose::MsStart, run as u64, attempt as u64);
        let x0 = random_point_rng::<T>(inst.lattice(), &mut rng);
        if let Some(r) = solve_attempt(inst, &opts.local_opts, local, &x0) {
            if best.as_ref().is_none_or(|(_, e)| r.energy < *e) {
                best = Some((r.config, r.energy));
            }
        }
    }
    match best {
        Some((config, energy)) => RunOutcome {
            record: RunRecord {
                run,
                local_searches: budget,
                best_energy: energy,
                wall_seconds: clock.elapsed().as_secs_f64(),
                failed: false,
            },
            config: Some(config),
        },
        None => RunOutcome {
            record: RunRecord {
                run,
                local_searches: budget,
                best_energy: T::infinity(),
                wall_seconds: clock.elapsed().as_secs_f64(),
                failed: true,
            },
            config: None,
        },
    }
}

/// Per-run local-search counts of a global result, for budget matching.
pub fn budget_report<T: Real>(result: &GlobalResult<T>) -> Vec<usize> {
    result
        .per_run_records
        .iter()
        .map(|r| r.local_searches)
        .collect()
}

fn run_parallel<T: Real, F>(threads: usize, n_runs: usize, job: F) -> Vec<RunOutcome<T>>
where
    F: Fn(usize) -> RunOutcome<T> + Sync,
{
    if threads == 1 || n_runs == 1 {
        return (0..n_runs).map(job).collect();
    }
    let work = || {
        use rayon::prelude::*;
        (0..n_runs).into_par_iter().map(&job).collect()
    };
    if threads == 0 {
        work()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(work),
            Err(_) => (0..n_runs).map(job).collect(),
        }
    }
}

fn collect<T: Real>(
    inst: &Instance<T>,
    outcomes: Vec<RunOutcome<T>>,
    clock: Instant,
) -> Result<GlobalResult<T>> {
    let mut best: Option<(CartesianConfig<T>, T)> = None;
    let mut per_run_records = Vec::with_capacity(outcomes.len());
    let mut total = 0usize;
    for outcome in outcomes {
        total += outcome.record.local_searches;
        if let Some(config) = outcome.config {
            let e = outcome.record.best_energy;
            if best.as_ref().is_none_or(|(_, b)| e < *b) {
                best = Some((config, e));
            }
        }
        per_run_records.push(outcome.record);
    }
    let (best_config, best_energy) = best.ok_or_else(|| {
        Error::NumericalFailure("every run failed to produce a finite energy".into())
    })?;
    Ok(GlobalResult {
        gap: optimality_gap(inst, best_energy),
        best_config,
        best_energy,
        per_run_records,
        total_local_searches: total,
        total_wall_seconds: clock.elapsed().as_secs_f64(),
    })
}
