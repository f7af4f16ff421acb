//! Human-readable solver configuration (TOML key/value format).
//!
//! Every field of the local and global solver options is covered; omitted
//! keys fall back to the published defaults (gradient tolerance 1e-6,
//! 10000 iterations, 50 runs, 15 non-improving perturbations, η_max 0.5).

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use rfxy::global_solvers::{BudgetMode, EtaConvention, GlobalOptions, LocalAlgorithm};
use rfxy::local_solvers::{BetaRule, SolverOptions};

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub local: LocalSection,
    #[serde(default)]
    pub global: GlobalSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalSection {
    pub grad_tol: f64,
    pub max_iters: usize,
    pub tr_initial_radius: Option<f64>,
    pub tr_max_radius: Option<f64>,
    pub tcg_kappa: f64,
    pub tcg_theta: f64,
    pub cg_beta_rule: String,
    pub armijo_constant: f64,
    pub backtracking_factor: f64,
    pub initial_step: f64,
    pub checked: bool,
}

impl Default for LocalSection {
    fn default() -> Self {
        let o = SolverOptions::<f64>::default();
        Self {
            grad_tol: o.grad_tol,
            max_iters: o.max_iters,
            tr_initial_radius: o.tr_initial_radius,
            tr_max_radius: o.tr_max_radius,
            tcg_kappa: o.tcg_kappa,
            tcg_theta: o.tcg_theta,
            cg_beta_rule: "restarted-polak-ribiere".into(),
            armijo_constant: o.armijo_constant,
            backtracking_factor: o.backtracking_factor,
            initial_step: o.initial_step,
            checked: o.checked,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GlobalSection {
    pub nr: usize,
    pub mni: usize,
    pub eta_max: f64,
    pub eta_convention: String,
    pub local_algorithm: String,
    pub budget_mode: String,
    pub threads: usize,
}

impl Default for GlobalSection {
    fn default() -> Self {
        let o = GlobalOptions::<f64>::default();
        Self {
            nr: o.nr,
            mni: o.mni,
            eta_max: o.eta_max,
            eta_convention: "std-dev".into(),
            local_algorithm: "rtr".into(),
            budget_mode: "mbh-native".into(),
            threads: o.threads,
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).context("parsing config")
    }

    pub fn solver_options(&self) -> Result<SolverOptions<f64>> {
        let l = &self.local;
        let cg_beta_rule = match l.cg_beta_rule.as_str() {
            "restarted-polak-ribiere" => BetaRule::RestartedPolakRibiere,
            other => anyhow::bail!("unknown cg_beta_rule {other}"),
        };
        Ok(SolverOptions {
            grad_tol: l.grad_tol,
            max_iters: l.max_iters,
            tr_initial_radius: l.tr_initial_radius,
            tr_max_radius: l.tr_max_radius,
            tcg_kappa: l.tcg_kappa,
            tcg_theta: l.tcg_theta,
            cg_beta_rule,
            armijo_constant: l.armijo_constant,
            backtracking_factor: l.backtracking_factor,
            initial_step: l.initial_step,
            checked: l.checked,
            record_trace: false,
        })
    }

    pub fn global_options(&self, master_seed: u64) -> Result<GlobalOptions<f64>> {
        let g = &self.global;
        let eta_convention = match g.eta_convention.as_str() {
            "std-dev" => EtaConvention::StdDev,
            "variance" => EtaConvention::Variance,
            other => anyhow::bail!("unknown eta_convention {other}"),
        };
        let local_algorithm = match g.local_algorithm.as_str() {
            "rtr" => LocalAlgorithm::Rtr,
            "rcg" => LocalAlgorithm::Rcg,
            other => anyhow::bail!("unknown local_algorithm {other}"),
        };
        let budget_mode = match g.budget_mode.as_str() {
            "mbh-native" => BudgetMode::MbhNative,
            "ms-matched" => BudgetMode::MsMatched,
            other => anyhow::bail!("unknown budget_mode {other}"),
        };
        Ok(GlobalOptions {
            nr: g.nr,
            mni: g.mni,
            eta_max: g.eta_max,
            eta_convention,
            local_algorithm,
            local_opts: self.solver_options()?,
            master_seed,
            budget_mode,
            threads: g.threads,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_published_protocol() {
        let cfg = FileConfig::default();
        assert_eq!(cfg.local.grad_tol, 1e-6);
        assert_eq!(cfg.local.max_iters, 10_000);
        assert_eq!(cfg.global.nr, 50);
        assert_eq!(cfg.global.mni, 15);
        assert_eq!(cfg.global.eta_max, 0.5);
        let opts = cfg.global_options(1).unwrap();
        assert_eq!(opts.local_opts.grad_tol, 1e-6);
    }

    #[test]
    fn partial_files_override_selected_keys() {
        let cfg = FileConfig::parse(
            "[global]\nnr = 5\nmni = 5\n\n[local]\ngrad_tol = 1e-8\n",
        )
        .unwrap();
        assert_eq!(cfg.global.nr, 5);
        assert_eq!(cfg.global.mni, 5);
        assert_eq!(cfg.local.grad_tol, 1e-8);
        assert_eq!(cfg.local.max_iters, 10_000);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(FileConfig::parse("[local]\ngradtol = 1.0\n").is_err());
        assert!(FileConfig::parse("[global]\neta_convention = \"weird\"\n")
            .unwrap()
            .global_options(0)
            .is_err());
    }
}
