//! ε-global-minimizer machinery: disorder-strength thresholds, optimality-gap
//! computation, and certificate checking.
//!
//! For a target gap `ε ∈ (0, 2)`, the thresholds are
//! `Δ_ε^(1) = d·ε/(2-ε)` and `Δ_ε^(2) = d·(2-ε)/ε`. Below the first, the
//! constant-angle configuration is an ε-global minimizer with gap bound
//! `2Δ/(d+Δ)`; above the second, the field-aligned configuration certifies
//! with gap bound `2d/(d+Δ)`. In between, the computable gap against the
//! analytic lower bound is reported instead.

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::scalar::Real;

/// Which disorder regime a certificate applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertRegime {
    BelowDelta1,
    AboveDelta2,
    Uncertified,
}

/// Which reference configuration the certificate is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertifiedConfig {
    /// Constant-angle configuration (coupling-term minimizer).
    Aligned,
    /// Field-aligned configuration (disorder-term minimizer).
    FieldAligned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsCertificate<T> {
    pub epsilon: T,
    pub delta: T,
    pub regime: CertRegime,
    pub delta1: T,
    pub delta2: T,
    pub certified_config: Option<CertifiedConfig>,
    /// Upper bound on `(f(θ) - f_min)/|f_min|` for the certified
    /// configuration, or the computable gap of the best reference when
    /// uncertified.
    pub gap_bound: T,
}

/// `(Δ_ε^(1), Δ_ε^(2))` for dimension `d`. Their product is `d²`.
pub fn epsilon_thresholds<T: Real>(d: usize, epsilon: T) -> Result<(T, T)> {
    if !(epsilon > T::zero() && epsilon < T::from64(2.0)) {
        return Err(Error::param(
            "epsilon",
            format!("must lie in (0, 2), got {epsilon}"),
        ));
    }
    let d = T::from_count(d);
    let two = T::from64(2.0);
    Ok((d * epsilon / (two - epsilon), d * (two - epsilon) / epsilon))
}

/// Certifies an instance at gap target `epsilon`.
///
/// Regime membership uses the open intervals: `Δ` exactly at a threshold is
/// reported as uncertified.
pub fn certify<T: Real>(inst: &Instance<T>, epsilon: T) -> Result<EpsCertificate<T>> {
    let d = inst.dim();
    let (delta1, delta2) = epsilon_thresholds(d, epsilon)?;
    let delta = inst.delta();
    let df = T::from_count(d);
    let two = T::from64(2.0);

    let (regime, certified_config, gap_bound) = if delta < delta1 {
        (
            CertRegime::BelowDelta1,
            Some(CertifiedConfig::Aligned),
            two * delta / (df + delta),
        )
    } else if delta > delta2 {
        (
            CertRegime::AboveDelta2,
            Some(CertifiedConfig::FieldAligned),
            two * df / (df + delta),
        )
    } else {
        let refs = inst.reference_configs()?;
        (
            CertRegime::Uncertified,
            None,
            relative_gap(inst.lower_bound(), refs.upper_bound),
        )
    };

    Ok(EpsCertificate {
        epsilon,
        delta,
        regime,
        delta1,
        delta2,
        certified_config,
        gap_bound,
    })
}

/// Always-available report: how far an achieved energy can be from the global
/// minimum, measured against the analytic lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalityGap<T> {
    pub lower_bound: T,
    pub best_energy: T,
    /// `(best_energy - f_low)/|f_low|` — an upper bound on the true gap.
    pub relative_gap: T,
}

pub fn optimality_gap<T: Real>(inst: &Instance<T>, best_energy: T) -> OptimalityGap<T> {
    let lower_bound = inst.lower_bound();
    OptimalityGap {
        lower_bound,
        best_energy,
        relative_gap: relative_gap(lower_bound, best_energy),
    }
}

fn relative_gap<T: Real>(lower: T, upper: T) -> T {
    (upper - lower) / lower.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;

    fn instance(delta: f64, seed: u64) -> Instance<f64> {
        Instance::generate(Lattice::new(3, 4).unwrap(), delta, seed).unwrap()
    }

    #[test]
    fn threshold_values() {
        let (d1, d2) = epsilon_thresholds::<f64>(3, 0.1).unwrap();
        assert!((d1 - 3.0 * 0.1 / 1.9).abs() <= 1e-15);
        assert!((d2 - 57.0).abs() <= 1e-12);

        let (d1, d2) = epsilon_thresholds::<f64>(3, 1.0).unwrap();
        assert_eq!((d1, d2), (3.0, 3.0));
    }

    #[test]
    fn threshold_product_is_d_squared() {
        for k in 1..40 {
            let eps = 0.05 * k as f64;
            if eps >= 2.0 {
                break;
            }
            let (d1, d2) = epsilon_thresholds::<f64>(3, eps).unwrap();
            assert!((d1 * d2 - 9.0).abs() <= 1e-9, "eps={eps}");
            if eps < 1.0 {
                assert!(d1 < 3.0 && 3.0 < d2);
            }
        }
    }

    #[test]
    fn rejects_epsilon_outside_range() {
        assert!(epsilon_thresholds::<f64>(3, 0.0).is_err());
        assert!(epsilon_thresholds::<f64>(3, 2.0).is_err());
        assert!(epsilon_thresholds::<f64>(3, -0.3).is_err());
    }

    #[test]
    fn certify_picks_the_right_regime() {
        let below = certify(&instance(0.05, 1), 0.1).unwrap();
        assert_eq!(below.regime, CertRegime::BelowDelta1);
        assert_eq!(below.certified_config, Some(CertifiedConfig::Aligned));
        assert!((below.gap_bound - 0.1 / 3.05).abs() <= 1e-15);
        assert!(below.gap_bound < 0.1);

        let above = certify(&instance(60.0, 1), 0.1).unwrap();
        assert_eq!(above.regime, CertRegime::AboveDelta2);
        assert_eq!(above.certified_config, Some(CertifiedConfig::FieldAligned));
        assert!((above.gap_bound - 6.0 / 63.0).abs() <= 1e-15);
        assert!(above.gap_bound < 0.1);

        let mid = certify(&instance(2.5, 1), 0.1).unwrap();
        assert_eq!(mid.regime, CertRegime::Uncertified);
        assert_eq!(mid.certified_config, None);
        assert!(mid.gap_bound >= 0.0);
    }

    /// The certified reference configuration beats ε even against the looser
    /// lower-bound yardstick.
    #[test]
    fn certified_gaps_hold_numerically() {
        for seed in [1, 2, 3] {
            let inst = instance(0.05, seed);
            let refs = inst.reference_configs().unwrap();
            let gap =
                (refs.energy_aligned - inst.lower_bound()) / inst.lower_bound().abs();
            assert!(gap < 0.1, "below regime: gap {gap}");

            let inst = instance(60.0, seed);
            let refs = inst.reference_configs().unwrap();
            let gap =
                (refs.energy_field_aligned - inst.lower_bound()) / inst.lower_bound().abs();
            assert!(gap < 0.1, "above regime: gap {gap}");
        }
    }

    #[test]
    fn gap_bound_monotonicity_in_delta() {
        let mut last_below = 0.0;
        for k in 1..=10 {
            let delta = 0.01 * k as f64;
            let c = certify(&instance(delta, 1), 0.1).unwrap();
            assert_eq!(c.regime, CertRegime::BelowDelta1);
            assert!(c.gap_bound > last_below);
            last_below = c.gap_bound;
        }
        let mut last_above = f64::INFINITY;
        for k in 1..=10 {
            let delta = 58.0 + k as f64;
            let c = certify(&instance(delta, 1), 0.1).unwrap();
            assert_eq!(c.regime, CertRegime::AboveDelta2);
            assert!(c.gap_bound < last_above);
            last_above = c.gap_bound;
        }
    }

    #[test]
    fn optimality_gap_reports_nonnegative_gap_for_feasible_energies() {
        let inst = instance(2.0, 4);
        let refs = inst.reference_configs().unwrap();
        let gap = optimality_gap(&inst, refs.upper_bound);
        assert!(gap.relative_gap >= 0.0);
        assert_eq!(gap.lower_bound, inst.lower_bound());
    }
}
