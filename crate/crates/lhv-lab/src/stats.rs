//! Estimators and closed-form references.
//!
//! Post-selection is always an explicit filter: Bell analyses condition on
//! both-click records, Franson analyses on same-slot records. The
//! 4/η − 2 bound on the post-selected CHSH value is a standard
//! detection-loophole result from the literature, included here to connect
//! the 2/3 efficiency of the erasure models with the ≈82.8% threshold.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::franson::FransonRecord;
use crate::geometry::relative_angle;
use crate::models::{Pattern, TrialRecord};
use crate::{Error, Result};

/// Empirical click-pattern fractions over all emitted pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatesSummary {
    pub f_cc: f64,
    pub f_a_only: f64,
    pub f_b_only: f64,
    pub f_none: f64,
}

impl RatesSummary {
    /// Ratio of single-side detections to coincidences; 1 for the injected
    /// erasure models.
    pub fn singles_to_coincidence_ratio(&self) -> Result<f64> {
        if self.f_cc <= 0.0 {
            return Err(Error::EmptySample("no coincidences in rates".into()));
        }
        Ok((self.f_a_only + self.f_b_only) / self.f_cc)
    }
}

/// Post-selected correlation estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrEstimate {
    pub e_hat: f64,
    pub se: f64,
    pub n_coinc: u64,
}

/// Correlation from the four coincidence counts (N₊₊, N₊₋, N₋₊, N₋₋).
pub fn correlation_from_counts(
    n_pp: u64,
    n_pm: u64,
    n_mp: u64,
    n_mm: u64,
) -> Result<CorrEstimate> {
    let n = n_pp + n_pm + n_mp + n_mm;
    if n == 0 {
        return Err(Error::EmptySample("no coincidences to estimate from".into()));
    }
    let nf = n as f64;
    let e_hat = (n_pp as f64 + n_mm as f64 - n_pm as f64 - n_mp as f64) / nf;
    let se = ((1.0 - e_hat * e_hat) / nf).max(0.0).sqrt();
    Ok(CorrEstimate { e_hat, se, n_coinc: n })
}

/// Correlation of both-click records from one settings pair.
pub fn estimate_correlation(records: &[TrialRecord]) -> Result<CorrEstimate> {
    let mut counts = [0u64; 4];
    for rec in records {
        if let (Some(a), Some(b)) = (rec.alice.value(), rec.bob.value()) {
            let i = match (a, b) {
                (1, 1) => 0,
                (1, -1) => 1,
                (-1, 1) => 2,
                _ => 3,
            };
            counts[i] += 1;
        }
    }
    correlation_from_counts(counts[0], counts[1], counts[2], counts[3])
}

/// Correlation of same-slot (coincident) Franson records.
pub fn estimate_correlation_franson(records: &[FransonRecord]) -> Result<CorrEstimate> {
    let mut counts = [0u64; 4];
    for rec in records.iter().filter(|r| r.coincident()) {
        let i = match (rec.alice.value, rec.bob.value) {
            (1, 1) => 0,
            (1, -1) => 1,
            (-1, 1) => 2,
            _ => 3,
        };
        counts[i] += 1;
    }
    correlation_from_counts(counts[0], counts[1], counts[2], counts[3])
}

/// Correlation over all emitted pairs with non-detections scored 0. This is
/// the no-post-selection view under which every l.h.v. model obeys |S| ≤ 2.
pub fn estimate_correlation_all_emitted(records: &[TrialRecord]) -> Result<CorrEstimate> {
    if records.is_empty() {
        return Err(Error::EmptySample("no records".into()));
    }
    let n = records.len() as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for rec in records {
        let a = rec.alice.value().unwrap_or(0) as f64;
        let b = rec.bob.value().unwrap_or(0) as f64;
        let p = a * b;
        sum += p;
        sum_sq += p * p;
    }
    let e_hat = sum / n;
    let se = ((sum_sq / n - e_hat * e_hat) / n).max(0.0).sqrt();
    Ok(CorrEstimate { e_hat, se, n_coinc: records.len() as u64 })
}

/// Singlet correlation −cos θ.
pub fn quantum_corr(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(-theta.cos())
}

/// Linear-model correlation −1 + 2θ/π.
pub fn linear_corr(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(-1.0 + 2.0 * theta / PI)
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=PI + 1e-12).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "theta {theta} out of [0, pi]"
        )));
    }
    Ok(())
}

/// CHSH combination S = E(a,b) + E(a',b) + E(a',b') − E(a,b').
pub fn chsh(e_ab: f64, e_ab_alt: f64, e_alt_b: f64, e_alt_b_alt: f64) -> Result<f64> {
    for e in [e_ab, e_ab_alt, e_alt_b, e_alt_b_alt] {
        if !(-1.0..=1.0).contains(&e) {
            return Err(Error::InvalidArgument(format!(
                "correlation {e} out of [-1, 1]"
            )));
        }
    }
    Ok(e_ab + e_alt_b + e_alt_b_alt - e_ab_alt)
}

/// Empirical click-pattern fractions.
pub fn detection_rates(records: &[TrialRecord]) -> Result<RatesSummary> {
    if records.is_empty() {
        return Err(Error::EmptySample("no records".into()));
    }
    let n = records.len() as f64;
    let mut counts = [0u64; 4];
    for rec in records {
        let i = match rec.pattern() {
            Pattern::Coincidence => 0,
            Pattern::AliceOnly => 1,
            Pattern::BobOnly => 2,
            Pattern::DoubleNull => 3,
        };
        counts[i] += 1;
    }
    Ok(RatesSummary {
        f_cc: counts[0] as f64 / n,
        f_a_only: counts[1] as f64 / n,
        f_b_only: counts[2] as f64 / n,
        f_none: counts[3] as f64 / n,
    })
}

/// Per-side detection probability inferred from the symmetric click pattern:
/// f_cc / (f_cc + f_a_only). Equals 2/3 for the injected erasure models.
pub fn effective_efficiency(rates: &RatesSummary) -> Result<f64> {
    let denom = rates.f_cc + rates.f_a_only;
    if rates.f_cc <= 0.0 || denom <= 0.0 {
        return Err(Error::EmptySample("no coincidences in rates".into()));
    }
    Ok(rates.f_cc / denom)
}

/// The fallacious square-root reading of the coincidence fraction:
/// sqrt(f_cc / (f_cc + singles)). Gives √0.5 ≈ 0.707 for the bare erasure
/// pattern, exposed for comparison with the true 2/3.
pub fn naive_efficiency(rates: &RatesSummary) -> Result<f64> {
    let denom = rates.f_cc + rates.f_a_only + rates.f_b_only;
    if rates.f_cc <= 0.0 || denom <= 0.0 {
        return Err(Error::EmptySample("no coincidences in rates".into()));
    }
    Ok((rates.f_cc / denom).sqrt())
}

/// Maximal post-selected |CHSH| reachable by an l.h.v. model whose per-side
/// detection efficiency is η: 4/η − 2. Standard detection-loophole bound.
pub fn lhv_efficiency_bound(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "efficiency {eta} out of (0, 1]"
        )));
    }
    Ok(4.0 / eta - 2.0)
}

/// Efficiency at which 4/η − 2 meets the quantum value 2√2: η = 2/(1 + √2)
/// ≈ 0.82843 (commonly quoted as 82.83%).
pub fn efficiency_threshold() -> f64 {
    2.0 / (1.0 + 2.0f64.sqrt())
}

/// A point for the visibility fit: phase sum x = α + β with its estimated
/// correlation and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityPoint {
    pub x: f64,
    pub e_hat: f64,
    pub se: f64,
}

/// Least-squares amplitude V̂ of the model E = −V cos x, weighted by 1/se²
/// (unweighted when any se is 0).
pub fn visibility_fit(points: &[VisibilityPoint]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "visibility fit needs at least 2 points".into(),
        ));
    }
    let weighted = points.iter().all(|p| p.se > 0.0);
    let mut num = 0.0;
    let mut den = 0.0;
    let mut w_total = 0.0;
    for p in points {
        let w = if weighted { 1.0 / (p.se * p.se) } else { 1.0 };
        let c = p.x.cos();
        num += w * p.e_hat * (-c);
        den += w * c * c;
        w_total += w;
    }
    // Weighted mean of cos²x; guards against designs where every regressor
    // sits at a zero of the cosine (up to float noise).
    if den / w_total < 1e-12 {
        return Err(Error::InvalidArgument(
            "degenerate design: all cos x vanish".into(),
        ));
    }
    Ok(num / den)
}

/// Maximum absolute deviation of a model's post-selected correlation from
/// the singlet prediction over a set of 3D setting pairs.
pub fn noncoplanar_deviation(
    model: &crate::harness::ModelKind,
    setting_pairs: &[(crate::geometry::Direction3, crate::geometry::Direction3)],
    n_trials: u64,
    master_seed: u64,
) -> Result<f64> {
    use crate::harness::{run_experiment, ExperimentSpec, PairRecords, Settings};
    let spec = ExperimentSpec {
        model: model.clone(),
        settings: Settings::VectorPairs(setting_pairs.to_vec()),
        n_trials,
        master_seed,
    };
    let dataset = run_experiment(&spec)?;
    let mut max_dev = 0.0f64;
    for (pair, (a, b)) in dataset.pairs.iter().zip(setting_pairs) {
        let records = match pair {
            PairRecords::Bell(records) => records,
            PairRecords::Franson(_) => {
                return Err(Error::Config(
                    "noncoplanar deviation applies to Bell-type models".into(),
                ))
            }
        };
        let est = estimate_correlation(records)?;
        let target = quantum_corr(relative_angle(a, b))?;
        max_dev = max_dev.max((est.e_hat - target).abs());
    }
    Ok(max_dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Outcome;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn click_pair(a: i8, b: i8) -> TrialRecord {
        TrialRecord {
            alice: Outcome::Click(a),
            bob: Outcome::Click(b),
        }
    }

    #[test]
    fn correlation_examples() {
        let recs: Vec<TrialRecord> = (0..100).map(|_| click_pair(1, -1)).collect();
        let est = estimate_correlation(&recs).unwrap();
        assert_eq!(est.e_hat, -1.0);
        assert_eq!(est.se, 0.0);

        let est = correlation_from_counts(25, 25, 25, 25).unwrap();
        assert_eq!(est.e_hat, 0.0);
        assert!((est.se - 0.1).abs() < 1e-12);

        let est = correlation_from_counts(45, 5, 5, 45).unwrap();
        assert!((est.e_hat - 0.8).abs() < 1e-12);
        assert!((est.se - 0.06).abs() < 1e-12);

        assert!(correlation_from_counts(0, 0, 0, 0).is_err());
        assert!(estimate_correlation(&[]).is_err());
    }

    #[test]
    fn se_matches_closed_form() {
        let est = correlation_from_counts(13, 7, 4, 29).unwrap();
        let expect = ((1.0 - est.e_hat * est.e_hat) / est.n_coinc as f64).sqrt();
        assert!((est.se - expect).abs() < 1e-12);
    }

    #[test]
    fn closed_form_correlations() {
        assert_eq!(quantum_corr(0.0).unwrap(), -1.0);
        assert_eq!(linear_corr(0.0).unwrap(), -1.0);
        assert!(quantum_corr(FRAC_PI_2).unwrap().abs() < 1e-12);
        assert!(linear_corr(FRAC_PI_2).unwrap().abs() < 1e-12);
        assert!((quantum_corr(FRAC_PI_4).unwrap() + 0.5f64.sqrt()).abs() < 1e-12);
        assert!((linear_corr(FRAC_PI_4).unwrap() + 0.5).abs() < 1e-12);
        assert!(quantum_corr(-0.1).is_err());
        assert!(linear_corr(4.0).is_err());
    }

    #[test]
    fn chsh_examples() {
        // Quantum values at settings (a, a') = (0, π/2), (b, b') = (π/4, 3π/4).
        let r = 0.5f64.sqrt();
        let s = chsh(-r, r, -r, -r).unwrap();
        assert!((s + 2.0 * 2.0f64.sqrt()).abs() < 1e-12);
        // Linear model at the same settings saturates |S| = 2.
        let s = chsh(-0.5, 0.5, -0.5, -0.5).unwrap();
        assert!((s + 2.0).abs() < 1e-12);
        assert_eq!(chsh(0.0, 0.0, 0.0, 0.0).unwrap(), 0.0);
        assert!(chsh(1.5, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn efficiency_examples() {
        let injected = RatesSummary {
            f_cc: 4.0 / 9.0,
            f_a_only: 2.0 / 9.0,
            f_b_only: 2.0 / 9.0,
            f_none: 1.0 / 9.0,
        };
        assert!((effective_efficiency(&injected).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((injected.singles_to_coincidence_ratio().unwrap() - 1.0).abs() < 1e-12);

        let bare = RatesSummary {
            f_cc: 0.5,
            f_a_only: 0.25,
            f_b_only: 0.25,
            f_none: 0.0,
        };
        assert!((naive_efficiency(&bare).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);

        let all = RatesSummary { f_cc: 1.0, f_a_only: 0.0, f_b_only: 0.0, f_none: 0.0 };
        assert_eq!(effective_efficiency(&all).unwrap(), 1.0);

        let none = RatesSummary { f_cc: 0.0, f_a_only: 1.0, f_b_only: 0.0, f_none: 0.0 };
        assert!(effective_efficiency(&none).is_err());
    }

    #[test]
    fn efficiency_bound_and_threshold() {
        assert_eq!(lhv_efficiency_bound(1.0).unwrap(), 2.0);
        assert_eq!(lhv_efficiency_bound(2.0 / 3.0).unwrap(), 4.0);
        assert!(lhv_efficiency_bound(0.0).is_err());
        assert!(lhv_efficiency_bound(1.1).is_err());
        let t = efficiency_threshold();
        // 2/(1+√2) ≈ 0.82843; the usual quote 82.83% differs only in rounding.
        assert!((t - 0.8284271).abs() < 1e-6);
        assert!((lhv_efficiency_bound(t).unwrap() - 2.0 * 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn visibility_fit_examples() {
        let exact: Vec<VisibilityPoint> = (0..12)
            .map(|k| {
                let x = k as f64 * std::f64::consts::TAU / 12.0;
                VisibilityPoint { x, e_hat: -x.cos(), se: 0.01 }
            })
            .collect();
        assert!((visibility_fit(&exact).unwrap() - 1.0).abs() < 1e-12);

        let zeros: Vec<VisibilityPoint> = (0..12)
            .map(|k| VisibilityPoint { x: k as f64 * 0.5, e_hat: 0.0, se: 0.01 })
            .collect();
        assert!(visibility_fit(&zeros).unwrap().abs() < 1e-12);

        let degenerate = vec![
            VisibilityPoint { x: FRAC_PI_2, e_hat: 0.0, se: 0.01 },
            VisibilityPoint { x: 3.0 * FRAC_PI_2, e_hat: 0.0, se: 0.01 },
        ];
        assert!(visibility_fit(&degenerate).is_err());
        assert!(visibility_fit(&exact[..1]).is_err());
    }

    #[test]
    fn all_emitted_estimator_scores_nulls_zero() {
        let recs = vec![
            click_pair(1, -1),
            TrialRecord { alice: Outcome::NoClick, bob: Outcome::Click(1) },
            TrialRecord { alice: Outcome::NoClick, bob: Outcome::NoClick },
            click_pair(1, 1),
        ];
        let est = estimate_correlation_all_emitted(&recs).unwrap();
        assert_eq!(est.e_hat, 0.0);
    }
}
