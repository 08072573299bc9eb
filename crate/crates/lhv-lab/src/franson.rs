//! Franson-type l.h.v. model with perfect detectors.
//!
//! The erasure trick is reused, but erased hidden values become delayed,
//! non-coincident click pairs instead of no-clicks: every trial produces
//! exactly two clicks, one per detector, each in an Early or Late time slot
//! separated by ΔT (the long-arm minus short-arm flight time). Kept trials
//! land coincidentally in a coin-chosen common slot (temporal symmetrisation)
//! and carry the circle-model outcome values, so the post-selected
//! same-slot correlation is exactly −cos(α + β).
//!
//! The hidden plan is committed at emission using the schedule phases at the
//! emission time. Analysis bins coincidences by the phases at the *detection*
//! time, which operationalizes the validity condition: when phases dwell much
//! longer than ΔT the two agree almost always, while switching at the ΔT
//! scale makes the binned statistics deviate from the quantum prediction.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, TAU};

use crate::geometry::{sign_of, Angle};
use crate::harness::TrialRng;
use crate::models::Side;
use crate::stats::{correlation_from_counts, CorrEstimate};
use crate::{Error, Result};

/// Detection time slot. Late = Early + ΔT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slot {
    Early,
    Late,
}

/// One detector's click for a Franson trial. Detectors are perfect, so there
/// is always a click, with a dichotomic value and a time slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedOutcome {
    pub value: i8,
    pub slot: Slot,
}

/// Per-trial outcome pair with its emission bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FransonRecord {
    pub alice: TimedOutcome,
    pub bob: TimedOutcome,
    pub emission_index: u64,
    pub emission_time: f64,
}

impl FransonRecord {
    pub fn coincident(&self) -> bool {
        self.alice.slot == self.bob.slot
    }
}

/// Complete local plan for a Franson trial, all drawn at emission before any
/// detection-time phase is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FransonHidden {
    pub phi: Angle,
    pub r: f64,
    /// Which side the erasure filter acts on; on erased trials this side
    /// clicks Early and the other Late.
    pub side_coin: Side,
    /// Common slot for kept (coincident) trials.
    pub slot_coin: Slot,
    /// Independent fair outcome values used on erased trials.
    pub u_a: i8,
    pub u_b: i8,
}

/// Draws a Franson hidden plan. Fixed draw budget: 6 uniforms, in the order
/// φ, r, side coin, slot coin, u_a, u_b.
pub fn sample_franson_hidden(rng: &mut TrialRng) -> FransonHidden {
    FransonHidden {
        phi: Angle::new(TAU * rng.next_f64()),
        r: rng.next_f64(),
        side_coin: if rng.next_f64() < 0.5 { Side::A } else { Side::B },
        slot_coin: if rng.next_f64() < 0.5 { Slot::Early } else { Slot::Late },
        u_a: if rng.next_f64() < 0.5 { 1 } else { -1 },
        u_b: if rng.next_f64() < 0.5 { 1 } else { -1 },
    }
}

/// Waveform of a local phase schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Waveform {
    Constant,
    Square,
}

/// Deterministic local phase settings as a function of time.
///
/// For the square waveform both phases toggle between their base value and
/// base + amplitude; `period` is the dwell time between toggles, so a full
/// cycle lasts 2·period. Switching "fast" means period ≤ ΔT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub base_alpha: Angle,
    pub base_beta: Angle,
    pub waveform: Waveform,
    pub period: f64,
    pub amplitude: Angle,
}

impl PhaseSchedule {
    pub fn constant(alpha: Angle, beta: Angle) -> PhaseSchedule {
        PhaseSchedule {
            base_alpha: alpha,
            base_beta: beta,
            waveform: Waveform::Constant,
            period: 1.0,
            amplitude: Angle::ZERO,
        }
    }

    pub fn square(
        alpha: Angle,
        beta: Angle,
        period: f64,
        amplitude: Angle,
    ) -> Result<PhaseSchedule> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "schedule period must be positive, got {period}"
            )));
        }
        Ok(PhaseSchedule {
            base_alpha: alpha,
            base_beta: beta,
            waveform: Waveform::Square,
            period,
            amplitude,
        })
    }

    /// 0.0 in even dwells, 1.0 in odd dwells.
    fn toggle(&self, t: f64) -> f64 {
        match self.waveform {
            Waveform::Constant => 0.0,
            Waveform::Square => ((t / self.period).floor() as i64).rem_euclid(2) as f64,
        }
    }

    pub fn alpha_at(&self, t: f64) -> Angle {
        Angle::new(self.base_alpha.radians() + self.toggle(t) * self.amplitude.radians())
    }

    pub fn beta_at(&self, t: f64) -> Angle {
        Angle::new(self.base_beta.radians() + self.toggle(t) * self.amplitude.radians())
    }
}

/// Runs one Franson trial from a committed hidden plan.
///
/// The emission-time phases (α, β) map onto circle settings a' = α,
/// b' = −β, so the kept-trial correlation targets −cos(α + β). The keep test
/// uses the coin-chosen side's own setting with weight (π/4)|cos(φ − s)|.
/// Kept trials click coincidentally in the slot-coin slot; erased trials put
/// the filtered side at Early and the other side at Late (delayed by exactly
/// ΔT) with the independent fair values from the plan.
pub fn franson_trial(
    h: &FransonHidden,
    sched: &PhaseSchedule,
    delta_t: f64,
    emission_time: f64,
) -> Result<FransonRecord> {
    if !(delta_t.is_finite() && delta_t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "delta_t must be positive, got {delta_t}"
        )));
    }
    let alpha = sched.alpha_at(emission_time).radians();
    let beta = sched.beta_at(emission_time).radians();
    let a_setting = alpha;
    let b_setting = -beta;
    let phi = h.phi.radians();
    let s = match h.side_coin {
        Side::A => a_setting,
        Side::B => b_setting,
    };
    let keep = h.r < FRAC_PI_4 * (phi - s).cos().abs();
    let (alice, bob) = if keep {
        let va = sign_of((phi - a_setting).cos());
        let vb = -sign_of((phi - b_setting).cos());
        (
            TimedOutcome { value: va, slot: h.slot_coin },
            TimedOutcome { value: vb, slot: h.slot_coin },
        )
    } else {
        match h.side_coin {
            Side::A => (
                TimedOutcome { value: h.u_a, slot: Slot::Early },
                TimedOutcome { value: h.u_b, slot: Slot::Late },
            ),
            Side::B => (
                TimedOutcome { value: h.u_a, slot: Slot::Late },
                TimedOutcome { value: h.u_b, slot: Slot::Early },
            ),
        }
    };
    Ok(FransonRecord {
        alice,
        bob,
        emission_index: 0,
        emission_time,
    })
}

/// Correlation of coincident records grouped by the phase pair in force at
/// the detection time (emission time, plus ΔT for Late-slot coincidences).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseBin {
    pub alpha: f64,
    pub beta: f64,
    pub estimate: CorrEstimate,
}

/// Groups coincident records by detection-time phases and estimates the
/// correlation per bin. Bins are sorted by (α, β).
pub fn bin_by_detection_phase(
    records: &[FransonRecord],
    sched: &PhaseSchedule,
    delta_t: f64,
) -> Result<Vec<PhaseBin>> {
    if !(delta_t.is_finite() && delta_t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "delta_t must be positive, got {delta_t}"
        )));
    }
    // Key on phases quantized to 1e-9 rad so float noise cannot split bins.
    let mut bins: BTreeMap<(i64, i64), [u64; 4]> = BTreeMap::new();
    for rec in records.iter().filter(|r| r.coincident()) {
        let t_det = rec.emission_time
            + if rec.alice.slot == Slot::Late { delta_t } else { 0.0 };
        let alpha = sched.alpha_at(t_det).radians();
        let beta = sched.beta_at(t_det).radians();
        let key = ((alpha * 1e9).round() as i64, (beta * 1e9).round() as i64);
        let counts = bins.entry(key).or_default();
        let i = match (rec.alice.value, rec.bob.value) {
            (1, 1) => 0,
            (1, -1) => 1,
            (-1, 1) => 2,
            _ => 3,
        };
        counts[i] += 1;
    }
    bins.into_iter()
        .map(|((ka, kb), c)| {
            Ok(PhaseBin {
                alpha: ka as f64 / 1e9,
                beta: kb as f64 / 1e9,
                estimate: correlation_from_counts(c[0], c[1], c[2], c[3])?,
            })
        })
        .collect()
}

/// Oracle sampler for the quantum Franson prediction at constant local
/// phases: coincident with probability 1/2 in a fair common slot, with
/// outcomes from P(α_out, β_out) = (1 − α_out·β_out·V·cos(α + β))/4;
/// otherwise non-coincident with a fair side choice and independent fair
/// outcomes. Fixed draw budget: 4 uniforms.
pub fn quantum_franson_trial(
    rng: &mut TrialRng,
    alpha: Angle,
    beta: Angle,
    visibility: f64,
) -> Result<FransonRecord> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::InvalidArgument(format!(
            "visibility {visibility} out of [0, 1]"
        )));
    }
    let coincident = rng.next_f64() < 0.5;
    let coin = rng.next_f64() < 0.5;
    let u1 = rng.next_f64();
    let u2 = rng.next_f64();
    let (alice, bob) = if coincident {
        let slot = if coin { Slot::Early } else { Slot::Late };
        let p_same = (1.0 - visibility * (alpha.radians() + beta.radians()).cos()) / 2.0;
        let same = u1 < p_same;
        let va: i8 = if u2 < 0.5 { 1 } else { -1 };
        let vb = if same { va } else { -va };
        (
            TimedOutcome { value: va, slot },
            TimedOutcome { value: vb, slot },
        )
    } else {
        let (sa, sb) = if coin {
            (Slot::Early, Slot::Late)
        } else {
            (Slot::Late, Slot::Early)
        };
        (
            TimedOutcome { value: if u1 < 0.5 { 1 } else { -1 }, slot: sa },
            TimedOutcome { value: if u2 < 0.5 { 1 } else { -1 }, slot: sb },
        )
    };
    Ok(FransonRecord {
        alice,
        bob,
        emission_index: 0,
        emission_time: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::derive_trial_rng;
    use std::f64::consts::PI;

    fn plan(phi: f64, r: f64, side: Side, slot: Slot) -> FransonHidden {
        FransonHidden {
            phi: Angle::new(phi),
            r,
            side_coin: side,
            slot_coin: slot,
            u_a: 1,
            u_b: -1,
        }
    }

    #[test]
    fn forced_keep_lands_coincident_in_slot_coin() {
        let sched = PhaseSchedule::constant(Angle::ZERO, Angle::ZERO);
        // phi aligned with the setting: keep weight π/4 > r.
        let h = plan(0.0, 0.1, Side::A, Slot::Late);
        let rec = franson_trial(&h, &sched, 1.0, 0.0).unwrap();
        assert!(rec.coincident());
        assert_eq!(rec.alice.slot, Slot::Late);
        assert_eq!(rec.bob.slot, Slot::Late);
    }

    #[test]
    fn erased_trial_delays_the_other_side() {
        let sched = PhaseSchedule::constant(Angle::ZERO, Angle::ZERO);
        // r = 0.9 > π/4: always erased.
        let h = plan(0.0, 0.9, Side::A, Slot::Early);
        let rec = franson_trial(&h, &sched, 1.0, 0.0).unwrap();
        assert!(!rec.coincident());
        assert_eq!(rec.alice.slot, Slot::Early);
        assert_eq!(rec.bob.slot, Slot::Late);
        assert_eq!((rec.alice.value, rec.bob.value), (1, -1));

        let h = plan(0.0, 0.9, Side::B, Slot::Early);
        let rec = franson_trial(&h, &sched, 1.0, 0.0).unwrap();
        assert_eq!(rec.alice.slot, Slot::Late);
        assert_eq!(rec.bob.slot, Slot::Early);
    }

    #[test]
    fn delta_t_must_be_positive() {
        let sched = PhaseSchedule::constant(Angle::ZERO, Angle::ZERO);
        let h = plan(0.0, 0.1, Side::A, Slot::Early);
        assert!(franson_trial(&h, &sched, 0.0, 0.0).is_err());
        assert!(franson_trial(&h, &sched, -1.0, 0.0).is_err());
    }

    #[test]
    fn square_schedule_toggles_each_period() {
        let sched =
            PhaseSchedule::square(Angle::ZERO, Angle::ZERO, 2.0, Angle::new(PI / 2.0)).unwrap();
        assert_eq!(sched.alpha_at(0.5).radians(), 0.0);
        assert!((sched.alpha_at(2.5).radians() - PI / 2.0).abs() < 1e-12);
        assert_eq!(sched.alpha_at(4.5).radians(), 0.0);
        assert!(PhaseSchedule::square(Angle::ZERO, Angle::ZERO, 0.0, Angle::ZERO).is_err());
    }

    #[test]
    fn quantum_franson_validation_and_anticorrelation() {
        let mut rng = derive_trial_rng(5, 0, 0);
        assert!(quantum_franson_trial(&mut rng, Angle::ZERO, Angle::ZERO, 1.5).is_err());
        // α + β = 0, V = 1: coincident outcomes always anticorrelated.
        for _ in 0..2000 {
            let rec = quantum_franson_trial(&mut rng, Angle::ZERO, Angle::ZERO, 1.0).unwrap();
            if rec.coincident() {
                assert_eq!(rec.alice.value, -rec.bob.value);
            }
        }
    }

    #[test]
    fn constant_schedule_bins_into_single_bin() {
        let sched = PhaseSchedule::constant(Angle::new(0.3), Angle::new(0.4));
        let mut rng = derive_trial_rng(9, 0, 0);
        let records: Vec<FransonRecord> = (0..5000)
            .map(|i| {
                let h = sample_franson_hidden(&mut rng);
                let mut rec = franson_trial(&h, &sched, 1.0, i as f64 * 0.37).unwrap();
                rec.emission_index = i;
                rec
            })
            .collect();
        let bins = bin_by_detection_phase(&records, &sched, 1.0).unwrap();
        assert_eq!(bins.len(), 1);
        assert!((bins[0].alpha - 0.3).abs() < 1e-9);
        assert!((bins[0].beta - 0.4).abs() < 1e-9);
    }
}
