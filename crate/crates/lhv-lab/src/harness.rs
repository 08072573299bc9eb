//! Deterministic, parallelizable Monte Carlo execution.
//!
//! Every trial owns a counter-based RNG stream derived from
//! (master seed, settings-pair index, trial index) by SplitMix64-style
//! mixing, so a dataset is a pure function of its experiment spec: thread
//! count, partitioning, and evaluation order cannot change a single bit.
//! Each model consumes a fixed number of draws per trial (documented on its
//! sampler), which keeps streams aligned no matter what analysis runs later.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::franson::{
    franson_trial, quantum_franson_trial, sample_franson_hidden, FransonRecord, PhaseSchedule,
};
use crate::geometry::{Angle, Direction3};
use crate::models::{
    circle_model_with_3d_settings, erased_circle_trial, linear_trial, quantum_singlet_trial,
    sample_circle_hidden, sample_sphere_hidden, ErasureOptions, TrialRecord,
};
use crate::stats::{estimate_correlation, CorrEstimate};
use crate::{Error, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A per-trial deterministic uniform stream (SplitMix64 sequence).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRng {
    state: u64,
}

impl TrialRng {
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }
}

/// Derives the stream for one trial. Identical inputs give bit-identical
/// streams regardless of thread count or execution order; the pair and trial
/// indices are scrambled through golden-ratio multiplies and the SplitMix64
/// finalizer so neighbouring indices decorrelate fully.
pub fn derive_trial_rng(master_seed: u64, pair_index: u64, trial_index: u64) -> TrialRng {
    let s = mix64(master_seed);
    let s = mix64(s ^ pair_index.wrapping_mul(GOLDEN));
    let s = mix64(s ^ trial_index.wrapping_mul(GOLDEN));
    TrialRng { state: s }
}

/// Which trial function an experiment runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelKind {
    Linear,
    ErasedCircle(ErasureOptions),
    SphereErasure(ErasureOptions),
    CircleWith3d(ErasureOptions),
    QuantumSinglet,
    Franson { delta_t: f64, window: f64 },
    QuantumFranson { visibility: f64 },
}

impl ModelKind {
    /// Default Franson model: ΔT = 1 with emission times mixed over 10⁴·ΔT.
    pub fn franson_default() -> ModelKind {
        ModelKind::Franson { delta_t: 1.0, window: 1.0e4 }
    }
}

/// Measurement settings, one entry per settings pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Settings {
    AnglePairs(Vec<(Angle, Angle)>),
    VectorPairs(Vec<(Direction3, Direction3)>),
    Schedules(Vec<PhaseSchedule>),
}

impl Settings {
    pub fn len(&self) -> usize {
        match self {
            Settings::AnglePairs(v) => v.len(),
            Settings::VectorPairs(v) => v.len(),
            Settings::Schedules(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A full experiment definition: the dataset is a pure function of this.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub model: ModelKind,
    pub settings: Settings,
    pub n_trials: u64,
    pub master_seed: u64,
}

/// Records for one settings pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PairRecords {
    Bell(Vec<TrialRecord>),
    Franson(Vec<FransonRecord>),
}

/// All records of an experiment, in (pair index, trial index) order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    pub spec: ExperimentSpec,
    pub pairs: Vec<PairRecords>,
}

/// Evaluates one Bell-type trial on its own derived stream.
fn eval_bell_trial(
    model: &ModelKind,
    rng: &mut TrialRng,
    angles: Option<&(Angle, Angle)>,
    vectors: Option<&(Direction3, Direction3)>,
) -> TrialRecord {
    match model {
        ModelKind::Linear => {
            let (a, b) = angles.expect("validated");
            let h = sample_circle_hidden(rng);
            linear_trial(&h, *a, *b)
        }
        ModelKind::ErasedCircle(opts) => {
            let (a, b) = angles.expect("validated");
            let h = sample_circle_hidden(rng);
            erased_circle_trial(&h, *a, *b, opts)
        }
        ModelKind::SphereErasure(opts) => {
            let (a, b) = vectors.expect("validated");
            let h = sample_sphere_hidden(rng);
            crate::models::sphere_erasure_trial(&h, a, b, opts)
        }
        ModelKind::CircleWith3d(opts) => {
            let (a, b) = vectors.expect("validated");
            let h = sample_circle_hidden(rng);
            circle_model_with_3d_settings(&h, a, b, opts)
        }
        ModelKind::QuantumSinglet => {
            let (a, b) = vectors.expect("validated");
            quantum_singlet_trial(rng, a, b)
        }
        _ => unreachable!("validated"),
    }
}

fn validate(spec: &ExperimentSpec) -> Result<()> {
    if spec.n_trials == 0 {
        return Err(Error::Config("n_trials must be at least 1".into()));
    }
    if spec.settings.is_empty() {
        return Err(Error::Config("settings must be non-empty".into()));
    }
    let ok = matches!(
        (&spec.model, &spec.settings),
        (ModelKind::Linear, Settings::AnglePairs(_))
            | (ModelKind::ErasedCircle(_), Settings::AnglePairs(_))
            | (ModelKind::SphereErasure(_), Settings::VectorPairs(_))
            | (ModelKind::CircleWith3d(_), Settings::VectorPairs(_))
            | (ModelKind::QuantumSinglet, Settings::VectorPairs(_))
            | (ModelKind::Franson { .. }, Settings::Schedules(_))
            | (ModelKind::QuantumFranson { .. }, Settings::Schedules(_))
    );
    if !ok {
        return Err(Error::Config(format!(
            "model {:?} does not accept the given settings kind",
            spec.model
        )));
    }
    if let ModelKind::Franson { delta_t, window } = spec.model {
        if !(delta_t.is_finite() && delta_t > 0.0) {
            return Err(Error::Config(format!("delta_t must be positive, got {delta_t}")));
        }
        if !(window.is_finite() && window > 0.0) {
            return Err(Error::Config(format!("window must be positive, got {window}")));
        }
    }
    if let ModelKind::QuantumFranson { visibility } = spec.model {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::Config(format!("visibility {visibility} out of [0, 1]")));
        }
    }
    Ok(())
}

/// Runs every (settings pair, trial index) work item in parallel and
/// assembles records in index order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Dataset> {
    validate(spec)?;
    let n = spec.n_trials;
    let seed = spec.master_seed;
    let pairs: Vec<PairRecords> = match &spec.settings {
        Settings::AnglePairs(list) => list
            .iter()
            .enumerate()
            .map(|(p, pair)| {
                let records = (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let mut rng = derive_trial_rng(seed, p as u64, i);
                        eval_bell_trial(&spec.model, &mut rng, Some(pair), None)
                    })
                    .collect();
                PairRecords::Bell(records)
            })
            .collect(),
        Settings::VectorPairs(list) => list
            .iter()
            .enumerate()
            .map(|(p, pair)| {
                let records = (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let mut rng = derive_trial_rng(seed, p as u64, i);
                        eval_bell_trial(&spec.model, &mut rng, None, Some(pair))
                    })
                    .collect();
                PairRecords::Bell(records)
            })
            .collect(),
        Settings::Schedules(list) => list
            .iter()
            .enumerate()
            .map(|(p, sched)| {
                let records = (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let mut rng = derive_trial_rng(seed, p as u64, i);
                        let mut rec = match spec.model {
                            ModelKind::Franson { delta_t, window } => {
                                // Draw order: emission time, then the plan.
                                let t_e = window * rng.next_f64();
                                let h = sample_franson_hidden(&mut rng);
                                franson_trial(&h, sched, delta_t, t_e).expect("validated delta_t")
                            }
                            ModelKind::QuantumFranson { visibility } => quantum_franson_trial(
                                &mut rng,
                                sched.base_alpha,
                                sched.base_beta,
                                visibility,
                            )
                            .expect("validated visibility"),
                            _ => unreachable!("validated"),
                        };
                        rec.emission_index = i;
                        rec
                    })
                    .collect();
                PairRecords::Franson(records)
            })
            .collect(),
    };
    Ok(Dataset { spec: spec.clone(), pairs })
}

/// 25 equispaced relative angles covering [0, π].
pub fn default_theta_grid() -> Vec<f64> {
    let n = 25;
    (0..n)
        .map(|k| std::f64::consts::PI * k as f64 / (n - 1) as f64)
        .collect()
}

/// Runs one experiment per grid point with settings at the given relative
/// angle (coplanar x-y embedding for vector models) and post-selects the
/// coincidence correlation.
pub fn sweep(
    model: &ModelKind,
    theta_grid: &[f64],
    n_trials: u64,
    master_seed: u64,
) -> Result<Vec<(f64, CorrEstimate)>> {
    if theta_grid.is_empty() {
        return Err(Error::Config("theta grid must be non-empty".into()));
    }
    for &t in theta_grid {
        if !(0.0..=std::f64::consts::PI + 1e-12).contains(&t) {
            return Err(Error::Config(format!("grid angle {t} out of [0, pi]")));
        }
    }
    let settings = match model {
        ModelKind::Linear | ModelKind::ErasedCircle(_) => Settings::AnglePairs(
            theta_grid.iter().map(|&t| (Angle::ZERO, Angle::new(t))).collect(),
        ),
        ModelKind::SphereErasure(_) | ModelKind::CircleWith3d(_) | ModelKind::QuantumSinglet => {
            Settings::VectorPairs(
                theta_grid
                    .iter()
                    .map(|&t| (Direction3::X, Direction3::in_plane(Angle::new(t))))
                    .collect(),
            )
        }
        _ => {
            return Err(Error::Config(
                "sweep applies to Bell-type models; use the franson command for schedules".into(),
            ))
        }
    };
    let spec = ExperimentSpec {
        model: model.clone(),
        settings,
        n_trials,
        master_seed,
    };
    let dataset = run_experiment(&spec)?;
    theta_grid
        .iter()
        .zip(&dataset.pairs)
        .map(|(&t, pair)| match pair {
            PairRecords::Bell(records) => Ok((t, estimate_correlation(records)?)),
            PairRecords::Franson(_) => unreachable!(),
        })
        .collect()
}

/// Settings for the locality audit: a baseline pair plus one alternative
/// setting per side.
#[derive(Debug, Clone, PartialEq)]
pub enum AuditSettings {
    Angles { a: Angle, a_alt: Angle, b: Angle, b_alt: Angle },
    Vectors { a: Direction3, a_alt: Direction3, b: Direction3, b_alt: Direction3 },
}

/// Result of the locality audit. Both flags must hold for an l.h.v. model;
/// the quantum oracles are nonlocal by design and fail it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalityReport {
    pub n: u64,
    /// Alice's outcome sequence is bit-identical when Bob's setting changes.
    pub alice_invariant: bool,
    /// Bob's outcome sequence is bit-identical when Alice's setting changes.
    pub bob_invariant: bool,
}

impl LocalityReport {
    pub fn passed(&self) -> bool {
        self.alice_invariant && self.bob_invariant
    }
}

/// Runs n trials twice from the same master seed with one side's setting
/// changed and compares the other side's outcome sequence bit for bit.
pub fn locality_audit(
    model: &ModelKind,
    settings: &AuditSettings,
    n: u64,
    master_seed: u64,
) -> Result<LocalityReport> {
    let run = |pair_settings: Settings| -> Result<Vec<TrialRecord>> {
        let spec = ExperimentSpec {
            model: model.clone(),
            settings: pair_settings,
            n_trials: n,
            master_seed,
        };
        match run_experiment(&spec)?.pairs.remove(0) {
            PairRecords::Bell(records) => Ok(records),
            PairRecords::Franson(_) => Err(Error::Config(
                "locality audit applies to Bell-type models".into(),
            )),
        }
    };
    let (base, bob_changed, alice_changed) = match settings {
        AuditSettings::Angles { a, a_alt, b, b_alt } => {
            if b == b_alt || a == a_alt {
                return Err(Error::Config("alternative settings must differ".into()));
            }
            (
                run(Settings::AnglePairs(vec![(*a, *b)]))?,
                run(Settings::AnglePairs(vec![(*a, *b_alt)]))?,
                run(Settings::AnglePairs(vec![(*a_alt, *b)]))?,
            )
        }
        AuditSettings::Vectors { a, a_alt, b, b_alt } => {
            if b == b_alt || a == a_alt {
                return Err(Error::Config("alternative settings must differ".into()));
            }
            (
                run(Settings::VectorPairs(vec![(*a, *b)]))?,
                run(Settings::VectorPairs(vec![(*a, *b_alt)]))?,
                run(Settings::VectorPairs(vec![(*a_alt, *b)]))?,
            )
        }
    };
    let alice_invariant = base
        .iter()
        .zip(&bob_changed)
        .all(|(x, y)| x.alice == y.alice);
    let bob_invariant = base
        .iter()
        .zip(&alice_changed)
        .all(|(x, y)| x.bob == y.bob);
    Ok(LocalityReport { n, alice_invariant, bob_invariant })
}
