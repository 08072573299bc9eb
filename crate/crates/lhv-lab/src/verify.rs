//! Acceptance criteria suite behind `lhvlab verify`.
//!
//! Each criterion runs a fresh, fully seeded experiment and checks a pinned
//! tolerance. The suite is deterministic for a fixed seed; every number in a
//! failure detail can be reproduced from (seed, trials) alone.

use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI, TAU};

use crate::franson::{bin_by_detection_phase, PhaseSchedule};
use crate::geometry::{Angle, Direction3};
use crate::harness::{
    default_theta_grid, derive_trial_rng, locality_audit, run_experiment, sweep, AuditSettings,
    ExperimentSpec, ModelKind, PairRecords, Settings,
};
use crate::models::{ErasureOptions, Pattern, TrialRecord};
use crate::stats::{
    chsh, detection_rates, effective_efficiency, efficiency_threshold, estimate_correlation,
    estimate_correlation_franson, lhv_efficiency_bound, naive_efficiency, quantum_corr,
    visibility_fit, VisibilityPoint,
};
use crate::Result;

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Knobs for the suite. Defaults match the acceptance scale: 10⁶ trials per
/// settings point, master seed 42.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub master_seed: u64,
    pub n_trials: u64,
    /// Negative-control hook: scales the erasure keep weight. Anything but
    /// 1.0 corrupts the models and must make the suite fail.
    pub keep_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> VerifyOptions {
        VerifyOptions {
            master_seed: 42,
            n_trials: 1_000_000,
            keep_scale: 1.0,
        }
    }
}

impl VerifyOptions {
    fn erasure(&self, null_injection_probability: f64) -> ErasureOptions {
        ErasureOptions {
            null_injection_probability,
            symmetrize: true,
            keep_scale: self.keep_scale,
        }
    }

    fn injected(&self) -> ErasureOptions {
        self.erasure(1.0 / 9.0)
    }

    fn bare(&self) -> ErasureOptions {
        self.erasure(0.0)
    }
}

fn result(id: u32, name: &str, passed: bool, detail: String) -> CriterionResult {
    CriterionResult { id, name: name.to_string(), passed, detail }
}

/// Runs the full acceptance suite. Criteria are independent; a failure in one
/// does not stop the others.
pub fn run_all(opts: &VerifyOptions) -> Result<Vec<CriterionResult>> {
    Ok(vec![
        singlet_reproduction(opts)?,
        efficiency_figure(opts)?,
        click_pattern_fractions(opts)?,
        naive_vs_effective(opts)?,
        chsh_values(opts)?,
        threshold_constant(),
        franson_static(opts)?,
        franson_switching(opts)?,
        noncoplanar_discrimination(opts)?,
        locality(opts)?,
        no_signalling(opts)?,
        reproducibility(opts)?,
    ])
}

/// Criterion 1: the sphere erasure model reproduces −cos θ on a 25-point
/// grid within 0.01.
fn singlet_reproduction(opts: &VerifyOptions) -> Result<CriterionResult> {
    let grid = default_theta_grid();
    let curve = sweep(
        &ModelKind::SphereErasure(opts.injected()),
        &grid,
        opts.n_trials,
        opts.master_seed,
    )?;
    let mut max_resid = 0.0f64;
    for (theta, est) in &curve {
        max_resid = max_resid.max((est.e_hat - quantum_corr(*theta)?).abs());
    }
    Ok(result(
        1,
        "singlet reproduction (sphere erasure, 25-point theta grid)",
        max_resid <= 0.01,
        format!("max |E + cos theta| = {max_resid:.5} (tol 0.01)"),
    ))
}

fn sphere_pair_records(
    opts: &VerifyOptions,
    erasure: ErasureOptions,
    seed_offset: u64,
) -> Result<Vec<TrialRecord>> {
    let spec = ExperimentSpec {
        model: ModelKind::SphereErasure(erasure),
        settings: Settings::VectorPairs(vec![(
            Direction3::X,
            Direction3::in_plane(Angle::new(FRAC_PI_3)),
        )]),
        n_trials: opts.n_trials,
        master_seed: opts.master_seed.wrapping_add(seed_offset),
    };
    match run_experiment(&spec)?.pairs.remove(0) {
        PairRecords::Bell(records) => Ok(records),
        PairRecords::Franson(_) => unreachable!(),
    }
}

/// Criterion 2: effective efficiency 2/3 and singles/coincidence ratio 1
/// with null injection 1/9.
fn efficiency_figure(opts: &VerifyOptions) -> Result<CriterionResult> {
    let records = sphere_pair_records(opts, opts.injected(), 0)?;
    let rates = detection_rates(&records)?;
    let eff = effective_efficiency(&rates)?;
    let ratio = rates.singles_to_coincidence_ratio()?;
    let passed = (eff - 2.0 / 3.0).abs() <= 0.005 && (ratio - 1.0).abs() <= 0.02;
    Ok(result(
        2,
        "effective efficiency 2/3 and singles/coincidence ratio 1",
        passed,
        format!("efficiency = {eff:.4} (tol 0.667 +/- 0.005), ratio = {ratio:.4} (tol 1.00 +/- 0.02)"),
    ))
}

/// Criterion 3: click-pattern fractions (4/9, 2/9, 2/9, 1/9) each +/- 0.005.
fn click_pattern_fractions(opts: &VerifyOptions) -> Result<CriterionResult> {
    let records = sphere_pair_records(opts, opts.injected(), 0)?;
    let rates = detection_rates(&records)?;
    let expected = [4.0 / 9.0, 2.0 / 9.0, 2.0 / 9.0, 1.0 / 9.0];
    let observed = [rates.f_cc, rates.f_a_only, rates.f_b_only, rates.f_none];
    let max_dev = observed
        .iter()
        .zip(&expected)
        .map(|(o, e)| (o - e).abs())
        .fold(0.0f64, f64::max);
    Ok(result(
        3,
        "click-pattern fractions (4/9, 2/9, 2/9, 1/9)",
        max_dev <= 0.005,
        format!(
            "fractions = ({:.4}, {:.4}, {:.4}, {:.4}), max deviation {max_dev:.5} (tol 0.005)",
            observed[0], observed[1], observed[2], observed[3]
        ),
    ))
}

/// Criterion 4: bare-model naive efficiency sqrt(0.5) vs injected effective
/// efficiency 2/3.
fn naive_vs_effective(opts: &VerifyOptions) -> Result<CriterionResult> {
    let bare = sphere_pair_records(opts, opts.bare(), 1)?;
    let naive = naive_efficiency(&detection_rates(&bare)?)?;
    let injected = sphere_pair_records(opts, opts.injected(), 0)?;
    let eff = effective_efficiency(&detection_rates(&injected)?)?;
    let passed = (naive - 0.5f64.sqrt()).abs() <= 0.005 && (eff - 2.0 / 3.0).abs() <= 0.005;
    Ok(result(
        4,
        "naive sqrt(0.5) vs effective 2/3 efficiency",
        passed,
        format!("naive = {naive:.4} (tol 0.707 +/- 0.005), effective = {eff:.4} (tol 0.667 +/- 0.005)"),
    ))
}

/// Standard CHSH settings (a, a') = (0, π/2), (b, b') = (π/4, 3π/4).
fn chsh_angle_settings() -> [(f64, f64); 4] {
    let (a, a_alt) = (0.0, FRAC_PI_2);
    let (b, b_alt) = (FRAC_PI_4, 3.0 * FRAC_PI_4);
    // Order: (a,b), (a,b'), (a',b), (a',b').
    [(a, b), (a, b_alt), (a_alt, b), (a_alt, b_alt)]
}

fn chsh_for_model(model: &ModelKind, n_trials: u64, seed: u64) -> Result<f64> {
    let pairs = chsh_angle_settings();
    let settings = match model {
        ModelKind::Linear | ModelKind::ErasedCircle(_) => Settings::AnglePairs(
            pairs.iter().map(|&(a, b)| (Angle::new(a), Angle::new(b))).collect(),
        ),
        _ => Settings::VectorPairs(
            pairs
                .iter()
                .map(|&(a, b)| {
                    (Direction3::in_plane(Angle::new(a)), Direction3::in_plane(Angle::new(b)))
                })
                .collect(),
        ),
    };
    let spec = ExperimentSpec {
        model: model.clone(),
        settings,
        n_trials,
        master_seed: seed,
    };
    let dataset = run_experiment(&spec)?;
    let mut e = [0.0; 4];
    for (i, pair) in dataset.pairs.iter().enumerate() {
        let PairRecords::Bell(records) = pair else { unreachable!() };
        e[i] = estimate_correlation(records)?.e_hat;
    }
    chsh(e[0], e[1], e[2], e[3])
}

/// Criterion 5: linear model saturates |S| = 2; post-selected erasure models
/// reach 2√2; the efficiency bound at 2/3 is 4 exactly.
fn chsh_values(opts: &VerifyOptions) -> Result<CriterionResult> {
    let s_linear = chsh_for_model(&ModelKind::Linear, opts.n_trials, opts.master_seed)?.abs();
    let s_sphere = chsh_for_model(
        &ModelKind::SphereErasure(opts.injected()),
        opts.n_trials,
        opts.master_seed,
    )?
    .abs();
    let s_circle = chsh_for_model(
        &ModelKind::ErasedCircle(opts.injected()),
        opts.n_trials,
        opts.master_seed,
    )?
    .abs();
    let bound = lhv_efficiency_bound(2.0 / 3.0)?;
    let quantum = 2.0 * 2.0f64.sqrt();
    let passed = (s_linear - 2.0).abs() <= 0.01
        && (s_sphere - quantum).abs() <= 0.02
        && (s_circle - quantum).abs() <= 0.02
        && bound == 4.0;
    Ok(result(
        5,
        "CHSH: linear saturates 2, post-selected erasure models reach 2*sqrt(2)",
        passed,
        format!(
            "|S| linear = {s_linear:.4} (tol 2.00 +/- 0.01), sphere = {s_sphere:.4}, \
             circle = {s_circle:.4} (tol 2.828 +/- 0.02), lhv bound at 2/3 = {bound} (exact 4)"
        ),
    ))
}

/// Criterion 6: efficiency threshold 2/(1 + sqrt(2)) within 0.001 of the
/// commonly quoted 82.83% (the exact value rounds to 82.84%; the 0.0001
/// difference is rounding, not disagreement).
fn threshold_constant() -> CriterionResult {
    let t = efficiency_threshold();
    result(
        6,
        "efficiency threshold 2/(1 + sqrt(2)) near 82.83%",
        (t - 0.8283).abs() <= 0.001,
        format!("threshold = {t:.5} (quoted 0.8283, rounding note: exact value rounds to 0.82843)"),
    )
}

/// Criterion 7: static Franson run: 50% coincidences, balanced slots, unit
/// visibility, two clicks per record.
fn franson_static(opts: &VerifyOptions) -> Result<CriterionResult> {
    let n_points = 12;
    let n_trials = (opts.n_trials / 10).max(1);
    let schedules: Vec<PhaseSchedule> = (0..n_points)
        .map(|k| {
            PhaseSchedule::constant(Angle::new(TAU * k as f64 / n_points as f64), Angle::ZERO)
        })
        .collect();
    let spec = ExperimentSpec {
        model: ModelKind::franson_default(),
        settings: Settings::Schedules(schedules.clone()),
        n_trials,
        master_seed: opts.master_seed,
    };
    let dataset = run_experiment(&spec)?;
    let mut n_total = 0u64;
    let mut n_coinc = 0u64;
    let mut n_early = 0u64;
    let mut points = Vec::new();
    for (sched, pair) in schedules.iter().zip(&dataset.pairs) {
        let PairRecords::Franson(records) = pair else { unreachable!() };
        n_total += records.len() as u64;
        for rec in records {
            if rec.coincident() {
                n_coinc += 1;
                if rec.alice.slot == crate::franson::Slot::Early {
                    n_early += 1;
                }
            }
        }
        let est = estimate_correlation_franson(records)?;
        points.push(VisibilityPoint {
            x: sched.base_alpha.radians() + sched.base_beta.radians(),
            e_hat: est.e_hat,
            se: est.se,
        });
    }
    let coinc_fraction = n_coinc as f64 / n_total as f64;
    let slot_balance = n_early as f64 / n_coinc as f64 - (n_coinc - n_early) as f64 / n_coinc as f64;
    let v = visibility_fit(&points)?;
    // Perfect detectors: FransonRecord carries a click on both sides by
    // construction; the count check pins the record budget.
    let two_clicks = n_total == n_points as u64 * n_trials;
    let passed = (coinc_fraction - 0.5).abs() <= 0.003
        && slot_balance.abs() <= 0.006
        && (v - 1.0).abs() <= 0.01
        && two_clicks;
    Ok(result(
        7,
        "Franson static: 50% coincidences, balanced slots, visibility 1",
        passed,
        format!(
            "coincident fraction = {coinc_fraction:.4} (tol 0.500 +/- 0.003), \
             early-late balance = {slot_balance:.4} (tol 0.006), visibility = {v:.4} \
             (tol 1.00 +/- 0.01), records = {n_total}"
        ),
    ))
}

/// Exact-probability oracle for square schedules: fraction of Late-slot
/// detections whose dwell parity differs from the emission one, integrated
/// over a full schedule cycle.
pub fn late_slot_flip_fraction(period: f64, delta_t: f64) -> f64 {
    let cycle = 2.0 * period;
    let n = 200_000;
    let mut flipped = 0u64;
    for k in 0..n {
        let t = cycle * (k as f64 + 0.5) / n as f64;
        let pe = ((t / period).floor() as i64).rem_euclid(2);
        let pd = (((t + delta_t) / period).floor() as i64).rem_euclid(2);
        if pe != pd {
            flipped += 1;
        }
    }
    flipped as f64 / n as f64
}

/// Per-bin correlation predicted by the committed-phase plan for a square
/// schedule: the bin with phase sum `sum_bin` mixes in Late-slot trials
/// emitted under the other phase sum with weight f/2.
pub fn predicted_bin_correlation(flip_fraction: f64, sum_bin: f64, sum_other: f64) -> f64 {
    -((2.0 - flip_fraction) * sum_bin.cos() + flip_fraction * sum_other.cos()) / 2.0
}

fn run_switching(
    opts: &VerifyOptions,
    period: f64,
) -> Result<Vec<(f64, crate::stats::CorrEstimate)>> {
    let delta_t = 1.0;
    let sched = PhaseSchedule::square(Angle::ZERO, Angle::ZERO, period, Angle::new(FRAC_PI_2))?;
    let spec = ExperimentSpec {
        model: ModelKind::Franson { delta_t, window: 1.0e4 },
        settings: Settings::Schedules(vec![sched]),
        n_trials: opts.n_trials,
        master_seed: opts.master_seed,
    };
    let dataset = run_experiment(&spec)?;
    let PairRecords::Franson(records) = &dataset.pairs[0] else { unreachable!() };
    let bins = bin_by_detection_phase(records, &sched, delta_t)?;
    Ok(bins
        .into_iter()
        .map(|b| (b.alpha + b.beta, b.estimate))
        .collect())
}

/// Criterion 8: slow switching stays within 0.02 of −cos(α+β) per bin; at
/// period = ΔT at least one bin deviates by more than 10 standard errors
/// (the committed-phase oracle predicts a residual of 1.0 there).
fn franson_switching(opts: &VerifyOptions) -> Result<CriterionResult> {
    let slow = run_switching(opts, 100.0)?;
    let mut slow_max = 0.0f64;
    for (sum, est) in &slow {
        slow_max = slow_max.max((est.e_hat + sum.cos()).abs());
    }
    let fast = run_switching(opts, 1.0)?;
    let f = late_slot_flip_fraction(1.0, 1.0);
    let mut fast_best_ratio = 0.0f64;
    let mut oracle_ok = true;
    for (sum, est) in &fast {
        let residual = (est.e_hat + sum.cos()).abs();
        if est.se > 0.0 {
            fast_best_ratio = fast_best_ratio.max(residual / est.se);
        }
        // The deviation magnitude comes from the exact-probability oracle,
        // not from assumption: compare against the committed-phase plan.
        let sum_other = if sum.cos() > 0.0 { PI } else { 0.0 };
        let predicted = predicted_bin_correlation(f, *sum, sum_other);
        if (est.e_hat - predicted).abs() > 0.01 {
            oracle_ok = false;
        }
    }
    let passed = slow_max <= 0.02 && fast_best_ratio > 10.0 && oracle_ok;
    Ok(result(
        8,
        "Franson switching: slow matches, period = delta_t fails",
        passed,
        format!(
            "slow max residual = {slow_max:.4} (tol 0.02), fast max residual = \
             {fast_best_ratio:.1} SE (needs > 10), oracle flip fraction = {f:.3}, \
             bins match committed-phase oracle: {oracle_ok}"
        ),
    ))
}

/// Default non-coplanar scenario: two coplanar pairs plus the featured
/// out-of-plane pair whose azimuth gap (π/2) differs from its relative
/// angle (π/4).
pub fn default_noncoplanar_pairs() -> Vec<(Direction3, Direction3)> {
    vec![
        (Direction3::X, Direction3::in_plane(Angle::new(FRAC_PI_3))),
        (Direction3::X, Direction3::in_plane(Angle::new(FRAC_PI_4))),
        (
            Direction3::Z,
            Direction3::new(0.0, 0.5f64.sqrt(), 0.5f64.sqrt()).expect("unit"),
        ),
    ]
}

/// Criterion 9: the circle model with 3D settings breaks on the featured
/// pair (deviation ≈ 0.707) while the sphere model stays within 0.01.
fn noncoplanar_discrimination(opts: &VerifyOptions) -> Result<CriterionResult> {
    let pairs = default_noncoplanar_pairs();
    let circle_dev = crate::stats::noncoplanar_deviation(
        &ModelKind::CircleWith3d(opts.injected()),
        &pairs,
        opts.n_trials,
        opts.master_seed,
    )?;
    let sphere_dev = crate::stats::noncoplanar_deviation(
        &ModelKind::SphereErasure(opts.injected()),
        &pairs,
        opts.n_trials,
        opts.master_seed,
    )?;
    let passed = circle_dev > 0.1 && sphere_dev <= 0.01;
    Ok(result(
        9,
        "non-coplanar settings discriminate circle from sphere hidden variables",
        passed,
        format!(
            "circle max deviation = {circle_dev:.4} (needs > 0.1, expected ~0.707), \
             sphere max deviation = {sphere_dev:.4} (tol 0.01)"
        ),
    ))
}

/// Criterion 10: bit-identical local outcome sequences under remote-setting
/// change for every Bell-type l.h.v. model, n = 10⁴, exact. (The Franson
/// model's plan is committed from the public pre-announced schedule at
/// emission time, so the Bell-style free-setting audit does not apply to it;
/// its failure mode under late setting changes is criterion 8.)
fn locality(opts: &VerifyOptions) -> Result<CriterionResult> {
    let n = 10_000;
    let angle_settings = AuditSettings::Angles {
        a: Angle::ZERO,
        a_alt: Angle::new(FRAC_PI_2),
        b: Angle::new(FRAC_PI_4),
        b_alt: Angle::new(3.0 * FRAC_PI_4),
    };
    let vector_settings = AuditSettings::Vectors {
        a: Direction3::X,
        a_alt: Direction3::Z,
        b: Direction3::in_plane(Angle::new(FRAC_PI_4)),
        b_alt: Direction3::new(0.0, 0.5f64.sqrt(), 0.5f64.sqrt()).expect("unit"),
    };
    let models: Vec<(&str, ModelKind, &AuditSettings)> = vec![
        ("linear", ModelKind::Linear, &angle_settings),
        ("erased-circle", ModelKind::ErasedCircle(opts.injected()), &angle_settings),
        ("sphere", ModelKind::SphereErasure(opts.injected()), &vector_settings),
        ("circle-3d", ModelKind::CircleWith3d(opts.injected()), &vector_settings),
    ];
    let mut failures = Vec::new();
    for (name, model, settings) in &models {
        let report = locality_audit(model, settings, n, opts.master_seed)?;
        if !report.passed() {
            failures.push(*name);
        }
    }
    Ok(result(
        10,
        "locality audit: outcome sequences invariant under remote settings",
        failures.is_empty(),
        if failures.is_empty() {
            format!("all 4 l.h.v. models bit-identical over {n} trials")
        } else {
            format!("locality violation in: {}", failures.join(", "))
        },
    ))
}

fn marginal_checks(records: &[TrialRecord]) -> (bool, f64) {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    // Marginal of each side conditioned on its own click.
    for side in 0..2 {
        let values: Vec<i8> = records
            .iter()
            .filter_map(|r| if side == 0 { r.alice.value() } else { r.bob.value() })
            .collect();
        if values.is_empty() {
            continue;
        }
        let n = values.len() as f64;
        let p_plus = values.iter().filter(|&&v| v == 1).count() as f64 / n;
        let se = 0.5 / n.sqrt();
        let sigmas = (p_plus - 0.5).abs() / se;
        worst = worst.max(sigmas);
        if sigmas > 4.0 {
            ok = false;
        }
    }
    // Singles unbiasedness: the surviving value on single-detection events.
    for pattern in [Pattern::AliceOnly, Pattern::BobOnly] {
        let values: Vec<i8> = records
            .iter()
            .filter(|r| r.pattern() == pattern)
            .map(|r| match pattern {
                Pattern::AliceOnly => r.alice.value().unwrap(),
                _ => r.bob.value().unwrap(),
            })
            .collect();
        if values.len() < 1000 {
            continue;
        }
        let n = values.len() as f64;
        let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
        let se = 1.0 / n.sqrt();
        let sigmas = mean.abs() / se;
        worst = worst.max(sigmas);
        if sigmas > 4.0 {
            ok = false;
        }
    }
    (ok, worst)
}

/// Criterion 11: no-signalling marginals at 0.5 and unbiased singles, within
/// 4 standard errors, across the scenario suite.
fn no_signalling(opts: &VerifyOptions) -> Result<CriterionResult> {
    let setting_pairs = [FRAC_PI_4, 2.0];
    let models: Vec<(&str, ModelKind)> = vec![
        ("linear", ModelKind::Linear),
        ("erased-circle", ModelKind::ErasedCircle(opts.injected())),
        ("sphere", ModelKind::SphereErasure(opts.injected())),
        ("circle-3d", ModelKind::CircleWith3d(opts.injected())),
        ("quantum-singlet", ModelKind::QuantumSinglet),
    ];
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, model) in &models {
        for &theta in &setting_pairs {
            let settings = match model {
                ModelKind::Linear | ModelKind::ErasedCircle(_) => {
                    Settings::AnglePairs(vec![(Angle::ZERO, Angle::new(theta))])
                }
                _ => Settings::VectorPairs(vec![(
                    Direction3::X,
                    Direction3::in_plane(Angle::new(theta)),
                )]),
            };
            let spec = ExperimentSpec {
                model: model.clone(),
                settings,
                n_trials: opts.n_trials,
                master_seed: opts.master_seed,
            };
            let dataset = run_experiment(&spec)?;
            let PairRecords::Bell(records) = &dataset.pairs[0] else { unreachable!() };
            let (ok, sigmas) = marginal_checks(records);
            worst = worst.max(sigmas);
            if !ok {
                failures.push(format!("{name} at theta = {theta:.3}"));
            }
        }
    }
    Ok(result(
        11,
        "no-signalling marginals and unbiased singles within 4 SE",
        failures.is_empty(),
        if failures.is_empty() {
            format!("all marginals within 4 SE (worst: {worst:.2} SE)")
        } else {
            format!("marginal bias in: {}", failures.join("; "))
        },
    ))
}

/// Criterion 12: datasets are pure functions of the experiment description —
/// identical on reruns and across thread counts — and serialized reports are
/// byte-stable.
fn reproducibility(opts: &VerifyOptions) -> Result<CriterionResult> {
    let spec = ExperimentSpec {
        model: ModelKind::SphereErasure(opts.injected()),
        settings: Settings::VectorPairs(vec![(
            Direction3::X,
            Direction3::in_plane(Angle::new(FRAC_PI_3)),
        )]),
        n_trials: (opts.n_trials / 5).max(1),
        master_seed: opts.master_seed,
    };
    let d1 = run_experiment(&spec)?;
    let d2 = run_experiment(&spec)?;
    let rerun_identical = d1 == d2;

    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| crate::Error::Config(format!("thread pool: {e}")))?;
    let d_single = single.install(|| run_experiment(&spec))?;
    let multi = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .map_err(|e| crate::Error::Config(format!("thread pool: {e}")))?;
    let d_multi = multi.install(|| run_experiment(&spec))?;
    let threads_identical = d_single == d_multi && d_single == d1;

    let rates = detection_rates(match &d1.pairs[0] {
        PairRecords::Bell(r) => r,
        PairRecords::Franson(_) => unreachable!(),
    })?;
    let r1 = serde_json::to_string(&rates).expect("serializable");
    let r2 = serde_json::to_string(&rates).expect("serializable");
    let report_identical = r1 == r2;

    let passed = rerun_identical && threads_identical && report_identical;
    Ok(result(
        12,
        "reproducibility: bit-identical datasets and byte-stable reports",
        passed,
        format!(
            "rerun identical: {rerun_identical}, thread counts identical: {threads_identical}, \
             report bytes identical: {report_identical}"
        ),
    ))
}

/// Sanity check used by tests: first draws of neighbouring streams differ.
pub fn stream_smoke() -> bool {
    let mut a = derive_trial_rng(0, 0, 0);
    let mut b = derive_trial_rng(0, 0, 1);
    a.next_u64() != b.next_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_fraction_matches_closed_form() {
        // For delta_t <= period the flip fraction is delta_t / period.
        assert!((late_slot_flip_fraction(100.0, 1.0) - 0.01).abs() < 1e-4);
        assert!((late_slot_flip_fraction(2.0, 1.0) - 0.5).abs() < 1e-4);
        // Period equal to the delay flips every Late detection.
        assert!((late_slot_flip_fraction(1.0, 1.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn predicted_bin_correlation_limits() {
        // No flips: the bin is pure and carries -cos of its own phase sum.
        assert!((predicted_bin_correlation(0.0, 0.0, PI) + 1.0).abs() < 1e-12);
        // Full flipping at amplitude pi/2: both bins average to zero.
        assert!(predicted_bin_correlation(1.0, 0.0, PI).abs() < 1e-12);
        assert!(predicted_bin_correlation(1.0, PI, 0.0).abs() < 1e-12);
    }

    #[test]
    fn smoke() {
        assert!(stream_smoke());
    }
}
