//! Event-level Monte Carlo of the divide-and-conquer tree protocol.
//!
//! Only photon presence is tracked. Inside the subspace that survives
//! postselection the quality of a segment is fixed by whether its
//! connection photon exists, so a boolean per segment is enough.
//!
//! Routing at a connection: the two connection photons enter a PBS in the
//! state `(|H⟩ + |V⟩)/√2` each, relative to the gate basis. The pair leaves
//! through different ports (`HH` or `VV`) with probability 1/2, both through
//! the measured port with probability 1/4 and both through the kept port
//! with probability 1/4. A single photon picks either port with probability
//! 1/2. Only the first case leaves a usable connection qubit, and a
//! non-resolving detector cannot tell it from the second.
//!
//! Time is counted in source pulses. Two segments feeding a connection are
//! built in parallel, so a connection attempt costs the larger of the two
//! build times; the detection itself is free.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{
    a_closed_form, level_success_prob, total_time_approx, total_time_exact, AnalyticsError,
    ProtocolParams,
};
use crate::stats::{summarize, wilson_interval, Summary, Z_95};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("cannot connect segments of levels {0} and {1}")]
    LevelMismatch(u32, u32),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    pub eta_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub eta_d: f64,
    /// Accept only a registered count of exactly one.
    pub number_resolving: bool,
    /// Probability of a spurious click within one detection window.
    pub dark_count_prob: f64,
}

impl DetectorModel {
    pub fn threshold(eta_d: f64) -> Self {
        Self {
            eta_d,
            number_resolving: false,
            dark_count_prob: 0.0,
        }
    }

    /// Detects up to `photons` photons. Returns whether the event is
    /// accepted and whether exactly one real photon was registered.
    fn register<R: Rng>(&self, photons: u32, rng: &mut R) -> (bool, bool) {
        let mut real = 0u32;
        for _ in 0..photons {
            if rng.gen_bool(self.eta_d) {
                real += 1;
            }
        }
        let dark = self.dark_count_prob > 0.0 && rng.gen_bool(self.dark_count_prob);
        let count = real + dark as u32;
        let accepted = if self.number_resolving {
            count == 1
        } else {
            count >= 1
        };
        (accepted, real == 1 && !dark)
    }
}

/// What is rebuilt after a rejected connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartPolicy {
    /// Both input segments are consumed and rebuilt.
    #[default]
    RebuildBoth,
    /// The first input is kept and only the second is rebuilt. A kept
    /// vacuum segment then keeps failing, so this is not a lower bound.
    RebuildOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Models {
    pub source: SourceModel,
    pub detector: DetectorModel,
    pub policy: RestartPolicy,
}

impl Models {
    pub fn new(eta_s: f64, eta_d: f64) -> Self {
        Self {
            source: SourceModel { eta_s },
            detector: DetectorModel::threshold(eta_d),
            policy: RestartPolicy::RebuildBoth,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let in_unit = |x: f64| x > 0.0 && x <= 1.0;
        if !in_unit(self.source.eta_s) {
            return Err(SimError::InvalidArgument(format!(
                "eta_s must lie in (0, 1], got {}",
                self.source.eta_s
            )));
        }
        if !in_unit(self.detector.eta_d) {
            return Err(SimError::InvalidArgument(format!(
                "eta_d must lie in (0, 1], got {}",
                self.detector.eta_d
            )));
        }
        let dark = self.detector.dark_count_prob;
        if !(0.0..1.0).contains(&dark) {
            return Err(SimError::InvalidArgument(format!(
                "dark count probability must lie in [0, 1), got {dark}"
            )));
        }
        Ok(())
    }
}

/// A built segment. `connection_photon_present` is ground truth the
/// simulated experimenter cannot see.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub level: u32,
    pub connection_photon_present: bool,
    pub elapsed_pulses: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectionOutcome {
    AcceptedGood,
    AcceptedVacuum,
    Rejected,
}

impl ConnectionOutcome {
    pub fn is_accepted(self) -> bool {
        self != ConnectionOutcome::Rejected
    }
}

/// Attempt counters for one level.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCounts {
    pub attempts: u64,
    pub acceptances: u64,
    pub good: u64,
}

impl LevelCounts {
    fn record(&mut self, accepted: bool, good: bool) {
        self.attempts += 1;
        self.acceptances += accepted as u64;
        self.good += (accepted && good) as u64;
    }

    fn add(&mut self, other: &LevelCounts) {
        self.attempts += other.attempts;
        self.acceptances += other.acceptances;
        self.good += other.good;
    }
}

/// One source pulse followed by detection of the outer photon.
pub fn attempt_base_pair<R: Rng>(
    source: &SourceModel,
    detector: &DetectorModel,
    rng: &mut R,
) -> Option<Segment> {
    let emitted = rng.gen_bool(source.eta_s);
    let (accepted, _) = detector.register(emitted as u32, rng);
    accepted.then_some(Segment {
        level: 0,
        connection_photon_present: emitted,
        elapsed_pulses: 1,
    })
}

/// PBS between the connection photons of two equal-level segments and
/// detection of the measured output port.
pub fn attempt_connection<R: Rng>(
    a: &Segment,
    b: &Segment,
    detector: &DetectorModel,
    rng: &mut R,
) -> Result<ConnectionOutcome, SimError> {
    if a.level != b.level {
        return Err(SimError::LevelMismatch(a.level, b.level));
    }
    // (photons at the detector, photon left in the kept port)
    let (measured, kept) = match (a.connection_photon_present, b.connection_photon_present) {
        (true, true) => {
            let r: f64 = rng.gen();
            if r < 0.5 {
                (1, true)
            } else if r < 0.75 {
                (2, false)
            } else {
                (0, true)
            }
        }
        (true, false) | (false, true) => {
            if rng.gen_bool(0.5) {
                (1, false)
            } else {
                (0, true)
            }
        }
        (false, false) => (0, false),
    };
    let (accepted, single_real) = detector.register(measured, rng);
    Ok(if !accepted {
        ConnectionOutcome::Rejected
    } else if kept && measured == 1 && single_real {
        ConnectionOutcome::AcceptedGood
    } else {
        ConnectionOutcome::AcceptedVacuum
    })
}

/// Counters collected while building one segment, indexed by level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildStats {
    pub levels: Vec<LevelCounts>,
}

/// Builds a segment of the given level, retrying failures until one is
/// accepted.
pub fn build_segment<R: Rng>(level: u32, models: &Models, rng: &mut R) -> (Segment, BuildStats) {
    let mut levels = vec![LevelCounts::default(); level as usize + 1];
    let seg = build_into(level, models, rng, &mut levels);
    (seg, BuildStats { levels })
}

fn build_into<R: Rng>(
    level: u32,
    models: &Models,
    rng: &mut R,
    counts: &mut [LevelCounts],
) -> Segment {
    if level == 0 {
        let mut pulses = 0u64;
        loop {
            pulses += 1;
            let attempt = attempt_base_pair(&models.source, &models.detector, rng);
            let accepted = attempt.is_some();
            counts[0].record(
                accepted,
                attempt.is_some_and(|s| s.connection_photon_present),
            );
            if let Some(seg) = attempt {
                return Segment {
                    elapsed_pulses: pulses,
                    ..seg
                };
            }
        }
    }
    let lower = level - 1;
    let mut a = build_into(lower, models, rng, counts);
    let mut b = build_into(lower, models, rng, counts);
    let mut elapsed = a.elapsed_pulses.max(b.elapsed_pulses);
    loop {
        let outcome = attempt_connection(&a, &b, &models.detector, rng).expect("equal levels");
        counts[level as usize].record(
            outcome.is_accepted(),
            outcome == ConnectionOutcome::AcceptedGood,
        );
        if outcome.is_accepted() {
            return Segment {
                level,
                connection_photon_present: outcome == ConnectionOutcome::AcceptedGood,
                elapsed_pulses: elapsed,
            };
        }
        match models.policy {
            RestartPolicy::RebuildBoth => {
                a = build_into(lower, models, rng, counts);
                b = build_into(lower, models, rng, counts);
                elapsed += a.elapsed_pulses.max(b.elapsed_pulses);
            }
            RestartPolicy::RebuildOne => {
                b = build_into(lower, models, rng, counts);
                elapsed += b.elapsed_pulses;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct TrialOutcome {
    levels: Vec<LevelCounts>,
    final_measurement: LevelCounts,
    pulses: u64,
    pulses_without_final: u64,
}

/// A full preparation: build the top segment, then detect its connection
/// photon, rebuilding everything until the detector clicks.
fn run_trial(params: &ProtocolParams, models: &Models, seed: u64, index: u64) -> TrialOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let top = params.m - 1;
    let mut levels = vec![LevelCounts::default(); params.m as usize];
    let mut final_measurement = LevelCounts::default();
    let mut pulses = 0u64;
    let mut pulses_without_final = None;
    loop {
        let seg = build_into(top, models, &mut rng, &mut levels);
        pulses += seg.elapsed_pulses;
        pulses_without_final.get_or_insert(seg.elapsed_pulses);
        let (accepted, single_real) = models
            .detector
            .register(seg.connection_photon_present as u32, &mut rng);
        final_measurement.record(accepted, single_real);
        if accepted {
            return TrialOutcome {
                levels,
                final_measurement,
                pulses,
                pulses_without_final: pulses_without_final.unwrap_or(pulses),
            };
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub m: u32,
    pub attempts: u64,
    pub acceptances: u64,
    pub good: u64,
    pub p_hat: Option<f64>,
    pub p_ci95: [f64; 2],
    pub a_hat: Option<f64>,
    pub a_ci95: [f64; 2],
}

impl LevelReport {
    fn from_counts(m: u32, c: &LevelCounts) -> Self {
        let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
        let (plo, phi) = wilson_interval(c.acceptances, c.attempts, Z_95);
        let (alo, ahi) = wilson_interval(c.good, c.acceptances, Z_95);
        Self {
            m,
            attempts: c.attempts,
            acceptances: c.acceptances,
            good: c.good,
            p_hat: ratio(c.acceptances, c.attempts),
            p_ci95: [plo, phi],
            a_hat: ratio(c.good, c.acceptances),
            a_ci95: [alo, ahi],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReference {
    pub a_m: Vec<f64>,
    pub p_m: Vec<f64>,
    /// Click probability of the closing detection, `eta_d a_{m-1}`.
    pub final_success_prob: f64,
    #[serde(rename = "T_exact_log10")]
    pub t_exact_log10: f64,
    #[serde(rename = "T_approx_log10")]
    pub t_approx_log10: f64,
}

impl AnalyticReference {
    pub fn new(params: &ProtocolParams) -> Result<Self, SimError> {
        let a_m = (0..params.m)
            .map(|i| a_closed_form(i, params.eta_d))
            .collect::<Result<Vec<_>, _>>()?;
        let p_m = (0..params.m)
            .map(|i| level_success_prob(params, i))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            final_success_prob: params.eta_d * a_m[params.m as usize - 1],
            a_m,
            p_m,
            t_exact_log10: total_time_exact(params)?.log10(),
            t_approx_log10: total_time_approx(params)?.log10(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub params: ProtocolParams,
    pub models: Models,
    pub seed: u64,
    pub trials: u64,
    pub completed_trials: u64,
    /// Set when the time budget ran out before all trials finished.
    pub partial: bool,
    pub per_level: Vec<LevelReport>,
    pub final_measurement: LevelReport,
    /// Pulses per completed state, closing detection included.
    pub total_pulses: Option<Summary>,
    /// Pulses of the first top-level build of each trial.
    pub total_pulses_without_final: Option<Summary>,
    pub analytic: AnalyticReference,
}

/// Trials per scheduling chunk; the time budget is checked between chunks.
const CHUNK: u64 = 64;

/// Runs `trials` independent preparations. Each trial draws from its own
/// ChaCha stream `(seed, trial index)`, so the result does not depend on
/// the number of worker threads.
pub fn run_campaign(
    params: &ProtocolParams,
    models: &Models,
    trials: u64,
    seed: u64,
) -> Result<SimResult, SimError> {
    run_campaign_with_budget(params, models, trials, seed, None)
}

/// As [`run_campaign`], stopping after the chunk during which `budget`
/// expires. Whatever finished is reported with `partial` set.
pub fn run_campaign_with_budget(
    params: &ProtocolParams,
    models: &Models,
    trials: u64,
    seed: u64,
    budget: Option<Duration>,
) -> Result<SimResult, SimError> {
    params.validate()?;
    models.validate()?;
    if trials == 0 {
        return Err(SimError::InvalidArgument(
            "trials must be at least 1".into(),
        ));
    }
    let analytic = AnalyticReference::new(params)?;
    let start = Instant::now();
    let mut outcomes: Vec<TrialOutcome> = Vec::with_capacity(trials.min(1 << 20) as usize);
    let mut next = 0u64;
    let mut partial = false;
    while next < trials {
        if budget.is_some_and(|b| start.elapsed() >= b) {
            partial = true;
            break;
        }
        let end = (next + CHUNK).min(trials);
        let chunk: Vec<TrialOutcome> = (next..end)
            .into_par_iter()
            .map(|i| run_trial(params, models, seed, i))
            .collect();
        outcomes.extend(chunk);
        next = end;
    }

    let mut levels = vec![LevelCounts::default(); params.m as usize];
    let mut final_counts = LevelCounts::default();
    for o in &outcomes {
        for (acc, c) in levels.iter_mut().zip(&o.levels) {
            acc.add(c);
        }
        final_counts.add(&o.final_measurement);
    }
    let pulses: Vec<u64> = outcomes.iter().map(|o| o.pulses).collect();
    let pulses_first: Vec<u64> = outcomes.iter().map(|o| o.pulses_without_final).collect();
    Ok(SimResult {
        params: *params,
        models: *models,
        seed,
        trials,
        completed_trials: outcomes.len() as u64,
        partial,
        per_level: levels
            .iter()
            .enumerate()
            .map(|(i, c)| LevelReport::from_counts(i as u32, c))
            .collect(),
        final_measurement: LevelReport::from_counts(params.m, &final_counts),
        total_pulses: summarize(&pulses),
        total_pulses_without_final: summarize(&pulses_first),
        analytic,
    })
}
