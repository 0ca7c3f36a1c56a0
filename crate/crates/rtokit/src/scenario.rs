//! Preset sample-sequence generators and timeout detection.
//!
//! The pathological preset places a spike every `period` steps over a flat
//! base, which keeps the sequence inside a `[base, spike]` window while the
//! rto repeatedly decays low enough for each spike to beat it. The uniform
//! preset draws dyadic rationals `lo + (hi-lo) * u / 2^53` from a seeded
//! ChaCha8 stream, so sequences stay exact and reproducible.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exactnum::Rational;
use crate::rtocalc::{self, RtoParams, RtoState};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioKind {
    /// 1-based step j gets `spike` when j is a multiple of `period`,
    /// otherwise `base`.
    Pathological {
        period: u64,
        base: Rational,
        spike: Rational,
    },
    /// i.i.d. exact draws from `[lo, hi)`.
    Uniform {
        lo: Rational,
        hi: Rational,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub length: u64,
    pub params: RtoParams,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.length < 1 {
            return Err(Error::InvalidParams("length must be at least 1".into()));
        }
        match &self.kind {
            ScenarioKind::Pathological { period, base, spike } => {
                if *period < 2 {
                    return Err(Error::InvalidParams("period must be at least 2".into()));
                }
                if !base.is_positive() || spike < base {
                    return Err(Error::InvalidParams(
                        "need spike >= base > 0 for the pathological preset".into(),
                    ));
                }
            }
            ScenarioKind::Uniform { lo, hi, .. } => {
                if !lo.is_positive() || hi <= lo {
                    return Err(Error::InvalidParams(
                        "need hi > lo > 0 for the uniform preset".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Steps (1-based) that carry the spike value; empty for uniform.
    pub fn spike_steps(&self) -> Vec<u64> {
        match &self.kind {
            ScenarioKind::Pathological { period, .. } => {
                (1..=self.length).filter(|j| j % period == 0).collect()
            }
            ScenarioKind::Uniform { .. } => Vec::new(),
        }
    }
}

/// Generates the sample sequence for a scenario.
pub fn generate(spec: &ScenarioSpec) -> Result<Vec<Rational>> {
    spec.validate()?;
    let samples = match &spec.kind {
        ScenarioKind::Pathological { period, base, spike } => (1..=spec.length)
            .map(|j| if j % period == 0 { spike.clone() } else { base.clone() })
            .collect(),
        ScenarioKind::Uniform { lo, hi, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let span = hi - lo;
            let denom = 1i64 << 53;
            (0..spec.length)
                .map(|_| {
                    let u = rng.next_u64() >> 11;
                    lo + &(&span * &Rational::new(u as i64, denom))
                })
                .collect()
        }
    };
    Ok(samples)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeoutReport {
    /// Steps j >= 2 where the observed sample exceeded the timer armed at
    /// step j-1, i.e. `S_j > rto_{j-1}`.
    pub timeout_steps: Vec<u64>,
    pub spike_steps: Vec<u64>,
    pub states: Vec<RtoState>,
}

/// Runs the recursion over the samples and flags every step whose sample
/// beat the previously armed rto. Strict comparison, so constant sample
/// sequences are timeout-free.
pub fn detect_timeouts(samples: &[Rational], params: &RtoParams) -> Result<TimeoutReport> {
    let states = rtocalc::run(params, samples)?;
    let timeout_steps = (2..=samples.len() as u64)
        .filter(|&j| samples[(j - 1) as usize] > states[(j - 2) as usize].rto)
        .collect();
    Ok(TimeoutReport {
        timeout_steps,
        spike_steps: Vec::new(),
        states,
    })
}

/// Generates a scenario and analyzes it in one step, attaching the spike
/// positions to the report.
pub fn analyze(spec: &ScenarioSpec) -> Result<(Vec<Rational>, TimeoutReport)> {
    let samples = generate(spec)?;
    let mut report = detect_timeouts(&samples, &spec.params)?;
    report.spike_steps = spec.spike_steps();
    Ok((samples, report))
}
