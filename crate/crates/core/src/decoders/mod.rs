//! Syndrome decoders for one CSS sector.
//!
//! Every decoder takes a [`Sector`], a syndrome and the physical error
//! probability used to build the uniform channel prior, and reports how many
//! BP iterations it spent in total.

mod bpgd;
mod osd;
mod relay;
mod restart;

pub use bpgd::decode_bpgd;
pub use osd::{decode_bp_osd, osd_postprocess, osd_with_order, reliability_order, OsdParams};
pub use relay::{decode_relay, RelayParams};
pub use restart::{decode_restart_belief, early_termination, EarlyTermination, RestartBeliefParams};

use crate::bp::{clip_llr, prior_llr, BpConfig, BpWorkspace};
use crate::codes::Sector;
use crate::error::SimError;
use crate::gf2::BitVector;

/// Why a decoder stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Termination {
    /// The first BP instance converged.
    RootConverged,
    /// A consistent estimate of weight at most `t` was found.
    DistanceRule,
    /// A consistent estimate was accepted because `w(s) / xi > t`.
    DefectRule,
    /// Lowest-weight consistent candidate after all branches.
    MinWeightFallback,
    /// No consistent estimate was found.
    Exhausted,
    Osd,
    DecimationComplete,
    RelayCandidate,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::RootConverged => "root_converged",
            Termination::DistanceRule => "distance_rule",
            Termination::DefectRule => "defect_rule",
            Termination::MinWeightFallback => "min_weight_fallback",
            Termination::Exhausted => "exhausted",
            Termination::Osd => "osd",
            Termination::DecimationComplete => "decimation_complete",
            Termination::RelayCandidate => "relay_candidate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub estimate: BitVector,
    /// The estimate reproduces the input syndrome.
    pub success: bool,
    /// BP iterations summed over every BP instance the decoder ran.
    pub bp_iterations: u64,
    pub termination: Termination,
}

impl DecodeOutcome {
    pub(crate) fn failure(n: usize, bp_iterations: u64) -> Self {
        Self {
            estimate: BitVector::zeros(n),
            success: false,
            bp_iterations,
            termination: Termination::Exhausted,
        }
    }

    pub(crate) fn found(estimate: BitVector, bp_iterations: u64, termination: Termination) -> Self {
        Self {
            estimate,
            success: true,
            bp_iterations,
            termination,
        }
    }
}

/// Uniform prior vector `log((1-p)/p)`, clipped to the saturation value.
pub fn uniform_prior(n: usize, p: f64, saturation: f64) -> Vec<f64> {
    vec![clip_llr(prior_llr(p), saturation); n]
}

/// Plain BP: one instance against the uniform prior.
pub fn decode_bp(sector: &Sector, s: &BitVector, p: f64, cfg: &BpConfig) -> DecodeOutcome {
    let prior = uniform_prior(sector.n(), p, cfg.saturation);
    let out = BpWorkspace::new(&sector.graph).run(&sector.graph, s, &prior, cfg);
    if out.converged {
        DecodeOutcome::found(out.estimate, out.iterations_used as u64, Termination::RootConverged)
    } else {
        DecodeOutcome::failure(sector.n(), out.iterations_used as u64)
    }
}

/// A decoder together with all of its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum DecoderSpec {
    Bp(BpConfig),
    BpOsd { bp: BpConfig, osd: OsdParams },
    Bpgd(BpConfig),
    Relay(RelayParams),
    RestartBelief(RestartBeliefParams),
}

impl DecoderSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderSpec::Bp(_) => "bp",
            DecoderSpec::BpOsd { .. } => "bp-osd",
            DecoderSpec::Bpgd(_) => "bpgd",
            DecoderSpec::Relay(_) => "relay",
            DecoderSpec::RestartBelief(_) => "rb",
        }
    }

    /// Checks parameter ranges against a code of length `n`.
    pub fn validate(&self, n: usize) -> Result<(), SimError> {
        let bp_ok = |cfg: &BpConfig| {
            if cfg.max_iters == 0 {
                Err(SimError::InvalidParams("BP needs at least one iteration".into()))
            } else if cfg.saturation.is_nan() || cfg.saturation <= 0.0 {
                Err(SimError::InvalidParams("saturation must be positive".into()))
            } else {
                Ok(())
            }
        };
        match self {
            DecoderSpec::Bp(cfg) | DecoderSpec::Bpgd(cfg) => bp_ok(cfg),
            DecoderSpec::BpOsd { bp, osd } => {
                bp_ok(bp)?;
                if osd.order > 2 {
                    return Err(SimError::InvalidParams(format!(
                        "OSD order must be 0, 1 or 2, got {}",
                        osd.order
                    )));
                }
                Ok(())
            }
            DecoderSpec::Relay(r) => r.validate(),
            DecoderSpec::RestartBelief(rb) => rb.validate(n),
        }
    }

    /// Decodes `s`. `seed` feeds the randomized decoders (Relay) and is
    /// ignored by the deterministic ones.
    pub fn decode(&self, sector: &Sector, s: &BitVector, p: f64, seed: u64) -> DecodeOutcome {
        let out = match self {
            DecoderSpec::Bp(cfg) => decode_bp(sector, s, p, cfg),
            DecoderSpec::BpOsd { bp, osd } => decode_bp_osd(sector, s, p, bp, osd),
            DecoderSpec::Bpgd(cfg) => decode_bpgd(sector, s, p, cfg),
            DecoderSpec::Relay(r) => {
                let params = RelayParams {
                    rng_seed: r.rng_seed ^ seed,
                    ..r.clone()
                };
                decode_relay(sector, s, p, &params)
            }
            DecoderSpec::RestartBelief(rb) => decode_restart_belief(sector, s, p, rb),
        };
        debug_assert!(!out.success || sector.syndrome(&out.estimate) == *s);
        out
    }
}
