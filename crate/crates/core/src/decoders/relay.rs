//! Relay BP: a chain of BP legs whose priors mix the channel prior with the
//! previous leg's output LLRs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bp::{clip_llr, AlphaSchedule, BpConfig, BpWorkspace, DEFAULT_SATURATION};
use crate::codes::Sector;
use crate::error::SimError;
use crate::gf2::BitVector;

use super::{uniform_prior, DecodeOutcome, Termination};

#[derive(Clone, Debug, PartialEq)]
pub struct RelayParams {
    /// Maximum number of BP legs, including the first.
    pub legs: usize,
    /// Iterations of the first leg.
    pub t1: usize,
    /// Iterations of every later leg.
    pub t2: usize,
    /// Stop once this many converged legs have been collected.
    pub candidates: usize,
    pub gamma_c: f64,
    pub gamma_w: f64,
    pub rng_seed: u64,
    /// Draw one memory weight per leg (shared by all variables) instead of
    /// one per variable per leg.
    pub gamma_per_leg: bool,
    pub alpha: AlphaSchedule,
    pub saturation: f64,
}

impl Default for RelayParams {
    fn default() -> Self {
        Self {
            legs: 301,
            t1: 80,
            t2: 60,
            candidates: 5,
            gamma_c: -0.24,
            gamma_w: 0.66,
            rng_seed: 0,
            gamma_per_leg: true,
            alpha: AlphaSchedule::Fixed(1.0),
            saturation: DEFAULT_SATURATION,
        }
    }
}

impl RelayParams {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.legs == 0 || self.t1 == 0 || self.t2 == 0 || self.candidates == 0 {
            return Err(SimError::InvalidParams(
                "relay legs, iterations and candidate quota must be at least 1".into(),
            ));
        }
        if self.t2 > self.t1 {
            return Err(SimError::InvalidParams(format!(
                "relay needs t2 <= t1, got t1 = {}, t2 = {}",
                self.t1, self.t2
            )));
        }
        if !(self.gamma_w >= 0.0) || !self.gamma_c.is_finite() {
            return Err(SimError::InvalidParams("gamma width must be non-negative".into()));
        }
        Ok(())
    }

    fn bp(&self, iters: usize) -> BpConfig {
        BpConfig {
            max_iters: iters,
            alpha: self.alpha,
            saturation: self.saturation,
            stop_on_syndrome: true,
        }
    }
}

fn draw_gamma(rng: &mut ChaCha8Rng, center: f64, width: f64) -> f64 {
    if width == 0.0 {
        center
    } else {
        center - width / 2.0 + width * rng.random::<f64>()
    }
}

/// Runs up to `legs` BP legs and returns the lightest converged estimate
/// (earliest on ties), or a failure when no leg converged.
pub fn decode_relay(sector: &Sector, s: &BitVector, p: f64, params: &RelayParams) -> DecodeOutcome {
    let n = sector.n();
    if s.is_zero() {
        return DecodeOutcome::found(BitVector::zeros(n), 0, Termination::RelayCandidate);
    }
    let base = uniform_prior(n, p, params.saturation);
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut ws = BpWorkspace::new(&sector.graph);
    let mut iterations = 0u64;
    let mut best: Option<BitVector> = None;
    let mut found = 0usize;

    let mut out = ws.run(&sector.graph, s, &base, &params.bp(params.t1));
    let later = params.bp(params.t2);
    let mut p_in = vec![0.0; n];
    for leg in 0..params.legs {
        if leg > 0 {
            let shared = params
                .gamma_per_leg
                .then(|| draw_gamma(&mut rng, params.gamma_c, params.gamma_w));
            for j in 0..n {
                let gamma = shared.unwrap_or_else(|| draw_gamma(&mut rng, params.gamma_c, params.gamma_w));
                p_in[j] = clip_llr((1.0 - gamma) * base[j] + gamma * out.out_llr[j], params.saturation);
            }
            out = ws.run(&sector.graph, s, &p_in, &later);
        }
        iterations += out.iterations_used as u64;
        if out.converged {
            found += 1;
            if best.as_ref().is_none_or(|b| out.estimate.weight() < b.weight()) {
                best = Some(out.estimate.clone());
            }
            if found >= params.candidates {
                break;
            }
        }
    }

    match best {
        Some(estimate) => DecodeOutcome::found(estimate, iterations, Termination::RelayCandidate),
        None => DecodeOutcome::failure(n, iterations),
    }
}
