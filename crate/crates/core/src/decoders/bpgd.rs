//! BP with guided decimation.

use crate::bp::{BpConfig, BpWorkspace, DECIMATION_LLR};
use crate::codes::Sector;
use crate::gf2::BitVector;

use super::{uniform_prior, DecodeOutcome, Termination};

/// Runs successive BP instances. After each non-converging instance the
/// undecimated variable with the largest `|p_out|` is pinned to
/// `±DECIMATION_LLR` (its sign, capped at the saturation), and every other input LLR of the next
/// instance is the previous output LLR. Stops on convergence or once every
/// variable is pinned.
pub fn decode_bpgd(sector: &Sector, s: &BitVector, p: f64, cfg: &BpConfig) -> DecodeOutcome {
    let n = sector.n();
    let mut p_in = uniform_prior(n, p, cfg.saturation);
    let mut pinned: Vec<Option<f64>> = vec![None; n];
    let mut remaining = n;
    let mut ws = BpWorkspace::new(&sector.graph);
    let mut iterations = 0u64;

    loop {
        let out = ws.run(&sector.graph, s, &p_in, cfg);
        iterations += out.iterations_used as u64;
        if out.converged {
            let termination = if remaining == n {
                Termination::RootConverged
            } else {
                Termination::DecimationComplete
            };
            return DecodeOutcome::found(out.estimate, iterations, termination);
        }
        if remaining == 0 {
            return DecodeOutcome::failure(n, iterations);
        }

        let mut pick: Option<usize> = None;
        for j in (0..n).filter(|&j| pinned[j].is_none()) {
            if pick.is_none_or(|b| out.out_llr[j].abs() > out.out_llr[b].abs()) {
                pick = Some(j);
            }
        }
        let j = pick.expect("an undecimated variable remains");
        let pin = DECIMATION_LLR.min(cfg.saturation);
        pinned[j] = Some(if out.out_llr[j] > 0.0 { pin } else { -pin });
        remaining -= 1;

        for (k, slot) in p_in.iter_mut().enumerate() {
            *slot = pinned[k].unwrap_or(out.out_llr[k]);
        }
    }
}
