//! Restart Belief decoding.
//!
//! A root BP instance runs first. If its answer cannot be accepted, its output
//! LLRs are sorted ascending and up to `eta` branches are explored. Branch `i`
//! forces an error on the `i`-th least reliable qubit, then keeps running short
//! BP instances against the residual syndrome, each time forcing one more error
//! at the lowest output LLR, until BP converges or `t` errors are forced.
//!
//! A consistent estimate is accepted immediately when its weight is at most
//! `t`, or when `w(s) / xi > t` proves the true error is heavier than `t`.
//! Otherwise the lightest consistent estimate seen is returned at the end.

use rayon::prelude::*;

use crate::bp::{AlphaSchedule, BpConfig, BpWorkspace, DEFAULT_SATURATION};
use crate::codes::Sector;
use crate::error::SimError;
use crate::gf2::BitVector;

use super::osd::reliability_order;
use super::{uniform_prior, DecodeOutcome, Termination};

#[derive(Clone, Debug, PartialEq)]
pub struct RestartBeliefParams {
    pub t_root: usize,
    pub t_branch: usize,
    /// Number of branches, at most the code length.
    pub eta: usize,
    pub alpha: AlphaSchedule,
    pub saturation: f64,
    /// Evaluate branches concurrently. The outcome is identical to sequential
    /// evaluation.
    pub parallel_branches: bool,
}

impl Default for RestartBeliefParams {
    fn default() -> Self {
        Self {
            t_root: 50,
            t_branch: 10,
            eta: 1,
            alpha: AlphaSchedule::Adaptive,
            saturation: DEFAULT_SATURATION,
            parallel_branches: false,
        }
    }
}

impl RestartBeliefParams {
    pub fn with_eta(eta: usize) -> Self {
        Self {
            eta,
            ..Self::default()
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), SimError> {
        if self.t_root == 0 || self.t_branch == 0 {
            return Err(SimError::InvalidParams("T_root and T_branch must be at least 1".into()));
        }
        if self.eta == 0 || self.eta > n {
            return Err(SimError::InvalidParams(format!(
                "eta must be between 1 and n = {n}, got {}",
                self.eta
            )));
        }
        if self.saturation.is_nan() || self.saturation <= 0.0 {
            return Err(SimError::InvalidParams("saturation must be positive".into()));
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

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EarlyTermination {
    /// Weight at most `t`: no lighter consistent error exists.
    AcceptMinWeight,
    /// `w(s) / xi > t`: the true error is heavier than `t`.
    AcceptDefect,
    Reject,
}

/// Decides whether a syndrome-consistent estimate can be returned at once.
pub fn early_termination(estimate: &BitVector, s: &BitVector, t: usize, xi: usize) -> EarlyTermination {
    if estimate.weight() <= t {
        EarlyTermination::AcceptMinWeight
    } else if xi > 0 && s.weight() as f64 / xi as f64 > t as f64 {
        EarlyTermination::AcceptDefect
    } else {
        EarlyTermination::Reject
    }
}

fn accepted(rule: EarlyTermination) -> Option<Termination> {
    match rule {
        EarlyTermination::AcceptMinWeight => Some(Termination::DistanceRule),
        EarlyTermination::AcceptDefect => Some(Termination::DefectRule),
        EarlyTermination::Reject => None,
    }
}

struct Branch {
    candidate: BitVector,
    consistent: bool,
    iterations: u64,
}

fn run_branch(
    sector: &Sector,
    s: &BitVector,
    prior: &[f64],
    start: usize,
    params: &RestartBeliefParams,
    ws: &mut BpWorkspace,
) -> Branch {
    let n = sector.n();
    let cfg = params.bp(params.t_branch);
    let mut forced = BitVector::from_support(n, &[start]);
    let mut p_in = prior.to_vec();
    let mut estimate = BitVector::zeros(n);
    let mut iterations = 0u64;

    for _ in 0..sector.t.saturating_sub(1) {
        let residual = s.xor(&sector.syndrome(&forced));
        for j in forced.iter_ones() {
            p_in[j] = params.saturation;
        }
        let out = ws.run(&sector.graph, &residual, &p_in, &cfg);
        iterations += out.iterations_used as u64;
        if out.converged {
            estimate = out.estimate;
            break;
        }
        estimate = BitVector::zeros(n);
        let mut pick: Option<usize> = None;
        for j in (0..n).filter(|&j| !forced.get(j)) {
            if pick.is_none_or(|b| out.out_llr[j] < out.out_llr[b]) {
                pick = Some(j);
            }
        }
        match pick {
            Some(j) => forced.set(j, true),
            None => break,
        }
    }

    let candidate = estimate.xor(&forced);
    let consistent = sector.syndrome(&candidate) == *s;
    Branch {
        candidate,
        consistent,
        iterations,
    }
}

/// Restart Belief decoding of `s` with channel prior `p`. Deterministic.
pub fn decode_restart_belief(sector: &Sector, s: &BitVector, p: f64, params: &RestartBeliefParams) -> DecodeOutcome {
    let n = sector.n();
    let (t, xi) = (sector.t, sector.xi);
    let prior = uniform_prior(n, p, params.saturation);
    let mut ws = BpWorkspace::new(&sector.graph);

    let root = ws.run(&sector.graph, s, &prior, &params.bp(params.t_root));
    let mut iterations = root.iterations_used as u64;
    let mut best: Option<BitVector> = None;
    if root.converged {
        if let Some(term) = accepted(early_termination(&root.estimate, s, t, xi)) {
            return DecodeOutcome::found(root.estimate, iterations, term);
        }
        best = Some(root.estimate);
    }

    let order = reliability_order(&root.out_llr);
    let starts = &order[..params.eta.min(n)];

    // Folds one branch into the running state; returns the final outcome if
    // the branch triggers early termination.
    let mut absorb = |branch: Branch, iterations: &mut u64| -> Option<DecodeOutcome> {
        *iterations += branch.iterations;
        if !branch.consistent {
            return None;
        }
        if let Some(term) = accepted(early_termination(&branch.candidate, s, t, xi)) {
            return Some(DecodeOutcome::found(branch.candidate, *iterations, term));
        }
        if best.as_ref().is_none_or(|b| branch.candidate.weight() < b.weight()) {
            best = Some(branch.candidate);
        }
        None
    };

    if params.parallel_branches {
        let branches: Vec<Branch> = starts
            .par_iter()
            .map_init(
                || BpWorkspace::new(&sector.graph),
                |ws, &start| run_branch(sector, s, &prior, start, params, ws),
            )
            .collect();
        for branch in branches {
            if let Some(done) = absorb(branch, &mut iterations) {
                return done;
            }
        }
    } else {
        for &start in starts {
            let branch = run_branch(sector, s, &prior, start, params, &mut ws);
            if let Some(done) = absorb(branch, &mut iterations) {
                return done;
            }
        }
    }

    match best {
        Some(estimate) => DecodeOutcome::found(estimate, iterations, Termination::MinWeightFallback),
        None => DecodeOutcome::failure(n, iterations),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::build_surface;

    #[test]
    fn early_termination_boundaries() {
        let t = 3;
        let xi = 4;
        let s_small = BitVector::from_support(40, &(0..xi * t).collect::<Vec<_>>());
        let s_big = BitVector::from_support(40, &(0..xi * t + 1).collect::<Vec<_>>());
        let at_t = BitVector::from_support(10, &[0, 1, 2]);
        let above_t = BitVector::from_support(10, &[0, 1, 2, 3]);
        assert_eq!(early_termination(&at_t, &s_small, t, xi), EarlyTermination::AcceptMinWeight);
        assert_eq!(early_termination(&above_t, &s_big, t, xi), EarlyTermination::AcceptDefect);
        assert_eq!(early_termination(&above_t, &s_small, t, xi), EarlyTermination::Reject);
    }

    #[test]
    fn zero_syndrome() {
        let code = build_surface(3).unwrap();
        let sector = code.z_sector();
        let out = decode_restart_belief(
            &sector,
            &BitVector::zeros(sector.checks.rows()),
            0.05,
            &RestartBeliefParams::with_eta(3),
        );
        assert!(out.success);
        assert!(out.estimate.is_zero());
        assert_eq!(out.bp_iterations, 0);
    }

    #[test]
    fn branch_order_matches_parallel() {
        let code = build_surface(5).unwrap();
        let sector = code.z_sector();
        let seq = RestartBeliefParams::with_eta(10);
        let par = RestartBeliefParams {
            parallel_branches: true,
            ..seq.clone()
        };
        for (a, b) in [(0, 1), (3, 17), (6, 30), (11, 12)] {
            let e = BitVector::from_support(sector.n(), &[a, b]);
            let s = sector.syndrome(&e);
            assert_eq!(
                decode_restart_belief(&sector, &s, 0.05, &seq),
                decode_restart_belief(&sector, &s, 0.05, &par)
            );
        }
    }
}
