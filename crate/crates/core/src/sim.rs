//! Depolarizing-noise sampling, logical-failure adjudication and the Monte
//! Carlo drivers built on them.
//!
//! Every trial draws from its own ChaCha stream, keyed by the run seed, the
//! sweep point and the trial index. Trials are evaluated in ordered batches
//! and the run stops at the exact trial that reaches the failure target, so
//! the worker count only changes how fast a result is produced, never the
//! result itself.

use std::collections::HashSet;
use std::time::Instant;

use itertools::Itertools;
use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codes::{CssCode, Sector};
use crate::decoders::{DecodeOutcome, DecoderSpec};
use crate::error::SimError;
use crate::gf2::{BitVector, RowSpace};

/// A Pauli error split into its X and Z components; `Y` sets both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliSample {
    pub x_part: BitVector,
    pub z_part: BitVector,
}

/// Each qubit independently: identity with probability `1 - p`, otherwise
/// X, Y or Z with probability `p / 3` each.
pub fn sample_depolarizing<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<PauliSample, SimError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(SimError::InvalidProbability(p));
    }
    let mut x_part = BitVector::zeros(n);
    let mut z_part = BitVector::zeros(n);
    for q in 0..n {
        if rng.random::<f64>() < p {
            match rng.random_range(0..3u8) {
                0 => x_part.set(q, true),
                1 => {
                    x_part.set(q, true);
                    z_part.set(q, true);
                }
                _ => z_part.set(q, true),
            }
        }
    }
    Ok(PauliSample { x_part, z_part })
}

/// True iff the residual `truth ⊕ estimate` acts nontrivially on the code
/// space, i.e. is not a product of the sector's stabilizers.
pub fn is_logical_failure(stabilizers: &RowSpace, truth: &BitVector, estimate: &BitVector) -> bool {
    !stabilizers.contains(&truth.xor(estimate))
}

/// Z-error adjudication against rowspace(`hz`). Rebuilds the echelon form on
/// every call; hot loops should use [`Sector::stabilizers`].
pub fn is_logical_failure_z(code: &CssCode, true_z: &BitVector, est_z: &BitVector) -> bool {
    is_logical_failure(&RowSpace::new(&code.hz), true_z, est_z)
}

/// Failure verdict for one sector decode: an unsuccessful decode always fails.
pub fn adjudicate(sector: &Sector, truth: &BitVector, outcome: &DecodeOutcome) -> bool {
    !outcome.success || is_logical_failure(sector.stabilizers(), truth, &outcome.estimate)
}

/// Which probability the decoders' uniform prior is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PriorMode {
    /// `2p/3`, the probability that a qubit carries a Z (or X) component.
    #[default]
    Marginal,
    /// The depolarizing rate `p` itself.
    RawP,
}

impl PriorMode {
    pub fn decoder_p(&self, p: f64) -> f64 {
        match self {
            PriorMode::Marginal => 2.0 * p / 3.0,
            PriorMode::RawP => p,
        }
    }
}

/// Which error components a trial decodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Sectors {
    #[default]
    Both,
    ZOnly,
}

/// Both decoding sectors of a code, precomputed once.
#[derive(Clone, Debug)]
pub struct CodeSectors {
    pub z: Sector,
    pub x: Sector,
}

impl CodeSectors {
    pub fn new(code: &CssCode) -> Self {
        Self {
            z: code.z_sector(),
            x: code.x_sector(),
        }
    }
}

/// Wilson score interval for `failures` out of `trials`.
pub fn wilson_interval(failures: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = failures as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// 97.5% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloConfig {
    pub failure_target: u64,
    pub max_trials: u64,
    pub seed: u64,
    pub workers: usize,
    pub prior: PriorMode,
    pub sectors: Sectors,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            failure_target: 100,
            max_trials: 1_000_000,
            seed: 0,
            workers: 1,
            prior: PriorMode::Marginal,
            sectors: Sectors::Both,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub p: f64,
    pub trials: u64,
    pub failures: u64,
    pub cer: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Mean BP iterations per sector decode.
    pub mean_bp_iterations: f64,
    pub wall_seconds: f64,
}

#[derive(Clone, Copy, Debug, Default)]
struct TrialResult {
    failed: bool,
    iterations: u64,
    decodes: u64,
}

fn point_seed(seed: u64, point: usize) -> u64 {
    seed ^ (point as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// RNG for trial `trial` of sweep point `point`.
pub fn trial_rng(seed: u64, point: usize, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(point_seed(seed, point));
    rng.set_stream(trial);
    rng
}

fn run_trial(
    sectors: &CodeSectors,
    decoder: &DecoderSpec,
    p: f64,
    cfg: &MonteCarloConfig,
    point: usize,
    trial: u64,
) -> TrialResult {
    let mut rng = trial_rng(cfg.seed, point, trial);
    let n = sectors.z.n();
    let sample = sample_depolarizing(n, p, &mut rng).expect("p validated before the sweep");
    let decoder_seed = rng.next_u64();
    let p_dec = cfg.prior.decoder_p(p);

    let mut result = TrialResult::default();
    let mut decode = |sector: &Sector, truth: &BitVector, seed: u64| {
        let s = sector.syndrome(truth);
        let out = decoder.decode(sector, &s, p_dec, seed);
        result.iterations += out.bp_iterations;
        result.decodes += 1;
        result.failed |= adjudicate(sector, truth, &out);
    };
    decode(&sectors.z, &sample.z_part, decoder_seed);
    if cfg.sectors == Sectors::Both {
        decode(&sectors.x, &sample.x_part, decoder_seed.rotate_left(32));
    }
    result
}

fn build_pool(workers: usize) -> Option<rayon::ThreadPool> {
    (workers > 1).then(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool")
    })
}

fn map_ordered<T, R, F>(pool: Option<&rayon::ThreadPool>, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match pool {
        Some(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        None => items.iter().map(f).collect(),
    }
}

/// Estimates the codeword error rate at every `p`, stopping each point at
/// `failure_target` failures or `max_trials` trials.
pub fn run_monte_carlo(
    code: &CssCode,
    decoder: &DecoderSpec,
    p_list: &[f64],
    cfg: &MonteCarloConfig,
) -> Result<Vec<SweepPoint>, SimError> {
    if cfg.failure_target == 0 {
        return Err(SimError::ZeroFailureTarget);
    }
    if let Some(&bad) = p_list.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(SimError::InvalidProbability(bad));
    }
    decoder.validate(code.n)?;
    let sectors = CodeSectors::new(code);
    let pool = build_pool(cfg.workers);
    let batch = 64 * cfg.workers.max(1) as u64;

    let mut points = Vec::with_capacity(p_list.len());
    for (point, &p) in p_list.iter().enumerate() {
        let started = Instant::now();
        let (mut trials, mut failures, mut iterations, mut decodes) = (0u64, 0u64, 0u64, 0u64);
        'outer: while trials < cfg.max_trials && failures < cfg.failure_target {
            let end = (trials + batch).min(cfg.max_trials);
            let ids: Vec<u64> = (trials..end).collect();
            let results = map_ordered(pool.as_ref(), &ids, |&trial| {
                run_trial(&sectors, decoder, p, cfg, point, trial)
            });
            for r in results {
                trials += 1;
                iterations += r.iterations;
                decodes += r.decodes;
                if r.failed {
                    failures += 1;
                    if failures >= cfg.failure_target {
                        break 'outer;
                    }
                }
            }
        }
        let cer = if trials == 0 { 0.0 } else { failures as f64 / trials as f64 };
        let (ci_low, ci_high) = wilson_interval(failures, trials, Z_95);
        points.push(SweepPoint {
            p,
            trials,
            failures,
            cer,
            ci_low,
            ci_high,
            mean_bp_iterations: if decodes == 0 { 0.0 } else { iterations as f64 / decodes as f64 },
            wall_seconds: started.elapsed().as_secs_f64(),
        });
    }
    Ok(points)
}

/// CSV header of [`sweep_csv_row`].
pub const SWEEP_CSV_HEADER: &str = "code,decoder,p,trials,failures,cer,ci_low,ci_high,mean_bp_iters,wall_seconds,seed";

pub fn sweep_csv_row(code: &str, decoder: &str, seed: u64, pt: &SweepPoint) -> String {
    format!(
        "{code},{decoder},{},{},{},{:.6e},{:.6e},{:.6e},{:.4},{:.3},{seed}",
        pt.p, pt.trials, pt.failures, pt.cer, pt.ci_low, pt.ci_high, pt.mean_bp_iterations, pt.wall_seconds
    )
}

/// `C(n, k)`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// How patterns of one weight are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightMode {
    Exhaustive,
    /// Distinct uniformly random patterns; all of them when fewer exist.
    Sampled(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyPlan {
    pub weights: Vec<(usize, WeightMode)>,
    pub seed: u64,
    /// Upper bound on patterns enumerated exhaustively.
    pub budget: u128,
}

pub const DEFAULT_VERIFY_BUDGET: u128 = 5_000_000;

impl VerifyPlan {
    /// Every pattern of weight `1..=t`.
    pub fn exhaustive(t: usize) -> Self {
        Self {
            weights: (1..=t).map(|w| (w, WeightMode::Exhaustive)).collect(),
            seed: 0,
            budget: DEFAULT_VERIFY_BUDGET,
        }
    }

    /// `samples` patterns split evenly over weights `1..=t` on `n` qubits.
    /// Weights with fewer patterns than their share are enumerated and the
    /// unused share passes to the heavier weights.
    pub fn sampled(n: usize, t: usize, samples: usize, seed: u64) -> Self {
        let t = t.max(1);
        let mut remaining = samples;
        let weights = (1..=t)
            .map(|w| {
                let share = remaining.div_ceil(t - w + 1);
                let take = binomial(n, w).min(share as u128) as usize;
                remaining -= take;
                (w, WeightMode::Sampled(take))
            })
            .collect();
        Self {
            weights,
            seed,
            budget: DEFAULT_VERIFY_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightReport {
    pub weight: usize,
    pub exhaustive: bool,
    pub checked: usize,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub code: String,
    pub decoder: String,
    pub per_weight: Vec<WeightReport>,
    /// Every failing pattern as a sorted list of qubit indices.
    pub failing: Vec<Vec<usize>>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failing.is_empty()
    }

    pub fn checked(&self) -> usize {
        self.per_weight.iter().map(|w| w.checked).sum()
    }

    /// Plain-text report: a summary block, then one failing pattern per line.
    pub fn render(&self) -> String {
        let mut out = format!("code: {}\ndecoder: {}\n", self.code, self.decoder);
        for w in &self.per_weight {
            out += &format!(
                "weight {}: {} patterns ({}), {} failures\n",
                w.weight,
                w.checked,
                if w.exhaustive { "exhaustive" } else { "sampled" },
                w.failures
            );
        }
        out += &format!(
            "result: {} ({} failing of {} patterns)\n",
            if self.passed() { "PASS" } else { "FAIL" },
            self.failing.len(),
            self.checked()
        );
        if !self.failing.is_empty() {
            out += "failing patterns:\n";
            for pat in &self.failing {
                out += &pat.iter().map(usize::to_string).join(" ");
                out += "\n";
            }
        }
        out
    }
}

/// Patterns of weight `w` on `n` qubits per `mode`, plus whether the set is complete.
pub fn weight_patterns(n: usize, w: usize, mode: WeightMode, seed: u64, budget: u128) -> Result<(Vec<Vec<usize>>, bool), SimError> {
    if w > n {
        return Err(SimError::WeightTooLarge { weight: w, n });
    }
    let total = binomial(n, w);
    let enumerate = match mode {
        WeightMode::Exhaustive => {
            if total > budget {
                return Err(SimError::BudgetExceeded { patterns: total, budget });
            }
            true
        }
        WeightMode::Sampled(count) => total <= count as u128,
    };
    if enumerate {
        return Ok(((0..n).combinations(w).collect(), true));
    }
    let WeightMode::Sampled(count) = mode else { unreachable!() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (w as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93));
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut pat = index::sample(&mut rng, n, w).into_vec();
        pat.sort_unstable();
        if seen.insert(pat.clone()) {
            out.push(pat);
        }
    }
    Ok((out, false))
}

/// Decoder seed for the `index`-th pattern of a verification or table run.
fn pattern_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn decode_pattern(sector: &Sector, decoder: &DecoderSpec, p: f64, seed: u64, pattern: &[usize]) -> (bool, u64) {
    let truth = BitVector::from_support(sector.n(), pattern);
    let s = sector.syndrome(&truth);
    let out = decoder.decode(sector, &s, p, seed);
    (adjudicate(sector, &truth, &out), out.bp_iterations)
}

/// Decodes Z-error patterns chosen by `plan` and lists every logical failure.
/// `p` is the probability the decoder prior is built from.
pub fn verify_up_to_t(
    code: &CssCode,
    decoder: &DecoderSpec,
    p: f64,
    plan: &VerifyPlan,
    workers: usize,
) -> Result<VerifyReport, SimError> {
    decoder.validate(code.n)?;
    let sector = code.z_sector();
    let pool = build_pool(workers);
    let mut per_weight = Vec::new();
    let mut failing = Vec::new();
    for &(w, mode) in &plan.weights {
        let (patterns, exhaustive) = weight_patterns(code.n, w, mode, plan.seed, plan.budget)?;
        let indexed: Vec<_> = patterns.iter().enumerate().collect();
        let verdicts = map_ordered(pool.as_ref(), &indexed, |&(i, pat)| {
            decode_pattern(&sector, decoder, p, pattern_seed(plan.seed, i), pat).0
        });
        let mut count = 0;
        for (pat, failed) in patterns.iter().zip(verdicts) {
            if failed {
                count += 1;
                failing.push(pat.clone());
            }
        }
        per_weight.push(WeightReport {
            weight: w,
            exhaustive,
            checked: patterns.len(),
            failures: count,
        });
    }
    Ok(VerifyReport {
        code: code.label(),
        decoder: decoder.name().to_string(),
        per_weight,
        failing,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRow {
    pub n_e: usize,
    pub patterns: usize,
    pub exhaustive: bool,
    pub mean_bp_iterations: f64,
    /// Fraction of patterns ending in a logical failure.
    pub failure_rate: f64,
}

/// Mean BP iterations over Z patterns of each weight in `n_e_list`; all
/// patterns when there are at most `samples_per_weight`, otherwise that many
/// uniformly random ones.
pub fn iteration_table(
    code: &CssCode,
    decoder: &DecoderSpec,
    p: f64,
    n_e_list: &[usize],
    samples_per_weight: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<IterationRow>, SimError> {
    decoder.validate(code.n)?;
    let sector = code.z_sector();
    let pool = build_pool(workers);
    let mut rows = Vec::with_capacity(n_e_list.len());
    for &n_e in n_e_list {
        if n_e > code.n {
            return Err(SimError::WeightTooLarge { weight: n_e, n: code.n });
        }
        let exhaustive = binomial(code.n, n_e) <= samples_per_weight as u128;
        let patterns: Vec<Vec<usize>> = if exhaustive {
            (0..code.n).combinations(n_e).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n_e as u64).wrapping_mul(0xA076_1D64_78BD_642F));
            (0..samples_per_weight)
                .map(|_| index::sample(&mut rng, code.n, n_e).into_vec())
                .collect()
        };
        let indexed: Vec<_> = patterns.iter().enumerate().collect();
        let results = map_ordered(pool.as_ref(), &indexed, |&(i, pat)| {
            decode_pattern(&sector, decoder, p, pattern_seed(seed, i), pat)
        });
        let count = results.len().max(1) as f64;
        rows.push(IterationRow {
            n_e,
            patterns: results.len(),
            exhaustive,
            mean_bp_iterations: results.iter().map(|r| r.1 as f64).sum::<f64>() / count,
            failure_rate: results.iter().filter(|r| r.0).count() as f64 / count,
        });
    }
    Ok(rows)
}
