//! Min-sum with unit scaling is exact on cycle-free Tanner graphs: compared
//! against brute-force maximum-likelihood decoding.

use proptest::prelude::*;
use qldpc::bp::{run_bp, AlphaSchedule, BpConfig, TannerGraph};
use qldpc::{BitVector, SparseBitMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Parity-check matrix of a random connected cycle-free Tanner graph. Nodes
/// are attached one at a time to an already placed node of the other kind.
fn random_tree(rng: &mut ChaCha8Rng, n_vars: usize, n_checks: usize) -> SparseBitMatrix {
    let mut placed_vars = vec![0usize];
    let mut placed_checks: Vec<usize> = Vec::new();
    let mut pending_vars: Vec<usize> = (1..n_vars).collect();
    let mut pending_checks: Vec<usize> = (0..n_checks).collect();
    let mut rows = vec![Vec::new(); n_checks];
    while !pending_vars.is_empty() || !pending_checks.is_empty() {
        let pick_check = if placed_checks.is_empty() || pending_vars.is_empty() {
            !pending_checks.is_empty()
        } else if pending_checks.is_empty() {
            false
        } else {
            rng.random_bool(0.5)
        };
        if pick_check {
            let c = pending_checks.swap_remove(rng.random_range(0..pending_checks.len()));
            let v = placed_vars[rng.random_range(0..placed_vars.len())];
            rows[c].push(v);
            placed_checks.push(c);
        } else {
            let v = pending_vars.swap_remove(rng.random_range(0..pending_vars.len()));
            let c = placed_checks[rng.random_range(0..placed_checks.len())];
            rows[c].push(v);
            placed_vars.push(v);
        }
    }
    SparseBitMatrix::new(n_checks, n_vars, rows).unwrap()
}

/// Longest shortest path, in edges, of the Tanner graph.
fn diameter(h: &SparseBitMatrix) -> usize {
    let n = h.cols() + h.rows();
    let mut adj = vec![Vec::new(); n];
    for (c, row) in h.row_supports().iter().enumerate() {
        for &v in row {
            adj[v].push(h.cols() + c);
            adj[h.cols() + c].push(v);
        }
    }
    let mut best = 0;
    for start in 0..n {
        let mut dist = vec![usize::MAX; n];
        dist[start] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        best = best.max(dist.iter().filter(|&&d| d != usize::MAX).copied().max().unwrap_or(0));
    }
    best
}

/// The consistent error of largest prior probability, by enumeration.
fn brute_force(h: &SparseBitMatrix, s: &BitVector, llr: &[f64]) -> BitVector {
    let n = h.cols();
    let mut best: Option<(f64, BitVector)> = None;
    for mask in 0u32..(1 << n) {
        let e = BitVector::from_support(n, &(0..n).filter(|&j| mask >> j & 1 == 1).collect::<Vec<_>>());
        if h.mat_vec(&e).unwrap() != *s {
            continue;
        }
        let cost: f64 = e.iter_ones().map(|j| llr[j]).sum();
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, e));
        }
    }
    best.unwrap().1
}

fn check_tree(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_vars = rng.random_range(2..=12);
    let n_checks = rng.random_range(1..n_vars);
    let h = random_tree(&mut rng, n_vars, n_checks);
    let llr: Vec<f64> = (0..n_vars)
        .map(|_| {
            let p: f64 = rng.random_range(0.02..0.45);
            ((1.0 - p) / p).ln()
        })
        .collect();
    let truth = BitVector::from_support(
        n_vars,
        &(0..n_vars).filter(|_| rng.random_bool(0.3)).collect::<Vec<_>>(),
    );
    let s = h.mat_vec(&truth).unwrap();
    let expected = brute_force(&h, &s, &llr);
    let cfg = BpConfig {
        max_iters: diameter(&h).max(1),
        alpha: AlphaSchedule::Fixed(1.0),
        stop_on_syndrome: false,
        ..BpConfig::default()
    };
    let out = run_bp(&TannerGraph::new(&h), &s, &llr, &cfg);
    if out.converged && out.estimate == expected {
        Ok(())
    } else {
        Err(format!(
            "seed {seed}: H = {:?}, s = {:?}, bp = {:?} (converged {}), ml = {:?}",
            h.row_supports(),
            s.support(),
            out.estimate.support(),
            out.converged,
            expected.support()
        ))
    }
}

#[test]
fn fifty_random_trees() {
    let failures: Vec<String> = (0..50).filter_map(|seed| check_tree(seed).err()).collect();
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn min_sum_is_exact_on_trees(seed in any::<u64>()) {
        if let Err(msg) = check_tree(seed) {
            prop_assert!(false, "{}", msg);
        }
    }
}
