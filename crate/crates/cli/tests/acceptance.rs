//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the target fails if any criterion does.

use std::collections::VecDeque;
use std::process::ExitCode;
use std::time::Instant;

use qldpc::bp::{run_bp, AlphaSchedule, BpConfig, TannerGraph};
use qldpc::codes::{build_hgp, build_surface, builtin, default_eta, repetition};
use qldpc::decoders::{decode_restart_belief, osd_postprocess, OsdParams, RestartBeliefParams};
use qldpc::sim::{iteration_table, run_monte_carlo, MonteCarloConfig, PriorMode, SweepPoint};
use qldpc::{BitVector, DecoderSpec, SparseBitMatrix};
use qldpc_cli::main_with_args;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn cli(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("qldpc").chain(args.iter().copied());
    let code = main_with_args(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn summary_of(report: &str) -> String {
    report
        .lines()
        .find(|l| l.starts_with("result:"))
        .unwrap_or("no result line")
        .to_string()
}

fn decoder_p() -> f64 {
    PriorMode::Marginal.decoder_p(0.01)
}

fn rb(name: &str) -> DecoderSpec {
    DecoderSpec::RestartBelief(RestartBeliefParams::with_eta(default_eta(name).unwrap()))
}

fn correction_guarantee() -> Verdict {
    let runs: [(&str, &[&str]); 6] = [
        ("surface-d3", &["--eta", "13"]),
        ("surface-d5", &["--eta", "41"]),
        ("gb-48", &["--eta", "48"]),
        ("surface-d7", &["--eta", "8"]),
        ("hgp-145", &["--eta", "6", "--max-weight", "2", "--sample-weight", "3:100000"]),
        ("gross", &["--eta", "35", "--mode", "sampled", "--samples", "10000"]),
    ];
    let mut notes = Vec::new();
    let mut ok = true;
    for (code, extra) in runs {
        let mut args = vec!["verify", "--code", code, "--decoder", "rb"];
        args.extend_from_slice(extra);
        let (status, out, err) = cli(&args);
        ok &= status == 0;
        let line = if status == 2 { err.trim().to_string() } else { summary_of(&out) };
        notes.push(format!("{code} {line}"));
    }
    let text = notes.join("; ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

fn mean_iterations(name: &str, n_e: usize, samples: usize) -> f64 {
    let code = builtin(name, None).unwrap();
    let rows = iteration_table(&code, &rb(name), decoder_p(), &[n_e], samples, 0, 1).unwrap();
    rows[0].mean_bp_iterations
}

fn weight_one_exact() -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, expected) in [("gb-48", 1.0), ("gross", 1.0), ("surface-d7", 2.0)] {
        let code = builtin(name, None).unwrap();
        let mean = mean_iterations(name, 1, code.n);
        ok &= format!("{mean:.3}") == format!("{expected:.3}");
        notes.push(format!("{name} {mean:.3} (want {expected:.3})"));
    }
    let text = notes.join(", ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

fn higher_weight_trend() -> Verdict {
    let targets = [
        ("gross", 2, 1.102),
        ("gross", 3, 1.577),
        ("gross", 4, 2.545),
        ("gross", 5, 3.249),
        ("gb-48", 2, 5.085),
    ];
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, n_e, target) in targets {
        let mean = mean_iterations(name, n_e, 10_000);
        let within = (mean - target).abs() <= 0.3 * target;
        ok &= within;
        notes.push(format!("{name} n_e={n_e} {mean:.3} vs {target}"));
    }
    let text = notes.join(", ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

fn decoder_ordering() -> Verdict {
    let points = [("gross", 0.05), ("gb-48", 0.03), ("surface-d7", 0.02), ("hgp-145", 0.02)];
    let cfg = MonteCarloConfig {
        failure_target: 100,
        max_trials: 2_000_000,
        seed: 1,
        ..MonteCarloConfig::default()
    };
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, p) in points {
        let code = builtin(name, None).unwrap();
        let run = |d: DecoderSpec| -> SweepPoint { run_monte_carlo(&code, &d, &[p], &cfg).unwrap().remove(0) };
        let bp = run(DecoderSpec::Bp(BpConfig::default()));
        let gd = run(DecoderSpec::Bpgd(BpConfig::default()));
        let rb = run(rb(name));
        let in_range = (0.01..=0.2).contains(&bp.cer);
        let ordered = rb.cer <= gd.cer && gd.cer <= bp.cer * 1.1;
        let separated = rb.cer < bp.cer && rb.ci_high < bp.ci_low;
        let pass = in_range && ordered && separated;
        ok &= pass;
        notes.push(format!(
            "{name} p={p} bp {:.4} bpgd {:.4} rb {:.4} [{}]",
            bp.cer,
            gd.cer,
            rb.cer,
            if pass { "ok" } else { "violated" }
        ));
    }
    let text = notes.join("; ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

fn random_instance(rng: &mut ChaCha8Rng) -> (SparseBitMatrix, BitVector, Vec<f64>) {
    let rows = rng.random_range(1..=30);
    let cols = rng.random_range(2..=60);
    let density = rng.random_range(0.05..0.5);
    let supports: Vec<Vec<usize>> = (0..rows)
        .map(|_| (0..cols).filter(|_| rng.random_bool(density)).collect())
        .collect();
    let h = SparseBitMatrix::new(rows, cols, supports).unwrap();
    let e = BitVector::from_support(cols, &(0..cols).filter(|_| rng.random_bool(0.2)).collect::<Vec<_>>());
    let s = h.mat_vec(&e).unwrap();
    let llr = (0..cols).map(|_| rng.random_range(-10.0..10.0)).collect();
    (h, s, llr)
}

fn osd_consistency() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut inconsistent, mut heavier) = (0, 0);
    for _ in 0..10_000 {
        let (h, s, llr) = random_instance(&mut rng);
        let solve = |order| osd_postprocess(&h, &s, &llr, &OsdParams { order, lambda: 10 });
        let (e0, e2) = (solve(0), solve(2));
        if h.mat_vec(&e0).unwrap() != s || h.mat_vec(&e2).unwrap() != s {
            inconsistent += 1;
        }
        if e2.weight() > e0.weight() {
            heavier += 1;
        }
    }
    let text = format!("10000 instances, {inconsistent} inconsistent, {heavier} order-2 heavier than order-0");
    if inconsistent == 0 && heavier == 0 {
        Ok(text)
    } else {
        Err(text)
    }
}

fn random_tree(rng: &mut ChaCha8Rng, n_vars: usize, n_checks: usize) -> SparseBitMatrix {
    let mut placed_vars = vec![0usize];
    let mut placed_checks: Vec<usize> = Vec::new();
    let mut pending_vars: Vec<usize> = (1..n_vars).collect();
    let mut pending_checks: Vec<usize> = (0..n_checks).collect();
    let mut rows = vec![Vec::new(); n_checks];
    while !pending_vars.is_empty() || !pending_checks.is_empty() {
        let pick_check = if placed_checks.is_empty() || pending_vars.is_empty() {
            !pending_checks.is_empty()
        } else {
            !pending_checks.is_empty() && rng.random_bool(0.5)
        };
        if pick_check {
            let c = pending_checks.swap_remove(rng.random_range(0..pending_checks.len()));
            rows[c].push(placed_vars[rng.random_range(0..placed_vars.len())]);
            placed_checks.push(c);
        } else {
            let v = pending_vars.swap_remove(rng.random_range(0..pending_vars.len()));
            rows[placed_checks[rng.random_range(0..placed_checks.len())]].push(v);
            placed_vars.push(v);
        }
    }
    SparseBitMatrix::new(n_checks, n_vars, rows).unwrap()
}

fn diameter(h: &SparseBitMatrix) -> usize {
    let n = h.cols() + h.rows();
    let mut adj = vec![Vec::new(); n];
    for (c, row) in h.row_supports().iter().enumerate() {
        for &v in row {
            adj[v].push(h.cols() + c);
            adj[h.cols() + c].push(v);
        }
    }
    (0..n)
        .map(|start| {
            let mut dist = vec![usize::MAX; n];
            dist[start] = 0;
            let mut queue = VecDeque::from([start]);
            let mut far = 0;
            while let Some(u) = queue.pop_front() {
                far = far.max(dist[u]);
                for &w in &adj[u] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                }
            }
            far
        })
        .max()
        .unwrap_or(0)
}

fn most_likely(h: &SparseBitMatrix, s: &BitVector, llr: &[f64]) -> BitVector {
    let n = h.cols();
    (0u32..1 << n)
        .map(|mask| BitVector::from_support(n, &(0..n).filter(|&j| mask >> j & 1 == 1).collect::<Vec<_>>()))
        .filter(|e| h.mat_vec(e).unwrap() == *s)
        .min_by(|a, b| {
            let cost = |e: &BitVector| e.iter_ones().map(|j| llr[j]).sum::<f64>();
            cost(a).total_cmp(&cost(b))
        })
        .unwrap()
}

fn tree_exactness() -> Verdict {
    let mut agree = 0;
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n_vars = rng.random_range(2..=12);
        let n_checks = rng.random_range(1..n_vars);
        let h = random_tree(&mut rng, n_vars, n_checks);
        let llr: Vec<f64> = (0..n_vars)
            .map(|_| {
                let p: f64 = rng.random_range(0.02..0.45);
                ((1.0 - p) / p).ln()
            })
            .collect();
        let truth = BitVector::from_support(n_vars, &(0..n_vars).filter(|_| rng.random_bool(0.3)).collect::<Vec<_>>());
        let s = h.mat_vec(&truth).unwrap();
        let cfg = BpConfig {
            max_iters: diameter(&h).max(1),
            alpha: AlphaSchedule::Fixed(1.0),
            stop_on_syndrome: false,
            ..BpConfig::default()
        };
        let out = run_bp(&TannerGraph::new(&h), &s, &llr, &cfg);
        if out.converged && out.estimate == most_likely(&h, &s, &llr) {
            agree += 1;
        }
    }
    let text = format!("{agree}/50 trees match maximum likelihood");
    if agree == 50 {
        Ok(text)
    } else {
        Err(text)
    }
}

fn code_parameters() -> Verdict {
    let found = [
        ("surface-d7", build_surface(7).map(|c| (c.n, c.k)), (85, 1)),
        ("hgp rep3", build_hgp("rep3", &repetition(3), 3).map(|c| (c.n, c.k)), (13, 1)),
        ("gross", builtin("gross", None).map(|c| (c.n, c.k)), (144, 12)),
        ("gb-48", builtin("gb-48", None).map(|c| (c.n, c.k)), (48, 6)),
    ];
    let ok = found.iter().all(|(_, got, want)| got.as_ref().ok() == Some(want));
    let text = found
        .iter()
        .map(|(name, got, _)| match got {
            Ok((n, k)) => format!("{name} n={n} k={k}"),
            Err(e) => format!("{name} error: {e}"),
        })
        .collect::<Vec<_>>()
        .join(", ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

fn without_timing(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|line| {
            let mut cols: Vec<&str> = line.split(',').collect();
            cols[9] = "-";
            cols.join(",")
        })
        .collect()
}

fn determinism() -> Verdict {
    let base = [
        "simulate", "--code", "gb-48", "--decoder", "rb", "--p", "0.03,0.05", "--failures", "20", "--seed", "8",
    ];
    let run = |workers: &str| {
        let mut args = base.to_vec();
        args.extend(["--workers", workers]);
        let (status, out, err) = cli(&args);
        assert_eq!(status, 0, "{err}");
        out
    };
    let first = run("1");
    let second = run("1");
    let same_serial = without_timing(&first) == without_timing(&second);
    let same_parallel = without_timing(&first) == without_timing(&run("4"));

    // Branch evaluation order must not change individual decodes either.
    let code = builtin("gross", None).unwrap();
    let sector = code.z_sector();
    let seq = RestartBeliefParams::with_eta(35);
    let par = RestartBeliefParams {
        parallel_branches: true,
        ..seq.clone()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut same_branches = true;
    for _ in 0..200 {
        let pat = index::sample(&mut rng, code.n, 6).into_vec();
        let s = sector.syndrome(&BitVector::from_support(code.n, &pat));
        same_branches &= decode_restart_belief(&sector, &s, 0.01, &seq) == decode_restart_belief(&sector, &s, 0.01, &par);
    }
    let text = format!(
        "repeat run identical: {same_serial}, workers 1 vs 4 identical: {same_parallel}, parallel branches identical: {same_branches}"
    );
    if same_serial && same_parallel && same_branches {
        Ok(text)
    } else {
        Err(text)
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("correction guarantee up to t", correction_guarantee),
        ("weight-1 iteration counts", weight_one_exact),
        ("higher-weight iteration trend", higher_weight_trend),
        ("decoder ordering", decoder_ordering),
        ("OSD consistency", osd_consistency),
        ("min-sum exact on trees", tree_exactness),
        ("code parameters", code_parameters),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = format!("criterion {}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id.ends_with(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let started = Instant::now();
        let verdict = check();
        let secs = started.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("{id}: PASS {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("{id}: FAIL {name} ({secs:.1}s): {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
