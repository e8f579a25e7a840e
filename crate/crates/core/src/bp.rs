//! Scaled min-sum belief propagation on a Tanner graph.
//!
//! One iteration is a full check-node sweep followed by a full variable-node
//! sweep (flooding schedule). After every iteration the output LLRs are
//! hard-decided and the estimate is tested against the target syndrome.

use crate::gf2::{BitVector, SparseBitMatrix};

/// Default LLR clip magnitude. Large enough that clipping rarely binds in
/// practice; it only keeps min-sum arithmetic finite.
pub const DEFAULT_SATURATION: f64 = 1000.0;

/// Prior magnitude given to a decimated variable in BPGD.
pub const DECIMATION_LLR: f64 = 25.0;

/// `sign` with `sign(0) = +1`.
#[inline]
fn is_negative(x: f64) -> bool {
    x < 0.0
}

#[inline]
pub fn clip_llr(x: f64, saturation: f64) -> f64 {
    x.clamp(-saturation, saturation)
}

/// `log((1 - p) / p)`, with `p` kept away from 0 and 1.
pub fn prior_llr(p: f64) -> f64 {
    const EPS: f64 = 1e-15;
    let p = p.clamp(EPS, 1.0 - EPS);
    ((1.0 - p) / p).ln()
}

/// Bipartite check/variable adjacency with edge-indexed storage.
///
/// Edges are numbered in check-major order; `var_edges` lists, for each
/// variable, the ids of its incident edges.
#[derive(Clone, Debug)]
pub struct TannerGraph {
    n_checks: usize,
    n_vars: usize,
    check_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    var_ptr: Vec<usize>,
    var_edges: Vec<usize>,
    edge_check: Vec<usize>,
}

impl TannerGraph {
    pub fn new(h: &SparseBitMatrix) -> Self {
        let n_checks = h.rows();
        let n_vars = h.cols();
        let mut check_ptr = Vec::with_capacity(n_checks + 1);
        let mut edge_var = Vec::with_capacity(h.nnz());
        let mut edge_check = Vec::with_capacity(h.nnz());
        check_ptr.push(0);
        for r in 0..n_checks {
            for &c in h.row(r) {
                edge_var.push(c);
                edge_check.push(r);
            }
            check_ptr.push(edge_var.len());
        }
        let mut degree = vec![0usize; n_vars];
        for &v in &edge_var {
            degree[v] += 1;
        }
        let mut var_ptr = Vec::with_capacity(n_vars + 1);
        var_ptr.push(0);
        for d in &degree {
            var_ptr.push(var_ptr.last().unwrap() + d);
        }
        let mut fill = var_ptr.clone();
        let mut var_edges = vec![0; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v]] = e;
            fill[v] += 1;
        }
        Self {
            n_checks,
            n_vars,
            check_ptr,
            edge_var,
            var_ptr,
            var_edges,
            edge_check,
        }
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_edges(&self) -> usize {
        self.edge_var.len()
    }

    /// Variables adjacent to check `c`.
    pub fn check_neighbors(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        self.edge_var[self.check_ptr[c]..self.check_ptr[c + 1]].iter().copied()
    }

    /// Checks adjacent to variable `v`.
    pub fn var_neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.var_edges[self.var_ptr[v]..self.var_ptr[v + 1]]
            .iter()
            .map(|&e| self.edge_check[e])
    }

    /// Syndrome of `estimate`.
    pub fn syndrome(&self, estimate: &BitVector) -> BitVector {
        let mut s = BitVector::zeros(self.n_checks);
        for c in 0..self.n_checks {
            if self.check_parity(c, estimate) {
                s.set(c, true);
            }
        }
        s
    }

    #[inline]
    fn check_parity(&self, c: usize, estimate: &BitVector) -> bool {
        self.check_neighbors(c).fold(false, |acc, v| acc ^ estimate.get(v))
    }

    fn matches_syndrome(&self, estimate: &BitVector, s: &BitVector) -> bool {
        (0..self.n_checks).all(|c| self.check_parity(c, estimate) == s.get(c))
    }
}

/// Scaling factor applied to check-to-variable messages.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaSchedule {
    Fixed(f64),
    /// `1 - 2^(-k)` at iteration `k` (counted from 1).
    Adaptive,
}

impl AlphaSchedule {
    pub fn at(&self, iteration: usize) -> f64 {
        match *self {
            AlphaSchedule::Fixed(a) => a,
            AlphaSchedule::Adaptive => 1.0 - 0.5f64.powi(iteration.min(1024) as i32),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BpConfig {
    pub max_iters: usize,
    pub alpha: AlphaSchedule,
    pub saturation: f64,
    /// Stop at the first iteration whose hard decision matches the syndrome.
    /// When false, all `max_iters` iterations run and only the last hard
    /// decision is checked.
    pub stop_on_syndrome: bool,
}

impl BpConfig {
    pub fn new(max_iters: usize) -> Self {
        Self {
            max_iters,
            ..Self::default()
        }
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }
}

impl Default for BpConfig {
    fn default() -> Self {
        Self {
            max_iters: 50,
            alpha: AlphaSchedule::Adaptive,
            saturation: DEFAULT_SATURATION,
            stop_on_syndrome: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BpOutcome {
    /// Hard decision of the converging iteration; all-zero when not converged.
    pub estimate: BitVector,
    pub out_llr: Vec<f64>,
    pub converged: bool,
    pub iterations_used: usize,
}

/// Check-to-variable message from the messages of all other neighbors.
///
/// An empty `incoming` (a degree-one check) yields the saturated value.
pub fn check_message(incoming: &[f64], syndrome_bit: bool, alpha: f64, saturation: f64) -> f64 {
    let flip = if syndrome_bit { -1.0 } else { 1.0 };
    if incoming.is_empty() {
        return flip * saturation;
    }
    let mut negative = false;
    let mut min = f64::INFINITY;
    for &m in incoming {
        negative ^= is_negative(m);
        min = min.min(m.abs());
    }
    let sign = if negative { -1.0 } else { 1.0 };
    clip_llr(flip * alpha * sign * min, saturation)
}

/// Variable-to-check message: prior plus the other incoming check messages.
pub fn variable_message(p_in: f64, incoming_other: &[f64], saturation: f64) -> f64 {
    clip_llr(p_in + incoming_other.iter().sum::<f64>(), saturation)
}

/// Output LLR and its hard decision (`true` = error). Zero decides "no error".
pub fn output_llr_and_decide(p_in: f64, incoming_all: &[f64], saturation: f64) -> (f64, bool) {
    let p_out = clip_llr(p_in + incoming_all.iter().sum::<f64>(), saturation);
    (p_out, is_negative(p_out))
}

/// Reusable message buffers for one BP instance at a time.
#[derive(Clone, Debug)]
pub struct BpWorkspace {
    c2v: Vec<f64>,
    v2c: Vec<f64>,
    totals: Vec<f64>,
}

impl BpWorkspace {
    pub fn new(graph: &TannerGraph) -> Self {
        Self {
            c2v: vec![0.0; graph.n_edges()],
            v2c: vec![0.0; graph.n_edges()],
            totals: vec![0.0; graph.n_vars()],
        }
    }

    /// Runs min-sum BP for at most `cfg.max_iters` iterations.
    pub fn run(
        &mut self,
        graph: &TannerGraph,
        syndrome: &BitVector,
        p_in: &[f64],
        cfg: &BpConfig,
    ) -> BpOutcome {
        assert_eq!(syndrome.len(), graph.n_checks(), "syndrome length mismatch");
        assert_eq!(p_in.len(), graph.n_vars(), "prior length mismatch");
        let sat = cfg.saturation;
        let n = graph.n_vars();

        if syndrome.is_zero() {
            return BpOutcome {
                estimate: BitVector::zeros(n),
                out_llr: p_in.iter().map(|&p| clip_llr(p, sat)).collect(),
                converged: true,
                iterations_used: 0,
            };
        }

        if self.c2v.len() != graph.n_edges() || self.totals.len() != n {
            *self = Self::new(graph);
        }
        for (e, &v) in graph.edge_var.iter().enumerate() {
            self.v2c[e] = clip_llr(p_in[v], sat);
            self.c2v[e] = 0.0;
        }

        let mut out_llr = vec![0.0; n];
        for iteration in 1..=cfg.max_iters {
            let alpha = cfg.alpha.at(iteration);
            self.check_sweep(graph, syndrome, alpha, sat);

            let mut estimate = BitVector::zeros(n);
            for v in 0..n {
                let edges = &graph.var_edges[graph.var_ptr[v]..graph.var_ptr[v + 1]];
                let total = p_in[v] + edges.iter().map(|&e| self.c2v[e]).sum::<f64>();
                self.totals[v] = total;
                let p_out = clip_llr(total, sat);
                out_llr[v] = p_out;
                if is_negative(p_out) {
                    estimate.set(v, true);
                }
                for &e in edges {
                    self.v2c[e] = clip_llr(total - self.c2v[e], sat);
                }
            }

            let last = iteration == cfg.max_iters;
            if (cfg.stop_on_syndrome || last) && graph.matches_syndrome(&estimate, syndrome) {
                debug_assert_eq!(graph.syndrome(&estimate), *syndrome);
                return BpOutcome {
                    estimate,
                    out_llr,
                    converged: true,
                    iterations_used: iteration,
                };
            }
        }

        BpOutcome {
            estimate: BitVector::zeros(n),
            out_llr,
            converged: false,
            iterations_used: cfg.max_iters,
        }
    }

    fn check_sweep(&mut self, graph: &TannerGraph, syndrome: &BitVector, alpha: f64, sat: f64) {
        for c in 0..graph.n_checks() {
            let (lo, hi) = (graph.check_ptr[c], graph.check_ptr[c + 1]);
            let flip = if syndrome.get(c) { -1.0 } else { 1.0 };
            if hi - lo == 1 {
                self.c2v[lo] = flip * sat;
                continue;
            }
            let mut negative = false;
            let mut min1 = f64::INFINITY;
            let mut min2 = f64::INFINITY;
            let mut min_edge = lo;
            for e in lo..hi {
                let m = self.v2c[e];
                negative ^= is_negative(m);
                let a = m.abs();
                if a < min1 {
                    min2 = min1;
                    min1 = a;
                    min_edge = e;
                } else if a < min2 {
                    min2 = a;
                }
            }
            for e in lo..hi {
                let own_negative = is_negative(self.v2c[e]);
                let sign = if negative ^ own_negative { -1.0 } else { 1.0 };
                let mag = if e == min_edge { min2 } else { min1 };
                self.c2v[e] = clip_llr(flip * alpha * sign * mag, sat);
            }
        }
    }
}

/// Runs one BP instance with freshly allocated buffers.
pub fn run_bp(graph: &TannerGraph, syndrome: &BitVector, p_in: &[f64], cfg: &BpConfig) -> BpOutcome {
    BpWorkspace::new(graph).run(graph, syndrome, p_in, cfg)
}
