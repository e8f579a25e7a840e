//! Ordered statistics post-processing (OSD-0/1/2).

use crate::bp::{BpConfig, BpWorkspace};
use crate::codes::Sector;
use crate::gf2::{eliminate, BitVector, SparseBitMatrix};

use super::{uniform_prior, DecodeOutcome, Termination};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OsdParams {
    /// 0, 1 or 2.
    pub order: u8,
    /// Width of the weight-2 search over the least reliable excluded columns.
    pub lambda: usize,
}

impl Default for OsdParams {
    fn default() -> Self {
        Self { order: 2, lambda: 10 }
    }
}

/// Column indices sorted by ascending output LLR (most likely in error first).
/// Ties keep the lower index first.
pub fn reliability_order(out_llr: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..out_llr.len()).collect();
    order.sort_by(|&a, &b| out_llr[a].total_cmp(&out_llr[b]));
    order
}

/// OSD on the output LLRs of a BP run.
pub fn osd_postprocess(h: &SparseBitMatrix, s: &BitVector, out_llr: &[f64], params: &OsdParams) -> BitVector {
    osd_with_order(h, s, &reliability_order(out_llr), params)
}

/// OSD with an explicit column ordering, most likely erroneous column first.
///
/// `s` must lie in the column space of `h`.
pub fn osd_with_order(h: &SparseBitMatrix, s: &BitVector, order: &[usize], params: &OsdParams) -> BitVector {
    let n = h.cols();
    assert_eq!(order.len(), n, "ordering must cover every column");
    assert_eq!(s.len(), h.rows(), "syndrome length mismatch");

    let mut rows = h.to_dense_rows();
    let mut rhs = s.clone();
    // Greedy information set: a column is kept iff it raises the rank.
    let pivots = eliminate(&mut rows, order, Some(&mut rhs));
    let rank = pivots.len();
    debug_assert!(
        (rank..h.rows()).all(|r| !rhs.get(r)),
        "syndrome is not in the column space"
    );

    let assemble = |pivot_values: &BitVector, flipped: &[usize]| {
        let mut e = BitVector::zeros(n);
        for (r, &c) in pivots.iter().enumerate() {
            if pivot_values.get(r) {
                e.set(c, true);
            }
        }
        for &c in flipped {
            e.set(c, true);
        }
        e
    };

    let mut base = BitVector::zeros(rank);
    for r in 0..rank {
        if rhs.get(r) {
            base.set(r, true);
        }
    }
    if params.order == 0 || rank == n {
        return assemble(&base, &[]);
    }

    let mut is_pivot = vec![false; n];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let excluded: Vec<usize> = order.iter().copied().filter(|&c| !is_pivot[c]).collect();
    // Column c of the reduced system restricted to pivot rows: the change in the
    // pivot-bit solution when e_t has a one at c.
    let columns: Vec<BitVector> = excluded
        .iter()
        .map(|&c| {
            let mut col = BitVector::zeros(rank);
            for (r, row) in rows.iter().take(rank).enumerate() {
                if row.get(c) {
                    col.set(r, true);
                }
            }
            col
        })
        .collect();

    let mut best_weight = base.weight();
    let mut best: (Option<usize>, Option<usize>) = (None, None);
    for (i, col) in columns.iter().enumerate() {
        let w = base.xor(col).weight() + 1;
        if w < best_weight {
            best_weight = w;
            best = (Some(i), None);
        }
    }
    if params.order >= 2 {
        let width = params.lambda.min(excluded.len());
        for a in 0..width {
            let partial = base.xor(&columns[a]);
            for b in a + 1..width {
                let w = partial.xor(&columns[b]).weight() + 2;
                if w < best_weight {
                    best_weight = w;
                    best = (Some(a), Some(b));
                }
            }
        }
    }

    let mut values = base;
    let mut flipped = Vec::new();
    for i in [best.0, best.1].into_iter().flatten() {
        values.xor_assign(&columns[i]);
        flipped.push(excluded[i]);
    }
    assemble(&values, &flipped)
}

/// BP followed by OSD when BP does not converge.
pub fn decode_bp_osd(sector: &Sector, s: &BitVector, p: f64, cfg: &BpConfig, osd: &OsdParams) -> DecodeOutcome {
    let prior = uniform_prior(sector.n(), p, cfg.saturation);
    let out = BpWorkspace::new(&sector.graph).run(&sector.graph, s, &prior, cfg);
    let iterations = out.iterations_used as u64;
    if out.converged {
        return DecodeOutcome::found(out.estimate, iterations, Termination::RootConverged);
    }
    let estimate = osd_postprocess(&sector.checks, s, &out.out_llr, osd);
    DecodeOutcome::found(estimate, iterations, Termination::Osd)
}
