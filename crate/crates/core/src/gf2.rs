//! Binary linear algebra over GF(2).
//!
//! Matrices are stored sparsely (sorted column indices per row) at rest.
//! Elimination routines work on a dense bit-packed copy, which is the faster
//! choice for the code sizes handled here (a few hundred columns).

use std::fmt;

use crate::error::Gf2Error;

const WORD_BITS: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// Fixed-length bit vector, packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Builds a vector with ones at the listed positions. Repeated indices cancel.
    pub fn from_support(len: usize, support: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in support {
            v.flip(i);
        }
        v
    }

    /// Builds a vector from 0/1 entries; any nonzero entry is a one.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                v.set(i, true);
            }
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Parity of the overlap with `other`.
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "dot of vectors with different lengths");
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    /// Indices of the set bits, in increasing order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD_BITS + bit)
            })
        })
    }

    pub fn support(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }

    /// Index of the lowest set bit, if any.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(wi, &w)| wi * WORD_BITS + w.trailing_zeros() as usize)
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector[{}]{:?}", self.len, self.support())
    }
}

/// Sparse binary matrix: for every row, the sorted list of columns holding a one.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SparseBitMatrix {
    rows: usize,
    cols: usize,
    row_support: Vec<Vec<usize>>,
}

impl SparseBitMatrix {
    /// Validates and stores the row supports. Each list is sorted; duplicate or
    /// out-of-range column indices are rejected.
    pub fn new(rows: usize, cols: usize, row_support: Vec<Vec<usize>>) -> Result<Self, Gf2Error> {
        if row_support.len() != rows {
            return Err(Gf2Error::RowCount {
                expected: rows,
                found: row_support.len(),
            });
        }
        let mut row_support = row_support;
        for (r, row) in row_support.iter_mut().enumerate() {
            row.sort_unstable();
            for w in row.windows(2) {
                if w[0] == w[1] {
                    return Err(Gf2Error::DuplicateEntry { row: r, col: w[0] });
                }
            }
            if let Some(&last) = row.last() {
                if last >= cols {
                    return Err(Gf2Error::ColumnOutOfRange { row: r, col: last, cols });
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            row_support,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_support: vec![Vec::new(); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            row_support: (0..n).map(|i| vec![i]).collect(),
        }
    }

    /// Builds a matrix from dense 0/1 rows. All rows must have equal length.
    pub fn from_dense(dense: &[Vec<u8>]) -> Result<Self, Gf2Error> {
        let cols = dense.first().map_or(0, Vec::len);
        let mut support = Vec::with_capacity(dense.len());
        for (r, row) in dense.iter().enumerate() {
            if row.len() != cols {
                return Err(Gf2Error::RaggedRow {
                    row: r,
                    expected: cols,
                    found: row.len(),
                });
            }
            support.push(
                row.iter()
                    .enumerate()
                    .filter(|(_, &b)| b != 0)
                    .map(|(c, _)| c)
                    .collect(),
            );
        }
        Self::new(dense.len(), cols, support)
    }

    pub fn from_bit_rows(cols: usize, rows: &[BitVector]) -> Self {
        let support = rows
            .iter()
            .map(|r| {
                assert_eq!(r.len(), cols);
                r.support()
            })
            .collect::<Vec<_>>();
        Self {
            rows: rows.len(),
            cols,
            row_support: support,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[usize] {
        &self.row_support[r]
    }

    pub fn row_supports(&self) -> &[Vec<usize>] {
        &self.row_support
    }

    pub fn nnz(&self) -> usize {
        self.row_support.iter().map(Vec::len).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.row_support[r].binary_search(&c).is_ok()
    }

    pub fn is_zero(&self) -> bool {
        self.row_support.iter().all(Vec::is_empty)
    }

    pub fn row_vector(&self, r: usize) -> BitVector {
        BitVector::from_support(self.cols, &self.row_support[r])
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.row_support
            .iter()
            .map(|row| {
                let mut d = vec![0u8; self.cols];
                for &c in row {
                    d[c] = 1;
                }
                d
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut support = vec![Vec::new(); self.cols];
        for (r, row) in self.row_support.iter().enumerate() {
            for &c in row {
                support[c].push(r);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            row_support: support,
        }
    }

    /// Number of ones in every column.
    pub fn column_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.cols];
        for row in &self.row_support {
            for &c in row {
                w[c] += 1;
            }
        }
        w
    }

    pub fn max_column_weight(&self) -> usize {
        self.column_weights().into_iter().max().unwrap_or(0)
    }

    /// `M v` over GF(2).
    pub fn mat_vec(&self, v: &BitVector) -> Result<BitVector, Gf2Error> {
        if v.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut out = BitVector::zeros(self.rows);
        for (r, row) in self.row_support.iter().enumerate() {
            let parity = row.iter().fold(false, |acc, &c| acc ^ v.get(c));
            if parity {
                out.set(r, true);
            }
        }
        Ok(out)
    }

    /// Matrix product `self * other` over GF(2).
    pub fn mul(&self, other: &SparseBitMatrix) -> Result<SparseBitMatrix, Gf2Error> {
        if self.cols != other.rows {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let rows = self
            .row_support
            .iter()
            .map(|row| {
                let mut acc = BitVector::zeros(other.cols);
                for &k in row {
                    for &c in &other.row_support[k] {
                        acc.flip(c);
                    }
                }
                acc.support()
            })
            .collect();
        Ok(SparseBitMatrix {
            rows: self.rows,
            cols: other.cols,
            row_support: rows,
        })
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &SparseBitMatrix) -> SparseBitMatrix {
        let mut support = Vec::with_capacity(self.rows * other.rows);
        for a_row in &self.row_support {
            for b_row in &other.row_support {
                let mut row = Vec::with_capacity(a_row.len() * b_row.len());
                for &ac in a_row {
                    for &bc in b_row {
                        row.push(ac * other.cols + bc);
                    }
                }
                support.push(row);
            }
        }
        SparseBitMatrix {
            rows: self.rows * other.rows,
            cols: self.cols * other.cols,
            row_support: support,
        }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &SparseBitMatrix) -> Result<SparseBitMatrix, Gf2Error> {
        if self.rows != other.rows {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.rows,
                found: other.rows,
            });
        }
        let support = self
            .row_support
            .iter()
            .zip(&other.row_support)
            .map(|(a, b)| a.iter().copied().chain(b.iter().map(|c| c + self.cols)).collect())
            .collect();
        Ok(SparseBitMatrix {
            rows: self.rows,
            cols: self.cols + other.cols,
            row_support: support,
        })
    }

    /// Sum over GF(2) of two matrices of equal shape.
    pub fn add(&self, other: &SparseBitMatrix) -> Result<SparseBitMatrix, Gf2Error> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        let rows = self
            .row_support
            .iter()
            .zip(&other.row_support)
            .map(|(a, b)| {
                let mut v = BitVector::from_support(self.cols, a);
                for &c in b {
                    v.flip(c);
                }
                v.support()
            })
            .collect();
        Ok(SparseBitMatrix {
            rows: self.rows,
            cols: self.cols,
            row_support: rows,
        })
    }

    pub fn to_dense_rows(&self) -> Vec<BitVector> {
        (0..self.rows).map(|r| self.row_vector(r)).collect()
    }

    /// GF(2) rank.
    pub fn rank(&self) -> usize {
        let mut rows = self.to_dense_rows();
        let order: Vec<usize> = (0..self.cols).collect();
        eliminate(&mut rows, &order, None).len()
    }

    /// Solves `M x = b` for a square full-rank `M`.
    pub fn solve_square(&self, b: &BitVector) -> Result<BitVector, Gf2Error> {
        if self.rows != self.cols {
            return Err(Gf2Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if b.len() != self.rows {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.rows,
                found: b.len(),
            });
        }
        let mut rows = self.to_dense_rows();
        let mut rhs = b.clone();
        let order: Vec<usize> = (0..self.cols).collect();
        let pivots = eliminate(&mut rows, &order, Some(&mut rhs));
        if pivots.len() < self.rows {
            return Err(Gf2Error::Singular {
                rank: pivots.len(),
                size: self.rows,
            });
        }
        let mut x = BitVector::zeros(self.cols);
        for (r, &c) in pivots.iter().enumerate() {
            if rhs.get(r) {
                x.set(c, true);
            }
        }
        Ok(x)
    }

    /// True iff `v` is a GF(2) combination of the rows.
    ///
    /// Builds a fresh echelon form; use [`RowSpace`] for repeated queries.
    pub fn in_row_space(&self, v: &BitVector) -> bool {
        RowSpace::new(self).contains(v)
    }
}

/// Gauss-Jordan elimination on dense rows, visiting columns in `column_order`.
///
/// On return, the first `pivots.len()` rows form a reduced basis: row `r` has
/// its pivot at column `pivots[r]`, and every pivot column is zero in all other
/// rows. Remaining rows are zero. Row swaps and additions are mirrored on `rhs`.
pub fn eliminate(
    rows: &mut [BitVector],
    column_order: &[usize],
    mut rhs: Option<&mut BitVector>,
) -> Vec<usize> {
    let mut pivots = Vec::new();
    let n_rows = rows.len();
    for &col in column_order {
        let next = pivots.len();
        if next == n_rows {
            break;
        }
        let Some(found) = (next..n_rows).find(|&r| rows[r].get(col)) else {
            continue;
        };
        if found != next {
            rows.swap(found, next);
            if let Some(b) = rhs.as_deref_mut() {
                let (x, y) = (b.get(found), b.get(next));
                b.set(found, y);
                b.set(next, x);
            }
        }
        let (head, tail) = rows.split_at_mut(next);
        let pivot_row = &tail[0];
        let pivot_rhs = rhs.as_deref().map(|b| b.get(next));
        for (r, row) in head.iter_mut().enumerate() {
            if row.get(col) {
                row.xor_assign(pivot_row);
                if let (Some(b), Some(true)) = (rhs.as_deref_mut(), pivot_rhs) {
                    b.flip(r);
                }
            }
        }
        let (pivot_slice, below) = tail.split_at_mut(1);
        let pivot_row = &pivot_slice[0];
        for (offset, row) in below.iter_mut().enumerate() {
            if row.get(col) {
                row.xor_assign(pivot_row);
                if let (Some(b), Some(true)) = (rhs.as_deref_mut(), pivot_rhs) {
                    b.flip(next + 1 + offset);
                }
            }
        }
        pivots.push(col);
    }
    pivots
}

/// Cached row-echelon basis of a matrix's row space, for repeated membership tests.
#[derive(Clone, Debug)]
pub struct RowSpace {
    cols: usize,
    // (pivot column, basis row), pivots increasing; each row's lowest set bit is its pivot
    basis: Vec<(usize, BitVector)>,
}

impl RowSpace {
    pub fn new(m: &SparseBitMatrix) -> Self {
        let mut rows = m.to_dense_rows();
        let order: Vec<usize> = (0..m.cols()).collect();
        let pivots = eliminate(&mut rows, &order, None);
        let basis = pivots.iter().copied().zip(rows).collect();
        Self {
            cols: m.cols(),
            basis,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Reduces `v` against the basis; the remainder is zero iff `v` is in the space.
    pub fn reduce(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.cols, "vector length does not match row space");
        let mut rest = v.clone();
        for (pivot, row) in &self.basis {
            if rest.get(*pivot) {
                rest.xor_assign(row);
            }
        }
        rest
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        self.reduce(v).is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[u8]]) -> SparseBitMatrix {
        SparseBitMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn v(bits: &[u8]) -> BitVector {
        BitVector::from_bits(bits)
    }

    #[test]
    fn mat_vec_examples() {
        let a = m(&[&[1, 1, 0], &[0, 1, 1]]);
        assert_eq!(a.mat_vec(&v(&[1, 0, 0])).unwrap(), v(&[1, 0]));
        assert_eq!(a.mat_vec(&v(&[0, 0, 0])).unwrap(), v(&[0, 0]));
        let b = m(&[&[1, 0, 1], &[0, 1, 1]]);
        assert_eq!(b.mat_vec(&v(&[0, 0, 1])).unwrap(), v(&[1, 1]));
    }

    #[test]
    fn mat_vec_rejects_wrong_length() {
        let a = m(&[&[1, 1, 0]]);
        assert!(matches!(
            a.mat_vec(&v(&[1, 0])),
            Err(Gf2Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(SparseBitMatrix::identity(3).rank(), 3);
        assert_eq!(m(&[&[1, 1], &[1, 1]]).rank(), 1);
        assert_eq!(m(&[&[1, 1, 0], &[0, 1, 1], &[1, 0, 1]]).rank(), 2);
        assert_eq!(SparseBitMatrix::zeros(4, 5).rank(), 0);
    }

    #[test]
    fn solve_square_examples() {
        let id = SparseBitMatrix::identity(3);
        assert_eq!(id.solve_square(&v(&[1, 0, 1])).unwrap(), v(&[1, 0, 1]));
        assert_eq!(m(&[&[1, 1], &[1, 0]]).solve_square(&v(&[1, 1])).unwrap(), v(&[1, 0]));
        assert_eq!(m(&[&[1, 0], &[1, 1]]).solve_square(&v(&[0, 0])).unwrap(), v(&[0, 0]));
    }

    #[test]
    fn solve_square_singular() {
        let err = m(&[&[1, 1], &[1, 1]]).solve_square(&v(&[1, 1])).unwrap_err();
        assert!(matches!(err, Gf2Error::Singular { rank: 1, size: 2 }));
    }

    #[test]
    fn row_space_examples() {
        let a = m(&[&[1, 1, 0], &[0, 1, 1]]);
        assert!(a.in_row_space(&v(&[0, 0, 0])));
        assert!(a.in_row_space(&v(&[1, 0, 1])));
        assert!(!a.in_row_space(&v(&[1, 0, 0])));
        assert!(SparseBitMatrix::zeros(2, 3).in_row_space(&v(&[0, 0, 0])));
    }

    #[test]
    fn new_rejects_bad_rows() {
        assert!(matches!(
            SparseBitMatrix::new(1, 3, vec![vec![0, 0]]),
            Err(Gf2Error::DuplicateEntry { row: 0, col: 0 })
        ));
        assert!(matches!(
            SparseBitMatrix::new(1, 3, vec![vec![3]]),
            Err(Gf2Error::ColumnOutOfRange { .. })
        ));
        let sorted = SparseBitMatrix::new(1, 4, vec![vec![3, 0, 2]]).unwrap();
        assert_eq!(sorted.row(0), &[0, 2, 3]);
    }

    #[test]
    fn kron_and_hstack() {
        let a = m(&[&[1, 1]]);
        let id = SparseBitMatrix::identity(2);
        assert_eq!(a.kron(&id).to_dense(), vec![vec![1, 0, 1, 0], vec![0, 1, 0, 1]]);
        assert_eq!(id.kron(&a).to_dense(), vec![vec![1, 1, 0, 0], vec![0, 0, 1, 1]]);
        assert_eq!(
            id.hstack(&id).unwrap().to_dense(),
            vec![vec![1, 0, 1, 0], vec![0, 1, 0, 1]]
        );
    }

    #[test]
    fn bitvector_ops() {
        let a = BitVector::from_support(130, &[0, 64, 129]);
        assert_eq!(a.weight(), 3);
        assert_eq!(a.support(), vec![0, 64, 129]);
        assert_eq!(a.first_one(), Some(0));
        assert!(a.xor(&a).is_zero());
        let b = BitVector::from_support(130, &[64, 100]);
        assert!(a.dot(&b));
        assert_eq!(a.xor(&b).support(), vec![0, 100, 129]);
    }
}
