//! Dense matrices over the prime ground field `F_q`.

use rand::Rng;

use crate::gf::poly as poly_ops;

/// Row-major matrix over `F_q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundMatrix {
    q: u64,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

impl GroundMatrix {
    pub fn zeros(q: u64, rows: usize, cols: usize) -> Self {
        GroundMatrix { q, rows, cols, entries: vec![0; rows * cols] }
    }

    pub fn identity(q: u64, n: usize) -> Self {
        let mut m = Self::zeros(q, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from explicit rows; panics on ragged input.
    pub fn from_rows(q: u64, rows: Vec<Vec<u64>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(nrows * ncols);
        for r in &rows {
            assert_eq!(r.len(), ncols, "ragged rows");
            entries.extend(r.iter().map(|&c| c % q));
        }
        GroundMatrix { q, rows: nrows, cols: ncols, entries }
    }

    pub fn random<R: Rng>(q: u64, rows: usize, cols: usize, rng: &mut R) -> Self {
        let entries = (0..rows * cols).map(|_| rng.gen_range(0..q)).collect();
        GroundMatrix { q, rows, cols, entries }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.entries[r * self.cols + c] = v % self.q;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&c| c == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.q, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        assert_eq!(self.q, other.q);
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| poly_ops::fq_add(a, b, self.q))
            .collect();
        GroundMatrix { q: self.q, rows: self.rows, cols: self.cols, entries }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        assert_eq!(self.q, other.q);
        let mut out = Self::zeros(self.q, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let v = poly_ops::fq_add(
                        out.get(r, c),
                        poly_ops::fq_mul(a, other.get(k, c), self.q),
                        self.q,
                    );
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        let mut out = vec![0u64; self.rows];
        for r in 0..self.rows {
            let mut acc = 0u64;
            for c in 0..self.cols {
                acc = poly_ops::fq_add(acc, poly_ops::fq_mul(self.get(r, c), v[c], self.q), self.q);
            }
            out[r] = acc;
        }
        out
    }

    pub fn select_rows(&self, sel: &[usize]) -> Self {
        let mut out = Self::zeros(self.q, sel.len(), self.cols);
        for (i, &r) in sel.iter().enumerate() {
            for c in 0..self.cols {
                out.set(i, c, self.get(r, c));
            }
        }
        out
    }

    pub fn select_cols(&self, sel: &[usize]) -> Self {
        let mut out = Self::zeros(self.q, self.rows, sel.len());
        for r in 0..self.rows {
            for (j, &c) in sel.iter().enumerate() {
                out.set(r, j, self.get(r, c));
            }
        }
        out
    }

    /// Horizontal concatenation.
    pub fn hcat(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.q, other.q);
        let mut out = Self::zeros(self.q, self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c));
            }
            for c in 0..other.cols {
                out.set(r, self.cols + c, other.get(r, c));
            }
        }
        out
    }

    /// Rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0usize;
        for col in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(pivot) = (rank..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            m.swap_rows(rank, pivot);
            let inv = poly_ops::fq_inv(m.get(rank, col), m.q);
            for r in 0..m.rows {
                if r != rank && m.get(r, col) != 0 {
                    let factor = poly_ops::fq_mul(m.get(r, col), inv, m.q);
                    for c in col..m.cols {
                        let v = poly_ops::fq_sub(
                            m.get(r, c),
                            poly_ops::fq_mul(factor, m.get(rank, c), m.q),
                            m.q,
                        );
                        m.set(r, c, v);
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            let (x, y) = (self.get(a, c), self.get(b, c));
            self.set(a, c, y);
            self.set(b, c, x);
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// Inverse of a square matrix, or `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(self.q, n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| a.get(r, col) != 0)?;
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let pinv = poly_ops::fq_inv(a.get(col, col), a.q);
            for c in 0..n {
                a.set(col, c, poly_ops::fq_mul(a.get(col, c), pinv, a.q));
                inv.set(col, c, poly_ops::fq_mul(inv.get(col, c), pinv, a.q));
            }
            for r in 0..n {
                if r != col && a.get(r, col) != 0 {
                    let factor = a.get(r, col);
                    for c in 0..n {
                        let va = poly_ops::fq_sub(
                            a.get(r, c),
                            poly_ops::fq_mul(factor, a.get(col, c), a.q),
                            a.q,
                        );
                        a.set(r, c, va);
                        let vi = poly_ops::fq_sub(
                            inv.get(r, c),
                            poly_ops::fq_mul(factor, inv.get(col, c), a.q),
                            a.q,
                        );
                        inv.set(r, c, vi);
                    }
                }
            }
        }
        Some(inv)
    }

    /// Indices of the leftmost maximal set of linearly independent columns.
    pub fn independent_cols(&self) -> Vec<usize> {
        let mut m = self.clone();
        let mut picked = Vec::new();
        let mut row = 0usize;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(pivot) = (row..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            m.swap_rows(row, pivot);
            let inv = poly_ops::fq_inv(m.get(row, col), m.q);
            for r in 0..m.rows {
                if r != row && m.get(r, col) != 0 {
                    let factor = poly_ops::fq_mul(m.get(r, col), inv, m.q);
                    for c in col..m.cols {
                        let v = poly_ops::fq_sub(
                            m.get(r, c),
                            poly_ops::fq_mul(factor, m.get(row, c), m.q),
                            m.q,
                        );
                        m.set(r, c, v);
                    }
                }
            }
            picked.push(col);
            row += 1;
        }
        picked
    }

    /// Basis of the right null space `{v : A v = 0}` as the columns of a
    /// `cols x (cols - rank)` matrix.
    pub fn kernel(&self) -> Self {
        let q = self.q;
        let mut m = self.clone();
        // forward elimination to reduced row echelon form, tracking pivots
        let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
        let mut row = 0usize;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = poly_ops::fq_inv(m.get(row, col), q);
            for c in 0..m.cols {
                m.set(row, c, poly_ops::fq_mul(m.get(row, c), inv, q));
            }
            for r in 0..m.rows {
                if r != row && m.get(r, col) != 0 {
                    let factor = m.get(r, col);
                    for c in 0..m.cols {
                        let v =
                            poly_ops::fq_sub(m.get(r, c), poly_ops::fq_mul(factor, m.get(row, c), q), q);
                        m.set(r, c, v);
                    }
                }
            }
            pivots.push((row, col));
            row += 1;
        }
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let free_cols: Vec<usize> =
            (0..m.cols).filter(|c| !pivot_cols.contains(c)).collect();
        let mut out = Self::zeros(q, self.cols, free_cols.len());
        for (j, &fc) in free_cols.iter().enumerate() {
            out.set(fc, j, 1);
            for &(pr, pc) in &pivots {
                // pivot variable = -sum(free coefficients)
                let v = poly_ops::fq_sub(0, m.get(pr, fc), q);
                out.set(pc, j, v);
            }
        }
        out
    }

    /// Serializes as nested row-major arrays.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<u64>> = (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c)).collect())
            .collect();
        serde_json::json!(rows)
    }
}

/// Uniformly random `n x rho` matrix of full column rank, by rejection.
pub fn random_full_rank<R: Rng>(q: u64, n: usize, rho: usize, rng: &mut R) -> GroundMatrix {
    assert!(rho <= n, "rank bounded by dimension");
    if rho == 0 {
        return GroundMatrix::zeros(q, n, 0);
    }
    loop {
        let cand = GroundMatrix::random(q, n, rho, rng);
        if cand.rank() == rho {
            return cand;
        }
    }
}

/// Uniformly random invertible `n x n` matrix.
pub fn random_invertible<R: Rng>(q: u64, n: usize, rng: &mut R) -> GroundMatrix {
    random_full_rank(q, n, n, rng)
}
