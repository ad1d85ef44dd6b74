//! Code construction and distance machinery.
//!
//! Two construction routes live here. Gabidulin generators give maximum rank
//! distance block codes. For convolutional codes, blocks of Frobenius powers
//! of a primitive normal element assemble into block Hankel (or, after a
//! block-row reversal, block Toeplitz) super-regular matrices; slicing rows
//! out of the Toeplitz form yields codes that maximize the column sum rank up
//! to their memory (MSR codes).
//!
//! Verification runs both ways: `verify_msr` certifies maximal column sum
//! rank through determinants of the extended generator against canonical
//! channel maps, while `column_distance_bruteforce` computes distance
//! profiles by exhaustive codeword enumeration and serves as the independent
//! ground truth at small sizes.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::gf::{FieldElement, FieldSpec, NormalBasis};
use crate::matrix::{enumerate_subspaces, ExtMatrix, GroundMatrix, SuperRegularity};
use crate::{Error, Result};

/// Ceiling on brute-force codeword enumeration; larger requests are refused
/// rather than sampled.
pub const DEFAULT_ENUM_BUDGET: u128 = 100_000_000;

/// A linear time-invariant convolutional code over `F_{q^M}` given by its
/// generator blocks `G_0 .. G_m`, each `k x n`.
#[derive(Debug, Clone)]
pub struct ConvolutionalCode {
    spec: Arc<FieldSpec>,
    basis: NormalBasis,
    n: usize,
    k: usize,
    memory: usize,
    blocks: Vec<ExtMatrix>,
}

impl ConvolutionalCode {
    /// Validates shapes, `k <= n`, and that `G_0` has full row rank.
    pub fn new(basis: NormalBasis, blocks: Vec<ExtMatrix>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::Dimension("a code needs at least the G_0 block".into()))?;
        let (k, n) = (first.rows(), first.cols());
        if k == 0 || k > n {
            return Err(Error::Dimension(format!("block shape {k}x{n} needs 0 < k <= n")));
        }
        let spec = basis.spec().clone();
        for b in &blocks {
            if b.rows() != k || b.cols() != n {
                return Err(Error::Dimension("generator blocks must share one shape".into()));
            }
            if b.spec().as_ref() != spec.as_ref() {
                return Err(Error::FieldMismatch);
            }
        }
        if blocks[0].rank() != k {
            return Err(Error::SingularG0);
        }
        let memory = blocks.len() - 1;
        Ok(ConvolutionalCode { spec, basis, n, k, memory, blocks })
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }

    pub fn basis(&self) -> &NormalBasis {
        &self.basis
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn blocks(&self) -> &[ExtMatrix] {
        &self.blocks
    }

    /// `G_i`, taking `G_i = 0` for `i` past the memory.
    pub fn block(&self, i: usize) -> ExtMatrix {
        if i <= self.memory {
            self.blocks[i].clone()
        } else {
            ExtMatrix::zeros(self.spec.clone(), self.k, self.n)
        }
    }

    /// The `k(j+1) x n(j+1)` extended generator: block upper-triangular
    /// Toeplitz with `G_{c-r}` at block `(r, c)`.
    pub fn extended_generator(&self, j: usize) -> ExtMatrix {
        let (k, n) = (self.k, self.n);
        let mut out = ExtMatrix::zeros(self.spec.clone(), k * (j + 1), n * (j + 1));
        for r in 0..=j {
            for c in r..=j.min(r + self.memory) {
                let block = &self.blocks[c - r];
                for br in 0..k {
                    for bc in 0..n {
                        out.set(r * k + br, c * n + bc, block.get(br, bc).clone());
                    }
                }
            }
        }
        out
    }

    pub fn to_descriptor(&self) -> CodeDescriptor {
        CodeDescriptor {
            n: self.n,
            k: self.k,
            m: self.memory,
            field: self.spec.as_ref().clone(),
            alpha: self.basis.alpha().coords().to_vec(),
            blocks: self
                .blocks
                .iter()
                .map(|b| {
                    (0..b.rows())
                        .map(|r| (0..b.cols()).map(|c| b.get(r, c).coords().to_vec()).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_descriptor(d: CodeDescriptor) -> Result<Self> {
        let spec = Arc::new(d.field);
        let alpha = spec.element(d.alpha)?;
        let basis = NormalBasis::new(spec.clone(), alpha)?;
        if d.blocks.len() != d.m + 1 {
            return Err(Error::Config(format!("expected {} blocks", d.m + 1)));
        }
        let mut blocks = Vec::with_capacity(d.blocks.len());
        for raw in d.blocks {
            if raw.len() != d.k || raw.iter().any(|row| row.len() != d.n) {
                return Err(Error::Config("block shape does not match n, k".into()));
            }
            let mut rows = Vec::with_capacity(d.k);
            for raw_row in raw {
                let mut row = Vec::with_capacity(d.n);
                for coords in raw_row {
                    row.push(spec.element(coords)?);
                }
                rows.push(row);
            }
            blocks.push(ExtMatrix::from_rows(spec.clone(), rows));
        }
        ConvolutionalCode::new(basis, blocks)
    }
}

/// JSON form of a code: field, normal element, and generator blocks as
/// nested coefficient arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeDescriptor {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub field: FieldSpec,
    pub alpha: Vec<u64>,
    pub blocks: Vec<Vec<Vec<Vec<u64>>>>,
}

/// Which per-shot weight a distance profile minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    Hamming,
    SumRank,
    ActiveSumRank,
}

/// Distance values `d(0) .. d(j)` of one kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceProfile {
    pub values: Vec<usize>,
    pub kind: DistanceKind,
    pub exhaustive: bool,
}

/// Per-shot channel ranks `(rho_0, .., rho_j)` with partial sums bounded by
/// `k(t+1)` and total exactly `k(j+1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankProfile {
    pub rhos: Vec<usize>,
}

/// Outcome of the determinant-based MSR check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MsrVerdict {
    Verified,
    Counterexample { profile: RankProfile, subspace_indices: Vec<usize> },
}

impl MsrVerdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, MsrVerdict::Verified)
    }
}

/// Generator of a Gabidulin code: row `i` holds the `i`-th Frobenius powers
/// of `g`. The entries of `g` must be independent over the ground field.
pub fn gabidulin_generator(
    basis: &NormalBasis,
    g: &[FieldElement],
    k: usize,
) -> Result<ExtMatrix> {
    let spec = basis.spec().clone();
    let n = g.len();
    if k == 0 || k > n {
        return Err(Error::Dimension(format!("need 0 < k <= n, got k={k}, n={n}")));
    }
    if basis.packet_rank(g) != n {
        return Err(Error::DependentGenerators);
    }
    Ok(ExtMatrix::from_fn(spec.clone(), k, n, |i, j| spec.frobenius(&g[j], i)))
}

/// Maximum-rank-distance test for a `k x n` generator: the product with
/// every canonical full-rank `n x k` ground map must keep rank `k`.
pub fn check_mrd(generator: &ExtMatrix) -> Result<bool> {
    let k = generator.rows();
    let n = generator.cols();
    if k > n {
        return Err(Error::Dimension(format!("generator is {k}x{n}, needs k <= n")));
    }
    for a in enumerate_subspaces(generator.spec().q(), n, k)? {
        if generator.mul_ground(&a).rank() != k {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The `m+1` blocks of Frobenius powers: block `j` is `n x n` with entry
/// `(r, s) = alpha^[nj + r + s]`.
///
/// The super-regularity results assume `alpha` is primitive normal and that
/// `n(m+2) - 2 < M`; exponents wrap modulo `M` regardless, so this is a
/// contract on the caller, not a checked precondition.
pub fn build_t_blocks(
    spec: &Arc<FieldSpec>,
    alpha: &FieldElement,
    n: usize,
    m: usize,
) -> Vec<ExtMatrix> {
    (0..=m)
        .map(|j| {
            ExtMatrix::from_fn(spec.clone(), n, n, |r, s| spec.frobenius(alpha, n * j + r + s))
        })
        .collect()
}

fn check_equal_square_blocks(blocks: &[ExtMatrix]) -> Result<usize> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::Dimension("need at least one block".into()))?;
    let n = first.rows();
    for b in blocks {
        if b.rows() != n || b.cols() != n {
            return Err(Error::Dimension("blocks must be square and equal-sized".into()));
        }
    }
    Ok(n)
}

/// Block Hankel assembly: block `(i, j)` is `T_{i+j-m}`, zero above the
/// anti-diagonal.
pub fn build_hankel(blocks: &[ExtMatrix]) -> Result<ExtMatrix> {
    let n = check_equal_square_blocks(blocks)?;
    let m = blocks.len() - 1;
    let spec = blocks[0].spec().clone();
    let side = n * (m + 1);
    let mut out = ExtMatrix::zeros(spec, side, side);
    for bi in 0..=m {
        for bj in 0..=m {
            if bi + bj < m {
                continue;
            }
            let block = &blocks[bi + bj - m];
            for r in 0..n {
                for c in 0..n {
                    out.set(bi * n + r, bj * n + c, block.get(r, c).clone());
                }
            }
        }
    }
    Ok(out)
}

/// Block Toeplitz assembly: block `(i, j)` is `T_{j-i}`, zero below the
/// diagonal. Equals the Hankel form with block rows reversed.
pub fn build_toeplitz(blocks: &[ExtMatrix]) -> Result<ExtMatrix> {
    let n = check_equal_square_blocks(blocks)?;
    let m = blocks.len() - 1;
    let spec = blocks[0].spec().clone();
    let side = n * (m + 1);
    let mut out = ExtMatrix::zeros(spec, side, side);
    for bi in 0..=m {
        for bj in bi..=m {
            let block = &blocks[bj - bi];
            for r in 0..n {
                for c in 0..n {
                    out.set(bi * n + r, bj * n + c, block.get(r, c).clone());
                }
            }
        }
    }
    Ok(out)
}

/// Slices a convolutional code out of a block Toeplitz super-regular matrix:
/// block `G_i` keeps the rows of `T_i` selected by `row_indices`.
pub fn extract_msr_generator(
    toeplitz: &ExtMatrix,
    n: usize,
    k: usize,
    m: usize,
    row_indices: &[usize],
    basis: &NormalBasis,
) -> Result<ConvolutionalCode> {
    if toeplitz.rows() != n * (m + 1) || toeplitz.cols() != n * (m + 1) {
        return Err(Error::Dimension(format!(
            "expected a {0}x{0} block Toeplitz matrix",
            n * (m + 1)
        )));
    }
    if row_indices.len() != k
        || row_indices.windows(2).any(|w| w[0] >= w[1])
        || row_indices.iter().any(|&i| i >= n)
    {
        return Err(Error::BadRowIndices(format!(
            "need {k} strictly increasing indices below {n}, got {row_indices:?}"
        )));
    }
    let blocks: Vec<ExtMatrix> = (0..=m)
        .map(|i| {
            let cols: Vec<usize> = (i * n..(i + 1) * n).collect();
            toeplitz.submatrix(row_indices, &cols)
        })
        .collect();
    ConvolutionalCode::new(basis.clone(), blocks)
}

/// All rank profiles for window length `j+1`: `0 <= rho_t <= n`, partial sums
/// at most `k(t+1)`, total exactly `k(j+1)`. Lexicographic order.
pub fn enumerate_rank_profiles(n: usize, k: usize, j: usize) -> Vec<RankProfile> {
    fn rec(
        t: usize,
        j: usize,
        n: usize,
        k: usize,
        sum: usize,
        acc: &mut Vec<usize>,
        out: &mut Vec<RankProfile>,
    ) {
        if t == j + 1 {
            if sum == k * (j + 1) {
                out.push(RankProfile { rhos: acc.clone() });
            }
            return;
        }
        for rho in 0..=n {
            let s = sum + rho;
            if s > k * (t + 1) {
                break;
            }
            // remaining shots must still be able to reach the exact total
            if s + n * (j - t) < k * (j + 1) {
                continue;
            }
            acc.push(rho);
            rec(t + 1, j, n, k, s, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    let mut acc = Vec::with_capacity(j + 1);
    rec(0, j, n, k, 0, &mut acc, &mut out);
    out
}

pub(crate) fn block_diag_of(
    q: u64,
    n: usize,
    rhos: &[usize],
    pick: impl Fn(usize) -> GroundMatrix,
) -> GroundMatrix {
    let total: usize = rhos.iter().sum();
    let mut a = GroundMatrix::zeros(q, n * rhos.len(), total);
    let mut col = 0usize;
    for (t, &rho) in rhos.iter().enumerate() {
        let rep = pick(t);
        for r in 0..n {
            for c in 0..rho {
                a.set(t * n + r, col + c, rep.get(r, c));
            }
        }
        col += rho;
    }
    a
}

/// Determinant-based certification that the code attains the maximal column
/// sum rank at window `j`: for every rank profile and every combination of
/// canonical subspace maps, `G^EX_j * diag(A*_t)` must be non-singular.
///
/// Canonical representatives suffice because non-singularity only depends on
/// each block's column space (right multiplication of a block by an
/// invertible matrix changes neither side); tests exercise that invariance.
pub fn verify_msr(code: &ConvolutionalCode, j: usize) -> MsrVerdict {
    let q = code.spec().q();
    let (n, k) = (code.n(), code.k());
    let gex = code.extended_generator(j);
    let reps: Vec<Vec<GroundMatrix>> = (0..=n)
        .map(|rho| enumerate_subspaces(q, n, rho).expect("rho <= n"))
        .collect();
    for profile in enumerate_rank_profiles(n, k, j) {
        let sizes: Vec<usize> = profile.rhos.iter().map(|&r| reps[r].len()).collect();
        let mut indices = vec![0usize; j + 1];
        loop {
            let a = block_diag_of(q, n, &profile.rhos, |t| {
                reps[profile.rhos[t]][indices[t]].clone()
            });
            let prod = gex.mul_ground(&a);
            if prod.det().expect("square by construction").is_zero() {
                return MsrVerdict::Counterexample { profile, subspace_indices: indices };
            }
            let mut t = 0usize;
            loop {
                if t == indices.len() {
                    break;
                }
                indices[t] += 1;
                if indices[t] < sizes[t] {
                    break;
                }
                indices[t] = 0;
                t += 1;
            }
            if t == indices.len() {
                break;
            }
        }
    }
    MsrVerdict::Verified
}

/// Exhaustive column distance profile `d(0) .. d(j)` of the requested kind.
///
/// Enumerates all source prefixes with `s_0 != 0` (for the active kind, also
/// excluding prefixes whose encoder memory returns to zero strictly inside
/// the window), pruning branches whose running weight already meets the
/// incumbent minimum. Refuses to run past `budget` candidates.
pub fn column_distance_bruteforce(
    code: &ConvolutionalCode,
    j: usize,
    kind: DistanceKind,
    budget: Option<u128>,
) -> Result<DistanceProfile> {
    let budget = budget.unwrap_or(DEFAULT_ENUM_BUDGET);
    let qm = code.spec().element_count();
    let mut needed: u128 = 1;
    for _ in 0..code.k() * (j + 1) {
        needed = needed.saturating_mul(qm);
        if needed > budget {
            return Err(Error::BudgetExceeded { needed, budget });
        }
    }
    let values: Vec<usize> = (0..=j).map(|i| min_weight_window(code, i, kind)).collect();
    debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
    Ok(DistanceProfile { values, kind, exhaustive: true })
}

fn packet_weight(code: &ConvolutionalCode, x: &[FieldElement], kind: DistanceKind) -> usize {
    match kind {
        DistanceKind::Hamming => x.iter().filter(|e| !e.is_zero()).count(),
        DistanceKind::SumRank | DistanceKind::ActiveSumRank => code.basis().packet_rank(x),
    }
}

fn min_weight_window(code: &ConvolutionalCode, window_end: usize, kind: DistanceKind) -> usize {
    struct Search<'a> {
        code: &'a ConvolutionalCode,
        kind: DistanceKind,
        window_end: usize,
        packet_count: u128,
        sources: Vec<Vec<FieldElement>>,
        best: usize,
    }
    impl Search<'_> {
        fn source_packet(&self, mut idx: u128) -> Vec<FieldElement> {
            let spec = self.code.spec();
            let qm = spec.element_count();
            (0..self.code.k())
                .map(|_| {
                    let e = spec.element_from_index(idx % qm);
                    idx /= qm;
                    e
                })
                .collect()
        }

        fn channel_packet(&self, t: usize) -> Vec<FieldElement> {
            let spec = self.code.spec();
            let mut x = vec![spec.zero(); self.code.n()];
            for l in 0..=self.code.memory().min(t) {
                let s = &self.sources[t - l];
                if s.iter().all(|e| e.is_zero()) {
                    continue;
                }
                let contrib = crate::matrix::row_vec_mul(s, &self.code.blocks()[l]);
                for (xi, ci) in x.iter_mut().zip(contrib) {
                    *xi = spec.add(xi, &ci);
                }
            }
            x
        }

        fn rec(&mut self, t: usize, weight: usize) {
            if weight >= self.best {
                return;
            }
            if t > self.window_end {
                self.best = weight;
                return;
            }
            // the active kind forbids the encoder memory emptying strictly
            // inside the window
            if self.kind == DistanceKind::ActiveSumRank && t >= 1 && t + 1 <= self.window_end {
                let lo = t.saturating_sub(self.code.memory());
                if self.sources[lo..t].iter().all(|s| s.iter().all(|e| e.is_zero())) {
                    return;
                }
            }
            for idx in 0..self.packet_count {
                if t == 0 && idx == 0 {
                    continue; // s_0 != 0
                }
                self.sources[t] = self.source_packet(idx);
                let x = self.channel_packet(t);
                let w = packet_weight(self.code, &x, self.kind);
                self.rec(t + 1, weight + w);
            }
        }
    }

    let qm = code.spec().element_count();
    let packet_count = qm.pow(code.k() as u32);
    let mut search = Search {
        code,
        kind,
        window_end,
        packet_count,
        sources: vec![vec![code.spec().zero(); code.k()]; window_end + 1],
        best: usize::MAX / 2,
    };
    search.rec(0, 0);
    search.best
}

/// Exhaustive search for a source prefix of minimum sum rank with
/// `s_0 != 0`; returns the first minimizer in odometer order together with
/// its channel packets and their summed rank.
pub fn min_sum_rank_codeword(
    code: &ConvolutionalCode,
    j: usize,
    budget: Option<u128>,
) -> Result<(Vec<Vec<FieldElement>>, Vec<Vec<FieldElement>>, usize)> {
    let budget = budget.unwrap_or(DEFAULT_ENUM_BUDGET);
    let qm = code.spec().element_count();
    let mut needed: u128 = 1;
    for _ in 0..code.k() * (j + 1) {
        needed = needed.saturating_mul(qm);
        if needed > budget {
            return Err(Error::BudgetExceeded { needed, budget });
        }
    }
    let spec = code.spec().clone();
    let packet_count = qm.pow(code.k() as u32);
    let mut sources = vec![vec![spec.zero(); code.k()]; j + 1];
    let mut packets = vec![vec![spec.zero(); code.n()]; j + 1];
    let mut best = usize::MAX / 2;
    let mut best_sources: Option<Vec<Vec<FieldElement>>> = None;

    fn rec(
        code: &ConvolutionalCode,
        window_end: usize,
        packet_count: u128,
        t: usize,
        weight: usize,
        sources: &mut Vec<Vec<FieldElement>>,
        packets: &mut Vec<Vec<FieldElement>>,
        best: &mut usize,
        best_sources: &mut Option<Vec<Vec<FieldElement>>>,
    ) {
        if weight >= *best {
            return;
        }
        if t > window_end {
            *best = weight;
            *best_sources = Some(sources.clone());
            return;
        }
        let spec = code.spec().clone();
        let qm = spec.element_count();
        for idx in 0..packet_count {
            if t == 0 && idx == 0 {
                continue;
            }
            let mut rem = idx;
            for s in sources[t].iter_mut() {
                *s = spec.element_from_index(rem % qm);
                rem /= qm;
            }
            let mut x = vec![spec.zero(); code.n()];
            for l in 0..=code.memory().min(t) {
                let s = &sources[t - l];
                if s.iter().all(|e| e.is_zero()) {
                    continue;
                }
                let contrib = crate::matrix::row_vec_mul(s, &code.blocks()[l]);
                for (xi, ci) in x.iter_mut().zip(contrib) {
                    *xi = spec.add(xi, &ci);
                }
            }
            let w = code.basis().packet_rank(&x);
            packets[t] = x;
            rec(code, window_end, packet_count, t + 1, weight + w, sources, packets, best, best_sources);
        }
    }
    rec(
        code,
        j,
        packet_count,
        0,
        0,
        &mut sources,
        &mut packets,
        &mut best,
        &mut best_sources,
    );
    let src = best_sources.expect("non-empty search space");
    // recompute the packets of the minimizer (the buffers held the last leaf)
    let mut xs = Vec::with_capacity(j + 1);
    for t in 0..=j {
        let mut x = vec![spec.zero(); code.n()];
        for l in 0..=code.memory().min(t) {
            let contrib = crate::matrix::row_vec_mul(&src[t - l], &code.blocks()[l]);
            for (xi, ci) in x.iter_mut().zip(contrib) {
                *xi = spec.add(xi, &ci);
            }
        }
        xs.push(x);
    }
    Ok((src, xs, best))
}

/// Multiplies a block Hankel (or Toeplitz) matrix by `diag(A_0, .., A_m)` of
/// non-singular ground blocks and scans the product for super-regularity.
pub fn check_preservation(
    hankel: &ExtMatrix,
    a_blocks: &[GroundMatrix],
    max_minor: usize,
) -> Result<SuperRegularity> {
    if a_blocks.is_empty() || hankel.rows() % a_blocks.len() != 0 {
        return Err(Error::Dimension("block count must divide the matrix side".into()));
    }
    let n = hankel.rows() / a_blocks.len();
    for a in a_blocks {
        if a.rows() != n || a.cols() != n {
            return Err(Error::Dimension(format!("channel blocks must be {n}x{n}")));
        }
        if !a.is_invertible() {
            return Err(Error::SingularChannelBlock);
        }
    }
    let q = a_blocks[0].q();
    let rhos = vec![n; a_blocks.len()];
    let diag = block_diag_of(q, n, &rhos, |t| a_blocks[t].clone());
    hankel.mul_ground(&diag).is_superregular(max_minor)
}

/// Finds a full-rank ground transform `M` such that the q-degrees of
/// `polys * M` are strictly increasing: the reduced column echelon form of
/// the stacked normal-coordinate columns, with columns ordered by q-degree.
pub fn echelon_sort_transform(
    basis: &NormalBasis,
    polys: &[FieldElement],
) -> Result<(GroundMatrix, Vec<FieldElement>)> {
    use crate::gf::poly::{fq_inv, fq_mul, fq_sub};
    let spec = basis.spec().clone();
    let (q, m, l) = (spec.q(), spec.m(), polys.len());
    if l == 0 || l > m {
        return Err(Error::DependentPolynomials);
    }
    let mut cols: Vec<Vec<u64>> = polys.iter().map(|p| basis.normal_coords(p)).collect();
    let mut trans: Vec<Vec<u64>> = (0..l)
        .map(|i| {
            let mut col = vec![0u64; l];
            col[i] = 1;
            col
        })
        .collect();
    let qdeg_of = |col: &[u64]| col.iter().rposition(|&c| c != 0);
    let mut pivot_deg: Vec<Option<usize>> = vec![None; l];
    for d in (0..m).rev() {
        let Some(pivot) = (0..l).find(|&i| pivot_deg[i].is_none() && qdeg_of(&cols[i]) == Some(d))
        else {
            continue;
        };
        let inv = fq_inv(cols[pivot][d], q);
        for r in 0..m {
            cols[pivot][r] = fq_mul(cols[pivot][r], inv, q);
        }
        for r in 0..l {
            trans[pivot][r] = fq_mul(trans[pivot][r], inv, q);
        }
        for i in 0..l {
            if i == pivot || cols[i][d] == 0 {
                continue;
            }
            let factor = cols[i][d];
            for r in 0..m {
                cols[i][r] = fq_sub(cols[i][r], fq_mul(factor, cols[pivot][r], q), q);
            }
            for r in 0..l {
                trans[i][r] = fq_sub(trans[i][r], fq_mul(factor, trans[pivot][r], q), q);
            }
        }
        pivot_deg[pivot] = Some(d);
    }
    if pivot_deg.iter().any(|d| d.is_none()) {
        return Err(Error::DependentPolynomials);
    }
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by_key(|&i| pivot_deg[i].unwrap());
    let mut transform = GroundMatrix::zeros(q, l, l);
    let mut sorted = Vec::with_capacity(l);
    for (j, &i) in order.iter().enumerate() {
        for r in 0..l {
            transform.set(r, j, trans[i][r]);
        }
        sorted.push(basis.from_normal_coords(&cols[i]));
    }
    debug_assert_eq!(transform.rank(), l);
    Ok((transform, sorted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn f32_basis() -> NormalBasis {
        let spec = Arc::new(FieldSpec::new(2, vec![1, 0, 1, 0, 0, 1]).unwrap());
        let alpha = spec.find_primitive_normal().unwrap();
        NormalBasis::new(spec, alpha).unwrap()
    }

    fn f2048_basis() -> NormalBasis {
        let spec = Arc::new(FieldSpec::new(2, vec![1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1]).unwrap());
        let alpha = spec.element(vec![1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0]).unwrap();
        NormalBasis::new(spec, alpha).unwrap()
    }

    fn f4_basis() -> NormalBasis {
        let spec = Arc::new(FieldSpec::new(2, vec![1, 1, 1]).unwrap());
        let alpha = spec.find_primitive_normal().unwrap();
        NormalBasis::new(spec, alpha).unwrap()
    }

    /// Builds the row-sliced Toeplitz construction for the given parameters.
    fn theorem_code(
        basis: &NormalBasis,
        n: usize,
        k: usize,
        m: usize,
        rows: &[usize],
    ) -> ConvolutionalCode {
        let blocks = build_t_blocks(basis.spec(), basis.alpha(), n, m);
        let toeplitz = build_toeplitz(&blocks).unwrap();
        extract_msr_generator(&toeplitz, n, k, m, rows, basis).unwrap()
    }

    fn random_code(
        basis: &NormalBasis,
        n: usize,
        k: usize,
        m: usize,
        rng: &mut ChaCha12Rng,
    ) -> ConvolutionalCode {
        let spec = basis.spec().clone();
        loop {
            let blocks: Vec<ExtMatrix> = (0..=m)
                .map(|_| ExtMatrix::from_fn(spec.clone(), k, n, |_, _| spec.random_element(rng)))
                .collect();
            if blocks[0].rank() == k {
                return ConvolutionalCode::new(basis.clone(), blocks).unwrap();
            }
        }
    }

    #[test]
    fn gabidulin_moore_structure() {
        let basis = f32_basis();
        let spec = basis.spec().clone();
        let g: Vec<FieldElement> = (0..3).map(|i| basis.conjugate(i)).collect();
        let full = gabidulin_generator(&basis, &g, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(full.get(i, j), &basis.conjugate(i + j));
            }
        }
        let single = gabidulin_generator(&basis, &g, 1).unwrap();
        for j in 0..3 {
            assert_eq!(single.get(0, j), &g[j]);
        }
        // rows of a [3,2] generator are themselves full-rank packets
        let gen = gabidulin_generator(&basis, &g, 2).unwrap();
        for i in 0..2 {
            let row: Vec<FieldElement> = (0..3).map(|j| gen.get(i, j).clone()).collect();
            assert_eq!(basis.packet_rank(&row), 3);
        }
        // dependent entries are rejected
        let dep = vec![spec.one(), spec.one(), basis.conjugate(1)];
        assert!(matches!(
            gabidulin_generator(&basis, &dep, 2),
            Err(Error::DependentGenerators)
        ));
    }

    #[test]
    fn mrd_check_on_gabidulin_and_corruptions() {
        let basis = f32_basis();
        let g: Vec<FieldElement> = (0..3).map(|i| basis.conjugate(i)).collect();
        let gen = gabidulin_generator(&basis, &g, 2).unwrap();
        assert!(check_mrd(&gen).unwrap());

        // two equal columns with k = n: the map selecting their difference
        // collapses the rank
        let mut bad = gabidulin_generator(&basis, &g, 3).unwrap();
        for i in 0..3 {
            bad.set(i, 1, bad.get(i, 0).clone());
        }
        assert!(!check_mrd(&bad).unwrap());
    }

    #[test]
    fn mrd_fails_when_extension_too_small() {
        // over F_2 itself (M = 1 < n) no 2x3 generator can be MRD
        let spec = Arc::new(FieldSpec::new(2, vec![1, 1]).unwrap());
        let one = spec.one();
        let zero = spec.zero();
        let gen = ExtMatrix::from_rows(
            spec.clone(),
            vec![
                vec![one.clone(), zero.clone(), one.clone()],
                vec![zero.clone(), one.clone(), one.clone()],
            ],
        );
        assert!(!check_mrd(&gen).unwrap());
    }

    #[test]
    fn t_blocks_structure() {
        let basis = f2048_basis();
        let spec = basis.spec();
        // n = 1: blocks are the conjugates themselves
        let tiny = build_t_blocks(spec, basis.alpha(), 1, 3);
        for (j, b) in tiny.iter().enumerate() {
            assert_eq!(b.get(0, 0), &basis.conjugate(j));
        }
        // n = 4, m = 1: top-left entry of T_1 is alpha^[4]
        let blocks = build_t_blocks(spec, basis.alpha(), 4, 1);
        assert_eq!(blocks[1].get(0, 0), &basis.conjugate(4));
        // q-degrees strictly increase down and to the right inside a block
        for b in &blocks {
            for r in 0..4 {
                for c in 0..4 {
                    let d = basis.qdeg(b.get(r, c)).unwrap();
                    if r + 1 < 4 {
                        assert!(basis.qdeg(b.get(r + 1, c)).unwrap() > d);
                    }
                    if c + 1 < 4 {
                        assert!(basis.qdeg(b.get(r, c + 1)).unwrap() > d);
                    }
                }
            }
        }
    }

    #[test]
    fn hankel_and_toeplitz_layouts() {
        let basis = f2048_basis();
        let blocks = build_t_blocks(basis.spec(), basis.alpha(), 2, 2);
        let hankel = build_hankel(&blocks).unwrap();
        let toeplitz = build_toeplitz(&blocks).unwrap();
        // m = 0 degenerates to the single block
        assert_eq!(build_hankel(&blocks[..1]).unwrap(), blocks[0]);
        assert_eq!(build_toeplitz(&blocks[..1]).unwrap(), blocks[0]);
        // block-row reversal identity
        let (n, m) = (2usize, 2usize);
        for bi in 0..=m {
            for r in 0..n {
                for c in 0..n * (m + 1) {
                    assert_eq!(toeplitz.get(bi * n + r, c), hankel.get((m - bi) * n + r, c));
                }
            }
        }
    }

    #[test]
    fn extraction_with_all_rows_returns_t_blocks() {
        let basis = f2048_basis();
        let blocks = build_t_blocks(basis.spec(), basis.alpha(), 2, 1);
        let toeplitz = build_toeplitz(&blocks).unwrap();
        let code = extract_msr_generator(&toeplitz, 2, 2, 1, &[0, 1], &basis).unwrap();
        assert_eq!(code.blocks()[0], blocks[0]);
        assert_eq!(code.blocks()[1], blocks[1]);
        assert!(matches!(
            extract_msr_generator(&toeplitz, 2, 2, 1, &[1, 0], &basis),
            Err(Error::BadRowIndices(_))
        ));
    }

    #[test]
    fn extended_generator_layout_and_convolution() {
        let basis = f32_basis();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let code = random_code(&basis, 3, 2, 1, &mut rng);
        assert_eq!(code.extended_generator(0), code.blocks()[0]);
        // blocks beyond the memory are zero
        let gex = code.extended_generator(3);
        for c in 2..4usize {
            for br in 0..2 {
                for bc in 0..3 {
                    assert!(gex.get(br, c * 3 + bc).is_zero());
                }
            }
        }
        assert_eq!(gex.rank(), 2 * 4, "full row rank");

        // prefix consistency with the direct convolution
        let spec = code.spec().clone();
        for _ in 0..20 {
            let j = rng.gen_range(0..4usize);
            let sources: Vec<Vec<FieldElement>> = (0..=j)
                .map(|_| (0..2).map(|_| spec.random_element(&mut rng)).collect())
                .collect();
            let flat: Vec<FieldElement> = sources.iter().flatten().cloned().collect();
            let via_gex = crate::matrix::row_vec_mul(&flat, &code.extended_generator(j));
            for t in 0..=j {
                let mut x = vec![spec.zero(); 3];
                for l in 0..=code.memory().min(t) {
                    let contrib = crate::matrix::row_vec_mul(&sources[t - l], &code.blocks()[l]);
                    for (xi, ci) in x.iter_mut().zip(contrib) {
                        *xi = spec.add(xi, &ci);
                    }
                }
                assert_eq!(&via_gex[t * 3..(t + 1) * 3], &x[..]);
            }
        }
    }

    #[test]
    fn rank_profile_enumeration() {
        let profiles = enumerate_rank_profiles(4, 2, 1);
        let rhos: Vec<Vec<usize>> = profiles.iter().map(|p| p.rhos.clone()).collect();
        assert_eq!(rhos, vec![vec![0, 4], vec![1, 3], vec![2, 2]]);

        let tight = enumerate_rank_profiles(3, 3, 2);
        assert_eq!(tight.len(), 1);
        assert_eq!(tight[0].rhos, vec![3, 3, 3]);

        let single = enumerate_rank_profiles(4, 2, 0);
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].rhos, vec![2]);
    }

    #[test]
    fn msr_verification_of_table_code_and_counterexample() {
        let basis5 = f32_basis();
        let code = theorem_code(&basis5, 2, 1, 1, &[0]);
        assert!(verify_msr(&code, 1).is_verified());

        // duplicated block structure has a counterexample
        let g0 = code.blocks()[0].clone();
        let dup = ConvolutionalCode::new(basis5.clone(), vec![g0.clone(), g0]).unwrap();
        assert!(!verify_msr(&dup, 1).is_verified());
    }

    #[test]
    fn column_distance_basics() {
        let basis = f32_basis();
        let code = theorem_code(&basis, 2, 1, 1, &[0]);
        let profile = column_distance_bruteforce(&code, 1, DistanceKind::SumRank, None).unwrap();
        assert_eq!(profile.values[0], 2, "d_R(0) = n - k + 1");
        assert_eq!(profile.values[1], 3, "d_R(1) maximal");
        assert!(profile.exhaustive);

        let active =
            column_distance_bruteforce(&code, 1, DistanceKind::ActiveSumRank, None).unwrap();
        for (dr, da) in profile.values.iter().zip(&active.values) {
            assert!(dr <= da);
        }

        let hamming = column_distance_bruteforce(&code, 1, DistanceKind::Hamming, None).unwrap();
        for (i, (&dr, &dh)) in profile.values.iter().zip(&hamming.values).enumerate() {
            assert!(dr <= dh);
            assert!(dh <= (2 - 1) * (i + 1) + 1);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let basis = f2048_basis();
        let code = theorem_code(&basis, 4, 2, 1, &[0, 1]);
        match column_distance_bruteforce(&code, 1, DistanceKind::SumRank, None) {
            Err(Error::BudgetExceeded { needed, budget }) => assert!(needed > budget),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn theorem_equivalence_on_random_small_codes() {
        let basis = f4_basis();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..20 {
            let code = random_code(&basis, 2, 1, 1, &mut rng);
            let d = column_distance_bruteforce(&code, 1, DistanceKind::SumRank, None).unwrap();
            let maximal = d.values[1] == 3;
            assert_eq!(maximal, verify_msr(&code, 1).is_verified());
        }
    }

    #[test]
    fn right_gl_invariance_of_verification_products() {
        let basis = f4_basis();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let code = random_code(&basis, 2, 1, 1, &mut rng);
        let gex = code.extended_generator(1);
        let q = 2;
        for profile in enumerate_rank_profiles(2, 1, 1) {
            let reps: Vec<Vec<GroundMatrix>> = profile
                .rhos
                .iter()
                .map(|&r| enumerate_subspaces(q, 2, r).unwrap())
                .collect();
            for a0 in &reps[0] {
                for a1 in &reps[1] {
                    let pick = |t: usize| if t == 0 { a0.clone() } else { a1.clone() };
                    let plain = block_diag_of(q, 2, &profile.rhos, pick);
                    let twisted = block_diag_of(q, 2, &profile.rhos, |t| {
                        let rep = if t == 0 { a0 } else { a1 };
                        if rep.cols() == 0 {
                            rep.clone()
                        } else {
                            let r = crate::matrix::random_invertible(q, rep.cols(), &mut rng.clone());
                            rep.mul(&r)
                        }
                    });
                    let d1 = gex.mul_ground(&plain).det().unwrap().is_zero();
                    let d2 = gex.mul_ground(&twisted).det().unwrap().is_zero();
                    assert_eq!(d1, d2);
                }
            }
        }
    }

    #[test]
    fn preservation_with_identity_blocks_matches_plain_verdict() {
        // M = 32 meets the construction bound for n = 2, m = 1
        let spec = Arc::new(
            FieldSpec::new(2, {
                let mut c = vec![0u64; 33];
                c[0] = 1;
                c[1] = 1;
                c[3] = 1;
                c[31] = 1;
                c[32] = 1;
                c
            })
            .unwrap(),
        );
        let alpha = spec.element_from_index(2); // X, primitive normal here
        assert!(spec.is_primitive(&alpha).unwrap());
        assert!(spec.is_normal(&alpha));
        let blocks = build_t_blocks(&spec, &alpha, 2, 1);
        let hankel = build_hankel(&blocks).unwrap();
        let plain = hankel.is_superregular(4).unwrap();
        assert!(plain.is_certified());

        let ids = vec![GroundMatrix::identity(2, 2), GroundMatrix::identity(2, 2)];
        assert_eq!(check_preservation(&hankel, &ids, 4).unwrap(), plain);

        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for _ in 0..3 {
            let a: Vec<GroundMatrix> =
                (0..2).map(|_| crate::matrix::random_invertible(2, 2, &mut rng)).collect();
            assert!(check_preservation(&hankel, &a, 4).unwrap().is_certified());
        }

        let singular = vec![GroundMatrix::zeros(2, 2, 2), GroundMatrix::identity(2, 2)];
        assert!(matches!(
            check_preservation(&hankel, &singular, 4),
            Err(Error::SingularChannelBlock)
        ));
    }

    #[test]
    fn qdeg_laws_on_hankel_and_product() {
        let basis = f2048_basis();
        let spec = basis.spec().clone();
        let (n, m) = (2usize, 1usize);
        let blocks = build_t_blocks(&spec, basis.alpha(), n, m);
        let hankel = build_hankel(&blocks).unwrap();

        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let a_blocks: Vec<GroundMatrix> =
            (0..=m).map(|_| crate::matrix::random_invertible(2, n, &mut rng)).collect();
        let rhos = vec![n; m + 1];
        let diag = block_diag_of(2, n, &rhos, |t| a_blocks[t].clone());
        let f = hankel.mul_ground(&diag);

        let side = n * (m + 1);
        for bi in 0..=m {
            for bj in 0..=m {
                if bi + bj < m {
                    continue;
                }
                let depth = bi + bj - m;
                for r in 0..n {
                    for c in 0..n {
                        let e = f.get(bi * n + r, bj * n + c);
                        let deg = basis.qdeg(e).expect("non-zero inside the live band");
                        // per-entry degree window at this block depth
                        assert!(n * depth + r <= deg && deg <= n * depth + r + n - 1);
                    }
                }
            }
        }
        // strict increase down every column across the live band
        for c in 0..side {
            let mut prev: Option<usize> = None;
            for r in 0..side {
                let e = f.get(r, c);
                if e.is_zero() {
                    continue;
                }
                let deg = basis.qdeg(e).unwrap();
                if let Some(p) = prev {
                    assert!(deg > p, "column degrees must strictly increase");
                }
                prev = Some(deg);
            }
        }
    }

    #[test]
    fn echelon_transform_sorts_degrees() {
        let basis = f2048_basis();
        let spec = basis.spec().clone();
        // already sorted distinct monomials: identity transform
        let polys: Vec<FieldElement> = (0..3).map(|i| basis.conjugate(i)).collect();
        let (t, sorted) = echelon_sort_transform(&basis, &polys).unwrap();
        assert_eq!(t, GroundMatrix::identity(2, 3));
        assert_eq!(sorted, polys);

        // single polynomial
        let (t1, _) = echelon_sort_transform(&basis, &polys[..1]).unwrap();
        assert_eq!(t1, GroundMatrix::identity(2, 1));

        // random independent sets end up strictly sorted
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        for _ in 0..30 {
            let cand: Vec<FieldElement> = (0..4).map(|_| spec.random_element(&mut rng)).collect();
            if basis.packet_rank(&cand) < 4 {
                continue;
            }
            let (trans, sorted) = echelon_sort_transform(&basis, &cand).unwrap();
            let degs: Vec<usize> = sorted.iter().map(|p| basis.qdeg(p).unwrap()).collect();
            assert!(degs.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(trans.rank(), 4);
            // sorted really is cand * trans
            for (j, s) in sorted.iter().enumerate() {
                let mut acc = spec.zero();
                for (i, p) in cand.iter().enumerate() {
                    acc = spec.add(&acc, &spec.scale(p, trans.get(i, j)));
                }
                assert_eq!(&acc, s);
            }
        }

        // dependent input is rejected
        let dep = vec![spec.one(), spec.one()];
        assert!(matches!(
            echelon_sort_transform(&basis, &dep),
            Err(Error::DependentPolynomials)
        ));
    }

    #[test]
    fn descriptor_round_trip() {
        let basis = f32_basis();
        let code = theorem_code(&basis, 2, 1, 1, &[0]);
        let descriptor = code.to_descriptor();
        let json = serde_json::to_string(&descriptor).unwrap();
        let parsed: CodeDescriptor = serde_json::from_str(&json).unwrap();
        let rebuilt = ConvolutionalCode::from_descriptor(parsed).unwrap();
        assert_eq!(rebuilt.blocks(), code.blocks());
        assert_eq!(rebuilt.n(), 2);
        assert_eq!(rebuilt.k(), 1);
        assert_eq!(rebuilt.memory(), 1);
    }

    #[test]
    fn singular_g0_is_rejected() {
        let basis = f32_basis();
        let spec = basis.spec().clone();
        let zero_block = ExtMatrix::zeros(spec.clone(), 1, 2);
        assert!(matches!(
            ConvolutionalCode::new(basis.clone(), vec![zero_block.clone(), zero_block]),
            Err(Error::SingularG0)
        ));
    }
}
