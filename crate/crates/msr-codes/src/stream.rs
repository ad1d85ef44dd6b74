//! End-to-end streaming over a rank-deficient network.
//!
//! Each time instance (a shot) pushes one channel packet `x_t` through a
//! ground-field matrix `A_t`; failing links lower `rank(A_t)`. The sliding
//! window model bounds the total rank lost over any `W` consecutive shots by
//! `S`. This module provides the convolutional encoder, a seeded sampler for
//! such channels, the delay-constrained windowed decoder, the adversarial
//! worst-case pattern derived from a minimum-sum-rank codeword, and a
//! simulation harness that aggregates seeded runs into reports.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::codes::{self, ConvolutionalCode, MsrVerdict};
use crate::gf::FieldElement;
use crate::matrix::{random_full_rank, row_vec_mul, row_vec_mul_ground, GroundMatrix};
use crate::{Error, Result};

/// How a channel realization is produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMode {
    /// Seeded sampling under the sliding-window deficiency budget.
    Random { seed: u64 },
    /// Explicit per-shot ranks; matrices of those ranks are still sampled
    /// from the seed. A pattern shorter than the horizon is padded with
    /// full-rank shots.
    Adversarial { rhos: Vec<usize>, seed: u64 },
}

/// Parameters of a rank-deficient sliding-window channel: every window of
/// `window` consecutive shots loses at most `max_deficiency` units of rank.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub n: usize,
    pub q: u64,
    /// `S`: the per-window rank-deficiency budget.
    pub max_deficiency: usize,
    /// `W`: the window length.
    pub window: usize,
    pub horizon: usize,
    pub mode: ChannelMode,
}

impl ChannelConfig {
    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.window == 0 || self.horizon == 0 {
            return Err(Error::Config("n, window, and horizon must be positive".into()));
        }
        if self.max_deficiency > self.n * self.window {
            return Err(Error::Config(format!(
                "max_deficiency {} exceeds the window capacity {}",
                self.max_deficiency,
                self.n * self.window
            )));
        }
        Ok(())
    }
}

/// One drawn channel: the per-shot matrices and their ranks.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    q: u64,
    n: usize,
    mats: Vec<GroundMatrix>,
    rhos: Vec<usize>,
}

impl ChannelRealization {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mats(&self) -> &[GroundMatrix] {
        &self.mats
    }

    pub fn rhos(&self) -> &[usize] {
        &self.rhos
    }

    pub fn horizon(&self) -> usize {
        self.mats.len()
    }

    /// Builds shots of the requested ranks: each `A_t` is a product of
    /// seeded full-rank factors `B_t (n x rho) * C_t (rho x n)`.
    pub fn from_rhos(q: u64, n: usize, rhos: &[usize], seed: u64) -> Result<Self> {
        if rhos.iter().any(|&r| r > n) {
            return Err(Error::Config(format!("per-shot rank exceeds n = {n}")));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mats = rhos
            .iter()
            .map(|&rho| {
                if rho == 0 {
                    return GroundMatrix::zeros(q, n, n);
                }
                let b = random_full_rank(q, n, rho, &mut rng);
                let c = random_full_rank(q, n, rho, &mut rng).transpose();
                b.mul(&c)
            })
            .collect();
        Ok(ChannelRealization { q, n, mats, rhos: rhos.to_vec() })
    }

    /// Embeds explicit channel maps (each `n x rho_t`, full column rank) as
    /// the leading columns of otherwise-zero shots, padding with identity
    /// shots up to `horizon`.
    pub fn from_fragments(q: u64, n: usize, fragments: &[GroundMatrix], horizon: usize) -> Self {
        let mut mats = Vec::with_capacity(horizon);
        let mut rhos = Vec::with_capacity(horizon);
        for frag in fragments.iter().take(horizon) {
            let mut a = GroundMatrix::zeros(q, n, n);
            for r in 0..n {
                for c in 0..frag.cols() {
                    a.set(r, c, frag.get(r, c));
                }
            }
            rhos.push(frag.cols());
            mats.push(a);
        }
        while mats.len() < horizon {
            mats.push(GroundMatrix::identity(q, n));
            rhos.push(n);
        }
        ChannelRealization { q, n, mats, rhos }
    }

    /// Largest rank deficiency over the fully contained windows of length `w`.
    pub fn max_window_deficiency(&self, w: usize) -> usize {
        let horizon = self.rhos.len();
        if w == 0 || w > horizon {
            return 0;
        }
        (0..=horizon - w)
            .map(|t| self.n * w - self.rhos[t..t + w].iter().sum::<usize>())
            .max()
            .unwrap_or(0)
    }

    /// Whether every fully contained window of length `w` loses at most `s`
    /// units of rank.
    pub fn satisfies_window_bound(&self, s: usize, w: usize) -> bool {
        self.max_window_deficiency(w) <= s
    }
}

/// Draws a channel realization per the config.
///
/// In random mode the per-shot deficiency is sampled uniformly from the
/// remaining budget of the trailing window, which keeps every window within
/// `max_deficiency` by construction.
pub fn sample_channel(cfg: &ChannelConfig) -> Result<ChannelRealization> {
    cfg.validate()?;
    match &cfg.mode {
        ChannelMode::Random { seed } => {
            let mut rng = ChaCha12Rng::seed_from_u64(*seed);
            let mut deficiencies: Vec<usize> = Vec::with_capacity(cfg.horizon);
            for t in 0..cfg.horizon {
                let window_start = t.saturating_sub(cfg.window - 1);
                let spent: usize = deficiencies[window_start..t].iter().sum();
                let budget = (cfg.max_deficiency - spent).min(cfg.n);
                deficiencies.push(rng.gen_range(0..=budget));
            }
            let rhos: Vec<usize> = deficiencies.iter().map(|&d| cfg.n - d).collect();
            let matrix_seed = rng.gen::<u64>();
            let real = ChannelRealization::from_rhos(cfg.q, cfg.n, &rhos, matrix_seed)?;
            debug_assert!(real.satisfies_window_bound(cfg.max_deficiency, cfg.window));
            Ok(real)
        }
        ChannelMode::Adversarial { rhos, seed } => {
            let mut padded = rhos.clone();
            padded.truncate(cfg.horizon);
            while padded.len() < cfg.horizon {
                padded.push(cfg.n);
            }
            ChannelRealization::from_rhos(cfg.q, cfg.n, &padded, *seed)
        }
    }
}

/// Keeps the leftmost maximal independent column set of a channel matrix;
/// the result spans the same column space.
pub fn reduce_channel(a: &GroundMatrix) -> GroundMatrix {
    a.select_cols(&a.independent_cols())
}

/// Causal convolution: `x_t = sum_i s_{t-i} G_i` with `s_t = 0` for `t < 0`.
pub fn encode(code: &ConvolutionalCode, sources: &[Vec<FieldElement>]) -> Vec<Vec<FieldElement>> {
    let spec = code.spec().clone();
    let mut out = Vec::with_capacity(sources.len());
    for t in 0..sources.len() {
        assert_eq!(sources[t].len(), code.k(), "source packet length mismatch");
        let mut x = vec![spec.zero(); code.n()];
        for l in 0..=code.memory().min(t) {
            if sources[t - l].iter().all(|e| e.is_zero()) {
                continue;
            }
            let contrib = row_vec_mul(&sources[t - l], &code.blocks()[l]);
            for (xi, ci) in x.iter_mut().zip(contrib) {
                *xi = spec.add(xi, &ci);
            }
        }
        out.push(x);
    }
    out
}

/// Pushes channel packets through the per-shot matrices: `y_t = x_t A_t`.
pub fn apply_channel(
    code: &ConvolutionalCode,
    packets: &[Vec<FieldElement>],
    channel: &ChannelRealization,
) -> Vec<Vec<FieldElement>> {
    let spec = code.spec();
    packets
        .iter()
        .zip(channel.mats())
        .map(|(x, a)| row_vec_mul_ground(spec, x, a))
        .collect()
}

/// Per-packet result of one decoding run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PacketOutcome {
    Recovered { delay: usize },
    Lost,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PacketRecord {
    pub t: usize,
    pub outcome: PacketOutcome,
    /// Observed channel rank over this packet's decoding window `[t, t+T]`.
    pub window_rank: usize,
}

/// Outcome of decoding one received stream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimReport {
    pub horizon: usize,
    pub delay: usize,
    pub packets: Vec<PacketRecord>,
    pub losses: usize,
    pub loss_rate: f64,
    /// Largest deficiency over windows of length `delay + 1`.
    pub max_window_deficiency: usize,
    /// Windows whose square system was singular despite meeting the rank
    /// condition: a code deficiency, not a channel one.
    pub decode_failures: usize,
    pub max_delay: Option<usize>,
}

/// Delay-constrained windowed decoding.
///
/// The decoder keeps the earliest undecoded index `e`. At each time `t` it
/// checks whether the window `[e, t]` has accumulated rank `k(t-e+1)`; if so
/// it cancels the contribution of already-decoded packets, truncates surplus
/// channel columns so the per-prefix rank caps hold, and solves the square
/// system for all of `s_e..s_t` at once. Packets whose deadline passes while
/// undecoded count as lost; a late recovery still advances `e` (and repairs
/// the decoder state) but stays recorded as a loss.
///
/// Deciding packet `t` never reads a shot beyond `t + delay`: on-time
/// recoveries happen at the first crossing, and losses are declared at the
/// deadline.
pub fn decode_stream(
    code: &ConvolutionalCode,
    received: &[Vec<FieldElement>],
    channel: &ChannelRealization,
    delay: usize,
) -> Result<SimReport> {
    let spec = code.spec().clone();
    let (n, k) = (code.n(), code.k());
    let horizon = received.len();
    if channel.horizon() < horizon {
        return Err(Error::Dimension("channel shorter than the received stream".into()));
    }
    if channel.n() != n || channel.q() != spec.q() {
        return Err(Error::Dimension("channel does not match the code parameters".into()));
    }
    if received.iter().any(|y| y.len() != n) {
        return Err(Error::Dimension("received packets must have n symbols".into()));
    }

    let mut decoded: Vec<Option<Vec<FieldElement>>> = vec![None; horizon];
    let mut recovered_at: Vec<Option<usize>> = vec![None; horizon];
    let mut decode_failures = 0usize;
    let mut earliest = 0usize;

    for t in 0..horizon {
        if earliest > t {
            continue;
        }
        let j = t - earliest;
        let window_rho: usize = channel.rhos()[earliest..=t].iter().sum();
        if window_rho < k * (j + 1) {
            continue;
        }
        // Truncate each shot's usable columns so the running rank never
        // exceeds k(u+1); surplus columns carry no extra information for
        // this window and would break the square-system shape.
        let mut take = Vec::with_capacity(j + 1);
        let mut acc = 0usize;
        for (u, &rho) in channel.rhos()[earliest..=t].iter().enumerate() {
            let allowed = (k * (u + 1)).saturating_sub(acc).min(rho);
            take.push(allowed);
            acc += allowed;
        }
        if acc < k * (j + 1) {
            continue; // prefix caps block this window; keep growing
        }

        let mut blocks: Vec<GroundMatrix> = Vec::with_capacity(j + 1);
        let mut rhs: Vec<FieldElement> = Vec::with_capacity(k * (j + 1));
        for (u, i) in (earliest..=t).enumerate() {
            let independent = channel.mats()[i].independent_cols();
            let selected = &independent[..take[u]];
            let a_star = channel.mats()[i].select_cols(selected);
            // observation restricted to the selected columns
            let mut y_star: Vec<FieldElement> =
                selected.iter().map(|&c| received[i][c].clone()).collect();
            // cancel the already-decoded memory content
            let mut known = vec![spec.zero(); n];
            let mut any_known = false;
            for l in 0..=code.memory().min(i) {
                let src = i - l;
                if src >= earliest {
                    continue;
                }
                let s = decoded[src].as_ref().expect("packets before `earliest` are decoded");
                let contrib = row_vec_mul(s, &code.blocks()[l]);
                for (xi, ci) in known.iter_mut().zip(contrib) {
                    *xi = spec.add(xi, &ci);
                }
                any_known = true;
            }
            if any_known {
                let cancel = row_vec_mul_ground(&spec, &known, &a_star);
                for (yi, ci) in y_star.iter_mut().zip(cancel) {
                    *yi = spec.sub(yi, &ci);
                }
            }
            rhs.extend(y_star);
            blocks.push(a_star);
        }

        let gex = code.extended_generator(j);
        let diag = codes::block_diag_of(spec.q(), n, &take, |u| blocks[u].clone());
        let system = gex.mul_ground(&diag);
        match system.transpose().solve(&rhs) {
            None => {
                decode_failures += 1;
            }
            Some(solution) => {
                for (u, i) in (earliest..=t).enumerate() {
                    decoded[i] = Some(solution[u * k..(u + 1) * k].to_vec());
                    recovered_at[i] = Some(t);
                }
                earliest = t + 1;
            }
        }
    }

    let packets: Vec<PacketRecord> = (0..horizon)
        .map(|t| {
            let outcome = match recovered_at[t] {
                Some(at) if at <= t + delay => PacketOutcome::Recovered { delay: at - t },
                _ => PacketOutcome::Lost,
            };
            let window_end = (t + delay).min(horizon - 1);
            let window_rank = channel.rhos()[t..=window_end].iter().sum();
            PacketRecord { t, outcome, window_rank }
        })
        .collect();
    let losses = packets
        .iter()
        .filter(|p| matches!(p.outcome, PacketOutcome::Lost))
        .count();
    let max_delay = packets
        .iter()
        .filter_map(|p| match p.outcome {
            PacketOutcome::Recovered { delay } => Some(delay),
            PacketOutcome::Lost => None,
        })
        .max();
    Ok(SimReport {
        horizon,
        delay,
        packets,
        losses,
        loss_rate: losses as f64 / horizon as f64,
        max_window_deficiency: channel.max_window_deficiency(delay + 1),
        decode_failures,
        max_delay,
    })
}

/// An adversarial channel prefix derived from a minimum-sum-rank codeword:
/// shot `t` keeps exactly the columns annihilating `x_t`.
#[derive(Debug, Clone)]
pub struct WorstCasePattern {
    /// `n x rho_t` full-column-rank blocks with `x_t * block = 0`.
    pub blocks: Vec<GroundMatrix>,
    pub rhos: Vec<usize>,
    /// The minimizing source prefix (`s_0 != 0` by construction).
    pub source: Vec<Vec<FieldElement>>,
    pub codeword: Vec<Vec<FieldElement>>,
    /// Sum rank of the codeword, `n(j+1)` minus the pattern's total rank.
    pub sum_rank: usize,
}

impl WorstCasePattern {
    /// Embeds the pattern into a runnable channel of the given horizon.
    pub fn realize(&self, q: u64, n: usize, horizon: usize) -> ChannelRealization {
        ChannelRealization::from_fragments(q, n, &self.blocks, horizon)
    }
}

fn pattern_from_codeword(
    code: &ConvolutionalCode,
    source: Vec<Vec<FieldElement>>,
    codeword: Vec<Vec<FieldElement>>,
    sum_rank: usize,
) -> WorstCasePattern {
    let basis = code.basis();
    let mut blocks = Vec::with_capacity(codeword.len());
    let mut rhos = Vec::with_capacity(codeword.len());
    for x in &codeword {
        // columns annihilating x: the kernel of its coordinate matrix
        let kernel = basis.phi(x).kernel();
        rhos.push(kernel.cols());
        blocks.push(kernel);
    }
    debug_assert_eq!(rhos.iter().sum::<usize>(), code.n() * codeword.len() - sum_rank);
    WorstCasePattern { blocks, rhos, source, codeword, sum_rank }
}

/// Builds the channel that defeats delay-`j` decoding with the least total
/// rank deficiency.
///
/// Within the enumeration budget this brute-forces a minimum-sum-rank
/// codeword directly. Past the budget it falls back to an exact dual search,
/// valid once `verify_msr(code, j)` holds: it scans channel patterns of
/// total rank `k(j+1) - 1` for one whose system has a null vector with
/// `s_0 != 0`; such a pattern must exist and recovers a minimizing codeword.
pub fn worst_case_pattern(
    code: &ConvolutionalCode,
    j: usize,
    budget: Option<u128>,
) -> Result<WorstCasePattern> {
    match codes::min_sum_rank_codeword(code, j, budget) {
        Ok((source, codeword, sum_rank)) => {
            Ok(pattern_from_codeword(code, source, codeword, sum_rank))
        }
        Err(Error::BudgetExceeded { .. }) => worst_case_pattern_dual(code, j),
        Err(e) => Err(e),
    }
}

fn worst_case_pattern_dual(code: &ConvolutionalCode, j: usize) -> Result<WorstCasePattern> {
    let (n, k, q) = (code.n(), code.k(), code.spec().q());
    if !matches!(codes::verify_msr(code, j), MsrVerdict::Verified) {
        return Err(Error::Infeasible(
            "dual worst-case search needs the code verified at this window".into(),
        ));
    }
    let target = k * (j + 1) - 1;
    let gex = code.extended_generator(j);
    let reps: Vec<Vec<GroundMatrix>> = (0..=n)
        .map(|rho| crate::matrix::enumerate_subspaces(q, n, rho).expect("rho <= n"))
        .collect();
    // compositions of `target` into j+1 parts bounded by n, lexicographic
    fn compositions(
        t: usize,
        remaining: usize,
        n: usize,
        acc: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if t == acc.len() {
            if remaining == 0 {
                out.push(acc.clone());
            }
            return;
        }
        let slots_left = acc.len() - t - 1;
        for rho in 0..=n.min(remaining) {
            if remaining - rho > n * slots_left {
                continue;
            }
            acc[t] = rho;
            compositions(t + 1, remaining - rho, n, acc, out);
        }
    }
    let mut acc = vec![0usize; j + 1];
    let mut all = Vec::new();
    compositions(0, target, n, &mut acc, &mut all);
    for rhos in &all {
        let sizes: Vec<usize> = rhos.iter().map(|&r| reps[r].len()).collect();
        let mut indices = vec![0usize; j + 1];
        loop {
            let diag = codes::block_diag_of(q, n, rhos, |t| reps[rhos[t]][indices[t]].clone());
            let system = gex.mul_ground(&diag); // k(j+1) rows, k(j+1)-1 cols
            let null = system.transpose().kernel();
            for col in 0..null.cols() {
                let s: Vec<FieldElement> =
                    (0..null.rows()).map(|r| null.get(r, col).clone()).collect();
                if s[..k].iter().all(|e| e.is_zero()) {
                    continue;
                }
                // minimizing codeword recovered from the null vector
                let flat = crate::matrix::row_vec_mul(&s, &gex);
                let codeword: Vec<Vec<FieldElement>> =
                    (0..=j).map(|t| flat[t * n..(t + 1) * n].to_vec()).collect();
                let source: Vec<Vec<FieldElement>> =
                    (0..=j).map(|t| s[t * k..(t + 1) * k].to_vec()).collect();
                let sum_rank: usize =
                    codeword.iter().map(|x| code.basis().packet_rank(x)).sum();
                debug_assert_eq!(sum_rank, (n - k) * (j + 1) + 1);
                return Ok(pattern_from_codeword(code, source, codeword, sum_rank));
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
    Err(Error::Infeasible(
        "no deficiency-minimal confusing pattern found (code exceeds the claimed distance)".into(),
    ))
}

/// Aggregate over independent seeded trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimSummary {
    pub trials: usize,
    pub horizon: usize,
    pub delay: usize,
    pub total_packets: usize,
    pub losses: usize,
    pub loss_rate: f64,
    pub max_window_deficiency: usize,
    pub decode_failures: usize,
    pub max_delay: Option<usize>,
    pub reports: Vec<SimReport>,
}

impl SimSummary {
    /// One CSV row per packet: `trial,t,outcome,delay,window_rank`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,t,outcome,delay,window_rank\n");
        for (trial, report) in self.reports.iter().enumerate() {
            for p in &report.packets {
                let (outcome, delay) = match p.outcome {
                    PacketOutcome::Recovered { delay } => ("recovered", delay.to_string()),
                    PacketOutcome::Lost => ("lost", String::new()),
                };
                out.push_str(&format!(
                    "{trial},{t},{outcome},{delay},{rank}\n",
                    t = p.t,
                    rank = p.window_rank
                ));
            }
        }
        out
    }
}

/// Runs `trials` independent encode/transmit/decode rounds with seeded
/// channels and sources, merging the per-run reports.
pub fn simulate(
    code: &ConvolutionalCode,
    cfg: &ChannelConfig,
    delay: usize,
    trials: usize,
) -> Result<SimSummary> {
    cfg.validate()?;
    if cfg.n != code.n() || cfg.q != code.spec().q() {
        return Err(Error::Config("channel dimensions must match the code".into()));
    }
    let spec = code.spec().clone();
    let base_seed = match &cfg.mode {
        ChannelMode::Random { seed } | ChannelMode::Adversarial { seed, .. } => *seed,
    };
    let mut master = ChaCha12Rng::seed_from_u64(base_seed);
    let mut reports = Vec::with_capacity(trials);
    for _ in 0..trials {
        let trial_seed = master.gen::<u64>();
        let trial_cfg = ChannelConfig {
            mode: match &cfg.mode {
                ChannelMode::Random { .. } => ChannelMode::Random { seed: trial_seed },
                ChannelMode::Adversarial { rhos, .. } => {
                    ChannelMode::Adversarial { rhos: rhos.clone(), seed: trial_seed }
                }
            },
            ..cfg.clone()
        };
        let channel = sample_channel(&trial_cfg)?;
        let mut source_rng = ChaCha12Rng::seed_from_u64(trial_seed ^ 0x9E37_79B9_7F4A_7C15);
        let sources: Vec<Vec<FieldElement>> = (0..cfg.horizon)
            .map(|_| (0..code.k()).map(|_| spec.random_element(&mut source_rng)).collect())
            .collect();
        let packets = encode(code, &sources);
        let received = apply_channel(code, &packets, &channel);
        reports.push(decode_stream(code, &received, &channel, delay)?);
    }
    let total_packets = trials * cfg.horizon;
    let losses = reports.iter().map(|r| r.losses).sum();
    let decode_failures = reports.iter().map(|r| r.decode_failures).sum();
    let max_window_deficiency =
        reports.iter().map(|r| r.max_window_deficiency).max().unwrap_or(0);
    let max_delay = reports.iter().filter_map(|r| r.max_delay).max();
    Ok(SimSummary {
        trials,
        horizon: cfg.horizon,
        delay,
        total_packets,
        losses,
        loss_rate: losses as f64 / total_packets.max(1) as f64,
        max_window_deficiency,
        decode_failures,
        max_delay,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_t_blocks, build_toeplitz, extract_msr_generator};
    use crate::gf::{FieldSpec, NormalBasis};
    use rand::SeedableRng;
    use std::sync::Arc;

    fn table_code(
        modulus: Vec<u64>,
        alpha: Vec<u64>,
        n: usize,
        k: usize,
        m: usize,
        rows: &[usize],
    ) -> ConvolutionalCode {
        let spec = Arc::new(FieldSpec::new(2, modulus).unwrap());
        let alpha = spec.element(alpha).unwrap();
        let basis = NormalBasis::new(spec.clone(), alpha.clone()).unwrap();
        let blocks = build_t_blocks(&spec, &alpha, n, m);
        let toeplitz = build_toeplitz(&blocks).unwrap();
        extract_msr_generator(&toeplitz, n, k, m, rows, &basis).unwrap()
    }

    fn msr_211() -> ConvolutionalCode {
        table_code(vec![1, 0, 1, 0, 0, 1], vec![1, 1, 0, 0, 0], 2, 1, 1, &[0])
    }

    fn msr_421() -> ConvolutionalCode {
        table_code(
            vec![1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1],
            vec![1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0],
            4,
            2,
            1,
            &[0, 2],
        )
    }

    #[test]
    fn encoder_impulse_and_linearity() {
        let code = msr_211();
        let spec = code.spec().clone();
        // zero in, zero out
        let zeros = vec![vec![spec.zero(); 1]; 5];
        assert!(encode(&code, &zeros).iter().all(|x| x.iter().all(|e| e.is_zero())));
        // single impulse: x_t = s_0 G_t for t <= m, zero after
        let mut impulse = zeros.clone();
        impulse[0] = vec![spec.one()];
        let xs = encode(&code, &impulse);
        for (t, x) in xs.iter().enumerate() {
            if t <= 1 {
                let expect = row_vec_mul(&impulse[0], &code.blocks()[t]);
                assert_eq!(x, &expect);
            } else {
                assert!(x.iter().all(|e| e.is_zero()));
            }
        }
        // ground-field linearity
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let s1: Vec<Vec<_>> = (0..4).map(|_| vec![spec.random_element(&mut rng)]).collect();
        let s2: Vec<Vec<_>> = (0..4).map(|_| vec![spec.random_element(&mut rng)]).collect();
        let c = rng.gen_range(0..2u64);
        let mixed: Vec<Vec<_>> = s1
            .iter()
            .zip(&s2)
            .map(|(a, b)| vec![spec.add(&spec.scale(&a[0], c), &b[0])])
            .collect();
        let ex1 = encode(&code, &s1);
        let ex2 = encode(&code, &s2);
        let exm = encode(&code, &mixed);
        for t in 0..4 {
            for i in 0..2 {
                assert_eq!(exm[t][i], spec.add(&spec.scale(&ex1[t][i], c), &ex2[t][i]));
            }
        }
    }

    #[test]
    fn sampler_respects_window_budget() {
        for seed in 0..1000u64 {
            let cfg = ChannelConfig {
                n: 4,
                q: 2,
                max_deficiency: 4,
                window: 2,
                horizon: 12,
                mode: ChannelMode::Random { seed },
            };
            let real = sample_channel(&cfg).unwrap();
            assert!(real.satisfies_window_bound(4, 2), "seed {seed}");
            for (t, &rho) in real.rhos().iter().enumerate() {
                assert_eq!(real.mats()[t].rank(), rho);
            }
        }
    }

    #[test]
    fn sampler_extremes() {
        let full = ChannelConfig {
            n: 3,
            q: 2,
            max_deficiency: 0,
            window: 2,
            horizon: 8,
            mode: ChannelMode::Random { seed: 1 },
        };
        let real = sample_channel(&full).unwrap();
        assert!(real.mats().iter().all(|a| a.is_invertible()));

        let slack = ChannelConfig {
            n: 3,
            q: 2,
            max_deficiency: 6,
            window: 2,
            horizon: 64,
            mode: ChannelMode::Random { seed: 2 },
        };
        let real = sample_channel(&slack).unwrap();
        assert!(real.rhos().iter().any(|&r| r < 3), "unconstrained ranks may drop");

        let bad = ChannelConfig { max_deficiency: 7, ..slack };
        assert!(sample_channel(&bad).is_err());
    }

    #[test]
    fn reduce_channel_keeps_span() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let a = GroundMatrix::identity(2, 3);
        assert_eq!(reduce_channel(&a), a);
        let z = GroundMatrix::zeros(2, 3, 3);
        assert_eq!(reduce_channel(&z).cols(), 0);
        for _ in 0..40 {
            let b = random_full_rank(2, 4, 2, &mut rng);
            let c = random_full_rank(2, 4, 2, &mut rng).transpose();
            let m = b.mul(&c);
            let reduced = reduce_channel(&m);
            assert_eq!(reduced.rank(), 2);
            // same column space: appending the original adds no rank
            assert_eq!(m.hcat(&reduced).rank(), 2);
        }
    }

    #[test]
    fn full_rank_channel_decodes_at_delay_zero() {
        let code = msr_211();
        let cfg = ChannelConfig {
            n: 2,
            q: 2,
            max_deficiency: 0,
            window: 2,
            horizon: 10,
            mode: ChannelMode::Random { seed: 11 },
        };
        let summary = simulate(&code, &cfg, 1, 20).unwrap();
        assert_eq!(summary.losses, 0);
        assert_eq!(summary.max_delay, Some(0));
        assert_eq!(summary.decode_failures, 0);
    }

    #[test]
    fn alternating_blackout_recovers_within_delay_one() {
        let code = msr_421();
        let spec = code.spec().clone();
        let horizon = 10;
        let rhos: Vec<usize> = (0..horizon).map(|t| if t % 2 == 0 { 0 } else { 4 }).collect();
        let channel = ChannelRealization::from_rhos(2, 4, &rhos, 99).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let sources: Vec<Vec<_>> = (0..horizon)
            .map(|_| (0..2).map(|_| spec.random_element(&mut rng)).collect())
            .collect();
        let received = apply_channel(&code, &encode(&code, &sources), &channel);
        let report = decode_stream(&code, &received, &channel, 1).unwrap();
        assert_eq!(report.losses, 0);
        assert_eq!(report.max_delay, Some(1));
        for p in &report.packets {
            let expect = if p.t % 2 == 0 { 1 } else { 0 };
            assert_eq!(p.outcome, PacketOutcome::Recovered { delay: expect });
        }
    }

    #[test]
    fn guaranteed_regime_never_loses() {
        let code = msr_421();
        let cfg = ChannelConfig {
            n: 4,
            q: 2,
            max_deficiency: 4,
            window: 2,
            horizon: 12,
            mode: ChannelMode::Random { seed: 21 },
        };
        let summary = simulate(&code, &cfg, 1, 50).unwrap();
        assert_eq!(summary.losses, 0);
        assert_eq!(summary.decode_failures, 0);
        assert!(summary.max_delay.unwrap_or(0) <= 1);
    }

    #[test]
    fn worst_case_pattern_defeats_the_decoder() {
        let code = msr_211();
        let pattern = worst_case_pattern(&code, 1, None).unwrap();
        assert_eq!(pattern.sum_rank, 3, "minimum sum rank of the MSR [2,1,1] code");
        assert!(!pattern.source[0][0].is_zero(), "minimizer keeps s_0 != 0");
        assert_eq!(pattern.rhos.iter().sum::<usize>(), 2 * 2 - 3);
        for (x, b) in pattern.codeword.iter().zip(&pattern.blocks) {
            let prod = row_vec_mul_ground(code.spec(), x, b);
            assert!(prod.iter().all(|e| e.is_zero()), "blocks annihilate the codeword");
        }

        let spec = code.spec().clone();
        let horizon = 6;
        let channel = pattern.realize(2, 2, horizon);
        // transmit exactly the confusing codeword prefix, zero afterwards
        let mut sources = pattern.source.clone();
        sources.resize(horizon, vec![spec.zero(); 1]);
        let received = apply_channel(&code, &encode(&code, &sources), &channel);
        let report = decode_stream(&code, &received, &channel, 1).unwrap();
        assert_eq!(report.packets[0].outcome, PacketOutcome::Lost, "s_0 is ambiguous");
    }

    #[test]
    fn one_more_rank_unit_restores_recovery() {
        let code = msr_211();
        let spec = code.spec().clone();
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        // every canonical pattern with total rank k(j+1) = 2 within the caps
        for profile in crate::codes::enumerate_rank_profiles(2, 1, 1) {
            let reps: Vec<Vec<GroundMatrix>> = profile
                .rhos
                .iter()
                .map(|&r| crate::matrix::enumerate_subspaces(2, 2, r).unwrap())
                .collect();
            let mut idx = vec![0usize; 2];
            loop {
                let frags: Vec<GroundMatrix> =
                    (0..2).map(|t| reps[t][idx[t]].clone()).collect();
                let channel = ChannelRealization::from_fragments(2, 2, &frags, 4);
                let sources: Vec<Vec<_>> =
                    (0..4).map(|_| vec![spec.random_element(&mut rng)]).collect();
                let received = apply_channel(&code, &encode(&code, &sources), &channel);
                let report = decode_stream(&code, &received, &channel, 1).unwrap();
                assert!(
                    matches!(report.packets[0].outcome, PacketOutcome::Recovered { delay } if delay <= 1),
                    "profile {:?} idx {:?}",
                    profile.rhos,
                    idx
                );
                let mut t = 0;
                loop {
                    if t == 2 {
                        break;
                    }
                    idx[t] += 1;
                    if idx[t] < reps[t].len() {
                        break;
                    }
                    idx[t] = 0;
                    t += 1;
                }
                if t == 2 {
                    break;
                }
            }
        }
    }

    #[test]
    fn dual_route_matches_primal_on_feasible_code() {
        let code = msr_211();
        let primal = worst_case_pattern(&code, 1, None).unwrap();
        // force the dual route with a tiny budget
        let dual = worst_case_pattern(&code, 1, Some(4)).unwrap();
        assert_eq!(primal.sum_rank, dual.sum_rank);
        assert_eq!(dual.rhos.iter().sum::<usize>(), 1);
        assert!(!dual.source[0][0].is_zero());
        for (x, b) in dual.codeword.iter().zip(&dual.blocks) {
            let prod = row_vec_mul_ground(code.spec(), x, b);
            assert!(prod.iter().all(|e| e.is_zero()));
        }
    }

    #[test]
    fn window_mismatch_thresholds() {
        // MSR [2,1,2] from the achievable-field table
        let code =
            table_code(vec![1, 0, 0, 1, 0, 0, 0, 1], vec![1, 0, 0, 1, 0, 0, 0], 2, 1, 2, &[0]);
        // delay at or past the window length: threshold S < d_R(W-1) unchanged
        let cfg_a = ChannelConfig {
            n: 2,
            q: 2,
            max_deficiency: 2,
            window: 2,
            horizon: 12,
            mode: ChannelMode::Random { seed: 41 },
        };
        let s = simulate(&code, &cfg_a, 2, 50).unwrap();
        assert_eq!(s.losses, 0);

        // delay below the window: threshold tightens to S < d_R(T)
        let cfg_b = ChannelConfig {
            n: 2,
            q: 2,
            max_deficiency: 2,
            window: 3,
            horizon: 12,
            mode: ChannelMode::Random { seed: 43 },
        };
        let s = simulate(&code, &cfg_b, 1, 50).unwrap();
        assert_eq!(s.losses, 0);
    }

    #[test]
    fn adversarial_mode_and_csv_shape() {
        let code = msr_211();
        let cfg = ChannelConfig {
            n: 2,
            q: 2,
            max_deficiency: 2,
            window: 2,
            horizon: 6,
            mode: ChannelMode::Adversarial { rhos: vec![0, 2, 0, 2, 0, 2], seed: 51 },
        };
        let summary = simulate(&code, &cfg, 1, 3).unwrap();
        assert_eq!(summary.losses, 0);
        let csv = summary.to_csv();
        assert_eq!(csv.lines().count(), 1 + 3 * 6);
        assert!(csv.starts_with("trial,t,outcome,delay,window_rank"));

        // a pattern shorter than the horizon pads with full-rank shots
        let padded_cfg = ChannelConfig {
            mode: ChannelMode::Adversarial { rhos: vec![0], seed: 51 },
            ..cfg
        };
        let real = sample_channel(&padded_cfg).unwrap();
        assert_eq!(real.rhos(), &[0, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn simulation_is_deterministic_per_seed() {
        let code = msr_421();
        let cfg = ChannelConfig {
            n: 4,
            q: 2,
            max_deficiency: 4,
            window: 2,
            horizon: 8,
            mode: ChannelMode::Random { seed: 61 },
        };
        let a = simulate(&code, &cfg, 1, 5).unwrap();
        let b = simulate(&code, &cfg, 1, 5).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
