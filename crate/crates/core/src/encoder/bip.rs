//! Bias-propagation quantization onto the LDGM codebook.
//!
//! Belief propagation runs on the generator graph: one variable per info bit
//! and one factor per code bit `j`, tying the parity of its info bits to the
//! source bit `y_j` with strength `tanh(gamma)`. After every round of inner
//! iterations the most biased undecided info bits are frozen, messages stay
//! warm, and the loop continues until every info bit is fixed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{matvec_gf2, BitSequence, CompoundCode};

/// LLR pinned on decimated bits.
const FROZEN_LLR: f64 = 30.0;
const MSG_CLIP: f64 = 30.0;
/// Inner iterations stop early once no message moves by more than this.
const SETTLED: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BipParams {
    /// Weight of the fresh message in `t * new + (1 - t) * old`.
    pub damping: f64,
    /// Observation factor strength; the factor is `tanh(gamma)`.
    pub gamma: f64,
    pub max_rounds: usize,
    pub inner_iters: usize,
    /// Share of the info bits frozen after each round.
    pub decimation_fraction: f64,
}

impl Default for BipParams {
    fn default() -> Self {
        Self {
            damping: 0.8,
            gamma: 1.0,
            max_rounds: 100,
            inner_iters: 25,
            decimation_fraction: 0.02,
        }
    }
}

impl BipParams {
    /// Defaults with `gamma = 2 R`.
    pub fn for_rate(rate: f64) -> Self {
        Self {
            gamma: 2.0 * rate,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, value: f64, range| Err(Error::Domain { name, value, range });
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping", self.damping, "(0, 1]");
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad("gamma", self.gamma, "(0, inf)");
        }
        if self.max_rounds == 0 {
            return bad("max_rounds", 0.0, "[1, inf)");
        }
        if self.inner_iters == 0 {
            return bad("inner_iters", 0.0, "[1, inf)");
        }
        if !(self.decimation_fraction > 0.0 && self.decimation_fraction <= 1.0) {
            return bad("decimation_fraction", self.decimation_fraction, "(0, 1]");
        }
        Ok(())
    }
}

/// Output of one link encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkEncoding {
    /// Quantized codeword.
    pub u: BitSequence,
    /// Info word with `u = w^T G`.
    pub w: BitSequence,
    /// Transmitted payload: the syndrome, or `w` itself when `k = m`.
    pub s: BitSequence,
    /// Fraction of positions where `u` differs from the source word.
    pub d_stage1: f64,
    /// False when `max_rounds` ran out before every bit was decimated.
    pub converged: bool,
    pub rounds: usize,
}

/// Generator-graph adjacency, edges grouped by code bit.
struct FactorGraph {
    starts: Vec<usize>,
    var: Vec<usize>,
}

impl FactorGraph {
    fn new(code: &CompoundCode) -> Self {
        let (n, m) = (code.n(), code.m());
        let mut starts = Vec::with_capacity(n + 1);
        let mut var = Vec::with_capacity(m + code.h_ldgm().nnz());
        starts.push(0);
        for j in 0..m {
            var.push(j);
            starts.push(var.len());
        }
        for j in 0..n - m {
            var.extend_from_slice(code.parity_support(j));
            starts.push(var.len());
        }
        Self { starts, var }
    }
}

/// Quantizes `y` onto the code's LDGM codebook. The returned codeword is
/// always valid; `converged` reports whether decimation finished in time.
pub fn bip_quantize(code: &CompoundCode, y: &BitSequence, params: &BipParams, seed: u64) -> Result<LinkEncoding> {
    params.validate()?;
    let (n, m) = (code.n(), code.m());
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = FactorGraph::new(code);
    let edges = graph.var.len();
    let strength = params.gamma.tanh();
    let obs: Vec<f64> = y.iter().map(|b| if b { -strength } else { strength }).collect();

    let mut c2v = vec![0.0f64; edges];
    let mut total = vec![0.0f64; m];
    let mut fixed = vec![0.0f64; m];
    let mut decided: Vec<Option<bool>> = vec![None; m];
    let mut undecided = m;
    let per_round = ((params.decimation_fraction * m as f64).ceil() as usize).max(1);
    let mut tanh_buf: Vec<f64> = Vec::new();
    let mut suffix: Vec<f64> = Vec::new();
    let mut rounds = 0;

    while undecided > 0 && rounds < params.max_rounds {
        rounds += 1;
        for _ in 0..params.inner_iters {
            refresh_totals(&mut total, &fixed, &graph.var, &c2v);
            let mut moved = 0.0f64;
            for j in 0..n {
                let (a, b) = (graph.starts[j], graph.starts[j + 1]);
                tanh_buf.clear();
                tanh_buf.extend((a..b).map(|e| {
                    let v2c = (total[graph.var[e]] - c2v[e]).clamp(-MSG_CLIP, MSG_CLIP);
                    (0.5 * v2c).tanh()
                }));
                suffix.clear();
                suffix.resize(b - a + 1, 1.0);
                for i in (0..b - a).rev() {
                    suffix[i] = suffix[i + 1] * tanh_buf[i];
                }
                let mut prefix = obs[j];
                for (i, e) in (a..b).enumerate() {
                    let ext = (prefix * suffix[i + 1]).clamp(-0.999_999_999, 0.999_999_999);
                    let fresh = 2.0 * ext.atanh();
                    let next = params.damping * fresh + (1.0 - params.damping) * c2v[e];
                    moved = moved.max((next - c2v[e]).abs());
                    c2v[e] = next;
                    prefix *= tanh_buf[i];
                }
            }
            if moved < SETTLED {
                break;
            }
        }
        refresh_totals(&mut total, &fixed, &graph.var, &c2v);

        let mut candidates: Vec<usize> = (0..m).filter(|&i| decided[i].is_none()).collect();
        // Most biased first; the stable sort keeps equal biases in index order.
        candidates.sort_by(|&a, &b| total[b].abs().total_cmp(&total[a].abs()));
        for &i in candidates.iter().take(per_round) {
            freeze(i, total[i], &mut decided, &mut fixed, &mut rng);
            undecided -= 1;
        }
    }
    let converged = undecided == 0;
    if !converged {
        refresh_totals(&mut total, &fixed, &graph.var, &c2v);
        for i in 0..m {
            if decided[i].is_none() {
                freeze(i, total[i], &mut decided, &mut fixed, &mut rng);
            }
        }
    }

    let w = BitSequence::from_bools(decided.iter().map(|d| d.expect("all bits decided")));
    let u = code.encode_info(&w)?;
    let d_stage1 = u.hamming_distance(y)? as f64 / n as f64;
    let s = payload(code, &u, &w)?;
    Ok(LinkEncoding {
        u,
        w,
        s,
        d_stage1,
        converged,
        rounds,
    })
}

fn refresh_totals(total: &mut [f64], fixed: &[f64], var: &[usize], c2v: &[f64]) {
    total.copy_from_slice(fixed);
    for (e, &v) in var.iter().enumerate() {
        total[v] += c2v[e];
    }
}

fn freeze(i: usize, bias: f64, decided: &mut [Option<bool>], fixed: &mut [f64], rng: &mut ChaCha8Rng) {
    let bit = if bias == 0.0 { rng.gen() } else { bias < 0.0 };
    decided[i] = Some(bit);
    fixed[i] = if bit { -FROZEN_LLR } else { FROZEN_LLR };
}

fn payload(code: &CompoundCode, u: &BitSequence, w: &BitSequence) -> Result<BitSequence> {
    if code.k() == code.m() {
        Ok(w.clone())
    } else {
        matvec_gf2(code.delta_h(), u)
    }
}

/// Quantizes `y` and forms the link payload.
pub fn encode_link(code: &CompoundCode, y: &BitSequence, params: &BipParams, seed: u64) -> Result<LinkEncoding> {
    let enc = bip_quantize(code, y, params, seed)?;
    debug_assert_eq!(code.ldgm_violations(&enc.u)?, 0);
    Ok(enc)
}
