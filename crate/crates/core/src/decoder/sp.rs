//! Syndrome sum-product decoding on the LDPC graph `[h_ldgm; delta_h]`.

use serde::{Deserialize, Serialize};

use crate::error::{check_closed, Error, Result};
use crate::gf2::{BitSequence, CompoundCode, SparseBitMatrix};

pub const DEFAULT_LLR_CLIP: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpParams {
    /// Iteration cap of a standalone sum-product run.
    pub max_iters: usize,
    pub llr_clip: f64,
    /// JSP rounds `r`.
    pub rounds: usize,
    /// Iterations `l` per JSP round.
    pub inner_iters: usize,
}

impl Default for SpParams {
    fn default() -> Self {
        Self {
            max_iters: 100,
            llr_clip: DEFAULT_LLR_CLIP,
            rounds: 15,
            inner_iters: 40,
        }
    }
}

impl SpParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("max_iters", self.max_iters),
            ("rounds", self.rounds),
            ("inner_iters", self.inner_iters),
        ] {
            if v == 0 {
                return Err(Error::Domain {
                    name,
                    value: 0.0,
                    range: "[1, inf)",
                });
            }
        }
        if !(self.llr_clip.is_finite() && self.llr_clip > 0.0) {
            return Err(Error::Domain {
                name: "llr_clip",
                value: self.llr_clip,
                range: "(0, inf)",
            });
        }
        Ok(())
    }
}

/// LLRs `+-ln((1-q)/q)` (positive for a 0 bit), clipped to `+-clip`.
pub fn side_info_llr(bits: &BitSequence, q: f64, clip: f64) -> Result<Vec<f64>> {
    check_closed("q", q, 0.0, 0.5, "[0, 0.5]")?;
    let mag = if q == 0.0 {
        clip
    } else {
        ((1.0 - q) / q).ln().min(clip)
    };
    Ok(bits.iter().map(|b| if b { -mag } else { mag }).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpOutput {
    pub u_hat: BitSequence,
    /// Posterior LLRs.
    pub soft_llr: Vec<f64>,
    /// All parity checks satisfied.
    pub converged: bool,
    pub iterations: usize,
}

/// Tanner graph of a parity-check matrix with a target syndrome.
pub(crate) struct SyndromeGraph {
    n: usize,
    starts: Vec<usize>,
    var: Vec<usize>,
    sign: Vec<f64>,
    target: Vec<bool>,
}

impl SyndromeGraph {
    pub(crate) fn new(h: &SparseBitMatrix, syndrome: &[bool]) -> Self {
        assert_eq!(h.rows(), syndrome.len());
        let mut starts = Vec::with_capacity(h.rows() + 1);
        let mut var = Vec::with_capacity(h.nnz());
        starts.push(0);
        for row in h.row_supports() {
            var.extend_from_slice(row);
            starts.push(var.len());
        }
        Self {
            n: h.cols(),
            starts,
            var,
            sign: syndrome.iter().map(|&s| if s { -1.0 } else { 1.0 }).collect(),
            target: syndrome.to_vec(),
        }
    }

    /// Graph of `[h_ldgm; delta_h]` with syndrome `[0; s]`.
    pub(crate) fn for_code(code: &CompoundCode, s: &BitSequence) -> Result<Self> {
        if s.len() != code.k() {
            return Err(Error::DimensionMismatch {
                expected: code.k(),
                actual: s.len(),
            });
        }
        let mut target = vec![false; code.h_ldgm().rows()];
        target.extend(s.iter());
        Ok(Self::new(&code.full_stack(), &target))
    }

    fn satisfied(&self, hard: &[bool]) -> bool {
        (0..self.target.len()).all(|c| {
            let parity = self.var[self.starts[c]..self.starts[c + 1]]
                .iter()
                .fold(false, |acc, &v| acc ^ hard[v]);
            parity == self.target[c]
        })
    }

    /// Flooding sum-product from fresh messages.
    pub(crate) fn decode(&self, prior: &[f64], iters: usize, clip: f64) -> SpOutput {
        assert_eq!(prior.len(), self.n);
        let edges = self.var.len();
        let mut c2v = vec![0.0f64; edges];
        let mut total: Vec<f64> = prior.to_vec();
        let mut hard: Vec<bool> = total.iter().map(|&l| l < 0.0).collect();
        let mut tanh_buf: Vec<f64> = Vec::new();
        let mut suffix: Vec<f64> = Vec::new();
        let limit = (0.5 * clip).tanh();

        let mut converged = self.satisfied(&hard);
        let mut iterations = 0;
        while !converged && iterations < iters {
            iterations += 1;
            for c in 0..self.target.len() {
                let (a, b) = (self.starts[c], self.starts[c + 1]);
                tanh_buf.clear();
                tanh_buf.extend((a..b).map(|e| (0.5 * (total[self.var[e]] - c2v[e]).clamp(-clip, clip)).tanh()));
                suffix.clear();
                suffix.resize(b - a + 1, 1.0);
                for i in (0..b - a).rev() {
                    suffix[i] = suffix[i + 1] * tanh_buf[i];
                }
                let mut prefix = self.sign[c];
                for (i, e) in (a..b).enumerate() {
                    let ext = (prefix * suffix[i + 1]).clamp(-limit, limit);
                    c2v[e] = 2.0 * ext.atanh();
                    prefix *= tanh_buf[i];
                }
            }
            total.copy_from_slice(prior);
            for (e, &v) in self.var.iter().enumerate() {
                total[v] += c2v[e];
            }
            for (h, &l) in hard.iter_mut().zip(&total) {
                *h = l < 0.0;
            }
            converged = self.satisfied(&hard);
        }
        SpOutput {
            u_hat: BitSequence::from_bools(hard.iter().copied()),
            soft_llr: total,
            converged,
            iterations,
        }
    }
}

/// Sum-product decoding of the codeword in the coset given by syndrome `s`,
/// starting from per-bit prior LLRs. Stops as soon as all checks hold.
pub fn sp_decode(code: &CompoundCode, s: &BitSequence, prior_llr: &[f64], iters: usize) -> Result<SpOutput> {
    if prior_llr.len() != code.n() {
        return Err(Error::DimensionMismatch {
            expected: code.n(),
            actual: prior_llr.len(),
        });
    }
    let graph = SyndromeGraph::for_code(code, s)?;
    Ok(graph.decode(prior_llr, iters, DEFAULT_LLR_CLIP))
}
