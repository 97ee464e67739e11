//! Soft reconstruction of the source from the two decoded words, and the
//! log-loss it incurs.

use serde::{Deserialize, Serialize};

use crate::bounds::hb;
use crate::error::{check_closed, Error, Result};
use crate::gf2::BitSequence;

/// Probabilities below this are floored before taking logs.
pub const PROB_FLOOR: f64 = 1.0 / (1u64 << 20) as f64;

/// `Pr{x = 1 | u1, u2}` when `u_i = x xor BSC(q_i)` and `x` is uniform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorTable {
    pub q1: f64,
    pub q2: f64,
    /// Indexed `[u1][u2]`.
    pub entries: [[f64; 2]; 2],
}

impl PosteriorTable {
    #[inline]
    pub fn get(&self, u1: bool, u2: bool) -> f64 {
        self.entries[u1 as usize][u2 as usize]
    }

    /// `H(X | U1, U2)` in bits under the table's own model.
    pub fn conditional_entropy(&self) -> f64 {
        let mut h = 0.0;
        for u1 in [false, true] {
            for u2 in [false, true] {
                h += joint_u(self.q1, self.q2, u1, u2) * hb(self.get(u1, u2));
            }
        }
        h
    }
}

#[inline]
fn flip(q: f64, differs: bool) -> f64 {
    if differs {
        q
    } else {
        1.0 - q
    }
}

/// `Pr{u1, u2}` under the model.
fn joint_u(q1: f64, q2: f64, u1: bool, u2: bool) -> f64 {
    0.5 * (flip(q1, u1) * flip(q2, u2) + flip(q1, !u1) * flip(q2, !u2))
}

pub fn posterior_table(q1: f64, q2: f64) -> Result<PosteriorTable> {
    check_closed("q1", q1, 0.0, 0.5, "[0, 0.5]")?;
    check_closed("q2", q2, 0.0, 0.5, "[0, 0.5]")?;
    let mut entries = [[0.0; 2]; 2];
    for u2 in [false, true] {
        // likelihoods of x = 1 and x = 0 given u1 = 0
        let one = q1 * flip(q2, !u2);
        let zero = (1.0 - q1) * flip(q2, u2);
        // Conflicting words from two noiseless links cannot occur; call it a coin flip.
        let (p1, p0) = if one + zero > 0.0 {
            (one / (one + zero), zero / (one + zero))
        } else {
            (0.5, 0.5)
        };
        // The cell at or above 1/2 is divided out and its partner is its
        // complement; `1 - p` is exact there, so the symmetry is exact both ways.
        if p1 >= 0.5 {
            entries[0][u2 as usize] = p1;
            entries[1][!u2 as usize] = 1.0 - p1;
        } else {
            entries[1][!u2 as usize] = p0;
            entries[0][u2 as usize] = 1.0 - p0;
        }
    }
    Ok(PosteriorTable { q1, q2, entries })
}

/// Per-symbol probability that the source bit is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftSequence {
    probs: Vec<f64>,
}

impl SoftSequence {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        for &p in &probs {
            check_closed("probability", p, 0.0, 1.0, "[0, 1]")?;
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

pub fn soft_reconstruct(u1_hat: &BitSequence, u2_hat: &BitSequence, table: &PosteriorTable) -> Result<SoftSequence> {
    if u1_hat.len() != u2_hat.len() {
        return Err(Error::DimensionMismatch {
            expected: u1_hat.len(),
            actual: u2_hat.len(),
        });
    }
    Ok(SoftSequence {
        probs: u1_hat.iter().zip(u2_hat.iter()).map(|(a, b)| table.get(a, b)).collect(),
    })
}

#[inline]
fn symbol_loss(x: bool, p_one: f64) -> f64 {
    let p = if x { p_one } else { 1.0 - p_one };
    -p.max(PROB_FLOOR).log2()
}

/// Average log-loss in bits per symbol.
pub fn log_loss(x: &BitSequence, xhat: &SoftSequence) -> Result<f64> {
    if x.len() != xhat.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: xhat.len(),
        });
    }
    if x.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = x.iter().zip(&xhat.probs).map(|(b, &p)| symbol_loss(b, p)).sum();
    Ok(sum / x.len() as f64)
}

/// Log-loss of the table's soft reconstruction from `(u1, u2)`.
pub fn empirical_distortion(
    x: &BitSequence,
    u1: &BitSequence,
    u2: &BitSequence,
    table: &PosteriorTable,
) -> Result<f64> {
    log_loss(x, &soft_reconstruct(u1, u2, table)?)
}

/// The same quantity summed over the empirical joint type of `(x, u1, u2)`.
pub fn empirical_distortion_by_type(
    x: &BitSequence,
    u1: &BitSequence,
    u2: &BitSequence,
    table: &PosteriorTable,
) -> Result<f64> {
    let n = x.len();
    for other in [u1, u2] {
        if other.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: other.len(),
            });
        }
    }
    if n == 0 {
        return Ok(0.0);
    }
    let mut counts = [0usize; 8];
    for i in 0..n {
        counts[(x.get(i) as usize) << 2 | (u1.get(i) as usize) << 1 | u2.get(i) as usize] += 1;
    }
    let mut d = 0.0;
    for (idx, &c) in counts.iter().enumerate() {
        if c > 0 {
            let (xb, a, b) = (idx & 4 != 0, idx & 2 != 0, idx & 1 != 0);
            d += c as f64 / n as f64 * symbol_loss(xb, table.get(a, b));
        }
    }
    Ok(d)
}
