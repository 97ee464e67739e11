//! Joint sum-product decoding of the two links.
//!
//! Each round runs one sum-product decoder per link for `l` iterations,
//! seeded with the other link's latest hard decisions as side information
//! of reliability `ln((1-q)/q)`. Both links exchange simultaneously.
//!
//! When the links share a generator and a staircase ([`CodePair`]) the
//! first round is seeded differently: the XOR of the common syndromes is the
//! syndrome of the difference word `u1 xor u2`, whose bits are 1 with
//! probability `q`. Decoding that word and back-substituting through the
//! full staircase yields both codewords directly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sp::{side_info_llr, SpParams, SyndromeGraph};
use crate::error::{check_closed, Error, Result};
use crate::gf2::{matvec_gf2, BitSequence, CodePair, CompoundCode};

/// Amplitude of the random LLRs used when nothing is known about a link.
const JITTER: f64 = 0.01;

/// Equivalent BSC between the two quantized words.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirtualChannel {
    q: f64,
}

impl VirtualChannel {
    pub fn new(q: f64) -> Result<Self> {
        check_closed("q", q, 0.0, 0.5, "[0, 0.5]")?;
        Ok(Self { q })
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// One link as seen by the fusion center.
#[derive(Debug, Clone, Copy)]
pub struct LinkInput<'a> {
    pub code: &'a CompoundCode,
    /// Syndrome, or the info word itself when `k = m`.
    pub payload: &'a BitSequence,
}

impl LinkInput<'_> {
    fn is_bypass(&self) -> bool {
        self.code.k() == self.code.m()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkEstimate {
    pub u_hat: BitSequence,
    /// The estimate satisfies every check of its link.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JspOutput {
    pub link1: Option<LinkEstimate>,
    pub link2: Option<LinkEstimate>,
    /// JSP rounds actually run.
    pub rounds: usize,
    /// Whether the difference-word start recovered both links.
    pub difference_start: bool,
    /// Estimates after every round, for residual-error bookkeeping.
    pub history: Vec<[Option<BitSequence>; 2]>,
}

impl JspOutput {
    /// Fraction of positions where each estimate differs from the truth.
    pub fn residual_ber(&self, truth1: Option<&BitSequence>, truth2: Option<&BitSequence>) -> Result<[f64; 2]> {
        Ok([ber(self.link1.as_ref().map(|e| &e.u_hat), truth1)?, ber(self.link2.as_ref().map(|e| &e.u_hat), truth2)?])
    }
}

pub(crate) fn ber(est: Option<&BitSequence>, truth: Option<&BitSequence>) -> Result<f64> {
    match (est, truth) {
        (Some(e), Some(t)) if !t.is_empty() => Ok(e.hamming_distance(t)? as f64 / t.len() as f64),
        _ => Ok(0.0),
    }
}

struct LinkState<'a> {
    input: LinkInput<'a>,
    graph: Option<SyndromeGraph>,
    estimate: Option<BitSequence>,
    valid: bool,
}

impl<'a> LinkState<'a> {
    fn new(input: LinkInput<'a>) -> Result<Self> {
        let code = input.code;
        if input.is_bypass() {
            let u = code.encode_info(input.payload)?;
            return Ok(Self {
                input,
                graph: None,
                estimate: Some(u),
                valid: true,
            });
        }
        Ok(Self {
            input,
            graph: Some(SyndromeGraph::for_code(code, input.payload)?),
            estimate: None,
            valid: false,
        })
    }

    fn known(&self) -> bool {
        self.graph.is_none()
    }

    fn satisfies(&self, u: &BitSequence) -> Result<bool> {
        let code = self.input.code;
        Ok(code.ldgm_violations(u)? == 0 && matvec_gf2(code.delta_h(), u)? == *self.input.payload)
    }

    /// One sum-product pass; a passing previous estimate is kept when the
    /// new pass fails its checks.
    fn step(&mut self, prior: &[f64], iters: usize, clip: f64) {
        let Some(graph) = &self.graph else { return };
        let out = graph.decode(prior, iters, clip);
        if out.converged || !self.valid {
            self.estimate = Some(out.u_hat);
            self.valid = out.converged;
        }
    }
}

fn jitter(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-JITTER..=JITTER)).collect()
}

/// Decodes the difference word of a paired code and resolves both codewords.
fn difference_start(
    pair: &CodePair,
    s1: &BitSequence,
    s2: &BitSequence,
    q: f64,
    params: &SpParams,
) -> Result<Option<(BitSequence, BitSequence)>> {
    let kc = pair.common_rows();
    let common = pair.common_code();
    let sc = s1.slice(0, kc).xor(&s2.slice(0, kc))?;
    let graph = SyndromeGraph::for_code(&common, &sc)?;
    let prior = side_info_llr(&BitSequence::zeros(common.n()), q, params.llr_clip)?;
    let out = graph.decode(&prior, params.max_iters, params.llr_clip);
    if !out.converged {
        return Ok(None);
    }
    let z = out.u_hat;
    let wz = common.info_word(&z);
    // Rows private to link 2, evaluated on u1 = u2 xor z.
    let b2 = pair.master().select_rows(&pair.private_rows(2).collect::<Vec<_>>());
    let b2_u1 = s2.slice(kc, s2.len()).xor(&matvec_gf2(&b2, &pad_info(&wz, common.n()))?)?;
    let full = s1.concat(&b2_u1);
    let w1 = pair.resolve_info_word(&full)?;
    let u1 = pair.link1.encode_info(&w1)?;
    let u2 = u1.xor(&z)?;
    Ok(Some((u1, u2)))
}

/// Info word placed on the systematic positions of a length-`n` word.
fn pad_info(w: &BitSequence, n: usize) -> BitSequence {
    let mut out = BitSequence::zeros(n);
    for i in 0..w.len() {
        if w.get(i) {
            out.set(i, true);
        }
    }
    out
}

fn check_pair(pair: &CodePair, l1: &LinkInput, l2: &LinkInput) -> Result<()> {
    if pair.link1 != *l1.code || pair.link2 != *l2.code {
        return Err(Error::InfeasibleCode("code pair does not match the link codes".into()));
    }
    Ok(())
}

/// Joint decoding of both links. A missing link is silent.
pub fn jsp_decode(
    link1: Option<LinkInput>,
    link2: Option<LinkInput>,
    pair: Option<&CodePair>,
    vc: &VirtualChannel,
    params: &SpParams,
    seed: u64,
) -> Result<JspOutput> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for l in [&link1, &link2].into_iter().flatten() {
        let code = l.code;
        let expected = if l.is_bypass() { code.m() } else { code.k() };
        if l.payload.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: l.payload.len(),
            });
        }
    }
    if let (Some(l1), Some(l2)) = (&link1, &link2) {
        if l1.code.n() != l2.code.n() {
            return Err(Error::DimensionMismatch {
                expected: l1.code.n(),
                actual: l2.code.n(),
            });
        }
    }

    let mut states = [link1.map(LinkState::new).transpose()?, link2.map(LinkState::new).transpose()?];
    let mut out = JspOutput {
        link1: None,
        link2: None,
        rounds: 0,
        difference_start: false,
        history: Vec::new(),
    };
    let clip = params.llr_clip;
    let q = vc.q;

    match &mut states {
        [Some(a), Some(b)] if !a.known() || !b.known() => {
            let n = a.input.code.n();
            if let (Some(pair), false, false) = (pair, a.known(), b.known()) {
                check_pair(pair, &a.input, &b.input)?;
                if let Some((u1, u2)) = difference_start(pair, a.input.payload, b.input.payload, q, params)? {
                    out.difference_start = true;
                    a.valid = a.satisfies(&u1)?;
                    b.valid = b.satisfies(&u2)?;
                    a.estimate = Some(u1);
                    b.estimate = Some(u2);
                }
            }
            if a.known() || b.known() {
                // Fixed side information: a single long pass is all JSP can do.
                let (known, other) = if a.known() { (&*a, &mut *b) } else { (&*b, &mut *a) };
                let prior = side_info_llr(known.estimate.as_ref().expect("known link"), q, clip)?;
                other.step(&prior, params.max_iters, clip);
                out.rounds = 1;
            } else {
                for round in 0..params.rounds {
                    if a.valid && b.valid {
                        break;
                    }
                    let prior_for = |other: &LinkState, rng: &mut ChaCha8Rng| -> Result<Vec<f64>> {
                        match &other.estimate {
                            Some(u) => side_info_llr(u, q, clip),
                            None => Ok(jitter(n, rng)),
                        }
                    };
                    let pa = prior_for(b, &mut rng)?;
                    let pb = prior_for(a, &mut rng)?;
                    if !a.valid {
                        a.step(&pa, params.inner_iters, clip);
                    }
                    if !b.valid {
                        b.step(&pb, params.inner_iters, clip);
                    }
                    out.rounds = round + 1;
                    out.history.push([a.estimate.clone(), b.estimate.clone()]);
                }
            }
        }
        [Some(s), None] | [None, Some(s)] if !s.known() => {
            let n = s.input.code.n();
            s.step(&vec![0.0; n], params.max_iters, clip);
            out.rounds = 1;
        }
        _ => {}
    }

    let [a, b] = states;
    let finish = |s: Option<LinkState>| {
        s.map(|s| LinkEstimate {
            converged: s.valid,
            u_hat: s.estimate.unwrap_or_else(|| BitSequence::zeros(s.input.code.n())),
        })
    };
    out.link1 = finish(a);
    out.link2 = finish(b);
    if out.history.is_empty() {
        out.history.push([
            out.link1.as_ref().map(|e| e.u_hat.clone()),
            out.link2.as_ref().map(|e| e.u_hat.clone()),
        ]);
    }
    Ok(out)
}
