//! Nested LDGM/LDPC code structures.
//!
//! The LDGM quantization codebook uses a systematic generator `G = [I_m | P]`
//! whose parity columns all have the same weight (`check_degree`), so the
//! info-bit degrees come out approximately Poisson. Its parity form is the
//! equally sparse `H_LDGM = [P^T | I_{n-m}]`. The binning rows `delta_h`
//! act on the systematic positions only and form a staircase: row `r` owns
//! a pivot column `order[r]` and its other columns are pivots of later rows.
//! Any prefix-closed stack of binning rows therefore has full row rank, and
//! the full `m`-row stack can be inverted by back-substitution.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bits::BitSequence;
use super::degree::DegreeDistribution;
use super::sparse::{matvec_gf2, SparseBitMatrix};
use crate::error::{Error, Result};

const FORMAT_TAG: &str = "ceo-compound-code v1";
const CYCLE_RETRIES: usize = 20;

/// Block length and per-link message sizes of a two-link code design.
///
/// A silent link has `m = k = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParameters {
    pub n: usize,
    pub m1: usize,
    pub m2: usize,
    pub k1: usize,
    pub k2: usize,
}

impl CodeParameters {
    pub fn new(n: usize, m1: usize, m2: usize, k1: usize, k2: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InfeasibleCode("block length must be positive".into()));
        }
        for (i, m, k) in [(1, m1, k1), (2, m2, k2)] {
            if k > m || m > n {
                return Err(Error::InfeasibleCode(format!(
                    "link {i}: need k <= m <= n, got k={k}, m={m}, n={n}"
                )));
            }
        }
        Ok(Self { n, m1, m2, k1, k2 })
    }

    fn link(&self, i: usize) -> (usize, usize) {
        match i {
            1 => (self.m1, self.k1),
            2 => (self.m2, self.k2),
            _ => panic!("link index {i} not in {{1, 2}}"),
        }
    }

    /// `R_{i,1} = m_i / n`.
    pub fn stage1_rate(&self, link: usize) -> f64 {
        self.link(link).0 as f64 / self.n as f64
    }

    /// `R_{i,2} = (m_i - k_i) / n`.
    pub fn stage2_rate(&self, link: usize) -> f64 {
        let (m, k) = self.link(link);
        (m - k) as f64 / self.n as f64
    }

    /// `R_i = R_{i,1} - R_{i,2}`.
    pub fn net_rate(&self, link: usize) -> f64 {
        self.stage1_rate(link) - self.stage2_rate(link)
    }

    pub fn is_silent(&self, link: usize) -> bool {
        self.link(link).0 == 0
    }

    /// `k_i = m_i`: the info word is sent as is.
    pub fn is_bypass(&self, link: usize) -> bool {
        let (m, k) = self.link(link);
        m > 0 && k == m
    }
}

/// LDGM generator nested with an LDPC parity-check stack `[h_ldgm; delta_h]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompoundCode {
    n: usize,
    m: usize,
    k: usize,
    check_degree: usize,
    seed: u64,
    generator: SparseBitMatrix,
    h_ldgm: SparseBitMatrix,
    delta_h: SparseBitMatrix,
    /// Pivot column of every staircase row, including rows not in `delta_h`.
    order: Vec<usize>,
}

impl CompoundCode {
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn check_degree(&self) -> usize {
        self.check_degree
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn generator(&self) -> &SparseBitMatrix {
        &self.generator
    }
    pub fn h_ldgm(&self) -> &SparseBitMatrix {
        &self.h_ldgm
    }
    pub fn delta_h(&self) -> &SparseBitMatrix {
        &self.delta_h
    }
    pub fn pivot_order(&self) -> &[usize] {
        &self.order
    }

    /// `[h_ldgm; delta_h]`.
    pub fn full_stack(&self) -> SparseBitMatrix {
        self.h_ldgm.vstack(&self.delta_h).expect("same column count")
    }

    /// Parity columns of `P`, i.e. the systematic part of each `h_ldgm` row.
    pub(crate) fn parity_support(&self, j: usize) -> &[usize] {
        let row = self.h_ldgm.row(j);
        &row[..row.len() - 1]
    }

    /// Codeword `u = w^T G`.
    pub fn encode_info(&self, w: &BitSequence) -> Result<BitSequence> {
        if w.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                actual: w.len(),
            });
        }
        let mut u = BitSequence::zeros(self.n);
        for i in 0..self.m {
            if w.get(i) {
                u.set(i, true);
            }
        }
        for j in 0..self.n - self.m {
            if w.parity_at(self.parity_support(j)) {
                u.set(self.m + j, true);
            }
        }
        Ok(u)
    }

    /// Number of `h_ldgm` checks violated by `u`.
    pub fn ldgm_violations(&self, u: &BitSequence) -> Result<usize> {
        Ok(matvec_gf2(&self.h_ldgm, u)?.weight())
    }

    /// Info word of an LDGM codeword (its systematic part).
    pub fn info_word(&self, u: &BitSequence) -> BitSequence {
        u.slice(0, self.m)
    }

    /// Writes a versioned text dump of all row supports.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{FORMAT_TAG}").unwrap();
        writeln!(out, "n {} m {} k {} check_degree {} seed {}", self.n, self.m, self.k, self.check_degree, self.seed)
            .unwrap();
        write_rows(&mut out, "parity", (0..self.n - self.m).map(|j| self.parity_support(j)));
        write_rows(&mut out, "delta_h", self.delta_h.row_supports());
        writeln!(out, "order").unwrap();
        writeln!(out, "{}", join(&self.order)).unwrap();
        out
    }

    pub fn deserialize(text: &str) -> Result<Self> {
        // `#` lines are comments, so artifacts can carry a provenance preamble.
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end()))
            .filter(|(_, l)| !l.starts_with('#'));
        let bad = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut next = |what: &str| lines.next().ok_or_else(|| bad(0, &format!("missing {what}")));

        let (ln, tag) = next("header")?;
        if tag != FORMAT_TAG {
            return Err(bad(ln, &format!("unknown format tag {tag:?}")));
        }
        let (ln, dims) = next("dimensions")?;
        let fields: Vec<&str> = dims.split_whitespace().collect();
        let keys = ["n", "m", "k", "check_degree", "seed"];
        if fields.len() != 10 || (0..5).any(|i| fields[2 * i] != keys[i]) {
            return Err(bad(ln, "expected `n _ m _ k _ check_degree _ seed _`"));
        }
        let num = |s: &str| s.parse::<u64>().map_err(|_| bad(ln, &format!("bad number {s:?}")));
        let (n, m, k, dc, seed) = (
            num(fields[1])? as usize,
            num(fields[3])? as usize,
            num(fields[5])? as usize,
            num(fields[7])? as usize,
            num(fields[9])?,
        );
        if k > m || m > n || n == 0 {
            return Err(bad(ln, "need 0 <= k <= m <= n, n > 0"));
        }

        let mut read_block = |name: &str, count: usize| -> Result<Vec<Vec<usize>>> {
            let (ln, head) = next(name)?;
            if head != name {
                return Err(bad(ln, &format!("expected section {name:?}")));
            }
            (0..count)
                .map(|_| {
                    let (ln, row) = next(name)?;
                    parse_row(row).ok_or_else(|| bad(ln, "bad row support"))
                })
                .collect()
        };
        let parity = read_block("parity", n - m)?;
        let delta = read_block("delta_h", k)?;
        let order = read_block("order", 1)?.pop().unwrap_or_default();

        let h_ldgm = parity_form(n, m, &parity)?;
        let delta_h = SparseBitMatrix::from_rows(n, delta)?;
        let mut sorted = order.clone();
        sorted.sort_unstable();
        if sorted != (0..m).collect::<Vec<_>>() {
            return Err(Error::InfeasibleCode("pivot order is not a permutation of 0..m".into()));
        }
        Ok(Self {
            n,
            m,
            k,
            check_degree: dc,
            seed,
            generator: generator_form(n, m, &h_ldgm),
            h_ldgm,
            delta_h,
            order,
        })
    }
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn write_rows<'a>(out: &mut String, name: &str, rows: impl Iterator<Item = &'a [usize]>) {
    writeln!(out, "{name}").unwrap();
    for r in rows {
        writeln!(out, "{}", join(r)).unwrap();
    }
}

fn parse_row(line: &str) -> Option<Vec<usize>> {
    line.split_whitespace().map(|t| t.parse().ok()).collect()
}

/// `[P^T | I]` from the parity columns of `P`.
fn parity_form(n: usize, m: usize, parity: &[Vec<usize>]) -> Result<SparseBitMatrix> {
    let rows = parity
        .iter()
        .enumerate()
        .map(|(j, p)| {
            if p.iter().any(|&i| i >= m) {
                return Err(Error::InfeasibleCode(format!("parity column {j} leaves the systematic block")));
            }
            let mut r = p.clone();
            r.push(m + j);
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    SparseBitMatrix::from_rows(n, rows)
}

/// `[I | P]` given `[P^T | I]`.
fn generator_form(n: usize, m: usize, h_ldgm: &SparseBitMatrix) -> SparseBitMatrix {
    let mut rows: Vec<Vec<usize>> = (0..m).map(|i| vec![i]).collect();
    for j in 0..n - m {
        let row = h_ldgm.row(j);
        for &i in &row[..row.len() - 1] {
            rows[i].push(m + j);
        }
    }
    SparseBitMatrix::from_rows(n, rows).expect("generator rows are sorted and in range")
}

/// Draws `n - m` parity columns of weight `dc` over `m` info bits, resampling
/// a column a bounded number of times when it would close a 4-cycle.
fn draw_parity_columns(n: usize, m: usize, dc: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut pairs: HashSet<(u32, u32)> = HashSet::new();
    let all: Vec<usize> = (0..m).collect();
    let mut cols = Vec::with_capacity(n - m);
    for _ in 0..n - m {
        let mut col = Vec::new();
        for attempt in 0..=CYCLE_RETRIES {
            col = all.choose_multiple(rng, dc).copied().collect();
            col.sort_unstable();
            let clean = col
                .iter()
                .enumerate()
                .all(|(a, &x)| col[a + 1..].iter().all(|&y| !pairs.contains(&(x as u32, y as u32))));
            if clean || attempt == CYCLE_RETRIES {
                break;
            }
        }
        for (a, &x) in col.iter().enumerate() {
            for &y in &col[a + 1..] {
                pairs.insert((x as u32, y as u32));
            }
        }
        cols.push(col);
    }
    cols
}

/// Staircase of `rows` binning rows over the systematic block.
fn draw_staircase(
    n: usize,
    m: usize,
    rows: usize,
    dd: &DegreeDistribution,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut supports = Vec::with_capacity(rows);
    for r in 0..rows {
        let later = &order[r + 1..];
        let extra = (dd.sample(rng) - 1).min(later.len());
        let mut row: Vec<usize> = later.choose_multiple(rng, extra).copied().collect();
        row.push(order[r]);
        row.sort_unstable();
        supports.push(row);
    }
    debug_assert!(supports.iter().flatten().all(|&c| c < n));
    (supports, order)
}

fn validate_shape(n: usize, m: usize, k: usize, dc: usize) -> Result<()> {
    if !(k <= m && m <= n && n > 0) {
        return Err(Error::InfeasibleCode(format!("need 0 <= k <= m <= n, got n={n}, m={m}, k={k}")));
    }
    if m < n {
        if dc < 3 {
            return Err(Error::InfeasibleCode(format!("check degree {dc} below 3")));
        }
        if dc > m {
            return Err(Error::InfeasibleCode(format!("check degree {dc} exceeds info length {m}")));
        }
    }
    Ok(())
}

fn build_ldgm(n: usize, m: usize, dc: usize, rng: &mut ChaCha8Rng) -> Result<(SparseBitMatrix, SparseBitMatrix)> {
    let parity = draw_parity_columns(n, m, dc, rng);
    let h_ldgm = parity_form(n, m, &parity)?;
    let generator = generator_form(n, m, &h_ldgm);
    Ok((generator, h_ldgm))
}

/// Builds a compound code with `k` binning rows. Deterministic in `seed`.
pub fn build_compound_code(
    n: usize,
    m: usize,
    k: usize,
    ldgm_check_degree: usize,
    delta_dd: &DegreeDistribution,
    seed: u64,
) -> Result<CompoundCode> {
    validate_shape(n, m, k, ldgm_check_degree)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (generator, h_ldgm) = build_ldgm(n, m, ldgm_check_degree, &mut rng)?;
    let (rows, order) = draw_staircase(n, m, k, delta_dd, &mut rng);
    Ok(CompoundCode {
        n,
        m,
        k,
        check_degree: ldgm_check_degree,
        seed,
        generator,
        h_ldgm,
        delta_h: SparseBitMatrix::from_rows(n, rows)?,
        order,
    })
}

/// Two compound codes sharing one LDGM generator and one staircase.
///
/// The first `common` staircase rows are sent by both links, the next
/// `k1 - common` by link 1 only and the remaining `k2 - common` by link 2
/// only, where `common = k1 + k2 - m`. Together the links therefore pin
/// down all `m` info bits of either codeword once their difference is known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodePair {
    pub link1: CompoundCode,
    pub link2: CompoundCode,
    common: usize,
    master: SparseBitMatrix,
}

impl CodePair {
    pub fn common_rows(&self) -> usize {
        self.common
    }

    /// All `m` staircase rows in pivot order.
    pub fn master(&self) -> &SparseBitMatrix {
        &self.master
    }

    /// Rows sent by one link only, as indices into `master`.
    pub(crate) fn private_rows(&self, link: usize) -> std::ops::Range<usize> {
        let k1 = self.link1.k;
        match link {
            1 => self.common..k1,
            _ => k1..self.master.rows(),
        }
    }

    /// The code defined by the common binning rows alone.
    pub fn common_code(&self) -> CompoundCode {
        let rows: Vec<usize> = (0..self.common).collect();
        CompoundCode {
            k: self.common,
            delta_h: self.master.select_rows(&rows),
            ..self.link1.clone()
        }
    }

    /// Solves `master * w = s_full` by back-substitution over the staircase.
    pub fn resolve_info_word(&self, s_full: &BitSequence) -> Result<BitSequence> {
        resolve_staircase(&self.master, &self.link1.order, s_full)
    }
}

/// Back-substitution for a full `m`-row staircase with the given pivots.
pub(crate) fn resolve_staircase(rows: &SparseBitMatrix, order: &[usize], s: &BitSequence) -> Result<BitSequence> {
    let m = order.len();
    if rows.rows() != m || s.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: s.len().min(rows.rows()),
        });
    }
    let mut w = BitSequence::zeros(m);
    for r in (0..m).rev() {
        let pivot = order[r];
        let mut bit = s.get(r);
        for &c in rows.row(r) {
            if c != pivot && w.get(c) {
                bit = !bit;
            }
        }
        w.set(pivot, bit);
    }
    Ok(w)
}

/// Builds a [`CodePair`] for two links with the same info length `m`.
pub fn build_code_pair(
    n: usize,
    m: usize,
    k1: usize,
    k2: usize,
    ldgm_check_degree: usize,
    delta_dd: &DegreeDistribution,
    seed: u64,
) -> Result<CodePair> {
    validate_shape(n, m, k1.max(k2), ldgm_check_degree)?;
    if k1 + k2 < m {
        return Err(Error::InfeasibleCode(format!(
            "paired codes need k1 + k2 >= m, got {k1} + {k2} < {m}"
        )));
    }
    let common = k1 + k2 - m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (generator, h_ldgm) = build_ldgm(n, m, ldgm_check_degree, &mut rng)?;
    let (rows, order) = draw_staircase(n, m, m, delta_dd, &mut rng);
    let master = SparseBitMatrix::from_rows(n, rows)?;
    let link_rows = |private: std::ops::Range<usize>| -> Vec<usize> { (0..common).chain(private).collect() };
    let make = |k: usize, rows: Vec<usize>| CompoundCode {
        n,
        m,
        k,
        check_degree: ldgm_check_degree,
        seed,
        generator: generator.clone(),
        h_ldgm: h_ldgm.clone(),
        delta_h: master.select_rows(&rows),
        order: order.clone(),
    };
    let link1 = make(k1, link_rows(common..k1));
    let link2 = make(k2, link_rows(k1..m));
    Ok(CodePair {
        link1,
        link2,
        common,
        master,
    })
}

/// Syndrome `delta_h * u` of an LDGM codeword.
pub fn syndrome(code: &CompoundCode, u: &BitSequence) -> Result<BitSequence> {
    let violated = code.ldgm_violations(u)?;
    if violated > 0 {
        return Err(Error::NotACodeword { violated });
    }
    matvec_gf2(&code.delta_h, u)
}

/// Recovers the info word of a code whose binning stack is full (`k = m`).
pub fn resolve_full_syndrome(code: &CompoundCode, s: &BitSequence) -> Result<BitSequence> {
    if code.k != code.m {
        return Err(Error::InfeasibleCode(format!("binning stack has rank {} < m = {}", code.k, code.m)));
    }
    resolve_staircase(&code.delta_h, &code.order, s)
}

/// Random info word and its codeword, for tests and benchmarks.
pub fn random_codeword<R: Rng + ?Sized>(code: &CompoundCode, rng: &mut R) -> (BitSequence, BitSequence) {
    let w = BitSequence::bernoulli(code.m, 0.5, rng);
    let u = code.encode_info(&w).expect("info length matches");
    (w, u)
}
