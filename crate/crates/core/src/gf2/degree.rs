use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node-perspective degree distribution: fraction of nodes of each degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistribution {
    pairs: Vec<(usize, f64)>,
}

const SUM_TOL: f64 = 1e-9;

impl DegreeDistribution {
    pub fn new(mut pairs: Vec<(usize, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidDistribution("no degrees given".into()));
        }
        pairs.sort_by_key(|&(d, _)| d);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidDistribution(format!("degree {} listed twice", w[0].0)));
            }
        }
        for &(d, f) in &pairs {
            if d == 0 {
                return Err(Error::InvalidDistribution("degree 0".into()));
            }
            if !(f.is_finite() && (0.0..=1.0).contains(&f)) {
                return Err(Error::InvalidDistribution(format!("fraction {f} for degree {d}")));
            }
        }
        let sum: f64 = pairs.iter().map(|p| p.1).sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("fractions sum to {sum}")));
        }
        Ok(Self { pairs })
    }

    pub fn regular(degree: usize) -> Result<Self> {
        Self::new(vec![(degree, 1.0)])
    }

    pub fn pairs(&self) -> &[(usize, f64)] {
        &self.pairs
    }

    pub fn max_degree(&self) -> usize {
        self.pairs.last().map_or(0, |p| p.0)
    }

    pub fn mean(&self) -> f64 {
        self.pairs.iter().map(|&(d, f)| d as f64 * f).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for &(d, f) in &self.pairs {
            acc += f;
            if u < acc {
                return d;
            }
        }
        self.max_degree()
    }
}

/// Parses one `degree fraction` pair per line. `#` starts a comment.
pub fn load_degree_distribution(text: &str) -> Result<DegreeDistribution> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (d, f) = match (fields.next(), fields.next(), fields.next()) {
            (Some(d), Some(f), None) => (d, f),
            _ => {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected `degree fraction`, got {line:?}"),
                })
            }
        };
        let d: usize = d.parse().map_err(|_| Error::Parse {
            line: i + 1,
            msg: format!("bad degree {d:?}"),
        })?;
        let f: f64 = f.parse().map_err(|_| Error::Parse {
            line: i + 1,
            msg: format!("bad fraction {f:?}"),
        })?;
        pairs.push((d, f));
    }
    DegreeDistribution::new(pairs)
}

impl FromStr for DegreeDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        load_degree_distribution(s)
    }
}

impl fmt::Display for DegreeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (d, frac) in &self.pairs {
            writeln!(f, "{d} {frac}")?;
        }
        Ok(())
    }
}
