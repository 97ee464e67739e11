//! Rate allocation for the two-stage (quantize, then bin) link encoders.

use serde::{Deserialize, Serialize};

use crate::bounds::{conv, hb, ObservationModel, TestChannelPair};
use crate::error::{Error, Result};
use crate::gf2::CodeParameters;

/// Split parameter `delta` and the four rate slacks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSplit {
    pub delta: f64,
    pub eps_11: f64,
    pub eps_12: f64,
    pub eps_21: f64,
    pub eps_22: f64,
}

const MAX_SLACK: f64 = 0.05;

/// Crossover of the virtual channel between the two quantized words,
/// `d_11 * d_21 * p1 * p2`.
pub fn virtual_crossover(targets: &TestChannelPair, model: &ObservationModel) -> f64 {
    conv(conv(targets.d1(), targets.d2()), model.p())
}

/// Treats a stage-1 target at (or numerically at) 0.5 as a silent link.
fn silent(d: f64) -> bool {
    d >= 0.5 - 1e-12
}

impl RateSplit {
    pub fn validate(&self, targets: &TestChannelPair, model: &ObservationModel) -> Result<()> {
        for (name, v) in [
            ("eps_11", self.eps_11),
            ("eps_12", self.eps_12),
            ("eps_21", self.eps_21),
            ("eps_22", self.eps_22),
        ] {
            if !(v.is_finite() && (0.0..MAX_SLACK).contains(&v)) {
                return Err(Error::Domain {
                    name,
                    value: v,
                    range: "[0, 0.05)",
                });
            }
        }
        if silent(targets.d1()) || silent(targets.d2()) {
            return Ok(());
        }
        let cap = 1.0 - hb(virtual_crossover(targets, model));
        if !(self.delta > 0.0 && self.delta < cap) {
            return Err(Error::InfeasibleSplit(format!(
                "delta = {} must lie in (0, {cap:.6})",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Block sizes `(m_i, k_i)` realizing the stage-1 targets and the split.
///
/// A link whose target is 0.5 stays silent (`m = k = 0`); its partner then
/// has nothing to bin against and sends its info word (`k = m`).
pub fn allocate_rates(
    n: usize,
    targets: &TestChannelPair,
    model: &ObservationModel,
    split: &RateSplit,
) -> Result<CodeParameters> {
    split.validate(targets, model)?;
    let nf = n as f64;
    let stage1 = |d: f64, eps: f64| -> usize {
        if silent(d) {
            0
        } else {
            ((nf * (1.0 - hb(d) + eps)).ceil() as usize).min(n)
        }
    };
    let m1 = stage1(targets.d1(), split.eps_11);
    let m2 = stage1(targets.d2(), split.eps_21);
    if m1 == 0 || m2 == 0 {
        return CodeParameters::new(n, m1, m2, m1, m2);
    }
    let q = virtual_crossover(targets, model);
    let bin1 = (nf * (1.0 - hb(q) - split.delta - split.eps_12)).ceil();
    let bin2 = (nf * (split.delta - split.eps_22)).ceil();
    let k = |m: usize, bin: f64, link: usize| -> Result<usize> {
        let k = m as f64 - bin.max(0.0);
        if k < 0.0 {
            Err(Error::InfeasibleSplit(format!("link {link}: binning size {bin} exceeds m = {m}")))
        } else {
            Ok(k as usize)
        }
    };
    CodeParameters::new(n, m1, m2, k(m1, bin1, 1)?, k(m2, bin2, 2)?)
}

/// LDGM check degree used when none is configured, fitted so that BiP
/// lands near the rate-distortion limit at n = 10^4.
pub fn default_check_degree(rate: f64) -> usize {
    if rate >= 1.0 {
        return 3;
    }
    let dc = 4.9 / (1.0 - rate).powf(0.627);
    (dc.round() as usize).max(3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym() -> ObservationModel {
        ObservationModel::new(0.15, 0.15).unwrap()
    }

    fn table_split() -> RateSplit {
        RateSplit {
            delta: 0.0421,
            eps_11: 0.0089,
            eps_12: 0.0001,
            eps_21: 0.0089,
            eps_22: 0.01215,
        }
    }

    #[test]
    fn reproduces_table_row() {
        let t = TestChannelPair::new(0.1, 0.1).unwrap();
        let p = allocate_rates(10_000, &t, &sym(), &table_split()).unwrap();
        assert_eq!((p.m1, p.m2, p.k1, p.k2), (5400, 5400, 5100, 5100));
    }

    #[test]
    fn implied_rates_match_closed_form() {
        let t = TestChannelPair::new(0.1, 0.1).unwrap();
        let s = table_split();
        let n = 10_000;
        let p = allocate_rates(n, &t, &sym(), &s).unwrap();
        let q = virtual_crossover(&t, &sym());
        let r1 = hb(q) - hb(0.1) + s.delta + s.eps_11 + s.eps_12;
        let r2 = 1.0 - hb(0.1) - s.delta + s.eps_21 + s.eps_22;
        let tol = 2.0 / n as f64;
        assert!((p.net_rate(1) - r1).abs() <= tol, "{} vs {r1}", p.net_rate(1));
        assert!((p.net_rate(2) - r2).abs() <= tol, "{} vs {r2}", p.net_rate(2));
        let cap = 1.0 - hb(q);
        assert!(cap > 0.0715 && cap < 0.0725);
        assert!(p.stage2_rate(1) < cap && p.stage2_rate(2) < cap);
    }

    #[test]
    fn delta_at_upper_limit_removes_link1_binning() {
        let t = TestChannelPair::new(0.1, 0.1).unwrap();
        let cap = 1.0 - hb(virtual_crossover(&t, &sym()));
        let s = RateSplit {
            delta: cap - 1e-9,
            eps_11: 0.0,
            eps_12: 0.0,
            eps_21: 0.0,
            eps_22: 0.0,
        };
        let p = allocate_rates(10_000, &t, &sym(), &s).unwrap();
        assert!(p.stage2_rate(1) <= 1e-4);
    }

    #[test]
    fn silent_partner_means_bypass() {
        let t = TestChannelPair::new(0.1, 0.5).unwrap();
        let s = RateSplit {
            delta: 0.0,
            eps_11: 0.0089,
            eps_12: 0.0,
            eps_21: 0.0,
            eps_22: 0.0,
        };
        let p = allocate_rates(10_000, &t, &sym(), &s).unwrap();
        assert_eq!((p.m1, p.k1, p.m2, p.k2), (5400, 5400, 0, 0));
        assert!(p.is_bypass(1) && p.is_silent(2));
    }

    #[test]
    fn rejects_bad_splits() {
        let t = TestChannelPair::new(0.1, 0.1).unwrap();
        let mut s = table_split();
        s.delta = 0.5;
        assert!(matches!(allocate_rates(10_000, &t, &sym(), &s), Err(Error::InfeasibleSplit(_))));
        let mut s = table_split();
        s.eps_12 = 0.06;
        assert!(matches!(allocate_rates(10_000, &t, &sym(), &s), Err(Error::Domain { .. })));
    }

    #[test]
    fn check_degree_defaults() {
        assert_eq!(default_check_degree(0.54), 8);
        assert_eq!(default_check_degree(0.92), 24);
        assert!(default_check_degree(0.13) >= 3);
    }
}
