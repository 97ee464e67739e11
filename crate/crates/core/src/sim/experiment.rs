//! One experiment: build the codes once, then run seeded trials of the full
//! chain and average them.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::source::{derive_seed, simulate_source};
use crate::bounds::{
    conv, hb, optimize_crossovers, region_bounds, LagrangianWeight, ObservationModel, OptimizerSettings,
    TestChannelPair,
};
use crate::decoder::{empirical_distortion, jsp_decode, posterior_table, LinkInput, SpParams, VirtualChannel};
use crate::encoder::{allocate_rates, default_check_degree, encode_link, virtual_crossover, BipParams, RateSplit};
use crate::error::{Error, Result};
use crate::gf2::{build_code_pair, build_compound_code, BitSequence, CodePair, CodeParameters, CompoundCode, DegreeDistribution};

/// Where the stage-1 targets come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Targets {
    /// Minimizer of `D + mu R`.
    Weight(LagrangianWeight),
    Pair(TestChannelPair),
}

/// How the block sizes are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeDesign {
    Explicit { m1: usize, m2: usize, k1: usize, k2: usize },
    Split(RateSplit),
    /// `m_i = ceil(n (1 - h(d_i) + stage1_slack))`; a binning budget of
    /// `backoff * (1 - h(q))` is shared evenly by the two links.
    Auto { stage1_slack: f64, backoff: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Full quantize, bin and decode chain.
    Coded,
    /// Skip coding: `u_i = y_i xor Bern(d_i)`, delivered without error.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ObservationModel,
    pub targets: Targets,
    pub n: usize,
    pub design: CodeDesign,
    /// LDGM check degree; chosen from the stage-1 rate when absent.
    pub check_degree: Option<usize>,
    /// Row degrees of the binning rows.
    pub delta_degrees: DegreeDistribution,
    pub bip: BipParams,
    /// Replace `bip.gamma` by `2 R_i` per link.
    pub gamma_from_rate: bool,
    pub sp: SpParams,
    pub trials: usize,
    pub base_seed: u64,
    pub mode: Mode,
    pub optimizer: OptimizerSettings,
}

impl ExperimentConfig {
    pub fn new(model: ObservationModel, targets: Targets, n: usize, design: CodeDesign) -> Self {
        Self {
            model,
            targets,
            n,
            design,
            check_degree: None,
            delta_degrees: DegreeDistribution::regular(3).expect("degree 3"),
            bip: BipParams::default(),
            gamma_from_rate: true,
            sp: SpParams::default(),
            trials: 50,
            base_seed: 1,
            mode: Mode::Coded,
            optimizer: OptimizerSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        self.bip.validate()?;
        self.sp.validate()?;
        self.optimizer.validate()?;
        if let CodeDesign::Auto { stage1_slack, backoff } = self.design {
            if !(0.0..0.5).contains(&stage1_slack) || !(backoff > 0.0 && backoff <= 1.0) {
                return Err(Error::Config(format!(
                    "auto design needs stage1_slack in [0, 0.5) and backoff in (0, 1], got {stage1_slack}, {backoff}"
                )));
            }
        }
        Ok(())
    }

    /// Stage-1 targets, running the optimizer when only `mu` is given.
    pub fn resolve_targets(&self) -> Result<TestChannelPair> {
        match self.targets {
            Targets::Pair(t) => Ok(t),
            Targets::Weight(mu) => Ok(optimize_crossovers(&self.model, mu, &self.optimizer)?.d_star),
        }
    }

    /// Block sizes for the resolved targets.
    pub fn code_parameters(&self, targets: &TestChannelPair) -> Result<CodeParameters> {
        let n = self.n;
        match self.design {
            CodeDesign::Explicit { m1, m2, k1, k2 } => CodeParameters::new(n, m1, m2, k1, k2),
            CodeDesign::Split(split) => allocate_rates(n, targets, &self.model, &split),
            CodeDesign::Auto { stage1_slack, backoff } => auto_design(n, targets, &self.model, stage1_slack, backoff),
        }
    }
}

fn auto_design(
    n: usize,
    targets: &TestChannelPair,
    model: &ObservationModel,
    slack: f64,
    backoff: f64,
) -> Result<CodeParameters> {
    let nf = n as f64;
    let stage1 = |d: f64| {
        if d >= 0.5 - 1e-12 {
            0
        } else {
            ((nf * (1.0 - hb(d) + slack)).ceil() as usize).min(n)
        }
    };
    let (m1, m2) = (stage1(targets.d1()), stage1(targets.d2()));
    if m1 == 0 || m2 == 0 {
        return CodeParameters::new(n, m1, m2, m1, m2);
    }
    let budget = (nf * backoff * (1.0 - hb(virtual_crossover(targets, model)))).floor() as usize;
    let b1 = (budget / 2).min(m1);
    let b2 = (budget - budget / 2).min(m2);
    CodeParameters::new(n, m1, m2, m1 - b1, m2 - b2)
}

/// The codes of one experiment. Links with equal `m` share a generator and
/// a staircase, which enables the difference-word start.
#[derive(Debug, Clone)]
pub struct ExperimentCodes {
    pub params: CodeParameters,
    pub pair: Option<CodePair>,
    pub separate: [Option<CompoundCode>; 2],
}

impl ExperimentCodes {
    pub fn link(&self, i: usize) -> Option<&CompoundCode> {
        match &self.pair {
            Some(p) => Some(if i == 0 { &p.link1 } else { &p.link2 }),
            None => self.separate[i].as_ref(),
        }
    }
}

const CODE_STREAM: u64 = u64::MAX;

pub fn build_codes(cfg: &ExperimentConfig, params: CodeParameters) -> Result<ExperimentCodes> {
    let n = params.n;
    let ms = [params.m1, params.m2];
    let ks = [params.k1, params.k2];
    let degree = |m: usize| cfg.check_degree.unwrap_or_else(|| default_check_degree(m as f64 / n as f64));
    let paired = ms[0] == ms[1] && ms[0] > 0 && ks[0] + ks[1] >= ms[0];
    if paired {
        let seed = derive_seed(cfg.base_seed, CODE_STREAM, 0);
        let pair = build_code_pair(n, ms[0], ks[0], ks[1], degree(ms[0]), &cfg.delta_degrees, seed)?;
        return Ok(ExperimentCodes {
            params,
            pair: Some(pair),
            separate: [None, None],
        });
    }
    let mut separate = [None, None];
    for i in 0..2 {
        if ms[i] > 0 {
            let seed = derive_seed(cfg.base_seed, CODE_STREAM, 1 + i as u64);
            separate[i] = Some(build_compound_code(n, ms[i], ks[i], degree(ms[i]), &cfg.delta_degrees, seed)?);
        }
    }
    Ok(ExperimentCodes {
        params,
        pair: None,
        separate,
    })
}

/// Measurements of one trial. Link quantities of a silent link are
/// `d_{i,1} = 0.5`, `d_{i,2} = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub index: usize,
    pub seed: u64,
    pub d11: f64,
    pub d21: f64,
    pub d12: f64,
    pub d22: f64,
    pub d1: f64,
    pub d2: f64,
    pub r1: f64,
    pub r2: f64,
    pub r_sum: f64,
    pub d_em: f64,
    pub gap: f64,
    pub quantizer_converged: [bool; 2],
    pub decoder_converged: [bool; 2],
    pub jsp_rounds: usize,
    pub difference_start: bool,
}

/// Arithmetic means of the per-trial fields.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Averages {
    pub d11: f64,
    pub d21: f64,
    pub d12: f64,
    pub d22: f64,
    pub d1: f64,
    pub d2: f64,
    pub r1: f64,
    pub r2: f64,
    pub r_sum: f64,
    pub d_em: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counters {
    /// Trials whose quantizer finished inside its round cap, per link.
    pub quantizer_converged: [usize; 2],
    /// Trials whose decoded word satisfied every check, per link.
    pub decoder_converged: [usize; 2],
    pub difference_starts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub targets: TestChannelPair,
    pub params: CodeParameters,
    pub paired_codes: bool,
    pub virtual_crossover: f64,
    pub r_th: f64,
    pub d_th: f64,
    pub trials: Vec<TrialReport>,
    pub mean: Averages,
    /// `mean.d_em - d_th`.
    pub gap: f64,
    pub counters: Counters,
    /// JSP exchange schedule.
    pub exchange: String,
    /// Excluded from serialized output so that reports stay byte-identical.
    #[serde(skip)]
    pub wall_clock_secs: f64,
}

fn ber(a: &BitSequence, b: &BitSequence) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.hamming_distance(b).expect("equal lengths") as f64 / a.len() as f64
}

struct Link {
    /// Quantized word `u_i`.
    u: BitSequence,
    payload: BitSequence,
    converged: bool,
}

fn run_trial(
    cfg: &ExperimentConfig,
    params: &CodeParameters,
    codes: Option<&ExperimentCodes>,
    targets: &TestChannelPair,
    vc: &VirtualChannel,
    d_th: f64,
    index: usize,
) -> Result<TrialReport> {
    let n = cfg.n;
    let model = &cfg.model;
    let seed = derive_seed(cfg.base_seed, index as u64, 0);
    let sub = |k: u64| derive_seed(cfg.base_seed, index as u64, k);
    let (x, y1, y2) = simulate_source(n, model, sub(1));
    let ys = [&y1, &y2];
    let ds = [targets.d1(), targets.d2()];

    let ms = [params.m1, params.m2];
    let ks = [params.k1, params.k2];
    let code = |i: usize| codes.and_then(|c| c.link(i)).expect("coded link");
    let mut links: [Option<Link>; 2] = [None, None];
    for i in 0..2 {
        if ms[i] == 0 {
            continue;
        }
        links[i] = Some(match cfg.mode {
            Mode::Coded => {
                let code = code(i);
                let mut bip = cfg.bip;
                if cfg.gamma_from_rate {
                    bip.gamma = 2.0 * code.m() as f64 / n as f64;
                }
                let enc = encode_link(code, ys[i], &bip, sub(2 + i as u64))?;
                let payload = if code.k() == code.m() { enc.w } else { enc.s };
                Link {
                    u: enc.u,
                    payload,
                    converged: enc.converged,
                }
            }
            Mode::Oracle => {
                let mut rng = ChaCha8Rng::seed_from_u64(sub(2 + i as u64));
                let u = ys[i].xor(&BitSequence::bernoulli(n, ds[i], &mut rng))?;
                Link {
                    u,
                    payload: BitSequence::zeros(0),
                    converged: true,
                }
            }
        });
    }

    let mut u_hat: [Option<BitSequence>; 2] = [None, None];
    let mut decoder_converged = [false, false];
    let (mut jsp_rounds, mut difference_start) = (0, false);
    match cfg.mode {
        Mode::Oracle => {
            for i in 0..2 {
                if let Some(l) = &links[i] {
                    u_hat[i] = Some(l.u.clone());
                    decoder_converged[i] = true;
                }
            }
        }
        Mode::Coded => {
            let input = |i: usize| {
                links[i].as_ref().map(|l| LinkInput {
                    code: code(i),
                    payload: &l.payload,
                })
            };
            let pair = codes.and_then(|c| c.pair.as_ref());
            let out = jsp_decode(input(0), input(1), pair, vc, &cfg.sp, sub(4))?;
            jsp_rounds = out.rounds;
            difference_start = out.difference_start;
            for (i, est) in [out.link1, out.link2].into_iter().enumerate() {
                if let Some(e) = est {
                    decoder_converged[i] = e.converged;
                    u_hat[i] = Some(e.u_hat);
                }
            }
        }
    }

    let mut d_stage1 = [0.5, 0.5];
    let mut d_stage2 = [0.0, 0.0];
    let mut rates = [0.0, 0.0];
    let mut quantizer_converged = [false, false];
    for i in 0..2 {
        if let (Some(l), Some(est)) = (&links[i], &u_hat[i]) {
            d_stage1[i] = ber(&l.u, ys[i]);
            d_stage2[i] = ber(est, &l.u);
            quantizer_converged[i] = l.converged;
            rates[i] = ks[i] as f64 / n as f64;
        }
    }
    let d_total = [conv(d_stage1[0], d_stage2[0]), conv(d_stage1[1], d_stage2[1])];
    // A failed decode can land slightly past 0.5; it carries no information.
    let q1 = conv(model.p1(), d_total[0]).min(0.5);
    let q2 = conv(model.p2(), d_total[1]).min(0.5);
    let table = posterior_table(q1, q2)?;
    let zeros = BitSequence::zeros(n);
    let d_em = empirical_distortion(
        &x,
        u_hat[0].as_ref().unwrap_or(&zeros),
        u_hat[1].as_ref().unwrap_or(&zeros),
        &table,
    )?;
    Ok(TrialReport {
        index,
        seed,
        d11: d_stage1[0],
        d21: d_stage1[1],
        d12: d_stage2[0],
        d22: d_stage2[1],
        d1: d_total[0],
        d2: d_total[1],
        r1: rates[0],
        r2: rates[1],
        r_sum: rates[0] + rates[1],
        d_em,
        gap: d_em - d_th,
        quantizer_converged,
        decoder_converged,
        jsp_rounds,
        difference_start,
    })
}

fn average(trials: &[TrialReport]) -> Averages {
    let t = trials.len() as f64;
    let mean = |f: fn(&TrialReport) -> f64| trials.iter().map(f).sum::<f64>() / t;
    Averages {
        d11: mean(|r| r.d11),
        d21: mean(|r| r.d21),
        d12: mean(|r| r.d12),
        d22: mean(|r| r.d22),
        d1: mean(|r| r.d1),
        d2: mean(|r| r.d2),
        r1: mean(|r| r.r1),
        r2: mean(|r| r.r2),
        r_sum: mean(|r| r.r_sum),
        d_em: mean(|r| r.d_em),
    }
}

/// Runs `cfg.trials` seeded trials (in parallel) and aggregates them in
/// trial order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let targets = cfg.resolve_targets()?;
    let params = cfg.code_parameters(&targets)?;
    let codes = match cfg.mode {
        Mode::Coded => Some(build_codes(cfg, params)?),
        Mode::Oracle => None,
    };
    let q = virtual_crossover(&targets, &cfg.model);
    let vc = VirtualChannel::new(q)?;
    let th = region_bounds(&targets, &cfg.model);

    let trials: Vec<TrialReport> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, &params, codes.as_ref(), &targets, &vc, th.dist, i))
        .collect::<Result<_>>()?;

    let mean = average(&trials);
    let mut counters = Counters::default();
    for t in &trials {
        for i in 0..2 {
            counters.quantizer_converged[i] += t.quantizer_converged[i] as usize;
            counters.decoder_converged[i] += t.decoder_converged[i] as usize;
        }
        counters.difference_starts += t.difference_start as usize;
    }
    Ok(RunReport {
        config: cfg.clone(),
        targets,
        params,
        paired_codes: codes.as_ref().is_some_and(|c| c.pair.is_some()),
        virtual_crossover: q,
        r_th: th.r_sum,
        d_th: th.dist,
        gap: mean.d_em - th.dist,
        trials,
        mean,
        counters,
        exchange: "simultaneous".into(),
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> ObservationModel {
        ObservationModel::new(0.15, 0.15).unwrap()
    }

    fn oracle(n: usize, d1: f64, d2: f64, trials: usize) -> ExperimentConfig {
        let t = TestChannelPair::new(d1, d2).unwrap();
        let mut cfg = ExperimentConfig::new(
            model(),
            Targets::Pair(t),
            n,
            CodeDesign::Auto {
                stage1_slack: 0.01,
                backoff: 0.9,
            },
        );
        cfg.mode = Mode::Oracle;
        cfg.trials = trials;
        cfg
    }

    #[test]
    fn oracle_gap_is_small() {
        let rep = run_experiment(&oracle(100_000, 0.1, 0.1, 2)).unwrap();
        assert!(rep.gap.abs() < 0.01, "{}", rep.gap);
        assert!((rep.d_th - 0.5925).abs() < 1e-4);
    }

    #[test]
    fn gap_is_mean_minus_theory() {
        let rep = run_experiment(&oracle(2000, 0.1, 0.3, 4)).unwrap();
        assert_eq!(rep.gap, rep.mean.d_em - rep.d_th);
        let mean: f64 = rep.trials.iter().map(|t| t.d_em).sum::<f64>() / 4.0;
        assert_eq!(rep.mean.d_em, mean);
    }

    #[test]
    fn per_stage_composition() {
        let rep = run_experiment(&oracle(2000, 0.1, 0.3, 3)).unwrap();
        for t in &rep.trials {
            assert!((t.d1 - conv(t.d11, t.d12)).abs() <= 1e-12);
            assert!((t.d2 - conv(t.d21, t.d22)).abs() <= 1e-12);
        }
    }

    #[test]
    fn first_trial_independent_of_trial_count() {
        let one = run_experiment(&oracle(3000, 0.1, 0.1, 1)).unwrap();
        let many = run_experiment(&oracle(3000, 0.1, 0.1, 5)).unwrap();
        assert_eq!(one.trials[0], many.trials[0]);
    }

    #[test]
    fn silent_link_reports() {
        let rep = run_experiment(&oracle(4000, 0.1, 0.5, 2)).unwrap();
        assert!(rep.params.is_silent(2) && rep.params.is_bypass(1));
        for t in &rep.trials {
            assert_eq!((t.d21, t.d22, t.d2, t.r2), (0.5, 0.0, 0.5, 0.0));
        }
    }

    #[test]
    fn auto_design_respects_budget() {
        let t = TestChannelPair::new(0.1, 0.1).unwrap();
        let p = auto_design(10_000, &t, &model(), 0.0089, 0.9).unwrap();
        assert_eq!((p.m1, p.m2), (5400, 5400));
        let cap = 1.0 - hb(virtual_crossover(&t, &model()));
        assert!(p.stage2_rate(1) + p.stage2_rate(2) <= 0.9 * cap + 1e-9);
    }

    #[test]
    fn coded_small_run_is_deterministic() {
        let t = TestChannelPair::new(0.1, 0.1).unwrap();
        let mut cfg = ExperimentConfig::new(
            model(),
            Targets::Pair(t),
            1000,
            CodeDesign::Explicit {
                m1: 540,
                m2: 540,
                k1: 520,
                k2: 520,
            },
        );
        cfg.trials = 2;
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert!(a.paired_codes);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        for t in &a.trials {
            assert_eq!(t.r_sum, 1040.0 / 1000.0);
        }
    }

    #[test]
    fn rejects_zero_trials() {
        let mut cfg = oracle(1000, 0.1, 0.1, 1);
        cfg.trials = 0;
        assert!(run_experiment(&cfg).is_err());
    }
}
