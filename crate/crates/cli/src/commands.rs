//! Subcommand bodies. Each returns the lines printed on stdout; artifacts go
//! to the configured output directory.

use anyhow::{Context, Result};
use ceo_core::bounds::{mu_max, optimum_locus, region_bounds, uniform_mu_grid};
use ceo_core::decoder::{jsp_decode, LinkInput};
use ceo_core::encoder::{bip_quantize, default_check_degree, encode_link};
use ceo_core::gf2::{build_code_pair, build_compound_code, load_degree_distribution};
use ceo_core::sim::{
    derive_seed, json_document, locus_csv, published_rows, reproduce_table, run_experiment, run_report_csv,
    sweep_rate_distortion, table_csv, CodeDesign, Mode, Targets,
};
use ceo_core::{
    BipParams, CompoundCode, DegreeDistribution, ExperimentConfig, LagrangianWeight, ObservationModel,
    OptimizerSettings, SpParams, TestChannelPair, VirtualChannel,
};

use crate::config::{CliConfig, Subcommand};
use crate::io::{bits_file, comment_preamble, parse_bits, parse_code, read_text, write_artifact};

/// Seed stream reserved for codes, shared with the Monte-Carlo harness.
const CODE_STREAM: u64 = u64::MAX;

pub fn dispatch(cfg: &CliConfig) -> Result<Vec<String>> {
    match cfg.subcommand {
        Subcommand::Bounds => bounds(cfg),
        Subcommand::Locus => locus(cfg),
        Subcommand::Mumax => Ok(vec![format!("{}", mu_max(&model(cfg)?))]),
        Subcommand::Design => design(cfg),
        Subcommand::Quantize => quantize(cfg, false),
        Subcommand::Encode => quantize(cfg, true),
        Subcommand::Decode => decode(cfg),
        Subcommand::Simulate => simulate(cfg),
        Subcommand::Table1 => table1(cfg),
        Subcommand::Sweep => sweep(cfg),
    }
}

fn model(cfg: &CliConfig) -> Result<ObservationModel> {
    Ok(ObservationModel::new(cfg.real("p1"), cfg.real("p2"))?)
}

fn settings(cfg: &CliConfig) -> Result<OptimizerSettings> {
    let s = OptimizerSettings {
        grid_step: cfg.real("grid-step"),
        refine_tol: cfg.real("refine-tol"),
    };
    s.validate()?;
    Ok(s)
}

fn delta_degrees(cfg: &CliConfig) -> Result<DegreeDistribution> {
    match cfg.get("delta-degrees") {
        Some(path) => Ok(load_degree_distribution(&read_text(path)?).with_context(|| format!("in {path}"))?),
        None => Ok(DegreeDistribution::regular(3)?),
    }
}

fn mode(cfg: &CliConfig) -> Mode {
    match cfg.get("mode") {
        Some("oracle") => Mode::Oracle,
        _ => Mode::Coded,
    }
}

fn bounds(cfg: &CliConfig) -> Result<Vec<String>> {
    let d = TestChannelPair::new(cfg.real("d1"), cfg.real("d2"))?;
    let pt = region_bounds(&d, &model(cfg)?);
    Ok(vec![
        format!("r1 {:.6}", pt.r1),
        format!("r2 {:.6}", pt.r2),
        format!("r_sum {:.6}", pt.r_sum),
        format!("dist {:.6}", pt.dist),
    ])
}

fn locus(cfg: &CliConfig) -> Result<Vec<String>> {
    let m = model(cfg)?;
    let grid = uniform_mu_grid(&m, cfg.count("samples"));
    let entries = optimum_locus(&m, &grid, &settings(cfg)?)?;
    let path = write_artifact(&cfg.out_dir, "locus.csv", &locus_csv(&entries, &cfg.resolved())?)?;
    Ok(vec![format!("{} points -> {}", entries.len(), path.display())])
}

fn design(cfg: &CliConfig) -> Result<Vec<String>> {
    let n = cfg.count("n");
    let ms = [cfg.count("m1"), cfg.count("m2")];
    let ks = [cfg.count("k1"), cfg.count("k2")];
    let dd = delta_degrees(cfg)?;
    let degree = |m: usize| cfg.opt_count("check-degree").unwrap_or_else(|| default_check_degree(m as f64 / n as f64));
    let paired = ms[0] == ms[1] && ms[0] > 0 && ks[0] + ks[1] >= ms[0];
    let codes: Vec<CompoundCode> = if paired {
        let seed = derive_seed(cfg.seed, CODE_STREAM, 0);
        let pair = build_code_pair(n, ms[0], ks[0], ks[1], degree(ms[0]), &dd, seed)?;
        vec![pair.link1, pair.link2]
    } else {
        let mut out = Vec::new();
        for i in 0..2 {
            if ms[i] > 0 {
                let seed = derive_seed(cfg.seed, CODE_STREAM, 1 + i as u64);
                out.push(build_compound_code(n, ms[i], ks[i], degree(ms[i]), &dd, seed)?);
            }
        }
        out
    };
    if codes.is_empty() {
        anyhow::bail!("both links are silent (m1 = m2 = 0); nothing to build");
    }
    let head = comment_preamble("ceo-code", &cfg.resolved());
    let mut lines = Vec::new();
    for (i, code) in codes.iter().enumerate() {
        let path = write_artifact(&cfg.out_dir, &format!("code{}.txt", i + 1), &(head.clone() + &code.serialize()))?;
        lines.push(format!(
            "link {}: n {} m {} k {} check_degree {}{} -> {}",
            i + 1,
            code.n(),
            code.m(),
            code.k(),
            code.check_degree(),
            if paired { " (paired)" } else { "" },
            path.display()
        ));
    }
    Ok(lines)
}

fn quantize(cfg: &CliConfig, bin: bool) -> Result<Vec<String>> {
    let code = parse_code(&read_text(cfg.get("code").unwrap())?).context("reading code file")?;
    let y = parse_bits(&read_text(cfg.get("input").unwrap())?).context("reading input bits")?;
    let mut params = BipParams::for_rate(code.m() as f64 / code.n() as f64);
    if let Some(g) = cfg.opt_real("gamma") {
        params.gamma = g;
    }
    params.damping = cfg.real("damping");
    params.max_rounds = cfg.count("max-rounds");
    let seed = derive_seed(cfg.seed, 0, 0);
    let enc = if bin {
        encode_link(&code, &y, &params, seed)?
    } else {
        bip_quantize(&code, &y, &params, seed)?
    };
    let resolved = cfg.resolved();
    let mut lines = vec![format!(
        "d_stage1 {:.6} rounds {} converged {}",
        enc.d_stage1, enc.rounds, enc.converged
    )];
    let outputs = if bin {
        vec![("payload.txt", &enc.s)]
    } else {
        vec![("u.txt", &enc.u), ("w.txt", &enc.w)]
    };
    for (name, bits) in outputs {
        let path = write_artifact(&cfg.out_dir, name, &bits_file("ceo-bits", &resolved, bits))?;
        lines.push(format!("{} bits -> {}", bits.len(), path.display()));
    }
    Ok(lines)
}

fn decode(cfg: &CliConfig) -> Result<Vec<String>> {
    let load = |code_key: &str, payload_key: &str| -> Result<Option<(CompoundCode, ceo_core::BitSequence)>> {
        match (cfg.get(code_key), cfg.get(payload_key)) {
            (Some(c), Some(p)) => Ok(Some((
                parse_code(&read_text(c)?).with_context(|| format!("reading {c}"))?,
                parse_bits(&read_text(p)?).with_context(|| format!("reading {p}"))?,
            ))),
            _ => Ok(None),
        }
    };
    let l1 = load("code1", "payload1")?;
    let l2 = load("code2", "payload2")?;
    // Paired codes are rebuilt from their seed so the difference-word start is available.
    let pair = match (&l1, &l2) {
        (Some((c1, _)), Some((c2, _))) if c1.seed() == c2.seed() && c1.m() == c2.m() && c1.k() + c2.k() >= c1.m() => {
            build_code_pair(c1.n(), c1.m(), c1.k(), c2.k(), c1.check_degree(), &delta_degrees(cfg)?, c1.seed())
                .ok()
                .filter(|p| p.link1 == *c1 && p.link2 == *c2)
        }
        _ => None,
    };
    let sp = SpParams {
        max_iters: cfg.count("max-iters"),
        rounds: cfg.count("rounds"),
        inner_iters: cfg.count("inner-iters"),
        ..SpParams::default()
    };
    let vc = VirtualChannel::new(cfg.real("q"))?;
    let out = jsp_decode(input(&l1), input(&l2), pair.as_ref(), &vc, &sp, derive_seed(cfg.seed, 0, 4))?;
    let resolved = cfg.resolved();
    let mut lines = vec![format!(
        "rounds {} difference_start {} paired {}",
        out.rounds,
        out.difference_start,
        pair.is_some()
    )];
    for (i, est) in [&out.link1, &out.link2].into_iter().enumerate() {
        if let Some(est) = est {
            let name = format!("u{}_hat.txt", i + 1);
            let path = write_artifact(&cfg.out_dir, &name, &bits_file("ceo-bits", &resolved, &est.u_hat))?;
            lines.push(format!("link {} converged {} -> {}", i + 1, est.converged, path.display()));
        }
    }
    Ok(lines)
}

fn input(l: &Option<(CompoundCode, ceo_core::BitSequence)>) -> Option<LinkInput<'_>> {
    l.as_ref().map(|(code, payload)| LinkInput { code, payload })
}

fn experiment_config(cfg: &CliConfig, targets: Targets, n: usize) -> Result<ExperimentConfig> {
    let design = match (cfg.opt_count("m1"), cfg.opt_count("m2"), cfg.opt_count("k1"), cfg.opt_count("k2")) {
        (Some(m1), Some(m2), Some(k1), Some(k2)) => CodeDesign::Explicit { m1, m2, k1, k2 },
        _ => CodeDesign::Auto {
            stage1_slack: cfg.real("stage1-slack"),
            backoff: cfg.real("backoff"),
        },
    };
    let mut ec = ExperimentConfig::new(model(cfg)?, targets, n, design);
    ec.check_degree = cfg.opt_count("check-degree");
    ec.delta_degrees = delta_degrees(cfg)?;
    ec.trials = cfg.count("trials");
    ec.base_seed = cfg.seed;
    ec.mode = mode(cfg);
    ec.validate()?;
    Ok(ec)
}

fn simulate(cfg: &CliConfig) -> Result<Vec<String>> {
    let targets = match cfg.opt_real("mu") {
        Some(mu) => Targets::Weight(LagrangianWeight::new(mu)?),
        None => Targets::Pair(TestChannelPair::new(cfg.real("d1"), cfg.real("d2"))?),
    };
    let ec = experiment_config(cfg, targets, cfg.count("n"))?;
    let rep = run_experiment(&ec)?;
    let resolved = cfg.resolved();
    let csv_path = write_artifact(&cfg.out_dir, "simulate.csv", &run_report_csv(&rep)?)?;
    let doc = serde_json::json!({ "cli": resolved, "report": json_document("ceo-run", &rep)? });
    let json_path = write_artifact(&cfg.out_dir, "simulate.json", &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    log::info!("simulation took {:.2} s", rep.wall_clock_secs);
    Ok(vec![
        format!(
            "targets ({:.6}, {:.6}) m ({}, {}) k ({}, {}) trials {}",
            rep.targets.d1(),
            rep.targets.d2(),
            rep.params.m1,
            rep.params.m2,
            rep.params.k1,
            rep.params.k2,
            rep.trials.len()
        ),
        format!("r_th {:.6} d_th {:.6}", rep.r_th, rep.d_th),
        format!("r_sum {:.6} d_em {:.6} gap {:.6}", rep.mean.r_sum, rep.mean.d_em, rep.gap),
        format!("-> {} {}", csv_path.display(), json_path.display()),
    ])
}

fn table1(cfg: &CliConfig) -> Result<Vec<String>> {
    let rows = published_rows(cfg.opt_count("n"));
    if rows.is_empty() {
        anyhow::bail!("no published row has n = {}", cfg.get("n").unwrap_or("?"));
    }
    let trials = cfg.count("trials");
    let cfgs: Vec<ExperimentConfig> = rows
        .iter()
        .map(|r| {
            let mut c = r.config(trials, cfg.seed);
            c.mode = mode(cfg);
            c
        })
        .collect();
    let mus: Vec<Option<f64>> = rows.iter().map(|r| Some(r.mu)).collect();
    let table = reproduce_table(&cfgs, &mus, cfg.switch("empirical"))?;
    let path = write_artifact(&cfg.out_dir, "table1.csv", &table_csv(&table, &cfg.resolved())?)?;
    let mut lines: Vec<String> = table
        .iter()
        .map(|r| {
            let measured = r
                .empirical
                .map(|e| format!(" d_em {:.4} gap {:.4}", e.mean.d_em, e.gap))
                .unwrap_or_default();
            format!(
                "mu {:<6} n {:>6} r_th {:.4} d_th {:.4} region {}{measured}",
                r.mu.map(|m| m.to_string()).unwrap_or_default(),
                r.n,
                r.r_th,
                r.d_th,
                r.region.index()
            )
        })
        .collect();
    lines.push(format!("-> {}", path.display()));
    Ok(lines)
}

fn sweep(cfg: &CliConfig) -> Result<Vec<String>> {
    let m = model(cfg)?;
    let grid = uniform_mu_grid(&m, cfg.count("samples"));
    let template = if cfg.switch("empirical") {
        // Targets are replaced per multiplier; this pair is a placeholder.
        Some(experiment_config(cfg, Targets::Pair(TestChannelPair::new(0.1, 0.1)?), cfg.count("n"))?)
    } else {
        None
    };
    let curve = sweep_rate_distortion(&m, &grid, &settings(cfg)?, template.as_ref())?;
    let path = write_artifact(&cfg.out_dir, "sweep.csv", &ceo_core::sim::sweep_csv(&curve, &cfg.resolved())?)?;
    Ok(vec![format!(
        "{} theory / {} measured points -> {}",
        curve.theory.len(),
        curve.measured.len(),
        path.display()
    )])
}
