//! CSV and JSON renderings of harness results.
//!
//! Every artifact starts with `#` lines carrying the schema name, version
//! and the resolved configuration, so a file describes its own run. Numbers
//! in CSV bodies use six decimals.

use serde::Serialize;
use serde_json::{json, Value};

use super::experiment::RunReport;
use super::sweep::SweepCurve;
use super::table::TableRow;
use crate::bounds::OptimumLocusEntry;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

fn opt6(x: Option<f64>) -> String {
    x.map(f6).unwrap_or_default()
}

fn csv_body(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `# schema` and `# config` preamble.
pub fn preamble<C: Serialize>(schema: &str, config: &C) -> Result<String> {
    let cfg = serde_json::to_string(config).map_err(|e| Error::Config(e.to_string()))?;
    Ok(format!("# schema: {schema} v{SCHEMA_VERSION}\n# config: {cfg}\n"))
}

/// Wraps a payload with schema name and version.
pub fn json_document<T: Serialize>(schema: &str, payload: &T) -> Result<Value> {
    let body = serde_json::to_value(payload).map_err(|e| Error::Config(e.to_string()))?;
    Ok(json!({ "schema": schema, "schema_version": SCHEMA_VERSION, "data": body }))
}

const RUN_HEADER: [&str; 19] = [
    "row", "trial", "seed", "d11", "d21", "d12", "d22", "d1", "d2", "r1", "r2", "r_sum", "d_em", "d_th", "r_th", "gap",
    "decoded1", "decoded2", "jsp_rounds",
];

/// One line per trial plus a `mean` line.
pub fn run_report_csv(rep: &RunReport) -> Result<String> {
    let mut rows = Vec::with_capacity(rep.trials.len() + 1);
    for t in &rep.trials {
        rows.push(vec![
            "trial".into(),
            t.index.to_string(),
            t.seed.to_string(),
            f6(t.d11),
            f6(t.d21),
            f6(t.d12),
            f6(t.d22),
            f6(t.d1),
            f6(t.d2),
            f6(t.r1),
            f6(t.r2),
            f6(t.r_sum),
            f6(t.d_em),
            f6(rep.d_th),
            f6(rep.r_th),
            f6(t.gap),
            (t.decoder_converged[0] as u8).to_string(),
            (t.decoder_converged[1] as u8).to_string(),
            t.jsp_rounds.to_string(),
        ]);
    }
    let m = &rep.mean;
    rows.push(vec![
        "mean".into(),
        String::new(),
        rep.config.base_seed.to_string(),
        f6(m.d11),
        f6(m.d21),
        f6(m.d12),
        f6(m.d22),
        f6(m.d1),
        f6(m.d2),
        f6(m.r1),
        f6(m.r2),
        f6(m.r_sum),
        f6(m.d_em),
        f6(rep.d_th),
        f6(rep.r_th),
        f6(rep.gap),
        rep.counters.decoder_converged[0].to_string(),
        rep.counters.decoder_converged[1].to_string(),
        String::new(),
    ]);
    Ok(preamble("ceo-run", &rep.config)? + &csv_body(&RUN_HEADER, rows)?)
}

pub fn run_report_json(rep: &RunReport) -> Result<Value> {
    json_document("ceo-run", rep)
}

/// Table rows. Empirical columns stay empty in theory-only mode.
pub fn table_csv<C: Serialize>(rows: &[TableRow], config: &C) -> Result<String> {
    let header = [
        "mu", "n", "m1", "m2", "k1", "k2", "region", "d1_target", "d2_target", "r_th", "d_th", "tangent_mu", "opt_d1",
        "opt_d2", "opt_r_sum", "opt_dist", "d11", "d1", "d21", "d2", "r_sum", "d_em", "gap", "trials",
    ];
    let body = rows
        .iter()
        .map(|r| {
            let mut v = vec![
                opt6(r.mu),
                r.n.to_string(),
                r.m[0].to_string(),
                r.m[1].to_string(),
                r.k[0].to_string(),
                r.k[1].to_string(),
                r.region.to_string(),
                f6(r.targets.d1()),
                f6(r.targets.d2()),
                f6(r.r_th),
                f6(r.d_th),
                opt6(r.tangent_mu),
            ];
            match &r.optimizer {
                Some(o) => v.extend([f6(o.d_star.d1()), f6(o.d_star.d2()), f6(o.r_sum), f6(o.dist)]),
                None => v.extend(std::iter::repeat(String::new()).take(4)),
            }
            match &r.empirical {
                Some(e) => v.extend([
                    f6(e.mean.d11),
                    f6(e.mean.d1),
                    f6(e.mean.d21),
                    f6(e.mean.d2),
                    f6(e.mean.r_sum),
                    f6(e.mean.d_em),
                    f6(e.gap),
                    e.trials.to_string(),
                ]),
                None => v.extend(std::iter::repeat(String::new()).take(8)),
            }
            v
        })
        .collect();
    Ok(preamble("ceo-table", config)? + &csv_body(&header, body)?)
}

/// `mu, d1, d2, r_sum, dist, region`.
pub fn locus_csv<C: Serialize>(entries: &[OptimumLocusEntry], config: &C) -> Result<String> {
    let body = entries
        .iter()
        .map(|e| {
            vec![
                f6(e.mu.value()),
                f6(e.d_star.d1()),
                f6(e.d_star.d2()),
                f6(e.point.r_sum),
                f6(e.point.dist),
                e.region.to_string(),
            ]
        })
        .collect();
    Ok(preamble("ceo-locus", config)? + &csv_body(&["mu", "d1", "d2", "r_sum", "dist", "region"], body)?)
}

/// Theory rows (`kind = theory`) followed by measured rows.
pub fn sweep_csv<C: Serialize>(curve: &SweepCurve, config: &C) -> Result<String> {
    let mut body: Vec<Vec<String>> = curve
        .theory
        .iter()
        .map(|p| vec!["theory".into(), f6(p.mu), f6(p.r_sum), f6(p.dist)])
        .collect();
    body.extend(
        curve
            .measured
            .iter()
            .map(|p| vec!["measured".into(), f6(p.mu), f6(p.r_sum), f6(p.d_em)]),
    );
    Ok(preamble("ceo-sweep", config)? + &csv_body(&["kind", "mu", "r_sum", "dist"], body)?)
}
