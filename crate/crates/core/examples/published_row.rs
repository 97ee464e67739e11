//! Runs one published row with its own design.
//!
//! ```text
//! cargo run --release -p ceo-core --example published_row -- <row> [trials] [k override]
//! ```

use ceo_core::sim::{run_experiment, CodeDesign, PUBLISHED_ROWS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let idx: usize = args.first().map_or(Ok(1), |s| s.parse())?;
    let trials: usize = args.get(1).map_or(Ok(3), |s| s.parse())?;
    let row = PUBLISHED_ROWS.get(idx).ok_or("row index must be below 12")?;
    let mut cfg = row.config(trials, 1);
    if let Some(k) = args.get(2) {
        let k: usize = k.parse()?;
        if let CodeDesign::Explicit { m1, m2, .. } = cfg.design {
            cfg.design = CodeDesign::Explicit { m1, m2, k1: k, k2: k };
        }
    }
    let rep = run_experiment(&cfg)?;
    for t in &rep.trials {
        println!(
            "trial {:>3}  d11 {:.4}  d21 {:.4}  d12 {:.4}  d22 {:.4}  d_em {:.4}  decoded {:?}",
            t.index, t.d11, t.d21, t.d12, t.d22, t.d_em, t.decoder_converged
        );
    }
    println!(
        "mean d_em {:.4}  gap {:.4} (published {:.4})  d_th {:.4}  {:.1} s",
        rep.mean.d_em, rep.gap, row.gap, rep.d_th, rep.wall_clock_secs
    );
    Ok(())
}
