//! Sum-rate versus distortion: the theoretical locus plus measured points.

use serde::{Deserialize, Serialize};

use super::experiment::{run_experiment, ExperimentConfig, Targets};
use crate::bounds::{optimum_locus, LagrangianWeight, ObservationModel, OptimizerSettings, Region, TestChannelPair};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub mu: f64,
    pub d_star: TestChannelPair,
    pub r_sum: f64,
    pub dist: f64,
    pub region: Region,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredPoint {
    pub mu: f64,
    pub r_sum: f64,
    pub d_em: f64,
    /// Theoretical distortion at the measured sum-rate.
    pub d_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub theory: Vec<CurvePoint>,
    pub measured: Vec<MeasuredPoint>,
}

impl SweepCurve {
    /// Locus distortion at `r_sum`, linear between samples and clamped at
    /// the ends.
    pub fn distortion_at(&self, r_sum: f64) -> f64 {
        let mut pts: Vec<(f64, f64)> = self.theory.iter().map(|p| (p.r_sum, p.dist)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (first, last) = (pts[0], pts[pts.len() - 1]);
        if r_sum <= first.0 {
            return first.1;
        }
        if r_sum >= last.0 {
            return last.1;
        }
        let i = pts.partition_point(|p| p.0 <= r_sum);
        let (a, b) = (pts[i - 1], pts[i]);
        if b.0 == a.0 {
            return a.1.min(b.1);
        }
        a.1 + (b.1 - a.1) * (r_sum - a.0) / (b.0 - a.0)
    }
}

/// Theoretical curve over `mu_grid`; with a template, one experiment per
/// multiplier at the optimizer's targets.
pub fn sweep_rate_distortion(
    model: &ObservationModel,
    mu_grid: &[LagrangianWeight],
    settings: &OptimizerSettings,
    template: Option<&ExperimentConfig>,
) -> Result<SweepCurve> {
    if mu_grid.is_empty() {
        return Err(Error::Config("sweep needs at least one multiplier".into()));
    }
    let locus = optimum_locus(model, mu_grid, settings)?;
    let theory: Vec<CurvePoint> = locus
        .iter()
        .map(|e| CurvePoint {
            mu: e.mu.value(),
            d_star: e.d_star,
            r_sum: e.point.r_sum,
            dist: e.point.dist,
            region: e.region,
        })
        .collect();
    let mut curve = SweepCurve {
        theory,
        measured: Vec::new(),
    };
    if let Some(template) = template {
        for e in &locus {
            let mut cfg = template.clone();
            cfg.model = *model;
            cfg.targets = Targets::Pair(e.d_star);
            let rep = run_experiment(&cfg)?;
            curve.measured.push(MeasuredPoint {
                mu: e.mu.value(),
                r_sum: rep.mean.r_sum,
                d_em: rep.mean.d_em,
                d_bound: curve.distortion_at(rep.mean.r_sum),
            });
        }
    }
    Ok(curve)
}
