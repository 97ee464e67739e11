//! Rate-distortion bounds of the two-link binary CEO problem under log-loss
//! when both lossy encoders are modelled as binary symmetric test channels.
//!
//! With observation noises `p1, p2` and test-channel crossovers `d1, d2`,
//! writing `a * b = a(1-b) + b(1-a)`, `p = p1 * p2` and `d = d1 * d2`:
//!
//! ```text
//! R_i >= h(p*d) - h(d_i)
//! R   >= 1 + h(d*p) - h(d1) - h(d2)
//! D   >= h(p1*d1) + h(p2*d2) - h(p*d)
//! ```
//!
//! The Lagrangian `F = D + mu * R` is neither convex nor concave in
//! `(d1, d2)`, so [`optimize_crossovers`] scans a grid over `[0, 0.5]^2`
//! before refining locally.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_closed, Error, Result};

/// Binary entropy in bits, `0 log 0 = 0`, no domain check.
#[inline]
pub(crate) fn hb(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

/// Derivative of the binary entropy, `log2((1-x)/x)`.
#[inline]
fn hb_prime(x: f64) -> f64 {
    ((1.0 - x) / x).log2()
}

#[inline]
pub(crate) fn conv(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

/// Binary entropy `h_b(x) = -x log2 x - (1-x) log2 (1-x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    check_closed("x", x, 0.0, 1.0, "[0, 1]")?;
    Ok(hb(x))
}

/// Crossover of two cascaded binary symmetric channels, `a(1-b) + b(1-a)`.
pub fn binary_convolution(a: f64, b: f64) -> Result<f64> {
    check_closed("a", a, 0.0, 1.0, "[0, 1]")?;
    check_closed("b", b, 0.0, 1.0, "[0, 1]")?;
    Ok(conv(a, b))
}

/// Inverse of the binary entropy on `[0, 0.5]`, by bisection.
pub fn inverse_binary_entropy(h: f64) -> Result<f64> {
    check_closed("h", h, 0.0, 1.0, "[0, 1]")?;
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if hb(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Noise parameters of the two observation links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationModel {
    p1: f64,
    p2: f64,
}

impl ObservationModel {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        check_closed("p1", p1, 0.0, 0.5, "[0, 0.5]")?;
        check_closed("p2", p2, 0.0, 0.5, "[0, 0.5]")?;
        Ok(Self { p1, p2 })
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    /// End-to-end crossover between the two observations, `p1 * p2`.
    pub fn p(&self) -> f64 {
        conv(self.p1, self.p2)
    }
}

/// Crossovers of the two BSC test channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestChannelPair {
    d1: f64,
    d2: f64,
}

impl TestChannelPair {
    pub fn new(d1: f64, d2: f64) -> Result<Self> {
        check_closed("d1", d1, 0.0, 0.5, "[0, 0.5]")?;
        check_closed("d2", d2, 0.0, 0.5, "[0, 0.5]")?;
        Ok(Self { d1, d2 })
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    pub fn d2(&self) -> f64 {
        self.d2
    }

    pub fn d(&self) -> f64 {
        conv(self.d1, self.d2)
    }

    /// The pair sorted so that the first crossover is the smaller one.
    pub fn canonical(&self) -> (f64, f64) {
        if self.d1 <= self.d2 {
            (self.d1, self.d2)
        } else {
            (self.d2, self.d1)
        }
    }
}

/// Per-link rates, sum-rate bound and log-loss distortion bound, all in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateDistortionPoint {
    pub r1: f64,
    pub r2: f64,
    pub r_sum: f64,
    pub dist: f64,
}

/// Nonnegative Lagrange multiplier trading sum-rate against distortion.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LagrangianWeight(f64);

impl LagrangianWeight {
    pub fn new(mu: f64) -> Result<Self> {
        if mu.is_finite() && mu >= 0.0 {
            Ok(Self(mu))
        } else {
            Err(Error::Domain {
                name: "mu",
                value: mu,
                range: "[0, inf)",
            })
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Location class of an optimal crossover pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// Both crossovers equal.
    Region1,
    /// Distinct crossovers, both links active.
    Region2,
    /// The noisier link is silent (crossover 0.5).
    Region3,
}

impl Region {
    pub fn index(&self) -> u8 {
        match self {
            Region::Region1 => 1,
            Region::Region2 => 2,
            Region::Region3 => 3,
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.index())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimumLocusEntry {
    pub mu: LagrangianWeight,
    pub d_star: TestChannelPair,
    pub point: RateDistortionPoint,
    pub region: Region,
}

/// Evaluates the BSC test-channel bounds at `dpair`.
pub fn region_bounds(dpair: &TestChannelPair, model: &ObservationModel) -> RateDistortionPoint {
    raw_bounds(dpair.d1, dpair.d2, model.p1, model.p2)
}

#[inline]
fn raw_bounds(d1: f64, d2: f64, p1: f64, p2: f64) -> RateDistortionPoint {
    let p = conv(p1, p2);
    let h_pd = hb(conv(p, conv(d1, d2)));
    let (h1, h2) = (hb(d1), hb(d2));
    RateDistortionPoint {
        r1: h_pd - h1,
        r2: h_pd - h2,
        r_sum: 1.0 + h_pd - h1 - h2,
        dist: hb(conv(p1, d1)) + hb(conv(p2, d2)) - h_pd,
    }
}

/// `D + mu * R` at the given crossovers.
pub fn lagrangian(dpair: &TestChannelPair, model: &ObservationModel, mu: LagrangianWeight) -> f64 {
    let pt = region_bounds(dpair, model);
    pt.dist + mu.0 * pt.r_sum
}

#[inline]
fn raw_lagrangian(d1: f64, d2: f64, model: &ObservationModel, mu: f64) -> f64 {
    let pt = raw_bounds(d1, d2, model.p1, model.p2);
    pt.dist + mu * pt.r_sum
}

/// Largest useful multiplier: beyond it both links fall silent.
pub fn mu_max(model: &ObservationModel) -> f64 {
    // (1 - 2p)^2 written as 1 - 4p(1 - p)
    let a = 1.0 - 4.0 * model.p1 * (1.0 - model.p1);
    let b = 1.0 - 4.0 * model.p2 * (1.0 - model.p2);
    a.max(b)
}

/// Slope `-dD/dR` of the bound surface along `d1` at an interior pair.
///
/// A pair is a stationary point of `D + mu R` only for `mu` equal to this
/// slope (and to the matching slope along `d2`). Returns `None` on the
/// boundary where the derivative is undefined.
pub fn tangent_multiplier(dpair: &TestChannelPair, model: &ObservationModel) -> Option<f64> {
    let (d1, d2) = (dpair.d1, dpair.d2);
    if d1 <= 0.0 || d1 >= 0.5 {
        return None;
    }
    let p = model.p();
    let pd = conv(p, conv(d1, d2));
    let inner = hb_prime(pd) * (1.0 - 2.0 * p) * (1.0 - 2.0 * d2);
    let dd = hb_prime(conv(model.p1, d1)) * (1.0 - 2.0 * model.p1) - inner;
    let dr = inner - hb_prime(d1);
    if dr == 0.0 {
        None
    } else {
        Some(-dd / dr)
    }
}

/// Grid resolution and local refinement tolerance for [`optimize_crossovers`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub grid_step: f64,
    pub refine_tol: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            grid_step: 1e-3,
            refine_tol: 1e-5,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.grid_step > 0.0 && self.grid_step <= 0.01) {
            return Err(Error::Domain {
                name: "grid_step",
                value: self.grid_step,
                range: "(0, 0.01]",
            });
        }
        if !(self.refine_tol > 0.0 && self.refine_tol < self.grid_step) {
            return Err(Error::Domain {
                name: "refine_tol",
                value: self.refine_tol,
                range: "(0, grid_step)",
            });
        }
        Ok(())
    }
}

/// Grid abscissae `0, step, 2 step, ...` closed at 0.5.
pub(crate) fn grid_points(step: f64) -> Vec<f64> {
    let count = (0.5 / step + 1e-9).floor() as usize;
    let mut pts: Vec<f64> = (0..=count).map(|i| i as f64 * step).collect();
    if 0.5 - pts[count] > 1e-12 {
        pts.push(0.5);
    } else {
        pts[count] = 0.5;
    }
    pts
}

// Relative slack under which two objective values count as tied.
const TIE_EPS: f64 = 1e-12;

pub(crate) fn classify(d1: f64, d2: f64, grid_step: f64) -> Region {
    let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
    if (hi - 0.5).abs() <= grid_step {
        Region::Region3
    } else if (hi - lo).abs() <= 2.0 * grid_step {
        Region::Region1
    } else {
        Region::Region2
    }
}

fn golden_section(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    // Endpoints stay candidates: optima often sit on the boundary of [0, 0.5].
    [(lo, f(lo)), (hi, f(hi)), (c, fc), (d, fd)]
        .into_iter()
        .fold((f64::NAN, f64::INFINITY), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// Global minimizer of `D + mu R` over `[0, 0.5]^2`.
///
/// Exhaustive grid scan followed by cyclic golden-section refinement inside
/// the neighbouring grid cells. Ties are resolved towards `d1 <= d2`, then
/// the smallest `d1`.
pub fn optimize_crossovers(
    model: &ObservationModel,
    mu: LagrangianWeight,
    settings: &OptimizerSettings,
) -> Result<OptimumLocusEntry> {
    settings.validate()?;
    let mu_v = mu.0;
    let grid = grid_points(settings.grid_step);
    let p = model.p();
    let h_d: Vec<f64> = grid.iter().map(|&d| hb(d)).collect();
    let h_1: Vec<f64> = grid.iter().map(|&d| hb(conv(model.p1, d))).collect();
    let h_2: Vec<f64> = grid.iter().map(|&d| hb(conv(model.p2, d))).collect();

    let mut best = (f64::INFINITY, 0usize, 0usize);
    for (i, &d1) in grid.iter().enumerate() {
        for (j, &d2) in grid.iter().enumerate() {
            let h_pd = hb(conv(p, conv(d1, d2)));
            let dist = h_1[i] + h_2[j] - h_pd;
            let rate = 1.0 + h_pd - h_d[i] - h_d[j];
            let f = dist + mu_v * rate;
            if !best.0.is_finite() || f < best.0 - TIE_EPS * best.0.abs().max(1.0) {
                best = (f, i, j);
            }
        }
    }

    let (f_grid, i, j) = best;
    let step = settings.grid_step;
    let (mut x, mut y) = (grid[i], grid[j]);
    let mut f_cur = f_grid;
    let objective = |a: f64, b: f64| raw_lagrangian(a, b, model, mu_v);
    for _ in 0..50 {
        let (nx, fx) = golden_section((x - step).max(0.0), (x + step).min(0.5), settings.refine_tol, |a| {
            objective(a, y)
        });
        let (ny, fy) = golden_section((y - step).max(0.0), (y + step).min(0.5), settings.refine_tol, |b| {
            objective(nx, b)
        });
        let improved = fy.min(fx) < f_cur - TIE_EPS;
        let moved = (nx - x).abs().max((ny - y).abs());
        if fy <= f_cur {
            x = nx;
            y = ny;
            f_cur = fy;
        } else if fx <= f_cur {
            x = nx;
            f_cur = fx;
        }
        if !improved || moved < settings.refine_tol {
            break;
        }
    }

    if model.p1 == model.p2 && x > y {
        std::mem::swap(&mut x, &mut y);
    }
    let d_star = TestChannelPair::new(x.clamp(0.0, 0.5), y.clamp(0.0, 0.5))?;
    Ok(OptimumLocusEntry {
        mu,
        d_star,
        point: region_bounds(&d_star, model),
        region: classify(x, y, step),
    })
}

/// Optimal crossover pairs for a list of multipliers, in input order.
pub fn optimum_locus(
    model: &ObservationModel,
    mu_samples: &[LagrangianWeight],
    settings: &OptimizerSettings,
) -> Result<Vec<OptimumLocusEntry>> {
    if mu_samples.is_empty() {
        return Err(Error::Config("optimum_locus needs at least one multiplier".into()));
    }
    let limit = mu_max(model);
    for mu in mu_samples {
        if mu.0 > limit + 1e-12 {
            return Err(Error::Domain {
                name: "mu",
                value: mu.0,
                range: "[0, mu_max]",
            });
        }
    }
    mu_samples
        .par_iter()
        .map(|&mu| optimize_crossovers(model, mu, settings))
        .collect()
}

/// `count` multipliers evenly spaced over `[0, mu_max]`.
pub fn uniform_mu_grid(model: &ObservationModel, count: usize) -> Vec<LagrangianWeight> {
    let top = mu_max(model);
    match count {
        0 => Vec::new(),
        1 => vec![LagrangianWeight(0.0)],
        _ => (0..count)
            .map(|i| LagrangianWeight(top * i as f64 / (count - 1) as f64))
            .collect(),
    }
}

/// Signs of second directional differences observed by [`probe_curvature`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CurvatureSummary {
    pub has_positive: bool,
    pub has_negative: bool,
    pub positive_count: usize,
    pub negative_count: usize,
}

/// Central second differences below this magnitude are treated as zero.
pub const CURVATURE_TOL: f64 = 1e-9;

/// Samples second-order central differences of `f` along random unit
/// directions at random points of `[margin, 0.5 - margin]^2`.
pub fn probe_curvature<F>(f: F, samples: usize, seed: u64) -> Result<CurvatureSummary>
where
    F: Fn(f64, f64) -> f64,
{
    if samples < 100 {
        return Err(Error::Domain {
            name: "samples",
            value: samples as f64,
            range: "[100, inf)",
        });
    }
    const H: f64 = 1e-3;
    const MARGIN: f64 = 2e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = CurvatureSummary::default();
    for _ in 0..samples {
        let x = rng.gen_range(MARGIN..0.5 - MARGIN);
        let y = rng.gen_range(MARGIN..0.5 - MARGIN);
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        let (u, v) = (H * theta.cos(), H * theta.sin());
        let second = f(x + u, y + v) - 2.0 * f(x, y) + f(x - u, y - v);
        if second > CURVATURE_TOL {
            summary.positive_count += 1;
        } else if second < -CURVATURE_TOL {
            summary.negative_count += 1;
        }
    }
    summary.has_positive = summary.positive_count > 0;
    summary.has_negative = summary.negative_count > 0;
    Ok(summary)
}

/// Curvature probe of the Lagrangian `D + mu R` itself.
pub fn curvature_probe(
    model: &ObservationModel,
    mu: LagrangianWeight,
    samples: usize,
    seed: u64,
) -> Result<CurvatureSummary> {
    probe_curvature(|a, b| raw_lagrangian(a, b, model, mu.0), samples, seed)
}
