//! Finite-scale estimators for the four one-sided L^r derivates, the L^r
//! derivative and the approximate derivative.
//!
//! A limit statement such as `Φ_h(α) = o(h)` cannot be certified from finitely
//! many scales. Every estimate therefore carries its per-scale diagnostics and
//! a [`Verdict`] derived from them by [`classify_ratios`].

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{arg_err, Error, Result};
use crate::funcmodel::cantor::{standard_level_length, to_f64, DEFAULT_DEPTH_CAP};
use crate::funcmodel::{CantorScheme, FunctionModel, Interval, PointClassification};
use crate::quadrature::{
    adaptive_lr_integral_with, lr_mean_deviation_with, normalize, window, IntegrandSpec, LrParams,
    Part, QuadratureConfig, Side,
};

pub const DEFAULT_ALPHA_TOL: f64 = 1e-8;
/// Slopes beyond this magnitude are reported as infinite.
pub const ALPHA_LIMIT: f64 = 1e6;
/// Final ratio threshold (times `1 + |α|`) for a converging verdict.
pub const RATIO_THRESHOLD: f64 = 1e-3;
/// Minimum log-log slope of the ratio sequence for a converging verdict.
pub const MIN_TREND_SLOPE: f64 = 0.5;
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Converges,
    Diverges,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Converges => "converges",
            Verdict::Diverges => "diverges",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Decreasing sequence of scales `h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum HGrid {
    Geometric { h0: f64, q: f64, count: usize },
    Explicit { scales: Vec<f64> },
}

impl HGrid {
    pub const DEFAULT_Q: f64 = 0.5;
    pub const DEFAULT_COUNT: usize = 20;

    pub fn geometric(h0: f64, q: f64, count: usize) -> Result<Self> {
        if !(h0 > 0.0 && h0.is_finite()) {
            return arg_err(format!("h0 must be positive, got {h0}"));
        }
        if !(q > 0.0 && q < 1.0) {
            return arg_err(format!("ratio q must lie in (0, 1), got {q}"));
        }
        if count < 3 {
            return arg_err(format!("a grid needs at least 3 scales, got {count}"));
        }
        Ok(HGrid::Geometric { h0, q, count })
    }

    pub fn explicit(scales: Vec<f64>) -> Result<Self> {
        if scales.is_empty() || scales.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return arg_err("explicit scales must be positive and finite");
        }
        if scales.windows(2).any(|w| w[1] >= w[0]) {
            return arg_err("explicit scales must be strictly decreasing");
        }
        Ok(HGrid::Explicit { scales })
    }

    /// `h = r_n / 2` for `n` in `levels`: at `x = 0` the window `[0, h]` ends
    /// at the midpoint of the first level-`n` gap.
    pub fn gap_midpoints(levels: std::ops::RangeInclusive<u32>) -> Result<Self> {
        let scales = levels.map(|n| 0.5 * to_f64(&standard_level_length(n))).collect();
        Self::explicit(scales)
    }

    /// Default grid for estimates at `x`.
    ///
    /// For the counterexample at 0 these are the gap-midpoint scales for
    /// levels 1..=20; otherwise a halving sequence from half the room left
    /// in the domain (capped at 0.05).
    pub fn default_for(f: &FunctionModel, x: f64, side: Side) -> Result<Self> {
        if f.as_counterexample().is_some() && x == 0.0 && side != Side::Left {
            return Self::gap_midpoints(1..=20);
        }
        let room = room(f, x, side);
        if !(room > 0.0) {
            return Err(Error::Domain(format!("no room for a {side:?} window at {x}")));
        }
        Self::geometric(0.1f64.min(room) / 2.0, Self::DEFAULT_Q, Self::DEFAULT_COUNT)
    }

    pub fn scales(&self) -> Vec<f64> {
        match self {
            HGrid::Geometric { h0, q, count } => {
                (0..*count).map(|k| h0 * q.powi(k as i32)).collect()
            }
            HGrid::Explicit { scales } => scales.clone(),
        }
    }

    /// Scales whose window around `x` stays inside the domain.
    pub fn usable(&self, f: &FunctionModel, x: f64, side: Side) -> Vec<f64> {
        let room = room(f, x, side);
        self.scales().into_iter().filter(|&h| h <= room).collect()
    }
}

fn room(f: &FunctionModel, x: f64, side: Side) -> f64 {
    let d = f.domain();
    match side {
        Side::TwoSided => (x - d.lo()).min(d.hi() - x),
        Side::Right => d.hi() - x,
        Side::Left => x - d.lo(),
    }
}

/// Window side for two-sided estimates: one-sided at a domain endpoint.
pub fn natural_side(f: &FunctionModel, x: f64) -> Side {
    let d = f.domain();
    if x <= d.lo() {
        Side::Right
    } else if x >= d.hi() {
        Side::Left
    } else {
        Side::TwoSided
    }
}

/// A slope, or a marker that no finite slope qualifies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PlusInfinity,
    MinusInfinity,
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::PlusInfinity => f64::INFINITY,
            ExtendedReal::MinusInfinity => f64::NEG_INFINITY,
        }
    }

    pub fn negated(self) -> Self {
        match self {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(-v),
            ExtendedReal::PlusInfinity => ExtendedReal::MinusInfinity,
            ExtendedReal::MinusInfinity => ExtendedReal::PlusInfinity,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PlusInfinity => f.write_str("+inf"),
            ExtendedReal::MinusInfinity => f.write_str("-inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => s.serialize_f64(*v),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

/// One scale of a diagnostic sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleSample {
    pub h: f64,
    /// Mean deviation `Φ_h(α)`.
    pub phi: f64,
    /// `Φ_h(α) / h`.
    pub ratio: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Which {
    UpperRight,
    LowerRight,
    UpperLeft,
    LowerLeft,
}

impl Which {
    pub const ALL: [Which; 4] =
        [Which::UpperRight, Which::LowerRight, Which::UpperLeft, Which::LowerLeft];

    /// Window side and bracket of the defining integrand.
    pub fn side_and_part(self) -> (Side, Part) {
        match self {
            Which::UpperRight => (Side::Right, Part::Pos),
            Which::LowerRight => (Side::Right, Part::Neg),
            Which::UpperLeft => (Side::Left, Part::Neg),
            Which::LowerLeft => (Side::Left, Part::Pos),
        }
    }

    pub fn is_upper(self) -> bool {
        matches!(self, Which::UpperRight | Which::UpperLeft)
    }
}

impl fmt::Display for Which {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Which::UpperRight => "upper-right",
            Which::LowerRight => "lower-right",
            Which::UpperLeft => "upper-left",
            Which::LowerLeft => "lower-left",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivateEstimate {
    pub which: Which,
    pub value: ExtendedReal,
    /// Ratios at the reported slope (at the largest slope tried for markers).
    pub diagnostics: Vec<ScaleSample>,
    pub trend_slope: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeEstimate {
    pub value: f64,
    pub side: Side,
    /// `(h, Φ_h(α*(h)), Φ_h(α*(h)) / h, α*(h))` per scale.
    pub residual_ratios: Vec<ScaleSample>,
    pub alpha_trace: Vec<f64>,
    pub trend_slope: Option<f64>,
    pub verdict: Verdict,
}

/// Classification thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub alpha_tol: f64,
    pub ratio_threshold: f64,
    pub min_trend_slope: f64,
    pub alpha_limit: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            alpha_tol: DEFAULT_ALPHA_TOL,
            ratio_threshold: RATIO_THRESHOLD,
            min_trend_slope: MIN_TREND_SLOPE,
            alpha_limit: ALPHA_LIMIT,
        }
    }
}

impl EstimatorConfig {
    pub fn with_alpha_tol(alpha_tol: f64) -> Self {
        Self { alpha_tol, ..Self::default() }
    }

    /// Ratios at or below this are treated as zero. A ratio sequence that is
    /// flat at `δ / (r + 1)^{1/r}`, as for a slope off by `δ` on an affine
    /// piece, falls below it only when `δ` is within `alpha_tol (1 + |α|)`.
    pub fn noise_floor(&self, alpha: f64) -> f64 {
        0.125 * self.alpha_tol * (1.0 + alpha.abs())
    }
}

/// Least-squares slope of `log y` against `log x` over the positive entries.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Verdict for a ratio sequence ordered from coarse to fine scales, plus the
/// log-log trend slope fitted over the finest third (at least three scales).
///
/// * converges: the finest ratio is at the noise floor without a steep upward
///   trend as `h` shrinks, or the trend slope
///   exceeds the configured minimum and the finest ratio is below
///   `ratio_threshold (1 + |α|)`;
/// * diverges: ratios grow as `h` shrinks overall and the minimum over the
///   finer half exceeds the minimum over the coarser half;
/// * inconclusive otherwise.
pub fn classify_ratios(
    hs: &[f64],
    ratios: &[f64],
    alpha: f64,
    cfg: &EstimatorConfig,
) -> (Verdict, Option<f64>) {
    let n = ratios.len();
    if n == 0 || n != hs.len() || ratios.iter().any(|r| !r.is_finite()) {
        return (Verdict::Inconclusive, None);
    }
    let split = n / 2;
    let fine_from = n - (n / 3).max(3).min(n);
    let slope = log_log_slope(&hs[fine_from..], &ratios[fine_from..]);
    let last = ratios[n - 1];
    let growing = slope.is_some_and(|s| s < -cfg.min_trend_slope);
    if last <= cfg.noise_floor(alpha) && !(growing && last > 1e-3 * cfg.noise_floor(alpha)) {
        return (Verdict::Converges, slope);
    }
    if let Some(s) = slope {
        if s > cfg.min_trend_slope && last < cfg.ratio_threshold * (1.0 + alpha.abs()) {
            return (Verdict::Converges, slope);
        }
    }
    if n >= 2 {
        let overall = log_log_slope(hs, ratios);
        let min_of = |r: &[f64]| r.iter().copied().fold(f64::INFINITY, f64::min);
        let (coarse, fine) = ratios.split_at(split.max(1));
        if overall.is_some_and(|s| s < 0.0) && min_of(fine) > min_of(coarse) {
            return (Verdict::Diverges, slope);
        }
    }
    (Verdict::Inconclusive, slope)
}

/// Integration tolerance that keeps ratio errors a tenth of the noise floor,
/// assuming the mean deviation is no smaller than that error.
fn quadrature_for(h: f64, alpha: f64, r: f64, cfg: &EstimatorConfig) -> QuadratureConfig {
    let tol = h * (0.1 * cfg.noise_floor(alpha) * h).powf(r);
    QuadratureConfig { tol: tol.max(f64::MIN_POSITIVE), ..QuadratureConfig::default() }
}

/// Mean deviation resolved to a tenth of the noise floor in the ratio. A
/// coarse first pass bounds the deviation from below, which allows a looser
/// absolute tolerance on the integral when the deviation is large.
fn mean_deviation(
    f: &FunctionModel,
    x: f64,
    alpha: f64,
    h: f64,
    p: LrParams,
    cfg: &EstimatorConfig,
) -> Result<f64> {
    let strict = quadrature_for(h, alpha, p.r(), cfg);
    let r = p.r();
    let coarse = QuadratureConfig { max_subdivisions: 48, ..strict };
    let (lo, hi) = window(x, h, p.side());
    let spec = IntegrandSpec::new(x, alpha, r, p.part());
    let first = adaptive_lr_integral_with(f, Interval::new(lo, hi)?, spec, &coarse)?;
    if first.error_estimate <= strict.tol {
        return Ok(normalize(first, h, r).value);
    }
    let step = 0.1 * cfg.noise_floor(alpha) * h;
    let m_lo = ((first.value - first.error_estimate).max(0.0) / h).powf(1.0 / r).max(step);
    let tol = r * h * step * m_lo.powf(r - 1.0);
    let cfg = QuadratureConfig { tol: tol.max(strict.tol), ..strict };
    Ok(lr_mean_deviation_with(f, x, alpha, h, p, &cfg)?.value)
}

/// Ratio below which `Φ_h(α) / h` is indistinguishable from cancellation
/// error in `F(y) - F(x) - α (y - x)` when `F` has magnitude `scale` near `x`.
pub fn roundoff_floor(scale: f64, alpha: f64, h: f64) -> f64 {
    8.0 * f64::EPSILON * (scale + alpha.abs() * h) / h
}

/// Largest `|F|` at `x` and at the ends of the window of the coarsest scale.
fn value_scale(f: &FunctionModel, x: f64, scales: &[f64], side: Side) -> Result<f64> {
    let h = scales.iter().copied().fold(0.0, f64::max);
    let (lo, hi) = window(x, h, side);
    Ok(f.eval(x)?.abs().max(f.eval(lo)?.abs()).max(f.eval(hi)?.abs()))
}

/// `Φ_h(α) / h`.
pub fn phi_ratio(f: &FunctionModel, x: f64, alpha: f64, h: f64, p: LrParams) -> Result<f64> {
    let scale = value_scale(f, x, &[h], p.side())?;
    Ok(sample(f, x, alpha, h, p, &EstimatorConfig::default(), scale)?.ratio)
}

fn sample(
    f: &FunctionModel,
    x: f64,
    alpha: f64,
    h: f64,
    p: LrParams,
    cfg: &EstimatorConfig,
    scale: f64,
) -> Result<ScaleSample> {
    let mut phi = mean_deviation(f, x, alpha, h, p, cfg)?;
    if phi <= roundoff_floor(scale, alpha, h) * h {
        phi = 0.0;
    }
    Ok(ScaleSample { h, phi, ratio: phi / h, alpha })
}

fn samples_at(
    f: &FunctionModel,
    x: f64,
    alpha: f64,
    scales: &[f64],
    p: LrParams,
    cfg: &EstimatorConfig,
    scale: f64,
) -> Result<Vec<ScaleSample>> {
    scales.par_iter().map(|&h| sample(f, x, alpha, h, p, cfg, scale)).collect()
}

fn usable_scales(f: &FunctionModel, x: f64, grid: &HGrid, side: Side) -> Result<Vec<f64>> {
    if !f.domain().contains(x) {
        return Err(Error::Domain(format!("point {x} outside domain {}", f.domain())));
    }
    let scales = grid.usable(f, x, side);
    if scales.is_empty() {
        return Err(Error::Domain(format!(
            "no grid scale keeps the {side:?} window at {x} inside {}",
            f.domain()
        )));
    }
    Ok(scales)
}

/// Difference quotient over the window of side `side` and scale `h`.
fn difference_quotient(f: &FunctionModel, x: f64, h: f64, side: Side) -> f64 {
    let (lo, hi) = window(x, h, side);
    (f.eval_unchecked(hi) - f.eval_unchecked(lo)) / (hi - lo)
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Minimizes a convex function on `[a, b]` to width `tol`.
fn golden_section(mut a: f64, mut b: f64, tol: f64, mut obj: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = obj(c)?;
    let mut fd = obj(d)?;
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = obj(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = obj(d)?;
        }
    }
    Ok(if fc <= fd { c } else { d })
}

/// Minimizer of `α ↦ Φ_h(α)` at one scale, or `None` when no bracket is found.
fn best_slope(
    f: &FunctionModel,
    x: f64,
    h: f64,
    p: LrParams,
    cfg: &EstimatorConfig,
) -> Result<Option<f64>> {
    let phi = |a: f64| mean_deviation(f, x, a, h, p, cfg);
    let dq = difference_quotient(f, x, h, p.side());
    let mut width = dq.abs().max(1.0);
    let mut mid = dq;
    let mut f_mid = phi(mid)?;
    let (mut lo, mut hi) = (mid - width, mid + width);
    let (mut f_lo, mut f_hi) = (phi(lo)?, phi(hi)?);
    loop {
        if f_lo >= f_mid && f_hi >= f_mid {
            break;
        }
        if lo.abs().max(hi.abs()) > cfg.alpha_limit {
            return Ok(None);
        }
        width *= 2.0;
        if f_lo < f_mid {
            (hi, f_hi) = (mid, f_mid);
            (mid, f_mid) = (lo, f_lo);
            lo = mid - width;
            f_lo = phi(lo)?;
        } else {
            (lo, f_lo) = (mid, f_mid);
            (mid, f_mid) = (hi, f_hi);
            hi = mid + width;
            f_hi = phi(hi)?;
        }
    }
    if f_lo == f_mid && f_mid == f_hi {
        return Ok(Some(mid));
    }
    let tol = cfg.alpha_tol * (1.0 + mid.abs());
    let best = golden_section(lo, hi, tol, phi)?;
    // the difference quotient is exact for affine data; keep it when it is
    // at least as good
    Ok(Some(if phi(dq)? <= phi(best)? { dq } else { best }))
}

/// L^r derivative estimate: per scale the slope minimizing the two-sided mean
/// deviation (one-sided at a domain endpoint), reported at the finest scale.
pub fn lr_derivative(f: &FunctionModel, x: f64, r: f64, grid: &HGrid) -> Result<DerivativeEstimate> {
    lr_derivative_with(f, x, r, grid, &EstimatorConfig::default())
}

pub fn lr_derivative_with(
    f: &FunctionModel,
    x: f64,
    r: f64,
    grid: &HGrid,
    cfg: &EstimatorConfig,
) -> Result<DerivativeEstimate> {
    let side = natural_side(f, x);
    let p = LrParams::new(r, side, Part::Abs)?;
    let scales = usable_scales(f, x, grid, side)?;
    let scale = value_scale(f, x, &scales, side)?;
    let fits: Vec<Option<f64>> =
        scales.par_iter().map(|&h| best_slope(f, x, h, p, cfg)).collect::<Result<_>>()?;
    let h_last = *scales.last().expect("nonempty");
    if fits.iter().any(Option::is_none) {
        let samples = fits
            .iter()
            .zip(&scales)
            .map(|(a, &h)| {
                let alpha = a.unwrap_or_else(|| difference_quotient(f, x, h, side));
                sample(f, x, alpha, h, p, cfg, scale)
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(DerivativeEstimate {
            value: difference_quotient(f, x, h_last, side),
            side,
            alpha_trace: samples.iter().map(|s| s.alpha).collect(),
            residual_ratios: samples,
            trend_slope: None,
            verdict: Verdict::Diverges,
        });
    }
    let alphas: Vec<f64> = fits.into_iter().map(|a| a.expect("checked")).collect();
    let samples = scales
        .par_iter()
        .zip(&alphas)
        .map(|(&h, &a)| sample(f, x, a, h, p, cfg, scale))
        .collect::<Result<Vec<_>>>()?;
    let value = *alphas.last().expect("nonempty");
    let ratios: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
    let (verdict, trend_slope) = classify_ratios(&scales, &ratios, value, cfg);
    Ok(DerivativeEstimate { value, side, residual_ratios: samples, alpha_trace: alphas, trend_slope, verdict })
}

/// One of the four L^r derivates by bisection on `α`: upper derivates are
/// the smallest slope whose bracketed ratio sequence converges, lower
/// derivates the largest.
pub fn one_sided_derivate(
    f: &FunctionModel,
    x: f64,
    r: f64,
    which: Which,
    grid: &HGrid,
    alpha_tol: f64,
) -> Result<DerivateEstimate> {
    one_sided_derivate_with(f, x, r, which, grid, &EstimatorConfig::with_alpha_tol(alpha_tol))
}

pub fn one_sided_derivate_with(
    f: &FunctionModel,
    x: f64,
    r: f64,
    which: Which,
    grid: &HGrid,
    cfg: &EstimatorConfig,
) -> Result<DerivateEstimate> {
    if !(cfg.alpha_tol > 0.0) {
        return arg_err(format!("alpha tolerance must be positive, got {}", cfg.alpha_tol));
    }
    let (side, part) = which.side_and_part();
    let p = LrParams::new(r, side, part)?;
    let scales = usable_scales(f, x, grid, side)?;
    let scale = value_scale(f, x, &scales, side)?;
    let probe = |alpha: f64| -> Result<(Vec<ScaleSample>, Verdict, Option<f64>)> {
        let samples = samples_at(f, x, alpha, &scales, p, cfg, scale)?;
        let ratios: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
        let (v, slope) = classify_ratios(&scales, &ratios, alpha, cfg);
        Ok((samples, v, slope))
    };
    // Upper derivates converge for large α, lower ones for small α. Searching
    // in `σ α` with σ = ±1 turns both into "smallest converging value".
    let sigma = if which.is_upper() { 1.0 } else { -1.0 };
    let start = sigma * difference_quotient(f, x, *scales.last().expect("nonempty"), side);
    let converges = |t: f64| -> Result<bool> { Ok(probe(sigma * t)?.1 == Verdict::Converges) };

    let marker = |up: bool| {
        let up = if sigma > 0.0 { up } else { !up };
        if up {
            ExtendedReal::PlusInfinity
        } else {
            ExtendedReal::MinusInfinity
        }
    };

    // converging end
    let mut width = start.abs().max(1.0);
    let mut good = start;
    while !converges(good)? {
        good = start + width;
        width *= 2.0;
        if good > cfg.alpha_limit {
            let (samples, _, slope) = probe(sigma * good)?;
            return Ok(DerivateEstimate {
                which,
                value: marker(true),
                diagnostics: samples,
                trend_slope: slope,
                verdict: Verdict::Diverges,
            });
        }
    }
    // non-converging end
    let mut width = (good - start).abs().max(start.abs()).max(1.0);
    let mut bad = good - width;
    while converges(bad)? {
        good = bad;
        width *= 2.0;
        bad = good - width;
        if bad < -cfg.alpha_limit {
            let (samples, v, slope) = probe(sigma * good)?;
            return Ok(DerivateEstimate {
                which,
                value: marker(false),
                diagnostics: samples,
                trend_slope: slope,
                verdict: v,
            });
        }
    }
    while good - bad > cfg.alpha_tol * (1.0 + good.abs().min(bad.abs())) {
        let mid = 0.5 * (good + bad);
        if mid <= bad || mid >= good {
            break;
        }
        if converges(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    let alpha = sigma * good;
    let (samples, verdict, slope) = probe(alpha)?;
    Ok(DerivateEstimate {
        which,
        value: ExtendedReal::Finite(alpha),
        diagnostics: samples,
        trend_slope: slope,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourDerivates {
    pub upper_right: Option<DerivateEstimate>,
    pub lower_right: Option<DerivateEstimate>,
    pub upper_left: Option<DerivateEstimate>,
    pub lower_left: Option<DerivateEstimate>,
    /// All four available, finite and within the tolerance of each other.
    pub agree: bool,
    pub tolerance: f64,
}

impl FourDerivates {
    pub fn iter(&self) -> impl Iterator<Item = &DerivateEstimate> {
        [&self.upper_right, &self.lower_right, &self.upper_left, &self.lower_left]
            .into_iter()
            .flatten()
    }

    pub fn get(&self, which: Which) -> Option<&DerivateEstimate> {
        match which {
            Which::UpperRight => self.upper_right.as_ref(),
            Which::LowerRight => self.lower_right.as_ref(),
            Which::UpperLeft => self.upper_left.as_ref(),
            Which::LowerLeft => self.lower_left.as_ref(),
        }
    }
}

/// All four derivates; a side without room in the domain is left out.
pub fn four_derivates(
    f: &FunctionModel,
    x: f64,
    r: f64,
    grid: &HGrid,
    alpha_tol: f64,
) -> Result<FourDerivates> {
    let mut found: Vec<Option<DerivateEstimate>> = Vec::with_capacity(4);
    for which in Which::ALL {
        let (side, _) = which.side_and_part();
        found.push(if room(f, x, side) > 0.0 && !grid.usable(f, x, side).is_empty() {
            Some(one_sided_derivate(f, x, r, which, grid, alpha_tol)?)
        } else {
            None
        });
    }
    let values: Vec<Option<f64>> =
        found.iter().map(|e| e.as_ref().and_then(|e| e.value.finite())).collect();
    let tolerance = 1e3 * alpha_tol;
    let agree = values.iter().all(Option::is_some) && {
        let v: Vec<f64> = values.iter().map(|v| v.expect("checked")).collect();
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo <= tolerance * (1.0 + lo.abs().max(hi.abs()))
    };
    let mut it = found.into_iter();
    Ok(FourDerivates {
        upper_right: it.next().flatten(),
        lower_right: it.next().flatten(),
        upper_left: it.next().flatten(),
        lower_left: it.next().flatten(),
        agree,
        tolerance,
    })
}

/// A set with a membership test and a sampler, used to restrict difference
/// quotients in [`approx_derivative`].
pub trait DensitySet: Send + Sync {
    fn contains(&self, y: f64) -> bool;
    /// Up to `count` points of the set in `[lo, hi]`.
    fn sample(&self, lo: f64, hi: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<f64>;
    fn describe(&self) -> String;
}

/// All reals.
#[derive(Debug, Clone, Copy, Default)]
pub struct WholeLine;

impl DensitySet for WholeLine {
    fn contains(&self, y: f64) -> bool {
        y.is_finite()
    }

    fn sample(&self, lo: f64, hi: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..count).map(|_| rng.gen_range(lo..=hi)).collect()
    }

    fn describe(&self) -> String {
        "all reals".into()
    }
}

/// `(start, +∞)`.
#[derive(Debug, Clone, Copy)]
pub struct RightOf(pub f64);

impl DensitySet for RightOf {
    fn contains(&self, y: f64) -> bool {
        y > self.0
    }

    fn sample(&self, lo: f64, hi: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let lo = lo.max(self.0);
        if hi <= lo {
            return Vec::new();
        }
        (0..count)
            .map(|_| rng.gen_range(lo..=hi))
            .filter(|&y| y > self.0)
            .collect()
    }

    fn describe(&self) -> String {
        format!("reals above {}", self.0)
    }
}

/// The perfect set of the counterexample, sampled at left endpoints of deep
/// level intervals and checked by exact classification.
#[derive(Debug, Clone)]
pub struct PerfectSet {
    scheme: CantorScheme,
    /// f64 tables: level lengths and right-child offsets
    r: Vec<f64>,
    step: Vec<f64>,
    sample_level: u32,
}

impl Default for PerfectSet {
    fn default() -> Self {
        Self::new(DEFAULT_DEPTH_CAP)
    }
}

impl PerfectSet {
    pub fn new(depth_cap: u32) -> Self {
        let scheme = CantorScheme::standard().with_depth_cap(depth_cap);
        let sample_level = depth_cap.min(40);
        let r = (0..=sample_level + 1).map(|n| to_f64(&scheme.level_length(n))).collect();
        let step = (0..=sample_level)
            .map(|n| to_f64(&(scheme.level_length(n + 1) + scheme.gap_length(n))))
            .collect();
        Self { scheme, r, step, sample_level }
    }

    /// Random root-to-leaf path through level intervals meeting `[lo, hi]`.
    fn random_path(&self, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Option<u64> {
        let mut node = 0.0;
        let mut path = 0u64;
        if node + self.r[0] < lo || node > hi {
            return None;
        }
        for n in 0..self.sample_level as usize {
            let children = [node, node + self.step[n]];
            let len = self.r[n + 1];
            let mut options: Vec<usize> = (0..2)
                .filter(|&i| children[i] <= hi && children[i] + len >= lo)
                .collect();
            options.shuffle(rng);
            let &pick = options.first()?;
            node = children[pick];
            path = (path << 1) | pick as u64;
        }
        Some(path)
    }
}

impl DensitySet for PerfectSet {
    fn contains(&self, y: f64) -> bool {
        matches!(
            self.scheme.classify_point(y, self.scheme.depth_cap()),
            PointClassification::InPerfectSetUpToDepth { .. }
        ) && (0.0..=1.0).contains(&y)
    }

    fn sample(&self, lo: f64, hi: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut out = Vec::with_capacity(count);
        for _ in 0..4 * count {
            if out.len() == count {
                break;
            }
            let Some(path) = self.random_path(lo, hi, rng) else { break };
            let Ok(q) = self.scheme.level_left_endpoint(self.sample_level, path + 1) else {
                break;
            };
            let y = to_f64(&q);
            if y >= lo && y <= hi && self.contains(y) {
                out.push(y);
            }
        }
        out
    }

    fn describe(&self) -> String {
        format!("perfect set (depth {})", self.scheme.depth_cap())
    }
}

/// Samples per scale in [`approx_derivative`].
pub const APPROX_SAMPLES: usize = 64;

/// Approximate derivative along `set`: per scale the median difference
/// quotient over sampled points of the set in the window around `x`; the
/// spread of the quotients plays the role of the residual ratio.
pub fn approx_derivative(
    f: &FunctionModel,
    x: f64,
    set: &dyn DensitySet,
    grid: &HGrid,
    seed: u64,
) -> Result<DerivativeEstimate> {
    let side = natural_side(f, x);
    let scales = usable_scales(f, x, grid, side)?;
    let fx = f.eval(x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(scales.len());
    let mut empty = false;
    for &h in &scales {
        let (lo, hi) = window(x, h, side);
        let quotients: Vec<f64> = set
            .sample(lo, hi, APPROX_SAMPLES, &mut rng)
            .into_iter()
            .filter(|&y| y != x)
            .map(|y| (f.eval_unchecked(y) - fx) / (y - x))
            .collect();
        if quotients.is_empty() {
            empty = true;
            break;
        }
        let med = median(quotients.clone());
        let spread = quotients.iter().map(|q| (q - med).abs()).fold(0.0, f64::max);
        samples.push(ScaleSample { h, phi: spread * h, ratio: spread, alpha: med });
    }
    let Some(last) = samples.last() else {
        return Ok(DerivativeEstimate {
            value: f64::NAN,
            side,
            residual_ratios: samples,
            alpha_trace: Vec::new(),
            trend_slope: None,
            verdict: Verdict::Inconclusive,
        });
    };
    let value = last.alpha;
    let hs: Vec<f64> = samples.iter().map(|s| s.h).collect();
    let ratios: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
    let (verdict, trend_slope) = classify_ratios(&hs, &ratios, value, &EstimatorConfig::default());
    Ok(DerivativeEstimate {
        value,
        side,
        alpha_trace: samples.iter().map(|s| s.alpha).collect(),
        residual_ratios: samples,
        trend_slope,
        verdict: if empty { Verdict::Inconclusive } else { verdict },
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
