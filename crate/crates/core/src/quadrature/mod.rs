//! L^r mean-deviation integrals.
//!
//! For a base point `x`, slope `alpha` and exponent `r` the integrand is
//! `g(y)^r` with `g(y) = F(y) - F(x) - alpha (y - x)`, taken as `|g|`, `[g]_+`
//! or `[g]_-`. Affine pieces of `F` are integrated in closed form, smooth
//! pieces by globally adaptive 15-point Gauss–Legendre with splits at the
//! sign changes of `g`, and Cantor blocks by their level series.

pub mod gauss;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};
use crate::funcmodel::{CantorBlock, FunctionModel, Interval, Piece};

/// Default absolute tolerance per window.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default number of subdivisions per window.
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// `[x - h, x + h]`
    TwoSided,
    /// `[x, x + h]`
    Right,
    /// `[x - h, x]`
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Abs,
    Pos,
    Neg,
}

impl Part {
    /// `|s|^r`, `[s]_+^r` or `[s]_-^r`.
    #[inline]
    pub fn power(self, s: f64, r: f64) -> f64 {
        let s = match self {
            Part::Abs => s.abs(),
            Part::Pos => s.max(0.0),
            Part::Neg => (-s).max(0.0),
        };
        if s == 0.0 {
            0.0
        } else if r == 1.0 {
            s
        } else if r == 2.0 {
            s * s
        } else {
            s.powf(r)
        }
    }

    fn keeps_sign(self, positive: bool) -> bool {
        match self {
            Part::Abs => true,
            Part::Pos => positive,
            Part::Neg => !positive,
        }
    }
}

/// Exponent, window side and bracket of a mean-deviation integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LrParams {
    r: f64,
    side: Side,
    part: Part,
}

impl LrParams {
    pub fn new(r: f64, side: Side, part: Part) -> Result<Self> {
        check_exponent(r)?;
        Ok(Self { r, side, part })
    }

    pub fn two_sided(r: f64) -> Result<Self> {
        Self::new(r, Side::TwoSided, Part::Abs)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn part(&self) -> Part {
        self.part
    }

    pub fn with_side(self, side: Side) -> Self {
        Self { side, ..self }
    }

    pub fn with_part(self, part: Part) -> Self {
        Self { part, ..self }
    }
}

fn check_exponent(r: f64) -> Result<()> {
    if !(r.is_finite() && r >= 1.0) {
        return arg_err(format!("exponent r must satisfy 1 <= r < inf, got {r}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    /// Absolute error estimate.
    pub error_estimate: f64,
    pub subdivisions: usize,
}

impl fmt::Display for QuadratureResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.12e} ± {:.1e}", self.value, self.error_estimate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_subdivisions: DEFAULT_MAX_SUBDIVISIONS }
    }
}

impl QuadratureConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// Mean of `|s|^r` for `s` running linearly between two values of one sign.
fn mean_abs_power(s0: f64, s1: f64, r: f64) -> f64 {
    let (a0, a1) = (s0.abs(), s1.abs());
    let (lo, hi) = if a0 < a1 { (a0, a1) } else { (a1, a0) };
    if hi == 0.0 {
        return 0.0;
    }
    if lo == hi {
        return Part::Abs.power(lo, r);
    }
    if lo >= 0.5 * hi {
        // far from the root: Gauss–Legendre is exact to rounding and avoids
        // the cancellation in the antiderivative difference
        gauss::integrate(|s| Part::Abs.power(s, r), lo, hi) / (hi - lo)
    } else {
        (hi.powf(r + 1.0) - lo.powf(r + 1.0)) / ((r + 1.0) * (hi - lo))
    }
}

/// `∫_{t0}^{t1} part(a + b t)^r dt` in closed form, split at the root.
pub fn affine_part_integral(a: f64, b: f64, r: f64, t0: f64, t1: f64, part: Part) -> f64 {
    if t1 <= t0 {
        return 0.0;
    }
    let s0 = a + b * t0;
    let s1 = a + b * t1;
    let len = t1 - t0;
    if b == 0.0 {
        return len * part.power(a, r);
    }
    let segment = |s_start: f64, s_end: f64, len: f64| -> f64 {
        let positive = if s_start != 0.0 { s_start > 0.0 } else { s_end > 0.0 };
        if part.keeps_sign(positive) {
            len * mean_abs_power(s_start, s_end, r)
        } else {
            0.0
        }
    };
    if (s0 < 0.0 && s1 > 0.0) || (s0 > 0.0 && s1 < 0.0) {
        let frac = s0 / (s0 - s1);
        let left = len * frac;
        segment(s0, 0.0, left) + segment(0.0, s1, len - left)
    } else {
        segment(s0, s1, len)
    }
}

/// `∫_{t0}^{t1} |a + b t|^r dt`.
pub fn affine_power_integral(a: f64, b: f64, r: f64, t0: f64, t1: f64) -> Result<f64> {
    check_exponent(r)?;
    if t1 < t0 {
        return arg_err(format!("reversed limits [{t0}, {t1}]"));
    }
    Ok(affine_part_integral(a, b, r, t0, t1, Part::Abs))
}

/// What to integrate: the bracket of `F(y) - F(x) - alpha (y - x)` raised to `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrandSpec {
    pub x: f64,
    pub alpha: f64,
    pub r: f64,
    pub part: Part,
}

impl IntegrandSpec {
    pub fn new(x: f64, alpha: f64, r: f64, part: Part) -> Self {
        Self { x, alpha, r, part }
    }
}

struct Integrand<'a> {
    f: &'a FunctionModel,
    x: f64,
    alpha: f64,
    base: f64,
    r: f64,
    part: Part,
    /// `[e_1 - alpha, e_2, ...]` of the local expansion, when polynomial
    shifted: Option<Vec<f64>>,
}

impl<'a> Integrand<'a> {
    fn new(f: &'a FunctionModel, spec: IntegrandSpec) -> Self {
        let expansion = f.local_expansion(spec.x);
        let (base, shifted) = match expansion {
            Some(mut e) if e.len() > 1 => {
                let base = e[0];
                e.remove(0);
                e[0] -= spec.alpha;
                (base, Some(e))
            }
            Some(e) => (e[0], Some(vec![-spec.alpha])),
            None => (f.eval_unchecked(spec.x), None),
        };
        Self { f, x: spec.x, alpha: spec.alpha, base, r: spec.r, part: spec.part, shifted }
    }

    #[inline]
    fn g(&self, y: f64) -> f64 {
        let t = y - self.x;
        match &self.shifted {
            Some(q) => t * q.iter().rev().fold(0.0, |acc, &c| acc * t + c),
            None => self.f.eval_unchecked(y) - self.base - self.alpha * t,
        }
    }

    #[inline]
    fn h(&self, y: f64) -> f64 {
        self.part.power(self.g(y), self.r)
    }

    /// Affine part `-F(x) - alpha (y - x)` of `g` at `y`.
    fn affine_part(&self, y: f64) -> f64 {
        -self.base - self.alpha * (y - self.x)
    }

    fn affine_piece(&self, lo: f64, hi: f64, slope: f64, intercept: f64) -> f64 {
        // on the piece through x the offset vanishes; skip the cancellation
        let s0 = if lo <= self.x && self.x <= hi {
            (slope - self.alpha) * (lo - self.x)
        } else {
            intercept + slope * lo - self.base - self.alpha * (lo - self.x)
        };
        affine_part_integral(s0, slope - self.alpha, self.r, 0.0, hi - lo, self.part)
    }

    /// `∫ part(a + F)^r` over a block with the affine part held at `a`.
    fn frozen_block(&self, b: &CantorBlock<'_>, a: f64) -> f64 {
        let (r, part) = (self.r, self.part);
        let (lo, hi) = b.bounds();
        let mut total = (hi - lo - b.gap_measure()).max(0.0) * part.power(a, r);
        for (count, u, v, w) in b.level_gaps() {
            let ramp = 0.5 * (u - v);
            let ramps = if ramp > 0.0 {
                2.0 * affine_part_integral(a, w / ramp, r, 0.0, ramp, part)
            } else {
                0.0
            };
            total += count * (ramps + v * part.power(a + w, r));
        }
        total
    }

    /// Bound on the freezing error where `A + F` can vanish on a constant
    /// part of `F`: the perfect-set part (`F = 0`) and plateaus.
    fn kink_bound(&self, b: &CantorBlock<'_>, a0: f64, a1: f64) -> f64 {
        let (lo, hi) = b.bounds();
        let (amin, amax) = (a0.min(a1), a0.max(a1));
        let spread = amax - amin;
        let per_length = 0.5 * self.r * spread.powf(self.r);
        let mut measure = 0.0;
        if amin <= 0.0 && 0.0 <= amax {
            measure += (hi - lo - b.gap_measure()).max(0.0);
        }
        for (count, _, v, w) in b.level_gaps() {
            if amin <= -w && -w <= amax {
                measure += count * v;
            }
        }
        per_length * measure
    }

    /// Value and error bound for a Cantor block.
    ///
    /// Writes `g = A + F` with `A` affine and `|F| <= M` supported on the gaps
    /// of the block, and returns the best of three approximations: `A` frozen
    /// at the block centre (error estimated by one refinement step plus a
    /// bound near the kinks of the bracket), `A` alone
    /// (Lipschitz bound), and, when `A` keeps one sign with `|A| > M`, a
    /// second-order expansion of `|A + F|^r` about `A` built from level-series
    /// moments of `F`. The expansion is exact for `r = 1` and `r = 2`.
    fn block(&self, b: &CantorBlock<'_>) -> (f64, f64) {
        let (lo, hi) = b.bounds();
        let len = hi - lo;
        let (r, part) = (self.r, self.part);
        let a0 = self.affine_part(lo);
        let a1 = self.affine_part(hi);
        let amax = a0.abs().max(a1.abs());
        let m = b.sup_abs();
        let lip = |d: f64| r * d * (amax + m).powf(r - 1.0);

        // A frozen at its central value, checked against one refinement step
        let slope = (a1 - a0) / len;
        if slope == 0.0 {
            return (self.frozen_block(b, a0), 0.0);
        }
        // (A + F)^2 expands exactly; F is symmetric about the block centre,
        // so the cross term only sees the central value of A
        if r == 2.0 && part == Part::Abs {
            let square = affine_part_integral(a0, a1 - a0, r, 0.0, 1.0, part) * len;
            let value = square + (a0 + a1) * b.signed_integral() + b.abs_power_integral(2.0);
            return (value.max(0.0), 0.0);
        }
        let coarse = self.frozen_block(b, 0.5 * (a0 + a1));
        let fine: f64 = b
            .refine()
            .into_iter()
            .map(|piece| match piece {
                Piece::Affine { lo, hi, slope, intercept } => {
                    self.affine_piece(lo, hi, slope, intercept)
                }
                Piece::Block(child) => {
                    let (clo, chi) = child.bounds();
                    self.frozen_block(&child, self.affine_part(0.5 * (clo + chi)))
                }
                Piece::Smooth { .. } => unreachable!("blocks refine into affine pieces and blocks"),
            })
            .sum();
        let mut best = (fine, (fine - coarse).abs() + self.kink_bound(b, a0, a1));

        // A alone
        let a_only = affine_part_integral(a0, a1 - a0, r, 0.0, 1.0, part) * len;
        let err = lip(m) * b.gap_measure();
        if err < best.1 {
            best = (a_only, err);
        }

        let amin = if a0.signum() == a1.signum() { a0.abs().min(a1.abs()) } else { 0.0 };
        if amin > m {
            let sign = a0.signum();
            if !part.keeps_sign(sign > 0.0) {
                return (0.0, 0.0);
            }
            let ac = 0.5 * (a0 + a1);
            let d1 = r * ac.abs().powf(r - 1.0) * sign;
            let d2 = r * (r - 1.0) * ac.abs().powf(r - 2.0);
            let s1 = b.signed_integral();
            let s2 = b.abs_power_integral(2.0);
            let value = a_only + d1 * s1 + 0.5 * d2 * s2;
            let (smin, smax) = (amin - m, amax + m);
            let d3 = r * (r - 1.0) * (r - 2.0).abs() * smin.powf(r - 3.0).max(smax.powf(r - 3.0));
            let err = if d3 == 0.0 {
                0.0
            } else {
                let s3 = b.abs_power_integral(3.0);
                let s1_abs = b.abs_power_integral(1.0);
                let bl = slope.abs() * len;
                d3 * (s3 / 6.0 + bl * bl / 8.0 * s1_abs + bl / 4.0 * s2)
            };
            if err < best.1 {
                best = (value.max(0.0), err);
            }
        }
        best
    }

    /// Splits `[lo, hi]` at sign changes of `g` found on a sampling grid.
    fn sign_splits(&self, lo: f64, hi: f64) -> Vec<f64> {
        const SAMPLES: usize = 32;
        let mut cuts = vec![lo];
        let mut prev_y = lo;
        let mut prev_g = self.g(lo);
        for i in 1..=SAMPLES {
            let y = if i == SAMPLES { hi } else { lo + (hi - lo) * i as f64 / SAMPLES as f64 };
            let gy = self.g(y);
            if prev_g != 0.0 && gy != 0.0 && (prev_g < 0.0) != (gy < 0.0) {
                cuts.push(self.bisect_root(prev_y, y, prev_g));
            } else if gy == 0.0 && i < SAMPLES {
                cuts.push(y);
            }
            prev_y = y;
            prev_g = gy;
        }
        cuts.push(hi);
        cuts.dedup();
        cuts
    }

    fn bisect_root(&self, mut a: f64, mut b: f64, ga: f64) -> f64 {
        let neg_a = ga < 0.0;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let gm = self.g(m);
            if gm == 0.0 {
                return m;
            }
            if (gm < 0.0) == neg_a {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}

#[derive(Debug)]
enum Work<'a> {
    Smooth { lo: f64, hi: f64 },
    Block(CantorBlock<'a>),
}

#[derive(Debug)]
struct Segment<'a> {
    lo: f64,
    value: f64,
    error: f64,
    work: Work<'a>,
}

impl PartialEq for Segment<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment<'_> {}

impl PartialOrd for Segment<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

struct Accumulator<'a> {
    done: Vec<(f64, f64, f64)>,
    heap: BinaryHeap<Segment<'a>>,
    pending_error: f64,
    /// running sum of all values, used only for the relative stopping floor
    total: f64,
}

impl<'a> Accumulator<'a> {
    fn finish(&mut self, lo: f64, value: f64, error: f64) {
        self.total += value;
        self.done.push((lo, value, error));
    }

    fn push(&mut self, seg: Segment<'a>) {
        if seg.error > 0.0 {
            self.pending_error += seg.error;
            self.total += seg.value;
            self.heap.push(seg);
        } else {
            self.finish(seg.lo, seg.value, 0.0);
        }
    }

    fn add_piece(&mut self, ig: &Integrand<'_>, piece: Piece<'a>) {
        match piece {
            Piece::Affine { lo, hi, slope, intercept } => {
                self.finish(lo, ig.affine_piece(lo, hi, slope, intercept), 0.0);
            }
            Piece::Smooth { lo, hi } => {
                for w in ig.sign_splits(lo, hi).windows(2) {
                    self.push(smooth_segment(ig, w[0], w[1]));
                }
            }
            Piece::Block(b) => {
                let (value, error) = ig.block(&b);
                self.push(Segment { lo: b.bounds().0, value, error, work: Work::Block(b) });
            }
        }
    }
}

fn smooth_segment<'a>(ig: &Integrand<'_>, lo: f64, hi: f64) -> Segment<'a> {
    let mid = 0.5 * (lo + hi);
    let whole = gauss::integrate(|y| ig.h(y), lo, hi);
    let halves = gauss::integrate(|y| ig.h(y), lo, mid) + gauss::integrate(|y| ig.h(y), mid, hi);
    Segment { lo, value: halves, error: (whole - halves).abs(), work: Work::Smooth { lo, hi } }
}

/// `∫_window part(F(y) - F(x) - alpha (y - x))^r dy`.
pub fn adaptive_lr_integral(
    f: &FunctionModel,
    window: Interval,
    spec: IntegrandSpec,
    tol: f64,
) -> Result<QuadratureResult> {
    adaptive_lr_integral_with(f, window, spec, &QuadratureConfig::with_tol(tol))
}

pub fn adaptive_lr_integral_with(
    f: &FunctionModel,
    window: Interval,
    spec: IntegrandSpec,
    config: &QuadratureConfig,
) -> Result<QuadratureResult> {
    check_exponent(spec.r)?;
    if !(config.tol > 0.0) {
        return arg_err(format!("tolerance must be positive, got {}", config.tol));
    }
    let domain = f.domain();
    if !domain.contains_interval(&window) {
        return Err(Error::Domain(format!("window {window} escapes domain {domain}")));
    }
    if !domain.contains(spec.x) {
        return Err(Error::Domain(format!("base point {} outside domain {domain}", spec.x)));
    }
    let ig = Integrand::new(f, spec);
    let mut acc = Accumulator { done: Vec::new(), heap: BinaryHeap::new(), pending_error: 0.0, total: 0.0 };
    for piece in f.pieces(window.lo(), window.hi()) {
        acc.add_piece(&ig, piece);
    }

    let mut subdivisions = 0;
    loop {
        let target = config.tol.max(1e-14 * acc.total.abs());
        if acc.pending_error <= target || subdivisions >= config.max_subdivisions {
            break;
        }
        let Some(seg) = acc.heap.pop() else { break };
        acc.pending_error -= seg.error;
        acc.total -= seg.value;
        match seg.work {
            Work::Smooth { lo, hi } => {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    acc.finish(seg.lo, seg.value, seg.error);
                    continue;
                }
                acc.push(smooth_segment(&ig, lo, mid));
                acc.push(smooth_segment(&ig, mid, hi));
            }
            Work::Block(b) => {
                for piece in b.refine() {
                    acc.add_piece(&ig, piece);
                }
            }
        }
        subdivisions += 1;
    }
    for seg in acc.heap.drain() {
        acc.done.push((seg.lo, seg.value, seg.error));
    }
    acc.done.sort_by(|a, b| a.0.total_cmp(&b.0));
    let value: f64 = acc.done.iter().map(|d| d.1).sum();
    let error: f64 = acc.done.iter().map(|d| d.2).sum();
    Ok(QuadratureResult { value: value.max(0.0), error_estimate: error, subdivisions })
}

/// Integration window for a base point, scale and side.
pub fn window(x: f64, h: f64, side: Side) -> (f64, f64) {
    match side {
        Side::TwoSided => (x - h, x + h),
        Side::Right => (x, x + h),
        Side::Left => (x - h, x),
    }
}

/// `((1/h) ∫_window part(F(y) - F(x) - alpha (y - x))^r dy)^{1/r}`.
pub fn lr_mean_deviation(
    f: &FunctionModel,
    x: f64,
    alpha: f64,
    h: f64,
    p: LrParams,
) -> Result<QuadratureResult> {
    lr_mean_deviation_with(f, x, alpha, h, p, &QuadratureConfig::default())
}

pub fn lr_mean_deviation_with(
    f: &FunctionModel,
    x: f64,
    alpha: f64,
    h: f64,
    p: LrParams,
    config: &QuadratureConfig,
) -> Result<QuadratureResult> {
    if !(h > 0.0 && h.is_finite()) {
        return arg_err(format!("scale h must be positive, got {h}"));
    }
    let (lo, hi) = window(x, h, p.side);
    let domain = f.domain();
    if lo < domain.lo() || hi > domain.hi() {
        return Err(Error::Domain(format!(
            "window [{lo}, {hi}] escapes domain {domain}"
        )));
    }
    let win = Interval::new(lo, hi)?;
    let raw = adaptive_lr_integral_with(f, win, IntegrandSpec::new(x, alpha, p.r, p.part), config)?;
    Ok(normalize(raw, h, p.r))
}

/// Turns a raw integral into `(I / h)^{1/r}` with a propagated error bound.
pub(crate) fn normalize(raw: QuadratureResult, h: f64, r: f64) -> QuadratureResult {
    let root = |v: f64| (v.max(0.0) / h).powf(1.0 / r);
    let value = root(raw.value);
    let error = root(raw.value + raw.error_estimate) - value;
    QuadratureResult { value, error_estimate: error.max(0.0), subdivisions: raw.subdivisions }
}
