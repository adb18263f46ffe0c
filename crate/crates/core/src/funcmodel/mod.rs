//! Real functions on closed intervals.
//!
//! Every [`FunctionModel`] can be evaluated pointwise and decomposed into
//! [`Piece`]s over a window. The quadrature module integrates affine pieces in
//! closed form, applies Gauss–Legendre to smooth ones, and refines Cantor
//! blocks of the counterexample level by level.

pub mod cantor;
pub mod counterexample;
pub mod spec;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use cantor::{
    format_rational, parse_rational, CantorScheme, GapAddress, PointClassification, RampSide,
    RationalInterval,
};
pub use counterexample::{CantorBlock, Counterexample};
pub use spec::FunctionSpec;

use crate::error::{arg_err, Error, Result};

/// Non-degenerate closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return arg_err(format!("interval endpoints must be finite: [{lo}, {hi}]"));
        }
        if lo >= hi {
            return arg_err(format!("degenerate interval [{lo}, {hi}]"));
        }
        Ok(Self { lo, hi })
    }

    pub(crate) fn new_unchecked(lo: f64, hi: f64) -> Self {
        debug_assert!(lo < hi);
        Self { lo, hi }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        self.lo + 0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// True when the interiors intersect.
    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Continuous piecewise-linear interpolant through strictly increasing nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
    domain: Interval,
}

impl PiecewiseLinear {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return arg_err("piecewise-linear function needs at least two nodes");
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return arg_err("piecewise-linear nodes must be finite");
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return arg_err("piecewise-linear breakpoints must be strictly increasing");
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
        let domain = Interval::new(xs[0], xs[xs.len() - 1])?;
        Ok(Self { xs, ys, domain })
    }

    /// Restricts the evaluation domain to a sub-interval of the node range.
    pub fn with_domain(mut self, domain: Interval) -> Result<Self> {
        if !self.domain.contains_interval(&domain) {
            return Err(Error::Argument(format!(
                "domain {domain} exceeds the node range {}",
                self.domain
            )));
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    fn segment(&self, x: f64) -> usize {
        let i = self.xs.partition_point(|&b| b <= x);
        i.clamp(1, self.xs.len() - 1) - 1
    }

    fn segment_coeffs(&self, i: usize) -> (f64, f64) {
        let slope = (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i]);
        (slope, self.ys[i] - slope * self.xs[i])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.ys[i] + t * (self.ys[i + 1] - self.ys[i])
    }

    fn pieces(&self, lo: f64, hi: f64, out: &mut Vec<Piece<'_>>) {
        let first = self.segment(lo);
        for i in first..self.xs.len() - 1 {
            if self.xs[i] >= hi {
                break;
            }
            let (slope, intercept) = self.segment_coeffs(i);
            let piece = Piece::Affine { lo: self.xs[i], hi: self.xs[i + 1], slope, intercept };
            if let Some(p) = piece.clip(lo, hi) {
                out.push(p);
            }
        }
    }
}

/// `Σ c_k x^k` on a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
    domain: Interval,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>, domain: Interval) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return arg_err("polynomial coefficients must be finite");
        }
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Ok(Self { coeffs, domain })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        let coeffs: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Polynomial::new(if coeffs.is_empty() { vec![0.0] } else { coeffs }, self.domain)
            .expect("finite coefficients stay finite")
    }

    /// Coefficients of `t ↦ p(x + t)` (Taylor expansion at `x`).
    pub fn taylor_at(&self, x: f64) -> Vec<f64> {
        // repeated synthetic division by (t - x)
        let mut work = self.coeffs.clone();
        let n = work.len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = 0.0;
            for j in (k..n).rev() {
                acc = acc * x + work[j];
                work[j] = acc;
            }
            out.push(work[k]);
        }
        out
    }
}

/// `c |x - x0|^p`, optionally odd: `c sign(x - x0) |x - x0|^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledPower {
    pub c: f64,
    pub x0: f64,
    pub p: f64,
    pub odd: bool,
    domain: Interval,
}

impl ScaledPower {
    pub fn new(c: f64, x0: f64, p: f64, odd: bool, domain: Interval) -> Result<Self> {
        if !(c.is_finite() && x0.is_finite() && p.is_finite()) {
            return arg_err("power parameters must be finite");
        }
        if p <= 0.0 {
            return arg_err(format!("power exponent must be positive, got {p}"));
        }
        Ok(Self { c, x0, p, odd, domain })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let d = x - self.x0;
        let v = self.c * d.abs().powf(self.p);
        if self.odd && d < 0.0 {
            -v
        } else {
            v
        }
    }
}

/// A real function on a closed interval.
#[derive(Debug, Clone)]
pub enum FunctionModel {
    PiecewiseLinear(PiecewiseLinear),
    Polynomial(Polynomial),
    ScaledPower(ScaledPower),
    Counterexample(Counterexample),
    /// `x ↦ -inner(x)`
    Negation(Box<FunctionModel>),
    /// `x ↦ inner(-x)` on the mirrored domain
    Reflection(Box<FunctionModel>),
}

impl From<PiecewiseLinear> for FunctionModel {
    fn from(f: PiecewiseLinear) -> Self {
        Self::PiecewiseLinear(f)
    }
}

impl From<Polynomial> for FunctionModel {
    fn from(f: Polynomial) -> Self {
        Self::Polynomial(f)
    }
}

impl From<ScaledPower> for FunctionModel {
    fn from(f: ScaledPower) -> Self {
        Self::ScaledPower(f)
    }
}

impl From<Counterexample> for FunctionModel {
    fn from(f: Counterexample) -> Self {
        Self::Counterexample(f)
    }
}

impl FunctionModel {
    /// Convenience constructor for a polynomial.
    pub fn polynomial(coeffs: &[f64], lo: f64, hi: f64) -> Result<Self> {
        Ok(Polynomial::new(coeffs.to_vec(), Interval::new(lo, hi)?)?.into())
    }

    /// Convenience constructor for a piecewise-linear interpolant.
    pub fn piecewise_linear(points: &[(f64, f64)]) -> Result<Self> {
        Ok(PiecewiseLinear::new(points)?.into())
    }

    /// The counterexample on [0, 1] with the default depth cap.
    pub fn counterexample() -> Self {
        Counterexample::default().into()
    }

    pub fn negated(self) -> Self {
        Self::Negation(Box::new(self))
    }

    pub fn reflected(self) -> Self {
        Self::Reflection(Box::new(self))
    }

    pub fn domain(&self) -> Interval {
        match self {
            Self::PiecewiseLinear(f) => f.domain,
            Self::Polynomial(f) => f.domain,
            Self::ScaledPower(f) => f.domain,
            Self::Counterexample(f) => f.domain(),
            Self::Negation(inner) => inner.domain(),
            Self::Reflection(inner) => {
                let d = inner.domain();
                Interval::new_unchecked(-d.hi, -d.lo)
            }
        }
    }

    /// `F(x)`, or a domain error outside the domain.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.domain().contains(x) {
            return Err(Error::Domain(format!(
                "x = {x} outside domain {}",
                self.domain()
            )));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        match self {
            Self::PiecewiseLinear(f) => f.eval(x),
            Self::Polynomial(f) => f.eval(x),
            Self::ScaledPower(f) => f.eval(x),
            Self::Counterexample(f) => f.eval(x),
            Self::Negation(inner) => -inner.eval_unchecked(x),
            Self::Reflection(inner) => inner.eval_unchecked(-x),
        }
    }

    /// The counterexample behind this model, when it is one (unwrapped).
    pub fn as_counterexample(&self) -> Option<&Counterexample> {
        match self {
            Self::Counterexample(f) => Some(f),
            _ => None,
        }
    }

    /// Coefficients of `t ↦ F(x + t)` when `F` is polynomial.
    pub fn local_expansion(&self, x: f64) -> Option<Vec<f64>> {
        match self {
            Self::Polynomial(p) => Some(p.taylor_at(x)),
            Self::Negation(inner) => {
                inner.local_expansion(x).map(|c| c.into_iter().map(|v| -v).collect())
            }
            Self::Reflection(inner) => inner.local_expansion(-x).map(|c| {
                c.into_iter()
                    .enumerate()
                    .map(|(k, v)| if k % 2 == 1 { -v } else { v })
                    .collect()
            }),
            _ => None,
        }
    }

    /// Decomposes `[lo, hi]` (clamped to the domain) into pieces, left to right.
    pub fn pieces(&self, lo: f64, hi: f64) -> Vec<Piece<'_>> {
        let d = self.domain();
        let (lo, hi) = (lo.max(d.lo), hi.min(d.hi));
        if lo >= hi {
            return Vec::new();
        }
        let mut out = Vec::new();
        match self {
            Self::PiecewiseLinear(f) => f.pieces(lo, hi, &mut out),
            Self::Polynomial(_) => out.push(Piece::Smooth { lo, hi }),
            Self::ScaledPower(f) => {
                if lo < f.x0 && f.x0 < hi {
                    out.push(Piece::Smooth { lo, hi: f.x0 });
                    out.push(Piece::Smooth { lo: f.x0, hi });
                } else {
                    out.push(Piece::Smooth { lo, hi });
                }
            }
            Self::Counterexample(f) => out = f.pieces(lo, hi),
            Self::Negation(inner) => {
                out = inner.pieces(lo, hi).into_iter().map(Piece::negated).collect();
            }
            Self::Reflection(inner) => {
                out = inner.pieces(-hi, -lo).into_iter().rev().map(Piece::reflected).collect();
            }
        }
        out
    }

    /// Points in `(lo, hi)` where smoothness may fail. For the counterexample
    /// this lists every resolved gap boundary in the window, so keep windows
    /// small or use [`pieces`](Self::pieces).
    pub fn breakpoints_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut stack: Vec<Piece<'_>> = self.pieces(lo, hi).into_iter().rev().collect();
        while let Some(p) = stack.pop() {
            if let Piece::Block(b) = p {
                stack.extend(b.refine().into_iter().rev());
                continue;
            }
            let (a, b) = p.bounds();
            for x in [a, b] {
                let fresh = out.last().map_or(true, |&l: &f64| x - l > 1e-14 * x.abs().max(1e-300));
                let inside = x > lo && hi - x > 1e-14 * hi.abs().max(1e-300);
                if inside && fresh {
                    out.push(x);
                }
            }
        }
        out
    }
}

/// One piece of a decomposition, in the model's coordinates.
#[derive(Debug, Clone, Copy)]
pub enum Piece<'a> {
    /// `F(y) = intercept + slope * y` on `[lo, hi]`.
    Affine { lo: f64, hi: f64, slope: f64, intercept: f64 },
    /// Smooth on the open interval; evaluate the model directly.
    Smooth { lo: f64, hi: f64 },
    /// A whole interval of the Cantor construction.
    Block(CantorBlock<'a>),
}

impl<'a> Piece<'a> {
    pub(crate) fn zero(lo: f64, hi: f64) -> Self {
        Piece::Affine { lo, hi, slope: 0.0, intercept: 0.0 }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Piece::Affine { lo, hi, .. } | Piece::Smooth { lo, hi } => (lo, hi),
            Piece::Block(b) => b.bounds(),
        }
    }

    /// Restricts to `[lo, hi]`; blocks are only kept when fully inside.
    pub(crate) fn clip(self, lo: f64, hi: f64) -> Option<Self> {
        let (a, b) = self.bounds();
        let (a2, b2) = (a.max(lo), b.min(hi));
        if a2 >= b2 {
            return None;
        }
        match self {
            Piece::Affine { slope, intercept, .. } => {
                Some(Piece::Affine { lo: a2, hi: b2, slope, intercept })
            }
            Piece::Smooth { .. } => Some(Piece::Smooth { lo: a2, hi: b2 }),
            Piece::Block(_) => {
                debug_assert!(a2 == a && b2 == b, "blocks are never clipped");
                Some(self)
            }
        }
    }

    pub(crate) fn negated(self) -> Self {
        match self {
            Piece::Affine { lo, hi, slope, intercept } => {
                Piece::Affine { lo, hi, slope: -slope, intercept: -intercept }
            }
            Piece::Smooth { .. } => self,
            Piece::Block(b) => Piece::Block(b.negated()),
        }
    }

    pub(crate) fn reflected(self) -> Self {
        match self {
            Piece::Affine { lo, hi, slope, intercept } => {
                Piece::Affine { lo: -hi, hi: -lo, slope: -slope, intercept }
            }
            Piece::Smooth { lo, hi } => Piece::Smooth { lo: -hi, hi: -lo },
            Piece::Block(b) => Piece::Block(b.reflected()),
        }
    }
}
