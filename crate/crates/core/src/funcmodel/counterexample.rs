//! The continuous Cantor-type function that vanishes on the perfect set and
//! carries the value `(-1)^n / n` on every level-`n` plateau.
//!
//! Geometry lives in [`CantorScheme`] as exact rationals; this module keeps
//! double-precision copies of the length tables for evaluation and integration.
//! Points closer to a piece boundary than the accumulated rounding error are
//! re-classified exactly.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::funcmodel::cantor::{ratio, to_f64, CantorScheme, PointClassification, DEFAULT_DEPTH_CAP};
use crate::funcmodel::{Interval, Piece};

/// Deepest supported evaluation level (gap positions are addressed by `u64`).
pub const MAX_DEPTH: u32 = 62;

/// Unevaluated sum `hi + lo` of two doubles.
type DoubleDouble = (f64, f64);

fn two_sum(a: f64, b: f64) -> DoubleDouble {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn dd_add(a: DoubleDouble, b: DoubleDouble) -> DoubleDouble {
    let (s, e) = two_sum(a.0, b.0);
    two_sum(s, e + a.1 + b.1)
}

fn dd_from(q: &BigRational) -> DoubleDouble {
    let hi = to_f64(q);
    let rest = q - BigRational::from_float(hi).expect("finite table entry");
    (hi, to_f64(&rest))
}

/// `x - c` for a double `x` and a double-double `c`.
fn dd_diff(x: f64, c: DoubleDouble) -> f64 {
    let (s, e) = two_sum(x, -c.0);
    s + (e - c.1)
}

/// Double-double geometry used by the fast evaluation path.
#[derive(Debug)]
struct FineTables {
    half_r: Vec<DoubleDouble>,
    half_u: Vec<DoubleDouble>,
    half_v: Vec<DoubleDouble>,
    /// offset of the right child from its parent's left endpoint
    step: Vec<DoubleDouble>,
    /// ramp length `(u - v) / 2`
    ramp: Vec<f64>,
}

#[derive(Debug)]
struct Tables {
    fine: FineTables,
    r: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    value: Vec<f64>,
    /// `2^(depth - n) r_depth`: measure left at the resolution limit inside a
    /// level-`n` interval.
    residual: Vec<f64>,
}

/// Value on the level-`n` plateau. Level 0 reuses the level-1 value `-1`.
pub fn plateau_value(n: u32) -> f64 {
    if n == 0 {
        -1.0
    } else if n % 2 == 0 {
        1.0 / f64::from(n)
    } else {
        -1.0 / f64::from(n)
    }
}

/// Exact plateau value.
pub fn plateau_value_exact(n: u32) -> BigRational {
    if n == 0 {
        ratio(-1, 1)
    } else if n % 2 == 0 {
        ratio(1, i64::from(n))
    } else {
        ratio(-1, i64::from(n))
    }
}

/// The counterexample function on [0, 1], extended by zero to a wider domain
/// when requested.
#[derive(Debug, Clone)]
pub struct Counterexample {
    scheme: CantorScheme,
    depth: u32,
    domain: Interval,
    tables: Arc<Tables>,
}

impl Default for Counterexample {
    fn default() -> Self {
        Self::new(DEFAULT_DEPTH_CAP).expect("default depth is valid")
    }
}

impl Counterexample {
    /// Gaps of levels `0..depth` are resolved; deeper structure evaluates to 0,
    /// which is off by at most `1/depth`.
    pub fn new(depth: u32) -> Result<Self> {
        if depth == 0 || depth > MAX_DEPTH {
            return Err(Error::Argument(format!(
                "depth cap must be in 1..={MAX_DEPTH}, got {depth}"
            )));
        }
        let scheme = CantorScheme::standard().with_depth_cap(depth);
        let levels = depth as usize + 2;
        let mut tables = Tables {
            fine: FineTables {
                half_r: Vec::with_capacity(levels),
                half_u: Vec::with_capacity(levels),
                half_v: Vec::with_capacity(levels),
                step: Vec::with_capacity(levels),
                ramp: Vec::with_capacity(levels),
            },
            r: Vec::with_capacity(levels),
            u: Vec::with_capacity(levels),
            v: Vec::with_capacity(levels),
            value: Vec::with_capacity(levels),
            residual: vec![0.0; levels],
        };
        for n in 0..levels as u32 {
            tables.r.push(to_f64(&scheme.level_length(n)));
            tables.u.push(to_f64(&scheme.gap_length(n)));
            tables.v.push(to_f64(&scheme.plateau_length(n)));
            tables.value.push(plateau_value(n));
            let half = ratio(1, 2);
            let (r, u, v) = (scheme.level_length(n), scheme.gap_length(n), scheme.plateau_length(n));
            let fine = &mut tables.fine;
            fine.half_r.push(dd_from(&(&r * &half)));
            fine.half_u.push(dd_from(&(&u * &half)));
            fine.half_v.push(dd_from(&(&v * &half)));
            fine.step.push(dd_from(&(scheme.level_length(n + 1) + &u)));
            fine.ramp.push(to_f64(&((u - v) * half)));
        }
        let r_depth = scheme.level_length(depth);
        for n in 0..=depth {
            let count = BigRational::from_integer(BigInt::from(1u8) << (depth - n));
            tables.residual[n as usize] = to_f64(&(count * &r_depth));
        }
        Ok(Self {
            scheme,
            depth,
            domain: Interval::new_unchecked(0.0, 1.0),
            tables: Arc::new(tables),
        })
    }

    /// Same function on a domain containing [0, 1], zero outside [0, 1].
    pub fn with_domain(mut self, domain: Interval) -> Result<Self> {
        if domain.lo() > 0.0 || domain.hi() < 1.0 {
            return Err(Error::Argument(format!(
                "counterexample domain {domain} must contain [0, 1]"
            )));
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn scheme(&self) -> &CantorScheme {
        &self.scheme
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// Bound on `|F(x) - 0|` for points whose descent finds no gap.
    pub fn truncation_bound(&self) -> f64 {
        1.0 / f64::from(self.depth)
    }

    pub fn level_length(&self, n: u32) -> f64 {
        self.tables.r[n as usize]
    }

    pub fn gap_length(&self, n: u32) -> f64 {
        self.tables.u[n as usize]
    }

    pub fn plateau_length(&self, n: u32) -> f64 {
        self.tables.v[n as usize]
    }

    /// Evaluates `F(x)`; zero outside [0, 1].
    pub fn eval(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        let t = &*self.tables;
        let fine = &t.fine;
        let mut lo: DoubleDouble = (0.0, 0.0);
        for m in 0..self.depth as usize {
            let d = dd_diff(x, dd_add(lo, fine.half_r[m]));
            let a = d.abs();
            let to_gap = dd_diff(a, fine.half_u[m]);
            let to_plateau = dd_diff(a, fine.half_v[m]);
            let margin = 8.0 * f64::EPSILON * a + f64::MIN_POSITIVE;
            if to_gap.abs() <= margin || to_plateau.abs() <= margin {
                return self.eval_exact(x);
            }
            if to_gap < 0.0 {
                let w = t.value[m];
                if to_plateau < 0.0 {
                    return w;
                }
                return w * (-to_gap / fine.ramp[m]);
            }
            if d > 0.0 {
                lo = dd_add(lo, fine.step[m]);
            }
        }
        0.0
    }

    /// Evaluation through exact rational classification.
    pub fn eval_exact(&self, x: f64) -> f64 {
        let Some(xq) = BigRational::from_float(x) else {
            return f64::NAN;
        };
        let (class, center) = self.scheme.classify_with_center(&xq, self.depth);
        let (gap, center) = match (class, center) {
            (PointClassification::InPerfectSetUpToDepth { .. }, _) | (_, None) => return 0.0,
            (PointClassification::OnPlateau { gap }, Some(c))
            | (PointClassification::OnRamp { gap, .. }, Some(c)) => (gap, c),
        };
        let w = plateau_value_exact(gap.n);
        if let PointClassification::OnPlateau { .. } = class {
            return to_f64(&w);
        }
        let two = ratio(2, 1);
        let hu = self.scheme.gap_length(gap.n) / &two;
        let hv = self.scheme.plateau_length(gap.n) / &two;
        let a = (xq - center).abs();
        to_f64(&(w * (&hu - a) / (hu - hv)))
    }

    /// Classification used by [`eval`](Self::eval), exposed for samplers.
    pub fn classify(&self, x: f64) -> PointClassification {
        self.scheme.classify_point(x, self.depth)
    }

    /// The double nearest to `x`, within `max_steps` ulps, in `[0, 1]` and
    /// outside every resolved gap (where `F` vanishes).
    pub fn snap_to_perfect_set(&self, x: f64, max_steps: u32) -> Option<f64> {
        let in_set = |y: f64| (0.0..=1.0).contains(&y) && self.eval(y) == 0.0;
        if in_set(x) {
            return Some(x);
        }
        let (mut up, mut down) = (x, x);
        for _ in 0..max_steps {
            up = up.next_up();
            down = down.next_down();
            if in_set(up) {
                return Some(up);
            }
            if in_set(down) {
                return Some(down);
            }
        }
        None
    }

    /// Centres of the gaps of the level intervals containing `x`, one per
    /// level below `max_level` (and the depth), stopping at the first gap that
    /// contains `x`.
    pub fn gap_centers_around(&self, x: f64, max_level: u32) -> Vec<(u32, f64)> {
        let t = &*self.tables;
        let mut out = Vec::new();
        if !(0.0..=1.0).contains(&x) {
            return out;
        }
        let mut lo = 0.0;
        for n in 0..max_level.min(self.depth) {
            let m = n as usize;
            let center = lo + 0.5 * t.r[m];
            out.push((n, center));
            let hu = 0.5 * t.u[m];
            if x <= center - hu {
                continue;
            } else if x >= center + hu {
                lo = self.right_child_lo(n, lo);
            } else {
                break;
            }
        }
        out
    }

    /// Ramp and plateau pieces of the gap in the level-`level` interval whose
    /// left endpoint is `node_lo`.
    fn gap_pieces(&self, level: u32, node_lo: f64) -> [Piece<'static>; 3] {
        let t = &*self.tables;
        let m = level as usize;
        let center = node_lo + 0.5 * t.r[m];
        let hu = 0.5 * t.u[m];
        let hv = 0.5 * t.v[m];
        let w = t.value[m];
        let slope = w / (hu - hv);
        [
            Piece::Affine {
                lo: center - hu,
                hi: center - hv,
                slope,
                intercept: -slope * (center - hu),
            },
            Piece::Affine { lo: center - hv, hi: center + hv, slope: 0.0, intercept: w },
            Piece::Affine {
                lo: center + hv,
                hi: center + hu,
                slope: -slope,
                intercept: slope * (center + hu),
            },
        ]
    }

    fn right_child_lo(&self, level: u32, node_lo: f64) -> f64 {
        node_lo + self.tables.r[level as usize + 1] + self.tables.u[level as usize]
    }

    /// Decomposes `[lo, hi]` into affine pieces and whole level intervals.
    pub(crate) fn pieces(&self, lo: f64, hi: f64) -> Vec<Piece<'_>> {
        let mut out = Vec::new();
        if lo < 0.0 {
            push_clipped(&mut out, Piece::zero(lo, 0.0), lo, hi);
        }
        self.descend(0, 0.0, lo, hi, &mut out);
        if hi > 1.0 {
            push_clipped(&mut out, Piece::zero(1.0, hi), lo, hi);
        }
        out
    }

    fn descend<'a>(&'a self, level: u32, node_lo: f64, lo: f64, hi: f64, out: &mut Vec<Piece<'a>>) {
        let node_hi = node_lo + self.tables.r[level as usize];
        if node_hi <= lo || node_lo >= hi {
            return;
        }
        if level >= self.depth {
            push_clipped(out, Piece::zero(node_lo, node_hi), lo, hi);
            return;
        }
        if lo <= node_lo && node_hi <= hi {
            out.push(Piece::Block(CantorBlock {
                model: self,
                level,
                inner_lo: node_lo,
                sign: 1.0,
                rho: 1.0,
            }));
            return;
        }
        self.descend(level + 1, node_lo, lo, hi, out);
        for piece in self.gap_pieces(level, node_lo) {
            push_clipped(out, piece, lo, hi);
        }
        self.descend(level + 1, self.right_child_lo(level, node_lo), lo, hi, out);
    }
}

fn push_clipped<'a>(out: &mut Vec<Piece<'a>>, piece: Piece<'a>, lo: f64, hi: f64) {
    if let Some(p) = piece.clip(lo, hi) {
        out.push(p);
    }
}

/// A whole level-`n` interval of the construction, possibly seen through
/// negation/reflection wrappers: `F_out(y) = sign * F(rho * y)`.
#[derive(Debug, Clone, Copy)]
pub struct CantorBlock<'a> {
    model: &'a Counterexample,
    level: u32,
    inner_lo: f64,
    sign: f64,
    rho: f64,
}

impl<'a> CantorBlock<'a> {
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Bounds in outer coordinates.
    pub fn bounds(&self) -> (f64, f64) {
        let inner_hi = self.inner_lo + self.model.tables.r[self.level as usize];
        if self.rho > 0.0 {
            (self.inner_lo, inner_hi)
        } else {
            (-inner_hi, -self.inner_lo)
        }
    }

    /// The function vanishes at both endpoints and is at most this large
    /// in absolute value inside the block.
    pub fn sup_abs(&self) -> f64 {
        if self.level >= self.model.depth {
            0.0
        } else {
            self.model.tables.value[self.level as usize].abs()
        }
    }

    /// Measure of the part of the block where the function can be nonzero.
    pub fn gap_measure(&self) -> f64 {
        let t = &*self.model.tables;
        let m = self.level as usize;
        if self.level >= self.model.depth {
            0.0
        } else {
            (t.r[m] - t.residual[m]).max(0.0)
        }
    }

    /// `∫ |F|^r` over the block, summed level by level down to the depth cap.
    pub fn abs_power_integral(&self, r: f64) -> f64 {
        let t = &*self.model.tables;
        let mut total = 0.0;
        let mut count = 1.0;
        for j in self.level..self.model.depth {
            let j = j as usize;
            let g = t.value[j].abs().powf(r) * (t.v[j] + (t.u[j] - t.v[j]) / (r + 1.0));
            total += count * g;
            count *= 2.0;
        }
        total
    }

    /// `(∫ [F]_+^r, ∫ [F]_-^r)` over the block.
    pub fn signed_power_integrals(&self, r: f64) -> (f64, f64) {
        let t = &*self.model.tables;
        let (mut pos, mut neg) = (0.0, 0.0);
        let mut count = 1.0;
        for j in self.level..self.model.depth {
            let j = j as usize;
            let w = self.sign * t.value[j];
            let g = count * w.abs().powf(r) * (t.v[j] + (t.u[j] - t.v[j]) / (r + 1.0));
            if w > 0.0 {
                pos += g;
            } else {
                neg += g;
            }
            count *= 2.0;
        }
        (pos, neg)
    }

    /// Per-level gap data `(count, gap length, plateau length, signed plateau value)`
    /// from the block's own level down to the depth cap.
    pub fn level_gaps(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        let t = &*self.model.tables;
        (self.level..self.model.depth).map(move |j| {
            let count = 2f64.powi((j - self.level) as i32);
            let j = j as usize;
            (count, t.u[j], t.v[j], self.sign * t.value[j])
        })
    }

    /// `∫ F` over the block.
    pub fn signed_integral(&self) -> f64 {
        let t = &*self.model.tables;
        let mut total = 0.0;
        let mut count = 1.0;
        for j in self.level..self.model.depth {
            let j = j as usize;
            total += count * t.value[j] * 0.5 * (t.u[j] + t.v[j]);
            count *= 2.0;
        }
        self.sign * total
    }

    /// Splits the block into its gap pieces and two child blocks.
    pub fn refine(&self) -> Vec<Piece<'a>> {
        let model = self.model;
        if self.level >= model.depth {
            let (lo, hi) = self.bounds();
            return vec![Piece::zero(lo, hi)];
        }
        let child = |inner_lo| CantorBlock {
            model,
            level: self.level + 1,
            inner_lo,
            sign: self.sign,
            rho: self.rho,
        };
        let mut inner = Vec::with_capacity(5);
        inner.push(Piece::Block(child(self.inner_lo)));
        inner.extend(model.gap_pieces(self.level, self.inner_lo));
        inner.push(Piece::Block(child(model.right_child_lo(self.level, self.inner_lo))));
        let mut out: Vec<Piece<'a>> = inner
            .into_iter()
            .map(|p| {
                let p = if self.rho < 0.0 { p.reflected() } else { p };
                if self.sign < 0.0 {
                    p.negated()
                } else {
                    p
                }
            })
            .collect();
        if self.rho < 0.0 {
            out.reverse();
        }
        out
    }

    pub(crate) fn negated(mut self) -> Self {
        self.sign = -self.sign;
        self
    }

    pub(crate) fn reflected(mut self) -> Self {
        self.rho = -self.rho;
        self
    }

    /// Evaluates the block's function in outer coordinates.
    pub fn eval(&self, y: f64) -> f64 {
        self.sign * self.model.eval(self.rho * y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::cantor::GapAddress;

    #[test]
    fn value_examples() {
        let f = Counterexample::default();
        assert_eq!(f.eval(0.5), -1.0);
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(1.0), 0.0);
        // center of u_{1,1} = 5/24, level-1 plateau value -1
        assert_eq!(f.eval(5.0 / 24.0), -1.0);
        // center of the level-2 gap inside [0, r_2]: value +1/2
        let r2 = f.level_length(2);
        assert!((f.eval(r2 / 2.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ramp_is_linear_between_gap_and_plateau() {
        let f = Counterexample::default();
        // level-0 left ramp runs over [5/12, 11/24]
        let a = 5.0 / 12.0;
        let b = 11.0 / 24.0;
        for i in 0..=10 {
            let x = a + (b - a) * f64::from(i) / 10.0;
            let expected = -(x - a) / (b - a);
            assert!((f.eval(x) - expected).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn fast_and_exact_paths_agree() {
        let f = Counterexample::default();
        let mut x = 0.000_123_456_7;
        while x < 1.0 {
            let fast = f.eval(x);
            let exact = f.eval_exact(x);
            assert!((fast - exact).abs() < 1e-14, "x = {x}: {fast} vs {exact}");
            x += 0.000_731_3;
        }
    }

    #[test]
    fn gap_endpoints_evaluate_to_zero() {
        let f = Counterexample::default();
        let s = f.scheme();
        for n in 0..6u32 {
            for k in 1..=(1u64 << n) {
                let (u, _) = s.gap_intervals(GapAddress::new(n, k)).unwrap();
                let lo = to_f64(&u.lo);
                // nearest double may land just inside the ramp
                assert!(f.eval(lo).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pieces_cover_window_and_match_eval() {
        let f = Counterexample::new(20).unwrap();
        let (lo, hi) = (0.1, 0.83);
        let pieces = f.pieces(lo, hi);
        let mut cursor = lo;
        for p in &pieces {
            let (a, b) = p.bounds();
            assert!((a - cursor).abs() < 1e-15, "gap at {cursor} vs {a}");
            cursor = b;
            if let Piece::Affine { slope, intercept, .. } = *p {
                let mid = 0.5 * (a + b);
                assert!((intercept + slope * mid - f.eval(mid)).abs() < 1e-9);
            }
        }
        assert!((cursor - hi).abs() < 1e-15);
    }

    #[test]
    fn block_integral_matches_refinement() {
        let f = Counterexample::new(30).unwrap();
        let root = match f.pieces(0.0, 1.0).as_slice() {
            [Piece::Block(b)] => *b,
            other => panic!("expected one block, got {other:?}"),
        };
        // ∫|F| over [0, 1] at level 0 = 1/8 + 2 ∫ over a level-1 block
        let total = root.abs_power_integral(1.0);
        let parts = root.refine();
        let mut sum = 0.0;
        for p in &parts {
            match p {
                Piece::Block(b) => sum += b.abs_power_integral(1.0),
                Piece::Affine { lo, hi, slope, intercept } => {
                    // |affine| does not change sign on a ramp or plateau
                    let a = intercept + slope * lo;
                    let b = intercept + slope * hi;
                    sum += 0.5 * (a.abs() + b.abs()) * (hi - lo);
                }
                Piece::Smooth { .. } => unreachable!(),
            }
        }
        assert!((total - sum).abs() < 1e-15);
        assert!(total > 0.125);
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(Counterexample::new(0).is_err());
        assert!(Counterexample::new(MAX_DEPTH + 1).is_err());
        let narrow = Interval::new(0.0, 0.5).unwrap();
        assert!(Counterexample::default().with_domain(narrow).is_err());
    }

    #[test]
    fn zero_outside_unit_interval() {
        let wide = Interval::new(-1.0, 2.0).unwrap();
        let f = Counterexample::default().with_domain(wide).unwrap();
        assert_eq!(f.eval(-0.5), 0.0);
        assert_eq!(f.eval(1.5), 0.0);
    }

    #[test]
    fn signs_alternate_by_level() {
        assert!(plateau_value(1) < 0.0);
        assert!(plateau_value(2) > 0.0);
        assert_eq!(plateau_value_exact(4), ratio(1, 4));
        assert!(plateau_value_exact(3).is_negative());
    }
}
