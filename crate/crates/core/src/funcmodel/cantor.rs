//! Exact-rational geometry of the symmetric Cantor-type construction on [0, 1].
//!
//! At level `n` there are `2^n` closed intervals of length `r_n`. From each of
//! them the concentric open gap of length `u_n` is removed, and inside every
//! gap sits the concentric plateau of length `v_n = u_n / 2`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{arg_err, Error, Result};
use crate::funcmodel::Interval;

/// Default number of levels resolved by evaluation.
pub const DEFAULT_DEPTH_CAP: u32 = 60;

/// Levels above this are never listed interval by interval (`2^n` entries).
pub const MAX_LISTED_LEVEL: u32 = 24;

/// Exact rational from an integer pair.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn pow2(n: u32) -> BigInt {
    BigInt::one() << n
}

/// `r_n = (n + 4) / (2^{n+1} (n + 2))`
pub fn standard_level_length(n: u32) -> BigRational {
    let n64 = i64::from(n);
    BigRational::new(BigInt::from(n64 + 4), pow2(n + 1) * BigInt::from(n64 + 2))
}

/// `u_n = 1 / (2^n (n + 2) (n + 3))`
pub fn standard_gap_length(n: u32) -> BigRational {
    let n64 = i64::from(n);
    BigRational::new(
        BigInt::one(),
        pow2(n) * BigInt::from(n64 + 2) * BigInt::from(n64 + 3),
    )
}

/// `v_n = u_n / 2`
pub fn standard_plateau_length(n: u32) -> BigRational {
    standard_gap_length(n) / BigRational::from_integer(BigInt::from(2))
}

/// Formats an exact rational as `p/q` (or `p` for integers).
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p/q`, `p`, or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::Spec(format!("bad numerator in {s:?}")))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| Error::Spec(format!("bad denominator in {s:?}")))?;
        if q.is_zero() {
            return Err(Error::Spec(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Ok(p) = s.parse::<BigInt>() {
        return Ok(BigRational::from_integer(p));
    }
    let x: f64 = s
        .parse()
        .map_err(|_| Error::Spec(format!("not a number: {s:?}")))?;
    BigRational::from_float(x).ok_or_else(|| Error::Spec(format!("non-finite number {s:?}")))
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Closed interval with exact rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RationalInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        Self { lo, hi }
    }

    pub fn length(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn to_interval(&self) -> Interval {
        Interval::new_unchecked(to_f64(&self.lo), to_f64(&self.hi))
    }
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", format_rational(&self.lo), format_rational(&self.hi))
    }
}

impl Serialize for RationalInterval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [format_rational(&self.lo), format_rational(&self.hi)].serialize(s)
    }
}

/// Identifies the gap `u_{n,k}` removed from the `k`-th level-`n` interval
/// (`1 <= k <= 2^n`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct GapAddress {
    pub n: u32,
    pub k: u64,
}

impl GapAddress {
    pub fn new(n: u32, k: u64) -> Self {
        Self { n, k }
    }
}

impl fmt::Display for GapAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n, self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RampSide {
    Left,
    Right,
}

/// Where a point sits relative to the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PointClassification {
    /// No gap of level `< depth` contains the point.
    InPerfectSetUpToDepth { depth: u32 },
    /// Inside the closed plateau `v_{n,k}`.
    OnPlateau { gap: GapAddress },
    /// Inside `u_{n,k}` but outside the closed plateau.
    OnRamp { gap: GapAddress, side: RampSide },
}

/// The three length sequences of a symmetric Cantor-type construction on
/// [0, 1], kept as exact rationals.
#[derive(Clone, Copy)]
pub struct CantorScheme {
    level_len: fn(u32) -> BigRational,
    gap_len: fn(u32) -> BigRational,
    plateau_len: fn(u32) -> BigRational,
    depth_cap: u32,
}

impl fmt::Debug for CantorScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CantorScheme")
            .field("r_1", &format_rational(&self.level_length(1)))
            .field("u_0", &format_rational(&self.gap_length(0)))
            .field("depth_cap", &self.depth_cap)
            .finish()
    }
}

impl Default for CantorScheme {
    fn default() -> Self {
        Self::standard()
    }
}

impl CantorScheme {
    /// The measure-1/2 construction with `r_n = (n+4)/(2^{n+1}(n+2))`.
    pub fn standard() -> Self {
        Self {
            level_len: standard_level_length,
            gap_len: standard_gap_length,
            plateau_len: standard_plateau_length,
            depth_cap: DEFAULT_DEPTH_CAP,
        }
    }

    pub fn with_depth_cap(mut self, depth_cap: u32) -> Self {
        self.depth_cap = depth_cap;
        self
    }

    pub fn depth_cap(&self) -> u32 {
        self.depth_cap
    }

    pub fn level_length(&self, n: u32) -> BigRational {
        (self.level_len)(n)
    }

    pub fn gap_length(&self, n: u32) -> BigRational {
        (self.gap_len)(n)
    }

    pub fn plateau_length(&self, n: u32) -> BigRational {
        (self.plateau_len)(n)
    }

    /// Total length `2^n r_n` of the level-`n` intervals.
    pub fn level_measure(&self, n: u32) -> BigRational {
        BigRational::from_integer(pow2(n)) * self.level_length(n)
    }

    /// Offset of the right child from the left endpoint of its parent at
    /// level `n`: `r_{n+1} + u_n`.
    fn right_child_offset(&self, n: u32) -> BigRational {
        self.level_length(n + 1) + self.gap_length(n)
    }

    fn check_level(&self, n: u32) -> Result<()> {
        if n > self.depth_cap {
            return Err(Error::Resource(format!(
                "level {n} exceeds depth cap {}",
                self.depth_cap
            )));
        }
        Ok(())
    }

    /// Left endpoint of the `k`-th (1-based) level-`n` interval.
    pub fn level_left_endpoint(&self, n: u32, k: u64) -> Result<BigRational> {
        self.check_level(n)?;
        if n >= 64 || k == 0 || k > (1u64 << n) {
            return arg_err(format!("position {k} out of range for level {n}"));
        }
        let path = k - 1;
        let mut lo = BigRational::zero();
        for level in 0..n {
            if (path >> (n - 1 - level)) & 1 == 1 {
                lo += self.right_child_offset(level);
            }
        }
        Ok(lo)
    }

    /// The `2^n` closed level-`n` intervals in increasing order.
    pub fn cantor_level_intervals(&self, n: u32) -> Result<Vec<RationalInterval>> {
        self.check_level(n)?;
        if n > MAX_LISTED_LEVEL {
            return Err(Error::Resource(format!(
                "listing level {n} needs 2^{n} intervals (limit level {MAX_LISTED_LEVEL})"
            )));
        }
        let mut lefts = vec![BigRational::zero()];
        for level in 0..n {
            let offset = self.right_child_offset(level);
            lefts = lefts
                .into_iter()
                .flat_map(|lo| {
                    let right = &lo + &offset;
                    [lo, right]
                })
                .collect();
        }
        let len = self.level_length(n);
        Ok(lefts
            .into_iter()
            .map(|lo| {
                let hi = &lo + &len;
                RationalInterval::new(lo, hi)
            })
            .collect())
    }

    /// The removed gap `u_{n,k}` and its plateau `v_{n,k}`.
    pub fn gap_intervals(&self, addr: GapAddress) -> Result<(RationalInterval, RationalInterval)> {
        let lo = self.level_left_endpoint(addr.n, addr.k)?;
        let center = lo + self.level_length(addr.n) / ratio(2, 1);
        let half_u = self.gap_length(addr.n) / ratio(2, 1);
        let half_v = self.plateau_length(addr.n) / ratio(2, 1);
        let u = RationalInterval::new(&center - &half_u, &center + &half_u);
        let v = RationalInterval::new(&center - &half_v, &center + half_v);
        Ok((u, v))
    }

    /// Exact classification of a double-precision point (converted exactly).
    pub fn classify_point(&self, x: f64, max_depth: u32) -> PointClassification {
        match BigRational::from_float(x) {
            Some(q) => self.classify_rational(&q, max_depth),
            None => PointClassification::InPerfectSetUpToDepth { depth: 0 },
        }
    }

    /// Descends the interval tree until a gap containing `x` is found or
    /// `max_depth` levels have been inspected.
    pub fn classify_rational(&self, x: &BigRational, max_depth: u32) -> PointClassification {
        self.classify_with_center(x, max_depth).0
    }

    /// Same as [`classify_rational`](Self::classify_rational), also returning
    /// the center of the gap that was hit.
    pub(crate) fn classify_with_center(
        &self,
        x: &BigRational,
        max_depth: u32,
    ) -> (PointClassification, Option<BigRational>) {
        let two = ratio(2, 1);
        let mut lo = BigRational::zero();
        let mut k: u64 = 1;
        if x.is_negative() || x > &BigRational::one() {
            return (PointClassification::InPerfectSetUpToDepth { depth: 0 }, None);
        }
        for n in 0..max_depth {
            let center = &lo + self.level_length(n) / &two;
            let dist = x - &center;
            let abs = dist.abs();
            let half_u = self.gap_length(n) / &two;
            if abs < half_u {
                let gap = GapAddress::new(n, k);
                let half_v = self.plateau_length(n) / &two;
                let class = if abs <= half_v {
                    PointClassification::OnPlateau { gap }
                } else if dist.is_negative() {
                    PointClassification::OnRamp { gap, side: RampSide::Left }
                } else {
                    PointClassification::OnRamp { gap, side: RampSide::Right }
                };
                return (class, Some(center));
            }
            if n >= 63 {
                break;
            }
            k = 2 * k - 1;
            if dist.is_positive() {
                lo += self.right_child_offset(n);
                k += 1;
            }
        }
        (PointClassification::InPerfectSetUpToDepth { depth: max_depth }, None)
    }
}
