//! Gauges, tagged partitions and the Riemann-type L^r sums built on them.
//!
//! A tagged interval `([c, d], x)` is fine for a gauge `δ` when
//! `[c, d] ⊂ (x - δ(x), x + δ(x))`, with strict inclusion.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};
use crate::funcmodel::{FunctionModel, Interval};
use crate::quadrature::{adaptive_lr_integral_with, IntegrandSpec, Part, QuadratureConfig};

/// Serializable gauge description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GaugeSpec {
    Constant { value: f64 },
    PiecewiseConstant { breakpoints: Vec<f64>, values: Vec<f64> },
}

#[derive(Clone)]
enum Rule {
    Constant(f64),
    /// `values[i]` on `(breakpoints[i - 1], breakpoints[i])`; at a breakpoint
    /// the smaller neighbour.
    Piecewise { breakpoints: Vec<f64>, values: Vec<f64> },
    Pointwise { label: String, func: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

#[derive(Debug, Clone, PartialEq)]
enum Support {
    Everywhere,
    Interval(Interval),
    /// Sorted, deduplicated.
    Points(Vec<f64>),
}

/// A strictly positive function on the real line or on a subset of it.
#[derive(Clone)]
pub struct Gauge {
    rule: Rule,
    support: Support,
}

fn check_positive(v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return arg_err(format!("gauge values must be positive and finite, got {v}"));
    }
    Ok(())
}

impl Gauge {
    pub fn constant(value: f64) -> Result<Self> {
        check_positive(value)?;
        Ok(Self { rule: Rule::Constant(value), support: Support::Everywhere })
    }

    /// `values.len()` must be `breakpoints.len() + 1`.
    pub fn piecewise_constant(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return arg_err(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            ));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return arg_err("breakpoints must be finite and strictly increasing");
        }
        for &v in &values {
            check_positive(v)?;
        }
        Ok(Self { rule: Rule::Piecewise { breakpoints, values }, support: Support::Everywhere })
    }

    /// A gauge given by a closure; non-positive or non-finite outputs count
    /// as undefined.
    pub fn pointwise(
        label: impl Into<String>,
        func: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            rule: Rule::Pointwise { label: label.into(), func: Arc::new(func) },
            support: Support::Everywhere,
        }
    }

    pub fn restricted_to(mut self, interval: Interval) -> Self {
        self.support = Support::Interval(interval);
        self
    }

    pub fn on_points(mut self, points: &[f64]) -> Self {
        let mut pts: Vec<f64> = points.iter().copied().filter(|p| p.is_finite()).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        self.support = Support::Points(pts);
        self
    }

    fn in_support(&self, x: f64) -> bool {
        match &self.support {
            Support::Everywhere => x.is_finite(),
            Support::Interval(i) => i.contains(x),
            Support::Points(p) => p.binary_search_by(|q| q.total_cmp(&x)).is_ok(),
        }
    }

    /// `δ(x)`, or `None` where the gauge is undefined.
    pub fn value(&self, x: f64) -> Option<f64> {
        if !self.in_support(x) {
            return None;
        }
        let v = match &self.rule {
            Rule::Constant(v) => *v,
            Rule::Piecewise { breakpoints, values } => {
                let i = breakpoints.partition_point(|&b| b < x);
                if breakpoints.get(i) == Some(&x) {
                    values[i].min(values[i + 1])
                } else {
                    values[i]
                }
            }
            Rule::Pointwise { func, .. } => func(x),
        };
        (v.is_finite() && v > 0.0).then_some(v)
    }

    /// `δ(x)`, failing where the gauge is undefined.
    pub fn at(&self, x: f64) -> Result<f64> {
        self.value(x).ok_or_else(|| Error::Argument(format!("gauge undefined at {x}")))
    }

    pub fn spec(&self) -> Option<GaugeSpec> {
        if self.support != Support::Everywhere {
            return None;
        }
        match &self.rule {
            Rule::Constant(value) => Some(GaugeSpec::Constant { value: *value }),
            Rule::Piecewise { breakpoints, values } => Some(GaugeSpec::PiecewiseConstant {
                breakpoints: breakpoints.clone(),
                values: values.clone(),
            }),
            Rule::Pointwise { .. } => None,
        }
    }

    /// Accepts a bare positive number (constant gauge) or a [`GaugeSpec`].
    pub fn from_json(text: &str) -> Result<Self> {
        let spec_err = |e: String| Error::Spec(e);
        if let Ok(v) = text.trim().parse::<f64>() {
            return Gauge::constant(v).map_err(|e| spec_err(e.to_string()));
        }
        let spec: GaugeSpec = serde_json::from_str(text).map_err(|e| spec_err(e.to_string()))?;
        Gauge::try_from(spec).map_err(|e| spec_err(e.to_string()))
    }

    pub fn describe(&self) -> String {
        let rule = match &self.rule {
            Rule::Constant(v) => format!("constant {v}"),
            Rule::Piecewise { breakpoints, values } => {
                format!("piecewise-constant breakpoints {breakpoints:?} values {values:?}")
            }
            Rule::Pointwise { label, .. } => format!("pointwise {label}"),
        };
        match &self.support {
            Support::Everywhere => rule,
            Support::Interval(i) => format!("{rule} on {i}"),
            Support::Points(p) => format!("{rule} on {} points", p.len()),
        }
    }
}

impl TryFrom<GaugeSpec> for Gauge {
    type Error = Error;

    fn try_from(spec: GaugeSpec) -> Result<Self> {
        match spec {
            GaugeSpec::Constant { value } => Gauge::constant(value),
            GaugeSpec::PiecewiseConstant { breakpoints, values } => {
                Gauge::piecewise_constant(breakpoints, values)
            }
        }
    }
}

impl fmt::Debug for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gauge({})", self.describe())
    }
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct RawTagged {
    lo: f64,
    hi: f64,
    tag: f64,
}

/// An interval with a tag inside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTagged", into = "RawTagged")]
pub struct TaggedInterval {
    interval: Interval,
    tag: f64,
}

impl TaggedInterval {
    pub fn new(interval: Interval, tag: f64) -> Result<Self> {
        if !interval.contains(tag) {
            return arg_err(format!("tag {tag} outside {interval}"));
        }
        Ok(Self { interval, tag })
    }

    pub fn from_bounds(lo: f64, hi: f64, tag: f64) -> Result<Self> {
        Self::new(Interval::new(lo, hi)?, tag)
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn lo(&self) -> f64 {
        self.interval.lo()
    }

    pub fn hi(&self) -> f64 {
        self.interval.hi()
    }

    pub fn tag(&self) -> f64 {
        self.tag
    }

    pub fn length(&self) -> f64 {
        self.interval.length()
    }

    /// Strict inclusion in `(tag - δ(tag), tag + δ(tag))`.
    pub fn is_fine(&self, gauge: &Gauge) -> Result<bool> {
        let d = gauge.at(self.tag)?;
        Ok(self.tag - d < self.lo() && self.hi() < self.tag + d)
    }
}

impl TryFrom<RawTagged> for TaggedInterval {
    type Error = Error;

    fn try_from(raw: RawTagged) -> Result<Self> {
        TaggedInterval::from_bounds(raw.lo, raw.hi, raw.tag)
    }
}

impl From<TaggedInterval> for RawTagged {
    fn from(t: TaggedInterval) -> Self {
        RawTagged { lo: t.lo(), hi: t.hi(), tag: t.tag }
    }
}

fn canonical_order(a: &TaggedInterval, b: &TaggedInterval) -> std::cmp::Ordering {
    a.lo()
        .total_cmp(&b.lo())
        .then(a.hi().total_cmp(&b.hi()))
        .then(a.tag.total_cmp(&b.tag))
}

/// True when no two intervals share interior points.
pub fn items_nonoverlapping(items: &[TaggedInterval]) -> bool {
    let mut sorted = items.to_vec();
    sorted.sort_by(canonical_order);
    sorted.windows(2).all(|w| w[0].hi() <= w[1].lo())
}

/// True when the sorted intervals abut exactly and cover `domain`.
pub fn items_tile(items: &[TaggedInterval], domain: Interval) -> bool {
    let mut sorted = items.to_vec();
    sorted.sort_by(canonical_order);
    match (sorted.first(), sorted.last()) {
        (Some(first), Some(last)) => {
            first.lo() == domain.lo()
                && last.hi() == domain.hi()
                && sorted.windows(2).all(|w| w[0].hi() == w[1].lo())
        }
        _ => false,
    }
}

/// A finite collection of nonoverlapping tagged intervals, kept sorted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<TaggedInterval>", into = "Vec<TaggedInterval>")]
pub struct TaggedPartition {
    items: Vec<TaggedInterval>,
}

impl TaggedPartition {
    pub fn new(mut items: Vec<TaggedInterval>) -> Result<Self> {
        items.sort_by(canonical_order);
        if let Some(w) = items.windows(2).find(|w| w[0].hi() > w[1].lo()) {
            return arg_err(format!("{} and {} overlap", w[0].interval(), w[1].interval()));
        }
        Ok(Self { items })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn items(&self) -> &[TaggedInterval] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// `Σ (d_i - c_i)`.
    pub fn total_length(&self) -> f64 {
        self.items.iter().fold(0.0, |acc, i| acc + i.length())
    }

    /// Longest interval length.
    pub fn mesh(&self) -> f64 {
        self.items.iter().map(TaggedInterval::length).fold(0.0, f64::max)
    }

    pub fn tiles(&self, domain: Interval) -> bool {
        items_tile(&self.items, domain)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("partitions always serialize")
    }
}

impl TryFrom<Vec<TaggedInterval>> for TaggedPartition {
    type Error = Error;

    fn try_from(items: Vec<TaggedInterval>) -> Result<Self> {
        TaggedPartition::new(items)
    }
}

impl From<TaggedPartition> for Vec<TaggedInterval> {
    fn from(p: TaggedPartition) -> Self {
        p.items
    }
}

/// True when every item is fine for `gauge`.
pub fn is_fine(p: &TaggedPartition, gauge: &Gauge) -> Result<bool> {
    for item in p.items() {
        if !item.is_fine(gauge)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Default bisection depth for [`cousin_partition`].
pub const DEFAULT_MAX_DEPTH: u32 = 40;

/// Fine partition of `domain` by repeated bisection, tagging each interval
/// at its midpoint.
pub fn cousin_partition(domain: Interval, gauge: &Gauge, max_depth: u32) -> Result<TaggedPartition> {
    if max_depth < 1 {
        return arg_err("max_depth must be at least 1");
    }
    let mut items = Vec::new();
    // depth-first, right child pushed first so items come out left to right
    let mut stack = vec![(domain.lo(), domain.hi(), 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let mid = lo + 0.5 * (hi - lo);
        let item = TaggedInterval::from_bounds(lo, hi, mid)?;
        if item.is_fine(gauge)? {
            items.push(item);
            continue;
        }
        if depth >= max_depth || !(lo < mid && mid < hi) {
            return Err(Error::Resource(format!(
                "gauge {} too small at [{lo}, {hi}] for bisection depth {max_depth}",
                gauge.at(mid)?
            )));
        }
        stack.push((mid, hi, depth + 1));
        stack.push((lo, mid, depth + 1));
    }
    Ok(TaggedPartition { items })
}

/// `((1/(d - c)) ∫_c^d |F(y) - F(x) - slope (y - x)|^r dy)^{1/r}` for one
/// tagged interval.
pub fn lr_term(f: &FunctionModel, item: &TaggedInterval, slope: f64, r: f64) -> Result<f64> {
    lr_term_with(f, item, slope, r, &QuadratureConfig::with_tol(1e-13 * item.length()))
}

/// [`lr_term`] with an explicit quadrature configuration.
pub fn lr_term_with(
    f: &FunctionModel,
    item: &TaggedInterval,
    slope: f64,
    r: f64,
    config: &QuadratureConfig,
) -> Result<f64> {
    let domain = f.domain();
    if !domain.contains_interval(&item.interval()) {
        return Err(Error::Domain(format!("{} escapes domain {domain}", item.interval())));
    }
    let len = item.length();
    let spec = IntegrandSpec::new(item.tag(), slope, r, Part::Abs);
    let raw = adaptive_lr_integral_with(f, item.interval(), spec, config)?;
    Ok((raw.value.max(0.0) / len).powf(1.0 / r))
}

fn sum_terms(
    p: &TaggedPartition,
    big_f: &FunctionModel,
    slope_at: impl Fn(f64) -> Result<f64> + Sync,
    r: f64,
) -> Result<f64> {
    let terms = p
        .items()
        .par_iter()
        .map(|item| lr_term(big_f, item, slope_at(item.tag())?, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(terms.iter().fold(0.0, |acc, t| acc + t))
}

/// `Σ_i ((1/(d_i - c_i)) ∫ |F(y) - F(x_i) - f(x_i)(y - x_i)|^r dy)^{1/r}`.
pub fn riemann_lr_sum(
    p: &TaggedPartition,
    big_f: &FunctionModel,
    f: &FunctionModel,
    r: f64,
) -> Result<f64> {
    sum_terms(p, big_f, |x| f.eval(x), r)
}

/// `Σ_i ((1/(d_i - c_i)) ∫ |F(y) - F(x_i)|^r dy)^{1/r}`.
pub fn ac_sum(p: &TaggedPartition, big_f: &FunctionModel, r: f64) -> Result<f64> {
    sum_terms(p, big_f, |_| Ok(0.0), r)
}

/// Options for [`adversarial_small_partition`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackConfig {
    /// Maximum number of candidate intervals scored.
    pub budget: usize,
    pub seed: u64,
    /// Interval lengths tried below the gauge: `δ 4^{-k}` for `k < ladder`.
    pub ladder: u32,
    /// Deepest construction level used for the counterexample shapes.
    pub max_level: u32,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self { budget: 10_000, seed: 0x5eed, ladder: 7, max_level: 40 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    item: TaggedInterval,
    term: f64,
}

fn shapes_at(
    x: f64,
    delta: f64,
    eta: f64,
    f: &FunctionModel,
    gauge: &Gauge,
    cfg: &AttackConfig,
) -> Vec<TaggedInterval> {
    let domain = f.domain();
    let limit = delta.min(eta) * (1.0 - 1e-12);
    let mut out = Vec::new();
    let mut push = |lo: f64, hi: f64| {
        if let Ok(item) = TaggedInterval::from_bounds(lo, hi, x) {
            if domain.contains_interval(&item.interval())
                && item.length() < eta
                && item.is_fine(gauge).unwrap_or(false)
            {
                out.push(item);
            }
        }
    };
    let mut s = limit;
    for _ in 0..cfg.ladder {
        push(x, x + s);
        push(x - s, x);
        push(x - 0.5 * s, x + 0.5 * s);
        s *= 0.25;
    }
    // from the tag to the centre of a nearby gap
    if let Some(c) = f.as_counterexample() {
        for (_, center) in c.gap_centers_around(x, cfg.max_level) {
            let d = (center - x).abs();
            if d > 0.0 && d < limit {
                push(x.min(center), x.max(center));
            }
        }
    }
    out
}

/// `taken` is sorted and disjoint, so only the last interval starting
/// before `hi` can reach past `lo`.
fn overlaps_any(taken: &[(f64, f64)], lo: f64, hi: f64) -> bool {
    let i = taken.partition_point(|&(a, _)| a < hi);
    i > 0 && taken[i - 1].1 > lo
}

fn insert_sorted(taken: &mut Vec<(f64, f64)>, lo: f64, hi: f64) {
    let i = taken.partition_point(|&(a, _)| a < lo);
    taken.insert(i, (lo, hi));
}

/// Greedy packing by descending key, under the length budget.
fn pack(cands: &[Candidate], order: &[usize], eta: f64, mut chosen: Vec<usize>) -> Vec<usize> {
    let mut taken: Vec<(f64, f64)> =
        chosen.iter().map(|&i| (cands[i].item.lo(), cands[i].item.hi())).collect();
    taken.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut used_tags: HashSet<u64> = chosen.iter().map(|&i| cands[i].item.tag().to_bits()).collect();
    let mut length: f64 = chosen.iter().map(|&i| cands[i].item.length()).sum();
    for &i in order {
        let c = &cands[i];
        let (lo, hi) = (c.item.lo(), c.item.hi());
        if c.term <= 0.0 || length + c.item.length() >= eta || used_tags.contains(&c.item.tag().to_bits()) {
            continue;
        }
        if overlaps_any(&taken, lo, hi) {
            continue;
        }
        insert_sorted(&mut taken, lo, hi);
        used_tags.insert(c.item.tag().to_bits());
        length += c.item.length();
        chosen.push(i);
    }
    chosen
}

/// Per-tag choice maximizing `term - λ length`, followed by overlap repair.
fn lagrangian_pick(cands: &[Candidate], by_tag: &[Vec<usize>], lambda: f64, eta: f64) -> Vec<usize> {
    let mut picks: Vec<(f64, usize)> = by_tag
        .iter()
        .filter_map(|ids| {
            ids.iter()
                .map(|&i| (cands[i].term - lambda * cands[i].item.length(), i))
                .filter(|&(v, _)| v > 0.0)
                .max_by(|a, b| a.0.total_cmp(&b.0))
        })
        .collect();
    picks.sort_by(|a, b| b.0.total_cmp(&a.0));
    let order: Vec<usize> = picks.into_iter().map(|(_, i)| i).collect();
    pack(cands, &order, eta, Vec::new())
}

fn picked_length(cands: &[Candidate], picked: &[usize]) -> f64 {
    picked.iter().map(|&i| cands[i].item.length()).sum()
}

fn picked_sum(cands: &[Candidate], picked: &[usize]) -> f64 {
    picked.iter().map(|&i| cands[i].term).sum()
}

/// Searches for fine tagged intervals, tagged at points of `tags`, with
/// total length below `eta` and a large [`ac_sum`].
///
/// Candidates at each tag are one-sided and centred intervals on a
/// geometric ladder below the gauge and, for the counterexample, intervals
/// reaching from the tag to the centres of the surrounding gaps. When more
/// candidates exist than the budget allows, a seeded random subset of tags
/// is used. Selection combines a Lagrangian per-tag choice with greedy
/// packing by score per unit length, keeping the better result.
pub fn adversarial_small_partition(
    tags: &[f64],
    gauge: &Gauge,
    eta: f64,
    f: &FunctionModel,
    r: f64,
    cfg: &AttackConfig,
) -> TaggedPartition {
    if !(eta > 0.0) || r < 1.0 || !r.is_finite() {
        return TaggedPartition::empty();
    }
    let mut pts: Vec<f64> = tags.iter().copied().filter(|x| x.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut per_tag: Vec<Vec<TaggedInterval>> = pts
        .iter()
        .filter_map(|&x| gauge.value(x).map(|d| shapes_at(x, d, eta, f, gauge, cfg)))
        .filter(|s| !s.is_empty())
        .collect();
    let total: usize = per_tag.iter().map(Vec::len).sum();
    if total > cfg.budget {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        per_tag.shuffle(&mut rng);
        let mut used = 0;
        per_tag.retain(|s| {
            used += s.len();
            used <= cfg.budget
        });
        per_tag.sort_by(|a, b| a[0].tag().total_cmp(&b[0].tag()));
    }
    let items: Vec<TaggedInterval> = per_tag.iter().flatten().copied().collect();
    let cands: Vec<Candidate> = items
        .par_iter()
        .map(|&item| Candidate { item, term: lr_term(f, &item, 0.0, r).unwrap_or(0.0) })
        .collect();
    let mut by_tag: Vec<Vec<usize>> = Vec::with_capacity(per_tag.len());
    let mut next = 0;
    for s in &per_tag {
        by_tag.push((next..next + s.len()).collect());
        next += s.len();
    }

    let mut density: Vec<usize> = (0..cands.len()).collect();
    density.sort_by(|&a, &b| {
        let da = cands[a].term / cands[a].item.length();
        let db = cands[b].term / cands[b].item.length();
        db.total_cmp(&da)
    });
    let greedy = pack(&cands, &density, eta, Vec::new());

    // smallest multiplier whose unconstrained choice fits the budget
    let max_density =
        cands.iter().map(|c| c.term / c.item.length()).fold(0.0, f64::max);
    let mut best = greedy;
    if max_density > 0.0 {
        let (mut lo, mut hi) = (0.0f64, 2.0 * max_density);
        let unconstrained = lagrangian_pick(&cands, &by_tag, 0.0, f64::INFINITY);
        let mut fit = if picked_length(&cands, &unconstrained) < eta { Some(unconstrained) } else { None };
        if fit.is_none() {
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let pick = lagrangian_pick(&cands, &by_tag, mid, f64::INFINITY);
                if picked_length(&cands, &pick) < eta {
                    hi = mid;
                    fit = Some(pick);
                } else {
                    lo = mid;
                }
            }
        }
        if let Some(pick) = fit {
            let filled = pack(&cands, &density, eta, pick);
            if picked_sum(&cands, &filled) > picked_sum(&cands, &best) {
                best = filled;
            }
        }
    }
    let chosen: Vec<TaggedInterval> = best.into_iter().map(|i| cands[i].item).collect();
    TaggedPartition::new(chosen).expect("packing keeps intervals disjoint")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::Counterexample;

    fn ti(lo: f64, hi: f64, tag: f64) -> TaggedInterval {
        TaggedInterval::from_bounds(lo, hi, tag).unwrap()
    }

    fn part(items: &[(f64, f64, f64)]) -> TaggedPartition {
        TaggedPartition::new(items.iter().map(|&(a, b, t)| ti(a, b, t)).collect()).unwrap()
    }

    #[test]
    fn fineness_examples() {
        let g2 = Gauge::constant(2.0).unwrap();
        let g1 = Gauge::constant(1.0).unwrap();
        assert!(is_fine(&part(&[(0.0, 1.0, 0.5)]), &g2).unwrap());
        assert!(!is_fine(&part(&[(0.0, 1.0, 0.0)]), &g1).unwrap());
        let g = Gauge::constant(0.25).unwrap();
        assert!(is_fine(&part(&[(0.0, 0.1, 0.05), (0.1, 0.3, 0.3)]), &g).unwrap());
        let sparse = Gauge::constant(1.0).unwrap().on_points(&[0.5]);
        assert!(matches!(is_fine(&part(&[(0.0, 1.0, 0.0)]), &sparse), Err(Error::Argument(_))));
    }

    #[test]
    fn gauge_representations() {
        let g = Gauge::piecewise_constant(vec![0.5], vec![0.1, 0.3]).unwrap();
        assert_eq!(g.value(0.2), Some(0.1));
        assert_eq!(g.value(0.5), Some(0.1));
        assert_eq!(g.value(0.7), Some(0.3));
        assert!(Gauge::piecewise_constant(vec![0.5], vec![0.1]).is_err());
        assert!(Gauge::constant(0.0).is_err());
        let p = Gauge::pointwise("x", |x| x);
        assert_eq!(p.value(-1.0), None);
        let on = Gauge::constant(1.0).unwrap().restricted_to(Interval::new(0.0, 1.0).unwrap());
        assert_eq!(on.value(2.0), None);
        assert_eq!(Gauge::from_json("0.3").unwrap().value(5.0), Some(0.3));
        let parsed = Gauge::from_json(
            r#"{"kind":"piecewise-constant","breakpoints":[0.5],"values":[0.1,0.3]}"#,
        )
        .unwrap();
        assert_eq!(parsed.spec(), g.spec());
        assert!(matches!(Gauge::from_json(r#"{"kind":"wavy"}"#), Err(Error::Spec(_))));
    }

    #[test]
    fn partition_json_and_validation() {
        let p = part(&[(0.5, 1.0, 1.0), (0.0, 0.5, 0.25)]);
        assert_eq!(p.items()[0].lo(), 0.0);
        let json = p.to_json();
        assert_eq!(json, r#"[{"lo":0.0,"hi":0.5,"tag":0.25},{"lo":0.5,"hi":1.0,"tag":1.0}]"#);
        assert_eq!(TaggedPartition::from_json(&json).unwrap(), p);
        assert!(TaggedPartition::from_json(r#"[{"lo":0,"hi":0.6,"tag":0},{"lo":0.5,"hi":1,"tag":1}]"#).is_err());
        assert!(TaggedPartition::from_json(r#"[{"lo":0,"hi":0.5,"tag":0.7}]"#).is_err());
        let raw: Vec<TaggedInterval> =
            serde_json::from_str(r#"[{"lo":0,"hi":0.6,"tag":0},{"lo":0.5,"hi":1,"tag":1}]"#).unwrap();
        assert!(!items_nonoverlapping(&raw));
        assert!(p.tiles(Interval::new(0.0, 1.0).unwrap()));
        assert_eq!(p.total_length(), 1.0);
    }

    #[test]
    fn cousin_examples() {
        let unit = Interval::new(0.0, 1.0).unwrap();
        let one = cousin_partition(unit, &Gauge::constant(2.0).unwrap(), 10).unwrap();
        assert_eq!(one.items(), &[ti(0.0, 1.0, 0.5)]);
        let g = Gauge::constant(0.3).unwrap();
        let halves = cousin_partition(unit, &g, 10).unwrap();
        // half-length 1/4 already fits inside a radius of 0.3
        assert_eq!(halves.items(), &[ti(0.0, 0.5, 0.25), ti(0.5, 1.0, 0.75)]);
        assert!(is_fine(&halves, &g).unwrap() && halves.tiles(unit));
        let g = Gauge::constant(0.2).unwrap();
        let quarters = cousin_partition(unit, &g, 10).unwrap();
        assert_eq!(quarters.len(), 4);
        assert!(is_fine(&quarters, &g).unwrap() && quarters.tiles(unit));
        // midpoint tags absorb x + 1e-9 at once; a zero inside the domain
        // cannot be absorbed
        let easy = Gauge::pointwise("x + 1e-9", |x| x + 1e-9);
        assert_eq!(cousin_partition(unit, &easy, 8).unwrap().len(), 1);
        let vanishing = Gauge::pointwise("|x - 1/3|", |x| (x - 1.0 / 3.0).abs());
        assert!(matches!(cousin_partition(unit, &vanishing, 8), Err(Error::Resource(_))));
        assert!(cousin_partition(unit, &Gauge::constant(1e-4).unwrap(), 8).is_err());
    }

    #[test]
    fn riemann_sum_examples() {
        let big_f = FunctionModel::polynomial(&[0.0, 0.0, 0.5], 0.0, 1.0).unwrap();
        let f = FunctionModel::polynomial(&[0.0, 1.0], 0.0, 1.0).unwrap();
        for tag in [0.0, 1.0] {
            let s = riemann_lr_sum(&part(&[(0.0, 1.0, tag)]), &big_f, &f, 1.0).unwrap();
            assert!((s - 1.0 / 6.0).abs() < 1e-14, "tag {tag}: {s}");
        }
        let line = FunctionModel::polynomial(&[0.3, 2.0], 0.0, 1.0).unwrap();
        let two = FunctionModel::polynomial(&[2.0], 0.0, 1.0).unwrap();
        let p = part(&[(0.0, 0.3, 0.1), (0.3, 1.0, 1.0)]);
        for r in [1.0, 2.5] {
            assert!(riemann_lr_sum(&p, &line, &two, r).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn ac_sum_examples() {
        let c = FunctionModel::polynomial(&[4.0], 0.0, 1.0).unwrap();
        let id = FunctionModel::polynomial(&[0.0, 1.0], 0.0, 1.0).unwrap();
        let p = part(&[(0.0, 0.2, 0.2), (0.2, 0.9, 0.5)]);
        assert_eq!(ac_sum(&p, &c, 1.0).unwrap(), 0.0);
        let s = ac_sum(&part(&[(0.0, 0.25, 0.0)]), &id, 1.0).unwrap();
        assert!((s - 0.125).abs() < 1e-15);
        for r in [1.0, 2.0, 3.5] {
            assert!(ac_sum(&p, &id, r).unwrap() <= p.total_length());
        }
        let outside = part(&[(0.5, 1.5, 1.0)]);
        assert!(matches!(ac_sum(&outside, &id, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn attack_on_smooth_and_constant_functions() {
        let tags: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
        let g = Gauge::constant(0.05).unwrap();
        let c = FunctionModel::polynomial(&[1.0], 0.0, 1.0).unwrap();
        let p = adversarial_small_partition(&tags, &g, 0.1, &c, 1.0, &AttackConfig::default());
        assert_eq!(ac_sum(&p, &c, 1.0).unwrap(), 0.0);
        let id = FunctionModel::polynomial(&[0.0, 1.0], 0.0, 1.0).unwrap();
        let p = adversarial_small_partition(&tags, &g, 0.1, &id, 1.0, &AttackConfig::default());
        assert!(!p.is_empty() && p.total_length() < 0.1);
        assert!(is_fine(&p, &g).unwrap());
        assert!(ac_sum(&p, &id, 1.0).unwrap() < 0.1);
    }

    #[test]
    fn attack_on_counterexample_finds_large_sum() {
        let c = Counterexample::default();
        let tags: Vec<f64> = c
            .scheme()
            .cantor_level_intervals(8)
            .unwrap()
            .iter()
            .flat_map(|i| {
                let i = i.to_interval();
                [i.lo(), i.hi()]
            })
            .collect();
        let f: FunctionModel = c.into();
        let g = Gauge::constant(1e-3).unwrap();
        let cfg = AttackConfig::default();
        let p = adversarial_small_partition(&tags, &g, 0.05, &f, 1.0, &cfg);
        assert!(p.total_length() < 0.05 && is_fine(&p, &g).unwrap());
        let s = ac_sum(&p, &f, 1.0).unwrap();
        assert!(s > 2.0, "sum {s}");
        assert_eq!(adversarial_small_partition(&tags, &g, 0.05, &f, 1.0, &cfg), p);
    }
}
