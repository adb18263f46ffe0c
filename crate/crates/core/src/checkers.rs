//! Finite-search certificates and refutations for the HK_r, AC_r and AC
//! conditions, and the divergence sweep for the counterexample.
//!
//! The conditions quantify over all gauges and partitions, so a search can
//! only ever refute them. A `witnessViolation` carries a witness that was
//! re-evaluated on an independent path; a `certificate` records that the
//! searched ladder produced no violation, which is evidence and not proof.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{arg_err, Error, Result};
use crate::funcmodel::cantor::{format_rational, ratio, to_f64};
use crate::funcmodel::{CantorScheme, Counterexample, FunctionModel, Interval};
use crate::gauges::{
    ac_sum, adversarial_small_partition, cousin_partition, lr_term_with, riemann_lr_sum,
    AttackConfig, Gauge, TaggedInterval, TaggedPartition, DEFAULT_MAX_DEPTH,
};
use crate::quadrature::{lr_mean_deviation_with, LrParams, Part, QuadratureConfig, Side};

pub const DEFAULT_ETAS: [f64; 3] = [0.1, 1e-2, 1e-3];
pub const DEFAULT_GAUGE_VALUES: [f64; 4] = [0.1, 1e-2, 1e-3, 1e-4];
pub const DEFAULT_BUDGET: usize = 10_000;
pub const DEFAULT_TRIALS: usize = 8;
pub const DEFAULT_VERIFY_TOL: f64 = 1e-6;

const SEMANTICS: &str = "violations are re-evaluated witnesses; certificates only record that \
                         the searched ladder found no violation";

/// Constant gauges `0.1, 0.01, 0.001, 0.0001`.
pub fn default_gauges() -> Vec<Gauge> {
    DEFAULT_GAUGE_VALUES.iter().map(|&v| Gauge::constant(v).expect("positive")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Verdict {
    Certificate,
    WitnessViolation,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Certificate => "certificate",
            Verdict::WitnessViolation => "witnessViolation",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase", tag = "kind", content = "items")]
pub enum Witness {
    Partition(TaggedPartition),
    Intervals(Vec<[f64; 2]>),
    Points(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Pass,
    Fail,
    Inconclusive,
}

/// One `(n, r)` row of the counterexample sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub n: u32,
    pub r: f64,
    /// Exact `r_n / 2` as `"p/q"`.
    pub h_exact: String,
    pub h: f64,
    pub q: f64,
    pub q_error: f64,
    pub bound: f64,
    pub q_lower: f64,
    pub status: RowStatus,
}

impl VerifyRow {
    pub fn passed(&self) -> bool {
        self.status == RowStatus::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckReport {
    pub check: String,
    pub verdict: Verdict,
    pub semantics: String,
    pub parameters: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub numeric_summary: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<VerifyRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    fn new(check: &str) -> Self {
        Self {
            check: check.to_string(),
            verdict: Verdict::Inconclusive,
            semantics: SEMANTICS.to_string(),
            parameters: BTreeMap::new(),
            witness: None,
            numeric_summary: BTreeMap::new(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn param(&mut self, key: &str, value: impl Serialize) {
        self.parameters.insert(key.to_string(), json!(value));
    }

    fn summary(&mut self, key: impl Into<String>, value: f64) {
        self.numeric_summary.insert(key.into(), value);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// Sweep rows when present, otherwise `key,value` lines with the
    /// verdict first.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record(["key", "value"]).expect("in-memory write");
            w.write_record(["verdict", &self.verdict.to_string()]).expect("in-memory write");
            for (k, v) in &self.numeric_summary {
                w.write_record([k.as_str(), &v.to_string()]).expect("in-memory write");
            }
        } else {
            w.write_record(["n", "r", "h", "q", "bound", "q_lower", "status", "pass"])
                .expect("in-memory write");
            for row in &self.rows {
                w.write_record([
                    row.n.to_string(),
                    row.r.to_string(),
                    row.h_exact.clone(),
                    format!("{:.15e}", row.q),
                    format!("{:.15e}", row.bound),
                    format!("{:.15e}", row.q_lower),
                    format!("{:?}", row.status).to_lowercase(),
                    row.passed().to_string(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Tight configuration used when re-evaluating witnesses.
fn recheck_config(len: f64) -> QuadratureConfig {
    QuadratureConfig { tol: 1e-15 * len, max_subdivisions: 20_000 }
}

/// Re-evaluates `Σ` of L^r terms in reverse order with a tighter quadrature.
fn recheck_sum(
    p: &TaggedPartition,
    big_f: &FunctionModel,
    slope_at: impl Fn(f64) -> Result<f64>,
    r: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for item in p.items().iter().rev() {
        total += lr_term_with(big_f, item, slope_at(item.tag())?, r, &recheck_config(item.length()))?;
    }
    Ok(total)
}

fn shared_domain(big_f: &FunctionModel, f: &FunctionModel) -> Result<Interval> {
    let (a, b) = (big_f.domain(), f.domain());
    Interval::new(a.lo().max(b.lo()), a.hi().min(b.hi()))
        .map_err(|_| Error::Argument(format!("domains {a} and {b} do not overlap")))
}

/// Random fine refinement of a fine partition: each item is cut into up to
/// three pieces with random tags (often endpoints); pieces that are not fine
/// with their random tag fall back to bisection.
fn random_refinement(base: &TaggedPartition, gauge: &Gauge, rng: &mut ChaCha8Rng) -> Result<TaggedPartition> {
    let mut items = Vec::with_capacity(base.len() * 2);
    for item in base.items() {
        let pieces = rng.gen_range(1..=3usize);
        let mut cuts: Vec<f64> = (1..pieces).map(|_| rng.gen_range(item.lo()..item.hi())).collect();
        cuts.sort_by(f64::total_cmp);
        let mut bounds = vec![item.lo()];
        bounds.extend(cuts);
        bounds.push(item.hi());
        bounds.dedup();
        for w in bounds.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let tag = match rng.gen_range(0..4u8) {
                0 => lo,
                1 => hi,
                _ => rng.gen_range(lo..=hi),
            };
            let piece = TaggedInterval::from_bounds(lo, hi, tag)?;
            if piece.is_fine(gauge)? {
                items.push(piece);
            } else {
                items.extend_from_slice(cousin_partition(piece.interval(), gauge, DEFAULT_MAX_DEPTH)?.items());
            }
        }
    }
    TaggedPartition::new(items)
}

/// Samples Riemann-type L^r sums of `(F, f)` over fine partitions for each
/// gauge of the ladder, coarse to fine.
///
/// Certificate when some gauge keeps every sampled sum below `epsilon`;
/// witness when a sampled sum at the finest gauge reaches `epsilon`.
pub fn hkr_check(
    big_f: &FunctionModel,
    f: &FunctionModel,
    r: f64,
    epsilon: f64,
    gauges: &[Gauge],
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    if !(epsilon > 0.0) {
        return arg_err(format!("epsilon must be positive, got {epsilon}"));
    }
    if gauges.is_empty() {
        return arg_err("the gauge ladder is empty");
    }
    let domain = shared_domain(big_f, f)?;
    let mut report = CheckReport::new("hkr-check");
    report.param("r", r);
    report.param("epsilon", epsilon);
    report.param("domain", [domain.lo(), domain.hi()]);
    report.param("gauges", gauges.iter().map(Gauge::describe).collect::<Vec<_>>());
    report.param("trials", trials);
    report.param("seed", seed);
    let slope = |x: f64| f.eval(x);
    let mut worst: Option<(f64, TaggedPartition)> = None;
    for (gi, gauge) in gauges.iter().enumerate() {
        let base = cousin_partition(domain, gauge, DEFAULT_MAX_DEPTH)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(gi as u64));
        let mut candidates = vec![base.clone()];
        for _ in 0..trials {
            candidates.push(random_refinement(&base, gauge, &mut rng)?);
        }
        let mut max = (f64::NEG_INFINITY, TaggedPartition::empty());
        for p in candidates {
            let s = riemann_lr_sum(&p, big_f, f, r)?;
            if s > max.0 {
                max = (s, p);
            }
        }
        report.summary(format!("maxSum[{}]", gauge.describe()), max.0);
        if max.0 < epsilon {
            report.verdict = Verdict::Certificate;
            report.param("certifyingGauge", gauge.describe());
            report.summary("maxSampledSum", max.0);
            report.summary("certifyingMesh", base.mesh());
            return Ok(report);
        }
        worst = Some(max);
    }
    let (sum, p) = worst.expect("nonempty ladder");
    let again = recheck_sum(&p, big_f, slope, r)?;
    report.summary("witnessSum", sum);
    report.summary("witnessSumRecheck", again);
    if again >= epsilon {
        report.verdict = Verdict::WitnessViolation;
        report.notes.push(format!("sum at the finest gauge reaches epsilon on {} intervals", p.len()));
        report.witness = Some(Witness::Partition(p));
    } else {
        report.notes.push("witness did not survive re-evaluation".into());
    }
    Ok(report)
}

/// Attacks the AC_r condition on the tag set `tags` for every `(η, δ)` in
/// the ladders with [`adversarial_small_partition`].
///
/// Certificate when some pair survives every attack with sums below
/// `epsilon`; witness when every pair is beaten. Only the supplied constant
/// or piecewise-constant gauges are searched.
pub fn acr_check(
    big_f: &FunctionModel,
    tags: &[f64],
    r: f64,
    epsilon: f64,
    etas: &[f64],
    gauges: &[Gauge],
    attack: &AttackConfig,
) -> Result<CheckReport> {
    if !(epsilon > 0.0) {
        return arg_err(format!("epsilon must be positive, got {epsilon}"));
    }
    if etas.is_empty() || gauges.is_empty() || etas.iter().any(|e| !(*e > 0.0)) {
        return arg_err("eta and gauge ladders must be nonempty with positive eta");
    }
    let domain = big_f.domain();
    if tags.iter().any(|&x| !domain.contains(x)) {
        return arg_err(format!("tags must lie in {domain}"));
    }
    let mut report = CheckReport::new("acr-check");
    report.param("r", r);
    report.param("epsilon", epsilon);
    report.param("etas", etas);
    report.param("gauges", gauges.iter().map(Gauge::describe).collect::<Vec<_>>());
    report.param("tagCount", tags.len());
    report.param("budget", attack.budget);
    report.param("seed", attack.seed);
    report.notes.push("only the listed gauges are searched, not arbitrary gauges".into());
    let mut last = None;
    for &eta in etas {
        for gauge in gauges {
            let p = adversarial_small_partition(tags, gauge, eta, big_f, r, attack);
            let s = ac_sum(&p, big_f, r)?;
            report.summary(format!("maxSum[eta={eta}, {}]", gauge.describe()), s);
            if s < epsilon {
                report.verdict = Verdict::Certificate;
                report.param("survivingEta", eta);
                report.param("survivingGauge", gauge.describe());
                report.summary("maxFoundSum", s);
                return Ok(report);
            }
            last = Some((eta, p, s));
        }
    }
    let (eta, p, s) = last.expect("nonempty ladders");
    let again = recheck_sum(&p, big_f, |_| Ok(0.0), r)?;
    report.summary("witnessSum", s);
    report.summary("witnessSumRecheck", again);
    report.summary("witnessTotalLength", p.total_length());
    if again >= epsilon && p.total_length() < eta {
        report.verdict = Verdict::WitnessViolation;
        report.notes.push(format!("every (eta, gauge) pair beaten; witness from eta = {eta}"));
        report.witness = Some(Witness::Partition(p));
    } else {
        report.notes.push("witness did not survive re-evaluation".into());
    }
    Ok(report)
}

fn exact_eval(f: &FunctionModel, x: f64) -> Result<f64> {
    match f.as_counterexample() {
        Some(c) if f.domain().contains(x) => Ok(c.eval_exact(x)),
        _ => f.eval(x),
    }
}

/// Classical AC attack on `E`: nonoverlapping intervals with endpoints in
/// `E` and total length below `η`, maximizing `Σ |F(d) - F(c)|`.
///
/// Splitting an interval at intermediate points of `E` never lowers the sum,
/// so only consecutive points are paired. Selection is greedy by increment
/// per unit length, capped at `budget` candidate intervals.
pub fn ac_check(
    big_f: &FunctionModel,
    points: &[f64],
    epsilon: f64,
    etas: &[f64],
    budget: usize,
) -> Result<CheckReport> {
    if !(epsilon > 0.0) {
        return arg_err(format!("epsilon must be positive, got {epsilon}"));
    }
    if etas.is_empty() || etas.iter().any(|e| !(*e > 0.0)) {
        return arg_err("eta ladder must be nonempty and positive");
    }
    let mut pts: Vec<f64> = points.to_vec();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let values = pts.iter().map(|&x| big_f.eval(x)).collect::<Result<Vec<_>>>()?;
    let mut cands: Vec<(f64, f64, f64)> = pts
        .windows(2)
        .zip(values.windows(2))
        .map(|(x, y)| (x[0], x[1], (y[1] - y[0]).abs()))
        .filter(|c| c.2 > 0.0)
        .collect();
    cands.sort_by(|a, b| (b.2 / (b.1 - b.0)).total_cmp(&(a.2 / (a.1 - a.0))));
    cands.truncate(budget);

    let mut report = CheckReport::new("ac-check");
    report.param("epsilon", epsilon);
    report.param("etas", etas);
    report.param("pointCount", pts.len());
    report.param("budget", budget);
    let mut last = None;
    for &eta in etas {
        let mut length = 0.0;
        let mut chosen = Vec::new();
        for &(c, d, _) in &cands {
            if length + (d - c) < eta {
                length += d - c;
                chosen.push([c, d]);
            }
        }
        chosen.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let s: f64 = chosen
            .iter()
            .try_fold(0.0, |acc, &[c, d]| Ok::<_, Error>(acc + (big_f.eval(d)? - big_f.eval(c)?).abs()))?;
        report.summary(format!("maxSum[eta={eta}]"), s);
        if s < epsilon {
            report.verdict = Verdict::Certificate;
            report.param("survivingEta", eta);
            report.summary("maxFoundSum", s);
            return Ok(report);
        }
        last = Some((chosen, s, length));
    }
    let (chosen, s, length) = last.expect("nonempty ladder");
    let again: f64 = chosen
        .iter()
        .rev()
        .try_fold(0.0, |acc, &[c, d]| {
            Ok::<_, Error>(acc + (exact_eval(big_f, d)? - exact_eval(big_f, c)?).abs())
        })?;
    report.summary("witnessSum", s);
    report.summary("witnessSumRecheck", again);
    report.summary("witnessTotalLength", length);
    if again >= epsilon {
        report.verdict = Verdict::WitnessViolation;
        report.notes.push(format!("{} intervals beat every eta", chosen.len()));
        report.witness = Some(Witness::Intervals(chosen));
    } else {
        report.notes.push("witness did not survive re-evaluation".into());
    }
    Ok(report)
}

fn check_bound_args(n: u32, r: f64) -> Result<()> {
    if n == 0 {
        return arg_err("the bound needs n >= 1");
    }
    if n > 1000 {
        return arg_err(format!("n = {n} overflows double precision"));
    }
    if !(r.is_finite() && r >= 1.0) {
        return arg_err(format!("exponent r must satisfy 1 <= r < inf, got {r}"));
    }
    Ok(())
}

/// Closed form `2^{n+2}(n+2) / (n (n+4)^{1+1/r} (n+3)^{1/r})`.
fn bound_closed(n: u32, r: f64) -> f64 {
    let m = f64::from(n);
    2f64.powi(n as i32 + 2) * (m + 2.0) / (m * (m + 4.0).powf(1.0 + 1.0 / r) * (m + 3.0).powf(1.0 / r))
}

/// `2^{1-1/r} / (n r_n) (u_n / r_n)^{1/r}` from the exact lengths.
pub fn counterexample_bound_intermediate(n: u32, r: f64) -> Result<f64> {
    check_bound_args(n, r)?;
    let s = CantorScheme::standard();
    let len = s.level_length(n);
    let gap_ratio = to_f64(&(s.gap_length(n) / &len));
    Ok(2f64.powf(1.0 - 1.0 / r) / (f64::from(n) * to_f64(&len)) * gap_ratio.powf(1.0 / r))
}

/// Plateau-only minorant `(2/r_n) ((2/r_n) v_n / (2 n^r))^{1/r}`.
pub fn counterexample_plateau_minorant(n: u32, r: f64) -> Result<f64> {
    check_bound_args(n, r)?;
    let s = CantorScheme::standard();
    let scale = 2.0 / to_f64(&s.level_length(n));
    let plateau = to_f64(&s.plateau_length(n));
    Ok(scale * (scale * plateau / (2.0 * f64::from(n).powf(r))).powf(1.0 / r))
}

/// Lower bound on `Φ_h(0) / h` at `x = 0`, `h = r_n / 2`, which grows
/// without bound in `n`. Panics if the closed and intermediate forms
/// disagree beyond `1e-12` relative.
pub fn counterexample_bound(n: u32, r: f64) -> Result<f64> {
    let intermediate = counterexample_bound_intermediate(n, r)?;
    let closed = bound_closed(n, r);
    assert!(
        (closed - intermediate).abs() <= 1e-12 * closed,
        "bound forms disagree at n = {n}, r = {r}: {closed} vs {intermediate}"
    );
    Ok(closed)
}

fn verify_row(f: &FunctionModel, n: u32, r: f64, tol: f64) -> Result<VerifyRow> {
    let s = CantorScheme::standard();
    let h_exact: BigRational = s.level_length(n) / ratio(2, 1);
    let h = to_f64(&h_exact);
    let bound = counterexample_bound(n, r)?;
    let q_lower = counterexample_plateau_minorant(n, r)?;
    // absolute tolerance on the raw integral, far below the bound's share
    let raw_tol = 1e-3 * tol * h * (bound * h * h).powf(r);
    let config = QuadratureConfig { tol: raw_tol, max_subdivisions: 20_000 };
    let p = LrParams::new(r, Side::Right, Part::Abs)?;
    let m = lr_mean_deviation_with(f, 0.0, 0.0, h, p, &config)?;
    let (q, q_error) = (m.value / h, m.error_estimate / h);
    let target = bound * (1.0 - tol);
    let status = if q - q_error >= target {
        RowStatus::Pass
    } else if q + q_error < target {
        RowStatus::Fail
    } else {
        RowStatus::Inconclusive
    };
    Ok(VerifyRow { n, r, h_exact: format_rational(&h_exact), h, q, q_error, bound, q_lower, status })
}

/// Checks `Φ_h(0)/h >= bound(n, r) (1 - tol)` at `x = 0`, `h = r_n/2` (the
/// plateau midpoint of the first level-`n` gap) for each `n` and `r`.
pub fn counterexample_verify(
    levels: std::ops::RangeInclusive<u32>,
    rs: &[f64],
    tol: f64,
    depth_cap: u32,
) -> Result<CheckReport> {
    if levels.is_empty() || *levels.start() == 0 {
        return arg_err("levels must be a nonempty range starting at 1 or later");
    }
    if *levels.end() >= depth_cap {
        return arg_err(format!(
            "level {} is not resolved below depth cap {depth_cap}",
            levels.end()
        ));
    }
    if rs.is_empty() || !(0.0..1.0).contains(&tol) {
        return arg_err("need at least one exponent and 0 <= tol < 1");
    }
    let f: FunctionModel = Counterexample::new(depth_cap)?.into();
    let jobs: Vec<(u32, f64)> = levels.clone().flat_map(|n| rs.iter().map(move |&r| (n, r))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(n, r)| verify_row(&f, n, r, tol))
        .collect::<Result<Vec<_>>>()?;

    let mut report = CheckReport::new("counterexample-verify");
    report.param("levels", [levels.start(), levels.end()]);
    report.param("rs", rs);
    report.param("tol", tol);
    report.param("depthCap", depth_cap);
    report.param("x", 0.0);
    report.param("alpha", 0.0);
    for &r in rs {
        let of = |n: u32| rows.iter().find(|row| row.n == n && row.r == r).map(|row| row.q);
        if let (Some(first), Some(last)) = (of(*levels.start()), of(*levels.end())) {
            report.summary(format!("growth[r={r}]"), last / first);
        }
    }
    let failed = rows.iter().filter(|r| r.status == RowStatus::Fail).count();
    let open = rows.iter().filter(|r| r.status == RowStatus::Inconclusive).count();
    report.summary("rows", rows.len() as f64);
    report.summary("failedRows", failed as f64);
    report.summary("inconclusiveRows", open as f64);
    report.verdict = if failed == 0 && open == 0 { Verdict::Certificate } else { Verdict::Inconclusive };
    if failed > 0 {
        report.notes.push(format!("{failed} rows fall below the bound"));
    }
    if open > 0 {
        report.notes.push(format!("{open} rows not resolved within the quadrature budget"));
    }
    report.rows = rows;
    Ok(report)
}

/// Endpoints of the level-`n` construction intervals, rounded to doubles
/// at which the counterexample vanishes.
pub fn level_endpoints(c: &Counterexample, n: u32) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for i in c.scheme().cantor_level_intervals(n)? {
        for q in [&i.lo, &i.hi] {
            let x = to_f64(q);
            let snapped = c.snap_to_perfect_set(x, 64).ok_or_else(|| {
                Error::Resource(format!("no double near {x} avoids the gaps"))
            })?;
            out.push(snapped);
        }
    }
    out.dedup();
    Ok(out)
}

/// Plateau midpoints of every gap of levels `levels`.
pub fn plateau_midpoints(scheme: &CantorScheme, levels: std::ops::RangeInclusive<u32>) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for n in levels {
        out.extend(scheme.cantor_level_intervals(n)?.iter().map(|i| i.to_interval().midpoint()));
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[f64]) -> FunctionModel {
        FunctionModel::polynomial(c, 0.0, 1.0).unwrap()
    }

    #[test]
    fn bound_examples() {
        assert!((counterexample_bound(1, 1.0).unwrap() - 0.24).abs() < 1e-15);
        assert!((counterexample_bound(2, 1.0).unwrap() - 64.0 / 360.0).abs() < 1e-15);
        for r in [1.0, 2.0, 3.0] {
            for n in 4..40 {
                assert!(counterexample_bound(n + 1, r).unwrap() > counterexample_bound(n, r).unwrap());
            }
        }
        // ((n+3)(n+4))^{-1/r} rises towards 1, so the bound grows with r
        for n in 1..=20 {
            let b: Vec<f64> = [1.0, 2.0, 4.0].iter().map(|&r| counterexample_bound(n, r).unwrap()).collect();
            assert!(b[0] < b[1] && b[1] < b[2], "n {n}: {b:?}");
        }
        assert!(matches!(counterexample_bound(0, 1.0), Err(Error::Argument(_))));
        for (n, r) in [(1, 1.0), (7, 2.0), (30, 1.5)] {
            let a = counterexample_bound(n, r).unwrap();
            let b = counterexample_plateau_minorant(n, r).unwrap();
            assert!((a - b).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn verify_small_levels() {
        let report = counterexample_verify(1..=6, &[1.0, 2.0], DEFAULT_VERIFY_TOL, 60).unwrap();
        assert_eq!(report.verdict, Verdict::Certificate, "{:?}", report.rows);
        let first = &report.rows[0];
        assert_eq!((first.n, first.h_exact.as_str()), (1, "5/24"));
        assert!(first.q >= 0.24 * (1.0 - 1e-6));
        let csv = report.to_csv();
        assert!(csv.starts_with("n,r,h,q,bound,q_lower,status,pass\n1,1,5/24,"));
        assert!(counterexample_verify(1..=60, &[1.0], 1e-6, 60).is_err());
    }

    #[test]
    fn hkr_examples() {
        let big_f = poly(&[0.0, 0.0, 0.5]);
        let f = poly(&[0.0, 1.0]);
        let gauges = vec![Gauge::constant(1e-3).unwrap()];
        let rep = hkr_check(&big_f, &f, 1.0, 1e-3, &gauges, 4, 1).unwrap();
        assert_eq!(rep.verdict, Verdict::Certificate);
        assert!(rep.numeric_summary["maxSampledSum"] < 1e-3);
        let line = poly(&[0.2, 3.0]);
        let rep = hkr_check(&line, &poly(&[3.0]), 2.0, 1e-9, &default_gauges()[..1], 4, 1).unwrap();
        assert_eq!(rep.verdict, Verdict::Certificate);
        assert_eq!(rep.numeric_summary["maxSampledSum"], 0.0);
        let c = FunctionModel::counterexample();
        let rep = hkr_check(&c, &poly(&[0.0]), 1.0, 1.0, &default_gauges(), 1, 1).unwrap();
        assert_eq!(rep.verdict, Verdict::WitnessViolation);
        assert!(rep.numeric_summary["witnessSumRecheck"] >= 1.0);
    }

    #[test]
    fn ac_examples() {
        let ce = Counterexample::default();
        let s = ce.scheme().clone();
        let c: FunctionModel = ce.clone().into();
        let p_points = level_endpoints(&ce, 12).unwrap();
        let rep = ac_check(&c, &p_points, 1e-9, &DEFAULT_ETAS, DEFAULT_BUDGET).unwrap();
        assert_eq!(rep.verdict, Verdict::Certificate);
        assert_eq!(rep.numeric_summary["maxFoundSum"], 0.0);
        let mut mixed = level_endpoints(&ce, 13).unwrap();
        mixed.extend(plateau_midpoints(&s, 1..=12).unwrap());
        let rep = ac_check(&c, &mixed, 1.0, &DEFAULT_ETAS, DEFAULT_BUDGET).unwrap();
        assert_eq!(rep.verdict, Verdict::WitnessViolation);
        let Some(Witness::Intervals(w)) = &rep.witness else { panic!("no witness") };
        let total: f64 = w.iter().map(|[a, b]| b - a).sum();
        assert!(total < 1e-3 && rep.numeric_summary["witnessSumRecheck"] >= 1.0);
        let id = poly(&[0.0, 1.0]);
        let pts: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let rep = ac_check(&id, &pts, 0.05, &[0.05], DEFAULT_BUDGET).unwrap();
        assert_eq!(rep.verdict, Verdict::Certificate);
    }

    #[test]
    fn acr_examples() {
        let id = poly(&[0.0, 1.0]);
        let tags: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
        let rep = acr_check(&id, &tags, 1.0, 0.01, &[0.01], &default_gauges(), &AttackConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Certificate);
        let c = FunctionModel::counterexample();
        let tags = level_endpoints(&Counterexample::default(), 10).unwrap();
        let rep = acr_check(&c, &tags, 1.0, 1.0, &DEFAULT_ETAS, &default_gauges(), &AttackConfig::default())
            .unwrap();
        assert_eq!(rep.verdict, Verdict::WitnessViolation, "{:?}", rep.numeric_summary);
        assert!(rep.numeric_summary["witnessSumRecheck"] >= 1.0);
        let json = rep.to_json();
        assert!(json.contains("\"verdict\": \"witnessViolation\""));
    }
}
