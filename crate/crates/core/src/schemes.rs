//! Channel operators (differences, averages, generalized finite differences)
//! and the scheme matrices they induce over one sampling period.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reconstruct::{Signal, Signal2d};
use crate::riesz::SchemeMatrix;

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorKind {
    Identity,
    /// `Δ₊^k`, `k >= 1`.
    Forward(u32),
    /// `Δ₋^k`, `k >= 1`.
    Backward(u32),
    /// `Δ₀ f(t) = f(t+1) - f(t-1)`.
    CentralDiff,
    /// `μ₊ f(t) = (f(t+1) + f(t)) / 2`.
    ForwardAvg,
    /// `μ₋ f(t) = (f(t) + f(t-1)) / 2`.
    BackwardAvg,
    /// `μ₀ f(t) = (f(t+1) + f(t-1)) / 2`.
    CentralAvg,
    /// `Σ_i coeffs[i] f(t + start + i)`.
    Generalized { coeffs: Vec<f64>, start: i64 },
}

/// A channel operator anchored at an offset inside the sampling period:
/// channel value at `n` is the operator applied to `f` at `a + p n + anchor`.
///
/// Text form: `id`, `fwd`, `fwd^k`, `bwd`, `bwd^k`, `diff0`, `avg+`, `avg-`,
/// `avg0` or `gen[c0,c1,...]`, optionally followed by `@anchor`
/// (e.g. `fwd^2@0`, `gen[1,-2,1]@-1`). Generalized coefficients accept
/// decimals or fractions like `1/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub anchor: i64,
}

impl OperatorSpec {
    pub fn new(kind: OperatorKind, anchor: i64) -> Self {
        OperatorSpec { kind, anchor }
    }

    pub fn identity(anchor: i64) -> Self {
        Self::new(OperatorKind::Identity, anchor)
    }

    pub fn forward(k: u32, anchor: i64) -> Self {
        Self::new(OperatorKind::Forward(k), anchor)
    }

    pub fn backward(k: u32, anchor: i64) -> Self {
        Self::new(OperatorKind::Backward(k), anchor)
    }

    pub fn generalized(coeffs: Vec<f64>, anchor: i64) -> Self {
        Self::new(OperatorKind::Generalized { coeffs, start: 0 }, anchor)
    }

    fn invalid(&self, reason: impl Into<String>) -> Error {
        Error::InvalidOperator {
            spec: self.to_string(),
            reason: reason.into(),
        }
    }

    /// Checks the operator on its own and against a period `p`.
    pub fn validate(&self, period: usize) -> Result<()> {
        match &self.kind {
            OperatorKind::Forward(k) | OperatorKind::Backward(k) => {
                if *k == 0 {
                    return Err(self.invalid("difference order must be at least 1 (use `id`)"));
                }
                if *k as usize > period.saturating_sub(1) {
                    return Err(self.invalid(format!(
                        "order {k} exceeds p - 1 = {} for period {period}",
                        period.saturating_sub(1)
                    )));
                }
            }
            OperatorKind::Generalized { coeffs, .. } => {
                if coeffs.is_empty() || coeffs.iter().all(|c| *c == 0.0) {
                    return Err(self.invalid("generalized coefficients are all zero"));
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(self.invalid("generalized coefficients must be finite"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Expansion `Σ c f(t + offset)` as `(offset, c)` pairs, anchor included,
    /// obtained by composing first-order stencils.
    pub fn taps(&self) -> Vec<(i64, f64)> {
        // coefficient vector over offsets lo, lo+1, ...
        let (lo, coeffs): (i64, Vec<f64>) = match &self.kind {
            OperatorKind::Identity => (0, vec![1.0]),
            OperatorKind::Forward(k) => {
                let mut c = vec![1.0];
                for _ in 0..*k {
                    // Δ₊ g(t) = g(t+1) - g(t)
                    let mut next = vec![0.0; c.len() + 1];
                    for (i, v) in c.iter().enumerate() {
                        next[i + 1] += v;
                        next[i] -= v;
                    }
                    c = next;
                }
                (0, c)
            }
            OperatorKind::Backward(k) => {
                let mut c = vec![1.0];
                for _ in 0..*k {
                    // Δ₋ g(t) = g(t) - g(t-1), vector indexed from the lowest offset
                    let mut next = vec![0.0; c.len() + 1];
                    for (i, v) in c.iter().enumerate() {
                        next[i + 1] += v;
                        next[i] -= v;
                    }
                    c = next;
                }
                (-(*k as i64), c)
            }
            OperatorKind::CentralDiff => (-1, vec![-1.0, 0.0, 1.0]),
            OperatorKind::ForwardAvg => (0, vec![0.5, 0.5]),
            OperatorKind::BackwardAvg => (-1, vec![0.5, 0.5]),
            OperatorKind::CentralAvg => (-1, vec![0.5, 0.0, 0.5]),
            OperatorKind::Generalized { coeffs, start } => (*start, coeffs.clone()),
        };
        coeffs
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c != 0.0)
            .map(|(i, c)| (self.anchor + lo + i as i64, c))
            .collect()
    }

    /// Smallest and largest offsets touched.
    pub fn reach(&self) -> (i64, i64) {
        let taps = self.taps();
        let lo = taps.iter().map(|t| t.0).min().unwrap_or(self.anchor);
        let hi = taps.iter().map(|t| t.0).max().unwrap_or(self.anchor);
        (lo, hi)
    }

    /// Applies the operator to `f` at `t + anchor`, composing first-order
    /// operators by their recursive definitions.
    pub fn apply<F: Fn(f64) -> f64 + ?Sized>(&self, f: &F, t: f64) -> f64 {
        let t = t + self.anchor as f64;
        match &self.kind {
            OperatorKind::Identity => f(t),
            OperatorKind::Forward(k) => forward_diff(f, *k, t),
            OperatorKind::Backward(k) => backward_diff(f, *k, t),
            OperatorKind::CentralDiff => f(t + 1.0) - f(t - 1.0),
            OperatorKind::ForwardAvg => 0.5 * (f(t + 1.0) + f(t)),
            OperatorKind::BackwardAvg => 0.5 * (f(t) + f(t - 1.0)),
            OperatorKind::CentralAvg => 0.5 * (f(t + 1.0) + f(t - 1.0)),
            OperatorKind::Generalized { coeffs, start } => coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * f(t + (*start + i as i64) as f64))
                .sum(),
        }
    }
}

fn forward_diff<F: Fn(f64) -> f64 + ?Sized>(f: &F, k: u32, t: f64) -> f64 {
    if k == 0 {
        f(t)
    } else {
        forward_diff(f, k - 1, t + 1.0) - forward_diff(f, k - 1, t)
    }
}

fn backward_diff<F: Fn(f64) -> f64 + ?Sized>(f: &F, k: u32, t: f64) -> f64 {
    if k == 0 {
        f(t)
    } else {
        backward_diff(f, k - 1, t) - backward_diff(f, k - 1, t - 1.0)
    }
}

fn fmt_coeff(c: f64) -> String {
    format!("{c}")
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut anchor = self.anchor;
        match &self.kind {
            OperatorKind::Identity => write!(f, "id")?,
            OperatorKind::Forward(1) => write!(f, "fwd")?,
            OperatorKind::Forward(k) => write!(f, "fwd^{k}")?,
            OperatorKind::Backward(1) => write!(f, "bwd")?,
            OperatorKind::Backward(k) => write!(f, "bwd^{k}")?,
            OperatorKind::CentralDiff => write!(f, "diff0")?,
            OperatorKind::ForwardAvg => write!(f, "avg+")?,
            OperatorKind::BackwardAvg => write!(f, "avg-")?,
            OperatorKind::CentralAvg => write!(f, "avg0")?,
            OperatorKind::Generalized { coeffs, start } => {
                anchor += start;
                let body: Vec<String> = coeffs.iter().map(|c| fmt_coeff(*c)).collect();
                write!(f, "gen[{}]", body.join(","))?
            }
        }
        write!(f, "@{anchor}")
    }
}

fn parse_coeff(s: &str) -> Option<f64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().ok()?;
            let d: f64 = d.trim().parse().ok()?;
            (d != 0.0).then(|| n / d)
        }
        None => s.parse().ok(),
    }
}

impl FromStr for OperatorSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidOperator {
            spec: text.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = text.trim();
        let (op, anchor) = match trimmed.rsplit_once('@') {
            Some((op, a)) => (
                op.trim(),
                a.trim().parse::<i64>().map_err(|_| bad("anchor must be an integer"))?,
            ),
            None => (trimmed, 0),
        };
        let order = |rest: &str| -> Result<u32> {
            if rest.is_empty() {
                Ok(1)
            } else if let Some(k) = rest.strip_prefix('^') {
                k.parse::<u32>().map_err(|_| bad("difference order must be a non-negative integer"))
            } else {
                Err(bad("expected `^k` after the operator name"))
            }
        };
        let kind = if op == "id" {
            OperatorKind::Identity
        } else if let Some(rest) = op.strip_prefix("fwd") {
            OperatorKind::Forward(order(rest)?)
        } else if let Some(rest) = op.strip_prefix("bwd") {
            OperatorKind::Backward(order(rest)?)
        } else if op == "diff0" {
            OperatorKind::CentralDiff
        } else if op == "avg+" {
            OperatorKind::ForwardAvg
        } else if op == "avg-" {
            OperatorKind::BackwardAvg
        } else if op == "avg0" {
            OperatorKind::CentralAvg
        } else if let Some(body) = op.strip_prefix("gen[").and_then(|b| b.strip_suffix(']')) {
            let coeffs = body
                .split(',')
                .map(|c| parse_coeff(c).ok_or_else(|| bad("unparseable coefficient")))
                .collect::<Result<Vec<f64>>>()?;
            OperatorKind::Generalized { coeffs, start: 0 }
        } else {
            return Err(bad("unknown operator"));
        };
        let spec = OperatorSpec { kind, anchor };
        match &spec.kind {
            OperatorKind::Forward(0) | OperatorKind::Backward(0) => {
                Err(bad("difference order must be at least 1 (use `id`)"))
            }
            OperatorKind::Generalized { coeffs, .. } if coeffs.iter().all(|c| *c == 0.0) => {
                Err(bad("generalized coefficients are all zero"))
            }
            _ => Ok(spec),
        }
    }
}

impl TryFrom<String> for OperatorSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<OperatorSpec> for String {
    fn from(s: OperatorSpec) -> String {
        s.to_string()
    }
}

pub fn parse_specs<S: AsRef<str>>(texts: &[S]) -> Result<Vec<OperatorSpec>> {
    texts.iter().map(|t| t.as_ref().parse()).collect()
}

/// Scheme matrix with the period window starting at the smallest offset
/// any operator touches.
pub fn scheme_matrix(specs: &[OperatorSpec], period: usize) -> Result<SchemeMatrix> {
    let start = specs.iter().map(|s| s.reach().0).min().unwrap_or(0);
    scheme_matrix_with_window(specs, period, start)
}

/// Scheme matrix over the partition offsets `start..start+p`.
pub fn scheme_matrix_with_window(
    specs: &[OperatorSpec],
    period: usize,
    start: i64,
) -> Result<SchemeMatrix> {
    if period == 0 {
        return Err(Error::Precondition("period must be at least 1".into()));
    }
    if specs.len() < period {
        return Err(Error::Underdetermined {
            channels: specs.len(),
            period,
        });
    }
    let mut m = DMatrix::zeros(specs.len(), period);
    for (j, spec) in specs.iter().enumerate() {
        spec.validate(period)?;
        let (lo, hi) = spec.reach();
        if lo < start || hi > start + period as i64 - 1 {
            return Err(Error::WindowOverflow {
                spec: spec.to_string(),
                lo,
                hi,
                start,
                period,
            });
        }
        for (off, c) in spec.taps() {
            m[(j, (off - start) as usize)] += c;
        }
    }
    SchemeMatrix::new(m, start, specs.iter().map(|s| s.to_string()).collect())
}

/// `[id, fwd, fwd^2, ..., fwd^{p-1}]`, all anchored at 0.
pub fn forward_specs(p: usize) -> Vec<OperatorSpec> {
    (0..p)
        .map(|k| match k {
            0 => OperatorSpec::identity(0),
            k => OperatorSpec::forward(k as u32, 0),
        })
        .collect()
}

/// `[bwd^{p-1}, ..., bwd, id]`, all anchored at 0; the resulting matrix is
/// upper triangular over offsets `-(p-1)..=0`.
pub fn backward_specs(p: usize) -> Vec<OperatorSpec> {
    (0..p)
        .rev()
        .map(|k| match k {
            0 => OperatorSpec::identity(0),
            k => OperatorSpec::backward(k as u32, 0),
        })
        .collect()
}

/// `[bwd, id, fwd, ..., fwd^{p-2}]` for `p >= 2`.
pub fn mixed_specs(p: usize) -> Vec<OperatorSpec> {
    let mut v = vec![OperatorSpec::backward(1, 0), OperatorSpec::identity(0)];
    v.extend((1..p.saturating_sub(1)).map(|k| OperatorSpec::forward(k as u32, 0)));
    v
}

/// `[avg+, fwd]` with period 2.
pub fn forward_average_specs() -> Vec<OperatorSpec> {
    vec![
        OperatorSpec::new(OperatorKind::ForwardAvg, 0),
        OperatorSpec::forward(1, 0),
    ]
}

/// `[id, avg0, diff0]` with period 3.
pub fn central_specs() -> Vec<OperatorSpec> {
    vec![
        OperatorSpec::identity(0),
        OperatorSpec::new(OperatorKind::CentralAvg, 0),
        OperatorSpec::new(OperatorKind::CentralDiff, 0),
    ]
}

/// Channels of one sampling run: `channels[j][n - window.0]` is operator `j`
/// applied at `a + p n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub a: f64,
    pub period: usize,
    pub window: (i64, i64),
    pub labels: Vec<String>,
    pub channels: Vec<Vec<f64>>,
}

impl SampleSet {
    pub fn get(&self, channel: usize, n: i64) -> f64 {
        self.channels[channel][(n - self.window.0) as usize]
    }

    pub fn indices(&self) -> RangeInclusive<i64> {
        self.window.0..=self.window.1
    }

    pub fn total_samples(&self) -> usize {
        self.channels.iter().map(Vec::len).sum()
    }

    /// `Σ_j Σ_n |c_j[n]|²`.
    pub fn energy(&self) -> f64 {
        self.channels.iter().flatten().map(|v| v * v).sum()
    }
}

/// Samples an arbitrary function through the operators.
pub fn sample_function<F: Fn(f64) -> f64>(
    f: F,
    specs: &[OperatorSpec],
    a: f64,
    period: usize,
    window: RangeInclusive<i64>,
) -> SampleSet {
    let (lo, hi) = (*window.start(), *window.end());
    let channels = specs
        .iter()
        .map(|spec| {
            (lo..=hi)
                .map(|n| spec.apply(&f, a + (period as i64 * n) as f64))
                .collect()
        })
        .collect();
    SampleSet {
        a,
        period,
        window: (lo, hi),
        labels: specs.iter().map(|s| s.to_string()).collect(),
        channels,
    }
}

pub fn apply_operators(
    f: &Signal,
    specs: &[OperatorSpec],
    a: f64,
    period: usize,
    window: RangeInclusive<i64>,
) -> SampleSet {
    sample_function(|t| f.eval(t), specs, a, period, window)
}

/// 2D channels; `channels[j0 * q1 + j1]` holds the row-major
/// `(n, m)` grid of `Δ^{(j0), (j1)} f(a + p0 n, b + p1 m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet2d {
    pub offsets: (f64, f64),
    pub periods: (usize, usize),
    pub windows: ((i64, i64), (i64, i64)),
    pub labels: Vec<String>,
    pub channels: Vec<Vec<f64>>,
}

impl SampleSet2d {
    pub fn width(&self) -> usize {
        (self.windows.1 .1 - self.windows.1 .0 + 1) as usize
    }

    pub fn get(&self, channel: usize, n: i64, m: i64) -> f64 {
        let (w0, w1) = self.windows;
        self.channels[channel][(n - w0.0) as usize * self.width() + (m - w1.0) as usize]
    }
}

/// Samples a function of two variables through tensor-product operators:
/// the axis-1 operator acts first, then the axis-0 operator.
pub fn sample_function_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    specs: (&[OperatorSpec], &[OperatorSpec]),
    offsets: (f64, f64),
    periods: (usize, usize),
    windows: (RangeInclusive<i64>, RangeInclusive<i64>),
) -> SampleSet2d {
    let (w0, w1) = ((*windows.0.start(), *windows.0.end()), (*windows.1.start(), *windows.1.end()));
    let mut channels = Vec::new();
    let mut labels = Vec::new();
    for s0 in specs.0 {
        for s1 in specs.1 {
            labels.push(format!("{s0} ⊗ {s1}"));
            let mut grid = Vec::new();
            for n in w0.0..=w0.1 {
                let t = offsets.0 + (periods.0 as i64 * n) as f64;
                for m in w1.0..=w1.1 {
                    let s = offsets.1 + (periods.1 as i64 * m) as f64;
                    let inner = |tt: f64| s1.apply(&|ss: f64| f(tt, ss), s);
                    grid.push(s0.apply(&inner, t));
                }
            }
            channels.push(grid);
        }
    }
    SampleSet2d {
        offsets,
        periods,
        windows: (w0, w1),
        labels,
        channels,
    }
}

pub fn apply_operators_2d(
    f: &Signal2d,
    specs: (&[OperatorSpec], &[OperatorSpec]),
    offsets: (f64, f64),
    periods: (usize, usize),
    windows: (RangeInclusive<i64>, RangeInclusive<i64>),
) -> SampleSet2d {
    sample_function_2d(|t, s| f.eval(t, s), specs, offsets, periods, windows)
}
