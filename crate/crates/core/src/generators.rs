//! Generators of shift-invariant spaces and their Zak kernels.
//!
//! A generator `φ` spans `V_φ = { Σ a_n φ(t - n) }`. Every function in the
//! space is recovered from an `L²(0,1)` symbol `F` through
//! `f(t) = <F, K_t>`, where `K_t(x) = Σ_n conj(φ(t - n)) e^{-2πinx}` is the
//! (conjugated) Zak transform of `φ`. Stability of sampling at offset `a`
//! is governed by the essential bounds of `|K_a|`, which we estimate on a
//! uniform grid of `[0,1)`.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default truncation radius for the sinc generator.
pub const DEFAULT_SINC_RADIUS: u32 = 64;

/// Default tolerance on the grid estimate of `ess inf |K_a|`.
pub const DEFAULT_RIESZ_TOL: f64 = 1e-6;

/// Cardinal B-spline `N_m` of order `m` (degree `m - 1`), supported on `[0, m]`.
///
/// `N_1` is the indicator of `[0, 1)`; higher orders follow the recursion
/// `N_m(t) = (t N_{m-1}(t) + (m - t) N_{m-1}(t - 1)) / (m - 1)`.
pub fn bspline_eval(m: i64, t: f64) -> Result<f64> {
    if m < 1 {
        return Err(Error::InvalidOrder(m));
    }
    Ok(bspline_unchecked(m as usize, t))
}

pub(crate) fn bspline_unchecked(m: usize, t: f64) -> f64 {
    if !(0.0..m as f64).contains(&t) {
        return 0.0;
    }
    // b[j] holds N_k(t - j) for the current order k.
    let mut b: Vec<f64> = (0..m)
        .map(|j| {
            let u = t - j as f64;
            if (0.0..1.0).contains(&u) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    for k in 2..=m {
        let kf = k as f64;
        for j in 0..=(m - k) {
            let u = t - j as f64;
            b[j] = (u * b[j] + (kf - u) * b[j + 1]) / (kf - 1.0);
        }
    }
    b[0]
}

/// Generator `φ` of a principal shift-invariant space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Generator {
    /// Cardinal B-spline of the given order, support `[0, order]`.
    Bspline { order: u32 },
    /// `sin(πt)/(πt)`; series over shifts are cut at `|n| <= radius`.
    Sinc { radius: u32 },
    /// Piecewise-linear interpolant of `values` on `start + i*spacing`,
    /// zero outside the tabulated interval.
    Tabulated {
        start: f64,
        spacing: f64,
        values: Vec<f64>,
    },
}

impl Generator {
    pub fn bspline(order: i64) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidOrder(order));
        }
        Ok(Generator::Bspline {
            order: order as u32,
        })
    }

    pub fn sinc(radius: u32) -> Result<Self> {
        if radius == 0 {
            return Err(Error::InvalidGenerator(
                "sinc truncation radius must be positive".into(),
            ));
        }
        Ok(Generator::Sinc { radius })
    }

    pub fn tabulated(start: f64, spacing: f64, values: Vec<f64>) -> Result<Self> {
        let g = Generator::Tabulated {
            start,
            spacing,
            values,
        };
        g.validate()?;
        Ok(g)
    }

    /// Checks the invariants that deserialization cannot enforce.
    pub fn validate(&self) -> Result<()> {
        match self {
            Generator::Bspline { order } if *order < 1 => Err(Error::InvalidOrder(*order as i64)),
            Generator::Sinc { radius } if *radius == 0 => Err(Error::InvalidGenerator(
                "sinc truncation radius must be positive".into(),
            )),
            Generator::Tabulated {
                start,
                spacing,
                values,
            } => {
                if !(spacing.is_finite() && *spacing > 0.0) {
                    return Err(Error::InvalidGenerator(format!(
                        "tabulated spacing must be positive, got {spacing}"
                    )));
                }
                if !start.is_finite() {
                    return Err(Error::InvalidGenerator("tabulated start must be finite".into()));
                }
                if values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidGenerator(
                        "tabulated generator needs at least two finite values".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Generator::Bspline { order } => bspline_unchecked(*order as usize, t),
            Generator::Sinc { .. } => sinc(t),
            Generator::Tabulated {
                start,
                spacing,
                values,
            } => {
                let u = (t - start) / spacing;
                let last = (values.len() - 1) as f64;
                if !(0.0..=last).contains(&u) {
                    return 0.0;
                }
                let i = (u.floor() as usize).min(values.len() - 2);
                let frac = u - i as f64;
                values[i] * (1.0 - frac) + values[i + 1] * frac
            }
        }
    }

    /// Interval outside of which `φ` vanishes (or is treated as vanishing,
    /// for the truncated sinc).
    pub fn support(&self) -> (f64, f64) {
        match self {
            Generator::Bspline { order } => (0.0, *order as f64),
            Generator::Sinc { radius } => (-(*radius as f64), *radius as f64),
            Generator::Tabulated {
                start,
                spacing,
                values,
            } => (*start, start + spacing * (values.len() - 1) as f64),
        }
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self, Generator::Sinc { .. })
    }

    /// Integer shifts `n` for which `φ(t - n)` can be nonzero.
    pub fn shifts_near(&self, t: f64) -> RangeInclusive<i64> {
        let (lo, hi) = self.support();
        (t - hi).ceil() as i64..=(t - lo).floor() as i64
    }

    /// `<φ, φ(· - k)>` in `L²(ℝ)`.
    pub fn autocorrelation(&self, k: i64) -> f64 {
        match self {
            Generator::Bspline { order } => {
                let m = *order as usize;
                bspline_unchecked(2 * m, m as f64 + k as f64)
            }
            Generator::Sinc { .. } => {
                if k == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Generator::Tabulated {
                start,
                spacing,
                values,
            } => {
                // Product of two piecewise-linear functions is piecewise
                // quadratic; Simpson on each half-cell of the merged knot set
                // is exact.
                let (lo, hi) = (*start, start + spacing * (values.len() - 1) as f64);
                let shifted_lo = lo + k as f64;
                let a = lo.max(shifted_lo);
                let b = hi.min(hi + k as f64);
                if a >= b {
                    return 0.0;
                }
                let mut knots: Vec<f64> = Vec::new();
                for i in 0..values.len() {
                    let x = start + spacing * i as f64;
                    for y in [x, x + k as f64] {
                        if y > a && y < b {
                            knots.push(y);
                        }
                    }
                }
                knots.push(a);
                knots.push(b);
                knots.sort_by(f64::total_cmp);
                knots.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
                knots
                    .windows(2)
                    .map(|w| {
                        let (x0, x1) = (w[0], w[1]);
                        let xm = 0.5 * (x0 + x1);
                        let f = |x: f64| self.eval(x) * self.eval(x - k as f64);
                        (x1 - x0) / 6.0 * (f(x0) + 4.0 * f(xm) + f(x1))
                    })
                    .sum()
            }
        }
    }

    /// Span of integer lags with nonzero autocorrelation.
    pub(crate) fn autocorrelation_reach(&self) -> i64 {
        let (lo, hi) = self.support();
        (hi - lo).ceil() as i64
    }
}

pub fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        let x = PI * t;
        x.sin() / x
    }
}

/// `e^{-2πi n j / G}`, reduced modulo `G` first so large `n` stays exact.
pub(crate) fn unit_phase(n: i64, j: usize, grid: usize) -> Complex64 {
    let g = grid as i64;
    let r = (n.rem_euclid(g) * j as i64).rem_euclid(g);
    Complex64::from_polar(1.0, -2.0 * PI * r as f64 / grid as f64)
}

/// Grid evaluation of `K_t(x_j) = Σ_n conj(φ(t - n)) e^{-2πinx_j}`, `x_j = j/G`,
/// for any real `t`.
pub fn zak_series(gen: &Generator, t: f64, grid: usize) -> Vec<Complex64> {
    let terms: Vec<(i64, f64)> = gen
        .shifts_near(t)
        .map(|n| (n, gen.eval(t - n as f64)))
        .filter(|(_, v)| *v != 0.0)
        .collect();
    (0..grid)
        .map(|j| {
            terms
                .iter()
                .map(|&(n, v)| unit_phase(n, j, grid) * v)
                .sum()
        })
        .collect()
}

/// `K_a` sampled on a uniform grid of `[0, 1)` together with grid estimates
/// of `ess inf |K_a|` and `ess sup |K_a|`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZakKernel {
    pub a: f64,
    pub values: Vec<Complex64>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    argmin: usize,
}

impl ZakKernel {
    fn from_values(a: f64, values: Vec<Complex64>) -> Self {
        let mut lower_bound = f64::INFINITY;
        let mut upper_bound = 0.0f64;
        let mut argmin = 0;
        for (j, v) in values.iter().enumerate() {
            let m = v.norm();
            if m < lower_bound {
                lower_bound = m;
                argmin = j;
            }
            upper_bound = upper_bound.max(m);
        }
        ZakKernel {
            a,
            values,
            lower_bound,
            upper_bound,
            argmin,
        }
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 / self.grid_size() as f64
    }

    /// Grid point where `|K_a|` is smallest.
    pub fn argmin(&self) -> f64 {
        self.x(self.argmin)
    }

    /// `K_{a+m}` obtained from `K_a` through `K_{t+m}(x) = e^{-2πimx} K_t(x)`.
    pub fn modulated(&self, m: i64) -> Vec<Complex64> {
        let g = self.grid_size();
        self.values
            .iter()
            .enumerate()
            .map(|(j, v)| unit_phase(m, j, g) * v)
            .collect()
    }
}

pub fn zak_kernel(gen: &Generator, a: f64, grid: usize) -> Result<ZakKernel> {
    gen.validate()?;
    if !(0.0..1.0).contains(&a) {
        return Err(Error::Precondition(format!("offset a = {a} must lie in [0, 1)")));
    }
    if grid < 2 {
        return Err(Error::Precondition(format!("grid size {grid} must be at least 2")));
    }
    Ok(ZakKernel::from_values(a, zak_series(gen, a, grid)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RieszStatus {
    Valid { lower: f64, upper: f64 },
    Degenerate { witness: f64, modulus: f64 },
}

impl RieszStatus {
    pub fn is_valid(&self) -> bool {
        matches!(self, RieszStatus::Valid { .. })
    }

    pub fn into_result(self) -> Result<(f64, f64)> {
        match self {
            RieszStatus::Valid { lower, upper } => Ok((lower, upper)),
            RieszStatus::Degenerate { witness, modulus } => {
                Err(Error::DegenerateKernel { witness, modulus })
            }
        }
    }
}

/// Grid test of `0 < ||K_a||_0 <= ||K_a||_∞ < ∞`.
pub fn riesz_condition(kernel: &ZakKernel, tol: f64) -> RieszStatus {
    if kernel.lower_bound > tol && kernel.upper_bound.is_finite() {
        RieszStatus::Valid {
            lower: kernel.lower_bound,
            upper: kernel.upper_bound,
        }
    } else {
        RieszStatus::Degenerate {
            witness: kernel.argmin(),
            modulus: kernel.lower_bound,
        }
    }
}

/// Grid diagnostics for the standing hypotheses on `φ`: continuity and
/// boundedness of `Σ_n |φ(t - n)|²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HypothesisReport {
    /// max over `t ∈ [0,1)` grid of `Σ_n |φ(t - n)|²`.
    pub energy_max: f64,
    /// largest jump `|φ(t + h) - φ(t)|` between neighbouring grid points.
    pub max_grid_jump: f64,
}

pub fn check_hypotheses(gen: &Generator, steps: usize) -> HypothesisReport {
    let energy_max = (0..steps)
        .map(|i| {
            let t = i as f64 / steps as f64;
            gen.shifts_near(t)
                .map(|n| gen.eval(t - n as f64).powi(2))
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let (lo, hi) = gen.support();
    let h = 1.0 / steps as f64;
    let count = ((hi - lo) / h).ceil() as usize + 2;
    let mut max_grid_jump = 0.0f64;
    let mut prev = gen.eval(lo - h);
    for i in 0..=count {
        let v = gen.eval(lo + i as f64 * h);
        max_grid_jump = max_grid_jump.max((v - prev).abs());
        prev = v;
    }
    HypothesisReport {
        energy_max,
        max_grid_jump,
    }
}

/// Generator `Φ(t, s)` of a shift-invariant subspace of `L²(ℝ²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Generator2d {
    /// `Φ(t, s) = φ(t) ψ(s)`.
    Product { first: Generator, second: Generator },
    /// Bilinear interpolant of a row-major `rows x cols` table on
    /// `(start.0 + i*spacing.0, start.1 + j*spacing.1)`.
    Tabulated {
        start: (f64, f64),
        spacing: (f64, f64),
        rows: usize,
        cols: usize,
        values: Vec<f64>,
    },
}

impl Generator2d {
    pub fn product(first: Generator, second: Generator) -> Self {
        Generator2d::Product { first, second }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Generator2d::Product { first, second } => {
                first.validate()?;
                second.validate()
            }
            Generator2d::Tabulated {
                spacing,
                rows,
                cols,
                values,
                ..
            } => {
                if *rows < 2 || *cols < 2 || values.len() != rows * cols {
                    return Err(Error::InvalidGenerator(format!(
                        "tabulated 2D generator needs rows, cols >= 2 and rows*cols values, got {rows}x{cols} with {}",
                        values.len()
                    )));
                }
                if !(spacing.0 > 0.0 && spacing.1 > 0.0) {
                    return Err(Error::InvalidGenerator("2D spacing must be positive".into()));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        match self {
            Generator2d::Product { first, second } => {
                let u = first.eval(t);
                if u == 0.0 {
                    0.0
                } else {
                    u * second.eval(s)
                }
            }
            Generator2d::Tabulated {
                start,
                spacing,
                rows,
                cols,
                values,
            } => {
                let u = (t - start.0) / spacing.0;
                let v = (s - start.1) / spacing.1;
                if !(0.0..=(*rows - 1) as f64).contains(&u) || !(0.0..=(*cols - 1) as f64).contains(&v)
                {
                    return 0.0;
                }
                let i = (u.floor() as usize).min(rows - 2);
                let j = (v.floor() as usize).min(cols - 2);
                let (fu, fv) = (u - i as f64, v - j as f64);
                let at = |r: usize, c: usize| values[r * cols + c];
                (1.0 - fu) * ((1.0 - fv) * at(i, j) + fv * at(i, j + 1))
                    + fu * ((1.0 - fv) * at(i + 1, j) + fv * at(i + 1, j + 1))
            }
        }
    }

    /// Support box `((t_lo, t_hi), (s_lo, s_hi))`.
    pub fn support(&self) -> ((f64, f64), (f64, f64)) {
        match self {
            Generator2d::Product { first, second } => (first.support(), second.support()),
            Generator2d::Tabulated {
                start,
                spacing,
                rows,
                cols,
                ..
            } => (
                (start.0, start.0 + spacing.0 * (*rows - 1) as f64),
                (start.1, start.1 + spacing.1 * (*cols - 1) as f64),
            ),
        }
    }

    pub fn shifts_near(&self, t: f64, s: f64) -> (RangeInclusive<i64>, RangeInclusive<i64>) {
        let ((tl, th), (sl, sh)) = self.support();
        (
            (t - th).ceil() as i64..=(t - tl).floor() as i64,
            (s - sh).ceil() as i64..=(s - sl).floor() as i64,
        )
    }
}

/// `K_{a,b}(x, y) = Σ_{n,m} conj(Φ(a-n, b-m)) e^{-2πinx} e^{-2πimy}` on a
/// `G x G` grid, stored row-major with `x` as the slow index.
#[derive(Clone, Debug, PartialEq)]
pub struct ZakKernel2d {
    pub a: f64,
    pub b: f64,
    pub grid: usize,
    pub values: Vec<Complex64>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    argmin: usize,
}

impl ZakKernel2d {
    pub fn argmin(&self) -> (f64, f64) {
        let g = self.grid as f64;
        ((self.argmin / self.grid) as f64 / g, (self.argmin % self.grid) as f64 / g)
    }

    pub fn riesz_condition(&self, tol: f64) -> RieszStatus {
        if self.lower_bound > tol && self.upper_bound.is_finite() {
            RieszStatus::Valid {
                lower: self.lower_bound,
                upper: self.upper_bound,
            }
        } else {
            // Witness reported as the x coordinate; y is available via argmin().
            RieszStatus::Degenerate {
                witness: self.argmin().0,
                modulus: self.lower_bound,
            }
        }
    }
}

pub fn zak_kernel_2d(gen: &Generator2d, a: f64, b: f64, grid: usize) -> Result<ZakKernel2d> {
    gen.validate()?;
    if !(0.0..1.0).contains(&a) || !(0.0..1.0).contains(&b) {
        return Err(Error::Precondition(format!(
            "offsets (a, b) = ({a}, {b}) must lie in [0, 1)^2"
        )));
    }
    if grid < 2 {
        return Err(Error::Precondition(format!("grid size {grid} must be at least 2")));
    }
    let (ns, ms) = gen.shifts_near(a, b);
    let mut terms = Vec::new();
    for n in ns {
        for m in ms.clone() {
            let v = gen.eval(a - n as f64, b - m as f64);
            if v != 0.0 {
                terms.push((n, m, v));
            }
        }
    }
    let mut values: Vec<Complex64> = Vec::with_capacity(grid * grid);
    for jx in 0..grid {
        for jy in 0..grid {
            values.push(
                terms
                    .iter()
                    .map(|&(n, m, v)| unit_phase(n, jx, grid) * unit_phase(m, jy, grid) * v)
                    .sum(),
            );
        }
    }
    let (mut lower_bound, mut upper_bound, mut argmin) = (f64::INFINITY, 0.0f64, 0);
    for (i, v) in values.iter().enumerate() {
        let m = v.norm();
        if m < lower_bound {
            lower_bound = m;
            argmin = i;
        }
        upper_bound = upper_bound.max(m);
    }
    Ok(ZakKernel2d {
        a,
        b,
        grid,
        values,
        lower_bound,
        upper_bound,
        argmin,
    })
}
