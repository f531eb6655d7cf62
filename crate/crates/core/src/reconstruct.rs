//! Reconstruction engines.
//!
//! A reconstruction `f̂(t) = Σ_n Σ_j c_j[n] T_{a,j}(t - pn)` is itself an
//! element of `V_φ`. The engine first accumulates the channel samples on the
//! integer shifts they hit (`pn + s` for every kernel combo), convolves that
//! sequence with the `S_a` coefficients to obtain the `φ`-coefficients of
//! `f̂` on the indices the evaluation grid needs, and only then evaluates.

use std::ops::RangeInclusive;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{riesz_condition, zak_kernel, Generator, Generator2d, ZakKernel, DEFAULT_RIESZ_TOL};
use crate::kernels::{
    assemble_kernels, assemble_kernels_2d, shannon_kernel, BaseKernel2d, SamplingKernelSet,
    SamplingKernelSet2d, ShannonKernel,
};
use crate::riesz::{invert_scheme, left_inverse, DualMatrix, DualMode, SchemeMatrix};
use crate::schemes::{apply_operators, apply_operators_2d, scheme_matrix, OperatorSpec, SampleSet, SampleSet2d};

/// `f(t) = Σ_i coeffs[i] φ(t - start - i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub generator: Generator,
    pub start: i64,
    pub coeffs: Vec<f64>,
}

impl Signal {
    pub fn new(generator: Generator, start: i64, coeffs: Vec<f64>) -> Self {
        Signal {
            generator,
            start,
            coeffs,
        }
    }

    pub fn coeff(&self, n: i64) -> f64 {
        let i = n - self.start;
        if i < 0 || i as usize >= self.coeffs.len() {
            0.0
        } else {
            self.coeffs[i as usize]
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let end = self.start + self.coeffs.len() as i64 - 1;
        let range = self.generator.shifts_near(t);
        ((*range.start()).max(self.start)..=(*range.end()).min(end))
            .map(|n| self.coeff(n) * self.generator.eval(t - n as f64))
            .sum()
    }

    /// `||f||²_{L²}` through the Gram matrix `<φ(· - i), φ(· - j)>`.
    pub fn norm_sq(&self) -> f64 {
        let reach = self.generator.autocorrelation_reach();
        let r: Vec<f64> = (0..=reach).map(|k| self.generator.autocorrelation(k)).collect();
        let n = self.coeffs.len();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = (i as i64 - j as i64).unsigned_abs() as usize;
                if d < r.len() {
                    acc += self.coeffs[i] * self.coeffs[j] * r[d];
                }
            }
        }
        acc
    }
}

/// `f(t, s) = Σ coeffs[i][j] Φ(t - start.0 - i, s - start.1 - j)`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Signal2d {
    pub generator: Generator2d,
    pub start: (i64, i64),
    pub rows: usize,
    pub cols: usize,
    pub coeffs: Vec<f64>,
}

impl Signal2d {
    pub fn new(generator: Generator2d, start: (i64, i64), rows: usize, cols: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} coefficients for a {rows}x{cols} signal",
                coeffs.len()
            )));
        }
        Ok(Signal2d {
            generator,
            start,
            rows,
            cols,
            coeffs,
        })
    }

    pub fn coeff(&self, n: i64, m: i64) -> f64 {
        let (i, j) = (n - self.start.0, m - self.start.1);
        if i < 0 || j < 0 || i as usize >= self.rows || j as usize >= self.cols {
            0.0
        } else {
            self.coeffs[i as usize * self.cols + j as usize]
        }
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        let (ns, ms) = self.generator.shifts_near(t, s);
        let n_end = self.start.0 + self.rows as i64 - 1;
        let m_end = self.start.1 + self.cols as i64 - 1;
        let mut acc = 0.0;
        for n in (*ns.start()).max(self.start.0)..=(*ns.end()).min(n_end) {
            for m in (*ms.start()).max(self.start.1)..=(*ms.end()).min(m_end) {
                acc += self.coeff(n, m) * self.generator.eval(t - n as f64, s - m as f64);
            }
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub max_abs_error: f64,
    /// `sqrt(Σ e(t)² h)` over the evaluation grid with spacing `h`.
    pub l2_grid_error: f64,
    pub points: usize,
    pub samples_per_channel: Vec<usize>,
    pub radius: usize,
}

impl ReconstructionReport {
    pub fn compare(values: &[f64], reference: &[f64], spacing: f64, samples_per_channel: Vec<usize>, radius: usize) -> Self {
        let errs = values.iter().zip(reference).map(|(v, r)| (v - r).abs());
        let max_abs_error = errs.clone().fold(0.0, f64::max);
        let l2_grid_error = (errs.map(|e| e * e).sum::<f64>() * spacing).sqrt();
        ReconstructionReport {
            max_abs_error,
            l2_grid_error,
            points: values.len(),
            samples_per_channel,
            radius,
        }
    }
}

/// Indices `i` with `φ(t - i)` possibly nonzero for some `t` in the range.
fn needed_indices(support: (f64, f64), t_min: f64, t_max: f64) -> (i64, i64) {
    ((t_min - support.1).ceil() as i64, (t_max - support.0).floor() as i64)
}

fn sample_window(needed: (i64, i64), radius: i64, shifts: (i64, i64), period: usize) -> (i64, i64) {
    let p = period as i64;
    (
        (needed.0 - radius - shifts.1).div_euclid(p) + i64::from((needed.0 - radius - shifts.1).rem_euclid(p) != 0),
        (needed.1 + radius - shifts.0).div_euclid(p),
    )
}

fn eval_range(points: &[f64]) -> Option<(f64, f64)> {
    let lo = points.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = points.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo.is_finite() && hi.is_finite()).then_some((lo, hi))
}

/// Sample indices `n` whose terms can reach an evaluation point in
/// `[t_min, t_max]` through the truncated kernels.
pub fn required_window(ks: &SamplingKernelSet, t_min: f64, t_max: f64) -> RangeInclusive<i64> {
    let needed = needed_indices(ks.base.generator.support(), t_min, t_max);
    let (lo, hi) = sample_window(needed, ks.base.radius as i64, ks.shift_range(), ks.period);
    lo..=hi
}

fn check_channels(samples: &SampleSet, ks: &SamplingKernelSet) -> Result<()> {
    if samples.channels.len() != ks.channels() {
        return Err(Error::Dimension(format!(
            "{} sample channels for {} kernels",
            samples.channels.len(),
            ks.channels()
        )));
    }
    if samples.period != ks.period {
        return Err(Error::Dimension(format!(
            "samples have period {}, kernels period {}",
            samples.period, ks.period
        )));
    }
    if (samples.a - ks.base.a).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "samples taken at a = {}, kernels built for a = {}",
            samples.a, ks.base.a
        )));
    }
    Ok(())
}

/// `φ`-coefficients of the reconstruction over `needed`, as a dense vector.
fn synthesize_coeffs(samples: &SampleSet, ks: &SamplingKernelSet, needed: (i64, i64)) -> Result<Vec<f64>> {
    let radius = ks.base.radius as i64;
    let shifts = ks.shift_range();
    let (n_lo, n_hi) = sample_window(needed, radius, shifts, ks.period);
    if n_lo < samples.window.0 || n_hi > samples.window.1 {
        return Err(Error::Coverage {
            have_lo: samples.window.0,
            have_hi: samples.window.1,
            need_lo: n_lo,
            need_hi: n_hi,
        });
    }
    let p = ks.period as i64;
    // impulses at u = p n + s
    let u0 = p * n_lo + shifts.0;
    let u1 = p * n_hi + shifts.1;
    let mut impulses = vec![0.0; (u1 - u0 + 1).max(0) as usize];
    for n in n_lo..=n_hi {
        for (j, combo) in ks.combos.iter().enumerate() {
            let c = samples.get(j, n);
            if c == 0.0 {
                continue;
            }
            for &(s, w) in combo {
                impulses[(p * n + s - u0) as usize] += c * w;
            }
        }
    }
    Ok((needed.0..=needed.1)
        .map(|i| {
            let lo = (i - radius).max(u0);
            let hi = (i + radius).min(u1);
            (lo..=hi)
                .map(|u| impulses[(u - u0) as usize] * ks.base.coeff(i - u))
                .sum()
        })
        .collect())
}

/// Reconstructs `f` on `eval` from its channel samples.
pub fn reconstruct_1d(samples: &SampleSet, ks: &SamplingKernelSet, eval: &[f64]) -> Result<Vec<f64>> {
    check_channels(samples, ks)?;
    let Some((t_min, t_max)) = eval_range(eval) else {
        return Ok(Vec::new());
    };
    let gen = &ks.base.generator;
    let needed = needed_indices(gen.support(), t_min, t_max);
    let coeffs = synthesize_coeffs(samples, ks, needed)?;
    Ok(eval
        .iter()
        .map(|&t| {
            let r = gen.shifts_near(t);
            ((*r.start()).max(needed.0)..=(*r.end()).min(needed.1))
                .map(|i| coeffs[(i - needed.0) as usize] * gen.eval(t - i as f64))
                .sum()
        })
        .collect())
}

/// Term-by-term evaluation of `Σ_n Σ_j c_j[n] T_{a,j}(t - pn)` over the
/// whole sample window. Slow; used as an independent check of the engine.
pub fn reconstruct_1d_direct(samples: &SampleSet, ks: &SamplingKernelSet, eval: &[f64]) -> Result<Vec<f64>> {
    check_channels(samples, ks)?;
    let p = ks.period as i64;
    Ok(eval
        .iter()
        .map(|&t| {
            samples
                .indices()
                .map(|n| {
                    (0..ks.channels())
                        .map(|j| samples.get(j, n) * ks.eval(j, t - (p * n) as f64))
                        .sum::<f64>()
                })
                .sum()
        })
        .collect())
}

/// Reconstruction from a redundant (q > p) channel set. A square scheme is
/// routed to the basis engine.
pub fn frame_reconstruct_1d(samples: &SampleSet, ks: &SamplingKernelSet, eval: &[f64]) -> Result<Vec<f64>> {
    if ks.mode == DualMode::Basis && ks.channels() != ks.period {
        return Err(Error::Precondition(
            "basis-mode kernels must have one channel per partition offset".into(),
        ));
    }
    reconstruct_1d(samples, ks, eval)
}

/// Sample index windows for a 2D evaluation box.
pub fn required_window_2d(
    ks: &SamplingKernelSet2d,
    t_range: (f64, f64),
    s_range: (f64, f64),
) -> (RangeInclusive<i64>, RangeInclusive<i64>) {
    let (sup_t, sup_s) = ks.base.generator().support();
    let (r0, r1) = ks.base.radius();
    let (sh0, sh1) = ks.shift_ranges();
    let w0 = sample_window(needed_indices(sup_t, t_range.0, t_range.1), r0 as i64, sh0, ks.periods.0);
    let w1 = sample_window(needed_indices(sup_s, s_range.0, s_range.1), r1 as i64, sh1, ks.periods.1);
    (w0.0..=w0.1, w1.0..=w1.1)
}

pub fn reconstruct_2d(samples: &SampleSet2d, ks: &SamplingKernelSet2d, eval: &[(f64, f64)]) -> Result<Vec<f64>> {
    if samples.channels.len() != ks.combos.len() || samples.periods != ks.periods {
        return Err(Error::Dimension(format!(
            "{} sample channels with periods {:?} for {} kernels with periods {:?}",
            samples.channels.len(),
            samples.periods,
            ks.combos.len(),
            ks.periods
        )));
    }
    let offsets = ks.base.offsets();
    if (samples.offsets.0 - offsets.0).abs() > 1e-12 || (samples.offsets.1 - offsets.1).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "samples taken at {:?}, kernels built for {:?}",
            samples.offsets, offsets
        )));
    }
    let ts: Vec<f64> = eval.iter().map(|e| e.0).collect();
    let ss: Vec<f64> = eval.iter().map(|e| e.1).collect();
    let (Some(tr), Some(sr)) = (eval_range(&ts), eval_range(&ss)) else {
        return Ok(Vec::new());
    };
    let gen = ks.base.generator();
    let (sup_t, sup_s) = gen.support();
    let need_t = needed_indices(sup_t, tr.0, tr.1);
    let need_s = needed_indices(sup_s, sr.0, sr.1);
    let (w0, w1) = required_window_2d(ks, tr, sr);
    let ((h0lo, h0hi), (h1lo, h1hi)) = samples.windows;
    if *w0.start() < h0lo || *w0.end() > h0hi {
        return Err(Error::Coverage {
            have_lo: h0lo,
            have_hi: h0hi,
            need_lo: *w0.start(),
            need_hi: *w0.end(),
        });
    }
    if *w1.start() < h1lo || *w1.end() > h1hi {
        return Err(Error::Coverage {
            have_lo: h1lo,
            have_hi: h1hi,
            need_lo: *w1.start(),
            need_hi: *w1.end(),
        });
    }

    let (p0, p1) = (ks.periods.0 as i64, ks.periods.1 as i64);
    let (sh0, sh1) = ks.shift_ranges();
    let (u0, u1) = (p0 * w0.start() + sh0.0, p0 * w0.end() + sh0.1);
    let (v0, v1) = (p1 * w1.start() + sh1.0, p1 * w1.end() + sh1.1);
    let vw = (v1 - v0 + 1) as usize;
    let mut impulses = vec![0.0; (u1 - u0 + 1) as usize * vw];
    for n in w0.clone() {
        for m in w1.clone() {
            for (j, combo) in ks.combos.iter().enumerate() {
                let c = samples.get(j, n, m);
                if c == 0.0 {
                    continue;
                }
                for &((s0, s1), w) in combo {
                    let (u, v) = (p0 * n + s0, p1 * m + s1);
                    impulses[(u - u0) as usize * vw + (v - v0) as usize] += c * w;
                }
            }
        }
    }

    let (r0, r1) = ks.base.radius();
    let (r0, r1) = (r0 as i64, r1 as i64);
    let gw = (need_s.1 - need_s.0 + 1) as usize;
    let mut coeffs = vec![0.0; (need_t.1 - need_t.0 + 1) as usize * gw];
    for i in need_t.0..=need_t.1 {
        for l in need_s.0..=need_s.1 {
            let mut acc = 0.0;
            for u in (i - r0).max(u0)..=(i + r0).min(u1) {
                let row = (u - u0) as usize * vw;
                for v in (l - r1).max(v0)..=(l + r1).min(v1) {
                    let d = impulses[row + (v - v0) as usize];
                    if d != 0.0 {
                        acc += d * ks.base.coeff(i - u, l - v);
                    }
                }
            }
            coeffs[(i - need_t.0) as usize * gw + (l - need_s.0) as usize] = acc;
        }
    }

    Ok(eval
        .iter()
        .map(|&(t, s)| {
            let (ns, ms) = gen.shifts_near(t, s);
            let mut acc = 0.0;
            for i in (*ns.start()).max(need_t.0)..=(*ns.end()).min(need_t.1) {
                for l in (*ms.start()).max(need_s.0)..=(*ms.end()).min(need_s.1) {
                    acc += coeffs[(i - need_t.0) as usize * gw + (l - need_s.0) as usize]
                        * gen.eval(t - i as f64, s - l as f64);
                }
            }
            acc
        })
        .collect())
}

/// Numerically derived constants with `A ||f||² <= Σ_j Σ_n |c_j[n]|² <= B ||f||²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Combines the singular values of the scheme matrix, the grid bounds of
/// `|K_a|`, and the bounds of the Gram symbol `Σ_k <φ, φ(· - k)> e^{2πikx}`.
pub fn stability_bounds(scheme: &SchemeMatrix, kernel: &ZakKernel, generator: &Generator) -> Result<StabilityBounds> {
    let (k_lo, k_hi) = riesz_condition(kernel, DEFAULT_RIESZ_TOL).into_result()?;
    let sv = scheme.matrix.clone().svd(false, false).singular_values;
    let s_min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let s_max = sv.iter().copied().fold(0.0, f64::max);
    let reach = generator.autocorrelation_reach();
    let r: Vec<f64> = (0..=reach).map(|k| generator.autocorrelation(k)).collect();
    let g = kernel.grid_size();
    let (mut g_lo, mut g_hi) = (f64::INFINITY, 0.0f64);
    for j in 0..g {
        let x = j as f64 / g as f64;
        let v = r[0]
            + 2.0
                * r.iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, rk)| rk * (2.0 * std::f64::consts::PI * k as f64 * x).cos())
                    .sum::<f64>();
        g_lo = g_lo.min(v);
        g_hi = g_hi.max(v);
    }
    Ok(StabilityBounds {
        lower: s_min * s_min * k_lo * k_lo / g_hi,
        upper: s_max * s_max * k_hi * k_hi / g_lo,
    })
}

/// How the dual of a scheme is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum DualChoice {
    /// `M⁻¹` for square schemes, the Moore–Penrose inverse otherwise.
    Canonical,
    /// `M† + U (I - M M†)` with the given p x q matrix `U`.
    LeftInverse(DMatrix<f64>),
}

/// Everything needed to sample and reconstruct through one scheme.
#[derive(Clone, Debug)]
pub struct Pipeline1d {
    pub specs: Vec<OperatorSpec>,
    pub scheme: SchemeMatrix,
    pub dual: DualMatrix,
    pub kernels: SamplingKernelSet,
}

impl Pipeline1d {
    /// Builds `S_a` from scratch.
    pub fn new(
        generator: &Generator,
        a: f64,
        grid: usize,
        radius: usize,
        specs: &[OperatorSpec],
        period: usize,
        choice: &DualChoice,
    ) -> Result<Self> {
        let zak = zak_kernel(generator, a, grid)?;
        let base = shannon_kernel(&zak, generator, radius)?;
        Self::from_base(&base, specs, period, choice)
    }

    /// Reuses an existing `S_a`.
    pub fn from_base(base: &ShannonKernel, specs: &[OperatorSpec], period: usize, choice: &DualChoice) -> Result<Self> {
        let scheme = scheme_matrix(specs, period)?;
        let dual = match (scheme.is_basis(), choice) {
            (true, DualChoice::Canonical) => invert_scheme(&scheme)?,
            (true, DualChoice::LeftInverse(_)) => {
                return Err(Error::Precondition(
                    "a left-inverse choice needs a redundant scheme (q > p)".into(),
                ))
            }
            (false, DualChoice::Canonical) => left_inverse(&scheme, None)?,
            (false, DualChoice::LeftInverse(u)) => left_inverse(&scheme, Some(u))?,
        };
        let kernels = assemble_kernels(base, &scheme, &dual)?;
        Ok(Pipeline1d {
            specs: specs.to_vec(),
            scheme,
            dual,
            kernels,
        })
    }

    /// Samples `f` on exactly the window needed for `[t_min, t_max]`.
    pub fn sample(&self, f: &Signal, t_min: f64, t_max: f64) -> SampleSet {
        let window = required_window(&self.kernels, t_min, t_max);
        apply_operators(f, &self.specs, self.kernels.base.a, self.kernels.period, window)
    }

    pub fn reconstruct(&self, samples: &SampleSet, eval: &[f64]) -> Result<Vec<f64>> {
        match self.kernels.mode {
            DualMode::Basis => reconstruct_1d(samples, &self.kernels, eval),
            DualMode::Frame => frame_reconstruct_1d(samples, &self.kernels, eval),
        }
    }
}

/// Two-dimensional counterpart of [`Pipeline1d`] for tensor-product schemes.
#[derive(Clone, Debug)]
pub struct Pipeline2d {
    pub specs: (Vec<OperatorSpec>, Vec<OperatorSpec>),
    pub kernels: SamplingKernelSet2d,
}

impl Pipeline2d {
    pub fn new(
        base: &BaseKernel2d,
        specs: (&[OperatorSpec], &[OperatorSpec]),
        periods: (usize, usize),
    ) -> Result<Self> {
        let m0 = scheme_matrix(specs.0, periods.0)?;
        let m1 = scheme_matrix(specs.1, periods.1)?;
        if !m0.is_basis() || !m1.is_basis() {
            return Err(Error::Precondition(
                "2D schemes are built from square factors".into(),
            ));
        }
        let kernels = assemble_kernels_2d(base, &m0, &m1)?;
        Ok(Pipeline2d {
            specs: (specs.0.to_vec(), specs.1.to_vec()),
            kernels,
        })
    }

    pub fn sample(&self, f: &Signal2d, t_range: (f64, f64), s_range: (f64, f64)) -> SampleSet2d {
        let windows = required_window_2d(&self.kernels, t_range, s_range);
        apply_operators_2d(
            f,
            (&self.specs.0, &self.specs.1),
            self.kernels.base.offsets(),
            self.kernels.periods,
            windows,
        )
    }

    pub fn reconstruct(&self, samples: &SampleSet2d, eval: &[(f64, f64)]) -> Result<Vec<f64>> {
        reconstruct_2d(samples, &self.kernels, eval)
    }
}

/// `start, start + step, ...` up to and including `end` (within rounding).
pub fn uniform_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| start + i as f64 * step).collect()
}
