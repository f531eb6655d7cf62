//! Sampling functions.
//!
//! `S_a` is the image of `1/conj(K_a)` under `e^{-2πinx} ↦ φ(t - n)`, so its
//! expansion `S_a(t) = Σ_n c_n φ(t - n)` has the Fourier coefficients of
//! `1/conj(K_a)` as weights. Composite kernels `T_{a,j}` are finite
//! combinations of shifts of `S_a` read off the columns of the dual matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{
    riesz_condition, Generator, Generator2d, ZakKernel, ZakKernel2d, DEFAULT_RIESZ_TOL,
};
use crate::riesz::{invert_scheme, kronecker, DualMatrix, DualMode, SchemeMatrix};

/// Default truncation radius of the `S_a` expansion for spline generators.
pub const DEFAULT_RADIUS: usize = 40;
/// Default Zak grid size.
pub const DEFAULT_GRID: usize = 4096;

/// `S_a(t) = Σ_{|n| <= R} c_n φ(t - n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShannonKernel {
    pub generator: Generator,
    pub a: f64,
    pub radius: usize,
    pub grid_size: usize,
    /// `c_{-R}, ..., c_R`.
    pub coeffs: Vec<f64>,
    /// `Σ |c_n|²` over the computable coefficients beyond the radius.
    pub tail_mass: f64,
    /// Largest imaginary part discarded from the retained coefficients.
    pub max_imag: f64,
}

impl ShannonKernel {
    pub fn coeff(&self, n: i64) -> f64 {
        let r = self.radius as i64;
        if n.abs() > r {
            0.0
        } else {
            self.coeffs[(n + r) as usize]
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let r = self.radius as i64;
        let range = self.generator.shifts_near(t);
        let lo = (*range.start()).max(-r);
        let hi = (*range.end()).min(r);
        (lo..=hi)
            .map(|n| self.coeff(n) * self.generator.eval(t - n as f64))
            .sum()
    }

    /// Interval outside of which the truncated `S_a` vanishes.
    pub fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.generator.support();
        let r = self.radius as f64;
        (lo - r, hi + r)
    }

    /// Least-squares fit `|c_n| ≈ C ρ^{|n - n*|}` around the largest
    /// coefficient, using entries above `floor`. Returns `(C, ρ)`.
    pub fn decay_fit(&self, floor: f64) -> Option<(f64, f64)> {
        let r = self.radius as i64;
        let center = (-r..=r).max_by(|&x, &y| self.coeff(x).abs().total_cmp(&self.coeff(y).abs()))?;
        let pts: Vec<(f64, f64)> = (-r..=r)
            .filter(|&n| self.coeff(n).abs() > floor)
            .map(|n| ((n - center).abs() as f64, self.coeff(n).abs().ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let k = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / k, sy / k);
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        if sxx == 0.0 {
            return None;
        }
        let slope = sxy / sxx;
        Some(((my - slope * mx).exp(), slope.exp()))
    }
}

/// Coefficients of `S_a` by an inverse DFT of `1/conj(K_a)` on the Zak grid.
pub fn shannon_kernel(kernel: &ZakKernel, generator: &Generator, radius: usize) -> Result<ShannonKernel> {
    if let Some(err) = riesz_condition(kernel, DEFAULT_RIESZ_TOL).into_result().err() {
        return Err(err);
    }
    let grid = kernel.grid_size();
    if grid < 4 * radius || radius == 0 {
        return Err(Error::InsufficientGrid {
            grid,
            radius,
            required: 4 * radius.max(1),
        });
    }
    let mut buf: Vec<Complex64> = kernel
        .values
        .iter()
        .map(|k| Complex64::new(1.0, 0.0) / k.conj())
        .collect();
    FftPlanner::new().plan_fft_inverse(grid).process(&mut buf);
    let scale = 1.0 / grid as f64;
    let at = |n: i64| buf[n.rem_euclid(grid as i64) as usize] * scale;

    let r = radius as i64;
    let mut coeffs = Vec::with_capacity(2 * radius + 1);
    let mut max_imag = 0.0f64;
    for n in -r..=r {
        let c = at(n);
        max_imag = max_imag.max(c.im.abs());
        coeffs.push(c.re);
    }
    let half = grid as i64 / 2;
    let tail_mass = ((r + 1)..=half)
        .flat_map(|n| [n, -n])
        .filter(|&n| n > -half)
        .map(|n| at(n).norm_sqr())
        .sum();
    Ok(ShannonKernel {
        generator: generator.clone(),
        a: kernel.a,
        radius,
        grid_size: grid,
        coeffs,
        tail_mass,
        max_imag,
    })
}

/// `max_{|n| <= n_range} |S_a(a + n) - δ_{n0}|`.
pub fn interpolation_check(base: &ShannonKernel, n_range: i64) -> f64 {
    (-n_range..=n_range)
        .map(|n| {
            let target = if n == 0 { 1.0 } else { 0.0 };
            (base.eval(base.a + n as f64) - target).abs()
        })
        .fold(0.0, f64::max)
}

/// `T_{a,j}(t) = Σ_{(s,w) ∈ combos[j]} w S_a(t - s)` for every channel `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingKernelSet {
    pub base: ShannonKernel,
    pub period: usize,
    pub window_start: i64,
    pub mode: DualMode,
    pub labels: Vec<String>,
    pub combos: Vec<Vec<(i64, f64)>>,
}

impl SamplingKernelSet {
    pub fn channels(&self) -> usize {
        self.combos.len()
    }

    pub fn eval(&self, channel: usize, t: f64) -> f64 {
        self.combos[channel]
            .iter()
            .map(|&(s, w)| w * self.base.eval(t - s as f64))
            .sum()
    }

    /// Smallest and largest shift over all combos.
    pub fn shift_range(&self) -> (i64, i64) {
        let all = self.combos.iter().flatten().map(|c| c.0);
        let lo = all.clone().min().unwrap_or(0);
        let hi = all.max().unwrap_or(0);
        (lo, hi)
    }
}

fn combos_from_dual(dual: &DMatrix<f64>, window_start: i64) -> Vec<Vec<(i64, f64)>> {
    (0..dual.ncols())
        .map(|j| {
            (0..dual.nrows())
                .filter(|&k| dual[(k, j)] != 0.0)
                .map(|k| (window_start + k as i64, dual[(k, j)]))
                .collect()
        })
        .collect()
}

pub fn assemble_kernels(
    base: &ShannonKernel,
    scheme: &SchemeMatrix,
    dual: &DualMatrix,
) -> Result<SamplingKernelSet> {
    let (q, p) = (scheme.channels(), scheme.period());
    if dual.matrix.shape() != (p, q) {
        return Err(Error::Dimension(format!(
            "dual matrix must be {p}x{q} for a {q}x{p} scheme, got {}x{}",
            dual.matrix.nrows(),
            dual.matrix.ncols()
        )));
    }
    Ok(SamplingKernelSet {
        base: base.clone(),
        period: p,
        window_start: scheme.window_start,
        mode: dual.mode,
        labels: scheme.labels.clone(),
        combos: combos_from_dual(&dual.matrix, scheme.window_start),
    })
}

/// `S_{a,b}(t,s) = Σ_{|n|,|m| <= R} c_{nm} Φ(t - n, s - m)` for a general
/// two-dimensional generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShannonKernel2d {
    pub generator: Generator2d,
    pub offsets: (f64, f64),
    pub radius: usize,
    pub grid_size: usize,
    /// row-major `(n, m)`, `n, m = -R..=R`.
    pub coeffs: Vec<f64>,
    pub tail_mass: f64,
    pub max_imag: f64,
}

impl ShannonKernel2d {
    pub fn coeff(&self, n: i64, m: i64) -> f64 {
        let r = self.radius as i64;
        if n.abs() > r || m.abs() > r {
            0.0
        } else {
            let w = 2 * self.radius + 1;
            self.coeffs[(n + r) as usize * w + (m + r) as usize]
        }
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        let r = self.radius as i64;
        let (ns, ms) = self.generator.shifts_near(t, s);
        let mut acc = 0.0;
        for n in (*ns.start()).max(-r)..=(*ns.end()).min(r) {
            for m in (*ms.start()).max(-r)..=(*ms.end()).min(r) {
                acc += self.coeff(n, m) * self.generator.eval(t - n as f64, s - m as f64);
            }
        }
        acc
    }
}

pub fn shannon_kernel_2d(
    kernel: &ZakKernel2d,
    generator: &Generator2d,
    radius: usize,
) -> Result<ShannonKernel2d> {
    kernel.riesz_condition(DEFAULT_RIESZ_TOL).into_result()?;
    let g = kernel.grid;
    if g < 4 * radius || radius == 0 {
        return Err(Error::InsufficientGrid {
            grid: g,
            radius,
            required: 4 * radius.max(1),
        });
    }
    let mut buf: Vec<Complex64> = kernel
        .values
        .iter()
        .map(|k| Complex64::new(1.0, 0.0) / k.conj())
        .collect();
    let fft = FftPlanner::new().plan_fft_inverse(g);
    // rows (fixed x index, varying y), then columns
    for row in buf.chunks_mut(g) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); g];
    for jy in 0..g {
        for jx in 0..g {
            col[jx] = buf[jx * g + jy];
        }
        fft.process(&mut col);
        for jx in 0..g {
            buf[jx * g + jy] = col[jx];
        }
    }
    let scale = 1.0 / (g * g) as f64;
    let gi = g as i64;
    let at = |n: i64, m: i64| buf[n.rem_euclid(gi) as usize * g + m.rem_euclid(gi) as usize] * scale;

    let r = radius as i64;
    let mut coeffs = Vec::with_capacity((2 * radius + 1).pow(2));
    let mut max_imag = 0.0f64;
    for n in -r..=r {
        for m in -r..=r {
            let c = at(n, m);
            max_imag = max_imag.max(c.im.abs());
            coeffs.push(c.re);
        }
    }
    let half = gi / 2;
    let mut tail_mass = 0.0;
    for n in (-half + 1)..=half {
        for m in (-half + 1)..=half {
            if n.abs() > r || m.abs() > r {
                tail_mass += at(n, m).norm_sqr();
            }
        }
    }
    Ok(ShannonKernel2d {
        generator: generator.clone(),
        offsets: (kernel.a, kernel.b),
        radius,
        grid_size: g,
        coeffs,
        tail_mass,
        max_imag,
    })
}

/// Two-dimensional `S`: either `S_a(t) S̃_b(s)` for a product generator or a
/// general `S_{a,b}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BaseKernel2d {
    Separable {
        first: ShannonKernel,
        second: ShannonKernel,
    },
    General(ShannonKernel2d),
}

impl BaseKernel2d {
    pub fn coeff(&self, n: i64, m: i64) -> f64 {
        match self {
            BaseKernel2d::Separable { first, second } => first.coeff(n) * second.coeff(m),
            BaseKernel2d::General(k) => k.coeff(n, m),
        }
    }

    pub fn radius(&self) -> (usize, usize) {
        match self {
            BaseKernel2d::Separable { first, second } => (first.radius, second.radius),
            BaseKernel2d::General(k) => (k.radius, k.radius),
        }
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        match self {
            BaseKernel2d::Separable { first, second } => {
                let u = first.eval(t);
                if u == 0.0 {
                    0.0
                } else {
                    u * second.eval(s)
                }
            }
            BaseKernel2d::General(k) => k.eval(t, s),
        }
    }

    pub fn generator(&self) -> Generator2d {
        match self {
            BaseKernel2d::Separable { first, second } => {
                Generator2d::product(first.generator.clone(), second.generator.clone())
            }
            BaseKernel2d::General(k) => k.generator.clone(),
        }
    }

    pub fn offsets(&self) -> (f64, f64) {
        match self {
            BaseKernel2d::Separable { first, second } => (first.a, second.a),
            BaseKernel2d::General(k) => k.offsets,
        }
    }
}

/// `T^{j}(t,s) = Σ w S(t - s0, s - s1)` over `combos[j]`, channel `j = j0*p1 + j1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingKernelSet2d {
    pub base: BaseKernel2d,
    pub periods: (usize, usize),
    pub window_starts: (i64, i64),
    pub labels: Vec<String>,
    pub combos: Vec<Vec<((i64, i64), f64)>>,
}

impl SamplingKernelSet2d {
    pub fn eval(&self, channel: usize, t: f64, s: f64) -> f64 {
        self.combos[channel]
            .iter()
            .map(|&((u, v), w)| w * self.base.eval(t - u as f64, s - v as f64))
            .sum()
    }

    pub fn shift_ranges(&self) -> ((i64, i64), (i64, i64)) {
        let it = || self.combos.iter().flatten();
        (
            (it().map(|c| c.0 .0).min().unwrap_or(0), it().map(|c| c.0 .0).max().unwrap_or(0)),
            (it().map(|c| c.0 .1).min().unwrap_or(0), it().map(|c| c.0 .1).max().unwrap_or(0)),
        )
    }
}

/// Kernels for the tensor-product scheme `M0 ⊗ M1`, read from the columns of
/// `(M0 ⊗ M1)⁻¹`.
pub fn assemble_kernels_2d(
    base: &BaseKernel2d,
    first: &SchemeMatrix,
    second: &SchemeMatrix,
) -> Result<SamplingKernelSet2d> {
    let kron = kronecker(first, second)?;
    let dual = invert_scheme(&kron)?;
    let p1 = second.period();
    let inv = &dual.matrix;
    let combos = (0..inv.ncols())
        .map(|col| {
            (0..inv.nrows())
                .filter(|&r| inv[(r, col)] != 0.0)
                .map(|r| {
                    let (k0, k1) = ((r / p1) as i64, (r % p1) as i64);
                    ((first.window_start + k0, second.window_start + k1), inv[(r, col)])
                })
                .collect()
        })
        .collect();
    Ok(SamplingKernelSet2d {
        base: base.clone(),
        periods: (first.period(), p1),
        window_starts: (first.window_start, second.window_start),
        labels: kron.labels,
        combos,
    })
}
