//! Scheme matrices and their duals.
//!
//! A scheme matrix `M` (q x p) expresses each measured channel as a
//! combination of the `p` partition offsets of one sampling period. When
//! `q = p` and `det M != 0` the channels form a Riesz basis and the columns
//! of `M⁻¹` give the reconstruction kernels; when `q > p` and `rank M = p`
//! any left inverse of `M` does the same job for the resulting frame.
//!
//! Schemes built from differences and averages have small rational entries,
//! so inversion is carried out in exact rational arithmetic whenever the
//! entries allow it and falls back to LU in floating point otherwise.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Zero};

use crate::error::{Error, Result};
use crate::generators::{riesz_condition, RieszStatus, ZakKernel, DEFAULT_RIESZ_TOL};

/// Relative determinant tolerance; scaled by `max|a_jk|^p`.
pub const DET_TOL: f64 = 1e-12;
/// Relative pivot tolerance for rank decisions.
pub const RANK_TOL: f64 = 1e-10;
/// Default half-width of the index window for biorthogonality checks.
pub const DEFAULT_BIORTHO_WINDOW: i64 = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeMatrix {
    /// q x p coefficient matrix.
    pub matrix: DMatrix<f64>,
    /// Partition offset of column 0 relative to `a + p n`.
    pub window_start: i64,
    pub labels: Vec<String>,
}

impl SchemeMatrix {
    pub fn new(matrix: DMatrix<f64>, window_start: i64, labels: Vec<String>) -> Result<Self> {
        if matrix.ncols() == 0 {
            return Err(Error::Dimension("scheme matrix has no columns".into()));
        }
        if matrix.nrows() < matrix.ncols() {
            return Err(Error::Underdetermined {
                channels: matrix.nrows(),
                period: matrix.ncols(),
            });
        }
        if labels.len() != matrix.nrows() {
            return Err(Error::Dimension(format!(
                "{} labels for {} rows",
                labels.len(),
                matrix.nrows()
            )));
        }
        Ok(SchemeMatrix {
            matrix,
            window_start,
            labels,
        })
    }

    /// Unlabelled matrix anchored at offset 0, handy for tables and tests.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let q = rows.len();
        let p = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(
            DMatrix::from_row_slice(q, p, &flat),
            0,
            (0..q).map(|i| format!("row {i}")).collect(),
        )
    }

    pub fn period(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn channels(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_basis(&self) -> bool {
        self.channels() == self.period()
    }

    /// Hadamard bound `Π_j ||row_j||`, the largest `|det|` rows of these
    /// lengths can have.
    fn det_scale(&self) -> f64 {
        self.matrix.row_iter().map(|r| r.norm()).product()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DualMode {
    Basis,
    Frame,
}

/// `M⁻¹` (basis mode) or a left inverse `N` with `N M = I_p` (frame mode),
/// stored as a p x q matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DualMatrix {
    pub matrix: DMatrix<f64>,
    pub mode: DualMode,
    /// `det M`, basis mode only.
    pub determinant: Option<f64>,
    /// Whether the entries were obtained in exact rational arithmetic.
    pub exact: bool,
}

type Q = Ratio<i128>;

const MAX_EXACT: f64 = (1u64 << 40) as f64;

fn to_rational(x: f64) -> Option<Q> {
    if !x.is_finite() || x.abs() > MAX_EXACT {
        return None;
    }
    let r = Q::approximate_float(x)?;
    if *r.denom() > (1 << 24) || q_to_f64(&r) != x {
        return None;
    }
    Some(r)
}

fn q_to_f64(r: &Q) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn to_rational_matrix(m: &DMatrix<f64>) -> Option<Vec<Vec<Q>>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| to_rational(m[(i, j)])).collect())
        .collect()
}

fn from_rational_matrix(m: &[Vec<Q>]) -> DMatrix<f64> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows, cols, |i, j| q_to_f64(&m[i][j]))
}

/// Gauss-Jordan inversion over the rationals. `None` on overflow; a zero
/// determinant comes back as `Some((None, 0))`.
fn exact_inverse(a: &[Vec<Q>]) -> Option<(Option<Vec<Vec<Q>>>, Q)> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a.to_vec();
    let mut inv: Vec<Vec<Q>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect();
    let mut det = Q::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Some((None, Q::zero()));
        };
        if piv != col {
            m.swap(piv, col);
            inv.swap(piv, col);
            det = -det;
        }
        let p = m[col][col];
        det = det.checked_mul(&p)?;
        for j in 0..n {
            m[col][j] = m[col][j].checked_div(&p)?;
            inv[col][j] = inv[col][j].checked_div(&p)?;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col];
            for j in 0..n {
                m[r][j] = m[r][j].checked_sub(&f.checked_mul(&m[col][j])?)?;
                inv[r][j] = inv[r][j].checked_sub(&f.checked_mul(&inv[col][j])?)?;
            }
        }
    }
    Some((Some(inv), det))
}

fn exact_matmul(a: &[Vec<Q>], b: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).try_fold(Q::zero(), |acc, k| acc.checked_add(&row[k].checked_mul(&b[k][j])?))
                })
                .collect()
        })
        .collect()
}

fn exact_transpose(a: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

/// Inverse of a square scheme matrix, with its determinant.
pub fn invert_scheme(m: &SchemeMatrix) -> Result<DualMatrix> {
    if !m.is_basis() {
        return Err(Error::Precondition(format!(
            "invert_scheme needs a square matrix, got {}x{}",
            m.channels(),
            m.period()
        )));
    }
    let threshold = DET_TOL * m.det_scale();

    if let Some(q) = to_rational_matrix(&m.matrix) {
        if let Some((inv, det)) = exact_inverse(&q) {
            let det_f = q_to_f64(&det);
            return match inv {
                Some(inv) if det_f.abs() > threshold => Ok(DualMatrix {
                    matrix: from_rational_matrix(&inv),
                    mode: DualMode::Basis,
                    determinant: Some(det_f),
                    exact: true,
                }),
                _ => Err(Error::SingularScheme { det: det_f }),
            };
        }
    }

    let lu = m.matrix.clone().lu();
    let det = lu.determinant();
    if det.is_nan() || det.abs() <= threshold {
        return Err(Error::SingularScheme { det });
    }
    let inv = lu.try_inverse().ok_or(Error::SingularScheme { det })?;
    Ok(DualMatrix {
        matrix: inv,
        mode: DualMode::Basis,
        determinant: Some(det),
        exact: false,
    })
}

/// Numerical rank by Gaussian elimination with full pivoting.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let tol = rel_tol * scale;
    let mut r = 0;
    for _ in 0..rows.min(cols) {
        let mut best = (r, r, 0.0f64);
        for i in r..rows {
            for j in r..cols {
                if a[(i, j)].abs() > best.2 {
                    best = (i, j, a[(i, j)].abs());
                }
            }
        }
        if best.2 <= tol {
            break;
        }
        a.swap_rows(r, best.0);
        a.swap_columns(r, best.1);
        for i in (r + 1)..rows {
            let f = a[(i, r)] / a[(r, r)];
            for j in r..cols {
                a[(i, j)] -= f * a[(r, j)];
            }
        }
        r += 1;
    }
    r
}

/// Left inverse `N = M† + U (I_q - M M†)` of a tall full-rank matrix. With
/// `u = None` this is the Moore–Penrose pseudo-inverse `(MᵀM)⁻¹Mᵀ`.
pub fn left_inverse(m: &SchemeMatrix, u: Option<&DMatrix<f64>>) -> Result<DualMatrix> {
    let (q, p) = (m.channels(), m.period());
    if q <= p {
        return Err(Error::Precondition(format!(
            "left_inverse needs more channels than the period, got {q}x{p}; use invert_scheme"
        )));
    }
    let r = rank(&m.matrix, RANK_TOL);
    if r < p {
        return Err(Error::NotAFrame { rank: r, period: p });
    }

    let exact = to_rational_matrix(&m.matrix).and_then(|a| {
        let at = exact_transpose(&a);
        let gram = exact_matmul(&at, &a)?;
        let (inv, _) = exact_inverse(&gram)?;
        exact_matmul(&inv?, &at)
    });
    let (pinv, is_exact) = match exact {
        Some(pinv) => (from_rational_matrix(&pinv), true),
        None => {
            let mt = m.matrix.transpose();
            let gram_inv = (&mt * &m.matrix)
                .try_inverse()
                .ok_or(Error::NotAFrame { rank: r, period: p })?;
            (gram_inv * mt, false)
        }
    };

    let matrix = match u {
        None => pinv,
        Some(u) => {
            if u.shape() != (p, q) {
                return Err(Error::Dimension(format!(
                    "U must be {p}x{q}, got {}x{}",
                    u.nrows(),
                    u.ncols()
                )));
            }
            let projector = DMatrix::<f64>::identity(q, q) - &m.matrix * &pinv;
            &pinv + u * projector
        }
    };
    Ok(DualMatrix {
        matrix,
        mode: DualMode::Frame,
        determinant: None,
        exact: is_exact && u.is_none(),
    })
}

/// Dense Kronecker product; entry `((i1,i2),(j1,j2))` sits at
/// `(i1*r2 + i2, j1*c2 + j2)`.
pub fn kron_dense(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (r2, c2) = b.shape();
    DMatrix::from_fn(a.nrows() * r2, a.ncols() * c2, |i, j| {
        a[(i / r2, j / c2)] * b[(i % r2, j % c2)]
    })
}

/// Kronecker product of two basis-mode schemes (first factor major).
pub fn kronecker(m1: &SchemeMatrix, m2: &SchemeMatrix) -> Result<SchemeMatrix> {
    if !m1.is_basis() || !m2.is_basis() {
        return Err(Error::Precondition(
            "kronecker needs two square (basis-mode) schemes".into(),
        ));
    }
    let labels = m1
        .labels
        .iter()
        .flat_map(|l1| m2.labels.iter().map(move |l2| format!("{l1} ⊗ {l2}")))
        .collect();
    SchemeMatrix::new(kron_dense(&m1.matrix, &m2.matrix), 0, labels)
}

/// Builds `z_{jn} = Σ_k a_jk x_{pn+w+k}` and `ẑ_{jm} = Σ_k conj(b_kj) y_{pm+w+k}`
/// from `x_n = e^{-2πinx} K_a`, `y_n = e^{-2πinx} / conj(K_a)` on the kernel
/// grid, and returns `max |<z_{jn}, ẑ_{j'm}> - δ_{jj'} δ_{nm}|` over
/// `|n|, |m| <= window`, with inner products by the rectangle rule.
pub fn biorthogonality_check(
    m: &SchemeMatrix,
    dual: &DualMatrix,
    kernel: &ZakKernel,
    window: i64,
) -> Result<f64> {
    if !m.is_basis() {
        return Err(Error::Precondition(
            "biorthogonality check runs in basis mode only".into(),
        ));
    }
    let p = m.period();
    let threshold = DET_TOL * m.det_scale();
    let det = m.matrix.clone().lu().determinant();
    if det.is_nan() || det.abs() <= threshold {
        return Err(Error::SingularScheme { det });
    }
    if dual.matrix.shape() != (p, p) {
        return Err(Error::Dimension(format!(
            "dual matrix must be {p}x{p}, got {}x{}",
            dual.matrix.nrows(),
            dual.matrix.ncols()
        )));
    }
    if let RieszStatus::Degenerate { witness, modulus } = riesz_condition(kernel, DEFAULT_RIESZ_TOL) {
        return Err(Error::DegenerateKernel { witness, modulus });
    }

    let g = kernel.grid_size();
    let phase = |n: i64, j: usize| {
        let r = (n.rem_euclid(g as i64) * j as i64).rem_euclid(g as i64);
        Complex64::from_polar(1.0, -2.0 * PI * r as f64 / g as f64)
    };
    let build = |coef: &dyn Fn(usize, usize) -> f64, n: i64, j: usize, dual_side: bool| -> Vec<Complex64> {
        (0..g)
            .map(|xi| {
                let k_val = kernel.values[xi];
                let base = if dual_side { Complex64::new(1.0, 0.0) / k_val.conj() } else { k_val };
                (0..p)
                    .map(|k| {
                        let idx = p as i64 * n + m.window_start + k as i64;
                        phase(idx, xi) * base * coef(j, k)
                    })
                    .sum()
            })
            .collect()
    };

    let primal_coef = |j: usize, k: usize| m.matrix[(j, k)];
    let dual_coef = |j: usize, k: usize| dual.matrix[(k, j)];
    let ns: Vec<i64> = (-window..=window).collect();
    let zs: Vec<Vec<Vec<Complex64>>> = (0..p)
        .map(|j| ns.iter().map(|&n| build(&primal_coef, n, j, false)).collect())
        .collect();
    let zhats: Vec<Vec<Vec<Complex64>>> = (0..p)
        .map(|j| ns.iter().map(|&n| build(&dual_coef, n, j, true)).collect())
        .collect();

    let mut worst = 0.0f64;
    for j in 0..p {
        for (ni, _) in ns.iter().enumerate() {
            let z = &zs[j][ni];
            for jp in 0..p {
                for (mi, _) in ns.iter().enumerate() {
                    let zh = &zhats[jp][mi];
                    let ip: Complex64 =
                        z.iter().zip(zh).map(|(a, b)| a * b.conj()).sum::<Complex64>() / g as f64;
                    let target = if j == jp && ni == mi { 1.0 } else { 0.0 };
                    worst = worst.max((ip - target).norm());
                }
            }
        }
    }
    Ok(worst)
}
