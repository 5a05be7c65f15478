//! Dense complex matrices and the decompositions the frame machinery is built on.
//!
//! Everything here is desk-scale (dimensions up to a few hundred) and favours
//! accuracy over speed: Hermitian eigenproblems use cyclic complex Jacobi
//! rotations, singular value decompositions use one-sided (Hestenes) Jacobi.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

const MAX_SWEEPS: usize = 100;

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds a matrix from row-major entries; fails if the count is wrong.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(CMatrix { rows, cols, data })
    }

    /// Real matrix from nested rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// Column vector.
    pub fn column_vector(v: &[C64]) -> Self {
        CMatrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// Row vector.
    pub fn row_vector(v: &[C64]) -> Self {
        CMatrix {
            rows: 1,
            cols: v.len(),
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &z) in v.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus; 0 for an empty matrix.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(l);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    fn check_same_shape(&self, other: &CMatrix, op: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(format!(
                "cannot {op} {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_same_shape(other, "add")?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_same_shape(other, "subtract")?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &CMatrix, f: impl Fn(C64, C64) -> C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Copy of the `rows x cols` block whose top-left corner is `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> CMatrix {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_submatrix(&mut self, r0: usize, c0: usize, block: &CMatrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(parts: &[CMatrix]) -> Result<CMatrix> {
        let cols = parts.first().map_or(0, |p| p.cols);
        if parts.iter().any(|p| p.cols != cols) {
            return Err(Error::ShapeMismatch(
                "vstack with unequal column counts".into(),
            ));
        }
        let rows = parts.iter().map(|p| p.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for p in parts {
            data.extend_from_slice(&p.data);
        }
        Ok(CMatrix { rows, cols, data })
    }

    /// Places matrices with equal row counts side by side.
    pub fn hstack(parts: &[CMatrix]) -> Result<CMatrix> {
        let rows = parts.first().map_or(0, |p| p.rows);
        if parts.iter().any(|p| p.rows != rows) {
            return Err(Error::ShapeMismatch(
                "hstack with unequal row counts".into(),
            ));
        }
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = CMatrix::zeros(rows, cols);
        let mut c0 = 0;
        for p in parts {
            out.set_submatrix(0, c0, p);
            c0 += p.cols;
        }
        Ok(out)
    }

    /// Largest entry modulus of `self - self*`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Default Hermitian tolerance `1e-10 * (1 + |m|)`, with the Frobenius
    /// norm standing in for the operator norm.
    pub fn default_hermitian_tol(&self) -> f64 {
        1e-10 * (1.0 + self.frobenius_norm())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermitian_defect() <= tol
    }

    /// `(m + m*) / 2`.
    pub fn hermitian_part(&self) -> CMatrix {
        let adj = self.adjoint();
        self.zip_with(&adj, |a, b| (a + b) * 0.5)
    }

    /// Largest entry modulus of the difference, or infinity on shape mismatch.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

// The operator impls panic on shape mismatch; use `matmul`/`try_add`/`try_sub`
// where the shapes come from user input.
impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_real(-1.0)
    }
}

/// Eigen-decomposition of a Hermitian matrix: `m = U diag(values) U*`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unitary; column `j` belongs to `values[j]`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `U f(diag) U*` for a real function of the eigenvalues.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let u = &self.vectors;
        let mut out = CMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let fl = f(lambda);
            if fl == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = u[(i, k)] * fl;
                for j in 0..n {
                    out[(i, j)] += a * u[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// `tol` bounds the admissible asymmetry `max|m - m*|`; `None` uses
/// `1e-10 * (1 + |m|)`. The Hermitian part is diagonalized.
pub fn eig_hermitian(m: &CMatrix, tol: Option<f64>) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "eigendecomposition of a non-square {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let tol = tol.unwrap_or_else(|| m.default_hermitian_tol());
    let defect = m.hermitian_defect();
    if defect > tol {
        return Err(Error::NotHermitian { defect, tol });
    }
    let n = m.rows;
    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm();

    let mut converged = n <= 1 || scale == 0.0;
    let mut sweep = 0;
    while !converged {
        if sweep == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
        }
        sweep += 1;
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            continue;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 || mag <= 1e-18 * scale {
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    continue;
                }
                // Phase the q-th coordinate so the pivot becomes real, then
                // apply a real Jacobi rotation.
                let phase = apq / mag; // e^{i phi}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = D R with D = diag(.., conj(phase) at q, ..):
                // G_pp = c, G_pq = s, G_qp = -s conj(phase), G_qq = c conj(phase).
                let gpp = C64::new(c, 0.0);
                let gpq = C64::new(s, 0.0);
                let gqp = -phase.conj() * s;
                let gqq = phase.conj() * c;
                // a <- a G
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * gpp + aiq * gqp;
                    a[(i, q)] = aip * gpq + aiq * gqq;
                }
                // a <- G* a
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = gpp.conj() * apj + gqp.conj() * aqj;
                    a[(q, j)] = gpq.conj() * apj + gqq.conj() * aqj;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * gpp + viq * gqp;
                    v[(i, q)] = vip * gpq + viq * gqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Thin singular value decomposition `m = U diag(s) V*`.
#[derive(Clone, Debug)]
pub struct Svd {
    /// `rows x p` with orthonormal columns, `p = min(rows, cols)`.
    pub u: CMatrix,
    /// Descending, length `p`.
    pub s: Vec<f64>,
    /// `cols x p` with orthonormal columns.
    pub v: CMatrix,
}

impl Svd {
    pub fn max_singular_value(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    /// Default rank threshold `1e-9 * sigma_max`.
    pub fn default_rank_tol(&self) -> f64 {
        1e-9 * self.max_singular_value()
    }

    pub fn rank(&self, rank_tol: f64) -> usize {
        self.s.iter().filter(|&&s| s > rank_tol).count()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let us = CMatrix::from_fn(self.u.rows, self.s.len(), |i, j| self.u[(i, j)] * self.s[j]);
        &us * &self.v.adjoint()
    }
}

/// Rotates the columns of `a` until they are pairwise orthogonal.
/// Returns the rotated columns and the accumulated unitary `V` (`a_in V = a_out`).
fn hestenes(mut a: CMatrix) -> Result<(CMatrix, CMatrix)> {
    let (r, c) = a.shape();
    let mut v = CMatrix::identity(c);
    if c < 2 {
        return Ok((a, v));
    }
    let floor = 1e-30 * a.frobenius_norm().powi(2);
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..c - 1 {
            for q in p + 1..c {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = ZERO;
                for i in 0..r {
                    let ap = a[(i, p)];
                    let aq = a[(i, q)];
                    alpha += ap.norm_sqr();
                    beta += aq.norm_sqr();
                    gamma += ap.conj() * aq;
                }
                let g = gamma.norm();
                if g <= floor || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase_conj = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    1.0 / (zeta - (1.0 + zeta * zeta).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..r {
                    let ap = a[(i, p)];
                    let aq = a[(i, q)] * phase_conj;
                    a[(i, p)] = ap * cs - aq * sn;
                    a[(i, q)] = ap * sn + aq * cs;
                }
                for i in 0..c {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)] * phase_conj;
                    v[(i, p)] = vp * cs - vq * sn;
                    v[(i, q)] = vp * sn + vq * cs;
                }
            }
        }
        if !rotated {
            return Ok((a, v));
        }
    }
    Err(Error::NoConvergence { sweeps: MAX_SWEEPS })
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn vec_norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormalizes `candidate` against `basis` (two Gram-Schmidt passes).
/// Returns `None` if nothing is left.
fn orthonormalize_against(basis: &[Vec<C64>], mut candidate: Vec<C64>) -> Option<Vec<C64>> {
    let start = vec_norm(&candidate);
    if start == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for b in basis {
            let proj = dot(b, &candidate);
            for (c, &bi) in candidate.iter_mut().zip(b) {
                *c -= proj * bi;
            }
        }
    }
    let n = vec_norm(&candidate);
    if n <= 1e-8 * start {
        return None;
    }
    candidate.iter_mut().for_each(|c| *c /= n);
    Some(candidate)
}

/// Extends orthonormal columns to `target` orthonormal columns using
/// standard basis vectors as candidates.
fn complete_basis(mut basis: Vec<Vec<C64>>, dim: usize, target: usize) -> Vec<Vec<C64>> {
    let mut e = 0;
    while basis.len() < target && e < dim {
        let mut cand = vec![ZERO; dim];
        cand[e] = ONE;
        if let Some(u) = orthonormalize_against(&basis, cand) {
            basis.push(u);
        }
        e += 1;
    }
    basis
}

struct FullSvd {
    u_cols: Vec<Vec<C64>>,
    s: Vec<f64>,
    /// All `cols` right singular vectors, ordered by descending singular value.
    v_full: CMatrix,
}

fn full_svd(m: &CMatrix) -> Result<FullSvd> {
    let (r, c) = m.shape();
    let (a, v) = hestenes(m.clone())?;
    let norms: Vec<f64> = (0..c).map(|j| vec_norm(&a.column(j))).collect();
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let p = r.min(c);

    let mut u_cols: Vec<Vec<C64>> = Vec::with_capacity(p);
    let mut s = Vec::with_capacity(p);
    for &j in order.iter().take(p) {
        let sigma = norms[j];
        if sigma == 0.0 {
            break;
        }
        let col: Vec<C64> = a.column(j).iter().map(|z| z / sigma).collect();
        match orthonormalize_against(&u_cols, col) {
            Some(u) => {
                u_cols.push(u);
                s.push(sigma);
            }
            None => break,
        }
    }
    s.resize(p, 0.0);
    let u_cols = complete_basis(u_cols, r, p);
    debug_assert_eq!(u_cols.len(), p);
    let v_full = CMatrix::from_fn(c, c, |i, j| v[(i, order[j])]);
    Ok(FullSvd { u_cols, s, v_full })
}

/// One-sided Jacobi SVD.
pub fn svd(m: &CMatrix) -> Result<Svd> {
    let (r, c) = m.shape();
    let p = r.min(c);
    let full = full_svd(m)?;
    let mut u = CMatrix::zeros(r, p);
    for (j, col) in full.u_cols.iter().enumerate() {
        u.set_column(j, col);
    }
    let v = full.v_full.submatrix(0, 0, c, p);
    Ok(Svd { u, s: full.s, v })
}

/// Orthonormal basis (as columns) of `{ w : m w = 0 }`, with singular values
/// at or below `rank_tol` counted as zero. `None` uses `1e-9 * sigma_max`.
pub fn null_space(m: &CMatrix, rank_tol: Option<f64>) -> Result<CMatrix> {
    let c = m.cols();
    let full = full_svd(m)?;
    let smax = full.s.first().copied().unwrap_or(0.0);
    let tol = rank_tol.unwrap_or(1e-9 * smax);
    let rank = full.s.iter().filter(|&&s| s > tol).count();
    Ok(full.v_full.submatrix(0, rank, c, c - rank))
}

/// Polar decomposition `m = w p` with `p = (m* m)^{1/2}` and `w` the partial
/// isometry whose initial projection `w* w` is the support of `p`.
pub fn polar(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(
            "polar decomposition needs a square matrix".into(),
        ));
    }
    let d = svd(m)?;
    let n = m.rows();
    let tol = d.default_rank_tol();
    let rank = d.rank(tol);
    let mut w = CMatrix::zeros(n, n);
    let mut p = CMatrix::zeros(n, n);
    for k in 0..d.s.len() {
        let sigma = d.s[k];
        for i in 0..n {
            let uik = d.u[(i, k)];
            let vik = d.v[(i, k)];
            for j in 0..n {
                let vjk = d.v[(j, k)].conj();
                if k < rank {
                    w[(i, j)] += uik * vjk;
                }
                p[(i, j)] += vik * vjk * sigma;
            }
        }
    }
    Ok((w, p))
}

fn check_clamp(values: &[f64], tol: f64) -> Result<()> {
    if let Some(&bad) = values.iter().find(|&&l| l < -tol) {
        return Err(Error::NotPositive {
            eigenvalue: bad,
            tol,
        });
    }
    Ok(())
}

/// Positive square root of a positive semidefinite matrix. Eigenvalues in
/// `[-tol, 0)` count as zero; anything more negative is an error.
pub fn sqrt_psd(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let e = eig_hermitian(m, None)?;
    check_clamp(&e.values, tol)?;
    Ok(e.map_spectrum(|l| l.max(0.0).sqrt()))
}

/// Moore-Penrose inverse. `None` uses the threshold `1e-9 * sigma_max`.
pub fn pinv(m: &CMatrix, rank_tol: Option<f64>) -> Result<CMatrix> {
    let d = svd(m)?;
    let tol = rank_tol.unwrap_or_else(|| d.default_rank_tol());
    let (r, c) = m.shape();
    let mut out = CMatrix::zeros(c, r);
    for k in 0..d.s.len() {
        let sigma = d.s[k];
        if sigma <= tol || sigma == 0.0 {
            continue;
        }
        let inv = 1.0 / sigma;
        for i in 0..c {
            let vik = d.v[(i, k)] * inv;
            for j in 0..r {
                out[(i, j)] += vik * d.u[(j, k)].conj();
            }
        }
    }
    Ok(out)
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    // Jacobi always converges at these sizes; fall back to Frobenius if not.
    svd(m).map_or_else(|_| m.frobenius_norm(), |d| d.max_singular_value())
}

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm(m: &CMatrix) -> f64 {
    m.frobenius_norm()
}

/// Orthogonal projection onto the span of eigenvectors of a positive
/// semidefinite `m` with eigenvalue above `rank_tol`.
pub fn support_projection(m: &CMatrix, rank_tol: f64) -> Result<CMatrix> {
    let e = eig_hermitian(m, None)?;
    check_clamp(&e.values, rank_tol.max(1e-12 * e.max_abs_value()))?;
    Ok(e.map_spectrum(|l| if l > rank_tol { 1.0 } else { 0.0 }))
}

/// Residuals of the four Moore-Penrose identities for the pair `(a, g)`:
/// `|aga - a|`, `|gag - g|`, `|(ag)* - ag|`, `|(ga)* - ga|` (entrywise max).
pub fn penrose_residuals(a: &CMatrix, g: &CMatrix) -> Result<[f64; 4]> {
    let ag = a.matmul(g)?;
    let ga = g.matmul(a)?;
    Ok([
        ag.matmul(a)?.max_abs_diff(a),
        ga.matmul(g)?.max_abs_diff(g),
        ag.hermitian_defect(),
        ga.hermitian_defect(),
    ])
}
