//! Reference computations built on nalgebra, independent of the crate's own
//! eigensolver and SVD.
#![allow(dead_code)]

use modframe::algebra::AlgebraShape;
use modframe::{CMatrix, Frame, HilbertFrame, ModuleVector, C64};
use nalgebra::DMatrix;
use rand::Rng;

pub type NMat = DMatrix<C64>;

pub fn to_na(m: &CMatrix) -> NMat {
    NMat::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn max_abs(m: &NMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn singular_values(m: &NMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn op_norm(m: &NMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn hermitian_eigenvalues(m: &NMat) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// `f(H)` for Hermitian `H` through nalgebra's eigendecomposition.
pub fn hermitian_function(m: &NMat, f: impl Fn(f64) -> f64) -> NMat {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let e = h.symmetric_eigen();
    let d = NMat::from_diagonal(&e.eigenvalues.map(|l| C64::new(f(l), 0.0)));
    &e.eigenvectors * d * e.eigenvectors.adjoint()
}

pub fn pinv(m: &NMat) -> NMat {
    let eps = 1e-10 * op_norm(m).max(f64::MIN_POSITIVE);
    m.clone().pseudo_inverse(eps).expect("pseudo-inverse")
}

/// Analysis matrix with rows `x_j*`.
pub fn analysis(vectors: &[Vec<C64>], dim: usize) -> NMat {
    NMat::from_fn(vectors.len(), dim, |j, i| vectors[j][i].conj())
}

/// Nonzero eigenvalues of the frame operator of a Hilbert-space frame.
pub fn hilbert_spectrum(x: &HilbertFrame) -> Vec<f64> {
    let t = analysis(x.vectors(), x.dim());
    let s = singular_values(&t);
    let top = s.first().copied().unwrap_or(0.0);
    s.into_iter()
        .filter(|&v| v > 1e-7 * top)
        .map(|v| v * v)
        .collect()
}

pub fn hilbert_bounds(x: &HilbertFrame) -> (f64, f64) {
    let s = hilbert_spectrum(x);
    (
        s.iter().copied().fold(f64::INFINITY, f64::min),
        s.iter().copied().fold(0.0, f64::max),
    )
}

/// `|(A - B) B^+|` with `A`, `B` the synthesis matrices, or infinity when
/// the range of `A*` is not inside the range of `B*`.
pub fn closeness(a: &HilbertFrame, b: &HilbertFrame) -> f64 {
    let ta = analysis(a.vectors(), a.dim()).adjoint();
    let tb = analysis(b.vectors(), b.dim()).adjoint();
    let bp = pinv(&tb);
    let leak = op_norm(&(&ta - &ta * &bp * &tb));
    if leak > 1e-7 * (1.0 + op_norm(&ta) + op_norm(&tb)) {
        return f64::INFINITY;
    }
    op_norm(&((&ta - &tb) * bp))
}

pub fn frame_distance(x: &HilbertFrame, y: &HilbertFrame) -> f64 {
    (closeness(x, y).max(closeness(y, x)) + 1.0).ln()
}

/// Stack of the flattened elements in block `b`: `k * m` rows, `n * m` columns.
pub fn stacked(elements: &[ModuleVector], b: usize) -> NMat {
    let parts: Vec<NMat> = elements.iter().map(|x| to_na(x.flat(b))).collect();
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let cols = parts[0].ncols();
    let mut out = NMat::zeros(rows, cols);
    let mut r = 0;
    for p in &parts {
        out.view_mut((r, 0), (p.nrows(), cols)).copy_from(p);
        r += p.nrows();
    }
    out
}

/// Canonical dual elements of a modular frame, block by block:
/// `X S` with `S` the pseudo-inverse of `X* X`.
pub fn canonical_dual_blocks(f: &Frame) -> Vec<NMat> {
    (0..f.shape().num_blocks())
        .map(|b| {
            let x = stacked(f.elements(), b);
            let g = x.adjoint() * &x;
            &x * pinv(&g)
        })
        .collect()
}

/// Frame bounds of a modular frame: extreme nonzero eigenvalues of
/// `X* X` over all blocks.
pub fn modular_bounds(f: &Frame) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let blocks: Vec<Vec<f64>> = (0..f.shape().num_blocks())
        .map(|b| singular_values(&stacked(f.elements(), b)))
        .collect();
    let top = blocks.iter().flatten().copied().fold(0.0, f64::max);
    for s in blocks.iter().flatten() {
        if *s > 1e-7 * top {
            lo = lo.min(s * s);
            hi = hi.max(s * s);
        }
    }
    (lo, hi)
}

/// Gram matrix `[<x_i, x_j>]` flattened in block `b`: `X X*`.
pub fn gram_block(elements: &[ModuleVector], b: usize) -> NMat {
    let x = stacked(elements, b);
    &x * x.adjoint()
}

pub fn random_shape<R: Rng>(rng: &mut R, choices: &[&[usize]]) -> AlgebraShape {
    let c = choices[rng.random_range(0..choices.len())];
    AlgebraShape::new(c.to_vec()).expect("valid shape")
}
