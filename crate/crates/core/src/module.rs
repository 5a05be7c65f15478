//! The free Hilbert `A`-module `A^n`, its adjointable operators and its
//! orthogonally complemented submodules.
//!
//! `A` acts on the left. Vectors are rows `x = (x_1, ..., x_n)` and the
//! inner product is `<x, y> = sum_q x_q y_q*`, which is `A`-linear in the
//! first slot. An `A`-linear map `A^n -> A^m` is right multiplication by an
//! `n x m` matrix over `A`: `(T x)_p = sum_q x_q T[q][p]`. In flattened form
//! (see [`crate::algebra`]) a vector of block `b` is a `k x nk` complex
//! matrix `X`, and `T x` is `X T_b`. Consequently the flattened matrix of a
//! composite `S after T` is `T_b S_b`, and the adjoint operator is the
//! flattened conjugate transpose.

use crate::algebra::{AlgebraElement, AlgebraMatrix, AlgebraShape};
use crate::error::{Error, Result};
use crate::matrix::{self, CMatrix, C64};

/// Element of `A^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleVector(AlgebraMatrix);

impl ModuleVector {
    pub fn from_coords(shape: &AlgebraShape, coords: &[AlgebraElement]) -> Result<Self> {
        let m = AlgebraMatrix::from_entries(shape, &[coords.to_vec()])?;
        if coords.is_empty() {
            return Ok(ModuleVector(AlgebraMatrix::zeros(shape, 1, 0)));
        }
        Ok(ModuleVector(m))
    }

    /// From flattened blocks, block `b` being `k_b x (rank k_b)`.
    pub fn from_blocks(shape: AlgebraShape, rank: usize, blocks: Vec<CMatrix>) -> Result<Self> {
        Ok(ModuleVector(AlgebraMatrix::from_flat(
            shape, 1, rank, blocks,
        )?))
    }

    pub fn zero(shape: &AlgebraShape, rank: usize) -> Self {
        ModuleVector(AlgebraMatrix::zeros(shape, 1, rank))
    }

    /// Standard basis vector `e_q = (0, .., 1_A, .., 0)`.
    pub fn basis(shape: &AlgebraShape, rank: usize, q: usize) -> Self {
        let mut m = AlgebraMatrix::zeros(shape, 1, rank);
        m.set_entry(0, q, &AlgebraElement::unit(shape))
            .expect("same shape");
        ModuleVector(m)
    }

    pub fn shape(&self) -> &AlgebraShape {
        self.0.shape()
    }

    pub fn rank(&self) -> usize {
        self.0.cols()
    }

    pub fn coord(&self, q: usize) -> AlgebraElement {
        self.0.entry(0, q)
    }

    pub fn coords(&self) -> Vec<AlgebraElement> {
        (0..self.rank()).map(|q| self.coord(q)).collect()
    }

    /// Flattened block `b`: a `k_b x (rank k_b)` matrix.
    pub fn flat(&self, b: usize) -> &CMatrix {
        self.0.flat(b)
    }

    pub fn flats(&self) -> &[CMatrix] {
        self.0.flats()
    }

    pub fn as_matrix(&self) -> &AlgebraMatrix {
        &self.0
    }

    /// Left action `a x`.
    pub fn left_mul(&self, a: &AlgebraElement) -> Result<ModuleVector> {
        let am = AlgebraMatrix::from_entries(self.shape(), &[vec![a.clone()]])?;
        Ok(ModuleVector(am.mul(&self.0)?))
    }

    pub fn add(&self, other: &ModuleVector) -> Result<ModuleVector> {
        Ok(ModuleVector(self.0.add(&other.0)?))
    }

    pub fn sub(&self, other: &ModuleVector) -> Result<ModuleVector> {
        Ok(ModuleVector(self.0.sub(&other.0)?))
    }

    pub fn scale(&self, c: C64) -> ModuleVector {
        ModuleVector(self.0.scale(c))
    }

    /// `|x| = |<x, x>|^{1/2}`.
    pub fn norm(&self) -> f64 {
        inner(self, self).map_or(f64::NAN, |g| g.norm().sqrt())
    }

    /// Module norm of `self - other`; infinity on mismatch.
    pub fn distance(&self, other: &ModuleVector) -> f64 {
        self.sub(other).map_or(f64::INFINITY, |d| d.norm())
    }
}

fn same_space(x: &ModuleVector, y: &ModuleVector) -> Result<()> {
    if x.shape() != y.shape() || x.rank() != y.rank() {
        return Err(Error::ShapeMismatch(format!(
            "vectors of A^{} over {:?} and A^{} over {:?}",
            x.rank(),
            x.shape().blocks(),
            y.rank(),
            y.shape().blocks()
        )));
    }
    Ok(())
}

/// A-valued inner product `<x, y> = sum_q x_q y_q*`.
pub fn inner(x: &ModuleVector, y: &ModuleVector) -> Result<AlgebraElement> {
    same_space(x, y)?;
    let blocks = x
        .flats()
        .iter()
        .zip(y.flats())
        .map(|(a, b)| a * &b.adjoint())
        .collect();
    AlgebraElement::from_blocks(x.shape().clone(), blocks)
}

/// Adjointable `A`-linear map `A^n -> A^m`, stored as its `n x m` matrix over `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleOperator(AlgebraMatrix);

impl ModuleOperator {
    pub fn from_matrix(m: AlgebraMatrix) -> Self {
        ModuleOperator(m)
    }

    /// Block `b` must be `(domain k_b) x (codomain k_b)`.
    pub fn from_blocks(
        shape: AlgebraShape,
        domain: usize,
        codomain: usize,
        blocks: Vec<CMatrix>,
    ) -> Result<Self> {
        Ok(ModuleOperator(AlgebraMatrix::from_flat(
            shape, domain, codomain, blocks,
        )?))
    }

    /// `entries[q][p]` is the coefficient sending coordinate `q` to `p`.
    pub fn from_entries(shape: &AlgebraShape, entries: &[Vec<AlgebraElement>]) -> Result<Self> {
        Ok(ModuleOperator(AlgebraMatrix::from_entries(shape, entries)?))
    }

    pub fn identity(shape: &AlgebraShape, n: usize) -> Self {
        ModuleOperator(AlgebraMatrix::identity(shape, n))
    }

    pub fn zero(shape: &AlgebraShape, domain: usize, codomain: usize) -> Self {
        ModuleOperator(AlgebraMatrix::zeros(shape, domain, codomain))
    }

    pub fn shape(&self) -> &AlgebraShape {
        self.0.shape()
    }

    pub fn domain_rank(&self) -> usize {
        self.0.rows()
    }

    pub fn codomain_rank(&self) -> usize {
        self.0.cols()
    }

    pub fn flat(&self, b: usize) -> &CMatrix {
        self.0.flat(b)
    }

    pub fn flats(&self) -> &[CMatrix] {
        self.0.flats()
    }

    pub fn as_matrix(&self) -> &AlgebraMatrix {
        &self.0
    }

    pub fn entry(&self, q: usize, p: usize) -> AlgebraElement {
        self.0.entry(q, p)
    }

    pub fn apply(&self, x: &ModuleVector) -> Result<ModuleVector> {
        if x.shape() != self.shape() || x.rank() != self.domain_rank() {
            return Err(Error::ShapeMismatch(format!(
                "operator on A^{} applied to a vector of A^{}",
                self.domain_rank(),
                x.rank()
            )));
        }
        Ok(ModuleVector(x.as_matrix().mul(&self.0)?))
    }

    /// The operator `self after inner` (apply `inner` first).
    pub fn compose(&self, inner: &ModuleOperator) -> Result<ModuleOperator> {
        Ok(ModuleOperator(inner.0.mul(&self.0)?))
    }

    pub fn adjoint(&self) -> ModuleOperator {
        ModuleOperator(self.0.adjoint())
    }

    pub fn add(&self, other: &ModuleOperator) -> Result<ModuleOperator> {
        Ok(ModuleOperator(self.0.add(&other.0)?))
    }

    pub fn sub(&self, other: &ModuleOperator) -> Result<ModuleOperator> {
        Ok(ModuleOperator(self.0.sub(&other.0)?))
    }

    pub fn scale(&self, c: C64) -> ModuleOperator {
        ModuleOperator(self.0.scale(c))
    }

    /// Operator norm (the C*-norm of the matrix over `A`).
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn distance(&self, other: &ModuleOperator) -> f64 {
        self.sub(other).map_or(f64::INFINITY, |d| d.norm())
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.0.hermitian_defect()
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        self.0.is_projection(tol)
    }

    /// Sorted union of the spectra of the flattened blocks. This is the
    /// spectrum of the operator on the Hilbert module.
    pub fn spectrum(&self, tol: f64) -> Result<Vec<f64>> {
        if self.domain_rank() != self.codomain_rank() {
            return Err(Error::ShapeMismatch(
                "spectrum of a non-square operator".into(),
            ));
        }
        let mut all = Vec::new();
        for f in self.flats() {
            all.extend(matrix::eig_hermitian(f, Some(tol))?.values);
        }
        all.sort_by(f64::total_cmp);
        Ok(all)
    }

    /// Moore-Penrose inverse of the operator.
    pub fn pinv(&self, rank_tol: Option<f64>) -> Result<ModuleOperator> {
        Ok(ModuleOperator(self.0.mp_inverse(rank_tol)?))
    }
}

/// Spectrum of a self-adjoint module operator.
pub fn op_spectrum(t: &ModuleOperator, tol: f64) -> Result<Vec<f64>> {
    t.spectrum(tol)
}

/// Orthogonal summand of `A^n`, given by a projection (`None` = all of `A^n`).
#[derive(Clone, Debug, PartialEq)]
pub struct SubmoduleDescriptor {
    shape: AlgebraShape,
    rank: usize,
    projection: Option<ModuleOperator>,
}

impl SubmoduleDescriptor {
    pub fn full(shape: AlgebraShape, rank: usize) -> Self {
        SubmoduleDescriptor {
            shape,
            rank,
            projection: None,
        }
    }

    /// Range of `p`; fails unless `p^2 = p = p*` within `tol`.
    pub fn with_projection(p: ModuleOperator, tol: f64) -> Result<Self> {
        if p.domain_rank() != p.codomain_rank() || !p.is_projection(tol) {
            return Err(Error::InvalidInput(
                "submodule projection must be idempotent and self-adjoint".into(),
            ));
        }
        Ok(SubmoduleDescriptor {
            shape: p.shape().clone(),
            rank: p.domain_rank(),
            projection: Some(p),
        })
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    /// Rank `n` of the ambient module `A^n`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn projection(&self) -> Option<&ModuleOperator> {
        self.projection.as_ref()
    }

    /// The projection, with the identity standing in for the full module.
    pub fn projection_operator(&self) -> ModuleOperator {
        self.projection
            .clone()
            .unwrap_or_else(|| ModuleOperator::identity(&self.shape, self.rank))
    }

    /// Flattened projection for algebra block `b`.
    pub fn projection_flat(&self, b: usize) -> CMatrix {
        match &self.projection {
            Some(p) => p.flat(b).clone(),
            None => CMatrix::identity(self.rank * self.shape.blocks()[b]),
        }
    }

    pub fn project(&self, x: &ModuleVector) -> Result<ModuleVector> {
        match &self.projection {
            Some(p) => p.apply(x),
            None => {
                if x.shape() != &self.shape || x.rank() != self.rank {
                    return Err(Error::ShapeMismatch(
                        "vector outside the ambient module".into(),
                    ));
                }
                Ok(x.clone())
            }
        }
    }

    /// `|P x - x|`.
    pub fn residual(&self, x: &ModuleVector) -> Result<f64> {
        Ok(self.project(x)?.distance(x))
    }
}

/// Embeds vectors of `C^n` into `A^n` as `x -> (x_q 1_A)_q`.
pub fn embed_hilbert_frame(
    shape: &AlgebraShape,
    vectors: &[Vec<C64>],
) -> Result<Vec<ModuleVector>> {
    vectors
        .iter()
        .map(|v| {
            let coords: Vec<AlgebraElement> = v
                .iter()
                .map(|&z| AlgebraElement::scalar(shape, z))
                .collect();
            ModuleVector::from_coords(shape, &coords)
        })
        .collect()
}
