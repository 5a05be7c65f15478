//! Seeded generators for random matrices, algebra elements, frames and
//! resolutions of the identity. Used for probe vectors inside verifications,
//! by the CLI, and by the test suites.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::matrix::{polar, CMatrix, C64};
use crate::module::{ModuleOperator, ModuleVector, SubmoduleDescriptor};

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with independent standard complex Gaussian entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    gaussian_matrix(rng, n, n).hermitian_part()
}

/// Haar-distributed unitary, via the polar factor of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = gaussian_matrix(rng, n, n);
    polar(&g).expect("polar of a Gaussian matrix").0
}

/// Orthogonal projection of the given rank onto a uniformly random subspace.
pub fn random_projection<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> CMatrix {
    let u = random_unitary(rng, n);
    let cols = u.submatrix(0, 0, n, rank.min(n));
    &cols * &cols.adjoint()
}

pub fn random_element<R: Rng + ?Sized>(rng: &mut R, shape: &AlgebraShape) -> AlgebraElement {
    let blocks = shape
        .blocks()
        .iter()
        .map(|&k| gaussian_matrix(rng, k, k))
        .collect();
    AlgebraElement::from_blocks(shape.clone(), blocks).expect("block sizes match shape")
}

pub fn random_vector<R: Rng + ?Sized>(
    rng: &mut R,
    shape: &AlgebraShape,
    rank: usize,
) -> ModuleVector {
    let blocks = shape
        .blocks()
        .iter()
        .map(|&k| gaussian_matrix(rng, k, rank * k))
        .collect();
    ModuleVector::from_blocks(shape.clone(), rank, blocks).expect("block sizes match shape")
}

/// Random vector of the submodule (the ambient random vector projected).
pub fn random_vector_in<R: Rng + ?Sized>(
    rng: &mut R,
    module: &SubmoduleDescriptor,
) -> ModuleVector {
    let x = random_vector(rng, module.shape(), module.rank());
    module.project(&x).expect("shapes agree")
}

/// Random operator on `A^n` with Gaussian flattened blocks.
pub fn random_operator<R: Rng + ?Sized>(
    rng: &mut R,
    shape: &AlgebraShape,
    n: usize,
) -> ModuleOperator {
    let blocks = shape
        .blocks()
        .iter()
        .map(|&k| gaussian_matrix(rng, n * k, n * k))
        .collect();
    ModuleOperator::from_blocks(shape.clone(), n, n, blocks).expect("block sizes match shape")
}

/// Random unitary operator on `A^n`.
pub fn random_unitary_operator<R: Rng + ?Sized>(
    rng: &mut R,
    shape: &AlgebraShape,
    n: usize,
) -> ModuleOperator {
    let blocks = shape
        .blocks()
        .iter()
        .map(|&k| random_unitary(rng, n * k))
        .collect();
    ModuleOperator::from_blocks(shape.clone(), n, n, blocks).expect("block sizes match shape")
}

/// Orthogonally complemented submodule of `A^n`: in each block a random
/// nonzero-rank projection (rank chosen uniformly), or the full module when
/// `full` is set.
pub fn random_submodule<R: Rng + ?Sized>(
    rng: &mut R,
    shape: &AlgebraShape,
    n: usize,
    full: bool,
) -> SubmoduleDescriptor {
    if full {
        return SubmoduleDescriptor::full(shape.clone(), n);
    }
    let blocks = shape
        .blocks()
        .iter()
        .map(|&k| {
            let dim = n * k;
            let rank = rng.random_range(1..=dim);
            random_projection(rng, dim, rank)
        })
        .collect();
    let p = ModuleOperator::from_blocks(shape.clone(), n, n, blocks).expect("block sizes match");
    SubmoduleDescriptor::with_projection(p, 1e-9).expect("random projection is a projection")
}

/// Random partial isometry on `A^n`: the polar factor of a Gaussian operator
/// composed with a random projection of random rank.
pub fn random_partial_isometry<R: Rng + ?Sized>(
    rng: &mut R,
    shape: &AlgebraShape,
    n: usize,
) -> ModuleOperator {
    let blocks = shape
        .blocks()
        .iter()
        .map(|&k| {
            let dim = n * k;
            let rank = rng.random_range(1..=dim);
            let p = random_projection(rng, dim, rank);
            let u = random_unitary(rng, dim);
            &p * &u
        })
        .collect();
    ModuleOperator::from_blocks(shape.clone(), n, n, blocks).expect("block sizes match shape")
}

/// Random resolution of the identity in `M_d`: the `d x d` row blocks of the
/// first `d` columns of a random `kd x kd` unitary, so that `sum b_i* b_i = I`.
pub fn random_resolution<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> Vec<CMatrix> {
    let u = random_unitary(rng, k * d);
    (0..k).map(|i| u.submatrix(i * d, 0, d, d)).collect()
}

/// Random Hilbert-space frame: `k` Gaussian vectors in `C^n`.
pub fn random_hilbert_vectors<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<Vec<C64>> {
    (0..k).map(|_| gaussian_vector(rng, n)).collect()
}
