//! Finite-dimensional C*-algebras `A = M_{k_1}(C) + ... + M_{k_m}(C)`.
//!
//! Elements are stored block by block. Matrices over `A` (`AlgebraMatrix`)
//! are stored flattened: for each algebra block of size `k` an `l x c`
//! matrix over `A` becomes one complex `(l k) x (c k)` matrix whose `(i, j)`
//! sub-block is the block component of entry `(i, j)`. Products, adjoints,
//! norms and Moore-Penrose inverses of matrices over `A` are then computed
//! block by block on the flattened matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{self, CMatrix, HermitianEigen, C64};

/// Block sizes `(k_1, ..., k_m)` of a finite-dimensional C*-algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct AlgebraShape(Vec<usize>);

impl AlgebraShape {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(Error::InvalidInput(format!(
                "algebra shape needs at least one block and positive block sizes, got {blocks:?}"
            )));
        }
        Ok(AlgebraShape(blocks))
    }

    /// The complex numbers, shape `[1]`.
    pub fn complex() -> Self {
        AlgebraShape(vec![1])
    }

    /// Full matrix algebra `M_d`, shape `[d]`.
    pub fn matrices(d: usize) -> Self {
        assert!(d > 0);
        AlgebraShape(vec![d])
    }

    pub fn blocks(&self) -> &[usize] {
        &self.0
    }

    pub fn num_blocks(&self) -> usize {
        self.0.len()
    }

    /// Complex dimension `sum k_i^2`.
    pub fn dimension(&self) -> usize {
        self.0.iter().map(|k| k * k).sum()
    }

    pub fn ensure_same(&self, other: &AlgebraShape) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch(format!(
                "algebra shapes {:?} and {:?}",
                self.0, other.0
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for AlgebraShape {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        AlgebraShape::new(v)
    }
}

impl From<AlgebraShape> for Vec<usize> {
    fn from(s: AlgebraShape) -> Vec<usize> {
        s.0
    }
}

/// Element of `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    shape: AlgebraShape,
    blocks: Vec<CMatrix>,
}

impl AlgebraElement {
    pub fn from_blocks(shape: AlgebraShape, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != shape.num_blocks()
            || blocks
                .iter()
                .zip(shape.blocks())
                .any(|(b, &k)| b.shape() != (k, k))
        {
            return Err(Error::ShapeMismatch(format!(
                "blocks do not match algebra shape {:?}",
                shape.blocks()
            )));
        }
        Ok(AlgebraElement { shape, blocks })
    }

    pub fn zero(shape: &AlgebraShape) -> Self {
        Self::scalar(shape, C64::new(0.0, 0.0))
    }

    pub fn unit(shape: &AlgebraShape) -> Self {
        Self::scalar(shape, C64::new(1.0, 0.0))
    }

    /// `c` times the unit.
    pub fn scalar(shape: &AlgebraShape, c: C64) -> Self {
        let blocks = shape
            .blocks()
            .iter()
            .map(|&k| CMatrix::identity(k).scale(c))
            .collect();
        AlgebraElement {
            shape: shape.clone(),
            blocks,
        }
    }

    /// Element of a commutative algebra `C^m` (shape `[1, ..., 1]`).
    pub fn diagonal(values: &[C64]) -> Self {
        let shape = AlgebraShape(vec![1; values.len()]);
        let blocks = values.iter().map(|&v| CMatrix::from_diag(&[v])).collect();
        AlgebraElement { shape, blocks }
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &CMatrix {
        &self.blocks[i]
    }

    pub fn into_blocks(self) -> Vec<CMatrix> {
        self.blocks
    }

    fn zip_blocks(
        &self,
        other: &AlgebraElement,
        f: impl Fn(&CMatrix, &CMatrix) -> CMatrix,
    ) -> Result<AlgebraElement> {
        self.shape.ensure_same(&other.shape)?;
        Ok(AlgebraElement {
            shape: self.shape.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    fn map_blocks(&self, f: impl Fn(&CMatrix) -> CMatrix) -> AlgebraElement {
        AlgebraElement {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    pub fn mul(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.zip_blocks(other, |a, b| a * b)
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.zip_blocks(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.zip_blocks(other, |a, b| a - b)
    }

    pub fn scale(&self, c: C64) -> AlgebraElement {
        self.map_blocks(|b| b.scale(c))
    }

    pub fn adjoint(&self) -> AlgebraElement {
        self.map_blocks(CMatrix::adjoint)
    }

    /// C*-norm: the largest block operator norm.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(matrix::op_norm).fold(0.0, f64::max)
    }

    /// `norm(self - other)`, or infinity if the shapes differ.
    pub fn distance(&self, other: &AlgebraElement) -> f64 {
        self.sub(other).map_or(f64::INFINITY, |d| d.norm())
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(CMatrix::hermitian_defect)
            .fold(0.0, f64::max)
    }

    /// Default positivity tolerance `1e-9 * (1 + |a|)`.
    pub fn default_tol(&self) -> f64 {
        1e-9 * (1.0 + self.norm())
    }

    fn eigen_blocks(&self, tol: f64) -> Result<Vec<HermitianEigen>> {
        self.blocks
            .iter()
            .map(|b| matrix::eig_hermitian(b, Some(tol)))
            .collect()
    }

    /// Sorted union of the block spectra of a Hermitian element.
    pub fn spectrum(&self, tol: f64) -> Result<Vec<f64>> {
        let mut all: Vec<f64> = self
            .eigen_blocks(tol)?
            .into_iter()
            .flat_map(|e| e.values)
            .collect();
        all.sort_by(f64::total_cmp);
        Ok(all)
    }

    /// Every block eigenvalue is at least `-tol`. Fails with `NotHermitian`
    /// if the element is not self-adjoint within `tol`.
    pub fn is_positive(&self, tol: f64) -> Result<bool> {
        Ok(self.spectrum(tol)?.first().is_none_or(|&l| l >= -tol))
    }

    /// `self <= other` in the positive order of `A`.
    pub fn leq(&self, other: &AlgebraElement, tol: f64) -> Result<bool> {
        other.sub(self)?.is_positive(tol)
    }

    /// Smallest projection `p` with `p a = a`, by eigenvalue thresholding at
    /// `rank_tol` in each block. The carrier of zero is zero.
    pub fn carrier_projection(&self, rank_tol: f64) -> Result<AlgebraElement> {
        let tol = rank_tol.max(1e-12);
        let blocks = self
            .eigen_blocks(self.default_tol().max(tol))?
            .into_iter()
            .map(|e| {
                if let Some(&bad) = e.values.iter().find(|&&l| l < -tol) {
                    return Err(Error::NotPositive {
                        eigenvalue: bad,
                        tol,
                    });
                }
                Ok(e.map_spectrum(|l| if l > rank_tol { 1.0 } else { 0.0 }))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AlgebraElement {
            shape: self.shape.clone(),
            blocks,
        })
    }

    /// `p^2 = p = p*` within `tol`.
    pub fn is_projection(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol && self.blocks.iter().all(|b| (b * b).max_abs_diff(b) <= tol)
    }

    /// Positive square root.
    pub fn sqrt(&self, tol: f64) -> Result<AlgebraElement> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| matrix::sqrt_psd(b, tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(AlgebraElement {
            shape: self.shape.clone(),
            blocks,
        })
    }
}

/// `l x c` matrix over `A`, stored flattened per algebra block.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraMatrix {
    shape: AlgebraShape,
    rows: usize,
    cols: usize,
    blocks: Vec<CMatrix>,
}

impl AlgebraMatrix {
    pub fn from_flat(
        shape: AlgebraShape,
        rows: usize,
        cols: usize,
        blocks: Vec<CMatrix>,
    ) -> Result<Self> {
        if blocks.len() != shape.num_blocks()
            || blocks
                .iter()
                .zip(shape.blocks())
                .any(|(b, &k)| b.shape() != (rows * k, cols * k))
        {
            return Err(Error::ShapeMismatch(format!(
                "flattened blocks do not describe a {rows}x{cols} matrix over {:?}",
                shape.blocks()
            )));
        }
        Ok(AlgebraMatrix {
            shape,
            rows,
            cols,
            blocks,
        })
    }

    pub fn zeros(shape: &AlgebraShape, rows: usize, cols: usize) -> Self {
        let blocks = shape
            .blocks()
            .iter()
            .map(|&k| CMatrix::zeros(rows * k, cols * k))
            .collect();
        AlgebraMatrix {
            shape: shape.clone(),
            rows,
            cols,
            blocks,
        }
    }

    pub fn identity(shape: &AlgebraShape, n: usize) -> Self {
        let blocks = shape
            .blocks()
            .iter()
            .map(|&k| CMatrix::identity(n * k))
            .collect();
        AlgebraMatrix {
            shape: shape.clone(),
            rows: n,
            cols: n,
            blocks,
        }
    }

    /// Builds a matrix from its entries (outer index = row).
    pub fn from_entries(shape: &AlgebraShape, entries: &[Vec<AlgebraElement>]) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        if entries.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged matrix over A".into()));
        }
        let mut m = Self::zeros(shape, rows, cols);
        for (i, row) in entries.iter().enumerate() {
            for (j, a) in row.iter().enumerate() {
                m.set_entry(i, j, a)?;
            }
        }
        Ok(m)
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Flattened complex matrix of algebra block `b`.
    pub fn flat(&self, b: usize) -> &CMatrix {
        &self.blocks[b]
    }

    pub fn flats(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn into_flats(self) -> Vec<CMatrix> {
        self.blocks
    }

    pub fn entry(&self, i: usize, j: usize) -> AlgebraElement {
        assert!(i < self.rows && j < self.cols);
        let blocks = self
            .shape
            .blocks()
            .iter()
            .zip(&self.blocks)
            .map(|(&k, f)| f.submatrix(i * k, j * k, k, k))
            .collect();
        AlgebraElement {
            shape: self.shape.clone(),
            blocks,
        }
    }

    pub fn set_entry(&mut self, i: usize, j: usize, a: &AlgebraElement) -> Result<()> {
        self.shape.ensure_same(a.shape())?;
        assert!(i < self.rows && j < self.cols);
        for ((&k, f), blk) in self.shape.0.iter().zip(&mut self.blocks).zip(a.blocks()) {
            f.set_submatrix(i * k, j * k, blk);
        }
        Ok(())
    }

    pub fn entries(&self) -> Vec<Vec<AlgebraElement>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    pub fn mul(&self, other: &AlgebraMatrix) -> Result<AlgebraMatrix> {
        self.shape.ensure_same(&other.shape)?;
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{} over A",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.matmul(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(AlgebraMatrix {
            shape: self.shape.clone(),
            rows: self.rows,
            cols: other.cols,
            blocks,
        })
    }

    fn zip(
        &self,
        other: &AlgebraMatrix,
        f: impl Fn(&CMatrix, &CMatrix) -> Result<CMatrix>,
    ) -> Result<AlgebraMatrix> {
        self.shape.ensure_same(&other.shape)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} and {}x{} over A",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(AlgebraMatrix {
            shape: self.shape.clone(),
            rows: self.rows,
            cols: self.cols,
            blocks,
        })
    }

    pub fn add(&self, other: &AlgebraMatrix) -> Result<AlgebraMatrix> {
        self.zip(other, |a, b| a.try_add(b))
    }

    pub fn sub(&self, other: &AlgebraMatrix) -> Result<AlgebraMatrix> {
        self.zip(other, |a, b| a.try_sub(b))
    }

    pub fn scale(&self, c: C64) -> AlgebraMatrix {
        AlgebraMatrix {
            shape: self.shape.clone(),
            rows: self.rows,
            cols: self.cols,
            blocks: self.blocks.iter().map(|b| b.scale(c)).collect(),
        }
    }

    /// Transpose with entrywise adjoint.
    pub fn adjoint(&self) -> AlgebraMatrix {
        AlgebraMatrix {
            shape: self.shape.clone(),
            rows: self.cols,
            cols: self.rows,
            blocks: self.blocks.iter().map(CMatrix::adjoint).collect(),
        }
    }

    /// C*-norm of `M_{l,c}(A)`: the largest flattened operator norm.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(matrix::op_norm).fold(0.0, f64::max)
    }

    /// Largest A-norm among the entries.
    pub fn max_entry_norm(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max(self.entry(i, j).norm());
            }
        }
        worst
    }

    /// Largest entrywise A-norm of `self - other`; infinity on mismatch.
    pub fn entry_distance(&self, other: &AlgebraMatrix) -> f64 {
        self.sub(other)
            .map_or(f64::INFINITY, |d| d.max_entry_norm())
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(CMatrix::hermitian_defect)
            .fold(0.0, f64::max)
    }

    /// Idempotent and self-adjoint within `tol` (flattened entry residuals).
    pub fn is_projection(&self, tol: f64) -> bool {
        self.rows == self.cols
            && self.hermitian_defect() <= tol
            && self.blocks.iter().all(|b| (b * b).max_abs_diff(b) <= tol)
    }

    /// Moore-Penrose inverse over `A`: the blockwise pseudoinverse of the
    /// flattened matrices. `rank_tol = None` uses `1e-9 * sigma_max` per block.
    pub fn mp_inverse(&self, rank_tol: Option<f64>) -> Result<AlgebraMatrix> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| matrix::pinv(b, rank_tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(AlgebraMatrix {
            shape: self.shape.clone(),
            rows: self.cols,
            cols: self.rows,
            blocks,
        })
    }
}

/// Moore-Penrose inverse of a matrix over `A`.
pub fn mp_inverse_matrix(f: &AlgebraMatrix, rank_tol: Option<f64>) -> Result<AlgebraMatrix> {
    f.mp_inverse(rank_tol)
}

/// Residuals of `FGF = F`, `GFG = G`, `(FG)* = FG`, `(GF)* = GF`, each the
/// largest entrywise A-norm of the defect.
pub fn penrose_residuals(f: &AlgebraMatrix, g: &AlgebraMatrix) -> Result<[f64; 4]> {
    let fg = f.mul(g)?;
    let gf = g.mul(f)?;
    Ok([
        fg.mul(f)?.entry_distance(f),
        gf.mul(g)?.entry_distance(g),
        fg.adjoint().entry_distance(&fg),
        gf.adjoint().entry_distance(&gf),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian_matrix, random_element};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn shape(b: &[usize]) -> AlgebraShape {
        AlgebraShape::new(b.to_vec()).unwrap()
    }

    #[test]
    fn shape_validation() {
        assert!(AlgebraShape::new(vec![]).is_err());
        assert!(AlgebraShape::new(vec![2, 0]).is_err());
        assert_eq!(shape(&[2, 1]).dimension(), 5);
    }

    #[test]
    fn unit_adjoint_and_norm() {
        let s = shape(&[2, 1, 3]);
        let u = AlgebraElement::unit(&s);
        assert_eq!(u.adjoint(), u);
        assert!((u.norm() - 1.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = random_element(&mut rng, &s);
        assert!(u.mul(&a).unwrap().distance(&a) < 1e-15);
        assert!(a.mul(&u).unwrap().distance(&a) < 1e-15);
    }

    #[test]
    fn scalar_blocks() {
        let a = AlgebraElement::diagonal(&[c(2.0, 0.0), c(0.0, 3.0)]);
        let adj = a.adjoint();
        assert_eq!(adj, AlgebraElement::diagonal(&[c(2.0, 0.0), c(0.0, -3.0)]));
        assert!((a.norm() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn mismatched_shapes_fail() {
        let a = AlgebraElement::unit(&shape(&[1]));
        let b = AlgebraElement::unit(&shape(&[2]));
        assert!(matches!(a.mul(&b), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn positivity() {
        let s = shape(&[2]);
        let u = AlgebraElement::unit(&s);
        assert!(u.is_positive(1e-9).unwrap());
        assert!(AlgebraElement::zero(&s).leq(&u, 1e-9).unwrap());
        let d = AlgebraElement::from_blocks(s.clone(), vec![CMatrix::from_real_diag(&[1.0, -0.5])])
            .unwrap();
        assert!(!d.is_positive(1e-9).unwrap());
        let nh = AlgebraElement::from_blocks(
            s,
            vec![CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]])],
        )
        .unwrap();
        assert!(matches!(
            nh.is_positive(1e-9),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn carrier_projections() {
        let s = shape(&[2]);
        let u = AlgebraElement::unit(&s);
        assert!(u.carrier_projection(1e-9).unwrap().distance(&u) < 1e-14);
        let d = AlgebraElement::from_blocks(s.clone(), vec![CMatrix::from_real_diag(&[5.0, 0.0])])
            .unwrap();
        let p = d.carrier_projection(1e-9).unwrap();
        assert!(
            p.block(0)
                .max_abs_diff(&CMatrix::from_real_diag(&[1.0, 0.0]))
                < 1e-14
        );
        let z = AlgebraElement::zero(&shape(&[1, 2]));
        assert!(z.carrier_projection(1e-9).unwrap().norm() == 0.0);
    }

    #[test]
    fn carrier_of_rank_deficient_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = gaussian_matrix(&mut rng, 4, 2);
        let a = AlgebraElement::from_blocks(shape(&[4]), vec![&g * &g.adjoint()]).unwrap();
        let p = a.carrier_projection(1e-9).unwrap();
        assert!(p.mul(&a).unwrap().distance(&a) < 1e-9);
        // numerical rank via singular values
        let rank = matrix::svd(a.block(0)).unwrap().rank(1e-9);
        assert!((p.block(0).trace().re - rank as f64).abs() < 1e-9);
        assert!(p.is_projection(1e-9));
    }

    #[test]
    fn mp_inverse_trivial_cases() {
        let s = shape(&[2, 1]);
        let id = AlgebraMatrix::identity(&s, 3);
        assert!(mp_inverse_matrix(&id, None).unwrap().entry_distance(&id) < 1e-14);
        let two = AlgebraMatrix::from_entries(
            &AlgebraShape::complex(),
            &[vec![AlgebraElement::scalar(
                &AlgebraShape::complex(),
                c(2.0, 0.0),
            )]],
        )
        .unwrap();
        let inv = mp_inverse_matrix(&two, None).unwrap();
        assert!((inv.entry(0, 0).block(0)[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mp_inverse_random_2x3() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = shape(&[2, 1]);
        let entries: Vec<Vec<AlgebraElement>> = (0..2)
            .map(|_| (0..3).map(|_| random_element(&mut rng, &s)).collect())
            .collect();
        let f = AlgebraMatrix::from_entries(&s, &entries).unwrap();
        let g = mp_inverse_matrix(&f, None).unwrap();
        assert_eq!((g.rows(), g.cols()), (3, 2));
        for r in penrose_residuals(&f, &g).unwrap() {
            assert!(r < 1e-9, "{r}");
        }
    }

    #[test]
    fn entry_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = shape(&[2, 3]);
        let a = random_element(&mut rng, &s);
        let mut m = AlgebraMatrix::zeros(&s, 2, 2);
        m.set_entry(1, 0, &a).unwrap();
        assert_eq!(m.entry(1, 0), a);
        assert_eq!(m.entry(0, 1), AlgebraElement::zero(&s));
    }

    fn arb_shape() -> impl Strategy<Value = AlgebraShape> {
        prop::collection::vec(1usize..=3, 1..=3).prop_map(|b| AlgebraShape::new(b).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_adjoint_reverses_products(s in arb_shape(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_element(&mut rng, &s);
            let b = random_element(&mut rng, &s);
            let lhs = a.mul(&b).unwrap().adjoint();
            let rhs = b.adjoint().mul(&a.adjoint()).unwrap();
            prop_assert!(lhs.distance(&rhs) <= 1e-12 * (1.0 + a.norm() * b.norm()));
        }

        #[test]
        fn prop_cstar_identity(s in arb_shape(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_element(&mut rng, &s);
            let lhs = a.adjoint().mul(&a).unwrap().norm();
            let n = a.norm();
            prop_assert!((lhs - n * n).abs() <= 1e-10 * (1.0 + n * n));
        }

        #[test]
        fn prop_star_square_is_positive(s in arb_shape(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_element(&mut rng, &s);
            let p = a.adjoint().mul(&a).unwrap();
            prop_assert!(p.is_positive(p.default_tol()).unwrap());
        }

        #[test]
        fn prop_order_is_transitive(s in arb_shape(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_element(&mut rng, &s);
            let x = random_element(&mut rng, &s);
            let y = random_element(&mut rng, &s);
            let a = a.adjoint().add(&a).unwrap();
            let b = a.add(&x.adjoint().mul(&x).unwrap()).unwrap();
            let c = b.add(&y.adjoint().mul(&y).unwrap()).unwrap();
            let tol = 1e-9 * (1.0 + c.norm());
            prop_assert!(a.leq(&b, tol).unwrap());
            prop_assert!(b.leq(&c, tol).unwrap());
            prop_assert!(a.leq(&c, 2.0 * tol).unwrap());
        }

        #[test]
        fn prop_carrier_commutes(s in arb_shape(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_element(&mut rng, &s);
            let a = x.adjoint().mul(&x).unwrap();
            let p = a.carrier_projection(1e-9).unwrap();
            let comm = p.mul(&a).unwrap().sub(&a.mul(&p).unwrap()).unwrap();
            prop_assert!(comm.norm() <= 1e-9 * (1.0 + a.norm()));
        }
    }
}
