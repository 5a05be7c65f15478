//! Modular frames of orthogonally complemented submodules of `A^n`.
//!
//! A finite sequence `{x_j}` is a frame of the submodule `M` when
//! `C <x,x> <= sum_j <x,x_j><x_j,x> <= D <x,x>` for all `x` in `M`. With the
//! Gram-type operator `G = theta* theta` (flattened: `sum_j X_j* X_j`) the
//! middle term is `<G x, x>`, so the cone inequality is the operator
//! inequality `C P <= G <= D P` and the optimal bounds are the extreme
//! eigenvalues of `G` on the range of the module projection `P`.

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::error::{Error, Result};
use crate::matrix::{self, CMatrix, HermitianEigen, C64};
use crate::module::{inner, ModuleOperator, ModuleVector, SubmoduleDescriptor};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Frame {
    module: SubmoduleDescriptor,
    elements: Vec<ModuleVector>,
    gram: ModuleOperator,
}

impl Frame {
    /// Frame candidate of `module`. Every element must lie in the module
    /// within `tol (1 + |x|)`.
    pub fn new(module: SubmoduleDescriptor, elements: Vec<ModuleVector>, tol: f64) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::EmptyFrame);
        }
        for x in &elements {
            if x.shape() != module.shape() || x.rank() != module.rank() {
                return Err(Error::ShapeMismatch(format!(
                    "frame element in A^{} over {:?}, module inside A^{} over {:?}",
                    x.rank(),
                    x.shape().blocks(),
                    module.rank(),
                    module.shape().blocks()
                )));
            }
            let residual = module.residual(x)?;
            if residual > tol * (1.0 + x.norm()) {
                return Err(Error::VectorOutsideModule { residual });
            }
        }
        let gram = assemble_gram(module.shape(), module.rank(), &elements)?;
        Ok(Frame {
            module,
            elements,
            gram,
        })
    }

    /// Frame candidate of the whole of `A^n`.
    pub fn in_full_module(elements: Vec<ModuleVector>) -> Result<Self> {
        let first = elements.first().ok_or(Error::EmptyFrame)?;
        let module = SubmoduleDescriptor::full(first.shape().clone(), first.rank());
        Self::new(module, elements, DEFAULT_TOL)
    }

    /// The sequence as a frame of the submodule it generates (the support
    /// of its Gram operator).
    pub fn generated(elements: Vec<ModuleVector>, tol: f64) -> Result<Self> {
        let first = elements.first().ok_or(Error::EmptyFrame)?;
        let gram = assemble_gram(first.shape(), first.rank(), &elements)?;
        let spectral = Spectral::of(&gram, tol)?;
        let support = spectral.map(first.shape(), first.rank(), |l| {
            if l > spectral.threshold {
                1.0
            } else {
                0.0
            }
        })?;
        let module = SubmoduleDescriptor::with_projection(support, 1e-8)?;
        Ok(Frame {
            module,
            elements,
            gram,
        })
    }

    pub fn module(&self) -> &SubmoduleDescriptor {
        &self.module
    }

    pub fn elements(&self) -> &[ModuleVector] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn shape(&self) -> &AlgebraShape {
        self.module.shape()
    }

    /// Rank `n` of the ambient `A^n`.
    pub fn rank(&self) -> usize {
        self.module.rank()
    }

    /// `G = theta* theta`, with entries `G[q][p] = sum_j (x_j)_q* (x_j)_p`.
    pub fn gram_operator(&self) -> &ModuleOperator {
        &self.gram
    }

    /// Elements stacked as rows for algebra block `b`: `(len k_b) x (rank k_b)`.
    pub fn stacked(&self, b: usize) -> CMatrix {
        let parts: Vec<CMatrix> = self.elements.iter().map(|x| x.flat(b).clone()).collect();
        CMatrix::vstack(&parts).expect("elements share the ambient module")
    }

    /// The same elements viewed under the inner product `<x, y>_M = <M x, y>`
    /// for a positive operator `M` supported on the module: the isometric
    /// copy `x -> M^{1/2} x` inside the standard module.
    pub fn under_metric(&self, metric: &ModuleOperator) -> Result<Frame> {
        let blocks = metric
            .flats()
            .iter()
            .map(|m| matrix::sqrt_psd(m, 1e-9 * (1.0 + m.frobenius_norm())))
            .collect::<Result<Vec<_>>>()?;
        let root =
            ModuleOperator::from_blocks(self.shape().clone(), self.rank(), self.rank(), blocks)?;
        let elements = self
            .elements
            .iter()
            .map(|x| root.apply(x))
            .collect::<Result<Vec<_>>>()?;
        Frame::new(self.module.clone(), elements, 1e-8)
    }
}

fn assemble_gram(
    shape: &AlgebraShape,
    rank: usize,
    elements: &[ModuleVector],
) -> Result<ModuleOperator> {
    let blocks = shape
        .blocks()
        .iter()
        .enumerate()
        .map(|(b, &k)| {
            let mut g = CMatrix::zeros(rank * k, rank * k);
            for x in elements {
                let f = x.flat(b);
                g = &g + &(&f.adjoint() * f);
            }
            g
        })
        .collect();
    ModuleOperator::from_blocks(shape.clone(), rank, rank, blocks)
}

/// Blockwise eigen-decomposition of a positive module operator with a common
/// rank threshold `tol * lambda_max`.
struct Spectral {
    blocks: Vec<HermitianEigen>,
    threshold: f64,
}

impl Spectral {
    fn of(op: &ModuleOperator, tol: f64) -> Result<Self> {
        let blocks = op
            .flats()
            .iter()
            .map(|g| matrix::eig_hermitian(g, None))
            .collect::<Result<Vec<_>>>()?;
        let lmax = blocks
            .iter()
            .flat_map(|e| e.values.iter().copied())
            .fold(0.0f64, f64::max);
        Ok(Spectral {
            blocks,
            threshold: tol * lmax,
        })
    }

    fn map(
        &self,
        shape: &AlgebraShape,
        n: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<ModuleOperator> {
        let flats = self.blocks.iter().map(|e| e.map_spectrum(&f)).collect();
        ModuleOperator::from_blocks(shape.clone(), n, n, flats)
    }
}

/// `S = G^+`, the inverse of `theta* theta` on its support.
pub fn frame_operator(f: &Frame, tol: f64) -> Result<ModuleOperator> {
    let sp = Spectral::of(&f.gram, tol)?;
    let thr = sp.threshold;
    sp.map(f.shape(), f.rank(), |l| if l > thr { 1.0 / l } else { 0.0 })
}

/// Outcome of [`analyze`].
#[derive(Clone, Debug)]
pub struct FrameReport {
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub is_frame: bool,
    pub is_tight: bool,
    pub is_normalized_tight: bool,
    /// Support projection of `G`.
    pub support: ModuleOperator,
    /// Spectrum of `G` restricted to the module, ascending.
    pub spectrum: Vec<f64>,
    /// `|support - P|`, zero when the sequence generates the module.
    pub support_defect: f64,
}

/// Frame bounds and tightness of `f` as a frame of its module.
pub fn analyze(f: &Frame, tol: f64) -> Result<FrameReport> {
    if f.is_empty() {
        return Err(Error::EmptyFrame);
    }
    let sp = Spectral::of(&f.gram, tol)?;
    let thr = sp.threshold;
    let support = sp.map(f.shape(), f.rank(), |l| if l > thr { 1.0 } else { 0.0 })?;
    let mut spectrum = Vec::new();
    let mut support_defect = 0.0f64;
    let mut generates = true;
    for (b, e) in sp.blocks.iter().enumerate() {
        let p = f.module.projection_flat(b);
        let module_dim = p.trace().re.round() as usize;
        // G vanishes off the module, so its spectrum there is the top
        // `module_dim` eigenvalues.
        let n = e.values.len();
        spectrum.extend_from_slice(&e.values[n - module_dim..]);
        let rank = e.values.iter().filter(|&&l| l > thr).count();
        generates &= rank == module_dim;
        support_defect = support_defect.max(matrix::op_norm(&(support.flat(b) - &p)));
    }
    spectrum.sort_by(f64::total_cmp);
    let lower = spectrum.first().copied().unwrap_or(0.0).max(0.0);
    let upper = spectrum.last().copied().unwrap_or(0.0).max(0.0);
    let is_frame = generates && !spectrum.is_empty() && lower > thr;
    let is_tight = is_frame && (upper - lower).abs() <= tol * upper;
    let is_normalized_tight = is_tight && (lower - 1.0).abs() <= tol;
    Ok(FrameReport {
        lower_bound: lower,
        upper_bound: upper,
        is_frame,
        is_tight,
        is_normalized_tight,
        support,
        spectrum,
        support_defect,
    })
}

fn require_frame(f: &Frame, tol: f64) -> Result<FrameReport> {
    let report = analyze(f, tol)?;
    if !report.is_frame {
        return Err(Error::NotAFrame(format!(
            "lower bound {:e} on a module the sequence does not generate",
            report.lower_bound
        )));
    }
    Ok(report)
}

/// Frame transform and the projection onto its range.
#[derive(Clone, Debug)]
pub struct FrameTransform {
    /// `theta: A^n -> A^k`, `theta(x)_j = <x, x_j>`.
    pub theta: ModuleOperator,
    /// `Q = theta S theta*` on `A^k`, with entries `Q[i][j] = <S x_i, x_j>`.
    pub range_projection: ModuleOperator,
}

pub fn frame_transform(f: &Frame, tol: f64) -> Result<FrameTransform> {
    require_frame(f, tol)?;
    let s = frame_operator(f, tol)?;
    let k = f.len();
    let mut theta_blocks = Vec::new();
    let mut q_blocks = Vec::new();
    for b in 0..f.shape().num_blocks() {
        let stacked = f.stacked(b);
        theta_blocks.push(stacked.adjoint());
        q_blocks.push(&(&stacked * s.flat(b)) * &stacked.adjoint());
    }
    Ok(FrameTransform {
        theta: ModuleOperator::from_blocks(f.shape().clone(), f.rank(), k, theta_blocks)?,
        range_projection: ModuleOperator::from_blocks(f.shape().clone(), k, k, q_blocks)?,
    })
}

/// Canonical dual frame `{S x_j}` with `S = (theta* theta)^{-1}` on the module.
pub fn canonical_dual(f: &Frame, tol: f64) -> Result<Frame> {
    require_frame(f, tol)?;
    let s = frame_operator(f, tol)?;
    let elements = f
        .elements
        .iter()
        .map(|x| s.apply(x))
        .collect::<Result<Vec<_>>>()?;
    Frame::new(f.module.clone(), elements, 1e-8)
}

/// `sum_j <x, S x_j> x_j`.
pub fn reconstruct(f: &Frame, x: &ModuleVector, tol: f64) -> Result<ModuleVector> {
    let residual = f.module.residual(x)?;
    if residual > tol * (1.0 + x.norm()) {
        return Err(Error::VectorOutsideModule { residual });
    }
    let dual = canonical_dual(f, tol)?;
    synthesize_with(f, &dual, x)
}

/// `sum_j <x, y_j> x_j` for an arbitrary analysing sequence `{y_j}`.
pub fn synthesize_with(f: &Frame, analysing: &Frame, x: &ModuleVector) -> Result<ModuleVector> {
    if analysing.len() != f.len() {
        return Err(Error::CountMismatch(f.len(), analysing.len()));
    }
    let mut acc = ModuleVector::zero(f.shape(), f.rank());
    for (xj, yj) in f.elements.iter().zip(analysing.elements()) {
        let coeff = inner(x, yj)?;
        acc = acc.add(&xj.left_mul(&coeff)?)?;
    }
    Ok(acc)
}

/// The standard normalized tight frame `{V e_j}` of the range of a partial
/// isometry `V`.
pub fn from_partial_isometry(v: &ModuleOperator, tol: f64) -> Result<Frame> {
    let n = v.domain_rank();
    if n != v.codomain_rank() {
        return Err(Error::ShapeMismatch(
            "partial isometry must act on A^n".into(),
        ));
    }
    let mut residual = 0.0f64;
    let mut range_blocks = Vec::new();
    for flat in v.flats() {
        let initial = flat * &flat.adjoint();
        residual = residual
            .max((&initial * &initial).max_abs_diff(&initial))
            .max(initial.hermitian_defect());
        range_blocks.push(&flat.adjoint() * flat);
    }
    if residual > tol {
        return Err(Error::NotPartialIsometry { residual });
    }
    let p = ModuleOperator::from_blocks(v.shape().clone(), n, n, range_blocks)?;
    let module = SubmoduleDescriptor::with_projection(p, tol.max(1e-9) * 10.0)?;
    let elements = (0..n)
        .map(|j| v.apply(&ModuleVector::basis(v.shape(), n, j)))
        .collect::<Result<Vec<_>>>()?;
    Frame::new(module, elements, tol.max(1e-9) * 10.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    UnitarilyEquivalent,
    Similar,
    Neither,
}

#[derive(Clone, Debug)]
pub struct SimilarityReport {
    pub relation: Relation,
    /// `T` with `T x_j = y_j`, when similar.
    pub witness: Option<ModuleOperator>,
    /// `|Q_f - Q_g|`.
    pub projection_distance: f64,
    /// `max_j |T x_j - y_j|`.
    pub witness_residual: f64,
    /// `|T T* - P_f|` on the flattened blocks; zero for a unitary witness.
    pub isometry_defect: f64,
}

/// Two frames with the same number of elements are similar exactly when
/// their frame transforms have the same range.
pub fn test_similarity(f: &Frame, g: &Frame, tol: f64) -> Result<SimilarityReport> {
    if f.len() != g.len() {
        return Err(Error::CountMismatch(f.len(), g.len()));
    }
    if f.shape() != g.shape() {
        return Err(Error::ShapeMismatch(
            "frames over different algebras".into(),
        ));
    }
    let qf = frame_transform(f, tol)?.range_projection;
    let qg = frame_transform(g, tol)?.range_projection;
    let projection_distance = qf.distance(&qg);
    if projection_distance > tol {
        return Ok(SimilarityReport {
            relation: Relation::Neither,
            witness: None,
            projection_distance,
            witness_residual: f64::INFINITY,
            isometry_defect: f64::INFINITY,
        });
    }
    let mut blocks = Vec::new();
    let mut isometry_defect = 0.0f64;
    for b in 0..f.shape().num_blocks() {
        let t = &matrix::pinv(&f.stacked(b), None)? * &g.stacked(b);
        let pf = f.module.projection_flat(b);
        isometry_defect = isometry_defect.max((&t * &t.adjoint()).max_abs_diff(&pf));
        blocks.push(t);
    }
    let witness = ModuleOperator::from_blocks(f.shape().clone(), f.rank(), g.rank(), blocks)?;
    let mut witness_residual = 0.0f64;
    let mut scale = 0.0f64;
    for (x, y) in f.elements.iter().zip(g.elements()) {
        witness_residual = witness_residual.max(witness.apply(x)?.distance(y));
        scale = scale.max(y.norm());
    }
    let relation = if witness_residual > tol * (1.0 + scale) {
        Relation::Neither
    } else if isometry_defect <= tol * (1.0 + witness.norm().powi(2)) {
        Relation::UnitarilyEquivalent
    } else {
        Relation::Similar
    };
    Ok(SimilarityReport {
        relation,
        witness: Some(witness),
        projection_distance,
        witness_residual,
        isometry_defect,
    })
}

#[derive(Clone, Debug)]
pub struct RieszReport {
    pub is_riesz_basis: bool,
    pub is_orthogonal_hilbert_basis: bool,
    /// Complex dimension of the kernel of the synthesis map, summed over blocks.
    pub kernel_dimension: usize,
    /// Generators `(a_1, ..., a_k)` of the kernel of `(a_j) -> sum_j a_j x_j`.
    pub kernel_generators: Vec<Vec<AlgebraElement>>,
    /// Largest `|a_j x_j|` over all generators and indices.
    pub worst_summand: f64,
}

/// Riesz-basis test: every vanishing combination `sum_j a_j x_j = 0` must
/// vanish summand by summand. Summands below `sqrt(tol) (1 + |x_j|)` count
/// as zero, since kernel vectors are only accurate to roughly machine
/// precision over the smallest retained singular value.
pub fn riesz_check(f: &Frame, tol: f64) -> Result<RieszReport> {
    let report = require_frame(f, tol)?;
    let shape = f.shape();
    let k = f.len();
    let mut generators = Vec::new();
    for (b, &m) in shape.blocks().iter().enumerate() {
        // (a_j) is in the kernel iff each row v of its flattening satisfies
        // v X = 0, i.e. v* lies in the null space of X*.
        let kernel = matrix::null_space(&f.stacked(b).adjoint(), None)?;
        for c in 0..kernel.cols() {
            let v: Vec<C64> = kernel.column(c).iter().map(|z| z.conj()).collect();
            let tuple = (0..k)
                .map(|j| {
                    let blocks = shape
                        .blocks()
                        .iter()
                        .enumerate()
                        .map(|(bb, &mm)| {
                            let mut blk = CMatrix::zeros(mm, mm);
                            if bb == b {
                                for col in 0..m {
                                    blk[(0, col)] = v[j * m + col];
                                }
                            }
                            blk
                        })
                        .collect();
                    AlgebraElement::from_blocks(shape.clone(), blocks)
                })
                .collect::<Result<Vec<_>>>()?;
            generators.push(tuple);
        }
    }
    let mut worst = 0.0f64;
    let mut riesz = true;
    for tuple in &generators {
        for (a, x) in tuple.iter().zip(&f.elements) {
            let s = x.left_mul(a)?.norm();
            worst = worst.max(s);
            if s > tol.sqrt() * (1.0 + x.norm()) {
                riesz = false;
            }
        }
    }
    let orthogonal = report.is_normalized_tight && orthogonal_projection_valued(f, tol)?;
    Ok(RieszReport {
        is_riesz_basis: riesz,
        is_orthogonal_hilbert_basis: orthogonal,
        kernel_dimension: generators.len(),
        kernel_generators: generators,
        worst_summand: worst,
    })
}

fn orthogonal_projection_valued(f: &Frame, tol: f64) -> Result<bool> {
    for (i, xi) in f.elements.iter().enumerate() {
        for (j, xj) in f.elements.iter().enumerate() {
            let g = inner(xi, xj)?;
            if i != j {
                if g.norm() > tol {
                    return Ok(false);
                }
            } else {
                let carrier = g.carrier_projection(tol)?;
                if carrier.distance(&g) > tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::embed_hilbert_frame;
    use crate::random::{
        random_operator, random_partial_isometry, random_submodule, random_vector, random_vector_in,
    };
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn hilbert(vectors: &[Vec<f64>]) -> Frame {
        let v: Vec<Vec<C64>> = vectors
            .iter()
            .map(|x| x.iter().map(|&r| c(r)).collect())
            .collect();
        Frame::in_full_module(embed_hilbert_frame(&AlgebraShape::complex(), &v).unwrap()).unwrap()
    }

    fn standard_basis(shape: &AlgebraShape, n: usize) -> Frame {
        Frame::in_full_module((0..n).map(|q| ModuleVector::basis(shape, n, q)).collect()).unwrap()
    }

    fn random_frame(
        rng: &mut ChaCha8Rng,
        shape: &AlgebraShape,
        n: usize,
        k: usize,
        full: bool,
    ) -> Frame {
        let module = random_submodule(rng, shape, n, full);
        let elements = (0..k).map(|_| random_vector_in(rng, &module)).collect();
        Frame::new(module, elements, 1e-9).unwrap()
    }

    #[test]
    fn orthonormal_basis_is_normalized_tight() {
        let r = analyze(&standard_basis(&AlgebraShape::complex(), 3), DEFAULT_TOL).unwrap();
        assert!(r.is_normalized_tight);
        assert_eq!((r.lower_bound, r.upper_bound), (1.0, 1.0));
    }

    #[test]
    fn diagonal_example_bounds() {
        let f = hilbert(&[
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 3.0, 0.0, 0.0],
            vec![0.0, 0.0, 2.0, 0.0],
            vec![0.0, 0.0, 0.0, 2.0],
        ]);
        let r = analyze(&f, DEFAULT_TOL).unwrap();
        assert!(r.is_frame && !r.is_tight);
        assert!((r.lower_bound - 1.0).abs() < 1e-12 && (r.upper_bound - 9.0).abs() < 1e-12);
    }

    #[test]
    fn duplicated_basis_has_bound_two() {
        let f = hilbert(&[
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 1.0],
        ]);
        let r = analyze(&f, DEFAULT_TOL).unwrap();
        assert!(r.is_tight && !r.is_normalized_tight);
        assert!((r.lower_bound - 2.0).abs() < 1e-14 && (r.upper_bound - 2.0).abs() < 1e-14);
    }

    #[test]
    fn embedded_basis_keeps_bounds() {
        let s = AlgebraShape::new(vec![2]).unwrap();
        let v = vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(1.0)]];
        let f = Frame::in_full_module(embed_hilbert_frame(&s, &v).unwrap()).unwrap();
        let r = analyze(&f, DEFAULT_TOL).unwrap();
        assert!(r.is_normalized_tight);
    }

    #[test]
    fn mercedes_frame_over_commutative_algebra() {
        // three unit vectors at 120 degrees; the frame operator is 3/2 I
        let h = 3f64.sqrt() / 2.0;
        let v = vec![
            vec![c(0.0), c(1.0)],
            vec![c(-h), c(-0.5)],
            vec![c(h), c(-0.5)],
        ];
        let s = AlgebraShape::new(vec![1, 1]).unwrap();
        let f = Frame::in_full_module(embed_hilbert_frame(&s, &v).unwrap()).unwrap();
        let r = analyze(&f, DEFAULT_TOL).unwrap();
        assert!(r.is_tight);
        assert!((r.lower_bound - 1.5).abs() < 1e-14 && (r.upper_bound - 1.5).abs() < 1e-14);
    }

    #[test]
    fn empty_frame_rejected() {
        assert!(matches!(
            Frame::in_full_module(vec![]),
            Err(Error::EmptyFrame)
        ));
    }

    #[test]
    fn non_generating_sequence_is_not_a_frame() {
        let f = hilbert(&[vec![1.0, 0.0], vec![2.0, 0.0]]);
        let r = analyze(&f, DEFAULT_TOL).unwrap();
        assert!(!r.is_frame);
        assert_eq!(r.lower_bound, 0.0);
        assert!(matches!(
            frame_transform(&f, DEFAULT_TOL),
            Err(Error::NotAFrame(_))
        ));
        // ... but it is a frame of what it generates
        let g = Frame::generated(f.elements().to_vec(), DEFAULT_TOL).unwrap();
        let r = analyze(&g, DEFAULT_TOL).unwrap();
        assert!(r.is_frame);
        assert!((r.lower_bound - 5.0).abs() < 1e-12);
    }

    #[test]
    fn element_outside_module_rejected() {
        let s = AlgebraShape::complex();
        let p = ModuleOperator::from_blocks(
            s.clone(),
            2,
            2,
            vec![CMatrix::from_real_diag(&[1.0, 0.0])],
        )
        .unwrap();
        let module = SubmoduleDescriptor::with_projection(p, 1e-9).unwrap();
        let e2 = ModuleVector::basis(&s, 2, 1);
        assert!(matches!(
            Frame::new(module, vec![e2], 1e-9),
            Err(Error::VectorOutsideModule { .. })
        ));
    }

    #[test]
    fn transform_of_basis_is_identity() {
        let s = AlgebraShape::new(vec![2, 1]).unwrap();
        let t = frame_transform(&standard_basis(&s, 2), DEFAULT_TOL).unwrap();
        assert!(t.theta.distance(&ModuleOperator::identity(&s, 2)) < 1e-14);
        assert!(
            t.range_projection
                .distance(&ModuleOperator::identity(&s, 2))
                < 1e-14
        );
    }

    #[test]
    fn repeated_vector_range_projection() {
        let r = 0.5f64.sqrt();
        let f = hilbert(&[vec![r], vec![r]]);
        let q = frame_transform(&f, DEFAULT_TOL).unwrap().range_projection;
        let expected = CMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!(q.flat(0).max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn partial_isometry_frame_transform_is_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s = AlgebraShape::new(vec![2, 1]).unwrap();
        let v = random_partial_isometry(&mut rng, &s, 3);
        let f = from_partial_isometry(&v, 1e-9).unwrap();
        let t = frame_transform(&f, DEFAULT_TOL).unwrap();
        // theta* theta is the identity on the module
        let tt = t.theta.adjoint().compose(&t.theta).unwrap();
        let p = f.module().projection_operator();
        assert!(tt.distance(&p) < 1e-10);
        // Q e_j = theta(x_j)
        for (j, x) in f.elements().iter().enumerate() {
            let ej = ModuleVector::basis(&s, 3, j);
            let lhs = t.range_projection.apply(&ej).unwrap();
            let rhs = t.theta.apply(x).unwrap();
            assert!(lhs.distance(&rhs) < 1e-10);
            // theta*(e_j) = x_j
            assert!(t.theta.adjoint().apply(&ej).unwrap().distance(x) < 1e-12);
        }
    }

    #[test]
    fn identity_and_projection_partial_isometries() {
        let s = AlgebraShape::new(vec![2]).unwrap();
        let f = from_partial_isometry(&ModuleOperator::identity(&s, 2), 1e-9).unwrap();
        assert!(analyze(&f, DEFAULT_TOL).unwrap().is_normalized_tight);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let module = random_submodule(&mut rng, &s, 2, false);
        let f = from_partial_isometry(&module.projection_operator(), 1e-9).unwrap();
        let r = analyze(&f, DEFAULT_TOL).unwrap();
        assert!(r.is_normalized_tight, "{r:?}");
    }

    #[test]
    fn non_partial_isometry_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let t = random_operator(&mut rng, &AlgebraShape::complex(), 3);
        assert!(matches!(
            from_partial_isometry(&t, 1e-9),
            Err(Error::NotPartialIsometry { .. })
        ));
    }

    #[test]
    fn dual_of_normalized_tight_is_itself() {
        let s = AlgebraShape::new(vec![1, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = from_partial_isometry(&random_partial_isometry(&mut rng, &s, 2), 1e-9).unwrap();
        let d = canonical_dual(&f, DEFAULT_TOL).unwrap();
        for (a, b) in f.elements().iter().zip(d.elements()) {
            assert!(a.distance(b) < 1e-10);
        }
    }

    #[test]
    fn diagonal_example_dual() {
        let f = hilbert(&[
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 3.0, 0.0, 0.0],
            vec![0.0, 0.0, 2.0, 0.0],
            vec![0.0, 0.0, 0.0, 2.0],
        ]);
        let d = canonical_dual(&f, DEFAULT_TOL).unwrap();
        for (x, y) in f.elements().iter().zip(d.elements()) {
            let nn = inner(x, x).unwrap().block(0)[(0, 0)].re;
            let expected = x.scale(c(1.0 / nn));
            assert!(y.distance(&expected) < 1e-14);
        }
    }

    #[test]
    fn reconstruction_over_mixed_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = AlgebraShape::new(vec![2, 1]).unwrap();
        let f = random_frame(&mut rng, &s, 2, 5, true);
        for _ in 0..10 {
            let x = random_vector(&mut rng, &s, 2);
            let back = reconstruct(&f, &x, DEFAULT_TOL).unwrap();
            assert!(back.distance(&x) <= 1e-9 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn reconstruct_rejects_outside_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = AlgebraShape::new(vec![2]).unwrap();
        let module = random_submodule(&mut rng, &s, 2, false);
        let elements = (0..4)
            .map(|_| random_vector_in(&mut rng, &module))
            .collect();
        let f = Frame::new(module.clone(), elements, 1e-9).unwrap();
        if module
            .projection_operator()
            .distance(&ModuleOperator::identity(&s, 2))
            > 1e-6
        {
            let x = random_vector(&mut rng, &s, 2);
            assert!(matches!(
                reconstruct(&f, &x, DEFAULT_TOL),
                Err(Error::VectorOutsideModule { .. })
            ));
        }
    }

    #[test]
    fn alternative_dual_also_reconstructs() {
        // y_j = S x_j + rows of (I - Q) Z P: another dual of a redundant frame
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let s = AlgebraShape::new(vec![2]).unwrap();
        let f = random_frame(&mut rng, &s, 2, 4, true);
        let t = frame_transform(&f, DEFAULT_TOL).unwrap();
        let dual = canonical_dual(&f, DEFAULT_TOL).unwrap();
        let m = 2;
        let k = f.len();
        let q = t.range_projection.flat(0);
        let z = crate::random::gaussian_matrix(&mut rng, k * m, 2 * m);
        let shift = &(&CMatrix::identity(k * m) - q) * &z;
        let alt: Vec<ModuleVector> = (0..k)
            .map(|j| {
                let row = shift.submatrix(j * m, 0, m, 2 * m);
                let base = dual.elements()[j].flat(0);
                ModuleVector::from_blocks(s.clone(), 2, vec![base + &row]).unwrap()
            })
            .collect();
        let alt = Frame::in_full_module(alt).unwrap();
        assert!(alt.elements()[0].distance(&dual.elements()[0]) > 1e-3);
        let x = random_vector(&mut rng, &s, 2);
        let back = synthesize_with(&f, &alt, &x).unwrap();
        assert!(back.distance(&x) < 1e-9 * (1.0 + x.norm()));
    }

    #[test]
    fn similarity_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = AlgebraShape::new(vec![2, 1]).unwrap();
        let f = random_frame(&mut rng, &s, 2, 4, true);
        let r = test_similarity(&f, &f, 1e-8).unwrap();
        assert_eq!(r.relation, Relation::UnitarilyEquivalent);
        assert!(
            r.witness
                .unwrap()
                .distance(&ModuleOperator::identity(&s, 2))
                < 1e-8
        );

        let d = canonical_dual(&f, DEFAULT_TOL).unwrap();
        let r = test_similarity(&f, &d, 1e-8).unwrap();
        assert_eq!(r.relation, Relation::Similar);

        let other = random_frame(&mut rng, &s, 2, 4, true);
        let r = test_similarity(&f, &other, 1e-8).unwrap();
        assert_eq!(r.relation, Relation::Neither);

        let swapped = hilbert(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let basis = hilbert(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let r = test_similarity(&basis, &swapped, 1e-9).unwrap();
        assert_eq!(r.relation, Relation::UnitarilyEquivalent);
        let swap = CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(r.witness.unwrap().flat(0).max_abs_diff(&swap) < 1e-14);
    }

    #[test]
    fn count_mismatch() {
        let a = hilbert(&[vec![1.0]]);
        let b = hilbert(&[vec![1.0], vec![1.0]]);
        assert!(matches!(
            test_similarity(&a, &b, 1e-9),
            Err(Error::CountMismatch(1, 2))
        ));
    }

    #[test]
    fn riesz_cases() {
        let s = AlgebraShape::new(vec![2, 1]).unwrap();
        let r = riesz_check(&standard_basis(&s, 3), DEFAULT_TOL).unwrap();
        assert!(r.is_riesz_basis && r.is_orthogonal_hilbert_basis);
        assert_eq!(r.kernel_dimension, 0);

        let r = riesz_check(
            &hilbert(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]),
            DEFAULT_TOL,
        )
        .unwrap();
        assert!(!r.is_riesz_basis);
        assert_eq!(r.kernel_dimension, 1);
        let a = &r.kernel_generators[0];
        // the generator is proportional to (1, -1, 0)
        let (a0, a1) = (a[0].block(0)[(0, 0)], a[1].block(0)[(0, 0)]);
        assert!((a0 + a1).norm() < 1e-12 && a0.norm() > 0.5);
    }

    #[test]
    fn zero_divisor_riesz_basis() {
        let s = AlgebraShape::new(vec![1, 1]).unwrap();
        let x1 =
            ModuleVector::from_coords(&s, &[AlgebraElement::diagonal(&[c(1.0), c(0.0)])]).unwrap();
        let x2 =
            ModuleVector::from_coords(&s, &[AlgebraElement::diagonal(&[c(0.0), c(1.0)])]).unwrap();
        let f = Frame::in_full_module(vec![x1, x2]).unwrap();
        let r = riesz_check(&f, DEFAULT_TOL).unwrap();
        assert!(r.is_riesz_basis);
        assert!(r.is_orthogonal_hilbert_basis);
        assert_eq!(r.kernel_dimension, 2);
        for tuple in &r.kernel_generators {
            assert!(tuple.iter().any(|a| a.norm() > 0.5));
            for (a, x) in tuple.iter().zip(f.elements()) {
                assert_eq!(x.left_mul(a).unwrap().norm(), 0.0);
            }
        }
    }

    #[test]
    fn metric_change_makes_normalized_tight() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = AlgebraShape::new(vec![2]).unwrap();
        let f = random_frame(&mut rng, &s, 2, 3, false);
        let sop = frame_operator(&f, DEFAULT_TOL).unwrap();
        let g = f.under_metric(&sop).unwrap();
        let r = analyze(&g, DEFAULT_TOL).unwrap();
        assert!((r.lower_bound - 1.0).abs() < 1e-8 && (r.upper_bound - 1.0).abs() < 1e-8);
    }

    fn arb_shape() -> impl Strategy<Value = AlgebraShape> {
        prop::sample::select(vec![vec![1], vec![2], vec![1, 1], vec![2, 1], vec![3]])
            .prop_map(|b| AlgebraShape::new(b).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn prop_bounds_are_optimal(s in arb_shape(), n in 1usize..=3, extra in 1usize..=3, full in any::<bool>(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_frame(&mut rng, &s, n, n + extra, full);
            let r = analyze(&f, DEFAULT_TOL).unwrap();
            prop_assert!(r.is_frame);
            let t = frame_transform(&f, DEFAULT_TOL).unwrap();
            let tol = DEFAULT_TOL;
            for _ in 0..8 {
                let x = random_vector_in(&mut rng, f.module());
                let xx = inner(&x, &x).unwrap();
                let tx = t.theta.apply(&x).unwrap();
                let mid = inner(&tx, &tx).unwrap();
                let slack = 1e-9 * (1.0 + mid.norm());
                prop_assert!(xx.scale(c(r.lower_bound)).leq(&mid, slack).unwrap());
                prop_assert!(mid.leq(&xx.scale(c(r.upper_bound)), slack).unwrap());
            }
            // the tightened constants fail somewhere on the module: test the
            // extreme eigenvectors of G directly
            let g = f.gram_operator();
            let lower = ModuleOperator::from_blocks(
                s.clone(), n, n,
                (0..s.num_blocks()).map(|b| f.module().projection_flat(b).scale_real(r.lower_bound * (1.0 + 10.0 * tol))).collect(),
            ).unwrap();
            let upper = ModuleOperator::from_blocks(
                s.clone(), n, n,
                (0..s.num_blocks()).map(|b| f.module().projection_flat(b).scale_real(r.upper_bound / (1.0 + 10.0 * tol))).collect(),
            ).unwrap();
            let low_gap = g.sub(&lower).unwrap().spectrum(1e-8).unwrap();
            let up_gap = upper.sub(g).unwrap().spectrum(1e-8).unwrap();
            prop_assert!(low_gap[0] < 0.0);
            prop_assert!(up_gap[0] < 0.0);
        }

        #[test]
        fn prop_reconstruction_and_dual_involution(s in arb_shape(), n in 1usize..=3, extra in 1usize..=3, full in any::<bool>(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_frame(&mut rng, &s, n, n + extra, full);
            for _ in 0..5 {
                let x = random_vector_in(&mut rng, f.module());
                let back = reconstruct(&f, &x, DEFAULT_TOL).unwrap();
                prop_assert!(back.distance(&x) <= 1e-9 * (1.0 + x.norm()));
            }
            let dd = canonical_dual(&canonical_dual(&f, DEFAULT_TOL).unwrap(), DEFAULT_TOL).unwrap();
            for (a, b) in f.elements().iter().zip(dd.elements()) {
                prop_assert!(a.distance(b) <= 1e-9 * (1.0 + a.norm()));
            }
            let q = frame_transform(&f, DEFAULT_TOL).unwrap().range_projection;
            prop_assert!(q.is_projection(1e-9));
        }

        #[test]
        fn prop_partial_isometries_give_normalized_tight(s in arb_shape(), n in 1usize..=3, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = random_partial_isometry(&mut rng, &s, n);
            let f = from_partial_isometry(&v, 1e-9).unwrap();
            let r = analyze(&f, DEFAULT_TOL).unwrap();
            prop_assert!(r.is_normalized_tight);
        }

        #[test]
        fn prop_support_smaller_than_module_is_not_a_frame(n in 2usize..=3, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = AlgebraShape::new(vec![rng.random_range(1..=2)]).unwrap();
            // n - 1 generic vectors cannot generate A^n
            let elements = (0..n - 1).map(|_| random_vector(&mut rng, &s, n)).collect();
            let f = Frame::in_full_module(elements).unwrap();
            let r = analyze(&f, DEFAULT_TOL).unwrap();
            prop_assert!(!r.is_frame);
        }
    }
}
