//! Closest tight frames in finite-dimensional Hilbert spaces.
//!
//! For a frame `{x_j}` of `C^n` with analysis operator `T` (`(T x)_j = <x, x_j>`)
//! the frame operator is `S = (T* T)^{-1}` on the span, and `T = V S^{-1/2}`
//! with `V` a partial isometry. The normalized tight frame `{S^{1/2} x_j}`
//! and its positive multiples are the closest tight frames for the distance
//! measures below.

use crate::algebra::AlgebraShape;
use crate::error::{Error, Result};
use crate::frame::{self, Frame, Relation};
use crate::matrix::{self, CMatrix, HermitianEigen, C64};
use crate::module::embed_hilbert_frame;

/// Finite frame of `C^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct HilbertFrame {
    dim: usize,
    vectors: Vec<Vec<C64>>,
    analysis: CMatrix,
}

impl HilbertFrame {
    pub fn new(dim: usize, vectors: Vec<Vec<C64>>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::EmptyFrame);
        }
        if let Some(j) = vectors.iter().position(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "vector {j} has length {}, expected {dim}",
                vectors[j].len()
            )));
        }
        let analysis = CMatrix::from_fn(vectors.len(), dim, |j, l| vectors[j][l].conj());
        Ok(HilbertFrame {
            dim,
            vectors,
            analysis,
        })
    }

    /// Frame whose analysis operator is `t` (row `j` is `x_j*`).
    pub fn from_analysis(t: &CMatrix) -> Result<Self> {
        let vectors = (0..t.rows())
            .map(|j| t.row(j).iter().map(|z| z.conj()).collect())
            .collect();
        Self::new(t.cols(), vectors)
    }

    /// Frame whose synthesis operator is `t` (column `j` is `x_j`).
    pub fn from_synthesis(t: &CMatrix) -> Result<Self> {
        let vectors = (0..t.cols()).map(|j| t.column(j)).collect();
        Self::new(t.rows(), vectors)
    }

    pub fn from_real(vectors: &[Vec<f64>]) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        Self::new(
            dim,
            vectors
                .iter()
                .map(|v| v.iter().map(|&r| C64::new(r, 0.0)).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    /// `T`, `k x n`.
    pub fn analysis(&self) -> &CMatrix {
        &self.analysis
    }

    /// `T*`, `n x k`, with the frame vectors as columns.
    pub fn synthesis(&self) -> CMatrix {
        self.analysis.adjoint()
    }

    /// `T* T = sum_j x_j x_j*`.
    pub fn gram_operator(&self) -> CMatrix {
        &self.synthesis() * &self.analysis
    }

    fn spectral(&self, tol: f64) -> Result<(HermitianEigen, f64)> {
        let e = matrix::eig_hermitian(&self.gram_operator().hermitian_part(), None)?;
        let thr = tol * e.max_abs_value();
        Ok((e, thr))
    }

    /// Nonzero spectrum of `T* T`, ascending.
    pub fn spectrum(&self, tol: f64) -> Result<Vec<f64>> {
        let (e, thr) = self.spectral(tol)?;
        Ok(e.values.into_iter().filter(|&l| l > thr).collect())
    }

    /// Frame bounds `(C, D)` on the span; fails for the zero sequence.
    pub fn bounds(&self, tol: f64) -> Result<(f64, f64)> {
        let s = self.spectrum(tol)?;
        match (s.first(), s.last()) {
            (Some(&c), Some(&d)) => Ok((c, d)),
            _ => Err(Error::NotAFrame("all vectors vanish".into())),
        }
    }

    /// Dimension of the span.
    pub fn rank(&self, tol: f64) -> Result<usize> {
        Ok(self.spectrum(tol)?.len())
    }

    /// `f(T* T)` with `f` applied to the nonzero spectrum and `0` elsewhere.
    pub fn spectral_function(&self, tol: f64, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
        let (e, thr) = self.spectral(tol)?;
        if e.values.iter().all(|&l| l <= thr) {
            return Err(Error::NotAFrame("all vectors vanish".into()));
        }
        Ok(e.map_spectrum(|l| if l > thr { f(l) } else { 0.0 }))
    }

    /// `S = (T* T)^{-1}` on the span.
    pub fn frame_operator(&self, tol: f64) -> Result<CMatrix> {
        self.spectral_function(tol, |l| 1.0 / l)
    }

    /// Projection onto the span.
    pub fn span_projection(&self, tol: f64) -> Result<CMatrix> {
        self.spectral_function(tol, |_| 1.0)
    }

    /// `{A x_j}` for a linear map `A` of `C^n`.
    pub fn mapped(&self, a: &CMatrix) -> Result<HilbertFrame> {
        HilbertFrame::from_synthesis(&a.matmul(&self.synthesis())?)
    }

    /// `{c x_j}`.
    pub fn scaled(&self, c: f64) -> HilbertFrame {
        HilbertFrame::from_synthesis(&self.synthesis().scale_real(c)).expect("same dimensions")
    }

    /// The frame of the Hilbert module `C^n` over `C` generated by the vectors.
    pub fn to_modular(&self, tol: f64) -> Result<Frame> {
        let elements = embed_hilbert_frame(&AlgebraShape::complex(), &self.vectors)?;
        Frame::generated(elements, tol)
    }

    /// `sum_j |x_j - y_j|^2`.
    pub fn squared_distance(&self, other: &HilbertFrame) -> Result<f64> {
        same_layout(self, other)?;
        Ok((&self.analysis - &other.analysis).frobenius_norm().powi(2))
    }

    /// `|T_x - T_y|`, operator norm.
    pub fn transform_distance(&self, other: &HilbertFrame) -> Result<f64> {
        same_layout(self, other)?;
        Ok(matrix::op_norm(&(&self.analysis - &other.analysis)))
    }
}

fn same_layout(x: &HilbertFrame, y: &HilbertFrame) -> Result<()> {
    if x.dim != y.dim || x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} vectors in C^{} against {} vectors in C^{}",
            x.len(),
            x.dim,
            y.len(),
            y.dim
        )));
    }
    Ok(())
}

const KERNEL_TOL: f64 = 1e-9;

/// `c(y, x)`: the least `C` with `|sum c_i (x_i - y_i)| <= C |sum c_i y_i|`
/// for all coefficient vectors, or `+inf` when a coefficient vector
/// annihilates `y` but not `x - y`.
pub fn quadratic_closeness(x: &HilbertFrame, y: &HilbertFrame) -> Result<f64> {
    same_layout(x, y)?;
    let b = y.synthesis();
    let a = &x.synthesis() - &b;
    let b_pinv = matrix::pinv(&b, None)?;
    let scale = matrix::op_norm(&a) + matrix::op_norm(&b);
    // a vanishes on ker b iff a (1 - b^+ b) = 0
    let leak = &a - &(&(&a * &b_pinv) * &b);
    if matrix::op_norm(&leak) > KERNEL_TOL * (1.0 + scale) {
        return Ok(f64::INFINITY);
    }
    Ok(matrix::op_norm(&(&a * &b_pinv)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceReport {
    /// `c(y, x)`, with `y` in the denominator.
    pub c_yx: f64,
    pub c_xy: f64,
    /// `log(max(c_xy, c_yx) + 1)`.
    pub d_xy: f64,
}

impl DistanceReport {
    pub fn from_closeness(c_yx: f64, c_xy: f64) -> Self {
        DistanceReport {
            c_yx,
            c_xy,
            d_xy: (c_xy.max(c_yx) + 1.0).ln(),
        }
    }

    pub fn is_near(&self) -> bool {
        self.d_xy.is_finite()
    }
}

pub fn nearness(x: &HilbertFrame, y: &HilbertFrame) -> Result<DistanceReport> {
    Ok(DistanceReport::from_closeness(
        quadratic_closeness(x, y)?,
        quadratic_closeness(y, x)?,
    ))
}

/// Similarity of the two frames as modular frames over `C`, the cross-check
/// for finiteness of `d`.
pub fn similar(x: &HilbertFrame, y: &HilbertFrame, tol: f64) -> Result<bool> {
    same_layout(x, y)?;
    let r = frame::test_similarity(&x.to_modular(tol)?, &y.to_modular(tol)?, tol.sqrt())?;
    Ok(r.relation != Relation::Neither)
}

/// `{S^{1/2} x_j}`.
pub fn normalized_tight(x: &HilbertFrame, tol: f64) -> Result<HilbertFrame> {
    let root = x.spectral_function(tol, |l| 1.0 / l.sqrt())?;
    x.mapped(&root)
}

/// Whether `D < 9/4 C`, under which the closest tight frames are expected to
/// span the same space.
pub fn same_span_condition(lower: f64, upper: f64) -> bool {
    upper < 2.25 * lower
}

#[derive(Clone, Debug)]
pub struct TightMinimizer {
    /// Multiplier `lambda` of `S^{1/2} x`.
    pub factor: f64,
    pub frame: HilbertFrame,
    /// Value of the matching distance measure at the minimizer.
    pub achieved: f64,
}

#[derive(Clone, Debug)]
pub struct BalanMinimizers {
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// `(sqrt D - sqrt C) / (sqrt D + sqrt C)`, the least `c(y, x)` and `c(x, y)`.
    pub min_c: f64,
    /// `(log D - log C) / 4`.
    pub min_d: f64,
    /// Arithmetic mean of `sqrt C`, `sqrt D`; minimizes `c(y, x)`.
    pub arithmetic: TightMinimizer,
    /// Harmonic mean; minimizes `c(x, y)`.
    pub harmonic: TightMinimizer,
    /// Geometric mean; minimizes `d(x, y)`.
    pub geometric: TightMinimizer,
    /// Largest gap between an achieved value and its stated minimum.
    pub postcondition_residual: f64,
    pub same_span_condition: bool,
}

/// The tight frames closest to `x` for `c(y, x)`, `c(x, y)` and `d`.
pub fn balan_minimizers(x: &HilbertFrame, tol: f64) -> Result<BalanMinimizers> {
    let (c, d) = x.bounds(tol)?;
    let (rc, rd) = (c.sqrt(), d.sqrt());
    let nt = normalized_tight(x, tol)?;
    let min_c = (rd - rc) / (rd + rc);
    let min_d = 0.25 * (d.ln() - c.ln());

    let a = 0.5 * (rc + rd);
    let ya = nt.scaled(a);
    let arithmetic = TightMinimizer {
        factor: a,
        achieved: quadratic_closeness(x, &ya)?,
        frame: ya,
    };
    let h = 2.0 * rc * rd / (rc + rd);
    let yh = nt.scaled(h);
    let harmonic = TightMinimizer {
        factor: h,
        achieved: quadratic_closeness(&yh, x)?,
        frame: yh,
    };
    let g = (c * d).powf(0.25);
    let yg = nt.scaled(g);
    let geometric = TightMinimizer {
        factor: g,
        achieved: nearness(x, &yg)?.d_xy,
        frame: yg,
    };
    let postcondition_residual = (arithmetic.achieved - min_c)
        .abs()
        .max((harmonic.achieved - min_c).abs())
        .max((geometric.achieved - min_d).abs());
    Ok(BalanMinimizers {
        lower_bound: c,
        upper_bound: d,
        min_c,
        min_d,
        arithmetic,
        harmonic,
        geometric,
        postcondition_residual,
        same_span_condition: same_span_condition(c, d),
    })
}

#[derive(Clone, Debug)]
pub struct SymmetricApproximation {
    /// `{S^{1/2} x_j}`.
    pub frame: HilbertFrame,
    /// `|P - |T*||_2` (Hilbert-Schmidt), `P` the projection onto the range of `T`.
    pub certificate: f64,
    /// `sum_j |S^{1/2} x_j - x_j|^2`.
    pub squared_distance: f64,
    /// `|certificate^2 - squared_distance|`.
    pub certificate_residual: f64,
    /// `|T_mu* T_mu - P_span|`, zero for a normalized tight frame of the span.
    pub tightness_defect: f64,
}

/// The normalized tight frame closest to `x` in `sum_j |mu_j - x_j|^2`.
pub fn symmetric_approximation(x: &HilbertFrame, tol: f64) -> Result<SymmetricApproximation> {
    let mu = normalized_tight(x, tol)?;
    let t = x.analysis();
    let tt = (t * &t.adjoint()).hermitian_part();
    let e = matrix::eig_hermitian(&tt, None)?;
    let thr = tol * e.max_abs_value();
    // P - |T*| = f(T T*) with f(l) = 1 - sqrt(l) on the support
    let certificate = e
        .values
        .iter()
        .filter(|&&l| l > thr)
        .map(|&l| (1.0 - l.sqrt()).powi(2))
        .sum::<f64>()
        .sqrt();
    let squared_distance = mu.squared_distance(x)?;
    let tightness_defect = matrix::op_norm(&(&mu.gram_operator() - &x.span_projection(tol)?));
    Ok(SymmetricApproximation {
        frame: mu,
        certificate,
        squared_distance,
        certificate_residual: (certificate * certificate - squared_distance).abs(),
        tightness_defect,
    })
}

#[derive(Clone, Debug)]
pub struct LoewdinOrthogonalization {
    pub approximation: SymmetricApproximation,
    /// `max_ij |<mu_i, mu_j> - delta_ij|`.
    pub orthonormality_defect: f64,
}

/// Symmetric orthogonalization of a basis of its span.
pub fn loewdin_orthogonalization(x: &HilbertFrame, tol: f64) -> Result<LoewdinOrthogonalization> {
    let rank = x.rank(tol)?;
    if x.len() > rank {
        return Err(Error::NotABasis {
            elements: x.len(),
            rank,
        });
    }
    let approximation = symmetric_approximation(x, tol)?;
    let t = approximation.frame.analysis();
    let gram = t * &t.adjoint();
    let orthonormality_defect = gram.max_abs_diff(&CMatrix::identity(x.len()));
    Ok(LoewdinOrthogonalization {
        approximation,
        orthonormality_defect,
    })
}

#[derive(Clone, Debug)]
pub struct TightMultiple {
    /// `(sqrt C + sqrt D) / 2`.
    pub lambda: f64,
    pub frame: HilbertFrame,
    /// `|T_lambda - T_x|`, computed from the matrices.
    pub distance: f64,
    /// `max_j |lambda - mu_j|` over the eigenvalues `mu_j` of `S^{-1/2}`.
    pub eigen_distance: f64,
    /// Best grid point and its distance over `[sqrt C, sqrt D]`.
    pub grid_best: (f64, f64),
    pub grid_resolution: f64,
    pub same_span_condition: bool,
}

pub const GRID_POINTS: usize = 10_000;

/// Among the frames `{lambda S^{1/2} x_j}`, the one whose analysis operator
/// is closest to `T_x` in operator norm.
pub fn closest_tight_multiple(x: &HilbertFrame, tol: f64) -> Result<TightMultiple> {
    let (c, d) = x.bounds(tol)?;
    let (rc, rd) = (c.sqrt(), d.sqrt());
    let lambda = 0.5 * (rc + rd);
    let frame = normalized_tight(x, tol)?.scaled(lambda);
    let distance = frame.transform_distance(x)?;
    let moduli: Vec<f64> = x.spectrum(tol)?.into_iter().map(f64::sqrt).collect();
    let spread = |l: f64| moduli.iter().map(|m| (l - m).abs()).fold(0.0, f64::max);
    let eigen_distance = spread(lambda);
    let step = (rd - rc) / (GRID_POINTS - 1) as f64;
    let grid_best = (0..GRID_POINTS)
        .map(|i| {
            let l = rc + step * i as f64;
            (l, spread(l))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid is non-empty");
    Ok(TightMultiple {
        lambda,
        frame,
        distance,
        eigen_distance,
        grid_best,
        grid_resolution: step,
        same_span_condition: same_span_condition(c, d),
    })
}

/// `e_1, 3 e_2, 2 e_3, ..., 2 e_n` in `C^n`, with bounds `C = 1`, `D = 9`.
pub fn diagonal_example_frame(n: usize) -> Result<HilbertFrame> {
    if n < 2 {
        return Err(Error::InvalidInput("the example needs n >= 2".into()));
    }
    let diag: Vec<f64> = (0..n)
        .map(|i| [1.0, 3.0].get(i).copied().unwrap_or(2.0))
        .collect();
    HilbertFrame::from_synthesis(&CMatrix::from_real_diag(&diag))
}

/// Half-width `2 arcsin(1/4)` of the phase interval on which the family
/// stays at distance one.
pub fn diagonal_example_phase_limit() -> f64 {
    2.0 * 0.25f64.asin()
}

#[derive(Clone, Debug)]
pub struct DiagonalExample {
    pub x: HilbertFrame,
    /// `2 e_i`, except `2 e^{i phi} e_3`.
    pub y: HilbertFrame,
    /// `|T_x - T_y|`.
    pub distance: f64,
}

/// Member `phi` of the family of tight frames around the diagonal example.
pub fn diagonal_example_family(phi: f64, n: usize) -> Result<DiagonalExample> {
    if n < 3 {
        return Err(Error::InvalidInput("the phase family needs n >= 3".into()));
    }
    let x = diagonal_example_frame(n)?;
    let mut diag = vec![C64::new(2.0, 0.0); n];
    diag[2] = C64::from_polar(2.0, phi);
    let y = HilbertFrame::from_synthesis(&CMatrix::from_diag(&diag))?;
    let distance = x.transform_distance(&y)?;
    Ok(DiagonalExample { x, y, distance })
}
