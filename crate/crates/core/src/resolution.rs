//! Resolutions of the identity `sum_i b_i* b_i = 1` in `A = M_d` viewed as
//! normalized tight frames of `A` as a module over itself: `a = sum_i <a, b_i> b_i`
//! with `<a, b> = a b*`.
//!
//! Only the finite-dimensional content is checked. The dilation through an
//! isometry `u` with `u u* = p`, `u* u = 1` and infinitely many orthogonal
//! projections similar to the identity needs a properly infinite algebra and
//! has no counterpart in `M_d`.

use rand::Rng;
use serde::Serialize;

use crate::algebra::AlgebraShape;
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::matrix::{self, CMatrix};
use crate::module::{ModuleOperator, ModuleVector};
use crate::random::gaussian_matrix;

pub const DILATION_NOTE: &str =
    "out of scope: the dilation through an isometry onto a properly infinite corner needs an infinite-dimensional algebra";

#[derive(Clone, Debug, PartialEq)]
pub struct ResolutionSequence {
    d: usize,
    b: Vec<CMatrix>,
}

impl ResolutionSequence {
    pub fn new(d: usize, b: Vec<CMatrix>) -> Result<Self> {
        if d == 0 || b.is_empty() {
            return Err(Error::InvalidInput(
                "resolution needs d > 0 and at least one element".into(),
            ));
        }
        if let Some(i) = b.iter().position(|m| m.shape() != (d, d)) {
            return Err(Error::ShapeMismatch(format!(
                "element {i} is {:?}, expected {d}x{d}",
                b[i].shape()
            )));
        }
        Ok(ResolutionSequence { d, b })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.b.len()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.b
    }

    /// `1e-9 (1 + k)`.
    pub fn default_tol(&self) -> f64 {
        1e-9 * (1.0 + self.k() as f64)
    }

    /// The `b_i` as elements of the rank-one module over `M_d`.
    pub fn as_frame(&self) -> Result<Frame> {
        let shape = AlgebraShape::matrices(self.d);
        let elements = self
            .b
            .iter()
            .map(|m| ModuleVector::from_blocks(shape.clone(), 1, vec![m.clone()]))
            .collect::<Result<Vec<_>>>()?;
        Frame::in_full_module(elements)
    }

    fn stacked(&self) -> CMatrix {
        CMatrix::vstack(&self.b).expect("elements are d x d")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolutionReport {
    pub passed: bool,
    /// `|sum b_i* b_i - 1|`.
    pub sum_residual: f64,
    /// Largest `|sum (a b_i*) b_i - a| / (1 + |a|)` over the probes.
    pub probe_residual: f64,
    pub dilation: &'static str,
}

/// Checks `sum b_i* b_i = 1` and `a = sum (a b_i*) b_i` on random probes.
pub fn verify_resolution<R: Rng + ?Sized>(
    seq: &ResolutionSequence,
    tol: f64,
    probes: usize,
    rng: &mut R,
) -> ResolutionReport {
    let d = seq.d;
    let mut sum = CMatrix::zeros(d, d);
    for b in &seq.b {
        sum = &sum + &(&b.adjoint() * b);
    }
    let sum_residual = matrix::op_norm(&(&sum - &CMatrix::identity(d)));
    let mut probe_residual = 0.0f64;
    for _ in 0..probes {
        let a = gaussian_matrix(rng, d, d);
        let mut back = CMatrix::zeros(d, d);
        for b in &seq.b {
            back = &back + &(&(&a * &b.adjoint()) * b);
        }
        probe_residual =
            probe_residual.max(matrix::op_norm(&(&back - &a)) / (1.0 + matrix::op_norm(&a)));
    }
    ResolutionReport {
        passed: sum_residual <= tol && probe_residual <= tol,
        sum_residual,
        probe_residual,
        dilation: DILATION_NOTE,
    }
}

fn require_resolution(seq: &ResolutionSequence, tol: f64) -> Result<()> {
    let d = seq.d;
    let mut sum = CMatrix::zeros(d, d);
    for b in &seq.b {
        sum = &sum + &(&b.adjoint() * b);
    }
    let r = matrix::op_norm(&(&sum - &CMatrix::identity(d)));
    if r > tol {
        return Err(Error::ResolutionFailed(format!(
            "|sum b_i* b_i - 1| = {r:e} exceeds {tol:e}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ResolutionTransform {
    /// `theta(a) = (a b_1*, ..., a b_k*)`, from `M_d` to `M_d^k`.
    pub theta: ModuleOperator,
    /// Flattened `theta theta*`, a `kd x kd` projection with blocks `b_i b_j*`.
    pub q: CMatrix,
    /// `|theta* theta - 1|`.
    pub isometry_defect: f64,
    /// `max(|Q^2 - Q|, |Q* - Q|)`.
    pub projection_defect: f64,
    /// `max_i |sum_j Q_ij b_j - b_i|`.
    pub decomposition_residual: f64,
    pub dilation: &'static str,
}

pub fn frame_transform_range(seq: &ResolutionSequence, tol: f64) -> Result<ResolutionTransform> {
    require_resolution(seq, tol)?;
    let d = seq.d;
    let k = seq.k();
    let x = seq.stacked();
    let theta_flat = x.adjoint();
    let q = &x * &theta_flat;
    let isometry_defect = matrix::op_norm(&(&(&theta_flat * &x) - &CMatrix::identity(d)));
    let projection_defect = (&q * &q).max_abs_diff(&q).max(q.hermitian_defect());
    let decomposed = &q * &x;
    let decomposition_residual = (0..k)
        .map(|i| matrix::op_norm(&(&decomposed.submatrix(i * d, 0, d, d) - &seq.b[i])))
        .fold(0.0, f64::max);
    let theta = ModuleOperator::from_blocks(AlgebraShape::matrices(d), 1, k, vec![theta_flat])?;
    Ok(ResolutionTransform {
        theta,
        q,
        isometry_defect,
        projection_defect,
        decomposition_residual,
        dilation: DILATION_NOTE,
    })
}

#[derive(Clone, Debug)]
pub struct PolarFactor {
    /// Partial isometry with `u* u` the support of `m`.
    pub u: CMatrix,
    /// `(b* b)^{1/2}`.
    pub m: CMatrix,
}

#[derive(Clone, Debug)]
pub struct PolarReport {
    pub factors: Vec<PolarFactor>,
    /// `max_i |u_i m_i - b_i|`.
    pub reconstruction_residual: f64,
    /// `max_i |u_i* u_i - supp(m_i)|`.
    pub initial_projection_residual: f64,
    /// `|sum m_i^2 - 1|`.
    pub modulus_sum_residual: f64,
    /// `|sum u_i m_i^2 u_i* - sum b_i b_i*|`.
    pub bookkeeping_residual: f64,
    pub dilation: &'static str,
}

/// `b_i = u_i m_i` with the positive modulus `m_i = (b_i* b_i)^{1/2}`, the
/// modulus of the inner factor appearing in the infinite-dimensional
/// factorization.
pub fn polar_factorization(seq: &ResolutionSequence, tol: f64) -> Result<PolarReport> {
    require_resolution(seq, tol)?;
    let d = seq.d;
    let mut factors = Vec::with_capacity(seq.k());
    let mut reconstruction_residual = 0.0f64;
    let mut initial_projection_residual = 0.0f64;
    let mut modulus_sum = CMatrix::zeros(d, d);
    let mut conj_sum = CMatrix::zeros(d, d);
    let mut outer_sum = CMatrix::zeros(d, d);
    for b in &seq.b {
        let (u, m) = matrix::polar(b)?;
        reconstruction_residual = reconstruction_residual.max(matrix::op_norm(&(&(&u * &m) - b)));
        let support = matrix::support_projection(&m, 1e-9 * matrix::op_norm(b))?;
        initial_projection_residual =
            initial_projection_residual.max((&u.adjoint() * &u).max_abs_diff(&support));
        let m2 = &m * &m;
        conj_sum = &conj_sum + &(&(&u * &m2) * &u.adjoint());
        outer_sum = &outer_sum + &(b * &b.adjoint());
        modulus_sum = &modulus_sum + &m2;
        factors.push(PolarFactor { u, m });
    }
    Ok(PolarReport {
        factors,
        reconstruction_residual,
        initial_projection_residual,
        modulus_sum_residual: matrix::op_norm(&(&modulus_sum - &CMatrix::identity(d))),
        bookkeeping_residual: matrix::op_norm(&(&conj_sum - &outer_sum)),
        dilation: DILATION_NOTE,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    /// `max_i |sum_j (b_i b_j*)(b_j b_i*) - b_i b_i*|`.
    pub endpoint_residual: f64,
    /// Whether `<theta b_i, theta b_i> <= Q_ii` for every `i`.
    pub diagonal_dominated: bool,
    /// Smallest eigenvalue of `Q_ii - <theta b_i, theta b_i>` over `i`.
    pub dominance_margin: f64,
    pub dilation: &'static str,
}

/// The inequality chain of the coefficient estimate at its computable end.
pub fn coefficient_inequality(seq: &ResolutionSequence, tol: f64) -> Result<InequalityReport> {
    require_resolution(seq, tol)?;
    let t = frame_transform_range(seq, tol)?;
    let d = seq.d;
    let mut endpoint_residual = 0.0f64;
    let mut dominance_margin = f64::INFINITY;
    for (i, bi) in seq.b.iter().enumerate() {
        let target = bi * &bi.adjoint();
        let mut sum = CMatrix::zeros(d, d);
        for bj in &seq.b {
            let c = bi * &bj.adjoint();
            sum = &sum + &(&c * &c.adjoint());
        }
        endpoint_residual = endpoint_residual.max(matrix::op_norm(&(&sum - &target)));
        let qii = t.q.submatrix(i * d, i * d, d, d);
        let gap = (&qii - &sum).hermitian_part();
        let low = matrix::eig_hermitian(&gap, None)?.values[0];
        dominance_margin = dominance_margin.min(low);
    }
    Ok(InequalityReport {
        endpoint_residual,
        diagonal_dominated: dominance_margin >= -tol,
        dominance_margin,
        dilation: DILATION_NOTE,
    })
}

/// Pairwise orthogonal projections `p_1, ..., p_k` summing to the identity,
/// splitting `C^d` into coordinate blocks of the given sizes.
pub fn coordinate_projections(sizes: &[usize]) -> Result<ResolutionSequence> {
    let d: usize = sizes.iter().sum();
    let mut start = 0;
    let b = sizes
        .iter()
        .map(|&s| {
            let diag: Vec<f64> = (0..d)
                .map(|i| {
                    if i >= start && i < start + s {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            start += s;
            CMatrix::from_real_diag(&diag)
        })
        .collect();
    ResolutionSequence::new(d, b)
}
