//! Isomorphism invariants of finitely generated projective modules.
//!
//! A finite generating set `{x_1, ..., x_k}` of a module determines a unique
//! inner product `<.,.>_0` making it a normalized tight frame. Writing
//! `S = G^+` for the frame operator, `<x, y>_0 = <S x, y>`: then
//! `sum_j <x, x_j>_0 x_j = G S x = x` on the module. Two such modules are
//! unitarily isomorphic (mapping generators onto generators) exactly when the
//! Gram matrices `(<x_i, x_j>_0)` agree.

use crate::algebra::{self, AlgebraElement, AlgebraMatrix};
use crate::error::{Error, Result};
use crate::frame::{self, analyze, riesz_check, Frame};
use crate::matrix::{self, CMatrix};
use crate::module::ModuleOperator;

/// `k x k` Gram matrix over `A`, `gram[i][j] = <x_i, x_j>_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramInvariant {
    gram: AlgebraMatrix,
}

impl GramInvariant {
    pub fn new(gram: AlgebraMatrix) -> Result<Self> {
        if gram.rows() != gram.cols() {
            return Err(Error::ShapeMismatch("Gram matrix must be square".into()));
        }
        Ok(GramInvariant { gram })
    }

    pub fn k(&self) -> usize {
        self.gram.rows()
    }

    pub fn matrix(&self) -> &AlgebraMatrix {
        &self.gram
    }

    pub fn entry(&self, i: usize, j: usize) -> AlgebraElement {
        self.gram.entry(i, j)
    }

    /// Largest entrywise `A`-norm difference.
    pub fn distance(&self, other: &GramInvariant) -> Result<f64> {
        if self.k() != other.k() {
            return Err(Error::CountMismatch(self.k(), other.k()));
        }
        self.gram.shape().ensure_same(other.gram.shape())?;
        Ok(self.gram.entry_distance(&other.gram))
    }

    /// Comparison threshold `tol (1 + max |gram_ij|)`.
    pub fn tolerance(&self, other: &GramInvariant, tol: f64) -> f64 {
        tol * (1.0 + self.gram.max_entry_norm().max(other.gram.max_entry_norm()))
    }

    pub fn matches(&self, other: &GramInvariant, tol: f64) -> Result<bool> {
        Ok(self.distance(other)? <= self.tolerance(other, tol))
    }

    /// The same invariant after relabelling generators: entry `(i, j)` of the
    /// result is entry `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<GramInvariant> {
        let k = self.k();
        let mut seen = vec![false; k];
        if perm.len() != k
            || perm
                .iter()
                .any(|&p| p >= k || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidInput(format!(
                "{perm:?} is not a permutation of 0..{k}"
            )));
        }
        let entries: Vec<Vec<AlgebraElement>> = (0..k)
            .map(|i| (0..k).map(|j| self.entry(perm[i], perm[j])).collect())
            .collect();
        GramInvariant::new(AlgebraMatrix::from_entries(self.gram.shape(), &entries)?)
    }
}

/// Plain Gram matrix `(<x_i, x_j>)` of the elements.
pub fn gram_matrix(f: &Frame) -> Result<AlgebraMatrix> {
    let blocks = (0..f.shape().num_blocks())
        .map(|b| {
            let x = f.stacked(b);
            &x * &x.adjoint()
        })
        .collect();
    AlgebraMatrix::from_flat(f.shape().clone(), f.len(), f.len(), blocks)
}

#[derive(Clone, Debug)]
pub struct NormalizedTightMetric {
    /// `S` with `<x, y>_0 = <S x, y>`.
    pub metric: ModuleOperator,
    pub invariant: GramInvariant,
    /// Frame bounds of the generators under `<.,.>_0`.
    pub bounds: (f64, f64),
}

/// The inner product turning the generators of `f` into a normalized tight
/// frame. The re-analysis under the new metric must give bounds within
/// `tol (1 + D/C)` of one, the condition number absorbing the square root.
pub fn normalized_tight_inner_product(f: &Frame, tol: f64) -> Result<NormalizedTightMetric> {
    let report = analyze(f, tol)?;
    if !report.is_frame {
        return Err(Error::NotAFrame("generators do not span the module".into()));
    }
    let metric = frame::frame_operator(f, tol)?;
    let rebased = analyze(&f.under_metric(&metric)?, tol)?;
    let bounds = (rebased.lower_bound, rebased.upper_bound);
    let slack = tol * (1.0 + report.upper_bound / report.lower_bound);
    if (bounds.0 - 1.0).abs() > slack || (bounds.1 - 1.0).abs() > slack {
        return Err(Error::NotNormalizedTight {
            lower: bounds.0,
            upper: bounds.1,
        });
    }
    let q = frame::frame_transform(f, tol)?.range_projection;
    let invariant = GramInvariant::new(q.as_matrix().clone())?;
    Ok(NormalizedTightMetric {
        metric,
        invariant,
        bounds,
    })
}

#[derive(Clone, Debug)]
pub struct UnitaryReconstruction {
    /// `V = theta_g* theta_f`, mapping `x_i` to `y_i`.
    pub operator: ModuleOperator,
    pub gram_distance: f64,
    /// `max_i |V x_i - y_i|`.
    pub mapping_residual: f64,
    /// `max(|V V* - P_f|, |V* V - P_g|)` on the flattened blocks.
    pub unitarity_defect: f64,
}

fn require_normalized_tight(f: &Frame, tol: f64) -> Result<()> {
    let r = analyze(f, tol)?;
    if !r.is_normalized_tight {
        return Err(Error::NotNormalizedTight {
            lower: r.lower_bound,
            upper: r.upper_bound,
        });
    }
    if let Some(i) = f.elements().iter().position(|x| x.norm() == 0.0) {
        return Err(Error::ZeroElement(i));
    }
    Ok(())
}

/// Unitary `V` of the generated modules with `V x_i = y_i`, for normalized
/// tight frames with equal Gram matrices.
pub fn build_unitary_from_matching_grams(
    f: &Frame,
    g: &Frame,
    tol: f64,
) -> Result<UnitaryReconstruction> {
    if f.len() != g.len() {
        return Err(Error::CountMismatch(f.len(), g.len()));
    }
    f.shape().ensure_same(g.shape())?;
    require_normalized_tight(f, tol)?;
    require_normalized_tight(g, tol)?;
    let gf = GramInvariant::new(gram_matrix(f)?)?;
    let gg = GramInvariant::new(gram_matrix(g)?)?;
    let gram_distance = gf.distance(&gg)?;
    let gram_tol = gf.tolerance(&gg, tol);
    if gram_distance > gram_tol {
        return Err(Error::GramMismatch {
            distance: gram_distance,
            tol: gram_tol,
        });
    }
    let mut blocks = Vec::new();
    let mut unitarity_defect = 0.0f64;
    for b in 0..f.shape().num_blocks() {
        let v = &f.stacked(b).adjoint() * &g.stacked(b);
        let pf = f.module().projection_flat(b);
        let pg = g.module().projection_flat(b);
        unitarity_defect = unitarity_defect
            .max((&v * &v.adjoint()).max_abs_diff(&pf))
            .max((&v.adjoint() * &v).max_abs_diff(&pg));
        blocks.push(v);
    }
    let operator = ModuleOperator::from_blocks(f.shape().clone(), f.rank(), g.rank(), blocks)?;
    let mut mapping_residual = 0.0f64;
    for (x, y) in f.elements().iter().zip(g.elements()) {
        mapping_residual = mapping_residual.max(operator.apply(x)?.distance(y));
    }
    Ok(UnitaryReconstruction {
        operator,
        gram_distance,
        mapping_residual,
        unitarity_defect,
    })
}

pub const MAX_PERMUTATION_SEARCH: usize = 8;

/// Brute-force search for `perm` with `g.permuted(perm) == f` entrywise, so
/// that generator `i` of `f` corresponds to generator `perm[i]` of `g`.
pub fn find_matching_permutation(
    f: &GramInvariant,
    g: &GramInvariant,
    tol: f64,
) -> Result<Option<Vec<usize>>> {
    let k = f.k();
    if k != g.k() {
        return Err(Error::CountMismatch(k, g.k()));
    }
    if k > MAX_PERMUTATION_SEARCH {
        return Err(Error::InvalidInput(format!(
            "permutation search is limited to {MAX_PERMUTATION_SEARCH} generators, got {k}"
        )));
    }
    let t = f.tolerance(g, tol);
    let fe = f.gram.entries();
    let ge = g.gram.entries();
    let mut perm = Vec::with_capacity(k);
    let mut used = vec![false; k];
    if extend(&fe, &ge, t, &mut perm, &mut used) {
        Ok(Some(perm))
    } else {
        Ok(None)
    }
}

fn extend(
    fe: &[Vec<AlgebraElement>],
    ge: &[Vec<AlgebraElement>],
    t: f64,
    perm: &mut Vec<usize>,
    used: &mut [bool],
) -> bool {
    let i = perm.len();
    if i == fe.len() {
        return true;
    }
    for c in 0..fe.len() {
        if used[c] {
            continue;
        }
        let fits = fe[i][i].distance(&ge[c][c]) <= t
            && perm.iter().enumerate().all(|(j, &pj)| {
                fe[i][j].distance(&ge[c][pj]) <= t && fe[j][i].distance(&ge[pj][c]) <= t
            });
        if fits {
            used[c] = true;
            perm.push(c);
            if extend(fe, ge, t, perm, used) {
                return true;
            }
            perm.pop();
            used[c] = false;
        }
    }
    false
}

#[derive(Clone, Debug)]
pub struct ChangeOfBasis {
    /// `l x k`, `f_ij = <y_i, S_f x_j>`, so `y_i = sum_j f_ij x_j`.
    pub f: AlgebraMatrix,
    /// `k x l`, `g_ji = <x_j, S_g y_i>`, so `x_j = sum_i g_ji y_i`.
    pub g: AlgebraMatrix,
    /// Residuals of `FGF = F`, `GFG = G`, `(FG)* = FG`, `(GF)* = GF`.
    pub mp_residuals: [f64; 4],
    pub expansion_residuals: (f64, f64),
}

/// Coefficient matrices between two Riesz bases of the same module. They
/// are Moore-Penrose inverses of each other.
pub fn change_of_basis_mp(x: &Frame, y: &Frame, tol: f64) -> Result<ChangeOfBasis> {
    x.shape().ensure_same(y.shape())?;
    if x.rank() != y.rank() {
        return Err(Error::DimensionMismatch(format!(
            "bases of A^{} and A^{}",
            x.rank(),
            y.rank()
        )));
    }
    for (name, f) in [("first", x), ("second", y)] {
        if !riesz_check(f, tol)?.is_riesz_basis {
            return Err(Error::NotRieszBasis(format!("{name} sequence")));
        }
    }
    let sx = frame::frame_operator(x, tol)?;
    let sy = frame::frame_operator(y, tol)?;
    let mut f_blocks = Vec::new();
    let mut g_blocks = Vec::new();
    let mut res_y = 0.0f64;
    let mut res_x = 0.0f64;
    let mut scale = 0.0f64;
    for b in 0..x.shape().num_blocks() {
        let xs = x.stacked(b);
        let ys = y.stacked(b);
        let fb = &(&ys * sx.flat(b)) * &xs.adjoint();
        let gb = &(&xs * sy.flat(b)) * &ys.adjoint();
        res_y = res_y.max(matrix::op_norm(&(&(&fb * &xs) - &ys)));
        res_x = res_x.max(matrix::op_norm(&(&(&gb * &ys) - &xs)));
        scale = scale.max(matrix::op_norm(&xs)).max(matrix::op_norm(&ys));
        f_blocks.push(fb);
        g_blocks.push(gb);
    }
    let bound = tol * (1.0 + scale);
    let worst = res_x.max(res_y);
    if worst > bound {
        return Err(Error::ExpansionResidualTooLarge {
            residual: worst,
            tol: bound,
        });
    }
    let f = AlgebraMatrix::from_flat(x.shape().clone(), y.len(), x.len(), f_blocks)?;
    let g = AlgebraMatrix::from_flat(x.shape().clone(), x.len(), y.len(), g_blocks)?;
    let mp_residuals = algebra::penrose_residuals(&f, &g)?;
    Ok(ChangeOfBasis {
        f,
        g,
        mp_residuals,
        expansion_residuals: (res_y, res_x),
    })
}

/// Flattened block of an invariant, exposed for reporting.
pub fn invariant_block(inv: &GramInvariant, b: usize) -> &CMatrix {
    inv.gram.flat(b)
}
