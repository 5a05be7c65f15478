//! JSON encodings of the library types.
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major. Values
//! that may be infinite are written through [`json_f64`], since JSON has no
//! literal for them.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{AlgebraElement, AlgebraMatrix, AlgebraShape};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::invariants::GramInvariant;
use crate::matrix::{CMatrix, C64};
use crate::module::{ModuleOperator, ModuleVector, SubmoduleDescriptor};
use crate::resolution::ResolutionSequence;
use crate::tight::HilbertFrame;

/// `{"rows", "cols", "data": [[re, im], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            data: m.as_slice().to_vec(),
        }
    }
}

impl TryFrom<MatrixJson> for CMatrix {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        CMatrix::from_vec(m.rows, m.cols, m.data)
    }
}

/// `{"shape": [k1, ...], "blocks": [[[re, im], ...], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementJson {
    pub shape: AlgebraShape,
    pub blocks: Vec<Vec<C64>>,
}

impl From<&AlgebraElement> for ElementJson {
    fn from(a: &AlgebraElement) -> Self {
        ElementJson {
            shape: a.shape().clone(),
            blocks: a.blocks().iter().map(|b| b.as_slice().to_vec()).collect(),
        }
    }
}

impl TryFrom<ElementJson> for AlgebraElement {
    type Error = Error;

    fn try_from(e: ElementJson) -> Result<Self> {
        if e.blocks.len() != e.shape.num_blocks() {
            return Err(Error::ShapeMismatch(format!(
                "{} blocks for shape {:?}",
                e.blocks.len(),
                e.shape.blocks()
            )));
        }
        let blocks = e
            .shape
            .blocks()
            .iter()
            .zip(e.blocks)
            .map(|(&k, data)| CMatrix::from_vec(k, k, data))
            .collect::<Result<Vec<_>>>()?;
        AlgebraElement::from_blocks(e.shape, blocks)
    }
}

fn elements_of(shape: &AlgebraShape, items: Vec<ElementJson>) -> Result<Vec<AlgebraElement>> {
    items
        .into_iter()
        .map(|e| {
            if &e.shape != shape {
                return Err(Error::ShapeMismatch(format!(
                    "entry over {:?} inside an object over {:?}",
                    e.shape.blocks(),
                    shape.blocks()
                )));
            }
            AlgebraElement::try_from(e)
        })
        .collect()
}

/// `{"rank": n, "shape": [...], "coords": [element, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorJson {
    pub rank: usize,
    pub shape: AlgebraShape,
    pub coords: Vec<ElementJson>,
}

impl From<&ModuleVector> for VectorJson {
    fn from(x: &ModuleVector) -> Self {
        VectorJson {
            rank: x.rank(),
            shape: x.shape().clone(),
            coords: x.coords().iter().map(ElementJson::from).collect(),
        }
    }
}

impl TryFrom<VectorJson> for ModuleVector {
    type Error = Error;

    fn try_from(v: VectorJson) -> Result<Self> {
        if v.coords.len() != v.rank {
            return Err(Error::ShapeMismatch(format!(
                "{} coordinates for rank {}",
                v.coords.len(),
                v.rank
            )));
        }
        if v.rank == 0 {
            return Ok(ModuleVector::zero(&v.shape, 0));
        }
        let coords = elements_of(&v.shape, v.coords)?;
        ModuleVector::from_coords(&v.shape, &coords)
    }
}

/// `{"shape", "domain": n, "codomain": m, "entries": [[element; m]; n]}`,
/// with `entries[q][p]` the coefficient of coordinate `q` in output `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub shape: AlgebraShape,
    pub domain: usize,
    pub codomain: usize,
    pub entries: Vec<Vec<ElementJson>>,
}

impl From<&ModuleOperator> for OperatorJson {
    fn from(t: &ModuleOperator) -> Self {
        OperatorJson {
            shape: t.shape().clone(),
            domain: t.domain_rank(),
            codomain: t.codomain_rank(),
            entries: t
                .as_matrix()
                .entries()
                .iter()
                .map(|row| row.iter().map(ElementJson::from).collect())
                .collect(),
        }
    }
}

impl TryFrom<OperatorJson> for ModuleOperator {
    type Error = Error;

    fn try_from(t: OperatorJson) -> Result<Self> {
        if t.entries.len() != t.domain || t.entries.iter().any(|r| r.len() != t.codomain) {
            return Err(Error::ShapeMismatch(format!(
                "entries do not form a {}x{} array",
                t.domain, t.codomain
            )));
        }
        if t.domain == 0 || t.codomain == 0 {
            return Ok(ModuleOperator::zero(&t.shape, t.domain, t.codomain));
        }
        let entries = t
            .entries
            .into_iter()
            .map(|row| elements_of(&t.shape, row))
            .collect::<Result<Vec<_>>>()?;
        ModuleOperator::from_entries(&t.shape, &entries)
    }
}

/// `{"rank", "shape", "projection": operator | null}`; `null` is all of `A^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmoduleJson {
    pub rank: usize,
    pub shape: AlgebraShape,
    pub projection: Option<OperatorJson>,
}

impl From<&SubmoduleDescriptor> for SubmoduleJson {
    fn from(m: &SubmoduleDescriptor) -> Self {
        SubmoduleJson {
            rank: m.rank(),
            shape: m.shape().clone(),
            projection: m.projection().map(OperatorJson::from),
        }
    }
}

impl TryFrom<SubmoduleJson> for SubmoduleDescriptor {
    type Error = Error;

    fn try_from(m: SubmoduleJson) -> Result<Self> {
        match m.projection {
            None => Ok(SubmoduleDescriptor::full(m.shape, m.rank)),
            Some(p) => {
                let p = ModuleOperator::try_from(p)?;
                if p.shape() != &m.shape || p.domain_rank() != m.rank {
                    return Err(Error::ShapeMismatch(
                        "projection does not act on the module".into(),
                    ));
                }
                SubmoduleDescriptor::with_projection(p, 1e-9)
            }
        }
    }
}

/// `{"module": submodule, "elements": [vector, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameJson {
    pub module: SubmoduleJson,
    pub elements: Vec<VectorJson>,
}

impl From<&Frame> for FrameJson {
    fn from(f: &Frame) -> Self {
        FrameJson {
            module: f.module().into(),
            elements: f.elements().iter().map(VectorJson::from).collect(),
        }
    }
}

impl FrameJson {
    pub fn into_frame(self, tol: f64) -> Result<Frame> {
        let module = SubmoduleDescriptor::try_from(self.module)?;
        let elements = self
            .elements
            .into_iter()
            .map(ModuleVector::try_from)
            .collect::<Result<Vec<_>>>()?;
        Frame::new(module, elements, tol)
    }
}

/// `{"k": k, "gram": [[element, ...], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramInvariantJson {
    pub k: usize,
    pub gram: Vec<Vec<ElementJson>>,
}

impl From<&GramInvariant> for GramInvariantJson {
    fn from(g: &GramInvariant) -> Self {
        GramInvariantJson {
            k: g.k(),
            gram: g
                .matrix()
                .entries()
                .iter()
                .map(|row| row.iter().map(ElementJson::from).collect())
                .collect(),
        }
    }
}

impl TryFrom<GramInvariantJson> for GramInvariant {
    type Error = Error;

    fn try_from(g: GramInvariantJson) -> Result<Self> {
        if g.gram.len() != g.k || g.gram.iter().any(|r| r.len() != g.k) {
            return Err(Error::ShapeMismatch(format!(
                "Gram array is not {0}x{0}",
                g.k
            )));
        }
        let shape = g
            .gram
            .first()
            .and_then(|r| r.first())
            .map(|e| e.shape.clone())
            .ok_or(Error::EmptyFrame)?;
        let entries = g
            .gram
            .into_iter()
            .map(|row| elements_of(&shape, row))
            .collect::<Result<Vec<_>>>()?;
        GramInvariant::new(AlgebraMatrix::from_entries(&shape, &entries)?)
    }
}

/// `{"d": d, "b": [matrix, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolutionJson {
    pub d: usize,
    pub b: Vec<MatrixJson>,
}

impl From<&ResolutionSequence> for ResolutionJson {
    fn from(s: &ResolutionSequence) -> Self {
        ResolutionJson {
            d: s.d(),
            b: s.elements().iter().map(MatrixJson::from).collect(),
        }
    }
}

impl TryFrom<ResolutionJson> for ResolutionSequence {
    type Error = Error;

    fn try_from(s: ResolutionJson) -> Result<Self> {
        let b =
            s.b.into_iter()
                .map(CMatrix::try_from)
                .collect::<Result<Vec<_>>>()?;
        ResolutionSequence::new(s.d, b)
    }
}

/// `{"dim": n, "vectors": [[[re, im]; n], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HilbertFrameJson {
    pub dim: usize,
    pub vectors: Vec<Vec<C64>>,
}

impl From<&HilbertFrame> for HilbertFrameJson {
    fn from(f: &HilbertFrame) -> Self {
        HilbertFrameJson {
            dim: f.dim(),
            vectors: f.vectors().to_vec(),
        }
    }
}

impl TryFrom<HilbertFrameJson> for HilbertFrame {
    type Error = Error;

    fn try_from(f: HilbertFrameJson) -> Result<Self> {
        HilbertFrame::new(f.dim, f.vectors)
    }
}

/// A number, or `"inf"`, `"-inf"`, `"nan"` for the non-finite values.
pub fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::from("nan")
    } else if x > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

/// Inverse of [`json_f64`].
pub fn parse_json_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => match s.as_str() {
            "inf" => Some(f64::INFINITY),
            "-inf" => Some(f64::NEG_INFINITY),
            "nan" => Some(f64::NAN),
            _ => None,
        },
        _ => None,
    }
}
