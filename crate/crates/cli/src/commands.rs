use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use modframe::frame::{self, Frame, Relation};
use modframe::invariants;
use modframe::io::{
    json_f64, ElementJson, FrameJson, GramInvariantJson, HilbertFrameJson, MatrixJson,
    OperatorJson, ResolutionJson,
};
use modframe::random::random_vector_in;
use modframe::resolution::{self, ResolutionSequence};
use modframe::tight::{self, HilbertFrame};

use crate::report::{CliError, Report, Table};

pub struct Context {
    pub tol: f64,
    pub seed: u64,
}

impl Context {
    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::FileNotFound(path.display().to_string()),
        _ => CliError::Io(format!("{}: {e}", path.display())),
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn load_frame(path: &Path, ctx: &Context) -> Result<Frame, CliError> {
    read_json::<FrameJson>(path)?
        .into_frame(ctx.tol.max(1e-9))
        .map_err(CliError::input)
}

fn load_hilbert(path: &Path) -> Result<HilbertFrame, CliError> {
    HilbertFrame::try_from(read_json::<HilbertFrameJson>(path)?).map_err(CliError::input)
}

fn load_resolution(path: &Path) -> Result<ResolutionSequence, CliError> {
    ResolutionSequence::try_from(read_json::<ResolutionJson>(path)?).map_err(CliError::input)
}

fn to_value<T: Serialize>(x: T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn num(x: f64) -> Value {
    json_f64(x)
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| json_f64(x)).collect())
}

pub fn analyze(path: &Path, ctx: &Context) -> Result<Report, CliError> {
    let f = load_frame(path, ctx)?;
    let r = frame::analyze(&f, ctx.tol)?;
    let mut rep = Report::new(
        "analyze",
        "Frame bounds of a modular frame: C <x,x> <= sum_j <x,x_j><x_j,x> <= D <x,x>",
    );
    rep.set("shape", to_value(f.shape()))
        .set("rank", f.rank())
        .set("elements", f.len())
        .set("lower_bound", num(r.lower_bound))
        .set("upper_bound", num(r.upper_bound))
        .set("is_frame", r.is_frame)
        .set("is_tight", r.is_tight)
        .set("is_normalized_tight", r.is_normalized_tight)
        .set("spectrum", nums(&r.spectrum))
        .set("support_defect", num(r.support_defect))
        .set("support", to_value(OperatorJson::from(&r.support)));
    rep.check(r.is_frame, || {
        "the sequence does not generate its module".into()
    });
    Ok(rep)
}

/// Largest relative reconstruction residual over `probes` random vectors.
fn reconstruction_residual(f: &Frame, probes: usize, ctx: &Context) -> Result<f64, CliError> {
    let mut rng = ctx.rng();
    let dual = frame::canonical_dual(f, ctx.tol)?;
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let x = random_vector_in(&mut rng, f.module());
        let back = frame::synthesize_with(f, &dual, &x)?;
        worst = worst.max(back.distance(&x) / (1.0 + x.norm()));
    }
    Ok(worst)
}

fn involution_residual(f: &Frame, ctx: &Context) -> Result<f64, CliError> {
    let dd = frame::canonical_dual(&frame::canonical_dual(f, ctx.tol)?, ctx.tol)?;
    Ok(f.elements()
        .iter()
        .zip(dd.elements())
        .map(|(a, b)| a.distance(b) / (1.0 + a.norm()))
        .fold(0.0, f64::max))
}

pub fn dual(path: &Path, probes: usize, ctx: &Context) -> Result<Report, CliError> {
    let f = load_frame(path, ctx)?;
    let d = frame::canonical_dual(&f, ctx.tol)?;
    let rec = reconstruction_residual(&f, probes, ctx)?;
    let inv = involution_residual(&f, ctx)?;
    let mut rep = Report::new(
        "dual",
        "Reconstruction formula x = sum_j <x, S x_j> x_j with the canonical dual frame {S x_j}",
    );
    rep.set("reconstruction_residual", num(rec))
        .set("involution_residual", num(inv))
        .set("probes", probes)
        .set("dual", to_value(FrameJson::from(&d)));
    rep.check(rec <= ctx.tol, || {
        format!("reconstruction residual {rec:e}")
    });
    rep.check(inv <= ctx.tol, || {
        format!("dual of the dual differs by {inv:e}")
    });
    Ok(rep)
}

pub fn tighten(path: &Path, scan_points: usize, ctx: &Context) -> Result<Report, CliError> {
    let x = load_hilbert(path)?;
    let sym = tight::symmetric_approximation(&x, ctx.tol)?;
    let mult = tight::closest_tight_multiple(&x, ctx.tol)?;
    let loewdin = match tight::loewdin_orthogonalization(&x, ctx.tol) {
        Ok(l) => json!({"orthonormality_defect": num(l.orthonormality_defect)}),
        Err(modframe::Error::NotABasis { .. }) => Value::Null,
        Err(e) => return Err(e.into()),
    };
    let mut rep = Report::new(
        "tighten",
        "Symmetric approximation {S^{1/2} x_j} as closest normalized tight frame, and the closest tight multiple in operator norm",
    );
    rep.set(
        "symmetric",
        json!({
            "frame": to_value(HilbertFrameJson::from(&sym.frame)),
            "certificate": num(sym.certificate),
            "squared_distance": num(sym.squared_distance),
            "certificate_residual": num(sym.certificate_residual),
            "tightness_defect": num(sym.tightness_defect),
        }),
    )
    .set(
        "multiple",
        json!({
            "lambda": num(mult.lambda),
            "frame": to_value(HilbertFrameJson::from(&mult.frame)),
            "distance": num(mult.distance),
            "eigen_distance": num(mult.eigen_distance),
            "grid_best_lambda": num(mult.grid_best.0),
            "grid_best_distance": num(mult.grid_best.1),
            "grid_resolution": num(mult.grid_resolution),
        }),
    )
    .set("loewdin", loewdin)
    .set("same_span_condition", mult.same_span_condition);
    rep.check(sym.certificate_residual <= 1e-8, || {
        format!("certificate identity off by {:e}", sym.certificate_residual)
    });
    rep.check(sym.tightness_defect <= 1e-8, || {
        format!(
            "approximation is not normalized tight ({:e})",
            sym.tightness_defect
        )
    });
    rep.check((mult.distance - mult.eigen_distance).abs() <= 1e-8, || {
        "operator-norm distance disagrees with the eigenvalue formula".into()
    });
    if scan_points > 1 {
        let (c, d) = x.bounds(ctx.tol)?;
        let (lo, hi) = (c.sqrt(), d.sqrt());
        let nt = tight::normalized_tight(&x, ctx.tol)?;
        let rows = (0..scan_points)
            .map(|i| {
                let l = lo + (hi - lo) * i as f64 / (scan_points - 1) as f64;
                Ok(vec![l, nt.scaled(l).transform_distance(&x)?])
            })
            .collect::<Result<Vec<_>, modframe::Error>>()?;
        rep.table = Some(Table {
            header: vec!["lambda", "distance"],
            rows,
        });
    }
    Ok(rep)
}

pub fn distance(x_path: &Path, y_path: &Path, ctx: &Context) -> Result<Report, CliError> {
    let x = load_hilbert(x_path)?;
    let y = load_hilbert(y_path)?;
    let r = tight::nearness(&x, &y)?;
    let similar = tight::similar(&x, &y, ctx.tol)?;
    let mut rep = Report::new(
        "distance",
        "Quadratic closeness and nearness: frames are near exactly when they are similar",
    );
    rep.set("c_yx", num(r.c_yx))
        .set("c_xy", num(r.c_xy))
        .set("d_xy", num(r.d_xy))
        .set("near", r.is_near())
        .set("similar", similar);
    rep.check(r.is_near() == similar, || {
        "nearness and similarity disagree".into()
    });
    Ok(rep)
}

pub fn balan(path: &Path, ctx: &Context) -> Result<Report, CliError> {
    let x = load_hilbert(path)?;
    let b = tight::balan_minimizers(&x, ctx.tol)?;
    let minimizer = |m: &tight::TightMinimizer| {
        json!({
            "factor": num(m.factor),
            "achieved": num(m.achieved),
            "frame": to_value(HilbertFrameJson::from(&m.frame)),
        })
    };
    let mut rep = Report::new(
        "balan",
        "Balan's theorem: the tight frames closest to a frame for c(y,x), c(x,y) and d(x,y)",
    );
    rep.set("lower_bound", num(b.lower_bound))
        .set("upper_bound", num(b.upper_bound))
        .set("min_c", num(b.min_c))
        .set("min_d", num(b.min_d))
        .set("arithmetic", minimizer(&b.arithmetic))
        .set("harmonic", minimizer(&b.harmonic))
        .set("geometric", minimizer(&b.geometric))
        .set("postcondition_residual", num(b.postcondition_residual))
        .set("same_span_condition", b.same_span_condition);
    rep.check(b.postcondition_residual <= 1e-8, || {
        format!(
            "minimizers miss the stated minima by {:e}",
            b.postcondition_residual
        )
    });
    Ok(rep)
}

pub fn invariant(
    path: &Path,
    other: Option<&Path>,
    permute: bool,
    ctx: &Context,
) -> Result<Report, CliError> {
    let f = load_frame(path, ctx)?;
    let mf = invariants::normalized_tight_inner_product(&f, ctx.tol)?;
    let mut rep = Report::new(
        "invariant",
        "Gram matrix of the unique normalized tight inner product as a unitary isomorphism invariant",
    );
    rep.set("bounds_under_metric", nums(&[mf.bounds.0, mf.bounds.1]))
        .set("metric", to_value(OperatorJson::from(&mf.metric)))
        .set(
            "invariant",
            to_value(GramInvariantJson::from(&mf.invariant)),
        );
    let Some(other) = other else {
        return Ok(rep);
    };
    let g = load_frame(other, ctx)?;
    let mg = invariants::normalized_tight_inner_product(&g, ctx.tol)?;
    let mut perm: Vec<usize> = (0..g.len()).collect();
    let mut matched = f.len() == g.len() && mf.invariant.matches(&mg.invariant, ctx.tol)?;
    if !matched && permute && f.len() == g.len() {
        if let Some(p) =
            invariants::find_matching_permutation(&mf.invariant, &mg.invariant, ctx.tol)?
        {
            perm = p;
            matched = true;
        }
    }
    rep.set(
        "other_invariant",
        to_value(GramInvariantJson::from(&mg.invariant)),
    )
    .set("isomorphic", matched)
    .set("permutation", to_value(&perm));
    if matched {
        let fx = f.under_metric(&mf.metric)?;
        let gy = g.under_metric(&mg.metric)?;
        let reordered = Frame::new(
            gy.module().clone(),
            perm.iter().map(|&i| gy.elements()[i].clone()).collect(),
            1e-8,
        )?;
        let u = invariants::build_unitary_from_matching_grams(&fx, &reordered, ctx.tol.max(1e-9))?;
        rep.set("unitary", to_value(OperatorJson::from(&u.operator)))
            .set("mapping_residual", num(u.mapping_residual))
            .set("unitarity_defect", num(u.unitarity_defect));
        rep.check(u.mapping_residual <= 1e-8, || {
            format!("unitary misses the generators by {:e}", u.mapping_residual)
        });
        rep.check(u.unitarity_defect <= 1e-8, || {
            format!(
                "reconstructed operator is not unitary ({:e})",
                u.unitarity_defect
            )
        });
    }
    Ok(rep)
}

pub fn modcheck(
    path: &Path,
    against: Option<&Path>,
    probes: usize,
    ctx: &Context,
) -> Result<Report, CliError> {
    let f = load_frame(path, ctx)?;
    let riesz = frame::riesz_check(&f, ctx.tol)?;
    let rec = reconstruction_residual(&f, probes, ctx)?;
    let inv = involution_residual(&f, ctx)?;
    let generators: Vec<Vec<ElementJson>> = riesz
        .kernel_generators
        .iter()
        .map(|t| t.iter().map(ElementJson::from).collect())
        .collect();
    let mut rep = Report::new(
        "modcheck",
        "Riesz bases, reconstruction and similarity of modular frames (similar iff the frame transforms have the same range)",
    );
    rep.set(
        "riesz",
        json!({
            "is_riesz_basis": riesz.is_riesz_basis,
            "is_orthogonal_hilbert_basis": riesz.is_orthogonal_hilbert_basis,
            "kernel_dimension": riesz.kernel_dimension,
            "worst_summand": num(riesz.worst_summand),
            "kernel_generators": generators,
        }),
    )
    .set("reconstruction_residual", num(rec))
    .set("involution_residual", num(inv))
    .set("probes", probes);
    rep.check(rec <= ctx.tol, || {
        format!("reconstruction residual {rec:e}")
    });
    rep.check(inv <= ctx.tol, || {
        format!("dual of the dual differs by {inv:e}")
    });
    if let Some(other) = against {
        let g = load_frame(other, ctx)?;
        let s = frame::test_similarity(&f, &g, ctx.tol.sqrt())?;
        let relation = match s.relation {
            Relation::UnitarilyEquivalent => "unitarily_equivalent",
            Relation::Similar => "similar",
            Relation::Neither => "neither",
        };
        rep.set(
            "similarity",
            json!({
                "relation": relation,
                "projection_distance": num(s.projection_distance),
                "witness_residual": num(s.witness_residual),
                "isometry_defect": num(s.isometry_defect),
                "witness": s.witness.as_ref().map(|w| to_value(OperatorJson::from(w))),
            }),
        );
    }
    Ok(rep)
}

pub fn resolution(path: &Path, probes: usize, ctx: &Context) -> Result<Report, CliError> {
    let seq = load_resolution(path)?;
    let tol = ctx.tol * (1.0 + seq.k() as f64);
    let mut rng = ctx.rng();
    let v = resolution::verify_resolution(&seq, tol, probes, &mut rng);
    let mut rep = Report::new(
        "resolution",
        "Resolutions of the identity sum b_i* b_i = 1 as normalized tight frames of the algebra, with polar factors b_i = u_i m_i",
    );
    rep.set("d", seq.d())
        .set("k", seq.k())
        .set("tol", num(tol))
        .set("dilation", resolution::DILATION_NOTE)
        .set("verification", to_value(&v));
    rep.check(v.passed, || {
        format!(
            "not a resolution of the identity (sum residual {:e}, probe residual {:e})",
            v.sum_residual, v.probe_residual
        )
    });
    if !v.passed {
        return Ok(rep);
    }
    let t = resolution::frame_transform_range(&seq, tol)?;
    let p = resolution::polar_factorization(&seq, tol)?;
    let ineq = resolution::coefficient_inequality(&seq, tol)?;
    let factors: Vec<Value> = p
        .factors
        .iter()
        .map(|f| json!({"u": to_value(MatrixJson::from(&f.u)), "m": to_value(MatrixJson::from(&f.m))}))
        .collect();
    rep.set(
        "transform",
        json!({
            "q": to_value(MatrixJson::from(&t.q)),
            "isometry_defect": num(t.isometry_defect),
            "projection_defect": num(t.projection_defect),
            "decomposition_residual": num(t.decomposition_residual),
        }),
    )
    .set(
        "polar",
        json!({
            "factors": factors,
            "reconstruction_residual": num(p.reconstruction_residual),
            "initial_projection_residual": num(p.initial_projection_residual),
            "modulus_sum_residual": num(p.modulus_sum_residual),
            "bookkeeping_residual": num(p.bookkeeping_residual),
        }),
    )
    .set(
        "inequality",
        json!({
            "endpoint_residual": num(ineq.endpoint_residual),
            "diagonal_dominated": ineq.diagonal_dominated,
            "dominance_margin": num(ineq.dominance_margin),
        }),
    );
    for (name, value) in [
        ("isometry", t.isometry_defect),
        ("range projection", t.projection_defect),
        ("decomposition", t.decomposition_residual),
        ("polar reconstruction", p.reconstruction_residual),
        ("initial projection", p.initial_projection_residual),
        ("modulus sum", p.modulus_sum_residual),
        ("endpoint identity", ineq.endpoint_residual),
    ] {
        rep.check(value <= tol, || {
            format!("{name} residual {value:e} exceeds {tol:e}")
        });
    }
    rep.check(ineq.diagonal_dominated, || {
        "diagonal of Q does not dominate".into()
    });
    Ok(rep)
}

pub struct Sweep {
    pub points: usize,
    pub from: f64,
    pub to: f64,
}

pub fn diagonal_example(
    phi: f64,
    n: usize,
    sweep: Option<Sweep>,
    ctx: &Context,
) -> Result<Report, CliError> {
    let e = tight::diagonal_example_family(phi, n).map_err(CliError::input)?;
    let (c, d) = e.x.bounds(ctx.tol)?;
    let limit = tight::diagonal_example_phase_limit();
    let expected = |p: f64| 1f64.max(4.0 * (p / 2.0).sin().abs());
    let mut rep = Report::new(
        "example56",
        "Closest tight frames in operator norm are not unique: x = (e_1, 3e_2, 2e_3, ...) with C = 1, D = 9 and the tight family y(phi)",
    );
    rep.set("phi", num(phi))
        .set("n", n)
        .set("lower_bound", num(c))
        .set("upper_bound", num(d))
        .set("lambda", num(0.5 * (c.sqrt() + d.sqrt())))
        .set("phase_limit", num(limit))
        .set("within_limit", phi.abs() <= limit)
        .set("distance", num(e.distance));
    rep.check((e.distance - expected(phi)).abs() <= 1e-12, || {
        format!("distance {} differs from max(1, 4|sin(phi/2)|)", e.distance)
    });
    if let Some(s) = sweep {
        let mut rows = Vec::with_capacity(s.points);
        for i in 0..s.points {
            let p = if s.points == 1 {
                s.from
            } else {
                s.from + (s.to - s.from) * i as f64 / (s.points - 1) as f64
            };
            let dist = tight::diagonal_example_family(p, n)
                .map_err(CliError::input)?
                .distance;
            rep.check((dist - expected(p)).abs() <= 1e-12, || {
                format!("distance at phi = {p} differs from max(1, 4|sin(phi/2)|)")
            });
            rows.push(vec![p, dist]);
        }
        rep.table = Some(Table {
            header: vec!["phi", "distance"],
            rows,
        });
    }
    Ok(rep)
}
