//! The per-module command line tools. Each returns the text it prints, so
//! the tools are testable without spawning the binary.

use std::fmt::Write as _;

use l2gauss::ck::{ck_solve, convergence_certificate_with, majorant_frame, LinearCauchyProblem, ProblemSpec, SeriesSpec, DEFAULT_DIMS};
use l2gauss::cutoff::{Cutoff, CutoffConfig, Smoothstep};
use l2gauss::dbar::{basic_estimate_check, solve_dbar, Form, FormSpec, SolveOptions};
use l2gauss::measure::{classify_pair, fernique_integral, hellinger_1d, Fernique, ProductGaussian, ShiftedGaussianPair};
use l2gauss::numerics::{MultiIndex, Poly, SampleStream, Sequence, Weights};
use l2gauss::sobolev::{chart_norm_equivalence, sobolev_norm, translation_unboundedness, ChartChange, Domain};
use l2gauss::surface::{
    chart_consistency, gauss_green_ball, gauss_green_halfspace_exact, gauss_green_halfspace_mc, stokes_check, Ball, GaussGreenReport,
    GraphParam, HalfSpace, LineBundle, Region,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::VerifyError;

type Out = Result<String, VerifyError>;

/// A polynomial as `[[exponents of (x_0, x_1, …)], coefficient]` pairs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolySpec(pub Vec<(Vec<u32>, f64)>);

impl From<&PolySpec> for Poly {
    fn from(p: &PolySpec) -> Poly {
        Poly::from_terms(p.0.iter().map(|(e, c)| (MultiIndex::from_dense(e), *c)))
    }
}

fn json_line(v: serde_json::Value) -> Out {
    Ok(serde_json::to_string(&v)? + "\n")
}

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

fn csv_rows(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

pub fn measure_hellinger(a: f64, r: f64, s: f64, x1: f64, x2: f64) -> Out {
    json_line(json!({
        "inputs": {"a": a, "r": r, "s": s, "x1": x1, "x2": x2},
        "value": hellinger_1d(a, r, s, x1, x2),
        "verdict": null,
    }))
}

/// Pair with shift `first·ratio^i` under `μ` and none under `ν`.
pub fn measure_classify(r: f64, s: f64, first: f64, ratio: f64) -> Out {
    let pair = ShiftedGaussianPair {
        weights: Weights::default(),
        r,
        s,
        shift_mu: Sequence::geometric(first, ratio, 4),
        shift_nu: Sequence::finite(vec![]),
    };
    let v = classify_pair(&pair)?;
    json_line(json!({
        "inputs": {"r": r, "s": s, "shift_first": first, "shift_ratio": ratio},
        "value": v.hellinger,
        "verdict": v.verdict,
        "tail_sum": if v.tail_sum.is_finite() { json!(v.tail_sum) } else { json!("inf") },
    }))
}

pub fn measure_fernique(c: f64, r: f64) -> Out {
    let g = ProductGaussian::new(Weights::default(), r)?;
    let (value, verdict) = match fernique_integral(&g, c) {
        Fernique::Finite(v) => (Some(v), "finite"),
        Fernique::Divergent => (None, "divergent"),
    };
    json_line(json!({"inputs": {"c": c, "r": r}, "value": value, "verdict": verdict}))
}

/// Points inside `K_k`, outside `K_{k+2N1}` and in the shell between, with
/// `X_k` and the gradient energy against `C²`.
pub fn cutoff_verify(k: u32, points: usize, seed: u64) -> Out {
    let cut = Cutoff::new(CutoffConfig { seed, ..CutoffConfig::default() })?;
    let mut g = ChaCha8Rng::seed_from_u64(seed);
    let c2 = Smoothstep::get().sup_derivative().powi(2);
    let outer = f64::from(k + 2 * cut.n1);
    let mut rows = Vec::new();
    for class in ["inside", "shell", "outside"] {
        for _ in 0..points {
            let level = match class {
                "inside" => g.random_range(0.0..f64::from(k).max(1e-9)),
                "shell" => g.random_range(f64::from(k)..outer),
                _ => outer * g.random_range(1.001..3.0),
            };
            let x = cut.point_at_level(&mut g, level);
            let e = cut.gradient_energy(k, &x);
            rows.push(vec![class.to_string(), fmt(cut.x_k(k, &x)), fmt(e.mean), fmt(e.std_error), fmt(c2)]);
        }
    }
    Ok(csv_rows("point_class,x_k,gradient_energy,std_error,bound", rows))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureScene {
    #[serde(default)]
    pub weights: Weights,
    #[serde(default = "default_delta")]
    pub delta_norm_sq: f64,
    #[serde(default = "default_pivot")]
    pub pivot: usize,
    /// Sides `(coord, lo, hi)` on even coordinates of the line bundle.
    #[serde(default)]
    pub region: Vec<(usize, f64, f64)>,
    #[serde(default)]
    pub seed: u64,
}

fn default_delta() -> f64 {
    3.0
}

fn default_pivot() -> usize {
    1
}

pub fn surface_measure(scene: &MeasureScene) -> Out {
    let bundle = LineBundle::with_delta_norm_sq(scene.weights.clone(), scene.delta_norm_sq)?;
    let region = scene.region.iter().fold(Region::full(), |r, &(c, lo, hi)| r.side(c, lo, hi));
    let (a, b) = chart_consistency(&bundle, scene.pivot, &region, &SampleStream::new(scene.seed, 1))?;
    Ok(csv_rows(
        "chart,mean,std_error",
        [
            vec!["even".into(), fmt(a.mean), fmt(a.std_error)],
            vec![format!("pivot{}", scene.pivot), fmt(b.mean), fmt(b.std_error)],
        ],
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GreenDomain {
    HalfSpace { coord: usize, offset: f64 },
    Ball { dims: usize, radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussGreenScene {
    #[serde(default)]
    pub weights: Weights,
    pub f: PolySpec,
    pub i: usize,
    pub dims: usize,
    pub domain: GreenDomain,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    100_000
}

fn green_row(route: &str, r: &GaussGreenReport) -> Vec<String> {
    vec![route.into(), fmt(r.lhs.mean), fmt(r.volume.mean), fmt(r.boundary.mean), fmt(r.residual.mean), fmt(r.residual.std_error)]
}

pub fn surface_gauss_green(scene: &GaussGreenScene) -> Out {
    let f: Poly = (&scene.f).into();
    let w = &scene.weights;
    let st = SampleStream::new(scene.seed, scene.dims);
    let mut rows = Vec::new();
    match scene.domain {
        GreenDomain::HalfSpace { coord, offset } => {
            let hs = HalfSpace { coord, offset };
            rows.push(green_row("exact", &gauss_green_halfspace_exact(&f, w, hs, scene.i)?));
            rows.push(green_row("monte_carlo", &gauss_green_halfspace_mc(&f, w, hs, scene.i, scene.dims, &st, scene.samples)?));
        }
        GreenDomain::Ball { dims, radius } => {
            let b = Ball { dims, radius };
            rows.push(green_row("monte_carlo", &gauss_green_ball(&f, w, b, scene.i, scene.dims, &st, scene.samples)?));
        }
    }
    Ok(csv_rows("route,lhs,volume,boundary,residual,residual_std_error", rows))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StokesScene {
    #[serde(default)]
    pub weights: Weights,
    pub dims: usize,
    /// Parameter box `(coord, lo, hi)`.
    pub base: Vec<(usize, f64, f64)>,
    #[serde(default)]
    pub graph: Vec<(usize, PolySpec)>,
    pub f: PolySpec,
    #[serde(default)]
    pub i0: Vec<usize>,
}

pub fn surface_stokes(scene: &StokesScene) -> Out {
    let param = GraphParam {
        dims: scene.dims,
        base: scene.base.clone(),
        graph: scene.graph.iter().map(|(j, p)| (*j, p.into())).collect(),
    };
    let f: Poly = (&scene.f).into();
    let r = stokes_check(&param, &f, &scene.i0, &scene.weights)?;
    Ok(csv_rows(
        "surface_side,boundary_side,residual,relative",
        [vec![fmt(r.surface_side), fmt(r.boundary_side), fmt(r.residual), fmt(r.relative)]],
    ))
}

/// Random `(s, t+1)`-forms with both sides of the basic estimate.
pub fn dbar_estimate(trials: usize, seed: u64) -> Out {
    let w = Weights::default();
    let mut g = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(trials);
    for n in 0..trials {
        let f = Form::random(&mut g, (n % 2, n % 3 + 1), 4, 3, 3, 4);
        let e = basic_estimate_check(&f, &w, 1.0)?;
        let ratio = if e.rhs > 0.0 { e.lhs / e.rhs } else { 0.0 };
        rows.push(vec![fmt(e.lhs), fmt(e.rhs), fmt(ratio)]);
    }
    Ok(csv_rows("lhs,rhs,ratio", rows))
}

pub fn dbar_solve(spec: &FormSpec, opts: SolveOptions) -> Out {
    let f = Form::try_from(spec)?;
    let sol = solve_dbar(&f, &Weights::default(), 1.0, opts)?;
    let mut out = csv_rows(
        "lhs,rhs,ratio,bound,residual",
        [vec![fmt(sol.norm_u), fmt(sol.bound * sol.norm_f), fmt(sol.ratio), fmt(sol.bound), fmt(sol.residual)]],
    );
    let _ = writeln!(out, "# u = {}", serde_json::to_string(&FormSpec::from(&sol.u))?);
    Ok(out)
}

/// The solution series and, when the ratio test decides, a certificate in
/// the frame `v_i = 2^i`, `p = 1`.
pub fn ck_solve_problem(spec: &ProblemSpec, cap: u32, dims: Option<usize>) -> Out {
    let problem = LinearCauchyProblem::try_from(spec)?;
    let dims = dims.unwrap_or(DEFAULT_DIMS);
    let u = ck_solve(&problem, cap, dims);
    let frame = majorant_frame(&Sequence::geometric(2.0, 2.0, 6), 1.0)?;
    let certificate = match convergence_certificate_with(&problem, &frame, cap, dims) {
        Ok(c) => {
            let radius = if c.radius.is_finite() { json!(c.radius) } else { json!("inf") };
            let mut v = serde_json::to_value(c)?;
            v["radius"] = radius;
            v
        }
        Err(e) => json!({ "error": e.to_string() }),
    };
    json_line(json!({ "solution": SeriesSpec::from(&u), "certificate": certificate }))
}

pub fn sobolev_norm_cmd(f: &PolySpec, m: u32, halfspace: Option<(usize, f64)>) -> Out {
    let p: Poly = f.into();
    let domain = halfspace.map_or(Domain::Full, |(coord, offset)| Domain::HalfSpace { coord, offset });
    let rows = (0..=m).map(|k| vec![k.to_string(), fmt(sobolev_norm(&p, k, &Weights::default(), domain))]);
    Ok(csv_rows("m,norm", rows))
}

pub fn sobolev_translate_demo(n: u32) -> Out {
    let w = Weights::default();
    let rows = (0..=n).map(|k| {
        let r = translation_unboundedness(k, &w);
        vec![r.n.to_string(), fmt(r.ratio), fmt(r.lower), fmt(r.upper)]
    });
    Ok(csv_rows("n,ratio,lower,upper", rows))
}

pub fn sobolev_chart_check(f: &PolySpec) -> Out {
    let p: Poly = f.into();
    let w = Weights::default();
    let mut rows = Vec::new();
    for (name, chart) in [("half_space", ChartChange::HalfSpace { r: 0.8 }), ("sphere", ChartChange::Sphere)] {
        let r = chart_norm_equivalence(&chart, &p, &w)?;
        rows.push(vec![name.into(), fmt(r.c), fmt(r.lhs), fmt(r.mid), fmt(r.rhs), r.holds().to_string()]);
    }
    Ok(csv_rows("chart,c,lhs,mid,rhs,holds", rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hellinger_record() {
        let v: serde_json::Value = serde_json::from_str(&measure_hellinger(1.0, 1.0, 1.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(v["value"], 1.0);
        let v: serde_json::Value = serde_json::from_str(&measure_classify(1.0, 2.0, 0.0, 0.5).unwrap()).unwrap();
        assert_eq!(v["verdict"], "Singular");
        let v: serde_json::Value = serde_json::from_str(&measure_fernique(2.0, 1.0).unwrap()).unwrap();
        assert_eq!(v["verdict"], "divergent");
    }

    #[test]
    fn translate_demo_rows() {
        let out = sobolev_translate_demo(3).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "n,ratio,lower,upper");
        assert_eq!(lines.len(), 5);
        assert!(lines[4].starts_with("3,"));
    }

    #[test]
    fn ck_round_trip() {
        let spec: ProblemSpec = serde_json::from_str(
            r#"{"a0": {"terms": []}, "a": [[1, {"terms": [[[0], 1.0]]}]], "phi": {"terms": [[[0, 1], 1.0]]}}"#,
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&ck_solve_problem(&spec, 12, None).unwrap()).unwrap();
        let terms = v["solution"]["terms"].as_array().unwrap();
        assert_eq!(terms.len(), 2);
        assert_eq!(v["certificate"]["entire"], true);
        assert_eq!(v["certificate"]["radius"], "inf");
    }

    #[test]
    fn gauss_green_scene() {
        let scene: GaussGreenScene = serde_json::from_str(
            r#"{"f": [[[1], 1.0]], "i": 0, "dims": 2, "domain": {"kind": "half_space", "coord": 0, "offset": 0.1}, "samples": 2000}"#,
        )
        .unwrap();
        let out = surface_gauss_green(&scene).unwrap();
        assert_eq!(out.lines().count(), 3);
        assert!(out.lines().nth(1).unwrap().starts_with("exact,"));
    }
}
