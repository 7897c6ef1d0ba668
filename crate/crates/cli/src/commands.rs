//! One function per subcommand; each returns the report and its outcome.

use std::collections::BTreeMap;

use anyhow::{bail, Result};
use hermcurv::certify::{self, Status};
use hermcurv::curvature::{self, ChernTensor, Frame, FrameWeights};
use hermcurv::metric::{self, MetricSpec, Region};
use hermcurv::numerics::{self, cmat_rows, CMat};
use hermcurv::sampling;
use hermcurv::schwarz::{self, SchwarzBounds};
use hermcurv::{UnitaryFrame, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::input::{
    load_map, load_metric, parse_assignments, parse_condition, parse_indices, parse_point, parse_weights,
};
use crate::report::Report;
use crate::{CatalogCommand, Command, Global, McCommand, MetricParams, Outcome, PointArgs};

/// Seed purpose for random HSC directions in `eval`.
const DIRECTION_PURPOSE: u64 = 5;
const DEFAULT_SCAN_POINTS: usize = 100;
const DEFAULT_SCHWARZ_POINTS: usize = 10;
const DEFAULT_RADIUS: f64 = 0.05;

pub fn dispatch(command: Command, global: &Global) -> Result<(Report, Outcome)> {
    match command {
        Command::Eval {
            metric,
            params,
            point,
            directions,
            direction,
            tensor,
        } => eval(global, &metric, &params, point.as_deref(), directions, &direction, tensor),
        Command::Certify {
            metric,
            params,
            points,
            cond,
            constant_rbc,
        } => certify_cmd(global, &metric, &params, &points, &cond, constant_rbc),
        Command::Schwarz {
            g,
            h,
            map,
            params,
            g_param,
            h_param,
            points,
            step,
            lambda,
            mu,
            kappa,
            rank,
            sup_bound,
        } => {
            let shared = params.to_map()?;
            let mut gp = shared.clone();
            gp.extend(parse_assignments(&g_param)?);
            let mut hp = shared;
            hp.extend(parse_assignments(&h_param)?);
            let bounds = SchwarzBounds {
                lambda,
                mu,
                kappa,
                rank,
            };
            schwarz_cmd(global, [&g, &h, &map], [&gp, &hp], &points, step, bounds, sup_bound)
        }
        Command::Mc { which } => match which {
            McCommand::FsMoment { n, idx } => fs_moment(global, n, &idx),
            McCommand::Berger {
                metric,
                params,
                point,
                weights,
            } => berger(global, &metric, &params, point.as_deref(), &weights),
        },
        Command::Catalog { which } => catalog(global, which),
    }
}

impl MetricParams {
    pub fn to_map(&self) -> Result<BTreeMap<String, f64>> {
        let mut m = parse_assignments(&self.extra)?;
        for (k, v) in [
            ("n", self.n.map(|x| x as f64)),
            ("eps", self.eps),
            ("b", self.b),
            ("n1", self.n1.map(|x| x as f64)),
            ("n2", self.n2.map(|x| x as f64)),
        ] {
            if let Some(v) = v {
                m.insert(k.into(), v);
            }
        }
        Ok(m)
    }
}

fn point_or_origin(spec: &MetricSpec, text: Option<&str>) -> Result<Vec<C64>> {
    let p = match text {
        Some(s) => parse_point(s)?,
        None => vec![C64::new(0.0, 0.0); spec.dim()],
    };
    if p.len() != spec.dim() {
        bail!("point has {} coordinates but {} has dimension {}", p.len(), spec.name(), spec.dim());
    }
    Ok(p)
}

fn frame_of(t: &ChernTensor) -> UnitaryFrame {
    match t.frame() {
        Frame::Unitary(e) => e.clone(),
        Frame::Coordinate => unreachable!("unitary_tensor returns a unitary frame"),
    }
}

fn metric_echo(spec: &MetricSpec) -> Value {
    json!({
        "name": spec.name(),
        "dimension": spec.dim(),
        "parameters": spec.params(),
        "entries_upper": spec.upper_sources(),
        "domain_radius": spec.domain_hint(),
    })
}

fn block(operation: &str, tolerance_class: &str, body: Value) -> Value {
    let mut v = json!({ "operation": operation, "tolerance_class": tolerance_class });
    if let (Value::Object(m), Value::Object(b)) = (&mut v, body) {
        m.extend(b);
    }
    v
}

#[allow(clippy::too_many_arguments)]
fn eval(
    global: &Global,
    name: &str,
    params: &MetricParams,
    point: Option<&str>,
    directions: usize,
    given: &[String],
    full_tensor: bool,
) -> Result<(Report, Outcome)> {
    let tol = global.tolerances();
    let spec = load_metric(name, &params.to_map()?)?;
    let n = spec.dim();
    let p = point_or_origin(&spec, point)?;
    let jet = spec.jet(&p)?;
    let coord = curvature::chern_tensor(&jet);
    let ut = curvature::unitary_tensor(&jet)?;
    let sym = curvature::symmetry_report(&ut, 0.0);
    let ric = curvature::ricci(&coord)?;
    let tor = curvature::torsion_eta(&jet);
    let div = curvature::eta_divergence(&jet);

    let mut dirs = given.iter().map(|s| parse_point(s)).collect::<Result<Vec<_>>>()?;
    if let Some(bad) = dirs.iter().find(|d| d.len() != n) {
        bail!("direction has {} coordinates, expected {n}", bad.len());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(certify::derive_seed(global.seed, DIRECTION_PURPOSE));
    for _ in 0..directions {
        dirs.push(numerics::column(&numerics::ginibre(n, 1, &mut rng), 0));
    }
    let hsc_values = dirs.iter().map(|v| curvature::hsc(&coord, v)).collect::<hermcurv::Result<Vec<f64>>>()?;
    let hsc_block = if hsc_values.is_empty() {
        Value::Null
    } else {
        let min = hsc_values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = hsc_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        block(
            "hsc",
            "symmetry",
            json!({
                "directions": dirs,
                "values": hsc_values,
                "min": min,
                "max": max,
                "spread": max - min,
                "constant": max - min <= tol.symmetry,
            }),
        )
    };
    let uniform = curvature::rbc_value(&ut, &FrameWeights::new(frame_of(&ut), &vec![1.0; n])?)?;
    let max_abs = coord.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut curvature_block = json!({
        "max_abs_coordinate": max_abs,
        "symmetry": sym,
        "kahler_like": sym.kahler_like <= tol.symmetry,
        "unitary_frame": cmat_rows(frame_of(&ut).matrix()),
    });
    if full_tensor {
        curvature_block["tensor"] = json!(coord.nested());
    }
    let results = json!({
        "metric_values": block("metric_jet", "decomposition", json!({
            "g": cmat_rows(jet.g.matrix()),
            "g_inv": cmat_rows(jet.g_inv.matrix()),
            "min_eigenvalue": jet.g.min_eigenvalue(),
            "invariant_residual": jet.invariant_residual(),
        })),
        "curvature": block("chern_tensor", "symmetry", curvature_block),
        "ricci": block("ricci", "symmetry", json!({
            "ric1": cmat_rows(ric.ric1.matrix()),
            "ric2": cmat_rows(ric.ric2.matrix()),
            "ric3": cmat_rows(&ric.ric3),
            "max_disagreement": ric.max_disagreement(),
        })),
        "torsion": block("torsion_eta", "algebraic", json!({
            "torsion_norm": tor.torsion_norm(),
            "eta": tor.eta,
            "eta_norm": tor.eta_norm(),
            "eta_divergence": div,
            "kahler": tor.torsion_norm() <= tol.decomposition,
        })),
        "hsc": hsc_block,
        "rbc_uniform": block("rbc_value", "algebraic", json!({ "value": uniform })),
    });
    let inputs = json!({
        "metric": metric_echo(&spec),
        "point": p,
        "random_directions": directions,
    });
    Ok((
        Report::new("eval", global.seed, tol, inputs, results),
        Outcome::default(),
    ))
}

fn region_of(spec: &MetricSpec, args: &PointArgs, default_count: usize) -> Option<Region> {
    if args.radius.is_none() && args.points.is_none() {
        return None;
    }
    let radius = args
        .radius
        .unwrap_or_else(|| spec.domain_hint().map_or(DEFAULT_RADIUS, |r| r.min(DEFAULT_RADIUS)));
    let count = args.points.unwrap_or(default_count);
    Some(if args.grid {
        Region::grid(radius, count)
    } else {
        Region::random(radius, count)
    })
}

fn check_region(region: &Region) -> Result<()> {
    if !(region.radius >= 0.0) || region.count == 0 {
        bail!("region needs a nonnegative radius and at least one point");
    }
    Ok(())
}

fn certify_cmd(
    global: &Global,
    name: &str,
    params: &MetricParams,
    args: &PointArgs,
    cond: &str,
    constant_rbc: Option<f64>,
) -> Result<(Report, Outcome)> {
    let tol = global.tolerances();
    let condition = parse_condition(cond)?;
    let spec = load_metric(name, &params.to_map()?)?;
    let budget = global.budget();
    let mut outcome = Outcome::default();
    let mut inputs = json!({
        "metric": metric_echo(&spec),
        "condition": condition,
        "budget": {
            "samples": budget.samples,
            "starts": budget.starts,
            "tol": budget.tol,
            "max_iterations": budget.max_iterations,
        },
    });
    let (mut results, points) = match (args.point.as_deref(), region_of(&spec, args, DEFAULT_SCAN_POINTS)) {
        (Some(_), Some(_)) => bail!("--point cannot be combined with --radius/--points"),
        (point, None) => {
            let p = point_or_origin(&spec, point)?;
            let t = curvature::unitary_tensor(&spec.jet(&p)?)?;
            let v = certify::certify_sign(&t, condition, &budget)?;
            outcome.refuted = v.status == Status::Refuted;
            outcome.inconclusive = v.status == Status::Inconclusive;
            inputs["point"] = json!(p);
            (block("certify_sign", "algebraic", json!({ "verdict": v })), vec![p])
        }
        (None, Some(region)) => {
            check_region(&region)?;
            let scan = certify::scan(&spec, &region, condition, &budget)?;
            outcome.refuted = scan.summary.refuted > 0;
            outcome.inconclusive = scan.summary.inconclusive > 0;
            inputs["region"] = json!(region);
            let pts = scan.results.iter().map(|r| r.point.clone()).collect();
            (block("scan", "algebraic", json!({ "scan": scan })), pts)
        }
    };
    if let Some(c) = constant_rbc {
        let reports = points
            .iter()
            .map(|p| certify::constant_rbc_check(&spec, p, c))
            .collect::<hermcurv::Result<Vec<_>>>()?;
        let consistent = reports.iter().all(|r| r.consistent);
        results["constant_rbc"] = block(
            "constant_rbc_check",
            "symmetry",
            json!({ "c": c, "consistent_everywhere": consistent, "points": reports }),
        );
    }
    Ok((Report::new("certify", global.seed, tol, inputs, results), outcome))
}

fn schwarz_cmd(
    global: &Global,
    [g_ref, h_ref, map_ref]: [&str; 3],
    [gp, hp]: [&BTreeMap<String, f64>; 2],
    args: &PointArgs,
    step: f64,
    bounds: SchwarzBounds,
    with_sup: bool,
) -> Result<(Report, Outcome)> {
    let tol = global.tolerances();
    let g = load_metric(g_ref, gp)?;
    let h = load_metric(h_ref, hp)?;
    let f = load_map(map_ref, g.dim(), h.dim())?;
    if f.domain_dim() != g.dim() || f.target_dim() != h.dim() {
        bail!(
            "map is C^{} -> C^{} but the metrics have dimensions {} and {}",
            f.domain_dim(),
            f.target_dim(),
            g.dim(),
            h.dim()
        );
    }
    let budget = global.budget();
    let points = match args.point.as_deref() {
        Some(s) => {
            if args.radius.is_some() || args.points.is_some() {
                bail!("--point cannot be combined with --radius/--points");
            }
            let p = parse_point(s)?;
            if p.len() != g.dim() {
                bail!("point has {} coordinates, expected {}", p.len(), g.dim());
            }
            vec![p]
        }
        None => {
            let region = region_of(&g, args, DEFAULT_SCHWARZ_POINTS)
                .unwrap_or_else(|| Region::random(DEFAULT_RADIUS, DEFAULT_SCHWARZ_POINTS));
            check_region(&region)?;
            region.points(g.dim(), certify::derive_seed(global.seed, 4))
        }
    };
    let bochner = points
        .iter()
        .map(|p| schwarz::bochner_residual(&g, &h, &f, p, step))
        .collect::<hermcurv::Result<Vec<_>>>()?;
    let max_bochner = bochner.iter().map(|r| r.residual).fold(0.0, f64::max);
    let kato = points
        .iter()
        .map(|p| schwarz::kato_check(&g, &h, &f, p, step))
        .collect::<hermcurv::Result<Vec<_>>>()?;
    let ineq = schwarz::schwarz_inequality_report(&g, &h, &f, &points, bounds, &budget, step)?;

    let mut outcome = Outcome {
        refuted: max_bochner > tol.finite_difference
            || ineq.min_verified_residual.is_some_and(|r| r < -tol.finite_difference)
            || ineq.min_verified_log_residual.is_some_and(|r| r < -tol.finite_difference)
            || ineq.max_rank_bound_excess.is_some_and(|e| e > tol.decomposition),
        inconclusive: ineq.verified_points < points.len(),
    };
    let mut notices = ineq.notices.clone();
    if kato.iter().any(|k| k.critical) {
        notices.push("critical points present: log branch skipped there".into());
    }
    let mut results = json!({
        "bochner": block("bochner_residual", "finite_difference", json!({
            "step": step,
            "points": bochner,
            "max_residual": max_bochner,
            "pass": max_bochner <= tol.finite_difference,
        })),
        "kato": block("kato_check", "finite_difference", json!({ "points": kato })),
        "inequality": block("schwarz_inequality_report", "finite_difference", json!({ "report": ineq })),
        "rank": ineq.rank,
        "notices": notices,
    });
    if with_sup {
        results["sup_bound"] = match schwarz::sup_bound_check(&g, &h, &f, &points, bounds) {
            Ok(r) => {
                outcome.refuted |= !r.consistent;
                block("sup_bound_check", "algebraic", json!({ "applicable": true, "report": r }))
            }
            Err(e) => block("sup_bound_check", "algebraic", json!({ "applicable": false, "reason": e.to_string() })),
        };
    }
    let inputs = json!({
        "g": metric_echo(&g),
        "h": metric_echo(&h),
        "map": f.to_file(),
        "points": points,
        "bounds": bounds,
        "step": step,
    });
    Ok((Report::new("schwarz", global.seed, tol, inputs, results), outcome))
}

fn fs_moment(global: &Global, n: usize, idx: &str) -> Result<(Report, Outcome)> {
    let idx0 = parse_indices(idx)?;
    let est = sampling::fs_moment(n, idx0, global.samples, global.seed)?;
    let outcome = Outcome {
        refuted: !est.within_gate,
        inconclusive: false,
    };
    let inputs = json!({ "n": n, "indices": idx0.map(|i| i + 1), "samples": global.samples });
    let results = json!({
        "moment": block("fs_moment", "statistical (3 sigma + 1e-4)", json!({ "estimate": est })),
    });
    Ok((Report::new("mc fs-moment", global.seed, global.tolerances(), inputs, results), outcome))
}

fn berger(
    global: &Global,
    name: &str,
    params: &MetricParams,
    point: Option<&str>,
    weights: &str,
) -> Result<(Report, Outcome)> {
    let spec = load_metric(name, &params.to_map()?)?;
    let p = point_or_origin(&spec, point)?;
    let t = curvature::unitary_tensor(&spec.jet(&p)?)?;
    let b = parse_weights(weights, spec.dim())?;
    let rep = sampling::berger_check(&t, &b, global.samples, global.seed)?;
    let a: Vec<f64> = b.iter().map(|x| x * x).collect();
    let rbc = curvature::rbc_value(&t, &FrameWeights::new(frame_of(&t), &a)?)?;
    let outcome = Outcome {
        refuted: !rep.agree,
        inconclusive: false,
    };
    let inputs = json!({
        "metric": metric_echo(&spec),
        "point": p,
        "weights": b,
        "samples": global.samples,
    });
    let results = json!({
        "berger": block("berger_check", "statistical (3 sigma + 1e-4)", json!({ "report": rep })),
        "rbc_at_squared_weights": block("rbc_value", "algebraic", json!({ "value": rbc })),
    });
    Ok((Report::new("mc berger", global.seed, global.tolerances(), inputs, results), outcome))
}

fn catalog(global: &Global, which: CatalogCommand) -> Result<(Report, Outcome)> {
    let entries = metric::catalog_entries();
    let (inputs, results) = match which {
        CatalogCommand::List => (json!({ "action": "list" }), json!({ "count": entries.len(), "entries": entries })),
        CatalogCommand::Show { name } => {
            let Some(canonical) = metric::canonical_name(&name) else {
                bail!("unknown catalog entry '{name}'");
            };
            let entry = entries.into_iter().find(|e| e.name == canonical).expect("catalog names are listed");
            let params = metric::default_params(canonical);
            let spec = metric::catalog(canonical, &params)?;
            let g0: CMat = spec.values(&vec![C64::new(0.0, 0.0); spec.dim()])?.into_matrix();
            (
                json!({ "action": "show", "name": name }),
                json!({
                    "entry": entry,
                    "default_parameters": params,
                    "dimension": spec.dim(),
                    "entries_upper": spec.upper_sources(),
                    "g_at_origin": cmat_rows(&g0),
                }),
            )
        }
    };
    Ok((Report::new("catalog", global.seed, global.tolerances(), inputs, results), Outcome::default()))
}
