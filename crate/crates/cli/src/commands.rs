use serde_json::{json, Value};
use tgeom::euclideanity::{check_conditions, BasisFrame, ConditionSuite, RootSearch, SubsetSampling};
use tgeom::riemannian::{
    covector_angle, densify, geodesic_bvp, geodesic_polyline, parallel_transport, BvpOptions, MetricField,
};
use tgeom::sigma::{collinearity_residual, is_collinear, is_parallel, scalar_product, squared_norm, PointPairVector};
use tgeom::tube::{
    compare_definitions, sample_tube, tube_cross_section_thickness, write_projections_csv, write_samples_csv,
    CompareOptions, TubeSpec, TubeSummary,
};
use tgeom::{Error, Kind, Point, Region, WorldFunction};

use crate::config::{Edges, RunConfig, TransportBlock, VectorPair};
use crate::report::{config, eval, to_value, Attachment, Failure, Outcome};

fn block<'a, T>(b: &'a Option<T>, name: &str) -> Result<&'a T, Failure> {
    b.as_ref()
        .ok_or_else(|| Failure::Config(format!("missing [{name}] block")))
}

fn check_dim(p: &Point, dim: usize, name: &str) -> Result<(), Failure> {
    if p.dim() != dim {
        return Err(Failure::Config(format!(
            "{name} has {} coordinates but the geometry has dimension {dim}",
            p.dim()
        )));
    }
    Ok(())
}

fn check_region(region: &Region, dim: usize) -> Result<(), Failure> {
    config(region.validate())?;
    if region.dim() != dim {
        return Err(Failure::Config(format!(
            "region has dimension {} but the geometry has dimension {dim}",
            region.dim()
        )));
    }
    Ok(())
}

fn world(cfg: &RunConfig, bvp: Option<BvpOptions>) -> Result<WorldFunction, Failure> {
    match (cfg.geometry.kind, bvp) {
        (Kind::NumericRiemannian, Some(bvp)) => {
            config(bvp.validate())?;
            Ok(WorldFunction::from_metric_with(
                config(cfg.geometry.metric_field())?,
                bvp,
            ))
        }
        _ => config(cfg.geometry.build()),
    }
}

fn vector(pair: &VectorPair, dim: usize, name: &str) -> Result<PointPairVector, Failure> {
    check_dim(&pair[0], dim, name)?;
    check_dim(&pair[1], dim, name)?;
    config(PointPairVector::new(pair[0].clone(), pair[1].clone()))
}

pub fn sigma(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let b = block(&cfg.sigma, "sigma")?;
    let w = world(cfg, Some(b.bvp))?;
    check_dim(&b.p, w.dim(), "p")?;
    check_dim(&b.q, w.dim(), "q")?;
    let value = eval(w.evaluate(&b.p, &b.q))?;
    let mut out = Outcome::new(json!({ "sigma": value }));
    if let Some(metric) = w.metric_field() {
        let sol = eval(geodesic_bvp(metric, &b.p, &b.q, &b.bvp))?;
        out.result["bvp"] = json!({
            "converged": sol.converged,
            "residual": sol.residual,
            "length": sol.length,
            "sign": sol.sign,
            "nodes": sol.path.len(),
        });
        let mut csv = Vec::new();
        sol.write_csv(&mut csv)
            .map_err(|e| Failure::Evaluation(e.to_string()))?;
        out.attachments.push(Attachment {
            name: "geodesic.csv",
            bytes: csv,
        });
    }
    Ok(out)
}

pub fn parallel(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let b = block(&cfg.parallel, "parallel")?;
    let w = world(cfg, None)?;
    let a = vector(&b.a, w.dim(), "a")?;
    let c = vector(&b.b, w.dim(), "b")?;
    let parallel = match is_parallel(&w, &a, &c, b.tol) {
        Ok(v) => json!(v),
        Err(e @ Error::IndefiniteNorm { .. }) => json!({ "error": e.to_string() }),
        Err(e) => return Err(Failure::Evaluation(e.to_string())),
    };
    Ok(Outcome::new(json!({
        "scalar_product": eval(scalar_product(&w, &a, &c))?,
        "squared_norms": [eval(squared_norm(&w, &a))?, eval(squared_norm(&w, &c))?],
        "parallel": parallel,
        "collinear": eval(is_collinear(&w, &a, &c, b.tol))?,
        "residual": eval(collinearity_residual(&w, &a, &c))?,
    })))
}

pub fn tube(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let b = block(&cfg.tube, "tube")?;
    let w = world(cfg, None)?;
    let dim = w.dim();
    check_dim(&b.p0, dim, "p0")?;
    check_dim(&b.p1, dim, "p1")?;
    if let Some(q0) = &b.q0 {
        check_dim(q0, dim, "q0")?;
    }
    for p in &b.aux {
        check_dim(p, dim, "aux")?;
    }
    check_region(&b.region, dim)?;
    let opts = b.sampling.options(cfg.seed);
    config(opts.validate())?;
    let spec = config(TubeSpec::new(
        b.kind,
        w,
        b.p0.clone(),
        b.p1.clone(),
        b.q0.clone(),
        b.aux.clone(),
    ))?;
    let set = eval(sample_tube(&spec, &b.region, &opts))?;
    let mut result = to_value(&TubeSummary::from(&set));
    if let Some(t) = &b.thickness {
        let mut rows = Vec::new();
        for s in &t.stations {
            check_dim(s, dim, "station")?;
            let value = eval(tube_cross_section_thickness(&spec, s, &t.options()))?;
            rows.push(json!({ "station": s, "thickness": value }));
        }
        result["thickness"] = Value::Array(rows);
    }
    let mut samples = Vec::new();
    eval(write_samples_csv(&set, &mut samples))?;
    let mut projections = Vec::new();
    eval(write_projections_csv(&set, &mut projections))?;
    let mut out = Outcome::new(result);
    out.csv = Some(samples.clone());
    out.attachments.push(Attachment {
        name: "samples.csv",
        bytes: samples,
    });
    out.attachments.push(Attachment {
        name: "projections.csv",
        bytes: projections,
    });
    Ok(out)
}

pub fn conditions(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let b = block(&cfg.conditions, "conditions")?;
    let w = world(cfg, None)?;
    let dim = w.dim();
    let n = b.n.unwrap_or(dim);
    check_region(&b.region, dim)?;
    let cloud: Vec<Point> = match &b.cloud {
        Some(c) => c.clone(),
        None => (0..b.cloud_size as u32)
            .map(|i| b.region.sobol_point(i, cfg.seed))
            .collect(),
    };
    for p in &cloud {
        check_dim(p, dim, "cloud point")?;
    }
    if n == 0 || cloud.len() < n + 2 {
        return Err(Failure::Config(format!(
            "need at least {} cloud points for n = {n}, got {}",
            n + 2,
            cloud.len()
        )));
    }
    let (p0, heads) = match &b.frame {
        Some(f) => {
            check_dim(&f.p0, dim, "frame p0")?;
            for h in &f.heads {
                check_dim(h, dim, "frame head")?;
            }
            (f.p0.clone(), f.heads.clone())
        }
        None => (cloud[0].clone(), cloud[1..=n].to_vec()),
    };
    let frame = eval(BasisFrame::new(&w, p0, heads))?;
    let suite = ConditionSuite {
        sampling: SubsetSampling {
            trials: b.trials,
            tol: b.det_tol,
            seed: cfg.seed,
        },
        reconstruction_tol: b.reconstruction_tol,
        search: RootSearch {
            starts: b.starts,
            tol: b.root_tol,
            seed: cfg.seed,
            ..RootSearch::default()
        },
        targets: b.targets,
    };
    let reports = eval(check_conditions(&w, n, &cloud, &frame, &b.region, &suite))?;
    Ok(Outcome::new(json!({
        "n": n,
        "cloud_size": cloud.len(),
        "passed": reports.iter().all(|r| r.passed),
        "reports": to_value(&reports),
    })))
}

/// Dense chart polyline for a route.
fn route(metric: &MetricField, b: &TransportBlock, corners: &[Point]) -> Result<Vec<Point>, Failure> {
    let path = match b.edges {
        Edges::Chart => corners.to_vec(),
        Edges::Geodesic => {
            config(b.bvp.validate())?;
            eval(geodesic_polyline(metric, corners, &b.bvp))?
        }
    };
    Ok(densify(&path, b.per_edge))
}

fn same_point(metric: &MetricField, a: &Point, b: &Point) -> bool {
    metric
        .reduced_difference(a.coords(), b.coords())
        .iter()
        .all(|d| d.abs() <= 1e-6)
}

pub fn transport(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let b = block(&cfg.transport, "transport")?;
    let metric = config(cfg.geometry.metric_field())?;
    let dim = metric.dim();
    if b.u0.len() != dim {
        return Err(Failure::Config(format!(
            "u0 has {} components, metric has dimension {dim}",
            b.u0.len()
        )));
    }
    if b.path.len() < 2 || b.per_edge == 0 || b.steps == 0 {
        return Err(Failure::Config(
            "path needs two corners; per_edge and steps must be positive".into(),
        ));
    }
    for p in &b.path {
        check_dim(p, dim, "path corner")?;
    }
    let start = &b.path[0];
    let end = &b.path[b.path.len() - 1];
    let first = eval(parallel_transport(
        &metric,
        &b.u0,
        &route(&metric, b, &b.path)?,
        b.steps,
    ))?;
    let mut result = json!({
        "components": first.components,
        "norm_drift": first.norm_drift,
        "endpoint": end,
    });
    if same_point(&metric, start, end) {
        result["rotation"] = json!(eval(covector_angle(&metric, start, &b.u0, &first.components))?);
    }
    if let Some(alt) = &b.alternate {
        for p in alt {
            check_dim(p, dim, "alternate corner")?;
        }
        let shares = |p: Option<&Point>, q: &Point| p.is_some_and(|p| same_point(&metric, p, q));
        if alt.len() < 2 || !shares(alt.first(), start) || !shares(alt.last(), end) {
            return Err(Failure::Config(
                "alternate route must share the path's endpoints".into(),
            ));
        }
        let second = eval(parallel_transport(&metric, &b.u0, &route(&metric, b, alt)?, b.steps))?;
        result["alternate"] = json!({
            "components": second.components,
            "norm_drift": second.norm_drift,
        });
        result["angle_between_routes"] = json!(eval(covector_angle(
            &metric,
            end,
            &first.components,
            &second.components
        ))?);
    }
    if let Some(c) = &b.collinear {
        let w = world(cfg, None)?;
        let a = vector(&c.a, w.dim(), "collinear.a")?;
        let v = vector(&c.b, w.dim(), "collinear.b")?;
        result["collinear"] = json!({
            "verdict": eval(is_collinear(&w, &a, &v, c.tol))?,
            "residual": eval(collinearity_residual(&w, &a, &v))?,
        });
    }
    Ok(Outcome::new(result))
}

pub fn compare(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let b = block(&cfg.compare, "compare")?;
    let w = world(cfg, None)?;
    let dim = w.dim();
    check_dim(&b.p0, dim, "p0")?;
    check_dim(&b.p1, dim, "p1")?;
    for p in &b.aux {
        check_dim(p, dim, "aux")?;
    }
    check_region(&b.region, dim)?;
    let opts = CompareOptions {
        sampling: b.sampling.options(cfg.seed),
        threshold: b.threshold,
    };
    config(opts.sampling.validate())?;
    let c = eval(compare_definitions(&w, &b.p0, &b.p1, &b.aux, &b.region, &opts))?;
    Ok(Outcome::new(to_value(&c)))
}
