//! One function per subcommand; each returns its artifacts without touching
//! the file system.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use finitegap::bandset::{rational_harmonic_period, solve_equilibrium, solve_equilibrium_with, EquilibriumOptions};
use finitegap::isotorus::{dist_to_torus, minimal_herglotz, reflectionless_residual, torus_jacobi};
use finitegap::jacobi::oprl_eval_scaled;
use finitegap::sumrules::{apply_perturbation, run_experiments, ExperimentReport, Num};

use crate::config::*;
use crate::output::{slug, Artifact, Cell, Meta};
use crate::CliError;

/// What a command produced.
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// A proven inequality was contradicted; the artifacts are still written.
    pub violation: bool,
    pub summary: Vec<String>,
}

impl Outcome {
    fn new(artifacts: Vec<Artifact>) -> Self {
        Self { artifacts, violation: false, summary: Vec::new() }
    }
}

/// Largest period checked for rational harmonic measures.
const MAX_PERIOD: usize = 64;
const PERIOD_TOL: f64 = 1e-9;
/// Interior points per band for the reflectionless residual.
const RESIDUAL_POINTS: usize = 200;

pub fn eqm(raw: &RawConfig, o: &Overrides, meta: &Meta) -> Result<Outcome, CliError> {
    let cfg: EqmConfig = raw.parse()?;
    cfg.validate()?;
    let mut opts = EquilibriumOptions::default();
    if let Some(n) = o.nodes {
        opts.nodes = n;
        opts.max_nodes = opts.max_nodes.max(n);
    }
    if let Some(t) = o.tol {
        opts.rel_tol = t;
    }
    let eq = solve_equilibrium_with(&cfg.bands, &opts)?;
    let e = eq.set();
    let [lo, hi] = e.hull();
    let margin = 0.25 * (hi - lo);
    let mut rows = Vec::with_capacity(cfg.grid_points);
    for k in 0..cfg.grid_points {
        let x = (lo - margin) + (hi - lo + 2.0 * margin) * k as f64 / (cfg.grid_points - 1) as f64;
        let w = match eq.density(x) {
            Ok(w) => w,
            Err(_) if e.contains(x) => f64::INFINITY,
            Err(_) => 0.0,
        };
        let z = Complex64::new(x, 0.0);
        rows.push(vec![x.into(), w.into(), eq.potential(z).into(), eq.green(z).into()]);
    }
    let mut body = serde_json::to_value(&eq).map_err(|e| CliError::BadInput(e.to_string()))?;
    body["robin_spread"] = json!(eq.robin_spread());
    let mut out = Outcome::new(vec![
        Artifact::json("eqm.json", meta, body)?,
        Artifact::csv("eqm.csv", meta, &["x", "density", "potential", "green"], rows)?,
    ]);
    out.summary.push(format!("capacity {:.12}, harmonic measures {:?}", eq.capacity(), eq.harmonic_measures()));
    Ok(out)
}

pub fn torus(raw: &RawConfig, _o: &Overrides, meta: &Meta) -> Result<Outcome, CliError> {
    let cfg: TorusConfig = raw.parse()?;
    let (e, dd) = cfg.resolve()?;
    let eq = solve_equilibrium(&e)?;
    let mh = minimal_herglotz(&e, &dd)?;
    let residual = reflectionless_residual(&mh, RESIDUAL_POINTS)?;
    let tp = torus_jacobi(&e, &dd, cfg.n)?;
    let (a, b) = tp.params.coefficients(cfg.n)?;
    let rows = (0..cfg.n).map(|k| vec![(k + 1).into(), a[k].into(), b[k].into()]).collect();
    let period = rational_harmonic_period(eq.harmonic_measures(), PERIOD_TOL, MAX_PERIOD);
    let body = json!({
        "bands": e,
        "dirichlet": dd,
        "n": cfg.n,
        "capacity": eq.capacity(),
        "harmonic_measures": eq.harmonic_measures(),
        "period": period,
        "reflectionless_residual": residual,
        "point_masses": mh.point_masses().iter().map(|p| json!({"position": p.position, "weight": p.weight})).collect::<Vec<_>>(),
    });
    let mut out = Outcome::new(vec![
        Artifact::json("torus.json", meta, body)?,
        Artifact::csv("torus.csv", meta, &["n", "a", "b"], rows)?,
    ]);
    out.summary.push(format!("{} coefficients, period {period:?}, residual {residual:.2e}", cfg.n));
    Ok(out)
}

pub fn oprl(raw: &RawConfig, o: &Overrides, meta: &Meta) -> Result<Outcome, CliError> {
    let mut cfg: OprlConfig = raw.parse()?;
    cfg.validate()?;
    if let Some(p) = &mut cfg.perturbation {
        o.reseed(p);
    }
    let e = resolve_set(&cfg.bands, &cfg.set_file, Some(free_set()))?;
    let base = cfg.base.build(&e, cfg.n)?;
    let j = match &cfg.perturbation {
        Some(p) => apply_perturbation(&base, p, cfg.n)?.params,
        None => base,
    };
    let (a, b) = j.coefficients(cfg.n)?;
    let coeff_rows = (0..cfg.n).map(|k| vec![(k + 1).into(), a[k].into(), b[k].into()]).collect();
    let mut rows = Vec::new();
    for p in &cfg.points {
        let z = Complex64::new(p[0], p[1]);
        let values = oprl_eval_scaled(&j, cfg.n, z)?;
        for (n, v) in values.iter().enumerate() {
            let l = v.ln();
            rows.push(vec![p[0].into(), p[1].into(), n.into(), l.re.into(), l.im.into()]);
        }
    }
    let body = json!({ "bands": e, "n": cfg.n, "points": cfg.points, "perturbation": cfg.perturbation });
    let mut out = Outcome::new(vec![
        Artifact::json("oprl.json", meta, body)?,
        Artifact::csv("oprl.csv", meta, &["re_z", "im_z", "n", "log_abs_p", "arg_p"], rows)?,
        Artifact::csv("oprl_coefficients.csv", meta, &["n", "a", "b"], coeff_rows)?,
    ]);
    out.summary.push(format!("p_0..p_{} at {} points", cfg.n, cfg.points.len()));
    Ok(out)
}

pub fn perturb(raw: &RawConfig, o: &Overrides, meta: &Meta) -> Result<Outcome, CliError> {
    let mut cfg: PerturbConfig = raw.parse()?;
    cfg.validate()?;
    o.reseed(&mut cfg.perturbation);
    let e = resolve_set(&cfg.bands, &cfg.set_file, Some(free_set()))?;
    let base = cfg.base.build(&e, cfg.size)?;
    let p = apply_perturbation(&base, &cfg.perturbation, cfg.size)?;
    let (a, b) = p.params.coefficients(cfg.size)?;
    let rows = (0..cfg.size)
        .map(|k| vec![(k + 1).into(), a[k].into(), b[k].into(), p.delta_a[k].into(), p.delta_b[k].into()])
        .collect();
    let body = json!({
        "bands": e,
        "base": cfg.base,
        "perturbation": p.spec,
        "size": p.size,
        "l1_head": p.l1_head,
        "l1_tail": p.l1_tail,
    });
    let mut out = Outcome::new(vec![
        Artifact::json("perturb.json", meta, body)?,
        Artifact::csv("perturb.csv", meta, &["n", "a", "b", "delta_a", "delta_b"], rows)?,
    ]);
    out.summary.push(format!("{} perturbed coefficients, head l1 norm {:.6e}", p.size, p.l1_head));
    Ok(out)
}

pub fn sumrule(raw: &RawConfig, o: &Overrides, meta: &Meta) -> Result<Outcome, CliError> {
    let list = raw.parse::<SumruleConfig>()?.into_list(o)?;
    let reports: Vec<ExperimentReport> =
        run_experiments(&list).into_iter().collect::<Result<_, _>>().map_err(CliError::from)?;
    let mut artifacts = vec![Artifact::json("sumrule.json", meta, json!({ "reports": reports }))?];
    let mut out_summary = Vec::new();
    let mut violation = false;
    for r in &reports {
        violation |= r.hard_violation;
        for t in &r.tables {
            let header: Vec<&str> = t.columns.iter().map(String::as_str).collect();
            let rows = t.rows.iter().map(|row| row.iter().map(|x: &Num| Cell::Num(x.0)).collect()).collect();
            artifacts.push(Artifact::csv(
                &format!("sumrule_{}_{}.csv", slug(&r.name), slug(&t.name)),
                meta,
                &header,
                rows,
            )?);
        }
        let verdicts: Vec<String> = r.verdicts.iter().map(|v| format!("{} {:?}", v.name, v.status)).collect();
        out_summary.push(format!(
            "{}: {}{}",
            r.name,
            verdicts.join(", "),
            if r.hard_violation { " [hard violation]" } else { "" }
        ));
    }
    Ok(Outcome { artifacts, violation, summary: out_summary })
}

pub fn distance(raw: &RawConfig, o: &Overrides, meta: &Meta) -> Result<Outcome, CliError> {
    let mut cfg: DistanceConfig = raw.parse()?;
    if let Some(t) = o.tol {
        cfg.grid.refine_tol = t;
    }
    if let Some(p) = &mut cfg.perturbation {
        o.reseed(p);
    }
    let (e, base, ms) = cfg.resolve()?;
    let size = ms.iter().max().copied().unwrap_or(1) + 64;
    let reference = base.build(&e, size)?;
    let j = match &cfg.perturbation {
        Some(p) => apply_perturbation(&reference, p, size)?.params,
        None => reference,
    };
    let mut results = Vec::new();
    let mut rows = Vec::new();
    for &m in &ms {
        let r = dist_to_torus(&j, &e, m, &cfg.grid)?;
        rows.push(vec![m.into(), r.value.into(), r.grid_best.into(), r.k_max.into(), r.evaluations.into()]);
        results.push(json!({ "m": m, "result": r }));
    }
    let body =
        json!({ "bands": e, "base": base, "perturbation": cfg.perturbation, "grid": cfg.grid, "results": results });
    let mut out = Outcome::new(vec![
        Artifact::json("distance.json", meta, body)?,
        Artifact::csv("distance.csv", meta, &["m", "d_m", "grid_best", "k_max", "evaluations"], rows)?,
    ]);
    for r in &results {
        out.summary.push(format!("d_{} = {:.6e}", r["m"], r["result"]["value"].as_f64().unwrap_or(f64::NAN)));
    }
    Ok(out)
}

/// Output files of this tool found in `dir` (report outputs excluded),
/// sorted by name.
fn scan(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Missing(format!("directory {} does not exist", dir.display())));
    }
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::BadInput(format!("cannot list {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.file_name().is_some_and(|n| n != "report.json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Inputs of `report` and the hash over their names and contents.
pub fn report_inputs(raw: Option<&RawConfig>, dir: &Path) -> Result<(Vec<PathBuf>, Value), CliError> {
    let cfg: ReportConfig = match raw {
        Some(r) => r.parse()?,
        None => ReportConfig::default(),
    };
    let files = match cfg.inputs {
        Some(list) => list,
        None => scan(dir)?,
    };
    let mut listing = Vec::new();
    for f in &files {
        if !f.exists() {
            return Err(CliError::Missing(format!("upstream file {} does not exist", f.display())));
        }
        let bytes = fs::read(f).map_err(|e| CliError::BadInput(format!("cannot read {}: {e}", f.display())))?;
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        listing.push(json!({ "file": name, "sha256": hex::encode(Sha256::digest(&bytes)) }));
    }
    Ok((files, Value::Array(listing)))
}

pub fn report(files: &[PathBuf], meta: &Meta) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut violation = false;
    for f in files {
        let doc = upstream(f)?;
        let file = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let command = doc["meta"]["command"].as_str().unwrap_or("unknown").to_string();
        let Some(reports) = doc["reports"].as_array() else { continue };
        for r in reports {
            let name = r["name"].as_str().unwrap_or("").to_string();
            let hard = r["hard_violation"].as_bool().unwrap_or(false);
            violation |= hard;
            for v in r["verdicts"].as_array().into_iter().flatten() {
                let verdict = v["name"].as_str().unwrap_or("").to_string();
                let status = v["status"].as_str().unwrap_or("").to_string();
                let reason = v["reason"].as_str().unwrap_or("").to_string();
                rows.push(vec![
                    Cell::from(file.as_str()),
                    Cell::from(name.as_str()),
                    Cell::from(verdict.as_str()),
                    Cell::from(status.as_str()),
                    Cell::from(if hard { "yes" } else { "no" }),
                    Cell::from(reason.as_str()),
                ]);
                entries.push(json!({
                    "file": file, "command": command, "experiment": name, "verdict": verdict,
                    "status": status, "hard_violation": hard, "reason": reason,
                }));
            }
        }
    }
    let body = json!({ "files_scanned": files.len(), "hard_violation": violation, "entries": entries });
    let mut out = Outcome::new(vec![
        Artifact::json("report.json", meta, body)?,
        Artifact::csv(
            "report.csv",
            meta,
            &["file", "experiment", "verdict", "status", "hard_violation", "reason"],
            rows,
        )?,
    ]);
    out.violation = violation;
    out.summary.push(format!("{} verdicts from {} files", entries.len(), files.len()));
    Ok(out)
}
