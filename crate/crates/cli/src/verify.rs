//! `verify`: the acceptance suite, or the checks of one graph file.

use mgbm::graph::{EdgeKind, GraphPoint};
use mgbm::mc::{McConfig, ReportRow};
use mgbm::resolvent::{check_domain, solve_resolvent};
use mgbm::rng::derive_seed;
use mgbm::suite::{SuiteConfig, CRITERIA};

use crate::commands::{hitting_rows, judge, resolvent_row, DOMAIN_TOL};
use crate::model::{bonferroni_sigma, verdict, Model, Output};
use crate::{CliError, CliResult, VerifyArgs};

pub fn run(a: &VerifyArgs) -> CliResult {
    match &a.graph {
        None => suite(a),
        Some(_) => graph(a),
    }
}

fn suite(a: &VerifyArgs) -> CliResult {
    for id in &a.only {
        if !CRITERIA.iter().any(|(c, _)| c == id) {
            return Err(CliError::Usage(format!("unknown criterion {id}")));
        }
    }
    let cfg = SuiteConfig {
        seed: a.seed,
        workers: a.workers,
        max_paths: a.paths,
    };
    let mut out = Output::create(&a.out.out)?;
    let mut rows = Vec::new();
    let mut pass = true;
    for (id, criterion) in CRITERIA {
        if !a.only.is_empty() && !a.only.iter().any(|o| o == id) {
            continue;
        }
        let outcome = criterion(&cfg);
        out.say(outcome.line());
        pass &= outcome.pass;
        rows.extend(outcome.rows);
    }
    out.report(&rows)?;
    out.say(format!("status: {}", if pass { "pass" } else { "fail" }));
    out.finish("verify")?;
    verdict(pass, "acceptance suite")
}

/// Domain residuals, hitting transforms from every edge, and resolvent
/// values at every vertex.
fn graph(a: &VerifyArgs) -> CliResult {
    let path = a.graph.as_ref().expect("graph mode");
    let model = Model::open(path)?;
    let f = model.function(&a.f)?;
    let g = &model.graph;
    let horizon = a.horizon.unwrap_or_else(|| 20.0 / a.lambda.iter().copied().fold(f64::INFINITY, f64::min));
    let mut tag = 0;
    let mut cfg = |n: u64| {
        tag += 1;
        McConfig::new(n, horizon, a.step, derive_seed(a.seed, tag)).with_workers(a.workers)
    };
    let n_hit = a.paths.unwrap_or(100_000);
    let n_res = a.resolvent_paths;

    let mut exact = Vec::new();
    let mut raw_hit = Vec::new();
    let mut raw_res = Vec::new();
    for &lambda in &a.lambda {
        let sol = solve_resolvent(g, &model.data, &f, lambda).map_err(|e| CliError::Check(e.to_string()))?;
        let residual = check_domain(&sol, &model.data, &f, lambda).max_residual();
        exact.push(ReportRow {
            experiment_id: "domain".into(),
            quantity: format!("vertex-condition residual lambda={lambda}"),
            reference: 0.0,
            mean: residual,
            stderr: 0.0,
            z: 0.0,
            n_paths: 0,
            h: 0.0,
            seed: 0,
            pass: residual <= DOMAIN_TOL,
        });

        let floor = (-lambda * horizon).exp();
        for e in g.edge_ids() {
            let x = match g.edge(e).kind {
                EdgeKind::Internal { length, .. } => length / 2.0,
                EdgeKind::External { .. } => 1.0,
            };
            let start = g.point(e, x).map_err(|e| CliError::Check(e.to_string()))?;
            for (q, r, est) in hitting_rows(&model, &start, lambda, &cfg(n_hit))? {
                raw_hit.push((q, r, est, floor));
            }
        }
        for v in g.vertices() {
            raw_res.push(resolvent_row(&model, &f, &GraphPoint::Vertex(v), lambda, &cfg(n_res))?);
        }
    }

    let sigma = bonferroni_sigma(raw_hit.len() + raw_res.len());
    let mut rows = exact;
    rows.extend(judge("hitting", &raw_hit, sigma));
    rows.extend(judge("resolvent", &raw_res, sigma));

    let mut out = Output::create(&a.out.out)?;
    out.report(&rows)?;
    out.say(format!("graph: {}", g.name()));
    out.say(format!("threshold: {sigma:.3} stderr ({} Monte Carlo rows)", raw_hit.len() + raw_res.len()));
    for r in &rows {
        out.say(format!(
            "{} {} {}: mean {:.6} ref {:.6} stderr {:.2e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.experiment_id,
            r.quantity,
            r.mean,
            r.reference,
            r.stderr
        ));
    }
    let pass = rows.iter().all(|r| r.pass);
    out.say(format!("status: {}", if pass { "pass" } else { "fail" }));
    out.finish("verify")?;
    verdict(pass, "graph verification")
}
