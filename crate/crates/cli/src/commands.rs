use std::path::Path;

use mgbm::graph::{GraphPoint, VertexId};
use mgbm::mc::{ck_test, compare, estimate_hitting_lt, estimate_resolvent as mc_resolvent, sum_disjoint, McConfig, ReportRow};
use mgbm::paste::{check_crossover, sample_path, write_crossovers_csv, write_paths_csv, CrossoverDiagnostics};
use mgbm::resolvent::{check_domain, hitting_lt as oracle_hitting, solve_resolvent, BuiltinFunction, ExpandedFunction};
use mgbm::rng::derive_seed;
use mgbm::wentzell::VertexRegime;

use crate::model::{bonferroni_sigma, load, num, sup_norm, verdict, Model, Output};
use crate::{ChainArgs, CliError, CliResult, EstimateArgs, McArgs, ResolventArgs, SimulateArgs};

/// Largest vertex-condition residual accepted from the solver.
pub const DOMAIN_TOL: f64 = 1e-8;

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

fn check(e: impl std::fmt::Display) -> CliError {
    CliError::Check(e.to_string())
}

pub fn validate(path: &Path) -> CliResult {
    let (g, d) = load(path)?;
    println!("graph: {}", g.name());
    println!("vertices: {}", g.vertex_count());
    let tadpoles = g.edge_ids().filter(|&e| g.edge(e).is_tadpole()).count();
    println!(
        "edges: {} internal, {} external, {} tadpole",
        g.internal_edges().count() - tadpoles,
        g.external_edges().count(),
        tadpoles
    );
    for v in g.vertices() {
        let regime = match d.classify(v) {
            VertexRegime::Trap => "trap".to_string(),
            VertexRegime::HoldKill { rate } => format!("hold-kill rate={rate}"),
            VertexRegime::Sticky(p) => format!("sticky delay={} kill_rate={}", p.delay, p.kill_rate),
        };
        println!(
            "vertex {}: a={} B={} c={} {regime}",
            g.vertex_name(v),
            d.a(v),
            d.total_b(v),
            d.c(v)
        );
    }
    let model = Model::open(path)?;
    let vc: Vec<&str> = model
        .spec
        .connected
        .iter()
        .map(|&v| model.expansion.graph.vertex_name(v))
        .collect();
    println!("connected: {}", vc.join(" "));
    println!("status: ok");
    Ok(())
}

pub fn resolvent(a: &ResolventArgs) -> CliResult {
    let model = Model::open(&a.graph)?;
    let f = model.function(&a.f)?;
    let g = &model.graph;
    let mut out = Output::create(&a.out.out)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lambda", "edge_id", "x", "u"]).map_err(io)?;
    let mut pass = true;
    for &lambda in &a.lambda {
        let sol = solve_resolvent(g, &model.data, &f, lambda).map_err(check)?;
        let residual = check_domain(&sol, &model.data, &f, lambda).max_residual();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for e in g.edge_ids() {
            for (x, u) in sol.sample_edge(e, a.samples.max(2), a.reach) {
                lo = lo.min(u);
                hi = hi.max(u);
                w.write_record([num(lambda), g.edge_name(e).to_string(), num(x), num(u)])
                    .map_err(io)?;
            }
        }
        let ok = residual <= DOMAIN_TOL;
        pass &= ok;
        out.say(format!(
            "lambda {lambda}: condition {:.3e} domain_residual {residual:.3e} u_min {lo:.10} u_max {hi:.10} {}",
            sol.condition,
            if ok { "ok" } else { "FAIL" }
        ));
    }
    out.write("resolvent.csv", &w.into_inner().map_err(io)?)?;
    out.finish("resolvent")?;
    verdict(pass, "domain check")
}

pub fn simulate(a: &SimulateArgs) -> CliResult {
    let model = Model::open(&a.graph)?;
    let start = match &a.start {
        Some(s) => model.point(s)?,
        None => GraphPoint::Vertex(VertexId(0)),
    };
    let start = model.sim_point(&start);
    let spec = &model.spec;
    let records: Vec<_> = (0..a.paths)
        .map(|k| sample_path(spec, &start, a.horizon, a.step, a.seed, k))
        .collect();
    let mut diag = CrossoverDiagnostics::default();
    for r in &records {
        diag.add(&check_crossover(&spec.graph, &spec.connected, r));
    }
    let mut out = Output::create(&a.out.out)?;
    let mut buf = Vec::new();
    write_paths_csv(&spec.graph, &records, &mut buf).map_err(io)?;
    out.write("paths.csv", &buf)?;
    buf.clear();
    write_crossovers_csv(&spec.graph, &records, &mut buf).map_err(io)?;
    out.write("crossovers.csv", &buf)?;

    let died = records.iter().filter(|r| r.zeta.is_some()).count();
    let crossings: usize = records.iter().map(|r| r.crossovers.times.len()).sum();
    if model.expansion.tadpole_count() > 0 {
        out.say("coordinates: tadpole-expanded graph");
    }
    out.say(format!("paths: {} died: {died} crossovers: {crossings}", records.len()));
    out.say(format!(
        "violations: not_increasing {} position_mismatch {} hitting {} bad_target {} not_absorbed {}",
        diag.not_increasing, diag.position_mismatch, diag.hitting, diag.bad_target, diag.not_absorbed
    ));
    out.finish("simulate")?;
    verdict(diag.total() == 0, "crossover check")
}

fn mc_config(mc: &McArgs, lambdas: &[f64], tag: u64) -> McConfig {
    McConfig::new(mc.paths, mc.horizon_for(lambdas), mc.step, derive_seed(mc.seed, tag)).with_workers(mc.workers)
}

/// Hitting-transform rows from one start point; `sigma` is applied later.
pub fn hitting_rows(
    model: &Model,
    start: &GraphPoint,
    lambda: f64,
    cfg: &McConfig,
) -> Result<Vec<(String, f64, mgbm::mc::Estimate)>, CliError> {
    let g = &model.graph;
    let oracle = oracle_hitting(g, start, lambda);
    let targets: Vec<VertexId> = oracle.iter().map(|(v, _)| model.sim_vertex(*v)).collect();
    let ests = estimate_hitting_lt(&model.spec, &model.sim_point(start), lambda, &targets, cfg).map_err(check)?;
    let from = g.describe_point(start);
    let mut rows: Vec<_> = oracle
        .iter()
        .zip(&ests)
        .map(|((v, r), (_, est))| {
            (format!("E[exp(-lambda H); first hit {}] lambda={lambda} from {from}", g.vertex_name(*v)), *r, *est)
        })
        .collect();
    if ests.len() == 2 {
        let total = sum_disjoint(&ests[0].1, &ests[1].1);
        let reference = oracle[0].1 + oracle[1].1;
        rows.push((format!("E[exp(-lambda H)] lambda={lambda} from {from}"), reference, total));
    }
    Ok(rows)
}

/// Turns `(quantity, reference, estimate)` rows into report rows with a
/// common Bonferroni threshold; `floor` covers the horizon cut.
pub fn judge(
    id: &str,
    raw: &[(String, f64, mgbm::mc::Estimate, f64)],
    sigma: f64,
) -> Vec<ReportRow> {
    raw.iter()
        .map(|(q, r, est, floor)| compare(id, q, *r, est, sigma, *floor))
        .collect()
}

pub fn hitting_lt(a: &EstimateArgs) -> CliResult {
    let model = Model::open(&a.graph)?;
    let start = model.point(&a.start)?;
    if matches!(start, GraphPoint::Vertex(_)) {
        return Err(CliError::Usage("--start must be an edge point edge@x".into()));
    }
    let mut raw = Vec::new();
    for (k, &lambda) in a.lambda.iter().enumerate() {
        let cfg = mc_config(&a.mc, &a.lambda, k as u64);
        let floor = (-lambda * cfg.horizon).exp();
        for (q, r, est) in hitting_rows(&model, &start, lambda, &cfg)? {
            raw.push((q, r, est, floor));
        }
    }
    let sigma = bonferroni_sigma(raw.len());
    let rows = judge("hitting-lt", &raw, sigma);
    finish_rows(&a.out.out, "hitting-lt", &rows, sigma)
}

/// Resolvent rows at one point: oracle against Monte Carlo.
pub fn resolvent_row(
    model: &Model,
    f: &BuiltinFunction,
    start: &GraphPoint,
    lambda: f64,
    cfg: &McConfig,
) -> Result<(String, f64, mgbm::mc::Estimate, f64), CliError> {
    let sol = solve_resolvent(&model.graph, &model.data, f, lambda).map_err(check)?;
    let reference = sol.value(start);
    let ef = ExpandedFunction {
        expansion: &model.expansion,
        f,
    };
    let est = mc_resolvent(&model.spec, &model.sim_point(start), &ef, lambda, cfg).map_err(check)?;
    // the horizon cut is at most e^{−λT} sup|f| / λ
    let floor = (-lambda * cfg.horizon).exp() * sup_norm(f) / lambda + 1e-9 * reference.abs();
    let q = format!("R_lambda f lambda={lambda} at {}", model.graph.describe_point(start));
    Ok((q, reference, est, floor))
}

pub fn estimate_resolvent(a: &EstimateArgs) -> CliResult {
    let model = Model::open(&a.graph)?;
    let start = model.point(&a.start)?;
    let f = model.function(&a.f)?;
    let mut raw = Vec::new();
    for (k, &lambda) in a.lambda.iter().enumerate() {
        let cfg = mc_config(&a.mc, &a.lambda, k as u64);
        raw.push(resolvent_row(&model, &f, &start, lambda, &cfg)?);
    }
    let sigma = bonferroni_sigma(raw.len());
    let rows = judge("estimate-resolvent", &raw, sigma);
    finish_rows(&a.out.out, "estimate-resolvent", &rows, sigma)
}

/// Writes `report.csv` and the summary, then returns the verdict.
pub fn finish_rows(dir: &Path, command: &str, rows: &[ReportRow], sigma: f64) -> CliResult {
    let mut out = Output::create(dir)?;
    out.report(rows)?;
    out.say(format!("threshold: {sigma:.3} stderr ({} rows)", rows.len()));
    for r in rows {
        out.say(format!(
            "{} {}: mean {:.6} ref {:.6} stderr {:.2e} z {:.2}",
            if r.pass { "PASS" } else { "FAIL" },
            r.quantity,
            r.mean,
            r.reference,
            r.stderr,
            r.z
        ));
    }
    let pass = rows.iter().all(|r| r.pass);
    out.say(format!("status: {}", if pass { "pass" } else { "fail" }));
    out.finish(command)?;
    verdict(pass, command)
}

pub fn chain_test(a: &ChainArgs) -> CliResult {
    let model = Model::open(&a.graph)?;
    let spec = &model.spec;
    let v = match &a.start {
        Some(name) => model
            .expansion
            .graph
            .vertex_id(name)
            .ok_or_else(|| CliError::Usage(format!("unknown vertex {name}")))?,
        None => *spec
            .connected
            .first()
            .ok_or_else(|| check("no vertex carries a shadow point"))?,
    };
    if !spec.connected.contains(&v) {
        return Err(CliError::Usage(format!(
            "vertex {} carries no shadow point",
            spec.graph.vertex_name(v)
        )));
    }
    let cfg = mc_config(&a.mc, &a.lambda, 0);
    let report = ck_test(spec, spec, v, &a.lambda, &cfg).map_err(check)?;
    let sigma = bonferroni_sigma(report.rows.len());

    let mut out = Output::create(&a.out.out)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &report.rows {
        w.serialize(r).map_err(io)?;
    }
    out.write("chain_test.csv", &w.into_inner().map_err(io)?)?;
    let max_z = report.max_abs_z();
    let pass = max_z <= sigma;
    out.say(format!("start: {}", spec.graph.vertex_name(v)));
    out.say(format!("rows: {} starved: {}", report.rows.len(), report.starved));
    out.say(format!("max_abs_z: {max_z:.3} threshold: {sigma:.3}"));
    out.say(format!("status: {}", if pass { "pass" } else { "fail" }));
    out.finish("chain-test")?;
    verdict(pass, "chain test")
}
