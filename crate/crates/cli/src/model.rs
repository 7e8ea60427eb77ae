//! Loading graph files and writing output directories.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use mgbm::graph::text::{parse_graph, ParseErrorKind};
use mgbm::graph::{expand_tadpoles, GraphPoint, MetricGraph, TadpoleExpansion, VertexId};
use mgbm::mc::{write_report, ReportRow};
use mgbm::paste::{build_process, PastedProcessSpec};
use mgbm::resolvent::{parse_function, BuiltinFunction};
use mgbm::wentzell::WentzellData;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::CliError;

/// Family-wise two-sided error rate of a multi-row check (the 3σ rate).
pub const FAMILY_ALPHA: f64 = 0.0027;

/// Reads and parses a graph file.
pub fn load(path: &Path) -> Result<(MetricGraph, WentzellData), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_graph(&text).map_err(|e| {
        let what = match e.kind {
            ParseErrorKind::Wentzell(_) => "Wentzell check failed",
            _ => "invalid graph file",
        };
        CliError::Check(format!("{}: {what}: {e}", path.display()))
    })
}

/// A parsed graph with its tadpole-free expansion and pasting blueprint.
pub struct Model {
    pub graph: MetricGraph,
    pub data: WentzellData,
    pub expansion: TadpoleExpansion,
    pub spec: PastedProcessSpec,
}

impl Model {
    pub fn open(path: &Path) -> Result<Self, CliError> {
        let (graph, data) = load(path)?;
        let expansion = expand_tadpoles(&graph, &data).map_err(|e| CliError::Check(e.to_string()))?;
        let spec = build_process(&expansion.graph, &expansion.data).map_err(|e| CliError::Check(e.to_string()))?;
        Ok(Self {
            graph,
            data,
            expansion,
            spec,
        })
    }

    pub fn point(&self, s: &str) -> Result<GraphPoint, CliError> {
        self.graph
            .parse_point(s)
            .map_err(|e| CliError::Usage(format!("start `{s}`: {e}")))
    }

    pub fn function(&self, id: &str) -> Result<BuiltinFunction, CliError> {
        parse_function(&self.graph, id).map_err(|e| CliError::Usage(format!("--f {id}: {e}")))
    }

    /// The point in the simulated (expanded) graph.
    pub fn sim_point(&self, p: &GraphPoint) -> GraphPoint {
        self.expansion.forward(p)
    }

    pub fn sim_vertex(&self, v: VertexId) -> VertexId {
        self.expansion
            .graph
            .vertex_id(self.graph.vertex_name(v))
            .expect("the expansion keeps every vertex")
    }
}

/// `sup |f|` of a built-in function.
pub fn sup_norm(f: &BuiltinFunction) -> f64 {
    match f {
        BuiltinFunction::Constant(c) => c.0.abs(),
        BuiltinFunction::Bump(_) | BuiltinFunction::Plateau(_) => 1.0,
    }
}

/// z-threshold for `m` simultaneous two-sided comparisons.
pub fn bonferroni_sigma(m: usize) -> f64 {
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    n.inverse_cdf(1.0 - FAMILY_ALPHA / (2.0 * m.max(1) as f64))
}

/// An output directory. Artifacts are deterministic; wall-clock data goes
/// to `run.log` only.
pub struct Output {
    dir: PathBuf,
    started: Instant,
    unix: u64,
    summary: String,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            started: Instant::now(),
            unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            summary: String::new(),
        })
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
    }

    pub fn report(&self, rows: &[ReportRow]) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write_report(rows, &mut buf).map_err(|e| CliError::Io(e.to_string()))?;
        self.write("report.csv", &buf)
    }

    /// Prints a `key: value` summary line and keeps it for `summary.txt`.
    pub fn say(&mut self, line: impl AsRef<str>) {
        println!("{}", line.as_ref());
        self.summary.push_str(line.as_ref());
        self.summary.push('\n');
    }

    /// Writes `summary.txt` and `run.log`.
    pub fn finish(&self, command: &str) -> Result<(), CliError> {
        self.write("summary.txt", self.summary.as_bytes())?;
        let log = format!(
            "command: {command}\nstarted_unix: {}\nelapsed_s: {:.3}\n",
            self.unix,
            self.started.elapsed().as_secs_f64()
        );
        self.write("run.log", log.as_bytes())
    }
}

/// Shortest round-trip text of a float.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Turns a verdict into the exit status.
pub fn verdict(pass: bool, what: &str) -> Result<(), CliError> {
    if pass {
        Ok(())
    } else {
        Err(CliError::Check(format!("{what} failed")))
    }
}
