//! Post-processing of result CSVs and compilation reports.

use std::fmt::Write as _;

use trotterlab::compiler::{entangling_report_labeled, trotterize, CouplingGraph};
use trotterlab::observables::{transpile, TimeSeries, TranspileConfig};

use crate::config::ExperimentConfig;
use crate::error::{CliError, StageExt};

/// Grids agree when every time matches to 1e-12 relative.
fn check_grid(a: &TimeSeries, b: &TimeSeries, la: &str, lb: &str) -> Result<(), CliError> {
    let same = a.len() == b.len()
        && a.times.iter().zip(&b.times).all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0));
    if same {
        Ok(())
    } else {
        Err(trotterlab::Error::GridMismatch(format!("{la} ({} points) vs {lb} ({} points)", a.len(), b.len())))
            .stage("grid")
    }
}

/// Whitespace-separated columns `t name_value name_err ...` for gnuplot.
pub fn plotdata(series: &[(String, TimeSeries)]) -> Result<String, CliError> {
    let Some((l0, first)) = series.first() else {
        return Err(CliError::Input("plotdata needs at least one series".into()));
    };
    for (l, s) in &series[1..] {
        check_grid(first, s, l0, l)?;
    }
    let mut out = String::from("# t");
    for (l, _) in series {
        let _ = write!(out, " {l}_value {l}_err");
    }
    out.push('\n');
    for i in 0..first.len() {
        let _ = write!(out, "{}", first.times[i]);
        for (_, s) in series {
            let _ = write!(out, " {} {}", s.values[i], s.std_errors[i]);
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub times: Vec<f64>,
    pub absolute: Vec<f64>,
    /// `|a - b| / |b|`; `b` is the reference.
    pub relative: Vec<f64>,
}

impl Deviation {
    pub fn max_absolute(&self) -> f64 {
        self.absolute.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_relative(&self) -> f64 {
        self.relative.iter().copied().fold(0.0, f64::max)
    }

    pub fn final_absolute(&self) -> f64 {
        self.absolute.last().copied().unwrap_or(0.0)
    }

    pub fn final_relative(&self) -> f64 {
        self.relative.last().copied().unwrap_or(0.0)
    }

    pub fn to_report(&self) -> String {
        let mut out = String::from("t,abs_dev,rel_dev\n");
        for i in 0..self.times.len() {
            let _ = writeln!(out, "{},{},{}", self.times[i], self.absolute[i], self.relative[i]);
        }
        let _ = writeln!(out, "# max_abs_dev: {}", self.max_absolute());
        let _ = writeln!(out, "# max_rel_dev: {}", self.max_relative());
        let _ = writeln!(out, "# final_abs_dev: {}", self.final_absolute());
        let _ = writeln!(out, "# final_rel_dev: {}", self.final_relative());
        out
    }
}

pub fn compare(a: &TimeSeries, b: &TimeSeries) -> Result<Deviation, CliError> {
    check_grid(a, b, "a", "b")?;
    let absolute: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).collect();
    let relative = absolute
        .iter()
        .zip(&b.values)
        .map(|(&d, y)| match (d, y.abs()) {
            (d, _) if d == 0.0 => 0.0,
            (_, r) if r == 0.0 => f64::INFINITY,
            (d, r) => d / r,
        })
        .collect();
    Ok(Deviation { times: a.times.clone(), absolute, relative })
}

/// Hamiltonian text plus the qubit layout.
pub fn dump_hamiltonian(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let (h, layout) = cfg.model.build().stage("model")?;
    let mut out = format!("# model: {}\n# n_qubits: {}\n", cfg.model.name(), h.n_qubits());
    for (k, q) in layout.to_map() {
        let _ = writeln!(out, "# qubit {k} -> {q}");
    }
    out.push_str(&h.to_text());
    Ok(out)
}

/// Options overriding the config's transpilation for a report.
#[derive(Debug, Clone, Default)]
pub struct ReportOverrides {
    pub topology: Option<String>,
    pub basis: Option<String>,
    pub steps: Option<usize>,
    pub dt: Option<f64>,
}

/// Compiles the Trotter circuit all-to-all and on the requested topology and
/// tabulates both.
pub fn transpile_report(cfg: &ExperimentConfig, o: &ReportOverrides) -> Result<String, CliError> {
    let mut cfg = cfg.clone();
    if let Some(s) = o.steps {
        cfg.trotter.n_steps = s;
    }
    if let Some(dt) = o.dt {
        cfg.trotter.dt = dt;
    }
    let mut tc: TranspileConfig = cfg.transpile_config()?;
    if let Some(b) = &o.basis {
        tc.basis = b.parse().map_err(|e| CliError::Config(format!("--basis: {e}")))?;
    }
    if let Some(t) = &o.topology {
        tc.topology = Some(CouplingGraph::from_spec(t).map_err(|e| CliError::Config(format!("--topology: {e}")))?);
    }
    let plan = cfg.plan().stage("trotterize")?;
    let circuit = trotterize(&plan).stage("trotterize")?;
    let flat = transpile(&circuit, &TranspileConfig { topology: None, ..tc.clone() }).stage("transpile")?;
    let routed = transpile(&circuit, &tc).stage("transpile")?;
    let label = o
        .topology
        .clone()
        .or_else(|| cfg.transpile.as_ref().and_then(|t| t.topology.clone()))
        .unwrap_or_else(|| if tc.topology.is_some() { "preset".into() } else { "all_to_all".into() });
    let mut out = format!(
        "# model: {}\n# n_steps: {}\n# dt: {}\n# basis: {:?}\n",
        cfg.model.name(),
        plan.n_steps(),
        plan.dt(),
        tc.basis
    );
    let _ = writeln!(out, "# layout_initial: {:?}", routed.routed.layout_initial);
    let _ = writeln!(out, "# layout_final: {:?}", routed.routed.layout_final);
    out.push_str(&entangling_report_labeled(&flat.routed, &routed.routed, "all_to_all", &label).to_string());
    Ok(out)
}
