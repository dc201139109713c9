//! Result files: trace.csv, summary.json, band.csv, diagnostics.json, profile.csv.
//!
//! Reals are written with 15 significant digits.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use tailmix_core::posterior::{
    data_diagnostics, exponent_posterior, ks_statistic, posterior_mode, split_by_model, summarize_params,
    DataDiagnostics, Summary,
};
use tailmix_core::sampler::{bayes_factor, ChainOutput};
use tailmix_core::{
    BulkKind, Error as CoreError, FrequencyTable, Model, PriorSpec, SurvivalBand, ThresholdProfile, Trace, TraceRow,
};

use crate::config::RunConfig;

pub const TRACE_HEADER: &str = "iter,M,xi1,xi2,sigma,u,phi_u,log_post";

/// Rounds to 15 significant digits.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// Shortest text that reads back as `round15(x)`.
pub fn fmt_real(x: f64) -> String {
    format!("{:?}", round15(x))
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then(|| round15(x))
}

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("trace line {line}: {msg}")]
    Trace { line: u64, msg: String },
    #[error(transparent)]
    Core(#[from] CoreError),
}

pub fn write_trace<W: Write>(trace: &Trace, mut w: W) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in &trace.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.iter,
            r.model.indicator(),
            fmt_real(r.xi1),
            fmt_real(r.xi2),
            fmt_real(r.sigma),
            r.u,
            fmt_real(r.phi_u),
            fmt_real(r.log_post)
        )?;
    }
    Ok(())
}

pub fn read_trace<R: Read>(reader: R) -> Result<Trace, OutputError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| trace_err(1, e))?;
    if header.iter().collect::<Vec<_>>().join(",") != TRACE_HEADER {
        return Err(OutputError::Trace { line: 1, msg: format!("expected header `{TRACE_HEADER}`") });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| trace_err(0, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |field: &str| OutputError::Trace { line, msg: format!("bad {field}") };
        if rec.len() != 8 {
            return Err(OutputError::Trace { line, msg: "expected 8 fields".into() });
        }
        let real = |i: usize, name: &str| rec[i].parse::<f64>().map_err(|_| bad(name));
        let model = rec[1].parse::<u8>().ok().and_then(Model::from_indicator).ok_or_else(|| bad("M"))?;
        rows.push(TraceRow {
            iter: rec[0].parse().map_err(|_| bad("iter"))?,
            model,
            xi1: real(2, "xi1")?,
            xi2: real(3, "xi2")?,
            sigma: real(4, "sigma")?,
            u: rec[5].parse().map_err(|_| bad("u"))?,
            phi_u: real(6, "phi_u")?,
            log_post: real(7, "log_post")?,
        });
    }
    Ok(Trace::new(rows))
}

fn trace_err(fallback: u64, e: csv::Error) -> OutputError {
    let line = e.position().map_or(fallback, |p| p.line());
    OutputError::Trace { line, msg: e.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl From<Summary> for SummaryStats {
    fn from(s: Summary) -> Self {
        SummaryStats {
            mean: round15(s.mean),
            sd: round15(s.sd),
            median: round15(s.median),
            lo: round15(s.lo),
            hi: round15(s.hi),
            n: s.n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeRow {
    pub xi1: f64,
    pub xi2: f64,
    pub sigma: f64,
    pub u: u64,
    pub phi_u: f64,
    pub log_post: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub statistic: f64,
    /// Smallest `x` attaining the maximum.
    pub at: u64,
}

/// Posterior summaries for the rows of one model variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub rows: usize,
    pub xi1: SummaryStats,
    pub xi2: SummaryStats,
    pub sigma: SummaryStats,
    pub u: SummaryStats,
    pub phi_u: SummaryStats,
    pub alpha1: Option<SummaryStats>,
    pub alpha2: Option<SummaryStats>,
    pub nonpositive_xi2: usize,
    pub ks: KsReport,
    pub mode: ModeRow,
}

pub fn model_report(trace: &Trace, table: &FrequencyTable, bulk: BulkKind, level: f64) -> Result<ModelReport, CoreError> {
    let s = summarize_params(trace, level)?;
    let e = exponent_posterior(trace, bulk, level)?;
    let (statistic, at) = ks_statistic(trace, table, bulk)?;
    let m = posterior_mode(trace)?;
    Ok(ModelReport {
        rows: trace.len(),
        xi1: s.xi1.into(),
        xi2: s.xi2.into(),
        sigma: s.sigma.into(),
        u: s.u.into(),
        phi_u: s.phi_u.into(),
        alpha1: e.alpha1.map(Into::into),
        alpha2: e.alpha2.map(Into::into),
        nonpositive_xi2: e.nonpositive_xi2,
        ks: KsReport { statistic: round15(statistic), at },
        mode: ModeRow {
            xi1: round15(m.xi1),
            xi2: round15(m.xi2),
            sigma: round15(m.sigma),
            u: m.u,
            phi_u: round15(m.phi_u),
            log_post: round15(m.log_post),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesFactorReport {
    /// `B₀₁` when both models were visited.
    pub b01: Option<f64>,
    /// One-sided bound when one model was never visited.
    pub bound: Option<f64>,
    pub unvisited: Option<String>,
    pub note: Option<String>,
}

impl BayesFactorReport {
    pub fn from_trace(trace: &Trace, priors: &PriorSpec) -> Self {
        let empty = BayesFactorReport { b01: None, bound: None, unvisited: None, note: None };
        match bayes_factor(trace, priors) {
            Ok(b) => BayesFactorReport { b01: Some(round15(b)), ..empty },
            Err(CoreError::DegenerateTrace { unvisited, bound }) => BayesFactorReport {
                bound: Some(round15(bound)),
                unvisited: Some(unvisited.to_string()),
                note: Some(if unvisited == Model::Constrained {
                    "lower bound: constrained model never visited".into()
                } else {
                    "upper bound: unconstrained model never visited".into()
                }),
                ..empty
            },
            Err(e) => BayesFactorReport { note: Some(e.to_string()), ..empty },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelCounts {
    pub constrained: usize,
    pub unconstrained: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub xi1: Option<f64>,
    pub tail: Option<f64>,
    pub u: Option<f64>,
    pub model: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub index: usize,
    pub rows: usize,
    pub acceptance: AcceptanceReport,
    pub initial_model: u8,
    pub initial_u: u64,
}

impl ChainReport {
    pub fn new(index: usize, out: &ChainOutput) -> Self {
        let a = out.acceptance;
        ChainReport {
            index,
            rows: out.trace.len(),
            acceptance: AcceptanceReport {
                xi1: finite(a.xi1),
                tail: finite(a.tail),
                u: finite(a.u),
                model: finite(a.model),
            },
            initial_model: out.initial.model.indicator(),
            initial_u: out.initial.u,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub config: RunConfig,
    pub rows: usize,
    pub counts: ModelCounts,
    pub bayes_factor: BayesFactorReport,
    pub constrained: Option<ModelReport>,
    pub unconstrained: Option<ModelReport>,
    pub chains: Vec<ChainReport>,
}

impl FitSummary {
    pub fn build(
        config: &RunConfig,
        table: &FrequencyTable,
        trace: &Trace,
        outputs: &[ChainOutput],
    ) -> Result<Self, CoreError> {
        let bulk = config.bulk.into();
        let (m1, m0) = split_by_model(trace);
        let report = |t: &Trace| (!t.is_empty()).then(|| model_report(t, table, bulk, config.level)).transpose();
        Ok(FitSummary {
            config: config.clone(),
            rows: trace.len(),
            counts: ModelCounts { constrained: m1.len(), unconstrained: m0.len() },
            bayes_factor: BayesFactorReport::from_trace(trace, &config.prior_spec()),
            constrained: report(&m1)?,
            unconstrained: report(&m0)?,
            chains: outputs.iter().enumerate().map(|(i, o)| ChainReport::new(i, o)).collect(),
        })
    }
}

pub const BAND_HEADER: &str = "M,x,emp_surv,lo,med,hi";

/// Writes the header followed by the rows of each `(model, band)` pair.
pub fn write_bands<W: Write>(bands: &[(Model, SurvivalBand)], mut w: W) -> io::Result<()> {
    writeln!(w, "{BAND_HEADER}")?;
    for (m, band) in bands {
        for r in &band.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                m.indicator(),
                r.x,
                fmt_real(r.emp_surv),
                fmt_real(r.lo),
                fmt_real(r.med),
                fmt_real(r.hi)
            )?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub n: u64,
    pub zero_count: u64,
    pub zero_proportion: f64,
    pub proportion_le_2: f64,
    pub unique_values: usize,
    pub max_value: u64,
    pub phi_lo: f64,
    pub phi_hi: f64,
    pub admissible_thresholds: usize,
    pub unique_phi: usize,
}

impl DiagnosticsReport {
    pub fn new(table: &FrequencyTable, phi_bounds: (f64, f64)) -> Self {
        let d: DataDiagnostics = data_diagnostics(table, phi_bounds);
        DiagnosticsReport {
            n: d.n,
            zero_count: d.zero_count,
            zero_proportion: round15(d.zero_proportion),
            proportion_le_2: round15(d.proportion_le_2),
            unique_values: d.unique_values,
            max_value: d.max_value,
            phi_lo: phi_bounds.0,
            phi_hi: phi_bounds.1,
            admissible_thresholds: d.admissible_thresholds,
            unique_phi: d.unique_phi,
        }
    }
}

pub const PROFILE_HEADER: &str = "M,u,phi_hat,loglik,xi1,xi2,sigma,phi_u";

pub fn write_profiles<W: Write>(profiles: &[(Model, ThresholdProfile)], mut w: W) -> io::Result<()> {
    writeln!(w, "{PROFILE_HEADER}")?;
    for (m, prof) in profiles {
        for p in &prof.points {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                m.indicator(),
                p.u,
                fmt_real(p.phi_hat),
                fmt_real(p.loglik),
                fmt_real(p.params.xi1),
                fmt_real(p.params.xi2),
                fmt_real(p.params.sigma),
                fmt_real(p.params.phi_u)
            )?;
        }
    }
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(value: &T, mut w: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)
}
