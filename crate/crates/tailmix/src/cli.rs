use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use tailmix_core::distributions::{constrained_phi, sample_mixture_seeded};
use tailmix_core::likelihood::profile_threshold;
use tailmix_core::posterior::{split_by_model, survival_band};
use tailmix_core::{BulkKind, FrequencyTable, MixtureSpec, Model, ParamVector};

use crate::chains::{pooled_trace, run_chains};
use crate::config::{Bulk, ChainConfig, Mode, PriorConfig, RunConfig};
use crate::io::{ingest, write_edge_list, write_frequency_csv, DataFormat};
use crate::output::{
    model_report, read_trace, write_bands, write_json, write_profiles, write_trace, BayesFactorReport,
    DiagnosticsReport, FitSummary, KsReport,
};

#[derive(Debug, Parser)]
#[command(name = "tailmix", version, about = "Discrete extreme value mixture fits for heavy-tailed count data")]
#[command(after_help = "Prior overrides: --prior.<name>=<value> for xi1_lo, xi1_hi, xi2_mean, xi2_sd, \
sigma_shape, sigma_scale, sigma_param (scale|rate), phi_lo, phi_hi, prior_m1.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the sampler and write trace.csv, summary.json, band.csv and diagnostics.json.
    Fit(FitArgs),
    /// Write the profile log-likelihood over thresholds to profile.csv.
    Profile(ProfileArgs),
    /// Recompute KS statistics and the Bayes factor from a stored trace.
    Ks(KsArgs),
    /// Draw a sample from given parameters.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input file.
    #[arg(long)]
    pub data: PathBuf,
    /// Input format; inferred from the extension when omitted (.csv is freq-csv).
    #[arg(long, value_enum)]
    pub format: Option<DataFormat>,
    #[arg(long, value_enum, default_value = "geometric")]
    pub bulk: Bulk,
}

impl DataArgs {
    fn format(&self) -> DataFormat {
        self.format.unwrap_or_else(|| infer_format(&self.data))
    }

    fn load(&self) -> Result<FrequencyTable> {
        ingest(&self.data, self.format()).with_context(|| format!("reading {}", self.data.display()))
    }
}

pub fn infer_format(path: &Path) -> DataFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => DataFormat::FreqCsv,
        Some("edges") | Some("el") => DataFormat::Edges,
        _ => DataFormat::Raw,
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value = "both")]
    pub mode: Mode,
    /// Total iterations, burn-in included.
    #[arg(long, default_value_t = 2_020_000)]
    pub iters: u64,
    #[arg(long, default_value_t = 20_000)]
    pub burnin: u64,
    #[arg(long, default_value_t = 100)]
    pub thin: u64,
    #[arg(long, env = "TAILMIX_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    /// Largest threshold step in the integer random walk.
    #[arg(long, default_value_t = 2)]
    pub u_step: u64,
    /// Keep the initial proposal scales through burn-in.
    #[arg(long)]
    pub no_adapt: bool,
    /// Credible level for intervals and the survival band.
    #[arg(long, default_value_t = 0.99)]
    pub level: f64,
    /// Output directory.
    #[arg(long, default_value = "tailmix-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// `both` writes the profile of each variant.
    #[arg(long, value_enum, default_value = "both")]
    pub mode: Mode,
    #[arg(long, default_value = "tailmix-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct KsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// trace.csv written by `fit`.
    #[arg(long)]
    pub trace: PathBuf,
    /// Directory for ks.json; printed to stdout either way.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "geometric")]
    pub bulk: Bulk,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, env = "TAILMIX_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 2.0)]
    pub xi1: f64,
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub xi2: f64,
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 15)]
    pub u: u64,
    /// Exceedance probability; the continuity constraint sets it when omitted.
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long, value_enum, default_value = "raw")]
    pub format: DataFormat,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Pulls `--prior.<name>=<value>` (or `--prior.<name> <value>`) out of `args`.
pub fn split_prior_overrides(args: Vec<String>) -> Result<(Vec<String>, Vec<(String, String)>)> {
    let mut rest = Vec::with_capacity(args.len());
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let Some(spec) = a.strip_prefix("--prior.") else {
            rest.push(a);
            continue;
        };
        let (name, value) = match spec.split_once('=') {
            Some((n, v)) => (n.to_owned(), v.to_owned()),
            None => {
                let v = it.next().with_context(|| format!("--prior.{spec} needs a value"))?;
                (spec.to_owned(), v)
            }
        };
        overrides.push((name, value));
    }
    Ok((rest, overrides))
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> Result<()> {
    let (rest, overrides) = split_prior_overrides(args.into_iter().collect())?;
    let cli = Cli::try_parse_from(rest).map_err(|e| {
        // help and version go to stdout with a zero exit
        if !e.use_stderr() {
            e.exit();
        }
        let text = e.render().to_string();
        anyhow::Error::msg(text.trim_start_matches("error: ").trim_end().to_owned())
    })?;
    let mut priors = PriorConfig::default();
    for (name, value) in &overrides {
        priors.set(name, value)?;
    }
    match cli.command {
        Command::Fit(a) => fit(a, priors),
        Command::Profile(a) => profile(a, priors),
        Command::Ks(a) => ks(a, priors),
        Command::Simulate(a) => {
            if !overrides.is_empty() {
                bail!("simulate takes no prior overrides");
            }
            simulate(a)
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn fit(a: FitArgs, priors: PriorConfig) -> Result<()> {
    let config = RunConfig {
        data: a.data.data.clone(),
        format: a.data.format(),
        bulk: a.data.bulk,
        mode: a.mode,
        priors,
        mcmc: ChainConfig {
            iterations: a.iters,
            burn_in: a.burnin,
            thin: a.thin,
            seed: a.seed,
            chains: a.chains,
            u_step: a.u_step,
            adapt: !a.no_adapt,
        },
        out: a.out.clone(),
        level: a.level,
    };
    config.validate()?;
    let table = a.data.load()?;
    let bulk: BulkKind = config.bulk.into();
    let spec = config.prior_spec();

    let outputs = run_chains(&table, bulk, &spec, &config.mcmc_config(), config.mcmc.chains)?;
    let trace = pooled_trace(&outputs);
    let summary = FitSummary::build(&config, &table, &trace, &outputs)?;
    let (m1, m0) = split_by_model(&trace);
    let mut bands = Vec::new();
    for (m, t) in [(Model::Constrained, &m1), (Model::Unconstrained, &m0)] {
        if !t.is_empty() {
            bands.push((m, survival_band(t, &table, bulk, config.level)?));
        }
    }

    fs::create_dir_all(&config.out).with_context(|| format!("creating {}", config.out.display()))?;
    let mut w = create(&config.out, "trace.csv")?;
    write_trace(&trace, &mut w)?;
    w.flush()?;
    let mut w = create(&config.out, "summary.json")?;
    write_json(&summary, &mut w)?;
    w.flush()?;
    let mut w = create(&config.out, "band.csv")?;
    write_bands(&bands, &mut w)?;
    w.flush()?;
    let mut w = create(&config.out, "diagnostics.json")?;
    write_json(&DiagnosticsReport::new(&table, (spec.phi_lo, spec.phi_hi)), &mut w)?;
    w.flush()?;

    let stdout = io::stdout();
    let mut o = stdout.lock();
    writeln!(o, "rows: {} (M=1: {}, M=0: {})", summary.rows, summary.counts.constrained, summary.counts.unconstrained)?;
    let bf = &summary.bayes_factor;
    match (bf.b01, bf.bound) {
        (Some(b), _) => writeln!(o, "B01: {b}")?,
        (None, Some(b)) => writeln!(o, "B01: {} {b}", if bf.unvisited.as_deref() == Some("M=1") { ">=" } else { "<=" })?,
        _ => writeln!(o, "B01: n/a ({})", bf.note.as_deref().unwrap_or(""))?,
    }
    for (name, r) in [("M=1", &summary.constrained), ("M=0", &summary.unconstrained)] {
        if let Some(r) = r {
            writeln!(o, "{name}: KS {} at x={}, u mode {}", r.ks.statistic, r.ks.at, r.mode.u)?;
        }
    }
    writeln!(o, "wrote {}", config.out.display())?;
    Ok(())
}

fn profile_models(mode: Mode) -> &'static [Model] {
    match mode {
        Mode::Both => &[Model::Constrained, Model::Unconstrained],
        Mode::Constrained => &[Model::Constrained],
        Mode::Unconstrained => &[Model::Unconstrained],
    }
}

fn profile(a: ProfileArgs, priors: PriorConfig) -> Result<()> {
    let table = a.data.load()?;
    let bulk: BulkKind = a.data.bulk.into();
    let bounds = (priors.phi_lo, priors.phi_hi);
    let mut profiles = Vec::new();
    for &m in profile_models(a.mode) {
        profiles.push((m, profile_threshold(&table, &m.spec(bulk), bounds)?));
    }
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut w = create(&a.out, "profile.csv")?;
    write_profiles(&profiles, &mut w)?;
    w.flush()?;
    let stdout = io::stdout();
    let mut o = stdout.lock();
    for (m, p) in &profiles {
        let best = p.argmax();
        writeln!(o, "{m}: argmax u = {}, loglik {}", best.u, best.loglik)?;
    }
    Ok(())
}

#[derive(Debug, serde::Serialize)]
struct KsOutput {
    constrained: Option<KsReport>,
    unconstrained: Option<KsReport>,
    counts: crate::output::ModelCounts,
    bayes_factor: BayesFactorReport,
}

fn ks(a: KsArgs, priors: PriorConfig) -> Result<()> {
    let table = a.data.load()?;
    let bulk: BulkKind = a.data.bulk.into();
    let f = File::open(&a.trace).with_context(|| format!("opening {}", a.trace.display()))?;
    let trace = read_trace(io::BufReader::new(f))?;
    if trace.is_empty() {
        bail!("trace {} has no rows", a.trace.display());
    }
    let (m1, m0) = split_by_model(&trace);
    let ks_of = |t: &tailmix_core::Trace| -> Result<Option<KsReport>> {
        if t.is_empty() {
            return Ok(None);
        }
        Ok(Some(model_report(t, &table, bulk, 0.95)?.ks))
    };
    let out = KsOutput {
        constrained: ks_of(&m1)?,
        unconstrained: ks_of(&m0)?,
        counts: crate::output::ModelCounts { constrained: m1.len(), unconstrained: m0.len() },
        bayes_factor: BayesFactorReport::from_trace(&trace, &priors.into()),
    };
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut w = create(dir, "ks.json")?;
        write_json(&out, &mut w)?;
        w.flush()?;
    }
    write_json(&out, io::stdout().lock())?;
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let bulk: BulkKind = a.bulk.into();
    let constrained = a.phi.is_none();
    let phi = match a.phi {
        Some(p) => p,
        None => constrained_phi(bulk, a.xi1, a.xi2, a.sigma, a.u)?,
    };
    let params = ParamVector::new(a.xi1, a.xi2, a.sigma, a.u, phi)?;
    let spec = MixtureSpec::new(bulk, constrained);
    let draws = sample_mixture_seeded(&spec, &params, a.n, a.seed)?;
    let table = FrequencyTable::from_values(draws.iter().copied())?;

    let mut w: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match a.format {
        // keep the draw order for raw output
        DataFormat::Raw => {
            for x in &draws {
                writeln!(w, "{x}")?;
            }
        }
        DataFormat::FreqCsv => write_frequency_csv(&table, &mut w)?,
        DataFormat::Edges => write_edge_list(&table, &mut w)?,
    }
    w.flush()?;
    Ok(())
}
