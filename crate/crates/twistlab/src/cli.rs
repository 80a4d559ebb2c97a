//! The `twistlab` command-line front end.
//!
//! Every subcommand writes one JSON object or one CSV table (with a header
//! row) to standard output or `--out`. Exit codes: 0 success, 1 numerical
//! failure, 2 configuration error, 3 input-file parse error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};
use thiserror::Error;

use crate::centralizer::{shift_centralizer, CentralizerError, CentralizerKind, CentralizerSpec, LipschitzPreset};
use crate::diagnostics::{
    self, cantor_average_matrix, centralizer_constant_lower, divergence_curve, estimate_uniform_defect,
    kalton_peck_closed_form, lift_defect, quasilinearity_lower, rademacher_nonlinearity, random_gaussian,
    random_unit, sn_test_family, trial_rng, witness_from_centralizer, DefectMode, DiagError,
};
use crate::io::{self, FormatError, MAX_DIM, MAX_MATRIX_ENTRIES};
use crate::seq::{lp_norm, CSeq, PExp, SeqError};
use crate::spectral::{self, liftability_criterion, lorentz_log_norm, CMatrix, SingularSpectrum, SpectralError};
use crate::twisted::{scalar_twisted_norm, twisted_quasinorm, ScalarTwistedPoint, TwistedPoint};

const MAX_SIDE: usize = 2048;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "TWISTLAB_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("input parse error: {0}")]
    Parse(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) | CliError::Output(_) => 1,
            CliError::Config(_) => 2,
            CliError::Parse(_) => 3,
        }
    }
}

impl From<SeqError> for CliError {
    fn from(e: SeqError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<CentralizerError> for CliError {
    fn from(e: CentralizerError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::NonConvergent(_) => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<DiagError> for CliError {
    fn from(e: DiagError) -> Self {
        match e {
            DiagError::Spectral(s) => s.into(),
            DiagError::Inconsistent(_) => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Parse(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "twistlab", version, about = "Experiments on twisted Hilbert spaces and liftable operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
struct CommonArgs {
    /// Scale exponent p of the centralizer.
    #[arg(long, global = true, default_value_t = 2.0)]
    p: f64,
    /// Target exponent q of a shift (q < p).
    #[arg(long, global = true)]
    q: Option<f64>,
    /// Ambient dimension (truncation of ℕ).
    #[arg(long, global = true, default_value_t = 1000)]
    dim: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 10_000)]
    trials: u64,
    /// kp | rank | lipschitz:<s|t|s+t|min|sin-damped> | shift:<base> | file:<spec.json>
    #[arg(long, global = true, default_value = "kp")]
    centralizer: String,
    /// Multiplier sequence: preset:<ones|invlog|invsqrt|invn|geometric:r> | unit:k | file:<path>
    #[arg(long = "d", global = true)]
    d_source: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Sequence or operator norms.
    Norm(NormArgs),
    /// Evaluate a centralizer on a sequence.
    Centralizer(EvalArgs),
    /// Divergence curve n ↦ ‖Φ(d s_n)‖² / ‖s_n‖².
    Curve(CurveArgs),
    /// Truncated liftability criterion sup d*_n log n with trend report.
    Criterion(CriterionArgs),
    /// Lifting defect of a diagonal witness.
    Defect(DefectArgs),
    /// Empirical centralizer and quasilinearity constants.
    Constant,
    /// Exact Rademacher average of the nonlinearity.
    Rademacher(RademacherArgs),
    /// Average a matrix over the sign group.
    Average(AverageArgs),
    /// Evaluate a centralizer shifted from ℓ_p to ℓ_q.
    Shift(EvalArgs),
    /// Quasinorm of a point of a twisted sum.
    TwistedNorm(TwistedArgs),
}

#[derive(Debug, Clone, Args)]
pub struct NormArgs {
    #[arg(long, conflicts_with_all = ["schatten", "macaev", "lorentz", "sup"])]
    pub lp: Option<f64>,
    #[arg(long, conflicts_with_all = ["macaev", "lorentz", "sup"])]
    pub schatten: Option<f64>,
    #[arg(long, conflicts_with_all = ["lorentz", "sup"])]
    pub macaev: bool,
    #[arg(long, conflicts_with = "sup")]
    pub lorentz: bool,
    #[arg(long)]
    pub sup: bool,
    /// Print the singular values instead of a norm.
    #[arg(long)]
    pub spectrum: bool,
    /// diag:v1,v2,... | identity:N | ones:N | random:N | file:<matrix.json>
    #[arg(long)]
    pub matrix: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Input sequence (same syntax as --d); defaults to --d.
    #[arg(long)]
    pub x: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    /// Largest n; defaults to --dim.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct CriterionArgs {
    #[arg(long, default_value_t = 1.0)]
    pub cap: f64,
}

#[derive(Debug, Clone, Args)]
pub struct DefectArgs {
    /// sn | units | random:K
    #[arg(long, default_value = "sn")]
    pub family: String,
    /// Family size for sn (defaults to min(dim, 256)).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value = "lift")]
    pub mode: String,
    /// auto (centralizer candidate) | zero | median | file:<seq.json>
    #[arg(long, default_value = "auto")]
    pub witness: String,
    /// Comma-separated centralizers; reports the uniform estimate instead.
    #[arg(long)]
    pub catalog: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RademacherArgs {
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    /// units (e_i/√k) | random
    #[arg(long, default_value = "units")]
    pub xs: String,
}

#[derive(Debug, Clone, Args)]
pub struct AverageArgs {
    #[arg(long)]
    pub matrix: String,
}

#[derive(Debug, Clone, Args)]
pub struct TwistedArgs {
    /// Twisted point file {"y", "x", "map"}.
    #[arg(long, conflicts_with_all = ["x", "y", "t"])]
    pub point: Option<String>,
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub y: Option<String>,
    /// Scalar coordinate `re[,im]` of a point of 𝕂 ⊕_φ ℓ₁.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
}

/// A validated run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub p: PExp,
    pub q: Option<PExp>,
    pub dim: usize,
    pub seed: u64,
    pub trials: u64,
    pub centralizer: CentralizerSpec,
    pub d_source: Option<String>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let c = cli.common;
        if c.dim == 0 || c.dim > MAX_DIM {
            return Err(CliError::Config(format!("--dim must lie in [1, {MAX_DIM}]")));
        }
        if c.trials == 0 {
            return Err(CliError::Config("--trials must be positive".into()));
        }
        let p = PExp::new(c.p)?;
        let q = c.q.map(PExp::new).transpose()?;
        let mut centralizer = parse_centralizer(&c.centralizer, p, q)?;
        if let Command::Shift(_) = cli.command {
            let q = q.ok_or_else(|| CliError::Config("shift needs --q".into()))?;
            if !matches!(centralizer.kind, CentralizerKind::Shifted { .. }) {
                centralizer = shift_centralizer(&centralizer, q)?;
            }
        }
        Ok(RunConfig {
            command: cli.command,
            p,
            q,
            dim: c.dim,
            seed: c.seed,
            trials: c.trials,
            centralizer,
            d_source: c.d_source,
            format: c.format,
            out: c.out,
        })
    }
}

/// `kp`, `rank`, `lipschitz:<preset>`, `shift:<base>` (needs `q`) or
/// `file:<spec.json>`.
pub fn parse_centralizer(text: &str, p: PExp, q: Option<PExp>) -> Result<CentralizerSpec, CliError> {
    if let Some(path) = text.strip_prefix("file:") {
        return Ok(io::parse_spec_json(&read_file(path)?)?);
    }
    if let Some(base) = text.strip_prefix("shift:") {
        let q = q.ok_or_else(|| CliError::Config("shift needs --q".into()))?;
        let base = parse_centralizer(base, p, None)?;
        return Ok(shift_centralizer(&base, q)?);
    }
    match text {
        "kp" => Ok(CentralizerSpec::kalton_peck(p)),
        "rank" => Ok(CentralizerSpec::kalton_rank(p)),
        other => match other.strip_prefix("lipschitz:") {
            Some(name) => Ok(CentralizerSpec::preset(LipschitzPreset::from_name(name)?, p)),
            None => Err(CliError::Config(format!("unknown centralizer `{other}`"))),
        },
    }
}

fn read_file(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(Path::new(path)).map_err(|e| CliError::Parse(format!("{path}: {e}")))
}

/// Named multiplier sequences on `[1, dim]`.
pub fn preset_sequence(name: &str, dim: usize) -> Result<CSeq, CliError> {
    let f: Box<dyn Fn(f64) -> f64> = match name {
        "ones" => Box::new(|_| 1.0),
        "invlog" => Box::new(|n| 1.0 / (n + 1.0).ln()),
        "invsqrt" => Box::new(|n| 1.0 / n.sqrt()),
        "invn" => Box::new(|n| 1.0 / (n + 1.0)),
        other => match other.strip_prefix("geometric:") {
            Some(r) => {
                let r: f64 = r.parse().map_err(|_| CliError::Config(format!("bad ratio in `{other}`")))?;
                if !(r > 0.0 && r <= 1.0) {
                    return Err(CliError::Config("geometric ratio must lie in (0, 1]".into()));
                }
                Box::new(move |n| r.powf(n - 1.0))
            }
            None => return Err(CliError::Config(format!("unknown preset `{other}`"))),
        },
    };
    let values: Vec<f64> = (1..=dim).map(|n| f(n as f64)).collect();
    Ok(CSeq::from_real(dim, &values)?)
}

/// `preset:<name>`, `unit:k` or `file:<path>` (a bare path also works).
pub fn parse_sequence_source(text: &str, dim: usize) -> Result<CSeq, CliError> {
    if let Some(name) = text.strip_prefix("preset:") {
        return preset_sequence(name, dim);
    }
    if let Some(k) = text.strip_prefix("unit:") {
        let k: usize = k.parse().map_err(|_| CliError::Config(format!("bad index in `{text}`")))?;
        return Ok(CSeq::unit(dim, k)?);
    }
    let path = text.strip_prefix("file:").unwrap_or(text);
    Ok(io::parse_cseq_json(&read_file(path)?)?)
}

/// `diag:v1,v2,...`, `identity:N`, `ones:N`, `random:N` or `file:<path>`.
pub fn parse_matrix_source(text: &str, seed: u64) -> Result<CMatrix, CliError> {
    let size = |s: &str| -> Result<usize, CliError> {
        let n: usize = s.parse().map_err(|_| CliError::Config(format!("bad size in `{text}`")))?;
        if n == 0 || n.saturating_mul(n) > MAX_MATRIX_ENTRIES {
            return Err(CliError::Config(format!("matrix size must lie in [1, {MAX_SIDE}]")));
        }
        Ok(n)
    };
    if let Some(list) = text.strip_prefix("diag:") {
        let values: Vec<Complex64> = list
            .split(',')
            .map(|v| v.trim().parse::<f64>().map(|re| Complex64::new(re, 0.0)))
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::Config(format!("bad diagonal `{list}`")))?;
        if values.len() > MAX_SIDE {
            return Err(CliError::Config("diagonal too long".into()));
        }
        return Ok(CMatrix::from_diag(&values)?);
    }
    if let Some(n) = text.strip_prefix("identity:") {
        return Ok(CMatrix::identity(size(n)?));
    }
    if let Some(n) = text.strip_prefix("ones:") {
        let n = size(n)?;
        return Ok(CMatrix::from_real(n, n, &vec![1.0; n * n])?);
    }
    if let Some(n) = text.strip_prefix("random:") {
        let n = size(n)?;
        let mut rng = trial_rng(seed, 0);
        let data = random_gaussian(n * n, &mut rng).to_dense();
        return Ok(CMatrix::new(n, n, data)?);
    }
    let path = text.strip_prefix("file:").unwrap_or(text);
    Ok(io::parse_matrix_json(&read_file(path)?)?)
}

enum Output {
    Json(Value),
    Csv(String),
}

fn csv_table(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn seq_rows(x: &CSeq) -> String {
    csv_table("n,re,im", x.iter().map(|(k, v)| vec![k.to_string(), v.re.to_string(), v.im.to_string()]))
}

impl RunConfig {
    fn d(&self) -> Result<CSeq, CliError> {
        let src = self.d_source.as_deref().ok_or_else(|| CliError::Config("missing --d".into()))?;
        parse_sequence_source(src, self.dim)
    }

    fn input(&self, x: &Option<String>) -> Result<CSeq, CliError> {
        match x {
            Some(src) => parse_sequence_source(src, self.dim),
            None => self.d(),
        }
    }

    fn spec_value(&self) -> Value {
        serde_json::to_value(&self.centralizer).unwrap_or(Value::String(self.centralizer.label()))
    }
}

/// Runs a validated configuration and returns the process exit code.
pub fn run(config: &RunConfig) -> i32 {
    match execute(config).and_then(|out| emit(config, out)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("twistlab: {e}");
            e.exit_code()
        }
    }
}

fn emit(config: &RunConfig, out: Output) -> Result<(), CliError> {
    let text = match out {
        Output::Json(v) => {
            let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Output(e.to_string()))?;
            s.push('\n');
            s
        }
        Output::Csv(s) => s,
    };
    match &config.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Output(e.to_string()))
        }
    }
}

fn execute(cfg: &RunConfig) -> Result<Output, CliError> {
    match &cfg.command {
        Command::Norm(a) => run_norm(cfg, a),
        Command::Centralizer(a) | Command::Shift(a) => run_eval(cfg, a),
        Command::Curve(a) => run_curve(cfg, a),
        Command::Criterion(a) => run_criterion(cfg, a),
        Command::Defect(a) => run_defect(cfg, a),
        Command::Constant => run_constant(cfg),
        Command::Rademacher(a) => run_rademacher(cfg, a),
        Command::Average(a) => run_average(cfg, a),
        Command::TwistedNorm(a) => run_twisted(cfg, a),
    }
}

fn run_norm(cfg: &RunConfig, a: &NormArgs) -> Result<Output, CliError> {
    let spectrum = match &a.matrix {
        Some(src) => spectral::singular_values(&parse_matrix_source(src, cfg.seed)?)?,
        // a multiplication operator's singular values are its rearranged moduli
        None => SingularSpectrum { values: crate::seq::decreasing_rearrangement(&cfg.d()?) },
    };
    if a.spectrum {
        return Ok(match cfg.format {
            Format::Csv => Output::Csv(io::spectrum_csv(&spectrum)),
            Format::Json => Output::Json(json!({ "spectrum": spectrum.values })),
        });
    }
    let (name, p, value) = if let Some(p) = a.lp {
        let d = match &a.matrix {
            Some(_) => return Err(CliError::Config("--lp applies to sequences; use --schatten".into())),
            None => cfg.d()?,
        };
        ("lp", Some(p), lp_norm(&d, PExp::new(p)?)?)
    } else if let Some(p) = a.schatten {
        ("schatten", Some(p), spectrum.schatten(PExp::new(p)?))
    } else if a.macaev {
        ("macaev", None, spectrum.macaev())
    } else if a.lorentz {
        let d = CSeq::from_real(spectrum.values.len().max(1), &spectrum.values)?;
        ("lorentz", None, lorentz_log_norm(&d))
    } else if a.sup {
        ("sup", None, spectrum.largest())
    } else {
        return Err(CliError::Config("choose one of --lp, --schatten, --macaev, --lorentz, --sup".into()));
    };
    Ok(match cfg.format {
        Format::Json => Output::Json(json!({ "norm": name, "p": p, "value": value })),
        Format::Csv => Output::Csv(csv_table(
            "norm,p,value",
            [vec![name.to_string(), p.map(|v| v.to_string()).unwrap_or_default(), value.to_string()]],
        )),
    })
}

fn run_eval(cfg: &RunConfig, a: &EvalArgs) -> Result<Output, CliError> {
    let x = cfg.input(&a.x)?;
    let spec = &cfg.centralizer;
    let scale = spec.scale();
    let image = spec.eval(&x);
    if let Some(k) = image.has_non_finite() {
        return Err(CliError::Numerical(format!("non-finite output at index {k}")));
    }
    let total: Complex64 = image.iter().map(|(_, v)| v).sum();
    Ok(match cfg.format {
        Format::Csv => Output::Csv(seq_rows(&image)),
        Format::Json => Output::Json(json!({
            "centralizer": cfg.spec_value(),
            "label": spec.label(),
            "scale": scale,
            "input_norm": x.norm(scale),
            "output_norm": image.norm(scale),
            "coordinate_sum": [total.re, total.im],
            "output": image,
        })),
    })
}

fn run_curve(cfg: &RunConfig, a: &CurveArgs) -> Result<Output, CliError> {
    let d = cfg.d()?;
    let n = a.n.unwrap_or(cfg.dim);
    let curve = divergence_curve(&d, &cfg.centralizer, n)?;
    if let Some((k, _)) = curve.iter().find(|(_, r)| !r.is_finite()) {
        return Err(CliError::Numerical(format!("non-finite ratio at n = {k}")));
    }
    Ok(match cfg.format {
        Format::Csv => Output::Csv(csv_table("n,ratio", curve.iter().map(|(k, r)| vec![k.to_string(), r.to_string()]))),
        Format::Json => {
            let at = |m: usize| curve.get(m.max(1) - 1).map(|&(_, r)| r);
            let (last, tenth) = (at(n), at(n / 10));
            let mut v = json!({
                "centralizer": cfg.spec_value(),
                "truncation": n,
                "trend": {
                    "ratio_at_n": last,
                    "ratio_at_n_over_10": tenth,
                    "growing": matches!((last, tenth), (Some(l), Some(t)) if l > t),
                },
                "curve": curve,
            });
            if matches!(cfg.centralizer.kind, CentralizerKind::KaltonPeck) && cfg.centralizer.p.value() == 2.0 {
                let closed = kalton_peck_closed_form(&d, n)?;
                let err = curve
                    .iter()
                    .zip(&closed)
                    .map(|((_, a), (_, b))| if *b == 0.0 { a.abs() } else { ((a - b) / b).abs() })
                    .fold(0.0, f64::max);
                v["closed_form_max_rel_err"] = json!(err);
            }
            Output::Json(v)
        }
    })
}

fn run_criterion(cfg: &RunConfig, a: &CriterionArgs) -> Result<Output, CliError> {
    if !(a.cap > 0.0 && a.cap.is_finite()) {
        return Err(CliError::Config("--cap must be positive".into()));
    }
    let report = liftability_criterion(&cfg.d()?, a.cap);
    Ok(match cfg.format {
        Format::Json => Output::Json(serde_json::to_value(&report).map_err(|e| CliError::Output(e.to_string()))?),
        Format::Csv => Output::Csv(csv_table(
            "bounded,cap,max_term,witness,lorentz_norm,head_max,tail_max,truncation",
            [vec![
                report.bounded.to_string(),
                report.cap.to_string(),
                report.max_term.to_string(),
                report.witness.map(|w| w.to_string()).unwrap_or_default(),
                report.lorentz_norm.to_string(),
                report.head_max.to_string(),
                report.tail_max.to_string(),
                report.truncation.to_string(),
            ]],
        )),
    })
}

fn build_family(cfg: &RunConfig, a: &DefectArgs, d: &CSeq) -> Result<Vec<CSeq>, CliError> {
    match a.family.as_str() {
        "sn" => Ok(sn_test_family(d, a.n.unwrap_or(cfg.dim.min(256)))?),
        "units" => Ok((1..=cfg.dim).map(|k| CSeq::unit(cfg.dim, k)).collect::<Result<_, _>>()?),
        other => match other.strip_prefix("random:") {
            Some(k) => {
                let k: u64 = k.parse().map_err(|_| CliError::Config(format!("bad family `{other}`")))?;
                let p = cfg.centralizer.scale();
                Ok((0..k).map(|t| random_unit(cfg.dim, p, &mut trial_rng(cfg.seed, t))).collect())
            }
            None => Err(CliError::Config(format!("unknown family `{other}`"))),
        },
    }
}

fn run_defect(cfg: &RunConfig, a: &DefectArgs) -> Result<Output, CliError> {
    let d = cfg.d()?;
    let family = build_family(cfg, a, &d)?;
    if let Some(list) = &a.catalog {
        let catalog: Vec<CentralizerSpec> =
            list.split(',').map(|s| parse_centralizer(s.trim(), cfg.p, cfg.q)).collect::<Result<_, _>>()?;
        let est = estimate_uniform_defect(&d, &catalog, &family, cfg.seed)?;
        return Ok(match cfg.format {
            Format::Json => Output::Json(io::uniform_estimate_value(&est)?),
            Format::Csv => Output::Csv(csv_table(
                "centralizer,defect",
                est.per_centralizer.iter().map(|e| vec![e.centralizer.label(), e.defect.to_string()]),
            )),
        });
    }
    let mode: DefectMode = a.mode.parse().map_err(CliError::Config)?;
    let spec = &cfg.centralizer;
    let witness = match a.witness.as_str() {
        "auto" => witness_from_centralizer(&d, spec),
        "zero" => CSeq::zeros(d.dim())?,
        "median" => diagnostics::median_witness(&d, spec, &family)?,
        other => parse_sequence_source(other, cfg.dim)?,
    };
    let mut report = lift_defect(&d, spec, &witness, &family, mode)?;
    report.seed = Some(cfg.seed);
    Ok(match cfg.format {
        Format::Json => Output::Json(io::defect_report_value(&report)),
        Format::Csv => Output::Csv(csv_table(
            "k,ratio",
            report.ratios.iter().enumerate().map(|(k, r)| vec![(k + 1).to_string(), r.to_string()]),
        )),
    })
}

fn run_constant(cfg: &RunConfig) -> Result<Output, CliError> {
    let spec = &cfg.centralizer;
    let scale = spec.scale();
    let c_lower = centralizer_constant_lower(spec, scale, cfg.trials, cfg.dim, cfg.seed);
    let q_lower = quasilinearity_lower(spec, cfg.trials, cfg.dim, cfg.seed)?;
    Ok(match cfg.format {
        Format::Json => Output::Json(json!({
            "centralizer": cfg.spec_value(),
            "label": spec.label(),
            "centralizer_constant_lower": c_lower,
            "quasilinearity_lower": q_lower,
            "trials": cfg.trials,
            "dim": cfg.dim,
            "seed": cfg.seed,
        })),
        Format::Csv => Output::Csv(csv_table(
            "centralizer,centralizer_constant_lower,quasilinearity_lower,trials,dim,seed",
            [vec![
                spec.label(),
                c_lower.to_string(),
                q_lower.to_string(),
                cfg.trials.to_string(),
                cfg.dim.to_string(),
                cfg.seed.to_string(),
            ]],
        )),
    })
}

fn run_rademacher(cfg: &RunConfig, a: &RademacherArgs) -> Result<Output, CliError> {
    let k = a.k;
    if k == 0 || k > diagnostics::MAX_RADEMACHER_TERMS {
        return Err(CliError::Config(format!("--k must lie in [1, {}]", diagnostics::MAX_RADEMACHER_TERMS)));
    }
    let scale = cfg.centralizer.scale();
    let xs: Vec<CSeq> = match a.xs.as_str() {
        "units" => {
            if cfg.dim < k {
                return Err(CliError::Config("--dim must be at least --k for unit vectors".into()));
            }
            let w = (k as f64).powf(-1.0 / 2.0);
            (1..=k).map(|i| CSeq::unit(cfg.dim, i).map(|e| e.scale_real(w))).collect::<Result<_, _>>()?
        }
        "random" => (0..k as u64)
            .map(|t| random_unit(cfg.dim, scale, &mut trial_rng(cfg.seed, t)).scale_real((k as f64).powf(-0.5)))
            .collect(),
        other => return Err(CliError::Config(format!("unknown --xs `{other}`"))),
    };
    let value = rademacher_nonlinearity(&cfg.centralizer, &xs)?;
    Ok(match cfg.format {
        Format::Json => Output::Json(json!({
            "centralizer": cfg.spec_value(),
            "k": k,
            "patterns": 1u64 << k,
            "value": value,
        })),
        Format::Csv => Output::Csv(csv_table("k,patterns,value", [vec![k.to_string(), (1u64 << k).to_string(), value.to_string()]])),
    })
}

fn run_average(cfg: &RunConfig, a: &AverageArgs) -> Result<Output, CliError> {
    let l = parse_matrix_source(&a.matrix, cfg.seed)?;
    let avg = cantor_average_matrix(&l)?;
    let lambda = CSeq::from_complex(avg.rows(), &avg.diagonal())?;
    Ok(match cfg.format {
        Format::Csv => Output::Csv(seq_rows(&lambda)),
        Format::Json => Output::Json(json!({
            "diagonal": lambda,
            "max_offdiag": avg.max_off_diagonal(),
            "input_max_offdiag": l.max_off_diagonal(),
        })),
    })
}

fn parse_scalar(text: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::Config(format!("bad scalar `{text}` (expected re[,im])"));
    let mut parts = text.split(',');
    let re: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let im: f64 = match parts.next() {
        Some(s) => s.trim().parse().map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() || !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

fn run_twisted(cfg: &RunConfig, a: &TwistedArgs) -> Result<Output, CliError> {
    let value = if let Some(path) = &a.point {
        let text = read_file(path.strip_prefix("file:").unwrap_or(path))?;
        let (z, _) = io::parse_twisted_point_json(&text)?;
        json!({ "kind": "twisted", "quasinorm": twisted_quasinorm(&z) })
    } else {
        let x = cfg.input(&a.x)?;
        if let Some(t) = &a.t {
            let w = ScalarTwistedPoint { t: parse_scalar(t)?, x };
            json!({ "kind": "scalar", "quasinorm": scalar_twisted_norm(&w, &cfg.centralizer).map_err(|e| CliError::Config(e.to_string()))? })
        } else {
            let y = match &a.y {
                Some(src) => parse_sequence_source(src, cfg.dim)?,
                None => CSeq::zeros(x.dim())?,
            };
            let z = TwistedPoint::new(y, x, cfg.centralizer.handle()).map_err(|e| CliError::Config(e.to_string()))?;
            json!({ "kind": "twisted", "quasinorm": twisted_quasinorm(&z) })
        }
    };
    Ok(match cfg.format {
        Format::Json => Output::Json(value),
        Format::Csv => {
            let mut s = String::from("kind,quasinorm\n");
            writeln!(s, "{},{}", value["kind"].as_str().unwrap_or(""), value["quasinorm"]).expect("string write");
            Output::Csv(s)
        }
    })
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))
        })?;
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Parses arguments, runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("twistlab: {e}");
        return e.exit_code();
    }
    match RunConfig::from_cli(cli) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            eprintln!("twistlab: {e}");
            e.exit_code()
        }
    }
}
