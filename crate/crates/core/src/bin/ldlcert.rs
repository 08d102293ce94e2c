use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use ldlcert::analysis::{analyze_behavior, analyze_joint, AnalyzeOptions, ErrorMethod};
use ldlcert::bridge::{verify_bridge, BridgeParams, DEFAULT_LAMBDA_SUPPORT};
use ldlcert::correlations::{
    condition_on_inputs, from_counts, postselect, Behavior, BootstrapConfig, EstimatorConfig, JointDistribution,
    Scenario,
};
use ldlcert::files::{self, DataFile};
use ldlcert::ldl::{
    enumerate_ldl_vertices, membership_against, separation_margin, Convention, DetectionBounds, Efficiencies,
};
use ldlcert::lp::{Certificate, Scalar, SolverOptions};
use ldlcert::mdl::{enumerate_mdl_vertices, mdl_separation_margin, membership_mdl_against, MdlBounds};
use ldlcert::quantum::{apply_detection, born_behavior, hardy_measurements, hardy_state, sample_detected_counts};
use ldlcert::strategies::{assignment_mix, mix_coefficients};
use ldlcert::Error;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Certify limited-detection and measurement-dependent local explanations of
/// Bell-test data.
#[derive(Parser, Debug)]
#[command(name = "ldlcert", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct Global {
    /// Write the machine-readable report here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the JSON report on standard output instead of the summary.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for vertex enumeration and bridge trials.
    /// LDLCERT_THREADS takes precedence.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Hardy-type terms, critical efficiency ratio and combined threshold.
    Analyze(AnalyzeArgs),
    /// Decide membership in the postselected LDL set (or the MDL polytope).
    Membership(MembershipArgs),
    /// Emit the ideal Hardy behavior or simulated counts.
    Quantum(QuantumArgs),
    /// Enumerate LDL or MDL vertices.
    Vertices(VerticesArgs),
    /// Randomized check of the MDLDL to MDL reduction.
    Bridge(BridgeArgs),
    /// Complete non-detections with local answers.
    Strategy(StrategyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ConventionArg {
    PerParty,
    Joint,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::PerParty => Convention::PerParty,
            ConventionArg::Joint => Convention::Joint,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ErrorsArg {
    Delta,
    Bootstrap,
    None,
}

#[derive(Args, Debug, Serialize)]
struct AnalyzeArgs {
    input: PathBuf,
    /// Upper detection bounds at which to report the required lower bound.
    #[arg(long = "eta-max", value_delimiter = ',', default_values_t = [1.0, 0.5, 0.1])]
    eta_max: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ConventionArg::PerParty)]
    convention: ConventionArg,
    /// Divide a joint table by its total before conditioning.
    #[arg(long)]
    renormalize: bool,
    #[arg(long, value_enum, default_value_t = ErrorsArg::Delta)]
    errors: ErrorsArg,
    #[arg(long, default_value_t = 1000)]
    resamples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Float,
    Exact,
}

#[derive(Args, Debug, Serialize)]
struct MembershipArgs {
    input: PathBuf,
    #[arg(long = "eta-min", default_value_t = 0.0)]
    eta_min: f64,
    #[arg(long = "eta-max", default_value_t = 1.0)]
    eta_max: f64,
    #[arg(long, value_enum, default_value_t = ConventionArg::PerParty)]
    convention: ConventionArg,
    /// `uniform-unknown`, `observed` (lossy input only) or an efficiencies file.
    #[arg(long, default_value = "uniform-unknown")]
    efficiencies: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Float)]
    mode: ModeArg,
    /// Test the MDL polytope with input-distribution bounds `L H` instead.
    #[arg(long, num_args = 2, value_names = ["L", "H"])]
    mdl: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum EmitArg {
    Behavior,
    Lossy,
    Counts,
}

#[derive(Args, Debug, Serialize)]
struct QuantumArgs {
    #[arg(long, value_enum, default_value_t = EmitArg::Behavior)]
    emit: EmitArg,
    #[arg(long, default_value_t = 0)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Detection efficiencies of the two parties.
    #[arg(long, num_args = 2, value_names = ["ETA_A", "ETA_B"])]
    loss: Option<Vec<f64>>,
}

#[derive(Args, Debug, Serialize)]
struct VerticesArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [2, 2])]
    inputs: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 2])]
    outcomes: Vec<usize>,
    #[arg(long = "eta-min", default_value_t = 0.5)]
    eta_min: f64,
    #[arg(long = "eta-max", default_value_t = 1.0)]
    eta_max: f64,
    #[arg(long, value_enum, default_value_t = ConventionArg::PerParty)]
    convention: ConventionArg,
    #[arg(long, num_args = 2, value_names = ["L", "H"])]
    mdl: Option<Vec<f64>>,
}

#[derive(Args, Debug, Serialize)]
struct BridgeArgs {
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ConventionArg::PerParty)]
    convention: ConventionArg,
    #[arg(long, default_value_t = 0.15)]
    l: f64,
    #[arg(long, default_value_t = 0.4)]
    h: f64,
    #[arg(long = "eta-min", default_value_t = 0.6)]
    eta_min: f64,
    #[arg(long = "eta-max", default_value_t = 1.0)]
    eta_max: f64,
    #[arg(long = "lambda-support", default_value_t = DEFAULT_LAMBDA_SUPPORT)]
    lambda_support: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 2])]
    inputs: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 2])]
    outcomes: Vec<usize>,
}

#[derive(Args, Debug, Serialize)]
struct StrategyArgs {
    /// Nonlocal behavior (behavior or joint table).
    input: PathBuf,
    #[arg(long)]
    eta: f64,
    #[arg(long = "eta-min-target")]
    eta_min_target: f64,
    /// Single-party local answers for Alice; uniform when absent.
    #[arg(long = "local-a")]
    local_a: Option<PathBuf>,
    #[arg(long = "local-b")]
    local_b: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Io(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) | Failure::Usage(_) => 2,
            Failure::Lib(e) => match e {
                Error::Shape { .. } | Error::TooLarge { .. } | Error::DegenerateBounds | Error::UnsupportedConvention(_) => 3,
                Error::IllFormed(_) | Error::Unsolved { .. } | Error::Numerical(_) => 4,
                _ => 2,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Io(m) | Failure::Usage(m) => f.write_str(m),
        }
    }
}

type Outcome = std::result::Result<(Value, String, u8), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = std::env::var("LDLCERT_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(cli.global.threads)
        .max(1);
    // only fails if a pool already exists
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();

    match run(&cli.command) {
        Ok((mut report, summary, code)) => {
            if report.get("invocation").is_none() {
                report["invocation"] = json!({
                    "version": VERSION,
                    "command": &cli.command,
                    "threads": threads,
                });
            }
            if let Some(path) = &cli.global.out {
                if let Err(e) = write_json(path, &report) {
                    eprintln!("error: {e}");
                    return ExitCode::from(e.code());
                }
            }
            let text = if cli.global.json {
                serde_json::to_string_pretty(&report).expect("serializable") + "\n"
            } else {
                summary
            };
            // a closed pipe downstream is not our failure
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn write_json(path: &Path, v: &Value) -> std::result::Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).expect("serializable") + "\n";
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read(path: &Path) -> std::result::Result<DataFile, Failure> {
    match files::read(path) {
        Err(Error::Parse(m)) if !path.exists() => Err(Failure::Io(m)),
        other => Ok(other?),
    }
}

fn run(cmd: &Command) -> Outcome {
    match cmd {
        Command::Analyze(a) => analyze(a),
        Command::Membership(a) => membership(a),
        Command::Quantum(a) => quantum(a),
        Command::Vertices(a) => vertices(a),
        Command::Bridge(a) => bridge(a),
        Command::Strategy(a) => strategy(a),
    }
}

fn estimator(a: &AnalyzeArgs) -> EstimatorConfig {
    match a.errors {
        ErrorsArg::Bootstrap => EstimatorConfig {
            bootstrap: Some(BootstrapConfig { resamples: a.resamples, seed: a.seed }),
        },
        _ => EstimatorConfig::default(),
    }
}

fn analyze(a: &AnalyzeArgs) -> Outcome {
    let opts = AnalyzeOptions {
        eta_max: a.eta_max.clone(),
        convention: a.convention.into(),
        renormalize: a.renormalize,
        errors: match a.errors {
            ErrorsArg::Delta => Some(ErrorMethod::Delta),
            ErrorsArg::Bootstrap => Some(ErrorMethod::Bootstrap { resamples: a.resamples, seed: a.seed }),
            ErrorsArg::None => None,
        },
    };
    let mut notes = Vec::new();
    let report = match read(&a.input)? {
        DataFile::Counts(c) => analyze_joint(&from_counts(&c, &estimator(a))?, &opts)?,
        DataFile::Joint(j) => analyze_joint(&j, &opts)?,
        DataFile::Behavior(b) => {
            notes.push("conditional input: no input distribution, so no combined threshold or errors");
            analyze_behavior(&b, &opts)?
        }
        DataFile::Lossy(l) => {
            notes.push("lossy input postselected on joint detection");
            analyze_behavior(&postselect(&l)?.0, &opts)?
        }
        DataFile::Efficiencies(_) => return Err(Failure::Usage("analyze needs a table of outcomes".into())),
    };
    let mut v = report.to_json();
    v["notes"] = json!(notes);
    Ok((v, report.summary(), 0))
}

/// Postselected behavior plus the observed efficiencies when the data has them.
fn behavior_of(d: DataFile) -> std::result::Result<(Behavior, Option<ldlcert::correlations::EfficiencyMap>), Failure> {
    Ok(match d {
        DataFile::Behavior(b) => (b, None),
        DataFile::Joint(j) => (condition_on_inputs(&j)?.0, None),
        DataFile::Counts(c) => (condition_on_inputs(&from_counts(&c, &EstimatorConfig::default())?)?.0, None),
        DataFile::Lossy(l) => {
            let (b, e) = postselect(&l)?;
            (b, Some(e))
        }
        DataFile::Efficiencies(_) => return Err(Failure::Usage("expected a table of outcomes".into())),
    })
}

fn joint_of(d: DataFile) -> std::result::Result<JointDistribution, Failure> {
    Ok(match d {
        DataFile::Joint(j) => j,
        DataFile::Counts(c) => from_counts(&c, &EstimatorConfig::default())?,
        _ => return Err(Failure::Usage("MDL membership needs a joint table or counts".into())),
    })
}

fn membership(a: &MembershipArgs) -> Outcome {
    let data = read(&a.input)?;
    let opts = SolverOptions::default();
    if let Some(lh) = &a.mdl {
        let bounds = MdlBounds::new(lh[0], lh[1])?;
        let j = joint_of(data)?;
        let vs = enumerate_mdl_vertices(j.scenario(), &bounds)?;
        return match a.mode {
            ModeArg::Float => mdl_outcome(&vs, &j, membership_mdl_against::<f64>(&vs, &j, &opts)?, bounds),
            ModeArg::Exact => mdl_outcome(&vs, &j, membership_mdl_against::<BigRational>(&vs, &j, &opts)?, bounds),
        };
    }
    let bounds = DetectionBounds::new(a.eta_min, a.eta_max, a.convention.into())?;
    let (b, observed) = behavior_of(data)?;
    let eff = match a.efficiencies.as_str() {
        "uniform-unknown" => Efficiencies::UniformUnknown,
        "observed" => Efficiencies::Known(
            observed.ok_or_else(|| Failure::Usage("observed efficiencies need a lossy input".into()))?,
        ),
        path => match read(Path::new(path))? {
            DataFile::Efficiencies(e) => Efficiencies::Known(e),
            _ => return Err(Failure::Usage(format!("{path} is not an efficiencies file"))),
        },
    };
    let vs = enumerate_ldl_vertices(b.scenario(), &[bounds])?;
    match a.mode {
        ModeArg::Float => ldl_outcome::<f64>(&vs, &b, &eff, &opts),
        ModeArg::Exact => ldl_outcome::<BigRational>(&vs, &b, &eff, &opts),
    }
}

fn verdict(feasible: bool) -> (&'static str, u8) {
    if feasible {
        ("feasible", 0)
    } else {
        ("infeasible", 1)
    }
}

fn ldl_outcome<T: Scalar>(
    vs: &ldlcert::ldl::VertexSet,
    b: &Behavior,
    eff: &Efficiencies,
    opts: &SolverOptions,
) -> Outcome {
    let m = membership_against::<T>(vs, b, eff, opts)?;
    let margin = match &m.certificate {
        Certificate::Infeasible { dual } => separation_margin(vs, b, eff, dual)?,
        Certificate::Feasible { .. } => None,
    };
    let (status, code) = verdict(m.certificate.is_feasible());
    let mut summary = format!("LDL membership ({} vertices): {status}\n", m.vertices);
    if let Some(t) = &m.detected_mass {
        summary += &format!("common detection probability of the explaining model: {:.6}\n", t.to_f64());
    }
    if let Some(g) = &margin {
        summary += &format!("separation margin of the dual certificate: {:.3e}\n", g.to_f64());
    }
    for n in &m.notes {
        summary += &format!("note: {n}\n");
    }
    let v = json!({
        "polytope": "ldl",
        "status": status,
        "certificate": m.certificate.to_json(),
        "detected_mass": m.detected_mass.as_ref().map(Scalar::to_json),
        "separation_margin": margin.as_ref().map(Scalar::to_json),
        "vertices": m.vertices,
        "convention": m.convention,
        "bounds": vs.bounds(),
        "efficiencies": match eff { Efficiencies::UniformUnknown => json!("uniform-unknown"), Efficiencies::Known(e) => json!(e.values()) },
        "notes": m.notes,
    });
    Ok((v, summary, code))
}

fn mdl_outcome<T: Scalar>(
    vs: &ldlcert::mdl::MdlVertexSet,
    j: &JointDistribution,
    cert: Certificate<T>,
    bounds: MdlBounds,
) -> Outcome {
    let margin = match &cert {
        Certificate::Infeasible { dual } => Some(mdl_separation_margin(vs, j, dual)?),
        Certificate::Feasible { .. } => None,
    };
    let (status, code) = verdict(cert.is_feasible());
    let mut summary = format!("MDL membership ({} vertices): {status}\n", vs.len());
    if let Some(g) = &margin {
        summary += &format!("separation margin of the dual certificate: {:.3e}\n", g.to_f64());
    }
    let v = json!({
        "polytope": "mdl",
        "status": status,
        "certificate": cert.to_json(),
        "separation_margin": margin.as_ref().map(Scalar::to_json),
        "vertices": vs.len(),
        "bounds": bounds,
    });
    Ok((v, summary, code))
}

fn quantum(a: &QuantumArgs) -> Outcome {
    let meas = hardy_measurements();
    let b = born_behavior(&hardy_state(), &meas);
    let measurements = json!({ "theta": meas.theta(), "relabelled": meas.relabelled() });
    let (etas, lossy) = match (&a.loss, a.emit) {
        (Some(l), _) => (Some(l.clone()), true),
        (None, EmitArg::Behavior) => (None, false),
        (None, _) => (Some(vec![1.0, 1.0]), true),
    };
    let data = if !lossy && a.shots == 0 {
        DataFile::Behavior(b)
    } else {
        let e = etas.expect("set for lossy output");
        let l = apply_detection(&b, &[vec![e[0]; 2], vec![e[1]; 2]])?;
        match a.emit {
            EmitArg::Counts => DataFile::Counts(sample_detected_counts(&l, a.shots, a.seed)?),
            EmitArg::Lossy => DataFile::Lossy(l),
            EmitArg::Behavior => DataFile::Behavior(postselect(&l)?.0),
        }
    };
    let mut v = files::to_json(&data);
    v["measurements"] = measurements;
    let summary = match &data {
        DataFile::Counts(c) => format!("{} jointly detected events\n", c.total()),
        DataFile::Behavior(b) => format!(
            "Hardy behavior: P(00|00) = {:.7}, P(01|01) = {:.1e}, P(10|10) = {:.1e}, P(00|11) = {:.1e}\n",
            b.get(&[0, 0], &[0, 0]),
            b.get(&[0, 1], &[0, 1]),
            b.get(&[1, 0], &[1, 0]),
            b.get(&[0, 0], &[1, 1])
        ),
        _ => "lossy Hardy behavior\n".to_string(),
    };
    Ok((v, summary, 0))
}

fn vertices(a: &VerticesArgs) -> Outcome {
    let s = Scenario::new(a.inputs.clone(), a.outcomes.clone())?;
    let (v, n) = match &a.mdl {
        Some(lh) => {
            let vs = enumerate_mdl_vertices(&s, &MdlBounds::new(lh[0], lh[1])?)?;
            (files::mdl_vertex_dump(&vs), vs.len())
        }
        None => {
            let bounds = DetectionBounds::new(a.eta_min, a.eta_max, a.convention.into())?;
            let vs = enumerate_ldl_vertices(&s, &[bounds])?;
            (files::ldl_vertex_dump(&vs), vs.len())
        }
    };
    Ok((v, format!("{n} vertices\n"), 0))
}

fn bridge(a: &BridgeArgs) -> Outcome {
    let s = Scenario::new(a.inputs.clone(), a.outcomes.clone())?;
    let params = BridgeParams {
        mdl: MdlBounds::new(a.l, a.h)?,
        detection: DetectionBounds::new(a.eta_min, a.eta_max, a.convention.into())?,
    };
    let r = verify_bridge(a.trials, a.seed, &s, &params, a.lambda_support)?;
    let summary = format!(
        "{} trials, {} failures; transformed bounds [{:.6}, {:.6}]{}\n",
        r.trials,
        r.failures,
        r.transformed.bounds.l,
        r.transformed.bounds.h,
        if r.transformed.clamped { " (upper bound clamped to 1)" } else { "" }
    );
    let code = if r.failures == 0 { 0 } else { 1 };
    Ok((serde_json::to_value(&r).expect("serializable"), summary, code))
}

fn local_table(path: &Option<PathBuf>) -> std::result::Result<Option<Behavior>, Failure> {
    match path {
        None => Ok(None),
        Some(p) => match read(p)? {
            DataFile::Behavior(b) => Ok(Some(b)),
            _ => Err(Failure::Usage(format!("{} is not a behavior file", p.display()))),
        },
    }
}

fn strategy(a: &StrategyArgs) -> Outcome {
    let (p, _) = behavior_of(read(&a.input)?)?;
    let c = mix_coefficients(a.eta, a.eta_min_target)?;
    let la = local_table(&a.local_a)?;
    let lb = local_table(&a.local_b)?;
    let out = assignment_mix(&p, a.eta, a.eta_min_target, la.as_ref(), lb.as_ref())?;
    let mut v = files::to_json(&DataFile::Behavior(out));
    v["coefficients"] = serde_json::to_value(c).expect("serializable");
    let summary = format!(
        "mixture weights: nonlocal {:.6}, cross {:.6}, local {:.6}; effective detection {:.6}\n",
        c.nonlocal,
        c.cross,
        c.local,
        a.eta + (1.0 - a.eta) * a.eta_min_target
    );
    Ok((v, summary, 0))
}
