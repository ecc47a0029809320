//! Command-line front end: `score`, `verify`, `deriv` and `demo`.
//!
//! Exit codes: 0 success, 1 failed verification or demonstration, 2 usage,
//! parse or configuration error, 3 domain error (observation outside the
//! forecast's domain, undefined score, refused cone membership, infeasible
//! direction).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};

use crate::boundary_lab::{
    binary_shannon, boundary_blowup_trace, decimal_path, demo_grids, nowhere_dense_witness, sup_dichotomy_demo,
    DyadicSequence,
};
use crate::convexity::{
    analytic_directional_derivative, default_steps, interior_quadratic_cone, right_directional_derivative, run_suite,
    DerivativeEstimate, Suite, Tolerances, VerificationReport,
};
use crate::densities::{
    cone_check, default_schedule, feasible_direction, make_density_with, ConeReport, ConeSpec, Density, DensityConfig,
    Field,
};
use crate::error::Error;
use crate::pairing::QuadratureScheme;
use crate::rules::{ScoreFunction, ScoringRuleId};

#[derive(Debug, Parser)]
#[command(
    name = "cone-scoring",
    version,
    about = "Proper scoring rules as subgradients of sublinear entropies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score a forecast density against observations.
    Score(ScoreArgs),
    /// Run the convexity verification suites.
    Verify(VerifyArgs),
    /// Directional derivative of an entropy: difference quotients against p̂·S(q̂).
    Deriv(DerivArgs),
    /// Boundary demonstrations.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Args)]
struct QuadArgs {
    /// Panels per unit length.
    #[arg(long)]
    panels: Option<usize>,
    /// Gauss-Legendre nodes per panel.
    #[arg(long)]
    nodes: Option<usize>,
    /// Fixed truncation radius (default: from the family's decay).
    #[arg(long)]
    radius: Option<f64>,
    /// Tail mass dropped by truncation.
    #[arg(long = "tail-tol")]
    tail_tol: Option<f64>,
}

impl QuadArgs {
    fn scheme(&self) -> Result<QuadratureScheme, Error> {
        let mut s = QuadratureScheme::default();
        if let Some(p) = self.panels {
            s.panels = p;
        }
        if let Some(n) = self.nodes {
            s.nodes = n;
        }
        if self.radius.is_some() {
            s.radius = self.radius;
        }
        if let Some(t) = self.tail_tol {
            s.tail_tol = t;
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// log | hyvarinen | quadratic | sup
    #[arg(long)]
    rule: ScoringRuleId,
    /// Forecast density (JSON).
    #[arg(long)]
    forecast: PathBuf,
    /// Observations: single-column CSV, header optional.
    #[arg(long)]
    obs: PathBuf,
    /// Output file; `.csv` writes CSV, anything else JSON. Default: JSON on stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Refuse forecasts outside the rule's cone; optionally a cone spec (JSON).
    #[arg(long = "strict-cone", num_args = 0..=1, default_missing_value = "", value_name = "FILE")]
    strict_cone: Option<String>,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// log | hyvarinen | quadratic | sup; every rule when omitted.
    #[arg(long)]
    rule: Option<ScoringRuleId>,
    #[arg(long, default_value = "all")]
    suite: Suite,
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Tolerance of the quadrature-level identities.
    #[arg(long)]
    tol: Option<f64>,
    /// Report file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Debug, Args)]
struct DerivArgs {
    /// log | hyvarinen | quadratic | sup
    #[arg(long)]
    rule: ScoringRuleId,
    /// Base point (JSON density).
    #[arg(long)]
    q: PathBuf,
    /// Direction (JSON density).
    #[arg(long)]
    p: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Refuse base points outside the rule's cone and infeasible directions.
    #[arg(long = "strict-cone", num_args = 0..=1, default_missing_value = "", value_name = "FILE")]
    strict_cone: Option<String>,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DemoName {
    BinaryBoundary,
    NowhereDense,
    SupMode,
}

#[derive(Debug, Args)]
struct DemoArgs {
    #[arg(long, value_enum)]
    name: DemoName,
    /// Scales for the nowhere-dense witness (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "10,1,0.1,0.01")]
    alpha: Vec<f64>,
    /// Length of the path (binary-boundary) or of the sequence (nowhere-dense).
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long = "grid-points", default_value_t = 401)]
    grid_points: usize,
    /// JSON output file; without it the JSON follows the text on stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    quad: QuadArgs,
}

/// A failure with its exit code.
struct Exit(i32, String);

impl Exit {
    fn config(e: impl ToString) -> Self {
        Exit(2, e.to_string())
    }

    fn domain(e: impl ToString) -> Self {
        Exit(3, e.to_string())
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Score(a) => cmd_score(&a, stdout),
        Command::Verify(a) => cmd_verify(&a, stdout),
        Command::Deriv(a) => cmd_deriv(&a, stdout),
        Command::Demo(a) => cmd_demo(&a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(Exit(code, msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            code
        }
    }
}

fn read(path: &Path) -> Result<String, Exit> {
    fs::read_to_string(path).map_err(|e| Exit::config(format!("{}: {e}", path.display())))
}

fn load_density(path: &Path, scheme: &QuadratureScheme) -> Result<Density, Exit> {
    let config =
        DensityConfig::from_json(&read(path)?).map_err(|e| Exit::config(format!("{}: {e}", path.display())))?;
    make_density_with(&config, scheme).map_err(|e| Exit::config(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), Exit> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Exit::config(format!("{}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(Exit::config),
    }
}

/// Observations from a single-column CSV; a non-numeric first row is a header.
pub fn parse_observations(text: &str) -> Result<Vec<f64>, Error> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.len() != 1 {
            return Err(Error::Parse(format!(
                "row {}: expected one column, found {}",
                i + 1,
                rec.len()
            )));
        }
        let field = &rec[0];
        match field.parse::<f64>() {
            Ok(x) if x.is_finite() => out.push(x),
            Ok(_) => return Err(Error::Parse(format!("row {}: non-finite observation `{field}`", i + 1))),
            Err(_) if i == 0 => {}
            Err(_) => return Err(Error::Parse(format!("row {}: not a number: `{field}`", i + 1))),
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("no observations".into()));
    }
    Ok(out)
}

/// The cone a rule is certified on when strict mode is requested without a spec.
pub fn default_cone(rule: ScoringRuleId, q: &Density) -> ConeSpec {
    if q.grid_data().is_some() {
        return ConeSpec::GridPositive;
    }
    let d = q.dim() as f64;
    match rule {
        ScoringRuleId::Logarithmic => ConeSpec::ShannonEnvelope {
            c1: 1e-6,
            c2: 10.0,
            a: d + 3.0,
            probes: None,
        },
        ScoringRuleId::Hyvarinen => ConeSpec::HyvarinenGrowth {
            c1: 2.0,
            c2: 40.0,
            k: 2.0,
            probes: None,
        },
        ScoringRuleId::Quadratic => interior_quadratic_cone(),
        ScoringRuleId::Supremum => ConeSpec::GridPositive,
    }
}

fn strict_spec(arg: &Option<String>, rule: ScoringRuleId, q: &Density) -> Result<Option<ConeSpec>, Exit> {
    let Some(a) = arg else { return Ok(None) };
    let spec = if a.is_empty() {
        default_cone(rule, q)
    } else {
        ConeSpec::from_json(&read(Path::new(a))?).map_err(|e| Exit::config(format!("{a}: {e}")))?
    };
    spec.validate(q.dim()).map_err(Exit::config)?;
    Ok(Some(spec))
}

fn require_member(q: &Density, spec: &ConeSpec, scheme: &QuadratureScheme) -> Result<ConeReport, Exit> {
    let report = cone_check(q, spec, scheme);
    if !report.member {
        let detail = match (report.violations.first(), &report.note) {
            (Some(v), _) => format!("{} violated at {:?} (residual {:.3e})", v.condition, v.x, v.residual),
            (None, Some(n)) => n.clone(),
            (None, None) => String::new(),
        };
        return Err(Exit::domain(format!(
            "density is outside the {} cone: {detail}",
            spec.kind()
        )));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// score

/// A score, with `-∞` written as the string `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreValue(pub f64);

impl Serialize for ScoreValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRecord {
    pub x: f64,
    pub score: ScoreValue,
    pub rule: ScoringRuleId,
    pub forecast: String,
    /// Log score at a zero of the forecast; `score` is `-inf` and the mean
    /// uses the floored value `clamped_score`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clamped_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreSummary {
    pub count: usize,
    pub mean: f64,
    pub clamped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreOutput {
    pub rule: ScoringRuleId,
    pub forecast: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeReport>,
    pub records: Vec<ScoreRecord>,
    pub summary: ScoreSummary,
}

/// Scores `q` at every observation.
pub fn score_observations(
    rule: ScoringRuleId,
    q: &Density,
    obs: &[f64],
    scheme: &QuadratureScheme,
) -> Result<(Vec<ScoreRecord>, ScoreSummary), Error> {
    let s = ScoreFunction::new(rule, q, scheme)?;
    let digest = q.digest();
    let mut records = Vec::with_capacity(obs.len());
    let mut sum = 0.0;
    let mut clamped = 0;
    for &x in obs {
        let (v, c) = s.at_clamped(&[x])?;
        sum += v;
        if c {
            clamped += 1;
        }
        records.push(ScoreRecord {
            x,
            score: ScoreValue(if c { f64::NEG_INFINITY } else { v }),
            rule,
            forecast: digest.clone(),
            clamped_score: c.then_some(v),
        });
    }
    let summary = ScoreSummary {
        count: records.len(),
        mean: sum / records.len() as f64,
        clamped,
    };
    Ok((records, summary))
}

fn score_csv(out: &ScoreOutput) -> Result<String, Exit> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Exit::config(e);
    w.write_record(["x", "score", "rule", "forecast", "clamped"])
        .map_err(err)?;
    for r in &out.records {
        let score = if r.score.0 == f64::NEG_INFINITY {
            "-inf".to_string()
        } else {
            format!("{:?}", r.score.0)
        };
        w.write_record([
            format!("{:?}", r.x),
            score,
            r.rule.name().to_string(),
            r.forecast.clone(),
            r.clamped_score.is_some().to_string(),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Exit::config(e.to_string()))?;
    let mut text = String::from_utf8(bytes).map_err(Exit::config)?;
    text.push_str(&format!(
        "# count={} mean={:?} clamped={}\n",
        out.summary.count, out.summary.mean, out.summary.clamped
    ));
    Ok(text)
}

fn cmd_score(a: &ScoreArgs, stdout: &mut dyn Write) -> Result<i32, Exit> {
    let scheme = a.quad.scheme().map_err(Exit::config)?;
    let q = load_density(&a.forecast, &scheme)?;
    let obs = parse_observations(&read(&a.obs)?).map_err(|e| Exit::config(format!("{}: {e}", a.obs.display())))?;
    let cone = match strict_spec(&a.strict_cone, a.rule, &q)? {
        Some(spec) => Some(require_member(&q, &spec, &scheme)?),
        None => None,
    };
    let (records, summary) = score_observations(a.rule, &q, &obs, &scheme).map_err(Exit::domain)?;
    let out = ScoreOutput {
        rule: a.rule,
        forecast: q.digest(),
        cone,
        records,
        summary,
    };
    let csv_out = a
        .out
        .as_ref()
        .and_then(|p| p.extension())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let text = if csv_out {
        score_csv(&out)?
    } else {
        serde_json::to_string_pretty(&out).map_err(Exit::config)? + "\n"
    };
    emit(&a.out, &text, stdout)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify

fn cmd_verify(a: &VerifyArgs, stdout: &mut dyn Write) -> Result<i32, Exit> {
    let scheme = a.quad.scheme().map_err(Exit::config)?;
    let mut tol = Tolerances::default();
    if let Some(t) = a.tol {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Exit::config("--tol must be positive"));
        }
        tol.quad = t;
    }
    let report = match a.rule {
        Some(rule) => run_suite(a.suite, rule, a.samples, a.seed, &tol, &scheme).map_err(Exit::config)?,
        None => {
            let mut all = VerificationReport::new(a.suite.name(), None, a.seed, &scheme);
            for rule in ScoringRuleId::ALL {
                let r = run_suite(a.suite, rule, a.samples, a.seed, &tol, &scheme).map_err(Exit::config)?;
                all.absorb_as(rule.name(), r);
            }
            all
        }
    };
    emit(&a.out, &(report.to_json() + "\n"), stdout)?;
    Ok(if report.passed() { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// deriv

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivOutput {
    pub rule: ScoringRuleId,
    pub q: String,
    pub p: String,
    pub estimate: DerivativeEstimate,
    /// `p̂·S(q̂)`.
    pub analytic: f64,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Right derivative of `rule`'s entropy at `q̂` along `p̂` with its closed form.
pub fn directional_report(
    rule: ScoringRuleId,
    q: &Density,
    p: &Density,
    scheme: &QuadratureScheme,
) -> Result<DerivOutput, Error> {
    let fq = Field::from(q.normalized());
    let fp = Field::from(p.normalized());
    let estimate = right_directional_derivative(&rule, &fq, &fp, &default_steps(), scheme)?;
    let analytic = analytic_directional_derivative(rule, &fq, &fp, scheme)?;
    let note = (rule == ScoringRuleId::Supremum)
        .then(|| "sup: the derivative is the maximum of p over the modes; p·S(q) is one subgradient pairing".into());
    Ok(DerivOutput {
        rule,
        q: q.digest(),
        p: p.digest(),
        residual: (estimate.value - analytic).abs(),
        estimate,
        analytic,
        note,
    })
}

fn cmd_deriv(a: &DerivArgs, stdout: &mut dyn Write) -> Result<i32, Exit> {
    let scheme = a.quad.scheme().map_err(Exit::config)?;
    let q = load_density(&a.q, &scheme)?;
    let p = load_density(&a.p, &scheme)?;
    if let Some(spec) = strict_spec(&a.strict_cone, a.rule, &q)? {
        require_member(&q, &spec, &scheme)?;
        let probe = feasible_direction(&q, &Field::from(&p), &spec, &default_schedule(), &scheme);
        if !probe.feasible() {
            return Err(Exit::domain(format!(
                "direction is not feasible in the {} cone",
                spec.kind()
            )));
        }
    }
    let out = directional_report(a.rule, &q, &p, &scheme).map_err(Exit::domain)?;
    emit(
        &a.out,
        &(serde_json::to_string_pretty(&out).map_err(Exit::config)? + "\n"),
        stdout,
    )?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// demo

fn cmd_demo(a: &DemoArgs, stdout: &mut dyn Write) -> Result<i32, Exit> {
    let scheme = a.quad.scheme().map_err(Exit::config)?;
    let (text, json, ok) = match a.name {
        DemoName::BinaryBoundary => {
            let k = a.k.unwrap_or(12);
            if k == 0 {
                return Err(Exit::config("--K must be positive"));
            }
            let threshold = -27.0;
            let trace = boundary_blowup_trace(&decimal_path(k), 1.0, Some(threshold)).map_err(Exit::config)?;
            let corner = binary_shannon(1.0, 1.0).map_err(Exit::config)?;
            let text = format!(
                "Phi(1, 1) = {:.7}, gradient ({:.7}, {:.7})\n{trace}",
                corner.value, corner.partials.0, corner.partials.1
            );
            let ok = trace.strictly_decreasing && trace.crossed_at.is_some();
            (text, serde_json::to_string_pretty(&trace), ok)
        }
        DemoName::NowhereDense => {
            let k = a.k.unwrap_or(200);
            let seq = DyadicSequence::geometric(1.0, 0.5, k).map_err(Exit::config)?;
            let report = nowhere_dense_witness(&seq, &a.alpha).map_err(|e| match e {
                Error::NoWitness { .. } => Exit(1, e.to_string()),
                _ => Exit::config(e),
            })?;
            let text = format!("a_k = 2^-k, k = 0..{k}\n{report}");
            (text, serde_json::to_string_pretty(&report), true)
        }
        DemoName::SupMode => {
            let mut text = String::new();
            let mut reports = Vec::new();
            for (name, q) in demo_grids(a.grid_points).map_err(Exit::config)? {
                let r = sup_dichotomy_demo(&q, &scheme).map_err(Exit::domain)?;
                text.push_str(&format!("== {name} ({} points)\n{r}\n", a.grid_points));
                reports.push(serde_json::json!({ "name": name, "report": r }));
            }
            let ok = reports.iter().all(|r| r["report"]["pass"] == true);
            (text, serde_json::to_string_pretty(&reports), ok)
        }
    };
    let json = json.map_err(Exit::config)? + "\n";
    match &a.out {
        Some(_) => {
            stdout.write_all(text.as_bytes()).map_err(Exit::config)?;
            emit(&a.out, &json, stdout)?;
        }
        None => emit(&None, &format!("{text}\n{json}"), stdout)?,
    }
    Ok(if ok { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observations_with_and_without_header() {
        assert_eq!(parse_observations("x\n0\n1.5\n").unwrap(), vec![0.0, 1.5]);
        assert_eq!(parse_observations(" 2 \n-1\n").unwrap(), vec![2.0, -1.0]);
        assert!(parse_observations("1,2\n").is_err());
        assert!(parse_observations("0\nabc\n").is_err());
        assert!(parse_observations("x\n").is_err());
    }

    #[test]
    fn sentinel_serialisation() {
        assert_eq!(
            serde_json::to_string(&ScoreValue(f64::NEG_INFINITY)).unwrap(),
            "\"-inf\""
        );
        assert_eq!(serde_json::to_string(&ScoreValue(-0.5)).unwrap(), "-0.5");
    }

    #[test]
    fn usage_errors_exit_two() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["cone-scoring", "verify", "--rule", "nope"], &mut o, &mut e), 2);
        assert_eq!(run(["cone-scoring", "frobnicate"], &mut o, &mut e), 2);
        assert_eq!(
            run(
                ["cone-scoring", "verify", "--rule", "log", "--suite", "gateaux"],
                &mut o,
                &mut e
            ),
            2
        );
    }
}
