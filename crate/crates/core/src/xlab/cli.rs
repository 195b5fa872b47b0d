use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::{
    build_reference, emit_plotdata, emit_records, emit_summary, read_records, run_experiment, summarize, ExperimentConfig,
    MethodChoice, XlabError,
};
use crate::dist::{quantile_b_n, HeavyTailLaw, Rng, SignMode, SlowlyVarying};
use crate::mat::{
    compact_large, decompose, default_thresholds, diagnostics_with_bn, sample_matrix, Regime, SparseEntries, SymmetricMatrix,
    DEFAULT_DELTA,
};
use crate::norms::{
    boyd_power_method, grothendieck_value, hypercube_max, multistart_ascent, oracle_grothendieck_small, oracle_norm_small,
    paired_grothendieck_closed_form, paired_norm_closed_form, spectral_norm, Method, NormCertificate, NormProblem,
    EXACT_SPIN_LIMIT,
};

#[derive(Parser, Debug)]
#[command(name = "htlab", version, about = "Heavy-tailed random matrix laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a symmetric heavy-tailed matrix.
    Sample(SampleArgs),
    /// Split a matrix into small, intermediate and large parts.
    Decompose(DecomposeArgs),
    /// r -> p operator norm of a matrix.
    Norm(NormArgs),
    /// l_r Grothendieck value of a matrix.
    Groth(GrothArgs),
    /// Spin-glass ground state of a matrix.
    Ground(GroundArgs),
    /// Run a campaign described by a config file.
    Experiment(ExperimentArgs),
    /// Summarize a records file.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct LawArgs {
    #[arg(long)]
    alpha: f64,
    /// `constant` or `log:<c>`.
    #[arg(long, default_value = "constant")]
    sv: String,
    /// `symmetric`, `positive` or `two_point:<q>`.
    #[arg(long, default_value = "symmetric")]
    sign: String,
    #[arg(long)]
    centered: bool,
    #[arg(long, default_value_t = 0.0)]
    shift: f64,
}

impl LawArgs {
    fn law(&self) -> Result<HeavyTailLaw, XlabError> {
        let mut law = HeavyTailLaw::pareto(self.alpha).centered(self.centered).with_shift(self.shift);
        law.sv_family = match self.sv.split_once(':') {
            None if self.sv == "constant" => SlowlyVarying::Constant,
            Some(("log", c)) => SlowlyVarying::LogPower(parse_f64("sv", c)?),
            _ => return Err(XlabError::Usage(format!("bad --sv {:?}", self.sv))),
        };
        law.sign_mode = match (self.sign.as_str(), self.sign.split_once(':')) {
            ("symmetric", _) => SignMode::Symmetric,
            ("positive", _) => SignMode::Positive,
            (_, Some(("two_point", q))) => SignMode::TwoPoint(parse_f64("sign", q)?),
            _ => return Err(XlabError::Usage(format!("bad --sign {:?}", self.sign))),
        };
        law.validate().map_err(|e| XlabError::Regime(e.to_string()))?;
        Ok(law)
    }
}

fn parse_f64(what: &str, v: &str) -> Result<f64, XlabError> {
    v.parse().map_err(|_| XlabError::Usage(format!("bad --{what} value {v:?}")))
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    law: LawArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[command(flatten)]
    law: LawArgs,
    /// `small_alpha` or `centered_alpha`.
    #[arg(long, default_value = "small_alpha")]
    regime: String,
    #[arg(long, default_value_t = 2.0)]
    r: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    zeta: Option<f64>,
    /// Writes `<prefix>.small.txt`, `.inter.txt`, `.large.txt` and
    /// `.report.json`.
    #[arg(long)]
    prefix: PathBuf,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct NormArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, value_parser = parse_exponent)]
    r: f64,
    #[arg(long, value_parser = parse_exponent)]
    p: f64,
    /// auto, power, ascent, oracle or closed.
    #[arg(long, default_value = "auto")]
    method: String,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Args, Debug)]
struct GrothArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, value_parser = parse_exponent)]
    r: f64,
    /// auto, ascent, oracle or closed.
    #[arg(long, default_value = "auto")]
    method: String,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Args, Debug)]
struct GroundArgs {
    #[arg(long)]
    matrix: PathBuf,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    records: PathBuf,
    /// Config used to rebuild the reference law for the KS columns.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Summary CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_exponent(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v >= 1.0 {
        Ok(v)
    } else {
        Err(format!("exponent must be at least 1, got {s}"))
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match dispatch(cli.command, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("htlab: {e}");
            e.exit_code()
        }
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), XlabError> {
    out.write_all(text.as_bytes())
        .map_err(|e| XlabError::io(Path::new("<stdout>"), e))
}

fn json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), XlabError> {
    match command {
        Command::Sample(a) => {
            let law = a.law.law()?;
            let m = sample_matrix(&law, a.n, &mut Rng::new(a.seed)).map_err(|e| XlabError::Regime(e.to_string()))?;
            match a.out {
                Some(path) => m.write_text(&path)?,
                None => write_out(out, &m.to_text())?,
            }
        }
        Command::Decompose(a) => {
            let law = a.law.law()?;
            let m = SymmetricMatrix::read_text(&a.matrix)?;
            let regime: Regime = a.regime.parse()?;
            let (eta, zeta) = match (a.eta, a.zeta) {
                (Some(e), Some(z)) => (e, z),
                (None, None) => default_thresholds(regime, law.alpha, a.r, a.p)?,
                _ => return Err(XlabError::Usage("give both --eta and --zeta or neither".into())),
            };
            let d = decompose(&m, law.alpha, eta, zeta)?;
            let b_n = quantile_b_n(&law, m.n());
            let report = diagnostics_with_bn(&m, b_n, law.alpha, DEFAULT_DELTA, eta, zeta);
            let with = |suffix: &str| {
                let mut s = a.prefix.clone().into_os_string();
                s.push(suffix);
                PathBuf::from(s)
            };
            d.small.write_text(&with(".small.txt"))?;
            d.inter.write_text(&with(".inter.txt"))?;
            d.large.write_text(&with(".large.txt"))?;
            let text = json(&report);
            let path = with(".report.json");
            std::fs::write(&path, &text).map_err(|e| XlabError::io(&path, e))?;
            write_out(out, &text)?;
        }
        Command::Norm(a) => {
            let m = SymmetricMatrix::read_text(&a.matrix)?;
            let prob = NormProblem::new(a.r, a.p)?;
            let method: MethodChoice = a.method.parse()?;
            let mut rng = Rng::new(a.solve.seed);
            let power = |m: &SymmetricMatrix| boyd_power_method(m, &prob, a.solve.tol, 100_000, &vec![1.0; m.n()]);
            let cert = match method {
                MethodChoice::Auto => {
                    if a.r == 2.0 && a.p == 2.0 {
                        spectral_norm(&m)
                    } else if prob.is_finite_interior() && a.p <= a.r && m.is_nonnegative() {
                        power(&m)?
                    } else {
                        multistart_ascent(&m, &prob, a.solve.restarts, a.solve.tol, &mut rng)?
                    }
                }
                MethodChoice::Power => power(&m)?,
                MethodChoice::Ascent => multistart_ascent(&m, &prob, a.solve.restarts, a.solve.tol, &mut rng)?,
                MethodChoice::Oracle => {
                    let v = oracle_norm_small(&m, &prob)?;
                    NormCertificate::new(v, vec![], None, Method::Oracle)
                }
                MethodChoice::Closed => {
                    let pm = compact_large(&nonzeros(&m)?)?.paired;
                    let mut c = paired_norm_closed_form(&pm, &prob)?;
                    c.x.clear();
                    c.y = None;
                    c
                }
                MethodChoice::Bounds => return Err(XlabError::Usage("method `bounds` is for experiments".into())),
            };
            write_out(out, &json(&cert))?;
        }
        Command::Groth(a) => {
            let m = SymmetricMatrix::read_text(&a.matrix)?;
            let cert = match a.method.parse::<MethodChoice>()? {
                MethodChoice::Auto | MethodChoice::Ascent => {
                    grothendieck_value(&m, a.r, a.solve.restarts, &mut Rng::new(a.solve.seed))?
                }
                MethodChoice::Oracle => {
                    NormCertificate::new(oracle_grothendieck_small(&m, a.r)?, vec![], None, Method::Oracle)
                }
                MethodChoice::Closed => {
                    let pm = compact_large(&nonzeros(&m)?)?.paired;
                    let mut c = paired_grothendieck_closed_form(&pm, a.r)?;
                    c.x.clear();
                    c
                }
                other => return Err(XlabError::Usage(format!("method {other:?} does not apply to groth"))),
            };
            write_out(out, &json(&cert))?;
        }
        Command::Ground(a) => {
            let m = SymmetricMatrix::read_text(&a.matrix)?;
            if m.n() > EXACT_SPIN_LIMIT {
                return Err(XlabError::Usage(format!("exact ground state needs n <= {EXACT_SPIN_LIMIT}")));
            }
            let (v, _) = hypercube_max(&m)?;
            write_out(out, &format!("{v:?}\n"))?;
        }
        Command::Experiment(a) => {
            let mut cfg = ExperimentConfig::read(&a.config)?;
            if let Some(s) = a.seed {
                cfg.master_seed = s;
            }
            let res = run_experiment(&cfg)?;
            if let Some(p) = &cfg.outputs.records {
                emit_records(&res.records, p)?;
            }
            if let Some(p) = &cfg.outputs.summary {
                emit_summary(&res.summary, p)?;
            }
            if let Some(p) = &cfg.outputs.plotdata {
                emit_plotdata(&res.records, res.reference.as_ref(), p)?;
            }
            if let (Some(p), Some(r)) = (&cfg.outputs.reference, &res.reference) {
                r.write_csv(p)?;
            }
            write_out(out, &summary_text(&res.summary))?;
        }
        Command::Report(a) => {
            let records = read_records(&a.records)?;
            let theorem = match records.first() {
                Some(r) => r.theorem,
                None => return Err(XlabError::Parse(format!("{}: no records", a.records.display()))),
            };
            let reference = match &a.config {
                Some(p) => build_reference(&ExperimentConfig::read(p)?)?,
                None => None,
            };
            let summary = summarize(theorem, &records, reference.as_ref());
            match a.out {
                Some(p) => emit_summary(&summary, &p)?,
                None => write_out(out, &summary_text(&summary))?,
            }
        }
    }
    Ok(())
}

fn nonzeros(m: &SymmetricMatrix) -> Result<SparseEntries, XlabError> {
    let n = m.n();
    let entries = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, m.get(i, j)))
        .filter(|e| e.2 != 0.0)
        .collect();
    Ok(SparseEntries::new(n, entries)?)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

fn summary_text(s: &super::Summary) -> String {
    let mut t = format!(
        "{}\n{:>6} {:>6} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
        s.theorem, "n", "count", "fail", "ks", "ks_large", "q05", "q50", "q95", "width"
    );
    for r in &s.rows {
        t.push_str(&format!(
            "{:>6} {:>6} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
            r.n,
            r.count,
            r.failures,
            cell(r.ks),
            cell(r.ks_large_part),
            cell(r.q05),
            cell(r.q50),
            cell(r.q95),
            cell(r.median_width)
        ));
    }
    t
}
