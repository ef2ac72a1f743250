//! Command-line surface: moments, matrix, poly and verify.
//!
//! Exit codes: 0 on success, 1 when a computation fails or a verification
//! check does not pass, 2 for usage errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::basis::{from_monomial, ShiftedPoly};
use crate::classical::{closed_form_xop, ParameterContext};
use crate::determinantal::{construct, moment_matrix, required_extent, Method};
use crate::error::Error;
use crate::moments::{fill_table, quadrature_table};
use crate::numerics::{format_real, gauss_laguerre_rule, Real, MIN_PRECISION};
use crate::verify::{json_number, run_suite, SuiteOptions, VerificationReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "xlaguerre", version, about = "X₂ exceptional Laguerre polynomials from adjusted moments")]
pub struct Cli {
    #[command(flatten)]
    pub config: CliConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct CliConfig {
    /// Laguerre parameter α > 0, as a decimal. `verify` accepts it more than once.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Vec<String>,
    /// Working precision in bits (at least 128).
    #[arg(long, global = true, default_value_t = 256)]
    pub precision: u32,
    /// Node count of the quadrature oracle (at least 8).
    #[arg(long = "quad-nodes", global = true, default_value_t = 200)]
    pub quad_nodes: usize,
    /// Output format. Defaults to csv for `moments` and json otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Table of adjusted moments μ̃[i][j], 0 ≤ i ≤ imax, 0 ≤ j ≤ jmax.
    Moments {
        #[arg(long)]
        imax: usize,
        #[arg(long)]
        jmax: usize,
        #[arg(long, value_enum, default_value_t = MomentMethod::Recursion)]
        method: MomentMethod,
    },
    /// The moment matrix M and right-hand side b for degree n.
    Matrix {
        #[arg(long)]
        n: usize,
    },
    /// The exceptional polynomial of degree n.
    Poly {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = PolyMethod::DetA)]
        method: PolyMethod,
        #[arg(long, value_enum, default_value_t = Basis::Monomial)]
        basis: Basis,
        /// Scale to the closed form's leading coefficient.
        #[arg(long)]
        normalize: bool,
    },
    /// Run the verification suite over degrees 2..=nmax.
    Verify {
        #[arg(long)]
        nmax: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MomentMethod {
    Recursion,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolyMethod {
    DetA,
    DetB,
    GramSchmidt,
    ClosedForm,
}

impl From<PolyMethod> for Method {
    fn from(m: PolyMethod) -> Method {
        match m {
            PolyMethod::DetA => Method::DetA,
            PolyMethod::DetB => Method::DetB,
            PolyMethod::GramSchmidt => Method::GramSchmidt,
            PolyMethod::ClosedForm => Method::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Basis {
    Shifted,
    Monomial,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Compute(e) => write!(f, "error: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}

/// Rendered output and whether every check behind it passed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emission {
    pub text: String,
    pub success: bool,
}

impl CliConfig {
    fn validate(&self) -> Result<(), CliError> {
        if self.precision < MIN_PRECISION {
            return Err(CliError::Usage(format!(
                "--precision must be at least {MIN_PRECISION}, got {}",
                self.precision
            )));
        }
        if self.quad_nodes < 8 {
            return Err(CliError::Usage(format!("--quad-nodes must be at least 8, got {}", self.quad_nodes)));
        }
        Ok(())
    }

    fn parse_alpha(&self, text: &str) -> Result<ParameterContext, CliError> {
        ParameterContext::from_decimal(text, self.precision).map_err(|e| CliError::Usage(format!("--alpha {text}: {e}")))
    }

    /// The single α every command except verify needs.
    fn context(&self) -> Result<ParameterContext, CliError> {
        match self.alpha.as_slice() {
            [one] => self.parse_alpha(one),
            [] => Err(CliError::Usage("--alpha is required".into())),
            _ => Err(CliError::Usage("--alpha may be given only once for this command".into())),
        }
    }
}

/// Runs the command and renders its output.
pub fn execute(cli: &Cli) -> Result<Emission, CliError> {
    let config = &cli.config;
    config.validate()?;
    let format = |default| config.format.unwrap_or(default);
    match cli.command {
        Command::Moments { imax, jmax, method } => {
            let ctx = config.context()?;
            let table = match method {
                MomentMethod::Recursion => {
                    if imax < 2 || jmax < 2 {
                        return Err(CliError::Usage("--imax and --jmax must be at least 2 for the recursion".into()));
                    }
                    fill_table(&ctx, imax, jmax)?
                }
                MomentMethod::Quadrature => {
                    let rule = gauss_laguerre_rule(ctx.alpha(), config.quad_nodes, ctx.precision())?;
                    quadrature_table(&rule, &ctx, imax, jmax)?
                }
            };
            let entries: Vec<(usize, usize, &Real, &str)> =
                table.entries().map(|(i, j, v, p)| (i, j, v, p.as_str())).collect();
            let text = match format(Format::Csv) {
                Format::Csv => {
                    let mut out = String::from("i,j,value,provenance\n");
                    for (i, j, v, p) in &entries {
                        writeln!(out, "{i},{j},{},{p}", format_real(v)).expect("write to string");
                    }
                    out
                }
                Format::Json => render_json(&json!({
                    "alpha": json_number(ctx.alpha()),
                    "precision_bits": ctx.precision(),
                    "method": match method { MomentMethod::Recursion => "recursion", MomentMethod::Quadrature => "quadrature" },
                    "entries": entries.iter().map(|(i, j, v, p)| json!({
                        "i": i, "j": j, "value": json_number(v), "provenance": p,
                    })).collect::<Vec<_>>(),
                })),
            };
            Ok(Emission { text, success: true })
        }
        Command::Matrix { n } => {
            check_degree(n)?;
            let ctx = config.context()?;
            let mm = moment_matrix(n, &ctx)?;
            let text = match format(Format::Json) {
                Format::Json => render_json(&json!({
                    "alpha": json_number(ctx.alpha()),
                    "n": n,
                    "precision_bits": ctx.precision(),
                    "M": mm.matrix().iter().map(|row| row.iter().map(json_number).collect::<Vec<_>>()).collect::<Vec<_>>(),
                    "b": mm.rhs().iter().map(json_number).collect::<Vec<_>>(),
                })),
                Format::Csv => {
                    let mut out = String::from("row");
                    for k in 0..=n {
                        write!(out, ",m{k}").expect("write to string");
                    }
                    out.push_str(",b\n");
                    for (l, (row, b)) in mm.matrix().iter().zip(mm.rhs()).enumerate() {
                        write!(out, "{l}").expect("write to string");
                        for v in row {
                            write!(out, ",{}", format_real(v)).expect("write to string");
                        }
                        writeln!(out, ",{}", format_real(b)).expect("write to string");
                    }
                    out
                }
            };
            Ok(Emission { text, success: true })
        }
        Command::Poly { n, method, basis, normalize } => {
            check_degree(n)?;
            let ctx = config.context()?;
            let method = Method::from(method);
            let shifted = if method == Method::ClosedForm {
                // needs no moments
                let p = from_monomial(&closed_form_xop(n, &ctx)?, &ctx);
                if normalize {
                    crate::determinantal::normalize(&p, n)?
                } else {
                    p
                }
            } else {
                let (imax, jmax) = required_extent(n);
                construct(method, n, &fill_table(&ctx, imax, jmax)?, &ctx, normalize)?
            };
            let coefficients = match basis {
                Basis::Shifted => shifted.coefficients().to_vec(),
                Basis::Monomial => monomial_coefficients(&shifted),
            };
            let basis_name = match basis {
                Basis::Shifted => "shifted",
                Basis::Monomial => "monomial",
            };
            let text = match format(Format::Json) {
                Format::Json => render_json(&json!({
                    "alpha": json_number(ctx.alpha()),
                    "n": n,
                    "method": method.as_str(),
                    "basis": basis_name,
                    "coefficients": coefficients.iter().map(json_number).collect::<Vec<_>>(),
                    "precision_bits": ctx.precision(),
                    "r": json_number(ctx.r()),
                    "s": json_number(ctx.s()),
                })),
                Format::Csv => {
                    let mut out = String::from("k,coefficient\n");
                    for (k, c) in coefficients.iter().enumerate() {
                        writeln!(out, "{k},{}", format_real(c)).expect("write to string");
                    }
                    out
                }
            };
            Ok(Emission { text, success: true })
        }
        Command::Verify { nmax } => {
            if config.alpha.is_empty() {
                return Err(CliError::Usage("verify needs at least one --alpha".into()));
            }
            check_degree(nmax)?;
            for a in &config.alpha {
                config.parse_alpha(a)?;
            }
            let options = SuiteOptions {
                precision: config.precision,
                quad_nodes: config.quad_nodes,
            };
            let report = run_suite(&config.alpha, nmax, options)?;
            let text = match format(Format::Json) {
                Format::Json => render_json(&report.to_json()),
                Format::Csv => report_csv(&report),
            };
            Ok(Emission { text, success: report.all_pass() })
        }
    }
}

fn check_degree(n: usize) -> Result<(), CliError> {
    if n < 2 {
        return Err(CliError::Usage(format!("degree must be at least 2, got {n}")));
    }
    Ok(())
}

fn monomial_coefficients(p: &ShiftedPoly) -> Vec<Real> {
    let m = p.to_monomial();
    (0..p.len()).map(|k| m.coefficient(k)).collect()
}

fn render_json(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("json value serializes");
    text.push('\n');
    text
}

fn report_csv(report: &VerificationReport) -> String {
    let mut out = String::from("check,alpha,n,residual,tolerance,pass,error\n");
    for r in &report.records {
        let n = r.n.map(|n| n.to_string()).unwrap_or_default();
        let error = r.error.as_deref().unwrap_or("").replace(['"', ','], ";");
        writeln!(
            out,
            "{},{},{n},{},{},{},{error}",
            r.check,
            r.alpha,
            format_real(&r.residual),
            format_real(&r.tolerance),
            r.pass
        )
        .expect("write to string");
    }
    out
}

/// Parses `args` (program name first), runs, writes the output and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let emission = match execute(&cli) {
        Ok(emission) => emission,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    let written = match &cli.config.out {
        Some(path) => std::fs::write(path, &emission.text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(emission.text.as_bytes())
        }
    };
    if let Err(e) = written {
        eprintln!("{}", CliError::Io(e));
        return EXIT_FAILURE;
    }
    if emission.success {
        EXIT_OK
    } else {
        eprintln!("verification failed");
        EXIT_FAILURE
    }
}
