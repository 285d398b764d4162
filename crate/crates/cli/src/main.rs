//! `recipj`: tables of traces, lift coefficients and theta values, and
//! verification reports.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 usage error,
//! 3 numerical failure.

mod commands;
mod table;
mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use rug::Float;

use recipj::numerics::{HPComplex, PrecisionContext};
use recipj::Error;

use table::Format;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "recipj", version, about = "Traces of 1/j over CM points and the theta lift they generate")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Working precision in decimal digits.
    #[arg(long = "prec", global = true, default_value_t = 60)]
    precision_digits: u32,

    /// Most negative discriminant in tables.
    #[arg(long = "dmin", global = true, default_value_t = -200, allow_hyphen_values = true)]
    d_min: i64,

    /// Point in the upper half-plane, written `a+bi`.
    #[arg(long, global = true, default_value = "0+1i", allow_hyphen_values = true)]
    tau: ComplexArg,

    /// Lattice cutoff override for theta sums.
    #[arg(long, global = true)]
    cutoff: Option<f64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Traces tr(D) for dmin <= D <= 0.
    Traces,
    /// Coefficients c(D, Im tau) of the completed lift for dmin <= D <= -dmin.
    Series,
    /// Unary and binary theta values and the shadow combination at tau.
    Theta,
    /// Run a verification report.
    Verify {
        #[arg(value_enum)]
        target: verify::Target,
    },
}

/// `a+bi`, `a-bi`, `bi` or `a` with decimal parts.
#[derive(Clone, Copy, Debug, PartialEq)]
struct ComplexArg {
    re: f64,
    im: f64,
}

impl FromStr for ComplexArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || format!("expected a complex number like 0.5+1.25i, got {s:?}");
        let num = |t: &str| -> Result<f64, String> {
            let v: f64 = t.parse().map_err(|_| bad())?;
            v.is_finite().then_some(v).ok_or_else(bad)
        };
        let Some(body) = s.strip_suffix('i') else {
            return Ok(Self { re: num(&s)?, im: 0.0 });
        };
        // split at the last sign that is neither leading nor an exponent sign
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        let (re, im) = match split {
            Some(k) => (num(&body[..k])?, &body[k..]),
            None => (0.0, body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            t => num(t)?,
        };
        Ok(Self { re, im })
    }
}

enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidContext(_) | Error::InvalidDiscriminant(..) | Error::NotInUpperHalfPlane(_) => {
                Self::Usage(e.to_string())
            }
            other => Self::Numeric(other.to_string()),
        }
    }
}

fn context(cli: &Cli) -> Result<PrecisionContext, Failure> {
    let ctx = PrecisionContext::new(cli.precision_digits)?;
    // the cutoff flag also caps every other lattice sum
    Ok(match cli.cutoff {
        Some(c) => ctx.with_lattice_cutoff(c)?,
        None => ctx,
    })
}

fn tau(cli: &Cli, ctx: &PrecisionContext) -> Result<HPComplex, Failure> {
    if !(cli.tau.im > 0.0) {
        return Err(Failure::Usage(format!("tau must have positive imaginary part, got {}", cli.tau.im)));
    }
    let p = ctx.bits();
    // decimal strings are parsed at full precision, not through f64
    let parse = |x: f64| Float::with_val(p, Float::parse(format!("{x:e}")).expect("finite decimal"));
    Ok(HPComplex::new(parse(cli.tau.re), parse(cli.tau.im)))
}

fn run(cli: &Cli) -> Result<(table::Table, bool), Failure> {
    let ctx = context(cli)?;
    match &cli.command {
        Command::Traces => {
            if cli.d_min > 0 {
                return Err(Failure::Usage(format!("--dmin must be at most 0, got {}", cli.d_min)));
            }
            Ok((commands::traces(cli.d_min, &ctx)?, true))
        }
        Command::Series => {
            if cli.d_min > 0 {
                return Err(Failure::Usage(format!("--dmin must be at most 0, got {}", cli.d_min)));
            }
            Ok((commands::series(cli.d_min, &tau(cli, &ctx)?, &ctx)?, true))
        }
        Command::Theta => Ok((commands::theta(&tau(cli, &ctx)?, cli.cutoff, &ctx)?, true)),
        Command::Verify { target } => Ok(verify::run(*target, &tau(cli, &ctx)?, cli.cutoff, &ctx)?),
    }
}

fn emit(cli: &Cli, t: &table::Table) -> io::Result<()> {
    // the traces CSV keeps its fixed four-column header
    let with_provenance = !matches!(cli.command, Command::Traces);
    match &cli.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            t.render(cli.format, &mut w, with_provenance)?;
            w.flush()
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            t.render(cli.format, &mut w, with_provenance)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok((t, pass)) => {
            if let Err(e) = emit(&cli, &t) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(EXIT_USAGE);
            }
            if pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("verification failed");
                ExitCode::from(EXIT_VERIFY_FAILED)
            }
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_flag_forms() {
        let c = |s: &str| ComplexArg::from_str(s).unwrap();
        assert_eq!(c("0.0+0.5i"), ComplexArg { re: 0.0, im: 0.5 });
        assert_eq!(c("-0.25-1.5i"), ComplexArg { re: -0.25, im: -1.5 });
        assert_eq!(c("2i"), ComplexArg { re: 0.0, im: 2.0 });
        assert_eq!(c("1e-1+1e+0i"), ComplexArg { re: 0.1, im: 1.0 });
        assert_eq!(c("0.5+i"), ComplexArg { re: 0.5, im: 1.0 });
        assert_eq!(c("3"), ComplexArg { re: 3.0, im: 0.0 });
        assert!(ComplexArg::from_str("1+xi").is_err());
        assert!(ComplexArg::from_str("").is_err());
    }
}
