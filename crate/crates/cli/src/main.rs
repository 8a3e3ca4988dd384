//! `qz`: zero tables, region classification, certification and bound checks
//! for `f(z) = e^z + A z^k`.
//!
//! Exit codes: 0 success, 1 a verification did not hold, 2 usage or
//! validation error, 3 numerical failure.

mod args;
mod commands;
mod output;

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use quasizeros::certify::Contour;
use quasizeros::QuasiPolynomial;
use serde_json::json;

use crate::commands::{BoundsArgs, Outcome, Which};
use crate::output::Format;

#[derive(Parser)]
#[command(name = "qz", version, about = "Zeros and lower bounds for e^z + A z^k")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Power of the monomial term.
    #[arg(long)]
    k: u32,
    /// Coefficient A as "re+imi", e.g. 1+0i or -2.5+1i.
    #[arg(long, allow_hyphen_values = true, value_parser = args::parse_complex)]
    a: Complex64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the document here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Refine the zeros of an index range of the branch family.
    Zeros {
        #[command(flatten)]
        common: Common,
        /// Inclusive index range "lo..hi"; 0 is skipped.
        #[arg(long, allow_hyphen_values = true, value_parser = args::parse_range)]
        nu: (i64, i64),
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Certify each zero by a winding count about it.
        #[arg(long)]
        certify: bool,
        /// Also search the disk of this radius about the origin.
        #[arg(long)]
        origin_radius: Option<f64>,
    },
    /// Find every zero in a disk about the origin.
    Origin {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Label points by region.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Point to classify; repeatable.
        #[arg(long = "z", required = true, allow_hyphen_values = true, value_parser = args::parse_complex)]
        points: Vec<Complex64>,
        #[arg(long)]
        h: f64,
        #[arg(long = "R")]
        r: f64,
        #[arg(long = "s", default_value_t = 1)]
        s: u8,
        /// Also report membership of the sector of this half-angle.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Count zeros inside a contour and check a zero list against it.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Rectangle "x0,y0,x1,y1".
        #[arg(long = "box", allow_hyphen_values = true, conflicts_with = "circle")]
        rect: Option<String>,
        /// Circle "cx,cy,r".
        #[arg(long, allow_hyphen_values = true)]
        circle: Option<String>,
        /// Zero list written by `zeros` or `origin` (JSON or .csv); repeatable.
        #[arg(long)]
        expect_from: Vec<PathBuf>,
        /// Quadrature tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Sample a region and check a lower bound on |f|.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        which: Which,
        /// Strip half-width; defaults to the threshold plus 0.5 (2 for cdelta).
        #[arg(long)]
        h: Option<f64>,
        #[arg(long = "R", default_value_t = 10.0)]
        r: f64,
        /// Branch of the offset; defaults to 1 for t1 and 2 for t2.
        #[arg(long = "s")]
        s: Option<u8>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "R-max", default_value_t = 1e3)]
        r_max: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 2.0 * PI * 60.0)]
        im_cap: f64,
        /// Radius of the origin search feeding the cdelta zero list.
        #[arg(long)]
        disk_radius: Option<f64>,
    },
    /// Spacing of consecutive zeros in one half-plane.
    Gaps {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true, value_parser = args::parse_range)]
        nu: (i64, i64),
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Radius beyond which the strips lie in the sectors about the imaginary axis.
    SectorRadius {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        delta: f64,
        /// Check the radius on this many sampled strip points.
        #[arg(long)]
        verify: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// An error on its way to stderr.
pub struct Failure {
    code: u8,
    kind: String,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            kind: "usage".into(),
            message: message.into(),
        }
    }
}

impl From<quasizeros::Error> for Failure {
    fn from(e: quasizeros::Error) -> Self {
        Failure {
            code: if e.is_numerical() { 3 } else { 2 },
            kind: e.kind().into(),
            message: e.to_string(),
        }
    }
}

fn report(f: &Failure) -> ExitCode {
    let line = json!({ "error": f.kind, "message": f.message, "exit_code": f.code });
    eprintln!("{line}");
    ExitCode::from(f.code)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("QZ_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::usage(format!("QZ_THREADS must be a positive integer, got {v:?}"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn contour(rect: Option<String>, circle: Option<String>) -> Result<Contour, Failure> {
    match (rect, circle) {
        (Some(b), None) => {
            let v = args::parse_reals(&b, 4).map_err(Failure::usage)?;
            Ok(Contour::rectangle(
                Complex64::new(v[0], v[1]),
                Complex64::new(v[2], v[3]),
            )?)
        }
        (None, Some(c)) => {
            let v = args::parse_reals(&c, 3).map_err(Failure::usage)?;
            Ok(Contour::circle(Complex64::new(v[0], v[1]), v[2])?)
        }
        _ => Err(Failure::usage("give exactly one of --box or --circle")),
    }
}

fn run(command: Command) -> Result<(Common, Outcome, QuasiPolynomial), Failure> {
    let build = |c: &Common| QuasiPolynomial::new(c.k, c.a).map_err(Failure::from);
    Ok(match command {
        Command::Zeros {
            common,
            nu,
            tol,
            certify,
            origin_radius,
        } => {
            let qp = build(&common)?;
            let out = commands::zeros(&qp, nu, tol, certify, origin_radius)?;
            (common, out, qp)
        }
        Command::Origin {
            common,
            radius,
            tol,
        } => {
            let qp = build(&common)?;
            let out = commands::origin(&qp, radius, tol)?;
            (common, out, qp)
        }
        Command::Classify {
            common,
            points,
            h,
            r,
            s,
            delta,
        } => {
            let qp = build(&common)?;
            let out = commands::classify(&qp, &points, h, r, s, delta)?;
            (common, out, qp)
        }
        Command::Certify {
            common,
            rect,
            circle,
            expect_from,
            tol,
        } => {
            let qp = build(&common)?;
            let c = contour(rect, circle)?;
            let out = commands::certify(&qp, c, &expect_from, tol)?;
            (common, out, qp)
        }
        Command::Bounds {
            common,
            which,
            h,
            r,
            s,
            samples,
            seed,
            r_max,
            delta,
            im_cap,
            disk_radius,
        } => {
            let qp = build(&common)?;
            let a = BoundsArgs {
                which,
                h,
                r,
                s,
                samples,
                seed,
                r_max,
                delta,
                im_cap,
                disk_radius,
            };
            let out = commands::bounds(&qp, &a)?;
            (common, out, qp)
        }
        Command::Gaps { common, nu, tol } => {
            let qp = build(&common)?;
            let out = commands::gaps(&qp, nu, tol)?;
            (common, out, qp)
        }
        Command::SectorRadius {
            common,
            h,
            delta,
            verify,
            seed,
        } => {
            let qp = build(&common)?;
            let out = commands::sector_radius(&qp, h, delta, verify, seed)?;
            (common, out, qp)
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("invalid arguments");
            return report(&Failure::usage(first.trim_start_matches("error: ")));
        }
    };
    if let Err(f) = configure_threads() {
        return report(&f);
    }
    let (common, outcome, qp) = match run(cli.command) {
        Ok(v) => v,
        Err(f) => return report(&f),
    };
    let bytes = match common.format {
        Format::Json => outcome.doc.to_json(&qp),
        Format::Csv => outcome.doc.to_csv(),
    };
    let written = match &common.out {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| Failure::usage(format!("cannot write to stdout: {e}"))),
    };
    if let Err(f) = written {
        return report(&f);
    }
    if outcome.verified {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
