//! `bld`: command-line front end for the beta-logistic geometry library.
//!
//! Exit status: 0 success, 1 invalid input or domain error, 2 numerical
//! non-convergence, 3 verification failure.

mod input;
mod output;

use std::fs::File;
use std::io::{self, Write};
use std::process::ExitCode;

use betalogistic::distribution::{self, MAX_POLY_DEGREE};
use betalogistic::geodesics::{self, GeodesicState, Termination, Tolerances};
use betalogistic::inference::{self, SolverConfig};
use betalogistic::polynomials::{bernoulli_poly, euler_poly};
use betalogistic::quadrature::QuadratureSpec;
use betalogistic::{geometry, verify, Error, ThetaPoint};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use output::{csv_line, matrix, num, nums, pretty};

#[derive(Parser)]
#[command(name = "bld", version, about = "Information geometry of the beta-logistic distribution")]
#[command(allow_negative_numbers = true, propagate_version = true)]
struct Cli {
    /// Write output here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone, Copy)]
struct Theta {
    #[arg(long)]
    theta1: f64,
    #[arg(long)]
    theta2: f64,
}

impl Theta {
    fn point(&self) -> Result<ThetaPoint, Error> {
        ThetaPoint::new(self.theta1, self.theta2)
    }
}

#[derive(Args, Clone, Copy)]
struct Tols {
    #[arg(long, default_value_t = 1e-9)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
}

impl Tols {
    fn get(&self) -> Result<Tolerances, Error> {
        Tolerances::new(self.rel_tol, self.abs_tol)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Density on a grid or at given points (CSV: x,pdf,log_pdf).
    Pdf {
        #[command(flatten)]
        theta: Theta,
        /// Comma-separated evaluation points; overrides the grid.
        #[arg(long, value_delimiter = ',')]
        x: Vec<f64>,
        #[arg(long, default_value_t = -10.0)]
        from: f64,
        #[arg(long, default_value_t = 10.0)]
        to: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Exact draws, one per line.
    Sample {
        #[command(flatten)]
        theta: Theta,
        #[arg(long, short)]
        n: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Total mass and raw moments E[X^k] by quadrature (JSON).
    Moments {
        #[command(flatten)]
        theta: Theta,
        #[arg(long, default_value_t = 4)]
        max_order: u32,
    },
    /// Bernoulli polynomials from moments at (2,0) against the recurrence.
    BernoulliCheck(PolyCheck),
    /// Euler polynomials from moments at (1,0) against the recurrence.
    EulerCheck(PolyCheck),
    /// Fisher metric (JSON).
    Metric {
        #[command(flatten)]
        theta: Theta,
    },
    /// α-connection coefficients, lowered and raised (JSON).
    Connection {
        #[command(flatten)]
        theta: Theta,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
    },
    /// α-curvatures (JSON).
    Curvature {
        #[command(flatten)]
        theta: Theta,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
    },
    /// One geodesic (CSV path, or JSON with the termination reason).
    Geodesic {
        #[command(flatten)]
        theta: Theta,
        /// Initial coordinate velocity dθ¹/dt.
        #[arg(long, requires = "v2", conflicts_with = "angle")]
        v1: Option<f64>,
        #[arg(long, requires = "v1")]
        v2: Option<f64>,
        /// Unit-speed launch angle in the orthonormal frame (default 0).
        #[arg(long)]
        angle: Option<f64>,
        #[arg(long, default_value_t = 5.0)]
        t_end: f64,
        #[command(flatten)]
        tols: Tols,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Unit-speed geodesics in equally spaced directions (CSV with a path column).
    Bundle {
        #[arg(long, value_parser = parse_pair, default_value = "1,0")]
        origin: (f64, f64),
        #[arg(long, default_value_t = 16)]
        count: usize,
        #[arg(long, default_value_t = 5.0)]
        t_end: f64,
        #[command(flatten)]
        tols: Tols,
    },
    /// Separation between a geodesic and an angle-perturbed neighbour.
    Spread {
        #[arg(long, value_parser = parse_pair, default_value = "1,0")]
        origin: (f64, f64),
        #[arg(long, default_value_t = 0.0)]
        angle: f64,
        #[arg(long, default_value_t = 1e-4)]
        perturbation: f64,
        #[arg(long, default_value_t = 5.0)]
        t_end: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[command(flatten)]
        tols: Tols,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Log of the α-parallel prior density (JSON).
    Prior {
        #[command(flatten)]
        theta: Theta,
        #[arg(long)]
        alpha: f64,
    },
    /// MAP estimate under the α-parallel prior (α = 1 gives the MLE).
    Fit {
        /// Observation file, `-` for standard input.
        #[arg(long, default_value = "-")]
        input: String,
        /// Zero-based CSV column holding the observations.
        #[arg(long)]
        csv_column: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-6)]
        grad_tol: f64,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        #[arg(long, default_value_t = 0.5)]
        backtrack_ratio: f64,
        /// Starting point "θ¹,θ²"; chosen automatically when absent.
        #[arg(long, value_parser = parse_pair)]
        init: Option<(f64, f64)>,
    },
    /// Check exact closed-form values; text table followed by JSON.
    Verify,
}

#[derive(Args)]
struct PolyCheck {
    #[arg(long, default_value_t = 12)]
    max_degree: usize,
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,1")]
    x: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected 'a,b', got '{s}'"))?;
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("'{}' is not a number", t.trim()));
    Ok((parse(a)?, parse(b)?))
}

enum Failure {
    Lib(Error),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Lib(Error::InvalidArgument(msg.into()))
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::TimeReached => "time_reached",
        Termination::DomainBoundary => "domain_boundary",
        Termination::StepUnderflow => "step_underflow",
    }
}

fn path_json(path: &geodesics::GeodesicPath) -> Value {
    json!({
        "termination": termination_name(path.termination),
        "states": path.states.iter().map(|s| json!({
            "t": num(s.t),
            "theta": nums(&s.theta.as_array()),
            "velocity": nums(&s.velocity),
            "speed": num(s.speed()),
        })).collect::<Vec<_>>(),
    })
}

fn poly_check(cfg: &PolyCheck, bernoulli: bool) -> Result<String, Failure> {
    if cfg.max_degree > MAX_POLY_DEGREE {
        return Err(invalid(format!("max-degree must be at most {MAX_POLY_DEGREE}")));
    }
    let q = QuadratureSpec::default();
    let mut rows = Vec::new();
    for n in 0..=cfg.max_degree {
        for &x in &cfg.x {
            let (m, exact) = if bernoulli {
                (distribution::bernoulli_poly_via_moments(n, x, &q)?, bernoulli_poly(n, x))
            } else {
                (distribution::euler_poly_via_moments(n, x, &q)?, euler_poly(n, x))
            };
            rows.push((n, x, m, exact));
        }
    }
    Ok(match cfg.format {
        Format::Csv => {
            let mut s = String::from("n,x,moment_real,moment_imag,recurrence,abs_error\n");
            for (n, x, m, e) in rows {
                s += &format!("{n},{}\n", csv_line(&[x, m.value_real, m.value_imag, e, (m.value_real - e).abs()]));
            }
            s
        }
        Format::Json => pretty(&Value::Array(
            rows.into_iter()
                .map(|(n, x, m, e)| {
                    json!({"n": n, "x": num(x), "moment_real": num(m.value_real),
                           "moment_imag": num(m.value_imag), "recurrence": num(e),
                           "abs_error": num((m.value_real - e).abs())})
                })
                .collect(),
        )),
    })
}

fn run(command: &Command) -> Result<String, Failure> {
    Ok(match command {
        Command::Pdf { theta, x, from, to, points, format } => {
            let p = theta.point()?;
            let xs: Vec<f64> = if !x.is_empty() {
                x.clone()
            } else {
                if *points < 2 || !(to > from) {
                    return Err(invalid("need points >= 2 and to > from"));
                }
                (0..*points).map(|i| from + (to - from) * i as f64 / (*points - 1) as f64).collect()
            };
            if let Some(bad) = xs.iter().find(|v| !v.is_finite()) {
                return Err(invalid(format!("evaluation point {bad} is not finite")));
            }
            match format {
                Format::Csv => {
                    let mut s = String::from("x,pdf,log_pdf\n");
                    for &v in &xs {
                        s += &csv_line(&[v, distribution::pdf(&p, v), distribution::log_pdf(&p, v)]);
                        s.push('\n');
                    }
                    s
                }
                Format::Json => pretty(&json!({
                    "x": nums(&xs),
                    "pdf": nums(&xs.iter().map(|&v| distribution::pdf(&p, v)).collect::<Vec<_>>()),
                })),
            }
        }
        Command::Sample { theta, n, seed } => {
            let xs = distribution::sample(&theta.point()?, *n, *seed)?;
            let mut s = String::with_capacity(xs.len() * 25);
            for v in xs {
                s += &betalogistic::format_f64(v);
                s.push('\n');
            }
            s
        }
        Command::Moments { theta, max_order } => {
            let p = theta.point()?;
            let q = QuadratureSpec::default();
            let mass = distribution::total_mass(&p, &q)?;
            let mut moments = Vec::new();
            for k in 1..=*max_order {
                let m = distribution::moment(&p, k, &q)?;
                moments.push(json!({"order": k, "value": num(m.value), "error": num(m.error)}));
            }
            pretty(&json!({
                "theta": nums(&p.as_array()),
                "mass": num(mass.value),
                "mass_error": num(mass.error),
                "moments": moments,
            }))
        }
        Command::BernoulliCheck(cfg) => poly_check(cfg, true)?,
        Command::EulerCheck(cfg) => poly_check(cfg, false)?,
        Command::Metric { theta } => {
            let p = theta.point()?;
            let g = geometry::fisher(&p);
            pretty(&json!({
                "theta": nums(&p.as_array()),
                "g11": num(g.g11),
                "g12": num(g.g12),
                "g22": num(g.g22),
                "det": num(g.det),
                "inverse": matrix(&g.inverse()),
                "condition": num(g.condition),
                "near_singular": g.near_singular,
            }))
        }
        Command::Connection { theta, alpha } => {
            let p = theta.point()?;
            let c = geometry::connection(&p, *alpha);
            let cube = |t: &[[[f64; 2]; 2]; 2]| Value::Array(t.iter().map(matrix).collect());
            pretty(&json!({
                "theta": nums(&p.as_array()),
                "alpha": num(*alpha),
                "lower": cube(&c.lower),
                "raised": cube(&c.raised),
            }))
        }
        Command::Curvature { theta, alpha } => {
            let p = theta.point()?;
            let c = geometry::curvature(&p, *alpha);
            pretty(&json!({
                "theta": nums(&p.as_array()),
                "alpha": num(*alpha),
                "r1212": num(c.r1212),
                "ricci11": num(c.ricci11),
                "ricci12": num(c.ricci12),
                "ricci22": num(c.ricci22),
                "scalar": num(c.scalar),
                "gaussian": num(c.gaussian),
            }))
        }
        Command::Geodesic { theta, v1, v2, angle, t_end, tols, format } => {
            let p = theta.point()?;
            let velocity = match (v1, v2) {
                (Some(a), Some(b)) => [*a, *b],
                _ => geodesics::unit_direction(&p, angle.unwrap_or(0.0)),
            };
            let path = geodesics::integrate_geodesic(&GeodesicState::new(0.0, p, velocity), *t_end, &tols.get()?)?;
            match format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    geodesics::write_path_csv(&mut buf, &path).expect("writing to memory");
                    String::from_utf8(buf).expect("CSV is ASCII")
                }
                Format::Json => pretty(&path_json(&path)),
            }
        }
        Command::Bundle { origin, count, t_end, tols } => {
            let p = ThetaPoint::new(origin.0, origin.1)?;
            let paths = geodesics::geodesic_bundle(&p, *count, *t_end, &tols.get()?)?;
            let mut buf = Vec::new();
            geodesics::write_bundle_csv(&mut buf, &paths).expect("writing to memory");
            String::from_utf8(buf).expect("CSV is ASCII")
        }
        Command::Spread { origin, angle, perturbation, t_end, samples, tols, format } => {
            let p = ThetaPoint::new(origin.0, origin.1)?;
            let r = geodesics::spread_diagnostic(&p, *angle, *perturbation, *t_end, *samples, &tols.get()?)?;
            match format {
                Format::Csv => {
                    let mut s = String::from("t,separation\n");
                    for (t, d) in r.times.iter().zip(&r.separations) {
                        s += &csv_line(&[*t, *d]);
                        s.push('\n');
                    }
                    s
                }
                Format::Json => pretty(&json!({
                    "times": nums(&r.times),
                    "separations": nums(&r.separations),
                    "initial_rate": num(r.initial_rate),
                })),
            }
        }
        Command::Prior { theta, alpha } => {
            let p = theta.point()?;
            pretty(&json!({
                "theta": nums(&p.as_array()),
                "alpha": num(*alpha),
                "log_prior": num(inference::alpha_prior_log(&p, *alpha)),
                "det": num(geometry::fisher(&p).det),
            }))
        }
        Command::Fit { input, csv_column, alpha, grad_tol, max_iter, backtrack_ratio, init } => {
            let xs = input::read_observations(input, *csv_column)?;
            let stats = inference::suff_stats(&xs)?;
            let init = match init {
                Some((a, b)) => Some(ThetaPoint::new(*a, *b)?),
                None => None,
            };
            let cfg = SolverConfig { grad_tol: *grad_tol, max_iter: *max_iter, init, backtrack_ratio: *backtrack_ratio };
            let est = inference::map_estimate(&stats, *alpha, &cfg)?;
            if est.degenerate_data {
                eprintln!("warning: all observations are equal; the posterior has no finite maximizer");
            }
            let body = pretty(&json!({
                "theta_hat": nums(&est.theta_hat.as_array()),
                "alpha": num(est.alpha),
                "converged": est.converged,
                "iterations": est.iterations,
                "grad_norm": num(est.grad_norm),
                "log_post_unnorm": num(est.log_post_unnorm),
                "n": stats.n,
                "degenerate_data": est.degenerate_data,
            }));
            if !est.converged {
                // print the estimate anyway, then report non-convergence
                print!("{body}");
                return Err(Failure::Lib(Error::NonConvergence(format!(
                    "gradient norm {} above tolerance after {} iterations",
                    est.grad_norm, est.iterations
                ))));
            }
            body
        }
        Command::Verify => {
            let report = verify::run()?;
            let rows: Vec<Value> = report
                .rows
                .iter()
                .map(|r| {
                    let (kind, tol) = match r.tolerance {
                        verify::Tolerance::Absolute(t) => ("absolute", t),
                        verify::Tolerance::Relative(t) => ("relative", t),
                    };
                    json!({"name": r.name, "observed": num(r.observed), "expected": num(r.expected),
                           "tolerance": num(tol), "tolerance_kind": kind, "pass": r.pass})
                })
                .collect();
            let text = report.to_text() + &pretty(&json!({"all_pass": report.all_pass, "rows": rows}));
            if !report.all_pass {
                return Err(Failure::Verify(text));
            }
            text
        }
    })
}

fn emit(target: &Option<String>, text: &str) -> io::Result<()> {
    match target {
        Some(path) => File::create(path)?.write_all(text.as_bytes()),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

fn main() -> ExitCode {
    let command = Cli::command().mut_subcommands(|sub| sub.allow_negative_numbers(true));
    let parsed = command.try_get_matches().and_then(|m| Cli::from_arg_matches(&m));
    let cli = match parsed {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli.command) {
        Ok(text) => match emit(&cli.output, &text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: cannot write output: {e}");
                ExitCode::from(1)
            }
        },
        Err(Failure::Verify(text)) => {
            let _ = emit(&cli.output, &text);
            eprintln!("error: verification failed");
            ExitCode::from(3)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::NonConvergence(_) => 2,
                Error::Domain(_) | Error::InvalidArgument(_) => 1,
            })
        }
    }
}
