//! Command-line front end. Every command prints a JSON envelope (or CSV for
//! tables) carrying the configuration and the library version.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::boundary::boundary_modes;
use crate::cone::{jacobi_fields, legendre_crosscheck, solve_profile, ConeProfile};
use crate::config::{load_config, SolverConfig, CONFIG_ENV};
use crate::error::{Error, Result};
use crate::fd::eigen_fd_crosscheck;
use crate::particular::{build_up_with, LimitRule, SourceSpec};
use crate::sl::{eigen_k, BoundaryCondition, SLSpec};
use crate::spectrum::{assemble, sl_options, verify_strong_integrability};
use crate::sphere::modes_up_to;
use crate::weiss::{criticality, kappa0_sq, weiss, weiss_derivative_check, AxisymField, RadialFactor};
use crate::VERSION;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "conespec", version, about = "Spectral and energy analysis of axially symmetric one-phase cones")]
struct Cli {
    /// JSON solver configuration; falls back to $CONESPEC_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Embed the wall-clock time in JSON reports.
    #[arg(long, global = true)]
    timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Bc {
    Robin,
    Dirichlet,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Aperture, curvature and Legendre cross-check of the cone profile.
    Cone {
        #[arg(long)]
        dim: usize,
        /// Include the sampled profile.
        #[arg(long)]
        samples: bool,
    },
    /// Eigenvalues and multiplicities of the factor sphere.
    Modes {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 50.0)]
        mu_max: f64,
    },
    /// Eigenvalues of one band Sturm-Liouville problem.
    Sl {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long, value_enum, default_value = "robin")]
        bc: Bc,
        #[arg(long, default_value_t = 5)]
        count: usize,
        /// Band half-width; defaults to the cone aperture.
        #[arg(long)]
        half_width: Option<f64>,
        /// Add finite-difference Richardson eigenvalues.
        #[arg(long)]
        crosscheck: bool,
    },
    /// Clustered link spectrum with homogeneities.
    Spectrum {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        lambda_max: Option<f64>,
    },
    /// Strong integrability; exits 1 when the verdict is false.
    Verify {
        #[arg(long)]
        dim: usize,
    },
    /// Boundary Robin spectrum as CSV (ell, parity, ell_k).
    BoundarySpectrum {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 8)]
        count: usize,
    },
    /// Decaying particular solution for power-law boundary data.
    Particular {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        beta: f64,
        /// JSON object with `boundary_coeffs` (mode index to amplitude).
        #[arg(long)]
        modes: PathBuf,
    },
    /// Weiss energy of an axisymmetric field at the given radii.
    Weiss {
        #[arg(long)]
        dim: usize,
        /// JSON field description; the cone itself when absent.
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4")]
        radii: Vec<f64>,
    },
    /// Central difference of the aperture functional at the cone.
    Criticality {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        /// Relative tolerance for the verdict.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
    /// CSV table (d, theta0, H, lambda1, stable, kernel0, kernel_d1, gap).
    Report {
        /// Inclusive range `a..b` or comma list.
        #[arg(long, default_value = "3..10")]
        dims: String,
    },
}

/// Contents of the `--modes` file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModesFile {
    boundary_coeffs: BTreeMap<usize, f64>,
    #[serde(default)]
    limit_rule: LimitRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
enum ProfileKind {
    /// The cone profile `g`.
    Cone,
    /// The axial translation field.
    Axial,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermSpec {
    profile: ProfileKind,
    radial: RadialFactor,
}

/// Contents of the `--field` file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldFile {
    #[serde(default)]
    half_plane: bool,
    #[serde(default)]
    terms: Vec<TermSpec>,
}

struct Output {
    text: String,
    exit: i32,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match resolve_config(cli.config.as_ref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match execute(&cli, &cfg) {
        Ok(out) => match &cli.out {
            Some(path) => match std::fs::write(path, &out.text) {
                Ok(()) => out.exit,
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    EXIT_USAGE
                }
            },
            None => {
                print!("{}", out.text);
                out.exit
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::Parse { .. } | Error::Validation(_) | Error::Io(_) => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

fn resolve_config(path: Option<&PathBuf>) -> Result<SolverConfig> {
    let path = path.cloned().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    match path {
        Some(p) => load_config(p),
        None => Ok(SolverConfig::default()),
    }
}

fn envelope(command: &str, cfg: &SolverConfig, timestamp: bool, result: Value) -> Result<String> {
    let mut env = json!({
        "command": command,
        "config": cfg,
        "version": VERSION,
        "result": result,
    });
    if timestamp {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        env["timestamp"] = json!(secs);
    }
    // serde_json maps are ordered, so keys come out sorted
    let v: Value = serde_json::from_str(&env.to_string()).map_err(|e| Error::Io(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Io(e.to_string()))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &PathBuf) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn profile(dim: usize, cfg: &SolverConfig) -> Result<ConeProfile> {
    solve_profile(dim, cfg)
}

fn execute(cli: &Cli, cfg: &SolverConfig) -> Result<Output> {
    let ok = |name: &str, v: Value| -> Result<Output> {
        Ok(Output {
            text: envelope(name, cfg, cli.timestamp, v)?,
            exit: EXIT_OK,
        })
    };
    match &cli.command {
        Command::Cone { dim, samples } => {
            let p = profile(*dim, cfg)?;
            let leg = legendre_crosscheck(&p)?;
            let mut v = json!({
                "dim": p.dim,
                "theta0": p.theta0,
                "H": p.mean_curvature,
                "norm_c": p.norm_c,
                "ode_residual": p.ode_residual(),
                "legendre": to_value(&leg)?,
            });
            if *samples {
                v["theta"] = to_value(&p.grid)?;
                v["g"] = to_value(&p.g)?;
                v["g_prime"] = to_value(&p.g_prime)?;
            }
            ok("cone", v)
        }
        Command::Modes { dim, mu_max } => {
            if *dim < 3 {
                return Err(Error::InvalidInput("dimension must be at least 3".into()));
            }
            ok("modes", to_value(&modes_up_to(*dim, *mu_max))?)
        }
        Command::Sl { dim, mu, bc, count, half_width, crosscheck } => {
            let p = profile(*dim, cfg)?;
            let hw = half_width.unwrap_or(p.theta0);
            let bc = match bc {
                Bc::Robin => BoundaryCondition::Robin((*dim as f64 - 2.0) * hw.tan()),
                Bc::Dirichlet => BoundaryCondition::Dirichlet,
            };
            let spec = SLSpec::new(*dim, hw, *mu, bc, cfg.grid_n);
            let opts = sl_options(cfg);
            let mut rows = Vec::new();
            for k in 1..=*count {
                let e = eigen_k(&spec, k, &opts)?;
                rows.push(json!({"k": k, "lambda": e.lambda, "nodes": e.nodes, "bc_residual": e.bc_residual}));
            }
            let mut v = json!({"dim": dim, "mu": mu, "half_width": hw, "bc": to_value(&spec.bc)?, "eigen": rows});
            if *crosscheck {
                v["fd_richardson"] = to_value(&eigen_fd_crosscheck(&spec, *count))?;
            }
            ok("sl", v)
        }
        Command::Spectrum { dim, lambda_max } => {
            let p = profile(*dim, cfg)?;
            let lmax = lambda_max.unwrap_or(3.0 * *dim as f64);
            let s = assemble(&p, lmax, cfg)?;
            ok(
                "spectrum",
                json!({"dim": dim, "lambda_max": lmax, "eigenvalues": to_value(&s.eigenvalues)?}),
            )
        }
        Command::Verify { dim } => {
            let p = profile(*dim, cfg)?;
            let r = verify_strong_integrability(&p, cfg)?;
            Ok(Output {
                text: envelope("verify", cfg, cli.timestamp, to_value(&r)?)?,
                exit: if r.verdict { EXIT_OK } else { EXIT_VERDICT },
            })
        }
        Command::BoundarySpectrum { dim, count } => {
            let p = profile(*dim, cfg)?;
            let modes = boundary_modes(&p, *count, cfg)?;
            let mut text = String::from("ell,parity,ell_k\n");
            for m in &modes {
                let parity = match m.parity {
                    crate::boundary::Parity::Even => "even",
                    crate::boundary::Parity::Odd => "odd",
                };
                let _ = writeln!(text, "{},{},{:e}", m.ell, parity, m.ell_k);
            }
            Ok(Output { text, exit: EXIT_OK })
        }
        Command::Particular { dim, beta, modes } => {
            let file: ModesFile = read_json(modes)?;
            let p = profile(*dim, cfg)?;
            let link = assemble(&p, 3.0 * *dim as f64 + 20.0, cfg)?;
            let count = file.boundary_coeffs.keys().next_back().map_or(1, |k| k + 1);
            let bmodes = boundary_modes(&p, count, cfg)?;
            let mut src = SourceSpec::new(*beta, file.boundary_coeffs);
            if !src.check_admissible(&link, cfg.res_tol) {
                return Err(Error::Validation(format!("beta = {beta} is not admissible")));
            }
            let sol = build_up_with(&src, &p, &link, &bmodes, file.limit_rule, cfg)?;
            ok("particular", to_value(&sol.report)?)
        }
        Command::Weiss { dim, field, radii } => {
            let p = profile(*dim, cfg)?;
            let u = match field {
                Some(path) => field_from(&read_json::<FieldFile>(path)?, &p, cfg)?,
                None => AxisymField::cone(&p, RadialFactor::Power { coeff: 1.0, exponent: 1.0 }),
            };
            let mut w = Vec::new();
            let mut lhs = Vec::new();
            let mut rhs = Vec::new();
            let mut rem = Vec::new();
            for &r in radii {
                w.push(weiss(&u, r, cfg)?);
                let c = weiss_derivative_check(&u, r, cfg)?;
                lhs.push(c.lhs);
                rhs.push(c.rhs);
                rem.push(c.remainder);
            }
            ok(
                "weiss",
                json!({
                    "r_values": radii,
                    "W": w,
                    "dW_lhs": lhs,
                    "dW_rhs": rhs,
                    "dW_remainder": rem,
                    "kappa0": kappa0_sq(&p).sqrt(),
                }),
            )
        }
        Command::Criticality { dim, eps, tol } => {
            let p = profile(*dim, cfg)?;
            let c = criticality(&p, *eps, cfg)?;
            let critical = c.relative <= *tol;
            let mut v = to_value(&c)?;
            v["critical"] = json!(critical);
            Ok(Output {
                text: envelope("criticality", cfg, cli.timestamp, v)?,
                exit: if critical { EXIT_OK } else { EXIT_VERDICT },
            })
        }
        Command::Report { dims } => {
            let dims = parse_dims(dims)?;
            Ok(Output {
                text: report_csv(&dims, cfg)?,
                exit: EXIT_OK,
            })
        }
    }
}

fn field_from(file: &FieldFile, p: &ConeProfile, cfg: &SolverConfig) -> Result<AxisymField> {
    if file.half_plane {
        if !file.terms.is_empty() {
            return Err(Error::InvalidInput("half_plane takes no extra terms".into()));
        }
        return Ok(AxisymField::half_plane(p.dim, cfg.grid_n));
    }
    if file.terms.is_empty() {
        return Err(Error::InvalidInput("field has no terms".into()));
    }
    let jf = jacobi_fields(p);
    let d2 = p.dim as f64 - 2.0;
    let mut u = AxisymField {
        dim: p.dim,
        band: p.band(),
        terms: Vec::new(),
    };
    for t in &file.terms {
        let (q, dq) = match t.profile {
            ProfileKind::Cone => (p.g.clone(), p.g_prime.clone()),
            ProfileKind::Axial => {
                let dq = (0..p.grid.len())
                    .map(|i| {
                        let (s, c) = p.grid[i].sin_cos();
                        d2 * (s * p.g[i] + c * p.g_prime[i])
                    })
                    .collect();
                (jf.axial.clone(), dq)
            }
        };
        u = u.with_term(t.radial, q, dq);
    }
    Ok(u)
}

/// `a..b` (inclusive) or `a,b,c`.
pub fn parse_dims(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidInput(format!("cannot read dimensions from {s:?}"));
    let mut out: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|x| x.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if out.is_empty() || out.iter().any(|&d| d < 3) {
        return Err(bad());
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// One row per dimension, sorted by `d`.
pub fn report_csv(dims: &[usize], cfg: &SolverConfig) -> Result<String> {
    let mut text = format!("# conespec {VERSION} config {}\n", serde_json::to_string(cfg).map_err(|e| Error::Io(e.to_string()))?);
    text.push_str("d,theta0,H,lambda1,stable,kernel0,kernel_d1,gap\n");
    for &d in dims {
        let p = solve_profile(d, cfg)?;
        let r = verify_strong_integrability(&p, cfg)?;
        let _ = writeln!(
            text,
            "{},{:.17e},{:.17e},{:.17e},{},{},{},{:.17e}",
            d, p.theta0, p.mean_curvature, r.lambda1, r.strictly_stable, r.dim_kernel0, r.dim_kernel_d_minus_1, r.gap_above
        );
    }
    Ok(text)
}
