//! Command-line surface: configurations, stability classification, region
//! scans, curve tracing, cross-validation reports, and the beta-range sweep.
//!
//! Exit codes: 0 success, 2 invalid arguments, 3 inadmissible setup,
//! 4 numerical-check failure.

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use tristab::betarange::{self, CriticalMasses, TriangleAngles};
use tristab::centralconfig::{
    build_configuration, cc_residual, BodySetup, CentralConfiguration, ConfigError,
};
use tristab::dynamics;
use tristab::kepler::orbit_params;
use tristab::monodromy;
use tristab::reduction;
use tristab::scan::{self, CurveLabel};

#[derive(Parser)]
#[command(
    name = "tristab",
    version,
    about = "Stability of triangular relative equilibria of the planar charged three-body problem"
)]
struct Cli {
    /// Worker threads for scans and sweeps (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Masses/charges triple plus the optional JSON shortcut.
#[derive(Args, Clone)]
struct SetupArgs {
    /// Three masses, comma separated (normalized to unit sum).
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    masses: Option<[f64; 3]>,
    /// Three charges, comma separated.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    charges: Option<[f64; 3]>,
    /// Read masses and charges from a JSON file (as printed by `config`).
    #[arg(long, value_name = "PATH")]
    from_json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the central configuration and print it as JSON.
    Config {
        #[command(flatten)]
        setup: SetupArgs,
    },
    /// Classify linear stability at (beta, e) or for a body setup.
    Classify {
        /// Shape parameter beta in [0, 9]; alternative to masses/charges.
        #[arg(long, conflicts_with_all = ["masses", "charges", "from_json"], allow_hyphen_values = true)]
        beta: Option<f64>,
        #[command(flatten)]
        setup: SetupArgs,
        /// Eccentricity in [0, 0.99].
        #[arg(long)]
        ecc: f64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Classify a (beta, e) grid and write the region map CSV.
    Scan {
        /// Beta range as lo:hi:step.
        #[arg(long, value_parser = parse_range)]
        beta: RangeSpec,
        /// Eccentricity range as lo:hi:step.
        #[arg(long, value_parser = parse_range)]
        ecc: RangeSpec,
        /// Output CSV path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace one transition curve and write its CSV.
    Trace {
        /// Which curve: s, m, or k.
        #[arg(long)]
        curve: CurveLabel,
        /// Eccentricity range as lo:hi:step, within [0, 0.95].
        #[arg(long, value_parser = parse_range)]
        ecc: RangeSpec,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the cross-validation suite for a setup and print a JSON report.
    Verify {
        #[command(flatten)]
        setup: SetupArgs,
        #[arg(long)]
        ecc: f64,
    },
    /// Compare the action of one period against the closed form.
    Action {
        #[command(flatten)]
        setup: SetupArgs,
        #[arg(long)]
        ecc: f64,
    },
    /// Brute-force the range of beta and the critical-point identities.
    BetaRange {
        #[arg(long, default_value_t = 1e-3)]
        grid_step: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write per-sample (theta, argmax masses, beta) rows as CSV.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug)]
struct RangeSpec {
    lo: f64,
    hi: f64,
    step: f64,
}

impl RangeSpec {
    fn count(&self) -> usize {
        if self.hi == self.lo {
            1
        } else {
            ((self.hi - self.lo) / self.step).round() as usize + 1
        }
    }

    fn grid(&self) -> Vec<f64> {
        let n = self.count();
        if n == 1 {
            return vec![self.lo];
        }
        (0..n)
            .map(|i| self.lo + i as f64 * (self.hi - self.lo) / (n - 1) as f64)
            .collect()
    }
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated values, got '{s}'"));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| format!("'{part}' is not a number"))?;
    }
    Ok(out)
}

fn parse_range(s: &str) -> Result<RangeSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:step, got '{s}'"));
    }
    let nums: Result<Vec<f64>, String> = parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| format!("'{p}' is not a number"))
        })
        .collect();
    let nums = nums?;
    let spec = RangeSpec {
        lo: nums[0],
        hi: nums[1],
        step: nums[2],
    };
    if spec.step <= 0.0 && spec.hi != spec.lo {
        return Err("step must be positive".into());
    }
    if spec.hi < spec.lo {
        return Err("range must be ascending".into());
    }
    Ok(spec)
}

/// CLI failure carrying the documented exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
    fn inadmissible(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
    fn numerical(message: impl Into<String>) -> Self {
        Failure {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(err: ConfigError) -> Self {
        match err {
            ConfigError::NonPositiveMass { .. } | ConfigError::NonFiniteMass { .. } => {
                Failure::invalid(err.to_string())
            }
            _ => Failure::inadmissible(err.to_string()),
        }
    }
}

macro_rules! numerical_from {
    ($($ty:ty),* $(,)?) => {$(
        impl From<$ty> for Failure {
            fn from(err: $ty) -> Self {
                Failure::numerical(err.to_string())
            }
        }
    )*};
}
numerical_from!(
    tristab::kepler::KeplerError,
    tristab::reduction::ReductionError,
    monodromy::MonodromyError,
    scan::ScanError,
    dynamics::DynamicsError,
);

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure::invalid(format!("io error: {err}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(err: serde_json::Error) -> Self {
        Failure::invalid(format!("json error: {err}"))
    }
}

fn resolve_setup(args: &SetupArgs) -> Result<BodySetup, Failure> {
    if let Some(path) = &args.from_json {
        if args.masses.is_some() || args.charges.is_some() {
            return Err(Failure::invalid(
                "--from-json conflicts with --masses/--charges",
            ));
        }
        let text = std::fs::read_to_string(path)?;
        #[derive(serde::Deserialize)]
        struct FileSetup {
            masses: [f64; 3],
            charges: [f64; 3],
        }
        let parsed: FileSetup = serde_json::from_str(&text)
            .map_err(|e| Failure::invalid(format!("cannot parse {}: {e}", path.display())))?;
        return Ok(BodySetup::new(parsed.masses, parsed.charges)?);
    }
    match (args.masses, args.charges) {
        (Some(m), Some(e)) => Ok(BodySetup::new(m, e)?),
        _ => Err(Failure::invalid(
            "provide --masses and --charges (or --from-json)",
        )),
    }
}

fn config_json(setup: &BodySetup, config: &CentralConfiguration) -> serde_json::Value {
    json!({
        "masses": setup.masses(),
        "charges": setup.charges(),
        "angles_rad": config.angles_rad,
        "positions": config.positions,
        "alpha": config.alpha,
        "beta": config.beta,
        "mu": config.mu,
        "k": config.k,
        "residual": cc_residual(config, setup),
    })
}

fn validate_ecc(ecc: f64) -> Result<(), Failure> {
    if !(0.0..=0.99).contains(&ecc) {
        return Err(Failure::invalid(format!(
            "eccentricity {ecc} outside [0, 0.99]"
        )));
    }
    Ok(())
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::invalid(format!("cannot configure thread pool: {e}")))?;
    }

    match cli.command {
        Command::Config { setup } => {
            let body = resolve_setup(&setup)?;
            let config = build_configuration(&body)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&config_json(&body, &config))?
            );
        }
        Command::Classify {
            beta,
            setup,
            ecc,
            format,
        } => {
            validate_ecc(ecc)?;
            let (beta, config_info) = match beta {
                Some(b) => (b, None),
                None => {
                    let body = resolve_setup(&setup)?;
                    let config = build_configuration(&body)?;
                    (config.beta, Some((body, config)))
                }
            };
            let mon = monodromy::fundamental_solution(beta, ecc)?;
            let class = monodromy::classify_monodromy(&mon);
            match format {
                Format::Text => {
                    println!("{class}");
                    if let Some((_, config)) = &config_info {
                        println!("beta = {:.12}", config.beta);
                    }
                    for m in mon.multipliers {
                        println!(
                            "multiplier: {:+.12} {:+.12}i (|.| = {:.12})",
                            m.re,
                            m.im,
                            m.norm()
                        );
                    }
                }
                Format::Json => {
                    let mut doc = json!({
                        "beta": beta,
                        "e": ecc,
                        "class": class,
                        "multipliers": mon
                            .multipliers
                            .iter()
                            .map(|m| [m.re, m.im])
                            .collect::<Vec<_>>(),
                        "rho": [[mon.rho.0.re, mon.rho.0.im], [mon.rho.1.re, mon.rho.1.im]],
                        "nullity": monodromy::nullity(&mon),
                    });
                    if let Some((body, config)) = &config_info {
                        doc["configuration"] = config_json(body, config);
                    }
                    println!("{}", serde_json::to_string_pretty(&doc)?);
                }
            }
        }
        Command::Scan { beta, ecc, out } => {
            let map = scan::grid_scan(
                (beta.lo, beta.hi),
                (ecc.lo, ecc.hi),
                beta.count(),
                ecc.count(),
            )?;
            write_or_print(&out, &map.to_csv())?;
        }
        Command::Trace { curve, ecc, out } => {
            let grid = ecc.grid();
            let traced = scan::trace_curve(curve, &grid)?;
            write_or_print(&out, &traced.to_csv())?;
        }
        Command::Verify { setup, ecc } => {
            validate_ecc(ecc)?;
            let body = resolve_setup(&setup)?;
            let config = build_configuration(&body)?;
            let params = orbit_params(config.mu, ecc)?;

            let full = dynamics::full_monodromy(&config, &body, &params)?;
            let essential = monodromy::fundamental_solution(config.beta, ecc)?;
            let embedding = dynamics::embedding_check(&full, &essential);

            let fd = reduction::hessian_fd_check(&config, &body, &params);
            let fd_pass = fd.zz < 1e-6 && fd.zw < 1e-6 && fd.ww < 1e-6;

            let thetas: Vec<f64> = (0..64)
                .map(|k| k as f64 * std::f64::consts::TAU / 64.0)
                .collect();
            let diag = reduction::diagonalization_check(&config, &body, ecc, &thetas)?;
            let diag_pass = diag.max_residual < 1e-10 && diag.det_identity_residual < 1e-10;

            let pass = embedding.pass && fd_pass && diag_pass;
            let report = json!({
                "setup": config_json(&body, &config),
                "e": ecc,
                "embedding": embedding,
                "hessian_fd": { "residuals": fd, "pass": fd_pass },
                "diagonalization": { "report": diag, "pass": diag_pass },
                "pass": pass,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !pass {
                return Err(Failure::numerical("verification failed (see report)"));
            }
        }
        Command::Action { setup, ecc } => {
            validate_ecc(ecc)?;
            let body = resolve_setup(&setup)?;
            let config = build_configuration(&body)?;
            let params = orbit_params(config.mu, ecc)?;
            let report = dynamics::action_check(&config, &body, &params)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::to_value(report)?)?
            );
        }
        Command::BetaRange {
            grid_step,
            samples,
            seed,
            dump,
        } => {
            if !(grid_step > 0.0 && grid_step <= 1e-2) {
                return Err(Failure::invalid("grid step must be in (0, 1e-2]"));
            }
            let (result, rows) = betarange::brute_max_detailed(grid_step, samples, seed);

            // critical-point identity suite on random acute triangles
            use rand::{Rng, SeedableRng};
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed ^ 0xbeef);
            let mut worst_fstar: f64 = 0.0;
            let mut checked = 0;
            while checked < 1000 {
                let g: [f64; 3] = [
                    -(rng.gen::<f64>().ln()),
                    -(rng.gen::<f64>().ln()),
                    -(rng.gen::<f64>().ln()),
                ];
                let total = g[0] + g[1] + g[2];
                let theta = [
                    std::f64::consts::PI * g[0] / total,
                    std::f64::consts::PI * g[1] / total,
                    std::f64::consts::PI * g[2] / total,
                ];
                let Ok(angles) = TriangleAngles::new(theta) else {
                    continue;
                };
                if !angles.is_acute() {
                    continue;
                }
                checked += 1;
                match betarange::critical_masses(&angles) {
                    CriticalMasses::Interior { f_star, .. } => {
                        worst_fstar = worst_fstar.max((f_star - 0.25).abs());
                    }
                    CriticalMasses::Boundary { .. } => {
                        return Err(Failure::numerical(format!(
                            "acute triangle {theta:?} rejected by critical_masses"
                        )));
                    }
                }
            }

            let summary = json!({
                "max_beta": result.max_beta,
                "argmax_masses": result.argmax_masses,
                "argmax_theta": result.argmax_theta,
                "boundary_max": result.boundary_max,
                "critical_value_max_deviation": worst_fstar,
                "acute_triangles_checked": checked,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);

            if let Some(path) = dump {
                let mut csv = String::from("theta1,theta2,theta3,m1,m2,m3,beta\n");
                for row in rows {
                    csv.push_str(&format!(
                        "{:.12},{:.12},{:.12},{:.12},{:.12},{:.12},{:.12}\n",
                        row.theta[0],
                        row.theta[1],
                        row.theta[2],
                        row.masses[0],
                        row.masses[1],
                        row.masses[2],
                        row.beta
                    ));
                }
                std::fs::write(path, csv)?;
            }

            let pass = result.max_beta <= 9.0 + 1e-9 && worst_fstar < 1e-12;
            if !pass {
                return Err(Failure::numerical("beta-range checks failed"));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
