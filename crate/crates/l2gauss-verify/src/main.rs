use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use l2gauss::ck::ProblemSpec;
use l2gauss::dbar::{FormSpec, SolveOptions};
use l2gauss_verify::commands::{self, GaussGreenScene, MeasureScene, PolySpec, StokesScene};
use l2gauss_verify::{run_suite, Format, RunConfig, VerifyError};
use serde::de::DeserializeOwned;

#[derive(Parser)]
#[command(name = "l2gauss", version, about = "Numerical checks for analysis under product Gaussian measures on ℓ²")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Batch verification runs
    Verify {
        #[command(subcommand)]
        cmd: VerifyCmd,
    },
    Measure {
        #[command(subcommand)]
        cmd: MeasureCmd,
    },
    Cutoff {
        #[command(subcommand)]
        cmd: CutoffCmd,
    },
    Surface {
        #[command(subcommand)]
        cmd: SurfaceCmd,
    },
    Dbar {
        #[command(subcommand)]
        cmd: DbarCmd,
    },
    Ck {
        #[command(subcommand)]
        cmd: CkCmd,
    },
    Sobolev {
        #[command(subcommand)]
        cmd: SobolevCmd,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Run suites and write a report; exits 1 if any check fails
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Suite name or `all`; repeatable. Overrides the config's suites.
        #[arg(long)]
        suite: Vec<String>,
        /// Report path; `.json` selects JSON, anything else CSV. Stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MeasureCmd {
    Hellinger {
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        x1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        x2: f64,
    },
    Classify {
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        shift_first: f64,
        #[arg(long, default_value_t = 0.25)]
        shift_ratio: f64,
    },
    Fernique {
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
}

#[derive(Subcommand)]
enum CutoffCmd {
    Verify {
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum SurfaceCmd {
    Measure {
        #[arg(long)]
        scene: PathBuf,
    },
    GaussGreen {
        #[arg(long)]
        scene: PathBuf,
    },
    Stokes {
        #[arg(long)]
        scene: PathBuf,
    },
}

#[derive(Subcommand)]
enum DbarCmd {
    Estimate {
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 4)]
        cap: u32,
        #[arg(long, default_value_t = 1)]
        dims: usize,
    },
}

#[derive(Subcommand)]
enum CkCmd {
    Solve {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = l2gauss::ck::DEFAULT_DEGREE_CAP)]
        cap: u32,
        #[arg(long)]
        dims: Option<usize>,
    },
}

#[derive(Subcommand)]
enum SobolevCmd {
    Norm {
        /// Polynomial file: `[[exponents], coefficient]` pairs
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// Restrict to `{x_coord > offset}`
        #[arg(long, num_args = 2, value_names = ["COORD", "OFFSET"], allow_hyphen_values = true)]
        halfspace: Option<Vec<String>>,
    },
    TranslateDemo {
        #[arg(long, default_value_t = 10)]
        n: u32,
    },
    ChartCheck {
        #[arg(long)]
        poly: Option<PathBuf>,
    },
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, VerifyError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn verify_run(config: Option<PathBuf>, suite: Vec<String>, out: Option<PathBuf>) -> Result<ExitCode, VerifyError> {
    let mut cfg = match &config {
        Some(p) => RunConfig::from_json(&fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    }
    .with_env_seed()?;
    if !suite.is_empty() {
        cfg.suites = suite;
    }
    if out.is_some() {
        cfg.output = out;
    }
    let report = run_suite(&cfg)?;
    for r in &report.records {
        eprintln!("{} {} {} {}", r.check, r.suite, if r.pass { "pass" } else { "FAIL" }, r.note);
    }
    match &cfg.output {
        Some(path) => {
            let format = if path.extension().is_some_and(|e| e == "json") { Format::Json } else { Format::Csv };
            fs::write(path, report.encode(format)?)?;
        }
        None => report.emit(Format::Csv, &mut std::io::stdout().lock())?,
    }
    Ok(ExitCode::from(report.exit_code() as u8))
}

fn dispatch(cli: Cli) -> Result<ExitCode, VerifyError> {
    let text = match cli.cmd {
        Cmd::Verify { cmd: VerifyCmd::Run { config, suite, out } } => return verify_run(config, suite, out),
        Cmd::Measure { cmd } => match cmd {
            MeasureCmd::Hellinger { a, r, s, x1, x2 } => commands::measure_hellinger(a, r, s, x1, x2)?,
            MeasureCmd::Classify { r, s, shift_first, shift_ratio } => commands::measure_classify(r, s, shift_first, shift_ratio)?,
            MeasureCmd::Fernique { c, r } => commands::measure_fernique(c, r)?,
        },
        Cmd::Cutoff { cmd: CutoffCmd::Verify { k, points, seed } } => commands::cutoff_verify(k, points, seed)?,
        Cmd::Surface { cmd } => match cmd {
            SurfaceCmd::Measure { scene } => commands::surface_measure(&read_json::<MeasureScene>(&scene)?)?,
            SurfaceCmd::GaussGreen { scene } => commands::surface_gauss_green(&read_json::<GaussGreenScene>(&scene)?)?,
            SurfaceCmd::Stokes { scene } => commands::surface_stokes(&read_json::<StokesScene>(&scene)?)?,
        },
        Cmd::Dbar { cmd } => match cmd {
            DbarCmd::Estimate { trials, seed } => commands::dbar_estimate(trials, seed)?,
            DbarCmd::Solve { input, cap, dims } => {
                commands::dbar_solve(&read_json::<FormSpec>(&input)?, SolveOptions { degree_cap: cap, dims, tol: 1e-8 })?
            }
        },
        Cmd::Ck { cmd: CkCmd::Solve { problem, cap, dims } } => commands::ck_solve_problem(&read_json::<ProblemSpec>(&problem)?, cap, dims)?,
        Cmd::Sobolev { cmd } => match cmd {
            SobolevCmd::Norm { poly, m, halfspace } => {
                let hs = match halfspace {
                    Some(v) => {
                        let coord = v[0].parse().map_err(|_| VerifyError::Config(format!("bad coordinate {:?}", v[0])))?;
                        let offset = v[1].parse().map_err(|_| VerifyError::Config(format!("bad offset {:?}", v[1])))?;
                        Some((coord, offset))
                    }
                    None => None,
                };
                commands::sobolev_norm_cmd(&read_json::<PolySpec>(&poly)?, m, hs)?
            }
            SobolevCmd::TranslateDemo { n } => commands::sobolev_translate_demo(n)?,
            SobolevCmd::ChartCheck { poly } => {
                let p = match poly {
                    Some(path) => read_json::<PolySpec>(&path)?,
                    None => PolySpec(vec![(vec![0], 1.0), (vec![1, 1], 0.5), (vec![0, 2], -0.25)]),
                };
                commands::sobolev_chart_check(&p)?
            }
        },
    };
    std::io::stdout().lock().write_all(text.as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
