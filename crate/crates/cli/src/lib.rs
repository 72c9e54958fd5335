//! Command-line front end: argument parsing, configuration, output files
//! and run manifests for the `sdnlw` simulator.
//!
//! Exit codes: 0 success, 1 bad input, 2 numerical failure (blow-up,
//! degenerate weights, failed consistency check), 3 failed selftest.

mod commands;
pub mod output;
pub mod selftest;
pub mod settings;

use std::ffi::OsString;
use std::path::Path;

use clap::{Arg, ArgAction, Command};

use settings::Settings;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
    Acceptance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Acceptance(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) | CliError::Io(m) | CliError::Acceptance(m) => {
                f.write_str(m)
            }
        }
    }
}

impl From<sdnlw::Error> for CliError {
    fn from(e: sdnlw::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

struct Sub {
    name: &'static str,
    about: &'static str,
    keys: &'static [(&'static str, &'static str)],
}

const S: (&str, &str) = ("s", "smoothing exponent s");
const N: (&str, &str) = ("N", "Galerkin cutoff N (square |n|_∞ ≤ N)");
const DT: (&str, &str) = ("dt", "time step δ");
const T: (&str, &str) = ("T", "time horizon");
const SAMPLES: (&str, &str) = ("samples", "number of Monte Carlo samples");
const SEED: (&str, &str) = ("seed", "master seed");
const CUBIC: (&str, &str) = ("cubic", "include the cubic term (true/false)");
const IN: (&str, &str) = ("in", "input snapshot file");

const SUBCOMMANDS: &[Sub] = &[
    Sub {
        name: "sample-mu",
        about: "Draw phase states from the Gaussian measure μ_{s,N}",
        keys: &[S, N, ("count", "number of samples"), SEED],
    },
    Sub {
        name: "evolve",
        about: "Run the truncated stochastic flow from μ-distributed data",
        keys: &[
            S,
            N,
            DT,
            T,
            SEED,
            ("count", "number of trajectories"),
            ("splitting", "lie or strang"),
            ("snapshot-every", "write a snapshot every k steps (0: first and last only)"),
            CUBIC,
            ("noise", "include the noise (true/false)"),
        ],
    },
    Sub {
        name: "functionals",
        about: "Evaluate H, R, 𝓔, E and {H,E} at a stored state",
        keys: &[IN, S, N],
    },
    Sub {
        name: "bracket-check",
        about: "Compare dE/dt along the Hamiltonian flow with {H,E}",
        keys: &[N, S, ("dt", "finite-difference step"), ("trials", "number of random states"), SEED],
    },
    Sub {
        name: "besov",
        about: "Besov norm of a stored field",
        keys: &[IN, ("alpha", "regularity α"), ("p", "integrability (number or inf)"), ("q", "summability (number or inf)")],
    },
    Sub {
        name: "commutator-sweep",
        about: "Commutator ratio over dyadic cutoffs",
        keys: &[S, ("eps", "regularity loss ε"), ("Nmin", "smallest cutoff"), ("Nmax", "largest cutoff"), SAMPLES, SEED],
    },
    Sub {
        name: "invariance",
        about: "Invariance of μ_{s,N} under the linear stochastic flow",
        keys: &[S, N, DT, T, SAMPLES, SEED],
    },
    Sub {
        name: "partition",
        about: "Monte Carlo estimate of Z = E_μ[e^{−F}]",
        keys: &[S, N, SAMPLES, SEED, ("potential", "renormalized, zero or quadratic")],
    },
    Sub {
        name: "bd-bound",
        about: "Variational upper bound for log E_μ[e^{−F}]",
        keys: &[
            S,
            N,
            SAMPLES,
            SEED,
            ("potential", "renormalized, zero or quadratic"),
            ("ascent-steps", "gradient ascent iterations per sample"),
            ("step-size", "initial ascent step"),
            ("ceiling", "abort when the inner objective exceeds this"),
        ],
    },
    Sub {
        name: "density-check",
        about: "Short-time transport of ν_{s,N} against the bracket prediction",
        keys: &[
            S,
            N,
            DT,
            T,
            SAMPLES,
            SEED,
            ("observable", "unit, low_mode_product, smooth_indicator or all"),
            CUBIC,
            ("ess-floor", "minimum effective sample size"),
        ],
    },
    Sub {
        name: "qi-scan",
        about: "Low-mode marginals at time 0 and T under μ and ν",
        keys: &[S, N, DT, T, SAMPLES, SEED, CUBIC, ("alpha", "family-wise significance level")],
    },
    Sub {
        name: "kr-check",
        about: "Evaluate the K_R radius of a stored or sampled state",
        keys: &[IN, S, N, SEED, ("alpha", "Hölder exponent α < s"), ("R", "radius"), ("Mmax", "largest dyadic cutoff")],
    },
    Sub {
        name: "selftest",
        about: "Run the built-in checks",
        keys: &[],
    },
];

fn command() -> Command {
    let mut cmd = Command::new("sdnlw")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Spectral simulator and measure lab for the stochastic damped cubic wave equation on 𝕋²")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for sub in SUBCOMMANDS {
        let mut c = Command::new(sub.name).about(sub.about);
        for &(key, help) in sub.keys {
            c = c.arg(Arg::new(key).long(key).value_name("VALUE").help(help).allow_hyphen_values(true));
        }
        c = c
            .arg(Arg::new("config").long("config").value_name("FILE").help("config file (INI or manifest.json)"))
            .arg(Arg::new("threads").long("threads").value_name("K").help("worker threads (0: all cores)"))
            .arg(Arg::new("out").long("out").value_name("DIR").help(format!(
                "output directory (default: ${}, then ./sdnlw-out)",
                settings::OUT_DIR_ENV
            )));
        if sub.name == "selftest" {
            c = c.arg(Arg::new("quick").long("quick").action(ArgAction::SetTrue).help("identities only"));
        }
        cmd = cmd.subcommand(c);
    }
    cmd
}

fn dispatch(mut st: Settings, quick: bool, threads: usize) -> Result<(), CliError> {
    let st = &mut st;
    match st.subcommand() {
        "sample-mu" => commands::sample_mu_cmd(st, threads),
        "evolve" => commands::evolve_cmd(st, threads),
        "functionals" => commands::functionals_cmd(st, threads),
        "bracket-check" => commands::bracket_check_cmd(st, threads),
        "besov" => commands::besov_cmd(st, threads),
        "commutator-sweep" => commands::commutator_sweep_cmd(st, threads),
        "invariance" => commands::invariance_cmd(st, threads),
        "partition" => commands::partition_cmd(st, threads),
        "bd-bound" => commands::bd_bound_cmd(st, threads),
        "density-check" => commands::density_check_cmd(st, threads),
        "qi-scan" => commands::qi_scan_cmd(st, threads),
        "kr-check" => commands::kr_check_cmd(st, threads),
        "selftest" => commands::selftest_cmd(st, quick, threads),
        other => Err(CliError::Validation(format!("unknown subcommand `{other}`"))),
    }
}

fn prepare(argv: Vec<OsString>) -> Result<(Settings, bool, usize), i32> {
    let matches = match command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return Err(code);
        }
    };
    let Some((name, sub)) = matches.subcommand() else {
        return Err(1);
    };
    let mut st = Settings::new(name);
    let fail = |e: CliError| {
        eprintln!("error: {e}");
        e.exit_code()
    };
    if let Some(path) = sub.get_one::<String>("config") {
        st.load_file(Path::new(path)).map_err(fail)?;
    }
    for id in sub.ids() {
        let key = id.as_str();
        if matches!(key, "config" | "quick") {
            continue;
        }
        if let Some(v) = sub.get_one::<String>(key) {
            st.set(key, v.clone());
        }
    }
    let quick = name == "selftest" && sub.get_flag("quick");
    let threads = st.raw("threads").map(|t| settings::parse_u64("threads", t)).transpose().map_err(fail)?;
    Ok((st, quick, threads.unwrap_or(0) as usize))
}

/// Run the command line `argv` (including the program name) and return
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let (st, quick, threads) = match prepare(argv) {
        Ok(p) => p,
        Err(code) => return code,
    };
    match sdnlw::parallel::with_threads(threads, move || dispatch(st, quick, threads)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
