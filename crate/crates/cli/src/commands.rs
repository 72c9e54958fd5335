//! One function per subcommand. Each reads its settings, runs the
//! computation and hands its files to an [`OutputDir`].

use std::fs::File;
use std::io::BufReader;

use serde::Serialize;
use serde_json::json;

use sdnlw::besov::{besov_norm, block_count};
use sdnlw::dynamics::{energy_rate_fd, Flow, FlowConfig, Splitting};
use sdnlw::functionals::{bracket_he, energy, gaussian_energy, hamiltonian};
use sdnlw::gaussian::{sample_mu, MeasureSpec};
use sdnlw::lab::sweeps::commutator_sweep;
use sdnlw::lab::{
    bd_bound, density_derivative_check, kr_membership, linear_invariance_test, noise_stream,
    partition_estimate, quasi_invariance_scan, sample_stream, BdConfig, DensityConfig,
    EstimatorReport, InvarianceConfig, Observable, PartitionConfig, Potential, QiConfig,
};
use sdnlw::parallel::map_collect;
use sdnlw::spectral::snapshot::{read_field, read_phase, write_phase};
use sdnlw::{Error, PhaseState, SpectralField};

use crate::output::{num, OutputDir, RunManifest};
use crate::settings::Settings;
use crate::{selftest, CliError};

/// Shared bookkeeping for commands that write an output directory.
struct Run {
    out: OutputDir,
    started_at: String,
}

impl Run {
    fn start(st: &mut Settings) -> Result<Run, CliError> {
        let dir = st.out_dir();
        Ok(Run {
            out: OutputDir::create(&dir)?,
            started_at: crate::output::timestamp(),
        })
    }

    fn finish(self, st: &Settings, threads: usize, params: impl Serialize) -> Result<(), CliError> {
        let root = self.out.root().display().to_string();
        let m = self.out.finish(RunManifest {
            tool: "sdnlw".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: st.subcommand().into(),
            seed: st.raw("seed").and_then(|s| crate::settings::parse_u64("seed", s).ok()),
            config: st.snapshot(),
            parameters: serde_json::to_value(params).map_err(|e| CliError::Io(e.to_string()))?,
            threads,
            started_at: self.started_at,
            finished_at: String::new(),
            outputs: vec![],
        })?;
        for f in &m.outputs {
            println!("wrote {root}/{}", f.file);
        }
        Ok(())
    }
}

fn splitting(text: &str) -> Result<Splitting, CliError> {
    match text.to_ascii_lowercase().as_str() {
        "lie" => Ok(Splitting::Lie),
        "strang" => Ok(Splitting::Strang),
        _ => Err(CliError::Validation(format!("--splitting: expected lie or strang, got `{text}`"))),
    }
}

fn potential(text: &str) -> Result<Potential, CliError> {
    match text.to_ascii_lowercase().as_str() {
        "renormalized" | "r" => Ok(Potential::Renormalized),
        "zero" => Ok(Potential::Zero),
        "quadratic" => Ok(Potential::Quadratic),
        _ => Err(CliError::Validation(format!(
            "--potential: expected renormalized, zero or quadratic, got `{text}`"
        ))),
    }
}

fn observables(text: &str) -> Result<Vec<Observable>, CliError> {
    if text == "all" {
        return Ok(Observable::ALL.to_vec());
    }
    text.split(',')
        .map(|t| {
            Observable::ALL
                .into_iter()
                .find(|o| o.name() == t.trim())
                .ok_or_else(|| CliError::Validation(format!("--observable: unknown observable `{t}`")))
        })
        .collect()
}

fn read_state(st: &Settings) -> Result<(f64, PhaseState), CliError> {
    let path = st.path("in")?;
    let file = File::open(&path).map_err(|e| CliError::Validation(format!("--in {}: {e}", path.display())))?;
    match read_phase(&mut BufReader::new(file))? {
        Some((h, x)) => Ok((h.s, x)),
        None => Err(CliError::Validation(format!("--in {}: empty snapshot file", path.display()))),
    }
}

fn report_rows(reports: &[EstimatorReport]) -> Vec<Vec<String>> {
    reports
        .iter()
        .map(|r| {
            let extra = |k: &str| r.extra.get(k).map(|v| num(*v)).unwrap_or_default();
            vec![
                r.name.clone(),
                num(r.mean),
                num(r.stderr),
                r.count.to_string(),
                num(r.ess),
                extra("expected"),
                extra("z"),
            ]
        })
        .collect()
}

const REPORT_HEADER: [&str; 7] = ["name", "mean", "stderr", "count", "ess", "expected", "z"];

fn write_reports(run: &mut Run, reports: &[EstimatorReport]) -> Result<(), CliError> {
    run.out.write_jsonl("reports.jsonl", reports)?;
    run.out.write_csv("summary.csv", &REPORT_HEADER, &report_rows(reports))?;
    Ok(())
}

fn with_sample(i: u64) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::BlowUp { step, .. } => Error::BlowUp { step, sample: Some(i) },
        e => e,
    }
}

pub fn sample_mu_cmd(st: &mut Settings, threads: usize) -> Result<(), CliError> {
    let s = st.f64("s")?;
    let n = st.usize("N")?;
    let count = st.u64_or("count", 1)?;
    let seed = st.u64_or("seed", 0)?;
    let spec = MeasureSpec::new(s, n);
    let blocks = map_collect(count, |i| {
        let mut buf = Vec::new();
        write_phase(&mut buf, &sample_mu(&spec, &sample_stream(seed, i)), s)?;
        Ok(buf)
    })?;
    let mut run = Run::start(st)?;
    run.out.write("samples.bin", &blocks.concat())?;
    run.finish(st, threads, json!({ "s": s, "N": n, "count": count, "seed": seed }))
}

#[derive(Serialize)]
struct ObservableRecord {
    seed: u64,
    sample: u64,
    t: f64,
    name: &'static str,
    value: f64,
}

pub fn evolve_cmd(st: &mut Settings, threads: usize) -> Result<(), CliError> {
    let s = st.f64("s")?;
    let n = st.usize("N")?;
    let dt = st.f64("dt")?;
    let horizon = st.f64("T")?;
    let seed = st.u64_or("seed", 0)?;
    let count = st.u64_or("count", 1)?;
    let every = st.u64_or("snapshot_every", 0)?;
    let cfg = FlowConfig {
        splitting: splitting(&st.str_or("splitting", "strang"))?,
        cubic: st.bool_or("cubic", true)?,
        noise: st.bool_or("noise", true)?,
        ..FlowConfig::new(s, n, dt, horizon)
    };
    let flow = Flow::new(cfg)?;
    let steps = cfg.steps();
    let spec = MeasureSpec::new(s, n);
    let runs = map_collect(count, |i| {
        let rng = sample_stream(seed, i);
        let mut snaps = Vec::new();
        let mut records = Vec::new();
        let mut failed = None;
        flow.evolve(&sample_mu(&spec, &rng), &noise_stream(&rng), |k, t, x| {
            let keep = k == 0 || k == steps || (every > 0 && k % every == 0);
            if !keep || failed.is_some() {
                return;
            }
            if let Err(e) = write_phase(&mut snaps, x, s) {
                failed = Some(e);
            }
            for (name, value) in [
                ("hamiltonian", hamiltonian(x, n)),
                ("gaussian_energy", gaussian_energy(x, s, n)),
                ("l2_u", x.u.l2_norm()),
            ] {
                records.push(ObservableRecord {
                    seed,
                    sample: i,
                    t,
                    name,
                    value,
                });
            }
        })
        .map_err(with_sample(i))?;
        match failed {
            Some(e) => Err(e),
            None => Ok((snaps, records)),
        }
    })?;
    let mut run = Run::start(st)?;
    let mut all = Vec::new();
    for (i, (snaps, records)) in runs.into_iter().enumerate() {
        run.out.write(&format!("trajectory_{i:05}.bin"), &snaps)?;
        all.extend(records);
    }
    run.out.write_jsonl("observables.jsonl", &all)?;
    run.finish(st, threads, json!({ "flow": cfg, "seed": seed, "count": count, "snapshot_every": every }))
}

pub fn functionals_cmd(st: &mut Settings, threads: usize) -> Result<(), CliError> {
    let (s_file, x) = read_state(st)?;
    let s = st.f64_or("s", s_file)?;
    let n = st.usize_or("N", x.cutoff())?;
    let report = energy(&x, s, n)?;
    let text = serde_json::to_string(&report).map_err(|e| CliError::Io(e.to_string()))?;
    println!("{text}");
    if st.has_out_dir() {
        let mut run = Run::start(st)?;
        run.out.write_json("functionals.json", &report)?;
        run.finish(st, threads, json!({ "s": s, "N": n }))?;
    }
    Ok(())
}

pub fn bracket_check_cmd(st: &mut Settings, threads: usize) -> Result<(), CliError> {
    let s = st.f64_or("s", 1.0)?;
    let n = st.usize_or("N", 8)?;
    let delta = st.f64_or("dt", 1e-4)?;
    let trials = st.u64_or("trials", 20)?;
    let seed = st.u64_or("seed", 0)?;
    let spec = MeasureSpec::new(s, n);
    let rows = map_collect(trials, |i| {
        let x = sample_mu(&spec, &sample_stream(seed, i));
        let fd = energy_rate_fd(&x, s, n, delta)?;
        let b = bracket_he(&x, s, n)?;
        let rel = (fd - b).abs() / fd.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        Ok(vec![i.to_string(), num(fd), num(b), num(rel)])
    })?;
    let worst = rows.iter().filter_map(|r| r[3].parse::<f64>().ok()).fold(0.0, f64::max);
    println!("max relative error {worst:e} over {trials} trials");
    let mut run = Run::start(st)?;
    run.out.write_csv("bracket_check.csv", &["trial", "fd_rate", "bracket", "rel_err"], &rows)?;
    run.finish(st, threads, json!({ "s": s, "N": n, "dt": delta, "trials": trials, "seed": seed }))
}

pub fn besov_cmd(st: &mut Settings, threads: usize) -> Result<(), CliError> {
    let path = st.path("in")?;
    let file = File::open(&path).map_err(|e| CliError::Validation(format!("--in {}: {e}", path.display())))?;
    let (_, f): (_, SpectralField) = read_field(&mut BufReader::new(file))?;
    let alpha = st.f64("alpha")?;
    let p = st.f64_or("p", 2.0)?;
    let q = st.f64_or("q", 2.0)?;
    if p < 1.0 || q < 1.0 {
        return Err(CliError::Validation("--p and --q must be at least 1".into()));
    }
    let norm = besov_norm(&f, alpha, p, q);
    let value = json!({
        "cutoff": f.cutoff(),
        "alpha": alpha,
        "p": if p.is_finite() { json!(p) } else { json!("inf") },
        "q": if q.is_finite() { json!(q) } else { json!("inf") },
        "blocks": block_count(f.cutoff()),
        "norm": norm,
    });
    println!("{value}");
    if st.has_out_dir() {
        let mut run = Run::start(st)?;
        run.out.write_json("besov.json", &value)?;
        run.finish(st, threads, &value)?;
    }
    Ok(())
}

pub fn commutator_sweep_cmd(st: &mut Settings, threads: usize) -> Result<(), CliError> {
    let s = st.f64_or("s", 1.0)?;
    let eps = st.f64_or("eps", 0.2)?;
    let lo = st.usize_or("Nmin", 8)?;
    let hi = st.usize_or("Nmax", 128)?;
    let samples = st.u64_or("samples", 100)?;
    let seed = st.u64_or("seed", 0)?;
    if lo == 0 || hi < lo {
        return Err(CliError::Validation("need 1 ≤ --Nmin ≤ --Nmax".into()));
    }
    let cutoffs: Vec<usize> = std::iter::successors(Some(lo), |&n| Some(2 * n)).take_while(|&n| n <= hi).collect();
    let rows = commutator_sweep(s, eps, &cutoffs, samples, seed)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.cutoff.to_string(), num(r.mean), num(r.max), num(r.stderr)])
        .collect();
    let mut run = Run::start(st)?;
    run.out.write_csv("commutator.csv", &["N", "ratio_mean", "ratio_max", "ratio_stderr"], &table)?;
    run.finish(st, threads, json!({ "s": s, "eps": eps, "cutoffs": cutoffs, "samples": samples, "seed": seed }))
}

pub fn invariance_cmd(st: &mut Settings, threads: usize) -> Result<(), CliError> {
    let cfg = InvarianceConfig {
        s: st.f64("s")?,
        cutoff: st.usize("N")?,
        dt: st.f64("dt")?,
        horizon: st.f64("T")?,
        samples: st.u64("samples")?,
        seed: st.u64_or("seed", 0)?,
    };
    let r = linear_invariance_test(&cfg)?;
    println!(
        "variance z within 3: {:.4}; cross within 3: {:.4}; drift within 3: {:.4}",
        r.variance_fraction_within_3, r.cross_fraction_within_3, r.drift_fraction_within_3
    );
    let all: Vec<EstimatorReport> = r.variances.iter().chain(&r.cross).chain(&r.drift).cloned().collect();
    let mut run = Run::start(st)?;
    write_reports(&mut run, &all)?;
    run.finish(st, threads, cfg)
}

pub fn partition_cmd(st: &mut Settings, threads: usize) -> Result<(), CliError> {
    let cfg = PartitionConfig {
        s: st.f64("s")?,
        cutoff: st.usize("N")?,
        samples: st.u64("samples")?,
        seed: st.u64_or("seed", 0)?,
        potential: potential(&st.str_or("potential", "renormalized"))?,
    };
    let r = partition_estimate(&cfg)?;
    println!(
        "log Z = {:.6} ± {:.6}; Jensen {}",
        r.log_z.mean,
        r.log_z.stderr,
        if r.jensen_holds { "holds" } else { "violated" }
    );
    let reports = vec![
        r.z.clone()
            .with("jensen_lower", r.jensen_lower)
            .with("jensen_holds", f64::from(u8::from(r.jensen_holds))),
        r.log_z.clone(),
        r.mean_potential.clone(),
    ];
    let mut run = Run::start(st)?;
    write_reports(&mut run, &reports)?;
    run.finish(st, threads, cfg)
}

pub fn bd_bound_cmd(st: &mut Settings, threads: usize) -> Result<(), CliError> {
    let cfg = BdConfig {
        s: st.f64("s")?,
        cutoff: st.usize("N")?,
        samples: st.u64("samples")?,
        seed: st.u64_or("seed", 0)?,
        potential: potential(&st.str_or("potential", "renormalized"))?,
        ascent_steps: st.u64_or("ascent_steps", 50)? as u32,
        step_size: st.f64_or("step_size", 1.0)?,
        ceiling: st.f64_or("ceiling", 1e6)?,
    };
    let r = bd_bound(&cfg)?;
    println!("bound = {:.6} ± {:.6}", r.bound.mean, r.bound.stderr);
    let per: Vec<Vec<String>> = r.per_sample.iter().enumerate().map(|(i, v)| vec![i.to_string(), num(*v)]).collect();
    let mut run = Run::start(st)?;
    write_reports(&mut run, &[r.bound.clone(), r.start.clone()])?;
    run.out.write_csv("per_sample.csv", &["sample", "inner_max"], &per)?;
    run.finish(st, threads, cfg)
}

pub fn density_check_cmd(st: &mut Settings, threads: usize) -> Result<(), CliError> {
    let obs = observables(&st.str_or("observable", "all"))?;
    let base = DensityConfig {
        s: st.f64("s")?,
        cutoff: st.usize("N")?,
        dt: st.f64("dt")?,
        horizon: st.f64("T")?,
        samples: st.u64("samples")?,
        seed: st.u64_or("seed", 0)?,
        observable: Observable::Unit,
        cubic: st.bool_or("cubic", true)?,
        ess_floor: st.f64_or("ess_floor", 5.0)?,
    };
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for o in obs {
        let r = density_derivative_check(&DensityConfig { observable: o, ..base })?;
        println!(
            "{}: D = {:.6e}, B = {:.6e}, |D − B| = {:.3e}, combined = {:.3e}, ess = {:.1}, {}",
            o.name(),
            r.d_extrapolated.mean,
            r.bracket_side.mean,
            r.discrepancy.abs(),
            r.combined_uncertainty,
            r.ess,
            if r.passes { "pass" } else { "fail" }
        );
        rows.push(vec![
            o.name().to_string(),
            num(r.d_full.mean),
            num(r.d_half.mean),
            num(r.d_extrapolated.mean),
            num(r.bracket_side.mean),
            num(r.stderr_difference),
            num(r.bias_estimate),
            num(r.combined_uncertainty),
            num(r.discrepancy),
            num(r.ess),
            r.passes.to_string(),
        ]);
        for mut e in [r.d_full, r.d_half, r.d_extrapolated, r.bracket_side] {
            e.name = format!("{}:{}", o.name(), e.name);
            reports.push(e);
        }
    }
    let mut run = Run::start(st)?;
    run.out.write_jsonl("reports.jsonl", &reports)?;
    run.out.write_csv(
        "summary.csv",
        &[
            "observable", "d_full", "d_half", "d_extrapolated", "bracket", "stderr_difference", "bias",
            "combined", "discrepancy", "ess", "passes",
        ],
        &rows,
    )?;
    run.finish(st, threads, base)
}

pub fn qi_scan_cmd(st: &mut Settings, threads: usize) -> Result<(), CliError> {
    let cfg = QiConfig {
        s: st.f64("s")?,
        cutoff: st.usize("N")?,
        dt: st.f64("dt")?,
        horizon: st.f64("T")?,
        samples: st.u64("samples")?,
        seed: st.u64_or("seed", 0)?,
        cubic: st.bool_or("cubic", true)?,
        alpha: st.f64_or("alpha", 1e-3)?,
    };
    let r = quasi_invariance_scan(&cfg)?;
    let meta = sdnlw::lab::ReportMeta {
        s: cfg.s,
        cutoff: cfg.cutoff,
        dt: cfg.dt,
        horizon: cfg.horizon,
        seed: cfg.seed,
    };
    let reports: Vec<EstimatorReport> = r
        .rows
        .iter()
        .map(|row| {
            EstimatorReport::new(format!("ks:{}", row.coordinate), row.ks_nu, 0.0, cfg.samples, r.ess, meta)
                .with("ks_mu", row.ks_mu)
                .with("var_ratio_nu", row.var_ratio_nu)
                .with("var_ratio_mu", row.var_ratio_mu)
                .with("ks_critical_nu", r.ks_critical_nu)
                .with("ks_critical_mu", r.ks_critical_mu)
        })
        .collect();
    let rows: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|row| {
            vec![
                row.coordinate.clone(),
                num(row.ks_nu),
                num(row.ks_mu),
                num(row.var_ratio_nu),
                num(row.var_ratio_mu),
            ]
        })
        .collect();
    println!(
        "ess = {:.1}; KS critical ν {:.4}, μ {:.4}; finite: {}",
        r.ess, r.ks_critical_nu, r.ks_critical_mu, r.all_finite
    );
    let mut run = Run::start(st)?;
    run.out.write_jsonl("reports.jsonl", &reports)?;
    run.out.write_csv("summary.csv", &["coordinate", "ks_nu", "ks_mu", "var_ratio_nu", "var_ratio_mu"], &rows)?;
    run.finish(st, threads, cfg)
}

pub fn kr_check_cmd(st: &mut Settings, threads: usize) -> Result<(), CliError> {
    let (s, x) = if st.raw("in").is_some() {
        let (s_file, x) = read_state(st)?;
        (st.f64_or("s", s_file)?, x)
    } else {
        let s = st.f64("s")?;
        let n = st.usize("N")?;
        let seed = st.u64_or("seed", 0)?;
        (s, sample_mu(&MeasureSpec::new(s, n), &sample_stream(seed, 0)))
    };
    let alpha = st.f64_or("alpha", 0.5)?;
    let r = st.f64("R")?;
    let m_max = st.usize_or("Mmax", x.cutoff())?;
    let grid: Vec<usize> = std::iter::successors(Some(1usize), |&m| Some(2 * m)).take_while(|&m| m <= m_max).collect();
    let check = kr_membership(&x, s, alpha, r, &grid)?;
    let text = serde_json::to_string(&check).map_err(|e| CliError::Io(e.to_string()))?;
    println!("{text}");
    let mut run = Run::start(st)?;
    run.out.write_jsonl("kr.jsonl", &[&check])?;
    run.finish(st, threads, json!({ "s": s, "alpha": alpha, "R": r, "grid": grid }))
}

pub fn selftest_cmd(st: &mut Settings, quick: bool, threads: usize) -> Result<(), CliError> {
    let results = selftest::run(quick)?;
    let mut failed = Vec::new();
    for c in &results {
        println!("{} {:<32} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        if !c.passed {
            failed.push(c.name.clone());
        }
    }
    if st.has_out_dir() {
        let mut run = Run::start(st)?;
        run.out.write_jsonl("selftest.jsonl", &results)?;
        run.finish(st, threads, json!({ "quick": quick }))?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Acceptance(format!("failed checks: {}", failed.join(", "))))
    }
}
