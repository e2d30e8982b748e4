//! Command-line front end for the fractional Burgers solver.
//!
//! Four verbs cover the workflow: `run` integrates one configuration and
//! writes the diagnostic tables, `sweep` repeats that over a viscosity list
//! and fits the cross-viscosity scaling exponents, `analyze` refits the
//! exponents from a previously written output directory, and `verify`
//! executes the built-in acceptance suite.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use fracburg::config::RunConfig;
use fracburg::diagnostics::{
    c_tilde, compute_d, dissipation_residual, log_lattice_shifts, max_principle_ratio,
    time_window, window_moment, RangePartition, RunSummary, TimeWindow,
};
use fracburg::output::{
    norms_table, spectrum_table, structure_table, write_fits_csv, DerivedConstants, FitRow,
    Manifest, RunEntry, Table,
};
use fracburg::scaling::{
    fit_loglog, flatness_scaling, spectrum_scaling, structure_scaling, theoretical_exponent,
    AnalyzedRun, RangeId, ScalingTarget,
};
use fracburg::snapshot::Snapshot;
use fracburg::spectral::{norm, NormRequest};
use fracburg::stepper::{integrate, integrate_from, SolverRun};
use fracburg::verify::{run_all, VerifySettings};

#[derive(Parser)]
#[command(name = "fracburg", version, about = "Pseudo-spectral fractional Burgers solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write the diagnostic tables.
    Run(RunArgs),
    /// Integrate every viscosity of the configured sweep and fit the
    /// cross-viscosity scaling exponents.
    Sweep(IoArgs),
    /// Refit scaling exponents from an existing output directory without
    /// re-integrating.
    Analyze(OutArg),
    /// Execute the built-in acceptance suite and print one line per
    /// criterion.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct IoArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Continue from a state snapshot instead of starting from the
    /// configured initial data.
    #[arg(long, value_name = "SNAPSHOT")]
    resume: Option<PathBuf>,
    /// Perform the run twice and fail unless every output file is
    /// byte-for-byte identical between the two passes.
    #[arg(long)]
    seed_check: bool,
}

#[derive(Args)]
struct OutArg {
    /// Output directory of a previous `run` or `sweep`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run the reduced-scale variant of the suite (minutes instead of tens
    /// of minutes). The asymptotic scaling criteria (5-8) are reported for
    /// information only at this scale and do not gate the exit code.
    #[arg(long)]
    quick: bool,
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Analyze(args) => cmd_analyze(&args.out),
        Command::Verify(args) => cmd_verify(args.quick),
    }
}

/// Norms recorded in `norms.csv` and as windowed moments in the manifest.
fn standard_norms() -> Vec<NormRequest> {
    vec![
        NormRequest::hs(0.0),
        NormRequest::hs(0.75),
        NormRequest::hs(1.0),
        NormRequest::wmp(1, f64::INFINITY),
    ]
}

/// The self-similar averaging window, falling back to the full simulated
/// interval (with a warning) when the run is too short to cover it.
fn averaging_window(run: &SolverRun) -> (TimeWindow, bool) {
    match time_window(run) {
        Ok(w) => (w, false),
        Err(e) => {
            eprintln!("warning: {e}; averaging over the full run instead");
            (TimeWindow { t1: 0.0, t2: run.t_end(), c_tilde: c_tilde(run) }, true)
        }
    }
}

/// Writes the per-run tables and snapshot into `dir` and returns the
/// manifest entry plus the per-run power-law fits.
fn analyze_run(run: &SolverRun, cfg: &RunConfig, dir: &Path) -> anyhow::Result<(RunEntry, Vec<FitRow>)> {
    fs::create_dir_all(dir)?;
    let reqs = standard_norms();
    norms_table(run, &reqs)?.write_csv(&dir.join("norms.csv"))?;
    let last = run.records.last().context("run recorded no samples")?;
    Snapshot::from_record(run, last).save(&dir.join("state.fbrg"))?;

    let (window, window_fallback) = averaging_window(run);
    let a = AnalyzedRun { run, window };
    let beta = run.config.beta();
    let nu = run.config.nu;
    let analysis = &cfg.analysis;

    let shifts = log_lattice_shifts(run.grid, 0.0, 0.5, 60);
    structure_table(&a, &[0.5, 1.0, 2.0, 3.0, 4.0], &shifts)?
        .write_csv(&dir.join("structure.csv"))?;

    let partition = RangePartition::new(analysis.k_margin, beta)?;
    let (j2_lo, j2_hi) = analysis
        .shift_window
        .map(|w| (w[0], w[1]))
        .unwrap_or_else(|| partition.j2(nu));
    let (spec_lo, spec_hi) = analysis.spectrum_range.map(|r| (r[0], r[1])).unwrap_or_else(|| {
        let hi = (1.0 / j2_lo).floor() as usize;
        ((1.0 / j2_hi).ceil().max(1.0) as usize, hi.min(run.grid.dealias_cutoff()))
    });
    if spec_hi >= spec_lo {
        spectrum_table(&a, analysis.band_ratio, spec_lo, spec_hi)?
            .write_csv(&dir.join("spectrum.csv"))?;
    }

    let mut fits = Vec::new();
    let mut push_fit = |label: &str, fit: fracburg::Result<fracburg::scaling::FitResult>, theory: Option<f64>| {
        match fit {
            Ok(f) => fits.push(FitRow::new(label, &f, theory)),
            Err(e) => eprintln!("warning: fit `{label}` skipped: {e}"),
        }
    };
    let theory = |t: &ScalingTarget| theoretical_exponent(t, beta).ok();
    for p in [0.5, 2.0, 4.0] {
        push_fit(
            &format!("s{p}_vs_ell_inertial"),
            structure_scaling(&a, p, j2_lo, j2_hi),
            theory(&ScalingTarget::StructureVsEll { p, range: RangeId::Inertial }),
        );
    }
    let (j1_lo, j1_hi) = partition.j1(nu);
    push_fit(
        "s2_vs_ell_dissipative",
        structure_scaling(&a, 2.0, j1_lo, j1_hi),
        theory(&ScalingTarget::StructureVsEll { p: 2.0, range: RangeId::Dissipative }),
    );
    push_fit(
        "flatness_vs_ell",
        flatness_scaling(&a, j2_lo, j2_hi),
        theory(&ScalingTarget::FlatnessVsEll),
    );
    if spec_hi >= spec_lo {
        push_fit(
            "spectrum_vs_k",
            spectrum_scaling(&a, analysis.band_ratio, spec_lo, spec_hi),
            theory(&ScalingTarget::SpectrumVsK),
        );
    }
    write_fits_csv(&dir.join("fits.csv"), &fits)?;

    let summary = RunSummary {
        d: compute_d(run.initial_field())?,
        window,
        dissipation_residual: dissipation_residual(run),
        max_principle_ratio: max_principle_ratio(run),
    };
    let mut moments = Vec::new();
    for req in &reqs {
        let value = window_moment(run, window.t1, window.t2, analysis.kappa, |r| {
            norm(&r.field, req)
        })?;
        moments.push((req.label(), value));
    }
    let entry = RunEntry {
        nu,
        constants: DerivedConstants::new(&summary, &partition),
        moments,
        window_fallback,
    };
    Ok((entry, fits))
}

fn execute_run(cfg: &RunConfig, dir: &Path, resume: Option<&Path>) -> anyhow::Result<Manifest> {
    let start = Instant::now();
    let stepper = cfg.stepper_config()?;
    let flux = cfg.flux()?;
    let monitors = cfg.monitor_config();
    let run = if let Some(snapshot_path) = resume {
        let snap = Snapshot::load(snapshot_path)?;
        snap.check_compatible(stepper.alpha, stepper.nu)?;
        if snap.point.t >= stepper.t_end {
            bail!(
                "{} is already at t = {} >= t_end = {}; nothing to resume",
                snapshot_path.display(),
                snap.point.t,
                stepper.t_end
            );
        }
        eprintln!("resuming from t = {}", snap.point.t);
        integrate_from(&snap.point, &stepper, &flux, &monitors)?
    } else {
        integrate(&cfg.initial_field()?, &stepper, &flux, &monitors)?
    };
    let (entry, fits) = analyze_run(&run, cfg, dir)?;
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        wall_seconds: start.elapsed().as_secs_f64(),
        config: cfg.clone(),
        runs: vec![entry],
        skipped: Vec::new(),
        fits,
    };
    manifest.save(&dir.join("manifest.json"))?;
    Ok(manifest)
}

const RUN_OUTPUTS: &[&str] = &["norms.csv", "structure.csv", "spectrum.csv", "fits.csv", "state.fbrg"];

fn cmd_run(args: &RunArgs) -> anyhow::Result<()> {
    let cfg = RunConfig::from_path(&args.io.config)?;
    fs::create_dir_all(&args.io.out)?;
    let manifest = execute_run(&cfg, &args.io.out, args.resume.as_deref())?;
    report_run(&manifest);
    if args.seed_check {
        if args.resume.is_some() {
            bail!("--seed-check repeats the full run and cannot be combined with --resume");
        }
        let shadow = args.io.out.join(".seed-check");
        execute_run(&cfg, &shadow, None)?;
        let mut mismatched = Vec::new();
        for name in RUN_OUTPUTS {
            let a = fs::read(args.io.out.join(name))?;
            let b = fs::read(shadow.join(name))?;
            if a != b {
                mismatched.push(*name);
            }
        }
        fs::remove_dir_all(&shadow)?;
        if mismatched.is_empty() {
            println!("seed check: all {} output files identical byte-for-byte", RUN_OUTPUTS.len());
        } else {
            bail!("seed check FAILED: outputs differ: {}", mismatched.join(", "));
        }
    }
    Ok(())
}

fn report_run(manifest: &Manifest) {
    for entry in &manifest.runs {
        let c = &entry.constants;
        println!(
            "nu = {:.6e}: residual {:.3e}, max-principle ratio {:.4}, window [{:.3}, {:.3}]{}",
            entry.nu,
            c.dissipation_residual,
            c.max_principle_ratio,
            c.t1,
            c.t2,
            if entry.window_fallback { " (fallback: full run)" } else { "" }
        );
    }
    for (nu, reason) in &manifest.skipped {
        println!("nu = {nu:.6e}: skipped ({reason})");
    }
    for fit in &manifest.fits {
        match fit.theoretical {
            Some(t) => println!(
                "fit {}: slope {:.4} (theory {:.4}, r2 {:.4}, {} pts)",
                fit.target, fit.slope, t, fit.r2, fit.n_points
            ),
            None => println!(
                "fit {}: slope {:.4} (r2 {:.4}, {} pts)",
                fit.target, fit.slope, fit.r2, fit.n_points
            ),
        }
    }
}

fn manifest_kappa(cfg: &RunConfig) -> f64 {
    cfg.analysis.kappa
}

fn nu_dir(dir: &Path, index: usize, nu: f64) -> PathBuf {
    dir.join(format!("nu_{index:02}_{nu:.6e}"))
}

/// Cross-viscosity norm fits from the per-run windowed moments. The fit
/// target names record the moment convention: `kappa = 2` means each fitted
/// value is `({norm^2})^{1/2}`, the rms in time.
fn cross_fits(entries: &[RunEntry], beta: f64, kappa: f64) -> Vec<FitRow> {
    let mut fits = Vec::new();
    if entries.len() < 3 {
        eprintln!("warning: {} completed runs, cross-viscosity fits need 3", entries.len());
        return fits;
    }
    let nus: Vec<f64> = entries.iter().map(|e| e.nu).collect();
    let targets = [
        ("H0.75", Some(ScalingTarget::HsVsNu { s: 0.75 })),
        ("H1", Some(ScalingTarget::HsVsNu { s: 1.0 })),
        ("W1,inf", Some(ScalingTarget::WmpVsNu { m: 1, p: f64::INFINITY })),
        ("H0", None),
    ];
    for (label, target) in targets {
        let values: Option<Vec<f64>> = entries
            .iter()
            .map(|e| e.moments.iter().find(|(l, _)| l == label).map(|&(_, v)| v))
            .collect();
        let Some(values) = values else {
            eprintln!("warning: moment `{label}` missing from a manifest entry, fit skipped");
            continue;
        };
        match fit_loglog(&nus, &values) {
            Ok(fit) => {
                let theory = target.and_then(|t| theoretical_exponent(&t, beta).ok());
                fits.push(FitRow::new(format!("{label}_vs_nu[kappa={kappa}]"), &fit, theory));
            }
            Err(e) => eprintln!("warning: fit `{label}_vs_nu` skipped: {e}"),
        }
    }
    fits
}

fn cmd_sweep(args: &IoArgs) -> anyhow::Result<()> {
    let cfg = RunConfig::from_path(&args.config)?;
    let Some(sweep) = cfg.sweep.clone() else {
        bail!("{}: configuration has no [sweep] section", args.config.display());
    };
    fs::create_dir_all(&args.out)?;
    let start = Instant::now();
    let stepper = cfg.stepper_config()?;
    let flux = cfg.flux()?;
    let monitors = cfg.monitor_config();
    let u0 = cfg.initial_field()?;

    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for (i, &nu) in sweep.nus.iter().enumerate() {
        let point = fracburg::stepper::StepperConfig { nu, ..stepper.clone() };
        eprintln!("[{}/{}] nu = {nu:.6e}", i + 1, sweep.nus.len());
        match integrate(&u0, &point, &flux, &monitors) {
            Ok(run) => {
                let (entry, _) = analyze_run(&run, &cfg, &nu_dir(&args.out, i, nu))?;
                entries.push(entry);
            }
            Err(e) => {
                eprintln!("warning: nu = {nu:.6e} skipped: {e}");
                skipped.push((nu, e.to_string()));
            }
        }
    }

    let fits = cross_fits(&entries, stepper.beta(), manifest_kappa(&cfg));
    write_fits_csv(&args.out.join("fits.csv"), &fits)?;
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        wall_seconds: start.elapsed().as_secs_f64(),
        config: cfg,
        runs: entries,
        skipped,
        fits,
    };
    manifest.save(&args.out.join("manifest.json"))?;
    report_run(&manifest);
    Ok(())
}

fn cmd_analyze(out: &Path) -> anyhow::Result<()> {
    let path = out.join("manifest.json");
    let mut manifest = Manifest::load(&path)?;
    let beta = 1.0 / (manifest.config.equation.alpha - 1.0);
    let mut fits = cross_fits(&manifest.runs, beta, manifest_kappa(&manifest.config));

    // refit the per-run structure-function and flatness slopes from the
    // stored tables of each sweep subdirectory
    let analysis = &manifest.config.analysis;
    let partition = RangePartition::new(analysis.k_margin, beta)?;
    for (i, entry) in manifest.runs.iter().enumerate() {
        let table_path = nu_dir(out, i, entry.nu).join("structure.csv");
        if !table_path.exists() {
            continue;
        }
        let table = Table::read_csv(&table_path)?;
        let (lo, hi) = analysis
            .shift_window
            .map(|w| (w[0], w[1]))
            .unwrap_or_else(|| partition.j2(entry.nu));
        for (col, label, theory) in [
            (1, "s0.5", Some(0.5)),
            (3, "s2", Some(1.0)),
            (5, "s4", Some(1.0)),
            (6, "flatness", Some(-1.0)),
        ] {
            let pairs: Vec<(f64, f64)> = table
                .rows
                .iter()
                .filter(|r| r[0] > lo && r[0] <= hi)
                .map(|r| (r[0], r[col]))
                .collect();
            let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            match fit_loglog(&xs, &ys) {
                Ok(fit) => fits.push(FitRow::new(
                    format!("{label}_vs_ell[nu={:.6e}]", entry.nu),
                    &fit,
                    theory,
                )),
                Err(e) => eprintln!(
                    "warning: refit `{label}` at nu = {:.6e} skipped: {e}",
                    entry.nu
                ),
            }
        }
    }

    write_fits_csv(&out.join("fits.csv"), &fits)?;
    manifest.fits = fits;
    manifest.save(&path)?;
    report_run(&manifest);
    Ok(())
}

fn cmd_verify(quick: bool) -> anyhow::Result<()> {
    let settings = if quick { VerifySettings::quick() } else { VerifySettings::desk() };
    let results = run_all(&settings, |stage| eprintln!("verify: {stage}..."));
    let mut failed = 0;
    for r in &results {
        // the small-viscosity slope tolerances are asymptotic statements the
        // reduced scale cannot reach; report those measurements without
        // letting them gate the quick exit code
        if quick && (5..=8).contains(&r.id) {
            println!(
                "criterion {:2} ({}): INFO (reduced scale) — {}",
                r.id, r.name, r.detail
            );
        } else {
            println!("{r}");
            if !r.passed {
                failed += 1;
            }
        }
    }
    if failed == 0 {
        println!("all gated criteria passed");
        Ok(())
    } else {
        bail!("{failed} criteria failed")
    }
}
