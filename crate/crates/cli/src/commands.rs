//! Subcommand implementations.

use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;
use std::time::Instant;

use mlcspg_core::bench::{
    compare_coefficients, convergence_study, work_total, write_coeffs_csv, write_convergence_csv,
    write_work_csv,
};
use mlcspg_core::pipeline::{evaluate, read_surrogate, run, write_surrogate, RunOptions};

use crate::config::ExperimentConfig;
use crate::CliError;

/// Prints the per-level table (l, h_l, s_l, N_l, m_l, work units).
pub fn cmd_schedule(config: &ExperimentConfig) -> Result<(), CliError> {
    let problem = config.problem()?;
    let schedule = config.schedule()?;
    let n = problem.spatial_dim() as f64;
    let detail_factor = 1.0 + 2f64.powf(-n);
    println!("level,h,s,N,m,work_units,ls_advised");
    for plan in &schedule.levels {
        let units = plan.m as f64 * 2f64.powf(n * plan.level as f64) * detail_factor;
        println!(
            "{},{},{},{},{},{},{}",
            plan.level,
            plan.h,
            plan.s,
            plan.n(),
            plan.m,
            units,
            plan.ls_advised
        );
    }
    println!("total_work_units={}", work_total(&schedule, problem.spatial_dim()));
    Ok(())
}

fn run_options(config: &ExperimentConfig) -> Result<RunOptions, CliError> {
    let algorithm = config.algorithm()?;
    Ok(RunOptions {
        algorithm,
        wbp_noise: config.recovery.noise_level,
    })
}

/// Runs the pipeline and writes the surrogate file atomically (a partial
/// file never survives a failure).
pub fn cmd_run(config: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let problem = config.problem()?;
    let schedule = config.schedule()?;
    let options = run_options(config)?;
    let seed = config.schedule.seed;

    let started = Instant::now();
    let surrogate = run(&problem, &schedule, seed, options)?;
    for level in &surrogate.levels {
        let ratio = if level.solve_seconds > 0.0 {
            level.recovery_seconds / level.solve_seconds
        } else {
            0.0
        };
        eprintln!(
            "level={} m={} N={} s={} residual={} iterations={} converged={} solve_s={:.3} recovery_s={:.3} recovery_to_solve_ratio={:.4}",
            level.level,
            level.m,
            level.gamma.len(),
            level.s,
            level.residual_norm,
            level.iterations,
            level.converged,
            level.solve_seconds,
            level.recovery_seconds,
            ratio
        );
    }
    eprintln!("run_seconds={:.3}", started.elapsed().as_secs_f64());

    let tmp = out.with_extension("tmp");
    let write_result = (|| -> std::io::Result<()> {
        let mut file = std::io::BufWriter::new(fs::File::create(&tmp)?);
        write_surrogate(&surrogate, &mut file)?;
        file.flush()?;
        Ok(())
    })();
    match write_result.and_then(|()| fs::rename(&tmp, out)) {
        Ok(()) => {
            eprintln!("surrogate={}", out.display());
            Ok(())
        }
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(CliError::Runtime(format!("cannot write {}: {e}", out.display())))
        }
    }
}

fn parse_point(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad coordinate `{v}`")))
        })
        .collect()
}

/// Evaluates a surrogate at the given points, one full-precision value per
/// line.
pub fn cmd_eval(
    surrogate_path: &Path,
    points: &[String],
    points_file: Option<&Path>,
) -> Result<(), CliError> {
    let file = fs::File::open(surrogate_path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", surrogate_path.display())))?;
    let surrogate = read_surrogate(std::io::BufReader::new(file))?;

    let mut all_points: Vec<Vec<f64>> = Vec::new();
    for text in points {
        all_points.push(parse_point(text)?);
    }
    if let Some(path) = points_file {
        let file = fs::File::open(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        for line in std::io::BufReader::new(file).lines() {
            let line = line.map_err(CliError::from)?;
            let trimmed = line.trim();
            if !trimmed.is_empty() && !trimmed.starts_with('#') {
                all_points.push(parse_point(trimmed)?);
            }
        }
    }
    if all_points.is_empty() {
        return Err(CliError::Usage("no points given (use --point or --points-file)".into()));
    }
    let mut stdout = std::io::stdout().lock();
    for y in &all_points {
        let value = evaluate(&surrogate, y)?;
        writeln!(stdout, "{value}").map_err(CliError::from)?;
    }
    Ok(())
}

/// Convergence study over the bench h0 sweep plus the work table; writes
/// convergence.csv and work.csv into `out_dir`.
pub fn cmd_bench(config: &ExperimentConfig, out_dir: &Path) -> Result<(), CliError> {
    let bench = config
        .bench
        .as_ref()
        .ok_or_else(|| CliError::Usage("bench block missing from config".into()))?;
    if bench.h0_sweep.len() < 3 {
        return Err(CliError::Usage(format!(
            "bench.h0_sweep needs at least 3 meshwidths, got {}",
            bench.h0_sweep.len()
        )));
    }
    let problem = config.problem()?;
    let weights = config.weights()?;
    let rule = config.sample_rule()?;
    let options = run_options(config)?;
    let seeds = bench
        .seeds
        .clone()
        .unwrap_or_else(|| vec![config.schedule.seed]);

    let table = convergence_study(
        &problem,
        &bench.h0_sweep,
        config.schedule.levels,
        config.schedule.c_s,
        config.schedule.sigma,
        rule,
        &weights,
        options,
        bench.n_test,
        bench.refinement,
        &seeds,
    )?;

    fs::create_dir_all(out_dir).map_err(CliError::from)?;
    let conv_path = out_dir.join("convergence.csv");
    let mut conv = std::io::BufWriter::new(fs::File::create(&conv_path).map_err(CliError::from)?);
    write_convergence_csv(&table, &mut conv).map_err(CliError::from)?;
    conv.flush().map_err(CliError::from)?;

    let schedule = config.schedule()?;
    let work_path = out_dir.join("work.csv");
    let mut work = std::io::BufWriter::new(fs::File::create(&work_path).map_err(CliError::from)?);
    write_work_csv(&schedule, problem.spatial_dim(), &mut work).map_err(CliError::from)?;
    work.flush().map_err(CliError::from)?;

    println!(
        "slope={} reliable={} rows={}",
        table.slope,
        table.reliable,
        table.rows.len()
    );
    eprintln!("convergence_csv={}", conv_path.display());
    eprintln!("work_csv={}", work_path.display());
    Ok(())
}

/// Coefficient comparison (CS vs 2×-oversampled least squares vs Monte
/// Carlo); writes coeffs.csv.
pub fn cmd_compare(config: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let bench = config
        .bench
        .as_ref()
        .ok_or_else(|| CliError::Usage("bench block missing from config".into()))?;
    let problem = config.problem()?;
    let schedule = config.schedule()?;
    let options = run_options(config)?;
    let comparison = compare_coefficients(
        &problem,
        &schedule,
        bench.mc_samples,
        config.schedule.seed,
        options,
    )?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(CliError::from)?;
        }
    }
    let mut file = std::io::BufWriter::new(fs::File::create(out).map_err(CliError::from)?);
    write_coeffs_csv(&comparison, &mut file).map_err(CliError::from)?;
    file.flush().map_err(CliError::from)?;
    println!(
        "coefficients={} cs_solves={} lsq_solves={} mc_solves={}",
        comparison.rows.len(),
        comparison.cs_solves,
        comparison.lsq_solves,
        comparison.mc_solves
    );
    eprintln!("coeffs_csv={}", out.display());
    Ok(())
}
