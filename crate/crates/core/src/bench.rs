//! Empirical error metrics, convergence and work studies, and baseline
//! comparisons (compressed sensing vs. least squares vs. Monte Carlo).
//!
//! The work model is abstract and machine-independent: a solve at level l
//! costs 2^{nl} units (DOF-proportional), and each detail sample pays for a
//! fine and a coarser solve, the factor (1 + 2^{−n}).

use std::io::Write;

use rayon::prelude::*;

use crate::chebyshev::sample_measure;
use crate::error::CoreError;
use crate::multiindex::MultiIndex;
use crate::pde::{qoi_at_resolution, MeshHierarchy, ParametricProblem};
use crate::pipeline::{
    aggregated_coefficients, evaluate, make_schedule, run, LevelSchedule, RunOptions, SampleRule,
    Surrogate,
};
use crate::recovery::{least_squares, mc_project, Algorithm, RecoveryRequest};
use crate::rng::derive_seed;
use crate::weights::WeightConfig;

/// Stream tag separating test-point sampling from training batches.
const TEST_STREAM_TAG: u64 = 0x7E57_0000;

/// Empirical error norms over a fresh test sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// (1/N) Σ |F − F̂|.
    pub l1: f64,
    /// √((1/N) Σ |F − F̂|²).
    pub l2: f64,
    /// max |F − F̂|.
    pub linf: f64,
    pub n_test: usize,
    /// Cells per side of the reference solver.
    pub reference_cells: usize,
    pub seed: u64,
}

impl ErrorReport {
    pub fn from_errors(errors: &[f64], reference_cells: usize, seed: u64) -> Self {
        let n = errors.len().max(1) as f64;
        let l1 = errors.iter().map(|e| e.abs()).sum::<f64>() / n;
        let l2 = (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
        let linf = errors.iter().fold(0.0f64, |acc, e| acc.max(e.abs()));
        Self {
            l1,
            l2,
            linf,
            n_test: errors.len(),
            reference_cells,
            seed,
        }
    }
}

/// Draws `n_test` fresh parameter points, computes the reference QoI on a
/// grid at least `refinement` times finer than the surrogate's finest level,
/// and reports the three empirical error norms.
pub fn empirical_errors(
    surrogate: &Surrogate,
    problem: &ParametricProblem,
    refinement: usize,
    n_test: usize,
    seed: u64,
) -> Result<ErrorReport, CoreError> {
    if refinement < 4 {
        return Err(CoreError::Config(format!(
            "reference refinement must be at least 4, got {refinement}"
        )));
    }
    if n_test == 0 {
        return Err(CoreError::Config("need at least one test point".into()));
    }
    let levels = surrogate.levels.len();
    let mesh = MeshHierarchy::from_h0(problem.spatial_dim(), surrogate.h0, levels.max(1))?;
    let finest_cells = mesh.cells(levels.saturating_sub(1));
    let reference_cells = finest_cells * refinement;

    let batch = sample_measure(derive_seed(seed, TEST_STREAM_TAG), surrogate.d, n_test);
    let errors = (0..n_test)
        .into_par_iter()
        .map(|i| {
            let y = batch.point(i);
            let truth = qoi_at_resolution(problem, y, reference_cells)?;
            let prediction = evaluate(surrogate, y)?;
            Ok(prediction - truth)
        })
        .collect::<Result<Vec<f64>, CoreError>>()?;
    Ok(ErrorReport::from_errors(&errors, reference_cells, seed))
}

/// One row of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub h0: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Convergence study result: per-h0 errors (averaged over seeds) plus the
/// fitted log-log slope of the L² error.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub slope: f64,
    /// False when the errors sit at solver tolerance and the fit means
    /// nothing.
    pub reliable: bool,
}

/// Ordinary least-squares slope of ln(err) against ln(h0).
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(h, e) in points {
        let x = h.ln();
        let y = e.max(f64::MIN_POSITIVE).ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Runs the pipeline for every h0 in the sweep (same level count, sparsity
/// constant, rate exponent and sample rule), averages the empirical errors
/// over the given seeds, and fits the L² slope.
#[allow(clippy::too_many_arguments)]
pub fn convergence_study(
    problem: &ParametricProblem,
    h0_sweep: &[f64],
    levels: usize,
    c_s: f64,
    sigma: f64,
    rule: SampleRule,
    weights: &WeightConfig,
    options: RunOptions,
    n_test: usize,
    refinement: usize,
    seeds: &[u64],
) -> Result<ConvergenceTable, CoreError> {
    if h0_sweep.len() < 3 {
        return Err(CoreError::Config(format!(
            "a slope fit needs at least 3 meshwidths, got {}",
            h0_sweep.len()
        )));
    }
    if seeds.is_empty() {
        return Err(CoreError::Config("need at least one seed".into()));
    }
    let mut rows = Vec::with_capacity(h0_sweep.len());
    for &h0 in h0_sweep {
        let schedule = make_schedule(levels, h0, c_s, sigma, rule, weights)?;
        let (mut l1, mut l2, mut linf) = (0.0, 0.0, 0.0);
        for &seed in seeds {
            let surrogate = run(problem, &schedule, seed, options)?;
            let report = empirical_errors(&surrogate, problem, refinement, n_test, seed)?;
            l1 += report.l1;
            l2 += report.l2;
            linf += report.linf;
        }
        let k = seeds.len() as f64;
        rows.push(ConvergenceRow {
            h0,
            l1: l1 / k,
            l2: l2 / k,
            linf: linf / k,
        });
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.h0, r.l2)).collect();
    let slope = fit_loglog_slope(&points);
    // errors at solver tolerance carry no slope information
    let max_err = rows.iter().fold(0.0f64, |acc, r| acc.max(r.l2));
    Ok(ConvergenceTable {
        rows,
        slope,
        reliable: max_err > 1e-8,
    })
}

/// Abstract total work of a schedule on an n-dimensional domain:
/// Σ_l m_l · 2^{n·l} · (1 + 2^{−n}). The unit is one solve at level 0.
pub fn work_total(schedule: &LevelSchedule, spatial_dim: usize) -> f64 {
    let n = spatial_dim as f64;
    let detail_factor = 1.0 + 2f64.powf(-n);
    schedule
        .levels
        .iter()
        .map(|plan| plan.m as f64 * 2f64.powf(n * plan.level as f64) * detail_factor)
        .sum()
}

/// Per-method coefficient estimates for one candidate index.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientRow {
    pub index: MultiIndex,
    pub lsq: f64,
    pub mlcspg: f64,
    pub mc: f64,
    pub mc_std_error: f64,
}

/// Coefficient comparison: the multi-level CS estimate (aggregated over
/// levels), a 2×-oversampled least-squares reference, and a Monte-Carlo
/// projection, all over the union candidate set of the schedule, ranked by
/// decreasing least-squares magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientComparison {
    pub rows: Vec<CoefficientRow>,
    pub cs_solves: usize,
    pub lsq_solves: usize,
    pub mc_solves: usize,
}

/// Runs the three estimators on the same problem. The least-squares and
/// Monte-Carlo baselines sample F at the finest schedule level, with
/// m = 2 |Γ| for least squares (oversampling ratio 2) and `mc_samples` for
/// Monte Carlo.
pub fn compare_coefficients(
    problem: &ParametricProblem,
    schedule: &LevelSchedule,
    mc_samples: usize,
    seed: u64,
    options: RunOptions,
) -> Result<CoefficientComparison, CoreError> {
    let d = problem.parameter_dim();
    let gamma = schedule.levels[0].gamma.clone();
    if gamma.is_empty() {
        return Err(CoreError::Config("empty candidate set".into()));
    }
    let finest_cells = {
        let mesh = MeshHierarchy::from_h0(
            problem.spatial_dim(),
            schedule.h0,
            schedule.level_count(),
        )?;
        mesh.cells(schedule.level_count() - 1)
    };

    // multi-level CS estimate
    let surrogate = run(problem, schedule, seed, options)?;
    let cs_solves = surrogate
        .levels
        .iter()
        .map(|l| if l.level == 0 { l.m } else { 2 * l.m })
        .sum();
    let mut cs_map = std::collections::BTreeMap::new();
    for (nu, c) in aggregated_coefficients(&surrogate) {
        cs_map.insert(nu, c);
    }

    // least-squares reference with oversampling ratio 2 at the finest level
    let m_lsq = 2 * gamma.len();
    let lsq_batch = sample_measure(derive_seed(seed, 0x15A7), d, m_lsq);
    let lsq_values = (0..m_lsq)
        .into_par_iter()
        .map(|i| qoi_at_resolution(problem, lsq_batch.point(i), finest_cells))
        .collect::<Result<Vec<f64>, CoreError>>()?;
    let lsq_matrix = crate::chebyshev::build_sensing_matrix(&lsq_batch, &gamma)?;
    let lsq_weights: Vec<f64> = gamma.iter().map(|nu| schedule.weights.weight_of(nu)).collect();
    let lsq_result = least_squares(&RecoveryRequest {
        matrix: &lsq_matrix,
        rhs: &lsq_values,
        weights: &lsq_weights,
        budget: f64::INFINITY,
        algorithm: Algorithm::Lsq,
        noise_level: None,
    })?;

    // Monte-Carlo projection at the same solve level
    let mc_batch = sample_measure(derive_seed(seed, 0x3C17), d, mc_samples);
    let mc_values = (0..mc_samples)
        .into_par_iter()
        .map(|i| qoi_at_resolution(problem, mc_batch.point(i), finest_cells))
        .collect::<Result<Vec<f64>, CoreError>>()?;
    let mc_result = mc_project(&mc_batch, &mc_values, &gamma)?;
    let mc_errors = mc_result.std_errors.unwrap_or_else(|| vec![0.0; gamma.len()]);

    let mut rows: Vec<CoefficientRow> = gamma
        .iter()
        .enumerate()
        .map(|(j, nu)| CoefficientRow {
            index: nu.clone(),
            lsq: lsq_result.coefficients[j],
            mlcspg: cs_map.get(nu).copied().unwrap_or(0.0),
            mc: mc_result.coefficients[j],
            mc_std_error: mc_errors[j],
        })
        .collect();
    rows.sort_by(|a, b| {
        b.lsq
            .abs()
            .partial_cmp(&a.lsq.abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.index.cmp(&b.index))
    });
    Ok(CoefficientComparison {
        rows,
        cs_solves,
        lsq_solves: m_lsq,
        mc_solves: mc_samples,
    })
}

/// `convergence.csv`: h0, L1, L2, Linf, slope (slope repeated per row).
pub fn write_convergence_csv<W: Write>(table: &ConvergenceTable, mut out: W) -> std::io::Result<()> {
    writeln!(out, "h0,L1,L2,Linf,slope")?;
    for row in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.h0, row.l1, row.l2, row.linf, table.slope
        )?;
    }
    Ok(())
}

/// `work.csv`: level, m, N, s, units.
pub fn write_work_csv<W: Write>(
    schedule: &LevelSchedule,
    spatial_dim: usize,
    mut out: W,
) -> std::io::Result<()> {
    let n = spatial_dim as f64;
    let detail_factor = 1.0 + 2f64.powf(-n);
    writeln!(out, "level,m,N,s,units")?;
    for plan in &schedule.levels {
        let units = plan.m as f64 * 2f64.powf(n * plan.level as f64) * detail_factor;
        writeln!(
            out,
            "{},{},{},{},{}",
            plan.level,
            plan.m,
            plan.n(),
            plan.s,
            units
        )?;
    }
    Ok(())
}

/// `coeffs.csv`: rank, multiindex, per-method values.
pub fn write_coeffs_csv<W: Write>(
    comparison: &CoefficientComparison,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "rank,multiindex,lsq,mlcspg,mc,mc_std_error")?;
    for (rank, row) in comparison.rows.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            rank + 1,
            row.index,
            row.lsq,
            row.mlcspg,
            row.mc,
            row.mc_std_error
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::{Field, Fluctuation, QoiSpec};
    use crate::pipeline::SurrogateLevel;
    use crate::weights::DEFAULT_THETA;

    fn constant_problem() -> ParametricProblem {
        ParametricProblem::new(
            1,
            Field::Constant(2.0),
            Fluctuation::Patchwise {
                amplitudes: vec![0.0, 0.0],
            },
            Field::Constant(3.0),
            QoiSpec::Integral,
        )
        .unwrap()
    }

    #[test]
    fn error_report_trivial_cases() {
        let r = ErrorReport::from_errors(&[0.0, 0.0, 0.0], 100, 1);
        assert_eq!((r.l1, r.l2, r.linf), (0.0, 0.0, 0.0));

        let r = ErrorReport::from_errors(&[1.0, 1.0, 1.0, 1.0], 100, 1);
        assert_eq!((r.l1, r.l2, r.linf), (1.0, 1.0, 1.0));

        let r = ErrorReport::from_errors(&[0.5, -1.5, 1.0], 100, 1);
        assert!(r.l1 <= r.linf && r.l2 <= r.linf);
    }

    #[test]
    fn empirical_errors_on_exact_constant_surrogate() {
        let p = constant_problem();
        let w = WeightConfig::constant(1.25, 2, DEFAULT_THETA).unwrap();
        // the surrogate reproduces F at its finest level; meshes fine enough
        // keep the remaining h²-discretization gap to the reference below 1e-8
        let sched = make_schedule(2, 1.0 / 4096.0, 8.0, 1.0, SampleRule::Practical, &w).unwrap();
        let surrogate = run(&p, &sched, 3, RunOptions::new(Algorithm::Womp)).unwrap();
        let report = empirical_errors(&surrogate, &p, 4, 50, 9).unwrap();
        assert!(report.l1 <= 1e-8, "L1 {}", report.l1);
        assert!(report.l2 <= 1e-8, "L2 {}", report.l2);
        assert!(report.linf <= 1e-8, "Linf {}", report.linf);
    }

    #[test]
    fn refinement_below_four_rejected() {
        let p = constant_problem();
        let w = WeightConfig::constant(1.25, 2, DEFAULT_THETA).unwrap();
        let sched = make_schedule(1, 0.25, 4.0, 1.0, SampleRule::Practical, &w).unwrap();
        let surrogate = run(&p, &sched, 3, RunOptions::new(Algorithm::Womp)).unwrap();
        assert!(empirical_errors(&surrogate, &p, 3, 10, 1).is_err());
    }

    #[test]
    fn slope_fit_recovers_exact_power() {
        let points: Vec<(f64, f64)> = [0.2, 0.1, 0.05, 0.025]
            .iter()
            .map(|&h| (h, 3.7 * h * h))
            .collect();
        let slope = fit_loglog_slope(&points);
        assert!((slope - 2.0).abs() < 1e-6, "slope {slope}");
    }

    #[test]
    fn work_total_examples() {
        let w = WeightConfig::constant(1.5, 2, DEFAULT_THETA).unwrap();
        let mut sched = make_schedule(1, 0.25, 4.0, 1.0, SampleRule::Practical, &w).unwrap();
        sched.levels[0].m = 10;
        assert_eq!(work_total(&sched, 1), 15.0);

        // three-level schedule with pinned sample counts in two dimensions
        let mut sched3 = make_schedule(3, 0.25, 4.0, 1.0, SampleRule::Practical, &w).unwrap();
        sched3.levels[0].m = 1082;
        sched3.levels[1].m = 438;
        sched3.levels[2].m = 165;
        assert_eq!(work_total(&sched3, 2), 6842.5);

        // linearity: doubling every m doubles the total
        let base = work_total(&sched3, 2);
        for plan in &mut sched3.levels {
            plan.m *= 2;
        }
        assert_eq!(work_total(&sched3, 2), 2.0 * base);
    }

    #[test]
    fn work_total_monotone() {
        let w = WeightConfig::constant(1.5, 2, DEFAULT_THETA).unwrap();
        let sched2 = make_schedule(2, 0.25, 4.0, 1.0, SampleRule::Practical, &w).unwrap();
        let sched3 = make_schedule(3, 0.25, 4.0, 1.0, SampleRule::Practical, &w).unwrap();
        // adding a level (same parameters) adds work
        assert!(work_total(&sched3, 1) > work_total(&sched2, 1));
    }

    #[test]
    fn csv_writers_shape() {
        let table = ConvergenceTable {
            rows: vec![ConvergenceRow {
                h0: 0.2,
                l1: 1e-3,
                l2: 2e-3,
                linf: 5e-3,
            }],
            slope: 1.8,
            reliable: true,
        };
        let mut buf = Vec::new();
        write_convergence_csv(&table, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("h0,L1,L2,Linf,slope\n"));
        assert_eq!(text.lines().count(), 2);

        let comparison = CoefficientComparison {
            rows: vec![CoefficientRow {
                index: MultiIndex::zero(),
                lsq: 0.5,
                mlcspg: 0.49,
                mc: 0.52,
                mc_std_error: 0.01,
            }],
            cs_solves: 10,
            lsq_solves: 20,
            mc_solves: 30,
        };
        let mut buf = Vec::new();
        write_coeffs_csv(&comparison, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("1,,0.5,0.49,0.52,0.01"));
    }

    #[test]
    fn degenerate_convergence_flagged_unreliable() {
        // a surrogate exact down to solver noise should not pretend to
        // exhibit a meaningful slope: on the constant problem at these mesh
        // sizes the errors sit below the 1e-8 reliability floor
        let p = constant_problem();
        let w = WeightConfig::constant(1.25, 2, DEFAULT_THETA).unwrap();
        let table = convergence_study(
            &p,
            &[1.0 / 8192.0, 1.0 / 16384.0, 1.0 / 32768.0],
            1,
            8.0,
            1.0,
            SampleRule::Practical,
            &w,
            RunOptions::new(Algorithm::Womp),
            10,
            4,
            &[5],
        )
        .unwrap();
        assert!(!table.reliable, "rows: {:?}", table.rows);
    }

    #[test]
    fn mc_error_scales_with_inverse_sqrt_m() {
        // single Chebyshev mode as the target: coefficient errors are pure
        // Monte-Carlo noise with known scaling
        let mu = MultiIndex::from_dense(&[1]);
        let gamma: Vec<MultiIndex> =
            (0..6).map(|k| MultiIndex::from_dense(&[k])).collect();
        let mut ratios = Vec::new();
        for seed in 0..3u64 {
            let mut errs = Vec::new();
            for &m in &[400usize, 40_000] {
                let batch = sample_measure(derive_seed(1000 + seed, m as u64), 1, m);
                let values: Vec<f64> = (0..m)
                    .map(|i| crate::chebyshev::cheb_tensor(&mu, batch.point(i)).unwrap())
                    .collect();
                let result = mc_project(&batch, &values, &gamma).unwrap();
                let err: f64 = result
                    .coefficients
                    .iter()
                    .enumerate()
                    .map(|(j, c)| {
                        let truth = if gamma[j] == mu { 1.0 } else { 0.0 };
                        (c - truth) * (c - truth)
                    })
                    .sum::<f64>()
                    .sqrt();
                errs.push(err);
            }
            ratios.push(errs[0] / errs[1]);
        }
        // m grew by 100: the error ratio should sit near 10
        for r in ratios {
            assert!(r > 3.0 && r < 33.0, "ratio {r}");
        }
    }

    #[test]
    fn comparison_ranks_dominant_mode_first() {
        let p = constant_problem();
        let w = WeightConfig::constant(1.25, 2, DEFAULT_THETA).unwrap();
        let sched = make_schedule(2, 0.125, 8.0, 1.0, SampleRule::Practical, &w).unwrap();
        let comparison = compare_coefficients(&p, &sched, 500, 17, RunOptions::new(Algorithm::Womp)).unwrap();
        // constant problem: the zero index dominates every method; the
        // baselines sample the finest-level discrete QoI, so they see the P1
        // integral at h = h0/2
        assert!(comparison.rows[0].index.is_zero());
        let zero = &comparison.rows[0];
        let h_finest = 0.125 / 2.0;
        let truth = 3.0 / (12.0 * 2.0) * (1.0 - h_finest * h_finest);
        assert!((zero.lsq - truth).abs() < 1e-9, "lsq {}", zero.lsq);
        assert!((zero.mlcspg - truth).abs() < 1e-6, "cs {}", zero.mlcspg);
        assert!((zero.mc - truth).abs() < 0.05, "mc {}", zero.mc);
    }

    #[test]
    fn empirical_errors_checks_surrogate_level_count() {
        // a hand-built single-block surrogate evaluates fine
        let surrogate = Surrogate {
            seed: 0,
            h0: 0.25,
            d: 2,
            algorithm: Algorithm::Womp,
            weights: WeightConfig::constant(1.25, 2, DEFAULT_THETA).unwrap(),
            problem_fingerprint: String::new(),
            levels: vec![SurrogateLevel {
                level: 0,
                h: 0.25,
                s: 2.0,
                m: 1,
                gamma: vec![MultiIndex::zero()],
                coefficients: vec![3.0 / 24.0],
                residual_norm: 0.0,
                iterations: 1,
                converged: true,
                solve_seconds: 0.0,
                recovery_seconds: 0.0,
            }],
        };
        let p = constant_problem();
        let report = empirical_errors(&surrogate, &p, 4, 10, 3).unwrap();
        assert!(report.linf < 1e-2);
    }
}
