//! Level scheduling, per-level compressed-sensing reconstruction of QoI
//! details, telescoping assembly into an evaluable surrogate, and dimension
//! truncation.
//!
//! Levels are indexed 0..L−1 with level 0 the coarsest mesh (h_0) and level
//! L−1 the finest; sparsities decrease toward the fine levels,
//! s_l = ⌈C_s 2^{(L−1−l)σ}⌉, so the finest level gets s = C_s. Every level
//! draws a fresh, independently sub-seeded sample batch; nothing is shared
//! across levels except the weight configuration.

use std::io::{BufRead, Write};
use std::time::Instant;

use rayon::prelude::*;

use crate::chebyshev::{build_sensing_matrix, cheb_tensor, sample_measure, CLAMP_TOL};
use crate::error::CoreError;
use crate::multiindex::MultiIndex;
use crate::pde::{check_uea, detail, MeshHierarchy, ParametricProblem};
use crate::recovery::{
    least_squares, mc_project, recover, wbp_cross_validated, Algorithm, RecoveryRequest,
};
use crate::rng::derive_seed;
use crate::weights::{WeightConfig, WeightKind};

/// How the per-level sample count m_l is derived from (s_l, N_l).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleRule {
    /// m_l = ⌈2 s_l ln N_l⌉, the compressed-sensing rule of thumb.
    Practical,
    /// m_l = ⌈c0 s_l max(ln³(s_l) ln(N_l), ln(1/γ_l))⌉ with γ_l = γ / L.
    Theoretical { c0: f64, gamma: f64 },
    /// m_l = N_l (interpolation regime; least squares advised).
    Interpolation,
}

impl SampleRule {
    fn sample_count(&self, s: f64, n: usize, levels: usize) -> usize {
        if n == 0 {
            return 0;
        }
        let n_f = n as f64;
        match self {
            SampleRule::Practical => (2.0 * s * n_f.ln()).ceil().max(1.0) as usize,
            SampleRule::Theoretical { c0, gamma } => {
                let gamma_l = (gamma / levels as f64).clamp(f64::MIN_POSITIVE, 1.0);
                let ln_s = s.ln().max(0.0);
                let bound = (ln_s.powi(3) * n_f.ln()).max((1.0 / gamma_l).ln());
                (c0 * s * bound).ceil().max(1.0) as usize
            }
            SampleRule::Interpolation => n,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SampleRule::Practical => "practical",
            SampleRule::Theoretical { .. } => "theoretical",
            SampleRule::Interpolation => "interpolation",
        }
    }
}

/// One row of the schedule: meshwidth, sparsity, sample count and candidate
/// set for a level.
#[derive(Debug, Clone)]
pub struct LevelPlan {
    pub level: usize,
    pub h: f64,
    pub s: f64,
    pub m: usize,
    pub gamma: Vec<MultiIndex>,
    /// m_l ≥ N_l: compressed sensing is pointless, least squares advised.
    pub ls_advised: bool,
}

impl LevelPlan {
    pub fn n(&self) -> usize {
        self.gamma.len()
    }

    /// 1-based level label (the theory counts levels 1..L, the tables and
    /// this implementation 0..L−1).
    pub fn level_one_based(&self) -> usize {
        self.level + 1
    }
}

/// The full level schedule plus the parameters that generated it.
#[derive(Debug, Clone)]
pub struct LevelSchedule {
    pub h0: f64,
    pub c_s: f64,
    pub sigma: f64,
    pub rule: SampleRule,
    pub weights: WeightConfig,
    pub levels: Vec<LevelPlan>,
}

impl LevelSchedule {
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Meshwidth of the finest level.
    pub fn h_finest(&self) -> f64 {
        self.levels.last().map(|p| p.h).unwrap_or(self.h0)
    }
}

/// Builds the schedule: s_l = ⌈C_s 2^{(L−1−l)σ}⌉, Γ_l = {ω_ν² ≤ s_l / 2},
/// and m_l from the sample rule. Candidate sets are nested by construction
/// (s_l is nonincreasing in l).
pub fn make_schedule(
    levels: usize,
    h0: f64,
    c_s: f64,
    sigma: f64,
    rule: SampleRule,
    weights: &WeightConfig,
) -> Result<LevelSchedule, CoreError> {
    if levels == 0 {
        return Err(CoreError::Config("schedule needs at least one level".into()));
    }
    if !(c_s >= 1.0) {
        return Err(CoreError::Config(format!("sparsity constant must be >= 1, got {c_s}")));
    }
    if !(sigma > 0.0) {
        return Err(CoreError::Config(format!("rate exponent must be > 0, got {sigma}")));
    }
    if !(h0 > 0.0 && h0 <= 0.5) {
        return Err(CoreError::Config(format!("h0 must lie in (0, 1/2], got {h0}")));
    }
    let mut plans = Vec::with_capacity(levels);
    for l in 0..levels {
        let s = (c_s * 2f64.powf(((levels - 1 - l) as f64) * sigma)).ceil();
        let gamma = weights.enumerate_candidate_set(s)?;
        let m = rule.sample_count(s, gamma.len(), levels);
        plans.push(LevelPlan {
            level: l,
            h: h0 * 2f64.powi(-(l as i32)),
            s,
            m,
            ls_advised: !gamma.is_empty() && m >= gamma.len(),
            gamma,
        });
    }
    Ok(LevelSchedule {
        h0,
        c_s,
        sigma,
        rule,
        weights: weights.clone(),
        levels: plans,
    })
}

/// Recovery configuration for a pipeline run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub algorithm: Algorithm,
    /// Fixed residual bound for WBP; cross-validated when absent.
    pub wbp_noise: Option<f64>,
}

impl RunOptions {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            wbp_noise: None,
        }
    }
}

/// Recovered coefficient block of one level.
#[derive(Debug, Clone)]
pub struct SurrogateLevel {
    pub level: usize,
    pub h: f64,
    pub s: f64,
    pub m: usize,
    pub gamma: Vec<MultiIndex>,
    /// Coefficients ΔF̂^l_ν aligned with `gamma`.
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Seconds spent in PDE solves / in sparse recovery (diagnostics only,
    /// not persisted).
    pub solve_seconds: f64,
    pub recovery_seconds: f64,
}

/// Multi-level Chebyshev surrogate: evaluation sums ΔF̂^l_ν T_ν(y) over all
/// levels and candidate indices.
#[derive(Debug, Clone)]
pub struct Surrogate {
    pub seed: u64,
    pub h0: f64,
    pub d: usize,
    pub algorithm: Algorithm,
    pub weights: WeightConfig,
    pub problem_fingerprint: String,
    pub levels: Vec<SurrogateLevel>,
}

/// Runs the full pipeline: per level, draw m_l fresh sample points
/// (sub-seeded by level), compute details ΔF^l(y^(i)), assemble the sensing
/// matrix over Γ_l and recover the coefficient block with budget s_l.
/// Levels with an empty candidate set or no samples store an empty block;
/// oversampled levels (`ls_advised`) fall back to least squares under WBP,
/// whose equality constraint may be unattainable there.
pub fn run(
    problem: &ParametricProblem,
    schedule: &LevelSchedule,
    seed: u64,
    options: RunOptions,
) -> Result<Surrogate, CoreError> {
    check_uea(problem)?;
    let d = problem.parameter_dim();
    for plan in &schedule.levels {
        if let Some(nu) = plan.gamma.iter().find(|nu| nu.max_dim() as usize > d) {
            return Err(CoreError::Dimension(format!(
                "candidate index {nu} touches dimension {} but the problem has {d} parameters",
                nu.max_dim()
            )));
        }
    }
    if let WeightKind::Constant { active_dims, .. } = schedule.weights.kind() {
        if *active_dims != d {
            return Err(CoreError::Config(format!(
                "constant weights declare {active_dims} active dimensions, problem has {d}"
            )));
        }
    }
    let mesh = MeshHierarchy::from_h0(problem.spatial_dim(), schedule.h0, schedule.level_count())?;

    let mut levels = Vec::with_capacity(schedule.level_count());
    for plan in &schedule.levels {
        if plan.gamma.is_empty() || plan.m == 0 {
            levels.push(SurrogateLevel {
                level: plan.level,
                h: plan.h,
                s: plan.s,
                m: 0,
                gamma: plan.gamma.clone(),
                coefficients: vec![0.0; plan.gamma.len()],
                residual_norm: 0.0,
                iterations: 0,
                converged: true,
                solve_seconds: 0.0,
                recovery_seconds: 0.0,
            });
            continue;
        }
        let level_seed = derive_seed(seed, plan.level as u64);
        let batch = sample_measure(level_seed, d, plan.m);

        let solve_start = Instant::now();
        let details = (0..plan.m)
            .into_par_iter()
            .map(|i| detail(problem, batch.point(i), plan.level, &mesh))
            .collect::<Result<Vec<f64>, CoreError>>()?;
        let solve_seconds = solve_start.elapsed().as_secs_f64();

        let recovery_start = Instant::now();
        let matrix = build_sensing_matrix(&batch, &plan.gamma)?;
        let weights: Vec<f64> = plan.gamma.iter().map(|nu| schedule.weights.weight_of(nu)).collect();
        let result = match options.algorithm {
            // oversampled levels carry no compressed-sensing advantage and
            // the equality constraint may be unattainable: least squares
            Algorithm::Wbp if plan.ls_advised => least_squares(&RecoveryRequest {
                matrix: &matrix,
                rhs: &details,
                weights: &weights,
                budget: f64::INFINITY,
                algorithm: Algorithm::Lsq,
                noise_level: None,
            })?,
            Algorithm::Wbp => match options.wbp_noise {
                Some(eta) => recover(&RecoveryRequest {
                    matrix: &matrix,
                    rhs: &details,
                    weights: &weights,
                    budget: plan.s,
                    algorithm: Algorithm::Wbp,
                    noise_level: Some(eta),
                })?,
                None => wbp_cross_validated(&matrix, &details, &weights, plan.s)?,
            },
            Algorithm::Mc => mc_project(&batch, &details, &plan.gamma)?,
            Algorithm::Lsq => least_squares(&RecoveryRequest {
                matrix: &matrix,
                rhs: &details,
                weights: &weights,
                budget: f64::INFINITY,
                algorithm: Algorithm::Lsq,
                noise_level: None,
            })?,
            algorithm => recover(&RecoveryRequest {
                matrix: &matrix,
                rhs: &details,
                weights: &weights,
                budget: plan.s,
                algorithm,
                noise_level: None,
            })?,
        };
        let recovery_seconds = recovery_start.elapsed().as_secs_f64();

        levels.push(SurrogateLevel {
            level: plan.level,
            h: plan.h,
            s: plan.s,
            m: plan.m,
            gamma: plan.gamma.clone(),
            coefficients: result.coefficients,
            residual_norm: result.residual_norm,
            iterations: result.iterations,
            converged: result.converged,
            solve_seconds,
            recovery_seconds,
        });
    }

    Ok(Surrogate {
        seed,
        h0: schedule.h0,
        d,
        algorithm: options.algorithm,
        weights: schedule.weights.clone(),
        problem_fingerprint: problem.fingerprint(),
        levels,
    })
}

/// Evaluates the surrogate at y ∈ [−1, 1]^d (coordinates within the clamp
/// tolerance of the boundary are accepted).
pub fn evaluate(surrogate: &Surrogate, y: &[f64]) -> Result<f64, CoreError> {
    if y.len() < surrogate.d {
        return Err(CoreError::Dimension(format!(
            "point has {} coordinates, surrogate needs {}",
            y.len(),
            surrogate.d
        )));
    }
    if let Some(bad) = y.iter().find(|v| v.abs() > 1.0 + CLAMP_TOL) {
        return Err(CoreError::Domain(format!("coordinate {bad} lies outside [-1, 1]")));
    }
    let mut total = 0.0;
    for level in &surrogate.levels {
        for (nu, &c) in level.gamma.iter().zip(&level.coefficients) {
            if c != 0.0 {
                total += c * cheb_tensor(nu, y)?;
            }
        }
    }
    Ok(total)
}

/// Aggregated coefficient Σ_l ΔF̂^l_ν for every index appearing in any level.
pub fn aggregated_coefficients(surrogate: &Surrogate) -> Vec<(MultiIndex, f64)> {
    let mut map: std::collections::BTreeMap<MultiIndex, f64> = std::collections::BTreeMap::new();
    for level in &surrogate.levels {
        for (nu, &c) in level.gamma.iter().zip(&level.coefficients) {
            *map.entry(nu.clone()).or_insert(0.0) += c;
        }
    }
    map.into_iter().collect()
}

/// Dimension truncation: B = ⌈h_L^{−(t+t′)p/(1−p)}⌉ together with the tail
/// bound min{1/(1/p−1), 1} ‖b‖_p B^{−(1/p−1)} evaluated over the supplied
/// (finite, nonincreasing) decay sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub b: usize,
    pub tail_bound: f64,
}

pub fn truncate_dimension(
    decay: &[f64],
    p: f64,
    t_sum: f64,
    h_finest: f64,
) -> Result<Truncation, CoreError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(CoreError::Config(format!("p must lie in (0, 1), got {p}")));
    }
    if !(h_finest > 0.0 && h_finest < 1.0) {
        return Err(CoreError::Config(format!("h must lie in (0, 1), got {h_finest}")));
    }
    if decay.windows(2).any(|w| w[1] > w[0]) {
        return Err(CoreError::Config("decay sequence must be nonincreasing".into()));
    }
    let exponent = t_sum * p / (1.0 - p);
    let b = h_finest.powf(-exponent).ceil() as usize;
    Ok(Truncation {
        b,
        tail_bound: truncation_tail_bound(decay, p, b),
    })
}

/// Tail bound min{1/(1/p−1), 1} ‖b‖_p B^{−(1/p−1)} for a finite decay
/// sequence.
pub fn truncation_tail_bound(decay: &[f64], p: f64, b: usize) -> f64 {
    let norm_p = decay
        .iter()
        .map(|v| v.abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p);
    let factor = (1.0 / (1.0 / p - 1.0)).min(1.0);
    factor * norm_p * (b as f64).powf(-(1.0 / p - 1.0))
}

// ---------------------------------------------------------------------------
// Surrogate file format: `#key=value` header lines (seed, L, h0, d, weight
// config, algorithm, problem fingerprint, per-level diagnostics), then CSV
// rows `level,multiindex,coefficient` using the multi-index text form.
// ---------------------------------------------------------------------------

fn weights_to_text(w: &WeightConfig) -> String {
    let kind = match w.kind() {
        WeightKind::Constant { beta, active_dims } => format!("constant,beta={beta},d={active_dims}"),
        WeightKind::Polynomial { c, alpha } => format!("polynomial,c={c},alpha={alpha}"),
        WeightKind::Explicit { values } => {
            let vals: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            format!("explicit,values={}", vals.join("|"))
        }
    };
    format!("{kind},theta={}", w.theta())
}

fn weights_from_text(text: &str) -> Result<WeightConfig, CoreError> {
    let mut kind = None;
    let mut beta = None;
    let mut d = None;
    let mut c = None;
    let mut alpha = None;
    let mut values: Option<Vec<f64>> = None;
    let mut theta = None;
    for part in text.split(',') {
        if let Some((k, v)) = part.split_once('=') {
            match k {
                "beta" => beta = Some(parse_f64(v)?),
                "d" => d = Some(v.parse::<usize>().map_err(|_| bad_header(v))?),
                "c" => c = Some(parse_f64(v)?),
                "alpha" => alpha = Some(parse_f64(v)?),
                "theta" => theta = Some(parse_f64(v)?),
                "values" => {
                    values = Some(
                        v.split('|')
                            .map(parse_f64)
                            .collect::<Result<Vec<f64>, CoreError>>()?,
                    )
                }
                _ => return Err(bad_header(part)),
            }
        } else {
            kind = Some(part.to_string());
        }
    }
    let theta = theta.ok_or_else(|| bad_header("missing theta"))?;
    match kind.as_deref() {
        Some("constant") => WeightConfig::constant(
            beta.ok_or_else(|| bad_header("missing beta"))?,
            d.ok_or_else(|| bad_header("missing d"))?,
            theta,
        ),
        Some("polynomial") => WeightConfig::polynomial(
            c.ok_or_else(|| bad_header("missing c"))?,
            alpha.ok_or_else(|| bad_header("missing alpha"))?,
            theta,
        ),
        Some("explicit") => {
            WeightConfig::explicit(values.ok_or_else(|| bad_header("missing values"))?, theta)
        }
        other => Err(bad_header(&format!("unknown weight kind {other:?}"))),
    }
}

fn parse_f64(s: &str) -> Result<f64, CoreError> {
    s.parse::<f64>()
        .map_err(|_| CoreError::Parse(format!("bad float `{s}`")))
}

fn bad_header(detail: &str) -> CoreError {
    CoreError::Parse(format!("malformed surrogate header: {detail}"))
}

/// Writes the surrogate in its text format. Floats go through the shortest
/// round-trip representation, so identical surrogates produce identical
/// bytes.
pub fn write_surrogate<W: Write>(surrogate: &Surrogate, mut out: W) -> std::io::Result<()> {
    writeln!(out, "#seed={}", surrogate.seed)?;
    writeln!(out, "#levels={}", surrogate.levels.len())?;
    writeln!(out, "#h0={}", surrogate.h0)?;
    writeln!(out, "#d={}", surrogate.d)?;
    writeln!(out, "#weights={}", weights_to_text(&surrogate.weights))?;
    writeln!(out, "#algorithm={}", surrogate.algorithm.name())?;
    writeln!(out, "#problem={}", surrogate.problem_fingerprint)?;
    for level in &surrogate.levels {
        writeln!(
            out,
            "#level={},h={},s={},m={},N={},residual={},iterations={},converged={}",
            level.level,
            level.h,
            level.s,
            level.m,
            level.gamma.len(),
            level.residual_norm,
            level.iterations,
            level.converged
        )?;
    }
    writeln!(out, "level,multiindex,coefficient")?;
    for level in &surrogate.levels {
        for (nu, c) in level.gamma.iter().zip(&level.coefficients) {
            writeln!(out, "{},{},{}", level.level, nu, c)?;
        }
    }
    Ok(())
}

/// Reads a surrogate written by [`write_surrogate`].
pub fn read_surrogate<R: BufRead>(reader: R) -> Result<Surrogate, CoreError> {
    let mut seed = None;
    let mut h0 = None;
    let mut d = None;
    let mut weights = None;
    let mut algorithm = None;
    let mut fingerprint = String::new();
    let mut level_meta: Vec<(usize, f64, f64, usize, f64, usize, bool)> = Vec::new();
    let mut rows: Vec<(usize, MultiIndex, f64)> = Vec::new();
    let mut seen_csv_header = false;

    for line in reader.lines() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let (key, value) = rest
                .split_once('=')
                .ok_or_else(|| bad_header(&line))?;
            match key {
                "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad_header(value))?),
                "levels" => {}
                "h0" => h0 = Some(parse_f64(value)?),
                "d" => d = Some(value.parse::<usize>().map_err(|_| bad_header(value))?),
                "weights" => weights = Some(weights_from_text(value)?),
                "algorithm" => {
                    algorithm = Some(value.parse::<Algorithm>()?);
                }
                "problem" => fingerprint = value.to_string(),
                "level" => {
                    let mut lvl = None;
                    let mut h = None;
                    let mut s = None;
                    let mut m = None;
                    let mut residual = None;
                    let mut iterations = None;
                    let mut converged = None;
                    for item in format!("level={value}").split(',') {
                        let (k, v) = item.split_once('=').ok_or_else(|| bad_header(item))?;
                        match k {
                            "level" => lvl = Some(v.parse::<usize>().map_err(|_| bad_header(v))?),
                            "h" => h = Some(parse_f64(v)?),
                            "s" => s = Some(parse_f64(v)?),
                            "m" => m = Some(v.parse::<usize>().map_err(|_| bad_header(v))?),
                            "N" => {}
                            "residual" => residual = Some(parse_f64(v)?),
                            "iterations" => {
                                iterations = Some(v.parse::<usize>().map_err(|_| bad_header(v))?)
                            }
                            "converged" => {
                                converged = Some(v.parse::<bool>().map_err(|_| bad_header(v))?)
                            }
                            _ => return Err(bad_header(item)),
                        }
                    }
                    level_meta.push((
                        lvl.ok_or_else(|| bad_header("missing level"))?,
                        h.ok_or_else(|| bad_header("missing h"))?,
                        s.ok_or_else(|| bad_header("missing s"))?,
                        m.ok_or_else(|| bad_header("missing m"))?,
                        residual.unwrap_or(0.0),
                        iterations.unwrap_or(0),
                        converged.unwrap_or(true),
                    ));
                }
                _ => return Err(bad_header(&line)),
            }
            continue;
        }
        if !seen_csv_header {
            if line != "level,multiindex,coefficient" {
                return Err(CoreError::Parse(format!("unexpected csv header `{line}`")));
            }
            seen_csv_header = true;
            continue;
        }
        let mut parts = line.splitn(3, ',');
        let level = parts
            .next()
            .ok_or_else(|| bad_header(&line))?
            .parse::<usize>()
            .map_err(|_| CoreError::Parse(format!("bad level in `{line}`")))?;
        let nu: MultiIndex = parts
            .next()
            .ok_or_else(|| bad_header(&line))?
            .parse()?;
        let coeff = parse_f64(parts.next().ok_or_else(|| bad_header(&line))?)?;
        rows.push((level, nu, coeff));
    }

    let weights = weights.ok_or_else(|| bad_header("missing weights"))?;
    let mut levels = Vec::with_capacity(level_meta.len());
    for &(lvl, h, s, m, residual, iterations, converged) in &level_meta {
        let mut gamma = Vec::new();
        let mut coefficients = Vec::new();
        for (row_level, nu, c) in &rows {
            if *row_level == lvl {
                gamma.push(nu.clone());
                coefficients.push(*c);
            }
        }
        levels.push(SurrogateLevel {
            level: lvl,
            h,
            s,
            m,
            gamma,
            coefficients,
            residual_norm: residual,
            iterations,
            converged,
            solve_seconds: 0.0,
            recovery_seconds: 0.0,
        });
    }
    Ok(Surrogate {
        seed: seed.ok_or_else(|| bad_header("missing seed"))?,
        h0: h0.ok_or_else(|| bad_header("missing h0"))?,
        d: d.ok_or_else(|| bad_header("missing d"))?,
        algorithm: algorithm.ok_or_else(|| bad_header("missing algorithm"))?,
        weights,
        problem_fingerprint: fingerprint,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::{Field, Fluctuation, QoiSpec};
    use crate::weights::DEFAULT_THETA;

    fn cosine_problem(d: usize) -> ParametricProblem {
        ParametricProblem::new(
            1,
            Field::Constant(4.3),
            Fluctuation::Cosine { mu: 2.0, terms: d },
            Field::Constant(10.0),
            QoiSpec::Integral,
        )
        .unwrap()
    }

    fn constant_problem_1d() -> ParametricProblem {
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
    fn schedule_sparsities_follow_dyadic_rule() {
        let w = WeightConfig::constant(1.08, 6, DEFAULT_THETA).unwrap();
        let sched = make_schedule(3, 0.2, 8.0, 1.0, SampleRule::Practical, &w).unwrap();
        let s: Vec<f64> = sched.levels.iter().map(|p| p.s).collect();
        assert_eq!(s, vec![32.0, 16.0, 8.0]);
        let h: Vec<f64> = sched.levels.iter().map(|p| p.h).collect();
        assert_eq!(h, vec![0.2, 0.1, 0.05]);
    }

    #[test]
    fn schedule_counts_constant_d9() {
        // golden values for the constant (β = 1.1, θ = √2, d = 9)
        // configuration at s = (64, 32, 16), cross-checked by hand against
        // the combinatorial count
        let w = WeightConfig::constant(1.1, 9, DEFAULT_THETA).unwrap();
        let sched = make_schedule(3, 0.2, 16.0, 1.0, SampleRule::Practical, &w).unwrap();
        let n: Vec<usize> = sched.levels.iter().map(|p| p.n()).collect();
        let m: Vec<usize> = sched.levels.iter().map(|p| p.m).collect();
        assert_eq!(n, vec![4687, 931, 172]);
        assert_eq!(m, vec![1082, 438, 165]);
    }

    #[test]
    fn schedule_counts_constant_d6() {
        // golden values at d = 6, v = 1.07: s = (120, 60, 30) gives
        // N = (12171, 3181, 705) and m = (2258, 968, 394); the smaller
        // schedule s = (40, 20, 10) gives m = (576, 228, 73)
        let w = WeightConfig::constant(1.07, 6, DEFAULT_THETA).unwrap();
        let sched = make_schedule(3, 0.2, 30.0, 1.0, SampleRule::Practical, &w).unwrap();
        assert_eq!(
            sched.levels.iter().map(|p| p.n()).collect::<Vec<_>>(),
            vec![12171, 3181, 705]
        );
        assert_eq!(
            sched.levels.iter().map(|p| p.m).collect::<Vec<_>>(),
            vec![2258, 968, 394]
        );
        let sched = make_schedule(3, 0.2, 10.0, 1.0, SampleRule::Practical, &w).unwrap();
        assert_eq!(
            sched.levels.iter().map(|p| p.m).collect::<Vec<_>>(),
            vec![576, 228, 73]
        );
    }

    #[test]
    fn schedule_nestedness() {
        let w = WeightConfig::constant(1.1, 5, DEFAULT_THETA).unwrap();
        let sched = make_schedule(4, 0.25, 4.0, 1.5, SampleRule::Practical, &w).unwrap();
        for pair in sched.levels.windows(2) {
            for nu in &pair[1].gamma {
                assert!(pair[0].gamma.contains(nu), "Γ_{{l+1}} ⊄ Γ_l at {nu}");
            }
        }
    }

    #[test]
    fn schedule_flags_interpolation_regime() {
        let w = WeightConfig::constant(1.5, 3, DEFAULT_THETA).unwrap();
        let sched = make_schedule(2, 0.25, 4.0, 1.0, SampleRule::Interpolation, &w).unwrap();
        for plan in &sched.levels {
            assert_eq!(plan.m, plan.n());
            assert!(plan.ls_advised || plan.n() == 0);
        }
    }

    #[test]
    fn theoretical_rule_dominates_practical() {
        let w = WeightConfig::constant(1.1, 6, DEFAULT_THETA).unwrap();
        let practical = make_schedule(3, 0.25, 16.0, 1.0, SampleRule::Practical, &w).unwrap();
        let theoretical = make_schedule(
            3,
            0.25,
            16.0,
            1.0,
            SampleRule::Theoretical { c0: 1.0, gamma: 0.01 },
            &w,
        )
        .unwrap();
        for (p, t) in practical.levels.iter().zip(&theoretical.levels) {
            // m = ⌈s max(ln³(s) ln N, ln(L/γ))⌉ exceeds ⌈2 s ln N⌉ once
            // ln³(s) ≥ 2, which holds for every s here
            assert!(t.m >= p.m, "level {}: theoretical {} < practical {}", p.level, t.m, p.m);
            assert!(t.level_one_based() == p.level + 1);
        }
    }

    #[test]
    fn schedule_propagates_infinite_set() {
        let w = WeightConfig::constant(1.0, 3, 1.0).unwrap();
        assert!(matches!(
            make_schedule(2, 0.25, 4.0, 1.0, SampleRule::Practical, &w),
            Err(CoreError::InfiniteSet(_))
        ));
    }

    #[test]
    fn run_constant_problem_concentrates_on_zero_index() {
        let p = constant_problem_1d();
        let w = WeightConfig::constant(1.25, 2, DEFAULT_THETA).unwrap();
        let sched = make_schedule(2, 0.125, 8.0, 1.0, SampleRule::Practical, &w).unwrap();
        let surrogate = run(&p, &sched, 7, RunOptions::new(Algorithm::Womp)).unwrap();

        // level 0 block: zero index carries ≈ F, everything else tiny
        let level0 = &surrogate.levels[0];
        let zero_pos = level0.gamma.iter().position(|nu| nu.is_zero()).unwrap();
        let f0 = 3.0 / (12.0 * 2.0) * (1.0 - 0.125 * 0.125);
        assert!(
            (level0.coefficients[zero_pos] - f0).abs() < 1e-8,
            "zero coefficient {} vs {f0}",
            level0.coefficients[zero_pos]
        );
        for (j, c) in level0.coefficients.iter().enumerate() {
            if j != zero_pos {
                assert!(c.abs() < 1e-8, "stray coefficient {c} at {}", level0.gamma[j]);
            }
        }
    }

    #[test]
    fn single_level_run_equals_direct_recovery() {
        let p = cosine_problem(3);
        let w = WeightConfig::constant(1.25, 3, DEFAULT_THETA).unwrap();
        let sched = make_schedule(1, 0.125, 16.0, 1.0, SampleRule::Practical, &w).unwrap();
        let surrogate = run(&p, &sched, 11, RunOptions::new(Algorithm::Womp)).unwrap();
        assert_eq!(surrogate.levels.len(), 1);

        // replicate the level-0 recovery by hand
        let mesh = MeshHierarchy::from_h0(1, 0.125, 1).unwrap();
        let plan = &sched.levels[0];
        let batch = sample_measure(derive_seed(11, 0), 3, plan.m);
        let values: Vec<f64> = (0..plan.m)
            .map(|i| detail(&p, batch.point(i), 0, &mesh).unwrap())
            .collect();
        let matrix = build_sensing_matrix(&batch, &plan.gamma).unwrap();
        let weights: Vec<f64> = plan.gamma.iter().map(|nu| w.weight_of(nu)).collect();
        let direct = recover(&RecoveryRequest {
            matrix: &matrix,
            rhs: &values,
            weights: &weights,
            budget: plan.s,
            algorithm: Algorithm::Womp,
            noise_level: None,
        })
        .unwrap();
        assert_eq!(surrogate.levels[0].coefficients, direct.coefficients);
    }

    #[test]
    fn run_is_deterministic() {
        let p = cosine_problem(3);
        let w = WeightConfig::constant(1.25, 3, DEFAULT_THETA).unwrap();
        let sched = make_schedule(2, 0.125, 8.0, 1.0, SampleRule::Practical, &w).unwrap();
        let a = run(&p, &sched, 5, RunOptions::new(Algorithm::Womp)).unwrap();
        let b = run(&p, &sched, 5, RunOptions::new(Algorithm::Womp)).unwrap();
        for (la, lb) in a.levels.iter().zip(&b.levels) {
            assert_eq!(la.coefficients, lb.coefficients);
        }
    }

    #[test]
    fn degenerate_levels_are_safe() {
        let p = constant_problem_1d();
        let w = WeightConfig::constant(1.25, 2, DEFAULT_THETA).unwrap();
        // C_s = 1: the finest level has s = 1 < 2, hence an empty Γ
        let sched = make_schedule(2, 0.125, 1.0, 1.0, SampleRule::Practical, &w).unwrap();
        assert!(sched.levels[1].gamma.is_empty());
        let surrogate = run(&p, &sched, 3, RunOptions::new(Algorithm::Womp)).unwrap();
        assert!(surrogate.levels[1].coefficients.is_empty());
        let value = evaluate(&surrogate, &[0.0, 0.0]).unwrap();
        assert!(value.is_finite());
    }

    #[test]
    fn evaluate_constant_surrogate() {
        let mut surrogate = Surrogate {
            seed: 0,
            h0: 0.25,
            d: 2,
            algorithm: Algorithm::Womp,
            weights: WeightConfig::constant(1.5, 2, DEFAULT_THETA).unwrap(),
            problem_fingerprint: "test".into(),
            levels: vec![SurrogateLevel {
                level: 0,
                h: 0.25,
                s: 2.0,
                m: 1,
                gamma: vec![MultiIndex::zero()],
                coefficients: vec![1.0],
                residual_norm: 0.0,
                iterations: 1,
                converged: true,
                solve_seconds: 0.0,
                recovery_seconds: 0.0,
            }],
        };
        assert_eq!(evaluate(&surrogate, &[0.3, -0.7]).unwrap(), 1.0);
        assert!(matches!(
            evaluate(&surrogate, &[1.5, 0.0]),
            Err(CoreError::Domain(_))
        ));

        // linearity: doubling every coefficient doubles the value
        let y = [0.3, -0.7];
        let v1 = evaluate(&surrogate, &y).unwrap();
        for level in &mut surrogate.levels {
            for c in &mut level.coefficients {
                *c *= 2.0;
            }
        }
        assert!((evaluate(&surrogate, &y).unwrap() - 2.0 * v1).abs() < 1e-15);
    }

    #[test]
    fn evaluate_matches_naive_summation() {
        let p = cosine_problem(3);
        let w = WeightConfig::constant(1.25, 3, DEFAULT_THETA).unwrap();
        let sched = make_schedule(2, 0.125, 8.0, 1.0, SampleRule::Practical, &w).unwrap();
        let surrogate = run(&p, &sched, 13, RunOptions::new(Algorithm::Womp)).unwrap();
        let y = [0.0, 0.0, 0.0];
        let fast = evaluate(&surrogate, &y).unwrap();
        let mut naive = 0.0;
        for level in &surrogate.levels {
            for (nu, &c) in level.gamma.iter().zip(&level.coefficients) {
                naive += c * cheb_tensor(nu, &y).unwrap();
            }
        }
        assert!((fast - naive).abs() < 1e-13);
    }

    #[test]
    fn truncate_dimension_examples() {
        let decay: Vec<f64> = (1..=1000).map(|j| (j as f64).powi(-2)).collect();
        let t = truncate_dimension(&decay, 0.5, 1.0, 0.5).unwrap();
        assert_eq!(t.b, 2);
        let t = truncate_dimension(&decay, 0.5, 2.0, 1.0 / 64.0).unwrap();
        assert_eq!(t.b, 4096);
    }

    #[test]
    fn truncation_tail_bound_dominates_actual_tail() {
        let decay: Vec<f64> = (1..=1000).map(|j| (j as f64).powi(-2)).collect();
        let bound = truncation_tail_bound(&decay, 0.5, 10);
        let actual: f64 = (11..=1000).map(|j| (j as f64).powi(-2)).sum();
        assert!(bound >= actual, "bound {bound} below actual tail {actual}");
    }

    #[test]
    fn surrogate_file_round_trip() {
        let p = cosine_problem(3);
        let w = WeightConfig::constant(1.25, 3, DEFAULT_THETA).unwrap();
        let sched = make_schedule(2, 0.125, 8.0, 1.0, SampleRule::Practical, &w).unwrap();
        let surrogate = run(&p, &sched, 19, RunOptions::new(Algorithm::Womp)).unwrap();

        let mut buf = Vec::new();
        write_surrogate(&surrogate, &mut buf).unwrap();
        let parsed = read_surrogate(std::io::BufReader::new(&buf[..])).unwrap();

        assert_eq!(parsed.seed, surrogate.seed);
        assert_eq!(parsed.d, surrogate.d);
        assert_eq!(parsed.weights, surrogate.weights);
        for (a, b) in parsed.levels.iter().zip(&surrogate.levels) {
            assert_eq!(a.gamma, b.gamma);
            assert_eq!(a.coefficients, b.coefficients);
        }
        // writing the parsed surrogate reproduces the bytes
        let mut buf2 = Vec::new();
        write_surrogate(&parsed, &mut buf2).unwrap();
        assert_eq!(buf, buf2);

        // evaluation agrees exactly
        let y = [0.4, -0.2, 0.9];
        assert_eq!(
            evaluate(&surrogate, &y).unwrap(),
            evaluate(&parsed, &y).unwrap()
        );
    }
}
