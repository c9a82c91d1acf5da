//! Weight sequences ω_ν = θ^{‖ν‖₀} v^ν, weighted norms and sparsity, and
//! enumeration of the truncated candidate sets Γ = {ν : ω_ν² ≤ s/2}.
//!
//! Enumeration walks dimensions in ascending order by depth-first search in
//! the log domain with budget log(s/2) ≥ 2‖ν‖₀ log θ + 2 Σ ν_j log v_j, so
//! degree powers v^ν never overflow. A branch is pruned as soon as its
//! minimum incremental cost exceeds the remaining budget; each accepted index
//! is re-checked against ω_ν² ≤ s/2 in the linear domain.

use crate::error::CoreError;
use crate::multiindex::MultiIndex;

/// Default masking factor θ = √2: it guarantees ω_ν ≥ ‖T_ν‖_∞ = √2^{‖ν‖₀}
/// for any v_j ≥ 1, which the recovery guarantees require.
pub const DEFAULT_THETA: f64 = std::f64::consts::SQRT_2;

/// Slack (in the log domain) for accepting boundary indices during DFS.
const LOG_SLACK: f64 = 1e-9;

/// The per-dimension weight sequence v = (v_j).
#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// v_j = beta for j ≤ active_dims, v_j = +∞ beyond.
    Constant { beta: f64, active_dims: usize },
    /// v_j = c · j^alpha for every j ≥ 1.
    Polynomial { c: f64, alpha: f64 },
    /// v_j = values[j-1] for listed dimensions, v_j = +∞ beyond.
    Explicit { values: Vec<f64> },
}

/// Weight configuration (v, θ) defining ω_ν = θ^{‖ν‖₀} ∏ v_j^{ν_j}.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightConfig {
    kind: WeightKind,
    theta: f64,
}

impl WeightConfig {
    pub fn constant(beta: f64, active_dims: usize, theta: f64) -> Result<Self, CoreError> {
        if !(beta >= 1.0) {
            return Err(CoreError::Config(format!("constant weight beta must be >= 1, got {beta}")));
        }
        if active_dims == 0 {
            return Err(CoreError::Config("constant weights need at least one active dimension".into()));
        }
        Self::with_theta(WeightKind::Constant { beta, active_dims }, theta)
    }

    pub fn polynomial(c: f64, alpha: f64, theta: f64) -> Result<Self, CoreError> {
        if !(c >= 1.0) {
            return Err(CoreError::Config(format!("polynomial weight c must be >= 1, got {c}")));
        }
        if !(alpha > 0.0) {
            return Err(CoreError::Config(format!("polynomial growth alpha must be > 0, got {alpha}")));
        }
        Self::with_theta(WeightKind::Polynomial { c, alpha }, theta)
    }

    pub fn explicit(values: Vec<f64>, theta: f64) -> Result<Self, CoreError> {
        if values.is_empty() {
            return Err(CoreError::Config("explicit weights need at least one entry".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 1.0)) {
            return Err(CoreError::Config(format!("every finite v_j must be >= 1, got {v}")));
        }
        Self::with_theta(WeightKind::Explicit { values }, theta)
    }

    fn with_theta(kind: WeightKind, theta: f64) -> Result<Self, CoreError> {
        if !(theta >= 1.0) {
            return Err(CoreError::Config(format!("theta must be >= 1, got {theta}")));
        }
        Ok(Self { kind, theta })
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// v_j for the 1-based dimension `dim`; +∞ outside the active range.
    pub fn v(&self, dim: u32) -> f64 {
        debug_assert!(dim >= 1);
        match &self.kind {
            WeightKind::Constant { beta, active_dims } => {
                if (dim as usize) <= *active_dims {
                    *beta
                } else {
                    f64::INFINITY
                }
            }
            WeightKind::Polynomial { c, alpha } => c * f64::from(dim).powf(*alpha),
            WeightKind::Explicit { values } => {
                values.get(dim as usize - 1).copied().unwrap_or(f64::INFINITY)
            }
        }
    }

    /// Number of dimensions with finite v_j, if bounded.
    pub fn active_dims(&self) -> Option<usize> {
        match &self.kind {
            WeightKind::Constant { active_dims, .. } => Some(*active_dims),
            WeightKind::Polynomial { .. } => None,
            WeightKind::Explicit { values } => Some(values.len()),
        }
    }

    /// ω_ν = θ^{‖ν‖₀} ∏_{j ∈ supp ν} v_j^{ν_j}. Returns +∞ when any active
    /// dimension carries an infinite weight (the index is excluded).
    pub fn weight_of(&self, nu: &MultiIndex) -> f64 {
        let mut w = self.theta.powi(nu.support_size() as i32);
        for &(j, k) in nu.entries() {
            let vj = self.v(j);
            if !vj.is_finite() {
                return f64::INFINITY;
            }
            w *= vj.powi(k as i32);
        }
        w
    }

    /// Checks that Γ(s) is finite for every s: all finite v_j strictly above 1.
    fn check_enumerable(&self) -> Result<(), CoreError> {
        match &self.kind {
            WeightKind::Constant { beta, .. } if *beta <= 1.0 => Err(CoreError::InfiniteSet(
                format!("constant weights need beta > 1 for a finite candidate set, got beta = {beta}"),
            )),
            WeightKind::Polynomial { c, .. } if *c <= 1.0 => Err(CoreError::InfiniteSet(
                format!("polynomial weights need c > 1 for a finite candidate set, got c = {c}"),
            )),
            WeightKind::Explicit { values } => match values.iter().find(|v| **v <= 1.0) {
                Some(v) => Err(CoreError::InfiniteSet(format!(
                    "explicit weights need every v_j > 1 for a finite candidate set, got {v}"
                ))),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }

    /// Enumerates Γ = {ν : ω_ν² ≤ s/2} in canonical order.
    ///
    /// Returns `InfiniteSet` when the finiteness precondition fails. For
    /// s < 2 even the zero index is excluded and the result is empty.
    pub fn enumerate_candidate_set(&self, s: f64) -> Result<Vec<MultiIndex>, CoreError> {
        self.check_enumerable()?;
        if !(s >= 0.0) {
            return Err(CoreError::Config(format!("sparsity budget must be >= 0, got {s}")));
        }
        if s < 2.0 {
            return Ok(Vec::new());
        }
        let budget = (s / 2.0).ln();
        let log_theta2 = 2.0 * self.theta.ln();

        // dimensions that can carry degree >= 1 at all
        let mut dims: Vec<u32> = Vec::new();
        let max_scan = match self.active_dims() {
            Some(d) => d as u32,
            // polynomial growth: v_j increases, stop at the first impossible j
            None => u32::MAX,
        };
        let mut j = 1u32;
        while j <= max_scan {
            let vj = self.v(j);
            if vj.is_finite() {
                let min_cost = log_theta2 + 2.0 * vj.ln();
                if min_cost <= budget + LOG_SLACK {
                    dims.push(j);
                } else if self.active_dims().is_none() {
                    break; // monotone growth, no later dimension fits
                }
            }
            if j == u32::MAX {
                break;
            }
            j += 1;
        }

        let mut out = Vec::new();
        let mut stack: Vec<(u32, u32)> = Vec::new();
        self.dfs(&dims, 0, budget, log_theta2, &mut stack, &mut out);

        // linear-domain re-check removes log round-off false positives
        let cap = (s / 2.0) * (1.0 + 1e-12);
        out.retain(|nu| {
            let w = self.weight_of(nu);
            w * w <= cap
        });
        out.sort_unstable();
        Ok(out)
    }

    fn dfs(
        &self,
        dims: &[u32],
        idx: usize,
        remaining: f64,
        log_theta2: f64,
        stack: &mut Vec<(u32, u32)>,
        out: &mut Vec<MultiIndex>,
    ) {
        if idx == dims.len() {
            out.push(MultiIndex::from_pairs(stack.iter().copied()).expect("stack dims are distinct"));
            return;
        }
        let dim = dims[idx];
        let log_v2 = 2.0 * self.v(dim).ln();
        // degree 0 first, then 1, 2, ... while the incremental cost fits
        self.dfs(dims, idx + 1, remaining, log_theta2, stack, out);
        let mut k = 1u32;
        loop {
            let cost = log_theta2 + f64::from(k) * log_v2;
            if cost > remaining + LOG_SLACK {
                break;
            }
            stack.push((dim, k));
            self.dfs(dims, idx + 1, remaining - cost, log_theta2, stack, out);
            stack.pop();
            k += 1;
        }
    }
}

/// Closed-form upper bound on |Γ(s)| for constant weights v_j = β (j ≤ d).
/// Two branches depending on whether s reaches the saturation threshold
/// 2^{d+1} β^{2d}.
pub fn constant_weight_cardinality_bound(beta: f64, d: usize, s: f64) -> f64 {
    let d = d as f64;
    if s < 2f64.powf(d + 1.0) * beta.powf(2.0 * d) {
        let base = (1.0 + 1.0 / (beta * beta).log2()) * std::f64::consts::E * d;
        base.powf((s / 2.0).ln() / (2.0 * beta * beta).ln())
    } else {
        ((beta * beta * s / 2.0).ln() / (beta * beta).ln()).powf(d)
    }
}

/// Sparse coefficient vector over a set of multi-indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightedVector {
    support: Vec<MultiIndex>,
    values: Vec<f64>,
}

impl WeightedVector {
    /// Support entries must be distinct and values finite.
    pub fn new(support: Vec<MultiIndex>, values: Vec<f64>) -> Result<Self, CoreError> {
        if support.len() != values.len() {
            return Err(CoreError::Dimension(format!(
                "support length {} != value length {}",
                support.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::Config("coefficient values must be finite".into()));
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(CoreError::Config("support entries must be distinct".into()));
        }
        Ok(Self { support, values })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn support(&self) -> &[MultiIndex] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.support.iter().zip(self.values.iter().copied())
    }

    /// Value at ν (0 when not in the support).
    pub fn get(&self, nu: &MultiIndex) -> f64 {
        self.support
            .iter()
            .position(|s| s == nu)
            .map(|i| self.values[i])
            .unwrap_or(0.0)
    }
}

/// Weighted sparsity ‖x‖_{ω,0} = Σ_{ν : x_ν ≠ 0} ω_ν².
pub fn weighted_sparsity(x: &WeightedVector, w: &WeightConfig) -> f64 {
    x.iter()
        .filter(|&(_, v)| v != 0.0)
        .map(|(nu, _)| {
            let wn = w.weight_of(nu);
            wn * wn
        })
        .sum()
}

/// Weighted ℓ_p (quasi-)norm (Σ ω_ν^{2−p} |x_ν|^p)^{1/p} for p ∈ (0, 2].
pub fn weighted_lp_norm(x: &WeightedVector, w: &WeightConfig, p: f64) -> Result<f64, CoreError> {
    if !(p > 0.0 && p <= 2.0) {
        return Err(CoreError::Config(format!("p must lie in (0, 2], got {p}")));
    }
    let sum: f64 = x
        .iter()
        .map(|(nu, v)| w.weight_of(nu).powf(2.0 - p) * v.abs().powf(p))
        .sum();
    Ok(sum.powf(1.0 / p))
}

/// Greedy best weighted s-term approximation: selects entries in decreasing
/// density |x_ν| / ω_ν, keeping every entry that still fits the budget
/// Σ ω² ≤ s, and returns the selected support together with the weighted ℓ1
/// norm of the remainder. A heuristic upper bound on the true best-term
/// error, intended for diagnostics.
pub fn best_weighted_s_term(
    x: &WeightedVector,
    w: &WeightConfig,
    s: f64,
) -> (Vec<MultiIndex>, f64) {
    let mut items: Vec<(usize, f64, f64)> = x
        .iter()
        .enumerate()
        .filter(|&(_, (_, v))| v != 0.0)
        .map(|(i, (nu, v))| {
            let wn = w.weight_of(nu);
            (i, v.abs() / wn, wn * wn)
        })
        .collect();
    // density descending, canonical index ascending on ties
    items.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| x.support()[a.0].cmp(&x.support()[b.0]))
    });
    let mut used = 0.0;
    let mut selected = Vec::new();
    let mut selected_idx = vec![false; x.len()];
    for (i, _, w2) in items {
        if w2.is_finite() && used + w2 <= s + 1e-12 {
            used += w2;
            selected.push(x.support()[i].clone());
            selected_idx[i] = true;
        }
    }
    let residual: f64 = x
        .iter()
        .enumerate()
        .filter(|&(i, (_, v))| !selected_idx[i] && v != 0.0)
        .map(|(_, (nu, v))| w.weight_of(nu) * v.abs())
        .sum();
    selected.sort_unstable();
    (selected, residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(degrees: &[u32]) -> MultiIndex {
        MultiIndex::from_dense(degrees)
    }

    #[test]
    fn weight_of_empty_index_is_one() {
        let w = WeightConfig::constant(2.0, 3, 2.0).unwrap();
        assert_eq!(w.weight_of(&MultiIndex::zero()), 1.0);
    }

    #[test]
    fn weight_of_direct_formula() {
        // ν = (2,0,1), θ = 1, v ≡ 1.08 → 1.08³
        let w = WeightConfig::constant(1.08, 3, 1.0).unwrap();
        let val = w.weight_of(&mi(&[2, 0, 1]));
        assert!((val - 1.08f64.powi(3)).abs() < 1e-14, "got {val}");

        // ν = (1,1), θ = 2, v ≡ 2 → 2²·2·2 = 16
        let w = WeightConfig::constant(2.0, 2, 2.0).unwrap();
        assert_eq!(w.weight_of(&mi(&[1, 1])), 16.0);
    }

    #[test]
    fn weight_is_infinite_beyond_active_dims() {
        let w = WeightConfig::constant(2.0, 2, 1.0).unwrap();
        assert!(w.weight_of(&mi(&[0, 0, 1])).is_infinite());
        let e = WeightConfig::explicit(vec![1.5, 2.0], 1.0).unwrap();
        assert!(e.weight_of(&mi(&[0, 0, 2])).is_infinite());
    }

    #[test]
    fn enumerate_small_box() {
        // d = 2, v ≡ 2, θ = 1, s = 32 → six indices, in canonical order
        let w = WeightConfig::constant(2.0, 2, 1.0).unwrap();
        let gamma = w.enumerate_candidate_set(32.0).unwrap();
        let expect: Vec<MultiIndex> = [
            vec![0, 0],
            vec![1, 0],
            vec![0, 1],
            vec![2, 0],
            vec![1, 1],
            vec![0, 2],
        ]
        .iter()
        .map(|v| mi(v))
        .collect();
        assert_eq!(gamma, expect);
    }

    /// Brute-force oracle: enumerate a degree box and filter by ω² ≤ s/2.
    fn brute_force(w: &WeightConfig, s: f64, dims: usize, max_deg: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut degrees = vec![0u32; dims];
        loop {
            let nu = MultiIndex::from_dense(&degrees);
            let wn = w.weight_of(&nu);
            if wn * wn <= s / 2.0 * (1.0 + 1e-12) {
                out.push(nu);
            }
            // odometer increment
            let mut i = 0;
            loop {
                if i == dims {
                    out.sort_unstable();
                    return out;
                }
                if degrees[i] < max_deg {
                    degrees[i] += 1;
                    break;
                }
                degrees[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn enumerate_matches_brute_force() {
        let w = WeightConfig::constant(1.08, 4, DEFAULT_THETA).unwrap();
        let gamma = w.enumerate_candidate_set(64.0).unwrap();
        let oracle = brute_force(&w, 64.0, 4, 25);
        assert_eq!(gamma, oracle);
        assert!(gamma.len() > 4, "cardinality {} suspiciously small", gamma.len());
    }

    /// Independent combinatorial count for constant weights: for support
    /// size k the admissible degree vectors are the k-compositions with sum
    /// at most T_k = ⌊log(cap / θ^{2k}) / (2 log β)⌋, of which there are
    /// C(T_k, k), each placed on one of C(d, k) supports.
    fn count_constant_oracle(beta: f64, theta: f64, d: usize, s: f64) -> usize {
        fn binomial(n: usize, k: usize) -> usize {
            if k > n {
                return 0;
            }
            let mut acc = 1usize;
            for i in 0..k {
                acc = acc * (n - i) / (i + 1);
            }
            acc
        }
        let cap = s / 2.0;
        let mut total = 0;
        for k in 0..=d {
            let head = cap / theta.powi(2 * k as i32);
            if head < 1.0 {
                break;
            }
            let t_k = (head.ln() / (2.0 * beta.ln()) + 1e-9).floor() as usize;
            if k > 0 && t_k < k {
                continue;
            }
            total += binomial(d, k) * if k == 0 { 1 } else { binomial(t_k, k) };
        }
        total
    }

    #[test]
    fn enumerate_cardinalities_match_combinatorial_oracle() {
        for &(beta, d, s) in &[
            (1.1f64, 9usize, 64.0f64),
            (1.1, 9, 32.0),
            (1.1, 9, 16.0),
            (1.1, 16, 64.0),
            (1.07, 6, 120.0),
            (1.25, 10, 40.0),
        ] {
            let w = WeightConfig::constant(beta, d, DEFAULT_THETA).unwrap();
            let gamma = w.enumerate_candidate_set(s).unwrap();
            let expect = count_constant_oracle(beta, DEFAULT_THETA, d, s);
            assert_eq!(gamma.len(), expect, "beta={beta} d={d} s={s}");
        }
    }

    #[test]
    fn enumerate_polynomial_weights_matches_brute_force() {
        let w = WeightConfig::polynomial(1.2, 1.0, DEFAULT_THETA).unwrap();
        let gamma = w.enumerate_candidate_set(100.0).unwrap();
        // only dimensions with 2 v_j² ≤ 50 can be active: j ≤ 4 here, and
        // degrees cap out at 1.2^{2k} ≤ 25; a 5-dim box of degree 9 covers it
        let oracle = brute_force(&w, 100.0, 5, 9);
        assert_eq!(gamma, oracle);
    }

    #[test]
    fn enumerate_budget_edges() {
        let w = WeightConfig::constant(2.0, 4, 1.0).unwrap();
        assert_eq!(
            w.enumerate_candidate_set(2.0).unwrap(),
            vec![MultiIndex::zero()]
        );
        assert!(w.enumerate_candidate_set(1.9).unwrap().is_empty());
    }

    #[test]
    fn enumerate_rejects_infinite_sets() {
        let w = WeightConfig::constant(1.0, 4, 1.0).unwrap();
        assert!(matches!(
            w.enumerate_candidate_set(8.0),
            Err(CoreError::InfiniteSet(_))
        ));
        let w = WeightConfig::polynomial(1.0, 0.5, 1.0).unwrap();
        assert!(matches!(
            w.enumerate_candidate_set(8.0),
            Err(CoreError::InfiniteSet(_))
        ));
        let w = WeightConfig::explicit(vec![2.0, 1.0], 1.0).unwrap();
        assert!(matches!(
            w.enumerate_candidate_set(8.0),
            Err(CoreError::InfiniteSet(_))
        ));
    }

    #[test]
    fn enumeration_boundary_indices_are_kept() {
        // ω² of (2,0) equals exactly s/2 = 16 and must be included
        let w = WeightConfig::constant(2.0, 2, 1.0).unwrap();
        let gamma = w.enumerate_candidate_set(32.0).unwrap();
        assert!(gamma.contains(&mi(&[2, 0])));
    }

    #[test]
    fn weighted_sparsity_examples() {
        let w = WeightConfig::constant(2.0, 2, 1.0).unwrap();
        assert_eq!(weighted_sparsity(&WeightedVector::empty(), &w), 0.0);

        let x = WeightedVector::new(vec![MultiIndex::zero()], vec![3.5]).unwrap();
        assert_eq!(weighted_sparsity(&x, &w), 1.0);

        let x = WeightedVector::new(vec![mi(&[1, 0]), mi(&[0, 1])], vec![1.0, -2.0]).unwrap();
        assert_eq!(weighted_sparsity(&x, &w), 8.0);

        // explicit zeros do not count
        let x = WeightedVector::new(vec![mi(&[1, 0]), mi(&[0, 1])], vec![0.0, -2.0]).unwrap();
        assert_eq!(weighted_sparsity(&x, &w), 4.0);
    }

    #[test]
    fn weighted_lp_norm_examples() {
        let w = WeightConfig::constant(3.0, 2, 1.5).unwrap();
        let x = WeightedVector::new(vec![mi(&[1, 0]), mi(&[0, 2])], vec![0.3, -1.25]).unwrap();
        // p = 2 equals the unweighted ℓ2 norm
        let l2 = weighted_lp_norm(&x, &w, 2.0).unwrap();
        assert!((l2 - (0.3f64 * 0.3 + 1.25 * 1.25).sqrt()).abs() < 1e-14);

        // ω ≡ 1, p = 1 is the plain ℓ1 norm
        let w1 = WeightConfig::constant(1.0, 2, 1.0).unwrap();
        let l1 = weighted_lp_norm(&x, &w1, 1.0).unwrap();
        assert!((l1 - 1.55).abs() < 1e-14);

        // single entry of value 3 with ω = 2, p = 1 → 6
        let we = WeightConfig::explicit(vec![2.0], 1.0).unwrap();
        let y = WeightedVector::new(vec![mi(&[1])], vec![3.0]).unwrap();
        assert!((weighted_lp_norm(&y, &we, 1.0).unwrap() - 6.0).abs() < 1e-14);

        assert!(weighted_lp_norm(&x, &w, 0.0).is_err());
        assert!(weighted_lp_norm(&x, &w, 2.5).is_err());
    }

    #[test]
    fn best_s_term_extremes() {
        let w = WeightConfig::constant(2.0, 3, 1.0).unwrap();
        let x = WeightedVector::new(
            vec![MultiIndex::zero(), mi(&[1, 0, 0]), mi(&[0, 1, 1])],
            vec![1.0, -0.5, 0.25],
        )
        .unwrap();
        let total = weighted_sparsity(&x, &w);

        let (sup, res) = best_weighted_s_term(&x, &w, total);
        assert_eq!(sup.len(), 3);
        assert_eq!(res, 0.0);

        let (sup, res) = best_weighted_s_term(&x, &w, 0.0);
        assert!(sup.is_empty());
        let full_l1 = weighted_lp_norm(&x, &w, 1.0).unwrap();
        assert!((res - full_l1).abs() < 1e-14);
    }

    #[test]
    fn best_s_term_vs_exhaustive() {
        // greedy residual is never better than the exact knapsack optimum
        let w = WeightConfig::explicit(vec![1.5, 2.5, 4.0], 1.0).unwrap();
        let sup = vec![mi(&[1]), mi(&[0, 1]), mi(&[0, 0, 1])];
        let x = WeightedVector::new(sup.clone(), vec![2.0, 4.0, 5.0]).unwrap();
        let s = 10.0;

        let mut best = f64::INFINITY;
        for mask in 0u32..8 {
            let mut w2 = 0.0;
            let mut res = 0.0;
            for (i, nu) in sup.iter().enumerate() {
                let wn = w.weight_of(nu);
                if mask & (1 << i) != 0 {
                    w2 += wn * wn;
                } else {
                    res += wn * x.values()[i].abs();
                }
            }
            if w2 <= s {
                best = best.min(res);
            }
        }
        let (_, greedy) = best_weighted_s_term(&x, &w, s);
        assert!(greedy >= best - 1e-12);
        assert!(greedy <= 2.0 * best + 1e-12, "greedy {greedy} vs exact {best}");
    }

    #[test]
    fn cardinality_within_closed_form_bound() {
        for &(beta, d, s) in &[(1.1f64, 9usize, 64.0f64), (1.25, 4, 32.0), (2.0, 3, 64.0)] {
            let w = WeightConfig::constant(beta, d, DEFAULT_THETA).unwrap();
            let n = w.enumerate_candidate_set(s).unwrap().len() as f64;
            let bound = constant_weight_cardinality_bound(beta, d, s);
            assert!(n <= bound, "N = {n} exceeds bound {bound} for beta={beta} d={d} s={s}");
        }
    }
}
