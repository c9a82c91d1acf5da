//! Finitely supported multi-indices of polynomial degrees.
//!
//! A multi-index ν assigns a degree ν_j ≥ 1 to finitely many 1-based
//! parameter dimensions; all other dimensions carry degree 0 and are not
//! stored. The canonical ordering (total degree first, then earliest
//! differing dimension with the larger degree first) fixes the column order
//! of every sensing matrix built from an enumerated candidate set.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::CoreError;

/// Sparse multi-index: strictly ascending `(dimension, degree)` pairs with
/// degrees ≥ 1. Two values compare equal iff they represent the same index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex {
    entries: Vec<(u32, u32)>,
}

impl MultiIndex {
    /// The zero index (empty support).
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds an index from `(dimension, degree)` pairs. Pairs with degree 0
    /// are dropped; duplicate or 0-based dimensions are rejected.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, CoreError>
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        let mut entries: Vec<(u32, u32)> = pairs.into_iter().filter(|&(_, k)| k > 0).collect();
        entries.sort_unstable();
        if entries.iter().any(|&(j, _)| j == 0) {
            return Err(CoreError::InvalidIndex("dimensions are 1-based".into()));
        }
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(CoreError::InvalidIndex(format!(
                    "duplicate dimension {}",
                    w[0].0
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Builds an index from a dense degree vector; entry `i` is the degree of
    /// dimension `i + 1`.
    pub fn from_dense(degrees: &[u32]) -> Self {
        let entries = degrees
            .iter()
            .enumerate()
            .filter(|&(_, &k)| k > 0)
            .map(|(i, &k)| (i as u32 + 1, k))
            .collect();
        Self { entries }
    }

    /// Stored `(dimension, degree)` pairs, ascending in dimension.
    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    /// Degree of `dim` (0 if inactive).
    pub fn degree(&self, dim: u32) -> u32 {
        self.entries
            .binary_search_by_key(&dim, |e| e.0)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    /// ‖ν‖₀, the number of active dimensions.
    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    /// |ν| = Σ_j ν_j.
    pub fn total_degree(&self) -> u64 {
        self.entries.iter().map(|&(_, k)| u64::from(k)).sum()
    }

    /// Largest active dimension; 0 for the zero index.
    pub fn max_dim(&self) -> u32 {
        self.entries.last().map(|&(j, _)| j).unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Dense degree vector over dimensions `1..=dims`.
    pub fn to_dense(&self, dims: usize) -> Vec<u32> {
        let mut out = vec![0; dims];
        for &(j, k) in &self.entries {
            if (j as usize) <= dims {
                out[j as usize - 1] = k;
            }
        }
        out
    }

    /// Componentwise `self ≤ other`.
    pub fn le_componentwise(&self, other: &Self) -> bool {
        self.entries.iter().all(|&(j, k)| other.degree(j) >= k)
    }
}

/// Canonical order: ascending total degree; ties broken at the earliest
/// dimension where the degrees differ, the index with the *larger* degree
/// coming first. Within total degree 2 in two dimensions this yields
/// (2,0), (1,1), (0,2).
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let mut a = self.entries.iter().peekable();
        let mut b = other.entries.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => return Ordering::Equal,
                // remaining mass sits in later dimensions: the one with the
                // earlier active dimension has the larger degree there
                (Some(_), None) => return Ordering::Less,
                (None, Some(_)) => return Ordering::Greater,
                (Some(&&(ja, ka)), Some(&&(jb, kb))) => {
                    if ja == jb {
                        match ka.cmp(&kb) {
                            Ordering::Equal => {
                                a.next();
                                b.next();
                            }
                            // larger degree in the shared earliest dim first
                            ord => return ord.reverse(),
                        }
                    } else if ja < jb {
                        return Ordering::Less;
                    } else {
                        return Ordering::Greater;
                    }
                }
            }
        }
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Text form `j1:d1;j2:d2;...` with ascending dimensions; the zero index is
/// the empty string. Used in surrogate and coefficient CSV files.
impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for &(j, k) in &self.entries {
            if !first {
                write!(f, ";")?;
            }
            write!(f, "{j}:{k}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for MultiIndex {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, CoreError> {
        if s.is_empty() {
            return Ok(Self::zero());
        }
        let mut entries = Vec::new();
        for part in s.split(';') {
            let (j, k) = part
                .split_once(':')
                .ok_or_else(|| CoreError::InvalidIndex(format!("missing ':' in `{part}`")))?;
            let j: u32 = j
                .parse()
                .map_err(|_| CoreError::InvalidIndex(format!("bad dimension `{j}`")))?;
            let k: u32 = k
                .parse()
                .map_err(|_| CoreError::InvalidIndex(format!("bad degree `{k}`")))?;
            if k == 0 {
                return Err(CoreError::InvalidIndex(
                    "explicit zero degree is not stored".into(),
                ));
            }
            entries.push((j, k));
        }
        if !entries.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(CoreError::InvalidIndex(
                "dimensions must be strictly ascending".into(),
            ));
        }
        if entries.iter().any(|&(j, _)| j == 0) {
            return Err(CoreError::InvalidIndex("dimensions are 1-based".into()));
        }
        Ok(Self { entries })
    }
}
