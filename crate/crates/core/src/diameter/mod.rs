//! Vandermonde determinants, Fekete point search, k-th order diameters with
//! their classical and homogeneous normalizations, and comparison harnesses.

mod compare;

pub use compare::{
    circled_equality, homogeneous_identity, integral_formula_compare, projection_invariance, sandwich_check,
    tau_t_identity, zaharjuta_tau, CircledEntry, CircledReport, HomogeneousReport, IntegralReport, IntegralRow,
    ProjectionReport, SandwichReport, TauIdentity, TauValue,
};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{ExponentVector, Rational};
use crate::chebyshev::{ChebyshevError, NumericBasis};
use crate::sets::{SetsError, VarietyPointCloud};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiameterError {
    #[error(transparent)]
    Chebyshev(#[from] ChebyshevError),
    #[error(transparent)]
    Sets(#[from] SetsError),
    #[error("cloud smaller than M_k: {found} points for M_k = {needed}")]
    CloudTooSmall { found: usize, needed: usize },
    #[error("not verifiable: non-certified inputs at k = {0}")]
    NotCertified(u32),
    #[error("expected {expected} points, got {found}")]
    PointCount { found: usize, expected: usize },
    #[error("point {0} does not have first coordinate 1")]
    NotOnAffinePatch(usize),
    #[error("tau is defined from index 2 on (|alpha| >= 1), got j = {0}")]
    TauUndefined(usize),
    #[error("dimension counts cover degrees up to {have}, need {need}")]
    DimsTooShort { have: usize, need: u32 },
    #[error("k must be at least 1")]
    KZero,
}

/// `log |det [w(ζ_l)^k e_j(ζ_l)]|` for the first `points.len()` columns.
///
/// `columns[j][i]` is the weighted value of basis element `j` at cloud point
/// `i`. Rows are rescaled to unit max-norm and the scales are accumulated in
/// log space; a singular matrix gives `−∞`.
pub fn log_abs_det(columns: &[Vec<Complex64>], points: &[usize]) -> f64 {
    let s = points.len();
    if s == 0 {
        return 0.0;
    }
    assert!(s <= columns.len(), "more points than basis elements");
    let mut log_scale = 0.0;
    let mut m = DMatrix::<Complex64>::zeros(s, s);
    for (row, &i) in points.iter().enumerate() {
        let scale = (0..s).map(|j| columns[j][i].norm()).fold(0.0, f64::max);
        if !(scale > 0.0 && scale.is_finite()) {
            return f64::NEG_INFINITY;
        }
        log_scale += scale.ln();
        for j in 0..s {
            m[(row, j)] = columns[j][i] / scale;
        }
    }
    let lu = m.lu();
    let u = lu.u();
    let mut total = log_scale;
    for d in 0..s {
        let v = u[(d, d)].norm();
        if v == 0.0 || !v.is_finite() {
            return f64::NEG_INFINITY;
        }
        total += v.ln();
    }
    total
}

/// [`log_abs_det`] for a basis evaluated on a cloud with weight power `k`.
pub fn vdm_logabs(basis: &NumericBasis, points: &[usize], cloud: &VarietyPointCloud, k: u32) -> f64 {
    let sub = cloud.subset(points);
    let columns = basis.evaluate(&sub, k);
    log_abs_det(&columns, &(0..points.len()).collect::<Vec<_>>())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeketeStrategy {
    Greedy,
    /// Greedy followed by single-point exchange sweeps.
    Exchange,
    /// All subsets when their number is within the cap, otherwise `Exchange`.
    Exhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeketeConfig {
    pub strategy: FeketeStrategy,
    pub exhaustive_cap: u64,
    /// Orders the positions visited by each exchange sweep.
    pub seed: u64,
}

impl Default for FeketeConfig {
    fn default() -> Self {
        FeketeConfig { strategy: FeketeStrategy::Exchange, exhaustive_cap: 200_000, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeketeResult {
    /// Selected cloud indices, ascending.
    pub points: Vec<usize>,
    pub log_v: f64,
    pub strategy: FeketeStrategy,
    /// The maximum over all subsets was taken.
    pub exact: bool,
}

const EXCHANGE_SWEEPS: usize = 5;
const EXCHANGE_GAIN: f64 = 1e-12;

/// `C(n, k)`, saturating.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Maximizes `|VDM|` over `M`-subsets of the cloud, `M = columns.len()`.
pub fn fekete_search(columns: &[Vec<Complex64>], config: &FeketeConfig) -> Result<FeketeResult, DiameterError> {
    let m = columns.len();
    let n = columns.first().map_or(0, Vec::len);
    if n < m || m == 0 {
        return Err(DiameterError::CloudTooSmall { found: n, needed: m });
    }
    if n == m {
        let points: Vec<usize> = (0..n).collect();
        return Ok(FeketeResult { log_v: log_abs_det(columns, &points), points, strategy: config.strategy, exact: true });
    }
    if config.strategy == FeketeStrategy::Exhaustive && binomial(n as u64, m as u64) <= config.exhaustive_cap {
        return Ok(exhaustive(columns, n, m));
    }
    let mut points = greedy(columns, n, m);
    if config.strategy != FeketeStrategy::Greedy && points.len() == m {
        points = exchange(columns, points, n, config.seed);
    }
    points.sort_unstable();
    let log_v = if points.len() == m { log_abs_det(columns, &points) } else { f64::NEG_INFINITY };
    let strategy = match config.strategy {
        FeketeStrategy::Greedy => FeketeStrategy::Greedy,
        _ => FeketeStrategy::Exchange,
    };
    Ok(FeketeResult { points, log_v, strategy, exact: false })
}

/// Column-pivoted Gram–Schmidt on the point vectors `(e_j(ζ_i))_j`.
fn greedy(columns: &[Vec<Complex64>], n: usize, m: usize) -> Vec<usize> {
    let mut residual: Vec<Vec<Complex64>> = (0..n).map(|i| (0..m).map(|j| columns[j][i]).collect()).collect();
    let mut chosen = Vec::with_capacity(m);
    let mut taken = vec![false; n];
    for _ in 0..m {
        let (best, norm) = residual
            .iter()
            .enumerate()
            .filter(|(i, _)| !taken[*i])
            .map(|(i, r)| (i, r.iter().map(|z| z.norm_sqr()).sum::<f64>()))
            .fold((usize::MAX, 0.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        if best == usize::MAX || norm <= 0.0 {
            break;
        }
        taken[best] = true;
        chosen.push(best);
        let scale = norm.sqrt();
        let q: Vec<Complex64> = residual[best].iter().map(|z| z / scale).collect();
        residual.par_iter_mut().enumerate().filter(|(i, _)| !taken[*i]).for_each(|(_, r)| {
            let dot: Complex64 = q.iter().zip(r.iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, a) in r.iter_mut().zip(&q) {
                *x -= a * dot;
            }
        });
    }
    chosen
}

/// `C = A_S^{-1} A`: replacing point `S_r` by point `c` scales `|det|` by `|C_rc|`.
fn coefficient_matrix(columns: &[Vec<Complex64>], set: &[usize], n: usize) -> Option<DMatrix<Complex64>> {
    let m = set.len();
    let a_s = DMatrix::from_fn(m, m, |j, r| columns[j][set[r]]);
    let a = DMatrix::from_fn(m, n, |j, i| columns[j][i]);
    a_s.lu().solve(&a)
}

fn exchange(columns: &[Vec<Complex64>], mut set: Vec<usize>, n: usize, seed: u64) -> Vec<usize> {
    let m = set.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..m).collect();
    for _ in 0..EXCHANGE_SWEEPS {
        order.shuffle(&mut rng);
        let mut improved = false;
        for &r in &order {
            let Some(c) = coefficient_matrix(columns, &set, n) else { return set };
            let (best, gain) = (0..n)
                .filter(|i| !set.contains(i))
                .map(|i| (i, c[(r, i)].norm()))
                .fold((usize::MAX, 0.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
            if best != usize::MAX && gain > 1.0 + EXCHANGE_GAIN {
                set[r] = best;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    set
}

/// Enumerates every subset in lex order; the first maximum wins.
fn exhaustive(columns: &[Vec<Complex64>], n: usize, m: usize) -> FeketeResult {
    let partial: Vec<(f64, Vec<usize>)> = (0..=n - m)
        .into_par_iter()
        .map(|first| {
            let mut combo: Vec<usize> = (first..first + m).collect();
            let mut best = (f64::NEG_INFINITY, combo.clone());
            loop {
                let v = log_abs_det(columns, &combo);
                if v > best.0 {
                    best = (v, combo.clone());
                }
                // Advance the tail positions 1..m with combo[0] fixed.
                let Some(pos) = (1..m).rev().find(|&p| combo[p] < n - m + p) else { break };
                combo[pos] += 1;
                for q in pos + 1..m {
                    combo[q] = combo[q - 1] + 1;
                }
            }
            best
        })
        .collect();
    let (log_v, points) = partial
        .into_iter()
        .fold((f64::NEG_INFINITY, Vec::new()), |acc, cand| if cand.0 > acc.0 || acc.1.is_empty() { cand } else { acc });
    FeketeResult { points, log_v, strategy: FeketeStrategy::Exhaustive, exact: true }
}

/// `M_k`, `h_k = M_k − M_{k−1}` and `L_k = Σ_{s ≤ k} s·h_s` from `dims[s] = M_s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Normalization {
    pub k: u32,
    pub m_k: u64,
    pub h_k: u64,
    pub l_k: u64,
}

impl Normalization {
    pub fn from_dims(dims: &[usize], k: u32) -> Result<Self, DiameterError> {
        if k == 0 {
            return Err(DiameterError::KZero);
        }
        if dims.len() <= k as usize {
            return Err(DiameterError::DimsTooShort { have: dims.len().saturating_sub(1), need: k });
        }
        let h = |s: usize| (dims[s] - if s == 0 { 0 } else { dims[s - 1] }) as u64;
        let l_k = (1..=k as usize).map(|s| s as u64 * h(s)).sum();
        Ok(Normalization { k, m_k: dims[k as usize] as u64, h_k: h(k as usize), l_k })
    }

    /// `L_k / (k M_k)`, exactly.
    pub fn ratio(&self) -> Rational {
        Rational::new(BigInt::from(self.l_k), BigInt::from(self.k as u64 * self.m_k))
    }
}

/// `M_s = C(s + m, m)` for `s = 0..=k`: the zero ideal on `C^m`.
pub fn zero_ideal_dims(m: usize, k: u32) -> Vec<usize> {
    (0..=k as u64).map(|s| binomial(s + m as u64, m as u64) as usize).collect()
}

/// Closed forms on `C^m`: `L_k = m·C(k + m, m + 1)` and the ratio `m / (m + 1)`.
pub fn zero_ideal_l_k(m: usize, k: u32) -> u64 {
    m as u64 * binomial(k as u64 + m as u64, m as u64 + 1)
}

pub fn limit_ratio(m: usize) -> Rational {
    Rational::new(BigInt::from(m), BigInt::from(m + 1))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiameterRow {
    pub norm: Normalization,
    pub log_v: f64,
    /// `log d_k = log V_k / (k M_k)`.
    pub log_d_k: f64,
    /// `log V_k / L_k`.
    pub log_d_classical: f64,
    /// `log V_k / (k h_k)`.
    pub log_d_homogeneous: f64,
    pub fekete: FeketeResult,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiameterReport {
    pub rows: Vec<DiameterRow>,
    /// `log d_k − log d_{k−1}` over the last two rows; advisory only.
    pub trend: Option<f64>,
}

/// Fekete search and normalizations for each basis; `dims[s] = M_s`.
pub fn diameters(
    cloud: &VarietyPointCloud,
    bases: &[NumericBasis],
    dims: &[usize],
    config: &FeketeConfig,
) -> Result<DiameterReport, DiameterError> {
    let rows = bases
        .iter()
        .map(|basis| {
            let k = basis.k();
            let norm = Normalization::from_dims(dims, k)?;
            let fekete = fekete_search(&basis.evaluate(cloud, k), config)?;
            let log_v = fekete.log_v;
            Ok(DiameterRow {
                log_d_k: log_v / (k as f64 * norm.m_k as f64),
                log_d_classical: log_v / norm.l_k as f64,
                log_d_homogeneous: log_v / (k as f64 * norm.h_k as f64),
                norm,
                log_v,
                fekete,
            })
        })
        .collect::<Result<Vec<_>, DiameterError>>()?;
    let trend = match rows.as_slice() {
        [.., a, b] => Some(b.log_d_k - a.log_d_k),
        _ => None,
    };
    Ok(DiameterReport { rows, trend })
}

/// Homogeneous monomials of degree `k` in `n` variables.
pub fn homogeneous_exponents(n: usize, k: u32) -> Vec<ExponentVector> {
    ExponentVector::all_of_degree(n, k)
}
