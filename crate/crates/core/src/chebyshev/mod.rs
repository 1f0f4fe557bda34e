//! Weighted Chebyshev constants `T_k(K, α)` over monic classes, the
//! Chebyshev transform on the body, restricted classes over monomial
//! subfamilies, and convexity and submultiplicativity diagnostics.

mod minimax;

pub use minimax::{solve_discrete_minimax, MinimaxError, MinimaxOptions, MinimaxSolution};

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{ExponentVector, LexKey, MonomialOrder, NumericPolynomial, Rational};
use crate::hull::HullPolytope;
use crate::okounkov::NuSet;
use crate::sets::{weighted_eval, VarietyPointCloud};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChebyshevError {
    #[error(transparent)]
    Minimax(#[from] MinimaxError),
    #[error("exponent {0} is not a point of N_k")]
    AlphaNotInBasis(ExponentVector),
    #[error("exponent {alpha} has degree above k = {k}")]
    AlphaAboveK { alpha: ExponentVector, k: u32 },
    #[error("basis is over {found} coordinates, cloud has {expected}")]
    DimensionMismatch { found: usize, expected: usize },
}

/// One element `e_j` of a monic basis, keyed by its exponent `ν(e_j)`.
#[derive(Clone, Debug)]
pub struct BasisElement {
    pub nu: ExponentVector,
    pub poly: NumericPolynomial,
}

/// A basis with pairwise distinct exponents, sorted by ascending lex.
#[derive(Clone, Debug)]
pub struct NumericBasis {
    k: u32,
    elements: Vec<BasisElement>,
}

impl NumericBasis {
    pub fn new(k: u32, mut elements: Vec<BasisElement>) -> Self {
        elements.sort_by_key(|a| LexKey(a.nu.clone()));
        NumericBasis { k, elements }
    }

    /// The monic representatives of `N_k`.
    pub fn from_nu_set(set: &NuSet) -> Self {
        let elements = set
            .entries()
            .iter()
            .map(|e| BasisElement { nu: e.nu.clone(), poly: e.poly.to_numeric() })
            .collect();
        NumericBasis::new(set.k, elements)
    }

    /// Monomials of degree at most `k` in the listed coordinates of an
    /// `nvars`-dimensional space, keyed by their exponents in those coordinates.
    pub fn monomials(nvars: usize, coordinates: &[usize], k: u32) -> Self {
        let elements = ExponentVector::up_to_degree(coordinates.len(), k, MonomialOrder::Grevlex)
            .into_iter()
            .map(|e| BasisElement { poly: NumericPolynomial::monomial(embed(&e, coordinates, nvars)), nu: e })
            .collect();
        NumericBasis::new(k, elements)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    pub fn position(&self, nu: &ExponentVector) -> Option<usize> {
        self.elements.iter().position(|e| &e.nu == nu)
    }

    /// Columns `w(ζ_i)^k e_j(ζ_i)` for every element.
    pub fn evaluate(&self, cloud: &VarietyPointCloud, k: u32) -> Vec<Vec<Complex64>> {
        self.elements.iter().map(|e| evaluate_on(&e.poly, cloud, k)).collect()
    }
}

fn embed(e: &ExponentVector, coordinates: &[usize], nvars: usize) -> Vec<u32> {
    let mut full = vec![0; nvars];
    for (slot, &j) in coordinates.iter().enumerate() {
        full[j] = e.0[slot];
    }
    full
}

pub(crate) fn evaluate_on(p: &NumericPolynomial, cloud: &VarietyPointCloud, k: u32) -> Vec<Complex64> {
    cloud.points().iter().zip(cloud.weights()).map(|(z, w)| weighted_eval(p, z, *w, k)).collect()
}

/// `T_k(K, α)` together with the solver output it came from.
#[derive(Clone, Debug)]
pub struct ChebyshevValue {
    pub k: u32,
    pub alpha: ExponentVector,
    /// `log T = log(value) / k` (or `log(value)` when `k = 0`); `−∞` when degenerate.
    pub log_t: f64,
    /// `log` of the certified lower bound, in the same normalization.
    pub log_t_lower: f64,
    pub solution: MinimaxSolution,
}

impl ChebyshevValue {
    fn from_solution(k: u32, alpha: ExponentVector, solution: MinimaxSolution) -> Self {
        let root = if k == 0 { 1.0 } else { k as f64 };
        let log = |v: f64| if v > 1e-300 { v.ln() / root } else { f64::NEG_INFINITY };
        let log_t = if solution.degenerate { f64::NEG_INFINITY } else { log(solution.value) };
        ChebyshevValue { k, log_t_lower: log(solution.lower_bound), log_t, alpha, solution }
    }

    pub fn certified(&self) -> bool {
        self.solution.certified
    }

    pub fn degenerate(&self) -> bool {
        self.solution.degenerate || self.log_t == f64::NEG_INFINITY
    }

    /// `k · log T`, i.e. the log of the minimal weighted sup norm.
    pub fn log_norm(&self) -> f64 {
        if self.k == 0 {
            self.log_t
        } else {
            self.log_t * self.k as f64
        }
    }
}

/// Minimal `‖w^k (fixed + Σ c_j free_j)‖_K` over complex `c`.
pub fn minimax_class(
    cloud: &VarietyPointCloud,
    k: u32,
    fixed: &NumericPolynomial,
    free: &[NumericPolynomial],
    opts: &MinimaxOptions,
) -> Result<MinimaxSolution, ChebyshevError> {
    let a = evaluate_on(fixed, cloud, k);
    let cols: Vec<Vec<Complex64>> = free.iter().map(|p| evaluate_on(p, cloud, k)).collect();
    Ok(solve_discrete_minimax(&a, &cols, opts)?)
}

/// `T_k(K, α)` for the class `e_α + span{e_j : ν(e_j) lex-greater than α}`.
pub fn chebyshev_constant(
    cloud: &VarietyPointCloud,
    k: u32,
    alpha: &ExponentVector,
    basis: &NumericBasis,
    opts: &MinimaxOptions,
) -> Result<ChebyshevValue, ChebyshevError> {
    let pos = basis.position(alpha).ok_or_else(|| ChebyshevError::AlphaNotInBasis(alpha.clone()))?;
    let fixed = &basis.elements[pos].poly;
    let free: Vec<NumericPolynomial> = basis.elements[pos + 1..].iter().map(|e| e.poly.clone()).collect();
    let solution = minimax_class(cloud, k, fixed, &free, opts)?;
    Ok(ChebyshevValue::from_solution(k, alpha.clone(), solution))
}

/// Which monomials of a subfamily are free in a restricted class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassRule {
    /// `x^α` plus lex-greater monomials (trailing-term normalization).
    TrailingLexHigher,
    /// `z^α` plus grevlex-lower monomials (leading-term normalization).
    GrevlexLower,
}

/// `T_{ℰ,k}(K, α)` over monomials of degree at most `k` in `coordinates`.
pub fn restricted_constant(
    cloud: &VarietyPointCloud,
    k: u32,
    alpha: &ExponentVector,
    coordinates: &[usize],
    rule: ClassRule,
    opts: &MinimaxOptions,
) -> Result<ChebyshevValue, ChebyshevError> {
    if alpha.len() != coordinates.len() {
        return Err(ChebyshevError::DimensionMismatch { found: alpha.len(), expected: coordinates.len() });
    }
    if alpha.degree() > k {
        return Err(ChebyshevError::AlphaAboveK { alpha: alpha.clone(), k });
    }
    let nvars = cloud.nvars();
    let free: Vec<NumericPolynomial> = ExponentVector::up_to_degree(coordinates.len(), k, MonomialOrder::Grevlex)
        .into_iter()
        .filter(|e| match rule {
            ClassRule::TrailingLexHigher => MonomialOrder::LexLastDominant.cmp(e, alpha) == Ordering::Greater,
            ClassRule::GrevlexLower => MonomialOrder::Grevlex.cmp(e, alpha) == Ordering::Less,
        })
        .map(|e| NumericPolynomial::monomial(embed(&e, coordinates, nvars)))
        .collect();
    let fixed = NumericPolynomial::monomial(embed(alpha, coordinates, nvars));
    let solution = minimax_class(cloud, k, &fixed, &free, opts)?;
    Ok(ChebyshevValue::from_solution(k, alpha.clone(), solution))
}

#[derive(Clone, Debug)]
pub struct TransformEntry {
    pub theta: Vec<Rational>,
    pub value: ChebyshevValue,
    pub boundary_distance: f64,
    /// At distance at least the margin from the boundary of the body.
    pub interior: bool,
}

/// `log T_k` on `N_k / k`.
#[derive(Clone, Debug)]
pub struct ChebyshevTransformGrid {
    pub k: u32,
    pub margin: f64,
    pub entries: Vec<TransformEntry>,
}

impl ChebyshevTransformGrid {
    fn mean<'a>(it: impl Iterator<Item = &'a TransformEntry>) -> Option<f64> {
        let vals: Vec<f64> = it.filter(|e| e.value.certified()).map(|e| e.value.log_t).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// `(1/M_k) Σ log T_k(α)` over every certified entry.
    pub fn full_average(&self) -> Option<f64> {
        Self::mean(self.entries.iter())
    }

    /// Average over certified entries inside the margin.
    pub fn interior_average(&self) -> Option<f64> {
        Self::mean(self.entries.iter().filter(|e| e.interior))
    }

    pub fn all_certified(&self) -> bool {
        self.entries.iter().all(|e| e.value.certified())
    }

    pub fn get(&self, alpha: &ExponentVector) -> Option<&TransformEntry> {
        self.entries.iter().find(|e| &e.value.alpha == alpha)
    }
}

/// The default boundary margin, `0.05 ·` the body diameter.
pub fn default_margin(body: &HullPolytope) -> f64 {
    0.05 * body.diameter()
}

/// Solves `T_k(K, α)` for every `α ∈ N_k` (in parallel, results in basis order).
pub fn chebyshev_transform(
    cloud: &VarietyPointCloud,
    basis: &NumericBasis,
    margin: f64,
    body: &HullPolytope,
    opts: &MinimaxOptions,
) -> Result<ChebyshevTransformGrid, ChebyshevError> {
    let k = basis.k();
    let kr = BigInt::from(k);
    let entries: Result<Vec<TransformEntry>, ChebyshevError> = basis
        .elements()
        .par_iter()
        .map(|e| {
            let value = chebyshev_constant(cloud, k, &e.nu, basis, opts)?;
            let theta: Vec<Rational> = e.nu.0.iter().map(|v| Rational::new(BigInt::from(*v), kr.clone())).collect();
            let boundary_distance = body.boundary_distance(&theta);
            Ok(TransformEntry { interior: boundary_distance >= margin, theta, value, boundary_distance })
        })
        .collect();
    Ok(ChebyshevTransformGrid { k, margin, entries: entries? })
}

#[derive(Clone, Debug)]
pub struct ConvexityReport {
    pub triples: usize,
    /// Largest `log T(mid) − (log T(θ) + log T(φ))/2` over grid triples.
    pub max_violation: f64,
}

/// Midpoint convexity of `log T_k` over triples `α, β, (α+β)/2` of `N_k`.
pub fn midpoint_convexity(grid: &ChebyshevTransformGrid, interior_only: bool) -> ConvexityReport {
    let usable: Vec<&TransformEntry> = grid
        .entries
        .iter()
        .filter(|e| e.value.certified() && e.value.log_t.is_finite() && (!interior_only || e.interior))
        .collect();
    let index: HashMap<&ExponentVector, f64> = usable.iter().map(|e| (&e.value.alpha, e.value.log_t)).collect();
    let mut triples = 0;
    let mut max_violation = f64::NEG_INFINITY;
    for (i, a) in usable.iter().enumerate() {
        for b in &usable[i + 1..] {
            let sum = a.value.alpha.add(&b.value.alpha);
            if sum.0.iter().any(|v| v % 2 == 1) {
                continue;
            }
            let mid = ExponentVector(sum.0.iter().map(|v| v / 2).collect());
            if let Some(m) = index.get(&mid) {
                triples += 1;
                max_violation = max_violation.max(m - 0.5 * (a.value.log_t + b.value.log_t));
            }
        }
    }
    ConvexityReport { triples, max_violation }
}

#[derive(Clone, Debug)]
pub struct SubmultiplicativeCase {
    pub k1: u32,
    pub alpha1: ExponentVector,
    pub k2: u32,
    pub alpha2: ExponentVector,
    /// `(k1+k2) · log T_{k1+k2}(α1+α2)`.
    pub lhs: f64,
    /// `k1 · log T_{k1}(α1) + k2 · log T_{k2}(α2)`.
    pub rhs: f64,
    pub holds: bool,
}

/// Samples `cases` random pairs `(k1, α1), (k2, α2)` with `k1 + k2 ≤ k_max`
/// and checks `T_{k1+k2}(α1+α2)^{k1+k2} ≤ T_{k1}(α1)^{k1} T_{k2}(α2)^{k2}`.
/// `bases[k-1]` must hold the basis for `N_k`.
pub fn submultiplicativity(
    cloud: &VarietyPointCloud,
    bases: &[NumericBasis],
    cases: usize,
    seed: u64,
    opts: &MinimaxOptions,
) -> Result<Vec<SubmultiplicativeCase>, ChebyshevError> {
    let k_max = bases.len() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = Vec::new();
    if k_max >= 2 {
        for _ in 0..cases {
            let k1 = rng.gen_range(1..k_max);
            let k2 = rng.gen_range(1..=k_max - k1);
            let a1 = bases[k1 as usize - 1].elements()[rng.gen_range(0..bases[k1 as usize - 1].len())].nu.clone();
            let a2 = bases[k2 as usize - 1].elements()[rng.gen_range(0..bases[k2 as usize - 1].len())].nu.clone();
            picks.push((k1, a1, k2, a2));
        }
    }
    let slack = 3.0 * (1.0 + opts.gap_tol).ln();
    picks
        .into_par_iter()
        .map(|(k1, a1, k2, a2)| {
            let t1 = chebyshev_constant(cloud, k1, &a1, &bases[k1 as usize - 1], opts)?;
            let t2 = chebyshev_constant(cloud, k2, &a2, &bases[k2 as usize - 1], opts)?;
            let sum = a1.add(&a2);
            let t12 = chebyshev_constant(cloud, k1 + k2, &sum, &bases[(k1 + k2) as usize - 1], opts)?;
            let (lhs, rhs) = (t12.log_norm(), t1.log_norm() + t2.log_norm());
            Ok(SubmultiplicativeCase { k1, alpha1: a1, k2, alpha2: a2, lhs, rhs, holds: lhs <= rhs + slack })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{GaussianRational, Variables};
    use crate::ideals::{Ideal, NoetherSplit, NormalFormAlgebra};
    use crate::okounkov::okounkov_body;
    use crate::series::{implicit_series, DEFAULT_D_MAX};
    use crate::sets::{sample_random_sphere, sample_real_sphere, sphere_variety, SphereSeed};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn circle_cloud(n: usize, radius: f64) -> VarietyPointCloud {
        let vars = Variables::new(&["z"]).unwrap();
        let pts = (0..n).map(|l| vec![Complex64::from_polar(radius, 2.0 * PI * l as f64 / n as f64)]).collect();
        VarietyPointCloud::affine(&vars, pts).unwrap()
    }

    fn sphere_bases(k_max: u32) -> (Vec<NumericBasis>, HullPolytope) {
        let (vars, g) = sphere_variety();
        let alg = NormalFormAlgebra::new(Ideal::new(&vars, vec![g]).unwrap(), NoetherSplit::new(vec![0, 1], vec![2], 3).unwrap()).unwrap();
        let chart = implicit_series(Arc::new(alg), &[0, 0, 1].map(GaussianRational::from_int), 8).unwrap();
        let res = okounkov_body(&chart, k_max, DEFAULT_D_MAX).unwrap();
        (res.stages.iter().map(|s| NumericBasis::from_nu_set(&s.nu_set)).collect(), res.body)
    }

    #[test]
    fn unit_circle_constants_are_one() {
        let cloud = circle_cloud(512, 1.0);
        for k in [1, 4, 8] {
            let basis = NumericBasis::monomials(1, &[0], k);
            for j in 0..=k {
                let t = chebyshev_constant(&cloud, k, &ExponentVector(vec![j]), &basis, &MinimaxOptions::default()).unwrap();
                assert!(t.certified());
                assert!(t.log_t.abs() <= 1e-6, "k={k} j={j} {}", t.log_t);
            }
        }
        let small = circle_cloud(512, 0.5);
        let basis = NumericBasis::monomials(1, &[0], 3);
        let t = chebyshev_constant(&small, 3, &ExponentVector(vec![2]), &basis, &MinimaxOptions::default()).unwrap();
        assert!((t.solution.value - 0.25).abs() <= 1e-6 * 0.25);
    }

    #[test]
    fn single_point_and_zero_weight() {
        let (vars, _) = sphere_variety();
        let cloud = VarietyPointCloud::new(&vars, vec![vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.8, 0.0)]], vec![Complex64::new(0.5, 0.0)], &[], 1e-9).unwrap();
        // Free elements z2 (and everything above) vanish or span the fixed value.
        let basis = NumericBasis::new(1, vec![
            BasisElement { nu: ExponentVector(vec![1, 0]), poly: NumericPolynomial::monomial(vec![1, 0, 0]) },
            BasisElement { nu: ExponentVector(vec![0, 1]), poly: NumericPolynomial::monomial(vec![0, 1, 0]) },
        ]);
        let t = chebyshev_constant(&cloud, 1, &ExponentVector(vec![1, 0]), &basis, &MinimaxOptions::default()).unwrap();
        assert!((t.solution.value - 0.3).abs() < 1e-15);
        let zero = cloud.with_weights(&crate::sets::WeightSpec::constant(Complex64::new(0.0, 0.0))).unwrap();
        let t = chebyshev_constant(&zero, 1, &ExponentVector(vec![1, 0]), &basis, &MinimaxOptions::default()).unwrap();
        assert!(t.degenerate() && t.log_t == f64::NEG_INFINITY);
    }

    #[test]
    fn restricted_full_family_matches_full_constant() {
        let vars = Variables::new(&["x", "y"]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = (0..60).map(|_| (0..2).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).collect();
        let cloud = VarietyPointCloud::affine(&vars, pts).unwrap();
        let basis = NumericBasis::monomials(2, &[0, 1], 2);
        for e in basis.elements() {
            let full = chebyshev_constant(&cloud, 2, &e.nu, &basis, &MinimaxOptions::default()).unwrap();
            let restricted = restricted_constant(&cloud, 2, &e.nu, &[0, 1], ClassRule::TrailingLexHigher, &MinimaxOptions::default()).unwrap();
            assert!((full.log_t - restricted.log_t).abs() <= 1e-8);
        }
    }

    #[test]
    fn sphere_transform_and_diagnostics() {
        let (bases, body) = sphere_bases(3);
        let cloud = sample_real_sphere(200, SphereSeed::Fibonacci(1)).unwrap();
        let opts = MinimaxOptions::default();
        let grid = chebyshev_transform(&cloud, &bases[0], 0.0, &body, &opts).unwrap();
        assert_eq!(grid.entries.len(), 4);
        assert!(grid.all_certified());
        assert!(grid.entries.iter().all(|e| e.value.log_t.is_finite()));
        // Adding points never decreases a constant.
        let bigger = cloud.union(&sample_random_sphere(50, 9).unwrap());
        for e in &grid.entries {
            let t = chebyshev_constant(&bigger, 1, &e.value.alpha, &bases[0], &opts).unwrap();
            assert!(t.solution.value >= e.value.solution.lower_bound * (1.0 - 1e-8));
        }
        let g2 = chebyshev_transform(&cloud, &bases[1], default_margin(&body), &body, &opts).unwrap();
        let convex = midpoint_convexity(&g2, false);
        assert!(convex.triples > 0);
        assert!(convex.max_violation.is_finite());
        let cases = submultiplicativity(&cloud, &bases, 12, 5, &opts).unwrap();
        assert_eq!(cases.len(), 12);
        assert!(cases.iter().all(|c| c.holds), "{cases:?}");
    }

    #[test]
    fn grid_refinement_brackets_two_coefficients() {
        let cloud = sample_random_sphere(40, 2).unwrap();
        let (bases, _) = sphere_bases(1);
        // α = (1, 0) has free elements at (2, 0) and (0, 1).
        let basis = &bases[0];
        let alpha = ExponentVector(vec![1, 0]);
        let t = chebyshev_constant(&cloud, 1, &alpha, basis, &MinimaxOptions::default()).unwrap();
        let pos = basis.position(&alpha).unwrap();
        let cols = basis.evaluate(&cloud, 1);
        let (a, f1, f2) = (&cols[pos], &cols[pos + 1], &cols[pos + 2]);
        let value = |c1: Complex64, c2: Complex64| (0..a.len()).map(|i| (a[i] + c1 * f1[i] + c2 * f2[i]).norm()).fold(0.0, f64::max);
        // Coarse-to-fine grid search inside the a-priori coefficient ball.
        let amax = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let fmin = f1.iter().chain(f2).map(|z| z.norm()).filter(|v| *v > 1e-12).fold(f64::INFINITY, f64::min);
        let zero = Complex64::new(0.0, 0.0);
        let (mut best, mut c) = (value(zero, zero), (zero, zero));
        let mut h = 2.0 * amax / fmin / 2.0;
        let (mut c1, mut c2) = c;
        for _ in 0..80 {
            for dx in -2..=2 {
                for dy in -2..=2 {
                    for dz in -2..=2 {
                        for dw in -2..=2 {
                            let cand = (c1 + Complex64::new(dx as f64 * h, dy as f64 * h), c2 + Complex64::new(dz as f64 * h, dw as f64 * h));
                            let v = value(cand.0, cand.1);
                            if v < best {
                                best = v;
                                c = cand;
                            }
                        }
                    }
                }
            }
            (c1, c2) = c;
            h *= 0.8;
        }
        assert!(best >= t.solution.lower_bound * (1.0 - 1e-9));
        assert!(t.solution.value <= best * (1.0 + 1e-9), "{best} vs {}", t.solution.value);
        let sol = &t.solution.coefficients;
        assert!((value(sol[0], sol[1]) - t.solution.value).abs() <= 1e-9 * t.solution.value);
    }
}
