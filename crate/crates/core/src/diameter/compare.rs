//! Finite-k comparisons between Vandermonde growth and Chebyshev constants.

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use super::{fekete_search, log_abs_det, DiameterError, FeketeConfig, Normalization};
use crate::algebra::{ExponentVector, MonomialOrder, NumericPolynomial, Rational};
use crate::chebyshev::{
    chebyshev_constant, minimax_class, restricted_constant, ChebyshevValue, ClassRule, MinimaxOptions, NumericBasis,
};
use crate::sets::{weighted_eval, ChartMap, VarietyPointCloud, WeightSpec};

fn relative_difference(log_a: f64, log_b: f64) -> f64 {
    if log_a == f64::NEG_INFINITY && log_b == f64::NEG_INFINITY {
        0.0
    } else {
        (log_a - log_b).exp_m1().abs()
    }
}

fn log_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Both sides of `∏ T_k^k ≤ V_k ≤ M_k! ∏ T_k^k` in log space.
#[derive(Clone, Debug)]
pub struct SandwichReport {
    pub k: u32,
    pub m_k: usize,
    pub log_v: f64,
    /// The Fekete value is the exact maximum over the cloud.
    pub exact: bool,
    /// `Σ_j log ‖t_j‖` from the attained solver values.
    pub sum_log_norm: f64,
    /// `Σ_j` of the log certified lower bounds.
    pub sum_log_lower: f64,
    pub log_factorial: f64,
    /// `sum_log_norm − sum_log_lower`.
    pub slack: f64,
    /// `log V − Σ log ‖t_j‖`; at least `−slack` when the lower lemma holds.
    pub lower_margin: f64,
    /// `log M_k! + Σ log ‖t_j‖ − log V`.
    pub upper_margin: f64,
    /// `None` unless the Fekete value is exact.
    pub lower_holds: Option<bool>,
    pub upper_holds: bool,
    pub values: Vec<ChebyshevValue>,
}

/// Evaluates both sandwich inequalities for one basis. The lower one is
/// only decided when the Fekete search is exhaustive.
pub fn sandwich_check(
    cloud: &VarietyPointCloud,
    basis: &NumericBasis,
    config: &FeketeConfig,
    opts: &MinimaxOptions,
) -> Result<SandwichReport, DiameterError> {
    let k = basis.k();
    let m_k = basis.len();
    let fekete = fekete_search(&basis.evaluate(cloud, k), config)?;
    let values = basis
        .elements()
        .iter()
        .map(|e| chebyshev_constant(cloud, k, &e.nu, basis, opts))
        .collect::<Result<Vec<_>, _>>()?;
    if values.iter().any(|v| !v.certified() && !v.degenerate()) {
        return Err(DiameterError::NotCertified(k));
    }
    let log_v = fekete.log_v;
    let lf = log_factorial(m_k);
    let tol = 1e-12 * (1.0 + log_v.abs());
    let (sum_log_norm, sum_log_lower, slack, lower_holds, upper_holds);
    if values.iter().any(ChebyshevValue::degenerate) {
        // Some class vanishes on the whole cloud, so every determinant does too.
        sum_log_norm = f64::NEG_INFINITY;
        sum_log_lower = f64::NEG_INFINITY;
        slack = 0.0;
        lower_holds = true;
        upper_holds = log_v == f64::NEG_INFINITY;
    } else {
        sum_log_norm = values.iter().map(|v| v.solution.value.ln()).sum();
        sum_log_lower = values.iter().map(|v| v.solution.lower_bound.ln()).sum();
        slack = sum_log_norm - sum_log_lower;
        lower_holds = log_v - sum_log_norm >= -slack - tol;
        upper_holds = lf + sum_log_norm - log_v >= -tol;
    }
    Ok(SandwichReport {
        k,
        m_k,
        log_v,
        exact: fekete.exact,
        sum_log_norm,
        sum_log_lower,
        log_factorial: lf,
        slack,
        lower_margin: log_v - sum_log_norm,
        upper_margin: lf + sum_log_norm - log_v,
        lower_holds: fekete.exact.then_some(lower_holds),
        upper_holds,
        values,
    })
}

#[derive(Clone, Debug)]
pub struct IntegralRow {
    pub k: u32,
    pub m_k: usize,
    pub log_d_k: f64,
    /// `(1/M_k) Σ_j log T_k(α(j))`.
    pub mean_log_t: f64,
    pub deviation: f64,
    /// `log(M_k!) / (k M_k)`; binding only when the Fekete value is exact.
    pub bound: f64,
    pub exact: bool,
    pub within_bound: bool,
}

#[derive(Clone, Debug)]
pub struct IntegralReport {
    pub rows: Vec<IntegralRow>,
    pub sandwiches: Vec<SandwichReport>,
}

impl IntegralReport {
    /// Deviations are non-increasing in k (for inspection only).
    pub fn deviations_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].deviation <= w[0].deviation)
    }
}

/// Compares `log d_k` with the average of `log T_k` over `N_k` for each basis.
pub fn integral_formula_compare(
    cloud: &VarietyPointCloud,
    bases: &[NumericBasis],
    config: &FeketeConfig,
    opts: &MinimaxOptions,
) -> Result<IntegralReport, DiameterError> {
    let sandwiches = bases.iter().map(|b| sandwich_check(cloud, b, config, opts)).collect::<Result<Vec<_>, _>>()?;
    let rows = sandwiches
        .iter()
        .map(|s| {
            let scale = s.k as f64 * s.m_k as f64;
            let log_d_k = s.log_v / scale;
            let mean_log_t = s.sum_log_norm / scale;
            let deviation = if log_d_k == mean_log_t { 0.0 } else { (log_d_k - mean_log_t).abs() };
            let bound = s.log_factorial / scale;
            IntegralRow {
                k: s.k,
                m_k: s.m_k,
                log_d_k,
                mean_log_t,
                deviation,
                bound,
                exact: s.exact,
                within_bound: deviation <= bound + s.slack / scale + 1e-6,
            }
        })
        .collect();
    Ok(IntegralReport { rows, sandwiches })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousReport {
    pub k: u32,
    pub n: usize,
    pub h_k: usize,
    /// `log |VDMH|` of the degree-k homogeneous monomials in `z`.
    pub log_vdmh: f64,
    /// Weighted `log |VDM|` of the chart monomials in `v`.
    pub log_vdm_chart: f64,
    pub relative_difference: f64,
}

/// Compares `|VDMH|` at points of `{z_0 = 1} ⊂ C^n` with the weighted
/// Vandermonde in the chart `v0 = 1/z_{n−1}` of the affine part, whose
/// weight `z_{n−1} = 1/v0` is transported from `w ≡ 1`.
pub fn homogeneous_identity(points: &[Vec<Complex64>], k: u32) -> Result<HomogeneousReport, DiameterError> {
    let n = points.first().map_or(0, Vec::len);
    if n < 2 {
        return Err(DiameterError::PointCount { found: n, expected: 2 });
    }
    let monomials = super::homogeneous_exponents(n, k);
    let h_k = monomials.len();
    if points.len() != h_k {
        return Err(DiameterError::PointCount { found: points.len(), expected: h_k });
    }
    if let Some(i) = points.iter().position(|z| z[0] != Complex64::new(1.0, 0.0)) {
        return Err(DiameterError::NotOnAffinePatch(i));
    }
    let hom: Vec<Vec<Complex64>> = monomials
        .iter()
        .map(|e| {
            let p = NumericPolynomial::monomial(e.0.clone());
            points.iter().map(|z| p.eval(z)).collect()
        })
        .collect();
    let all: Vec<usize> = (0..h_k).collect();
    let log_vdmh = log_abs_det(&hom, &all);

    let affine: Vec<Vec<Complex64>> = points.iter().map(|z| z[1..].to_vec()).collect();
    let cloud = VarietyPointCloud::affine(&crate::algebra::Variables::standard(n - 1), affine)?;
    let chart = ChartMap::new(n - 2, n - 1)?.change_chart(&cloud)?;
    let basis = NumericBasis::monomials(n - 1, &(0..n - 1).collect::<Vec<_>>(), k);
    let log_vdm_chart = log_abs_det(&basis.evaluate(&chart, k), &all);
    Ok(HomogeneousReport {
        k,
        n,
        h_k,
        log_vdmh,
        log_vdm_chart,
        relative_difference: relative_difference(log_vdmh, log_vdm_chart),
    })
}

/// `τ_j(K)`: the minimal unweighted sup norm of `z^α(j)` plus grevlex-lower
/// monomials, to the power `1/|α(j)|`.
#[derive(Clone, Debug)]
pub struct TauValue {
    pub j: usize,
    pub alpha: ExponentVector,
    pub log_tau: f64,
    pub log_tau_lower: f64,
    pub certified: bool,
    pub value: ChebyshevValue,
}

/// `α(j)` in the grevlex enumeration of monomials in `m` variables, from `α(1) = 0`.
pub fn grevlex_exponent(m: usize, j: usize) -> ExponentVector {
    let mut d = 0;
    loop {
        let all = ExponentVector::up_to_degree(m, d, MonomialOrder::Grevlex);
        if all.len() >= j {
            return all[j - 1].clone();
        }
        d += 1;
    }
}

pub fn zaharjuta_tau(cloud: &VarietyPointCloud, j: usize, opts: &MinimaxOptions) -> Result<TauValue, DiameterError> {
    if j < 2 {
        return Err(DiameterError::TauUndefined(j));
    }
    let m = cloud.nvars();
    let alpha = grevlex_exponent(m, j);
    let s = alpha.degree();
    let unit = cloud.with_weights(&WeightSpec::constant(Complex64::new(1.0, 0.0)))?;
    let coords: Vec<usize> = (0..m).collect();
    let value = restricted_constant(&unit, s, &alpha, &coords, ClassRule::GrevlexLower, opts)?;
    Ok(TauValue {
        j,
        log_tau: value.log_t,
        log_tau_lower: value.log_t_lower,
        certified: value.certified(),
        alpha,
        value,
    })
}

/// `τ_j(K)^s` against `T_k(K, α̃(j))^k` computed in the chart with the
/// transported weight, where `α̃(j)` is the chart exponent of `z^α(j)`.
#[derive(Clone, Debug)]
pub struct TauIdentity {
    pub alpha: ExponentVector,
    pub alpha_chart: ExponentVector,
    pub k: u32,
    /// `s · log τ_j`, `s = |α(j)|`.
    pub log_tau_power: f64,
    /// `k · log T_k(K, α̃(j))`.
    pub log_t_power: f64,
    pub difference: f64,
    /// Sum of both relative solver gaps.
    pub gap: f64,
}

pub fn tau_t_identity(
    cloud: &VarietyPointCloud,
    j: usize,
    k: u32,
    pivot: usize,
    opts: &MinimaxOptions,
) -> Result<TauIdentity, DiameterError> {
    let tau = zaharjuta_tau(cloud, j, opts)?;
    let alpha = tau.alpha.clone();
    let map = ChartMap::new(pivot, cloud.nvars())?;
    let unit = cloud.with_weights(&WeightSpec::constant(Complex64::new(1.0, 0.0)))?;
    let chart = map.change_chart(&unit)?;
    let alpha_chart = map.exponent_to_chart(&alpha, k)?;
    let fixed = NumericPolynomial::monomial(alpha_chart.0.clone());
    let free = ExponentVector::up_to_degree(cloud.nvars(), alpha.degree(), MonomialOrder::Grevlex)
        .into_iter()
        .filter(|b| MonomialOrder::Grevlex.cmp(b, &alpha).is_lt())
        .map(|b| map.exponent_to_chart(&b, k).map(|e| NumericPolynomial::monomial(e.0)))
        .collect::<Result<Vec<_>, _>>()?;
    let sol = minimax_class(&chart, k, &fixed, &free, opts)?;
    let log_tau_power = tau.value.log_norm();
    let log_t_power = sol.value.ln();
    Ok(TauIdentity {
        alpha,
        alpha_chart,
        k,
        log_tau_power,
        log_t_power,
        difference: (log_tau_power - log_t_power).abs(),
        gap: tau.value.solution.relative_gap() + sol.relative_gap(),
    })
}

#[derive(Clone, Debug)]
pub struct ProjectionReport {
    pub k: u32,
    pub m_k: u64,
    pub l_k: u64,
    /// `L_k / (k M_k)`.
    pub exponent: Rational,
    /// `log V_{ℰ,k}(K)` for monomials in the base coordinates.
    pub log_v: f64,
    /// `log V_k(π(K))`.
    pub log_v_projected: f64,
    pub v_relative_difference: f64,
    /// Relative change of `|VDM|` after moving every Fekete point across its fiber.
    pub swap_relative_difference: f64,
    /// `log d_{ℰ,k}(K) = log V / (k M_k)`.
    pub log_d_subfamily: f64,
    /// `log V_k(π(K)) / L_k`.
    pub log_d_projected_classical: f64,
    /// `|log d_{ℰ,k}(K) − exponent · log d_k(π(K))|`.
    pub exponent_relation_difference: f64,
}

/// Compares the subfamily diameter of `K` with the diameter of its
/// projection onto `base` coordinates; `fiber` is negated by the swap.
pub fn projection_invariance(
    cloud: &VarietyPointCloud,
    k: u32,
    base: &[usize],
    fiber: usize,
    config: &FeketeConfig,
) -> Result<ProjectionReport, DiameterError> {
    let subfamily = NumericBasis::monomials(cloud.nvars(), base, k);
    let columns = subfamily.evaluate(cloud, k);
    let fekete = fekete_search(&columns, config)?;

    let swapped: Vec<Vec<Complex64>> = subfamily
        .elements()
        .iter()
        .map(|e| {
            fekete
                .points
                .iter()
                .map(|&i| {
                    let mut z = cloud.points()[i].clone();
                    z[fiber] = -z[fiber];
                    weighted_eval(&e.poly, &z, cloud.weights()[i], k)
                })
                .collect()
        })
        .collect();
    let log_swapped = log_abs_det(&swapped, &(0..fekete.points.len()).collect::<Vec<_>>());

    let projected = cloud.project(base);
    let plain = NumericBasis::monomials(base.len(), &(0..base.len()).collect::<Vec<_>>(), k);
    let fekete_pi = fekete_search(&plain.evaluate(&projected, k), config)?;

    let norm = Normalization::from_dims(&super::zero_ideal_dims(base.len(), k), k)?;
    let exponent = norm.ratio();
    let log_d_subfamily = fekete.log_v / (k as f64 * norm.m_k as f64);
    let log_d_projected_classical = fekete_pi.log_v / norm.l_k as f64;
    let relation = crate::algebra::rational_to_f64(&exponent) * log_d_projected_classical;
    Ok(ProjectionReport {
        k,
        m_k: norm.m_k,
        l_k: norm.l_k,
        exponent,
        log_v: fekete.log_v,
        log_v_projected: fekete_pi.log_v,
        v_relative_difference: relative_difference(fekete.log_v, fekete_pi.log_v),
        swap_relative_difference: relative_difference(fekete.log_v, log_swapped),
        log_d_subfamily,
        log_d_projected_classical,
        exponent_relation_difference: (log_d_subfamily - relation).abs(),
    })
}

#[derive(Clone, Debug)]
pub struct CircledEntry {
    pub alpha: ExponentVector,
    pub log_restricted: f64,
    pub log_full: f64,
    pub difference: f64,
    pub certified: bool,
}

#[derive(Clone, Debug)]
pub struct CircledReport {
    pub k: u32,
    pub tolerance: f64,
    pub entries: Vec<CircledEntry>,
    pub max_difference: f64,
    /// The maximal difference exceeds the tolerance.
    pub hypothesis_violated: bool,
}

/// Restricted (monomials in `coordinates`) versus full constants at every
/// exponent of `basis` with `|α| ≤ k`.
pub fn circled_equality(
    cloud: &VarietyPointCloud,
    basis: &NumericBasis,
    coordinates: &[usize],
    tolerance: f64,
    opts: &MinimaxOptions,
) -> Result<CircledReport, DiameterError> {
    let k = basis.k();
    let entries = basis
        .elements()
        .iter()
        .filter(|e| e.nu.degree() <= k)
        .map(|e| {
            let restricted = restricted_constant(cloud, k, &e.nu, coordinates, ClassRule::TrailingLexHigher, opts)?;
            let full = chebyshev_constant(cloud, k, &e.nu, basis, opts)?;
            let difference = if restricted.degenerate() && full.degenerate() {
                0.0
            } else {
                (restricted.log_t - full.log_t).abs()
            };
            Ok(CircledEntry {
                alpha: e.nu.clone(),
                log_restricted: restricted.log_t,
                log_full: full.log_t,
                difference,
                certified: restricted.certified() && full.certified(),
            })
        })
        .collect::<Result<Vec<_>, DiameterError>>()?;
    let max_difference = entries.iter().map(|e| e.difference).fold(0.0, f64::max);
    Ok(CircledReport { k, tolerance, hypothesis_violated: !(max_difference <= tolerance), max_difference, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Variables;
    use crate::diameter::FeketeStrategy;
    use crate::sets::sample_random_sphere;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn circle(n: usize) -> VarietyPointCloud {
        let pts = (0..n).map(|l| vec![Complex64::from_polar(1.0, 2.0 * PI * l as f64 / n as f64)]).collect();
        VarietyPointCloud::affine(&Variables::standard(1), pts).unwrap()
    }

    #[test]
    fn circle_sandwich_and_integral_bound() {
        let cloud = circle(12);
        let cfg = FeketeConfig { strategy: FeketeStrategy::Exhaustive, ..Default::default() };
        let bases: Vec<_> = (1..=3).map(|k| NumericBasis::monomials(1, &[0], k)).collect();
        let report = integral_formula_compare(&cloud, &bases, &cfg, &MinimaxOptions::default()).unwrap();
        for (row, s) in report.rows.iter().zip(&report.sandwiches) {
            assert!(s.exact && s.lower_holds == Some(true) && s.upper_holds, "{s:?}");
            assert!(s.slack <= 1e-6);
            assert!(row.within_bound, "{row:?}");
        }
    }

    #[test]
    fn homogeneous_blocks_match_the_chart() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 1..=3u32 {
            let h = super::super::homogeneous_exponents(3, k).len();
            let pts: Vec<Vec<Complex64>> = (0..h)
                .map(|_| {
                    let mut z = vec![Complex64::new(1.0, 0.0)];
                    z.extend((0..2).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
                    z
                })
                .collect();
            let r = homogeneous_identity(&pts, k).unwrap();
            assert!(r.relative_difference <= 1e-10, "{r:?}");
        }
        let bad = vec![vec![Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)]; 2];
        assert_eq!(homogeneous_identity(&bad, 1), Err(DiameterError::NotOnAffinePatch(0)));
    }

    #[test]
    fn tau_on_the_circle_and_the_chart_identity() {
        let cloud = circle(256);
        assert_eq!(zaharjuta_tau(&cloud, 1, &MinimaxOptions::default()).unwrap_err(), DiameterError::TauUndefined(1));
        for j in 2..=5 {
            let t = zaharjuta_tau(&cloud, j, &MinimaxOptions::default()).unwrap();
            assert!(t.certified && t.log_tau.abs() <= 1e-6, "{t:?}");
        }
        let sphere = sample_random_sphere(60, 4).unwrap();
        for j in 2..=6 {
            let id = tau_t_identity(&sphere, j, 3, 2, &MinimaxOptions::default()).unwrap();
            assert!(id.difference <= id.gap + 1e-9, "{id:?}");
        }
    }

    #[test]
    fn projection_fiber_swap() {
        let half = sample_random_sphere(20, 9).unwrap();
        let mirrored: Vec<Vec<Complex64>> = half.points().iter().map(|z| vec![z[0], z[1], -z[2]]).collect();
        let mirror = VarietyPointCloud::affine(half.variables(), mirrored).unwrap();
        let cloud = half.union(&mirror);
        let r = projection_invariance(&cloud, 2, &[0, 1], 2, &FeketeConfig::default()).unwrap();
        assert!(r.swap_relative_difference <= 1e-12 && r.v_relative_difference <= 1e-12, "{r:?}");
        assert_eq!(r.exponent, crate::algebra::rat(2, 3));
        assert!(r.exponent_relation_difference <= 1e-12);
    }
}
