//! The sets `N_k` of trailing exponents, their monic representatives, the
//! hulls `Δ_k = conv(N_k / k)` and the cumulative Okounkov body.
//!
//! Each stage collects candidates (the previous representatives followed by
//! their products of total degree exactly `k`), then sweeps contested
//! exponents in increasing lex order, replacing every extra polynomial at a
//! contested exponent by its S-polynomial with the first one. The sweep stops
//! as soon as the number of distinct exponents reaches `M_k`.

use std::collections::BTreeMap;
use std::ops::Bound;

use log::debug;
use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{ExponentVector, GaussianRational, LexKey, Polynomial, Rational};
use crate::hull::{HullError, HullPolytope};
use crate::ideals::IdealError;
use crate::series::{expand_on_chart, series_trailing, ImplicitChart, SeriesError, TruncatedSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OkounkovError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Hull(#[from] HullError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error("N_{k} incomplete: found {found} of M_k = {expected}")]
    Incomplete { k: u32, found: usize, expected: usize },
    #[error("N_{k} has {found} points but M_k = {expected}")]
    Overfull { k: u32, found: usize, expected: usize },
    #[error("S-polynomial chain budget exhausted at k = {k}, alpha = {alpha}")]
    ChainBudget { k: u32, alpha: ExponentVector },
    #[error("series precision {0} too low for the trailing terms at this degree")]
    InsufficientPrecision(u32),
    #[error("precision exhausted at D_max = {0}")]
    PrecisionExhausted(u32),
    #[error("k_max must be at least 1")]
    KMaxTooSmall,
}

/// A monic representative with its trailing exponent and chart series.
#[derive(Clone, Debug)]
pub struct NuEntry {
    pub nu: ExponentVector,
    pub poly: Polynomial,
    series: TruncatedSeries,
}

impl NuEntry {
    pub fn series(&self) -> &TruncatedSeries {
        &self.series
    }
}

/// `N_k` with one monic representative per point, sorted by ascending lex.
#[derive(Clone, Debug)]
pub struct NuSet {
    pub k: u32,
    pub m_k: usize,
    entries: Vec<NuEntry>,
}

impl NuSet {
    pub fn entries(&self) -> &[NuEntry] {
        &self.entries
    }

    pub fn points(&self) -> Vec<ExponentVector> {
        self.entries.iter().map(|e| e.nu.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn representative(&self, nu: &ExponentVector) -> Option<&Polynomial> {
        self.entries.iter().find(|e| &e.nu == nu).map(|e| &e.poly)
    }
}

struct Candidate {
    poly: Polynomial,
    series: TruncatedSeries,
    nu: ExponentVector,
    tc: GaussianRational,
}

fn candidate(poly: Polynomial, series: TruncatedSeries) -> Result<Option<Candidate>, OkounkovError> {
    if poly.is_zero() {
        return Ok(None);
    }
    let precision = series.precision();
    let t = series_trailing(&series).ok_or(OkounkovError::InsufficientPrecision(precision))?;
    Ok(Some(Candidate { poly, series, nu: t.nu, tc: t.tc }))
}

/// Computes `N_k` from `N_{k−1}` (or from the seed `{1, x_i, y_j}` when `prev` is `None`).
pub fn compute_nk(chart: &ImplicitChart, k: u32, prev: Option<&NuSet>) -> Result<NuSet, OkounkovError> {
    let alg = chart.algebra();
    let m_k = alg.standard_monomials(k).count();
    let mut pool: Vec<Candidate> = Vec::new();
    match prev {
        None => {
            let vars = alg.variables();
            let split = alg.split();
            let seeds = std::iter::once(Polynomial::one(vars))
                .chain(split.x().iter().chain(split.y()).map(|&j| Polynomial::variable(vars, j)));
            for s in seeds {
                let s = alg.normal_form(&s);
                if s.degree().unwrap_or(0) > k {
                    continue;
                }
                let series = expand_on_chart(&s, chart);
                if let Some(c) = candidate(s, series)? {
                    pool.push(c);
                }
            }
        }
        Some(prev) => {
            for e in prev.entries() {
                pool.push(Candidate { poly: e.poly.clone(), series: e.series.clone(), nu: e.nu.clone(), tc: GaussianRational::one() });
            }
            let reps = prev.entries();
            let degs: Vec<u32> = reps.iter().map(|e| e.poly.degree().unwrap_or(0)).collect();
            let pairs: Vec<(usize, usize)> = (0..reps.len())
                .flat_map(|a| (a..reps.len()).map(move |b| (a, b)))
                .filter(|&(a, b)| degs[a] + degs[b] == k)
                .collect();
            let products: Vec<Result<Option<Candidate>, OkounkovError>> = pairs
                .par_iter()
                .map(|&(a, b)| {
                    let poly = alg.nf_multiply(&reps[a].poly, &reps[b].poly)?;
                    let series = reps[a].series.mul(&reps[b].series);
                    candidate(poly, series)
                })
                .collect();
            for c in products {
                if let Some(c) = c? {
                    pool.push(c);
                }
            }
        }
    }
    sweep(k, m_k, pool)
}

fn sweep(k: u32, m_k: usize, pool: Vec<Candidate>) -> Result<NuSet, OkounkovError> {
    let mut arena: Vec<Candidate> = Vec::new();
    let mut crowd: BTreeMap<LexKey, Vec<usize>> = BTreeMap::new();
    for c in pool {
        crowd.entry(LexKey(c.nu.clone())).or_default().push(arena.len());
        arena.push(c);
    }
    let budget = 4 * m_k;
    let mut cursor: Option<LexKey> = None;
    'sweep: while crowd.len() < m_k {
        let lower = cursor.as_ref().map_or(Bound::Unbounded, Bound::Excluded);
        let Some((alpha, ids)) = crowd.range((lower, Bound::Unbounded)).find(|(_, v)| v.len() > 1) else {
            break;
        };
        let (alpha, ids) = (alpha.clone(), ids.clone());
        crowd.insert(alpha.clone(), vec![ids[0]]);
        let rep = ids[0];
        let mut chain = 0;
        for &q in &ids[1..] {
            chain += 1;
            if chain > budget {
                return Err(OkounkovError::ChainBudget { k, alpha: alpha.0 });
            }
            let (a, b) = (&arena[rep], &arena[q]);
            let poly = a.poly.scale(&b.tc).checked_sub(&b.poly.scale(&a.tc)).expect("shared variables");
            let series = a.series.combine(&b.tc, &-a.tc.clone(), &b.series);
            let Some(c) = candidate(poly, series)? else { continue };
            debug_assert!(LexKey(c.nu.clone()) > alpha, "S-polynomial must raise the trailing exponent");
            crowd.entry(LexKey(c.nu.clone())).or_default().push(arena.len());
            arena.push(c);
            if crowd.len() == m_k {
                break 'sweep;
            }
        }
        cursor = Some(alpha);
    }
    if crowd.len() < m_k {
        return Err(OkounkovError::Incomplete { k, found: crowd.len(), expected: m_k });
    }
    if crowd.len() > m_k {
        return Err(OkounkovError::Overfull { k, found: crowd.len(), expected: m_k });
    }
    let entries = crowd
        .into_iter()
        .map(|(nu, ids)| {
            let c = &arena[ids[0]];
            let inv = c.tc.inv().expect("trailing coefficient is nonzero");
            NuEntry { nu: nu.0, poly: c.poly.scale(&inv), series: c.series.scale(&inv) }
        })
        .collect();
    Ok(NuSet { k, m_k, entries })
}

/// One stage of the body computation.
#[derive(Clone, Debug)]
pub struct OkounkovStage {
    pub nu_set: NuSet,
    /// `conv(N_k / k)`.
    pub hull: HullPolytope,
    /// Hull of `Δ_1 ∪ … ∪ Δ_k`.
    pub cumulative: HullPolytope,
}

#[derive(Clone, Debug)]
pub struct OkounkovResult {
    pub stages: Vec<OkounkovStage>,
    pub body: HullPolytope,
    pub stabilized: bool,
    /// Pairs `(k, rk)` for which `Δ_k ⊆ Δ_{rk}` failed (expected empty).
    pub monotonicity_violations: Vec<(u32, u32)>,
    /// Series precision that was sufficient for every stage.
    pub precision: u32,
}

impl OkounkovResult {
    pub fn k_max(&self) -> u32 {
        self.stages.len() as u32
    }

    pub fn stage(&self, k: u32) -> Option<&OkounkovStage> {
        self.stages.get((k as usize).checked_sub(1)?)
    }

    pub fn volume(&self) -> &Rational {
        self.body.volume()
    }
}

fn scaled_points(set: &NuSet) -> Vec<Vec<Rational>> {
    let k = BigInt::from(set.k);
    set.entries.iter().map(|e| e.nu.0.iter().map(|v| Rational::new(BigInt::from(*v), k.clone())).collect()).collect()
}

/// Computes `N_1, …, N_{k_max}`, their hulls and the cumulative body. The
/// chart precision starts at `2·k_max + 4` and doubles (up to `d_max`)
/// whenever a trailing term falls outside the truncation.
pub fn okounkov_body(chart: &ImplicitChart, k_max: u32, d_max: u32) -> Result<OkounkovResult, OkounkovError> {
    if k_max < 1 {
        return Err(OkounkovError::KMaxTooSmall);
    }
    let mut precision = (2 * k_max + 4).max(chart.precision());
    loop {
        let local = if precision == chart.precision() { chart.clone() } else { chart.refined(precision)? };
        match run_stages(&local, k_max) {
            Err(OkounkovError::InsufficientPrecision(_)) if precision < d_max => {
                precision = (2 * precision).min(d_max);
                debug!("raising series precision to {precision}");
            }
            Err(OkounkovError::InsufficientPrecision(_)) => return Err(OkounkovError::PrecisionExhausted(d_max)),
            Err(e) => return Err(e),
            Ok(stages) => return finish(stages, precision),
        }
    }
}

fn run_stages(chart: &ImplicitChart, k_max: u32) -> Result<Vec<NuSet>, OkounkovError> {
    let mut sets: Vec<NuSet> = Vec::new();
    for k in 1..=k_max {
        let set = compute_nk(chart, k, sets.last())?;
        debug!("N_{k}: {} points", set.len());
        sets.push(set);
    }
    Ok(sets)
}

fn finish(sets: Vec<NuSet>, precision: u32) -> Result<OkounkovResult, OkounkovError> {
    let mut stages = Vec::new();
    let mut union: Vec<Vec<Rational>> = Vec::new();
    for set in sets {
        let hull = HullPolytope::new(&scaled_points(&set))?;
        union.extend(hull.vertices().iter().cloned());
        let cumulative = HullPolytope::new(&union)?;
        union = cumulative.vertices().to_vec();
        stages.push(OkounkovStage { nu_set: set, hull, cumulative });
    }
    let body = stages.last().expect("at least one stage").cumulative.clone();
    let n = stages.len();
    let stabilized = n >= 2 && stages[n - 2].cumulative.vertex_set() == body.vertex_set();
    let mut monotonicity_violations = Vec::new();
    for k in 1..=n {
        for rk in (2 * k..=n).step_by(k) {
            let (small, big) = (&stages[k - 1].hull, &stages[rk - 1].hull);
            if !small.vertices().iter().all(|v| big.contains(v)) {
                monotonicity_violations.push((k as u32, rk as u32));
            }
        }
    }
    Ok(OkounkovResult { stages, body, stabilized, monotonicity_violations, precision })
}

/// Where the points of `N_k` came from in a [`LatticeReport`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeSource {
    /// `N_k` was computed by the sweep.
    Computed,
    /// `k` exceeds the computed range; the integer points of `k·Δ` are used.
    BodyLattice,
}

#[derive(Clone, Debug)]
pub struct LatticeReport {
    pub k: u32,
    pub source: LatticeSource,
    /// `N_k = (k·Δ) ∩ Z^m`, when `N_k` was computed.
    pub equals_body_lattice: Option<bool>,
    pub lattice_count: usize,
    /// Box counts `|N_k ∩ kQ|`, `|N_k ∩ kQ| / k^m`, `vol(Q)` and the
    /// boundary-correction bound on their difference.
    pub box_count: Option<usize>,
    pub box_density: Option<Rational>,
    pub box_volume: Option<Rational>,
    pub box_bound: Option<f64>,
}

impl LatticeReport {
    pub fn box_within_bound(&self) -> Option<bool> {
        let (d, v, b) = (self.box_density.as_ref()?, self.box_volume.as_ref()?, self.box_bound?);
        Some(crate::algebra::rational_to_f64(&(d - v)).abs() <= b + 1e-15)
    }
}

/// Compares `N_k` with the integer points of `k·Δ` and, for a rational box
/// `Q = Π [lo_i, hi_i]`, reports the normalized count of `N_k ∩ kQ`.
pub fn lattice_check(result: &OkounkovResult, k: u32, q_box: Option<&[(Rational, Rational)]>) -> LatticeReport {
    let body_points = result.body.lattice_points_scaled(k);
    let (points, source, equals) = match result.stage(k) {
        Some(stage) => {
            let mut pts: Vec<Vec<i64>> =
                stage.nu_set.entries().iter().map(|e| e.nu.0.iter().map(|v| *v as i64).collect()).collect();
            pts.sort();
            let eq = pts == body_points;
            (pts, LatticeSource::Computed, Some(eq))
        }
        None => (body_points.clone(), LatticeSource::BodyLattice, None),
    };
    let mut report = LatticeReport {
        k,
        source,
        equals_body_lattice: equals,
        lattice_count: points.len(),
        box_count: None,
        box_density: None,
        box_volume: None,
        box_bound: None,
    };
    if let Some(q) = q_box {
        let kr = Rational::from_integer(k.into());
        let inside = |p: &Vec<i64>| {
            p.iter().zip(q).all(|(x, (lo, hi))| {
                let x = Rational::from_integer((*x).into());
                (lo * &kr) <= x && x <= hi * &kr
            })
        };
        let count = points.iter().filter(|p| inside(p)).count();
        let km = kr.pow(q.len() as i32);
        let vol: Rational = q.iter().map(|(lo, hi)| hi - lo).fold(Rational::one(), |a, s| a * s);
        let sides: Vec<f64> = q.iter().map(|(lo, hi)| crate::algebra::rational_to_f64(&(hi - lo))).collect();
        let kf = k as f64;
        let upper: f64 = sides.iter().map(|s| kf * s + 1.0).product();
        let bound = (upper - sides.iter().map(|s| kf * s).product::<f64>()) / kf.powi(q.len() as i32);
        report.box_count = Some(count);
        report.box_density = Some(Rational::from_integer(count.into()) / km);
        report.box_volume = Some(vol);
        report.box_bound = Some(bound);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_polynomial, rat, Variables};
    use crate::ideals::{Ideal, NoetherSplit, NormalFormAlgebra};
    use crate::series::{implicit_series, DEFAULT_D_MAX};
    use num_traits::Zero;
    use std::sync::Arc;

    fn sphere_chart() -> ImplicitChart {
        let v = Variables::new(&["z1", "z2", "z3"]).unwrap();
        let g = parse_polynomial("z1^2+z2^2+z3^2-1", &v).unwrap();
        let alg = NormalFormAlgebra::new(Ideal::new(&v, vec![g]).unwrap(), NoetherSplit::new(vec![0, 1], vec![2], 3).unwrap()).unwrap();
        implicit_series(Arc::new(alg), &[0, 0, 1].map(GaussianRational::from_int), 8).unwrap()
    }

    fn plane_chart(m: usize) -> ImplicitChart {
        let v = Variables::standard(m);
        let alg = NormalFormAlgebra::new(Ideal::zero(&v), NoetherSplit::new((0..m).collect(), vec![], m).unwrap()).unwrap();
        implicit_series(Arc::new(alg), &vec![GaussianRational::zero(); m], 4).unwrap()
    }

    fn ev(v: &[u32]) -> ExponentVector {
        ExponentVector(v.to_vec())
    }

    #[test]
    fn sphere_first_sets() {
        let chart = sphere_chart();
        let n1 = compute_nk(&chart, 1, None).unwrap();
        assert_eq!(n1.points(), vec![ev(&[0, 0]), ev(&[1, 0]), ev(&[2, 0]), ev(&[0, 1])]);
        let n2 = compute_nk(&chart, 2, Some(&n1)).unwrap();
        let mut expected: Vec<ExponentVector> =
            (0..=2u32).flat_map(|b| (0..=4 - 2 * b).map(move |a| ev(&[a, b]))).collect();
        expected.sort_by_key(|a| LexKey(a.clone()));
        assert_eq!(n2.points(), expected);
        // Representatives are monic with the advertised trailing exponents.
        for e in n2.entries() {
            let t = crate::series::trailing(&e.poly, &chart, DEFAULT_D_MAX).unwrap();
            assert_eq!(t.nu, e.nu);
            assert!(t.tc.is_one());
            assert!(e.poly.degree().unwrap() <= 2);
        }
    }

    #[test]
    fn sphere_body_is_the_triangle() {
        let res = okounkov_body(&sphere_chart(), 4, DEFAULT_D_MAX).unwrap();
        assert!(res.stabilized);
        assert_eq!(res.body.vertices(), &[vec![rat(0, 1), rat(0, 1)], vec![rat(2, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]]);
        assert_eq!(*res.volume(), rat(1, 1));
        assert_eq!(res.stages[0].hull.vertex_set(), res.body.vertex_set());
        assert!(res.monotonicity_violations.is_empty());
        for k in 1..=4 {
            let r = lattice_check(&res, k, None);
            assert_eq!(r.equals_body_lattice, Some(true));
            assert_eq!(r.lattice_count, ((k + 1) * (k + 1)) as usize);
        }
    }

    #[test]
    fn lattice_box_counts() {
        let res = okounkov_body(&sphere_chart(), 3, DEFAULT_D_MAX).unwrap();
        let q = [(rat(1, 4), rat(1, 2)), (rat(1, 8), rat(1, 4))];
        let r3 = lattice_check(&res, 3, Some(&q));
        assert_eq!(r3.source, LatticeSource::Computed);
        assert_eq!(r3.lattice_count, 16);
        for k in [8, 16] {
            let r = lattice_check(&res, k, Some(&q));
            assert_eq!(r.source, LatticeSource::BodyLattice);
            assert_eq!(r.box_volume, Some(rat(1, 32)));
            assert_eq!(r.box_within_bound(), Some(true));
        }
        assert_eq!(lattice_check(&res, 16, Some(&q)).box_count, Some(15));
    }

    #[test]
    fn zero_ideal_gives_simplices() {
        let res = okounkov_body(&plane_chart(2), 3, DEFAULT_D_MAX).unwrap();
        assert_eq!(res.body.vertex_set(), vec![vec![rat(0, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]]);
        assert_eq!(*res.volume(), rat(1, 2));
        let n3 = &res.stage(3).unwrap().nu_set;
        assert_eq!(n3.len(), 10);
        assert!(n3.entries().iter().all(|e| e.poly.len() == 1 && e.nu.degree() <= 3));
        let res3 = okounkov_body(&plane_chart(3), 2, DEFAULT_D_MAX).unwrap();
        assert_eq!(*res3.volume(), rat(1, 6));
        let res1 = okounkov_body(&plane_chart(1), 3, DEFAULT_D_MAX).unwrap();
        assert_eq!(*res1.volume(), rat(1, 1));
    }
}
