//! Weighted point clouds on a variety, samplers, weighted evaluation, sup
//! norms and projective chart changes.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{ExponentVector, GaussianRational, NumericPolynomial, Polynomial, Variables};

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SetsError {
    #[error("point cloud is empty")]
    Empty,
    #[error("point {index} has {found} coordinates, expected {expected}")]
    Dimension { index: usize, found: usize, expected: usize },
    #[error("point {index} is off the variety (residual {residual:e})")]
    OffVariety { index: usize, residual: f64 },
    #[error("{found} weights given for {expected} points")]
    WeightCount { found: usize, expected: usize },
    #[error("weight is not finite at point {0}")]
    WeightUndefined(usize),
    #[error("point {0} lies on the pivot hyperplane")]
    OnPivotHyperplane(usize),
    #[error("pivot {pivot} out of range for {n} coordinates")]
    BadPivot { pivot: usize, n: usize },
    #[error("seed {0} lies outside the action window")]
    SeedOutsideWindow(usize),
    #[error("the lifted branch does not close along the orbit of seed {0}")]
    BranchNotClosed(usize),
    #[error("window must lie in (0, 1), got {0}")]
    BadWindow(f64),
    #[error("need at least {min} points, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error("polynomial degree {degree} exceeds k = {k}")]
    DegreeAboveK { degree: u32, k: u32 },
}

/// How a weight is specified; `decay` records the exponent `r(w)` as metadata.
#[derive(Clone, Debug)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub decay: Option<f64>,
}

#[derive(Clone, Debug)]
pub enum WeightKind {
    Constant(Complex64),
    /// `numerator(z) / denominator(z)` in the cloud's coordinates.
    Ratio { numerator: Polynomial, denominator: Polynomial },
    Table(Vec<Complex64>),
}

impl WeightSpec {
    pub fn constant(c: Complex64) -> Self {
        WeightSpec { kind: WeightKind::Constant(c), decay: None }
    }

    pub fn evaluate(&self, points: &[Vec<Complex64>]) -> Result<Vec<Complex64>, SetsError> {
        let values: Vec<Complex64> = match &self.kind {
            WeightKind::Constant(c) => vec![*c; points.len()],
            WeightKind::Ratio { numerator, denominator } => {
                let (n, d) = (numerator.to_numeric(), denominator.to_numeric());
                points.iter().map(|z| n.eval(z) / d.eval(z)).collect()
            }
            WeightKind::Table(t) => {
                if t.len() != points.len() {
                    return Err(SetsError::WeightCount { found: t.len(), expected: points.len() });
                }
                t.clone()
            }
        };
        match values.iter().position(|w| !w.is_finite()) {
            Some(i) => Err(SetsError::WeightUndefined(i)),
            None => Ok(values),
        }
    }
}

/// A finite weighted set `K ⊂ V` in double precision. Immutable once built.
#[derive(Clone, Debug)]
pub struct VarietyPointCloud {
    vars: Variables,
    points: Vec<Vec<Complex64>>,
    weights: Vec<Complex64>,
    residual_tol: f64,
}

impl VarietyPointCloud {
    /// Builds a cloud, rejecting points whose generator residual exceeds
    /// `residual_tol · (1 + |ζ|^deg g)`.
    pub fn new(
        vars: &Variables,
        points: Vec<Vec<Complex64>>,
        weights: Vec<Complex64>,
        generators: &[Polynomial],
        residual_tol: f64,
    ) -> Result<Self, SetsError> {
        if points.is_empty() {
            return Err(SetsError::Empty);
        }
        if weights.len() != points.len() {
            return Err(SetsError::WeightCount { found: weights.len(), expected: points.len() });
        }
        for (index, p) in points.iter().enumerate() {
            if p.len() != vars.len() {
                return Err(SetsError::Dimension { index, found: p.len(), expected: vars.len() });
            }
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(SetsError::WeightUndefined(i));
        }
        let cloud = VarietyPointCloud { vars: vars.clone(), points, weights, residual_tol };
        let numeric: Vec<(NumericPolynomial, i32)> =
            generators.iter().map(|g| (g.to_numeric(), g.degree().unwrap_or(0) as i32)).collect();
        for (index, z) in cloud.points.iter().enumerate() {
            let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            for (g, d) in &numeric {
                let residual = g.eval(z).norm();
                if !(residual <= residual_tol * (1.0 + norm.powi(*d))) {
                    return Err(SetsError::OffVariety { index, residual });
                }
            }
        }
        Ok(cloud)
    }

    /// A cloud in affine space (no defining equations) with unit weight.
    pub fn affine(vars: &Variables, points: Vec<Vec<Complex64>>) -> Result<Self, SetsError> {
        let weights = vec![Complex64::new(1.0, 0.0); points.len()];
        Self::new(vars, points, weights, &[], DEFAULT_RESIDUAL_TOL)
    }

    pub fn variables(&self) -> &Variables {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<Complex64>] {
        &self.points
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn residual_tol(&self) -> f64 {
        self.residual_tol
    }

    pub fn with_weights(&self, spec: &WeightSpec) -> Result<Self, SetsError> {
        let weights = spec.evaluate(&self.points)?;
        Ok(VarietyPointCloud { weights, ..self.clone() })
    }

    /// Replaces every weight by its modulus.
    pub fn with_absolute_weights(&self) -> Self {
        let weights = self.weights.iter().map(|w| Complex64::new(w.norm(), 0.0)).collect();
        VarietyPointCloud { weights, ..self.clone() }
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        VarietyPointCloud {
            vars: self.vars.clone(),
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
            weights: indices.iter().map(|&i| self.weights[i]).collect(),
            residual_tol: self.residual_tol,
        }
    }

    /// Union of two clouds over the same variables.
    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.vars, other.vars);
        let mut out = self.clone();
        out.points.extend(other.points.iter().cloned());
        out.weights.extend(other.weights.iter().cloned());
        out
    }

    /// Keeps the listed coordinates, e.g. a projection `(z1, z2, z3) ↦ (z1, z2)`.
    pub fn project(&self, coordinates: &[usize]) -> Self {
        let names: Vec<&str> = coordinates.iter().map(|&j| self.vars.names()[j].as_str()).collect();
        VarietyPointCloud {
            vars: Variables::new(&names).expect("names come from a valid list"),
            points: self.points.iter().map(|z| coordinates.iter().map(|&j| z[j]).collect()).collect(),
            weights: self.weights.clone(),
            residual_tol: self.residual_tol,
        }
    }

    /// Largest generator residual over the cloud.
    pub fn max_residual(&self, generators: &[Polynomial]) -> f64 {
        let numeric: Vec<NumericPolynomial> = generators.iter().map(Polynomial::to_numeric).collect();
        self.points
            .iter()
            .flat_map(|z| numeric.iter().map(move |g| g.eval(z).norm()))
            .fold(0.0, f64::max)
    }
}

/// `w^k · p(ζ)`; a non-finite modulus signals overflow.
pub fn weighted_eval(p: &NumericPolynomial, z: &[Complex64], w: Complex64, k: u32) -> Complex64 {
    if k > 0 && w == Complex64::new(0.0, 0.0) {
        return w;
    }
    w.powu(k) * p.eval(z)
}

/// `max_K |w^k p|`.
pub fn sup_norm(p: &NumericPolynomial, cloud: &VarietyPointCloud, k: u32) -> f64 {
    cloud
        .points
        .par_iter()
        .zip(cloud.weights.par_iter())
        .map(|(z, w)| weighted_eval(p, z, *w, k).norm())
        .reduce(|| 0.0, f64::max)
}

/// The chart `v0 = 1/z_j`, `v_i = z_i/z_j` for `i ≠ j`, with coordinates
/// ordered `(v0, v_i …)` in the original order with the pivot removed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChartMap {
    pivot: usize,
    n: usize,
}

const PIVOT_TOL: f64 = 1e-9;

impl ChartMap {
    pub fn new(pivot: usize, n: usize) -> Result<Self, SetsError> {
        if pivot >= n {
            return Err(SetsError::BadPivot { pivot, n });
        }
        Ok(ChartMap { pivot, n })
    }

    pub fn pivot(&self) -> usize {
        self.pivot
    }

    fn others(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| i != self.pivot)
    }

    pub fn to_chart(&self, z: &[Complex64]) -> Option<Vec<Complex64>> {
        let zp = z[self.pivot];
        if zp.norm() <= PIVOT_TOL {
            return None;
        }
        Some(std::iter::once(zp.inv()).chain(self.others().map(|i| z[i] / zp)).collect())
    }

    pub fn to_affine(&self, v: &[Complex64]) -> Option<Vec<Complex64>> {
        if v[0].norm() <= PIVOT_TOL {
            return None;
        }
        let mut z = vec![Complex64::new(0.0, 0.0); self.n];
        z[self.pivot] = v[0].inv();
        for (slot, i) in self.others().enumerate() {
            z[i] = v[slot + 1] / v[0];
        }
        Some(z)
    }

    /// Chart variable names: `v0`, then `z_i` renamed to `v_i`.
    pub fn chart_variables(&self, vars: &Variables) -> Variables {
        let rename = |s: &str| match s.strip_prefix('z') {
            Some(rest) if !rest.is_empty() => format!("v{rest}"),
            _ => format!("v_{s}"),
        };
        let mut names = vec!["v0".to_string()];
        names.extend(self.others().map(|i| rename(&vars.names()[i])));
        if names[1..].iter().any(|s| s == "v0") {
            names[0] = "v00".to_string();
        }
        Variables::new(&names).expect("renamed identifiers are valid")
    }

    /// The chart exponent of `v0^k · z^e`.
    pub fn exponent_to_chart(&self, e: &ExponentVector, k: u32) -> Result<ExponentVector, SetsError> {
        let degree = e.degree();
        if degree > k {
            return Err(SetsError::DegreeAboveK { degree, k });
        }
        Ok(ExponentVector(std::iter::once(k - degree).chain(self.others().map(|i| e.0[i])).collect()))
    }

    /// `p̃(v) = v0^k · p(z(v))`, so that `ŵ^k p̃ = w^k p` under the weight transport.
    pub fn polynomial_to_chart(&self, p: &Polynomial, k: u32, chart_vars: &Variables) -> Result<Polynomial, SetsError> {
        let mut out = Polynomial::zero(chart_vars);
        for (e, c) in p.terms() {
            out.add_term(self.exponent_to_chart(e, k)?, c);
        }
        Ok(out)
    }

    /// Homogenizes each generator with `v0` to its own degree.
    pub fn ideal_to_chart(&self, generators: &[Polynomial], chart_vars: &Variables) -> Vec<Polynomial> {
        generators
            .iter()
            .map(|g| self.polynomial_to_chart(g, g.degree().unwrap_or(0), chart_vars).expect("degree matches"))
            .collect()
    }

    /// Maps a cloud into the chart, transporting `ŵ = z_j · w` so that
    /// `|ŵ^k p̃(v)| = |w^k p(z)|` for every `p` of degree at most `k`.
    pub fn change_chart(&self, cloud: &VarietyPointCloud) -> Result<VarietyPointCloud, SetsError> {
        self.check(cloud)?;
        let mut points = Vec::with_capacity(cloud.len());
        let mut weights = Vec::with_capacity(cloud.len());
        for (i, (z, w)) in cloud.points.iter().zip(&cloud.weights).enumerate() {
            points.push(self.to_chart(z).ok_or(SetsError::OnPivotHyperplane(i))?);
            weights.push(z[self.pivot] * w);
        }
        Ok(VarietyPointCloud { vars: self.chart_variables(&cloud.vars), points, weights, residual_tol: cloud.residual_tol })
    }

    /// Inverse of [`ChartMap::change_chart`]; `affine_vars` names the target coordinates.
    pub fn change_chart_back(&self, cloud: &VarietyPointCloud, affine_vars: &Variables) -> Result<VarietyPointCloud, SetsError> {
        let mut points = Vec::with_capacity(cloud.len());
        let mut weights = Vec::with_capacity(cloud.len());
        for (i, (v, w)) in cloud.points.iter().zip(&cloud.weights).enumerate() {
            points.push(self.to_affine(v).ok_or(SetsError::OnPivotHyperplane(i))?);
            weights.push(v[0] * w);
        }
        Ok(VarietyPointCloud { vars: affine_vars.clone(), points, weights, residual_tol: cloud.residual_tol })
    }

    fn check(&self, cloud: &VarietyPointCloud) -> Result<(), SetsError> {
        if cloud.nvars() != self.n {
            return Err(SetsError::Dimension { index: 0, found: cloud.nvars(), expected: self.n });
        }
        Ok(())
    }
}

/// Deterministic seeds for [`sample_real_sphere`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SphereSeed {
    /// `±e_1, ±e_2, ±e_3` first, then a Fibonacci lattice with seed 0.
    Axis,
    /// Fibonacci lattice with a seeded azimuthal offset.
    Fibonacci(u64),
}

fn real_point(x: f64, y: f64, z: f64) -> Vec<Complex64> {
    let r = (x * x + y * y + z * z).sqrt();
    vec![Complex64::new(x / r, 0.0), Complex64::new(y / r, 0.0), Complex64::new(z / r, 0.0)]
}

fn fibonacci(n: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    let offset = ChaCha8Rng::seed_from_u64(seed).gen_range(0.0..2.0 * PI);
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = offset + golden * i as f64;
            real_point(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// The sphere `z1² + z2² + z3² = 1` over `z1, z2, z3`.
pub fn sphere_variety() -> (Variables, Polynomial) {
    let vars = Variables::new(&["z1", "z2", "z3"]).expect("valid names");
    let one = GaussianRational::from_int(1);
    let mut g = Polynomial::constant(&vars, -one.clone());
    for j in 0..3 {
        let mut e = ExponentVector::zero(3);
        e.0[j] = 2;
        g.add_term(e, &one);
    }
    (vars, g)
}

/// `n` quasi-uniform points on the real unit sphere with unit weight.
pub fn sample_real_sphere(n: usize, seed: SphereSeed) -> Result<VarietyPointCloud, SetsError> {
    if n < 4 {
        return Err(SetsError::TooFewPoints { min: 4, got: n });
    }
    let points = match seed {
        SphereSeed::Axis => {
            let axes = [(1.0, 0.0, 0.0), (-1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, -1.0, 0.0), (0.0, 0.0, 1.0), (0.0, 0.0, -1.0)];
            let mut pts: Vec<_> = axes.iter().take(n).map(|&(x, y, z)| real_point(x, y, z)).collect();
            pts.extend(fibonacci(n.saturating_sub(6), 0));
            pts
        }
        SphereSeed::Fibonacci(s) => fibonacci(n, s),
    };
    let (vars, g) = sphere_variety();
    let weights = vec![Complex64::new(1.0, 0.0); n];
    VarietyPointCloud::new(&vars, points, weights, &[g], 1e-12)
}

/// `n` independent uniform points on the real unit sphere.
pub fn sample_random_sphere(n: usize, seed: u64) -> Result<VarietyPointCloud, SetsError> {
    if n == 0 {
        return Err(SetsError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let z: f64 = rng.gen_range(-1.0..1.0);
            let phi: f64 = rng.gen_range(0.0..2.0 * PI);
            let r = (1.0 - z * z).sqrt();
            real_point(r * phi.cos(), r * phi.sin(), z)
        })
        .collect();
    let (vars, g) = sphere_variety();
    VarietyPointCloud::new(&vars, points, vec![Complex64::new(1.0, 0.0); n], &[g], 1e-12)
}

/// The sphere in the chart about `[0:0:1:i]`: `v1² + 1 + v3² − v0² = 0`
/// over `(v0, v1, v3)`, with `v0 = 1/z2`, `v1 = z1/z2`, `v3 = z3/z2`.
pub fn sphere_chart_variety() -> (Variables, Polynomial) {
    let (vars, g) = sphere_variety();
    let map = ChartMap::new(1, 3).expect("pivot in range");
    let cvars = map.chart_variables(&vars);
    let g = map.ideal_to_chart(&[g], &cvars).remove(0);
    (cvars, g)
}

/// The lifted circle action `ζ * (v0, v1, v3) = (ζv0, ζv1, υ3(ζv0, ζv1))` on
/// the sphere chart, with `υ3 = i·(1 − v0² + v1²)^{1/2}` on the window
/// `|v0|, |v1| ≤ r`.
#[derive(Clone, Copy, Debug)]
pub struct CircleAction {
    window: f64,
}

/// Which part of each orbit [`circled_sample`] keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitArc {
    Full,
    /// Angles in `[0, π)` only; breaks circle invariance on purpose.
    Half,
}

impl CircleAction {
    pub fn new(window: f64) -> Result<Self, SetsError> {
        if !(window > 0.0 && window < 1.0) {
            return Err(SetsError::BadWindow(window));
        }
        Ok(CircleAction { window })
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn in_window(&self, v: &[Complex64]) -> bool {
        v[0].norm() <= self.window && v[1].norm() <= self.window
    }

    /// `υ3(v0, v1)` on the branch nearest `hint`.
    pub fn lift(&self, v0: Complex64, v1: Complex64, hint: Complex64) -> Complex64 {
        let root = Complex64::i() * (1.0 - v0 * v0 + v1 * v1).sqrt();
        if (root - hint).norm() <= (-root - hint).norm() {
            root
        } else {
            -root
        }
    }

    pub fn act(&self, zeta: Complex64, v: &[Complex64]) -> Vec<Complex64> {
        let (a, b) = (zeta * v[0], zeta * v[1]);
        vec![a, b, self.lift(a, b, v[2])]
    }
}

/// Orbits of seeds `(w, r)` (affine `z1 = w`, `z2 = r > 0`) under the circle
/// action, in chart coordinates `(v0, v1, v3)` with weight `v0`.
pub fn circled_sample(
    seeds: &[(Complex64, f64)],
    n_angles: usize,
    action: &CircleAction,
    arc: OrbitArc,
) -> Result<VarietyPointCloud, SetsError> {
    if seeds.is_empty() || n_angles == 0 {
        return Err(SetsError::Empty);
    }
    let mut points = Vec::new();
    for (s, &(w, r)) in seeds.iter().enumerate() {
        if !(r > 0.0) {
            return Err(SetsError::SeedOutsideWindow(s));
        }
        let (v0, v1) = (Complex64::new(1.0 / r, 0.0), w / r);
        let start = vec![v0, v1, action.lift(v0, v1, Complex64::i())];
        if !action.in_window(&start) {
            return Err(SetsError::SeedOutsideWindow(s));
        }
        let steps = match arc {
            OrbitArc::Full => n_angles,
            OrbitArc::Half => n_angles.div_ceil(2),
        };
        let mut current = start.clone();
        for l in 0..steps {
            let zeta = Complex64::from_polar(1.0, 2.0 * PI * l as f64 / n_angles as f64);
            current = action.act(zeta, &[v0, v1, current[2]]);
            points.push(current.clone());
        }
        // Continue once around and require the branch to return to the seed's value.
        let mut probe = current;
        for l in steps..=n_angles {
            let zeta = Complex64::from_polar(1.0, 2.0 * PI * l as f64 / n_angles as f64);
            probe = action.act(zeta, &[v0, v1, probe[2]]);
        }
        if (probe[2] - start[2]).norm() > 1e-8 {
            return Err(SetsError::BranchNotClosed(s));
        }
    }
    let (vars, g) = sphere_chart_variety();
    let weights = points.iter().map(|v| v[0]).collect();
    VarietyPointCloud::new(&vars, points, weights, &[g], DEFAULT_RESIDUAL_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_polynomial;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn axis_sample_is_exact() {
        let cloud = sample_real_sphere(6, SphereSeed::Axis).unwrap();
        let (_, g) = sphere_variety();
        assert_eq!(cloud.max_residual(&[g]), 0.0);
        assert_eq!(cloud.points()[1], vec![c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn sphere_sample_reaches_the_equator() {
        let cloud = sample_real_sphere(4000, SphereSeed::Fibonacci(7)).unwrap();
        let (vars, g) = sphere_variety();
        assert!(cloud.max_residual(&[g]) <= 1e-12);
        let z1 = parse_polynomial("z1", &vars).unwrap().to_numeric();
        let norm = sup_norm(&z1, &cloud, 1);
        assert!((1.0 - norm).abs() <= 1e-3, "{norm}");
        assert_eq!(sup_norm(&parse_polynomial("1", &vars).unwrap().to_numeric(), &cloud, 3), 1.0);
    }

    #[test]
    fn off_variety_points_are_rejected() {
        let (vars, g) = sphere_variety();
        let err = VarietyPointCloud::new(&vars, vec![vec![c(1.0, 0.0), c(0.1, 0.0), c(0.0, 0.0)]], vec![c(1.0, 0.0)], &[g], 1e-9);
        assert!(matches!(err, Err(SetsError::OffVariety { index: 0, .. })));
    }

    #[test]
    fn weighted_evaluation_examples() {
        let (vars, _) = sphere_variety();
        let p = parse_polynomial("z1*z2 + 3", &vars).unwrap().to_numeric();
        let z = [c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0)];
        assert_eq!(weighted_eval(&p, &z, c(1.0, 0.0), 2), p.eval(&z));
        assert_eq!(weighted_eval(&p, &z, c(0.0, 0.0), 2), c(0.0, 0.0));
        // z2^k in the chart with pivot z2 becomes v0^k·z2^k = 1.
        let map = ChartMap::new(1, 3).unwrap();
        let cvars = map.chart_variables(&vars);
        let z2k = parse_polynomial("z2^3", &vars).unwrap();
        let image = map.polynomial_to_chart(&z2k, 3, &cvars).unwrap();
        assert_eq!(image.to_string(), "1");
    }

    #[test]
    fn chart_example_and_names() {
        let (vars, _) = sphere_variety();
        let map = ChartMap::new(1, 3).unwrap();
        assert_eq!(map.chart_variables(&vars).names(), &["v0", "v1", "v3"]);
        let cloud = VarietyPointCloud::affine(&vars, vec![vec![c(0.36, 0.0), c(0.48, 0.0), c(0.8, 0.0)]]).unwrap();
        let chart = map.change_chart(&cloud).unwrap();
        let v = &chart.points()[0];
        assert!((v[0] - c(1.0 / 0.48, 0.0)).norm() < 1e-15);
        assert!((v[1] - c(0.75, 0.0)).norm() < 1e-15);
        assert!((v[2] - c(0.8 / 0.48, 0.0)).norm() < 1e-15);
        assert!((chart.weights()[0] - c(0.48, 0.0)).norm() < 1e-15);
        let on_pivot = VarietyPointCloud::affine(&vars, vec![vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert_eq!(map.change_chart(&on_pivot).unwrap_err(), SetsError::OnPivotHyperplane(0));
        let (cv, g) = sphere_chart_variety();
        assert_eq!(cv.names(), &["v0", "v1", "v3"]);
        assert_eq!(g.to_string(), "-v0^2 + v1^2 + v3^2 + 1");
    }

    #[test]
    fn circled_orbits() {
        let action = CircleAction::new(0.7).unwrap();
        let seeds = [(c(0.3, 0.2), 2.0), (c(-0.5, 0.0), 1.6)];
        let cloud = circled_sample(&seeds, 64, &action, OrbitArc::Full).unwrap();
        assert_eq!(cloud.len(), 128);
        let (_, g) = sphere_chart_variety();
        assert!(cloud.max_residual(&[g]) <= 1e-12);
        // Rotation by one step permutes each orbit.
        let step = Complex64::from_polar(1.0, 2.0 * PI / 64.0);
        for (i, v) in cloud.points().iter().enumerate() {
            let moved = action.act(step, v);
            let target = &cloud.points()[(i / 64) * 64 + (i % 64 + 1) % 64];
            assert!(moved.iter().zip(target).all(|(a, b)| (a - b).norm() <= 1e-10));
        }
        // Back in affine coordinates the orbit keeps z1 and rotates z2.
        let map = ChartMap::new(1, 3).unwrap();
        let (vars, sphere) = sphere_variety();
        let affine = map.change_chart_back(&cloud, &vars).unwrap();
        assert!(affine.max_residual(&[sphere]) <= 1e-9);
        assert!(affine.points().iter().take(64).all(|z| (z[0] - seeds[0].0).norm() < 1e-12 && (z[1].norm() - 2.0).abs() < 1e-12));
        let single = circled_sample(&seeds[..1], 1, &action, OrbitArc::Full).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(circled_sample(&[(c(0.0, 0.0), 1.2)], 8, &action, OrbitArc::Full).unwrap_err(), SetsError::SeedOutsideWindow(0));
        assert_eq!(circled_sample(&seeds, 64, &action, OrbitArc::Half).unwrap().len(), 64);
    }

    fn point() -> impl Strategy<Value = Vec<Complex64>> {
        proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 3)
            .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
            .prop_filter("off pivot", |v: &Vec<Complex64>| v[1].norm() > 0.1)
    }

    proptest! {
        #[test]
        fn weighted_evaluation_is_multiplicative(z in point(), w in (-2.0..2.0f64, -2.0..2.0f64), k1 in 2u32..4, k2 in 2u32..4) {
            let (vars, _) = sphere_variety();
            let p = parse_polynomial("z1^2 - 2*i*z2 + 1", &vars).unwrap();
            let q = parse_polynomial("z3*z1 + 1/3", &vars).unwrap();
            let w = Complex64::new(w.0, w.1);
            let lhs = weighted_eval(&p.to_numeric(), &z, w, k1) * weighted_eval(&q.to_numeric(), &z, w, k2);
            let rhs = weighted_eval(&p.checked_mul(&q).unwrap().to_numeric(), &z, w, k1 + k2);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
        }

        #[test]
        fn chart_transport_preserves_norms(pts in proptest::collection::vec(point(), 1..6), k in 2u32..4) {
            let (vars, _) = sphere_variety();
            let weights: Vec<Complex64> = pts.iter().map(|z| z[0] + 2.0).collect();
            let cloud = VarietyPointCloud::new(&vars, pts, weights, &[], 1e-9).unwrap();
            let map = ChartMap::new(1, 3).unwrap();
            let chart = map.change_chart(&cloud).unwrap();
            let p = parse_polynomial("z1*z2 - i*z3^2 + 2", &vars).unwrap();
            let image = map.polynomial_to_chart(&p, k, chart.variables()).unwrap();
            let (a, b) = (sup_norm(&p.to_numeric(), &cloud, k), sup_norm(&image.to_numeric(), &chart, k));
            prop_assert!((a - b).abs() <= 1e-10 * a.max(1e-300));
            prop_assert!((sup_norm(&p.to_numeric(), &cloud.with_absolute_weights(), k) - a).abs() <= 1e-14 * a);
            let back = map.change_chart_back(&chart, &vars).unwrap();
            for (x, y) in back.points().iter().zip(cloud.points()) {
                for (s, t) in x.iter().zip(y) {
                    prop_assert!((s - t).norm() <= 1e-12 * (1.0 + t.norm()));
                }
            }
        }
    }
}
