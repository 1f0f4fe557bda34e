//! Truncated power series, the implicit local graph `y = Y(x)` of a variety,
//! expansions of normal forms on that chart, trailing data and S-polynomials.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{AlgebraError, ExponentVector, GaussianRational, LexKey, Polynomial};
use crate::ideals::NormalFormAlgebra;

/// Precision cap for adaptive doubling in [`trailing`].
pub const DEFAULT_D_MAX: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("point not on variety")]
    PointNotOnVariety,
    #[error("base point must have zero x-coordinates; translate first (`{0}` is nonzero)")]
    NonzeroXCoordinate(String),
    #[error("Jacobian singular at base point")]
    JacobianSingular,
    #[error("generator `{0}` does not vanish on the chart through the truncation degree")]
    ResidualNonzero(String),
    #[error("zero polynomial has no trailing term")]
    ZeroPolynomial,
    #[error("precision exhausted at D_max = {0}")]
    PrecisionExhausted(u32),
    #[error("trailing exponents differ: {0} vs {1}")]
    TrailingMismatch(ExponentVector, ExponentVector),
}

/// Power series in `m` variables, exact through total degree `precision`.
/// Absent coefficients are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    m: usize,
    precision: u32,
    coeffs: BTreeMap<ExponentVector, GaussianRational>,
}

impl TruncatedSeries {
    pub fn zero(m: usize, precision: u32) -> Self {
        Self { m, precision, coeffs: BTreeMap::new() }
    }

    pub fn constant(m: usize, precision: u32, c: GaussianRational) -> Self {
        Self::monomial(m, precision, ExponentVector::zero(m), c)
    }

    pub fn monomial(m: usize, precision: u32, e: ExponentVector, c: GaussianRational) -> Self {
        let mut s = Self::zero(m, precision);
        s.add_term(e, &c);
        s
    }

    pub fn nvars(&self) -> usize {
        self.m
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn coefficient(&self, e: &ExponentVector) -> GaussianRational {
        self.coeffs.get(e).cloned().unwrap_or_else(GaussianRational::zero)
    }

    /// Nonzero coefficients in storage order.
    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &GaussianRational)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Adds `c·x^e` when `e` is within precision.
    pub fn add_term(&mut self, e: ExponentVector, c: &GaussianRational) {
        if c.is_zero() || e.degree() > self.precision {
            return;
        }
        match self.coeffs.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `self += c · x^shift · other`, truncated at `self`'s precision.
    pub fn add_scaled_shifted(&mut self, c: &GaussianRational, shift: &ExponentVector, other: &TruncatedSeries) {
        let room = self.precision.min(other.precision + shift.degree());
        self.precision = room;
        self.coeffs.retain(|e, _| e.degree() <= room);
        if shift.degree() > room {
            return;
        }
        for (e, d) in &other.coeffs {
            if e.degree() + shift.degree() <= room {
                self.add_term(e.add(shift), &(c * d));
            }
        }
    }

    /// Linear combination `a·self + b·other` at the common precision.
    pub fn combine(&self, a: &GaussianRational, b: &GaussianRational, other: &TruncatedSeries) -> TruncatedSeries {
        let precision = self.precision.min(other.precision);
        let mut out = TruncatedSeries::zero(self.m, precision);
        for (e, c) in &self.coeffs {
            out.add_term(e.clone(), &(a * c));
        }
        for (e, c) in &other.coeffs {
            out.add_term(e.clone(), &(b * c));
        }
        out
    }

    pub fn scale(&self, c: &GaussianRational) -> TruncatedSeries {
        self.combine(c, &GaussianRational::zero(), &TruncatedSeries::zero(self.m, self.precision))
    }

    /// Product truncated at `min(D_a, D_b)`.
    pub fn mul(&self, other: &TruncatedSeries) -> TruncatedSeries {
        let precision = self.precision.min(other.precision);
        let mut right: Vec<(&ExponentVector, &GaussianRational, u32)> =
            other.coeffs.iter().map(|(e, c)| (e, c, e.degree())).collect();
        right.sort_by_key(|t| t.2);
        let mut acc: HashMap<ExponentVector, GaussianRational> = HashMap::new();
        for (ea, ca) in &self.coeffs {
            let da = ea.degree();
            for (eb, cb, db) in &right {
                if da + db > precision {
                    break;
                }
                let prod = ca * *cb;
                let slot = acc.entry(ea.add(eb)).or_insert_with(GaussianRational::zero);
                *slot += &prod;
            }
        }
        TruncatedSeries {
            m: self.m,
            precision,
            coeffs: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    /// Terms of total degree exactly `d`.
    pub fn homogeneous_part(&self, d: u32) -> Vec<(ExponentVector, GaussianRational)> {
        self.coeffs.iter().filter(|(e, _)| e.degree() == d).map(|(e, c)| (e.clone(), c.clone())).collect()
    }

    /// Lex-lowest (last-index dominant) nonzero term, if any within precision.
    pub fn trailing_term(&self) -> Option<(ExponentVector, GaussianRational)> {
        self.coeffs
            .iter()
            .min_by(|a, b| LexKey(a.0.clone()).cmp(&LexKey(b.0.clone())))
            .map(|(e, c)| (e.clone(), c.clone()))
    }

    /// Copy with precision lowered to `d`.
    pub fn truncate(&self, d: u32) -> TruncatedSeries {
        let precision = d.min(self.precision);
        TruncatedSeries {
            m: self.m,
            precision,
            coeffs: self.coeffs.iter().filter(|(e, _)| e.degree() <= precision).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }
}

/// Trailing exponent and coefficient of a polynomial on a chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrailingData {
    pub nu: ExponentVector,
    pub tc: GaussianRational,
    /// All coefficients lex-below `nu` through `precision` are zero and `tc ≠ 0`.
    pub certified: bool,
    pub precision: u32,
}

/// Local graph `y = Y(x)` of the variety at a base point with zero x-coordinates.
#[derive(Debug)]
pub struct ImplicitChart {
    alg: Arc<NormalFormAlgebra>,
    base_point: Vec<GaussianRational>,
    precision: u32,
    y_series: Vec<TruncatedSeries>,
    powers: Mutex<HashMap<Vec<u32>, Arc<TruncatedSeries>>>,
}

impl Clone for ImplicitChart {
    fn clone(&self) -> Self {
        Self {
            alg: self.alg.clone(),
            base_point: self.base_point.clone(),
            precision: self.precision,
            y_series: self.y_series.clone(),
            powers: Mutex::new(HashMap::new()),
        }
    }
}

impl ImplicitChart {
    pub fn algebra(&self) -> &Arc<NormalFormAlgebra> {
        &self.alg
    }

    pub fn base_point(&self) -> &[GaussianRational] {
        &self.base_point
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Number of local coordinates.
    pub fn m(&self) -> usize {
        self.alg.split().m()
    }

    /// The series `Y_j(x)` for the `j`-th y-variable.
    pub fn y_series(&self) -> &[TruncatedSeries] {
        &self.y_series
    }

    /// Rebuilds the chart at a new precision.
    pub fn refined(&self, precision: u32) -> Result<ImplicitChart, SeriesError> {
        implicit_series(self.alg.clone(), &self.base_point, precision)
    }

    fn y_power(&self, b: &[u32]) -> Arc<TruncatedSeries> {
        if let Some(s) = self.powers.lock().expect("power cache").get(b) {
            return s.clone();
        }
        let m = self.m();
        let s = match b.iter().position(|e| *e > 0) {
            None => Arc::new(TruncatedSeries::constant(m, self.precision, GaussianRational::one())),
            Some(j) => {
                let mut lower = b.to_vec();
                lower[j] -= 1;
                Arc::new(self.y_power(&lower).mul(&self.y_series[j]))
            }
        };
        self.powers.lock().expect("power cache").insert(b.to_vec(), s.clone());
        s
    }
}

/// Substitutes `x` and `Y(x)` into `p` through precision `d`.
fn substitute(
    p: &Polynomial,
    split_x: &[usize],
    split_y: &[usize],
    d: u32,
    mut y_power: impl FnMut(&[u32]) -> Arc<TruncatedSeries>,
) -> TruncatedSeries {
    let m = split_x.len();
    let mut out = TruncatedSeries::zero(m, d);
    for (e, c) in p.terms() {
        let xe = ExponentVector(split_x.iter().map(|&j| e.0[j]).collect());
        if xe.degree() > d {
            continue;
        }
        let ye: Vec<u32> = split_y.iter().map(|&j| e.0[j]).collect();
        let yp = y_power(&ye);
        let mut piece = TruncatedSeries::zero(m, d);
        piece.add_scaled_shifted(c, &xe, &yp);
        for (pe, pc) in piece.coeffs {
            out.add_term(pe, &pc);
        }
    }
    out
}

/// Gauss–Jordan inverse over Gaussian rationals; `None` if singular.
fn invert(mut a: Vec<Vec<GaussianRational>>) -> Option<Vec<Vec<GaussianRational>>> {
    let n = a.len();
    let mut inv: Vec<Vec<GaussianRational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { GaussianRational::one() } else { GaussianRational::zero() }).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col].inv()?;
        for j in 0..n {
            a[col][j] = &a[col][j] * &d;
            inv[col][j] = &inv[col][j] * &d;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..n {
                    let t = &f * &a[col][j];
                    a[r][j] -= &t;
                    let t = &f * &inv[col][j];
                    inv[r][j] -= &t;
                }
            }
        }
    }
    Some(inv)
}

/// Exact rank of a small matrix.
fn rank(rows: &[Vec<GaussianRational>]) -> usize {
    let mut a = rows.to_vec();
    let ncols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(r, p);
        let d = a[r][col].inv().expect("nonzero pivot");
        for i in 0..a.len() {
            if i != r && !a[i][col].is_zero() {
                let f = &a[i][col] * &d;
                for j in col..ncols {
                    let t = &f * &a[r][j];
                    a[i][j] -= &t;
                }
            }
        }
        r += 1;
    }
    r
}

fn partial_derivative(p: &Polynomial, j: usize) -> Polynomial {
    Polynomial::from_terms(
        p.variables(),
        p.terms().filter(|(e, _)| e.0[j] > 0).map(|(e, c)| {
            let mut d = e.clone();
            d.0[j] -= 1;
            (d, c * &GaussianRational::from_int(e.0[j] as i64))
        }),
    )
}

/// Builds the implicit chart `y = Y(x)` through total degree `precision` by
/// order-by-order undetermined coefficients.
pub fn implicit_series(
    alg: Arc<NormalFormAlgebra>,
    point: &[GaussianRational],
    precision: u32,
) -> Result<ImplicitChart, SeriesError> {
    let vars = alg.variables().clone();
    if point.len() != vars.len() {
        return Err(SeriesError::PointNotOnVariety);
    }
    let equations = alg.basis().elements().to_vec();
    if equations.iter().any(|g| !g.eval_exact(point).is_zero()) {
        return Err(SeriesError::PointNotOnVariety);
    }
    let split = alg.split().clone();
    if let Some(&j) = split.x().iter().find(|&&j| !point[j].is_zero()) {
        return Err(SeriesError::NonzeroXCoordinate(vars.names()[j].clone()));
    }
    let (xs, ys) = (split.x().to_vec(), split.y().to_vec());
    let (m, r) = (xs.len(), ys.len());

    // Pick r equations whose y-Jacobian rows are independent at the point.
    let mut chosen: Vec<usize> = Vec::new();
    let mut rows: Vec<Vec<GaussianRational>> = Vec::new();
    for (gi, g) in equations.iter().enumerate() {
        if chosen.len() == r {
            break;
        }
        let row: Vec<GaussianRational> = ys.iter().map(|&j| partial_derivative(g, j).eval_exact(point)).collect();
        rows.push(row);
        if rank(&rows) == rows.len() {
            chosen.push(gi);
        } else {
            rows.pop();
        }
    }
    if chosen.len() < r {
        return Err(SeriesError::JacobianSingular);
    }
    let jinv = invert(rows).ok_or(SeriesError::JacobianSingular)?;

    let mut y_series: Vec<TruncatedSeries> =
        ys.iter().map(|&j| TruncatedSeries::constant(m, precision, point[j].clone())).collect();
    for d in 1..=precision {
        let mut cache: HashMap<Vec<u32>, Arc<TruncatedSeries>> = HashMap::new();
        let truncated: Vec<TruncatedSeries> = y_series.iter().map(|s| s.truncate(d)).collect();
        let residuals: Vec<Vec<(ExponentVector, GaussianRational)>> = chosen
            .iter()
            .map(|&gi| {
                substitute(&equations[gi], &xs, &ys, d, |b| power_of(&truncated, b, m, d, &mut cache))
                    .homogeneous_part(d)
            })
            .collect();
        let mut monos: Vec<ExponentVector> = residuals.iter().flatten().map(|(e, _)| e.clone()).collect();
        monos.sort();
        monos.dedup();
        for e in monos {
            let rhs: Vec<GaussianRational> = residuals
                .iter()
                .map(|res| res.iter().find(|(f, _)| *f == e).map_or_else(GaussianRational::zero, |(_, c)| -c))
                .collect();
            for (yj, inv_row) in jinv.iter().enumerate() {
                let mut c = GaussianRational::zero();
                for (a, b) in inv_row.iter().zip(&rhs) {
                    c += &(a * b);
                }
                y_series[yj].add_term(e.clone(), &c);
            }
        }
    }

    let chart = ImplicitChart { alg: alg.clone(), base_point: point.to_vec(), precision, y_series, powers: Mutex::new(HashMap::new()) };
    for g in &equations {
        if !expand_on_chart(g, &chart).is_zero() {
            return Err(SeriesError::ResidualNonzero(g.to_string()));
        }
    }
    Ok(chart)
}

fn power_of(
    ys: &[TruncatedSeries],
    b: &[u32],
    m: usize,
    d: u32,
    cache: &mut HashMap<Vec<u32>, Arc<TruncatedSeries>>,
) -> Arc<TruncatedSeries> {
    if let Some(s) = cache.get(b) {
        return s.clone();
    }
    let s = match b.iter().position(|e| *e > 0) {
        None => Arc::new(TruncatedSeries::constant(m, d, GaussianRational::one())),
        Some(j) => {
            let mut lower = b.to_vec();
            lower[j] -= 1;
            Arc::new(power_of(ys, &lower, m, d, cache).mul(&ys[j]))
        }
    };
    cache.insert(b.to_vec(), s.clone());
    s
}

/// Series of `p(x, Y(x))` at the chart precision.
pub fn expand_on_chart(p: &Polynomial, chart: &ImplicitChart) -> TruncatedSeries {
    let split = chart.alg.split();
    substitute(p, split.x(), split.y(), chart.precision, |b| chart.y_power(b))
}

/// Trailing data of a series, when a nonzero coefficient exists within precision.
pub fn series_trailing(s: &TruncatedSeries) -> Option<TrailingData> {
    s.trailing_term().map(|(nu, tc)| TrailingData { nu, tc, certified: true, precision: s.precision() })
}

/// Lex-lowest exponent of `p` on the chart, doubling precision up to `d_max`.
pub fn trailing(p: &Polynomial, chart: &ImplicitChart, d_max: u32) -> Result<TrailingData, SeriesError> {
    if p.is_zero() {
        return Err(SeriesError::ZeroPolynomial);
    }
    if let Some(t) = series_trailing(&expand_on_chart(p, chart)) {
        return Ok(t);
    }
    let mut d = chart.precision.max(1);
    while d < d_max {
        d = (2 * d).min(d_max);
        let finer = chart.refined(d)?;
        if let Some(t) = series_trailing(&expand_on_chart(p, &finer)) {
            return Ok(t);
        }
    }
    Err(SeriesError::PrecisionExhausted(d_max))
}

/// `S(p, q) = tc(q)·p − tc(p)·q`, reduced to normal form.
pub fn s_polynomial(p: &Polynomial, q: &Polynomial, chart: &ImplicitChart) -> Result<Polynomial, SeriesError> {
    let tp = trailing(p, chart, DEFAULT_D_MAX)?;
    let tq = trailing(q, chart, DEFAULT_D_MAX)?;
    if tp.nu != tq.nu {
        return Err(SeriesError::TrailingMismatch(tp.nu, tq.nu));
    }
    let s = p.scale(&tq.tc).checked_sub(&q.scale(&tp.tc))?;
    Ok(chart.alg.normal_form(&s))
}
