use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use super::{AlgebraError, ExponentVector, GaussianRational, MonomialOrder};

/// An ordered, validated list of variable names shared by polynomials.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Variables(Arc<[String]>);

impl Variables {
    /// Names must be identifiers, distinct, and must not be the reserved `i`.
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self, AlgebraError> {
        let mut seen = std::collections::HashSet::new();
        for n in names {
            let n = n.as_ref();
            let valid = n.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid || n == "i" {
                return Err(AlgebraError::InvalidVariable(n.to_string()));
            }
            if !seen.insert(n) {
                return Err(AlgebraError::DuplicateVariable(n.to_string()));
            }
        }
        Ok(Self(names.iter().map(|n| n.as_ref().to_string()).collect()))
    }

    /// `z1, …, zn`.
    pub fn standard(n: usize) -> Self {
        Self((1..=n).map(|j| format!("z{j}")).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }
}

/// Sparse multivariate polynomial with exact Gaussian-rational coefficients.
/// No zero coefficient is ever stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    vars: Variables,
    terms: BTreeMap<ExponentVector, GaussianRational>,
}

impl Polynomial {
    pub fn zero(vars: &Variables) -> Self {
        Self { vars: vars.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(vars: &Variables, c: GaussianRational) -> Self {
        Self::monomial(vars, ExponentVector::zero(vars.len()), c)
    }

    pub fn one(vars: &Variables) -> Self {
        Self::constant(vars, GaussianRational::one())
    }

    pub fn monomial(vars: &Variables, exp: ExponentVector, c: GaussianRational) -> Self {
        assert_eq!(exp.len(), vars.len(), "exponent length must match variable count");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        Self { vars: vars.clone(), terms }
    }

    /// The `j`-th variable as a polynomial.
    pub fn variable(vars: &Variables, j: usize) -> Self {
        Self::monomial(vars, ExponentVector::unit(vars.len(), j), GaussianRational::one())
    }

    /// Sums the given terms, merging repeated exponents and dropping zeros.
    pub fn from_terms<I>(vars: &Variables, terms: I) -> Self
    where
        I: IntoIterator<Item = (ExponentVector, GaussianRational)>,
    {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), vars.len(), "exponent length must match variable count");
            p.add_term(e, &c);
        }
        p
    }

    pub fn variables(&self) -> &Variables {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    /// Terms in storage order (first-index lexicographic).
    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &ExponentVector) -> GaussianRational {
        self.terms.get(e).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(ExponentVector::degree).max()
    }

    /// Adds `c·x^e` in place.
    pub fn add_term(&mut self, e: ExponentVector, c: &GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
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

    /// `self += c · x^shift · other`, the workhorse of division.
    pub(crate) fn add_scaled_shifted(
        &mut self,
        c: &GaussianRational,
        shift: &ExponentVector,
        other: &Polynomial,
    ) {
        for (e, d) in &other.terms {
            self.add_term(e.add(shift), &(c * d));
        }
    }

    fn check(&self, other: &Polynomial) -> Result<(), AlgebraError> {
        if self.vars != other.vars {
            return Err(AlgebraError::VariableMismatch);
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial, AlgebraError> {
        self.check(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial, AlgebraError> {
        self.check(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), &-c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial, AlgebraError> {
        self.check(other)?;
        let mut out = Polynomial::zero(&self.vars);
        for (e, c) in &self.terms {
            out.add_scaled_shifted(c, e, other);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &GaussianRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(&self.vars);
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, d)| (e.clone(), c * d)).collect(),
        }
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(&-GaussianRational::one())
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::one(&self.vars);
        for _ in 0..e {
            acc = acc.checked_mul(self).expect("same variables");
        }
        acc
    }

    /// Maximal term under `order`.
    pub fn leading_term(
        &self,
        order: MonomialOrder,
    ) -> Result<(ExponentVector, GaussianRational), AlgebraError> {
        self.terms
            .iter()
            .max_by(|a, b| order.cmp(a.0, b.0))
            .map(|(e, c)| (e.clone(), c.clone()))
            .ok_or(AlgebraError::ZeroPolynomial)
    }

    /// Terms sorted descending under `order`.
    pub fn sorted_terms(&self, order: MonomialOrder) -> Vec<(&ExponentVector, &GaussianRational)> {
        let mut t: Vec<_> = self.terms.iter().collect();
        t.sort_by(|a, b| order.cmp(b.0, a.0));
        t
    }

    /// Exact evaluation at a Gaussian-rational point.
    pub fn eval_exact(&self, point: &[GaussianRational]) -> GaussianRational {
        assert_eq!(point.len(), self.nvars());
        let mut acc = GaussianRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, k) in point.iter().zip(&e.0) {
                if *k > 0 {
                    t = &t * &x.pow(*k);
                }
            }
            acc += &t;
        }
        acc
    }

    /// Double-precision evaluation.
    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        self.to_numeric().eval(point)
    }

    pub fn to_numeric(&self) -> NumericPolynomial {
        NumericPolynomial {
            terms: self.terms.iter().map(|(e, c)| (e.0.clone(), c.to_complex())).collect(),
        }
    }

    /// Substitutes `x_j ↦ images[j]` (polynomials over a common variable list).
    pub fn compose(&self, images: &[Polynomial], target: &Variables) -> Polynomial {
        assert_eq!(images.len(), self.nvars());
        let mut out = Polynomial::zero(target);
        for (e, c) in &self.terms {
            let mut t = Polynomial::constant(target, c.clone());
            for (img, k) in images.iter().zip(&e.0) {
                if *k > 0 {
                    t = t.checked_mul(&img.pow(*k)).expect("target variables");
                }
            }
            out = out.checked_add(&t).expect("target variables");
        }
        out
    }

    /// Reinterprets the polynomial over a renamed variable list of equal length.
    pub fn with_variables(&self, vars: &Variables) -> Polynomial {
        assert_eq!(vars.len(), self.nvars());
        Polynomial { vars: vars.clone(), terms: self.terms.clone() }
    }

    fn monomial_string(&self, e: &ExponentVector) -> String {
        let parts: Vec<String> = e
            .0
            .iter()
            .zip(self.vars.names())
            .filter(|(k, _)| **k > 0)
            .map(|(k, n)| if *k == 1 { n.clone() } else { format!("{n}^{k}") })
            .collect();
        parts.join("*")
    }
}

/// A polynomial with double-precision coefficients, for fast evaluation.
#[derive(Clone, Debug)]
pub struct NumericPolynomial {
    terms: Vec<(Vec<u32>, Complex64)>,
}

impl NumericPolynomial {
    pub fn new(terms: Vec<(Vec<u32>, Complex64)>) -> Self {
        NumericPolynomial { terms }
    }

    pub fn monomial(exponents: Vec<u32>) -> Self {
        NumericPolynomial { terms: vec![(exponents, Complex64::new(1.0, 0.0))] }
    }

    pub fn terms(&self) -> &[(Vec<u32>, Complex64)] {
        &self.terms
    }

    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(point)
                    .filter(|(k, _)| **k > 0)
                    .fold(*c, |acc, (k, x)| acc * x.powu(*k))
            })
            .sum()
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(e, _)| e.iter().sum()).max().unwrap_or(0)
    }
}

impl fmt::Display for Polynomial {
    /// Canonical form: terms by descending degree, then descending textbook
    /// lex, with coefficients in grammar syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| b.0.degree().cmp(&a.0.degree()).then_with(|| b.0.cmp(a.0)));
        for (idx, (e, c)) in terms.into_iter().enumerate() {
            let negative = (c.is_real() && c.re.is_negative())
                || (c.is_imaginary() && c.im.is_negative());
            let c = if negative { -c } else { c.clone() };
            match (idx, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mono = self.monomial_string(e);
            if mono.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{c}*{mono}")?;
            }
        }
        Ok(())
    }
}
