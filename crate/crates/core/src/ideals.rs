//! Groebner bases under grevlex, normal forms in the coordinate ring, standard
//! monomials and the Noether-split check.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{AlgebraError, ExponentVector, GaussianRational, LexKey, MonomialOrder, Polynomial, Variables};

/// Default cap on S-pair reductions in [`buchberger`].
pub const DEFAULT_PAIR_BUDGET: usize = 20_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IdealError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("Groebner basis budget of {budget} pair reductions exceeded ({partial} elements so far)")]
    BudgetExceeded { budget: usize, partial: usize },
    #[error("split not verified: no pure-power leading monomial for {0:?}")]
    SplitNotVerified(Vec<String>),
    #[error("invalid Noether split: {0}")]
    InvalidSplit(String),
}

/// An ideal given by generators over a shared variable list. Zero generators
/// are dropped, so an empty list denotes the zero ideal.
#[derive(Clone, Debug)]
pub struct Ideal {
    vars: Variables,
    generators: Vec<Polynomial>,
}

impl Ideal {
    pub fn new(vars: &Variables, generators: Vec<Polynomial>) -> Result<Self, IdealError> {
        if generators.iter().any(|g| g.variables() != vars) {
            return Err(AlgebraError::VariableMismatch.into());
        }
        let generators = generators.into_iter().filter(|g| !g.is_zero()).collect();
        Ok(Self { vars: vars.clone(), generators })
    }

    pub fn zero(vars: &Variables) -> Self {
        Self { vars: vars.clone(), generators: Vec::new() }
    }

    pub fn variables(&self) -> &Variables {
        &self.vars
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.generators
    }
}

/// Orders exponent vectors by grevlex so a `BTreeMap` pops leading terms.
#[derive(Clone, PartialEq, Eq)]
struct GrevlexKey(ExponentVector);

impl PartialOrd for GrevlexKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GrevlexKey {
    fn cmp(&self, other: &Self) -> Ordering {
        MonomialOrder::Grevlex.cmp(&self.0, &other.0)
    }
}

/// Reduced Groebner basis under grevlex; elements monic, sorted by ascending
/// leading monomial.
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    vars: Variables,
    elements: Vec<Polynomial>,
    leading: Vec<ExponentVector>,
}

impl GroebnerBasis {
    pub fn variables(&self) -> &Variables {
        &self.vars
    }

    pub fn elements(&self) -> &[Polynomial] {
        &self.elements
    }

    pub fn leading_monomials(&self) -> &[ExponentVector] {
        &self.leading
    }

    pub fn order(&self) -> MonomialOrder {
        MonomialOrder::Grevlex
    }

    /// Remainder of full division of `p` by the basis.
    pub fn reduce(&self, p: &Polynomial) -> Polynomial {
        reduce_by(p, &self.elements, &self.leading)
    }

    /// True when `e` lies in the leading-monomial ideal.
    pub fn is_leading_multiple(&self, e: &ExponentVector) -> bool {
        self.leading.iter().any(|l| l.divides(e))
    }
}

fn reduce_by(p: &Polynomial, basis: &[Polynomial], leading: &[ExponentVector]) -> Polynomial {
    let vars = p.variables().clone();
    let lead_coeffs: Vec<GaussianRational> =
        basis.iter().zip(leading).map(|(g, l)| g.coefficient(l)).collect();
    let mut work: BTreeMap<GrevlexKey, GaussianRational> =
        p.terms().map(|(e, c)| (GrevlexKey(e.clone()), c.clone())).collect();
    let mut remainder = Vec::new();
    while let Some((GrevlexKey(lm), lc)) = work.pop_last() {
        match leading.iter().position(|l| l.divides(&lm)) {
            Some(j) => {
                let shift = leading[j].quotient_of(&lm);
                let factor = &lc / &lead_coeffs[j];
                for (e, c) in basis[j].terms() {
                    if *e == leading[j] {
                        continue;
                    }
                    let key = GrevlexKey(e.add(&shift));
                    let delta = -(&factor * c);
                    match work.get_mut(&key) {
                        Some(v) => {
                            *v += &delta;
                            if v.is_zero() {
                                work.remove(&key);
                            }
                        }
                        None => {
                            work.insert(key, delta);
                        }
                    }
                }
            }
            None => remainder.push((lm, lc)),
        }
    }
    Polynomial::from_terms(&vars, remainder)
}

fn monic(p: &Polynomial) -> (Polynomial, ExponentVector) {
    let (lm, lc) = p.leading_term(MonomialOrder::Grevlex).expect("nonzero");
    (p.scale(&lc.inv().expect("nonzero")), lm)
}

fn s_pair(f: &Polynomial, lf: &ExponentVector, g: &Polynomial, lg: &ExponentVector) -> Polynomial {
    let lcm = lf.lcm(lg);
    let mut s = Polynomial::zero(f.variables());
    s.add_scaled_shifted(&GaussianRational::one(), &lf.quotient_of(&lcm), f);
    s.add_scaled_shifted(&-GaussianRational::one(), &lg.quotient_of(&lcm), g);
    s
}

/// Pair selection key: lcm degree, then lex of the lcm, then indices.
type PairKey = (u32, LexKey, usize, usize);

fn pair_key(leading: &[ExponentVector], i: usize, j: usize) -> PairKey {
    let lcm = leading[i].lcm(&leading[j]);
    (lcm.degree(), LexKey(lcm), i, j)
}

/// Buchberger's algorithm with the normal selection strategy and the
/// coprime-leading-monomial criterion, followed by full interreduction.
pub fn buchberger(ideal: &Ideal, budget: usize) -> Result<GroebnerBasis, IdealError> {
    let mut basis: Vec<Polynomial> = Vec::new();
    let mut leading: Vec<ExponentVector> = Vec::new();
    for g in ideal.generators() {
        let (g, l) = monic(g);
        basis.push(g);
        leading.push(l);
    }
    let mut pairs: BTreeSet<PairKey> = BTreeSet::new();
    for j in 0..basis.len() {
        for i in 0..j {
            pairs.insert(pair_key(&leading, i, j));
        }
    }
    let mut reductions = 0;
    while let Some((_, _, i, j)) = pairs.pop_first() {
        if leading[i].is_coprime(&leading[j]) {
            continue;
        }
        reductions += 1;
        if reductions > budget {
            return Err(IdealError::BudgetExceeded { budget, partial: basis.len() });
        }
        let s = s_pair(&basis[i], &leading[i], &basis[j], &leading[j]);
        let r = reduce_by(&s, &basis, &leading);
        if r.is_zero() {
            continue;
        }
        let (r, l) = monic(&r);
        basis.push(r);
        leading.push(l);
        let new = basis.len() - 1;
        for i in 0..new {
            pairs.insert(pair_key(&leading, i, new));
        }
    }
    Ok(interreduce(ideal.variables(), basis, leading))
}

fn interreduce(vars: &Variables, basis: Vec<Polynomial>, leading: Vec<ExponentVector>) -> GroebnerBasis {
    // Keep one element per minimal leading monomial (earliest wins on ties).
    let keep: Vec<usize> = (0..basis.len())
        .filter(|&i| {
            !(0..basis.len()).any(|j| {
                j != i && leading[j].divides(&leading[i]) && (leading[j] != leading[i] || j < i)
            })
        })
        .collect();
    let mut elems: Vec<Polynomial> = keep.iter().map(|&i| basis[i].clone()).collect();
    let lms: Vec<ExponentVector> = keep.iter().map(|&i| leading[i].clone()).collect();
    for idx in 0..elems.len() {
        let others: Vec<Polynomial> =
            elems.iter().enumerate().filter(|(j, _)| *j != idx).map(|(_, p)| p.clone()).collect();
        let other_lms: Vec<ExponentVector> =
            lms.iter().enumerate().filter(|(j, _)| *j != idx).map(|(_, l)| l.clone()).collect();
        let lm = lms[idx].clone();
        let mut tail = elems[idx].clone();
        tail.add_term(lm.clone(), &-GaussianRational::one());
        let mut reduced = reduce_by(&tail, &others, &other_lms);
        reduced.add_term(lm, &GaussianRational::one());
        elems[idx] = reduced;
    }
    let mut order: Vec<usize> = (0..elems.len()).collect();
    order.sort_by(|&a, &b| MonomialOrder::Grevlex.cmp(&lms[a], &lms[b]));
    let elements = order.iter().map(|&i| elems[i].clone()).collect();
    let leading_sorted = order.iter().map(|&i| lms[i].clone()).collect();
    GroebnerBasis { vars: vars.clone(), elements, leading: leading_sorted }
}

/// Partition of the variables into local coordinates `x` and the rest `y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoetherSplit {
    x: Vec<usize>,
    y: Vec<usize>,
}

impl NoetherSplit {
    pub fn new(x: Vec<usize>, y: Vec<usize>, nvars: usize) -> Result<Self, IdealError> {
        let mut seen = vec![false; nvars];
        for &j in x.iter().chain(&y) {
            if j >= nvars || seen[j] {
                return Err(IdealError::InvalidSplit(format!("index {j} repeated or out of range")));
            }
            seen[j] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(IdealError::InvalidSplit("split must cover every variable".into()));
        }
        Ok(Self { x, y })
    }

    /// Builds a split from variable names.
    pub fn from_names<S: AsRef<str>>(vars: &Variables, x: &[S], y: &[S]) -> Result<Self, IdealError> {
        let idx = |names: &[S]| -> Result<Vec<usize>, IdealError> {
            names
                .iter()
                .map(|n| {
                    vars.index_of(n.as_ref())
                        .ok_or_else(|| IdealError::InvalidSplit(format!("unknown variable `{}`", n.as_ref())))
                })
                .collect()
        };
        Self::new(idx(x)?, idx(y)?, vars.len())
    }

    pub fn x(&self) -> &[usize] {
        &self.x
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    /// Dimension of the chart (number of x-variables).
    pub fn m(&self) -> usize {
        self.x.len()
    }
}

/// Monomials of degree ≤ k outside the leading-monomial ideal, in ascending grevlex.
#[derive(Clone, Debug)]
pub struct StandardMonomialSet {
    pub k: u32,
    pub monomials: Vec<ExponentVector>,
}

impl StandardMonomialSet {
    /// `M_k = dim C[V]_{≤k}`.
    pub fn count(&self) -> usize {
        self.monomials.len()
    }
}

/// Outcome of a successful Noether-split check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoetherDiagnostic {
    /// For each y-variable, the smallest pure power among the leading monomials.
    pub pure_powers: Vec<(String, u32)>,
    /// True when no leading monomial involves only x-variables, i.e. every
    /// x-monomial is a normal form.
    pub x_monomials_standard: bool,
}

/// The coordinate ring `C[V] = C[z]/I` realised by grevlex normal forms.
#[derive(Clone, Debug)]
pub struct NormalFormAlgebra {
    ideal: Ideal,
    basis: GroebnerBasis,
    split: NoetherSplit,
}

impl NormalFormAlgebra {
    pub fn new(ideal: Ideal, split: NoetherSplit) -> Result<Self, IdealError> {
        if split.x.len() + split.y.len() != ideal.variables().len() {
            return Err(IdealError::InvalidSplit("split size differs from variable count".into()));
        }
        let basis = buchberger(&ideal, DEFAULT_PAIR_BUDGET)?;
        Ok(Self { ideal, basis, split })
    }

    pub fn variables(&self) -> &Variables {
        self.ideal.variables()
    }

    pub fn ideal(&self) -> &Ideal {
        &self.ideal
    }

    pub fn basis(&self) -> &GroebnerBasis {
        &self.basis
    }

    pub fn split(&self) -> &NoetherSplit {
        &self.split
    }

    pub fn normal_form(&self, p: &Polynomial) -> Polynomial {
        self.basis.reduce(p)
    }

    /// Normal form of the product of two normal forms.
    pub fn nf_multiply(&self, p: &Polynomial, q: &Polynomial) -> Result<Polynomial, IdealError> {
        Ok(self.normal_form(&p.checked_mul(q)?))
    }

    pub fn is_normal_form(&self, p: &Polynomial) -> bool {
        p.terms().all(|(e, _)| !self.basis.is_leading_multiple(e))
    }

    pub fn standard_monomials(&self, k: u32) -> StandardMonomialSet {
        let n = self.variables().len();
        let monomials = ExponentVector::up_to_degree(n, k, MonomialOrder::Grevlex)
            .into_iter()
            .filter(|e| !self.basis.is_leading_multiple(e))
            .collect();
        StandardMonomialSet { k, monomials }
    }

    /// `h_s` = number of standard monomials of degree exactly `s`, for `s = 0..=k`.
    pub fn degree_counts(&self, k: u32) -> Vec<usize> {
        let n = self.variables().len();
        (0..=k)
            .map(|d| {
                ExponentVector::all_of_degree(n, d)
                    .iter()
                    .filter(|e| !self.basis.is_leading_multiple(e))
                    .count()
            })
            .collect()
    }

    /// Succeeds iff every y-variable has a pure power among the leading monomials.
    pub fn check_noether_split(&self) -> Result<NoetherDiagnostic, IdealError> {
        let names = self.variables().names();
        let mut pure_powers = Vec::new();
        let mut missing = Vec::new();
        for &j in &self.split.y {
            let best = self
                .basis
                .leading
                .iter()
                .filter(|l| l.pure_power_index() == Some(j))
                .map(|l| l.0[j])
                .min();
            match best {
                Some(e) => pure_powers.push((names[j].clone(), e)),
                None => missing.push(names[j].clone()),
            }
        }
        if !missing.is_empty() {
            return Err(IdealError::SplitNotVerified(missing));
        }
        let x_monomials_standard = !self
            .basis
            .leading
            .iter()
            .any(|l| self.split.y.iter().all(|&j| l.0[j] == 0));
        Ok(NoetherDiagnostic { pure_powers, x_monomials_standard })
    }
}
