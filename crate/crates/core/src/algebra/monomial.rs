use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::AlgebraError;

/// Multi-index of a monomial. The derived `Ord` is plain first-index
/// lexicographic and serves only as a deterministic storage order; use
/// [`MonomialOrder`] for mathematical comparisons.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExponentVector(pub Vec<u32>);

impl ExponentVector {
    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// The exponent of the `j`-th variable alone.
    pub fn unit(n: usize, j: usize) -> Self {
        let mut e = vec![0; n];
        e[j] = 1;
        Self(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// True when `self` divides `other` (componentwise ≤).
    pub fn divides(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other - self`, assuming `self` divides `other`.
    pub fn quotient_of(&self, other: &Self) -> Self {
        Self(other.0.iter().zip(&self.0).map(|(b, a)| b - a).collect())
    }

    pub fn lcm(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn is_coprime(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// Index of the only nonzero exponent, if the monomial is a pure power.
    pub fn pure_power_index(&self) -> Option<usize> {
        let mut nz = self.0.iter().enumerate().filter(|(_, e)| **e > 0);
        match (nz.next(), nz.next()) {
            (Some((j, _)), None) => Some(j),
            _ => None,
        }
    }

    /// All exponent vectors in `n` variables of total degree exactly `d`.
    pub fn all_of_degree(n: usize, d: u32) -> Vec<ExponentVector> {
        fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<ExponentVector>) {
            if prefix.len() + 1 == n {
                prefix.push(d);
                out.push(ExponentVector(prefix.clone()));
                prefix.pop();
                return;
            }
            for e in (0..=d).rev() {
                prefix.push(e);
                rec(n, d - e, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n == 0 {
            if d == 0 {
                out.push(ExponentVector(Vec::new()));
            }
            return out;
        }
        rec(n, d, &mut Vec::with_capacity(n), &mut out);
        out
    }

    /// All exponent vectors of total degree at most `k`, sorted by `order`.
    pub fn up_to_degree(n: usize, k: u32, order: MonomialOrder) -> Vec<ExponentVector> {
        let mut all: Vec<_> = (0..=k).flat_map(|d| Self::all_of_degree(n, d)).collect();
        all.sort_by(|a, b| order.cmp(a, b));
        all
    }
}

impl From<Vec<u32>> for ExponentVector {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, e) in self.0.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Total orders on monomials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MonomialOrder {
    /// Compares at the largest index where the exponents differ.
    LexLastDominant,
    /// Total degree first, then `LexLastDominant`.
    Grevlex,
    /// Textbook lex: compares at the smallest differing index.
    LexFirstDominant,
}

impl MonomialOrder {
    /// Infallible comparison; vectors must have equal length.
    pub fn cmp(self, a: &ExponentVector, b: &ExponentVector) -> Ordering {
        debug_assert_eq!(a.len(), b.len());
        match self {
            MonomialOrder::LexLastDominant => lex_last(a, b),
            MonomialOrder::Grevlex => a.degree().cmp(&b.degree()).then_with(|| lex_last(a, b)),
            MonomialOrder::LexFirstDominant => a.0.cmp(&b.0),
        }
    }
}

fn lex_last(a: &ExponentVector, b: &ExponentVector) -> Ordering {
    a.0.iter()
        .zip(&b.0)
        .rev()
        .map(|(x, y)| x.cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Checked comparison of two exponent vectors under `order`.
pub fn compare(
    order: MonomialOrder,
    a: &ExponentVector,
    b: &ExponentVector,
) -> Result<Ordering, AlgebraError> {
    if a.len() != b.len() {
        return Err(AlgebraError::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(order.cmp(a, b))
}

/// Wrapper ordering exponent vectors by `LexLastDominant`, for use as map keys.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LexKey(pub ExponentVector);

impl PartialOrd for LexKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LexKey {
    fn cmp(&self, other: &Self) -> Ordering {
        lex_last(&self.0, &other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(v: &[u32]) -> ExponentVector {
        ExponentVector(v.to_vec())
    }

    #[test]
    fn worked_comparisons() {
        let lex = MonomialOrder::LexLastDominant;
        assert_eq!(compare(lex, &ev(&[1, 0, 0]), &ev(&[0, 1, 0])).unwrap(), Ordering::Less);
        assert_eq!(
            compare(MonomialOrder::Grevlex, &ev(&[0, 2, 0]), &ev(&[0, 0, 2])).unwrap(),
            Ordering::Less
        );
        assert_eq!(compare(lex, &ev(&[2, 0]), &ev(&[2, 0])).unwrap(), Ordering::Equal);
        assert!(compare(lex, &ev(&[1]), &ev(&[1, 0])).is_err());
        assert_eq!(
            MonomialOrder::LexFirstDominant.cmp(&ev(&[1, 0, 0]), &ev(&[0, 1, 0])),
            Ordering::Greater
        );
    }

    #[test]
    fn degree_enumeration_counts() {
        assert_eq!(ExponentVector::all_of_degree(3, 2).len(), 6);
        assert_eq!(ExponentVector::up_to_degree(2, 3, MonomialOrder::Grevlex).len(), 10);
        assert_eq!(ExponentVector::all_of_degree(0, 0).len(), 1);
        let sorted = ExponentVector::up_to_degree(2, 2, MonomialOrder::Grevlex);
        assert_eq!(sorted[0], ev(&[0, 0]));
        assert_eq!(sorted[5], ev(&[0, 2]));
    }

    fn vec3() -> impl Strategy<Value = ExponentVector> {
        proptest::collection::vec(0u32..6, 3).prop_map(ExponentVector)
    }

    proptest! {
        #[test]
        fn orders_are_multiplicative(a in vec3(), b in vec3(), c in vec3()) {
            for order in [MonomialOrder::LexLastDominant, MonomialOrder::Grevlex, MonomialOrder::LexFirstDominant] {
                prop_assert_eq!(order.cmp(&a, &b), order.cmp(&a.add(&c), &b.add(&c)));
            }
        }

        #[test]
        fn grevlex_agrees_with_lex_at_equal_degree(a in vec3(), b in vec3()) {
            if a.degree() == b.degree() {
                prop_assert_eq!(
                    MonomialOrder::Grevlex.cmp(&a, &b),
                    MonomialOrder::LexLastDominant.cmp(&a, &b)
                );
            }
        }

        #[test]
        fn orders_are_antisymmetric(a in vec3(), b in vec3()) {
            let o = MonomialOrder::Grevlex;
            prop_assert_eq!(o.cmp(&a, &b), o.cmp(&b, &a).reverse());
            prop_assert_eq!(o.cmp(&a, &b) == Ordering::Equal, a == b);
        }
    }
}
