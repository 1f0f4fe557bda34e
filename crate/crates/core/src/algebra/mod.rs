//! Exact arithmetic, monomial orders, sparse polynomials and the expression parser.

mod gaussian;
mod monomial;
mod parse;
mod polynomial;

pub use gaussian::{parse_rational, rat, rational_string, rational_to_f64, GaussianRational, Rational};
pub use monomial::{compare, ExponentVector, LexKey, MonomialOrder};
pub use parse::parse_polynomial;
pub use polynomial::{NumericPolynomial, Polynomial, Variables};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at byte {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("zero denominator at byte {position}")]
    ZeroDenominator { position: usize },
    #[error("exponent vectors have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("polynomials are over different variable lists")]
    VariableMismatch,
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("invalid variable name `{0}`")]
    InvalidVariable(String),
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use proptest::prelude::*;

    fn vars3() -> Variables {
        Variables::new(&["z1", "z2", "z3"]).unwrap()
    }

    fn p(s: &str) -> Polynomial {
        parse_polynomial(s, &vars3()).unwrap()
    }

    #[test]
    fn parses_sphere_polynomial() {
        let s = p("z1^2+z2^2+z3^2-1");
        assert_eq!(s.len(), 4);
        assert_eq!(s.coefficient(&ExponentVector(vec![0, 0, 0])), GaussianRational::from_int(-1));
        assert_eq!(s.coefficient(&ExponentVector(vec![2, 0, 0])), GaussianRational::from_int(1));
        assert_eq!(s.to_string(), "z1^2 + z2^2 + z3^2 - 1");
    }

    #[test]
    fn parses_zero_and_imaginary_literals() {
        assert!(p("0").is_zero());
        let q = p("(1/2)*i*z1 - i");
        assert_eq!(q.len(), 2);
        assert_eq!(
            q.coefficient(&ExponentVector(vec![1, 0, 0])),
            GaussianRational::new(rat(0, 1), rat(1, 2))
        );
        assert_eq!(q.coefficient(&ExponentVector(vec![0, 0, 0])), -GaussianRational::i());
        let at_two = [GaussianRational::from_int(2), GaussianRational::zero(), GaussianRational::zero()];
        assert!(q.eval_exact(&at_two).is_zero());
    }

    #[test]
    fn parse_errors() {
        let v = vars3();
        assert!(matches!(
            parse_polynomial("z1 + w", &v),
            Err(AlgebraError::UnknownIdentifier { position: 5, .. })
        ));
        assert!(matches!(parse_polynomial("3/0*z1", &v), Err(AlgebraError::ZeroDenominator { .. })));
        assert!(matches!(parse_polynomial("2 z1", &v), Err(AlgebraError::Syntax { .. })));
        assert!(matches!(parse_polynomial("z1^", &v), Err(AlgebraError::Syntax { .. })));
        assert!(matches!(parse_polynomial("(z1", &v), Err(AlgebraError::Syntax { .. })));
        assert!(matches!(parse_polynomial("", &v), Err(AlgebraError::Syntax { .. })));
        assert!(Variables::new(&["z1", "i"]).is_err());
        assert!(Variables::new(&["z1", "z1"]).is_err());
    }

    #[test]
    fn ring_examples() {
        let a = p("z1+z2");
        let b = p("z1-z2");
        assert_eq!(a.checked_mul(&b).unwrap(), p("z1^2 - z2^2"));
        assert!(a.checked_add(&a.neg()).unwrap().is_zero());
        let other = parse_polynomial("x", &Variables::new(&["x"]).unwrap()).unwrap();
        assert_eq!(a.checked_add(&other), Err(AlgebraError::VariableMismatch));
    }

    #[test]
    fn leading_terms() {
        let (e, c) = p("z1^2+z2^2+z3^2-1").leading_term(MonomialOrder::Grevlex).unwrap();
        assert_eq!(e, ExponentVector(vec![0, 0, 2]));
        assert_eq!(c, GaussianRational::from_int(1));
        let m = p("3*z1*z2");
        assert_eq!(m.leading_term(MonomialOrder::Grevlex).unwrap().0, ExponentVector(vec![1, 1, 0]));
        let v2 = Variables::new(&["z1", "z2"]).unwrap();
        let q = parse_polynomial("z1+z2^2", &v2).unwrap();
        assert_eq!(q.leading_term(MonomialOrder::Grevlex).unwrap().0, ExponentVector(vec![0, 2]));
        assert_eq!(Polynomial::zero(&v2).leading_term(MonomialOrder::Grevlex), Err(AlgebraError::ZeroPolynomial));
    }

    #[test]
    fn printing_covers_coefficient_shapes() {
        assert_eq!(p("-z1 + 3/2*z2 - 2").to_string(), "-z1 + 3/2*z2 - 2");
        assert_eq!(p("(1/2 - 3*i)*z1*z3^2 + i").to_string(), "(1/2 - 3*i)*z1*z3^2 + i");
        assert_eq!(p("-2*i*z2").to_string(), "-2*i*z2");
    }

    fn gaussian() -> impl Strategy<Value = GaussianRational> {
        (-9i64..10, 1i64..5, -9i64..10, 1i64..5)
            .prop_map(|(a, b, c, d)| GaussianRational::new(rat(a, b), rat(c, d)))
    }

    fn poly() -> impl Strategy<Value = Polynomial> {
        proptest::collection::vec((proptest::collection::vec(0u32..4, 3), gaussian()), 0..6).prop_map(
            |terms| Polynomial::from_terms(&vars3(), terms.into_iter().map(|(e, c)| (ExponentVector(e), c))),
        )
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(q in poly()) {
            let text = q.to_string();
            prop_assert_eq!(parse_polynomial(&text, &vars3()).unwrap(), q);
        }

        #[test]
        fn ring_axioms(a in poly(), b in poly(), c in poly()) {
            let ab_c = a.checked_mul(&b).unwrap().checked_mul(&c).unwrap();
            let a_bc = a.checked_mul(&b.checked_mul(&c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            let lhs = a.checked_mul(&b.checked_add(&c).unwrap()).unwrap();
            let rhs = a.checked_mul(&b).unwrap().checked_add(&a.checked_mul(&c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(a.checked_mul(&b).unwrap(), b.checked_mul(&a).unwrap());
        }

        #[test]
        fn exact_and_float_evaluation_agree(q in poly(), x in gaussian(), y in gaussian()) {
            let pt = [x.clone(), y.clone(), GaussianRational::from_int(1)];
            let exact = q.eval_exact(&pt).to_complex();
            let approx = q.eval(&[x.to_complex(), y.to_complex(), 1.0.into()]);
            prop_assert!((exact - approx).norm() <= 1e-9 * (1.0 + exact.norm()));
        }
    }
}
