//! Ready-made charts for the unit sphere and the zero ideal.

use std::sync::Arc;

use num_traits::Zero;

use crate::algebra::{GaussianRational, Variables};
use crate::ideals::{Ideal, NoetherSplit, NormalFormAlgebra};
use crate::series::{implicit_series, ImplicitChart, SeriesError};
use crate::sets::{sphere_chart_variety, sphere_variety};

/// `z1² + z2² + z3² = 1` about `(0, 0, 1)` with `x = (z1, z2)`, `y = z3`.
pub fn sphere_chart(precision: u32) -> Result<ImplicitChart, SeriesError> {
    let (vars, g) = sphere_variety();
    let alg = NormalFormAlgebra::new(
        Ideal::new(&vars, vec![g]).expect("sphere generator"),
        NoetherSplit::new(vec![0, 1], vec![2], 3).expect("split"),
    )
    .expect("sphere algebra");
    let one = GaussianRational::from_int(1);
    let zero = GaussianRational::zero();
    implicit_series(Arc::new(alg), &[zero.clone(), zero, one], precision)
}

/// The sphere in the chart `(v0, v1, v3)` about `(0, 0, i)` with
/// `x = (v0, v1)`, `y = v3`.
pub fn sphere_circle_chart(precision: u32) -> Result<ImplicitChart, SeriesError> {
    let (vars, g) = sphere_chart_variety();
    let alg = NormalFormAlgebra::new(
        Ideal::new(&vars, vec![g]).expect("chart generator"),
        NoetherSplit::new(vec![0, 1], vec![2], 3).expect("split"),
    )
    .expect("chart algebra");
    let zero = GaussianRational::zero();
    implicit_series(Arc::new(alg), &[zero.clone(), zero, GaussianRational::i()], precision)
}

/// `C^m` with the zero ideal, about the origin.
pub fn plane_chart(m: usize, precision: u32) -> Result<ImplicitChart, SeriesError> {
    let vars = Variables::standard(m);
    let alg = NormalFormAlgebra::new(Ideal::zero(&vars), NoetherSplit::new((0..m).collect(), vec![], m).expect("split"))
        .expect("plane algebra");
    implicit_series(Arc::new(alg), &vec![GaussianRational::zero(); m], precision)
}
