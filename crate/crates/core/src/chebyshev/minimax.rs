//! Discrete complex minimax: minimize `max_i |a_i + Σ_j B_ij c_j|` over `c ∈ C^p`.
//!
//! The free columns are reduced to an orthonormal basis of their range, and
//! the resulting second-order cone program is solved by a primal-dual
//! interior-point method with Nesterov–Todd scaling. The dual iterate gives a
//! vector `η` with `Bᵀη = 0` (after projection), which certifies the lower
//! bound `|Σ η_i a_i| / Σ |η_i|`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MinimaxError {
    #[error("no sample points")]
    Empty,
    #[error("free column {column} has {found} entries, expected {expected}")]
    LengthMismatch { column: usize, found: usize, expected: usize },
    #[error("non-finite input value")]
    NonFinite,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimaxOptions {
    /// Target relative gap `(value − lower_bound) / value`.
    pub gap_tol: f64,
    /// Budget of Newton iterations.
    pub max_iterations: usize,
}

impl Default for MinimaxOptions {
    fn default() -> Self {
        MinimaxOptions { gap_tol: 1e-8, max_iterations: 500 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimaxSolution {
    pub coefficients: Vec<Complex64>,
    /// Attained `max_i |a_i + (Bc)_i|`.
    pub value: f64,
    /// Certified lower bound on the optimum.
    pub lower_bound: f64,
    pub iterations: usize,
    pub certified: bool,
    /// The fixed column lies in the span of the free ones (optimum zero).
    pub degenerate: bool,
}

impl MinimaxSolution {
    pub fn relative_gap(&self) -> f64 {
        if self.value > 0.0 {
            (self.value - self.lower_bound) / self.value
        } else {
            0.0
        }
    }
}

const RANK_TOL: f64 = 1e-13;
const DEGENERATE_TOL: f64 = 1e-13;

/// Solves the minimax problem for the fixed column `a` and free columns `free`.
pub fn solve_discrete_minimax(
    a: &[Complex64],
    free: &[Vec<Complex64>],
    opts: &MinimaxOptions,
) -> Result<MinimaxSolution, MinimaxError> {
    let n = a.len();
    if n == 0 {
        return Err(MinimaxError::Empty);
    }
    for (column, col) in free.iter().enumerate() {
        if col.len() != n {
            return Err(MinimaxError::LengthMismatch { column, found: col.len(), expected: n });
        }
    }
    if a.iter().chain(free.iter().flatten()).any(|z| !z.is_finite()) {
        return Err(MinimaxError::NonFinite);
    }
    let zero = Complex64::new(0.0, 0.0);
    let scale_a = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale_a == 0.0 {
        return Ok(MinimaxSolution {
            coefficients: vec![zero; free.len()],
            value: 0.0,
            lower_bound: 0.0,
            iterations: 0,
            certified: true,
            degenerate: true,
        });
    }
    let a_s: Vec<Complex64> = a.iter().map(|z| z / scale_a).collect();

    // Orthonormal basis of the column range, with the map back to coefficients.
    let norms: Vec<f64> = free.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    let live: Vec<usize> = (0..free.len()).filter(|&j| norms[j] > 0.0).collect();
    let mut q = DMatrix::<Complex64>::zeros(n, 0);
    let mut back = DMatrix::<Complex64>::zeros(live.len(), 0);
    if !live.is_empty() {
        let b = DMatrix::from_fn(n, live.len(), |i, j| free[live[j]][i] / norms[live[j]]);
        let svd = b.svd(true, true);
        let (u, v_t, sigma) = (svd.u.expect("requested"), svd.v_t.expect("requested"), svd.singular_values);
        let smax = sigma.iter().cloned().fold(0.0, f64::max);
        let rank = sigma.iter().filter(|s| **s > RANK_TOL * smax * (n.max(live.len()) as f64)).count();
        let idx: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > RANK_TOL * smax * (n.max(live.len()) as f64)).collect();
        debug_assert_eq!(idx.len(), rank);
        q = DMatrix::from_fn(n, rank, |i, j| u[(i, idx[j])]);
        // c' = V_r Σ_r^{-1} y
        back = DMatrix::from_fn(live.len(), rank, |i, j| v_t[(idx[j], i)].conj() / sigma[idx[j]]);
    }
    let r = q.ncols();
    let a_vec = DVector::from_column_slice(&a_s);
    let finish = |y: &DVector<Complex64>, value: f64, lower: f64, iterations: usize, certified: bool, degenerate: bool| {
        let c_scaled = &back * y;
        let mut coefficients = vec![zero; free.len()];
        for (slot, &j) in live.iter().enumerate() {
            coefficients[j] = c_scaled[slot] * scale_a / norms[j];
        }
        MinimaxSolution {
            coefficients,
            value: value * scale_a,
            lower_bound: lower * scale_a,
            iterations,
            certified,
            degenerate,
        }
    };
    if r == 0 {
        return Ok(finish(&DVector::zeros(0), 1.0, 1.0, 0, true, false));
    }

    // Least-squares start; a vanishing residual means the optimum is zero.
    let y_ls = -(q.adjoint() * &a_vec);
    let res_ls = &a_vec + &q * &y_ls;
    let max_ls = res_ls.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max_ls <= DEGENERATE_TOL {
        return Ok(finish(&y_ls, max_ls, 0.0, 0, true, true));
    }
    let y0 = if max_ls < 1.0 { y_ls } else { DVector::zeros(r) };
    let out = interior_point(&q, &a_vec, y0, opts);
    let certified = out.value - out.lower <= opts.gap_tol * out.value;
    Ok(finish(&out.y, out.value, out.lower.min(out.value), out.iterations, certified, false))
}

/// A point of the three-dimensional second-order cone `x0 ≥ |(x1, x2)|`.
type Cone = [f64; 3];

fn jdot(a: &Cone, b: &Cone) -> f64 {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2]
}

fn dot3(a: &Cone, b: &Cone) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Jordan product `a ∘ b`.
fn circ(a: &Cone, b: &Cone) -> Cone {
    [dot3(a, b), a[0] * b[1] + b[0] * a[1], a[0] * b[2] + b[0] * a[2]]
}

/// Solves `l ∘ u = v` for `u`.
fn circ_solve(l: &Cone, v: &Cone) -> Cone {
    let det = jdot(l, l);
    let u0 = (l[0] * v[0] - l[1] * v[1] - l[2] * v[2]) / det;
    [u0, (v[1] - u0 * l[1]) / l[0], (v[2] - u0 * l[2]) / l[0]]
}

/// Largest `α ≥ 0` with `x + α d` in the cone (`∞` if unbounded).
fn max_step(x: &Cone, d: &Cone) -> f64 {
    let qa = jdot(d, d);
    let qb = 2.0 * jdot(x, d);
    let qc = jdot(x, x).max(0.0);
    let disc = qb * qb - 4.0 * qa * qc;
    let roots: Vec<f64> = if qa.abs() <= 1e-300 {
        if qb < 0.0 { vec![-qc / qb] } else { vec![] }
    } else if disc < 0.0 {
        vec![]
    } else {
        let h = -0.5 * (qb + qb.signum() * disc.sqrt());
        let mut v = vec![h / qa];
        if h != 0.0 {
            v.push(qc / h);
        }
        v
    };
    let mut alpha = roots.into_iter().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
    if d[0] < 0.0 {
        alpha = alpha.min(-x[0] / d[0]);
    }
    alpha
}

/// Nesterov–Todd scaling `W = β(2 v vᵀ − J)` with `W z = W⁻¹ s`.
struct Scaling {
    beta: f64,
    w: Cone,
}

impl Scaling {
    fn new(s: &Cone, z: &Cone) -> Self {
        let (ns, nz) = (jdot(s, s).sqrt(), jdot(z, z).sqrt());
        let sb = s.map(|v| v / ns);
        let zb = z.map(|v| v / nz);
        let gamma = ((1.0 + dot3(&zb, &sb)) / 2.0).sqrt();
        let w = [(sb[0] + zb[0]) / (2.0 * gamma), (sb[1] - zb[1]) / (2.0 * gamma), (sb[2] - zb[2]) / (2.0 * gamma)];
        // W̄ is the square root of the reflection built from `w`.
        let norm = (2.0 * (w[0] + 1.0)).sqrt();
        let w = [(w[0] + 1.0) / norm, w[1] / norm, w[2] / norm];
        Scaling { beta: (ns / nz).sqrt(), w }
    }

    fn apply(&self, v: &Cone) -> Cone {
        let c = 2.0 * dot3(&self.w, v);
        [self.beta * (c * self.w[0] - v[0]), self.beta * (c * self.w[1] + v[1]), self.beta * (c * self.w[2] + v[2])]
    }

    fn apply_inv(&self, v: &Cone) -> Cone {
        let jw = [self.w[0], -self.w[1], -self.w[2]];
        let c = 2.0 * dot3(&jw, v);
        [(c * jw[0] - v[0]) / self.beta, (c * jw[1] + v[1]) / self.beta, (c * jw[2] + v[2]) / self.beta]
    }
}

struct InteriorOutcome {
    y: DVector<Complex64>,
    value: f64,
    lower: f64,
    iterations: usize,
}

/// Mehrotra predictor-corrector on `min t` subject to `(t, a_i + (Qy)_i)` in
/// the second-order cone for every `i`. Primal iterates stay feasible; the
/// dual iterate `(z_i0, z_i1 + i z_i2)` yields the certificate.
fn interior_point(q: &DMatrix<Complex64>, a: &DVector<Complex64>, y0: DVector<Complex64>, opts: &MinimaxOptions) -> InteriorOutcome {
    let (n, r) = (q.nrows(), q.ncols());
    let dim = 1 + 2 * r;
    // Rows of B_i: s_i = h_i + B_i x with x = (t, Re y, Im y).
    let rows: Vec<[DVector<f64>; 2]> = (0..n)
        .map(|i| {
            let mut re = DVector::zeros(dim);
            let mut im = DVector::zeros(dim);
            for j in 0..r {
                let qij = q[(i, j)];
                (re[1 + j], re[1 + r + j]) = (qij.re, -qij.im);
                (im[1 + j], im[1 + r + j]) = (qij.im, qij.re);
            }
            [re, im]
        })
        .collect();
    let b_apply = |i: usize, dx: &DVector<f64>| -> Cone { [dx[0], rows[i][0].dot(dx), rows[i][1].dot(dx)] };
    let to_y = |x: &DVector<f64>| DVector::from_fn(r, |j, _| Complex64::new(x[1 + j], x[1 + r + j]));
    let cones_of = |x: &DVector<f64>| -> Vec<Cone> {
        let res = a + q * to_y(x);
        res.iter().map(|z| [x[0], z.re, z.im]).collect()
    };

    let mut x = DVector::<f64>::zeros(dim);
    for j in 0..r {
        (x[1 + j], x[1 + r + j]) = (y0[j].re, y0[j].im);
    }
    let start = (a + q * &y0).iter().map(|z| z.norm()).fold(0.0, f64::max);
    x[0] = 1.1 * start + 1e-3;
    let mut z: Vec<Cone> = vec![[1.0 / n as f64, 0.0, 0.0]; n];
    let (mut best_x, mut best_value, mut lower) = (x.clone(), f64::INFINITY, 0.0f64);
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        let s = cones_of(&x);
        let value = s.iter().map(|c| c[1].hypot(c[2])).fold(0.0, f64::max);
        if value < best_value {
            best_value = value;
            best_x = x.clone();
        }
        let res = a + q * to_y(&x);
        let u = DVector::from_iterator(n, z.iter().map(|c| Complex64::new(c[1], c[2])));
        lower = lower.max(dual_bound(q, a, u));
        let weights: Vec<f64> = z.iter().map(|c| c[0]).collect();
        for band in [1e-4, 1e-7, 1e-10] {
            lower = lower.max(certificate(q, a, &res, &weights, |i| res[i].norm() >= value * (1.0 - band)));
        }
        if best_value - lower <= opts.gap_tol * best_value {
            break;
        }
        iterations += 1;

        let gap: f64 = s.iter().zip(&z).map(|(si, zi)| dot3(si, zi)).sum();
        let mu = gap / n as f64;
        let scalings: Vec<Scaling> = s.iter().zip(&z).map(|(si, zi)| Scaling::new(si, zi)).collect();
        let lambda: Vec<Cone> = scalings.iter().zip(&z).map(|(w, zi)| w.apply(zi)).collect();
        // r_x = c + Σ G_iᵀ z_i with G_i = −B_i and c = e_0.
        let mut r_x = DVector::<f64>::zeros(dim);
        r_x[0] = 1.0;
        for (i, zi) in z.iter().enumerate() {
            r_x[0] -= zi[0];
            r_x.axpy(-zi[1], &rows[i][0], 1.0);
            r_x.axpy(-zi[2], &rows[i][1], 1.0);
        }
        // Scaled constraint rows A_i = W_i⁻¹ B_i; the normal matrix AᵀA is
        // never formed, the QR factor keeps the conditioning of A.
        let scaled = DMatrix::<f64>::from_fn(3 * n, dim, |row, col| {
            let (i, k) = (row / 3, row % 3);
            let column = [f64::from(col == 0), rows[i][0][col], rows[i][1][col]];
            scalings[i].apply_inv(&column)[k]
        });
        let r_factor = scaled.clone().qr().r();
        if (0..dim).any(|j| !(r_factor[(j, j)].abs() > 0.0)) {
            break;
        }
        let normal_solve = |rhs: &DVector<f64>| -> DVector<f64> {
            let y = r_factor.tr_solve_upper_triangular(rhs).unwrap_or_else(|| DVector::zeros(dim));
            r_factor.solve_upper_triangular(&y).unwrap_or_else(|| DVector::zeros(dim))
        };
        let solve = |d: &[Cone]| -> (DVector<f64>, Vec<Cone>, Vec<Cone>) {
            let flat = DVector::from_iterator(3 * n, d.iter().flatten().copied());
            // Least-squares part plus one refinement step on the normal equations.
            let rhs = scaled.tr_mul(&flat) - &r_x;
            let mut dx = normal_solve(&rhs);
            let resid = &rhs - scaled.tr_mul(&(&scaled * &dx));
            dx += normal_solve(&resid);
            let adx = &scaled * &dx;
            let ds: Vec<Cone> = (0..n).map(|i| b_apply(i, &dx)).collect();
            let dz: Vec<Cone> = (0..n)
                .map(|i| scalings[i].apply_inv(&[0, 1, 2].map(|k| d[i][k] - adx[3 * i + k])))
                .collect();
            (dx, ds, dz)
        };
        let step_to_boundary = |ds: &[Cone], dz: &[Cone]| -> f64 {
            let mut alpha = f64::INFINITY;
            for i in 0..n {
                alpha = alpha.min(max_step(&s[i], &ds[i])).min(max_step(&z[i], &dz[i]));
            }
            alpha
        };

        // Predictor.
        let d_aff: Vec<Cone> = lambda.iter().map(|l| l.map(|v| -v)).collect();
        let (_, ds_a, dz_a) = solve(&d_aff);
        let alpha_a = step_to_boundary(&ds_a, &dz_a).min(1.0);
        let gap_a: f64 = (0..n)
            .map(|i| {
                let si = [0, 1, 2].map(|k| s[i][k] + alpha_a * ds_a[i][k]);
                let zi = [0, 1, 2].map(|k| z[i][k] + alpha_a * dz_a[i][k]);
                dot3(&si, &zi)
            })
            .sum();
        let sigma = (gap_a / gap).clamp(0.0, 1.0).powi(3);

        // Corrector.
        let d: Vec<Cone> = (0..n)
            .map(|i| {
                let ll = circ(&lambda[i], &lambda[i]);
                let cross = circ(&scalings[i].apply_inv(&ds_a[i]), &scalings[i].apply(&dz_a[i]));
                let rhs = [sigma * mu - ll[0] - cross[0], -ll[1] - cross[1], -ll[2] - cross[2]];
                circ_solve(&lambda[i], &rhs)
            })
            .collect();
        let (dx, ds, dz) = solve(&d);
        let alpha = (0.99 * step_to_boundary(&ds, &dz)).min(1.0);
        if !(alpha > 1e-14) || dx.iter().any(|v| !v.is_finite()) {
            break;
        }
        x.axpy(alpha, &dx, 1.0);
        for (zi, dzi) in z.iter_mut().zip(&dz) {
            for k in 0..3 {
                zi[k] += alpha * dzi[k];
            }
        }
    }
    InteriorOutcome { y: to_y(&best_x), value: best_value, lower, iterations }
}

/// `|Σ conj(u_i) a_i| / Σ |u_i|` after projecting `u` off the range of `q`.
fn dual_bound(q: &DMatrix<Complex64>, a: &DVector<Complex64>, mut u: DVector<Complex64>) -> f64 {
    let proj = q * (q.adjoint() * &u);
    u -= proj;
    let denom: f64 = u.iter().map(|z| z.norm()).sum();
    if !(denom > 0.0) {
        return 0.0;
    }
    let num: Complex64 = u.iter().zip(a.iter()).map(|(ui, ai)| ui.conj() * ai).sum();
    num.norm() / denom
}

/// Lower bound `|Σ conj(u_i) a_i| / Σ |u_i|` for a dual vector `u` supported
/// on `support`, with phases of the residuals and magnitudes near `weights`,
/// corrected to be orthogonal to the range of `q`.
fn certificate(
    q: &DMatrix<Complex64>,
    a: &DVector<Complex64>,
    res: &DVector<Complex64>,
    weights: &[f64],
    support: impl Fn(usize) -> bool,
) -> f64 {
    let idx: Vec<usize> = (0..a.len()).filter(|&i| support(i)).collect();
    if idx.is_empty() {
        return 0.0;
    }
    let r = q.ncols();
    let phase = |i: usize| if res[i].norm() > 0.0 { res[i] / res[i].norm() } else { Complex64::new(1.0, 0.0) };
    // Real constraint matrix for Qᴴ (ρ ∘ phase) = 0.
    let m = DMatrix::from_fn(2 * r, idx.len(), |row, col| {
        let i = idx[col];
        let v = q[(i, row % r)].conj() * phase(i);
        if row < r { v.re } else { v.im }
    });
    let wmax = idx.iter().map(|&i| weights[i]).fold(0.0, f64::max);
    if !(wmax > 0.0 && wmax.is_finite()) {
        return 0.0;
    }
    let rho = DVector::from_iterator(idx.len(), idx.iter().map(|&i| weights[i] / wmax));
    let svd = m.clone().svd(true, true);
    let correction = match svd.solve(&(&m * &rho), 1e-13) {
        Ok(c) => c,
        Err(_) => return 0.0,
    };
    let rho = rho - correction;
    let mut u = DVector::<Complex64>::zeros(a.len());
    for (slot, &i) in idx.iter().enumerate() {
        u[i] = phase(i) * rho[slot];
    }
    dual_bound(q, a, u)
}
