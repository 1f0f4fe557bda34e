//! Acceptance criteria 1-12. Each test writes one `criterion N: PASS|FAIL`
//! line straight to stderr (visible without `--nocapture`) before asserting.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varcap::algebra::{rat, ExponentVector, Rational, Variables};
use varcap::chebyshev::{chebyshev_constant, MinimaxOptions, NumericBasis};
use varcap::diameter::{
    circled_equality, fekete_search, homogeneous_identity, integral_formula_compare, limit_ratio, projection_invariance,
    zero_ideal_dims, FeketeConfig, FeketeStrategy, Normalization,
};
use varcap::fixtures::{plane_chart, sphere_chart, sphere_circle_chart};
use varcap::okounkov::{lattice_check, okounkov_body};
use varcap::series::DEFAULT_D_MAX;
use varcap::sets::{circled_sample, sample_random_sphere, CircleAction, OrbitArc, VarietyPointCloud};

fn report(n: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n:>2}: {verdict}  {detail}");
    assert!(pass, "criterion {n} failed: {detail}");
}

fn points(v: &[ExponentVector]) -> BTreeSet<Vec<u32>> {
    v.iter().map(|e| e.0.clone()).collect()
}

fn q(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| rat(x, 1)).collect()
}

fn vertex_set(v: &[Vec<Rational>]) -> BTreeSet<Vec<Rational>> {
    v.iter().cloned().collect()
}

#[test]
fn criterion_01_sphere_nu_sets() {
    let start = Instant::now();
    let body = okounkov_body(&sphere_chart(16).unwrap(), 6, DEFAULT_D_MAX).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let n1 = points(&body.stage(1).unwrap().nu_set.points());
    let expected: BTreeSet<Vec<u32>> = [vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0]].into();
    let counts: Vec<usize> = (1..=6).map(|k| body.stage(k).unwrap().nu_set.len()).collect();
    let squares = (1..=6).all(|k| counts[k - 1] == (k + 1) * (k + 1));
    report(1, n1 == expected && squares && elapsed < 10.0, &format!("|N_k| = {counts:?}, {elapsed:.2} s"));
}

#[test]
fn criterion_02_sphere_body_stabilizes() {
    let body = okounkov_body(&sphere_chart(16).unwrap(), 6, DEFAULT_D_MAX).unwrap();
    let triangle = vertex_set(&[q(&[0, 0]), q(&[2, 0]), q(&[0, 1])]);
    let stable = (4..=6).all(|k| vertex_set(body.stage(k).unwrap().cumulative.vertices()) == triangle);
    let volume = body.volume() == &Rational::one();
    let lattice = (1..=6).all(|k| lattice_check(&body, k, None).equals_body_lattice == Some(true));
    // Some vertex violates θ1 + 2θ2 ≤ 1, so that description cannot be the body.
    let outside = body.body.vertices().iter().any(|v| &v[0] + rat(2, 1) * &v[1] > rat(1, 1));
    report(
        2,
        stable && volume && lattice && outside,
        "body = conv{(0,0),(2,0),(0,1)}, volume 1, N_k = kΔ ∩ Z² for k ≤ 6; θ1+2θ2 ≤ 1 reported as erratum",
    );
}

#[test]
fn criterion_03_plane_simplex() {
    let body = okounkov_body(&plane_chart(2, 14).unwrap(), 5, DEFAULT_D_MAX).unwrap();
    let simplex = vertex_set(&[q(&[0, 0]), q(&[1, 0]), q(&[0, 1])]);
    let ok = vertex_set(body.body.vertices()) == simplex && body.volume() == &rat(1, 2);
    report(3, ok, "zero ideal on C²: body = conv{(0,0),(1,0),(0,1)} at k_max = 5");
}

/// `C(1/2, n)` as an exact rational.
fn half_binomial(n: u32) -> Rational {
    (0..n).fold(Rational::one(), |acc, i| acc * (rat(1, 2) - rat(i as i64, 1)) / rat(i as i64 + 1, 1))
}

fn int_binomial(n: u32, a: u32) -> BigInt {
    (0..a).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

#[test]
fn criterion_04_implicit_series_oracle() {
    let chart = sphere_chart(12).unwrap();
    let y = &chart.y_series()[0];
    let mut mismatches = 0;
    for d in 0..=12u32 {
        for e in ExponentVector::all_of_degree(2, d) {
            let (a, b) = (e.0[0], e.0[1]);
            // (1 − u)^{1/2} with u = z1² + z2²: only even exponents appear.
            let oracle = if a % 2 == 0 && b % 2 == 0 {
                let n = (a + b) / 2;
                let sign = if n % 2 == 0 { rat(1, 1) } else { rat(-1, 1) };
                half_binomial(n) * sign * Rational::from_integer(int_binomial(n, a / 2))
            } else {
                Rational::zero()
            };
            let c = y.coefficient(&e);
            if c.re != oracle || !c.im.is_zero() {
                mismatches += 1;
            }
        }
    }
    let c10 = y.coefficient(&ExponentVector(vec![1, 0]));
    let c20 = y.coefficient(&ExponentVector(vec![2, 0]));
    let spot = c10.re.is_zero() && c20.re == rat(-1, 2) && c20.im.is_zero();
    report(4, mismatches == 0 && spot, &format!("{mismatches} mismatches through degree 12; c10 = 0, c20 = -1/2"));
}

fn sandwich_reports() -> Vec<varcap::diameter::IntegralReport> {
    let body = okounkov_body(&sphere_chart(8).unwrap(), 2, DEFAULT_D_MAX).unwrap();
    let cfg = FeketeConfig { strategy: FeketeStrategy::Exhaustive, ..Default::default() };
    [(1u32, 8usize), (2, 11)]
        .into_iter()
        .map(|(k, n)| {
            let cloud = sample_random_sphere(n, 11).unwrap();
            let basis = NumericBasis::from_nu_set(&body.stage(k).unwrap().nu_set);
            integral_formula_compare(&cloud, &[basis], &cfg, &MinimaxOptions::default()).unwrap()
        })
        .collect()
}

#[test]
fn criterion_05_sandwich_lemmas() {
    let mut ok = true;
    let mut detail = Vec::new();
    for r in sandwich_reports() {
        let s = &r.sandwiches[0];
        let certified = s.values.iter().all(|v| v.certified());
        ok &= s.exact && certified && s.lower_holds == Some(true) && s.upper_holds && s.slack <= 1e-6;
        detail.push(format!("k={} slack {:.1e} lower {:+.3e} upper {:+.3e}", s.k, s.slack, s.lower_margin, s.upper_margin));
    }
    report(5, ok, &detail.join("; "));
}

#[test]
fn criterion_06_integral_formula() {
    let mut ok = true;
    let mut detail = Vec::new();
    for r in sandwich_reports() {
        let row = &r.rows[0];
        ok &= row.exact && row.deviation <= row.bound + 1e-6;
        detail.push(format!("k={} deviation {:.4} ≤ bound {:.4}", row.k, row.deviation, row.bound));
    }
    report(6, ok, &detail.join("; "));
}

#[test]
fn criterion_07_circle_oracle() {
    let start = Instant::now();
    let pts: Vec<Vec<Complex64>> = (0..512).map(|l| vec![Complex64::from_polar(1.0, 2.0 * PI * l as f64 / 512.0)]).collect();
    let cloud = VarietyPointCloud::affine(&Variables::standard(1), pts).unwrap();
    let mut worst_t: f64 = 0.0;
    let mut worst_d: f64 = 0.0;
    let greedy = FeketeConfig { strategy: FeketeStrategy::Greedy, ..Default::default() };
    let mut certified = true;
    for k in 1..=8u32 {
        let basis = NumericBasis::monomials(1, &[0], k);
        for j in 0..=k {
            let v = chebyshev_constant(&cloud, k, &ExponentVector(vec![j]), &basis, &MinimaxOptions::default()).unwrap();
            certified &= v.certified();
            worst_t = worst_t.max((v.log_t.exp() - 1.0).abs());
        }
        let res = fekete_search(&basis.evaluate(&cloud, k), &greedy).unwrap();
        let d = (res.log_v / (k as f64 * (k + 1) as f64)).exp();
        let target = ((k + 1) as f64).powf(1.0 / (2.0 * k as f64));
        worst_d = worst_d.max((d / target - 1.0).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        7,
        certified && worst_t <= 1e-6 && worst_d <= 0.02 && elapsed < 30.0,
        &format!("max |T-1| {worst_t:.1e}, max d_k rel. error {:.2}%, {elapsed:.2} s", 100.0 * worst_d),
    );
}

#[test]
fn criterion_08_normalization_limits() {
    let ratio = |m: usize, k: u32| Normalization::from_dims(&zero_ideal_dims(m, k), k).unwrap().ratio();
    let f = varcap::algebra::rational_to_f64;
    let exact = ratio(2, 1) == rat(2, 3);
    let far2 = (f(&ratio(2, 200)) - 2.0 / 3.0).abs();
    let far1 = (f(&ratio(1, 200)) - 0.5).abs();
    let limits = limit_ratio(2) == rat(2, 3) && limit_ratio(1) == rat(1, 2);
    report(
        8,
        exact && far2 < 0.01 && far1 < 0.01 && limits,
        &format!("m=2: k=1 ratio 2/3, |ratio(200) - 2/3| = {far2:.2e}; m=1: |ratio(200) - 1/2| = {far1:.2e}"),
    );
}

#[test]
fn criterion_09_homogeneous_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for k in 1..=3u32 {
        let h_k = varcap::diameter::homogeneous_exponents(3, k).len();
        for _ in 0..20 {
            let pts: Vec<Vec<Complex64>> = (0..h_k)
                .map(|_| {
                    let mut z = vec![Complex64::new(1.0, 0.0)];
                    z.extend((0..2).map(|_| Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5))));
                    z
                })
                .collect();
            worst = worst.max(homogeneous_identity(&pts, k).unwrap().relative_difference);
        }
    }
    report(9, worst <= 1e-10, &format!("20 sets per k ≤ 3, max relative difference {worst:.1e}"));
}

#[test]
fn criterion_10_projection_invariance() {
    let cloud = sample_random_sphere(60, 10).unwrap();
    let mut swap: f64 = 0.0;
    let mut v: f64 = 0.0;
    for k in 1..=3u32 {
        let r = projection_invariance(&cloud, k, &[0, 1], 2, &FeketeConfig::default()).unwrap();
        swap = swap.max(r.swap_relative_difference);
        v = v.max(r.v_relative_difference);
    }
    report(10, swap <= 1e-12 && v <= 1e-12, &format!("fiber swap {swap:.1e}, V(K) vs V(π(K)) {v:.1e}"));
}

#[test]
fn criterion_11_circled_sets() {
    let body = okounkov_body(&sphere_circle_chart(10).unwrap(), 3, DEFAULT_D_MAX).unwrap();
    let action = CircleAction::new(0.9).unwrap();
    let seeds = [
        (Complex64::new(0.3, 0.1), 1.4),
        (Complex64::new(-0.2, 0.4), 1.8),
        (Complex64::new(0.5, -0.3), 2.5),
        (Complex64::new(0.1, 0.0), 1.2),
    ];
    let run = |arc| {
        let cloud = circled_sample(&seeds, 256, &action, arc).unwrap();
        (1..=3u32)
            .map(|k| {
                let basis = NumericBasis::from_nu_set(&body.stage(k).unwrap().nu_set);
                circled_equality(&cloud, &basis, &[0, 1], 5e-3, &MinimaxOptions::default()).unwrap()
            })
            .collect::<Vec<_>>()
    };
    let (full, half) = (run(OrbitArc::Full), run(OrbitArc::Half));
    let max = |r: &[varcap::diameter::CircledReport]| r.iter().map(|x| x.max_difference).fold(0.0, f64::max);
    let certified = full.iter().all(|r| r.entries.iter().all(|e| e.certified));
    let ok = certified && max(&full) <= 5e-3 && max(&half) > 5e-3 && half.iter().any(|r| r.hypothesis_violated);
    report(11, ok, &format!("full orbits {:.1e}, half-orbit control {:.3} (flagged)", max(&full), max(&half)));
}

fn run_demo(dir: &Path, threads: usize) {
    let status = Command::new(env!("CARGO_BIN_EXE_varcap"))
        .args(["demo", "sphere", "--kmax", "3", "--seed", "7", "--threads", &threads.to_string(), "--out"])
        .arg(dir)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_12_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let runs: Vec<_> = [1usize, 2, 4, 4]
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let dir = tmp.path().join(format!("run{i}"));
            run_demo(&dir, t);
            snapshot(&dir)
        })
        .collect();
    let identical = runs.windows(2).all(|w| w[0] == w[1]);
    report(12, identical && runs[0].len() == 7, &format!("{} artifacts byte-identical over threads 1, 2, 4, 4", runs[0].len()));
}
