//! Exact convex hulls of rational point sets in dimensions 1 to 4.
//!
//! Inputs are scaled to a common integer lattice and processed with checked
//! `i128` arithmetic: monotone chain in the plane, brute-force facet
//! enumeration over d-subsets in dimensions 3 and 4. Lower-dimensional inputs
//! are handled by projecting onto coordinates that span their affine hull.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::algebra::{rational_to_f64, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HullError {
    #[error("convex hulls are limited to dimensions 1..=4 (got {0})")]
    UnsupportedDimension(usize),
    #[error("hull of an empty point set")]
    Empty,
    #[error("points have inconsistent dimensions")]
    DimensionMismatch,
    #[error("integer overflow in exact hull arithmetic")]
    Overflow,
}

/// Supporting half-space `normal · x ≤ offset`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<Rational>,
    pub offset: Rational,
}

/// Convex hull with exact vertices, facets and volume.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HullPolytope {
    dim: usize,
    affine_dim: usize,
    /// Counterclockwise in the full-dimensional planar case; ascending otherwise.
    vertices: Vec<Vec<Rational>>,
    /// Empty unless the hull is full-dimensional.
    facets: Vec<Facet>,
    volume: Rational,
}

type IPoint = Vec<i128>;

fn ck(v: Option<i128>) -> Result<i128, HullError> {
    v.ok_or(HullError::Overflow)
}

fn dot(a: &[i128], b: &[i128]) -> Result<i128, HullError> {
    a.iter().zip(b).try_fold(0i128, |acc, (x, y)| ck(acc.checked_add(ck(x.checked_mul(*y))?)))
}

fn sub(a: &[i128], b: &[i128]) -> Result<IPoint, HullError> {
    a.iter().zip(b).map(|(x, y)| ck(x.checked_sub(*y))).collect()
}

fn det(m: &[Vec<i128>]) -> Result<i128, HullError> {
    match m.len() {
        0 => Ok(1),
        1 => Ok(m[0][0]),
        2 => ck(ck(m[0][0].checked_mul(m[1][1]))?.checked_sub(ck(m[0][1].checked_mul(m[1][0]))?)),
        n => {
            let mut acc = 0i128;
            for col in 0..n {
                if m[0][col] == 0 {
                    continue;
                }
                let minor: Vec<Vec<i128>> =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, v)| *v).collect()).collect();
                let term = ck(m[0][col].checked_mul(det(&minor)?))?;
                acc = if col % 2 == 0 { ck(acc.checked_add(term))? } else { ck(acc.checked_sub(term))? };
            }
            Ok(acc)
        }
    }
}

/// Vector orthogonal to `d−1` vectors in `R^d` (generalized cross product).
fn normal_of(rows: &[IPoint]) -> Result<IPoint, HullError> {
    let d = rows.len() + 1;
    (0..d)
        .map(|i| {
            let minor: Vec<Vec<i128>> =
                rows.iter().map(|r| r.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect()).collect();
            let v = det(&minor)?;
            Ok(if i % 2 == 0 { v } else { -v })
        })
        .collect()
}

fn gcd_normalize(v: &mut [i128]) {
    let g = v.iter().fold(0i128, |g, x| g.gcd(x));
    if g > 1 {
        v.iter_mut().for_each(|x| *x /= g);
    }
}

/// Exact rank of integer vectors (fraction-free elimination in rationals).
fn rank(rows: &[IPoint]) -> usize {
    let mut a: Vec<Vec<BigRational>> =
        rows.iter().map(|r| r.iter().map(|v| BigRational::from_integer(BigInt::from(*v))).collect()).collect();
    let ncols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(r, p);
        for i in 0..a.len() {
            if i != r && !a[i][col].is_zero() {
                let f = &a[i][col] / &a[r][col];
                for j in col..ncols {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
            }
        }
        r += 1;
    }
    r
}

fn to_lattice(points: &[Vec<Rational>]) -> Result<(Vec<IPoint>, BigInt), HullError> {
    let l = points.iter().flatten().fold(BigInt::one(), |l, r| l.lcm(r.denom()));
    let scaled = points
        .iter()
        .map(|p| p.iter().map(|r| (r.numer() * (&l / r.denom())).to_i128().ok_or(HullError::Overflow)).collect())
        .collect::<Result<Vec<IPoint>, _>>()?;
    Ok((scaled, l))
}

fn from_lattice(p: &[i128], l: &BigInt) -> Vec<Rational> {
    p.iter().map(|v| BigRational::new(BigInt::from(*v), l.clone())).collect()
}

/// Hull in lattice coordinates: vertices (ordered) and integer facets.
struct LatticeHull {
    vertices: Vec<IPoint>,
    facets: Vec<(IPoint, i128)>,
}

fn hull_1d(pts: &[IPoint]) -> LatticeHull {
    let lo = pts.iter().map(|p| p[0]).min().expect("nonempty");
    let hi = pts.iter().map(|p| p[0]).max().expect("nonempty");
    let vertices = if lo == hi { vec![vec![lo]] } else { vec![vec![lo], vec![hi]] };
    LatticeHull { vertices, facets: vec![(vec![-1], -lo), (vec![1], hi)] }
}

fn cross(o: &[i128], a: &[i128], b: &[i128]) -> Result<i128, HullError> {
    let (ax, ay) = (ck(a[0].checked_sub(o[0]))?, ck(a[1].checked_sub(o[1]))?);
    let (bx, by) = (ck(b[0].checked_sub(o[0]))?, ck(b[1].checked_sub(o[1]))?);
    ck(ck(ax.checked_mul(by))?.checked_sub(ck(ay.checked_mul(bx))?))
}

fn hull_2d(pts: &[IPoint]) -> Result<LatticeHull, HullError> {
    let mut p = pts.to_vec();
    p.sort();
    p.dedup();
    let mut lower: Vec<IPoint> = Vec::new();
    for q in &p {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], q)? <= 0 {
            lower.pop();
        }
        lower.push(q.clone());
    }
    let mut upper: Vec<IPoint> = Vec::new();
    for q in p.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], q)? <= 0 {
            upper.pop();
        }
        upper.push(q.clone());
    }
    lower.pop();
    upper.pop();
    let vertices: Vec<IPoint> = lower.into_iter().chain(upper).collect();
    let mut facets = Vec::new();
    for i in 0..vertices.len() {
        let (a, b) = (&vertices[i], &vertices[(i + 1) % vertices.len()]);
        let mut n = vec![ck(b[1].checked_sub(a[1]))?, ck(a[0].checked_sub(b[0]))?];
        gcd_normalize(&mut n);
        let off = dot(&n, a)?;
        facets.push((n, off));
    }
    Ok(LatticeHull { vertices, facets })
}

fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut idx: Vec<usize> = (0..k).collect();
    let mut done = k > n;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = idx.clone();
        let mut i = k;
        loop {
            if i == 0 {
                done = true;
                break;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

fn hull_nd(pts: &[IPoint], d: usize) -> Result<LatticeHull, HullError> {
    let mut p = pts.to_vec();
    p.sort();
    p.dedup();
    let mut facets: Vec<(IPoint, i128)> = Vec::new();
    for combo in combinations(p.len(), d) {
        let base = &p[combo[0]];
        let rows: Vec<IPoint> = combo[1..].iter().map(|&i| sub(&p[i], base)).collect::<Result<_, _>>()?;
        let mut n = normal_of(&rows)?;
        if n.iter().all(|v| *v == 0) {
            continue;
        }
        gcd_normalize(&mut n);
        let off = dot(&n, base)?;
        let (mut above, mut below) = (false, false);
        for q in &p {
            let s = dot(&n, q)?;
            above |= s > off;
            below |= s < off;
            if above && below {
                break;
            }
        }
        if above && below {
            continue;
        }
        let facet = if above { (n.iter().map(|v| -v).collect(), -off) } else { (n, off) };
        if !facets.contains(&facet) {
            facets.push(facet);
        }
    }
    let mut vertices = Vec::new();
    for q in &p {
        let active: Vec<IPoint> =
            facets.iter().filter(|(n, off)| dot(n, q) == Ok(*off)).map(|(n, _)| n.clone()).collect();
        if rank(&active) == d {
            vertices.push(q.clone());
        }
    }
    Ok(LatticeHull { vertices, facets })
}

fn lattice_hull(pts: &[IPoint], d: usize) -> Result<LatticeHull, HullError> {
    match d {
        1 => Ok(hull_1d(pts)),
        2 => hull_2d(pts),
        3 | 4 => hull_nd(pts, d),
        _ => Err(HullError::UnsupportedDimension(d)),
    }
}

/// Coordinates spanning the affine hull of `pts` (a maximal set of columns
/// of the difference matrix with full rank).
fn spanning_coordinates(pts: &[IPoint], d: usize) -> (usize, Vec<usize>) {
    let diffs: Vec<IPoint> = pts.iter().map(|p| p.iter().zip(&pts[0]).map(|(a, b)| a - b).collect()).collect();
    let r = rank(&diffs);
    let mut chosen = Vec::new();
    for c in 0..d {
        chosen.push(c);
        let proj: Vec<IPoint> = diffs.iter().map(|v| chosen.iter().map(|&j| v[j]).collect()).collect();
        if rank(&proj) < chosen.len() {
            chosen.pop();
        }
        if chosen.len() == r {
            break;
        }
    }
    (r, chosen)
}

/// Exact d-volume of a full-dimensional lattice hull (in lattice units).
fn lattice_volume(h: &LatticeHull, d: usize) -> Result<BigRational, HullError> {
    let big = |v: i128| BigRational::from_integer(BigInt::from(v));
    match d {
        1 => Ok(big(h.vertices.last().expect("vertex")[0] - h.vertices[0][0])),
        2 => {
            let n = h.vertices.len();
            let mut twice = BigInt::zero();
            for i in 0..n {
                let (a, b) = (&h.vertices[i], &h.vertices[(i + 1) % n]);
                twice += BigInt::from(a[0]) * BigInt::from(b[1]) - BigInt::from(a[1]) * BigInt::from(b[0]);
            }
            Ok(BigRational::new(twice.abs(), BigInt::from(2)))
        }
        _ => {
            // Cone decomposition from the vertex centroid: each facet contributes
            // (offset − a·c)/d times its projected area divided by |a_i|.
            let nv = BigInt::from(h.vertices.len());
            let c: Vec<BigRational> = (0..d)
                .map(|j| BigRational::new(h.vertices.iter().map(|v| BigInt::from(v[j])).sum(), nv.clone()))
                .collect();
            let mut vol = BigRational::zero();
            for (n, off) in &h.facets {
                let on: Vec<&IPoint> = h.vertices.iter().filter(|v| dot(n, v) == Ok(*off)).collect();
                let i = n.iter().position(|v| *v != 0).expect("nonzero normal");
                let proj: Vec<IPoint> =
                    on.iter().map(|v| v.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| *x).collect()).collect();
                let sub_hull = lattice_hull(&proj, d - 1)?;
                let area = lattice_volume(&sub_hull, d - 1)?;
                let height = big(*off) - n.iter().zip(&c).map(|(a, x)| big(*a) * x).sum::<BigRational>();
                vol += height * area / (big(n[i].abs()) * big(d as i128));
            }
            Ok(vol)
        }
    }
}

impl HullPolytope {
    /// Convex hull of rational points in dimension `1..=4`.
    pub fn new(points: &[Vec<Rational>]) -> Result<Self, HullError> {
        let d = points.first().ok_or(HullError::Empty)?.len();
        if points.iter().any(|p| p.len() != d) {
            return Err(HullError::DimensionMismatch);
        }
        if !(1..=4).contains(&d) {
            return Err(HullError::UnsupportedDimension(d));
        }
        let (pts, l) = to_lattice(points)?;
        let (r, coords) = spanning_coordinates(&pts, d);
        if r == 0 {
            return Ok(Self {
                dim: d,
                affine_dim: 0,
                vertices: vec![points[0].clone()],
                facets: Vec::new(),
                volume: Rational::zero(),
            });
        }
        if r < d {
            let proj: Vec<IPoint> = pts.iter().map(|p| coords.iter().map(|&j| p[j]).collect()).collect();
            let h = lattice_hull(&proj, r)?;
            let mut vertices: Vec<Vec<Rational>> = h
                .vertices
                .iter()
                .map(|v| {
                    let idx = proj.iter().position(|q| q == v).expect("vertex is an input point");
                    from_lattice(&pts[idx], &l)
                })
                .collect();
            if r != 2 {
                vertices.sort();
            }
            return Ok(Self { dim: d, affine_dim: r, vertices, facets: Vec::new(), volume: Rational::zero() });
        }
        let h = lattice_hull(&pts, d)?;
        let scale = BigRational::from_integer(l.pow(d as u32));
        let volume = lattice_volume(&h, d)? / scale;
        let mut vertices: Vec<Vec<Rational>> = h.vertices.iter().map(|v| from_lattice(v, &l)).collect();
        if d != 2 {
            vertices.sort();
        }
        let facets = h
            .facets
            .iter()
            .map(|(n, off)| Facet {
                normal: n.iter().map(|v| BigRational::from_integer(BigInt::from(*v))).collect(),
                offset: BigRational::new(BigInt::from(*off), l.clone()),
            })
            .collect();
        Ok(Self { dim: d, affine_dim: d, vertices, facets, volume })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn affine_dim(&self) -> usize {
        self.affine_dim
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.affine_dim == self.dim
    }

    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn volume(&self) -> &Rational {
        &self.volume
    }

    /// Vertex set as a sorted list, for order-independent comparison.
    pub fn vertex_set(&self) -> Vec<Vec<Rational>> {
        let mut v = self.vertices.clone();
        v.sort();
        v
    }

    /// Exact membership test (closed hull).
    pub fn contains(&self, p: &[Rational]) -> bool {
        if self.is_full_dimensional() {
            return self
                .facets
                .iter()
                .all(|f| f.normal.iter().zip(p).map(|(a, x)| a * x).sum::<Rational>() <= f.offset);
        }
        let mut pts = self.vertices.clone();
        pts.push(p.to_vec());
        match HullPolytope::new(&pts) {
            Ok(h) => h.affine_dim == self.affine_dim && h.vertex_set() == self.vertex_set(),
            Err(_) => false,
        }
    }

    /// Euclidean distance from an interior point to the boundary (0 outside
    /// or for lower-dimensional hulls).
    pub fn boundary_distance(&self, p: &[Rational]) -> f64 {
        if !self.is_full_dimensional() {
            return 0.0;
        }
        self.facets
            .iter()
            .map(|f| {
                let slack = &f.offset - f.normal.iter().zip(p).map(|(a, x)| a * x).sum::<Rational>();
                let norm = f.normal.iter().map(|a| rational_to_f64(a).powi(2)).sum::<f64>().sqrt();
                rational_to_f64(&slack) / norm
            })
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }

    /// Largest distance between two vertices.
    pub fn diameter(&self) -> f64 {
        let v: Vec<Vec<f64>> = self.vertices.iter().map(|p| p.iter().map(rational_to_f64).collect()).collect();
        let mut best = 0.0f64;
        for a in &v {
            for b in &v {
                best = best.max(a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt());
            }
        }
        best
    }

    /// Integer points of `k · hull`, in ascending order.
    pub fn lattice_points_scaled(&self, k: u32) -> Vec<Vec<i64>> {
        let kr = Rational::from_integer(k.into());
        let scaled: Vec<Vec<Rational>> = self.vertices.iter().map(|v| v.iter().map(|x| x * &kr).collect()).collect();
        let lo: Vec<i64> = (0..self.dim)
            .map(|j| scaled.iter().map(|v| v[j].floor().to_integer()).min().expect("vertex").to_i64().expect("bounded"))
            .collect();
        let hi: Vec<i64> = (0..self.dim)
            .map(|j| scaled.iter().map(|v| v[j].ceil().to_integer()).max().expect("vertex").to_i64().expect("bounded"))
            .collect();
        let mut out = Vec::new();
        let mut cur = lo.clone();
        loop {
            let p: Vec<Rational> = cur.iter().map(|c| Rational::new(BigInt::from(*c), BigInt::from(k))).collect();
            if self.contains(&p) {
                out.push(cur.clone());
            }
            let mut j = 0;
            loop {
                if j == self.dim {
                    out.sort();
                    return out;
                }
                cur[j] += 1;
                if cur[j] <= hi[j] {
                    break;
                }
                cur[j] = lo[j];
                j += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use proptest::prelude::*;

    fn pts(v: &[&[i64]]) -> Vec<Vec<Rational>> {
        v.iter().map(|p| p.iter().map(|x| rat(*x, 1)).collect()).collect()
    }

    #[test]
    fn sphere_first_hull_is_triangle() {
        let h = HullPolytope::new(&pts(&[&[0, 0], &[1, 0], &[0, 1], &[2, 0]])).unwrap();
        assert_eq!(h.vertices(), pts(&[&[0, 0], &[2, 0], &[0, 1]]).as_slice());
        assert_eq!(*h.volume(), rat(1, 1));
        assert!(h.contains(&[rat(1, 1), rat(1, 2)]));
        assert!(!h.contains(&[rat(1, 1), rat(3, 5)]));
        assert_eq!(h.lattice_points_scaled(3).len(), 16);
    }

    #[test]
    fn degenerate_inputs() {
        let seg = HullPolytope::new(&pts(&[&[0, 0], &[1, 1], &[3, 3]])).unwrap();
        assert_eq!(seg.affine_dim(), 1);
        assert_eq!(seg.vertices().len(), 2);
        assert!(seg.contains(&[rat(2, 1), rat(2, 1)]));
        assert!(!seg.contains(&[rat(2, 1), rat(1, 1)]));
        let single = HullPolytope::new(&pts(&[&[5]])).unwrap();
        assert_eq!(single.affine_dim(), 0);
        assert!(HullPolytope::new(&pts(&[&[0, 0, 0, 0, 0]])).is_err());
    }

    #[test]
    fn simplices_and_cubes_in_three_and_four_dimensions() {
        let t3 = HullPolytope::new(&pts(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[0, 0, 0]])).unwrap();
        assert_eq!(*t3.volume(), rat(1, 6));
        assert_eq!(t3.facets().len(), 4);
        let mut cube = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    cube.push(vec![rat(a * 2, 1), rat(b * 3, 1), rat(c, 2)]);
                }
            }
        }
        cube.push(vec![rat(1, 1), rat(1, 1), rat(1, 4)]);
        let h = HullPolytope::new(&cube).unwrap();
        assert_eq!(*h.volume(), rat(3, 1));
        assert_eq!(h.vertices().len(), 8);
        let mut s4 = vec![vec![rat(0, 1); 4]];
        for j in 0..4 {
            let mut e = vec![rat(0, 1); 4];
            e[j] = rat(2, 1);
            s4.push(e);
        }
        assert_eq!(*HullPolytope::new(&s4).unwrap().volume(), rat(16, 24));
    }

    proptest! {
        #[test]
        fn planar_hull_contains_inputs(raw in proptest::collection::vec((-20i64..20, -20i64..20), 3..30)) {
            let p: Vec<Vec<Rational>> = raw.iter().map(|(a, b)| vec![rat(*a, 3), rat(*b, 2)]).collect();
            let h = HullPolytope::new(&p).unwrap();
            for q in &p {
                prop_assert!(h.contains(q));
            }
            for v in h.vertices() {
                prop_assert!(p.contains(v));
            }
            // Volume equals the triangle fan from the first vertex.
            if h.is_full_dimensional() {
                let v = h.vertices();
                let mut area = rat(0, 1);
                for i in 1..v.len() - 1 {
                    let (a, b, c) = (&v[0], &v[i], &v[i + 1]);
                    area += ((&b[0] - &a[0]) * (&c[1] - &a[1]) - (&b[1] - &a[1]) * (&c[0] - &a[0])) / rat(2, 1);
                }
                prop_assert_eq!(area, h.volume().clone());
            }
        }

        #[test]
        fn spatial_hull_contains_inputs(raw in proptest::collection::vec((0i64..5, 0i64..5, 0i64..5), 4..12)) {
            let p: Vec<Vec<Rational>> = raw.iter().map(|(a, b, c)| vec![rat(*a, 1), rat(*b, 1), rat(*c, 1)]).collect();
            let h = HullPolytope::new(&p).unwrap();
            for q in &p {
                prop_assert!(h.contains(q));
            }
            prop_assert!(*h.volume() >= rat(0, 1));
        }
    }
}
