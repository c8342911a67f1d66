//! Lattice polytopes from toric data: facet representation, exact rational
//! vertex enumeration, lattice and interior point lists, and the face lattice
//! used for stratified point counting.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{CoreError, Result};

/// Rays and line-bundle coefficients of a (complete, smooth) toric variety.
/// The polytope of sections of O(sum k_i D_i) is cut out by
/// <v, ray_i> >= -k_i.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ToricData {
    pub rays: Vec<Vec<i64>>,
    pub bundle_coeffs: Vec<i64>,
}

impl ToricData {
    pub fn new(rays: Vec<Vec<i64>>, bundle_coeffs: Vec<i64>) -> Result<Self> {
        if rays.is_empty() || rays.len() != bundle_coeffs.len() {
            return Err(CoreError::InvalidInput(
                "rays and bundle coefficients must be non-empty and equal in number".into(),
            ));
        }
        let n = rays[0].len();
        if rays.iter().any(|r| r.len() != n) {
            return Err(CoreError::InvalidInput("ray dimensions differ".into()));
        }
        for r in &rays {
            let g = r.iter().fold(0i64, |acc, &x| gcd_i64(acc, x));
            if g != 1 {
                return Err(CoreError::InvalidInput(format!(
                    "ray {r:?} is not primitive"
                )));
            }
        }
        if bundle_coeffs.iter().any(|&k| k < 1) {
            return Err(CoreError::InvalidInput(
                "bundle coefficients must be >= 1".into(),
            ));
        }
        Ok(ToricData {
            rays,
            bundle_coeffs,
        })
    }

    pub fn dim(&self) -> usize {
        self.rays[0].len()
    }

    pub fn is_anticanonical(&self) -> bool {
        self.bundle_coeffs.iter().all(|&k| k == 1)
    }
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A face of the polytope: lattice points lying on a set of facets, with an
/// integer basis of the direction lattice for coordinates on the face torus.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Face {
    pub dim: usize,
    pub active_facets: Vec<usize>,
    pub points: Vec<Vec<i64>>,
    pub direction_basis: Vec<Vec<i64>>,
}

impl Face {
    /// Coordinates of `u - base` in the direction basis, where `base` is the
    /// first lattice point of the face. None if `u` is outside the affine
    /// span or the face has no lattice points.
    pub fn local_coordinates(&self, u: &[i64]) -> Option<Vec<i64>> {
        let base = self.points.first()?;
        let n = base.len();
        let d = self.direction_basis.len();
        let rhs: Vec<BigRational> = (0..n)
            .map(|c| BigRational::from(BigInt::from(u[c] - base[c])))
            .collect();
        // least-squares-free exact solve: the basis columns are independent,
        // solve by elimination on the n x d system
        let mut rows: Vec<Vec<BigRational>> = (0..n)
            .map(|c| {
                let mut row: Vec<BigRational> = (0..d)
                    .map(|j| BigRational::from(BigInt::from(self.direction_basis[j][c])))
                    .collect();
                row.push(rhs[c].clone());
                row
            })
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..d {
            let Some(pr) = (r..n).find(|&i| !rows[i][col].is_zero()) else {
                return None;
            };
            rows.swap(r, pr);
            let inv = rows[r][col].clone().recip();
            for x in rows[r].iter_mut() {
                *x *= &inv;
            }
            for i in 0..n {
                if i != r && !rows[i][col].is_zero() {
                    let f = rows[i][col].clone();
                    for j in 0..=d {
                        let t = &f * &rows[r][j];
                        rows[i][j] -= t;
                    }
                }
            }
            pivots.push(r);
            r += 1;
        }
        // consistency on the remaining rows
        if rows[r..].iter().any(|row| !row[d].is_zero()) {
            return None;
        }
        let mut out = Vec::with_capacity(d);
        for row in rows[..d].iter() {
            let v = &row[d];
            if !v.denom().is_one() {
                return None;
            }
            out.push(int_to_i64(v.numer())?);
        }
        Some(out)
    }
}

fn int_to_i64(v: &BigInt) -> Option<i64> {
    let s = v.to_string();
    s.parse().ok()
}

/// A bounded lattice polytope given by facet inequalities
/// <v, normal> >= -offset, with all enumerations precomputed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LatticePolytope {
    dim: usize,
    facets: Vec<(Vec<i64>, i64)>,
    vertices: Vec<Vec<BigRational>>,
    lattice_pts: Vec<Vec<i64>>,
    interior_pts: Vec<Vec<i64>>,
}

pub fn polytope_from_toric(t: &ToricData) -> Result<LatticePolytope> {
    let facets = t
        .rays
        .iter()
        .cloned()
        .zip(t.bundle_coeffs.iter().cloned())
        .collect();
    LatticePolytope::from_facets(t.dim(), facets)
}

impl LatticePolytope {
    pub fn from_facets(dim: usize, facets: Vec<(Vec<i64>, i64)>) -> Result<Self> {
        if dim == 0 || facets.iter().any(|(n, _)| n.len() != dim) {
            return Err(CoreError::InvalidInput(
                "facet normals must match the ambient dimension".into(),
            ));
        }
        // redundant facets are harmless; drop exact duplicates only
        let mut facets: Vec<(Vec<i64>, i64)> = facets;
        facets.sort();
        facets.dedup();

        check_bounded(dim, &facets)?;
        let vertices = enumerate_vertices(dim, &facets);
        let (lattice_pts, interior_pts) = enumerate_points(dim, &facets, &vertices);
        Ok(LatticePolytope {
            dim,
            facets,
            vertices,
            lattice_pts,
            interior_pts,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[(Vec<i64>, i64)] {
        &self.facets
    }

    /// Vertices as exact rationals, lexicographic order.
    pub fn vertices(&self) -> &[Vec<BigRational>] {
        &self.vertices
    }

    /// The integer vertices only, in lexicographic order.
    pub fn integer_vertices(&self) -> Vec<Vec<i64>> {
        self.vertices
            .iter()
            .filter_map(|v| {
                v.iter()
                    .map(|c| {
                        if c.denom().is_one() {
                            int_to_i64(c.numer())
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn lattice_points(&self) -> &[Vec<i64>] {
        &self.lattice_pts
    }

    pub fn interior_points(&self) -> &[Vec<i64>] {
        &self.interior_pts
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.facets
            .iter()
            .all(|(n, k)| dot(v, n) >= -(*k as i128))
    }

    pub fn contains_strict(&self, v: &[i64]) -> bool {
        self.facets.iter().all(|(n, k)| dot(v, n) > -(*k as i128))
    }

    /// All faces (including the polytope itself, excluding the empty face),
    /// ordered by dimension then by active facet set.
    pub fn faces(&self) -> Vec<Face> {
        let m = self.vertices.len();
        let all: BTreeSet<usize> = (0..m).collect();
        // vertex sets of facets
        let facet_vsets: Vec<BTreeSet<usize>> = self
            .facets
            .iter()
            .map(|(nrm, k)| {
                (0..m)
                    .filter(|&i| vertex_on_facet(&self.vertices[i], nrm, *k))
                    .collect()
            })
            .collect();
        // faces = closure of {whole polytope, facets} under intersection
        let mut vsets: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        vsets.insert(all);
        loop {
            let mut added = false;
            let current: Vec<BTreeSet<usize>> = vsets.iter().cloned().collect();
            for s in &current {
                for fv in &facet_vsets {
                    let inter: BTreeSet<usize> = s.intersection(fv).cloned().collect();
                    if !inter.is_empty() && vsets.insert(inter) {
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
        let mut out: Vec<Face> = vsets
            .iter()
            .map(|vs| {
                let active: Vec<usize> = (0..self.facets.len())
                    .filter(|&f| vs.iter().all(|&i| facet_vsets[f].contains(&i)))
                    .collect();
                let normals: Vec<Vec<i64>> =
                    active.iter().map(|&f| self.facets[f].0.clone()).collect();
                let basis = integer_kernel(&normals, self.dim);
                let points: Vec<Vec<i64>> = self
                    .lattice_pts
                    .iter()
                    .filter(|p| {
                        active
                            .iter()
                            .all(|&f| dot(p, &self.facets[f].0) == -(self.facets[f].1 as i128))
                    })
                    .cloned()
                    .collect();
                Face {
                    dim: basis.len(),
                    active_facets: active,
                    points,
                    direction_basis: basis,
                }
            })
            .collect();
        out.sort_by(|a, b| (a.dim, &a.active_facets).cmp(&(b.dim, &b.active_facets)));
        out
    }
}

fn dot(v: &[i64], n: &[i64]) -> i128 {
    v.iter()
        .zip(n)
        .map(|(&a, &b)| a as i128 * b as i128)
        .sum()
}

fn vertex_on_facet(v: &[BigRational], normal: &[i64], k: i64) -> bool {
    let mut acc = BigRational::zero();
    for (c, &nc) in v.iter().zip(normal) {
        acc += c * BigRational::from(BigInt::from(nc));
    }
    acc == BigRational::from(BigInt::from(-k))
}

fn vertex_satisfies(v: &[BigRational], normal: &[i64], k: i64) -> bool {
    let mut acc = BigRational::zero();
    for (c, &nc) in v.iter().zip(normal) {
        acc += c * BigRational::from(BigInt::from(nc));
    }
    acc >= BigRational::from(BigInt::from(-k))
}

/// Rank of an integer matrix (rows), by exact rational elimination.
fn rank(rows: &[Vec<i64>], dim: usize) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|&x| BigRational::from(BigInt::from(x)))
                .collect()
        })
        .collect();
    let mut rank = 0;
    for col in 0..dim {
        let Some(pr) = (rank..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = m[rank][col].clone().recip();
        for x in m[rank].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != rank && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in 0..dim {
                    let t = &f * &m[rank][j];
                    m[i][j] -= t;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Basis of the saturated integer kernel {v : rows * v = 0} via column
/// reduction with a unimodular transform.
pub(crate) fn integer_kernel(rows: &[Vec<i64>], dim: usize) -> Vec<Vec<i64>> {
    let r = rows.len();
    let mut m: Vec<Vec<BigInt>> = (0..r)
        .map(|i| (0..dim).map(|j| BigInt::from(rows[i][j])).collect())
        .collect();
    let mut u: Vec<Vec<BigInt>> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    // column echelon on m, mirroring column operations on u
    let mut c = 0;
    for i in 0..r {
        loop {
            let nz: Vec<usize> = (c..dim).filter(|&j| !m[i][j].is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            let piv = *nz
                .iter()
                .min_by_key(|&&j| m[i][j].abs())
                .unwrap();
            if piv != c {
                for row in m.iter_mut() {
                    row.swap(c, piv);
                }
                for row in u.iter_mut() {
                    row.swap(c, piv);
                }
            }
            let mut done = true;
            for j in (c + 1)..dim {
                if m[i][j].is_zero() {
                    continue;
                }
                let q = div_round(&m[i][j], &m[i][c]);
                if !q.is_zero() {
                    for row in m.iter_mut() {
                        let t = &q * &row[c];
                        row[j] -= t;
                    }
                    for row in u.iter_mut() {
                        let t = &q * &row[c];
                        row[j] -= t;
                    }
                }
                if !m[i][j].is_zero() {
                    done = false;
                }
            }
            if done {
                c += 1;
                break;
            }
        }
        if c == dim {
            break;
        }
    }
    (c..dim)
        .map(|j| {
            (0..dim)
                .map(|i| int_to_i64(&u[i][j]).expect("kernel basis entry overflow"))
                .collect()
        })
        .collect()
}

fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    // nearest integer to a/b, ties toward zero; keeps remainders small
    let two = BigInt::from(2);
    let (q, r) = num_integer::Integer::div_rem(a, b);
    if (&r * &two).abs() > b.abs() {
        if (r.is_negative()) == (b.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

fn check_bounded(dim: usize, facets: &[(Vec<i64>, i64)]) -> Result<()> {
    let normals: Vec<Vec<i64>> = facets.iter().map(|(n, _)| n.clone()).collect();
    if rank(&normals, dim) < dim {
        return Err(CoreError::UnboundedPolytope(
            "facet normals do not span the ambient space".into(),
        ));
    }
    // recession cone is pointed; unbounded iff it has a non-trivial extreme
    // ray, which lies on dim-1 of the facet normals
    let subsets = choose_subsets(facets.len(), dim - 1);
    for sub in subsets {
        let rows: Vec<Vec<i64>> = sub.iter().map(|&i| normals[i].clone()).collect();
        let kern = integer_kernel(&rows, dim);
        if kern.len() != 1 {
            continue;
        }
        for sign in [1i64, -1] {
            let ray: Vec<i64> = kern[0].iter().map(|&x| sign * x).collect();
            if ray.iter().all(|&x| x == 0) {
                continue;
            }
            if normals.iter().all(|n| dot(&ray, n) >= 0) {
                return Err(CoreError::UnboundedPolytope(format!(
                    "recession direction {ray:?}"
                )));
            }
        }
    }
    Ok(())
}

fn choose_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn enumerate_vertices(dim: usize, facets: &[(Vec<i64>, i64)]) -> Vec<Vec<BigRational>> {
    let mut verts: BTreeMap<Vec<BigRational>, ()> = BTreeMap::new();
    for sub in choose_subsets(facets.len(), dim) {
        let rows: Vec<&(Vec<i64>, i64)> = sub.iter().map(|&i| &facets[i]).collect();
        if let Some(v) = solve_equalities(dim, &rows) {
            if facets.iter().all(|(n, k)| vertex_satisfies(&v, n, *k)) {
                verts.insert(v, ());
            }
        }
    }
    verts.into_keys().collect()
}

/// Unique solution of <v, normal_i> = -k_i, if the normals are independent.
fn solve_equalities(dim: usize, rows: &[&(Vec<i64>, i64)]) -> Option<Vec<BigRational>> {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|(n, k)| {
            let mut row: Vec<BigRational> = n
                .iter()
                .map(|&x| BigRational::from(BigInt::from(x)))
                .collect();
            row.push(BigRational::from(BigInt::from(-k)));
            row
        })
        .collect();
    for col in 0..dim {
        let pr = (col..dim).find(|&i| !m[i][col].is_zero())?;
        m.swap(col, pr);
        let inv = m[col][col].clone().recip();
        for x in m[col].iter_mut() {
            *x *= &inv;
        }
        for i in 0..dim {
            if i != col && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in 0..=dim {
                    let t = &f * &m[col][j];
                    m[i][j] -= t;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[dim].clone()).collect())
}

fn enumerate_points(
    dim: usize,
    facets: &[(Vec<i64>, i64)],
    vertices: &[Vec<BigRational>],
) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    if vertices.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let mut lo = vec![i64::MAX; dim];
    let mut hi = vec![i64::MIN; dim];
    for v in vertices {
        for (c, x) in v.iter().enumerate() {
            let fl = x.floor().numer().clone();
            let ce = x.ceil().numer().clone();
            lo[c] = lo[c].min(int_to_i64(&fl).expect("vertex overflow"));
            hi[c] = hi[c].max(int_to_i64(&ce).expect("vertex overflow"));
        }
    }
    let mut all = Vec::new();
    let mut interior = Vec::new();
    let mut cur = lo.clone();
    'scan: loop {
        let inside = facets.iter().all(|(n, k)| dot(&cur, n) >= -(*k as i128));
        if inside {
            all.push(cur.clone());
            if facets.iter().all(|(n, k)| dot(&cur, n) > -(*k as i128)) {
                interior.push(cur.clone());
            }
        }
        // lex increment from the last coordinate
        for c in (0..dim).rev() {
            if cur[c] < hi[c] {
                cur[c] += 1;
                continue 'scan;
            }
            cur[c] = lo[c];
            if c == 0 {
                break 'scan;
            }
        }
    }
    all.sort();
    interior.sort();
    (all, interior)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1() -> ToricData {
        ToricData::new(vec![vec![1], vec![-1]], vec![1, 1]).unwrap()
    }

    fn p2_anticanonical() -> ToricData {
        ToricData::new(vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![1, 1, 1]).unwrap()
    }

    #[test]
    fn segment() {
        let p = polytope_from_toric(&p1()).unwrap();
        assert_eq!(p.lattice_points(), &[vec![-1], vec![0], vec![1]]);
        assert_eq!(p.interior_points(), &[vec![0]]);
        assert_eq!(p.integer_vertices(), vec![vec![-1], vec![1]]);
    }

    #[test]
    fn p2_triangle() {
        let p = polytope_from_toric(&p2_anticanonical()).unwrap();
        assert_eq!(p.lattice_points().len(), 10);
        assert_eq!(p.interior_points(), &[vec![0, 0]]);
        let mut vs = p.integer_vertices();
        vs.sort();
        assert_eq!(vs, vec![vec![-1, -1], vec![-1, 2], vec![2, -1]]);
    }

    #[test]
    fn degree_4_triangle() {
        // {v1 >= 0, v2 >= 0, v1 + v2 <= 4}
        let p = LatticePolytope::from_facets(
            2,
            vec![
                (vec![1, 0], 0),
                (vec![0, 1], 0),
                (vec![-1, -1], 4),
            ],
        )
        .unwrap();
        assert_eq!(p.lattice_points().len(), 15);
        assert_eq!(
            p.interior_points(),
            &[vec![1, 1], vec![1, 2], vec![2, 1]]
        );
    }

    #[test]
    fn square_vertices() {
        let p = LatticePolytope::from_facets(
            2,
            vec![
                (vec![1, 0], 0),
                (vec![-1, 0], 1),
                (vec![0, 1], 0),
                (vec![0, -1], 1),
            ],
        )
        .unwrap();
        assert_eq!(p.integer_vertices().len(), 4);
        assert_eq!(p.lattice_points().len(), 4);
    }

    #[test]
    fn unbounded_detected() {
        let err = LatticePolytope::from_facets(2, vec![(vec![1, 0], 1), (vec![-1, 0], 1)]);
        assert!(matches!(err, Err(CoreError::UnboundedPolytope(_))));
        let err = LatticePolytope::from_facets(2, vec![(vec![1, 0], 1), (vec![0, 1], 1)]);
        assert!(matches!(err, Err(CoreError::UnboundedPolytope(_))));
    }

    #[test]
    fn reflexive_suite_has_origin_interior() {
        let suite = [
            ToricData::new(vec![vec![1], vec![-1]], vec![1, 1]).unwrap(),
            p2_anticanonical(),
            ToricData::new(
                vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]],
                vec![1, 1, 1, 1],
            )
            .unwrap(),
            ToricData::new(
                vec![
                    vec![1, 0, 0],
                    vec![0, 1, 0],
                    vec![0, 0, 1],
                    vec![-1, -1, -1],
                ],
                vec![1, 1, 1, 1],
            )
            .unwrap(),
        ];
        for t in &suite {
            let p = polytope_from_toric(t).unwrap();
            assert_eq!(p.interior_points(), &[vec![0i64; t.dim()]]);
        }
    }

    #[test]
    fn faces_of_triangle() {
        let p = polytope_from_toric(&p2_anticanonical()).unwrap();
        let faces = p.faces();
        // 3 vertices + 3 edges + the triangle itself
        assert_eq!(faces.len(), 7);
        assert_eq!(faces.iter().filter(|f| f.dim == 0).count(), 3);
        assert_eq!(faces.iter().filter(|f| f.dim == 1).count(), 3);
        assert_eq!(faces.iter().filter(|f| f.dim == 2).count(), 1);
        for f in faces.iter().filter(|f| f.dim == 1) {
            // each edge of the anticanonical triangle has 4 lattice points
            assert_eq!(f.points.len(), 4);
            let base = f.points[0].clone();
            let coords: Vec<Vec<i64>> = f
                .points
                .iter()
                .map(|u| f.local_coordinates(u).unwrap())
                .collect();
            assert_eq!(f.local_coordinates(&base).unwrap(), vec![0]);
            let mut sorted: Vec<i64> = coords.iter().map(|c| c[0]).collect();
            sorted.sort();
            let span = sorted[3] - sorted[0];
            assert_eq!(span, 3);
        }
    }

    #[test]
    fn interior_subset_of_lattice_points() {
        let p = polytope_from_toric(&p2_anticanonical()).unwrap();
        for v in p.interior_points() {
            assert!(p.lattice_points().contains(v));
        }
        for v in p.integer_vertices() {
            assert!(p.lattice_points().contains(&v));
        }
    }

    #[test]
    fn unimodular_invariance() {
        // lattice points of the transformed polytope = transformed points
        let t = p2_anticanonical();
        let p = polytope_from_toric(&t).unwrap();
        // A in SL(2,Z), points map v -> A v, normals map n -> (A^-1)^T n
        let mats: [[[i64; 2]; 2]; 3] = [
            [[1, 1], [0, 1]],
            [[2, 1], [1, 1]],
            [[0, -1], [1, 0]],
        ];
        for a in mats {
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            assert_eq!(det.abs(), 1);
            // (A^-1)^T for det = +-1
            let ait = [
                [a[1][1] * det, -a[1][0] * det],
                [-a[0][1] * det, a[0][0] * det],
            ];
            let facets: Vec<(Vec<i64>, i64)> = p
                .facets()
                .iter()
                .map(|(n, k)| {
                    (
                        vec![
                            ait[0][0] * n[0] + ait[0][1] * n[1],
                            ait[1][0] * n[0] + ait[1][1] * n[1],
                        ],
                        *k,
                    )
                })
                .collect();
            let q = LatticePolytope::from_facets(2, facets).unwrap();
            let mut mapped: Vec<Vec<i64>> = p
                .lattice_points()
                .iter()
                .map(|v| {
                    vec![
                        a[0][0] * v[0] + a[0][1] * v[1],
                        a[1][0] * v[0] + a[1][1] * v[1],
                    ]
                })
                .collect();
            mapped.sort();
            assert_eq!(q.lattice_points(), &mapped[..]);
        }
    }
}
