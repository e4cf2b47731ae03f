//! Convex hulls of finite point sets in three dimensions.
//!
//! The hull is built in floating point (incremental algorithm); facet
//! incidences are then rechecked with exact rational planes through the
//! float vertices.

use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

use crate::rational::{rat_from_f64, rat_to_f64};

type P3 = [f64; 3];

fn sub(a: &P3, b: &P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &P3, b: &P3) -> P3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &P3, b: &P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &P3) -> f64 {
    dot(a, a).sqrt()
}

/// Halfspace `normal · x ≤ offset` with a unit normal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Halfspace {
    pub normal: P3,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hull3 {
    pub vertices: Vec<P3>,
    /// Triangles over `vertices`, counter-clockwise seen from outside.
    /// Lower-dimensional hulls carry a triangulation of the polygon (or none).
    pub facets: Vec<[usize; 3]>,
    pub halfspaces: Vec<Halfspace>,
    /// Affine dimension of the input: 0 to 3.
    pub dimension: usize,
    /// Largest exact excess of an input point over a facet plane (zero
    /// when every incidence checked out exactly).
    pub exact_excess: f64,
    pub exactly_verified: bool,
}

impl Hull3 {
    pub fn contains(&self, p: &P3, tol: f64) -> bool {
        self.halfspaces.iter().all(|h| dot(&h.normal, p) <= h.offset + tol)
    }

    /// Largest halfspace violation of `p` (zero inside).
    pub fn violation(&self, p: &P3) -> f64 {
        self.halfspaces.iter().map(|h| dot(&h.normal, p) - h.offset).fold(0.0, f64::max)
    }

    /// `max_v d · v`; `-inf` for an empty hull.
    pub fn support(&self, d: &P3) -> f64 {
        self.vertices.iter().map(|v| dot(d, v)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = std::collections::BTreeSet::new();
        for f in &self.facets {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.vertices.len() as i64 - edges.len() as i64 + self.facets.len() as i64
    }

    pub fn to_off(&self) -> String {
        let mut out = format!("OFF\n{} {} 0\n", self.vertices.len(), self.facets.len());
        for v in &self.vertices {
            out.push_str(&format!("{} {} {}\n", v[0], v[1], v[2]));
        }
        for f in &self.facets {
            out.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

struct Face {
    v: [usize; 3],
    normal: P3,
    offset: f64,
    alive: bool,
}

fn make_face(pts: &[P3], v: [usize; 3]) -> Face {
    let n = cross(&sub(&pts[v[1]], &pts[v[0]]), &sub(&pts[v[2]], &pts[v[0]]));
    let len = norm(&n);
    let normal = if len > 0.0 { [n[0] / len, n[1] / len, n[2] / len] } else { n };
    Face { v, normal, offset: dot(&normal, &pts[v[0]]), alive: true }
}

/// Points with exact duplicates removed, in first-seen order.
fn dedup(points: &[P3]) -> Vec<P3> {
    let mut out: Vec<P3> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for p in points {
        let key = (p[0].to_bits(), p[1].to_bits(), p[2].to_bits());
        if seen.insert(key) {
            out.push(*p);
        }
    }
    out
}

fn farthest(pts: &[P3], f: impl Fn(&P3) -> f64) -> (usize, f64) {
    pts.iter().enumerate().map(|(i, p)| (i, f(p))).fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc })
}

/// Convex hull of `points`; lower-dimensional inputs are flagged through
/// `dimension`.
pub fn hull3(points: &[P3]) -> Hull3 {
    let pts = dedup(points);
    let scale = pts.iter().flat_map(|p| p.iter()).fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let eps = 1e-11 * scale;
    if pts.is_empty() {
        return Hull3 { vertices: vec![], facets: vec![], halfspaces: vec![], dimension: 0, exact_excess: 0.0, exactly_verified: true };
    }
    let p0 = 0;
    let (p1, d1) = farthest(&pts, |p| norm(&sub(p, &pts[p0])));
    if d1 <= eps {
        return point_hull(pts[p0]);
    }
    let dir = sub(&pts[p1], &pts[p0]);
    let (p2, d2) = farthest(&pts, |p| norm(&cross(&dir, &sub(p, &pts[p0]))) / norm(&dir));
    if d2 <= eps {
        return segment_hull(&pts, p0, p1);
    }
    let plane_n = cross(&dir, &sub(&pts[p2], &pts[p0]));
    let plane_len = norm(&plane_n);
    let (p3, d3) = farthest(&pts, |p| (dot(&plane_n, &sub(p, &pts[p0])) / plane_len).abs());
    if d3 <= eps {
        return planar_hull(&pts, p0, plane_n);
    }
    // initial tetrahedron, oriented outward
    let centroid = {
        let s = [p0, p1, p2, p3].iter().fold([0.0; 3], |acc, &i| [acc[0] + pts[i][0], acc[1] + pts[i][1], acc[2] + pts[i][2]]);
        [s[0] / 4.0, s[1] / 4.0, s[2] / 4.0]
    };
    let mut faces: Vec<Face> = Vec::new();
    for tri in [[p0, p1, p2], [p0, p1, p3], [p0, p2, p3], [p1, p2, p3]] {
        let mut f = make_face(&pts, tri);
        if dot(&f.normal, &centroid) > f.offset {
            f = make_face(&pts, [tri[0], tri[2], tri[1]]);
        }
        faces.push(f);
    }
    for (i, p) in pts.iter().enumerate() {
        if [p0, p1, p2, p3].contains(&i) {
            continue;
        }
        let visible: Vec<usize> = (0..faces.len()).filter(|&f| faces[f].alive && dot(&faces[f].normal, p) - faces[f].offset > eps).collect();
        if visible.is_empty() {
            continue;
        }
        let mut edges = std::collections::BTreeSet::new();
        for &f in &visible {
            let v = faces[f].v;
            for k in 0..3 {
                edges.insert((v[k], v[(k + 1) % 3]));
            }
            faces[f].alive = false;
        }
        let horizon: Vec<(usize, usize)> = edges.iter().filter(|(a, b)| !edges.contains(&(*b, *a))).copied().collect();
        for (a, b) in horizon {
            faces.push(make_face(&pts, [a, b, i]));
        }
    }
    let live: Vec<&Face> = faces.iter().filter(|f| f.alive).collect();
    let mut index = vec![usize::MAX; pts.len()];
    let mut vertices = Vec::new();
    for f in &live {
        for &v in &f.v {
            if index[v] == usize::MAX {
                index[v] = vertices.len();
                vertices.push(pts[v]);
            }
        }
    }
    let facets: Vec<[usize; 3]> = live.iter().map(|f| [index[f.v[0]], index[f.v[1]], index[f.v[2]]]).collect();
    let halfspaces = live.iter().map(|f| Halfspace { normal: f.normal, offset: f.offset }).collect();
    let mut hull = Hull3 { vertices, facets, halfspaces, dimension: 3, exact_excess: 0.0, exactly_verified: true };
    verify_exact(&mut hull, &pts);
    hull
}

/// Rechecks every input point against the exact plane of every facet.
fn verify_exact(hull: &mut Hull3, pts: &[P3]) {
    if hull.facets.len() * pts.len() > 4_000_000 {
        hull.exactly_verified = false;
        return;
    }
    let exact: Vec<[BigRational; 3]> = pts.iter().map(|p| [rat_from_f64(p[0]), rat_from_f64(p[1]), rat_from_f64(p[2])]).collect();
    let verts: Vec<[BigRational; 3]> = hull.vertices.iter().map(|p| [rat_from_f64(p[0]), rat_from_f64(p[1]), rat_from_f64(p[2])]).collect();
    let mut worst = 0.0f64;
    let mut ok = true;
    for f in &hull.facets {
        let (a, b, c) = (&verts[f[0]], &verts[f[1]], &verts[f[2]]);
        let u: Vec<BigRational> = (0..3).map(|k| &b[k] - &a[k]).collect();
        let w: Vec<BigRational> = (0..3).map(|k| &c[k] - &a[k]).collect();
        let n = [&u[1] * &w[2] - &u[2] * &w[1], &u[2] * &w[0] - &u[0] * &w[2], &u[0] * &w[1] - &u[1] * &w[0]];
        let off: BigRational = (0..3).map(|k| &n[k] * &a[k]).sum();
        let nlen = (0..3).map(|k| rat_to_f64(&n[k]).powi(2)).sum::<f64>().sqrt();
        for p in &exact {
            let s: BigRational = (0..3).map(|k| &n[k] * &p[k]).sum::<BigRational>() - &off;
            if s.is_positive() {
                ok = false;
                if nlen > 0.0 {
                    worst = worst.max(rat_to_f64(&s) / nlen);
                }
            }
        }
    }
    hull.exact_excess = worst;
    hull.exactly_verified = ok;
}

fn point_hull(p: P3) -> Hull3 {
    let mut halfspaces = Vec::new();
    for k in 0..3 {
        let mut n = [0.0; 3];
        n[k] = 1.0;
        halfspaces.push(Halfspace { normal: n, offset: p[k] });
        n[k] = -1.0;
        halfspaces.push(Halfspace { normal: n, offset: -p[k] });
    }
    Hull3 { vertices: vec![p], facets: vec![], halfspaces, dimension: 0, exact_excess: 0.0, exactly_verified: true }
}

/// Two unit vectors orthogonal to `n` and each other.
fn plane_basis(n: &P3) -> (P3, P3) {
    let len = norm(n);
    let n = [n[0] / len, n[1] / len, n[2] / len];
    let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let u = cross(&n, &helper);
    let ul = norm(&u);
    let u = [u[0] / ul, u[1] / ul, u[2] / ul];
    (u, cross(&n, &u))
}

fn segment_hull(pts: &[P3], p0: usize, p1: usize) -> Hull3 {
    let dir = sub(&pts[p1], &pts[p0]);
    let len = norm(&dir);
    let d = [dir[0] / len, dir[1] / len, dir[2] / len];
    let (lo, _) = farthest(pts, |p| -dot(&d, p));
    let (hi, _) = farthest(pts, |p| dot(&d, p));
    let (a, b) = (pts[lo], pts[hi]);
    let (u, w) = plane_basis(&d);
    let mut halfspaces = vec![
        Halfspace { normal: d, offset: dot(&d, &b) },
        Halfspace { normal: [-d[0], -d[1], -d[2]], offset: -dot(&d, &a) },
    ];
    for n in [u, w] {
        halfspaces.push(Halfspace { normal: n, offset: dot(&n, &a) });
        halfspaces.push(Halfspace { normal: [-n[0], -n[1], -n[2]], offset: -dot(&n, &a) });
    }
    Hull3 { vertices: vec![a, b], facets: vec![], halfspaces, dimension: 1, exact_excess: 0.0, exactly_verified: true }
}

fn planar_hull(pts: &[P3], p0: usize, plane_n: P3) -> Hull3 {
    let len = norm(&plane_n);
    let n = [plane_n[0] / len, plane_n[1] / len, plane_n[2] / len];
    let (u, w) = plane_basis(&n);
    let origin = pts[p0];
    let coords: Vec<(f64, f64, usize)> = pts.iter().enumerate().map(|(i, p)| {
        let d = sub(p, &origin);
        (dot(&d, &u), dot(&d, &w), i)
    }).collect();
    let ring = monotone_chain(coords);
    let vertices: Vec<P3> = ring.iter().map(|&i| pts[i]).collect();
    let offset = dot(&n, &origin);
    let mut halfspaces = vec![
        Halfspace { normal: n, offset },
        Halfspace { normal: [-n[0], -n[1], -n[2]], offset: -offset },
    ];
    let m = vertices.len();
    for k in 0..m {
        let edge = sub(&vertices[(k + 1) % m], &vertices[k]);
        let out = cross(&edge, &n);
        let ol = norm(&out);
        let out = [out[0] / ol, out[1] / ol, out[2] / ol];
        halfspaces.push(Halfspace { normal: out, offset: dot(&out, &vertices[k]) });
    }
    let facets = (1..m.saturating_sub(1)).map(|k| [0, k, k + 1]).collect();
    Hull3 { vertices, facets, halfspaces, dimension: 2, exact_excess: 0.0, exactly_verified: true }
}

/// Counter-clockwise hull of planar points, returning original indices.
fn monotone_chain(mut pts: Vec<(f64, f64, usize)>) -> Vec<usize> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let turn = |o: &(f64, f64, usize), a: &(f64, f64, usize), b: &(f64, f64, usize)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let scale = pts.iter().fold(1.0f64, |m, p| m.max(p.0.abs()).max(p.1.abs()));
    let eps = 1e-12 * scale * scale;
    let mut lower: Vec<(f64, f64, usize)> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && turn(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= eps {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<(f64, f64, usize)> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && turn(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= eps {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.into_iter().chain(upper).map(|p| p.2).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_and_cube() {
        let h = hull3(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert_eq!((h.vertices.len(), h.facets.len(), h.dimension), (4, 4, 3));
        assert_eq!(h.euler_characteristic(), 2);
        assert!(h.exactly_verified);
        let mut cube: Vec<P3> = (0..8).map(|m| [(m & 1) as f64, ((m >> 1) & 1) as f64, ((m >> 2) & 1) as f64]).collect();
        cube.push([0.5, 0.5, 0.5]);
        let h = hull3(&cube);
        assert_eq!(h.vertices.len(), 8);
        assert!(!h.vertices.contains(&[0.5, 0.5, 0.5]));
        assert_eq!(h.euler_characteristic(), 2);
        assert!(h.contains(&[0.5, 0.5, 0.5], 0.0));
        assert!(!h.contains(&[1.1, 0.5, 0.5], 1e-9));
        assert!((h.support(&[1.0, 1.0, 1.0]) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        let h = hull3(&[[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]]);
        assert_eq!(h.dimension, 0);
        let h = hull3(&[[0.0, 0.0, 0.0], [1.0, 1.0, 0.0], [2.0, 2.0, 0.0]]);
        assert_eq!(h.dimension, 1);
        assert_eq!(h.vertices.len(), 2);
        assert!(h.contains(&[0.5, 0.5, 0.0], 1e-12));
        assert!(!h.contains(&[0.5, 0.6, 0.0], 1e-9));
        let h = hull3(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.2, 0.2, 0.0], [1.0, 1.0, 0.0]]);
        assert_eq!(h.dimension, 2);
        assert_eq!(h.vertices.len(), 4);
        assert!(h.contains(&[0.5, 0.5, 0.0], 1e-12));
        assert!(!h.contains(&[0.5, 0.5, 0.01], 1e-9));
        assert!(h.to_off().starts_with("OFF\n4 2 0\n"));
    }
}
