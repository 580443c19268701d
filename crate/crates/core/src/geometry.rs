//! Small computational-geometry kit: Wolfe's minimum-norm-point method driven
//! by a linear minimization oracle, and 2-D polygon predicates.

use nalgebra::{DMatrix, DVector};

use crate::linalg::C64;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Result of a minimum-norm-point search over the convex hull of an oracle's atoms.
#[derive(Clone, Debug)]
pub struct MinNorm<P> {
    /// Closest point of the hull to the origin (approximately).
    pub point: Vec<f64>,
    pub atoms: Vec<(Vec<f64>, P)>,
    pub weights: Vec<f64>,
    /// Best certified lower bound on the distance: ⟨u, c⟩ ≥ lower_bound for all hull points c.
    pub lower_bound: f64,
    /// Unit direction achieving `lower_bound`.
    pub direction: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl<P> MinNorm<P> {
    pub fn distance_upper(&self) -> f64 {
        norm(&self.point)
    }
}

/// Affine minimizer of ‖Σ αᵢ qᵢ‖ subject to Σ αᵢ = 1.
fn affine_minimizer(q: &[Vec<f64>]) -> Vec<f64> {
    let k = q.len();
    if k == 1 {
        return vec![1.0];
    }
    let dim = q[0].len();
    let d = DMatrix::from_fn(dim, k - 1, |r, c| q[c + 1][r] - q[0][r]);
    let q0 = DVector::from_column_slice(&q[0]);
    let rhs = -(d.transpose() * &q0);
    let g = d.transpose() * &d;
    let beta = match g.clone().svd(true, true).solve(&rhs, 1e-14 * (1.0 + g.norm())) {
        Ok(b) => b,
        Err(_) => DVector::zeros(k - 1),
    };
    let mut alpha = vec![0.0; k];
    alpha[0] = 1.0 - beta.sum();
    for i in 1..k {
        alpha[i] = beta[i - 1];
    }
    alpha
}

/// Removes one atom along an affine dependency while keeping the combination fixed.
/// Degenerate corrals otherwise grow without bound.
fn caratheodory_step<P>(atoms: &mut Vec<(Vec<f64>, P)>, w: &mut Vec<f64>) {
    let k = atoms.len();
    let dim = atoms[0].0.len();
    let m = DMatrix::from_fn(dim + 1, k, |r, c| if r < dim { atoms[c].0[r] } else { 1.0 });
    let svd = (m.transpose() * &m).symmetric_eigen();
    let j = (0..k).min_by(|&a, &b| svd.eigenvalues[a].total_cmp(&svd.eigenvalues[b])).unwrap_or(0);
    let mut z: Vec<f64> = svd.eigenvectors.column(j).iter().copied().collect();
    if z.iter().all(|&v| v <= 0.0) {
        z.iter_mut().for_each(|v| *v = -*v);
    }
    let (mut t, mut drop) = (f64::INFINITY, 0);
    for i in 0..k {
        if z[i] > 0.0 && w[i] / z[i] < t {
            t = w[i] / z[i];
            drop = i;
        }
    }
    if t.is_finite() {
        for i in 0..k {
            w[i] -= t * z[i];
        }
    }
    w[drop] = 0.0;
    atoms.remove(drop);
    w.remove(drop);
    let tot: f64 = w.iter().map(|v| v.max(0.0)).sum();
    for wi in w.iter_mut() {
        *wi = wi.max(0.0) / tot;
    }
}

fn combine<P>(atoms: &[(Vec<f64>, P)], w: &[f64], dim: usize) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    for ((a, _), wi) in atoms.iter().zip(w) {
        for (xi, ai) in x.iter_mut().zip(a) {
            *xi += wi * ai;
        }
    }
    x
}

/// Wolfe's method for min ‖c‖ over c in the convex hull of all atoms the oracle
/// can return. `lmo(x)` must return an atom minimizing ⟨x, ·⟩.
///
/// Stops when the hull point is within `zero_tol` of the origin, when the
/// Wolfe gap ‖x‖² − ⟨x, s⟩ falls below `rel_tol`·‖x‖², or after `max_iter`
/// major cycles.
pub fn wolfe_min_norm<P: Clone>(
    start: (Vec<f64>, P),
    mut lmo: impl FnMut(&[f64]) -> (Vec<f64>, P),
    max_iter: usize,
    rel_tol: f64,
    zero_tol: f64,
) -> MinNorm<P> {
    let dim = start.0.len();
    let mut atoms = vec![start];
    let mut w = vec![1.0];
    let mut x = atoms[0].0.clone();
    let mut best_lb = f64::NEG_INFINITY;
    let mut best_dir = vec![0.0; dim];
    let mut converged = false;
    let mut it = 0;
    while it < max_iter {
        it += 1;
        let nx = norm(&x);
        if nx <= zero_tol {
            converged = true;
            break;
        }
        let (s, payload) = lmo(&x);
        let xs = dot(&x, &s);
        let lb = xs / nx;
        if lb > best_lb {
            best_lb = lb;
            best_dir = x.iter().map(|v| v / nx).collect();
        }
        let scale = atoms.iter().map(|(a, _)| dot(a, a)).fold(dot(&s, &s), f64::max);
        if nx * nx - xs <= rel_tol * nx * nx.max(1e-300) || nx * nx - xs <= 1e-15 * scale {
            converged = true;
            break;
        }
        if atoms.iter().any(|(a, _)| a.iter().zip(&s).all(|(u, v)| (u - v).abs() <= 1e-15 * (1.0 + u.abs()))) {
            // Oracle returned an atom already in the corral: numerically optimal.
            converged = true;
            break;
        }
        atoms.push((s, payload));
        w.push(0.0);
        // Minor cycles.
        loop {
            let pts: Vec<Vec<f64>> = atoms.iter().map(|(a, _)| a.clone()).collect();
            let alpha = affine_minimizer(&pts);
            if alpha.iter().all(|&a| a > 1e-14) {
                w = alpha;
                break;
            }
            let mut theta = 1.0f64;
            let mut blocking = None;
            for (i, (wi, ai)) in w.iter().zip(&alpha).enumerate() {
                if *ai <= 1e-14 && wi - ai > 0.0 && wi / (wi - ai) <= theta {
                    theta = wi / (wi - ai);
                    blocking = Some(i);
                }
            }
            for (wi, ai) in w.iter_mut().zip(&alpha) {
                *wi = *wi + theta * (ai - *wi);
            }
            // Rounding can leave the blocking weight slightly positive; drop it so every
            // minor cycle shrinks the corral.
            if let Some(i) = blocking {
                w[i] = 0.0;
            }
            let mut k = 0;
            while k < atoms.len() {
                if w[k] <= 1e-14 {
                    atoms.remove(k);
                    w.remove(k);
                } else {
                    k += 1;
                }
            }
            if atoms.is_empty() {
                break;
            }
            let tot: f64 = w.iter().sum();
            for wi in w.iter_mut() {
                *wi /= tot;
            }
            if atoms.len() == 1 {
                w = vec![1.0];
                break;
            }
        }
        while atoms.len() > dim + 1 {
            caratheodory_step(&mut atoms, &mut w);
        }
        x = combine(&atoms, &w, dim);
    }
    MinNorm { point: x, atoms, weights: w, lower_bound: best_lb, direction: best_dir, iterations: it, converged }
}

/// Minimum-norm point of the hull of a finite point set.
pub fn min_norm_in_hull(points: &[Vec<f64>]) -> MinNorm<usize> {
    let start = points
        .iter()
        .enumerate()
        .min_by(|a, b| norm(a.1).total_cmp(&norm(b.1)))
        .map(|(i, p)| (p.clone(), i))
        .expect("nonempty point set");
    wolfe_min_norm(
        start,
        |x| {
            let (i, p) = points.iter().enumerate().min_by(|a, b| dot(x, a.1).total_cmp(&dot(x, b.1))).unwrap();
            (p.clone(), i)
        },
        1000,
        1e-15,
        1e-15,
    )
}

/// Euclidean distance from `q` to the convex hull of `points`.
pub fn dist_to_hull(q: &[f64], points: &[Vec<f64>]) -> f64 {
    let shifted: Vec<Vec<f64>> = points.iter().map(|p| p.iter().zip(q).map(|(a, b)| a - b).collect()).collect();
    min_norm_in_hull(&shifted).distance_upper()
}

// ---------------------------------------------------------------- 2-D polygons

pub fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Distance from p to segment [a, b].
pub fn seg_dist(p: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / l2).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

fn edges(poly: &[C64], closed: bool) -> impl Iterator<Item = (C64, C64)> + '_ {
    let n = poly.len();
    let m = if closed { n } else { n.saturating_sub(1) };
    (0..m).map(move |i| (poly[i], poly[(i + 1) % n]))
}

/// Distance from p to a polyline (closed or open). Single-vertex polylines are points.
pub fn polyline_dist(p: C64, poly: &[C64], closed: bool) -> f64 {
    if poly.len() == 1 {
        return (p - poly[0]).norm();
    }
    edges(poly, closed).map(|(a, b)| seg_dist(p, a, b)).fold(f64::INFINITY, f64::min)
}

/// Winding-number containment (boundary points count as inside within tol).
pub fn point_in_polygon(p: C64, poly: &[C64], tol: f64) -> bool {
    if poly.is_empty() {
        return false;
    }
    if polyline_dist(p, poly, true) <= tol {
        return true;
    }
    if poly.len() < 3 {
        return false;
    }
    let mut wn = 0i32;
    for (a, b) in edges(poly, true) {
        if a.im <= p.im {
            if b.im > p.im && cross(b - a, p - a) > 0.0 {
                wn += 1;
            }
        } else if b.im <= p.im && cross(b - a, p - a) < 0.0 {
            wn -= 1;
        }
    }
    wn != 0
}

/// Positive inside (distance to boundary), negative outside.
pub fn signed_polygon_margin(p: C64, poly: &[C64]) -> f64 {
    let d = polyline_dist(p, poly, true);
    if point_in_polygon(p, poly, 0.0) {
        d
    } else {
        -d
    }
}

pub fn segments_intersect(a: C64, b: C64, c: C64, d: C64) -> bool {
    let o1 = cross(b - a, c - a);
    let o2 = cross(b - a, d - a);
    let o3 = cross(d - c, a - c);
    let o4 = cross(d - c, b - c);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
        return true;
    }
    let eps = 1e-14 * (1.0 + a.norm() + b.norm() + c.norm() + d.norm());
    seg_dist(c, a, b) <= eps || seg_dist(d, a, b) <= eps || seg_dist(a, c, d) <= eps || seg_dist(b, c, d) <= eps
}

/// Edge crossing plus containment probes.
pub fn polygons_intersect(p: &[C64], q: &[C64]) -> bool {
    for (a, b) in edges(p, p.len() > 2) {
        for (c, d) in edges(q, q.len() > 2) {
            if segments_intersect(a, b, c, d) {
                return true;
            }
        }
    }
    if p.len() == 1 && q.len() == 1 {
        return (p[0] - q[0]).norm() <= 1e-14;
    }
    p.iter().any(|&v| point_in_polygon(v, q, 0.0)) || q.iter().any(|&v| point_in_polygon(v, p, 0.0))
}

/// Minimum distance between the boundaries of two polygons (0 if they intersect).
pub fn polygon_distance(p: &[C64], q: &[C64]) -> f64 {
    if polygons_intersect(p, q) {
        return 0.0;
    }
    let a = p.iter().map(|&v| polyline_dist(v, q, q.len() > 2)).fold(f64::INFINITY, f64::min);
    let b = q.iter().map(|&v| polyline_dist(v, p, p.len() > 2)).fold(f64::INFINITY, f64::min);
    a.min(b)
}

/// Andrew's monotone chain; counterclockwise, without repeated endpoint.
pub fn convex_hull_2d(pts: &[C64]) -> Vec<C64> {
    let mut v: Vec<C64> = pts.to_vec();
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v.dedup_by(|a, b| (*a - *b).norm() <= 1e-14);
    if v.len() < 3 {
        return v;
    }
    let mut lower: Vec<C64> = Vec::new();
    for &p in &v {
        while lower.len() >= 2 && cross(lower[lower.len() - 1] - lower[lower.len() - 2], p - lower[lower.len() - 2]) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<C64> = Vec::new();
    for &p in v.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 1] - upper[upper.len() - 2], p - upper[upper.len() - 2]) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn signed_area(poly: &[C64]) -> f64 {
    0.5 * edges(poly, true).map(|(a, b)| cross(a, b)).sum::<f64>()
}

/// Symmetric Hausdorff distance between two polylines, sampled on vertices and edge interiors.
pub fn hausdorff_polylines(p: &[C64], q: &[C64], closed: bool) -> f64 {
    fn directed(p: &[C64], q: &[C64], closed: bool) -> f64 {
        let mut worst: f64 = 0.0;
        let mut probe = |v: C64| worst = worst.max(polyline_dist(v, q, closed));
        for &v in p {
            probe(v);
        }
        for (a, b) in edges(p, closed && p.len() > 2) {
            for t in [0.25, 0.5, 0.75] {
                probe(a + (b - a) * t);
            }
        }
        worst
    }
    directed(p, q, closed).max(directed(q, p, closed))
}

/// Symmetric Hausdorff distance between finite point sets in ℝᵈ.
pub fn hausdorff_points(p: &[Vec<f64>], q: &[Vec<f64>]) -> f64 {
    fn directed(p: &[Vec<f64>], q: &[Vec<f64>]) -> f64 {
        p.iter()
            .map(|a| {
                q.iter()
                    .map(|b| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
    directed(p, q).max(directed(q, p))
}

/// Golden-section maximization of a unimodal function on [a, b].
pub fn golden_max(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, iters: usize) -> (f64, f64) {
    let (x, v) = golden_min(|t| -f(t), a, b, iters);
    (x, -v)
}

/// Golden-section minimization on [a, b]; returns the best evaluated point.
pub fn golden_min(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let (mut bx, mut bv) = if fc <= fd { (c, fc) } else { (d, fd) };
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
            if fc < bv {
                bx = c;
                bv = fc;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
            if fd < bv {
                bx = d;
                bv = fd;
            }
        }
    }
    (bx, bv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    #[test]
    fn min_norm_simplex_cases() {
        // Segment from (1,-1) to (1,1): closest point (1,0).
        let r = min_norm_in_hull(&[vec![1.0, -1.0], vec![1.0, 1.0]]);
        assert!((r.point[0] - 1.0).abs() < 1e-12 && r.point[1].abs() < 1e-12);
        assert!((r.lower_bound - 1.0).abs() < 1e-12);
        // Triangle containing the origin.
        let r = min_norm_in_hull(&[vec![1.0, 0.0], vec![-1.0, 1.0], vec![-1.0, -1.0]]);
        assert!(r.distance_upper() < 1e-12);
    }

    // Oracle: brute-force distance over a fine grid of barycentric weights.
    #[test]
    fn min_norm_against_brute_force() {
        use rand::Rng;
        let mut rng = crate::linalg::rng_from_seed(7);
        for _ in 0..50 {
            let pts: Vec<Vec<f64>> = (0..4).map(|_| (0..3).map(|_| rng.random_range(-1.0..3.0)).collect()).collect();
            let r = min_norm_in_hull(&pts);
            let mut best = f64::INFINITY;
            let steps = 40;
            for i in 0..=steps {
                for j in 0..=(steps - i) {
                    for k in 0..=(steps - i - j) {
                        let l = steps - i - j - k;
                        let w = [i, j, k, l].map(|v| v as f64 / steps as f64);
                        let p: Vec<f64> = (0..3).map(|d| (0..4).map(|m| w[m] * pts[m][d]).sum()).collect();
                        best = best.min(norm(&p));
                    }
                }
            }
            assert!(r.distance_upper() <= best + 1e-12);
            assert!(r.distance_upper() >= best - 0.2);
            if r.lower_bound > 0.0 {
                assert!(r.lower_bound <= r.distance_upper() + 1e-12);
            }
        }
    }

    #[test]
    fn polygon_predicates() {
        let sq = vec![c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 1.0), c64(0.0, 1.0)];
        assert!(point_in_polygon(c64(0.5, 0.5), &sq, 0.0));
        assert!(!point_in_polygon(c64(1.5, 0.5), &sq, 0.0));
        assert!(point_in_polygon(c64(1.0, 0.5), &sq, 1e-12));
        assert!((signed_polygon_margin(c64(0.5, 0.25), &sq) - 0.25).abs() < 1e-14);
        let sq2: Vec<C64> = sq.iter().map(|v| v + c64(3.0, 0.0)).collect();
        assert!(!polygons_intersect(&sq, &sq2));
        assert!((polygon_distance(&sq, &sq2) - 2.0).abs() < 1e-14);
        let sq3: Vec<C64> = sq.iter().map(|v| v * 0.2 + c64(0.4, 0.4)).collect();
        assert!(polygons_intersect(&sq, &sq3));
        assert!((signed_area(&sq) - 1.0).abs() < 1e-14);
        let hull = convex_hull_2d(&[c64(0.0, 0.0), c64(1.0, 0.0), c64(0.5, 0.2), c64(1.0, 1.0), c64(0.0, 1.0)]);
        assert_eq!(hull.len(), 4);
        assert!(hausdorff_polylines(&sq, &hull, true) < 1e-14);
    }

    #[test]
    fn golden_section() {
        let (x, v) = golden_min(|t| (t - 0.3) * (t - 0.3) + 1.0, -2.0, 2.0, 80);
        assert!((x - 0.3).abs() < 1e-7 && (v - 1.0).abs() < 1e-13);
        let (x, _) = golden_max(|t| -(t - 1.1).abs(), 0.0, 4.0, 100);
        assert!((x - 1.1).abs() < 1e-12);
    }
}
