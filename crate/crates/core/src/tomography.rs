//! Cross sections of DW shells by vertical planes.
//!
//! The slice problem max/min x*(A*A)x s.t. x*Mx = k, ‖x‖ = 1 with
//! M = H(e^{−iθ}A) is solved through the scalar dual
//! min_y y·k + λmax(Q − yM); the rank-one witness is recovered from the top
//! eigenspace at the optimal multiplier. θ-SRGs are assembled slice by slice,
//! and a second route through the vertical numerical range
//! W(H(e^{−iθ}A) + i·A*A) serves as a cross-check.

use serde::{Deserialize, Serialize};

use crate::error::{DwError, Result};
use crate::geometry::cross;
use crate::graphs::{numerical_range_boundary, BoundaryCurve2D};
use crate::linalg::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Max,
    Min,
}

#[derive(Clone, Debug)]
pub struct CrossSectionProblem {
    pub a: ComplexMatrix,
    pub theta: f64,
    pub k: f64,
    pub orientation: Orientation,
}

#[derive(Clone, Debug)]
pub struct DualSolveResult {
    pub value: f64,
    /// Optimal dual variable; `None` when the slice sits on an eigen-extreme of M
    /// and the dual infimum is only approached asymptotically.
    pub multiplier: Option<f64>,
    pub witness: CVec,
    /// |witness objective − value|.
    pub gap: f64,
    /// Constraint residual |x*Mx − k| of the witness.
    pub residual: f64,
}

impl DualSolveResult {
    fn negated(mut self) -> Self {
        self.value = -self.value;
        self.multiplier = self.multiplier.map(|y| -y);
        self
    }
}

/// The Hermitian pair (Q, M) of a vertical slice family together with the spectral interval of M.
#[derive(Clone, Debug)]
pub struct SliceFamily {
    pub q: CMat,
    pub m: CMat,
    pub lo: f64,
    pub hi: f64,
    m_vals: Vec<f64>,
    m_vecs: CMat,
}

impl SliceFamily {
    pub fn new(q: CMat, m: CMat) -> Self {
        let (m_vals, m_vecs) = eigh(&m);
        let lo = m_vals[0];
        let hi = m_vals[m_vals.len() - 1];
        Self { q, m, lo, hi, m_vals, m_vecs }
    }

    pub fn for_theta(a: &ComplexMatrix, theta: f64) -> Self {
        Self::new(a.gram(), rotated_herm(a.mat(), theta))
    }

    fn scale(&self) -> f64 {
        1.0 + self.lo.abs() + self.hi.abs()
    }

    /// Solve max (or min) of x*Qx on the slice x*Mx = k.
    pub fn solve(&self, k: f64, orientation: Orientation) -> Result<DualSolveResult> {
        match orientation {
            Orientation::Max => dual_max(&self.q, self, k),
            Orientation::Min => dual_max(&(-&self.q), self, k).map(DualSolveResult::negated),
        }
    }

    /// Eigenvectors of M for eigenvalues within `tol` of `target`.
    fn extreme_space(&self, target: f64, tol: f64) -> CMat {
        let cols: Vec<CVec> = self
            .m_vals
            .iter()
            .enumerate()
            .filter(|(_, &v)| (v - target).abs() <= tol)
            .map(|(i, _)| self.m_vecs.column(i).into_owned())
            .collect();
        CMat::from_columns(&cols)
    }
}

pub fn cross_section_extremum(prob: &CrossSectionProblem) -> Result<DualSolveResult> {
    SliceFamily::for_theta(&prob.a, prob.theta).solve(prob.k, prob.orientation)
}

/// y·k + λmax(Q − yM), with the top eigenvector and the subgradient k − v*Mv.
fn dual_eval(q: &CMat, m: &CMat, k: f64, y: f64) -> (f64, CVec, f64) {
    let (lam, v) = top_eig(&(q - m * c64(y, 0.0)));
    let g = k - quad_re(&v, m);
    (y * k + lam, v, g)
}

/// Minimizer of the convex dual: golden-section on the value, then bisection
/// on the sign of the subgradient inside the final golden bracket.
fn dual_argmin(q: &CMat, fam: &SliceFamily, k: f64) -> Result<f64> {
    let m = &fam.m;
    let spread = fam.hi - fam.lo;
    let qn = q.norm();
    let mut b = 10.0 * (qn + k.abs() + 1.0) / spread.max(1e-8);
    let mut ok = false;
    for _ in 0..64 {
        let gl = dual_eval(q, m, k, -b).2;
        let gr = dual_eval(q, m, k, b).2;
        if gl <= 0.0 && gr >= 0.0 {
            ok = true;
            break;
        }
        b *= 2.0;
    }
    if !ok {
        return Err(DwError::SolverFailure(format!(
            "dual bracket blow-up: k = {k}, spectral interval [{}, {}], bracket {b:e}",
            fam.lo, fam.hi
        )));
    }
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (-b, b);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let mut fc = dual_eval(q, m, k, c).0;
    let mut fd = dual_eval(q, m, k, d).0;
    for _ in 0..40 {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = dual_eval(q, m, k, c).0;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = dual_eval(q, m, k, d).0;
        }
    }
    // Golden section on a convex function keeps the minimizer inside [lo, hi]
    // up to rounding; fall back to the full bracket if the signs disagree.
    let (mut a, mut z) = (lo, hi);
    if dual_eval(q, m, k, a).2 > 0.0 || dual_eval(q, m, k, z).2 < 0.0 {
        a = -b;
        z = b;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + z);
        if mid <= a || mid >= z || z - a <= 4.0 * f64::EPSILON * (1.0 + a.abs().max(z.abs())) {
            break;
        }
        if dual_eval(q, m, k, mid).2 < 0.0 {
            a = mid;
        } else {
            z = mid;
        }
    }
    Ok(0.5 * (a + z))
}

/// Rank-one recovery: smallest top-eigenspace of Q − y*M whose compression of M covers k,
/// rotated between the extreme Rayleigh vectors of that compression.
fn recover_witness(q: &CMat, m: &CMat, k: f64, y: f64) -> CVec {
    let n = q.nrows();
    let (vals, vecs) = eigh(&(q - m * c64(y, 0.0)));
    let top = vals[n - 1];
    let scale = 1.0 + vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let ktol = 1e-12 * (1.0 + k.abs() + m.norm());
    let mut fallback = vecs.column(n - 1).into_owned();
    for dim in 1..=n {
        if dim > 1 && top - vals[n - dim] > 1e-6 * scale {
            break;
        }
        let v = CMat::from_fn(n, dim, |r, c| vecs[(r, n - dim + c)]);
        let mm = v.adjoint() * m * &v;
        let (r, c) = eigh(&mm);
        let (rlo, rhi) = (r[0], r[dim - 1]);
        let clo = &v * c.column(0);
        let chi = &v * c.column(dim - 1);
        if k >= rlo - ktol && k <= rhi + ktol {
            if rhi - rlo <= 1e-300 {
                return clo;
            }
            let s2 = ((k - rlo) / (rhi - rlo)).clamp(0.0, 1.0);
            return clo * c64((1.0 - s2).sqrt(), 0.0) + chi * c64(s2.sqrt(), 0.0);
        }
        fallback = if (rlo - k).abs() < (rhi - k).abs() { clo } else { chi };
    }
    fallback
}

/// Max of x*Qx subject to x*Mx = k (M from `fam`), ‖x‖ = 1.
fn dual_max(q: &CMat, fam: &SliceFamily, k: f64) -> Result<DualSolveResult> {
    let m = &fam.m;
    let scale = fam.scale();
    let spread = fam.hi - fam.lo;
    let ktol = 1e-9 * scale;
    if !k.is_finite() || k < fam.lo - ktol || k > fam.hi + ktol {
        return Err(DwError::Infeasible { k, lo: fam.lo, hi: fam.hi });
    }
    let k = k.clamp(fam.lo, fam.hi);
    let finish = |x: CVec, value: f64, multiplier: Option<f64>| {
        let obj = quad_re(&x, q);
        let residual = (quad_re(&x, m) - k).abs();
        DualSolveResult { value, multiplier, witness: x, gap: (obj - value).abs(), residual }
    };
    if spread <= 1e-12 * scale {
        // Every unit vector is feasible.
        let (val, x) = top_eig(q);
        return Ok(finish(x, val, Some(0.0)));
    }
    let end_tol = 1e-12 * scale;
    for (edge, near) in [(fam.lo, k - fam.lo <= end_tol), (fam.hi, fam.hi - k <= end_tol)] {
        if near {
            let v = fam.extreme_space(edge, 1e-9 * spread.max(1e-300) + 1e-14 * scale);
            let (val, c) = top_eig(&(v.adjoint() * q * &v));
            let x = &v * c;
            return Ok(finish(x, val, None));
        }
    }
    let y = dual_argmin(q, fam, k)?;
    let (value, _, _) = dual_eval(q, m, k, y);
    let x = recover_witness(q, m, k, y);
    Ok(finish(x, value, Some(y)))
}

/// Uniform slice offsets on [lo, hi] with endpoints.
pub fn slice_offsets(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || hi - lo <= 0.0 {
        return vec![lo];
    }
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

/// Map a slice point (offset k, squared gain ν) to e^{iθ}(k + i√(ν − k²)).
pub fn to_srg_point(theta: f64, k: f64, nu: f64) -> C64 {
    cis(theta) * c64(k, (nu - k * k).max(0.0).sqrt())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SliceRecord {
    pub k: f64,
    pub max_value: f64,
    pub min_value: f64,
    pub max_gap: f64,
    pub min_gap: f64,
    pub max_residual: f64,
    pub min_residual: f64,
}

#[derive(Clone, Debug)]
pub struct SrgPlot {
    pub curve: BoundaryCurve2D,
    pub high: Vec<C64>,
    pub low: Vec<C64>,
    pub slices: Vec<SliceRecord>,
}

/// Algorithm 1 with per-slice diagnostics.
pub fn plot_theta_srg_detailed(a: &ComplexMatrix, theta: f64, n: usize) -> Result<SrgPlot> {
    if n < 2 {
        return Err(DwError::InvalidArgument("plot_theta_srg needs N >= 2".into()));
    }
    let fam = SliceFamily::for_theta(a, theta);
    let mut high = Vec::with_capacity(n);
    let mut low: Vec<C64> = Vec::with_capacity(n);
    let mut slices = Vec::with_capacity(n);
    let mut degraded = false;
    for k in slice_offsets(fam.lo, fam.hi, n) {
        let hi = fam.solve(k, Orientation::Max);
        let lo = fam.solve(k, Orientation::Min);
        match (hi, lo) {
            (Ok(h), Ok(l)) => {
                high.push(to_srg_point(theta, k, h.value));
                low.push(to_srg_point(theta, k, l.value));
                slices.push(SliceRecord {
                    k,
                    max_value: h.value,
                    min_value: l.value,
                    max_gap: h.gap,
                    min_gap: l.gap,
                    max_residual: h.residual,
                    min_residual: l.residual,
                });
            }
            _ => degraded = true,
        }
    }
    let mut poly = high.clone();
    poly.extend(low.iter().rev());
    let mut curve = BoundaryCurve2D::closed(poly, Some(theta));
    curve.degraded = degraded;
    Ok(SrgPlot { curve, high, low, slices })
}

/// SRG_{θ+}(A) as a closed polygon (mirror across the θ-axis for the full θ-SRG).
pub fn plot_theta_srg(a: &ComplexMatrix, theta: f64, n: usize) -> Result<BoundaryCurve2D> {
    Ok(plot_theta_srg_detailed(a, theta, n)?.curve)
}

/// Vertical numerical range W↑_θ(A) = W(H(e^{−iθ}A) + i·A*A) as a polygon in the (a, ν) plane.
pub fn vertical_numerical_range(a: &ComplexMatrix, theta: f64, n: usize) -> Result<BoundaryCurve2D> {
    let t = rotated_herm(a.mat(), theta) + a.gram() * I;
    numerical_range_boundary(&ComplexMatrix::new(t)?, n)
}

pub fn plot_theta_srg_via_vnumran(a: &ComplexMatrix, theta: f64, n: usize) -> Result<BoundaryCurve2D> {
    if n < 16 {
        return Err(DwError::InvalidArgument("plot_theta_srg_via_vnumran needs N >= 16".into()));
    }
    let w = vertical_numerical_range(a, theta, n)?;
    let pts = w.vertices.iter().map(|p| to_srg_point(theta, p.re, p.im)).collect();
    Ok(BoundaryCurve2D::closed(pts, Some(theta)))
}

/// Extreme squared gains of W↑_θ(A) on the vertical line a = k, from support lines alone:
/// ν_max(k) = min over φ ∈ (0, π) of (h(φ) − k·cos φ)/sin φ and ν_min(k) = max over φ ∈ (π, 2π).
pub fn vnr_slice_extremes(t: &CMat, k: f64) -> (f64, f64) {
    let h = |phi: f64| lambda_max(&rotated_herm(t, phi));
    let intercept = |phi: f64| (h(phi) - k * phi.cos()) / phi.sin();
    let steps = 720;
    let pi = std::f64::consts::PI;
    let scan = |off: f64, sign: f64| {
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..steps {
            let phi = off + pi * (i as f64 + 0.5) / steps as f64;
            let v = sign * intercept(phi);
            if v < best.0 {
                best = (v, phi);
            }
        }
        let d = pi / steps as f64;
        let lo = (best.1 - d).max(off + 1e-12);
        let hi = (best.1 + d).min(off + pi - 1e-12);
        let (_, v) = crate::geometry::golden_min(|phi| sign * intercept(phi), lo, hi, 80);
        sign * v.min(best.0)
    };
    (scan(0.0, 1.0), scan(pi, -1.0))
}

/// Largest SRG-plane distance between the two plotting routes, each point compared at its own
/// offset k against the other route's exact slice values (no polygon chords involved).
pub fn srg_route_discrepancy(a: &ComplexMatrix, theta: f64, n_slices: usize, n_vnr: usize) -> Result<f64> {
    let fam = SliceFamily::for_theta(a, theta);
    let t = rotated_herm(a.mat(), theta) + a.gram() * I;
    let mut worst: f64 = 0.0;
    for k in slice_offsets(fam.lo, fam.hi, n_slices) {
        let hi = fam.solve(k, Orientation::Max)?.value;
        let lo = fam.solve(k, Orientation::Min)?.value;
        let (vmax, vmin) = vnr_slice_extremes(&t, k);
        worst = worst.max((to_srg_point(theta, k, hi) - to_srg_point(theta, k, vmax)).norm());
        worst = worst.max((to_srg_point(theta, k, lo) - to_srg_point(theta, k, vmin)).norm());
    }
    let w = vertical_numerical_range(a, theta, n_vnr)?;
    for p in &w.vertices {
        let k = p.re.clamp(fam.lo, fam.hi);
        let q = to_srg_point(theta, p.re, p.im);
        let hi = to_srg_point(theta, k, fam.solve(k, Orientation::Max)?.value);
        let lo = to_srg_point(theta, k, fam.solve(k, Orientation::Min)?.value);
        worst = worst.max((q - hi).norm().min((q - lo).norm()));
    }
    Ok(worst)
}

// ------------------------------------------------------------------ SSG

/// Unit x in span{u, v} with x*Tx = w, for w on the segment [u*Tu, v*Tv].
pub fn inverse_nr_segment(t: &CMat, u: &CVec, v: &CVec, w: C64) -> Option<CVec> {
    let pu = quad(u, t);
    let pv = quad(v, t);
    let d = pv - pu;
    if d.norm() <= 1e-14 * (1.0 + pu.norm()) {
        return if (pu - w).norm() <= 1e-10 * (1.0 + w.norm()) { Some(u.clone()) } else { None };
    }
    // Rotate so the segment lies on the real axis with w at the origin.
    let rot = d.conj() / d.norm();
    let n = t.nrows();
    let tt = (t - CMat::identity(n, n) * w) * rot;
    let h = herm(&tt);
    let s = skew_herm(&tt);
    let a0 = quad_re(u, &h);
    let a1 = quad_re(v, &h);
    if a0 > 1e-12 * (1.0 + a0.abs()) || a1 < -1e-12 * (1.0 + a1.abs()) {
        return None;
    }
    // Choose the phase of v so the cross term of the skew part vanishes.
    let cs = u.dotc(&(&s * v));
    let phase = if cs.norm() > 0.0 { cis(std::f64::consts::FRAC_PI_2 - cs.arg()) } else { c64(1.0, 0.0) };
    let vp = v * phase;
    let b = 2.0 * u.dotc(&(&h * &vp)).re;
    // a0 + b·τ + a1·τ² = 0 with τ ≥ 0.
    let tau = if a1.abs() <= 1e-300 {
        if b.abs() <= 1e-300 {
            0.0
        } else {
            -a0 / b
        }
    } else {
        let disc = (b * b - 4.0 * a1 * a0).max(0.0);
        let r1 = (-b + disc.sqrt()) / (2.0 * a1);
        let r2 = (-b - disc.sqrt()) / (2.0 * a1);
        if r1 >= 0.0 { r1 } else { r2 }
    };
    if !tau.is_finite() || tau < 0.0 {
        return None;
    }
    let x = u + vp * c64(tau, 0.0);
    let nx = x.norm();
    if nx <= 1e-300 {
        return None;
    }
    Some(x / c64(nx, 0.0))
}

fn support_probe(t: &CMat, phi: f64) -> (CVec, C64) {
    let (_, x) = top_eig(&rotated_herm(t, phi));
    let p = quad(&x, t);
    (x, p)
}

fn in_triangle(pa: C64, pb: C64, pc: C64, w: C64) -> bool {
    let d1 = cross(pb - pa, w - pa);
    let d2 = cross(pc - pb, w - pb);
    let d3 = cross(pa - pc, w - pc);
    let eps = 1e-13 * (1.0 + pa.norm() + pb.norm() + pc.norm()).powi(2);
    (d1 >= -eps && d2 >= -eps && d3 >= -eps) || (d1 <= eps && d2 <= eps && d3 <= eps)
}

/// Preimage inside a triangle of attained points: hit the far edge first, then the segment to w.
fn solve_triangle(t: &CMat, a: (&CVec, C64), b: (&CVec, C64), c: (&CVec, C64), w: C64) -> Option<CVec> {
    let (xa, pa) = a;
    let (xb, pb) = b;
    let (xc, pc) = c;
    if (pa - w).norm() <= 1e-13 * (1.0 + w.norm()) {
        return Some(xa.clone());
    }
    let denom = cross(w - pa, pc - pb);
    let q = if denom.abs() <= 1e-300 {
        if (pb - w).norm() < (pc - w).norm() { pb } else { pc }
    } else {
        let s = (cross(w - pa, pa - pb) / denom).clamp(0.0, 1.0);
        pb + (pc - pb) * s
    };
    let xq = inverse_nr_segment(t, xb, xc, q)?;
    inverse_nr_segment(t, xa, &xq, w)
}

/// Unit x with x*Tx = w, if w lies in W(T). Boundary points at `probes` support directions form
/// an inscribed polygon; targets between a chord and the boundary arc are reached by bisecting
/// the arc in the support angle.
pub fn inverse_nr(t: &CMat, w: C64, probes: usize) -> Option<CVec> {
    let n = t.nrows();
    if n == 1 {
        let x = CVec::from_element(1, c64(1.0, 0.0));
        return if (t[(0, 0)] - w).norm() <= 1e-9 * (1.0 + w.norm()) { Some(x) } else { None };
    }
    let probes = probes.max(8);
    let phis: Vec<f64> = (0..probes).map(|j| 2.0 * std::f64::consts::PI * j as f64 / probes as f64).collect();
    let (vecs, pts): (Vec<CVec>, Vec<C64>) = phis.iter().map(|&p| support_probe(t, p)).unzip();
    let close = 1e-12 * (1.0 + w.norm());
    for (p, x) in pts.iter().zip(&vecs) {
        if (p - w).norm() <= close {
            return Some(x.clone());
        }
    }
    for j in 1..probes - 1 {
        if in_triangle(pts[0], pts[j], pts[j + 1], w) {
            if let Some(x) = solve_triangle(t, (&vecs[0], pts[0]), (&vecs[j], pts[j]), (&vecs[j + 1], pts[j + 1]), w) {
                return Some(x);
            }
        }
    }
    // Edges whose chord has w on the outer side, nearest first.
    let mut cand: Vec<(f64, usize)> = (0..probes)
        .filter_map(|j| {
            let (pa, pb) = (pts[j], pts[(j + 1) % probes]);
            let side = cross(pb - pa, w - pa);
            (side < 0.0).then(|| (crate::geometry::seg_dist(w, pa, pb), j))
        })
        .collect();
    cand.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for (_, j) in cand.into_iter().take(3) {
        let (mut fa, mut fb) = (phis[j], if j + 1 == probes { 2.0 * std::f64::consts::PI } else { phis[j + 1] });
        let (mut xa, mut pa) = (vecs[j].clone(), pts[j]);
        let (mut xb, mut pb) = (vecs[(j + 1) % probes].clone(), pts[(j + 1) % probes]);
        for _ in 0..60 {
            let fm = 0.5 * (fa + fb);
            let (xm, pm) = support_probe(t, fm);
            if (pm - w).norm() <= close {
                return Some(xm);
            }
            if in_triangle(pa, pm, pb, w) {
                if let Some(x) = solve_triangle(t, (&xm, pm), (&xa, pa), (&xb, pb), w) {
                    return Some(x);
                }
                break;
            }
            if cross(pm - pa, w - pa) < 0.0 {
                fb = fm;
                xb = xm;
                pb = pm;
            } else if cross(pb - pm, w - pm) < 0.0 {
                fa = fm;
                xa = xm;
                pa = pm;
            } else {
                break;
            }
        }
    }
    None
}

#[derive(Clone, Debug)]
pub struct SsgPlot {
    pub upper: BoundaryCurve2D,
    pub lower: BoundaryCurve2D,
    /// Largest primal-dual gap over all slices where a witness was recovered.
    pub max_gap: f64,
    /// Number of slices whose witness could not be recovered within tolerance.
    pub flagged_slices: usize,
}

/// Extreme of x*Qx on the slice x*Hx = k with the sign constraint σ·x*Sx ≥ 0.
fn ssg_slice(
    q: &CMat,
    fam: &SliceFamily,
    s: &CMat,
    k: f64,
    sign: f64,
    orientation: Orientation,
) -> Result<(f64, f64, bool)> {
    let qq = match orientation {
        Orientation::Max => q.clone(),
        Orientation::Min => -q,
    };
    let ss = s * c64(sign, 0.0);
    let tol = 1e-9 * (1.0 + s.norm());
    let inner = |y2: f64| -> Result<DualSolveResult> { dual_max(&(&qq + &ss * c64(-y2, 0.0)), fam, k) };
    let out = |r: f64| if orientation == Orientation::Max { r } else { -r };
    let free = inner(0.0)?;
    let sval = quad_re(&free.witness, &ss);
    if sval >= -tol {
        return Ok((out(free.value), free.gap.max(free.residual), free.gap < 1e-7 && free.residual < 1e-7));
    }
    // Constraint active: minimize ψ(y₂) = inner dual value over y₂ ≤ 0; ψ'(y₂) = −x*(σS)x.
    let mut b = 10.0 * (q.norm() + k.abs() + 1.0) / (ss.norm()).max(1e-8);
    let mut ok = false;
    for _ in 0..60 {
        let r = inner(-b)?;
        if quad_re(&r.witness, &ss) > 0.0 {
            ok = true;
            break;
        }
        b *= 2.0;
    }
    if !ok {
        return Err(DwError::SolverFailure(format!("sign-constrained slice infeasible at k = {k}")));
    }
    let (mut a, mut z) = (-b, 0.0);
    for _ in 0..100 {
        let mid = 0.5 * (a + z);
        if z - a <= 1e-14 * (1.0 + b) {
            break;
        }
        let r = inner(mid)?;
        if quad_re(&r.witness, &ss) > 0.0 {
            a = mid;
        } else {
            z = mid;
        }
    }
    let y2 = 0.5 * (a + z);
    let res = inner(y2)?;
    let value = res.value;
    // Witness: top eigenspace of the Lagrangian, compressed target x*(H − k + iσS)x = 0.
    let lag = &qq + &ss * c64(-y2, 0.0) - &fam.m * c64(res.multiplier.unwrap_or(0.0), 0.0);
    let n = q.nrows();
    let (vals, vecs) = eigh(&lag);
    let scale = 1.0 + vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut best: Option<(f64, f64)> = None;
    let target = &fam.m - CMat::identity(n, n) * c64(k, 0.0) + &ss * I;
    for dim in 1..=n {
        if dim > 1 && vals[n - 1] - vals[n - dim] > 1e-6 * scale {
            break;
        }
        let v = CMat::from_fn(n, dim, |r, c| vecs[(r, n - dim + c)]);
        let tc = v.adjoint() * &target * &v;
        if let Some(c) = inverse_nr(&tc, c64(0.0, 0.0), 64) {
            let x = &v * c;
            let gap = (quad_re(&x, &qq) - value).abs();
            let resid = (quad_re(&x, &fam.m) - k).abs().max((-quad_re(&x, &ss)).max(0.0));
            best = Some((gap, resid));
            break;
        }
    }
    match best {
        Some((gap, resid)) => Ok((out(value), gap.max(resid), gap < 1e-7 && resid < 1e-7)),
        None => Ok((out(value), f64::NAN, false)),
    }
}

/// Offsets of the half W(A) ∩ {σ·Im ≥ 0} along the real axis.
fn half_range_extent(a: &ComplexMatrix, sign: f64) -> Option<(f64, f64)> {
    let w = numerical_range_boundary(a, 512).ok()?;
    let v = &w.vertices;
    let mut xs: Vec<f64> = Vec::new();
    let n = v.len();
    let tol = 1e-12 * (1.0 + a.norm());
    for i in 0..n {
        let p = v[i];
        let q = v[(i + 1) % n];
        let (sp, sq) = (sign * p.im, sign * q.im);
        if sp >= -tol {
            xs.push(p.re);
        }
        if (sp > tol && sq < -tol) || (sp < -tol && sq > tol) {
            let t = sp / (sp - sq);
            xs.push(p.re + (q.re - p.re) * t);
        }
    }
    if xs.is_empty() {
        return None;
    }
    Some((xs.iter().copied().fold(f64::INFINITY, f64::min), xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)))
}

/// Signed SRG halves: upper (x*S(A)x ≥ 0, mapped to Im ≥ 0) and lower (≤ 0, Im ≤ 0).
pub fn plot_ssg(a: &ComplexMatrix, n: usize) -> Result<SsgPlot> {
    if n < 2 {
        return Err(DwError::InvalidArgument("plot_ssg needs N >= 2".into()));
    }
    let fam = SliceFamily::new(a.gram(), herm(a.mat()));
    let s = skew_herm(a.mat());
    let mut max_gap: f64 = 0.0;
    let mut flagged = 0usize;
    let mut branch = |sign: f64| -> BoundaryCurve2D {
        let Some((klo, khi)) = half_range_extent(a, sign) else {
            return BoundaryCurve2D::closed(vec![], None);
        };
        let klo = klo.max(fam.lo);
        let khi = khi.min(fam.hi);
        let mut high = Vec::new();
        let mut low = Vec::new();
        let mut degraded = false;
        for k in slice_offsets(klo, khi.max(klo), n) {
            let hi = ssg_slice(&fam.q, &fam, &s, k, sign, Orientation::Max);
            let lo = ssg_slice(&fam.q, &fam, &s, k, sign, Orientation::Min);
            match (hi, lo) {
                (Ok((hv, hg, hok)), Ok((lv, lg, lok))) => {
                    for (g, ok) in [(hg, hok), (lg, lok)] {
                        if ok {
                            max_gap = max_gap.max(g);
                        } else {
                            flagged += 1;
                        }
                    }
                    let hp = c64(k, sign * (hv - k * k).max(0.0).sqrt());
                    let lp = c64(k, sign * (lv - k * k).max(0.0).sqrt());
                    high.push(hp);
                    low.push(lp);
                }
                _ => degraded = true,
            }
        }
        let mut poly = high;
        poly.extend(low.into_iter().rev());
        let mut c = BoundaryCurve2D::closed(poly, None);
        c.degraded = degraded;
        c
    };
    let upper = branch(1.0);
    let lower = branch(-1.0);
    Ok(SsgPlot { upper, lower, max_gap, flagged_slices: flagged })
}
