//! Planar representations derived from the DW shell and their phase measures.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{DwError, Result};
use crate::geometry::{cross, golden_max, point_in_polygon, polyline_dist};
use crate::linalg::*;
use crate::shell::{dw_boundary, zero_eigen_normality, ZeroEigenClass};
use crate::tomography::plot_theta_srg;

pub use crate::shell::{gain_interval, GainInterval};

const DEDUPE_TOL: f64 = 1e-12;
const ANGLE_SNAP: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryCurve2D {
    pub vertices: Vec<C64>,
    pub closed: bool,
    /// Reference axis θ when the curve stores only the θ+ half of a mirror-symmetric set.
    pub symmetry_axis: Option<f64>,
    /// Set when some slices failed and were skipped.
    #[serde(default)]
    pub degraded: bool,
}

fn dedupe(mut v: Vec<C64>, closed: bool) -> Vec<C64> {
    v.dedup_by(|b, a| (*a - *b).norm() <= DEDUPE_TOL);
    if closed {
        while v.len() > 1 && (v[0] - v[v.len() - 1]).norm() <= DEDUPE_TOL {
            v.pop();
        }
    }
    v
}

impl BoundaryCurve2D {
    pub fn closed(vertices: Vec<C64>, symmetry_axis: Option<f64>) -> Self {
        Self { vertices: dedupe(vertices, true), closed: true, symmetry_axis, degraded: false }
    }

    pub fn open(vertices: Vec<C64>) -> Self {
        Self { vertices: dedupe(vertices, false), closed: false, symmetry_axis: None, degraded: false }
    }

    /// The full set: the stored half together with its reflection across the symmetry axis.
    pub fn mirrored(&self) -> Vec<C64> {
        match self.symmetry_axis {
            None => self.vertices.clone(),
            Some(t) => {
                let r = cis(2.0 * t);
                let mut out = self.vertices.clone();
                out.extend(self.vertices.iter().rev().map(|p| r * p.conj()));
                dedupe(out, true)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max((v[i] - v[j]).norm());
            }
        }
        d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseInterval {
    pub axis: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorialStatus {
    Sectorial,
    Semisectorial,
    Quasisectorial,
    Undefined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorialPhases {
    pub status: SectorialStatus,
    pub lo: f64,
    pub hi: f64,
}

/// Rotation algorithm: the top eigenvector of H(e^{−iφ}A) gives the boundary point in direction φ.
pub fn numerical_range_boundary(a: &ComplexMatrix, n: usize) -> Result<BoundaryCurve2D> {
    if n < 8 {
        return Err(DwError::InvalidArgument("numerical_range_boundary needs N >= 8".into()));
    }
    let pts = (0..n)
        .map(|j| {
            let phi = 2.0 * PI * j as f64 / n as f64;
            let (_, x) = top_eig(&rotated_herm(a.mat(), phi));
            quad(&x, a.mat())
        })
        .collect();
    Ok(BoundaryCurve2D::closed(pts, None))
}

pub fn theta_srg(a: &ComplexMatrix, theta: f64, n: usize) -> Result<BoundaryCurve2D> {
    plot_theta_srg(a, theta, n)
}

fn snap_angle(x: f64) -> f64 {
    let x = x.clamp(0.0, PI);
    if x < ANGLE_SNAP {
        0.0
    } else if PI - x < ANGLE_SNAP {
        PI
    } else {
        x
    }
}

/// Local polar angle of the θ-SRG point attached to a vertical-numerical-range point (a, ν).
fn vnr_angle(p: C64) -> f64 {
    (p.im - p.re * p.re).max(0.0).sqrt().atan2(p.re)
}

/// Resolution used for phase extraction from the vertical numerical range.
pub const PHASE_RESOLUTION: usize = 256;

pub fn theta_srg_phases(a: &ComplexMatrix, theta: f64) -> Result<PhaseInterval> {
    theta_srg_phases_with(a, theta, PHASE_RESOLUTION)
}

/// θ-SRG phase interval from W↑_θ(A): the local angle atan2(√(ν − a²), a) has no interior
/// critical points, so its extremes sit on the boundary. Vertices are scanned, chords (flat
/// parts of the region) are searched, and the curved parts are refined in the rotation angle.
pub fn theta_srg_phases_with(a: &ComplexMatrix, theta: f64, n: usize) -> Result<PhaseInterval> {
    if a.is_zero() {
        return Err(DwError::UndefinedPhase("zero matrix has SRG {0}".into()));
    }
    if zero_eigen_normality(a) == ZeroEigenClass::NonnormalZero {
        return Ok(PhaseInterval { axis: theta, lo: 0.0, hi: PI });
    }
    let t = rotated_herm(a.mat(), theta) + a.gram() * I;
    let tiny = 1e-14 * (1.0 + a.norm2() * a.norm2());
    let point_at = |phi: f64| {
        let (_, x) = top_eig(&rotated_herm(&t, phi));
        quad(&x, &t)
    };
    let phis: Vec<f64> = (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
    let pts: Vec<C64> = phis.iter().map(|&p| point_at(p)).collect();
    let valid = |p: C64| p.im > tiny;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut best_lo = 0usize;
    let mut best_hi = 0usize;
    for (j, &p) in pts.iter().enumerate() {
        if valid(p) {
            let ang = vnr_angle(p);
            if ang < lo {
                lo = ang;
                best_lo = j;
            }
            if ang > hi {
                hi = ang;
                best_hi = j;
            }
        }
    }
    if !lo.is_finite() {
        return Err(DwError::UndefinedPhase("θ-SRG has no nonzero points".into()));
    }
    // Chords between consecutive boundary points.
    for j in 0..n {
        let (p, q) = (pts[j], pts[(j + 1) % n]);
        if (p - q).norm() <= 1e-12 {
            continue;
        }
        let at = |s: f64| p + (q - p) * s;
        let f = |s: f64| {
            let w = at(s);
            if valid(w) { vnr_angle(w) } else { f64::NAN }
        };
        let samples = 16;
        let mut smax = (f64::NEG_INFINITY, 0.0);
        let mut smin = (f64::INFINITY, 0.0);
        for i in 0..=samples {
            let s = i as f64 / samples as f64;
            let v = f(s);
            if v.is_nan() {
                continue;
            }
            if v > smax.0 {
                smax = (v, s);
            }
            if v < smin.0 {
                smin = (v, s);
            }
        }
        let h = 1.0 / samples as f64;
        if smax.0.is_finite() {
            let (_, v) = golden_max(|s| f(s).max(-1.0), (smax.1 - h).max(0.0), (smax.1 + h).min(1.0), 60);
            hi = hi.max(v.max(smax.0));
        }
        if smin.0.is_finite() {
            let (_, v) = golden_max(|s| -f(s).min(4.0), (smin.1 - h).max(0.0), (smin.1 + h).min(1.0), 60);
            lo = lo.min((-v).min(smin.0));
        }
    }
    // Curved parts: refine in the rotation angle around the best vertices.
    let dphi = 2.0 * PI / n as f64;
    let g = |phi: f64| {
        let w = point_at(phi);
        if valid(w) { vnr_angle(w) } else { f64::NAN }
    };
    let (_, v) = golden_max(|p| g(p).max(-1.0), phis[best_hi] - dphi, phis[best_hi] + dphi, 60);
    hi = hi.max(v);
    let (_, v) = golden_max(|p| -g(p).min(4.0), phis[best_lo] - dphi, phis[best_lo] + dphi, 60);
    lo = lo.min(-v);
    Ok(PhaseInterval { axis: theta, lo: snap_angle(lo), hi: snap_angle(hi) })
}

/// Extreme rays of cone(W(A)) via support functions of H(e^{−iφ}A) and S(e^{−iφ}A).
pub fn sectorial_phases(a: &ComplexMatrix, n: usize) -> Result<SectorialPhases> {
    if n < 32 {
        return Err(DwError::InvalidArgument("sectorial_phases needs N >= 32".into()));
    }
    let undefined = SectorialPhases { status: SectorialStatus::Undefined, lo: f64::NAN, hi: f64::NAN };
    if a.is_zero() {
        return Ok(undefined);
    }
    let m = a.mat();
    let diam = 2.0 * a.norm2();
    let tol = 1e-7 * (1.0 + diam);
    let f = |phi: f64| lambda_min(&rotated_herm(m, phi));
    let mut best = (f64::NEG_INFINITY, 0.0);
    for j in 0..n {
        let phi = -PI + 2.0 * PI * j as f64 / n as f64;
        let v = f(phi);
        if v > best.0 {
            best = (v, phi);
        }
    }
    let h = 2.0 * PI / n as f64;
    let (rho, fmax) = golden_max(f, best.1 - h, best.1 + h, 80);
    let (rho, fmax) = if fmax >= best.0 { (rho, fmax) } else { (best.1, best.0) };
    if fmax < -tol {
        return Ok(undefined);
    }
    // Im(e^{−iα}w) = w*·S(e^{−iα}A)·w with S(X) = H(−iX).
    let s_of = |alpha: f64| rotated_herm(m, alpha + FRAC_PI_2);
    let etol = 1e-9 * (1.0 + a.norm2());
    let bisect = |mut good: f64, mut bad: f64, pred: &dyn Fn(f64) -> bool| {
        for _ in 0..100 {
            let mid = 0.5 * (good + bad);
            if pred(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    let above = |alpha: f64| lambda_max(&s_of(alpha)) <= etol;
    let below = |alpha: f64| lambda_min(&s_of(alpha)) >= -etol;
    let mut hi = rho - FRAC_PI_2;
    if !above(hi) {
        hi = bisect(rho + FRAC_PI_2, rho - FRAC_PI_2, &above);
    }
    let mut lo = rho + FRAC_PI_2;
    if !below(lo) {
        lo = bisect(rho - FRAC_PI_2, rho + FRAC_PI_2, &below);
    }
    if hi < lo {
        // W(A) is a point: both rays coincide up to bisection accuracy.
        let mid = 0.5 * (lo + hi);
        lo = mid;
        hi = mid;
    }
    let status = if fmax > tol {
        SectorialStatus::Sectorial
    } else if hi - lo < PI - 1e-7 {
        SectorialStatus::Quasisectorial
    } else {
        SectorialStatus::Semisectorial
    };
    Ok(SectorialPhases { status, lo, hi })
}

/// Minimal segment centered at θ enclosing the NNR: [θ − δ, θ + δ] with δ = ψ̄_θ(A).
pub fn segmental_phases(a: &ComplexMatrix, center: f64) -> Result<(f64, f64)> {
    if a.is_zero() {
        return Err(DwError::UndefinedPhase("segmental phase of the zero matrix".into()));
    }
    let ph = theta_srg_phases(a, center)?;
    Ok((center - ph.hi, center + ph.hi))
}

pub fn nnr_sample(a: &ComplexMatrix, n: usize, seed: u64) -> Result<Vec<C64>> {
    if a.is_zero() {
        return Err(DwError::InvalidArgument("NNR of the zero matrix is empty".into()));
    }
    let tol = 1e-12 * (1.0 + a.norm2() * a.norm2());
    let mut out = Vec::with_capacity(2 * n);
    let sh = dw_boundary(a, n.max(8))?;
    for p in &sh.points {
        if p.nu > tol {
            out.push(p.z / p.nu.sqrt());
        }
    }
    let mut rng = rng_from_seed(seed);
    let dim = a.dim();
    while out.len() < sh.points.len() + n {
        let x = random_unit_vector(dim, &mut rng);
        let ax = a.mat() * &x;
        let g = ax.norm();
        if g > tol.sqrt() {
            out.push(x.dotc(&ax) / g);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Texture {
    /// Lines through the origin, parameterized by angle in [0, π).
    Radar,
    /// Parallel lines with direction e^{i·angle}, parameterized by normal offset.
    Grating { angle: f64 },
    /// Circles about a fixed center, parameterized by radius.
    Ripple { center: C64 },
}

#[derive(Clone, Copy, Debug)]
pub struct TextureReport {
    pub pass: bool,
    pub worst_gap: f64,
    pub probes_hit: usize,
}

const TEXTURE_GAP_TOL: f64 = 1e-7;

/// Components of {line p0 + t·d} ∩ polygon as parameter intervals.
fn line_components(poly: &[C64], p0: C64, d: C64, tol: f64) -> Vec<(f64, f64)> {
    let n = poly.len();
    let mut ts = Vec::new();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let e = b - a;
        let den = cross(d, e);
        if den.abs() <= 1e-300 {
            // parallel edge: endpoints on the line count as crossings
            for q in [a, b] {
                if cross(d, q - p0).abs() <= tol * d.norm() {
                    ts.push((q - p0).re * d.re + (q - p0).im * d.im);
                }
            }
            continue;
        }
        let t = cross(a - p0, e) / den;
        let s = cross(a - p0, d) / den;
        if (-1e-12..=1.0 + 1e-12).contains(&s) {
            ts.push(t);
        }
    }
    intervals_inside(ts, |t| point_in_polygon(p0 + d * t, poly, tol))
}

fn intervals_inside(mut ts: Vec<f64>, inside: impl Fn(f64) -> bool) -> Vec<(f64, f64)> {
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup_by(|b, a| (*a - *b).abs() <= 1e-14);
    let mut comps: Vec<(f64, f64)> = Vec::new();
    if ts.len() == 1 {
        return vec![(ts[0], ts[0])];
    }
    for w in ts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if inside(mid) {
            match comps.last_mut() {
                Some(last) if (last.1 - w[0]).abs() <= 1e-14 => last.1 = w[1],
                _ => comps.push((w[0], w[1])),
            }
        } else if comps.last().map_or(true, |l| (l.1 - w[0]).abs() > 1e-14) {
            // isolated touching point
            if inside(w[0]) {
                comps.push((w[0], w[0]));
            }
        }
    }
    comps
}

fn circle_components(poly: &[C64], c: C64, r: f64, tol: f64) -> Vec<(f64, f64)> {
    let n = poly.len();
    let mut angs = Vec::new();
    for i in 0..n {
        let a = poly[i] - c;
        let e = poly[(i + 1) % n] - poly[i];
        // |a + s e|² = r²
        let qa = e.norm_sqr();
        let qb = 2.0 * (a.re * e.re + a.im * e.im);
        let qc = a.norm_sqr() - r * r;
        if qa <= 1e-300 {
            continue;
        }
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            continue;
        }
        for s in [(-qb - disc.sqrt()) / (2.0 * qa), (-qb + disc.sqrt()) / (2.0 * qa)] {
            if (-1e-12..=1.0 + 1e-12).contains(&s) {
                angs.push((a + e * s).arg().rem_euclid(2.0 * PI));
            }
        }
    }
    if angs.is_empty() {
        return if point_in_polygon(c + r, poly, tol) { vec![(0.0, 2.0 * PI)] } else { vec![] };
    }
    angs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let first = angs[0];
    angs.push(first + 2.0 * PI);
    let inside = |t: f64| point_in_polygon(c + C64::from_polar(r, t), poly, tol);
    let mut comps = intervals_inside(angs, inside);
    // Merge across the 0/2π seam.
    if comps.len() >= 2 {
        let last = comps[comps.len() - 1];
        if (last.1 - (comps[0].0 + 2.0 * PI)).abs() <= 1e-12 {
            comps[0].0 = last.0 - 2.0 * PI;
            comps.pop();
        }
    }
    comps
}

/// Worst separation between components on one arc; circles ignore their largest outside arc.
fn component_gap(comps: &[(f64, f64)], scale: f64, circular: bool) -> f64 {
    if comps.len() < 2 {
        return 0.0;
    }
    let mut gaps: Vec<f64> = comps.windows(2).map(|w| (w[1].0 - w[0].1) * scale).collect();
    if circular {
        let wrap = (comps[0].0 + 2.0 * PI - comps[comps.len() - 1].1) * scale;
        gaps.push(wrap);
        gaps.sort_by(|a, b| b.partial_cmp(a).unwrap());
        gaps.remove(0);
    }
    gaps.into_iter().fold(0.0, f64::max)
}

pub fn texture_check(region: &BoundaryCurve2D, texture: Texture, m: usize) -> Result<TextureReport> {
    if !region.closed {
        return Err(DwError::InvalidArgument("texture_check needs a closed region".into()));
    }
    let poly = &region.vertices;
    if poly.len() < 3 || m == 0 {
        return Ok(TextureReport { pass: true, worst_gap: 0.0, probes_hit: 0 });
    }
    let scale = 1.0 + poly.iter().fold(0.0f64, |s, p| s.max(p.norm()));
    let tol = 1e-12 * scale;
    let mut worst: f64 = 0.0;
    let mut hit = 0;
    let mut record = |comps: Vec<(f64, f64)>, s: f64, circular: bool| {
        if !comps.is_empty() {
            hit += 1;
        }
        worst = worst.max(component_gap(&comps, s, circular));
    };
    match texture {
        Texture::Radar => {
            for j in 0..m {
                let ang = PI * (j as f64 + 0.5) / m as f64;
                record(line_components(poly, c64(0.0, 0.0), cis(ang), tol), 1.0, false);
            }
        }
        Texture::Grating { angle } => {
            let d = cis(angle);
            let nrm = d * I;
            let offs: Vec<f64> = poly.iter().map(|p| p.re * nrm.re + p.im * nrm.im).collect();
            let lo = offs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = offs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for j in 0..m {
                let o = lo + (hi - lo) * (j as f64 + 0.5) / m as f64;
                record(line_components(poly, nrm * o, d, tol), 1.0, false);
            }
        }
        Texture::Ripple { center } => {
            let rmax = poly.iter().fold(0.0f64, |s, p| s.max((p - center).norm()));
            let rmin = if point_in_polygon(center, poly, 0.0) { 0.0 } else { polyline_dist(center, poly, true) };
            for j in 0..m {
                let r = rmin + (rmax - rmin) * (j as f64 + 0.5) / m as f64;
                record(circle_components(poly, center, r, tol), r, true);
            }
        }
    }
    Ok(TextureReport { pass: worst <= TEXTURE_GAP_TOL * scale, worst_gap: worst, probes_hit: hit })
}

/// Disc centered on the θ-axis holding one polygon strictly inside and the other strictly outside.
/// Returns (center, radius, inner index) for the widest clearance found.
pub fn axis_separating_disc(p: &[C64], q: &[C64], theta: f64) -> Option<(C64, f64, usize)> {
    let e = cis(theta);
    let span = 1.0 + p.iter().chain(q).fold(0.0f64, |s, w| s.max(w.norm()));
    let clearance = |t: f64, inner: &[C64], outer: &[C64]| {
        let c = e * t;
        let rin = inner.iter().fold(0.0f64, |s, w| s.max((w - c).norm()));
        let rout = if point_in_polygon(c, outer, 0.0) { 0.0 } else { polyline_dist(c, outer, true) };
        (rout - rin, 0.5 * (rin + rout))
    };
    let mut best: Option<(f64, C64, f64, usize)> = None;
    for (idx, (inner, outer)) in [(p, q), (q, p)].into_iter().enumerate() {
        let steps = 4000;
        for i in 0..=steps {
            // Centers far along the axis approximate half-planes; sample on a stretched grid.
            let s = -1.0 + 2.0 * i as f64 / steps as f64;
            let t = span * s / (1.0 - s.abs()).max(1e-4);
            let (gap, r) = clearance(t, inner, outer);
            if gap > 0.0 && best.map_or(true, |b| gap > b.0) {
                best = Some((gap, e * t, r, idx));
            }
        }
    }
    best.map(|(_, c, r, i)| (c, r, i))
}
