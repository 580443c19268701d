//! Certificates that I + A·U*·B·U stays nonsingular for every unitary U, and
//! the converse constructions when the inverse shell of A meets the shell of −B.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{DwError, Result};
use crate::geometry::{golden_max, polygons_intersect, wolfe_min_norm};
use crate::graphs::{sectorial_phases, theta_srg, theta_srg_phases, theta_srg_phases_with, SectorialStatus};
use crate::linalg::*;
use crate::shell::{f_inv_map, inverse_compression, shell_point_of, zero_eigen_normality, ZeroEigenClass};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionId {
    SmallGain,
    LargeGain,
    NumericalRange,
    SectorialPhase,
    SrgStandard,
    Nnr,
    SingularAngleSmall,
    SingularAngleLarge,
    SegmentalPhase,
    ThetaSrgPhase,
    ThetaSrgSeparation,
    DwSeparation,
}

impl ConditionId {
    pub const ALL: [ConditionId; 12] = [
        ConditionId::SmallGain,
        ConditionId::LargeGain,
        ConditionId::NumericalRange,
        ConditionId::SectorialPhase,
        ConditionId::SrgStandard,
        ConditionId::Nnr,
        ConditionId::SingularAngleSmall,
        ConditionId::SingularAngleLarge,
        ConditionId::SegmentalPhase,
        ConditionId::ThetaSrgPhase,
        ConditionId::ThetaSrgSeparation,
        ConditionId::DwSeparation,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ConditionId::SmallGain => "small_gain",
            ConditionId::LargeGain => "large_gain",
            ConditionId::NumericalRange => "numerical_range",
            ConditionId::SectorialPhase => "sectorial_phase",
            ConditionId::SrgStandard => "srg_standard",
            ConditionId::Nnr => "nnr",
            ConditionId::SingularAngleSmall => "singular_angle_small",
            ConditionId::SingularAngleLarge => "singular_angle_large",
            ConditionId::SegmentalPhase => "segmental_phase",
            ConditionId::ThetaSrgPhase => "theta_srg_phase",
            ConditionId::ThetaSrgSeparation => "theta_srg_separation",
            ConditionId::DwSeparation => "dw_separation",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.label() == s)
    }
}

impl std::fmt::Display for ConditionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Separated,
    Intersecting,
    Undecided,
}

/// Unit vectors x, y with f_inv(x*Ax, ‖Ax‖²) = (−y*By, ‖By‖²).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub x: Vec<C64>,
    pub y: Vec<C64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeparationVerdict {
    pub status: Status,
    /// The tested condition definitely fails (its sets meet or its inequality is violated).
    /// Independent of `status`, which speaks about nonsingularity only.
    pub violated: bool,
    /// Distance between the separated sets (or inequality slack); negative for penetration.
    #[serde(with = "crate::io::ext_f64")]
    pub margin: f64,
    pub witness_theta: Option<f64>,
    /// Common point. Planar tests put it in `z` and leave `nu` at 0.
    pub witness_point: Option<ShellPoint>,
    pub certificate: Option<Certificate>,
    pub condition_id: ConditionId,
    pub note: Option<String>,
}

impl SeparationVerdict {
    fn new(condition_id: ConditionId, status: Status, margin: f64) -> Self {
        Self { status, violated: status == Status::Intersecting, margin, witness_theta: None, witness_point: None, certificate: None, condition_id, note: None }
    }

    /// Slack of a strict inequality: separated above SEP_TOL, undecided otherwise.
    fn from_slack(condition_id: ConditionId, margin: f64) -> Self {
        let mut v = Self::new(condition_id, Status::Undecided, margin);
        if margin > SEP_TOL {
            v.status = Status::Separated;
        } else if margin < -SEP_TOL {
            v.violated = true;
            v.note = Some("inequality does not hold".into());
        } else {
            v.note = Some("inequality within tolerance of equality".into());
        }
        v
    }

    fn theta(mut self, t: f64) -> Self {
        self.witness_theta = Some(t);
        self
    }

    fn point(mut self, p: ShellPoint) -> Self {
        self.witness_point = Some(p);
        self
    }

    fn note(mut self, s: impl Into<String>) -> Self {
        self.note = Some(s.into());
        self
    }

    pub fn is_separated(&self) -> bool {
        self.status == Status::Separated
    }
}

fn check_pair(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(DwError::DimMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

/// Reduce an angle to [−π/2, π/2).
fn half_turn(t: f64) -> f64 {
    (t + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2
}

fn wrap_pi(t: f64) -> f64 {
    let r = (t + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI { r + 2.0 * PI } else { r }
}

fn re(v: f64) -> C64 {
    c64(v, 0.0)
}

// ---------------------------------------------------------------------------
// Support functions of the two vertical images
// ---------------------------------------------------------------------------

/// sup over Ax ≠ 0 of x*Nx / ‖Ax‖², evaluated in the right-singular basis of A.
struct InverseSupport {
    v: CMat,
    sig: Vec<f64>,
    rank: usize,
}

impl InverseSupport {
    fn new(a: &CMat) -> Self {
        let (_, s, v) = svd_full(a);
        let smax = s[0];
        let rank = s.iter().take_while(|&&x| smax > 0.0 && x > RANK_TOL * smax).count();
        Self { v, sig: s, rank }
    }

    /// `np` is V*NV. Returns +∞ when N is not negative definite on ker A.
    fn sup_ratio(&self, np: &CMat) -> f64 {
        let n = np.nrows();
        let r = self.rank;
        if r == 0 {
            return f64::NEG_INFINITY;
        }
        let m = n - r;
        let mut s = np.view((0, 0), (r, r)).into_owned();
        if m > 0 {
            let nkk = np.view((r, r), (m, m)).into_owned();
            let (vals, vecs) = eigh(&nkk);
            if vals[m - 1] >= -1e-12 * (1.0 + np.norm()) {
                return f64::INFINITY;
            }
            let inv = &vecs * CMat::from_diagonal(&DVector::from_iterator(m, vals.iter().map(|&l| re(1.0 / l)))) * vecs.adjoint();
            let nrk = np.view((0, r), (r, m));
            let nkr = np.view((r, 0), (m, r));
            s -= nrk * inv * nkr;
        }
        let d = CMat::from_diagonal(&DVector::from_iterator(r, self.sig[..r].iter().map(|&x| re(1.0 / x))));
        lambda_max(&(&d * s * &d))
    }
}

/// The pair (A, B) prepared for θ-SRG support evaluations in the (Re(e^{−iθ}z), ν) plane:
/// P = {(Re(e^{iθ}x*Ax)/‖Ax‖², 1/‖Ax‖²)} and Q = {(−Re(e^{−iθ}y*By), ‖By‖²)}.
pub(crate) struct Pair {
    a: CMat,
    b: CMat,
    ga: CMat,
    gb: CMat,
    inv: InverseSupport,
}

struct ThetaData {
    hav: CMat,
    hb: CMat,
}

impl Pair {
    pub(crate) fn new(a: &CMat, b: &CMat) -> Self {
        Self { a: a.clone(), b: b.clone(), ga: a.adjoint() * a, gb: b.adjoint() * b, inv: InverseSupport::new(a) }
    }

    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn theta_data(&self, theta: f64) -> ThetaData {
        let ha = rotated_herm(&self.a, -theta);
        ThetaData { hav: self.inv.v.adjoint() * ha * &self.inv.v, hb: rotated_herm(&self.b, theta) }
    }

    /// inf_Q ⟨d, ·⟩ − sup_P ⟨d, ·⟩ for d = (cos β, sin β).
    fn width(&self, d: &ThetaData, beta: f64) -> f64 {
        let (s, c) = beta.sin_cos();
        let n = self.dim();
        let np = &d.hav * re(c) + CMat::identity(n, n) * re(s);
        let hp = self.inv.sup_ratio(&np);
        let lq = lambda_min(&(&d.hb * re(-c) + &self.gb * re(s)));
        lq - hp
    }

    /// Signed distance between the hulls of P and Q (negative: penetration depth).
    pub(crate) fn margin_at(&self, theta: f64, res: usize) -> f64 {
        let d = self.theta_data(theta);
        let mut best = (f64::NEG_INFINITY, 0.0);
        for j in 0..res {
            let beta = 2.0 * PI * j as f64 / res as f64;
            let w = self.width(&d, beta);
            if w > best.0 {
                best = (w, beta);
            }
        }
        if best.0 == f64::NEG_INFINITY {
            return best.0;
        }
        let h = 2.0 * PI / res as f64;
        let (_, v) = golden_max(|b| self.width(&d, b), best.1 - h, best.1 + h, 60);
        v.max(best.0)
    }

    /// Best margin over a θ grid on [−π/2, π/2] followed by golden refinement.
    fn theta_scan(&self, grid: usize, res: usize) -> (f64, f64) {
        let step = PI / (grid - 1) as f64;
        let mut best = (f64::NEG_INFINITY, 0.0);
        for k in 0..grid {
            let t = -FRAC_PI_2 + k as f64 * step;
            let m = self.margin_at(t, res);
            if m > best.0 {
                best = (m, t);
            }
        }
        let (t, m) = golden_max(|t| self.margin_at(t, res), best.1 - step, best.1 + step, 20);
        if m > best.0 { (half_turn(t), m) } else { (half_turn(best.1), best.0) }
    }

    /// Common point of the hulls of P and Q at θ, in the (a, ν) plane.
    fn theta_common_point(&self, theta: f64) -> Option<(f64, f64)> {
        let ha = rotated_herm(&self.a, -theta);
        let hb = rotated_herm(&self.b, theta);
        let n = self.dim();
        let id = CMat::identity(n, n);
        let atom_p = |x: &CVec| {
            let nu = quad_re(x, &self.ga);
            (vec![quad_re(x, &ha), 1.0, -nu], (true, quad_re(x, &ha), nu))
        };
        let atom_q = |y: &CVec| (vec![quad_re(y, &hb), -quad_re(y, &self.gb), 1.0], (false, 0.0, 0.0));
        let scale = 1.0 + self.ga.norm() + self.gb.norm();
        let mut e = CVec::zeros(n);
        e[0] = re(1.0);
        let res = wolfe_min_norm(
            atom_p(&e),
            |d| {
                let (vp, x) = bottom_eig(&(&ha * re(d[0]) + &id * re(d[1]) - &self.ga * re(d[2])));
                let (vq, y) = bottom_eig(&(&hb * re(d[0]) - &self.gb * re(d[1]) + &id * re(d[2])));
                if vp <= vq { atom_p(&x) } else { atom_q(&y) }
            },
            500,
            1e-12,
            1e-11 * scale,
        );
        if res.distance_upper() > 1e-9 * scale {
            return None;
        }
        let mut wsum = 0.0;
        let mut asum = 0.0;
        let mut wnu = 0.0;
        for ((_, (is_p, a, nu)), w) in res.atoms.iter().zip(&res.weights) {
            if *is_p {
                wsum += w;
                asum += w * a;
                wnu += w * nu;
            }
        }
        if wnu <= 1e-300 {
            return None;
        }
        Some((asum / wnu, wsum / wnu))
    }
}

fn plane_point(theta: f64, a: f64, nu: f64) -> ShellPoint {
    let h = (nu - a * a).max(0.0).sqrt();
    ShellPoint::new(cis(theta) * c64(a, h), nu)
}

fn beta_res(n: usize) -> usize {
    n.clamp(16, 360)
}

/// Convex test of the inverse θ-SRG of A against SRG_θ(−B) through their vertical images.
pub fn theta_srg_separation(a: &ComplexMatrix, b: &ComplexMatrix, theta: f64, n: usize) -> Result<SeparationVerdict> {
    check_pair(a, b)?;
    let id = ConditionId::ThetaSrgSeparation;
    if a.is_zero() {
        return Ok(SeparationVerdict::new(id, Status::Separated, f64::INFINITY).theta(theta).note("inverse shell of the zero matrix is empty"));
    }
    let pair = Pair::new(a.mat(), b.mat());
    Ok(theta_verdict(&pair, theta, pair.margin_at(theta, beta_res(n)), id))
}

fn theta_verdict(pair: &Pair, theta: f64, m: f64, id: ConditionId) -> SeparationVerdict {
    if m > SEP_TOL {
        return SeparationVerdict::new(id, Status::Separated, m).theta(theta);
    }
    match pair.theta_common_point(theta) {
        Some((a, nu)) => SeparationVerdict::new(id, Status::Intersecting, m.min(0.0)).theta(theta).point(plane_point(theta, a, nu)),
        None if m >= -SEP_TOL => SeparationVerdict::new(id, Status::Undecided, m).theta(theta).note("sets touch within tolerance"),
        None => SeparationVerdict::new(id, Status::Undecided, m).theta(theta).note("common point not recovered"),
    }
}

/// Pixel-level cross-check: pointwise-inverted SRG_{−θ}(A) against SRG_θ(−B) as polygons,
/// in local coordinates around the θ axis. `None` when SRG(A) reaches the origin.
pub fn theta_srg_polygons_intersect(a: &ComplexMatrix, b: &ComplexMatrix, theta: f64, n: usize) -> Result<Option<bool>> {
    check_pair(a, b)?;
    if zero_eigen_normality(a) != ZeroEigenClass::Nonsingular {
        return Ok(None);
    }
    let pa = theta_srg(a, -theta, n)?.mirrored();
    let pq = theta_srg(&b.neg(), theta, n)?.mirrored();
    let p: Vec<C64> = pa.iter().map(|z| 1.0 / (cis(theta) * z).conj()).collect();
    let q: Vec<C64> = pq.iter().map(|z| cis(-theta) * z).collect();
    Ok(Some(polygons_intersect(&p, &q)))
}

// ---------------------------------------------------------------------------
// DW separation
// ---------------------------------------------------------------------------

#[derive(Clone)]
enum Side {
    A(CVec),
    B(CVec),
}

/// Minimum-norm problem whose hull contains the origin iff the convex hulls of
/// DW⁻¹(A) and DW(−B) meet. A-atoms are (Re w, −Im w, 1, −‖Ax‖²) with w = x*Ax,
/// B-atoms are (Re v, Im v, −‖By‖², 1) with v = y*By.
fn dw_dual(a: &CMat, b: &CMat) -> crate::geometry::MinNorm<Side> {
    let n = a.nrows();
    let ga = a.adjoint() * a;
    let gb = b.adjoint() * b;
    let id = CMat::identity(n, n);
    let atom_a = |x: CVec| {
        let w = quad(&x, a);
        (vec![w.re, -w.im, 1.0, -quad_re(&x, &ga)], Side::A(x))
    };
    let atom_b = |y: CVec| {
        let v = quad(&y, b);
        (vec![v.re, v.im, -quad_re(&y, &gb), 1.0], Side::B(y))
    };
    let scale = 1.0 + ga.norm() + gb.norm() + a.norm() + b.norm();
    let mut e = CVec::zeros(n);
    e[0] = re(1.0);
    wolfe_min_norm(
        atom_a(e),
        |d| {
            let delta = c64(d[0], d[1]);
            let (va, x) = bottom_eig(&(herm(&(a * delta)) + &id * re(d[2]) - &ga * re(d[3])));
            let (vb, y) = bottom_eig(&(herm(&(b * delta.conj())) - &gb * re(d[2]) + &id * re(d[3])));
            if va <= vb { atom_a(x) } else { atom_b(y) }
        },
        600,
        1e-10,
        1e-11 * scale,
    )
}

/// Damped Gauss-Newton for underdetermined f(p) = 0 with a central-difference Jacobian.
fn gauss_newton(f: &dyn Fn(&[f64]) -> Vec<f64>, mut x: Vec<f64>, iters: usize, tol: f64) -> (Vec<f64>, f64) {
    let nrm = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut r = f(&x);
    let mut rn = nrm(&r);
    let mut lam = 1e-8;
    for _ in 0..iters {
        if rn <= tol || !rn.is_finite() {
            break;
        }
        let (m, p) = (r.len(), x.len());
        let mut j = DMatrix::<f64>::zeros(m, p);
        for c in 0..p {
            let h = 1e-6 * (1.0 + x[c].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[c] += h;
            xm[c] -= h;
            let (rp, rm) = (f(&xp), f(&xm));
            for i in 0..m {
                j[(i, c)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let jjt = &j * j.transpose();
        let rv = DVector::from_column_slice(&r);
        let damp = 1.0 + jjt.trace() / m as f64;
        let mut improved = false;
        for _ in 0..16 {
            let mat = &jjt + DMatrix::<f64>::identity(m, m) * (lam * damp);
            if let Some(z) = mat.lu().solve(&rv) {
                let step = j.transpose() * z;
                let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a - s).collect();
                let rnew = f(&xn);
                let rnn = nrm(&rnew);
                if rnn < rn {
                    x = xn;
                    r = rnew;
                    rn = rnn;
                    lam = (lam * 0.1).max(1e-16);
                    improved = true;
                    break;
                }
            }
            lam *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (x, rn)
}

fn unpack(p: &[f64]) -> CVec {
    let n = p.len() / 2;
    let v = CVec::from_fn(n, |i, _| c64(p[2 * i], p[2 * i + 1]));
    let nv = v.norm();
    if nv > 0.0 { v / re(nv) } else { v }
}

fn pack(v: &CVec) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Homogenized mismatch of f_inv(DW_A(x)) and DW_{−B}(y).
fn joint_residual(a: &CMat, b: &CMat, x: &CVec, y: &CVec) -> Vec<f64> {
    let ax = a * x;
    let by = b * y;
    let na = ax.norm_squared();
    let w = x.dotc(&ax).conj() + y.dotc(&by) * na;
    vec![w.re, w.im, 1.0 - na * by.norm_squared()]
}

/// Matched certificate vectors for a common point, by joint Gauss-Newton from the seeds.
fn joint_certificate(a: &CMat, b: &CMat, seeds: &[(CVec, CVec)]) -> Option<(CVec, CVec)> {
    let n = a.nrows();
    let scale = 1.0 + a.norm() * a.norm() * (1.0 + b.norm() * b.norm());
    for (x0, y0) in seeds {
        let mut p0 = pack(x0);
        p0.extend(pack(y0));
        let f = |p: &[f64]| joint_residual(a, b, &unpack(&p[..2 * n]), &unpack(&p[2 * n..]));
        let (p, r) = gauss_newton(&f, p0, 200, 1e-14 * scale);
        if r <= 1e-12 * scale {
            return Some((unpack(&p[..2 * n]), unpack(&p[2 * n..])));
        }
    }
    None
}

/// Unit x with (x*Ax, ‖Ax‖²) = (w, ν).
fn shell_preimage(a: &CMat, w: C64, nu: f64, seeds: &[CVec]) -> Option<CVec> {
    let ga = a.adjoint() * a;
    let scale = 1.0 + w.norm() + nu;
    let f = |p: &[f64]| {
        let x = unpack(p);
        let q = quad(&x, a);
        vec![(q.re - w.re) / scale, (q.im - w.im) / scale, (quad_re(&x, &ga) - nu) / scale]
    };
    for s in seeds {
        let (p, r) = gauss_newton(&f, pack(s), 200, 1e-15);
        if r <= 1e-13 {
            return Some(unpack(&p));
        }
    }
    None
}

fn certificate_point(a: &CMat, x: &CVec) -> Option<ShellPoint> {
    f_inv_map(&shell_point_of(a, x)).ok()
}

/// DW separation: the exact convex dual in lifted coordinates, with θ recovered from
/// the separating normal and a θ-grid fallback.
pub fn dw_separation(a: &ComplexMatrix, b: &ComplexMatrix, theta_grid_size: usize, n: usize) -> Result<SeparationVerdict> {
    check_pair(a, b)?;
    if theta_grid_size < 3 {
        return Err(DwError::InvalidArgument("theta_grid_size must be >= 3".into()));
    }
    let id = ConditionId::DwSeparation;
    if a.is_zero() {
        return Ok(SeparationVerdict::new(id, Status::Separated, f64::INFINITY).theta(0.0).note("inverse shell of the zero matrix is empty"));
    }
    let res = beta_res(n).min(72);
    let pair = Pair::new(a.mat(), b.mat());
    // Balance the 4-D dual: (tA, B/t) has the same products and comparable atom scales.
    let (sa, sb) = (a.norm2(), b.norm2());
    let t = if sb > 0.0 { (sb / sa).sqrt() } else { 1.0 };
    let ab = a.mat() * re(t);
    let bb = b.mat() * re(1.0 / t);
    let dual = dw_dual(&ab, &bb);
    let scale = 1.0 + ab.norm() * ab.norm() + bb.norm() * bb.norm();

    if dual.lower_bound > 1e-10 * scale {
        let eta = c64(-dual.direction[0], -dual.direction[1]);
        let t0 = if eta.norm() > 1e-12 * scale { half_turn(eta.arg()) } else { 0.0 };
        let m0 = pair.margin_at(t0, res);
        let w = PI / 36.0;
        let (t1, m1) = golden_max(|t| pair.margin_at(t, res), t0 - w, t0 + w, 20);
        let (tb, mb) = if m1 > m0 { (half_turn(t1), m1) } else { (t0, m0) };
        if mb > SEP_TOL {
            return Ok(SeparationVerdict::new(id, Status::Separated, mb).theta(tb));
        }
        let (tg, mg) = pair.theta_scan(theta_grid_size, res);
        if mg > SEP_TOL {
            return Ok(SeparationVerdict::new(id, Status::Separated, mg).theta(tg));
        }
        return Ok(SeparationVerdict::new(id, Status::Undecided, mb.max(mg)).theta(tb).note("hulls separated but planar margin within tolerance"));
    }

    let (tg, mg) = pair.theta_scan(37, res);
    if dual.distance_upper() > 1e-11 * scale {
        if mg > SEP_TOL {
            return Ok(SeparationVerdict::new(id, Status::Separated, mg).theta(tg));
        }
        return Ok(SeparationVerdict::new(id, Status::Undecided, mg).theta(tg).note("lifted dual did not resolve"));
    }

    // Common hull point in balanced coordinates, then mapped back.
    let mut wsum = 0.0;
    let mut zsum = c64(0.0, 0.0);
    let mut wnu = 0.0;
    let mut seeds_a = Vec::new();
    let mut seeds_b = Vec::new();
    let gab = ab.adjoint() * &ab;
    for ((_, side), w) in dual.atoms.iter().zip(&dual.weights) {
        match side {
            Side::A(x) => {
                wsum += w;
                zsum += quad(x, &ab).conj() * *w;
                wnu += w * quad_re(x, &gab);
                seeds_a.push((*w, x.clone()));
            }
            Side::B(y) => seeds_b.push((*w, y.clone())),
        }
    }
    seeds_a.sort_by(|p, q| q.0.total_cmp(&p.0));
    seeds_b.sort_by(|p, q| q.0.total_cmp(&p.0));
    let s_bal = ShellPoint::new(zsum / wnu, wsum / wnu);
    let s = ShellPoint::new(s_bal.z * t, s_bal.nu * t * t);
    let dim = a.dim();
    let mut rng = rng_from_seed(0x5eed);
    let random_seeds: Vec<CVec> = (0..12).map(|_| random_unit_vector(dim, &mut rng)).collect();

    let mut found: Option<(CVec, CVec)> = None;
    if dim >= 3 && s.nu > 0.0 {
        let wa = s.z.conj() / s.nu;
        let mut sa_seeds: Vec<CVec> = seeds_a.iter().map(|p| p.1.clone()).collect();
        sa_seeds.extend(random_seeds.iter().cloned());
        let mut sb_seeds: Vec<CVec> = seeds_b.iter().map(|p| p.1.clone()).collect();
        sb_seeds.extend(random_seeds.iter().cloned());
        if let (Some(x), Some(y)) = (shell_preimage(a.mat(), wa, 1.0 / s.nu, &sa_seeds), shell_preimage(b.mat(), -s.z, s.nu, &sb_seeds)) {
            found = Some((x, y));
        }
    }
    if found.is_none() {
        let mut pairs: Vec<(CVec, CVec)> = Vec::new();
        if let (Some(x), Some(y)) = (seeds_a.first(), seeds_b.first()) {
            pairs.push((x.1.clone(), y.1.clone()));
        }
        for _ in 0..16 {
            let x = random_unit_vector(dim, &mut rng);
            let y = random_unit_vector(dim, &mut rng);
            pairs.push((x, y));
        }
        found = joint_certificate(a.mat(), b.mat(), &pairs);
    }
    if found.is_none() && dim <= 2 {
        // Shells need not be convex here: look for a singularizing unitary directly.
        let (sig, u) = unitary_orbit_falsifier(a, b, 2000, 0)?;
        if sig <= 1e-6 * (1.0 + a.norm2() * b.norm2()) {
            if let Some((x, y)) = null_vector_certificate(a.mat(), b.mat(), u.mat()) {
                found = joint_certificate(a.mat(), b.mat(), &[(x, y)]);
            }
        }
    }
    match found {
        Some((x, y)) => {
            let p = certificate_point(a.mat(), &x).unwrap_or(s);
            let mut v = SeparationVerdict::new(id, Status::Intersecting, mg.min(0.0)).theta(tg).point(p);
            v.certificate = Some(Certificate { x: x.iter().copied().collect(), y: y.iter().copied().collect() });
            Ok(v)
        }
        None if dim >= 3 => Ok(SeparationVerdict::new(id, Status::Intersecting, mg.min(0.0)).theta(tg).point(s).note("certificate vectors not recovered")),
        None => Ok(SeparationVerdict::new(id, Status::Undecided, mg.min(0.0))
            .theta(tg)
            .point(s)
            .note("convex hulls meet but the two-dimensional shells may not")),
    }
}

/// Certificate vectors from a near-singular I + A·B' with B' = U*BU: y₀ spans the
/// (near) null space, x = B'y₀/‖B'y₀‖, y = Uy₀.
fn null_vector_certificate(a: &CMat, b: &CMat, u: &CMat) -> Option<(CVec, CVec)> {
    let n = a.nrows();
    let bp = u.adjoint() * b * u;
    let m = CMat::identity(n, n) + a * &bp;
    let (_, _, y0) = min_singular_pair(&m);
    let x = &bp * &y0;
    let nx = x.norm();
    if nx <= 1e-14 {
        return None;
    }
    let y = u * &y0;
    Some((x / re(nx), &y / re(y.norm())))
}

// ---------------------------------------------------------------------------
// Lower-dimensional conditions
// ---------------------------------------------------------------------------

const PROFILE_STEPS: usize = 360;
const PROFILE_RES: usize = 64;
const GRID_DEG: f64 = PI / 180.0;

/// δ(θ) = ψ̄_θ on the 1° grid θ_j = −π + j° of one period.
struct PhaseProfile {
    delta: Vec<f64>,
}

impl PhaseProfile {
    fn new(a: &ComplexMatrix) -> Result<Self> {
        let delta = (0..PROFILE_STEPS)
            .map(|j| theta_srg_phases_with(a, -PI + j as f64 * GRID_DEG, PROFILE_RES).map(|p| p.hi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { delta })
    }

    fn at(&self, j: i64) -> f64 {
        self.delta[j.rem_euclid(PROFILE_STEPS as i64) as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Branch {
    Small,
    Large,
}

/// Grid value of the uni-parameter condition at θ_k = −π/2 + k°, k = 0..=180.
fn uni_grid(pa: &PhaseProfile, pb: &PhaseProfile) -> (f64, i64, Branch) {
    let mut best = (f64::NEG_INFINITY, 0, Branch::Small);
    for k in 0..=180i64 {
        let small = PI - pa.at(270 - k) - pb.at(90 + k);
        let large = PI - pa.at(90 - k) - pb.at(k - 90);
        if small > best.0 {
            best = (small, k, Branch::Small);
        }
        if large > best.0 {
            best = (large, k, Branch::Large);
        }
    }
    best
}

/// Grid value of the bi-parameter segmental condition: π − min |wrap(θ_A+θ_B)| + δ_A + δ_B.
fn bi_grid(pa: &PhaseProfile, pb: &PhaseProfile) -> (f64, usize, usize) {
    let mut best = (f64::INFINITY, 0, 0);
    for ja in 0..PROFILE_STEPS {
        for jb in 0..PROFILE_STEPS {
            let s = (ja + jb) % PROFILE_STEPS;
            let off = if s > 180 { (PROFILE_STEPS - s) as f64 } else { s as f64 } * GRID_DEG;
            let v = off + pa.delta[ja] + pb.delta[jb];
            if v < best.0 {
                best = (v, ja, jb);
            }
        }
    }
    (PI - best.0, best.1, best.2)
}

fn branch_margin(a: &ComplexMatrix, b: &ComplexMatrix, theta: f64, branch: Branch) -> Result<f64> {
    let pa = theta_srg_phases(a, -theta)?;
    let pb = theta_srg_phases(b, theta)?;
    Ok(match branch {
        Branch::Small => PI - pa.hi - pb.hi,
        Branch::Large => pa.lo + pb.lo - PI,
    })
}

/// Opposite-centric θ-SRG phase condition at one θ.
pub fn srg_phase_condition(a: &ComplexMatrix, b: &ComplexMatrix, theta: f64) -> Result<SeparationVerdict> {
    check_pair(a, b)?;
    let id = ConditionId::ThetaSrgPhase;
    let (pa, pb) = match (theta_srg_phases(a, -theta), theta_srg_phases(b, theta)) {
        (Ok(p), Ok(q)) => (p, q),
        (Err(e), _) | (_, Err(e)) => return Ok(SeparationVerdict::new(id, Status::Undecided, f64::NAN).theta(theta).note(e.to_string())),
    };
    let large = pa.lo + pb.lo - PI;
    let small = PI - pa.hi - pb.hi;
    let (m, label) = if large >= small { (large, "large") } else { (small, "small") };
    let v = SeparationVerdict::from_slack(id, m).theta(theta);
    Ok(if v.is_separated() { v.note(format!("{label} branch")) } else { v })
}

/// Angular interval containing the arguments of all nonzero eigenvalues of AB.
pub fn eigen_cone_bound(a: &ComplexMatrix, b: &ComplexMatrix, theta: f64) -> Result<Option<(f64, f64)>> {
    check_pair(a, b)?;
    let (pa, pb) = match (theta_srg_phases(a, -theta), theta_srg_phases(b, theta)) {
        (Ok(p), Ok(q)) => (p, q),
        _ => return Ok(None),
    };
    let lo = pa.lo + pb.lo;
    let hi = pa.hi + pb.hi;
    if lo - PI > SEP_TOL {
        return Ok(Some((lo - 2.0 * PI, 2.0 * PI - lo)));
    }
    if PI - hi > SEP_TOL {
        return Ok(Some((-hi, hi)));
    }
    Ok(None)
}

/// Lazily computed quantities shared between conditions.
struct Context<'m> {
    a: &'m ComplexMatrix,
    b: &'m ComplexMatrix,
    n: usize,
    pair: Option<Pair>,
    profiles: Option<std::result::Result<(PhaseProfile, PhaseProfile), String>>,
}

impl<'m> Context<'m> {
    fn new(a: &'m ComplexMatrix, b: &'m ComplexMatrix, n: usize) -> Self {
        Self { a, b, n, pair: None, profiles: None }
    }

    fn pair(&mut self) -> &Pair {
        if self.pair.is_none() {
            self.pair = Some(Pair::new(self.a.mat(), self.b.mat()));
        }
        self.pair.as_ref().unwrap()
    }

    fn profiles(&mut self) -> std::result::Result<&(PhaseProfile, PhaseProfile), String> {
        if self.profiles.is_none() {
            let p = PhaseProfile::new(self.a).and_then(|pa| Ok((pa, PhaseProfile::new(self.b)?)));
            self.profiles = Some(p.map_err(|e| e.to_string()));
        }
        match self.profiles.as_ref().unwrap() {
            Ok(p) => Ok(p),
            Err(e) => Err(e.clone()),
        }
    }

    fn check(&mut self, which: ConditionId) -> Result<SeparationVerdict> {
        let (a, b) = (self.a, self.b);
        let id = which;
        Ok(match which {
            ConditionId::SmallGain => {
                SeparationVerdict::from_slack(id, 1.0 - a.norm2() * b.norm2())
            }
            ConditionId::LargeGain => {
                let sa = sigma_min(a.mat());
                let sb = sigma_min(b.mat());
                SeparationVerdict::from_slack(id, sa * sb - 1.0)
            }
            ConditionId::NumericalRange => numerical_range_condition(a, b)?,
            ConditionId::SectorialPhase => self.sectorial()?,
            ConditionId::SrgStandard => {
                if a.is_zero() {
                    return Ok(SeparationVerdict::new(id, Status::Separated, f64::INFINITY).theta(0.0));
                }
                let res = beta_res(self.n);
                let pair = self.pair();
                let m = pair.margin_at(0.0, res);
                theta_verdict(pair, 0.0, m, id)
            }
            ConditionId::Nnr => self.nnr()?,
            ConditionId::SingularAngleSmall | ConditionId::SingularAngleLarge => {
                let (pa, pb) = match (theta_srg_phases(a, 0.0), theta_srg_phases(b, 0.0)) {
                    (Ok(p), Ok(q)) => (p, q),
                    (Err(e), _) | (_, Err(e)) => return Ok(SeparationVerdict::new(id, Status::Undecided, f64::NAN).note(e.to_string())),
                };
                let m = if which == ConditionId::SingularAngleSmall { PI - pa.hi - pb.hi } else { pa.lo + pb.lo - PI };
                SeparationVerdict::from_slack(id, m).theta(0.0)
            }
            ConditionId::SegmentalPhase => {
                let (pa, pb) = match self.profiles() {
                    Ok(p) => p,
                    Err(e) => return Ok(SeparationVerdict::new(id, Status::Undecided, f64::NAN).note(e)),
                };
                let (_, ja, jb) = bi_grid(pa, pb);
                let ta = -PI + ja as f64 * GRID_DEG;
                let tb = -PI + jb as f64 * GRID_DEG;
                let da = theta_srg_phases(a, ta)?.hi;
                let db = theta_srg_phases(b, tb)?.hi;
                let m = PI - wrap_pi(ta + tb).abs() - da - db;
                let v = SeparationVerdict::from_slack(id, m).theta(tb);
                v.note(format!("centers theta_A = {ta:.6}, theta_B = {tb:.6}"))
            }
            ConditionId::ThetaSrgPhase => {
                let (pa, pb) = match self.profiles() {
                    Ok(p) => p,
                    Err(e) => return Ok(SeparationVerdict::new(id, Status::Undecided, f64::NAN).note(e)),
                };
                let (_, k, branch) = uni_grid(pa, pb);
                let t0 = -FRAC_PI_2 + k as f64 * GRID_DEG;
                let m0 = branch_margin(a, b, t0, branch)?;
                let (t1, m1) = golden_max(|t| branch_margin(a, b, t, branch).unwrap_or(f64::NEG_INFINITY), t0 - GRID_DEG, t0 + GRID_DEG, 20);
                let (t, m) = if m1 > m0 { (t1, m1) } else { (t0, m0) };
                let label = if branch == Branch::Small { "small" } else { "large" };
                SeparationVerdict::from_slack(id, m).theta(half_turn(t)).note(format!("{label} branch"))
            }
            ConditionId::ThetaSrgSeparation => {
                if a.is_zero() {
                    return Ok(SeparationVerdict::new(id, Status::Separated, f64::INFINITY).theta(0.0));
                }
                let res = beta_res(self.n).min(72);
                let pair = self.pair();
                let (t, m) = pair.theta_scan(181, res);
                theta_verdict(pair, t, m, id)
            }
            ConditionId::DwSeparation => dw_separation(a, b, 181, self.n)?,
        })
    }

    fn sectorial(&mut self) -> Result<SeparationVerdict> {
        let id = ConditionId::SectorialPhase;
        let n = self.n.clamp(32, 720);
        let pa = sectorial_phases(self.a, n)?;
        let pb = sectorial_phases(self.b, n)?;
        if pa.status == SectorialStatus::Undefined || pb.status == SectorialStatus::Undefined {
            return Ok(SeparationVerdict::new(id, Status::Undecided, f64::NAN).note("sectorial phases undefined (not semisectorial)"));
        }
        let lo = pa.lo + pb.lo;
        let hi = pa.hi + pb.hi;
        let mut best = (f64::NEG_INFINITY, 0i32);
        for k in -2..=2 {
            let c = 2.0 * PI * k as f64;
            let m = (lo - (c - PI)).min(c + PI - hi);
            if m > best.0 {
                best = (m, k);
            }
        }
        Ok(SeparationVerdict::from_slack(id, best.0).note(format!("k = {}", best.1)))
    }

    fn nnr(&mut self) -> Result<SeparationVerdict> {
        let id = ConditionId::Nnr;
        if self.a.is_zero() || self.b.is_zero() {
            return Ok(SeparationVerdict::new(id, Status::Separated, f64::INFINITY).note("one NNR is empty"));
        }
        let (a, nb) = (self.a.mat(), -self.b.mat());
        let dim = self.a.dim();
        let nnr_of = |m: &CMat, x: &CVec| {
            let mx = m * x;
            let g = mx.norm() * x.norm();
            if g > 1e-150 { Some(x.dotc(&mx) / g) } else { None }
        };
        let cloud = |m: &CMat, conj: bool, seed: u64| {
            let mut rng = rng_from_seed(seed);
            let mut out: Vec<(C64, CVec)> = Vec::new();
            let count = self.n.max(600);
            let mut tries = 0;
            while out.len() < count && tries < 20 * count {
                tries += 1;
                let x = random_unit_vector(dim, &mut rng);
                if let Some(z) = nnr_of(m, &x) {
                    out.push((if conj { z.conj() } else { z }, x));
                }
            }
            out
        };
        let p = cloud(a, true, 11);
        let q = cloud(&nb, false, 12);
        if p.is_empty() || q.is_empty() {
            return Ok(SeparationVerdict::new(id, Status::Undecided, f64::NAN).note("NNR sampling failed"));
        }
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (i, (u, _)) in p.iter().enumerate() {
            for (j, (v, _)) in q.iter().enumerate() {
                pairs.push(((u - v).norm(), i, j));
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut lo = (pairs[0].0, 0.5 * (p[pairs[0].1].0 + q[pairs[0].2].0));
        // Local refinement of the closest sampled pairs.
        let f = |v: &[f64]| {
            let x = unpack(&v[..2 * dim]);
            let y = unpack(&v[2 * dim..]);
            match (nnr_of(a, &x), nnr_of(&nb, &y)) {
                (Some(u), Some(w)) => {
                    let d = u.conj() - w;
                    vec![d.re, d.im]
                }
                _ => vec![1e3, 1e3],
            }
        };
        for &(_, i, j) in pairs.iter().take(8) {
            let mut v0 = pack(&p[i].1);
            v0.extend(pack(&q[j].1));
            let (v, r) = gauss_newton(&f, v0, 60, 1e-14);
            if r < lo.0 {
                lo = (r, nnr_of(&nb, &unpack(&v[2 * dim..])).unwrap_or(lo.1));
            }
        }
        // Dilation: the larger of 1e−3·diameter and the sampling resolution of either cloud.
        let spacing = |c: &[(C64, CVec)]| {
            let mut worst: f64 = 0.0;
            for (i, (u, _)) in c.iter().enumerate() {
                let mut nn = f64::INFINITY;
                for (k, (v, _)) in c.iter().enumerate() {
                    if k != i {
                        nn = nn.min((u - v).norm());
                    }
                }
                worst = worst.max(nn);
            }
            worst
        };
        let mut diam: f64 = 0.0;
        for (u, _) in p.iter().chain(&q) {
            for (v, _) in p.iter().chain(&q) {
                diam = diam.max((u - v).norm());
            }
        }
        let radius = (1e-3 * diam).max(spacing(&p)).max(spacing(&q)).max(1e-12);
        let wp = ShellPoint::new(lo.1, 0.0);
        Ok(if lo.0 <= GEOM_TOL {
            SeparationVerdict::new(id, Status::Intersecting, -lo.0).point(wp)
        } else if lo.0 <= radius {
            SeparationVerdict::new(id, Status::Undecided, lo.0 - radius).point(wp).note("point clouds closer than the dilation radius")
        } else {
            SeparationVerdict::new(id, Status::Separated, lo.0 - radius)
        })
    }
}

/// W⁻¹(A) against W(−B), with W⁻¹(A) the numerical range of the range compression of A⁺.
fn numerical_range_condition(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<SeparationVerdict> {
    let id = ConditionId::NumericalRange;
    if zero_eigen_normality(a) == ZeroEigenClass::NonnormalZero {
        let q = quad(&CVec::from_fn(b.dim(), |i, _| re(if i == 0 { 1.0 } else { 0.0 })), &b.neg());
        return Ok(SeparationVerdict::new(id, Status::Intersecting, f64::NEG_INFINITY).point(ShellPoint::new(q, 0.0)).note("W⁻¹(A) is the whole plane"));
    }
    let t = match inverse_compression(a) {
        None => return Ok(SeparationVerdict::new(id, Status::Separated, f64::INFINITY).note("W⁻¹(A) is empty")),
        Some(t) => t,
    };
    let nb = -b.mat();
    let f = |phi: f64| lambda_min(&rotated_herm(&t, phi)) - lambda_max(&rotated_herm(&nb, phi));
    let steps = 360;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for j in 0..steps {
        let phi = 2.0 * PI * j as f64 / steps as f64;
        let v = f(phi);
        if v > best.0 {
            best = (v, phi);
        }
    }
    let h = 2.0 * PI / steps as f64;
    let (_, v) = golden_max(f, best.1 - h, best.1 + h, 60);
    let m = v.max(best.0);
    if m > SEP_TOL {
        return Ok(SeparationVerdict::new(id, Status::Separated, m));
    }
    // Planar Wolfe on W(T) − W(−B) for a common point.
    let k = t.nrows();
    let n = nb.nrows();
    let atom = |x: CVec, y: CVec| {
        let p = quad(&x, &t);
        let q = quad(&y, &nb);
        (vec![p.re - q.re, p.im - q.im], p)
    };
    let mut e = CVec::zeros(k);
    e[0] = re(1.0);
    let mut e2 = CVec::zeros(n);
    e2[0] = re(1.0);
    let scale = 1.0 + t.norm() + nb.norm();
    let res = wolfe_min_norm(
        atom(e, e2),
        |d| {
            let delta = c64(d[0], d[1]).conj();
            let (_, x) = bottom_eig(&herm(&(&t * delta)));
            let (_, y) = top_eig(&herm(&(&nb * delta)));
            atom(x, y)
        },
        500,
        1e-12,
        1e-12 * scale,
    );
    if res.distance_upper() > 1e-12 * scale {
        return Ok(SeparationVerdict::new(id, Status::Undecided, m).note("sets touch within tolerance"));
    }
    let z: C64 = res.atoms.iter().zip(&res.weights).map(|((_, p), w)| p * *w).sum();
    Ok(SeparationVerdict::new(id, Status::Intersecting, m.min(0.0)).point(ShellPoint::new(z, 0.0)))
}

pub fn check_condition(a: &ComplexMatrix, b: &ComplexMatrix, which: ConditionId, n: usize) -> Result<SeparationVerdict> {
    check_pair(a, b)?;
    Context::new(a, b, n).check(which)
}

// ---------------------------------------------------------------------------
// Constructions and oracles
// ---------------------------------------------------------------------------

fn normalized(v: CVec) -> Option<CVec> {
    let n = v.norm();
    if n > 1e-12 { Some(v / re(n)) } else { None }
}

/// Unitary U with I + A·U*·B·U singular, from matched certificate vectors of a
/// common point of DW⁻¹(A) and DW(−B). U maps a = Ax/‖Ax‖ to y and x to −‖Ax‖·By.
pub fn construct_singularizing_unitary(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    witness: &ShellPoint,
    x: &CVec,
    y: &CVec,
) -> Result<ComplexMatrix> {
    check_pair(a, b)?;
    let n = a.dim();
    if x.len() != n || y.len() != n {
        return Err(DwError::DimMismatch(x.len().max(y.len()), n));
    }
    let x = normalized(x.clone()).ok_or_else(|| DwError::InvalidArgument("x must be nonzero".into()))?;
    let y = normalized(y.clone()).ok_or_else(|| DwError::InvalidArgument("y must be nonzero".into()))?;
    let ax = a.mat() * &x;
    let nax = ax.norm();
    if nax <= 1e-12 {
        return Err(DwError::InvalidArgument("Ax = 0: x is not a certificate".into()));
    }
    let pa = f_inv_map(&shell_point_of(a.mat(), &x))?;
    let by = b.mat() * &y;
    let pb = ShellPoint::new(-y.dotc(&by), by.norm_squared());
    let tol = 1e-6 * (1.0 + witness.z.norm() + witness.nu);
    let rz = (pa.z - witness.z).norm().max((pb.z - witness.z).norm());
    let rn = (pa.nu - witness.nu).abs().max((pb.nu - witness.nu).abs());
    if rz > tol || rn > tol {
        return Err(DwError::InvalidArgument(format!("witness residuals {rz:e}, {rn:e} exceed 1e-6")));
    }
    let av = &ax / re(nax);
    let alpha = av.dotc(&x);
    let a_perp = normalized(&x - &av * alpha);
    let y_perp = normalized(&by - &y * y.dotc(&by));
    let (src, dst) = match (a_perp, y_perp) {
        (Some(ap), Some(yp)) => (vec![av, -ap], vec![y, yp]),
        _ => (vec![av], vec![y]),
    };
    let fa = complete_basis(&src, n);
    let fy = complete_basis(&dst, n);
    ComplexMatrix::new(fy * fa.adjoint())
}

fn cayley(k: &CMat) -> CMat {
    let n = k.nrows();
    let id = CMat::identity(n, n);
    let p = &id + k * c64(0.0, 0.5);
    let m = &id - k * c64(0.0, 0.5);
    m.try_inverse().map(|mi| mi * p).unwrap_or(id)
}

/// min over sampled unitaries of σ̲(I + A·U*·B·U): Haar trials, then keep-if-better
/// Cayley perturbations of the best sample.
pub fn unitary_orbit_falsifier(a: &ComplexMatrix, b: &ComplexMatrix, trials: usize, seed: u64) -> Result<(f64, ComplexMatrix)> {
    check_pair(a, b)?;
    if trials < 1 {
        return Err(DwError::InvalidArgument("trials must be >= 1".into()));
    }
    let n = a.dim();
    let id = CMat::identity(n, n);
    let eval = |u: &CMat| sigma_min(&(&id + a.mat() * u.adjoint() * b.mat() * u));
    let mut rng = rng_from_seed(seed);
    let mut best_u = id.clone();
    let mut best = f64::INFINITY;
    for _ in 0..trials {
        let u = haar_unitary_rng(n, &mut rng);
        let s = eval(&u);
        if s < best {
            best = s;
            best_u = u;
        }
    }
    let mut eps = 0.2;
    for _ in 0..20 {
        let g = complex_gaussian(n, n, &mut rng);
        let k = herm(&g) * re(eps);
        let u = &best_u * cayley(&k);
        let s = eval(&u);
        if s < best {
            best = s;
            best_u = u;
        } else {
            eps *= 0.7;
        }
    }
    Ok((best, ComplexMatrix::new(best_u)?))
}

// ---------------------------------------------------------------------------
// Implication audit
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditReport {
    pub verdicts: Vec<SeparationVerdict>,
    pub violations: Vec<String>,
}

impl AuditReport {
    pub fn get(&self, id: ConditionId) -> &SeparationVerdict {
        self.verdicts.iter().find(|v| v.condition_id == id).expect("all conditions evaluated")
    }
}

/// Runs every condition and records violated implications without failing.
pub fn audit_table(a: &ComplexMatrix, b: &ComplexMatrix, n: usize) -> Result<AuditReport> {
    check_pair(a, b)?;
    let mut ctx = Context::new(a, b, n);
    let mut verdicts = Vec::with_capacity(ConditionId::ALL.len());
    for id in ConditionId::ALL {
        verdicts.push(ctx.check(id)?);
    }
    let get = |id: ConditionId| verdicts.iter().find(|v| v.condition_id == id).unwrap();
    let mut violations = Vec::new();
    // Heads barely above tolerance can legitimately fail grid-limited tails.
    let strong = |v: &SeparationVerdict, thr: f64| v.is_separated() && v.margin > thr;
    let mut need = |head: ConditionId, tail: ConditionId, thr: f64| {
        let h = get(head);
        let t = get(tail);
        if strong(h, thr) && !t.is_separated() {
            violations.push(format!("{head} separated (margin {:e}) but {tail} is {:?} (margin {:e})", h.margin, t.status, t.margin));
        }
    };
    use ConditionId::*;
    need(SectorialPhase, NumericalRange, 1e-3);
    need(SectorialPhase, ThetaSrgPhase, 0.05);
    need(SmallGain, SrgStandard, 1e-6);
    need(LargeGain, SrgStandard, 1e-6);
    for head in [SingularAngleSmall, SingularAngleLarge] {
        need(head, SrgStandard, 1e-6);
        need(head, ThetaSrgPhase, 1e-6);
        need(head, SegmentalPhase, 1e-6);
    }
    need(SrgStandard, ThetaSrgSeparation, 1e-6);
    need(ThetaSrgPhase, SegmentalPhase, 0.05);
    need(SegmentalPhase, ThetaSrgPhase, 1e-6);
    need(ThetaSrgPhase, ThetaSrgSeparation, 1e-6);
    need(ThetaSrgSeparation, DwSeparation, 1e-6);
    let dw = get(DwSeparation);
    for v in &verdicts {
        if v.condition_id != DwSeparation && strong(v, 1e-6) && dw.status == Status::Intersecting {
            violations.push(format!("{} separated (margin {:e}) but dw_separation found a common point", v.condition_id, v.margin));
        }
    }
    let seg = get(SegmentalPhase);
    if strong(seg, 1e-6) && get(Nnr).status == Status::Intersecting {
        violations.push("segmental_phase separated but nnr clouds intersect".into());
    }
    if dw.is_separated() && dw.margin > 1e-6 {
        let t = dw.witness_theta.unwrap_or(0.0);
        let redo = theta_srg_separation(a, b, t, 72)?;
        if !redo.is_separated() {
            violations.push(format!("dw_separation separated at theta = {t} but theta_srg_separation there is {:?}", redo.status));
        }
    }
    Ok(AuditReport { verdicts, violations })
}

/// Every condition together with a check of the implication graph between them.
pub fn implication_audit(a: &ComplexMatrix, b: &ComplexMatrix, n: usize) -> Result<AuditReport> {
    let report = audit_table(a, b, n)?;
    if !report.violations.is_empty() {
        let table: Vec<String> = report.verdicts.iter().map(|v| format!("{}: {:?} {:e}", v.condition_id, v.status, v.margin)).collect();
        return Err(DwError::ImplicationViolation(format!("{}; table: {}", report.violations.join("; "), table.join(", "))));
    }
    Ok(report)
}
