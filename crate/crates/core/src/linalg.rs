//! Dense complex linear algebra and the 3-D shell vocabulary.
//!
//! Eigen and singular value decompositions are delegated to nalgebra; this
//! module adds the Hermitian hygiene (symmetrize or reject), ordering of
//! spectra, Haar sampling and the point/plane types of ℂ×ℝ.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{DwError, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Residual tolerance for eigen/SVD based decisions.
pub const EIG_TOL: f64 = 1e-10;
/// Membership tolerance for geometric predicates.
pub const GEOM_TOL: f64 = 1e-9;
/// Minimum margin for a separation certificate.
pub const SEP_TOL: f64 = 1e-7;
/// Relative rank tolerance: singular when σ̲ < RANK_TOL·σ̄.
pub const RANK_TOL: f64 = 1e-10;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// e^{iθ}
#[inline]
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Square matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    m: CMat,
}

impl ComplexMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(DwError::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.nrows() == 0 {
            return Err(DwError::InvalidArgument("empty matrix".into()));
        }
        if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(DwError::NonFinite);
        }
        Ok(Self { m })
    }

    pub fn from_row_major(n: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(DwError::InvalidArgument(format!(
                "expected {} entries for dim {}, got {}",
                n * n,
                n,
                entries.len()
            )));
        }
        Self::new(CMat::from_row_slice(n, n, entries))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(DwError::InvalidArgument("ragged rows".into()));
        }
        Self::new(CMat::from_fn(r, c, |i, j| c64(rows[i][j], 0.0)))
    }

    pub fn identity(n: usize) -> Self {
        Self { m: CMat::identity(n, n) }
    }

    pub fn zeros(n: usize) -> Self {
        Self { m: CMat::zeros(n, n) }
    }

    pub fn diag(d: &[C64]) -> Self {
        Self { m: CMat::from_diagonal(&CVec::from_row_slice(d)) }
    }

    pub fn scalar(v: C64) -> Self {
        Self { m: CMat::from_element(1, 1, v) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn mat(&self) -> &CMat {
        &self.m
    }

    pub fn into_mat(self) -> CMat {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    pub fn transpose(&self) -> Self {
        Self { m: self.m.transpose() }
    }

    pub fn conj(&self) -> Self {
        Self { m: self.m.map(|v| v.conj()) }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { m: &self.m * s }
    }

    pub fn neg(&self) -> Self {
        Self { m: -&self.m }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { m: &self.m * &other.m }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { m: &self.m + &other.m }
    }

    /// U*·A·U
    pub fn unitary_similarity(&self, u: &Self) -> Self {
        Self { m: u.m.adjoint() * &self.m * &u.m }
    }

    /// A*A
    pub fn gram(&self) -> CMat {
        self.m.adjoint() * &self.m
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().all(|v| v.norm() == 0.0)
    }

    pub fn norm_fro(&self) -> f64 {
        self.m.norm()
    }

    pub fn norm2(&self) -> f64 {
        singular_values(self).first().copied().unwrap_or(0.0)
    }

    pub fn is_normal(&self, tol: f64) -> bool {
        let a = &self.m;
        let comm = a * a.adjoint() - a.adjoint() * a;
        comm.norm() <= tol * (1.0 + a.norm().powi(2))
    }

    pub fn inverse(&self) -> Option<Self> {
        let (lo, hi) = singular_value_extremes(self);
        if hi == 0.0 || lo < RANK_TOL * hi {
            return None;
        }
        self.m.clone().try_inverse().map(|m| Self { m })
    }

    pub fn row_major(&self) -> Vec<C64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.m[(i, j)]);
            }
        }
        out
    }
}

impl Deref for ComplexMatrix {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.m
    }
}

/// Point (z, ν) of ℂ×ℝ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellPoint {
    pub z: C64,
    pub nu: f64,
}

impl ShellPoint {
    pub fn new(z: C64, nu: f64) -> Self {
        Self { z, nu }
    }

    pub fn inner(&self, other: &ShellPoint) -> f64 {
        (self.z.conj() * other.z).re + self.nu * other.nu
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn sub(&self, other: &ShellPoint) -> ShellPoint {
        ShellPoint::new(self.z - other.z, self.nu - other.nu)
    }

    pub fn dist(&self, other: &ShellPoint) -> f64 {
        self.sub(other).norm()
    }

    /// Height above ∂₁; nonnegative for every shell point.
    pub fn epi_margin(&self) -> f64 {
        self.nu - self.z.norm_sqr()
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.z.re, self.z.im, self.nu]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(c64(v[0], v[1]), v[2])
    }
}

/// Plane {p : ⟨normal, p − anchor⟩ = 0} in ℂ×ℝ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane3 {
    pub normal: ShellPoint,
    pub anchor: ShellPoint,
}

impl Hyperplane3 {
    pub fn new(normal: ShellPoint, anchor: ShellPoint) -> Result<Self> {
        if !(normal.norm() > 0.0) {
            return Err(DwError::InvalidArgument("zero hyperplane normal".into()));
        }
        Ok(Self { normal, anchor })
    }

    /// Vertical plane P[θ, d] = {Re(e^{−iθ}z) = d}.
    pub fn vertical(theta: f64, d: f64) -> Self {
        let n = ShellPoint::new(cis(theta), 0.0);
        Self { normal: n, anchor: ShellPoint::new(cis(theta) * d, 0.0) }
    }

    /// Horizontal plane P[γ] = {ν = γ}.
    pub fn horizontal(gamma: f64) -> Self {
        Self { normal: ShellPoint::new(C64::new(0.0, 0.0), 1.0), anchor: ShellPoint::new(C64::new(0.0, 0.0), gamma) }
    }

    pub fn offset(&self) -> f64 {
        self.normal.inner(&self.anchor)
    }

    pub fn signed_value(&self, p: &ShellPoint) -> f64 {
        self.normal.inner(p) - self.offset()
    }
}

/// Surfaces used for cross-section requests: planes and paraboloids ∂ₐ = {ν = a|z|²}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Surface3 {
    Plane(Hyperplane3),
    Paraboloid { a: f64 },
}

impl Surface3 {
    pub fn signed_value(&self, p: &ShellPoint) -> f64 {
        match self {
            Surface3::Plane(h) => h.signed_value(p),
            Surface3::Paraboloid { a } => p.nu - a * p.z.norm_sqr(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: CVec,
}

/// H(A) = (A + A*)/2, S(A) = (A − A*)/(2i).
pub fn toeplitz_parts(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let h = herm(a.mat());
    let s = skew_herm(a.mat());
    (ComplexMatrix { m: h }, ComplexMatrix { m: s })
}

pub fn herm(a: &CMat) -> CMat {
    (a + a.adjoint()) * c64(0.5, 0.0)
}

pub fn skew_herm(a: &CMat) -> CMat {
    (a - a.adjoint()) * c64(0.0, -0.5)
}

/// H(e^{−iφ}A)
pub fn rotated_herm(a: &CMat, phi: f64) -> CMat {
    herm(&(a * cis(-phi)))
}

fn asymmetry(m: &CMat) -> f64 {
    let scale = 1.0 + m.norm();
    (m - m.adjoint()).norm() / scale
}

/// Full spectrum of a Hermitian matrix, ascending, with unit eigenvectors as columns.
pub fn hermitian_eigh(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    if m.nrows() != m.ncols() {
        return Err(DwError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let asym = asymmetry(m);
    if asym > EIG_TOL {
        return Err(DwError::NotHermitian(asym));
    }
    Ok(eigh(m))
}

/// Spectrum of a matrix Hermitian by construction (symmetrized, no check).
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 1 {
        return (vec![m[(0, 0)].re], CMat::identity(1, 1));
    }
    let sym = herm(m);
    if n == 2 {
        return eigh2(&sym);
    }
    let eig = sym.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// Closed form for 2×2 Hermitian [[a, b], [b̄, d]].
fn eigh2(m: &CMat) -> (Vec<f64>, CMat) {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let half = 0.5 * (a - d);
    let r = (half * half + b.norm_sqr()).sqrt();
    let mean = 0.5 * (a + d);
    let lo = mean - r;
    let hi = mean + r;
    if b.norm() <= 1e-300 {
        return if a <= d {
            (vec![a, d], CMat::identity(2, 2))
        } else {
            let mut v = CMat::zeros(2, 2);
            v[(1, 0)] = C64::new(1.0, 0.0);
            v[(0, 1)] = C64::new(1.0, 0.0);
            (vec![d, a], v)
        };
    }
    // Top eigenvector from whichever row is better conditioned.
    let top = if half >= 0.0 {
        let v0 = C64::new(half + r, 0.0);
        let v1 = b.conj();
        normalize2(v0, v1)
    } else {
        let v0 = b;
        let v1 = C64::new(r - half, 0.0);
        normalize2(v0, v1)
    };
    // Orthogonal complement in ℂ²: (−conj(v1), conj(v0)).
    let bot = (-top.1.conj(), top.0.conj());
    let mut v = CMat::zeros(2, 2);
    v[(0, 0)] = bot.0;
    v[(1, 0)] = bot.1;
    v[(0, 1)] = top.0;
    v[(1, 1)] = top.1;
    (vec![lo, hi], v)
}

fn normalize2(a: C64, b: C64) -> (C64, C64) {
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    (a / n, b / n)
}

/// Smallest and largest eigenpairs of a Hermitian matrix.
pub fn hermitian_extreme_eigs(m: &ComplexMatrix) -> Result<(EigenPair, EigenPair)> {
    let (vals, vecs) = hermitian_eigh(m.mat())?;
    let n = vals.len();
    Ok((
        EigenPair { value: vals[0], vector: vecs.column(0).into_owned() },
        EigenPair { value: vals[n - 1], vector: vecs.column(n - 1).into_owned() },
    ))
}

/// Top eigenpair of a Hermitian-by-construction matrix.
pub fn top_eig(m: &CMat) -> (f64, CVec) {
    let (vals, vecs) = eigh(m);
    let n = vals.len();
    (vals[n - 1], vecs.column(n - 1).into_owned())
}

/// Bottom eigenpair of a Hermitian-by-construction matrix.
pub fn bottom_eig(m: &CMat) -> (f64, CVec) {
    let (vals, vecs) = eigh(m);
    (vals[0], vecs.column(0).into_owned())
}

pub fn lambda_max(m: &CMat) -> f64 {
    let (vals, _) = eigh(m);
    vals[vals.len() - 1]
}

pub fn lambda_min(m: &CMat) -> f64 {
    eigh(m).0[0]
}

/// x*Mx
#[inline]
pub fn quad(x: &CVec, m: &CMat) -> C64 {
    x.dotc(&(m * x))
}

/// Re(x*Mx), the Rayleigh quotient numerator of a Hermitian M.
#[inline]
pub fn quad_re(x: &CVec, m: &CMat) -> f64 {
    quad(x, m).re
}

/// Singular values in descending order.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn singular_value_extremes(a: &CMat) -> (f64, f64) {
    let s = singular_values(a);
    (s[s.len() - 1], s[0])
}

pub fn sigma_min(a: &CMat) -> f64 {
    singular_value_extremes(a).0
}

/// Full SVD A = U diag(s) V* with s descending.
pub fn svd_full(a: &CMat) -> (CMat, Vec<f64>, CMat) {
    let n = a.nrows();
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let s = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let uu = CMat::from_fn(n, idx.len(), |r, c| u[(r, idx[c])]);
    let vv = CMat::from_fn(a.ncols(), idx.len(), |r, c| vt[(idx[c], r)].conj());
    (uu, s, vv)
}

/// Right singular vector for σ̲ (a unit vector achieving min ‖Ax‖).
pub fn min_singular_pair(a: &CMat) -> (f64, CVec, CVec) {
    let (u, s, v) = svd_full(a);
    let k = s.len() - 1;
    (s[k], u.column(k).into_owned(), v.column(k).into_owned())
}

/// Moore-Penrose pseudo-inverse with scale-relative rank decision.
pub fn pinv(a: &CMat) -> CMat {
    let (u, s, v) = svd_full(a);
    let smax = s.first().copied().unwrap_or(0.0);
    let mut out = CMat::zeros(a.ncols(), a.nrows());
    for (k, &sk) in s.iter().enumerate() {
        if smax > 0.0 && sk > RANK_TOL * smax {
            out += v.column(k) * u.column(k).adjoint() * c64(1.0 / sk, 0.0);
        }
    }
    out
}

pub fn eigenvalues(a: &CMat) -> Vec<C64> {
    let n = a.nrows();
    if n == 1 {
        return vec![a[(0, 0)]];
    }
    if n == 2 {
        let tr = a[(0, 0)] + a[(1, 1)];
        let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
        let disc = (tr * tr - det * 4.0).sqrt();
        return vec![(tr + disc) / 2.0, (tr - disc) / 2.0];
    }
    let schur = nalgebra::Schur::new(a.clone());
    match schur.eigenvalues() {
        Some(v) => v.iter().copied().collect(),
        None => {
            let (_, t) = schur.unpack();
            (0..n).map(|i| t[(i, i)]).collect()
        }
    }
}

/// Eigenvalues of a real matrix, as complex numbers.
pub fn real_eigenvalues(a: &DMatrix<f64>) -> Vec<C64> {
    if a.nrows() == 0 {
        return vec![];
    }
    eigenvalues(&a.map(|v| c64(v, 0.0)))
}

/// {(λ, |λ|²)} over the spectrum.
pub fn lift_spectrum(a: &ComplexMatrix) -> Vec<ShellPoint> {
    eigenvalues(a.mat()).into_iter().map(|l| ShellPoint::new(l, l.norm_sqr())).collect()
}

pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re * s, im * s)
    })
}

pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    let g = complex_gaussian(n, 1, rng);
    let v: CVec = g.column(0).into_owned();
    let nv = v.norm();
    v / c64(nv, 0.0)
}

pub fn haar_unitary_rng<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = complex_gaussian(n, n, rng);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for i in 0..n {
            u[(i, j)] *= ph;
        }
    }
    u
}

/// Haar-distributed unitary, deterministic per seed.
pub fn haar_unitary(n: usize, seed: u64) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(DwError::InvalidArgument("haar_unitary needs n >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    Ok(ComplexMatrix { m: haar_unitary_rng(n, &mut rng) })
}

/// Random matrix with i.i.d. complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix { m: complex_gaussian(n, n, rng) }
}

/// Orthonormal completion: the given orthonormal columns followed by a basis of their complement.
pub fn complete_basis(cols: &[CVec], n: usize) -> CMat {
    let mut basis: Vec<CVec> = Vec::with_capacity(n);
    let push = |v: &CVec, basis: &mut Vec<CVec>| {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in basis.iter() {
                let p = b.dotc(&w);
                w -= b * p;
            }
        }
        let nw = w.norm();
        if nw > 1e-8 {
            basis.push(w / c64(nw, 0.0));
        }
    };
    for v in cols {
        push(v, &mut basis);
    }
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut e = CVec::zeros(n);
        e[k] = c64(1.0, 0.0);
        push(&e, &mut basis);
    }
    CMat::from_columns(&basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toeplitz_nilpotent() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let (h, s) = toeplitz_parts(&a);
        assert!((h[(0, 1)] - c64(0.5, 0.0)).norm() < 1e-15);
        assert!((s[(0, 1)] - c64(0.0, -0.5)).norm() < 1e-15);
        assert!((s[(1, 0)] - c64(0.0, 0.5)).norm() < 1e-15);
        let rec = h.mat() + s.mat() * I;
        assert!((rec - a.mat()).norm() < 1e-15);
    }

    #[test]
    fn toeplitz_hermitian_input() {
        let a = ComplexMatrix::from_row_major(2, &[c64(1.0, 0.0), c64(2.0, 1.0), c64(2.0, -1.0), c64(3.0, 0.0)]).unwrap();
        let (h, s) = toeplitz_parts(&a);
        assert!(s.norm() < 1e-15);
        assert!((h.mat() - a.mat()).norm() < 1e-15);
    }

    #[test]
    fn toeplitz_reconstruction_random() {
        let mut rng = rng_from_seed(3);
        for n in 1..=20 {
            let a = random_matrix(n, &mut rng);
            let (h, s) = toeplitz_parts(&a);
            assert!((h.mat() + s.mat() * I - a.mat()).norm() < 1e-12);
            assert!(asymmetry(h.mat()) < 1e-14 && asymmetry(s.mat()) < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(ComplexMatrix::new(CMat::zeros(2, 3)), Err(DwError::NotSquare { .. })));
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = c64(f64::NAN, 0.0);
        assert_eq!(ComplexMatrix::new(m), Err(DwError::NonFinite));
    }

    #[test]
    fn extreme_eigs_diag() {
        let m = ComplexMatrix::diag(&[c64(1.0, 0.0), c64(4.0, 0.0)]);
        let (lo, hi) = hermitian_extreme_eigs(&m).unwrap();
        assert!((lo.value - 1.0).abs() < 1e-14 && (hi.value - 4.0).abs() < 1e-14);
        assert!((lo.vector[0].norm() - 1.0).abs() < 1e-14);
        assert!((hi.vector[1].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn extreme_eigs_identity() {
        let (lo, hi) = hermitian_extreme_eigs(&ComplexMatrix::identity(3)).unwrap();
        assert!((lo.value - 1.0).abs() < 1e-14 && (hi.value - 1.0).abs() < 1e-14);
        assert!((hi.vector.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn extreme_eigs_rejects_non_hermitian() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_extreme_eigs(&a), Err(DwError::NotHermitian(_))));
    }

    // Oracle: Rayleigh quotients over random vectors bound the extremes, and the
    // trace identity ties them to the full spectrum.
    #[test]
    fn extreme_eigs_match_full_spectrum() {
        let mut rng = rng_from_seed(11);
        for n in [2usize, 3, 5, 8] {
            let g = complex_gaussian(n, n, &mut rng);
            let m = herm(&g);
            let (vals, vecs) = hermitian_eigh(&m).unwrap();
            let tr: f64 = (0..n).map(|i| m[(i, i)].re).sum();
            assert!((vals.iter().sum::<f64>() - tr).abs() < 1e-10);
            for k in 0..n {
                let v = vecs.column(k).into_owned();
                assert!((&m * &v - &v * c64(vals[k], 0.0)).norm() < 1e-10);
            }
            for _ in 0..200 {
                let x = random_unit_vector(n, &mut rng);
                let r = quad_re(&x, &m);
                assert!(r >= vals[0] - 1e-10 && r <= vals[n - 1] + 1e-10);
            }
            let (lo, hi) = hermitian_extreme_eigs(&ComplexMatrix::new(m.clone()).unwrap()).unwrap();
            assert!((lo.value - vals[0]).abs() < 1e-10 && (hi.value - vals[n - 1]).abs() < 1e-10);
        }
    }

    #[test]
    fn eigh2_matches_general_solver() {
        let mut rng = rng_from_seed(5);
        for _ in 0..200 {
            let m = herm(&complex_gaussian(2, 2, &mut rng));
            let (v2, e2) = eigh2(&m);
            let gen = m.clone().symmetric_eigen();
            let mut g: Vec<f64> = gen.eigenvalues.iter().copied().collect();
            g.sort_by(f64::total_cmp);
            assert!((v2[0] - g[0]).abs() < 1e-12 && (v2[1] - g[1]).abs() < 1e-12);
            for k in 0..2 {
                let v = e2.column(k).into_owned();
                assert!((v.norm() - 1.0).abs() < 1e-12);
                assert!((&m * &v - &v * c64(v2[k], 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_extremes_examples() {
        let h = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.5, 1.0]]).unwrap();
        let (lo, hi) = singular_value_extremes(h.mat());
        assert!(lo.abs() < 1e-12);
        assert!((hi - 1.25f64.sqrt()).abs() < 1e-12);
        let (lo, hi) = singular_value_extremes(ComplexMatrix::identity(3).mat());
        assert!((lo - 1.0).abs() < 1e-14 && (hi - 1.0).abs() < 1e-14);
        let u = haar_unitary(4, 1).unwrap().scale(c64(2.5, 0.0));
        let (lo, hi) = singular_value_extremes(u.mat());
        assert!((lo - 2.5).abs() < 1e-10 && (hi - 2.5).abs() < 1e-10);
    }

    #[test]
    fn singular_values_scale() {
        let mut rng = rng_from_seed(8);
        for n in 1..6 {
            let a = random_matrix(n, &mut rng);
            let (lo, hi) = singular_value_extremes(a.mat());
            let g = 3.7;
            let (lo2, hi2) = singular_value_extremes(a.scale(c64(g, 0.0)).mat());
            assert!((lo2 - g * lo).abs() <= 1e-10 * (1.0 + g * hi));
            assert!((hi2 - g * hi).abs() <= 1e-10 * g * hi);
            // squares equal the extreme eigenvalues of A*A
            let (vals, _) = eigh(&a.gram());
            assert!((hi * hi - vals[n - 1]).abs() < 1e-10 * (1.0 + vals[n - 1]));
            assert!((lo * lo - vals[0]).abs() < 1e-9 * (1.0 + vals[n - 1]));
        }
    }

    #[test]
    fn haar_is_unitary() {
        assert!(haar_unitary(0, 0).is_err());
        let u1 = haar_unitary(1, 4).unwrap();
        assert!((u1[(0, 0)].norm() - 1.0).abs() < 1e-14);
        for n in [3usize, 10, 50] {
            let u = haar_unitary(n, 9).unwrap();
            let res = (u.adjoint().mat() * u.mat() - CMat::identity(n, n)).norm();
            assert!(res < 1e-10, "n={n} res={res}");
        }
        assert_eq!(haar_unitary(3, 17).unwrap(), haar_unitary(3, 17).unwrap());
    }

    #[test]
    fn haar_second_moment() {
        let mut rng = rng_from_seed(2024);
        let draws = 10_000;
        let mean: f64 = (0..draws).map(|_| haar_unitary_rng(2, &mut rng)[(0, 0)].norm_sqr()).sum::<f64>() / draws as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn lift_examples() {
        let a = ComplexMatrix::diag(&[c64(0.0, -1.0), c64(1.0, 0.0)]);
        let mut pts = lift_spectrum(&a);
        pts.sort_by(|p, q| p.z.re.total_cmp(&q.z.re));
        assert!((pts[0].z - c64(0.0, -1.0)).norm() < 1e-14 && (pts[0].nu - 1.0).abs() < 1e-14);
        assert!((pts[1].z - c64(1.0, 0.0)).norm() < 1e-14 && (pts[1].nu - 1.0).abs() < 1e-14);
        for p in lift_spectrum(&ComplexMatrix::zeros(3)) {
            assert!(p.z.norm() < 1e-14 && p.nu.abs() < 1e-14);
        }
        let nil = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let pts = lift_spectrum(&nil);
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().all(|p| p.z.norm() < 1e-12 && p.nu.abs() < 1e-12));
    }

    #[test]
    fn lift_on_paraboloid_random() {
        let mut rng = rng_from_seed(21);
        for n in 1..7 {
            let a = random_matrix(n, &mut rng);
            let eig = eigenvalues(a.mat());
            let det = a.mat().determinant();
            let prod = eig.iter().fold(c64(1.0, 0.0), |acc, l| acc * l);
            assert!((prod - det).norm() < 1e-9 * (1.0 + det.norm()));
            for p in lift_spectrum(&a) {
                assert_eq!(p.epi_margin(), p.nu - p.z.norm_sqr());
                assert!(p.epi_margin().abs() < 1e-14 * (1.0 + p.nu));
            }
        }
    }

    #[test]
    fn planes_and_paraboloids() {
        let v = Hyperplane3::vertical(0.3, 2.0);
        let p = ShellPoint::new(cis(0.3) * 2.0 + cis(0.3) * I * 5.0, 7.0);
        assert!(v.signed_value(&p).abs() < 1e-14);
        let h = Hyperplane3::horizontal(4.0);
        assert!((h.signed_value(&ShellPoint::new(c64(1.0, 1.0), 5.0)) - 1.0).abs() < 1e-14);
        let par = Surface3::Paraboloid { a: 1.0 };
        assert!(par.signed_value(&ShellPoint::new(c64(0.6, 0.8), 1.0)).abs() < 1e-14);
        assert!(Hyperplane3::new(ShellPoint::new(c64(0.0, 0.0), 0.0), p).is_err());
    }

    #[test]
    fn pinv_and_completion() {
        let a = ComplexMatrix::diag(&[c64(2.0, 0.0), c64(0.0, 0.0)]);
        let p = pinv(a.mat());
        assert!((p[(0, 0)] - c64(0.5, 0.0)).norm() < 1e-14 && p[(1, 1)].norm() < 1e-14);
        let mut rng = rng_from_seed(1);
        let v = random_unit_vector(4, &mut rng);
        let b = complete_basis(&[v.clone()], 4);
        assert!((b.adjoint() * &b - CMat::identity(4, 4)).norm() < 1e-12);
        assert!((b.column(0) - &v).norm() < 1e-12);
    }
}
