//! Davis-Wielandt shells DW(A) = {(x*Ax, ‖Ax‖²) : ‖x‖ = 1}, their inverse
//! images under f_inv, and the inverse sets derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{DwError, Result};
use crate::graphs::{numerical_range_boundary, BoundaryCurve2D};
use crate::linalg::*;

/// Matrix whose top eigenvector gives the support point of DW(A) in direction d.
pub fn support_matrix(a: &CMat, gram: &CMat, d: &ShellPoint) -> CMat {
    herm(&(a * d.z.conj())) + gram * c64(d.nu, 0.0)
}

/// (x*Ax, ‖Ax‖²) for a unit vector x.
pub fn shell_point_of(a: &CMat, x: &CVec) -> ShellPoint {
    let ax = a * x;
    ShellPoint::new(x.dotc(&ax), ax.norm_squared())
}

pub fn dw_support_point(a: &ComplexMatrix, d: &ShellPoint) -> Result<(ShellPoint, f64)> {
    if (d.norm() - 1.0).abs() > 1e-9 {
        return Err(DwError::InvalidArgument(format!("direction must be unit, |d| = {}", d.norm())));
    }
    let gram = a.gram();
    Ok(support_raw(a.mat(), &gram, d))
}

pub(crate) fn support_raw(a: &CMat, gram: &CMat, d: &ShellPoint) -> (ShellPoint, f64) {
    let (val, x) = top_eig(&support_matrix(a, gram, d));
    (shell_point_of(a, &x), val)
}

/// Support function h(d) = max over DW(A) of ⟨d, ·⟩.
pub fn support_value(a: &CMat, gram: &CMat, d: &ShellPoint) -> f64 {
    lambda_max(&support_matrix(a, gram, d))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShellBoundary {
    pub points: Vec<ShellPoint>,
    pub directions: Vec<ShellPoint>,
    pub matrix_dim: usize,
}

/// N unit directions: N − 2 Fibonacci-sphere points plus the poles (0, 0, ±1).
pub fn fibonacci_directions(n: usize) -> Vec<ShellPoint> {
    let n = n.max(3);
    let m = n - 2;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut out = Vec::with_capacity(n);
    out.push(ShellPoint::new(c64(0.0, 0.0), 1.0));
    out.push(ShellPoint::new(c64(0.0, 0.0), -1.0));
    for i in 0..m {
        let y = 1.0 - 2.0 * (i as f64 + 0.5) / m as f64;
        let r = (1.0 - y * y).max(0.0).sqrt();
        out.push(ShellPoint::new(C64::from_polar(r, golden * i as f64), y));
    }
    out
}

pub fn dw_boundary(a: &ComplexMatrix, n: usize) -> Result<ShellBoundary> {
    if n < 8 {
        return Err(DwError::InvalidArgument("dw_boundary needs N >= 8".into()));
    }
    Ok(dw_boundary_with_directions(a, &fibonacci_directions(n)))
}

pub fn dw_boundary_with_directions(a: &ComplexMatrix, dirs: &[ShellPoint]) -> ShellBoundary {
    let gram = a.gram();
    let points = dirs.iter().map(|d| support_raw(a.mat(), &gram, d).0).collect();
    ShellBoundary { points, directions: dirs.to_vec(), matrix_dim: a.dim() }
}

/// f_inv(z, ν) = (z̄/ν, 1/ν).
pub fn f_inv_map(p: &ShellPoint) -> Result<ShellPoint> {
    if !(p.nu > 0.0) {
        return Err(DwError::InvalidArgument("f_inv undefined at nu = 0".into()));
    }
    Ok(ShellPoint::new(p.z.conj() / p.nu, 1.0 / p.nu))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InverseShellBoundary {
    pub points: Vec<ShellPoint>,
    pub nu_cap: f64,
    pub truncated: bool,
}

pub const DEFAULT_NU_CAP: f64 = 1e6;

pub fn inverse_dw_boundary(a: &ComplexMatrix, n: usize, nu_cap: f64) -> Result<InverseShellBoundary> {
    if !(nu_cap > 0.0) {
        return Err(DwError::InvalidArgument("nu_cap must be positive".into()));
    }
    let b = dw_boundary(a, n)?;
    let singular = zero_eigen_normality(a) != ZeroEigenClass::Nonsingular;
    let mut points = Vec::with_capacity(b.points.len());
    let mut discarded = false;
    for p in &b.points {
        if p.nu <= 0.0 {
            discarded = true;
            continue;
        }
        let q = f_inv_map(p)?;
        if q.nu > nu_cap {
            discarded = true;
        } else {
            points.push(q);
        }
    }
    Ok(InverseShellBoundary { points, nu_cap, truncated: singular || discarded })
}

/// Interval of squared gains; hi may be +∞. The empty set is stored as [∞, ∞).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainInterval {
    pub lo: f64,
    pub hi: f64,
}

impl GainInterval {
    pub fn empty() -> Self {
        Self { lo: f64::INFINITY, hi: f64::INFINITY }
    }

    pub fn is_empty(&self) -> bool {
        self.lo == f64::INFINITY
    }
}

pub fn gain_interval(a: &ComplexMatrix) -> GainInterval {
    let (lo, hi) = singular_value_extremes(a.mat());
    GainInterval { lo: lo * lo, hi: hi * hi }
}

pub fn inverse_gain_interval(a: &ComplexMatrix) -> GainInterval {
    let (lo, hi) = singular_value_extremes(a.mat());
    if hi == 0.0 {
        return GainInterval::empty();
    }
    if lo < RANK_TOL * hi {
        return GainInterval { lo: 1.0 / (hi * hi), hi: f64::INFINITY };
    }
    GainInterval { lo: 1.0 / (hi * hi), hi: 1.0 / (lo * lo) }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroEigenClass {
    Nonsingular,
    NormalZero,
    NonnormalZero,
}

pub fn zero_eigen_normality(a: &ComplexMatrix) -> ZeroEigenClass {
    let (_, s, v) = svd_full(a.mat());
    let smax = s[0];
    if smax == 0.0 {
        return ZeroEigenClass::NormalZero;
    }
    if s[s.len() - 1] > RANK_TOL * smax {
        return ZeroEigenClass::Nonsingular;
    }
    let adj = a.mat().adjoint();
    for (k, &sk) in s.iter().enumerate() {
        if sk <= RANK_TOL * smax {
            let x = v.column(k).into_owned();
            if (&adj * x).norm() > 1e-8 * smax {
                return ZeroEigenClass::NonnormalZero;
            }
        }
    }
    ZeroEigenClass::NormalZero
}

/// Orthonormal basis of range(A) (left singular vectors above the rank threshold).
pub fn range_basis(a: &CMat) -> CMat {
    let (u, s, _) = svd_full(a);
    let smax = s[0];
    let cols: Vec<CVec> = s
        .iter()
        .enumerate()
        .filter(|(_, &sk)| smax > 0.0 && sk > RANK_TOL * smax)
        .map(|(k, _)| u.column(k).into_owned())
        .collect();
    if cols.is_empty() {
        CMat::zeros(a.nrows(), 0)
    } else {
        CMat::from_columns(&cols)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InverseNumericalRange {
    WholePlane,
    Empty,
    Curve { compressed_dim: usize, curve: BoundaryCurve2D },
}

/// Compression U*A⁺U onto range(A); W⁻¹(A) is its numerical range whenever zero is not a non-normal eigenvalue.
pub fn inverse_compression(a: &ComplexMatrix) -> Option<CMat> {
    let u = range_basis(a.mat());
    if u.ncols() == 0 {
        return None;
    }
    Some(u.adjoint() * pinv(a.mat()) * &u)
}

pub fn inverse_numerical_range(a: &ComplexMatrix, n: usize) -> Result<InverseNumericalRange> {
    if n < 16 {
        return Err(DwError::InvalidArgument("inverse_numerical_range needs N >= 16".into()));
    }
    if zero_eigen_normality(a) == ZeroEigenClass::NonnormalZero {
        return Ok(InverseNumericalRange::WholePlane);
    }
    match inverse_compression(a) {
        None => Ok(InverseNumericalRange::Empty),
        Some(t) => {
            let k = t.nrows();
            let curve = numerical_range_boundary(&ComplexMatrix::new(t)?, n)?;
            Ok(InverseNumericalRange::Curve { compressed_dim: k, curve })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point_in_polygon;

    fn nil() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()
    }

    #[test]
    fn support_point_examples() {
        let d = ShellPoint::new(c64(0.6, 0.0), 0.8);
        let (p, v) = dw_support_point(&ComplexMatrix::identity(2), &d).unwrap();
        assert!((p.z - c64(1.0, 0.0)).norm() < 1e-14 && (p.nu - 1.0).abs() < 1e-14);
        assert!((v - 1.4).abs() < 1e-14);
        let up = ShellPoint::new(c64(0.0, 0.0), 1.0);
        let (p, _) = dw_support_point(&ComplexMatrix::diag(&[c64(1.0, 0.0), c64(2.0, 0.0)]), &up).unwrap();
        assert!((p.z - c64(2.0, 0.0)).norm() < 1e-14 && (p.nu - 4.0).abs() < 1e-14);
        let (p, v) = dw_support_point(&nil(), &up).unwrap();
        assert!(p.z.norm() < 1e-14 && (p.nu - 1.0).abs() < 1e-14 && (v - 1.0).abs() < 1e-14);
        assert!(dw_support_point(&nil(), &ShellPoint::new(c64(1.0, 0.0), 1.0)).is_err());
    }

    // Oracle: exhaustive sweep over x = (cos t, sin t e^{iφ}) of ⟨d, p(x)⟩.
    #[test]
    fn support_value_against_sweep() {
        let mut rng = rng_from_seed(2);
        let a = random_matrix(2, &mut rng);
        let gram = a.gram();
        for d in fibonacci_directions(20) {
            let mut best = f64::NEG_INFINITY;
            for i in 0..=300 {
                for j in 0..300 {
                    let t = std::f64::consts::FRAC_PI_2 * i as f64 / 300.0;
                    let ph = 2.0 * std::f64::consts::PI * j as f64 / 300.0;
                    let x = CVec::from_vec(vec![c64(t.cos(), 0.0), cis(ph) * t.sin()]);
                    best = best.max(d.inner(&shell_point_of(a.mat(), &x)));
                }
            }
            let (p, v) = support_raw(a.mat(), &gram, &d);
            assert!((d.inner(&p) - v).abs() < 1e-10);
            assert!(v >= best - 1e-12 && v <= best + 1e-3 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn boundary_examples() {
        let b = dw_boundary(&ComplexMatrix::scalar(c64(3.0, 0.0)), 50).unwrap();
        assert!(b.points.iter().all(|p| (p.z - c64(3.0, 0.0)).norm() < 1e-14 && (p.nu - 9.0).abs() < 1e-13));
        let a = ComplexMatrix::diag(&[c64(0.0, -1.0), c64(1.0, 0.0)]);
        let b = dw_boundary(&a, 200).unwrap();
        let (p0, p1) = (ShellPoint::new(c64(0.0, -1.0), 1.0), ShellPoint::new(c64(1.0, 0.0), 1.0));
        for p in &b.points {
            let d = crate::geometry::dist_to_hull(&p.to_array(), &[p0.to_array().to_vec(), p1.to_array().to_vec()]);
            assert!(d < 1e-6, "d = {d}");
        }
        let b = dw_boundary(&nil(), 500).unwrap();
        for p in &b.points {
            assert!((p.z.norm_sqr() + (p.nu - 0.5).powi(2) - 0.25).abs() < 1e-6);
        }
        assert!(dw_boundary(&nil(), 4).is_err());
    }

    #[test]
    fn support_inequality_and_epi() {
        let mut rng = rng_from_seed(4);
        for n in 1..=5 {
            let a = random_matrix(n, &mut rng);
            let b = dw_boundary(&a, 120).unwrap();
            for (p, d) in b.points.iter().zip(&b.directions) {
                assert!(p.epi_margin() >= -1e-9 * (1.0 + p.nu));
                for q in &b.points {
                    assert!(d.inner(p) >= d.inner(q) - 1e-9 * (1.0 + q.norm()));
                }
            }
        }
    }

    #[test]
    fn f_inv_examples() {
        let p = f_inv_map(&ShellPoint::new(c64(1.0, 0.0), 1.0)).unwrap();
        assert!((p.z - c64(1.0, 0.0)).norm() < 1e-15 && (p.nu - 1.0).abs() < 1e-15);
        let p = f_inv_map(&ShellPoint::new(c64(0.0, 1.0), 2.0)).unwrap();
        assert!((p.z - c64(0.0, -0.5)).norm() < 1e-15 && (p.nu - 0.5).abs() < 1e-15);
        assert!(f_inv_map(&ShellPoint::new(c64(0.0, 0.0), 0.0)).is_err());
        use rand::Rng;
        let mut rng = rng_from_seed(5);
        for _ in 0..100 {
            let p = ShellPoint::new(c64(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)), rng.random_range(0.01..10.0));
            let q = f_inv_map(&f_inv_map(&p).unwrap()).unwrap();
            assert!(p.dist(&q) < 1e-12 * (1.0 + p.norm()));
        }
    }

    #[test]
    fn inverse_boundary_examples() {
        let b = inverse_dw_boundary(&ComplexMatrix::scalar(c64(2.0, 0.0)), 20, 1e6).unwrap();
        assert!(!b.truncated);
        assert!(b.points.iter().all(|p| (p.z - c64(0.5, 0.0)).norm() < 1e-14 && (p.nu - 0.25).abs() < 1e-14));
        let a = ComplexMatrix::diag(&[c64(1.0, 0.0), c64(2.0, 0.0)]);
        let inv = inverse_dw_boundary(&a, 200, 1e6).unwrap();
        let ai = ComplexMatrix::diag(&[c64(1.0, 0.0), c64(0.5, 0.0)]);
        let direct = dw_boundary(&ai, 200).unwrap();
        let h = crate::geometry::hausdorff_points(
            &inv.points.iter().map(|p| p.to_array().to_vec()).collect::<Vec<_>>(),
            &direct.points.iter().map(|p| p.to_array().to_vec()).collect::<Vec<_>>(),
        );
        assert!(h < 1e-6, "h = {h}");
        let b = inverse_dw_boundary(&nil(), 400, 10.0).unwrap();
        assert!(b.truncated);
        assert!(b.points.iter().all(|p| p.nu >= p.z.norm_sqr() + 1.0 - 1e-6 && p.nu <= 10.0));
    }

    #[test]
    fn gain_intervals() {
        let g = inverse_gain_interval(&ComplexMatrix::diag(&[c64(1.0, 0.0), c64(2.0, 0.0)]));
        assert!((g.lo - 0.25).abs() < 1e-14 && (g.hi - 1.0).abs() < 1e-14);
        let g = inverse_gain_interval(&nil());
        assert!((g.lo - 1.0).abs() < 1e-14 && g.hi == f64::INFINITY);
        assert!(inverse_gain_interval(&ComplexMatrix::zeros(2)).is_empty());
        let g = gain_interval(&ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.5, 1.0]]).unwrap());
        assert!(g.lo.abs() < 1e-14 && (g.hi - 1.25).abs() < 1e-12);
    }

    #[test]
    fn zero_eigen_classes() {
        assert_eq!(zero_eigen_normality(&ComplexMatrix::identity(2)), ZeroEigenClass::Nonsingular);
        assert_eq!(zero_eigen_normality(&ComplexMatrix::diag(&[c64(1.0, 0.0), c64(0.0, 0.0)])), ZeroEigenClass::NormalZero);
        assert_eq!(zero_eigen_normality(&nil()), ZeroEigenClass::NonnormalZero);
        assert_eq!(zero_eigen_normality(&ComplexMatrix::zeros(3)), ZeroEigenClass::NormalZero);
    }

    #[test]
    fn inverse_numerical_range_examples() {
        match inverse_numerical_range(&ComplexMatrix::diag(&[c64(2.0, 0.0), c64(4.0, 0.0)]), 64).unwrap() {
            InverseNumericalRange::Curve { curve, .. } => {
                for v in &curve.vertices {
                    assert!(v.im.abs() < 1e-12 && v.re >= 0.25 - 1e-12 && v.re <= 0.5 + 1e-12);
                }
                assert!(curve.vertices.iter().any(|v| (v.re - 0.25).abs() < 1e-12));
                assert!(curve.vertices.iter().any(|v| (v.re - 0.5).abs() < 1e-12));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(inverse_numerical_range(&nil(), 32).unwrap(), InverseNumericalRange::WholePlane));
        match inverse_numerical_range(&ComplexMatrix::diag(&[c64(1.0, 0.0), c64(0.0, 0.0)]), 32).unwrap() {
            InverseNumericalRange::Curve { compressed_dim, curve } => {
                assert_eq!(compressed_dim, 1);
                assert!(curve.vertices.iter().all(|v| (v - c64(1.0, 0.0)).norm() < 1e-12));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    // Oracle: vertical projections conj(x*Ax)/‖Ax‖² of inverse-shell points of
    // random non-real matrices must lie in the computed W⁻¹(A).
    #[test]
    fn inverse_numerical_range_contains_projected_inverse_shell() {
        let mut rng = rng_from_seed(9);
        for n in 2..=4 {
            let a = random_matrix(n, &mut rng);
            let curve = match inverse_numerical_range(&a, 256).unwrap() {
                InverseNumericalRange::Curve { curve, .. } => curve,
                other => panic!("unexpected {other:?}"),
            };
            let poly = &curve.vertices;
            let diam = poly.iter().map(|v| poly.iter().map(|w| (v - w).norm()).fold(0.0, f64::max)).fold(0.0, f64::max);
            for _ in 0..200 {
                let x = random_unit_vector(n, &mut rng);
                let q = f_inv_map(&shell_point_of(a.mat(), &x)).unwrap();
                assert!(point_in_polygon(q.z, poly, 1e-3 * diam));
            }
        }
    }
}
