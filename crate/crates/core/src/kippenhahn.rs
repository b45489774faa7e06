//! Kippenhahn polynomial `p_A(x, y, z) = det(x Re A + y Im A + z I)`, its
//! closed-form 5x5 expansion, the support function and pencil sweeps.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{KippError, Result};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, hermitian_parts, wrap};
use crate::matrix::{ComplexMatrix, C64};
use crate::poly::HomoPoly3;

/// Largest dimension accepted by [`kipp_poly_det`].
pub const MAX_DIM: usize = 12;

/// Eigenvalue gap below which a slice is flagged degenerate.
pub const DEGENERATE_GAP: f64 = 1e-7;

/// `cos(theta) H + sin(theta) K`, i.e. `Re(e^{-i theta} A)`.
pub fn pencil(h: &ComplexMatrix, k: &ComplexMatrix, theta: f64) -> DMatrix<C64> {
    h.inner() * C64::new(theta.cos(), 0.0) + k.inner() * C64::new(theta.sin(), 0.0)
}

/// Kippenhahn polynomial from the spectra of the Hermitian pencil.
///
/// The pencil is scaled to unit norm; along each of `2n + 4` directions
/// `det(zI + M) = prod (z + lambda_i)`, so the `z`-coefficients are elementary
/// symmetric functions of the eigenvalues. For each `z`-degree the `(x, y)`
/// part is then fitted by least squares over the directions.
pub fn kipp_poly_det(a: &ComplexMatrix) -> Result<HomoPoly3> {
    let n = a.dim();
    if n > MAX_DIM {
        return Err(KippError::DimensionTooLarge(n));
    }
    let (h, k) = hermitian_parts(a);
    let scale = h.norm().max(k.norm());
    let mut poly = HomoPoly3::zero(n);
    poly.set(0, 0, n, 1.0);
    if scale == 0.0 {
        return Ok(poly);
    }
    let hs = wrap(h.inner().unscale(scale));
    let ks = wrap(k.inner().unscale(scale));
    let n_theta = 2 * n + 4;
    let thetas: Vec<f64> = (0..n_theta)
        .map(|m| PI * (m as f64 + 0.5) / n_theta as f64)
        .collect();

    // g[m][kz] = coefficient of z^kz at direction theta_m
    let g: Vec<Vec<f64>> = thetas
        .iter()
        .map(|&theta| {
            let eig = hermitian_eigenvalues(&pencil(&hs, &ks, theta));
            let mut e = vec![0.0; n + 1];
            e[0] = 1.0;
            for (count, &l) in eig.iter().enumerate() {
                for r in (1..=count + 1).rev() {
                    e[r] += l * e[r - 1];
                }
            }
            (0..=n).map(|kz| e[n - kz]).collect()
        })
        .collect();
    let max_sample = g.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut residual: f64 = 0.0;
    for kz in 0..n {
        let d = n - kz;
        let basis = DMatrix::<f64>::from_fn(n_theta, d + 1, |m, i| {
            thetas[m].cos().powi(i as i32) * thetas[m].sin().powi((d - i) as i32)
        });
        let rhs = nalgebra::DVector::<f64>::from_fn(n_theta, |m, _| g[m][kz]);
        let qr = basis.clone().qr();
        let sol = qr
            .r()
            .solve_upper_triangular(&(qr.q().transpose() * &rhs))
            .ok_or(KippError::IllConditionedInterpolation {
                residual: f64::INFINITY,
                bound: 0.0,
            })?;
        residual = residual.max((basis * &sol - rhs).amax());
        for i in 0..=d {
            poly.set(i, d - i, kz, sol[i]);
        }
    }
    let bound = 1e-8 * max_sample;
    if residual > bound {
        return Err(KippError::IllConditionedInterpolation { residual, bound });
    }

    let mut out = HomoPoly3::zero(n);
    for ((i, j, kz), coef) in poly.terms() {
        out.set(i, j, kz, coef * scale.powi((i + j) as i32));
    }
    Ok(out)
}

/// All injective maps from `vars` slots into `universe` such that the
/// images increase along every chain of slot indices.
pub(crate) fn chain_assignments(
    vars: usize,
    chains: &[&[usize]],
    universe: &[usize],
) -> Vec<Vec<usize>> {
    fn rec(
        slot: usize,
        current: &mut Vec<usize>,
        vars: usize,
        chains: &[&[usize]],
        universe: &[usize],
        out: &mut Vec<Vec<usize>>,
    ) {
        if slot == vars {
            let ok = chains
                .iter()
                .all(|c| c.windows(2).all(|w| current[w[0]] < current[w[1]]));
            if ok {
                out.push(current.clone());
            }
            return;
        }
        for &u in universe {
            if !current.contains(&u) {
                current.push(u);
                rec(slot + 1, current, vars, chains, universe, out);
                current.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(0, &mut Vec::with_capacity(vars), vars, chains, universe, &mut out);
    out
}

pub(crate) const ALL5: [usize; 5] = [0, 1, 2, 3, 4];

/// Checks the shape precondition shared by the 5x5 closed forms.
pub(crate) fn check_triangular5(t: &ComplexMatrix) -> Result<()> {
    if t.dim() != 5 {
        return Err(KippError::NotDim5(t.dim()));
    }
    let tol = 1e-12 * t.max_abs().max(1.0);
    if !t.is_upper_triangular(tol) {
        return Err(KippError::NotUpperTriangular);
    }
    Ok(())
}

/// The scalars `P_i`, one per diagonal index, built from the entries off the
/// `i`-th row and column.
pub fn p_scalars(t: &ComplexMatrix) -> [f64; 5] {
    let a = |j: usize, k: usize| t.get(j, k);
    let mut out = [0.0; 5];
    for (i, slot) in out.iter_mut().enumerate() {
        let comp: Vec<usize> = ALL5.iter().copied().filter(|&u| u != i).collect();
        let mut p = 0.0;
        for s in chain_assignments(4, &[&[0, 1, 3], &[2, 3]], &comp) {
            let (j, k, l, m) = (s[0], s[1], s[2], s[3]);
            p += a(j, k).norm_sqr() * a(l, m).norm_sqr();
        }
        for s in chain_assignments(4, &[&[0, 1, 2], &[0, 3, 2]], &comp) {
            let (j, k, l, m) = (s[0], s[1], s[2], s[3]);
            p -= (a(j, k) * a(k, l) * a(j, m).conj() * a(m, l).conj()).re;
        }
        for s in chain_assignments(4, &[&[0, 1], &[2, 1, 3]], &comp) {
            let (j, k, l, m) = (s[0], s[1], s[2], s[3]);
            p -= (a(j, k) * a(l, m) * a(j, m).conj() * a(l, k).conj()).re;
        }
        *slot = p;
    }
    out
}

/// `alpha x + beta y + z` for `lambda = alpha + i beta`.
pub fn linear_form(lambda: C64) -> HomoPoly3 {
    HomoPoly3::linear(lambda.re, lambda.im, 1.0)
}

fn x_re_y_im(w: C64) -> HomoPoly3 {
    HomoPoly3::linear(w.re, w.im, 0.0)
}

/// The cubic `Q` with `p_A = prod(l_i) - (x^2 + y^2)/4 Q` for an
/// upper-triangular 5x5 `T`.
pub fn q_cubic(t: &ComplexMatrix) -> Result<HomoPoly3> {
    check_triangular5(t)?;
    let a = |j: usize, k: usize| t.get(j, k);
    let l: Vec<HomoPoly3> = (0..5).map(|i| linear_form(t.get(i, i))).collect();
    let quarter_r2 = HomoPoly3::xx_plus_yy().scale(0.25);
    let mut q = HomoPoly3::zero(3);

    for s in chain_assignments(5, &[&[0, 1, 2], &[3, 4]], &ALL5) {
        let (i, j, k, lm, m) = (s[0], s[1], s[2], s[3], s[4]);
        q = q.add(&l[i].mul(&l[j]).mul(&l[k]).scale(a(lm, m).norm_sqr()));
    }
    for s in chain_assignments(5, &[&[0, 1], &[2, 3, 4]], &ALL5) {
        let (i, j, k, lm, m) = (s[0], s[1], s[2], s[3], s[4]);
        let x = a(k, lm) * a(lm, m) * a(k, m).conj();
        let lin = x_re_y_im(x);
        q = q.sub(&lin.mul(&l[i]).mul(&l[j]));
        q = q.add(&quarter_r2.mul(&lin).scale(a(i, j).norm_sqr()));
    }
    let p = p_scalars(t);
    for i in 0..5 {
        q = q.sub(&quarter_r2.mul(&l[i]).scale(p[i]));
    }
    for s in chain_assignments(5, &[&[0], &[1, 2, 3, 4]], &ALL5) {
        let (i, j, k, lm, m) = (s[0], s[1], s[2], s[3], s[4]);
        let y = a(j, k) * a(k, lm) * a(lm, m) * a(j, m).conj();
        let mut quad = HomoPoly3::zero(2);
        quad.set(2, 0, 0, 0.5 * y.re);
        quad.set(0, 2, 0, -0.5 * y.re);
        quad.set(1, 1, 0, y.im);
        q = q.add(&l[i].mul(&quad));
    }
    for s in chain_assignments(5, &[&[0, 1, 2, 3], &[0, 4, 3]], &ALL5) {
        let (i, j, k, lm, m) = (s[0], s[1], s[2], s[3], s[4]);
        let z = a(i, j) * a(j, k) * a(k, lm) * a(i, m).conj() * a(m, lm).conj();
        q = q.sub(&quarter_r2.mul(&x_re_y_im(z)));
    }
    for s in chain_assignments(5, &[&[0, 1, 2], &[3, 4], &[0, 4], &[3, 2]], &ALL5) {
        let (i, j, k, lm, m) = (s[0], s[1], s[2], s[3], s[4]);
        let w = a(i, j) * a(j, k) * a(lm, m) * a(i, m).conj() * a(lm, k).conj();
        q = q.sub(&quarter_r2.mul(&x_re_y_im(w)));
    }
    let v = a(0, 1) * a(1, 2) * a(2, 3) * a(3, 4) * a(0, 4).conj();
    let mut cubic = HomoPoly3::zero(3);
    cubic.set(3, 0, 0, v.re);
    cubic.set(1, 2, 0, -3.0 * v.re);
    cubic.set(2, 1, 0, 3.0 * v.im);
    cubic.set(0, 3, 0, -v.im);
    q = q.sub(&cubic.scale(0.25));
    Ok(q)
}

/// Kippenhahn polynomial of an upper-triangular 5x5 matrix from the closed
/// form `prod(alpha_i x + beta_i y + z) - (x^2 + y^2)/4 Q(x, y, z)`.
pub fn kipp_poly_expanded(t: &ComplexMatrix) -> Result<HomoPoly3> {
    let q = q_cubic(t)?;
    let prod = (0..5).fold(HomoPoly3::one(), |acc, i| acc.mul(&linear_form(t.get(i, i))));
    Ok(prod.sub(&HomoPoly3::xx_plus_yy().scale(0.25).mul(&q)))
}

/// `lambda_max(Re(e^{-i theta} A))`.
pub fn support_function(a: &ComplexMatrix, theta: f64) -> f64 {
    let (h, k) = hermitian_parts(a);
    support_from_parts(&h, &k, theta)
}

pub(crate) fn support_from_parts(h: &ComplexMatrix, k: &ComplexMatrix, theta: f64) -> f64 {
    *hermitian_eigenvalues(&pencil(h, k, theta))
        .last()
        .expect("dim >= 1")
}

/// All eigenpairs of `Re(e^{-i theta} A)` and the matching points of the
/// Kippenhahn curve.
#[derive(Debug, Clone)]
pub struct SpectralSlice {
    pub theta: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: DMatrix<C64>,
    /// `<H u_k, u_k> + i <K u_k, u_k>`.
    pub curve_points: Vec<C64>,
    /// Two eigenvalues within [`DEGENERATE_GAP`].
    pub degenerate: bool,
}

pub fn spectral_slice(a: &ComplexMatrix, theta: f64) -> SpectralSlice {
    let (h, k) = hermitian_parts(a);
    slice_from_parts(&h, &k, theta)
}

pub(crate) fn slice_from_parts(h: &ComplexMatrix, k: &ComplexMatrix, theta: f64) -> SpectralSlice {
    let (eigenvalues, eigenvectors) = hermitian_eigen(&pencil(h, k, theta));
    let curve_points = (0..eigenvalues.len())
        .map(|col| {
            let u = eigenvectors.column(col);
            let hu = h.inner() * u;
            let ku = k.inner() * u;
            C64::new(u.dotc(&hu).re, u.dotc(&ku).re)
        })
        .collect();
    let degenerate = eigenvalues.windows(2).any(|w| w[1] - w[0] < DEGENERATE_GAP);
    SpectralSlice {
        theta,
        eigenvalues,
        eigenvectors,
        curve_points,
        degenerate,
    }
}

fn uniform_angles(samples: usize) -> Vec<f64> {
    (0..samples)
        .map(|m| 2.0 * PI * m as f64 / samples as f64)
        .collect()
}

/// Extreme points of `W(A)` traced by the top eigenvector over a uniform
/// angle grid on `[0, 2 pi)`.
pub fn boundary_polyline(a: &ComplexMatrix, samples: usize) -> Result<Vec<C64>> {
    if samples < 8 {
        return Err(KippError::InvalidArgument(format!(
            "boundary needs at least 8 samples, got {samples}"
        )));
    }
    let (h, k) = hermitian_parts(a);
    Ok(uniform_angles(samples)
        .par_iter()
        .map(|&theta| {
            *slice_from_parts(&h, &k, theta)
                .curve_points
                .last()
                .expect("dim >= 1")
        })
        .collect())
}

/// Spectral slices over a uniform grid on `[0, 2 pi)`, in angle order.
pub fn curve_points(a: &ComplexMatrix, samples: usize) -> Result<Vec<SpectralSlice>> {
    if samples < 1 {
        return Err(KippError::InvalidArgument("samples must be positive".into()));
    }
    let (h, k) = hermitian_parts(a);
    Ok(uniform_angles(samples)
        .par_iter()
        .map(|&theta| slice_from_parts(&h, &k, theta))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn shift(n: usize) -> ComplexMatrix {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n - 1 {
            m[(i, i + 1)] = c(1.0, 0.0);
        }
        ComplexMatrix::new(m).unwrap()
    }

    #[test]
    fn det_poly_of_nilpotent_2x2() {
        let p = kipp_poly_det(&shift(2)).unwrap();
        assert_eq!(p.coeff(0, 0, 2), 1.0);
        assert!((p.coeff(2, 0, 0) + 0.25).abs() < 1e-14);
        assert!((p.coeff(0, 2, 0) + 0.25).abs() < 1e-14);
        assert!(p.coeff(1, 1, 0).abs() < 1e-14);
        assert!(p.coeff(1, 0, 1).abs() < 1e-14);
    }

    #[test]
    fn det_poly_of_diagonal_is_product() {
        let lams = [c(1.0, 0.5), c(-0.3, 0.0), c(0.0, -2.0), c(0.7, 0.7), c(-1.0, 0.25)];
        let d = ComplexMatrix::diagonal(&lams);
        let p = kipp_poly_det(&d).unwrap();
        let prod = lams.iter().fold(HomoPoly3::one(), |acc, l| acc.mul(&linear_form(*l)));
        assert!(p.relative_distance(&prod) < 1e-12);
        let e = kipp_poly_expanded(&d).unwrap();
        assert!(e.relative_distance(&prod) < 1e-15);
    }

    #[test]
    fn det_poly_of_zero_and_scalar() {
        let p = kipp_poly_det(&ComplexMatrix::zeros(3)).unwrap();
        assert_eq!(p, HomoPoly3::monomial(0, 0, 3, 1.0));
        let p = kipp_poly_det(&ComplexMatrix::identity(1).scale(c(2.0, -1.0))).unwrap();
        assert!(p.relative_distance(&HomoPoly3::linear(2.0, -1.0, 1.0)) < 1e-14);
    }

    #[test]
    fn det_poly_rejects_large_dim() {
        assert!(matches!(
            kipp_poly_det(&ComplexMatrix::identity(13)),
            Err(KippError::DimensionTooLarge(13))
        ));
        assert!(kipp_poly_det(&shift(12)).is_ok());
    }

    #[test]
    fn expanded_rejects_bad_shapes() {
        assert!(matches!(
            kipp_poly_expanded(&shift(4)),
            Err(KippError::NotDim5(4))
        ));
        assert!(matches!(
            kipp_poly_expanded(&shift(5).adjoint()),
            Err(KippError::NotUpperTriangular)
        ));
    }

    #[test]
    fn expanded_matches_determinant_on_shift() {
        let j5 = shift(5);
        let e = kipp_poly_expanded(&j5).unwrap();
        let d = kipp_poly_det(&j5).unwrap();
        assert!(e.relative_distance(&d) < 1e-12);
    }

    #[test]
    fn chain_counts() {
        assert_eq!(chain_assignments(5, &[&[0, 1, 2, 3], &[0, 4, 3]], &ALL5).len(), 3);
        assert_eq!(chain_assignments(5, &[&[0, 1, 2], &[3, 4], &[0, 4], &[3, 2]], &ALL5).len(), 8);
        assert_eq!(chain_assignments(5, &[&[0, 1, 2], &[3, 4]], &ALL5).len(), 10);
    }

    #[test]
    fn support_function_examples() {
        for theta in [0.0, 0.3, 2.0, 5.5] {
            assert!((support_function(&shift(2), theta) - 0.5).abs() < 1e-15);
        }
        let d = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert!((support_function(&d, 0.0) - 1.0).abs() < 1e-15);
        assert!((support_function(&shift(5), 0.0) - (PI / 6.0).cos()).abs() < 1e-14);
    }

    #[test]
    fn slice_of_normal_matrix_is_spectrum() {
        let lams = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, -1.0)];
        let d = ComplexMatrix::diagonal(&lams);
        let s = spectral_slice(&d, 0.4);
        for z in &s.curve_points {
            assert!(lams.iter().any(|l| (l - z).norm() < 1e-14));
        }
        let s = spectral_slice(&shift(2), 0.0);
        assert!((s.curve_points[0] - c(-0.5, 0.0)).norm() < 1e-15);
        assert!((s.curve_points[1] - c(0.5, 0.0)).norm() < 1e-15);
        assert!(!s.degenerate);
    }

    #[test]
    fn tangency_identity_holds() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(0.1, 0.2), c(1.0, -0.5), c(0.0, 0.3)],
            vec![c(0.4, 0.0), c(-0.7, 0.1), c(0.2, 0.2)],
            vec![c(0.0, 1.0), c(0.3, 0.0), c(0.5, -0.4)],
        ])
        .unwrap();
        for s in curve_points(&a, 24).unwrap() {
            let (ct, st) = (s.theta.cos(), s.theta.sin());
            for (z, e) in s.curve_points.iter().zip(&s.eigenvalues) {
                assert!((ct * z.re + st * z.im - e).abs() < 1e-12);
            }
            let top = s.curve_points.iter().map(|z| ct * z.re + st * z.im).fold(f64::MIN, f64::max);
            assert!((top - support_function(&a, s.theta)).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_of_scalar_and_shift() {
        let s = ComplexMatrix::identity(3).scale(c(0.5, -2.0));
        for z in boundary_polyline(&s, 16).unwrap() {
            assert!((z - c(0.5, -2.0)).norm() < 1e-14);
        }
        for z in boundary_polyline(&shift(2), 64).unwrap() {
            assert!((z.norm() - 0.5).abs() < 1e-10);
        }
        assert!(boundary_polyline(&shift(2), 7).is_err());
    }
}
