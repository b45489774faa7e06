//! Deterministic and seeded constructors for the matrix families used by the
//! classifier and the experiments.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{KippError, Result};
use crate::linalg::{hermitian_eigen, singular_values, wrap};
use crate::matrix::{ComplexMatrix, C64};

/// The generator RNG: ChaCha8 seeded from a 64-bit value.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian (`E|z|^2 = 1`).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Uniform sample from the closed unit disc.
pub fn unit_disc<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let r = rng.random::<f64>().sqrt();
    let phi = rng.random::<f64>() * std::f64::consts::TAU;
    C64::from_polar(r, phi)
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            d / d.norm()
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    wrap(q)
}

/// Dense matrix with entries uniform in the unit disc.
pub fn random_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    wrap(DMatrix::from_fn(n, n, |_, _| unit_disc(rng)))
}

/// Upper-triangular matrix with entries uniform in the disc of radius `scale`.
pub fn random_upper_triangular<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> ComplexMatrix {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            m[(i, j)] = unit_disc(rng) * scale;
        }
    }
    wrap(m)
}

/// Ones on the superdiagonal.
pub fn jordan_shift(n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(KippError::InvalidArgument(format!(
            "Jordan shift needs n >= 2, got {n}"
        )));
    }
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        m[(i, i + 1)] = C64::new(1.0, 0.0);
    }
    Ok(wrap(m))
}

/// `[[l1, r], [0, l2]] ⊕ [[l3, s], [0, l4]] ⊕ [l5]`.
pub fn two_ellipse_block(l: [C64; 5], r: f64, s: f64) -> Result<ComplexMatrix> {
    if !(r >= 0.0 && s >= 0.0) {
        return Err(KippError::InvalidArgument(format!(
            "minor axes must be nonnegative, got r = {r}, s = {s}"
        )));
    }
    let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&l));
    m[(0, 1)] = C64::new(r, 0.0);
    m[(2, 3)] = C64::new(s, 0.0);
    ComplexMatrix::new(m)
}

/// The 5x5 partial isometry of class `S_5` with eigenvalues `{a, a, 0, b, c}`.
pub fn s5_family(a: f64, b: C64, c: C64) -> Result<ComplexMatrix> {
    if !(0.0..1.0).contains(&a) {
        return Err(KippError::ParameterOutOfDisc {
            name: "a",
            value: a.to_string(),
        });
    }
    if !(b.norm() < 1.0) {
        return Err(KippError::ParameterOutOfDisc {
            name: "b",
            value: b.to_string(),
        });
    }
    if !(c.norm() < 1.0) {
        return Err(KippError::ParameterOutOfDisc {
            name: "c",
            value: c.to_string(),
        });
    }
    let sa = (1.0 - a * a).sqrt();
    let sb = (1.0 - b.norm_sqr()).sqrt();
    let sc = (1.0 - c.norm_sqr()).sqrt();
    let re = |x: f64| C64::new(x, 0.0);
    let z = re(0.0);
    let rows = vec![
        vec![re(a), re(1.0 - a * a), re(-a * sa), z, z],
        vec![z, re(a), re(sa), z, z],
        vec![z, z, z, re(sb), -b.conj() * sc],
        vec![z, z, z, b, re(sb * sc)],
        vec![z, z, z, z, c],
    ];
    ComplexMatrix::from_rows(&rows)
}

/// Upper-triangular 3x3 with diagonal `(l3, l4, l5)` for which
/// `Re(e^{-i theta} C) + mu I` has rank one.
///
/// With `mu_j = Re(e^{-i theta} l_j) + mu`, the off-diagonal entries are
/// `a = 2 sqrt(mu_3 mu_4) e^{i phase_a}`, `b = 2 sqrt(mu_3 mu_5) e^{i phase_b}`
/// and `c = conj(a) b e^{i theta} / (2 mu_3)`.
pub fn flat_3x3(
    l3: C64,
    l4: C64,
    l5: C64,
    theta: f64,
    mu: f64,
    phase_a: f64,
    phase_b: f64,
) -> Result<ComplexMatrix> {
    let rot = C64::from_polar(1.0, -theta);
    let mus: Vec<f64> = [l3, l4, l5].iter().map(|l| (rot * l).re + mu).collect();
    for (idx, &m) in mus.iter().enumerate() {
        if !(m > 0.0) {
            return Err(KippError::InfeasibleMu {
                index: idx + 3,
                value: m,
            });
        }
    }
    let a = C64::from_polar(2.0 * (mus[0] * mus[1]).sqrt(), phase_a);
    let b = C64::from_polar(2.0 * (mus[0] * mus[2]).sqrt(), phase_b);
    let c = a.conj() * b * C64::from_polar(1.0, theta) / (2.0 * mus[0]);
    let z = C64::new(0.0, 0.0);
    ComplexMatrix::from_rows(&[vec![l3, a, b], vec![z, l4, c], vec![z, z, l5]])
}

/// `U2* [0_{n x m} | V] U2` with `V` the first `n - m` columns of a Haar
/// unitary and `U2` a second Haar unitary.
pub fn random_partial_isometry(n: usize, m: usize, seed: u64) -> Result<ComplexMatrix> {
    let mut rng = seeded_rng(seed);
    random_partial_isometry_with(n, m, &mut rng)
}

pub fn random_partial_isometry_with<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    if n == 0 || m > n {
        return Err(KippError::BadDims(format!(
            "kernel dimension {m} for n = {n}"
        )));
    }
    let u1 = haar_unitary(n, rng);
    let u2 = haar_unitary(n, rng);
    let mut a0 = DMatrix::zeros(n, n);
    a0.view_mut((0, m), (n, n - m))
        .copy_from(&u1.inner().columns(0, n - m));
    Ok(wrap(a0).conjugate_by(&u2))
}

/// A kernel-dimension-2 partial isometry `[[0, B], [0, C]]` on `C^2 ⊕ C^3`
/// with `C = [[b, e, f], [0, a, d], [0, 0, a]]`, `a > 0`.
///
/// `C` is a random upper-triangular contraction with norm one and repeated
/// diagonal entry `a`; `B` is read off the nonzero spectrum of `I - C*C`.
/// With `b_equals_a` the leading diagonal entry repeats `a` as well.
pub fn ker2_family(seed: u64, b_equals_a: bool) -> ComplexMatrix {
    let mut rng = seeded_rng(seed);
    let a = rng.random_range(0.4..0.9);
    let b = if b_equals_a {
        C64::new(a, 0.0)
    } else {
        // keep b visibly away from a
        C64::from_polar(rng.random_range(0.0..0.5), rng.random_range(0.0..std::f64::consts::TAU))
            - C64::new(0.5, 0.0)
    };
    let e = complex_gaussian(&mut rng);
    let f = complex_gaussian(&mut rng);
    let d = complex_gaussian(&mut rng);
    let z = C64::new(0.0, 0.0);
    let ar = C64::new(a, 0.0);
    let c0 = DMatrix::from_row_slice(3, 3, &[b, e, f, z, ar, d, z, z, ar]);
    let norm = singular_values(&c0)[0];
    let c = c0.unscale(norm);
    let defect = DMatrix::<C64>::identity(3, 3) - c.adjoint() * &c;
    let (vals, vecs) = hermitian_eigen(&defect);
    let mut bm = DMatrix::zeros(2, 3);
    for (row, idx) in [2usize, 1].into_iter().enumerate() {
        let s = vals[idx].max(0.0).sqrt();
        let u = vecs.column(idx).adjoint() * C64::new(s, 0.0);
        bm.set_row(row, &u);
    }
    let mut out = DMatrix::zeros(5, 5);
    out.view_mut((0, 2), (2, 3)).copy_from(&bm);
    out.view_mut((2, 2), (3, 3)).copy_from(&c);
    wrap(out)
}
