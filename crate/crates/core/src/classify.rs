//! Decision layer: circular-disc fits of `W(A)`, factor peeling of `p_A`,
//! flat-portion detection, coefficient-condition reports and the 5x5 curve
//! classification.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{KippError, Result};
use crate::kippenhahn::{
    chain_assignments, check_triangular5, kipp_poly_det, linear_form, p_scalars, pencil,
    support_from_parts, ALL5,
};
use crate::linalg::{hermitian_eigenvalues, hermitian_parts, lexicographic_cmp, schur_triangularize, EigenOrder};
use crate::matrix::{ComplexMatrix, C64};
use crate::poly::HomoPoly3;

/// Default number of support samples for [`fit_disc`]; a multiple of 12 so
/// the anchored grid is invariant under the anchor's residual ambiguity.
pub const DEFAULT_DISC_SAMPLES: usize = 240;

/// Default classification tolerance (relative coefficient residual).
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-8;

/// Default margin separating "not equal" from "equal" in predicate rows.
pub const DEFAULT_MARGIN: f64 = 1e-9;

/// Eigenvalues closer than this (times `max(1, ‖A‖_F)`) are merged before peeling.
pub const CLUSTER_TOL: f64 = 1e-5;

/// Fitted support model `h(theta) = r + Re(e^{-i theta} a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscFit {
    pub center: C64,
    pub radius: f64,
    /// Largest absolute deviation between sampled support values and the model.
    pub residual: f64,
}

impl DiscFit {
    /// Disc verdict: `residual < tol * max(1, radius)` and `radius > 1e-6`.
    pub fn is_circular(&self, tol: f64) -> bool {
        self.residual < tol * self.radius.max(1.0) && self.radius > 1e-6
    }
}

/// Angle anchoring the sample grid: `arg(tr(A0^k)) / k` for the first
/// `k in {2, 3, 4}` with a non-negligible trace, `A0 = A - (tr A / n) I`.
fn grid_anchor(a: &ComplexMatrix) -> (f64, usize) {
    let n = a.dim();
    let a0 = a.shift(-a.trace() / n as f64);
    let norm = a0.norm();
    if norm == 0.0 {
        return (0.0, 1);
    }
    let m = a0.inner();
    let mut power = m.clone();
    for k in 2..=4usize {
        power = &power * m;
        let t = power.trace();
        if t.norm() > 1e-8 * norm.powi(k as i32) {
            return (t.arg() / k as f64, k);
        }
    }
    (0.0, 1)
}

/// Least-squares fit of `r + c1 cos(theta) + c2 sin(theta)` to the support
/// function on a uniform grid.
///
/// The grid starts at an angle that rotates with `A`, so rotating or
/// translating `A` maps the sample set onto itself whenever `samples` is a
/// multiple of 12.
pub fn fit_disc(a: &ComplexMatrix, samples: usize) -> Result<DiscFit> {
    if samples < 16 {
        return Err(KippError::InvalidArgument(format!(
            "disc fit needs at least 16 samples, got {samples}"
        )));
    }
    let (h, k) = hermitian_parts(a);
    let (theta0, _) = grid_anchor(a);
    let thetas: Vec<f64> = (0..samples)
        .map(|m| theta0 + 2.0 * PI * m as f64 / samples as f64)
        .collect();
    let support: Vec<f64> = thetas
        .par_iter()
        .map(|&t| support_from_parts(&h, &k, t))
        .collect();
    let nf = samples as f64;
    let radius = support.iter().sum::<f64>() / nf;
    let c1 = 2.0 / nf * thetas.iter().zip(&support).map(|(t, h)| h * t.cos()).sum::<f64>();
    let c2 = 2.0 / nf * thetas.iter().zip(&support).map(|(t, h)| h * t.sin()).sum::<f64>();
    let residual = thetas
        .iter()
        .zip(&support)
        .map(|(t, h)| (h - radius - c1 * t.cos() - c2 * t.sin()).abs())
        .fold(0.0, f64::max);
    Ok(DiscFit {
        center: C64::new(c1, c2),
        radius: radius.max(0.0),
        residual,
    })
}

/// Divides `p` by `alpha x + beta y + z`; the residual is the largest
/// remainder coefficient relative to the largest coefficient of `p`.
pub fn divide_linear(p: &HomoPoly3, lambda: C64) -> (HomoPoly3, f64) {
    let (q, r) = p.div_rem_monic_in_z(&linear_form(lambda));
    (q, relative_residual(&r, p))
}

fn relative_residual(rem: &HomoPoly3, p: &HomoPoly3) -> f64 {
    let base = p.max_abs();
    if base == 0.0 {
        rem.max_abs()
    } else {
        rem.max_abs() / base
    }
}

/// `l_i l_j - (r^2/4)(x^2 + y^2)`.
pub fn ellipse_quadratic(li: C64, lj: C64, r2: f64) -> HomoPoly3 {
    linear_form(li)
        .mul(&linear_form(lj))
        .sub(&HomoPoly3::xx_plus_yy().scale(r2 / 4.0))
}

/// Result of [`fit_ellipse_factor`].
#[derive(Debug, Clone)]
pub struct EllipseFit {
    pub minor_axis: f64,
    pub r2: f64,
    pub quotient: HomoPoly3,
    pub residual: f64,
}

/// Real roots of the monic `z`-polynomial `p(cos t, sin t, z)`, ascending.
fn slice_roots(p: &HomoPoly3, theta: f64) -> Vec<f64> {
    let d = p.degree();
    let (c, s) = (theta.cos(), theta.sin());
    // coefficient of z^k
    let mut coef = vec![0.0; d + 1];
    for ((i, j, k), v) in p.terms() {
        coef[k] += v * c.powi(i as i32) * s.powi(j as i32);
    }
    let lead = coef[d];
    if d == 0 || lead == 0.0 {
        return Vec::new();
    }
    let comp = DMatrix::<f64>::from_fn(d, d, |row, col| {
        if row == 0 {
            -coef[d - 1 - col] / lead
        } else if row == col + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eval = |z: f64| coef.iter().rev().fold(0.0, |acc, &a| acc * z + a);
    let deriv = |z: f64| {
        (1..=d)
            .rev()
            .fold(0.0, |acc, k| acc * z + k as f64 * coef[k])
    };
    let mut roots: Vec<f64> = comp
        .complex_eigenvalues()
        .iter()
        .map(|z| {
            let mut x = z.re;
            for _ in 0..3 {
                let dp = deriv(x);
                if dp == 0.0 {
                    break;
                }
                let step = eval(x) / dp;
                if !step.is_finite() {
                    break;
                }
                x -= step;
            }
            x
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
}

fn min_gap(roots: &[f64]) -> f64 {
    roots
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Extracts a factor `l_i l_j - (r^2/4)(x^2 + y^2)` from `p`.
///
/// `r^2` is read off a pair of roots of `p` along a direction where the
/// roots are well separated (the pair must sum to `-(a_i + a_j)`), then every
/// candidate is validated by full division; the smallest residual wins, ties
/// going to the larger `r^2`.
pub fn fit_ellipse_factor(p: &HomoPoly3, li: C64, lj: C64, tol: f64) -> Result<EllipseFit> {
    let d = p.degree();
    if d < 2 {
        return Err(KippError::InvalidArgument(format!(
            "ellipse factor needs degree >= 2, got {d}"
        )));
    }
    let angles: Vec<f64> = (0..7).map(|s| 0.3 + s as f64 * PI / 7.0).collect();
    let mut best_theta = angles[0];
    let mut best_sep = -1.0;
    let mut best_roots = Vec::new();
    for &t in &angles {
        let roots = slice_roots(p, t);
        let sep = min_gap(&roots);
        if sep > best_sep {
            best_sep = sep;
            best_theta = t;
            best_roots = roots;
        }
    }
    let (c, s) = (best_theta.cos(), best_theta.sin());
    let ai = li.re * c + li.im * s;
    let aj = lj.re * c + lj.im * s;
    let scale = best_roots.iter().fold(1.0f64, |m, z| m.max(z.abs())).max(ai.abs()).max(aj.abs());
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    let mut closest = (f64::INFINITY, 0.0);
    for x in 0..best_roots.len() {
        for y in x + 1..best_roots.len() {
            let (z1, z2) = (best_roots[x], best_roots[y]);
            let miss = (z1 + z2 + ai + aj).abs();
            let r2 = 4.0 * (ai * aj - z1 * z2);
            if miss < 1e-6 * scale {
                pairs.push((miss, r2));
            }
            if miss < closest.0 {
                closest = (miss, r2);
            }
        }
    }
    if pairs.is_empty() {
        pairs.push(closest);
    }
    let mut best: Option<EllipseFit> = None;
    for &(_, r2) in &pairs {
        let r2c = if r2 < 0.0 && r2 >= -tol { 0.0 } else { r2 };
        let (quotient, rem) = p.div_rem_monic_in_z(&ellipse_quadratic(li, lj, r2c));
        let residual = relative_residual(&rem, p);
        let fit = EllipseFit {
            minor_axis: r2c.max(0.0).sqrt(),
            r2: r2c,
            quotient,
            residual,
        };
        best = match best {
            None => Some(fit),
            Some(cur) => {
                let tie = (fit.residual - cur.residual).abs() <= 1e-12;
                if (tie && fit.r2 > cur.r2) || (!tie && fit.residual < cur.residual) {
                    Some(fit)
                } else {
                    Some(cur)
                }
            }
        };
    }
    let best = best.expect("at least one candidate pair");
    if best.r2 < -tol {
        return Err(KippError::NegativeMinorAxisSquared(best.r2));
    }
    Ok(best)
}

/// A candidate flat portion: `Re(e^{-i theta} A)` has the repeated
/// eigenvalue `-mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatCandidate {
    pub theta: f64,
    pub mu: f64,
    /// Eigenvalue gap at the refined angle.
    pub gap: f64,
}

/// Maps `(theta, mu)` to the representative with `theta` in
/// `[-1e-9, pi - 1e-9)`, using `(theta, mu) ~ (theta + pi, -mu)`.
pub fn canonical_flat(theta: f64, mu: f64) -> (f64, f64) {
    let mut t = theta.rem_euclid(2.0 * PI);
    let mut m = mu;
    if t >= 2.0 * PI - 1e-9 {
        t -= 2.0 * PI;
    }
    if t >= PI - 1e-9 {
        t -= PI;
        m = -m;
    }
    (t, m)
}

/// Distance between two `(theta, mu)` pairs modulo the pencil symmetry.
pub fn flat_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (ta, ma) = canonical_flat(a.0, a.1);
    let (tb, mb) = canonical_flat(b.0, b.1);
    let direct = (ta - tb).abs().max((ma - mb).abs());
    let wrapped = (PI - (ta - tb).abs()).abs().max((ma + mb).abs());
    direct.min(wrapped)
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// Scans `theta` for collisions of eigenvalues of `Re(e^{-i theta} A)`.
///
/// Local minima of each adjacent gap below a coarse threshold are refined by
/// golden-section search; a refined gap below `tol * max(1, ‖A‖_F)` yields a
/// candidate with `mu` the negated repeated eigenvalue. Results are canonical
/// (see [`canonical_flat`]), deduplicated and sorted by angle.
pub fn detect_flat(a: &ComplexMatrix, grid: usize, tol: f64) -> Result<Vec<FlatCandidate>> {
    if grid < 64 {
        return Err(KippError::InvalidArgument(format!(
            "flat detection needs a grid of at least 64, got {grid}"
        )));
    }
    let n = a.dim();
    if n < 2 {
        return Ok(Vec::new());
    }
    let (h, k) = hermitian_parts(a);
    let scale = a.norm().max(1.0);
    let pad = 4.0 * PI / grid as f64;
    let step = (PI + 2.0 * pad) / grid as f64;
    let thetas: Vec<f64> = (0..=grid).map(|m| -pad + step * m as f64).collect();
    let spectra: Vec<Vec<f64>> = thetas
        .par_iter()
        .map(|&t| hermitian_eigenvalues(&pencil(&h, &k, t)))
        .collect();
    let slope = 2.0 * (h.norm() + k.norm());
    let coarse = 2.0 * slope * step;
    let fine = tol * scale;
    let gap_at = |t: f64, idx: usize| {
        let e = hermitian_eigenvalues(&pencil(&h, &k, t));
        e[idx + 1] - e[idx]
    };
    let mut found: Vec<FlatCandidate> = Vec::new();
    for idx in 0..n - 1 {
        let gaps: Vec<f64> = spectra.iter().map(|e| e[idx + 1] - e[idx]).collect();
        for m in 1..grid {
            let g = gaps[m];
            if g > coarse || g > gaps[m - 1] || g > gaps[m + 1] {
                continue;
            }
            let t = golden_min(|x| gap_at(x, idx), thetas[m - 1], thetas[m + 1]);
            let e = hermitian_eigenvalues(&pencil(&h, &k, t));
            let gap = e[idx + 1] - e[idx];
            if gap > fine {
                continue;
            }
            let mu = -(e[idx] + e[idx + 1]) / 2.0;
            let (theta, mu) = canonical_flat(t, mu);
            let dup = found
                .iter()
                .any(|c| flat_distance((c.theta, c.mu), (theta, mu)) < 1e-7 * scale);
            if !dup {
                found.push(FlatCandidate { theta, mu, gap });
            }
        }
    }
    found.sort_by(|x, y| x.theta.total_cmp(&y.theta).then(x.mu.total_cmp(&y.mu)));
    Ok(found)
}

/// `mu_j = Re(e^{-i theta} lambda_j) + mu`.
pub fn shifted_mu(lambda: C64, theta: f64, mu: f64) -> f64 {
    (C64::from_polar(1.0, -theta) * lambda).re + mu
}

/// Cubic Kippenhahn factor of a 3x3 block whose pencil has the rank-one
/// relations at `(theta, mu)`:
/// `l_w l_t l_v - (x^2 + y^2) [sum l_w mu_t mu_v - 2 (x cos theta + y sin theta) mu_w mu_t mu_v]`.
pub fn flat_cubic(l: [C64; 3], theta: f64, mu: f64) -> HomoPoly3 {
    let m: Vec<f64> = l.iter().map(|&x| shifted_mu(x, theta, mu)).collect();
    let lf: Vec<HomoPoly3> = l.iter().map(|&x| linear_form(x)).collect();
    let s1 = lf[0]
        .scale(m[1] * m[2])
        .add(&lf[1].scale(m[0] * m[2]))
        .add(&lf[2].scale(m[0] * m[1]));
    let prod_mu = m[0] * m[1] * m[2];
    let tilt = HomoPoly3::linear(theta.cos(), theta.sin(), 0.0).scale(2.0 * prod_mu);
    lf[0]
        .mul(&lf[1])
        .mul(&lf[2])
        .sub(&HomoPoly3::xx_plus_yy().mul(&s1.sub(&tilt)))
}

/// Entry-side sums of an upper-triangular 5x5 matrix that appear on the
/// right-hand sides of the two-ellipse and flat-portion conditions.
#[derive(Debug, Clone)]
pub struct EntrySums {
    lam: [C64; 5],
    /// `(i, j, k, |a_lm|^2)`.
    triple_weights: Vec<([usize; 3], f64)>,
    /// `(i, j, a_kl a_lm conj(a_km), |a_ij|^2)`.
    pair_cycles: Vec<([usize; 2], C64, f64)>,
    p: [f64; 5],
    /// `(i, a_jk a_kl a_lm conj(a_jm))`.
    four_cycles: Vec<(usize, C64)>,
    z_sum: C64,
    w_sum: C64,
    v: C64,
    sq_sum: f64,
}

impl EntrySums {
    pub fn new(t: &ComplexMatrix) -> Result<Self> {
        check_triangular5(t)?;
        let a = |j: usize, k: usize| t.get(j, k);
        let lam = [t.get(0, 0), t.get(1, 1), t.get(2, 2), t.get(3, 3), t.get(4, 4)];
        let triple_weights = chain_assignments(5, &[&[0, 1, 2], &[3, 4]], &ALL5)
            .into_iter()
            .map(|s| ([s[0], s[1], s[2]], a(s[3], s[4]).norm_sqr()))
            .collect();
        let pair_cycles = chain_assignments(5, &[&[0, 1], &[2, 3, 4]], &ALL5)
            .into_iter()
            .map(|s| {
                let x = a(s[2], s[3]) * a(s[3], s[4]) * a(s[2], s[4]).conj();
                ([s[0], s[1]], x, a(s[0], s[1]).norm_sqr())
            })
            .collect();
        let four_cycles = chain_assignments(5, &[&[0], &[1, 2, 3, 4]], &ALL5)
            .into_iter()
            .map(|s| {
                let y = a(s[1], s[2]) * a(s[2], s[3]) * a(s[3], s[4]) * a(s[1], s[4]).conj();
                (s[0], y)
            })
            .collect();
        let z_sum = chain_assignments(5, &[&[0, 1, 2, 3], &[0, 4, 3]], &ALL5)
            .into_iter()
            .map(|s| {
                let (i, j, k, l, m) = (s[0], s[1], s[2], s[3], s[4]);
                a(i, j) * a(j, k) * a(k, l) * a(i, m).conj() * a(m, l).conj()
            })
            .sum();
        let w_sum = chain_assignments(5, &[&[0, 1, 2], &[3, 4], &[0, 4], &[3, 2]], &ALL5)
            .into_iter()
            .map(|s| {
                let (i, j, k, l, m) = (s[0], s[1], s[2], s[3], s[4]);
                a(i, j) * a(j, k) * a(l, m) * a(i, m).conj() * a(l, k).conj()
            })
            .sum();
        let v = a(0, 1) * a(1, 2) * a(2, 3) * a(3, 4) * a(0, 4).conj();
        let mut sq_sum = 0.0;
        for l in 0..5 {
            for m in l + 1..5 {
                sq_sum += a(l, m).norm_sqr();
            }
        }
        Ok(Self {
            lam,
            triple_weights,
            pair_cycles,
            p: p_scalars(t),
            four_cycles,
            z_sum,
            w_sum,
            v,
            sq_sum,
        })
    }

    pub fn p_scalars(&self) -> [f64; 5] {
        self.p
    }

    /// The 5-cycle product `a12 a23 a34 a45 conj(a15)`.
    pub fn five_cycle(&self) -> C64 {
        self.v
    }

    fn alpha(&self, i: usize) -> f64 {
        self.lam[i].re
    }

    fn beta(&self, i: usize) -> f64 {
        self.lam[i].im
    }

    /// `sum |a_lm|^2`.
    pub fn rhs_a(&self) -> f64 {
        self.sq_sum
    }

    pub fn rhs_b(&self) -> C64 {
        let l = &self.lam;
        let first: C64 = self
            .triple_weights
            .iter()
            .map(|([i, j, k], w)| (l[*i] + l[*j] + l[*k]) * *w)
            .sum();
        let cycles: C64 = self.pair_cycles.iter().map(|(_, x, _)| *x).sum();
        first - cycles
    }

    pub fn rhs_c(&self) -> C64 {
        let l = &self.lam;
        let first: C64 = self
            .triple_weights
            .iter()
            .map(|([i, j, k], w)| (l[*i] * l[*j] + l[*i] * l[*k] + l[*j] * l[*k]) * *w)
            .sum();
        let second: C64 = self
            .pair_cycles
            .iter()
            .map(|([i, j], x, _)| (l[*i] + l[*j]) * x)
            .sum();
        let third: C64 = self.four_cycles.iter().map(|(_, y)| *y).sum();
        first - second + third
    }

    pub fn rhs_d(&self) -> C64 {
        let l = &self.lam;
        let first: C64 = self
            .triple_weights
            .iter()
            .map(|([i, j, k], w)| l[*i] * l[*j] * l[*k] * *w)
            .sum();
        let second: C64 = self
            .pair_cycles
            .iter()
            .map(|([i, j], x, _)| l[*i] * l[*j] * x)
            .sum();
        let third: C64 = self.four_cycles.iter().map(|(i, y)| y * l[*i]).sum();
        first - second + third - self.v
    }

    pub fn rhs_e(&self) -> f64 {
        let al = |i: usize| self.alpha(i);
        let first: f64 = self
            .triple_weights
            .iter()
            .map(|([i, j, k], w)| w * al(*i) * al(*j) * al(*k))
            .sum();
        let second: f64 = self
            .pair_cycles
            .iter()
            .map(|([i, j], x, _)| x.re * al(*i) * al(*j))
            .sum();
        let p_term: f64 = (0..5).map(|i| self.p[i] * al(i)).sum();
        let four: f64 = self.four_cycles.iter().map(|(i, y)| y.re * al(*i)).sum();
        let weighted: f64 = self.pair_cycles.iter().map(|(_, x, w)| x.re * w).sum();
        first - second - 0.25 * p_term + 0.5 * four + 0.25 * weighted
            - 0.25 * self.z_sum.re
            - 0.25 * self.w_sum.re
            - 0.25 * self.v.re
    }

    pub fn rhs_f(&self) -> f64 {
        let be = |i: usize| self.beta(i);
        let first: f64 = self
            .triple_weights
            .iter()
            .map(|([i, j, k], w)| w * be(*i) * be(*j) * be(*k))
            .sum();
        let second: f64 = self
            .pair_cycles
            .iter()
            .map(|([i, j], x, _)| x.im * be(*i) * be(*j))
            .sum();
        let p_term: f64 = (0..5).map(|i| self.p[i] * be(i)).sum();
        let four: f64 = self.four_cycles.iter().map(|(i, y)| y.re * be(*i)).sum();
        let weighted: f64 = self.pair_cycles.iter().map(|(_, x, w)| x.im * w).sum();
        first - second - 0.25 * p_term - 0.5 * four + 0.25 * weighted
            - 0.25 * self.z_sum.im
            - 0.25 * self.w_sum.im
            + 0.25 * self.v.im
    }

    pub fn rhs_g(&self) -> f64 {
        let al = |i: usize| self.alpha(i);
        let first: f64 = self
            .triple_weights
            .iter()
            .map(|([i, j, k], w)| w * (al(*i) * al(*j) + al(*i) * al(*k) + al(*j) * al(*k)))
            .sum();
        let second: f64 = self
            .pair_cycles
            .iter()
            .map(|([i, j], x, _)| x.re * (al(*i) + al(*j)))
            .sum();
        let p_sum: f64 = self.p.iter().sum();
        let four: f64 = self.four_cycles.iter().map(|(_, y)| y.re).sum();
        first - second - 0.25 * p_sum + 0.5 * four
    }
}

/// Assignment of diagonal positions of `T` to the roles in the conditions:
/// `(p, q)` and `(t, v)` are focus pairs, `w` is the remaining eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roles {
    pub p: usize,
    pub q: usize,
    pub t: usize,
    pub v: usize,
    pub w: usize,
}

impl Roles {
    pub fn new(p: usize, q: usize, t: usize, v: usize, w: usize) -> Result<Self> {
        let mut seen = [false; 5];
        for i in [p, q, t, v, w] {
            if i >= 5 || seen[i] {
                return Err(KippError::InvalidArgument(format!(
                    "roles must be a permutation of 0..5, got {:?}",
                    [p, q, t, v, w]
                )));
            }
            seen[i] = true;
        }
        Ok(Self { p, q, t, v, w })
    }
}

/// One labelled condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub label: String,
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
    /// For disequality rows: `|lhs - rhs|`, compared against the margin.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

impl ConditionRow {
    fn equation(label: &str, lhs: C64, rhs: C64) -> Self {
        Self {
            label: label.into(),
            lhs,
            rhs,
            residual: (lhs - rhs).norm(),
            margin: None,
        }
    }

    fn disequality(label: &str, lhs: C64, rhs: C64, tol: f64) -> Self {
        let gap = (lhs - rhs).norm();
        Self {
            label: label.into(),
            lhs,
            rhs,
            residual: if gap > tol { 0.0 } else { 1.0 },
            margin: Some(gap),
        }
    }
}

/// Rows of condition residuals for one candidate decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConditionReport {
    pub kind: String,
    pub roles: Roles,
    pub rows: Vec<ConditionRow>,
    pub max_residual: f64,
    /// Margin used by disequality rows, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

impl ConditionReport {
    fn new(kind: &str, roles: Roles, rows: Vec<ConditionRow>, margin: Option<f64>) -> Self {
        let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
        Self {
            kind: kind.into(),
            roles,
            rows,
            max_residual,
            margin,
        }
    }

    pub fn row(&self, label: &str) -> Option<&ConditionRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Conditions (a)-(g) for two ellipses with foci `(p, q)`, `(t, v)`, minor
/// axes `r`, `s`, and the point `w`.
pub fn two_ellipse_report(t: &ComplexMatrix, roles: Roles, r: f64, s: f64) -> Result<ConditionReport> {
    let sums = EntrySums::new(t)?;
    let l = sums.lam;
    let (lp, lq, lt, lv, lw) = (l[roles.p], l[roles.q], l[roles.t], l[roles.v], l[roles.w]);
    let (r2, s2) = (r * r, s * s);
    let (ap, aq, at, av, aw) = (lp.re, lq.re, lt.re, lv.re, lw.re);
    let (bp, bq, bt, bv, bw) = (lp.im, lq.im, lt.im, lv.im, lw.im);
    let rows = vec![
        ConditionRow::equation("a", re(r2 + s2), re(sums.rhs_a())),
        ConditionRow::equation(
            "b",
            (lw + lt + lv) * r2 + (lw + lq + lp) * s2,
            sums.rhs_b(),
        ),
        ConditionRow::equation(
            "c",
            (lw * lv + lw * lt + lt * lv) * r2 + (lw * lp + lw * lq + lp * lq) * s2,
            sums.rhs_c(),
        ),
        ConditionRow::equation("d", lw * lt * lv * r2 + lw * lp * lq * s2, sums.rhs_d()),
        ConditionRow::equation(
            "e",
            re(r2 * aw * at * av + s2 * aw * ap * aq - r2 * s2 / 4.0 * aw),
            re(sums.rhs_e()),
        ),
        ConditionRow::equation(
            "f",
            re(r2 * bw * bt * bv + s2 * bw * bp * bq - r2 * s2 / 4.0 * bw),
            re(sums.rhs_f()),
        ),
        ConditionRow::equation(
            "g",
            re(r2 * (aw * at + aw * av + av * at) + s2 * (aw * ap + aw * aq + ap * aq)
                - r2 * s2 / 4.0),
            re(sums.rhs_g()),
        ),
    ];
    Ok(ConditionReport::new("two-ellipse", roles, rows, None))
}

/// Conditions (a)-(i) for an ellipse with foci `(p, q)` and minor axis `r`
/// plus a quartic with a flat portion at `(theta, mu)` and foci `(w, t, v)`.
///
/// Rows (h) and (i) are disequalities: residual 0 when `|lhs - rhs| > margin`.
pub fn flat_report(
    t: &ComplexMatrix,
    roles: Roles,
    r: f64,
    theta: f64,
    mu: f64,
    margin: f64,
) -> Result<ConditionReport> {
    let sums = EntrySums::new(t)?;
    let l = sums.lam;
    let (lp, lq, lt, lv, lw) = (l[roles.p], l[roles.q], l[roles.t], l[roles.v], l[roles.w]);
    let (mw, mt, mv) = (
        shifted_mu(lw, theta, mu),
        shifted_mu(lt, theta, mu),
        shifted_mu(lv, theta, mu),
    );
    let r2 = r * r;
    let e2 = mt * mv + mw * mv + mw * mt;
    let m3 = mw * mt * mv;
    let eith = C64::from_polar(1.0, theta);
    let lam_mu = lw * (mt * mv) + lt * (mw * mv) + lv * (mt * mw);
    let tilted = lam_mu - eith * (2.0 * m3);
    let (ap, aq, at, av, aw) = (lp.re, lq.re, lt.re, lv.re, lw.re);
    let (bp, bq, bt, bv, bw) = (lp.im, lq.im, lt.im, lv.im, lw.im);
    let alpha_mu = aw * mt * mv + at * mw * mv + av * mw * mt;
    let beta_mu = bw * mt * mv + bt * mw * mv + bv * mw * mt;
    let (c, s) = (theta.cos(), theta.sin());

    let mut rows = vec![
        ConditionRow::equation("a", re(r2 + 4.0 * e2), re(sums.rhs_a())),
        ConditionRow::equation(
            "b",
            (lw + lt + lv) * r2 + (tilted + (lp + lq) * e2) * 4.0,
            sums.rhs_b(),
        ),
        ConditionRow::equation(
            "c",
            (lw * lt + lt * lv + lw * lv) * r2 + (lp * lq * e2 + (lp + lq) * tilted) * 4.0,
            sums.rhs_c(),
        ),
        ConditionRow::equation("d", lw * lt * lv * r2 + lp * lq * tilted * 4.0, sums.rhs_d()),
        ConditionRow::equation(
            "e",
            re(r2 * (aw * at * av - alpha_mu + 2.0 * m3 * c)
                + 4.0 * ap * aq * (alpha_mu - 2.0 * m3 * c)),
            re(sums.rhs_e()),
        ),
        ConditionRow::equation(
            "f",
            re(r2 * (bw * bt * bv - beta_mu + 2.0 * m3 * s)
                + 4.0 * bp * bq * (beta_mu - 2.0 * m3 * s)),
            re(sums.rhs_f()),
        ),
        ConditionRow::equation(
            "g",
            re(r2 * ((at * av + aw * av + aw * at) - e2)
                + 4.0 * ap * aq * e2
                + 4.0 * (ap + aq) * (alpha_mu - 2.0 * m3 * c)),
            re(sums.rhs_g()),
        ),
        ConditionRow::disequality("h", re(m3), re(0.0), margin),
    ];
    let roles3 = [(lw, mw), (lt, mt), (lv, mv)];
    let names = ["i:w", "i:t", "i:v"];
    for (n, name) in names.iter().enumerate() {
        let (li, _) = roles3[n];
        let (lj, mj) = roles3[(n + 1) % 3];
        let (lk, mk) = roles3[(n + 2) % 3];
        let lhs = lj * mk + lk * mj - eith * (2.0 * mj * mk);
        let rhs = li * (mk + mj);
        rows.push(ConditionRow::disequality(name, lhs, rhs, margin));
    }
    Ok(ConditionReport::new("flat", roles, rows, Some(margin)))
}

/// One irreducible piece of the real Kippenhahn curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum CurveComponent {
    Point {
        location: C64,
    },
    Ellipse {
        foci: [C64; 2],
        #[serde(rename = "minorAxis")]
        minor_axis: f64,
        residual: f64,
    },
    QuarticFlat {
        foci: [C64; 3],
        theta: f64,
        mu: f64,
        residual: f64,
    },
    Unclassified {
        degree: usize,
        /// Remaining factor of `p_A`, in the polynomial JSON layout.
        factor: crate::poly::PolyFile,
    },
}

impl CurveComponent {
    /// The factor of `p_A` this component stands for.
    pub fn polynomial(&self) -> HomoPoly3 {
        match self {
            CurveComponent::Point { location } => linear_form(*location),
            CurveComponent::Ellipse { foci, minor_axis, .. } => {
                ellipse_quadratic(foci[0], foci[1], minor_axis * minor_axis)
            }
            CurveComponent::QuarticFlat { foci, theta, mu, .. } => flat_cubic(*foci, *theta, *mu),
            CurveComponent::Unclassified { factor, .. } => {
                HomoPoly3::try_from(factor.clone()).expect("stored factor is valid")
            }
        }
    }

    fn order_key(&self) -> u8 {
        match self {
            CurveComponent::Point { .. } => 0,
            CurveComponent::Ellipse { .. } => 1,
            CurveComponent::QuarticFlat { .. } => 2,
            CurveComponent::Unclassified { .. } => 3,
        }
    }
}

/// Full classification output.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Classification {
    pub components: Vec<CurveComponent>,
    pub disc_fit: DiscFit,
    pub reports: Vec<ConditionReport>,
    /// Relative distance between the product of component factors and `p_A`.
    pub reconstruction_residual: f64,
    pub tol: f64,
}

impl Classification {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("classification serialization")
    }
}

fn cluster_eigenvalues(values: &[C64], tol: f64) -> Vec<C64> {
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while label[r] != r {
            r = label[r];
        }
        label[x] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (ri, rj) = (find(&mut label, i), find(&mut label, j));
                label[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut out = values.to_vec();
    for i in 0..n {
        let root = find(&mut label, i);
        let members: Vec<usize> = (0..n).filter(|&j| find(&mut label, j) == root).collect();
        let mean = members.iter().map(|&j| values[j]).sum::<C64>() / members.len() as f64;
        out[i] = mean;
    }
    out
}

fn sorted_pair(a: C64, b: C64) -> [C64; 2] {
    if lexicographic_cmp(&a, &b) == std::cmp::Ordering::Greater {
        [b, a]
    } else {
        [a, b]
    }
}

/// Splits `p_A` of a 5x5 matrix into points, ellipses and a quartic with a
/// flat portion; anything left over is reported as unclassified.
pub fn classify_curve(a: &ComplexMatrix, tol: f64) -> Result<Vec<CurveComponent>> {
    Ok(peel(a, tol)?.0)
}

/// Components plus the residual factor left after peeling.
fn peel(a: &ComplexMatrix, tol: f64) -> Result<(Vec<CurveComponent>, HomoPoly3)> {
    if a.dim() != 5 {
        return Err(KippError::NotDim5(a.dim()));
    }
    let scale = a.norm().max(1.0);
    let schur = schur_triangularize(a, EigenOrder::Lexicographic)?;
    let mut eigs = cluster_eigenvalues(&schur.eigenvalues, CLUSTER_TOL * scale);
    eigs.sort_by(lexicographic_cmp);
    let mut rem = kipp_poly_det(a)?;
    let mut points = Vec::new();
    let mut ellipses = Vec::new();
    let mut tail = Vec::new();

    let mut idx = 0;
    while idx < eigs.len() {
        let (q, res) = divide_linear(&rem, eigs[idx]);
        if res < tol {
            points.push(CurveComponent::Point { location: eigs[idx] });
            rem = q;
            eigs.remove(idx);
        } else {
            idx += 1;
        }
    }

    loop {
        let mut best: Option<(usize, usize, EllipseFit)> = None;
        for i in 0..eigs.len() {
            for j in i + 1..eigs.len() {
                let Ok(fit) = fit_ellipse_factor(&rem, eigs[i], eigs[j], tol) else {
                    continue;
                };
                if fit.residual >= tol {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((_, _, cur)) => fit.residual < cur.residual - 1e-12,
                };
                if better {
                    best = Some((i, j, fit));
                }
            }
        }
        let Some((i, j, fit)) = best else { break };
        let (li, lj) = (eigs[i], eigs[j]);
        if fit.r2 <= tol {
            points.push(CurveComponent::Point { location: li });
            points.push(CurveComponent::Point { location: lj });
        } else {
            ellipses.push(CurveComponent::Ellipse {
                foci: sorted_pair(li, lj),
                minor_axis: fit.minor_axis,
                residual: fit.residual,
            });
        }
        rem = fit.quotient;
        eigs.remove(j);
        eigs.remove(i);
    }

    if rem.degree() == 3 && eigs.len() == 3 {
        let foci = [eigs[0], eigs[1], eigs[2]];
        let mut best: Option<(f64, FlatCandidate)> = None;
        for cand in detect_flat(a, 256, tol)? {
            let model = flat_cubic(foci, cand.theta, cand.mu);
            let res = model.relative_distance(&rem);
            let m3: f64 = foci.iter().map(|&l| shifted_mu(l, cand.theta, cand.mu)).product();
            if res < tol && m3.abs() > DEFAULT_MARGIN && best.as_ref().is_none_or(|(r, _)| res < *r) {
                best = Some((res, cand));
            }
        }
        if let Some((residual, cand)) = best {
            let model = flat_cubic(foci, cand.theta, cand.mu);
            tail.push(CurveComponent::QuarticFlat {
                foci,
                theta: cand.theta,
                mu: cand.mu,
                residual,
            });
            let _ = model;
            rem = HomoPoly3::one();
            eigs.clear();
        }
    }
    if rem.degree() > 0 {
        tail.push(CurveComponent::Unclassified {
            degree: rem.degree(),
            factor: crate::poly::PolyFile::from(&rem),
        });
    }

    points.sort_by(|x, y| match (x, y) {
        (CurveComponent::Point { location: a }, CurveComponent::Point { location: b }) => {
            lexicographic_cmp(a, b)
        }
        _ => std::cmp::Ordering::Equal,
    });
    ellipses.sort_by(|x, y| match (x, y) {
        (
            CurveComponent::Ellipse { foci: a, minor_axis: ra, .. },
            CurveComponent::Ellipse { foci: b, minor_axis: rb, .. },
        ) => lexicographic_cmp(&a[0], &b[0])
            .then(lexicographic_cmp(&a[1], &b[1]))
            .then(ra.total_cmp(rb)),
        _ => std::cmp::Ordering::Equal,
    });
    let mut out = points;
    out.extend(ellipses);
    out.extend(tail);
    out.sort_by_key(CurveComponent::order_key);
    Ok((out, rem))
}

/// Matches each value to the nearest unused diagonal position.
fn match_positions(diag: &[C64], values: &[C64]) -> Vec<usize> {
    let mut used = vec![false; diag.len()];
    values
        .iter()
        .map(|v| {
            let mut best = usize::MAX;
            for (i, d) in diag.iter().enumerate() {
                if !used[i] && (best == usize::MAX || (d - v).norm() < (diag[best] - v).norm()) {
                    best = i;
                }
            }
            used[best] = true;
            best
        })
        .collect()
}

/// Condition reports matching a component list, evaluated on the
/// lexicographically ordered Schur form of `a`.
pub fn reports_for(a: &ComplexMatrix, components: &[CurveComponent], margin: f64) -> Result<Vec<ConditionReport>> {
    let schur = schur_triangularize(a, EigenOrder::Lexicographic)?;
    let t = &schur.triangular;
    let diag = &schur.eigenvalues;
    let mut pts = Vec::new();
    let mut ells = Vec::new();
    let mut flat = None;
    for c in components {
        match c {
            CurveComponent::Point { location } => pts.push(*location),
            CurveComponent::Ellipse { foci, minor_axis, .. } => ells.push((*foci, *minor_axis)),
            CurveComponent::QuarticFlat { foci, theta, mu, .. } => flat = Some((*foci, *theta, *mu)),
            CurveComponent::Unclassified { .. } => return Ok(Vec::new()),
        }
    }
    let mut out = Vec::new();
    match (ells.len(), pts.len(), flat) {
        (1, 0, Some((foci, theta, mu))) => {
            let (ef, r) = ells[0];
            let pos = match_positions(diag, &[ef[0], ef[1], foci[0], foci[1], foci[2]]);
            let roles = Roles::new(pos[0], pos[1], pos[3], pos[4], pos[2])?;
            out.push(flat_report(t, roles, r, theta, mu, margin)?);
        }
        (2, 1, None) => {
            let pos = match_positions(diag, &[ells[0].0[0], ells[0].0[1], ells[1].0[0], ells[1].0[1], pts[0]]);
            let roles = Roles::new(pos[0], pos[1], pos[2], pos[3], pos[4])?;
            out.push(two_ellipse_report(t, roles, ells[0].1, ells[1].1)?);
        }
        (1, 3, None) => {
            let pos = match_positions(diag, &[ells[0].0[0], ells[0].0[1], pts[0], pts[1], pts[2]]);
            let roles = Roles::new(pos[0], pos[1], pos[2], pos[3], pos[4])?;
            out.push(two_ellipse_report(t, roles, ells[0].1, 0.0)?);
        }
        (0, 5, None) => {
            let pos = match_positions(diag, &pts);
            let roles = Roles::new(pos[0], pos[1], pos[2], pos[3], pos[4])?;
            out.push(two_ellipse_report(t, roles, 0.0, 0.0)?);
        }
        _ => {}
    }
    Ok(out)
}

/// Classification, disc fit and condition reports in one record.
pub fn classify(a: &ComplexMatrix, tol: f64, samples: usize) -> Result<Classification> {
    let components = classify_curve(a, tol)?;
    let product = components
        .iter()
        .fold(HomoPoly3::one(), |acc, c| acc.mul(&c.polynomial()));
    let p = kipp_poly_det(a)?;
    let reconstruction_residual = product.relative_distance(&p);
    Ok(Classification {
        reports: reports_for(a, &components, DEFAULT_MARGIN)?,
        disc_fit: fit_disc(a, samples)?,
        components,
        reconstruction_residual,
        tol,
    })
}
