//! Homogeneous trivariate polynomials with real coefficients.
//!
//! Monomials `x^i y^j z^k` with `i + j + k = d` are stored densely in
//! lexicographic order of `(i, j, k)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{KippError, Result};

/// Relative magnitude below which a coefficient is dropped from JSON output.
const JSON_DROP: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct HomoPoly3 {
    degree: usize,
    coeffs: Vec<f64>,
}

fn term_count(d: usize) -> usize {
    (d + 1) * (d + 2) / 2
}

fn index(d: usize, i: usize, j: usize) -> usize {
    // rows i' < i contribute d - i' + 1 entries each
    i * (d + 1) - i * i.saturating_sub(1) / 2 + j
}

impl HomoPoly3 {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            coeffs: vec![0.0; term_count(degree)],
        }
    }

    pub fn one() -> Self {
        Self {
            degree: 0,
            coeffs: vec![1.0],
        }
    }

    /// `a x + b y + c z`.
    pub fn linear(a: f64, b: f64, c: f64) -> Self {
        let mut p = Self::zero(1);
        p.set(1, 0, 0, a);
        p.set(0, 1, 0, b);
        p.set(0, 0, 1, c);
        p
    }

    pub fn monomial(i: usize, j: usize, k: usize, c: f64) -> Self {
        let mut p = Self::zero(i + j + k);
        p.set(i, j, k, c);
        p
    }

    /// `x^2 + y^2`.
    pub fn xx_plus_yy() -> Self {
        let mut p = Self::zero(2);
        p.set(2, 0, 0, 1.0);
        p.set(0, 2, 0, 1.0);
        p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Exponent triples in storage order.
    pub fn exponents(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let d = self.degree;
        (0..=d).flat_map(move |i| (0..=d - i).map(move |j| (i, j, d - i - j)))
    }

    /// Iterates `((i, j, k), c)` in lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize, usize), f64)> + '_ {
        self.exponents().zip(self.coeffs.iter().copied())
    }

    /// Coefficient of `x^i y^j z^k`; zero when the exponents do not sum to the degree.
    pub fn coeff(&self, i: usize, j: usize, k: usize) -> f64 {
        if i + j + k != self.degree {
            return 0.0;
        }
        self.coeffs[index(self.degree, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, c: f64) {
        assert_eq!(i + j + k, self.degree, "exponents must sum to the degree");
        let at = index(self.degree, i, j);
        self.coeffs[at] = c;
    }

    fn add_at(&mut self, i: usize, j: usize, c: f64) {
        let at = index(self.degree, i, j);
        self.coeffs[at] += c;
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.degree, other.degree, "degree mismatch in add");
        Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.degree, other.degree, "degree mismatch in sub");
        Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.degree + other.degree);
        for ((i1, j1, _), c1) in self.terms() {
            if c1 == 0.0 {
                continue;
            }
            for ((i2, j2, _), c2) in other.terms() {
                out.add_at(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, e: usize) -> Self {
        (0..e).fold(Self::one(), |acc, _| acc.mul(self))
    }

    pub fn eval(&self, x: f64, y: f64, z: f64) -> f64 {
        self.terms()
            .map(|((i, j, k), c)| c * x.powi(i as i32) * y.powi(j as i32) * z.powi(k as i32))
            .sum()
    }

    /// Composes with a linear change of variables: each of `x`, `y`, `z` is
    /// replaced by the matching linear form.
    pub fn substitute(&self, x: &Self, y: &Self, z: &Self) -> Self {
        let d = self.degree;
        let mut out = Self::zero(d);
        for ((i, j, k), c) in self.terms() {
            if c == 0.0 {
                continue;
            }
            let t = x.pow(i).mul(&y.pow(j)).mul(&z.pow(k)).scale(c);
            out = out.add(&t);
        }
        out
    }

    /// Coefficient-wise `max |self - other| / max |other|`.
    pub fn relative_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.degree, other.degree, "degree mismatch in distance");
        let diff = self.sub(other).max_abs();
        let base = other.max_abs();
        if base == 0.0 {
            diff
        } else {
            diff / base
        }
    }

    /// Divides by a polynomial that is monic in `z` (its `z^e` coefficient is 1),
    /// treating both as polynomials in `z` over `R[x, y]`.
    ///
    /// Returns the quotient (degree `d - e`) and the remainder (degree `d`, all
    /// terms of `z`-degree below `e`).
    pub fn div_rem_monic_in_z(&self, divisor: &Self) -> (Self, Self) {
        let d = self.degree;
        let e = divisor.degree;
        assert!(e <= d, "divisor degree exceeds dividend degree");
        assert!(
            (divisor.coeff(0, 0, e) - 1.0).abs() < 1e-12,
            "divisor must be monic in z"
        );
        let mut rem = self.clone();
        let mut quot = Self::zero(d - e);
        for k in (e..=d).rev() {
            // leading slice r_k(x, y) z^k of the running remainder
            let qk = k - e;
            for i in 0..=d - k {
                let j = d - k - i;
                let c = rem.coeff(i, j, k);
                if c == 0.0 {
                    continue;
                }
                quot.set(i, j, qk, c);
                for ((di, dj, _), dc) in divisor.terms() {
                    if dc != 0.0 {
                        rem.add_at(i + di, j + dj, -c * dc);
                    }
                }
            }
        }
        // clear the exactly cancelled leading slices
        for k in e..=d {
            for i in 0..=d - k {
                rem.set(i, d - k - i, k, 0.0);
            }
        }
        (quot, rem)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PolyFile::from(self)).expect("polynomial serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PolyFile = serde_json::from_str(text)?;
        Self::try_from(file)
    }
}

impl fmt::Display for HomoPoly3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cut = JSON_DROP * self.max_abs();
        let mut first = true;
        for ((i, j, k), c) in self.terms() {
            if c.abs() <= cut || c == 0.0 {
                continue;
            }
            let sign = if c < 0.0 { "-" } else { "+" };
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            let unit = i + j + k > 0 && (mag - 1.0).abs() < 1e-15;
            if !unit {
                write!(f, "{mag}")?;
            }
            for (name, e) in [("x", i), ("y", j), ("z", k)] {
                match e {
                    0 => {}
                    1 => write!(f, "{name}")?,
                    _ => write!(f, "{name}^{e}")?,
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// One serialized monomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: f64,
}

/// Serialized form of [`HomoPoly3`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyFile {
    pub degree: usize,
    pub terms: Vec<Term>,
}

impl From<&HomoPoly3> for PolyFile {
    fn from(p: &HomoPoly3) -> Self {
        let cut = JSON_DROP * p.max_abs();
        let terms = p
            .terms()
            .filter(|(_, c)| c.abs() > cut && *c != 0.0)
            .map(|((i, j, k), c)| Term { i, j, k, c })
            .collect();
        PolyFile {
            degree: p.degree,
            terms,
        }
    }
}

impl TryFrom<PolyFile> for HomoPoly3 {
    type Error = KippError;

    fn try_from(file: PolyFile) -> Result<Self> {
        let mut p = HomoPoly3::zero(file.degree);
        for t in file.terms {
            if t.i + t.j + t.k != file.degree {
                return Err(KippError::Input(format!(
                    "term ({}, {}, {}) does not have degree {}",
                    t.i, t.j, t.k, file.degree
                )));
            }
            if !t.c.is_finite() {
                return Err(KippError::NonFinite);
            }
            p.set(t.i, t.j, t.k, t.c);
        }
        Ok(p)
    }
}
