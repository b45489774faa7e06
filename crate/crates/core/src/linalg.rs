//! Dense complex linear algebra: Hermitian parts, ordered Schur forms,
//! spectral and singular-value utilities, and the structural predicates used
//! for partial isometries.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{KippError, Result};
use crate::matrix::{ComplexMatrix, C64};

/// Default structural tolerance, relative to the matrix norm.
pub const DEFAULT_TOL: f64 = 1e-9;

const SCHUR_MAX_ITER: usize = 10_000;

/// `(H, K)` with `A = H + iK`, both Hermitian.
pub fn hermitian_parts(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let m = a.inner();
    let adj = m.adjoint();
    let h = (m + &adj).scale(0.5);
    let k = (m - &adj) * C64::new(0.0, -0.5);
    (wrap(h), wrap(k))
}

pub(crate) fn wrap(m: DMatrix<C64>) -> ComplexMatrix {
    ComplexMatrix::new(m).expect("internal matrix is square and finite")
}

/// Ascending eigenvalues and matching orthonormal eigenvectors (as columns)
/// of a Hermitian matrix.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let herm = (m + m.adjoint()).scale(0.5);
    let mut values: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Full SVD `m = U diag(s) V*` with singular values sorted descending.
pub(crate) fn svd_sorted(m: &DMatrix<C64>) -> (DMatrix<C64>, Vec<f64>, DMatrix<C64>) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v = svd.v_t.expect("right singular vectors requested").adjoint();
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let s = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut us = DMatrix::zeros(u.nrows(), k);
    let mut vs = DMatrix::zeros(v.nrows(), k);
    for (dst, &src) in order.iter().enumerate() {
        us.set_column(dst, &u.column(src));
        vs.set_column(dst, &v.column(src));
    }
    (us, s, vs)
}

/// Orthonormal basis (columns) of the null space of `m`, padding the thin SVD
/// when `m` has fewer rows than columns.
pub(crate) fn null_space(m: &DMatrix<C64>, tol: f64) -> DMatrix<C64> {
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let (_, s, v) = svd_sorted(&padded);
    let keep: Vec<usize> = (0..cols).filter(|&k| s[k] <= tol).collect();
    let mut out = DMatrix::zeros(cols, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        out.set_column(dst, &v.column(src));
    }
    out
}

/// How the diagonal of a Schur form is arranged.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum EigenOrder {
    /// Whatever the QR iteration produced.
    #[default]
    AsComputed,
    /// Ascending real part, then ascending imaginary part.
    Lexicographic,
    /// Descending modulus.
    ModulusDescending,
    /// Match the given values in order (nearest remaining eigenvalue wins).
    Target(Vec<C64>),
}

/// `unitary* A unitary = triangular`, with the diagonal listed in `eigenvalues`.
#[derive(Debug, Clone)]
pub struct SchurForm {
    pub unitary: ComplexMatrix,
    pub triangular: ComplexMatrix,
    pub eigenvalues: Vec<C64>,
}

impl SchurForm {
    /// `‖U T U* - A‖_F`.
    pub fn reassembly_residual(&self, a: &ComplexMatrix) -> f64 {
        let u = self.unitary.inner();
        (u * self.triangular.inner() * u.adjoint() - a.inner()).norm()
    }

    /// `‖U* U - I‖_F`.
    pub fn unitarity_residual(&self) -> f64 {
        let u = self.unitary.inner();
        let n = u.nrows();
        (u.adjoint() * u - DMatrix::<C64>::identity(n, n)).norm()
    }
}

pub fn lexicographic_cmp(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Complex Schur triangularization with a caller-chosen diagonal order.
pub fn schur_triangularize(a: &ComplexMatrix, order: EigenOrder) -> Result<SchurForm> {
    let n = a.dim();
    let (mut q, mut t) = if n == 1 {
        (DMatrix::identity(1, 1), a.inner().clone())
    } else {
        let schur = nalgebra::Schur::try_new(a.inner().clone(), f64::EPSILON, SCHUR_MAX_ITER)
            .ok_or(KippError::ConvergenceFailure)?;
        schur.unpack()
    };
    for i in 0..n {
        for j in 0..i {
            t[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    let diag: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let target = match order {
        EigenOrder::AsComputed => None,
        EigenOrder::Lexicographic => {
            let mut d = diag.clone();
            d.sort_by(lexicographic_cmp);
            Some(d)
        }
        EigenOrder::ModulusDescending => {
            let mut d = diag.clone();
            d.sort_by(|x, y| y.norm().total_cmp(&x.norm()).then(lexicographic_cmp(x, y)));
            Some(d)
        }
        EigenOrder::Target(v) => {
            if v.len() != n {
                return Err(KippError::BadDims(format!(
                    "target order has {} values for dim {}",
                    v.len(),
                    n
                )));
            }
            Some(v)
        }
    };
    if let Some(target) = target {
        reorder_schur(&mut q, &mut t, &target);
    }
    let eigenvalues = (0..n).map(|k| t[(k, k)]).collect();
    Ok(SchurForm {
        unitary: wrap(q),
        triangular: wrap(t),
        eigenvalues,
    })
}

/// Moves diagonal entries of `t` into the order of `target` by adjacent
/// Givens swaps, accumulating the rotations into `q`.
pub(crate) fn reorder_schur(q: &mut DMatrix<C64>, t: &mut DMatrix<C64>, target: &[C64]) {
    let n = t.nrows();
    for p in 0..n {
        let mut best = p;
        for cand in p..n {
            if (t[(cand, cand)] - target[p]).norm() < (t[(best, best)] - target[p]).norm() {
                best = cand;
            }
        }
        for k in (p..best).rev() {
            swap_adjacent(q, t, k);
        }
    }
}

fn swap_adjacent(q: &mut DMatrix<C64>, t: &mut DMatrix<C64>, k: usize) {
    let n = t.nrows();
    let t11 = t[(k, k)];
    let t22 = t[(k + 1, k + 1)];
    let t12 = t[(k, k + 1)];
    let v0 = t12;
    let v1 = t22 - t11;
    let norm = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
    if norm == 0.0 {
        return;
    }
    let (x, y) = (v0 / norm, v1 / norm);
    // columns of Z: (x, y) is the eigenvector for t22, (-conj y, conj x) completes it
    let z = [[x, -y.conj()], [y, x.conj()]];
    for col in 0..n {
        let a = t[(k, col)];
        let b = t[(k + 1, col)];
        t[(k, col)] = z[0][0].conj() * a + z[1][0].conj() * b;
        t[(k + 1, col)] = z[0][1].conj() * a + z[1][1].conj() * b;
    }
    for row in 0..n {
        let a = t[(row, k)];
        let b = t[(row, k + 1)];
        t[(row, k)] = a * z[0][0] + b * z[1][0];
        t[(row, k + 1)] = a * z[0][1] + b * z[1][1];
        let a = q[(row, k)];
        let b = q[(row, k + 1)];
        q[(row, k)] = a * z[0][0] + b * z[1][0];
        q[(row, k + 1)] = a * z[0][1] + b * z[1][1];
    }
    t[(k + 1, k)] = C64::new(0.0, 0.0);
    t[(k, k)] = t22;
    t[(k + 1, k + 1)] = t11;
}

/// Eigenvalues via the complex Schur form, in computed order.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<C64>> {
    Ok(schur_triangularize(a, EigenOrder::AsComputed)?.eigenvalues)
}

/// `‖A A* A - A‖_F <= tol`.
pub fn is_partial_isometry(a: &ComplexMatrix, tol: f64) -> bool {
    let m = a.inner();
    (m * m.adjoint() * m - m).norm() <= tol
}

/// Whether every singular value is within `tol` of 0 or 1.
pub fn singular_values_binary(a: &ComplexMatrix, tol: f64) -> bool {
    singular_values(a.inner())
        .iter()
        .all(|&s| s.abs() <= tol || (s - 1.0).abs() <= tol)
}

/// Contraction with spectrum in the open unit disc and `rank(I - A*A) = 1`.
pub fn is_class_sn(a: &ComplexMatrix, tol: f64) -> Result<bool> {
    let m = a.inner();
    let n = a.dim();
    let sigma = singular_values(m);
    if sigma[0] > 1.0 + tol {
        return Ok(false);
    }
    if eigenvalues(a)?.iter().any(|z| z.norm() >= 1.0 - tol) {
        return Ok(false);
    }
    let defect = DMatrix::<C64>::identity(n, n) - m.adjoint() * m;
    let rank = singular_values(&defect).iter().filter(|&&s| s > tol).count();
    Ok(rank == 1)
}

/// Number of singular values `<= tol`.
pub fn kernel_dimension(a: &ComplexMatrix, tol: f64) -> usize {
    singular_values(a.inner()).iter().filter(|&&s| s <= tol).count()
}

/// Outcome of the joint-commutant irreducibility test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Irreducibility {
    Irreducible,
    Reducible,
    /// A commutant singular value sits in the ambiguous band `(tol, 100 tol]`.
    Indeterminate,
}

/// Dimension test on the joint commutant `{X : XA = AX, XA* = A*X}`.
///
/// `tol` is relative to `max(1, ‖A‖_F)`.
pub fn irreducibility(a: &ComplexMatrix, tol: f64) -> Irreducibility {
    let n = a.dim();
    let m = a.inner();
    let id = DMatrix::<C64>::identity(n, n);
    let comm = |x: &DMatrix<C64>| x.transpose().kronecker(&id) - id.kronecker(x);
    let n2 = n * n;
    let mut system = DMatrix::<C64>::zeros(2 * n2, n2);
    system.view_mut((0, 0), (n2, n2)).copy_from(&comm(m));
    system.view_mut((n2, 0), (n2, n2)).copy_from(&comm(&m.adjoint()));
    let s = singular_values(&system);
    let scale = a.norm().max(1.0);
    let cut = tol * scale;
    let kernel = s.iter().filter(|&&v| v <= cut).count();
    let ambiguous = s.iter().any(|&v| v > cut && v <= 100.0 * cut);
    if ambiguous {
        Irreducibility::Indeterminate
    } else if kernel == 1 {
        Irreducibility::Irreducible
    } else {
        Irreducibility::Reducible
    }
}

pub fn is_irreducible(a: &ComplexMatrix, tol: f64) -> bool {
    irreducibility(a, tol) == Irreducibility::Irreducible
}

/// `basis* A basis = [[0, B], [0, C]]` with the kernel first.
#[derive(Debug, Clone)]
pub struct BlockForm {
    pub kernel_dim: usize,
    pub b: DMatrix<C64>,
    pub c: DMatrix<C64>,
    pub basis: ComplexMatrix,
}

impl BlockForm {
    /// `‖B*B + C*C - I‖_F`.
    pub fn constraint_residual(&self) -> f64 {
        let k = self.c.nrows();
        (self.b.adjoint() * &self.b + self.c.adjoint() * &self.c - DMatrix::<C64>::identity(k, k))
            .norm()
    }

    /// The block matrix `[[0, B], [0, C]]`.
    pub fn assemble(&self) -> ComplexMatrix {
        assemble_blocks(&self.b, &self.c)
    }
}

pub(crate) fn assemble_blocks(b: &DMatrix<C64>, c: &DMatrix<C64>) -> ComplexMatrix {
    let m = b.nrows();
    let k = c.nrows();
    let mut out = DMatrix::zeros(m + k, m + k);
    out.view_mut((0, m), (m, k)).copy_from(b);
    out.view_mut((m, m), (k, k)).copy_from(c);
    wrap(out)
}

/// Orthonormal basis of the range of the orthogonal projector `p`, built by
/// pivoted Gram-Schmidt on the projected standard basis vectors.
fn projector_basis(p: &DMatrix<C64>, rank: usize) -> DMatrix<C64> {
    let n = p.nrows();
    let mut candidates: Vec<DVector<C64>> = (0..n).map(|i| p.column(i).into_owned()).collect();
    let mut basis = DMatrix::zeros(n, rank);
    let mut used = vec![false; n];
    for col in 0..rank {
        let mut best = None;
        let mut best_norm = -1.0;
        for (i, v) in candidates.iter().enumerate() {
            let nv = v.norm();
            if !used[i] && nv > best_norm + 1e-12 {
                best = Some(i);
                best_norm = nv;
            }
        }
        let i = best.expect("projector rank exceeds dimension");
        used[i] = true;
        let q = &candidates[i] / C64::new(best_norm, 0.0);
        basis.set_column(col, &q);
        for v in candidates.iter_mut() {
            let proj = q.dotc(v);
            *v -= &q * proj;
        }
    }
    basis
}

/// Kernel-first block decomposition of a partial isometry.
pub fn block_form(a: &ComplexMatrix, tol: f64) -> Result<BlockForm> {
    if !is_partial_isometry(a, tol) {
        return Err(KippError::NotPartialIsometry);
    }
    let n = a.dim();
    let ker = null_space(a.inner(), tol.max(1e-8));
    let m = ker.ncols();
    let p_ker = &ker * ker.adjoint();
    let p_comp = DMatrix::<C64>::identity(n, n) - &p_ker;
    let mut basis = DMatrix::zeros(n, n);
    basis
        .view_mut((0, 0), (n, m))
        .copy_from(&projector_basis(&p_ker, m));
    basis
        .view_mut((0, m), (n, n - m))
        .copy_from(&projector_basis(&p_comp, n - m));
    let t = basis.adjoint() * a.inner() * &basis;
    Ok(BlockForm {
        kernel_dim: m,
        b: t.view((0, m), (m, n - m)).into_owned(),
        c: t.view((m, m), (n - m, n - m)).into_owned(),
        basis: wrap(basis),
    })
}

/// A partial isometry split as `0_{zero_summand_dim} ⊕ reduced`.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub zero_summand_dim: usize,
    pub reduced: ComplexMatrix,
    /// Columns span the reduced summand followed by the zero summand.
    pub basis: ComplexMatrix,
}

/// Splits off the zero direct summand carried by the kernel directions that
/// `B` does not see (`rank B = k < m` leaves `0_{m-k}`).
///
/// When `m > n/2` the rank bound `k <= n - m` makes the summand at least
/// `2m - n`, so both reductions come from the same SVD.
pub fn reduce_partial_isometry(a: &ComplexMatrix, tol: f64) -> Result<Reduction> {
    let bf = block_form(a, tol)?;
    let n = a.dim();
    let m = bf.kernel_dim;
    let w = bf.basis.inner();
    if m == 0 {
        return Ok(Reduction {
            zero_summand_dim: 0,
            reduced: a.clone(),
            basis: ComplexMatrix::identity(n),
        });
    }
    let (u, s, _) = if n - m == 0 {
        (DMatrix::identity(m, m), vec![0.0; m], DMatrix::zeros(0, 0))
    } else {
        let mut padded = DMatrix::zeros(m, m.max(n - m));
        padded.view_mut((0, 0), (m, n - m)).copy_from(&bf.b);
        svd_sorted(&padded)
    };
    let rank = s.iter().filter(|&&v| v > tol.max(1e-8)).count();
    let zero_dim = m - rank;
    let ker_basis = w.columns(0, m) * &u;
    let mut new_basis = DMatrix::zeros(n, n);
    new_basis
        .view_mut((0, 0), (n, rank))
        .copy_from(&ker_basis.columns(0, rank));
    new_basis
        .view_mut((0, rank), (n, n - m))
        .copy_from(&w.columns(m, n - m));
    new_basis
        .view_mut((0, n - zero_dim), (n, zero_dim))
        .copy_from(&ker_basis.columns(rank, zero_dim));
    let keep = n - zero_dim;
    let reduced = if keep == 0 {
        DMatrix::zeros(0, 0)
    } else {
        let cols = new_basis.columns(0, keep).into_owned();
        cols.adjoint() * a.inner() * &cols
    };
    if keep == 0 {
        return Err(KippError::InvalidArgument(
            "zero matrix has no nonzero summand".into(),
        ));
    }
    Ok(Reduction {
        zero_summand_dim: zero_dim,
        reduced: wrap(reduced),
        basis: wrap(new_basis),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::I;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn shift2() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap()
    }

    #[test]
    fn hermitian_parts_of_shift() {
        let (h, k) = hermitian_parts(&shift2());
        assert_eq!(h.get(0, 1), c(0.5, 0.0));
        assert_eq!(h.get(1, 0), c(0.5, 0.0));
        assert!((k.get(0, 1) - c(0.0, -0.5)).norm() < 1e-16);
        assert!((k.get(1, 0) - c(0.0, 0.5)).norm() < 1e-16);
    }

    #[test]
    fn hermitian_parts_of_identity_cases() {
        let a = ComplexMatrix::identity(3).scale(I);
        let (h, k) = hermitian_parts(&a);
        assert_eq!(h.max_abs(), 0.0);
        assert_eq!(k, ComplexMatrix::identity(3));
    }

    #[test]
    fn schur_orders_lexicographically() {
        let a = ComplexMatrix::diagonal(&[c(2.0, 0.0), c(-1.0, 1.0), c(-1.0, -1.0)]);
        let s = schur_triangularize(&a, EigenOrder::Lexicographic).unwrap();
        assert_eq!(s.eigenvalues, vec![c(-1.0, -1.0), c(-1.0, 1.0), c(2.0, 0.0)]);
        assert!(s.reassembly_residual(&a) < 1e-14);
    }

    #[test]
    fn schur_target_reorders_triangular_input() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.3, 0.2), c(-0.5, 1.0)],
            vec![c(0.0, 0.0), c(0.0, 1.0), c(2.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(-2.0, 0.5)],
        ])
        .unwrap();
        let target = vec![c(-2.0, 0.5), c(1.0, 0.0), c(0.0, 1.0)];
        let s = schur_triangularize(&a, EigenOrder::Target(target.clone())).unwrap();
        for (x, y) in s.eigenvalues.iter().zip(&target) {
            assert!((x - y).norm() < 1e-12);
        }
        assert!(s.reassembly_residual(&a) < 1e-13);
        assert!(s.unitarity_residual() < 1e-13);
        assert!(s.triangular.is_upper_triangular(0.0));
    }

    #[test]
    fn partial_isometry_examples() {
        assert!(is_partial_isometry(&shift2(), 1e-12));
        assert!(!is_partial_isometry(&ComplexMatrix::identity(2).scale(c(2.0, 0.0)), 1e-9));
        assert!(is_partial_isometry(&ComplexMatrix::identity(3), 1e-12));
    }

    #[test]
    fn kernel_dimension_examples() {
        assert_eq!(kernel_dimension(&ComplexMatrix::identity(4), 1e-9), 0);
        assert_eq!(kernel_dimension(&ComplexMatrix::zeros(5), 1e-9), 5);
    }

    #[test]
    fn irreducibility_examples() {
        let d = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(!is_irreducible(&d, 1e-9));
        assert!(is_irreducible(&shift2(), 1e-9));
    }

    #[test]
    fn block_form_of_shift() {
        let bf = block_form(&shift2(), 1e-9).unwrap();
        assert_eq!(bf.kernel_dim, 1);
        assert!((bf.b[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(bf.c[(0, 0)].norm() < 1e-14);
    }

    #[test]
    fn block_form_of_unitary_has_no_kernel() {
        let u = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let bf = block_form(&u, 1e-9).unwrap();
        assert_eq!(bf.kernel_dim, 0);
        assert!((&bf.c - u.inner()).norm() < 1e-14);
    }

    #[test]
    fn block_form_rejects_non_partial_isometry() {
        let a = ComplexMatrix::identity(2).scale(c(2.0, 0.0));
        assert!(matches!(block_form(&a, 1e-9), Err(KippError::NotPartialIsometry)));
    }

    #[test]
    fn reduction_of_full_rank_b_is_identity() {
        let r = reduce_partial_isometry(&shift2(), 1e-9).unwrap();
        assert_eq!(r.zero_summand_dim, 0);
        assert_eq!(r.reduced.dim(), 2);
    }
}
