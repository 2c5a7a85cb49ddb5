//! Dense real-matrix kernels shared by every other module.
//!
//! Everything here is a thin contract layer over `nalgebra`: results are
//! sorted and sign-normalized so that downstream reports are reproducible,
//! and every tolerance is explicit.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Numerical thresholds used across the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Singular values at or below `rank_rel * sigma_max` count as zero.
    pub rank_rel: f64,
    /// Entries at or below `zero_abs * max|entry|` count as structural zeros.
    pub zero_abs: f64,
    /// Eigenvalues closer than `eig_cluster * max(1, |lambda|_max)` are grouped.
    pub eig_cluster: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_rel: 1e-10,
            zero_abs: 1e-8,
            eig_cluster: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_rel", self.rank_rel),
            ("zero_abs", self.zero_abs),
            ("eig_cluster", self.eig_cluster),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "tolerance {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vector,
    /// Orthonormal eigenvectors stored as columns.
    pub vectors: Matrix,
}

/// Thin singular value decomposition `m = U diag(sigma) V^T`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    /// Descending, non-negative.
    pub singular_values: Vector,
    pub v: Matrix,
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn ensure_finite(m: &Matrix) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn ensure_square(m: &Matrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// Largest absolute deviation `|m_ij - m_ji|`.
pub fn asymmetry(m: &Matrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            dev = dev.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    dev
}

pub fn ensure_symmetric(m: &Matrix, tol: &Tolerance) -> Result<()> {
    ensure_square(m)?;
    ensure_finite(m)?;
    let dev = asymmetry(m);
    if dev > tol.zero_abs * max_abs(m).max(1.0) {
        return Err(Error::Asymmetric { deviation: dev });
    }
    Ok(())
}

/// Flip the sign of each column so its first entry of non-negligible
/// magnitude is positive.
fn normalize_column_signs(v: &mut Matrix) {
    for mut col in v.column_iter_mut() {
        let scale = col.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        if scale == 0.0 {
            continue;
        }
        if let Some(first) = col.iter().find(|x| x.abs() > 1e-8 * scale) {
            if *first < 0.0 {
                col.neg_mut();
            }
        }
    }
}

/// Symmetric eigendecomposition with ascending eigenvalues and
/// sign-normalized eigenvectors.
pub fn sym_eig(m: &Matrix, tol: &Tolerance) -> Result<SymEig> {
    ensure_symmetric(m, tol)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(SymEig {
            values: Vector::zeros(0),
            vectors: Matrix::zeros(0, 0),
        });
    }
    // Work on the exactly symmetrized matrix so tiny asymmetries do not leak.
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = Vector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    normalize_column_signs(&mut vectors);
    Ok(SymEig { values, vectors })
}

/// Thin SVD with singular values sorted in descending order.
///
/// One-sided Jacobi: columns of the working copy are rotated pairwise until
/// mutually orthogonal to working precision. Small singular values keep
/// relative accuracy, which rank decisions depend on.
pub fn svd(m: &Matrix) -> Result<Svd> {
    ensure_finite(m)?;
    let (r, c) = m.shape();
    if r.min(c) == 0 {
        return Ok(Svd {
            u: Matrix::zeros(r, 0),
            singular_values: Vector::zeros(0),
            v: Matrix::zeros(c, 0),
        });
    }
    if r < c {
        let t = svd(&m.transpose())?;
        return Ok(Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        });
    }
    let mut a = m.clone();
    let mut v = Matrix::identity(c, c);
    let eps = f64::EPSILON;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..c {
            for q in (p + 1)..c {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if alpha == 0.0 || beta == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for mat in [&mut a, &mut v] {
                    for i in 0..mat.nrows() {
                        let xp = mat[(i, p)];
                        let xq = mat[(i, q)];
                        mat[(i, p)] = cs * xp - sn * xq;
                        mat[(i, q)] = sn * xp + cs * xq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..c).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    // Columns at rounding-noise level carry no direction; their left vectors
    // come from the orthogonal complement instead.
    let floor = r as f64 * eps * norms[order[0]];
    let nonzero = order.iter().filter(|&&j| norms[j] > floor).count();
    let mut u_partial = Matrix::zeros(r, nonzero);
    let mut vs = Matrix::zeros(c, c);
    let mut s = Vector::zeros(c);
    for (dst, &src) in order.iter().enumerate() {
        s[dst] = norms[src];
        vs.set_column(dst, &v.column(src));
        if dst < nonzero {
            let mut col = a.column(src) / norms[src];
            for j in 0..dst {
                let prev = u_partial.column(j);
                col.axpy(-prev.dot(&col), &prev, 1.0);
            }
            let nc = col.norm();
            u_partial.set_column(dst, &(col / nc));
        }
    }
    let u = if nonzero == c {
        u_partial
    } else {
        orthonormal_completion(&u_partial)?.columns(0, c).into_owned()
    };
    Ok(Svd {
        u,
        singular_values: s,
        v: vs,
    })
}

fn rank_from_singular_values(s: &Vector, tol: &Tolerance) -> usize {
    let smax = s.iter().fold(0.0_f64, |a, x| a.max(*x));
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > tol.rank_rel * smax).count()
}

/// Number of singular values above `rank_rel * sigma_max`.
pub fn numeric_rank(m: &Matrix, tol: &Tolerance) -> Result<usize> {
    Ok(rank_from_singular_values(&svd(m)?.singular_values, tol))
}

/// Orthonormal basis of the kernel of `m`, one vector per column.
pub fn nullspace_basis(m: &Matrix, tol: &Tolerance) -> Result<Matrix> {
    ensure_finite(m)?;
    let (r, c) = m.shape();
    if c == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    // Pad wide inputs with zero rows so the SVD returns a full right basis.
    let padded = if r < c {
        let mut p = Matrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let dec = svd(&padded)?;
    let rank = rank_from_singular_values(&dec.singular_values, tol);
    let null = dec.v.columns(rank, c - rank).into_owned();
    Ok(null)
}

/// Kernel of a symmetric positive semidefinite matrix via its eigenbasis:
/// eigenvectors whose eigenvalue is at most `rank_rel * lambda_max`.
pub fn psd_nullspace(m: &Matrix, tol: &Tolerance) -> Result<Matrix> {
    let eig = sym_eig(m, tol)?;
    let n = m.nrows();
    let lmax = eig.values.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let cut = tol.rank_rel * lmax;
    let cols: Vec<usize> = (0..n)
        .filter(|&k| lmax == 0.0 || eig.values[k] <= cut)
        .collect();
    let mut out = Matrix::zeros(n, cols.len());
    for (dst, &k) in cols.iter().enumerate() {
        out.set_column(dst, &eig.vectors.column(k));
    }
    Ok(out)
}

/// Deviation `||Q^T Q - I||_max` of the columns of `q` from orthonormality.
pub fn orthonormality_defect(q: &Matrix) -> f64 {
    let g = q.transpose() * q;
    let k = g.nrows();
    max_abs(&(g - Matrix::identity(k, k)))
}

/// Extend a set of orthonormal columns to a square orthogonal matrix whose
/// leading columns are the input.
pub fn orthonormal_completion(partial: &Matrix) -> Result<Matrix> {
    ensure_finite(partial)?;
    let (n, k) = partial.shape();
    if k > n {
        return Err(Error::DimensionMismatch(format!(
            "{k} columns cannot be orthonormal in dimension {n}"
        )));
    }
    let defect = orthonormality_defect(partial);
    if defect > 1e-10 {
        return Err(Error::NotOrthonormal { deviation: defect });
    }
    let mut q = Matrix::zeros(n, n);
    q.view_mut((0, 0), (n, k)).copy_from(partial);
    let mut filled = k;
    // Greedily add the standard basis vector with the largest residual.
    while filled < n {
        let mut best: Option<(f64, Vector)> = None;
        for e in 0..n {
            let mut v = Vector::zeros(n);
            v[e] = 1.0;
            for _ in 0..2 {
                for j in 0..filled {
                    let col = q.column(j);
                    let d = col.dot(&v);
                    v.axpy(-d, &col, 1.0);
                }
            }
            let nv = v.norm();
            if best.as_ref().map_or(true, |(b, _)| nv > *b + 1e-12) {
                best = Some((nv, v));
            }
        }
        let (nv, v) = best.expect("n > 0");
        q.set_column(filled, &(v / nv));
        filled += 1;
    }
    Ok(q)
}

/// Group ascending eigenvalues into ranges of near-equal values.
pub fn eig_clusters(values: &Vector, tol: &Tolerance) -> Vec<Range<usize>> {
    let n = values.len();
    let scale = values.iter().fold(1.0_f64, |a, x| a.max(x.abs()));
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || (values[i] - values[i - 1]).abs() > tol.eig_cluster * scale {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Connected components of the index graph whose edges are the entries of
/// any of `mats` exceeding `rel * max|entry|` of that matrix. Components are
/// sorted internally and ordered by smallest member.
pub fn block_components(mats: &[&Matrix], rel: f64) -> Vec<Vec<usize>> {
    let n = mats.first().map_or(0, |m| m.nrows());
    let mut adj = vec![Vec::new(); n];
    for m in mats {
        let cut = rel * max_abs(m);
        for i in 0..n {
            for j in (i + 1)..n {
                if m[(i, j)].abs() > cut || m[(j, i)].abs() > cut {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut comps = Vec::new();
    for root in 0..n {
        if label[root] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut stack = vec![root];
        let mut members = vec![root];
        label[root] = id;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if label[v] == usize::MAX {
                    label[v] = id;
                    stack.push(v);
                    members.push(v);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps
}

/// Frobenius norm of the entries of `m` lying outside the diagonal blocks
/// described by `blocks` (index sets of a partition of `0..n`).
pub fn off_block_norm(m: &Matrix, blocks: &[Vec<usize>]) -> f64 {
    let n = m.nrows();
    let mut owner = vec![usize::MAX; n];
    for (b, idx) in blocks.iter().enumerate() {
        for &i in idx {
            owner[i] = b;
        }
    }
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if owner[i] != owner[j] {
                acc += m[(i, j)] * m[(i, j)];
            }
        }
    }
    acc.sqrt()
}

/// Principal submatrix on the given indices.
pub fn submatrix(m: &Matrix, idx: &[usize]) -> Matrix {
    Matrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// Columns of `m` selected by `idx`, in order.
pub fn select_columns(m: &Matrix, idx: &[usize]) -> Matrix {
    let mut out = Matrix::zeros(m.nrows(), idx.len());
    for (dst, &src) in idx.iter().enumerate() {
        out.set_column(dst, &m.column(src));
    }
    out
}

/// Orthonormal Helmert contrast vectors for a group of `k` coordinates:
/// the `j`-th vector (1-based) is `(-1, ..., -1, j, 0, ..., 0) / sqrt(j(j+1))`
/// with `j` leading `-1`s. Together with the normalized ones-vector they form
/// an orthonormal basis of `R^k`.
pub fn helmert_contrasts(k: usize) -> Vec<Vec<f64>> {
    (1..k)
        .map(|j| {
            let norm = ((j * (j + 1)) as f64).sqrt();
            let mut v = vec![0.0; k];
            for x in v.iter_mut().take(j) {
                *x = -1.0 / norm;
            }
            v[j] = j as f64 / norm;
            v
        })
        .collect()
}

/// Multiset spectrum of a symmetric matrix, ascending.
pub fn spectrum(m: &Matrix, tol: &Tolerance) -> Result<Vec<f64>> {
    Ok(sym_eig(m, tol)?.values.iter().copied().collect())
}

/// Matrix as nested rows, for serialization.
pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn rel_frob(a: &Matrix, b: &Matrix) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn sym_eig_identity() {
        let e = sym_eig(&Matrix::identity(3, 3), &tol()).unwrap();
        for v in e.values.iter() {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sym_eig_swap_matrix() {
        let m = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let e = sym_eig(&m, &tol()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        // first nonzero entry of every eigenvector is positive
        for col in e.vectors.column_iter() {
            let first = col.iter().find(|x| x.abs() > 1e-12).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn sym_eig_path_laplacian_closed_form() {
        // L = A - D of the path on 4 nodes; eigenvalues -(2 - 2cos(k pi / 4)).
        let mut l = Matrix::zeros(4, 4);
        for i in 0..3 {
            l[(i, i + 1)] = 1.0;
            l[(i + 1, i)] = 1.0;
        }
        for i in 0..4 {
            l[(i, i)] = -l.row(i).sum();
        }
        let mut expected: Vec<f64> = (0..4)
            .map(|k| -(2.0 - 2.0 * (k as f64 * std::f64::consts::PI / 4.0).cos()))
            .collect();
        expected.sort_by(f64::total_cmp);
        let e = sym_eig(&l, &tol()).unwrap();
        for (got, want) in e.values.iter().zip(&expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        let s2 = 2f64.sqrt();
        assert!((expected[0] + 2.0 + s2).abs() < 1e-12);
    }

    #[test]
    fn sym_eig_rejects_bad_input() {
        let rect = Matrix::zeros(2, 3);
        assert!(matches!(sym_eig(&rect, &tol()), Err(Error::NotSquare { .. })));
        let asym = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(sym_eig(&asym, &tol()), Err(Error::Asymmetric { .. })));
    }

    #[test]
    fn svd_basic_cases() {
        let s = svd(&Matrix::identity(2, 2)).unwrap();
        assert_eq!(s.singular_values.as_slice(), &[1.0, 1.0]);
        let z = svd(&Matrix::zeros(3, 2)).unwrap();
        assert!(z.singular_values.iter().all(|x| *x == 0.0));
        let d = svd(&Matrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 4.0])).unwrap();
        assert!((d.singular_values[0] - 4.0).abs() < 1e-14);
        assert!((d.singular_values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numeric_rank(&Matrix::identity(5, 5), &tol()).unwrap(), 5);
        let v = Vector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let outer = &v * v.transpose();
        assert_eq!(numeric_rank(&outer, &tol()).unwrap(), 1);
        assert_eq!(numeric_rank(&Matrix::zeros(3, 3), &tol()).unwrap(), 0);
    }

    #[test]
    fn nullspace_examples() {
        assert_eq!(nullspace_basis(&Matrix::identity(3, 3), &tol()).unwrap().ncols(), 0);
        let ones = Matrix::from_element(2, 2, 1.0);
        let n = nullspace_basis(&ones, &tol()).unwrap();
        assert_eq!(n.ncols(), 1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((n[(0, 0)].abs() - h).abs() < 1e-12);
        assert!((n[(0, 0)] + n[(1, 0)]).abs() < 1e-12);
        // wide matrix: kernel has dimension cols - rank
        let wide = Matrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let k = nullspace_basis(&wide, &tol()).unwrap();
        assert_eq!(k.ncols(), 2);
        assert!((wide * &k).norm() < 1e-12);
    }

    #[test]
    fn completion_examples() {
        let mut e1 = Matrix::zeros(3, 1);
        e1[(0, 0)] = 1.0;
        let q = orthonormal_completion(&e1).unwrap();
        assert!(orthonormality_defect(&q) < 1e-12);
        assert_eq!(q.column(0), e1.column(0));

        let rot = {
            let (c, s) = (0.3f64.cos(), 0.3f64.sin());
            Matrix::from_row_slice(2, 2, &[c, -s, s, c])
        };
        let q2 = orthonormal_completion(&rot).unwrap();
        assert_eq!(q2, rot);

        let bad = Matrix::from_row_slice(2, 1, &[1.0, 1.0]);
        assert!(matches!(
            orthonormal_completion(&bad),
            Err(Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn helmert_is_orthonormal_and_sum_free() {
        for k in 1..7 {
            let rows = helmert_contrasts(k);
            assert_eq!(rows.len(), k - 1);
            for (a, ra) in rows.iter().enumerate() {
                assert!(ra.iter().sum::<f64>().abs() < 1e-14);
                for (b, rb) in rows.iter().enumerate() {
                    let d: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((d - want).abs() < 1e-14);
                }
            }
        }
        let two = helmert_contrasts(2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((two[0][0] + h).abs() < 1e-15 && (two[0][1] - h).abs() < 1e-15);
    }

    #[test]
    fn components_split_block_diagonal() {
        let mut m = Matrix::zeros(4, 4);
        m[(0, 2)] = 1.0;
        m[(2, 0)] = 1.0;
        m[(1, 1)] = 2.0;
        m[(3, 3)] = 1.0;
        let c = block_components(&[&m], 1e-8);
        assert_eq!(c, vec![vec![0, 2], vec![1], vec![3]]);
        assert_eq!(off_block_norm(&m, &c), 0.0);
    }

    fn sym_strategy(n: usize) -> impl Strategy<Value = Matrix> {
        proptest::collection::vec(-5.0f64..5.0, n * n).prop_map(move |v| {
            let m = Matrix::from_vec(n, n, v);
            (&m + m.transpose()) * 0.5
        })
    }

    proptest! {
        #[test]
        fn eig_reconstructs(m in (1usize..7).prop_flat_map(sym_strategy)) {
            let e = sym_eig(&m, &tol()).unwrap();
            let n = m.nrows();
            let rebuilt = &e.vectors * Matrix::from_diagonal(&e.values) * e.vectors.transpose();
            prop_assert!((&rebuilt - &m).norm() <= 1e-10 * m.norm().max(1.0));
            prop_assert!(orthonormality_defect(&e.vectors) < 1e-10);
            for k in 1..n {
                prop_assert!(e.values[k - 1] <= e.values[k]);
            }
        }

        #[test]
        fn svd_reconstructs_and_rank_nullity(
            (r, c, v) in (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
                (Just(r), Just(c), proptest::collection::vec(-3.0f64..3.0, r * c))
            }),
            kill in 0usize..3,
        ) {
            let mut m = Matrix::from_vec(r, c, v);
            // force some rank deficiency by duplicating a column
            if kill > 0 && c > 1 {
                let col = m.column(0).into_owned();
                m.set_column(c - 1, &col);
            }
            let d = svd(&m).unwrap();
            let rebuilt = &d.u * Matrix::from_diagonal(&d.singular_values) * d.v.transpose();
            prop_assert!(rel_frob(&rebuilt, &m) <= 1e-10);
            prop_assert!(orthonormality_defect(&d.u) < 1e-10);
            prop_assert!(orthonormality_defect(&d.v) < 1e-10);
            for k in 1..d.singular_values.len() {
                prop_assert!(d.singular_values[k - 1] >= d.singular_values[k]);
            }
            let rank = numeric_rank(&m, &tol()).unwrap();
            let null = nullspace_basis(&m, &tol()).unwrap();
            prop_assert_eq!(rank + null.ncols(), c);
            let smax = d.singular_values[0];
            for col in null.column_iter() {
                prop_assert!((&m * col).norm() <= 1e-10 * smax.max(1.0));
            }
        }

        #[test]
        fn spectrum_invariant_under_orthogonal_similarity(
            m in (2usize..6).prop_flat_map(sym_strategy),
            seed in proptest::collection::vec(-1.0f64..1.0, 36),
        ) {
            let n = m.nrows();
            let g = Matrix::from_fn(n, n, |i, j| seed[i * 6 + j] + if i == j { 2.0 } else { 0.0 });
            let q = g.qr().q();
            let t = q.transpose() * &m * &q;
            let t = (&t + t.transpose()) * 0.5;
            let a = spectrum(&m, &tol()).unwrap();
            let b = spectrum(&t, &tol()).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9 * m.norm().max(1.0));
            }
        }
    }
}
