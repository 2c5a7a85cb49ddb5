//! Kalman controllability of a symmetric pair and the transformation that
//! splits it into controllable and uncontrollable parts.

use crate::error::{Error, Result};
use crate::numkernel::{
    ensure_square, ensure_symmetric, eig_clusters, max_abs, svd, sym_eig, Matrix, Tolerance, Vector,
};

/// Result of splitting a pair `(L, R)` with an orthogonal `T_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllabilitySplit {
    pub c: usize,
    /// Columns: `c` controllable directions, then `n - c` eigenvectors of `L`.
    pub tc: Matrix,
    pub lc: Matrix,
    pub rc: Matrix,
    /// Diagonal: the uncontrollable eigenvalues of `L`.
    pub lu: Matrix,
    /// Largest entry of the coupling blocks of `T_c^T L T_c` and `T_c^T R T_c`.
    pub coupling: f64,
    /// Set when the eigenspace test and the Krylov rank disagree, or a
    /// singular value sits within a factor 10 of the threshold.
    pub rank_ambiguous: bool,
}

fn check_pair(l: &Matrix, r: &Matrix) -> Result<()> {
    ensure_square(l)?;
    ensure_square(r)?;
    if l.nrows() != r.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "L is {0}x{0} but R is {1}x{1}",
            l.nrows(),
            r.nrows()
        )));
    }
    Ok(())
}

/// `[R, LR, ..., L^{n-1} R]` with each power block scaled to unit Frobenius
/// norm (zero blocks stay zero). Scaling does not change the column space.
pub fn kalman_matrix(l: &Matrix, r: &Matrix) -> Result<Matrix> {
    check_pair(l, r)?;
    let n = l.nrows();
    let mut k = Matrix::zeros(n, n * n);
    let mut block = r.clone();
    for p in 0..n {
        let nb = block.norm();
        if nb > 0.0 {
            block /= nb;
        }
        k.view_mut((0, p * n), (n, n)).copy_from(&block);
        block = l * &block;
    }
    Ok(k)
}

/// Dimension of the controllable subspace, computed as the dimension of the
/// block Krylov space of `(L, R)` with an orthonormal basis grown one vector
/// at a time. This spans the same space as the Kalman matrix without forming
/// its badly conditioned powers.
pub fn controllable_dim(l: &Matrix, r: &Matrix, tol: &Tolerance) -> Result<usize> {
    Ok(krylov_basis(l, r, tol)?.ncols())
}

/// Orthonormal basis of the range of the Kalman matrix.
pub fn krylov_basis(l: &Matrix, r: &Matrix, tol: &Tolerance) -> Result<Matrix> {
    check_pair(l, r)?;
    let n = l.nrows();
    let ls = {
        let s = max_abs(l);
        if s > 0.0 {
            l / s
        } else {
            l.clone()
        }
    };
    let rs = {
        let s = max_abs(r);
        if s > 0.0 {
            r / s
        } else {
            r.clone()
        }
    };
    let deflate = 10.0 * tol.rank_rel;
    let mut basis: Vec<Vector> = Vec::new();
    // Both operators are scaled to max entry 1 and basis vectors are unit,
    // so residual norms are measured against an O(1) scale.
    let push = |basis: &mut Vec<Vector>, mut v: Vector| -> bool {
        if v.norm() == 0.0 {
            return false;
        }
        for _ in 0..2 {
            for b in basis.iter() {
                let d = b.dot(&v);
                v.axpy(-d, b, 1.0);
            }
        }
        let nv = v.norm();
        if nv > deflate {
            basis.push(v / nv);
            true
        } else {
            false
        }
    };
    let mut frontier = Vec::new();
    for j in 0..n {
        if basis.len() == n {
            break;
        }
        if push(&mut basis, rs.column(j).into_owned()) {
            frontier.push(basis.len() - 1);
        }
    }
    while !frontier.is_empty() && basis.len() < n {
        let mut next = Vec::new();
        for &idx in &frontier {
            if basis.len() == n {
                break;
            }
            let v = &ls * &basis[idx];
            if push(&mut basis, v) {
                next.push(basis.len() - 1);
            }
        }
        frontier = next;
    }
    let mut out = Matrix::zeros(n, basis.len());
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    Ok(out)
}

/// Split `(L, R)` into controllable and uncontrollable parts.
///
/// For every eigenvalue cluster of `L` with eigenbasis `V`, the SVD of
/// `V^T R` separates the directions `R` can reach from those it cannot; the
/// latter are eigenvectors of `L` orthogonal to the controllable subspace.
pub fn build_tc(l: &Matrix, r: &Matrix, tol: &Tolerance) -> Result<ControllabilitySplit> {
    check_pair(l, r)?;
    ensure_symmetric(l, tol)?;
    ensure_symmetric(r, tol)?;
    let n = l.nrows();
    let eig = sym_eig(l, tol)?;
    let r_scale = max_abs(r).max(f64::MIN_POSITIVE);
    let cut = tol.zero_abs * r_scale;
    let mut ctrl: Vec<Vector> = Vec::new();
    let mut unctrl: Vec<(f64, Vector)> = Vec::new();
    let mut ambiguous = false;
    for range in eig_clusters(&eig.values, tol) {
        let v = eig.vectors.columns(range.start, range.len()).into_owned();
        let lambda = eig.values.rows(range.start, range.len()).mean();
        let b = v.transpose() * r;
        let d = svd(&b)?;
        let k = range.len();
        let rank = d.singular_values.iter().filter(|&&s| s > cut).count();
        ambiguous |= d
            .singular_values
            .iter()
            .any(|&s| s > cut / 10.0 && s <= cut * 10.0);
        let rotated = &v * &d.u;
        for j in 0..k {
            let col = rotated.column(j).into_owned();
            if j < rank {
                ctrl.push(col);
            } else {
                unctrl.push((lambda, col));
            }
        }
    }
    let c = ctrl.len();
    let mut tc = Matrix::zeros(n, n);
    for (j, col) in ctrl.iter().enumerate() {
        tc.set_column(j, col);
    }
    for (j, (_, col)) in unctrl.iter().enumerate() {
        tc.set_column(c + j, col);
    }
    let lt = tc.transpose() * l * &tc;
    let rt = tc.transpose() * r * &tc;
    let coupling = coupling_norm(&lt, c).max(coupling_norm(&rt, c));
    let mut r_u = 0.0_f64;
    for i in c..n {
        for j in c..n {
            r_u = r_u.max(rt[(i, j)].abs());
        }
    }
    let limit = tol.zero_abs * max_abs(l).max(1.0);
    if coupling > limit || r_u > tol.zero_abs * r_scale.max(1.0) {
        return Err(Error::Decomposition {
            context: "controllability split".into(),
            residual: coupling.max(r_u),
            limit,
        });
    }
    let krylov = controllable_dim(l, r, tol)?;
    ambiguous |= krylov != c;
    let sym = |m: Matrix| (&m + m.transpose()) * 0.5;
    let lc = sym(lt.view((0, 0), (c, c)).into_owned());
    let rc = sym(rt.view((0, 0), (c, c)).into_owned());
    let lu = Matrix::from_diagonal(&Vector::from_iterator(n - c, unctrl.iter().map(|(x, _)| *x)));
    Ok(ControllabilitySplit {
        c,
        tc,
        lc,
        rc,
        lu,
        coupling,
        rank_ambiguous: ambiguous,
    })
}

fn coupling_norm(m: &Matrix, c: usize) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..c {
        for j in c..n {
            worst = worst.max(m[(i, j)].abs()).max(m[(j, i)].abs());
        }
    }
    worst
}
