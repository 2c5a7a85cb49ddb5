//! Finest simultaneous block diagonalization of a pair `(L, R)` through a
//! random symmetric matrix commuting with both.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::control::controllable_dim;
use crate::error::{Error, Result};
use crate::netmodel::{rng_from_seed, LaplacianPair, SeededRng};
use crate::numkernel::{
    block_components, eig_clusters, max_abs, off_block_norm, orthonormality_defect, psd_nullspace,
    select_columns, submatrix, sym_eig, Matrix, Tolerance, Vector,
};

/// Generic weight mixing `R` into the restriction used to split leftover
/// degenerate eigenspaces.
const MIX: f64 = 0.754_877_666_2;

/// Resampling budget when a sampled `P` has eigenvalue gaps too close to the
/// clustering threshold to classify.
pub const P_RETRIES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Driven,
    Undriven,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockClass {
    Qc,
    Rc,
    Qu,
    Ru,
    Unclassified,
}

/// One diagonal block of a transformed pair: the columns `indices` of the
/// transformation and the corresponding principal blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub indices: Vec<usize>,
    pub l_block: Matrix,
    pub r_block: Matrix,
    pub kind: BlockKind,
    pub class: BlockClass,
}

impl Block {
    pub fn size(&self) -> usize {
        self.indices.len()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SbdDiagnostics {
    /// Dimension of the commutant found from the linear system.
    pub nullity: usize,
    /// `||PL - LP||_F / ||L||_F` and `||PR - RP||_F` for the accepted unit-norm P.
    pub commutator_l: f64,
    pub commutator_r: f64,
    /// `max |T^T T - I|`.
    pub orthogonality: f64,
    /// Off-block Frobenius mass of `T^T L T` and `T^T R T`.
    pub off_block_l: f64,
    pub off_block_r: f64,
    /// Number of P samples drawn before acceptance.
    pub samples: usize,
    /// Retries exhausted with an ambiguous eigenvalue gap still present.
    pub degenerate: bool,
}

/// Orthogonal `T` (columns in original node coordinates) with the blocks of
/// `T^T L T` and `T^T R T`; block columns are contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    pub t: Matrix,
    /// `permutation[k]` is the original node placed at position `k` of the
    /// canonical form (pinned nodes first).
    pub permutation: Vec<usize>,
    pub blocks: Vec<Block>,
    pub diagnostics: SbdDiagnostics,
}

impl BlockDecomposition {
    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Block::size).collect()
    }

    /// Block sizes sorted ascending.
    pub fn size_multiset(&self) -> Vec<usize> {
        let mut s = self.sizes();
        s.sort_unstable();
        s
    }

    pub fn driven_size(&self) -> usize {
        self.blocks
            .iter()
            .filter(|b| b.kind == BlockKind::Driven)
            .map(Block::size)
            .sum()
    }

    pub fn n(&self) -> usize {
        self.t.nrows()
    }
}

/// Linear system whose kernel holds the block-diagonal matrices commuting
/// with the canonical pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutantSystem {
    pub s_mat: Matrix,
    pub s: usize,
    pub tau: usize,
}

/// Reorder nodes so the pinned ones come first (each group ascending).
pub fn canonical_permute(pair: &LaplacianPair) -> (LaplacianPair, Vec<usize>) {
    let pinned = pair.pinned();
    let mut perm = pinned.clone();
    perm.extend((0..pair.n()).filter(|i| !pinned.contains(i)));
    let l = submatrix(&pair.l, &perm);
    let r = submatrix(&pair.r, &perm);
    (LaplacianPair { l, r }, perm)
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// `S = K1^T K1 + K2^T K2` for a pair in canonical form, with unknowns
/// `[vec P1; vec P2]` (column-stacked).
pub fn build_commutant_system(pair: &LaplacianPair) -> Result<CommutantSystem> {
    let n = pair.n();
    let s = pair.s();
    if pair.pinned() != (0..s).collect::<Vec<_>>() {
        return Err(Error::InvalidParameter("pair is not in canonical form".into()));
    }
    let tau = n - s;
    let l11 = pair.l.view((0, 0), (s, s)).into_owned();
    let l12 = pair.l.view((0, s), (s, tau)).into_owned();
    let l21 = pair.l.view((s, 0), (tau, s)).into_owned();
    let l22 = pair.l.view((s, s), (tau, tau)).into_owned();
    let is = Matrix::identity(s, s);
    let it = Matrix::identity(tau, tau);
    let (d1, d2) = (s * s, tau * tau);
    let dim = d1 + d2;

    let mut k1 = Matrix::zeros(dim, dim);
    k1.view_mut((0, 0), (d1, d1))
        .copy_from(&(kron(&is, &l11) - kron(&l11, &is)));
    k1.view_mut((d1, d1), (d2, d2))
        .copy_from(&(kron(&it, &l22) - kron(&l22, &it)));

    let st = s * tau;
    let mut k2 = Matrix::zeros(2 * st, dim);
    // vec(P1 L12 - L12 P2)
    k2.view_mut((0, 0), (st, d1)).copy_from(&kron(&l12.transpose(), &is));
    k2.view_mut((0, d1), (st, d2)).copy_from(&(-kron(&it, &l12)));
    // vec(P2 L21 - L21 P1)
    k2.view_mut((st, 0), (st, d1)).copy_from(&(-kron(&is, &l21)));
    k2.view_mut((st, d1), (st, d2)).copy_from(&kron(&l21.transpose(), &it));

    let s_mat = k1.transpose() * &k1 + k2.transpose() * &k2;
    Ok(CommutantSystem { s_mat, s, tau })
}

/// Orthonormal basis of the commutant solution space.
pub fn commutant_basis(sys: &CommutantSystem, tol: &Tolerance) -> Result<Matrix> {
    psd_nullspace(&sys.s_mat, tol)
}

/// Reassemble `diag(P1, P2)` from a solution vector.
pub fn unvec_p(sys: &CommutantSystem, p: &Vector) -> Matrix {
    let (s, tau) = (sys.s, sys.tau);
    let n = s + tau;
    let mut out = Matrix::zeros(n, n);
    for j in 0..s {
        for i in 0..s {
            out[(i, j)] = p[j * s + i];
        }
    }
    let off = s * s;
    for j in 0..tau {
        for i in 0..tau {
            out[(s + i, s + j)] = p[off + j * tau + i];
        }
    }
    out
}

/// Random Gaussian combination of the kernel basis, reshaped, symmetrized
/// and scaled to unit Frobenius norm.
pub fn sample_commuting_p(sys: &CommutantSystem, basis: &Matrix, rng: &mut SeededRng) -> Matrix {
    let k = basis.ncols();
    let alpha = Vector::from_iterator(k, (0..k).map(|_| StandardNormal.sample(rng)));
    let p = unvec_p(sys, &(basis * alpha));
    let p = (&p + p.transpose()) * 0.5;
    let norm = p.norm();
    if norm > 0.0 {
        p / norm
    } else {
        p
    }
}

/// Gap between consecutive eigenvalues that is neither clearly a tie nor
/// clearly a separation.
fn has_ambiguous_gap(values: &Vector, tol: &Tolerance) -> bool {
    let scale = values.iter().fold(1.0_f64, |a, x| a.max(x.abs()));
    let lo = tol.eig_cluster * scale;
    values
        .as_slice()
        .windows(2)
        .any(|w| (w[1] - w[0]) > lo && (w[1] - w[0]) <= 10.0 * lo)
}

/// Orthonormal eigenbasis of `w^T m w` mapped back through `w`, grouped by
/// eigenvalue clusters.
fn split_subspace(w: &Matrix, m: &Matrix, tol: &Tolerance) -> Result<Vec<Matrix>> {
    let restricted = w.transpose() * m * w;
    let restricted = (&restricted + restricted.transpose()) * 0.5;
    let eig = sym_eig(&restricted, tol)?;
    let rotated = w * &eig.vectors;
    Ok(eig_clusters(&eig.values, tol)
        .into_iter()
        .map(|r| rotated.columns(r.start, r.len()).into_owned())
        .collect())
}

/// Compute the SBD transformation of `pair` and its blocks. Undriven blocks
/// are not yet scalarized; see [`classify_driven`].
pub fn sbd_transform(pair: &LaplacianPair, seed: u64, tol: &Tolerance) -> Result<BlockDecomposition> {
    let n = pair.n();
    let (canon, perm) = canonical_permute(pair);
    let sys = build_commutant_system(&canon)?;
    let basis = commutant_basis(&sys, tol)?;
    if basis.ncols() == 0 {
        return Err(Error::Decomposition {
            context: "commutant kernel is empty".into(),
            residual: 0.0,
            limit: tol.rank_rel,
        });
    }
    let mut rng = rng_from_seed(seed);
    let mut samples = 0;
    let mut degenerate = false;
    let (p, eig) = loop {
        samples += 1;
        let p = sample_commuting_p(&sys, &basis, &mut rng);
        let eig = sym_eig(&p, tol)?;
        if !has_ambiguous_gap(&eig.values, tol) {
            break (p, eig);
        }
        if samples >= P_RETRIES {
            degenerate = true;
            break (p, eig);
        }
    };
    let l_norm = canon.l.norm().max(f64::MIN_POSITIVE);
    let commutator_l = (&p * &canon.l - &canon.l * &p).norm() / l_norm;
    let commutator_r = (&p * &canon.r - &canon.r * &p).norm();

    let second = sample_commuting_p(&sys, &basis, &mut rng);
    let mixed = &canon.l + &canon.r * MIX;
    let mut columns: Vec<Matrix> = Vec::new();
    for range in eig_clusters(&eig.values, tol) {
        let w = eig.vectors.columns(range.start, range.len()).into_owned();
        if w.ncols() == 1 {
            columns.push(w);
            continue;
        }
        for sub in split_subspace(&w, &second, tol)? {
            if sub.ncols() == 1 {
                columns.push(sub);
            } else {
                columns.extend(split_subspace(&sub, &mixed, tol)?);
            }
        }
    }
    let mut t_canon = Matrix::zeros(n, n);
    let mut col = 0;
    for w in &columns {
        t_canon.columns_mut(col, w.ncols()).copy_from(w);
        col += w.ncols();
    }
    // Back to original node order: row perm[k] of T is row k of T_canon.
    let mut t = Matrix::zeros(n, n);
    for (k, &orig) in perm.iter().enumerate() {
        t.set_row(orig, &t_canon.row(k));
    }
    let diagnostics = SbdDiagnostics {
        nullity: basis.ncols(),
        commutator_l,
        commutator_r,
        samples,
        degenerate,
        ..Default::default()
    };
    assemble(pair, t, perm, diagnostics, tol)
}

/// Detect blocks of `T^T L T`, `T^T R T`, reorder the columns of `T` so each
/// block is contiguous, and validate the off-block residual.
fn assemble(
    pair: &LaplacianPair,
    t: Matrix,
    permutation: Vec<usize>,
    mut diagnostics: SbdDiagnostics,
    tol: &Tolerance,
) -> Result<BlockDecomposition> {
    let lt = t.transpose() * &pair.l * &t;
    let rt = t.transpose() * &pair.r * &t;
    let mut comps = block_components(&[&lt, &rt], tol.zero_abs);
    let r_cut = tol.zero_abs * max_abs(&pair.r).max(1.0);
    let driven = |c: &Vec<usize>| c.iter().any(|&i| c.iter().any(|&j| rt[(i, j)].abs() > r_cut));
    // Driven first, then larger blocks, then by first column.
    comps.sort_by(|a, b| {
        driven(b)
            .cmp(&driven(a))
            .then(b.len().cmp(&a.len()))
            .then(a[0].cmp(&b[0]))
    });
    let order: Vec<usize> = comps.iter().flatten().copied().collect();
    let t = select_columns(&t, &order);
    let lt = t.transpose() * &pair.l * &t;
    let rt = t.transpose() * &pair.r * &t;
    let mut blocks = Vec::with_capacity(comps.len());
    let mut start = 0;
    for c in &comps {
        let indices: Vec<usize> = (start..start + c.len()).collect();
        start += c.len();
        let l_block = submatrix(&lt, &indices);
        let r_block = submatrix(&rt, &indices);
        let kind = if max_abs(&r_block) > r_cut {
            BlockKind::Driven
        } else {
            BlockKind::Undriven
        };
        blocks.push(Block {
            indices,
            l_block: (&l_block + l_block.transpose()) * 0.5,
            r_block: (&r_block + r_block.transpose()) * 0.5,
            kind,
            class: BlockClass::Unclassified,
        });
    }
    let idx: Vec<Vec<usize>> = blocks.iter().map(|b| b.indices.clone()).collect();
    diagnostics.orthogonality = orthonormality_defect(&t);
    diagnostics.off_block_l = off_block_norm(&lt, &idx);
    diagnostics.off_block_r = off_block_norm(&rt, &idx);
    let limit = tol.zero_abs * pair.l.norm().max(1.0);
    let residual = diagnostics.off_block_l.max(diagnostics.off_block_r);
    if residual > limit {
        return Err(Error::Decomposition {
            context: "simultaneous block diagonalization".into(),
            residual,
            limit,
        });
    }
    Ok(BlockDecomposition {
        t,
        permutation,
        blocks,
        diagnostics,
    })
}

/// Split every undriven block into scalars by diagonalizing its `L` block,
/// and check that the driven sizes add up to the controllable dimension.
pub fn classify_driven(
    mut dec: BlockDecomposition,
    pair: &LaplacianPair,
    tol: &Tolerance,
) -> Result<BlockDecomposition> {
    let mut blocks = Vec::with_capacity(dec.n());
    for b in std::mem::take(&mut dec.blocks) {
        if b.kind == BlockKind::Driven || b.size() == 1 {
            blocks.push(b);
            continue;
        }
        let eig = sym_eig(&b.l_block, tol)?;
        let cols = select_columns(&dec.t, &b.indices);
        let rotated = cols * &eig.vectors;
        for (k, &col) in b.indices.iter().enumerate() {
            dec.t.set_column(col, &rotated.column(k));
            blocks.push(Block {
                indices: vec![col],
                l_block: Matrix::from_element(1, 1, eig.values[k]),
                r_block: Matrix::zeros(1, 1),
                kind: BlockKind::Undriven,
                class: b.class,
            });
        }
    }
    blocks.sort_by_key(|b| b.indices[0]);
    dec.blocks = blocks;
    let lt = dec.t.transpose() * &pair.l * &dec.t;
    let rt = dec.t.transpose() * &pair.r * &dec.t;
    let idx: Vec<Vec<usize>> = dec.blocks.iter().map(|b| b.indices.clone()).collect();
    dec.diagnostics.off_block_l = off_block_norm(&lt, &idx);
    dec.diagnostics.off_block_r = off_block_norm(&rt, &idx);
    dec.diagnostics.orthogonality = orthonormality_defect(&dec.t);
    let controllable = controllable_dim(&pair.l, &pair.r, tol)?;
    let driven = dec.driven_size();
    if driven != controllable {
        return Err(Error::RankMismatch {
            driven,
            controllable,
        });
    }
    Ok(dec)
}

/// `sbd_transform` followed by `classify_driven`.
pub fn finest_sbd(pair: &LaplacianPair, seed: u64, tol: &Tolerance) -> Result<BlockDecomposition> {
    let dec = sbd_transform(pair, seed, tol)?;
    classify_driven(dec, pair, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{build_pair, fixture_fig2, fixture_fig5, gen_erdos_renyi, pick_pins, NetworkWithInputs};
    use crate::numkernel::spectrum;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn canonical_form_examples() {
        let pair = build_pair(&fixture_fig2()).unwrap();
        let (c, perm) = canonical_permute(&pair);
        assert_eq!(perm, vec![0, 1, 2, 3, 4]);
        assert_eq!(c, pair);

        let net = NetworkWithInputs::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)], &[2]).unwrap();
        let (c, perm) = canonical_permute(&build_pair(&net).unwrap());
        assert_eq!(perm, vec![2, 0, 1]);
        assert_eq!(c.r, Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 0.0, 0.0])));

        let (c, perm) = canonical_permute(&build_pair(&fixture_fig5()).unwrap());
        assert_eq!(&perm[..3], &[0, 1, 5]);
        assert_eq!(c.pinned(), vec![0, 1, 2]);
    }

    /// Kernel dimension of `X -> [XL - LX, XR - RX]` over block-diagonal X,
    /// counted by brute force from the dense commutator operator.
    fn brute_commutant_dim(pair: &LaplacianPair) -> usize {
        let (canon, _) = canonical_permute(pair);
        let n = canon.n();
        let s = canon.s();
        let mut cols = Vec::new();
        for j in 0..n {
            for i in 0..n {
                if (i < s) != (j < s) {
                    continue;
                }
                let mut x = Matrix::zeros(n, n);
                x[(i, j)] = 1.0;
                let c = &x * &canon.l - &canon.l * &x;
                cols.push(Vector::from_iterator(n * n, c.iter().copied()));
            }
        }
        let m = Matrix::from_columns(&cols);
        m.ncols() - crate::numkernel::numeric_rank(&m, &tol()).unwrap()
    }

    #[test]
    fn diagonal_l_commutant() {
        // Distinct diagonal entries: only diagonal matrices commute.
        let l = Matrix::from_diagonal(&Vector::from_vec(vec![-1.0, -2.0, -3.0, -4.0]));
        let r = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 1.0, 0.0, 0.0]));
        let pair = LaplacianPair { l, r };
        let sys = build_commutant_system(&pair).unwrap();
        assert_eq!(commutant_basis(&sys, &tol()).unwrap().ncols(), 4);
        assert_eq!(brute_commutant_dim(&pair), 4);
    }

    #[test]
    fn identity_lies_in_fig2_commutant() {
        let (canon, _) = canonical_permute(&build_pair(&fixture_fig2()).unwrap());
        let sys = build_commutant_system(&canon).unwrap();
        let basis = commutant_basis(&sys, &tol()).unwrap();
        assert!(basis.ncols() >= 2);
        assert_eq!(basis.ncols(), brute_commutant_dim(&canon));
        let mut id = Vector::zeros(sys.s_mat.nrows());
        id[0] = 1.0;
        for k in 0..sys.tau {
            id[1 + k * sys.tau + k] = 1.0;
        }
        let resid = &id - &basis * (basis.transpose() * &id);
        assert!(resid.norm() < 1e-10);
        assert!((&sys.s_mat * &id).norm() < 1e-12);
    }

    #[test]
    fn kernel_vectors_commute_on_random_pairs() {
        for seed in 0..10 {
            let net = gen_erdos_renyi(12, 0.3, seed).unwrap();
            let net = pick_pins(&net, 3, seed).unwrap();
            let (canon, _) = canonical_permute(&build_pair(&net).unwrap());
            let sys = build_commutant_system(&canon).unwrap();
            assert!(crate::numkernel::asymmetry(&sys.s_mat) < 1e-9);
            let basis = commutant_basis(&sys, &tol()).unwrap();
            assert_eq!(basis.ncols(), brute_commutant_dim(&canon));
            for k in 0..basis.ncols() {
                let p = unvec_p(&sys, &basis.column(k).into_owned());
                assert!((&p * &canon.l - &canon.l * &p).norm() < 1e-8 * canon.l.norm());
                assert!((&p * &canon.r - &canon.r * &p).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn sampled_p_is_symmetric_and_commutes() {
        let (canon, _) = canonical_permute(&build_pair(&fixture_fig2()).unwrap());
        let sys = build_commutant_system(&canon).unwrap();
        let basis = commutant_basis(&sys, &tol()).unwrap();
        let mut rng = rng_from_seed(11);
        for _ in 0..5 {
            let p = sample_commuting_p(&sys, &basis, &mut rng);
            assert_eq!(p, p.transpose());
            assert!((&p * &canon.l - &canon.l * &p).norm() < 1e-8 * canon.l.norm());
            assert!((&p * &canon.r - &canon.r * &p).norm() < 1e-8);
        }
    }

    #[test]
    fn trivial_commutant_gives_two_scaled_identities() {
        // A path pinned at one end is controllable, so only the identity
        // blocks commute.
        let net = NetworkWithInputs::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)], &[0]).unwrap();
        let pair = build_pair(&net).unwrap();
        let sys = build_commutant_system(&pair).unwrap();
        let basis = commutant_basis(&sys, &tol()).unwrap();
        assert_eq!(basis.ncols(), 1);
        let p = sample_commuting_p(&sys, &basis, &mut rng_from_seed(1));
        let d = p[(0, 0)];
        assert!((&p - Matrix::identity(4, 4) * d).norm() < 1e-12);
        let dec = finest_sbd(&pair, 1, &tol()).unwrap();
        assert_eq!(dec.sizes(), vec![4]);
    }

    #[test]
    fn fig2_blocks() {
        let pair = build_pair(&fixture_fig2()).unwrap();
        let dec = finest_sbd(&pair, 7, &tol()).unwrap();
        assert_eq!(dec.size_multiset(), vec![1, 1, 1, 2]);
        assert_eq!(dec.driven_size(), 2);
        let mut undriven: Vec<f64> = dec
            .blocks
            .iter()
            .filter(|b| b.kind == BlockKind::Undriven)
            .map(|b| b.l_block[(0, 0)])
            .collect();
        undriven.sort_by(f64::total_cmp);
        for (g, w) in undriven.iter().zip([-4.4142, -3.0, -1.5858]) {
            assert!((g - w).abs() < 1e-3, "{g}");
        }
        let driven = dec.blocks.iter().find(|b| b.kind == BlockKind::Driven).unwrap();
        let s = spectrum(&driven.l_block, &tol()).unwrap();
        assert!((s[0] + 5.0).abs() < 1e-9 && s[1].abs() < 1e-9);
        assert!(dec.diagnostics.commutator_l < 1e-8);
        assert!(dec.diagnostics.orthogonality < 1e-10);
    }

    #[test]
    fn fig5_blocks() {
        let pair = build_pair(&fixture_fig5()).unwrap();
        let dec = finest_sbd(&pair, 3, &tol()).unwrap();
        assert_eq!(dec.size_multiset(), vec![1, 1, 1, 7]);
        assert_eq!(dec.driven_size(), 8);
        let undriven = dec.blocks.iter().filter(|b| b.kind == BlockKind::Undriven).count();
        assert_eq!(undriven, 2);
    }

    #[test]
    fn input_matrix_is_preserved() {
        let pair = build_pair(&fixture_fig5()).unwrap();
        let dec = finest_sbd(&pair, 5, &tol()).unwrap();
        let rt = dec.t.transpose() * &pair.r * &dec.t;
        let ev = spectrum(&rt, &tol()).unwrap();
        for x in &ev {
            assert!(x.abs() < 1e-8 || (x - 1.0).abs() < 1e-8);
        }
        assert!((rt.trace() - 3.0).abs() < 1e-8);
    }

    #[test]
    fn all_pinned_connected_graph() {
        let net = gen_erdos_renyi(9, 0.5, 2).unwrap();
        assert!(net.is_connected());
        let net = net.with_pins(&(0..9).collect::<Vec<_>>()).unwrap();
        let dec = finest_sbd(&build_pair(&net).unwrap(), 1, &tol()).unwrap();
        assert_eq!(dec.driven_size(), 9);
        assert!(dec.blocks.iter().all(|b| b.kind == BlockKind::Driven));
    }

    #[test]
    fn sizes_do_not_depend_on_seed() {
        for g in 0..10 {
            let net = gen_erdos_renyi(20, 0.15, 100 + g).unwrap();
            let net = pick_pins(&net, 1 + (g as usize % 4), g).unwrap();
            let pair = build_pair(&net).unwrap();
            let first = finest_sbd(&pair, 0, &tol()).unwrap().size_multiset();
            for seed in 1..5 {
                assert_eq!(finest_sbd(&pair, seed, &tol()).unwrap().size_multiset(), first);
            }
        }
    }

    #[test]
    fn same_seed_same_result() {
        let pair = build_pair(&fixture_fig5()).unwrap();
        assert_eq!(finest_sbd(&pair, 9, &tol()).unwrap(), finest_sbd(&pair, 9, &tol()).unwrap());
    }
}
