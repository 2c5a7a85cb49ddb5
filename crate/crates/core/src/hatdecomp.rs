//! The transformation `T̂`: quotient split followed by a controllability
//! split of each part, giving the qc / rc / qu / ru classes. Also pinned-node
//! symmetries and their orthogonal cycle transformation.

use serde::Serialize;

use crate::control::build_tc;
use crate::equitable::{build_tq, coarsest_equitable, indicator, quotient_pair, Partition};
use crate::error::{Error, Result};
use crate::netmodel::{build_extended, LaplacianPair};
use crate::numkernel::{
    block_components, helmert_contrasts, max_abs, off_block_norm, orthonormality_defect,
    select_columns, submatrix, sym_eig, Matrix, Tolerance,
};
use crate::sbd::{finest_sbd, Block, BlockClass, BlockKind};

/// Generic weight used to split a class pair into its irreducible blocks.
const MIX: f64 = 0.754_877_666_2;

/// A square symmetric pair; either part may be 0 x 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPair {
    pub l: Matrix,
    pub r: Matrix,
}

impl ClassPair {
    pub fn size(&self) -> usize {
        self.l.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FourSizes {
    pub qc: usize,
    pub rc: usize,
    pub qu: usize,
    pub ru: usize,
}

impl FourSizes {
    pub fn total(&self) -> usize {
        self.qc + self.rc + self.qu + self.ru
    }

    pub fn controllable(&self) -> usize {
        self.qc + self.rc
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct HatResiduals {
    /// Mass of `T_q L T_q^T` outside the quotient / redundant blocks.
    pub quotient_leakage: f64,
    /// Off-block mass of `T̂^T L T̂` and `T̂^T R T̂` over the four classes.
    pub class_off_block_l: f64,
    pub class_off_block_r: f64,
    /// Off-block mass after splitting classes into irreducible blocks.
    pub off_block_l: f64,
    pub off_block_r: f64,
    pub orthogonality: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourBlockReport {
    pub partition: Partition,
    /// Columns ordered qc, rc, qu, ru, in original node coordinates.
    pub t_hat: Matrix,
    pub qc: ClassPair,
    pub rc: ClassPair,
    pub qu: ClassPair,
    pub ru: ClassPair,
    pub sizes: FourSizes,
    /// `t_hat` with each class rotated into its irreducible blocks.
    pub t_refined: Matrix,
    /// Irreducible blocks over the columns of `t_refined`, in class order.
    pub blocks: Vec<Block>,
    pub residuals: HatResiduals,
    pub rank_ambiguous: bool,
}

impl FourBlockReport {
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Block::size).collect()
    }

    pub fn size_multiset(&self) -> Vec<usize> {
        let mut s = self.block_sizes();
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

    /// `T̂` as row transformation, `T̂ L T̂^{-1}`.
    pub fn t_hat_rows(&self) -> Matrix {
        self.t_hat.transpose()
    }
}

fn sym(m: Matrix) -> Matrix {
    (&m + m.transpose()) * 0.5
}

/// Split the columns `cols` (a class of `T̂`) into irreducible blocks using
/// the eigenbasis of `L + MIX * R` restricted to the class.
fn refine_class(
    pair: &LaplacianPair,
    cols: &Matrix,
    class: BlockClass,
    driven: bool,
    tol: &Tolerance,
) -> Result<(Matrix, Vec<(Vec<usize>, BlockClass)>)> {
    let k = cols.ncols();
    if k == 0 {
        return Ok((cols.clone(), Vec::new()));
    }
    let lb = sym(cols.transpose() * &pair.l * cols);
    let rb = sym(cols.transpose() * &pair.r * cols);
    let mixed = if driven { &lb + &rb * MIX } else { lb.clone() };
    let eig = sym_eig(&mixed, tol)?;
    let rotated = cols * &eig.vectors;
    if !driven {
        return Ok((rotated, (0..k).map(|i| (vec![i], class)).collect()));
    }
    let lr = eig.vectors.transpose() * &lb * &eig.vectors;
    let rr = eig.vectors.transpose() * &rb * &eig.vectors;
    let comps = block_components(&[&lr, &rr], tol.zero_abs);
    let order: Vec<usize> = comps.iter().flatten().copied().collect();
    let rotated = select_columns(&rotated, &order);
    let mut start = 0;
    let mut groups = Vec::with_capacity(comps.len());
    for c in &comps {
        groups.push(((start..start + c.len()).collect(), class));
        start += c.len();
    }
    Ok((rotated, groups))
}

/// Apply `T_q`, then a controllability split to the quotient and redundant
/// parts, and classify the result.
pub fn hat_transform(pair: &LaplacianPair, tol: &Tolerance) -> Result<FourBlockReport> {
    let n = pair.n();
    let ext = build_extended(pair);
    let partition = coarsest_equitable(&ext, tol)?;
    partition.check_unmixed(&pair.pinned())?;
    let e = indicator(&partition);
    let m = partition.m();
    let q = quotient_pair(pair, &e, tol)?;
    let tq = build_tq(&e);
    let lq_full = &tq * &pair.l * tq.transpose();
    let rq_full = &tq * &pair.r * tq.transpose();
    let halves = vec![(0..m).collect::<Vec<_>>(), (m..n).collect()];
    let quotient_leakage = off_block_norm(&lq_full, &halves).max(off_block_norm(&rq_full, &halves));
    let l_scale = pair.l.norm().max(1.0);
    if quotient_leakage > tol.zero_abs * l_scale {
        return Err(Error::Decomposition {
            context: "quotient transformation".into(),
            residual: quotient_leakage,
            limit: tol.zero_abs * l_scale,
        });
    }
    let l_o = sym(lq_full.view((m, m), (n - m, n - m)).into_owned());
    let r_o = sym(rq_full.view((m, m), (n - m, n - m)).into_owned());

    let split_q = build_tc(&q.l_q, &q.r_q, tol)?;
    let split_o = build_tc(&l_o, &r_o, tol)?;
    let sizes = FourSizes {
        qc: split_q.c,
        rc: split_o.c,
        qu: m - split_q.c,
        ru: (n - m) - split_o.c,
    };

    // Columns of T̂ in node coordinates.
    let basis_q = tq.rows(0, m).transpose();
    let basis_o = tq.rows(m, n - m).transpose();
    let cols_q = &basis_q * &split_q.tc;
    let cols_o = &basis_o * &split_o.tc;
    let mut t_hat = Matrix::zeros(n, n);
    let mut at = 0;
    for (src, start, len) in [
        (&cols_q, 0, sizes.qc),
        (&cols_o, 0, sizes.rc),
        (&cols_q, sizes.qc, sizes.qu),
        (&cols_o, sizes.rc, sizes.ru),
    ] {
        t_hat.columns_mut(at, len).copy_from(&src.columns(start, len));
        at += len;
    }

    let lt = t_hat.transpose() * &pair.l * &t_hat;
    let rt = t_hat.transpose() * &pair.r * &t_hat;
    let mut class_idx = Vec::new();
    let mut at = 0;
    for len in [sizes.qc, sizes.rc, sizes.qu, sizes.ru] {
        class_idx.push((at..at + len).collect::<Vec<_>>());
        at += len;
    }
    let class_pair = |idx: &[usize]| ClassPair {
        l: sym(submatrix(&lt, idx)),
        r: sym(submatrix(&rt, idx)),
    };
    let (qc, rc, qu, ru) = (
        class_pair(&class_idx[0]),
        class_pair(&class_idx[1]),
        class_pair(&class_idx[2]),
        class_pair(&class_idx[3]),
    );
    let class_off_block_l = off_block_norm(&lt, &class_idx);
    let class_off_block_r = off_block_norm(&rt, &class_idx);
    let r_u = max_abs(&qu.r).max(max_abs(&ru.r));
    let limit = tol.zero_abs * l_scale;
    if class_off_block_l.max(class_off_block_r).max(r_u) > limit {
        return Err(Error::Decomposition {
            context: "four-block transformation".into(),
            residual: class_off_block_l.max(class_off_block_r).max(r_u),
            limit,
        });
    }

    let mut t_refined = Matrix::zeros(n, n);
    let mut blocks = Vec::new();
    let mut at = 0;
    for (k, (class, driven)) in [
        (BlockClass::Qc, true),
        (BlockClass::Rc, true),
        (BlockClass::Qu, false),
        (BlockClass::Ru, false),
    ]
    .into_iter()
    .enumerate()
    {
        let cols = select_columns(&t_hat, &class_idx[k]);
        let (rot, groups) = refine_class(pair, &cols, class, driven, tol)?;
        t_refined.columns_mut(at, rot.ncols()).copy_from(&rot);
        for (idx, class) in groups {
            let indices: Vec<usize> = idx.iter().map(|i| i + at).collect();
            blocks.push((indices, class));
        }
        at += rot.ncols();
    }
    let lf = t_refined.transpose() * &pair.l * &t_refined;
    let rf = t_refined.transpose() * &pair.r * &t_refined;
    let r_cut = tol.zero_abs * max_abs(&pair.r).max(1.0);
    let blocks: Vec<Block> = blocks
        .into_iter()
        .map(|(indices, class)| {
            let l_block = sym(submatrix(&lf, &indices));
            let r_block = sym(submatrix(&rf, &indices));
            let kind = if max_abs(&r_block) > r_cut {
                BlockKind::Driven
            } else {
                BlockKind::Undriven
            };
            Block {
                indices,
                l_block,
                r_block,
                kind,
                class,
            }
        })
        .collect();
    let idx: Vec<Vec<usize>> = blocks.iter().map(|b| b.indices.clone()).collect();
    let residuals = HatResiduals {
        quotient_leakage,
        class_off_block_l,
        class_off_block_r,
        off_block_l: off_block_norm(&lf, &idx),
        off_block_r: off_block_norm(&rf, &idx),
        orthogonality: orthonormality_defect(&t_refined).max(orthonormality_defect(&t_hat)),
    };
    if residuals.off_block_l.max(residuals.off_block_r) > limit {
        return Err(Error::Decomposition {
            context: "irreducible split of the four classes".into(),
            residual: residuals.off_block_l.max(residuals.off_block_r),
            limit,
        });
    }
    Ok(FourBlockReport {
        partition,
        t_hat,
        qc,
        rc,
        qu,
        ru,
        sizes,
        t_refined,
        blocks,
        residuals,
        rank_ambiguous: split_q.rank_ambiguous || split_o.rank_ambiguous,
    })
}

/// Pinned-node symmetry: a permutation of the nodes commuting with `L` and
/// `R` that moves some pinned node onto another.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PnsPermutation {
    /// `perm[i]` is the image of node `i`.
    pub perm: Vec<usize>,
    /// All cycles including fixed points, each starting at its smallest node.
    pub cycles: Vec<Vec<usize>>,
}

impl PnsPermutation {
    pub fn from_perm(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
            seen[p] = true;
        }
        let mut visited = vec![false; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if visited[start] {
                continue;
            }
            let mut cyc = vec![start];
            visited[start] = true;
            let mut x = perm[start];
            while x != start {
                visited[x] = true;
                cyc.push(x);
                x = perm[x];
            }
            cycles.push(cyc);
        }
        Ok(Self { perm, cycles })
    }

    /// Transposition of `a` and `b` in `n` nodes.
    pub fn swap(n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n || b >= n {
            return Err(Error::InvalidParameter("swap index out of range".into()));
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(a, b);
        Self::from_perm(perm)
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn cycle_lengths(&self) -> Vec<usize> {
        self.cycles.iter().map(Vec::len).collect()
    }
}

fn commutes(perm: &[usize], m: &Matrix, cut: f64) -> bool {
    let n = perm.len();
    (0..n).all(|i| (0..n).all(|j| (m[(perm[i], perm[j])] - m[(i, j)]).abs() <= cut))
}

/// Whether `perm` commutes with both matrices of the pair and exchanges at
/// least one pinned node with another pinned node.
pub fn is_pns(perm: &PnsPermutation, pair: &LaplacianPair, tol: &Tolerance) -> bool {
    if perm.n() != pair.n() {
        return false;
    }
    let cut = tol.zero_abs * max_abs(&pair.l).max(1.0);
    if !commutes(&perm.perm, &pair.l, cut) || !commutes(&perm.perm, &pair.r, cut) {
        return false;
    }
    let pinned = pair.pinned();
    pinned
        .iter()
        .any(|&p| perm.perm[p] != p && pinned.contains(&perm.perm[p]))
}

/// Orthogonal block transformation over the cycles of `perm`. Each cycle of
/// length `l` gets `l - 1` contrast rows at its first `l - 1` node positions
/// and the normalized ones-row at its last node position.
pub fn build_tpi(perm: &PnsPermutation) -> Matrix {
    let n = perm.n();
    let mut t = Matrix::zeros(n, n);
    for cyc in &perm.cycles {
        let mut nodes = cyc.clone();
        nodes.sort_unstable();
        let l = nodes.len();
        for (row, contrast) in helmert_contrasts(l).into_iter().enumerate() {
            for (pos, &node) in nodes.iter().enumerate() {
                t[(nodes[row], node)] = contrast[pos];
            }
        }
        let w = 1.0 / (l as f64).sqrt();
        for &node in &nodes {
            t[(nodes[l - 1], node)] = w;
        }
    }
    t
}

/// Largest network the exhaustive symmetry search accepts by default.
pub const PNS_MAX_N: usize = 10;

/// Every pinned-node symmetry of `pair`, by backtracking over node images
/// restricted to nodes with the same diagonal and pin status.
pub fn find_pns_bruteforce(pair: &LaplacianPair, max_n: usize, tol: &Tolerance) -> Result<Vec<PnsPermutation>> {
    let n = pair.n();
    if n > max_n {
        return Err(Error::SearchTooLarge { n, max: max_n });
    }
    let cut = tol.zero_abs * max_abs(&pair.l).max(1.0);
    let pinned: Vec<bool> = (0..n).map(|i| pair.r[(i, i)] > 0.5).collect();
    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| pinned[i] == pinned[j] && (pair.l[(i, i)] - pair.l[(j, j)]).abs() <= cut)
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn recurse(
        i: usize,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        candidates: &[Vec<usize>],
        l: &Matrix,
        cut: f64,
        out: &mut Vec<Vec<usize>>,
    ) {
        let n = perm.len();
        if i == n {
            out.push(perm.clone());
            return;
        }
        for &j in &candidates[i] {
            if used[j] {
                continue;
            }
            if (0..i).any(|k| (l[(j, perm[k])] - l[(i, k)]).abs() > cut) {
                continue;
            }
            perm[i] = j;
            used[j] = true;
            recurse(i + 1, perm, used, candidates, l, cut, out);
            used[j] = false;
            perm[i] = usize::MAX;
        }
    }
    recurse(0, &mut perm, &mut used, &candidates, &pair.l, cut, &mut out);
    out.sort();
    let mut result = Vec::new();
    for p in out {
        let p = PnsPermutation::from_perm(p)?;
        if is_pns(&p, pair, tol) {
            result.push(p);
        }
    }
    Ok(result)
}

/// Outcome of splitting a pair with `T_Π` and decomposing each part.
#[derive(Debug, Clone, PartialEq)]
pub struct PnsSplit {
    pub l_pi: Matrix,
    pub r_pi: Matrix,
    /// Index sets of the independent parts of `(L_Π, R_Π)`.
    pub parts: Vec<Vec<usize>>,
    /// Driven block count in each part after a finest decomposition.
    pub driven_per_part: Vec<usize>,
}

impl PnsSplit {
    pub fn driven_blocks(&self) -> usize {
        self.driven_per_part.iter().sum()
    }

    /// Number of parts containing at least one driven block.
    pub fn driven_parts(&self) -> usize {
        self.driven_per_part.iter().filter(|&&d| d > 0).count()
    }
}

/// Apply `T_Π`, separate the transformed pair into independent parts and
/// run a finest decomposition on each.
pub fn pns_split(pair: &LaplacianPair, perm: &PnsPermutation, seed: u64, tol: &Tolerance) -> Result<PnsSplit> {
    if !is_pns(perm, pair, tol) {
        return Err(Error::InvalidParameter("permutation is not a pinned-node symmetry".into()));
    }
    let t = build_tpi(perm);
    let l_pi = sym(&t * &pair.l * t.transpose());
    let r_pi = sym(&t * &pair.r * t.transpose());
    let parts = block_components(&[&l_pi, &r_pi], tol.zero_abs);
    let mut driven_per_part = Vec::with_capacity(parts.len());
    for (k, idx) in parts.iter().enumerate() {
        let sub = LaplacianPair::from_parts(submatrix(&l_pi, idx), submatrix(&r_pi, idx), tol)?;
        let dec = finest_sbd(&sub, seed.wrapping_add(k as u64), tol)?;
        driven_per_part.push(dec.blocks.iter().filter(|b| b.kind == BlockKind::Driven).count());
    }
    Ok(PnsSplit {
        l_pi,
        r_pi,
        parts,
        driven_per_part,
    })
}
