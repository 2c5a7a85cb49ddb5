//! Coarsest equitable partition of the extended network, cluster indicator
//! matrix, quotient pair and the orthogonal quotient transformation.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::netmodel::{ExtendedLaplacian, LaplacianPair};
use crate::numkernel::{helmert_contrasts, max_abs, Matrix, Tolerance};

/// Disjoint clusters covering the network nodes (the source node is never
/// included). Clusters are sorted and ordered by smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub clusters: Vec<Vec<usize>>,
}

impl Partition {
    /// Normalize the order and check that `clusters` cover `0..n` exactly once.
    pub fn new(mut clusters: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for c in clusters.iter_mut() {
            if c.is_empty() {
                return Err(Error::InvalidParameter("empty cluster".into()));
            }
            c.sort_unstable();
            for &i in c.iter() {
                if i >= n || seen[i] {
                    return Err(Error::InvalidParameter(format!(
                        "node {} missing from range or repeated",
                        i + 1
                    )));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidParameter("clusters do not cover all nodes".into()));
        }
        clusters.sort_by_key(|c| c[0]);
        Ok(Self { clusters })
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            clusters: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.clusters.len()
    }

    pub fn n(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }

    /// Cluster index of every node.
    pub fn membership(&self) -> Vec<usize> {
        let mut out = vec![0; self.n()];
        for (k, c) in self.clusters.iter().enumerate() {
            for &i in c {
                out[i] = k;
            }
        }
        out
    }

    /// Fail if any cluster holds both pinned and non-pinned nodes.
    pub fn check_unmixed(&self, pinned: &[usize]) -> Result<()> {
        for c in &self.clusters {
            let count = c.iter().filter(|i| pinned.contains(i)).count();
            if count != 0 && count != c.len() {
                return Err(Error::MixedCluster { cluster: c.clone() });
            }
        }
        Ok(())
    }

    /// Clusters as 1-based index lists.
    pub fn one_based(&self) -> Vec<Vec<usize>> {
        self.clusters
            .iter()
            .map(|c| c.iter().map(|i| i + 1).collect())
            .collect()
    }
}

/// N x M 0/1 matrix with `E[i][k] = 1` iff node `i` lies in cluster `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorMatrix {
    pub e: Matrix,
}

impl IndicatorMatrix {
    /// Columns scaled to unit norm: `E (E^T E)^{-1/2}`.
    pub fn normalized(&self) -> Matrix {
        let mut out = self.e.clone();
        for mut col in out.column_iter_mut() {
            let size: f64 = col.sum();
            col /= size.sqrt();
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.e.column_iter().map(|c| c.sum() as usize).collect()
    }
}

/// Pair reduced to one node per cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientPair {
    pub l_q: Matrix,
    pub r_q: Matrix,
}

/// Row-sum keys for one node. Integer matrices compare exactly; otherwise
/// sums are quantized on a grid of `zero_abs * scale`.
struct SumKey {
    exact: bool,
    quantum: f64,
}

impl SumKey {
    fn new(m: &Matrix, tol: &Tolerance) -> Self {
        let exact = m.iter().all(|x| x.fract() == 0.0 && x.abs() < 2f64.powi(40));
        Self {
            exact,
            quantum: tol.zero_abs * max_abs(m).max(1.0),
        }
    }

    fn key(&self, x: f64) -> i64 {
        if self.exact {
            x as i64
        } else {
            (x / self.quantum).round() as i64
        }
    }
}

/// Refine `initial` (a partition of the network nodes) to the coarsest
/// equitable partition of the extended Laplacian below it.
pub fn refine_equitable(
    ext: &ExtendedLaplacian,
    initial: &Partition,
    tol: &Tolerance,
) -> Result<Partition> {
    let n = ext.n();
    if initial.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "partition covers {} nodes, network has {n}",
            initial.n()
        )));
    }
    let lt = &ext.ltilde;
    let keyer = SumKey::new(lt, tol);
    // Class labels over all N + 1 nodes; the source keeps label 0.
    let mut label = vec![0usize; n + 1];
    for (k, c) in initial.clusters.iter().enumerate() {
        for &i in c {
            label[i] = k + 1;
        }
    }
    let mut classes = initial.m() + 1;
    loop {
        let mut sigs: BTreeMap<(usize, Vec<i64>), usize> = BTreeMap::new();
        let mut next = vec![0usize; n + 1];
        for i in 0..n {
            let mut sums = vec![0.0; classes];
            for j in 0..=n {
                sums[label[j]] += lt[(i, j)];
            }
            let sig = (label[i], sums.iter().map(|&x| keyer.key(x)).collect());
            let fresh = sigs.len() + 1;
            next[i] = *sigs.entry(sig).or_insert(fresh);
        }
        let new_classes = sigs.len() + 1;
        label = next;
        if new_classes == classes {
            break;
        }
        classes = new_classes;
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in label.iter().enumerate().take(n) {
        groups.entry(l).or_default().push(i);
    }
    Partition::new(groups.into_values().collect(), n)
}

/// Coarsest equitable partition: refinement starting from the single class
/// of all network nodes (the source node forms its own class).
pub fn coarsest_equitable(ext: &ExtendedLaplacian, tol: &Tolerance) -> Result<Partition> {
    let n = ext.n();
    let all = Partition {
        clusters: vec![(0..n).collect()],
    };
    refine_equitable(ext, &all, tol)
}

/// Largest violation of the equal-row-sum condition over all clusters
/// (including the source class).
pub fn equitable_defect(ext: &ExtendedLaplacian, p: &Partition) -> f64 {
    let n = ext.n();
    let mut targets: Vec<Vec<usize>> = p.clusters.clone();
    targets.push(vec![n]);
    let mut worst: f64 = 0.0;
    for c in &p.clusters {
        for t in &targets {
            let sums: Vec<f64> = c
                .iter()
                .map(|&i| t.iter().map(|&j| ext.ltilde[(i, j)]).sum())
                .collect();
            let lo = sums.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max(hi - lo);
        }
    }
    worst
}

pub fn indicator(p: &Partition) -> IndicatorMatrix {
    let mut e = Matrix::zeros(p.n(), p.m());
    for (k, c) in p.clusters.iter().enumerate() {
        for &i in c {
            e[(i, k)] = 1.0;
        }
    }
    IndicatorMatrix { e }
}

/// `L_Q = Ê^T L Ê`, `R_Q = Ê^T R Ê` with `Ê = E (E^T E)^{-1/2}`. The
/// partition must be equitable for the pair; leakage out of the quotient
/// subspace is reported as an error.
pub fn quotient_pair(pair: &LaplacianPair, e: &IndicatorMatrix, tol: &Tolerance) -> Result<QuotientPair> {
    if e.e.nrows() != pair.n() {
        return Err(Error::DimensionMismatch(format!(
            "indicator has {} rows, pair has {} nodes",
            e.e.nrows(),
            pair.n()
        )));
    }
    let eh = e.normalized();
    let l_q = eh.transpose() * &pair.l * &eh;
    let r_q = eh.transpose() * &pair.r * &eh;
    let leak_l = (&pair.l * &eh - &eh * &l_q).norm();
    let leak_r = (&pair.r * &eh - &eh * &r_q).norm();
    let scale = pair.l.norm().max(1.0);
    let leakage = leak_l.max(leak_r);
    if leakage > tol.zero_abs * scale {
        return Err(Error::NotEquitable { leakage });
    }
    let m = r_q.nrows();
    for i in 0..m {
        for j in 0..m {
            let x = r_q[(i, j)];
            let want = if i == j && x > 0.5 { 1.0 } else { 0.0 };
            if (x - want).abs() > tol.zero_abs {
                let cluster = (0..pair.n()).filter(|&k| e.e[(k, i)] != 0.0).collect();
                return Err(Error::MixedCluster { cluster });
            }
        }
    }
    let l_q = (&l_q + l_q.transpose()) * 0.5;
    let r_q = Matrix::from_fn(m, m, |i, j| if i == j && r_q[(i, i)] > 0.5 { 1.0 } else { 0.0 });
    Ok(QuotientPair { l_q, r_q })
}

/// Orthogonal `T_q`: the first M rows are the normalized cluster indicators;
/// each cluster of size k then contributes k - 1 contrast rows supported on it.
pub fn build_tq(e: &IndicatorMatrix) -> Matrix {
    let (n, m) = e.e.shape();
    let mut t = Matrix::zeros(n, n);
    let eh = e.normalized();
    for k in 0..m {
        t.set_row(k, &eh.column(k).transpose());
    }
    let mut row = m;
    for k in 0..m {
        let members: Vec<usize> = (0..n).filter(|&i| e.e[(i, k)] != 0.0).collect();
        for contrast in helmert_contrasts(members.len()) {
            for (pos, &i) in members.iter().enumerate() {
                t[(row, i)] = contrast[pos];
            }
            row += 1;
        }
    }
    t
}
