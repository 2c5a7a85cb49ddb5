#![allow(dead_code)]

use pinblock::netmodel::LaplacianPair;
use pinblock::sbd::{Block, BlockKind};
use pinblock::Matrix;

/// Rank over GF(2^61 - 1) of the integer Kalman matrix `[R, LR, ...]`.
/// Never exceeds the rational rank and equals it except for finitely many
/// primes.
pub fn kalman_rank_mod_p(l: &Matrix, r: &Matrix) -> usize {
    const P: u128 = (1 << 61) - 1;
    let n = l.nrows();
    let to_mod = |x: f64| -> u128 { (x.round() as i128).rem_euclid(P as i128) as u128 };
    let lm: Vec<Vec<u128>> = (0..n).map(|i| (0..n).map(|j| to_mod(l[(i, j)])).collect()).collect();
    let mut block: Vec<Vec<u128>> = (0..n).map(|i| (0..n).map(|j| to_mod(r[(i, j)])).collect()).collect();
    let mut rows: Vec<Vec<u128>> = vec![Vec::new(); n];
    for _ in 0..n {
        for i in 0..n {
            rows[i].extend_from_slice(&block[i]);
        }
        let mut next = vec![vec![0u128; n]; n];
        for i in 0..n {
            for k in 0..n {
                if lm[i][k] == 0 {
                    continue;
                }
                for j in 0..n {
                    next[i][j] = (next[i][j] + lm[i][k] * block[k][j]) % P;
                }
            }
        }
        block = next;
    }
    let pow = |mut b: u128, mut e: u128| {
        let mut acc = 1u128;
        b %= P;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % P;
            }
            b = b * b % P;
            e >>= 1;
        }
        acc
    };
    let cols = if n == 0 { 0 } else { rows[0].len() };
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..n).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = pow(rows[rank][col], P - 2);
        for i in 0..n {
            if i != rank && rows[i][col] != 0 {
                let f = rows[i][col] * inv % P;
                for j in col..cols {
                    let sub = f * rows[rank][j] % P;
                    rows[i][j] = (rows[i][j] + P - sub) % P;
                }
            }
        }
        rank += 1;
        if rank == n {
            break;
        }
    }
    rank
}

/// Frobenius mass of `m` outside the diagonal blocks given by `blocks`.
pub fn off_block_mass(m: &Matrix, blocks: &[Block]) -> f64 {
    let n = m.nrows();
    let mut owner = vec![usize::MAX; n];
    for (k, b) in blocks.iter().enumerate() {
        for &i in &b.indices {
            owner[i] = k;
        }
    }
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if owner[i] != owner[j] {
                s += m[(i, j)] * m[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Orthogonality, block structure, commutation, driven size against the
/// exact Kalman rank, and scalar undriven blocks.
pub fn structure_violations(pair: &LaplacianPair, t: &Matrix, blocks: &[Block]) -> Vec<String> {
    let mut out = Vec::new();
    let n = pair.n();
    let orth = (t.transpose() * t - Matrix::identity(n, n)).abs().max();
    if orth > 1e-10 {
        out.push(format!("T^T T - I = {orth:.2e}"));
    }
    let lt = t.transpose() * &pair.l * t;
    let rt = t.transpose() * &pair.r * t;
    let ln = pair.l.norm().max(1.0);
    let rn = pair.r.norm().max(1.0);
    let off_l = off_block_mass(&lt, blocks) / ln;
    let off_r = off_block_mass(&rt, blocks) / rn;
    if off_l > 1e-8 || off_r > 1e-8 {
        out.push(format!("off-block mass L {off_l:.2e} R {off_r:.2e}"));
    }
    // Block projectors commute with both transformed matrices.
    for (k, b) in blocks.iter().enumerate() {
        let mut p = Matrix::zeros(n, n);
        for &i in &b.indices {
            p[(i, i)] = 1.0;
        }
        let cl = (&p * &lt - &lt * &p).norm() / ln;
        let cr = (&p * &rt - &rt * &p).norm() / rn;
        if cl > 1e-8 || cr > 1e-8 {
            out.push(format!("block {k} commutator L {cl:.2e} R {cr:.2e}"));
        }
    }
    let driven: usize = blocks.iter().filter(|b| b.kind == BlockKind::Driven).map(|b| b.indices.len()).sum();
    let rank = kalman_rank_mod_p(&pair.l, &pair.r);
    if driven != rank {
        out.push(format!("driven size {driven} vs Kalman rank {rank}"));
    }
    for (k, b) in blocks.iter().enumerate() {
        if b.kind == BlockKind::Undriven && b.indices.len() != 1 {
            out.push(format!("undriven block {k} has size {}", b.indices.len()));
        }
        if b.kind == BlockKind::Undriven && b.r_block.norm() > 1e-8 {
            out.push(format!("undriven block {k} has R mass {:.2e}", b.r_block.norm()));
        }
    }
    out
}

/// `T^T R T` has spectrum in {0, 1} and trace equal to the pin count.
pub fn projector_violations(pair: &LaplacianPair, t: &Matrix) -> Vec<String> {
    let mut out = Vec::new();
    let rt = t.transpose() * &pair.r * t;
    let rt_sym = (&rt + rt.transpose()) * 0.5;
    let eig = rt_sym.symmetric_eigen().eigenvalues;
    if eig.iter().any(|&e| e.abs() > 1e-8 && (e - 1.0).abs() > 1e-8) {
        out.push(format!("T^T R T spectrum not in {{0, 1}}: {eig:?}"));
    }
    let trace = rt.trace();
    if (trace - pair.s() as f64).abs() > 1e-8 {
        out.push(format!("trace T^T R T = {trace} vs s = {}", pair.s()));
    }
    out
}

pub fn transform_violations(pair: &LaplacianPair, t: &Matrix, blocks: &[Block]) -> Vec<String> {
    let mut v = structure_violations(pair, t, blocks);
    v.extend(projector_violations(pair, t));
    v
}
