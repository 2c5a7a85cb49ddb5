//! Serializable views of decompositions, sweeps and simulations. Node and
//! block indices are 1-based here.

use std::fmt::Write as _;

use serde::Serialize;

use crate::hatdecomp::{FourBlockReport, FourSizes, HatResiduals};
use crate::numkernel::Matrix;
use crate::sbd::{Block, BlockClass, BlockDecomposition, BlockKind, SbdDiagnostics};
use crate::stability::{MsfCurve, SimOutcome};

/// Ascending eigenvalues of the symmetric part.
fn spectrum(m: &Matrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m + m.transpose()) * 0.5;
    let mut v: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockReport {
    pub block: usize,
    pub size: usize,
    pub kind: BlockKind,
    pub class: BlockClass,
    /// Columns of the transformation spanning this block.
    pub columns: Vec<usize>,
    pub l_spectrum: Vec<f64>,
    pub r_spectrum: Vec<f64>,
}

fn block_reports(blocks: &[Block]) -> Vec<BlockReport> {
    blocks
        .iter()
        .enumerate()
        .map(|(k, b)| BlockReport {
            block: k + 1,
            size: b.size(),
            kind: b.kind,
            class: b.class,
            columns: b.indices.iter().map(|i| i + 1).collect(),
            l_spectrum: spectrum(&b.l_block),
            r_spectrum: spectrum(&b.r_block),
        })
        .collect()
}

fn driven(blocks: &[Block]) -> usize {
    blocks
        .iter()
        .filter(|b| b.kind == BlockKind::Driven)
        .map(Block::size)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SbdReport {
    pub n: usize,
    pub permutation: Vec<usize>,
    pub sizes: Vec<usize>,
    pub size_multiset: Vec<usize>,
    pub driven_size: usize,
    pub blocks: Vec<BlockReport>,
    pub diagnostics: SbdDiagnostics,
}

impl SbdReport {
    pub fn new(dec: &BlockDecomposition) -> Self {
        Self {
            n: dec.n(),
            permutation: dec.permutation.iter().map(|i| i + 1).collect(),
            sizes: dec.sizes(),
            size_multiset: dec.size_multiset(),
            driven_size: dec.driven_size(),
            blocks: block_reports(&dec.blocks),
            diagnostics: dec.diagnostics.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassSpectra {
    pub qc: Vec<f64>,
    pub rc: Vec<f64>,
    pub qu: Vec<f64>,
    pub ru: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HatReport {
    pub n: usize,
    pub clusters: Vec<Vec<usize>>,
    pub sizes: FourSizes,
    /// Spectra of the L part of each class.
    pub class_spectra: ClassSpectra,
    pub size_multiset: Vec<usize>,
    pub driven_size: usize,
    pub blocks: Vec<BlockReport>,
    pub residuals: HatResiduals,
    pub rank_ambiguous: bool,
}

impl HatReport {
    pub fn new(rep: &FourBlockReport) -> Self {
        Self {
            n: rep.t_hat.nrows(),
            clusters: rep.partition.one_based(),
            sizes: rep.sizes,
            class_spectra: ClassSpectra {
                qc: spectrum(&rep.qc.l),
                rc: spectrum(&rep.rc.l),
                qu: spectrum(&rep.qu.l),
                ru: spectrum(&rep.ru.l),
            },
            size_multiset: rep.size_multiset(),
            driven_size: driven(&rep.blocks),
            blocks: block_reports(&rep.blocks),
            residuals: rep.residuals.clone(),
            rank_ambiguous: rep.rank_ambiguous,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Match,
    Mismatch,
}

/// Both routes on one network, with the block-size comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecomposeReport {
    pub n: usize,
    pub pinned: Vec<usize>,
    pub controllable_dim: usize,
    pub sbd: SbdReport,
    pub hat: HatReport,
    pub verdict: Verdict,
}

impl DecomposeReport {
    pub fn new(
        pinned: &[usize],
        controllable_dim: usize,
        dec: &BlockDecomposition,
        rep: &FourBlockReport,
    ) -> Self {
        let sbd = SbdReport::new(dec);
        let hat = HatReport::new(rep);
        let verdict = if sbd.size_multiset == hat.size_multiset {
            Verdict::Match
        } else {
            Verdict::Mismatch
        };
        Self {
            n: sbd.n,
            pinned: pinned.iter().map(|i| i + 1).collect(),
            controllable_dim,
            sbd,
            hat,
            verdict,
        }
    }
}

/// Long-format CSV `gamma,block_id,mle`, gamma-major.
pub fn msf_csv(curve: &MsfCurve) -> String {
    let mut out = String::from("gamma,block_id,mle\n");
    for (g, gamma) in curve.gammas.iter().enumerate() {
        for b in &curve.blocks {
            let _ = writeln!(out, "{gamma},{},{}", b.id + 1, b.mle[g]);
        }
    }
    out
}

/// `gamma,max_mle` per grid point.
pub fn msf_max_csv(curve: &MsfCurve) -> String {
    let mut out = String::from("gamma,max_mle\n");
    for (gamma, m) in curve.gammas.iter().zip(&curve.max_mle) {
        let _ = writeln!(out, "{gamma},{m}");
    }
    out
}

/// Long-format CSV `t,node,error`.
pub fn sim_csv(sim: &SimOutcome) -> String {
    let mut out = String::from("t,node,error\n");
    for (t, row) in sim.times.iter().zip(&sim.errors) {
        for (i, e) in row.iter().enumerate() {
            let _ = writeln!(out, "{t},{},{e}", i + 1);
        }
    }
    out
}

/// Summary of one simulation without the time series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub gamma: f64,
    pub synchronized: bool,
    pub diverged: bool,
    pub tail_max_error: f64,
    pub final_errors: Vec<f64>,
    pub samples: usize,
}

impl SimSummary {
    pub fn new(sim: &SimOutcome) -> Self {
        Self {
            gamma: sim.gamma,
            synchronized: sim.synchronized,
            diverged: sim.diverged,
            tail_max_error: sim.tail_max_error,
            final_errors: sim.errors.last().cloned().unwrap_or_default(),
            samples: sim.times.len(),
        }
    }
}
