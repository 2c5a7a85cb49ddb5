//! Master-stability machinery: a shared target trajectory, per-block
//! variational Lyapunov exponents over a coupling sweep, direct simulation
//! of the controlled network, and the two critical couplings.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hatdecomp::FourBlockReport;
use crate::netmodel::{rng_from_seed, NetworkWithInputs};
use crate::numkernel::Matrix;
use crate::sbd::{BlockClass, BlockDecomposition, BlockKind};

/// Norm above which a state is treated as diverged.
pub const BLOW_UP: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VectorField {
    Rossler { a: f64, b: f64, c: f64 },
    /// `x' = A x` with `A` given row-major.
    Linear { a: Vec<Vec<f64>> },
}

/// Node dynamics plus the linear selectors used for node-to-node coupling
/// (`g`) and pinning (`h`): `G(x) = diag(g) x`, `H(x) = diag(h) x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorSpec {
    pub field: VectorField,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

impl OscillatorSpec {
    pub fn rossler(a: f64, b: f64, c: f64, g: [f64; 3], h: [f64; 3]) -> Self {
        Self {
            field: VectorField::Rossler { a, b, c },
            g: g.to_vec(),
            h: h.to_vec(),
        }
    }

    /// Rössler (0.1, 0.1, 15) coupled through `x`, pinned through `y`.
    pub fn rossler_x_coupling() -> Self {
        Self::rossler(0.1, 0.1, 15.0, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
    }

    /// Rössler (0.1, 0.1, 15) coupled through `x` and `y`, pinned through `y`.
    pub fn rossler_xy_coupling() -> Self {
        Self::rossler(0.1, 0.1, 15.0, [1.0, 1.0, 0.0], [0.0, 1.0, 0.0])
    }

    pub fn linear(a: Matrix, g: Vec<f64>, h: Vec<f64>) -> Self {
        let rows = (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect();
        Self {
            field: VectorField::Linear { a: rows },
            g,
            h,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.field {
            VectorField::Rossler { .. } => 3,
            VectorField::Linear { a } => a.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.dim();
        if m == 0 {
            return Err(Error::InvalidParameter("oscillator has dimension 0".into()));
        }
        if let VectorField::Linear { a } = &self.field {
            if a.iter().any(|row| row.len() != m) {
                return Err(Error::InvalidParameter("linear field matrix is not square".into()));
            }
        }
        if self.g.len() != m || self.h.len() != m {
            return Err(Error::InvalidParameter(format!(
                "coupling selectors must have length {m}"
            )));
        }
        let all = self.g.iter().chain(&self.h);
        if all.clone().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    pub fn f(&self, x: &[f64], out: &mut [f64]) {
        match &self.field {
            VectorField::Rossler { a, b, c } => {
                out[0] = -x[1] - x[2];
                out[1] = x[0] + a * x[1];
                out[2] = b + x[2] * (x[0] - c);
            }
            VectorField::Linear { a } => {
                for (o, row) in out.iter_mut().zip(a) {
                    *o = row.iter().zip(x).map(|(p, q)| p * q).sum();
                }
            }
        }
    }

    /// Row-major Jacobian of `f` at `x`.
    pub fn jacobian(&self, x: &[f64], out: &mut [f64]) {
        match &self.field {
            VectorField::Rossler { a, c, .. } => {
                out.copy_from_slice(&[0.0, -1.0, -1.0, 1.0, *a, 0.0, x[2], 0.0, x[0] - c]);
            }
            VectorField::Linear { a } => {
                let m = a.len();
                for (i, row) in a.iter().enumerate() {
                    out[i * m..(i + 1) * m].copy_from_slice(row);
                }
            }
        }
    }
}

fn rk4_step(osc: &OscillatorSpec, x: &mut [f64], h: f64, k: &mut [Vec<f64>; 5]) {
    let m = x.len();
    let [k1, k2, k3, k4, tmp] = k;
    osc.f(x, k1);
    for i in 0..m {
        tmp[i] = x[i] + 0.5 * h * k1[i];
    }
    osc.f(tmp, k2);
    for i in 0..m {
        tmp[i] = x[i] + 0.5 * h * k2[i];
    }
    osc.f(tmp, k3);
    for i in 0..m {
        tmp[i] = x[i] + h * k3[i];
    }
    osc.f(tmp, k4);
    for i in 0..m {
        x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Target trajectory sampled every half step, so that a fixed-step RK4 of
/// size `dt` along it finds its midpoints stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub m: usize,
    pub dt: f64,
    /// Row-major `(2 * steps + 1) x m` samples at spacing `dt / 2`.
    pub samples: Vec<f64>,
}

impl Trajectory {
    /// Number of full steps of size `dt` covered.
    pub fn steps(&self) -> usize {
        (self.samples.len() / self.m - 1) / 2
    }

    pub fn duration(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    /// State at half-step index `k`.
    pub fn half(&self, k: usize) -> &[f64] {
        &self.samples[k * self.m..(k + 1) * self.m]
    }

    /// State at the start of full step `k`.
    pub fn at(&self, k: usize) -> &[f64] {
        self.half(2 * k)
    }
}

/// Integrate `x' = F(x)` from `x0`, discard `t_transient`, then keep
/// `t_span` worth of samples.
pub fn target_trajectory(
    osc: &OscillatorSpec,
    x0: &[f64],
    t_transient: f64,
    t_span: f64,
    dt: f64,
) -> Result<Trajectory> {
    osc.validate()?;
    let m = osc.dim();
    if x0.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "initial state has length {}, oscillator dimension is {m}",
            x0.len()
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) || !(t_transient >= 0.0) || !(t_span >= 0.0) {
        return Err(Error::InvalidParameter("time parameters must be non-negative and dt positive".into()));
    }
    let h = dt / 2.0;
    let mut x = x0.to_vec();
    let mut k: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; m]);
    let transient = (t_transient / h).round() as usize;
    for step in 0..transient {
        rk4_step(osc, &mut x, h, &mut k);
        if !(norm(&x) <= BLOW_UP) {
            return Err(Error::BlowUp { t: (step + 1) as f64 * h });
        }
    }
    let steps = (t_span / dt).round() as usize;
    let mut samples = Vec::with_capacity((2 * steps + 1) * m);
    samples.extend_from_slice(&x);
    for step in 0..2 * steps {
        rk4_step(osc, &mut x, h, &mut k);
        if !(norm(&x) <= BLOW_UP) {
            return Err(Error::BlowUp { t: t_transient + (step + 1) as f64 * h });
        }
        samples.extend_from_slice(&x);
    }
    Ok(Trajectory { m, dt, samples })
}

/// A block pair driven by `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVariational {
    pub l_block: Matrix,
    pub r_block: Matrix,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleParams {
    pub dt: f64,
    /// Transient of the target before any measurement.
    pub t_transient: f64,
    /// Time over which growth rates are averaged.
    pub t_measure: f64,
    pub renorm_interval: f64,
    /// Time the perturbation is evolved before accumulation starts.
    pub t_discard: f64,
    pub seed: u64,
}

impl Default for MleParams {
    fn default() -> Self {
        Self {
            dt: 0.005,
            t_transient: 200.0,
            t_measure: 2000.0,
            renorm_interval: 1.0,
            t_discard: 20.0,
            seed: 1,
        }
    }
}

impl MleParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.dt > 0.0
            && self.t_transient >= 0.0
            && self.t_measure > 0.0
            && self.renorm_interval >= self.dt
            && self.t_discard >= 0.0
            && [self.dt, self.t_transient, self.t_measure, self.renorm_interval, self.t_discard]
                .iter()
                .all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "integration parameters need dt > 0, t_measure > 0 and renorm_interval >= dt".into(),
            ))
        }
    }

    /// Shared target for a sweep: transient from `x0`, then enough samples
    /// for the discard and measurement windows.
    pub fn target(&self, osc: &OscillatorSpec, x0: &[f64]) -> Result<Trajectory> {
        self.validate()?;
        target_trajectory(osc, x0, self.t_transient, self.t_discard + self.t_measure, self.dt)
    }
}

/// Dense per-coordinate coupling operators `C_a = g_a L - gamma h_a R` for
/// the variational equation `Y' = Y DF^T + [C_a Y_a]_a`, where `Y` is
/// `b x m` and `Y_a` its `a`-th column.
struct VarSystem {
    b: usize,
    m: usize,
    /// `C_a` row-major, `None` when identically zero.
    ops: Vec<Option<Vec<f64>>>,
}

impl VarSystem {
    fn new(bv: &BlockVariational, osc: &OscillatorSpec) -> Self {
        let b = bv.l_block.nrows();
        let m = osc.dim();
        let ops = (0..m)
            .map(|a| {
                let c = &bv.l_block * osc.g[a] - &bv.r_block * (bv.gamma * osc.h[a]);
                if c.iter().all(|&x| x == 0.0) {
                    None
                } else {
                    Some((0..b).flat_map(|i| (0..b).map(move |j| (i, j))).map(|(i, j)| c[(i, j)]).collect())
                }
            })
            .collect();
        Self { b, m, ops }
    }

    /// `out = d/dt Y` with `Y` stored column-major (`y[a * b + i]`).
    fn deriv(&self, jac: &[f64], y: &[f64], out: &mut [f64]) {
        let (b, m) = (self.b, self.m);
        for a in 0..m {
            let oa = &mut out[a * b..(a + 1) * b];
            oa.iter_mut().for_each(|v| *v = 0.0);
            for c in 0..m {
                let j = jac[a * m + c];
                if j != 0.0 {
                    let yc = &y[c * b..(c + 1) * b];
                    for (o, v) in oa.iter_mut().zip(yc) {
                        *o += j * v;
                    }
                }
            }
            if let Some(op) = &self.ops[a] {
                let ya = &y[a * b..(a + 1) * b];
                for (i, o) in oa.iter_mut().enumerate() {
                    let row = &op[i * b..(i + 1) * b];
                    *o += row.iter().zip(ya).map(|(p, q)| p * q).sum::<f64>();
                }
            }
        }
    }
}

/// Largest Lyapunov exponent of the block variational equation along
/// `traj`, by Benettin renormalization.
pub fn block_mle(
    bv: &BlockVariational,
    osc: &OscillatorSpec,
    traj: &Trajectory,
    params: &MleParams,
    perturbation_seed: u64,
) -> Result<f64> {
    params.validate()?;
    let b = bv.l_block.nrows();
    if b == 0 || bv.r_block.shape() != (b, b) || bv.l_block.ncols() != b {
        return Err(Error::DimensionMismatch("block matrices must be square, equal and non-empty".into()));
    }
    let m = osc.dim();
    if traj.m != m || (traj.dt - params.dt).abs() > 1e-15 * params.dt {
        return Err(Error::DimensionMismatch("trajectory does not match oscillator or step".into()));
    }
    let discard = (params.t_discard / params.dt).round() as usize;
    let measure = (params.t_measure / params.dt).round() as usize;
    if discard + measure > traj.steps() {
        return Err(Error::InvalidParameter(format!(
            "trajectory covers {} steps, {} needed",
            traj.steps(),
            discard + measure
        )));
    }
    let renorm = ((params.renorm_interval / params.dt).round() as usize).max(1);
    let sys = VarSystem::new(bv, osc);
    let n = b * m;
    let mut rng = rng_from_seed(perturbation_seed);
    let mut y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let y0 = norm(&y);
    y.iter_mut().for_each(|v| *v /= y0);
    let mut k: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
    let mut jac = [vec![0.0; m * m], vec![0.0; m * m], vec![0.0; m * m]];
    let h = params.dt;
    let mut log_sum = 0.0;
    let mut measured_steps = 0usize;
    for step in 0..discard + measure {
        osc.jacobian(traj.half(2 * step), &mut jac[0]);
        osc.jacobian(traj.half(2 * step + 1), &mut jac[1]);
        osc.jacobian(traj.half(2 * step + 2), &mut jac[2]);
        let [k1, k2, k3, k4, tmp] = &mut k;
        sys.deriv(&jac[0], &y, k1);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        sys.deriv(&jac[1], tmp, k2);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        sys.deriv(&jac[1], tmp, k3);
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        sys.deriv(&jac[2], tmp, k4);
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let done = step + 1;
        let at_boundary = done % renorm == 0 || done == discard || done == discard + measure;
        if at_boundary {
            let ny = norm(&y);
            if !ny.is_finite() || ny == 0.0 {
                return Err(Error::NonFiniteGrowth);
            }
            if done > discard {
                log_sum += ny.ln();
            }
            y.iter_mut().for_each(|v| *v /= ny);
            if done > discard {
                measured_steps = done - discard;
            }
        }
    }
    Ok(log_sum / (measured_steps as f64 * h))
}

/// One block entering a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepBlock {
    pub id: usize,
    pub class: BlockClass,
    pub kind: BlockKind,
    pub l_block: Matrix,
    pub r_block: Matrix,
}

impl SweepBlock {
    pub fn size(&self) -> usize {
        self.l_block.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockFilter {
    All,
    DrivenOnly,
    UndrivenOnly,
}

impl BlockFilter {
    pub fn keeps(self, kind: BlockKind) -> bool {
        match self {
            BlockFilter::All => true,
            BlockFilter::DrivenOnly => kind == BlockKind::Driven,
            BlockFilter::UndrivenOnly => kind == BlockKind::Undriven,
        }
    }
}

fn to_sweep(blocks: &[crate::sbd::Block], filter: BlockFilter) -> Vec<SweepBlock> {
    blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| filter.keeps(b.kind))
        .map(|(id, b)| SweepBlock {
            id,
            class: b.class,
            kind: b.kind,
            l_block: b.l_block.clone(),
            r_block: b.r_block.clone(),
        })
        .collect()
}

pub fn sweep_blocks_sbd(dec: &BlockDecomposition, filter: BlockFilter) -> Vec<SweepBlock> {
    to_sweep(&dec.blocks, filter)
}

pub fn sweep_blocks_hat(rep: &FourBlockReport, filter: BlockFilter) -> Vec<SweepBlock> {
    to_sweep(&rep.blocks, filter)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// MLE goes from positive to negative as gamma grows.
    Down,
    Up,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub gamma: f64,
    pub direction: Direction,
}

/// Sign changes of `values` over `grid`, linearly interpolated.
pub fn zero_crossings(grid: &[f64], values: &[f64]) -> Vec<Crossing> {
    let mut out = Vec::new();
    for k in 1..grid.len().min(values.len()) {
        let (a, b) = (values[k - 1], values[k]);
        let direction = if a >= 0.0 && b < 0.0 {
            Direction::Down
        } else if a < 0.0 && b >= 0.0 {
            Direction::Up
        } else {
            continue;
        };
        let gamma = grid[k - 1] + (grid[k] - grid[k - 1]) * a / (a - b);
        out.push(Crossing { gamma, direction });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockCurve {
    pub id: usize,
    pub class: BlockClass,
    pub kind: BlockKind,
    pub size: usize,
    pub mle: Vec<f64>,
    pub crossings: Vec<Crossing>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsfCurve {
    pub gammas: Vec<f64>,
    pub blocks: Vec<BlockCurve>,
    pub max_mle: Vec<f64>,
    pub crossings: Vec<Crossing>,
}

impl MsfCurve {
    /// Index (into `blocks`) of the largest driven block; ties go to the
    /// earliest.
    pub fn largest_driven(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (k, b) in self.blocks.iter().enumerate() {
            if b.kind == BlockKind::Driven && best.is_none_or(|j| b.size > self.blocks[j].size) {
                best = Some(k);
            }
        }
        best
    }

    pub fn first_down(&self) -> Option<f64> {
        first_down(&self.crossings)
    }
}

pub fn first_down(c: &[Crossing]) -> Option<f64> {
    c.iter().find(|x| x.direction == Direction::Down).map(|x| x.gamma)
}

/// Ascending grid `min, min + step, ...` up to `max` inclusive (within
/// rounding).
pub fn gamma_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(max >= min) || !min.is_finite() || !max.is_finite() || min < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma grid needs 0 <= min <= max and step > 0 (got {min}, {max}, {step})"
        )));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| min + k as f64 * step).collect())
}

/// Per-block MLE over `gammas`. Undriven blocks are integrated once. Tasks
/// run on the current rayon pool; results are ordered by gamma then block.
pub fn gamma_sweep(
    blocks: &[SweepBlock],
    osc: &OscillatorSpec,
    gammas: &[f64],
    traj: &Trajectory,
    params: &MleParams,
) -> Result<MsfCurve> {
    if gammas.is_empty() {
        return Err(Error::InvalidParameter("empty gamma grid".into()));
    }
    if gammas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("gamma grid must be strictly increasing".into()));
    }
    let mut tasks = Vec::new();
    for (bi, b) in blocks.iter().enumerate() {
        match b.kind {
            BlockKind::Undriven => tasks.push((bi, None)),
            BlockKind::Driven => tasks.extend((0..gammas.len()).map(|gi| (bi, Some(gi)))),
        }
    }
    let values: Vec<Result<f64>> = tasks
        .par_iter()
        .map(|&(bi, gi)| {
            let b = &blocks[bi];
            let bv = BlockVariational {
                l_block: b.l_block.clone(),
                r_block: b.r_block.clone(),
                gamma: gi.map_or(0.0, |g| gammas[g]),
            };
            block_mle(&bv, osc, traj, params, params.seed.wrapping_add(b.id as u64))
        })
        .collect();
    let mut mle = vec![vec![f64::NAN; gammas.len()]; blocks.len()];
    for (&(bi, gi), v) in tasks.iter().zip(values) {
        let v = v?;
        match gi {
            Some(g) => mle[bi][g] = v,
            None => mle[bi].iter_mut().for_each(|x| *x = v),
        }
    }
    let max_mle: Vec<f64> = (0..gammas.len())
        .map(|g| mle.iter().map(|c| c[g]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let curves = blocks
        .iter()
        .zip(mle)
        .map(|(b, m)| BlockCurve {
            id: b.id,
            class: b.class,
            kind: b.kind,
            size: b.size(),
            crossings: zero_crossings(gammas, &m),
            mle: m,
        })
        .collect();
    let crossings = if blocks.is_empty() {
        Vec::new()
    } else {
        zero_crossings(gammas, &max_mle)
    };
    Ok(MsfCurve {
        gammas: gammas.to_vec(),
        blocks: curves,
        max_mle,
        crossings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub dt: f64,
    pub t_span: f64,
    /// Transient of the isolated target before the network starts.
    pub t_transient: f64,
    /// Half-width of the uniform initial offset from the target.
    pub spread: f64,
    pub threshold: f64,
    /// Spacing of recorded error samples.
    pub record_interval: f64,
    pub seed: u64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            dt: 0.005,
            t_span: 5000.0,
            t_transient: 200.0,
            spread: 1.0,
            threshold: 1e-3,
            record_interval: 1.0,
            seed: 1,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.dt > 0.0
            && self.t_span > 0.0
            && self.t_transient >= 0.0
            && self.spread >= 0.0
            && self.threshold > 0.0
            && self.record_interval >= self.dt
            && [self.dt, self.t_span, self.t_transient, self.spread, self.threshold, self.record_interval]
                .iter()
                .all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "simulation needs dt > 0, t_span > 0, threshold > 0 and record_interval >= dt".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub gamma: f64,
    pub times: Vec<f64>,
    /// `errors[k][i]` is `E_i` at `times[k]`.
    pub errors: Vec<Vec<f64>>,
    /// Node states at the final time, `n x m`.
    pub final_states: Vec<Vec<f64>>,
    /// Largest `E_i` over the last fifth of the run.
    pub tail_max_error: f64,
    pub synchronized: bool,
    pub diverged: bool,
}

/// Full nonlinear network under pinning control:
/// `x_i' = F(x_i) + sum_j A_ij (G(x_j) - G(x_i)) + gamma r_i (H(x_t) - H(x_i))`.
pub fn simulate_network(
    net: &NetworkWithInputs,
    osc: &OscillatorSpec,
    gamma: f64,
    x0_target: &[f64],
    params: &SimParams,
) -> Result<SimOutcome> {
    net.validate()?;
    osc.validate()?;
    params.validate()?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
    }
    let m = osc.dim();
    let n = net.n;
    let pre = target_trajectory(osc, x0_target, params.t_transient, 0.0, params.dt)?;
    let neighbors: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| net.edges_of(i))
        .collect();
    let pinned: Vec<bool> = (0..n).map(|i| net.is_pinned(i)).collect();
    let dim = (n + 1) * m;
    // State layout: nodes 0..n, then the target.
    let mut x = vec![0.0; dim];
    let xt0 = pre.at(0).to_vec();
    let mut rng = rng_from_seed(params.seed);
    for i in 0..n {
        for a in 0..m {
            let off = if params.spread > 0.0 {
                rng.random_range(-params.spread..=params.spread)
            } else {
                0.0
            };
            x[i * m + a] = xt0[a] + off;
        }
    }
    x[n * m..].copy_from_slice(&xt0);

    let deriv = |x: &[f64], out: &mut [f64]| {
        let xt = &x[n * m..];
        osc.f(xt, &mut out[n * m..]);
        for i in 0..n {
            let xi = &x[i * m..(i + 1) * m];
            let (head, _) = out.split_at_mut((i + 1) * m);
            let oi = &mut head[i * m..];
            osc.f(xi, oi);
            for &(j, w) in &neighbors[i] {
                let xj = &x[j * m..(j + 1) * m];
                for a in 0..m {
                    if osc.g[a] != 0.0 {
                        oi[a] += w * osc.g[a] * (xj[a] - xi[a]);
                    }
                }
            }
            if pinned[i] {
                for a in 0..m {
                    if osc.h[a] != 0.0 {
                        oi[a] += gamma * osc.h[a] * (xt[a] - xi[a]);
                    }
                }
            }
        }
    };
    let error = |x: &[f64], i: usize| -> f64 {
        let xt = &x[n * m..];
        (0..m).map(|a| (x[i * m + a] - xt[a]).powi(2)).sum::<f64>().sqrt()
    };

    let steps = (params.t_span / params.dt).round() as usize;
    let record = ((params.record_interval / params.dt).round() as usize).max(1);
    let tail_start = steps - steps / 5;
    let h = params.dt;
    let mut k: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; dim]);
    let mut times = vec![0.0];
    let mut errors = vec![(0..n).map(|i| error(&x, i)).collect::<Vec<_>>()];
    let mut tail_max: f64 = 0.0;
    let mut diverged = false;
    for step in 0..steps {
        let [k1, k2, k3, k4, tmp] = &mut k;
        deriv(&x, k1);
        for i in 0..dim {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        deriv(tmp, k2);
        for i in 0..dim {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        deriv(tmp, k3);
        for i in 0..dim {
            tmp[i] = x[i] + h * k3[i];
        }
        deriv(tmp, k4);
        for i in 0..dim {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let done = step + 1;
        if !(norm(&x) <= BLOW_UP) {
            diverged = true;
            times.push(done as f64 * h);
            errors.push(vec![f64::INFINITY; n]);
            break;
        }
        if done >= tail_start {
            for i in 0..n {
                tail_max = tail_max.max(error(&x, i));
            }
        }
        if done % record == 0 || done == steps {
            times.push(done as f64 * h);
            errors.push((0..n).map(|i| error(&x, i)).collect());
        }
    }
    let final_states = (0..n).map(|i| x[i * m..(i + 1) * m].to_vec()).collect();
    let tail_max_error = if diverged { f64::INFINITY } else { tail_max };
    Ok(SimOutcome {
        gamma,
        times,
        errors,
        final_states,
        tail_max_error,
        synchronized: !diverged && tail_max < params.threshold,
        diverged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaStars {
    /// From direct simulation: the first grid transition to a synchronized
    /// verdict, bisected to a fraction of the step.
    pub gamma_star_1: Option<f64>,
    /// First downward MLE crossing of the largest driven block.
    pub gamma_star_2: Option<f64>,
    /// First downward crossing of the max-over-blocks curve.
    pub gamma_max_crossing: Option<f64>,
    pub largest_block_class: Option<BlockClass>,
    pub largest_block_size: usize,
    /// Synchronization verdict at each grid point.
    pub grid_verdicts: Vec<bool>,
    pub diagnostics: Vec<String>,
}

/// Refinement factor of the bisection relative to the grid step.
pub const BISECTION_FACTOR: f64 = 8.0;

/// Compare the simulated threshold with the block-MLE threshold.
pub fn find_gamma_stars(
    net: &NetworkWithInputs,
    osc: &OscillatorSpec,
    curve: &MsfCurve,
    x0_target: &[f64],
    sim: &SimParams,
) -> Result<GammaStars> {
    let gammas = &curve.gammas;
    let mut diagnostics = Vec::new();
    let largest = curve.largest_driven();
    let gamma_star_2 = largest.and_then(|k| first_down(&curve.blocks[k].crossings));
    if gamma_star_2.is_none() {
        diagnostics.push("largest driven block has no downward MLE crossing in range".into());
    }
    let verdicts: Vec<Result<bool>> = gammas
        .par_iter()
        .map(|&g| simulate_network(net, osc, g, x0_target, sim).map(|o| o.synchronized))
        .collect();
    let verdicts: Vec<bool> = verdicts.into_iter().collect::<Result<_>>()?;
    let mut gamma_star_1 = None;
    if let Some(k) = (1..gammas.len()).find(|&k| verdicts[k] && !verdicts[k - 1]) {
        let (mut lo, mut hi) = (gammas[k - 1], gammas[k]);
        let target = (gammas[k] - gammas[k - 1]) / BISECTION_FACTOR;
        while hi - lo > target * (1.0 + 1e-9) {
            let mid = 0.5 * (lo + hi);
            if simulate_network(net, osc, mid, x0_target, sim)?.synchronized {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        gamma_star_1 = Some(0.5 * (lo + hi));
    } else if verdicts.first() == Some(&true) {
        diagnostics.push("synchronized already at the lowest gamma".into());
    } else {
        diagnostics.push("no transition to synchronization in range".into());
    }
    Ok(GammaStars {
        gamma_star_1,
        gamma_star_2,
        gamma_max_crossing: curve.first_down(),
        largest_block_class: largest.map(|k| curve.blocks[k].class),
        largest_block_size: largest.map_or(0, |k| curve.blocks[k].size),
        grid_verdicts: verdicts,
        diagnostics,
    })
}

/// Default initial target state.
pub const DEFAULT_X0: [f64; 3] = [1.0, 1.0, 0.0];
