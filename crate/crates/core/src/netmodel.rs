//! Networks with inputs: ingestion, random generation, and assembly of the
//! Laplacian/input pair and the extended Laplacian.
//!
//! Node indices are 0-based in memory and 1-based in every text format.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numkernel::{asymmetry, ensure_square, max_abs, Matrix, Tolerance};

/// Seedable portable generator used by every stochastic operation.
pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// An undirected weighted network together with its set of pinned nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkWithInputs {
    pub n: usize,
    /// Symmetric, non-negative, zero diagonal.
    pub adjacency: Matrix,
    /// Sorted, distinct, 0-based. May be empty for a freshly generated graph.
    pub pinned: Vec<usize>,
    pub gamma_hint: Option<f64>,
}

impl NetworkWithInputs {
    /// Build from a 0-based weighted edge list. Duplicate edges accumulate.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)], pinned: &[usize]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidNetwork("network has no nodes".into()));
        }
        let mut adjacency = Matrix::zeros(n, n);
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidNetwork(format!(
                    "edge ({}, {}) out of range for N = {n}",
                    u + 1,
                    v + 1
                )));
            }
            if u == v {
                return Err(Error::InvalidNetwork(format!("self-loop on node {}", u + 1)));
            }
            adjacency[(u, v)] += w;
            adjacency[(v, u)] += w;
        }
        let net = Self {
            n,
            adjacency,
            pinned: Vec::new(),
            gamma_hint: None,
        };
        net.with_pins(pinned)
    }

    /// Replace the pin set. Pins are sorted and validated.
    pub fn with_pins(mut self, pins: &[usize]) -> Result<Self> {
        let set: BTreeSet<usize> = pins.iter().copied().collect();
        if set.len() != pins.len() {
            return Err(Error::InvalidNetwork("duplicate pinned node".into()));
        }
        if let Some(&bad) = set.iter().find(|&&p| p >= self.n) {
            return Err(Error::InvalidNetwork(format!(
                "pinned node {} out of range for N = {}",
                bad + 1,
                self.n
            )));
        }
        self.pinned = set.into_iter().collect();
        self.validate_graph()?;
        Ok(self)
    }

    pub fn s(&self) -> usize {
        self.pinned.len()
    }

    pub fn is_pinned(&self, i: usize) -> bool {
        self.pinned.binary_search(&i).is_ok()
    }

    /// Undirected edges `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                let w = self.adjacency[(u, v)];
                if w != 0.0 {
                    out.push((u, v, w));
                }
            }
        }
        out
    }

    /// Neighbors of `i` with their weights.
    pub fn edges_of(&self, i: usize) -> Vec<(usize, f64)> {
        (0..self.n)
            .filter_map(|j| {
                let w = self.adjacency[(i, j)];
                (j != i && w != 0.0).then_some((j, w))
            })
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Weighted degree of every node.
    pub fn degrees(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.adjacency.row(i).sum()).collect()
    }

    fn validate_graph(&self) -> Result<()> {
        ensure_square(&self.adjacency)?;
        if self.adjacency.nrows() != self.n {
            return Err(Error::InvalidNetwork("adjacency size does not match n".into()));
        }
        if self.adjacency.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite);
        }
        if self.adjacency.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidNetwork("negative edge weight".into()));
        }
        if (0..self.n).any(|i| self.adjacency[(i, i)] != 0.0) {
            return Err(Error::InvalidNetwork("nonzero diagonal (self-loop)".into()));
        }
        let dev = asymmetry(&self.adjacency);
        if dev > 1e-12 * max_abs(&self.adjacency).max(1.0) {
            return Err(Error::Asymmetric { deviation: dev });
        }
        Ok(())
    }

    /// Full validation including the requirement of at least one pin.
    pub fn validate(&self) -> Result<()> {
        self.validate_graph()?;
        if self.pinned.is_empty() {
            return Err(Error::InvalidNetwork("pin set is empty".into()));
        }
        if self.pinned.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidNetwork("pins must be sorted and distinct".into()));
        }
        if self.pinned.iter().any(|&p| p >= self.n) {
            return Err(Error::InvalidNetwork("pinned node out of range".into()));
        }
        Ok(())
    }

    /// Whether the graph is connected (ignoring weights).
    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for root in 0..self.n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut stack = vec![root];
            let mut comp = vec![root];
            while let Some(u) = stack.pop() {
                for v in 0..self.n {
                    if !seen[v] && self.adjacency[(u, v)] != 0.0 {
                        seen[v] = true;
                        stack.push(v);
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Induced subnetwork on `keep` (sorted), relabelled in that order.
    /// Pins outside `keep` are dropped.
    pub fn induced(&self, keep: &[usize]) -> Self {
        let n = keep.len();
        let adjacency = Matrix::from_fn(n, n, |i, j| self.adjacency[(keep[i], keep[j])]);
        let pinned = keep
            .iter()
            .enumerate()
            .filter(|(_, &old)| self.is_pinned(old))
            .map(|(new, _)| new)
            .collect();
        Self {
            n,
            adjacency,
            pinned,
            gamma_hint: self.gamma_hint,
        }
    }
}

/// The Laplacian `L = A - D` and diagonal 0/1 input matrix `R` of a network
/// with inputs. Sub-pairs produced by transformations reuse this type; for
/// those `L` is symmetric but need not have zero row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianPair {
    pub l: Matrix,
    pub r: Matrix,
}

impl LaplacianPair {
    /// Validate a general symmetric pair with `R` diagonal and 0/1.
    pub fn from_parts(l: Matrix, r: Matrix, tol: &Tolerance) -> Result<Self> {
        crate::numkernel::ensure_symmetric(&l, tol)?;
        ensure_square(&r)?;
        if l.nrows() != r.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "L is {}x{} but R is {}x{}",
                l.nrows(),
                l.ncols(),
                r.nrows(),
                r.ncols()
            )));
        }
        let n = r.nrows();
        for i in 0..n {
            for j in 0..n {
                let x = r[(i, j)];
                let ok = if i == j {
                    x.abs() <= tol.zero_abs || (x - 1.0).abs() <= tol.zero_abs
                } else {
                    x.abs() <= tol.zero_abs
                };
                if !ok {
                    return Err(Error::InvalidNetwork(
                        "input matrix must be diagonal with entries in {0, 1}".into(),
                    ));
                }
            }
        }
        let r = Matrix::from_fn(n, n, |i, j| if i == j && r[(i, i)] > 0.5 { 1.0 } else { 0.0 });
        Ok(Self { l, r })
    }

    pub fn n(&self) -> usize {
        self.l.nrows()
    }

    /// Indices with `R_ii = 1`, ascending.
    pub fn pinned(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.r[(i, i)] > 0.5).collect()
    }

    pub fn s(&self) -> usize {
        self.pinned().len()
    }
}

/// The `(N+1) x (N+1)` Laplacian of the network extended by its source node.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedLaplacian {
    pub ltilde: Matrix,
}

impl ExtendedLaplacian {
    /// Number of network nodes (excluding the source).
    pub fn n(&self) -> usize {
        self.ltilde.nrows() - 1
    }
}

pub fn build_pair(net: &NetworkWithInputs) -> Result<LaplacianPair> {
    net.validate()?;
    let n = net.n;
    let mut l = net.adjacency.clone();
    for i in 0..n {
        let d: f64 = net.adjacency.row(i).sum();
        l[(i, i)] = -d;
    }
    let mut r = Matrix::zeros(n, n);
    for &p in &net.pinned {
        r[(p, p)] = 1.0;
    }
    Ok(LaplacianPair { l, r })
}

pub fn build_extended(pair: &LaplacianPair) -> ExtendedLaplacian {
    let n = pair.n();
    let mut lt = Matrix::zeros(n + 1, n + 1);
    lt.view_mut((0, 0), (n, n)).copy_from(&(&pair.l - &pair.r));
    for i in 0..n {
        lt[(i, n)] = pair.r[(i, i)];
    }
    ExtendedLaplacian { ltilde: lt }
}

fn one_based(edges: &[(usize, usize)], w: f64) -> Vec<(usize, usize, f64)> {
    edges.iter().map(|&(u, v)| (u - 1, v - 1, w)).collect()
}

/// Five-node network: a hub (node 1, pinned) joined to the path 2-3-4-5.
pub fn fixture_fig2() -> NetworkWithInputs {
    let edges = one_based(&[(1, 2), (1, 3), (1, 4), (1, 5), (2, 3), (3, 4), (4, 5)], 1.0);
    NetworkWithInputs::from_edges(5, &edges, &[0]).expect("fixture is valid")
}

/// Ten-node weighted network with pins {1, 2, 6} and one pinned-node symmetry.
pub fn fixture_fig5() -> NetworkWithInputs {
    let mut edges = one_based(
        &[
            (1, 6),
            (1, 7),
            (1, 10),
            (2, 6),
            (2, 7),
            (2, 10),
            (3, 5),
            (3, 8),
            (3, 9),
            (4, 5),
            (4, 8),
            (4, 9),
        ],
        1.0,
    );
    edges.extend(one_based(&[(5, 6), (5, 9), (6, 10), (7, 8), (7, 10), (8, 9)], 2.0));
    NetworkWithInputs::from_edges(10, &edges, &[0, 1, 5]).expect("fixture is valid")
}

/// G(n, p): every unordered pair is an edge independently with probability `p`.
pub fn gen_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<NetworkWithInputs> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("Erdos-Renyi needs n >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = rng_from_seed(seed);
    let mut adjacency = Matrix::zeros(n, n);
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < p {
                adjacency[(u, v)] = 1.0;
                adjacency[(v, u)] = 1.0;
            }
        }
    }
    Ok(NetworkWithInputs {
        n,
        adjacency,
        pinned: Vec::new(),
        gamma_hint: None,
    })
}

/// Static scale-free model: node `i` (1-based) has fitness `i^(-1/(alpha-1))`;
/// edges are drawn between fitness-proportional endpoints until
/// `round(n * mean_degree / 2)` distinct edges exist. The result is
/// restricted to its giant component.
pub fn gen_static_scale_free(
    n: usize,
    mean_degree: f64,
    alpha: f64,
    seed: u64,
) -> Result<NetworkWithInputs> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("static model needs n >= 2, got {n}")));
    }
    if !(alpha > 2.0) {
        return Err(Error::InvalidParameter(format!("exponent alpha must exceed 2, got {alpha}")));
    }
    if !(mean_degree > 0.0 && mean_degree.is_finite()) {
        return Err(Error::InvalidParameter(format!("mean degree must be positive, got {mean_degree}")));
    }
    let target = (n as f64 * mean_degree / 2.0).round() as usize;
    let max_edges = n * (n - 1) / 2;
    if target > max_edges {
        return Err(Error::Generation(format!(
            "{target} edges requested but only {max_edges} pairs exist"
        )));
    }
    let expo = 1.0 / (alpha - 1.0);
    let mut cumulative = Vec::with_capacity(n);
    let mut acc = 0.0;
    for i in 1..=n {
        acc += (i as f64).powf(-expo);
        cumulative.push(acc);
    }
    let total = acc;
    let draw = |rng: &mut SeededRng| -> usize {
        let x = rng.random::<f64>() * total;
        cumulative.partition_point(|&c| c <= x).min(n - 1)
    };
    let mut rng = rng_from_seed(seed);
    let mut adjacency = Matrix::zeros(n, n);
    let mut edges = 0;
    let budget = 1000 * target.max(1) + 10_000;
    let mut draws = 0;
    while edges < target {
        if draws >= budget {
            return Err(Error::Generation(format!(
                "reached {edges} of {target} edges after {draws} draws"
            )));
        }
        draws += 1;
        let (u, v) = (draw(&mut rng), draw(&mut rng));
        if u == v || adjacency[(u, v)] != 0.0 {
            continue;
        }
        adjacency[(u, v)] = 1.0;
        adjacency[(v, u)] = 1.0;
        edges += 1;
    }
    let full = NetworkWithInputs {
        n,
        adjacency,
        pinned: Vec::new(),
        gamma_hint: None,
    };
    let giant = full
        .components()
        .into_iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
        .expect("n >= 2");
    Ok(full.induced(&giant))
}

/// Pin `s` nodes: every node of `forced` plus a uniform sample without
/// replacement from the remaining nodes.
pub fn pick_pins_forced(
    net: &NetworkWithInputs,
    s: usize,
    forced: &[usize],
    seed: u64,
) -> Result<NetworkWithInputs> {
    if s < 1 || s > net.n {
        return Err(Error::InvalidParameter(format!(
            "pin count {s} outside 1..={}",
            net.n
        )));
    }
    let forced: BTreeSet<usize> = forced.iter().copied().collect();
    if forced.len() > s {
        return Err(Error::InvalidParameter("more forced pins than pins".into()));
    }
    let pool: Vec<usize> = (0..net.n).filter(|i| !forced.contains(i)).collect();
    let mut rng = rng_from_seed(seed);
    let extra = sample(&mut rng, pool.len(), s - forced.len());
    let mut pins: Vec<usize> = forced.into_iter().collect();
    pins.extend(extra.iter().map(|k| pool[k]));
    net.clone().with_pins(&pins)
}

/// Pin `s` nodes chosen uniformly without replacement.
pub fn pick_pins(net: &NetworkWithInputs, s: usize, seed: u64) -> Result<NetworkWithInputs> {
    pick_pins_forced(net, s, &[], seed)
}

/// Parse an edge list: lines `u v [w]`, 1-based, `#` comments. The node count
/// is the largest index mentioned unless `n_hint` is larger.
pub fn parse_edge_list(text: &str, n_hint: Option<usize>) -> Result<NetworkWithInputs> {
    let mut edges = Vec::new();
    let mut max_node = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let err = |message: String| Error::Parse {
            line: lineno + 1,
            message,
        };
        if fields.len() < 2 || fields.len() > 3 {
            return Err(err(format!("expected `u v [w]`, got {} fields", fields.len())));
        }
        let node = |s: &str| -> Result<usize> {
            let v: usize = s
                .parse()
                .map_err(|_| err(format!("invalid node index `{s}`")))?;
            if v == 0 {
                return Err(err("node indices are 1-based".into()));
            }
            Ok(v)
        };
        let u = node(fields[0])?;
        let v = node(fields[1])?;
        let w = match fields.get(2) {
            Some(s) => s
                .parse::<f64>()
                .map_err(|_| err(format!("invalid weight `{s}`")))?,
            None => 1.0,
        };
        if !(w.is_finite() && w > 0.0) {
            return Err(err(format!("weight must be positive, got {w}")));
        }
        max_node = max_node.max(u).max(v);
        edges.push((u - 1, v - 1, w));
    }
    let n = max_node.max(n_hint.unwrap_or(0));
    if n == 0 {
        return Err(Error::InvalidNetwork("edge list is empty".into()));
    }
    // Repeated lines would silently create multi-edges.
    let mut seen = BTreeSet::new();
    for &(u, v, _) in &edges {
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(Error::InvalidNetwork(format!(
                "duplicate edge {}-{}",
                u.min(v) + 1,
                u.max(v) + 1
            )));
        }
    }
    NetworkWithInputs::from_edges(n, &edges, &[])
}

/// Render the edge list of `net` in the text format read by [`parse_edge_list`].
pub fn format_edge_list(net: &NetworkWithInputs) -> String {
    let mut out = String::new();
    for (u, v, w) in net.edges() {
        if w == 1.0 {
            out.push_str(&format!("{} {}\n", u + 1, v + 1));
        } else {
            out.push_str(&format!("{} {} {}\n", u + 1, v + 1, w));
        }
    }
    out
}

/// Parse a pin set given either as a JSON array (`[1, 2, 6]`) or a comma
/// list (`1,2,6`). Returns 0-based indices.
pub fn parse_pins(text: &str) -> Result<Vec<usize>> {
    let trimmed = text.trim();
    let raw: Vec<i64> = if trimmed.starts_with('[') {
        serde_json::from_str(trimmed).map_err(|e| Error::Parse {
            line: 1,
            message: format!("pin JSON: {e}"),
        })?
    } else if trimmed.is_empty() {
        Vec::new()
    } else {
        trimmed
            .split(',')
            .map(|s| {
                s.trim().parse::<i64>().map_err(|_| Error::Parse {
                    line: 1,
                    message: format!("invalid pin `{}`", s.trim()),
                })
            })
            .collect::<Result<_>>()?
    };
    raw.into_iter()
        .map(|p| {
            if p < 1 {
                Err(Error::InvalidNetwork(format!("pin {p} is not a 1-based node index")))
            } else {
                Ok(p as usize - 1)
            }
        })
        .collect()
}
