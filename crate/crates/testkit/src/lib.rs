//! Reference oracles and synthetic data for the qwk test suites.
//!
//! Everything here works on plain edge lists and nested `Vec`s and shares no
//! code with the library under test. The oracles take deliberately different
//! routes: linear solves instead of eigendecompositions, exhaustive
//! enumeration instead of greedy selection, dense matrix powers instead of
//! streamed matrix-vector products.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub type Edge = (usize, usize, f64);
pub type Dense = Vec<Vec<f64>>;

/// One oracle-versus-implementation comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub case: String,
    pub oracle: f64,
    pub implementation: f64,
    pub abs_dev: f64,
    pub rel_dev: f64,
}

impl OracleReport {
    pub fn new(case: impl Into<String>, oracle: f64, implementation: f64) -> Self {
        let abs_dev = (oracle - implementation).abs();
        let rel_dev = if oracle != 0.0 { abs_dev / oracle.abs() } else { abs_dev };
        OracleReport { case: case.into(), oracle, implementation, abs_dev, rel_dev }
    }

    /// Largest absolute deviation in a batch.
    pub fn worst(reports: &[OracleReport]) -> Option<&OracleReport> {
        reports.iter().max_by(|a, b| a.abs_dev.total_cmp(&b.abs_dev))
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: oracle={:.15e} impl={:.15e} abs={:.3e} rel={:.3e}",
            self.case, self.oracle, self.implementation, self.abs_dev, self.rel_dev
        )
    }
}

/// Dense symmetric weight matrix of an edge list.
pub fn adjacency(n: usize, edges: &[Edge]) -> Dense {
    let mut a = vec![vec![0.0; n]; n];
    for &(u, v, w) in edges {
        a[u][v] = w;
        a[v][u] = w;
    }
    a
}

fn connected(n: usize, edges: &[Edge]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &(a, b, _) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == u && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Solves `m x = b` by Gauss-Jordan elimination with partial pivoting.
pub fn solve(mut m: Dense, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        let p = m[col][col];
        for k in col..n {
            m[col][k] /= p;
        }
        b[col] /= p;
        for r in 0..n {
            if r != col && m[r][col] != 0.0 {
                let f = m[r][col];
                for k in col..n {
                    m[r][k] -= f * m[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some(b)
}

/// Commute times from effective resistances: for each pair, ground one end,
/// inject a unit current at the other and read off its potential.
pub fn oracle_commute_time(n: usize, edges: &[Edge]) -> Result<Dense, String> {
    if n < 2 || !connected(n, edges) {
        return Err(format!("graph on {n} vertices is not connected"));
    }
    let a = adjacency(n, edges);
    let volume: f64 = a.iter().flatten().sum();
    let mut c = vec![vec![0.0; n]; n];
    for ground in 0..n {
        let keep: Vec<usize> = (0..n).filter(|&x| x != ground).collect();
        let lg: Dense = keep
            .iter()
            .map(|&i| {
                keep.iter()
                    .map(|&j| if i == j { a[i].iter().sum() } else { -a[i][j] })
                    .collect()
            })
            .collect();
        for (k, &u) in keep.iter().enumerate() {
            if u < ground {
                continue;
            }
            let mut e = vec![0.0; keep.len()];
            e[k] = 1.0;
            let x = solve(lg.clone(), e).ok_or("singular grounded Laplacian")?;
            c[u][ground] = volume * x[k];
            c[ground][u] = c[u][ground];
        }
    }
    Ok(c)
}

/// Monte Carlo estimate of the commute time between `s` and `t`: mean number
/// of weighted random-walk steps to go from `s` to `t` and back.
pub fn monte_carlo_commute(n: usize, edges: &[Edge], s: usize, t: usize, trips: usize, seed: u64) -> f64 {
    let a = adjacency(n, edges);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = |u: usize, rng: &mut ChaCha8Rng| {
        let total: f64 = a[u].iter().sum();
        let mut r = rng.random::<f64>() * total;
        for (v, &w) in a[u].iter().enumerate() {
            if w > 0.0 {
                if r < w {
                    return v;
                }
                r -= w;
            }
        }
        a[u].iter().rposition(|&w| w > 0.0).expect("vertex has a neighbor")
    };
    let mut steps = 0u64;
    for _ in 0..trips {
        for (from, to) in [(s, t), (t, s)] {
            let mut u = from;
            while u != to {
                u = step(u, &mut rng);
                steps += 1;
            }
        }
    }
    steps as f64 / trips as f64
}

/// Minimum total weight over every spanning tree, found by enumerating all
/// `n - 1` edge subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct MstOracle {
    pub min_weight: f64,
    /// Every spanning tree achieving the minimum, as sorted `(u, v)` pairs
    /// with `u < v`.
    pub optimal: Vec<Vec<(usize, usize)>>,
}

pub fn oracle_mst(n: usize, edges: &[Edge]) -> Option<MstOracle> {
    assert!(n <= 7, "enumeration oracle is limited to 7 vertices");
    let m = edges.len();
    if n == 1 {
        return Some(MstOracle { min_weight: 0.0, optimal: vec![vec![]] });
    }
    let mut best: Option<MstOracle> = None;
    let mut pick = Vec::with_capacity(n - 1);
    fn rec(
        start: usize,
        n: usize,
        edges: &[Edge],
        pick: &mut Vec<usize>,
        best: &mut Option<MstOracle>,
    ) {
        if pick.len() == n - 1 {
            let chosen: Vec<Edge> = pick.iter().map(|&i| edges[i]).collect();
            if !connected(n, &chosen) {
                return;
            }
            let w: f64 = chosen.iter().map(|e| e.2).sum();
            let mut tree: Vec<(usize, usize)> = chosen.iter().map(|&(u, v, _)| (u.min(v), u.max(v))).collect();
            tree.sort_unstable();
            match best {
                Some(b) if (w - b.min_weight).abs() <= 1e-12 * b.min_weight.abs().max(1.0) => b.optimal.push(tree),
                Some(b) if w > b.min_weight => {}
                _ => *best = Some(MstOracle { min_weight: w, optimal: vec![tree] }),
            }
            return;
        }
        for i in start..edges.len() {
            pick.push(i);
            rec(i + 1, n, edges, pick, best);
            pick.pop();
        }
    }
    if m + 1 < n {
        return None;
    }
    rec(0, n, edges, &mut pick, &mut best);
    best
}

fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut c = vec![vec![0.0; m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l] != 0.0 {
                for j in 0..m {
                    c[i][j] += a[i][l] * b[l][j];
                }
            }
        }
    }
    c
}

/// Arcs, Grover operator, weighted line-graph operator and initial state of a
/// weighted graph, assembled from scratch as dense matrices.
#[derive(Debug, Clone)]
pub struct DenseWalk {
    pub arcs: Vec<(usize, usize)>,
    /// Row is the destination arc.
    pub u: Dense,
    pub tw: Dense,
    pub psi0: Vec<f64>,
}

pub fn dense_walk(n: usize, edges: &[Edge]) -> DenseWalk {
    let a = adjacency(n, edges);
    let mut arcs: Vec<(usize, usize)> = edges.iter().flat_map(|&(u, v, _)| [(u, v), (v, u)]).collect();
    arcs.sort_unstable();
    let deg: Vec<usize> = (0..n).map(|v| a[v].iter().filter(|&&w| w > 0.0).count()).collect();
    let m = arcs.len();
    let mut u = vec![vec![0.0; m]; m];
    let mut tw = vec![vec![0.0; m]; m];
    for (i, &(p, q)) in arcs.iter().enumerate() {
        for (j, &(r, s)) in arcs.iter().enumerate() {
            if q == r {
                // i = (p, q) feeds j = (q, s).
                u[j][i] = 2.0 / deg[q] as f64 - if p == s { 1.0 } else { 0.0 };
                tw[i][j] = a[p][q] + a[r][s];
            }
        }
    }
    let mass: Vec<f64> = (0..m)
        .map(|i| (0..m).map(|j| tw[i][j] + tw[j][i]).sum())
        .collect();
    let total: f64 = mass.iter().sum();
    let psi0 = if total > 0.0 {
        mass.iter().map(|x| (x / total).sqrt()).collect()
    } else {
        vec![1.0 / (m as f64).sqrt(); m]
    };
    DenseWalk { arcs, u, tw, psi0 }
}

/// Diagonal of the time-averaged density matrix
/// `(1 / (T + 1)) sum_t U^t |psi0><psi0| (U^t)^T`, built from explicit
/// matrix powers and outer products. Keys are arcs.
pub fn oracle_density_diagonal(n: usize, edges: &[Edge], horizon: usize) -> BTreeMap<(usize, usize), f64> {
    let w = dense_walk(n, edges);
    let m = w.arcs.len();
    let outer: Dense = (0..m).map(|i| (0..m).map(|j| w.psi0[i] * w.psi0[j]).collect()).collect();
    let mut power: Dense = (0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut rho = vec![vec![0.0; m]; m];
    for t in 0..=horizon {
        if t > 0 {
            power = matmul(&w.u, &power);
        }
        let transposed: Dense = (0..m).map(|i| (0..m).map(|j| power[j][i]).collect()).collect();
        let term = matmul(&matmul(&power, &outer), &transposed);
        for i in 0..m {
            for j in 0..m {
                rho[i][j] += term[i][j];
            }
        }
    }
    let scale = 1.0 / (horizon as f64 + 1.0);
    w.arcs.iter().enumerate().map(|(i, &a)| (a, rho[i][i] * scale)).collect()
}

/// Tree with the given Pruefer sequence on `seq.len() + 2` vertices.
pub fn pruefer_tree(seq: &[usize]) -> Vec<(usize, usize)> {
    let n = seq.len() + 2;
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut leaves: BTreeSet<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = *leaves.iter().next().expect("a leaf exists");
        leaves.remove(&leaf);
        edges.push((leaf.min(s), leaf.max(s)));
        degree[s] -= 1;
        if degree[s] == 1 {
            leaves.insert(s);
        }
    }
    let rest: Vec<usize> = leaves.into_iter().collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Every labeled tree on `n >= 2` vertices (`n^(n-2)` of them).
pub fn all_labeled_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
    assert!(n >= 2);
    let len = n - 2;
    let count = n.pow(len as u32);
    (0..count)
        .map(|mut code| {
            let seq: Vec<usize> = (0..len)
                .map(|_| {
                    let d = code % n;
                    code /= n;
                    d
                })
                .collect();
            pruefer_tree(&seq)
        })
        .collect()
}

/// Seeded generator for random test graphs.
pub struct GraphGen {
    rng: ChaCha8Rng,
}

impl GraphGen {
    pub fn new(seed: u64) -> Self {
        GraphGen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn weight(&mut self) -> f64 {
        self.rng.random_range(0.1..5.0)
    }

    /// Uniformly random labeled tree via a random Pruefer sequence.
    pub fn tree(&mut self, n: usize) -> Vec<Edge> {
        if n < 2 {
            return Vec::new();
        }
        let seq: Vec<usize> = (0..n - 2).map(|_| self.rng.random_range(0..n)).collect();
        pruefer_tree(&seq).into_iter().map(|(u, v)| (u, v, self.weight())).collect()
    }

    /// Connected graph: a random tree plus each remaining pair with
    /// probability `p`.
    pub fn connected_graph(&mut self, n: usize, p: f64) -> Vec<Edge> {
        let mut edges = self.tree(n);
        let present: BTreeSet<(usize, usize)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
        for u in 0..n {
            for v in u + 1..n {
                if !present.contains(&(u, v)) && self.rng.random_bool(p) {
                    let w = self.weight();
                    edges.push((u, v, w));
                }
            }
        }
        edges
    }

    /// Complete graph with random weights.
    pub fn complete_graph(&mut self, n: usize) -> Vec<Edge> {
        let mut edges = Vec::with_capacity(n * (n - 1) / 2);
        for u in 0..n {
            for v in u + 1..n {
                let w = self.weight();
                edges.push((u, v, w));
            }
        }
        edges
    }

    /// Vertex labels drawn from an alphabet of `k` symbols.
    pub fn labels(&mut self, n: usize, k: usize) -> Vec<String> {
        (0..n).map(|_| format!("{}", self.rng.random_range(0..k))).collect()
    }

    /// Uniform permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(&mut self.rng);
        p
    }
}

/// Closing prices from a factor model whose block structure changes at a
/// given day.
#[derive(Debug, Clone)]
pub struct SyntheticPrices {
    pub tickers: Vec<String>,
    /// ISO dates, one per row.
    pub dates: Vec<String>,
    /// `closes[day][ticker]`.
    pub closes: Vec<Vec<f64>>,
    pub shift_day: usize,
}

/// Parameters of [`regime_shift_prices`].
#[derive(Debug, Clone)]
pub struct RegimeShift {
    pub tickers: usize,
    pub days: usize,
    pub shift_day: usize,
    /// Sector count before and after the shift.
    pub blocks: (usize, usize),
    /// Loading on the sector factor before and after the shift.
    pub loading: (f64, f64),
    /// Daily volatility of the sector factors and the idiosyncratic noise.
    pub factor_vol: f64,
    pub noise_vol: f64,
    pub seed: u64,
}

impl Default for RegimeShift {
    fn default() -> Self {
        RegimeShift {
            tickers: 50,
            days: 600,
            shift_day: 300,
            blocks: (2, 10),
            loading: (0.9, 0.9),
            factor_vol: 0.02,
            noise_vol: 0.01,
            seed: 7,
        }
    }
}

/// Daily log-returns `loading * f_{block(i)} + noise` with the sector
/// assignment (and loading) switching at `shift_day`. Tickers are shuffled
/// between sectors independently in each regime.
pub fn regime_shift_prices(cfg: &RegimeShift) -> SyntheticPrices {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let factor = Normal::new(0.0, cfg.factor_vol).expect("valid volatility");
    let noise = Normal::new(0.0, cfg.noise_vol).expect("valid volatility");
    let assign = |blocks: usize, rng: &mut ChaCha8Rng| {
        let mut a: Vec<usize> = (0..cfg.tickers).map(|i| i % blocks).collect();
        a.shuffle(rng);
        a
    };
    let before = assign(cfg.blocks.0, &mut rng);
    let after = assign(cfg.blocks.1, &mut rng);
    let mut closes = Vec::with_capacity(cfg.days);
    let mut price = vec![100.0; cfg.tickers];
    closes.push(price.clone());
    for day in 1..cfg.days {
        let (blocks, assignment, loading) = if day < cfg.shift_day {
            (cfg.blocks.0, &before, cfg.loading.0)
        } else {
            (cfg.blocks.1, &after, cfg.loading.1)
        };
        let f: Vec<f64> = (0..blocks).map(|_| factor.sample(&mut rng)).collect();
        for (i, p) in price.iter_mut().enumerate() {
            let r = loading * f[assignment[i]] + noise.sample(&mut rng);
            *p *= r.exp();
        }
        closes.push(price.clone());
    }
    SyntheticPrices {
        tickers: (0..cfg.tickers).map(|i| format!("S{i:03}")).collect(),
        dates: (0..cfg.days).map(chrono_free_date).collect(),
        closes,
        shift_day: cfg.shift_day,
    }
}

/// `day` days after 2000-01-01 as an ISO date, using the proleptic
/// Gregorian calendar.
pub fn chrono_free_date(day: usize) -> String {
    // Civil-from-days conversion; 2000-01-01 is day 10957 after 1970-01-01.
    let z = day as i64 + 10957 + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = yoe + era * 400 + i64::from(m <= 2);
    format!("{y:04}-{m:02}-{d:02}")
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}
