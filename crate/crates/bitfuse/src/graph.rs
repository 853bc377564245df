//! Switching communication graphs.
//!
//! The network's link layer is a finite set of undirected weighted
//! topologies; at each step one of them is active. Two activation models
//! are provided:
//!
//! - [`SwitchingGraphProcess`]: a homogeneous Markov chain over the
//!   topology set (the primary model);
//! - [`EdgeOnOffProcess`]: every union edge flips on/off through its own
//!   independent two-state chain. Equivalent in law to a single chain on
//!   `2^|E|` topologies without enumerating them; used by the event-rate
//!   study.
//!
//! Edges are unordered pairs; adjacency symmetry is enforced at
//! construction. Self-loops are rejected (zero diagonal).

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-12;
const STATIONARY_RESIDUAL_TOL: f64 = 1e-10;

/// An undirected edge by 0-based endpoints, normalized so `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey {
    a: usize,
    b: usize,
}

impl EdgeKey {
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(Error::Domain(format!(
                "self-loop ({i}, {j}) is not an edge"
            )));
        }
        Ok(EdgeKey {
            a: i.min(j),
            b: i.max(j),
        })
    }

    pub fn endpoints(&self) -> (usize, usize) {
        (self.a, self.b)
    }
}

/// A live edge of the step's active topology.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiveEdge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// The finite set of switching topologies over a common vertex set.
#[derive(Debug, Clone)]
pub struct TopologySet {
    vertex_count: usize,
    adjacencies: Vec<DMatrix<f64>>,
    /// Per topology, its edges as (i, j, weight) with i < j.
    edge_lists: Vec<Vec<LiveEdge>>,
}

impl TopologySet {
    /// Validates symmetry, nonnegativity and zero diagonal of every
    /// adjacency matrix; errors name the offending topology index.
    pub fn new(vertex_count: usize, adjacencies: Vec<DMatrix<f64>>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidConfig("vertex_count must be positive".into()));
        }
        if adjacencies.is_empty() {
            return Err(Error::InvalidConfig(
                "topology set needs at least one topology".into(),
            ));
        }
        let n = vertex_count;
        for (u, a) in adjacencies.iter().enumerate() {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::InvalidTopology {
                    index: u,
                    reason: format!(
                        "expected {n}x{n} adjacency, got {}x{}",
                        a.nrows(),
                        a.ncols()
                    ),
                });
            }
            for i in 0..n {
                if a[(i, i)] != 0.0 {
                    return Err(Error::InvalidTopology {
                        index: u,
                        reason: format!(
                            "nonzero diagonal at vertex {i} (self-loops are forbidden)"
                        ),
                    });
                }
                for j in 0..n {
                    let w = a[(i, j)];
                    if w < 0.0 || !w.is_finite() {
                        return Err(Error::InvalidTopology {
                            index: u,
                            reason: format!("negative or non-finite weight {w} at ({i}, {j})"),
                        });
                    }
                    if a[(i, j)] != a[(j, i)] {
                        return Err(Error::InvalidTopology {
                            index: u,
                            reason: format!(
                                "asymmetric weights at ({i}, {j}): {} vs {}",
                                a[(i, j)],
                                a[(j, i)]
                            ),
                        });
                    }
                }
            }
        }
        let edge_lists = adjacencies
            .iter()
            .map(|a| {
                let mut edges = Vec::new();
                for i in 0..n {
                    for j in (i + 1)..n {
                        if a[(i, j)] > 0.0 {
                            edges.push(LiveEdge {
                                i,
                                j,
                                weight: a[(i, j)],
                            });
                        }
                    }
                }
                edges
            })
            .collect();
        Ok(TopologySet {
            vertex_count,
            adjacencies,
            edge_lists,
        })
    }

    /// Build from per-topology edge lists with 1-based vertex ids, the
    /// config-file convention.
    pub fn from_edge_lists(
        vertex_count: usize,
        topologies: &[Vec<(usize, usize, f64)>],
    ) -> Result<Self> {
        let mut adjacencies = Vec::with_capacity(topologies.len());
        for (u, edges) in topologies.iter().enumerate() {
            let mut a = DMatrix::zeros(vertex_count, vertex_count);
            for &(i, j, w) in edges {
                if i == 0 || j == 0 || i > vertex_count || j > vertex_count {
                    return Err(Error::InvalidTopology {
                        index: u,
                        reason: format!(
                            "vertex id out of range in edge ({i}, {j}); ids are 1-based"
                        ),
                    });
                }
                if i == j {
                    return Err(Error::InvalidTopology {
                        index: u,
                        reason: format!("self-loop ({i}, {j})"),
                    });
                }
                a[(i - 1, j - 1)] = w;
                a[(j - 1, i - 1)] = w;
            }
            adjacencies.push(a);
        }
        TopologySet::new(vertex_count, adjacencies)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn topology_count(&self) -> usize {
        self.adjacencies.len()
    }

    pub fn adjacency(&self, u: usize) -> Result<&DMatrix<f64>> {
        self.adjacencies
            .get(u)
            .ok_or_else(|| Error::Domain(format!("topology index {u} out of range")))
    }

    pub fn edges_of(&self, u: usize) -> Result<&[LiveEdge]> {
        self.edge_lists
            .get(u)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::Domain(format!("topology index {u} out of range")))
    }

    /// Union adjacency `A = sum_u A^(u)`.
    pub fn union_adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.vertex_count, self.vertex_count);
        for m in &self.adjacencies {
            a += m;
        }
        a
    }

    /// Edges of the union graph, sorted.
    pub fn union_edges(&self) -> Vec<EdgeKey> {
        let a = self.union_adjacency();
        let mut edges = Vec::new();
        for i in 0..self.vertex_count {
            for j in (i + 1)..self.vertex_count {
                if a[(i, j)] > 0.0 {
                    edges.push(EdgeKey { a: i, b: j });
                }
            }
        }
        edges
    }

    /// Union-graph neighbour set of vertex `i`.
    pub fn union_neighbors(&self, i: usize) -> Vec<usize> {
        let a = self.union_adjacency();
        (0..self.vertex_count)
            .filter(|&j| j != i && a[(i, j)] > 0.0)
            .collect()
    }

    /// Indices of the topologies whose edge set contains `(i, j)`.
    pub fn edge_memberships(&self, edge: EdgeKey) -> Vec<usize> {
        self.adjacencies
            .iter()
            .enumerate()
            .filter(|(_, a)| a[(edge.a, edge.b)] > 0.0)
            .map(|(u, _)| u)
            .collect()
    }

    /// Whether the union graph is connected (single BFS component).
    pub fn is_union_connected(&self) -> bool {
        let a = self.union_adjacency();
        let n = self.vertex_count;
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for w in 0..n {
                if !seen[w] && a[(v, w)] > 0.0 {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }

    /// Laplacian `L^(u) = D^(u) - A^(u)`.
    pub fn laplacian(&self, u: usize) -> Result<DMatrix<f64>> {
        let a = self.adjacency(u)?;
        let n = self.vertex_count;
        let mut l = -a.clone();
        for i in 0..n {
            l[(i, i)] = a.row(i).sum();
        }
        Ok(l)
    }

    /// Stationary-weighted average adjacency `sum_u pi_u A^(u)`.
    pub fn mean_adjacency(&self, pi: &DVector<f64>) -> Result<DMatrix<f64>> {
        if pi.len() != self.topology_count() {
            return Err(Error::Dimension(format!(
                "weight vector has length {}, topology set has {}",
                pi.len(),
                self.topology_count()
            )));
        }
        let mut a = DMatrix::zeros(self.vertex_count, self.vertex_count);
        for (u, adj) in self.adjacencies.iter().enumerate() {
            a += adj * pi[u];
        }
        Ok(a)
    }
}

/// Whether the union of a topology set is connected.
pub fn validate_union_connected(t: &TopologySet) -> bool {
    t.is_union_connected()
}

/// Homogeneous Markov chain over topology indices.
#[derive(Debug, Clone)]
pub struct MarkovChain {
    transition: DMatrix<f64>,
    initial: DVector<f64>,
}

impl MarkovChain {
    pub fn new(transition: DMatrix<f64>, initial: DVector<f64>) -> Result<Self> {
        let m = transition.nrows();
        if m == 0 || transition.ncols() != m {
            return Err(Error::InvalidChain(format!(
                "transition matrix must be square and nonempty, got {}x{}",
                transition.nrows(),
                transition.ncols()
            )));
        }
        for i in 0..m {
            let mut row_sum = 0.0;
            for j in 0..m {
                let p = transition[(i, j)];
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidChain(format!(
                        "entry ({i}, {j}) = {p} outside [0, 1]"
                    )));
                }
                row_sum += p;
            }
            if (row_sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidChain(format!(
                    "row {i} sums to {row_sum}, not 1"
                )));
            }
        }
        if initial.len() != m {
            return Err(Error::InvalidChain(format!(
                "initial distribution has length {}, expected {m}",
                initial.len()
            )));
        }
        let mut total = 0.0;
        for i in 0..m {
            let p = initial[i];
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidChain(format!(
                    "initial[{i}] = {p} outside [0, 1]"
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidChain(format!(
                "initial distribution sums to {total}, not 1"
            )));
        }
        Ok(MarkovChain {
            transition,
            initial,
        })
    }

    /// Convenience constructor for row-major nested vectors.
    pub fn from_rows(rows: &[Vec<f64>], initial: &[f64]) -> Result<Self> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidChain("transition rows must be square".into()));
        }
        let transition = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
        MarkovChain::new(transition, DVector::from_column_slice(initial))
    }

    pub fn state_count(&self) -> usize {
        self.transition.nrows()
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    pub fn initial(&self) -> &DVector<f64> {
        &self.initial
    }

    fn support_edges(&self) -> Vec<(usize, usize)> {
        let m = self.state_count();
        let mut edges = Vec::new();
        for i in 0..m {
            for j in 0..m {
                if self.transition[(i, j)] > 0.0 {
                    edges.push((i, j));
                }
            }
        }
        edges
    }

    fn is_irreducible(&self) -> bool {
        let m = self.state_count();
        let edges = self.support_edges();
        let reachable = |forward: bool| {
            let mut seen = vec![false; m];
            seen[0] = true;
            let mut stack = vec![0usize];
            while let Some(v) = stack.pop() {
                for &(a, b) in &edges {
                    let (from, to) = if forward { (a, b) } else { (b, a) };
                    if from == v && !seen[to] {
                        seen[to] = true;
                        stack.push(to);
                    }
                }
            }
            seen.iter().all(|&s| s)
        };
        reachable(true) && reachable(false)
    }

    /// Period of an irreducible chain via BFS level differences;
    /// aperiodic iff the gcd over support edges of `level(u)+1-level(v)`
    /// is one.
    fn is_aperiodic(&self) -> bool {
        let m = self.state_count();
        let mut level = vec![usize::MAX; m];
        level[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for j in 0..m {
                if self.transition[(v, j)] > 0.0 && level[j] == usize::MAX {
                    level[j] = level[v] + 1;
                    queue.push_back(j);
                }
            }
        }
        let mut g: i64 = 0;
        for (u, v) in self.support_edges() {
            let d = level[u] as i64 + 1 - level[v] as i64;
            g = gcd(g, d.abs());
        }
        g == 1
    }

    /// Stationary distribution `pi` with `pi P = pi`, `sum pi = 1`.
    ///
    /// Solved by replacing one equation of `(P^T - I) pi = 0` with the
    /// normalization row; falls back to power iteration if the direct
    /// solve fails. Ergodicity is checked first so a caller cannot silently
    /// get a non-unique limit.
    pub fn stationary_distribution(&self) -> Result<DVector<f64>> {
        let m = self.state_count();
        if !self.is_irreducible() {
            return Err(Error::NotErgodic("transition support is reducible".into()));
        }
        if !self.is_aperiodic() {
            return Err(Error::NotErgodic("chain is periodic".into()));
        }
        if m == 1 {
            return Ok(DVector::from_element(1, 1.0));
        }

        let mut a = self.transition.transpose() - DMatrix::identity(m, m);
        for j in 0..m {
            a[(m - 1, j)] = 1.0;
        }
        let mut b = DVector::zeros(m);
        b[m - 1] = 1.0;

        let pi = match a.lu().solve(&b) {
            Some(x) if x.iter().all(|v| v.is_finite()) => x,
            _ => self.stationary_by_power_iteration()?,
        };
        let pi = self.normalize_checked(pi)?;
        let residual = (self.transition.transpose() * &pi - &pi).abs().max();
        if residual > STATIONARY_RESIDUAL_TOL {
            // Direct solve hit poor conditioning; refine by iteration.
            let pi = self.normalize_checked(self.stationary_by_power_iteration()?)?;
            let residual = (self.transition.transpose() * &pi - &pi).abs().max();
            if residual > STATIONARY_RESIDUAL_TOL {
                return Err(Error::Numeric(format!(
                    "stationary solve residual {residual} exceeds {STATIONARY_RESIDUAL_TOL}"
                )));
            }
            return Ok(pi);
        }
        Ok(pi)
    }

    fn stationary_by_power_iteration(&self) -> Result<DVector<f64>> {
        let m = self.state_count();
        let mut x = DVector::from_element(m, 1.0 / m as f64);
        for _ in 0..1_000_000 {
            let next = self.transition.transpose() * &x;
            let diff = (&next - &x).abs().max();
            x = next;
            if diff < 1e-15 {
                return Ok(x);
            }
        }
        Err(Error::Numeric(
            "power iteration did not converge to a stationary vector".into(),
        ))
    }

    fn normalize_checked(&self, mut pi: DVector<f64>) -> Result<DVector<f64>> {
        let total: f64 = pi.iter().sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::Numeric(format!(
                "stationary solve produced mass {total}"
            )));
        }
        pi /= total;
        if pi.iter().any(|&p| p < -1e-12) {
            return Err(Error::Numeric(
                "stationary solve produced negative probabilities".into(),
            ));
        }
        for p in pi.iter_mut() {
            *p = p.max(0.0);
        }
        Ok(pi)
    }

    /// One transition from `state`, sampled by inverse CDF over the row.
    fn sample_transition<R: Rng + ?Sized>(&self, state: usize, rng: &mut R) -> usize {
        sample_index(self.transition.row(state).iter().copied(), rng)
    }

    /// Draw a state from the initial distribution.
    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(self.initial.iter().copied(), rng)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn sample_index<R: Rng + ?Sized>(probs: impl Iterator<Item = f64>, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (idx, p) in probs.enumerate() {
        acc += p;
        last = idx;
        if u < acc {
            return idx;
        }
    }
    last
}

/// A topology set driven by a Markov chain over its indices.
#[derive(Debug, Clone)]
pub struct SwitchingGraphProcess {
    topologies: TopologySet,
    chain: MarkovChain,
    current_state: usize,
}

impl SwitchingGraphProcess {
    pub fn new(topologies: TopologySet, chain: MarkovChain) -> Result<Self> {
        if chain.state_count() != topologies.topology_count() {
            return Err(Error::InvalidConfig(format!(
                "chain has {} states but topology set has {}",
                chain.state_count(),
                topologies.topology_count()
            )));
        }
        Ok(SwitchingGraphProcess {
            topologies,
            chain,
            current_state: 0,
        })
    }

    pub fn topologies(&self) -> &TopologySet {
        &self.topologies
    }

    pub fn chain(&self) -> &MarkovChain {
        &self.chain
    }

    pub fn current_state(&self) -> usize {
        self.current_state
    }

    /// Redraw the state from the chain's initial distribution (time 1).
    pub fn reset_from_initial<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        self.current_state = self.chain.sample_initial(rng);
        self.current_state
    }

    /// Advance one Markov transition; returns the new topology index.
    pub fn sample_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        self.current_state = self.chain.sample_transition(self.current_state, rng);
        self.current_state
    }

    /// `q_{ij,k}` for `k = 1..=horizon`: probability that edge `(i, j)` is
    /// live at step `k`, from the exact distribution recursion
    /// `p_{., k+1} = P^T p_{., k}` started at the initial distribution.
    pub fn edge_probability_series(&self, i: usize, j: usize, horizon: usize) -> Result<Vec<f64>> {
        let edge = EdgeKey::new(i, j)?;
        let members = self.topologies.edge_memberships(edge);
        if members.is_empty() {
            return Err(Error::Domain(format!(
                "edge ({i}, {j}) is not in the union edge set"
            )));
        }
        let mut p = self.chain.initial.clone();
        let mut series = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            series.push(members.iter().map(|&u| p[u]).sum());
            p = self.chain.transition.transpose() * &p;
        }
        Ok(series)
    }

    /// Stationary probability that edge `(i, j)` is live:
    /// `sum_{u: (i,j) in E^(u)} pi_u`.
    pub fn stationary_edge_probability(&self, i: usize, j: usize) -> Result<f64> {
        let edge = EdgeKey::new(i, j)?;
        let members = self.topologies.edge_memberships(edge);
        if members.is_empty() {
            return Err(Error::Domain(format!(
                "edge ({i}, {j}) is not in the union edge set"
            )));
        }
        let pi = self.chain.stationary_distribution()?;
        Ok(members.iter().map(|&u| pi[u]).sum())
    }
}

/// Per-edge independent on/off chains over a fixed union edge set.
#[derive(Debug, Clone)]
pub struct EdgeOnOffProcess {
    vertex_count: usize,
    edges: Vec<EdgeKey>,
    weight: f64,
    initial_on: f64,
    stay_on: f64,
    stay_off: f64,
    states: Vec<bool>,
}

impl EdgeOnOffProcess {
    /// `initial_on` is the time-1 on-probability; `stay_on`/`stay_off`
    /// are the self-transition probabilities of each edge's chain.
    pub fn new(
        vertex_count: usize,
        mut edges: Vec<EdgeKey>,
        weight: f64,
        initial_on: f64,
        stay_on: f64,
        stay_off: f64,
    ) -> Result<Self> {
        for p in [initial_on, stay_on, stay_off] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!(
                    "edge chain probability {p} outside [0, 1]"
                )));
            }
        }
        if weight <= 0.0 {
            return Err(Error::InvalidConfig("edge weight must be positive".into()));
        }
        // Canonical order: live-edge lists stay sorted for the step loop.
        edges.sort_unstable();
        edges.dedup();
        let states = vec![false; edges.len()];
        Ok(EdgeOnOffProcess {
            vertex_count,
            edges,
            weight,
            initial_on,
            stay_on,
            stay_off,
            states,
        })
    }

    /// Fully connected union graph on `n` vertices, the event-rate layout.
    pub fn complete(
        n: usize,
        weight: f64,
        initial_on: f64,
        stay_on: f64,
        stay_off: f64,
    ) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push(EdgeKey { a: i, b: j });
            }
        }
        EdgeOnOffProcess::new(n, edges, weight, initial_on, stay_on, stay_off)
    }

    pub fn reset_from_initial<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for s in &mut self.states {
            *s = rng.random::<f64>() < self.initial_on;
        }
    }

    pub fn sample_step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for s in &mut self.states {
            let stay = if *s { self.stay_on } else { self.stay_off };
            let u: f64 = rng.random();
            *s = if u < stay { *s } else { !*s };
        }
    }

    fn live_edges_into(&self, out: &mut Vec<LiveEdge>) {
        out.clear();
        for (e, &on) in self.edges.iter().zip(&self.states) {
            if on {
                out.push(LiveEdge {
                    i: e.a,
                    j: e.b,
                    weight: self.weight,
                });
            }
        }
    }

    /// On-probability series from the scalar two-state recursion.
    pub fn edge_probability_series(&self, horizon: usize) -> Vec<f64> {
        let mut q = self.initial_on;
        let mut series = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            series.push(q);
            q = q * self.stay_on + (1.0 - q) * (1.0 - self.stay_off);
        }
        series
    }

    /// Long-run on-probability of each edge chain.
    pub fn stationary_edge_probability(&self) -> f64 {
        let p01 = 1.0 - self.stay_off;
        let p10 = 1.0 - self.stay_on;
        p01 / (p01 + p10)
    }
}

/// Either activation model, as consumed by the estimator.
#[derive(Debug, Clone)]
pub enum TopologyModel {
    Switching(SwitchingGraphProcess),
    IndependentEdges(EdgeOnOffProcess),
}

impl TopologyModel {
    pub fn vertex_count(&self) -> usize {
        match self {
            TopologyModel::Switching(p) => p.topologies.vertex_count(),
            TopologyModel::IndependentEdges(p) => p.vertex_count,
        }
    }

    /// Union edge set, sorted.
    pub fn union_edges(&self) -> Vec<EdgeKey> {
        match self {
            TopologyModel::Switching(p) => p.topologies.union_edges(),
            TopologyModel::IndependentEdges(p) => {
                let mut e = p.edges.clone();
                e.sort();
                e
            }
        }
    }

    pub fn union_neighbors(&self, i: usize) -> Vec<usize> {
        match self {
            TopologyModel::Switching(p) => p.topologies.union_neighbors(i),
            TopologyModel::IndependentEdges(p) => {
                let mut out: Vec<usize> = p
                    .edges
                    .iter()
                    .filter_map(|e| {
                        if e.a == i {
                            Some(e.b)
                        } else if e.b == i {
                            Some(e.a)
                        } else {
                            None
                        }
                    })
                    .collect();
                out.sort_unstable();
                out
            }
        }
    }

    pub fn is_union_connected(&self) -> bool {
        match self {
            TopologyModel::Switching(p) => p.topologies.is_union_connected(),
            TopologyModel::IndependentEdges(p) => {
                let n = p.vertex_count;
                if n == 0 {
                    return false;
                }
                let mut adj = vec![vec![]; n];
                for e in &p.edges {
                    adj[e.a].push(e.b);
                    adj[e.b].push(e.a);
                }
                let mut seen = vec![false; n];
                let mut stack = vec![0usize];
                seen[0] = true;
                let mut count = 1;
                while let Some(v) = stack.pop() {
                    for &w in &adj[v] {
                        if !seen[w] {
                            seen[w] = true;
                            count += 1;
                            stack.push(w);
                        }
                    }
                }
                count == n
            }
        }
    }

    /// Draw the step-`k` topology (`k` is 1-based; step 1 samples the
    /// initial distribution, later steps advance by one transition) and
    /// write its live edges into `out`.
    pub fn advance<R: Rng + ?Sized>(&mut self, k: usize, rng: &mut R, out: &mut Vec<LiveEdge>) {
        match self {
            TopologyModel::Switching(p) => {
                let u = if k <= 1 {
                    p.reset_from_initial(rng)
                } else {
                    p.sample_step(rng)
                };
                out.clear();
                out.extend_from_slice(&p.topologies.edge_lists[u]);
            }
            TopologyModel::IndependentEdges(p) => {
                if k <= 1 {
                    p.reset_from_initial(rng);
                } else {
                    p.sample_step(rng);
                }
                p.live_edges_into(out);
            }
        }
    }

    /// Stationary live probability of union edge `(i, j)`.
    pub fn stationary_edge_probability(&self, i: usize, j: usize) -> Result<f64> {
        match self {
            TopologyModel::Switching(p) => p.stationary_edge_probability(i, j),
            TopologyModel::IndependentEdges(p) => {
                let key = EdgeKey::new(i, j)?;
                if !p.edges.contains(&key) {
                    return Err(Error::Domain(format!(
                        "edge ({i}, {j}) is not in the union edge set"
                    )));
                }
                Ok(p.stationary_edge_probability())
            }
        }
    }
}
