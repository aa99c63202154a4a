//! Bottleneck transport: the smallest threshold `c*` such that a coupling
//! supported on cells with cost `<= c*` exists.

use std::collections::VecDeque;

use ndarray::Array2;

const RESIDUAL_EPS: f64 = 1e-15;

struct Edge {
    to: usize,
    cap: f64,
}

struct FlowNet {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
    level: Vec<i64>,
    next: Vec<usize>,
}

impl FlowNet {
    fn new(n: usize) -> Self {
        Self {
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
            level: vec![-1; n],
            next: vec![0; n],
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: f64) -> usize {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge { to: from, cap: 0.0 });
        self.edges.len() - 2
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &e in &self.adj[v] {
                let w = self.edges[e].to;
                if self.edges[e].cap > RESIDUAL_EPS && self.level[w] < 0 {
                    self.level[w] = self.level[v] + 1;
                    q.push_back(w);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, v: usize, t: usize, pushed: f64) -> f64 {
        if v == t {
            return pushed;
        }
        while self.next[v] < self.adj[v].len() {
            let e = self.adj[v][self.next[v]];
            let w = self.edges[e].to;
            if self.edges[e].cap > RESIDUAL_EPS && self.level[w] == self.level[v] + 1 {
                let got = self.dfs(w, t, pushed.min(self.edges[e].cap));
                if got > 0.0 {
                    self.edges[e].cap -= got;
                    self.edges[e ^ 1].cap += got;
                    return got;
                }
            }
            self.next[v] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        while self.bfs(s, t) {
            self.next.iter_mut().for_each(|x| *x = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= 0.0 {
                    break;
                }
                total += f;
            }
        }
        total
    }
}

/// Max-flow from `mu` to `nu` through cells with `cost <= threshold`.
/// Returns the flow value and the flow matrix.
fn route(cost: &Array2<f64>, mu: &[f64], nu: &[f64], threshold: f64) -> (f64, Array2<f64>) {
    let (m, n) = cost.dim();
    let (s, t) = (m + n, m + n + 1);
    let mut net = FlowNet::new(m + n + 2);
    for (i, &w) in mu.iter().enumerate() {
        net.add(s, i, w);
    }
    for (j, &w) in nu.iter().enumerate() {
        net.add(m + j, t, w);
    }
    let mut cells = Vec::new();
    for ((i, j), &c) in cost.indexed_iter() {
        if c <= threshold && mu[i] > 0.0 && nu[j] > 0.0 {
            cells.push((i, j, net.add(i, m + j, f64::INFINITY)));
        }
    }
    let value = net.max_flow(s, t);
    let mut plan = Array2::zeros((m, n));
    for (i, j, e) in cells {
        plan[[i, j]] = net.edges[e ^ 1].cap;
    }
    (value, plan)
}

/// Minimal bottleneck cost and a coupling attaining it.
pub(crate) fn solve(cost: &Array2<f64>, mu: &[f64], nu: &[f64]) -> (f64, Array2<f64>) {
    let total: f64 = mu.iter().sum();
    let slack = 1e-11 * (1.0 + total);
    let mut levels: Vec<f64> = cost.iter().copied().collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let (mut lo, mut hi) = (0usize, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if route(cost, mu, nu, levels[mid]).0 >= total - slack {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let (_, plan) = route(cost, mu, nu, levels[lo]);
    (levels[lo], plan)
}
