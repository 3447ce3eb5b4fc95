//! Feasible flows with lower and upper bounds, reduced to one max-flow.

use std::collections::VecDeque;

/// A directed branch with flow bounds. Infinite bounds are allowed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Network of branches on `nodes` nodes. A feasible flow satisfies the bounds
/// on every branch and conservation at every node.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowNetwork {
    pub nodes: usize,
    pub branches: Vec<Branch>,
}

/// Result of a feasibility query.
#[derive(Clone, Debug, PartialEq)]
pub enum FlowOutcome {
    /// Flow value on every branch.
    Feasible(Vec<f64>),
    /// Nodes on the source side of a minimum cut in the reduced problem.
    Infeasible(Vec<bool>),
}

struct Arc {
    to: usize,
    cap: f64,
    rev: usize,
}

struct Dinic {
    adj: Vec<Vec<Arc>>,
    level: Vec<i32>,
    iter: Vec<usize>,
    eps: f64,
}

impl Dinic {
    fn new(n: usize, eps: f64) -> Self {
        Dinic { adj: (0..n).map(|_| Vec::new()).collect(), level: vec![0; n], iter: vec![0; n], eps }
    }

    fn add(&mut self, u: usize, v: usize, cap: f64) -> (usize, usize) {
        let iu = self.adj[u].len();
        let iv = self.adj[v].len() + usize::from(u == v);
        self.adj[u].push(Arc { to: v, cap, rev: iv });
        self.adj[v].push(Arc { to: u, cap: 0.0, rev: iu });
        (u, iu)
    }

    fn bfs(&mut self, s: usize) {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for a in &self.adj[u] {
                if a.cap > self.eps && self.level[a.to] < 0 {
                    self.level[a.to] = self.level[u] + 1;
                    q.push_back(a.to);
                }
            }
        }
    }

    fn dfs(&mut self, u: usize, t: usize, f: f64) -> f64 {
        if u == t {
            return f;
        }
        while self.iter[u] < self.adj[u].len() {
            let i = self.iter[u];
            let (to, cap) = (self.adj[u][i].to, self.adj[u][i].cap);
            if cap > self.eps && self.level[u] < self.level[to] {
                let d = self.dfs(to, t, f.min(cap));
                if d > 0.0 {
                    self.adj[u][i].cap -= d;
                    let r = self.adj[u][i].rev;
                    self.adj[to][r].cap += d;
                    return d;
                }
            }
            self.iter[u] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                return total;
            }
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= 0.0 {
                    break;
                }
                total += f;
            }
        }
    }
}

impl FlowNetwork {
    /// Finds a feasible flow via the excess-node transformation: each branch
    /// keeps capacity `upper - lower`, the lower bounds become supplies and
    /// demands served from a super source and sink. Infinite bounds are
    /// clamped to one plus the sum of all finite bounds.
    pub fn feasible_flow(&self) -> FlowOutcome {
        let finite: f64 = self
            .branches
            .iter()
            .flat_map(|b| [b.lower, b.upper])
            .filter(|x| x.is_finite())
            .map(f64::abs)
            .sum();
        let big = 1.0 + finite;
        let clamp = |x: f64| x.clamp(-big, big);
        let n = self.nodes;
        let (src, sink) = (n, n + 1);
        let mut net = Dinic::new(n + 2, 1e-14 * big);
        let mut excess = vec![0.0; n];
        let mut handles = Vec::with_capacity(self.branches.len());
        for b in &self.branches {
            let lo = clamp(b.lower);
            let hi = clamp(b.upper);
            handles.push((net.add(b.from, b.to, (hi - lo).max(0.0)), lo));
            excess[b.to] += lo;
            excess[b.from] -= lo;
        }
        let mut demand = 0.0;
        for (v, &x) in excess.iter().enumerate() {
            if x > 0.0 {
                net.add(src, v, x);
                demand += x;
            } else if x < 0.0 {
                net.add(v, sink, -x);
            }
        }
        let flow = net.max_flow(src, sink);
        if flow >= demand - 1e-11 * big {
            let values = handles
                .iter()
                .zip(&self.branches)
                .map(|(&((u, i), lo), b)| {
                    let a = &net.adj[u][i];
                    let hi = clamp(b.upper);
                    lo + ((hi - lo).max(0.0) - a.cap)
                })
                .collect();
            FlowOutcome::Feasible(values)
        } else {
            net.bfs(src);
            FlowOutcome::Infeasible((0..n).map(|v| net.level[v] >= 0).collect())
        }
    }
}
