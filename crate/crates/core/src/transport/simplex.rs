//! Primal network simplex for min-cost flow with real supplies and integer costs.
//!
//! The spanning-tree basis is kept strongly feasible (an artificial root with
//! big-M arcs, leaving-arc ties resolved toward the root), which rules out
//! cycling. Costs are `i128`, so reduced costs and optimality tests are exact;
//! only flows are floating point. Arcs may be appended between `solve` calls:
//! they enter at their lower bound and the current basis is reused.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const LOWER: i8 = 1;
const TREE: i8 = 0;
const UPPER: i8 = -1;
const NONE: u32 = u32::MAX;

pub(crate) struct NetworkSimplex {
    nodes: usize,
    supply: Vec<f64>,
    src: Vec<u32>,
    tgt: Vec<u32>,
    cap: Vec<f64>,
    cost: Vec<i128>,
    flow: Vec<f64>,
    state: Vec<i8>,
    parent: Vec<u32>,
    pred: Vec<u32>,
    up: Vec<bool>,
    depth: Vec<u32>,
    pi: Vec<i128>,
    adj: Vec<Vec<u32>>,
    next_arc: usize,
    initialized: bool,
    art_cost: i128,
    pub(crate) pivots: usize,
}

impl NetworkSimplex {
    /// `supply[u] > 0` injects flow at `u`; supplies must sum to zero.
    /// `max_cost` bounds every arc cost that will ever be added.
    pub(crate) fn new(supply: Vec<f64>, max_cost: i128) -> Result<Self> {
        let n = supply.len();
        let art_cost = (max_cost + 1)
            .checked_mul(n as i128 + 1)
            .filter(|c| *c < (1i128 << 124))
            .ok_or_else(|| Error::invalid("cost range too large for exact arithmetic"))?;
        let mut s = Self {
            nodes: n,
            supply,
            src: Vec::new(),
            tgt: Vec::new(),
            cap: Vec::new(),
            cost: Vec::new(),
            flow: Vec::new(),
            state: Vec::new(),
            parent: vec![NONE; n + 1],
            pred: vec![NONE; n + 1],
            up: vec![false; n + 1],
            depth: vec![0; n + 1],
            pi: vec![0; n + 1],
            adj: vec![Vec::new(); n + 1],
            next_arc: 0,
            initialized: false,
            art_cost,
            pivots: 0,
        };
        // Artificial arc `u` joins node `u` and the root.
        let root = n as u32;
        for u in 0..n {
            let (a, b) = if s.supply[u] >= 0.0 { (u as u32, root) } else { (root, u as u32) };
            s.push_arc(a, b, f64::INFINITY, art_cost);
        }
        Ok(s)
    }

    fn push_arc(&mut self, a: u32, b: u32, cap: f64, cost: i128) -> usize {
        self.src.push(a);
        self.tgt.push(b);
        self.cap.push(cap);
        self.cost.push(cost);
        self.flow.push(0.0);
        self.state.push(LOWER);
        self.src.len() - 1
    }

    /// Adds a real arc at its lower bound. Returns its id.
    pub(crate) fn add_arc(&mut self, from: usize, to: usize, cap: f64, cost: i128) -> usize {
        debug_assert!(from < self.nodes && to < self.nodes);
        self.push_arc(from as u32, to as u32, cap, cost)
    }

    pub(crate) fn arc_count(&self) -> usize {
        self.src.len() - self.nodes
    }

    /// Real arc ids start after the artificial ones.
    pub(crate) fn first_real_arc(&self) -> usize {
        self.nodes
    }

    pub(crate) fn flow(&self, arc: usize) -> f64 {
        self.flow[arc]
    }

    pub(crate) fn endpoints(&self, arc: usize) -> (usize, usize) {
        (self.src[arc] as usize, self.tgt[arc] as usize)
    }

    pub(crate) fn potential(&self, node: usize) -> i128 {
        self.pi[node]
    }

    /// Reduced cost `c + π(from) − π(to)` of a hypothetical arc.
    pub(crate) fn reduced_cost(&self, from: usize, to: usize, cost: i128) -> i128 {
        cost + self.pi[from] - self.pi[to]
    }

    fn init_tree(&mut self) {
        let n = self.nodes;
        let root = n;
        self.depth[root] = 0;
        self.parent[root] = NONE;
        for u in 0..n {
            let supply = self.supply[u];
            self.state[u] = TREE;
            self.parent[u] = root as u32;
            self.pred[u] = u as u32;
            self.depth[u] = 1;
            if supply >= 0.0 {
                self.flow[u] = supply;
                self.up[u] = true;
                self.pi[u] = -self.art_cost;
            } else {
                self.flow[u] = -supply;
                self.up[u] = false;
                self.pi[u] = self.art_cost;
            }
            self.adj[u].push(u as u32);
            self.adj[root].push(u as u32);
        }
        self.initialized = true;
    }

    /// Starts from a caller-supplied basis instead of the all-artificial one.
    ///
    /// `pred[u]` is the real tree arc joining `u` to its parent, `None` hangs
    /// `u` from the root by its artificial arc. Arcs in `upper` start
    /// saturated. Returns `false`, leaving the default start in place, unless
    /// the arcs form a tree whose flows are within bounds and strongly
    /// feasible.
    pub(crate) fn start_from(&mut self, pred: &[Option<usize>], upper: &[usize]) -> bool {
        let n = self.nodes;
        let root = n;
        if pred.len() != n || self.initialized {
            return false;
        }
        for a in 0..self.src.len() {
            self.state[a] = LOWER;
            self.flow[a] = 0.0;
        }
        for &a in upper {
            if !self.cap[a].is_finite() {
                return self.abandon();
            }
            self.state[a] = UPPER;
            self.flow[a] = self.cap[a];
        }
        for v in self.adj.iter_mut() {
            v.clear();
        }
        for u in 0..n {
            let (a, p) = match pred[u] {
                Some(a) => {
                    let p = if self.src[a] as usize == u { self.tgt[a] } else { self.src[a] } as usize;
                    if a < n || self.state[a] == UPPER {
                        return self.abandon();
                    }
                    (a, p)
                }
                None => (u, root),
            };
            self.state[a] = TREE;
            self.pred[u] = a as u32;
            self.parent[u] = p as u32;
            self.adj[u].push(a as u32);
            self.adj[p].push(a as u32);
        }
        // Visit from the root; a cycle leaves nodes unreached.
        self.depth[root] = 0;
        self.pi[root] = 0;
        let mut reached = 1;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for k in 0..self.adj[v].len() {
                let a = self.adj[v][k] as usize;
                let w = if self.src[a] as usize == v { self.tgt[a] } else { self.src[a] } as usize;
                if w != root && self.parent[w] as usize == v && self.pred[w] as usize == a {
                    self.attach(w, v, a);
                    reached += 1;
                    stack.push(w);
                }
            }
        }
        if reached != n + 1 {
            return self.abandon();
        }
        self.initialized = true;
        let ok = self.recompute_tree_flows();
        let strong = (0..n).all(|u| {
            let a = self.pred[u] as usize;
            (self.flow[a] > 0.0 || self.up[u]) && (self.flow[a] < self.cap[a] || !self.up[u])
        });
        if !(ok && strong) {
            return self.abandon();
        }
        true
    }

    fn abandon(&mut self) -> bool {
        for v in self.adj.iter_mut() {
            v.clear();
        }
        for a in 0..self.src.len() {
            self.state[a] = LOWER;
            self.flow[a] = 0.0;
        }
        self.initialized = false;
        false
    }

    fn find_entering(&mut self) -> Option<usize> {
        let m = self.src.len();
        if m == 0 {
            return None;
        }
        let block = (libm::sqrt(m as f64) as usize).max(10);
        let mut best: Option<usize> = None;
        let mut min = 0i128;
        let mut count = 0;
        let start = self.next_arc % m;
        for k in 0..m {
            let e = if start + k < m { start + k } else { start + k - m };
            let s = self.state[e];
            if s != TREE {
                let c = s as i128
                    * (self.cost[e] + self.pi[self.src[e] as usize] - self.pi[self.tgt[e] as usize]);
                if c < min {
                    min = c;
                    best = Some(e);
                }
            }
            count += 1;
            if count == block {
                if let Some(b) = best {
                    self.next_arc = b + 1;
                    return Some(b);
                }
                count = 0;
            }
        }
        if let Some(b) = best {
            self.next_arc = b + 1;
        }
        best
    }

    fn join(&self, mut a: usize, mut b: usize) -> usize {
        while a != b {
            if self.depth[a] > self.depth[b] {
                a = self.parent[a] as usize;
            } else if self.depth[b] > self.depth[a] {
                b = self.parent[b] as usize;
            } else {
                a = self.parent[a] as usize;
                b = self.parent[b] as usize;
            }
        }
        a
    }

    fn pivot(&mut self, e: usize) -> Result<()> {
        let s = self.state[e];
        let (first, second) = if s == LOWER {
            (self.src[e] as usize, self.tgt[e] as usize)
        } else {
            (self.tgt[e] as usize, self.src[e] as usize)
        };
        let join = self.join(first, second);

        let mut delta = self.cap[e];
        let mut u_out = NONE as usize;
        let mut side = 0u8;
        let mut u = first;
        while u != join {
            let a = self.pred[u] as usize;
            let d = if self.up[u] { self.flow[a] } else { self.cap[a] - self.flow[a] };
            if d < delta {
                delta = d;
                u_out = u;
                side = 1;
            }
            u = self.parent[u] as usize;
        }
        u = second;
        while u != join {
            let a = self.pred[u] as usize;
            let d = if self.up[u] { self.cap[a] - self.flow[a] } else { self.flow[a] };
            if d <= delta {
                delta = d;
                u_out = u;
                side = 2;
            }
            u = self.parent[u] as usize;
        }
        if delta == f64::INFINITY {
            return Err(Error::Infeasible("unbounded min-cost flow".into()));
        }
        let delta = delta.max(0.0);

        if delta > 0.0 {
            self.flow[e] += s as f64 * delta;
            let mut u = first;
            while u != join {
                let a = self.pred[u] as usize;
                self.flow[a] += if self.up[u] { -delta } else { delta };
                u = self.parent[u] as usize;
            }
            u = second;
            while u != join {
                let a = self.pred[u] as usize;
                self.flow[a] += if self.up[u] { delta } else { -delta };
                u = self.parent[u] as usize;
            }
        }

        if side == 0 {
            self.state[e] = -s;
            self.flow[e] = if s == LOWER { self.cap[e] } else { 0.0 };
            return Ok(());
        }

        let leave = self.pred[u_out] as usize;
        let decreased = (side == 1) == self.up[u_out];
        if decreased {
            self.flow[leave] = 0.0;
            self.state[leave] = LOWER;
        } else {
            self.flow[leave] = self.cap[leave];
            self.state[leave] = UPPER;
        }
        self.state[e] = TREE;

        let p_out = self.parent[u_out] as usize;
        remove_arc(&mut self.adj[u_out], leave as u32);
        remove_arc(&mut self.adj[p_out], leave as u32);
        self.adj[self.src[e] as usize].push(e as u32);
        self.adj[self.tgt[e] as usize].push(e as u32);

        let (sub_root, new_parent) = if side == 1 { (first, second) } else { (second, first) };
        self.rehang(sub_root, new_parent, e);
        Ok(())
    }

    fn attach(&mut self, child: usize, parent: usize, arc: usize) {
        self.parent[child] = parent as u32;
        self.pred[child] = arc as u32;
        self.up[child] = self.src[arc] as usize == child;
        self.depth[child] = self.depth[parent] + 1;
        self.pi[child] = if self.up[child] {
            self.pi[parent] - self.cost[arc]
        } else {
            self.pi[parent] + self.cost[arc]
        };
    }

    fn rehang(&mut self, root: usize, parent: usize, arc: usize) {
        self.attach(root, parent, arc);
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            let pv = self.pred[v];
            for k in 0..self.adj[v].len() {
                let a = self.adj[v][k];
                if a == pv {
                    continue;
                }
                let a = a as usize;
                let w = if self.src[a] as usize == v { self.tgt[a] } else { self.src[a] } as usize;
                self.attach(w, v, a);
                stack.push(w);
            }
        }
    }

    /// Runs to optimality of the big-M problem. Check [`Self::stranded`]
    /// afterwards: positive artificial flow means the supplies cannot be routed
    /// over the current arcs.
    pub(crate) fn solve(&mut self) -> Result<()> {
        if !self.initialized {
            self.init_tree();
        }
        let limit = 50 * self.src.len().max(64) + 1_000_000;
        let mut pivots = 0usize;
        while let Some(e) = self.find_entering() {
            self.pivot(e)?;
            pivots += 1;
            if pivots > limit {
                return Err(Error::NotConverged {
                    solver: "network simplex",
                    iterations: pivots,
                    residual: f64::NAN,
                });
            }
        }
        self.pivots += pivots;
        self.recompute_tree_flows();
        Ok(())
    }

    /// Flow left on artificial arcs, relative to the total supply.
    pub(crate) fn stranded(&self) -> f64 {
        let scale: f64 = self.supply.iter().map(|s| s.abs()).sum::<f64>().max(1e-300);
        (0..self.nodes).map(|u| self.flow[u]).sum::<f64>() / scale
    }

    pub(crate) fn is_feasible(&self) -> bool {
        self.stranded() <= 1e-11
    }

    pub(crate) fn require_feasible(&self) -> Result<()> {
        if self.is_feasible() {
            Ok(())
        } else {
            Err(Error::Infeasible(alloc::format!(
                "a fraction {:e} of the supply cannot be routed",
                self.stranded()
            )))
        }
    }

    /// Rebuilds tree-arc flows from the supplies and the nonbasic flows, which
    /// removes roundoff accumulated over pivots.
    fn recompute_tree_flows(&mut self) -> bool {
        let n = self.nodes;
        let mut excess = vec![0.0; n + 1];
        excess[..n].copy_from_slice(&self.supply);
        for a in 0..self.src.len() {
            if self.state[a] != TREE {
                let f = self.flow[a];
                excess[self.src[a] as usize] -= f;
                excess[self.tgt[a] as usize] += f;
            }
        }
        let mut within = true;
        let max_depth = self.depth[..n].iter().copied().max().unwrap_or(0) as usize;
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); max_depth + 1];
        for u in 0..n {
            buckets[self.depth[u] as usize].push(u as u32);
        }
        for level in (1..=max_depth).rev() {
            for &u in &buckets[level] {
                let u = u as usize;
                let a = self.pred[u] as usize;
                let f = if self.up[u] { excess[u] } else { -excess[u] };
                let slack = 1e-12 * (1.0 + f.abs());
                within &= f >= -slack && f <= self.cap[a] + slack;
                self.flow[a] = f.clamp(0.0, self.cap[a]);
                let p = self.parent[u] as usize;
                excess[p] += excess[u];
            }
        }
        within
    }
}

fn remove_arc(list: &mut Vec<u32>, arc: u32) {
    if let Some(k) = list.iter().position(|&a| a == arc) {
        list.swap_remove(k);
    }
}
