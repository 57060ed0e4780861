//! Min-cost flow by successive shortest paths with node potentials.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: i64,
    cost: i64,
}

/// Directed network with integer capacities and costs. Arcs are stored in
/// pairs (forward at even ids, residual at odd ids).
#[derive(Debug, Clone)]
pub struct Network {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

impl Network {
    pub fn new(nodes: usize) -> Self {
        Self {
            arcs: Vec::new(),
            out: vec![Vec::new(); nodes],
        }
    }

    pub fn add_node(&mut self) -> usize {
        self.out.push(Vec::new());
        self.out.len() - 1
    }

    /// Returns the arc id, usable with [`flow`](Self::flow).
    pub fn add_arc(&mut self, from: usize, to: usize, cap: i64, cost: i64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap, cost });
        self.arcs.push(Arc {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.out[from].push(id);
        self.out[to].push(id + 1);
        id
    }

    /// Flow currently on forward arc `id`.
    pub fn flow(&self, id: usize) -> i64 {
        self.arcs[id + 1].cap
    }

    // Shortest distances from `source` over residual arcs; handles negative
    // costs as long as there is no negative cycle.
    fn bellman_ford(&self, source: usize) -> Vec<Option<i64>> {
        let n = self.out.len();
        let mut dist = vec![None; n];
        dist[source] = Some(0);
        for _ in 0..n {
            let mut changed = false;
            for v in 0..n {
                let Some(dv) = dist[v] else { continue };
                for &id in &self.out[v] {
                    let a = &self.arcs[id];
                    if a.cap > 0 && dist[a.to].is_none_or(|dt| dv + a.cost < dt) {
                        dist[a.to] = Some(dv + a.cost);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        dist
    }

    /// Augments along cheapest source-sink paths while their cost is
    /// negative, which yields a minimum-cost flow of unrestricted value.
    /// Equal-cost paths are chosen deterministically (node order, then arc
    /// insertion order). Returns the total cost.
    pub fn min_cost_flow(&mut self, source: usize, sink: usize) -> i64 {
        let n = self.out.len();
        let mut potential: Vec<i64> = self.bellman_ford(source).into_iter().map(|d| d.unwrap_or(0)).collect();
        let mut total = 0;
        loop {
            let mut dist: Vec<Option<i64>> = vec![None; n];
            let mut via: Vec<Option<usize>> = vec![None; n];
            let mut heap = BinaryHeap::new();
            dist[source] = Some(0);
            heap.push(Reverse((0i64, source)));
            while let Some(Reverse((d, v))) = heap.pop() {
                if dist[v] != Some(d) {
                    continue;
                }
                for &id in &self.out[v] {
                    let a = &self.arcs[id];
                    if a.cap <= 0 {
                        continue;
                    }
                    let nd = d + a.cost + potential[v] - potential[a.to];
                    if dist[a.to].is_none_or(|old| nd < old) {
                        dist[a.to] = Some(nd);
                        via[a.to] = Some(id);
                        heap.push(Reverse((nd, a.to)));
                    }
                }
            }
            let Some(reduced) = dist[sink] else { break };
            let path_cost = reduced + potential[sink] - potential[source];
            if path_cost >= 0 {
                break;
            }
            for v in 0..n {
                if let Some(d) = dist[v] {
                    potential[v] += d;
                }
            }
            let mut push = i64::MAX;
            let mut v = sink;
            while v != source {
                let id = via[v].expect("path to sink");
                push = push.min(self.arcs[id].cap);
                v = self.arcs[id ^ 1].to;
            }
            let mut v = sink;
            while v != source {
                let id = via[v].expect("path to sink");
                self.arcs[id].cap -= push;
                self.arcs[id ^ 1].cap += push;
                v = self.arcs[id ^ 1].to;
            }
            total += push * path_cost;
        }
        total
    }
}
