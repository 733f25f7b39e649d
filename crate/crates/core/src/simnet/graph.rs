//! Capacitated digraph, max-flow feasibility and disjoint path selection.
//!
//! Edge capacity counts lanes (wavelengths) an edge can carry. Coded
//! transmission of `h` lanes between `s` and `d` needs an s-d min cut of at
//! least `h`; by max-flow/min-cut that is the same as a flow of value `h`.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub capacity: u32,
}

#[derive(Debug, Clone, Default)]
pub struct NetworkGraph {
    nodes: usize,
    edges: Vec<Edge>,
}

/// A path as node sequence plus the edge ids it uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Route {
    pub fn hops(&self) -> usize {
        self.edges.len()
    }
}

impl NetworkGraph {
    pub fn new(nodes: usize) -> Self {
        NetworkGraph {
            nodes,
            edges: Vec::new(),
        }
    }

    /// Adds a directed edge and returns its id.
    pub fn add_edge(&mut self, from: usize, to: usize, capacity: u32) -> usize {
        assert!(from < self.nodes && to < self.nodes, "edge {from}->{to} outside graph");
        self.edges.push(Edge { from, to, capacity });
        self.edges.len() - 1
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    fn check_terminals(&self, s: usize, d: usize) {
        assert!(s < self.nodes && d < self.nodes, "terminal outside graph");
        assert_ne!(s, d, "source and destination must differ");
    }

    /// Max flow from `s` to `d`, stopping early once `limit` is reached.
    pub fn max_flow(&self, s: usize, d: usize, limit: u64) -> u64 {
        self.check_terminals(s, d);
        Residual::new(self).augment(s, d, limit)
    }

    /// True iff the s-d min cut is at least `h`.
    pub fn check_feasibility(&self, s: usize, d: usize, h: usize) -> bool {
        self.max_flow(s, d, h as u64) >= h as u64
    }

    /// `h` edge-disjoint routes from `s` to `d`, counting an edge of capacity
    /// `c` as `c` parallel unit edges.
    ///
    /// First greedily peels off shortest (hop count) routes; greedy choices
    /// can block each other, so if that comes up short the routes are read
    /// off an integral max flow instead. No attention is paid to delay.
    pub fn select_paths(&self, s: usize, d: usize, h: usize) -> Result<Vec<Route>> {
        self.check_terminals(s, d);
        if let Some(routes) = self.greedy_routes(s, d, h) {
            return Ok(routes);
        }
        let mut residual = Residual::new(self);
        let flow = residual.augment(s, d, h as u64);
        if flow < h as u64 {
            return Err(Error::Infeasible {
                found: flow as usize,
                needed: h,
            });
        }
        Ok(residual.decompose(self, s, d, h))
    }

    fn greedy_routes(&self, s: usize, d: usize, h: usize) -> Option<Vec<Route>> {
        let mut remaining: Vec<u32> = self.edges.iter().map(|e| e.capacity).collect();
        let mut out = Vec::with_capacity(h);
        for _ in 0..h {
            let route = self.shortest_route(s, d, |id| remaining[id] > 0)?;
            for &id in &route.edges {
                remaining[id] -= 1;
            }
            out.push(route);
        }
        Some(out)
    }

    fn shortest_route(&self, s: usize, d: usize, usable: impl Fn(usize) -> bool) -> Option<Route> {
        let mut via: Vec<Option<usize>> = vec![None; self.nodes];
        let mut seen = vec![false; self.nodes];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            if v == d {
                break;
            }
            for (id, e) in self.edges.iter().enumerate() {
                if e.from == v && !seen[e.to] && usable(id) {
                    seen[e.to] = true;
                    via[e.to] = Some(id);
                    queue.push_back(e.to);
                }
            }
        }
        if !seen[d] {
            return None;
        }
        let mut edges = Vec::new();
        let mut v = d;
        while v != s {
            let id = via[v].expect("reached nodes have a predecessor");
            edges.push(id);
            v = self.edges[id].from;
        }
        edges.reverse();
        let mut nodes = vec![s];
        nodes.extend(edges.iter().map(|&id| self.edges[id].to));
        Some(Route { nodes, edges })
    }
}

/// Residual network: arc `2i` is edge `i` forward, arc `2i + 1` its reverse.
struct Residual {
    head: Vec<usize>,
    cap: Vec<u64>,
    adj: Vec<Vec<usize>>,
}

impl Residual {
    fn new(g: &NetworkGraph) -> Self {
        let mut head = Vec::with_capacity(2 * g.edges.len());
        let mut cap = Vec::with_capacity(2 * g.edges.len());
        let mut adj = vec![Vec::new(); g.nodes];
        for e in &g.edges {
            adj[e.from].push(head.len());
            head.push(e.to);
            cap.push(e.capacity as u64);
            adj[e.to].push(head.len());
            head.push(e.from);
            cap.push(0);
        }
        Residual { head, cap, adj }
    }

    /// Edmonds-Karp, capped at `limit`.
    fn augment(&mut self, s: usize, d: usize, limit: u64) -> u64 {
        let mut flow = 0;
        while flow < limit {
            let mut via: Vec<Option<usize>> = vec![None; self.adj.len()];
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                if v == d {
                    break;
                }
                for &a in &self.adj[v] {
                    let w = self.head[a];
                    if self.cap[a] > 0 && !seen[w] {
                        seen[w] = true;
                        via[w] = Some(a);
                        queue.push_back(w);
                    }
                }
            }
            if !seen[d] {
                break;
            }
            let mut push = limit - flow;
            let mut v = d;
            while let Some(a) = via[v] {
                push = push.min(self.cap[a]);
                v = self.head[a ^ 1];
            }
            let mut v = d;
            while let Some(a) = via[v] {
                self.cap[a] -= push;
                self.cap[a ^ 1] += push;
                v = self.head[a ^ 1];
            }
            flow += push;
        }
        flow
    }

    /// Splits the current flow into `h` unit routes, cancelling any cycles
    /// met on the way.
    fn decompose(&self, g: &NetworkGraph, s: usize, d: usize, h: usize) -> Vec<Route> {
        let mut flow: Vec<u64> = (0..g.edges.len()).map(|i| self.cap[2 * i + 1]).collect();
        let mut routes = Vec::with_capacity(h);
        while routes.len() < h {
            let mut nodes = vec![s];
            let mut edges: Vec<usize> = Vec::new();
            let mut v = s;
            while v != d {
                let id = (0..g.edges.len())
                    .find(|&id| g.edges[id].from == v && flow[id] > 0)
                    .expect("flow conservation leaves an outgoing edge");
                let w = g.edges[id].to;
                if let Some(pos) = nodes.iter().position(|&x| x == w) {
                    // Cycle w -> ... -> v -> w carries no s-d flow.
                    flow[id] -= 1;
                    for &c in &edges[pos..] {
                        flow[c] -= 1;
                    }
                    nodes.truncate(pos + 1);
                    edges.truncate(pos);
                    v = w;
                    continue;
                }
                nodes.push(w);
                edges.push(id);
                v = w;
            }
            for &id in &edges {
                flow[id] -= 1;
            }
            routes.push(Route { nodes, edges });
        }
        routes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_fat_edge() {
        let mut g = NetworkGraph::new(2);
        g.add_edge(0, 1, 4);
        assert!(g.check_feasibility(0, 1, 4));
        assert!(!g.check_feasibility(0, 1, 5));
    }

    #[test]
    fn two_thin_paths_are_not_enough() {
        let mut g = NetworkGraph::new(4);
        g.add_edge(0, 1, 1);
        g.add_edge(1, 3, 1);
        g.add_edge(0, 2, 1);
        g.add_edge(2, 3, 1);
        assert_eq!(g.max_flow(0, 3, u64::MAX), 2);
        assert!(!g.check_feasibility(0, 3, 4));
        assert!(matches!(g.select_paths(0, 3, 4), Err(Error::Infeasible { found: 2, needed: 4 })));
    }

    #[test]
    fn h1_is_shortest_path() {
        let mut g = NetworkGraph::new(4);
        g.add_edge(0, 1, 1);
        g.add_edge(1, 2, 1);
        g.add_edge(2, 3, 1);
        g.add_edge(0, 3, 1);
        let r = g.select_paths(0, 3, 1).unwrap();
        assert_eq!(r[0].nodes, vec![0, 3]);
    }

    #[test]
    fn four_parallel_two_hop_paths() {
        let mut g = NetworkGraph::new(6);
        for mid in 1..=4 {
            g.add_edge(0, mid, 1);
            g.add_edge(mid, 5, 1);
        }
        let routes = g.select_paths(0, 5, 4).unwrap();
        let mids: Vec<usize> = routes.iter().map(|r| r.nodes[1]).collect();
        assert_eq!(mids, vec![1, 2, 3, 4]);
        assert!(routes.iter().all(|r| r.hops() == 2));
    }

    #[test]
    fn greedy_trap_falls_back_to_flow() {
        // Taking s-a-b-d first blocks the two disjoint routes s-a-d and
        // s-b-d. Flow decomposition has to undo it.
        let mut g = NetworkGraph::new(4);
        let (s, a, b, d) = (0, 1, 2, 3);
        g.add_edge(s, a, 1);
        g.add_edge(a, b, 1);
        g.add_edge(b, d, 1);
        g.add_edge(s, b, 1);
        g.add_edge(a, d, 1);
        // Make s-a-b-d the unique shortest by lengthening the others.
        let mut g2 = NetworkGraph::new(6);
        g2.add_edge(s, a, 1);
        g2.add_edge(a, b, 1);
        g2.add_edge(b, d, 1);
        g2.add_edge(s, 4, 1);
        g2.add_edge(4, b, 1);
        g2.add_edge(a, 5, 1);
        g2.add_edge(5, d, 1);
        assert!(g2.greedy_routes(s, d, 2).is_none());
        let routes = g2.select_paths(s, d, 2).unwrap();
        assert_eq!(routes.len(), 2);
        let mut used = vec![0; g2.edges().len()];
        for r in &routes {
            assert_eq!(r.nodes[0], s);
            assert_eq!(*r.nodes.last().unwrap(), d);
            for &e in &r.edges {
                used[e] += 1;
            }
        }
        assert!(used.iter().zip(g2.edges()).all(|(&u, e)| u <= e.capacity));
        assert_eq!(g.select_paths(s, d, 2).unwrap().len(), 2);
    }

    #[test]
    #[should_panic(expected = "must differ")]
    fn same_terminals_panic() {
        NetworkGraph::new(2).check_feasibility(1, 1, 1);
    }
}
