//! Maximum matching in general graphs by augmenting paths with blossom
//! contraction (Edmonds). Blossom bases are tracked with a union-find, so one
//! search costs `O(m α(n))` after an `O(n)` reset.

use std::collections::VecDeque;

use crate::graph::{Matching, Multigraph, Vertex};

const NONE: usize = 0;

struct Search<'a> {
    adj: &'a [Vec<usize>],
    mate: Vec<usize>,
    parent: Vec<usize>,
    base: Vec<usize>,
    /// 0 unlabeled, 1 even (outer), 2 odd (inner).
    color: Vec<u8>,
    stamp: Vec<u32>,
    clock: u32,
    queue: VecDeque<usize>,
}

impl<'a> Search<'a> {
    fn find(&mut self, mut v: usize) -> usize {
        while self.base[v] != v {
            self.base[v] = self.base[self.base[v]];
            v = self.base[v];
        }
        v
    }

    fn lca(&mut self, x: usize, y: usize) -> usize {
        self.clock += 1;
        let (mut x, mut y) = (self.find(x), self.find(y));
        loop {
            if x != NONE {
                if self.stamp[x] == self.clock {
                    return x;
                }
                self.stamp[x] = self.clock;
                let px = self.parent[self.mate[x]];
                x = if self.mate[x] == NONE { NONE } else { self.find(px) };
            }
            std::mem::swap(&mut x, &mut y);
        }
    }

    fn shrink(&mut self, mut x: usize, mut y: usize, b: usize) {
        while self.find(x) != b {
            self.parent[x] = y;
            y = self.mate[x];
            if self.color[y] == 2 {
                self.color[y] = 1;
                self.queue.push_back(y);
            }
            if self.find(x) == x {
                self.base[x] = b;
            }
            if self.find(y) == y {
                self.base[y] = b;
            }
            x = self.parent[y];
        }
    }

    fn augment_from(&mut self, root: usize) -> bool {
        for v in 0..self.base.len() {
            self.base[v] = v;
            self.color[v] = 0;
            self.parent[v] = NONE;
        }
        self.queue.clear();
        self.color[root] = 1;
        self.queue.push_back(root);
        while let Some(x) = self.queue.pop_front() {
            for i in 0..self.adj[x].len() {
                let y = self.adj[x][i];
                if self.color[y] == 2 || self.find(x) == self.find(y) {
                    continue;
                }
                if self.color[y] == 0 {
                    self.color[y] = 2;
                    self.parent[y] = x;
                    if self.mate[y] == NONE {
                        let mut u = y;
                        while u != NONE {
                            let pu = self.parent[u];
                            let next = self.mate[pu];
                            self.mate[u] = pu;
                            self.mate[pu] = u;
                            u = next;
                        }
                        return true;
                    }
                    let m = self.mate[y];
                    self.color[m] = 1;
                    self.queue.push_back(m);
                } else {
                    let b = self.lca(x, y);
                    self.shrink(x, y, b);
                    self.shrink(y, x, b);
                }
            }
        }
        false
    }
}

/// Maximum matching of the simple graph underlying `g` (loops ignored),
/// starting from a greedy matching. Returned as sorted pairs `(u, v)`, `u < v`.
pub fn maximum_matching(g: &Multigraph) -> Vec<(Vertex, Vertex)> {
    let n = g.n();
    let mut adj = vec![Vec::new(); n + 1];
    for &(u, v, _) in g.edges() {
        if u != v {
            adj[u as usize].push(v as usize);
            adj[v as usize].push(u as usize);
        }
    }
    let mut mate = vec![NONE; n + 1];
    for v in 1..=n {
        if mate[v] == NONE {
            if let Some(&u) = adj[v].iter().find(|&&u| mate[u] == NONE) {
                mate[v] = u;
                mate[u] = v;
            }
        }
    }
    let mut s = Search {
        adj: &adj,
        mate,
        parent: vec![NONE; n + 1],
        base: (0..=n).collect(),
        color: vec![0; n + 1],
        stamp: vec![0; n + 1],
        clock: 0,
        queue: VecDeque::new(),
    };
    for v in 1..=n {
        if s.mate[v] == NONE {
            s.augment_from(v);
        }
    }
    let mut out: Vec<(Vertex, Vertex)> =
        (1..=n).filter(|&v| s.mate[v] > v).map(|v| (v as Vertex, s.mate[v] as Vertex)).collect();
    out.sort_unstable();
    out
}

/// Some perfect matching of `g`, if one exists.
pub fn find_perfect_matching(g: &Multigraph) -> Option<Matching> {
    if g.n() % 2 != 0 {
        return None;
    }
    let m = maximum_matching(g);
    if 2 * m.len() == g.n() {
        Some(Matching::new(g.n(), m).expect("blossom output is a perfect matching"))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::{count_perfect_matchings, MatchingConstraints, ParallelEdges};
    use crate::models::sample_gnp;
    use crate::rng::RngStream;

    fn check(g: &Multigraph) -> usize {
        let m = maximum_matching(g);
        let mut seen = vec![false; g.n() + 1];
        for &(u, v) in &m {
            assert!(g.has_edge(u, v));
            assert!(!seen[u as usize] && !seen[v as usize]);
            seen[u as usize] = true;
            seen[v as usize] = true;
        }
        m.len()
    }

    #[test]
    fn odd_cycle_and_petersen() {
        let c5 = Multigraph::from_pairs(5, [(1, 2), (2, 3), (3, 4), (4, 5), (1, 5)]).unwrap();
        assert_eq!(check(&c5), 2);
        let outer = [(1, 2), (2, 3), (3, 4), (4, 5), (1, 5)];
        let spokes = [(1, 6), (2, 7), (3, 8), (4, 9), (5, 10)];
        let inner = [(6, 8), (8, 10), (7, 10), (7, 9), (6, 9)];
        let pet = Multigraph::from_pairs(10, outer.into_iter().chain(spokes).chain(inner)).unwrap();
        assert_eq!(check(&pet), 5);
    }

    #[test]
    fn agrees_with_counting_oracle() {
        for i in 0..300 {
            let mut rng = RngStream::new(9, i);
            let n = 2 * (1 + (i as usize % 7));
            let g = sample_gnp(n, 0.3, &mut rng).unwrap();
            let cnt = count_perfect_matchings(&g, &MatchingConstraints::default(), ParallelEdges::Merged).unwrap();
            assert_eq!(find_perfect_matching(&g).is_some(), cnt > 0u32.into(), "{g:?}");
        }
    }
}
