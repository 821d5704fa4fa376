//! Counts of loops, multiple edges and triangles.

use serde::Serialize;

use crate::graph::Multigraph;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Census {
    /// Loops counted with multiplicity.
    pub loops: u64,
    /// Pairs `u != v` with multiplicity exactly 2.
    pub doubles: u64,
    /// Pairs `u != v` with multiplicity at least 2.
    pub doubles_at_least: u64,
    /// Pairs `u != v` with multiplicity at least 3.
    pub higher: u64,
    /// Vertex triples joined pairwise.
    pub triangles: u64,
    pub edges: u64,
    pub simple: bool,
}

pub fn multigraph_census(g: &Multigraph) -> Census {
    let mut c = Census { edges: g.edge_count(), ..Census::default() };
    for &(u, v, m) in g.edges() {
        if u == v {
            c.loops += m as u64;
        } else {
            c.doubles += (m == 2) as u64;
            c.doubles_at_least += (m >= 2) as u64;
            c.higher += (m >= 3) as u64;
        }
    }
    c.simple = c.loops == 0 && c.doubles_at_least == 0;
    c.triangles = triangles(g);
    c
}

fn triangles(g: &Multigraph) -> u64 {
    let adj = g.neighbours();
    let mut count = 0;
    for (i, nu) in adj.iter().enumerate() {
        let u = i as u32 + 1;
        for &v in nu.iter().filter(|&&v| v > u) {
            let nv = &adj[v as usize - 1];
            // both lists are sorted: merge the parts above v
            let (mut a, mut b) = (nu.partition_point(|&w| w <= v), nv.partition_point(|&w| w <= v));
            while a < nu.len() && b < nv.len() {
                match nu[a].cmp(&nv[b]) {
                    std::cmp::Ordering::Less => a += 1,
                    std::cmp::Ordering::Greater => b += 1,
                    std::cmp::Ordering::Equal => {
                        count += 1;
                        a += 1;
                        b += 1;
                    }
                }
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let g = Multigraph::from_edges(3, [(1, 2, 2), (3, 3, 1)]).unwrap();
        let c = multigraph_census(&g);
        assert_eq!((c.loops, c.doubles, c.triangles, c.simple), (1, 1, 0, false));
        let k4 = multigraph_census(&Multigraph::complete(4));
        assert_eq!((k4.triangles, k4.doubles, k4.simple), (4, 0, true));
    }
}
