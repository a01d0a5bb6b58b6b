use super::ranked_pairs::reaches;
use super::OracleError;

/// A digraph with a total order on its edges and one designated edge `f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmasInstance {
    vertices: usize,
    edges: Vec<(u32, u32)>,
    designated: usize,
}

impl EmasInstance {
    /// `edges` are given in processing order; `designated` indexes into them.
    pub fn new(vertices: usize, edges: Vec<(u32, u32)>, designated: usize) -> Result<Self, OracleError> {
        if designated >= edges.len() {
            return Err(OracleError::DesignatedEdgeMissing {
                index: designated,
                edges: edges.len(),
            });
        }
        for &(u, v) in &edges {
            for id in [u, v] {
                if id as usize >= vertices {
                    return Err(OracleError::OutOfRange { id, m: vertices });
                }
            }
        }
        Ok(EmasInstance {
            vertices,
            edges,
            designated,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn designated(&self) -> usize {
        self.designated
    }

    pub fn designated_edge(&self) -> (u32, u32) {
        self.edges[self.designated]
    }

    /// No self-loops and at most one edge per unordered vertex pair.
    pub fn is_simple(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.edges
            .iter()
            .all(|&(u, v)| u != v && seen.insert((u.min(v), u.max(v))))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmasOutcome {
    /// Per edge (in input order): was it added?
    pub kept: Vec<bool>,
    pub designated_kept: bool,
}

/// Greedy edge-maximal acyclic subgraph: edges are added in order unless they
/// would close a directed cycle among the edges already kept.
pub fn emas(inst: &EmasInstance) -> EmasOutcome {
    let n = inst.vertices;
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut stack = Vec::new();
    let mut seen = vec![false; n];
    let kept: Vec<bool> = inst
        .edges
        .iter()
        .map(|&(u, v)| {
            let keep = !reaches(&adj, v, u, &mut stack, &mut seen);
            if keep {
                adj[u as usize].push(v);
            }
            keep
        })
        .collect();
    EmasOutcome {
        designated_kept: kept[inst.designated],
        kept,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dag_keeps_everything() {
        let inst = EmasInstance::new(4, vec![(0, 1), (1, 2), (0, 2), (2, 3)], 2).unwrap();
        let out = emas(&inst);
        assert!(out.kept.iter().all(|&k| k));
        assert!(out.designated_kept);
    }

    #[test]
    fn closing_edge_of_a_triangle_is_omitted() {
        // the 2-cycle 0⇄1 with (1,0) split through midpoint 2, f last
        let inst = EmasInstance::new(3, vec![(0, 1), (1, 2), (2, 0)], 2).unwrap();
        let out = emas(&inst);
        assert_eq!(out.kept, vec![true, true, false]);
        assert!(!out.designated_kept);
    }

    #[test]
    fn self_loop_is_never_kept() {
        let inst = EmasInstance::new(1, vec![(0, 0)], 0).unwrap();
        assert!(!emas(&inst).designated_kept);
        assert!(!inst.is_simple());
    }

    #[test]
    fn designated_edge_must_exist() {
        assert!(matches!(
            EmasInstance::new(2, vec![(0, 1)], 1),
            Err(OracleError::DesignatedEdgeMissing { index: 1, edges: 1 })
        ));
        assert!(EmasInstance::new(2, vec![(0, 2)], 0).is_err());
    }
}
