use rayon::prelude::*;

/// Dense vertex index.
pub type VertexId = u32;

/// Edge weight as seen by vertex programs. Zero marks an edge that has been
/// functionally removed.
pub type EdgeWeight = u64;

/// Immutable-topology directed graph with both adjacency directions
/// precomputed as flat per-vertex arrays, each row sorted by neighbor id.
///
/// Edge weights may be changed between engine runs (never during one) via
/// [`Graph::set_weight`]; the topology itself is fixed.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    out_offsets: Vec<usize>,
    out_nbrs: Vec<VertexId>,
    out_weights: Vec<EdgeWeight>,
    in_offsets: Vec<usize>,
    in_nbrs: Vec<VertexId>,
    in_weights: Vec<EdgeWeight>,
}

struct Csr {
    offsets: Vec<usize>,
    nbrs: Vec<VertexId>,
    weights: Vec<EdgeWeight>,
}

impl Csr {
    /// Transposes `self` (rows keyed by one endpoint) into rows keyed by the
    /// other endpoint. Scanning rows in ascending order leaves every output
    /// row sorted.
    fn transpose(&self, n: usize) -> Csr {
        let mut offsets = vec![0usize; n + 1];
        for &v in &self.nbrs {
            offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut nbrs = vec![0; self.nbrs.len()];
        let mut weights = vec![0; self.nbrs.len()];
        for u in 0..n {
            for i in self.offsets[u]..self.offsets[u + 1] {
                let v = self.nbrs[i] as usize;
                nbrs[cursor[v]] = u as VertexId;
                weights[cursor[v]] = self.weights[i];
                cursor[v] += 1;
            }
        }
        Csr { offsets, nbrs, weights }
    }
}

impl Graph {
    /// Builds a graph from an edge stream. `emit` is invoked twice (a
    /// counting pass and a filling pass) and must replay the same edges.
    pub fn from_edge_fn<F>(n: usize, emit: F) -> Graph
    where
        F: Fn(&mut dyn FnMut(VertexId, VertexId, EdgeWeight)),
    {
        // Rows keyed by target, in arbitrary order; two transposes sort both sides.
        let mut offsets = vec![0usize; n + 1];
        emit(&mut |_, to, _| offsets[to as usize + 1] += 1);
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let total = offsets[n];
        let mut nbrs = vec![0; total];
        let mut weights = vec![0; total];
        let mut cursor = offsets.clone();
        emit(&mut |from, to, w| {
            let slot = &mut cursor[to as usize];
            nbrs[*slot] = from;
            weights[*slot] = w;
            *slot += 1;
        });
        drop(cursor);
        let unsorted_in = Csr { offsets, nbrs, weights };
        let out = unsorted_in.transpose(n);
        drop(unsorted_in);
        let inc = out.transpose(n);
        Graph {
            n,
            out_offsets: out.offsets,
            out_nbrs: out.nbrs,
            out_weights: out.weights,
            in_offsets: inc.offsets,
            in_nbrs: inc.nbrs,
            in_weights: inc.weights,
        }
    }

    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId, EdgeWeight)]) -> Graph {
        Graph::from_edge_fn(n, |emit| {
            for &(u, v, w) in edges {
                emit(u, v, w);
            }
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.out_nbrs.len()
    }

    #[inline]
    pub fn out_neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.out_nbrs[self.out_offsets[v as usize]..self.out_offsets[v as usize + 1]]
    }

    #[inline]
    pub fn out_weights(&self, v: VertexId) -> &[EdgeWeight] {
        &self.out_weights[self.out_offsets[v as usize]..self.out_offsets[v as usize + 1]]
    }

    #[inline]
    pub fn in_neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.in_nbrs[self.in_offsets[v as usize]..self.in_offsets[v as usize + 1]]
    }

    #[inline]
    pub fn in_weights(&self, v: VertexId) -> &[EdgeWeight] {
        &self.in_weights[self.in_offsets[v as usize]..self.in_offsets[v as usize + 1]]
    }

    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = (VertexId, EdgeWeight)> + '_ {
        self.out_neighbors(v)
            .iter()
            .copied()
            .zip(self.out_weights(v).iter().copied())
    }

    pub fn in_edges(&self, v: VertexId) -> impl Iterator<Item = (VertexId, EdgeWeight)> + '_ {
        self.in_neighbors(v)
            .iter()
            .copied()
            .zip(self.in_weights(v).iter().copied())
    }

    pub fn is_neighbor(&self, v: VertexId, u: VertexId) -> bool {
        self.out_neighbors(v).binary_search(&u).is_ok() || self.in_neighbors(v).binary_search(&u).is_ok()
    }

    pub fn weight(&self, from: VertexId, to: VertexId) -> Option<EdgeWeight> {
        let row = self.out_neighbors(from);
        row.binary_search(&to)
            .ok()
            .map(|i| self.out_weights[self.out_offsets[from as usize] + i])
    }

    /// Rewrites the weight of edge `from → to` on both adjacency sides.
    /// Returns `false` if the edge does not exist.
    pub fn set_weight(&mut self, from: VertexId, to: VertexId, w: EdgeWeight) -> bool {
        let Ok(i) = self.out_neighbors(from).binary_search(&to) else {
            return false;
        };
        self.out_weights[self.out_offsets[from as usize] + i] = w;
        let j = self
            .in_neighbors(to)
            .binary_search(&from)
            .expect("in-adjacency mirrors out-adjacency");
        self.in_weights[self.in_offsets[to as usize] + j] = w;
        true
    }

    /// Largest positive weight on an incoming and an outgoing edge of every
    /// vertex (0 when there is none).
    pub fn max_in_out_weights(&self) -> Vec<(EdgeWeight, EdgeWeight)> {
        (0..self.n as VertexId)
            .into_par_iter()
            .map(|v| {
                let max_in = self.in_weights(v).iter().copied().max().unwrap_or(0);
                let max_out = self.out_weights(v).iter().copied().max().unwrap_or(0);
                (max_in, max_out)
            })
            .collect()
    }
}
