use crate::tournament::{dominance_graph, CandidateId, DominanceGraph, WeightedTournament};

/// Strongly connected components (iterative Tarjan). Returns a component
/// index per candidate; indices are assigned in reverse topological order.
pub fn strongly_connected_components(g: &DominanceGraph) -> Vec<usize> {
    const UNVISITED: usize = usize::MAX;
    let m = g.candidate_count();
    let mut index = vec![UNVISITED; m];
    let mut low = vec![0usize; m];
    let mut on_stack = vec![false; m];
    let mut comp = vec![UNVISITED; m];
    let mut stack: Vec<CandidateId> = Vec::new();
    let mut call: Vec<(CandidateId, usize)> = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;

    for root in 0..m as CandidateId {
        if index[root as usize] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root as usize] = next_index;
        low[root as usize] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some(&mut (v, ref mut child)) = call.last_mut() {
            let succ = g.successors(v);
            if *child < succ.len() {
                let u = succ[*child];
                *child += 1;
                if index[u as usize] == UNVISITED {
                    index[u as usize] = next_index;
                    low[u as usize] = next_index;
                    next_index += 1;
                    stack.push(u);
                    on_stack[u as usize] = true;
                    call.push((u, 0));
                } else if on_stack[u as usize] {
                    low[v as usize] = low[v as usize].min(index[u as usize]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent as usize] = low[parent as usize].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                loop {
                    let w = stack.pop().expect("component root on stack");
                    on_stack[w as usize] = false;
                    comp[w as usize] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    comp
}

/// Union of the SCCs of the dominance graph that have no incoming edge from
/// outside, in ascending id order.
pub fn schwartz_set(t: &WeightedTournament) -> Vec<CandidateId> {
    let g = dominance_graph(t);
    let comp = strongly_connected_components(&g);
    let count = comp.iter().copied().max().map_or(0, |c| c + 1);
    let mut dominated = vec![false; count];
    for (a, b) in g.edges() {
        if comp[a as usize] != comp[b as usize] {
            dominated[comp[b as usize]] = true;
        }
    }
    (0..t.candidate_count() as CandidateId)
        .filter(|&c| !dominated[comp[c as usize]])
        .collect()
}
