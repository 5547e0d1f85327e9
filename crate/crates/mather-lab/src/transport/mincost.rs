//! Exact discrete transport by successive shortest paths with potentials.
//!
//! Masses are integer units (the caller scales probability weights), costs
//! are nonnegative reals. Tie-breaking is lowest-index everywhere, so the
//! solve is deterministic for a fixed input.

use std::collections::BTreeMap;

pub(crate) struct MinCostSolution {
    /// (source, sink, units) with positive units, sorted by (source, sink).
    pub flows: Vec<(u32, u32, u64)>,
    pub augmentations: u64,
}

/// Solve the balanced transportation problem. `supplies` and `demands`
/// must have equal positive sums; zero entries are allowed.
pub(crate) fn solve_transport(
    n_src: usize,
    n_dst: usize,
    cost: &dyn Fn(usize, usize) -> f64,
    supplies: &[u64],
    demands: &[u64],
) -> MinCostSolution {
    assert_eq!(supplies.len(), n_src);
    assert_eq!(demands.len(), n_dst);
    debug_assert_eq!(
        supplies.iter().sum::<u64>(),
        demands.iter().sum::<u64>(),
        "unbalanced transport instance"
    );
    let v = n_src + n_dst;
    let mut remaining_supply = supplies.to_vec();
    let mut remaining_demand = demands.to_vec();
    // flow_by_sink[j]: source -> units, the backward residual arcs of sink j.
    let mut flow_by_sink: Vec<BTreeMap<u32, u64>> = vec![BTreeMap::new(); n_dst];
    let mut potential = vec![0.0f64; v];
    let mut augmentations = 0u64;

    let mut dist = vec![f64::INFINITY; v];
    let mut parent = vec![usize::MAX; v];
    let mut done = vec![false; v];

    loop {
        let total_left: u64 = remaining_supply.iter().sum();
        if total_left == 0 {
            break;
        }
        // Dijkstra over reduced costs from every source with supply left.
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        parent.iter_mut().for_each(|p| *p = usize::MAX);
        done.iter_mut().for_each(|d| *d = false);
        for (i, &s) in remaining_supply.iter().enumerate() {
            if s > 0 {
                dist[i] = 0.0;
            }
        }
        for _ in 0..v {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for (node, &d) in dist.iter().enumerate() {
                if !done[node] && d < best {
                    best = d;
                    u = node;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            if u < n_src {
                // Forward arcs: source u -> every sink, capacity unbounded.
                for j in 0..n_dst {
                    let node = n_src + j;
                    if done[node] {
                        continue;
                    }
                    // Reduced cost, clamped against rounding noise.
                    let rc = (cost(u, j) + potential[u] - potential[node]).max(0.0);
                    let nd = dist[u] + rc;
                    if nd < dist[node] {
                        dist[node] = nd;
                        parent[node] = u;
                    }
                }
            } else {
                // Backward arcs: sink -> sources that currently feed it.
                let j = u - n_src;
                for &i in flow_by_sink[j].keys() {
                    let i = i as usize;
                    if done[i] {
                        continue;
                    }
                    let rc = (-cost(i, j) + potential[u] - potential[i]).max(0.0);
                    let nd = dist[u] + rc;
                    if nd < dist[i] {
                        dist[i] = nd;
                        parent[i] = u;
                    }
                }
            }
        }
        // Cheapest sink with unmet demand (lowest index on ties).
        let mut target = usize::MAX;
        let mut best = f64::INFINITY;
        for (j, &d) in remaining_demand.iter().enumerate() {
            let node = n_src + j;
            if d > 0 && dist[node] < best {
                best = dist[node];
                target = node;
            }
        }
        assert!(target != usize::MAX, "balanced instance must stay feasible");
        // Walk the path backwards to find the bottleneck.
        let mut bottleneck = remaining_demand[target - n_src];
        let mut node = target;
        while parent[node] != usize::MAX {
            let p = parent[node];
            if p >= n_src && node < n_src {
                // Backward arc (sink p -> source node): capacity is the flow.
                let units = flow_by_sink[p - n_src][&(node as u32)];
                bottleneck = bottleneck.min(units);
            }
            node = p;
        }
        bottleneck = bottleneck.min(remaining_supply[node]);
        assert!(bottleneck > 0);
        // Apply the augmentation.
        remaining_supply[node] -= bottleneck;
        remaining_demand[target - n_src] -= bottleneck;
        let mut cur = target;
        while parent[cur] != usize::MAX {
            let p = parent[cur];
            if p < n_src {
                // Forward arc p -> cur.
                *flow_by_sink[cur - n_src].entry(p as u32).or_insert(0) += bottleneck;
            } else {
                // Backward arc p(sink) -> cur(source): cancel flow.
                let j = p - n_src;
                let slot = flow_by_sink[j].get_mut(&(cur as u32)).unwrap();
                *slot -= bottleneck;
                if *slot == 0 {
                    flow_by_sink[j].remove(&(cur as u32));
                }
            }
            cur = p;
        }
        // Johnson potential update keeps reduced costs nonnegative.
        for (node, p) in potential.iter_mut().enumerate() {
            if dist[node].is_finite() {
                *p += dist[node];
            }
        }
        augmentations += 1;
    }

    let mut flows = Vec::new();
    for (j, feeds) in flow_by_sink.iter().enumerate() {
        for (&i, &units) in feeds {
            flows.push((i, j as u32, units));
        }
    }
    flows.sort_unstable();
    MinCostSolution { flows, augmentations }
}
