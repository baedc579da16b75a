//! Exact min-cost max-flow via successive shortest augmenting paths with
//! Johnson potentials. Capacities and costs are integers, so every arc
//! flow is integral and the optimum is exact.

/// Sentinel for "no parent edge".
const NONE: usize = usize::MAX;

pub struct MinCostFlow {
    adjacency: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<i64>,
}

impl MinCostFlow {
    pub fn new(num_nodes: usize) -> Self {
        MinCostFlow {
            adjacency: vec![Vec::new(); num_nodes],
            to: Vec::new(),
            cap: Vec::new(),
            cost: Vec::new(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    /// Adds a directed arc and its residual twin; returns the arc id.
    /// Costs must be nonnegative.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: i64) -> usize {
        debug_assert!(cost >= 0);
        let id = self.to.len();
        self.adjacency[from].push(id);
        self.to.push(to);
        self.cap.push(cap);
        self.cost.push(cost);
        self.adjacency[to].push(id + 1);
        self.to.push(from);
        self.cap.push(0);
        self.cost.push(-cost);
        id
    }

    /// Units routed on the forward arc `id`.
    pub fn flow_on(&self, id: usize) -> i64 {
        self.cap[id ^ 1]
    }

    /// Pushes up to `limit` units from `source` to `sink`; returns
    /// `(flow, total_cost)`.
    pub fn solve(&mut self, source: usize, sink: usize, limit: i64) -> (i64, i64) {
        let n = self.num_nodes();
        let mut potential = vec![0i64; n];
        let mut total_flow = 0i64;
        let mut total_cost = 0i64;
        let mut dist = vec![i64::MAX; n];
        let mut parent_edge = vec![NONE; n];
        while total_flow < limit {
            dist.iter_mut().for_each(|d| *d = i64::MAX);
            parent_edge.iter_mut().for_each(|p| *p = NONE);
            dist[source] = 0;
            let mut heap = std::collections::BinaryHeap::new();
            heap.push(std::cmp::Reverse((0i64, source)));
            while let Some(std::cmp::Reverse((d, u))) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &e in &self.adjacency[u] {
                    if self.cap[e] <= 0 {
                        continue;
                    }
                    let v = self.to[e];
                    let nd = d + self.cost[e] + potential[u] - potential[v];
                    if nd < dist[v] {
                        dist[v] = nd;
                        parent_edge[v] = e;
                        heap.push(std::cmp::Reverse((nd, v)));
                    }
                }
            }
            if dist[sink] == i64::MAX {
                break;
            }
            for (v, p) in potential.iter_mut().enumerate() {
                if dist[v] < i64::MAX {
                    *p += dist[v];
                }
            }
            let mut bottleneck = limit - total_flow;
            let mut v = sink;
            while v != source {
                let e = parent_edge[v];
                bottleneck = bottleneck.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = sink;
            while v != source {
                let e = parent_edge[v];
                self.cap[e] -= bottleneck;
                self.cap[e ^ 1] += bottleneck;
                total_cost += bottleneck * self.cost[e];
                v = self.to[e ^ 1];
            }
            total_flow += bottleneck;
        }
        (total_flow, total_cost)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn routes_cheapest_path_first() {
        // Two parallel paths of cost 1 and 3, capacity 1 each.
        let mut g = MinCostFlow::new(4);
        let cheap = g.add_edge(0, 1, 1, 1);
        let dear = g.add_edge(0, 2, 1, 3);
        g.add_edge(1, 3, 1, 0);
        g.add_edge(2, 3, 1, 0);
        let (flow, cost) = g.solve(0, 3, 1);
        assert_eq!((flow, cost), (1, 1));
        assert_eq!(g.flow_on(cheap), 1);
        assert_eq!(g.flow_on(dear), 0);
    }

    #[test]
    fn saturates_to_limit() {
        let mut g = MinCostFlow::new(3);
        g.add_edge(0, 1, 5, 2);
        g.add_edge(1, 2, 3, 1);
        let (flow, cost) = g.solve(0, 2, 10);
        assert_eq!(flow, 3);
        assert_eq!(cost, 9);
    }

    #[test]
    fn conservation_on_random_bipartite_instances() {
        // Assignment-shaped networks: every left node out-degree 1,
        // every right node in-degree 1 after solving.
        let mut rng = crate::mt19937::mt_seed(77);
        for _ in 0..25 {
            let n = 2 + rng.next_below(5);
            let mut g = MinCostFlow::new(2 + 2 * n);
            let (s, t) = (0, 1);
            let mut left_edges = Vec::new();
            for i in 0..n {
                left_edges.push(g.add_edge(s, 2 + i, 1, 0));
                g.add_edge(2 + n + i, t, 1, 0);
            }
            let mut cross = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    cross.push(g.add_edge(2 + i, 2 + n + j, 1, rng.next_below(1000) as i64));
                }
            }
            let (flow, _) = g.solve(s, t, n as i64);
            assert_eq!(flow, n as i64);
            for i in 0..n {
                let out: i64 = (0..n).map(|j| g.flow_on(cross[i * n + j])).sum();
                assert_eq!(out, 1);
                let into: i64 = (0..n).map(|a| g.flow_on(cross[a * n + i])).sum();
                assert_eq!(into, 1);
            }
        }
    }

    #[test]
    fn matches_brute_force_on_small_assignments() {
        let mut rng = crate::mt19937::mt_seed(123);
        for _ in 0..20 {
            let n = 2 + rng.next_below(4); // up to 5x5
            let costs: Vec<Vec<i64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.next_below(100) as i64).collect())
                .collect();
            let mut g = MinCostFlow::new(2 + 2 * n);
            for i in 0..n {
                g.add_edge(0, 2 + i, 1, 0);
                g.add_edge(2 + n + i, 1, 1, 0);
                for j in 0..n {
                    g.add_edge(2 + i, 2 + n + j, 1, costs[i][j]);
                }
            }
            let (flow, cost) = g.solve(0, 1, n as i64);
            assert_eq!(flow, n as i64);
            let best = brute_force_assignment(&costs);
            assert_eq!(cost, best);
        }
    }

    fn brute_force_assignment(costs: &[Vec<i64>]) -> i64 {
        fn recurse(costs: &[Vec<i64>], row: usize, used: &mut Vec<bool>) -> i64 {
            if row == costs.len() {
                return 0;
            }
            let mut best = i64::MAX;
            for j in 0..costs.len() {
                if !used[j] {
                    used[j] = true;
                    best = best.min(costs[row][j] + recurse(costs, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        recurse(costs, 0, &mut vec![false; costs.len()])
    }
}
