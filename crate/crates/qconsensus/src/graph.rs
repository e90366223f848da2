//! Fixed undirected connected topologies with their incidence matrices,
//! signed/signless Laplacians, and the spectral quantities consumed by the
//! convergence-rate and error-bound formulas.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{jacobi_eigen, Mat};
use crate::rng::Rng;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("node count must be at least 2, got {0}")]
    TooFewNodes(usize),
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({0}, {1}) references a node outside 0..{2}")]
    NodeOutOfRange(usize, usize, usize),
    #[error("graph is disconnected (node {0} unreachable from node 0)")]
    Disconnected(usize),
    #[error("infeasible edge count m={m} for n={n} (need n-1 <= m <= n(n-1)/2)")]
    InfeasibleEdgeCount { n: usize, m: usize },
}

/// Undirected connected graph with a fixed arc enumeration.
///
/// Arcs are edge-major: edge `e = (i, j)` with `i < j` contributes arc `2e`
/// as `i -> j` and arc `2e + 1` as `j -> i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

/// Serialization shape for graph files: `{"n": int, "edges": [[i, j], ...]}`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn build(n: usize, edge_list: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewNodes(n));
        }
        let mut edges = Vec::with_capacity(edge_list.len());
        for &(a, b) in edge_list {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if a >= n || b >= n {
                return Err(GraphError::NodeOutOfRange(a, b, n));
            }
            edges.push((a.min(b), a.max(b)));
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in &edges {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for adj in &mut neighbors {
            adj.sort_unstable();
        }
        let g = Graph { n, edges, neighbors };
        if let Some(unreached) = g.first_unreachable() {
            return Err(GraphError::Disconnected(unreached));
        }
        Ok(g)
    }

    pub fn from_file(file: GraphFile) -> Result<Self, GraphError> {
        Graph::build(file.n, &file.edges)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            n: self.n,
            edges: self.edges.clone(),
        }
    }

    pub fn star(n: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
        Graph::build(n, &edges)
    }

    pub fn complete(n: usize) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j));
            }
        }
        Graph::build(n, &edges)
    }

    /// Random connected graph with exactly `m` edges: start from the complete
    /// graph and remove uniformly chosen edges, re-drawing whenever a removal
    /// would disconnect the graph.
    pub fn random_connected(n: usize, m: usize, rng: &mut Rng) -> Result<Self, GraphError> {
        let max_m = n * (n - 1) / 2;
        if n < 2 || m + 1 < n || m > max_m {
            return Err(GraphError::InfeasibleEdgeCount { n, m });
        }
        let mut edges = Vec::with_capacity(max_m);
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j));
            }
        }
        while edges.len() > m {
            let idx = rng.next_below(edges.len() as u64) as usize;
            let removed = edges.swap_remove(idx);
            if !connected(n, &edges) {
                edges.push(removed);
            }
        }
        Graph::build(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    /// Directed arcs in the fixed enumeration order.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges
            .iter()
            .flat_map(|&(i, j)| [(i, j), (j, i)])
    }

    fn first_unreachable(&self) -> Option<usize> {
        let mut seen = vec![false; self.n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &self.neighbors[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.iter().position(|&s| !s)
    }

    pub fn matrices(&self) -> GraphMatrices {
        let n = self.n;
        let two_m = 2 * self.m();
        let mut mminus = Mat::zeros(n, two_m);
        let mut mplus = Mat::zeros(n, two_m);
        for (l, (i, j)) in self.arcs().enumerate() {
            mminus[(i, l)] = 1.0;
            mminus[(j, l)] = -1.0;
            mplus[(i, l)] = 1.0;
            mplus[(j, l)] = 1.0;
        }
        let lminus = mminus.matmul(&mminus.transpose()).scale(0.5);
        let lplus = mplus.matmul(&mplus.transpose()).scale(0.5);
        let mut w = Mat::zeros(n, n);
        for i in 0..n {
            w[(i, i)] = self.degree(i) as f64;
        }
        GraphMatrices {
            mminus,
            mplus,
            lminus,
            lplus,
            w,
        }
    }

    pub fn spectral(&self) -> SpectralInfo {
        let m = self.matrices();
        let (vals_minus, _) = jacobi_eigen(&m.lminus);
        let (vals_plus, _) = jacobi_eigen(&m.lplus);
        SpectralInfo {
            lambda2_minus: vals_minus[1],
            lambdan_minus: *vals_minus.last().unwrap(),
            lambdan_plus: *vals_plus.last().unwrap(),
        }
    }
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(i, j) in edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}

/// Incidence matrices, Laplacians, and degree matrix of a graph.
pub struct GraphMatrices {
    /// Oriented incidence, n x 2m.
    pub mminus: Mat,
    /// Unoriented incidence, n x 2m.
    pub mplus: Mat,
    /// Signed Laplacian (degree minus adjacency).
    pub lminus: Mat,
    /// Signless Laplacian (degree plus adjacency).
    pub lplus: Mat,
    /// Degree matrix.
    pub w: Mat,
}

/// Eigenvalues of the Laplacians entering the rate and bound formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralInfo {
    /// Second-smallest eigenvalue of the signed Laplacian (algebraic connectivity).
    pub lambda2_minus: f64,
    /// Largest eigenvalue of the signed Laplacian.
    pub lambdan_minus: f64,
    /// Largest eigenvalue of the signless Laplacian.
    pub lambdan_plus: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;

    fn path3() -> Graph {
        Graph::build(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn build_path_graph() {
        let g = path3();
        assert_eq!(g.m(), 2);
        assert_eq!(
            (g.degree(0), g.degree(1), g.degree(2)),
            (1, 2, 1)
        );
    }

    #[test]
    fn build_rejects_bad_inputs() {
        assert_eq!(
            Graph::build(3, &[(0, 1)]),
            Err(GraphError::Disconnected(2))
        );
        assert_eq!(
            Graph::build(2, &[(0, 0), (0, 1)]),
            Err(GraphError::SelfLoop(0))
        );
        assert_eq!(
            Graph::build(2, &[(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert_eq!(Graph::build(1, &[]), Err(GraphError::TooFewNodes(1)));
    }

    #[test]
    fn complete_graph_degrees() {
        let g = Graph::complete(4).unwrap();
        assert_eq!(g.m(), 6);
        assert!((0..4).all(|i| g.degree(i) == 3));
    }

    #[test]
    fn star_shape() {
        let g = Graph::star(5).unwrap();
        assert_eq!(g.m(), 4);
        assert_eq!(g.degree(0), 4);
        assert!((1..5).all(|i| g.degree(i) == 1));
    }

    #[test]
    fn random_connected_is_connected_and_deterministic() {
        let g1 = Graph::random_connected(5, 6, &mut Rng::seed_from(7)).unwrap();
        assert_eq!(g1.m(), 6);
        // independent BFS connectivity check
        assert!(connected(5, g1.edges()));
        let g2 = Graph::random_connected(5, 6, &mut Rng::seed_from(7)).unwrap();
        assert_eq!(g1.edges(), g2.edges());
        assert!(Graph::random_connected(5, 3, &mut Rng::seed_from(1)).is_err());
        assert!(Graph::random_connected(5, 11, &mut Rng::seed_from(1)).is_err());
    }

    #[test]
    fn path_laplacians() {
        let m = path3().matrices();
        let want_minus = [[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]];
        let want_plus = [[1.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.lminus[(i, j)], want_minus[i][j]);
                assert_eq!(m.lplus[(i, j)], want_plus[i][j]);
            }
        }
    }

    #[test]
    fn laplacian_identities() {
        for g in [path3(), Graph::complete(4).unwrap(), Graph::star(6).unwrap()] {
            let m = g.matrices();
            let half_mm = m.mminus.matmul(&m.mminus.transpose()).scale(0.5);
            assert!(half_mm.max_abs_diff(&m.lminus) < 1e-12);
            let half_pp = m.mplus.matmul(&m.mplus.transpose()).scale(0.5);
            assert!(half_pp.max_abs_diff(&m.lplus) < 1e-12);
            // W = (Lminus + Lplus) / 2, row sums of Lminus are zero
            for i in 0..g.n() {
                let mut row_sum = 0.0;
                for j in 0..g.n() {
                    assert!(
                        ((m.lminus[(i, j)] + m.lplus[(i, j)]) / 2.0 - m.w[(i, j)]).abs() < 1e-12
                    );
                    row_sum += m.lminus[(i, j)];
                }
                assert!(row_sum.abs() < 1e-12);
            }
            // handshake
            let deg_sum: usize = (0..g.n()).map(|i| g.degree(i)).sum();
            assert_eq!(deg_sum, 2 * g.m());
        }
    }

    #[test]
    fn spectral_path_and_triangle() {
        // path 0-1-2: spectrum of Lminus is {0, 1, 3}
        let sp = path3().spectral();
        assert!((sp.lambda2_minus - 1.0).abs() < 1e-10);
        assert!((sp.lambdan_minus - 3.0).abs() < 1e-10);
        // K3: Lminus = 3I - J has spectrum {0, 3, 3}; Lplus = I + J has {1, 1, 4}
        let sp = Graph::complete(3).unwrap().spectral();
        assert!((sp.lambda2_minus - 3.0).abs() < 1e-10);
        assert!((sp.lambdan_minus - 3.0).abs() < 1e-10);
        assert!((sp.lambdan_plus - 4.0).abs() < 1e-10);
    }

    #[test]
    fn laplacians_positive_semidefinite_and_nullspace() {
        let mut rng = Rng::seed_from(99);
        for seed in 0..5u64 {
            let g = Graph::random_connected(8, 12 + seed as usize, &mut Rng::seed_from(seed))
                .unwrap();
            let m = g.matrices();
            for _ in 0..100 {
                let x: Vec<f64> = (0..g.n()).map(|_| rng.next_normal()).collect();
                let lx = m.lminus.mat_vec(&x);
                assert!(crate::linalg::dot(&x, &lx) >= -1e-9);
                let px = m.lplus.mat_vec(&x);
                assert!(crate::linalg::dot(&x, &px) >= -1e-9);
            }
            // nullspace of Lminus is exactly span{1}: second eigenvalue positive,
            // constant vector annihilated
            let sp = g.spectral();
            assert!(sp.lambda2_minus > 1e-8);
            let ones = vec![1.0; g.n()];
            assert!(norm2(&m.lminus.mat_vec(&ones)) < 1e-10);
        }
    }

    #[test]
    fn graph_json_round_trip() {
        let g = path3();
        let json = serde_json::to_string(&g.to_file()).unwrap();
        let file: GraphFile = serde_json::from_str(&json).unwrap();
        let back = Graph::from_file(file).unwrap();
        assert_eq!(back, g);
    }
}
