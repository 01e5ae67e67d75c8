//! Graph construction: density filtering, connection strategies, and the
//! symmetric normalization used by the propagation rule.
//!
//! Adjacency is binary and symmetric with a zero diagonal; self-loops enter
//! only at normalization time, where the stored matrix becomes
//! `D^{-1/2} (A + I) D^{-1/2}` with `D` the degree of `A + I`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
#[cfg(feature = "serde")]
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::dataset::NodeTable;
use crate::error::{Error, Result};
use crate::numerics::CsrMatrix;
use crate::rng::{stream, Stream};
use crate::spatial::KdTree;

/// How nodes are wired together.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectionStrategy {
    /// Undirected edges to the k geometrically closest nodes.
    Knn { k: usize },
    /// One edge per node to its nearest node in each of the t preceding
    /// time steps.
    Temporal { t: usize },
    /// Union of the two edge sets.
    Hybrid { k: usize, t: usize },
}

impl ConnectionStrategy {
    /// Parses the flag syntax: `knn:K`, `temporal:T`, or `hybrid:K,T`.
    pub fn parse(text: &str) -> Result<Self> {
        let err = || Error::Parameter(format!("unrecognized strategy `{text}`"));
        let (kind, args) = text.split_once(':').ok_or_else(err)?;
        let parse_pos = |s: &str| -> Result<usize> {
            match s.trim().parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(Error::Parameter(format!("strategy parameter `{s}` must be a positive integer"))),
            }
        };
        match kind.trim() {
            "knn" => Ok(ConnectionStrategy::Knn { k: parse_pos(args)? }),
            "temporal" => Ok(ConnectionStrategy::Temporal { t: parse_pos(args)? }),
            "hybrid" => {
                let (k, t) = args.split_once(',').ok_or_else(err)?;
                Ok(ConnectionStrategy::Hybrid { k: parse_pos(k)?, t: parse_pos(t)? })
            }
            _ => Err(err()),
        }
    }
}

impl core::fmt::Display for ConnectionStrategy {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ConnectionStrategy::Knn { k } => write!(f, "knn:{k}"),
            ConnectionStrategy::Temporal { t } => write!(f, "temporal:{t}"),
            ConnectionStrategy::Hybrid { k, t } => write!(f, "hybrid:{k},{t}"),
        }
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for ConnectionStrategy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for ConnectionStrategy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        ConnectionStrategy::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Node set plus symmetric binary adjacency; `norm_adjacency` is populated
/// by [`normalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    adj: CsrMatrix,
    norm: Option<CsrMatrix>,
}

impl Graph {
    /// Builds a graph from undirected edge pairs. Pairs may appear in either
    /// orientation and repeat; self-loops are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut set = BTreeSet::new();
        for &(i, j) in edges {
            if i == j {
                return Err(Error::Parameter(format!("self-loop at node {i}")));
            }
            if i >= n || j >= n {
                return Err(Error::Parameter(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            set.insert((i.min(j), i.max(j)));
        }
        Ok(Graph::from_edge_set(n, &set))
    }

    fn from_edge_set(n: usize, edges: &BTreeSet<(usize, usize)>) -> Graph {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(i, j) in edges {
            rows[i].push(j);
            rows[j].push(i);
        }
        let entries: Vec<Vec<(usize, f64)>> = rows
            .into_iter()
            .map(|mut r| {
                r.sort_unstable();
                r.into_iter().map(|j| (j, 1.0)).collect()
            })
            .collect();
        let adj = CsrMatrix::from_row_entries(n, n, &entries).expect("sorted unique rows");
        Graph { n, adj, norm: None }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn adjacency(&self) -> &CsrMatrix {
        &self.adj
    }

    pub fn norm_adjacency(&self) -> Option<&CsrMatrix> {
        self.norm.as_ref()
    }

    /// Degree in `A`, without the implicit self-loop.
    pub fn degree(&self, i: usize) -> usize {
        self.adj.row_iter(i).count()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.nnz() / 2
    }

    /// Undirected edges as `(i, j)` with `i < j`, sorted.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for i in 0..self.n {
            for (j, _) in self.adj.row_iter(i) {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Randomly drops unlabeled nodes per time step until roughly `filter_pct`
/// percent of each step's nodes are gone, while every labeled node survives
/// and each step keeps at least `min(min_per_step, step size)` nodes.
/// Returns the filtered table and the kept original row indices, in order.
pub fn filter_nodes_indexed(
    table: &NodeTable,
    filter_pct: f64,
    min_per_step: usize,
    seed: u64,
) -> Result<(NodeTable, Vec<usize>)> {
    if !(0.0..=100.0).contains(&filter_pct) {
        return Err(Error::Parameter(format!("filter_pct {filter_pct} outside [0, 100]")));
    }
    table.validate()?;
    let n = table.n();
    if filter_pct == 0.0 {
        return Ok((table.clone(), (0..n).collect()));
    }

    let mut by_step: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &s) in table.time_steps.iter().enumerate() {
        by_step.entry(s).or_default().push(i);
    }

    let mut rng = stream(seed, Stream::Filter);
    let mut dropped = vec![false; n];
    for idxs in by_step.values() {
        let step_len = idxs.len();
        let target = libm::round(filter_pct / 100.0 * step_len as f64) as usize;
        let floor = min_per_step.min(step_len);
        let mut unlabeled: Vec<usize> = idxs.iter().copied().filter(|&i| table.labels[i].is_none()).collect();
        let max_drop = unlabeled.len().min(step_len - floor);
        let drop_n = target.min(max_drop);
        for pick in 0..drop_n {
            let j = rng.gen_range(pick..unlabeled.len());
            unlabeled.swap(pick, j);
            dropped[unlabeled[pick]] = true;
        }
    }

    let kept: Vec<usize> = (0..n).filter(|&i| !dropped[i]).collect();
    Ok((table.select_rows(&kept), kept))
}

/// [`filter_nodes_indexed`] without the index map.
pub fn filter_nodes(
    table: &NodeTable,
    filter_pct: f64,
    min_per_step: usize,
    seed: u64,
) -> Result<NodeTable> {
    filter_nodes_indexed(table, filter_pct, min_per_step, seed).map(|(t, _)| t)
}

/// Undirected kNN graph: each node gains an edge to its k nearest nodes by
/// Euclidean distance, ties to the lower id; the union is symmetrized, so
/// degrees may exceed k.
pub fn connect_knn(table: &NodeTable, k: usize) -> Result<Graph> {
    table.validate()?;
    let n = table.n();
    if k < 1 {
        return Err(Error::Parameter("k must be >= 1".into()));
    }
    if k >= n {
        return Err(Error::Parameter(format!("k = {k} needs at least k+1 = {} nodes, table has {n}", k + 1)));
    }
    let tree = KdTree::build(&table.positions);
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 0..n {
        for j in tree.knn(&table.positions[i], k, i) {
            edges.insert((i.min(j), i.max(j)));
        }
    }
    Ok(Graph::from_edge_set(n, &edges))
}

/// Directed temporal partner list before symmetrization: for each node at
/// step s and each offset o in 1..=t with a nonempty step s-o, the
/// geometrically nearest node in that step (ties to the lower id).
pub fn temporal_partners(table: &NodeTable, t: usize) -> Vec<(usize, usize)> {
    let mut by_step: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &s) in table.time_steps.iter().enumerate() {
        by_step.entry(s).or_default().push(i);
    }
    let mut out = Vec::new();
    for v in 0..table.n() {
        let s = table.time_steps[v];
        let p = table.positions[v];
        for o in 1..=t {
            let o = o as u32;
            if o > s {
                break;
            }
            let Some(prev) = by_step.get(&(s - o)) else { continue };
            let mut best: Option<(f64, usize)> = None;
            for &u in prev {
                let q = table.positions[u];
                let dx = p[0] - q[0];
                let dy = p[1] - q[1];
                let dz = p[2] - q[2];
                let d2 = dx * dx + dy * dy + dz * dz;
                if best.is_none_or(|(bd, bu)| d2 < bd || (d2 == bd && u < bu)) {
                    best = Some((d2, u));
                }
            }
            if let Some((_, u)) = best {
                out.push((v, u));
            }
        }
    }
    out
}

/// Temporal graph: the symmetrized union of [`temporal_partners`]. Edges are
/// bidirectional, so nodes also collect links from later steps.
pub fn connect_temporal(table: &NodeTable, t: usize) -> Result<Graph> {
    table.validate()?;
    if t < 1 {
        return Err(Error::Parameter("t must be >= 1".into()));
    }
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (v, u) in temporal_partners(table, t) {
        edges.insert((v.min(u), v.max(u)));
    }
    Ok(Graph::from_edge_set(table.n(), &edges))
}

/// Hybrid graph: union of the kNN and temporal edge sets.
pub fn connect_hybrid(table: &NodeTable, k: usize, t: usize) -> Result<Graph> {
    let knn = connect_knn(table, k)?;
    let temporal = connect_temporal(table, t)?;
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    edges.extend(knn.edge_list());
    edges.extend(temporal.edge_list());
    Ok(Graph::from_edge_set(table.n(), &edges))
}

/// Builds the graph for a strategy.
pub fn connect(table: &NodeTable, strategy: ConnectionStrategy) -> Result<Graph> {
    match strategy {
        ConnectionStrategy::Knn { k } => connect_knn(table, k),
        ConnectionStrategy::Temporal { t } => connect_temporal(table, t),
        ConnectionStrategy::Hybrid { k, t } => connect_hybrid(table, k, t),
    }
}

/// Populates `norm_adjacency = D^{-1/2} (A + I) D^{-1/2}`. Every stored
/// entry is `1/sqrt(deg_i * deg_j)` where `deg` counts the self-loop;
/// isolated nodes get the single diagonal entry 1.
pub fn normalize(graph: &Graph) -> Graph {
    let n = graph.n;
    let deg: Vec<f64> = (0..n).map(|i| graph.degree(i) as f64 + 1.0).collect();
    let inv_sqrt: Vec<f64> = deg.iter().map(|&d| 1.0 / libm::sqrt(d)).collect();
    let mut entries: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(graph.degree(i) + 1);
        let mut diag_placed = false;
        for (j, _) in graph.adj.row_iter(i) {
            if !diag_placed && j > i {
                row.push((i, inv_sqrt[i] * inv_sqrt[i]));
                diag_placed = true;
            }
            row.push((j, inv_sqrt[i] * inv_sqrt[j]));
        }
        if !diag_placed {
            row.push((i, inv_sqrt[i] * inv_sqrt[i]));
        }
        entries.push(row);
    }
    let norm = CsrMatrix::from_row_entries(n, n, &entries).expect("sorted rows with diagonal");
    Graph { n, adj: graph.adj.clone(), norm: Some(norm) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, SyntheticField, SyntheticSpec};
    use crate::numerics::DenseMatrix;

    fn line_table(xs: &[f64]) -> NodeTable {
        NodeTable {
            positions: xs.iter().map(|&x| [x, 0.0, 0.0]).collect(),
            time_steps: vec![0; xs.len()],
            features: DenseMatrix::from_rows(&vec![vec![1.0, 0.0]; xs.len()]).unwrap(),
            labels: vec![None; xs.len()],
            groups: vec![None; xs.len()],
        }
    }

    fn stepped_table(steps: &[u32], xs: &[f64]) -> NodeTable {
        NodeTable {
            positions: xs.iter().map(|&x| [x, 0.0, 0.0]).collect(),
            time_steps: steps.to_vec(),
            features: DenseMatrix::from_rows(&vec![vec![1.0, 0.0]; xs.len()]).unwrap(),
            labels: vec![None; xs.len()],
            groups: vec![None; xs.len()],
        }
    }

    #[test]
    fn strategy_parse_and_display() {
        assert_eq!(ConnectionStrategy::parse("knn:8").unwrap(), ConnectionStrategy::Knn { k: 8 });
        assert_eq!(
            ConnectionStrategy::parse("temporal:3").unwrap(),
            ConnectionStrategy::Temporal { t: 3 }
        );
        assert_eq!(
            ConnectionStrategy::parse("hybrid:6,2").unwrap(),
            ConnectionStrategy::Hybrid { k: 6, t: 2 }
        );
        assert!(ConnectionStrategy::parse("knn:0").is_err());
        assert!(ConnectionStrategy::parse("mesh:1").is_err());
        let s = ConnectionStrategy::Hybrid { k: 6, t: 2 };
        assert_eq!(ConnectionStrategy::parse(&alloc::format!("{s}")).unwrap(), s);
    }

    #[test]
    fn knn_forced_line() {
        let t = line_table(&[0.0, 1.0, 3.0]);
        let g = connect_knn(&t, 1).unwrap();
        assert_eq!(g.edge_list(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn knn_saturation_is_complete_graph() {
        let t = line_table(&[0.0, 1.0, 2.5, 4.0, 7.0]);
        let g = connect_knn(&t, 4).unwrap();
        assert_eq!(g.edge_count(), 10);
    }

    #[test]
    fn knn_k_too_large_errors() {
        let t = line_table(&[0.0, 1.0]);
        assert!(matches!(connect_knn(&t, 2), Err(Error::Parameter(_))));
    }

    #[test]
    fn temporal_single_step_is_empty() {
        let t = line_table(&[0.0, 1.0, 2.0]);
        let g = connect_temporal(&t, 4).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn temporal_two_steps_one_node_each() {
        let t = stepped_table(&[0, 1], &[0.0, 5.0]);
        let g = connect_temporal(&t, 1).unwrap();
        assert_eq!(g.edge_list(), vec![(0, 1)]);
    }

    #[test]
    fn temporal_skips_empty_steps() {
        // steps 0 and 3 populated; with t=3 the node at step 3 reaches back
        // to step 0 because steps 2 and 1 are empty.
        let t = stepped_table(&[0, 3], &[0.0, 1.0]);
        assert_eq!(temporal_partners(&t, 3), vec![(1, 0)]);
        assert_eq!(temporal_partners(&t, 2), vec![]);
    }

    #[test]
    fn temporal_out_degree_matches_nonempty_predecessors() {
        let spec = SyntheticSpec {
            n_time_steps: 10,
            points_per_step: 10,
            d: 2,
            label_ratio: 0.1,
            field: SyntheticField::Smooth,
            noise_sd: 0.0,
            seed: 3,
        };
        let table = generate_synthetic(&spec).unwrap();
        let partners = temporal_partners(&table, 3);
        let mut out_deg = vec![0usize; table.n()];
        for (v, _) in &partners {
            out_deg[*v] += 1;
        }
        for v in 0..table.n() {
            let expected = (table.time_steps[v] as usize).min(3);
            assert_eq!(out_deg[v], expected, "node {v} at step {}", table.time_steps[v]);
        }
    }

    #[test]
    fn hybrid_is_union() {
        let spec = SyntheticSpec {
            n_time_steps: 5,
            points_per_step: 6,
            d: 2,
            label_ratio: 0.2,
            field: SyntheticField::Smooth,
            noise_sd: 0.0,
            seed: 9,
        };
        let table = generate_synthetic(&spec).unwrap();
        let knn: BTreeSet<_> = connect_knn(&table, 3).unwrap().edge_list().into_iter().collect();
        let temporal: BTreeSet<_> =
            connect_temporal(&table, 2).unwrap().edge_list().into_iter().collect();
        let hybrid: BTreeSet<_> =
            connect_hybrid(&table, 3, 2).unwrap().edge_list().into_iter().collect();
        assert!(hybrid.is_superset(&knn));
        assert!(hybrid.is_superset(&temporal));
        assert!(hybrid.len() <= knn.len() + temporal.len());
        assert_eq!(hybrid, knn.union(&temporal).copied().collect());
    }

    #[test]
    fn adjacency_is_symmetric_with_zero_diagonal() {
        let spec = SyntheticSpec {
            n_time_steps: 6,
            points_per_step: 5,
            d: 2,
            label_ratio: 0.2,
            field: SyntheticField::Linear,
            noise_sd: 0.0,
            seed: 21,
        };
        let table = generate_synthetic(&spec).unwrap();
        for strategy in [
            ConnectionStrategy::Knn { k: 4 },
            ConnectionStrategy::Temporal { t: 2 },
            ConnectionStrategy::Hybrid { k: 4, t: 2 },
        ] {
            let g = connect(&table, strategy).unwrap();
            let a = g.adjacency();
            for i in 0..g.n() {
                assert_eq!(a.get(i, i), 0.0);
                for (j, v) in a.row_iter(i) {
                    assert_eq!(v, 1.0);
                    assert_eq!(a.get(j, i), 1.0, "missing reverse edge {j}->{i}");
                }
            }
        }
    }

    #[test]
    fn normalize_isolated_nodes_gives_identity() {
        let g = Graph::from_edge_set(2, &BTreeSet::new());
        let norm = normalize(&g);
        let s = norm.norm_adjacency().unwrap();
        assert_eq!(s.to_dense(), CsrMatrix::identity(2).to_dense());
    }

    #[test]
    fn normalize_single_edge_gives_half_everywhere() {
        let mut edges = BTreeSet::new();
        edges.insert((0, 1));
        let norm = normalize(&Graph::from_edge_set(2, &edges));
        let s = norm.norm_adjacency().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((s.get(i, j) - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn normalize_path_graph_hand_values() {
        // Path 0-1-2: degrees with self-loops are (2, 3, 2).
        let mut edges = BTreeSet::new();
        edges.insert((0, 1));
        edges.insert((1, 2));
        let norm = normalize(&Graph::from_edge_set(3, &edges));
        let s = norm.norm_adjacency().unwrap();
        let off = 1.0 / libm::sqrt(6.0);
        assert!((s.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((s.get(1, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.get(2, 2) - 0.5).abs() < 1e-15);
        assert!((s.get(0, 1) - off).abs() < 1e-15);
        assert!((s.get(1, 0) - off).abs() < 1e-15);
        assert!((s.get(1, 2) - off).abs() < 1e-15);
        assert_eq!(s.get(0, 2), 0.0);
    }

    fn filter_fixture() -> NodeTable {
        // two steps of 10 nodes each, one labeled node per step
        let mut positions = Vec::new();
        let mut steps = Vec::new();
        let mut labels = Vec::new();
        for s in 0..2u32 {
            for j in 0..10 {
                positions.push([j as f64, s as f64, 0.0]);
                steps.push(s);
                labels.push(if j == 0 { Some(0.01) } else { None });
            }
        }
        NodeTable {
            features: DenseMatrix::from_rows(&vec![vec![1.0, 0.0]; positions.len()]).unwrap(),
            positions,
            time_steps: steps,
            labels,
            groups: vec![None; 20],
        }
    }

    #[test]
    fn filter_zero_pct_is_identity() {
        let t = filter_fixture();
        let (f, kept) = filter_nodes_indexed(&t, 0.0, 5, 1).unwrap();
        assert_eq!(f, t);
        assert_eq!(kept, (0..20).collect::<Vec<_>>());
    }

    #[test]
    fn filter_respects_floor_and_labels() {
        let t = filter_fixture();
        let f = filter_nodes(&t, 50.0, 5, 7).unwrap();
        // each step drops 5 of its 10 nodes, keeping the labeled one
        assert_eq!(f.n(), 10);
        assert_eq!(f.n_labeled(), 2);
        for s in 0..2u32 {
            let count = f.time_steps.iter().filter(|&&x| x == s).count();
            assert_eq!(count, 5);
        }
    }

    #[test]
    fn filter_constraints_beat_percentage() {
        let t = filter_fixture();
        // 99% of 10 rounds to 10 drops, but the floor keeps 5 per step.
        let f = filter_nodes(&t, 99.0, 5, 7).unwrap();
        assert_eq!(f.n(), 10);
        assert_eq!(f.n_labeled(), 2);
        // with floor 1, only labeled nodes block dropping
        let f = filter_nodes(&t, 99.0, 1, 7).unwrap();
        assert_eq!(f.n(), 2);
        assert_eq!(f.n_labeled(), 2);
    }

    #[test]
    fn filter_is_deterministic_per_seed() {
        let t = filter_fixture();
        let a = filter_nodes(&t, 50.0, 5, 11).unwrap();
        let b = filter_nodes(&t, 50.0, 5, 11).unwrap();
        let c = filter_nodes(&t, 50.0, 5, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
