//! Qubit mapping with greedy SWAP insertion.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::compiler::schedule::schedule;
use crate::error::{Error, Result};

/// Undirected device connectivity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingGraph {
    n_physical: usize,
    edges: BTreeSet<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    distance: Vec<Vec<usize>>,
}

impl CouplingGraph {
    /// Validates indices and connectivity and precomputes all-pairs distances.
    pub fn new(n_physical: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n_physical == 0 {
            return Err(Error::Graph("device has no qubits".into()));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n_physical || b >= n_physical {
                return Err(Error::Graph(format!("edge ({a}, {b}) references a qubit >= {n_physical}")));
            }
            if a == b {
                return Err(Error::Graph(format!("self-loop on qubit {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut neighbors = vec![Vec::new(); n_physical];
        for &(a, b) in &set {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        neighbors.iter_mut().for_each(|v| v.sort_unstable());
        let distance: Vec<Vec<usize>> = (0..n_physical).map(|s| bfs(&neighbors, s)).collect();
        if distance[0].iter().any(|&d| d == usize::MAX) {
            return Err(Error::Graph("coupling graph is disconnected".into()));
        }
        Ok(Self { n_physical, edges: set, neighbors, distance })
    }

    pub fn line(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn ring(n: usize) -> Result<Self> {
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        if n > 2 {
            edges.push((n - 1, 0));
        }
        Self::new(n, edges)
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))))
    }

    /// One `u v` pair per line; `#` comments and blank lines skipped. The
    /// device size is the largest index plus one.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse = |s: Option<&str>| -> Result<usize> {
                s.and_then(|x| x.parse().ok()).ok_or_else(|| Error::Parse {
                    line: i + 1,
                    message: format!("expected `u v`, got {line:?}"),
                })
            };
            let mut it = line.split_whitespace();
            let (a, b) = (parse(it.next())?, parse(it.next())?);
            if it.next().is_some() {
                return Err(Error::Parse { line: i + 1, message: format!("expected `u v`, got {line:?}") });
            }
            edges.push((a, b));
        }
        let n = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
        Self::new(n, edges)
    }

    /// `line:N`, `ring:N`, `complete:N`, or a path to an edge-list file.
    pub fn from_spec(spec: &str) -> Result<Self> {
        if let Some((kind, n)) = spec.split_once(':') {
            let size = n.parse::<usize>().ok();
            match (kind, size) {
                ("line", Some(n)) => return Self::line(n),
                ("ring", Some(n)) => return Self::ring(n),
                ("complete", Some(n)) => return Self::complete(n),
                ("file", _) => return Self::from_edge_list(&std::fs::read_to_string(n)?),
                _ => {}
            }
        }
        Self::from_edge_list(&std::fs::read_to_string(spec)?)
    }

    pub fn n_physical(&self) -> usize {
        self.n_physical
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn distance(&self, a: usize, b: usize) -> usize {
        self.distance[a][b]
    }

    pub fn degree(&self, q: usize) -> usize {
        self.neighbors[q].len()
    }

    /// Shortest path `a -> b` inclusive; lowest-index neighbor wins ties.
    pub fn shortest_path(&self, a: usize, b: usize) -> Vec<usize> {
        let mut path = vec![a];
        let mut cur = a;
        while cur != b {
            cur = *self.neighbors[cur]
                .iter()
                .find(|&&n| self.distance[n][b] + 1 == self.distance[cur][b])
                .expect("connected graph");
            path.push(cur);
        }
        path
    }
}

fn bfs(neighbors: &[Vec<usize>], src: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; neighbors.len()];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for &v in &neighbors[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialLayout {
    /// Virtual qubit `v` on physical qubit `v`.
    #[default]
    Trivial,
    /// Interaction-weighted greedy placement.
    Greedy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutedCircuit {
    /// Circuit on physical indices.
    pub circuit: Circuit,
    /// `layout_initial[v]` = physical qubit holding virtual `v` at the start.
    pub layout_initial: Vec<usize>,
    pub layout_final: Vec<usize>,
    pub swap_count: usize,
    /// CNOT-equivalent count: SWAPs x 3 plus lowered two-qubit gates.
    pub entangling_count: usize,
}

/// Interaction counts between virtual qubit pairs.
fn interaction_weights(circuit: &Circuit) -> Vec<Vec<usize>> {
    let n = circuit.n_qubits();
    let mut w = vec![vec![0usize; n]; n];
    for g in circuit.gates() {
        let qs = g.qubits();
        if g.is_unitary_op() && qs.len() == 2 {
            w[qs[0]][qs[1]] += 1;
            w[qs[1]][qs[0]] += 1;
        }
    }
    w
}

fn greedy_layout(circuit: &Circuit, graph: &CouplingGraph) -> Vec<usize> {
    let n = circuit.n_qubits();
    let w = interaction_weights(circuit);
    let total: Vec<usize> = w.iter().map(|r| r.iter().sum()).collect();
    let mut layout = vec![usize::MAX; n];
    let mut used = vec![false; graph.n_physical()];
    for _ in 0..n {
        // Next virtual: strongest tie to placed qubits, then busiest, then lowest index.
        let v = (0..n)
            .filter(|&v| layout[v] == usize::MAX)
            .max_by_key(|&v| {
                let tie: usize = (0..n).filter(|&u| layout[u] != usize::MAX).map(|u| w[v][u]).sum();
                (tie, total[v], std::cmp::Reverse(v))
            })
            .unwrap();
        let cost = |p: usize| -> (usize, std::cmp::Reverse<usize>, usize) {
            let c = (0..n).filter(|&u| layout[u] != usize::MAX).map(|u| w[v][u] * graph.distance(p, layout[u])).sum();
            (c, std::cmp::Reverse(graph.degree(p)), p)
        };
        let p = (0..graph.n_physical()).filter(|&p| !used[p]).min_by_key(|&p| cost(p)).unwrap();
        layout[v] = p;
        used[p] = true;
    }
    layout
}

/// Maps `circuit` onto `graph`. For every two-qubit gate on non-adjacent
/// physical qubits, the operand with fewer pending gates (ties: lower
/// virtual index) is swapped along a shortest path until adjacent.
pub fn route(circuit: &Circuit, graph: &CouplingGraph, initial: InitialLayout) -> Result<RoutedCircuit> {
    let n_virtual = circuit.n_qubits();
    let n_phys = graph.n_physical();
    if n_virtual > n_phys {
        return Err(Error::Graph(format!("circuit needs {n_virtual} qubits, device has {n_phys}")));
    }
    let layout_initial = match initial {
        InitialLayout::Trivial => (0..n_virtual).collect(),
        InitialLayout::Greedy => greedy_layout(circuit, graph),
    };
    let mut v2p = layout_initial.clone();
    let mut p2v: Vec<Option<usize>> = vec![None; n_phys];
    for (v, &p) in v2p.iter().enumerate() {
        p2v[p] = Some(v);
    }
    let mut pending = vec![0usize; n_virtual];
    for g in circuit.gates() {
        for q in g.qubits() {
            pending[q] += 1;
        }
    }

    let mut out = Circuit::new(n_phys);
    out.metadata = circuit.metadata.clone();
    let mut swap_count = 0;
    for g in circuit.gates() {
        let qs = g.qubits();
        if g.is_unitary_op() && qs.len() > 2 {
            return Err(Error::UnsupportedGate { gate: g.to_string(), context: "routing (decompose first)" });
        }
        if g.is_unitary_op() && qs.len() == 2 && !graph.is_adjacent(v2p[qs[0]], v2p[qs[1]]) {
            let (a, b) = (qs[0], qs[1]);
            let (mover, anchor) = match pending[a].cmp(&pending[b]) {
                std::cmp::Ordering::Less => (a, b),
                std::cmp::Ordering::Greater => (b, a),
                std::cmp::Ordering::Equal => (a.min(b), a.max(b)),
            };
            let path = graph.shortest_path(v2p[mover], v2p[anchor]);
            for hop in path.windows(2).take(path.len() - 2) {
                let (p, q) = (hop[0], hop[1]);
                out.push(Gate::Swap(p, q))?;
                swap_count += 1;
                p2v.swap(p, q);
                for (phys, occupant) in [(p, p2v[p]), (q, p2v[q])] {
                    if let Some(v) = occupant {
                        v2p[v] = phys;
                    }
                }
            }
        }
        for q in &qs {
            pending[*q] -= 1;
        }
        out.push(g.remap(|v| v2p[v], n_phys)?)?;
    }
    let entangling_count = out.cnot_cost();
    Ok(RoutedCircuit { circuit: out, layout_initial, layout_final: v2p, swap_count, entangling_count })
}

impl RoutedCircuit {
    /// Restricts the circuit to physical qubits that hold a virtual qubit or
    /// are touched by a gate, relabelled in ascending physical order.
    pub fn compacted(&self) -> Result<RoutedCircuit> {
        let mut used = BTreeSet::new();
        used.extend(self.layout_initial.iter().copied());
        for g in self.circuit.gates() {
            used.extend(g.qubits());
        }
        let used: Vec<usize> = used.into_iter().collect();
        let index = |p: usize| used.binary_search(&p).expect("used qubit");
        let k = used.len();
        let mut circuit = Circuit::new(k);
        circuit.metadata = self.circuit.metadata.clone();
        for g in self.circuit.gates() {
            let g = match g {
                Gate::Barrier => Gate::Barrier,
                g => g.remap(index, k)?,
            };
            circuit.push(g)?;
        }
        Ok(RoutedCircuit {
            circuit,
            layout_initial: self.layout_initial.iter().map(|&p| index(p)).collect(),
            layout_final: self.layout_final.iter().map(|&p| index(p)).collect(),
            swap_count: self.swap_count,
            entangling_count: self.entangling_count,
        })
    }

    pub fn depth(&self) -> usize {
        schedule(&self.circuit).depth
    }

    /// Physical-register basis label holding the virtual label `bits` under
    /// the initial layout.
    pub fn physical_input(&self, bits: &str) -> String {
        let mut out = vec![b'0'; self.circuit.n_qubits()];
        for (v, ch) in bits.bytes().enumerate() {
            out[self.layout_initial[v]] = ch;
        }
        String::from_utf8(out).unwrap()
    }

    /// Reads a physical-register outcome back into virtual order using the
    /// final layout.
    pub fn virtual_outcome(&self, physical: &str) -> String {
        let bytes = physical.as_bytes();
        self.layout_final.iter().map(|&p| bytes[p] as char).collect()
    }
}

/// Side-by-side compilation metrics for two routed circuits.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglingReport {
    pub labels: [String; 2],
    /// `(metric, a, b)`.
    pub rows: Vec<(&'static str, usize, usize)>,
}

impl EntanglingReport {
    pub fn delta(&self, metric: &str) -> Option<i64> {
        self.rows.iter().find(|r| r.0 == metric).map(|r| r.2 as i64 - r.1 as i64)
    }
}

pub fn entangling_report(a: &RoutedCircuit, b: &RoutedCircuit) -> EntanglingReport {
    entangling_report_labeled(a, b, "a", "b")
}

pub fn entangling_report_labeled(a: &RoutedCircuit, b: &RoutedCircuit, la: &str, lb: &str) -> EntanglingReport {
    let metrics = |r: &RoutedCircuit| {
        [
            ("gates", r.circuit.op_count()),
            ("two_qubit_gates", r.circuit.two_qubit_count()),
            ("swap_count", r.swap_count),
            ("entangling_count", r.entangling_count),
            ("depth", r.depth()),
        ]
    };
    let rows = metrics(a).iter().zip(metrics(b)).map(|(x, y)| (x.0, x.1, y.1)).collect();
    EntanglingReport { labels: [la.to_string(), lb.to_string()], rows }
}

impl fmt::Display for EntanglingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<18} {:>12} {:>12} {:>8}", "metric", self.labels[0], self.labels[1], "delta")?;
        for (m, a, b) in &self.rows {
            writeln!(f, "{:<18} {:>12} {:>12} {:>+8}", m, a, b, *b as i64 - *a as i64)?;
        }
        Ok(())
    }
}
