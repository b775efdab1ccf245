use std::collections::{BTreeSet, VecDeque};
use std::path::Path;

use super::{Circuit, CircuitError, Gate};

/// Undirected physical connectivity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingMap {
    n_physical: usize,
    adj: Vec<BTreeSet<usize>>,
}

impl CouplingMap {
    pub fn new(
        n_physical: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, CircuitError> {
        let mut adj = vec![BTreeSet::new(); n_physical];
        for (p, q) in edges {
            if p == q || p >= n_physical || q >= n_physical {
                return Err(CircuitError::Invalid(format!(
                    "edge ({p},{q}) invalid on {n_physical} physical qubits"
                )));
            }
            adj[p].insert(q);
            adj[q].insert(p);
        }
        Ok(Self { n_physical, adj })
    }

    pub fn line(n: usize) -> Self {
        Self::new(n, (1..n).map(|q| (q - 1, q))).expect("valid line")
    }

    /// `rows × cols` lattice; qubit `(row, col)` has index `row·cols + col`.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let i = r * cols + c;
                if c + 1 < cols {
                    edges.push((i, i + 1));
                }
                if r + 1 < rows {
                    edges.push((i, i + cols));
                }
            }
        }
        Self::new(rows * cols, edges).expect("valid grid")
    }

    /// Parses one `p q` pair per line. Blank lines and `#` comments are skipped.
    pub fn parse_edge_list(text: &str) -> Result<Self, CircuitError> {
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| CircuitError::MapParse {
                line: i + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(err(format!("expected two indices, got {:?}", line)));
            }
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|e| err(format!("bad index {s:?}: {e}")))
            };
            edges.push((parse(fields[0])?, parse(fields[1])?));
        }
        let n = edges.iter().map(|&(p, q)| p.max(q) + 1).max().unwrap_or(0);
        Self::new(n, edges)
    }

    pub fn load(path: &Path) -> Result<Self, CircuitError> {
        let text = std::fs::read_to_string(path).map_err(|e| CircuitError::MapParse {
            line: 0,
            message: format!("{}: {e}", path.display()),
        })?;
        Self::parse_edge_list(&text)
    }

    pub fn n_physical(&self) -> usize {
        self.n_physical
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(p, ns)| ns.iter().filter(move |&&q| q > p).map(move |&q| (p, q)))
            .collect()
    }

    pub fn are_adjacent(&self, p: usize, q: usize) -> bool {
        self.adj[p].contains(&q)
    }

    /// BFS path from `from` to `to`, expanding neighbors in ascending order.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let mut parent = vec![usize::MAX; self.n_physical];
        parent[from] = from;
        let mut queue = VecDeque::from([from]);
        while let Some(p) = queue.pop_front() {
            if p == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = parent[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for &q in &self.adj[p] {
                if parent[q] == usize::MAX {
                    parent[q] = p;
                    queue.push_back(q);
                }
            }
        }
        None
    }
}

/// ASAP depth: every gate sits one level above the latest gate on its qubits.
pub fn logical_depth(circuit: &Circuit) -> usize {
    let mut level = vec![0usize; circuit.n_qubits()];
    let mut depth = 0;
    for gate in circuit.gates() {
        let l = gate.qubits().iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
        for &q in gate.qubits() {
            level[q] = l;
        }
        depth = depth.max(l);
    }
    depth
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutedCircuit {
    /// Circuit over physical qubits, SWAPs included.
    pub circuit: Circuit,
    pub depth: usize,
    pub swap_count: usize,
    /// Physical position of each logical qubit after the last gate.
    pub final_layout: Vec<usize>,
}

/// Greedy router: a two-qubit gate on distant qubits first swaps its first
/// qubit along the BFS path until it neighbors the second.
pub fn route_and_depth(
    circuit: &Circuit,
    map: &CouplingMap,
    layout: &[usize],
) -> Result<RoutedCircuit, CircuitError> {
    if layout.len() != circuit.n_qubits() {
        return Err(CircuitError::InvalidLayout(format!(
            "layout has {} entries for {} qubits",
            layout.len(),
            circuit.n_qubits()
        )));
    }
    let mut occupant: Vec<Option<usize>> = vec![None; map.n_physical()];
    for (l, &p) in layout.iter().enumerate() {
        if p >= map.n_physical() {
            return Err(CircuitError::InvalidLayout(format!(
                "qubit {l} placed on {p}, map has {}",
                map.n_physical()
            )));
        }
        if let Some(other) = occupant[p] {
            return Err(CircuitError::InvalidLayout(format!(
                "qubits {other} and {l} share physical qubit {p}"
            )));
        }
        occupant[p] = Some(l);
    }
    let mut phys = layout.to_vec();
    let mut gates = Vec::with_capacity(circuit.gates().len());
    let mut swap_count = 0;

    for gate in circuit.gates() {
        if gate.is_two_qubit() {
            let (a, b) = (phys[gate.qubits()[0]], phys[gate.qubits()[1]]);
            if !map.are_adjacent(a, b) {
                let path = map
                    .shortest_path(a, b)
                    .ok_or(CircuitError::DisconnectedMap(a, b))?;
                for w in path[..path.len() - 1].windows(2) {
                    let (p, q) = (w[0], w[1]);
                    gates.push(Gate::swap(p, q));
                    swap_count += 1;
                    occupant.swap(p, q);
                    for pos in [p, q] {
                        if let Some(l) = occupant[pos] {
                            phys[l] = pos;
                        }
                    }
                }
            }
        }
        gates.push(gate.remapped(|q| phys[q]));
    }

    let routed = Circuit::from_parts(map.n_physical(), gates, circuit.n_params())?;
    Ok(RoutedCircuit {
        depth: logical_depth(&routed),
        circuit: routed,
        swap_count,
        final_layout: phys,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_real_amplitudes, Angle, GateKind};

    #[test]
    fn depth_examples() {
        let mut c = Circuit::new(2);
        c.ry_fresh(0);
        assert_eq!(logical_depth(&c), 1);
        c.ry_fresh(1);
        c.push(Gate::cnot(0, 1));
        assert_eq!(logical_depth(&c), 2);
        assert_eq!(logical_depth(&Circuit::new(3)), 0);
    }

    #[test]
    fn real_amplitudes_depth_golden() {
        assert_eq!(logical_depth(&build_real_amplitudes(6, 3)), 13);
    }

    #[test]
    fn line_routing_inserts_one_swap() {
        let mut c = Circuit::new(3);
        c.push(Gate::cnot(0, 2));
        let r = route_and_depth(&c, &CouplingMap::line(3), &[0, 1, 2]).unwrap();
        assert_eq!(r.swap_count, 1);
        assert_eq!(r.circuit.gates()[0], Gate::swap(0, 1));
        assert_eq!(r.circuit.gates()[1], Gate::cnot(1, 2));
        assert_eq!(r.depth, 2);
        assert_eq!(r.final_layout, [1, 0, 2]);
    }

    #[test]
    fn conforming_circuit_is_unchanged() {
        let c = build_real_amplitudes(5, 2);
        let r = route_and_depth(&c, &CouplingMap::line(5), &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(r.swap_count, 0);
        assert_eq!(r.depth, logical_depth(&c));
        assert_eq!(r.circuit, c);
    }

    #[test]
    fn disconnected_and_bad_layouts() {
        let mut c = Circuit::new(2);
        c.push(Gate::cnot(0, 1));
        let map = CouplingMap::new(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(
            route_and_depth(&c, &map, &[0, 2]),
            Err(CircuitError::DisconnectedMap(0, 2))
        );
        assert!(matches!(
            route_and_depth(&c, &map, &[1, 1]),
            Err(CircuitError::InvalidLayout(_))
        ));
        assert!(matches!(
            route_and_depth(&c, &map, &[0]),
            Err(CircuitError::InvalidLayout(_))
        ));
    }

    #[test]
    fn rotations_follow_their_qubit() {
        let mut c = Circuit::new(3);
        c.push(Gate::cnot(0, 2));
        c.push(Gate::rz(0, Angle::Fixed(1.0)));
        let r = route_and_depth(&c, &CouplingMap::line(3), &[0, 1, 2]).unwrap();
        let last = r.circuit.gates().last().unwrap();
        assert_eq!((last.kind(), last.qubits()), (GateKind::Rz, &[1][..]));
    }

    #[test]
    fn edge_list_parsing() {
        let m = CouplingMap::parse_edge_list("# ring\n0 1\n1 2\n\n2 0\n").unwrap();
        assert_eq!(m.n_physical(), 3);
        assert_eq!(m.edges(), [(0, 1), (0, 2), (1, 2)]);
        assert!(matches!(
            CouplingMap::parse_edge_list("0 1\n1 x\n"),
            Err(CircuitError::MapParse { line: 2, .. })
        ));
        assert!(CouplingMap::parse_edge_list("3 3\n").is_err());
    }

    #[test]
    fn grid_neighbors() {
        let g = CouplingMap::grid(2, 3);
        assert!(g.are_adjacent(0, 1) && g.are_adjacent(0, 3) && !g.are_adjacent(2, 3));
        assert_eq!(g.edges().len(), 7);
    }
}
