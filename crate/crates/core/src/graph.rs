//! Graph states: construction, graph-basis readout and vertex fusion.
//!
//! Vertex `a` of a graph is stabilized by `K_a = X_a prod_{b in N_a} Z_b`.
//! A state `|G, mu>` has eigenvalue `(-1)^{mu_a}` for every `K_a`.

use std::collections::VecDeque;
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::stab::{CliffordGate, Pauli, StabError, StabilizerRegister};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph is not two-colorable (odd cycle through vertex {vertex})")]
    OddCycle { vertex: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range for a {n}-vertex graph")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("qubit assignment has {got} entries, graph has {expected} vertices")]
    AssignmentLength { expected: usize, got: usize },
    #[error("qubit {0} assigned to more than one vertex")]
    ReusedQubit(usize),
    #[error("qubit {0} is not a fresh |0> or |+>")]
    NotFresh(usize),
    #[error("readout of vertex {vertex} was not deterministic")]
    StateNotGraphDiagonal { vertex: usize },
    #[error("fusion qubits sit at sites {0} and {1}")]
    IllegalNonlocalOperation(u32, u32),
    #[error(transparent)]
    Stab(#[from] StabError),
}

/// Undirected simple graph with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::empty(n);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    /// Star with center 0; the GHZ graph.
    pub fn star(n: usize) -> Self {
        let mut g = Self::empty(n);
        for leaf in 1..n {
            g.adj[0].push(leaf);
            g.adj[leaf].push(0);
        }
        g
    }

    /// Path `0 - 1 - ... - (n-1)`; the 1D cluster graph.
    pub fn path(n: usize) -> Self {
        let mut g = Self::empty(n);
        for v in 1..n {
            g.adj[v - 1].push(v);
            g.adj[v].push(v - 1);
        }
        g
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<(), GraphError> {
        let n = self.adj.len();
        for v in [a, b] {
            if v >= n {
                return Err(GraphError::VertexOutOfRange { vertex: v, n });
            }
        }
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        if let Err(pos) = self.adj[a].binary_search(&b) {
            self.adj[a].insert(pos, b);
            let pos = self.adj[b].binary_search(&a).unwrap_err();
            self.adj[b].insert(pos, a);
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, a: usize) -> &[usize] {
        &self.adj[a]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    /// Edges `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
            .collect()
    }

    /// BFS two-coloring. The first vertex of every component goes to `V_A`,
    /// so a star centered at 0 has `V_A = {0}`.
    pub fn bipartition(&self) -> Result<TwoColoring, GraphError> {
        let n = self.num_vertices();
        let mut color: Vec<Option<bool>> = vec![None; n];
        for start in 0..n {
            if color[start].is_some() {
                continue;
            }
            color[start] = Some(true);
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                let c = color[v].unwrap();
                for &w in &self.adj[v] {
                    match color[w] {
                        None => {
                            color[w] = Some(!c);
                            queue.push_back(w);
                        }
                        Some(cw) if cw == c => return Err(GraphError::OddCycle { vertex: w }),
                        _ => {}
                    }
                }
            }
        }
        let in_a: Vec<bool> = color.into_iter().map(|c| c.unwrap()).collect();
        Ok(TwoColoring {
            a: (0..n).filter(|&v| in_a[v]).collect(),
            b: (0..n).filter(|&v| !in_a[v]).collect(),
            in_a,
        })
    }
}

/// Bipartition `(V_A, V_B)` of a two-colorable graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoColoring {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    in_a: Vec<bool>,
}

impl TwoColoring {
    pub fn in_a(&self, v: usize) -> bool {
        self.in_a[v]
    }

    /// The same partition with the roles of the two sets exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
            in_a: self.in_a.iter().map(|x| !x).collect(),
        }
    }
}

/// Graph-basis index `mu`, one bit per vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexVector(pub Vec<bool>);

impl IndexVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn unit(n: usize, a: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[a] = true;
        v
    }

    /// Bits from the low end of `code`: vertex `a` is bit `a`.
    pub fn from_code(n: usize, code: usize) -> Self {
        Self((0..n).map(|a| code >> a & 1 == 1).collect())
    }

    pub fn code(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .map(|(a, &b)| (b as usize) << a)
            .sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|b| !b)
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    pub fn flip(&mut self, a: usize) {
        self.0[a] ^= true;
    }
}

impl fmt::Display for IndexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", b as u8)?;
        }
        Ok(())
    }
}

/// Prepares `|G, 0>` on `qubits` (vertex `a` on `qubits[a]`). Each qubit
/// must be a fresh `|0>` or `|+>`.
pub fn prepare_graph_state(
    reg: &mut StabilizerRegister,
    qubits: &[usize],
    g: &Graph,
) -> Result<(), GraphError> {
    check_assignment(reg, qubits, g)?;
    for &q in qubits {
        if reg.peek_z(q)? == Some(false) {
            reg.apply_gate(CliffordGate::Hadamard(q))?;
            continue;
        }
        reg.apply_gate(CliffordGate::Hadamard(q))?;
        let is_plus = reg.peek_z(q)? == Some(false);
        reg.apply_gate(CliffordGate::Hadamard(q))?;
        if !is_plus {
            return Err(GraphError::NotFresh(q));
        }
    }
    for (a, b) in g.edges() {
        reg.apply_gate(CliffordGate::Cz(qubits[a], qubits[b]))?;
    }
    Ok(())
}

fn check_assignment(
    reg: &StabilizerRegister,
    qubits: &[usize],
    g: &Graph,
) -> Result<(), GraphError> {
    if qubits.len() != g.num_vertices() {
        return Err(GraphError::AssignmentLength {
            expected: g.num_vertices(),
            got: qubits.len(),
        });
    }
    let mut seen = vec![false; reg.num_qubits()];
    for &q in qubits {
        if q >= reg.num_qubits() {
            return Err(StabError::QubitOutOfRange {
                qubit: q,
                n: reg.num_qubits(),
            }
            .into());
        }
        if std::mem::replace(&mut seen[q], true) {
            return Err(GraphError::ReusedQubit(q));
        }
    }
    Ok(())
}

/// Measures the graph-basis index of the state on `qubits`. Undoes the CZ
/// layer, rotates to X and measures; the state is destroyed.
pub fn readout_index<R: Rng + ?Sized>(
    reg: &mut StabilizerRegister,
    qubits: &[usize],
    g: &Graph,
    rng: &mut R,
) -> Result<IndexVector, GraphError> {
    check_assignment(reg, qubits, g)?;
    for (a, b) in g.edges() {
        reg.apply_gate(CliffordGate::Cz(qubits[a], qubits[b]))?;
    }
    let mut mu = IndexVector::zeros(qubits.len());
    for (a, &q) in qubits.iter().enumerate() {
        reg.apply_gate(CliffordGate::Hadamard(q))?;
        let m = reg.measure_z(q, rng)?;
        if !m.deterministic {
            return Err(GraphError::StateNotGraphDiagonal { vertex: a });
        }
        mu.0[a] = m.outcome;
    }
    Ok(mu)
}

/// Index change caused by Pauli `p` on vertex `a`, phases dropped.
pub fn pauli_index_oracle(mu: &IndexVector, p: Pauli, a: usize, g: &Graph) -> IndexVector {
    let mut out = mu.clone();
    let (x, z) = p.bits();
    if z {
        out.flip(a);
    }
    if x {
        for &b in g.neighbors(a) {
            out.flip(b);
        }
    }
    out
}

/// A graph state living on some qubits of a register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    pub graph: Graph,
    pub qubits: Vec<usize>,
}

/// Graph produced by fusing `v2` of `g2` into `v1` of `g1`. Vertices of
/// `g1` keep their labels; those of `g2` other than `v2` follow in order.
pub fn fuse_graphs(g1: &Graph, v1: usize, g2: &Graph, v2: usize) -> Graph {
    let n1 = g1.num_vertices();
    let relabel = |w: usize| {
        if w == v2 {
            v1
        } else if w < v2 {
            n1 + w
        } else {
            n1 + w - 1
        }
    };
    let mut out = Graph::empty(n1 + g2.num_vertices() - 1);
    for (a, b) in g1.edges().into_iter().chain(
        g2.edges()
            .into_iter()
            .map(|(a, b)| (relabel(a), relabel(b))),
    ) {
        out.add_edge(a, b).expect("relabeled edges stay in range");
    }
    out
}

/// Fuses vertex `v1` of `f1` with vertex `v2` of `f2` (disjoint fragments in
/// the same register) by a parity measurement: CNOT from `v1` onto `v2`, then
/// a Z measurement of `v2`. Outcome 1 is repaired by Z on the neighbors of
/// `v2`. The qubit of `v2` is left measured and no longer belongs to any
/// fragment.
pub fn connect<R: Rng + ?Sized>(
    reg: &mut StabilizerRegister,
    f1: &Fragment,
    v1: usize,
    f2: &Fragment,
    v2: usize,
    rng: &mut R,
) -> Result<Fragment, GraphError> {
    for (f, v) in [(f1, v1), (f2, v2)] {
        if v >= f.graph.num_vertices() {
            return Err(GraphError::VertexOutOfRange {
                vertex: v,
                n: f.graph.num_vertices(),
            });
        }
    }
    let a1 = f1.qubits[v1];
    let a2 = f2.qubits[v2];
    let (s1, s2) = (reg.site(a1), reg.site(a2));
    if s1 != s2 {
        return Err(GraphError::IllegalNonlocalOperation(s1, s2));
    }
    reg.apply_gate(CliffordGate::Cnot {
        control: a1,
        target: a2,
    })?;
    if reg.measure_z(a2, rng)?.outcome {
        for &b in f2.graph.neighbors(v2) {
            reg.apply_pauli(Pauli::Z, f2.qubits[b])?;
        }
    }
    let qubits = f1
        .qubits
        .iter()
        .copied()
        .chain(
            f2.qubits
                .iter()
                .enumerate()
                .filter(|(w, _)| *w != v2)
                .map(|(_, &q)| q),
        )
        .collect();
    Ok(Fragment {
        graph: fuse_graphs(&f1.graph, v1, &f2.graph, v2),
        qubits,
    })
}

/// Bell states in the usual notation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BellState {
    PhiPlus,
    PsiPlus,
    PhiMinus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PsiPlus,
        BellState::PhiMinus,
        BellState::PsiMinus,
    ];
}

/// `|B; mu nu> = H_2 |G_2, mu nu>`; returns `(mu, nu)`.
pub fn bell_label(b: BellState) -> (bool, bool) {
    match b {
        BellState::PhiPlus => (false, false),
        BellState::PsiPlus => (false, true),
        BellState::PhiMinus => (true, false),
        BellState::PsiMinus => (true, true),
    }
}

pub fn bell_state(label: (bool, bool)) -> BellState {
    match label {
        (false, false) => BellState::PhiPlus,
        (false, true) => BellState::PsiPlus,
        (true, false) => BellState::PhiMinus,
        (true, true) => BellState::PsiMinus,
    }
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::stab::{DenseState, InitialState};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn fresh(n: usize, g: &Graph) -> StabilizerRegister {
        let mut reg = StabilizerRegister::new_traced(n, InitialState::AllZero).unwrap();
        prepare_graph_state(&mut reg, &(0..n).collect::<Vec<_>>(), g).unwrap();
        reg
    }

    fn random_graph<R: Rng>(n: usize, r: &mut R) -> Graph {
        let mut g = Graph::empty(n);
        for a in 0..n {
            for b in a + 1..n {
                if r.random_bool(0.4) {
                    g.add_edge(a, b).unwrap();
                }
            }
        }
        g
    }

    #[test]
    fn bipartition_examples() {
        let c = Graph::path(2).bipartition().unwrap();
        assert_eq!((c.a, c.b), (vec![0], vec![1]));
        let c = Graph::star(5).bipartition().unwrap();
        assert_eq!((c.a, c.b), (vec![0], vec![1, 2, 3, 4]));
        let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(matches!(
            tri.bipartition(),
            Err(GraphError::OddCycle { .. })
        ));
        let c = Graph::path(5).bipartition().unwrap();
        assert_eq!((c.a, c.b), (vec![0, 2, 4], vec![1, 3]));
    }

    #[test]
    fn edge_state_has_graph_stabilizers() {
        let reg = fresh(2, &Graph::path(2));
        let stabs: Vec<Vec<Pauli>> = reg.stabilizers().into_iter().map(|s| s.paulis).collect();
        assert!(stabs.contains(&vec![Pauli::X, Pauli::Z]));
        assert!(stabs.contains(&vec![Pauli::Z, Pauli::X]));
    }

    #[test]
    fn star_state_matches_displayed_form() {
        for n in 2..=6 {
            let reg = fresh(n, &Graph::star(n));
            // (|0>|+..+> + |1>|-..->)/sqrt2 with the center as qubit 0
            let mut expected = vec![Complex64::new(0.0, 0.0); 1 << n];
            let norm = 1.0 / (2f64.powi(n as i32)).sqrt();
            for (i, amp) in expected.iter_mut().enumerate() {
                let center = i & 1;
                let ones = (i >> 1).count_ones() as usize;
                let sign = if center == 1 && ones % 2 == 1 {
                    -1.0
                } else {
                    1.0
                };
                *amp = Complex64::new(sign * norm, 0.0);
            }
            let got = reg.dense_state().unwrap();
            assert!((got.overlap(&DenseState::from_amplitudes(expected)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_graph_is_plus_product() {
        let reg = fresh(3, &Graph::empty(3));
        let plus = DenseState::plus(3).unwrap();
        assert!((reg.dense_state().unwrap().overlap(&plus) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prepare_rejects_bad_assignments() {
        let mut reg = StabilizerRegister::new(3, InitialState::AllZero).unwrap();
        let g = Graph::path(2);
        assert_eq!(
            prepare_graph_state(&mut reg, &[1, 1], &g),
            Err(GraphError::ReusedQubit(1))
        );
        assert!(matches!(
            prepare_graph_state(&mut reg, &[0], &g),
            Err(GraphError::AssignmentLength { .. })
        ));
        prepare_graph_state(&mut reg, &[0, 1], &g).unwrap();
        assert_eq!(
            prepare_graph_state(&mut reg, &[1, 2], &g),
            Err(GraphError::NotFresh(1))
        );
    }

    #[test]
    fn stabilizer_generators_measure_plus_one() {
        let mut r = rng(1);
        for n in 1..=7 {
            let g = random_graph(n, &mut r);
            let reg = fresh(n, &g);
            let dense = reg.dense_state().unwrap();
            for a in 0..n {
                let mut k = vec![Pauli::I; n];
                k[a] = Pauli::X;
                for &b in g.neighbors(a) {
                    k[b] = Pauli::Z;
                }
                assert!(dense.is_stabilized_by(&k, false));
            }
        }
    }

    #[test]
    fn readout_examples() {
        let mut r = rng(2);
        let g = Graph::star(4);
        let mut reg = fresh(4, &g);
        assert!(readout_index(&mut reg, &[0, 1, 2, 3], &g, &mut r)
            .unwrap()
            .is_zero());

        let mut reg = fresh(4, &g);
        reg.apply_pauli(Pauli::Z, 2).unwrap();
        assert_eq!(
            readout_index(&mut reg, &[0, 1, 2, 3], &g, &mut r).unwrap(),
            IndexVector::unit(4, 2)
        );

        let mut reg = fresh(4, &g);
        reg.apply_pauli(Pauli::X, 0).unwrap();
        let mu = readout_index(&mut reg, &[0, 1, 2, 3], &g, &mut r).unwrap();
        assert_eq!(mu.to_string(), "0111");
    }

    #[test]
    fn readout_flags_non_graph_states() {
        let mut r = rng(3);
        let mut reg = StabilizerRegister::new(2, InitialState::AllZero).unwrap();
        let err = readout_index(&mut reg, &[0, 1], &Graph::path(2), &mut r).unwrap_err();
        assert!(matches!(err, GraphError::StateNotGraphDiagonal { .. }));
    }

    #[test]
    fn oracle_examples() {
        let g = Graph::star(4);
        let zero = IndexVector::zeros(4);
        assert_eq!(
            pauli_index_oracle(&zero, Pauli::Z, 3, &g),
            IndexVector::unit(4, 3)
        );
        assert_eq!(
            pauli_index_oracle(&zero, Pauli::X, 0, &g).to_string(),
            "0111"
        );
        let y = pauli_index_oracle(&zero, Pauli::Y, 1, &g);
        let xz = pauli_index_oracle(&pauli_index_oracle(&zero, Pauli::X, 1, &g), Pauli::Z, 1, &g);
        assert_eq!(y, xz);
    }

    fn fuse_fresh(
        g1: &Graph,
        v1: usize,
        g2: &Graph,
        v2: usize,
        seed: u64,
    ) -> (StabilizerRegister, Fragment, bool) {
        let mut r = rng(seed);
        let n1 = g1.num_vertices();
        let n2 = g2.num_vertices();
        let mut reg = StabilizerRegister::new_traced(n1 + n2, InitialState::AllZero).unwrap();
        let f1 = Fragment {
            graph: g1.clone(),
            qubits: (0..n1).collect(),
        };
        let f2 = Fragment {
            graph: g2.clone(),
            qubits: (n1..n1 + n2).collect(),
        };
        prepare_graph_state(&mut reg, &f1.qubits, g1).unwrap();
        prepare_graph_state(&mut reg, &f2.qubits, g2).unwrap();
        let a2 = f2.qubits[v2];
        let fused = connect(&mut reg, &f1, v1, &f2, v2, &mut r).unwrap();
        let outcome = reg.peek_z(a2).unwrap().unwrap();
        (reg, fused, outcome)
    }

    #[test]
    fn two_edges_fuse_into_a_path() {
        let mut seen = [false; 2];
        for seed in 0..40 {
            let (mut reg, fused, outcome) =
                fuse_fresh(&Graph::path(2), 1, &Graph::path(2), 0, seed);
            seen[outcome as usize] = true;
            assert_eq!(fused.graph, Graph::path(3));
            let mut r = rng(seed);
            let mu = readout_index(&mut reg, &fused.qubits, &fused.graph, &mut r).unwrap();
            assert!(mu.is_zero());
        }
        assert_eq!(seen, [true, true]);
    }

    #[test]
    fn star_centers_fuse_into_a_star() {
        for seed in 0..40 {
            let (reg, fused, _) = fuse_fresh(&Graph::star(3), 0, &Graph::star(4), 0, seed);
            assert_eq!(fused.graph, Graph::star(6));
            let kept = reg.extract(&fused.qubits).unwrap();
            let expected = fresh(6, &Graph::star(6));
            let overlap = kept
                .dense_state()
                .unwrap()
                .overlap(expected.dense_state().unwrap());
            assert!((overlap - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fused_size_is_ln_minus_l_minus_one() {
        for n in 2..6 {
            for l in 2..5 {
                let mut g = Graph::star(n);
                for _ in 1..l {
                    g = fuse_graphs(&g, 0, &Graph::star(n), 0);
                }
                assert_eq!(g.num_vertices(), l * n - (l - 1));
                assert_eq!(g, Graph::star(l * n - (l - 1)));
                let mut p = Graph::path(n);
                for _ in 1..l {
                    let last = p.num_vertices() - 1;
                    p = fuse_graphs(&p, last, &Graph::path(n), 0);
                }
                assert_eq!(p, Graph::path(l * n - (l - 1)));
            }
        }
    }

    #[test]
    fn connect_requires_common_site() {
        let mut r = rng(4);
        let mut reg = StabilizerRegister::new(4, InitialState::AllZero).unwrap();
        let f1 = Fragment {
            graph: Graph::path(2),
            qubits: vec![0, 1],
        };
        let f2 = Fragment {
            graph: Graph::path(2),
            qubits: vec![2, 3],
        };
        reg.set_site(2, 1).unwrap();
        let err = connect(&mut reg, &f1, 1, &f2, 0, &mut r).unwrap_err();
        assert_eq!(err, GraphError::IllegalNonlocalOperation(0, 1));
    }

    #[test]
    fn phase_noise_commutes_with_connect() {
        // Z on the fused vertex before or after fusion gives the same index
        for seed in 0..20 {
            let mut r = rng(seed);
            let g = Graph::path(3);
            let mut before = StabilizerRegister::new(6, InitialState::AllZero).unwrap();
            let f1 = Fragment {
                graph: g.clone(),
                qubits: vec![0, 1, 2],
            };
            let f2 = Fragment {
                graph: g.clone(),
                qubits: vec![3, 4, 5],
            };
            prepare_graph_state(&mut before, &f1.qubits, &g).unwrap();
            prepare_graph_state(&mut before, &f2.qubits, &g).unwrap();
            let mut after = before.clone();
            before.apply_pauli(Pauli::Z, 2).unwrap();
            let fb = connect(&mut before, &f1, 2, &f2, 0, &mut r).unwrap();
            let fa = connect(&mut after, &f1, 2, &f2, 0, &mut r).unwrap();
            after.apply_pauli(Pauli::Z, 2).unwrap();
            let mb = readout_index(&mut before, &fb.qubits, &fb.graph, &mut r).unwrap();
            let ma = readout_index(&mut after, &fa.qubits, &fa.graph, &mut r).unwrap();
            assert_eq!(mb, ma);
            assert_eq!(mb, IndexVector::unit(5, 2));
        }
    }

    #[test]
    fn bell_labels_match_hadamard_on_second_qubit() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = |x: f64| Complex64::new(x, 0.0);
        // amplitude order |q1 q0>: index = q0 + 2 q1, qubit 0 is the first party
        let vectors = [
            (BellState::PhiPlus, [c(s), c(0.0), c(0.0), c(s)]),
            (BellState::PsiPlus, [c(0.0), c(s), c(s), c(0.0)]),
            (BellState::PhiMinus, [c(s), c(0.0), c(0.0), c(-s)]),
            (BellState::PsiMinus, [c(0.0), c(s), c(-s), c(0.0)]),
        ];
        let g = Graph::path(2);
        for (b, amps) in vectors {
            let (mu, nu) = bell_label(b);
            assert_eq!(bell_state((mu, nu)), b);
            let mut reg = fresh(2, &g);
            if mu {
                reg.apply_pauli(Pauli::Z, 0).unwrap();
            }
            if nu {
                reg.apply_pauli(Pauli::Z, 1).unwrap();
            }
            reg.apply_gate(CliffordGate::Hadamard(1)).unwrap();
            let got = reg.dense_state().unwrap();
            assert!(
                (got.overlap(&DenseState::from_amplitudes(amps.to_vec())) - 1.0).abs() < 1e-12,
                "{b:?}"
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn readout_matches_index_oracle(seed in any::<u64>(), n in 1usize..=8, ops in 0usize..=16) {
            let mut r = rng(seed);
            let g = random_graph(n, &mut r);
            let mut reg = StabilizerRegister::new(n, InitialState::AllPlus).unwrap();
            let qubits: Vec<usize> = (0..n).collect();
            prepare_graph_state(&mut reg, &qubits, &g).unwrap();
            let mut mu = IndexVector::zeros(n);
            for _ in 0..ops {
                let p = Pauli::ALL[r.random_range(0..4)];
                let a = r.random_range(0..n);
                reg.apply_pauli(p, a).unwrap();
                mu = pauli_index_oracle(&mu, p, a, &g);
            }
            prop_assert_eq!(readout_index(&mut reg, &qubits, &g, &mut r).unwrap(), mu);
        }

        #[test]
        fn index_code_round_trips(n in 1usize..=16, code in any::<u16>()) {
            let code = code as usize & ((1 << n) - 1);
            prop_assert_eq!(IndexVector::from_code(n, code).code(), code);
        }
    }
}
