//! Recurrence purification of graph-state ensembles.
//!
//! Every ensemble member owns a small register holding one `|G, mu>`. A
//! step pairs consecutive members, runs the protocol on the joined pair and
//! keeps the source's register if the parity check passes.

mod exact;

pub use exact::{bepp_coefficient_map, exact_p1, exact_p2, DiagonalEnsemble};

use rand::Rng;
use thiserror::Error;

use crate::graph::{readout_index, Graph, GraphError, TwoColoring};
use crate::noise::{noisy_block, NoiseError, NoiseParams};
use crate::stab::{CliffordGate, StabError, StabilizerRegister};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PurifyError {
    #[error("bipartite purification needs 2-qubit states, got {0}")]
    NotAPair(usize),
    #[error("graph is not two-colorable: {0}")]
    NotTwoColorable(GraphError),
    #[error("exact maps are limited to {max} vertices, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("coefficients sum to {0}, not 1")]
    Unnormalized(f64),
    #[error("coefficient vector has length {got}, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Stab(#[from] StabError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// Bipartite step on `G_2` with the `S_A`/`S_B` twirl.
    Bepp,
    /// Multipartite subprotocol purifying the `V_A` indices.
    P1,
    /// Multipartite subprotocol purifying the `V_B` indices.
    P2,
}

/// Counts of one purification step: the even-floored number of inputs and
/// the number of kept states.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct StepCount {
    pub floored_input: u64,
    pub kept: u64,
}

/// Ensemble of copies of one graph state. Vertex `a` of member `i` is qubit
/// `a` of `states[i]`.
#[derive(Clone, Debug)]
pub struct GraphEnsemble {
    pub graph: Graph,
    pub states: Vec<StabilizerRegister>,
}

impl GraphEnsemble {
    pub fn new(graph: Graph, states: Vec<StabilizerRegister>) -> Self {
        Self { graph, states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Number of members whose graph-basis index is zero.
    pub fn count_good<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64, PurifyError> {
        let qubits: Vec<usize> = (0..self.graph.num_vertices()).collect();
        let mut good = 0;
        for s in &self.states {
            let mut reg = s.clone();
            good += readout_index(&mut reg, &qubits, &self.graph, rng)?.is_zero() as u64;
        }
        Ok(good)
    }
}

/// Which gates each vertex applies in a step.
struct Roles {
    /// CNOT from source to target (otherwise target to source).
    forward: Vec<bool>,
    /// Target qubit measured in the X basis (otherwise Z).
    measure_x: Vec<bool>,
    /// Vertices whose parity decides the keep condition.
    checked: Vec<usize>,
    twirl: bool,
}

impl Roles {
    fn new(graph: &Graph, protocol: Protocol) -> Result<Self, PurifyError> {
        let n = graph.num_vertices();
        let coloring = match protocol {
            Protocol::Bepp => {
                if n != 2 {
                    return Err(PurifyError::NotAPair(n));
                }
                coloring_of(graph)?
            }
            _ => coloring_of(graph)?,
        };
        // P1 checks V_A; P2 and the bipartite step check V_B
        let purified = match protocol {
            Protocol::P1 => coloring.clone(),
            Protocol::P2 | Protocol::Bepp => coloring.swapped(),
        };
        Ok(Self {
            forward: (0..n).map(|v| !purified.in_a(v)).collect(),
            measure_x: (0..n).map(|v| purified.in_a(v)).collect(),
            checked: purified.a.clone(),
            twirl: protocol == Protocol::Bepp,
        })
    }
}

fn coloring_of(graph: &Graph) -> Result<TwoColoring, PurifyError> {
    graph.bipartition().map_err(PurifyError::NotTwoColorable)
}

/// Runs one protocol step on a source/target pair. Returns the purified
/// source if it passes the parity check.
fn purify_pair<R: Rng + ?Sized>(
    graph: &Graph,
    roles: &Roles,
    source: &StabilizerRegister,
    target: &StabilizerRegister,
    params: &NoiseParams,
    rng: &mut R,
) -> Result<Option<StabilizerRegister>, PurifyError> {
    let n = graph.num_vertices();
    let mut reg = source.join(target)?;
    let mut gates = Vec::with_capacity(8);
    for v in 0..n {
        let (s, t) = (v, n + v);
        gates.clear();
        if roles.twirl {
            // vertex 0 applies S_A = H S H, vertex 1 applies S_B = S^dagger
            for q in [s, t] {
                if v == 0 {
                    gates.extend([
                        CliffordGate::Hadamard(q),
                        CliffordGate::Phase(q),
                        CliffordGate::Hadamard(q),
                    ]);
                } else {
                    gates.push(CliffordGate::PhaseInv(q));
                }
            }
        }
        gates.push(if roles.forward[v] {
            CliffordGate::Cnot {
                control: s,
                target: t,
            }
        } else {
            CliffordGate::Cnot {
                control: t,
                target: s,
            }
        });
        if roles.measure_x[v] {
            gates.push(CliffordGate::Hadamard(t));
        }
        noisy_block(&mut reg, &[s, t], &gates, params, rng)?;
    }
    let mut outcomes = vec![false; n];
    for (v, o) in outcomes.iter_mut().enumerate() {
        *o = reg.measure_z(n + v, rng)?.outcome;
    }
    let pass = roles.checked.iter().all(|&a| {
        !graph
            .neighbors(a)
            .iter()
            .fold(outcomes[a], |acc, &b| acc ^ outcomes[b])
    });
    if !pass {
        return Ok(None);
    }
    Ok(Some(reg.extract(&(0..n).collect::<Vec<_>>())?))
}

/// One purification step over the whole ensemble. Members are paired
/// consecutively; an odd leftover is dropped.
pub fn purify_step<R: Rng + ?Sized>(
    ens: &mut GraphEnsemble,
    protocol: Protocol,
    params: &NoiseParams,
    rng: &mut R,
) -> Result<StepCount, PurifyError> {
    let roles = Roles::new(&ens.graph, protocol)?;
    let pairs = ens.states.len() / 2;
    let mut kept = Vec::with_capacity(pairs);
    for pair in ens.states.chunks_exact(2) {
        if let Some(s) = purify_pair(&ens.graph, &roles, &pair[0], &pair[1], params, rng)? {
            kept.push(s);
        }
    }
    ens.states = kept;
    Ok(StepCount {
        floored_input: 2 * pairs as u64,
        kept: ens.states.len() as u64,
    })
}

pub fn bepp_step<R: Rng + ?Sized>(
    ens: &mut GraphEnsemble,
    params: &NoiseParams,
    rng: &mut R,
) -> Result<StepCount, PurifyError> {
    purify_step(ens, Protocol::Bepp, params, rng)
}

pub fn mepp_p1_step<R: Rng + ?Sized>(
    ens: &mut GraphEnsemble,
    params: &NoiseParams,
    rng: &mut R,
) -> Result<StepCount, PurifyError> {
    purify_step(ens, Protocol::P1, params, rng)
}

pub fn mepp_p2_step<R: Rng + ?Sized>(
    ens: &mut GraphEnsemble,
    params: &NoiseParams,
    rng: &mut R,
) -> Result<StepCount, PurifyError> {
    purify_step(ens, Protocol::P2, params, rng)
}
