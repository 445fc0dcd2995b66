//! Runs a strategy on Monte Carlo ensembles.
//!
//! The target graph on `N` vertices is split into `B = (N-1)/(n-1)` blocks
//! of `n`-vertex fragments. Each block keeps its own ensemble of `M`
//! fragments; connections fuse `l` consecutive blocks into one. Vertex `v`
//! of the target graph belongs to party `v`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::graph::{connect, prepare_graph_state, Fragment};
use crate::noise::{noisy_block, transmit, NoiseParams};
use crate::purify::{purify_step, GraphEnsemble, Protocol, StepCount};
use crate::stab::{InitialState, StabilizerRegister};

use super::{Family, Instruction, RunStats, Strategy, StrategyError};

#[derive(Clone)]
struct Block {
    ensemble: GraphEnsemble,
    /// Party of each fragment vertex.
    parties: Vec<u32>,
}

/// Party of fragment vertex `i` in block `b` for fragments of size `n`.
fn party(family: Family, n: usize, b: usize, i: usize) -> u32 {
    match family {
        Family::Ghz if i == 0 => 0,
        _ => (b * (n - 1) + i) as u32,
    }
}

fn prepare(family: Family, n: usize, blocks: usize, m: usize) -> Result<Vec<Block>, StrategyError> {
    let graph = family.graph(n);
    let qubits: Vec<usize> = (0..n).collect();
    let mut template = StabilizerRegister::new(n, InitialState::AllZero)?;
    prepare_graph_state(&mut template, &qubits, &graph)?;
    (0..blocks)
        .map(|b| {
            let parties: Vec<u32> = (0..n).map(|i| party(family, n, b, i)).collect();
            let mut reg = template.clone();
            reg.set_all_sites(parties[0]);
            Ok(Block {
                ensemble: GraphEnsemble::new(graph.clone(), vec![reg; m]),
                parties,
            })
        })
        .collect()
}

fn send<R: Rng + ?Sized>(
    blocks: &mut [Block],
    params: &NoiseParams,
    rng: &mut R,
    uses: &mut u64,
) -> Result<(), StrategyError> {
    for block in blocks {
        let home = &block.parties;
        for reg in &mut block.ensemble.states {
            for (q, &to) in home.iter().enumerate() {
                let from = reg.site(q);
                if from != to {
                    transmit(reg, q, from, to, params, rng, uses)?;
                }
            }
        }
    }
    Ok(())
}

/// Fuses groups of `l` consecutive blocks. GHZ fragments are joined at
/// their centers, cluster fragments end to start.
fn connect_blocks<R: Rng + ?Sized>(
    family: Family,
    blocks: Vec<Block>,
    l: usize,
    params: &NoiseParams,
    rng: &mut R,
) -> Result<Vec<Block>, StrategyError> {
    let mut out = Vec::with_capacity(blocks.len() / l);
    let mut it = blocks.into_iter();
    loop {
        let group: Vec<Block> = it.by_ref().take(l).collect();
        if group.len() < l {
            break;
        }
        let count = group.iter().map(|b| b.ensemble.len()).min().unwrap_or(0);
        let mut parties = group[0].parties.clone();
        for b in &group[1..] {
            parties.extend_from_slice(&b.parties[1..]);
        }
        let mut fused_graph = None;
        let mut states = Vec::with_capacity(count);
        for i in 0..count {
            let mut reg = group[0].ensemble.states[i].clone();
            let mut frag = Fragment {
                graph: group[0].ensemble.graph.clone(),
                qubits: (0..reg.num_qubits()).collect(),
            };
            for b in &group[1..] {
                let offset = reg.num_qubits();
                let other = &b.ensemble.states[i];
                reg = reg.join(other)?;
                let f2 = Fragment {
                    graph: b.ensemble.graph.clone(),
                    qubits: (offset..offset + other.num_qubits()).collect(),
                };
                let v1 = match family {
                    Family::Ghz => 0,
                    Family::Cluster => frag.graph.num_vertices() - 1,
                };
                if params.noisy_connect {
                    noisy_block(&mut reg, &[frag.qubits[v1], f2.qubits[0]], &[], params, rng)?;
                }
                let fused = connect(&mut reg, &frag, v1, &f2, 0, rng)?;
                reg = reg.extract(&fused.qubits)?;
                frag = Fragment {
                    qubits: (0..fused.qubits.len()).collect(),
                    graph: fused.graph,
                };
            }
            fused_graph = Some(frag.graph);
            states.push(reg);
        }
        let graph = fused_graph.unwrap_or_else(|| family.graph(parties.len()));
        out.push(Block {
            ensemble: GraphEnsemble::new(graph, states),
            parties,
        });
    }
    Ok(out)
}

/// Executes a validated strategy once with `m` target copies.
pub fn execute<R: Rng + ?Sized>(
    st: &Strategy,
    family: Family,
    target_n: usize,
    m: usize,
    params: &NoiseParams,
    rng: &mut R,
) -> Result<RunStats, StrategyError> {
    let mut out = run(st, family, target_n, m, params, rng, false)?;
    Ok(out.pop().expect("the full strategy is always reported").1)
}

/// Executes a strategy once and reports every prefix that ends right after
/// the distribution or after a purification step. Each prefix is completed
/// with the connections that follow it in `st`, applied to a copy of the
/// ensembles, so all prefixes share the same random history. The last entry
/// is `st` itself.
pub fn execute_prefixes<R: Rng + ?Sized>(
    st: &Strategy,
    family: Family,
    target_n: usize,
    m: usize,
    params: &NoiseParams,
    rng: &mut R,
) -> Result<Vec<(Strategy, RunStats)>, StrategyError> {
    run(st, family, target_n, m, params, rng, true)
}

fn finish<R: Rng + ?Sized>(
    blocks: &[Block],
    m: usize,
    steps: &[StepCount],
    uses: u64,
    rng: &mut R,
) -> Result<RunStats, StrategyError> {
    let last = &blocks[0].ensemble;
    Ok(RunStats {
        m_copies: m as u64,
        steps: steps.to_vec(),
        n_final: last.len() as u64,
        n_good: last.count_good(rng)?,
        channel_uses: uses,
    })
}

fn run<R: Rng + ?Sized>(
    st: &Strategy,
    family: Family,
    target_n: usize,
    m: usize,
    params: &NoiseParams,
    rng: &mut R,
    prefixes: bool,
) -> Result<Vec<(Strategy, RunStats)>, StrategyError> {
    st.validate(target_n)?;
    let mut blocks = Vec::new();
    let mut size = 0;
    let mut uses = 0u64;
    let mut steps = Vec::new();
    let mut out = Vec::new();
    for (pos, &ins) in st.instructions.iter().enumerate() {
        match ins {
            Instruction::PrepareState(n) => {
                size = n;
                blocks = prepare(family, n, (target_n - 1) / (n - 1), m)?;
            }
            Instruction::PrepareBell => {
                size = 2;
                blocks = prepare(family, 2, target_n - 1, m)?;
            }
            Instruction::Send => send(&mut blocks, params, rng, &mut uses)?,
            Instruction::P1 | Instruction::P2 | Instruction::Pb => {
                let protocol = match ins {
                    Instruction::P1 => Protocol::P1,
                    Instruction::P2 => Protocol::P2,
                    _ => Protocol::Bepp,
                };
                let mut total = StepCount::default();
                for b in &mut blocks {
                    let c = purify_step(&mut b.ensemble, protocol, params, rng)?;
                    total.floored_input += c.floored_input;
                    total.kept += c.kept;
                }
                steps.push(total);
            }
            Instruction::Connect(l) => {
                blocks = connect_blocks(family, blocks, l, params, rng)?;
                size = l * size - (l - 1);
            }
        }
        let checkpoint = matches!(ins, Instruction::Send) || ins.is_purification();
        if prefixes
            && checkpoint
            && st.instructions[pos + 1..]
                .iter()
                .any(|i| i.is_purification())
        {
            let mut instructions = st.instructions[..=pos].to_vec();
            let mut copy = blocks.clone();
            for &later in &st.instructions[pos + 1..] {
                if let Instruction::Connect(l) = later {
                    copy = connect_blocks(family, copy, l, params, rng)?;
                    instructions.push(later);
                }
            }
            let rs = finish(&copy, m, &steps, uses, rng)?;
            out.push((Strategy { instructions }, rs));
        }
    }
    debug_assert_eq!(size, target_n);
    let rs = finish(&blocks, m, &steps, uses, rng)?;
    out.push((st.clone(), rs));
    Ok(out)
}

/// Random stream for run `run` of point `point` under a master seed.
/// Adding runs or points never changes the streams of existing ones.
pub fn run_rng(master: u64, point: u32, run: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((point as u64) << 32) | run as u64);
    rng
}

/// Executes `runs` independent runs in parallel and pools them in run
/// order.
#[allow(clippy::too_many_arguments)]
pub fn run_pooled(
    st: &Strategy,
    family: Family,
    target_n: usize,
    m: usize,
    runs: u32,
    params: &NoiseParams,
    master: u64,
    point: u32,
) -> Result<RunStats, StrategyError> {
    let results: Vec<Result<RunStats, StrategyError>> = (0..runs)
        .into_par_iter()
        .map(|run| {
            execute(
                st,
                family,
                target_n,
                m,
                params,
                &mut run_rng(master, point, run),
            )
        })
        .collect();
    let results: Vec<RunStats> = results.into_iter().collect::<Result<_, _>>()?;
    RunStats::pool(&results)
}

/// Pooled version of [`execute_prefixes`]. Entries are aligned across runs.
#[allow(clippy::too_many_arguments)]
pub fn run_pooled_prefixes(
    st: &Strategy,
    family: Family,
    target_n: usize,
    m: usize,
    runs: u32,
    params: &NoiseParams,
    master: u64,
    point: u32,
) -> Result<Vec<(Strategy, RunStats)>, StrategyError> {
    let results: Vec<_> = (0..runs)
        .into_par_iter()
        .map(|run| {
            execute_prefixes(
                st,
                family,
                target_n,
                m,
                params,
                &mut run_rng(master, point, run),
            )
        })
        .collect();
    let results: Vec<Vec<(Strategy, RunStats)>> = results.into_iter().collect::<Result<_, _>>()?;
    let first = &results[0];
    (0..first.len())
        .map(|i| {
            Ok((
                first[i].0.clone(),
                RunStats::pool(results.iter().map(|r| &r[i].1))?,
            ))
        })
        .collect()
}
