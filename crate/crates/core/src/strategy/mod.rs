//! Instruction-string strategies: parsing, validation and execution, plus
//! the estimators and frontier tools built on their results.

mod execute;
mod frontier;
mod presets;
mod stats;

pub use execute::{execute, execute_prefixes, run_pooled, run_pooled_prefixes, run_rng};
pub use frontier::{cost_at, crossover, frontier, mix, mix_curve, CurvePoint};
pub use presets::{bepp_preset, intermediate_presets, mepp_preset, PresetKind};
pub use stats::{fidelity_estimate, yield_estimate, CostReport, Estimate, RunStats};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::noise::NoiseError;
use crate::purify::PurifyError;
use crate::stab::StabError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error("empty strategy string")]
    EmptyString,
    #[error("unknown token {token:?} at position {pos}")]
    UnknownToken { pos: usize, token: String },
    #[error("bad number in token {token:?} at position {pos}")]
    BadNumber { pos: usize, token: String },
    #[error("instruction {pos} ({instruction}): {reason}")]
    IllegalInstruction {
        pos: usize,
        instruction: Instruction,
        reason: &'static str,
    },
    #[error("strategy produces {got}-qubit states, target is {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("no states survived")]
    NoSurvivors,
    #[error("pooled statistics have different step counts")]
    IncompatibleStats,
    #[error(transparent)]
    Purify(#[from] PurifyError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Stab(#[from] StabError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Ghz,
    Cluster,
}

impl Family {
    pub fn graph(self, n: usize) -> Graph {
        match self {
            Family::Ghz => Graph::star(n),
            Family::Cluster => Graph::path(n),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Ghz => "ghz",
            Family::Cluster => "cluster",
        })
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ghz" => Ok(Family::Ghz),
            "cluster" => Ok(Family::Cluster),
            _ => Err(format!("unknown state family {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Instruction {
    PrepareState(usize),
    PrepareBell,
    Send,
    P1,
    P2,
    Pb,
    Connect(usize),
}

impl Instruction {
    pub fn is_purification(self) -> bool {
        matches!(self, Instruction::P1 | Instruction::P2 | Instruction::Pb)
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::PrepareState(n) => write!(f, "M{n}"),
            Instruction::PrepareBell => f.write_str("B2"),
            Instruction::Send => f.write_str("S"),
            Instruction::P1 => f.write_str("P1"),
            Instruction::P2 => f.write_str("P2"),
            Instruction::Pb => f.write_str("Pb"),
            Instruction::Connect(l) => write!(f, "C{l}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Strategy {
    pub instructions: Vec<Instruction>,
}

fn number(pos: usize, token: &str, digits: &str, min: usize) -> Result<usize, StrategyError> {
    let bad = || StrategyError::BadNumber {
        pos,
        token: token.to_string(),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let n: usize = digits.parse().map_err(|_| bad())?;
    if n < min {
        return Err(bad());
    }
    Ok(n)
}

pub fn parse(s: &str) -> Result<Strategy, StrategyError> {
    if s.is_empty() {
        return Err(StrategyError::EmptyString);
    }
    let instructions = s
        .split('-')
        .enumerate()
        .map(|(pos, token)| match token {
            "B2" => Ok(Instruction::PrepareBell),
            "S" => Ok(Instruction::Send),
            "P1" => Ok(Instruction::P1),
            "P2" => Ok(Instruction::P2),
            "Pb" => Ok(Instruction::Pb),
            t if t.starts_with('M') => Ok(Instruction::PrepareState(number(pos, t, &t[1..], 2)?)),
            t if t.starts_with('C') => Ok(Instruction::Connect(number(pos, t, &t[1..], 2)?)),
            t => Err(StrategyError::UnknownToken {
                pos,
                token: t.to_string(),
            }),
        })
        .collect::<Result<_, _>>()?;
    Ok(Strategy { instructions })
}

impl FromStr for Strategy {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, ins) in self.instructions.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{ins}")?;
        }
        Ok(())
    }
}

impl Strategy {
    /// Number of purification instructions.
    pub fn purification_steps(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| i.is_purification())
            .count()
    }

    /// Label of the state a strategy starts from (`B2` or `M<n>`).
    pub fn family_label(&self) -> String {
        self.instructions
            .first()
            .map(|i| i.to_string())
            .unwrap_or_default()
    }

    /// Symbolically executes the strategy for a `target_n`-qubit state and
    /// returns the state size after every instruction.
    pub fn validate(&self, target_n: usize) -> Result<Vec<usize>, StrategyError> {
        let illegal = |pos: usize, reason: &'static str| StrategyError::IllegalInstruction {
            pos,
            instruction: self.instructions[pos],
            reason,
        };
        if self.instructions.is_empty() {
            return Err(StrategyError::EmptyString);
        }
        if target_n < 2 {
            return Err(StrategyError::SizeMismatch {
                expected: target_n,
                got: 0,
            });
        }
        let mut sizes = Vec::with_capacity(self.instructions.len());
        let mut size = 0;
        for (pos, &ins) in self.instructions.iter().enumerate() {
            match ins {
                Instruction::PrepareState(_) | Instruction::PrepareBell if pos != 0 => {
                    return Err(illegal(pos, "preparation must come first"));
                }
                Instruction::PrepareState(n) => size = n,
                Instruction::PrepareBell => size = 2,
                _ if pos == 0 => {
                    return Err(illegal(pos, "strategy must start with a preparation"))
                }
                Instruction::Send if pos != 1 => {
                    return Err(illegal(
                        pos,
                        "states are sent once, right after preparation",
                    ));
                }
                Instruction::Send => {}
                _ if pos == 1 => {
                    return Err(illegal(pos, "states must be sent right after preparation"))
                }
                Instruction::Pb if size != 2 => {
                    return Err(illegal(pos, "Pb needs 2-qubit states"))
                }
                Instruction::P1 | Instruction::P2 | Instruction::Pb => {}
                Instruction::Connect(l) => {
                    let blocks = (target_n - 1) / (size - 1);
                    if !blocks.is_multiple_of(l) {
                        return Err(illegal(
                            pos,
                            "connection does not divide the remaining blocks",
                        ));
                    }
                    size = l * size - (l - 1);
                }
            }
            if size > target_n || !(target_n - 1).is_multiple_of(size - 1) {
                return Err(StrategyError::SizeMismatch {
                    expected: target_n,
                    got: size,
                });
            }
            sizes.push(size);
        }
        if self.instructions.len() < 2 {
            return Err(StrategyError::IllegalInstruction {
                pos: 0,
                instruction: self.instructions[0],
                reason: "states are never sent",
            });
        }
        if size != target_n {
            return Err(StrategyError::SizeMismatch {
                expected: target_n,
                got: size,
            });
        }
        Ok(sizes)
    }
}
