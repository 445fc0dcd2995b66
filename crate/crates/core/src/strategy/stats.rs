use serde::Serialize;

use crate::purify::StepCount;

use super::StrategyError;

/// Counts from one or more runs of a strategy. Pooling is by summation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct RunStats {
    /// Target copies requested (`M`).
    pub m_copies: u64,
    /// One entry per purification step, summed over blocks.
    #[serde(skip)]
    pub steps: Vec<StepCount>,
    /// States left at the end (`N_f`).
    pub n_final: u64,
    /// Final states found in the target state (`N_g`).
    pub n_good: u64,
    pub channel_uses: u64,
}

fn floor_even(n: u64) -> u64 {
    n - n % 2
}

impl RunStats {
    /// Stats of a single-block run from the survivor chain `N_1 .. N_f`.
    pub fn from_chain(m: u64, chain: &[u64], n_good: u64) -> Self {
        let mut prev = m;
        let steps = chain
            .iter()
            .map(|&n| {
                let c = StepCount {
                    floored_input: floor_even(prev),
                    kept: n,
                };
                prev = n;
                c
            })
            .collect();
        Self {
            m_copies: m,
            steps,
            n_final: prev,
            n_good,
            channel_uses: 0,
        }
    }

    pub fn merge(&mut self, other: &RunStats) -> Result<(), StrategyError> {
        if self.steps.len() != other.steps.len() {
            return Err(StrategyError::IncompatibleStats);
        }
        self.m_copies += other.m_copies;
        for (a, b) in self.steps.iter_mut().zip(&other.steps) {
            a.floored_input += b.floored_input;
            a.kept += b.kept;
        }
        self.n_final += other.n_final;
        self.n_good += other.n_good;
        self.channel_uses += other.channel_uses;
        Ok(())
    }

    pub fn pool<'a>(
        runs: impl IntoIterator<Item = &'a RunStats>,
    ) -> Result<RunStats, StrategyError> {
        let mut it = runs.into_iter();
        let Some(first) = it.next() else {
            return Ok(RunStats::default());
        };
        let mut acc = first.clone();
        for r in it {
            acc.merge(r)?;
        }
        Ok(acc)
    }
}

/// A value with its one-sigma uncertainty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
}

/// `Y = prod N_i / floor_even(N_{i-1})` with the binomial error of `N_f`
/// out of `M`.
pub fn yield_estimate(rs: &RunStats) -> Estimate {
    let mut y = 1.0;
    for s in &rs.steps {
        if s.kept == 0 || s.floored_input == 0 {
            return Estimate {
                value: 0.0,
                err: 0.0,
            };
        }
        y *= s.kept as f64 / s.floored_input as f64;
    }
    let (nf, m) = (rs.n_final as f64, rs.m_copies as f64);
    let err = if m > 0.0 && nf <= m {
        (nf * (m - nf) / (m * m * m)).sqrt()
    } else {
        0.0
    };
    Estimate { value: y, err }
}

/// `F = N_g / N_f` with its binomial error.
pub fn fidelity_estimate(rs: &RunStats) -> Result<Estimate, StrategyError> {
    if rs.n_final == 0 {
        return Err(StrategyError::NoSurvivors);
    }
    let (ng, nf) = (rs.n_good as f64, rs.n_final as f64);
    Ok(Estimate {
        value: ng / nf,
        err: (ng * (nf - ng) / (nf * nf * nf)).sqrt(),
    })
}

/// Everything reported for one strategy point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostReport {
    pub strategy: String,
    pub n_qubits: usize,
    pub steps: usize,
    pub fidelity: Estimate,
    pub yield_: Estimate,
    /// `Y / (N - 1)`, the inverse communication cost per copy.
    pub inv_cost: Estimate,
    pub channel_uses: u64,
}

impl CostReport {
    pub fn new(
        strategy: String,
        n_qubits: usize,
        steps: usize,
        rs: &RunStats,
    ) -> Result<Self, StrategyError> {
        let fidelity = fidelity_estimate(rs)?;
        let y = yield_estimate(rs);
        let edges = (n_qubits - 1) as f64;
        Ok(Self {
            strategy,
            n_qubits,
            steps,
            fidelity,
            yield_: y,
            inv_cost: Estimate {
                value: y.value / edges,
                err: y.err / edges,
            },
            channel_uses: rs.channel_uses,
        })
    }

    /// Communication cost per copy, `(N - 1) / Y`.
    pub fn cost(&self) -> f64 {
        1.0 / self.inv_cost.value
    }
}
