//! Monte Carlo against the analytic toy model, point by point.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{bepp_imperfect, mepp_imperfect};
use crate::noise::NoiseParams;
use crate::strategy::{
    bepp_preset, fidelity_estimate, mepp_preset, run_pooled, yield_estimate, Family, RunStats,
};

use super::{config_error, CampaignError};

/// Largest accepted `|z|`.
pub const Z_LIMIT: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareConfig {
    pub n: usize,
    pub q: f64,
    pub q_local: f64,
    /// Steps `1 ..= steps` are compared for both strategies.
    pub steps: u32,
    pub ensemble: usize,
    pub runs: u32,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub strategy: String,
    pub steps: usize,
    pub fidelity_mc: Option<f64>,
    pub fidelity_err: Option<f64>,
    pub fidelity_analytic: f64,
    pub z_fidelity: Option<f64>,
    pub yield_mc: f64,
    pub yield_err: f64,
    pub yield_analytic: f64,
    pub z_yield: f64,
}

fn z(observed: f64, expected: f64, count: u64) -> f64 {
    let diff = observed - expected;
    let sigma = (expected * (1.0 - expected) / count as f64).sqrt();
    if diff == 0.0 {
        0.0
    } else if sigma > 0.0 {
        diff / sigma
    } else {
        diff.signum() * f64::INFINITY
    }
}

impl CompareRow {
    /// Scores use the binomial spread at the analytic value: fidelity out
    /// of the final states, yield out of the requested copies.
    pub fn new(strategy: String, steps: usize, rs: &RunStats, fidelity: f64, yield_: f64) -> Self {
        let f = fidelity_estimate(rs).ok();
        let y = yield_estimate(rs);
        Self {
            strategy,
            steps,
            fidelity_mc: f.map(|e| e.value),
            fidelity_err: f.map(|e| e.err),
            fidelity_analytic: fidelity,
            z_fidelity: f.map(|e| z(e.value, fidelity, rs.n_final)),
            yield_mc: y.value,
            yield_err: y.err,
            yield_analytic: yield_,
            z_yield: z(y.value, yield_, rs.m_copies),
        }
    }

    pub fn max_abs_z(&self) -> f64 {
        self.z_fidelity.unwrap_or(0.0).abs().max(self.z_yield.abs())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    pub config: CompareConfig,
    pub rows: Vec<CompareRow>,
}

impl CompareReport {
    pub fn max_abs_z(&self) -> f64 {
        self.rows
            .iter()
            .map(CompareRow::max_abs_z)
            .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_abs_z() <= Z_LIMIT
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<(), CampaignError> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush().map_err(|source| CampaignError::Io {
            path: "<csv>".into(),
            source,
        })?;
        Ok(())
    }
}

/// Runs the bipartite and the P2-only multipartite strategy on GHZ states
/// under the toy noise model and scores them against the analytics.
pub fn compare_mode(cfg: &CompareConfig) -> Result<CompareReport, CampaignError> {
    if cfg.n < 2 {
        return Err(config_error("n", "target state needs at least 2 qubits"));
    }
    if cfg.ensemble == 0 || cfg.runs == 0 {
        return Err(config_error(
            "ensemble",
            "ensemble and runs must be positive",
        ));
    }
    let params = NoiseParams::toy(cfg.q, cfg.q_local)?;
    let bepp = bepp_imperfect(cfg.n, cfg.q, cfg.q_local, cfg.steps)?;
    let mepp = mepp_imperfect(cfg.n, cfg.q, cfg.q_local, cfg.steps)?;
    let mut points = Vec::new();
    for (curve, bipartite) in [(&bepp, true), (&mepp, false)] {
        let mut y = 1.0;
        for (i, s) in curve.steps.iter().enumerate() {
            y *= s.k / 2.0;
            let m = i + 1;
            let st = if bipartite {
                bepp_preset(cfg.n, m)
            } else {
                mepp_preset(cfg.n, m, false)
            };
            points.push((st, m, s.f, y));
        }
    }
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(point, (st, m, f, y))| {
            let rs = run_pooled(
                st,
                Family::Ghz,
                cfg.n,
                cfg.ensemble,
                cfg.runs,
                &params,
                cfg.seed,
                point as u32,
            )
            .map_err(|source| CampaignError::Strategy {
                field: format!("points[{point}]"),
                source,
            })?;
            Ok(CompareRow::new(st.to_string(), *m, &rs, *f, *y))
        })
        .collect::<Result<Vec<_>, CampaignError>>()?;
    Ok(CompareReport {
        config: cfg.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_locals_agree() {
        let cfg = CompareConfig {
            n: 3,
            q: 0.9,
            q_local: 1.0,
            steps: 3,
            ensemble: 20_000,
            runs: 2,
            seed: 5,
        };
        let report = compare_mode(&cfg).unwrap();
        assert_eq!(report.rows.len(), 6);
        assert!(report.passed(), "{:#?}", report.rows);
    }

    #[test]
    fn corrupted_reference_fails() {
        let rs = RunStats::from_chain(100_000, &[41_000], 40_500);
        let good = CompareRow::new("B2-S-Pb".into(), 1, &rs, 0.81 / 0.82, 0.41);
        assert!(good.max_abs_z() <= Z_LIMIT, "{good:?}");
        let bad = CompareRow::new("B2-S-Pb".into(), 1, &rs, 0.95, 0.41);
        assert!(bad.max_abs_z() > Z_LIMIT);
        let cfg = CompareConfig {
            n: 2,
            q: 0.9,
            q_local: 1.0,
            steps: 1,
            ensemble: 1,
            runs: 1,
            seed: 0,
        };
        let report = CompareReport {
            config: cfg,
            rows: vec![good, bad],
        };
        assert!(!report.passed());
    }

    #[test]
    fn exact_agreement_scores_zero() {
        assert_eq!(z(1.0, 1.0, 10), 0.0);
        assert_eq!(z(0.9, 1.0, 10), f64::NEG_INFINITY);
    }
}
