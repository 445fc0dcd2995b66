//! Batch runs over many strategies with flat-file output.
//!
//! Every point of a campaign gets its own random streams derived from the
//! master seed (see [`run_rng`]), so results do not depend on thread
//! scheduling and records are written in configuration order.

mod compare;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analytic::{analytic_sweep, AnalyticError, F_MAX_STEPS};
use crate::noise::{lne_estimate, LneOptions, NoiseError, NoiseParams};
use crate::strategy::{
    bepp_preset, crossover, fidelity_estimate, frontier, mepp_preset, parse, run_pooled,
    run_pooled_prefixes, run_rng, yield_estimate, CurvePoint, Estimate, Family, RunStats, Strategy,
    StrategyError,
};

pub use compare::{compare_mode, CompareConfig, CompareReport, CompareRow, Z_LIMIT};

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("{field}: {message}")]
    Config { field: String, message: String },
    #[error("{field}: {source}")]
    Strategy {
        field: String,
        #[source]
        source: StrategyError,
    },
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn config_error(field: &str, message: impl Into<String>) -> CampaignError {
    CampaignError::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

/// A Monte Carlo campaign: every strategy is run `runs` times with
/// `ensemble` target copies each, and the runs are pooled.
///
/// Strategies in `iterated` are reported after the distribution and after
/// every purification step. Steps past the maximal fidelity (see
/// [`useful_steps`]) stay in the output but are left out of frontiers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignConfig {
    pub family: Family,
    pub n: usize,
    pub strategies: Vec<String>,
    pub iterated: Vec<String>,
    pub noise: NoiseParams,
    pub ensemble: usize,
    pub runs: u32,
    pub seed: u64,
    /// Also estimate the local noise equivalent of every point.
    pub lne: bool,
    pub lne_samples: usize,
}

impl CampaignConfig {
    pub fn new(family: Family, n: usize, strategies: Vec<String>, noise: NoiseParams) -> Self {
        Self {
            family,
            n,
            strategies,
            iterated: Vec::new(),
            noise,
            ensemble: 10_000,
            runs: 4,
            seed: 0,
            lne: false,
            lne_samples: LneOptions::default().samples,
        }
    }

    /// Parses and validates every strategy against the target size:
    /// plain ones first, then iterated ones.
    pub fn validate(&self) -> Result<(Vec<Strategy>, Vec<Strategy>), CampaignError> {
        if self.n < 2 {
            return Err(config_error("n", "target state needs at least 2 qubits"));
        }
        if self.strategies.is_empty() && self.iterated.is_empty() {
            return Err(config_error("strategies", "no strategies given"));
        }
        if self.ensemble == 0 {
            return Err(config_error("ensemble", "must be positive"));
        }
        if self.runs == 0 {
            return Err(config_error("runs", "must be positive"));
        }
        let check = |name: &str, list: &[String]| {
            list.iter()
                .enumerate()
                .map(|(i, s)| {
                    let wrap = |source| CampaignError::Strategy {
                        field: format!("{name}[{i}]"),
                        source,
                    };
                    let st = parse(s).map_err(wrap)?;
                    st.validate(self.n).map_err(wrap)?;
                    Ok(st)
                })
                .collect::<Result<Vec<_>, CampaignError>>()
        };
        Ok((
            check("strategies", &self.strategies)?,
            check("iterated", &self.iterated)?,
        ))
    }
}

/// One output row. Empty fields are written as empty CSV cells.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub strategy: String,
    pub n_qubits: usize,
    pub steps: Option<usize>,
    pub fidelity: Option<f64>,
    pub fidelity_err: Option<f64>,
    #[serde(rename = "yield")]
    pub yield_: Option<f64>,
    pub yield_err: Option<f64>,
    pub inv_cost: Option<f64>,
    pub inv_cost_err: Option<f64>,
    pub lne: Option<f64>,
    pub lne_err: Option<f64>,
    pub channel_uses: Option<u64>,
    pub seed: Option<u64>,
}

impl Record {
    fn curve_point(&self) -> Option<CurvePoint> {
        let (f, inv) = (self.fidelity?, self.inv_cost?);
        (inv > 0.0).then(|| CurvePoint::new(f, 1.0 / inv))
    }

    fn summary(label: String, n: usize, p: CurvePoint, seed: Option<u64>) -> Self {
        let edges = (n - 1) as f64;
        Self {
            strategy: label,
            n_qubits: n,
            steps: None,
            fidelity: Some(p.fidelity),
            fidelity_err: None,
            yield_: Some(edges / p.cost),
            yield_err: None,
            inv_cost: Some(p.inv_cost()),
            inv_cost_err: None,
            lne: None,
            lne_err: None,
            channel_uses: None,
            seed,
        }
    }
}

/// Column order of the CSV output.
pub const CSV_HEADER: [&str; 13] = [
    "strategy",
    "n_qubits",
    "steps",
    "fidelity",
    "fidelity_err",
    "yield",
    "yield_err",
    "inv_cost",
    "inv_cost_err",
    "lne",
    "lne_err",
    "channel_uses",
    "seed",
];

/// Step count of the maximal fidelity of an iterated strategy. A step
/// counts as progress when it beats the best fidelity so far by more than
/// their combined error bar; the search stops after `patience` steps
/// without progress or at a missing estimate. `points[m]` is the estimate
/// after `m` steps.
pub fn useful_steps(points: &[Option<Estimate>], patience: usize) -> usize {
    let Some(Some(mut top)) = points.first().copied() else {
        return 0;
    };
    let mut best = 0;
    for (m, p) in points.iter().enumerate().skip(1) {
        let Some(p) = *p else { break };
        if p.value - top.value > p.err.hypot(top.err) {
            (best, top) = (m, p);
        } else if m - best >= patience.max(1) {
            break;
        }
    }
    best
}

/// Fidelity estimate for [`useful_steps`]. The error bar is at least
/// `1/N_f`, so a handful of survivors that all pass does not look exact.
fn stop_rule_estimate(rs: &RunStats) -> Option<Estimate> {
    let f = fidelity_estimate(rs).ok()?;
    Some(Estimate {
        value: f.value,
        err: f.err.max(1.0 / rs.n_final as f64),
    })
}

/// Number of distinct purification sub-protocols in `st`, at least 1.
fn cycle_length(st: &Strategy) -> usize {
    let mut kinds: Vec<_> = st
        .instructions
        .iter()
        .filter(|i| i.is_purification())
        .collect();
    kinds.sort_by_key(|i| format!("{i:?}"));
    kinds.dedup();
    kinds.len().max(1)
}

/// Appends `frontier:<family>` rows for every strategy family (first
/// token of the strategy string) and for all points together, then
/// `crossover:<a>/<b>` rows for every ordered pair of families whose
/// frontiers cross. Only records flagged in `use_point` enter frontiers.
fn summarize(records: &mut Vec<Record>, use_point: &[bool], n: usize, seed: Option<u64>) {
    let mut groups: BTreeMap<String, Vec<CurvePoint>> = BTreeMap::new();
    let mut order = Vec::new();
    for (r, _) in records.iter().zip(use_point).filter(|(_, &u)| u) {
        let family = r.strategy.split('-').next().unwrap_or_default().to_string();
        if !groups.contains_key(&family) {
            order.push(family.clone());
        }
        let entry = groups.entry(family).or_default();
        entry.extend(r.curve_point());
    }
    let fronts: Vec<(String, Vec<CurvePoint>)> = order
        .iter()
        .map(|f| (f.clone(), frontier(&groups[f])))
        .collect();
    let mut extra = Vec::new();
    for (fam, front) in &fronts {
        extra.extend(
            front
                .iter()
                .map(|&p| Record::summary(format!("frontier:{fam}"), n, p, seed)),
        );
    }
    if fronts.len() > 1 {
        let all: Vec<CurvePoint> = groups.values().flatten().copied().collect();
        extra.extend(
            frontier(&all)
                .into_iter()
                .map(|p| Record::summary("frontier:all".into(), n, p, seed)),
        );
    }
    for (a, fa) in &fronts {
        for (b, fb) in &fronts {
            if a == b {
                continue;
            }
            if let Some(x) = crossover(fa, fb) {
                extra.push(Record::summary(format!("crossover:{a}/{b}"), n, x, seed));
            }
        }
    }
    records.extend(extra);
}

/// Output of a campaign: data rows, then frontier and crossover rows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignResult<C: Serialize> {
    pub config: C,
    pub records: Vec<Record>,
}

#[derive(Serialize)]
struct Sidecar<'a, C: Serialize> {
    config: &'a C,
    seed_scheme: &'static str,
    columns: [&'static str; 13],
    rows: usize,
}

impl<C: Serialize> CampaignResult<C> {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), CampaignError> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        out.write_record(CSV_HEADER)?;
        for r in &self.records {
            out.serialize(r)?;
        }
        out.flush().map_err(|source| CampaignError::Io {
            path: PathBuf::from("<csv>"),
            source,
        })?;
        Ok(())
    }

    pub fn sidecar_json(&self) -> Result<String, CampaignError> {
        let s = Sidecar {
            config: &self.config,
            seed_scheme: "ChaCha8 seeded with the master seed, stream (point << 32) | run",
            columns: CSV_HEADER,
            rows: self.records.len(),
        };
        Ok(serde_json::to_string_pretty(&s)?)
    }

    /// Writes the CSV to `path` and the configuration to `<path>.json`.
    pub fn write(&self, path: &Path) -> Result<(), CampaignError> {
        let io_err = |p: &Path| {
            let p = p.to_path_buf();
            move |source| CampaignError::Io { path: p, source }
        };
        let file = File::create(path).map_err(io_err(path))?;
        self.write_csv(file)?;
        let side = sidecar_path(path);
        std::fs::write(&side, self.sidecar_json()? + "\n").map_err(io_err(&side))?;
        Ok(())
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn lne_for(cfg: &CampaignConfig, point: u32, f: f64, err: f64) -> (Option<f64>, Option<f64>) {
    let graph = cfg.family.graph(cfg.n);
    let opts = LneOptions {
        samples: cfg.lne_samples,
        ..LneOptions::default()
    };
    let at = |target: f64| {
        lne_estimate(
            &graph,
            target,
            opts,
            &mut run_rng(cfg.seed, point, u32::MAX),
        )
        .ok()
    };
    let Some((x, sigma_samples)) = at(f) else {
        return (None, None);
    };
    // spread from the fidelity's own error bar
    let hi = at((f + err).min(1.0)).map(|v| v.0);
    let lo = at(f - err).map(|v| v.0);
    let sigma_f = match (lo, hi) {
        (Some(lo), Some(hi)) => (lo - hi).abs() / 2.0,
        _ => 0.0,
    };
    (Some(x), Some(sigma_samples.hypot(sigma_f)))
}

fn data_record(cfg: &CampaignConfig, point: u32, st: &Strategy, rs: &RunStats) -> Record {
    let y = yield_estimate(rs);
    let edges = (cfg.n - 1) as f64;
    let f = fidelity_estimate(rs).ok();
    let (lne, lne_err) = match f {
        Some(f) if cfg.lne => lne_for(cfg, point, f.value, f.err),
        _ => (None, None),
    };
    Record {
        strategy: st.to_string(),
        n_qubits: cfg.n,
        steps: Some(st.purification_steps()),
        fidelity: f.map(|e| e.value),
        fidelity_err: f.map(|e| e.err),
        yield_: Some(y.value),
        yield_err: Some(y.err),
        inv_cost: Some(y.value / edges),
        inv_cost_err: Some(y.err / edges),
        lne,
        lne_err,
        channel_uses: Some(rs.channel_uses),
        seed: Some(cfg.seed),
    }
}

/// Runs every strategy of the configuration and appends `fmax:<family>`
/// rows for iterated strategies, then frontier and crossover rows.
/// Iterated strategies take the point indices after the plain ones.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignResult<CampaignConfig>, CampaignError> {
    let (plain, iterated) = cfg.validate()?;
    let jobs: Vec<(u32, &Strategy, bool)> = plain
        .iter()
        .map(|s| (s, false))
        .chain(iterated.iter().map(|s| (s, true)))
        .enumerate()
        .map(|(i, (s, it))| (i as u32, s, it))
        .collect();
    let groups = jobs
        .par_iter()
        .map(|&(point, st, it)| {
            let field = if it {
                format!("iterated[{}]", point as usize - plain.len())
            } else {
                format!("strategies[{point}]")
            };
            let wrap = |source| CampaignError::Strategy {
                field: field.clone(),
                source,
            };
            let (c, n) = (cfg.family, cfg.n);
            let runs = if it {
                run_pooled_prefixes(
                    st,
                    c,
                    n,
                    cfg.ensemble,
                    cfg.runs,
                    &cfg.noise,
                    cfg.seed,
                    point,
                )
                .map_err(wrap)?
            } else {
                vec![(
                    st.clone(),
                    run_pooled(
                        st,
                        c,
                        n,
                        cfg.ensemble,
                        cfg.runs,
                        &cfg.noise,
                        cfg.seed,
                        point,
                    )
                    .map_err(wrap)?,
                )]
            };
            let rows: Vec<Record> = runs
                .iter()
                .map(|(s, rs)| data_record(cfg, point, s, rs))
                .collect();
            let est: Vec<Option<Estimate>> =
                runs.iter().map(|(_, rs)| stop_rule_estimate(rs)).collect();
            Ok((it, rows, est))
        })
        .collect::<Result<Vec<_>, CampaignError>>()?;
    let mut records = Vec::new();
    let mut use_point = Vec::new();
    let mut fmax = Vec::new();
    for ((_, st, _), (it, rows, est)) in jobs.iter().zip(groups) {
        let keep = if it {
            let k = useful_steps(&est, cycle_length(st));
            let best = &rows[k];
            let family = best.strategy.split('-').next().unwrap_or_default();
            fmax.push(Record {
                strategy: format!("fmax:{family}"),
                yield_: None,
                yield_err: None,
                inv_cost: None,
                inv_cost_err: None,
                lne: None,
                lne_err: None,
                channel_uses: None,
                ..best.clone()
            });
            k + 1
        } else {
            rows.len()
        };
        use_point.extend((0..rows.len()).map(|i| i < keep));
        records.extend(rows);
    }
    records.extend(fmax);
    use_point.resize(records.len(), false);
    summarize(&mut records, &use_point, cfg.n, Some(cfg.seed));
    Ok(CampaignResult {
        config: cfg.clone(),
        records,
    })
}

/// Analytic toy-model evaluation for a range of party numbers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticConfig {
    pub parties: Vec<usize>,
    pub q: f64,
    pub q_local: f64,
    /// Steps reported per strategy; crossovers and maximal fidelities use
    /// up to [`F_MAX_STEPS`].
    pub steps: u32,
}

/// Same record schema as [`run_campaign`], with exact values and no error
/// bars. The bipartite strategy is `B2-S-Pb..-C(N-1)`, the multipartite
/// one `M<N>-S-P2..`. Adds `fmax:<family>` rows.
pub fn analytic_campaign(
    cfg: &AnalyticConfig,
) -> Result<CampaignResult<AnalyticConfig>, CampaignError> {
    if cfg.parties.is_empty() {
        return Err(config_error("parties", "empty range"));
    }
    if let Some(&n) = cfg.parties.iter().find(|&&n| n < 2) {
        return Err(config_error("parties", format!("{n} is below 2")));
    }
    let m_max = cfg.steps.max(F_MAX_STEPS);
    let sweep = analytic_sweep(cfg.parties.iter().copied(), cfg.q, cfg.q_local, m_max)?;
    let mut records = Vec::new();
    for e in sweep {
        let n = e.parties;
        let edges = (n - 1) as f64;
        let mut rows = Vec::new();
        for (curve, label) in [(&e.bepp, "B2"), (&e.mepp, "M")] {
            for (m, p) in curve.iter().enumerate().take(cfg.steps as usize + 1) {
                let st = if label == "B2" {
                    bepp_preset(n, m)
                } else {
                    mepp_preset(n, m, false)
                };
                let y = edges / p.cost;
                rows.push(Record {
                    strategy: st.to_string(),
                    n_qubits: n,
                    steps: Some(m),
                    fidelity: Some(p.fidelity),
                    fidelity_err: Some(0.0),
                    yield_: Some(y),
                    yield_err: Some(0.0),
                    inv_cost: Some(p.inv_cost()),
                    inv_cost_err: Some(0.0),
                    lne: None,
                    lne_err: None,
                    channel_uses: None,
                    seed: None,
                });
            }
        }
        let mepp_label = format!("M{n}");
        let fronts = [
            ("B2".to_string(), frontier(&e.bepp)),
            (mepp_label.clone(), frontier(&e.mepp)),
        ];
        for (fam, front) in &fronts {
            rows.extend(
                front
                    .iter()
                    .map(|&p| Record::summary(format!("frontier:{fam}"), n, p, None)),
            );
        }
        if let Some(x) = e.crossover {
            rows.push(Record::summary(
                format!("crossover:B2/{mepp_label}"),
                n,
                x,
                None,
            ));
        }
        for (fam, f) in [("B2".to_string(), e.f_max_bepp), (mepp_label, e.f_max_mepp)] {
            let mut r = Record::summary(
                format!("fmax:{fam}"),
                n,
                CurvePoint::new(f, f64::INFINITY),
                None,
            );
            r.yield_ = None;
            r.inv_cost = None;
            rows.push(r);
        }
        records.extend(rows);
    }
    Ok(CampaignResult {
        config: cfg.clone(),
        records,
    })
}
