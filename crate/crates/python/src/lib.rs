use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use commcost::analytic::analytic_sweep;
use commcost::campaign::{
    analytic_campaign, compare_mode, run_campaign, AnalyticConfig, CampaignConfig, CompareConfig,
    Record,
};
use commcost::noise::{q_from_reliability, ChannelKind, LocalModel, NoiseParams};
use commcost::strategy::{fidelity_estimate, parse, yield_estimate, Family, RunStats};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn record_dict<'py>(py: Python<'py>, r: &Record) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("strategy", &r.strategy)?;
    d.set_item("n_qubits", r.n_qubits)?;
    d.set_item("steps", r.steps)?;
    d.set_item("fidelity", r.fidelity)?;
    d.set_item("fidelity_err", r.fidelity_err)?;
    d.set_item("yield", r.yield_)?;
    d.set_item("yield_err", r.yield_err)?;
    d.set_item("inv_cost", r.inv_cost)?;
    d.set_item("inv_cost_err", r.inv_cost_err)?;
    d.set_item("lne", r.lne)?;
    d.set_item("lne_err", r.lne_err)?;
    d.set_item("channel_uses", r.channel_uses)?;
    d.set_item("seed", r.seed)?;
    Ok(d)
}

fn channel(name: &str) -> PyResult<ChannelKind> {
    match name {
        "phase" => Ok(ChannelKind::PhaseFlip),
        "bit" => Ok(ChannelKind::BitFlip),
        "depol" => Ok(ChannelKind::Depolarizing),
        _ => Err(value_error(format!(
            "unknown channel {name:?}; use phase, bit or depol"
        ))),
    }
}

/// Normalized form of a strategy string; raises ValueError if malformed.
#[pyfunction]
#[pyo3(signature = (strategy, n=None))]
fn parse_strategy(strategy: &str, n: Option<usize>) -> PyResult<String> {
    let st = parse(strategy).map_err(value_error)?;
    if let Some(n) = n {
        st.validate(n).map_err(value_error)?;
    }
    Ok(st.to_string())
}

/// Retention probability of a depolarizing channel with reliability `p`.
#[pyfunction]
fn retention(p: f64) -> PyResult<f64> {
    q_from_reliability(p).map_err(value_error)
}

/// Yield and its error from the survivor chain `N_1 .. N_f` of `m` copies.
#[pyfunction]
fn estimate_yield(m: u64, chain: Vec<u64>) -> (f64, f64) {
    let n_final = chain.last().copied().unwrap_or(m);
    let y = yield_estimate(&RunStats::from_chain(m, &chain, n_final));
    (y.value, y.err)
}

#[pyfunction]
fn estimate_fidelity(n_good: u64, n_final: u64) -> PyResult<(f64, f64)> {
    if n_good > n_final {
        return Err(value_error("n_good exceeds n_final"));
    }
    let rs = RunStats::from_chain(n_final, &[], n_good);
    let f = fidelity_estimate(&rs).map_err(value_error)?;
    Ok((f.value, f.err))
}

/// Monte Carlo campaign. Channel levels are given as retention `q` or,
/// for depolarizing noise, reliability `p`; local noise is depolarizing
/// unless `toy` is set. Returns the records as dictionaries.
#[pyfunction]
#[pyo3(signature = (
    n, strategies=Vec::new(), iterated=Vec::new(), state="ghz", channel_kind="depol",
    q=None, p=None, q_local=None, p_local=None, toy=false, ensemble=10_000, runs=4, seed=0, lne=false
))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    n: usize,
    strategies: Vec<String>,
    iterated: Vec<String>,
    state: &str,
    channel_kind: &str,
    q: Option<f64>,
    p: Option<f64>,
    q_local: Option<f64>,
    p_local: Option<f64>,
    toy: bool,
    ensemble: usize,
    runs: u32,
    seed: u64,
    lne: bool,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let family = match state {
        "ghz" => Family::Ghz,
        "cluster" => Family::Cluster,
        _ => {
            return Err(value_error(format!(
                "unknown state {state:?}; use ghz or cluster"
            )))
        }
    };
    let level = |q: Option<f64>, p: Option<f64>| match (q, p) {
        (Some(q), None) => Ok(q),
        (None, Some(p)) => q_from_reliability(p).map_err(value_error),
        (None, None) => Ok(1.0),
        (Some(_), Some(_)) => Err(value_error("give either q or p, not both")),
    };
    let local = if toy {
        LocalModel::Toy
    } else {
        LocalModel::Uniform(ChannelKind::Depolarizing)
    };
    let noise = NoiseParams::new(
        level(q, p)?,
        channel(channel_kind)?,
        level(q_local, p_local)?,
        local,
    )
    .map_err(value_error)?;
    let mut cfg = CampaignConfig::new(family, n, strategies, noise);
    cfg.iterated = iterated;
    cfg.ensemble = ensemble;
    cfg.runs = runs;
    cfg.seed = seed;
    cfg.lne = lne;
    let result = py.detach(|| run_campaign(&cfg)).map_err(value_error)?;
    result.records.iter().map(|r| record_dict(py, r)).collect()
}

/// Exact toy-model records for GHZ states of every size in `parties`.
#[pyfunction]
#[pyo3(signature = (parties, q, q_local, steps=10))]
fn analytic<'py>(
    py: Python<'py>,
    parties: Vec<usize>,
    q: f64,
    q_local: f64,
    steps: u32,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = AnalyticConfig {
        parties,
        q,
        q_local,
        steps,
    };
    let result = analytic_campaign(&cfg).map_err(value_error)?;
    result.records.iter().map(|r| record_dict(py, r)).collect()
}

/// Fidelity and communication cost.
type Point = (f64, f64);

/// Crossover fidelity and cost of the toy model for each party number,
/// `None` where the strategies do not cross.
#[pyfunction]
#[pyo3(signature = (parties, q, q_local, steps=64))]
fn crossovers(
    parties: Vec<usize>,
    q: f64,
    q_local: f64,
    steps: u32,
) -> PyResult<Vec<(usize, Option<Point>)>> {
    let sweep = analytic_sweep(parties, q, q_local, steps).map_err(value_error)?;
    Ok(sweep
        .into_iter()
        .map(|e| (e.parties, e.crossover.map(|x| (x.fidelity, x.cost))))
        .collect())
}

/// Monte Carlo against the toy-model analytics. Returns
/// `(passed, max_abs_z)`.
#[pyfunction]
#[pyo3(signature = (n, q, q_local, steps=4, ensemble=25_000, runs=4, seed=0))]
#[allow(clippy::too_many_arguments)]
fn compare(
    py: Python<'_>,
    n: usize,
    q: f64,
    q_local: f64,
    steps: u32,
    ensemble: usize,
    runs: u32,
    seed: u64,
) -> PyResult<(bool, f64)> {
    let cfg = CompareConfig {
        n,
        q,
        q_local,
        steps,
        ensemble,
        runs,
        seed,
    };
    let report = py.detach(|| compare_mode(&cfg)).map_err(value_error)?;
    Ok((report.passed(), report.max_abs_z()))
}

#[pymodule]
fn commcost_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(parse_strategy, m)?)?;
    m.add_function(wrap_pyfunction!(retention, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_yield, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(analytic, m)?)?;
    m.add_function(wrap_pyfunction!(crossovers, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    Ok(())
}
