//! Closed-form GHZ purification under phase-flip channels.
//!
//! States stay diagonal in the star-graph basis, have the center index at 0
//! and are symmetric under permutations of the leaves, so they are fixed by
//! `N` coefficients `r_j`: the weight of each basis state with `j` flipped
//! leaves. With perfect local operations a P2 step squares and
//! renormalizes `r`. In the toy noise model every step first applies the
//! local noise (bit flips on Alice, phase flips on the leaves) through a
//! transfer matrix.
//!
//! The perfect-operation functions are generic over the scalar so they can
//! be checked in exact rational arithmetic.

use num_traits::Num;
use serde::Serialize;
use thiserror::Error;

use crate::strategy::{crossover, frontier, CurvePoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("{name} = {value} is outside its allowed range")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("a GHZ state needs at least 2 parties, got {0}")]
    TooFewParties(usize),
}

/// Row `n` of Pascal's triangle.
pub fn binomial_row<T: Num + Clone>(n: usize) -> Vec<T> {
    let mut row = vec![T::one()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(T::one());
        for w in row.windows(2) {
            next.push(w[0].clone() + w[1].clone());
        }
        next.push(T::one());
        row = next;
    }
    row
}

fn powi<T: Num + Clone>(x: &T, e: usize) -> T {
    (0..e).fold(T::one(), |acc, _| acc * x.clone())
}

fn two<T: Num>() -> T {
    T::one() + T::one()
}

/// Coefficients `r_0 .. r_{N-1}` of a leaf-symmetric GHZ-diagonal state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RVector<T = f64> {
    pub r: Vec<T>,
    /// Purification steps applied so far.
    pub m: u32,
}

impl<T: Num + Clone> RVector<T> {
    /// Perfect GHZ state with every leaf sent through a phase-flip channel.
    pub fn initial(n: usize, q: T) -> Self {
        let flip = T::one() - q.clone();
        let r = (0..n)
            .map(|j| powi(&q, n - 1 - j) * powi(&flip, j))
            .collect();
        Self { r, m: 0 }
    }

    pub fn parties(&self) -> usize {
        self.r.len()
    }

    /// `sum_j binom(N-1, j) r_j`, 1 for a normalized state.
    pub fn mass(&self) -> T {
        let b = binomial_row::<T>(self.r.len() - 1);
        self.r
            .iter()
            .zip(b)
            .fold(T::zero(), |acc, (r, b)| acc + b * r.clone())
    }

    pub fn fidelity(&self) -> T {
        self.r[0].clone()
    }

    /// One noiseless P2 step: every coefficient is squared and the result
    /// renormalized. Returns the success probability.
    pub fn square_step(&mut self) -> T {
        for r in &mut self.r {
            *r = r.clone() * r.clone();
        }
        let k = self.mass();
        for r in &mut self.r {
            *r = r.clone() / k.clone();
        }
        self.m += 1;
        k
    }
}

/// Fidelity, last success probability and yield of a purification run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerfectRun<T = f64> {
    pub f: T,
    /// Success probability of step `m`; 1 when `m = 0`.
    pub k: T,
    pub y: T,
}

/// Bell pairs with one half sent through a phase-flip channel, purified
/// `m` times with perfect local operations.
pub fn bepp_perfect<T: Num + Clone>(q: T, m: u32) -> PerfectRun<T> {
    // a_i = q^(2^i) + (1-q)^(2^i)
    let mut good = q.clone();
    let mut bad = T::one() - q;
    let mut a = vec![T::one()];
    for _ in 0..m {
        good = good.clone() * good;
        bad = bad.clone() * bad;
        a.push(good.clone() + bad.clone());
    }
    let am = a[m as usize].clone();
    let f = good / am.clone();
    let k = if m == 0 {
        T::one()
    } else {
        let prev = a[m as usize - 1].clone();
        am.clone() / (prev.clone() * prev)
    };
    let denom = (1..m as usize).fold(powi(&two::<T>(), m as usize), |acc, i| acc * a[i].clone());
    PerfectRun {
        f,
        k,
        y: am / denom,
    }
}

/// GHZ states sent directly and purified `m` times with P2, perfect local
/// operations. Iterates the squaring map from the initial state.
pub fn mepp_perfect<T: Num + Clone>(n: usize, q: T, m: u32) -> (RVector<T>, PerfectRun<T>) {
    let mut r = RVector::initial(n, q);
    let mut k = T::one();
    let mut y = T::one();
    for _ in 0..m {
        k = r.square_step();
        y = y * k.clone() / two();
    }
    let f = r.fidelity();
    (r, PerfectRun { f, k, y })
}

fn check_prob(name: &'static str, value: f64) -> Result<(), AnalyticError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(AnalyticError::InvalidProbability { name, value })
    }
}

fn check_parties(n: usize) -> Result<(), AnalyticError> {
    if n < 2 {
        return Err(AnalyticError::TooFewParties(n));
    }
    Ok(())
}

/// Linear map of the local noise of one step on the `r` coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    n: usize,
    data: Vec<f64>,
}

impl TransferMatrix {
    pub fn parties(&self) -> usize {
        self.n
    }

    /// Coefficient `Lambda_jk`.
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.data[j * self.n + k]
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|j| (0..self.n).map(|k| self.get(j, k) * r[k]).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &TransferMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn binom_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Transfer matrix for `n` parties: independent phase flips on every leaf,
/// then a bit flip on Alice's qubit that flips all leaf indices at once.
pub fn build_transfer(n: usize, q_l: f64) -> Result<TransferMatrix, AnalyticError> {
    check_parties(n)?;
    check_prob("q_l", q_l)?;
    let leaves = n - 1;
    let e = 1.0 - q_l;
    // probability that the leaf noise turns a given k-state into some j-state
    let p = |j: usize, k: usize| -> f64 {
        (0..=k)
            .filter_map(|s| {
                let sbar = (j + s).checked_sub(k)?;
                let rest = leaves - k;
                if sbar > rest {
                    return None;
                }
                Some(
                    binom_f64(k, s)
                        * e.powi(s as i32)
                        * q_l.powi((k - s) as i32)
                        * binom_f64(rest, sbar)
                        * e.powi(sbar as i32)
                        * q_l.powi((rest - sbar) as i32),
                )
            })
            .sum()
    };
    let lambda = |j: usize, k: usize| binom_f64(leaves, k) / binom_f64(leaves, j) * p(j, k);
    let mut data = vec![0.0; n * n];
    for j in 0..n {
        for k in 0..n {
            data[j * n + k] = q_l * lambda(j, k) + e * lambda(leaves - j, k);
        }
    }
    Ok(TransferMatrix { n, data })
}

/// Transfer matrix by enumerating every flip pattern on every input basis
/// state. Exponential; for checking [`build_transfer`] on small `n`.
pub fn enumerate_transfer(n: usize, q_l: f64) -> Result<TransferMatrix, AnalyticError> {
    check_parties(n)?;
    check_prob("q_l", q_l)?;
    assert!(n <= 12, "enumeration limited to 12 parties");
    let leaves = n - 1;
    let all = (1u32 << leaves) - 1;
    let e = 1.0 - q_l;
    let mut data = vec![0.0; n * n];
    for j in 0..n {
        // representative output j-state
        let target = (1u32 << j) - 1;
        for input in 0..=all {
            let k = input.count_ones() as usize;
            for leaf_flips in 0..=all {
                for alice in [false, true] {
                    let mut out = input ^ leaf_flips;
                    if alice {
                        out ^= all;
                    }
                    if out != target {
                        continue;
                    }
                    let w = leaf_flips.count_ones() as i32;
                    let mut prob = e.powi(w) * q_l.powi(leaves as i32 - w);
                    prob *= if alice { e } else { q_l };
                    data[j * n + k] += prob;
                }
            }
        }
    }
    Ok(TransferMatrix { n, data })
}

/// One purification step of the toy model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ToyStep {
    /// Fidelity after the step.
    pub f: f64,
    /// Success probability.
    pub k: f64,
}

/// Results of the toy model after `steps.len()` purification steps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ToyCurve {
    pub parties: usize,
    /// Fidelity before any purification.
    pub f0: f64,
    pub steps: Vec<ToyStep>,
    pub fidelity: f64,
    pub yield_: f64,
    /// `(N - 1) / Y`.
    pub cost: f64,
}

impl ToyCurve {
    /// `(F, C)` after `0, 1, .., m` steps.
    pub fn points(&self) -> Vec<CurvePoint> {
        let edges = (self.parties - 1) as f64;
        let mut out = vec![CurvePoint::new(self.f0, edges)];
        let mut y = 1.0;
        for s in &self.steps {
            y *= s.k / 2.0;
            out.push(CurvePoint::new(s.f, edges / y));
        }
        out
    }
}

fn finish(parties: usize, f0: f64, steps: Vec<ToyStep>) -> ToyCurve {
    let yield_: f64 = steps.iter().map(|s| s.k / 2.0).product();
    let fidelity = steps.last().map_or(f0, |s| s.f);
    ToyCurve {
        parties,
        f0,
        steps,
        fidelity,
        yield_,
        cost: (parties - 1) as f64 / yield_,
    }
}

fn toy_steps(n: usize, q: f64, transfer: &TransferMatrix, m: u32) -> Vec<ToyStep> {
    let binom = binomial_row::<f64>(n - 1);
    let mut r = RVector::initial(n, q).r;
    (0..m)
        .map(|_| {
            let mut next = transfer.apply(&r);
            for x in &mut next {
                *x *= *x;
            }
            let k: f64 = next.iter().zip(&binom).map(|(x, b)| x * b).sum();
            for x in &mut next {
                *x /= k;
            }
            r = next;
            ToyStep { f: r[0], k }
        })
        .collect()
}

/// GHZ states sent directly and purified `m` times with P2 under the toy
/// noise model.
pub fn mepp_imperfect(n: usize, q: f64, q_l: f64, m: u32) -> Result<ToyCurve, AnalyticError> {
    check_prob("q", q)?;
    let transfer = build_transfer(n, q_l)?;
    Ok(finish(
        n,
        q.powi(n as i32 - 1),
        toy_steps(n, q, &transfer, m),
    ))
}

/// Bell pairs purified `m` times under the toy noise model, then
/// connected. Success probabilities are those of the pairs; fidelities are
/// the pair fidelity to the power `N - 1`.
pub fn bepp_imperfect(n: usize, q: f64, q_l: f64, m: u32) -> Result<ToyCurve, AnalyticError> {
    check_parties(n)?;
    let pair = mepp_imperfect(2, q, q_l, m)?;
    let edges = n as i32 - 1;
    let steps = pair
        .steps
        .iter()
        .map(|s| ToyStep {
            f: s.f.powi(edges),
            k: s.k,
        })
        .collect();
    Ok(finish(n, pair.f0.powi(edges), steps))
}

pub const F_MAX_TOL: f64 = 1e-12;
pub const F_MAX_STEPS: u32 = 64;

/// Fixed-point fidelity: steps are applied until the fidelity changes by
/// less than [`F_MAX_TOL`] or [`F_MAX_STEPS`] is reached. Returns the
/// fidelity and the number of steps taken.
fn fixed_point(fidelities: impl Iterator<Item = f64>) -> (f64, u32) {
    let mut prev: Option<f64> = None;
    let mut steps = 0;
    for f in fidelities {
        if let Some(p) = prev {
            if (f - p).abs() < F_MAX_TOL {
                return (f, steps);
            }
        }
        prev = Some(f);
        steps += 1;
    }
    (prev.unwrap_or(f64::NAN), steps.saturating_sub(1))
}

/// Maximal reachable fidelity of both strategies, `(BEPP, MEPP)`.
pub fn f_max(n: usize, q: f64, q_l: f64) -> Result<(f64, f64), AnalyticError> {
    let mepp = mepp_imperfect(n, q, q_l, F_MAX_STEPS)?;
    let bepp = bepp_imperfect(n, q, q_l, F_MAX_STEPS)?;
    let (fb, _) = fixed_point(bepp.points().into_iter().map(|p| p.fidelity));
    let (fm, _) = fixed_point(mepp.points().into_iter().map(|p| p.fidelity));
    Ok((fb, fm))
}

/// Analytic curves of both strategies for one number of parties.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepEntry {
    pub parties: usize,
    /// `(F, C)` after `0 ..= m_max` steps.
    pub bepp: Vec<CurvePoint>,
    pub mepp: Vec<CurvePoint>,
    /// Fidelity above which the mixed MEPP frontier is cheaper.
    pub crossover: Option<CurvePoint>,
    /// True when the crossing sits at the highest fidelity BEPP reaches,
    /// beyond which only MEPP can go.
    pub crossover_at_limit: bool,
    pub f_max_bepp: f64,
    pub f_max_mepp: f64,
}

/// Curves, crossovers and maximal fidelities for every number of parties.
pub fn analytic_sweep(
    parties: impl IntoIterator<Item = usize>,
    q: f64,
    q_l: f64,
    m_max: u32,
) -> Result<Vec<SweepEntry>, AnalyticError> {
    parties
        .into_iter()
        .map(|n| {
            let bepp = bepp_imperfect(n, q, q_l, m_max)?.points();
            let mepp = mepp_imperfect(n, q, q_l, m_max)?.points();
            let (f_max_bepp, f_max_mepp) = f_max(n, q, q_l)?;
            let fb = frontier(&bepp);
            let crossover = crossover(&fb, &frontier(&mepp));
            let crossover_at_limit = crossover
                .zip(fb.last())
                .is_some_and(|(x, end)| x.fidelity >= end.fidelity);
            Ok(SweepEntry {
                parties: n,
                bepp,
                mepp,
                crossover,
                crossover_at_limit,
                f_max_bepp,
                f_max_mepp,
            })
        })
        .collect()
}
