//! Pauli channels, the local-gate noise convention, and the local noise
//! equivalent (LNE).

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{pauli_index_oracle, Graph, IndexVector};
use crate::stab::{CliffordGate, Pauli, StabError, StabilizerRegister};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    InvalidProbability {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("qubit {qubit} is at site {actual}, not {expected}")]
    WrongSite {
        qubit: usize,
        expected: u32,
        actual: u32,
    },
    #[error("target fidelity {target} is not reachable (floor {floor})")]
    OutOfRange { target: f64, floor: f64 },
    #[error(transparent)]
    Stab(#[from] StabError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    PhaseFlip,
    BitFlip,
    Depolarizing,
}

/// Which channel acts on the qubits of a local operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalModel {
    /// The same channel at every site.
    Uniform(ChannelKind),
    /// Bit flips at site 0 (the GHZ center), phase flips everywhere else.
    Toy,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub q_channel: f64,
    pub channel: ChannelKind,
    pub q_local: f64,
    pub local: LocalModel,
    /// Whether the CNOT of a connection step suffers local noise.
    pub noisy_connect: bool,
}

impl NoiseParams {
    pub fn new(
        q_channel: f64,
        channel: ChannelKind,
        q_local: f64,
        local: LocalModel,
    ) -> Result<Self, NoiseError> {
        check_prob("q_channel", q_channel)?;
        check_prob("q_local", q_local)?;
        Ok(Self {
            q_channel,
            channel,
            q_local,
            local,
            noisy_connect: local != LocalModel::Toy,
        })
    }

    pub fn perfect() -> Self {
        Self {
            q_channel: 1.0,
            channel: ChannelKind::Depolarizing,
            q_local: 1.0,
            local: LocalModel::Uniform(ChannelKind::Depolarizing),
            noisy_connect: true,
        }
    }

    /// Depolarizing channel and local operations given by reliabilities.
    pub fn depolarizing(p: f64, p_local: f64) -> Result<Self, NoiseError> {
        Self::new(
            q_from_reliability(p)?,
            ChannelKind::Depolarizing,
            q_from_reliability(p_local)?,
            LocalModel::Uniform(ChannelKind::Depolarizing),
        )
    }

    /// Phase-flip channel with the toy local model used by the analytics.
    pub fn toy(q: f64, q_local: f64) -> Result<Self, NoiseError> {
        Self::new(q, ChannelKind::PhaseFlip, q_local, LocalModel::Toy)
    }

    pub fn local_kind(&self, site: u32) -> ChannelKind {
        match self.local {
            LocalModel::Uniform(k) => k,
            LocalModel::Toy if site == 0 => ChannelKind::BitFlip,
            LocalModel::Toy => ChannelKind::PhaseFlip,
        }
    }
}

fn check_prob(name: &'static str, value: f64) -> Result<(), NoiseError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(NoiseError::InvalidProbability {
            name,
            value,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

/// Depolarizing reliability `p = (4q - 1) / 3`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Reliability(f64);

impl Reliability {
    pub fn new(p: f64) -> Result<Self, NoiseError> {
        if (-1.0 / 3.0..=1.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(NoiseError::InvalidProbability {
                name: "p",
                value: p,
                lo: -1.0 / 3.0,
                hi: 1.0,
            })
        }
    }

    pub fn from_q(q: f64) -> Result<Self, NoiseError> {
        check_prob("q", q)?;
        Ok(Self((4.0 * q - 1.0) / 3.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn q(self) -> f64 {
        (3.0 * self.0 + 1.0) / 4.0
    }
}

pub fn q_from_reliability(p: f64) -> Result<f64, NoiseError> {
    Ok(Reliability::new(p)?.q())
}

pub fn reliability_from_q(q: f64) -> Result<f64, NoiseError> {
    Ok(Reliability::from_q(q)?.value())
}

/// Fidelity of a Bell pair after one half crossed a depolarizing channel
/// of reliability `p`. Equals the channel's `q`.
pub fn raw_pair_fidelity(p: f64) -> f64 {
    p + (1.0 - p) / 4.0
}

pub fn sample_channel<R: Rng + ?Sized>(
    kind: ChannelKind,
    q: f64,
    rng: &mut R,
) -> Result<Pauli, NoiseError> {
    check_prob("q", q)?;
    Ok(sample_unchecked(kind, q, rng))
}

// q == 1 draws nothing, so perfect runs leave the stream untouched.
fn sample_unchecked<R: Rng + ?Sized>(kind: ChannelKind, q: f64, rng: &mut R) -> Pauli {
    if q >= 1.0 || rng.random::<f64>() < q {
        return Pauli::I;
    }
    match kind {
        ChannelKind::PhaseFlip => Pauli::Z,
        ChannelKind::BitFlip => Pauli::X,
        ChannelKind::Depolarizing => [Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..3)],
    }
}

fn apply_local<R: Rng + ?Sized>(
    reg: &mut StabilizerRegister,
    qubit: usize,
    params: &NoiseParams,
    rng: &mut R,
) {
    let p = sample_unchecked(params.local_kind(reg.site(qubit)), params.q_local, rng);
    if p != Pauli::I {
        reg.apply_pauli_unchecked(p, qubit);
    }
}

/// Local noise on each operand, followed by the perfect gate.
pub fn noisy_gate<R: Rng + ?Sized>(
    reg: &mut StabilizerRegister,
    g: CliffordGate,
    params: &NoiseParams,
    rng: &mut R,
) -> Result<(), NoiseError> {
    noisy_block(reg, &g.qubits(), &[g], params, rng)
}

/// A fused local operation: one noise application per qubit in `operands`,
/// then every gate of `gates` without further noise.
pub fn noisy_block<R: Rng + ?Sized>(
    reg: &mut StabilizerRegister,
    operands: &[usize],
    gates: &[CliffordGate],
    params: &NoiseParams,
    rng: &mut R,
) -> Result<(), NoiseError> {
    for g in gates {
        for q in g.qubits() {
            if q >= reg.num_qubits() {
                return Err(StabError::QubitOutOfRange {
                    qubit: q,
                    n: reg.num_qubits(),
                }
                .into());
            }
        }
    }
    for &q in operands {
        if q >= reg.num_qubits() {
            return Err(StabError::QubitOutOfRange {
                qubit: q,
                n: reg.num_qubits(),
            }
            .into());
        }
        apply_local(reg, q, params, rng);
    }
    for &g in gates {
        reg.apply_gate(g)?;
    }
    Ok(())
}

/// Sends `qubit` from one site to another through the channel and counts
/// one channel use.
pub fn transmit<R: Rng + ?Sized>(
    reg: &mut StabilizerRegister,
    qubit: usize,
    from: u32,
    to: u32,
    params: &NoiseParams,
    rng: &mut R,
    uses: &mut u64,
) -> Result<(), NoiseError> {
    if qubit >= reg.num_qubits() {
        return Err(StabError::QubitOutOfRange {
            qubit,
            n: reg.num_qubits(),
        }
        .into());
    }
    let actual = reg.site(qubit);
    if actual != from {
        return Err(NoiseError::WrongSite {
            qubit,
            expected: from,
            actual,
        });
    }
    let p = sample_unchecked(params.channel, params.q_channel, rng);
    if p != Pauli::I {
        reg.apply_pauli_unchecked(p, qubit);
    }
    reg.set_site(qubit, to)?;
    *uses += 1;
    Ok(())
}

/// Exact probability that i.i.d. depolarizing noise with alteration `x`
/// on every vertex leaves the index at zero. Enumerates all `4^N` Pauli
/// patterns, so only for small graphs.
pub fn lne_fidelity_exact(g: &Graph, x: f64) -> f64 {
    let n = g.num_vertices();
    assert!(n <= 10, "exhaustive enumeration limited to 10 vertices");
    let weights = [1.0 - x, x / 3.0, x / 3.0, x / 3.0];
    let mut total = 0.0;
    for mut code in 0..4usize.pow(n as u32) {
        let mut mu = IndexVector::zeros(n);
        let mut w = 1.0;
        for a in 0..n {
            let k = code % 4;
            code /= 4;
            w *= weights[k];
            mu = pauli_index_oracle(&mu, Pauli::ALL[k], a, g);
        }
        if mu.is_zero() {
            total += w;
        }
    }
    total
}

/// Common random numbers for Monte Carlo LNE estimates: per sample and
/// vertex, an alteration threshold and a Pauli choice.
struct LneSamples {
    n: usize,
    u: Vec<f64>,
    which: Vec<Pauli>,
}

impl LneSamples {
    fn draw<R: Rng + ?Sized>(n: usize, samples: usize, rng: &mut R) -> Self {
        let mut u = Vec::with_capacity(n * samples);
        let mut which = Vec::with_capacity(n * samples);
        for _ in 0..n * samples {
            u.push(rng.random::<f64>());
            which.push([Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..3)]);
        }
        Self { n, u, which }
    }

    fn fidelity(&self, g: &Graph, x: f64) -> f64 {
        let samples = self.u.len() / self.n;
        let mut good = 0usize;
        let mut mu = IndexVector::zeros(self.n);
        for s in 0..samples {
            mu.0.iter_mut().for_each(|b| *b = false);
            for a in 0..self.n {
                let i = s * self.n + a;
                if self.u[i] < x {
                    mu = pauli_index_oracle(&mu, self.which[i], a, g);
                }
            }
            good += mu.is_zero() as usize;
        }
        good as f64 / samples as f64
    }
}

/// Monte Carlo fidelity under i.i.d. depolarizing noise with alteration `x`.
pub fn lne_fidelity<R: Rng + ?Sized>(g: &Graph, x: f64, samples: usize, rng: &mut R) -> f64 {
    LneSamples::draw(g.num_vertices(), samples, rng).fidelity(g, x)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LneOptions {
    pub tol: f64,
    pub samples: usize,
}

impl Default for LneOptions {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            samples: 100_000,
        }
    }
}

/// Local noise equivalent of `f_target` on graph `g`: the per-qubit
/// depolarizing alteration probability giving that fidelity. Returns the
/// estimate and its uncertainty.
pub fn lne_estimate<R: Rng + ?Sized>(
    g: &Graph,
    f_target: f64,
    opts: LneOptions,
    rng: &mut R,
) -> Result<(f64, f64), NoiseError> {
    let n = g.num_vertices();
    let floor = 0.5f64.powi(n as i32);
    if !(f_target > floor && f_target <= 1.0) {
        return Err(NoiseError::OutOfRange {
            target: f_target,
            floor,
        });
    }
    if f_target == 1.0 {
        return Ok((0.0, 0.0));
    }
    let crn = LneSamples::draw(n, opts.samples, rng);
    let (mut lo, mut hi) = (0.0f64, 0.75f64);
    if crn.fidelity(g, hi) > f_target {
        return Err(NoiseError::OutOfRange {
            target: f_target,
            floor,
        });
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..60 {
        x = 0.5 * (lo + hi);
        let f = crn.fidelity(g, x);
        if (f - f_target).abs() < opts.tol || hi - lo < 1e-9 {
            break;
        }
        if f > f_target {
            lo = x;
        } else {
            hi = x;
        }
    }
    let h = (0.02 * x).max(1e-3);
    let slope =
        (crn.fidelity(g, (x + h).min(0.75)) - crn.fidelity(g, (x - h).max(0.0))) / (2.0 * h);
    let sigma_f = (f_target * (1.0 - f_target) / opts.samples as f64).sqrt();
    let sigma = if slope.abs() > 0.0 {
        sigma_f / slope.abs()
    } else {
        f64::INFINITY
    };
    Ok((x, sigma))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::graph::{prepare_graph_state, readout_index};
    use crate::stab::InitialState;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn channel_extremes() {
        let mut r = rng(1);
        for kind in [
            ChannelKind::PhaseFlip,
            ChannelKind::BitFlip,
            ChannelKind::Depolarizing,
        ] {
            for _ in 0..100 {
                assert_eq!(sample_channel(kind, 1.0, &mut r).unwrap(), Pauli::I);
            }
        }
        for _ in 0..100 {
            assert_eq!(
                sample_channel(ChannelKind::PhaseFlip, 0.0, &mut r).unwrap(),
                Pauli::Z
            );
            assert_eq!(
                sample_channel(ChannelKind::BitFlip, 0.0, &mut r).unwrap(),
                Pauli::X
            );
            assert_ne!(
                sample_channel(ChannelKind::Depolarizing, 0.0, &mut r).unwrap(),
                Pauli::I
            );
        }
        assert!(sample_channel(ChannelKind::PhaseFlip, 1.5, &mut r).is_err());
    }

    #[test]
    fn depolarizing_frequencies() {
        let mut r = rng(2);
        let draws = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..draws {
            let p = sample_channel(ChannelKind::Depolarizing, 0.925, &mut r).unwrap();
            counts[Pauli::ALL.iter().position(|&x| x == p).unwrap()] += 1;
        }
        let sigma = (0.925f64 * 0.075 / draws as f64).sqrt();
        assert!((counts[0] as f64 / draws as f64 - 0.925).abs() < 3.0 * sigma);
        for c in &counts[1..] {
            let f = *c as f64 / draws as f64;
            let s = (0.025f64 * 0.975 / draws as f64).sqrt();
            assert!((f - 0.025).abs() < 4.0 * s, "{f}");
        }
    }

    #[test]
    fn reliability_examples() {
        assert_eq!(q_from_reliability(1.0).unwrap(), 1.0);
        assert!((q_from_reliability(0.9).unwrap() - 0.925).abs() < 1e-15);
        assert!((reliability_from_q(0.925).unwrap() - 0.9).abs() < 1e-15);
        assert!((raw_pair_fidelity(0.9) - 0.925).abs() < 1e-15);
        assert!(q_from_reliability(1.1).is_err());
        assert!(q_from_reliability(-0.5).is_err());
        assert_eq!(q_from_reliability(-1.0 / 3.0).unwrap(), 0.0);
    }

    #[test]
    fn toy_model_kinds() {
        let p = NoiseParams::toy(0.9, 0.95).unwrap();
        assert_eq!(p.local_kind(0), ChannelKind::BitFlip);
        assert_eq!(p.local_kind(3), ChannelKind::PhaseFlip);
        assert!(!p.noisy_connect);
        assert!(NoiseParams::depolarizing(0.9, 0.99).unwrap().noisy_connect);
    }

    #[test]
    fn perfect_gate_equals_apply_gate() {
        let mut r = rng(3);
        let mut a = StabilizerRegister::new(3, InitialState::AllPlus).unwrap();
        let mut b = a.clone();
        let before = r.clone();
        noisy_gate(
            &mut a,
            CliffordGate::Cz(0, 2),
            &NoiseParams::perfect(),
            &mut r,
        )
        .unwrap();
        b.apply_gate(CliffordGate::Cz(0, 2)).unwrap();
        assert_eq!(a.stabilizers(), b.stabilizers());
        assert_eq!(r, before);
    }

    #[test]
    fn transmit_counts_and_relabels() {
        let mut r = rng(4);
        let g = Graph::star(5);
        let mut reg = StabilizerRegister::new(5, InitialState::AllZero).unwrap();
        prepare_graph_state(&mut reg, &[0, 1, 2, 3, 4], &g).unwrap();
        let mut uses = 0;
        for leaf in 1..5 {
            transmit(
                &mut reg,
                leaf,
                0,
                leaf as u32,
                &NoiseParams::perfect(),
                &mut r,
                &mut uses,
            )
            .unwrap();
        }
        assert_eq!(uses, 4);
        assert_eq!(reg.sites(), &[0, 1, 2, 3, 4]);
        let err = transmit(
            &mut reg,
            2,
            0,
            1,
            &NoiseParams::perfect(),
            &mut r,
            &mut uses,
        )
        .unwrap_err();
        assert_eq!(
            err,
            NoiseError::WrongSite {
                qubit: 2,
                expected: 0,
                actual: 2
            }
        );
        assert_eq!(uses, 4);
        assert!(readout_index(&mut reg, &[0, 1, 2, 3, 4], &g, &mut r)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn phase_flip_composition() {
        // two phase flips compose to one with q = q1 q2 + (1-q1)(1-q2)
        let (q1, q2) = (0.8, 0.7);
        let q = q1 * q2 + (1.0 - q1) * (1.0 - q2);
        let mut r = rng(5);
        let shots = 50_000;
        let mut flipped = 0;
        for _ in 0..shots {
            let a = sample_channel(ChannelKind::PhaseFlip, q1, &mut r).unwrap();
            let b = sample_channel(ChannelKind::PhaseFlip, q2, &mut r).unwrap();
            flipped += (a != b) as usize;
        }
        let f = flipped as f64 / shots as f64;
        let s = (q * (1.0 - q) / shots as f64).sqrt();
        assert!((f - (1.0 - q)).abs() < 4.0 * s);
    }

    #[test]
    fn lne_fidelity_matches_enumeration() {
        let g = Graph::path(2);
        let mut r = rng(6);
        for x in [0.05, 0.2, 0.5] {
            let exact = lne_fidelity_exact(&g, x);
            let mc = lne_fidelity(&g, x, 100_000, &mut r);
            let s = (exact * (1.0 - exact) / 100_000.0).sqrt();
            assert!((mc - exact).abs() < 4.0 * s, "{x}: {mc} vs {exact}");
        }
        // on an edge only II, XZ, YY and ZX leave the index at zero
        let x: f64 = 0.3;
        let w = [1.0 - x, x / 3.0];
        let expected = w[0] * w[0] + 3.0 * w[1] * w[1];
        assert!((lne_fidelity_exact(&g, x) - expected).abs() < 1e-15);
    }

    #[test]
    fn lne_examples() {
        let g = Graph::star(4);
        let mut r = rng(7);
        let opts = LneOptions {
            tol: 1e-3,
            samples: 50_000,
        };
        assert_eq!(lne_estimate(&g, 1.0, opts, &mut r).unwrap(), (0.0, 0.0));
        let (x1, s1) = lne_estimate(&g, 0.95, opts, &mut r).unwrap();
        let (x2, s2) = lne_estimate(&g, 0.8, opts, &mut r).unwrap();
        assert!(x1 < x2 + 3.0 * (s1 + s2));
        assert!(s1 > 0.0 && s1 < 0.01);
        let exact = lne_fidelity_exact(&g, x1);
        assert!((exact - 0.95).abs() < 0.005, "{exact}");
        assert!(matches!(
            lne_estimate(&g, 0.01, opts, &mut r),
            Err(NoiseError::OutOfRange { .. })
        ));
    }

    proptest! {
        #[test]
        fn reliability_round_trip(q in 0.0f64..=1.0) {
            let p = reliability_from_q(q).unwrap();
            prop_assert!((q_from_reliability(p).unwrap() - q).abs() < 1e-12);
        }
    }
}
