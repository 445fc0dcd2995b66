//! Dense state-vector simulator used as a test oracle for the tableau.
//!
//! Qubit `q` is bit `q` of the basis index. Sizes are capped at
//! [`MAX_DENSE_QUBITS`].

use num_complex::Complex64;

use super::pauli::{CliffordGate, Pauli};
use super::StabError;

pub const MAX_DENSE_QUBITS: usize = 12;

const EPS: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    pub fn zero(n: usize) -> Result<Self, StabError> {
        if n > MAX_DENSE_QUBITS {
            return Err(StabError::OracleTooLarge {
                n,
                max: MAX_DENSE_QUBITS,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn plus(n: usize) -> Result<Self, StabError> {
        let mut s = Self::zero(n)?;
        for q in 0..n {
            s.hadamard(q);
        }
        Ok(s)
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        let n = amps.len().trailing_zeros() as usize;
        assert_eq!(1usize << n, amps.len(), "length must be a power of two");
        Self { n, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn hadamard(&mut self, q: usize) {
        let bit = 1 << q;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a = self.amps[i];
                let b = self.amps[i | bit];
                self.amps[i] = (a + b) * s;
                self.amps[i | bit] = (a - b) * s;
            }
        }
    }

    fn phase_on_one(&mut self, q: usize, ph: Complex64) {
        let bit = 1 << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a *= ph;
            }
        }
    }

    pub fn apply_gate(&mut self, g: CliffordGate) {
        match g {
            CliffordGate::Hadamard(q) => self.hadamard(q),
            CliffordGate::Phase(q) => self.phase_on_one(q, Complex64::new(0.0, 1.0)),
            CliffordGate::PhaseInv(q) => self.phase_on_one(q, Complex64::new(0.0, -1.0)),
            CliffordGate::Cz(a, b) => {
                let m = (1 << a) | (1 << b);
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    if i & m == m {
                        *amp = -*amp;
                    }
                }
            }
            CliffordGate::Cnot { control, target } => {
                let c = 1 << control;
                let t = 1 << target;
                for i in 0..self.amps.len() {
                    if i & c != 0 && i & t == 0 {
                        self.amps.swap(i, i | t);
                    }
                }
            }
        }
    }

    pub fn apply_pauli(&mut self, p: Pauli, q: usize) {
        let bit = 1 << q;
        match p {
            Pauli::I => {}
            Pauli::Z => self.phase_on_one(q, Complex64::new(-1.0, 0.0)),
            Pauli::X | Pauli::Y => {
                for i in 0..self.amps.len() {
                    if i & bit == 0 {
                        self.amps.swap(i, i | bit);
                    }
                }
                if p == Pauli::Y {
                    // Y = i X Z: after the swap, |0> carries -i and |1> carries +i
                    for (i, a) in self.amps.iter_mut().enumerate() {
                        *a *= if i & bit == 0 {
                            Complex64::new(0.0, -1.0)
                        } else {
                            Complex64::new(0.0, 1.0)
                        };
                    }
                }
            }
        }
    }

    /// Probability that measuring qubit `q` in the Z basis yields 1.
    pub fn prob_one(&self, q: usize) -> f64 {
        let bit = 1 << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects qubit `q` onto `outcome` and renormalizes. Returns the
    /// probability of that outcome before projection.
    pub fn project(&mut self, q: usize, outcome: bool) -> f64 {
        let bit = 1 << q;
        let p1 = self.prob_one(q);
        let p = if outcome { p1 } else { 1.0 - p1 };
        if p > EPS {
            let norm = p.sqrt();
            for (i, a) in self.amps.iter_mut().enumerate() {
                if (i & bit != 0) != outcome {
                    *a = Complex64::new(0.0, 0.0);
                } else {
                    *a /= norm;
                }
            }
        }
        p
    }

    /// Tensor product with `other` placed on the higher qubit indices.
    pub fn join(&self, other: &DenseState) -> Result<DenseState, StabError> {
        let n = self.n + other.n;
        if n > MAX_DENSE_QUBITS {
            return Err(StabError::OracleTooLarge {
                n,
                max: MAX_DENSE_QUBITS,
            });
        }
        let mut amps = Vec::with_capacity(1 << n);
        for b in &other.amps {
            for a in &self.amps {
                amps.push(a * b);
            }
        }
        Ok(DenseState { n, amps })
    }

    /// Restricts to the qubits in `keep` (in that order). Every other qubit
    /// must be in a computational basis state.
    pub fn extract(&self, keep: &[usize]) -> Result<DenseState, StabError> {
        let dropped: Vec<usize> = (0..self.n).filter(|q| !keep.contains(q)).collect();
        let mut fixed: Option<usize> = None;
        let drop_mask: usize = dropped.iter().map(|q| 1usize << q).sum();
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > EPS {
                let pattern = i & drop_mask;
                match fixed {
                    None => fixed = Some(pattern),
                    Some(f) if f != pattern => return Err(StabError::NotSeparable),
                    _ => {}
                }
            }
        }
        let fixed = fixed.unwrap_or(0);
        let k = keep.len();
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << k];
        for (j, out) in amps.iter_mut().enumerate() {
            let mut i = fixed;
            for (pos, &q) in keep.iter().enumerate() {
                if j & (1 << pos) != 0 {
                    i |= 1 << q;
                }
            }
            *out = self.amps[i];
        }
        Ok(DenseState { n: k, amps })
    }

    /// Applies a signed Pauli string and returns the resulting vector.
    pub fn apply_pauli_string(&self, paulis: &[Pauli], negative: bool) -> Vec<Complex64> {
        let mut s = self.clone();
        for (q, &p) in paulis.iter().enumerate() {
            s.apply_pauli(p, q);
        }
        if negative {
            for a in s.amps.iter_mut() {
                *a = -*a;
            }
        }
        s.amps
    }

    /// True when `sign * P |psi> == |psi>`.
    pub fn is_stabilized_by(&self, paulis: &[Pauli], negative: bool) -> bool {
        let v = self.apply_pauli_string(paulis, negative);
        v.iter().zip(&self.amps).all(|(a, b)| (a - b).norm() < 1e-8)
    }

    /// `|<self|other>|`, i.e. equality up to global phase when it is 1.
    pub fn overlap(&self, other: &DenseState) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hh_on_zero_is_uniform() {
        let mut s = DenseState::zero(2).unwrap();
        s.hadamard(0);
        s.hadamard(1);
        for a in s.amplitudes() {
            assert!((a.re - 0.5).abs() < 1e-12 && a.im.abs() < 1e-12);
        }
    }

    #[test]
    fn y_is_i_x_z() {
        let mut a = DenseState::plus(1).unwrap();
        a.apply_gate(CliffordGate::Phase(0));
        let mut b = a.clone();
        a.apply_pauli(Pauli::Y, 0);
        b.apply_pauli(Pauli::Z, 0);
        b.apply_pauli(Pauli::X, 0);
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y * Complex64::new(0.0, 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_large_registers() {
        assert!(DenseState::zero(13).is_err());
    }
}
