use std::fmt;

/// Single-qubit Pauli operator, phase not included.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// Symplectic encoding `(x, z)`; `Y` is `(1, 1)`.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Product `self * other = i^k * P`, returned as `(k mod 4, P)`.
    pub fn product(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        let k = match (self, other) {
            (I, _) | (_, I) => 0,
            (a, b) if a == b => 0,
            (X, Y) | (Y, Z) | (Z, X) => 1,
            _ => 3,
        };
        let (x1, z1) = self.bits();
        let (x2, z2) = other.bits();
        (k, Pauli::from_bits(x1 ^ x2, z1 ^ z2))
    }

    pub fn commutes_with(self, other: Pauli) -> bool {
        let (x1, z1) = self.bits();
        let (x2, z2) = other.bits();
        !((x1 & z2) ^ (z1 & x2))
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// Clifford generators used by the protocols. `PhaseInv` is S†.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CliffordGate {
    Hadamard(usize),
    Phase(usize),
    PhaseInv(usize),
    Cz(usize, usize),
    Cnot { control: usize, target: usize },
}

impl CliffordGate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            CliffordGate::Hadamard(q) | CliffordGate::Phase(q) | CliffordGate::PhaseInv(q) => {
                vec![q]
            }
            CliffordGate::Cz(a, b) => vec![a, b],
            CliffordGate::Cnot { control, target } => vec![control, target],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplication_table() {
        use Pauli::*;
        assert_eq!(X.product(Y), (1, Z));
        assert_eq!(Y.product(X), (3, Z));
        assert_eq!(Y.product(Z), (1, X));
        assert_eq!(Z.product(Y), (3, X));
        assert_eq!(Z.product(X), (1, Y));
        assert_eq!(X.product(Z), (3, Y));
        for p in Pauli::ALL {
            assert_eq!(p.product(p), (0, I));
            assert_eq!(I.product(p), (0, p));
        }
    }

    #[test]
    fn commutation_matches_multiplication_phase() {
        // PQ = i^k R and QP = i^j R commute iff k == j
        for p in Pauli::ALL {
            for q in Pauli::ALL {
                let (k1, r1) = p.product(q);
                let (k2, r2) = q.product(p);
                assert_eq!(r1, r2);
                assert_eq!(p.commutes_with(q), k1 == k2, "{p}{q}");
            }
        }
    }
}
