//! Exact updates of graph-diagonal ensembles under noiseless protocol steps.

use crate::graph::{pauli_index_oracle, Graph, IndexVector};
use crate::noise::ChannelKind;
use crate::stab::Pauli;

use super::PurifyError;

pub const MAX_EXACT_VERTICES: usize = 12;

/// `rho = sum_mu lambda_mu |G, mu><G, mu|`, with `lambda` indexed by the
/// code of `mu` (vertex `a` is bit `a`).
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalEnsemble {
    pub graph: Graph,
    pub lambda: Vec<f64>,
}

impl DiagonalEnsemble {
    pub fn new(graph: Graph, lambda: Vec<f64>) -> Result<Self, PurifyError> {
        let n = graph.num_vertices();
        if n > MAX_EXACT_VERTICES {
            return Err(PurifyError::TooLarge {
                n,
                max: MAX_EXACT_VERTICES,
            });
        }
        if lambda.len() != 1 << n {
            return Err(PurifyError::WrongLength {
                expected: 1 << n,
                got: lambda.len(),
            });
        }
        let sum: f64 = lambda.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || lambda.iter().any(|&x| x < 0.0) {
            return Err(PurifyError::Unnormalized(sum));
        }
        Ok(Self { graph, lambda })
    }

    /// The noiseless state `|G, 0>`.
    pub fn perfect(graph: Graph) -> Result<Self, PurifyError> {
        let mut lambda = vec![0.0; 1 << graph.num_vertices()];
        lambda[0] = 1.0;
        Self::new(graph, lambda)
    }

    pub fn fidelity(&self) -> f64 {
        self.lambda[0]
    }

    pub fn coefficient(&self, mu: &IndexVector) -> f64 {
        self.lambda[mu.code()]
    }

    /// Applies a Pauli channel with retention `q` to vertex `a`.
    pub fn apply_channel(&mut self, a: usize, kind: ChannelKind, q: f64) {
        let flips: &[(Pauli, f64)] = match kind {
            ChannelKind::PhaseFlip => &[(Pauli::Z, 1.0 - q)],
            ChannelKind::BitFlip => &[(Pauli::X, 1.0 - q)],
            ChannelKind::Depolarizing => {
                let w = (1.0 - q) / 3.0;
                &[(Pauli::X, w), (Pauli::Y, w), (Pauli::Z, w)]
            }
        };
        let n = self.graph.num_vertices();
        let mut out: Vec<f64> = self.lambda.iter().map(|x| x * q).collect();
        for &(p, w) in flips {
            let delta = pauli_index_oracle(&IndexVector::zeros(n), p, a, &self.graph).code();
            for (code, &x) in self.lambda.iter().enumerate() {
                out[code ^ delta] += w * x;
            }
        }
        self.lambda = out;
    }

    fn side_mask(&self, purify_a: bool) -> Result<usize, PurifyError> {
        let coloring = self
            .graph
            .bipartition()
            .map_err(PurifyError::NotTwoColorable)?;
        let set = if purify_a { &coloring.a } else { &coloring.b };
        Ok(set.iter().map(|&v| 1usize << v).sum())
    }
}

/// Keeps pairs whose indices agree on `checked` bits; the remaining bits
/// add modulo 2.
fn parity_map(de: &DiagonalEnsemble, checked: usize) -> (DiagonalEnsemble, f64) {
    let size = de.lambda.len();
    let other = (size - 1) & !checked;
    let mut out = vec![0.0; size];
    for (c1, &x1) in de.lambda.iter().enumerate() {
        if x1 == 0.0 {
            continue;
        }
        // iterate over c2 sharing c1's checked bits
        let fixed = c1 & checked;
        let mut sub = other;
        loop {
            let c2 = fixed | sub;
            out[c1 ^ (c2 & other)] += x1 * de.lambda[c2];
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & other;
        }
    }
    let k: f64 = out.iter().sum();
    if k > 0.0 {
        out.iter_mut().for_each(|x| *x /= k);
    }
    (
        DiagonalEnsemble {
            graph: de.graph.clone(),
            lambda: out,
        },
        k,
    )
}

/// Noiseless P1 step: returns the kept ensemble and the success
/// probability.
pub fn exact_p1(de: &DiagonalEnsemble) -> Result<(DiagonalEnsemble, f64), PurifyError> {
    let mask = de.side_mask(true)?;
    Ok(parity_map(de, mask))
}

/// Noiseless P2 step.
pub fn exact_p2(de: &DiagonalEnsemble) -> Result<(DiagonalEnsemble, f64), PurifyError> {
    let mask = de.side_mask(false)?;
    Ok(parity_map(de, mask))
}

/// Bipartite step on `x = (x00, x01, x10, x11)`, where the first index
/// belongs to vertex 0. Returns the new coefficients and the success
/// probability.
pub fn bepp_coefficient_map(x: [f64; 4]) -> Result<([f64; 4], f64), PurifyError> {
    let sum: f64 = x.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || x.iter().any(|&v| v < 0.0) {
        return Err(PurifyError::Unnormalized(sum));
    }
    let [x00, x01, x10, x11] = x;
    let k = (x00 + x11).powi(2) + (x01 + x10).powi(2);
    Ok((
        [
            (x00 * x00 + x11 * x11) / k,
            (x01 * x01 + x10 * x10) / k,
            2.0 * x00 * x11 / k,
            2.0 * x01 * x10 / k,
        ],
        k,
    ))
}

#[cfg(test)]
mod tests {
    use num_rational::Ratio;
    use proptest::prelude::*;

    use super::*;

    /// Index order used by `bepp_coefficient_map` to code order.
    fn to_codes(x: [f64; 4]) -> Vec<f64> {
        // code = mu_0 + 2 mu_1
        vec![x[0], x[2], x[1], x[3]]
    }

    #[test]
    fn perfect_is_fixed_point() {
        for g in [Graph::star(4), Graph::path(5), Graph::path(2)] {
            let de = DiagonalEnsemble::perfect(g).unwrap();
            for step in [exact_p1, exact_p2] {
                let (out, k) = step(&de).unwrap();
                assert_eq!(k, 1.0);
                assert_eq!(out, de);
            }
        }
        let (x, k) = bepp_coefficient_map([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!((x, k), ([1.0, 0.0, 0.0, 0.0], 1.0));
    }

    #[test]
    fn coefficient_map_example() {
        let (x, k) = bepp_coefficient_map([0.7, 0.1, 0.1, 0.1]).unwrap();
        assert!((k - 0.68).abs() < 1e-15);
        assert!((x[0] - 25.0 / 34.0).abs() < 1e-15);
        assert!(bepp_coefficient_map([0.5, 0.1, 0.1, 0.1]).is_err());
    }

    #[test]
    fn coefficient_map_exact_in_rationals() {
        let r = |a: i64, b: i64| Ratio::new(a, b);
        let (x00, x01, x10, x11) = (r(7, 10), r(1, 10), r(1, 10), r(1, 10));
        let k = (x00 + x11) * (x00 + x11) + (x01 + x10) * (x01 + x10);
        assert_eq!(k, r(17, 25));
        assert_eq!((x00 * x00 + x11 * x11) / k, r(25, 34));
    }

    #[test]
    fn bepp_is_twirled_p2() {
        // the twirl maps (mu_A, mu_B) to (mu_A, mu_A xor mu_B)
        let x = [0.6, 0.2, 0.15, 0.05];
        let twirled = [x[0], x[1], x[3], x[2]];
        let de = DiagonalEnsemble::new(Graph::path(2), to_codes(twirled)).unwrap();
        let (out, k) = exact_p2(&de).unwrap();
        let (expected, k_ref) = bepp_coefficient_map(x).unwrap();
        assert!((k - k_ref).abs() < 1e-15);
        for (a, b) in out.lambda.iter().zip(to_codes(expected)) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn p2_on_edge_without_twirl() {
        // phase-flip noise only populates x00 and x01, where twirl is inert
        let x = [0.85, 0.15, 0.0, 0.0];
        let de = DiagonalEnsemble::new(Graph::path(2), to_codes(x)).unwrap();
        let (out, k) = exact_p2(&de).unwrap();
        let (expected, k_ref) = bepp_coefficient_map(x).unwrap();
        assert!((k - k_ref).abs() < 1e-15);
        assert!((out.fidelity() - expected[0]).abs() < 1e-15);
    }

    #[test]
    fn p1_formula_by_hand() {
        // G_2 with V_A = {0}: keep iff mu_0 == nu_0, mu_1 adds
        let x = [0.5, 0.2, 0.2, 0.1]; // codes 00, 10, 01, 11 as (mu_0, mu_1)
        let de = DiagonalEnsemble::new(Graph::path(2), x.to_vec()).unwrap();
        let (out, k) = exact_p1(&de).unwrap();
        let kk = (0.5f64 + 0.2).powi(2) + (0.2f64 + 0.1).powi(2);
        assert!((k - kk).abs() < 1e-15);
        assert!((out.lambda[0] - (0.25 + 0.04) / kk).abs() < 1e-15);
        assert!((out.lambda[2] - 0.2 / kk).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let de = DiagonalEnsemble::perfect(tri).unwrap();
        assert!(matches!(
            exact_p1(&de),
            Err(PurifyError::NotTwoColorable(_))
        ));
        assert!(matches!(
            DiagonalEnsemble::perfect(Graph::star(13)),
            Err(PurifyError::TooLarge { .. })
        ));
        assert!(DiagonalEnsemble::new(Graph::path(2), vec![0.5; 4]).is_err());
    }

    #[test]
    fn phase_flip_star_matches_r_form() {
        // leaves flipped with probability 1 - q: r_j = q^{N-1-j} (1-q)^j
        let (n, q) = (4usize, 0.9f64);
        let mut de = DiagonalEnsemble::perfect(Graph::star(n)).unwrap();
        for leaf in 1..n {
            de.apply_channel(leaf, ChannelKind::PhaseFlip, q);
        }
        for code in 0..1 << n {
            let mu = IndexVector::from_code(n, code);
            let expected = if mu.0[0] {
                0.0
            } else {
                let j = mu.weight() as i32;
                q.powi(n as i32 - 1 - j) * (1.0 - q).powi(j)
            };
            assert!((de.coefficient(&mu) - expected).abs() < 1e-15);
        }
        // P2 squares each coefficient and renormalizes
        let (out, k) = exact_p2(&de).unwrap();
        let k_ref: f64 = (0..n as i32)
            .map(|j| {
                let r = q.powi(n as i32 - 1 - j) * (1.0 - q).powi(j);
                binom(n - 1, j as usize) * r * r
            })
            .sum();
        assert!((k - k_ref).abs() < 1e-15);
        assert!((out.fidelity() - q.powi(2 * (n as i32 - 1)) / k_ref).abs() < 1e-15);
    }

    fn binom(n: usize, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    proptest! {
        #[test]
        fn maps_preserve_normalization(raw in prop::collection::vec(0.0f64..1.0, 16), path in any::<bool>()) {
            let sum: f64 = raw.iter().sum();
            prop_assume!(sum > 1e-6);
            let lambda = raw.iter().map(|x| x / sum).collect();
            let g = if path { Graph::path(4) } else { Graph::star(4) };
            let de = DiagonalEnsemble::new(g, lambda).unwrap();
            for step in [exact_p1, exact_p2] {
                let (out, k) = step(&de).unwrap();
                prop_assert!(k > 0.0 && k <= 1.0 + 1e-12);
                prop_assert!((out.lambda.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}
