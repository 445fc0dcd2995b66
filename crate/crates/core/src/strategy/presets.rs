//! Generators for the standard strategy families.

use serde::Serialize;

use super::{parse, Strategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PresetKind {
    Bepp,
    Mepp,
    Intermediate,
}

fn alternating(steps: usize, p1_first: bool) -> impl Iterator<Item = &'static str> {
    (0..steps).map(move |i| if (i % 2 == 0) == p1_first { "P1" } else { "P2" })
}

fn join(parts: impl IntoIterator<Item = String>) -> Strategy {
    let s: Vec<String> = parts.into_iter().collect();
    parse(&s.join("-")).expect("generated strategy strings are well formed")
}

/// Bell pairs purified `m` times, then connected into the `n`-vertex state.
pub fn bepp_preset(n: usize, m: usize) -> Strategy {
    let mut parts = vec!["B2".to_string(), "S".to_string()];
    parts.extend((0..m).map(|_| "Pb".to_string()));
    if n > 2 {
        parts.push(format!("C{}", n - 1));
    }
    join(parts)
}

/// The full state distributed directly and purified `m` times. With
/// `p1_first` the sub-protocols alternate starting with P1, otherwise only
/// P2 is used.
pub fn mepp_preset(n: usize, m: usize, p1_first: bool) -> Strategy {
    let mut parts = vec![format!("M{n}"), "S".to_string()];
    if p1_first {
        parts.extend(alternating(m, true).map(String::from));
    } else {
        parts.extend((0..m).map(|_| "P2".to_string()));
    }
    join(parts)
}

/// Strategies that distribute `k`-vertex fragments, purify, connect `L` of
/// them into the target and purify again, for every `k` with
/// `n = L k - (L - 1)`. The total number of purification steps is at most
/// `max_steps`. Bell-pair fragments are purified with the bipartite
/// protocol before the connection.
pub fn intermediate_presets(n: usize, max_steps: usize) -> Vec<Strategy> {
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    for k in 2..n {
        if !(n - 1).is_multiple_of(k - 1) {
            continue;
        }
        let l = (n - 1) / (k - 1);
        for before in 0..=max_steps {
            for after in 0..=max_steps - before {
                // Bell pairs with nothing after the connection are the
                // bipartite preset
                if k == 2 && after == 0 {
                    continue;
                }
                let mut parts = if k == 2 {
                    let mut p = vec!["B2".to_string(), "S".to_string()];
                    p.extend((0..before).map(|_| "Pb".to_string()));
                    p
                } else {
                    let mut p = vec![format!("M{k}"), "S".to_string()];
                    p.extend(alternating(before, true).map(String::from));
                    p
                };
                parts.push(format!("C{l}"));
                parts.extend(alternating(after, true).map(String::from));
                out.push(join(parts));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremal_strings() {
        assert_eq!(bepp_preset(5, 3).to_string(), "B2-S-Pb-Pb-Pb-C4");
        assert_eq!(bepp_preset(2, 1).to_string(), "B2-S-Pb");
        assert_eq!(bepp_preset(13, 0).to_string(), "B2-S-C12");
        assert_eq!(mepp_preset(13, 3, true).to_string(), "M13-S-P1-P2-P1");
        assert_eq!(mepp_preset(4, 2, false).to_string(), "M4-S-P2-P2");
        assert_eq!(mepp_preset(4, 0, true).to_string(), "M4-S");
    }

    #[test]
    fn intermediate_strategies_are_valid() {
        for n in [5, 7, 13] {
            let all = intermediate_presets(n, 4);
            assert!(!all.is_empty());
            for st in &all {
                st.validate(n).unwrap();
                assert!(st.purification_steps() <= 4);
            }
        }
        // fragment sizes 2, 3, 4, 5 and 7 for N = 13
        let sizes: std::collections::BTreeSet<String> = intermediate_presets(13, 4)
            .iter()
            .map(|s| s.family_label())
            .collect();
        assert_eq!(sizes.len(), 5);
        assert!(intermediate_presets(13, 4)
            .iter()
            .any(|s| s.to_string() == "M4-S-P1-C4-P1-P2"));
        assert!(intermediate_presets(2, 4).is_empty());
    }
}
