//! Ensemble mixing, cost frontiers and cross-over points.
//!
//! Mixing two ensembles interpolates the yield linearly and the fidelity as
//! a yield-weighted average. Eliminating the mixing weight shows that the
//! fidelity is affine in the cost `C`, so mixed curves are straight lines in
//! the `(F, C)` plane.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub fidelity: f64,
    /// Communication cost per copy; infinite for zero yield.
    pub cost: f64,
}

impl CurvePoint {
    pub fn new(fidelity: f64, cost: f64) -> Self {
        Self { fidelity, cost }
    }

    pub fn inv_cost(&self) -> f64 {
        1.0 / self.cost
    }
}

/// Uses strategy 1 on a fraction `alpha` of the raw states and strategy 2
/// on the rest, then pools the outputs.
pub fn mix(p1: CurvePoint, p2: CurvePoint, alpha: f64) -> CurvePoint {
    let w1 = alpha / p1.cost;
    let w2 = (1.0 - alpha) / p2.cost;
    let inv = w1 + w2;
    CurvePoint {
        fidelity: (w1 * p1.fidelity + w2 * p2.fidelity) / inv,
        cost: 1.0 / inv,
    }
}

/// Mixes consecutive points (sorted by fidelity) on the given `alpha` grid;
/// `alpha = 1` reproduces the first point of each pair.
pub fn mix_curve(points: &[CurvePoint], alphas: &[f64]) -> Vec<CurvePoint> {
    let mut pts: Vec<CurvePoint> = points
        .iter()
        .copied()
        .filter(|p| p.cost.is_finite())
        .collect();
    pts.sort_by(|a, b| a.fidelity.total_cmp(&b.fidelity));
    let mut out = Vec::new();
    for w in pts.windows(2) {
        let mut grid: Vec<f64> = alphas.to_vec();
        grid.sort_by(|a, b| b.total_cmp(a));
        out.extend(grid.into_iter().map(|a| mix(w[0], w[1], a)));
    }
    if let [single] = pts.as_slice() {
        out.push(*single);
    }
    out
}

fn cross(o: CurvePoint, a: CurvePoint, b: CurvePoint) -> f64 {
    (a.fidelity - o.fidelity) * (b.cost - o.cost) - (a.cost - o.cost) * (b.fidelity - o.fidelity)
}

/// Cheapest cost at which each fidelity can be reached by mixing the given
/// points. Returns the vertices of the frontier, sorted by fidelity, with
/// cost nondecreasing. Between vertices the frontier is the straight
/// mixing segment.
pub fn frontier(points: &[CurvePoint]) -> Vec<CurvePoint> {
    let mut pts: Vec<CurvePoint> = points
        .iter()
        .copied()
        .filter(|p| p.cost.is_finite() && p.fidelity.is_finite())
        .collect();
    if pts.is_empty() {
        return pts;
    }
    pts.sort_by(|a, b| {
        a.fidelity
            .total_cmp(&b.fidelity)
            .then(a.cost.total_cmp(&b.cost))
    });
    let mut hull: Vec<CurvePoint> = Vec::new();
    for &p in &pts {
        if hull.last().is_some_and(|h| h.fidelity == p.fidelity) {
            continue;
        }
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    // drop vertices that a higher fidelity reaches more cheaply
    let cheapest = hull
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cost.total_cmp(&b.1.cost).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap();
    hull.split_off(cheapest)
}

/// Frontier cost at fidelity `f`, or `None` outside its range.
pub fn cost_at(front: &[CurvePoint], f: f64) -> Option<f64> {
    let first = front.first()?;
    let last = front.last()?;
    if f > last.fidelity {
        return None;
    }
    if f <= first.fidelity {
        return Some(first.cost);
    }
    let i = front.partition_point(|p| p.fidelity < f);
    let (a, b) = (front[i - 1], front[i]);
    let t = (f - a.fidelity) / (b.fidelity - a.fidelity);
    Some(a.cost + t * (b.cost - a.cost))
}

/// Smallest fidelity at which frontier `b` becomes strictly cheaper than
/// frontier `a`, after having been strictly more expensive. Ties alone do
/// not count. Both inputs are
/// frontier vertex lists. A frontier reaches lower fidelities at the cost
/// of its first vertex and cannot reach fidelities above its last one, so
/// when `b` extends beyond `a` and is still the more expensive at the end
/// of `a`, the crossing is reported at `a`'s last fidelity.
pub fn crossover(a: &[CurvePoint], b: &[CurvePoint]) -> Option<CurvePoint> {
    let a_end = a.last()?.fidelity;
    let b_end = b.last()?.fidelity;
    let hi = a_end.min(b_end);
    let mut fs: Vec<f64> = a
        .iter()
        .chain(b)
        .map(|p| p.fidelity)
        .filter(|&f| f <= hi)
        .collect();
    fs.sort_by(f64::total_cmp);
    fs.dedup();
    let diff = |f: f64| cost_at(b, f).unwrap() - cost_at(a, f).unwrap();
    let mut seen_above = false;
    let mut prev: Option<(f64, f64)> = None;
    for f in fs {
        let d = diff(f);
        if d < 0.0 && seen_above {
            let (f0, d0) = prev.unwrap();
            let t = if d0 == d { 0.0 } else { d0 / (d0 - d) };
            let fx = f0 + t * (f - f0);
            return Some(CurvePoint {
                fidelity: fx,
                cost: cost_at(a, fx).unwrap(),
            });
        }
        seen_above |= d > 0.0;
        prev = Some((f, d));
    }
    if b_end > a_end && seen_above && prev.is_some_and(|(_, d)| d >= 0.0) {
        return Some(CurvePoint {
            fidelity: a_end,
            cost: cost_at(b, a_end).unwrap(),
        });
    }
    None
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn pt(f: f64, c: f64) -> CurvePoint {
        CurvePoint::new(f, c)
    }

    #[test]
    fn mix_examples() {
        // Y_1 = 0.4, F_1 = 0.8; Y_2 = 0.1, F_2 = 0.95; N - 1 = 1
        let (p1, p2) = (pt(0.8, 1.0 / 0.4), pt(0.95, 1.0 / 0.1));
        let m = mix(p1, p2, 0.5);
        assert!((m.fidelity - 0.83).abs() < 1e-12);
        assert!((m.inv_cost() - 0.25).abs() < 1e-12);
        let m = mix(p1, p2, 1.0);
        assert!((m.fidelity - p1.fidelity).abs() < 1e-12 && (m.cost - p1.cost).abs() < 1e-12);
        let m = mix(p1, p2, 0.0);
        assert!((m.fidelity - p2.fidelity).abs() < 1e-12 && (m.cost - p2.cost).abs() < 1e-12);
    }

    #[test]
    fn mixed_points_lie_on_the_cost_segment() {
        let (p1, p2) = (pt(0.7, 3.0), pt(0.9, 11.0));
        for a in [0.1, 0.3, 0.77] {
            let m = mix(p1, p2, a);
            let t = (m.fidelity - p1.fidelity) / (p2.fidelity - p1.fidelity);
            assert!((m.cost - (p1.cost + t * (p2.cost - p1.cost))).abs() < 1e-12);
        }
        let curve = mix_curve(&[p2, p1], &[1.0, 0.5, 0.0]);
        assert_eq!(curve.len(), 3);
        assert!((curve[0].fidelity - p1.fidelity).abs() < 1e-12);
    }

    #[test]
    fn frontier_drops_dominated_points() {
        let pts = [
            pt(0.7, 3.0),
            pt(0.8, 10.0),
            pt(0.9, 11.0),
            pt(0.6, 5.0),
            pt(0.95, 40.0),
        ];
        let f = frontier(&pts);
        assert_eq!(f, vec![pt(0.7, 3.0), pt(0.9, 11.0), pt(0.95, 40.0)]);
        assert_eq!(frontier(&[pt(0.5, f64::INFINITY)]), vec![]);
    }

    #[test]
    fn crossover_examples() {
        let a = frontier(&[pt(0.7, 2.0), pt(0.9, 10.0)]);
        assert_eq!(crossover(&a, &a), None);
        let b = frontier(&[pt(0.7, 4.0), pt(0.9, 6.0)]);
        let x = crossover(&a, &b).unwrap();
        // 2 + 40 s = 4 + 10 s at s = F - 0.7 = 1/15
        assert!((x.fidelity - (0.7 + 1.0 / 15.0)).abs() < 1e-12);
        assert!((x.cost - (2.0 + 40.0 / 15.0)).abs() < 1e-9);
        let always_below = frontier(&[pt(0.7, 1.0), pt(0.9, 5.0)]);
        assert_eq!(crossover(&a, &always_below), None);
        assert_eq!(crossover(&a, &frontier(&[pt(0.95, 1.0)])), None);
    }

    #[test]
    fn equal_start_is_not_a_crossing() {
        let a = [pt(0.45, 9.0), pt(0.6, 20.0), pt(0.8, 60.0)];
        let b = [pt(0.5, 9.0), pt(0.7, 80.0)];
        assert!(crossover(&a, &b).is_none());
        let x = crossover(&b, &a).unwrap();
        assert!(x.fidelity > 0.5 && x.fidelity < 0.6, "{x:?}");
    }

    #[test]
    fn crossover_beyond_the_reach_of_a() {
        let a = frontier(&[pt(0.7, 2.0), pt(0.8, 10.0)]);
        // more expensive wherever a exists, but reaches further
        let b = frontier(&[pt(0.7, 4.0), pt(0.95, 50.0)]);
        let x = crossover(&a, &b).unwrap();
        assert_eq!(x.fidelity, 0.8);
        assert!((x.cost - (4.0 + 46.0 * 0.1 / 0.25)).abs() < 1e-9);
        // the reverse never happens: a is cheaper where both exist and
        // cannot go further
        assert_eq!(crossover(&b, &a), None);
    }

    proptest! {
        #[test]
        fn frontier_dominates_raw_points(raw in prop::collection::vec((0.3f64..1.0, 1.0f64..100.0), 1..20)) {
            let pts: Vec<CurvePoint> = raw.iter().map(|&(f, c)| pt(f, c)).collect();
            let front = frontier(&pts);
            prop_assert!(front.windows(2).all(|w| w[0].fidelity < w[1].fidelity && w[0].cost <= w[1].cost));
            for p in &pts {
                if let Some(c) = cost_at(&front, p.fidelity) {
                    prop_assert!(c <= p.cost + 1e-9);
                }
            }
            let best = pts.iter().map(|p| p.fidelity).fold(0.0, f64::max);
            prop_assert!((front.last().unwrap().fidelity - best).abs() < 1e-15);
        }
    }
}
