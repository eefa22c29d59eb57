//! Metric trees approximating a star of geodesics `[x₀, x_i]`.
//!
//! Legs are glued along products `p'(i, j)`: first the largest Gromov
//! product `(x, x')_{x₀}` over points `x ∈ [x₀, x_i]`, `x' ∈ [x₀, x_j]`,
//! then closed under chains (`p'(i, k) ≥ min(p'(i, j), p'(j, k))`). The first
//! step makes the map never expand distances; the closure makes incremental
//! gluing consistent. Depths are kept in half-steps so that half-integer
//! products on graphs need no rounding.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::exact::le_scaled_log2;
use crate::hypgeom::{big, big_int};
use crate::spaces::{ActionSpace, Length, Point};

#[derive(Clone, Debug)]
pub struct Leg {
    pub target: Point,
    /// Vertices of `[x₀, target]`.
    pub points: Vec<Point>,
    /// `(depth in half-steps, node)` along the leg, sorted by depth.
    pub nodes: Vec<(u64, usize)>,
    /// Leg it was glued onto and the gluing depth (half-steps).
    pub glued_to: Option<(usize, u64)>,
}

#[derive(Clone, Debug)]
pub struct ApproximationTree {
    pub parent: Vec<Option<usize>>,
    /// Node depth below the root `f(x₀)`, in half-steps.
    pub depth2: Vec<u64>,
    pub legs: Vec<Leg>,
    /// Closed gluing products in half-steps.
    pub products2: Vec<Vec<u64>>,
    /// Depth (half-steps) where legs i and j separate in the built tree.
    pub meet2: Vec<Vec<u64>>,
    pub edge: Length,
    pub delta: Length,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistortionReport {
    #[serde(serialize_with = "crate::ser::display")]
    pub max_shrink: Length,
    #[serde(serialize_with = "crate::ser::display")]
    pub max_expansion: Length,
    /// 2δ(log₂ n + 1), the value compared against
    pub bound_description: String,
    pub n_leaves: usize,
    pub pairs_checked: u64,
    pub leg_isometry: bool,
    pub within_bound: bool,
    /// False if the log comparison fell back to floating point.
    pub exact_comparison: bool,
    pub ok: bool,
}

/// Builds the approximation tree for the geodesics from `x0` to each target,
/// processing targets in input order.
pub fn approximate_tree(space: &ActionSpace, x0: &Point, targets: &[Point]) -> ApproximationTree {
    assert!(!targets.is_empty(), "need at least one target");
    let legs_pts: Vec<Vec<Point>> = targets.iter().map(|t| space.geodesic(x0, t)).collect();
    let n = legs_pts.len();

    // Largest Gromov product between points of two legs, in half-steps.
    let mut p2: Vec<Vec<u64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        return 2 * (legs_pts[i].len() as u64 - 1);
                    }
                    let mut best = 0;
                    for (s, x) in legs_pts[i].iter().enumerate() {
                        for (t, y) in legs_pts[j].iter().enumerate() {
                            let v = s as u64 + t as u64 - space.steps(x, y);
                            best = best.max(v);
                        }
                    }
                    best
                })
                .collect()
        })
        .collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = p2[i][k].min(p2[k][j]);
                if via > p2[i][j] {
                    p2[i][j] = via;
                }
            }
        }
    }

    let mut parent: Vec<Option<usize>> = Vec::new();
    let mut depth2: Vec<u64> = Vec::new();
    let mut legs: Vec<Leg> = Vec::with_capacity(n);
    parent.push(None);
    depth2.push(0);

    for (i, pts) in legs_pts.into_iter().enumerate() {
        let len2 = 2 * (pts.len() as u64 - 1);
        let (mut nodes, glued_to) = if i == 0 {
            (vec![(0u64, 0usize)], None)
        } else {
            let j = (0..i)
                .max_by_key(|&j| (p2[i][j], std::cmp::Reverse(j)))
                .unwrap();
            let dep = p2[i][j];
            // Make sure leg j has a node at depth `dep`.
            if legs[j].nodes.binary_search_by_key(&dep, |e| e.0).is_err() {
                let pos = legs[j].nodes.partition_point(|e| e.0 < dep);
                let (_, below) = legs[j].nodes[pos];
                let (_, above) = legs[j].nodes[pos - 1];
                let id = parent.len();
                parent.push(Some(above));
                depth2.push(dep);
                parent[below] = Some(id);
                for leg in legs.iter_mut() {
                    if let Ok(k) = leg.nodes.binary_search_by_key(&depth2[below], |e| e.0) {
                        if leg.nodes[k].1 == below {
                            leg.nodes.insert(k, (dep, id));
                        }
                    }
                }
            }
            let shared: Vec<(u64, usize)> =
                legs[j].nodes.iter().copied().filter(|e| e.0 <= dep).collect();
            (shared, Some((j, dep)))
        };
        let mut last = nodes.last().unwrap().1;
        let start = nodes.last().unwrap().0;
        let mut d = (start / 2 + 1) * 2;
        while d <= len2 {
            let id = parent.len();
            parent.push(Some(last));
            depth2.push(d);
            nodes.push((d, id));
            last = id;
            d += 2;
        }
        legs.push(Leg {
            target: targets[i].clone(),
            points: pts,
            nodes,
            glued_to,
        });
    }

    let meet2 = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let (a, b) = (&legs[i].nodes, &legs[j].nodes);
                    let k = a.iter().zip(b).take_while(|(x, y)| x.1 == y.1).count();
                    a[k - 1].0
                })
                .collect()
        })
        .collect();

    ApproximationTree {
        parent,
        depth2,
        legs,
        products2: p2,
        meet2,
        edge: space.edge(),
        delta: space.delta(),
    }
}

impl ApproximationTree {
    pub fn n_leaves(&self) -> usize {
        self.legs.len()
    }

    /// Node representing the `k`-th vertex of leg `i`.
    pub fn f(&self, leg: usize, k: usize) -> usize {
        let d = 2 * k as u64;
        let nodes = &self.legs[leg].nodes;
        nodes[nodes.binary_search_by_key(&d, |e| e.0).expect("integer depth node")].1
    }

    /// Tree distance in half-steps between vertex `s` of leg `i` and vertex
    /// `t` of leg `j`.
    pub fn d_tree2(&self, i: usize, s: usize, j: usize, t: usize) -> u64 {
        let (s, t) = (2 * s as u64, 2 * t as u64);
        let m = s.min(t).min(self.meet2[i][j]);
        s + t - 2 * m
    }

    /// Distance between two tree nodes, in half-steps, through parent links.
    pub fn node_dist2(&self, mut a: usize, mut b: usize) -> u64 {
        let (da, db) = (self.depth2[a], self.depth2[b]);
        while a != b {
            if self.depth2[a] >= self.depth2[b] {
                a = self.parent[a].unwrap();
            } else {
                b = self.parent[b].unwrap();
            }
        }
        da + db - 2 * self.depth2[a]
    }

    /// Compares all sampled pairs against the space metric.
    pub fn distortion_report(&self, space: &ActionSpace) -> DistortionReport {
        let n = self.legs.len();
        let (shrink2, expand2, pairs): (u64, u64, u64) = (0..n)
            .into_par_iter()
            .map(|i| {
                let (mut sh, mut ex, mut cnt) = (0u64, 0u64, 0u64);
                for j in i..n {
                    for (s, x) in self.legs[i].points.iter().enumerate() {
                        for (t, y) in self.legs[j].points.iter().enumerate() {
                            let d2 = 2 * space.steps(x, y);
                            let dt2 = self.d_tree2(i, s, j, t);
                            sh = sh.max(d2.saturating_sub(dt2));
                            ex = ex.max(dt2.saturating_sub(d2));
                            cnt += 1;
                        }
                    }
                }
                (sh, ex, cnt)
            })
            .reduce(|| (0, 0, 0), |a, b| (a.0.max(b.0), a.1.max(b.1), a.2 + b.2));
        let leg_isometry = self.legs.iter().enumerate().all(|(i, leg)| {
            leg.points.iter().enumerate().all(|(k, p)| {
                self.depth2[self.f(i, k)] == 2 * space.steps(&leg.points[0], p)
            })
        });
        let max_shrink = self.edge * Length::new(shrink2 as i64, 2);
        let max_expansion = self.edge * Length::new(expand2 as i64, 2);
        let cmp = le_scaled_log2(&big(max_shrink), &(big_int(2) * big(self.delta)), n as u64, 1);
        let ok = cmp.holds && expand2 == 0 && leg_isometry;
        DistortionReport {
            max_shrink,
            max_expansion,
            bound_description: format!("2*{}*(log2({n})+1)", self.delta),
            n_leaves: n,
            pairs_checked: pairs,
            leg_isometry,
            within_bound: cmp.holds,
            exact_comparison: cmp.exact,
            ok,
        }
    }

    /// `{vertices, parent, edge_length, f_images}`.
    pub fn to_json(&self) -> Value {
        let edge_length: Vec<String> = (0..self.parent.len())
            .map(|v| match self.parent[v] {
                None => "0".to_string(),
                Some(p) => (self.edge * Length::new((self.depth2[v] - self.depth2[p]) as i64, 2))
                    .to_string(),
            })
            .collect();
        let mut images = Vec::new();
        for (i, leg) in self.legs.iter().enumerate() {
            for (k, p) in leg.points.iter().enumerate() {
                images.push(json!({"leg": i, "index": k, "point": p.to_string(), "node": self.f(i, k)}));
            }
        }
        json!({
            "vertices": self.parent.len(),
            "parent": self.parent,
            "edge_length": edge_length,
            "f_images": images,
        })
    }

    /// Bound 2δ(log₂ n + 1) as an exact rational when n is a power of two.
    pub fn bound_if_exact(&self) -> Option<BigRational> {
        let n = self.legs.len() as u64;
        n.is_power_of_two().then(|| {
            big_int(2) * big(self.delta) * big_int(n.trailing_zeros() as i64 + 1)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::cycle_graph;

    #[test]
    fn tree_input_has_zero_distortion() {
        let s = ActionSpace::free_group_tree(2, Length::from_integer(1)).unwrap();
        let p = s.presentation();
        let targets: Vec<Point> = ["abab", "abBB", "Ab", "aa"]
            .iter()
            .map(|w| Point::Word(p.parse(w).unwrap()))
            .collect();
        let t = approximate_tree(&s, &s.origin(), &targets);
        let r = t.distortion_report(&s);
        assert!(r.ok);
        assert_eq!(r.max_shrink, Length::from_integer(0));
        // abBB reduces to aB; the spanned subtree is 1, a, ab, aba, abab, aB,
        // A, Ab, aa.
        assert_eq!(t.parent.len(), 9);
    }

    #[test]
    fn hexagon_two_legs() {
        let c6 = ActionSpace::graph(&cycle_graph(6), None, None, 1).unwrap();
        let t = approximate_tree(&c6, &Point::Vertex(0), &[Point::Vertex(2), Point::Vertex(4)]);
        // (v2, v4)_{v0} = ½(2 + 2 − 2) = 1; the leg points never meet beyond it.
        assert_eq!(t.legs[1].glued_to, Some((0, 2)));
        let r = t.distortion_report(&c6);
        assert!(r.ok);
        assert!(big(r.max_shrink) <= t.bound_if_exact().unwrap());
    }

    #[test]
    fn single_target_is_a_segment() {
        let c6 = ActionSpace::graph(&cycle_graph(6), None, None, 1).unwrap();
        let t = approximate_tree(&c6, &Point::Vertex(0), &[Point::Vertex(3)]);
        assert_eq!(t.parent.len(), 4);
        let r = t.distortion_report(&c6);
        assert!(r.ok);
        assert_eq!(r.max_shrink, Length::from_integer(0));
        let j = t.to_json();
        assert_eq!(j["vertices"], 4);
        assert_eq!(j["f_images"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn half_step_gluing_splits_edges() {
        // 5-cycle: (v2, v3)_{v0} = ½(2 + 2 − 1) = 3/2.
        let c5 = ActionSpace::graph(&cycle_graph(5), None, None, 1).unwrap();
        let t = approximate_tree(&c5, &Point::Vertex(0), &[Point::Vertex(2), Point::Vertex(3)]);
        assert_eq!(t.legs[1].glued_to, Some((0, 3)));
        assert!(t.depth2.contains(&3));
        for a in 0..t.parent.len() {
            assert_eq!(t.node_dist2(a, 0), t.depth2[a]);
        }
        assert!(t.distortion_report(&c5).ok);
    }
}
