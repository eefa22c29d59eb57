//! Large subsets U₁, U₂ ⊆ U whose cross products are reduced at x₀: the
//! A/B peeling over a sphere on trees, the sphere-pair search on graphs of
//! bounded geometry, and peeling through an approximation tree.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::hypgeom::gp2;
use crate::spaces::{ActionSpace, Length, Point};
use crate::treeapprox::approximate_tree;
use crate::words::{ElementSet, GroupElement};

/// `(u⁻¹x₀, v x₀)_{x₀} ≤ tol`.
pub fn reduced_at(space: &ActionSpace, u: &GroupElement, v: &GroupElement, x0: &Point, tol: Length) -> bool {
    let pres = space.presentation();
    let a = space.act(&pres.inverse(u), x0);
    let b = space.act(v, x0);
    space.edge() * Length::new(gp2(space, &a, &b, x0) as i64, 2) <= tol
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum FailReason {
    TooSmall { size: usize },
    /// Fewer than ¾ of U displace x₀ by at least the filter length.
    ConcentratedOrBelow {
        n_long: usize,
        n_total: usize,
        #[serde(serialize_with = "crate::ser::display")]
        filter: Length,
    },
    /// The class `point` holds more mass than a true energy minimiser allows.
    MinimalEnergy {
        point: String,
        n_point: usize,
        n_total: usize,
    },
    /// No sphere pair of the required shape carries enough elements.
    NoSeparatedPairs { best: usize, needed: String },
    NotRepresentable {
        #[serde(serialize_with = "crate::ser::display")]
        radius: Length,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    TreeRecursion,
    SphereGraph,
    ViaTreeApprox,
    Failed(FailReason),
}

/// Exhaustive check of both cross families.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossCertificate {
    /// max (u₁⁻¹x₀, u₂x₀)_{x₀}
    #[serde(serialize_with = "crate::ser::display")]
    pub max_u1inv_u2: Length,
    /// max (u₂⁻¹x₀, u₁x₀)_{x₀}
    #[serde(serialize_with = "crate::ser::display")]
    pub max_u2inv_u1: Length,
    pub products_checked: u64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeelTrace {
    pub n_total: usize,
    /// Elements dropped by the displacement filter.
    pub n_filtered_out: usize,
    pub sphere_points: usize,
    pub rounds: usize,
    pub stop: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionResult {
    pub u1: ElementSet,
    pub u2: ElementSet,
    #[serde(serialize_with = "crate::ser::display")]
    pub tolerance: Length,
    pub certified: bool,
    pub branch: Branch,
    pub certificate: Option<CrossCertificate>,
    pub trace: PeelTrace,
}

impl ReductionResult {
    fn failed(reason: FailReason, tolerance: Length, trace: PeelTrace) -> Self {
        Self {
            u1: ElementSet::default(),
            u2: ElementSet::default(),
            tolerance,
            certified: false,
            branch: Branch::Failed(reason),
            certificate: None,
            trace,
        }
    }

    pub fn is_failed(&self) -> bool {
        matches!(self.branch, Branch::Failed(_))
    }
}

/// Checks every `(u₁⁻¹x₀, u₂x₀)_{x₀}` and `(u₂⁻¹x₀, u₁x₀)_{x₀}` against `tol`.
pub fn certify(space: &ActionSpace, u1: &ElementSet, u2: &ElementSet, x0: &Point, tol: Length) -> CrossCertificate {
    let pres = space.presentation();
    let fwd = |s: &ElementSet| -> Vec<Point> { s.iter().map(|g| space.act(g, x0)).collect() };
    let bwd = |s: &ElementSet| -> Vec<Point> { s.iter().map(|g| space.act(&pres.inverse(g), x0)).collect() };
    let max_gp2 = |a: &[Point], b: &[Point]| -> u64 {
        a.par_iter()
            .map(|p| b.iter().map(|q| gp2(space, p, q, x0)).max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    };
    let m12 = max_gp2(&bwd(u1), &fwd(u2));
    let m21 = max_gp2(&bwd(u2), &fwd(u1));
    let half = |k: u64| space.edge() * Length::new(k as i64, 2);
    CrossCertificate {
        max_u1inv_u2: half(m12),
        max_u2inv_u1: half(m21),
        products_checked: 2 * (u1.len() * u2.len()) as u64,
        holds: half(m12) <= tol && half(m21) <= tol,
    }
}

/// Elements split by class of their outgoing and incoming sphere points.
struct Classified {
    members: Vec<(GroupElement, usize, usize)>,
    labels: Vec<String>,
    n_total: usize,
    n_filtered_out: usize,
}

/// The A/B recursion: A⁽⁰⁾ = all classes, each round moves the smallest
/// remaining class from A to B.
fn peel(space: &ActionSpace, c: Classified, x0: &Point, tol: Length, branch: Branch) -> ReductionResult {
    let k = c.labels.len();
    let n = c.n_total;
    let big = |m: usize| 100 * m > n;
    let mut in_b = vec![false; k];
    // Members whose outgoing class is in B iff `out_b`, incoming iff `in_b`.
    let select = |in_b: &[bool], out_b: bool, inc_b: bool| -> ElementSet {
        c.members
            .iter()
            .filter(|(_, o, i)| in_b[*o] == out_b && in_b[*i] == inc_b)
            .map(|(g, _, _)| g.clone())
            .collect()
    };
    let mut trace = PeelTrace {
        n_total: n,
        n_filtered_out: c.n_filtered_out,
        sphere_points: k,
        rounds: 0,
        stop: String::new(),
    };
    let mut bb_prev = 0;
    for round in 0..=k {
        if round > 0 {
            in_b[round - 1] = true;
        }
        trace.rounds = round;
        let (mut ab, mut ba, mut bb, mut aa) = (0, 0, 0, 0);
        for (_, o, i) in &c.members {
            match (in_b[*o], in_b[*i]) {
                (false, true) => ab += 1,
                (true, false) => ba += 1,
                (true, true) => bb += 1,
                (false, false) => aa += 1,
            }
        }
        let (u1, u2) = if big(ab) {
            trace.stop = format!("|U_AB| = {ab} > |U|/100 at round {round}");
            let s = select(&in_b, false, true);
            (s.clone(), s)
        } else if big(ba) {
            trace.stop = format!("|U_BA| = {ba} > |U|/100 at round {round}");
            let s = select(&in_b, true, false);
            (s.clone(), s)
        } else if big(bb) && !big(bb_prev) {
            if !big(aa) {
                let a = round - 1;
                let n_point = c.members.iter().filter(|(_, o, i)| *o == a && *i == a).count();
                trace.stop = format!("|U_AA| = {aa} <= |U|/100 when |U_BB| crossed at round {round}");
                return ReductionResult::failed(
                    FailReason::MinimalEnergy {
                        point: c.labels[a].clone(),
                        n_point,
                        n_total: n,
                    },
                    tol,
                    trace,
                );
            }
            trace.stop = format!("|U_BB| = {bb} crossed |U|/100 at round {round}, |U_AA| = {aa}");
            (select(&in_b, false, false), select(&in_b, true, true))
        } else {
            bb_prev = bb;
            continue;
        };
        let cert = certify(space, &u1, &u2, x0, tol);
        return ReductionResult {
            u1,
            u2,
            tolerance: tol,
            certified: cert.holds,
            branch,
            certificate: Some(cert),
            trace,
        };
    }
    trace.stop = "no stopping round".into();
    ReductionResult::failed(
        FailReason::NoSeparatedPairs {
            best: 0,
            needed: "a stopping round".into(),
        },
        tol,
        trace,
    )
}

/// Applies the displacement filter `|u x₀ − x₀| ≥ 4r` and the ¾ precheck.
fn long_elements(
    space: &ActionSpace,
    u: &ElementSet,
    x0: &Point,
    filter: Length,
) -> Result<Vec<GroupElement>, FailReason> {
    let long: Vec<GroupElement> = u
        .iter()
        .filter(|g| space.dist(&space.act(g, x0), x0) >= filter)
        .cloned()
        .collect();
    if 4 * long.len() < 3 * u.len() {
        return Err(FailReason::ConcentratedOrBelow {
            n_long: long.len(),
            n_total: u.len(),
            filter,
        });
    }
    Ok(long)
}

fn empty_trace(u: &ElementSet) -> PeelTrace {
    PeelTrace {
        n_total: u.len(),
        n_filtered_out: 0,
        sphere_points: 0,
        rounds: 0,
        stop: String::new(),
    }
}

/// Peeling over the sphere `S(x₀, r)` of a tree. U_{A,B} holds the `u` with
/// `|u x₀ − x₀| ≥ 4r` whose geodesic to `u x₀` meets A and to `u⁻¹x₀` meets B.
pub fn reduce_tree(space: &ActionSpace, u: &ElementSet, x0: &Point, r: Length) -> ReductionResult {
    assert!(space.is_tree(), "reduce_tree needs a tree backend");
    let k = match space.length_to_steps(r) {
        Ok(k) if k > 0 => k,
        _ => return ReductionResult::failed(FailReason::NotRepresentable { radius: r }, r, empty_trace(u)),
    };
    let long = match long_elements(space, u, x0, r * Length::from_integer(4)) {
        Ok(l) => l,
        Err(e) => return ReductionResult::failed(e, r, empty_trace(u)),
    };
    let pres = space.presentation();
    let ends: Vec<(Point, Point)> = long
        .par_iter()
        .map(|g| {
            let out = space.point_along(x0, &space.act(g, x0), k);
            let inn = space.point_along(x0, &space.act(&pres.inverse(g), x0), k);
            (out, inn)
        })
        .collect();
    let mut index: BTreeMap<Point, usize> = BTreeMap::new();
    for (o, i) in &ends {
        index.insert(o.clone(), 0);
        index.insert(i.clone(), 0);
    }
    let labels: Vec<String> = index.keys().map(|p| p.to_string()).collect();
    for (pos, v) in index.values_mut().enumerate() {
        *v = pos;
    }
    let members = long
        .into_iter()
        .zip(&ends)
        .map(|(g, (o, i))| (g, index[o], index[i]))
        .collect();
    let c = Classified {
        members,
        labels,
        n_total: u.len(),
        n_filtered_out: u.len() - ends.len(),
    };
    peel(space, c, x0, r, Branch::TreeRecursion)
}

/// Sphere version for bounded geometry: `U_{y,z}` holds the `u` with
/// `|u x₀ − x₀| ≥ 4R`, `(x₀, u x₀)_y ≤ δ` and `(x₀, u⁻¹x₀)_z ≤ δ`. Certified
/// at tolerance `R`. On trees the sphere is restricted to the geodesics of U.
pub fn reduce_graph(space: &ActionSpace, u: &ElementSet, x0: &Point, radius: Length) -> ReductionResult {
    let mut trace = empty_trace(u);
    if u.len() < 2 {
        return ReductionResult::failed(FailReason::TooSmall { size: u.len() }, radius, trace);
    }
    if space.length_to_steps(radius).is_err() {
        return ReductionResult::failed(FailReason::NotRepresentable { radius }, radius, trace);
    }
    let long = match long_elements(space, u, x0, radius * Length::from_integer(4)) {
        Ok(l) => l,
        Err(e) => return ReductionResult::failed(e, radius, trace),
    };
    trace.n_filtered_out = u.len() - long.len();
    let pres = space.presentation();
    let scope: Vec<Point> = long
        .iter()
        .flat_map(|g| [space.act(g, x0), space.act(&pres.inverse(g), x0)])
        .collect();
    let sphere = space
        .sphere(x0, radius, if space.is_tree() { Some(&scope) } else { None })
        .expect("radius checked above");
    let b = match space.vertices() {
        Some(vs) => vs.iter().filter(|v| space.dist(v, x0) <= radius).count(),
        None => sphere.len(),
    };
    trace.sphere_points = sphere.len();
    let delta = space.delta();
    let gp = |p: &Point, q: &Point, at: &Point| space.edge() * Length::new(gp2(space, p, q, at) as i64, 2);

    // (y, z) -> members of U_{y,z}
    let mut classes: BTreeMap<(usize, usize), Vec<GroupElement>> = BTreeMap::new();
    for g in &long {
        let ux = space.act(g, x0);
        let vx = space.act(&pres.inverse(g), x0);
        let ys: Vec<usize> = (0..sphere.len()).filter(|&i| gp(x0, &ux, &sphere[i]) <= delta).collect();
        let zs: Vec<usize> = (0..sphere.len()).filter(|&i| gp(x0, &vx, &sphere[i]) <= delta).collect();
        for &y in &ys {
            for &z in &zs {
                classes.entry((y, z)).or_default().push(g.clone());
            }
        }
    }
    let n = u.len();
    // |U_{y,z}| ≥ |U|/(100 b²), or strictly above it for the first search.
    let denom = 100 * b * b;
    let needed = format!("{n}/{denom}");
    let dist = |i: usize, j: usize| space.dist(&sphere[i], &sphere[j]);
    let six = delta * Length::from_integer(6);
    let hundred = delta * Length::from_integer(100);
    let best_by = |pred: &dyn Fn(usize, usize) -> bool| {
        classes
            .iter()
            .filter(|((y, z), _)| pred(*y, *z))
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(a.0)))
            .map(|(k, v)| (*k, v.len()))
    };
    let done = |u1: Vec<GroupElement>, u2: Vec<GroupElement>, mut trace: PeelTrace, stop: String| {
        let (u1, u2) = (ElementSet::new(u1), ElementSet::new(u2));
        let cert = certify(space, &u1, &u2, x0, radius);
        trace.stop = stop;
        ReductionResult {
            u1,
            u2,
            tolerance: radius,
            certified: cert.holds,
            branch: Branch::SphereGraph,
            certificate: Some(cert),
            trace,
        }
    };
    if let Some(((y, z), m)) = best_by(&|y, z| dist(y, z) > six) {
        if m * denom > n {
            let s = classes[&(y, z)].clone();
            return done(s.clone(), s, trace, format!("separated pair ({}, {}) with {m} elements", sphere[y], sphere[z]));
        }
    }
    let Some(((y0, z0), m0)) = best_by(&|y, z| dist(y, z) <= six) else {
        trace.stop = "no sphere pairs".into();
        return ReductionResult::failed(FailReason::NoSeparatedPairs { best: 0, needed }, radius, trace);
    };
    match best_by(&|y, z| dist(y, z) <= six && dist(z, z0) > hundred && dist(y, y0) > hundred) {
        Some(((y1, z1), m1)) if m1 * denom >= n => done(
            classes[&(y0, z0)].clone(),
            classes[&(y1, z1)].clone(),
            trace,
            format!("close pairs with {m0} and {m1} elements"),
        ),
        other => {
            trace.stop = "no second close pair far from the first".into();
            let m1 = other.map_or(0, |o| o.1);
            // Mass near (y0, z0) beyond ⅔|U| would contradict minimality.
            let near: usize = classes
                .iter()
                .filter(|((y, z), _)| dist(*y, y0) <= hundred && dist(*z, y0) <= hundred)
                .flat_map(|(_, v)| v.iter())
                .collect::<std::collections::BTreeSet<_>>()
                .len();
            let reason = if 3 * near > 2 * n {
                FailReason::MinimalEnergy {
                    point: sphere[y0].to_string(),
                    n_point: near,
                    n_total: n,
                }
            } else {
                FailReason::NoSeparatedPairs { best: m1, needed }
            };
            ReductionResult::failed(reason, radius, trace)
        }
    }
}

/// Peeling on the image sphere of radius R in an approximation tree of
/// `{[x₀, u^{±1}x₀]}`, with the result certified in the space at tolerance R.
pub fn reduce_via_tree_approx(space: &ActionSpace, u: &ElementSet, x0: &Point, radius: Length) -> ReductionResult {
    let trace = empty_trace(u);
    if u.len() < 2 {
        return ReductionResult::failed(FailReason::TooSmall { size: u.len() }, radius, trace);
    }
    let k = match space.length_to_steps(radius) {
        Ok(k) if k > 0 => k as usize,
        _ => return ReductionResult::failed(FailReason::NotRepresentable { radius }, radius, trace),
    };
    let long = match long_elements(space, u, x0, radius * Length::from_integer(4)) {
        Ok(l) => l,
        Err(e) => return ReductionResult::failed(e, radius, trace),
    };
    let pres = space.presentation();
    let mut targets: Vec<Point> = long
        .iter()
        .flat_map(|g| [space.act(g, x0), space.act(&pres.inverse(g), x0)])
        .collect();
    targets.sort();
    targets.dedup();
    let tree = approximate_tree(space, x0, &targets);
    let leg = |p: &Point| targets.binary_search(p).expect("target present");
    // Image sphere points are tree nodes; order them by their first target.
    let mut node_label: BTreeMap<usize, Point> = BTreeMap::new();
    let pairs: Vec<(usize, usize)> = long
        .iter()
        .map(|g| {
            let o = tree.f(leg(&space.act(g, x0)), k);
            let i = tree.f(leg(&space.act(&pres.inverse(g), x0)), k);
            (o, i)
        })
        .collect();
    for (t, p) in targets.iter().enumerate() {
        if tree.legs[t].points.len() > k {
            let node = tree.f(t, k);
            node_label.entry(node).or_insert_with(|| p.clone());
        }
    }
    let mut order: Vec<(Point, usize)> = node_label.into_iter().map(|(n, p)| (p, n)).collect();
    order.sort();
    let pos: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, (_, n))| (*n, i)).collect();
    let labels = order
        .iter()
        .map(|(p, _)| format!("f[x0,{p}]({k})"))
        .collect();
    let members = long
        .into_iter()
        .zip(pairs)
        .map(|(g, (o, i))| (g, pos[&o], pos[&i]))
        .collect::<Vec<_>>();
    let c = Classified {
        n_filtered_out: u.len() - members.len(),
        members,
        labels,
        n_total: u.len(),
    };
    peel(space, c, x0, radius, Branch::ViaTreeApprox)
}

/// Trims by displacement medians so that every element of the first output
/// displaces x₀ at most as much as every element of the second.
pub fn median_split(
    space: &ActionSpace,
    u1: &ElementSet,
    u2: &ElementSet,
    x0: &Point,
) -> Result<(ElementSet, ElementSet), crate::words::WordError> {
    if u1.is_empty() || u2.is_empty() {
        return Err(crate::words::WordError::EmptySet);
    }
    let disp = |g: &GroupElement| space.steps(&space.act(g, x0), x0);
    let median = |s: &ElementSet| {
        let mut d: Vec<u64> = s.iter().map(disp).collect();
        d.sort_unstable();
        d[(d.len() - 1) / 2]
    };
    let (m1, m2) = (median(u1), median(u2));
    let pick = |s: &ElementSet, keep: &dyn Fn(u64) -> bool| -> ElementSet {
        s.iter().filter(|g| keep(disp(g))).cloned().collect()
    };
    if m1 <= m2 {
        Ok((pick(u1, &|d| d <= m1), pick(u2, &|d| d >= m2)))
    } else {
        // Roles swapped: the reduction conclusion is symmetric in U₁, U₂.
        Ok((pick(u2, &|d| d <= m2), pick(u1, &|d| d >= m1)))
    }
}

/// Largest `|U_{a,a}|` over sphere points `a` among elements displacing x₀
/// by at least 4r (trees).
pub fn max_self_class(space: &ActionSpace, u: &ElementSet, x0: &Point, r: Length) -> (Option<Point>, usize) {
    let k = space.length_to_steps(r).expect("r must be a whole number of edges");
    let pres = space.presentation();
    let four = r * Length::from_integer(4);
    let mut counts: BTreeMap<Point, usize> = BTreeMap::new();
    for g in u {
        let ux = space.act(g, x0);
        if space.dist(&ux, x0) < four {
            continue;
        }
        let o = space.point_along(x0, &ux, k);
        let i = space.point_along(x0, &space.act(&pres.inverse(g), x0), k);
        if o == i {
            *counts.entry(o).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map_or((None, 0), |(p, c)| (Some(p), c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::minimize_energy;

    fn f2() -> ActionSpace {
        ActionSpace::free_group_tree(2, Length::from_integer(1)).unwrap()
    }

    fn one() -> Length {
        Length::from_integer(1)
    }

    #[test]
    fn reduced_at_examples() {
        let s = f2();
        let p = s.presentation();
        let e = |w: &str| p.parse(w).unwrap();
        let x0 = s.origin();
        let zero = Length::from_integer(0);
        assert!(reduced_at(&s, &e("a"), &e("b"), &x0, zero));
        assert!(!reduced_at(&s, &e("a"), &e("Ab"), &x0, zero));
        assert!(reduced_at(&s, &e("1"), &e("Ab"), &x0, zero));
    }

    #[test]
    fn directional_classes_are_certified() {
        let s = f2();
        let p = s.presentation();
        let u = p
            .parse_set(&["aabb", "aaBa", "abba", "aBBa", "bbab", "bbAb", "baba", "bAbA"])
            .unwrap();
        let res = reduce_tree(&s, &u, &s.origin(), one());
        assert!(res.certified, "{res:?}");
        assert!(!res.u1.is_empty() && !res.u2.is_empty());
    }

    #[test]
    fn safin_family_reduces() {
        let s = f2();
        // N = 32 is the first power of two where ¾ of U moves x₀ by ≥ 4r.
        let (u, _) = s.presentation().safin_family(32).unwrap();
        let x0 = minimize_energy(&s, &u).unwrap().base_point;
        assert_eq!(x0, s.origin());
        let res = reduce_tree(&s, &u, &x0, one());
        assert!(res.certified, "{res:?}");
        assert!(100 * res.u1.len() >= u.len() && 100 * res.u2.len() >= u.len());
    }

    #[test]
    fn concentrated_mass_fails_at_non_minimiser() {
        // Every element starts with a and ends with a⁻¹: at x₀ = 1 all mass
        // sits in U_{a,a}; the energy minimiser is the vertex a instead.
        let s = f2();
        let p = s.presentation();
        let u = p.parse_set(&["abbA", "aBBA", "ababA", "aBaBA", "abaBA"]).unwrap();
        let res = reduce_tree(&s, &u, &s.origin(), one());
        assert!(matches!(res.branch, Branch::Failed(FailReason::MinimalEnergy { .. })), "{res:?}");
        let x0 = minimize_energy(&s, &u).unwrap().base_point;
        assert_ne!(x0, s.origin());
    }

    #[test]
    fn graph_version_on_tree_and_small_sets() {
        let s = f2();
        let p = s.presentation();
        let u = p
            .parse_set(&["aabb", "aaBa", "abba", "aBBa", "bbab", "bbAb", "baba", "bAbA"])
            .unwrap();
        let res = reduce_graph(&s, &u, &s.origin(), one());
        assert!(res.certified, "{res:?}");
        let single = p.parse_set(&["ab"]).unwrap();
        let res = reduce_graph(&s, &single, &s.origin(), one());
        assert_eq!(res.branch, Branch::Failed(FailReason::TooSmall { size: 1 }));
        let res = reduce_via_tree_approx(&s, &single, &s.origin(), one());
        assert_eq!(res.branch, Branch::Failed(FailReason::TooSmall { size: 1 }));
    }

    #[test]
    fn tree_approx_version_matches_on_trees() {
        let s = f2();
        let (u, _) = s.presentation().safin_family(32).unwrap();
        let x0 = minimize_energy(&s, &u).unwrap().base_point;
        let a = reduce_tree(&s, &u, &x0, one());
        let b = reduce_via_tree_approx(&s, &u, &x0, one());
        assert!(b.certified, "{b:?}");
        assert_eq!((a.u1, a.u2), (b.u1, b.u2));
    }

    #[test]
    fn median_examples() {
        let s = f2();
        let p = s.presentation();
        let x0 = s.origin();
        // displacements 2, 4, 6 and 3, 5, 7
        let u1 = p.parse_set(&["ab", "abab", "ababab"]).unwrap();
        let u2 = p.parse_set(&["bab", "babab", "bababab"]).unwrap();
        let (o1, o2) = median_split(&s, &u1, &u2, &x0).unwrap();
        assert_eq!(o1, p.parse_set(&["ab", "abab"]).unwrap());
        assert_eq!(o2, p.parse_set(&["babab", "bababab"]).unwrap());
        let one_each = p.parse_set(&["ab"]).unwrap();
        let (o1, o2) = median_split(&s, &one_each, &one_each, &x0).unwrap();
        assert_eq!((o1, o2), (one_each.clone(), one_each.clone()));
        // m₂ < m₁: outputs swap roles.
        let (o1, o2) = median_split(&s, &u2, &u1, &x0).unwrap();
        assert_eq!(o1, p.parse_set(&["ab", "abab"]).unwrap());
        assert_eq!(o2, p.parse_set(&["babab", "bababab"]).unwrap());
    }
}
