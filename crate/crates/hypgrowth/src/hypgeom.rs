//! Gromov products, quasi-geodesic chain certificates, translation lengths,
//! axes and the acylindricity constants derived from a space.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::spaces::{ActionSpace, Length, Point, SpaceError};
use crate::words::GroupElement;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("{0} is elliptic")]
    Elliptic(String),
    #[error("{0} and {1} generate the same maximal cyclic subgroup")]
    SameSubgroup(String, String),
    #[error("chain needs at least 3 points, got {0}")]
    ShortChain(usize),
}

pub fn big(x: Length) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

pub fn big_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn pow10(k: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(10u32).pow(k))
}

/// The constants ν, A and the rescaled acylindricity parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Constants {
    #[serde(serialize_with = "crate::ser::display")]
    pub delta: BigRational,
    #[serde(serialize_with = "crate::ser::display")]
    pub rho0: BigRational,
    #[serde(serialize_with = "crate::ser::display")]
    pub kappa0: BigRational,
    pub n0: u64,
    /// 4 N₀ κ₀ / ρ₀
    #[serde(serialize_with = "crate::ser::display")]
    pub nu: BigRational,
    /// 10⁷ N₀² κ₀ / ρ₀
    #[serde(serialize_with = "crate::ser::display")]
    pub a: BigRational,
}

impl Constants {
    pub fn of(space: &ActionSpace) -> Self {
        let c = space.constants();
        let (delta, rho0, kappa0) = (big(c.delta), big(c.rho0), big(c.kappa0));
        let n0 = big_int(c.n0 as i64);
        let nu = big_int(4) * &n0 * &kappa0 / &rho0;
        let a = pow10(7) * &n0 * &n0 * &kappa0 / &rho0;
        Self {
            delta,
            rho0,
            kappa0,
            n0: c.n0,
            nu,
            a,
        }
    }

    /// κ(d) = κ₀ + 400dδ + 100δ
    pub fn kappa_of_d(&self, d: &BigRational) -> BigRational {
        &self.kappa0 + big_int(400) * d * &self.delta + big_int(100) * &self.delta
    }

    /// N(d) = 23 d N₀
    pub fn n_of_d(&self, d: u64) -> u64 {
        23 * d * self.n0
    }

    /// 3ν[E] + Aδ + extra·δ, the shape shared by the periodicity thresholds.
    pub fn periodic_bound(&self, transl: &BigRational, extra: u64) -> BigRational {
        big_int(3) * &self.nu * transl + &self.a * &self.delta + big_int(extra as i64) * &self.delta
    }
}

/// Twice the Gromov product `(p, q)_x` in edge steps; always an integer.
pub fn gp2(space: &ActionSpace, p: &Point, q: &Point, x: &Point) -> u64 {
    space.steps(p, x) + space.steps(q, x) - space.steps(p, q)
}

/// `(p, q)_x = ½(|p−x| + |q−x| − |p−q|)`.
pub fn gromov_product(space: &ActionSpace, p: &Point, q: &Point, x: &Point) -> Length {
    space.edge() * Length::new(gp2(space, p, q, x) as i64, 2)
}

/// Distance from `x` to the vertex set of a geodesic `[a, b]`. On trees it
/// equals `(a, b)_x`.
pub fn dist_to_geodesic(space: &ActionSpace, x: &Point, a: &Point, b: &Point) -> Length {
    if space.is_tree() {
        return gromov_product(space, a, b, x);
    }
    space
        .geodesic(a, b)
        .iter()
        .map(|p| space.dist(x, p))
        .min()
        .expect("geodesic is never empty")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainViolation {
    pub index: usize,
    #[serde(serialize_with = "crate::ser::display")]
    pub lhs: Length,
    #[serde(serialize_with = "crate::ser::display")]
    pub rhs: Length,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainCertificate {
    /// The local hypothesis held at every interior index.
    pub hypothesis: bool,
    pub violation: Option<ChainViolation>,
    /// `|x_i − x_j| ≥ α|i − j|` checked on all pairs; only meaningful when
    /// the hypothesis held.
    pub lower_bound_holds: bool,
    /// Hausdorff conclusion `10δ + β`, checked when α ≥ 9δ and every
    /// interior Gromov product is at most β.
    pub hausdorff_checked: bool,
    pub hausdorff_holds: bool,
    #[serde(serialize_with = "crate::ser::display")]
    pub worst_hausdorff: Length,
}

impl ChainCertificate {
    pub fn certified(&self) -> bool {
        self.hypothesis && self.lower_bound_holds && (!self.hausdorff_checked || self.hausdorff_holds)
    }
}

/// Checks the discrete quasi-geodesic criterion on a chain of points and
/// then tests its conclusions on the chain itself.
pub fn chain_certificate(
    space: &ActionSpace,
    points: &[Point],
    alpha: Length,
    beta: Length,
) -> Result<ChainCertificate, GeomError> {
    if points.len() < 3 {
        return Err(GeomError::ShortChain(points.len()));
    }
    let delta = space.delta();
    let half = Length::new(1, 2);
    let mut violation = None;
    let mut max_local = Length::zero();
    for i in 1..points.len() - 1 {
        let lhs = gromov_product(space, &points[i - 1], &points[i + 1], &points[i]);
        max_local = max_local.max(lhs);
        let rhs = half
            * space
                .dist(&points[i], &points[i - 1])
                .min(space.dist(&points[i], &points[i + 1]))
            - alpha
            - delta;
        if lhs > rhs && violation.is_none() {
            violation = Some(ChainViolation { index: i, lhs, rhs });
        }
    }
    let hypothesis = violation.is_none();
    let mut lower_bound_holds = true;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if space.dist(&points[i], &points[j]) < alpha * Length::from_integer((j - i) as i64) {
                lower_bound_holds = false;
            }
        }
    }
    // α = δ = 0 admits repeated points (p, q, q, p), where the conclusion fails.
    let hausdorff_checked =
        hypothesis && alpha > Length::zero() && alpha >= Length::from_integer(9) * delta && max_local <= beta;
    let mut worst = Length::zero();
    if hausdorff_checked {
        for n in 0..points.len() {
            for m in n + 2..points.len() {
                worst = worst.max(piecewise_hausdorff(space, &points[n..=m]));
            }
        }
    }
    let bound = Length::from_integer(10) * delta + beta;
    Ok(ChainCertificate {
        hypothesis,
        violation,
        lower_bound_holds,
        hausdorff_checked,
        hausdorff_holds: !hausdorff_checked || worst <= bound,
        worst_hausdorff: worst,
    })
}

/// Hausdorff distance between the vertex sets of the broken geodesic
/// through `pts` and the geodesic joining its ends.
fn piecewise_hausdorff(space: &ActionSpace, pts: &[Point]) -> Length {
    let mut broken = Vec::new();
    for w in pts.windows(2) {
        broken.extend(space.geodesic(&w[0], &w[1]));
    }
    let direct = space.geodesic(&pts[0], pts.last().unwrap());
    let one_way = |from: &[Point], to: &[Point]| -> Length {
        from.iter()
            .map(|p| to.iter().map(|q| space.dist(p, q)).min().unwrap())
            .max()
            .unwrap()
    };
    one_way(&broken, &direct).max(one_way(&direct, &broken))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxisData {
    pub element: GroupElement,
    #[serde(serialize_with = "crate::ser::display")]
    pub translation_length: Length,
    pub is_hyperbolic: bool,
    /// A point realising the minimal displacement.
    pub min_point: Point,
    /// `[p, g p]` for the minimal point `p`: a fundamental domain of the axis
    /// on trees.
    pub axis_segment: Vec<Point>,
    /// Graphs only: `C_g = {x : |gx − x| ≤ [g] + 8δ}`.
    pub min_set: Vec<Point>,
}

/// Exact translation length. On trees it comes from the cyclic core; on
/// graphs from an exhaustive scan of the vertices.
pub fn translation_length(space: &ActionSpace, g: &GroupElement) -> AxisData {
    let pres = space.presentation();
    let (steps, min_point, min_set) = match space.graph_data() {
        None if pres.is_free_group() => {
            let (core, h) = pres.cyclic_reduce(g);
            (core.letter_len(), Point::Word(h), Vec::new())
        }
        None => {
            let (core, h) = pres.syllable_core(g);
            let t = core.syllables().first().map_or(0, |s| s.0);
            let p = space.act(&h, &Point::Coset(GroupElement::identity(), t));
            let steps = if core.syllable_len() >= 2 {
                core.syllable_len() as u64
            } else {
                0
            };
            (steps, p, Vec::new())
        }
        Some(gr) => {
            let disp: Vec<u64> = (0..gr.len() as u32)
                .map(|v| gr.d(v, gr.apply(g, v)))
                .collect();
            let min = *disp.iter().min().unwrap();
            let first = disp.iter().position(|&d| d == min).unwrap();
            let slack = space.delta() * Length::from_integer(8);
            let set = disp
                .iter()
                .enumerate()
                .filter(|&(_, &d)| Length::from_integer((d - min) as i64) <= slack)
                .map(|(v, _)| Point::Vertex(v as u32))
                .collect();
            (min, Point::Vertex(first as u32), set)
        }
    };
    let image = space.act(g, &min_point);
    AxisData {
        element: g.clone(),
        translation_length: space.edge() * Length::from_integer(steps as i64),
        is_hyperbolic: steps > 0,
        axis_segment: space.geodesic(&min_point, &image),
        min_point,
        min_set,
    }
}

/// Displacement `|g x − x|`.
pub fn displacement(space: &ActionSpace, g: &GroupElement, x: &Point) -> Length {
    space.dist(&space.act(g, x), x)
}

/// The segment `[g^{-k} p, g^{k} p]` of the axis, with `k` large enough that
/// the projection of `x` onto the axis falls inside it.
fn axis_window(space: &ActionSpace, axis: &AxisData, x: &Point, extra: u64) -> (Point, Point) {
    let pres = space.presentation();
    let l = space.steps(&axis.min_point, &space.act(&axis.element, &axis.min_point));
    let reach = space.steps(x, &axis.min_point) + extra;
    let k = (reach / l + 2) as i64;
    let a = space.act(&pres.pow(&axis.element, -k), &axis.min_point);
    let b = space.act(&pres.pow(&axis.element, k), &axis.min_point);
    (a, b)
}

/// Distance from `x` to the axis of a hyperbolic tree isometry.
pub fn dist_to_axis(space: &ActionSpace, g: &GroupElement, x: &Point) -> Result<Length, GeomError> {
    let axis = translation_length(space, g);
    if !axis.is_hyperbolic {
        return Err(GeomError::Elliptic(g.to_string()));
    }
    if !space.is_tree() {
        let line = invariant_line(space, &axis);
        return Ok(line.iter().map(|p| space.dist(x, p)).min().unwrap());
    }
    let (a, b) = axis_window(space, &axis, x, 0);
    Ok(gromov_product(space, &a, &b, x))
}

/// `|g x − x| = [g] + 2 d(x, axis)`, the tree identity for hyperbolic `g`.
pub fn axis_identity_holds(space: &ActionSpace, g: &GroupElement, x: &Point) -> Result<bool, GeomError> {
    let axis = translation_length(space, g);
    let d = dist_to_axis(space, g, x)?;
    Ok(displacement(space, g, x) == axis.translation_length + Length::from_integer(2) * d)
}

/// Graphs: vertices of the union of the translates `g^k [p, g p]`, which is
/// finite because `g` has finite order as a permutation.
fn invariant_line(space: &ActionSpace, axis: &AxisData) -> Vec<Point> {
    let pres = space.presentation();
    let mut out: Vec<Point> = Vec::new();
    let mut h = GroupElement::identity();
    loop {
        for p in &axis.axis_segment {
            out.push(space.act(&h, p));
        }
        h = pres.mul(&axis.element, &h);
        if space.act(&h, &axis.min_point) == axis.min_point || out.len() > 1 << 20 {
            break;
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Whether `x` lies within `margin` of the cylinder of `⟨root⟩`. On trees
/// the cylinder is the axis; on graphs the invariant line fattened by 100δ.
pub fn cylinder_membership(
    space: &ActionSpace,
    x: &Point,
    root: &GroupElement,
    margin: Length,
) -> Result<bool, GeomError> {
    let d = dist_to_axis(space, root, x)?;
    let slack = if space.is_tree() {
        Length::zero()
    } else {
        Length::from_integer(100) * space.delta()
    };
    Ok(d <= margin + slack)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapReport {
    #[serde(serialize_with = "crate::ser::display")]
    pub diameter: Length,
    #[serde(serialize_with = "crate::ser::display")]
    pub lemma_bound: BigRational,
    pub within_bound: bool,
}

/// Diameter of the set of axis points of `E` and `F` lying within `margin`
/// of both axes (graphs: of both cylinders fattened by 400δ), against
/// `3ν max([E], [F]) + Aδ + 1684δ`.
pub fn small_cancellation_diameter(
    space: &ActionSpace,
    e_root: &GroupElement,
    f_root: &GroupElement,
    margin: Length,
) -> Result<OverlapReport, GeomError> {
    let pres = space.presentation();
    let ae = translation_length(space, e_root);
    let af = translation_length(space, f_root);
    for a in [&ae, &af] {
        if !a.is_hyperbolic {
            return Err(GeomError::Elliptic(a.element.to_string()));
        }
    }
    if pres.same_root(e_root, f_root) {
        return Err(GeomError::SameSubgroup(e_root.to_string(), f_root.to_string()));
    }
    let consts = Constants::of(space);
    let max_t = big(ae.translation_length.max(af.translation_length));
    let lemma_bound = consts.periodic_bound(&max_t, 1684);

    let (se, sf) = if space.is_tree() {
        // Windows long enough to contain the whole overlap of the two lines:
        // distinct axes share less than [E] + [F] + the gap between the
        // chosen base points.
        let gap = space.steps(&ae.min_point, &af.min_point);
        let extra = gap
            + 4 * (e_root.letter_len() + f_root.letter_len())
            + space.length_to_steps(ae.translation_length + af.translation_length)?;
        let (a0, a1) = axis_window(space, &ae, &af.min_point, extra);
        let (b0, b1) = axis_window(space, &af, &ae.min_point, extra);
        (space.geodesic(&a0, &a1), space.geodesic(&b0, &b1))
    } else {
        (invariant_line(space, &ae), invariant_line(space, &af))
    };
    let m = if space.is_tree() {
        margin
    } else {
        margin + Length::from_integer(400) * space.delta()
    };
    let near = |p: &Point, set: &[Point]| set.iter().any(|q| space.dist(p, q) <= m);
    let mut both: Vec<&Point> = se.iter().chain(sf.iter()).filter(|p| near(p, &se) && near(p, &sf)).collect();
    both.sort();
    both.dedup();
    let mut diameter = Length::zero();
    for (i, p) in both.iter().enumerate() {
        for q in &both[i + 1..] {
            diameter = diameter.max(space.dist(p, q));
        }
    }
    let within_bound = big(diameter) <= lemma_bound;
    Ok(OverlapReport {
        diameter,
        lemma_bound,
        within_bound,
    })
}

/// `⌈x⌉` for a nonnegative rational, as an integer.
pub fn ceil_big(x: &BigRational) -> BigInt {
    x.ceil().to_integer()
}

pub fn one() -> BigRational {
    BigRational::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::cycle_graph;

    fn f2() -> ActionSpace {
        ActionSpace::free_group_tree(2, Length::from_integer(1)).unwrap()
    }

    fn pt(s: &ActionSpace, w: &str) -> Point {
        Point::Word(s.presentation().parse(w).unwrap())
    }

    fn el(s: &ActionSpace, w: &str) -> GroupElement {
        s.presentation().parse(w).unwrap()
    }

    #[test]
    fn gromov_product_examples() {
        let s = f2();
        let o = s.origin();
        assert_eq!(gromov_product(&s, &pt(&s, "a"), &pt(&s, "b"), &o), Length::zero());
        let p = pt(&s, "abA");
        assert_eq!(gromov_product(&s, &p, &p, &o), s.dist(&p, &o));
        assert_eq!(gromov_product(&s, &pt(&s, "ab"), &pt(&s, "a"), &o), Length::from_integer(1));
    }

    #[test]
    fn chain_examples() {
        let s = f2();
        let pts: Vec<Point> = ["1", "aa", "aabb", "aabbaa"].iter().map(|w| pt(&s, w)).collect();
        let c = chain_certificate(&s, &pts, Length::from_integer(1), Length::zero()).unwrap();
        assert!(c.certified());
        assert!(c.hausdorff_checked);

        let back: Vec<Point> = ["1", "a", "1"].iter().map(|w| pt(&s, w)).collect();
        let c = chain_certificate(&s, &back, Length::from_integer(1), Length::zero()).unwrap();
        assert_eq!(c.violation.as_ref().map(|v| v.index), Some(1));
        assert!(!c.certified());

        // On one geodesic with α equal to the step the bound is tight.
        let line: Vec<Point> = ["1", "aa", "aaaa", "aaaaaa"].iter().map(|w| pt(&s, w)).collect();
        let c = chain_certificate(&s, &line, Length::from_integer(1), Length::zero()).unwrap();
        assert!(c.certified());
        assert!(chain_certificate(&s, &line[..2], Length::zero(), Length::zero()).is_err());
    }

    #[test]
    fn translation_length_examples() {
        let s = f2();
        let ax = translation_length(&s, &el(&s, "abA"));
        assert_eq!(ax.translation_length, Length::from_integer(1));
        assert!(ax.is_hyperbolic);
        assert_eq!(ax.min_point, pt(&s, "a"));
        let id = translation_length(&s, &GroupElement::identity());
        assert!(!id.is_hyperbolic);
        assert_eq!(id.translation_length, Length::zero());
        let comm = translation_length(&s, &el(&s, "abAB"));
        assert_eq!(comm.translation_length, Length::from_integer(4));
    }

    #[test]
    fn free_product_translation() {
        let z57 = ActionSpace::free_product_tree([Some(5), Some(7)], Length::from_integer(1)).unwrap();
        let p = z57.presentation();
        let g = p.parse("ab").unwrap();
        let ax = translation_length(&z57, &g);
        assert_eq!(ax.translation_length, Length::from_integer(2));
        let h = p.parse("b^3a^2").unwrap();
        let conj = p.conjugate(&h, &g);
        assert_eq!(translation_length(&z57, &conj).translation_length, Length::from_integer(2));
        assert!(!translation_length(&z57, &p.parse("b^2aBB").unwrap()).is_hyperbolic);
        assert!(axis_identity_holds(&z57, &conj, &z57.origin()).unwrap());
    }

    #[test]
    fn cylinder_examples() {
        let s = f2();
        let ab = el(&s, "ab");
        assert!(cylinder_membership(&s, &s.origin(), &ab, Length::zero()).unwrap());
        // The axis of ab runs ..., BA, B, 1, a, ab, ... so b⁻¹ lies on it and
        // b does not.
        assert!(cylinder_membership(&s, &pt(&s, "B"), &ab, Length::zero()).unwrap());
        assert!(!cylinder_membership(&s, &pt(&s, "b"), &ab, Length::zero()).unwrap());
        let x = pt(&s, "BBa");
        let d = dist_to_axis(&s, &ab, &x).unwrap();
        assert!(cylinder_membership(&s, &x, &ab, d).unwrap());
        assert!(cylinder_membership(&s, &x, &GroupElement::identity(), d).is_err());
    }

    #[test]
    fn small_cancellation_examples() {
        let s = f2();
        let r = small_cancellation_diameter(&s, &el(&s, "a"), &el(&s, "b"), Length::zero()).unwrap();
        assert_eq!(r.diameter, Length::zero());
        assert!(r.within_bound);
        let r = small_cancellation_diameter(&s, &el(&s, "a"), &el(&s, "a^10ba^-10"), Length::zero())
            .unwrap();
        assert_eq!(r.diameter, Length::zero());
        // The conjugated axis of b meets the axis of ab in the two vertices
        // (ab)^4 a and (ab)^5, so the overlap is a single edge.
        let r = small_cancellation_diameter(
            &s,
            &el(&s, "ab"),
            &el(&s, "(ab)^5b(ab)^-5"),
            Length::zero(),
        )
        .unwrap();
        assert_eq!(r.diameter, Length::from_integer(1));
        assert!(small_cancellation_diameter(&s, &el(&s, "ab"), &el(&s, "BA"), Length::zero()).is_err());
    }

    #[test]
    fn graph_translation() {
        let c6 = ActionSpace::graph(&cycle_graph(6), None, None, 1).unwrap();
        let r = c6.presentation().parse("a").unwrap();
        let ax = translation_length(&c6, &r);
        assert_eq!(ax.translation_length, Length::from_integer(1));
        assert_eq!(ax.min_set.len(), 6);
        let r3 = c6.presentation().parse("aaa").unwrap();
        assert_eq!(translation_length(&c6, &r3).translation_length, Length::from_integer(3));
    }

    #[test]
    fn constants_formulas() {
        let s = f2();
        let c = Constants::of(&s);
        assert_eq!(c.nu, big_int(4));
        assert_eq!(c.a, big_int(10_000_000));
        assert_eq!(c.kappa_of_d(&big_int(3)), big_int(1));
        assert_eq!(c.n_of_d(2), 46);
    }
}
