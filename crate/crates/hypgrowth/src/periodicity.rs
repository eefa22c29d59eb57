//! Periodic elements, equations of reduced products, bi-periodic sets,
//! E-reduction, ping-pong certificates and separation inside ⟨E⟩.

use std::fmt::Display;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::hypgeom::{big, big_int, cylinder_membership, gp2, translation_length, GeomError};
use crate::mode::Resolved;
use crate::spaces::{ActionSpace, Length, Point};
use crate::words::{ElementSet, GroupElement};

/// One checked inequality `lhs op rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: String,
    pub op: &'static str,
    pub rhs: String,
    pub holds: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, lhs: impl Display, op: &'static str, rhs: impl Display, holds: bool) -> Self {
        Self {
            name: name.into(),
            lhs: lhs.to_string(),
            op,
            rhs: rhs.to_string(),
            holds,
        }
    }

    fn le<T: PartialOrd + Display>(name: impl Into<String>, lhs: T, rhs: T) -> Self {
        let holds = lhs <= rhs;
        Self::new(name, lhs, "<=", rhs, holds)
    }

    fn gt<T: PartialOrd + Display>(name: impl Into<String>, lhs: T, rhs: T) -> Self {
        let holds = lhs > rhs;
        Self::new(name, lhs, ">", rhs, holds)
    }

    fn ge<T: PartialOrd + Display>(name: impl Into<String>, lhs: T, rhs: T) -> Self {
        let holds = lhs >= rhs;
        Self::new(name, lhs, ">=", rhs, holds)
    }

    fn flag(name: impl Into<String>, holds: bool) -> Self {
        Self::new(name, holds, "==", true, holds)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RefusalKind {
    Elliptic,
    OffCylinder,
    TooShort,
    TooSmall,
    PeriodMismatch,
    NotInCoset,
    NotReduced,
    Ordering,
    Symmetry,
    InE,
    NotEReduced,
    Spacing,
    Unsupported,
    Empty,
    Budget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Refusal {
    pub reason: RefusalKind,
    pub detail: String,
    pub checks: Vec<Check>,
}

impl Refusal {
    fn new(reason: RefusalKind, detail: impl Into<String>, checks: Vec<Check>) -> Self {
        Self {
            reason,
            detail: detail.into(),
            checks,
        }
    }
}

impl From<GeomError> for Refusal {
    fn from(e: GeomError) -> Self {
        let reason = match e {
            GeomError::Elliptic(_) => RefusalKind::Elliptic,
            _ => RefusalKind::Unsupported,
        };
        Refusal::new(reason, e.to_string(), Vec::new())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodCertificate {
    pub element: GroupElement,
    /// Primitive root generating E.
    pub period_root: GroupElement,
    pub base_point: Point,
    /// |v x₀ − x₀| minus the periodicity threshold; positive.
    #[serde(serialize_with = "crate::ser::display")]
    pub slack: BigRational,
    pub checks: Vec<Check>,
}

fn hyperbolic_root(space: &ActionSpace, root: &GroupElement) -> Result<(GroupElement, Length), Refusal> {
    let pres = space.presentation();
    let (prim, _) = pres
        .primitive_root(root)
        .map_err(|e| Refusal::new(RefusalKind::Elliptic, e.to_string(), Vec::new()))?;
    let axis = translation_length(space, &prim);
    if !axis.is_hyperbolic {
        return Err(Refusal::new(RefusalKind::Elliptic, format!("{root} is elliptic"), Vec::new()));
    }
    Ok((prim, axis.translation_length))
}

fn margin190(space: &ActionSpace) -> Length {
    Length::from_integer(190) * space.delta()
}

/// `v` is E-periodic at x₀: x₀ and v x₀ lie in the 190δ-neighbourhood of
/// the cylinder of E and `|v x₀ − x₀|` exceeds the mode's threshold.
pub fn is_periodic(
    space: &ActionSpace,
    v: &GroupElement,
    root: &GroupElement,
    x0: &Point,
    params: &Resolved,
) -> Result<PeriodCertificate, Refusal> {
    let (prim, transl) = hyperbolic_root(space, root)?;
    let m = margin190(space);
    let vx = space.act(v, x0);
    let in0 = cylinder_membership(space, x0, &prim, m)?;
    let in1 = cylinder_membership(space, &vx, &prim, m)?;
    let disp = big(space.dist(&vx, x0));
    let threshold = params.periodic_threshold(transl);
    let checks = vec![
        Check::flag("x0 in C_E^{+190delta}", in0),
        Check::flag("v x0 in C_E^{+190delta}", in1),
        Check::gt("|v x0 - x0| > 3 nu [E] + extra", disp.clone(), threshold.clone()),
    ];
    if !(in0 && in1) {
        return Err(Refusal::new(RefusalKind::OffCylinder, format!("{v} leaves the cylinder of {prim}"), checks));
    }
    if disp <= threshold {
        return Err(Refusal::new(RefusalKind::TooShort, format!("{v} is too short for period {prim}"), checks));
    }
    Ok(PeriodCertificate {
        element: v.clone(),
        period_root: prim,
        base_point: x0.clone(),
        slack: disp - threshold,
        checks,
    })
}

/// Periods of a letter string, ascending, from the KMP failure function.
fn periods<T: PartialEq>(s: &[T]) -> Vec<usize> {
    let n = s.len();
    let mut fail = vec![0usize; n + 1];
    let mut k = 0;
    for i in 1..n {
        while k > 0 && s[i] != s[k] {
            k = fail[k];
        }
        if s[i] == s[k] {
            k += 1;
        }
        fail[i + 1] = k;
    }
    let mut out = Vec::new();
    let mut b = fail[n];
    while b > 0 {
        out.push(n - b);
        b = fail[b];
    }
    out.push(n);
    out
}

/// Free group trees: finds a period of `v` at x₀ = h from the letters of
/// `h⁻¹ v h`. Tries every period p of that string whose prefix of length p
/// is cyclically reduced, shortest first.
pub fn intrinsic_period(
    space: &ActionSpace,
    v: &GroupElement,
    x0: &Point,
    params: &Resolved,
) -> Result<PeriodCertificate, Refusal> {
    let pres = space.presentation();
    let Point::Word(h) = x0 else {
        return Err(Refusal::new(RefusalKind::Unsupported, "intrinsic periods need the free group tree", Vec::new()));
    };
    let w = pres.conjugate(&pres.inverse(h), v);
    let letters = w.letters();
    if letters.is_empty() {
        return Err(Refusal::new(RefusalKind::Elliptic, "identity has no period", Vec::new()));
    }
    let mut last = None;
    for p in periods(&letters) {
        let (first, end) = (letters[0], letters[p - 1]);
        if first.0 == end.0 && first.1 == -end.1 {
            continue;
        }
        let prefix = pres.from_syllables(letters[..p].iter().map(|&(g, e)| (g, e as i64)));
        let root = pres.conjugate(h, &prefix);
        match is_periodic(space, v, &root, x0, params) {
            Ok(c) => return Ok(c),
            Err(r) => last = Some(r),
        }
    }
    Err(last.unwrap_or_else(|| Refusal::new(RefusalKind::OffCylinder, format!("no cyclically reduced period of {v}"), Vec::new())))
}

/// Points of `[x, y]` within 190δ of the cylinder of `root`, and their
/// diameter.
fn period_segment(space: &ActionSpace, x: &Point, y: &Point, root: &GroupElement) -> Result<(Vec<Point>, Length), Refusal> {
    let m = margin190(space);
    let mut pts = Vec::new();
    for p in space.geodesic(x, y) {
        if cylinder_membership(space, &p, root, m)? {
            pts.push(p);
        }
    }
    let mut diam = Length::from_integer(0);
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            diam = diam.max(space.dist(p, q));
        }
    }
    Ok((pts, diam))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SidePeriod {
    pub element: GroupElement,
    pub period_root: GroupElement,
    /// `[u x₀, x₀] ∩ C_E^{+190δ}` (left) or `[u⁻¹x₀, x₀] ∩ C_E^{+190δ}` (right).
    pub period: Vec<Point>,
    #[serde(serialize_with = "crate::ser::display")]
    pub diameter: Length,
    pub checks: Vec<Check>,
}

/// `u` is E-left-periodic at x₀.
pub fn is_left_periodic(
    space: &ActionSpace,
    u: &GroupElement,
    root: &GroupElement,
    x0: &Point,
    params: &Resolved,
) -> Result<SidePeriod, Refusal> {
    let (prim, transl) = hyperbolic_root(space, root)?;
    let in0 = cylinder_membership(space, x0, &prim, margin190(space))?;
    let (period, diameter) = period_segment(space, &space.act(u, x0), x0, &prim)?;
    let threshold = params.periodic_threshold(transl);
    let checks = vec![
        Check::flag("x0 in C_E^{+190delta}", in0),
        Check::gt("diam of period > 3 nu [E] + extra", big(diameter), threshold),
    ];
    if !in0 {
        return Err(Refusal::new(RefusalKind::OffCylinder, "x0 off the cylinder", checks));
    }
    if !checks[1].holds {
        return Err(Refusal::new(RefusalKind::TooShort, format!("left period of {u} too short"), checks));
    }
    Ok(SidePeriod {
        element: u.clone(),
        period_root: prim,
        period,
        diameter,
        checks,
    })
}

/// `u` is E-right-periodic at x₀, i.e. `u⁻¹` is E-left-periodic.
pub fn is_right_periodic(
    space: &ActionSpace,
    u: &GroupElement,
    root: &GroupElement,
    x0: &Point,
    params: &Resolved,
) -> Result<SidePeriod, Refusal> {
    let inv = space.presentation().inverse(u);
    let mut s = is_left_periodic(space, &inv, root, x0, params)?;
    s.element = u.clone();
    Ok(s)
}

/// Hausdorff distance between two finite point sets.
pub fn hausdorff(space: &ActionSpace, a: &[Point], b: &[Point]) -> Length {
    let one_way = |x: &[Point], y: &[Point]| {
        x.iter()
            .map(|p| y.iter().map(|q| space.dist(p, q)).min().unwrap_or(Length::from_integer(0)))
            .max()
            .unwrap_or(Length::from_integer(0))
    };
    one_way(a, b).max(one_way(b, a))
}

/// Conclusions of the reduced-products proposition for `u₁vw₁ = u₂vw₂`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReducedProductsReport {
    /// Primitive root of `u₁⁻¹u₂`.
    pub root: GroupElement,
    pub checks: Vec<Check>,
    pub holds: bool,
}

/// Verifies the hypotheses for one pair of equations, then the membership
/// of x₀, v x₀ in `C_{u₁⁻¹u₂}^{+190δ}` and the 24δ/66δ/138δ bounds.
pub fn reduced_products_check(
    space: &ActionSpace,
    (u1, w1): (&GroupElement, &GroupElement),
    (u2, w2): (&GroupElement, &GroupElement),
    v: &GroupElement,
    x0: &Point,
) -> Result<ReducedProductsReport, Refusal> {
    let pres = space.presentation();
    let delta = space.delta();
    let gp = |p: &Point, q: &Point, at: &Point| space.edge() * Length::new(gp2(space, p, q, at) as i64, 2);
    let at = |g: &GroupElement| space.act(g, x0);
    let inv = |g: &GroupElement| pres.inverse(g);
    let g1 = pres.product([u1, v, w1]);
    let g2 = pres.product([u2, v, w2]);
    if g1 != g2 {
        return Err(Refusal::new(
            RefusalKind::Unsupported,
            format!("{u1}.{v}.{w1} = {g1} differs from {u2}.{v}.{w2} = {g2}"),
            Vec::new(),
        ));
    }
    let mut hyp = Vec::new();
    for (name, a, b) in [("u1 v", u1, v), ("u2 v", u2, v), ("v w1", v, w1), ("v w2", v, w2)] {
        hyp.push(Check::le(format!("{name} reduced"), gp(&at(&inv(a)), &at(b), x0), delta));
    }
    if hyp.iter().any(|c| !c.holds) {
        return Err(Refusal::new(RefusalKind::NotReduced, "a product is not reduced at x0", hyp));
    }
    let dv = space.dist(&at(v), x0);
    hyp.push(Check::gt("|v x0 - x0| > 26 delta", dv, Length::from_integer(26) * delta));
    hyp.push(Check::le("|u1 x0 - u2 x0| <= |v x0 - x0|", space.dist(&at(u1), &at(u2)), dv));
    hyp.push(Check::le("|u1 x0 - x0| <= |u2 x0 - x0|", space.dist(&at(u1), x0), space.dist(&at(u2), x0)));
    if !hyp[4].holds {
        return Err(Refusal::new(RefusalKind::TooShort, "v too short", hyp));
    }
    if !hyp[5].holds {
        return Err(Refusal::new(RefusalKind::Symmetry, "|u1 x0 - u2 x0| exceeds |v x0 - x0|", hyp));
    }
    if !hyp[6].holds {
        return Err(Refusal::new(RefusalKind::Ordering, "u1 displaces more than u2", hyp));
    }
    let g = pres.mul(&inv(u1), u2);
    let (root, _) = hyperbolic_root(space, &g).map_err(|mut r| {
        r.checks = hyp.clone();
        r
    })?;
    let m = margin190(space);
    let mut checks = hyp;
    checks.push(Check::flag("x0 in C^{+190delta}", cylinder_membership(space, x0, &root, m)?));
    checks.push(Check::flag("v x0 in C^{+190delta}", cylinder_membership(space, &at(v), &root, m)?));
    let (p1, p2) = (at(u1), at(u2));
    let (q1, q2) = (at(&pres.mul(u1, v)), at(&pres.mul(u2, v)));
    let d = |k: i64| Length::from_integer(k) * delta;
    checks.push(Check::le("(x0, u2x0)_{u1x0} <= 24 delta", gp(x0, &p2, &p1), d(24)));
    checks.push(Check::le("(u1x0, u1vx0)_{u2x0} <= 66 delta", gp(&p1, &q1, &p2), d(66)));
    checks.push(Check::le("(u2x0, u2vx0)_{u1vx0} <= 138 delta", gp(&p2, &q2, &q1), d(138)));
    let holds = checks.iter().all(|c| c.holds);
    Ok(ReducedProductsReport { root, checks, holds })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquationCertificate {
    pub period: PeriodCertificate,
    pub pairs: Vec<ReducedProductsReport>,
}

/// From `u_i v w_i` all equal (ordered by `|u_i x₀ − x₀|`), recovers the
/// period E = E(u_i⁻¹u_{i+1}) and certifies v as E-periodic.
pub fn extract_period_from_equations(
    space: &ActionSpace,
    equations: &[(GroupElement, GroupElement, GroupElement)],
    x0: &Point,
    params: &Resolved,
) -> Result<EquationCertificate, Refusal> {
    if equations.len() < 2 {
        return Err(Refusal::new(RefusalKind::TooSmall, "need at least two equations", Vec::new()));
    }
    let v = &equations[0].1;
    if equations.iter().any(|e| &e.1 != v) {
        return Err(Refusal::new(RefusalKind::Unsupported, "equations must share v", Vec::new()));
    }
    let pres = space.presentation();
    let mut sym = Vec::new();
    let dv = space.dist(&space.act(v, x0), x0);
    for (i, a) in equations.iter().enumerate() {
        for b in &equations[i + 1..] {
            sym.push(Check::le(
                format!("|{} x0 - {} x0| <= |v x0 - x0|", a.0, b.0),
                space.dist(&space.act(&a.0, x0), &space.act(&b.0, x0)),
                dv,
            ));
        }
    }
    if sym.iter().any(|c| !c.holds) {
        return Err(Refusal::new(RefusalKind::Symmetry, "|u_i x0 - u_j x0| exceeds |v x0 - x0|", sym));
    }
    let mut pairs = Vec::new();
    for w in equations.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        pairs.push(reduced_products_check(space, (&a.0, &a.2), (&b.0, &b.2), v, x0)?);
    }
    let root = pairs[0].root.clone();
    if let Some(p) = pairs.iter().find(|p| !pres.same_root(&p.root, &root)) {
        return Err(Refusal::new(
            RefusalKind::PeriodMismatch,
            format!("roots {root} and {} generate different subgroups", p.root),
            Vec::new(),
        ));
    }
    let period = is_periodic(space, v, &root, x0, params)?;
    Ok(EquationCertificate { period, pairs })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BiPeriodicWitness {
    pub set: ElementSet,
    pub e1_root: GroupElement,
    pub e2_root: GroupElement,
    /// `v v′⁻¹ ∈ ⟨coset_root⟩` for all v, v′, so V ⊆ E·coset_rep.
    pub coset_root: GroupElement,
    pub coset_rep: GroupElement,
    pub periods: Vec<PeriodCertificate>,
    pub inverse_periods: Vec<PeriodCertificate>,
}

/// Every v is E₁-periodic and every v⁻¹ is E₂-periodic at x₀, with periods
/// found from the elements themselves (free group trees).
pub fn is_biperiodic(space: &ActionSpace, set: &ElementSet, x0: &Point, params: &Resolved) -> Result<BiPeriodicWitness, Refusal> {
    if set.len() < 2 {
        return Err(Refusal::new(RefusalKind::TooSmall, "need at least two elements", Vec::new()));
    }
    let pres = space.presentation();
    let mut periods = Vec::new();
    let mut inverse_periods = Vec::new();
    for v in set {
        periods.push(intrinsic_period(space, v, x0, params)?);
        inverse_periods.push(intrinsic_period(space, &pres.inverse(v), x0, params)?);
    }
    let same = |certs: &[PeriodCertificate]| -> Result<GroupElement, Refusal> {
        let r = certs[0].period_root.clone();
        match certs.iter().find(|c| !pres.same_root(&c.period_root, &r)) {
            None => Ok(r),
            Some(c) => Err(Refusal::new(
                RefusalKind::PeriodMismatch,
                format!("{} has period {} but {} has period {r}", c.element, c.period_root, certs[0].element),
                Vec::new(),
            )),
        }
    };
    let e1 = same(&periods)?;
    let e2 = same(&inverse_periods)?;
    let t = set.as_slice()[0].clone();
    let t_inv = pres.inverse(&t);
    let mut checks = Vec::new();
    for v in set {
        let q = pres.mul(v, &t_inv);
        checks.push(Check::flag(format!("{q} in <{e1}>"), pres.power_of(&q, &e1).is_some()));
    }
    if checks.iter().any(|c| !c.holds) {
        return Err(Refusal::new(RefusalKind::NotInCoset, format!("set is not inside <{e1}>{t}"), checks));
    }
    Ok(BiPeriodicWitness {
        set: set.clone(),
        e1_root: e1.clone(),
        e2_root: e2,
        coset_root: e1,
        coset_rep: t,
        periods,
        inverse_periods,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EReduction {
    pub e: GroupElement,
    pub t_prime: GroupElement,
    pub f: GroupElement,
    #[serde(serialize_with = "crate::ser::display")]
    pub displacement: Length,
    pub window: i64,
    /// The minimum lies strictly inside the search window.
    pub window_certified: bool,
}

/// `t = e t′ f` with e, f ∈ ⟨root⟩ and `|t′x₀ − x₀|` minimal, searching
/// powers up to `|t x₀ − x₀| / [E] + 2`.
pub fn e_reduce(space: &ActionSpace, t: &GroupElement, root: &GroupElement, x0: &Point) -> Result<EReduction, Refusal> {
    let (prim, transl) = hyperbolic_root(space, root)?;
    let pres = space.presentation();
    if !cylinder_membership(space, x0, &prim, Length::from_integer(0))? {
        return Err(Refusal::new(RefusalKind::OffCylinder, "x0 is not on the cylinder of E", Vec::new()));
    }
    if pres.power_of(t, &prim).is_some() {
        return Err(Refusal::new(RefusalKind::InE, format!("{t} lies in <{prim}>"), Vec::new()));
    }
    let steps_e = space.length_to_steps(transl).expect("translation length is whole steps") as i64;
    let w = space.steps(&space.act(t, x0), x0) as i64 / steps_e + 2;
    let pw: Vec<GroupElement> = (-w - 1..=w + 1).map(|k| pres.pow(&prim, k)).collect();
    let p = |k: i64| &pw[(k + w + 1) as usize];
    let disp = |i: i64, j: i64| {
        let tp = pres.product([p(-i), t, p(-j)]);
        space.steps(&space.act(&tp, x0), x0)
    };
    let (best, bi, bj) = (-w..=w)
        .into_par_iter()
        .flat_map(|i| (-w..=w).into_par_iter().map(move |j| (i, j)))
        .map(|(i, j)| (disp(i, j), i, j))
        .min_by_key(|&(d, i, j)| (d, i.abs() + j.abs(), i, j))
        .unwrap();
    // Displacement one step outside the window must not go below the minimum.
    let outside = (-w - 1..=w + 1).flat_map(|i| [(i, -w - 1), (i, w + 1), (-w - 1, i), (w + 1, i)]);
    let window_certified = bi.abs() < w && bj.abs() < w && outside.into_iter().all(|(i, j)| disp(i, j) > best);
    Ok(EReduction {
        e: p(bi).clone(),
        t_prime: pres.product([p(-bi), t, p(-bj)]),
        f: p(bj).clone(),
        displacement: space.edge() * Length::from_integer(best as i64),
        window: w,
        window_certified,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PingPongReport {
    pub certified: bool,
    pub trivial: bool,
    /// Smallest slack of the chain hypothesis over all local pairs.
    #[serde(serialize_with = "crate::ser::display_opt")]
    pub alpha: Option<Length>,
    pub worst_pair: Option<(String, String)>,
    pub local_pairs_checked: u64,
    pub hypotheses: Vec<Check>,
    /// `(k, |(Vt)^k|, |V|^k)` for k up to n.
    pub counts: Vec<(u32, usize, u64)>,
    pub counts_exact: bool,
    pub truncated: bool,
}

/// Chain certificate for `|(Vt)ⁿ| ≥ |V|ⁿ`: each local pair `(h, h′)` of the
/// broken geodesic for `(v₁)(tv₂)⋯(tv_n w_n⁻¹)(t⁻¹w_{n−1}⁻¹)⋯(t⁻¹w₁⁻¹)`
/// must satisfy `(h⁻¹x₀, h′x₀)_{x₀} ≤ ½min(|hx₀−x₀|, |h′x₀−x₀|) − α − δ`
/// with α > 0. Counts are then brute-forced up to `n`.
#[allow(clippy::too_many_arguments)]
pub fn pingpong_certify(
    space: &ActionSpace,
    set: &ElementSet,
    root: &GroupElement,
    t: &GroupElement,
    n: u32,
    x0: &Point,
    params: &Resolved,
    budget: usize,
) -> Result<PingPongReport, Refusal> {
    let pres = space.presentation();
    if set.is_empty() {
        return Err(Refusal::new(RefusalKind::Empty, "empty V", Vec::new()));
    }
    let mut hyp = Vec::new();
    let (prim, transl) = hyperbolic_root(space, root)?;
    for v in set {
        hyp.push(Check::flag(format!("{v} in <{prim}>"), pres.power_of(v, &prim).is_some()));
    }
    if hyp.iter().any(|c| !c.holds) {
        return Err(Refusal::new(RefusalKind::NotInCoset, "V is not inside E", hyp));
    }
    let red = e_reduce(space, t, &prim, x0)?;
    let dt = space.dist(&space.act(t, x0), x0);
    hyp.push(Check::le("|t x0 - x0| <= min |e t f x0 - x0|", dt, red.displacement));
    if !hyp.last().unwrap().holds {
        return Err(Refusal::new(RefusalKind::NotEReduced, format!("{t} is not E-reduced"), hyp));
    }
    let brute = |hyp: Vec<Check>, alpha, worst_pair, pairs, trivial| -> Result<PingPongReport, Refusal> {
        let vt: ElementSet = set.iter().map(|v| pres.mul(v, t)).collect();
        let ps = pres
            .power_sets(&vt, n.max(1) as usize, budget)
            .map_err(|e| Refusal::new(RefusalKind::Budget, e.to_string(), Vec::new()))?;
        let counts: Vec<(u32, usize, u64)> = ps
            .sizes
            .iter()
            .enumerate()
            .map(|(k, &s)| (k as u32 + 1, s, (set.len() as u64).pow(k as u32 + 1)))
            .collect();
        let counts_exact = counts.iter().all(|&(_, s, e)| s as u64 == e);
        Ok(PingPongReport {
            certified: true,
            trivial,
            alpha,
            worst_pair,
            local_pairs_checked: pairs,
            hypotheses: hyp,
            counts_exact,
            truncated: ps.truncated_at.is_some(),
            counts,
        })
    };
    if set.len() == 1 {
        return brute(hyp, None, None, 0, true);
    }
    let spacing = params.pingpong_spacing(transl);
    let xs: Vec<Point> = set.iter().map(|v| space.act(v, x0)).collect();
    for (i, v) in set.iter().enumerate() {
        hyp.push(Check::ge(format!("|{v} x0 - x0|"), big(space.dist(&xs[i], x0)), spacing.clone()));
        for (j, w) in set.iter().enumerate().skip(i + 1) {
            hyp.push(Check::ge(format!("|{v} x0 - {w} x0|"), big(space.dist(&xs[i], &xs[j])), spacing.clone()));
        }
    }
    if hyp.iter().any(|c| !c.holds) {
        return Err(Refusal::new(RefusalKind::Spacing, "spacing hypothesis fails", hyp));
    }

    // Factor families: P0 = v, P1 = t v, J = t v w⁻¹ (v ≠ w), N = t⁻¹ w⁻¹.
    let ti = pres.inverse(t);
    let p0: Vec<GroupElement> = set.iter().cloned().collect();
    let p1: Vec<GroupElement> = set.iter().map(|v| pres.mul(t, v)).collect();
    let nn: Vec<GroupElement> = set.iter().map(|w| pres.mul(&ti, &pres.inverse(w))).collect();
    let mut jj = Vec::new();
    for v in set {
        for w in set {
            if v != w {
                jj.push(pres.product([t, v, &pres.inverse(w)]));
            }
        }
    }
    let mut families: Vec<(&[GroupElement], &[GroupElement])> = Vec::new();
    if n >= 2 {
        families.push((&jj, &nn));
        if n == 2 {
            families.push((&p0, &jj));
        } else {
            families.extend([(&p0[..], &p1[..]), (&p1[..], &jj[..]), (&nn[..], &nn[..])]);
        }
        if n >= 4 {
            families.push((&p1, &p1));
        }
    }
    let mut alpha: Option<Length> = None;
    let mut worst = None;
    let mut pairs = 0u64;
    for (a, b) in families {
        pairs += (a.len() * b.len()) as u64;
        if let Some((s, i, k)) = min_local_slack(space, x0, a, b, false) {
            if alpha.is_none_or(|al| s < al) {
                alpha = Some(s);
                worst = Some((a[i].to_string(), b[k].to_string()));
            }
        }
    }
    let ok = alpha.is_none_or(|a| a > Length::from_integer(0));
    hyp.push(Check::new(
        "chain slack alpha > 0",
        alpha.map_or("none".to_string(), |a| a.to_string()),
        ">",
        0,
        ok,
    ));
    if !ok {
        return Err(Refusal::new(RefusalKind::Spacing, "chain hypothesis fails", hyp));
    }
    brute(hyp, alpha, worst, pairs, false)
}

/// Minimum over pairs `(h, h′) ∈ left × right` of the local chain slack
/// `½min(|h⁻¹x₀ − x₀|, |h′x₀ − x₀|) − (h⁻¹x₀, h′x₀)_{x₀} − δ`, with the
/// minimising indices. `skip_diagonal` drops pairs with equal index.
pub fn min_local_slack(
    space: &ActionSpace,
    x0: &Point,
    left: &[GroupElement],
    right: &[GroupElement],
    skip_diagonal: bool,
) -> Option<(Length, usize, usize)> {
    let pres = space.presentation();
    let delta = space.delta();
    let half = Length::new(1, 2);
    let rx: Vec<(Point, Length)> = right
        .iter()
        .map(|h| {
            let p = space.act(h, x0);
            let d = space.dist(&p, x0);
            (p, d)
        })
        .collect();
    left.par_iter()
        .enumerate()
        .filter_map(|(i, h)| {
            let hinv = space.act(&pres.inverse(h), x0);
            let dh = space.dist(&hinv, x0);
            rx.iter()
                .enumerate()
                .filter(|&(k, _)| !(skip_diagonal && k == i))
                .map(|(k, (p, d))| {
                    let g = space.edge() * Length::new(gp2(space, &hinv, p, x0) as i64, 2);
                    (half * dh.min(*d) - g - delta, i, k)
                })
                .min()
        })
        .min()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Separation {
    pub subset: ElementSet,
    pub properties_hold: bool,
    /// Lower bound on |V₀| the mode promises, as `|V|/k`.
    pub guarantee: String,
    pub guarantee_met: bool,
}

/// V₀ ⊆ V ⊆ ⟨root⟩ with every displacement and every pairwise distance of
/// orbit points at least `r[E]`.
pub fn separate(
    space: &ActionSpace,
    set: &ElementSet,
    root: &GroupElement,
    r: u64,
    x0: &Point,
    params: &Resolved,
) -> Result<Separation, Refusal> {
    if set.is_empty() || r == 0 {
        return Err(Refusal::new(RefusalKind::Empty, "empty V or r = 0", Vec::new()));
    }
    let pres = space.presentation();
    let (prim, transl) = hyperbolic_root(space, root)?;
    let gap = transl * Length::from_integer(r as i64);
    let mut powered: Vec<(i64, GroupElement)> = Vec::new();
    for v in set {
        match pres.power_of(v, &prim) {
            Some(k) => powered.push((k, v.clone())),
            None => return Err(Refusal::new(RefusalKind::NotInCoset, format!("{v} not in <{prim}>"), Vec::new())),
        }
    }
    let disp = |v: &GroupElement| space.dist(&space.act(v, x0), x0);
    let chosen: Vec<GroupElement> = if params.is_paper() {
        // Larger half by direction, ordered by displacement, every 2r-th.
        let pos: Vec<_> = powered.iter().filter(|p| p.0 > 0).collect();
        let neg: Vec<_> = powered.iter().filter(|p| p.0 < 0).collect();
        let mut side = if pos.len() >= neg.len() { pos } else { neg };
        side.sort_by_key(|p| (disp(&p.1), p.0.abs()));
        side.iter()
            .skip(2 * r as usize - 1)
            .step_by(2 * r as usize)
            .map(|p| p.1.clone())
            .collect()
    } else {
        // Greedy along the axis by signed power.
        powered.sort_by_key(|p| p.0);
        let mut out: Vec<GroupElement> = Vec::new();
        for (_, v) in powered.iter().filter(|p| disp(&p.1) >= gap) {
            let far = out
                .last()
                .is_none_or(|u| space.dist(&space.act(u, x0), &space.act(v, x0)) >= gap);
            if far {
                out.push(v.clone());
            }
        }
        out
    };
    if chosen.is_empty() {
        return Err(Refusal::new(RefusalKind::Empty, format!("no element reaches r[E] = {gap}"), Vec::new()));
    }
    let pts: Vec<Point> = chosen.iter().map(|v| space.act(v, x0)).collect();
    let mut properties_hold = chosen.iter().all(|v| disp(v) >= gap);
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            properties_hold &= space.dist(p, q) >= gap;
        }
    }
    let (guarantee, guarantee_met) = if params.is_paper() {
        let k = big_int(6 * 100_000 * r as i64) * big_int(params.consts.n0 as i64);
        let met = big_int(chosen.len() as i64) * &k >= big_int(set.len() as i64);
        (format!("|V|/{k}"), met)
    } else {
        let k = 2 * r + 1;
        (format!("|V|/{k}"), chosen.len() as u64 * k >= set.len() as u64)
    };
    Ok(Separation {
        subset: ElementSet::new(chosen),
        properties_hold,
        guarantee,
        guarantee_met,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode::Mode;

    fn f2() -> ActionSpace {
        ActionSpace::free_group_tree(2, Length::from_integer(1)).unwrap()
    }

    fn practical(s: &ActionSpace) -> Resolved {
        Resolved::new(s, &Mode::default(), 1)
    }

    #[test]
    fn kmp_periods() {
        assert_eq!(periods(b"abababa"), vec![2, 4, 6, 7]);
        assert_eq!(periods(b"abc"), vec![3]);
    }

    #[test]
    fn periodic_examples() {
        let s = f2();
        let p = s.presentation();
        let e = |w: &str| p.parse(w).unwrap();
        let r = practical(&s);
        let x0 = s.origin();
        let c = is_periodic(&s, &e("(ab)^13a"), &e("ab"), &x0, &r).unwrap();
        assert_eq!(c.slack, big_int(3));
        let no = is_periodic(&s, &e("(ab)^11a"), &e("ab"), &x0, &r).unwrap_err();
        assert_eq!(no.reason, RefusalKind::TooShort);
        let no = is_periodic(&s, &e("b(ab)^13"), &e("ab"), &x0, &r).unwrap_err();
        assert_eq!(no.reason, RefusalKind::OffCylinder);
        let c = intrinsic_period(&s, &e("(ab)^13a"), &x0, &r).unwrap();
        assert_eq!(c.period_root, e("ab"));
        // Paper mode on trees: δ = 0 so the additive terms vanish.
        let paper = Resolved::new(&s, &Mode::Paper, 1);
        assert!(is_periodic(&s, &e("(ab)^13a"), &e("ab"), &x0, &paper).is_ok());
    }

    #[test]
    fn equations_recover_root() {
        let s = f2();
        let p = s.presentation();
        let e = |w: &str| p.parse(w).unwrap();
        let r = practical(&s);
        let v = e("(ab)^200");
        let g = e("(ab)^300b");
        let eqs: Vec<_> = (1..=6)
            .map(|i| {
                let u = p.pow(&e("ab"), i);
                let w = p.product([&p.inverse(&v), &p.inverse(&u), &g]);
                (u, v.clone(), w)
            })
            .collect();
        let c = extract_period_from_equations(&s, &eqs, &s.origin(), &r).unwrap();
        assert_eq!(c.period.period_root, e("ab"));
        assert!(c.pairs.iter().all(|p| p.holds));
    }

    #[test]
    fn equations_violating_symmetry_are_refused() {
        let s = f2();
        let p = s.presentation();
        let e = |w: &str| p.parse(w).unwrap();
        let v = e("ab");
        let g = e("(ab)^10b");
        let eqs: Vec<_> = [1, 4]
            .iter()
            .map(|&i| {
                let u = p.pow(&e("ab"), i);
                let w = p.product([&p.inverse(&v), &p.inverse(&u), &g]);
                (u, v.clone(), w)
            })
            .collect();
        let err = extract_period_from_equations(&s, &eqs, &s.origin(), &practical(&s)).unwrap_err();
        assert_eq!(err.reason, RefusalKind::Symmetry);
    }

    #[test]
    fn biperiodic_examples() {
        let s = f2();
        let p = s.presentation();
        let r = practical(&s);
        let x0 = s.origin();
        let v = p.parse_set(&["(ab)^13a", "(ab)^14a", "(ab)^15a"]).unwrap();
        let w = is_biperiodic(&s, &v, &x0, &r).unwrap();
        assert_eq!(w.coset_root, p.parse("ab").unwrap());
        assert_eq!(w.coset_rep, p.parse("(ab)^13a").unwrap());
        let bad = p.parse_set(&["b^13", "(ab)^13a"]).unwrap();
        assert_eq!(is_biperiodic(&s, &bad, &x0, &r).unwrap_err().reason, RefusalKind::PeriodMismatch);
        let one = p.parse_set(&["(ab)^13a"]).unwrap();
        assert_eq!(is_biperiodic(&s, &one, &x0, &r).unwrap_err().reason, RefusalKind::TooSmall);
    }

    #[test]
    fn e_reduce_examples() {
        let s = f2();
        let p = s.presentation();
        let e = |w: &str| p.parse(w).unwrap();
        let x0 = s.origin();
        let red = e_reduce(&s, &e("a^3ba^2"), &e("a"), &x0).unwrap();
        assert_eq!((red.e, red.t_prime, red.f), (e("a^3"), e("b"), e("a^2")));
        assert!(red.window_certified);
        let red = e_reduce(&s, &e("b"), &e("a"), &x0).unwrap();
        assert_eq!((red.e, red.f), (e("1"), e("1")));
        assert_eq!(e_reduce(&s, &e("a^5"), &e("a"), &x0).unwrap_err().reason, RefusalKind::InE);
    }

    #[test]
    fn pingpong_examples() {
        let s = f2();
        let p = s.presentation();
        let e = |w: &str| p.parse(w).unwrap();
        let r = practical(&s);
        let x0 = s.origin();
        let v = p.parse_set(&["(ab)^20", "(ab)^40", "(ab)^60"]).unwrap();
        let rep = pingpong_certify(&s, &v, &e("ab"), &e("b"), 3, &x0, &r, 1 << 20).unwrap();
        assert!(rep.certified && rep.counts_exact);
        assert_eq!(rep.counts.last().unwrap().1, 27);
        let close = p.parse_set(&["(ab)^20", "(ab)^21"]).unwrap();
        let err = pingpong_certify(&s, &close, &e("ab"), &e("b"), 3, &x0, &r, 1 << 20).unwrap_err();
        assert_eq!(err.reason, RefusalKind::Spacing);
        let single = p.parse_set(&["(ab)^20"]).unwrap();
        let rep = pingpong_certify(&s, &single, &e("ab"), &e("b"), 3, &x0, &r, 1 << 20).unwrap();
        assert!(rep.trivial && rep.counts.iter().all(|c| c.1 == 1));
    }

    #[test]
    fn pingpong_in_free_product() {
        let s = ActionSpace::free_product_tree([Some(5), Some(7)], Length::from_integer(1)).unwrap();
        let p = s.presentation();
        let e = |w: &str| p.parse(w).unwrap();
        let r = practical(&s);
        let v = p.parse_set(&["(ab)^10", "(ab)^20", "(ab)^30", "(ab)^-10"]).unwrap();
        let rep = pingpong_certify(&s, &v, &e("ab"), &e("b^2"), 3, &s.origin(), &r, 1 << 20).unwrap();
        assert!(rep.certified && rep.counts_exact, "{rep:?}");
    }

    #[test]
    fn separation_examples() {
        let s = f2();
        let p = s.presentation();
        let ab = p.parse("ab").unwrap();
        let r = practical(&s);
        let x0 = s.origin();
        let v: ElementSet = (1..=20).map(|k| p.pow(&ab, k)).collect();
        let sep = separate(&s, &v, &ab, 2, &x0, &r).unwrap();
        let want: ElementSet = (1..=10).map(|k| p.pow(&ab, 2 * k)).collect();
        assert_eq!(sep.subset, want);
        assert!(sep.properties_hold);
        let one: ElementSet = [p.pow(&ab, 5)].into_iter().collect();
        assert_eq!(separate(&s, &one, &ab, 2, &x0, &r).unwrap().subset, one);
        let low: ElementSet = [ab.clone()].into_iter().collect();
        assert_eq!(separate(&s, &low, &ab, 2, &x0, &r).unwrap_err().reason, RefusalKind::Empty);
    }

    #[test]
    fn right_periods_of_two_subgroups_agree() {
        let s = f2();
        let p = s.presentation();
        let e = |w: &str| p.parse(w).unwrap();
        let r = practical(&s);
        let x0 = s.origin();
        let (u1, u2) = (e("bba(ba^13)^13"), e("(ba^13)^13"));
        for u in [&u1, &u2] {
            is_right_periodic(&s, u, &e("ba^13"), &x0, &r).unwrap();
        }
        let p1 = is_right_periodic(&s, &u1, &e("a"), &x0, &r).unwrap();
        let p2 = is_right_periodic(&s, &u2, &e("a"), &x0, &r).unwrap();
        assert_eq!(hausdorff(&s, &p1.period, &p2.period), Length::from_integer(0));
    }
}
