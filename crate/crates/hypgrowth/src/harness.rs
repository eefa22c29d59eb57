//! End-to-end growth experiments: exact |Uⁿ|, the theorem bounds with their
//! α constants, the concentrated and diffuse pipelines, and exponent fits.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::energy::{classify, minimize_energy, Case, Classification, EnergyProfile};
use crate::hypgeom::{big, big_int, Constants};
use crate::mode::{d_log_arg, Resolved, Threshold};
use crate::periodicity::{
    e_reduce, intrinsic_period, is_biperiodic, min_local_slack, pingpong_certify, separate, BiPeriodicWitness, Check,
    PingPongReport, Refusal,
};
use crate::reduction::{median_split, reduce_graph, reduce_tree, ReductionResult};
use crate::spaces::{ActionSpace, Length, Point};
use crate::words::{ElementSet, GroupElement, WordError};

/// Default cap on distinct elements of one enumerated product set.
pub const DEFAULT_BUDGET: usize = 10_000_000;

fn pow10(k: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(10u32).pow(k))
}

fn ratio_pow(x: &BigRational, k: usize) -> BigRational {
    Pow::pow(x, k as u32)
}

/// `⌊(n+1)/2⌋`.
pub fn half_exponent(n: usize) -> usize {
    n.div_ceil(2)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaConstants {
    /// ρ₀² / (10¹⁵ κ₀²)
    #[serde(serialize_with = "crate::ser::display")]
    pub alpha_tree: BigRational,
    /// δ² / (10⁵⁰ N₀⁶ κ₀²)
    #[serde(serialize_with = "crate::ser::display")]
    pub alpha_acyl: BigRational,
    /// ρ₀ / (10⁶ κ₀)
    #[serde(serialize_with = "crate::ser::display")]
    pub c_concentrated: BigRational,
    /// 10¹⁴ N₀³ κ₀ / ρ₀
    #[serde(serialize_with = "crate::ser::display")]
    pub gamma: BigRational,
    /// 10¹² N₀⁴ κ₀² / ρ₀²
    #[serde(serialize_with = "crate::ser::display")]
    pub c_counting: BigRational,
    /// Largest ball of radius 1000·d·δ (graphs only).
    pub b: Option<u64>,
}

impl AlphaConstants {
    pub fn of(space: &ActionSpace, n_elements: usize) -> Self {
        let k = Constants::of(space);
        let n0 = big_int(k.n0 as i64);
        let kr = &k.kappa0 / &k.rho0;
        Self {
            alpha_tree: (&k.rho0 * &k.rho0) / (pow10(15) * &k.kappa0 * &k.kappa0),
            alpha_acyl: (&k.delta * &k.delta) / (pow10(50) * ratio_pow(&n0, 6) * &k.kappa0 * &k.kappa0),
            c_concentrated: &k.rho0 / (pow10(6) * &k.kappa0),
            gamma: pow10(14) * ratio_pow(&n0, 3) * &kr,
            c_counting: pow10(12) * ratio_pow(&n0, 4) * &kr * &kr,
            b: ball_bound(space, n_elements),
        }
    }
}

fn ball_bound(space: &ActionSpace, n_elements: usize) -> Option<u64> {
    let vs = space.vertices()?;
    let m = d_log_arg(space, n_elements)?;
    // 1000·log₂(m)·δ in steps, rounded up; log₂ m ≤ bit length.
    let logc = 64 - m.leading_zeros() as i64;
    let r = Length::from_integer(1000 * logc) * space.delta();
    let steps = space.length_to_steps(r.ceil()).unwrap_or(u64::MAX);
    vs.par_iter()
        .map(|x| vs.iter().filter(|y| space.steps(x, y) <= steps).count() as u64)
        .max()
}

/// One row of the size table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeRow {
    pub n: usize,
    pub size: usize,
    pub exponent: usize,
    /// Exact theorem bound, or on graphs an exact rational upper bound of it
    /// (log₂ replaced by its floor).
    #[serde(serialize_with = "crate::ser::display")]
    pub bound: BigRational,
    pub bound_approx: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub n_elements: usize,
    pub applicable: bool,
    pub not_applicable: Option<String>,
    pub theorem: &'static str,
    pub bound_form: String,
    pub alpha: AlphaConstants,
    pub sizes: Vec<SizeRow>,
    pub truncated_at: Option<usize>,
    pub hypotheses: Vec<Check>,
    pub hypotheses_certified: bool,
    /// ½ ln(α|U|).
    pub entropy_lb: f64,
    pub profile: Option<EnergyProfile>,
    pub classification: Option<Classification>,
    pub case_trace: Vec<String>,
    pub concentrated: Option<ConcentratedReport>,
    pub diffuse: Option<DiffuseReport>,
    pub violations: Vec<String>,
}

impl GrowthReport {
    pub fn truncated(&self) -> bool {
        self.truncated_at.is_some()
            || self.concentrated.as_ref().is_some_and(|c| c.truncated)
            || self.diffuse.as_ref().is_some_and(|d| d.truncated)
    }
}

/// All non-identity elements share one primitive root up to inversion.
pub fn virtually_cyclic(space: &ActionSpace, u: &ElementSet) -> bool {
    let pres = space.presentation();
    let mut nontrivial = u.iter().filter(|g| !g.is_identity());
    match nontrivial.next() {
        None => true,
        Some(first) => nontrivial.all(|g| pres.same_root(g, first)),
    }
}

fn theorem_bound(space: &ActionSpace, alpha: &AlphaConstants, u_len: usize, l: usize) -> (BigRational, String) {
    let u = big_int(u_len as i64);
    match d_log_arg(space, u_len) {
        None => (ratio_pow(&(&alpha.alpha_tree * &u), l), format!("({} * {u_len})^{l}", alpha.alpha_tree)),
        Some(m) => {
            let floor_log = big_int(63 - m.leading_zeros() as i64);
            let base = &alpha.alpha_acyl * &u / ratio_pow(&floor_log, 6);
            (
                ratio_pow(&base, l),
                format!("({} * {u_len} / log2({m})^6)^{l}", alpha.alpha_acyl),
            )
        }
    }
}

/// Exact |Uᵏ| for k ≤ n_max compared with the theorem bound, then the case
/// split and the pipeline of the resulting case.
pub fn growth_report(
    space: &ActionSpace,
    u: &ElementSet,
    n_max: usize,
    params: &Resolved,
    budget: usize,
) -> Result<GrowthReport, WordError> {
    assert!(n_max >= 1, "n_max must be positive");
    let pres = space.presentation();
    let alpha = AlphaConstants::of(space, u.len());
    let theorem = if space.is_tree() { "acylindrical_tree" } else { "acylindrical_hyperbolic" };
    let (_, bound_form) = theorem_bound(space, &alpha, u.len(), half_exponent(n_max));
    let ps = pres.power_sets(u, n_max, budget)?;
    let alpha_eff = if space.is_tree() { &alpha.alpha_tree } else { &alpha.alpha_acyl };
    let entropy_lb = 0.5 * ((alpha_eff * big_int(u.len() as i64)).to_f64().unwrap_or(0.0)).ln();
    let mut report = GrowthReport {
        n_elements: u.len(),
        applicable: true,
        not_applicable: None,
        theorem,
        bound_form,
        sizes: Vec::new(),
        truncated_at: ps.truncated_at,
        hypotheses: Vec::new(),
        hypotheses_certified: false,
        entropy_lb,
        profile: None,
        classification: None,
        case_trace: Vec::new(),
        concentrated: None,
        diffuse: None,
        violations: Vec::new(),
        alpha,
    };
    for (i, &size) in ps.sizes.iter().enumerate() {
        let n = i + 1;
        let l = half_exponent(n);
        let (bound, _) = theorem_bound(space, &report.alpha, u.len(), l);
        report.sizes.push(SizeRow {
            n,
            size,
            exponent: l,
            bound_approx: bound.to_f64().unwrap_or(f64::INFINITY),
            holds: big_int(size as i64) >= bound,
            bound,
        });
    }
    if virtually_cyclic(space, u) {
        report.applicable = false;
        report.not_applicable = Some("U lies in a virtually cyclic subgroup".into());
        report.case_trace.push("not_applicable".into());
        return Ok(report);
    }
    let profile = minimize_energy(space, u)?;
    let lambda = big(profile.displacement);
    let k = Constants::of(space);
    let theorem_floor = Threshold {
        coeff: pow10(14) * &k.kappa0,
        log_arg: d_log_arg(space, u.len()),
    };
    let disp_ok = !theorem_floor.exceeds(&lambda).holds;
    report.hypotheses.push(Check::new("not virtually cyclic", true, "==", true, true));
    report.hypotheses.push(Check::new(
        "lambda0 >= 10^14 kappa0 d",
        &lambda,
        ">=",
        &theorem_floor,
        disp_ok,
    ));
    // Energy form of the same hypothesis: E(U) > threshold implies it.
    let energy_ok = theorem_floor.exceeds(&big(profile.energy)).holds
        && !theorem_floor.admits(&big(profile.energy)).holds;
    report.hypotheses.push(Check::new(
        "E(U) > 10^14 kappa0 d (implies the above)",
        profile.energy,
        ">",
        &theorem_floor,
        energy_ok,
    ));
    let mut certified = disp_ok;
    if space.is_tree() {
        // Trivial edge stabilisers: U not fixing a vertex suffices.
        let moved = profile.displacement > Length::zero();
        report.hypotheses.push(Check::new("tree: U fixes no vertex (lambda0 > 0)", profile.displacement, ">", 0, moved));
        certified |= moved;
    }
    report.hypotheses_certified = certified;
    if certified {
        for row in report.sizes.iter().filter(|r| !r.holds) {
            report.violations.push(format!("|U^{}| = {} < bound {}", row.n, row.size, row.bound));
        }
        let n = ps.sizes.len();
        let measured = (ps.sizes[n - 1] as f64).ln() / n as f64;
        if report.entropy_lb > measured + 1e-12 {
            report.violations.push(format!("entropy bound {} exceeds (1/{n}) ln|U^{n}| = {measured}", report.entropy_lb));
        }
    }

    let class = classify(space, u, &profile, params);
    report.case_trace.push(crate::ser::tag(&class.case));
    let x0 = profile.base_point.clone();
    match class.case {
        Case::BelowThreshold => {}
        Case::Concentrated => {
            report.concentrated = Some(concentrated_pipeline(space, u, &x0, n_max, params, budget));
        }
        Case::Diffuse => {
            let d = diffuse_pipeline(space, u, &x0, n_max, params, budget);
            if d.branch == DiffuseBranch::ReductionFailed {
                report.case_trace.push("reduction_failed".into());
                let c = concentrated_pipeline(space, u, &x0, n_max, params, budget);
                report.case_trace.push(if c.certified { "rerouted_concentrated" } else { "no_certificate" }.into());
                report.concentrated = Some(c);
            } else {
                report.case_trace.push(crate::ser::tag(&d.branch));
            }
            report.diffuse = Some(d);
        }
    }
    let achieved = report
        .concentrated
        .iter()
        .flat_map(|c| c.achieved.iter())
        .chain(report.diffuse.iter().flat_map(|d| d.achieved.iter()));
    for a in achieved {
        if let Some(row) = report.sizes.iter().find(|r| r.n == a.n) {
            if a.size > row.size {
                report.violations.push(format!("witness set of size {} exceeds |U^{}| = {}", a.size, a.n, row.size));
            }
        }
    }
    profile_into(&mut report, profile, class);
    Ok(report)
}

fn profile_into(report: &mut GrowthReport, profile: EnergyProfile, class: Classification) {
    report.profile = Some(profile);
    report.classification = Some(class);
}

/// A lower bound witnessed inside Uⁿ by an explicit sub-product.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Achieved {
    pub n: usize,
    /// Cardinality of the witnessing sub-product of Uⁿ.
    pub size: usize,
    /// What the certificate predicts for it.
    pub predicted: usize,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentratedReport {
    pub certified: bool,
    pub error: Option<String>,
    pub witness: Option<GroupElement>,
    pub midpoint: Option<Point>,
    pub u1_size: usize,
    pub u2: ElementSet,
    #[serde(serialize_with = "crate::ser::display_opt")]
    pub chain_alpha: Option<Length>,
    pub chain_pairs: u64,
    /// |U₁vU₁| against c²|U₁|².
    pub u1vu1: Option<usize>,
    #[serde(serialize_with = "crate::ser::display")]
    pub u1vu1_lemma_bound: BigRational,
    pub achieved: Vec<Achieved>,
    /// (c/4 |U|)^{⌊(n+1)/2⌋} at n_max.
    #[serde(serialize_with = "crate::ser::display")]
    pub lemma_bound: BigRational,
    pub truncated: bool,
}

/// Small-displacement case: U₁ = {u : |ux₀ − x₀| ≤ T}, a witness v of large
/// displacement, U₂ ⊆ U₁ spread out at a point m of [x₀, vx₀], and a chain
/// certificate for the words of (U₂v)ⁿ.
pub fn concentrated_pipeline(
    space: &ActionSpace,
    u: &ElementSet,
    x0: &Point,
    n_max: usize,
    params: &Resolved,
    budget: usize,
) -> ConcentratedReport {
    let pres = space.presentation();
    let alpha = AlphaConstants::of(space, u.len());
    let c = &alpha.c_concentrated;
    let mut rep = ConcentratedReport {
        certified: false,
        error: None,
        witness: None,
        midpoint: None,
        u1_size: 0,
        u2: ElementSet::default(),
        chain_alpha: None,
        chain_pairs: 0,
        u1vu1: None,
        u1vu1_lemma_bound: BigRational::zero(),
        achieved: Vec::new(),
        lemma_bound: ratio_pow(&(c / big_int(4) * big_int(u.len() as i64)), half_exponent(n_max)),
        truncated: false,
    };
    let disp = |g: &GroupElement| space.dist(&space.act(g, x0), x0);
    let u1: ElementSet = u.iter().filter(|g| params.concentration_t.admits(&big(disp(g))).holds).cloned().collect();
    rep.u1_size = u1.len();
    rep.u1vu1_lemma_bound = c * c * big_int((u1.len() * u1.len()) as i64);
    let need = params.witness_displacement();
    let v = u
        .iter()
        .filter(|g| big(disp(g)) >= need)
        .max_by(|a, b| disp(a).cmp(&disp(b)).then(b.cmp(a)))
        .cloned();
    let Some(v) = v else {
        rep.error = Some(format!("NoHyperbolicWitness: no element moves x0 by {need}"));
        return rep;
    };
    if u1.is_empty() {
        rep.error = Some("EmptyU1: no element moves x0 by at most T".into());
        return rep;
    }
    let vx = space.act(&v, x0);
    let total = space.steps(x0, &vx);
    let off = params.midpoint_offset(space.edge()) / big(space.edge());
    let k = off.ceil().to_integer().to_u64().unwrap_or(u64::MAX).min(total);
    let m = space.point_along(x0, &vx, k);
    let spacing = params.u2_spacing();
    let mut kept: Vec<(GroupElement, Point)> = Vec::new();
    for g in &u1 {
        let gm = space.act(g, &m);
        if kept.iter().all(|(_, p)| big(space.dist(p, &gm)) > spacing) {
            kept.push((g.clone(), gm));
        }
    }
    let u2 = ElementSet::new(kept.into_iter().map(|(g, _)| g).collect());
    rep.witness = Some(v.clone());
    rep.midpoint = Some(m);

    // Factors of a relation between two words of (U₂v)ⁿ differing in the
    // first letter: v⁻¹a⁻¹ ⋯ v⁻¹a⁻¹ · b v ⋯ b v.
    let vinv = pres.inverse(&v);
    let left: Vec<GroupElement> = u2.iter().map(|a| pres.mul(&vinv, &pres.inverse(a))).collect();
    let right: Vec<GroupElement> = u2.iter().map(|b| pres.mul(b, &v)).collect();
    let mut slack: Option<Length> = None;
    let fams: [(&[GroupElement], &[GroupElement], bool); 3] =
        [(&left, &left, false), (&left, &right, true), (&right, &right, false)];
    for (a, b, skip) in fams {
        rep.chain_pairs += (a.len() * b.len()) as u64;
        if let Some((s, _, _)) = min_local_slack(space, x0, a, b, skip) {
            slack = Some(slack.map_or(s, |t| t.min(s)));
        }
    }
    rep.chain_alpha = slack;
    rep.certified = slack.is_none_or(|s| s > Length::zero());

    let u2v: ElementSet = right.iter().cloned().collect();
    for n in 1..=n_max {
        let l = n / 2;
        let mut w = if l > 0 {
            match pres.product_set(&u2v, l, budget) {
                Ok(s) => s,
                Err(_) => {
                    rep.truncated = true;
                    break;
                }
            }
        } else {
            ElementSet::new(vec![GroupElement::identity()])
        };
        if n % 2 == 1 {
            if w.len().saturating_mul(u2.len()) > budget {
                rep.truncated = true;
                break;
            }
            w = pres.times(&w, &u2);
        }
        rep.achieved.push(Achieved {
            n,
            size: w.len(),
            predicted: u2.len().pow(half_exponent(n) as u32),
            description: if n % 2 == 1 { format!("(U2 v)^{l} U2") } else { format!("(U2 v)^{l}") },
        });
    }
    if u1.len() * u1.len() <= budget {
        let u1v = pres.times(&u1, &ElementSet::new(vec![v.clone()]));
        rep.u1vu1 = Some(pres.times(&u1v, &u1).len());
    } else {
        rep.truncated = true;
    }
    if rep.certified && rep.achieved.iter().any(|a| a.size != a.predicted) {
        rep.error = Some("chain certificate contradicted by enumeration".into());
    }
    rep.u2 = u2;
    rep
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffuseBranch {
    NonPeriodic,
    BiPeriodic,
    ReductionFailed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VCount {
    pub v: GroupElement,
    pub count: usize,
    /// `|U₁||W|`.
    pub full: usize,
    /// v is periodic at x₀ with its own letters (free group trees).
    pub periodic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiffuseReport {
    pub branch: DiffuseBranch,
    pub reduction: Option<ReductionResult>,
    pub u1: ElementSet,
    pub u2: ElementSet,
    /// Number of factors of W: `(U₁U₂)^{l−2}U₁`, or U₁ when l < 3.
    pub w_factors: usize,
    pub w_size: usize,
    pub counts: Vec<VCount>,
    pub biperiodic: Option<BiPeriodicWitness>,
    pub pingpong: Option<PingPongReport>,
    pub refusal: Option<Refusal>,
    pub achieved: Vec<Achieved>,
    /// Theoretical lower bound for the branch at n_max.
    #[serde(serialize_with = "crate::ser::display")]
    pub lemma_bound: BigRational,
    pub truncated: bool,
}

impl DiffuseReport {
    fn empty(branch: DiffuseBranch) -> Self {
        Self {
            branch,
            reduction: None,
            u1: ElementSet::default(),
            u2: ElementSet::default(),
            w_factors: 0,
            w_size: 0,
            counts: Vec::new(),
            biperiodic: None,
            pingpong: None,
            refusal: None,
            achieved: Vec::new(),
            lemma_bound: BigRational::zero(),
            truncated: false,
        }
    }
}

/// Largest class of elements that are bi-periodic with a common pair of
/// periods (free group trees only).
fn biperiodic_class(space: &ActionSpace, u: &ElementSet, x0: &Point, params: &Resolved) -> Vec<GroupElement> {
    if !space.presentation().is_free_group() || !space.is_tree() {
        return Vec::new();
    }
    let pres = space.presentation();
    let keyed: Vec<(GroupElement, GroupElement, GroupElement)> = u
        .as_slice()
        .par_iter()
        .filter_map(|v| {
            let e1 = intrinsic_period(space, v, x0, params).ok()?.period_root;
            let e2 = intrinsic_period(space, &pres.inverse(v), x0, params).ok()?.period_root;
            let norm = |r: GroupElement| {
                let i = pres.inverse(&r);
                r.min(i)
            };
            Some((norm(e1), norm(e2), v.clone()))
        })
        .collect();
    let mut best: Vec<GroupElement> = Vec::new();
    for (e1, e2, _) in &keyed {
        let class: Vec<GroupElement> = keyed
            .iter()
            .filter(|(a, b, _)| a == e1 && b == e2)
            .map(|k| k.2.clone())
            .collect();
        if class.len() > best.len() {
            best = class;
        }
    }
    best
}

/// Diffuse case. A bi-periodic class holding more than half of U goes to
/// the ping-pong route; otherwise U is reduced, split at the median and
/// |U₁vW| is counted for each v ∈ U₂.
pub fn diffuse_pipeline(
    space: &ActionSpace,
    u: &ElementSet,
    x0: &Point,
    n_max: usize,
    params: &Resolved,
    budget: usize,
) -> DiffuseReport {
    let pres = space.presentation();
    let alpha = AlphaConstants::of(space, u.len());
    let l = half_exponent(n_max);
    let ul = big_int(u.len() as i64);

    let class = biperiodic_class(space, u, x0, params);
    if class.len() >= 2 && 2 * class.len() > u.len() {
        let mut rep = DiffuseReport::empty(DiffuseBranch::BiPeriodic);
        // β = 1/8: the class holds more than 4β|U|.
        rep.lemma_bound = ratio_pow(&(ul / (big_int(8) * &alpha.gamma)), l);
        let set = ElementSet::new(class);
        match biperiodic_route(space, u, &set, x0, n_max, params, budget, &mut rep) {
            Ok(()) => {}
            Err(r) => rep.refusal = Some(r),
        }
        return rep;
    }

    let red = if space.is_tree() {
        reduce_tree(space, u, x0, params.reduction_r)
    } else {
        reduce_graph(space, u, x0, graph_radius(space, u.len(), params))
    };
    let mut rep = DiffuseReport::empty(DiffuseBranch::NonPeriodic);
    rep.lemma_bound = nonperiodic_bound(space, &alpha, u.len(), l);
    if red.is_failed() || !red.certified {
        rep.branch = DiffuseBranch::ReductionFailed;
        rep.reduction = Some(red);
        return rep;
    }
    let (u1, u2) = match median_split(space, &red.u1, &red.u2, x0) {
        Ok(s) => s,
        Err(_) => {
            rep.branch = DiffuseBranch::ReductionFailed;
            rep.reduction = Some(red);
            return rep;
        }
    };
    rep.reduction = Some(red);
    let w = if l < 3 {
        rep.w_factors = 1;
        u1.clone()
    } else {
        rep.w_factors = 2 * (l - 2) + 1;
        let mut w = u1.clone();
        for _ in 0..l - 2 {
            if w.len().saturating_mul(u1.len() * u2.len()) > budget {
                rep.truncated = true;
                break;
            }
            w = pres.times(&pres.times(&u1, &u2), &w);
        }
        w
    };
    rep.w_size = w.len();
    let full = u1.len() * w.len();
    if !rep.truncated && full <= budget {
        rep.counts = u2
            .as_slice()
            .par_iter()
            .map(|v| {
                let s = pres.times(&pres.times(&u1, &ElementSet::new(vec![v.clone()])), &w);
                VCount {
                    v: v.clone(),
                    count: s.len(),
                    full,
                    periodic: space.is_tree()
                        && pres.is_free_group()
                        && intrinsic_period(space, v, x0, params).is_ok(),
                }
            })
            .collect();
    } else {
        rep.truncated = true;
    }
    if let Some(best) = rep.counts.iter().max_by_key(|c| (c.count, std::cmp::Reverse(c.v.clone()))) {
        let n = if l < 3 { 3 } else { 2 * l - 1 };
        if n <= n_max {
            rep.achieved.push(Achieved {
                n,
                size: best.count,
                predicted: best.full,
                description: format!("U1 {} W", best.v),
            });
        }
    }
    rep.u1 = u1;
    rep.u2 = u2;
    rep
}

fn nonperiodic_bound(space: &ActionSpace, alpha: &AlphaConstants, n: usize, l: usize) -> BigRational {
    let u = big_int(n as i64);
    let base = match (d_log_arg(space, n), alpha.b) {
        (Some(m), Some(b)) => {
            let d = big_int(64 - m.leading_zeros() as i64);
            let b = big_int(b as i64);
            u / (big_int(8) * pow10(36) * ratio_pow(&d, 6) * &alpha.c_counting * big_int(2) * &b * &b)
        }
        _ => u / (big_int(8 * 200) * &alpha.c_counting),
    };
    ratio_pow(&base, l)
}

/// Radius of the graph reduction: 1000·log₂(2|U|)·δ in paper mode, the
/// practical reduction radius otherwise; whole steps, at least one.
pub fn graph_radius(space: &ActionSpace, n: usize, params: &Resolved) -> Length {
    let r = if params.is_paper() {
        let m = d_log_arg(space, n).unwrap_or(2);
        Length::from_integer(1000 * (64 - m.leading_zeros() as i64)) * space.delta()
    } else {
        params.reduction_r
    };
    let e = space.edge();
    let steps = (r / e).ceil().max(Length::one());
    steps * e
}

#[allow(clippy::too_many_arguments)]
fn biperiodic_route(
    space: &ActionSpace,
    u: &ElementSet,
    set: &ElementSet,
    x0: &Point,
    n_max: usize,
    params: &Resolved,
    budget: usize,
    rep: &mut DiffuseReport,
) -> Result<(), Refusal> {
    let pres = space.presentation();
    let wit = is_biperiodic(space, set, x0, params)?;
    let root = wit.coset_root.clone();
    let t0 = wit.coset_rep.clone();
    rep.u2 = set.clone();
    rep.biperiodic = Some(wit);
    // V ⊆ E·t with t ∉ E; if the class lies inside E use an element of U
    // outside E as t and V = class.
    let (v_e, t) = if pres.power_of(&t0, &root).is_none() {
        let ti = pres.inverse(&t0);
        (set.iter().map(|v| pres.mul(v, &ti)).collect::<ElementSet>(), t0)
    } else {
        match u.iter().find(|s| pres.power_of(s, &root).is_none()) {
            Some(s) => (set.clone(), s.clone()),
            None => {
                return Err(Refusal {
                    reason: crate::periodicity::RefusalKind::InE,
                    detail: "U lies in E".into(),
                    checks: Vec::new(),
                })
            }
        }
    };
    let red = e_reduce(space, &t, &root, x0)?;
    let shifted: ElementSet = v_e.iter().map(|v| pres.product([&red.f, v, &red.e])).collect();
    let transl = crate::hypgeom::translation_length(space, &root).translation_length;
    let r = (params.pingpong_spacing(transl) / big(transl)).ceil().to_integer().to_u64().unwrap_or(1).max(1);
    let sep = separate(space, &shifted, &root, r, x0, params)?;
    let pp = pingpong_certify(space, &sep.subset, &root, &red.t_prime, n_max.min(3) as u32, x0, params, budget)?;
    rep.truncated |= pp.truncated;
    let k = sep.subset.len();
    rep.pingpong = Some(pp);
    let l = half_exponent(n_max);
    // (V t)^l = (V t0)^l when t = t0; its size is at least |V₀|^l.
    let vt: ElementSet = v_e.iter().map(|v| pres.mul(v, &t)).collect();
    match pres.product_set(&vt, l, budget) {
        Ok(s) => rep.achieved.push(Achieved {
            n: n_max,
            size: s.len(),
            predicted: k.pow(l as u32),
            description: format!("(V t)^{l}"),
        }),
        Err(_) => rep.truncated = true,
    }
    Ok(())
}

/// Least-squares slope of ln|U_N^n| against ln N.
pub fn exponent_fit<F>(space: &ActionSpace, family: F, n: usize, range: &[u32], budget: usize) -> Result<FitReport, WordError>
where
    F: Fn(u32) -> Result<ElementSet, WordError>,
{
    let pres = space.presentation();
    let mut points = Vec::new();
    for &nn in range {
        let u = family(nn)?;
        let s = pres.product_set(&u, n, budget)?;
        points.push((nn, s.len()));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| (p.1 as f64).ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(FitReport {
        n,
        target: half_exponent(n),
        points,
        slope: sxy / sxx,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub n: usize,
    pub target: usize,
    /// `(N, |U_N^n|)`.
    pub points: Vec<(u32, usize)>,
    pub slope: f64,
}
