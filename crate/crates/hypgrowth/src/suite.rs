//! The verification suite behind `verify-all` and the acceptance test. Each
//! criterion is deterministic given the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::random_set;
use crate::energy::{classify, energy_at, minimize_energy, Case};
use crate::harness::{exponent_fit, growth_report, DEFAULT_BUDGET};
use crate::hypgeom::{gp2, translation_length};
use crate::mode::{Mode, Resolved};
use crate::periodicity::{e_reduce, pingpong_certify, reduced_products_check};
use crate::reduction::{certify, reduce_tree};
use crate::spaces::{ActionSpace, GraphSpec, Length, Point};
use crate::treeapprox::approximate_tree;
use crate::words::{ElementSet, GroupElement, Presentation};

pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub summary: String,
    pub metrics: Value,
}

fn f2() -> ActionSpace {
    ActionSpace::free_group_tree(2, Length::from_integer(1)).expect("rank 2")
}

fn z5z7() -> ActionSpace {
    ActionSpace::free_product_tree([Some(5), Some(7)], Length::from_integer(1)).expect("orders 5, 7")
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Criteria 1–8; the determinism criterion compares two runs of this.
pub fn run_suite(seed: u64) -> Vec<CriterionResult> {
    vec![
        optimality_exponent(),
        tree_theorem_bound(seed),
        pingpong_exactness(seed),
        reduced_products(seed),
        tree_approximation(seed),
        reduction_certification(seed),
        geometry(seed),
        energy(seed),
    ]
}

/// Slopes of ln|U_N^n| against ln N for the optimality family.
pub fn optimality_exponent() -> CriterionResult {
    let s = f2();
    let fam = |n: u32| s.presentation().safin_family(n).map(|x| x.0);
    let mut fits = Vec::new();
    let mut passed = true;
    for n in 1..=5usize {
        let range: &[u32] = if n <= 3 { &[4, 8, 16, 32] } else { &[2, 4, 8] };
        match exponent_fit(&s, fam, n, range, DEFAULT_BUDGET) {
            Ok(f) => {
                let ok = (f.slope - f.target as f64).abs() <= 0.25;
                passed &= ok;
                fits.push(json!({"n": n, "target": f.target, "slope": format!("{:.4}", f.slope), "points": f.points, "ok": ok}));
            }
            Err(e) => {
                passed = false;
                fits.push(json!({"n": n, "error": e.to_string()}));
            }
        }
    }
    let slopes: Vec<String> = fits.iter().map(|f| format!("n={} slope={}", f["n"], f["slope"])).collect();
    CriterionResult {
        id: 1,
        title: "optimality family exponent",
        passed,
        summary: slopes.join(", "),
        metrics: json!(fits),
    }
}

/// Default tree suite in paper mode: measured sizes against (α|U|)^l.
pub fn tree_theorem_bound(seed: u64) -> CriterionResult {
    let mut instances: Vec<(String, ActionSpace, ElementSet, usize)> = Vec::new();
    let s = f2();
    for n in 2..=6 {
        instances.push((format!("F2 safin({n})"), s.clone(), s.presentation().safin_family(n).unwrap().0, 4));
    }
    instances.push(("F2 {a,b}".into(), s.clone(), s.presentation().parse_set(&["a", "b"]).unwrap(), 5));
    let mut r = rng(seed, 2);
    for i in 0..10 {
        let count = r.gen_range(5..=25);
        let u = random_set(s.presentation(), &mut r, count, 6).unwrap();
        instances.push((format!("F2 random #{i}"), s.clone(), u, 3));
    }
    let fp = z5z7();
    for i in 0..5 {
        let count = r.gen_range(5..=20);
        let u = random_set(fp.presentation(), &mut r, count, 4).unwrap();
        instances.push((format!("Z5*Z7 random #{i}"), fp.clone(), u, 3));
    }
    let rows: Vec<Value> = instances
        .par_iter()
        .map(|(name, space, u, n)| {
            let params = Resolved::new(space, &Mode::Paper, u.len());
            match growth_report(space, u, *n, &params, DEFAULT_BUDGET) {
                Ok(g) => json!({
                    "instance": name,
                    "size": u.len(),
                    "certified": g.hypotheses_certified,
                    "sizes": g.sizes.iter().map(|r| r.size).collect::<Vec<_>>(),
                    "violations": g.violations,
                    "truncated": g.truncated_at.is_some(),
                }),
                Err(e) => json!({"instance": name, "error": e.to_string()}),
            }
        })
        .collect();
    let certified = rows.iter().filter(|r| r["certified"] == true).count();
    let violations: usize = rows.iter().map(|r| r["violations"].as_array().map_or(1, |v| v.len())).sum();
    let errors = rows.iter().filter(|r| r.get("error").is_some()).count();
    CriterionResult {
        id: 2,
        title: "tree theorem bound in paper mode",
        passed: violations == 0 && errors == 0 && certified > 0,
        summary: format!("{certified}/{} instances certified, {violations} violations", rows.len()),
        metrics: json!(rows),
    }
}

/// Cyclically reduced random root: a word in F₂, alternating syllables in
/// the free product.
fn random_root(pres: &Presentation, r: &mut ChaCha8Rng) -> GroupElement {
    loop {
        let g = pres.random_element(r, 4);
        if g.is_identity() {
            continue;
        }
        let (c, _) = pres.cyclic_reduce(&g);
        if c != g {
            continue;
        }
        match pres.primitive_root(&g) {
            Ok((root, _))
                if root == g
                    && pres.power_of(&g, &g) == Some(1)
                    && (pres.is_free_group() || g.syllable_len().is_multiple_of(2)) =>
            {
                return g;
            }
            _ => {}
        }
    }
}

/// Ping-pong instances: V = {root^k} with powers 10 apart, t E-reduced.
pub fn pingpong_exactness(seed: u64) -> CriterionResult {
    let mut rows = Vec::new();
    let mut passed = true;
    for (label, space, stream) in [("F2", f2(), 3), ("Z5*Z7", z5z7(), 4)] {
        let pres = space.presentation();
        let x0 = space.origin();
        let mut r = rng(seed, stream);
        let params = Resolved::new(&space, &Mode::default(), 1);
        let mut made = 0;
        while made < 20 {
            let root = random_root(pres, &mut r);
            let size = r.gen_range(1..=4);
            let mut ks: Vec<i64> = Vec::new();
            while ks.len() < size {
                let k = 10 * r.gen_range(1..=5) * if r.gen_bool(0.5) { 1 } else { -1 };
                if !ks.contains(&k) {
                    ks.push(k);
                }
            }
            let v: ElementSet = ks.iter().map(|&k| pres.pow(&root, k)).collect();
            let t = pres.random_element(&mut r, 3);
            let Ok(red) = e_reduce(&space, &t, &root, &x0) else { continue };
            let t = red.t_prime;
            made += 1;
            let res = pingpong_certify(&space, &v, &root, &t, 3, &x0, &params, DEFAULT_BUDGET);
            let ok = matches!(&res, Ok(p) if p.certified && p.counts_exact && !p.truncated);
            passed &= ok;
            rows.push(json!({
                "space": label,
                "root": root.to_string(),
                "v": v,
                "t": t.to_string(),
                "certified": ok,
                "counts": res.as_ref().map(|p| json!(p.counts)).unwrap_or_else(|e| json!(e)),
            }));
        }
    }
    let ok = rows.iter().filter(|r| r["certified"] == true).count();
    CriterionResult {
        id: 3,
        title: "ping-pong exactness",
        passed,
        summary: format!("{ok}/{} instances certified with |(Vt)^n| = |V|^n for n <= 3", rows.len()),
        metrics: json!(rows),
    }
}

fn random_letter_word(pres: &Presentation, r: &mut ChaCha8Rng, max_len: usize, ok: impl Fn(&GroupElement) -> bool) -> GroupElement {
    loop {
        let g = pres.random_element(r, max_len);
        if ok(&g) {
            return g;
        }
    }
}

/// Equation pairs `c p^{k_i} · p^m q · q⁻¹p^{M−k_i−m}d` in F₂.
pub fn reduced_products(seed: u64) -> CriterionResult {
    let space = f2();
    let pres = space.presentation();
    let x0 = space.origin();
    let mut r = rng(seed, 5);
    let mut failures = Vec::new();
    let mut count = 0;
    while count < 200 {
        let p = random_root(pres, &mut r);
        let letters = p.letters();
        let (first, last) = (letters[0], letters[letters.len() - 1]);
        let c = random_letter_word(pres, &mut r, 4, |c| c.letters().last().is_none_or(|&l| l != (first.0, -first.1)));
        let d = random_letter_word(pres, &mut r, 4, |d| d.letters().first().is_none_or(|&l| l != (last.0, -last.1)));
        let qlen = r.gen_range(0..letters.len());
        let q = pres.from_syllables(letters[..qlen].iter().map(|&(g, e)| (g, e as i64)));
        let k1 = r.gen_range(0..4i64);
        let k2 = k1 + r.gen_range(1..4i64);
        let m = (k2 - k1) + r.gen_range(0..3i64);
        let big_m = k2 + m + 1 + r.gen_range(0..3i64);
        let v = pres.mul(&pres.pow(&p, m), &q);
        let g = pres.product([&c, &pres.pow(&p, big_m), &d]);
        let u1 = pres.mul(&c, &pres.pow(&p, k1));
        let u2 = pres.mul(&c, &pres.pow(&p, k2));
        let w = |u: &GroupElement| pres.product([&pres.inverse(&v), &pres.inverse(u), &g]);
        let (w1, w2) = (w(&u1), w(&u2));
        count += 1;
        let res = reduced_products_check(&space, (&u1, &w1), (&u2, &w2), &v, &x0);
        let zero = |rep: &crate::periodicity::ReducedProductsReport| {
            rep.holds && rep.checks.iter().filter(|c| c.name.starts_with('(')).all(|c| c.lhs == "0")
        };
        if !matches!(&res, Ok(rep) if zero(rep)) {
            failures.push(json!({"u1": u1.to_string(), "u2": u2.to_string(), "v": v.to_string(), "result": format!("{res:?}")}));
        }
    }
    CriterionResult {
        id: 4,
        title: "reduced products bounds",
        passed: failures.is_empty(),
        summary: format!("{count} equation pairs, {} failures", failures.len()),
        metrics: json!({"pairs": count, "failures": failures}),
    }
}

/// Connected graph: random spanning tree plus extra edges, identity action.
pub fn random_graph(r: &mut ChaCha8Rng, n: usize, extra: usize) -> GraphSpec {
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push([r.gen_range(0..i), i]);
    }
    for _ in 0..extra {
        let (a, b) = (r.gen_range(0..n), r.gen_range(0..n));
        if a != b {
            edges.push([a.min(b), a.max(b)]);
        }
    }
    edges.sort();
    edges.dedup();
    GraphSpec {
        vertices: n,
        edges,
        generators: vec![(0..n).collect()],
    }
}

pub fn tree_approximation(seed: u64) -> CriterionResult {
    let mut r = rng(seed, 6);
    let specs: Vec<(GraphSpec, Vec<u32>)> = (0..100)
        .map(|_| {
            let n = r.gen_range(2..=40);
            let extra = r.gen_range(0..=n);
            let g = random_graph(&mut r, n, extra);
            let k = r.gen_range(1..=n.min(12));
            let targets = (0..k).map(|_| r.gen_range(0..n) as u32).collect();
            (g, targets)
        })
        .collect();
    let rows: Vec<Value> = specs
        .par_iter()
        .map(|(g, targets)| {
            let space = ActionSpace::graph(g, Some(Length::from_integer(1)), None, 1).expect("connected graph");
            let pts: Vec<Point> = targets.iter().map(|&v| Point::Vertex(v)).collect();
            let t = approximate_tree(&space, &Point::Vertex(0), &pts);
            let d = t.distortion_report(&space);
            json!({
                "vertices": g.vertices,
                "delta": space.delta().to_string(),
                "leaves": d.n_leaves,
                "max_shrink": d.max_shrink.to_string(),
                "max_expansion": d.max_expansion.to_string(),
                "ok": d.ok,
            })
        })
        .collect();
    let bad = rows.iter().filter(|r| r["ok"] != true).count();
    CriterionResult {
        id: 5,
        title: "tree approximation distortion",
        passed: bad == 0,
        summary: format!("{} graphs, {bad} failures", rows.len()),
        metrics: json!(rows),
    }
}

pub fn reduction_certification(seed: u64) -> CriterionResult {
    let space = f2();
    let pres = space.presentation();
    let mut r = rng(seed, 7);
    let mut sets = Vec::new();
    let mut rejected = 0;
    while sets.len() < 50 {
        let size = r.gen_range(200..=2000);
        let pool = random_set(pres, &mut r, size * 2, 12).unwrap();
        let u: ElementSet = pool.iter().filter(|g| g.letter_len() >= 8).take(size).cloned().collect();
        if u.len() < size {
            rejected += 1;
            continue;
        }
        sets.push(u);
    }
    let rows: Vec<Value> = sets
        .par_iter()
        .map(|u| {
            let prof = minimize_energy(&space, u).expect("nonempty");
            let params = Resolved::new(&space, &Mode::default(), u.len());
            let class = classify(&space, u, &prof, &params);
            let res = reduce_tree(&space, u, &prof.base_point, params.reduction_r);
            let cert = certify(&space, &res.u1, &res.u2, &prof.base_point, params.reduction_r);
            let big_enough = 100 * res.u1.len() >= u.len() && 100 * res.u2.len() >= u.len();
            json!({
                "size": u.len(),
                "case": crate::ser::tag(&class.case),
                "diffuse": class.case == Case::Diffuse,
                "u1": res.u1.len(),
                "u2": res.u2.len(),
                "products_checked": cert.products_checked,
                "ok": !res.is_failed() && res.certified && cert.holds && big_enough,
            })
        })
        .collect();
    let bad = rows.iter().filter(|r| r["ok"] != true || r["diffuse"] != true).count();
    CriterionResult {
        id: 6,
        title: "reduction certification",
        passed: bad == 0,
        summary: format!("{} diffuse sets, {bad} failures", rows.len()),
        metrics: json!({"sets": rows, "regenerated": rejected}),
    }
}

/// All reduced words of length at most `n` in F₂.
fn all_words(pres: &Presentation, n: usize) -> Vec<GroupElement> {
    let gens: Vec<GroupElement> = ["a", "A", "b", "B"].iter().map(|w| pres.parse(w).unwrap()).collect();
    let mut out = vec![GroupElement::identity()];
    let mut frontier = out.clone();
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &frontier {
            for g in &gens {
                let x = pres.mul(w, g);
                if x.letter_len() == w.letter_len() + 1 {
                    next.push(x);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub fn geometry(seed: u64) -> CriterionResult {
    let s = f2();
    let pres = s.presentation();
    let mut r = rng(seed, 8);
    let mut fails: Vec<String> = Vec::new();

    // Translation-length oracle: length of the cyclic reduction.
    let words = all_words(pres, 6);
    let oracle_bad: Vec<String> = words
        .par_iter()
        .filter(|g| {
            let (c, _) = pres.cyclic_reduce(g);
            translation_length(&s, g).translation_length != Length::from_integer(c.letter_len() as i64)
        })
        .map(|g| g.to_string())
        .collect();
    fails.extend(oracle_bad.iter().map(|g| format!("oracle {g}")));

    let mut n_metric = 0;
    for _ in 0..300 {
        let pts: Vec<Point> = (0..4).map(|_| Point::Word(pres.random_element(&mut r, 8))).collect();
        let d = |i: usize, j: usize| s.steps(&pts[i], &pts[j]);
        n_metric += 1;
        if d(0, 0) != 0 || d(0, 1) != d(1, 0) || d(0, 2) > d(0, 1) + d(1, 2) || (pts[0] != pts[1] && d(0, 1) == 0) {
            fails.push(format!("metric axioms at {:?}", pts));
        }
        // Four-point condition with δ = 0 on 2×Gromov products.
        let w = &pts[3];
        let a = gp2(&s, &pts[0], &pts[1], w);
        let b = gp2(&s, &pts[1], &pts[2], w);
        let c = gp2(&s, &pts[0], &pts[2], w);
        if c < a.min(b) {
            fails.push(format!("four-point at {:?}", pts));
        }
        let g = pres.random_element(&mut r, 6);
        let h = pres.random_element(&mut r, 6);
        let tg = translation_length(&s, &g).translation_length;
        if translation_length(&s, &pres.conjugate(&h, &g)).translation_length != tg {
            fails.push(format!("conjugation invariance for {g}, {h}"));
        }
        for n in 1..=5 {
            if translation_length(&s, &pres.pow(&g, n)).translation_length != tg * Length::from_integer(n) {
                fails.push(format!("[g^{n}] for {g}"));
            }
        }
    }
    CriterionResult {
        id: 7,
        title: "geometry properties",
        passed: fails.is_empty(),
        summary: format!(
            "{} words in the oracle check, {n_metric} random quadruples, {} failures",
            words.len(),
            fails.len()
        ),
        metrics: json!({"oracle_words": words.len(), "samples": n_metric, "failures": fails}),
    }
}

pub fn energy(seed: u64) -> CriterionResult {
    let s = f2();
    let pres = s.presentation();
    let mut r = rng(seed, 9);
    let mut cases = Vec::new();
    for _ in 0..50 {
        let count = r.gen_range(3..=30);
        let u = random_set(pres, &mut r, count, 6).unwrap();
        let probes: Vec<Point> = (0..100).map(|_| Point::Word(pres.random_element(&mut r, 8))).collect();
        cases.push((u, probes));
    }
    let bad_probe: usize = cases
        .par_iter()
        .map(|(u, probes)| {
            let e = minimize_energy(&s, u).expect("nonempty").energy;
            probes.iter().filter(|p| energy_at(&s, u, p) < e).count()
        })
        .sum();
    let fp = z5z7();
    let fpres = fp.presentation();
    let mut elliptic_bad = 0;
    for _ in 0..20 {
        let h = fpres.random_element(&mut r, 5);
        let factor = r.gen_range(0..2u8);
        let order = if factor == 0 { 5 } else { 7 };
        let u: ElementSet = (1..order).map(|k| fpres.conjugate(&h, &fpres.from_syllables([(factor, k)]))).collect();
        let p = minimize_energy(&fp, &u).expect("nonempty");
        if p.energy != Length::from_integer(0) || p.displacement != Length::from_integer(0) {
            elliptic_bad += 1;
        }
    }
    CriterionResult {
        id: 8,
        title: "energy minimisation",
        passed: bad_probe == 0 && elliptic_bad == 0,
        summary: format!("50 sets x 100 probes: {bad_probe} probes below the minimum; 20 elliptic sets: {elliptic_bad} with nonzero energy"),
        metrics: json!({"probes_below": bad_probe, "elliptic_nonzero": elliptic_bad}),
    }
}
