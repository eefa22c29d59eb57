use hypgrowth::hypgeom::{chain_certificate, dist_to_geodesic, gromov_product, translation_length};
use hypgrowth::spaces::{ActionSpace, GraphSpec, Length, Point};
use hypgrowth::treeapprox::approximate_tree;
use hypgrowth::{GroupElement, Presentation};
use proptest::prelude::*;

fn one() -> Length {
    Length::from_integer(1)
}

fn f2() -> ActionSpace {
    ActionSpace::free_group_tree(2, one()).unwrap()
}

fn z3_z4() -> ActionSpace {
    ActionSpace::free_product_tree([Some(3), Some(4)], one()).unwrap()
}

/// Circulant graph on Z/n with steps ±1, ±2; generators are the rotation and
/// the reflection.
fn circulant(n: usize) -> ActionSpace {
    let mut edges = Vec::new();
    for i in 0..n {
        edges.push([i, (i + 1) % n]);
        edges.push([i, (i + 2) % n]);
    }
    let spec = GraphSpec {
        vertices: n,
        edges,
        generators: vec![(0..n).map(|i| (i + 1) % n).collect(), (0..n).map(|i| (n - i) % n).collect()],
    };
    ActionSpace::graph(&spec, None, None, 1).unwrap()
}

fn raw_word(max: usize) -> impl Strategy<Value = Vec<(u8, i64)>> {
    prop::collection::vec((0u8..2, -3i64..=3), 0..max)
}

fn elem(p: &Presentation, raw: &[(u8, i64)]) -> GroupElement {
    p.from_syllables(raw.iter().copied())
}

/// Points reachable as `g · origin`.
fn pt(s: &ActionSpace, raw: &[(u8, i64)]) -> Point {
    s.act(&elem(s.presentation(), raw), &s.origin())
}

fn spaces() -> Vec<ActionSpace> {
    vec![f2(), z3_z4(), circulant(11)]
}

fn ball(p: &Presentation, r: usize) -> Vec<GroupElement> {
    let gens: Vec<GroupElement> = (0..2)
        .flat_map(|g| {
            let x = p.generator(g).unwrap();
            [p.inverse(&x), x]
        })
        .collect();
    let mut all = vec![GroupElement::identity()];
    let mut frontier = all.clone();
    for _ in 0..r {
        let mut next = Vec::new();
        for w in &frontier {
            for g in &gens {
                let x = p.mul(w, g);
                if x.letter_len() > w.letter_len() {
                    next.push(x);
                }
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn metric_axioms(a in raw_word(6), b in raw_word(6), c in raw_word(6)) {
        for s in spaces() {
            let (x, y, z) = (pt(&s, &a), pt(&s, &b), pt(&s, &c));
            prop_assert_eq!(s.dist(&x, &y), s.dist(&y, &x));
            prop_assert!(s.dist(&x, &z) <= s.dist(&x, &y) + s.dist(&y, &z));
            prop_assert_eq!(s.dist(&x, &y) == Length::from_integer(0), x == y);
        }
    }

    #[test]
    fn action_is_an_isometric_homomorphism(g in raw_word(6), h in raw_word(6), a in raw_word(6), b in raw_word(6)) {
        for s in spaces() {
            let p = s.presentation();
            let (g, h) = (elem(p, &g), elem(p, &h));
            let (x, y) = (pt(&s, &a), pt(&s, &b));
            prop_assert_eq!(s.dist(&s.act(&g, &x), &s.act(&g, &y)), s.dist(&x, &y));
            prop_assert_eq!(s.act(&p.mul(&g, &h), &x), s.act(&g, &s.act(&h, &x)));
        }
    }

    #[test]
    fn trees_satisfy_four_point_with_zero_delta(a in raw_word(6), b in raw_word(6), c in raw_word(6), d in raw_word(6)) {
        for s in [f2(), z3_z4()] {
            let (x, y, z, w) = (pt(&s, &a), pt(&s, &b), pt(&s, &c), pt(&s, &d));
            let mut sums = [
                s.dist(&x, &y) + s.dist(&z, &w),
                s.dist(&x, &z) + s.dist(&y, &w),
                s.dist(&x, &w) + s.dist(&y, &z),
            ];
            sums.sort();
            prop_assert_eq!(sums[1], sums[2]);
        }
    }

    #[test]
    fn tree_geodesics_telescope(a in raw_word(6), b in raw_word(6)) {
        for s in [f2(), z3_z4()] {
            let (x, y) = (pt(&s, &a), pt(&s, &b));
            let path = s.geodesic(&x, &y);
            prop_assert_eq!(path.first(), Some(&x));
            prop_assert_eq!(path.last(), Some(&y));
            for i in 0..path.len() {
                for j in i..path.len() {
                    prop_assert_eq!(s.dist(&path[i], &path[j]), s.edge() * Length::from_integer((j - i) as i64));
                }
            }
        }
    }

    #[test]
    fn gromov_products(a in raw_word(6), b in raw_word(6), c in raw_word(6), g in raw_word(6)) {
        for s in spaces() {
            let g = elem(s.presentation(), &g);
            let (x, y, z) = (pt(&s, &a), pt(&s, &b), pt(&s, &c));
            let gp = gromov_product(&s, &x, &z, &y);
            prop_assert_eq!(gp, gromov_product(&s, &z, &x, &y));
            let moved = gromov_product(&s, &s.act(&g, &x), &s.act(&g, &z), &s.act(&g, &y));
            prop_assert_eq!(gp, moved);
            prop_assert!(gp <= dist_to_geodesic(&s, &y, &x, &z));
            let four = Length::from_integer(4) * s.delta();
            prop_assert!(dist_to_geodesic(&s, &z, &x, &y) <= gromov_product(&s, &x, &y, &z) + four);
        }
    }

    #[test]
    fn translation_length_is_a_conjugacy_invariant(g in raw_word(6), h in raw_word(6), n in 1i64..=5) {
        for s in spaces() {
            let p = s.presentation();
            let (g, h) = (elem(p, &g), elem(p, &h));
            let t = translation_length(&s, &g);
            prop_assert_eq!(translation_length(&s, &p.conjugate(&h, &g)).translation_length, t.translation_length);
            if s.is_tree() && t.is_hyperbolic {
                let tn = translation_length(&s, &p.pow(&g, n)).translation_length;
                prop_assert_eq!(tn, t.translation_length * Length::from_integer(n));
            }
        }
    }

    #[test]
    fn chain_hypothesis_implies_conclusions(raws in prop::collection::vec(raw_word(5), 3..7), alpha in 0i64..4, beta in 0i64..4) {
        for s in spaces() {
            let pts: Vec<Point> = raws.iter().map(|r| pt(&s, r)).collect();
            let c = chain_certificate(&s, &pts, Length::from_integer(alpha), Length::from_integer(beta)).unwrap();
            if c.hypothesis {
                prop_assert!(c.lower_bound_holds);
                prop_assert!(!c.hausdorff_checked || c.hausdorff_holds);
            }
        }
    }

    #[test]
    fn approximation_tree_postconditions(raws in prop::collection::vec(raw_word(6), 1..7)) {
        for s in spaces() {
            let x0 = s.origin();
            let targets: Vec<Point> = raws.iter().map(|r| pt(&s, r)).collect();
            let t = approximate_tree(&s, &x0, &targets);
            let rep = t.distortion_report(&s);
            // f never expands, and each leg is mapped isometrically.
            prop_assert_eq!(rep.max_expansion, Length::from_integer(0));
            prop_assert!(rep.leg_isometry);
            prop_assert!(rep.within_bound);
            for i in 1..t.legs.len() {
                let best = (0..i).map(|j| t.products2[i][j]).max().unwrap();
                prop_assert_eq!(t.legs[i].glued_to.map(|g| g.1), Some(best));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tree_translation_length_matches_ball_scan(g in raw_word(8)) {
        let s = f2();
        let p = s.presentation();
        let g = elem(p, &g);
        prop_assume!(g.letter_len() <= 8);
        let best = ball(p, 8)
            .into_iter()
            .map(|h| {
                let x = Point::Word(h);
                s.dist(&x, &s.act(&g, &x))
            })
            .min()
            .unwrap();
        prop_assert_eq!(translation_length(&s, &g).translation_length, best);
    }
}
