use hypgrowth::energy::{classify, energy_at, minimize_energy, Case};
use hypgrowth::mode::{default_reduction_r, Mode, Resolved};
use hypgrowth::reduction::{certify, max_self_class, reduce_tree};
use hypgrowth::spaces::{ActionSpace, Length};
use hypgrowth::{ElementSet, GroupElement, Presentation};
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

fn raw_word(max: usize) -> impl Strategy<Value = Vec<(u8, i64)>> {
    prop::collection::vec((0u8..2, -3i64..=3), 0..max)
}

fn raw_set(max_len: usize, max_size: usize) -> impl Strategy<Value = Vec<Vec<(u8, i64)>>> {
    prop::collection::vec(raw_word(max_len), 1..max_size)
}

fn elem(p: &Presentation, raw: &[(u8, i64)]) -> GroupElement {
    p.from_syllables(raw.iter().copied())
}

fn set(p: &Presentation, raws: &[Vec<(u8, i64)>]) -> ElementSet {
    ElementSet::new(raws.iter().map(|r| elem(p, r)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn minimum_beats_every_probe(raws in raw_set(6, 10), probes in prop::collection::vec(raw_word(8), 1..20)) {
        for s in [f2(), z3_z4()] {
            let p = s.presentation();
            let u = set(p, &raws);
            let best = minimize_energy(&s, &u).unwrap();
            prop_assert_eq!(energy_at(&s, &u, &best.base_point), best.energy);
            for q in &probes {
                let x = s.act(&elem(p, q), &s.origin());
                prop_assert!(best.energy <= energy_at(&s, &u, &x));
            }
        }
    }

    #[test]
    fn elliptic_sets_have_zero_energy(h in raw_word(6), ks in prop::collection::vec((0i64..3, 0i64..4), 1..6), factor in 0u8..2) {
        let s = z3_z4();
        let p = s.presentation();
        let h = elem(p, &h);
        let u = ElementSet::new(
            ks.iter()
                .map(|&(i, j)| p.conjugate(&h, &p.from_syllables([(factor, if factor == 0 { i } else { j })])))
                .collect(),
        );
        let best = minimize_energy(&s, &u).unwrap();
        prop_assert_eq!(best.energy, Length::from_integer(0));
        prop_assert_eq!(best.displacement, Length::from_integer(0));
    }

    #[test]
    fn energy_is_conjugation_invariant(raws in raw_set(6, 8), g in raw_word(6), x in raw_word(6)) {
        for s in [f2(), z3_z4()] {
            let p = s.presentation();
            let u = set(p, &raws);
            let g = elem(p, &g);
            let x = s.act(&elem(p, &x), &s.origin());
            let ug = ElementSet::new(u.iter().map(|v| p.conjugate(&g, v)).collect());
            prop_assert_eq!(energy_at(&s, &ug, &s.act(&g, &x)), energy_at(&s, &u, &x));
        }
    }

    #[test]
    fn classification_is_a_partition(raws in raw_set(8, 12), t in 0i64..6) {
        let s = f2();
        let u = set(s.presentation(), &raws);
        let mode = Mode::Practical(hypgrowth::mode::PracticalParams {
            concentration_t: Some(Length::from_integer(t)),
            ..Default::default()
        });
        let params = Resolved::new(&s, &mode, u.len());
        let prof = minimize_energy(&s, &u).unwrap();
        let c = classify(&s, &u, &prof, &params);
        let below = prof.displacement < one();
        let expect = if below {
            Case::BelowThreshold
        } else if 4 * c.n_short > c.n_total {
            Case::Concentrated
        } else {
            Case::Diffuse
        };
        prop_assert_eq!(c.case, expect);
        prop_assert_eq!(c.n_total, u.len());
    }

    #[test]
    fn tree_reductions_are_certified_and_deterministic(raws in raw_set(10, 40)) {
        let s = f2();
        let u = set(s.presentation(), &raws);
        let prof = minimize_energy(&s, &u).unwrap();
        let r = default_reduction_r(one(), one());
        let red = reduce_tree(&s, &u, &prof.base_point, r);
        prop_assert_eq!(&red, &reduce_tree(&s, &u, &prof.base_point, r));
        if red.certified {
            let c = certify(&s, &red.u1, &red.u2, &prof.base_point, red.tolerance);
            prop_assert!(c.holds);
            prop_assert!(100 * red.u1.len() >= u.len());
            prop_assert!(100 * red.u2.len() >= u.len());
        }
    }

    #[test]
    fn energy_minimiser_has_no_dominant_class(raws in raw_set(12, 40), r in 1i64..3) {
        let s = f2();
        let u = set(s.presentation(), &raws);
        let prof = minimize_energy(&s, &u).unwrap();
        let (_, c) = max_self_class(&s, &u, &prof.base_point, Length::from_integer(r));
        prop_assert!(3 * c <= 2 * u.len());
    }
}
