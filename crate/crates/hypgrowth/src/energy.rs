//! ℓ¹-energy, the base point x₀ and the concentrated/diffuse case split.

use rayon::prelude::*;
use serde::Serialize;

use crate::hypgeom::big;
use crate::mode::{d_log_arg, Resolved};
use crate::spaces::{ActionSpace, Length, Point};
use crate::words::{ElementSet, WordError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Concentrated,
    Diffuse,
    BelowThreshold,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnergyProfile {
    pub base_point: Point,
    #[serde(serialize_with = "crate::ser::display")]
    pub energy: Length,
    #[serde(serialize_with = "crate::ser::display")]
    pub displacement: Length,
    /// `"1"`, or `"log2(m)"` with m = 2|U|.
    pub d_factor: String,
    /// Descent steps taken (trees) or vertices scanned (graphs).
    pub search_steps: u64,
}

/// Σ_u |u x − x| in edge steps.
fn total_steps(space: &ActionSpace, u: &ElementSet, x: &Point) -> u64 {
    u.iter().map(|g| space.steps(&space.act(g, x), x)).sum()
}

/// `(1/|U|) Σ_u |x − u x|`.
pub fn energy_at(space: &ActionSpace, u: &ElementSet, x: &Point) -> Length {
    assert!(!u.is_empty(), "energy of an empty set");
    space.edge() * Length::new(total_steps(space, u, x) as i64, u.len() as i64)
}

/// Exact vertex minimiser of the energy. Trees: steepest descent from the
/// origin; the only neighbours that can lower the energy are first steps of
/// the geodesics `[x, u x]`. Graphs: exhaustive, ties to the smallest id.
pub fn minimize_energy(space: &ActionSpace, u: &ElementSet) -> Result<EnergyProfile, WordError> {
    if u.is_empty() {
        return Err(WordError::EmptySet);
    }
    let (x, steps, search_steps) = match space.vertices() {
        Some(vs) => {
            let scores: Vec<u64> = vs.par_iter().map(|v| total_steps(space, u, v)).collect();
            let best = (0..vs.len()).min_by_key(|&i| (scores[i], i)).unwrap();
            (vs[best].clone(), scores[best], vs.len() as u64)
        }
        None => descend(space, u),
    };
    let displacement = u
        .iter()
        .map(|g| space.steps(&space.act(g, &x), &x))
        .max()
        .unwrap();
    Ok(EnergyProfile {
        d_factor: match d_log_arg(space, u.len()) {
            None => "1".into(),
            Some(m) => format!("log2({m})"),
        },
        base_point: x,
        energy: space.edge() * Length::new(steps as i64, u.len() as i64),
        displacement: space.edge() * Length::from_integer(displacement as i64),
        search_steps,
    })
}

fn descend(space: &ActionSpace, u: &ElementSet) -> (Point, u64, u64) {
    let mut x = space.origin();
    let mut cur = total_steps(space, u, &x);
    let mut moves = 0;
    loop {
        let mut cands: Vec<Point> = u
            .iter()
            .map(|g| space.act(g, &x))
            .filter(|y| *y != x)
            .map(|y| space.point_along(&x, &y, 1))
            .collect();
        cands.sort();
        cands.dedup();
        let best = cands
            .into_par_iter()
            .map(|c| (total_steps(space, u, &c), c))
            .min_by(|a, b| a.cmp(b));
        match best {
            Some((s, c)) if s < cur => {
                x = c;
                cur = s;
                moves += 1;
            }
            _ => return (x, cur, moves),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub case: Case,
    /// Elements with `|u x₀ − x₀| ≤ T`.
    pub n_short: usize,
    pub n_total: usize,
    /// False if a log comparison fell back to floating point.
    pub exact: bool,
}

/// Concentrated if more than ¼ of U moves x₀ by at most T, Diffuse
/// otherwise; BelowThreshold when the displacement is under the floor.
pub fn classify(space: &ActionSpace, u: &ElementSet, profile: &EnergyProfile, params: &Resolved) -> Classification {
    let x = &profile.base_point;
    let below = params.below_floor.exceeds(&big(profile.displacement));
    let mut exact = below.exact;
    let mut n_short = 0;
    for g in u {
        let c = params.concentration_t.admits(&big(space.dist(&space.act(g, x), x)));
        exact &= c.exact;
        n_short += c.holds as usize;
    }
    let case = if below.holds {
        Case::BelowThreshold
    } else if 4 * n_short > u.len() {
        Case::Concentrated
    } else {
        Case::Diffuse
    };
    Classification {
        case,
        n_short,
        n_total: u.len(),
        exact,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode::{Mode, PracticalParams};
    use crate::words::GroupElement;

    fn f2() -> ActionSpace {
        ActionSpace::free_group_tree(2, Length::from_integer(1)).unwrap()
    }

    fn set(space: &ActionSpace, s: &[&str]) -> ElementSet {
        space.presentation().parse_set(s).unwrap()
    }

    fn word(space: &ActionSpace, s: &str) -> Point {
        Point::Word(space.presentation().parse(s).unwrap())
    }

    #[test]
    fn energy_at_examples() {
        let s = f2();
        assert_eq!(energy_at(&s, &set(&s, &["a", "A"]), &s.origin()), Length::from_integer(1));
        assert_eq!(energy_at(&s, &set(&s, &["1"]), &word(&s, "ab")), Length::from_integer(0));
        assert_eq!(
            energy_at(&s, &set(&s, &["abA", "abbA"]), &word(&s, "a")),
            Length::new(3, 2)
        );
    }

    #[test]
    fn minimiser_examples() {
        let s = f2();
        let p = minimize_energy(&s, &set(&s, &["abA", "abbA"])).unwrap();
        assert_eq!(p.base_point, word(&s, "a"));
        assert_eq!(p.energy, Length::new(3, 2));
        let p = minimize_energy(&s, &set(&s, &["a", "A"])).unwrap();
        assert_eq!(p.base_point, s.origin());
        assert_eq!(p.energy, Length::from_integer(1));
        assert_eq!(p.d_factor, "1");
    }

    #[test]
    fn elliptic_free_product_set_has_zero_energy() {
        let s = ActionSpace::free_product_tree([Some(5), Some(7)], Length::from_integer(1)).unwrap();
        let pres = s.presentation();
        let h = pres.parse("ab^2a^3").unwrap();
        let u: ElementSet = (1..5)
            .map(|k| pres.conjugate(&h, &pres.from_syllables([(0, k)])))
            .collect();
        let p = minimize_energy(&s, &u).unwrap();
        assert_eq!(p.energy, Length::from_integer(0));
        assert_eq!(p.displacement, Length::from_integer(0));
    }

    #[test]
    fn classification_examples() {
        let s = f2();
        let practical = Resolved::new(&s, &Mode::default(), 1);
        let id = set(&s, &["1"]);
        let p = minimize_energy(&s, &id).unwrap();
        assert_eq!(classify(&s, &id, &p, &practical).case, Case::BelowThreshold);

        let (safin, _) = s.presentation().safin_family(3).unwrap();
        let p = minimize_energy(&s, &safin).unwrap();
        let t = Mode::Practical(PracticalParams {
            concentration_t: Some(Length::new(1, 2)),
            ..Default::default()
        });
        let r = Resolved::new(&s, &t, safin.len());
        assert_eq!(classify(&s, &safin, &p, &r).case, Case::Diffuse);

        // Paper mode on trees: 10¹⁴κ₀ dwarfs anything enumerable.
        let r = Resolved::new(&s, &Mode::Paper, safin.len());
        assert_eq!(classify(&s, &safin, &p, &r).case, Case::BelowThreshold);
    }

    #[test]
    fn factor_conjugates_plus_hyperbolic_is_concentrated() {
        let s = ActionSpace::free_product_tree([Some(5), Some(7)], Length::from_integer(1)).unwrap();
        let pres = s.presentation();
        let mut u: Vec<GroupElement> = (1..5).map(|k| pres.from_syllables([(0, k)])).collect();
        u.push(pres.parse("ab").unwrap());
        let u = ElementSet::new(u);
        let p = minimize_energy(&s, &u).unwrap();
        let mode = Mode::Practical(PracticalParams {
            concentration_t: Some(Length::from_integer(1)),
            ..Default::default()
        });
        let r = Resolved::new(&s, &mode, u.len());
        assert_eq!(classify(&s, &u, &p, &r).case, Case::Concentrated);
    }
}
