//! Metric spaces with a group action: the Cayley tree of a free group, the
//! Bass–Serre tree of a free product of two cyclic groups, and finite graphs
//! on which a free group acts through vertex permutations.
//!
//! Distances are stored as integer step counts; a length is `steps * edge`.

use std::collections::VecDeque;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::words::{GroupElement, Presentation, WordError};

/// Exact lengths. Every distance is an integer multiple of the edge length.
pub type Length = Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("point {0} does not belong to this space")]
    InvalidPoint(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("length {0} is not a multiple of the edge length")]
    NotRepresentable(Length),
    #[error("sphere queries on infinite trees need a scope of points")]
    NeedsScope,
    #[error("invalid constants: {0}")]
    InvalidConstants(String),
}

/// A vertex of one of the backends. The derived order is the canonical
/// encoding order used for every tie-break.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    /// Vertex of the free group Cayley tree.
    Word(GroupElement),
    /// Coset `w·A_t` of the Bass–Serre tree; `w` never ends in factor `t`.
    Coset(GroupElement, u8),
    /// Vertex id of a finite graph.
    Vertex(u32),
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Point::Word(w) => write!(f, "{w}"),
            Point::Coset(w, t) => write!(f, "{w}.{}", (b'A' + t) as char),
            Point::Vertex(v) => write!(f, "v{v}"),
        }
    }
}

/// Adjacency list plus one vertex permutation per free generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub generators: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct FiniteGraph {
    adj: Vec<Vec<u32>>,
    dist: Vec<u16>,
    perms: Vec<Vec<u32>>,
    inv_perms: Vec<Vec<u32>>,
    n: usize,
}

impl FiniteGraph {
    pub fn new(spec: &GraphSpec) -> Result<Self, SpaceError> {
        let n = spec.vertices;
        if n == 0 || n > u16::MAX as usize {
            return Err(SpaceError::InvalidGraph(format!("vertex count {n}")));
        }
        let mut adj = vec![Vec::new(); n];
        for &[i, j] in &spec.edges {
            if i >= n || j >= n || i == j {
                return Err(SpaceError::InvalidGraph(format!("bad edge [{i}, {j}]")));
            }
            adj[i].push(j as u32);
            adj[j].push(i as u32);
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        let mut dist = vec![u16::MAX; n * n];
        for s in 0..n {
            let row = &mut dist[s * n..(s + 1) * n];
            row[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(x) = q.pop_front() {
                for &y in &adj[x] {
                    let y = y as usize;
                    if row[y] == u16::MAX {
                        row[y] = row[x] + 1;
                        q.push_back(y);
                    }
                }
            }
            if row.contains(&u16::MAX) {
                return Err(SpaceError::Disconnected);
            }
        }
        let mut perms = Vec::new();
        let mut inv_perms = Vec::new();
        for (k, p) in spec.generators.iter().enumerate() {
            if p.len() != n {
                return Err(SpaceError::InvalidGraph(format!(
                    "generator {k} has length {} instead of {n}",
                    p.len()
                )));
            }
            let mut inv = vec![u32::MAX; n];
            for (i, &pi) in p.iter().enumerate() {
                if pi >= n || inv[pi] != u32::MAX {
                    return Err(SpaceError::InvalidGraph(format!(
                        "generator {k} is not a permutation"
                    )));
                }
                inv[pi] = i as u32;
            }
            for (i, nbrs) in adj.iter().enumerate() {
                for &j in nbrs {
                    if !adj[p[i]].contains(&(p[j as usize] as u32)) {
                        return Err(SpaceError::InvalidGraph(format!(
                            "generator {k} does not preserve edge [{i}, {j}]"
                        )));
                    }
                }
            }
            perms.push(p.iter().map(|&x| x as u32).collect());
            inv_perms.push(inv);
        }
        Ok(Self {
            adj,
            dist,
            perms,
            inv_perms,
            n,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn rank(&self) -> usize {
        self.perms.len()
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn d(&self, x: u32, y: u32) -> u64 {
        self.dist[x as usize * self.n + y as usize] as u64
    }

    /// Vertex image under a word, acting on the left.
    pub fn apply(&self, g: &GroupElement, v: u32) -> u32 {
        let mut x = v;
        for &(gen, e) in g.syllables().iter().rev() {
            let table = if e > 0 {
                &self.perms[gen as usize]
            } else {
                &self.inv_perms[gen as usize]
            };
            for _ in 0..e.unsigned_abs() {
                x = table[x as usize];
            }
        }
        x
    }

    /// Lexicographically smallest shortest path.
    pub fn path(&self, x: u32, y: u32) -> Vec<u32> {
        let mut out = vec![x];
        let mut cur = x;
        while cur != y {
            let want = self.d(cur, y) - 1;
            cur = *self.adj[cur as usize]
                .iter()
                .find(|&&z| self.d(z, y) == want)
                .expect("connected graph");
            out.push(cur);
        }
        out
    }

    /// Exhaustive four-point constant in half-steps: the maximum over all
    /// quadruples of (largest pair sum − middle pair sum). Halving gives δ
    /// in the Gromov product form.
    pub fn delta_twice(&self) -> u64 {
        let n = self.n;
        let mut best = 0u64;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for e in c + 1..n {
                        let (a, b, c, e) = (a as u32, b as u32, c as u32, e as u32);
                        let mut s = [
                            self.d(a, b) + self.d(c, e),
                            self.d(a, c) + self.d(b, e),
                            self.d(a, e) + self.d(b, c),
                        ];
                        s.sort_unstable();
                        best = best.max(s[2] - s[1]);
                    }
                }
            }
        }
        best
    }
}

#[derive(Clone, Debug)]
pub enum Backend {
    FreeGroupTree,
    FreeProductTree,
    Graph(Box<FiniteGraph>),
}

/// Acylindricity and hyperbolicity constants of an action.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpaceConstants {
    #[serde(serialize_with = "crate::ser::display")]
    pub delta: Length,
    #[serde(serialize_with = "crate::ser::display")]
    pub rho0: Length,
    #[serde(serialize_with = "crate::ser::display")]
    pub kappa0: Length,
    pub n0: u64,
}

#[derive(Clone, Debug)]
pub struct ActionSpace {
    pres: Presentation,
    backend: Backend,
    edge: Length,
    consts: SpaceConstants,
}

impl ActionSpace {
    /// Cayley tree of a free group, edge length `rho0`; κ₀ = ρ₀, N₀ = 1.
    pub fn free_group_tree(rank: usize, rho0: Length) -> Result<Self, SpaceError> {
        check_positive(rho0, "rho0")?;
        Ok(Self {
            pres: Presentation::free_group(rank)?,
            backend: Backend::FreeGroupTree,
            edge: rho0,
            consts: SpaceConstants {
                delta: Length::from_integer(0),
                rho0,
                kappa0: rho0,
                n0: 1,
            },
        })
    }

    /// Bass–Serre tree of `A * B` with trivial edge group.
    pub fn free_product_tree(orders: [Option<u32>; 2], rho0: Length) -> Result<Self, SpaceError> {
        check_positive(rho0, "rho0")?;
        Ok(Self {
            pres: Presentation::free_product(orders.to_vec())?,
            backend: Backend::FreeProductTree,
            edge: rho0,
            consts: SpaceConstants {
                delta: Length::from_integer(0),
                rho0,
                kappa0: rho0,
                n0: 1,
            },
        })
    }

    /// A finite graph with unit edges and the free group on the given
    /// permutations acting on it. δ is computed exhaustively. `rho0` defaults
    /// to δ/N₀ and must be supplied when δ = 0; κ₀ is raised to at least δ.
    pub fn graph(
        spec: &GraphSpec,
        rho0: Option<Length>,
        kappa0: Option<Length>,
        n0: u64,
    ) -> Result<Self, SpaceError> {
        let g = FiniteGraph::new(spec)?;
        if g.rank() == 0 {
            return Err(SpaceError::InvalidGraph("no generators".into()));
        }
        if n0 == 0 {
            return Err(SpaceError::InvalidConstants("N0 must be positive".into()));
        }
        let delta = Length::new(g.delta_twice() as i64, 2);
        let rho0 = match rho0 {
            Some(r) => r,
            None if delta > Length::from_integer(0) => delta / Length::from_integer(n0 as i64),
            None => {
                return Err(SpaceError::InvalidConstants(
                    "delta is 0, rho0 must be given explicitly".into(),
                ))
            }
        };
        check_positive(rho0, "rho0")?;
        let kappa0 = kappa0.unwrap_or(rho0).max(delta).max(rho0);
        Ok(Self {
            pres: Presentation::free_group(g.rank())?,
            backend: Backend::Graph(Box::new(g)),
            edge: Length::from_integer(1),
            consts: SpaceConstants {
                delta,
                rho0,
                kappa0,
                n0,
            },
        })
    }

    /// Replaces κ₀ and N₀, e.g. for experiments with weaker acylindricity.
    pub fn with_constants(mut self, kappa0: Length, n0: u64) -> Result<Self, SpaceError> {
        if kappa0 < self.consts.delta || kappa0 <= Length::from_integer(0) || n0 == 0 {
            return Err(SpaceError::InvalidConstants(format!(
                "kappa0 = {kappa0}, N0 = {n0}"
            )));
        }
        self.consts.kappa0 = kappa0;
        self.consts.n0 = n0;
        Ok(self)
    }

    pub fn presentation(&self) -> &Presentation {
        &self.pres
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn constants(&self) -> &SpaceConstants {
        &self.consts
    }

    pub fn delta(&self) -> Length {
        self.consts.delta
    }

    pub fn edge(&self) -> Length {
        self.edge
    }

    pub fn is_tree(&self) -> bool {
        !matches!(self.backend, Backend::Graph(_))
    }

    pub fn graph_data(&self) -> Option<&FiniteGraph> {
        match &self.backend {
            Backend::Graph(g) => Some(g),
            _ => None,
        }
    }

    pub fn backend_name(&self) -> &'static str {
        match self.backend {
            Backend::FreeGroupTree => "free_group_tree",
            Backend::FreeProductTree => "free_product_tree",
            Backend::Graph(_) => "graph",
        }
    }

    /// The default base point: the identity vertex, the coset of the first
    /// factor, or vertex 0.
    pub fn origin(&self) -> Point {
        match self.backend {
            Backend::FreeGroupTree => Point::Word(GroupElement::identity()),
            Backend::FreeProductTree => Point::Coset(GroupElement::identity(), 0),
            Backend::Graph(_) => Point::Vertex(0),
        }
    }

    pub fn check_point(&self, x: &Point) -> Result<(), SpaceError> {
        let ok = match (&self.backend, x) {
            (Backend::FreeGroupTree, Point::Word(w)) => self.pres.check(w).is_ok(),
            (Backend::FreeProductTree, Point::Coset(w, t)) => {
                (*t as usize) < 2
                    && self.pres.check(w).is_ok()
                    && w.syllables().last().is_none_or(|s| s.0 != *t)
            }
            (Backend::Graph(g), Point::Vertex(v)) => (*v as usize) < g.len(),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(SpaceError::InvalidPoint(x.to_string()))
        }
    }

    fn coset(&self, w: GroupElement, t: u8) -> Point {
        match w.syllables().last() {
            Some(&(g, _)) if g == t => {
                let s = &w.syllables()[..w.syllable_len() - 1];
                Point::Coset(self.pres.from_syllables(s.iter().map(|&(g, e)| (g, e as i64))), t)
            }
            _ => Point::Coset(w, t),
        }
    }

    /// `g · x`.
    pub fn act(&self, g: &GroupElement, x: &Point) -> Point {
        match (&self.backend, x) {
            (Backend::FreeGroupTree, Point::Word(w)) => Point::Word(self.pres.mul(g, w)),
            (Backend::FreeProductTree, Point::Coset(w, t)) => self.coset(self.pres.mul(g, w), *t),
            (Backend::Graph(gr), Point::Vertex(v)) => Point::Vertex(gr.apply(g, *v)),
            _ => panic!("point {x} does not belong to backend {}", self.backend_name()),
        }
    }

    pub fn act_checked(&self, g: &GroupElement, x: &Point) -> Result<Point, SpaceError> {
        self.pres.check(g)?;
        self.check_point(x)?;
        Ok(self.act(g, x))
    }

    /// Splits `g = a · h · b` for the path from coset `A_s` to `g·A_t`:
    /// `a` is a leading syllable in factor `s`, `b` a trailing one in `t`.
    fn coset_middle<'a>(
        &self,
        g: &'a GroupElement,
        s: u8,
        t: u8,
    ) -> (usize, &'a [crate::words::Syllable]) {
        let syl = g.syllables();
        let mut lo = 0;
        let mut hi = syl.len();
        if hi > lo && syl[hi - 1].0 == t {
            hi -= 1;
        }
        if hi > lo && syl[lo].0 == s {
            lo += 1;
        }
        (lo, &syl[lo..hi])
    }

    /// Distance in edges.
    pub fn steps(&self, x: &Point, y: &Point) -> u64 {
        match (&self.backend, x, y) {
            (Backend::FreeGroupTree, Point::Word(u), Point::Word(v)) => {
                let u = u.syllables();
                let v = v.syllables();
                // Common prefix of two reduced words, then both tails.
                let mut i = 0;
                while i < u.len() && i < v.len() && u[i] == v[i] {
                    i += 1;
                }
                let tail = |w: &[(u8, i32)], other: Option<&(u8, i32)>| -> u64 {
                    let mut total: u64 = w.iter().map(|s| s.1.unsigned_abs() as u64).sum();
                    if let (Some(a), Some(b)) = (w.first(), other) {
                        if a.0 == b.0 && a.1.signum() == b.1.signum() {
                            total -= a.1.unsigned_abs().min(b.1.unsigned_abs()) as u64;
                        }
                    }
                    total
                };
                tail(&u[i..], v.get(i)) + tail(&v[i..], u.get(i))
            }
            (Backend::FreeProductTree, Point::Coset(u, s), Point::Coset(v, t)) => {
                let g = self.pres.mul(&self.pres.inverse(u), v);
                let (_, mid) = self.coset_middle(&g, *s, *t);
                if mid.is_empty() {
                    if s == t {
                        0
                    } else {
                        1
                    }
                } else {
                    mid.len() as u64 + 1
                }
            }
            (Backend::Graph(g), Point::Vertex(a), Point::Vertex(b)) => g.d(*a, *b),
            _ => panic!("points {x}, {y} do not belong to backend {}", self.backend_name()),
        }
    }

    pub fn dist(&self, x: &Point, y: &Point) -> Length {
        self.edge * Length::from_integer(self.steps(x, y) as i64)
    }

    pub fn dist_checked(&self, x: &Point, y: &Point) -> Result<Length, SpaceError> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.dist(x, y))
    }

    /// Vertices of the geodesic from `x` to `y`, both included. Unique on
    /// trees, lexicographically smallest on graphs.
    pub fn geodesic(&self, x: &Point, y: &Point) -> Vec<Point> {
        match (&self.backend, x, y) {
            (Backend::FreeGroupTree, Point::Word(u), Point::Word(_)) => {
                let p = &self.pres;
                let g = match y {
                    Point::Word(v) => p.mul(&p.inverse(u), v),
                    _ => unreachable!(),
                };
                let mut out = Vec::with_capacity(g.letter_len() as usize + 1);
                let mut cur = u.clone();
                out.push(Point::Word(cur.clone()));
                for (gen, e) in g.letters() {
                    cur = p.mul(&cur, &p.from_syllables([(gen, e as i64)]));
                    out.push(Point::Word(cur.clone()));
                }
                out
            }
            (Backend::FreeProductTree, Point::Coset(u, s), Point::Coset(v, t)) => {
                let p = &self.pres;
                let g = p.mul(&p.inverse(u), v);
                let (lo, mid) = self.coset_middle(&g, *s, *t);
                let lead = p.from_syllables(
                    g.syllables()[..lo].iter().map(|&(a, e)| (a, e as i64)),
                );
                let mut prefix = p.mul(u, &lead);
                let mut out = vec![x.clone()];
                for &(gen, e) in mid {
                    out.push(self.coset(prefix.clone(), gen));
                    prefix = p.mul(&prefix, &p.from_syllables([(gen, e as i64)]));
                }
                let last = self.coset(prefix, *t);
                if *out.last().unwrap() != last {
                    out.push(last);
                }
                debug_assert_eq!(out.last(), Some(y));
                out
            }
            (Backend::Graph(g), Point::Vertex(a), Point::Vertex(b)) => {
                g.path(*a, *b).into_iter().map(Point::Vertex).collect()
            }
            _ => panic!("points {x}, {y} do not belong to backend {}", self.backend_name()),
        }
    }

    /// Vertex at `k` steps from `x` along `[x, y]`.
    pub fn point_along(&self, x: &Point, y: &Point, k: u64) -> Point {
        self.geodesic(x, y)
            .into_iter()
            .nth(k as usize)
            .unwrap_or_else(|| y.clone())
    }

    /// Points at distance exactly `r` from `x`. On graphs the whole sphere;
    /// on trees only points on geodesics from `x` to the scope points.
    pub fn sphere(
        &self,
        x: &Point,
        r: Length,
        scope: Option<&[Point]>,
    ) -> Result<Vec<Point>, SpaceError> {
        let k = self.length_to_steps(r)?;
        let mut out: Vec<Point> = match (&self.backend, scope) {
            (Backend::Graph(g), None) => {
                let Point::Vertex(v) = x else {
                    return Err(SpaceError::InvalidPoint(x.to_string()));
                };
                (0..g.len() as u32)
                    .filter(|&w| g.d(*v, w) == k)
                    .map(Point::Vertex)
                    .collect()
            }
            (_, Some(scope)) => scope
                .iter()
                .filter(|p| self.steps(x, p) >= k)
                .map(|p| self.point_along(x, p, k))
                .collect(),
            (_, None) => return Err(SpaceError::NeedsScope),
        };
        out.sort();
        out.dedup();
        Ok(out)
    }

    pub fn length_to_steps(&self, r: Length) -> Result<u64, SpaceError> {
        let k = r / self.edge;
        if !k.is_integer() || k < Length::from_integer(0) {
            return Err(SpaceError::NotRepresentable(r));
        }
        Ok(*k.numer() as u64)
    }

    /// Neighbours one step away. Only defined where the link is finite:
    /// free group trees, free product trees over finite factors, graphs.
    pub fn neighbors(&self, x: &Point) -> Vec<Point> {
        let p = &self.pres;
        match (&self.backend, x) {
            (Backend::FreeGroupTree, Point::Word(w)) => {
                let mut out: Vec<Point> = (0..p.rank() as u8)
                    .flat_map(|g| [1i64, -1].map(move |e| (g, e)))
                    .map(|(g, e)| Point::Word(p.mul(w, &p.from_syllables([(g, e)]))))
                    .collect();
                out.sort();
                out
            }
            (Backend::FreeProductTree, Point::Coset(w, t)) => {
                let order = p.order(*t).expect("neighbors need finite factors");
                let other = 1 - *t;
                let mut out: Vec<Point> = (0..order as i64)
                    .map(|e| self.coset(p.mul(w, &p.from_syllables([(*t, e)])), other))
                    .collect();
                out.sort();
                out
            }
            (Backend::Graph(g), Point::Vertex(v)) => {
                g.neighbors(*v).iter().map(|&u| Point::Vertex(u)).collect()
            }
            _ => panic!("point {x} does not belong to backend {}", self.backend_name()),
        }
    }

    /// All graph vertices.
    pub fn vertices(&self) -> Option<Vec<Point>> {
        self.graph_data()
            .map(|g| (0..g.len() as u32).map(Point::Vertex).collect())
    }
}

fn check_positive(x: Length, name: &str) -> Result<(), SpaceError> {
    if x <= Length::from_integer(0) {
        return Err(SpaceError::InvalidConstants(format!("{name} must be positive")));
    }
    Ok(())
}

/// The `n`-cycle with its rotation as the single generator.
pub fn cycle_graph(n: usize) -> GraphSpec {
    GraphSpec {
        vertices: n,
        edges: (0..n).map(|i| [i, (i + 1) % n]).collect(),
        generators: vec![(0..n).map(|i| (i + 1) % n).collect()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> ActionSpace {
        ActionSpace::free_group_tree(2, Length::from_integer(1)).unwrap()
    }

    fn w(s: &ActionSpace, x: &str) -> Point {
        Point::Word(s.presentation().parse(x).unwrap())
    }

    fn c6() -> ActionSpace {
        ActionSpace::graph(&cycle_graph(6), None, None, 1).unwrap()
    }

    #[test]
    fn dist_examples() {
        let s = f2();
        assert_eq!(s.dist(&s.origin(), &w(&s, "abA")), Length::from_integer(3));
        assert_eq!(s.dist(&w(&s, "ab"), &w(&s, "ab")), Length::from_integer(0));
        assert_eq!(s.steps(&w(&s, "aab"), &w(&s, "aB")), 3);
        assert_eq!(s.steps(&w(&s, "aab"), &w(&s, "A")), 4);
        let g = c6();
        assert_eq!(g.dist(&Point::Vertex(0), &Point::Vertex(3)), Length::from_integer(3));
    }

    #[test]
    fn act_examples() {
        let s = f2();
        let g = s.presentation().parse("ab").unwrap();
        assert_eq!(s.act(&GroupElement::identity(), &w(&s, "b")), w(&s, "b"));
        assert_eq!(s.act(&g, &w(&s, "A")), w(&s, "abA"));

        let z23 = ActionSpace::free_product_tree([Some(2), Some(3)], Length::from_integer(1)).unwrap();
        let sgen = z23.presentation().parse("a").unwrap();
        // s fixes the base vertex A and moves the B-vertex at distance 1.
        assert_eq!(z23.act(&sgen, &z23.origin()), z23.origin());
        let b0 = Point::Coset(GroupElement::identity(), 1);
        let moved = z23.act(&sgen, &b0);
        assert_eq!(moved, Point::Coset(sgen.clone(), 1));
        assert_eq!(z23.steps(&b0, &moved), 2);
    }

    #[test]
    fn geodesic_examples() {
        let s = f2();
        let path = s.geodesic(&s.origin(), &w(&s, "ab"));
        assert_eq!(path, vec![s.origin(), w(&s, "a"), w(&s, "ab")]);
        assert_eq!(s.geodesic(&w(&s, "a"), &w(&s, "a")), vec![w(&s, "a")]);
        let g = c6();
        assert_eq!(
            g.geodesic(&Point::Vertex(0), &Point::Vertex(2)),
            vec![Point::Vertex(0), Point::Vertex(1), Point::Vertex(2)]
        );
    }

    #[test]
    fn free_product_geodesic_has_unit_steps() {
        let z57 = ActionSpace::free_product_tree([Some(5), Some(7)], Length::from_integer(1)).unwrap();
        let p = z57.presentation();
        let x = z57.act(&p.parse("ab^3").unwrap(), &Point::Coset(GroupElement::identity(), 1));
        let y = z57.act(&p.parse("a^2b^5a").unwrap(), &z57.origin());
        let path = z57.geodesic(&x, &y);
        assert_eq!(path.len() as u64, z57.steps(&x, &y) + 1);
        for pair in path.windows(2) {
            assert_eq!(z57.steps(&pair[0], &pair[1]), 1);
        }
    }

    #[test]
    fn sphere_examples() {
        let s = f2();
        let link = s.neighbors(&s.origin());
        let sp = s.sphere(&s.origin(), Length::from_integer(1), Some(&link)).unwrap();
        assert_eq!(sp.len(), 4);
        let sp0 = s.sphere(&w(&s, "ab"), Length::from_integer(0), Some(&link)).unwrap();
        assert_eq!(sp0, vec![w(&s, "ab")]);
        let g = c6();
        assert_eq!(
            g.sphere(&Point::Vertex(0), Length::from_integer(3), None).unwrap(),
            vec![Point::Vertex(3)]
        );
        assert!(matches!(
            s.sphere(&s.origin(), Length::new(1, 2), Some(&link)),
            Err(SpaceError::NotRepresentable(_))
        ));
    }

    #[test]
    fn delta_examples() {
        // A path encoded as a graph is a tree.
        let path = GraphSpec {
            vertices: 5,
            edges: vec![[0, 1], [1, 2], [2, 3], [3, 4]],
            generators: vec![vec![4, 3, 2, 1, 0]],
        };
        let sp = ActionSpace::graph(&path, Some(Length::from_integer(1)), None, 1).unwrap();
        assert_eq!(sp.delta(), Length::from_integer(0));
        let edge = GraphSpec {
            vertices: 2,
            edges: vec![[0, 1]],
            generators: vec![vec![1, 0]],
        };
        let sp = ActionSpace::graph(&edge, Some(Length::from_integer(1)), None, 1).unwrap();
        assert_eq!(sp.delta(), Length::from_integer(0));
        // 6-cycle: the quadruple 0,1,3,4 has pair sums 2, 4, 6.
        assert_eq!(c6().delta(), Length::from_integer(1));
    }

    #[test]
    fn graph_validation() {
        let bad = GraphSpec {
            vertices: 3,
            edges: vec![[0, 1]],
            generators: vec![vec![0, 1, 2]],
        };
        assert_eq!(FiniteGraph::new(&bad).unwrap_err(), SpaceError::Disconnected);
        let mut spec = cycle_graph(4);
        spec.generators = vec![vec![0, 2, 1, 3]];
        assert!(matches!(FiniteGraph::new(&spec), Err(SpaceError::InvalidGraph(_))));
        let tree = GraphSpec {
            vertices: 2,
            edges: vec![[0, 1]],
            generators: vec![vec![1, 0]],
        };
        assert!(ActionSpace::graph(&tree, None, None, 1).is_err());
    }
}
