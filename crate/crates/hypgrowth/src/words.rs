//! Normal forms for free groups and free products of cyclic groups.
//!
//! An element is a run-length list of syllables `(generator, exponent)`.
//! Adjacent syllables use distinct generators, exponents are never zero and,
//! for a generator of finite order `m`, lie in `1..m`. Two elements are equal
//! in the group iff their syllable lists are equal.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

pub type Syllable = (u8, i32);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("generator {index} does not exist in a presentation of rank {rank}")]
    ContextMismatch { index: usize, rank: usize },
    #[error("cannot parse {input:?} at byte {pos}: {msg}")]
    Parse {
        input: String,
        pos: usize,
        msg: String,
    },
    #[error("element set is empty")]
    EmptySet,
    #[error("the identity has no primitive root")]
    IdentityRoot,
    #[error("need at least {needed} generators, presentation has {rank}")]
    RankTooSmall { needed: usize, rank: usize },
    #[error("|U^{n}| exceeded the budget of {budget} elements")]
    Budget {
        n: usize,
        budget: usize,
        partial_sizes: Vec<usize>,
    },
}

/// The group: a free group of finite rank, or a free product of cyclic
/// factors (`None` marks an infinite cyclic factor).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Presentation {
    FreeGroup { rank: usize },
    FreeProduct { orders: Vec<Option<u32>> },
}

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    syl: SmallVec<[Syllable; 4]>,
}

impl GroupElement {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn is_identity(&self) -> bool {
        self.syl.is_empty()
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syl
    }

    pub fn syllable_len(&self) -> usize {
        self.syl.len()
    }

    /// Word length over the letters `a, A, b, B, ...`.
    pub fn letter_len(&self) -> u64 {
        self.syl.iter().map(|&(_, e)| e.unsigned_abs() as u64).sum()
    }

    /// Expands into single letters `(generator, ±1)`.
    pub fn letters(&self) -> Vec<Syllable> {
        let mut out = Vec::with_capacity(self.letter_len() as usize);
        for &(g, e) in &self.syl {
            for _ in 0..e.unsigned_abs() {
                out.push((g, e.signum()));
            }
        }
        out
    }

    fn from_raw(syl: SmallVec<[Syllable; 4]>) -> Self {
        Self { syl }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syl.is_empty() {
            return f.write_str("1");
        }
        for &(g, e) in &self.syl {
            let c = if e > 0 {
                (b'a' + g) as char
            } else {
                (b'A' + g) as char
            };
            for _ in 0..e.unsigned_abs() {
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for GroupElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A deduplicated, sorted set of elements.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct ElementSet {
    members: Vec<GroupElement>,
}

impl ElementSet {
    pub fn new(mut members: Vec<GroupElement>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, GroupElement> {
        self.members.iter()
    }

    pub fn as_slice(&self) -> &[GroupElement] {
        &self.members
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.members.binary_search(g).is_ok()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.members.iter().map(|g| g.to_string()).collect()
    }

    pub fn into_vec(self) -> Vec<GroupElement> {
        self.members
    }
}

impl FromIterator<GroupElement> for ElementSet {
    fn from_iter<I: IntoIterator<Item = GroupElement>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a ElementSet {
    type Item = &'a GroupElement;
    type IntoIter = std::slice::Iter<'a, GroupElement>;
    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

/// Sizes of `U, U^2, ..., U^n` and the last computed power.
#[derive(Clone, Debug)]
pub struct PowerSets {
    pub sizes: Vec<usize>,
    pub last: ElementSet,
    /// Set when the budget stopped enumeration before `n_max`.
    pub truncated_at: Option<usize>,
}

/// Both cardinality conventions for the optimality family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SafinCounts {
    /// `2N + 1`, the powers of g including the identity.
    pub powers_block: usize,
    /// The actual set cardinality including h.
    pub set_size: usize,
}

impl Presentation {
    pub fn free_group(rank: usize) -> Result<Self, WordError> {
        let p = Presentation::FreeGroup { rank };
        p.validate()?;
        Ok(p)
    }

    pub fn free_product(orders: Vec<Option<u32>>) -> Result<Self, WordError> {
        let p = Presentation::FreeProduct { orders };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), WordError> {
        match self {
            Presentation::FreeGroup { rank } => {
                if *rank == 0 || *rank > 26 {
                    return Err(WordError::InvalidPresentation(format!(
                        "free group rank must be in 1..=26, got {rank}"
                    )));
                }
            }
            Presentation::FreeProduct { orders } => {
                if orders.is_empty() || orders.len() > 26 {
                    return Err(WordError::InvalidPresentation(format!(
                        "free product needs 1..=26 factors, got {}",
                        orders.len()
                    )));
                }
                if let Some(bad) = orders.iter().flatten().find(|&&m| m < 2) {
                    return Err(WordError::InvalidPresentation(format!(
                        "factor order {bad} is below 2"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        match self {
            Presentation::FreeGroup { rank } => *rank,
            Presentation::FreeProduct { orders } => orders.len(),
        }
    }

    pub fn is_free_group(&self) -> bool {
        matches!(self, Presentation::FreeGroup { .. })
    }

    pub fn order(&self, g: u8) -> Option<u32> {
        match self {
            Presentation::FreeGroup { .. } => None,
            Presentation::FreeProduct { orders } => orders[g as usize],
        }
    }

    fn normalize_exp(&self, g: u8, e: i64) -> i32 {
        match self.order(g) {
            None => i32::try_from(e).expect("exponent overflow"),
            Some(m) => e.rem_euclid(m as i64) as i32,
        }
    }

    pub fn generator(&self, g: usize) -> Result<GroupElement, WordError> {
        self.check_index(g)?;
        let mut s = SmallVec::new();
        s.push((g as u8, 1));
        Ok(GroupElement::from_raw(s))
    }

    fn check_index(&self, g: usize) -> Result<(), WordError> {
        if g >= self.rank() {
            return Err(WordError::ContextMismatch {
                index: g,
                rank: self.rank(),
            });
        }
        Ok(())
    }

    /// Checks that `a` only uses generators of this presentation and is in
    /// normal form.
    pub fn check(&self, a: &GroupElement) -> Result<(), WordError> {
        let mut prev: Option<u8> = None;
        for &(g, e) in a.syllables() {
            self.check_index(g as usize)?;
            let ok_exp = match self.order(g) {
                None => e != 0,
                Some(m) => e > 0 && (e as u32) < m,
            };
            if !ok_exp || prev == Some(g) {
                return Err(WordError::InvalidPresentation(format!(
                    "{a} is not in normal form"
                )));
            }
            prev = Some(g);
        }
        Ok(())
    }

    fn push(&self, w: &mut SmallVec<[Syllable; 4]>, g: u8, e: i64) {
        if let Some(last) = w.last_mut() {
            if last.0 == g {
                let merged = self.normalize_exp(g, last.1 as i64 + e);
                if merged == 0 {
                    w.pop();
                } else {
                    last.1 = merged;
                }
                return;
            }
        }
        let e = self.normalize_exp(g, e);
        if e != 0 {
            w.push((g, e));
        }
    }

    /// Normal form of a product of syllables.
    pub fn from_syllables<I: IntoIterator<Item = (u8, i64)>>(&self, it: I) -> GroupElement {
        let mut w = SmallVec::new();
        for (g, e) in it {
            self.push(&mut w, g, e);
        }
        GroupElement::from_raw(w)
    }

    /// Product without context validation; both inputs must already be
    /// normal forms of this presentation.
    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let mut w = a.syl.clone();
        for &(g, e) in &b.syl {
            self.push(&mut w, g, e as i64);
        }
        GroupElement::from_raw(w)
    }

    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, WordError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    pub fn inverse(&self, a: &GroupElement) -> GroupElement {
        let w = a
            .syl
            .iter()
            .rev()
            .map(|&(g, e)| (g, self.normalize_exp(g, -(e as i64))))
            .collect();
        GroupElement::from_raw(w)
    }

    pub fn pow(&self, a: &GroupElement, k: i64) -> GroupElement {
        let base = if k < 0 { self.inverse(a) } else { a.clone() };
        let mut acc = GroupElement::identity();
        for _ in 0..k.unsigned_abs() {
            acc = self.mul(&acc, &base);
        }
        acc
    }

    /// `h g h⁻¹`.
    pub fn conjugate(&self, h: &GroupElement, g: &GroupElement) -> GroupElement {
        self.mul(&self.mul(h, g), &self.inverse(h))
    }

    pub fn product<'a, I: IntoIterator<Item = &'a GroupElement>>(&self, it: I) -> GroupElement {
        it.into_iter()
            .fold(GroupElement::identity(), |acc, g| self.mul(&acc, g))
    }

    /// Cyclic reduction `a = conjugator · core · conjugator⁻¹`.
    ///
    /// In a free group the core is letter-cyclically reduced: its first and
    /// last letters are not mutually inverse. In a free product the core is
    /// syllable-cyclically reduced (see [`Presentation::syllable_core`]).
    pub fn cyclic_reduce(&self, a: &GroupElement) -> (GroupElement, GroupElement) {
        if !self.is_free_group() {
            return self.syllable_core(a);
        }
        let mut core = a.syl.clone();
        let mut conj = GroupElement::identity();
        while core.len() >= 2 {
            let (g1, e1) = core[0];
            let (g2, e2) = core[core.len() - 1];
            if g1 != g2 || (e1 > 0) == (e2 > 0) {
                break;
            }
            let k = e1.abs().min(e2.abs());
            let s = e1.signum();
            conj = self.mul(&conj, &self.from_syllables([(g1, (s * k) as i64)]));
            core[0].1 -= s * k;
            let last = core.len() - 1;
            core[last].1 += s * k;
            if core[last].1 == 0 {
                core.pop();
            }
            if core[0].1 == 0 {
                core.remove(0);
            }
        }
        (GroupElement::from_raw(core), conj)
    }

    /// Conjugates until the first and last syllables use distinct generators
    /// (or at most one syllable is left). Letter length is never increased,
    /// so in a free group the core realises the minimal length in the
    /// conjugacy class; in a free product its syllable length does.
    pub fn syllable_core(&self, a: &GroupElement) -> (GroupElement, GroupElement) {
        let mut core = a.syl.clone();
        let mut conj = GroupElement::identity();
        while core.len() >= 2 && core[0].0 == core[core.len() - 1].0 {
            let (g, e) = core.remove(0);
            conj = self.mul(&conj, &self.from_syllables([(g, e as i64)]));
            self.push(&mut core, g, e as i64);
        }
        (GroupElement::from_raw(core), conj)
    }

    /// `a = root^power` with `power ≥ 1` maximal.
    ///
    /// Elements of a finite factor (up to conjugacy) are returned as their
    /// own root with power 1.
    pub fn primitive_root(&self, a: &GroupElement) -> Result<(GroupElement, u32), WordError> {
        if a.is_identity() {
            return Err(WordError::IdentityRoot);
        }
        let (core, h) = self.syllable_core(a);
        let hinv = self.inverse(&h);
        if core.syl.len() == 1 {
            let (g, e) = core.syl[0];
            return Ok(match self.order(g) {
                None => {
                    let r = self.from_syllables([(g, e.signum() as i64)]);
                    (self.mul(&self.mul(&h, &r), &hinv), e.unsigned_abs())
                }
                Some(_) => (a.clone(), 1),
            });
        }
        let m = core.syl.len();
        for d in 1..m {
            if m % d != 0 {
                continue;
            }
            if (0..m).all(|i| core.syl[i] == core.syl[i % d]) {
                let r = GroupElement::from_raw(core.syl[..d].iter().copied().collect());
                return Ok((self.mul(&self.mul(&h, &r), &hinv), (m / d) as u32));
            }
        }
        Ok((a.clone(), 1))
    }

    /// True iff `a` and `b` generate the same maximal cyclic subgroup, i.e.
    /// their primitive roots agree up to inversion.
    pub fn same_root(&self, a: &GroupElement, b: &GroupElement) -> bool {
        match (self.primitive_root(a), self.primitive_root(b)) {
            (Ok((ra, _)), Ok((rb, _))) => ra == rb || ra == self.inverse(&rb),
            _ => false,
        }
    }

    /// Whether `a` is a power of the primitive element `root` (including 1).
    pub fn power_of(&self, a: &GroupElement, root: &GroupElement) -> Option<i64> {
        if a.is_identity() {
            return Some(0);
        }
        let (r, k) = self.primitive_root(a).ok()?;
        if r == *root {
            Some(k as i64)
        } else if r == self.inverse(root) {
            Some(-(k as i64))
        } else {
            None
        }
    }

    /// Parses letter strings such as `abA`, `a^3b^-2`, `(ab)^13a` or `1`.
    pub fn parse(&self, s: &str) -> Result<GroupElement, WordError> {
        let mut p = Parser {
            src: s,
            bytes: s.as_bytes(),
            pos: 0,
            pres: self,
        };
        let g = p.expr()?;
        p.skip_ws();
        if p.pos != p.bytes.len() {
            return Err(p.err("unexpected character"));
        }
        Ok(g)
    }

    pub fn parse_set<S: AsRef<str>>(&self, items: &[S]) -> Result<ElementSet, WordError> {
        items
            .iter()
            .map(|s| self.parse(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()
            .map(ElementSet::new)
    }

    /// `U^n` by iterated frontier multiplication with global dedup.
    pub fn product_set(
        &self,
        u: &ElementSet,
        n: usize,
        budget: usize,
    ) -> Result<ElementSet, WordError> {
        let p = self.power_sets(u, n, budget)?;
        match p.truncated_at {
            Some(k) => Err(WordError::Budget {
                n: k,
                budget,
                partial_sizes: p.sizes,
            }),
            None => Ok(p.last),
        }
    }

    /// Computes `|U^k|` for `k = 1..=n_max`, stopping early once a power
    /// exceeds `budget` distinct elements.
    pub fn power_sets(
        &self,
        u: &ElementSet,
        n_max: usize,
        budget: usize,
    ) -> Result<PowerSets, WordError> {
        if u.is_empty() {
            return Err(WordError::EmptySet);
        }
        assert!(n_max >= 1, "n_max must be positive");
        let mut sizes = vec![u.len()];
        let mut cur = u.clone();
        for k in 2..=n_max {
            let next = self.times(&cur, u);
            if next.len() > budget {
                return Ok(PowerSets {
                    sizes,
                    last: cur,
                    truncated_at: Some(k),
                });
            }
            sizes.push(next.len());
            cur = next;
        }
        Ok(PowerSets {
            sizes,
            last: cur,
            truncated_at: None,
        })
    }

    /// The product set `X · Y`.
    pub fn times(&self, x: &ElementSet, y: &ElementSet) -> ElementSet {
        let mut all: Vec<GroupElement> = x
            .as_slice()
            .par_chunks(512)
            .flat_map_iter(|chunk| {
                let mut v = Vec::with_capacity(chunk.len() * y.len());
                for a in chunk {
                    for b in y {
                        v.push(self.mul(a, b));
                    }
                }
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        all.par_sort_unstable();
        all.dedup();
        ElementSet { members: all }
    }

    /// `{g^-N, ..., g^N, h}` with g, h the first two generators.
    pub fn safin_family(&self, n: u32) -> Result<(ElementSet, SafinCounts), WordError> {
        if self.rank() < 2 {
            return Err(WordError::RankTooSmall {
                needed: 2,
                rank: self.rank(),
            });
        }
        let n = n as i64;
        let mut v: Vec<GroupElement> = (-n..=n).map(|k| self.from_syllables([(0, k)])).collect();
        v.push(self.from_syllables([(1, 1)]));
        let set = ElementSet::new(v);
        let counts = SafinCounts {
            powers_block: 2 * n as usize + 1,
            set_size: set.len(),
        };
        Ok((set, counts))
    }

    /// A normal form drawn uniformly from all normal forms of length at most
    /// `max_len` (letters in a free group, syllables in a free product).
    pub fn random_element<R: Rng>(&self, rng: &mut R, max_len: usize) -> GroupElement {
        // weights[l][f]: number of normal forms of length l whose last
        // syllable lies in factor f (free product), or total count (free group).
        match self {
            Presentation::FreeGroup { rank } => {
                let k = *rank as f64;
                let counts: Vec<f64> = (0..=max_len)
                    .map(|l| {
                        if l == 0 {
                            1.0
                        } else {
                            2.0 * k * (2.0 * k - 1.0).powi(l as i32 - 1)
                        }
                    })
                    .collect();
                let len = pick_weighted(rng, &counts);
                let mut w = SmallVec::new();
                let mut prev: Option<(u8, i32)> = None;
                for _ in 0..len {
                    let letter = loop {
                        let g = rng.gen_range(0..*rank) as u8;
                        let s = if rng.gen_bool(0.5) { 1 } else { -1 };
                        if prev != Some((g, -s)) {
                            break (g, s);
                        }
                    };
                    self.push(&mut w, letter.0, letter.1 as i64);
                    prev = Some(letter);
                }
                GroupElement::from_raw(w)
            }
            Presentation::FreeProduct { orders } => {
                let choices = |f: usize| -> f64 {
                    match orders[f] {
                        Some(m) => (m - 1) as f64,
                        None => 2.0,
                    }
                };
                let r = orders.len();
                let mut ends = vec![vec![0.0f64; r]; max_len + 1];
                for l in 1..=max_len {
                    for f in 0..r {
                        let prev: f64 = if l == 1 {
                            1.0
                        } else {
                            (0..r).filter(|&g| g != f).map(|g| ends[l - 1][g]).sum()
                        };
                        ends[l][f] = prev * choices(f);
                    }
                }
                let totals: Vec<f64> = (0..=max_len)
                    .map(|l| if l == 0 { 1.0 } else { ends[l].iter().sum() })
                    .collect();
                let len = pick_weighted(rng, &totals);
                // Sample backwards from the last syllable.
                let mut rev: Vec<(u8, i64)> = Vec::with_capacity(len);
                let mut next: Option<usize> = None;
                for l in (1..=len).rev() {
                    let w: Vec<f64> = (0..r)
                        .map(|f| if Some(f) == next { 0.0 } else { ends[l][f] })
                        .collect();
                    let f = pick_weighted(rng, &w);
                    let e = match orders[f] {
                        Some(m) => rng.gen_range(1..m) as i64,
                        None => {
                            if rng.gen_bool(0.5) {
                                1
                            } else {
                                -1
                            }
                        }
                    };
                    rev.push((f as u8, e));
                    next = Some(f);
                }
                rev.reverse();
                self.from_syllables(rev)
            }
        }
    }
}

fn pick_weighted<R: Rng>(rng: &mut R, w: &[f64]) -> usize {
    let total: f64 = w.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    for (i, &wi) in w.iter().enumerate() {
        if x < wi {
            return i;
        }
        x -= wi;
    }
    w.iter().rposition(|&wi| wi > 0.0).unwrap_or(0)
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    pres: &'a Presentation,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> WordError {
        WordError::Parse {
            input: self.src.to_string(),
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<GroupElement, WordError> {
        let mut acc = GroupElement::identity();
        while let Some(c) = self.peek() {
            if c == b')' {
                break;
            }
            let atom = self.atom()?;
            let atom = if self.peek() == Some(b'^') {
                self.pos += 1;
                let k = self.int()?;
                self.pres.pow(&atom, k)
            } else {
                atom
            };
            acc = self.pres.mul(&acc, &atom);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<GroupElement, WordError> {
        let c = self.peek().ok_or_else(|| self.err("expected a letter"))?;
        match c {
            b'(' => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("missing ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            b'1' => {
                self.pos += 1;
                Ok(GroupElement::identity())
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                let (g, e) = if c.is_ascii_lowercase() {
                    (c - b'a', 1)
                } else {
                    (c - b'A', -1)
                };
                if g as usize >= self.pres.rank() {
                    return Err(self.err(&format!(
                        "generator {} outside rank {}",
                        c as char,
                        self.pres.rank()
                    )));
                }
                self.pos += 1;
                Ok(self.pres.from_syllables([(g, e)]))
            }
            _ => Err(self.err("unexpected character")),
        }
    }

    fn int(&mut self) -> Result<i64, WordError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.bytes.len() && (self.bytes[self.pos] == b'-' || self.bytes[self.pos] == b'+')
        {
            self.pos += 1;
        }
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.src[start..self.pos]
            .parse::<i64>()
            .map_err(|_| self.err("expected an integer exponent"))
    }
}
