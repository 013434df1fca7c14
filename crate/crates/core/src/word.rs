//! Reduced words in the free group F_n, eventually periodic boundary points of
//! its Cayley tree, Gromov products, geodesics and projections.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A generator or inverse generator. Generators are 0-based; `a` is 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    generator: u8,
    inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        assert!(generator < 26, "at most 26 generators are supported");
        Self {
            generator: generator as u8,
            inverse,
        }
    }

    pub fn gen(generator: usize) -> Self {
        Self::new(generator, false)
    }

    pub fn generator(self) -> usize {
        self.generator as usize
    }

    pub fn is_inverse(self) -> bool {
        self.inverse
    }

    pub fn inv(self) -> Self {
        Self {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }

    /// +1 for a generator, -1 for an inverse.
    pub fn sign(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub fn to_char(self) -> char {
        let base = if self.inverse { b'A' } else { b'a' };
        (base + self.generator) as char
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'a'..='z' => Some(Self::new(c as usize - 'a' as usize, false)),
            'A'..='Z' => Some(Self::new(c as usize - 'A' as usize, true)),
            _ => None,
        }
    }

    /// All 2n letters in the order a, A, b, B, ...
    pub fn alphabet(rank: usize) -> Vec<Letter> {
        (0..rank)
            .flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
            .collect()
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// A freely reduced word. Ordering is shortlex with letters ordered a < A < b < B.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ReducedWord(Vec<Letter>);

impl ReducedWord {
    pub fn identity() -> Self {
        Self(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        Self(vec![l])
    }

    /// Free reduction with a stack; the result does not depend on cancellation order.
    pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Self(out)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn concat(&self, other: &ReducedWord) -> ReducedWord {
        let mut out = self.0.clone();
        let mut rest = other.0.iter().peekable();
        while let (Some(&l), Some(&&r)) = (out.last(), rest.peek()) {
            if r == l.inv() {
                out.pop();
                rest.next();
            } else {
                break;
            }
        }
        out.extend(rest);
        Self(out)
    }

    pub fn inverse(&self) -> ReducedWord {
        Self(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn pow(&self, n: usize) -> ReducedWord {
        let mut out = Self::identity();
        for _ in 0..n {
            out = out.concat(self);
        }
        out
    }

    pub fn prefix(&self, m: usize) -> ReducedWord {
        Self(self.0[..m.min(self.len())].to_vec())
    }

    pub fn suffix_from(&self, m: usize) -> ReducedWord {
        Self(self.0[m.min(self.len())..].to_vec())
    }

    pub fn push(&self, l: Letter) -> ReducedWord {
        self.concat(&ReducedWord::letter(l))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(f), Some(l)) => self.len() == 1 || f != l.inv(),
            _ => true,
        }
    }

    /// Returns `(core, conjugator)` with `self = conjugator · core · conjugator⁻¹`.
    pub fn cyclic_reduce(&self) -> Result<(ReducedWord, ReducedWord)> {
        if self.is_empty() {
            return Err(Error::EmptyWord);
        }
        let n = self.len();
        let mut i = 0;
        while i < n - 1 - i && self.0[i] == self.0[n - 1 - i].inv() {
            i += 1;
        }
        Ok((
            Self(self.0[i..n - i].to_vec()),
            Self(self.0[..i].to_vec()),
        ))
    }

    /// Cyclic rotation by `r` positions to the left.
    pub fn rotate(&self, r: usize) -> ReducedWord {
        if self.is_empty() {
            return self.clone();
        }
        let mut v = self.0.clone();
        v.rotate_left(r % self.len());
        Self::reduce(v)
    }

    /// Shortest `r` with `self = r^m`.
    pub fn primitive_root(&self) -> ReducedWord {
        let n = self.len();
        for d in 1..=n {
            if n.is_multiple_of(d) && (d..n).all(|i| self.0[i] == self.0[i - d]) {
                return Self(self.0[..d].to_vec());
            }
        }
        self.clone()
    }

    /// Lexicographically least rotation, for cyclically reduced words.
    pub fn least_rotation(&self) -> ReducedWord {
        (0..self.len().max(1))
            .map(|r| self.rotate(r))
            .min()
            .unwrap_or_default()
    }

    /// Exponent sum of each generator.
    pub fn abelianization(&self, rank: usize) -> Vec<i64> {
        let mut v = vec![0; rank];
        for l in &self.0 {
            v[l.generator()] += l.sign();
        }
        v
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.0.iter().map(|l| l.generator()).max()
    }

    pub fn check_rank(&self, rank: usize) -> Result<()> {
        match self.0.iter().find(|l| l.generator() >= rank) {
            Some(l) => Err(Error::LetterOutOfRange(l.to_char(), rank)),
            None => Ok(()),
        }
    }

    /// Every reduced word of length exactly `t` over the given letters, in shortlex order.
    pub fn sphere(letters: &[Letter], t: usize) -> Vec<ReducedWord> {
        let mut sorted = letters.to_vec();
        sorted.sort();
        sorted.dedup();
        let mut out = vec![ReducedWord::identity()];
        for _ in 0..t {
            let mut next = Vec::with_capacity(out.len() * sorted.len());
            for w in &out {
                for &l in &sorted {
                    if w.last() != Some(l.inv()) {
                        let mut v = w.0.clone();
                        v.push(l);
                        next.push(Self(v));
                    }
                }
            }
            out = next;
        }
        out
    }
}

impl PartialOrd for ReducedWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ReducedWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{}", l)?;
        }
        Ok(())
    }
}

impl fmt::Debug for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "ε")
        } else {
            write!(f, "{}", self)
        }
    }
}

impl FromStr for ReducedWord {
    type Err = Error;

    /// Parses an ASCII word; uppercase letters are inverses. The input is freely reduced.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let letters = s
            .chars()
            .map(|c| {
                Letter::from_char(c).ok_or_else(|| Error::Parse {
                    input: s.to_string(),
                    reason: format!("unexpected character `{c}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::reduce(letters))
    }
}

impl TryFrom<String> for ReducedWord {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ReducedWord> for String {
    fn from(w: ReducedWord) -> String {
        w.to_string()
    }
}

/// Eventually periodic point `preperiod · period^∞` of the boundary of the tree,
/// kept in a canonical form so that structural equality is equality of points.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BoundaryPoint {
    preperiod: ReducedWord,
    period: ReducedWord,
}

impl BoundaryPoint {
    /// The limit of `u · p^n` as n → ∞.
    pub fn from_limit(u: &ReducedWord, p: &ReducedWord) -> Result<Self> {
        let (core, conj) = p.cyclic_reduce()?;
        let mut pre = u.concat(&conj).0;
        let mut per = core.0;
        while let (Some(&l), Some(&f)) = (pre.last(), per.first()) {
            if l == f.inv() {
                pre.pop();
                per.rotate_left(1);
            } else {
                break;
            }
        }
        let mut per = ReducedWord(per).primitive_root().0;
        while let (Some(&l), Some(&e)) = (pre.last(), per.last()) {
            if l == e {
                pre.pop();
                per.rotate_right(1);
            } else {
                break;
            }
        }
        Ok(Self {
            preperiod: ReducedWord(pre),
            period: ReducedWord(per),
        })
    }

    /// The attracting fixed point `w^∞` of a nontrivial word.
    pub fn periodic(w: &ReducedWord) -> Result<Self> {
        Self::from_limit(&ReducedWord::identity(), w)
    }

    pub fn preperiod(&self) -> &ReducedWord {
        &self.preperiod
    }

    pub fn period(&self) -> &ReducedWord {
        &self.period
    }

    /// The i-th letter (0-based) of the infinite reduced word.
    pub fn letter_at(&self, i: usize) -> Letter {
        let u = self.preperiod.len();
        if i < u {
            self.preperiod.0[i]
        } else {
            self.period.0[(i - u) % self.period.len()]
        }
    }

    pub fn prefix(&self, m: usize) -> ReducedWord {
        ReducedWord((0..m).map(|i| self.letter_at(i)).collect())
    }

    /// The point `g · x`.
    pub fn translate(&self, g: &ReducedWord) -> BoundaryPoint {
        Self::from_limit(&g.concat(&self.preperiod), &self.period)
            .expect("period is nonempty")
    }

    /// Length of the longest common prefix; `None` encodes ∞ (equal points).
    pub fn gromov_product(&self, other: &BoundaryPoint) -> Option<usize> {
        if self == other {
            return None;
        }
        let bound = self.preperiod.len().max(other.preperiod.len())
            + lcm(self.period.len(), other.period.len());
        (0..=bound).find(|&i| self.letter_at(i) != other.letter_at(i))
    }

    /// `e^{-κ (x·y)}` with ∞ ↦ 0.
    pub fn visual_distance(&self, other: &BoundaryPoint, kappa: f64) -> f64 {
        match self.gromov_product(other) {
            None => 0.0,
            Some(c) => (-kappa * c as f64).exp(),
        }
    }

    pub fn check_rank(&self, rank: usize) -> Result<()> {
        self.preperiod.check_rank(rank)?;
        self.period.check_rank(rank)
    }

    /// Whether every letter from position `i` on belongs to `letters`.
    pub fn tail_within(&self, i: usize, letters: &[Letter]) -> bool {
        let u = self.preperiod.len();
        self.preperiod.0[i.min(u)..].iter().all(|l| letters.contains(l))
            && self.period.0.iter().all(|l| letters.contains(l))
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.preperiod.is_empty() {
            write!(f, "({})", self.period)
        } else {
            write!(f, "{}|({})", self.preperiod, self.period)
        }
    }
}

impl fmt::Debug for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for BoundaryPoint {
    type Err = Error;

    /// Parses `prefix|(period)`; the prefix part may be omitted as in `(ab)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let err = |reason: &str| Error::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let (pre, rest) = match s.split_once('|') {
            Some((p, r)) => (p, r),
            None => ("", s),
        };
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| err("expected `prefix|(period)`"))?;
        let u: ReducedWord = pre.parse()?;
        let p: ReducedWord = inner.parse()?;
        if p.is_empty() {
            return Err(err("period must be nonempty"));
        }
        Self::from_limit(&u, &p)
    }
}

impl TryFrom<String> for BoundaryPoint {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BoundaryPoint> for String {
    fn from(x: BoundaryPoint) -> String {
        x.to_string()
    }
}

/// The tree geodesic from `backward` to `forward`, with `l(0)` at signed
/// distance `origin_offset` from the branch point of the two rays from id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BiInfiniteGeodesic {
    pub forward: BoundaryPoint,
    pub backward: BoundaryPoint,
    pub origin_offset: i64,
}

impl BiInfiniteGeodesic {
    fn branch(&self) -> usize {
        self.forward
            .gromov_product(&self.backward)
            .expect("endpoints are distinct")
    }

    /// The vertex at signed position `s` from the branch point.
    fn vertex_at_offset(&self, s: i64) -> ReducedWord {
        let c = self.branch();
        if s >= 0 {
            self.forward.prefix(c + s as usize)
        } else {
            self.backward.prefix(c + s.unsigned_abs() as usize)
        }
    }

    /// The vertex `l(t)`.
    pub fn at(&self, t: i64) -> ReducedWord {
        self.vertex_at_offset(self.origin_offset + t)
    }

    pub fn origin(&self) -> ReducedWord {
        self.at(0)
    }

    pub fn passes_through_identity(&self) -> bool {
        self.origin().is_empty()
    }

    /// The same geodesic with the origin moved by `s` steps forward.
    pub fn shifted(&self, s: i64) -> BiInfiniteGeodesic {
        BiInfiniteGeodesic {
            origin_offset: self.origin_offset + s,
            ..self.clone()
        }
    }

    /// `g · l`, keeping the parametrization.
    pub fn translate(&self, g: &ReducedWord) -> BiInfiniteGeodesic {
        let forward = self.forward.translate(g);
        let backward = self.backward.translate(g);
        let origin = g.concat(&self.origin());
        geodesic_through(&forward, &backward, &origin).expect("translates of geodesics are geodesics")
    }
}

/// The geodesic from `y` to `x` with `l(0) = origin`.
pub fn geodesic_through(
    x: &BoundaryPoint,
    y: &BoundaryPoint,
    origin: &ReducedWord,
) -> Result<BiInfiniteGeodesic> {
    let c = x.gromov_product(y).ok_or(Error::EqualEndpoints)?;
    let m = origin.len();
    let offset = if m >= c && x.prefix(m) == *origin {
        (m - c) as i64
    } else if m >= c && y.prefix(m) == *origin {
        -((m - c) as i64)
    } else {
        return Err(Error::OriginOffGeodesic(origin.to_string()));
    };
    Ok(BiInfiniteGeodesic {
        forward: x.clone(),
        backward: y.clone(),
        origin_offset: offset,
    })
}

/// `t_l(x) = (l(+∞)·x)_{l(0)} − (l(−∞)·x)_{l(0)}` and the vertex `l(t)`.
pub fn project_to_geodesic(l: &BiInfiniteGeodesic, x: &BoundaryPoint) -> Result<(i64, ReducedWord)> {
    if *x == l.forward || *x == l.backward {
        return Err(Error::EndpointProjection(x.to_string()));
    }
    let back = l.origin().inverse();
    let xr = x.translate(&back);
    let fwd = l.forward.translate(&back).gromov_product(&xr).expect("distinct");
    let bwd = l.backward.translate(&back).gromov_product(&xr).expect("distinct");
    let t = fwd as i64 - bwd as i64;
    Ok((t, l.at(t)))
}
