//! Pregroup type algebra and planar reduction.
//!
//! A simple type is an atomic base (`n` or `s`) together with an integer
//! adjoint order `z`: `z = 0` is the plain type, each left adjoint subtracts
//! one and each right adjoint adds one. The two contraction rules
//! `p · pʳ → 1` and `pˡ · p → 1` are the same rule read at different orders:
//! a type of order `z` followed by the same base at order `z + 1` cancels.
//!
//! [`reduce`] searches the planar (non-crossing) matchings of a flattened type
//! sequence and returns the cups that leave exactly the target type.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Atomic pregroup type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    /// Nouns and noun phrases.
    N,
    /// Sentences.
    S,
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Base::N => f.write_str("n"),
            Base::S => f.write_str("s"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
}

/// A base type with its adjoint order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimpleType {
    pub base: Base,
    pub z: i32,
}

impl SimpleType {
    pub const fn new(base: Base, z: i32) -> Self {
        Self { base, z }
    }

    pub const fn n() -> Self {
        Self::new(Base::N, 0)
    }

    pub const fn s() -> Self {
        Self::new(Base::S, 0)
    }

    pub fn adjoint(self, direction: Direction) -> Self {
        match direction {
            Direction::Left => Self::new(self.base, self.z - 1),
            Direction::Right => Self::new(self.base, self.z + 1),
        }
    }

    pub fn left(self) -> Self {
        self.adjoint(Direction::Left)
    }

    pub fn right(self) -> Self {
        self.adjoint(Direction::Right)
    }

    /// True when `self · other → 1`.
    pub fn cancels_with(self, other: SimpleType) -> bool {
        self.base == other.base && other.z == self.z + 1
    }
}

/// Free function form of [`SimpleType::adjoint`].
pub fn adjoint(t: SimpleType, direction: Direction) -> SimpleType {
    t.adjoint(direction)
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        if self.z != 0 {
            let mark = if self.z < 0 { "l" } else { "r" };
            write!(f, "^{}", mark.repeat(self.z.unsigned_abs() as usize))?;
        }
        Ok(())
    }
}

impl FromStr for SimpleType {
    type Err = Error;

    /// Accepts `n`, `s`, `n^r`, `s^l`, `n^ll`, ...
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            line: 0,
            msg: format!("bad simple type `{s}`"),
        };
        let (base, marks) = match s.split_once('^') {
            Some((b, m)) if !m.is_empty() => (b, m),
            Some(_) => return Err(bad()),
            None => (s, ""),
        };
        let base = match base {
            "n" => Base::N,
            "s" => Base::S,
            _ => return Err(bad()),
        };
        let z = if marks.chars().all(|c| c == 'l') {
            -(marks.len() as i32)
        } else if marks.chars().all(|c| c == 'r') {
            marks.len() as i32
        } else {
            return Err(bad());
        };
        Ok(SimpleType::new(base, z))
    }
}

/// A (possibly empty) product of simple types. The empty product is the unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PregroupType(pub Vec<SimpleType>);

impl PregroupType {
    pub fn unit() -> Self {
        Self(Vec::new())
    }

    pub fn simple(t: SimpleType) -> Self {
        Self(vec![t])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn simples(&self) -> &[SimpleType] {
        &self.0
    }

    pub fn concat(&self, other: &PregroupType) -> PregroupType {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        PregroupType(v)
    }
}

impl From<SimpleType> for PregroupType {
    fn from(t: SimpleType) -> Self {
        Self::simple(t)
    }
}

impl FromIterator<SimpleType> for PregroupType {
    fn from_iter<I: IntoIterator<Item = SimpleType>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Display for PregroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" · ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for PregroupType {
    type Err = Error;

    /// Whitespace- or `·`-separated simple types; `1` is the unit.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "1" {
            return Ok(Self::unit());
        }
        s.split(|c: char| c.is_whitespace() || c == '·' || c == '.')
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

/// One contraction between flattened positions `left < right`.
pub type Cup = (usize, usize);

/// The cups of a successful reduction together with what is left over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    /// Sorted by left endpoint.
    pub cups: Vec<Cup>,
    pub residual: PregroupType,
    /// Flattened positions of the residual types, ascending.
    pub residual_positions: Vec<usize>,
}

/// How [`reduce`] reacts when several reductions reach the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmbiguityPolicy {
    /// Return the first reduction found and log a warning.
    #[default]
    FirstFound,
    /// Fail with [`Error::AmbiguousReduction`].
    Strict,
}

pub fn flatten(sentence_types: &[PregroupType]) -> Vec<SimpleType> {
    sentence_types
        .iter()
        .flat_map(|t| t.0.iter().copied())
        .collect()
}

/// Reduce a sentence's types to `target`, warning (not failing) on ambiguity.
pub fn reduce(sentence_types: &[PregroupType], target: &PregroupType) -> Result<Reduction> {
    reduce_with(sentence_types, target, AmbiguityPolicy::FirstFound)
}

pub fn reduce_with(
    sentence_types: &[PregroupType],
    target: &PregroupType,
    policy: AmbiguityPolicy,
) -> Result<Reduction> {
    let flat = flatten(sentence_types);
    let found = all_reductions(&flat, target);
    let describe = || PregroupType(flat.clone()).to_string();
    match found.len() {
        0 => Err(Error::NoReduction {
            types: describe(),
            target: target.to_string(),
        }),
        1 => Ok(found.into_iter().next().unwrap()),
        count => match policy {
            AmbiguityPolicy::Strict => Err(Error::AmbiguousReduction {
                types: describe(),
                target: target.to_string(),
                count,
            }),
            AmbiguityPolicy::FirstFound => {
                log::warn!(
                    "{count} reductions of `{}` to `{target}`, using the first",
                    describe()
                );
                Ok(found.into_iter().next().unwrap())
            }
        },
    }
}

/// Every planar reduction of `flat` leaving exactly `target`, in
/// leftmost-innermost search order.
///
/// Residual positions never sit under a cup: anything enclosed by a cup has
/// to cancel completely.
pub fn all_reductions(flat: &[SimpleType], target: &PregroupType) -> Vec<Reduction> {
    let mut out = Vec::new();
    for (mut cups, positions) in with_residual(flat, 0, &target.0) {
        cups.sort_unstable();
        out.push(Reduction {
            cups,
            residual: target.clone(),
            residual_positions: positions,
        });
    }
    out
}

type Partial = (Vec<Cup>, Vec<usize>);

fn with_residual(flat: &[SimpleType], start: usize, target: &[SimpleType]) -> Vec<Partial> {
    if start == flat.len() {
        return if target.is_empty() {
            vec![(Vec::new(), Vec::new())]
        } else {
            Vec::new()
        };
    }
    // Not enough positions left to host the remaining residual.
    if flat.len() - start < target.len() {
        return Vec::new();
    }
    let mut out = Vec::new();
    // Close a cup from `start`, innermost partner first.
    for end in (start + 1..flat.len()).step_by(2) {
        if !flat[start].cancels_with(flat[end]) {
            continue;
        }
        let inner = full_reductions(flat, start + 1, end);
        if inner.is_empty() {
            continue;
        }
        let rest = with_residual(flat, end + 1, target);
        for i in &inner {
            for (r_cups, r_pos) in &rest {
                let mut cups = Vec::with_capacity(1 + i.len() + r_cups.len());
                cups.push((start, end));
                cups.extend_from_slice(i);
                cups.extend_from_slice(r_cups);
                out.push((cups, r_pos.clone()));
            }
        }
    }
    // Or leave `start` in the residual.
    if let Some((first, tail)) = target.split_first() {
        if *first == flat[start] {
            for (cups, mut pos) in with_residual(flat, start + 1, tail) {
                pos.insert(0, start);
                out.push((cups, pos));
            }
        }
    }
    out
}

/// All ways the half-open range `[start, end)` cancels to the unit.
fn full_reductions(flat: &[SimpleType], start: usize, end: usize) -> Vec<Vec<Cup>> {
    if start == end {
        return vec![Vec::new()];
    }
    if (end - start) % 2 == 1 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for partner in (start + 1..end).step_by(2) {
        if !flat[start].cancels_with(flat[partner]) {
            continue;
        }
        let inner = full_reductions(flat, start + 1, partner);
        if inner.is_empty() {
            continue;
        }
        let rest = full_reductions(flat, partner + 1, end);
        for i in &inner {
            for r in &rest {
                let mut cups = Vec::with_capacity(1 + i.len() + r.len());
                cups.push((start, partner));
                cups.extend_from_slice(i);
                cups.extend_from_slice(r);
                out.push(cups);
            }
        }
    }
    out
}

/// True when no two cups cross.
pub fn is_planar(cups: &[Cup]) -> bool {
    cups.iter().all(|&(i, j)| {
        cups.iter()
            .all(|&(k, l)| !(i < k && k < j && j < l) && !(k < i && i < l && l < j))
    })
}
