//! Constraints (signatures) and their underlying relations.
//!
//! A constraint of arity `k` is a table of `2^k` values.  Index `i` encodes the
//! assignment `(x_1, ..., x_k)` with `x_1` as the most significant bit, so a
//! binary constraint lists `(f(00), f(01), f(10), f(11))`.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::complex::ComplexRat;
use crate::error::{Error, Result};

/// Largest arity for which a full table is materialised.
pub const MAX_ARITY: usize = 24;

/// Value of variable `pos` (1-based) inside table index `idx` of arity `arity`.
#[inline]
pub fn bit(idx: usize, pos: usize, arity: usize) -> u8 {
    ((idx >> (arity - pos)) & 1) as u8
}

/// Table index of a bit vector `(x_1, ..., x_k)`.
pub fn index_of(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b as usize & 1))
}

/// Bits of `idx` as `(x_1, ..., x_k)`.
pub fn bits_of(idx: usize, arity: usize) -> Vec<u8> {
    (1..=arity).map(|p| bit(idx, p, arity)).collect()
}

/// Bitstring text of an index, e.g. `"011"`.
pub fn bitstring(idx: usize, arity: usize) -> String {
    (1..=arity).map(|p| if bit(idx, p, arity) == 1 { '1' } else { '0' }).collect()
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    arity: usize,
    values: Vec<ComplexRat>,
}

impl Constraint {
    pub fn new(arity: usize, values: Vec<ComplexRat>) -> Result<Self> {
        if arity > MAX_ARITY {
            return Err(Error::Arity(format!("arity {arity} exceeds the table limit {MAX_ARITY}")));
        }
        if values.len() != 1usize << arity {
            return Err(Error::Arity(format!(
                "arity {arity} needs {} values, got {}",
                1usize << arity,
                values.len()
            )));
        }
        Ok(Constraint { arity, values })
    }

    /// Build from a function of the table index.
    pub fn from_fn(arity: usize, f: impl FnMut(usize) -> ComplexRat) -> Self {
        assert!(arity <= MAX_ARITY, "arity {arity} too large");
        Constraint { arity, values: (0..1usize << arity).map(f).collect() }
    }

    /// Shorthand for integer tables, used heavily in tests.
    pub fn from_ints(arity: usize, values: &[i64]) -> Result<Self> {
        Self::new(arity, values.iter().map(|&v| ComplexRat::from_int(v)).collect())
    }

    /// Expand a symmetric signature `[f_0, ..., f_k]`.
    pub fn from_symmetric(s: &SymmetricSpec) -> Result<Self> {
        if s.entries.is_empty() {
            return Err(Error::Argument("symmetric signature needs at least one entry".into()));
        }
        let k = s.entries.len() - 1;
        if k > MAX_ARITY {
            return Err(Error::Arity(format!("arity {k} exceeds {MAX_ARITY}")));
        }
        Ok(Self::from_fn(k, |idx| s.entries[idx.count_ones() as usize].clone()))
    }

    pub fn symmetric_ints(entries: &[i64]) -> Self {
        Self::from_symmetric(&SymmetricSpec::from_ints(entries)).expect("nonempty entries")
    }

    pub fn zero(arity: usize) -> Self {
        Self::from_fn(arity, |_| ComplexRat::zero())
    }

    pub fn constant(arity: usize, value: ComplexRat) -> Self {
        Self::from_fn(arity, |_| value.clone())
    }

    pub fn unary(a: ComplexRat, b: ComplexRat) -> Self {
        Constraint { arity: 1, values: vec![a, b] }
    }

    pub fn eq(k: usize) -> Self {
        let full = (1usize << k) - 1;
        Self::from_fn(k, |idx| if idx == 0 || idx == full { ComplexRat::one() } else { ComplexRat::zero() })
    }

    pub fn xor() -> Self {
        Self::symmetric_ints(&[0, 1, 0])
    }

    pub fn or() -> Self {
        Self::symmetric_ints(&[0, 1, 1])
    }

    pub fn nand() -> Self {
        Self::symmetric_ints(&[1, 1, 0])
    }

    pub fn implies() -> Self {
        Self::from_ints(2, &[1, 1, 0, 1]).unwrap()
    }

    pub fn delta0() -> Self {
        Self::from_ints(1, &[1, 0]).unwrap()
    }

    pub fn delta1() -> Self {
        Self::from_ints(1, &[0, 1]).unwrap()
    }

    /// `Δ_c`.
    pub fn delta(c: u8) -> Self {
        if c == 0 {
            Self::delta0()
        } else {
            Self::delta1()
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[ComplexRat] {
        &self.values
    }

    pub fn into_values(self) -> Vec<ComplexRat> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at a table index.
    #[inline]
    pub fn at(&self, idx: usize) -> &ComplexRat {
        &self.values[idx]
    }

    /// Value at an assignment `(x_1, ..., x_k)`.
    pub fn evaluate(&self, assignment: &[u8]) -> Result<&ComplexRat> {
        if assignment.len() != self.arity {
            return Err(Error::Arity(format!(
                "assignment of length {} for a constraint of arity {}",
                assignment.len(),
                self.arity
            )));
        }
        if let Some(b) = assignment.iter().find(|&&b| b > 1) {
            return Err(Error::Argument(format!("assignment entry {b} is not a bit")));
        }
        Ok(&self.values[index_of(assignment)])
    }

    /// Value at a bitstring such as `"10"`.
    pub fn evaluate_str(&self, bits: &str) -> Result<&ComplexRat> {
        let v: Vec<u8> = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Argument(format!("`{other}` is not a bit"))),
            })
            .collect::<Result<_>>()?;
        self.evaluate(&v)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    pub fn underlying_relation(&self) -> Relation {
        let mut r = Relation::empty(self.arity);
        for (idx, v) in self.values.iter().enumerate() {
            if !v.is_zero() {
                r.insert(idx);
            }
        }
        r
    }

    /// Pointwise scalar multiple (any scalar, including zero).
    pub fn map_scale(&self, lambda: &ComplexRat) -> Self {
        Constraint { arity: self.arity, values: self.values.iter().map(|v| v * lambda).collect() }
    }

    /// `λ` with `self = λ·g`, if one exists. Two zero constraints give `λ = 1`.
    pub fn proportional_to(&self, g: &Constraint) -> Result<Option<ComplexRat>> {
        if self.arity != g.arity {
            return Err(Error::Arity(format!("arities {} and {} differ", self.arity, g.arity)));
        }
        let Some(pivot) = g.values.iter().position(|v| !v.is_zero()) else {
            return Ok(self.is_zero().then(ComplexRat::one));
        };
        let lambda = &self.values[pivot] / &g.values[pivot];
        if lambda.is_zero() {
            return Ok(None);
        }
        let ok = self.values.iter().zip(&g.values).all(|(a, b)| *a == b * &lambda);
        Ok(ok.then_some(lambda))
    }

    /// True if `self = λ·g` for some nonzero `λ`.
    pub fn is_proportional(&self, g: &Constraint) -> bool {
        matches!(self.proportional_to(g), Ok(Some(_)))
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.values.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Constraint[{}]{}", self.arity, self)
    }
}

#[derive(Serialize)]
struct RecordOut<'a> {
    arity: usize,
    values: &'a [ComplexRat],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordIn {
    arity: Option<usize>,
    values: Option<Vec<ComplexRat>>,
    sym: Option<Vec<ComplexRat>>,
}

impl Serialize for Constraint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RecordOut { arity: self.arity, values: &self.values }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Constraint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rec = RecordIn::deserialize(deserializer)?;
        let c = match (rec.values, rec.sym) {
            (Some(_), Some(_)) => return Err(D::Error::custom("give either `values` or `sym`, not both")),
            (Some(values), None) => {
                let arity = rec.arity.ok_or_else(|| D::Error::missing_field("arity"))?;
                Constraint::new(arity, values).map_err(D::Error::custom)?
            }
            (None, Some(entries)) => {
                let c = Constraint::from_symmetric(&SymmetricSpec { entries }).map_err(D::Error::custom)?;
                if let Some(a) = rec.arity {
                    if a != c.arity {
                        return Err(D::Error::custom(format!(
                            "`sym` has arity {} but `arity` says {a}",
                            c.arity
                        )));
                    }
                }
                c
            }
            (None, None) => return Err(D::Error::missing_field("values")),
        };
        Ok(c)
    }
}

/// Symmetric signature `[f_0, ..., f_k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetricSpec {
    pub entries: Vec<ComplexRat>,
}

impl SymmetricSpec {
    pub fn from_ints(entries: &[i64]) -> Self {
        SymmetricSpec { entries: entries.iter().map(|&v| ComplexRat::from_int(v)).collect() }
    }

    /// Read back the weight classes of a constraint, if it is symmetric.
    pub fn of(f: &Constraint) -> Option<SymmetricSpec> {
        let k = f.arity();
        let mut entries: Vec<Option<ComplexRat>> = vec![None; k + 1];
        for (idx, v) in f.values().iter().enumerate() {
            let w = idx.count_ones() as usize;
            match &entries[w] {
                None => entries[w] = Some(v.clone()),
                Some(e) if e == v => {}
                Some(_) => return None,
            }
        }
        Some(SymmetricSpec { entries: entries.into_iter().map(|e| e.unwrap()).collect() })
    }
}

/// A Boolean relation stored as a bitset over table indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    arity: usize,
    words: Vec<u64>,
}

impl Relation {
    pub fn empty(arity: usize) -> Self {
        assert!(arity <= MAX_ARITY, "arity {arity} too large");
        let n = 1usize << arity;
        Relation { arity, words: vec![0; n.div_ceil(64)] }
    }

    pub fn full(arity: usize) -> Self {
        let mut r = Self::empty(arity);
        for idx in 0..1usize << arity {
            r.insert(idx);
        }
        r
    }

    pub fn from_indices(arity: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut r = Self::empty(arity);
        for idx in indices {
            r.insert(idx);
        }
        r
    }

    /// Relation from a membership bitmask (arity ≤ 6).
    pub fn from_mask(arity: usize, mask: u64) -> Self {
        assert!(arity <= 6);
        let mut r = Self::empty(arity);
        r.words[0] = if arity == 6 { mask } else { mask & ((1u64 << (1 << arity)) - 1) };
        r
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    #[inline]
    pub fn contains(&self, idx: usize) -> bool {
        idx < (1usize << self.arity) && (self.words[idx / 64] >> (idx % 64)) & 1 == 1
    }

    pub fn insert(&mut self, idx: usize) {
        assert!(idx < 1usize << self.arity, "index {idx} outside relation of arity {}", self.arity);
        self.words[idx / 64] |= 1u64 << (idx % 64);
    }

    pub fn remove(&mut self, idx: usize) {
        if idx < 1usize << self.arity {
            self.words[idx / 64] &= !(1u64 << (idx % 64));
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == 1usize << self.arity
    }

    /// Member indices in ascending (lexicographic) order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..1usize << self.arity).filter(move |&i| self.contains(i))
    }

    pub fn intersect(&self, other: &Relation) -> Relation {
        assert_eq!(self.arity, other.arity);
        Relation {
            arity: self.arity,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    /// The 0/1 constraint with this support.
    pub fn to_constraint(&self) -> Constraint {
        Constraint::from_fn(self.arity, |i| if self.contains(i) { ComplexRat::one() } else { ComplexRat::zero() })
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, idx) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", bitstring(idx, self.arity))?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Relation[{}]{}", self.arity, self)
    }
}
