//! Multi-indices and downward closed index sets.
//!
//! A multi-index is a finitely supported sequence over a *letter alphabet*:
//! the nonnegative integers for polynomial spaces, or the binary tree of
//! [`crate::pwlinear::TreeIndex`] for the hierarchical hat basis. Every
//! alphabet is a rooted tree under its partial order, so a multi-index has
//! one lower neighbor per active coordinate and downward closedness can be
//! checked locally.
//!
//! Coordinates are 0-based in this crate; coordinate `j` here is the
//! variable `y_{j+1}`.

mod select;
mod weights;

pub use select::{
    monotone_majorant_boxed, select_largest_n, stechkin_tail, BoxedMajorant, Selection,
};
pub use weights::{BRule, WeightKind, WeightSequence};

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::Hash;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// One coordinate value of a multi-index.
///
/// The alphabet is a rooted tree: every letter except [`Letter::root`] has
/// exactly one parent, and `depth` counts the edges to the root.
pub trait Letter:
    Copy + Ord + Eq + Hash + fmt::Debug + Send + Sync + Serialize + DeserializeOwned + 'static
{
    fn root() -> Self;
    fn depth(self) -> u32;
    fn parent(self) -> Option<Self>;
    fn children(self) -> Vec<Self>;

    fn is_root(self) -> bool {
        self == Self::root()
    }
}

impl Letter for u32 {
    fn root() -> Self {
        0
    }

    fn depth(self) -> u32 {
        self
    }

    fn parent(self) -> Option<Self> {
        self.checked_sub(1)
    }

    fn children(self) -> Vec<Self> {
        vec![self + 1]
    }
}

/// Finitely supported multi-index. Root entries are never stored, so two
/// multi-indices are equal iff their sparse maps are equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Multi<L: Letter> {
    entries: Vec<(usize, L)>,
}

/// Multi-index over the nonnegative integers.
pub type MultiIndex = Multi<u32>;

impl<L: Letter> Multi<L> {
    /// The null multi-index `0_F`.
    pub fn zero() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn from_dense(values: &[L]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.is_root())
            .map(|(j, &l)| (j, l))
            .collect();
        Self { entries }
    }

    pub fn from_sparse(pairs: impl IntoIterator<Item = (usize, L)>) -> Self {
        let mut entries: Vec<(usize, L)> = pairs.into_iter().filter(|(_, l)| !l.is_root()).collect();
        entries.sort_by_key(|e| e.0);
        entries.dedup_by_key(|e| e.0);
        Self { entries }
    }

    pub fn get(&self, j: usize) -> L {
        match self.entries.binary_search_by_key(&j, |e| e.0) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => L::root(),
        }
    }

    /// Copy with coordinate `j` set to `value`.
    pub fn with(&self, j: usize, value: L) -> Self {
        let mut entries = self.entries.clone();
        match entries.binary_search_by_key(&j, |e| e.0) {
            Ok(pos) => {
                if value.is_root() {
                    entries.remove(pos);
                } else {
                    entries[pos].1 = value;
                }
            }
            Err(pos) => {
                if !value.is_root() {
                    entries.insert(pos, (j, value));
                }
            }
        }
        Self { entries }
    }

    /// Active coordinates with their letters, in increasing coordinate order.
    pub fn support(&self) -> impl Iterator<Item = (usize, L)> + '_ {
        self.entries.iter().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// `|ν|₁` generalized: sum of letter depths.
    pub fn degree(&self) -> u32 {
        self.entries.iter().map(|e| e.1.depth()).sum()
    }

    /// One past the largest active coordinate (0 for the null index).
    pub fn active_dim(&self) -> usize {
        self.entries.last().map_or(0, |e| e.0 + 1)
    }

    pub fn to_dense(&self, len: usize) -> Vec<L> {
        let mut out = vec![L::root(); len.max(self.active_dim())];
        for &(j, l) in &self.entries {
            out[j] = l;
        }
        out
    }

    /// `ν̃ ≤ ν` componentwise, following each coordinate's ancestor chain.
    pub fn le(&self, other: &Self) -> bool {
        self.entries.iter().all(|&(j, l)| {
            let mut cur = Some(other.get(j));
            while let Some(c) = cur {
                if c == l {
                    return true;
                }
                if c.depth() <= l.depth() {
                    return false;
                }
                cur = c.parent();
            }
            false
        })
    }

    /// Lower neighbors `ν − e_j` (one per active coordinate).
    pub fn lower_neighbors(&self) -> impl Iterator<Item = Self> + '_ {
        self.entries.iter().map(move |&(j, l)| {
            let p = l.parent().expect("non-root letter has a parent");
            self.with(j, p)
        })
    }

    /// Upper neighbors restricted to coordinates `0..dims`.
    pub fn upper_neighbors(&self, dims: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for j in 0..dims {
            for c in self.get(j).children() {
                out.push(self.with(j, c));
            }
        }
        out
    }
}

impl MultiIndex {
    /// Kronecker sequence `e_j` (0-based coordinate).
    pub fn unit(j: usize) -> Self {
        Self { entries: vec![(j, 1)] }
    }

    /// Dense prefix up to the support maximum, at least one entry long.
    pub fn dense_prefix(&self) -> Vec<u32> {
        self.to_dense(1)
    }
}

/// Canonical total order: by degree `|ν|₁`, then at the first coordinate
/// where the two differ, the index with the *larger* letter comes first.
/// Ties in weight-driven selections therefore favor mass in earlier
/// coordinates, e.g. `(1,0) < (0,1)` and `(2,0) < (1,1) < (0,2)`.
impl<L: Letter> Ord for Multi<L> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let dims = self.active_dim().max(other.active_dim());
            for j in 0..dims {
                let (a, b) = (self.get(j), other.get(j));
                if a != b {
                    return b.cmp(&a);
                }
            }
            Ordering::Equal
        })
    }
}

impl<L: Letter> PartialOrd for Multi<L> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<L: Letter> fmt::Debug for Multi<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.to_dense(1).iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l:?}")?;
        }
        write!(f, ")")
    }
}

impl<L: Letter> Serialize for Multi<L> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_dense(1).serialize(s)
    }
}

impl<'de, L: Letter> Deserialize<'de> for Multi<L> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let dense = Vec::<L>::deserialize(d)?;
        Ok(Self::from_dense(&dense))
    }
}

/// True iff every lower neighbor of every member is a member.
pub fn is_downward_closed<L: Letter>(members: &[Multi<L>]) -> bool {
    let set: std::collections::HashSet<&Multi<L>> = members.iter().collect();
    members
        .iter()
        .all(|nu| nu.lower_neighbors().all(|low| set.contains(&low)))
}

/// Finite downward closed set with a nested enumeration: every prefix of
/// `members()` is itself downward closed, and the first member is `0_F`.
#[derive(Clone)]
pub struct IndexSet<L: Letter = u32> {
    members: Vec<Multi<L>>,
    position: HashMap<Multi<L>, usize>,
}

impl<L: Letter> IndexSet<L> {
    /// `{0_F}`.
    pub fn root() -> Self {
        let zero = Multi::zero();
        let mut position = HashMap::new();
        position.insert(zero.clone(), 0);
        Self { members: vec![zero], position }
    }

    /// Accepts members in the given order, which must be a nested
    /// enumeration starting at `0_F`.
    pub fn from_ordered(members: Vec<Multi<L>>) -> Result<Self> {
        let mut iter = members.into_iter();
        match iter.next() {
            Some(first) if first.is_zero() => {}
            _ => {
                return Err(Error::InvalidIndexSet(
                    "enumeration must start with the null multi-index".into(),
                ))
            }
        }
        let mut set = Self::root();
        for nu in iter {
            set.push(nu)?;
        }
        Ok(set)
    }

    /// Accepts members in any order; they are enumerated in canonical order,
    /// which is always nested because lower neighbors have smaller degree.
    pub fn from_unordered(members: impl IntoIterator<Item = Multi<L>>) -> Result<Self> {
        let sorted: BTreeSet<Multi<L>> = members.into_iter().collect();
        Self::from_ordered(sorted.into_iter().collect())
    }

    /// Appends `ν`, which must be new and have all lower neighbors present.
    pub fn push(&mut self, nu: Multi<L>) -> Result<()> {
        if self.position.contains_key(&nu) {
            return Err(Error::InvalidIndexSet(format!("duplicate member {nu:?}")));
        }
        if let Some(missing) = nu.lower_neighbors().find(|low| !self.contains(low)) {
            return Err(Error::NotDownwardClosed(format!(
                "{nu:?} requires {missing:?}"
            )));
        }
        self.position.insert(nu.clone(), self.members.len());
        self.members.push(nu);
        Ok(())
    }

    pub fn can_add(&self, nu: &Multi<L>) -> bool {
        !self.contains(nu) && nu.lower_neighbors().all(|low| self.contains(&low))
    }

    pub fn contains(&self, nu: &Multi<L>) -> bool {
        self.position.contains_key(nu)
    }

    pub fn position(&self, nu: &Multi<L>) -> Option<usize> {
        self.position.get(nu).copied()
    }

    pub fn members(&self) -> &[Multi<L>] {
        &self.members
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Multi<L>> {
        self.members.iter()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// Always false: the root is a member.
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `j(Λ)`: number of active coordinates, 0 for `{0_F}`.
    pub fn active_dim(&self) -> usize {
        self.members.iter().map(Multi::active_dim).max().unwrap_or(0)
    }

    /// Active coordinates form the initial segment `0..active_dim()`.
    pub fn is_anchored(&self) -> bool {
        let mut active = vec![false; self.active_dim()];
        for nu in &self.members {
            for (j, _) in nu.support() {
                active[j] = true;
            }
        }
        active.into_iter().all(|a| a)
    }

    /// First `k` members as a new set.
    pub fn prefix(&self, k: usize) -> Self {
        Self::from_ordered(self.members[..k.min(self.len())].to_vec())
            .expect("prefixes of a nested enumeration are downward closed")
    }

    /// `N(Λ)` restricted to coordinates `0..dims`, in canonical order.
    pub fn neighbors(&self, dims: usize) -> Vec<Multi<L>> {
        let mut out = BTreeSet::new();
        for mu in &self.members {
            for nu in mu.upper_neighbors(dims) {
                if self.can_add(&nu) {
                    out.insert(nu);
                }
            }
        }
        out.into_iter().collect()
    }

    /// Anchored neighbors `Ñ(Λ)`: neighbors supported in the first
    /// `j(Λ) + 1` coordinates.
    pub fn anchored_neighbors(&self) -> Vec<Multi<L>> {
        self.neighbors(self.active_dim() + 1)
    }

    /// Largest letter used at each coordinate `0..active_dim()`, by depth.
    pub fn max_letters(&self) -> Vec<L> {
        let mut out = vec![L::root(); self.active_dim()];
        for nu in &self.members {
            for (j, l) in nu.support() {
                if l.depth() > out[j].depth() {
                    out[j] = l;
                }
            }
        }
        out
    }
}

impl IndexSet<u32> {
    /// `R_ν = {ν̃ ≤ ν}`, enumerated in canonical order.
    pub fn rectangle(nu: &MultiIndex) -> Self {
        let dense = nu.to_dense(0);
        let mut members = vec![MultiIndex::zero()];
        for (j, &top) in dense.iter().enumerate() {
            let base = members.clone();
            for k in 1..=top {
                members.extend(base.iter().map(|m| m.with(j, k)));
            }
        }
        Self::from_unordered(members).expect("rectangles are downward closed")
    }

    /// `{ν : |ν|₁ ≤ degree}` in `dims` variables.
    pub fn total_degree(dims: usize, degree: u32) -> Self {
        let mut members = vec![MultiIndex::zero()];
        let mut frontier = members.clone();
        for _ in 0..degree {
            let mut next = BTreeSet::new();
            for mu in &frontier {
                next.extend(mu.upper_neighbors(dims));
            }
            frontier = next.into_iter().collect();
            members.extend(frontier.iter().cloned());
        }
        Self::from_unordered(members).expect("total degree sets are downward closed")
    }
}

impl<L: Letter> fmt::Debug for IndexSet<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.members.iter()).finish()
    }
}

impl<L: Letter> PartialEq for IndexSet<L> {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members
    }
}

/// Serialized as a JSON array of dense prefixes in enumeration order, e.g.
/// `[[0],[1],[0,1]]`.
impl<L: Letter> Serialize for IndexSet<L> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.members.serialize(s)
    }
}

impl<'de, L: Letter> Deserialize<'de> for IndexSet<L> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let members = Vec::<Multi<L>>::deserialize(d)?;
        Self::from_ordered(members).map_err(serde::de::Error::custom)
    }
}
