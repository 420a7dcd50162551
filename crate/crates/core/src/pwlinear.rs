//! Hierarchical piecewise-linear interpolation on the dyadic tree.
//!
//! The alphabet `S` is the chain `λ₋₁ → λ₁ → (0,0)` followed by a binary
//! tree: `(0,0)` has children `(1,−1)` and `(1,0)`, and every `(j,k)` with
//! `j ≥ 1` has children `(j+1, 2k)` and `(j+1, 2k+1)`. Points are
//! `t_{λ₋₁} = −1`, `t_{λ₁} = 1`, `t_{(0,0)} = 0` and
//! `t_{(j,k)} = (2k+1)/2^j` for `j ≥ 1`; basis
//! functions are `B_{λ₋₁} ≡ 1`, `B_{λ₁} = (1+t)/2` and
//! `B_{(j,k)} = H(2^j (t − t_{(j,k)}))` with the hat `H(t) = max(0, 1−|t|)`.
//!
//! Multi-indices over `S` reuse [`Multi`], [`IndexSet`] and the
//! interpolation and adaptive drivers unchanged.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::interpolation::{HierarchicalBasis, HierarchicalInterpolant};
use crate::multiindex::{IndexSet, Letter, Multi};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeIndex {
    /// `λ₋₁`, the root.
    Minus,
    /// `λ₁`.
    Plus,
    /// `(j, k)`.
    Node { j: u32, k: i64 },
}

pub type TreeMulti = Multi<TreeIndex>;
pub type TreeIndexSet = IndexSet<TreeIndex>;
pub type PlInterpolant = HierarchicalInterpolant<PlBasis>;

impl TreeIndex {
    pub fn node(j: u32, k: i64) -> Result<Self> {
        let ok = if j == 0 { k == 0 } else { (-(1i64 << (j - 1))..(1i64 << (j - 1))).contains(&k) };
        if !ok {
            return Err(Error::InvalidArgument(format!("({j},{k}) is not a tree node")));
        }
        Ok(TreeIndex::Node { j, k })
    }

    pub fn point(self) -> f64 {
        match self {
            TreeIndex::Minus => -1.0,
            TreeIndex::Plus => 1.0,
            TreeIndex::Node { j: 0, .. } => 0.0,
            TreeIndex::Node { j, k } => (2 * k + 1) as f64 / (1u64 << j) as f64,
        }
    }

    pub fn eval(self, t: f64) -> f64 {
        match self {
            TreeIndex::Minus => 1.0,
            TreeIndex::Plus => 0.5 * (1.0 + t),
            TreeIndex::Node { j, .. } => {
                let s = (1u64 << j) as f64 * (t - self.point());
                (1.0 - s.abs()).max(0.0)
            }
        }
    }

    /// All letters of depth at most `depth`, parents before children.
    pub fn up_to_depth(depth: u32) -> Vec<TreeIndex> {
        let mut out = vec![TreeIndex::Minus];
        let mut frontier = vec![TreeIndex::Minus];
        for _ in 0..depth {
            frontier = frontier.iter().flat_map(|l| l.children()).collect();
            out.extend(frontier.iter().copied());
        }
        out
    }
}

impl Letter for TreeIndex {
    fn root() -> Self {
        TreeIndex::Minus
    }

    fn depth(self) -> u32 {
        match self {
            TreeIndex::Minus => 0,
            TreeIndex::Plus => 1,
            TreeIndex::Node { j, .. } => j + 2,
        }
    }

    fn parent(self) -> Option<Self> {
        match self {
            TreeIndex::Minus => None,
            TreeIndex::Plus => Some(TreeIndex::Minus),
            TreeIndex::Node { j: 0, .. } => Some(TreeIndex::Plus),
            TreeIndex::Node { j: 1, .. } => Some(TreeIndex::Node { j: 0, k: 0 }),
            TreeIndex::Node { j, k } => Some(TreeIndex::Node { j: j - 1, k: k.div_euclid(2) }),
        }
    }

    fn children(self) -> Vec<Self> {
        match self {
            TreeIndex::Minus => vec![TreeIndex::Plus],
            TreeIndex::Plus => vec![TreeIndex::Node { j: 0, k: 0 }],
            TreeIndex::Node { j: 0, .. } => vec![TreeIndex::Node { j: 1, k: -1 }, TreeIndex::Node { j: 1, k: 0 }],
            TreeIndex::Node { j, k } => vec![TreeIndex::Node { j: j + 1, k: 2 * k }, TreeIndex::Node { j: j + 1, k: 2 * k + 1 }],
        }
    }
}

impl fmt::Display for TreeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeIndex::Minus => write!(f, "m1"),
            TreeIndex::Plus => write!(f, "p1"),
            TreeIndex::Node { j, k } => write!(f, "{j}.{k}"),
        }
    }
}

impl fmt::Debug for TreeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for TreeIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m1" => Ok(TreeIndex::Minus),
            "p1" => Ok(TreeIndex::Plus),
            _ => {
                let bad = || Error::InvalidArgument(format!("bad tree index tag {s:?}"));
                let (j, k) = s.split_once('.').ok_or_else(bad)?;
                let j: u32 = j.parse().map_err(|_| bad())?;
                let k: i64 = k.parse().map_err(|_| bad())?;
                TreeIndex::node(j, k)
            }
        }
    }
}

impl Serialize for TreeIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TreeIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The hat basis on `S`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlBasis;

impl HierarchicalBasis for PlBasis {
    type Letter = TreeIndex;

    fn prepare(&mut self, _letter: TreeIndex) {}

    fn point(&self, letter: TreeIndex) -> f64 {
        letter.point()
    }

    fn eval(&self, letter: TreeIndex, t: f64) -> f64 {
        letter.eval(t)
    }

    fn lp_norm(&self, letter: TreeIndex, p: f64) -> f64 {
        if p.is_infinite() {
            return 1.0;
        }
        let integral = match letter {
            TreeIndex::Minus => 1.0,
            TreeIndex::Plus => 1.0 / (p + 1.0),
            TreeIndex::Node { j, .. } => (0.5f64).powi(j as i32) / (p + 1.0),
        };
        integral.powf(1.0 / p)
    }

    fn descriptor(&self) -> serde_json::Value {
        serde_json::json!({ "kind": "dyadic-hat" })
    }
}

/// `I_Λ u` in the hat basis.
pub fn pl_interpolate<T: crate::Target + ?Sized>(target: &T, set: &TreeIndexSet) -> Result<PlInterpolant> {
    HierarchicalInterpolant::interpolate(target, set, PlBasis)
}

/// The full one-dimensional tree down to depth `depth`.
pub fn full_tree(depth: u32) -> TreeIndexSet {
    let members = TreeIndex::up_to_depth(depth)
        .into_iter()
        .map(|l| Multi::from_sparse([(0, l)]))
        .collect();
    IndexSet::from_ordered(members).expect("tree levels are downward closed")
}
