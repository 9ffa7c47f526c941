//! On-disk instance format (`"schema": "entctl/1"`).

use serde::{Deserialize, Serialize};

use entropy_core::StabilizationPolicy;

pub const SCHEMA: &str = "entctl/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub schema: String,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub group: GroupSpec,
    pub endo: EndoSpec,
    /// Finite subgroups of the discrete group (discrete and bridge kinds).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subgroups: Vec<SubgroupSpec>,
    /// Open cylinder subgroups of the compact group (profinite and depth kinds).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cylinders: Vec<CylinderSpec>,
    #[serde(default)]
    pub policy: PolicySpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Discrete,
    Profinite,
    Bridge,
    Depth,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Discrete => "discrete",
            Kind::Profinite => "profinite",
            Kind::Bridge => "bridge",
            Kind::Depth => "depth",
        }
    }

    /// Discrete kinds read band matrices as `B_i → B_{i+s+t}`, compact kinds
    /// as `B_{j+s+t} → B_j`.
    pub fn is_discrete(self) -> bool {
        matches!(self, Kind::Discrete | Kind::Bridge)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndexSetSpec {
    Finite(usize),
    Named(NamedIndexSet),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NamedIndexSet {
    N,
    Z,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub index_set: IndexSetSpec,
    pub blocks: BlocksSpec,
}

/// `prefix` then `types` repeated; `period` must equal `types.len()`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlocksSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub prefix: Vec<BlockType>,
    pub period: usize,
    pub types: Vec<BlockType>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BlockType {
    /// `Z/d_1 ⊕ … ⊕ Z/d_k`
    Abelian(Vec<i64>),
    Permutations {
        permutations: Vec<Vec<usize>>,
    },
    Table {
        table: Vec<Vec<usize>>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EndoSpec {
    Named(NamedEndo),
    Shift {
        shift: i64,
    },
    Banded {
        offset: i64,
        width: usize,
        period: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        prefix: Vec<Vec<Rule>>,
        rules: Vec<Vec<Rule>>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedEndo {
    Identity,
    Zero,
}

/// One band entry: an integer matrix (one row per target coordinate) for
/// abelian blocks, an element map for permutation or table blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rule {
    Matrix(Vec<Vec<i64>>),
    Map(Vec<usize>),
}

/// Generators as `[block index, coordinates]` (abelian) or
/// `[block index, element]` (permutation/table blocks) pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubgroupSpec {
    pub generators: Vec<Vec<(i64, Coord)>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coord {
    Element(usize),
    Vector(Vec<i64>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CylinderSpec {
    /// `{x : x_i = 0 for lo <= i < hi}`
    Pinned { pinned: [i64; 2] },
    /// `{x : x|_[lo,hi) ∈ ⟨generators⟩}` with flat window coordinates.
    Core { window: [i64; 2], generators: Vec<Vec<i64>> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicySpec {
    pub max_n: usize,
    pub stall_window: usize,
    pub window_budget: usize,
}

impl Default for PolicySpec {
    fn default() -> Self {
        let p = StabilizationPolicy::default();
        PolicySpec {
            max_n: p.max_n,
            stall_window: p.stall_window,
            window_budget: p.window_budget,
        }
    }
}

impl From<PolicySpec> for StabilizationPolicy {
    fn from(p: PolicySpec) -> Self {
        StabilizationPolicy {
            max_n: p.max_n,
            stall_window: p.stall_window,
            window_budget: p.window_budget,
        }
    }
}
