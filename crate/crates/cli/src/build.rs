//! Turning a parsed instance into validated core objects.

use std::sync::Arc;

use entropy_core::blocks::{AbelianBlocks, Band, IndexSet, IntMatrix, Periodic, Window};
use entropy_core::discrete::{
    AbelianEndo, BandedEndo, CayleyBlocks, CayleyEndo, CayleySubgroup, FiniteSubgroup, SparseVec, WindowSubgroup,
};
use entropy_core::finabel::FiniteAbelianGroup;
use entropy_core::gengroup::FiniteGroup;
use entropy_core::profinite::{CylinderSubgroup, ProGroup, RowFiniteEndo};
use entropy_core::{Error, StabilizationPolicy};

use crate::schema::{
    BlockType, Coord, CylinderSpec, EndoSpec, IndexSetSpec, Instance, Kind, NamedEndo, NamedIndexSet, Rule,
    SubgroupSpec, SCHEMA,
};
use crate::CliError;

/// A validated instance.
#[derive(Clone, Debug)]
pub struct Model {
    pub kind: Kind,
    pub policy: StabilizationPolicy,
    pub side: Side,
}

#[derive(Clone, Debug)]
pub enum Side {
    Discrete {
        endo: BandedEndo,
        family: Vec<FiniteSubgroup>,
    },
    Compact {
        group: Arc<ProGroup>,
        endo: RowFiniteEndo,
        cylinders: Vec<CylinderSubgroup>,
    },
}

fn validation(context: impl std::fmt::Display, e: Error) -> CliError {
    CliError::from_core(e).context(context)
}

fn index_set(spec: IndexSetSpec) -> IndexSet {
    match spec {
        IndexSetSpec::Finite(n) => IndexSet::Finite(n),
        IndexSetSpec::Named(NamedIndexSet::N) => IndexSet::Naturals,
        IndexSetSpec::Named(NamedIndexSet::Z) => IndexSet::Integers,
    }
}

enum Blocks {
    Abelian(AbelianBlocks),
    Cayley(CayleyBlocks),
}

fn periodic<T>(prefix: Vec<T>, cycle: Vec<T>, period: usize, what: &str) -> Result<Periodic<T>, CliError> {
    if cycle.len() != period {
        return Err(CliError::validation(format!(
            "{what}: period is {period} but {} cycle entries are given",
            cycle.len()
        )));
    }
    Ok(Periodic { prefix, cycle })
}

fn blocks(inst: &Instance) -> Result<Blocks, CliError> {
    let set = index_set(inst.group.index_set);
    let spec = &inst.group.blocks;
    let all = spec.prefix.iter().chain(&spec.types);
    if all.clone().all(|b| matches!(b, BlockType::Abelian(_))) {
        let conv = |b: &BlockType| -> Result<FiniteAbelianGroup, CliError> {
            let BlockType::Abelian(m) = b else { unreachable!() };
            FiniteAbelianGroup::new(m.clone()).map_err(|e| validation("group.blocks", e))
        };
        let prefix = spec.prefix.iter().map(conv).collect::<Result<_, _>>()?;
        let cycle = spec.types.iter().map(conv).collect::<Result<_, _>>()?;
        let p = periodic(prefix, cycle, spec.period, "group.blocks")?;
        return AbelianBlocks::new(set, p)
            .map(Blocks::Abelian)
            .map_err(|e| validation("group.blocks", e));
    }
    if inst.kind != Kind::Discrete {
        return Err(CliError::validation(format!(
            "group.blocks: {} instances need abelian blocks",
            inst.kind.name()
        )));
    }
    let conv = |b: &BlockType| -> Result<Arc<FiniteGroup>, CliError> {
        let g = match b {
            BlockType::Abelian(m) => {
                let [n] = m.as_slice() else {
                    return Err(CliError::validation(
                        "group.blocks: mixing non-abelian blocks with multi-factor abelian blocks is not supported",
                    ));
                };
                FiniteGroup::cyclic(*n as usize)
            }
            BlockType::Permutations { permutations } => FiniteGroup::from_permutations(permutations),
            BlockType::Table { table } => FiniteGroup::from_table(table),
        };
        g.map(Arc::new).map_err(|e| validation("group.blocks", e))
    };
    let prefix = spec.prefix.iter().map(conv).collect::<Result<_, _>>()?;
    let cycle = spec.types.iter().map(conv).collect::<Result<_, _>>()?;
    let p = periodic(prefix, cycle, spec.period, "group.blocks")?;
    CayleyBlocks::new(set, p)
        .map(Blocks::Cayley)
        .map_err(|e| validation("group.blocks", e))
}

fn matrices(rows: &[Vec<Rule>], part: &str) -> Result<Vec<Vec<IntMatrix>>, CliError> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(t, r)| match r {
                    Rule::Matrix(m) => Ok(m.clone()),
                    // a rank-one block written as a flat list
                    Rule::Map(v) if v.len() == 1 => Ok(vec![vec![v[0] as i64]]),
                    Rule::Map(_) => Err(CliError::validation(format!(
                        "endo.{part}[{i}][{t}]: abelian blocks need integer matrices"
                    ))),
                })
                .collect()
        })
        .collect()
}

fn maps(rows: &[Vec<Rule>], part: &str) -> Result<Vec<Vec<Vec<usize>>>, CliError> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(t, r)| match r {
                    Rule::Map(v) => Ok(v.clone()),
                    Rule::Matrix(_) => Err(CliError::validation(format!(
                        "endo.{part}[{i}][{t}]: permutation and table blocks need element maps"
                    ))),
                })
                .collect()
        })
        .collect()
}

fn band(spec: &EndoSpec, blocks: &AbelianBlocks) -> Result<Band, CliError> {
    Ok(match spec {
        EndoSpec::Named(NamedEndo::Identity) => Band::identity(blocks),
        EndoSpec::Named(NamedEndo::Zero) => Band::zero(blocks),
        EndoSpec::Shift { shift } => Band::shift(blocks, *shift),
        EndoSpec::Banded {
            offset,
            width,
            period,
            prefix,
            rules,
        } => Band {
            offset: *offset,
            width: *width,
            rules: periodic(matrices(prefix, "prefix")?, matrices(rules, "rules")?, *period, "endo")?,
        },
    })
}

fn cayley_endo(spec: &EndoSpec, blocks: &CayleyBlocks) -> Result<CayleyEndo, CliError> {
    let per_block = |f: &dyn Fn(&FiniteGroup) -> Vec<usize>| -> Periodic<Vec<Vec<usize>>> {
        Periodic {
            prefix: blocks.blocks.prefix.iter().map(|g| vec![f(g)]).collect(),
            cycle: blocks.blocks.cycle.iter().map(|g| vec![f(g)]).collect(),
        }
    };
    let identity = |g: &FiniteGroup| (0..g.order()).collect::<Vec<_>>();
    let (offset, width, rules) = match spec {
        EndoSpec::Named(NamedEndo::Identity) => (0, 1, per_block(&identity)),
        EndoSpec::Named(NamedEndo::Zero) => (0, 1, per_block(&|g: &FiniteGroup| vec![g.identity(); g.order()])),
        EndoSpec::Shift { shift } => (*shift, 1, per_block(&identity)),
        EndoSpec::Banded {
            offset,
            width,
            period,
            prefix,
            rules,
        } => (
            *offset,
            *width,
            periodic(maps(prefix, "prefix")?, maps(rules, "rules")?, *period, "endo")?,
        ),
    };
    CayleyEndo::new(blocks.clone(), offset, width, rules).map_err(|e| validation("endo", e))
}

fn abelian_subgroup(blocks: &AbelianBlocks, spec: &SubgroupSpec, k: usize) -> Result<WindowSubgroup, CliError> {
    let gens: Vec<SparseVec> = spec
        .generators
        .iter()
        .map(|g| {
            g.iter()
                .map(|(i, c)| match c {
                    Coord::Vector(v) => Ok((*i, v.clone())),
                    Coord::Element(x) => Ok((*i, vec![*x as i64])),
                })
                .collect::<Result<_, CliError>>()
        })
        .collect::<Result<_, _>>()?;
    WindowSubgroup::from_generators(blocks, &gens).map_err(|e| validation(format!("subgroups[{k}]"), e))
}

fn cayley_subgroup(blocks: &CayleyBlocks, spec: &SubgroupSpec, k: usize) -> Result<CayleySubgroup, CliError> {
    let gens: Vec<Vec<(i64, usize)>> = spec
        .generators
        .iter()
        .map(|g| {
            g.iter()
                .map(|(i, c)| match c {
                    Coord::Element(x) => Ok((*i, *x)),
                    Coord::Vector(_) => Err(CliError::validation(format!(
                        "subgroups[{k}]: permutation and table blocks take element indices"
                    ))),
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    CayleySubgroup::generated(blocks, &gens).map_err(|e| validation(format!("subgroups[{k}]"), e))
}

fn window(w: [i64; 2]) -> Window {
    Window::new(w[0], w[1])
}

fn cylinder(group: &Arc<ProGroup>, spec: &CylinderSpec, k: usize) -> Result<CylinderSubgroup, CliError> {
    let at = format!("cylinders[{k}]");
    match spec {
        CylinderSpec::Pinned { pinned } => {
            let w = window(*pinned);
            if group.blocks().clip(w) != w {
                return Err(CliError::validation(format!("{at}: window outside the index set")));
            }
            Ok(CylinderSubgroup::pinned(group, w))
        }
        CylinderSpec::Core { window: w, generators } => {
            CylinderSubgroup::from_generators(group, window(*w), generators).map_err(|e| validation(at, e))
        }
    }
}

/// Validates everything the commands will touch.
pub fn build(inst: &Instance) -> Result<Model, CliError> {
    if inst.schema != SCHEMA {
        return Err(CliError::validation(format!(
            "schema: expected \"{SCHEMA}\", found \"{}\"",
            inst.schema
        )));
    }
    let policy: StabilizationPolicy = inst.policy.into();
    if policy.max_n == 0 || policy.stall_window == 0 || policy.window_budget == 0 {
        return Err(CliError::validation("policy: budgets must be positive"));
    }
    let blocks = blocks(inst)?;
    let side = if inst.kind.is_discrete() {
        if !inst.cylinders.is_empty() {
            return Err(CliError::validation("cylinders: only profinite and depth instances take cylinders"));
        }
        match blocks {
            Blocks::Abelian(b) => {
                let endo = AbelianEndo::new(b.clone(), band(&inst.endo, &b)?).map_err(|e| validation("endo", e))?;
                let family = inst
                    .subgroups
                    .iter()
                    .enumerate()
                    .map(|(k, s)| abelian_subgroup(&b, s, k).map(FiniteSubgroup::Abelian))
                    .collect::<Result<_, _>>()?;
                Side::Discrete {
                    endo: BandedEndo::Abelian(endo),
                    family,
                }
            }
            Blocks::Cayley(b) => {
                let endo = cayley_endo(&inst.endo, &b)?;
                let family = inst
                    .subgroups
                    .iter()
                    .enumerate()
                    .map(|(k, s)| cayley_subgroup(&b, s, k).map(FiniteSubgroup::Cayley))
                    .collect::<Result<_, _>>()?;
                Side::Discrete {
                    endo: BandedEndo::Cayley(endo),
                    family,
                }
            }
        }
    } else {
        if !inst.subgroups.is_empty() {
            return Err(CliError::validation("subgroups: only discrete and bridge instances take subgroups"));
        }
        let Blocks::Abelian(b) = blocks else {
            unreachable!("rejected above")
        };
        let group = ProGroup::from_blocks(b.clone()).map_err(|e| validation("group", e))?;
        let endo = RowFiniteEndo::new(&group, band(&inst.endo, &b)?).map_err(|e| validation("endo", e))?;
        let cylinders = inst
            .cylinders
            .iter()
            .enumerate()
            .map(|(k, c)| cylinder(&group, c, k))
            .collect::<Result<_, _>>()?;
        Side::Compact {
            group,
            endo,
            cylinders,
        }
    };
    Ok(Model {
        kind: inst.kind,
        policy,
        side,
    })
}
