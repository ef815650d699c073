//! Finitely generated abelian groups, their subgroups, and annihilators.

pub mod dual;
pub mod enumerate;
pub mod group;
pub mod subgroup;

pub use dual::{CompactSubgroup, ComponentData};
pub use enumerate::{
    enumerate_finite_subgroups, enumerate_index_subgroups, IndexSubgroup, IndexedGroup,
    DEFAULT_ENUMERATION_CAP,
};
pub use group::{FgAbGroup, GroupElement, Homomorphism, ProductGroup};
pub use subgroup::SubgroupPres;

use crate::error::Result;
use crate::intmat::{Int, IntMatrix};

/// Smith form `U·M·V = S` as the triple `(U, S, V)`.
pub fn snf(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let s = crate::intmat::smith(m);
    (s.u, s.s, s.v)
}

/// Canonical presentation of the subgroup generated by integer vectors.
pub fn canonicalize_subgroup(parent: &ProductGroup, gens: &[Vec<Int>]) -> Result<SubgroupPres> {
    SubgroupPres::from_rows(parent, gens)
}

/// `parent / h` with the quotient map.
pub fn quotient_group(h: &SubgroupPres) -> (FgAbGroup, Homomorphism) {
    h.quotient()
}

pub fn torsion_subgroup(h: &SubgroupPres) -> SubgroupPres {
    h.torsion()
}

pub fn subgroup_image(h: &SubgroupPres, map: &Homomorphism) -> Result<SubgroupPres> {
    h.image(map)
}

pub fn subgroup_rank(h: &SubgroupPres) -> usize {
    h.rank()
}

pub fn annihilator(h: &SubgroupPres) -> CompactSubgroup {
    CompactSubgroup::annihilator_of(h)
}
