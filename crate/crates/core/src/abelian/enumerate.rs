use std::collections::{HashSet, VecDeque};

use super::group::ProductGroup;
use super::subgroup::SubgroupPres;
use crate::error::{BlError, Result};
use crate::intmat::Int;

/// Default cap on the order of a group whose subgroups are enumerated.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000;

const MAX_SUBGROUP_COUNT: usize = 500_000;

/// Element-level view of a finite coordinate group: every element is an
/// index in mixed radix (last coordinate fastest).
#[derive(Clone, Debug)]
pub struct IndexedGroup {
    moduli: Vec<u64>,
    order: u64,
}

impl IndexedGroup {
    pub fn new(group: &ProductGroup) -> Result<Self> {
        let order = group
            .order_u64()
            .ok_or_else(|| BlError::InvalidGroup("element indexing needs a finite group".into()))?;
        Ok(IndexedGroup {
            moduli: group.small_moduli(),
            order,
        })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn decode(&self, mut index: u64) -> Vec<u64> {
        let mut out = vec![0u64; self.moduli.len()];
        for i in (0..self.moduli.len()).rev() {
            out[i] = index % self.moduli[i];
            index /= self.moduli[i];
        }
        out
    }

    pub fn encode(&self, coords: &[u64]) -> u64 {
        coords
            .iter()
            .zip(&self.moduli)
            .fold(0u64, |acc, (x, m)| acc * m + (x % m))
    }

    pub fn add(&self, mut a: u64, mut b: u64) -> u64 {
        let (mut out, mut place) = (0, 1);
        for &m in self.moduli.iter().rev() {
            out += (a % m + b % m) % m * place;
            place *= m;
            a /= m;
            b /= m;
        }
        out
    }

    /// Encodes integer coordinates, reducing each modulo its modulus.
    pub fn encode_int(&self, coords: &[Int]) -> u64 {
        let small: Vec<u64> = coords
            .iter()
            .zip(&self.moduli)
            .map(|(x, &m)| {
                let r = x % Int::from(m);
                let r = if r < Int::from(0) { r + Int::from(m) } else { r };
                u64::try_from(r).expect("reduced coordinate fits")
            })
            .collect();
        self.encode(&small)
    }
}

/// A subgroup of an [`IndexedGroup`] as a membership bitset.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexSubgroup {
    bits: Vec<u64>,
    order: u64,
    generators: Vec<u64>,
}

impl IndexSubgroup {
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    pub fn contains(&self, x: u64) -> bool {
        self.bits[(x / 64) as usize] >> (x % 64) & 1 == 1
    }

    pub fn elements(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            (0..64u64).filter_map(move |b| (word >> b & 1 == 1).then_some(w as u64 * 64 + b))
        })
    }

    /// Number of distinct values of `map` on the subgroup.
    pub fn image_size(&self, map: &[u64]) -> u64 {
        let img: HashSet<u64> = self.elements().map(|x| map[x as usize]).collect();
        img.len() as u64
    }
}

fn trivial_subgroup(n: u64) -> IndexSubgroup {
    let mut bits = vec![0u64; n.div_ceil(64) as usize];
    bits[0] = 1;
    IndexSubgroup {
        bits,
        order: 1,
        generators: Vec::new(),
    }
}

fn join_cyclic(g: &IndexedGroup, s: &IndexSubgroup, x: u64) -> IndexSubgroup {
    let members: Vec<u64> = s.elements().collect();
    let mut out = s.clone();
    out.generators.push(x);
    let mut step = x;
    while !out.contains(step) {
        for &m in &members {
            let y = g.add(m, step);
            out.bits[(y / 64) as usize] |= 1 << (y % 64);
        }
        out.order += members.len() as u64;
        step = g.add(step, x);
    }
    out
}

/// All subgroups of a finite group, by breadth-first joins with cyclic
/// subgroups. Sorted by order, then by membership.
pub fn enumerate_index_subgroups(g: &IndexedGroup, cap: u64) -> Result<Vec<IndexSubgroup>> {
    if g.order() > cap {
        return Err(BlError::Capacity {
            what: "group order for subgroup enumeration".into(),
            size: g.order() as u128,
            cap: cap as u128,
        });
    }
    let n = g.order();
    let start = trivial_subgroup(n);
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    seen.insert(start.bits.clone());
    let mut queue = VecDeque::from([start.clone()]);
    let mut found = vec![start];
    while let Some(s) = queue.pop_front() {
        // Elements already known to give a join computed for `s`.
        let mut done = s.bits.clone();
        let members: Vec<u64> = s.elements().collect();
        for x in 0..n {
            if done[(x / 64) as usize] >> (x % 64) & 1 == 1 {
                continue;
            }
            let j = join_cyclic(g, &s, x);
            // `k·x + s` generates `j` modulo `s` whenever k is prime to the index.
            let index = j.order / s.order;
            let mut multiple = x;
            for k in 1..=index {
                if num_integer::gcd(k, index) == 1 {
                    for &m in &members {
                        let y = g.add(m, multiple);
                        done[(y / 64) as usize] |= 1 << (y % 64);
                    }
                }
                multiple = g.add(multiple, x);
            }
            if seen.insert(j.bits.clone()) {
                if found.len() >= MAX_SUBGROUP_COUNT {
                    return Err(BlError::Capacity {
                        what: "number of subgroups".into(),
                        size: found.len() as u128 + 1,
                        cap: MAX_SUBGROUP_COUNT as u128,
                    });
                }
                found.push(j.clone());
                queue.push_back(j);
            }
        }
    }
    found.sort_by(|a, b| a.order.cmp(&b.order).then_with(|| a.bits.cmp(&b.bits)));
    Ok(found)
}

/// All subgroups of a finite subgroup `h`, as canonical presentations in
/// `h`'s parent, sorted by canonical order.
pub fn enumerate_finite_subgroups(h: &SubgroupPres, cap: u64) -> Result<Vec<SubgroupPres>> {
    if h.rank() != 0 {
        return Err(BlError::InvalidGroup("subgroup enumeration needs a finite group".into()));
    }
    let (abs, emb) = h.structure();
    let abs = ProductGroup::single(abs);
    let ig = IndexedGroup::new(&abs)?;
    let subs = enumerate_index_subgroups(&ig, cap)?;
    let mut out: Vec<SubgroupPres> = subs
        .iter()
        .map(|s| {
            let gens: Vec<Vec<Int>> = s
                .generators()
                .iter()
                .map(|&x| {
                    let c: Vec<Int> = ig.decode(x).into_iter().map(Int::from).collect();
                    emb.matrix.mul_vec(&c)
                })
                .collect();
            SubgroupPres::from_rows(h.parent(), &gens)
        })
        .collect::<Result<_>>()?;
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::group::FgAbGroup;
    use std::collections::BTreeSet;

    /// Independent oracle: closures of all pairs of elements, which covers
    /// every subgroup of a group with at most two invariant factors.
    fn pair_closure_oracle(mods: &[u64]) -> BTreeSet<BTreeSet<Vec<u64>>> {
        let mut all = vec![vec![]];
        for &m in mods {
            all = all
                .into_iter()
                .flat_map(|v: Vec<u64>| {
                    (0..m).map(move |x| {
                        let mut w = v.clone();
                        w.push(x);
                        w
                    })
                })
                .collect();
        }
        let add = |a: &Vec<u64>, b: &Vec<u64>| -> Vec<u64> {
            a.iter().zip(b).zip(mods).map(|((x, y), m)| (x + y) % m).collect()
        };
        let mut out = BTreeSet::new();
        for a in &all {
            for b in &all {
                let mut set: BTreeSet<Vec<u64>> = BTreeSet::new();
                set.insert(vec![0; mods.len()]);
                loop {
                    let cur: Vec<Vec<u64>> = set.iter().cloned().collect();
                    let before = set.len();
                    for c in &cur {
                        set.insert(add(c, a));
                        set.insert(add(c, b));
                    }
                    if set.len() == before {
                        break;
                    }
                }
                out.insert(set);
            }
        }
        out
    }

    fn counts_by_order(sets: impl Iterator<Item = u64>) -> Vec<(u64, usize)> {
        let mut m = std::collections::BTreeMap::new();
        for o in sets {
            *m.entry(o).or_insert(0) += 1;
        }
        m.into_iter().collect()
    }

    #[test]
    fn matches_pair_closure_oracle() {
        for mods in [vec![12u64], vec![2, 4], vec![3, 9], vec![2, 6], vec![4, 8], vec![6, 12]] {
            let pg = ProductGroup::single(FgAbGroup::from_u64(0, &mods).unwrap());
            let ig = IndexedGroup::new(&pg).unwrap();
            let subs = enumerate_index_subgroups(&ig, 1000).unwrap();
            let oracle = pair_closure_oracle(&mods);
            assert_eq!(
                counts_by_order(subs.iter().map(|s| s.order())),
                counts_by_order(oracle.iter().map(|s| s.len() as u64)),
                "moduli {mods:?}"
            );
        }
    }

    #[test]
    fn known_counts() {
        let count = |mods: &[u64]| {
            let pg = ProductGroup::single(FgAbGroup::from_u64(0, mods).unwrap());
            enumerate_index_subgroups(&IndexedGroup::new(&pg).unwrap(), 1000)
                .unwrap()
                .len()
        };
        assert_eq!(count(&[4]), 3);
        assert_eq!(count(&[2, 2]), 5);
        assert_eq!(count(&[2, 2, 2]), 16);
        assert_eq!(count(&[]), 1);
    }

    #[test]
    fn presentations_in_parent() {
        let p = ProductGroup::new(vec![FgAbGroup::cyclic(4), FgAbGroup::cyclic(2)]);
        let h = SubgroupPres::from_i64_rows(&p, &[&[1, 0]]).unwrap();
        let subs = enumerate_finite_subgroups(&h, 100).unwrap();
        assert_eq!(subs.len(), 3);
        assert!(subs.iter().all(|s| s.is_subgroup_of(&h)));
        let mut orders: Vec<u64> = subs.iter().map(|s| s.order_u64().unwrap()).collect();
        orders.sort();
        assert_eq!(orders, vec![1, 2, 4]);
    }

    #[test]
    fn cap_is_enforced() {
        let pg = ProductGroup::single(FgAbGroup::cyclic(50));
        let err = enumerate_index_subgroups(&IndexedGroup::new(&pg).unwrap(), 10).unwrap_err();
        assert!(matches!(err, BlError::Capacity { .. }));
    }
}
