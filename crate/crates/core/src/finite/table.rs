use std::collections::{HashSet, VecDeque};
use std::fmt;

use crate::abelian::{FgAbGroup, IndexedGroup, ProductGroup};
use crate::error::{BlError, Result};

/// Default cap on the order of a group whose subgroups are enumerated.
pub const DEFAULT_FINITE_ORDER_CAP: usize = 1000;

const MAX_SUBGROUPS: usize = 500_000;

/// A finite group given by its multiplication table. Elements are the
/// indices `0..order`; `mul[a][b]` is the index of `a·b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroupTable {
    order: usize,
    mul: Vec<Vec<usize>>,
    identity: usize,
    inv: Vec<usize>,
    labels: Option<Vec<String>>,
}

/// The group law that a candidate table violates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LawViolation {
    Shape(String),
    OutOfRange { row: usize, col: usize, value: usize },
    NoIdentity,
    NoInverse { element: usize },
    Associativity { a: usize, b: usize, c: usize, left: usize, right: usize },
}

impl fmt::Display for LawViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawViolation::Shape(s) => write!(f, "table shape: {s}"),
            LawViolation::OutOfRange { row, col, value } => {
                write!(f, "closure: entry ({row}, {col}) = {value} is not an element")
            }
            LawViolation::NoIdentity => write!(f, "identity law: no two-sided identity element"),
            LawViolation::NoInverse { element } => {
                write!(f, "inverse law: element {element} has no two-sided inverse")
            }
            LawViolation::Associativity { a, b, c, left, right } => write!(
                f,
                "associativity: ({a}·{b})·{c} = {left} but {a}·({b}·{c}) = {right}"
            ),
        }
    }
}

impl FiniteGroupTable {
    /// Validates every group law exhaustively.
    pub fn from_table(mul: Vec<Vec<usize>>) -> Result<Self> {
        Self::check_laws(&mul).map_err(|v| BlError::InvalidGroup(v.to_string()))
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.order {
            return Err(BlError::InvalidGroup(format!(
                "{} labels for a group of order {}",
                labels.len(),
                self.order
            )));
        }
        let distinct: HashSet<&String> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(BlError::InvalidGroup("element labels must be distinct".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// The full law check, reporting the first violated law.
    pub fn check_laws(mul: &[Vec<usize>]) -> std::result::Result<Self, LawViolation> {
        let n = mul.len();
        if n == 0 {
            return Err(LawViolation::Shape("empty table".into()));
        }
        for (r, row) in mul.iter().enumerate() {
            if row.len() != n {
                return Err(LawViolation::Shape(format!("row {r} has {} entries, expected {n}", row.len())));
            }
            if let Some((c, &v)) = row.iter().enumerate().find(|(_, &v)| v >= n) {
                return Err(LawViolation::OutOfRange { row: r, col: c, value: v });
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| mul[e][x] == x && mul[x][e] == x))
            .ok_or(LawViolation::NoIdentity)?;
        let mut inv = vec![0; n];
        for (x, slot) in inv.iter_mut().enumerate() {
            *slot = (0..n)
                .find(|&y| mul[x][y] == identity && mul[y][x] == identity)
                .ok_or(LawViolation::NoInverse { element: x })?;
        }
        for a in 0..n {
            for b in 0..n {
                let ab = mul[a][b];
                for c in 0..n {
                    let left = mul[ab][c];
                    let right = mul[a][mul[b][c]];
                    if left != right {
                        return Err(LawViolation::Associativity { a, b, c, left, right });
                    }
                }
            }
        }
        Ok(FiniteGroupTable {
            order: n,
            mul: mul.to_vec(),
            identity,
            inv,
            labels: None,
        })
    }

    /// Skips the associativity check; for tables inherited from groups
    /// already validated.
    pub(crate) fn from_trusted(mul: Vec<Vec<usize>>, identity: usize) -> Self {
        let n = mul.len();
        let mut inv = vec![0; n];
        for (x, slot) in inv.iter_mut().enumerate() {
            *slot = (0..n).find(|&y| mul[x][y] == identity).expect("inverse exists");
        }
        FiniteGroupTable {
            order: n,
            mul,
            identity,
            inv,
            labels: None,
        }
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(BlError::InvalidGroup("cyclic group of order 0".into()));
        }
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Ok(Self::from_trusted(mul, 0))
    }

    /// Dihedral group of order `2n`; element `a + n·b` is `r^a s^b`.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(BlError::InvalidGroup("dihedral group needs n ≥ 1".into()));
        }
        let elem = |a: usize, b: usize| a + n * b;
        let mut mul = vec![vec![0; 2 * n]; 2 * n];
        for (x, row) in mul.iter_mut().enumerate() {
            let (a, b) = (x % n, x / n);
            for (y, slot) in row.iter_mut().enumerate() {
                let (c, d) = (y % n, y / n);
                let rot = if b == 0 { (a + c) % n } else { (a + n - c) % n };
                *slot = elem(rot, (b + d) % 2);
            }
        }
        let mut labels = Vec::new();
        for b in 0..2 {
            for a in 0..n {
                labels.push(match (a, b) {
                    (0, 0) => "e".to_string(),
                    (a, 0) => format!("r{a}"),
                    (0, _) => "s".to_string(),
                    (a, _) => format!("r{a}s"),
                });
            }
        }
        Self::from_trusted(mul, 0).with_labels(labels)
    }

    /// Symmetric group on `n` letters, permutations in lexicographic order;
    /// the product `σ·τ` applies `τ` first.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n > 6 {
            return Err(BlError::Capacity {
                what: "symmetric group degree".into(),
                size: n as u128,
                cap: 6,
            });
        }
        let mut perms: Vec<Vec<usize>> = vec![(0..n).collect()];
        let mut cur: Vec<usize> = (0..n).collect();
        while next_permutation(&mut cur) {
            perms.push(cur.clone());
        }
        let index = |p: &[usize]| perms.iter().position(|q| q == p).expect("permutation listed");
        let mul = perms
            .iter()
            .map(|s| {
                perms
                    .iter()
                    .map(|t| index(&t.iter().map(|&i| s[i]).collect::<Vec<_>>()))
                    .collect()
            })
            .collect();
        let labels = perms
            .iter()
            .map(|p| p.iter().map(|i| (i + 1).to_string()).collect::<String>())
            .collect();
        Self::from_trusted(mul, 0).with_labels(labels)
    }

    /// Quaternion group `{±1, ±i, ±j, ±k}` in that order.
    pub fn quaternion() -> Self {
        // Unit `u ∈ {1, i, j, k}` with sign bit: index = 2·u + sign.
        const UNIT: [[(usize, bool); 4]; 4] = [
            [(0, false), (1, false), (2, false), (3, false)],
            [(1, false), (0, true), (3, false), (2, true)],
            [(2, false), (3, true), (0, true), (1, false)],
            [(3, false), (2, false), (1, true), (0, true)],
        ];
        let mut mul = vec![vec![0; 8]; 8];
        for (x, row) in mul.iter_mut().enumerate() {
            for (y, slot) in row.iter_mut().enumerate() {
                let (u, v) = (x / 2, y / 2);
                let (w, neg) = UNIT[u][v];
                let sign = (x % 2 == 1) ^ (y % 2 == 1) ^ neg;
                *slot = 2 * w + sign as usize;
            }
        }
        let labels = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"].map(String::from).to_vec();
        Self::from_trusted(mul, 0).with_labels(labels).expect("eight labels")
    }

    /// Table of a finite abelian group in the mixed-radix indexing used by the
    /// abelian enumerator.
    pub fn from_abelian(g: &FgAbGroup) -> Result<Self> {
        let ig = IndexedGroup::new(&ProductGroup::single(g.clone()))?;
        let n = ig.order() as usize;
        let mul = (0..n as u64)
            .map(|a| (0..n as u64).map(|b| ig.add(a, b) as usize).collect())
            .collect();
        Ok(Self::from_trusted(mul, 0))
    }

    /// Looks up `Z/n`, `D_n`, `S_n`, `S3`, `Q8` and similar names.
    pub fn named(name: &str) -> Result<Self> {
        let t = name.trim();
        let lower = t.to_ascii_lowercase();
        let number = |s: &str| -> Result<usize> {
            s.trim()
                .parse()
                .map_err(|_| BlError::Parse(format!("unknown group name {name:?}")))
        };
        if lower == "q8" {
            return Ok(Self::quaternion());
        }
        if let Some(rest) = lower.strip_prefix("z/").or_else(|| lower.strip_prefix("c")) {
            return Self::cyclic(number(rest)?);
        }
        if let Some(rest) = lower.strip_prefix("d_").or_else(|| lower.strip_prefix('d')) {
            return Self::dihedral(number(rest)?);
        }
        if let Some(rest) = lower.strip_prefix("s_").or_else(|| lower.strip_prefix('s')) {
            return Self::symmetric(number(rest)?);
        }
        Err(BlError::Parse(format!("unknown group name {name:?}")))
    }

    /// Plain text form: `order N`, an optional `labels ...` line, then `N`
    /// rows of `N` indices. Lines starting with `#` are ignored.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut order = None;
        let mut labels = None;
        let mut rows: Vec<Vec<usize>> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| BlError::Parse(format!("line {}: {msg}", lineno + 1));
            if let Some(rest) = line.strip_prefix("order") {
                order = Some(rest.trim().parse::<usize>().map_err(|_| at(format!("bad order {:?}", rest.trim())))?);
            } else if let Some(rest) = line.strip_prefix("labels") {
                labels = Some(rest.split_whitespace().map(String::from).collect::<Vec<_>>());
            } else {
                let row = line
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<usize>().map_err(|_| at(format!("bad entry {s:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
        }
        let order = order.unwrap_or(rows.len());
        if rows.len() != order {
            return Err(BlError::Parse(format!("expected {order} table rows, found {}", rows.len())));
        }
        let g = Self::from_table(rows)?;
        match labels {
            Some(l) => g.with_labels(l),
            None => Ok(g),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("order {}\n", self.order);
        if let Some(l) = &self.labels {
            out.push_str(&format!("labels {}\n", l.join(" ")));
        }
        for row in &self.mul {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mul
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn inverses(&self) -> &[usize] {
        &self.inv
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, x: usize) -> String {
        match &self.labels {
            Some(l) => l[x].clone(),
            None => x.to_string(),
        }
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn element_order(&self, x: usize) -> usize {
        let mut k = 1;
        let mut y = x;
        while y != self.identity {
            y = self.mul[y][x];
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..a).all(|b| self.mul[a][b] == self.mul[b][a]))
    }

    /// The subgroup generated by `gens`.
    pub fn generate(&self, gens: &[usize]) -> TableSubgroup {
        let mut sub = TableSubgroup::trivial(self);
        let gens: Vec<usize> = gens.iter().copied().filter(|&g| g != self.identity).collect();
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &g in &gens {
                let y = self.mul[x][g];
                if sub.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        sub.generators = gens;
        sub
    }

    /// Checks that `set` is a subgroup and returns it.
    pub fn subgroup_from_elements(&self, set: &[usize]) -> Result<TableSubgroup> {
        let mut sub = TableSubgroup::trivial(self);
        for &x in set {
            if x >= self.order {
                return Err(BlError::NotSubgroup(format!("{x} is not an element")));
            }
            sub.insert(x);
        }
        let members = sub.elements();
        for &a in &members {
            if !sub.contains(self.inv[a]) {
                return Err(BlError::NotSubgroup(format!("inverse of {a} is missing")));
            }
            for &b in &members {
                if !sub.contains(self.mul[a][b]) {
                    return Err(BlError::NotSubgroup(format!("product {a}·{b} is missing")));
                }
            }
        }
        sub.generators = members;
        Ok(sub)
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// A subgroup of a [`FiniteGroupTable`] as a membership bitset.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TableSubgroup {
    bits: Vec<u64>,
    order: usize,
    generators: Vec<usize>,
}

impl TableSubgroup {
    fn trivial(g: &FiniteGroupTable) -> Self {
        let mut s = TableSubgroup {
            bits: vec![0; g.order.div_ceil(64)],
            order: 0,
            generators: Vec::new(),
        };
        s.insert(g.identity);
        s
    }

    fn insert(&mut self, x: usize) -> bool {
        let (w, b) = (x / 64, x % 64);
        if self.bits[w] >> b & 1 == 1 {
            return false;
        }
        self.bits[w] |= 1 << b;
        self.order += 1;
        true
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn contains(&self, x: usize) -> bool {
        self.bits.get(x / 64).is_some_and(|w| w >> (x % 64) & 1 == 1)
    }

    pub fn elements(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.order);
        for (w, &word) in self.bits.iter().enumerate() {
            let mut rest = word;
            while rest != 0 {
                let b = rest.trailing_zeros() as usize;
                out.push(w * 64 + b);
                rest &= rest - 1;
            }
        }
        out
    }

    pub fn is_subgroup_of(&self, other: &TableSubgroup) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// Number of distinct values of `map` on the subgroup.
    pub fn image_size(&self, map: &[usize]) -> usize {
        self.elements().iter().map(|&x| map[x]).collect::<HashSet<_>>().len()
    }
}

/// Every subgroup of `g`, obtained by joining subgroups with cyclic
/// subgroups until nothing new appears. Sorted by order, then membership.
pub fn enumerate_subgroups_nonabelian(g: &FiniteGroupTable, cap: usize) -> Result<Vec<TableSubgroup>> {
    if g.order > cap {
        return Err(BlError::Capacity {
            what: "group order for subgroup enumeration".into(),
            size: g.order as u128,
            cap: cap as u128,
        });
    }
    let mut cyclic: Vec<TableSubgroup> = Vec::new();
    let mut seen_cyclic: HashSet<Vec<u64>> = HashSet::new();
    for x in 0..g.order {
        let c = g.generate(&[x]);
        if c.order > 1 && seen_cyclic.insert(c.bits.clone()) {
            cyclic.push(c);
        }
    }
    let start = TableSubgroup::trivial(g);
    let mut seen: HashSet<Vec<u64>> = HashSet::from([start.bits.clone()]);
    let mut found = vec![start.clone()];
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        for c in &cyclic {
            if c.is_subgroup_of(&s) {
                continue;
            }
            let mut gens = s.generators.clone();
            gens.extend_from_slice(&c.generators);
            let j = g.generate(&gens);
            if seen.insert(j.bits.clone()) {
                if found.len() >= MAX_SUBGROUPS {
                    return Err(BlError::Capacity {
                        what: "number of subgroups".into(),
                        size: found.len() as u128 + 1,
                        cap: MAX_SUBGROUPS as u128,
                    });
                }
                found.push(j.clone());
                queue.push_back(j);
            }
        }
    }
    found.sort_by(|a, b| a.order.cmp(&b.order).then_with(|| a.elements().cmp(&b.elements())));
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_groups_are_groups() {
        for name in ["Z/5", "D4", "S3", "Q8", "S4", "D_5", "C12"] {
            let g = FiniteGroupTable::named(name).unwrap();
            FiniteGroupTable::check_laws(g.table()).unwrap();
        }
        assert_eq!(FiniteGroupTable::named("S3").unwrap().order(), 6);
        assert!(!FiniteGroupTable::named("S3").unwrap().is_abelian());
        assert!(!FiniteGroupTable::quaternion().is_abelian());
        assert!(FiniteGroupTable::named("x9").is_err());
    }

    #[test]
    fn law_diagnostics() {
        let not_assoc = vec![vec![0, 1, 2], vec![1, 0, 0], vec![2, 0, 0]];
        assert!(matches!(
            FiniteGroupTable::check_laws(&not_assoc),
            Err(LawViolation::NoInverse { .. }) | Err(LawViolation::Associativity { .. })
        ));
        let no_id = vec![vec![0, 0], vec![0, 0]];
        assert_eq!(FiniteGroupTable::check_laws(&no_id), Err(LawViolation::NoIdentity));
        let range = vec![vec![0, 2], vec![1, 0]];
        assert!(matches!(FiniteGroupTable::check_laws(&range), Err(LawViolation::OutOfRange { .. })));
        // A Latin square with identity that is not associative.
        let loop5 = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(FiniteGroupTable::check_laws(&loop5), Err(LawViolation::Associativity { .. })));
    }

    #[test]
    fn text_round_trip() {
        let g = FiniteGroupTable::named("S3").unwrap();
        let back = FiniteGroupTable::parse_text(&g.to_text()).unwrap();
        assert_eq!(back, g);
        let err = FiniteGroupTable::parse_text("order 2\n0 1\n1 x\n").unwrap_err();
        assert!(err.to_string().contains("line 3"));
    }

    #[test]
    fn element_orders() {
        let q = FiniteGroupTable::quaternion();
        let orders: Vec<usize> = (0..8).map(|x| q.element_order(x)).collect();
        assert_eq!(orders, vec![1, 2, 4, 4, 4, 4, 4, 4]);
    }
}
