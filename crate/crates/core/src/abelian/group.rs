use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{BlError, Result};
use crate::intmat::{smith, Int, IntMatrix};

/// `Z^n × Z/d₁ × … × Z/d_t` in invariant-factor form (`d_i ≥ 2`, `d_i | d_{i+1}`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FgAbGroup {
    free_rank: usize,
    invariant_factors: Vec<Int>,
}

impl FgAbGroup {
    pub fn new(free_rank: usize, invariant_factors: Vec<Int>) -> Result<Self> {
        for (i, d) in invariant_factors.iter().enumerate() {
            if *d < Int::from(2) {
                return Err(BlError::InvalidGroup(format!(
                    "invariant factor {d} must be at least 2"
                )));
            }
            if i + 1 < invariant_factors.len() && !invariant_factors[i + 1].is_multiple_of(d) {
                return Err(BlError::InvalidGroup(format!(
                    "invariant factors {} and {} break the divisibility chain",
                    d,
                    invariant_factors[i + 1]
                )));
            }
        }
        Ok(FgAbGroup {
            free_rank,
            invariant_factors,
        })
    }

    pub fn from_u64(free_rank: usize, factors: &[u64]) -> Result<Self> {
        Self::new(free_rank, factors.iter().map(|&d| Int::from(d)).collect())
    }

    pub fn free(n: usize) -> Self {
        FgAbGroup {
            free_rank: n,
            invariant_factors: Vec::new(),
        }
    }

    pub fn cyclic(d: u64) -> Self {
        if d <= 1 {
            return Self::trivial();
        }
        FgAbGroup {
            free_rank: 0,
            invariant_factors: vec![Int::from(d)],
        }
    }

    pub fn trivial() -> Self {
        Self::free(0)
    }

    /// Normalizes `Z^n × ∏ Z/m_i` for arbitrary moduli `m_i ≥ 0` (0 meaning a
    /// free factor, 1 a trivial one). Returns the invariant-factor group and the
    /// isomorphism from the given presentation coordinates
    /// (`n` free coordinates followed by one per modulus).
    pub fn from_cyclic_factors(free_rank: usize, moduli: &[Int]) -> Result<(Self, Homomorphism)> {
        if moduli.iter().any(|m| m.is_negative()) {
            return Err(BlError::InvalidGroup("negative modulus".into()));
        }
        let n = free_rank + moduli.len();
        let mut coord_moduli = vec![Int::zero(); free_rank];
        coord_moduli.extend(moduli.iter().cloned());
        let source = ProductGroup::from_moduli(coord_moduli.clone());
        let rows: Vec<Vec<Int>> = coord_moduli
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.is_zero())
            .map(|(i, m)| {
                let mut r = vec![Int::zero(); n];
                r[i] = m.clone();
                r
            })
            .collect();
        let (group, proj) = lattice_quotient(n, &rows);
        let hom = Homomorphism {
            source,
            target: ProductGroup::single(group.clone()),
            matrix: proj,
        };
        Ok((group, hom))
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn invariant_factors(&self) -> &[Int] {
        &self.invariant_factors
    }

    pub fn torsion_len(&self) -> usize {
        self.invariant_factors.len()
    }

    /// Number of coordinates `n + t`.
    pub fn ngens(&self) -> usize {
        self.free_rank + self.invariant_factors.len()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.ngens() == 0
    }

    /// Order of the torsion part.
    pub fn torsion_order(&self) -> Int {
        self.invariant_factors.iter().product()
    }

    pub fn order(&self) -> Option<Int> {
        self.is_finite().then(|| self.torsion_order())
    }

    /// Per-coordinate moduli: 0 for free coordinates.
    pub fn moduli(&self) -> Vec<Int> {
        let mut m = vec![Int::zero(); self.free_rank];
        m.extend(self.invariant_factors.iter().cloned());
        m
    }

    /// Torsion part as its own (finite) group.
    pub fn torsion_part(&self) -> FgAbGroup {
        FgAbGroup {
            free_rank: 0,
            invariant_factors: self.invariant_factors.clone(),
        }
    }

    pub fn element(&self, coords: Vec<Int>) -> Result<GroupElement> {
        GroupElement::new(&self.moduli(), coords)
    }
}

impl fmt::Display for FgAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.free_rank == 1 {
            parts.push("Z".to_string());
        } else if self.free_rank > 1 {
            parts.push(format!("Z^{}", self.free_rank));
        }
        for d in &self.invariant_factors {
            parts.push(format!("Z/{d}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" x "))
        }
    }
}

/// An element of a coordinate group; torsion coordinates reduced into `[0, d)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    coords: Vec<Int>,
}

impl GroupElement {
    pub fn new(moduli: &[Int], coords: Vec<Int>) -> Result<Self> {
        if coords.len() != moduli.len() {
            return Err(BlError::DimensionMismatch(format!(
                "element has {} coordinates, group has {}",
                coords.len(),
                moduli.len()
            )));
        }
        Ok(GroupElement {
            coords: reduce_coords(moduli, coords),
        })
    }

    pub fn coords(&self) -> &[Int] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Int> {
        self.coords
    }
}

pub(crate) fn reduce_coords(moduli: &[Int], mut coords: Vec<Int>) -> Vec<Int> {
    for (x, m) in coords.iter_mut().zip(moduli) {
        if !m.is_zero() {
            *x = x.mod_floor(m);
        }
    }
    coords
}

/// A finite product `G₁ × … × G_m`, coordinates concatenated factor by factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProductGroup {
    factors: Vec<FgAbGroup>,
    /// Cached per-coordinate moduli (0 = free).
    moduli: Vec<Int>,
}

impl ProductGroup {
    pub fn new(factors: Vec<FgAbGroup>) -> Self {
        let moduli = factors.iter().flat_map(FgAbGroup::moduli).collect();
        ProductGroup { factors, moduli }
    }

    pub fn single(g: FgAbGroup) -> Self {
        Self::new(vec![g])
    }

    /// A coordinate group with arbitrary per-coordinate moduli (one cyclic or
    /// free factor per coordinate).
    pub fn from_moduli(moduli: Vec<Int>) -> Self {
        let factors = moduli
            .iter()
            .map(|m| {
                if m.is_zero() {
                    FgAbGroup::free(1)
                } else if m.is_one() {
                    // Z/1 is kept as a coordinate; it carries no information.
                    FgAbGroup {
                        free_rank: 0,
                        invariant_factors: vec![Int::one()],
                    }
                } else {
                    FgAbGroup {
                        free_rank: 0,
                        invariant_factors: vec![m.clone()],
                    }
                }
            })
            .collect();
        ProductGroup { factors, moduli }
    }

    pub fn factors(&self) -> &[FgAbGroup] {
        &self.factors
    }

    pub fn factor(&self, j: usize) -> &FgAbGroup {
        &self.factors[j]
    }

    pub fn nfactors(&self) -> usize {
        self.factors.len()
    }

    pub fn moduli(&self) -> &[Int] {
        &self.moduli
    }

    pub fn dim(&self) -> usize {
        self.moduli.len()
    }

    /// Coordinate range of factor `j`.
    pub fn block(&self, j: usize) -> std::ops::Range<usize> {
        let start: usize = self.factors[..j].iter().map(FgAbGroup::ngens).sum();
        start..start + self.factors[j].ngens()
    }

    /// Positions of the free coordinates.
    pub fn free_positions(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.moduli[i].is_zero()).collect()
    }

    pub fn torsion_positions(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| !self.moduli[i].is_zero()).collect()
    }

    pub fn free_rank(&self) -> usize {
        self.factors.iter().map(FgAbGroup::free_rank).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank() == 0
    }

    pub fn torsion_order(&self) -> Int {
        self.moduli.iter().filter(|m| !m.is_zero()).product()
    }

    /// Generators `d e_i` of the relation lattice.
    pub fn relation_rows(&self) -> Vec<Vec<Int>> {
        let n = self.dim();
        self.moduli
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.is_zero())
            .map(|(i, m)| {
                let mut r = vec![Int::zero(); n];
                r[i] = m.clone();
                r
            })
            .collect()
    }

    pub fn element(&self, coords: Vec<Int>) -> Result<GroupElement> {
        GroupElement::new(&self.moduli, coords)
    }

    /// Coordinate projection onto factor `j`.
    pub fn projection(&self, j: usize) -> Homomorphism {
        let block = self.block(j);
        let mut m = IntMatrix::zeros(block.len(), self.dim());
        for (r, c) in block.enumerate() {
            m[(r, c)] = Int::one();
        }
        Homomorphism {
            source: self.clone(),
            target: ProductGroup::single(self.factors[j].clone()),
            matrix: m,
        }
    }

    /// Mixed-radix decoding of an element index (finite groups only); the
    /// last coordinate varies fastest.
    pub fn decode_index(&self, mut index: u64) -> Vec<u64> {
        let mods = self.small_moduli();
        let mut out = vec![0u64; mods.len()];
        for i in (0..mods.len()).rev() {
            out[i] = index % mods[i];
            index /= mods[i];
        }
        out
    }

    pub fn encode_index(&self, coords: &[u64]) -> u64 {
        let mods = self.small_moduli();
        coords
            .iter()
            .zip(&mods)
            .fold(0u64, |acc, (x, m)| acc * m + (x % m))
    }

    /// Moduli as machine integers; panics on free coordinates.
    pub fn small_moduli(&self) -> Vec<u64> {
        self.moduli
            .iter()
            .map(|m| {
                assert!(!m.is_zero(), "element indexing needs a finite group");
                m.to_u64().expect("modulus too large")
            })
            .collect()
    }

    pub fn order_u64(&self) -> Option<u64> {
        if !self.is_finite() {
            return None;
        }
        self.torsion_order().to_u64()
    }
}

/// A homomorphism between coordinate groups, acting on column vectors:
/// `target_coords = matrix · source_coords`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homomorphism {
    pub source: ProductGroup,
    pub target: ProductGroup,
    pub matrix: IntMatrix,
}

impl Homomorphism {
    pub fn new(source: ProductGroup, target: ProductGroup, matrix: IntMatrix) -> Result<Self> {
        if matrix.nrows() != target.dim() || matrix.ncols() != source.dim() {
            return Err(BlError::DimensionMismatch(format!(
                "matrix is {}x{}, expected {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                target.dim(),
                source.dim()
            )));
        }
        let h = Homomorphism {
            source,
            target,
            matrix,
        };
        if !h.is_well_defined() {
            return Err(BlError::InvalidGroup(
                "matrix does not respect the source torsion relations".into(),
            ));
        }
        Ok(h)
    }

    pub fn identity(g: &ProductGroup) -> Self {
        Homomorphism {
            source: g.clone(),
            target: g.clone(),
            matrix: IntMatrix::identity(g.dim()),
        }
    }

    /// `d · column` must vanish in the target for each source torsion
    /// coordinate of order `d`.
    pub fn is_well_defined(&self) -> bool {
        let tm = self.target.moduli();
        for (c, d) in self.source.moduli().iter().enumerate() {
            if d.is_zero() {
                continue;
            }
            for (r, m) in tm.iter().enumerate() {
                let v = &self.matrix[(r, c)] * d;
                let ok = if m.is_zero() {
                    v.is_zero()
                } else {
                    v.is_multiple_of(m)
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    pub fn apply(&self, x: &GroupElement) -> Result<GroupElement> {
        if x.coords().len() != self.source.dim() {
            return Err(BlError::DimensionMismatch("element not in the source".into()));
        }
        self.target.element(self.matrix.mul_vec(x.coords()))
    }

    pub fn apply_coords(&self, x: &[Int]) -> Vec<Int> {
        reduce_coords(self.target.moduli(), self.matrix.mul_vec(x))
    }

    pub fn compose(&self, first: &Homomorphism) -> Result<Homomorphism> {
        if first.target != self.source {
            return Err(BlError::DimensionMismatch("composition domain mismatch".into()));
        }
        Ok(Homomorphism {
            source: first.source.clone(),
            target: self.target.clone(),
            matrix: self.matrix.mul(&first.matrix),
        })
    }
}

/// `Z^n / L` for the lattice `L` spanned by `rows`, in invariant-factor form,
/// together with the projection matrix from `Z^n` coordinates.
pub(crate) fn lattice_quotient(n: usize, rows: &[Vec<Int>]) -> (FgAbGroup, IntMatrix) {
    let b = IntMatrix::from_rows(n, rows);
    let sm = smith(&b);
    let diag = sm.diagonal();
    let vt = sm.v.transpose();
    let mut free_rows = Vec::new();
    let mut torsion_rows = Vec::new();
    let mut factors = Vec::new();
    for i in 0..n {
        if i >= sm.rank {
            free_rows.push(vt.row_vec(i));
        } else if !diag[i].is_one() {
            torsion_rows.push(vt.row_vec(i));
            factors.push(diag[i].clone());
        }
    }
    let group = FgAbGroup {
        free_rank: free_rows.len(),
        invariant_factors: factors,
    };
    let mut all = free_rows;
    all.extend(torsion_rows);
    (group, IntMatrix::from_rows(n, &all))
}
