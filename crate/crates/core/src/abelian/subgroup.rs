use std::fmt;

use num_traits::{One, ToPrimitive, Zero};

use super::group::{lattice_quotient, reduce_coords, FgAbGroup, GroupElement, Homomorphism, ProductGroup};
use crate::error::{BlError, Result};
use crate::intmat::{hermite_contains, hermite_rows, integer_kernel, smith, Int, IntMatrix};

/// A subgroup of a coordinate group, stored as the Hermite basis of its full
/// preimage lattice `L ⊆ Z^N` (which always contains the relation lattice).
/// Equal subgroups have identical presentations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SubgroupPres {
    parent: ProductGroup,
    basis: Vec<Vec<Int>>,
}

impl fmt::Debug for SubgroupPres {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .basis
            .iter()
            .map(|r| {
                let xs: Vec<String> = r.iter().map(|x| x.to_string()).collect();
                format!("({})", xs.join(","))
            })
            .collect();
        write!(f, "<{}>", rows.join(" "))
    }
}

impl PartialOrd for SubgroupPres {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SubgroupPres {
    /// Canonical-form order: lattice basis length, then lexicographic basis.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.basis
            .len()
            .cmp(&other.basis.len())
            .then_with(|| self.basis.cmp(&other.basis))
    }
}

impl SubgroupPres {
    /// Subgroup generated by raw integer coordinate vectors.
    pub fn from_rows(parent: &ProductGroup, gens: &[Vec<Int>]) -> Result<Self> {
        let n = parent.dim();
        for g in gens {
            if g.len() != n {
                return Err(BlError::DimensionMismatch(format!(
                    "generator has {} coordinates, parent has {n}",
                    g.len()
                )));
            }
        }
        let mut rows: Vec<Vec<Int>> = gens.to_vec();
        rows.extend(parent.relation_rows());
        Ok(SubgroupPres {
            parent: parent.clone(),
            basis: hermite_rows(&rows, n),
        })
    }

    pub fn from_i64_rows(parent: &ProductGroup, gens: &[&[i64]]) -> Result<Self> {
        let rows: Vec<Vec<Int>> = gens
            .iter()
            .map(|g| g.iter().map(|&x| Int::from(x)).collect())
            .collect();
        Self::from_rows(parent, &rows)
    }

    pub fn trivial(parent: &ProductGroup) -> Self {
        Self::from_rows(parent, &[]).expect("trivial subgroup")
    }

    pub fn full(parent: &ProductGroup) -> Self {
        let id = IntMatrix::identity(parent.dim()).rows_vec();
        Self::from_rows(parent, &id).expect("full subgroup")
    }

    pub fn parent(&self) -> &ProductGroup {
        &self.parent
    }

    /// Hermite basis of the preimage lattice, one row per basis vector.
    pub fn basis(&self) -> &[Vec<Int>] {
        &self.basis
    }

    pub fn basis_matrix(&self) -> IntMatrix {
        IntMatrix::from_rows(self.parent.dim(), &self.basis)
    }

    pub fn contains(&self, x: &[Int]) -> bool {
        x.len() == self.parent.dim() && hermite_contains(&self.basis, x)
    }

    pub fn contains_element(&self, x: &GroupElement) -> bool {
        self.contains(x.coords())
    }

    pub fn is_subgroup_of(&self, other: &SubgroupPres) -> bool {
        self.parent == other.parent && self.basis.iter().all(|b| other.contains(b))
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.len() == self.parent.torsion_positions().len()
            && self.basis.iter().all(|r| {
                // Only relation vectors remain.
                r.iter().filter(|x| !x.is_zero()).count() == 1
                    && r.iter()
                        .zip(self.parent.moduli())
                        .all(|(x, m)| x.is_zero() || x == m)
            })
    }

    pub fn join(&self, other: &SubgroupPres) -> Result<SubgroupPres> {
        if self.parent != other.parent {
            return Err(BlError::DimensionMismatch("join across different parents".into()));
        }
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        Self::from_rows(&self.parent, &rows)
    }

    pub fn intersection(&self, other: &SubgroupPres) -> Result<SubgroupPres> {
        if self.parent != other.parent {
            return Err(BlError::DimensionMismatch(
                "intersection across different parents".into(),
            ));
        }
        let n = self.parent.dim();
        let (r1, r2) = (self.basis.len(), other.basis.len());
        // a·B1 = b·B2  ⇔  (a, b) lies in the left kernel of [B1; -B2].
        let mut stacked = IntMatrix::zeros(r1 + r2, n);
        for (i, row) in self.basis.iter().enumerate() {
            for (c, x) in row.iter().enumerate() {
                stacked[(i, c)] = x.clone();
            }
        }
        for (i, row) in other.basis.iter().enumerate() {
            for (c, x) in row.iter().enumerate() {
                stacked[(r1 + i, c)] = -x.clone();
            }
        }
        let ker = integer_kernel(&stacked.transpose());
        let b1 = self.basis_matrix();
        let mut rows = Vec::new();
        for k in 0..ker.ncols() {
            let a: Vec<Int> = (0..r1).map(|i| ker[(i, k)].clone()).collect();
            let a = IntMatrix::from_rows(r1, &[a]);
            rows.push(a.mul(&b1).row_vec(0));
        }
        Self::from_rows(&self.parent, &rows)
    }

    /// Rank of the free part: `rank L − (number of torsion coordinates)`.
    pub fn rank(&self) -> usize {
        self.basis.len() - self.parent.torsion_positions().len()
    }

    /// The subgroup as an abstract group in invariant-factor form, with its
    /// embedding into the parent.
    pub fn structure(&self) -> (FgAbGroup, Homomorphism) {
        let n = self.parent.dim();
        let r = self.basis.len();
        let b = self.basis_matrix();
        // Coefficients of the relation vectors in the basis.
        let rel = self.parent.relation_rows();
        let coeff_rows: Vec<Vec<Int>> = rel.iter().map(|v| self.coefficients(v)).collect();
        let rmat = IntMatrix::from_rows(r, &coeff_rows);
        let sm = smith(&rmat);
        let diag = sm.diagonal();
        let w_inv_b = sm.v_inv.mul(&b);
        let mut free_cols = Vec::new();
        let mut tors_cols = Vec::new();
        let mut factors = Vec::new();
        for i in 0..r {
            let row = w_inv_b.row_vec(i);
            if i >= sm.rank {
                free_cols.push(row);
            } else if !diag[i].is_one() {
                tors_cols.push(row);
                factors.push(diag[i].clone());
            }
        }
        let group = FgAbGroup::new(free_cols.len(), factors).expect("smith form yields a chain");
        let mut cols = free_cols;
        cols.extend(tors_cols);
        let emb = Homomorphism {
            source: ProductGroup::single(group.clone()),
            target: self.parent.clone(),
            matrix: IntMatrix::from_columns(n, &cols),
        };
        (group, emb)
    }

    /// Integer coordinates of a lattice vector in the Hermite basis.
    fn coefficients(&self, v: &[Int]) -> Vec<Int> {
        let mut v = v.to_vec();
        let mut c = vec![Int::zero(); self.basis.len()];
        for (i, row) in self.basis.iter().enumerate() {
            let pc = row.iter().position(|x| !x.is_zero()).expect("nonzero basis row");
            let q = &v[pc] / &row[pc];
            if !q.is_zero() {
                for (x, y) in v.iter_mut().zip(row) {
                    *x -= &q * y;
                }
            }
            c[i] = q;
        }
        debug_assert!(v.iter().all(Zero::is_zero), "vector not in lattice");
        c
    }

    pub fn order(&self) -> Option<Int> {
        (self.rank() == 0).then(|| self.structure().0.torsion_order())
    }

    pub fn order_u64(&self) -> Option<u64> {
        self.order().and_then(|o| o.to_u64())
    }

    /// All elements (reduced coordinates) of a finite subgroup.
    pub fn elements(&self) -> Result<Vec<Vec<Int>>> {
        if self.rank() != 0 {
            return Err(BlError::InvalidGroup("subgroup is infinite".into()));
        }
        let (g, emb) = self.structure();
        let pg = ProductGroup::single(g);
        let order = pg.order_u64().ok_or_else(|| BlError::Capacity {
            what: "subgroup order".into(),
            size: u128::MAX,
            cap: u64::MAX as u128,
        })?;
        let mut out = Vec::with_capacity(order as usize);
        for idx in 0..order {
            let coords: Vec<Int> = pg.decode_index(idx).into_iter().map(Int::from).collect();
            out.push(emb.apply_coords(&coords));
        }
        Ok(out)
    }

    /// Elements of the subgroup with zero free coordinates.
    pub fn torsion(&self) -> SubgroupPres {
        let free = self.parent.free_positions();
        if free.is_empty() {
            return self.clone();
        }
        let b = self.basis_matrix();
        let bf = b.select_columns(&free);
        // Left kernel of the free block.
        let ker = integer_kernel(&bf.transpose());
        let mut rows = Vec::new();
        for k in 0..ker.ncols() {
            let c = IntMatrix::from_rows(b.nrows(), &[ker.column(k)]);
            rows.push(c.mul(&b).row_vec(0));
        }
        Self::from_rows(&self.parent, &rows).expect("torsion rows have parent length")
    }

    /// Free-coordinate projection of the preimage lattice, as rows.
    pub fn free_projection_rows(&self) -> Vec<Vec<Int>> {
        let free = self.parent.free_positions();
        let rows: Vec<Vec<Int>> = self
            .basis
            .iter()
            .map(|r| free.iter().map(|&i| r[i].clone()).collect())
            .collect();
        hermite_rows(&rows, free.len())
    }

    pub fn image(&self, h: &Homomorphism) -> Result<SubgroupPres> {
        if h.source != self.parent {
            return Err(BlError::DimensionMismatch(
                "subgroup does not live in the homomorphism's source".into(),
            ));
        }
        let rows: Vec<Vec<Int>> = self.basis.iter().map(|r| h.matrix.mul_vec(r)).collect();
        Self::from_rows(&h.target, &rows)
    }

    /// Preimage `h^{-1}(self)` inside the source of `h`.
    pub fn preimage(&self, h: &Homomorphism) -> Result<SubgroupPres> {
        if h.target != self.parent {
            return Err(BlError::DimensionMismatch("preimage target mismatch".into()));
        }
        // x ∈ Z^src with h x ∈ L  ⇔  (x, a) ∈ ker [h | -B^T].
        let (ns, nt, r) = (h.source.dim(), h.target.dim(), self.basis.len());
        let mut m = IntMatrix::zeros(nt, ns + r);
        for i in 0..nt {
            for j in 0..ns {
                m[(i, j)] = h.matrix[(i, j)].clone();
            }
            for (k, row) in self.basis.iter().enumerate() {
                m[(i, ns + k)] = -row[i].clone();
            }
        }
        let ker = integer_kernel(&m);
        let rows: Vec<Vec<Int>> = (0..ker.ncols())
            .map(|k| (0..ns).map(|i| ker[(i, k)].clone()).collect())
            .collect();
        Self::from_rows(&h.source, &rows)
    }

    /// `parent / self` in invariant-factor form with the quotient map.
    pub fn quotient(&self) -> (FgAbGroup, Homomorphism) {
        let (g, proj) = lattice_quotient(self.parent.dim(), &self.basis);
        let hom = Homomorphism {
            source: self.parent.clone(),
            target: ProductGroup::single(g.clone()),
            matrix: proj,
        };
        (g, hom)
    }

    /// Reduced coordinates of a vector.
    pub fn reduce(&self, x: Vec<Int>) -> Vec<Int> {
        reduce_coords(self.parent.moduli(), x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intmat::int_vec;

    fn z(n: usize) -> ProductGroup {
        ProductGroup::single(FgAbGroup::free(n))
    }

    #[test]
    fn canonical_presentation() {
        let p = z(2);
        let a = SubgroupPres::from_i64_rows(&p, &[&[2, 0], &[0, 2]]).unwrap();
        let b = SubgroupPres::from_i64_rows(&p, &[&[0, 2], &[2, 2], &[4, 0]]).unwrap();
        assert_eq!(a, b);
        let c = a.join(&SubgroupPres::from_i64_rows(&p, &[&[1, 1]]).unwrap()).unwrap();
        assert!(a.is_subgroup_of(&c) && a != c);
        assert!(c.contains(&int_vec(&[1, 1])));
        assert!(!a.contains(&int_vec(&[1, 1])));
    }

    #[test]
    fn trivial_and_full() {
        let p = ProductGroup::new(vec![FgAbGroup::free(1), FgAbGroup::cyclic(4)]);
        let t = SubgroupPres::trivial(&p);
        assert!(t.is_trivial());
        assert_eq!(t.rank(), 0);
        assert_eq!(t.order_u64(), Some(1));
        let f = SubgroupPres::full(&p);
        assert_eq!(f.rank(), 1);
        assert!(!f.is_trivial());
        assert_eq!(f.structure().0, FgAbGroup::from_u64(1, &[4]).unwrap());
    }

    #[test]
    fn intersection_of_lattices() {
        let p = z(2);
        let a = SubgroupPres::from_i64_rows(&p, &[&[2, 0], &[0, 1]]).unwrap();
        let b = SubgroupPres::from_i64_rows(&p, &[&[1, 0], &[0, 3]]).unwrap();
        let c = a.intersection(&b).unwrap();
        assert_eq!(c, SubgroupPres::from_i64_rows(&p, &[&[2, 0], &[0, 3]]).unwrap());
    }

    #[test]
    fn structure_of_diagonal() {
        let p = ProductGroup::new(vec![FgAbGroup::cyclic(2), FgAbGroup::cyclic(4)]);
        let h = SubgroupPres::from_i64_rows(&p, &[&[1, 1]]).unwrap();
        let (g, emb) = h.structure();
        assert_eq!(g, FgAbGroup::cyclic(4));
        assert!(emb.is_well_defined());
        assert_eq!(h.elements().unwrap().len(), 4);
        assert_eq!(h.torsion(), h);
    }

    #[test]
    fn preimage_under_doubling() {
        let p = ProductGroup::single(FgAbGroup::cyclic(4));
        let double = Homomorphism::new(p.clone(), p.clone(), IntMatrix::from_i64_rows(&[&[2]])).unwrap();
        let zero = SubgroupPres::trivial(&p);
        let k = zero.preimage(&double).unwrap();
        assert_eq!(k.order_u64(), Some(2));
    }
}
