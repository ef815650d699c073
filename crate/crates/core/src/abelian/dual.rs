use num_integer::Integer;
use num_traits::{One, Zero};

use super::group::{FgAbGroup, Homomorphism, ProductGroup};
use super::subgroup::SubgroupPres;
use crate::error::{BlError, Result};
use crate::exact::Rational;
use crate::intmat::{congruence_kernel, hermite_rows, integer_kernel, lcm_all, smith, Int, IntMatrix};

/// Reduces a rational vector into `[0, 1)^N`.
pub fn frac_vec(v: &[Rational]) -> Vec<Rational> {
    v.iter().map(|x| x - x.floor()).collect()
}

/// A closed subgroup of the dual of a coordinate group `G`.
///
/// The dual of `G = Z^n × ∏ Z/d` is realised inside `(R/Z)^N`: free
/// coordinates range over the circle and a `Z/d` coordinate over
/// `(1/d)Z/Z`. A closed subgroup is `torus + ⟨reps⟩` where the torus is the
/// image of the real span of a saturated integer lattice.
#[derive(Clone, Debug)]
pub struct CompactSubgroup {
    ambient: ProductGroup,
    torus: Vec<Vec<Int>>,
    reps: Vec<Vec<Rational>>,
    annihilator: SubgroupPres,
}

impl PartialEq for CompactSubgroup {
    fn eq(&self, other: &Self) -> bool {
        self.annihilator == other.annihilator
    }
}

impl Eq for CompactSubgroup {}

impl CompactSubgroup {
    /// Builds a closed subgroup from torus directions (integer vectors, zero
    /// on torsion coordinates) and rational component representatives.
    pub fn new(ambient: &ProductGroup, torus: &[Vec<Int>], reps: &[Vec<Rational>]) -> Result<Self> {
        let n = ambient.dim();
        let moduli = ambient.moduli();
        for t in torus {
            if t.len() != n {
                return Err(BlError::DimensionMismatch("torus vector length".into()));
            }
            for (x, m) in t.iter().zip(moduli) {
                if !m.is_zero() && !x.is_zero() {
                    return Err(BlError::InvalidGroup(
                        "torus directions must vanish on finite coordinates".into(),
                    ));
                }
            }
        }
        for r in reps {
            if r.len() != n {
                return Err(BlError::DimensionMismatch("representative length".into()));
            }
            for (x, m) in r.iter().zip(moduli) {
                if !m.is_zero() && !(x * Rational::from_integer(m.clone())).is_integer() {
                    return Err(BlError::InvalidGroup(format!(
                        "coordinate {x} is not a character of Z/{m}"
                    )));
                }
            }
        }
        let t = IntMatrix::from_rows(n, torus);
        // Lattice orthogonal to the torus, then the saturation of the torus.
        let ortho = integer_kernel(&t);
        let torus = if torus.is_empty() {
            Vec::new()
        } else {
            hermite_rows(&integer_kernel(&ortho.transpose()).columns_vec(), n)
        };
        let reps: Vec<Vec<Rational>> = reps.iter().map(|r| frac_vec(r)).collect();
        let mut lattice_rows = ortho.columns_vec();
        if !reps.is_empty() && ortho.ncols() > 0 {
            let den = lcm_all(reps.iter().flatten().map(|x| x.denom()));
            let scaled: Vec<Vec<Int>> = reps
                .iter()
                .map(|r| {
                    let row: Vec<Int> = r
                        .iter()
                        .map(|x| (x * Rational::from_integer(den.clone())).to_integer())
                        .collect();
                    (0..ortho.ncols())
                        .map(|c| row.iter().zip(ortho.column(c)).map(|(a, b)| a * b).sum())
                        .collect()
                })
                .collect();
            let a = IntMatrix::from_rows(ortho.ncols(), &scaled);
            let z = congruence_kernel(&a, &den);
            lattice_rows = ortho.mul(&z).columns_vec();
        }
        let annihilator = SubgroupPres::from_rows(ambient, &lattice_rows)?;
        Ok(CompactSubgroup {
            ambient: ambient.clone(),
            torus,
            reps,
            annihilator,
        })
    }

    /// The annihilator `H⊥` of a subgroup `H ≤ G` inside the dual of `G`.
    pub fn annihilator_of(h: &SubgroupPres) -> Self {
        let b = h.basis_matrix();
        let n = b.ncols();
        let r = b.nrows();
        let sm = smith(&b);
        let diag = sm.diagonal();
        let torus: Vec<Vec<Int>> = (r..n).map(|i| sm.v.column(i)).collect();
        let mut reps = Vec::new();
        for i in 0..r.min(n) {
            if diag[i] > Int::one() {
                let d = diag[i].clone();
                let rep: Vec<Rational> = sm
                    .v
                    .column(i)
                    .into_iter()
                    .map(|x| Rational::new(x, d.clone()))
                    .collect();
                reps.push(frac_vec(&rep));
            }
        }
        CompactSubgroup {
            ambient: h.parent().clone(),
            torus: hermite_rows(&torus, n),
            reps,
            annihilator: h.clone(),
        }
    }

    /// The full dual group.
    pub fn full(ambient: &ProductGroup) -> Self {
        Self::annihilator_of(&SubgroupPres::trivial(ambient))
    }

    pub fn trivial(ambient: &ProductGroup) -> Self {
        Self::annihilator_of(&SubgroupPres::full(ambient))
    }

    pub fn ambient(&self) -> &ProductGroup {
        &self.ambient
    }

    pub fn torus_lattice(&self) -> &[Vec<Int>] {
        &self.torus
    }

    pub fn component_reps(&self) -> &[Vec<Rational>] {
        &self.reps
    }

    /// Subgroup of `G` annihilated by every element of this group.
    pub fn annihilator(&self) -> &SubgroupPres {
        &self.annihilator
    }

    pub fn dim(&self) -> usize {
        self.torus.len()
    }

    /// Membership of a rational point, tested against the annihilator.
    pub fn contains(&self, c: &[Rational]) -> bool {
        c.len() == self.ambient.dim()
            && self.annihilator.basis().iter().all(|row| {
                let s: Rational = row
                    .iter()
                    .zip(c)
                    .map(|(a, x)| Rational::from_integer(a.clone()) * x)
                    .sum();
                s.is_integer()
            })
    }

    pub fn is_subgroup_of(&self, other: &CompactSubgroup) -> bool {
        self.ambient == other.ambient && other.annihilator.is_subgroup_of(&self.annihilator)
    }

    /// Dimension of the projection to factor `j` of the dual product.
    pub fn projected_dim(&self, j: usize) -> usize {
        let block = self.ambient.block(j);
        let rows: Vec<Vec<Int>> = self.torus.iter().map(|t| t[block.clone()].to_vec()).collect();
        IntMatrix::from_rows(block.len(), &rows).rank()
    }

    /// The component group `S / m(S)` with the induced maps to each factor's
    /// component group.
    pub fn component_quotient(&self) -> ComponentData {
        let n = self.ambient.dim();
        let k = self.torus.len();
        let t = IntMatrix::from_rows(n, &self.torus);
        let (vt, vinv_t) = if k == 0 {
            (IntMatrix::identity(n), IntMatrix::identity(n))
        } else {
            let sm = smith(&t);
            (sm.v.transpose(), sm.v_inv.transpose())
        };
        let m = n - k;
        let ys: Vec<Vec<Rational>> = self
            .reps
            .iter()
            .map(|r| {
                let y = rat_mul_vec(&vt, r);
                frac_vec(&y[k..])
            })
            .collect();
        let den = lcm_all(ys.iter().flatten().map(|x| x.denom()));
        let den = if den.is_zero() { Int::one() } else { den };
        let coord_group = ProductGroup::from_moduli(vec![den.clone(); m]);
        let gens: Vec<Vec<Int>> = ys
            .iter()
            .map(|y| {
                y.iter()
                    .map(|x| (x * Rational::from_integer(den.clone())).to_integer())
                    .collect()
            })
            .collect();
        let f_pres = SubgroupPres::from_rows(&coord_group, &gens).expect("component generators");
        let (f, emb) = f_pres.structure();
        let f_group = ProductGroup::single(f.clone());
        let factor_groups: Vec<FgAbGroup> = self
            .ambient
            .factors()
            .iter()
            .map(FgAbGroup::torsion_part)
            .collect();
        let mut phis = Vec::new();
        for (j, fj) in factor_groups.iter().enumerate() {
            let block = self.ambient.block(j);
            let tors: Vec<usize> = block
                .filter(|&i| !self.ambient.moduli()[i].is_zero())
                .collect();
            let mut cols = Vec::new();
            for g in 0..f.ngens() {
                let ycol = emb.matrix.column(g);
                let mut full = vec![Rational::zero(); n];
                for (i, y) in ycol.iter().enumerate() {
                    full[k + i] = Rational::new(y.clone(), den.clone());
                }
                let c = rat_mul_vec(&vinv_t, &full);
                let col: Vec<Int> = tors
                    .iter()
                    .map(|&i| {
                        let d = &self.ambient.moduli()[i];
                        let v = (&c[i] * Rational::from_integer(d.clone())).to_integer();
                        v.mod_floor(d)
                    })
                    .collect();
                cols.push(col);
            }
            let target = ProductGroup::single(fj.clone());
            let matrix = IntMatrix::from_columns(tors.len(), &cols);
            phis.push(
                Homomorphism::new(f_group.clone(), target, matrix)
                    .expect("component map is a homomorphism"),
            );
        }
        ComponentData {
            group: f,
            factor_groups,
            maps: phis,
        }
    }
}

fn rat_mul_vec(m: &IntMatrix, v: &[Rational]) -> Vec<Rational> {
    (0..m.nrows())
        .map(|r| {
            m.row(r)
                .iter()
                .zip(v)
                .map(|(a, x)| Rational::from_integer(a.clone()) * x)
                .sum()
        })
        .collect()
}

/// Component group of a closed subgroup, the component groups of the dual
/// factors, and the induced maps between them.
#[derive(Clone, Debug)]
pub struct ComponentData {
    pub group: FgAbGroup,
    pub factor_groups: Vec<FgAbGroup>,
    pub maps: Vec<Homomorphism>,
}
