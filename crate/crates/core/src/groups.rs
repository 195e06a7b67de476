//! Finite subgroups of SL₂ with explicit irreducible representations over
//! cyclotomic fields, their McKay quivers, the matrix-unit idempotents of
//! the group algebra, and arithmetic in the wreath group algebra.
//!
//! All representation matrices live in ℚ(ζ_m) where m is the exponent of
//! the group, which is a splitting field; characters are evaluated exactly
//! and conjugates are taken as values at inverse elements. The isomorphism
//! of the group algebra with a sum of matrix algebras is fixed once by
//! Fourier inversion: E^i_{p,q} = (δ_i/|Γ|) Σ_γ ρ_i(γ⁻¹)_{q,p} γ.

use std::collections::BTreeMap;

use num::rational::BigRational;
use num::BigInt;

use crate::linalg::Matrix;
use crate::perm::Perm;
use crate::quiver::{Quiver, VertexId};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// A vector in the 2-dimensional symplectic space, in the fixed basis
/// {x, y} with ω(x, y) = 1.
pub type LVec = [Scalar; 2];

/// ω_L(u, v) = u_x v_y − u_y v_x.
pub fn omega_l(u: &LVec, v: &LVec) -> Scalar {
    u[0].mul(&v[1]).sub(&u[1].mul(&v[0]))
}

pub fn basis_x() -> LVec {
    [Scalar::one(), Scalar::zero()]
}

pub fn basis_y() -> LVec {
    [Scalar::zero(), Scalar::one()]
}

/// A finite subgroup of SL₂ given by explicit 2×2 matrices, closed under
/// multiplication, with its multiplication table.
#[derive(Clone, Debug)]
pub struct FiniteSubgroupSL2 {
    name: String,
    /// 2×2 matrices; index 0 is the identity.
    elements: Vec<Matrix>,
    mult: Vec<Vec<u16>>,
    inv: Vec<u16>,
    exponent: u32,
    classes: Vec<Vec<u16>>,
}

impl FiniteSubgroupSL2 {
    /// Close the generator set under multiplication and build the tables.
    fn from_generators(name: &str, generators: Vec<Matrix>) -> Result<FiniteSubgroupSL2> {
        let mut elements = vec![Matrix::identity(2)];
        let mut frontier = vec![0usize];
        while let Some(i) = frontier.pop() {
            for g in &generators {
                let prod = g.matmul(&elements[i]);
                if !elements.iter().any(|e| *e == prod) {
                    elements.push(prod);
                    frontier.push(elements.len() - 1);
                    if elements.len() > 512 {
                        return Err(Error::InvalidQuiver(
                            "group closure exceeds 512 elements".into(),
                        ));
                    }
                }
            }
        }
        let order = elements.len();
        let index_of = |m: &Matrix| -> u16 {
            elements.iter().position(|e| e == m).expect("closed under product") as u16
        };
        let mut mult = vec![vec![0u16; order]; order];
        #[allow(clippy::needless_range_loop)]
        for i in 0..order {
            for j in 0..order {
                mult[i][j] = index_of(&elements[i].matmul(&elements[j]));
            }
        }
        let mut inv = vec![0u16; order];
        for i in 0..order {
            inv[i] = (0..order).find(|&j| mult[i][j] == 0).unwrap() as u16;
        }
        for m in &elements {
            let det = m[(0, 0)].mul(&m[(1, 1)]).sub(&m[(0, 1)].mul(&m[(1, 0)]));
            if !det.is_one() {
                return Err(Error::Incompatible("group element with determinant != 1".into()));
            }
        }
        // exponent = lcm of element orders
        let mut exponent: u32 = 1;
        for i in 0..order {
            let mut k = 1u32;
            let mut cur = i as u16;
            while cur != 0 {
                cur = mult[cur as usize][i];
                k += 1;
            }
            exponent = num::integer::lcm(exponent, k);
        }
        // conjugacy classes
        let mut seen = vec![false; order];
        let mut classes = Vec::new();
        for i in 0..order {
            if seen[i] {
                continue;
            }
            let mut class = Vec::new();
            for t in 0..order {
                let c = mult[mult[t][i] as usize][inv[t] as usize];
                if !seen[c as usize] {
                    seen[c as usize] = true;
                    class.push(c);
                }
            }
            class.sort();
            classes.push(class);
        }
        Ok(FiniteSubgroupSL2 { name: name.to_string(), elements, mult, inv, exponent, classes })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn matrix(&self, g: u16) -> &Matrix {
        &self.elements[g as usize]
    }

    pub fn mul(&self, a: u16, b: u16) -> u16 {
        self.mult[a as usize][b as usize]
    }

    pub fn inverse(&self, g: u16) -> u16 {
        self.inv[g as usize]
    }

    /// Conjugacy classes, each sorted, ordered by smallest member.
    pub fn conjugacy_classes(&self) -> &[Vec<u16>] {
        &self.classes
    }

    /// Apply a group element to a vector of L.
    pub fn act(&self, g: u16, u: &LVec) -> LVec {
        let m = self.matrix(g);
        [
            m[(0, 0)].mul(&u[0]).add(&m[(0, 1)].mul(&u[1])),
            m[(1, 0)].mul(&u[0]).add(&m[(1, 1)].mul(&u[1])),
        ]
    }

    /// Character of the defining 2-dimensional representation.
    pub fn char_l(&self, g: u16) -> Scalar {
        let m = self.matrix(g);
        m[(0, 0)].add(&m[(1, 1)])
    }
}

/// Explicit irreducible representations with characters.
#[derive(Clone, Debug)]
pub struct IrrepTable {
    pub dims: Vec<usize>,
    /// mats[i][g]: the matrix of group element g in irrep i.
    pub mats: Vec<Vec<Matrix>>,
    pub chars: Vec<Vec<Scalar>>,
}

impl IrrepTable {
    fn from_matrices(group: &FiniteSubgroupSL2, mats: Vec<Vec<Matrix>>) -> Result<IrrepTable> {
        let order = group.order();
        let mut dims = Vec::new();
        for rep in &mats {
            if rep.len() != order {
                return Err(Error::DimensionMismatch("irrep not defined on all elements".into()));
            }
            dims.push(rep[0].rows());
            for a in 0..order {
                for b in 0..order {
                    let prod = rep[a].matmul(&rep[b]);
                    if prod != rep[group.mul(a as u16, b as u16) as usize] {
                        return Err(Error::Certificate("irrep is not a homomorphism".into()));
                    }
                }
            }
        }
        if dims.iter().map(|d| d * d).sum::<usize>() != order {
            return Err(Error::Certificate("sum of squared dimensions != group order".into()));
        }
        let chars: Vec<Vec<Scalar>> = mats
            .iter()
            .map(|rep| {
                rep.iter()
                    .map(|m| {
                        let mut t = Scalar::zero();
                        for k in 0..m.rows() {
                            t = t.add(&m[(k, k)]);
                        }
                        t
                    })
                    .collect()
            })
            .collect();
        // first orthogonality: Σ_γ χ_i(γ) χ_j(γ⁻¹) = |Γ| δ_ij
        for i in 0..chars.len() {
            for j in 0..chars.len() {
                let mut s = Scalar::zero();
                for g in 0..order {
                    s = s.add(&chars[i][g].mul(&chars[j][group.inverse(g as u16) as usize]));
                }
                let expected = if i == j { Scalar::from_int(order as i64) } else { Scalar::zero() };
                if s != expected {
                    return Err(Error::Certificate("characters are not orthonormal".into()));
                }
            }
        }
        Ok(IrrepTable { dims, mats, chars })
    }

    pub fn count(&self) -> usize {
        self.dims.len()
    }
}

/// The cyclic group Z/l embedded as diag(ζ_l, ζ_l⁻¹), with its l characters
/// χ_i(γ^k) = ζ_l^{ik}.
pub fn cyclic_group(l: u32) -> Result<(FiniteSubgroupSL2, IrrepTable)> {
    if l < 1 {
        return Err(Error::InvalidQuiver("cyclic group requires l >= 1".into()));
    }
    let zeta = Scalar::zeta(l);
    let mut gen = Matrix::zeros(2, 2);
    gen[(0, 0)] = zeta.clone();
    gen[(1, 1)] = zeta.inv().expect("root of unity");
    let group = FiniteSubgroupSL2::from_generators(&format!("cyclic:{l}"), vec![gen])?;
    assert_eq!(group.order(), l as usize);
    // recover the power of each element from its (0,0) entry
    let mut power = vec![0usize; l as usize];
    for g in 0..l as usize {
        let entry = &group.matrix(g as u16)[(0, 0)];
        power[g] = (0..l).find(|&k| Scalar::zeta_pow(l, k as i64) == *entry).unwrap() as usize;
    }
    let mats: Vec<Vec<Matrix>> = (0..l as usize)
        .map(|i| {
            (0..l as usize)
                .map(|g| {
                    let mut m = Matrix::zeros(1, 1);
                    m[(0, 0)] = Scalar::zeta_pow(l, (i * power[g]) as i64);
                    m
                })
                .collect()
        })
        .collect();
    let irreps = IrrepTable::from_matrices(&group, mats)?;
    Ok((group, irreps))
}

/// The binary dihedral group of order 4l (l ≥ 2), generated by
/// diag(ζ_{2l}, ζ_{2l}⁻¹) and [[0,1],[−1,0]]; four 1-dimensional irreps and
/// l−1 two-dimensional ones.
pub fn binary_dihedral(l: u32) -> Result<(FiniteSubgroupSL2, IrrepTable)> {
    if l < 2 {
        return Err(Error::InvalidQuiver("binary dihedral requires l >= 2".into()));
    }
    let two_l = 2 * l;
    let zeta = Scalar::zeta(two_l);
    let mut rho = Matrix::zeros(2, 2);
    rho[(0, 0)] = zeta.clone();
    rho[(1, 1)] = zeta.inv().expect("root of unity");
    let mut sigma = Matrix::zeros(2, 2);
    sigma[(0, 1)] = Scalar::one();
    sigma[(1, 0)] = Scalar::from_int(-1);
    let group = FiniteSubgroupSL2::from_generators(
        &format!("bindihedral:{l}"),
        vec![rho.clone(), sigma.clone()],
    )?;
    assert_eq!(group.order(), 4 * l as usize);
    let find = |m: &Matrix| -> u16 {
        (0..group.order() as u16).find(|&g| group.matrix(g) == m).expect("element present")
    };
    let rho_i = find(&rho);
    let sigma_i = find(&sigma);
    // (k, e) with element = ρ^k σ^e, e ∈ {0, 1}
    let mut decomp = vec![(0usize, 0usize); group.order()];
    let mut cur = 0u16;
    for k in 0..two_l as usize {
        decomp[cur as usize] = (k, 0);
        let with_sigma = group.mul(cur, sigma_i);
        decomp[with_sigma as usize] = (k, 1);
        cur = group.mul(cur, rho_i);
    }
    let i4 = Scalar::zeta(4);
    // 1-dimensional irreps: the abelianization is Z/2 × Z/2 for even l and
    // Z/4 (generated by the image of σ) for odd l.
    let one_dims: Vec<(Scalar, Scalar)> = if l % 2 == 0 {
        vec![
            (Scalar::one(), Scalar::one()),
            (Scalar::one(), Scalar::from_int(-1)),
            (Scalar::from_int(-1), Scalar::one()),
            (Scalar::from_int(-1), Scalar::from_int(-1)),
        ]
    } else {
        (0..4).map(|k| (Scalar::from_int(if k % 2 == 0 { 1 } else { -1 }), i4.pow(k))).collect()
    };
    let mut mats: Vec<Vec<Matrix>> = Vec::new();
    for (chi_rho, chi_sigma) in one_dims {
        let rep: Vec<Matrix> = (0..group.order())
            .map(|g| {
                let (k, e) = decomp[g];
                let mut m = Matrix::zeros(1, 1);
                m[(0, 0)] = chi_rho.pow(k as u32).mul(&chi_sigma.pow(e as u32));
                m
            })
            .collect();
        mats.push(rep);
    }
    // 2-dimensional irreps V_j, j = 1..l-1
    for j in 1..l {
        let mut rho_j = Matrix::zeros(2, 2);
        rho_j[(0, 0)] = Scalar::zeta_pow(two_l, j as i64);
        rho_j[(1, 1)] = Scalar::zeta_pow(two_l, -(j as i64));
        let mut sigma_j = Matrix::zeros(2, 2);
        sigma_j[(0, 1)] = Scalar::one();
        sigma_j[(1, 0)] = Scalar::from_int(if j % 2 == 0 { 1 } else { -1 });
        let rep: Vec<Matrix> = (0..group.order())
            .map(|g| {
                let (k, e) = decomp[g];
                let mut m = Matrix::identity(2);
                for _ in 0..k {
                    m = m.matmul(&rho_j);
                }
                if e == 1 {
                    m = m.matmul(&sigma_j);
                }
                m
            })
            .collect();
        mats.push(rep);
    }
    let irreps = IrrepTable::from_matrices(&group, mats)?;
    Ok((group, irreps))
}

/// Parse a group specification string: `cyclic:<l>` or `bindihedral:<l>`.
pub fn parse_group_spec(spec: &str) -> Result<(FiniteSubgroupSL2, IrrepTable)> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["cyclic", l] => {
            let l: u32 = l.parse().map_err(|_| Error::Parse(format!("bad cyclic order {l:?}")))?;
            cyclic_group(l)
        }
        ["bindihedral", l] => {
            let l: u32 =
                l.parse().map_err(|_| Error::Parse(format!("bad binary dihedral order {l:?}")))?;
            binary_dihedral(l)
        }
        _ => Err(Error::Parse(format!(
            "unknown group spec {spec:?} (expected cyclic:<l> or bindihedral:<l>)"
        ))),
    }
}

/// The McKay data of a group: quiver orientation, dimension vector, and the
/// full multiplicity matrix m_{ij} = ⟨N_i, L ⊗ N_j⟩.
#[derive(Clone, Debug)]
pub struct McKay {
    pub quiver: Quiver,
    pub delta: Vec<usize>,
    pub multiplicity: Vec<Vec<usize>>,
}

/// Multiplicities of N_i in L ⊗ N_j via exact character sums; the doubled
/// McKay graph is split into a quiver by putting each undirected pair in
/// lowest-vertex-id-first orientation (loops get half their multiplicity).
pub fn mckay_quiver(group: &FiniteSubgroupSL2, irreps: &IrrepTable) -> Result<McKay> {
    let order = group.order();
    let k = irreps.count();
    let order_scalar = Scalar::from_int(order as i64);
    let mut multiplicity = vec![vec![0usize; k]; k];
    #[allow(clippy::needless_range_loop)]
    for i in 0..k {
        for j in 0..k {
            let mut s = Scalar::zero();
            for g in 0..order as u16 {
                let term = group
                    .char_l(g)
                    .mul(&irreps.chars[j][g as usize])
                    .mul(&irreps.chars[i][group.inverse(g) as usize]);
                s = s.add(&term);
            }
            let q = s.div(&order_scalar)?;
            let m = q
                .to_rational()
                .filter(|r| r.denom() == &BigInt::from(1) && r.numer() >= &BigInt::from(0))
                .ok_or_else(|| Error::Certificate("non-integer multiplicity".into()))?;
            multiplicity[i][j] = m.numer().to_string().parse().unwrap();
        }
    }
    for i in 0..k {
        for j in 0..k {
            if multiplicity[i][j] != multiplicity[j][i] {
                return Err(Error::Certificate("multiplicity matrix is not symmetric".into()));
            }
        }
    }
    let mut edges: Vec<(VertexId, VertexId)> = Vec::new();
    for i in 0..k {
        if multiplicity[i][i] % 2 != 0 {
            return Err(Error::Certificate("odd loop multiplicity".into()));
        }
        for _ in 0..multiplicity[i][i] / 2 {
            edges.push((i as VertexId, i as VertexId));
        }
        for j in (i + 1)..k {
            for _ in 0..multiplicity[i][j] {
                edges.push((i as VertexId, j as VertexId));
            }
        }
    }
    Ok(McKay { quiver: Quiver::new(k, edges)?, delta: irreps.dims.clone(), multiplicity })
}

/// An element of the group algebra: one exact coefficient per group element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupAlgebraElt(pub Vec<Scalar>);

impl GroupAlgebraElt {
    pub fn zero(order: usize) -> Self {
        GroupAlgebraElt(vec![Scalar::zero(); order])
    }

    pub fn one(order: usize) -> Self {
        let mut v = vec![Scalar::zero(); order];
        v[0] = Scalar::one();
        GroupAlgebraElt(v)
    }

    pub fn delta(order: usize, g: u16) -> Self {
        let mut v = vec![Scalar::zero(); order];
        v[g as usize] = Scalar::one();
        GroupAlgebraElt(v)
    }

    pub fn add(&self, other: &Self) -> Self {
        GroupAlgebraElt(self.0.iter().zip(&other.0).map(|(a, b)| a.add(b)).collect())
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        GroupAlgebraElt(self.0.iter().map(|a| a.mul(c)).collect())
    }

    pub fn mul(&self, other: &Self, group: &FiniteSubgroupSL2) -> Self {
        let mut out = GroupAlgebraElt::zero(self.0.len());
        for (g, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (h, b) in other.0.iter().enumerate() {
                if !b.is_zero() {
                    let k = group.mul(g as u16, h as u16) as usize;
                    out.0[k] = out.0[k].add(&a.mul(b));
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }
}

/// Matrix units of the group algebra under the fixed Fourier isomorphism,
/// and the corner idempotents f_i = E^i_{1,1}, f = Σ f_i.
#[derive(Clone, Debug)]
pub struct MatrixUnits {
    /// units[i][p][q] = E^i_{p,q}.
    pub units: Vec<Vec<Vec<GroupAlgebraElt>>>,
    pub f: Vec<GroupAlgebraElt>,
    pub f_total: GroupAlgebraElt,
}

/// Build the matrix units E^i_{p,q} = (δ_i/|Γ|) Σ_γ ρ_i(γ⁻¹)_{q,p} γ and
/// verify the multiplication law and the resolution of the identity.
pub fn matrix_units(group: &FiniteSubgroupSL2, irreps: &IrrepTable) -> Result<MatrixUnits> {
    let order = group.order();
    let order_inv =
        Scalar::from_rational(BigRational::new(BigInt::from(1), BigInt::from(order as i64)));
    let mut units = Vec::new();
    for (i, &d) in irreps.dims.iter().enumerate() {
        let scale = Scalar::from_int(d as i64).mul(&order_inv);
        let mut block = vec![vec![GroupAlgebraElt::zero(order); d]; d];
        #[allow(clippy::needless_range_loop)]
        for p in 0..d {
            for q in 0..d {
                let mut e = GroupAlgebraElt::zero(order);
                for g in 0..order as u16 {
                    e.0[g as usize] = irreps.mats[i][group.inverse(g) as usize][(q, p)].mul(&scale);
                }
                block[p][q] = e;
            }
        }
        units.push(block);
    }
    // multiplication law: E^i_{p,q} E^j_{r,s} = δ_ij δ_qr E^i_{p,s}
    for (i, bi) in units.iter().enumerate() {
        for (j, bj) in units.iter().enumerate() {
            for (p, row_p) in bi.iter().enumerate() {
                for (q, e_pq) in row_p.iter().enumerate() {
                    for (r, row_r) in bj.iter().enumerate() {
                        for (s, e_rs) in row_r.iter().enumerate() {
                            let prod = e_pq.mul(e_rs, group);
                            let expected = if i == j && q == r {
                                units[i][p][s].clone()
                            } else {
                                GroupAlgebraElt::zero(order)
                            };
                            if prod != expected {
                                return Err(Error::Certificate(
                                    "matrix-unit multiplication law failed".into(),
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    // resolution of the identity: Σ_{i,p} E^i_{p,p} = 1
    let mut sum = GroupAlgebraElt::zero(order);
    for (i, &d) in irreps.dims.iter().enumerate() {
        for p in 0..d {
            sum = sum.add(&units[i][p][p]);
        }
    }
    if sum != GroupAlgebraElt::one(order) {
        return Err(Error::Certificate("matrix units do not resolve the identity".into()));
    }
    let f: Vec<GroupAlgebraElt> = units.iter().map(|b| b[0][0].clone()).collect();
    let mut f_total = GroupAlgebraElt::zero(order);
    for fi in &f {
        f_total = f_total.add(fi);
    }
    Ok(MatrixUnits { units, f, f_total })
}

/// The wreath group algebra: permutations twisted with per-slot group
/// elements, acting so that σ (γ₁,…,γ_n) σ⁻¹ = (γ_{σ⁻¹(1)},…,γ_{σ⁻¹(n)}).
#[derive(Clone, Debug)]
pub struct GammaNAlgebra {
    pub group: FiniteSubgroupSL2,
    pub n: usize,
}

/// Basis element (σ, γ⃗): the operator applying γ⃗ sitewise, then permuting
/// slots by σ.
pub type GammaNMonomial = (Perm, Vec<u16>);

/// Sparse element of the wreath group algebra.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GammaNElement {
    pub terms: BTreeMap<GammaNMonomial, Scalar>,
}

impl GammaNElement {
    pub fn zero() -> Self {
        GammaNElement::default()
    }

    pub fn add_term(&mut self, m: GammaNMonomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn from_term(m: GammaNMonomial, c: Scalar) -> Self {
        let mut e = GammaNElement::zero();
        e.add_term(m, c);
        e
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.neg());
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = GammaNElement::zero();
        for (m, x) in &self.terms {
            out.add_term(m.clone(), x.mul(c));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl GammaNAlgebra {
    pub fn new(group: FiniteSubgroupSL2, n: usize) -> GammaNAlgebra {
        GammaNAlgebra { group, n }
    }

    pub fn one(&self) -> GammaNElement {
        GammaNElement::from_term((Perm::identity(self.n), vec![0; self.n]), Scalar::one())
    }

    pub fn mul_monomials(&self, a: &GammaNMonomial, b: &GammaNMonomial) -> GammaNMonomial {
        // (σ, γ⃗)(τ, μ⃗) = (στ, (γ_{τ(i)} μ_i)_i)
        let (sigma, gammas) = a;
        let (tau, mus) = b;
        let perm = sigma.compose(tau);
        let gs: Vec<u16> =
            (0..self.n).map(|i| self.group.mul(gammas[tau.apply(i)], mus[i])).collect();
        (perm, gs)
    }

    pub fn mul(&self, x: &GammaNElement, y: &GammaNElement) -> GammaNElement {
        let mut out = GammaNElement::zero();
        for (ma, ca) in &x.terms {
            for (mb, cb) in &y.terms {
                out.add_term(self.mul_monomials(ma, mb), ca.mul(cb));
            }
        }
        out
    }

    /// γ placed in slot i.
    pub fn gamma_at(&self, g: u16, i: usize) -> GammaNElement {
        let mut gs = vec![0u16; self.n];
        gs[i] = g;
        GammaNElement::from_term((Perm::identity(self.n), gs), Scalar::one())
    }

    /// The transposition s_{ij} as a group element.
    pub fn transposition(&self, i: usize, j: usize) -> GammaNElement {
        GammaNElement::from_term(
            (Perm::transposition(self.n, i, j), vec![0; self.n]),
            Scalar::one(),
        )
    }

    /// s_{ij} γ_i γ_j⁻¹ as a single monomial.
    pub fn reflection_s(&self, i: usize, j: usize, g: u16) -> GammaNMonomial {
        let mut gs = vec![0u16; self.n];
        gs[i] = g;
        gs[j] = self.group.inverse(g);
        (Perm::transposition(self.n, i, j), gs)
    }

    /// Tensor product of group-algebra elements, one per slot, with trivial
    /// permutation.
    pub fn tensor(&self, factors: &[&GroupAlgebraElt]) -> GammaNElement {
        assert_eq!(factors.len(), self.n);
        let id = Perm::identity(self.n);
        let mut out = GammaNElement::zero();
        let mut stack: Vec<(Vec<u16>, Scalar)> = vec![(vec![], Scalar::one())];
        for f in factors {
            let mut next = Vec::new();
            for (prefix, coeff) in &stack {
                for (g, c) in f.0.iter().enumerate() {
                    if !c.is_zero() {
                        let mut p = prefix.clone();
                        p.push(g as u16);
                        next.push((p, coeff.mul(c)));
                    }
                }
            }
            stack = next;
        }
        for (gs, c) in stack {
            out.add_term((id.clone(), gs), c);
        }
        out
    }

    /// f_{i₁} ⊗ … ⊗ f_{i_n} for the given idempotent labels.
    pub fn f_tensor(&self, mu: &MatrixUnits, labels: &[usize]) -> GammaNElement {
        let factors: Vec<&GroupAlgebraElt> = labels.iter().map(|&i| &mu.f[i]).collect();
        self.tensor(&factors)
    }
}

/// Verify the idempotent resolution in the n-fold tensor power:
/// Σ (E^{i₁}_{p₁,1} ⊗ …) f^{⊗n} (E^{i₁}_{1,p₁} ⊗ …) = 1^{⊗n}.
pub fn idempotent_resolution_check(
    alg: &GammaNAlgebra,
    irreps: &IrrepTable,
    mu: &MatrixUnits,
) -> bool {
    let n = alg.n;
    let k = irreps.count();
    let mut tuples: Vec<Vec<(usize, usize)>> = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for t in &tuples {
            for i in 0..k {
                for p in 0..irreps.dims[i] {
                    let mut w = t.clone();
                    w.push((i, p));
                    next.push(w);
                }
            }
        }
        tuples = next;
    }
    let f_n = {
        let factors: Vec<&GroupAlgebraElt> = (0..n).map(|_| &mu.f_total).collect();
        alg.tensor(&factors)
    };
    let mut sum = GammaNElement::zero();
    for t in &tuples {
        let left: Vec<&GroupAlgebraElt> = t.iter().map(|&(i, p)| &mu.units[i][p][0]).collect();
        let right: Vec<&GroupAlgebraElt> = t.iter().map(|&(i, p)| &mu.units[i][0][p]).collect();
        let prod = alg.mul(&alg.mul(&alg.tensor(&left), &f_n), &alg.tensor(&right));
        sum = sum.add(&prod);
    }
    sum == alg.one()
}

/// The sandwich f_{i⃗} · (Σ_γ s_{ℓj} γ_ℓ γ_j⁻¹) · f_{i⃗}, which equals
/// (|Γ|/δ_{i_ℓ}) f_{i⃗} s_{ℓj} when i_ℓ = i_j and 0 otherwise.
pub fn plain_reflection_sandwich(
    alg: &GammaNAlgebra,
    mu: &MatrixUnits,
    labels: &[usize],
    l: usize,
    j: usize,
) -> GammaNElement {
    let f = alg.f_tensor(mu, labels);
    let mut s = GammaNElement::zero();
    for g in 0..alg.group.order() as u16 {
        s.add_term(alg.reflection_s(l, j, g), Scalar::one());
    }
    alg.mul(&alg.mul(&f, &s), &f)
}

/// The weighted orthogonality sum
/// Σ_γ ω_L(γu, v) · (f_j γ f_j) ⊗ (f_i g γ⁻¹ h f_i) ∈ ℂΓ ⊗ ℂΓ,
/// returned as its coefficient on f_j ⊗ f_i (the sum is proportional to it
/// since f_k γ f_k is f_k times a matrix coefficient).
pub fn weighted_orthogonality_sum(
    group: &FiniteSubgroupSL2,
    irreps: &IrrepTable,
    i: usize,
    j: usize,
    g: u16,
    h: u16,
    u: &LVec,
    v: &LVec,
) -> Scalar {
    let mut total = Scalar::zero();
    for gamma in 0..group.order() as u16 {
        let w = omega_l(&group.act(gamma, u), v);
        if w.is_zero() {
            continue;
        }
        let cj = irreps.mats[j][gamma as usize][(0, 0)].clone();
        let gi = group.mul(group.mul(g, group.inverse(gamma)), h);
        let ci = irreps.mats[i][gi as usize][(0, 0)].clone();
        total = total.add(&w.mul(&cj).mul(&ci));
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::{affine_quiver, AffineFamily};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cyclic_groups_have_orthonormal_characters() {
        for l in [1u32, 2, 5] {
            let (group, irreps) = cyclic_group(l).unwrap();
            assert_eq!(group.order(), l as usize);
            assert_eq!(irreps.count(), l as usize);
            // construction already verifies orthogonality; spot-check χ₁(−1)
            if l == 2 {
                assert_eq!(irreps.chars[1][1], Scalar::from_int(-1));
            }
        }
    }

    #[test]
    fn every_element_preserves_the_symplectic_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for spec in ["cyclic:4", "bindihedral:2"] {
            let (group, _) = parse_group_spec(spec).unwrap();
            for g in 0..group.order() as u16 {
                for _ in 0..3 {
                    let u = [
                        crate::scalar::random_rational(&mut rng),
                        crate::scalar::random_rational(&mut rng),
                    ];
                    let v = [
                        crate::scalar::random_rational(&mut rng),
                        crate::scalar::random_rational(&mut rng),
                    ];
                    assert_eq!(omega_l(&group.act(g, &u), &group.act(g, &v)), omega_l(&u, &v));
                }
            }
        }
    }

    #[test]
    fn binary_dihedral_l2_is_the_quaternion_group() {
        let (group, irreps) = binary_dihedral(2).unwrap();
        assert_eq!(group.order(), 8);
        assert_eq!(irreps.dims, vec![1, 1, 1, 1, 2]);
        assert_eq!(group.exponent(), 4);
    }

    #[test]
    fn character_table_against_class_sum_oracle() {
        // characters are class functions and satisfy column orthogonality
        // with centralizer weights
        for spec in ["cyclic:3", "bindihedral:2", "bindihedral:3"] {
            let (group, irreps) = parse_group_spec(spec).unwrap();
            let classes = group.conjugacy_classes();
            assert_eq!(classes.len(), irreps.count());
            for chi in &irreps.chars {
                for class in classes {
                    for &g in &class[1..] {
                        assert_eq!(chi[g as usize], chi[class[0] as usize]);
                    }
                }
            }
            for ca in classes {
                for cb in classes {
                    let mut s = Scalar::zero();
                    for chi in &irreps.chars {
                        s = s.add(&chi[ca[0] as usize].mul(&chi[group.inverse(cb[0]) as usize]));
                    }
                    let expected = if ca == cb {
                        Scalar::from_int((group.order() / ca.len()) as i64)
                    } else {
                        Scalar::zero()
                    };
                    assert_eq!(s, expected);
                }
            }
        }
    }

    #[test]
    fn mckay_of_cyclic_groups_is_the_affine_a_cycle() {
        for l in 1u32..=6 {
            let (group, irreps) = cyclic_group(l).unwrap();
            let mckay = mckay_quiver(&group, &irreps).unwrap();
            let expected = affine_quiver(AffineFamily::A, l as usize - 1).unwrap();
            assert_eq!(mckay.quiver.vertex_count(), expected.vertex_count());
            assert_eq!(mckay.quiver.undirected_edges(), expected.undirected_edges());
            assert_eq!(mckay.delta, vec![1; l as usize]);
            // affine condition: 2 δ_j = Σ_i m_{ij} δ_i
            for j in 0..l as usize {
                let s: usize =
                    (0..l as usize).map(|i| mckay.multiplicity[i][j] * mckay.delta[i]).sum();
                assert_eq!(s, 2 * mckay.delta[j]);
            }
        }
        let (group, irreps) = cyclic_group(2).unwrap();
        let mckay = mckay_quiver(&group, &irreps).unwrap();
        assert_eq!(mckay.multiplicity[0][1], 2);
        assert_eq!(mckay.quiver.edges(), &[(0, 1), (0, 1)]);
    }

    #[test]
    fn mckay_of_binary_dihedral_is_affine_d() {
        for (l, d_index) in [(2u32, 4usize), (3, 5)] {
            let (group, irreps) = binary_dihedral(l).unwrap();
            let mckay = mckay_quiver(&group, &irreps).unwrap();
            let expected = affine_quiver(AffineFamily::D, d_index).unwrap();
            assert!(mckay.quiver.is_isomorphic_undirected(&expected));
            let k = irreps.count();
            for j in 0..k {
                let s: usize = (0..k).map(|i| mckay.multiplicity[i][j] * mckay.delta[i]).sum();
                assert_eq!(s, 2 * mckay.delta[j]);
            }
        }
    }

    #[test]
    fn matrix_units_of_z2_are_the_averaging_idempotents() {
        let (group, irreps) = cyclic_group(2).unwrap();
        let mu = matrix_units(&group, &irreps).unwrap();
        let half = Scalar::rat(1, 2);
        assert_eq!(mu.f[0].0, vec![half.clone(), half.clone()]);
        assert_eq!(mu.f[1].0, vec![half.clone(), half.neg()]);
        for i in 0..2 {
            for j in 0..2 {
                let prod = mu.f[i].mul(&mu.f[j], &group);
                if i == j {
                    assert_eq!(prod, mu.f[i]);
                } else {
                    assert!(prod.is_zero());
                }
            }
        }
    }

    #[test]
    fn f_gamma_f_is_a_matrix_coefficient_times_f() {
        for spec in ["cyclic:3", "bindihedral:2"] {
            let (group, irreps) = parse_group_spec(spec).unwrap();
            let mu = matrix_units(&group, &irreps).unwrap();
            for i in 0..irreps.count() {
                for g in 0..group.order() as u16 {
                    let sandwich = mu.f[i]
                        .mul(&GroupAlgebraElt::delta(group.order(), g), &group)
                        .mul(&mu.f[i], &group);
                    let coeff = irreps.mats[i][g as usize][(0, 0)].clone();
                    assert_eq!(sandwich, mu.f[i].scale(&coeff));
                }
            }
        }
    }

    #[test]
    fn idempotent_resolution_in_tensor_powers() {
        for spec in ["cyclic:2", "cyclic:3"] {
            let (group, irreps) = parse_group_spec(spec).unwrap();
            let mu = matrix_units(&group, &irreps).unwrap();
            for n in [1usize, 2] {
                let alg = GammaNAlgebra::new(group.clone(), n);
                assert!(idempotent_resolution_check(&alg, &irreps, &mu));
            }
        }
    }

    #[test]
    fn wreath_group_algebra_associativity_and_identity() {
        let (group, _) = cyclic_group(3).unwrap();
        let alg = GammaNAlgebra::new(group, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let perms = Perm::all(2);
        let sample = |rng: &mut ChaCha8Rng| {
            let mut e = GammaNElement::zero();
            for _ in 0..3 {
                let p = perms[rng.gen_range(0..perms.len())].clone();
                let gs: Vec<u16> = (0..2).map(|_| rng.gen_range(0..3) as u16).collect();
                e.add_term((p, gs), crate::scalar::random_rational(rng));
            }
            e
        };
        for _ in 0..30 {
            let x = sample(&mut rng);
            let y = sample(&mut rng);
            let z = sample(&mut rng);
            assert_eq!(alg.mul(&alg.mul(&x, &y), &z), alg.mul(&x, &alg.mul(&y, &z)));
            assert_eq!(alg.mul(&alg.one(), &x), x);
            assert_eq!(alg.mul(&x, &alg.one()), x);
        }
    }

    #[test]
    fn conjugation_convention_for_wreath_elements() {
        // σ (γ₁,…,γ_n) σ⁻¹ places the slot-j entry at slot σ(j)
        let (group, _) = cyclic_group(4).unwrap();
        let alg = GammaNAlgebra::new(group.clone(), 3);
        for sigma in Perm::all(3) {
            let s = GammaNElement::from_term((sigma.clone(), vec![0, 0, 0]), Scalar::one());
            let s_inv = GammaNElement::from_term((sigma.inverse(), vec![0, 0, 0]), Scalar::one());
            let gs: Vec<u16> = vec![1, 2, 3];
            let x = GammaNElement::from_term((Perm::identity(3), gs.clone()), Scalar::one());
            let conj = alg.mul(&alg.mul(&s, &x), &s_inv);
            let mut placed = vec![0u16; 3];
            for j in 0..3 {
                placed[sigma.apply(j)] = gs[j];
            }
            assert_eq!(conj, GammaNElement::from_term((Perm::identity(3), placed), Scalar::one()));
        }
    }

    #[test]
    fn reflection_sum_commutes_with_slotwise_elements() {
        // g_i h_j (Σ_γ s_{ij} γ_i γ_j⁻¹) = (Σ_γ s_{ij} γ_i γ_j⁻¹) g_i h_j
        let (group, _) = cyclic_group(3).unwrap();
        let alg = GammaNAlgebra::new(group.clone(), 2);
        let mut refl_sum = GammaNElement::zero();
        for g in 0..3u16 {
            refl_sum.add_term(alg.reflection_s(0, 1, g), Scalar::one());
        }
        for g in 0..3u16 {
            for h in 0..3u16 {
                let gh = alg.mul(&alg.gamma_at(g, 0), &alg.gamma_at(h, 1));
                assert_eq!(alg.mul(&gh, &refl_sum), alg.mul(&refl_sum, &gh));
            }
        }
    }

    #[test]
    fn plain_sandwich_matches_orthogonality() {
        let (group, irreps) = cyclic_group(3).unwrap();
        let mu = matrix_units(&group, &irreps).unwrap();
        let alg = GammaNAlgebra::new(group.clone(), 2);
        for i in 0..3usize {
            for j in 0..3usize {
                let sandwich = plain_reflection_sandwich(&alg, &mu, &[i, j], 0, 1);
                if i == j {
                    let f = alg.f_tensor(&mu, &[i, j]);
                    let expected =
                        alg.mul(&f, &alg.transposition(0, 1)).scale(&Scalar::from_int(3));
                    assert_eq!(sandwich, expected);
                } else {
                    assert!(sandwich.is_zero());
                }
            }
        }
    }

    #[test]
    fn group_spec_parsing() {
        assert!(parse_group_spec("cyclic:5").is_ok());
        assert!(parse_group_spec("bindihedral:1").is_err());
        assert!(parse_group_spec("icosahedral:1").is_err());
        assert!(parse_group_spec("cyclic:x").is_err());
    }
}
