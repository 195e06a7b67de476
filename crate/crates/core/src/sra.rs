//! Symplectic reflection algebras for wreath products: enumeration and
//! classification of symplectic reflections, the degenerate forms attached
//! to them, the deformed commutator pairing, the defining relation families,
//! and a terminating rewriting engine computing canonical normal forms.
//!
//! The ambient algebra is the tensor algebra on 2n letters x_1, y_1, …,
//! x_n, y_n twisted by the wreath group; monomials are words with the group
//! part normalized to the right. Normal forms sort letters site-ascending
//! with x before y inside a site; every adjacent swap inserts the pairing
//! value of the two letters, which drops degree by two, so rewriting
//! terminates by the (degree, inversion count) measure.

use std::collections::BTreeMap;

use crate::groups::{
    omega_l, FiniteSubgroupSL2, GammaNAlgebra, GammaNElement, GammaNMonomial, LVec,
};
use crate::linalg::{self, Matrix};
use crate::perm::Perm;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Letter encoding: 2·site + kind, with x = 0 < y = 1 inside a site.
pub fn letter(site: usize, kind: usize) -> u8 {
    (2 * site + kind) as u8
}

pub fn letter_site(l: u8) -> usize {
    (l / 2) as usize
}

pub fn letter_kind(l: u8) -> usize {
    (l % 2) as usize
}

/// The basis vector of V corresponding to a letter, as per-site pairs.
pub fn letter_vector(l: u8, n: usize) -> Vec<LVec> {
    let mut v = vec![[Scalar::zero(), Scalar::zero()]; n];
    v[letter_site(l)][letter_kind(l)] = Scalar::one();
    v
}

/// ω on V = L^{⊕n}: the sum of the sitewise forms.
pub fn omega_v(u: &[LVec], v: &[LVec]) -> Scalar {
    let mut s = Scalar::zero();
    for (a, b) in u.iter().zip(v.iter()) {
        s = s.add(&omega_l(a, b));
    }
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReflKind {
    /// s_{ij} γ_i γ_j⁻¹.
    SType { i: usize, j: usize, gamma: u16 },
    /// γ placed at one site, γ ≠ 1.
    GammaType { site: usize, gamma: u16 },
}

/// A symplectic reflection: a wreath group element with rank(Id − s) = 2,
/// together with its matrix on V and the projector onto im(Id − s) along
/// ker(Id − s).
#[derive(Clone, Debug)]
pub struct SymplecticReflection {
    pub kind: ReflKind,
    pub monomial: GammaNMonomial,
    pub matrix: Matrix,
    projector: Matrix,
}

/// The 2n×2n matrix of a wreath group element on V (letters ordered
/// x_0, y_0, x_1, y_1, …).
pub fn monomial_matrix(alg: &GammaNAlgebra, m: &GammaNMonomial) -> Matrix {
    let n = alg.n;
    let (sigma, gammas) = m;
    let mut out = Matrix::zeros(2 * n, 2 * n);
    for site in 0..n {
        let g = alg.group.matrix(gammas[site]);
        let target = sigma.apply(site);
        for col in 0..2 {
            for row in 0..2 {
                out[(2 * target + row, 2 * site + col)] = g[(row, col)].clone();
            }
        }
    }
    out
}

fn rank_of_id_minus(alg: &GammaNAlgebra, m: &GammaNMonomial) -> usize {
    let n2 = 2 * alg.n;
    let s = monomial_matrix(alg, m);
    let diff = Matrix::from_fn(n2, n2, |i, j| {
        let id = if i == j { Scalar::one() } else { Scalar::zero() };
        id.sub(&s[(i, j)])
    });
    diff.rank()
}

fn build_reflection(alg: &GammaNAlgebra, kind: ReflKind, m: GammaNMonomial) -> SymplecticReflection {
    let n2 = 2 * alg.n;
    let s = monomial_matrix(alg, &m);
    let diff = Matrix::from_fn(n2, n2, |i, j| {
        let id = if i == j { Scalar::one() } else { Scalar::zero() };
        id.sub(&s[(i, j)])
    });
    // image basis: independent columns of Id − s
    let cols: Vec<Vec<Scalar>> = (0..n2).map(|j| (0..n2).map(|i| diff[(i, j)].clone()).collect()).collect();
    let im = linalg::span_basis(&cols);
    let ker = diff.kernel_basis();
    assert_eq!(im.len(), 2, "not a symplectic reflection");
    assert_eq!(im.len() + ker.len(), n2);
    // projector onto im along ker: solve [im | ker] z = e_t per basis vector
    let basis_mat = Matrix::from_fn(n2, n2, |i, j| {
        if j < im.len() {
            im[j][i].clone()
        } else {
            ker[j - im.len()][i].clone()
        }
    });
    let mut projector = Matrix::zeros(n2, n2);
    for t in 0..n2 {
        let mut e = vec![Scalar::zero(); n2];
        e[t] = Scalar::one();
        let z = basis_mat.solve(&e).expect("basis of V");
        for (jj, im_vec) in im.iter().enumerate() {
            if !z[jj].is_zero() {
                for i in 0..n2 {
                    if !im_vec[i].is_zero() {
                        projector[(i, t)] = projector[(i, t)].add(&z[jj].mul(&im_vec[i]));
                    }
                }
            }
        }
    }
    SymplecticReflection { kind, monomial: m, matrix: s, projector }
}

/// All symplectic reflections of the wreath group, verified to be exactly
/// the elements with rank(Id − s) = 2 by an exhaustive scan, and classified
/// into the two families.
pub fn enumerate_reflections(alg: &GammaNAlgebra) -> Result<Vec<SymplecticReflection>> {
    let n = alg.n;
    let order = alg.group.order();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for g in 0..order as u16 {
                let m = alg.reflection_s(i, j, g);
                out.push(build_reflection(alg, ReflKind::SType { i, j, gamma: g }, m));
            }
        }
    }
    for site in 0..n {
        for g in 1..order as u16 {
            let mut gs = vec![0u16; n];
            gs[site] = g;
            let m = (Perm::identity(n), gs);
            out.push(build_reflection(alg, ReflKind::GammaType { site, gamma: g }, m));
        }
    }
    // exhaustive scan: no other element has rank(Id − s) = 2
    let mut count = 0;
    for sigma in Perm::all(n) {
        let mut tuples: Vec<Vec<u16>> = vec![vec![]];
        for _ in 0..n {
            let mut next = Vec::new();
            for t in &tuples {
                for g in 0..order as u16 {
                    let mut w = t.clone();
                    w.push(g);
                    next.push(w);
                }
            }
            tuples = next;
        }
        for gs in tuples {
            let m = (sigma.clone(), gs);
            if rank_of_id_minus(alg, &m) == 2 {
                count += 1;
                if !out.iter().any(|r| r.monomial == m) {
                    return Err(Error::Certificate(
                        "rank-2 element outside the two reflection families".into(),
                    ));
                }
            }
        }
    }
    if count != out.len() {
        return Err(Error::Certificate("reflection families overlap or miss elements".into()));
    }
    Ok(out)
}

/// Partition the reflections into wreath-group conjugacy classes.
pub fn reflection_classes(alg: &GammaNAlgebra, refl: &[SymplecticReflection]) -> Vec<Vec<usize>> {
    let n = alg.n;
    let order = alg.group.order();
    // all group monomials for conjugation
    let mut all: Vec<GammaNMonomial> = Vec::new();
    for sigma in Perm::all(n) {
        let mut tuples: Vec<Vec<u16>> = vec![vec![]];
        for _ in 0..n {
            let mut next = Vec::new();
            for t in &tuples {
                for g in 0..order as u16 {
                    let mut w = t.clone();
                    w.push(g);
                    next.push(w);
                }
            }
            tuples = next;
        }
        for gs in tuples {
            all.push((sigma.clone(), gs));
        }
    }
    let inverse = |m: &GammaNMonomial| -> GammaNMonomial {
        let (sigma, gammas) = m;
        let inv_perm = sigma.inverse();
        // (σ, γ⃗)⁻¹ = (σ⁻¹, (γ_{σ(i)}⁻¹ ... )): solve via mul = identity
        let gs: Vec<u16> =
            (0..n).map(|i| alg.group.inverse(gammas[sigma.apply(i)])).collect();
        (inv_perm, gs)
    };
    let index_of = |m: &GammaNMonomial| refl.iter().position(|r| &r.monomial == m);
    let mut class_of = vec![usize::MAX; refl.len()];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, r) in refl.iter().enumerate() {
        if class_of[i] != usize::MAX {
            continue;
        }
        let id = classes.len();
        let mut members = Vec::new();
        for t in &all {
            let conj = alg.mul_monomials(&alg.mul_monomials(t, &r.monomial), &inverse(t));
            if let Some(j) = index_of(&conj) {
                if class_of[j] == usize::MAX {
                    class_of[j] = id;
                    members.push(j);
                }
            }
        }
        members.sort();
        classes.push(members);
    }
    classes
}

/// The degenerate bilinear form attached to a reflection: ω evaluated on
/// projections onto im(Id − s) along ker(Id − s). Computed by brute force
/// from the stored projector.
pub fn omega_s(alg: &GammaNAlgebra, s: &SymplecticReflection, u: &[LVec], v: &[LVec]) -> Scalar {
    let n2 = 2 * alg.n;
    let flat = |w: &[LVec]| -> Vec<Scalar> {
        let mut out = Vec::with_capacity(n2);
        for site in w {
            out.push(site[0].clone());
            out.push(site[1].clone());
        }
        out
    };
    let pu = s.projector.mul_vec(&flat(u));
    let pv = s.projector.mul_vec(&flat(v));
    // ω(pu, pv) with the block-diagonal symplectic form
    let mut total = Scalar::zero();
    for site in 0..alg.n {
        let a = [pu[2 * site].clone(), pu[2 * site + 1].clone()];
        let b = [pv[2 * site].clone(), pv[2 * site + 1].clone()];
        total = total.add(&omega_l(&a, &b));
    }
    total
}

/// Closed form for the reflection form: ω(u,v)/2 − ω(u, sv)/2 for the
/// transposition type, ω restricted to the active site for the group type.
pub fn omega_s_closed_form(
    alg: &GammaNAlgebra,
    s: &SymplecticReflection,
    u: &[LVec],
    v: &[LVec],
) -> Scalar {
    match &s.kind {
        ReflKind::SType { .. } => {
            let n2 = 2 * alg.n;
            let flat = |w: &[LVec]| -> Vec<Scalar> {
                let mut out = Vec::with_capacity(n2);
                for site in w {
                    out.push(site[0].clone());
                    out.push(site[1].clone());
                }
                out
            };
            let sv = s.matrix.mul_vec(&flat(v));
            let unflat = |w: &[Scalar]| -> Vec<LVec> {
                (0..alg.n).map(|i| [w[2 * i].clone(), w[2 * i + 1].clone()]).collect()
            };
            let half = Scalar::rat(1, 2);
            omega_v(u, v).sub(&omega_v(u, &unflat(&sv))).mul(&half)
        }
        ReflKind::GammaType { site, .. } => omega_l(&u[*site], &v[*site]),
    }
}

/// Deformation parameters: t, the transposition-class value k, and one
/// value per nontrivial conjugacy class of the base group.
#[derive(Clone, Debug)]
pub struct SraParams {
    pub t: Scalar,
    pub k: Scalar,
    /// Value per nontrivial conjugacy class, keyed by class representative.
    cprime: BTreeMap<u16, Scalar>,
}

impl SraParams {
    /// Values given per nontrivial conjugacy class, in class order.
    pub fn new(
        group: &FiniteSubgroupSL2,
        t: Scalar,
        k: Scalar,
        cprime_by_class: &[Scalar],
    ) -> Result<SraParams> {
        let nontrivial: Vec<&Vec<u16>> =
            group.conjugacy_classes().iter().filter(|c| c[0] != 0).collect();
        if cprime_by_class.len() != nontrivial.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} class values, got {}",
                nontrivial.len(),
                cprime_by_class.len()
            )));
        }
        let mut cprime = BTreeMap::new();
        for (class, v) in nontrivial.iter().zip(cprime_by_class.iter()) {
            cprime.insert(class[0], v.clone());
        }
        Ok(SraParams { t, k, cprime })
    }

    /// Values given per group element; must be constant on conjugacy classes.
    pub fn from_gamma_values(
        group: &FiniteSubgroupSL2,
        t: Scalar,
        k: Scalar,
        values: &BTreeMap<u16, Scalar>,
    ) -> Result<SraParams> {
        let mut by_class = Vec::new();
        for class in group.conjugacy_classes() {
            if class[0] == 0 {
                continue;
            }
            let v = values.get(&class[0]).cloned().unwrap_or_else(Scalar::zero);
            for g in class {
                let w = values.get(g).cloned().unwrap_or_else(Scalar::zero);
                if w != v {
                    return Err(Error::Incompatible(
                        "class function values differ within a conjugacy class".into(),
                    ));
                }
            }
            by_class.push(v);
        }
        SraParams::new(group, t, k, &by_class)
    }

    pub fn zero(group: &FiniteSubgroupSL2) -> SraParams {
        let count = group.conjugacy_classes().iter().filter(|c| c[0] != 0).count();
        SraParams::new(group, Scalar::zero(), Scalar::zero(), &vec![Scalar::zero(); count])
            .expect("matching class count")
    }

    /// c' value of a nontrivial group element.
    pub fn cprime_of(&self, group: &FiniteSubgroupSL2, gamma: u16) -> Scalar {
        let class = group
            .conjugacy_classes()
            .iter()
            .find(|c| c.contains(&gamma))
            .expect("element in some class");
        self.cprime.get(&class[0]).cloned().unwrap_or_else(Scalar::zero)
    }

    /// The coefficient attached to a reflection.
    pub fn c_of(&self, group: &FiniteSubgroupSL2, kind: &ReflKind) -> Scalar {
        match kind {
            ReflKind::SType { .. } => self.k.clone(),
            ReflKind::GammaType { gamma, .. } => self.cprime_of(group, *gamma),
        }
    }
}

/// The deformed commutator pairing:
/// κ(u, v) = t·ω(u,v)·1 + Σ_s c_s·ω_s(u,v)·s.
pub fn kappa(
    alg: &GammaNAlgebra,
    reflections: &[SymplecticReflection],
    params: &SraParams,
    u: &[LVec],
    v: &[LVec],
) -> GammaNElement {
    let mut out = GammaNElement::zero();
    out.add_term((Perm::identity(alg.n), vec![0; alg.n]), params.t.mul(&omega_v(u, v)));
    for s in reflections {
        let w = omega_s(alg, s, u, v);
        if !w.is_zero() {
            let c = params.c_of(&alg.group, &s.kind);
            out.add_term(s.monomial.clone(), c.mul(&w));
        }
    }
    out
}

/// Monomial of the twisted tensor algebra: a word over the letters with the
/// group part normalized to the right.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SraMonomial {
    pub word: Vec<u8>,
    pub grp: GammaNMonomial,
}

/// Sparse element of the twisted tensor algebra.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SraElement {
    pub terms: BTreeMap<SraMonomial, Scalar>,
}

impl SraElement {
    pub fn zero() -> Self {
        SraElement::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: SraMonomial, c: Scalar) {
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

    pub fn from_term(m: SraMonomial, c: Scalar) -> Self {
        let mut e = SraElement::zero();
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
        let mut out = SraElement::zero();
        for (m, x) in &self.terms {
            out.add_term(m.clone(), x.mul(c));
        }
        out
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.word.len()).max().unwrap_or(0)
    }
}

/// The symplectic reflection algebra context: the wreath group, parameters,
/// reflection data, and the pairing table the rewriting engine uses.
#[derive(Clone, Debug)]
pub struct SraAlgebra {
    pub gamma_n: GammaNAlgebra,
    pub params: SraParams,
    pub reflections: Vec<SymplecticReflection>,
    /// kappa_table[a][b] = κ(letter a, letter b).
    kappa_table: Vec<Vec<GammaNElement>>,
}

impl SraAlgebra {
    pub fn new(alg: GammaNAlgebra, params: SraParams) -> Result<SraAlgebra> {
        let reflections = enumerate_reflections(&alg)?;
        let n = alg.n;
        let letters = 2 * n;
        let mut kappa_table = vec![vec![GammaNElement::zero(); letters]; letters];
        #[allow(clippy::needless_range_loop)]
        for a in 0..letters {
            for b in 0..letters {
                let u = letter_vector(a as u8, n);
                let v = letter_vector(b as u8, n);
                kappa_table[a][b] = kappa(&alg, &reflections, &params, &u, &v);
            }
        }
        Ok(SraAlgebra { gamma_n: alg, params, reflections, kappa_table })
    }

    pub fn n(&self) -> usize {
        self.gamma_n.n
    }

    pub fn one(&self) -> SraElement {
        SraElement::from_term(
            SraMonomial { word: vec![], grp: (Perm::identity(self.n()), vec![0; self.n()]) },
            Scalar::one(),
        )
    }

    /// A single letter as an element.
    pub fn letter_element(&self, l: u8) -> SraElement {
        SraElement::from_term(
            SraMonomial { word: vec![l], grp: (Perm::identity(self.n()), vec![0; self.n()]) },
            Scalar::one(),
        )
    }

    /// Embed a group-algebra element (degree-0 words).
    pub fn group_element(&self, x: &GammaNElement) -> SraElement {
        let mut out = SraElement::zero();
        for (m, c) in &x.terms {
            out.add_term(SraMonomial { word: vec![], grp: m.clone() }, c.clone());
        }
        out
    }

    /// Action of a group monomial on a letter: g·u_i = (γ_i u)_{σ(i)} · g.
    fn letter_action(&self, g: &GammaNMonomial, l: u8) -> Vec<(u8, Scalar)> {
        let (sigma, gammas) = g;
        let site = letter_site(l);
        let kind = letter_kind(l);
        let target = sigma.apply(site);
        let m = self.gamma_n.group.matrix(gammas[site]);
        let mut out = Vec::new();
        for row in 0..2 {
            let c = m[(row, kind)].clone();
            if !c.is_zero() {
                out.push((letter(target, row), c));
            }
        }
        out
    }

    /// Expand g·(word) = Σ (word' )·g over the per-letter actions.
    fn word_action(&self, g: &GammaNMonomial, word: &[u8]) -> Vec<(Vec<u8>, Scalar)> {
        let mut acc: Vec<(Vec<u8>, Scalar)> = vec![(vec![], Scalar::one())];
        for &l in word {
            let actions = self.letter_action(g, l);
            let mut next = Vec::with_capacity(acc.len() * actions.len());
            for (w, c) in &acc {
                for (l2, c2) in &actions {
                    let mut w2 = w.clone();
                    w2.push(*l2);
                    next.push((w2, c.mul(c2)));
                }
            }
            acc = next;
        }
        acc
    }

    /// Multiplication in the ambient twisted tensor algebra.
    pub fn mul(&self, x: &SraElement, y: &SraElement) -> SraElement {
        let mut out = SraElement::zero();
        for (mx, cx) in &x.terms {
            for (my, cy) in &y.terms {
                let grp = self.gamma_n.mul_monomials(&mx.grp, &my.grp);
                for (w2, c2) in self.word_action(&mx.grp, &my.word) {
                    let mut word = mx.word.clone();
                    word.extend(w2);
                    out.add_term(
                        SraMonomial { word, grp: grp.clone() },
                        cx.mul(cy).mul(&c2),
                    );
                }
            }
        }
        out
    }

    /// The canonical representative modulo the defining relations: letters
    /// sorted (site ascending, x before y within a site), group parts on the
    /// right. Terminates by the (degree, inversions) measure; linear and
    /// idempotent.
    pub fn normal_form(&self, x: &SraElement) -> SraElement {
        let mut result = SraElement::zero();
        let mut stack: Vec<(SraMonomial, Scalar)> =
            x.terms.iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        while let Some((m, c)) = stack.pop() {
            let inversion = (0..m.word.len().saturating_sub(1)).find(|&p| m.word[p] > m.word[p + 1]);
            let Some(p) = inversion else {
                result.add_term(m, c);
                continue;
            };
            let a = m.word[p];
            let b = m.word[p + 1];
            // A·B = B·A + κ(A, B)
            let mut swapped = m.word.clone();
            swapped.swap(p, p + 1);
            stack.push((SraMonomial { word: swapped, grp: m.grp.clone() }, c.clone()));
            let suffix = &m.word[p + 2..];
            for (h, ch) in &self.kappa_table[a as usize][b as usize].terms {
                for (w2, c2) in self.word_action(h, suffix) {
                    let mut word = m.word[..p].to_vec();
                    word.extend(w2);
                    let grp = self.gamma_n.mul_monomials(h, &m.grp);
                    stack.push((SraMonomial { word, grp }, c.mul(ch).mul(&c2)));
                }
            }
        }
        result
    }

    /// The defining relation families:
    /// one commutator relation per site ([x_i, y_i] minus its deformation)
    /// and one per ordered site pair and letter pair. Each is certified to
    /// coincide with the pairing form [u, v] − κ(u, v).
    pub fn defining_relations(&self) -> Result<Vec<SraElement>> {
        let n = self.n();
        let group = &self.gamma_n.group;
        let order = group.order();
        let mut out = Vec::new();
        let commutator = |a: u8, b: u8| -> SraElement {
            let id = (Perm::identity(n), vec![0u16; n]);
            let mut e = SraElement::zero();
            e.add_term(SraMonomial { word: vec![a, b], grp: id.clone() }, Scalar::one());
            e.add_term(SraMonomial { word: vec![b, a], grp: id }, Scalar::from_int(-1));
            e
        };
        let half_k = self.params.k.mul(&Scalar::rat(1, 2));
        // site relations: [x_i, y_i] = t + (k/2) Σ_{j≠i} Σ_γ s_{ij} γ_i γ_j⁻¹
        //                              + Σ_{γ≠1} c'_γ γ_i
        for i in 0..n {
            let mut rhs = GammaNElement::zero();
            rhs.add_term((Perm::identity(n), vec![0; n]), self.params.t.clone());
            for j in 0..n {
                if j == i {
                    continue;
                }
                for g in 0..order as u16 {
                    rhs.add_term(self.gamma_n.reflection_s(i, j, g), half_k.clone());
                }
            }
            for g in 1..order as u16 {
                let mut gs = vec![0u16; n];
                gs[i] = g;
                rhs.add_term((Perm::identity(n), gs), self.params.cprime_of(group, g));
            }
            let rel = commutator(letter(i, 0), letter(i, 1)).sub(&self.group_element(&rhs));
            out.push(rel);
        }
        // cross-site relations: [u_i, v_j] = −(k/2) Σ_γ ω_L(γu, v) s_{ij} γ_i γ_j⁻¹
        for i in 0..n {
            for j in (i + 1)..n {
                for ku in 0..2usize {
                    for kv in 0..2usize {
                        let mut rhs = GammaNElement::zero();
                        let u = letter_vector(letter(i, ku), n);
                        let v = letter_vector(letter(j, kv), n);
                        for g in 0..order as u16 {
                            let w = omega_l(&group.act(g, &u[i]), &v[j]);
                            if !w.is_zero() {
                                rhs.add_term(
                                    self.gamma_n.reflection_s(i, j, g),
                                    half_k.neg().mul(&w),
                                );
                            }
                        }
                        let rel =
                            commutator(letter(i, ku), letter(j, kv)).sub(&self.group_element(&rhs));
                        out.push(rel);
                    }
                }
            }
        }
        // certify against the pairing form on every ordered letter pair
        for a in 0..(2 * n) as u8 {
            for b in 0..(2 * n) as u8 {
                let u = letter_vector(a, n);
                let v = letter_vector(b, n);
                let kap = kappa(&self.gamma_n, &self.reflections, &self.params, &u, &v);
                let lhs = {
                    let id = (Perm::identity(n), vec![0u16; n]);
                    let mut e = SraElement::zero();
                    e.add_term(SraMonomial { word: vec![a, b], grp: id.clone() }, Scalar::one());
                    e.add_term(SraMonomial { word: vec![b, a], grp: id }, Scalar::from_int(-1));
                    e.sub(&self.group_element(&kap))
                };
                // relation elements span the pairing-form relations: the
                // commutator relation for (a, b) must reduce to zero
                if !self.normal_form(&lhs).is_zero() {
                    return Err(Error::Certificate(
                        "stated relation families disagree with the pairing form".into(),
                    ));
                }
            }
        }
        Ok(out)
    }
}

/// Sorted words of length ≤ d over the letters of n sites, i.e. the normal
/// form word basis of the filtration.
pub fn sorted_words(n: usize, d: usize) -> Vec<Vec<u8>> {
    let letters = 2 * n as u8;
    let mut out: Vec<Vec<u8>> = vec![vec![]];
    let mut frontier: Vec<Vec<u8>> = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::new();
        for w in &frontier {
            let lo = *w.last().unwrap_or(&0);
            for l in lo..letters {
                let mut w2 = w.clone();
                w2.push(l);
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::cyclic_group;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn algebra(l: u32, n: usize) -> GammaNAlgebra {
        let (group, _) = cyclic_group(l).unwrap();
        GammaNAlgebra::new(group, n)
    }

    fn random_params(group: &FiniteSubgroupSL2, rng: &mut ChaCha8Rng) -> SraParams {
        let count = group.conjugacy_classes().iter().filter(|c| c[0] != 0).count();
        let cs: Vec<Scalar> = (0..count).map(|_| crate::scalar::random_rational(rng)).collect();
        SraParams::new(
            group,
            crate::scalar::random_rational(rng),
            crate::scalar::random_rational(rng),
            &cs,
        )
        .unwrap()
    }

    #[test]
    fn reflection_enumeration_counts() {
        // trivial group, n = 2: just the transposition
        let alg = algebra(1, 2);
        let refl = enumerate_reflections(&alg).unwrap();
        assert_eq!(refl.len(), 1);
        assert!(matches!(refl[0].kind, ReflKind::SType { .. }));
        // Z/2, n = 2: two transposition-type and two group-type
        let alg = algebra(2, 2);
        let refl = enumerate_reflections(&alg).unwrap();
        assert_eq!(refl.len(), 4);
        assert_eq!(refl.iter().filter(|r| matches!(r.kind, ReflKind::SType { .. })).count(), 2);
    }

    #[test]
    fn reflection_classes_follow_the_two_families() {
        let alg = algebra(3, 2);
        let refl = enumerate_reflections(&alg).unwrap();
        let classes = reflection_classes(&alg, &refl);
        // one class of transposition type, one per nontrivial group class
        let s_class = classes
            .iter()
            .filter(|c| c.iter().any(|&i| matches!(refl[i].kind, ReflKind::SType { .. })))
            .count();
        assert_eq!(s_class, 1);
        let gamma_classes: Vec<&Vec<usize>> = classes
            .iter()
            .filter(|c| c.iter().all(|&i| matches!(refl[i].kind, ReflKind::GammaType { .. })))
            .collect();
        let nontrivial_classes =
            alg.group.conjugacy_classes().iter().filter(|c| c[0] != 0).count();
        assert_eq!(gamma_classes.len(), nontrivial_classes);
    }

    #[test]
    fn omega_s_nondegenerate_on_image_and_radical_is_kernel() {
        let alg = algebra(2, 2);
        for s in enumerate_reflections(&alg).unwrap() {
            // ω_s(x_i, y_i) table values
            match s.kind {
                ReflKind::SType { i, .. } => {
                    let u = letter_vector(letter(i, 0), 2);
                    let v = letter_vector(letter(i, 1), 2);
                    assert_eq!(omega_s(&alg, &s, &u, &v), Scalar::rat(1, 2));
                }
                ReflKind::GammaType { site, .. } => {
                    let u = letter_vector(letter(site, 0), 2);
                    let v = letter_vector(letter(site, 1), 2);
                    assert_eq!(omega_s(&alg, &s, &u, &v), Scalar::one());
                    let other = 1 - site;
                    let u2 = letter_vector(letter(other, 0), 2);
                    let v2 = letter_vector(letter(other, 1), 2);
                    assert!(omega_s(&alg, &s, &u2, &v2).is_zero());
                }
            }
        }
    }

    #[test]
    fn omega_s_matches_closed_form_on_all_basis_pairs() {
        for (l, n) in [(2u32, 2usize), (3, 2), (2, 3)] {
            let alg = algebra(l, n);
            for s in enumerate_reflections(&alg).unwrap() {
                for a in 0..(2 * n) as u8 {
                    for b in 0..(2 * n) as u8 {
                        let u = letter_vector(a, n);
                        let v = letter_vector(b, n);
                        assert_eq!(
                            omega_s(&alg, &s, &u, &v),
                            omega_s_closed_form(&alg, &s, &u, &v)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn omega_s_cross_site_table_value() {
        // type S: ω_s(u_i, v_j) = −ω_L(u, γ⁻¹ v)/2
        let alg = algebra(3, 2);
        for s in enumerate_reflections(&alg).unwrap() {
            if let ReflKind::SType { i, j, gamma } = s.kind {
                for ku in 0..2 {
                    for kv in 0..2 {
                        let u = letter_vector(letter(i, ku), 2);
                        let v = letter_vector(letter(j, kv), 2);
                        let got = omega_s(&alg, &s, &u, &v);
                        let ginv = alg.group.inverse(gamma);
                        let expected = omega_l(&u[i], &alg.group.act(ginv, &v[j]))
                            .mul(&Scalar::rat(-1, 2));
                        assert_eq!(got, expected);
                    }
                }
            }
        }
    }

    #[test]
    fn kappa_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        // trivial group, n = 2: κ(x₁, y₁) = t + (k/2) s₁₂
        let alg = algebra(1, 2);
        let refl = enumerate_reflections(&alg).unwrap();
        let params = random_params(&alg.group, &mut rng);
        let u = letter_vector(letter(0, 0), 2);
        let v = letter_vector(letter(0, 1), 2);
        let got = kappa(&alg, &refl, &params, &u, &v);
        let mut expected = GammaNElement::zero();
        expected.add_term((Perm::identity(2), vec![0, 0]), params.t.clone());
        expected.add_term(alg.reflection_s(0, 1, 0), params.k.mul(&Scalar::rat(1, 2)));
        assert_eq!(got, expected);
        // antisymmetry diagonal: κ(u, u) = 0
        assert!(kappa(&alg, &refl, &params, &u, &u).is_zero());
    }

    #[test]
    fn relations_agree_with_pairing_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for l in [1u32, 2, 3] {
            let alg = algebra(l, 2);
            let params = random_params(&alg.group, &mut rng);
            let sra = SraAlgebra::new(alg, params).unwrap();
            // defining_relations certifies the agreement internally
            let rels = sra.defining_relations().unwrap();
            assert_eq!(rels.len(), 2 + 4);
            for r in &rels {
                assert!(sra.normal_form(r).is_zero());
            }
        }
    }

    #[test]
    fn normal_form_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let alg = algebra(1, 2);
        let params = random_params(&alg.group, &mut rng);
        let sra = SraAlgebra::new(alg, params.clone()).unwrap();
        // degree-0 elements are fixed
        let g = sra.group_element(&sra.gamma_n.transposition(0, 1));
        assert_eq!(sra.normal_form(&g), g);
        // nf(y₁ x₁) = x₁ y₁ − t − (k/2) s₁₂
        let yx = SraElement::from_term(
            SraMonomial {
                word: vec![letter(0, 1), letter(0, 0)],
                grp: (Perm::identity(2), vec![0, 0]),
            },
            Scalar::one(),
        );
        let nf = sra.normal_form(&yx);
        let mut expected = SraElement::from_term(
            SraMonomial {
                word: vec![letter(0, 0), letter(0, 1)],
                grp: (Perm::identity(2), vec![0, 0]),
            },
            Scalar::one(),
        );
        expected.add_term(
            SraMonomial { word: vec![], grp: (Perm::identity(2), vec![0, 0]) },
            params.t.neg(),
        );
        expected.add_term(
            SraMonomial { word: vec![], grp: sra.gamma_n.reflection_s(0, 1, 0) },
            params.k.mul(&Scalar::rat(-1, 2)),
        );
        assert_eq!(nf, expected);
    }

    #[test]
    fn normal_form_is_idempotent_linear_and_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let alg = algebra(2, 2);
        let params = random_params(&alg.group, &mut rng);
        let sra = SraAlgebra::new(alg, params).unwrap();
        let perms = Perm::all(2);
        let sample = |rng: &mut ChaCha8Rng| -> SraElement {
            let mut e = SraElement::zero();
            for _ in 0..2 {
                let len = rng.gen_range(0..=2);
                let word: Vec<u8> = (0..len).map(|_| rng.gen_range(0..4) as u8).collect();
                let p = perms[rng.gen_range(0..perms.len())].clone();
                let gs: Vec<u16> = (0..2).map(|_| rng.gen_range(0..2) as u16).collect();
                e.add_term(SraMonomial { word, grp: (p, gs) }, crate::scalar::random_rational(rng));
            }
            e
        };
        for _ in 0..25 {
            let x = sample(&mut rng);
            let y = sample(&mut rng);
            let nx = sra.normal_form(&x);
            assert_eq!(sra.normal_form(&nx), nx);
            // linearity
            assert_eq!(
                sra.normal_form(&x.add(&y)),
                sra.normal_form(&x).add(&sra.normal_form(&y))
            );
            // multiplicativity / confluence smoke test
            let ny = sra.normal_form(&y);
            assert_eq!(
                sra.normal_form(&sra.mul(&x, &y)),
                sra.normal_form(&sra.mul(&nx, &ny))
            );
        }
    }

    #[test]
    fn filtered_span_of_normal_forms_has_the_flat_dimension() {
        // degree ≤ 3 for Z/2, n = 2: (sorted words ≤ 3) × |wreath group|
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let alg = algebra(2, 2);
        let params = random_params(&alg.group, &mut rng);
        let sra = SraAlgebra::new(alg, params).unwrap();
        let d = 3;
        let expected = sorted_words(2, d).len() * 2 * 4;
        // normal forms of all words (any order) times all group monomials
        let mut coords: BTreeMap<SraMonomial, usize> = BTreeMap::new();
        let mut rows: Vec<(BTreeMap<usize, Scalar>, ())> = Vec::new();
        let mut all_words: Vec<Vec<u8>> = vec![vec![]];
        let mut frontier: Vec<Vec<u8>> = vec![vec![]];
        for _ in 0..d {
            let mut next = Vec::new();
            for w in &frontier {
                for l in 0..4u8 {
                    let mut w2 = w.clone();
                    w2.push(l);
                    next.push(w2);
                }
            }
            all_words.extend(next.iter().cloned());
            frontier = next;
        }
        let mut group_monos: Vec<GammaNMonomial> = Vec::new();
        for p in Perm::all(2) {
            for g1 in 0..2u16 {
                for g2 in 0..2u16 {
                    group_monos.push((p.clone(), vec![g1, g2]));
                }
            }
        }
        for w in &all_words {
            for g in &group_monos {
                let x = SraElement::from_term(
                    SraMonomial { word: w.clone(), grp: g.clone() },
                    Scalar::one(),
                );
                let nf = sra.normal_form(&x);
                let mut row = BTreeMap::new();
                for (m, c) in &nf.terms {
                    // normal forms stay inside the sorted-word basis
                    assert!(m.word.windows(2).all(|p| p[0] <= p[1]));
                    assert!(m.word.len() <= d);
                    let next = coords.len();
                    let idx = *coords.entry(m.clone()).or_insert(next);
                    row.insert(idx, c.clone());
                }
                rows.push((row, ()));
            }
        }
        assert_eq!(coords.len(), expected);
        let dense: Vec<Vec<Scalar>> = rows
            .iter()
            .map(|(r, _)| {
                let mut v = vec![Scalar::zero(); coords.len()];
                for (i, c) in r {
                    v[*i] = c.clone();
                }
                v
            })
            .collect();
        assert_eq!(linalg::span_rank(&dense), expected);
    }
}
