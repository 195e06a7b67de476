//! Arithmetic in the smash product of the product-quiver path algebra with
//! the symmetric group, the commutator bracket on degree-1 layers, the
//! layer-collapsing morphism onto the n-fold tensor power, deformation
//! relation sets, and exact graded dimension counts.
//!
//! Conventions. Paths compose right-to-left (`p·q` traverses `q` first).
//! Monomials store their letters in application order together with the
//! start (tail) vertex tuple. The permutation convention is fixed so that
//! conjugating a letter at slot ℓ by σ yields the letter at slot σ(ℓ):
//! σ · m_ℓ · σ⁻¹ = m_{σ(ℓ)}.

use std::collections::BTreeMap;

use crate::linalg;
use crate::perm::Perm;
use crate::quiver::{DoubledQuiver, EdgeId, ProductEdge, ProductQuiver, Quiver, VertexId};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// A letter of a product-quiver path: (slot, doubled-quiver edge).
pub type Letter = (u8, EdgeId);

/// Basis monomial of the smash product: a product-quiver path (possibly
/// empty, anchored at `start`) followed by a permutation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct WreathMonomial {
    pub start: Vec<VertexId>,
    /// Letters in application order (first letter acts on `start`).
    pub letters: Vec<Letter>,
    pub perm: Perm,
}

impl WreathMonomial {
    pub fn degree(&self) -> usize {
        self.letters.len()
    }
}

/// Sparse linear combination of monomials; zero coefficients never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct WreathElement {
    pub terms: BTreeMap<WreathMonomial, Scalar>,
}

impl WreathElement {
    pub fn zero() -> Self {
        WreathElement::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: WreathMonomial, c: Scalar) {
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

    pub fn from_term(m: WreathMonomial, c: Scalar) -> Self {
        let mut e = WreathElement::zero();
        e.add_term(m, c);
        e
    }

    pub fn add(&self, other: &WreathElement) -> WreathElement {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &WreathElement) -> WreathElement {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.neg());
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> WreathElement {
        if c.is_zero() {
            return WreathElement::zero();
        }
        let mut out = WreathElement::zero();
        for (m, x) in &self.terms {
            out.add_term(m.clone(), x.mul(c));
        }
        out
    }

    pub fn neg(&self) -> WreathElement {
        self.scale(&Scalar::from_int(-1))
    }

    /// Maximal letter degree among the terms (0 for the zero element).
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }
}

/// The ambient algebra: paths of the n-fold product quiver twisted by S_n.
#[derive(Clone, Debug)]
pub struct WreathAlgebra {
    pq: ProductQuiver,
}

impl WreathAlgebra {
    pub fn new(qbar: DoubledQuiver, n: usize) -> Result<WreathAlgebra> {
        Ok(WreathAlgebra { pq: ProductQuiver::new(qbar, n)? })
    }

    pub fn n(&self) -> usize {
        self.pq.n()
    }

    pub fn qbar(&self) -> &DoubledQuiver {
        self.pq.qbar()
    }

    pub fn product_quiver(&self) -> &ProductQuiver {
        &self.pq
    }

    /// Head vertex tuple of a monomial's path.
    pub fn head_of(&self, m: &WreathMonomial) -> Vec<VertexId> {
        let mut v = m.start.clone();
        for &(slot, e) in &m.letters {
            debug_assert_eq!(v[slot as usize], self.qbar().tail(e));
            v[slot as usize] = self.qbar().head(e);
        }
        v
    }

    /// Check composability of the stored letter sequence.
    pub fn is_valid(&self, m: &WreathMonomial) -> bool {
        if m.start.len() != self.n() || m.perm.n() != self.n() {
            return false;
        }
        let mut v = m.start.clone();
        for &(slot, e) in &m.letters {
            if slot as usize >= self.n() || v[slot as usize] != self.qbar().tail(e) {
                return false;
            }
            v[slot as usize] = self.qbar().head(e);
        }
        true
    }

    /// The trivial path at a vertex tuple, with identity permutation.
    pub fn anchor(&self, labels: &[VertexId]) -> WreathMonomial {
        WreathMonomial { start: labels.to_vec(), letters: vec![], perm: Perm::identity(self.n()) }
    }

    /// The anchored permutation monomial e_labels · σ.
    pub fn anchor_perm(&self, labels: &[VertexId], perm: Perm) -> WreathMonomial {
        WreathMonomial { start: labels.to_vec(), letters: vec![], perm }
    }

    /// Unit of the algebra: the sum of all trivial paths.
    pub fn one(&self) -> WreathElement {
        let mut e = WreathElement::zero();
        for v in self.pq.vertices() {
            e.add_term(self.anchor(&v), Scalar::one());
        }
        e
    }

    /// σ as an element: Σ_v e_v · σ.
    pub fn perm_element(&self, perm: &Perm) -> WreathElement {
        let mut e = WreathElement::zero();
        for v in self.pq.vertices() {
            e.add_term(self.anchor_perm(&v, perm.clone()), Scalar::one());
        }
        e
    }

    /// A single product-quiver letter as a monomial.
    pub fn letter(&self, e: &ProductEdge) -> WreathMonomial {
        WreathMonomial {
            start: e.tail.clone(),
            letters: vec![(e.slot, e.edge)],
            perm: Perm::identity(self.n()),
        }
    }

    /// Diagonal S_n action on a monomial (conjugation of the path part,
    /// conjugation of the permutation part).
    pub fn conjugate_monomial(&self, tau: &Perm, m: &WreathMonomial) -> WreathMonomial {
        WreathMonomial {
            start: tau.permute_labels(&m.start),
            letters: m.letters.iter().map(|&(s, e)| (tau.apply(s as usize) as u8, e)).collect(),
            perm: tau.compose(&m.perm).compose(&tau.inverse()),
        }
    }

    pub fn conjugate(&self, tau: &Perm, x: &WreathElement) -> WreathElement {
        let mut out = WreathElement::zero();
        for (m, c) in &x.terms {
            out.add_term(self.conjugate_monomial(tau, m), c.clone());
        }
        out
    }

    fn mul_monomials(&self, x: &WreathMonomial, y: &WreathMonomial) -> Option<WreathMonomial> {
        // (p, σ)(q, τ) = (p · σ(q), σrole) with σ(q) traversed first.
        let sigma = &x.perm;
        let y_start: Vec<VertexId> = sigma.permute_labels(&y.start);
        let mut y_letters: Vec<Letter> = y
            .letters
            .iter()
            .map(|&(s, e)| (sigma.apply(s as usize) as u8, e))
            .collect();
        // head of σ(q) must equal tail of p
        let mut head = y_start.clone();
        for &(slot, e) in &y_letters {
            head[slot as usize] = self.qbar().head(e);
        }
        if head != x.start {
            return None;
        }
        y_letters.extend_from_slice(&x.letters);
        Some(WreathMonomial {
            start: y_start,
            letters: y_letters,
            perm: sigma.compose(&y.perm),
        })
    }

    /// Smash-product multiplication; non-composable monomial products vanish.
    pub fn mul(&self, x: &WreathElement, y: &WreathElement) -> WreathElement {
        let mut out = WreathElement::zero();
        for (mx, cx) in &x.terms {
            for (my, cy) in &y.terms {
                if let Some(m) = self.mul_monomials(mx, my) {
                    out.add_term(m, cx.mul(cy));
                }
            }
        }
        out
    }

    /// The commutator bracket of two degree-1 basis elements in distinct
    /// slots with matching idle labels: the two-term difference of the two
    /// interleavings.
    pub fn bracket(&self, eps: &ProductEdge, eps_prime: &ProductEdge) -> Result<WreathElement> {
        let (l, m) = (eps.slot, eps_prime.slot);
        if l == m {
            return Err(Error::Incompatible("bracket requires distinct slots".into()));
        }
        let (a, b) = (eps.edge, eps_prime.edge);
        // eps carries h(b) at slot m, eps_prime carries t(a) at slot l, and
        // both carry the same idle labels elsewhere.
        if eps.tail[m as usize] != self.qbar().head(b) {
            return Err(Error::Incompatible("first argument must carry the head label of the second's edge".into()));
        }
        if eps_prime.tail[l as usize] != self.qbar().tail(a) {
            return Err(Error::Incompatible("second argument must carry the tail label of the first's edge".into()));
        }
        for p in 0..self.n() {
            if p != l as usize && p != m as usize && eps.tail[p] != eps_prime.tail[p] {
                return Err(Error::Incompatible(format!("idle labels differ at slot {p}")));
            }
        }
        let mut tail = eps.tail.clone();
        tail[l as usize] = self.qbar().tail(a);
        tail[m as usize] = self.qbar().tail(b);
        Ok(self.bracket_by_data(l, a, m, b, &tail))
    }

    /// Bracket from raw data: slots l ≠ m, edges a at l and b at m, common
    /// tail tuple. Equals (b then a) − (a then b) in application order.
    pub fn bracket_by_data(&self, l: u8, a: EdgeId, m: u8, b: EdgeId, tail: &[VertexId]) -> WreathElement {
        let id = Perm::identity(self.n());
        let mut out = WreathElement::zero();
        out.add_term(
            WreathMonomial { start: tail.to_vec(), letters: vec![(m, b), (l, a)], perm: id.clone() },
            Scalar::one(),
        );
        out.add_term(
            WreathMonomial { start: tail.to_vec(), letters: vec![(l, a), (m, b)], perm: id },
            Scalar::from_int(-1),
        );
        out
    }
}

/// A monomial of the n-fold tensor power of the plain path algebra: one
/// plain path per slot.
pub type TensorMonomial = Vec<(VertexId, Vec<EdgeId>)>;

/// Element of the n-fold tensor power of the plain path algebra.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TensorElement {
    pub terms: BTreeMap<TensorMonomial, Scalar>,
}

impl TensorElement {
    pub fn add_term(&mut self, m: TensorMonomial, c: Scalar) {
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

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// The layer-collapsing morphism onto the n-fold tensor power: reorders the
/// letters of each monomial into per-slot paths. Defined on elements whose
/// permutation parts are all trivial.
pub fn upsilon(alg: &WreathAlgebra, x: &WreathElement) -> Result<TensorElement> {
    let mut out = TensorElement::default();
    for (m, c) in &x.terms {
        if !m.perm.is_identity() {
            return Err(Error::Incompatible("upsilon is defined on trivial-permutation elements".into()));
        }
        debug_assert!(alg.is_valid(m));
        let mut slots: TensorMonomial = m.start.iter().map(|&v| (v, vec![])).collect();
        for &(slot, e) in &m.letters {
            slots[slot as usize].1.push(e);
        }
        out.add_term(slots, c.clone());
    }
    Ok(out)
}

/// Slot-wise product in the tensor power (second factor traversed first).
pub fn tensor_mul(qbar: &DoubledQuiver, x: &TensorElement, y: &TensorElement) -> TensorElement {
    let mut out = TensorElement::default();
    for (mx, cx) in &x.terms {
        'next: for (my, cy) in &y.terms {
            let mut prod: TensorMonomial = Vec::with_capacity(mx.len());
            for (px, py) in mx.iter().zip(my.iter()) {
                // head of py must match start of px
                let mut head = py.0;
                for &e in &py.1 {
                    head = qbar.head(e);
                }
                if head != px.0 {
                    continue 'next;
                }
                let mut letters = py.1.clone();
                letters.extend_from_slice(&px.1);
                prod.push((py.0, letters));
            }
            out.add_term(prod, cx.mul(cy));
        }
    }
    out
}

/// Identity of a degree-2 relation generator: either a moment generator at
/// one slot with fixed labels, or a bracket generator at a pair of slots.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RelGen {
    /// Moment element r_{labels[slot]} at `slot`, idle labels elsewhere.
    Moment { slot: u8, labels: Vec<VertexId> },
    /// Bracket of `edge_a` at `slot_l` and `edge_b` at `slot_m` (l < m),
    /// with common tail tuple (tail[slot_l] = t(a), tail[slot_m] = t(b)).
    Bracket { slot_l: u8, slot_m: u8, edge_a: EdgeId, edge_b: EdgeId, tail: Vec<VertexId> },
}

impl RelGen {
    pub fn tail(&self) -> &[VertexId] {
        match self {
            RelGen::Moment { labels, .. } => labels,
            RelGen::Bracket { tail, .. } => tail,
        }
    }

    pub fn head(&self, qbar: &DoubledQuiver) -> Vec<VertexId> {
        match self {
            RelGen::Moment { labels, .. } => labels.clone(),
            RelGen::Bracket { slot_l, slot_m, edge_a, edge_b, tail } => {
                let mut h = tail.clone();
                h[*slot_l as usize] = qbar.head(*edge_a);
                h[*slot_m as usize] = qbar.head(*edge_b);
                h
            }
        }
    }

    /// Homogeneous degree-2 terms as (letters in application order, sign).
    pub fn leading_terms(&self, qbar: &DoubledQuiver) -> Vec<(Vec<Letter>, i8)> {
        match self {
            RelGen::Moment { slot, labels } => {
                let i = labels[*slot as usize];
                crate::quiver::moment_elements(qbar)[i as usize]
                    .iter()
                    .map(|t| (vec![(*slot, t.inner), (*slot, t.outer)], t.sign))
                    .collect()
            }
            RelGen::Bracket { slot_l, slot_m, edge_a, edge_b, .. } => vec![
                (vec![(*slot_m, *edge_b), (*slot_l, *edge_a)], 1),
                (vec![(*slot_l, *edge_a), (*slot_m, *edge_b)], -1),
            ],
        }
    }

    /// The leading part as an element (identity permutation).
    pub fn leading_element(&self, alg: &WreathAlgebra) -> WreathElement {
        let id = Perm::identity(alg.n());
        let mut out = WreathElement::zero();
        for (letters, sign) in self.leading_terms(alg.qbar()) {
            out.add_term(
                WreathMonomial { start: self.tail().to_vec(), letters, perm: id.clone() },
                Scalar::from_int(sign as i64),
            );
        }
        out
    }

    /// Diagonal S_n action; brackets pick up a sign when the slot order
    /// reverses.
    pub fn act(&self, tau: &Perm) -> (RelGen, i8) {
        match self {
            RelGen::Moment { slot, labels } => (
                RelGen::Moment {
                    slot: tau.apply(*slot as usize) as u8,
                    labels: tau.permute_labels(labels),
                },
                1,
            ),
            RelGen::Bracket { slot_l, slot_m, edge_a, edge_b, tail } => {
                let nl = tau.apply(*slot_l as usize) as u8;
                let nm = tau.apply(*slot_m as usize) as u8;
                let ntail = tau.permute_labels(tail);
                if nl < nm {
                    (RelGen::Bracket { slot_l: nl, slot_m: nm, edge_a: *edge_a, edge_b: *edge_b, tail: ntail }, 1)
                } else {
                    (RelGen::Bracket { slot_l: nm, slot_m: nl, edge_a: *edge_b, edge_b: *edge_a, tail: ntail }, -1)
                }
            }
        }
    }
}

/// ν-coefficient sign of a bracket relation: +1 when the first edge is the
/// star of an original second edge, −1 in the mirrored case, 0 otherwise.
pub fn bracket_nu_sign(qbar: &DoubledQuiver, edge_a: EdgeId, edge_b: EdgeId) -> i8 {
    if edge_a == qbar.star(edge_b) && qbar.is_original(edge_b) {
        1
    } else if edge_b == qbar.star(edge_a) && qbar.is_original(edge_a) {
        -1
    } else {
        0
    }
}

/// All degree-2 relation generators of the n-slot algebra, deterministically
/// ordered: every moment generator (slot, label tuple), then every bracket
/// generator (slot pair l < m, ordered edge pair, idle labels).
pub fn all_relation_gens(alg: &WreathAlgebra) -> Vec<RelGen> {
    let n = alg.n();
    let qbar = alg.qbar();
    let mut gens = Vec::new();
    for labels in alg.product_quiver().vertices() {
        for slot in 0..n {
            gens.push(RelGen::Moment { slot: slot as u8, labels: labels.clone() });
        }
    }
    for l in 0..n {
        for m in (l + 1)..n {
            for a in qbar.edge_ids() {
                for b in qbar.edge_ids() {
                    // idle labels run over all tuples on the other slots
                    let mut idle_slots: Vec<usize> = (0..n).filter(|&p| p != l && p != m).collect();
                    idle_slots.sort();
                    let k = qbar.vertex_count() as VertexId;
                    let mut stack: Vec<Vec<VertexId>> = vec![vec![]];
                    for _ in 0..idle_slots.len() {
                        let mut next = Vec::new();
                        for v in &stack {
                            for i in 0..k {
                                let mut w = v.clone();
                                w.push(i);
                                next.push(w);
                            }
                        }
                        stack = next;
                    }
                    for idles in stack {
                        let mut tail = vec![0 as VertexId; n];
                        tail[l] = qbar.tail(a);
                        tail[m] = qbar.tail(b);
                        for (j, &p) in idle_slots.iter().enumerate() {
                            tail[p] = idles[j];
                        }
                        gens.push(RelGen::Bracket {
                            slot_l: l as u8,
                            slot_m: m as u8,
                            edge_a: a,
                            edge_b: b,
                            tail,
                        });
                    }
                }
            }
        }
    }
    gens
}

/// One defining relation: its degree-2 generator together with the full
/// inhomogeneous element (leading part minus deformation terms).
#[derive(Clone, Debug)]
pub struct Relation {
    pub gen: RelGen,
    pub element: WreathElement,
}

/// The deformation relation set for parameters (λ, ν): one relation per
/// moment generator and one per bracket generator. With n = 1 only moment
/// relations are emitted, recovering the deformed single-slot relations;
/// with ν = 0 the relations are the slot-wise moment relations plus
/// vanishing brackets.
pub fn relations(alg: &WreathAlgebra, lambda: &[Scalar], nu: &Scalar) -> Result<Vec<Relation>> {
    if lambda.len() != alg.qbar().vertex_count() {
        return Err(Error::DimensionMismatch(format!(
            "lambda has {} entries for {} vertices",
            lambda.len(),
            alg.qbar().vertex_count()
        )));
    }
    let n = alg.n();
    let mut out = Vec::new();
    for gen in all_relation_gens(alg) {
        let mut element = gen.leading_element(alg);
        match &gen {
            RelGen::Moment { slot, labels } => {
                let i = labels[*slot as usize];
                // subtract λ_i · anchor
                element.add_term(alg.anchor(labels), lambda[i as usize].neg());
                // subtract ν Σ_{j ≠ slot, labels_j = labels_slot} anchor · s_{j,slot}
                for j in 0..n {
                    if j != *slot as usize && labels[j] == i {
                        let s = Perm::transposition(n, j, *slot as usize);
                        element.add_term(alg.anchor_perm(labels, s), nu.neg());
                    }
                }
            }
            RelGen::Bracket { slot_l, slot_m, edge_a, edge_b, .. } => {
                let sign = bracket_nu_sign(alg.qbar(), *edge_a, *edge_b);
                if sign != 0 {
                    let head = gen.head(alg.qbar());
                    let s = Perm::transposition(n, *slot_l as usize, *slot_m as usize);
                    element.add_term(
                        alg.anchor_perm(&head, s),
                        nu.mul(&Scalar::from_int(-sign as i64)),
                    );
                }
            }
        }
        out.push(Relation { gen, element });
    }
    Ok(out)
}

/// Paths of exact length `k` in the product quiver, as (start, letters).
pub fn paths_of_length(pq: &ProductQuiver, k: usize) -> Vec<(Vec<VertexId>, Vec<Letter>)> {
    let mut frontier: Vec<(Vec<VertexId>, Vec<Letter>, Vec<VertexId>)> = pq
        .vertices()
        .into_iter()
        .map(|v| (v.clone(), vec![], v))
        .collect();
    for _ in 0..k {
        let mut next = Vec::new();
        for (start, letters, head) in &frontier {
            for e in pq.edges_from(head) {
                let mut ls = letters.clone();
                ls.push((e.slot, e.edge));
                next.push((start.clone(), ls, pq.edge_head(&e)));
            }
        }
        frontier = next;
    }
    frontier.into_iter().map(|(s, l, _)| (s, l)).collect()
}

/// Exact dimensions by degree 0…d of the quotient of the smash product by a
/// homogeneous degree-2 relation set, given via its generators.
///
/// The relation set must be stable under the diagonal S_n action (the sets
/// produced by [`all_relation_gens`] are), which lets the permutation factor
/// split off: the dimension in degree k is n! times the path-space count
/// minus the rank of the path-space ideal span.
pub fn graded_dimension(alg: &WreathAlgebra, gens: &[RelGen], d: usize) -> Vec<usize> {
    let pq = alg.product_quiver();
    let qbar = alg.qbar();
    let n_fact: usize = (1..=alg.n()).product();
    let mut dims = Vec::with_capacity(d + 1);
    for k in 0..=d {
        let paths = paths_of_length(pq, k);
        if k < 2 || gens.is_empty() {
            dims.push(paths.len() * n_fact);
            continue;
        }
        // index paths by (start, head) block
        let mut block_of: BTreeMap<(Vec<VertexId>, Vec<VertexId>), BTreeMap<(Vec<VertexId>, Vec<Letter>), usize>> =
            BTreeMap::new();
        for (s, l) in &paths {
            let mut head = s.clone();
            for &(slot, e) in l {
                head[slot as usize] = qbar.head(e);
            }
            let blk = block_of.entry((s.clone(), head)).or_default();
            let idx = blk.len();
            blk.insert((s.clone(), l.clone()), idx);
        }
        // ideal span rows per block
        let mut rows: BTreeMap<(Vec<VertexId>, Vec<VertexId>), Vec<Vec<Scalar>>> = BTreeMap::new();
        for g in gens {
            let g_tail = g.tail().to_vec();
            let g_head = g.head(qbar);
            let terms = g.leading_terms(qbar);
            for q_len in 0..=(k - 2) {
                let p_len = k - 2 - q_len;
                // paths q ending at tail(g), paths p starting at head(g)
                let qs: Vec<(Vec<VertexId>, Vec<Letter>)> = paths_of_length(pq, q_len)
                    .into_iter()
                    .filter(|(s, l)| {
                        let mut head = s.clone();
                        for &(slot, e) in l {
                            head[slot as usize] = qbar.head(e);
                        }
                        head == g_tail
                    })
                    .collect();
                let ps: Vec<(Vec<VertexId>, Vec<Letter>)> = paths_of_length(pq, p_len)
                    .into_iter()
                    .filter(|(s, _)| *s == g_head)
                    .collect();
                for (qs_start, qs_letters) in &qs {
                    for (p_start, p_letters) in &ps {
                        let mut p_head = p_start.clone();
                        for &(slot, e) in p_letters {
                            p_head[slot as usize] = qbar.head(e);
                        }
                        let key = (qs_start.clone(), p_head);
                        let blk = &block_of[&key];
                        let mut v = vec![Scalar::zero(); blk.len()];
                        for (g_letters, sign) in &terms {
                            let mut letters = qs_letters.clone();
                            letters.extend_from_slice(g_letters);
                            letters.extend_from_slice(p_letters);
                            let idx = blk[&(qs_start.clone(), letters)];
                            v[idx] = v[idx].add(&Scalar::from_int(*sign as i64));
                        }
                        if v.iter().any(|c| !c.is_zero()) {
                            rows.entry(key).or_default().push(v);
                        }
                    }
                }
            }
        }
        let mut rank = 0;
        for (_, vecs) in rows {
            rank += linalg::span_rank(&vecs);
        }
        dims.push((paths.len() - rank) * n_fact);
    }
    dims
}

/// The sign-twist image of an element under a reorientation: flipped edges
/// map a ↦ a*, a* ↦ −a; identity on labels and permutations.
pub fn twist_element(
    qbar: &DoubledQuiver,
    flip_set: &[usize],
    x: &WreathElement,
) -> WreathElement {
    let originals = qbar.base().edge_count() as EdgeId;
    let map_edge = |e: EdgeId| -> (EdgeId, i8) {
        let (orig, starred) = if e < originals { (e, false) } else { (e - originals, true) };
        if flip_set.contains(&(orig as usize)) {
            if starred {
                (orig, -1) // a* ↦ −a
            } else {
                (orig + originals, 1) // a ↦ a*
            }
        } else {
            (e, 1)
        }
    };
    let mut out = WreathElement::zero();
    for (m, c) in &x.terms {
        let mut sign = 1i64;
        let letters: Vec<Letter> = m
            .letters
            .iter()
            .map(|&(slot, e)| {
                let (ne, s) = map_edge(e);
                sign *= s as i64;
                (slot, ne)
            })
            .collect();
        out.add_term(
            WreathMonomial { start: m.start.clone(), letters, perm: m.perm.clone() },
            c.mul(&Scalar::from_int(sign)),
        );
    }
    out
}

/// Verify that the relation sets of a quiver and a reorientation of it span
/// the same space under the sign-twist map, for the given parameters.
pub fn orientation_iso_check(
    q: &Quiver,
    flip_set: &[usize],
    n: usize,
    lambda: &[Scalar],
    nu: &Scalar,
) -> Result<bool> {
    let q2 = q.reorient(flip_set)?;
    let alg1 = WreathAlgebra::new(q.double(), n)?;
    let alg2 = WreathAlgebra::new(q2.double(), n)?;
    let rel1 = relations(&alg1, lambda, nu)?;
    let rel2 = relations(&alg2, lambda, nu)?;
    let twisted: Vec<WreathElement> =
        rel1.iter().map(|r| twist_element(alg1.qbar(), flip_set, &r.element)).collect();
    let target: Vec<WreathElement> = rel2.iter().map(|r| r.element.clone()).collect();
    // Twist back: in the reoriented quiver the same flip set undoes the flip.
    let twisted_back: Vec<WreathElement> =
        rel2.iter().map(|r| twist_element(alg2.qbar(), flip_set, &r.element)).collect();
    let source: Vec<WreathElement> = rel1.iter().map(|r| r.element.clone()).collect();
    Ok(spans_contain(&target, &twisted) && spans_contain(&source, &twisted_back))
}

/// Does span(basis) contain every element of `others`? Exact.
pub fn spans_contain(basis: &[WreathElement], others: &[WreathElement]) -> bool {
    let mut coords: BTreeMap<WreathMonomial, usize> = BTreeMap::new();
    for e in basis.iter().chain(others.iter()) {
        for m in e.terms.keys() {
            let next = coords.len();
            coords.entry(m.clone()).or_insert(next);
        }
    }
    let dim = coords.len();
    let to_vec = |e: &WreathElement| -> Vec<Scalar> {
        let mut v = vec![Scalar::zero(); dim];
        for (m, c) in &e.terms {
            v[coords[m]] = c.clone();
        }
        v
    };
    let basis_vecs: Vec<Vec<Scalar>> = basis.iter().map(to_vec).collect();
    let base_rank = linalg::span_rank(&basis_vecs);
    let mut all = basis_vecs;
    all.extend(others.iter().map(to_vec));
    linalg::span_rank(&all) == base_rank
}
