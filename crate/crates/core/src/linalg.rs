//! Exact dense linear algebra over [`Scalar`].
//!
//! Gaussian elimination with pivoting on the entry of smallest bit-size and
//! primitive-integer row rescaling between steps, which keeps coefficient
//! growth in check without changing any exact result. Everything here is
//! deterministic.

use num::rational::BigRational;
use num::{BigInt, Integer, One, Signed, Zero};

use crate::scalar::Scalar;

pub type Vector = Vec<Scalar>;

#[derive(Clone, Debug)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Scalar::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vector>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        assert!(rows.iter().all(|v| v.len() == c));
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vector {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = Scalar::zero();
                for j in 0..self.cols {
                    let a = &self[(i, j)];
                    if !a.is_zero() && !v[j].is_zero() {
                        acc = acc.add(&a.mul(&v[j]));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        let t = a.mul(b);
                        out[(i, j)] = out[(i, j)].add(&t);
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// Row echelon form in place; returns the pivot columns.
    fn echelonize(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            // Pivot on the nonzero entry of smallest bit-size.
            let mut best: Option<(usize, u64)> = None;
            for i in r..self.rows {
                let e = &self[(i, c)];
                if !e.is_zero() {
                    let sz = e.size();
                    if best.map_or(true, |(_, bs)| sz < bs) {
                        best = Some((i, sz));
                    }
                }
            }
            let Some((pi, _)) = best else { continue };
            self.swap_rows(r, pi);
            let inv = self[(r, c)].inv().expect("pivot is nonzero");
            for j in c..self.cols {
                if !self[(r, j)].is_zero() {
                    self[(r, j)] = self[(r, j)].mul(&inv);
                }
            }
            for i in 0..self.rows {
                if i == r || self[(i, c)].is_zero() {
                    continue;
                }
                let factor = self[(i, c)].clone();
                for j in c..self.cols {
                    if !self[(r, j)].is_zero() {
                        let t = factor.mul(&self[(r, j)]);
                        self[(i, j)] = self[(i, j)].sub(&t);
                    }
                }
                // Only not-yet-pivotal rows may be rescaled: finalized rows
                // must keep their unit pivot for back-substitution.
                if i > r {
                    self.rescale_row_primitive(i);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Rescale a row by a positive rational so all coefficient numerators are
    /// coprime integers. Does not change rank, kernel, or solution sets when
    /// applied to non-pivot rows of a homogeneous system.
    fn rescale_row_primitive(&mut self, i: usize) {
        let mut lcm_den = BigInt::one();
        let mut gcd_num = BigInt::zero();
        for j in 0..self.cols {
            for c in self[(i, j)].coeffs() {
                if !c.is_zero() {
                    lcm_den = lcm_den.lcm(c.denom());
                    gcd_num = gcd_num.gcd(&c.numer().abs());
                }
            }
        }
        if gcd_num.is_zero() {
            return;
        }
        let factor = BigRational::new(lcm_den, gcd_num);
        if factor.is_one() {
            return;
        }
        let s = Scalar::from_rational(factor);
        for j in 0..self.cols {
            if !self[(i, j)].is_zero() {
                self[(i, j)] = self[(i, j)].mul(&s);
            }
        }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.echelonize().len()
    }

    /// Exact basis of the right null space; empty iff the matrix is injective.
    pub fn kernel_basis(&self) -> Vec<Vector> {
        let mut m = self.clone();
        let pivots = m.echelonize();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if is_pivot[free] {
                continue;
            }
            let mut v = vec![Scalar::zero(); self.cols];
            v[free] = Scalar::one();
            for (r, &pc) in pivots.iter().enumerate() {
                // Row r reads: x_pc + sum_{j > pc, nonpivot} m[r][j] x_j = 0.
                v[pc] = m[(r, free)].neg();
            }
            basis.push(v);
        }
        basis
    }

    /// One exact solution of `self * x = rhs`, if consistent.
    pub fn solve(&self, rhs: &[Scalar]) -> Option<Vector> {
        assert_eq!(rhs.len(), self.rows);
        let mut aug = Matrix::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                rhs[i].clone()
            }
        });
        let pivots = aug.echelonize();
        if pivots.contains(&self.cols) {
            return None; // inconsistent
        }
        let mut x = vec![Scalar::zero(); self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = aug[(r, self.cols)].clone();
        }
        Some(x)
    }
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl Eq for Matrix {}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Scalar;
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        &mut self.data[i * self.cols + j]
    }
}

/// Basis of the span of the given vectors (rows of the echelon form).
pub fn span_basis(vectors: &[Vector]) -> Vec<Vector> {
    if vectors.is_empty() {
        return vec![];
    }
    let mut m = Matrix::from_rows(vectors.to_vec());
    let pivots = m.echelonize();
    (0..pivots.len()).map(|r| m.row(r).to_vec()).collect()
}

pub fn span_rank(vectors: &[Vector]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    Matrix::from_rows(vectors.to_vec()).rank()
}

/// Is `v` in the span of `basis`?
pub fn in_span(basis: &[Vector], v: &Vector) -> bool {
    if v.iter().all(|c| c.is_zero()) {
        return true;
    }
    if basis.is_empty() {
        return false;
    }
    let r = span_rank(basis);
    let mut all = basis.to_vec();
    all.push(v.clone());
    span_rank(&all) == r
}

/// Basis of span(a) ∩ span(b), computed via the kernel of the stacked matrix
/// whose columns are the vectors of `a` followed by the vectors of `b`.
pub fn subspace_intersection(a: &[Vector], b: &[Vector]) -> Vec<Vector> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let dim = a[0].len();
    assert!(a.iter().chain(b.iter()).all(|v| v.len() == dim));
    let stacked = Matrix::from_fn(dim, a.len() + b.len(), |i, j| {
        if j < a.len() {
            a[j][i].clone()
        } else {
            b[j - a.len()][i].clone()
        }
    });
    let mut out = Vec::new();
    for k in stacked.kernel_basis() {
        // a-part coefficients give a vector in both spans.
        let mut v = vec![Scalar::zero(); dim];
        for (j, c) in k[..a.len()].iter().enumerate() {
            if !c.is_zero() {
                for i in 0..dim {
                    if !a[j][i].is_zero() {
                        v[i] = v[i].add(&c.mul(&a[j][i]));
                    }
                }
            }
        }
        if v.iter().any(|c| !c.is_zero()) {
            out.push(v);
        }
    }
    span_basis(&out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::random_rational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Plain textbook row reduction, kept independent of `Matrix::echelonize`
    /// (leftmost pivot, no size heuristics, no rescaling).
    fn oracle_rank(rows: &[Vector]) -> usize {
        let mut m: Vec<Vector> = rows.to_vec();
        if m.is_empty() {
            return 0;
        }
        let cols = m[0].len();
        let mut rank = 0;
        for c in 0..cols {
            let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
            m.swap(rank, p);
            let inv = m[rank][c].inv().unwrap();
            for j in 0..cols {
                m[rank][j] = m[rank][j].mul(&inv);
            }
            for i in 0..m.len() {
                if i != rank && !m[i][c].is_zero() {
                    let f = m[i][c].clone();
                    for j in 0..cols {
                        let t = f.mul(&m[rank][j]);
                        m[i][j] = m[i][j].sub(&t);
                    }
                }
            }
            rank += 1;
            if rank == m.len() {
                break;
            }
        }
        rank
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
        Matrix::from_fn(r, c, |_, _| {
            if rng.gen_bool(0.7) {
                random_rational(rng)
            } else {
                Scalar::zero()
            }
        })
    }

    #[test]
    fn kernel_of_zero_and_identity() {
        assert_eq!(Matrix::zeros(2, 2).kernel_basis().len(), 2);
        assert!(Matrix::identity(3).kernel_basis().is_empty());
    }

    #[test]
    fn kernel_dimension_matches_rank_defect() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let m = random_matrix(&mut rng, 5, 7);
            let rank = m.rank();
            let rows: Vec<Vector> = (0..5).map(|i| m.row(i).to_vec()).collect();
            assert_eq!(rank, oracle_rank(&rows));
            let kernel = m.kernel_basis();
            assert_eq!(kernel.len(), 7 - rank);
            for v in &kernel {
                assert!(m.mul_vec(v).iter().all(|c| c.is_zero()));
            }
            assert_eq!(span_rank(&kernel), kernel.len());
        }
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = random_matrix(&mut rng, 4, 3);
        let x: Vector = (0..3).map(|_| random_rational(&mut rng)).collect();
        let b = m.mul_vec(&x);
        let sol = m.solve(&b).expect("consistent system");
        assert_eq!(m.mul_vec(&sol), b);
        // Perturb rhs outside the column space (rank is very likely 3 < 4).
        if m.rank() == 3 {
            let cols: Vec<Vector> = (0..3).map(|j| (0..4).map(|i| m[(i, j)].clone()).collect()).collect();
            let mut bad = b.clone();
            for v in [vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0], vec![0, 0, 0, 1]] {
                let cand: Vector = bad
                    .iter()
                    .zip(v.iter())
                    .map(|(c, d)| c.add(&Scalar::from_int(*d)))
                    .collect();
                if !in_span(&cols, &cand) {
                    bad = cand;
                    break;
                }
            }
            if !in_span(&cols, &bad) {
                assert!(m.solve(&bad).is_none());
            }
        }
    }

    #[test]
    fn intersection_trivial_cases() {
        let e1 = vec![Scalar::one(), Scalar::zero()];
        let e2 = vec![Scalar::zero(), Scalar::one()];
        let meet = subspace_intersection(&[e1.clone()], &[e1.clone()]);
        assert_eq!(meet.len(), 1);
        assert!(in_span(&[e1.clone()], &meet[0]));
        assert!(subspace_intersection(&[e1], &[e2]).is_empty());
    }

    #[test]
    fn intersection_dimension_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..8 {
            let a: Vec<Vector> = (0..3)
                .map(|_| (0..6).map(|_| random_rational(&mut rng)).collect())
                .collect();
            let b: Vec<Vector> = (0..3)
                .map(|_| (0..6).map(|_| random_rational(&mut rng)).collect())
                .collect();
            let meet = subspace_intersection(&a, &b);
            let mut sum = a.clone();
            sum.extend(b.clone());
            let expected = span_rank(&a) + span_rank(&b) - span_rank(&sum);
            assert_eq!(meet.len(), expected);
            for v in &meet {
                assert!(in_span(&a, v) && in_span(&b, v));
            }
        }
    }
}
