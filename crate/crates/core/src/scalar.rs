//! Exact arithmetic in cyclotomic fields ℚ(ζ_m).
//!
//! A [`Scalar`] is an element of ℚ(ζ_m) stored in the power basis
//! 1, ζ, …, ζ^{φ(m)−1} modulo the m-th cyclotomic polynomial Φ_m, with
//! arbitrary-precision rational coefficients. Representations are canonical
//! for a fixed conductor, so equality and the zero test are exact coefficient
//! comparisons. Conductor m = 1 embeds the plain rationals; mixed-conductor
//! operations lift both operands to the least common conductor.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::{Error, Result};

/// Euler totient of `m`.
pub fn euler_phi(m: u32) -> usize {
    let mut n = m;
    let mut phi = m;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi as usize
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    out
}

/// Exact quotient of polynomial division (remainder must vanish).
fn poly_div_exact(num: &[BigRational], den: &[BigRational]) -> Vec<BigRational> {
    let mut rem: Vec<BigRational> = num.to_vec();
    let dd = den.len() - 1;
    let lead = &den[dd];
    assert!(!lead.is_zero());
    let mut quot = vec![BigRational::zero(); rem.len().saturating_sub(dd)];
    for k in (dd..rem.len()).rev() {
        let c = rem[k].clone();
        if c.is_zero() {
            continue;
        }
        let q = &c / lead;
        quot[k - dd] = q.clone();
        for j in 0..=dd {
            let t = &q * &den[j];
            rem[k - dd + j] -= t;
        }
    }
    assert!(rem.iter().all(|c| c.is_zero()), "inexact polynomial division");
    quot
}

/// Monic coefficients of the m-th cyclotomic polynomial, low degree first.
fn cyclotomic_poly(m: u32) -> Vec<BigRational> {
    // x^m - 1 divided by the product of Phi_d over proper divisors d of m.
    let mut num = vec![BigRational::zero(); m as usize + 1];
    num[0] = -BigRational::one();
    num[m as usize] = BigRational::one();
    let mut den = vec![BigRational::one()];
    for d in 1..m {
        if m % d == 0 {
            den = poly_mul(&den, &with_field(d, |f| f.modulus.clone()));
        }
    }
    poly_div_exact(&num, &den)
}

struct Field {
    phi: usize,
    /// Monic Φ_m, low degree first, length phi + 1.
    modulus: Vec<BigRational>,
}

thread_local! {
    static FIELDS: RefCell<BTreeMap<u32, Rc<Field>>> = RefCell::new(BTreeMap::new());
}

fn with_field<T>(m: u32, f: impl FnOnce(&Field) -> T) -> T {
    let field = FIELDS.with(|cache| {
        if let Some(fl) = cache.borrow().get(&m) {
            return fl.clone();
        }
        let fl = Rc::new(Field {
            phi: euler_phi(m),
            modulus: cyclotomic_poly(m),
        });
        cache.borrow_mut().insert(m, fl.clone());
        fl
    });
    f(&field)
}

/// Reduce a polynomial (low degree first) modulo Φ_m, truncating to length φ(m).
fn reduce_mod_phi(mut coeffs: Vec<BigRational>, m: u32) -> Vec<BigRational> {
    with_field(m, |field| {
        let phi = field.phi;
        for k in (phi..coeffs.len()).rev() {
            let c = std::mem::replace(&mut coeffs[k], BigRational::zero());
            if c.is_zero() {
                continue;
            }
            // x^k = x^{k-phi} * (x^phi) and x^phi = -sum_{j<phi} Phi_j x^j.
            for j in 0..phi {
                if !field.modulus[j].is_zero() {
                    let t = &c * &field.modulus[j];
                    coeffs[k - phi + j] -= t;
                }
            }
        }
        coeffs.truncate(phi);
        coeffs.resize(phi, BigRational::zero());
        coeffs
    })
}

/// An element of the cyclotomic field ℚ(ζ_m), exact.
#[derive(Clone)]
pub struct Scalar {
    conductor: u32,
    /// Length φ(conductor); coefficients on 1, ζ, …, ζ^{φ−1}.
    coeffs: Vec<BigRational>,
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        if self.conductor == other.conductor {
            return self.coeffs == other.coeffs;
        }
        let m = self.lcm_conductor(other);
        self.lift(m).coeffs == other.lift(m).coeffs
    }
}

impl Eq for Scalar {}

impl Scalar {
    pub fn zero() -> Self {
        Scalar { conductor: 1, coeffs: vec![BigRational::zero()] }
    }

    pub fn one() -> Self {
        Scalar { conductor: 1, coeffs: vec![BigRational::one()] }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(q: BigRational) -> Self {
        Scalar { conductor: 1, coeffs: vec![q] }
    }

    /// `p/q` as an exact rational scalar. Panics if `q == 0`.
    pub fn rat(p: i64, q: i64) -> Self {
        assert!(q != 0);
        Scalar::from_rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    /// The primitive m-th root of unity ζ_m.
    pub fn zeta(m: u32) -> Self {
        Scalar::zeta_pow(m, 1)
    }

    /// ζ_m^k.
    pub fn zeta_pow(m: u32, k: i64) -> Self {
        assert!(m >= 1);
        let e = k.rem_euclid(m as i64) as usize;
        let mut coeffs = vec![BigRational::zero(); e + 1];
        coeffs[e] = BigRational::one();
        Scalar { conductor: m, coeffs: reduce_mod_phi(coeffs, m) }
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    /// Embed into ℚ(ζ_target); `conductor` must divide `target`.
    pub fn lift(&self, target: u32) -> Scalar {
        if self.conductor == target {
            return self.clone();
        }
        assert!(target % self.conductor == 0, "conductor {} does not divide {}", self.conductor, target);
        let step = (target / self.conductor) as usize;
        let mut coeffs = vec![BigRational::zero(); (self.coeffs.len() - 1) * step + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                coeffs[k * step] = c.clone();
            }
        }
        Scalar { conductor: target, coeffs: reduce_mod_phi(coeffs, target) }
    }

    fn lcm_conductor(&self, other: &Scalar) -> u32 {
        num::integer::lcm(self.conductor, other.conductor)
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        let m = self.lcm_conductor(other);
        let mut a = self.lift(m);
        let b = other.lift(m);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs.iter()) {
            *x += y;
        }
        a
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        let m = self.lcm_conductor(other);
        let mut a = self.lift(m);
        let b = other.lift(m);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs.iter()) {
            *x -= y;
        }
        a
    }

    pub fn neg(&self) -> Scalar {
        Scalar { conductor: self.conductor, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        let m = self.lcm_conductor(other);
        let a = self.lift(m);
        let b = other.lift(m);
        let prod = poly_mul(&a.coeffs, &b.coeffs);
        Scalar { conductor: m, coeffs: reduce_mod_phi(prod, m) }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm with Φ_m.
    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let m = self.conductor;
        if m == 1 || self.coeffs[1..].iter().all(|c| c.is_zero()) {
            let mut coeffs = vec![BigRational::zero(); self.coeffs.len()];
            coeffs[0] = BigRational::one() / &self.coeffs[0];
            return Ok(Scalar { conductor: m, coeffs });
        }
        let modulus = with_field(m, |f| f.modulus.clone());
        // Extended gcd of (self, Phi_m) in Q[x]; the gcd is 1 since Phi_m is
        // irreducible and self is nonzero of smaller degree.
        let mut r0: Vec<BigRational> = modulus;
        let mut r1: Vec<BigRational> = trim(self.coeffs.clone());
        let mut s0: Vec<BigRational> = vec![];
        let mut s1: Vec<BigRational> = vec![BigRational::one()];
        while !r1.is_empty() {
            let (q, r) = poly_divmod(&r0, &r1);
            let s = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        // r0 = gcd (a nonzero constant), s0 * self ≡ r0 (mod Phi_m).
        assert!(r0.len() == 1, "cyclotomic polynomial not coprime to element");
        let c = r0[0].clone();
        let inv_coeffs: Vec<BigRational> = s0.iter().map(|x| x / &c).collect();
        Ok(Scalar { conductor: m, coeffs: reduce_mod_phi(inv_coeffs, m) })
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn field_op(&self, other: &Scalar, op: FieldOp) -> Result<Scalar> {
        match op {
            FieldOp::Add => Ok(self.add(other)),
            FieldOp::Sub => Ok(self.sub(other)),
            FieldOp::Mul => Ok(self.mul(other)),
            FieldOp::Div => self.div(other),
        }
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut acc = Scalar::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// The rational value if this element lies in ℚ.
    pub fn to_rational(&self) -> Option<BigRational> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Bit-size measure used for pivot selection in exact elimination.
    pub fn size(&self) -> u64 {
        self.coeffs
            .iter()
            .map(|c| (c.numer().bits() + c.denom().bits()) as u64)
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

fn trim(mut v: Vec<BigRational>) -> Vec<BigRational> {
    while v.last().map_or(false, |c| c.is_zero()) {
        v.pop();
    }
    v
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] -= c;
    }
    trim(out)
}

fn poly_divmod(num: &[BigRational], den: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let den = den.to_vec();
    let dd = den.len() - 1;
    let lead = den[dd].clone();
    let mut rem = num.to_vec();
    if rem.len() < den.len() {
        return (vec![], trim(rem));
    }
    let mut quot = vec![BigRational::zero(); rem.len() - dd];
    for k in (dd..rem.len()).rev() {
        let c = rem[k].clone();
        if c.is_zero() {
            continue;
        }
        let q = &c / &lead;
        quot[k - dd] = q.clone();
        for j in 0..=dd {
            let t = &q * &den[j];
            rem[k - dd + j] -= t;
        }
    }
    (trim(quot), trim(rem))
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            let abs = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {} ", sign)?;
            }
            if k == 0 {
                write!(f, "{}", abs)?;
            } else {
                if !abs.is_one() {
                    write!(f, "{}*", abs)?;
                }
                if k == 1 {
                    write!(f, "z{}", self.conductor)?;
                } else {
                    write!(f, "z{}^{}", self.conductor, k)?;
                }
            }
        }
        Ok(())
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $imp:ident) => {
        impl std::ops::$trait for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                Scalar::$imp(self, rhs)
            }
        }
        impl std::ops::$trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                Scalar::$imp(&self, &rhs)
            }
        }
    };
}

scalar_binop!(Add, add, add);
scalar_binop!(Sub, sub, sub);
scalar_binop!(Mul, mul, mul);

impl std::ops::Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::neg(self)
    }
}

impl std::ops::Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::neg(&self)
    }
}

/// Parse an exact rational from a string like `3`, `-3/2`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parts: Vec<&str> = s.split('/').collect();
    let bad = || Error::Parse(format!("invalid rational: {s:?}"));
    match parts.as_slice() {
        [n] => {
            let n: BigInt = n.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(n))
        }
        [n, d] => {
            let n: BigInt = n.parse().map_err(|_| bad())?;
            let d: BigInt = d.parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator: {s:?}")));
            }
            Ok(BigRational::new(n, d))
        }
        _ => Err(bad()),
    }
}

/// Small random rational with numerator in [-9, 9] and denominator in [1, 9].
pub fn random_rational<R: rand::Rng>(rng: &mut R) -> Scalar {
    let p: i64 = rng.gen_range(-9..=9);
    let q: i64 = rng.gen_range(1..=9);
    Scalar::rat(p, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_scalar(rng: &mut ChaCha8Rng, m: u32) -> Scalar {
        let phi = euler_phi(m) as i64;
        let mut acc = Scalar::zero();
        for k in 0..phi {
            let c = random_rational(rng);
            acc = acc.add(&c.mul(&Scalar::zeta_pow(m, k)));
        }
        acc
    }

    #[test]
    fn zeta4_squared_is_minus_one() {
        let i = Scalar::zeta(4);
        assert_eq!(i.mul(&i), Scalar::from_int(-1));
    }

    #[test]
    fn cube_roots_sum_to_zero() {
        let z = Scalar::zeta(3);
        let sum = Scalar::one().add(&z).add(&z.mul(&z));
        assert!(sum.is_zero());
    }

    #[test]
    fn inverse_of_one_minus_zeta5() {
        let a = Scalar::one().sub(&Scalar::zeta(5));
        let inv = a.inv().unwrap();
        assert!(inv.mul(&a).is_one());
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert!(Scalar::one().div(&Scalar::zero()).is_err());
    }

    #[test]
    fn field_axioms_randomized() {
        for &m in &[1u32, 2, 3, 4, 5, 8, 12] {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + m as u64);
            for _ in 0..20 {
                let a = random_scalar(&mut rng, m);
                let b = random_scalar(&mut rng, m);
                let c = random_scalar(&mut rng, m);
                // Associativity and distributivity.
                assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
                assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
                assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
                // Inverses.
                if !a.is_zero() {
                    assert!(a.mul(&a.inv().unwrap()).is_one());
                }
            }
        }
    }

    #[test]
    fn lifting_is_a_field_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_scalar(&mut rng, 4);
            let b = random_scalar(&mut rng, 4);
            assert_eq!(a.mul(&b).lift(12), a.lift(12).mul(&b.lift(12)));
            assert_eq!(a.add(&b).lift(12), a.lift(12).add(&b.lift(12)));
        }
        // Cross-conductor arithmetic lifts to the lcm.
        let z3 = Scalar::zeta(3);
        let z4 = Scalar::zeta(4);
        let prod = z3.mul(&z4);
        assert_eq!(prod.conductor(), 12);
        assert_eq!(prod, Scalar::zeta_pow(12, 7));
    }

    #[test]
    fn zeta6_relates_to_zeta3() {
        // zeta_6^2 = zeta_3 after lifting.
        let z6 = Scalar::zeta(6);
        assert_eq!(z6.mul(&z6), Scalar::zeta(3).lift(6));
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("3/2").unwrap(), BigRational::new(3.into(), 2.into()));
        assert_eq!(parse_rational("-7").unwrap(), BigRational::from_integer((-7).into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
