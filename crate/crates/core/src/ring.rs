//! Exact coefficient rings and matrices over them.
//!
//! Rings are small descriptor objects (modulus, variable names, ...) operating
//! on plain element values, so the same generic code runs over big integers,
//! integers mod p^s, rationals, parameter polynomials and dual numbers.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{CoreError, Result};

/// Contract for an exact commutative coefficient ring.
///
/// The descriptor carries the context (modulus, number of parameters);
/// elements are plain values. All operations are pure.
pub trait CoefficientRing: Clone + PartialEq + fmt::Debug + Send + Sync {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse, when the element is a unit.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    /// Canonical text form (decimal for integers). Round-trips via `parse`.
    fn text(&self, a: &Self::Elem) -> String;
    fn parse(&self, s: &str) -> Option<Self::Elem>;
    fn from_i64(&self, v: i64) -> Self::Elem;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }
    fn add_assign(&self, a: &mut Self::Elem, b: &Self::Elem) {
        *a = self.add(a, b);
    }
    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }
}

// ---------------------------------------------------------------------------
// Arbitrary-precision integers
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct BigIntRing;

impl CoefficientRing for BigIntRing {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn inv(&self, a: &BigInt) -> Option<BigInt> {
        if a.is_one() || (-a).is_one() {
            Some(a.clone())
        } else {
            None
        }
    }
    fn text(&self, a: &BigInt) -> String {
        a.to_string()
    }
    fn parse(&self, s: &str) -> Option<BigInt> {
        s.parse().ok()
    }
    fn from_i64(&self, v: i64) -> BigInt {
        BigInt::from(v)
    }
}

// ---------------------------------------------------------------------------
// Rationals
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct RationalRing;

impl CoefficientRing for RationalRing {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn text(&self, a: &BigRational) -> String {
        if a.denom().is_one() {
            a.numer().to_string()
        } else {
            format!("{}/{}", a.numer(), a.denom())
        }
    }
    fn parse(&self, s: &str) -> Option<BigRational> {
        match s.split_once('/') {
            Some((n, d)) => Some(BigRational::new(n.parse().ok()?, d.parse().ok()?)),
            None => Some(BigRational::from(s.parse::<BigInt>().ok()?)),
        }
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from(BigInt::from(v))
    }
}

// ---------------------------------------------------------------------------
// Integers mod p^s
// ---------------------------------------------------------------------------

/// The ring Z/p^s, elements stored as least non-negative residues.
///
/// The modulus is capped below 2^31 so that products fit in u64.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ZpmRing {
    p: u64,
    s: u32,
    modulus: u64,
}

fn is_small_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl ZpmRing {
    pub fn new(p: u64, s: u32) -> Self {
        assert!(is_small_prime(p), "modulus base {p} is not prime");
        assert!(s >= 1, "exponent must be >= 1");
        let mut modulus: u64 = 1;
        for _ in 0..s {
            modulus = modulus.checked_mul(p).expect("modulus overflow");
        }
        assert!(modulus < (1 << 31), "modulus p^s must be < 2^31");
        ZpmRing { p, s, modulus }
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn s(&self) -> u32 {
        self.s
    }
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn reduce_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.modulus as i64) as u64
    }

    pub fn reduce_bigint(&self, v: &BigInt) -> u64 {
        let m = BigInt::from(self.modulus);
        let r = ((v % &m) + &m) % &m;
        let (_, digits) = r.to_u64_digits();
        *digits.first().unwrap_or(&0)
    }

    /// p-adic valuation of a residue, capped at s (the valuation of 0).
    pub fn valuation(&self, a: u64) -> u32 {
        if a == 0 {
            return self.s;
        }
        let mut v = 0;
        let mut a = a;
        while a % self.p == 0 {
            a /= self.p;
            v += 1;
        }
        v
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a % self.modulus;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % self.modulus;
            }
            base = base * base % self.modulus;
            e >>= 1;
        }
        acc
    }

    /// Restriction to precision s' <= s.
    pub fn truncated(&self, s: u32) -> ZpmRing {
        assert!(s <= self.s);
        ZpmRing::new(self.p, s)
    }
}

impl CoefficientRing for ZpmRing {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.modulus
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.modulus
    }
    fn neg(&self, a: &u64) -> u64 {
        (self.modulus - a) % self.modulus
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.modulus
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if a % self.p == 0 {
            return None;
        }
        // extended Euclid in i128
        let (mut r0, mut r1) = (self.modulus as i128, *a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Some(t0.rem_euclid(self.modulus as i128) as u64)
    }
    fn text(&self, a: &u64) -> String {
        a.to_string()
    }
    fn parse(&self, s: &str) -> Option<u64> {
        let v: u64 = s.parse().ok()?;
        Some(v % self.modulus)
    }
    fn from_i64(&self, v: i64) -> u64 {
        self.reduce_i64(v)
    }
}

// ---------------------------------------------------------------------------
// Parameter polynomials
// ---------------------------------------------------------------------------

/// A polynomial in named parameters with coefficients in a base ring.
/// No zero coefficients are stored; term order is the BTreeMap exponent order.
#[derive(Clone, PartialEq, Debug)]
pub struct ParamPoly<T> {
    pub terms: BTreeMap<Vec<u32>, T>,
}

impl<T> ParamPoly<T> {
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree (sum of parameter exponents) of the highest term, 0 for 0.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }
}

/// Polynomial ring over `base` in `names.len()` parameters.
#[derive(Clone, PartialEq, Debug)]
pub struct ParamRing<R: CoefficientRing> {
    pub base: R,
    pub names: Vec<String>,
}

impl<R: CoefficientRing> ParamRing<R> {
    pub fn new(base: R, names: Vec<String>) -> Self {
        ParamRing { base, names }
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn constant(&self, c: R::Elem) -> ParamPoly<R::Elem> {
        let mut terms = BTreeMap::new();
        if !self.base.is_zero(&c) {
            terms.insert(vec![0; self.nvars()], c);
        }
        ParamPoly { terms }
    }

    /// The monomial `var_i`.
    pub fn var(&self, i: usize) -> ParamPoly<R::Elem> {
        assert!(i < self.nvars());
        let mut e = vec![0u32; self.nvars()];
        e[i] = 1;
        ParamPoly {
            terms: BTreeMap::from([(e, self.base.one())]),
        }
    }

    pub fn coefficient(&self, a: &ParamPoly<R::Elem>, exp: &[u32]) -> R::Elem {
        a.terms
            .get(exp)
            .cloned()
            .unwrap_or_else(|| self.base.zero())
    }

    /// Constant (parameter-free) coefficient.
    pub fn constant_term(&self, a: &ParamPoly<R::Elem>) -> R::Elem {
        self.coefficient(a, &vec![0; self.nvars()])
    }

    /// Keep only terms of total degree <= d.
    pub fn truncate_degree(&self, a: &ParamPoly<R::Elem>, d: u32) -> ParamPoly<R::Elem> {
        ParamPoly {
            terms: a
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() <= d)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Substitute 1 for parameter `i` (drop it from all exponents).
    pub fn substitute_one(&self, a: &ParamPoly<R::Elem>, i: usize) -> ParamPoly<R::Elem> {
        let mut out: BTreeMap<Vec<u32>, R::Elem> = BTreeMap::new();
        for (e, c) in &a.terms {
            let mut e2 = e.clone();
            e2[i] = 0;
            match out.get_mut(&e2) {
                Some(acc) => self.base.add_assign(acc, c),
                None => {
                    out.insert(e2, c.clone());
                }
            }
        }
        out.retain(|_, c| !self.base.is_zero(c));
        ParamPoly { terms: out }
    }

    /// Multiply by `var_i ^ k`.
    pub fn shift_var(&self, a: &ParamPoly<R::Elem>, i: usize, k: u32) -> ParamPoly<R::Elem> {
        ParamPoly {
            terms: a
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e2 = e.clone();
                    e2[i] += k;
                    (e2, c.clone())
                })
                .collect(),
        }
    }

    /// Formal derivative in parameter `i`.
    pub fn derivative(&self, a: &ParamPoly<R::Elem>, i: usize) -> ParamPoly<R::Elem> {
        let mut terms = BTreeMap::new();
        for (e, c) in &a.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            let c2 = self.base.mul(c, &self.base.from_i64(e[i] as i64));
            if !self.base.is_zero(&c2) {
                terms.insert(e2, c2);
            }
        }
        ParamPoly { terms }
    }

    /// Raise every parameter exponent to the q-th power (a_I -> a_I^q),
    /// mapping coefficients through `ground`.
    pub fn map_exponents_pow(
        &self,
        a: &ParamPoly<R::Elem>,
        q: u32,
        ground: impl Fn(&R::Elem) -> R::Elem,
    ) -> ParamPoly<R::Elem> {
        ParamPoly {
            terms: a
                .terms
                .iter()
                .map(|(e, c)| (e.iter().map(|x| x * q).collect(), ground(c)))
                .collect(),
        }
    }

    /// Evaluate at a full point.
    pub fn evaluate(&self, a: &ParamPoly<R::Elem>, point: &[R::Elem]) -> R::Elem {
        assert_eq!(point.len(), self.nvars());
        let mut acc = self.base.zero();
        for (e, c) in &a.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t = self.base.mul(&t, &point[i]);
                }
            }
            self.base.add_assign(&mut acc, &t);
        }
        acc
    }

    /// Map coefficients into another base ring.
    pub fn map_base<S: CoefficientRing>(
        &self,
        target: &ParamRing<S>,
        a: &ParamPoly<R::Elem>,
        f: impl Fn(&R::Elem) -> S::Elem,
    ) -> ParamPoly<S::Elem> {
        assert_eq!(self.nvars(), target.nvars());
        let mut terms = BTreeMap::new();
        for (e, c) in &a.terms {
            let c2 = f(c);
            if !target.base.is_zero(&c2) {
                terms.insert(e.clone(), c2);
            }
        }
        ParamPoly { terms }
    }
}

impl<R: CoefficientRing> CoefficientRing for ParamRing<R> {
    type Elem = ParamPoly<R::Elem>;

    fn zero(&self) -> Self::Elem {
        ParamPoly {
            terms: BTreeMap::new(),
        }
    }
    fn one(&self) -> Self::Elem {
        self.constant(self.base.one())
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.terms.is_empty()
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let mut out = a.terms.clone();
        for (e, c) in &b.terms {
            match out.get_mut(e) {
                Some(acc) => self.base.add_assign(acc, c),
                None => {
                    out.insert(e.clone(), c.clone());
                }
            }
        }
        out.retain(|_, c| !self.base.is_zero(c));
        ParamPoly { terms: out }
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        ParamPoly {
            terms: a
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), self.base.neg(c)))
                .collect(),
        }
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let mut out: BTreeMap<Vec<u32>, R::Elem> = BTreeMap::new();
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let c = self.base.mul(ca, cb);
                match out.get_mut(&e) {
                    Some(acc) => self.base.add_assign(acc, &c),
                    None => {
                        out.insert(e, c);
                    }
                }
            }
        }
        out.retain(|_, c| !self.base.is_zero(c));
        ParamPoly { terms: out }
    }
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem> {
        // only constants can be units in a polynomial ring over a domain
        if a.terms.len() != 1 {
            return None;
        }
        let (e, c) = a.terms.iter().next().unwrap();
        if e.iter().any(|&x| x != 0) {
            return None;
        }
        Some(self.constant(self.base.inv(c)?))
    }
    fn text(&self, a: &Self::Elem) -> String {
        if a.terms.is_empty() {
            return "0".to_string();
        }
        let parts: Vec<String> = a
            .terms
            .iter()
            .map(|(e, c)| {
                let mut s = self.base.text(c);
                for (i, &k) in e.iter().enumerate() {
                    if k == 1 {
                        s.push_str(&format!("*{}", self.names[i]));
                    } else if k > 1 {
                        s.push_str(&format!("*{}^{}", self.names[i], k));
                    }
                }
                s
            })
            .collect();
        parts.join(" + ")
    }
    fn parse(&self, s: &str) -> Option<Self::Elem> {
        let s = s.trim();
        if s == "0" {
            return Some(self.zero());
        }
        let mut acc = self.zero();
        for term in s.split(" + ") {
            let mut coeff: Option<R::Elem> = None;
            let mut exp = vec![0u32; self.nvars()];
            for (idx, factor) in term.split('*').enumerate() {
                if idx == 0 {
                    coeff = self.base.parse(factor);
                    coeff.as_ref()?;
                } else {
                    let (name, k) = match factor.split_once('^') {
                        Some((n, k)) => (n, k.parse().ok()?),
                        None => (factor, 1u32),
                    };
                    let vi = self.names.iter().position(|x| x == name)?;
                    exp[vi] += k;
                }
            }
            let mono = ParamPoly {
                terms: BTreeMap::from([(exp, coeff?)]),
            };
            acc = self.add(&acc, &mono);
        }
        Some(acc)
    }
    fn from_i64(&self, v: i64) -> Self::Elem {
        self.constant(self.base.from_i64(v))
    }
}

// ---------------------------------------------------------------------------
// Dual numbers: value + derivative, for pointwise connection checks
// ---------------------------------------------------------------------------

/// R[eps]/(eps^2). Element (a, b) represents a + b*eps; the eps part carries
/// the derivative along a one-parameter deformation.
#[derive(Clone, PartialEq, Debug)]
pub struct DualRing<R: CoefficientRing> {
    pub base: R,
}

impl<R: CoefficientRing> DualRing<R> {
    pub fn new(base: R) -> Self {
        DualRing { base }
    }
    pub fn lift(&self, a: R::Elem) -> (R::Elem, R::Elem) {
        (a, self.base.zero())
    }
    pub fn with_deriv(&self, a: R::Elem, d: R::Elem) -> (R::Elem, R::Elem) {
        (a, d)
    }
}

impl<R: CoefficientRing> CoefficientRing for DualRing<R> {
    type Elem = (R::Elem, R::Elem);

    fn zero(&self) -> Self::Elem {
        (self.base.zero(), self.base.zero())
    }
    fn one(&self) -> Self::Elem {
        (self.base.one(), self.base.zero())
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        self.base.is_zero(&a.0) && self.base.is_zero(&a.1)
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        (self.base.add(&a.0, &b.0), self.base.add(&a.1, &b.1))
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        (self.base.neg(&a.0), self.base.neg(&a.1))
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        (
            self.base.mul(&a.0, &b.0),
            self.base
                .add(&self.base.mul(&a.0, &b.1), &self.base.mul(&a.1, &b.0)),
        )
    }
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem> {
        let i = self.base.inv(&a.0)?;
        let d = self
            .base
            .neg(&self.base.mul(&self.base.mul(&i, &i), &a.1));
        Some((i, d))
    }
    fn text(&self, a: &Self::Elem) -> String {
        format!("{}+{}e", self.base.text(&a.0), self.base.text(&a.1))
    }
    fn parse(&self, s: &str) -> Option<Self::Elem> {
        let s = s.strip_suffix('e')?;
        let (v, d) = s.split_once('+')?;
        Some((self.base.parse(v)?, self.base.parse(d)?))
    }
    fn from_i64(&self, v: i64) -> Self::Elem {
        (self.base.from_i64(v), self.base.zero())
    }
}

// ---------------------------------------------------------------------------
// Teichmuller lift, multinomials, valuations
// ---------------------------------------------------------------------------

/// The Teichmuller lift of a residue mod p into Z/p^s: the unique fixed
/// point of x -> x^p congruent to a mod p. Computed by iterating x -> x^p
/// (s iterations always reach the fixed point).
pub fn teichmuller_lift(a: u64, p: u64, s: u32) -> u64 {
    assert!(a < p, "residue must satisfy 0 <= a < p");
    let ring = ZpmRing::new(p, s);
    let mut x = a % ring.modulus();
    for _ in 0..s {
        x = ring.pow(x, p);
    }
    debug_assert_eq!(ring.pow(x, p), x);
    x
}

/// Exact multinomial coefficient k! / (k_1! ... k_l! (k - sum)!).
pub fn multinomial(k: u64, parts: &[i64]) -> Result<BigUint> {
    let mut sum: u64 = 0;
    for &part in parts {
        if part < 0 {
            return Err(CoreError::InvalidInput(format!(
                "negative multinomial part {part}"
            )));
        }
        sum += part as u64;
    }
    if sum > k {
        return Err(CoreError::InvalidInput(format!(
            "multinomial parts sum {sum} exceeds {k}"
        )));
    }
    let factorial = |n: u64| -> BigUint {
        let mut acc = BigUint::one();
        for i in 2..=n {
            acc *= i;
        }
        acc
    };
    let mut denom = factorial(k - sum);
    for &part in parts {
        denom *= factorial(part as u64);
    }
    Ok(factorial(k) / denom)
}

/// p-adic valuation of a non-zero integer.
pub fn padic_valuation(n: &BigUint, p: u64) -> Option<u64> {
    if n.is_zero() {
        return None;
    }
    let p = BigUint::from(p);
    let mut v = 0;
    let mut n = n.clone();
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    Some(v)
}

// ---------------------------------------------------------------------------
// Frobenius endomorphism
// ---------------------------------------------------------------------------

/// The Frobenius lift sigma: fixes ground values drawn from Z (and hence
/// Teichmuller units, which are fixed points of x -> x^p) and sends each
/// parameter a_I to a_I^p.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Frobenius {
    pub p: u64,
}

impl Frobenius {
    pub fn new(p: u64) -> Self {
        Frobenius { p }
    }

    /// sigma on a parameter polynomial: a_I -> a_I^p, coefficients fixed.
    pub fn apply_param<R: CoefficientRing>(
        &self,
        ring: &ParamRing<R>,
        a: &ParamPoly<R::Elem>,
    ) -> ParamPoly<R::Elem> {
        ring.map_exponents_pow(a, self.p as u32, |c| c.clone())
    }

    /// sigma applied entrywise to a matrix over Z/p^s: identity, since the
    /// ground coefficients are images of integers.
    pub fn apply_zpm_matrix(&self, m: &Matrix<ZpmRing>) -> Matrix<ZpmRing> {
        m.clone()
    }

    /// sigma applied entrywise to a matrix over a parameter ring.
    pub fn apply_param_matrix<R: CoefficientRing>(
        &self,
        m: &Matrix<ParamRing<R>>,
    ) -> Matrix<ParamRing<R>> {
        m.map(|ring, e| ring.map_exponents_pow(e, self.p as u32, |c| c.clone()))
    }
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

/// A square matrix over a coefficient ring, row-major.
#[derive(Clone, PartialEq, Debug)]
pub struct Matrix<R: CoefficientRing> {
    pub ring: R,
    pub n: usize,
    pub entries: Vec<R::Elem>,
}

impl<R: CoefficientRing> Matrix<R> {
    pub fn new(ring: R, n: usize, entries: Vec<R::Elem>) -> Self {
        assert_eq!(entries.len(), n * n);
        Matrix { ring, n, entries }
    }

    pub fn identity(ring: R, n: usize) -> Self {
        let mut entries = vec![ring.zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = ring.one();
        }
        Matrix { ring, n, entries }
    }

    pub fn get(&self, i: usize, j: usize) -> &R::Elem {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R::Elem) {
        self.entries[i * self.n + j] = v;
    }

    pub fn map(&self, f: impl Fn(&R, &R::Elem) -> R::Elem) -> Self {
        Matrix {
            ring: self.ring.clone(),
            n: self.n,
            entries: self.entries.iter().map(|e| f(&self.ring, e)).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ring, other.ring);
        assert_eq!(self.n, other.n);
        let n = self.n;
        let ring = &self.ring;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ring.zero();
                for k in 0..n {
                    let t = ring.mul(self.get(i, k), other.get(k, j));
                    ring.add_assign(&mut acc, &t);
                }
                entries.push(acc);
            }
        }
        Matrix {
            ring: self.ring.clone(),
            n,
            entries,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.ring, other.ring);
        assert_eq!(self.n, other.n);
        Matrix {
            ring: self.ring.clone(),
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| self.ring.sub(a, b))
                .collect(),
        }
    }

    /// Exact inverse by Gauss-Jordan elimination with unit pivots.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let ring = self.ring.clone();
        let mut a = self.entries.clone();
        let mut b = Matrix::identity(ring.clone(), n).entries;
        for col in 0..n {
            // find a row at or below `col` with a unit pivot
            let pivot_row = (col..n)
                .find(|&r| ring.inv(&a[r * n + col]).is_some())
                .ok_or_else(|| {
                    CoreError::NonUnitDeterminant(format!("no unit pivot in column {col}"))
                })?;
            if pivot_row != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot_row * n + j);
                    b.swap(col * n + j, pivot_row * n + j);
                }
            }
            let inv = ring.inv(&a[col * n + col]).unwrap();
            for j in 0..n {
                a[col * n + j] = ring.mul(&a[col * n + j], &inv);
                b[col * n + j] = ring.mul(&b[col * n + j], &inv);
            }
            for r in 0..n {
                if r == col || ring.is_zero(&a[r * n + col]) {
                    continue;
                }
                let factor = a[r * n + col].clone();
                for j in 0..n {
                    let ta = ring.mul(&factor, &a[col * n + j]);
                    a[r * n + j] = ring.sub(&a[r * n + j], &ta);
                    let tb = ring.mul(&factor, &b[col * n + j]);
                    b[r * n + j] = ring.sub(&b[r * n + j], &tb);
                }
            }
        }
        Ok(Matrix {
            ring,
            n,
            entries: b,
        })
    }

    /// Determinant by cofactor expansion; intended for small symbolic
    /// matrices (n <= ~4 at desk scale).
    pub fn determinant(&self) -> R::Elem {
        let n = self.n;
        if n == 0 {
            return self.ring.one();
        }
        if n == 1 {
            return self.entries[0].clone();
        }
        let ring = &self.ring;
        let mut acc = ring.zero();
        for j in 0..n {
            if ring.is_zero(self.get(0, j)) {
                continue;
            }
            let minor_entries: Vec<R::Elem> = (1..n)
                .flat_map(|r| {
                    (0..n)
                        .filter(|&c| c != j)
                        .map(move |c| self.get(r, c).clone())
                })
                .collect();
            let minor = Matrix::new(self.ring.clone(), n - 1, minor_entries);
            let mut t = ring.mul(self.get(0, j), &minor.determinant());
            if j % 2 == 1 {
                t = ring.neg(&t);
            }
            ring.add_assign(&mut acc, &t);
        }
        acc
    }
}

impl Matrix<ZpmRing> {
    /// Largest k <= s such that the two matrices agree mod p^k.
    pub fn agreement_exponent(&self, other: &Self) -> u32 {
        assert_eq!(self.ring, other.ring);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| {
                let d = self.ring.sub(a, b);
                self.ring.valuation(d)
            })
            .min()
            .unwrap_or(self.ring.s())
    }

    pub fn eq_mod(&self, other: &Self, k: u32) -> bool {
        self.agreement_exponent(other) >= k
    }

    /// Reduce entries into a lower-precision ring.
    pub fn reduce_to(&self, target: ZpmRing) -> Matrix<ZpmRing> {
        assert_eq!(target.p(), self.ring.p());
        assert!(target.s() <= self.ring.s());
        Matrix {
            ring: target,
            n: self.n,
            entries: self.entries.iter().map(|e| e % target.modulus()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn teichmuller_examples() {
        assert_eq!(teichmuller_lift(1, 5, 3), 1);
        assert_eq!(teichmuller_lift(0, 7, 2), 0);
        // iterate x -> x^p mod 25 to a fixed point: 2^5 = 32 = 7, 7^5 = 7
        assert_eq!(teichmuller_lift(2, 5, 2), 7);
    }

    #[test]
    fn teichmuller_fixed_point_all_small_primes() {
        for p in [2u64, 3, 5, 7, 11] {
            for s in 1..=4u32 {
                let ring = ZpmRing::new(p, s);
                for a in 0..p {
                    let w = teichmuller_lift(a, p, s);
                    assert_eq!(ring.pow(w, p), w, "p={p} s={s} a={a}");
                    assert_eq!(w % p, a);
                }
            }
        }
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial(2, &[1, 1]).unwrap(), BigUint::from(2u32));
        assert_eq!(multinomial(4, &[2, 2]).unwrap(), BigUint::from(6u32));
        let c = multinomial(25, &[5]).unwrap();
        assert_eq!(c, BigUint::from(53130u32));
        // valuation bound nu_5(C(25,5)) >= 2 - min(nu_5(5), nu_5(20)) = 1
        assert_eq!(padic_valuation(&c, 5), Some(1));
        assert!(multinomial(3, &[-1]).is_err());
        assert!(multinomial(3, &[2, 2]).is_err());
    }

    #[test]
    fn zpm_inverse_and_matrix() {
        let ring = ZpmRing::new(5, 2);
        assert_eq!(ring.inv(&2), Some(13));
        assert_eq!(ring.inv(&5), None);
        let m = Matrix::new(ring, 1, vec![2]);
        let inv = m.inverse().unwrap();
        assert_eq!(inv.entries, vec![13]);
        let bad = Matrix::new(ring, 1, vec![5]);
        assert!(matches!(
            bad.inverse(),
            Err(CoreError::NonUnitDeterminant(_))
        ));
        let id = Matrix::identity(ring, 3);
        assert_eq!(id.inverse().unwrap(), id);
    }

    #[test]
    fn matrix_inverse_random_units() {
        // M * M^-1 = I exactly in the modulus
        let ring = ZpmRing::new(3, 3);
        let mut seed = 1u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            seed >> 33
        };
        let mut tried = 0;
        let mut ok = 0;
        while ok < 50 && tried < 500 {
            tried += 1;
            let entries: Vec<u64> = (0..9).map(|_| next() % ring.modulus()).collect();
            let m = Matrix::new(ring, 3, entries);
            if let Ok(inv) = m.inverse() {
                assert_eq!(m.matmul(&inv), Matrix::identity(ring, 3));
                ok += 1;
            }
        }
        assert!(ok >= 50);
    }

    #[test]
    fn param_poly_roundtrip_and_frobenius() {
        let ring = ParamRing::new(BigIntRing, vec!["a0".into(), "a1".into()]);
        // 3*a1^2
        let a1 = ring.var(1);
        let x = ring.mul(&ring.mul(&a1, &a1), &ring.from_i64(3));
        let sigma = Frobenius::new(5);
        let fx = sigma.apply_param(&ring, &x);
        assert_eq!(ring.text(&fx), "3*a1^10");
        let printed = ring.text(&x);
        assert_eq!(ring.parse(&printed), Some(x));
    }

    #[test]
    fn text_roundtrip_base_rings() {
        let z = BigIntRing;
        for v in [-12345i64, 0, 7] {
            let e = z.from_i64(v);
            assert_eq!(z.parse(&z.text(&e)), Some(e));
        }
        let q = RationalRing;
        let e = q.parse("22/7").unwrap();
        assert_eq!(q.parse(&q.text(&e)), Some(e));
        let zp = ZpmRing::new(7, 3);
        let e = zp.from_i64(-5);
        assert_eq!(zp.parse(&zp.text(&e)), Some(e));
    }

    #[test]
    fn dual_ring_derivative_of_inverse() {
        // d(1/x) = -1/x^2: at x = 3 mod 125, deriv part of inv(3 + e)
        let ring = DualRing::new(ZpmRing::new(5, 3));
        let x = ring.with_deriv(3, 1);
        let ix = ring.inv(&x).unwrap();
        let base = ring.base;
        assert_eq!(ix.0, base.inv(&3).unwrap());
        let nine_inv = base.inv(&9).unwrap();
        assert_eq!(ix.1, base.neg(&nine_inv));
    }
}
