//! Sparse multivariate Laurent polynomials over any coefficient ring, with
//! targeted coefficient extraction from large powers and the graded
//! geometric inverse series.

use std::collections::BTreeMap;

use crate::error::{CoreError, Result};
use crate::ring::CoefficientRing;

/// A Laurent polynomial: finite exponent-vector map with no stored zeros.
#[derive(Clone, PartialEq, Debug)]
pub struct LaurentPoly<R: CoefficientRing> {
    pub ring: R,
    pub dim: usize,
    pub terms: BTreeMap<Vec<i64>, R::Elem>,
}

/// Volume cap for the dense accumulation path in multiply.
const DENSE_CAP: usize = 1 << 22;

impl<R: CoefficientRing> LaurentPoly<R> {
    pub fn zero(ring: R, dim: usize) -> Self {
        LaurentPoly {
            ring,
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ring: R, dim: usize) -> Self {
        let one = ring.one();
        LaurentPoly {
            ring,
            dim,
            terms: BTreeMap::from([(vec![0; dim], one)]),
        }
    }

    pub fn monomial(ring: R, dim: usize, exp: Vec<i64>, coeff: R::Elem) -> Self {
        assert_eq!(exp.len(), dim);
        let mut terms = BTreeMap::new();
        if !ring.is_zero(&coeff) {
            terms.insert(exp, coeff);
        }
        LaurentPoly { ring, dim, terms }
    }

    pub fn from_terms(ring: R, dim: usize, list: Vec<(Vec<i64>, R::Elem)>) -> Self {
        let mut out = Self::zero(ring, dim);
        for (e, c) in list {
            assert_eq!(e.len(), dim);
            out.add_term(e, c);
        }
        out
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, exp: &[i64]) -> R::Elem {
        self.terms
            .get(exp)
            .cloned()
            .unwrap_or_else(|| self.ring.zero())
    }

    pub fn add_term(&mut self, exp: Vec<i64>, coeff: R::Elem) {
        match self.terms.get_mut(&exp) {
            Some(acc) => {
                self.ring.add_assign(acc, &coeff);
                if self.ring.is_zero(acc) {
                    self.terms.remove(&exp);
                }
            }
            None => {
                if !self.ring.is_zero(&coeff) {
                    self.terms.insert(exp, coeff);
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.ring, other.ring);
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        LaurentPoly {
            ring: self.ring.clone(),
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), self.ring.neg(c)))
                .collect(),
        }
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        let mut terms = BTreeMap::new();
        for (e, x) in &self.terms {
            let v = self.ring.mul(x, c);
            if !self.ring.is_zero(&v) {
                terms.insert(e.clone(), v);
            }
        }
        LaurentPoly {
            ring: self.ring.clone(),
            dim: self.dim,
            terms,
        }
    }

    /// Multiply by the monomial t^exp.
    pub fn shift(&self, exp: &[i64]) -> Self {
        LaurentPoly {
            ring: self.ring.clone(),
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    (
                        e.iter().zip(exp).map(|(a, b)| a + b).collect(),
                        c.clone(),
                    )
                })
                .collect(),
        }
    }

    /// Per-coordinate (min, max) exponent over the support.
    pub fn support_bounds(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let mut it = self.terms.keys();
        let first = it.next()?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for e in it {
            for c in 0..self.dim {
                lo[c] = lo[c].min(e[c]);
                hi[c] = hi[c].max(e[c]);
            }
        }
        Some((lo, hi))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.ring, other.ring);
        assert_eq!(self.dim, other.dim);
        if self.terms.is_empty() || other.terms.is_empty() {
            return Self::zero(self.ring.clone(), self.dim);
        }
        let (alo, ahi) = self.support_bounds().unwrap();
        let (blo, bhi) = other.support_bounds().unwrap();
        let lo: Vec<i64> = alo.iter().zip(&blo).map(|(a, b)| a + b).collect();
        let hi: Vec<i64> = ahi.iter().zip(&bhi).map(|(a, b)| a + b).collect();
        let mut volume: usize = 1;
        let mut fits = true;
        for c in 0..self.dim {
            let w = (hi[c] - lo[c] + 1) as usize;
            volume = match volume.checked_mul(w) {
                Some(v) if v <= DENSE_CAP => v,
                _ => {
                    fits = false;
                    break;
                }
            };
        }
        if fits && self.terms.len() * other.terms.len() > volume {
            self.mul_dense(other, &lo, &hi, volume)
        } else {
            self.mul_sparse(other)
        }
    }

    fn mul_sparse(&self, other: &Self) -> Self {
        let ring = &self.ring;
        let mut terms: BTreeMap<Vec<i64>, R::Elem> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<i64> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let c = ring.mul(ca, cb);
                match terms.get_mut(&e) {
                    Some(acc) => ring.add_assign(acc, &c),
                    None => {
                        terms.insert(e, c);
                    }
                }
            }
        }
        terms.retain(|_, c| !ring.is_zero(c));
        LaurentPoly {
            ring: self.ring.clone(),
            dim: self.dim,
            terms,
        }
    }

    fn mul_dense(&self, other: &Self, lo: &[i64], hi: &[i64], volume: usize) -> Self {
        let ring = &self.ring;
        let dim = self.dim;
        let mut strides = vec![1usize; dim];
        for c in (0..dim.saturating_sub(1)).rev() {
            strides[c] = strides[c + 1] * (hi[c + 1] - lo[c + 1] + 1) as usize;
        }
        let index = |e: &[i64], eb: &[i64]| -> usize {
            (0..dim)
                .map(|c| (e[c] + eb[c] - lo[c]) as usize * strides[c])
                .sum()
        };
        let mut grid: Vec<R::Elem> = vec![ring.zero(); volume];
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let i = index(ea, eb);
                let t = ring.mul(ca, cb);
                ring.add_assign(&mut grid[i], &t);
            }
        }
        let mut terms = BTreeMap::new();
        for (i, c) in grid.into_iter().enumerate() {
            if ring.is_zero(&c) {
                continue;
            }
            let mut e = vec![0i64; dim];
            let mut rem = i;
            for c2 in 0..dim {
                e[c2] = (rem / strides[c2]) as i64 + lo[c2];
                rem %= strides[c2];
            }
            terms.insert(e, c);
        }
        LaurentPoly {
            ring: self.ring.clone(),
            dim,
            terms,
        }
    }

    /// f^e by binary squaring.
    pub fn pow(&self, e: u64) -> Self {
        let mut acc = Self::one(self.ring.clone(), self.dim);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// The requested coefficients of f^e, computed by sequential
    /// multiplication with support pruning toward the targets.
    ///
    /// After k factors, a monomial x survives iff for every coordinate c
    /// there is a target t with t_c - x_c reachable by the remaining e-k
    /// factors; the per-coordinate hull over targets makes this conservative
    /// and exact.
    pub fn coefficient_of_power(
        &self,
        e: u64,
        targets: &[Vec<i64>],
        budget: Option<usize>,
    ) -> Result<Vec<R::Elem>> {
        if targets.is_empty() {
            return Ok(Vec::new());
        }
        let zero_exp = vec![0i64; self.dim];
        if e == 0 {
            return Ok(targets
                .iter()
                .map(|t| {
                    if *t == zero_exp {
                        self.ring.one()
                    } else {
                        self.ring.zero()
                    }
                })
                .collect());
        }
        let Some((flo, fhi)) = self.support_bounds() else {
            return Ok(vec![self.ring.zero(); targets.len()]);
        };
        let mut tlo = targets[0].clone();
        let mut thi = targets[0].clone();
        for t in &targets[1..] {
            for c in 0..self.dim {
                tlo[c] = tlo[c].min(t[c]);
                thi[c] = thi[c].max(t[c]);
            }
        }
        let mut acc = Self::one(self.ring.clone(), self.dim);
        for k in 0..e {
            acc = acc.mul(self);
            let rem = e - 1 - k;
            acc.terms.retain(|x, _| {
                (0..x.len()).all(|c| {
                    let lo_ok = x[c] + rem as i64 * fhi[c] >= tlo[c];
                    let hi_ok = x[c] + rem as i64 * flo[c] <= thi[c];
                    lo_ok && hi_ok
                })
            });
            if let Some(cap) = budget {
                if acc.terms.len() > cap {
                    return Err(CoreError::BudgetExceeded(format!(
                        "{} live monomials after {} of {} factors (cap {})",
                        acc.terms.len(),
                        k + 1,
                        e,
                        cap
                    )));
                }
            }
        }
        Ok(targets.iter().map(|t| acc.coefficient(t)).collect())
    }

    /// Substitute Laurent polynomials for the variables. Requires all
    /// exponents non-negative (the images need not be invertible).
    pub fn substitute(&self, images: &[LaurentPoly<R>]) -> Result<LaurentPoly<R>> {
        assert_eq!(images.len(), self.dim);
        let out_dim = images
            .first()
            .map(|g| g.dim)
            .unwrap_or(0);
        let mut out = LaurentPoly::zero(
            images
                .first()
                .map(|g| g.ring.clone())
                .unwrap_or_else(|| self.ring.clone()),
            out_dim,
        );
        for (e, c) in &self.terms {
            if e.iter().any(|&x| x < 0) {
                return Err(CoreError::InvalidInput(
                    "substitution requires non-negative exponents".into(),
                ));
            }
            let mut term = LaurentPoly::one(out.ring.clone(), out_dim);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = term.mul(&images[i].pow(k as u64));
                }
            }
            // coefficients of self must embed in the image ring
            let c_out = out.ring.parse(&self.ring.text(c)).ok_or_else(|| {
                CoreError::InvalidInput("coefficient not representable in target ring".into())
            })?;
            out = out.add(&term.scale(&c_out));
        }
        Ok(out)
    }
}

/// The layers of t^{-base} * sum_k layer_k where layer_k = (-1)^k h^k and
/// h = sum over non-distinguished exponents of (a_u / a_base) t^{u - base}.
/// Layer k is homogeneous of degree k in those coefficients.
#[derive(Clone, PartialEq, Debug)]
pub struct GradedSeries<R: CoefficientRing> {
    pub ring: R,
    pub dim: usize,
    pub base: Vec<i64>,
    pub layers: Vec<LaurentPoly<R>>,
}

impl<R: CoefficientRing> GradedSeries<R> {
    pub fn grade_bound(&self) -> usize {
        self.layers.len() - 1
    }

    /// Sum of layers 0..=k.
    pub fn truncated_sum(&self, k: usize) -> LaurentPoly<R> {
        let mut acc = LaurentPoly::zero(self.ring.clone(), self.dim);
        for layer in &self.layers[..=k] {
            acc = acc.add(layer);
        }
        acc
    }

    /// Coefficient of t^exp in 1/f (up to the stored grade): reads the
    /// layers at exp + base.
    pub fn coefficient_per_layer(&self, exp: &[i64]) -> Vec<R::Elem> {
        let shifted: Vec<i64> = exp.iter().zip(&self.base).map(|(a, b)| a + b).collect();
        self.layers
            .iter()
            .map(|l| l.coefficient(&shifted))
            .collect()
    }
}

/// Expand 1/f = t^{-base}(1 + sum_{k>=1} (-1)^k h^k) through grade N.
/// The coefficient of f at `base` must be invertible; f is normalized by it.
pub fn geometric_inverse_series<R: CoefficientRing>(
    f: &LaurentPoly<R>,
    base: &[i64],
    n: usize,
) -> Result<GradedSeries<R>> {
    let ring = f.ring.clone();
    let c0 = f.coefficient(base);
    let inv = ring.inv(&c0).ok_or_else(|| {
        CoreError::NonUnitVertexCoefficient(format!("coefficient at {base:?}"))
    })?;
    let mut h = LaurentPoly::zero(ring.clone(), f.dim);
    for (e, c) in &f.terms {
        if e[..] == base[..] {
            continue;
        }
        let shifted: Vec<i64> = e.iter().zip(base).map(|(a, b)| a - b).collect();
        h.add_term(shifted, ring.mul(c, &inv));
    }
    let mut layers = Vec::with_capacity(n + 1);
    layers.push(LaurentPoly::one(ring.clone(), f.dim));
    let mut pow = LaurentPoly::one(ring.clone(), f.dim);
    for k in 1..=n {
        pow = pow.mul(&h);
        layers.push(if k % 2 == 1 { pow.neg() } else { pow.clone() });
    }
    Ok(GradedSeries {
        ring,
        dim: f.dim,
        base: base.to_vec(),
        layers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{BigIntRing, ParamRing, ZpmRing};
    use num_bigint::BigInt;

    fn zpoly(terms: Vec<(Vec<i64>, i64)>, dim: usize) -> LaurentPoly<BigIntRing> {
        LaurentPoly::from_terms(
            BigIntRing,
            dim,
            terms
                .into_iter()
                .map(|(e, c)| (e, BigInt::from(c)))
                .collect(),
        )
    }

    #[test]
    fn multiply_examples() {
        let f = zpoly(vec![(vec![1], 1), (vec![0], -1)], 1);
        let g = zpoly(vec![(vec![1], 1), (vec![0], 1)], 1);
        let expected = zpoly(vec![(vec![2], 1), (vec![0], -1)], 1);
        assert_eq!(f.mul(&g), expected);

        let f = zpoly(vec![(vec![-1, 0], 1), (vec![0, 1], 1)], 2);
        let g = zpoly(vec![(vec![1, 0], 1), (vec![0, -1], 1)], 2);
        let expected = zpoly(
            vec![(vec![0, 0], 2), (vec![1, 1], 1), (vec![-1, -1], 1)],
            2,
        );
        assert_eq!(f.mul(&g), expected);

        let one = LaurentPoly::one(BigIntRing, 2);
        assert_eq!(f.mul(&one), f);
    }

    #[test]
    fn dense_and_sparse_agree() {
        let mut state = 99u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state >> 33
        };
        for _ in 0..20 {
            let mk = |next: &mut dyn FnMut() -> u64| {
                let nt = 3 + (next() % 6) as usize;
                zpoly(
                    (0..nt)
                        .map(|_| {
                            (
                                vec![(next() % 7) as i64 - 3, (next() % 7) as i64 - 3],
                                (next() % 9) as i64 - 4,
                            )
                        })
                        .collect(),
                    2,
                )
            };
            let f = mk(&mut next);
            let g = mk(&mut next);
            let (Some((alo, ahi)), Some((blo, bhi))) = (f.support_bounds(), g.support_bounds())
            else {
                continue;
            };
            let lo: Vec<i64> = alo.iter().zip(&blo).map(|(a, b)| a + b).collect();
            let hi: Vec<i64> = ahi.iter().zip(&bhi).map(|(a, b)| a + b).collect();
            let vol: usize = (0..2).map(|c| (hi[c] - lo[c] + 1) as usize).product();
            assert_eq!(f.mul_sparse(&g), f.mul_dense(&g, &lo, &hi, vol));
        }
    }

    #[test]
    fn power_examples() {
        let f = zpoly(vec![(vec![0], 1), (vec![1], 1)], 1);
        assert_eq!(f.pow(0), LaurentPoly::one(BigIntRing, 1));
        let p4 = f.pow(4);
        assert_eq!(p4.coefficient(&[2]), BigInt::from(6));
        // binary squaring equals repeated multiplication
        let g = zpoly(vec![(vec![-1, 1], 2), (vec![1, 0], -1), (vec![0, 0], 3)], 2);
        let mut acc = LaurentPoly::one(BigIntRing, 2);
        for _ in 0..7 {
            acc = acc.mul(&g);
        }
        assert_eq!(g.pow(7), acc);
    }

    #[test]
    fn coefficient_of_power_symbolic() {
        // (a-1 t^-1 + a0 + a1 t)^2, coefficient of t^0 = a0^2 + 2 a-1 a1
        let pr = ParamRing::new(BigIntRing, vec!["am".into(), "a0".into(), "a1".into()]);
        let f = LaurentPoly::from_terms(
            pr.clone(),
            1,
            vec![
                (vec![-1], pr.var(0)),
                (vec![0], pr.var(1)),
                (vec![1], pr.var(2)),
            ],
        );
        let got = f.coefficient_of_power(2, &[vec![0]], None).unwrap();
        let expected = pr.add(
            &pr.mul(&pr.var(1), &pr.var(1)),
            &pr.mul(&pr.from_i64(2), &pr.mul(&pr.var(0), &pr.var(2))),
        );
        assert_eq!(got[0], expected);
    }

    #[test]
    fn coefficient_of_power_matches_full_power() {
        let ring = ZpmRing::new(5, 2);
        let f = LaurentPoly::from_terms(
            ring,
            2,
            vec![
                (vec![0, 0], 3),
                (vec![1, 0], 1),
                (vec![0, 1], 2),
                (vec![-1, -1], 4),
            ],
        );
        let e = 24; // p^2 - 1
        let full = f.pow(e);
        let targets = vec![vec![0, 0], vec![24, 0], vec![-3, 5]];
        let got = f.coefficient_of_power(e, &targets, None).unwrap();
        for (t, c) in targets.iter().zip(&got) {
            assert_eq!(*c, full.coefficient(t));
        }
    }

    #[test]
    fn budget_exceeded() {
        let ring = ZpmRing::new(3, 1);
        let f = LaurentPoly::from_terms(
            ring,
            2,
            vec![(vec![0, 0], 1), (vec![1, 0], 1), (vec![0, 1], 1)],
        );
        let err = f.coefficient_of_power(8, &[vec![4, 4]], Some(2));
        assert!(matches!(err, Err(CoreError::BudgetExceeded(_))));
    }

    #[test]
    fn geometric_series_simple() {
        // 1/(1+t): layer k = (-1)^k t^k
        let f = zpoly(vec![(vec![0], 1), (vec![1], 1)], 1);
        let s = geometric_inverse_series(&f, &[0], 5).unwrap();
        for k in 0..=5usize {
            let expected = zpoly(vec![(vec![k as i64], if k % 2 == 1 { -1 } else { 1 })], 1);
            assert_eq!(s.layers[k], expected);
        }
    }

    #[test]
    fn geometric_series_central_binomials() {
        // f = 1 + am t^-1 + a1 t: constant term of layer 2k = C(2k,k)(am a1)^k
        let pr = ParamRing::new(BigIntRing, vec!["am".into(), "a1".into()]);
        let f = LaurentPoly::from_terms(
            pr.clone(),
            1,
            vec![
                (vec![0], pr.one()),
                (vec![-1], pr.var(0)),
                (vec![1], pr.var(1)),
            ],
        );
        let s = geometric_inverse_series(&f, &[0], 6).unwrap();
        let binom = [1i64, 2, 6, 20];
        for k in 0..=3usize {
            let ct = s.layers[2 * k].coefficient(&[0]);
            let mut expected = pr.from_i64(binom[k]);
            for _ in 0..k {
                expected = pr.mul(&expected, &pr.mul(&pr.var(0), &pr.var(1)));
            }
            assert_eq!(ct, expected, "k={k}");
            if k > 0 {
                assert_eq!(s.layers[2 * k - 1].coefficient(&[0]), pr.zero());
            }
        }
    }

    #[test]
    fn geometric_series_inverts_f() {
        // f * truncated series = 1 + terms of grade > N
        let pr = ParamRing::new(BigIntRing, vec!["b".into(), "c".into()]);
        let f = LaurentPoly::from_terms(
            pr.clone(),
            2,
            vec![
                (vec![1, 1], pr.one()),
                (vec![2, 0], pr.var(0)),
                (vec![0, -1], pr.var(1)),
            ],
        );
        let n = 4;
        let s = geometric_inverse_series(&f, &[1, 1], n).unwrap();
        let shifted = s.truncated_sum(n).shift(&[-1, -1]);
        let prod = f.mul(&shifted);
        for (e, c) in &prod.terms {
            if *e == vec![0, 0] {
                assert_eq!(*c, pr.one());
            } else {
                // residual terms all have parameter degree > N
                assert!(c.degree() > n as u32, "term {e:?} has low grade");
            }
        }
    }

    #[test]
    fn non_unit_base_coefficient() {
        let ring = ZpmRing::new(3, 2);
        let f = LaurentPoly::from_terms(ring, 1, vec![(vec![0], 3), (vec![1], 1)]);
        assert!(matches!(
            geometric_inverse_series(&f, &[0], 2),
            Err(CoreError::NonUnitVertexCoefficient(_))
        ));
    }

    #[test]
    fn substitution() {
        // (x + y^2) at x = t1 t2^-1, y = t1: t1 t2^-1 + t1^2
        let f = zpoly(vec![(vec![1, 0], 1), (vec![0, 2], 1)], 2);
        let images = vec![
            zpoly(vec![(vec![1, -1], 1)], 2),
            zpoly(vec![(vec![1, 0], 1)], 2),
        ];
        let got = f.substitute(&images).unwrap();
        let expected = zpoly(vec![(vec![1, -1], 1), (vec![2, 0], 1)], 2);
        assert_eq!(got, expected);
    }
}
