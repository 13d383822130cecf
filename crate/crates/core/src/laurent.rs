//! Laurent polynomials over R in n variables, with σ acting by x_i ↦ x_i^q.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::padic::{PadicAlgebra, PadicNumber, Tower};

pub type Exponent = Vec<i64>;

/// A finitely supported map from exponent vectors to coefficients; zero
/// coefficients are never stored.
#[derive(Clone)]
pub struct LaurentElement {
    tower: Arc<Tower>,
    prec: u32,
    nvars: usize,
    terms: BTreeMap<Exponent, PadicNumber>,
}

impl PartialEq for LaurentElement {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.prec == other.prec && self.terms == other.terms
    }
}

impl fmt::Debug for LaurentElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} + O(π^{})", self.prec)
    }
}

impl LaurentElement {
    pub fn zero(tower: &Arc<Tower>, prec: u32, nvars: usize) -> LaurentElement {
        LaurentElement { tower: tower.clone(), prec, nvars, terms: BTreeMap::new() }
    }

    pub fn constant(c: &PadicNumber, nvars: usize) -> LaurentElement {
        LaurentElement::monomial(vec![0; nvars], c)
    }

    pub fn from_i64(tower: &Arc<Tower>, prec: u32, nvars: usize, n: i64) -> LaurentElement {
        LaurentElement::constant(&PadicNumber::from_i64(tower, prec, n), nvars)
    }

    pub fn one(tower: &Arc<Tower>, prec: u32, nvars: usize) -> LaurentElement {
        LaurentElement::from_i64(tower, prec, nvars, 1)
    }

    pub fn monomial(exp: Exponent, c: &PadicNumber) -> LaurentElement {
        let mut out = LaurentElement::zero(c.tower(), c.precision(), exp.len());
        if !c.is_zero() {
            out.terms.insert(exp, c.clone());
        }
        out
    }

    /// The coordinate x_i.
    pub fn var(tower: &Arc<Tower>, prec: u32, nvars: usize, i: usize) -> LaurentElement {
        let mut exp = vec![0; nvars];
        exp[i] = 1;
        LaurentElement::monomial(exp, &PadicNumber::one(tower, prec))
    }

    pub fn from_terms(tower: &Arc<Tower>, prec: u32, nvars: usize, terms: impl IntoIterator<Item = (Exponent, PadicNumber)>) -> Result<LaurentElement> {
        let mut out = LaurentElement::zero(tower, prec, nvars);
        for (exp, c) in terms {
            if exp.len() != nvars {
                return Err(Error::Shape(format!("exponent {exp:?} has the wrong number of variables")));
            }
            out.add_term(exp, &c.reduce(prec));
        }
        Ok(out)
    }

    fn add_term(&mut self, exp: Exponent, c: &PadicNumber) {
        match self.terms.get_mut(&exp) {
            Some(slot) => {
                let s = &*slot + c;
                if s.is_zero() {
                    self.terms.remove(&exp);
                } else {
                    *slot = s;
                }
            }
            None => {
                if !c.is_zero() {
                    self.terms.insert(exp, c.clone());
                }
            }
        }
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }
    pub fn precision(&self) -> u32 {
        self.prec
    }
    pub fn nvars(&self) -> usize {
        self.nvars
    }
    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &PadicNumber)> {
        self.terms.iter()
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn coeff(&self, exp: &[i64]) -> PadicNumber {
        self.terms.get(exp).cloned().unwrap_or_else(|| PadicNumber::zero(&self.tower, self.prec))
    }
    pub fn constant_term(&self) -> PadicNumber {
        self.coeff(&vec![0; self.nvars])
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&a| a >= 0))
    }

    /// Largest |α|_1 over the support.
    pub fn max_abs_degree(&self) -> i64 {
        self.terms.keys().map(|e| e.iter().map(|a| a.abs()).sum()).max().unwrap_or(0)
    }

    /// Degree of the reduction modulo π.
    pub fn reduced_degree(&self) -> Option<i64> {
        self.terms.iter().filter(|(_, c)| c.is_unit()).map(|(e, _)| e.iter().sum()).max()
    }

    pub fn min_ord_pi(&self) -> Option<u32> {
        self.terms.values().filter_map(|c| c.ord_pi()).min()
    }

    pub fn reduce(&self, prec: u32) -> LaurentElement {
        let prec = prec.min(self.prec);
        let mut out = LaurentElement::zero(&self.tower, prec, self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), &c.reduce(prec));
        }
        out
    }

    pub fn with_precision(&self, prec: u32) -> Result<LaurentElement> {
        if prec <= self.prec {
            return Ok(self.reduce(prec));
        }
        let mut out = LaurentElement::zero(&self.tower, prec, self.nvars);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), c.with_precision(prec)?);
        }
        Ok(out)
    }

    pub fn eq_mod(&self, other: &LaurentElement, n: u32) -> bool {
        (self - other).reduce(n).is_zero()
    }

    pub fn scale(&self, c: &PadicNumber) -> LaurentElement {
        let prec = self.prec.min(c.precision());
        let mut out = LaurentElement::zero(&self.tower, prec, self.nvars);
        for (e, a) in &self.terms {
            out.add_term(e.clone(), &(a * c));
        }
        out
    }

    pub fn mul_monomial(&self, exp: &[i64]) -> LaurentElement {
        let mut out = LaurentElement::zero(&self.tower, self.prec, self.nvars);
        for (e, c) in &self.terms {
            let ne: Exponent = e.iter().zip(exp).map(|(a, b)| a + b).collect();
            out.terms.insert(ne, c.clone());
        }
        out
    }

    /// x_i ↦ x_i^{q^f}; coefficients are fixed since σ acts trivially on R.
    pub fn sigma_apply(&self, q: u64, f: u32) -> LaurentElement {
        let factor = (q as i64).pow(f);
        let mut out = LaurentElement::zero(&self.tower, self.prec, self.nvars);
        for (e, c) in &self.terms {
            out.terms.insert(e.iter().map(|a| a * factor).collect(), c.clone());
        }
        out
    }

    pub fn map_exponents(&self, f: impl Fn(&[i64]) -> Option<Exponent>, coeff: impl Fn(&PadicNumber) -> PadicNumber) -> LaurentElement {
        let mut out = LaurentElement::zero(&self.tower, self.prec, self.nvars);
        for (e, c) in &self.terms {
            if let Some(ne) = f(e) {
                out.add_term(ne, &coeff(c));
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> LaurentElement {
        let mut acc = LaurentElement::one(&self.tower, self.prec, self.nvars);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            e >>= 1;
            if e > 0 {
                b = &b * &b;
            }
        }
        acc
    }

    pub fn pow_i64(&self, e: i64) -> Result<LaurentElement> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inverse()?.pow(e.unsigned_abs()))
        }
    }

    /// Inverse of u·x^α·(1 + z) with u a unit and z ∈ πA, by the geometric series.
    pub fn inverse(&self) -> Result<LaurentElement> {
        let lead: Vec<(&Exponent, &PadicNumber)> = self.terms.iter().filter(|(_, c)| c.is_unit()).collect();
        if lead.len() != 1 {
            return Err(Error::Domain(format!("{self} is not a unit monomial times a 1-unit")));
        }
        let (exp, u) = (lead[0].0.clone(), lead[0].1.clone());
        let uinv = u.inverse()?;
        let neg: Exponent = exp.iter().map(|a| -a).collect();
        let normalized = self.scale(&uinv).mul_monomial(&neg);
        let z = &normalized - &LaurentElement::one(&self.tower, self.prec, self.nvars);
        let mut acc = LaurentElement::one(&self.tower, self.prec, self.nvars);
        let mut term = acc.clone();
        let negz = -&z;
        for _ in 0..self.prec {
            term = &term * &negz;
            if term.is_zero() {
                break;
            }
            acc = &acc + &term;
        }
        Ok(acc.scale(&uinv).mul_monomial(&neg))
    }

    /// Evaluates at a point of R_f^n (coefficients embedded from R).
    pub fn evaluate(&self, point: &[PadicNumber]) -> Result<PadicNumber> {
        if point.len() != self.nvars {
            return Err(Error::Shape(format!("point has {} coordinates, element has {} variables", point.len(), self.nvars)));
        }
        let target = match point.first() {
            Some(x) => x.tower().clone(),
            None => self.tower.clone(),
        };
        let prec = point.iter().map(|x| x.precision()).min().unwrap_or(self.prec).min(self.prec);
        let mut pos: Vec<Vec<PadicNumber>> = Vec::with_capacity(self.nvars);
        let mut neg: Vec<Vec<PadicNumber>> = Vec::with_capacity(self.nvars);
        for (i, x) in point.iter().enumerate() {
            let max = self.terms.keys().map(|e| e[i]).max().unwrap_or(0).max(0) as usize;
            let min = self.terms.keys().map(|e| e[i]).min().unwrap_or(0).min(0).unsigned_abs() as usize;
            let x = x.reduce(prec);
            let mut pw = vec![PadicNumber::one(&target, prec)];
            for k in 1..=max {
                let next = &pw[k - 1] * &x;
                pw.push(next);
            }
            let mut nw = vec![PadicNumber::one(&target, prec)];
            if min > 0 {
                let xinv = x.inverse().map_err(|_| Error::Shape("negative exponent evaluated at a non-unit".into()))?;
                for k in 1..=min {
                    let next = &nw[k - 1] * &xinv;
                    nw.push(next);
                }
            }
            pos.push(pw);
            neg.push(nw);
        }
        let mut acc = PadicNumber::zero(&target, prec);
        for (e, c) in &self.terms {
            let mut term = c.embed_into(&target)?.reduce(prec);
            for (i, &a) in e.iter().enumerate() {
                let f = if a >= 0 { &pos[i][a as usize] } else { &neg[i][a.unsigned_abs() as usize] };
                term = &term * f;
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    /// Canonical text form, e.g. `1 + 2*x - x^-3` (variables x or x1..xn).
    pub fn to_expression(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (e, c) in &self.terms {
            let coeff = coeff_to_string(c);
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &a)| a != 0)
                .map(|(i, &a)| {
                    let name = if self.nvars == 1 { "x".to_string() } else { format!("x{}", i + 1) };
                    if a == 1 {
                        name
                    } else {
                        format!("{name}^{a}")
                    }
                })
                .collect();
            parts.push(if mono.is_empty() {
                coeff
            } else if coeff == "1" {
                mono.join("*")
            } else {
                format!("{coeff}*{}", mono.join("*"))
            });
        }
        parts.join(" + ")
    }
}

/// Integer representative for e = 1; bracketed π-coordinates otherwise.
pub(crate) fn coeff_to_string(c: &PadicNumber) -> String {
    let e = c.tower().e();
    if e == 1 && c.tower().f() == 1 {
        c.coords()[0].to_string()
    } else {
        let inner: Vec<String> = c.coords().iter().map(|x| x.to_string()).collect();
        format!("[{}]", inner.join(","))
    }
}

impl fmt::Display for LaurentElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expression())
    }
}

fn check(a: &LaurentElement, b: &LaurentElement) -> u32 {
    assert_eq!(a.nvars, b.nvars, "variable count mismatch");
    a.prec.min(b.prec)
}

impl Add for &LaurentElement {
    type Output = LaurentElement;
    fn add(self, rhs: &LaurentElement) -> LaurentElement {
        let prec = check(self, rhs);
        let mut out = self.reduce(prec);
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), &c.reduce(prec));
        }
        out
    }
}

impl Sub for &LaurentElement {
    type Output = LaurentElement;
    fn sub(self, rhs: &LaurentElement) -> LaurentElement {
        let prec = check(self, rhs);
        let mut out = self.reduce(prec);
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), &(-&c.reduce(prec)));
        }
        out
    }
}

impl Neg for &LaurentElement {
    type Output = LaurentElement;
    fn neg(self) -> LaurentElement {
        let mut out = LaurentElement::zero(&self.tower, self.prec, self.nvars);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), -c);
        }
        out
    }
}

impl Mul for &LaurentElement {
    type Output = LaurentElement;
    fn mul(self, rhs: &LaurentElement) -> LaurentElement {
        let prec = check(self, rhs);
        let mut out = LaurentElement::zero(&self.tower, prec, self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, &(c1 * c2).reduce(prec));
            }
        }
        out
    }
}

impl PadicAlgebra for LaurentElement {
    fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }
    fn precision(&self) -> u32 {
        self.prec
    }
    fn min_ord_pi(&self) -> Option<u32> {
        LaurentElement::min_ord_pi(self)
    }
    fn with_precision(&self, prec: u32) -> Result<Self> {
        LaurentElement::with_precision(self, prec)
    }
    fn one_like(&self) -> Self {
        LaurentElement::one(&self.tower, self.prec, self.nvars)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn div_int(&self, n: u64) -> Result<Self> {
        let prec = PadicNumber::zero(&self.tower, self.prec).div_int(n)?.precision();
        let mut out = LaurentElement::zero(&self.tower, prec, self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), &c.div_int(n)?);
        }
        Ok(out)
    }
    fn scale(&self, c: &PadicNumber) -> Self {
        LaurentElement::scale(self, c)
    }
}
