//! Fixed-precision arithmetic in R_f, the ring of integers of a two-step tower
//! Q_p ⊂ K = Q_p(π) ⊂ K_f, where π is a root of an Eisenstein polynomial and
//! K_f/K is unramified of degree f.
//!
//! Elements are stored in the Z_p-basis π^i ω^j (0 ≤ i < e, 0 ≤ j < f); the
//! coordinate at π^i is kept modulo p^⌈(N−i)/e⌉, which is exactly the data of
//! an element modulo π^N.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{self, FfElem, FiniteField};

/// The tower data: p, the Eisenstein polynomial of π over Z_p and the
/// polynomial over F_p defining the residue field of R_f.
#[derive(Debug)]
pub struct Tower {
    p: u64,
    eisenstein: Vec<i64>,
    residue_poly: Vec<u64>,
    field: Arc<FiniteField>,
}

impl PartialEq for Tower {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.eisenstein == other.eisenstein && self.residue_poly == other.residue_poly
    }
}
impl Eq for Tower {}

/// Plain-data form of a tower, used by every serialized artifact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerDescriptor {
    pub p: u64,
    pub eisenstein: Vec<i64>,
    pub residue_poly: Vec<u64>,
}

impl Tower {
    /// `eisenstein` lists a_0..a_{e-1} with π^e + a_{e-1}π^{e-1} + … + a_0 = 0;
    /// `residue_poly` lists g_0..g_{f-1} of a monic irreducible over F_p.
    pub fn new(p: u64, eisenstein: Vec<i64>, residue_poly: Vec<u64>) -> Result<Arc<Tower>> {
        if !ff::is_prime(p) || p >= 1 << 31 {
            return Err(Error::Tower(format!("p = {p} is not a supported prime")));
        }
        if eisenstein.is_empty() {
            return Err(Error::Tower("empty Eisenstein polynomial".into()));
        }
        let pi = p as i64;
        let a0 = eisenstein[0];
        if a0 % pi != 0 || (a0 / pi) % pi == 0 {
            return Err(Error::Tower(format!("constant term {a0} does not have p-adic valuation 1")));
        }
        if eisenstein.iter().any(|a| a % pi != 0) {
            return Err(Error::Tower("non-leading coefficients must be divisible by p".into()));
        }
        if residue_poly.is_empty() || residue_poly.iter().any(|&g| g >= p) {
            return Err(Error::Tower("residue polynomial must have degree ≥ 1 and coefficients in [0, p)".into()));
        }
        let f = residue_poly.len();
        let field = if ff::lowest_irreducible(p, f)? == residue_poly {
            FiniteField::get(p, f)?
        } else {
            Arc::new(FiniteField::with_modulus(p, residue_poly.clone())?)
        };
        Ok(Arc::new(Tower { p, eisenstein, residue_poly, field }))
    }

    /// Q_p with π = p.
    pub fn qp(p: u64) -> Result<Arc<Tower>> {
        Tower::new(p, vec![-(p as i64)], vec![0])
    }

    /// A totally ramified K = Q_p(π) with residue degree 1.
    pub fn ramified(p: u64, eisenstein: Vec<i64>) -> Result<Arc<Tower>> {
        Tower::new(p, eisenstein, vec![0])
    }

    pub fn from_descriptor(d: &TowerDescriptor) -> Result<Arc<Tower>> {
        Tower::new(d.p, d.eisenstein.clone(), d.residue_poly.clone())
    }

    pub fn descriptor(&self) -> TowerDescriptor {
        TowerDescriptor { p: self.p, eisenstein: self.eisenstein.clone(), residue_poly: self.residue_poly.clone() }
    }

    /// Same K, unramified step of degree f with the canonical residue polynomial.
    pub fn with_residue_degree(&self, f: usize) -> Result<Arc<Tower>> {
        Tower::new(self.p, self.eisenstein.clone(), ff::lowest_irreducible(self.p, f)?)
    }

    pub fn base(&self) -> Result<Arc<Tower>> {
        Tower::new(self.p, self.eisenstein.clone(), vec![0])
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn e(&self) -> usize {
        self.eisenstein.len()
    }
    pub fn f(&self) -> usize {
        self.residue_poly.len()
    }
    /// Size of the residue field k of K.
    pub fn q(&self) -> u64 {
        self.p
    }
    pub fn eisenstein(&self) -> &[i64] {
        &self.eisenstein
    }
    pub fn residue_poly(&self) -> &[u64] {
        &self.residue_poly
    }
    pub fn residue_field(&self) -> &Arc<FiniteField> {
        &self.field
    }

    /// Same ramified step, ignoring the unramified step.
    pub fn same_base(&self, other: &Tower) -> bool {
        self.p == other.p && self.eisenstein == other.eisenstein
    }

    /// Largest supported precision N (coordinates must stay below 2^63 with one spare digit).
    pub fn max_precision(&self) -> u32 {
        let mut k = 0u32;
        let mut acc: u128 = 1;
        while acc * (self.p as u128) * (self.p as u128) < (1u128 << 63) {
            acc *= self.p as u128;
            k += 1;
        }
        k * self.e() as u32
    }

    fn slot_exp(&self, prec: u32, i: usize) -> u32 {
        let e = self.e() as u32;
        let i = i as u32;
        if prec <= i {
            0
        } else {
            (prec - i + e - 1) / e
        }
    }

    fn p_pow(&self, k: u32) -> u64 {
        ff::checked_pow(self.p, k).expect("precision within max_precision")
    }

    pub fn check_precision(&self, prec: u32) -> Result<()> {
        if prec > self.max_precision() {
            return Err(Error::Precision(format!(
                "precision {prec} exceeds the supported maximum {} for p = {}",
                self.max_precision(),
                self.p
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} e={} f={} eisenstein={:?} residue={:?}", self.p, self.e(), self.f(), self.eisenstein, self.residue_poly)
    }
}

/// π-adic valuation, exact below the precision and a lower bound otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Valuation {
    Finite(u32),
    AtLeast(u32),
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, "≥{v}"),
        }
    }
}

pub(crate) fn v_p_u64(mut n: u64, p: u64) -> u32 {
    if n == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// ord_p(n!) by Legendre's formula.
pub fn v_p_factorial(n: u64, p: u64) -> u32 {
    let mut v = 0u64;
    let mut t = n / p;
    while t > 0 {
        v += t;
        t /= p;
    }
    v as u32
}

fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

fn mod_i64(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

/// An element of R_f modulo π^N.
#[derive(Clone)]
pub struct PadicNumber {
    tower: Arc<Tower>,
    prec: u32,
    c: Vec<u64>,
}

impl fmt::Debug for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} + O(π^{})", self.prec)
    }
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c.len() == 1 {
            write!(f, "{}", self.c[0])
        } else {
            write!(f, "{:?}", self.c)
        }
    }
}

impl PartialEq for PadicNumber {
    fn eq(&self, other: &Self) -> bool {
        self.same_tower(other) && self.prec == other.prec && self.c == other.c
    }
}
impl Eq for PadicNumber {}

impl PadicNumber {
    fn raw(tower: &Arc<Tower>, prec: u32, c: Vec<u64>) -> PadicNumber {
        let mut x = PadicNumber { tower: tower.clone(), prec, c };
        x.normalize();
        x
    }

    fn normalize(&mut self) {
        let e = self.tower.e();
        for i in 0..e {
            let m = self.tower.p_pow(self.tower.slot_exp(self.prec, i));
            for j in 0..self.tower.f() {
                self.c[i + e * j] %= m;
            }
        }
    }

    fn same_tower(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.tower, &other.tower) || *self.tower == *other.tower
    }

    fn work_modulus(&self) -> u64 {
        self.tower.p_pow(self.tower.slot_exp(self.prec, 0))
    }

    pub fn zero(tower: &Arc<Tower>, prec: u32) -> PadicNumber {
        PadicNumber { tower: tower.clone(), prec, c: vec![0; tower.e() * tower.f()] }
    }

    pub fn one(tower: &Arc<Tower>, prec: u32) -> PadicNumber {
        PadicNumber::from_i64(tower, prec, 1)
    }

    /// # Panics
    /// If `prec` exceeds `tower.max_precision()`; see `Tower::check_precision`.
    pub fn from_i64(tower: &Arc<Tower>, prec: u32, n: i64) -> PadicNumber {
        let mut c = vec![0; tower.e() * tower.f()];
        let m = tower.p_pow(tower.slot_exp(prec, 0));
        c[0] = mod_i64(n, m);
        PadicNumber::raw(tower, prec, c)
    }

    /// Builds Σ coords[i + e·j] π^i ω^j.
    pub fn from_coords(tower: &Arc<Tower>, prec: u32, coords: &[i64]) -> Result<PadicNumber> {
        if coords.len() != tower.e() * tower.f() {
            return Err(Error::Shape(format!("expected {} coordinates, got {}", tower.e() * tower.f(), coords.len())));
        }
        tower.check_precision(prec)?;
        let m = tower.p_pow(tower.slot_exp(prec, 0));
        Ok(PadicNumber::raw(tower, prec, coords.iter().map(|&a| mod_i64(a, m)).collect()))
    }

    pub fn pi(tower: &Arc<Tower>, prec: u32) -> PadicNumber {
        let e = tower.e();
        if e == 1 {
            let a0 = tower.eisenstein[0];
            return PadicNumber::from_i64(tower, prec, -a0);
        }
        let mut c = vec![0; e * tower.f()];
        c[1] = 1;
        PadicNumber::raw(tower, prec, c)
    }

    /// Lift of a residue class with coordinates in [0, p).
    pub fn from_residue(tower: &Arc<Tower>, prec: u32, a: &FfElem) -> PadicNumber {
        let e = tower.e();
        let mut c = vec![0; e * tower.f()];
        for (j, &x) in a.coeffs().iter().enumerate() {
            c[e * j] = x;
        }
        PadicNumber::raw(tower, prec, c)
    }

    /// The Teichmüller representative of `a`, the root of X^{q^f} = X lifting it.
    pub fn teichmuller(tower: &Arc<Tower>, prec: u32, a: &FfElem) -> PadicNumber {
        let mut x = PadicNumber::from_residue(tower, prec, a);
        if a.is_zero() {
            return x;
        }
        for _ in 0..=prec {
            let mut y = x.clone();
            for _ in 0..tower.f() {
                y = y.pow(tower.p);
            }
            if y == x {
                break;
            }
            x = y;
        }
        x
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }
    pub fn precision(&self) -> u32 {
        self.prec
    }
    /// Coordinates in the basis π^i ω^j, index i + e·j.
    pub fn coords(&self) -> &[u64] {
        &self.c
    }

    /// Symmetric integer representative, for elements of Z_p (e = f = 1 coordinates).
    pub fn signed_coords(&self) -> Vec<i128> {
        let e = self.tower.e();
        (0..self.c.len())
            .map(|idx| {
                let m = self.tower.p_pow(self.tower.slot_exp(self.prec, idx % e)) as i128;
                let v = self.c[idx] as i128;
                if 2 * v > m {
                    v - m
                } else {
                    v
                }
            })
            .collect()
    }

    pub fn valuation(&self) -> Valuation {
        match self.ord_pi() {
            Some(v) => Valuation::Finite(v),
            None => Valuation::AtLeast(self.prec),
        }
    }

    /// Exact ord_π, or None when the element vanishes modulo π^N.
    pub fn ord_pi(&self) -> Option<u32> {
        let e = self.tower.e();
        let mut best: Option<u32> = None;
        for (idx, &x) in self.c.iter().enumerate() {
            if x != 0 {
                let v = e as u32 * v_p_u64(x, self.tower.p) + (idx % e) as u32;
                best = Some(best.map_or(v, |b| b.min(v)));
            }
        }
        best
    }

    pub fn ord_p(&self) -> Option<Ratio<i64>> {
        self.ord_pi().map(|v| Ratio::new(v as i64, self.tower.e() as i64))
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }
    pub fn is_unit(&self) -> bool {
        self.ord_pi() == Some(0)
    }
    /// x ≡ 1 mod π.
    pub fn is_one_unit(&self) -> bool {
        let one = PadicNumber::one(&self.tower, self.prec);
        (self - &one).ord_pi().map_or(true, |v| v >= 1)
    }

    pub fn residue(&self) -> FfElem {
        let e = self.tower.e();
        let coeffs: Vec<u64> = (0..self.tower.f()).map(|j| self.c[e * j] % self.tower.p).collect();
        self.tower.field.from_coeffs(&coeffs).expect("residue width")
    }

    /// Reduces to a lower precision, or zero-extends the stored digits to a
    /// higher one (callers use this only for exactly known values or when the
    /// extra digits are provably irrelevant).
    pub fn with_precision(&self, prec: u32) -> Result<PadicNumber> {
        if prec > self.prec {
            self.tower.check_precision(prec)?;
        }
        Ok(PadicNumber::raw(&self.tower, prec, self.c.clone()))
    }

    pub fn reduce(&self, prec: u32) -> PadicNumber {
        PadicNumber::raw(&self.tower, prec.min(self.prec), self.c.clone())
    }

    /// Equality modulo π^n (n must not exceed either precision to be meaningful).
    pub fn eq_mod(&self, other: &PadicNumber, n: u32) -> bool {
        let n = n.min(self.prec).min(other.prec);
        self.reduce(n) == other.reduce(n)
    }

    pub fn pow(&self, mut e: u64) -> PadicNumber {
        let mut acc = PadicNumber::one(&self.tower, self.prec);
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

    pub fn pow_i64(&self, e: i64) -> Result<PadicNumber> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inverse()?.pow(e.unsigned_abs()))
        }
    }

    /// Inverse of a unit by Newton iteration from the residue inverse.
    pub fn inverse(&self) -> Result<PadicNumber> {
        if !self.is_unit() {
            return Err(Error::Domain(format!("{self:?} is not a unit")));
        }
        let field = &self.tower.field;
        let rinv = field.inv(&self.residue())?;
        let mut y = PadicNumber::from_residue(&self.tower, self.prec, &rinv);
        let two = PadicNumber::from_i64(&self.tower, self.prec, 2);
        let mut good = 1u32;
        while good < self.prec {
            y = &y * &(&two - &(self * &y));
            good = good.saturating_mul(2);
        }
        Ok(y)
    }

    /// π^e / p, a unit.
    fn eisenstein_unit(tower: &Arc<Tower>, prec: u32) -> PadicNumber {
        let e = tower.e();
        let mut acc = PadicNumber::zero(tower, prec);
        let pi = PadicNumber::pi(tower, prec);
        let mut pw = PadicNumber::one(tower, prec);
        for i in 0..e {
            let coeff = -tower.eisenstein[i] / tower.p as i64;
            acc = &acc + &(&pw * &PadicNumber::from_i64(tower, prec, coeff));
            pw = &pw * &pi;
        }
        acc
    }

    /// Exact division by π^k; the result has precision N − k.
    pub fn div_pi_pow(&self, k: u32) -> Result<PadicNumber> {
        if k == 0 {
            return Ok(self.clone());
        }
        if k > self.prec {
            return Err(Error::Precision(format!("cannot divide by π^{k} at precision {}", self.prec)));
        }
        if let Some(v) = self.ord_pi() {
            if v < k {
                return Err(Error::Domain(format!("element of valuation {v} is not divisible by π^{k}")));
            }
        }
        let e = self.tower.e() as u32;
        let new_prec = self.prec - k;
        if self.is_zero() {
            return Ok(PadicNumber::zero(&self.tower, new_prec));
        }
        let c = (e - k % e) % e;
        let a = (k + c) / e;
        let lifted = self.with_precision(self.prec + c)?;
        let y = if c == 0 { lifted } else { &lifted * &PadicNumber::pi(&self.tower, self.prec + c).pow(c as u64) };
        let pa = self.tower.p_pow(a);
        let z = PadicNumber::raw(&self.tower, new_prec, y.c.iter().map(|&x| x / pa).collect());
        let w = PadicNumber::eisenstein_unit(&self.tower, new_prec);
        if w == PadicNumber::one(&self.tower, new_prec) {
            Ok(z)
        } else {
            Ok(&z * &w.inverse()?.pow(a as u64))
        }
    }

    /// Exact division by a rational integer; precision drops by e·ord_p(n).
    pub fn div_int(&self, n: u64) -> Result<PadicNumber> {
        if n == 0 {
            return Err(Error::Domain("division by zero".into()));
        }
        let p = self.tower.p;
        let v = v_p_u64(n, p);
        let e = self.tower.e() as u32;
        let loss = e * v;
        if loss > self.prec {
            return Err(Error::Precision(format!("dividing by {n} needs {loss} digits, only {} available", self.prec)));
        }
        let new_prec = self.prec - loss;
        let mut out = if self.is_zero() {
            PadicNumber::zero(&self.tower, new_prec)
        } else {
            if let Some(o) = self.ord_pi() {
                if o < loss {
                    return Err(Error::Domain(format!("element of valuation {o} is not divisible by {n}")));
                }
            }
            let pv = self.tower.p_pow(v);
            PadicNumber::raw(&self.tower, new_prec, self.c.iter().map(|&x| x / pv).collect())
        };
        let unit = n / self.tower.p_pow(v);
        if unit != 1 {
            let m = out.work_modulus().max(1);
            let inv = if m == 1 { 0 } else { inv_mod(unit % m, m).expect("unit part is prime to p") };
            out = out.mul_u64(inv);
        }
        Ok(out)
    }

    fn mul_u64(&self, k: u64) -> PadicNumber {
        let m = self.work_modulus() as u128;
        if m <= 1 {
            return self.clone();
        }
        let c = self.c.iter().map(|&x| ((x as u128 * (k as u128 % m)) % m) as u64).collect();
        PadicNumber::raw(&self.tower, self.prec, c)
    }

    /// Exact division x / d, losing ord_π(d) digits.
    pub fn div_exact(&self, d: &PadicNumber) -> Result<PadicNumber> {
        let k = d.ord_pi().ok_or_else(|| Error::Precision("division by an element that vanishes at this precision".into()))?;
        let num = self.div_pi_pow(k)?;
        let den = d.div_pi_pow(k)?;
        let prec = num.prec.min(den.prec);
        Ok(&num.reduce(prec) * &den.reduce(prec).inverse()?)
    }

    /// Embeds an element with residue degree 1 into a tower with the same K.
    pub fn embed_into(&self, target: &Arc<Tower>) -> Result<PadicNumber> {
        if !self.tower.same_base(target) {
            return Err(Error::Shape("towers have different base fields".into()));
        }
        if Arc::ptr_eq(&self.tower, target) || *self.tower == **target {
            return Ok(PadicNumber { tower: target.clone(), prec: self.prec, c: self.c.clone() });
        }
        if self.tower.f() != 1 {
            return Err(Error::Shape("only residue-degree-one elements embed".into()));
        }
        let e = target.e();
        let mut c = vec![0; e * target.f()];
        c[..e].copy_from_slice(&self.c[..e]);
        Ok(PadicNumber::raw(target, self.prec, c))
    }

    /// Projects to the f = 1 tower when the ω-components vanish.
    pub fn project_to_base(&self, base: &Arc<Tower>) -> Option<PadicNumber> {
        let e = self.tower.e();
        if self.c[e..].iter().any(|&x| x != 0) || !self.tower.same_base(base) || base.f() != 1 {
            return None;
        }
        Some(PadicNumber::raw(base, self.prec, self.c[..e].to_vec()))
    }

    pub fn lies_in_base(&self) -> bool {
        self.c[self.tower.e()..].iter().all(|&x| x == 0)
    }

    /// Canonical serialization: base-π digits over the ω-basis.
    pub fn serialize(&self) -> SerializedPadic {
        let mut digits = Vec::with_capacity(self.prec as usize);
        let mut x = self.clone();
        for _ in 0..self.prec {
            let d = x.residue();
            digits.push(d.coeffs().to_vec());
            let lift = PadicNumber::from_residue(&self.tower, x.prec, &d);
            x = (&x - &lift).div_pi_pow(1).expect("digit removed");
        }
        SerializedPadic { tower: self.tower.descriptor(), precision: self.prec, digits }
    }

    pub fn deserialize(s: &SerializedPadic) -> Result<PadicNumber> {
        let tower = Tower::from_descriptor(&s.tower)?;
        PadicNumber::from_digits(&tower, s.precision, &s.digits)
    }

    pub fn from_digits(tower: &Arc<Tower>, prec: u32, digits: &[Vec<u64>]) -> Result<PadicNumber> {
        tower.check_precision(prec)?;
        let pi = PadicNumber::pi(tower, prec);
        let mut x = PadicNumber::zero(tower, prec);
        for d in digits.iter().rev() {
            let r = tower.field.from_coeffs(d)?;
            x = &(&x * &pi) + &PadicNumber::from_residue(tower, prec, &r);
        }
        Ok(x)
    }
}

/// Serialized form: little-endian base-π digits, each digit a residue-field
/// coordinate vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerializedPadic {
    pub tower: TowerDescriptor,
    pub precision: u32,
    pub digits: Vec<Vec<u64>>,
}

fn binary(a: &PadicNumber, b: &PadicNumber) -> (u32, u64) {
    assert!(a.same_tower(b), "operands live in different towers: {} vs {}", a.tower, b.tower);
    let prec = a.prec.min(b.prec);
    (prec, a.tower.p_pow(a.tower.slot_exp(prec, 0)))
}

impl Add for &PadicNumber {
    type Output = PadicNumber;
    fn add(self, rhs: &PadicNumber) -> PadicNumber {
        let (prec, m) = binary(self, rhs);
        let c = self.c.iter().zip(&rhs.c).map(|(x, y)| ((*x as u128 + *y as u128) % m as u128) as u64).collect();
        PadicNumber::raw(&self.tower, prec, c)
    }
}

impl Sub for &PadicNumber {
    type Output = PadicNumber;
    fn sub(self, rhs: &PadicNumber) -> PadicNumber {
        let (prec, m) = binary(self, rhs);
        let c = self.c.iter().zip(&rhs.c).map(|(x, y)| (*x % m + m - *y % m) % m).collect();
        PadicNumber::raw(&self.tower, prec, c)
    }
}

impl Neg for &PadicNumber {
    type Output = PadicNumber;
    fn neg(self) -> PadicNumber {
        let m = self.work_modulus();
        PadicNumber::raw(&self.tower, self.prec, self.c.iter().map(|x| (m - x % m) % m).collect())
    }
}

impl Mul for &PadicNumber {
    type Output = PadicNumber;
    fn mul(self, rhs: &PadicNumber) -> PadicNumber {
        let (prec, m) = binary(self, rhs);
        let c = mul_coords(&self.tower, &self.c, &rhs.c, m);
        PadicNumber::raw(&self.tower, prec, c)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for PadicNumber {
            type Output = PadicNumber;
            fn $m(self, rhs: PadicNumber) -> PadicNumber {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

fn mul_coords(t: &Tower, a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
    if m == 1 {
        return vec![0; a.len()];
    }
    let e = t.e();
    let f = t.f();
    if e == 1 && f == 1 {
        return vec![((a[0] as u128 * b[0] as u128) % m as u128) as u64];
    }
    let m128 = m as u128;
    let w = 2 * e - 1;
    let mut prod = vec![0u128; w * (2 * f - 1)];
    for ja in 0..f {
        for ia in 0..e {
            let x = a[ia + e * ja] as u128;
            if x == 0 {
                continue;
            }
            for jb in 0..f {
                for ib in 0..e {
                    let y = b[ib + e * jb] as u128;
                    if y == 0 {
                        continue;
                    }
                    let slot = &mut prod[(ia + ib) + w * (ja + jb)];
                    *slot = (*slot + x * y % m128) % m128;
                }
            }
        }
    }
    for j in (f..2 * f - 1).rev() {
        for i in 0..w {
            let cval = prod[i + w * j] % m128;
            if cval == 0 {
                continue;
            }
            prod[i + w * j] = 0;
            for (l, &g) in t.residue_poly.iter().enumerate() {
                let slot = &mut prod[i + w * (j - f + l)];
                *slot = (*slot + (m128 - cval * g as u128 % m128)) % m128;
            }
        }
    }
    for i in (e..w).rev() {
        for j in 0..f {
            let cval = prod[i + w * j] % m128;
            if cval == 0 {
                continue;
            }
            prod[i + w * j] = 0;
            for (l, &al) in t.eisenstein.iter().enumerate() {
                let neg = mod_i64(-al, m) as u128;
                let slot = &mut prod[(i - e + l) + w * j];
                *slot = (*slot + cval * neg % m128) % m128;
            }
        }
    }
    let mut out = vec![0u64; e * f];
    for j in 0..f {
        for i in 0..e {
            out[i + e * j] = (prod[i + w * j] % m128) as u64;
        }
    }
    out
}

/// The operations the exp/log/power calculus needs from a coefficient algebra.
pub trait PadicAlgebra: Clone {
    fn tower(&self) -> &Arc<Tower>;
    fn precision(&self) -> u32;
    /// Minimal ord_π over the coefficients, None when zero at this precision.
    fn min_ord_pi(&self) -> Option<u32>;
    fn with_precision(&self, prec: u32) -> Result<Self>;
    fn one_like(&self) -> Self;
    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn div_int(&self, n: u64) -> Result<Self>;
    fn scale(&self, c: &PadicNumber) -> Self;
}

impl PadicAlgebra for PadicNumber {
    fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }
    fn precision(&self) -> u32 {
        self.prec
    }
    fn min_ord_pi(&self) -> Option<u32> {
        self.ord_pi()
    }
    fn with_precision(&self, prec: u32) -> Result<Self> {
        PadicNumber::with_precision(self, prec)
    }
    fn one_like(&self) -> Self {
        PadicNumber::one(&self.tower, self.prec)
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
        PadicNumber::div_int(self, n)
    }
    fn scale(&self, c: &PadicNumber) -> Self {
        self * c
    }
}

/// exp(x) for ord_p(x) > 1/(p−1), summed until the tail bound
/// n·(ord_p x − 1/(p−1)) clears the precision.
pub fn exp_series<A: PadicAlgebra>(x: &A) -> Result<A> {
    let tower = x.tower().clone();
    let n = x.precision();
    let Some(v) = x.min_ord_pi() else {
        return Ok(x.one_like());
    };
    let p = tower.p() as i64;
    let e = tower.e() as i64;
    let slope = v as i64 * (p - 1) - e;
    if slope <= 0 {
        return Err(Error::Domain(format!("exp needs ord_p(x) > 1/(p-1); got ord_π = {v} with e = {e}")));
    }
    let need = n as i64 * (p - 1) - e;
    let terms = if need <= 0 { 1 } else { ((need + slope - 1) / slope).max(1) } as u64;
    let guard = e as u32 * v_p_factorial(terms.saturating_sub(1), p as u64);
    let work = n + guard;
    let xw = x.with_precision(work)?;
    let mut term = xw.one_like();
    let mut sum = xw.one_like();
    for k in 1..terms {
        term = term.mul_ref(&xw).div_int(k)?;
        sum = sum.add_ref(&term);
    }
    sum.with_precision(n)
}

/// log(x) for a 1-unit x.
pub fn log_series<A: PadicAlgebra>(x: &A) -> Result<A> {
    let tower = x.tower().clone();
    let n = x.precision();
    let z = x.sub_ref(&x.one_like());
    let Some(v) = z.min_ord_pi() else {
        return z.with_precision(n);
    };
    if v == 0 {
        return Err(Error::Domain("log needs a 1-unit argument".into()));
    }
    let p = tower.p();
    let e = tower.e() as u32;
    let log_p = |m: u64| -> u32 {
        let mut k = 0;
        let mut t = m;
        while t >= p {
            t /= p;
            k += 1;
        }
        k
    };
    let bound = 64 * (n as u64 + 8) * e as u64;
    let mut last_bad = 0u64;
    for m in 1..=bound {
        if (m as i64) * (v as i64) - ((e * log_p(m)) as i64) < (n as i64) {
            last_bad = m;
        }
    }
    let terms = last_bad + 1;
    let guard = e * log_p(terms.max(1));
    let work = n + guard;
    let zw = z.with_precision(work)?;
    let mut power = zw.clone();
    let mut sum: Option<A> = None;
    for k in 1..terms {
        let term = power.div_int(k)?;
        sum = Some(match sum {
            None => term,
            Some(s) if k % 2 == 1 => s.add_ref(&term),
            Some(s) => s.sub_ref(&term),
        });
        power = power.mul_ref(&zw);
    }
    match sum {
        Some(s) => s.with_precision(n),
        None => z.with_precision(n),
    }
}

/// exp(y·log x) for a 1-unit x, under ord_p(y) + ord_p(log x) > 1/(p−1).
pub fn unit_pow_generic<A: PadicAlgebra>(x: &A, y: &PadicNumber) -> Result<A> {
    let l = log_series(x)?;
    let (Some(vl), Some(vy)) = (l.min_ord_pi(), y.ord_pi()) else {
        return Ok(x.one_like());
    };
    let p = x.tower().p() as i64;
    let e = x.tower().e() as i64;
    if (vl as i64 + vy as i64) * (p - 1) <= e {
        return Err(Error::Domain(format!(
            "unit_pow needs ord_p(y) + ord_p(log x) > 1/(p-1); got ord_π {vy} + {vl}"
        )));
    }
    let prec = x.precision().min(y.precision());
    exp_series(&l.scale(y).with_precision(prec)?)
}

pub fn p_exp(x: &PadicNumber) -> Result<PadicNumber> {
    exp_series(x)
}

pub fn p_log(x: &PadicNumber) -> Result<PadicNumber> {
    log_series(x)
}

pub fn unit_pow(x: &PadicNumber, y: &PadicNumber) -> Result<PadicNumber> {
    unit_pow_generic(x, y)
}

pub fn teichmuller(tower: &Arc<Tower>, prec: u32, a: &FfElem) -> PadicNumber {
    PadicNumber::teichmuller(tower, prec, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qp(p: u64) -> Arc<Tower> {
        Tower::qp(p).unwrap()
    }

    #[test]
    fn valuations() {
        let t = qp(2);
        assert_eq!(PadicNumber::zero(&t, 8).valuation(), Valuation::AtLeast(8));
        assert_eq!(PadicNumber::from_i64(&t, 8, 6).ord_pi(), Some(1));
        let r = Tower::ramified(3, vec![3, 0]).unwrap();
        let pi = PadicNumber::pi(&r, 10);
        let u = PadicNumber::from_coords(&r, 10, &[2, 1]).unwrap();
        assert_eq!((&(&pi * &pi) * &u).ord_pi(), Some(2));
        assert_eq!(PadicNumber::from_i64(&r, 10, 3).ord_pi(), Some(2));
    }

    #[test]
    fn ramified_relation_holds() {
        let r = Tower::ramified(3, vec![3, 0]).unwrap();
        let pi = PadicNumber::pi(&r, 12);
        assert_eq!(&pi * &pi, PadicNumber::from_i64(&r, 12, -3));
    }

    #[test]
    fn teichmuller_mod_27() {
        let t = qp(3);
        let two = t.residue_field().from_int(2);
        let x = PadicNumber::teichmuller(&t, 3, &two);
        assert_eq!(x, PadicNumber::from_i64(&t, 3, 26));
        assert_eq!(PadicNumber::teichmuller(&t, 5, &t.residue_field().one()), PadicNumber::one(&t, 5));
    }

    #[test]
    fn exp_domain() {
        let t = qp(2);
        assert!(matches!(p_exp(&PadicNumber::from_i64(&t, 8, 2)), Err(Error::Domain(_))));
        assert_eq!(p_exp(&PadicNumber::zero(&t, 8)).unwrap(), PadicNumber::one(&t, 8));
        assert_eq!(p_log(&PadicNumber::one(&t, 8)).unwrap(), PadicNumber::zero(&t, 8));
    }

    #[test]
    fn division_by_pi_in_ramified_tower() {
        let r = Tower::ramified(3, vec![3, 0]).unwrap();
        let pi = PadicNumber::pi(&r, 9);
        let u = PadicNumber::from_coords(&r, 9, &[5, 7]).unwrap();
        let x = &pi.pow(3) * &u;
        let y = x.div_pi_pow(3).unwrap();
        assert_eq!(y.precision(), 6);
        assert!(y.eq_mod(&u, 6));
    }

    #[test]
    fn unit_inverse() {
        let t = Tower::new(2, vec![-2], vec![1, 1]).unwrap();
        let x = PadicNumber::from_coords(&t, 10, &[3, 6]).unwrap();
        assert_eq!(&x * &x.inverse().unwrap(), PadicNumber::one(&t, 10));
    }

    #[test]
    fn div_int_loses_digits() {
        let t = qp(3);
        let x = PadicNumber::from_i64(&t, 6, 18);
        let y = x.div_int(9).unwrap();
        assert_eq!(y.precision(), 4);
        assert_eq!(y, PadicNumber::from_i64(&t, 4, 2));
        assert!(PadicNumber::from_i64(&t, 6, 2).div_int(3).is_err());
    }

    #[test]
    fn serialization_roundtrip_fixed() {
        let t = Tower::new(3, vec![3, 0], vec![1, 0]).unwrap();
        let x = PadicNumber::from_coords(&t, 7, &[4, -5, 11, 2]).unwrap();
        let s = x.serialize();
        assert_eq!(s.digits.len(), 7);
        assert_eq!(PadicNumber::deserialize(&s).unwrap(), x);
    }
}
