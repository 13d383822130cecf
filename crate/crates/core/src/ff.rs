//! Finite fields F_{p^k} = F_p[w]/(g), with g the lowest irreducible monic
//! polynomial of degree k in the order given by the integer sum g_j p^j.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn checked_pow(p: u64, k: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..k {
        acc = acc.checked_mul(p)?;
    }
    Some(acc)
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

/// Remainder of `a` modulo the monic polynomial `m` (full coefficient list).
fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let k = m.len() - 1;
    let mut t = a.to_vec();
    trim(&mut t);
    while t.len() > k {
        let top = t.len() - 1;
        let c = t[top];
        let shift = top - k;
        for (j, &mj) in m.iter().enumerate() {
            t[shift + j] = (t[shift + j] + p - c * mj % p) % p;
        }
        trim(&mut t);
    }
    t
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    out
}

fn poly_powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = poly_rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_rem(&poly_mul(&acc, &b, p), m, p);
        }
        b = poly_rem(&poly_mul(&b, &b, p), m, p);
        e >>= 1;
    }
    acc
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let lead = *y.last().unwrap();
        let inv = mod_pow(lead, p - 2, p);
        let monic: Vec<u64> = y.iter().map(|c| c * inv % p).collect();
        let r = poly_rem(&x, &monic, p);
        x = monic;
        y = r;
    }
    x
}

/// Rabin's test for the monic polynomial x^k + sum g_j x^j over F_p.
pub fn is_irreducible(p: u64, g: &[u64]) -> bool {
    let k = g.len();
    if k == 0 || !is_prime(p) {
        return false;
    }
    if k == 1 {
        return true;
    }
    let mut m: Vec<u64> = g.iter().map(|c| c % p).collect();
    m.push(1);
    let x = vec![0u64, 1];
    let mut frob_powers = Vec::with_capacity(k + 1);
    let mut h = poly_rem(&x, &m, p);
    frob_powers.push(h.clone());
    for _ in 0..k {
        h = poly_powmod(&h, p, &m, p);
        frob_powers.push(h.clone());
    }
    let mut xk = frob_powers[k].clone();
    trim(&mut xk);
    let mut xr = poly_rem(&x, &m, p);
    trim(&mut xr);
    if xk != xr {
        return false;
    }
    for r in prime_factors(k as u64) {
        let mut d = frob_powers[k / r as usize].clone();
        d.resize(d.len().max(2), 0);
        d[1] = (d[1] + p - 1) % p;
        let gcd = poly_gcd(&d, &m, p);
        if gcd.len() != 1 {
            return false;
        }
    }
    true
}

/// The lowest irreducible monic polynomial of degree `k`, as its non-leading coefficients.
pub fn lowest_irreducible(p: u64, k: usize) -> Result<Vec<u64>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Vec<u64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&(p, k)) {
        return Ok(v.clone());
    }
    if !is_prime(p) || k == 0 {
        return Err(Error::Tower(format!("no field of size {p}^{k}")));
    }
    let count = checked_pow(p, k as u32).ok_or_else(|| Error::Resource(format!("field {p}^{k} too large")))?;
    for n in 0..count {
        let mut g = Vec::with_capacity(k);
        let mut t = n;
        for _ in 0..k {
            g.push(t % p);
            t /= p;
        }
        if is_irreducible(p, &g) {
            cache.lock().unwrap().insert((p, k), g.clone());
            return Ok(g);
        }
    }
    Err(Error::Tower(format!("no irreducible polynomial of degree {k} over F_{p}")))
}

/// An element of F_{p^k} as coefficients of 1, w, ..., w^{k-1}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FfElem(pub(crate) Vec<u64>);

impl FfElem {
    pub fn coeffs(&self) -> &[u64] {
        &self.0
    }
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for FfElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug)]
pub struct FiniteField {
    p: u64,
    k: usize,
    modulus: Vec<u64>,
    size: u64,
    frob: Vec<Vec<u64>>,
    trace_basis: Vec<u64>,
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}
impl Eq for FiniteField {}

impl FiniteField {
    /// The canonical field of size p^k, shared across callers.
    pub fn get(p: u64, k: usize) -> Result<Arc<FiniteField>> {
        static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<FiniteField>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(f) = cache.lock().unwrap().get(&(p, k)) {
            return Ok(f.clone());
        }
        let g = lowest_irreducible(p, k)?;
        let field = Arc::new(FiniteField::with_modulus(p, g)?);
        cache.lock().unwrap().insert((p, k), field.clone());
        Ok(field)
    }

    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<FiniteField> {
        if !is_irreducible(p, &modulus) {
            return Err(Error::Tower(format!("{modulus:?} is not irreducible over F_{p}")));
        }
        let k = modulus.len();
        let size = checked_pow(p, k as u32).ok_or_else(|| Error::Resource(format!("field {p}^{k} too large")))?;
        let mut field = FiniteField { p, k, modulus, size, frob: Vec::new(), trace_basis: Vec::new() };
        let mut frob = Vec::with_capacity(k);
        for j in 0..k {
            let mut e = vec![0u64; k];
            e[j] = 1;
            frob.push(field.pow_slow(&FfElem(e), p).0);
        }
        field.frob = frob;
        let mut trace_basis = Vec::with_capacity(k);
        for j in 0..k {
            let mut e = vec![0u64; k];
            e[j] = 1;
            let mut x = FfElem(e);
            let mut acc = field.zero();
            for _ in 0..k {
                acc = field.add(&acc, &x);
                x = field.frobenius(&x);
            }
            trace_basis.push(acc.0[0]);
        }
        field.trace_basis = trace_basis;
        Ok(field)
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn degree(&self) -> usize {
        self.k
    }
    pub fn size(&self) -> u64 {
        self.size
    }
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> FfElem {
        FfElem(vec![0; self.k])
    }
    pub fn one(&self) -> FfElem {
        let mut v = vec![0; self.k];
        v[0] = 1;
        FfElem(v)
    }
    pub fn from_int(&self, n: i64) -> FfElem {
        let mut v = vec![0; self.k];
        v[0] = n.rem_euclid(self.p as i64) as u64;
        FfElem(v)
    }
    pub fn from_coeffs(&self, c: &[u64]) -> Result<FfElem> {
        if c.len() != self.k {
            return Err(Error::Shape(format!("expected {} coefficients, got {}", self.k, c.len())));
        }
        Ok(FfElem(c.iter().map(|x| x % self.p).collect()))
    }
    /// The generator w of the polynomial basis (0 when k = 1 and g = x).
    pub fn generator(&self) -> FfElem {
        if self.k == 1 {
            return FfElem(vec![(self.p - self.modulus[0]) % self.p]);
        }
        let mut v = vec![0; self.k];
        v[1] = 1;
        FfElem(v)
    }

    /// Integer encoding sum c_j p^j; orders elements for canonical output.
    pub fn encode(&self, a: &FfElem) -> u64 {
        a.0.iter().rev().fold(0u64, |acc, &c| acc * self.p + c)
    }
    pub fn decode(&self, mut n: u64) -> FfElem {
        let mut v = Vec::with_capacity(self.k);
        for _ in 0..self.k {
            v.push(n % self.p);
            n /= self.p;
        }
        FfElem(v)
    }

    pub fn add(&self, a: &FfElem, b: &FfElem) -> FfElem {
        FfElem(a.0.iter().zip(&b.0).map(|(x, y)| (x + y) % self.p).collect())
    }
    pub fn sub(&self, a: &FfElem, b: &FfElem) -> FfElem {
        FfElem(a.0.iter().zip(&b.0).map(|(x, y)| (x + self.p - y) % self.p).collect())
    }
    pub fn neg(&self, a: &FfElem) -> FfElem {
        FfElem(a.0.iter().map(|x| (self.p - x) % self.p).collect())
    }
    pub fn mul(&self, a: &FfElem, b: &FfElem) -> FfElem {
        let k = self.k;
        let p = self.p;
        let mut t = vec![0u64; 2 * k - 1];
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                t[i + j] = (t[i + j] + x * y) % p;
            }
        }
        for i in (k..2 * k - 1).rev() {
            let c = t[i];
            if c == 0 {
                continue;
            }
            t[i] = 0;
            for (j, &g) in self.modulus.iter().enumerate() {
                t[i - k + j] = (t[i - k + j] + p - c * g % p) % p;
            }
        }
        t.truncate(k);
        FfElem(t)
    }

    fn pow_slow(&self, a: &FfElem, mut e: u64) -> FfElem {
        let mut acc = self.one();
        let mut b = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        acc
    }

    pub fn pow(&self, a: &FfElem, e: u64) -> FfElem {
        self.pow_slow(a, e)
    }

    pub fn inv(&self, a: &FfElem) -> Result<FfElem> {
        if a.is_zero() {
            return Err(Error::Domain("inverse of zero in a finite field".into()));
        }
        Ok(self.pow(a, self.size - 2))
    }

    /// a -> a^p via the precomputed linear map.
    pub fn frobenius(&self, a: &FfElem) -> FfElem {
        if self.frob.is_empty() {
            return self.pow_slow(a, self.p);
        }
        let mut out = vec![0u64; self.k];
        for (j, &c) in a.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (i, &f) in self.frob[j].iter().enumerate() {
                out[i] = (out[i] + c * f) % self.p;
            }
        }
        FfElem(out)
    }

    pub fn frobenius_pow(&self, a: &FfElem, j: usize) -> FfElem {
        let mut x = a.clone();
        for _ in 0..j % self.k {
            x = self.frobenius(&x);
        }
        x
    }

    /// Absolute trace to F_p.
    pub fn trace(&self, a: &FfElem) -> u64 {
        a.0.iter().zip(&self.trace_basis).fold(0, |acc, (c, t)| (acc + c * t) % self.p)
    }

    pub fn elements(&self) -> impl Iterator<Item = FfElem> + '_ {
        (0..self.size).map(move |n| self.decode(n))
    }

    /// The smallest-encoded root in this field of the monic polynomial with
    /// non-leading coefficients `g`.
    pub fn find_root(&self, g: &[u64]) -> Option<FfElem> {
        for x in self.elements() {
            let mut acc = self.one();
            for &c in g.iter().rev() {
                acc = self.add(&self.mul(&acc, &x), &self.from_int(c as i64));
            }
            if acc.is_zero() {
                return Some(x);
            }
        }
        None
    }

    /// Maps an element of the subfield `small` into this field along the root `rho`
    /// of `small`'s modulus.
    pub fn embed(&self, a: &FfElem, rho: &FfElem) -> FfElem {
        let mut acc = self.zero();
        for &c in a.0.iter().rev() {
            acc = self.add(&self.mul(&acc, rho), &self.from_int(c as i64));
        }
        acc
    }

    /// Discrete-log tables; only sensible for small fields.
    pub fn tables(&self) -> Result<FieldTables> {
        if self.size > 1 << 24 {
            return Err(Error::Resource(format!("field of size {} too large for tables", self.size)));
        }
        let order = self.size - 1;
        let factors = prime_factors(order.max(1));
        let mut gen = None;
        for n in 1..self.size {
            let g = self.decode(n);
            if factors.iter().all(|&r| order == 1 || self.pow(&g, order / r) != self.one()) {
                gen = Some(g);
                break;
            }
        }
        let g = gen.ok_or_else(|| Error::Domain("no primitive element".into()))?;
        let mut exp = vec![0u32; order as usize];
        let mut log = vec![u32::MAX; self.size as usize];
        let mut x = self.one();
        for i in 0..order {
            let enc = self.encode(&x);
            exp[i as usize] = enc as u32;
            log[enc as usize] = i as u32;
            x = self.mul(&x, &g);
        }
        let trace = (0..self.size).map(|n| self.trace(&self.decode(n)) as u8).collect();
        Ok(FieldTables { order, exp, log, trace })
    }
}

/// Exp/log/trace lookup tables indexed by element encoding.
pub struct FieldTables {
    pub order: u64,
    pub exp: Vec<u32>,
    pub log: Vec<u32>,
    pub trace: Vec<u8>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_irreducibles() {
        assert_eq!(lowest_irreducible(2, 1).unwrap(), vec![0]);
        assert_eq!(lowest_irreducible(2, 2).unwrap(), vec![1, 1]);
        assert_eq!(lowest_irreducible(2, 3).unwrap(), vec![1, 1, 0]);
        assert_eq!(lowest_irreducible(3, 2).unwrap(), vec![1, 0]);
        assert!(!is_irreducible(2, &[1, 0]));
    }

    #[test]
    fn field_axioms_small() {
        let f = FiniteField::get(3, 3).unwrap();
        for a in f.elements() {
            if a.is_zero() {
                continue;
            }
            assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), f.one());
            assert_eq!(f.frobenius(&a), f.pow(&a, 3));
            assert_eq!(f.pow(&a, f.size() - 1), f.one());
        }
    }

    #[test]
    fn trace_is_additive_and_onto() {
        let f = FiniteField::get(2, 4).unwrap();
        let mut counts = [0u32; 2];
        for a in f.elements() {
            counts[f.trace(&a) as usize] += 1;
        }
        assert_eq!(counts, [8, 8]);
    }

    #[test]
    fn tables_roundtrip() {
        let f = FiniteField::get(2, 5).unwrap();
        let t = f.tables().unwrap();
        for n in 1..f.size() {
            assert_eq!(t.exp[t.log[n as usize] as usize] as u64, n);
        }
    }

    #[test]
    fn subfield_embedding_is_a_homomorphism() {
        let small = FiniteField::get(2, 2).unwrap();
        let big = FiniteField::get(2, 4).unwrap();
        let rho = big.find_root(small.modulus()).unwrap();
        for a in small.elements() {
            for b in small.elements() {
                let lhs = big.embed(&small.mul(&a, &b), &rho);
                let rhs = big.mul(&big.embed(&a, &rho), &big.embed(&b, &rho));
                assert_eq!(lhs, rhs);
            }
        }
    }
}
