//! Kloosterman sums over 𝔾_m/F_p, the polynomials L_Ψ(y, T), their Newton
//! slopes and unit roots, and the unit-root L-function built from them.

use std::sync::Arc;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::FiniteField;
use crate::geometry::{BaseScheme, ClosedPoint, ENUMERATION_GUARD};
use crate::padic::{v_p_factorial, PadicNumber, Tower};
use crate::series::{newton_polygon, series_from_dlog, Slope, SlopeNormalization, TruncatedSeries};
use crate::sigma::{euler_product_with, spread};
use crate::weight::{eval_character, CharacterPoint};

/// The family Σ Ψ(Tr(x₀ + … + x_n)) over x₀⋯x_n = y, with Ψ(a) = ζ_p^a.
#[derive(Clone, Debug)]
pub struct KloostermanFamily {
    pub p: u64,
    pub n: usize,
    /// Precision in p-adic digits.
    pub digits: u32,
    tower: Arc<Tower>,
    zeta: PadicNumber,
}

impl KloostermanFamily {
    /// Values live in Q_2 for p = 2 and in Q_p(π), π^{p−1} = −p, otherwise.
    pub fn new(p: u64, n: usize, digits: u32) -> Result<KloostermanFamily> {
        if !crate::ff::is_prime(p) {
            return Err(Error::Domain(format!("p = {p} is not prime")));
        }
        if digits == 0 {
            return Err(Error::Domain("precision must be positive".into()));
        }
        let tower = if p == 2 {
            Tower::qp(2)?
        } else {
            let mut eis = vec![0i64; p as usize - 1];
            eis[0] = p as i64;
            Tower::ramified(p, eis)?
        };
        let prec = digits * tower.e() as u32;
        if prec > tower.max_precision() {
            return Err(Error::Resource(format!("precision {digits} exceeds the word-size limit")));
        }
        let zeta = if p == 2 { PadicNumber::from_i64(&tower, prec, -1) } else { primitive_root_of_unity(&tower, prec)? };
        Ok(KloostermanFamily { p, n, digits, tower, zeta })
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    /// Precision in π-digits.
    pub fn precision(&self) -> u32 {
        self.digits * self.tower.e() as u32
    }

    pub fn zeta(&self) -> &PadicNumber {
        &self.zeta
    }

    pub fn psi(&self, a: u64) -> PadicNumber {
        self.zeta.pow(a % self.p)
    }
}

/// Φ_p(x) = 1 + x + … + x^{p−1} and its derivative.
fn cyclotomic(x: &PadicNumber, p: u64) -> (PadicNumber, PadicNumber) {
    let t = x.tower().clone();
    let n = x.precision();
    let mut val = PadicNumber::zero(&t, n);
    let mut der = PadicNumber::zero(&t, n);
    let mut pw = PadicNumber::one(&t, n);
    for k in 0..p {
        val = &val + &pw;
        if k + 1 < p {
            der = &der + &(&pw * &PadicNumber::from_i64(&t, n, k as i64 + 1));
        }
        pw = &pw * x;
    }
    (val, der)
}

/// A primitive p-th root of unity in Q_p(π): the first x = 1 + Σ d_i π^i with
/// ord_π Φ_p(x) > 2(p−2), then Newton's method on Φ_p.
fn primitive_root_of_unity(tower: &Arc<Tower>, prec: u32) -> Result<PadicNumber> {
    let p = tower.p();
    let digits = (p as usize - 1).max(2);
    let need = 2 * (p as u32 - 2);
    let pi = PadicNumber::pi(tower, prec);
    let total = p.checked_pow(digits as u32).filter(|&x| x <= ENUMERATION_GUARD).ok_or_else(|| Error::Resource("root of unity search too large".into()))?;
    let mut start = None;
    for code in 0..total {
        let mut x = PadicNumber::one(tower, prec);
        let mut c = code;
        let mut pk = pi.clone();
        for _ in 0..digits {
            x = &x + &(&pk * &PadicNumber::from_i64(tower, prec, (c % p) as i64));
            c /= p;
            pk = &pk * &pi;
        }
        let (v, _) = cyclotomic(&x, p);
        if v.ord_pi().is_none_or(|o| o > need) {
            start = Some(x);
            break;
        }
    }
    let mut x = start.ok_or_else(|| Error::Convergence("no approximate root of the cyclotomic polynomial".into()))?;
    // Newton is self-correcting, so the digits lost in each division are
    // simply refilled.
    for _ in 0..(2 * prec + 4) {
        let (v, d) = cyclotomic(&x, p);
        if v.is_zero() {
            break;
        }
        let step = v.div_exact(&d)?;
        x = (&x - &step).with_precision(prec)?;
    }
    if !cyclotomic(&x, p).0.is_zero() || x.pow(p) != PadicNumber::one(tower, prec) {
        return Err(Error::Convergence("Newton iteration for ζ_p did not converge".into()));
    }
    Ok(x)
}

#[derive(Clone, Debug, Serialize)]
pub struct KloostermanSums {
    /// counts[m−1][c] = #{x : Tr(x₀ + … + x_n) = c} over F_{p^{rm}}.
    pub counts: Vec<Vec<u64>>,
    /// K_m(y) as integers when p = 2.
    pub integers: Option<Vec<i64>>,
    #[serde(skip)]
    pub values: Vec<PadicNumber>,
}

fn extension_field(pt: &ClosedPoint, m: usize) -> Result<(Arc<FiniteField>, u64)> {
    let small = pt.field();
    let big = FiniteField::get(small.p(), pt.degree() * m)?;
    let rho = big.find_root(small.modulus()).ok_or_else(|| Error::Domain("residue field does not embed".into()))?;
    let y = big.embed(&pt.coords()[0], &rho);
    let enc = big.encode(&y);
    Ok((big, enc))
}

/// Exact K_m(y), m = 1..=m_max, by enumerating x₁, …, x_n ∈ F^× with x₀
/// determined by the product constraint.
pub fn kloosterman_sums(fam: &KloostermanFamily, y: &ClosedPoint, m_max: usize) -> Result<KloostermanSums> {
    if y.coords().len() != 1 || y.field().p() != fam.p {
        return Err(Error::Shape("y must be a point of 𝔾_m over F_p".into()));
    }
    if y.coords()[0].is_zero() {
        return Err(Error::Domain("y must be nonzero".into()));
    }
    let p = fam.p;
    let r = y.degree();
    for m in 1..=m_max {
        let size = (p as u128).checked_pow((r * m * fam.n) as u32);
        if size.is_none_or(|s| s > ENUMERATION_GUARD as u128) {
            return Err(Error::Resource(format!("enumeration over F_{{{p}^{}}}^{} exceeds the guard", r * m, fam.n)));
        }
    }
    let mut counts = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let (field, y_enc) = extension_field(y, m)?;
        let tab = field.tables()?;
        let order = tab.order as usize;
        let ly = tab.log[y_enc as usize] as usize;
        let tr: Vec<u64> = (0..order).map(|i| tab.trace[tab.exp[i] as usize] as u64).collect();
        let n = fam.n;
        let first: Vec<usize> = if n == 0 { vec![0] } else { (0..order).collect() };
        let partial: Vec<Vec<u64>> = first
            .par_iter()
            .map(|&i1| {
                let mut c = vec![0u64; p as usize];
                if n == 0 {
                    c[tr[ly] as usize] += 1;
                    return c;
                }
                let mut idx = vec![0usize; n];
                idx[0] = i1;
                loop {
                    let s: usize = idx.iter().sum();
                    let l0 = (ly + order * n - s % order) % order;
                    let t = idx.iter().map(|&i| tr[i]).sum::<u64>() + tr[l0];
                    c[(t % p) as usize] += 1;
                    let mut k = n - 1;
                    loop {
                        if k == 0 {
                            return c;
                        }
                        idx[k] += 1;
                        if idx[k] < order {
                            break;
                        }
                        idx[k] = 0;
                        k -= 1;
                    }
                }
            })
            .collect();
        let mut total = vec![0u64; p as usize];
        for c in partial {
            for (a, b) in total.iter_mut().zip(c) {
                *a += b;
            }
        }
        counts.push(total);
    }
    let prec = fam.precision();
    let values = counts
        .iter()
        .map(|c| c.iter().enumerate().fold(PadicNumber::zero(&fam.tower, prec), |acc, (a, &k)| &acc + &(&fam.psi(a as u64) * &PadicNumber::from_i64(&fam.tower, prec, k as i64))))
        .collect();
    let integers = (p == 2).then(|| counts.iter().map(|c| c[0] as i64 - c[1] as i64).collect());
    Ok(KloostermanSums { counts, integers, values })
}

/// #Y_y(F_{p^{rm}}) for z^p − z = x₀ + … + x_n, x₀⋯x_n = y, by enumerating z.
pub fn artin_schreier_count(fam: &KloostermanFamily, y: &ClosedPoint, m: usize) -> Result<u64> {
    let (field, y_enc) = extension_field(y, m)?;
    let size = field.size();
    if (size as u128).pow(fam.n as u32 + 1) > ENUMERATION_GUARD as u128 {
        return Err(Error::Resource("Artin-Schreier count exceeds the guard".into()));
    }
    let mut fibre = vec![0u64; size as usize];
    for z in field.elements() {
        let w = field.sub(&field.pow(&z, fam.p), &z);
        fibre[field.encode(&w) as usize] += 1;
    }
    let yv = field.decode(y_enc);
    let units: Vec<_> = field.elements().filter(|a| !a.is_zero()).collect();
    let mut total = 0u64;
    let mut idx = vec![0usize; fam.n];
    loop {
        let mut prod = field.one();
        let mut sum = field.zero();
        for &i in &idx {
            prod = field.mul(&prod, &units[i]);
            sum = field.add(&sum, &units[i]);
        }
        let x0 = field.mul(&yv, &field.inv(&prod)?);
        sum = field.add(&sum, &x0);
        total += fibre[field.encode(&sum) as usize];
        let mut k = fam.n;
        loop {
            if k == 0 {
                return Ok(total);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < units.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// A coefficient recognized in Z (p = 2) or in Z[ζ_p] on the basis
/// 1, ζ, …, ζ^{p−2}, with symmetric representatives mod p^digits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recognized(pub Vec<i64>);

impl std::fmt::Display for Recognized {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("{c}*z"),
                _ => format!("{c}*z^{k}"),
            })
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

fn symmetric(v: i128, modulus: i128) -> i64 {
    let r = v.rem_euclid(modulus);
    (if r > modulus / 2 { r - modulus } else { r }) as i64
}

fn inv_mod(a: i128, m: i128) -> Option<i128> {
    let (mut r0, mut r1, mut s0, mut s1) = (a.rem_euclid(m), m, 1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    (r0 == 1).then(|| s0.rem_euclid(m))
}

/// Coordinates of c on 1, ζ, …, ζ^{p−2} modulo p^digits.
pub fn recognize(fam: &KloostermanFamily, c: &PadicNumber) -> Result<Recognized> {
    let digits = fam.digits.min(c.precision() / fam.tower.e() as u32);
    let modulus = (fam.p as i128).pow(digits);
    if fam.p == 2 {
        return Ok(Recognized(vec![symmetric(c.signed_coords()[0], modulus)]));
    }
    let d = fam.p as usize - 1;
    let prec = fam.precision();
    let cols: Vec<Vec<i128>> = (0..d).map(|k| fam.zeta.pow(k as u64).reduce(prec).signed_coords()).collect();
    let mut a: Vec<Vec<i128>> = (0..d).map(|i| (0..d).map(|k| cols[k][i].rem_euclid(modulus)).collect()).collect();
    let cv = c.reduce(prec).signed_coords();
    let mut b: Vec<i128> = (0..d).map(|i| cv[i].rem_euclid(modulus)).collect();
    for col in 0..d {
        let piv = (col..d)
            .find(|&r| a[r][col] % fam.p as i128 != 0)
            .ok_or_else(|| Error::Recognition("ζ-power basis is singular mod p".into()))?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = inv_mod(a[col][col], modulus).expect("pivot is a unit");
        for r in 0..d {
            if r != col && a[r][col] != 0 {
                let f = a[r][col] * inv % modulus;
                for k in 0..d {
                    a[r][k] = (a[r][k] - f * a[col][k]).rem_euclid(modulus);
                }
                b[r] = (b[r] - f * b[col]).rem_euclid(modulus);
            }
        }
    }
    Ok(Recognized((0..d).map(|i| symmetric(b[i] * inv_mod(a[i][i], modulus).unwrap() % modulus, modulus)).collect()))
}

#[derive(Clone, Debug, Serialize)]
pub struct LpsiPolynomial {
    pub sums: KloostermanSums,
    /// 1 + c₁T + … + c_{n+1}T^{n+1}, recognized.
    pub recognized: Vec<Recognized>,
    #[serde(skip)]
    pub coeffs: Vec<PadicNumber>,
}

/// L_Ψ(y, T)^{(−1)^{n−1}} from K_1..K_{m_max}; coefficients past T^{n+1}
/// must vanish.
pub fn lpsi_polynomial(fam: &KloostermanFamily, y: &ClosedPoint, m_max: usize) -> Result<LpsiPolynomial> {
    let deg = fam.n + 1;
    if m_max < 2 * deg {
        return Err(Error::Domain(format!("m_max = {m_max} must be at least {}", 2 * deg)));
    }
    let sums = kloosterman_sums(fam, y, m_max)?;
    let prec = fam.precision();
    let guard = fam.tower.e() as u32 * v_p_factorial(m_max as u64, fam.p);
    let wide = KloostermanFamily::new(fam.p, fam.n, fam.digits + guard.div_ceil(fam.tower.e() as u32))?;
    let k: Vec<PadicNumber> = sums
        .counts
        .iter()
        .map(|c| c.iter().enumerate().fold(PadicNumber::zero(&wide.tower, wide.precision()), |acc, (a, &n)| &acc + &(&wide.psi(a as u64) * &PadicNumber::from_i64(&wide.tower, wide.precision(), n as i64))))
        .collect();
    let l = series_from_dlog(&k, m_max)?;
    let sign = if fam.n % 2 == 1 { 1 } else { -1 };
    let poly = l.pow_i64(sign)?;
    let coeffs: Vec<PadicNumber> = poly.t_coeffs().iter().map(|c| c.reduce(prec).embed_into(&fam.tower)).collect::<Result<_>>()?;
    if coeffs.iter().any(|c| c.precision() < prec) {
        return Err(Error::Precision("Newton recurrence lost more digits than the guard".into()));
    }
    if let Some(i) = (deg + 1..=m_max).find(|&i| !coeffs[i].is_zero()) {
        return Err(Error::Recognition(format!("coefficient of T^{i} does not vanish: {}", coeffs[i])));
    }
    let coeffs: Vec<PadicNumber> = coeffs.into_iter().take(deg + 1).collect();
    let recognized = coeffs.iter().map(|c| recognize(fam, c)).collect::<Result<_>>()?;
    Ok(LpsiPolynomial { sums, recognized, coeffs })
}

#[derive(Clone, Debug, Serialize)]
pub struct UnitRoot {
    pub slopes: Vec<Slope>,
    #[serde(skip)]
    pub alpha0: PadicNumber,
    pub digits: Vec<i128>,
    pub iterations: usize,
    pub residual_zero: bool,
}

/// Newton slopes of 1 + c₁T + … + c_dT^d, asserted to be 0, r, …, (d−1)r in
/// ord_p (that is, 0, 1, …, d−1 in ord_{p^r} for a point of degree r), and
/// the unit reciprocal root, Hensel-lifted on X^d + c₁X^{d−1} + … + c_d.
pub fn slopes_and_unit_root(poly: &[PadicNumber], r: usize) -> Result<UnitRoot> {
    let d = poly.len() - 1;
    if d == 0 {
        return Err(Error::Domain("constant polynomial has no roots".into()));
    }
    let slopes = newton_polygon(poly, d, SlopeNormalization::P)?;
    let expected: Vec<Slope> = (0..d as i64).map(|i| Slope { slope: Ratio::from_integer(i * r as i64), multiplicity: 1 }).collect();
    if slopes != expected {
        return Err(Error::Slope(format!("slopes {:?} are not 0, {r}, …, {}", slopes.iter().map(|s| s.slope.to_string()).collect::<Vec<_>>(), (d - 1) * r)));
    }
    let t = poly[0].tower().clone();
    let prec = poly.iter().map(|c| c.precision()).min().unwrap();
    let eval = |x: &PadicNumber| -> (PadicNumber, PadicNumber) {
        let mut v = PadicNumber::one(&t, prec);
        let mut dv = PadicNumber::zero(&t, prec);
        for c in &poly[1..] {
            dv = &(&dv * x) + &v;
            v = &(&v * x) + c;
        }
        (v, dv)
    };
    let mut x = -&poly[1].reduce(prec);
    let mut iterations = 0;
    while iterations < 2 * prec as usize + 4 {
        let (v, dv) = eval(&x);
        if v.is_zero() {
            break;
        }
        x = (&x - &v.div_exact(&dv)?).with_precision(prec)?;
        iterations += 1;
    }
    let residual_zero = eval(&x).0.is_zero();
    if !residual_zero {
        return Err(Error::Convergence("Hensel lifting of the unit root did not converge".into()));
    }
    Ok(UnitRoot { slopes, digits: x.signed_coords(), alpha0: x, iterations, residual_zero })
}

/// α₀(y) for a point y of 𝔾_m/F_p.
pub fn unit_root_at(fam: &KloostermanFamily, y: &ClosedPoint) -> Result<UnitRoot> {
    let l = lpsi_polynomial(fam, y, 2 * (fam.n + 1))?;
    slopes_and_unit_root(&l.coeffs, y.degree())
}

/// ∏_y 1/(1 − κ(α₀(y)) T^{deg y}) over closed points of 𝔾_m/F_p.
pub fn unit_root_l(fam: &KloostermanFamily, kappa: &CharacterPoint, d: usize) -> Result<TruncatedSeries> {
    let scheme = BaseScheme::torus(fam.p, 1);
    let prec = fam.precision();
    euler_product_with(&scheme, d, |pt| {
        let a = unit_root_at(fam, pt)?.alpha0;
        let w = eval_character(kappa, &a)?;
        spread(&[PadicNumber::one(&fam.tower, prec), -&w], pt.degree(), d, &fam.tower, prec)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::enumerate_closed_points;

    fn point_one(p: u64) -> ClosedPoint {
        enumerate_closed_points(&BaseScheme::torus(p, 1), 1).unwrap().into_iter().find(|x| x.coords()[0] == FiniteField::get(p, 1).unwrap().one()).unwrap()
    }

    #[test]
    fn small_sums() {
        let fam = KloostermanFamily::new(2, 1, 8).unwrap();
        let s = kloosterman_sums(&fam, &point_one(2), 2).unwrap();
        assert_eq!(s.integers, Some(vec![1, 3]));
        let fam0 = KloostermanFamily::new(2, 0, 8).unwrap();
        let s0 = kloosterman_sums(&fam0, &point_one(2), 3).unwrap();
        assert_eq!(s0.integers, Some(vec![-1, 1, -1]));
    }

    #[test]
    fn zeta_three() {
        let fam = KloostermanFamily::new(3, 1, 6).unwrap();
        let z = fam.zeta();
        assert_ne!(*z, PadicNumber::one(fam.tower(), fam.precision()));
        assert_eq!(z.pow(3), PadicNumber::one(fam.tower(), fam.precision()));
        assert_eq!(recognize(&fam, z).unwrap(), Recognized(vec![0, 1]));
        assert_eq!(recognize(&fam, &z.pow(2)).unwrap(), Recognized(vec![-1, -1]));
    }

    #[test]
    fn degenerate_linear() {
        let fam = KloostermanFamily::new(2, 0, 8).unwrap();
        let l = lpsi_polynomial(&fam, &point_one(2), 2).unwrap();
        assert_eq!(l.recognized, vec![Recognized(vec![1]), Recognized(vec![1])]);
        let u = slopes_and_unit_root(&l.coeffs, 1).unwrap();
        assert_eq!(u.alpha0, PadicNumber::from_i64(fam.tower(), 8, -1));
    }

    #[test]
    fn product_of_roots() {
        let t = Tower::qp(2).unwrap();
        let poly: Vec<PadicNumber> = [1, -3, 2].iter().map(|&c| PadicNumber::from_i64(&t, 8, c)).collect();
        let u = slopes_and_unit_root(&poly, 1).unwrap();
        assert_eq!(u.alpha0, PadicNumber::one(&t, 8));
    }
}
