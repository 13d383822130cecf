//! Pointwise weight space over the Q_p multiplicative model: the split
//! R^× = μ_{q−1} × U⁽¹⁾, the embedding ι, characters κ and the twisted and
//! two-variable Euler products built from them.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{enumerate_closed_points, BaseScheme, ClosedPoint};
use crate::padic::{p_exp, p_log, v_p_factorial, PadicNumber, Tower};
use crate::series::TruncatedSeries;
use crate::sigma::{euler_product_with, spread, SigmaMatrix};

fn require_unramified(t: &Tower) -> Result<()> {
    if t.e() != 1 {
        return Err(Error::Unsupported("only the multiplicative model over unramified K is implemented".into()));
    }
    Ok(())
}

/// binom(c, k) for k = 0..=du. The divisions cost e·v_p(du!) digits, so
/// the result carries that much less precision than c. Fails with a domain
/// error when a coefficient is not integral.
pub fn binomial_series(c: &PadicNumber, du: usize) -> Result<Vec<PadicNumber>> {
    let t = c.tower().clone();
    let w = c.precision();
    let loss = binomial_loss(&t, du);
    if loss >= w {
        return Err(Error::Precision(format!("binomials up to degree {du} need more than {w} digits")));
    }
    let mut out = vec![PadicNumber::one(&t, w)];
    for k in 1..=du {
        let num = &out[k - 1] * &(c - &PadicNumber::from_i64(&t, w, k as i64 - 1));
        let b = num
            .div_int(k as u64)
            .map_err(|_| Error::Domain(format!("binom(c, {k}) is not integral for c = {c}")))?;
        out.push(b);
    }
    Ok(out.into_iter().map(|b| b.reduce(w - loss)).collect())
}

/// Digits lost by `binomial_series` up to degree du.
pub fn binomial_loss(t: &Tower, du: usize) -> u32 {
    t.e() as u32 * v_p_factorial(du as u64, t.p())
}

/// log(u)/p for a 1-unit u, computed from a lift of u with enough guard
/// digits that the result is good to `target` digits.
pub fn log_over_p(u: &PadicNumber, target: u32) -> Result<PadicNumber> {
    let t = u.tower().clone();
    let lifted = u.with_precision(target.max(u.precision()) + t.e() as u32)?;
    Ok(p_log(&lifted)?.div_int(t.p())?.reduce(target))
}

/// (1+z)^c = Σ binom(c,k) z^k for ord_π z > 0, good to the precision of z
/// provided c carries the guard digits of `binomial_loss`.
pub fn binomial_eval(c: &PadicNumber, z: &PadicNumber) -> Result<PadicNumber> {
    let t = z.tower().clone();
    let n = z.precision();
    let Some(v) = z.ord_pi() else {
        return Ok(PadicNumber::one(&t, n));
    };
    if v == 0 {
        return Err(Error::Domain("binomial evaluation needs ord(z) > 0".into()));
    }
    let terms = (n as usize).div_ceil(v as usize);
    let b = binomial_series(&c.embed_into(&t)?, terms)?;
    let n = n.min(b[0].precision());
    let mut acc = PadicNumber::zero(&t, n);
    let mut zk = PadicNumber::one(&t, n);
    let zr = z.reduce(n);
    for bk in &b {
        acc = &acc + &(&bk.reduce(n) * &zk);
        zk = &zk * &zr;
    }
    Ok(acc)
}

/// Number of binomial terms needed to evaluate at z to precision n.
fn terms_for(z: &PadicNumber, n: u32) -> usize {
    match z.ord_pi() {
        Some(v) if v > 0 => (n as usize).div_ceil(v as usize),
        _ => 0,
    }
}

/// ι(y) = exp(p·y) − 1.
pub fn iota(y: &PadicNumber) -> Result<PadicNumber> {
    let t = y.tower().clone();
    require_unramified(&t)?;
    let n = y.precision();
    if y.is_zero() {
        return Ok(PadicNumber::zero(&t, n));
    }
    let py = y * &PadicNumber::from_i64(&t, n, t.p() as i64);
    let e = p_exp(&py).map_err(|_| Error::Domain(format!("y = {y} lies outside the disk of ι")))?;
    Ok(&e - &PadicNumber::one(&t, n))
}

/// Minimal m ≥ −1 with π^m log(U⁽¹⁾) ⊂ R, read off the generators 1 + π^i ω^j.
pub fn log_integrality_exponent(tower: &Arc<Tower>, prec: u32) -> Result<i64> {
    let gen = tower.residue_field().generator();
    let omega = PadicNumber::teichmuller(tower, prec, &gen);
    let pi = PadicNumber::pi(tower, prec);
    let mut min = i64::MAX;
    for i in 1..=(2 * tower.e() as u32) {
        let mut w = PadicNumber::one(tower, prec);
        for _ in 0..tower.f() {
            let g = &PadicNumber::one(tower, prec) + &(&pi.pow(i as u64) * &w);
            if let Some(o) = p_log(&g)?.ord_pi() {
                min = min.min(o as i64);
            }
            w = &w * &omega;
        }
    }
    Ok((-min).max(-1))
}

/// Exponent a with μ_{p^a} the torsion of U⁽¹⁾.
pub fn torsion_exponent(tower: &Tower) -> Result<u32> {
    require_unramified(tower)?;
    Ok(if tower.p() == 2 { 1 } else { 0 })
}

/// (v, u) with v = teichmuller(r mod π) and u = r/v.
pub fn decompose_unit(r: &PadicNumber) -> Result<(PadicNumber, PadicNumber)> {
    if !r.is_unit() {
        return Err(Error::Domain(format!("{r} is not a unit")));
    }
    let v = PadicNumber::teichmuller(r.tower(), r.precision(), &r.residue());
    let u = r * &v.inverse()?;
    Ok((v, u))
}

fn residue_order(tower: &Tower) -> u64 {
    tower.p().pow(tower.f() as u32)
}

/// All components (s, t), s < p^a, t < q − 1.
pub fn components(tower: &Tower) -> Result<Vec<(u64, u64)>> {
    let a = torsion_exponent(tower)?;
    let pa = tower.p().pow(a);
    let q = residue_order(tower);
    Ok((0..pa).flat_map(|s| (0..q - 1).map(move |t| (s, t))).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coordinate {
    Disk(PadicNumber),
    Weight(i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterPoint {
    pub s: u64,
    pub t: u64,
    pub coord: Coordinate,
}

impl CharacterPoint {
    pub fn disk(tower: &Tower, s: u64, t: u64, z: PadicNumber) -> Result<CharacterPoint> {
        let a = torsion_exponent(tower)?;
        if s >= tower.p().pow(a) || t >= residue_order(tower) - 1 {
            return Err(Error::Domain(format!("component ({s}, {t}) out of range")));
        }
        if !z.is_zero() && z.ord_pi() == Some(0) {
            return Err(Error::Domain("disk coordinate needs ord_p(z) > 0".into()));
        }
        Ok(CharacterPoint { s, t, coord: Coordinate::Disk(z) })
    }

    pub fn weight(tower: &Tower, k: i64) -> Result<CharacterPoint> {
        let pa = tower.p().pow(torsion_exponent(tower)?) as i64;
        let s = k.rem_euclid(pa) as u64;
        let t = k.rem_euclid(residue_order(tower) as i64 - 1) as u64;
        Ok(CharacterPoint { s, t, coord: Coordinate::Weight(k) })
    }

    pub fn trivial(tower: &Arc<Tower>, prec: u32) -> CharacterPoint {
        CharacterPoint { s: 0, t: 0, coord: Coordinate::Disk(PadicNumber::zero(tower, prec)) }
    }

    /// The disk point (s, t, ι(y)) realizing r ↦ v^t u^s u^y.
    pub fn from_iota(tower: &Tower, s: u64, t: u64, y: &PadicNumber) -> Result<CharacterPoint> {
        CharacterPoint::disk(tower, s, t, iota(y)?)
    }
}

impl fmt::Display for CharacterPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.coord {
            Coordinate::Disk(z) => write!(f, "(s={}, t={}, z={})", self.s, self.t, z),
            Coordinate::Weight(k) => write!(f, "weight {k}"),
        }
    }
}

/// κ(r) = v^t·u^s·(1+z)^{log(u)/p}; r^k for an integer weight.
pub fn eval_character(kappa: &CharacterPoint, r: &PadicNumber) -> Result<PadicNumber> {
    if let Coordinate::Weight(k) = kappa.coord {
        if !r.is_unit() {
            return Err(Error::Domain(format!("{r} is not a unit")));
        }
        return r.pow_i64(k);
    }
    let Coordinate::Disk(z) = &kappa.coord else { unreachable!() };
    let t = r.tower().clone();
    require_unramified(&t)?;
    let n = r.precision();
    let (v, u) = decompose_unit(r)?;
    let z = z.embed_into(&t)?.reduce(n);
    let c = log_over_p(&u, n + binomial_loss(&t, terms_for(&z, n)))?;
    let omega = binomial_eval(&c, &z)?;
    Ok((&(&v.pow(kappa.t) * &u.pow(kappa.s)) * &omega).reduce(n))
}

/// L(α, T, κ) = ∏ 1/(1 − κ(α_x̄) T^{deg x̄}) mod T^{D+1}.
pub fn twisted_l<F>(scheme: &BaseScheme, d: usize, kappa: &CharacterPoint, alpha: F) -> Result<TruncatedSeries>
where
    F: Fn(&ClosedPoint) -> Result<PadicNumber> + Sync,
{
    euler_product_with(scheme, d, |pt| {
        let a = alpha(pt)?;
        let w = eval_character(kappa, &a)?;
        let t = w.tower().clone();
        spread(&[PadicNumber::one(&t, w.precision()), -&w], pt.degree(), d, &t, w.precision())
    })
}

/// Unit-root fibre α_x̄ = (M_x̄)_{i₀i₀} of a standard matrix, in R.
pub fn unit_root_fibre(m: &SigmaMatrix, pt: &ClosedPoint) -> Result<PadicNumber> {
    crate::limiting::corner_fibre(m, pt, m.tower())
}

/// ξ^{tk}·μ^{sk}·(1+U)^{k·log(μ)/p} to precision n, the k-th power of a
/// fibre factor of H. α must be known to n + u_guard(du) digits.
fn weight_factor(alpha: &PadicNumber, s: u64, t: u64, k: u64, du: usize, n: u32) -> Result<Vec<PadicNumber>> {
    let (xi, mu) = decompose_unit(alpha)?;
    let tw = alpha.tower().clone();
    let c = log_over_p(&mu, n + binomial_loss(&tw, du))?;
    let kc = &c * &PadicNumber::from_i64(&tw, c.precision(), k as i64);
    let scal = (&xi.pow(t * k) * &mu.pow(s * k)).reduce(n);
    Ok(binomial_series(&kc, du)?.iter().map(|b| &b.reduce(n) * &scal).collect())
}

/// Extra digits a fibre needs so that U-series coefficients up to U^du come
/// out correct.
pub fn u_guard(t: &Tower, du: usize) -> u32 {
    binomial_loss(t, du) + t.e() as u32
}

/// H(T, U) = ∏ 1/(1 − ξ^t μ^s (1+U)^{log(μ)/p} T^{deg x̄}).
pub fn two_variable_l(m: &SigmaMatrix, s: u64, t: u64, d: usize, du: usize) -> Result<TruncatedSeries> {
    let tower = m.tower().clone();
    require_unramified(&tower)?;
    let n = m.precision();
    let mw = m.with_precision(n + u_guard(&tower, du))?;
    euler_product_with(&m.scheme(), d, |pt| {
        let w = weight_factor(&unit_root_fibre(&mw, pt)?, s, t, 1, du, n)?;
        let zero = PadicNumber::zero(&tower, n);
        let mut rows = vec![vec![zero.clone(); du + 1]; d + 1];
        rows[0][0] = PadicNumber::one(&tower, n);
        if pt.degree() <= d {
            rows[pt.degree()] = w.iter().map(|c| -c).collect();
        }
        TruncatedSeries::from_tu_coeffs(rows)
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwoVariableReport {
    pub s: u64,
    pub t: u64,
    pub y: String,
    pub degree: usize,
    pub u_precision: usize,
    pub precision: u32,
    pub substituted: Vec<String>,
    pub twisted: Vec<String>,
    pub equal: bool,
    pub first_difference: Option<usize>,
}

/// H(T, ι(y)) against L(ξ^t μ^s μ^y, T).
pub fn verify_two_variable(m: &SigmaMatrix, s: u64, t: u64, y: &PadicNumber, d: usize, du: usize) -> Result<TwoVariableReport> {
    let n = m.precision();
    let h = two_variable_l(m, s, t, d, du)?;
    let kappa = CharacterPoint::from_iota(m.tower(), s, t, y)?;
    let Coordinate::Disk(z) = &kappa.coord else { unreachable!() };
    let lhs = h.substitute_u(z)?.reduce(n);
    let rhs = twisted_l(&m.scheme(), d, &kappa, |pt| unit_root_fibre(m, pt))?.reduce(n);
    let diff = lhs.first_difference(&rhs, n).map(|(i, _)| i);
    Ok(TwoVariableReport {
        s,
        t,
        y: y.to_string(),
        degree: d,
        u_precision: du,
        precision: n,
        substituted: lhs.coefficient_strings(),
        twisted: rhs.coefficient_strings(),
        equal: diff.is_none(),
        first_difference: diff,
    })
}

/// g_1 … g_{m_max} with H = exp(Σ g_m T^m/m), i.e.
/// g_m = Σ_{d|m} d·Σ_{deg x̄ = d} w_x̄^{m/d}, as U-series of length du + 1.
pub fn g_coefficients(m: &SigmaMatrix, s: u64, t: u64, m_max: usize, du: usize) -> Result<Vec<Vec<PadicNumber>>> {
    use rayon::prelude::*;
    let tower = m.tower().clone();
    require_unramified(&tower)?;
    let n = m.precision();
    let mw = m.with_precision(n + u_guard(&tower, du))?;
    let points = enumerate_closed_points(&m.scheme(), m_max)?;
    let contributions: Vec<Vec<(usize, Vec<PadicNumber>)>> = points
        .par_iter()
        .map(|pt| {
            let a = unit_root_fibre(&mw, pt)?;
            let d = pt.degree();
            (1..=m_max / d)
                .map(|k| {
                    let w = weight_factor(&a, s, t, k as u64, du, n)?;
                    let dd = PadicNumber::from_i64(&tower, n, d as i64);
                    Ok((d * k, w.iter().map(|c| c * &dd).collect()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut g = vec![vec![PadicNumber::zero(&tower, n); du + 1]; m_max];
    for contrib in contributions {
        for (mm, w) in contrib {
            for (slot, c) in g[mm - 1].iter_mut().zip(&w) {
                *slot = &*slot + c;
            }
        }
    }
    Ok(g)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightCheck {
    pub binomial_identity: bool,
    pub unit_pow_route: bool,
    pub integer_weight: bool,
}

/// The three pointwise consistency checks at (x, y, k):
/// (1+ι(y))^x = exp(p·x·y) by the binomial series; κ_{(0,0,ι(y))}(r) = u(r)^y;
/// κ_k(r) = r·r·…·r (|k| factors, inverted for k < 0).
pub fn weight_checks(x: &PadicNumber, y: &PadicNumber, r: &PadicNumber, k: i64) -> Result<WeightCheck> {
    let t = x.tower().clone();
    let n = x.precision().min(y.precision()).min(r.precision());
    let p = PadicNumber::from_i64(&t, n, t.p() as i64);
    let z = iota(y)?;
    let lhs = binomial_eval(x, &z)?;
    let rhs = p_exp(&(&(&p * x) * y))?;
    let binomial_identity = lhs.eq_mod(&rhs, n);

    let kappa = CharacterPoint::disk(&t, 0, 0, z)?;
    let (_, u) = decompose_unit(r)?;
    let unit_pow_route = eval_character(&kappa, r)?.eq_mod(&crate::padic::unit_pow(&u, y)?, n);

    let shortcut = eval_character(&CharacterPoint::weight(&t, k)?, r)?;
    let mut rep = PadicNumber::one(&t, n);
    for _ in 0..k.unsigned_abs() {
        rep = &rep * r;
    }
    if k < 0 {
        rep = rep.inverse()?;
    }
    let mut integer_weight = shortcut.eq_mod(&rep, n);
    let (s, tt) = kappa_component(&t, k)?;
    let shifted = PadicNumber::from_i64(&t, n, k - s as i64);
    if let Ok(zk) = iota(&shifted) {
        let disk = CharacterPoint::disk(&t, s, tt, zk)?;
        integer_weight &= eval_character(&disk, r)?.eq_mod(&rep, n);
    }
    Ok(WeightCheck { binomial_identity, unit_pow_route, integer_weight })
}

fn kappa_component(t: &Tower, k: i64) -> Result<(u64, u64)> {
    let c = CharacterPoint::weight(t, k)?;
    Ok((c.s, c.t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::builtin;

    #[test]
    fn binomials() {
        let t = Tower::qp(3).unwrap();
        let c = PadicNumber::from_i64(&t, 8, 5);
        let b = binomial_series(&c, 6).unwrap();
        assert_eq!(b[0].precision(), 6);
        let want = [1, 5, 10, 10, 5, 1, 0];
        for (x, w) in b.iter().zip(want) {
            assert_eq!(*x, PadicNumber::from_i64(&t, 6, w));
        }
        let neg = binomial_series(&PadicNumber::from_i64(&t, 7, -1), 4).unwrap();
        assert!(neg.iter().enumerate().all(|(k, x)| *x == PadicNumber::from_i64(&t, 6, if k % 2 == 0 { 1 } else { -1 })));
    }

    #[test]
    fn iota_examples() {
        let t = Tower::qp(3).unwrap();
        assert!(iota(&PadicNumber::zero(&t, 8)).unwrap().is_zero());
        let z = iota(&PadicNumber::from_i64(&t, 8, 3)).unwrap();
        assert_eq!(z.ord_pi(), Some(2));
        let t2 = Tower::qp(2).unwrap();
        assert!(iota(&PadicNumber::from_i64(&t2, 8, 1)).is_err());
        assert_eq!(iota(&PadicNumber::from_i64(&t2, 8, 2)).unwrap().ord_pi(), Some(2));
    }

    #[test]
    fn m_for_qp() {
        for p in [2, 3, 5] {
            let t = Tower::qp(p).unwrap();
            assert_eq!(log_integrality_exponent(&t, 10).unwrap(), -1);
        }
        let t = Tower::qp(2).unwrap().with_residue_degree(2).unwrap();
        assert_eq!(log_integrality_exponent(&t, 10).unwrap(), -1);
    }

    #[test]
    fn decomposition() {
        let t = Tower::qp(3).unwrap();
        let r = PadicNumber::from_i64(&t, 8, 2);
        let (v, u) = decompose_unit(&r).unwrap();
        assert_eq!(&v * &u, r);
        assert_eq!(v.pow(2), PadicNumber::one(&t, 8));
        assert!(u.is_one_unit());
        let (v2, u2) = decompose_unit(&u).unwrap();
        assert_eq!(v2, PadicNumber::one(&t, 8));
        assert_eq!(u2, u);
        assert!(decompose_unit(&PadicNumber::from_i64(&t, 8, 3)).is_err());
    }

    #[test]
    fn q2_components() {
        let t = Tower::qp(2).unwrap();
        assert_eq!(components(&t).unwrap().len(), 2);
        let t4 = t.with_residue_degree(2).unwrap();
        assert_eq!(components(&t4).unwrap().len(), 2 * 3);
        assert_eq!(components(&Tower::qp(5).unwrap()).unwrap().len(), 4);
    }

    #[test]
    fn trivial_character() {
        let t = Tower::qp(3).unwrap();
        let k = CharacterPoint::trivial(&t, 8);
        for r in [1, 2, 4, 5, 7] {
            assert_eq!(eval_character(&k, &PadicNumber::from_i64(&t, 8, r)).unwrap(), PadicNumber::one(&t, 8));
        }
    }

    #[test]
    fn h_at_zero_is_twisted_at_zero() {
        let m = builtin("rank2-gm", 2, 5).unwrap();
        let h = two_variable_l(&m, 0, 0, 3, 0).unwrap();
        let k = CharacterPoint::trivial(m.tower(), 5);
        let l = twisted_l(&m.scheme(), 3, &k, |pt| unit_root_fibre(&m, pt)).unwrap();
        assert_eq!(h.substitute_u(&PadicNumber::zero(m.tower(), 5)).unwrap().t_coeffs(), l.t_coeffs());
    }
}
