//! Truncated power series in T, optionally in a second variable U, plus
//! Newton polygons, the |·|_c norms and dlog/exp plumbing.

use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::LaurentElement;
use crate::padic::{v_p_factorial, PadicNumber, SerializedPadic, Tower, Valuation};

/// Dense coefficients c_{i,j} of T^i U^j for i ≤ t_order, j ≤ u_order.
/// One-variable series have u_order = 0 and `has_u` unset.
#[derive(Clone, PartialEq, Debug)]
pub struct TruncatedSeries {
    t_order: usize,
    u_order: usize,
    has_u: bool,
    coeffs: Vec<PadicNumber>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerializedSeries {
    pub t_order: usize,
    pub u_order: Option<usize>,
    pub terms: Vec<(Vec<usize>, SerializedPadic)>,
}

impl TruncatedSeries {
    pub fn from_t_coeffs(coeffs: Vec<PadicNumber>) -> Result<TruncatedSeries> {
        if coeffs.is_empty() {
            return Err(Error::Shape("a series needs at least its constant term".into()));
        }
        Ok(TruncatedSeries { t_order: coeffs.len() - 1, u_order: 0, has_u: false, coeffs })
    }

    /// Coefficients indexed [i][j] for T^i U^j.
    pub fn from_tu_coeffs(coeffs: Vec<Vec<PadicNumber>>) -> Result<TruncatedSeries> {
        let du = coeffs.first().map(|r| r.len()).unwrap_or(0);
        if du == 0 || coeffs.iter().any(|r| r.len() != du) {
            return Err(Error::Shape("ragged two-variable coefficient table".into()));
        }
        Ok(TruncatedSeries { t_order: coeffs.len() - 1, u_order: du - 1, has_u: true, coeffs: coeffs.into_iter().flatten().collect() })
    }

    pub fn one(tower: &Arc<Tower>, prec: u32, t_order: usize) -> TruncatedSeries {
        let mut c = vec![PadicNumber::zero(tower, prec); t_order + 1];
        c[0] = PadicNumber::one(tower, prec);
        TruncatedSeries { t_order, u_order: 0, has_u: false, coeffs: c }
    }

    pub fn one_tu(tower: &Arc<Tower>, prec: u32, t_order: usize, u_order: usize) -> TruncatedSeries {
        let mut c = vec![PadicNumber::zero(tower, prec); (t_order + 1) * (u_order + 1)];
        c[0] = PadicNumber::one(tower, prec);
        TruncatedSeries { t_order, u_order, has_u: true, coeffs: c }
    }

    /// A U-series, viewed as constant in T.
    pub fn u_series(coeffs: Vec<PadicNumber>, t_order: usize) -> Result<TruncatedSeries> {
        let proto = coeffs.first().ok_or_else(|| Error::Shape("empty U-series".into()))?.clone();
        let zero = PadicNumber::zero(proto.tower(), proto.precision());
        let du = coeffs.len();
        let mut rows = vec![coeffs];
        for _ in 0..t_order {
            rows.push(vec![zero.clone(); du]);
        }
        TruncatedSeries::from_tu_coeffs(rows)
    }

    pub fn t_order(&self) -> usize {
        self.t_order
    }
    pub fn u_order(&self) -> Option<usize> {
        self.has_u.then_some(self.u_order)
    }
    pub fn tower(&self) -> &Arc<Tower> {
        self.coeffs[0].tower()
    }
    pub fn precision(&self) -> u32 {
        self.coeffs.iter().map(|c| c.precision()).min().unwrap_or(0)
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.u_order + 1) + j
    }

    pub fn coeff(&self, i: usize, j: usize) -> &PadicNumber {
        &self.coeffs[self.idx(i, j)]
    }

    pub fn t_coeff(&self, i: usize) -> &PadicNumber {
        self.coeff(i, 0)
    }

    pub fn t_coeffs(&self) -> Vec<PadicNumber> {
        (0..=self.t_order).map(|i| self.coeff(i, 0).clone()).collect()
    }

    /// The U-series coefficient of T^i.
    pub fn u_row(&self, i: usize) -> Vec<PadicNumber> {
        (0..=self.u_order).map(|j| self.coeff(i, j).clone()).collect()
    }

    pub fn truncate(&self, t_order: usize, u_order: usize) -> TruncatedSeries {
        let t = t_order.min(self.t_order);
        let u = if self.has_u { u_order.min(self.u_order) } else { 0 };
        let mut c = Vec::with_capacity((t + 1) * (u + 1));
        for i in 0..=t {
            for j in 0..=u {
                c.push(self.coeff(i, j).clone());
            }
        }
        TruncatedSeries { t_order: t, u_order: u, has_u: self.has_u, coeffs: c }
    }

    pub fn reduce(&self, prec: u32) -> TruncatedSeries {
        let mut out = self.clone();
        out.coeffs = out.coeffs.iter().map(|c| c.reduce(prec)).collect();
        out
    }

    pub fn with_precision(&self, prec: u32) -> Result<TruncatedSeries> {
        let mut out = self.clone();
        out.coeffs = out.coeffs.iter().map(|c| c.with_precision(prec)).collect::<Result<_>>()?;
        Ok(out)
    }

    fn common_shape(&self, other: &TruncatedSeries) -> (usize, usize, bool) {
        let has_u = self.has_u || other.has_u;
        let u = match (self.has_u, other.has_u) {
            (true, true) => self.u_order.min(other.u_order),
            (true, false) => self.u_order,
            (false, true) => other.u_order,
            (false, false) => 0,
        };
        (self.t_order.min(other.t_order), u, has_u)
    }

    fn get_or_zero(&self, i: usize, j: usize) -> PadicNumber {
        if i <= self.t_order && j <= self.u_order {
            self.coeff(i, j).clone()
        } else {
            PadicNumber::zero(self.tower(), self.coeffs[0].precision())
        }
    }

    pub fn add(&self, other: &TruncatedSeries) -> TruncatedSeries {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &TruncatedSeries) -> TruncatedSeries {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &TruncatedSeries, f: impl Fn(&PadicNumber, &PadicNumber) -> PadicNumber) -> TruncatedSeries {
        let (t, u, has_u) = self.common_shape(other);
        let mut c = Vec::with_capacity((t + 1) * (u + 1));
        for i in 0..=t {
            for j in 0..=u {
                c.push(f(&self.get_or_zero(i, j), &other.get_or_zero(i, j)));
            }
        }
        TruncatedSeries { t_order: t, u_order: u, has_u, coeffs: c }
    }

    pub fn mul(&self, other: &TruncatedSeries) -> TruncatedSeries {
        let (t, u, has_u) = self.common_shape(other);
        let prec = self.precision().min(other.precision());
        let zero = PadicNumber::zero(self.tower(), prec);
        let mut c = vec![zero; (t + 1) * (u + 1)];
        let su = if self.has_u { self.u_order } else { 0 };
        let ou = if other.has_u { other.u_order } else { 0 };
        for i1 in 0..=t {
            for j1 in 0..=su.min(u) {
                let a = self.coeff(i1, j1);
                if a.is_zero() {
                    continue;
                }
                for i2 in 0..=(t - i1) {
                    for j2 in 0..=ou.min(u - j1) {
                        let b = other.coeff(i2, j2);
                        if b.is_zero() {
                            continue;
                        }
                        let k = (i1 + i2) * (u + 1) + j1 + j2;
                        c[k] = &c[k] + &(a * b);
                    }
                }
            }
        }
        TruncatedSeries { t_order: t, u_order: u, has_u, coeffs: c }
    }

    pub fn scale(&self, s: &PadicNumber) -> TruncatedSeries {
        let mut out = self.clone();
        out.coeffs = out.coeffs.iter().map(|c| c * s).collect();
        out
    }

    /// Inverse when the constant term is a unit.
    pub fn inverse(&self) -> Result<TruncatedSeries> {
        let c0 = self.coeff(0, 0);
        let inv0 = c0.inverse().map_err(|_| Error::Domain("series with non-unit constant term is not invertible".into()))?;
        let (t, u) = (self.t_order, self.u_order);
        let prec = self.precision();
        let zero = PadicNumber::zero(self.tower(), prec);
        let mut out = TruncatedSeries { t_order: t, u_order: u, has_u: self.has_u, coeffs: vec![zero.clone(); (t + 1) * (u + 1)] };
        for i in 0..=t {
            for j in 0..=u {
                let mut acc = if i == 0 && j == 0 { PadicNumber::one(self.tower(), prec) } else { zero.clone() };
                for i2 in 0..=i {
                    for j2 in 0..=j {
                        if i2 == i && j2 == j {
                            continue;
                        }
                        let a = self.coeff(i - i2, j - j2);
                        if !a.is_zero() {
                            acc = &acc - &(a * out.coeff(i2, j2));
                        }
                    }
                }
                let k = out.idx(i, j);
                out.coeffs[k] = &acc * &inv0;
            }
        }
        Ok(out)
    }

    pub fn pow_i64(&self, e: i64) -> Result<TruncatedSeries> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc = TruncatedSeries { coeffs: vec![], ..base.clone() };
        acc.coeffs = (0..base.coeffs.len())
            .map(|k| if k == 0 { PadicNumber::one(base.tower(), base.precision()) } else { PadicNumber::zero(base.tower(), base.precision()) })
            .collect();
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    /// Substitutes T ↦ T^d, keeping the truncation order.
    pub fn substitute_t_power(&self, d: usize) -> TruncatedSeries {
        let zero = PadicNumber::zero(self.tower(), self.precision());
        let mut out = TruncatedSeries { coeffs: vec![zero; self.coeffs.len()], ..self.clone() };
        for i in 0..=self.t_order / d {
            for j in 0..=self.u_order {
                let k = out.idx(i * d, j);
                out.coeffs[k] = self.coeff(i, j).clone();
            }
        }
        out
    }

    /// Evaluates the U-variable at z (ord_π z > 0), giving a series in T.
    pub fn substitute_u(&self, z: &PadicNumber) -> Result<TruncatedSeries> {
        if !self.has_u {
            return Ok(self.clone());
        }
        let target = z.tower().clone();
        let prec = self.precision().min(z.precision());
        let mut zp = vec![PadicNumber::one(&target, prec)];
        for j in 1..=self.u_order {
            let next = &zp[j - 1] * z;
            zp.push(next);
        }
        let mut c = Vec::with_capacity(self.t_order + 1);
        for i in 0..=self.t_order {
            let mut acc = PadicNumber::zero(&target, prec);
            for (j, zj) in zp.iter().enumerate() {
                acc = &acc + &(&self.coeff(i, j).embed_into(&target)?.reduce(prec) * zj);
            }
            c.push(acc);
        }
        TruncatedSeries::from_t_coeffs(c)
    }

    pub fn embed_into(&self, target: &Arc<Tower>) -> Result<TruncatedSeries> {
        let mut out = self.clone();
        out.coeffs = self.coeffs.iter().map(|c| c.embed_into(target)).collect::<Result<_>>()?;
        Ok(out)
    }

    /// Equality of all coefficients of T-degree ≤ t_max modulo π^n.
    pub fn eq_mod(&self, other: &TruncatedSeries, t_max: usize, n: u32) -> bool {
        let u = self.u_order.min(other.u_order);
        (0..=t_max.min(self.t_order).min(other.t_order)).all(|i| (0..=u).all(|j| self.coeff(i, j).eq_mod(other.coeff(i, j), n)))
    }

    /// First (i, j) at which the two series differ modulo π^n.
    pub fn first_difference(&self, other: &TruncatedSeries, n: u32) -> Option<(usize, usize)> {
        let u = self.u_order.min(other.u_order);
        for i in 0..=self.t_order.min(other.t_order) {
            for j in 0..=u {
                if !self.coeff(i, j).eq_mod(other.coeff(i, j), n) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn serialize(&self) -> SerializedSeries {
        let mut terms = Vec::new();
        for i in 0..=self.t_order {
            for j in 0..=self.u_order {
                let c = self.coeff(i, j);
                if !c.is_zero() {
                    let exps = if self.has_u { vec![i, j] } else { vec![i] };
                    terms.push((exps, c.serialize()));
                }
            }
        }
        SerializedSeries { t_order: self.t_order, u_order: self.u_order(), terms }
    }

    pub fn deserialize(s: &SerializedSeries, tower: &Arc<Tower>, prec: u32) -> Result<TruncatedSeries> {
        let u = s.u_order.unwrap_or(0);
        let zero = PadicNumber::zero(tower, prec);
        let mut out =
            TruncatedSeries { t_order: s.t_order, u_order: u, has_u: s.u_order.is_some(), coeffs: vec![zero; (s.t_order + 1) * (u + 1)] };
        for (exps, c) in &s.terms {
            let (i, j) = (exps[0], exps.get(1).copied().unwrap_or(0));
            if i > s.t_order || j > u {
                return Err(Error::Parse(format!("term T^{i} U^{j} beyond truncation")));
            }
            let k = out.idx(i, j);
            out.coeffs[k] = PadicNumber::deserialize(c)?;
        }
        Ok(out)
    }

    /// Coefficients as display strings, T-major.
    pub fn coefficient_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }
}

/// The sequence c with c_0 = 1 and k·c_k = sign·Σ_{i=1}^k s_i c_{k−i}.
/// sign = +1 recovers L from T dlog L = Σ s_m T^m; sign = −1 gives
/// det(1 − AT) from the power sums s_m = Tr(A^m).
fn newton_recurrence(s: &[PadicNumber], d: usize, sign: i64) -> Result<Vec<PadicNumber>> {
    if s.len() < d {
        return Err(Error::Shape(format!("need {d} power sums, got {}", s.len())));
    }
    let tower = s.first().map(|x| x.tower().clone());
    let Some(tower) = tower else {
        return Err(Error::Shape("no power sums supplied".into()));
    };
    let prec = s.iter().take(d).map(|x| x.precision()).min().unwrap_or(0);
    let mut c = vec![PadicNumber::one(&tower, prec)];
    for k in 1..=d {
        let mut acc = PadicNumber::zero(&tower, prec);
        for i in 1..=k {
            acc = &acc + &(&s[i - 1] * &c[k - i]);
        }
        if sign < 0 {
            acc = -&acc;
        }
        let ck = acc.div_int(k as u64).map_err(|e| match e {
            Error::Domain(m) => Error::Precision(format!("coefficient {k}: {m}")),
            other => other,
        })?;
        c.push(ck);
    }
    let low = c.iter().map(|x| x.precision()).min().unwrap_or(prec);
    Ok(c.iter().map(|x| x.reduce(low)).collect())
}

/// The series L with L(0) = 1 and T·L′/L ≡ Σ K_m T^m mod T^{D+1}.
/// Loses up to e·v_p(D!) digits of precision.
pub fn series_from_dlog(k: &[PadicNumber], d: usize) -> Result<TruncatedSeries> {
    TruncatedSeries::from_t_coeffs(newton_recurrence(k, d, 1)?)
}

/// det(1 − A·T) from s_m = Tr(A^m).
pub fn det_from_power_sums(s: &[PadicNumber], d: usize) -> Result<TruncatedSeries> {
    TruncatedSeries::from_t_coeffs(newton_recurrence(s, d, -1)?)
}

/// K_m with T·L′/L = Σ K_m T^m (inverse of `series_from_dlog`; no division).
pub fn dlog_coefficients(l: &TruncatedSeries) -> Result<Vec<PadicNumber>> {
    let c = l.t_coeffs();
    if !c[0].is_one_unit() || c[0] != PadicNumber::one(c[0].tower(), c[0].precision()) {
        return Err(Error::Domain("dlog needs constant term 1".into()));
    }
    let mut k: Vec<PadicNumber> = Vec::with_capacity(c.len());
    for m in 1..c.len() {
        // m c_m = Σ_{i=1}^m K_i c_{m−i}
        let mut acc = &c[m] * &PadicNumber::from_i64(c[m].tower(), c[m].precision(), m as i64);
        for i in 1..m {
            acc = &acc - &(&k[i - 1] * &c[m - i]);
        }
        k.push(acc);
    }
    Ok(k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlopeNormalization {
    /// Slopes in ord_p.
    P,
    /// Slopes in ord_π.
    Pi,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slope {
    pub slope: Ratio<i64>,
    pub multiplicity: usize,
}

/// Lower convex hull of (i, ord(c_i)) for i ≤ up_to. Entries known only as
/// "≥ N" are treated as absent when no hull vertex can lie on them.
pub fn newton_polygon(coeffs: &[PadicNumber], up_to: usize, norm: SlopeNormalization) -> Result<Vec<Slope>> {
    let e = coeffs.first().map(|c| c.tower().e()).unwrap_or(1) as i64;
    let pts: Vec<(usize, Valuation)> = coeffs.iter().take(up_to + 1).map(|c| c.valuation()).enumerate().collect();
    let finite: Vec<(usize, i64)> = pts.iter().filter_map(|(i, v)| v.finite().map(|x| (*i, x as i64))).collect();
    if finite.first().map(|p| p.0) != Some(0) {
        return Err(Error::Precision("constant coefficient has sentinel valuation".into()));
    }
    if let Some((i, Valuation::AtLeast(n))) = pts.last() {
        if *i == up_to {
            return Err(Error::Precision(format!("end coefficient {i} vanishes mod π^{n}")));
        }
    }
    let last = finite.last().unwrap().0;
    let mut out = Vec::new();
    let mut cur = finite[0];
    while cur.0 < last {
        let mut best: Option<(usize, i64, Ratio<i64>)> = None;
        for &(j, v) in finite.iter().filter(|(j, _)| *j > cur.0) {
            let s = Ratio::new(v - cur.1, (j - cur.0) as i64);
            match best {
                Some((_, _, b)) if s > b => {}
                _ => best = Some((j, v, s)),
            }
        }
        let (j, v, s) = best.unwrap();
        // An unknown coefficient strictly inside this segment could undercut it.
        for (k, val) in &pts {
            if *k > cur.0 && *k < j {
                if let Valuation::AtLeast(n) = val {
                    let line = Ratio::from_integer(cur.1) + s * Ratio::from_integer((*k - cur.0) as i64);
                    if Ratio::from_integer(*n as i64) < line {
                        return Err(Error::Precision(format!("coefficient {k} is zero mod π^{n}, which does not settle the hull")));
                    }
                }
            }
        }
        let slope = match norm {
            SlopeNormalization::P => s / Ratio::from_integer(e),
            SlopeNormalization::Pi => s,
        };
        out.push(Slope { slope, multiplicity: j - cur.0 });
        cur = (j, v);
    }
    Ok(out)
}

/// The |·|_c log-norm max over the support of (−ord_π(a_α) + ⌊|α|/c⌋).
/// None for the zero element.
pub fn norm_c(g: &LaurentElement, c: u32) -> Result<Option<i64>> {
    if c == 0 {
        return Err(Error::Domain("norm index c must be positive".into()));
    }
    if !g.is_polynomial() {
        return Err(Error::Domain("the |·|_c norm is defined on polynomials".into()));
    }
    Ok(g.terms()
        .filter_map(|(e, a)| a.ord_pi().map(|o| (e.iter().sum::<i64>()).div_euclid(c as i64) - o as i64))
        .max())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvextRow {
    pub m: usize,
    /// min over ℓ of ord_p(β_{m,ℓ}) + 2m; None when every β_{m,ℓ} vanishes.
    pub margin: Option<Ratio<i64>>,
    /// The margin is only a lower bound when some coefficient vanished at the
    /// working precision.
    pub bounded_below_only: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvextReport {
    pub rows: Vec<ConvextRow>,
    pub worst_margin: Option<Ratio<i64>>,
}

/// Expands f = exp(−Σ g_m T^m/m) mod (T^{m_max+1}, U^{du+1}) and checks
/// ord_p(β_{m,ℓ}) ≥ −2m. Works with h_m = m!·f_m, which satisfies the
/// integral recurrence h_m = −Σ_k g_k·(m−1)!/(m−k)!·h_{m−k}.
pub fn convext_bound_check(g: &[Vec<PadicNumber>], m_max: usize, du: usize) -> Result<ConvextReport> {
    if g.len() < m_max {
        return Err(Error::Shape(format!("need g_1..g_{m_max}, got {}", g.len())));
    }
    let proto = g.first().and_then(|r| r.first()).ok_or_else(|| Error::Shape("empty input".into()))?;
    let tower = proto.tower().clone();
    let prec = g.iter().take(m_max).flat_map(|r| r.iter()).map(|c| c.precision()).min().unwrap_or(0);
    if g.iter().take(m_max).flat_map(|r| r.iter()).any(|c| c.ord_pi().is_none() && !c.is_zero()) {
        return Err(Error::Domain("g_m must be integral".into()));
    }
    let p = tower.p();
    let e = tower.e() as i64;
    let zero = PadicNumber::zero(&tower, prec);
    let pad = |r: &Vec<PadicNumber>| -> Vec<PadicNumber> { (0..=du).map(|l| r.get(l).cloned().unwrap_or_else(|| zero.clone()).reduce(prec)).collect() };
    let gs: Vec<Vec<PadicNumber>> = g.iter().take(m_max).map(pad).collect();
    let umul = |a: &[PadicNumber], b: &[PadicNumber]| -> Vec<PadicNumber> {
        let mut out = vec![zero.clone(); du + 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(du + 1 - i) {
                out[i + j] = &out[i + j] + &(x * y);
            }
        }
        out
    };
    let mut h: Vec<Vec<PadicNumber>> = vec![{
        let mut one = vec![zero.clone(); du + 1];
        one[0] = PadicNumber::one(&tower, prec);
        one
    }];
    let mut rows = Vec::new();
    let mut worst: Option<Ratio<i64>> = None;
    for m in 1..=m_max {
        let mut acc = vec![zero.clone(); du + 1];
        for k in 1..=m {
            let factor: i64 = ((m - k + 1)..m).map(|t| t as i64).product();
            let fac = PadicNumber::from_i64(&tower, prec, factor);
            let term = umul(&gs[k - 1], &h[m - k]);
            for (a, t) in acc.iter_mut().zip(term) {
                *a = &*a - &(&t * &fac);
            }
        }
        let vfact = Ratio::from_integer(v_p_factorial(m as u64, p) as i64);
        let floor = Ratio::from_integer(-2 * m as i64);
        let mut margin: Option<Ratio<i64>> = None;
        let lower_only = acc.iter().any(|c| c.is_zero());
        for (l, c) in acc.iter().enumerate() {
            let Some(o) = c.ord_pi() else { continue };
            let ordp = Ratio::new(o as i64, e) - vfact;
            if ordp < floor {
                return Err(Error::Assertion(format!("ord_p(β_{{{m},{l}}}) = {ordp} < {floor}")));
            }
            let mg = ordp - floor;
            margin = Some(margin.map_or(mg, |x| x.min(mg)));
        }
        if lower_only && Ratio::new(prec as i64, e) - vfact < floor {
            return Err(Error::Precision(format!("working precision {prec} cannot certify the bound at m = {m}")));
        }
        if let Some(mg) = margin {
            worst = Some(worst.map_or(mg, |w: Ratio<i64>| w.min(mg)));
        }
        rows.push(ConvextRow { m, margin, bounded_below_only: lower_only });
        h.push(acc);
    }
    Ok(ConvextReport { rows, worst_margin: worst })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(t: &Arc<Tower>, prec: u32, v: &[i64]) -> Vec<PadicNumber> {
        v.iter().map(|&x| PadicNumber::from_i64(t, prec, x)).collect()
    }

    #[test]
    fn dlog_of_square() {
        let t = Tower::qp(3).unwrap();
        let a = 2i64;
        let k: Vec<PadicNumber> = (1..=5).map(|m| PadicNumber::from_i64(&t, 10, -2 * a.pow(m))).collect();
        let l = series_from_dlog(&k, 4).unwrap();
        assert_eq!(l.t_coeffs(), ints(&t, l.precision(), &[1, -4, 4, 0, 0]).iter().map(|c| c.reduce(l.precision())).collect::<Vec<_>>());
    }

    #[test]
    fn kloosterman_dlog() {
        let t = Tower::qp(2).unwrap();
        let l = series_from_dlog(&ints(&t, 10, &[1, 3]), 2).unwrap();
        assert_eq!(l.t_coeffs(), ints(&t, l.precision(), &[1, 1, 2]));
    }

    #[test]
    fn slopes() {
        let t = Tower::qp(2).unwrap();
        let s = newton_polygon(&ints(&t, 8, &[1, 1, 2]), 2, SlopeNormalization::P).unwrap();
        assert_eq!(s, vec![Slope { slope: Ratio::from_integer(0), multiplicity: 1 }, Slope { slope: Ratio::from_integer(1), multiplicity: 1 }]);
        let s = newton_polygon(&ints(&t, 8, &[1, 1]), 1, SlopeNormalization::P).unwrap();
        assert_eq!(s.len(), 1);
        // 1 + 0·T + 4T²: the gap at T^1 is known to be ≥ 8, above the segment.
        let s = newton_polygon(&ints(&t, 8, &[1, 0, 4]), 2, SlopeNormalization::P).unwrap();
        assert_eq!(s, vec![Slope { slope: Ratio::from_integer(1), multiplicity: 2 }]);
        assert!(newton_polygon(&ints(&t, 2, &[1, 0, 1024]), 2, SlopeNormalization::P).is_err());
    }

    #[test]
    fn norm_examples() {
        let t = Tower::qp(2).unwrap();
        let one = LaurentElement::one(&t, 6, 1);
        assert_eq!(norm_c(&one, 3).unwrap(), Some(0));
        let x = LaurentElement::var(&t, 6, 1, 0);
        let g = x.pow(3).scale(&PadicNumber::from_i64(&t, 6, 2));
        assert_eq!(norm_c(&g, 3).unwrap(), Some(0));
    }

    #[test]
    fn inverse_and_substitution() {
        let t = Tower::qp(3).unwrap();
        let s = TruncatedSeries::from_tu_coeffs(vec![ints(&t, 8, &[1, 3]), ints(&t, 8, &[2, 0]), ints(&t, 8, &[0, 1])]).unwrap();
        let prod = s.mul(&s.inverse().unwrap());
        assert_eq!(prod, TruncatedSeries::one_tu(&t, 8, 2, 1));
        let z = PadicNumber::from_i64(&t, 8, 3);
        let sub = s.substitute_u(&z).unwrap();
        assert_eq!(sub.t_coeffs(), ints(&t, 8, &[10, 2, 3]));
    }

    #[test]
    fn convext_trivial_cases() {
        let t = Tower::qp(2).unwrap();
        let ones: Vec<Vec<PadicNumber>> = (0..6).map(|_| ints(&t, 12, &[1])).collect();
        let r = convext_bound_check(&ones, 6, 0).unwrap();
        // f = 1 − T: margins 2 at m = 1 and nothing beyond.
        assert_eq!(r.rows[0].margin, Some(Ratio::from_integer(2)));
        assert!(r.rows[1..].iter().all(|row| row.margin.is_none()));
    }
}
