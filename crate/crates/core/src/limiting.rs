//! Limiting-module matrices B^r(M), B^r_−(M) at finite truncation |q| ≤ Q,
//! their fibrewise counterparts, and the rank-one resolution identity.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{enumerate_closed_points, ClosedPoint};
use crate::laurent::LaurentElement;
use crate::linalg::{Matrix, Ring};
use crate::padic::{unit_pow_generic, PadicNumber, Tower};
use crate::series::TruncatedSeries;
use crate::sigma::{euler_l, euler_product_with, spread, SigmaMatrix};
use crate::weight::{binomial_series, iota, log_over_p, u_guard};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn apply(self, y: &PadicNumber) -> PadicNumber {
        match self {
            Sign::Plus => y.clone(),
            Sign::Minus => -y,
        }
    }
}

/// Exponent maps q: I₁ → N₀ with |q| ≤ Q in graded lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitingIndex {
    pub vars: usize,
    pub order: usize,
    pub indices: Vec<Vec<u32>>,
}

impl LimitingIndex {
    pub fn new(vars: usize, order: usize) -> LimitingIndex {
        let mut indices = Vec::new();
        for d in 0..=order {
            let mut level = Vec::new();
            compositions(vars, d as u32, &mut vec![], &mut level);
            level.sort_by(|a, b| b.cmp(a));
            indices.extend(level);
        }
        LimitingIndex { vars, order, indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn position(&self, q: &[u32]) -> Option<usize> {
        self.indices.iter().position(|x| x == q)
    }
}

fn compositions(vars: usize, total: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if cur.len() == vars {
        if total == 0 {
            out.push(cur.clone());
        }
        return;
    }
    if cur.len() + 1 == vars {
        cur.push(total);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for k in 0..=total {
        cur.push(k);
        compositions(vars, total - k, cur, out);
        cur.pop();
    }
}

/// Truncated power series in Z_{i'} (i' ∈ I₁) over a coefficient ring.
#[derive(Clone, Debug)]
struct ZSeries<T> {
    terms: BTreeMap<Vec<u32>, T>,
    order: usize,
}

impl<T: Ring> ZSeries<T> {
    fn constant(c: T, vars: usize, order: usize) -> ZSeries<T> {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0; vars], c);
        ZSeries { terms, order }
    }

    fn linear(c: T, coeffs: Vec<T>, order: usize) -> ZSeries<T> {
        let vars = coeffs.len();
        let mut s = ZSeries::constant(c, vars, order);
        for (i, a) in coeffs.into_iter().enumerate() {
            if !a.is_zero_r() && order >= 1 {
                let mut e = vec![0; vars];
                e[i] = 1;
                s.terms.insert(e, a);
            }
        }
        s
    }

    fn mul(&self, other: &ZSeries<T>) -> ZSeries<T> {
        let mut terms: BTreeMap<Vec<u32>, T> = BTreeMap::new();
        for (e1, a) in &self.terms {
            for (e2, b) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(x, y)| x + y).collect();
                if e.iter().sum::<u32>() as usize > self.order {
                    continue;
                }
                let prod = a.mul_r(b);
                match terms.get_mut(&e) {
                    Some(slot) => *slot = slot.add_r(&prod),
                    None => {
                        terms.insert(e, prod);
                    }
                }
            }
        }
        ZSeries { terms, order: self.order }
    }

    fn pow(&self, k: u32) -> ZSeries<T> {
        let proto = self.terms.values().next().expect("series has a constant term").one_like();
        let vars = self.terms.keys().next().map(|e| e.len()).unwrap_or(0);
        let mut acc = ZSeries::constant(proto, vars, self.order);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    fn coeff(&self, e: &[u32], zero: &T) -> T {
        self.terms.get(e).cloned().unwrap_or_else(|| zero.clone())
    }
}

fn unit_index(m_i0: Option<usize>) -> Result<usize> {
    m_i0.ok_or_else(|| Error::Flag("limiting modules need a distinguished unit index".into()))
}

/// The columns λ(a_{(i₀)})^{r−|q₂|}·∏ λ(a_{(i)})^{q₂(i)} (times a common
/// weight factor supplied by the caller) for a standard matrix over any ring.
fn limiting_columns<T: Ring>(
    a: &Matrix<T>,
    i0: usize,
    r: i64,
    index: &LimitingIndex,
    corner_pow: &dyn Fn(i64) -> Result<T>,
) -> Result<Matrix<T>> {
    let n = a.rows();
    let others: Vec<usize> = (0..n).filter(|&i| i != i0).collect();
    let order = index.order;
    let zero = a.proto().zero_like();
    let lambdas: Vec<ZSeries<T>> = others
        .iter()
        .map(|&i| ZSeries::linear(a.get(i0, i).clone(), others.iter().map(|&ip| a.get(ip, i).clone()).collect(), order))
        .collect();
    let mut cols: Vec<Vec<T>> = Vec::with_capacity(index.len());
    for q2 in &index.indices {
        let size: u32 = q2.iter().sum();
        let c = corner_pow(r - size as i64)?;
        let mut s = ZSeries::constant(c, others.len(), order);
        for (k, &e) in q2.iter().enumerate() {
            if e > 0 {
                s = s.mul(&lambdas[k].pow(e));
            }
        }
        cols.push(index.indices.iter().map(|q1| s.coeff(q1, &zero)).collect());
    }
    Ok(Matrix::from_fn(index.len(), index.len(), |i, j| cols[j][i].clone()))
}

/// Checks ord_p(y) > 1/(p−1) − μ with μ = ord_p(a_{i₀i₀} − 1). The boundary
/// μ = 1/(p−1) is accepted with any ord_p(y) > 0.
pub fn check_disk(m: &SigmaMatrix, y: &PadicNumber) -> Result<()> {
    if y.is_zero() {
        return Ok(());
    }
    let i0 = unit_index(m.i0())?;
    let t = m.tower();
    let e = t.e() as i64;
    let one = LaurentElement::one(t, m.precision(), m.scheme().n);
    let mu = match (m.entry(i0, i0) - &one).min_ord_pi() {
        Some(o) => Ratio::new(o as i64, e),
        None => return Ok(()),
    };
    let nu = Ratio::new(y.ord_pi().unwrap_or(0) as i64, e);
    let bound = Ratio::new(1, t.p() as i64 - 1) - mu;
    if nu > bound {
        Ok(())
    } else {
        Err(Error::Domain(format!("ord_p(y) = {nu} must exceed 1/(p-1) - mu = {bound}")))
    }
}

/// B^r(M) (sign +) or B^r_−(M) (sign −) with V specialized to y, on the
/// index set |q| ≤ Q. Column q₂ has min ord_π ≥ |q₂|; this is asserted.
pub fn build_limiting(m: &SigmaMatrix, r: i64, sign: Sign, y: &PadicNumber, order: usize) -> Result<SigmaMatrix> {
    let flags = m.flags();
    if !flags.standard_normal || !flags.one_normal {
        return Err(Error::Flag("build_limiting needs a standard 1-normal matrix".into()));
    }
    let i0 = unit_index(m.i0())?;
    check_disk(m, y)?;
    let corner = m.entry(i0, i0).clone();
    let weight = if y.is_zero() { LaurentElement::one(m.tower(), m.precision(), m.scheme().n) } else { unit_pow_generic(&corner, &sign.apply(y))? };
    let index = LimitingIndex::new(m.rank() - 1, order);
    let corner_pow = |k: i64| -> Result<LaurentElement> { Ok(&weight * &corner.pow_i64(k)?) };
    let b = limiting_columns(m.matrix(), i0, r, &index, &corner_pow)?;
    for (j, q2) in index.indices.iter().enumerate() {
        let need: u32 = q2.iter().sum();
        for i in 0..index.len() {
            if let Some(o) = b.get(i, j).min_ord_pi() {
                if o < need {
                    return Err(Error::Certificate(format!("column {q2:?} has ord_π {o} < |q| = {need}")));
                }
            }
        }
    }
    SigmaMatrix::new(m.scheme(), b, Some(0))
}

/// η = (1+U)^{±log(a)/p} for a 1-unit a, as a U-series of length du + 1
/// good to n digits; a must carry n + u_guard(du) digits.
pub fn eta_series(a: &PadicNumber, sign: Sign, du: usize, n: u32) -> Result<Vec<PadicNumber>> {
    let t = a.tower();
    if t.e() != 1 {
        return Err(Error::Unsupported("the formal-group weight factor is implemented over unramified K".into()));
    }
    let c = log_over_p(a, n + crate::weight::binomial_loss(t, du))?;
    Ok(binomial_series(&sign.apply(&c), du)?.into_iter().map(|b| b.reduce(n)).collect())
}

/// U-series matrix produced by `fibre_limiting_series`.
#[derive(Clone, Debug)]
pub struct SeriesMatrix {
    pub size: usize,
    pub entries: Vec<TruncatedSeries>,
}

impl SeriesMatrix {
    pub fn get(&self, i: usize, j: usize) -> &TruncatedSeries {
        &self.entries[i * self.size + j]
    }

    /// Substitutes U = z entrywise.
    pub fn at(&self, z: &PadicNumber) -> Result<Matrix<PadicNumber>> {
        let vals: Vec<PadicNumber> = self.entries.iter().map(|s| s.substitute_u(z).map(|t| t.t_coeff(0).clone())).collect::<Result<_>>()?;
        Ok(Matrix::from_fn(self.size, self.size, |i, j| vals[i * self.size + j].clone()))
    }
}

/// b^{(r),x̄}_{(q₂)} = η·λ(a₀ˣ)^{r−|q₂|}·∏ λ(a_iˣ)^{q₂(i)} for a standard fibre
/// matrix with 1-unit corner, good to n digits. The fibre must carry
/// n + u_guard(du) digits.
pub fn fibre_limiting_series(mx: &Matrix<PadicNumber>, i0: usize, r: i64, sign: Sign, order: usize, du: usize, n: u32) -> Result<SeriesMatrix> {
    let rank = mx.rows();
    if (0..rank).any(|i| i != i0 && !mx.get(i, i0).is_zero()) {
        return Err(Error::Flag("fibre matrix is not standard".into()));
    }
    let corner = mx.get(i0, i0).clone();
    if !corner.is_one_unit() {
        return Err(Error::Flag("fibre corner is not a 1-unit".into()));
    }
    let eta = eta_series(&corner, sign, du, n)?;
    let index = LimitingIndex::new(rank - 1, order);
    let corner_pow = |k: i64| corner.pow_i64(k);
    let b = limiting_columns(mx, i0, r, &index, &corner_pow)?;
    let eta = TruncatedSeries::u_series(eta, 0)?;
    let entries = b.entries().map(|c| eta.scale(&c.reduce(n))).collect();
    Ok(SeriesMatrix { size: index.len(), entries })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CommutationReport {
    pub points: usize,
    pub max_degree: usize,
    pub precision: u32,
    pub equal: bool,
    pub witness: Option<String>,
}

/// fibre_limiting at U = ι(y) against the fibre of build_limiting, over all
/// closed points of degree ≤ max_degree.
pub fn verify_fibre_commutation(m: &SigmaMatrix, r: i64, sign: Sign, y: &PadicNumber, order: usize, max_degree: usize) -> Result<CommutationReport> {
    let i0 = unit_index(m.i0())?;
    let n = m.precision();
    let b = build_limiting(m, r, sign, y, order)?;
    let du = n as usize;
    let mw = m.with_precision(n + u_guard(m.tower(), du))?;
    let points = enumerate_closed_points(&m.scheme(), max_degree)?;
    let mut witness = None;
    for pt in &points {
        let tower = m.tower().with_residue_degree(pt.degree())?;
        let lhs_series = fibre_limiting_series(&mw.fibre_in(pt, &tower)?, i0, r, sign, order, du, n)?;
        let z = iota(y)?.embed_into(&tower)?;
        let lhs = lhs_series.at(&z)?;
        let rhs = b.fibre_in(pt, &tower)?;
        if !lhs.eq_mod(&rhs, n) {
            witness = Some(format!("point {pt}"));
            break;
        }
    }
    Ok(CommutationReport { points: points.len(), max_degree, precision: n, equal: witness.is_none(), witness })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Rk1resReport {
    pub s: i64,
    pub y: String,
    pub sign: Sign,
    pub order: usize,
    pub degree: usize,
    pub precision: u32,
    pub lhs: Vec<String>,
    pub rhs: Vec<String>,
    pub equal: bool,
    pub first_difference: Option<usize>,
}

/// Fibre of the unit-root corner, projected to R.
pub fn corner_fibre(m: &SigmaMatrix, pt: &ClosedPoint, base: &Arc<Tower>) -> Result<PadicNumber> {
    let i0 = unit_index(m.i0())?;
    let corner = SigmaMatrix::scalar(m.scheme(), m.entry(i0, i0).clone())?;
    let v = corner.fibre(pt)?.get(0, 0).clone();
    v.project_to_base(base).ok_or_else(|| Error::Integrality("unit-root fibre is not in R".into()))
}

/// L((M_unit)^s (M_unit)^{±y}) against ∏_r L(B^{s−r}_± ⊗ ∧^r M)^{(−1)^{r−1} r}.
pub fn verify_rk1res(m: &SigmaMatrix, s: i64, sign: Sign, y: &PadicNumber, d: usize, order: usize) -> Result<Rk1resReport> {
    let n = m.precision();
    let base = m.tower().clone();
    check_disk(m, y)?;
    let lhs = euler_product_with(&m.scheme(), d, |pt| {
        let a = corner_fibre(m, pt, &base)?;
        let w = if y.is_zero() { a.pow_i64(s)? } else { &a.pow_i64(s)? * &crate::padic::unit_pow(&a, &sign.apply(y))? };
        spread(&[PadicNumber::one(&base, n), -&w], pt.degree(), d, &base, n)
    })?;
    let factors: Vec<TruncatedSeries> = (1..=m.rank())
        .into_par_iter()
        .map(|r| -> Result<TruncatedSeries> {
            let b = build_limiting(m, s - r as i64, sign, y, order)?;
            let l = euler_l(&b.tensor(&m.wedge(r)?)?, &m.scheme(), d)?;
            let e = if r % 2 == 1 { r as i64 } else { -(r as i64) };
            l.pow_i64(e)
        })
        .collect::<Result<_>>()?;
    let mut rhs = factors[0].clone();
    for f in &factors[1..] {
        rhs = rhs.mul(f);
    }
    let rhs = rhs.reduce(n);
    let diff = lhs.first_difference(&rhs, n).map(|(i, _)| i);
    let strs = |s: &TruncatedSeries| s.t_coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>();
    Ok(Rk1resReport {
        s,
        y: y.to_string(),
        sign,
        order,
        degree: d,
        precision: n,
        lhs: strs(&lhs),
        rhs: strs(&rhs),
        equal: diff.is_none(),
        first_difference: diff,
    })
}
