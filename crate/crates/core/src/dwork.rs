//! Dwork operators on one-dimensional base schemes, truncated Fredholm
//! determinants and both sides of the trace formula.
//!
//! `theta_apply` is the trace operator on functions, x^m ↦ q·x^{m/q}. The
//! operators ψ act on forms: on 𝔾_m with basis dx/x this is x^m ↦ x^{m/q},
//! on 𝔸¹ with basis dx it is x^m ↦ x^{(m+1)/q − 1}. The two are related by
//! θ_fun = θ_form ∘ (D·).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{enumerate_closed_points, BaseScheme, SchemeKind};
use crate::laurent::LaurentElement;
use crate::linalg::Matrix;
use crate::padic::{v_p_factorial, PadicNumber};
use crate::series::{det_from_power_sums, TruncatedSeries};
use crate::sigma::{euler_l, SigmaMatrix};

fn check_curve(x: &BaseScheme) -> Result<()> {
    if x.n != 1 {
        return Err(Error::Unsupported(format!("Dwork operators are implemented for curves only, not {}", x.name())));
    }
    Ok(())
}

/// θ(x^m) = q·x^{m/q} when q | m, else 0.
pub fn theta_apply(a: &LaurentElement, x: &BaseScheme) -> Result<LaurentElement> {
    check_curve(x)?;
    let q = x.q as i64;
    let qc = PadicNumber::from_i64(a.tower(), a.precision(), q);
    Ok(a.map_exponents(|e| (e[0] % q == 0).then(|| vec![e[0] / q]), |c| c * &qc))
}

/// θ on one-forms, written in the basis dx/x (𝔾_m) or dx (𝔸¹).
pub fn theta_form(a: &LaurentElement, x: &BaseScheme) -> Result<LaurentElement> {
    check_curve(x)?;
    let q = x.q as i64;
    Ok(match x.kind {
        SchemeKind::Torus => a.map_exponents(|e| (e[0].rem_euclid(q) == 0).then(|| vec![e[0].div_euclid(q)]), |c| c.clone()),
        SchemeKind::AffineSpace => a.map_exponents(|e| ((e[0] + 1).rem_euclid(q) == 0).then(|| vec![(e[0] + 1).div_euclid(q) - 1]), |c| c.clone()),
    })
}

/// The 1×1 matrix of σ on Ω¹: q for dx/x, q·x^{q−1} for dx.
pub fn frobenius_form(m: &SigmaMatrix) -> Result<SigmaMatrix> {
    let x = m.scheme();
    check_curve(&x)?;
    let t = m.tower();
    let q = PadicNumber::from_i64(t, m.precision(), x.q as i64);
    let d = match x.kind {
        SchemeKind::Torus => LaurentElement::constant(&q, 1),
        SchemeKind::AffineSpace => LaurentElement::monomial(vec![x.q as i64 - 1], &q),
    };
    SigmaMatrix::scalar(x, d)
}

/// Which side of the trace formula: the form twist D^{∧(1−r)}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Twist {
    /// r = 1: ψ[M].
    Plain,
    /// r = 0: ψ[M ⊗ D].
    Form,
}

impl Twist {
    pub fn from_index(i: u32) -> Result<Twist> {
        match i {
            0 => Ok(Twist::Form),
            1 => Ok(Twist::Plain),
            _ => Err(Error::Domain(format!("twist index {i} outside 0..=1 on a curve"))),
        }
    }
}

pub fn twisted(m: &SigmaMatrix, twist: Twist) -> Result<SigmaMatrix> {
    match twist {
        Twist::Plain => Ok(m.clone()),
        Twist::Form => m.tensor(&frobenius_form(m)?),
    }
}

#[derive(Clone, Debug)]
pub struct PsiOperator {
    pub scheme: BaseScheme,
    pub window: i64,
    /// (exponent j, index i) for each basis vector x^j·ě_i.
    pub basis: Vec<(i64, usize)>,
    pub matrix: Matrix<PadicNumber>,
    /// min ord_π over the columns with |j| = k, for k = 0..=window.
    pub decay: Vec<Option<u32>>,
    /// Largest ord_π deficit of mass leaving the window; None when none leaks.
    pub leak: Option<u32>,
}

/// Matrix of ψ[M] on {x^j ě_i : |j| ≤ J} (j ≥ 0 on 𝔸¹). Column (j, i₁) holds
/// θ(x^j·a_{i₁,i₂}) in row block i₂.
pub fn build_psi(m: &SigmaMatrix, window: i64) -> Result<PsiOperator> {
    let x = m.scheme();
    check_curve(&x)?;
    let lo = if x.kind == SchemeKind::AffineSpace { 0 } else { -window };
    let n = m.rank();
    let basis: Vec<(i64, usize)> = (0..n).flat_map(|i| (lo..=window).map(move |j| (j, i))).collect();
    let pos = |j: i64, i: usize| -> usize { i * (window - lo + 1) as usize + (j - lo) as usize };
    let t = m.tower().clone();
    let prec = m.precision();
    let zero = PadicNumber::zero(&t, prec);
    let dim = basis.len();
    let mut mat = Matrix::from_fn(dim, dim, |_, _| zero.clone());
    let mut leak: Option<u32> = None;
    for &(j, i1) in &basis {
        let col = pos(j, i1);
        for i2 in 0..n {
            let a = m.entry(i1, i2);
            if a.is_zero() {
                continue;
            }
            let img = theta_form(&a.mul_monomial(&[j]), &x)?;
            for (e, c) in img.terms() {
                let jj = e[0];
                if jj < lo || jj > window {
                    let o = c.ord_pi().unwrap_or(prec);
                    leak = Some(leak.map_or(o, |l: u32| l.min(o)));
                    continue;
                }
                mat.set(pos(jj, i2), col, c.clone());
            }
        }
    }
    let mut decay: Vec<Option<u32>> = vec![None; window as usize + 1];
    for &(j, i) in &basis {
        let col = pos(j, i);
        let o = (0..dim).filter_map(|r| mat.get(r, col).ord_pi()).min();
        let k = j.unsigned_abs() as usize;
        decay[k] = match (decay[k], o) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
    Ok(PsiOperator { scheme: x, window, basis, matrix: mat, decay, leak })
}

impl PsiOperator {
    /// Tr(ψ^f) for f = 1..=d on the window.
    pub fn power_traces(&self, d: usize) -> Result<Vec<PadicNumber>> {
        let mut out = Vec::with_capacity(d);
        let mut pw = self.matrix.clone();
        for f in 1..=d {
            if f > 1 {
                pw = pw.mul(&self.matrix)?;
            }
            out.push(pw.trace());
        }
        Ok(out)
    }

    /// det(1 − ψT) mod T^{d+1} on the window, via exp(−Σ Tr(ψ^f)T^f/f).
    pub fn fredholm(&self, d: usize) -> Result<TruncatedSeries> {
        det_from_power_sums(&self.power_traces(d)?, d)
    }
}

#[derive(Clone, Debug)]
pub struct FredholmResult {
    pub series: TruncatedSeries,
    pub windows: Vec<i64>,
    pub doublings: usize,
    pub operator: PsiOperator,
}

/// Guard digits lost to the divisions by f in the Newton recurrence.
pub fn newton_guard(m: &SigmaMatrix, d: usize) -> u32 {
    m.tower().e() as u32 * v_p_factorial(d as u64, m.tower().p())
}

/// det(1 − ψ[M]T) mod (T^{d+1}, π^N), doubling the window from `j0` until
/// three consecutive windows agree. Entries of M are treated as exact so the
/// precision can be raised by the Newton guard.
pub fn fredholm_det(m: &SigmaMatrix, d: usize, j0: i64, max_doublings: usize) -> Result<FredholmResult> {
    if d == 0 {
        return Err(Error::Domain("truncation order must be at least 1".into()));
    }
    let n = m.precision();
    let work = m.with_precision(n + newton_guard(m, d))?;
    let mut windows = Vec::new();
    let mut history: Vec<Option<TruncatedSeries>> = Vec::new();
    let mut j = j0.max(1);
    for doubling in 0..=max_doublings {
        let op = build_psi(&work, j)?;
        windows.push(j);
        let det = if op.leak.map_or(true, |o| o >= work.precision()) { Some(op.fredholm(d)?.reduce(n)) } else { None };
        history.push(det.clone());
        let k = history.len();
        if k >= 3 {
            if let (Some(a), Some(b), Some(c)) = (&history[k - 3], &history[k - 2], &history[k - 1]) {
                if a == b && b == c {
                    return Ok(FredholmResult { series: c.clone(), windows, doublings: doubling, operator: op });
                }
            }
        }
        j *= 2;
    }
    let drift = match (history.iter().rev().nth(1), history.last()) {
        (Some(Some(a)), Some(Some(b))) => a.first_difference(b, n).map(|(i, _)| format!("first change at T^{i}")),
        _ => Some("window never became invariant".into()),
    };
    Err(Error::Stabilization(format!(
        "Fredholm determinant not stable after {max_doublings} doublings (windows {windows:?}): {}",
        drift.unwrap_or_else(|| "last two windows agree only once".into())
    )))
}

/// Σ over closed points of degree d | f of d·Tr(T_x^{f/d})·Tr(M_x^{f/d}) / S_x,
/// with T = D^{∧(1−i)} and S_x = D_x^{f/d} − 1: the trace of ψ^f on the
/// degree-f base change.
pub fn trace_formula_pointsum(m: &SigmaMatrix, twist: Twist, f: usize) -> Result<PadicNumber> {
    let x = m.scheme();
    check_curve(&x)?;
    if f == 0 {
        return Err(Error::Domain("base-change degree must be positive".into()));
    }
    let base = m.tower().clone();
    let prec = m.precision();
    let dmat = frobenius_form(m)?;
    let mut acc = PadicNumber::zero(&base, prec);
    for pt in enumerate_closed_points(&x, f)? {
        let d = pt.degree();
        if f % d != 0 {
            continue;
        }
        let k = (f / d) as u32;
        let tower = base.with_residue_degree(d)?;
        let mx = m.fibre_in(&pt, &tower)?.pow(k)?;
        let dx = dmat.fibre_in(&pt, &tower)?.pow(k)?;
        let dx = dx.get(0, 0).clone();
        let s = &dx - &PadicNumber::one(&tower, prec);
        let s_inv = s.inverse().map_err(|_| Error::Unit(format!("S_x = {s} is not a unit at a point of degree {d}")))?;
        let tw = match twist {
            Twist::Plain => PadicNumber::one(&tower, prec),
            Twist::Form => dx.clone(),
        };
        let term = &(&(&tw * &mx.trace()) * &s_inv) * &PadicNumber::from_i64(&tower, prec, d as i64);
        let term = term
            .project_to_base(&base)
            .ok_or_else(|| Error::Integrality(format!("point-sum term at a point of degree {d} is not in R")))?;
        acc = &acc + &term;
    }
    Ok(acc)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceFormulaReport {
    pub scheme: String,
    pub precision: u32,
    pub degree: usize,
    pub euler: Vec<String>,
    pub fredholm_plain: Vec<String>,
    pub fredholm_form: Vec<String>,
    pub quotient: Vec<String>,
    pub windows_plain: Vec<i64>,
    pub windows_form: Vec<i64>,
    pub doublings: usize,
    pub equal: bool,
    pub first_difference: Option<usize>,
}

/// Euler product against det(1 − ψ[M]T) / det(1 − ψ[M⊗D]T).
pub fn trace_formula_l(m: &SigmaMatrix, d: usize) -> Result<(TraceFormulaReport, TruncatedSeries, TruncatedSeries)> {
    let x = m.scheme();
    check_curve(&x)?;
    let n = m.precision();
    let euler = euler_l(m, &x, d)?;
    let plain = fredholm_det(m, d, 2, 4)?;
    let form = fredholm_det(&twisted(m, Twist::Form)?, d, 2, 4)?;
    let quotient = plain.series.mul(&form.series.inverse()?).reduce(n);
    let diff = euler.first_difference(&quotient, n).map(|(i, _)| i);
    let strs = |s: &TruncatedSeries| s.t_coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>();
    let report = TraceFormulaReport {
        scheme: x.name(),
        precision: n,
        degree: d,
        euler: strs(&euler),
        fredholm_plain: strs(&plain.series),
        fredholm_form: strs(&form.series),
        quotient: strs(&quotient),
        windows_plain: plain.windows.clone(),
        windows_form: form.windows.clone(),
        doublings: plain.doublings.max(form.doublings),
        equal: diff.is_none(),
        first_difference: diff,
    };
    Ok((report, euler, quotient))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointSumReport {
    pub twist_index: u32,
    pub windows: Vec<i64>,
    pub traces: Vec<String>,
    pub pointsums: Vec<String>,
    pub equal: bool,
}

/// Tr(ψ^f) on the stabilized window against the point sums, f = 1..=f_max.
pub fn verify_pointsum(m: &SigmaMatrix, twist: Twist, f_max: usize) -> Result<PointSumReport> {
    let n = m.precision();
    let fd = fredholm_det(&twisted(m, twist)?, f_max, 2, 4)?;
    let traces: Vec<PadicNumber> = fd.operator.power_traces(f_max)?.iter().map(|t| t.reduce(n)).collect();
    let sums: Vec<PadicNumber> = (1..=f_max).map(|f| trace_formula_pointsum(m, twist, f)).collect::<Result<_>>()?;
    Ok(PointSumReport {
        twist_index: match twist {
            Twist::Form => 0,
            Twist::Plain => 1,
        },
        windows: fd.windows,
        equal: traces.iter().zip(&sums).all(|(a, b)| a.eq_mod(b, n)),
        traces: traces.iter().map(|t| t.to_string()).collect(),
        pointsums: sums.iter().map(|t| t.to_string()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::builtin;
    use crate::padic::Tower;

    #[test]
    fn theta_examples() {
        let t = Tower::qp(2).unwrap();
        let x = BaseScheme::torus(2, 1);
        let one = LaurentElement::one(&t, 8, 1);
        assert_eq!(theta_apply(&one, &x).unwrap(), LaurentElement::from_i64(&t, 8, 1, 2));
        assert!(theta_apply(&LaurentElement::var(&t, 8, 1, 0), &x).unwrap().is_zero());
        assert!(theta_apply(&one, &BaseScheme::torus(2, 2)).is_err());
    }

    #[test]
    fn torus_zeta() {
        let m = builtin("unit", 2, 8).unwrap();
        let (r, _, _) = trace_formula_l(&m, 4).unwrap();
        assert!(r.equal, "{r:?}");
    }

    #[test]
    fn affine_line_zeta() {
        let t = Tower::qp(2).unwrap();
        let m = SigmaMatrix::scalar(BaseScheme::affine(2, 1), LaurentElement::one(&t, 8, 1)).unwrap();
        let (r, e, _) = trace_formula_l(&m, 4).unwrap();
        assert!(r.equal, "{r:?}");
        let want: Vec<PadicNumber> = [1, 2, 4, 8, 16].iter().map(|&v| PadicNumber::from_i64(&t, 8, v)).collect();
        assert_eq!(e.t_coeffs(), want);
    }

    #[test]
    fn pointsum_torus_units() {
        let m = builtin("rank1-gm", 3, 6).unwrap();
        let ps = trace_formula_pointsum(&m, Twist::Plain, 1).unwrap();
        let op = build_psi(&m, 4).unwrap();
        assert_eq!(op.matrix.trace(), ps);
    }
}
