//! Finite-rank σ-module matrices: σ-powers, fibres, tensor and exterior
//! powers, Euler products and unit-root splitting.
//!
//! Columns act: φ(e_j) = Σ_i a_{i,j} e_i.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{enumerate_closed_points, BaseScheme, ClosedPoint, SchemeKind};
use crate::laurent::LaurentElement;
use crate::linalg::Matrix;
use crate::padic::{PadicNumber, Tower};
use crate::series::TruncatedSeries;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalFlags {
    pub one_normal: bool,
    pub standard_normal: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaMatrix {
    scheme: BaseScheme,
    entries: Matrix<LaurentElement>,
    i0: Option<usize>,
    flags: NormalFlags,
}

fn in_pi_a(a: &LaurentElement) -> bool {
    a.min_ord_pi().map_or(true, |o| o >= 1)
}

impl SigmaMatrix {
    pub fn new(scheme: BaseScheme, entries: Matrix<LaurentElement>, i0: Option<usize>) -> Result<SigmaMatrix> {
        scheme.validate()?;
        if !entries.is_square() {
            return Err(Error::Shape(format!("σ-module matrix must be square, got {}x{}", entries.rows(), entries.cols())));
        }
        let tower = entries.proto().tower().clone();
        if tower.f() != 1 {
            return Err(Error::Tower("matrix coefficients must lie in R (residue degree 1)".into()));
        }
        if tower.q() != scheme.q {
            return Err(Error::Tower(format!("scheme residue field size {} differs from the tower's q = {}", scheme.q, tower.q())));
        }
        for a in entries.entries() {
            if a.nvars() != scheme.n {
                return Err(Error::Shape(format!("entry has {} variables, scheme has {}", a.nvars(), scheme.n)));
            }
            if scheme.kind == SchemeKind::AffineSpace && !a.is_polynomial() {
                return Err(Error::Shape("negative exponents are not allowed on affine space".into()));
            }
        }
        if let Some(i) = i0 {
            if i >= entries.rows() {
                return Err(Error::Shape(format!("distinguished index {i} out of range")));
            }
        }
        let mut m = SigmaMatrix { scheme, entries, i0, flags: NormalFlags::default() };
        m.flags = m.compute_flags();
        Ok(m)
    }

    pub fn from_rows(scheme: BaseScheme, rows: Vec<Vec<LaurentElement>>, i0: Option<usize>) -> Result<SigmaMatrix> {
        SigmaMatrix::new(scheme, Matrix::from_rows(rows)?, i0)
    }

    /// The 1×1 matrix (a).
    pub fn scalar(scheme: BaseScheme, a: LaurentElement) -> Result<SigmaMatrix> {
        SigmaMatrix::from_rows(scheme, vec![vec![a]], Some(0))
    }

    fn compute_flags(&self) -> NormalFlags {
        let Some(i0) = self.i0 else {
            return NormalFlags::default();
        };
        let n = self.rank();
        let one = LaurentElement::one(self.tower(), self.precision(), self.scheme.n);
        let corner = self.entry(i0, i0);
        let others_small = (0..n).all(|i| (0..n).all(|j| (i, j) == (i0, i0) || in_pi_a(self.entry(i, j))));
        let one_normal = in_pi_a(&(corner - &one)) && others_small;
        let column_clear = (0..n).all(|i| i == i0 || self.entry(i, i0).is_zero());
        let rest_small = (0..n).all(|i| (0..n).all(|j| j == i0 || in_pi_a(self.entry(i, j))));
        let standard_normal = column_clear && corner.inverse().is_ok() && rest_small;
        NormalFlags { one_normal, standard_normal }
    }

    pub fn flags(&self) -> NormalFlags {
        self.flags
    }
    pub fn scheme(&self) -> BaseScheme {
        self.scheme
    }
    pub fn rank(&self) -> usize {
        self.entries.rows()
    }
    pub fn i0(&self) -> Option<usize> {
        self.i0
    }
    pub fn tower(&self) -> &Arc<Tower> {
        self.entries.proto().tower()
    }
    pub fn precision(&self) -> u32 {
        self.entries.entries().map(|a| a.precision()).min().unwrap_or(0)
    }
    pub fn entry(&self, i: usize, j: usize) -> &LaurentElement {
        self.entries.get(i, j)
    }
    pub fn matrix(&self) -> &Matrix<LaurentElement> {
        &self.entries
    }

    pub fn with_i0(&self, i0: Option<usize>) -> Result<SigmaMatrix> {
        SigmaMatrix::new(self.scheme, self.entries.clone(), i0)
    }

    pub fn reduce(&self, prec: u32) -> SigmaMatrix {
        let mut m = self.clone();
        m.entries = self.entries.map(|a| a.reduce(prec));
        m
    }

    /// Raises the stored precision, treating the entries as exact.
    pub fn with_precision(&self, prec: u32) -> Result<SigmaMatrix> {
        let mut m = self.clone();
        m.entries = self.entries.try_map(|a| a.with_precision(prec))?;
        Ok(m)
    }

    /// Largest |α|_1 over all entries.
    pub fn max_abs_degree(&self) -> i64 {
        self.entries.entries().map(|a| a.max_abs_degree()).max().unwrap_or(0)
    }

    pub fn sigma_apply(&self, f: u32) -> SigmaMatrix {
        let mut m = self.clone();
        m.entries = self.entries.map(|a| a.sigma_apply(self.scheme.q, f));
        m
    }

    pub fn mul(&self, other: &SigmaMatrix) -> Result<SigmaMatrix> {
        SigmaMatrix::new(self.scheme, self.entries.mul(&other.entries)?, self.i0)
    }

    /// M·σ(M)·…·σ^{f−1}(M), rejecting supports beyond 4·q^f.
    pub fn sigma_power(&self, f: u32) -> Result<SigmaMatrix> {
        let cap = 4 * (self.scheme.q as i64).saturating_pow(f);
        self.sigma_power_capped(f, cap)
    }

    pub fn sigma_power_capped(&self, f: u32, cap: i64) -> Result<SigmaMatrix> {
        if f == 0 {
            return Err(Error::Domain("σ-power needs f ≥ 1".into()));
        }
        let mut acc = self.entries.clone();
        for j in 1..f {
            acc = acc.mul(&self.sigma_apply(j).entries)?;
            let deg = acc.entries().map(|a| a.max_abs_degree()).max().unwrap_or(0);
            if deg > cap {
                return Err(Error::Resource(format!("σ-power support reached degree {deg}, cap is {cap}")));
            }
        }
        SigmaMatrix::new(self.scheme, acc, self.i0)
    }

    /// The fibre M_x̄ = ∏_j M(x̂^{q^j}) over R_f, f = deg x̄.
    pub fn fibre(&self, pt: &ClosedPoint) -> Result<Matrix<PadicNumber>> {
        let tower = self.tower().with_residue_degree(pt.degree())?;
        self.fibre_in(pt, &tower)
    }

    pub fn fibre_in(&self, pt: &ClosedPoint, tower: &Arc<Tower>) -> Result<Matrix<PadicNumber>> {
        if pt.coords().len() != self.scheme.n {
            return Err(Error::Shape("point dimension differs from the scheme".into()));
        }
        let prec = self.precision();
        let lifts = pt.conjugate_lifts(tower, prec)?;
        let mut acc: Option<Matrix<PadicNumber>> = None;
        for lift in &lifts {
            let m = self.entries.try_map(|a| a.evaluate(lift))?;
            acc = Some(match acc {
                None => m,
                Some(a) => a.mul(&m)?,
            });
        }
        Ok(acc.expect("points have positive degree"))
    }

    pub fn tensor(&self, other: &SigmaMatrix) -> Result<SigmaMatrix> {
        if self.scheme != other.scheme {
            return Err(Error::Shape("tensor factors live on different schemes".into()));
        }
        let i0 = match (self.i0, other.i0) {
            (Some(a), Some(b)) => Some(a * other.rank() + b),
            _ => None,
        };
        SigmaMatrix::new(self.scheme, self.entries.kron(&other.entries), i0)
    }

    /// k-th exterior power on ascending k-subsets; entries are k×k minors.
    pub fn wedge(&self, k: usize) -> Result<SigmaMatrix> {
        let c = self.entries.compound(k)?;
        let i0 = if k == 1 { self.i0 } else { None };
        SigmaMatrix::new(self.scheme, c, i0)
    }

    pub fn euler_l(&self, d: usize) -> Result<TruncatedSeries> {
        euler_l(self, &self.scheme, d)
    }

    /// Block upper-triangular matrix [[A, C], [0, B]].
    pub fn block_triangular(a: &SigmaMatrix, c: &Matrix<LaurentElement>, b: &SigmaMatrix) -> Result<SigmaMatrix> {
        let (n1, n2) = (a.rank(), b.rank());
        if c.rows() != n1 || c.cols() != n2 {
            return Err(Error::Shape("off-diagonal block has the wrong shape".into()));
        }
        let zero = LaurentElement::zero(a.tower(), a.precision(), a.scheme.n);
        let m = Matrix::from_fn(n1 + n2, n1 + n2, |i, j| match (i < n1, j < n1) {
            (true, true) => a.entry(i, j).clone(),
            (true, false) => c.get(i, j - n1).clone(),
            (false, true) => zero.clone(),
            (false, false) => b.entry(i - n1, j - n1).clone(),
        });
        SigmaMatrix::new(a.scheme, m, a.i0)
    }
}

/// ∏ over closed points of degree ≤ D of factor(x̄)^{-1}, where the closure
/// returns det(1 − (·)T^{deg x̄}) as a series over R. Factors are computed in
/// parallel and multiplied in enumeration order.
pub fn euler_product_with<F>(scheme: &BaseScheme, d: usize, factor: F) -> Result<TruncatedSeries>
where
    F: Fn(&ClosedPoint) -> Result<TruncatedSeries> + Sync,
{
    if d == 0 {
        return Err(Error::Domain("truncation order must be at least 1".into()));
    }
    let points = enumerate_closed_points(scheme, d)?;
    let factors: Vec<TruncatedSeries> = points.par_iter().map(|pt| factor(pt)?.inverse()).collect::<Result<_>>()?;
    let mut iter = factors.into_iter();
    let mut acc = iter.next().ok_or_else(|| Error::Domain("scheme has no closed points".into()))?;
    for f in iter {
        acc = acc.mul(&f);
    }
    Ok(acc)
}

/// Places polynomial coefficients c_k at T^{k·deg}, truncated to T^D.
pub fn spread(coeffs: &[PadicNumber], deg: usize, d: usize, tower: &Arc<Tower>, prec: u32) -> Result<TruncatedSeries> {
    let mut out = vec![PadicNumber::zero(tower, prec); d + 1];
    for (k, c) in coeffs.iter().enumerate() {
        if k * deg <= d {
            out[k * deg] = c.reduce(prec);
        }
    }
    TruncatedSeries::from_t_coeffs(out)
}

/// det(1 − F·T) coefficients up to T^max over R_f, projected to R.
pub fn fibre_char_poly(f: &Matrix<PadicNumber>, max: usize, base: &Arc<Tower>) -> Result<Vec<PadicNumber>> {
    f.det_one_minus(max)?
        .iter()
        .enumerate()
        .map(|(k, c)| {
            c.project_to_base(base).ok_or_else(|| Error::Integrality(format!("coefficient of T^{k} in det(1 - M_x T) = {c} is not in R")))
        })
        .collect()
}

/// L(M, T) = ∏_{x̄} det(1 − M_x̄ T^{deg x̄})^{-1} mod T^{D+1}.
pub fn euler_l(m: &SigmaMatrix, x: &BaseScheme, d: usize) -> Result<TruncatedSeries> {
    if *x != m.scheme {
        return Err(Error::Shape(format!("matrix lives on {}, not {}", m.scheme.name(), x.name())));
    }
    let base = m.tower().clone();
    let prec = m.precision();
    euler_product_with(x, d, |pt| {
        let fib = m.fibre(pt)?;
        let c = fibre_char_poly(&fib, d / pt.degree(), &base)?;
        spread(&c, pt.degree(), d, &base, prec)
    })
}

#[derive(Clone, Debug)]
pub struct UnitRootSplit {
    pub s: Matrix<LaurentElement>,
    pub s_inv: Matrix<LaurentElement>,
    pub m_std: SigmaMatrix,
    pub iterations: usize,
}

/// σ-similarity S with S⁻¹·M·σ(S) standard 1-normal, by successive
/// approximation of the column c with S = 1 + c·e_{i0}ᵀ.
pub fn unit_root_split(m: &SigmaMatrix) -> Result<UnitRootSplit> {
    let i0 = m.i0.ok_or_else(|| Error::Flag("unit_root_split needs a distinguished index".into()))?;
    if !m.flags.one_normal {
        return Err(Error::Flag("unit_root_split needs a 1-normal matrix".into()));
    }
    let n = m.rank();
    let q = m.scheme.q;
    let prec = m.precision();
    let nv = m.scheme.n;
    let tower = m.tower().clone();
    let zero = LaurentElement::zero(&tower, prec, nv);
    let cap = 4 * (q as i64).saturating_pow(prec.min(30)) * m.max_abs_degree().max(1);
    let mut c: Vec<LaurentElement> = vec![zero.clone(); n];
    let mut iterations = 0;
    loop {
        if iterations > prec as usize + 2 {
            return Err(Error::Convergence(format!("defect did not contract after {iterations} iterations")));
        }
        iterations += 1;
        let sc: Vec<LaurentElement> = c.iter().map(|x| x.sigma_apply(q, 1)).collect();
        let v = |i: usize| -> LaurentElement {
            let mut acc = m.entry(i, i0).clone();
            for (j, scj) in sc.iter().enumerate() {
                if j != i0 && !scj.is_zero() {
                    acc = &acc + &(scj * m.entry(i, j));
                }
            }
            acc
        };
        let pivot_inv = v(i0).inverse().map_err(|_| Error::Convergence("pivot lost invertibility".into()))?;
        let next: Vec<LaurentElement> = (0..n).map(|i| if i == i0 { zero.clone() } else { &v(i) * &pivot_inv }).collect();
        for x in &next {
            if x.max_abs_degree() > cap {
                return Err(Error::Resource(format!("unit-root splitting support exceeded degree {cap}")));
            }
        }
        if next == c {
            break;
        }
        c = next;
    }
    let one = LaurentElement::one(&tower, prec, nv);
    let s = Matrix::from_fn(n, n, |i, j| {
        if j == i0 && i != i0 {
            c[i].clone()
        } else if i == j {
            one.clone()
        } else {
            zero.clone()
        }
    });
    let s_inv = Matrix::from_fn(n, n, |i, j| {
        if j == i0 && i != i0 {
            -&c[i]
        } else if i == j {
            one.clone()
        } else {
            zero.clone()
        }
    });
    let sigma_s = s.map(|a| a.sigma_apply(q, 1));
    let prod = s_inv.mul(&m.entries)?.mul(&sigma_s)?;
    let m_std = SigmaMatrix::new(m.scheme, prod, Some(i0))?;
    if !m_std.flags.standard_normal || !m_std.flags.one_normal {
        return Err(Error::Convergence("split matrix fails the standard 1-normal check".into()));
    }
    Ok(UnitRootSplit { s, s_inv, m_std, iterations })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub degree: usize,
    pub block: Vec<String>,
    pub product: Vec<String>,
    pub equal: bool,
}

/// L([[A, C], [0, B]]) against L(A)·L(B).
pub fn verify_block_factorization(a: &SigmaMatrix, c: &Matrix<LaurentElement>, b: &SigmaMatrix, d: usize) -> Result<FactorizationReport> {
    let m = SigmaMatrix::block_triangular(a, c, b)?;
    let n = m.precision();
    let lhs = m.euler_l(d)?;
    let rhs = a.euler_l(d)?.mul(&b.euler_l(d)?).reduce(n);
    Ok(FactorizationReport {
        degree: d,
        equal: lhs.first_difference(&rhs, n).is_none(),
        block: lhs.coefficient_strings(),
        product: rhs.coefficient_strings(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplitReport {
    pub degree: usize,
    pub iterations: usize,
    pub original: Vec<String>,
    pub split: Vec<String>,
    pub standard_normal: bool,
    pub equal: bool,
}

/// euler_L(M) against euler_L(S⁻¹·M·σ(S)).
pub fn verify_split(m: &SigmaMatrix, d: usize) -> Result<SplitReport> {
    let sp = unit_root_split(m)?;
    let n = m.precision();
    let lhs = m.euler_l(d)?;
    let rhs = sp.m_std.euler_l(d)?;
    Ok(SplitReport {
        degree: d,
        iterations: sp.iterations,
        standard_normal: sp.m_std.flags.standard_normal,
        equal: lhs.first_difference(&rhs, n).is_none(),
        original: lhs.coefficient_strings(),
        split: rhs.coefficient_strings(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::builtin;

    #[test]
    fn sigma_power_rank_one() {
        let t = Tower::qp(2).unwrap();
        let x = LaurentElement::var(&t, 6, 1, 0);
        let m = SigmaMatrix::scalar(BaseScheme::torus(2, 1), x.clone()).unwrap();
        assert_eq!(*m.sigma_power(3).unwrap().entry(0, 0), x.pow(7));
        assert_eq!(m.sigma_power(1).unwrap(), m);
    }

    #[test]
    fn zeta_of_torus() {
        let t = Tower::qp(2).unwrap();
        let m = SigmaMatrix::scalar(BaseScheme::torus(2, 1), LaurentElement::one(&t, 8, 1)).unwrap();
        let l = m.euler_l(2).unwrap();
        let want: Vec<PadicNumber> = [1, 1, 2].iter().map(|&v| PadicNumber::from_i64(&t, 8, v)).collect();
        assert_eq!(l.t_coeffs(), want);
    }

    #[test]
    fn fibre_matches_sigma_power() {
        let m = builtin("rank2-gm", 2, 6).unwrap();
        let pts = enumerate_closed_points(&m.scheme(), 3).unwrap();
        for pt in &pts {
            let tower = m.tower().with_residue_degree(pt.degree()).unwrap();
            let direct = m.fibre_in(pt, &tower).unwrap();
            let lift = pt.teich_lift(&tower, 6).unwrap();
            let via = m.sigma_power(pt.degree() as u32).unwrap().matrix().try_map(|a| a.evaluate(&lift)).unwrap();
            assert_eq!(direct, via);
        }
    }

    #[test]
    fn split_example() {
        let m = builtin("rank2-split-gm", 2, 5).unwrap();
        assert!(m.flags().one_normal && !m.flags().standard_normal);
        let sp = unit_root_split(&m).unwrap();
        assert!(sp.m_std.entry(1, 0).is_zero());
        let again = unit_root_split(&sp.m_std).unwrap();
        assert!(again.s.entries().zip(Matrix::identity(2, sp.s.proto()).entries()).all(|(a, b)| a == b));
    }
}
