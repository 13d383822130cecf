//! Closed points of 𝔾_m^n and 𝔸^n over F_q and their Teichmüller lifts.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{FfElem, FiniteField};
use crate::padic::{PadicNumber, Tower};

/// Upper bound on the number of tuples enumerated for one request.
pub const ENUMERATION_GUARD: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    Torus,
    AffineSpace,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BaseScheme {
    pub kind: SchemeKind,
    pub n: usize,
    pub q: u64,
}

impl BaseScheme {
    pub fn torus(q: u64, n: usize) -> BaseScheme {
        BaseScheme { kind: SchemeKind::Torus, n, q }
    }
    pub fn affine(q: u64, n: usize) -> BaseScheme {
        BaseScheme { kind: SchemeKind::AffineSpace, n, q }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Shape("base scheme needs at least one coordinate".into()));
        }
        if !crate::ff::is_prime(self.q) {
            return Err(Error::Unsupported(format!("residue field size {} must be prime", self.q)));
        }
        Ok(())
    }

    /// #X(F_{q^m}).
    pub fn count_points(&self, m: u32) -> u128 {
        let qm = (self.q as u128).pow(m);
        match self.kind {
            SchemeKind::Torus => (qm - 1).pow(self.n as u32),
            SchemeKind::AffineSpace => qm.pow(self.n as u32),
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            SchemeKind::Torus => format!("Gm^{}", self.n),
            SchemeKind::AffineSpace => format!("A^{}", self.n),
        }
    }
}

/// A Frobenius orbit, represented by its lexicographically least member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedPoint {
    field: Arc<FiniteField>,
    coords: Vec<FfElem>,
}

impl ClosedPoint {
    /// Checks minimality and canonicity of `coords` in F_{q^degree}.
    pub fn new(q: u64, degree: usize, coords: Vec<FfElem>) -> Result<ClosedPoint> {
        let field = FiniteField::get(q, degree)?;
        let pt = ClosedPoint { field, coords };
        let orbit = pt.orbit();
        if orbit.len() != degree {
            return Err(Error::Shape(format!("orbit has size {} but degree {degree} was claimed", orbit.len())));
        }
        Ok(pt)
    }

    pub fn degree(&self) -> usize {
        self.field.degree()
    }
    pub fn coords(&self) -> &[FfElem] {
        &self.coords
    }
    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }

    fn frobenius(&self, c: &[FfElem]) -> Vec<FfElem> {
        c.iter().map(|a| self.field.frobenius(a)).collect()
    }

    /// The geometric points rep, rep^q, … of the orbit.
    pub fn orbit(&self) -> Vec<Vec<FfElem>> {
        let mut out = vec![self.coords.clone()];
        let mut cur = self.frobenius(&self.coords);
        while cur != self.coords {
            out.push(cur.clone());
            cur = self.frobenius(&cur);
        }
        out
    }

    /// Minimality certificate: the orbit size equals the degree.
    pub fn certify(&self) -> bool {
        self.orbit().len() == self.degree()
    }

    pub fn encoding(&self) -> Vec<u64> {
        self.coords.iter().map(|a| self.field.encode(a)).collect()
    }

    /// Coordinate-wise Teichmüller lift into R_f, f = degree.
    pub fn teich_lift(&self, tower: &Arc<Tower>, prec: u32) -> Result<Vec<PadicNumber>> {
        self.check_tower(tower)?;
        Ok(self.coords.iter().map(|a| PadicNumber::teichmuller(tower, prec, a)).collect())
    }

    /// Lifts of the conjugates rep^{q^j}, j = 0..deg−1.
    pub fn conjugate_lifts(&self, tower: &Arc<Tower>, prec: u32) -> Result<Vec<Vec<PadicNumber>>> {
        self.check_tower(tower)?;
        let mut out = Vec::with_capacity(self.degree());
        let mut cur = self.coords.clone();
        for _ in 0..self.degree() {
            out.push(cur.iter().map(|a| PadicNumber::teichmuller(tower, prec, a)).collect());
            cur = self.frobenius(&cur);
        }
        Ok(out)
    }

    fn check_tower(&self, tower: &Tower) -> Result<()> {
        if tower.p() != self.field.p() || tower.f() != self.degree() || tower.residue_poly() != self.field.modulus() {
            return Err(Error::Shape(format!(
                "point of degree {} over F_{} does not match tower ({tower})",
                self.degree(),
                self.field.p()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ClosedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.degree())?;
        for c in &self.coords {
            write!(f, " {c}")?;
        }
        Ok(())
    }
}

/// One point per Frobenius orbit of degree ≤ f_max, ordered by degree and then
/// by coordinate encoding.
pub fn enumerate_closed_points(x: &BaseScheme, f_max: usize) -> Result<Vec<ClosedPoint>> {
    x.validate()?;
    let mut total: u64 = 0;
    for f in 1..=f_max {
        let size = crate::ff::checked_pow(x.q, (f * x.n) as u32)
            .ok_or_else(|| Error::Resource(format!("q^{} overflows", f * x.n)))?;
        total = total.saturating_add(size);
        if total > ENUMERATION_GUARD {
            return Err(Error::Resource(format!(
                "enumerating {} up to degree {f_max} needs more than {ENUMERATION_GUARD} tuples",
                x.name()
            )));
        }
    }
    let mut out = Vec::new();
    for f in 1..=f_max {
        let field = FiniteField::get(x.q, f)?;
        let size = field.size();
        let count = size.pow(x.n as u32);
        for code in 0..count {
            let mut t = code;
            let mut enc = vec![0u64; x.n];
            for slot in enc.iter_mut().rev() {
                *slot = t % size;
                t /= size;
            }
            if x.kind == SchemeKind::Torus && enc.contains(&0) {
                continue;
            }
            let coords: Vec<FfElem> = enc.iter().map(|&c| field.decode(c)).collect();
            let mut cur: Vec<FfElem> = coords.iter().map(|a| field.frobenius(a)).collect();
            let mut orbit = 1;
            let mut minimal = true;
            while cur != coords {
                let ce: Vec<u64> = cur.iter().map(|a| field.encode(a)).collect();
                if ce < enc {
                    minimal = false;
                    break;
                }
                orbit += 1;
                cur = cur.iter().map(|a| field.frobenius(a)).collect();
            }
            if minimal && orbit == f {
                out.push(ClosedPoint { field: field.clone(), coords });
            }
        }
    }
    Ok(out)
}

pub fn teich_lift_point(pt: &ClosedPoint, tower: &Arc<Tower>, prec: u32) -> Result<Vec<PadicNumber>> {
    pt.teich_lift(tower, prec)
}

/// Text table: one line per point, degree followed by coordinate vectors.
pub fn format_points_table(points: &[ClosedPoint]) -> String {
    let mut s = String::from("# degree coordinates (coefficients of 1, w, w^2, ...)\n");
    for pt in points {
        s.push_str(&pt.to_string());
        s.push('\n');
    }
    s
}
