//! Dense matrices over the commutative rings used here, with division-free
//! characteristic polynomials.

use std::fmt;

use crate::error::{Error, Result};
use crate::laurent::LaurentElement;
use crate::padic::PadicNumber;

pub trait Ring: Clone + PartialEq {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add_r(&self, other: &Self) -> Self;
    fn sub_r(&self, other: &Self) -> Self;
    fn mul_r(&self, other: &Self) -> Self;
    fn neg_r(&self) -> Self;
    fn is_zero_r(&self) -> bool;
}

impl Ring for PadicNumber {
    fn zero_like(&self) -> Self {
        PadicNumber::zero(self.tower(), self.precision())
    }
    fn one_like(&self) -> Self {
        PadicNumber::one(self.tower(), self.precision())
    }
    fn add_r(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_r(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_r(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_r(&self) -> Self {
        -self
    }
    fn is_zero_r(&self) -> bool {
        self.is_zero()
    }
}

impl Ring for LaurentElement {
    fn zero_like(&self) -> Self {
        LaurentElement::zero(self.tower(), self.precision(), self.nvars())
    }
    fn one_like(&self) -> Self {
        LaurentElement::one(self.tower(), self.precision(), self.nvars())
    }
    fn add_r(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_r(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_r(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_r(&self) -> Self {
        -self
    }
    fn is_zero_r(&self) -> bool {
        self.is_zero()
    }
}

/// Row-major dense matrix. Never empty: a prototype element is always present.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Ring + fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            writeln!(f, "{:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        Ok(())
    }
}

impl<T: Ring> Matrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Matrix<T>> {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        if r == 0 || c == 0 {
            return Err(Error::Shape("matrix must have at least one entry".into()));
        }
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::Shape("ragged matrix rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Matrix<T> {
        assert!(rows > 0 && cols > 0);
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn identity(n: usize, proto: &T) -> Matrix<T> {
        let (z, o) = (proto.zero_like(), proto.one_like());
        Matrix::from_fn(n, n, |i, j| if i == j { o.clone() } else { z.clone() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }
    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }
    pub fn proto(&self) -> &T {
        &self.data[0]
    }

    pub fn map<U: Ring>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn try_map<U: Ring>(&self, f: impl FnMut(&T) -> Result<U>) -> Result<Matrix<U>> {
        Ok(Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect::<Result<_>>()? })
    }

    pub fn mul(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!("cannot multiply {}x{} by {}x{}", self.rows, self.cols, other.rows, other.cols)));
        }
        let zero = self.proto().zero_like();
        let mut out = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = zero.clone();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if a.is_zero_r() {
                        continue;
                    }
                    acc = acc.add_r(&a.mul_r(other.get(k, j)));
                }
                out.push(acc);
            }
        }
        Ok(Matrix { rows: self.rows, cols: other.cols, data: out })
    }

    pub fn add(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        self.zip(other, |a, b| a.add_r(b))
    }

    pub fn sub(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        self.zip(other, |a, b| a.sub_r(b))
    }

    fn zip(&self, other: &Matrix<T>, f: impl Fn(&T, &T) -> T) -> Result<Matrix<T>> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape("matrix dimensions differ".into()));
        }
        Ok(Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect() })
    }

    /// Kronecker product; index (i, k) ↦ i·rows(other) + k.
    pub fn kron(&self, other: &Matrix<T>) -> Matrix<T> {
        Matrix::from_fn(self.rows * other.rows, self.cols * other.cols, |r, c| {
            let (i, k) = (r / other.rows, r % other.rows);
            let (j, l) = (c / other.cols, c % other.cols);
            self.get(i, j).mul_r(other.get(k, l))
        })
    }

    pub fn trace(&self) -> T {
        let mut acc = self.proto().zero_like();
        for i in 0..self.rows.min(self.cols) {
            acc = acc.add_r(self.get(i, i));
        }
        acc
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix<T> {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    /// Coefficients c_0..c_k of det(1 − A·T), k = min(n, max_degree), by
    /// Berkowitz's division-free recurrence.
    pub fn det_one_minus(&self, max_degree: usize) -> Result<Vec<T>> {
        if !self.is_square() {
            return Err(Error::Shape("characteristic polynomial of a non-square matrix".into()));
        }
        let n = self.rows;
        let d = max_degree.min(n);
        let one = self.proto().one_like();
        let zero = self.proto().zero_like();
        let mut v = vec![one.clone(), self.get(n - 1, n - 1).neg_r()];
        v.truncate(d + 1);
        for k in (0..n - 1).rev() {
            let size = n - k;
            let mut t = vec![one.clone(), self.get(k, k).neg_r()];
            // w = A1^j C, starting from C.
            let mut w: Vec<T> = (k + 1..n).map(|i| self.get(i, k).clone()).collect();
            while t.len() <= size.min(d) {
                let rc = (k + 1..n).fold(zero.clone(), |acc, j| acc.add_r(&self.get(k, j).mul_r(&w[j - k - 1])));
                t.push(rc.neg_r());
                if t.len() <= size.min(d) {
                    w = (k + 1..n)
                        .map(|i| (k + 1..n).fold(zero.clone(), |acc, j| acc.add_r(&self.get(i, j).mul_r(&w[j - k - 1]))))
                        .collect();
                }
            }
            let len = (size + 1).min(d + 1);
            let mut nv = Vec::with_capacity(len);
            for i in 0..len {
                let mut acc = zero.clone();
                for (j, vj) in v.iter().enumerate().take(i + 1) {
                    acc = acc.add_r(&t[i - j].mul_r(vj));
                }
                nv.push(acc);
            }
            v = nv;
        }
        Ok(v)
    }

    pub fn det(&self) -> Result<T> {
        let n = self.rows;
        let c = self.det_one_minus(n)?;
        Ok(if n % 2 == 0 { c[n].clone() } else { c[n].neg_r() })
    }

    /// The k-th compound matrix: k×k minors on ascending index tuples in
    /// lexicographic order.
    pub fn compound(&self, k: usize) -> Result<Matrix<T>> {
        if !self.is_square() || k > self.rows {
            return Err(Error::Shape(format!("exterior power {k} of a {}x{} matrix", self.rows, self.cols)));
        }
        if k == 0 {
            return Ok(Matrix::identity(1, self.proto()));
        }
        let subsets = k_subsets(self.rows, k);
        let mut data = Vec::with_capacity(subsets.len() * subsets.len());
        for r in &subsets {
            for c in &subsets {
                data.push(self.submatrix(r, c).det()?);
            }
        }
        Ok(Matrix { rows: subsets.len(), cols: subsets.len(), data })
    }

    pub fn pow(&self, e: u32) -> Result<Matrix<T>> {
        let mut acc = Matrix::identity(self.rows, self.proto());
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }
}

/// Ascending k-subsets of 0..n in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

impl Matrix<PadicNumber> {
    pub fn reduce(&self, prec: u32) -> Matrix<PadicNumber> {
        self.map(|x| x.reduce(prec))
    }

    pub fn eq_mod(&self, other: &Matrix<PadicNumber>, n: u32) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data.iter().zip(&other.data).all(|(a, b)| a.eq_mod(b, n))
    }

    pub fn min_ord_pi(&self) -> Option<u32> {
        self.data.iter().filter_map(|x| x.ord_pi()).min()
    }
}
