//! Text descriptors for σ-module matrices and the shipped builtins.
//!
//! ```text
//! tower p=2 e=1 eisenstein=-2 f=1
//! scheme gm 1
//! precision 8
//! rank 2
//! unit-index 0
//! entry 0 0 1 + p*x
//! entry 0 1 p*x^2
//! entry 1 1 p
//! ```
//!
//! Expressions are sums of products of integers, `[c0,c1,..]` coordinate
//! literals, `p`, `pi`, `x` (or `x1`, `x2`, ...) with optional `^k`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{BaseScheme, SchemeKind};
use crate::laurent::LaurentElement;
use crate::linalg::Matrix;
use crate::padic::{PadicNumber, Tower};
use crate::sigma::SigmaMatrix;

pub const BUILTINS: &[(&str, &str)] = &[
    ("unit", include_str!("../builtins/unit.sigma")),
    ("x", include_str!("../builtins/x.sigma")),
    ("rank1-gm", include_str!("../builtins/rank1-gm.sigma")),
    ("rank2-gm", include_str!("../builtins/rank2-gm.sigma")),
    ("rank2-split-gm", include_str!("../builtins/rank2-split-gm.sigma")),
    ("block3-gm", include_str!("../builtins/block3-gm.sigma")),
    ("rank1-a1", include_str!("../builtins/rank1-a1.sigma")),
    ("rank2-a1", include_str!("../builtins/rank2-a1.sigma")),
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|(n, _)| *n).collect()
}

/// A builtin over Q_p at precision `prec`.
pub fn builtin(name: &str, p: u64, prec: u32) -> Result<SigmaMatrix> {
    let tower = Tower::qp(p)?;
    builtin_in(name, &tower, prec)
}

pub fn builtin_in(name: &str, tower: &Arc<Tower>, prec: u32) -> Result<SigmaMatrix> {
    let text = BUILTINS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Parse(format!("unknown builtin '{name}'; known: {}", builtin_names().join(", "))))?;
    parse_with_defaults(text, Some((tower.clone(), prec)))
}

pub fn parse_descriptor(text: &str) -> Result<SigmaMatrix> {
    parse_with_defaults(text, None)
}

fn kv<'a>(tok: &'a str, key: &str) -> Result<&'a str> {
    tok.strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| Error::Parse(format!("expected {key}=..., found '{tok}'")))
}

fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad {what}: '{s}'")))
}

pub fn parse_tower_line(rest: &str) -> Result<Arc<Tower>> {
    let mut p = None;
    let mut e = 1usize;
    let mut eis: Option<Vec<i64>> = None;
    let mut f = 1usize;
    for tok in rest.split_whitespace() {
        if tok.starts_with("p=") {
            p = Some(num::<u64>(kv(tok, "p")?, "prime")?);
        } else if tok.starts_with("eisenstein=") {
            eis = Some(kv(tok, "eisenstein")?.split(',').map(|c| num::<i64>(c, "Eisenstein coefficient")).collect::<Result<_>>()?);
        } else if tok.starts_with("e=") {
            e = num(kv(tok, "e")?, "ramification index")?;
        } else if tok.starts_with("f=") {
            f = num(kv(tok, "f")?, "residue degree")?;
        } else {
            return Err(Error::Parse(format!("unknown tower field '{tok}'")));
        }
    }
    let p = p.ok_or_else(|| Error::Parse("tower line needs p=".into()))?;
    let eis = eis.unwrap_or_else(|| if e == 1 { vec![-(p as i64)] } else { vec![] });
    if eis.len() != e {
        return Err(Error::Tower(format!("Eisenstein polynomial needs {e} coefficients, got {}", eis.len())));
    }
    let t = Tower::ramified(p, eis)?;
    if f == 1 {
        Ok(t)
    } else {
        t.with_residue_degree(f)
    }
}

fn parse_with_defaults(text: &str, defaults: Option<(Arc<Tower>, u32)>) -> Result<SigmaMatrix> {
    let (mut tower, mut prec) = match defaults {
        Some((t, n)) => (Some(t), Some(n)),
        None => (None, None),
    };
    let mut scheme: Option<(SchemeKind, usize)> = None;
    let mut rank: Option<usize> = None;
    let mut i0: Option<usize> = None;
    let mut entries: Vec<(usize, usize, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        let ctx = |e: Error| match e {
            Error::Parse(m) => Error::Parse(format!("line {}: {m}", lineno + 1)),
            other => other,
        };
        match head {
            "tower" => tower = Some(parse_tower_line(rest).map_err(ctx)?),
            "precision" => {
                let n: u32 = num(rest, "precision").map_err(ctx)?;
                prec = Some(n);
            }
            "scheme" => {
                let mut it = rest.split_whitespace();
                let kind = match it.next() {
                    Some("gm") | Some("torus") => SchemeKind::Torus,
                    Some("affine") | Some("a") => SchemeKind::AffineSpace,
                    other => return Err(ctx(Error::Parse(format!("unknown scheme {other:?}")))),
                };
                let n: usize = num(it.next().unwrap_or("1"), "dimension").map_err(ctx)?;
                scheme = Some((kind, n));
            }
            "rank" => rank = Some(num(rest, "rank").map_err(ctx)?),
            "unit-index" => i0 = Some(num(rest, "unit index").map_err(ctx)?),
            "entry" => {
                let mut it = rest.splitn(3, char::is_whitespace);
                let i: usize = num(it.next().unwrap_or(""), "row").map_err(ctx)?;
                let j: usize = num(it.next().unwrap_or(""), "column").map_err(ctx)?;
                let expr = it.next().unwrap_or("").trim().to_string();
                if expr.is_empty() {
                    return Err(ctx(Error::Parse("entry without expression".into())));
                }
                entries.push((i, j, expr));
            }
            other => return Err(ctx(Error::Parse(format!("unknown directive '{other}'")))),
        }
    }
    let tower = tower.ok_or_else(|| Error::Parse("missing tower line".into()))?;
    let prec = prec.ok_or_else(|| Error::Parse("missing precision line".into()))?;
    tower.check_precision(prec)?;
    let (kind, n) = scheme.ok_or_else(|| Error::Parse("missing scheme line".into()))?;
    let rank = rank.ok_or_else(|| Error::Parse("missing rank line".into()))?;
    if rank == 0 {
        return Err(Error::Shape("rank must be positive".into()));
    }
    let zero = LaurentElement::zero(&tower, prec, n);
    let mut m = Matrix::from_fn(rank, rank, |_, _| zero.clone());
    let mut seen = std::collections::BTreeSet::new();
    for (i, j, expr) in entries {
        if i >= rank || j >= rank {
            return Err(Error::Shape(format!("entry ({i},{j}) outside a rank-{rank} matrix")));
        }
        if !seen.insert((i, j)) {
            return Err(Error::Parse(format!("entry ({i},{j}) given twice")));
        }
        m.set(i, j, parse_expression(&expr, &tower, prec, n)?);
    }
    SigmaMatrix::new(BaseScheme { kind, n, q: tower.q() }, m, i0)
}

struct Lexer<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }
    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }
    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.s.len() && self.s[self.pos] == b'-' {
            self.pos += 1;
        }
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let t = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
        t.parse().map_err(|_| Error::Parse(format!("expected an integer at offset {start}")))
    }
    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()
    }
    fn power(&mut self) -> Result<i64> {
        if self.eat(b'^') {
            self.int()
        } else {
            Ok(1)
        }
    }
}

/// Parses a Laurent expression in `nvars` variables.
pub fn parse_expression(expr: &str, tower: &Arc<Tower>, prec: u32, nvars: usize) -> Result<LaurentElement> {
    let mut lx = Lexer { s: expr.as_bytes(), pos: 0 };
    let mut acc = LaurentElement::zero(tower, prec, nvars);
    let mut sign = if lx.eat(b'-') { -1 } else { 1 };
    loop {
        let mut coeff = PadicNumber::from_i64(tower, prec, sign);
        let mut exp = vec![0i64; nvars];
        loop {
            match lx.peek() {
                Some(c) if c.is_ascii_digit() => {
                    let v = lx.int()?;
                    let k = lx.power()?;
                    if k < 0 {
                        return Err(Error::Parse("negative powers of integers are not allowed".into()));
                    }
                    coeff = &coeff * &PadicNumber::from_i64(tower, prec, v).pow(k as u64);
                }
                Some(b'[') => {
                    lx.pos += 1;
                    let mut coords = vec![lx.int()?];
                    while lx.eat(b',') {
                        coords.push(lx.int()?);
                    }
                    if !lx.eat(b']') {
                        return Err(Error::Parse("unclosed coordinate literal".into()));
                    }
                    coeff = &coeff * &PadicNumber::from_coords(tower, prec, &coords)?;
                }
                Some(c) if c.is_ascii_alphabetic() => {
                    let id = lx.ident();
                    let k = lx.power()?;
                    match id.as_str() {
                        "p" | "pi" => {
                            if k < 0 {
                                return Err(Error::Parse(format!("negative power of {id}")));
                            }
                            let base = if id == "p" { PadicNumber::from_i64(tower, prec, tower.p() as i64) } else { PadicNumber::pi(tower, prec) };
                            coeff = &coeff * &base.pow(k as u64);
                        }
                        v if v.starts_with('x') => {
                            let idx = if v == "x" {
                                if nvars != 1 {
                                    return Err(Error::Parse("use x1..xn with several variables".into()));
                                }
                                0
                            } else {
                                let i: usize = num(&v[1..], "variable index")?;
                                if i == 0 || i > nvars {
                                    return Err(Error::Parse(format!("variable {v} out of range")));
                                }
                                i - 1
                            };
                            exp[idx] += k;
                        }
                        other => return Err(Error::Parse(format!("unknown symbol '{other}'"))),
                    }
                }
                other => return Err(Error::Parse(format!("unexpected {:?} in '{expr}'", other.map(|c| c as char)))),
            }
            if !lx.eat(b'*') {
                break;
            }
        }
        acc = &acc + &LaurentElement::monomial(exp, &coeff);
        if lx.eat(b'+') {
            sign = 1;
        } else if lx.eat(b'-') {
            sign = -1;
        } else if lx.peek().is_none() {
            break;
        } else {
            return Err(Error::Parse(format!("trailing input in '{expr}'")));
        }
    }
    Ok(acc)
}

/// Canonical descriptor text; `parse_descriptor` inverts it.
pub fn to_descriptor(m: &SigmaMatrix) -> String {
    let t = m.tower();
    let eis: Vec<String> = t.eisenstein().iter().map(|c| c.to_string()).collect();
    let mut s = format!("tower p={} e={} eisenstein={} f=1\n", t.p(), t.e(), eis.join(","));
    let scheme = m.scheme();
    let kind = match scheme.kind {
        SchemeKind::Torus => "gm",
        SchemeKind::AffineSpace => "affine",
    };
    s.push_str(&format!("scheme {kind} {}\n", scheme.n));
    s.push_str(&format!("precision {}\n", m.precision()));
    s.push_str(&format!("rank {}\n", m.rank()));
    if let Some(i0) = m.i0() {
        s.push_str(&format!("unit-index {i0}\n"));
    }
    for i in 0..m.rank() {
        for j in 0..m.rank() {
            let a = m.entry(i, j);
            if !a.is_zero() {
                s.push_str(&format!("entry {i} {j} {}\n", a.to_expression()));
            }
        }
    }
    s
}
