use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use unitroot_core::descriptor::{builtin_in, parse_descriptor};
use unitroot_core::dwork::trace_formula_l;
use unitroot_core::geometry::enumerate_closed_points;
use unitroot_core::kloosterman::{lpsi_polynomial, slopes_and_unit_root, unit_root_l, KloostermanFamily};
use unitroot_core::limiting::{verify_fibre_commutation, verify_rk1res, Sign};
use unitroot_core::series::{convext_bound_check, norm_c};
use unitroot_core::weight::{components, eval_character, g_coefficients, log_integrality_exponent, verify_two_variable, CharacterPoint};
use unitroot_core::{BaseScheme, Error, LaurentElement, PadicNumber, Result, SigmaMatrix, Tower};

use crate::args::*;

/// A finished experiment: echoed inputs, results, and named assertions.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub inputs: Value,
    pub result: Value,
    pub assertions: Vec<Assertion>,
    pub status: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Report {
    fn new(command: &'static str, inputs: &impl Serialize, result: Value, assertions: Vec<Assertion>) -> Report {
        let status = if assertions.iter().all(|a| a.pass) { "pass" } else { "mismatch" };
        Report { command, inputs: serde_json::to_value(inputs).unwrap_or(Value::Null), result, assertions, status }
    }

    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

fn assertion(name: &str, pass: bool, witness: impl FnOnce() -> String) -> Assertion {
    Assertion { name: name.into(), pass, witness: (!pass).then(witness) }
}

pub fn name(task: &Task) -> &'static str {
    match task {
        Task::EulerL(_) => "euler-l",
        Task::TraceFormula(_) => "trace-formula",
        Task::Rk1res(_) => "rk1res",
        Task::FibreCommute(_) => "fibre-commute",
        Task::WeightEval(_) => "weight-eval",
        Task::TwoVariableL(_) => "two-variable-l",
        Task::Kloosterman(_) => "kloosterman",
        Task::ConvextCheck(_) => "convext-check",
        Task::NormCheck(_) => "norm-check",
    }
}

pub fn run(task: Task) -> Result<Report> {
    match task {
        Task::EulerL(a) => euler(a),
        Task::TraceFormula(a) => trace_formula(a),
        Task::Rk1res(a) => rk1res(a),
        Task::FibreCommute(a) => fibre_commute(a),
        Task::WeightEval(a) => weight_eval(a),
        Task::TwoVariableL(a) => two_variable(a),
        Task::Kloosterman(a) => kloosterman(a),
        Task::ConvextCheck(a) => convext(a),
        Task::NormCheck(a) => norm_check(a),
    }
}

fn load(src: &mut Source) -> Result<SigmaMatrix> {
    match (&src.builtin, &src.matrix) {
        (Some(_), Some(_)) => Err(Error::Parse("give either --builtin or --matrix, not both".into())),
        (None, None) => Err(Error::Parse("a matrix is required: --builtin NAME or --matrix PATH".into())),
        (Some(name), None) => {
            let p = *src.p.get_or_insert(2);
            let n = *src.n.get_or_insert(8);
            builtin_in(name, &Tower::qp(p)?, n)
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            let m = parse_descriptor(&text)?;
            if let Some(p) = src.p {
                if p != m.tower().p() {
                    return Err(Error::Parse(format!("--p {p} disagrees with the descriptor's p = {}", m.tower().p())));
                }
            }
            src.p = Some(m.tower().p());
            match src.n {
                Some(n) if n != m.precision() => m.with_precision(n),
                _ => {
                    src.n = Some(m.precision());
                    Ok(m)
                }
            }
        }
    }
}

/// An integer or a fraction a/b, read in the given tower.
fn number(tower: &Arc<Tower>, prec: u32, text: &str) -> Result<PadicNumber> {
    tower.check_precision(prec)?;
    let parse = |s: &str| s.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad number '{text}'")));
    match text.split_once('/') {
        None => Ok(PadicNumber::from_i64(tower, prec, parse(text)?)),
        Some((a, b)) => {
            let den = PadicNumber::from_i64(tower, prec, parse(b)?);
            Ok(&PadicNumber::from_i64(tower, prec, parse(a)?) * &den.inverse().map_err(|_| Error::Domain(format!("denominator of '{text}' is not a unit")))?)
        }
    }
}

fn point_degree(d: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::Domain("--degree must be at least 1".into()));
    }
    Ok(d)
}

fn sign(s: SignArg) -> Sign {
    match s {
        SignArg::Plus => Sign::Plus,
        SignArg::Minus => Sign::Minus,
    }
}

fn character(tower: &Arc<Tower>, prec: u32, c: &mut CharacterArgs) -> Result<CharacterPoint> {
    if let Some(k) = c.weight {
        return CharacterPoint::weight(tower, k);
    }
    let s = *c.s.get_or_insert(0);
    let t = *c.t.get_or_insert(0);
    let z = c.z.get_or_insert_with(|| "0".into()).clone();
    CharacterPoint::disk(tower, s, t, number(tower, prec, &z)?)
}

fn euler(mut a: EulerArgs) -> Result<Report> {
    let m = load(&mut a.source)?;
    let d = *a.dt.get_or_insert(6);
    let l = m.euler_l(d)?;
    let result = json!({ "scheme": m.scheme().name(), "precision": m.precision(), "degree": d, "coefficients": l.coefficient_strings() });
    Ok(Report::new("euler-l", &a, result, Vec::new()))
}

fn trace_formula(mut a: EulerArgs) -> Result<Report> {
    let m = load(&mut a.source)?;
    let d = *a.dt.get_or_insert(6);
    let (r, _, _) = trace_formula_l(&m, d)?;
    let checks = vec![
        assertion("euler product equals Fredholm quotient", r.equal, || format!("first difference at T^{}", r.first_difference.unwrap_or(0))),
        assertion("at most 4 window doublings", r.doublings <= 4, || format!("{} doublings", r.doublings)),
    ];
    Ok(Report::new("trace-formula", &a, serde_json::to_value(&r).unwrap_or(Value::Null), checks))
}

fn rk1res(mut a: Rk1resArgs) -> Result<Report> {
    let m = load(&mut a.source)?;
    let y = number(m.tower(), m.precision(), a.y.get_or_insert_with(|| "0".into()))?;
    let r = verify_rk1res(&m, *a.s.get_or_insert(0), sign(*a.sign.get_or_insert(SignArg::Plus)), &y, *a.dt.get_or_insert(3), *a.q.get_or_insert(5))?;
    let checks = vec![assertion("Euler product equals limiting-module product", r.equal, || format!("first difference at T^{}", r.first_difference.unwrap_or(0)))];
    Ok(Report::new("rk1res", &a, serde_json::to_value(&r).unwrap_or(Value::Null), checks))
}

fn fibre_commute(mut a: FibreArgs) -> Result<Report> {
    let m = load(&mut a.source)?;
    let y = number(m.tower(), m.precision(), a.y.get_or_insert_with(|| m.tower().p().to_string()))?;
    let r = verify_fibre_commutation(&m, *a.r.get_or_insert(0), sign(*a.sign.get_or_insert(SignArg::Plus)), &y, *a.q.get_or_insert(5), point_degree(*a.degree.get_or_insert(2))?)?;
    let checks = vec![assertion("fibre of limiting module equals specialized U-series", r.equal, || r.witness.clone().unwrap_or_default())];
    Ok(Report::new("fibre-commute", &a, serde_json::to_value(&r).unwrap_or(Value::Null), checks))
}

fn weight_eval(mut a: WeightArgs) -> Result<Report> {
    let p = *a.p.get_or_insert(2);
    let n = *a.n.get_or_insert(8);
    let tower = Tower::qp(p)?.with_residue_degree(*a.f.get_or_insert(1))?;
    tower.check_precision(n)?;
    let kappa = character(&tower, n, &mut a.character)?;
    let r = number(&tower, n, a.at.get_or_insert_with(|| "1".into()))?;
    let v = eval_character(&kappa, &r)?;
    let comps: Vec<[u64; 2]> = components(&tower)?.into_iter().map(|(s, t)| [s, t]).collect();
    let result = json!({
        "character": kappa.to_string(),
        "component": [kappa.s, kappa.t],
        "components": comps,
        "log_integrality_exponent": log_integrality_exponent(&tower, n)?,
        "precision": n,
        "value": v.to_string(),
        "digits": v.signed_coords().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
    });
    Ok(Report::new("weight-eval", &a, result, Vec::new()))
}

fn two_variable(mut a: TwoVariableArgs) -> Result<Report> {
    let m = load(&mut a.source)?;
    let y = number(m.tower(), m.precision(), a.y.get_or_insert_with(|| m.tower().p().to_string()))?;
    let r = verify_two_variable(&m, *a.s.get_or_insert(0), *a.t.get_or_insert(0), &y, *a.dt.get_or_insert(3), *a.du.get_or_insert(5))?;
    let checks = vec![assertion("H(T, iota(y)) equals twisted L", r.equal, || format!("first difference at T^{}", r.first_difference.unwrap_or(0)))];
    Ok(Report::new("two-variable-l", &a, serde_json::to_value(&r).unwrap_or(Value::Null), checks))
}

fn kloosterman(mut a: KloostermanArgs) -> Result<Report> {
    let p = *a.p.get_or_insert(2);
    let n = *a.n.get_or_insert(1);
    let digits = *a.digits.get_or_insert(8);
    let deg = point_degree(*a.degree.get_or_insert(1))?;
    let m_max = *a.m_max.get_or_insert(2 * (n + 1));
    let d = *a.dt.get_or_insert(3);
    let fam = KloostermanFamily::new(p, n, digits)?;
    let base = Tower::qp(p)?;
    if a.character.weight.is_none() && a.character.z.is_none() && a.character.s.is_none() && a.character.t.is_none() {
        a.character.weight = Some(1);
    }
    let kappa = character(&base, digits, &mut a.character)?;
    let mut points = Vec::new();
    let mut checks = Vec::new();
    for y in enumerate_closed_points(&BaseScheme::torus(p, 1), deg)? {
        let l = lpsi_polynomial(&fam, &y, m_max)?;
        let root = slopes_and_unit_root(&l.coeffs, y.degree());
        let unit = match &root {
            Ok(u) => serde_json::to_value(u).unwrap_or(Value::Null),
            Err(e) => json!({ "error": e.to_string() }),
        };
        checks.push(assertion(&format!("slopes at y = [{y}]"), root.is_ok(), || root.as_ref().err().map(|e| e.to_string()).unwrap_or_default()));
        if let Ok(u) = &root {
            checks.push(assertion(&format!("unit root residual at y = [{y}]"), u.residual_zero, || "nonzero residual".into()));
        }
        points.push(json!({
            "y": y.to_string(),
            "degree": y.degree(),
            "sums": l.sums,
            "polynomial": l.recognized.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            "unit_root": unit,
        }));
    }
    let series = unit_root_l(&fam, &kappa, d)?;
    let result = json!({
        "tower": fam.tower().to_string(),
        "precision": fam.precision(),
        "points": points,
        "character": kappa.to_string(),
        "unit_root_l": series.coefficient_strings(),
    });
    Ok(Report::new("kloosterman", &a, result, checks))
}

fn convext(mut a: ConvextArgs) -> Result<Report> {
    let m = load(&mut a.source)?;
    let m_max = *a.m_max.get_or_insert(12);
    let du = *a.du.get_or_insert(4);
    let g = g_coefficients(&m, *a.s.get_or_insert(0), *a.t.get_or_insert(0), m_max, du)?;
    let rep = convext_bound_check(&g, m_max, du)?;
    let bad = rep.rows.iter().find(|r| r.margin.is_some_and(|x| x < 0.into()));
    let checks = vec![assertion("ord_p(beta) >= -2m", bad.is_none(), || format!("row m = {}", bad.map(|r| r.m).unwrap_or(0)))];
    Ok(Report::new("convext-check", &a, serde_json::to_value(&rep).unwrap_or(Value::Null), checks))
}

fn norm_check(mut a: NormArgs) -> Result<Report> {
    let m = load(&mut a.source)?;
    let t = m.tower().clone();
    let prec = m.precision();
    let nvars = m.scheme().n;
    let entries: Vec<(usize, usize, &LaurentElement)> =
        (0..m.rank()).flat_map(|i| (0..m.rank()).map(move |j| (i, j))).map(|(i, j)| (i, j, m.entry(i, j))).collect();
    let max_deg = entries.iter().filter(|(_, _, g)| g.is_polynomial()).map(|(_, _, g)| g.max_abs_degree()).max().unwrap_or(0);
    let c = *a.c.get_or_insert(max_deg as u32 + 1);
    let amax = *a.alpha.get_or_insert(8);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (i, j, g) in entries {
        if g.is_zero() {
            continue;
        }
        let Some(d) = g.reduced_degree() else {
            rows.push(json!({ "entry": [i, j], "skipped": "entry lies in pi R[X]", "norm": norm_c(g, c).ok().flatten() }));
            continue;
        };
        if !g.is_polynomial() {
            rows.push(json!({ "entry": [i, j], "skipped": "not a polynomial" }));
            continue;
        }
        if c as i64 <= g.max_abs_degree() {
            return Err(Error::Domain(format!("c = {c} must exceed the degree {} of entry ({i}, {j})", g.max_abs_degree())));
        }
        let mut worst = None;
        for alpha in 0..=amax as i64 {
            let k = (alpha + d).div_euclid(c as i64) as u32;
            if k >= prec {
                break;
            }
            let mut e = vec![0; nvars];
            e[0] = alpha;
            let shifted = g.mul_monomial(&e).scale(&PadicNumber::pi(&t, prec).pow(k as u64));
            let v = norm_c(&shifted, c)?;
            if v != Some(0) && worst.is_none() {
                worst = Some((alpha, v));
            }
        }
        checks.push(assertion(&format!("entry ({i}, {j}) basis elements have norm 1"), worst.is_none(), || format!("{worst:?}")));
        rows.push(json!({ "entry": [i, j], "reduced_degree": d, "norm": norm_c(g, c)? }));
    }
    Ok(Report::new("norm-check", &a, json!({ "c": c, "entries": rows }), checks))
}
