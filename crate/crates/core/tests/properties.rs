use num_rational::Ratio;
use proptest::prelude::*;

use unitroot_core::descriptor::{builtin, builtin_names, parse_descriptor, to_descriptor};
use unitroot_core::dwork::theta_apply;
use unitroot_core::geometry::enumerate_closed_points;
use unitroot_core::kloosterman::{kloosterman_sums, lpsi_polynomial, slopes_and_unit_root, unit_root_at, unit_root_l, KloostermanFamily};
use unitroot_core::laurent::LaurentElement;
use unitroot_core::padic::{p_exp, p_log, unit_pow};
use unitroot_core::series::{dlog_coefficients, newton_polygon, norm_c, series_from_dlog, Slope, SlopeNormalization};
use unitroot_core::sigma::{euler_product_with, spread, unit_root_split, verify_split};
use unitroot_core::weight::{decompose_unit, eval_character, CharacterPoint};
use unitroot_core::{BaseScheme, PadicNumber, SigmaMatrix, Tower, TruncatedSeries};

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5])
}

fn unit(p: u64, k: i64) -> i64 {
    if k % p as i64 == 0 {
        k + 1
    } else {
        k
    }
}

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg(48))]

    #[test]
    fn exp_log_round_trip(p in prime(), k in 1i64..5000) {
        let t = Tower::qp(p).unwrap();
        let step = if p == 2 { 4 } else { p as i64 };
        let x = PadicNumber::from_i64(&t, 12, step * k);
        prop_assert_eq!(p_log(&p_exp(&x).unwrap()).unwrap(), x.clone());
        let u = PadicNumber::from_i64(&t, 12, 1 + step * k);
        prop_assert_eq!(p_exp(&p_log(&u).unwrap()).unwrap(), u);
    }

    #[test]
    fn unit_pow_is_additive(p in prime(), k in 0i64..5000, a in -40i64..40, b in -40i64..40) {
        let t = Tower::qp(p).unwrap();
        let step = if p == 2 { 4 } else { p as i64 };
        let x = PadicNumber::from_i64(&t, 10, 1 + step * k);
        let y = |n: i64| PadicNumber::from_i64(&t, 10, n);
        let lhs = unit_pow(&x, &y(a + b)).unwrap();
        let rhs = &unit_pow(&x, &y(a)).unwrap() * &unit_pow(&x, &y(b)).unwrap();
        prop_assert_eq!(&lhs, &rhs);
        prop_assert_eq!(lhs, x.pow_i64(a + b).unwrap());
    }

    #[test]
    fn teichmuller_is_multiplicative(p in prop::sample::select(vec![2u64, 3]), f in 1usize..=3, i in 1u64..1000, j in 1u64..1000) {
        let t = Tower::qp(p).unwrap().with_residue_degree(f).unwrap();
        let ff = t.residue_field().clone();
        let a = ff.decode(1 + i % (ff.size() - 1));
        let b = ff.decode(1 + j % (ff.size() - 1));
        let wa = PadicNumber::teichmuller(&t, 8, &a);
        let wb = PadicNumber::teichmuller(&t, 8, &b);
        prop_assert_eq!(&wa * &wb, PadicNumber::teichmuller(&t, 8, &ff.mul(&a, &b)));
    }

    #[test]
    fn ord_is_additive(p in prime(), a in 0u32..8, b in 0u32..8, u in 1i64..500, v in 1i64..500) {
        let t = Tower::qp(p).unwrap();
        let x = PadicNumber::from_i64(&t, 20, (p as i64).pow(a) * unit(p, u));
        let y = PadicNumber::from_i64(&t, 20, (p as i64).pow(b) * unit(p, v));
        prop_assert_eq!((&x * &y).ord_pi(), Some(a + b));
    }

    #[test]
    fn zeta_counts(q in prime(), n in 1usize..=2, torus in any::<bool>()) {
        let x = if torus { BaseScheme::torus(q, n) } else { BaseScheme::affine(q, n) };
        let mmax = if n == 2 { 2 } else { 4 };
        let pts = enumerate_closed_points(&x, mmax).unwrap();
        for m in 1..=mmax {
            let s: u128 = pts.iter().filter(|pt| m % pt.degree() == 0).map(|pt| pt.degree() as u128).sum();
            prop_assert_eq!(s, x.count_points(m as u32));
        }
    }

    #[test]
    fn dlog_inverts_series_from_dlog(p in prime(), ks in prop::collection::vec(-1000i64..1000, 5)) {
        let t = Tower::qp(p).unwrap();
        // Integral power sums of a rank-one unit root make the recurrence exact.
        let a = PadicNumber::from_i64(&t, 12, unit(p, ks[0]));
        let k: Vec<PadicNumber> = (1..=5).map(|m| a.pow(m)).collect();
        let l = series_from_dlog(&k, 5).unwrap();
        let back = dlog_coefficients(&l).unwrap();
        for (x, y) in back.iter().zip(&k) {
            prop_assert!(x.eq_mod(y, l.precision()));
        }
        let direct = TruncatedSeries::from_t_coeffs((0..=5).map(|m| a.pow(m)).collect()).unwrap();
        prop_assert!(l.eq_mod(&direct, 5, l.precision()));
    }

    #[test]
    fn newton_polygon_of_a_product(p in prime(), e in prop::collection::vec(0u32..4, 3), u in prop::collection::vec(1i64..100, 3)) {
        let t = Tower::qp(p).unwrap();
        let mut poly = vec![PadicNumber::one(&t, 20)];
        for (ei, ui) in e.iter().zip(&u) {
            let r = PadicNumber::from_i64(&t, 20, (p as i64).pow(*ei) * unit(p, *ui));
            let mut next = vec![PadicNumber::zero(&t, 20); poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i] = &next[i] + c;
                next[i + 1] = &next[i + 1] - &(c * &r);
            }
            poly = next;
        }
        let slopes = newton_polygon(&poly, 3, SlopeNormalization::P).unwrap();
        let mut sorted = e.clone();
        sorted.sort();
        let mut want: Vec<Slope> = Vec::new();
        for s in sorted {
            match want.last_mut() {
                Some(l) if l.slope == Ratio::from_integer(s as i64) => l.multiplicity += 1,
                _ => want.push(Slope { slope: Ratio::from_integer(s as i64), multiplicity: 1 }),
            }
        }
        prop_assert_eq!(slopes, want);
    }

    #[test]
    fn norm_c_basis_and_ultrametric(p in prime(), c in 1u32..4, a in 0i64..12, b in 0i64..12, u in 1i64..50) {
        let t = Tower::qp(p).unwrap();
        let basis = |k: i64| LaurentElement::monomial(vec![k], &PadicNumber::from_i64(&t, 20, (p as i64).pow((k / c as i64) as u32) * unit(p, u)));
        prop_assert_eq!(norm_c(&basis(a), c).unwrap(), Some(0));
        let f = &basis(a) + &LaurentElement::monomial(vec![b], &PadicNumber::from_i64(&t, 20, unit(p, u + 1)));
        let g = LaurentElement::monomial(vec![b], &PadicNumber::from_i64(&t, 20, p as i64));
        let nf = norm_c(&f, c).unwrap().unwrap();
        let ng = norm_c(&g, c).unwrap().unwrap();
        if let Some(s) = norm_c(&(&f + &g), c).unwrap() {
            prop_assert!(s <= nf.max(ng));
        }
    }

    #[test]
    fn norm_c_orthonormal_basis(p in prime(), bs in prop::collection::vec(-30i64..30, 4), c in 4u32..8, a in 0i64..12) {
        let t = Tower::qp(p).unwrap();
        prop_assume!(bs.iter().any(|b| b % p as i64 != 0));
        let d = bs.iter().rposition(|b| b % p as i64 != 0).unwrap() as i64;
        let shift = PadicNumber::from_i64(&t, 20, (p as i64).pow(((a + d) / c as i64) as u32));
        let g = LaurentElement::from_terms(&t, 20, 1, bs.iter().enumerate().map(|(i, &b)| (vec![i as i64 + a], &PadicNumber::from_i64(&t, 20, b) * &shift))).unwrap();
        prop_assert_eq!(norm_c(&g, c).unwrap(), Some(0));
    }

    #[test]
    fn norm_c_submultiplicative_up_to_floor(p in prime(), fs in prop::collection::vec(-30i64..30, 4), gs in prop::collection::vec(-30i64..30, 4), c in 1u32..5) {
        let t = Tower::qp(p).unwrap();
        let poly = |v: &[i64]| LaurentElement::from_terms(&t, 20, 1, v.iter().enumerate().map(|(i, &b)| (vec![i as i64], PadicNumber::from_i64(&t, 20, b)))).unwrap();
        let (f, g) = (poly(&fs), poly(&gs));
        prop_assume!(!f.is_zero() && !g.is_zero());
        let nf = norm_c(&f, c).unwrap().unwrap();
        let ng = norm_c(&g, c).unwrap().unwrap();
        if let Some(n) = norm_c(&(&f * &g), c).unwrap() {
            prop_assert!(n <= nf + ng + 1);
        }
    }

    #[test]
    fn theta_after_sigma_is_q(p in prop::sample::select(vec![2u64, 3]), cs in prop::collection::vec(-50i64..50, 5)) {
        let x = BaseScheme::torus(p, 1);
        let t = Tower::qp(p).unwrap();
        let a = LaurentElement::from_terms(&t, 8, 1, cs.iter().enumerate().map(|(i, &c)| (vec![i as i64 - 2], PadicNumber::from_i64(&t, 8, c)))).unwrap();
        let back = theta_apply(&a.sigma_apply(p, 1), &x).unwrap();
        prop_assert_eq!(back, a.scale(&PadicNumber::from_i64(&t, 8, p as i64)));
    }

    #[test]
    fn decompose_reassembles(p in prime(), f in 1usize..=2, k in 1i64..100000) {
        let t = Tower::qp(p).unwrap().with_residue_degree(f).unwrap();
        let r = PadicNumber::from_i64(&t, 10, unit(p, k));
        let (v, u) = decompose_unit(&r).unwrap();
        prop_assert_eq!(&v * &u, r);
        prop_assert!(u.is_one_unit());
        prop_assert_eq!(v.pow(t.q().pow(f as u32) - 1), PadicNumber::one(&t, 10));
    }
}

proptest! {
    #![proptest_config(cfg(16))]

    #[test]
    fn eval_character_is_multiplicative(p in prop::sample::select(vec![2u64, 3]), s in 0u64..2, tc in 0u64..2, z in 0i64..200, a in 1i64..1000, b in 1i64..1000) {
        let t = Tower::qp(p).unwrap();
        let (s, tc) = if p == 2 { (s, 0) } else { (0, tc) };
        let kappa = CharacterPoint::disk(&t, s, tc, PadicNumber::from_i64(&t, 8, p as i64 * z)).unwrap();
        let r1 = PadicNumber::from_i64(&t, 8, unit(p, a));
        let r2 = PadicNumber::from_i64(&t, 8, unit(p, b));
        let lhs = eval_character(&kappa, &(&r1 * &r2)).unwrap();
        let rhs = &eval_character(&kappa, &r1).unwrap() * &eval_character(&kappa, &r2).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn tensor_with_constant_rescales_t(p in prop::sample::select(vec![2u64, 3]), name in prop::sample::select(vec!["rank1-gm", "rank2-gm"]), c in 1i64..500) {
        let m = builtin(name, p, 6).unwrap();
        let t = m.tower().clone();
        let c = PadicNumber::from_i64(&t, 6, c);
        let k = SigmaMatrix::scalar(m.scheme(), LaurentElement::constant(&c, 1)).unwrap();
        let lhs = m.tensor(&k).unwrap().euler_l(3).unwrap();
        let base = m.euler_l(3).unwrap();
        let rescaled = TruncatedSeries::from_t_coeffs((0..=3).map(|i| base.t_coeff(i) * &c.pow(i as u64)).collect()).unwrap();
        prop_assert!(lhs.eq_mod(&rescaled, 3, 6));
    }

    #[test]
    fn unit_root_l_at_integer_weight(k in -3i64..=3) {
        let fam = KloostermanFamily::new(2, 1, 8).unwrap();
        let t = fam.tower().clone();
        let l = unit_root_l(&fam, &CharacterPoint::weight(&t, k).unwrap(), 2).unwrap();
        let want = euler_product_with(&BaseScheme::torus(2, 1), 2, |pt| {
            let a = unit_root_at(&fam, pt)?.alpha0.pow_i64(k)?;
            spread(&[PadicNumber::one(&t, 8), -&a], pt.degree(), 2, &t, 8)
        }).unwrap();
        prop_assert!(l.eq_mod(&want, 2, 8));
    }
}

#[test]
fn norm_c_is_not_power_multiplicative() {
    let t = Tower::qp(2).unwrap();
    let x = LaurentElement::var(&t, 8, 1, 0);
    assert_eq!(norm_c(&x, 2).unwrap(), Some(0));
    assert_eq!(norm_c(&(&x * &x), 2).unwrap(), Some(1));
    let pix = LaurentElement::monomial(vec![2], &PadicNumber::from_i64(&t, 8, 2));
    assert_eq!(norm_c(&pix, 2).unwrap(), Some(0));
    assert_eq!(norm_c(&LaurentElement::one(&t, 8, 1), 3).unwrap(), Some(0));
}

#[test]
fn descriptor_round_trip() {
    for p in [2, 3, 5] {
        for name in builtin_names() {
            let m = builtin(name, p, 7).unwrap();
            let back = parse_descriptor(&to_descriptor(&m)).unwrap();
            assert_eq!(back, m, "{name} at p = {p}");
        }
    }
}

#[test]
fn split_is_standard_and_normal() {
    for p in [2, 3] {
        let m = builtin("rank2-split-gm", p, 5).unwrap();
        let s = unit_root_split(&m).unwrap();
        assert!(s.m_std.flags().standard_normal && s.m_std.flags().one_normal);
        assert!(verify_split(&m, 2).unwrap().equal);
    }
}

#[test]
fn kloosterman_weil_bound() {
    for p in [2u64, 3] {
        let fam = KloostermanFamily::new(p, 1, 6).unwrap();
        for pt in enumerate_closed_points(&BaseScheme::torus(p, 1), 2).unwrap() {
            let k = kloosterman_sums(&fam, &pt, 3).unwrap();
            for (m, c) in k.counts.iter().enumerate() {
                let size = (p as f64).powi((pt.degree() * (m + 1)) as i32);
                let total: u64 = c.iter().sum();
                assert_eq!(total as f64, size - 1.0);
                if let Some(ks) = &k.integers {
                    assert!((ks[m] as f64).abs() <= 2.0 * size.sqrt(), "K_{} = {}", m + 1, ks[m]);
                }
            }
        }
    }
}

#[test]
fn kloosterman_slopes() {
    for p in [2u64, 3] {
        let fam = KloostermanFamily::new(p, 1, 8).unwrap();
        for pt in enumerate_closed_points(&BaseScheme::torus(p, 1), 2).unwrap() {
            let u = unit_root_at(&fam, &pt).unwrap();
            let r = pt.degree() as i64;
            let slopes: Vec<Ratio<i64>> = u.slopes.iter().map(|s| s.slope).collect();
            assert_eq!(slopes, vec![Ratio::from_integer(0), Ratio::from_integer(r)], "p = {p}, point {:?}", pt.encoding());
            assert!(u.residual_zero);
        }
    }
    let fam = KloostermanFamily::new(2, 2, 8).unwrap();
    let pt = &enumerate_closed_points(&BaseScheme::torus(2, 1), 1).unwrap()[0];
    let u = unit_root_at(&fam, pt).unwrap();
    assert_eq!(u.slopes.iter().map(|s| s.slope).collect::<Vec<_>>(), (0..3).map(Ratio::from_integer).collect::<Vec<_>>());
}

#[test]
fn product_of_reciprocal_roots() {
    // For n = 1 the reciprocal roots multiply to p^deg up to sign.
    let fam = KloostermanFamily::new(2, 1, 8).unwrap();
    for pt in enumerate_closed_points(&BaseScheme::torus(2, 1), 2).unwrap() {
        let l = lpsi_polynomial(&fam, &pt, 4).unwrap();
        let top = l.recognized[2].0[0];
        assert_eq!(top, 2i64.pow(pt.degree() as u32));
        let u = slopes_and_unit_root(&l.coeffs, pt.degree()).unwrap();
        let other = l.coeffs[2].div_exact(&u.alpha0).unwrap();
        assert_eq!(other.ord_pi(), Some(pt.degree() as u32));
    }
}
