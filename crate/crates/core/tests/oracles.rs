//! Values checked against computations that do not go through the library:
//! rational partial sums, brute-force root finding, and a bit-level GF(2^k).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use unitroot_core::descriptor::builtin;
use unitroot_core::geometry::enumerate_closed_points;
use unitroot_core::kloosterman::{artin_schreier_count, lpsi_polynomial, slopes_and_unit_root, unit_root_l, KloostermanFamily};
use unitroot_core::laurent::LaurentElement;
use unitroot_core::limiting::{build_limiting, LimitingIndex, Sign};
use unitroot_core::padic::{p_exp, unit_pow};
use unitroot_core::weight::CharacterPoint;
use unitroot_core::{BaseScheme, PadicNumber, Tower};

fn residue_mod(x: &BigRational, p: u64, k: u32) -> i64 {
    let m = BigInt::from(p).pow(k);
    let den = x.denom().mod_floor(&m);
    let inv = den.modpow(&(BigInt::from(p).pow(k - 1) * BigInt::from(p - 1) - BigInt::one()), &m);
    (x.numer() * inv).mod_floor(&m).to_i64().unwrap()
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, b| a * BigInt::from(b))
}

#[test]
fn exp_of_three_mod_81() {
    let oracle: BigRational = (0..40u32).map(|k| BigRational::new(BigInt::from(3).pow(k), factorial(k))).fold(BigRational::zero(), |a, b| a + b);
    let expected = residue_mod(&oracle, 3, 4);
    assert_eq!(expected, 67);
    let t = Tower::qp(3).unwrap();
    assert_eq!(p_exp(&PadicNumber::from_i64(&t, 4, 3)).unwrap(), PadicNumber::from_i64(&t, 4, 67));
}

#[test]
fn exp_of_four_mod_256() {
    let oracle: BigRational = (0..80u32).map(|k| BigRational::new(BigInt::from(4).pow(k), factorial(k))).fold(BigRational::zero(), |a, b| a + b);
    let t = Tower::qp(2).unwrap();
    assert_eq!(p_exp(&PadicNumber::from_i64(&t, 8, 4)).unwrap(), PadicNumber::from_i64(&t, 8, residue_mod(&oracle, 2, 8)));
}

/// Odd roots of X² + c₁X + c₂ modulo 2^k by exhaustion.
fn odd_roots(c1: i64, c2: i64, k: u32) -> Vec<i64> {
    let m = 1i64 << k;
    (0..m).filter(|x| x % 2 == 1 && (x * x + c1 * x + c2).rem_euclid(m) == 0).collect()
}

#[test]
fn unit_root_of_one_plus_t_plus_two_t_squared() {
    assert_eq!(odd_roots(1, 2, 5), vec![5]);
    assert_eq!(odd_roots(1, 2, 8), vec![165]);
    let t = Tower::qp(2).unwrap();
    let poly: Vec<PadicNumber> = [1, 1, 2].iter().map(|&c| PadicNumber::from_i64(&t, 8, c)).collect();
    let u = slopes_and_unit_root(&poly, 1).unwrap();
    assert!(u.alpha0.eq_mod(&PadicNumber::from_i64(&t, 8, 5), 5));
    assert_eq!(u.alpha0, PadicNumber::from_i64(&t, 8, 165));
}

/// GF(2^k) as bit vectors modulo a fixed irreducible polynomial.
struct Gf2k {
    k: u32,
    modulus: u32,
}

impl Gf2k {
    fn new(k: u32) -> Gf2k {
        let modulus = match k {
            1 => 0b10,
            2 => 0b111,
            3 => 0b1011,
            4 => 0b10011,
            6 => 0b1000011,
            8 => 0x11b,
            9 => 0x211,
            12 => 0x1053,
            _ => panic!("no modulus for degree {k}"),
        };
        let f = Gf2k { k, modulus };
        for a in 1..f.size() {
            assert_eq!(f.pow(a, f.size() - 1), 1, "modulus of degree {k} is not irreducible");
        }
        f
    }
    fn size(&self) -> u32 {
        1 << self.k
    }
    fn mul(&self, mut a: u32, mut b: u32) -> u32 {
        let mut r = 0;
        while b != 0 {
            if b & 1 == 1 {
                r ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & (1 << self.k) != 0 {
                a ^= self.modulus;
            }
        }
        r
    }
    fn pow(&self, a: u32, mut e: u32) -> u32 {
        let (mut base, mut acc) = (a, 1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
    fn inv(&self, a: u32) -> u32 {
        self.pow(a, self.size() - 2)
    }
    fn trace(&self, a: u32) -> u32 {
        let mut t = 0;
        let mut x = a;
        for _ in 0..self.k {
            t ^= x;
            x = self.mul(x, x);
        }
        t
    }
    /// Root of the F_2-polynomial with bit pattern h.
    fn root(&self, h: u32) -> u32 {
        (1..self.size())
            .find(|&x| {
                let mut acc = 0;
                for i in (0..32 - h.leading_zeros()).rev() {
                    acc = self.mul(acc, x) ^ ((h >> i) & 1);
                }
                acc == 0
            })
            .expect("polynomial has a root")
    }
}

/// K_m(y) for n = 1 at the point cut out by h, with deg h = r.
fn kloosterman_oracle(h: u32, r: u32, m: u32) -> i64 {
    let f = Gf2k::new(r * m);
    let y = if r * m == 1 { 1 } else { f.root(h) };
    (1..f.size()).map(|x| if f.trace(x ^ f.mul(y, f.inv(x))) == 0 { 1 } else { -1 }).sum()
}

/// Unit root mod 2^8 at the point cut out by h.
fn alpha_oracle(h: u32, r: u32) -> i64 {
    let k1 = kloosterman_oracle(h, r, 1);
    let k2 = kloosterman_oracle(h, r, 2);
    let c2 = (k1 * k1 + k2) / 2;
    let roots = odd_roots(k1, c2, 8);
    assert_eq!(roots.len(), 1);
    roots[0]
}

#[test]
fn kloosterman_sums_against_bit_field() {
    assert_eq!(kloosterman_oracle(0b11, 1, 1), 1);
    assert_eq!(kloosterman_oracle(0b11, 1, 2), 3);
    let fam = KloostermanFamily::new(2, 1, 8).unwrap();
    let pts = enumerate_closed_points(&BaseScheme::torus(2, 1), 2).unwrap();
    let deg2 = pts.iter().find(|p| p.degree() == 2).unwrap();
    let lib = unitroot_core::kloosterman::kloosterman_sums(&fam, deg2, 4).unwrap();
    let want: Vec<i64> = (1..=4).map(|m| kloosterman_oracle(0b111, 2, m)).collect();
    assert_eq!(lib.integers.unwrap(), want);
    let l = lpsi_polynomial(&fam, deg2, 4).unwrap();
    assert_eq!(l.recognized.iter().map(|r| r.0[0]).collect::<Vec<_>>(), vec![1, -1, 4]);
}

/// #{(x, z) : x ≠ 0, z² + z = x + y/x} over F_{2^{rm}}.
fn artin_schreier_oracle(h: u32, r: u32, m: u32) -> u64 {
    let f = Gf2k::new(r * m);
    let y = if r * m == 1 { 1 } else { f.root(h) };
    (1..f.size()).filter(|&x| f.trace(x ^ f.mul(y, f.inv(x))) == 0).count() as u64 * 2
}

#[test]
fn artin_schreier_points_match_both_characters() {
    let fam = KloostermanFamily::new(2, 1, 8).unwrap();
    let pts = enumerate_closed_points(&BaseScheme::torus(2, 1), 2).unwrap();
    let cases = [(0b11, 1), (0b111, 2)];
    for (pt, (h, r)) in pts.iter().zip(cases) {
        for m in 1..=3 {
            let n = artin_schreier_count(&fam, pt, m as usize).unwrap();
            assert_eq!(n, artin_schreier_oracle(h, r, m));
            // Trivial character gives q^m − 1, the nontrivial one gives K_m.
            assert_eq!(n as i64, (1i64 << (r * m)) - 1 + kloosterman_oracle(h, r, m));
        }
    }
    assert_eq!((1..=3).map(|m| artin_schreier_count(&fam, &pts[0], m).unwrap()).collect::<Vec<_>>(), vec![2, 6, 2]);
}

#[test]
fn weight_one_unit_root_l() {
    let a1 = alpha_oracle(0b11, 1);
    let aw = alpha_oracle(0b111, 2);
    let a3 = alpha_oracle(0b1011, 3) + alpha_oracle(0b1101, 3);
    let want = [1, a1, a1 * a1 + aw, a1 * a1 * a1 + a1 * aw + a3].map(|c| c.rem_euclid(256));
    assert_eq!(want, [1, 165, 198, 108]);
    let fam = KloostermanFamily::new(2, 1, 8).unwrap();
    let t = fam.tower().clone();
    let l = unit_root_l(&fam, &CharacterPoint::weight(&t, 1).unwrap(), 3).unwrap();
    for (i, c) in want.iter().enumerate() {
        assert_eq!(*l.t_coeff(i), PadicNumber::from_i64(&t, 8, *c));
    }
    let triv = unit_root_l(&fam, &CharacterPoint::trivial(&t, 8), 3).unwrap();
    assert_eq!(triv.coefficient_strings(), vec!["1", "1", "2", "4"]);
}

fn binomial(c: &BigRational, k: u32) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, j| acc * (c - BigRational::from_integer(BigInt::from(j)))) / BigRational::from_integer(factorial(k))
}

/// Coefficients of (1 + 2x)^c mod 2^n, by the binomial theorem over Q.
fn one_plus_two_x_pow(c: &BigRational, n: u32, terms: u32) -> Vec<i64> {
    let v: Vec<i64> = (0..terms).map(|k| residue_mod(&(binomial(c, k) * BigRational::from_integer(BigInt::from(2).pow(k))), 2, n)).collect();
    assert!(v[v.len() - 4..].iter().all(|&x| x == 0), "oracle truncated too early");
    v
}

#[test]
fn limiting_column_at_two_thirds() {
    let n = 6;
    let m = builtin("rank2-gm", 2, n).unwrap();
    let t = m.tower().clone();
    let y = &PadicNumber::from_i64(&t, n, 2) * &PadicNumber::from_i64(&t, n, 3).inverse().unwrap();
    let b = build_limiting(&m, 0, Sign::Plus, &y, 3).unwrap();
    let ix = LimitingIndex::new(1, 3);
    let col = ix.position(&[1]).unwrap();
    // Column δ₁ at r = 0 is (1+2x)^{y−1}·(2x² + 2Z).
    let c = BigRational::new(BigInt::from(-1), BigInt::from(3));
    let coeffs = one_plus_two_x_pow(&c, n, 40);
    let poly = |shift: i64| {
        LaurentElement::from_terms(&t, n, 1, coeffs.iter().enumerate().map(|(k, &a)| (vec![k as i64 + shift], PadicNumber::from_i64(&t, n, 2 * a)))).unwrap()
    };
    assert_eq!(*b.entry(ix.position(&[0]).unwrap(), col), poly(2));
    assert_eq!(*b.entry(col, col), poly(0));
    assert!(b.entry(ix.position(&[2]).unwrap(), col).is_zero());
    assert!(y.ord_pi() == Some(1));
}

#[test]
fn unit_pow_at_rational_exponent() {
    let t = Tower::qp(3).unwrap();
    let x = PadicNumber::from_i64(&t, 8, 4);
    let y = &PadicNumber::from_i64(&t, 8, 1) * &PadicNumber::from_i64(&t, 8, 2).inverse().unwrap();
    // The square root of 4 in 1 + 3Z_3 is −2.
    assert_eq!(unit_pow(&x, &y).unwrap(), PadicNumber::from_i64(&t, 8, -2));
}
