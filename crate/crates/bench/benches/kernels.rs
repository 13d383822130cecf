use criterion::{black_box, criterion_group, criterion_main, Criterion};

use unitroot_core::descriptor::builtin;
use unitroot_core::dwork::{fredholm_det, trace_formula_l};
use unitroot_core::geometry::enumerate_closed_points;
use unitroot_core::kloosterman::{kloosterman_sums, unit_root_l, KloostermanFamily};
use unitroot_core::limiting::{build_limiting, Sign};
use unitroot_core::padic::{p_exp, p_log};
use unitroot_core::weight::CharacterPoint;
use unitroot_core::{BaseScheme, PadicNumber, Tower};

fn padic(c: &mut Criterion) {
    let t = Tower::qp(3).unwrap();
    let x = PadicNumber::from_i64(&t, 16, 3 * 12345);
    let u = PadicNumber::from_i64(&t, 16, 1 + 3 * 777);
    c.bench_function("p_exp 3-adic N=16", |b| b.iter(|| p_exp(black_box(&x)).unwrap()));
    c.bench_function("p_log 3-adic N=16", |b| b.iter(|| p_log(black_box(&u)).unwrap()));
    let r = Tower::ramified(3, vec![3, 0]).unwrap();
    let a = PadicNumber::from_coords(&r, 12, &[5, 7]).unwrap();
    c.bench_function("ramified mul e=2 N=12", |b| b.iter(|| black_box(&a) * black_box(&a)));
}

fn euler_and_trace(c: &mut Criterion) {
    let m = builtin("rank2-gm", 2, 8).unwrap();
    c.bench_function("euler_l rank2-gm p=2 D=6", |b| b.iter(|| m.euler_l(6).unwrap()));
    c.bench_function("fredholm_det rank2-gm p=2 D=6", |b| b.iter(|| fredholm_det(&m, 6, 2, 4).unwrap()));
    let mut g = c.benchmark_group("trace formula");
    g.sample_size(10);
    g.bench_function("trace_formula_l rank2-gm p=3 D=6", |b| {
        let m3 = builtin("rank2-gm", 3, 8).unwrap();
        b.iter(|| trace_formula_l(&m3, 6).unwrap())
    });
    g.finish();
}

fn limiting(c: &mut Criterion) {
    let m = builtin("rank2-gm", 2, 6).unwrap();
    let y = PadicNumber::from_i64(m.tower(), 6, 2);
    c.bench_function("build_limiting Q=5", |b| b.iter(|| build_limiting(&m, 1, Sign::Plus, &y, 5).unwrap()));
}

fn kloosterman(c: &mut Criterion) {
    let fam = KloostermanFamily::new(2, 1, 8).unwrap();
    let pts = enumerate_closed_points(&BaseScheme::torus(2, 1), 2).unwrap();
    c.bench_function("kloosterman_sums deg 2, m <= 4", |b| b.iter(|| kloosterman_sums(&fam, &pts[1], 4).unwrap()));
    let kappa = CharacterPoint::weight(fam.tower(), 1).unwrap();
    c.bench_function("unit_root_l weight 1 D=3", |b| b.iter(|| unit_root_l(&fam, &kappa, 3).unwrap()));
}

criterion_group!(benches, padic, euler_and_trace, limiting, kloosterman);
criterion_main!(benches);
