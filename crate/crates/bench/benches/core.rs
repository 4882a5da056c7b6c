use cartier_lab_bench::{drw_pair, int_matrix, witt_pair};
use cartier_lab_core::cartier::{hom_cartier, EtaCartierComplex};
use cartier_lab_core::dieudonne::{hom_dieudonne, DieudonneModule};
use cartier_lab_core::drw::{normalize, Expr};
use cartier_lab_core::linalg::smith_normal_form;
use cartier_lab_core::witt::structure_polys;
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn witt(c: &mut Criterion) {
    let mut g = c.benchmark_group("witt_mul");
    for (p, n) in [(2u64, 4usize), (3, 4), (5, 3)] {
        structure_polys(p, n).expect("structure polynomials");
        let (a, b) = witt_pair(p, n, 1);
        g.bench_with_input(BenchmarkId::from_parameter(format!("p{p}_n{n}")), &(a, b), |bch, (a, b)| {
            bch.iter(|| black_box(a.mul(b).unwrap()))
        });
    }
    g.finish();
}

fn drw(c: &mut Criterion) {
    let (a, w) = drw_pair(3, 3, 12, 2);
    c.bench_function("drw_product_p3_m3", |b| b.iter(|| black_box(a.mul(&w).unwrap())));
    let x = Expr::x();
    let e = Expr::prod(vec![x.clone().v().d(), Expr::x_pow(2).f().d(), Expr::sum(vec![x.clone(), Expr::int(2)]).v()]);
    c.bench_function("drw_normalize_p2_m4", |b| b.iter(|| black_box(normalize(2, 4, 64, &e).unwrap())));
}

fn snf(c: &mut Criterion) {
    let mut g = c.benchmark_group("smith_normal_form");
    for n in [8usize, 16, 24] {
        let m = int_matrix(n, n, 20, n as u64);
        g.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| black_box(smith_normal_form(m))));
    }
    g.finish();
}

fn hom(c: &mut Criterion) {
    let ss = DieudonneModule::supersingular(3, 6);
    let sum = ss.direct_sum(&DieudonneModule::etale(3, 6));
    c.bench_function("hom_dieudonne_rank3", |b| b.iter(|| black_box(hom_dieudonne(&sum, &sum, 6).unwrap())));
    let w = EtaCartierComplex::witt(2, 6);
    let ww = w.direct_sum(&w);
    c.bench_function("hom_cartier_witt_sum", |b| b.iter(|| black_box(hom_cartier(&ww, &ww, 6).unwrap())));
}

criterion_group!(benches, witt, drw, snf, hom);
criterion_main!(benches);
