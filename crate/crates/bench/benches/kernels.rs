use criterion::{black_box, criterion_group, criterion_main, Criterion};

use sgdefect::charges::charge_ledger;
use sgdefect::defect::{bt_kink_from_vacuum, defect_monodromy_s, DefectParams};
use sgdefect::fields::make_kink;
use sgdefect::lax::spectral_re;
use sgdefect::rmatrix::{transition_bracket_check, Bracket};
use sgdefect::transition::{monodromy_with, Stepper};
use sgdefect::{GridWindow, ModelParams, Picture};

fn kernels(c: &mut Criterion) {
    let p = ModelParams::unit();
    let kink = make_kink(p, -0.5, 0.0, 1).unwrap();
    let sp = spectral_re(1.3, &p).unwrap();
    let sp2 = spectral_re(2.1, &p).unwrap();

    c.bench_function("monodromy_magnus4_w30", |b| {
        b.iter(|| monodromy_with(black_box(&kink), Picture::Space, 0.0, 30.0, &sp, 6000, Stepper::Magnus4).unwrap())
    });
    c.bench_function("monodromy_rk4_w30", |b| {
        b.iter(|| monodromy_with(black_box(&kink), Picture::Space, 0.0, 30.0, &sp, 6000, Stepper::Rk4).unwrap())
    });

    let window = GridWindow::new(-30.0, 30.0, -1.0, 1.0, 6001, 3).unwrap();
    c.bench_function("charge_ledger_order3", |b| {
        b.iter(|| charge_ledger(black_box(&kink), Picture::Space, 0.0, 3, &window).unwrap())
    });

    c.bench_function("transition_bracket_400_sites", |b| {
        b.iter(|| transition_bracket_check(Bracket::T, black_box(&kink), 0.3, (-5.0, 5.0), &sp, &sp2, 400).unwrap())
    });

    let pair = bt_kink_from_vacuum(p, DefectParams::new(2.0).unwrap(), 0.0).unwrap();
    c.bench_function("defect_monodromy_w30", |b| {
        b.iter(|| defect_monodromy_s(black_box(&pair), 0.0, &sp, 30.0, 3000).unwrap())
    });
}

criterion_group!(benches, kernels);
criterion_main!(benches);
