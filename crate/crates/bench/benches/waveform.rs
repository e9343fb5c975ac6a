//! Criterion benches for the hot paths: symbol generation (closed-form
//! fast path vs. the general chain vs. the LS window), the receiver
//! front end, and one full Monte Carlo link trial.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use ooksim_bench::evaluation_scenario;
use ooksim_core::config::{FdssKind, FdssSpec};
use ooksim_core::harness::ScenarioRuntime;
use ooksim_core::ofdm::{assemble_symbol, modulate_message, qpsk_symbols};
use ooksim_core::precoder::{
    coded_from_input, generate_frame, generate_wus_symbol, resolve_fdss,
};
use ooksim_core::rng::stream;

fn bench_generation(c: &mut Criterion) {
    let cs = evaluation_scenario();
    let cc = cs.cc().clone();
    let bits = [true, false];
    let rt = ScenarioRuntime::new(&cs).unwrap();

    c.bench_function("generate/fast_path", |b| {
        b.iter(|| rt.wus_symbol(0, black_box(&bits)).unwrap())
    });

    let resolved = resolve_fdss(&cs.fdss, &cc).unwrap();
    let spreading = cs.spreading.build(cc.n_seg(), cc.n_bit, cc.phi).unwrap();
    let coded = coded_from_input(&bits, &cc).unwrap();
    c.bench_function("generate/main_path", |b| {
        b.iter(|| generate_frame(black_box(&coded), &cc, &resolved.w, &spreading).unwrap())
    });

    let ls = FdssSpec { kind: FdssKind::LsEquivalent, t_shift: None };
    c.bench_function("generate/ls_equivalent", |b| {
        b.iter(|| generate_wus_symbol(black_box(&bits), &cc, &ls, &cs.spreading).unwrap())
    });
}

fn bench_receiver(c: &mut Criterion) {
    let cs = evaluation_scenario();
    let cc = cs.cc();
    let plan = cs.band_plan();
    let chain = cs.receiver_chain();
    let rt = ScenarioRuntime::new(&cs).unwrap();

    let mut rng = stream(7, &[]);
    let wus = rt.wus_symbol(0, &[true, false]).unwrap();
    let data = qpsk_symbols(&mut rng, plan.data_indices().len(), cc.p_s);
    let grid = assemble_symbol(&wus.coefficients, &data, &plan).unwrap();
    let tx = modulate_message(&[grid], cc.n_cp, cc.sample_rate()).unwrap();

    c.bench_function("receiver/front_end", |b| {
        b.iter(|| chain.stages(black_box(&tx.samples)))
    });
    c.bench_function("receiver/full_message", |b| {
        b.iter(|| chain.process_message(black_box(&tx.samples), &tx.boundaries, 0).unwrap())
    });
}

fn bench_link_trial(c: &mut Criterion) {
    let cs = evaluation_scenario();
    let rt = ScenarioRuntime::new(&cs).unwrap();
    let sigma2 = rt.noise_variance(10f64.powf(0.2)).unwrap();
    c.bench_function("link/trial_tdlc_2db", |b| {
        let mut trial = 0u64;
        b.iter(|| {
            trial += 1;
            rt.run_trial(1, 0, black_box(trial as usize), sigma2).unwrap()
        })
    });
}

criterion_group!(benches, bench_generation, bench_receiver, bench_link_trial);
criterion_main!(benches);
