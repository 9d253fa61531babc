use finrank::generate::{generate_instance, GenConfig};
use finrank::oracle::brute_force_expectation;
use finrank::verify::{compare, ORACLE_TOLERANCE};
use finrank::{expectation, Statistics};

fn sweep(statistics: Statistics, distinct_ket: bool, number_conserving: bool) {
    let mut floor_passes = 0;
    for seed in 0..500u64 {
        let blocks = 1 + (seed % 4) as usize;
        let d = 1 + (seed / 4 % 2) as usize;
        let k = 1 + (seed / 8 % 2) as usize;
        let n_max = match statistics {
            Statistics::Boson => 1 + (seed / 16 % 2) as u32,
            Statistics::Fermion => 1 + (seed / 16) as u32 % d as u32,
        };
        let cfg = GenConfig {
            blocks,
            d,
            k,
            statistics,
            n_max,
            distinct_ket,
            number_conserving,
            vary_dims: seed % 3 == 0,
            total_particle_cap: Some(6),
            ..GenConfig::default()
        };
        let inst = generate_instance(&cfg, seed).unwrap().validate().unwrap();
        let engine = expectation(&inst.bra, &inst.ket, &inst.op).unwrap().value;
        let oracle = brute_force_expectation(&inst.bra, &inst.ket, &inst.op.dense()).unwrap();
        let (rel, ok, via_floor) = compare(engine, oracle, ORACLE_TOLERANCE);
        assert!(
            ok,
            "{statistics} seed {seed}: engine {engine}, oracle {oracle}, rel {rel:e}"
        );
        floor_passes += via_floor as usize;
    }
    // Structural zeros are rare; most cases must pass on the relative test.
    assert!(floor_passes < 50, "{floor_passes} cases passed only through the floor");
}

#[test]
fn bosons_bra_equals_ket() {
    sweep(Statistics::Boson, false, false);
}

#[test]
fn bosons_distinct_ket() {
    sweep(Statistics::Boson, true, false);
}

#[test]
fn bosons_number_conserving() {
    sweep(Statistics::Boson, true, true);
}

#[test]
fn fermions_bra_equals_ket() {
    sweep(Statistics::Fermion, false, false);
}

#[test]
fn fermions_distinct_ket() {
    sweep(Statistics::Fermion, true, false);
}

#[test]
fn fermions_number_conserving() {
    sweep(Statistics::Fermion, true, true);
}
