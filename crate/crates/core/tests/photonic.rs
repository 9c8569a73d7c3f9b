use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use mzipuf_core::fabrication::{carve_device, fabricate_chip, Challenge, ChipLayout, FabricationParams};
use mzipuf_core::photonic::{
    build_mesh, ideal_mzi_sine_cosine, mesh_transfer_matrix, mzi_unitary, propagate, ComplexMatrix, CouplerPair,
    MeshLayout, MziSettings,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Embeds every MZI as a dense `2C × 2C` matrix and multiplies them in order.
fn dense_oracle(layout: &MeshLayout, settings: &[MziSettings], couplers: &[CouplerPair]) -> ComplexMatrix {
    let n = layout.output_modes();
    let mut total = ComplexMatrix::identity(n);
    for ((slot, s), k) in layout.slots().iter().zip(settings).zip(couplers) {
        let u = mzi_unitary(*s, *k).unwrap();
        let mut e = ComplexMatrix::identity(n);
        for r in 0..2 {
            for c in 0..2 {
                e[(slot.mode + r, slot.mode + c)] = u[(r, c)];
            }
        }
        total = &e * &total;
    }
    total
}

fn random_settings(n: usize, rng: &mut ChaCha8Rng) -> (Vec<MziSettings>, Vec<CouplerPair>) {
    use rand::Rng;
    let settings = (0..n)
        .map(|_| MziSettings::new(rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)))
        .collect();
    let couplers = (0..n)
        .map(|_| CouplerPair::new(rng.random_range(0.3..0.7), rng.random_range(0.3..0.7)).unwrap())
        .collect();
    (settings, couplers)
}

#[test]
fn transfer_matrix_matches_dense_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for columns in 1..=8 {
        let layout = build_mesh(columns).unwrap();
        for _ in 0..20 {
            let (s, k) = random_settings(layout.mzi_count(), &mut rng);
            let fast = mesh_transfer_matrix(&layout, &s, &k).unwrap();
            let slow = dense_oracle(&layout, &s, &k);
            assert!(fast.max_abs_diff(&slow) < 1e-12, "columns {columns}");
            let p = propagate(&layout, &s, &k).unwrap();
            let col = slow.column(layout.input_mode());
            for (a, b) in p.as_slice().iter().zip(&col) {
                assert!((a - b.norm_sqr()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn two_column_hand_fixtures() {
    let layout = build_mesh(2).unwrap();
    let k = vec![CouplerPair::IDEAL; 3];
    // 50:50 split in column 1, then both column-2 MZIs crossed.
    let s = [FRAC_PI_2, 0.0, 0.0].map(MziSettings::internal);
    let p = propagate(&layout, &s, &k).unwrap();
    let expect = [0.5, 0.0, 0.0, 0.5];
    for (a, b) in p.as_slice().iter().zip(expect) {
        assert!((a - b).abs() < 1e-12, "{:?}", p.as_slice());
    }
    // Same split with column 2 in the bar state.
    let s = [FRAC_PI_2, PI, PI].map(MziSettings::internal);
    let p = propagate(&layout, &s, &k).unwrap();
    let expect = [0.0, 0.5, 0.5, 0.0];
    for (a, b) in p.as_slice().iter().zip(expect) {
        assert!((a - b).abs() < 1e-12, "{:?}", p.as_slice());
    }
}

#[test]
fn four_column_switched_routes() {
    let layout = build_mesh(4).unwrap();
    let k = vec![CouplerPair::IDEAL; 10];
    // Everything crossed walks the light down one diagonal to the edge.
    let s = vec![MziSettings::internal(0.0); 10];
    let p = propagate(&layout, &s, &k).unwrap();
    let lit: Vec<usize> = (0..8).filter(|&m| p.as_slice()[m] > 1e-12).collect();
    assert_eq!(lit.len(), 1);
    assert!((p.as_slice()[lit[0]] - 1.0).abs() < 1e-12);
    assert!(lit[0] == 0 || lit[0] == 7);
    // All bar: light stays on the input mode's MZI chain and exits once.
    let s = vec![MziSettings::internal(PI); 10];
    let p = propagate(&layout, &s, &k).unwrap();
    assert!((p.total() - 1.0).abs() < 1e-12);
    assert_eq!(p.as_slice().iter().filter(|&&x| x > 1e-12).count(), 1);
}

#[test]
fn switched_meshes_are_permutations() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for columns in 1..=6 {
        let layout = build_mesh(columns).unwrap();
        for _ in 0..10 {
            use rand::Rng;
            let s: Vec<_> = (0..layout.mzi_count())
                .map(|_| MziSettings::internal(if rng.random_bool(0.5) { 0.0 } else { PI }))
                .collect();
            let k = vec![CouplerPair::IDEAL; layout.mzi_count()];
            let t = mesh_transfer_matrix(&layout, &s, &k).unwrap();
            let n = t.rows();
            for r in 0..n {
                let mags: Vec<f64> = (0..n).map(|c| t[(r, c)].norm()).collect();
                assert_eq!(mags.iter().filter(|m| (*m - 1.0).abs() < 1e-12).count(), 1);
                assert_eq!(mags.iter().filter(|m| **m < 1e-12).count(), n - 1);
            }
        }
    }
}

fn fabricated_transfer(seed: u64, columns: usize, challenge_seed: u64) -> (ComplexMatrix, Vec<f64>) {
    let layout = build_mesh(columns).unwrap();
    let n = layout.mzi_count();
    let pairs = layout.grid_neighbours().into_iter().map(|(a, b)| (a as u32, b as u32));
    let chip_layout = ChipLayout::new(n as u32, pairs).unwrap();
    let chip = Arc::new(fabricate_chip(seed, &chip_layout, &FabricationParams::default()));
    let device = carve_device(&chip, (0..n as u32).collect(), columns).unwrap();
    let challenge = Challenge::random(n, &mut ChaCha8Rng::seed_from_u64(challenge_seed));
    let phases = device.voltages_to_phases(&challenge).unwrap();
    let t = mesh_transfer_matrix(device.layout(), &phases, device.couplers()).unwrap();
    let p = device.ideal_response(&challenge).unwrap();
    (t, p.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn fabricated_devices_are_unitary(seed in any::<u64>(), columns in 1usize..=11, cs in any::<u64>()) {
        let (t, p) = fabricated_transfer(seed, columns, cs);
        prop_assert!(t.unitarity_defect() < 1e-9);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn ideal_mzi_matches_sine_cosine_form(theta in -20.0f64..20.0, phi in -20.0f64..20.0) {
        let s = MziSettings::new(theta, phi);
        let product = mzi_unitary(s, CouplerPair::IDEAL).unwrap();
        let closed = ideal_mzi_sine_cosine(s);
        prop_assert!(product.max_abs_diff(&closed) < 1e-12);
    }

    #[test]
    fn phases_are_two_pi_periodic(theta in 0.0f64..TAU, phi in 0.0f64..TAU, e1 in 0.05f64..0.95, e2 in 0.05f64..0.95, k in -3i32..=3) {
        let c = CouplerPair::new(e1, e2).unwrap();
        let shift = f64::from(k) * TAU;
        let a = mzi_unitary(MziSettings::new(theta, phi), c).unwrap();
        let b = mzi_unitary(MziSettings::new(theta + shift, phi - shift), c).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-9);
    }

    #[test]
    fn single_mzi_unitary_for_any_couplers(theta in 0.0f64..TAU, phi in 0.0f64..TAU, e1 in 0.01f64..0.99, e2 in 0.01f64..0.99) {
        let u = mzi_unitary(MziSettings::new(theta, phi), CouplerPair::new(e1, e2).unwrap()).unwrap();
        prop_assert!(u.unitarity_defect() < 1e-12);
    }
}

#[test]
fn output_phases_do_not_change_single_input_powers_of_last_column() {
    // φ on the final column only rephases outputs; powers are unchanged.
    let layout = build_mesh(3).unwrap();
    let k = vec![CouplerPair::IDEAL; 6];
    let base: Vec<_> = (0..6).map(|i| MziSettings::internal(0.4 * i as f64)).collect();
    let mut shifted = base.clone();
    for (slot, s) in layout.slots().iter().zip(shifted.iter_mut()) {
        if slot.column == 3 {
            *s = MziSettings::new(s.theta(), 1.234);
        }
    }
    let a = propagate(&layout, &base, &k).unwrap();
    let b = propagate(&layout, &shifted, &k).unwrap();
    for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
        assert!((x - y).abs() < 1e-12);
    }
}
