use lhz_core::dynamics::{eigenvalues, hamiltonian_at};
use lhz_core::landau::{FreeEnergyFamily, JDistribution};
use lhz_core::lhz::plaquette_ratios;
use lhz_core::magnetization::{analytic_energy_logical, analytic_energy_physical};
use lhz_core::schedule::{h_continuum, h_inhom, h_step};
use lhz_core::{counts, sample_instance, LhzInstance, LhzLayout, Representation, Schedule, SwitchOrder};
use proptest::prelude::*;

mod common;
use common::jacobi_eigenvalues;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn uniform_instance(n_logical: usize, rep: Representation, c: f64) -> LhzInstance {
    let layout = LhzLayout::new(n_logical, rep).unwrap();
    sample_instance(&layout, 0, -1.0, 1.0, c, 10.0).unwrap()
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn encoded_logical_states_satisfy_every_constraint(
        n_logical in 3usize..=30,
        bits in any::<u32>(),
        c in 0.1f64..5.0,
    ) {
        let inst = uniform_instance(n_logical, Representation::Direct, c);
        let logical: Vec<i8> = (0..n_logical).map(|i| if bits >> (i % 32) & 1 == 0 { 1 } else { -1 }).collect();
        let spins = inst.layout.encode(&logical).unwrap();
        let e = inst.constraint_energy(&spins).unwrap();
        let expected: f64 = inst.constraint_strengths.iter().map(|c| -c).sum();
        prop_assert_eq!(e, expected);
    }

    #[test]
    fn enumeration_matches_closed_forms(n_logical in 3usize..=30) {
        let layout = LhzLayout::new(n_logical, Representation::Direct).unwrap();
        let c = counts(n_logical).unwrap();
        prop_assert_eq!(layout.plaquettes().len(), c.n_constraints);
        let three = layout.plaquettes().iter().filter(|p| p.members.len() == 3).count();
        prop_assert_eq!(three, n_logical - 2);
        let (f3, f4) = plaquette_ratios(n_logical).unwrap();
        prop_assert!((f3 - three as f64 / c.n_constraints as f64).abs() < 1e-12);
        prop_assert!((f3 + f4 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_configurations_hit_closed_form_endpoints(n_logical in 3usize..=30) {
        let inst = uniform_instance(n_logical, Representation::Direct, 2.0);
        let n = inst.n_spins();
        let up = inst.constraint_energy(&vec![1; n]).unwrap();
        let down = inst.constraint_energy(&vec![-1; n]).unwrap();
        prop_assert_eq!(up, analytic_energy_logical(1.0, n_logical, 2.0).unwrap());
        prop_assert_eq!(down, analytic_energy_logical(-1.0, n_logical, 2.0).unwrap());
    }

    #[test]
    fn staircase_sum_rule(s in 0.0f64..=1.0, r in 0.1f64..6.0, n in 1usize..40) {
        let total: f64 = (0..n).map(|k| h_inhom(k, s, r, n).unwrap()).sum();
        prop_assert!((total - n as f64 * (1.0 - s.powf(r))).abs() < 1e-12);
        let ramping = (0..n).map(|k| h_inhom(k, s, r, n).unwrap()).filter(|h| *h > 0.0 && *h < 1.0).count();
        prop_assert!(ramping <= 1);
    }

    #[test]
    fn staircase_is_monotone(k in 0usize..12, r in 0.1f64..6.0, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(h_inhom(k, hi, r, 12).unwrap() <= h_inhom(k, lo, r, 12).unwrap());
    }

    #[test]
    fn reversal_permutes_fields(s in 0.0f64..=1.0, r in 0.1f64..6.0, n in 1usize..20) {
        let asc = Schedule::inhomogeneous(r, SwitchOrder::Ascending).unwrap().fields(s, n);
        let mut desc = Schedule::inhomogeneous(r, SwitchOrder::Descending).unwrap().fields(s, n);
        desc.reverse();
        prop_assert_eq!(asc, desc);
    }

    #[test]
    fn continuum_staircase_meets_step_outside_ramp(x in 0.0f64..=1.0, s in 0.0f64..=1.0, r in 0.2f64..5.0, n in 2usize..500) {
        let tau = s.powf(r);
        if (x - tau).abs() > 1.0 / n as f64 {
            prop_assert_eq!(h_continuum(x, s, r, n), h_step(x, tau));
        }
    }

    #[test]
    fn hamiltonian_is_symmetric(s in 0.0f64..=1.0, seed in 0u64..50, inhom in any::<bool>()) {
        let layout = LhzLayout::new(4, Representation::Auxiliary).unwrap();
        let inst = sample_instance(&layout, seed, -1.0, 1.0, 2.0, 10.0).unwrap();
        let sched = if inhom {
            Schedule::inhomogeneous(0.5, SwitchOrder::Ascending).unwrap()
        } else {
            Schedule::homogeneous()
        };
        let m = hamiltonian_at(&inst, &sched, s).unwrap().to_dense();
        prop_assert!((&m - m.transpose()).amax() < 1e-12);
    }

    #[test]
    fn spectrum_matches_jacobi_oracle(s in 0.0f64..=1.0, seed in 0u64..1000, r in 0.2f64..4.0) {
        let layout = LhzLayout::new(3, Representation::Auxiliary).unwrap();
        let inst = sample_instance(&layout, seed, -1.0, 1.0, 2.0, 10.0).unwrap();
        let sched = Schedule::inhomogeneous(r, SwitchOrder::Ascending).unwrap();
        let h = hamiltonian_at(&inst, &sched, s).unwrap();
        let got = eigenvalues(&h);
        let want = jacobi_eigenvalues(h.to_dense());
        prop_assert!(got.windows(2).all(|w| w[0] <= w[1]));
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
        }
    }
}

#[test]
fn logical_and_physical_closed_forms_agree() {
    for n_l in 3..=200usize {
        let n_p = n_l * (n_l - 1) / 2;
        for i in 0..=20 {
            let m = -1.0 + 0.1 * i as f64;
            let a = analytic_energy_logical(m, n_l, 1.0).unwrap();
            let b = analytic_energy_physical(m, n_p, 1.0).unwrap();
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-300), "N_l = {n_l}, m = {m}");
        }
    }
}

fn families() -> Vec<FreeEnergyFamily> {
    let u = JDistribution::default();
    let j: Vec<f64> = (0..21).map(|k| ((k * 7) % 21) as f64 / 10.0 - 1.0).collect();
    vec![
        FreeEnergyFamily::thermo(2.0, u).unwrap(),
        FreeEnergyFamily::finite_size(2.0, 28, u).unwrap(),
        FreeEnergyFamily::finite_size(2.0, 5886, u).unwrap(),
        FreeEnergyFamily::scaled(21, u).unwrap(),
        FreeEnergyFamily::scaled(300, u).unwrap(),
        FreeEnergyFamily::finite_temperature(2.0, 21, 5.0, j).unwrap(),
    ]
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn quadrature_doubling_is_converged(m in -1.0f64..=1.0, s in 0.0f64..=1.0, tau in 0.0f64..=1.0) {
        for fam in families() {
            let fine = fam.with_quad_nodes(2 * fam.quad_nodes_j()).unwrap();
            let (a, b) = (fam.value(m, s, tau).unwrap(), fine.value(m, s, tau).unwrap());
            prop_assert!((a - b).abs() < 1e-9, "{}: {} vs {}", fam.variant().name(), a, b);
        }
    }

    #[test]
    fn jet_slope_matches_difference_stencils(m in -0.95f64..=0.95, s in 0.0f64..=1.0, tau in 0.0f64..=1.0) {
        for fam in families() {
            let f = |x: f64| fam.value(x, s, tau).unwrap();
            // a short step keeps the stencil accurate where the J average
            // makes f'' jump (the |Q + J| kink leaving the support)
            let h = 1e-6;
            let stencil = (f(m - 2.0 * h) - 8.0 * f(m - h) + 8.0 * f(m + h) - f(m + 2.0 * h)) / (12.0 * h);
            let slope = fam.derivatives(m, s, tau).unwrap()[1];
            prop_assert!((slope - stencil).abs() < 1e-6 * slope.abs().max(1.0), "{}: {} vs {}", fam.variant().name(), slope, stencil);
        }
    }

    #[test]
    fn symmetric_fields_remove_linear_term(s in 0.0f64..=1.0, tau in 0.0f64..=1.0) {
        let fam = FreeEnergyFamily::thermo(2.0, JDistribution::default()).unwrap();
        let rule = lhz_core::landau::quadrature::GaussLegendre::new(200);
        let direct = -0.5 * rule.integrate(-1.0, 1.0, |j| (1.0 - tau) * (s * s * j * j + 1.0).sqrt());
        prop_assert!((fam.value(0.0, s, tau).unwrap() - direct).abs() < 1e-12);
    }
}

#[test]
fn finite_size_converges_monotonically() {
    let u = JDistribution::default();
    let thermo = FreeEnergyFamily::thermo(2.0, u).unwrap();
    let mut previous = f64::INFINITY;
    for n in [28usize, 300, 5886, 499500] {
        let fam = FreeEnergyFamily::finite_size(2.0, n, u).unwrap();
        let mut sup = 0.0f64;
        for i in 0..10 {
            for k in 0..10 {
                let (s, tau) = (i as f64 / 9.0, k as f64 / 9.0);
                for m in [0.0, 0.25, 0.5, 0.75, 1.0] {
                    sup = sup.max((fam.value(m, s, tau).unwrap() - thermo.value(m, s, tau).unwrap()).abs());
                }
            }
        }
        assert!(sup < previous, "N_p = {n}: {sup} !< {previous}");
        previous = sup;
    }
}

#[test]
fn finite_temperature_is_monotone_in_beta() {
    let j: Vec<f64> = (0..6).map(|k| -0.8 + 0.3 * k as f64).collect();
    for (m, s, tau) in [(0.2, 0.4, 0.3), (0.9, 0.8, 0.6), (-0.5, 0.1, 0.9)] {
        let values: Vec<f64> = [0.1, 1.0, 10.0, 100.0]
            .iter()
            .map(|&b| FreeEnergyFamily::finite_temperature(2.0, 6, b, j.clone()).unwrap().value(m, s, tau).unwrap())
            .collect();
        assert!(values.windows(2).all(|w| w[0] < w[1]), "{values:?}");
    }
    // entropy dominates at high temperature
    let hot = FreeEnergyFamily::finite_temperature(2.0, 6, 1e-4, j).unwrap().value(0.3, 0.5, 0.5).unwrap();
    assert!((hot * 1e-4 + 2f64.ln()).abs() < 1e-3);
}
