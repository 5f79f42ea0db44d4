use lhz_core::dynamics::{
    evolve, evolve_with, gap_at, hamiltonian_at, spectrum_at, Annealer, EvolveOptions, GroundLevel,
};
use lhz_core::stats::median;
use lhz_core::{sample_instance, LhzInstance, LhzLayout, Representation, Schedule, SwitchOrder};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn instance(n_logical: usize, seed: u64) -> LhzInstance {
    let layout = LhzLayout::new(n_logical, Representation::Auxiliary).unwrap();
    sample_instance(&layout, seed, -1.0, 1.0, 2.0, 10.0).unwrap()
}

fn inhom() -> Schedule {
    Schedule::inhomogeneous(0.5, SwitchOrder::Ascending).unwrap()
}

/// Classical RK4 on the dense Hamiltonian with a very fine step.
fn rk4_fidelity(inst: &LhzInstance, sched: &Schedule, t_f: f64, steps: usize) -> f64 {
    let dim = 1usize << inst.n_spins();
    let h_at = |s: f64| -> DMatrix<Complex64> {
        hamiltonian_at(inst, sched, s.clamp(0.0, 1.0))
            .unwrap()
            .to_dense()
            .map(|x| Complex64::new(0.0, -t_f * x))
    };
    let mut psi = nalgebra::DVector::from_element(dim, Complex64::new(1.0 / (dim as f64).sqrt(), 0.0));
    let ds = 1.0 / steps as f64;
    for i in 0..steps {
        let s = i as f64 * ds;
        let (a, b, c) = (h_at(s), h_at(s + ds / 2.0), h_at(s + ds));
        let k1 = &a * &psi;
        let k2 = &b * (&psi + &k1 * Complex64::new(ds / 2.0, 0.0));
        let k3 = &b * (&psi + &k2 * Complex64::new(ds / 2.0, 0.0));
        let k4 = &c * (&psi + &k3 * Complex64::new(ds, 0.0));
        psi += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * Complex64::new(ds / 6.0, 0.0);
    }
    let ground = GroundLevel::of(&inst.problem_diagonal());
    ground.states.iter().map(|&i| psi[i].norm_sqr()).sum()
}

#[test]
fn propagator_agrees_with_fine_rk4() {
    let inst = instance(3, 4);
    for sched in [Schedule::homogeneous(), inhom()] {
        let ours = evolve(&inst, &sched, 6.0, 20).unwrap().fidelity_sq;
        let oracle = rk4_fidelity(&inst, &sched, 6.0, 20_000);
        assert!((ours - oracle).abs() < 1e-7, "{}: {ours} vs {oracle}", sched.label());
    }
}

#[test]
fn halving_the_step_changes_little() {
    let inst = instance(4, 11);
    for sched in [Schedule::homogeneous(), inhom()] {
        let annealer = Annealer::new(&inst, sched).unwrap();
        for t_f in [1.0, 10.0, 60.0] {
            let run = |density: usize| {
                let opts = EvolveOptions {
                    steps_per_unit_time: density,
                    max_phase_per_step: 0.5 * 40.0 / density as f64,
                    ..EvolveOptions::default()
                };
                evolve_with(&annealer, t_f, &opts).unwrap()
            };
            let (coarse, fine) = (run(40), run(80));
            assert!(fine.steps > coarse.steps);
            assert!((coarse.fidelity_sq - fine.fidelity_sq).abs() < 1e-6);
            assert!(coarse.norm_drift < 1e-8 && fine.norm_drift < 1e-8);
        }
    }
}

#[test]
fn endpoints_and_initial_gap() {
    let inst = instance(4, 2);
    for sched in [Schedule::homogeneous(), inhom()] {
        let annealer = Annealer::new(&inst, sched).unwrap();
        assert!((gap_at(&annealer, 0.0).unwrap() - 2.0).abs() < 1e-12);
        let h1 = annealer.at(1.0).unwrap();
        assert!(h1.transverse.iter().all(|&h| h == 0.0));
        let dense = h1.to_dense();
        let off_diagonal = (0..dense.nrows())
            .flat_map(|i| (0..dense.ncols()).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .fold(0.0f64, |m, (i, j)| m.max(dense[(i, j)].abs()));
        assert_eq!(off_diagonal, 0.0);
    }
    let hom = hamiltonian_at(&inst, &Schedule::homogeneous(), 1.0).unwrap();
    let inh = hamiltonian_at(&inst, &inhom(), 1.0).unwrap();
    assert_eq!(hom, inh);
}

#[test]
fn spectrum_moves_continuously() {
    let inst = instance(4, 6);
    let annealer = Annealer::new(&inst, inhom()).unwrap();
    let ds = 0.01;
    let mut previous = annealer.at(0.0).unwrap();
    let mut levels = spectrum_at(&inst, &inhom(), 0.0, 6).unwrap();
    for i in 1..=100 {
        let s = i as f64 * ds;
        let h = annealer.at(s).unwrap();
        // Weyl: no level moves further than the operator norm of the increment
        let step = h.diag.iter().zip(&previous.diag).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            + h.transverse.iter().zip(&previous.transverse).map(|(a, b)| (a - b).abs()).sum::<f64>();
        let now = spectrum_at(&inst, &inhom(), s, 6).unwrap();
        assert!(now.windows(2).all(|w| w[0] <= w[1]));
        for (a, b) in now.iter().zip(&levels) {
            assert!((a - b).abs() <= step + 1e-9, "s = {s}");
        }
        previous = h;
        levels = now;
    }
}

#[test]
fn slower_sweeps_help_on_median() {
    let t_fs = [1.0, 3.0, 10.0, 30.0];
    let mut medians = Vec::new();
    for &t_f in &t_fs {
        let f: Vec<f64> = (0..12)
            .map(|seed| evolve(&instance(4, seed), &Schedule::homogeneous(), t_f, 20).unwrap().fidelity_sq)
            .collect();
        medians.push(median(&f).unwrap());
    }
    assert!(medians.windows(2).all(|w| w[1] >= w[0] - 0.02), "{medians:?}");
}
