use crate::error::{Error, Result};
use crate::lhz::LhzInstance;

use super::hamiltonian::StateVector;

/// Relative tolerance used to group classical energies into the ground level.
const GROUND_TOLERANCE: f64 = 1e-9;

/// Ground level of a diagonal problem Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundLevel {
    pub energy: f64,
    pub states: Vec<usize>,
}

impl GroundLevel {
    pub fn of(diagonal: &[f64]) -> Self {
        let energy = diagonal.iter().copied().fold(f64::INFINITY, f64::min);
        let tol = GROUND_TOLERANCE * energy.abs().max(1.0);
        let states = diagonal
            .iter()
            .enumerate()
            .filter(|(_, &e)| e - energy <= tol)
            .map(|(i, _)| i)
            .collect();
        Self { energy, states }
    }

    pub fn degeneracy(&self) -> usize {
        self.states.len()
    }
}

fn check_dim(state: &StateVector, diagonal: &[f64]) -> Result<()> {
    if state.dim() != diagonal.len() {
        return Err(Error::LengthMismatch {
            expected: diagonal.len(),
            found: state.dim(),
        });
    }
    Ok(())
}

/// Weight of `state` in the ground subspace of the diagonal problem Hamiltonian.
pub fn fidelity_sq_diag(state: &StateVector, diagonal: &[f64]) -> Result<f64> {
    check_dim(state, diagonal)?;
    let ground = GroundLevel::of(diagonal);
    let amps = state.amplitudes();
    Ok(ground.states.iter().map(|&i| amps[i].norm_sqr()).sum())
}

/// `<psi|H_P|psi> - E_0`, clamped at zero against round-off.
pub fn residual_energy_diag(state: &StateVector, diagonal: &[f64]) -> Result<f64> {
    check_dim(state, diagonal)?;
    let ground = GroundLevel::of(diagonal);
    let mean: f64 = state
        .probabilities()
        .zip(diagonal)
        .map(|(p, e)| p * (e - ground.energy))
        .sum();
    Ok(mean.max(0.0))
}

pub fn fidelity_sq(state: &StateVector, instance: &LhzInstance) -> Result<f64> {
    fidelity_sq_diag(state, &instance.problem_diagonal())
}

pub fn residual_energy(state: &StateVector, instance: &LhzInstance) -> Result<f64> {
    residual_energy_diag(state, &instance.problem_diagonal())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lhz::{sample_instance, LhzLayout, Representation};

    fn instance() -> LhzInstance {
        let layout = LhzLayout::new(4, Representation::Auxiliary).unwrap();
        sample_instance(&layout, 1, -1.0, 1.0, 2.0, 10.0).unwrap()
    }

    #[test]
    fn ground_and_orthogonal_states() {
        let inst = instance();
        let diag = inst.problem_diagonal();
        let ground = GroundLevel::of(&diag);
        assert_eq!(ground.degeneracy(), 1);
        let g = ground.states[0];
        let psi = StateVector::basis(8, g);
        assert_eq!(fidelity_sq(&psi, &inst).unwrap(), 1.0);
        assert_eq!(residual_energy(&psi, &inst).unwrap(), 0.0);
        let other = StateVector::basis(8, (g + 1) % 256);
        assert_eq!(fidelity_sq(&other, &inst).unwrap(), 0.0);
    }

    #[test]
    fn first_excited_state_costs_the_gap() {
        let inst = instance();
        let diag = inst.problem_diagonal();
        let mut sorted: Vec<(f64, usize)> = diag.iter().copied().zip(0..).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let psi = StateVector::basis(8, sorted[1].1);
        let r = residual_energy(&psi, &inst).unwrap();
        assert!((r - (sorted[1].0 - sorted[0].0)).abs() < 1e-12);
    }

    #[test]
    fn uniform_superposition_overlap() {
        let inst = instance();
        let f = fidelity_sq(&StateVector::uniform(8), &inst).unwrap();
        assert!((f - 1.0 / 256.0).abs() < 1e-15);
        assert!(fidelity_sq(&StateVector::uniform(7), &inst).is_err());
        assert!(residual_energy(&StateVector::uniform(7), &inst).is_err());
    }

    #[test]
    fn degenerate_ground_level_sums_overlap() {
        let diag = vec![-1.0, -1.0, 0.5, 2.0];
        let psi = StateVector::uniform(2);
        assert!((fidelity_sq_diag(&psi, &diag).unwrap() - 0.5).abs() < 1e-15);
    }
}
