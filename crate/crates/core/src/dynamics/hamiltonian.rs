use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lhz::LhzInstance;
use crate::schedule::Schedule;

/// Largest register `hamiltonian_at` and friends accept unless told otherwise.
pub const DEFAULT_MAX_SPINS: usize = 14;

/// `H = diag - sum_k transverse[k] * sigma^x_k` over `n_spins` spins.
///
/// Basis state `i` has spin `k` up (`sigma^z = +1`) when bit `k` of `i` is clear.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinHamiltonian {
    pub diag: Vec<f64>,
    pub transverse: Vec<f64>,
}

impl SpinHamiltonian {
    pub fn n_spins(&self) -> usize {
        self.transverse.len()
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = self.diag[i];
            for (k, &h) in self.transverse.iter().enumerate() {
                m[(i, i ^ (1 << k))] -= h;
            }
        }
        m
    }

    pub fn apply(&self, input: &[Complex64], out: &mut [Complex64]) {
        apply_parts(&self.diag, 1.0, &self.transverse, input, out);
    }

    /// Upper bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        self.diag.iter().fold(0.0f64, |m, d| m.max(d.abs()))
            + self.transverse.iter().map(|h| h.abs()).sum::<f64>()
    }
}

/// `out = (scale * diag - sum_k fields[k] sigma^x_k) input`.
pub(crate) fn apply_parts(
    diag: &[f64],
    scale: f64,
    fields: &[f64],
    input: &[Complex64],
    out: &mut [Complex64],
) {
    for ((o, &x), &d) in out.iter_mut().zip(input).zip(diag) {
        *o = x * (scale * d);
    }
    for (k, &h) in fields.iter().enumerate() {
        if h == 0.0 {
            continue;
        }
        let bit = 1usize << k;
        // blocks of 2 * bit: lower half pairs with upper half
        for (lo_out, hi_out, lo_in, hi_in) in out
            .chunks_exact_mut(2 * bit)
            .zip(input.chunks_exact(2 * bit))
            .flat_map(|(o, i)| {
                let (ol, oh) = o.split_at_mut(bit);
                let (il, ih) = i.split_at(bit);
                [(ol, oh, il, ih)]
            })
        {
            for j in 0..bit {
                lo_out[j] -= hi_in[j] * h;
                hi_out[j] -= lo_in[j] * h;
            }
        }
    }
}

/// Normalized amplitudes over the z basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<Complex64>);

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        Self(amplitudes)
    }

    /// Ground state of `-sum_k sigma^x_k`: every spin along `+x`.
    pub fn uniform(n_spins: usize) -> Self {
        let dim = 1usize << n_spins;
        Self(vec![Complex64::new(1.0 / (dim as f64).sqrt(), 0.0); dim])
    }

    pub fn basis(n_spins: usize, index: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); 1 << n_spins];
        v[index] = Complex64::new(1.0, 0.0);
        Self(v)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.0
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(|a| a.norm_sqr())
    }
}

/// An instance bound to a schedule, with the problem diagonal cached.
#[derive(Debug, Clone)]
pub struct Annealer {
    schedule: Schedule,
    problem: Vec<f64>,
    n_spins: usize,
}

impl Annealer {
    pub fn new(instance: &LhzInstance, schedule: Schedule) -> Result<Self> {
        Self::with_cap(instance, schedule, DEFAULT_MAX_SPINS)
    }

    pub fn with_cap(instance: &LhzInstance, schedule: Schedule, max_spins: usize) -> Result<Self> {
        let n_spins = instance.n_spins();
        if n_spins > max_spins {
            return Err(Error::DimensionCap {
                spins: n_spins,
                cap: max_spins,
            });
        }
        Ok(Self {
            schedule,
            problem: instance.problem_diagonal(),
            n_spins,
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn problem_diagonal(&self) -> &[f64] {
        &self.problem
    }

    /// Transverse amplitudes at `s`. Both protocols drive every spin.
    pub fn fields(&self, s: f64) -> Vec<f64> {
        self.schedule.fields(s, self.n_spins)
    }

    /// Weight of the problem Hamiltonian at `s`; linear for both protocols.
    pub fn problem_scale(&self, s: f64) -> f64 {
        s
    }

    pub fn at(&self, s: f64) -> Result<SpinHamiltonian> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidArgument(format!("s = {s} outside [0, 1]")));
        }
        let scale = self.problem_scale(s);
        Ok(SpinHamiltonian {
            diag: self.problem.iter().map(|e| scale * e).collect(),
            transverse: self.fields(s),
        })
    }
}

/// `H(s)` for `instance` driven by `schedule`.
pub fn hamiltonian_at(instance: &LhzInstance, schedule: &Schedule, s: f64) -> Result<SpinHamiltonian> {
    Annealer::new(instance, *schedule)?.at(s)
}
