use num_complex::Complex64;

use super::gate::{apply_unchecked, Gate};
use crate::error::{Error, Result};

/// Dense `2^n` amplitude vector, qubit 0 as least-significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    pub const MAX_QUBITS: usize = 12;

    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Statevector { n_qubits, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm 1 within 1e-9.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::param(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_register(n_qubits)?;
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("statevector amplitude".into()));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::param(format!("statevector norm² {norm} is not 1")));
        }
        Ok(Statevector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Born-rule outcome probabilities indexed by basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Applies a gate in place after validating it against this register.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        apply_unchecked(&mut self.amps, gate);
        Ok(())
    }

    /// `|⟨self|other⟩|²`, clamped to `[0, 1]`.
    pub fn fidelity(&self, other: &Statevector) -> Result<f64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: other.n_qubits,
            });
        }
        Ok(overlap_sqr(&self.amps, &other.amps))
    }
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > Statevector::MAX_QUBITS {
        return Err(Error::param(format!(
            "register size {n_qubits} outside 1..={}",
            Statevector::MAX_QUBITS
        )));
    }
    Ok(())
}

/// `|⟨a|b⟩|²` clamped to `[0, 1]`. Exactly symmetric in its arguments.
pub(crate) fn overlap_sqr(a: &[Complex64], b: &[Complex64]) -> f64 {
    let inner: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    inner.norm_sqr().clamp(0.0, 1.0)
}

/// Returns `gate` applied to a copy of `state`.
pub fn apply_gate(state: &Statevector, gate: &Gate) -> Result<Statevector> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

pub fn fidelity(a: &Statevector, b: &Statevector) -> Result<f64> {
    a.fidelity(b)
}
