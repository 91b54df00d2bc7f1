use super::gate::{apply_unchecked, Gate};
use super::statevector::Statevector;
use crate::error::{Error, Result};

/// Ordered gate list on a fixed register. Every stored gate has been validated.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        // Reuse the register bounds check.
        Statevector::zero(n_qubits)?;
        Ok(Circuit {
            n_qubits,
            gates: Vec::new(),
        })
    }

    pub fn from_gates(n_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Circuit::new(n_qubits)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// The adjoint circuit: gates reversed, each inverted.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Circuit) -> Result<Circuit> {
        if next.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: next.n_qubits,
            });
        }
        let mut gates = self.gates.clone();
        gates.extend_from_slice(&next.gates);
        Ok(Circuit {
            n_qubits: self.n_qubits,
            gates,
        })
    }

    /// Compute-uncompute circuit `U†(left) U(right)`: runs `right`, then undoes `left`.
    /// Its all-zeros probability is `|⟨φ_left|φ_right⟩|²`.
    pub fn overlap(left: &Circuit, right: &Circuit) -> Result<Circuit> {
        right.then(&left.inverse())
    }

    /// Rewrites into the native set `{H, Phase, Rz, CX}`.
    pub fn decompose(&self) -> Circuit {
        let mut gates = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            g.decompose_into(&mut gates);
        }
        Circuit {
            n_qubits: self.n_qubits,
            gates,
        }
    }

    /// Runs the circuit on `|0…0⟩`.
    pub fn run(&self) -> Statevector {
        let mut state = Statevector::zero(self.n_qubits).expect("register validated at construction");
        for g in &self.gates {
            apply_unchecked(state.amplitudes_mut(), g);
        }
        state
    }
}

/// Runs `circuit` on `|0…0⟩`.
pub fn run_circuit(circuit: &Circuit) -> Statevector {
    circuit.run()
}
