use serde::{Deserialize, Serialize};

use super::circuit::Circuit;
use super::gate::Gate;

/// Logical gate statistics of a circuit after rewriting `Rzz` as `CX · Rz · CX`.
///
/// These are not transpiled hardware figures: no routing or native-gate
/// synthesis for a device topology is performed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitStats {
    /// Longest chain of gates that share qubits.
    pub depth: usize,
    pub two_qubit_count: usize,
    pub total_gates: usize,
}

pub fn circuit_stats(circuit: &Circuit) -> CircuitStats {
    let native = circuit.decompose();
    let mut level = vec![0usize; circuit.n_qubits()];
    let mut two_qubit_count = 0;
    for g in native.gates() {
        let targets = g.targets();
        let next = targets.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
        for &q in &targets {
            level[q] = next;
        }
        if matches!(g, Gate::Cx { .. }) {
            two_qubit_count += 1;
        }
    }
    CircuitStats {
        depth: level.into_iter().max().unwrap_or(0),
        two_qubit_count,
        total_gates: native.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_circuit_has_zero_depth() {
        let s = circuit_stats(&Circuit::new(3).unwrap());
        assert_eq!(
            s,
            CircuitStats {
                depth: 0,
                two_qubit_count: 0,
                total_gates: 0
            }
        );
    }

    #[test]
    fn parallel_layers_share_depth() {
        let c = Circuit::from_gates(3, [Gate::H(0), Gate::H(1), Gate::H(2), Gate::Phase(1, 0.3)]).unwrap();
        let s = circuit_stats(&c);
        assert_eq!(s.depth, 2);
        assert_eq!(s.two_qubit_count, 0);
        assert_eq!(s.total_gates, 4);
    }

    #[test]
    fn rzz_counts_as_two_cx_and_one_rotation() {
        let c = Circuit::from_gates(2, [Gate::Rzz(0, 1, 0.5)]).unwrap();
        let s = circuit_stats(&c);
        assert_eq!(
            s,
            CircuitStats {
                depth: 3,
                two_qubit_count: 2,
                total_gates: 3
            }
        );
    }

    #[test]
    fn two_qubit_count_is_additive_under_concatenation() {
        let a = Circuit::from_gates(3, [Gate::Rzz(0, 2, 0.1), Gate::H(1)]).unwrap();
        let b = Circuit::from_gates(
            3,
            [
                Gate::Cx {
                    control: 1,
                    target: 0,
                },
                Gate::Rzz(1, 2, 0.4),
            ],
        )
        .unwrap();
        let joined = circuit_stats(&a.then(&b).unwrap()).two_qubit_count;
        assert_eq!(
            joined,
            circuit_stats(&a).two_qubit_count + circuit_stats(&b).two_qubit_count
        );
    }
}
