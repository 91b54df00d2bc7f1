use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A gate from the IQP feature-map gate set.
///
/// Conventions: `Phase(θ) = diag(1, e^{iθ})`, `Rz(θ) = diag(e^{-iθ/2}, e^{iθ/2})`,
/// `Rzz(θ) = exp(-i θ/2 Z⊗Z)`. Qubit 0 is the least-significant bit of a basis index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    Phase(usize, f64),
    Rz(usize, f64),
    Rzz(usize, usize, f64),
    Cx { control: usize, target: usize },
}

impl Gate {
    pub fn targets(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::Phase(q, _) | Gate::Rz(q, _) => vec![q],
            Gate::Rzz(a, b, _) => vec![a, b],
            Gate::Cx { control, target } => vec![control, target],
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Gate::H(_) | Gate::Phase(..) | Gate::Rz(..) => 1,
            Gate::Rzz(..) | Gate::Cx { .. } => 2,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Phase(_, t) | Gate::Rz(_, t) | Gate::Rzz(_, _, t) => Some(t),
            Gate::H(_) | Gate::Cx { .. } => None,
        }
    }

    /// The adjoint gate.
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Phase(q, t) => Gate::Phase(q, -t),
            Gate::Rz(q, t) => Gate::Rz(q, -t),
            Gate::Rzz(a, b, t) => Gate::Rzz(a, b, -t),
            g @ (Gate::H(_) | Gate::Cx { .. }) => g,
        }
    }

    /// Checks qubit indices and angle finiteness against a register size.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let targets = self.targets();
        for &q in &targets {
            if q >= n_qubits {
                return Err(Error::InvalidQubit { index: q, n_qubits });
            }
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(Error::RepeatedTarget(targets[0]));
        }
        if let Some(t) = self.angle() {
            if !t.is_finite() {
                return Err(Error::NonFinite(format!("gate angle {t} in {self:?}")));
            }
        }
        Ok(())
    }

    /// Dense matrix in the gate's local basis, first target as least-significant bit.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        match *self {
            Gate::H(_) => DMatrix::from_row_slice(
                2,
                2,
                &[
                    c(FRAC_1_SQRT_2, 0.0),
                    c(FRAC_1_SQRT_2, 0.0),
                    c(FRAC_1_SQRT_2, 0.0),
                    c(-FRAC_1_SQRT_2, 0.0),
                ],
            ),
            Gate::Phase(_, t) => DMatrix::from_diagonal(&nalgebra::dvector![c(1.0, 0.0), Complex64::cis(t)]),
            Gate::Rz(_, t) => DMatrix::from_diagonal(&nalgebra::dvector![
                Complex64::cis(-t / 2.0),
                Complex64::cis(t / 2.0)
            ]),
            Gate::Rzz(_, _, t) => {
                let even = Complex64::cis(-t / 2.0);
                let odd = Complex64::cis(t / 2.0);
                DMatrix::from_diagonal(&nalgebra::dvector![even, odd, odd, even])
            }
            Gate::Cx { .. } => {
                // control is bit 0, target bit 1: |c=1,t=0> (1) <-> |c=1,t=1> (3)
                let mut m = DMatrix::zeros(4, 4);
                m[(0, 0)] = c(1.0, 0.0);
                m[(2, 2)] = c(1.0, 0.0);
                m[(3, 1)] = c(1.0, 0.0);
                m[(1, 3)] = c(1.0, 0.0);
                m
            }
        }
    }

    /// Rewrites the gate into `{H, Phase, Rz, CX}`; `Rzz` becomes `CX · Rz · CX`.
    pub(crate) fn decompose_into(&self, out: &mut Vec<Gate>) {
        match *self {
            Gate::Rzz(a, b, t) => {
                out.push(Gate::Cx {
                    control: a,
                    target: b,
                });
                out.push(Gate::Rz(b, t));
                out.push(Gate::Cx {
                    control: a,
                    target: b,
                });
            }
            g => out.push(g),
        }
    }
}

/// Applies `gate` in place. Targets must already be validated.
pub(crate) fn apply_unchecked(amps: &mut [Complex64], gate: &Gate) {
    match *gate {
        Gate::H(q) => {
            let bit = 1usize << q;
            for i in 0..amps.len() {
                if i & bit == 0 {
                    let (a, b) = (amps[i], amps[i | bit]);
                    amps[i] = (a + b) * FRAC_1_SQRT_2;
                    amps[i | bit] = (a - b) * FRAC_1_SQRT_2;
                }
            }
        }
        Gate::Phase(q, t) => {
            let bit = 1usize << q;
            let phase = Complex64::cis(t);
            for (i, a) in amps.iter_mut().enumerate() {
                if i & bit != 0 {
                    *a *= phase;
                }
            }
        }
        Gate::Rz(q, t) => {
            let bit = 1usize << q;
            let (lo, hi) = (Complex64::cis(-t / 2.0), Complex64::cis(t / 2.0));
            for (i, a) in amps.iter_mut().enumerate() {
                *a *= if i & bit == 0 { lo } else { hi };
            }
        }
        Gate::Rzz(p, q, t) => {
            let (bp, bq) = (1usize << p, 1usize << q);
            let (even, odd) = (Complex64::cis(-t / 2.0), Complex64::cis(t / 2.0));
            for (i, a) in amps.iter_mut().enumerate() {
                let parity = ((i & bp) != 0) ^ ((i & bq) != 0);
                *a *= if parity { odd } else { even };
            }
        }
        Gate::Cx { control, target } => {
            let (bc, bt) = (1usize << control, 1usize << target);
            for i in 0..amps.len() {
                if i & bc != 0 && i & bt == 0 {
                    amps.swap(i, i | bt);
                }
            }
        }
    }
}

/// Single-qubit Pauli used for error injection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub(crate) fn from_code(code: u8) -> Pauli {
        match code & 3 {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            _ => Pauli::Z,
        }
    }
}

pub(crate) fn apply_pauli(amps: &mut [Complex64], q: usize, pauli: Pauli) {
    let bit = 1usize << q;
    let i_unit = Complex64::new(0.0, 1.0);
    match pauli {
        Pauli::I => {}
        Pauli::X => {
            for i in 0..amps.len() {
                if i & bit == 0 {
                    amps.swap(i, i | bit);
                }
            }
        }
        Pauli::Y => {
            for i in 0..amps.len() {
                if i & bit == 0 {
                    let (a, b) = (amps[i], amps[i | bit]);
                    amps[i] = -i_unit * b;
                    amps[i | bit] = i_unit * a;
                }
            }
        }
        Pauli::Z => {
            for (i, a) in amps.iter_mut().enumerate() {
                if i & bit != 0 {
                    *a = -*a;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_kinds() -> Vec<Gate> {
        vec![
            Gate::H(0),
            Gate::Phase(0, 0.7),
            Gate::Rz(0, -1.3),
            Gate::Rzz(0, 1, 2.1),
            Gate::Cx {
                control: 0,
                target: 1,
            },
        ]
    }

    #[test]
    fn matrices_are_unitary() {
        for g in all_kinds() {
            let m = g.matrix();
            let prod = m.adjoint() * &m;
            let eye = DMatrix::<Complex64>::identity(m.nrows(), m.ncols());
            assert!((prod - eye).norm() < 1e-12, "{g:?}");
        }
    }

    #[test]
    fn in_place_application_matches_matrix() {
        for g in all_kinds() {
            let m = g.matrix();
            let dim = m.nrows();
            for basis in 0..dim {
                let mut amps = vec![Complex64::new(0.0, 0.0); dim];
                amps[basis] = Complex64::new(1.0, 0.0);
                apply_unchecked(&mut amps, &g);
                for row in 0..dim {
                    assert!((amps[row] - m[(row, basis)]).norm() < 1e-15, "{g:?} col {basis}");
                }
            }
        }
    }

    #[test]
    fn validation_rejects_bad_targets_and_angles() {
        assert!(matches!(
            Gate::H(3).validate(3),
            Err(Error::InvalidQubit { index: 3, .. })
        ));
        assert!(matches!(
            Gate::Rzz(1, 1, 0.2).validate(3),
            Err(Error::RepeatedTarget(1))
        ));
        assert!(matches!(
            Gate::Phase(0, f64::NAN).validate(1),
            Err(Error::NonFinite(_))
        ));
        assert!(Gate::Cx {
            control: 2,
            target: 0
        }
        .validate(3)
        .is_ok());
    }

    #[test]
    fn rzz_decomposition_is_exact() {
        let g = Gate::Rzz(0, 1, 0.9);
        let mut native = Vec::new();
        g.decompose_into(&mut native);
        assert_eq!(native.len(), 3);
        for basis in 0..4 {
            let mut direct = vec![Complex64::new(0.0, 0.0); 4];
            direct[basis] = Complex64::new(1.0, 0.0);
            let mut staged = direct.clone();
            apply_unchecked(&mut direct, &g);
            for n in &native {
                apply_unchecked(&mut staged, n);
            }
            for (a, b) in direct.iter().zip(&staged) {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn inverse_undoes_gate() {
        for g in all_kinds() {
            let mut amps: Vec<Complex64> = (0..4)
                .map(|i| Complex64::new(0.1 * i as f64 + 0.2, 0.3 - 0.05 * i as f64))
                .collect();
            let before = amps.clone();
            apply_unchecked(&mut amps, &g);
            apply_unchecked(&mut amps, &g.inverse());
            for (a, b) in amps.iter().zip(&before) {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }
}
