//! Shot-based estimation of compute-uncompute fidelities under stochastic Pauli noise.
//!
//! Each shot is one Monte-Carlo wavefunction trajectory of the native circuit
//! (`Rzz` expanded to `CX · Rz · CX`). After every gate a uniformly random
//! non-identity Pauli on the gate's qubits is inserted with probability `p1`
//! (one-qubit gates) or `p2` (CX). The trajectory is measured in the
//! computational basis and every readout bit flips with probability
//! `p_readout`. The estimate is the fraction of shots reading all zeros.
//!
//! Sampling is exact in distribution but avoids re-simulating every shot:
//! error-free shots all share the ideal final state, so their successes are
//! drawn in one binomial step, and the all-zeros readout probability of each
//! distinct error pattern is computed once and cached.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::circuit::Circuit;
use super::gate::{apply_pauli, apply_unchecked, Gate, Pauli};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Depolarizing probability after each one-qubit gate.
    pub p1: f64,
    /// Depolarizing probability after each CX.
    pub p2: f64,
    /// Independent bit-flip probability per measured qubit.
    pub p_readout: f64,
    pub shots: u32,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            p1: 0.001,
            p2: 0.01,
            p_readout: 0.02,
            shots: 8192,
        }
    }
}

impl NoiseConfig {
    /// Pure shot noise.
    pub fn noiseless(shots: u32) -> Self {
        NoiseConfig {
            p1: 0.0,
            p2: 0.0,
            p_readout: 0.0,
            shots,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("p_readout", self.p_readout)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(format!("{name} = {p} is not a probability")));
            }
        }
        if self.shots == 0 {
            return Err(Error::param("shots must be at least 1"));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.p_readout == 0.0
    }
}

/// Estimates the all-zeros probability of `circuit` (normally `U†(x_i) U(x_j)`)
/// from `noise.shots` noisy trajectories. Deterministic given `seed`.
pub fn sample_fidelity(circuit: &Circuit, noise: &NoiseConfig, seed: u64) -> Result<f64> {
    noise.validate()?;
    let mut rng = seed::rng(seed);
    let hits = if noise.p1 == 0.0 && noise.p2 == 0.0 {
        let state = circuit.run();
        let q = readout_zero_probability(state.amplitudes(), noise.p_readout);
        binomial(&mut rng, u64::from(noise.shots), q)
    } else {
        TrajectorySampler::new(circuit, noise).count_zero_readouts(&mut rng)
    };
    Ok(hits as f64 / f64::from(noise.shots))
}

fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    if n == 0 {
        return 0;
    }
    Binomial::new(n, p.clamp(0.0, 1.0))
        .expect("probability clamped to [0, 1]")
        .sample(rng)
}

/// Probability that measuring `amps` and flipping each bit with `p_flip` reads `0…0`.
fn readout_zero_probability(amps: &[Complex64], p_flip: f64) -> f64 {
    if p_flip == 0.0 {
        return amps[0].norm_sqr().clamp(0.0, 1.0);
    }
    let n = amps.len().trailing_zeros() as usize;
    let keep = 1.0 - p_flip;
    let weight: Vec<f64> = (0..=n)
        .map(|flips| p_flip.powi(flips as i32) * keep.powi((n - flips) as i32))
        .collect();
    amps.iter()
        .enumerate()
        .map(|(b, a)| a.norm_sqr() * weight[b.count_ones() as usize])
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// (gate index, Pauli code) pairs; codes index `I,X,Y,Z` per target, two bits each.
type ErrorPattern = Vec<(u32, u8)>;

struct TrajectorySampler {
    gates: Vec<Gate>,
    /// `prefix[g]` is the ideal state before gate `g`; `prefix[len]` is the final state.
    prefix: Vec<Vec<Complex64>>,
    /// `log_survival[g] = Σ_{h<g} ln(1 − p_h)`.
    log_survival: Vec<f64>,
    p_readout: f64,
    shots: u64,
    cache: HashMap<ErrorPattern, f64>,
}

impl TrajectorySampler {
    fn new(circuit: &Circuit, noise: &NoiseConfig) -> Self {
        let native = circuit.decompose();
        let gates = native.gates().to_vec();
        let mut prefix = Vec::with_capacity(gates.len() + 1);
        let mut state = Circuit::new(circuit.n_qubits())
            .expect("register validated")
            .run()
            .amplitudes()
            .to_vec();
        prefix.push(state.clone());
        for g in &gates {
            apply_unchecked(&mut state, g);
            prefix.push(state.clone());
        }
        let mut log_survival = Vec::with_capacity(gates.len() + 1);
        let mut acc = 0.0;
        log_survival.push(acc);
        for g in &gates {
            let p = if g.arity() == 1 { noise.p1 } else { noise.p2 };
            acc += (1.0 - p).ln();
            log_survival.push(acc);
        }
        TrajectorySampler {
            gates,
            prefix,
            log_survival,
            p_readout: noise.p_readout,
            shots: u64::from(noise.shots),
            cache: HashMap::new(),
        }
    }

    /// Index of the first erroneous gate at or after `start`, given `ln u` for a
    /// uniform `u ∈ (0, 1]`. The survival through gate `h` is
    /// `exp(log_survival[h+1] − log_survival[start])`; the first error is the
    /// smallest `h` whose survival drops below `u`.
    fn next_error(&self, start: usize, ln_u: f64) -> Option<usize> {
        let base = self.log_survival[start];
        let tail = &self.log_survival[start + 1..];
        let offset = tail.partition_point(|&ls| ls - base >= ln_u);
        (offset < tail.len()).then_some(start + offset)
    }

    fn count_zero_readouts(&mut self, rng: &mut ChaCha8Rng) -> u64 {
        let total = *self.log_survival.last().expect("non-empty");
        let p_clean = total.exp();
        let ideal = readout_zero_probability(self.prefix.last().expect("non-empty"), self.p_readout);

        let noisy_shots = binomial(rng, self.shots, 1.0 - p_clean);
        let mut hits = binomial(rng, self.shots - noisy_shots, ideal);

        let mut pattern = ErrorPattern::new();
        for _ in 0..noisy_shots {
            pattern.clear();
            // First error conditioned on at least one: u uniform on (p_clean, 1].
            let v: f64 = 1.0 - rng.random::<f64>();
            let u = p_clean + (1.0 - p_clean) * v;
            let mut at = self.next_error(0, u.ln());
            while let Some(g) = at {
                let code = match self.gates[g].arity() {
                    1 => rng.random_range(1..4u8),
                    _ => rng.random_range(1..16u8),
                };
                pattern.push((g as u32, code));
                if g + 1 >= self.gates.len() {
                    break;
                }
                let w: f64 = 1.0 - rng.random::<f64>();
                at = self.next_error(g + 1, w.ln());
            }
            let q = match self.cache.get(&pattern) {
                // Rounding at u ≈ p_clean can leave the pattern empty.
                _ if pattern.is_empty() => ideal,
                Some(&q) => q,
                None => {
                    let q = self.simulate(&pattern);
                    self.cache.insert(pattern.clone(), q);
                    q
                }
            };
            if rng.random::<f64>() < q {
                hits += 1;
            }
        }
        hits
    }

    fn simulate(&self, pattern: &[(u32, u8)]) -> f64 {
        let first = pattern[0].0 as usize;
        let mut amps = self.prefix[first].clone();
        let mut errors = pattern.iter().peekable();
        for (g, gate) in self.gates.iter().enumerate().skip(first) {
            apply_unchecked(&mut amps, gate);
            while let Some(&&(at, code)) = errors.peek() {
                if at as usize != g {
                    break;
                }
                let targets = gate.targets();
                for (slot, &q) in targets.iter().enumerate() {
                    apply_pauli(&mut amps, q, Pauli::from_code(code >> (2 * slot)));
                }
                errors.next();
            }
        }
        readout_zero_probability(&amps, self.p_readout)
    }
}
