//! Data re-uploading ansatz with per-gate noise, forward evaluation and
//! parameter-shift gradients.
//!
//! Each layer encodes the two features with RX on qubits 0 and 2, then
//! applies RY on every qubit and a ring of RXX gates
//! (0,1), (1,2), …, (n−1,0). After each gate the configured single-qubit
//! channel acts once on every qubit the gate touched.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{draw_pauli, NoiseSpec};
use crate::density::{self, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::{self, DampingMap, Superop};

/// Qubits carrying the two encoded features.
pub const ENCODING_QUBITS: [usize; 2] = [0, 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateSpec {
    EncodeRx { feature: usize, qubit: usize },
    TrainRy { param: usize, qubit: usize },
    TrainRxx { param: usize, qubits: (usize, usize) },
}

impl GateSpec {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            GateSpec::EncodeRx { qubit, .. } | GateSpec::TrainRy { qubit, .. } => vec![qubit],
            GateSpec::TrainRxx { qubits: (a, b), .. } => vec![a, b],
        }
    }

    pub fn param(&self) -> Option<usize> {
        match *self {
            GateSpec::EncodeRx { .. } => None,
            GateSpec::TrainRy { param, .. } | GateSpec::TrainRxx { param, .. } => Some(param),
        }
    }

    pub fn is_encoding(&self) -> bool {
        matches!(self, GateSpec::EncodeRx { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzConfig {
    pub n_qubits: usize,
    pub n_layers: usize,
    /// Whether encoding gates are also followed by noise.
    pub noise_after_encoding: bool,
}

impl AnsatzConfig {
    pub fn new(n_layers: usize) -> Self {
        Self {
            n_qubits: 4,
            n_layers,
            noise_after_encoding: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QnnModel {
    n_qubits: usize,
    n_layers: usize,
    gates: Vec<GateSpec>,
    noise: NoiseSpec,
    noise_after_encoding: bool,
    /// Current trainable angles in radians.
    pub params: Vec<f64>,
}

/// Standard 4-qubit ansatz with `n_layers` layers.
pub fn build_ansatz(n_layers: usize, noise: NoiseSpec) -> Result<QnnModel> {
    QnnModel::new(AnsatzConfig::new(n_layers), noise)
}

impl QnnModel {
    pub fn new(config: AnsatzConfig, noise: NoiseSpec) -> Result<Self> {
        let AnsatzConfig {
            n_qubits,
            n_layers,
            noise_after_encoding,
        } = config;
        if n_layers < 1 {
            return Err(Error::invalid("ansatz needs at least one layer"));
        }
        if n_qubits < 4 || n_qubits % 2 != 0 || n_qubits > density::MAX_QUBITS {
            return Err(Error::invalid(format!(
                "ansatz needs an even qubit count in 4..={}, got {n_qubits}",
                density::MAX_QUBITS
            )));
        }
        if let Some(kind) = noise.kind {
            // validates gamma
            kind.kraus(noise.gamma)?;
        }
        let mut gates = Vec::with_capacity(n_layers * (2 + 2 * n_qubits));
        let mut param = 0;
        for _ in 0..n_layers {
            for (feature, &qubit) in ENCODING_QUBITS.iter().enumerate() {
                gates.push(GateSpec::EncodeRx { feature, qubit });
            }
            for qubit in 0..n_qubits {
                gates.push(GateSpec::TrainRy { param, qubit });
                param += 1;
            }
            for a in 0..n_qubits {
                gates.push(GateSpec::TrainRxx {
                    param,
                    qubits: (a, (a + 1) % n_qubits),
                });
                param += 1;
            }
        }
        Ok(Self {
            n_qubits,
            n_layers,
            gates,
            noise,
            noise_after_encoding,
            params: vec![0.0; param],
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn n_params(&self) -> usize {
        2 * self.n_qubits * self.n_layers
    }

    pub fn gates(&self) -> &[GateSpec] {
        &self.gates
    }

    pub fn noise(&self) -> NoiseSpec {
        self.noise
    }

    pub fn noise_after_encoding(&self) -> bool {
        self.noise_after_encoding
    }

    /// Same circuit and parameters under a different noise setting.
    pub fn with_noise(&self, noise: NoiseSpec) -> Result<Self> {
        let mut out = Self::new(
            AnsatzConfig {
                n_qubits: self.n_qubits,
                n_layers: self.n_layers,
                noise_after_encoding: self.noise_after_encoding,
            },
            noise,
        )?;
        out.params.clone_from(&self.params);
        Ok(out)
    }

    fn noisy(&self, gate: &GateSpec) -> bool {
        !self.noise.is_none() && (self.noise_after_encoding || !gate.is_encoding())
    }

    /// Number of single-qubit channel applications in one forward pass.
    pub fn noise_insertions(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| self.noisy(g))
            .map(|g| g.qubits().len())
            .sum()
    }

    /// Largest number of gates acting on any one qubit within a layer.
    pub fn max_gates_per_qubit_per_layer(&self) -> usize {
        let per_layer = self.gates.len() / self.n_layers;
        let mut counts = vec![0usize; self.n_qubits];
        for g in &self.gates[..per_layer] {
            for q in g.qubits() {
                counts[q] += 1;
            }
        }
        counts.into_iter().max().unwrap_or(0)
    }

    fn check_inputs(&self, features: &[f64; 2], params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::invalid(format!(
                "expected {} parameters, got {}",
                self.n_params(),
                params.len()
            )));
        }
        if !features.iter().chain(params).all(|x| x.is_finite()) {
            return Err(Error::invalid("features and parameters must be finite"));
        }
        Ok(())
    }

    fn compile(&self, features: &[f64; 2], params: &[f64]) -> Result<Vec<Step>> {
        self.check_inputs(features, params)?;
        let noise = self.noise.kraus()?.map(|k| NoiseOp::new(k.superop()));
        Ok(self
            .gates
            .iter()
            .map(|g| {
                let noise = if self.noisy(g) { noise } else { None };
                let angle = match *g {
                    GateSpec::EncodeRx { feature, .. } => features[feature],
                    GateSpec::TrainRy { param, .. } | GateSpec::TrainRxx { param, .. } => params[param],
                };
                Step::new(*g, angle, noise)
            })
            .collect())
    }

    /// ⟨Z^⊗n⟩ after running the circuit on |0…0⟩.
    pub fn forward(&self, features: &[f64; 2], params: &[f64]) -> Result<f64> {
        let steps = self.compile(features, params)?;
        let mut rho = initial_state(self.n_qubits);
        for step in &steps {
            step.apply(&mut rho, self.n_qubits);
        }
        Ok(density::expectation_all_z(&rho, self.n_qubits))
    }

    /// Final state of the circuit, for inspection.
    pub fn final_state(&self, features: &[f64; 2], params: &[f64]) -> Result<DensityMatrix> {
        let steps = self.compile(features, params)?;
        let mut rho = initial_state(self.n_qubits);
        for step in &steps {
            step.apply(&mut rho, self.n_qubits);
        }
        Ok(DensityMatrix::from_raw(self.n_qubits, rho))
    }

    /// Prediction with the model's own parameters.
    pub fn predict(&self, features: &[f64; 2]) -> Result<f64> {
        self.forward(features, &self.params)
    }

    /// Parameter-shift gradient `g_j = [f(θ_j + π/2) − f(θ_j − π/2)] / 2`.
    ///
    /// Every shifted circuit is evaluated exactly, but without re-running it:
    /// the state entering each trainable gate is cached on a forward sweep
    /// and the measured observable is carried backwards through the
    /// remaining gates and channels (Heisenberg picture). A shifted value is
    /// then one gate application plus a trace inner product.
    ///
    /// Returns the unshifted prediction alongside the gradient.
    pub fn value_and_gradient(&self, features: &[f64; 2], params: &[f64]) -> Result<(f64, Vec<f64>)> {
        let n = self.n_qubits;
        let steps = self.compile(features, params)?;
        let mut rho = initial_state(n);
        let mut inputs: Vec<Option<Vec<linalg::C64>>> = Vec::with_capacity(steps.len());
        for step in &steps {
            inputs.push(step.gate.param().map(|_| rho.clone()));
            step.apply(&mut rho, n);
        }
        let value = density::expectation_all_z(&rho, n);

        let mut grad = vec![0.0; self.n_params()];
        let mut observable = density::all_z_observable(n);
        let mut scratch = vec![linalg::ZERO; rho.len()];
        for (step, input) in steps.iter().zip(inputs).rev() {
            // trailing noise of an RXX step goes into the observable first, so
            // the shifted evaluations below only need the bare gate
            step.apply_adjoint_noise(&mut observable, n);
            if let (Some(param), Some(input)) = (step.gate.param(), input) {
                let mut shifted = [0.0; 2];
                for (slot, shift) in shifted.iter_mut().zip([FRAC_PI_2, -FRAC_PI_2]) {
                    scratch.copy_from_slice(&input);
                    step.shifted(shift).apply_gate(&mut scratch, n);
                    *slot = density::hermitian_inner(&observable, &scratch);
                }
                grad[param] = 0.5 * (shifted[0] - shifted[1]);
            }
            step.apply_adjoint_gate(&mut observable, n);
        }
        Ok((value, grad))
    }

    pub fn parameter_shift_gradient(&self, features: &[f64; 2], params: &[f64]) -> Result<Vec<f64>> {
        self.value_and_gradient(features, params).map(|(_, g)| g)
    }

    /// Parameter-shift gradient by re-running the full circuit for every
    /// shifted parameter vector. Slow; kept as an independent cross-check of
    /// [`parameter_shift_gradient`](Self::parameter_shift_gradient).
    pub fn parameter_shift_gradient_rerun(&self, features: &[f64; 2], params: &[f64]) -> Result<Vec<f64>> {
        self.check_inputs(features, params)?;
        let mut shifted = params.to_vec();
        (0..params.len())
            .map(|j| {
                shifted[j] = params[j] + FRAC_PI_2;
                let plus = self.forward(features, &shifted)?;
                shifted[j] = params[j] - FRAC_PI_2;
                let minus = self.forward(features, &shifted)?;
                shifted[j] = params[j];
                Ok(0.5 * (plus - minus))
            })
            .collect()
    }

    /// Forward pass where each depolarizing channel is replaced by one
    /// randomly drawn Pauli gate (I with probability 1−γ, X/Y/Z with γ/3
    /// each). Averaging many draws converges to [`forward`](Self::forward).
    pub fn forward_sampled_pauli<R: Rng + ?Sized>(
        &self,
        features: &[f64; 2],
        params: &[f64],
        rng: &mut R,
    ) -> Result<f64> {
        if self.noise.kind != Some(crate::channels::ChannelKind::Depolarizing) {
            return Err(Error::invalid("sampled Pauli emulation requires the depolarizing channel"));
        }
        let steps = self.compile(features, params)?;
        let gamma = self.noise.gamma;
        let n = self.n_qubits;
        let mut rho = initial_state(n);
        for step in &steps {
            step.without_noise().apply(&mut rho, n);
            if step.noise.is_some() {
                for q in step.gate.qubits() {
                    let p = draw_pauli(gamma, rng.gen::<f64>());
                    if p != crate::channels::Pauli::I {
                        density::apply_block_map(&mut rho, n, q, &Superop::from_unitary(&p.matrix()));
                    }
                }
            }
        }
        Ok(density::expectation_all_z(&rho, n))
    }
}

fn initial_state(n_qubits: usize) -> Vec<linalg::C64> {
    let dim = 1usize << n_qubits;
    let mut rho = vec![linalg::ZERO; dim * dim];
    rho[0] = linalg::ONE;
    rho
}

/// Single-qubit channel, with the sparse damping form when it applies.
#[derive(Clone, Copy, Debug)]
struct NoiseOp {
    general: Superop,
    damping: Option<DampingMap>,
}

impl NoiseOp {
    fn new(general: Superop) -> Self {
        Self {
            general,
            damping: DampingMap::from_superop(&general),
        }
    }

    fn apply(&self, rho: &mut [linalg::C64], n: usize, qubit: usize) {
        match &self.damping {
            Some(d) => density::apply_damping_map(rho, n, qubit, d),
            None => density::apply_block_map(rho, n, qubit, &self.general),
        }
    }

    fn apply_adjoint(&self, obs: &mut [linalg::C64], n: usize, qubit: usize) {
        match &self.damping {
            Some(d) => density::apply_damping_map(obs, n, qubit, &d.adjoint()),
            None => density::apply_block_map(obs, n, qubit, &self.general.adjoint()),
        }
    }
}

/// One gate plus the channels that follow it.
#[derive(Clone, Copy, Debug)]
struct Step {
    gate: GateSpec,
    angle: f64,
    noise: Option<NoiseOp>,
    action: Action,
}

#[derive(Clone, Copy, Debug)]
enum Action {
    /// Gate and trailing noise fused into one block map.
    Single { qubit: usize, map: Superop },
    Rxx { qubits: (usize, usize), angle: f64 },
}

impl Step {
    fn new(gate: GateSpec, angle: f64, noise: Option<NoiseOp>) -> Self {
        let action = match gate {
            GateSpec::EncodeRx { qubit, .. } | GateSpec::TrainRy { qubit, .. } => {
                let u = if gate.is_encoding() {
                    linalg::rx(angle)
                } else {
                    linalg::ry(angle)
                };
                let map = Superop::from_unitary(&u);
                let map = noise.map_or(map, |n| n.general.after(&map));
                Action::Single { qubit, map }
            }
            GateSpec::TrainRxx { qubits, .. } => Action::Rxx { qubits, angle },
        };
        Self {
            gate,
            angle,
            noise,
            action,
        }
    }

    fn shifted(&self, shift: f64) -> Self {
        Self::new(self.gate, self.angle + shift, self.noise)
    }

    fn without_noise(&self) -> Self {
        Self::new(self.gate, self.angle, None)
    }

    fn apply(&self, rho: &mut [linalg::C64], n: usize) {
        self.apply_gate(rho, n);
        if let (Action::Rxx { qubits: (a, b), .. }, Some(noise)) = (self.action, &self.noise) {
            noise.apply(rho, n, a);
            noise.apply(rho, n, b);
        }
    }

    /// The gate, plus its noise only where the two are fused.
    fn apply_gate(&self, rho: &mut [linalg::C64], n: usize) {
        match self.action {
            Action::Single { qubit, ref map } => density::apply_block_map(rho, n, qubit, map),
            Action::Rxx { qubits: (a, b), angle } => density::apply_rxx(rho, n, a, b, angle),
        }
    }

    /// Heisenberg picture, O → Φ†(O): call `apply_adjoint_noise` then
    /// `apply_adjoint_gate`.
    fn apply_adjoint_noise(&self, obs: &mut [linalg::C64], n: usize) {
        if let (Action::Rxx { qubits: (a, b), .. }, Some(noise)) = (self.action, &self.noise) {
            noise.apply_adjoint(obs, n, b);
            noise.apply_adjoint(obs, n, a);
        }
    }

    fn apply_adjoint_gate(&self, obs: &mut [linalg::C64], n: usize) {
        match self.action {
            Action::Single { qubit, ref map } => density::apply_block_map(obs, n, qubit, &map.adjoint()),
            Action::Rxx { qubits: (a, b), angle } => density::apply_rxx(obs, n, a, b, -angle),
        }
    }
}
