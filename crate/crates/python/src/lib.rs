//! Python bindings: density matrices, channels, calibration, the QNN model,
//! data preparation, training and noise sweeps.

use noisereg_core::channels::{gamma_from_t1, gamma_from_t2, parse_duration};
use noisereg_core::experiments;
use noisereg_core::linalg::{self, C64};
use noisereg_core::{self as core, ChannelKind, NoiseSpec};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: core::Error) -> PyErr {
    match e {
        core::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn noise_spec(channel: Option<&str>, gamma: f64) -> PyResult<NoiseSpec> {
    match channel {
        None | Some("none") => Ok(NoiseSpec::none()),
        Some(label) => {
            let kind: ChannelKind = label.parse().map_err(to_py)?;
            NoiseSpec::new(kind, gamma).map_err(to_py)
        }
    }
}

fn channel_kind(label: &str) -> PyResult<ChannelKind> {
    label.parse().map_err(to_py)
}

/// Duration in seconds, from a number or a string such as "240ns".
fn seconds(value: &Bound<'_, PyAny>) -> PyResult<f64> {
    if let Ok(text) = value.extract::<String>() {
        parse_duration(&text).map_err(to_py)
    } else {
        value.extract::<f64>()
    }
}

#[pyclass(name = "DensityMatrix", module = "noisereg", skip_from_py_object)]
#[derive(Clone)]
struct PyDensityMatrix {
    inner: core::DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    /// |0…0⟩⟨0…0| on `n_qubits` qubits.
    #[new]
    fn new(n_qubits: usize) -> PyResult<Self> {
        Ok(Self {
            inner: core::DensityMatrix::zero_state(n_qubits).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_statevector(amplitudes: Vec<C64>) -> PyResult<Self> {
        Ok(Self {
            inner: core::DensityMatrix::from_statevector(&amplitudes).map_err(to_py)?,
        })
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    fn rx(&mut self, theta: f64, target: usize) -> PyResult<()> {
        self.inner.apply_single_qubit_gate(&linalg::rx(theta), target).map_err(to_py)
    }

    fn ry(&mut self, theta: f64, target: usize) -> PyResult<()> {
        self.inner.apply_single_qubit_gate(&linalg::ry(theta), target).map_err(to_py)
    }

    fn rxx(&mut self, theta: f64, a: usize, b: usize) -> PyResult<()> {
        self.inner.apply_two_qubit_gate(&linalg::rxx(theta), (a, b)).map_err(to_py)
    }

    /// Apply channel "ad", "pd" or "dp" with strength `gamma` to `target`.
    fn apply_channel(&mut self, channel: &str, gamma: f64, target: usize) -> PyResult<()> {
        let kraus = channel_kind(channel)?.kraus(gamma).map_err(to_py)?;
        self.inner.apply_channel(&kraus, target).map_err(to_py)
    }

    fn trace(&self) -> f64 {
        self.inner.trace()
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    fn expectation_all_z(&self) -> f64 {
        self.inner.expectation_all_z()
    }

    /// Matrix elements as nested lists of complex numbers.
    fn to_list(&self) -> Vec<Vec<C64>> {
        self.inner.to_rows()
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(n_qubits={}, trace={:.6})", self.inner.n_qubits(), self.inner.trace())
    }
}

/// Kraus operators of a channel as 2x2 nested lists.
#[pyfunction]
fn kraus_operators(channel: &str, gamma: f64) -> PyResult<Vec<Vec<Vec<C64>>>> {
    let set = channel_kind(channel)?.kraus(gamma).map_err(to_py)?;
    Ok(set
        .operators()
        .iter()
        .map(|m| m.iter().map(|row| row.to_vec()).collect())
        .collect())
}

/// Damping strengths `(gamma_ad, gamma_pd)` for the given coherence and
/// gate times (seconds or strings like "25us").
#[pyfunction]
fn calibrate(t1: &Bound<'_, PyAny>, t2: &Bound<'_, PyAny>, tgate: &Bound<'_, PyAny>) -> PyResult<(f64, f64)> {
    let hw = core::HardwareCoherence::new(seconds(t1)?, seconds(t2)?, seconds(tgate)?).map_err(to_py)?;
    Ok((gamma_from_t1(&hw).map_err(to_py)?, gamma_from_t2(&hw).map_err(to_py)?))
}

#[pyclass(name = "QnnModel", module = "noisereg", skip_from_py_object)]
#[derive(Clone)]
struct PyQnnModel {
    inner: core::QnnModel,
}

#[pymethods]
impl PyQnnModel {
    #[new]
    #[pyo3(signature = (layers = 5, channel = None, gamma = 0.0, noise_after_encoding = true))]
    fn new(layers: usize, channel: Option<&str>, gamma: f64, noise_after_encoding: bool) -> PyResult<Self> {
        let config = core::AnsatzConfig {
            noise_after_encoding,
            ..core::AnsatzConfig::new(layers)
        };
        Ok(Self {
            inner: core::QnnModel::new(config, noise_spec(channel, gamma)?).map_err(to_py)?,
        })
    }

    #[getter]
    fn n_params(&self) -> usize {
        self.inner.n_params()
    }

    #[getter]
    fn n_layers(&self) -> usize {
        self.inner.n_layers()
    }

    fn noise_insertions(&self) -> usize {
        self.inner.noise_insertions()
    }

    fn forward(&self, features: [f64; 2], params: Vec<f64>) -> PyResult<f64> {
        self.inner.forward(&features, &params).map_err(to_py)
    }

    /// Parameter-shift gradient of the prediction.
    fn gradient(&self, features: [f64; 2], params: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.parameter_shift_gradient(&features, &params).map_err(to_py)
    }

    fn value_and_gradient(&self, features: [f64; 2], params: Vec<f64>) -> PyResult<(f64, Vec<f64>)> {
        self.inner.value_and_gradient(&features, &params).map_err(to_py)
    }
}

#[pyclass(name = "Dataset", module = "noisereg", skip_from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: core::PreparedDataset,
}

#[pymethods]
impl PyDataset {
    /// Load the diabetes table and prepare the seeded 40/400 split.
    #[staticmethod]
    #[pyo3(signature = (path, seed = 0))]
    fn load(path: std::path::PathBuf, seed: u64) -> PyResult<Self> {
        let raw = core::load_diabetes(&path).map_err(to_py)?;
        Ok(Self {
            inner: core::prepare(&raw, &core::PrepareOptions::with_seed(seed)).map_err(to_py)?,
        })
    }

    /// `[(x0, x1, y), …]` for the training rows.
    #[getter]
    fn train(&self) -> Vec<(f64, f64, f64)> {
        self.inner.train.iter().map(|s| (s.features[0], s.features[1], s.target)).collect()
    }

    #[getter]
    fn validation(&self) -> Vec<(f64, f64, f64)> {
        self.inner.validation.iter().map(|s| (s.features[0], s.features[1], s.target)).collect()
    }

    /// Split indices and scaler parameters as JSON.
    fn split_json(&self) -> PyResult<String> {
        self.inner.split_json().map_err(to_py)
    }

    /// Validation MSE of the constant predictions 0 and 1.
    fn baselines(&self) -> PyResult<(f64, f64)> {
        experiments::naive_baseline_losses(&self.inner).map_err(to_py)
    }
}

#[pyclass(name = "TrainingRecord", module = "noisereg", skip_from_py_object, get_all)]
#[derive(Clone)]
struct PyTrainingRecord {
    seed: u64,
    train_mse: Vec<f64>,
    val_mse: Vec<f64>,
    initial_params: Vec<f64>,
    final_params: Vec<f64>,
    csv: String,
    json: String,
}

#[pyfunction]
#[pyo3(signature = (model, data, seed = 0, epochs = 20, batch = 20, lr = 0.03))]
fn train(
    py: Python<'_>,
    model: &PyQnnModel,
    data: &PyDataset,
    seed: u64,
    epochs: usize,
    batch: usize,
    lr: f64,
) -> PyResult<PyTrainingRecord> {
    let mut config = core::TrainConfig {
        epochs,
        batch_size: batch,
        ..core::TrainConfig::with_seed(seed)
    };
    config.adam.learning_rate = lr;
    let (model, data) = (model.inner.clone(), data.inner.clone());
    let record = py.detach(move || core::train(&model, &data, &config)).map_err(to_py)?;
    Ok(PyTrainingRecord {
        csv: core::report::record_csv(&record),
        json: core::report::record_json(&record).map_err(to_py)?,
        seed: record.seed,
        train_mse: record.train_mse,
        val_mse: record.val_mse,
        initial_params: record.initial_params,
        final_params: record.final_params,
    })
}

/// Noise sweep; returns `(gamma, mean_final_train_mse, mean_final_val_mse,
/// stderr_val)` per grid point.
#[pyfunction]
#[pyo3(signature = (channel, data, seeds = 16, layers = 5, epochs = 20, master_seed = 0,
                    grid_min_exp = -5.0, grid_max_exp = 0.0, grid_step = 0.25, workers = 0))]
#[allow(clippy::too_many_arguments)]
fn noise_sweep(
    py: Python<'_>,
    channel: &str,
    data: &PyDataset,
    seeds: usize,
    layers: usize,
    epochs: usize,
    master_seed: u64,
    grid_min_exp: f64,
    grid_max_exp: f64,
    grid_step: f64,
    workers: usize,
) -> PyResult<Vec<(f64, f64, f64, f64)>> {
    let kind = channel_kind(channel)?;
    let grid = core::GammaGrid::decades(grid_min_exp, grid_max_exp, grid_step, true).map_err(to_py)?;
    let config = core::SweepConfig {
        layers,
        n_seeds: seeds,
        master_seed,
        train: core::TrainConfig {
            epochs,
            ..core::TrainConfig::default()
        },
        noise_after_encoding: true,
        workers,
    };
    let data = data.inner.clone();
    let sweep = py
        .detach(move || experiments::run_noise_sweep(kind, &grid, &data, &config))
        .map_err(to_py)?;
    Ok(sweep
        .summary
        .iter()
        .map(|r| (r.gamma, r.mean_final_train_mse, r.mean_final_val_mse, r.stderr_val))
        .collect())
}

#[pymodule]
fn noisereg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyQnnModel>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyTrainingRecord>()?;
    m.add_function(wrap_pyfunction!(kraus_operators, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(noise_sweep, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
