//! Python bindings for the amortized-synthesis toolkit: model checkpoints,
//! dataset generation, the three trainers, simulators, and per-goal design
//! inference.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use amortize::data::{ArmDataset, BallisticDataset, FiberDataset, Path2D, RobotDesign};
use amortize::losses::RobotCostConfig;
use amortize::optim::BfgsConfig;
use amortize::pipeline as pl;
use amortize::sim;

fn err(e: amortize::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_path2d(points: Vec<(f64, f64)>) -> PyResult<Path2D> {
    Path2D::new_unchecked_spacing(points.into_iter().map(|(x, y)| [x, y]).collect()).map_err(err)
}

fn from_points(points: &[[f64; 2]]) -> Vec<(f64, f64)> {
    points.iter().map(|p| (p[0], p[1])).collect()
}

/// A trained multilayer perceptron checkpoint.
#[pyclass(name = "Mlp")]
#[derive(Clone)]
struct PyMlp {
    inner: amortize::nn::Mlp,
}

#[pymethods]
impl PyMlp {
    /// Load a JSON checkpoint.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: amortize::nn::Mlp::load(std::path::Path::new(path)).map_err(err)? })
    }

    /// Save a JSON checkpoint.
    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(std::path::Path::new(path)).map_err(err)
    }

    /// Evaluate the network on one input vector.
    fn forward(&self, input: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.forward_value(&input).map_err(err)
    }

    #[getter]
    fn layer_sizes(&self) -> Vec<usize> {
        self.inner.spec.layer_sizes.clone()
    }

    fn __repr__(&self) -> String {
        format!("Mlp(layer_sizes={:?})", self.inner.spec.layer_sizes)
    }
}

/// Generate a dataset ("ballistic", "fiber", or "arm") and write it as
/// NDJSON. Returns the sample count.
#[pyfunction]
#[pyo3(signature = (task, count, seed, out_path, points=200, ess_iters=100))]
fn gen_dataset(
    task: &str,
    count: usize,
    seed: u64,
    out_path: &str,
    points: usize,
    ess_iters: usize,
) -> PyResult<usize> {
    match task {
        "ballistic" => pl::gen_ballistic(count, seed)
            .and_then(|d| d.save_ndjson("ballistic", std::path::Path::new(out_path)))
            .map_err(err)?,
        "fiber" => pl::gen_fiber(count, points, ess_iters, seed)
            .and_then(|d| d.save_ndjson("fiber", std::path::Path::new(out_path)))
            .map_err(err)?,
        "arm" => pl::gen_arm(count, seed)
            .and_then(|d| d.save_ndjson("arm", std::path::Path::new(out_path)))
            .map_err(err)?,
        _ => return Err(PyValueError::new_err(format!("unknown task '{task}'"))),
    }
    Ok(count)
}

/// Train a model ("decoder", "encoder", or "direct") on an NDJSON dataset.
/// Returns (model, train_loss_per_epoch, val_loss_per_epoch). The encoder
/// requires a decoder.
#[pyfunction]
#[pyo3(signature = (task, model, data_path, decoder=None, epochs=None, lr=None,
                    lr_decay=None, batch_size=None, lam=None, seed=None, hidden=None))]
#[allow(clippy::too_many_arguments)]
fn train(
    task: &str,
    model: &str,
    data_path: &str,
    decoder: Option<PyMlp>,
    epochs: Option<usize>,
    lr: Option<f64>,
    lr_decay: Option<f64>,
    batch_size: Option<usize>,
    lam: Option<f64>,
    seed: Option<u64>,
    hidden: Option<Vec<usize>>,
) -> PyResult<(PyMlp, Vec<f64>, Vec<f64>)> {
    let task: pl::Task = task.parse().map_err(err)?;
    let kind = match model {
        "decoder" => pl::ModelKind::Decoder,
        "encoder" => pl::ModelKind::Encoder,
        "direct" => pl::ModelKind::DirectLearning,
        _ => return Err(PyValueError::new_err(format!("unknown model kind '{model}'"))),
    };
    if kind == pl::ModelKind::Encoder && decoder.is_none() {
        return Err(PyValueError::new_err("encoder training requires a decoder"));
    }
    let mut cfg = pl::TrainConfig::defaults(task, kind);
    if let Some(v) = epochs {
        cfg.epochs = v;
    }
    if let Some(v) = lr {
        cfg.lr = v;
    }
    if let Some(v) = lr_decay {
        cfg.lr_decay = v;
    }
    if let Some(v) = batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = lam {
        cfg.lambda = v;
    }
    if let Some(v) = seed {
        cfg.seed = v;
    }
    if let Some(v) = hidden {
        cfg.hidden = Some(v);
    }
    let dec = decoder.map(|d| d.inner);
    let result = match task {
        pl::Task::Ballistic => {
            let ds = BallisticDataset::load_ndjson(std::path::Path::new(data_path)).map_err(err)?.1;
            match kind {
                pl::ModelKind::Decoder => pl::train_ballistic_decoder(&ds, &cfg),
                pl::ModelKind::Encoder => pl::train_ballistic_encoder(&ds, dec.as_ref().unwrap(), &cfg),
                pl::ModelKind::DirectLearning => pl::train_ballistic_direct(&ds, &cfg),
            }
        }
        pl::Task::Fiber => {
            let ds = FiberDataset::load_ndjson(std::path::Path::new(data_path)).map_err(err)?.1;
            match kind {
                pl::ModelKind::Decoder => pl::train_fiber_decoder(&ds, &cfg),
                pl::ModelKind::Encoder => pl::train_fiber_encoder(&ds, dec.as_ref().unwrap(), &cfg),
                pl::ModelKind::DirectLearning => pl::train_fiber_direct(&ds, &cfg),
            }
        }
        pl::Task::Arm => {
            let ds = ArmDataset::load_ndjson(std::path::Path::new(data_path)).map_err(err)?.1;
            match kind {
                pl::ModelKind::Decoder => pl::train_arm_decoder(&ds, &cfg),
                pl::ModelKind::Encoder => pl::train_arm_encoder(&ds, dec.as_ref().unwrap(), &cfg),
                pl::ModelKind::DirectLearning => pl::train_arm_direct(&ds, &cfg),
            }
        }
    }
    .map_err(err)?;
    Ok((PyMlp { inner: result.model }, result.train_loss, result.val_loss))
}

/// Landing distance for a launch angle (radians).
#[pyfunction]
fn ballistic_realize(theta: f64) -> PyResult<f64> {
    sim::ballistic_realize(theta, &sim::BallisticConfig::default()).map_err(err)
}

/// Maximum landing distance of the ballistic toy.
#[pyfunction]
fn ballistic_max_range() -> f64 {
    sim::BallisticConfig::default().max_range()
}

/// Launch angle predicted by a design network for a goal distance.
#[pyfunction]
fn ballistic_design(model: &PyMlp, goal: f64) -> PyResult<f64> {
    pl::ballistic_encoder_design(&model.inner, goal).map_err(err)
}

/// Per-goal BFGS on the frozen ballistic decoder; returns the angle.
#[pyfunction]
fn ballistic_direct_optimize(goal: f64, decoder: &PyMlp) -> PyResult<f64> {
    pl::ballistic_direct_optimize(goal, &decoder.inner, &BfgsConfig::default())
        .map(|(theta, _)| theta)
        .map_err(err)
}

/// Deposited fiber path for an extruder path (list of (x, y) points).
#[pyfunction]
fn fiber_realize(extruder: Vec<(f64, f64)>) -> PyResult<Vec<(f64, f64)>> {
    let path = to_path2d(extruder)?;
    let u = sim::fiber_realize(&path, &sim::FiberConfig::default()).map_err(err)?;
    Ok(from_points(u.points()))
}

/// Extruder path predicted by a design network for a goal path.
#[pyfunction]
fn fiber_design(model: &PyMlp, goal: Vec<(f64, f64)>) -> PyResult<Vec<(f64, f64)>> {
    let goal = to_path2d(goal)?;
    let theta = pl::fiber_encoder_design(&model.inner, &goal).map_err(err)?;
    Ok(from_points(theta.points()))
}

/// Symmetric Chamfer distance between two point sequences.
#[pyfunction]
fn chamfer(a: Vec<(f64, f64)>, b: Vec<(f64, f64)>) -> PyResult<f64> {
    Ok(amortize::geometry::chamfer(&to_path2d(a)?, &to_path2d(b)?))
}

/// Arm mesh vertices for 40 stretch ratios.
#[pyfunction]
fn arm_realize(ratios: Vec<f64>) -> PyResult<Vec<(f64, f64)>> {
    let design = RobotDesign::new(ratios).map_err(err)?;
    let u = sim::arm_realize(&design, &sim::ArmConfig::default()).map_err(err)?;
    Ok(from_points(&u.vertices))
}

/// Stretch ratios predicted by a design network for a goal
/// (target, obstacle center).
#[pyfunction]
fn arm_design(
    model: &PyMlp,
    target: (f64, f64),
    obstacle_center: (f64, f64),
) -> PyResult<Vec<f64>> {
    let goal = amortize::data::RobotGoal::new(
        [target.0, target.1],
        [obstacle_center.0, obstacle_center.1],
        amortize::data::OBSTACLE_RADIUS,
    )
    .map_err(err)?;
    let design = pl::arm_encoder_design(&model.inner, &goal).map_err(err)?;
    Ok(design.ratios().to_vec())
}

/// Per-goal BFGS on the frozen arm decoder; returns the stretch ratios.
#[pyfunction]
fn arm_direct_optimize(
    decoder: &PyMlp,
    target: (f64, f64),
    obstacle_center: (f64, f64),
) -> PyResult<Vec<f64>> {
    let goal = amortize::data::RobotGoal::new(
        [target.0, target.1],
        [obstacle_center.0, obstacle_center.1],
        amortize::data::OBSTACLE_RADIUS,
    )
    .map_err(err)?;
    let cfg = BfgsConfig { max_iterations: 100, ..BfgsConfig::default() };
    pl::arm_direct_optimize(&goal, &decoder.inner, &RobotCostConfig::default(), &cfg)
        .map(|(d, _)| d.ratios().to_vec())
        .map_err(err)
}

#[pymodule]
fn amortize_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMlp>()?;
    m.add_function(wrap_pyfunction!(gen_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(ballistic_realize, m)?)?;
    m.add_function(wrap_pyfunction!(ballistic_max_range, m)?)?;
    m.add_function(wrap_pyfunction!(ballistic_design, m)?)?;
    m.add_function(wrap_pyfunction!(ballistic_direct_optimize, m)?)?;
    m.add_function(wrap_pyfunction!(fiber_realize, m)?)?;
    m.add_function(wrap_pyfunction!(fiber_design, m)?)?;
    m.add_function(wrap_pyfunction!(chamfer, m)?)?;
    m.add_function(wrap_pyfunction!(arm_realize, m)?)?;
    m.add_function(wrap_pyfunction!(arm_design, m)?)?;
    m.add_function(wrap_pyfunction!(arm_direct_optimize, m)?)?;
    Ok(())
}
