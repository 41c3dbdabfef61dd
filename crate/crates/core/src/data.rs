//! Shared domain types, the dataset container, and deterministic splitting.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Number of controllable segments of the soft arm (both sides).
pub const ROBOT_DESIGN_DIM: usize = 40;
/// Allowed stretch-ratio range.
pub const STRETCH_MIN: f64 = 0.8;
pub const STRETCH_MAX: f64 = 1.2;
/// Default obstacle radius.
pub const OBSTACLE_RADIUS: f64 = 0.9;

/// An ordered sequence of 2-D points. Carrier for designs, realizations and
/// goals in the path task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path2D {
    points: Vec<[f64; 2]>,
}

impl Path2D {
    /// Validating constructor: at least two points, finite coordinates,
    /// no coincident consecutive points.
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidPath(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::InvalidPath(format!("non-finite point at index {i}")));
            }
        }
        for i in 1..points.len() {
            let dx = points[i][0] - points[i - 1][0];
            let dy = points[i][1] - points[i - 1][1];
            if (dx * dx + dy * dy).sqrt() <= 1e-12 {
                return Err(Error::InvalidPath(format!(
                    "coincident consecutive points at index {i}"
                )));
            }
        }
        Ok(Self { points })
    }

    /// Constructor for realization outputs, which may legitimately contain
    /// repeated consecutive points (e.g. a fiber that stalls while the nozzle
    /// moves within the lag radius). Coordinates must still be finite.
    pub fn new_unchecked_spacing(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidPath(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::InvalidPath(format!("non-finite point at index {i}")));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Flatten to [x0, y0, x1, y1, ...].
    pub fn to_flat(&self) -> Vec<f64> {
        self.points.iter().flat_map(|p| [p[0], p[1]]).collect()
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.len() % 2 != 0 {
            return Err(Error::InvalidPath("odd flat length".into()));
        }
        Self::new_unchecked_spacing(flat.chunks_exact(2).map(|c| [c[0], c[1]]).collect())
    }
}

/// Stretch ratios of the soft arm, left side bottom-to-top then right side
/// bottom-to-top, each in [0.8, 1.2].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RobotDesign {
    stretch_ratios: Vec<f64>,
}

impl RobotDesign {
    pub fn new(stretch_ratios: Vec<f64>) -> Result<Self> {
        if stretch_ratios.len() != ROBOT_DESIGN_DIM {
            return Err(Error::InvalidDesign(format!(
                "expected {} stretch ratios, got {}",
                ROBOT_DESIGN_DIM,
                stretch_ratios.len()
            )));
        }
        for (i, &r) in stretch_ratios.iter().enumerate() {
            if !r.is_finite() || !(STRETCH_MIN..=STRETCH_MAX).contains(&r) {
                return Err(Error::InvalidDesign(format!(
                    "stretch ratio {r} at index {i} outside [{STRETCH_MIN}, {STRETCH_MAX}]"
                )));
            }
        }
        Ok(Self { stretch_ratios })
    }

    pub fn ratios(&self) -> &[f64] {
        &self.stretch_ratios
    }

    /// Left-side ratios, bottom to top.
    pub fn left(&self) -> &[f64] {
        &self.stretch_ratios[..ROBOT_DESIGN_DIM / 2]
    }

    /// Right-side ratios, bottom to top.
    pub fn right(&self) -> &[f64] {
        &self.stretch_ratios[ROBOT_DESIGN_DIM / 2..]
    }
}

/// Vertex positions of the realized arm mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotRealization {
    pub vertices: Vec<[f64; 2]>,
    pub top_mid_index: usize,
}

impl RobotRealization {
    pub fn new(vertices: Vec<[f64; 2]>, top_mid_index: usize) -> Result<Self> {
        if top_mid_index >= vertices.len() {
            return Err(Error::InvalidArgument(format!(
                "top_mid_index {} out of range ({} vertices)",
                top_mid_index,
                vertices.len()
            )));
        }
        for (i, v) in vertices.iter().enumerate() {
            if !v[0].is_finite() || !v[1].is_finite() {
                return Err(Error::NonFinite(format!("vertex {i}")));
            }
        }
        Ok(Self { vertices, top_mid_index })
    }

    pub fn top_mid(&self) -> [f64; 2] {
        self.vertices[self.top_mid_index]
    }
}

/// Goal for the arm task: reach `target` with the top midpoint while keeping
/// every vertex outside the obstacle circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotGoal {
    pub target: [f64; 2],
    pub obstacle_center: [f64; 2],
    pub obstacle_radius: f64,
}

impl RobotGoal {
    pub fn new(target: [f64; 2], obstacle_center: [f64; 2], obstacle_radius: f64) -> Result<Self> {
        if obstacle_radius <= 0.0 {
            return Err(Error::InvalidArgument("obstacle radius must be > 0".into()));
        }
        Ok(Self { target, obstacle_center, obstacle_radius })
    }
}

/// One (design, realization, goal) triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample<D, R, G> {
    pub design: D,
    pub realization: R,
    pub goal: G,
}

/// Disjoint index sets covering all samples exactly once.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// In-memory dataset with provenance seed and split indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset<D, R, G> {
    pub samples: Vec<Sample<D, R, G>>,
    pub seed: u64,
    pub split: Split,
}

/// Dataset over ballistic samples: design and realization are scalars.
pub type BallisticDataset = Dataset<f64, f64, f64>;
/// Dataset over fiber-path samples.
pub type FiberDataset = Dataset<Path2D, Path2D, Path2D>;
/// Dataset over arm samples.
pub type ArmDataset = Dataset<RobotDesign, RobotRealization, RobotGoal>;

#[derive(Debug, Serialize, Deserialize)]
struct NdjsonHeader {
    format_version: u32,
    task: String,
    seed: u64,
    split: Split,
}

impl<D, R, G> Dataset<D, R, G> {
    pub fn new(samples: Vec<Sample<D, R, G>>, seed: u64) -> Self {
        Self { samples, seed, split: Split::default() }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn train_samples(&self) -> impl Iterator<Item = &Sample<D, R, G>> {
        self.split.train.iter().map(|&i| &self.samples[i])
    }

    pub fn val_samples(&self) -> impl Iterator<Item = &Sample<D, R, G>> {
        self.split.val.iter().map(|&i| &self.samples[i])
    }

    pub fn test_samples(&self) -> impl Iterator<Item = &Sample<D, R, G>> {
        self.split.test.iter().map(|&i| &self.samples[i])
    }
}

impl<D: Serialize, R: Serialize, G: Serialize> Dataset<D, R, G> {
    /// Write as newline-delimited JSON: a header object followed by one
    /// object per sample. serde_json round-trips f64 exactly.
    pub fn write_ndjson<W: Write>(&self, task: &str, mut w: W) -> Result<()> {
        let header = NdjsonHeader {
            format_version: 1,
            task: task.to_string(),
            seed: self.seed,
            split: self.split.clone(),
        };
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        for s in &self.samples {
            serde_json::to_writer(&mut w, s)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save_ndjson(&self, task: &str, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_ndjson(task, BufWriter::new(f))
    }
}

impl<D: DeserializeOwned, R: DeserializeOwned, G: DeserializeOwned> Dataset<D, R, G> {
    /// Read a dataset previously written by [`Dataset::write_ndjson`].
    /// Returns the task id from the header alongside the data.
    pub fn read_ndjson<Rd: std::io::Read>(r: Rd) -> Result<(String, Self)> {
        let mut lines = BufReader::new(r).lines();
        let header_line = lines
            .next()
            .ok_or_else(|| Error::InvalidArgument("empty dataset file".into()))??;
        let header: NdjsonHeader = serde_json::from_str(&header_line)?;
        if header.format_version != 1 {
            return Err(Error::InvalidArgument(format!(
                "unsupported format_version {}",
                header.format_version
            )));
        }
        let mut samples = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            samples.push(serde_json::from_str(&line)?);
        }
        Ok((
            header.task,
            Self { samples, seed: header.seed, split: header.split },
        ))
    }

    pub fn load_ndjson(path: &Path) -> Result<(String, Self)> {
        let f = std::fs::File::open(path)?;
        Self::read_ndjson(f)
    }
}

/// Deterministically shuffle indices and split into train/val/test.
///
/// Sizes are floor-rounded; remainder rows go to the training set.
pub fn split_dataset<D, R, G>(
    mut dataset: Dataset<D, R, G>,
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<Dataset<D, R, G>> {
    let (ft, fv, fs) = fractions;
    if ft < 0.0 || fv < 0.0 || fs < 0.0 || ft + fv + fs <= 0.0 {
        return Err(Error::BadSplit(format!("({ft}, {fv}, {fs})")));
    }
    if (ft + fv + fs - 1.0).abs() > 1e-9 {
        return Err(Error::BadSplit(format!("sum = {}", ft + fv + fs)));
    }
    let n = dataset.samples.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);

    let n_val = (fv * n as f64).floor() as usize;
    let n_test = (fs * n as f64).floor() as usize;
    let n_train = n - n_val - n_test;

    dataset.split = Split {
        train: idx[..n_train].to_vec(),
        val: idx[n_train..n_train + n_val].to_vec(),
        test: idx[n_train + n_val..].to_vec(),
    };
    Ok(dataset)
}
