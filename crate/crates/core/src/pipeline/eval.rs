//! Evaluation and timing harnesses. Metrics are always computed against the
//! true simulators, never the learned surrogates; aggregate mean and
//! standard error are taken over repeated runs (retrained models), not over
//! test goals.

use std::time::Instant;

use serde::Serialize;

use crate::data::{Path2D, RobotDesign, RobotGoal};
use crate::geometry::{chamfer, dist};
use crate::sim::{arm_realize, fiber_realize, ArmConfig, FiberConfig};
use crate::{Error, Result};

/// One evaluated goal.
#[derive(Debug, Clone, Serialize)]
pub struct GoalRecord {
    pub run: usize,
    pub goal_index: usize,
    /// Chamfer distance (path task) or top-midpoint distance (robot task).
    pub metric: f64,
    /// Obstacle-avoidance success; absent on the path task.
    pub success: Option<bool>,
    /// Median inference time when benchmarked.
    pub seconds: Option<f64>,
}

/// Per-goal outcomes of one run (one trained model / seed).
#[derive(Debug, Clone, Default)]
pub struct RunEval {
    pub metrics: Vec<f64>,
    /// Parallel to `metrics` on the robot task; empty on the path task.
    pub successes: Vec<bool>,
}

impl RunEval {
    /// Run-level metric mean: over successes only when success flags are
    /// present, over all goals otherwise. NaN when nothing qualifies.
    pub fn mean_metric(&self) -> f64 {
        let (sum, count) = if self.successes.is_empty() {
            (self.metrics.iter().sum::<f64>(), self.metrics.len())
        } else {
            self.metrics
                .iter()
                .zip(&self.successes)
                .filter(|(_, &s)| s)
                .fold((0.0, 0), |(a, c), (m, _)| (a + m, c + 1))
        };
        if count == 0 {
            f64::NAN
        } else {
            sum / count as f64
        }
    }

    pub fn success_count(&self) -> usize {
        self.successes.iter().filter(|&&s| s).count()
    }
}

/// Aggregated report across runs, serializable as JSON; per-goal rows
/// exported as CSV.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub method: String,
    pub records: Vec<GoalRecord>,
    /// Metric mean of each run.
    pub run_means: Vec<f64>,
    /// Mean of the run means.
    pub mean: f64,
    /// Standard error over runs.
    pub stderr: f64,
    /// Successes per run; empty on the path task.
    pub success_counts: Vec<usize>,
}

impl EvalReport {
    pub fn from_runs(method: &str, runs: &[RunEval]) -> Self {
        let mut records = Vec::new();
        for (run, r) in runs.iter().enumerate() {
            for (gi, &m) in r.metrics.iter().enumerate() {
                records.push(GoalRecord {
                    run,
                    goal_index: gi,
                    metric: m,
                    success: r.successes.get(gi).copied(),
                    seconds: None,
                });
            }
        }
        let run_means: Vec<f64> = runs.iter().map(RunEval::mean_metric).collect();
        let n = run_means.len() as f64;
        let mean = if run_means.is_empty() {
            f64::NAN
        } else {
            run_means.iter().sum::<f64>() / n
        };
        let stderr = if run_means.len() < 2 {
            f64::NAN
        } else {
            let var = run_means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        };
        let success_counts = if runs.iter().all(|r| r.successes.is_empty()) {
            Vec::new()
        } else {
            runs.iter().map(RunEval::success_count).collect()
        };
        Self { method: method.to_string(), records, run_means, mean, stderr, success_counts }
    }

    /// One row per goal: run, goal index, metric, success, seconds.
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        use std::io::Write;
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "run,goal_index,metric,success,seconds")?;
        for r in &self.records {
            writeln!(
                f,
                "{},{},{},{},{}",
                r.run,
                r.goal_index,
                r.metric,
                r.success.map(|s| s.to_string()).unwrap_or_default(),
                r.seconds.map(|s| s.to_string()).unwrap_or_default(),
            )?;
        }
        Ok(())
    }

    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(f, self).map_err(Error::from)
    }
}

/// Evaluate a path-task method over goals: realize each produced design with
/// the true fiber simulator and record the Chamfer distance to the goal.
pub fn evaluate_path_method<F>(goals: &[&Path2D], cfg: &FiberConfig, mut method: F) -> Result<RunEval>
where
    F: FnMut(&Path2D) -> Result<Path2D>,
{
    let mut metrics = Vec::with_capacity(goals.len());
    for g in goals {
        let theta = method(g)?;
        let u = fiber_realize(&theta, cfg)?;
        metrics.push(chamfer(g, &u));
    }
    Ok(RunEval { metrics, successes: Vec::new() })
}

/// Evaluate a robot-task method over fixed goals: realize each design with
/// the true arm simulator; success requires every vertex strictly outside
/// the obstacle circle of radius r (not r plus the barrier margin); the
/// metric is the top-midpoint distance to the target.
pub fn evaluate_robot_method<F>(goals: &[RobotGoal], mut method: F) -> Result<RunEval>
where
    F: FnMut(&RobotGoal) -> Result<RobotDesign>,
{
    let cfg = ArmConfig::default();
    let mut metrics = Vec::with_capacity(goals.len());
    let mut successes = Vec::with_capacity(goals.len());
    for g in goals {
        let design = method(g)?;
        let u = arm_realize(&design, &cfg)?;
        let ok = u
            .vertices
            .iter()
            .all(|&v| dist(v, g.obstacle_center) > g.obstacle_radius);
        successes.push(ok);
        metrics.push(dist(u.top_mid(), g.target));
    }
    Ok(RunEval { metrics, successes })
}

/// Median wall time per goal: runs the method `repetitions` times per goal
/// (at least once) and reports the per-goal median in seconds.
pub fn time_inference<F>(n_goals: usize, repetitions: usize, mut method: F) -> Result<Vec<f64>>
where
    F: FnMut(usize) -> Result<()>,
{
    let reps = repetitions.max(1);
    let mut out = Vec::with_capacity(n_goals);
    for gi in 0..n_goals {
        let mut times = Vec::with_capacity(reps);
        for _ in 0..reps {
            let t0 = Instant::now();
            method(gi)?;
            times.push(t0.elapsed().as_secs_f64());
        }
        times.sort_by(|a, b| a.total_cmp(b));
        let median = if reps % 2 == 1 {
            times[reps / 2]
        } else {
            0.5 * (times[reps / 2 - 1] + times[reps / 2])
        };
        out.push(median);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::RobotGoal;

    #[test]
    fn identity_on_lag_free_simulator_is_perfect() {
        // With lag zero the simulator is the identity, so the identity method
        // scores a Chamfer distance of zero.
        let pts: Vec<[f64; 2]> = (0..80).map(|i| [i as f64 * 0.03, 0.0]).collect();
        let line = Path2D::new(pts).unwrap();
        let goals = [&line];
        let cfg = FiberConfig { lag: 0.0, ..FiberConfig::default() };
        let run = evaluate_path_method(&goals, &cfg, |g| Ok(g.clone())).unwrap();
        assert!(run.metrics[0] < 1e-9, "chamfer {}", run.metrics[0]);
    }

    #[test]
    fn success_boundary_is_strict() {
        // Rest pose with an obstacle centered exactly OBSTACLE_RADIUS away
        // from a vertex: the boundary vertex makes it a failure.
        let rest = RobotDesign::new(vec![1.0; crate::data::ROBOT_DESIGN_DIM]).unwrap();
        let u = arm_realize(&rest, &ArmConfig::default()).unwrap();
        let v = u.vertices[30];
        let center = [v[0] + crate::data::OBSTACLE_RADIUS, v[1]];
        let goal = RobotGoal::new(u.top_mid(), center, crate::data::OBSTACLE_RADIUS).unwrap();
        let run = evaluate_robot_method(std::slice::from_ref(&goal), |_| Ok(rest.clone())).unwrap();
        assert_eq!(run.successes, vec![false]);

        // Nudge the obstacle away and the same pose succeeds.
        let center2 = [v[0] + 10.0, v[1]];
        let goal2 = RobotGoal::new(u.top_mid(), center2, crate::data::OBSTACLE_RADIUS).unwrap();
        let run2 = evaluate_robot_method(std::slice::from_ref(&goal2), |_| Ok(rest.clone())).unwrap();
        assert_eq!(run2.successes, vec![true]);
        assert!(run2.metrics[0] < 1e-12);
    }

    #[test]
    fn report_aggregates_over_runs() {
        let runs = vec![
            RunEval { metrics: vec![1.0, 3.0], successes: vec![] },
            RunEval { metrics: vec![2.0, 4.0], successes: vec![] },
            RunEval { metrics: vec![3.0, 5.0], successes: vec![] },
        ];
        let rep = EvalReport::from_runs("demo", &runs);
        assert_eq!(rep.run_means, vec![2.0, 3.0, 4.0]);
        assert!((rep.mean - 3.0).abs() < 1e-15);
        // Sample stddev of {2,3,4} is 1; stderr = 1/sqrt(3).
        assert!((rep.stderr - 1.0 / 3.0f64.sqrt()).abs() < 1e-12);
        assert_eq!(rep.records.len(), 6);
        assert!(rep.success_counts.is_empty());
    }

    #[test]
    fn robot_metric_counts_successes_only() {
        let run = RunEval { metrics: vec![1.0, 100.0], successes: vec![true, false] };
        assert_eq!(run.mean_metric(), 1.0);
        assert_eq!(run.success_count(), 1);
    }

    #[test]
    fn csv_and_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let runs = vec![RunEval { metrics: vec![0.5], successes: vec![true] }];
        let rep = EvalReport::from_runs("demo", &runs);
        let csv = dir.path().join("r.csv");
        let json = dir.path().join("r.json");
        rep.write_csv(&csv).unwrap();
        rep.write_json(&json).unwrap();
        let text = std::fs::read_to_string(&csv).unwrap();
        assert!(text.starts_with("run,goal_index,metric,success,seconds\n"));
        assert_eq!(text.lines().count(), 2);
        let v: serde_json::Value = serde_json::from_reader(std::fs::File::open(&json).unwrap()).unwrap();
        assert_eq!(v["method"], "demo");
        assert_eq!(v["success_counts"][0], 1);
    }

    #[test]
    fn timing_reports_median_per_goal() {
        let times = time_inference(3, 5, |_| Ok(())).unwrap();
        assert_eq!(times.len(), 3);
        assert!(times.iter().all(|&t| t >= 0.0 && t < 1.0));
    }
}
