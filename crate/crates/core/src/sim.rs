//! Deterministic realization processes for the three tasks: ballistic toy,
//! lag-follower fiber smoother, and constant-curvature segmented soft arm.

use rand::Rng;

use crate::data::{
    Path2D, RobotDesign, RobotGoal, RobotRealization, OBSTACLE_RADIUS,
};
use crate::geometry::{dist, resample_spacing};
use crate::{Error, Result};

/// Required clearance margin between obstacle center and arm vertices, added
/// to the obstacle radius.
pub const OBSTACLE_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy)]
pub struct BallisticConfig {
    pub v0: f64,
    pub g_acc: f64,
}

impl Default for BallisticConfig {
    fn default() -> Self {
        Self { v0: 10.0, g_acc: 9.8 }
    }
}

impl BallisticConfig {
    pub fn max_range(&self) -> f64 {
        self.v0 * self.v0 / self.g_acc
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FiberConfig {
    /// Lag distance the deposited fiber trails behind the extruder head.
    pub lag: f64,
    /// Uniform resampling spacing applied to the extruder path.
    pub spacing: f64,
}

impl Default for FiberConfig {
    fn default() -> Self {
        Self { lag: 0.15, spacing: 0.03 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ArmConfig {
    /// Segments per side.
    pub n_segments: usize,
    /// Rest height of one segment.
    pub seg_height: f64,
    /// Arm width (distance between left and right edges).
    pub width: f64,
}

impl Default for ArmConfig {
    fn default() -> Self {
        Self { n_segments: 20, seg_height: 0.5, width: 0.5 }
    }
}

impl ArmConfig {
    /// Vertices in the mesh: 3 columns x (n_segments + 1) levels.
    pub fn n_vertices(&self) -> usize {
        3 * (self.n_segments + 1)
    }

    /// Index of the centerline top vertex.
    pub fn top_mid_index(&self) -> usize {
        3 * self.n_segments + 1
    }
}

/// Landing distance of a projectile launched at angle `theta`:
/// v0^2 sin(2 theta) / g.
pub fn ballistic_realize(theta: f64, cfg: &BallisticConfig) -> Result<f64> {
    if !theta.is_finite() || !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidDesign(format!("launch angle {theta} outside [0, pi/2]")));
    }
    Ok(cfg.v0 * cfg.v0 * (2.0 * theta).sin() / cfg.g_acc)
}

/// Deposited fiber path for an extruder path: the extruder is resampled to
/// uniform spacing, then each deposited point trails the head by at most the
/// lag distance.
///
/// u_1 = e_1; for i >= 2: if |u_{i-1} - e_i| > L then u_i sits on the segment
/// from e_i toward u_{i-1} at distance exactly L, else u_i = u_{i-1}.
pub fn fiber_realize(extruder: &Path2D, cfg: &FiberConfig) -> Result<Path2D> {
    let e = resample_spacing(extruder, cfg.spacing)?;
    fiber_follow(&e, cfg)
}

/// Lag recurrence alone, without the resampling step: one deposited point
/// per extruder point. Used directly when the extruder path is already at
/// uniform spacing and the output must stay index-aligned with it.
pub fn fiber_follow(extruder: &Path2D, cfg: &FiberConfig) -> Result<Path2D> {
    if cfg.lag < 0.0 {
        return Err(Error::InvalidArgument("lag must be non-negative".into()));
    }
    let pts = extruder.points();
    let mut u = Vec::with_capacity(pts.len());
    u.push(pts[0]);
    for &ei in &pts[1..] {
        let prev: [f64; 2] = *u.last().unwrap();
        let d = dist(prev, ei);
        if d > cfg.lag {
            let s = cfg.lag / d;
            u.push([ei[0] + (prev[0] - ei[0]) * s, ei[1] + (prev[1] - ei[1]) * s]);
        } else {
            u.push(prev);
        }
    }
    Path2D::new_unchecked_spacing(u)
}

/// Sweep sine-shaped extruder paths through the simulator, returning
/// (extruder amplitude, realized peak |y|) pairs.
pub fn amplitude_response(amplitudes: &[f64], cfg: &FiberConfig) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(amplitudes.len());
    for &a in amplitudes {
        if !(a > 0.0) {
            return Err(Error::InvalidArgument(format!("amplitude {a} must be positive")));
        }
        let n = 600;
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let x = 2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64;
                [x, a * x.sin()]
            })
            .collect();
        let path = Path2D::new(pts)?;
        let realized = fiber_realize(&path, cfg)?;
        let peak = realized.points().iter().fold(0.0f64, |m, p| m.max(p[1].abs()));
        out.push((a, peak));
    }
    Ok(out)
}

/// Pose of the arm for a design, as a constant-curvature chain of
/// `n_segments` rigid arcs.
///
/// Segment k with left ratio a_k and right ratio b_k extends the centerline
/// by h (a_k + b_k)/2 and bends by phi_k = h (a_k - b_k) / w (positive
/// toward +x when upright). Each segment's direction is the accumulated
/// orientation plus half its own bend. Vertices per level: left edge,
/// centerline, right edge; the base row is fixed at y = 0.
pub fn arm_realize(design: &RobotDesign, cfg: &ArmConfig) -> Result<RobotRealization> {
    if design.ratios().len() != 2 * cfg.n_segments {
        return Err(Error::InvalidDesign(format!(
            "design has {} ratios; config wants {}",
            design.ratios().len(),
            2 * cfg.n_segments
        )));
    }
    let (h, w) = (cfg.seg_height, cfg.width);
    let half_w = w / 2.0;
    let mut vertices = Vec::with_capacity(cfg.n_vertices());
    let mut center = [0.0f64, 0.0f64];
    let mut psi = 0.0f64;
    // Leftward normal at orientation psi (psi = 0 points the arm along +y,
    // so the left edge starts at -x).
    let push_level = |vs: &mut Vec<[f64; 2]>, c: [f64; 2], psi: f64| {
        let n = [-psi.cos(), psi.sin()];
        vs.push([c[0] + half_w * n[0], c[1] + half_w * n[1]]);
        vs.push(c);
        vs.push([c[0] - half_w * n[0], c[1] - half_w * n[1]]);
    };
    push_level(&mut vertices, center, psi);
    for k in 0..cfg.n_segments {
        let (a, b) = (design.left()[k], design.right()[k]);
        let ell = h * (a + b) / 2.0;
        let phi = h * (a - b) / w;
        let chi = psi + phi / 2.0;
        center[0] += ell * chi.sin();
        center[1] += ell * chi.cos();
        psi += phi;
        push_level(&mut vertices, center, psi);
    }
    RobotRealization::new(vertices, cfg.top_mid_index())
}

/// Pack a realization and an obstacle into a goal: target is the top
/// midpoint, radius is the standard obstacle radius.
pub fn arm_goal_of(realization: &RobotRealization, obstacle_center: [f64; 2]) -> Result<RobotGoal> {
    RobotGoal::new(realization.top_mid(), obstacle_center, OBSTACLE_RADIUS)
}

/// Sample an obstacle center uniformly (in angle and radius) over the sector
/// 15..75 degrees from vertical toward +x, radii [4, 5] from the arm base.
///
/// With `require_clear`, rejection-samples until every vertex of the given
/// realization is at least radius + margin from the center (at most 10,000
/// draws).
pub fn sample_obstacle(
    rng: &mut impl Rng,
    require_clear: Option<&RobotRealization>,
) -> Result<([f64; 2], f64)> {
    let min_clear = OBSTACLE_RADIUS + OBSTACLE_MARGIN;
    for _ in 0..10_000 {
        let ang = rng.gen_range(15.0f64.to_radians()..75.0f64.to_radians());
        let rad = rng.gen_range(4.0..5.0);
        let center = [rad * ang.sin(), rad * ang.cos()];
        let clear = require_clear
            .map(|r| r.vertices.iter().all(|&v| dist(v, center) >= min_clear))
            .unwrap_or(true);
        if clear {
            return Ok((center, OBSTACLE_RADIUS));
        }
    }
    Err(Error::RejectionExceeded(10_000))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ROBOT_DESIGN_DIM;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ballistic_zero_and_peak() {
        let cfg = BallisticConfig::default();
        assert_eq!(ballistic_realize(0.0, &cfg).unwrap(), 0.0);
        let peak = ballistic_realize(std::f64::consts::FRAC_PI_4, &cfg).unwrap();
        assert!((peak - 100.0 / 9.8).abs() < 1e-12);
        assert!((peak - cfg.max_range()).abs() < 1e-12);
    }

    #[test]
    fn ballistic_two_branch_symmetry() {
        let cfg = BallisticConfig::default();
        for i in 1..10 {
            let theta = std::f64::consts::FRAC_PI_2 * i as f64 / 20.0;
            let a = ballistic_realize(theta, &cfg).unwrap();
            let b = ballistic_realize(std::f64::consts::FRAC_PI_2 - theta, &cfg).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ballistic_rejects_out_of_range() {
        let cfg = BallisticConfig::default();
        assert!(ballistic_realize(-0.1, &cfg).is_err());
        assert!(ballistic_realize(2.0, &cfg).is_err());
    }

    fn line_path(n: usize, step: f64) -> Path2D {
        Path2D::new((0..n).map(|i| [i as f64 * step, 0.0]).collect()).unwrap()
    }

    #[test]
    fn fiber_zero_lag_is_identity() {
        let cfg = FiberConfig { lag: 0.0, spacing: 0.03 };
        let e = line_path(50, 0.1);
        let u = fiber_realize(&e, &cfg).unwrap();
        let resampled = resample_spacing(&e, cfg.spacing).unwrap();
        assert_eq!(u, resampled);
    }

    #[test]
    fn fiber_straight_line_trails_by_lag() {
        let cfg = FiberConfig::default();
        let e = line_path(100, 0.05);
        let u = fiber_realize(&e, &cfg).unwrap();
        let resampled = resample_spacing(&e, cfg.spacing).unwrap();
        assert_eq!(u.len(), resampled.len());
        // After the transient (arc length beyond the lag), points trail the
        // head by exactly L along -x.
        for (ui, ei) in u.points().iter().zip(resampled.points()).skip(20) {
            assert!((ui[0] - (ei[0] - cfg.lag)).abs() < 1e-9, "x: {} vs {}", ui[0], ei[0]);
            assert!(ui[1].abs() < 1e-12);
        }
    }

    #[test]
    fn fiber_preserves_point_count() {
        let cfg = FiberConfig::default();
        let pts: Vec<[f64; 2]> = (0..80)
            .map(|i| {
                let t = i as f64 * 0.05;
                [t, (3.0 * t).sin() * 0.3]
            })
            .collect();
        let e = Path2D::new(pts).unwrap();
        let resampled = resample_spacing(&e, cfg.spacing).unwrap();
        let u = fiber_realize(&e, &cfg).unwrap();
        assert_eq!(u.len(), resampled.len());
    }

    /// Total absolute turning angle, skipping zero-length segments.
    fn turning(path: &Path2D) -> f64 {
        let pts = path.points();
        let mut dirs: Vec<[f64; 2]> = Vec::new();
        for w in pts.windows(2) {
            let d = [w[1][0] - w[0][0], w[1][1] - w[0][1]];
            let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
            if n > 1e-12 {
                dirs.push([d[0] / n, d[1] / n]);
            }
        }
        dirs.windows(2)
            .map(|p| {
                let dot = (p[0][0] * p[1][0] + p[0][1] * p[1][1]).clamp(-1.0, 1.0);
                dot.acos()
            })
            .sum()
    }

    #[test]
    fn fiber_smooths_random_corpus() {
        let cfg = FiberConfig::default();
        let paths = crate::sampling::generate_paths(10, 100, 60, 0.1, 21).unwrap();
        for e in &paths {
            let resampled = resample_spacing(e, cfg.spacing).unwrap();
            let u = fiber_realize(e, &cfg).unwrap();
            assert!(
                turning(&u) <= turning(&resampled) + 1e-9,
                "output turning {} > input {}",
                turning(&u),
                turning(&resampled)
            );
        }
    }

    #[test]
    fn fiber_many_to_one_witness() {
        // Two extruder paths that share a start and stay inside the lag
        // radius: the deposited point never moves, so both realizations
        // collapse to the start point while the inputs are clearly distinct.
        let cfg = FiberConfig::default();
        let along_x = Path2D::new((0..5).map(|i| [i as f64 * 0.03, 0.0]).collect()).unwrap();
        let along_y = Path2D::new((0..5).map(|i| [0.0, i as f64 * 0.03]).collect()).unwrap();
        let eps = 1e-3;
        let d_in = crate::geometry::chamfer(&along_x, &along_y);
        assert!(d_in > 10.0 * eps, "inputs too close: {d_in}");
        let u_a = fiber_realize(&along_x, &cfg).unwrap();
        let u_b = fiber_realize(&along_y, &cfg).unwrap();
        for p in u_a.points().iter().chain(u_b.points()) {
            assert!(dist(*p, [0.0, 0.0]) < 1e-15);
        }
        let d_out = crate::geometry::chamfer(&u_a, &u_b);
        assert!(d_out < eps, "outputs too far: {d_out}");
    }

    #[test]
    fn amplitude_sweep_attenuates_monotonically() {
        let cfg = FiberConfig::default();
        let amps: Vec<f64> = (0..8).map(|i| 3.0 + 0.5 * i as f64).collect();
        let pairs = amplitude_response(&amps, &cfg).unwrap();
        assert_eq!(pairs.len(), 8);
        for (a, r) in &pairs {
            assert!(r < a, "realized {r} not below extruder {a}");
            assert!(*r > 0.0);
        }
        for w in pairs.windows(2) {
            assert!(w[1].1 > w[0].1, "non-monotone: {:?}", pairs);
        }
    }

    #[test]
    fn amplitude_sweep_identity_at_zero_lag() {
        let cfg = FiberConfig { lag: 0.0, spacing: 0.03 };
        let pairs = amplitude_response(&[3.0, 4.0], &cfg).unwrap();
        for (a, r) in pairs {
            // Sampling resolution bounds the peak-measurement error.
            assert!((a - r).abs() < 0.01, "{a} vs {r}");
        }
    }

    fn uniform_design(c: f64) -> RobotDesign {
        RobotDesign::new(vec![c; ROBOT_DESIGN_DIM]).unwrap()
    }

    #[test]
    fn arm_rest_pose() {
        let cfg = ArmConfig::default();
        let r = arm_realize(&uniform_design(1.0), &cfg).unwrap();
        assert_eq!(r.vertices.len(), 63);
        assert_eq!(r.top_mid_index, 61);
        assert!(dist(r.top_mid(), [0.0, 10.0]) < 1e-12);
        for level in 0..=20 {
            let y = 0.5 * level as f64;
            assert!(dist(r.vertices[3 * level], [-0.25, y]) < 1e-12);
            assert!(dist(r.vertices[3 * level + 1], [0.0, y]) < 1e-12);
            assert!(dist(r.vertices[3 * level + 2], [0.25, y]) < 1e-12);
        }
    }

    #[test]
    fn arm_uniform_stretch_height() {
        let cfg = ArmConfig::default();
        for c in [0.8, 0.9, 1.1, 1.2] {
            let r = arm_realize(&uniform_design(c), &cfg).unwrap();
            assert!(dist(r.top_mid(), [0.0, 10.0 * c]) < 1e-12, "c = {c}");
        }
    }

    #[test]
    fn arm_constant_bend_matches_closed_form() {
        // a = 0.95, b = 1.05 everywhere: per-segment bend
        // phi = 0.5 * (-0.1) / 0.5 = -0.1 rad and extension l = 0.5.
        // Independent oracle: sum_{j=1..n} sin((j - 1/2) phi)
        //   = sin^2(n phi / 2) / sin(phi / 2),
        // sum cos((j - 1/2) phi) = sin(n phi) / (2 sin(phi / 2)).
        let cfg = ArmConfig::default();
        let mut ratios = vec![0.95; 20];
        ratios.extend(vec![1.05; 20]);
        let design = RobotDesign::new(ratios).unwrap();
        let r = arm_realize(&design, &cfg).unwrap();
        let (phi, ell, n) = (-0.1f64, 0.5f64, 20.0f64);
        let sx = ell * (n * phi / 2.0).sin().powi(2) / (phi / 2.0).sin();
        let sy = ell * (n * phi).sin() / (2.0 * (phi / 2.0).sin());
        assert!(dist(r.top_mid(), [sx, sy]) < 1e-10, "got {:?}, want ({sx}, {sy})", r.top_mid());
    }

    #[test]
    fn arm_mirror_symmetry() {
        let cfg = ArmConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let ratios: Vec<f64> = (0..ROBOT_DESIGN_DIM).map(|_| rng.gen_range(0.8..1.2)).collect();
        let design = RobotDesign::new(ratios.clone()).unwrap();
        let mut swapped = ratios[20..].to_vec();
        swapped.extend_from_slice(&ratios[..20]);
        let mirrored = RobotDesign::new(swapped).unwrap();
        let r1 = arm_realize(&design, &cfg).unwrap();
        let r2 = arm_realize(&mirrored, &cfg).unwrap();
        for level in 0..=20 {
            for col in 0..3 {
                let v = r1.vertices[3 * level + col];
                // Mirroring swaps the left and right edge columns.
                let m = r2.vertices[3 * level + (2 - col)];
                assert!((v[0] + m[0]).abs() < 1e-12, "level {level} col {col}");
                assert!((v[1] - m[1]).abs() < 1e-12, "level {level} col {col}");
            }
        }
    }

    #[test]
    fn arm_base_row_fixed() {
        let cfg = ArmConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let ratios: Vec<f64> = (0..ROBOT_DESIGN_DIM).map(|_| rng.gen_range(0.8..1.2)).collect();
            let r = arm_realize(&RobotDesign::new(ratios).unwrap(), &cfg).unwrap();
            assert!(dist(r.vertices[0], [-0.25, 0.0]) < 1e-12);
            assert!(dist(r.vertices[1], [0.0, 0.0]) < 1e-12);
            assert!(dist(r.vertices[2], [0.25, 0.0]) < 1e-12);
        }
    }

    #[test]
    fn goal_packs_top_mid() {
        let cfg = ArmConfig::default();
        let r = arm_realize(&uniform_design(1.0), &cfg).unwrap();
        let g = arm_goal_of(&r, [4.5, 4.5]).unwrap();
        assert_eq!(g.target, [0.0, 10.0]);
        assert_eq!(g.obstacle_center, [4.5, 4.5]);
        assert_eq!(g.obstacle_radius, 0.9);
    }

    #[test]
    fn obstacle_sector_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..500 {
            let (c, r) = sample_obstacle(&mut rng, None).unwrap();
            assert_eq!(r, 0.9);
            let rad = (c[0] * c[0] + c[1] * c[1]).sqrt();
            assert!((4.0..=5.0).contains(&rad), "radius {rad}");
            let ang = c[0].atan2(c[1]).to_degrees();
            assert!((15.0..=75.0).contains(&ang), "angle {ang}");
        }
    }

    #[test]
    fn obstacle_clearance_respected() {
        let cfg = ArmConfig::default();
        let rest = arm_realize(&uniform_design(1.0), &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..200 {
            let (c, _) = sample_obstacle(&mut rng, Some(&rest)).unwrap();
            for &v in &rest.vertices {
                assert!(dist(v, c) >= 1.0, "vertex {v:?} too close to {c:?}");
            }
        }
    }
}

