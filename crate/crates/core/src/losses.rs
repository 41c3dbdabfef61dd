//! Task cost functions: path tracking cost with smoothing regularizer, the
//! direct-optimization distance/regularizer pair, and the robot cost with
//! obstacle barrier. Every loss returns analytic gradients for its
//! differentiable arguments.

use crate::data::{Path2D, RobotDesign, RobotGoal, RobotRealization};
use crate::geometry::{dist, smooth_reg, smooth_reg_grad};
use crate::{Error, Result};

/// Regularizer weight grid for the path task.
pub const PATH_LAMBDA_GRID: [f64; 5] = [0.1, 0.3, 0.6, 1.0, 1.5];
/// Regularizer weight grid for direct optimization on the path task.
pub const PATH_LAMBDA_DO_GRID: [f64; 4] = [1e-4, 3e-4, 6e-4, 1e-3];
/// Regularizer weight grid for the robot task.
pub const ROBOT_LAMBDA2_GRID: [f64; 4] = [0.03, 0.05, 0.07, 0.09];

#[derive(Debug, Clone, Copy)]
pub struct RobotCostConfig {
    /// Barrier weight.
    pub lambda1: f64,
    /// Regularizer weight.
    pub lambda2: f64,
    /// Barrier margin added to the obstacle radius.
    pub delta_r: f64,
    /// Obstacle radius.
    pub r: f64,
}

impl Default for RobotCostConfig {
    fn default() -> Self {
        Self { lambda1: 0.5, lambda2: ROBOT_LAMBDA2_GRID[0], delta_r: 0.1, r: 0.9 }
    }
}

/// Training-time path cost: index-aligned squared distance plus weighted
/// smoothing regularizer on the design path.
///
/// Returns (value, gradient wrt theta points, gradient wrt u points).
#[allow(clippy::type_complexity)]
pub fn path_cost(
    theta: &Path2D,
    u: &Path2D,
    g: &Path2D,
    lambda: f64,
) -> Result<(f64, Vec<[f64; 2]>, Vec<[f64; 2]>)> {
    if u.len() != g.len() {
        return Err(Error::ShapeMismatch(format!(
            "u has {} points, g has {}",
            u.len(),
            g.len()
        )));
    }
    let mut value = 0.0;
    let mut grad_u = Vec::with_capacity(u.len());
    for (up, gp) in u.points().iter().zip(g.points()) {
        let dx = gp[0] - up[0];
        let dy = gp[1] - up[1];
        value += dx * dx + dy * dy;
        grad_u.push([-2.0 * dx, -2.0 * dy]);
    }
    let reg = smooth_reg(theta.points())?;
    let mut grad_theta = smooth_reg_grad(theta.points())?;
    for gt in &mut grad_theta {
        gt[0] *= lambda;
        gt[1] *= lambda;
    }
    Ok((value + lambda * reg, grad_theta, grad_u))
}

/// Arc-length data for a polyline: per-segment lengths, unit directions, and
/// cumulative lengths.
struct Arc {
    lens: Vec<f64>,
    dirs: Vec<[f64; 2]>,
    cum: Vec<f64>,
    total: f64,
}

impl Arc {
    fn new(pts: &[[f64; 2]]) -> Result<Self> {
        if pts.len() < 2 {
            return Err(Error::InvalidPath("need at least 2 points".into()));
        }
        let mut lens = Vec::with_capacity(pts.len() - 1);
        let mut dirs = Vec::with_capacity(pts.len() - 1);
        let mut cum = Vec::with_capacity(pts.len());
        cum.push(0.0);
        for w in pts.windows(2) {
            let l = dist(w[0], w[1]);
            if l <= 1e-12 {
                return Err(Error::InvalidPath("coincident consecutive points".into()));
            }
            lens.push(l);
            dirs.push([(w[1][0] - w[0][0]) / l, (w[1][1] - w[0][1]) / l]);
            cum.push(cum.last().unwrap() + l);
        }
        let total = *cum.last().unwrap();
        Ok(Self { lens, dirs, cum, total })
    }

    /// Segment index and interpolation parameter at arc length s (clamped).
    fn locate(&self, s: f64) -> (usize, f64) {
        let s = s.clamp(0.0, self.total);
        let mut j = match self.cum.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        j = j.min(self.lens.len() - 1);
        ((j), ((s - self.cum[j]) / self.lens[j]).clamp(0.0, 1.0))
    }

    fn point_at(&self, pts: &[[f64; 2]], j: usize, t: f64) -> [f64; 2] {
        [
            pts[j][0] + t * (pts[j + 1][0] - pts[j][0]),
            pts[j][1] + t * (pts[j + 1][1] - pts[j][1]),
        ]
    }
}

/// Direct-optimization tracking distance: midpoint-rule quadrature of
/// `int_0^1 || f_g(x S_g) - f_u(x S_u) ||^2 dx` over `n_quad` subintervals,
/// where f is arc-length parameterization and S the total length.
///
/// The gradient with respect to u's points includes the dependence of the
/// arc-length parameterization (segment lengths, cumulative lengths, and
/// S_u) on the points — not just the interpolation weights.
pub fn do_distance(g: &Path2D, u: &Path2D, n_quad: usize) -> Result<(f64, Vec<[f64; 2]>)> {
    if n_quad == 0 {
        return Err(Error::InvalidArgument("n_quad must be positive".into()));
    }
    let gp = g.points();
    let up = u.points();
    let arc_g = Arc::new(gp)?;
    let arc_u = Arc::new(up)?;
    let n_seg = up.len() - 1;

    let mut value = 0.0;
    let mut grad = vec![[0.0f64; 2]; up.len()];
    // Accumulated coefficient on each segment's unit direction; scattered to
    // the endpoints at the end.
    let mut seg_coeff = vec![0.0f64; n_seg];

    for q in 0..n_quad {
        let x = (q as f64 + 0.5) / n_quad as f64;
        let (jg, tg) = arc_g.locate(x * arc_g.total);
        let pg = arc_g.point_at(gp, jg, tg);
        let (j, t) = arc_u.locate(x * arc_u.total);
        let pu = arc_u.point_at(up, j, t);
        let d = [pu[0] - pg[0], pu[1] - pg[1]];
        value += d[0] * d[0] + d[1] * d[1];

        // w = d(value)/d(pu) for this quadrature point.
        let w = [2.0 * d[0] / n_quad as f64, 2.0 * d[1] / n_quad as f64];
        // Interpolation weights.
        grad[j][0] += w[0] * (1.0 - t);
        grad[j][1] += w[1] * (1.0 - t);
        grad[j + 1][0] += w[0] * t;
        grad[j + 1][1] += w[1] * t;
        // Chain through t = (x S_u - cum[j]) / len_j: every segment length
        // enters through S_u; segments before j also through cum[j]; segment
        // j through its own length.
        let beta = (w[0] * (up[j + 1][0] - up[j][0]) + w[1] * (up[j + 1][1] - up[j][1]))
            / arc_u.lens[j];
        for i in 0..n_seg {
            let mut c = x;
            if i < j {
                c -= 1.0;
            } else if i == j {
                c -= t;
            }
            seg_coeff[i] += beta * c;
        }
    }

    for i in 0..n_seg {
        let e = arc_u.dirs[i];
        grad[i][0] -= seg_coeff[i] * e[0];
        grad[i][1] -= seg_coeff[i] * e[1];
        grad[i + 1][0] += seg_coeff[i] * e[0];
        grad[i + 1][1] += seg_coeff[i] * e[1];
    }
    Ok((value / n_quad as f64, grad))
}

/// Direct-optimization even-spacing regularizer:
/// `(1/S) sum_i || (p_{i+1} - p_i)/2 - (p_i - p_{i-1})/2 ||^2`
/// over interior points, with S the total path length.
pub fn do_reg(theta: &Path2D) -> Result<(f64, Vec<[f64; 2]>)> {
    let pts = theta.points();
    if pts.len() < 3 {
        return Err(Error::InvalidPath("need at least 3 points".into()));
    }
    let arc = Arc::new(pts)?;
    let s = arc.total;
    let mut num = 0.0;
    let mut grad_num = vec![[0.0f64; 2]; pts.len()];
    for i in 1..pts.len() - 1 {
        let d = [
            (pts[i + 1][0] - 2.0 * pts[i][0] + pts[i - 1][0]) / 2.0,
            (pts[i + 1][1] - 2.0 * pts[i][1] + pts[i - 1][1]) / 2.0,
        ];
        num += d[0] * d[0] + d[1] * d[1];
        // d(num)/d(p) = 2 d * d(d)/d(p); the halves cancel to coefficient 1.
        for k in 0..2 {
            grad_num[i + 1][k] += d[k];
            grad_num[i][k] -= 2.0 * d[k];
            grad_num[i - 1][k] += d[k];
        }
    }
    let value = num / s;
    let mut grad = grad_num;
    for g in &mut grad {
        g[0] /= s;
        g[1] /= s;
    }
    // Quotient rule: S depends on the points too.
    let ds_coeff = -value / s;
    for i in 0..pts.len() - 1 {
        let e = arc.dirs[i];
        grad[i][0] -= ds_coeff * e[0];
        grad[i][1] -= ds_coeff * e[1];
        grad[i + 1][0] += ds_coeff * e[0];
        grad[i + 1][1] += ds_coeff * e[1];
    }
    Ok((value, grad))
}

/// Obstacle barrier: `(1/m) sum_i max(r + dr - ||u_i - c||, 0)^2` over the m
/// mesh vertices. Gradient is zero for vertices outside radius r + dr and at
/// the kink; a vertex exactly at the center contributes value but no
/// gradient (no defined direction).
pub fn barrier(
    vertices: &[[f64; 2]],
    obstacle_center: [f64; 2],
    r: f64,
    delta_r: f64,
) -> Result<(f64, Vec<[f64; 2]>)> {
    if vertices.is_empty() {
        return Err(Error::InvalidArgument("barrier needs at least one vertex".into()));
    }
    let m = vertices.len() as f64;
    let reach = r + delta_r;
    let mut value = 0.0;
    let mut grad = vec![[0.0f64; 2]; vertices.len()];
    for (i, v) in vertices.iter().enumerate() {
        let d = dist(*v, obstacle_center);
        let pen = reach - d;
        if pen > 0.0 {
            value += pen * pen / m;
            if d > 1e-12 {
                let scale = -2.0 * pen / (m * d);
                grad[i][0] = scale * (v[0] - obstacle_center[0]);
                grad[i][1] = scale * (v[1] - obstacle_center[1]);
            }
        }
    }
    Ok((value, grad))
}

/// Per-side second-difference regularizer on the stretch ratios: mean of
/// squared discrete second differences within each side, skipping the two
/// boundary indices of each side, normalized by 1/(n - 4).
pub fn stretch_reg(theta: &RobotDesign) -> (f64, Vec<f64>) {
    let n = theta.ratios().len();
    let half = n / 2;
    let norm = (n - 4) as f64;
    let mut value = 0.0;
    let mut grad = vec![0.0f64; n];
    for side in 0..2 {
        let off = side * half;
        let r = &theta.ratios()[off..off + half];
        for i in 1..half - 1 {
            let d = (r[i + 1] - 2.0 * r[i] + r[i - 1]) / 2.0;
            value += d * d / norm;
            grad[off + i + 1] += d / norm;
            grad[off + i] -= 2.0 * d / norm;
            grad[off + i - 1] += d / norm;
        }
    }
    (value, grad)
}

/// Full robot cost: half squared distance from the top midpoint to the
/// target, plus weighted barrier and stretch regularizer.
///
/// Returns (value, gradient wrt the 40 stretch ratios, gradient wrt mesh
/// vertices).
#[allow(clippy::type_complexity)]
pub fn robot_cost(
    theta: &RobotDesign,
    u: &RobotRealization,
    goal: &RobotGoal,
    cfg: &RobotCostConfig,
) -> Result<(f64, Vec<f64>, Vec<[f64; 2]>)> {
    let tm = u.top_mid();
    let d = [goal.target[0] - tm[0], goal.target[1] - tm[1]];
    let dist_term = 0.5 * (d[0] * d[0] + d[1] * d[1]);

    let (bar, bar_grad) = barrier(&u.vertices, goal.obstacle_center, cfg.r, cfg.delta_r)?;
    let (reg, reg_grad) = stretch_reg(theta);

    let value = dist_term + cfg.lambda1 * bar + cfg.lambda2 * reg;

    let mut grad_vertices: Vec<[f64; 2]> = bar_grad
        .into_iter()
        .map(|g| [cfg.lambda1 * g[0], cfg.lambda1 * g[1]])
        .collect();
    grad_vertices[u.top_mid_index][0] -= d[0];
    grad_vertices[u.top_mid_index][1] -= d[1];

    let grad_theta: Vec<f64> = reg_grad.into_iter().map(|g| cfg.lambda2 * g).collect();
    Ok((value, grad_theta, grad_vertices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ROBOT_DESIGN_DIM;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn path(pts: &[[f64; 2]]) -> Path2D {
        Path2D::new(pts.to_vec()).unwrap()
    }

    fn rand_path(rng: &mut ChaCha8Rng, n: usize) -> Path2D {
        loop {
            let mut x = 0.0;
            let pts: Vec<[f64; 2]> = (0..n)
                .map(|_| {
                    x += rng.gen_range(0.05..0.3);
                    [x, rng.gen_range(-0.5..0.5)]
                })
                .collect();
            if let Ok(p) = Path2D::new(pts) {
                return p;
            }
        }
    }

    #[test]
    fn path_cost_zero_on_match() {
        let g = path(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        let theta = g.clone();
        let (v, gt, gu) = path_cost(&theta, &g, &g, 1.0).unwrap();
        assert!(v.abs() < 1e-15);
        assert!(gt.iter().all(|p| p[0].abs() < 1e-12 && p[1].abs() < 1e-12));
        assert!(gu.iter().all(|p| p[0].abs() < 1e-12 && p[1].abs() < 1e-12));
    }

    #[test]
    fn path_cost_squared_distance() {
        let g = path(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        let u = path(&[[1.0, 1.0], [1.0, 0.0], [2.0, 0.0]]);
        let theta = g.clone();
        let (v, _, gu) = path_cost(&theta, &u, &g, 0.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        assert!((gu[0][0] - 2.0).abs() < 1e-12);
        assert!((gu[0][1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn path_cost_rejects_mismatch() {
        let g = path(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        let u = path(&[[0.0, 0.0], [1.0, 0.0]]);
        assert!(path_cost(&g, &u, &g, 0.1).is_err());
    }

    #[test]
    fn path_cost_grad_matches_finite_diff() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let n = 8;
            let theta = rand_path(&mut rng, n);
            let u = rand_path(&mut rng, n);
            let g = rand_path(&mut rng, n);
            let lambda = 0.6;
            let (_, gt, gu) = path_cost(&theta, &u, &g, lambda).unwrap();
            let h = 1e-6;
            for i in 0..n {
                for k in 0..2 {
                    let mut tp = theta.points().to_vec();
                    tp[i][k] += h;
                    let vp = path_cost(&Path2D::new(tp.clone()).unwrap(), &u, &g, lambda)
                        .unwrap()
                        .0;
                    tp[i][k] -= 2.0 * h;
                    let vm = path_cost(&Path2D::new(tp).unwrap(), &u, &g, lambda).unwrap().0;
                    let fd = (vp - vm) / (2.0 * h);
                    assert!((gt[i][k] - fd).abs() < 1e-5 * (1.0 + fd.abs()), "theta[{i}][{k}]");

                    let mut upts = u.points().to_vec();
                    upts[i][k] += h;
                    let vp = path_cost(&theta, &Path2D::new(upts.clone()).unwrap(), &g, lambda)
                        .unwrap()
                        .0;
                    upts[i][k] -= 2.0 * h;
                    let vm =
                        path_cost(&theta, &Path2D::new(upts).unwrap(), &g, lambda).unwrap().0;
                    let fd = (vp - vm) / (2.0 * h);
                    assert!((gu[i][k] - fd).abs() < 1e-5 * (1.0 + fd.abs()), "u[{i}][{k}]");
                }
            }
        }
    }

    #[test]
    fn do_distance_zero_on_same_curve() {
        let g = path(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        // Same traced segment, different parameterization.
        let u = path(&[[0.0, 0.0], [0.5, 0.0], [0.7, 0.0], [2.0, 0.0]]);
        let (v, _) = do_distance(&g, &u, 256).unwrap();
        assert!(v < 1e-9, "v = {v}");
    }

    #[test]
    fn do_distance_closed_form_third() {
        let g = path(&[[0.0, 0.0], [2.0, 0.0]]);
        let u = path(&[[0.0, 0.0], [1.0, 0.0]]);
        let (v, _) = do_distance(&g, &u, 256).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-4, "v = {v}");
    }

    #[test]
    fn do_distance_translation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = rand_path(&mut rng, 7);
        let u = rand_path(&mut rng, 9);
        let (v0, _) = do_distance(&g, &u, 128).unwrap();
        let shift = [3.7, -1.2];
        let gs = Path2D::new(g.points().iter().map(|p| [p[0] + shift[0], p[1] + shift[1]]).collect())
            .unwrap();
        let us = Path2D::new(u.points().iter().map(|p| [p[0] + shift[0], p[1] + shift[1]]).collect())
            .unwrap();
        let (v1, _) = do_distance(&gs, &us, 128).unwrap();
        assert!((v0 - v1).abs() < 1e-12);
    }

    #[test]
    fn do_distance_grad_matches_finite_diff() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..4 {
            let g = rand_path(&mut rng, 6);
            let u = rand_path(&mut rng, 8);
            let (_, grad) = do_distance(&g, &u, 64).unwrap();
            let h = 1e-6;
            for i in 0..u.len() {
                for k in 0..2 {
                    let mut up = u.points().to_vec();
                    up[i][k] += h;
                    let vp = do_distance(&g, &Path2D::new(up.clone()).unwrap(), 64).unwrap().0;
                    up[i][k] -= 2.0 * h;
                    let vm = do_distance(&g, &Path2D::new(up).unwrap(), 64).unwrap().0;
                    let fd = (vp - vm) / (2.0 * h);
                    assert!(
                        (grad[i][k] - fd).abs() < 2e-5 * (1.0 + fd.abs()),
                        "u[{i}][{k}]: analytic {} vs fd {fd}",
                        grad[i][k]
                    );
                }
            }
        }
    }

    #[test]
    fn do_reg_zero_on_even_spacing() {
        let p = path(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]);
        let (v, grad) = do_reg(&p).unwrap();
        assert!(v.abs() < 1e-15);
        assert!(grad.iter().all(|g| g[0].abs() < 1e-12 && g[1].abs() < 1e-12));
    }

    #[test]
    fn do_reg_hand_example() {
        // Points (0,0), (1,0), (3,0): S = 3, single term
        // || (1,0) - (0.5,0) ||^2 = 0.25, value 0.25 / 3.
        let p = path(&[[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]]);
        let (v, _) = do_reg(&p).unwrap();
        assert!((v - 0.25 / 3.0).abs() < 1e-12, "v = {v}");
    }

    #[test]
    fn do_reg_grad_matches_finite_diff() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..5 {
            let p = rand_path(&mut rng, 7);
            let (_, grad) = do_reg(&p).unwrap();
            let h = 1e-6;
            for i in 0..p.len() {
                for k in 0..2 {
                    let mut pts = p.points().to_vec();
                    pts[i][k] += h;
                    let vp = do_reg(&Path2D::new(pts.clone()).unwrap()).unwrap().0;
                    pts[i][k] -= 2.0 * h;
                    let vm = do_reg(&Path2D::new(pts).unwrap()).unwrap().0;
                    let fd = (vp - vm) / (2.0 * h);
                    assert!(
                        (grad[i][k] - fd).abs() < 1e-5 * (1.0 + fd.abs()),
                        "p[{i}][{k}]: analytic {} vs fd {fd}",
                        grad[i][k]
                    );
                }
            }
        }
    }

    #[test]
    fn barrier_zero_outside() {
        let verts = vec![[2.0, 0.0], [0.0, 3.0]];
        let (v, grad) = barrier(&verts, [0.0, 0.0], 0.9, 0.1).unwrap();
        assert_eq!(v, 0.0);
        assert!(grad.iter().all(|g| g[0] == 0.0 && g[1] == 0.0));
    }

    #[test]
    fn barrier_hand_example() {
        // Single vertex at distance r + dr - 0.05: value 0.05^2 = 0.0025.
        let verts = vec![[0.95, 0.0]];
        let (v, grad) = barrier(&verts, [0.0, 0.0], 0.9, 0.1).unwrap();
        assert!((v - 0.0025).abs() < 1e-12);
        assert!(grad[0][0] < 0.0, "gradient pushes the vertex outward");
    }

    #[test]
    fn barrier_boundary_and_center() {
        let (v, _) = barrier(&[[1.0, 0.0]], [0.0, 0.0], 0.9, 0.1).unwrap();
        assert_eq!(v, 0.0);
        let (v, grad) = barrier(&[[0.0, 0.0]], [0.0, 0.0], 0.9, 0.1).unwrap();
        assert!((v - 1.0).abs() < 1e-12); // (r + dr)^2 / 1
        assert_eq!(grad[0], [0.0, 0.0]);
    }

    #[test]
    fn barrier_translation_equivariant() {
        let verts = vec![[0.5, 0.2], [0.1, -0.3], [2.0, 2.0]];
        let (v0, g0) = barrier(&verts, [0.1, 0.1], 0.9, 0.1).unwrap();
        let shifted: Vec<[f64; 2]> = verts.iter().map(|p| [p[0] + 5.0, p[1] - 2.0]).collect();
        let (v1, g1) = barrier(&shifted, [5.1, -1.9], 0.9, 0.1).unwrap();
        assert!((v0 - v1).abs() < 1e-12);
        for (a, b) in g0.iter().zip(&g1) {
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn barrier_grad_matches_finite_diff() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let center = [0.0, 0.0];
        let mut checked = 0;
        while checked < 30 {
            let v = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
            let d = dist(v, center);
            // Stay away from the kink and the center.
            if (d - 1.0).abs() < 1e-3 || d < 1e-3 {
                continue;
            }
            let verts = vec![v];
            let (_, grad) = barrier(&verts, center, 0.9, 0.1).unwrap();
            let h = 1e-7;
            for k in 0..2 {
                let mut vp = v;
                vp[k] += h;
                let fp = barrier(&[vp], center, 0.9, 0.1).unwrap().0;
                vp[k] -= 2.0 * h;
                let fm = barrier(&[vp], center, 0.9, 0.1).unwrap().0;
                let fd = (fp - fm) / (2.0 * h);
                assert!((grad[0][k] - fd).abs() < 1e-5 * (1.0 + fd.abs()));
            }
            checked += 1;
        }
    }

    fn design(ratios: Vec<f64>) -> RobotDesign {
        RobotDesign::new(ratios).unwrap()
    }

    #[test]
    fn stretch_reg_zero_on_ramps() {
        // Affine within each side: second differences vanish.
        let mut ratios: Vec<f64> = (0..20).map(|i| 0.8 + 0.02 * i as f64).collect();
        ratios.extend((0..20).map(|i| 1.2 - 0.02 * i as f64));
        let (v, grad) = stretch_reg(&design(ratios));
        assert!(v.abs() < 1e-15);
        assert!(grad.iter().all(|g| g.abs() < 1e-12));
    }

    #[test]
    fn stretch_reg_hand_example() {
        // Single kink at index 4 (0-based) on the left side: contributions
        // 0.05^2 + 0.1^2 + 0.05^2 = 0.015, normalized by 36.
        let mut ratios = vec![1.0; ROBOT_DESIGN_DIM];
        ratios[4] = 1.1;
        let (v, _) = stretch_reg(&design(ratios));
        assert!((v - 0.015 / 36.0).abs() < 1e-12, "v = {v}");
    }

    #[test]
    fn stretch_reg_ignores_seam() {
        // A jump across the side boundary costs nothing.
        let mut ratios = vec![1.0; ROBOT_DESIGN_DIM];
        for r in ratios.iter_mut().skip(20) {
            *r = 1.2;
        }
        let (v, _) = stretch_reg(&design(ratios));
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn stretch_reg_grad_matches_finite_diff() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ratios: Vec<f64> = (0..ROBOT_DESIGN_DIM).map(|_| rng.gen_range(0.85..1.15)).collect();
        let (_, grad) = stretch_reg(&design(ratios.clone()));
        let h = 1e-6;
        for i in 0..ROBOT_DESIGN_DIM {
            let mut r = ratios.clone();
            r[i] += h;
            let vp = stretch_reg(&design(r.clone())).0;
            r[i] -= 2.0 * h;
            let vm = stretch_reg(&design(r)).0;
            let fd = (vp - vm) / (2.0 * h);
            assert!((grad[i] - fd).abs() < 1e-6 * (1.0 + fd.abs()), "index {i}");
        }
    }

    #[test]
    fn robot_cost_zero_at_goal() {
        let cfg = crate::sim::ArmConfig::default();
        let theta = design(vec![1.0; ROBOT_DESIGN_DIM]);
        let u = crate::sim::arm_realize(&theta, &cfg).unwrap();
        let goal = RobotGoal::new([0.0, 10.0], [4.5, 4.5], 0.9).unwrap();
        let (v, gt, gv) = robot_cost(&theta, &u, &goal, &RobotCostConfig::default()).unwrap();
        assert!(v.abs() < 1e-15);
        assert!(gt.iter().all(|g| g.abs() < 1e-12));
        assert!(gv.iter().all(|g| g[0].abs() < 1e-12 && g[1].abs() < 1e-12));
    }

    #[test]
    fn robot_cost_distance_term() {
        let cfg = crate::sim::ArmConfig::default();
        let theta = design(vec![1.0; ROBOT_DESIGN_DIM]);
        let u = crate::sim::arm_realize(&theta, &cfg).unwrap();
        // Target offset by (0.3, 0.4): half squared distance = 0.125.
        let goal = RobotGoal::new([0.3, 10.4], [4.5, 4.5], 0.9).unwrap();
        let (v, _, gv) = robot_cost(&theta, &u, &goal, &RobotCostConfig::default()).unwrap();
        assert!((v - 0.125).abs() < 1e-12);
        assert!((gv[u.top_mid_index][0] - (-0.3)).abs() < 1e-12);
        assert!((gv[u.top_mid_index][1] - (-0.4)).abs() < 1e-12);
    }
}
