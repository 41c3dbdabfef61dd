//! Random smooth non-self-intersecting path generation: periodic-kernel
//! Gaussian process prior plus elliptical slice sampling with a 0 / -inf
//! feasibility likelihood.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::Path2D;
use crate::util::parallel_map;
use crate::{Error, Result};

/// Periodic kernel exp(-sin^2((x - x')/2) / (2 l^2)); value in (0, 1],
/// symmetric, 2*pi-periodic in x - x'.
pub fn periodic_kernel(x: f64, x_prime: f64, l: f64) -> f64 {
    let s = ((x - x_prime) / 2.0).sin();
    (-(s * s) / (2.0 * l * l)).exp()
}

/// Zero-mean GP prior on the circle grid t_i = 2*pi*i/n, factored once.
#[derive(Debug, Clone)]
pub struct GpPrior {
    pub n_points: usize,
    pub length_scale: f64,
    grid: Vec<f64>,
    /// Lower Cholesky factor of the (jittered) Gram matrix.
    chol: DMatrix<f64>,
    pub jitter: f64,
}

impl GpPrior {
    /// Build the Gram matrix and its Cholesky factor. Jitter starts at 1e-10
    /// and multiplies by 10 until the factorization succeeds, capped at 1e-6.
    pub fn new(n_points: usize, length_scale: f64) -> Result<Self> {
        if n_points < 2 || !(length_scale > 0.0) {
            return Err(Error::InvalidArgument("need n_points >= 2 and l > 0".into()));
        }
        let grid: Vec<f64> =
            (0..n_points).map(|i| 2.0 * std::f64::consts::PI * i as f64 / n_points as f64).collect();
        let gram = DMatrix::from_fn(n_points, n_points, |i, j| {
            periodic_kernel(grid[i], grid[j], length_scale)
        });
        let mut jitter = 1e-10;
        loop {
            let mut k = gram.clone();
            for i in 0..n_points {
                k[(i, i)] += jitter;
            }
            if let Some(chol) = nalgebra::Cholesky::new(k) {
                return Ok(Self { n_points, length_scale, grid, chol: chol.unpack(), jitter });
            }
            jitter *= 10.0;
            if jitter > 1e-6 {
                return Err(Error::CholeskyFailed);
            }
        }
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// L z for z ~ N(0, I); deterministic under the rng state.
    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        let z: Vec<f64> = (0..self.n_points).map(|_| standard_normal(rng)).collect();
        self.mul_chol(&z)
    }

    fn mul_chol(&self, z: &[f64]) -> Vec<f64> {
        let n = self.n_points;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += self.chol[(i, j)] * z[j];
            }
            out[i] = acc;
        }
        out
    }
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller; avoids an extra distribution dependency.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

const COLLINEAR_EPS: f64 = 1e-12;

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> bool {
    c[0] >= a[0].min(b[0]) - COLLINEAR_EPS
        && c[0] <= a[0].max(b[0]) + COLLINEAR_EPS
        && c[1] >= a[1].min(b[1]) - COLLINEAR_EPS
        && c[1] <= a[1].max(b[1]) + COLLINEAR_EPS
}

/// True when segments ab and cd properly intersect or touch.
fn segments_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);

    if ((d1 > COLLINEAR_EPS && d2 < -COLLINEAR_EPS) || (d1 < -COLLINEAR_EPS && d2 > COLLINEAR_EPS))
        && ((d3 > COLLINEAR_EPS && d4 < -COLLINEAR_EPS)
            || (d3 < -COLLINEAR_EPS && d4 > COLLINEAR_EPS))
    {
        return true;
    }
    (d1.abs() <= COLLINEAR_EPS && on_segment(c, d, a))
        || (d2.abs() <= COLLINEAR_EPS && on_segment(c, d, b))
        || (d3.abs() <= COLLINEAR_EPS && on_segment(a, b, c))
        || (d4.abs() <= COLLINEAR_EPS && on_segment(a, b, d))
}

/// True iff any two non-adjacent segments of the polyline intersect or
/// touch; adjacent segments sharing an endpoint are exempt.
pub fn self_intersects(path: &Path2D) -> bool {
    points_self_intersect(path.points())
}

fn points_self_intersect(pts: &[[f64; 2]]) -> bool {
    let n = pts.len();
    if n < 4 {
        return false;
    }
    for i in 0..n - 1 {
        let (a, b) = (pts[i], pts[i + 1]);
        let (axmin, axmax) = (a[0].min(b[0]), a[0].max(b[0]));
        let (aymin, aymax) = (a[1].min(b[1]), a[1].max(b[1]));
        for j in i + 2..n - 1 {
            let (c, d) = (pts[j], pts[j + 1]);
            // Bounding-box reject before the exact test.
            if c[0].max(d[0]) < axmin - COLLINEAR_EPS
                || c[0].min(d[0]) > axmax + COLLINEAR_EPS
                || c[1].max(d[1]) < aymin - COLLINEAR_EPS
                || c[1].min(d[1]) > aymax + COLLINEAR_EPS
            {
                continue;
            }
            if segments_intersect(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

/// One elliptical slice sampling step around a zero-mean Gaussian prior.
///
/// With the 0 / -inf feasibility likelihood used here this accepts the first
/// non-intersecting proposal on the shrinking bracket; it always terminates
/// because the bracket contracts toward the (feasible) current state.
pub fn ess_step<L>(current: &[f64], prior_sample: &[f64], log_lik: L, rng: &mut impl Rng) -> Result<Vec<f64>>
where
    L: Fn(&[f64]) -> f64,
{
    let ll_current = log_lik(current);
    if ll_current == f64::NEG_INFINITY {
        return Err(Error::InfeasibleState);
    }
    let log_y = ll_current + rng.gen_range(0.0f64..1.0).max(f64::MIN_POSITIVE).ln();

    let mut alpha: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
    let mut lo = alpha - 2.0 * std::f64::consts::PI;
    let mut hi = alpha;

    loop {
        let (c, s) = (alpha.cos(), alpha.sin());
        let proposal: Vec<f64> = current
            .iter()
            .zip(prior_sample)
            .map(|(&x, &v)| x * c + v * s)
            .collect();
        if log_lik(&proposal) > log_y {
            return Ok(proposal);
        }
        if alpha < 0.0 {
            lo = alpha;
        } else {
            hi = alpha;
        }
        alpha = rng.gen_range(lo..hi);
        if hi - lo < 1e-15 {
            // Bracket collapsed onto the current state.
            return Ok(current.to_vec());
        }
    }
}

/// Generate `count` smooth non-self-intersecting paths.
///
/// Each path starts from the unit circle; the circle is treated as the GP
/// mean and ESS runs on the zero-mean deviations, both axes perturbed
/// jointly per step (one prior draw per axis, one shared bracket) so the
/// non-intersection constraint sees a coherent path.
pub fn generate_paths(
    count: usize,
    n_points: usize,
    iters_per_path: usize,
    length_scale: f64,
    seed: u64,
) -> Result<Vec<Path2D>> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be positive".into()));
    }
    let prior = GpPrior::new(n_points, length_scale)?;
    let mean: Vec<[f64; 2]> = prior.grid().iter().map(|&t| [t.cos(), t.sin()]).collect();

    let feasible = |dev: &[f64]| -> f64 {
        let pts: Vec<[f64; 2]> = (0..n_points)
            .map(|i| [mean[i][0] + dev[i], mean[i][1] + dev[n_points + i]])
            .collect();
        for w in pts.windows(2) {
            if crate::geometry::dist(w[0], w[1]) <= 1e-12 {
                return f64::NEG_INFINITY;
            }
        }
        if points_self_intersect(&pts) {
            f64::NEG_INFINITY
        } else {
            0.0
        }
    };

    let indices: Vec<u64> = (0..count as u64).collect();
    let results = parallel_map(&indices, |&k| -> Result<Path2D> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k + 1);
        let mut dev = vec![0.0; 2 * n_points];
        for _ in 0..iters_per_path {
            let mut nu = prior.sample(&mut rng);
            nu.extend(prior.sample(&mut rng));
            dev = ess_step(&dev, &nu, feasible, &mut rng)?;
        }
        let pts: Vec<[f64; 2]> = (0..n_points)
            .map(|i| [mean[i][0] + dev[i], mean[i][1] + dev[n_points + i]])
            .collect();
        Path2D::new(pts)
    });
    results.into_iter().collect()
}
