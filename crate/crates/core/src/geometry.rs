//! Arc-length parameterization, resampling, sliding-window featurization,
//! Chamfer distance, and the path smoothing regularizer.

use crate::data::Path2D;
use crate::{Error, Result};

#[inline]
pub fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Piecewise-linear arc-length parameterization of a polyline, with queries
/// clamped to the endpoints.
#[derive(Debug, Clone)]
pub struct ArcParam {
    points: Vec<[f64; 2]>,
    /// Cumulative arc lengths, s_0 = 0 .. s_{n-1} = S.
    cum: Vec<f64>,
}

impl ArcParam {
    pub fn new(points: &[[f64; 2]]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidPath("arc parameterization needs >= 2 points".into()));
        }
        let mut cum = Vec::with_capacity(points.len());
        cum.push(0.0);
        for i in 1..points.len() {
            let d = dist(points[i], points[i - 1]);
            if d <= 0.0 {
                return Err(Error::InvalidPath(format!(
                    "zero-length segment at index {i}"
                )));
            }
            cum.push(cum[i - 1] + d);
        }
        Ok(Self { points: points.to_vec(), cum })
    }

    pub fn from_path(path: &Path2D) -> Result<Self> {
        Self::new(path.points())
    }

    /// Total arc length S.
    pub fn total_length(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    /// Position after walking distance `s` along the path; clamped so that
    /// f(s < 0) = f(0) and f(s > S) = f(S).
    pub fn query(&self, s: f64) -> [f64; 2] {
        if s <= 0.0 {
            return self.points[0];
        }
        let total = self.total_length();
        if s >= total {
            return *self.points.last().unwrap();
        }
        // cum is strictly increasing; find the segment containing s.
        let j = match self.cum.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(i) => return self.points[i],
            Err(i) => i - 1,
        };
        let t = (s - self.cum[j]) / (self.cum[j + 1] - self.cum[j]);
        let a = self.points[j];
        let b = self.points[j + 1];
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    }
}

/// Drop consecutive coincident points (paths that dwell in place, such as
/// realized fiber paths with stalled segments, are otherwise not arc-length
/// parameterizable). Errors when fewer than two distinct points remain.
fn dedup_points(points: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(points.len());
    for &p in points {
        if out.last().is_none_or(|&q| dist(p, q) > 1e-12) {
            out.push(p);
        }
    }
    if out.len() < 2 {
        return Err(Error::InvalidPath("path collapses to a single point".into()));
    }
    Ok(out)
}

/// Resample a path to `n_out` points uniformly spaced in arc length.
/// Consecutive coincident input points are collapsed first.
pub fn resample(path: &Path2D, n_out: usize) -> Result<Path2D> {
    if n_out < 2 {
        return Err(Error::InvalidArgument("resample needs n_out >= 2".into()));
    }
    let pts = dedup_points(path.points())?;
    let param = ArcParam::new(&pts)?;
    let total = param.total_length();
    let mut points = Vec::with_capacity(n_out);
    points.push(pts[0]);
    for k in 1..n_out - 1 {
        let s = total * k as f64 / (n_out - 1) as f64;
        points.push(param.query(s));
    }
    points.push(*pts.last().unwrap());
    Path2D::new_unchecked_spacing(points)
}

/// Resample to uniform spacing `s0`: round(S / s0) + 1 points (at least 2).
pub fn resample_spacing(path: &Path2D, s0: f64) -> Result<Path2D> {
    if !(s0 > 0.0) {
        return Err(Error::InvalidArgument("spacing must be positive".into()));
    }
    let pts = dedup_points(path.points())?;
    let param = ArcParam::new(&pts)?;
    let n = ((param.total_length() / s0).round() as usize + 1).max(2);
    resample(path, n)
}

/// Sliding-window features around arc position `center_s`: the concatenation
/// of f(center_s + i*s0) - f(center_s) for i = -m..m. Length 2(2m+1); the
/// center pair is exactly (0, 0).
pub fn window_features(param: &ArcParam, center_s: f64, m: usize, s0: f64) -> Vec<f64> {
    let center = param.query(center_s);
    let mut out = Vec::with_capacity(2 * (2 * m + 1));
    for i in -(m as i64)..=(m as i64) {
        if i == 0 {
            out.push(0.0);
            out.push(0.0);
        } else {
            let p = param.query(center_s + i as f64 * s0);
            out.push(p[0] - center[0]);
            out.push(p[1] - center[1]);
        }
    }
    out
}

/// Chamfer distance: symmetric average of mean nearest-point distances.
/// The paths may have different point counts; each directional mean divides
/// by its own count. Exact O(n*m) scan.
pub fn chamfer(g: &Path2D, u: &Path2D) -> f64 {
    let gp = g.points();
    let up = u.points();
    let dir = |from: &[[f64; 2]], to: &[[f64; 2]]| -> f64 {
        let sum: f64 = from
            .iter()
            .map(|&p| to.iter().map(|&q| dist(p, q)).fold(f64::INFINITY, f64::min))
            .sum();
        sum / from.len() as f64
    };
    0.5 * (dir(gp, up) + dir(up, gp))
}

/// Smoothing regularizer: sum of squared empirical second-order derivatives.
/// For interior points, the difference of unit tangents divided by the mean
/// of the adjacent segment lengths, squared norm.
pub fn smooth_reg(points: &[[f64; 2]]) -> Result<f64> {
    let n = points.len();
    if n < 3 {
        return Err(Error::InvalidPath("smoothing regularizer needs >= 3 points".into()));
    }
    let mut total = 0.0;
    for i in 1..n - 1 {
        let e_prev = sub(points[i], points[i - 1]);
        let e_next = sub(points[i + 1], points[i]);
        let np = norm(e_prev);
        let nn = norm(e_next);
        if np <= 0.0 || nn <= 0.0 {
            return Err(Error::InvalidPath(format!("coincident points around index {i}")));
        }
        let v = [e_next[0] / nn - e_prev[0] / np, e_next[1] / nn - e_prev[1] / np];
        let c = 2.0 / (np + nn);
        total += c * c * (v[0] * v[0] + v[1] * v[1]);
    }
    if !total.is_finite() {
        return Err(Error::NonFinite("smoothing regularizer".into()));
    }
    Ok(total)
}

/// Analytic gradient of [`smooth_reg`] with respect to every coordinate.
pub fn smooth_reg_grad(points: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
    let n = points.len();
    if n < 3 {
        return Err(Error::InvalidPath("smoothing regularizer needs >= 3 points".into()));
    }
    let mut grad = vec![[0.0, 0.0]; n];
    for i in 1..n - 1 {
        let b = sub(points[i], points[i - 1]); // previous edge
        let a = sub(points[i + 1], points[i]); // next edge
        let nb = norm(b);
        let na = norm(a);
        if nb <= 0.0 || na <= 0.0 {
            return Err(Error::InvalidPath(format!("coincident points around index {i}")));
        }
        let ah = [a[0] / na, a[1] / na];
        let bh = [b[0] / nb, b[1] / nb];
        let v = [ah[0] - bh[0], ah[1] - bh[1]];
        let c = 2.0 / (na + nb);
        let vv = v[0] * v[0] + v[1] * v[1];

        // d(term)/da = 2 c^2 (I - ah ah^T) v / na - c^3 ||v||^2 ah
        let av = ah[0] * v[0] + ah[1] * v[1];
        let da = [
            2.0 * c * c * (v[0] - ah[0] * av) / na - c * c * c * vv * ah[0],
            2.0 * c * c * (v[1] - ah[1] * av) / na - c * c * c * vv * ah[1],
        ];
        // d(term)/db = -2 c^2 (I - bh bh^T) v / nb - c^3 ||v||^2 bh
        let bv = bh[0] * v[0] + bh[1] * v[1];
        let db = [
            -2.0 * c * c * (v[0] - bh[0] * bv) / nb - c * c * c * vv * bh[0],
            -2.0 * c * c * (v[1] - bh[1] * bv) / nb - c * c * c * vv * bh[1],
        ];

        // a = p_{i+1} - p_i, b = p_i - p_{i-1}.
        grad[i + 1][0] += da[0];
        grad[i + 1][1] += da[1];
        grad[i][0] -= da[0];
        grad[i][1] -= da[1];
        grad[i][0] += db[0];
        grad[i][1] += db[1];
        grad[i - 1][0] -= db[0];
        grad[i - 1][1] -= db[1];
    }
    Ok(grad)
}

#[inline]
fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
fn norm(a: [f64; 2]) -> f64 {
    (a[0] * a[0] + a[1] * a[1]).sqrt()
}
