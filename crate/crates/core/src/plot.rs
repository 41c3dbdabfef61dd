//! Minimal hand-rolled SVG emission: path overlays (goal, design,
//! realization in distinct strokes) and robot poses (mesh edges, obstacle
//! circle, target cross). No external renderer; output is plain SVG 1.1.

use std::fmt::Write as _;
use std::path::Path;

use crate::data::{Path2D, RobotGoal, RobotRealization};
use crate::{Error, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 40.0;

/// Distinct stroke colors cycled over series.
const COLORS: [&str; 6] = ["#555555", "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/// Affine map from data space to the SVG viewport (y flipped).
struct Frame {
    scale: f64,
    x0: f64,
    y0: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = [f64; 2]>) -> Result<Self> {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        let mut any = false;
        for p in points {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::NonFinite("plot point".into()));
            }
            any = true;
            for a in 0..2 {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
        if !any {
            return Err(Error::InvalidArgument("nothing to plot".into()));
        }
        let span_x = (max[0] - min[0]).max(1e-9);
        let span_y = (max[1] - min[1]).max(1e-9);
        let scale = ((WIDTH - 2.0 * MARGIN) / span_x).min((HEIGHT - 2.0 * MARGIN) / span_y);
        // Center the data in the viewport.
        let x0 = min[0] - (WIDTH / scale - span_x) / 2.0;
        let y0 = min[1] - (HEIGHT / scale - span_y) / 2.0;
        Ok(Self { scale, x0, y0 })
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        ((p[0] - self.x0) * self.scale, HEIGHT - (p[1] - self.y0) * self.scale)
    }
}

struct Svg {
    body: String,
}

impl Svg {
    fn new() -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
        );
        let _ = writeln!(body, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
        Self { body }
    }

    fn polyline(&mut self, frame: &Frame, pts: &[[f64; 2]], color: &str, width: f64) {
        let mut d = String::new();
        for p in pts {
            let (x, y) = frame.map(*p);
            let _ = write!(d, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(
            self.body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\"/>",
            d.trim_end()
        );
    }

    fn line(&mut self, frame: &Frame, a: [f64; 2], b: [f64; 2], color: &str, width: f64) {
        let (x1, y1) = frame.map(a);
        let (x2, y2) = frame.map(b);
        let _ = writeln!(
            self.body,
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" \
             stroke=\"{color}\" stroke-width=\"{width}\"/>"
        );
    }

    fn circle(&mut self, frame: &Frame, center: [f64; 2], radius: f64, color: &str) {
        let (cx, cy) = frame.map(center);
        let r = radius * frame.scale;
        let _ = writeln!(
            self.body,
            "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{r:.2}\" fill=\"{color}\" \
             fill-opacity=\"0.25\" stroke=\"{color}\" stroke-width=\"1.5\"/>"
        );
    }

    fn label(&mut self, x: f64, y: f64, color: &str, text: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.0}\" y=\"{y:.0}\" fill=\"{color}\" font-family=\"sans-serif\" \
             font-size=\"14\">{text}</text>"
        );
    }

    fn save(mut self, path: &Path) -> Result<()> {
        self.body.push_str("</svg>\n");
        std::fs::write(path, self.body)?;
        Ok(())
    }
}

/// Overlay of named paths (typically goal, design, realization) in distinct
/// stroke colors with a small legend.
pub fn plot_paths(series: &[(&str, &Path2D)], out: &Path) -> Result<()> {
    if series.is_empty() {
        return Err(Error::InvalidArgument("nothing to plot".into()));
    }
    let frame = Frame::fit(series.iter().flat_map(|(_, p)| p.points().iter().copied()))?;
    let mut svg = Svg::new();
    for (i, (name, p)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        svg.polyline(&frame, p.points(), color, 2.0);
        svg.label(MARGIN, MARGIN / 2.0 + 16.0 * i as f64, color, name);
    }
    svg.save(out)
}

/// Robot pose: mesh edges (level rungs plus the three columns), the obstacle
/// circle, and a cross at the goal target.
pub fn plot_robot(u: &RobotRealization, goal: &RobotGoal, out: &Path) -> Result<()> {
    let extras = [
        goal.target,
        [
            goal.obstacle_center[0] - goal.obstacle_radius,
            goal.obstacle_center[1] - goal.obstacle_radius,
        ],
        [
            goal.obstacle_center[0] + goal.obstacle_radius,
            goal.obstacle_center[1] + goal.obstacle_radius,
        ],
    ];
    let frame = Frame::fit(u.vertices.iter().copied().chain(extras))?;
    let mut svg = Svg::new();

    svg.circle(&frame, goal.obstacle_center, goal.obstacle_radius, "#d62728");

    // Mesh: vertices come in levels of three (left, center, right).
    let levels = u.vertices.len() / 3;
    for l in 0..levels {
        let row = &u.vertices[3 * l..3 * l + 3];
        svg.polyline(&frame, row, "#1f77b4", 1.5);
        if l + 1 < levels {
            for c in 0..3 {
                svg.line(&frame, u.vertices[3 * l + c], u.vertices[3 * (l + 1) + c], "#1f77b4", 1.5);
            }
        }
    }

    // Target cross, sized relative to the arm.
    let s = 8.0 / frame.scale;
    svg.line(&frame, [goal.target[0] - s, goal.target[1]], [goal.target[0] + s, goal.target[1]], "#2ca02c", 2.5);
    svg.line(&frame, [goal.target[0], goal.target[1] - s], [goal.target[0], goal.target[1] + s], "#2ca02c", 2.5);

    svg.save(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{RobotDesign, ROBOT_DESIGN_DIM};
    use crate::sim::{arm_realize, ArmConfig};

    #[test]
    fn path_overlay_has_one_polyline_per_series() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("p.svg");
        let a = Path2D::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 1.0]]).unwrap();
        let b = Path2D::new(vec![[0.0, 0.1], [1.0, 0.1], [2.0, 1.1]]).unwrap();
        plot_paths(&[("goal", &a), ("design", &b)], &out).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.matches("<polyline").count(), 2);
        assert!(text.contains(">goal<") && text.contains(">design<"));
        assert!(text.starts_with("<svg"));
        assert!(text.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn rest_pose_renders_vertical_column() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("r.svg");
        let rest = RobotDesign::new(vec![1.0; ROBOT_DESIGN_DIM]).unwrap();
        let u = arm_realize(&rest, &ArmConfig::default()).unwrap();
        let goal = RobotGoal::new(u.top_mid(), [5.0, 5.0], crate::data::OBSTACLE_RADIUS).unwrap();
        plot_robot(&u, &goal, &out).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.contains("<circle"));
        // 21 level rungs plus the target-cross lines and column edges.
        assert_eq!(text.matches("<polyline").count(), 21);
        assert!(text.matches("<line").count() >= 60);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("x.svg");
        assert!(plot_paths(&[], &out).is_err());
        assert!(!out.exists());
    }
}
