use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::trial::Point;
use crate::error::ProtocolError;

/// Click order for `n` (odd) targets placed around a circle: target
/// `(k s) mod n` with `s = (n + 1) / 2`, which alternates across the circle.
pub fn click_order(n: usize) -> Result<Vec<usize>, ProtocolError> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(ProtocolError::Domain(format!(
            "target count must be odd and >= 3, got {n}"
        )));
    }
    let step = n.div_ceil(2);
    Ok((0..n).map(|k| k * step % n).collect())
}

/// Targets on a circle, listed in click order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetLayout {
    #[serde(rename = "n")]
    pub n_targets: usize,
    #[serde(rename = "A")]
    pub distance: f64,
    #[serde(rename = "W")]
    pub width: f64,
    #[serde(rename = "B")]
    pub blur: f64,
    pub circle_diameter: f64,
    /// `centers[k]` is the k-th target to click.
    pub centers: Vec<Point>,
    /// `order[k]` is the position (0 = top, clockwise) of the k-th target.
    pub order: Vec<usize>,
}

/// Places `n` targets so that consecutive targets in click order are exactly
/// `distance` apart: the circle diameter is `A / sin(pi s / n)`.
pub fn generate_layout(
    n: usize,
    distance: f64,
    width: f64,
    blur: f64,
    screen_center: Point,
) -> Result<TargetLayout, ProtocolError> {
    let order = click_order(n)?;
    if !(distance > 0.0) || !(width > 0.0) {
        return Err(ProtocolError::Domain(format!(
            "layout needs A > 0 and W > 0, got A={distance}, W={width}"
        )));
    }
    let step = n.div_ceil(2);
    let diameter = distance / (PI * step as f64 / n as f64).sin();
    let radius = diameter / 2.0;
    let centers = order
        .iter()
        .map(|&pos| {
            let theta = -PI / 2.0 + 2.0 * PI * pos as f64 / n as f64;
            Point::new(
                screen_center.x + radius * theta.cos(),
                screen_center.y + radius * theta.sin(),
            )
        })
        .collect();
    Ok(TargetLayout {
        n_targets: n,
        distance,
        width,
        blur,
        circle_diameter: diameter,
        centers,
        order,
    })
}

impl TargetLayout {
    /// Target sequence of one session as indices into `centers`: the start
    /// target, then `n` measured targets ending back on the start position.
    pub fn session_sequence(&self) -> impl Iterator<Item = usize> + '_ {
        (0..=self.n_targets).map(|k| k % self.n_targets)
    }

    /// Warnings for targets that do not fit in a `width x height` screen.
    pub fn check_bounds(&self, width: f64, height: f64) -> Vec<String> {
        let r = self.width / 2.0;
        self.centers
            .iter()
            .enumerate()
            .filter(|(_, c)| c.x - r < 0.0 || c.y - r < 0.0 || c.x + r > width || c.y + r > height)
            .map(|(k, c)| {
                format!(
                    "target {k} at ({:.1}, {:.1}) exceeds the {width}x{height} screen",
                    c.x, c.y
                )
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String, ProtocolError> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Boundary-inclusive hit test for a circular target of diameter `width`.
pub fn is_hit(click: Point, center: Point, width: f64) -> bool {
    click.distance(center) <= width / 2.0
}
