use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::polygon::{Point, Polygon};
use crate::error::{PolygridError, Result};

/// The d-th roots of unity, anticlockwise from `zeta[0] = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootsOfUnity {
    pub d: usize,
    pub zeta: Vec<Point>,
}

impl RootsOfUnity {
    pub fn new(d: usize) -> Result<Self> {
        if d <= 2 {
            return Err(PolygridError::TooFewDomains(d));
        }
        let theta = 2.0 * PI / d as f64;
        let zeta = (0..d)
            .map(|k| {
                let a = k as f64 * theta;
                Point::new(a.cos(), a.sin())
            })
            .collect();
        Ok(RootsOfUnity { d, zeta })
    }

    /// `sin(2π/d) / 2`, the area of the unit triangle spanned by two
    /// consecutive roots.
    pub fn nu(&self) -> f64 {
        (2.0 * PI / self.d as f64).sin() / 2.0
    }

    /// Places each score on its root: vertex k is `x_k * zeta_k`.
    pub fn polygon(&self, scores: &[f64]) -> Polygon {
        Polygon::new(
            scores
                .iter()
                .zip(&self.zeta)
                .map(|(&x, z)| z.scale(x))
                .collect(),
        )
    }
}

/// Checks that every entry of a unit-scaled row lies in `(0, 1]`.
pub fn check_scaled_row(row: usize, scores: &[f64]) -> Result<()> {
    for (col, &v) in scores.iter().enumerate() {
        if !v.is_finite() {
            return Err(PolygridError::NonFinite { row, col });
        }
        if v <= 0.0 || v > 1.0 {
            return Err(PolygridError::ScoreOutOfRange { row, col, value: v });
        }
    }
    Ok(())
}

/// Maps unit-scaled assessments to polygons on the closed unit disc.
pub fn uh_to_ud(rows: &[Vec<f64>]) -> Result<(Vec<Polygon>, RootsOfUnity)> {
    let d = rows
        .first()
        .map(Vec::len)
        .ok_or_else(|| PolygridError::Empty("no assessments".into()))?;
    let roots = RootsOfUnity::new(d)?;
    let mut polygons = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(PolygridError::DimensionMismatch(format!(
                "row {i} has {} scores, expected {d}",
                row.len()
            )));
        }
        check_scaled_row(i, row)?;
        polygons.push(roots.polygon(row));
    }
    Ok((polygons, roots))
}

/// Closed-form area of an assessment polygon: `nu * sum_k x_k x_{k+1}`.
pub fn star_area(scores: &[f64]) -> f64 {
    let d = scores.len();
    if d < 3 {
        return 0.0;
    }
    let nu = (2.0 * PI / d as f64).sin() / 2.0;
    nu * (0..d).map(|k| scores[k] * scores[(k + 1) % d]).sum::<f64>()
}
