use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::polygon::{HalfPlane, Point, Polygon};
use crate::error::{PolygridError, Result};

pub const DEFAULT_ARC_RESOLUTION: usize = 64;

/// How the radii separating annuli are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnnulusType {
    /// Equal-area annuli: radii `sqrt((p+1)/n_a)`.
    #[serde(rename = "s-invariant")]
    SInvariant,
    /// Equal-width annuli: radii `(p+1)/n_a`.
    #[serde(rename = "r-invariant")]
    RInvariant,
    /// Radii supplied by a regression tree.
    #[serde(rename = "tree")]
    Tree,
}

/// Where the first sector starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SectorType {
    /// First sector starts at angle zero.
    #[serde(rename = "miss")]
    Miss,
    /// First sector is bisected by the first domain axis.
    #[serde(rename = "cover")]
    Cover,
}

impl fmt::Display for AnnulusType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnnulusType::SInvariant => "s-invariant",
            AnnulusType::RInvariant => "r-invariant",
            AnnulusType::Tree => "tree",
        })
    }
}

impl FromStr for AnnulusType {
    type Err = PolygridError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s-invariant" | "s-invt" => Ok(AnnulusType::SInvariant),
            "r-invariant" | "r-invt" => Ok(AnnulusType::RInvariant),
            "tree" => Ok(AnnulusType::Tree),
            _ => Err(PolygridError::InvalidConfig(format!("unknown annulus type {s:?}"))),
        }
    }
}

impl fmt::Display for SectorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SectorType::Miss => "miss",
            SectorType::Cover => "cover",
        })
    }
}

impl FromStr for SectorType {
    type Err = PolygridError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "miss" => Ok(SectorType::Miss),
            "cover" => Ok(SectorType::Cover),
            _ => Err(PolygridError::InvalidConfig(format!("unknown sector type {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub n_a: usize,
    pub n_s: usize,
    pub annulus: AnnulusType,
    pub sector: SectorType,
    /// Inner radii for `AnnulusType::Tree`, strictly ascending in (0, 1).
    pub tree_radii: Option<Vec<f64>>,
    pub arc_resolution: usize,
}

/// The unit disc split into `n_a * n_s` annular sectors.
///
/// Cell `r = p * n_s + q` is the intersection of annulus `p` (counted from
/// the origin) with sector `q` (counted anticlockwise). Every cell is stored
/// as a polygon whose arcs are circumscribed about the true circle, so the
/// union of the outermost cells contains the whole closed unit disc.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscPartition {
    pub n_a: usize,
    pub n_s: usize,
    pub annulus_type: AnnulusType,
    pub sector_type: SectorType,
    /// Outer radius of each annulus; the last entry is 1.0.
    pub radii: Vec<f64>,
    pub sector_start: f64,
    pub arc_resolution: usize,
    pub cells: Vec<Polygon>,
    // arc points per (annulus, sector), row-major like `cells`
    arcs: Vec<Vec<Point>>,
}

fn annulus_radii(spec: &PartitionSpec) -> Result<Vec<f64>> {
    let n_a = spec.n_a;
    match spec.annulus {
        AnnulusType::SInvariant => Ok((1..=n_a).map(|p| (p as f64 / n_a as f64).sqrt()).collect()),
        AnnulusType::RInvariant => Ok((1..=n_a).map(|p| p as f64 / n_a as f64).collect()),
        AnnulusType::Tree => {
            let inner = spec.tree_radii.as_ref().ok_or_else(|| {
                PolygridError::InvalidPartition("tree annuli need explicit radii".into())
            })?;
            if inner.len() + 1 != n_a {
                return Err(PolygridError::InvalidPartition(format!(
                    "{} tree radii given for {n_a} annuli",
                    inner.len()
                )));
            }
            let mut last = 0.0;
            for &r in inner {
                if !(r > last && r < 1.0) {
                    return Err(PolygridError::InvalidPartition(format!(
                        "tree radii must be strictly ascending in (0, 1), got {inner:?}"
                    )));
                }
                last = r;
            }
            let mut radii = inner.clone();
            radii.push(1.0);
            Ok(radii)
        }
    }
}

impl DiscPartition {
    pub fn new(d: usize, spec: &PartitionSpec) -> Result<Self> {
        if d <= 2 {
            return Err(PolygridError::TooFewDomains(d));
        }
        if spec.n_a == 0 {
            return Err(PolygridError::InvalidPartition("need at least one annulus".into()));
        }
        if spec.n_s < d || !spec.n_s.is_multiple_of(d) {
            return Err(PolygridError::InvalidPartition(format!(
                "sector count {} is not a positive multiple of {d} domains",
                spec.n_s
            )));
        }
        if spec.tree_radii.is_some() && spec.annulus != AnnulusType::Tree {
            return Err(PolygridError::InvalidPartition(
                "explicit radii are only accepted for tree annuli".into(),
            ));
        }
        if spec.arc_resolution < 2 {
            return Err(PolygridError::InvalidPartition("arc resolution below 2".into()));
        }
        let radii = annulus_radii(spec)?;
        let n_s = spec.n_s;
        let width = 2.0 * PI / n_s as f64;
        let sector_start = match spec.sector {
            SectorType::Miss => 0.0,
            SectorType::Cover => -PI / n_s as f64,
        };
        let steps = spec.arc_resolution - 1;
        let step = width / steps as f64;
        // chords tangent to the circle of radius R
        let inflate = 1.0 / (step / 2.0).cos();

        let mut arcs = Vec::with_capacity(spec.n_a * n_s);
        for &r in &radii {
            for q in 0..n_s {
                let a0 = sector_start + q as f64 * width;
                arcs.push(
                    (0..=steps)
                        .map(|t| Point::from_polar(r * inflate, a0 + t as f64 * step))
                        .collect::<Vec<_>>(),
                );
            }
        }
        let mut cells = Vec::with_capacity(arcs.len());
        for p in 0..spec.n_a {
            for q in 0..n_s {
                let mut v = arcs[p * n_s + q].clone();
                if p == 0 {
                    v.push(Point::ORIGIN);
                } else {
                    v.extend(arcs[(p - 1) * n_s + q].iter().rev());
                }
                cells.push(Polygon::new(v));
            }
        }
        Ok(DiscPartition {
            n_a: spec.n_a,
            n_s,
            annulus_type: spec.annulus,
            sector_type: spec.sector,
            radii,
            sector_start,
            arc_resolution: spec.arc_resolution,
            cells,
            arcs,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_a * self.n_s
    }

    pub fn sector_width(&self) -> f64 {
        2.0 * PI / self.n_s as f64
    }

    /// Bounding angles `[start, end)` of sector `q`.
    pub fn sector_bounds(&self, q: usize) -> (f64, f64) {
        let a0 = self.sector_start + q as f64 * self.sector_width();
        (a0, a0 + self.sector_width())
    }

    /// Area of `polygon ∩ cell_r` for every cell.
    ///
    /// Each sector is handled once: the polygon is cut to the sector's wedge,
    /// then the pie of each annulus' outer radius is measured and annuli are
    /// obtained by differencing consecutive pies.
    pub fn coverage(&self, polygon: &Polygon) -> Vec<f64> {
        let mut s = vec![0.0; self.n_cells()];
        for q in 0..self.n_s {
            let (a0, a1) = self.sector_bounds(q);
            let wedge = polygon
                .clip(&HalfPlane::left_of(Point::ORIGIN, Point::from_polar(1.0, a0)))
                .clip(&HalfPlane::left_of(Point::from_polar(1.0, a1), Point::ORIGIN));
            if wedge.len() < 3 {
                continue;
            }
            let wedge_area = wedge.area();
            let reach = wedge.max_radius();
            let mut inner = 0.0;
            for p in 0..self.n_a {
                let pie = if reach <= self.radii[p] {
                    wedge_area
                } else {
                    clip_to_arc(&wedge, &self.arcs[p * self.n_s + q]).area()
                };
                s[p * self.n_s + q] = (pie - inner).max(0.0);
                inner = pie;
            }
        }
        s
    }
}

fn clip_to_arc(subject: &Polygon, arc: &[Point]) -> Polygon {
    let mut out = subject.clone();
    for w in arc.windows(2) {
        let hp = HalfPlane::left_of(w[0], w[1]);
        if out.vertices.iter().all(|v| hp.contains(v)) {
            continue;
        }
        out = out.clip(&hp);
        if out.is_empty() {
            break;
        }
    }
    out
}

/// Builds the partition for an instrument with `d` domains.
pub fn partition_ud(d: usize, spec: &PartitionSpec) -> Result<DiscPartition> {
    DiscPartition::new(d, spec)
}

/// Areas of the polygon covering each cell of the partition.
pub fn cell_coverage(polygon: &Polygon, partition: &DiscPartition) -> Vec<f64> {
    partition.coverage(polygon)
}
