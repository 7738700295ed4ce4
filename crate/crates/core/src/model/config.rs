use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PolygridError, Result};
use crate::geometry::{AnnulusType, PartitionSpec, SectorType, DEFAULT_ARC_RESOLUTION};
use crate::solvers::SolverKind;

/// Heuristic used to assign domains to polygon vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexOrder {
    Original,
    Averages,
    Measures,
    Rho,
}

impl VertexOrder {
    pub fn short(&self) -> &'static str {
        match self {
            VertexOrder::Original => "orig",
            VertexOrder::Averages => "avg",
            VertexOrder::Measures => "msr",
            VertexOrder::Rho => "rho",
        }
    }
}

impl fmt::Display for VertexOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VertexOrder::Original => "original",
            VertexOrder::Averages => "averages",
            VertexOrder::Measures => "measures",
            VertexOrder::Rho => "rho",
        })
    }
}

impl FromStr for VertexOrder {
    type Err = PolygridError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" | "orig" => Ok(VertexOrder::Original),
            "averages" | "avg" => Ok(VertexOrder::Averages),
            "measures" | "msr" => Ok(VertexOrder::Measures),
            "rho" => Ok(VertexOrder::Rho),
            _ => Err(PolygridError::InvalidConfig(format!("unknown vertex order {s:?}"))),
        }
    }
}

/// Whether labels share one decision threshold or get one each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffScheme {
    Single,
    Multiple,
}

impl fmt::Display for CutoffScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CutoffScheme::Single => "single",
            CutoffScheme::Multiple => "multiple",
        })
    }
}

impl FromStr for CutoffScheme {
    type Err = PolygridError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(CutoffScheme::Single),
            "multiple" => Ok(CutoffScheme::Multiple),
            _ => Err(PolygridError::InvalidConfig(format!("unknown cutoff scheme {s:?}"))),
        }
    }
}

pub const DEFAULT_THRESHOLD_GRANULARITY: usize = 101;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolygridConfig {
    pub ns_per_domain: usize,
    pub n_a: usize,
    pub vorder: VertexOrder,
    pub sector: SectorType,
    pub annulus: AnnulusType,
    pub solver: SolverKind,
    pub cutoff: CutoffScheme,
    pub threshold_granularity: usize,
    pub arc_resolution: usize,
    pub seed: u64,
}

impl Default for PolygridConfig {
    fn default() -> Self {
        PolygridConfig {
            ns_per_domain: 1,
            n_a: 1,
            vorder: VertexOrder::Rho,
            sector: SectorType::Miss,
            annulus: AnnulusType::SInvariant,
            solver: SolverKind::Lstsq,
            cutoff: CutoffScheme::Single,
            threshold_granularity: DEFAULT_THRESHOLD_GRANULARITY,
            arc_resolution: DEFAULT_ARC_RESOLUTION,
            seed: 0,
        }
    }
}

impl PolygridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ns_per_domain == 0 || self.n_a == 0 {
            return Err(PolygridError::InvalidConfig(
                "sectors per domain and annuli must be at least 1".into(),
            ));
        }
        if self.threshold_granularity < 2 {
            return Err(PolygridError::InvalidConfig(
                "threshold granularity must be at least 2".into(),
            ));
        }
        if let SolverKind::Ridge { lambda } = self.solver {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(PolygridError::InvalidConfig(format!(
                    "ridge lambda must be positive, got {lambda}"
                )));
            }
        }
        Ok(())
    }

    pub fn n_sectors(&self, d: usize) -> usize {
        self.ns_per_domain * d
    }

    pub fn partition_spec(&self, d: usize, tree_radii: Option<Vec<f64>>) -> PartitionSpec {
        PartitionSpec {
            n_a: self.n_a,
            n_s: self.n_sectors(d),
            annulus: self.annulus,
            sector: self.sector,
            tree_radii,
            arc_resolution: self.arc_resolution,
        }
    }

    /// Compact description, e.g. `(1, 1, avg, s-invt, cover, ridge, single)`.
    pub fn tag(&self) -> String {
        let annulus = match self.annulus {
            AnnulusType::SInvariant => "s-invt",
            AnnulusType::RInvariant => "r-invt",
            AnnulusType::Tree => "tree",
        };
        format!(
            "({}, {}, {}, {}, {}, {}, {})",
            self.ns_per_domain,
            self.n_a,
            self.vorder.short(),
            annulus,
            self.sector,
            self.solver,
            self.cutoff
        )
    }
}

/// Value lists whose cartesian product forms a config grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub ns_per_domain: Vec<usize>,
    pub n_a: Vec<usize>,
    pub vorder: Vec<VertexOrder>,
    pub annulus: Vec<AnnulusType>,
    pub sector: Vec<SectorType>,
    pub solver: Vec<SolverKind>,
    pub cutoff: Vec<CutoffScheme>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            ns_per_domain: vec![1, 2, 3],
            n_a: (1..=8).collect(),
            vorder: vec![VertexOrder::Averages, VertexOrder::Rho, VertexOrder::Measures],
            annulus: vec![AnnulusType::SInvariant, AnnulusType::RInvariant, AnnulusType::Tree],
            sector: vec![SectorType::Cover, SectorType::Miss],
            solver: vec![
                SolverKind::Lstsq,
                SolverKind::LstsqSym,
                SolverKind::LstsqUni,
                SolverKind::ridge(),
            ],
            cutoff: vec![CutoffScheme::Single, CutoffScheme::Multiple],
        }
    }
}

impl GridSpec {
    pub fn len(&self) -> usize {
        self.ns_per_domain.len()
            * self.n_a.len()
            * self.vorder.len()
            * self.annulus.len()
            * self.sector.len()
            * self.solver.len()
            * self.cutoff.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Enumerates configs with the cutoff scheme varying fastest and sectors
    /// per domain slowest. `base` supplies the remaining settings.
    pub fn configs(&self, base: &PolygridConfig) -> Vec<PolygridConfig> {
        let mut out = Vec::with_capacity(self.len());
        for &ns in &self.ns_per_domain {
            for &na in &self.n_a {
                for &vorder in &self.vorder {
                    for &annulus in &self.annulus {
                        for &sector in &self.sector {
                            for &solver in &self.solver {
                                for &cutoff in &self.cutoff {
                                    out.push(PolygridConfig {
                                        ns_per_domain: ns,
                                        n_a: na,
                                        vorder,
                                        sector,
                                        annulus,
                                        solver,
                                        cutoff,
                                        ..base.clone()
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn default_grid() -> Vec<PolygridConfig> {
    GridSpec::default().configs(&PolygridConfig::default())
}
