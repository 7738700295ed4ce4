use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::dataset::Dataset;
use crate::error::{PolygridError, Result};

/// One-factor measurement model: `raw_k = loading_k * eta + error_k`,
/// clipped to the domain's range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CongenericSpec {
    pub name: String,
    pub domain_names: Vec<String>,
    pub m: usize,
    pub loadings: Vec<f64>,
    /// Mean and standard deviation of the latent score before truncation
    /// to positive values.
    pub eta_mean: f64,
    pub eta_sd: f64,
    pub error_sd: Vec<f64>,
    pub ranges: Vec<(f64, f64)>,
}

impl CongenericSpec {
    pub fn d(&self) -> usize {
        self.loadings.len()
    }

    pub fn error_variances(&self) -> Vec<f64> {
        self.error_sd.iter().map(|s| s * s).collect()
    }

    /// Same spec without measurement error.
    pub fn without_error(&self) -> Self {
        CongenericSpec {
            error_sd: vec![0.0; self.d()],
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        let d = self.d();
        if d < 3 {
            return Err(PolygridError::TooFewDomains(d));
        }
        if self.m == 0 {
            return Err(PolygridError::Empty("synthetic dataset with zero rows".into()));
        }
        if self.domain_names.len() != d || self.error_sd.len() != d || self.ranges.len() != d {
            return Err(PolygridError::DimensionMismatch(
                "loadings, errors, ranges and names must have equal length".into(),
            ));
        }
        if let Some(k) = self.loadings.iter().position(|&l| !(l > 0.0)) {
            return Err(PolygridError::InvalidConfig(format!(
                "loading {k} is {}, loadings must be positive",
                self.loadings[k]
            )));
        }
        if self.error_sd.iter().any(|&s| !(s >= 0.0)) || !(self.eta_sd >= 0.0) {
            return Err(PolygridError::InvalidConfig("standard deviations must be non-negative".into()));
        }
        if self.ranges.iter().any(|&(lo, hi)| !(lo >= 0.0 && hi > lo)) {
            return Err(PolygridError::InvalidConfig("ranges need 0 <= lo < hi".into()));
        }
        Ok(())
    }
}

/// Reliability of a congeneric scale:
/// `(sum loadings)^2 / ((sum loadings)^2 + sum error variances)`.
pub fn mcdonald_omega(loadings: &[f64], error_variances: &[f64]) -> Result<f64> {
    if loadings.iter().all(|&l| l == 0.0) {
        return Err(PolygridError::InvalidConfig("all loadings are zero".into()));
    }
    if error_variances.iter().any(|&v| v < 0.0) {
        return Err(PolygridError::InvalidConfig("negative error variance".into()));
    }
    let s: f64 = loadings.iter().sum();
    let s2 = s * s;
    Ok(s2 / (s2 + error_variances.iter().sum::<f64>()))
}

pub fn synth_congeneric(spec: &CongenericSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eta_dist = Normal::new(spec.eta_mean, spec.eta_sd)
        .map_err(|e| PolygridError::InvalidConfig(e.to_string()))?;
    let errors: Vec<Normal<f64>> = spec
        .error_sd
        .iter()
        .map(|&s| Normal::new(0.0, s).map_err(|e| PolygridError::InvalidConfig(e.to_string())))
        .collect::<Result<_>>()?;
    let mut raw = Vec::with_capacity(spec.m);
    for _ in 0..spec.m {
        let mut eta = eta_dist.sample(&mut rng);
        let mut tries = 0;
        while eta <= 0.0 {
            tries += 1;
            if tries > 10_000 {
                return Err(PolygridError::InvalidConfig(
                    "latent distribution has almost no positive mass".into(),
                ));
            }
            eta = eta_dist.sample(&mut rng);
        }
        let row = (0..spec.d())
            .map(|k| {
                let (lo, hi) = spec.ranges[k];
                (spec.loadings[k] * eta + errors[k].sample(&mut rng)).clamp(lo, hi)
            })
            .collect();
        raw.push(row);
    }
    let mut ds = Dataset::from_raw(&spec.name, spec.domain_names.clone(), raw)?;
    ds.ranges = Some(spec.ranges.clone());
    ds.manifest.synthesis = Some(serde_json::json!({
        "generator": "congeneric",
        "seed": seed,
        "spec": spec,
        "omega": mcdonald_omega(&spec.loadings, &spec.error_variances())?,
    }));
    Ok(ds)
}

/// Instrument metadata used to synthesise stand-in datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Instrument {
    Whoqol,
    Ampiab,
    Elsio,
}

impl Instrument {
    pub const ALL: [Instrument; 3] = [Instrument::Whoqol, Instrument::Ampiab, Instrument::Elsio];

    pub fn name(&self) -> &'static str {
        match self {
            Instrument::Whoqol => "whoqol",
            Instrument::Ampiab => "ampiab",
            Instrument::Elsio => "elsio1",
        }
    }

    /// Rows in the reference sample of each instrument.
    pub fn default_rows(&self) -> usize {
        match self {
            Instrument::Whoqol => 100,
            Instrument::Ampiab => 510,
            Instrument::Elsio => 718,
        }
    }

    pub fn spec(&self, m: usize) -> CongenericSpec {
        let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        match self {
            Instrument::Whoqol => CongenericSpec {
                name: self.name().into(),
                domain_names: names(&["physical", "psychological", "social", "environment"]),
                m,
                loadings: vec![0.84, 1.0, 0.85, 0.77],
                eta_mean: 17.5,
                eta_sd: 3.0,
                error_sd: vec![1.0; 4],
                ranges: vec![(4.0, 20.0); 4],
            },
            Instrument::Ampiab => CongenericSpec {
                name: self.name().into(),
                domain_names: names(&["cognitive", "adl", "iadl", "oral", "morbidities"]),
                m,
                loadings: vec![0.7; 5],
                eta_mean: 4.0,
                eta_sd: 1.2,
                error_sd: vec![0.4; 5],
                ranges: vec![(0.0, 3.0), (0.0, 4.0), (0.0, 4.0), (0.0, 4.0), (0.0, 10.0)],
            },
            Instrument::Elsio => CongenericSpec {
                name: self.name().into(),
                domain_names: names(&["sensory", "cognition", "vitality", "locomotion", "psychological"]),
                m,
                loadings: vec![0.45, 0.64, 0.59, 0.95, 0.57],
                eta_mean: 9.0,
                eta_sd: 2.0,
                error_sd: vec![0.8; 5],
                ranges: vec![(1.0, 10.0); 5],
            },
        }
    }

    /// Sum-score cutoffs and class names, lowest class first.
    pub fn classes(&self) -> (Vec<f64>, Vec<String>) {
        let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        match self {
            Instrument::Whoqol => (vec![60.0], names(&["Poor QOL", "Good QOL"])),
            Instrument::Ampiab => (vec![12.0, 15.0], names(&["high need", "moderate need", "low need"])),
            Instrument::Elsio => (
                vec![24.0, 27.0, 30.0, 33.0, 36.0],
                names(&["c0", "c1", "c2", "c3", "c4", "c5"]),
            ),
        }
    }
}

impl std::str::FromStr for Instrument {
    type Err = PolygridError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "whoqol" => Ok(Instrument::Whoqol),
            "ampiab" => Ok(Instrument::Ampiab),
            "elsio" | "elsio1" => Ok(Instrument::Elsio),
            _ => Err(PolygridError::InvalidConfig(format!("unknown instrument {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{column, pearson};

    #[test]
    fn omega_examples() {
        assert_eq!(mcdonald_omega(&[1.0, 2.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(mcdonald_omega(&[1.0; 4], &[4.0; 4]).unwrap(), 0.5);
        let lo = mcdonald_omega(&[0.5; 4], &[1.0; 4]).unwrap();
        let hi = mcdonald_omega(&[1.0; 4], &[1.0; 4]).unwrap();
        assert!(hi > lo);
        assert!(mcdonald_omega(&[0.0; 3], &[1.0; 3]).is_err());
    }

    #[test]
    fn zero_error_columns_are_perfectly_correlated() {
        let mut spec = Instrument::Whoqol.spec(200).without_error();
        spec.ranges = vec![(0.0, 100.0); 4];
        let ds = synth_congeneric(&spec, 4).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let r = pearson(&column(&ds.raw, a), &column(&ds.raw, b));
                assert!((r - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_positive_loadings() {
        let mut spec = Instrument::Whoqol.spec(10);
        spec.loadings[2] = 0.0;
        assert!(synth_congeneric(&spec, 0).is_err());
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let spec = Instrument::Elsio.spec(50);
        assert_eq!(synth_congeneric(&spec, 9).unwrap(), synth_congeneric(&spec, 9).unwrap());
        assert_ne!(synth_congeneric(&spec, 9).unwrap().raw, synth_congeneric(&spec, 10).unwrap().raw);
    }
}
