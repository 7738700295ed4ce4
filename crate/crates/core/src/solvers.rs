//! Linear least-squares solvers used to learn per-label cell weights.
//!
//! All variants fit `S w (+ b) ≈ y` for one or more target columns at once.
//! The `lstsqsym` and `lstsquni` variants only change how targets and
//! feature rows are encoded; [`Readout`] folds those encodings back so that
//! every readout produces scores on the 0/1 target scale.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{PolygridError, Result};

pub const DEFAULT_RIDGE_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
#[derive(Default)]
pub enum SolverKind {
    /// Minimum-norm least squares, no intercept.
    #[default]
    Lstsq,
    /// Least squares with an unpenalised intercept and an L2 penalty on the
    /// cell weights.
    Ridge { lambda: f64 },
    /// As `Lstsq`, with targets encoded in {-1, 1}.
    LstsqSym,
    /// As `Lstsq`, with feature rows normalised to unit L1 norm (area
    /// shares instead of absolute areas).
    LstsqUni,
}

impl SolverKind {
    pub fn ridge() -> Self {
        SolverKind::Ridge {
            lambda: DEFAULT_RIDGE_LAMBDA,
        }
    }

    pub fn has_intercept(&self) -> bool {
        matches!(self, SolverKind::Ridge { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Lstsq => "lstsq",
            SolverKind::Ridge { .. } => "ridge",
            SolverKind::LstsqSym => "lstsqsym",
            SolverKind::LstsqUni => "lstsquni",
        }
    }

    /// Multiplier applied to a feature row before the inner product.
    pub fn row_scale(&self, row: &[f64]) -> f64 {
        match self {
            SolverKind::LstsqUni => {
                let total: f64 = row.iter().sum();
                if total > 0.0 {
                    1.0 / total
                } else {
                    1.0
                }
            }
            _ => 1.0,
        }
    }

    fn encode_target(&self, y: f64) -> f64 {
        match self {
            SolverKind::LstsqSym => 2.0 * y - 1.0,
            _ => y,
        }
    }

    fn validate(&self) -> Result<()> {
        if let SolverKind::Ridge { lambda } = self {
            if !(*lambda > 0.0) || !lambda.is_finite() {
                return Err(PolygridError::InvalidConfig(format!(
                    "ridge lambda must be positive, got {lambda}"
                )));
            }
        }
        Ok(())
    }
}


impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = PolygridError;

    /// Accepts `lstsq`, `lstsqsym`, `lstsquni`, `ridge` or `ridge:<lambda>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lstsq" => Ok(SolverKind::Lstsq),
            "lstsqsym" => Ok(SolverKind::LstsqSym),
            "lstsquni" => Ok(SolverKind::LstsqUni),
            "ridge" => Ok(SolverKind::ridge()),
            _ => {
                if let Some(l) = s.strip_prefix("ridge:") {
                    let lambda: f64 = l.parse().map_err(|_| {
                        PolygridError::InvalidConfig(format!("bad ridge lambda {l:?}"))
                    })?;
                    let kind = SolverKind::Ridge { lambda };
                    kind.validate()?;
                    Ok(kind)
                } else {
                    Err(PolygridError::InvalidConfig(format!("unknown solver {s:?}")))
                }
            }
        }
    }
}

/// Raw solution of one target column, on the solver's encoded scale.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub weights: Vec<f64>,
    pub intercept: Option<f64>,
}

/// A fitted column expressed on the 0/1 target scale:
/// `y = row_scale(row) * <row, weights> + intercept + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Readout {
    pub weights: Vec<f64>,
    pub intercept: Option<f64>,
    pub offset: f64,
}

impl LinearFit {
    pub fn readout(&self, kind: SolverKind) -> Readout {
        match kind {
            // y01 = (y_sym + 1) / 2
            SolverKind::LstsqSym => Readout {
                weights: self.weights.iter().map(|w| w / 2.0).collect(),
                intercept: self.intercept.map(|b| b / 2.0),
                offset: 0.5,
            },
            _ => Readout {
                weights: self.weights.clone(),
                intercept: self.intercept,
                offset: 0.0,
            },
        }
    }
}

fn to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let m = rows.len();
    if m == 0 {
        return Err(PolygridError::Empty("feature matrix has no rows".into()));
    }
    let f = rows[0].len();
    if f == 0 {
        return Err(PolygridError::Empty("feature matrix has no columns".into()));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != f {
            return Err(PolygridError::DimensionMismatch(format!(
                "feature row {i} has {} entries, expected {f}",
                r.len()
            )));
        }
        if let Some(j) = r.iter().position(|v| !v.is_finite()) {
            return Err(PolygridError::NonFinite { row: i, col: j });
        }
    }
    Ok(DMatrix::from_fn(m, f, |i, j| rows[i][j]))
}

/// Solves every target column against the same feature matrix.
/// `targets[t]` holds the `m` values of target column `t`.
pub fn solve_weights_multi(
    features: &[Vec<f64>],
    targets: &[Vec<f64>],
    kind: SolverKind,
) -> Result<Vec<LinearFit>> {
    kind.validate()?;
    let mut s = to_matrix(features)?;
    let (m, f) = s.shape();
    for (t, col) in targets.iter().enumerate() {
        if col.len() != m {
            return Err(PolygridError::DimensionMismatch(format!(
                "target {t} has {} rows, features have {m}",
                col.len()
            )));
        }
        if let Some(i) = col.iter().position(|v| !v.is_finite()) {
            return Err(PolygridError::NonFinite { row: i, col: t });
        }
    }
    if targets.is_empty() {
        return Ok(Vec::new());
    }
    if kind == SolverKind::LstsqUni {
        for (i, row) in features.iter().enumerate() {
            let k = kind.row_scale(row);
            s.row_mut(i).scale_mut(k);
        }
    }
    let y = DMatrix::from_fn(m, targets.len(), |i, t| kind.encode_target(targets[t][i]));

    match kind {
        SolverKind::Ridge { lambda } => {
            // [S 1; sqrt(λ) I 0] [w; b] = [y; 0]
            let mut a = DMatrix::zeros(m + f, f + 1);
            a.view_mut((0, 0), (m, f)).copy_from(&s);
            a.view_mut((0, f), (m, 1)).fill(1.0);
            let root = lambda.sqrt();
            for j in 0..f {
                a[(m + j, j)] = root;
            }
            let mut rhs = DMatrix::zeros(m + f, targets.len());
            rhs.view_mut((0, 0), (m, targets.len())).copy_from(&y);
            let qr = a.qr();
            let qty = qr.q().transpose() * rhs;
            let x = qr.r().solve_upper_triangular(&qty).ok_or_else(|| {
                PolygridError::InvalidConfig("ridge system is singular".into())
            })?;
            Ok((0..targets.len())
                .map(|t| LinearFit {
                    weights: (0..f).map(|j| x[(j, t)]).collect(),
                    intercept: Some(x[(f, t)]),
                })
                .collect())
        }
        _ => {
            let svd = s.svd(true, true);
            let largest = svd.singular_values.max();
            let eps = largest * f64::EPSILON * m.max(f) as f64;
            let x = svd
                .solve(&y, eps)
                .map_err(|e| PolygridError::InvalidConfig(format!("least squares failed: {e}")))?;
            Ok((0..targets.len())
                .map(|t| LinearFit {
                    weights: (0..f).map(|j| x[(j, t)]).collect(),
                    intercept: None,
                })
                .collect())
        }
    }
}

pub fn solve_weights(features: &[Vec<f64>], target: &[f64], kind: SolverKind) -> Result<LinearFit> {
    let mut fits = solve_weights_multi(features, &[target.to_vec()], kind)?;
    Ok(fits.remove(0))
}

/// `<row, weights> + intercept`.
pub fn predict_linear(row: &[f64], weights: &[f64], intercept: Option<f64>) -> Result<f64> {
    if row.len() != weights.len() {
        return Err(PolygridError::DimensionMismatch(format!(
            "row has {} features, weights have {}",
            row.len(),
            weights.len()
        )));
    }
    let dot: f64 = row.iter().zip(weights).map(|(a, b)| a * b).sum();
    Ok(dot + intercept.unwrap_or(0.0))
}

impl Readout {
    /// Per-feature terms `scale * w_r * s_r`; they sum to the score minus
    /// intercept and offset.
    pub fn contributions(&self, row: &[f64], scale: f64) -> Vec<f64> {
        row.iter()
            .zip(&self.weights)
            .map(|(s, w)| scale * w * s)
            .collect()
    }

    pub fn score(&self, row: &[f64], scale: f64) -> f64 {
        let dot: f64 = self.contributions(row, scale).iter().sum();
        dot + self.intercept.unwrap_or(0.0) + self.offset
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Normal equations `(AᵀA) x = Aᵀy` solved by Gaussian elimination with
    /// partial pivoting; independent of the SVD / QR paths.
    fn normal_equations(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        let f = a[0].len();
        let mut m = vec![vec![0.0; f + 1]; f];
        for (row, &t) in a.iter().zip(y) {
            for i in 0..f {
                for j in 0..f {
                    m[i][j] += row[i] * row[j];
                }
                m[i][f] += row[i] * t;
            }
        }
        for c in 0..f {
            let p = (c..f)
                .max_by(|&i, &j| m[i][c].abs().partial_cmp(&m[j][c].abs()).unwrap())
                .unwrap();
            m.swap(c, p);
            for r in 0..f {
                if r != c {
                    let k = m[r][c] / m[c][c];
                    for j in c..=f {
                        m[r][j] -= k * m[c][j];
                    }
                }
            }
        }
        (0..f).map(|i| m[i][f] / m[i][i]).collect()
    }

    fn random_system(seed: u64, m: usize, f: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..f).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect();
        let y = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        (a, y)
    }

    #[test]
    fn identity_system_is_reproduced() {
        let s = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let fit = solve_weights(&s, &[1.0, 0.0, 1.0], SolverKind::Lstsq).unwrap();
        for (w, e) in fit.weights.iter().zip([1.0, 0.0, 1.0]) {
            assert_abs_diff_eq!(*w, e, epsilon = 1e-12);
        }
        assert_eq!(fit.intercept, None);
    }

    #[test]
    fn zero_targets_give_zero_weights() {
        let (a, _) = random_system(3, 10, 4);
        let fit = solve_weights(&a, &[0.0; 10], SolverKind::Lstsq).unwrap();
        assert!(fit.weights.iter().all(|w| w.abs() < 1e-14));
    }

    #[test]
    fn lstsq_matches_normal_equations() {
        let (a, y) = random_system(11, 50, 8);
        let fit = solve_weights(&a, &y, SolverKind::Lstsq).unwrap();
        let oracle = normal_equations(&a, &y);
        for (w, o) in fit.weights.iter().zip(&oracle) {
            assert_abs_diff_eq!(*w, *o, epsilon = 1e-8);
        }
    }

    #[test]
    fn full_rank_square_system_has_no_residual() {
        let (a, y) = random_system(5, 6, 6);
        let fit = solve_weights(&a, &y, SolverKind::Lstsq).unwrap();
        for (row, t) in a.iter().zip(&y) {
            let p = predict_linear(row, &fit.weights, None).unwrap();
            assert!((p - t).abs() < 1e-9);
        }
    }

    #[test]
    fn rank_deficient_system_gets_minimum_norm_solution() {
        // duplicated column: minimum norm splits the weight evenly
        let a: Vec<Vec<f64>> = (1..=5).map(|i| vec![i as f64, i as f64]).collect();
        let y: Vec<f64> = (1..=5).map(|i| 2.0 * i as f64).collect();
        let fit = solve_weights(&a, &y, SolverKind::Lstsq).unwrap();
        assert_abs_diff_eq!(fit.weights[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.weights[1], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn ridge_matches_augmented_normal_equations() {
        let (a, y) = random_system(21, 40, 5);
        let lambda = 0.3;
        let fit = solve_weights(&a, &y, SolverKind::Ridge { lambda }).unwrap();
        // oracle: append intercept column, penalty rows on the weights only
        let mut aug: Vec<Vec<f64>> = a
            .iter()
            .map(|r| r.iter().copied().chain([1.0]).collect())
            .collect();
        let mut ty = y.clone();
        for j in 0..5 {
            let mut r = vec![0.0; 6];
            r[j] = lambda.sqrt();
            aug.push(r);
            ty.push(0.0);
        }
        let oracle = normal_equations(&aug, &ty);
        for j in 0..5 {
            assert_abs_diff_eq!(fit.weights[j], oracle[j], epsilon = 1e-9);
        }
        assert_abs_diff_eq!(fit.intercept.unwrap(), oracle[5], epsilon = 1e-9);
    }

    #[test]
    fn ridge_approaches_lstsq_with_intercept() {
        let (a, y) = random_system(8, 60, 6);
        let ridge = solve_weights(&a, &y, SolverKind::Ridge { lambda: 1e-10 }).unwrap();
        let with_ones: Vec<Vec<f64>> = a
            .iter()
            .map(|r| r.iter().copied().chain([1.0]).collect())
            .collect();
        let ls = solve_weights(&with_ones, &y, SolverKind::Lstsq).unwrap();
        for j in 0..6 {
            assert!((ridge.weights[j] - ls.weights[j]).abs() < 1e-5);
        }
        assert!((ridge.intercept.unwrap() - ls.weights[6]).abs() < 1e-5);
    }

    #[test]
    fn ridge_recovers_a_line() {
        let s: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 / 10.0]).collect();
        let y: Vec<f64> = s.iter().map(|r| 2.0 * r[0] + 1.0).collect();
        let fit = solve_weights(&s, &y, SolverKind::Ridge { lambda: 1e-12 }).unwrap();
        for r in &s {
            let p = predict_linear(r, &fit.weights, fit.intercept).unwrap();
            assert!((p - (2.0 * r[0] + 1.0)).abs() < 1e-6);
        }
    }

    #[test]
    fn predict_linear_basics() {
        assert_eq!(predict_linear(&[3.0, 4.0, 5.0], &[0.0, 1.0, 0.0], None).unwrap(), 4.0);
        assert_eq!(predict_linear(&[3.0, 4.0], &[0.0, 0.0], Some(2.5)).unwrap(), 2.5);
        assert!(predict_linear(&[1.0], &[1.0, 2.0], None).is_err());
    }

    #[test]
    fn sym_readout_maps_back_to_unit_scale() {
        let (a, _) = random_system(2, 30, 4);
        let y: Vec<f64> = a.iter().map(|r| if r[0] > 0.5 { 1.0 } else { 0.0 }).collect();
        let recoded: Vec<f64> = y.iter().map(|v| 2.0 * v - 1.0).collect();
        let plain = solve_weights(&a, &recoded, SolverKind::Lstsq).unwrap();
        let sym = solve_weights(&a, &y, SolverKind::LstsqSym)
            .unwrap()
            .readout(SolverKind::LstsqSym);
        assert_eq!(sym.offset, 0.5);
        for row in &a {
            let p = predict_linear(row, &plain.weights, None).unwrap();
            assert_abs_diff_eq!(sym.score(row, 1.0), (p + 1.0) / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn uni_normalises_rows() {
        let s = vec![vec![1.0, 1.0], vec![2.0, 6.0], vec![3.0, 1.0]];
        let kind = SolverKind::LstsqUni;
        assert_abs_diff_eq!(kind.row_scale(&s[1]), 0.125);
        let fit = solve_weights(&s, &[1.0, 0.0, 1.0], kind).unwrap();
        assert_eq!(fit.weights.len(), 2);
    }

    #[test]
    fn errors_on_bad_input() {
        assert!(solve_weights(&[], &[], SolverKind::Lstsq).is_err());
        assert!(solve_weights(&[vec![f64::NAN]], &[1.0], SolverKind::Lstsq).is_err());
        assert!(solve_weights(&[vec![1.0]], &[1.0, 2.0], SolverKind::Lstsq).is_err());
        assert!(solve_weights(&[vec![1.0]], &[1.0], SolverKind::Ridge { lambda: 0.0 }).is_err());
    }

    #[test]
    fn parses_solver_names() {
        assert_eq!("ridge".parse::<SolverKind>().unwrap(), SolverKind::ridge());
        assert_eq!(
            "ridge:0.25".parse::<SolverKind>().unwrap(),
            SolverKind::Ridge { lambda: 0.25 }
        );
        assert!("ridge:-1".parse::<SolverKind>().is_err());
        assert!("qr".parse::<SolverKind>().is_err());
    }
}
