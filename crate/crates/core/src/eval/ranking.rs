use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::experiment::RunResult;
use super::metrics::MetricKind;
use crate::error::{PolygridError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceMatrix {
    pub metric: MetricKind,
    pub models: Vec<String>,
    pub datasets: Vec<String>,
    /// `counts[a][b]`: datasets where `a`'s interval lies strictly on the
    /// better side of `b`'s.
    pub counts: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Echelon {
    pub leader: usize,
    /// Model indices, leader first.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchelonRanking {
    pub echelons: Vec<Echelon>,
    pub average_ranks: Vec<f64>,
}

/// Ranks with ties sharing the mean of their positions (1 is best).
pub fn average_ranks(values: &[f64], higher_is_better: bool) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let c = values[a].total_cmp(&values[b]);
        if higher_is_better {
            c.reverse()
        } else {
            c
        }
    });
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut k = i;
        while k + 1 < order.len() && values[order[k + 1]] == values[order[i]] {
            k += 1;
        }
        let r = (i + k) as f64 / 2.0 + 1.0;
        for &o in &order[i..=k] {
            ranks[o] = r;
        }
        i = k + 1;
    }
    ranks
}

/// Leader-hiring procedure: the free model with the best average rank
/// leads a new echelon, and every free model `j` with
/// `|A[lead][j] - A[j][lead]| <= 1` joins it.
pub fn echelons(counts: &[Vec<usize>], average_ranks: &[f64]) -> Vec<Echelon> {
    let k = average_ranks.len();
    let mut free: Vec<usize> = (0..k).collect();
    free.sort_by(|&a, &b| average_ranks[a].total_cmp(&average_ranks[b]).then(a.cmp(&b)));
    let mut out = Vec::new();
    while let Some(&leader) = free.first() {
        let mut members = vec![leader];
        free.retain(|&j| {
            if j == leader {
                return false;
            }
            let competitive = counts[leader][j].abs_diff(counts[j][leader]) <= 1;
            if competitive {
                members.push(j);
            }
            !competitive
        });
        out.push(Echelon { leader, members });
    }
    out
}

/// Builds the dominance matrix and echelon ranking for one metric. Models
/// and datasets are taken in order of first appearance.
pub fn dominance_and_echelons(results: &[RunResult], metric: MetricKind) -> Result<(DominanceMatrix, EchelonRanking)> {
    let rs: Vec<&RunResult> = results.iter().filter(|r| r.metric == metric).collect();
    let mut models: Vec<String> = Vec::new();
    let mut datasets: Vec<String> = Vec::new();
    for r in &rs {
        if !models.contains(&r.model) {
            models.push(r.model.clone());
        }
        if !datasets.contains(&r.dataset) {
            datasets.push(r.dataset.clone());
        }
    }
    if models.is_empty() {
        return Err(PolygridError::Empty(format!("no results for {metric}")));
    }
    let cell = |m: &str, d: &str| -> Result<&RunResult> {
        rs.iter()
            .find(|r| r.model == m && r.dataset == d)
            .copied()
            .ok_or_else(|| PolygridError::InvalidConfig(format!("missing result for {m} on {d} ({metric})")))
    };
    let k = models.len();
    let mut counts = vec![vec![0usize; k]; k];
    let mut rank_sum = vec![0.0; k];
    for d in &datasets {
        let cells: Vec<&RunResult> = models.iter().map(|m| cell(m, d)).collect::<Result<_>>()?;
        let means: Vec<f64> = cells.iter().map(|c| c.mean).collect();
        for (s, r) in rank_sum.iter_mut().zip(average_ranks(&means, metric.higher_is_better())) {
            *s += r;
        }
        for a in 0..k {
            for b in 0..k {
                if a != b && !cells[a].ci.overlaps(&cells[b].ci) && metric.better(cells[a].mean, cells[b].mean) {
                    counts[a][b] += 1;
                }
            }
        }
    }
    let average_ranks: Vec<f64> = rank_sum.iter().map(|s| s / datasets.len() as f64).collect();
    let ranking = EchelonRanking {
        echelons: echelons(&counts, &average_ranks),
        average_ranks,
    };
    Ok((
        DominanceMatrix {
            metric,
            models,
            datasets,
            counts,
        },
        ranking,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub metric: MetricKind,
    pub dominance: DominanceMatrix,
    pub ranking: EchelonRanking,
}

impl RankingReport {
    pub fn build(results: &[RunResult], metric: MetricKind) -> Result<Self> {
        let (dominance, ranking) = dominance_and_echelons(results, metric)?;
        Ok(RankingReport {
            metric,
            dominance,
            ranking,
        })
    }

    /// Plain-text listing: the dominance matrix, then one line per echelon
    /// with average ranks in parentheses.
    pub fn to_text(&self) -> String {
        let m = &self.dominance.models;
        let w = m.iter().map(String::len).max().unwrap_or(0).max(4);
        let mut s = format!("metric: {}\n{:w$}", self.metric, "");
        for name in m {
            s += &format!(" {name:>w$}");
        }
        s.push('\n');
        for (a, row) in self.dominance.counts.iter().enumerate() {
            s += &format!("{:w$}", m[a]);
            for c in row {
                s += &format!(" {c:>w$}");
            }
            s.push('\n');
        }
        for (e, ech) in self.ranking.echelons.iter().enumerate() {
            let names: Vec<String> = ech
                .members
                .iter()
                .map(|&j| format!("{} ({:.2})", m[j], self.ranking.average_ranks[j]))
                .collect();
            s += &format!("echelon {}: {}\n", e + 1, names.join(", "));
        }
        s
    }
}

pub fn write_results_csv<W: Write>(w: W, results: &[RunResult]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let err = |e: csv::Error| PolygridError::Io(e.to_string());
    out.write_record(["dataset", "model", "config", "metric", "ss", "mean", "lo", "hi", "alpha", "degenerate", "sample"])
        .map_err(err)?;
    for r in results {
        let sample: Vec<String> = r.sample.iter().map(|v| v.to_string()).collect();
        out.write_record([
            r.dataset.clone(),
            r.model.clone(),
            r.config.clone(),
            r.metric.to_string(),
            r.sample.len().to_string(),
            r.mean.to_string(),
            r.ci.lo.to_string(),
            r.ci.hi.to_string(),
            r.ci.alpha.to_string(),
            r.ci.degenerate.to_string(),
            sample.join(";"),
        ])
        .map_err(err)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a table written by [`write_results_csv`].
pub fn read_results_csv<R: Read>(r: R) -> Result<Vec<RunResult>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| PolygridError::Csv {
            line,
            reason: e.to_string(),
        })?;
        let bad = |what: &str| PolygridError::Csv {
            line,
            reason: format!("invalid {what}"),
        };
        let field = |k: usize| rec.get(k).ok_or_else(|| bad("row length"));
        let num = |k: usize, what: &str| -> Result<f64> { field(k)?.parse().map_err(|_| bad(what)) };
        let sample = field(10)?
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| bad("sample")))
            .collect::<Result<Vec<_>>>()?;
        out.push(RunResult {
            dataset: field(0)?.to_string(),
            model: field(1)?.to_string(),
            config: field(2)?.to_string(),
            metric: field(3)?.parse()?,
            mean: num(5, "mean")?,
            ci: super::experiment::ConfidenceInterval {
                lo: num(6, "lo")?,
                hi: num(7, "hi")?,
                alpha: num(8, "alpha")?,
                degenerate: field(9)? == "true",
            },
            sample,
        });
    }
    Ok(out)
}
