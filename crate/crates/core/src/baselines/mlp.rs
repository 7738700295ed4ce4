use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub init_range: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            learning_rate: 0.1,
            epochs: 2000,
            init_range: 0.5,
        }
    }
}

/// One sigmoid hidden layer, linear outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    /// `hidden x (d + 1)`, bias last.
    pub hidden: Vec<Vec<f64>>,
    /// `outputs x (hidden + 1)`, bias last.
    pub output: Vec<Vec<f64>>,
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

impl Mlp {
    fn forward(&self, row: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let a: Vec<f64> = self
            .hidden
            .iter()
            .map(|w| {
                let d = row.len();
                sigmoid(row.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() + w[d])
            })
            .collect();
        let h = a.len();
        let out = self
            .output
            .iter()
            .map(|w| a.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() + w[h])
            .collect();
        (a, out)
    }

    pub fn predict(&self, row: &[f64]) -> Vec<f64> {
        self.forward(row).1
    }

    pub fn n_weights(&self) -> usize {
        self.hidden.iter().map(Vec::len).sum::<usize>() + self.output.iter().map(Vec::len).sum::<usize>()
    }

    /// Full-batch gradient descent on mean squared error.
    pub fn train(x: &[Vec<f64>], y: &[Vec<f64>], hidden: usize, params: &MlpParams, seed: u64) -> Mlp {
        let d = x[0].len();
        let k = y[0].len();
        let m = x.len() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = params.init_range;
        let mut init = |len: usize| -> Vec<f64> { (0..len).map(|_| rng.random_range(-r..=r)).collect() };
        let mut net = Mlp {
            hidden: (0..hidden).map(|_| init(d + 1)).collect(),
            output: (0..k).map(|_| init(hidden + 1)).collect(),
        };
        for _ in 0..params.epochs {
            let mut g_hidden = vec![vec![0.0; d + 1]; hidden];
            let mut g_output = vec![vec![0.0; hidden + 1]; k];
            for (row, target) in x.iter().zip(y) {
                let (a, out) = net.forward(row);
                let delta_out: Vec<f64> = out.iter().zip(target).map(|(o, t)| 2.0 * (o - t)).collect();
                for (j, dj) in delta_out.iter().enumerate() {
                    for (q, aq) in a.iter().enumerate() {
                        g_output[j][q] += dj * aq;
                    }
                    g_output[j][hidden] += dj;
                }
                for q in 0..hidden {
                    let back: f64 = delta_out.iter().enumerate().map(|(j, dj)| dj * net.output[j][q]).sum();
                    let dq = back * a[q] * (1.0 - a[q]);
                    for (p, xp) in row.iter().enumerate() {
                        g_hidden[q][p] += dq * xp;
                    }
                    g_hidden[q][d] += dq;
                }
            }
            let step = params.learning_rate / m;
            for (w, g) in net.hidden.iter_mut().zip(&g_hidden) {
                w.iter_mut().zip(g).for_each(|(w, g)| *w -= step * g);
            }
            for (w, g) in net.output.iter_mut().zip(&g_output) {
                w.iter_mut().zip(g).for_each(|(w, g)| *w -= step * g);
            }
        }
        net
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn learns_a_threshold() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 / 40.0]).collect();
        let y: Vec<Vec<f64>> = x.iter().map(|r| vec![if r[0] > 0.5 { 1.0 } else { 0.0 }]).collect();
        let net = Mlp::train(&x, &y, 3, &MlpParams::default(), 1);
        assert_eq!(net.n_weights(), 3 * 2 + 4);
        let acc = x
            .iter()
            .zip(&y)
            .filter(|(r, t)| (net.predict(r)[0] >= 0.5) == (t[0] == 1.0))
            .count();
        assert!(acc >= 34, "{acc}");
    }
}
