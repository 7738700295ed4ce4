use serde::{Deserialize, Serialize};

/// Tracks realised model sizes across repetitions so their mean approaches
/// `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightBudget {
    pub target: usize,
    pub achieved: Vec<usize>,
}

impl WeightBudget {
    pub fn new(target: usize) -> Self {
        WeightBudget {
            target,
            achieved: Vec::new(),
        }
    }

    /// Target for the next repetition: the nominal target minus the
    /// deviation accumulated so far.
    pub fn compensated(&self) -> i64 {
        let k = self.achieved.len() as i64;
        self.target as i64 * (k + 1) - self.achieved.iter().map(|&a| a as i64).sum::<i64>()
    }

    pub fn repetition(&self) -> usize {
        self.achieved.len()
    }

    pub fn record(&mut self, size: usize) {
        self.achieved.push(size);
    }

    pub fn running_mean(&self) -> f64 {
        if self.achieved.is_empty() {
            return f64::NAN;
        }
        self.achieved.iter().sum::<usize>() as f64 / self.achieved.len() as f64
    }
}

/// Weights of a one-hidden-layer network with biases.
pub fn mlp_size(hidden: usize, d: usize, n_out: usize) -> usize {
    hidden * (d + 1) + n_out * (hidden + 1)
}

/// Hidden units for a size target. `round_up` selects ceiling or floor of
/// `(target - n) / (d + n + 1)`; the result is at least 1.
pub fn hidden_units(target: i64, d: usize, n_out: usize, round_up: bool) -> (usize, bool) {
    let num = target - n_out as i64;
    let den = (d + n_out + 1) as i64;
    let h = if round_up {
        num.div_euclid(den) + i64::from(num.rem_euclid(den) != 0)
    } else {
        num.div_euclid(den)
    };
    if h < 1 {
        (1, true)
    } else {
        (h as usize, false)
    }
}

/// Hidden sizes chosen over `repetitions` when each repetition aims at the
/// compensated target, alternating ceiling and floor (ceiling first).
/// Returns the realised weight counts.
pub fn mlp_size_schedule(target: usize, d: usize, n_out: usize, repetitions: usize) -> Vec<usize> {
    let mut budget = WeightBudget::new(target);
    for k in 0..repetitions {
        let (h, _) = hidden_units(budget.compensated(), d, n_out, k % 2 == 0);
        budget.record(mlp_size(h, d, n_out));
    }
    budget.achieved
}
