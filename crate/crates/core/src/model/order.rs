use crate::model::config::VertexOrder;
use crate::stats::{columns, mean, pearson, variance};

/// All cyclic arrangements of `0..d` up to rotation and reflection, each
/// starting at 0 with `a[1] < a[d-1]`, in lexicographic order.
pub fn cyclic_arrangements(d: usize) -> Vec<Vec<usize>> {
    if d < 3 {
        return vec![(0..d).collect()];
    }
    let mut out = Vec::new();
    let mut rest: Vec<usize> = (1..d).collect();
    permute(&mut rest, 0, &mut |p| {
        if p[0] < p[p.len() - 1] {
            let mut a = Vec::with_capacity(d);
            a.push(0);
            a.extend_from_slice(p);
            out.push(a);
        }
    });
    out.sort();
    out
}

fn permute(v: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        visit(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, visit);
        v.swap(k, i);
    }
}

/// Rotation/reflection canonical form of a cyclic arrangement.
pub fn canonical_cycle(a: &[usize]) -> Vec<usize> {
    let d = a.len();
    let start = a.iter().position(|&v| v == 0).unwrap_or(0);
    let fwd: Vec<usize> = (0..d).map(|i| a[(start + i) % d]).collect();
    let back: Vec<usize> = (0..d).map(|i| a[(start + d - i) % d]).collect();
    fwd.min(back)
}

fn cycle_score(a: &[usize], corr: &[Vec<f64>]) -> f64 {
    let d = a.len();
    (0..d).map(|k| corr[a[k]][a[(k + 1) % d]]).sum()
}

const EXHAUSTIVE_LIMIT: usize = 6;

fn rho_order(cols: &[Vec<f64>]) -> Vec<usize> {
    let d = cols.len();
    let corr: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| pearson(&cols[i], &cols[j])).collect())
        .collect();
    if d <= EXHAUSTIVE_LIMIT {
        let mut best: Option<(f64, Vec<usize>)> = None;
        for a in cyclic_arrangements(d) {
            let s = cycle_score(&a, &corr);
            if best.as_ref().is_none_or(|(b, _)| s > *b + 1e-12) {
                best = Some((s, a));
            }
        }
        return best.map(|(_, a)| a).unwrap_or_default();
    }
    let mut used = vec![false; d];
    let mut a = vec![0];
    used[0] = true;
    while a.len() < d {
        let last = *a.last().unwrap();
        let next = (0..d)
            .filter(|&j| !used[j])
            .max_by(|&i, &j| corr[last][i].total_cmp(&corr[last][j]).then(j.cmp(&i)))
            .unwrap();
        used[next] = true;
        a.push(next);
    }
    canonical_cycle(&a)
}

fn descending_by(keys: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]).then(a.cmp(&b)));
    idx
}

/// Permutation `p` such that vertex `k` displays domain `p[k]`.
pub fn order_vertices(x: &[Vec<f64>], vorder: VertexOrder) -> Vec<usize> {
    let cols = columns(x);
    let d = cols.len();
    match vorder {
        VertexOrder::Original => (0..d).collect(),
        VertexOrder::Averages => descending_by(&cols.iter().map(|c| mean(c)).collect::<Vec<_>>()),
        VertexOrder::Measures => {
            descending_by(&cols.iter().map(|c| variance(c)).collect::<Vec<_>>())
        }
        VertexOrder::Rho => rho_order(&cols),
    }
}

pub fn reorder_row(row: &[f64], order: &[usize]) -> Vec<f64> {
    order.iter().map(|&k| row[k]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arrangement_counts() {
        assert_eq!(cyclic_arrangements(3).len(), 1);
        assert_eq!(cyclic_arrangements(4).len(), 3);
        assert_eq!(cyclic_arrangements(5).len(), 12);
        assert_eq!(cyclic_arrangements(6).len(), 60);
        assert_eq!(
            cyclic_arrangements(4),
            vec![vec![0, 1, 2, 3], vec![0, 1, 3, 2], vec![0, 2, 1, 3]]
        );
    }

    #[test]
    fn canonical_form_handles_rotation_and_reflection() {
        assert_eq!(canonical_cycle(&[2, 3, 0, 1]), vec![0, 1, 2, 3]);
        assert_eq!(canonical_cycle(&[3, 2, 1, 0]), vec![0, 1, 2, 3]);
    }

    #[test]
    fn original_and_ties() {
        let x = vec![vec![0.5, 0.5, 0.2], vec![0.7, 0.7, 0.1]];
        assert_eq!(order_vertices(&x, VertexOrder::Original), vec![0, 1, 2]);
        assert_eq!(order_vertices(&x, VertexOrder::Averages), vec![0, 1, 2]);
        let x = vec![vec![0.1, 0.9, 0.5], vec![0.2, 0.8, 0.6]];
        assert_eq!(order_vertices(&x, VertexOrder::Averages), vec![1, 2, 0]);
    }

    #[test]
    fn measures_sorts_by_variance() {
        let x = vec![vec![0.5, 0.1, 0.4], vec![0.5, 0.9, 0.6]];
        assert_eq!(order_vertices(&x, VertexOrder::Measures), vec![1, 2, 0]);
    }
}
