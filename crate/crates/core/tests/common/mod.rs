#![allow(dead_code)]

use collapse_lab::linalg::ComplexValue as C;

/// Minimum-cost matching of two equal-size multisets by brute force over
/// permutations; returns the largest pairwise distance in the best matching.
pub fn matched_distance(a: &[C], b: &[C]) -> f64 {
    assert_eq!(a.len(), b.len());
    if a.len() > 8 {
        return greedy_distance(a, b);
    }
    let mut idx: Vec<usize> = (0..b.len()).collect();
    let mut best = f64::INFINITY;
    permute(&mut idx, 0, &mut |p| {
        let d = a.iter().zip(p).map(|(x, &j)| (x - b[j]).norm()).fold(0.0, f64::max);
        best = best.min(d);
    });
    best
}

/// Greedy nearest matching; adequate when the sets are well separated.
pub fn greedy_distance(a: &[C], b: &[C]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

fn permute(idx: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == idx.len() {
        f(idx);
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute(idx, k + 1, f);
        idx.swap(k, i);
    }
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt().max(a.iter().map(|x| x * x).sum::<f64>().sqrt());
    if den == 0.0 {
        num
    } else {
        num / den
    }
}
