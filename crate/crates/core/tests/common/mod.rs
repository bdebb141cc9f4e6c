//! Independent reference computations used by the integration tests.
//!
//! Nothing here calls into the library's solvers; every value is obtained by
//! closed forms or brute force.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Closed-form capacity of the binary symmetric channel.
pub fn bsc_capacity(p: f64) -> f64 {
    1.0 - h2(p)
}

/// `I(X;Y)` in bits from the joint distribution, computed directly as
/// `Σ p(x,y) log p(x,y) / (p(x) p(y))`.
pub fn mutual_information_via_joint(input: &[f64], rows: &[Vec<f64>]) -> f64 {
    let n_out = rows[0].len();
    let mut py = vec![0.0; n_out];
    for (px, row) in input.iter().zip(rows) {
        for (y, q) in row.iter().enumerate() {
            py[y] += px * q;
        }
    }
    let mut mi = 0.0;
    for (px, row) in input.iter().zip(rows) {
        for (y, q) in row.iter().enumerate() {
            let joint = px * q;
            if joint > 0.0 {
                mi += joint * (joint / (px * py[y])).log2();
            }
        }
    }
    mi
}

/// `H(X) - H(X|Y)` computed through the posterior `p(x|y)`.
pub fn mutual_information_via_posterior(input: &[f64], rows: &[Vec<f64>]) -> f64 {
    let h = |p: &[f64]| -> f64 { -p.iter().filter(|&&v| v > 0.0).map(|v| v * v.log2()).sum::<f64>() };
    let n_out = rows[0].len();
    let mut h_x_given_y = 0.0;
    for y in 0..n_out {
        let py: f64 = input.iter().zip(rows).map(|(px, r)| px * r[y]).sum();
        if py <= 0.0 {
            continue;
        }
        let post: Vec<f64> = input.iter().zip(rows).map(|(px, r)| px * r[y] / py).collect();
        h_x_given_y += py * h(&post);
    }
    h(input) - h_x_given_y
}

/// Maximum mutual information over a grid of input distributions with the
/// given step, for channels with at most three inputs.
pub fn grid_search_capacity(rows: &[Vec<f64>], step: f64) -> f64 {
    let k = (1.0 / step).round() as usize;
    let mut best = 0.0f64;
    match rows.len() {
        1 => 0.0,
        2 => {
            for i in 0..=k {
                let a = i as f64 / k as f64;
                best = best.max(mutual_information_via_joint(&[a, 1.0 - a], rows));
            }
            best
        }
        3 => {
            for i in 0..=k {
                for j in 0..=(k - i) {
                    let a = i as f64 / k as f64;
                    let b = j as f64 / k as f64;
                    let c = (1.0 - a - b).max(0.0);
                    best = best.max(mutual_information_via_joint(&[a, b, c], rows));
                }
            }
            best
        }
        n => panic!("grid search supports at most 3 inputs, got {n}"),
    }
}

/// Random row-stochastic matrix; some entries are zeroed to exercise
/// sparse rows.
pub fn random_channel(rng: &mut impl Rng, n_in: usize, n_out: usize) -> Vec<Vec<f64>> {
    (0..n_in)
        .map(|_| {
            let mut row: Vec<f64> = (0..n_out)
                .map(|_| if rng.random::<f64>() < 0.2 { 0.0 } else { rng.random::<f64>() })
                .collect();
            if row.iter().all(|&v| v == 0.0) {
                row[rng.random_range(0..n_out)] = 1.0;
            }
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
            row
        })
        .collect()
}

/// `max Σ ½ log₂(1 + σ_i P_i)` over a grid of allocations with
/// `Σ P_i = P`, at most three channels. Returns `(capacity, allocation)`.
pub fn brute_force_water_filling(sigmas: &[f64], power: f64, step: f64) -> (f64, Vec<f64>) {
    let k = (1.0 / step).round() as usize;
    let obj = |alloc: &[f64]| -> f64 {
        sigmas.iter().zip(alloc).map(|(s, p)| 0.5 * (1.0 + s * p).log2()).sum()
    };
    let mut best = (f64::NEG_INFINITY, vec![]);
    let mut consider = |alloc: Vec<f64>| {
        let v = obj(&alloc);
        if v > best.0 {
            best = (v, alloc);
        }
    };
    match sigmas.len() {
        1 => consider(vec![power]),
        2 => {
            for i in 0..=k {
                let a = power * i as f64 / k as f64;
                consider(vec![a, power - a]);
            }
        }
        3 => {
            for i in 0..=k {
                for j in 0..=(k - i) {
                    let a = power * i as f64 / k as f64;
                    let b = power * j as f64 / k as f64;
                    consider(vec![a, b, (power - a - b).max(0.0)]);
                }
            }
        }
        n => panic!("brute force supports at most 3 channels, got {n}"),
    }
    best
}

/// Inverse of a 3×3 matrix by the adjugate formula.
pub fn inverse3(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let cof = [
        [c(1, 2, 1, 2), -c(1, 2, 0, 2), c(1, 2, 0, 1)],
        [-c(0, 2, 1, 2), c(0, 2, 0, 2), -c(0, 2, 0, 1)],
        [c(0, 1, 1, 2), -c(0, 1, 0, 2), c(0, 1, 0, 1)],
    ];
    let det: f64 = (0..3).map(|j| m[0][j] * cof[0][j]).sum();
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            inv[i][j] = cof[j][i] / det;
        }
    }
    inv
}

/// Singular values of the whitened 3×2 map `K^{-1/2} T`, as square roots of
/// the eigenvalues of `Tᵀ K⁻¹ T` (closed-form 2×2 eigenvalues).
pub fn whitened_singular_values_3x2(t: [[f64; 2]; 3], k: [[f64; 3]; 3]) -> [f64; 2] {
    let ki = inverse3(k);
    let mut m = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += t[i][a] * ki[i][j] * t[j][b];
                }
            }
            m[a][b] = s;
        }
    }
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    let l1 = tr / 2.0 + disc;
    let l2 = (tr / 2.0 - disc).max(0.0);
    [l1.sqrt(), l2.sqrt()]
}

/// Standard normal CDF via the error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + statrs::function::erf::erf(x / std::f64::consts::SQRT_2))
}

/// Discretizes isotropic Gaussian outcomes with the given means into a
/// channel over axis-aligned bins of width `bin` spanning `±half_width`
/// around the origin on each axis, plus overflow bins. Exact bin masses come
/// from products of normal CDF differences.
pub fn binned_gaussian_channel(means: &[Vec<f64>], std: f64, bin: f64, half_width: f64) -> Vec<Vec<f64>> {
    let dim = means[0].len();
    let n_bins = (2.0 * half_width / bin).round() as usize;
    let edges: Vec<f64> = (0..=n_bins).map(|i| -half_width + i as f64 * bin).collect();
    // per axis: masses of [-inf, e0), [e0, e1), ..., [e_last, inf)
    let axis_masses = |mu: f64| -> Vec<f64> {
        let cdf: Vec<f64> = edges.iter().map(|e| normal_cdf((e - mu) / std)).collect();
        let mut m = vec![cdf[0]];
        m.extend(cdf.windows(2).map(|w| w[1] - w[0]));
        m.push(1.0 - cdf[n_bins]);
        m
    };
    means
        .iter()
        .map(|mu| {
            let per_axis: Vec<Vec<f64>> = (0..dim).map(|d| axis_masses(mu[d])).collect();
            let mut row = vec![1.0];
            for masses in &per_axis {
                row = row.iter().flat_map(|r| masses.iter().map(move |m| r * m)).collect();
            }
            let s: f64 = row.iter().sum();
            row.iter().map(|v| v / s).collect()
        })
        .collect()
}

/// Unit-norm-column random orthogonal matrix by Gram-Schmidt on a random
/// Gaussian-ish matrix.
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        for c in &cols {
            let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    // row-major matrix whose columns are cols
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

/// Random stochastic model with the given sizes; rows are sparse-ish.
pub fn random_model(
    rng: &mut impl Rng,
    n_states: usize,
    n_actions: usize,
    n_sensors: usize,
) -> empowerment::empowerment::TransitionModel {
    let transitions = (0..n_states)
        .map(|_| random_channel(rng, n_actions, n_states))
        .collect();
    let sensor_map = (0..n_states).map(|_| rng.random_range(0..n_sensors)).collect();
    let actions = (0..n_actions).map(|a| format!("a{a}")).collect();
    empowerment::empowerment::TransitionModel::new(n_states, actions, sensor_map, transitions).unwrap()
}

/// Random deterministic model whose action 0 is a self-loop.
pub fn random_deterministic_with_stay(
    rng: &mut impl Rng,
    n_states: usize,
    n_actions: usize,
    n_sensors: usize,
) -> empowerment::empowerment::TransitionModel {
    let next = (0..n_states)
        .map(|s| {
            (0..n_actions)
                .map(|a| if a == 0 { s } else { rng.random_range(0..n_states) })
                .collect()
        })
        .collect();
    let sensor_map = (0..n_states).map(|_| rng.random_range(0..n_sensors)).collect();
    empowerment::empowerment::TransitionModel::deterministic(next, sensor_map).unwrap()
}

/// Random assignment of `n` states to contexts, relabeled so every context
/// id in `0..k` is used.
pub fn random_assignment(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let k = rng.random_range(1..=n);
    let raw: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    let mut map = std::collections::BTreeMap::new();
    raw.iter()
        .map(|r| {
            let next = map.len();
            *map.entry(*r).or_insert(next)
        })
        .collect()
}

/// Random permutation of `0..n`.
pub fn random_permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Random linear-Gaussian problem: `dim × dim` transform with entries in
/// `[-1, 1]`, coloured noise `B Bᵀ + 0.2 I` and power in `[0.5, 5]`.
pub fn random_linear_gaussian(
    rng: &mut impl Rng,
    dim: usize,
) -> (nalgebra::DMatrix<f64>, nalgebra::DMatrix<f64>, f64) {
    let t = nalgebra::DMatrix::from_fn(dim, dim, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let b = nalgebra::DMatrix::from_fn(dim, dim, |_, _| rng.random::<f64>() - 0.5);
    let k = &b * b.transpose() + nalgebra::DMatrix::identity(dim, dim) * 0.2;
    let power = 0.5 + 4.5 * rng.random::<f64>();
    (t, k, power)
}

/// Discrete input grid on the principal axes of a whitened transform:
/// three equiprobable levels `{-x, 0, x}` with `x = √(1.5 P_i)` per axis
/// carrying power `P_i > 0`, so each axis gets variance `P_i`. Returns the
/// outcome means `T_w a` for every grid point.
pub fn principal_axis_means(white: &nalgebra::DMatrix<f64>, allocations_by_axis: &[f64]) -> Vec<Vec<f64>> {
    let svd = white.clone().svd(true, true);
    let v_t = svd.v_t.expect("right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let axes: Vec<(nalgebra::DVector<f64>, f64)> = order
        .iter()
        .zip(allocations_by_axis)
        .filter(|(_, p)| **p > 0.0)
        .map(|(&i, &p)| (v_t.row(i).transpose(), (1.5 * p).sqrt()))
        .collect();
    let mut points = vec![nalgebra::DVector::zeros(white.ncols())];
    for (axis, x) in &axes {
        points = points
            .iter()
            .flat_map(|a| [-1.0, 0.0, 1.0].map(|c| a + axis * (c * x)))
            .collect();
    }
    points.iter().map(|a| (white * a).iter().copied().collect()).collect()
}
