#![allow(dead_code)]

use nalgebra::DMatrix;

/// Cyclic Jacobi rotations; eigenvalues ascending.
pub fn jacobi_eigenvalues(mut a: DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    d.sort_by(f64::total_cmp);
    d
}

fn ln_choose(n: usize, k: usize) -> f64 {
    let lf = |x: usize| (1..=x).map(|i| (i as f64).ln()).sum::<f64>();
    lf(n) - lf(k) - lf(n - k)
}

/// Exact mean of a product of `q` spins when `n_up` of `n` spins are up,
/// uniformly over placements.
pub fn shell_parity_mean(n: usize, n_up: usize, q: usize) -> f64 {
    let n_down = n - n_up;
    (0..=q.min(n_down))
        .filter(|&d| q - d <= n_up)
        .map(|d| {
            let p = (ln_choose(n_down, d) + ln_choose(n_up, q - d) - ln_choose(n, q)).exp();
            if d % 2 == 0 { p } else { -p }
        })
        .sum()
}

/// Exact shell mean of the constraint energy for `n_logical` at constant strength `c`.
pub fn exact_shell_mean(n_logical: usize, n_up: usize, c: f64) -> f64 {
    let n_p = n_logical * (n_logical - 1) / 2;
    let n_c = n_p + 1 - n_logical;
    let three = n_logical - 2;
    -c * (three as f64 * shell_parity_mean(n_p, n_up, 3) + (n_c - three) as f64 * shell_parity_mean(n_p, n_up, 4))
}
