// Independent oracles shared by the integration tests. Nothing here calls
// into the code under test except to build inputs.
#![allow(dead_code)]

use rand::Rng as _;
use trf_core::rng::{substream, Rng};
use trf_core::{TemporalDigraph, UserId};

pub fn rng(seed: u64) -> Rng {
    substream(seed, "tests")
}

/// Random digraph on users `0..n`; each ordered pair is an edge with
/// probability `p`, created at an integer time in `0..10`.
pub fn random_graph(rng: &mut Rng, n: u32, p: f64) -> (TemporalDigraph, Vec<(u32, u32, f64)>) {
    let mut g = TemporalDigraph::new();
    let mut edges = Vec::new();
    for u in 0..n {
        g.add_user(UserId(u));
    }
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.random_bool(p) {
                let t = rng.random_range(0..10) as f64;
                g.add_follow(UserId(a), UserId(b), t).unwrap();
                edges.push((a, b, t));
            }
        }
    }
    (g, edges)
}

pub fn graph_from(n: u32, edges: &[(u32, u32)]) -> TemporalDigraph {
    let mut g = TemporalDigraph::new();
    for u in 0..n {
        g.add_user(UserId(u));
    }
    for &(a, b) in edges {
        g.add_follow(UserId(a), UserId(b), 0.0).unwrap();
    }
    g
}

/// Floyd–Warshall transitive closure: `r[a][b]` iff a path of length >= 1
/// leads from `a` to `b`.
pub fn reach_matrix(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for (a, b) in edges {
        r[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

/// Mutual-reachability classes, labelled by their smallest member.
pub fn brute_components(r: &[Vec<bool>]) -> Vec<usize> {
    let n = r.len();
    (0..n)
        .map(|i| (0..n).find(|&j| j == i || (r[i][j] && r[j][i])).unwrap())
        .collect()
}

/// True when two labellings induce the same partition.
pub fn same_partition(a: &[u32], b: &[usize]) -> bool {
    a.len() == b.len()
        && (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn logit_loglik(x: &[Vec<f64>], y: &[bool], beta: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(row, &yi)| {
            let z = beta[0] + row.iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>();
            // log sigmoid(z) and log(1 - sigmoid(z)) without cancellation
            let log1pexp = |v: f64| if v > 0.0 { v + (-v).exp().ln_1p() } else { v.exp().ln_1p() };
            if yi { -log1pexp(-z) } else { -log1pexp(z) }
        })
        .sum()
}

/// Gaussian elimination with partial pivoting.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    for c in 0..k {
        let piv = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..k {
            let f = a[r][c] / a[c][c];
            for j in c..k {
                a[r][j] -= f * a[c][j];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; k];
    for c in (0..k).rev() {
        let s: f64 = (c + 1..k).map(|j| a[c][j] * x[j]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    Some(x)
}

/// Brute-force logistic maximum likelihood: a coarse grid over the
/// intercept and one slope picks the start, then damped Newton steps with
/// backtracking polish to machine precision.
pub fn brute_logit(x: &[Vec<f64>], y: &[bool]) -> Vec<f64> {
    let k = x[0].len() + 1;
    let mut beta = vec![0.0; k];
    let mut best = logit_loglik(x, y, &beta);
    for i in -20..=20 {
        for j in -20..=20 {
            let mut b = vec![0.0; k];
            b[0] = i as f64 * 0.25;
            if k > 1 {
                b[1] = j as f64 * 0.25;
            }
            let ll = logit_loglik(x, y, &b);
            if ll > best {
                best = ll;
                beta = b;
            }
        }
    }
    for _ in 0..500 {
        let mut grad = vec![0.0; k];
        let mut hess = vec![vec![0.0; k]; k];
        for (row, &yi) in x.iter().zip(y) {
            let mut v = Vec::with_capacity(k);
            v.push(1.0);
            v.extend_from_slice(row);
            let z: f64 = v.iter().zip(&beta).map(|(a, b)| a * b).sum();
            let m = sigmoid(z);
            let w = m * (1.0 - m);
            for a in 0..k {
                grad[a] += (f64::from(u8::from(yi)) - m) * v[a];
                for b in 0..k {
                    hess[a][b] += w * v[a] * v[b];
                }
            }
        }
        let Some(step) = gauss_solve(hess, grad) else { break };
        let ll0 = logit_loglik(x, y, &beta);
        let mut s = 1.0;
        let mut moved = false;
        while s > 1e-10 {
            let cand: Vec<f64> = beta.iter().zip(&step).map(|(b, d)| b + s * d).collect();
            if logit_loglik(x, y, &cand) >= ll0 {
                moved = cand != beta;
                beta = cand;
                break;
            }
            s *= 0.5;
        }
        if !moved || step.iter().all(|d| d.abs() < 1e-15) {
            break;
        }
    }
    beta
}
