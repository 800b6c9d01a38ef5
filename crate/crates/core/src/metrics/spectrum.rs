//! Largest-magnitude adjacency eigenvalues.
//!
//! Small graphs use a dense symmetric eigensolver. Larger ones run Lanczos
//! with full reorthogonalization: every new Krylov vector is orthogonalized
//! (twice) against the whole basis, so no spurious Ritz copies appear. When
//! the Krylov space becomes invariant the iteration restarts from a fresh
//! vector orthogonal to the basis, which also recovers repeated eigenvalues
//! of invariant subspaces (e.g. `−1` in `K_n`).

use log::debug;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sampling::rng_from_seed;

pub const SPECTRUM_COUNT: usize = 20;

const DENSE_LIMIT: usize = 300;
const MAX_KRYLOV: usize = 600;
const RESIDUAL_TOL: f64 = 1e-6;

fn by_magnitude(values: &mut [f64]) {
    values.sort_by(|a, b| b.abs().total_cmp(&a.abs()).then(b.total_cmp(a)));
}

fn dense(g: &Graph, count: usize) -> Vec<f64> {
    let n = g.node_count();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (u, v) in g.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    by_magnitude(&mut ev);
    ev.truncate(count);
    ev
}

fn matvec(g: &Graph, x: &[f64], y: &mut [f64]) {
    for (v, out) in y.iter_mut().enumerate() {
        *out = g.neighbors(v).iter().map(|&w| x[w]).sum();
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(w, q);
            for (a, b) in w.iter_mut().zip(q) {
                *a -= c * b;
            }
        }
    }
}

fn normalize(w: &mut [f64]) -> f64 {
    let norm = dot(w, w).sqrt();
    if norm > 0.0 {
        w.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

struct Ritz {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

/// Top-`count` Ritz pairs of the tridiagonal `T` lifted back through `V`.
fn ritz(alpha: &[f64], beta: &[f64], basis: &[Vec<f64>], count: usize) -> Ritz {
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (eig.eigenvalues[a], eig.eigenvalues[b]);
        y.abs().total_cmp(&x.abs()).then(y.total_cmp(&x))
    });
    order.truncate(count);
    let n = basis[0].len();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut y = vec![0.0; n];
            for (j, q) in basis.iter().take(k).enumerate() {
                let s = eig.eigenvectors[(j, i)];
                for (a, b) in y.iter_mut().zip(q) {
                    *a += s * b;
                }
            }
            y
        })
        .collect();
    Ritz {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors,
    }
}

fn lanczos(g: &Graph, count: usize) -> Result<Vec<f64>> {
    let n = g.node_count();
    let limit = n.min(MAX_KRYLOV);
    let mut rng = rng_from_seed(0x1a2c_2b05);
    let mut fresh = |basis: &[Vec<f64>]| -> Option<Vec<f64>> {
        for _ in 0..4 {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
            orthogonalize(&mut v, basis);
            if normalize(&mut v) > 1e-8 {
                return Some(v);
            }
        }
        None
    };
    let mut basis: Vec<Vec<f64>> = vec![fresh(&[]).expect("nonempty graph")];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut converged = 0;
    loop {
        let j = alpha.len();
        matvec(g, &basis[j], &mut w);
        alpha.push(dot(&w, &basis[j]));
        orthogonalize(&mut w, &basis);
        let b = normalize(&mut w);
        let full = basis.len() >= limit;
        let check = full || (j + 1 >= 2 * count && (j + 1).is_multiple_of(20));
        if check {
            let r = ritz(&alpha, &beta, &basis, count);
            let mut av = vec![0.0; n];
            converged = 0;
            for (theta, y) in r.values.iter().zip(&r.vectors) {
                matvec(g, y, &mut av);
                let res: f64 = av.iter().zip(y).map(|(a, b)| (a - theta * b).powi(2)).sum::<f64>().sqrt();
                if res <= RESIDUAL_TOL * theta.abs().max(1.0) {
                    converged += 1;
                }
            }
            if converged == r.values.len() && r.values.len() == count {
                debug!("lanczos: {count} eigenvalues after {} steps", j + 1);
                return Ok(r.values);
            }
        }
        if full {
            break;
        }
        if b > 1e-10 {
            beta.push(b);
            basis.push(w.clone());
        } else {
            // Invariant subspace: continue from an orthogonal fresh vector.
            match fresh(&basis) {
                Some(v) => {
                    beta.push(0.0);
                    basis.push(v);
                }
                None => break,
            }
        }
    }
    Err(Error::NotConverged {
        converged,
        requested: count,
    })
}

/// The `count` largest-magnitude adjacency eigenvalues (fewer if the graph
/// has fewer nodes), sorted by decreasing magnitude.
pub fn spectrum_top(g: &Graph, count: usize) -> Result<Vec<f64>> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Input("spectrum of an empty graph".into()));
    }
    let count = count.min(n);
    if n <= DENSE_LIMIT || count * 3 >= n {
        return Ok(dense(g, count));
    }
    lanczos(g, count)
}
