//! Action embeddings from a randomized truncated SVD of the sparse
//! interaction matrix.
//!
//! Randomized range finding with subspace (power) iteration: sketch the
//! row space with a Gaussian test matrix, orthonormalize, alternate
//! A^T/A multiplications to sharpen the subspace, then solve the small
//! k x k eigenproblem of B B^T by cyclic Jacobi. The returned embedding
//! of action `a` is the singular-value-weighted right singular vector
//! row: beta_a = Sigma * V_a, which preserves the inner-product geometry
//! of the interaction matrix.

use slate_core::{EmbeddingMatrix, ItemSet, RngStream};

use crate::{ForgeError, Result};

/// Dense column-major matrix used only inside this module.
struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }
}

/// Modified Gram-Schmidt, run twice for stability. Columns that vanish
/// (rank deficiency) are zeroed rather than re-randomized so the result
/// stays deterministic.
fn orthonormalize(m: &mut Mat) {
    for _ in 0..2 {
        for j in 0..m.cols {
            for i in 0..j {
                let proj = slate_core::math::dot(m.col(i), m.col(j));
                let (head, tail) = m.data.split_at_mut(j * m.rows);
                let ci = &head[i * m.rows..(i + 1) * m.rows];
                let cj = &mut tail[..m.rows];
                for (x, y) in cj.iter_mut().zip(ci) {
                    *x -= proj * y;
                }
            }
            let norm = slate_core::math::norm(m.col(j));
            let cj = m.col_mut(j);
            if norm > 1e-12 {
                for x in cj {
                    *x /= norm;
                }
            } else {
                for x in cj {
                    *x = 0.0;
                }
            }
        }
    }
}

/// y = A x_block: rows are user item-sets, x is P x k, result U x k.
fn sparse_mul(rows: &[ItemSet], x: &Mat, out: &mut Mat) {
    debug_assert_eq!(out.rows, rows.len());
    debug_assert_eq!(out.cols, x.cols);
    for v in &mut out.data {
        *v = 0.0;
    }
    for j in 0..x.cols {
        let xc = x.col(j);
        let oc = out.col_mut(j);
        for (u, set) in rows.iter().enumerate() {
            let mut acc = 0.0;
            for a in set.iter() {
                acc += xc[a.index()];
            }
            oc[u] = acc;
        }
    }
}

/// z = A^T q: q is U x k, result P x k.
fn sparse_mul_transpose(rows: &[ItemSet], q: &Mat, out: &mut Mat) {
    debug_assert_eq!(out.cols, q.cols);
    for v in &mut out.data {
        *v = 0.0;
    }
    for j in 0..q.cols {
        let qc = q.col(j);
        let oc = out.col_mut(j);
        for (u, set) in rows.iter().enumerate() {
            let qu = qc[u];
            if qu != 0.0 {
                for a in set.iter() {
                    oc[a.index()] += qu;
                }
            }
        }
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric k x k matrix. Returns
/// eigenvalues in decreasing order with their eigenvectors as columns.
fn jacobi_eigen(mut a: Vec<f64>, k: usize) -> (Vec<f64>, Mat) {
    let mut v = Mat::zeros(k, k);
    for i in 0..k {
        v.data[i * k + i] = 1.0;
    }
    let idx = |r: usize, c: usize| c * k + r;
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..k {
            for q in p + 1..k {
                off += a[idx(p, q)] * a[idx(p, q)];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..k {
            for q in p + 1..k {
                let apq = a[idx(p, q)];
                if apq.abs() < 1e-30 {
                    continue;
                }
                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..k {
                    let arp = a[idx(r, p)];
                    let arq = a[idx(r, q)];
                    a[idx(r, p)] = c * arp - s * arq;
                    a[idx(r, q)] = s * arp + c * arq;
                }
                for r in 0..k {
                    let apr = a[idx(p, r)];
                    let aqr = a[idx(q, r)];
                    a[idx(p, r)] = c * apr - s * aqr;
                    a[idx(q, r)] = s * apr + c * aqr;
                }
                for r in 0..k {
                    let vrp = v.data[idx(r, p)];
                    let vrq = v.data[idx(r, q)];
                    v.data[idx(r, p)] = c * vrp - s * vrq;
                    v.data[idx(r, q)] = s * vrp + c * vrq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    let eigs: Vec<f64> = (0..k).map(|i| a[idx(i, i)]).collect();
    order.sort_by(|&x, &y| eigs[y].total_cmp(&eigs[x]));
    let sorted_eigs: Vec<f64> = order.iter().map(|&i| eigs[i]).collect();
    let mut sorted_v = Mat::zeros(k, k);
    for (dst, &src) in order.iter().enumerate() {
        sorted_v.col_mut(dst).copy_from_slice(v.col(src));
    }
    (sorted_eigs, sorted_v)
}

/// Truncated SVD embeddings plus the leading singular values. `rows` are
/// the interaction sets the factorization runs over (the observed halves
/// by default, or whole sessions), `num_actions` the catalog size.
pub fn truncated_svd(
    rows: &[ItemSet],
    num_actions: usize,
    dim: usize,
    iters: usize,
    seed: u64,
) -> Result<(EmbeddingMatrix, Vec<f64>)> {
    let num_users = rows.len();
    if dim == 0 || dim > num_users.min(num_actions) {
        return Err(ForgeError::Validation(format!(
            "embedding dim {dim} out of range for {num_users} users x {num_actions} actions"
        )));
    }
    let k = (dim + 16).min(num_users.min(num_actions));
    let mut rng = RngStream::new(seed);

    // Range sketch.
    let mut omega = Mat::zeros(num_actions, k);
    for v in &mut omega.data {
        *v = rng.standard_normal();
    }
    let mut q = Mat::zeros(num_users, k);
    sparse_mul(rows, &omega, &mut q);
    orthonormalize(&mut q);

    // Power iterations.
    let mut z = Mat::zeros(num_actions, k);
    for _ in 0..iters {
        sparse_mul_transpose(rows, &q, &mut z);
        orthonormalize(&mut z);
        sparse_mul(rows, &z, &mut q);
        orthonormalize(&mut q);
    }

    // B = Q^T A as a k x P block, stored transposed (P x k) for locality.
    let mut bt = Mat::zeros(num_actions, k);
    sparse_mul_transpose(rows, &q, &mut bt);

    // Gram matrix G = B B^T (k x k).
    let mut gram = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let g = slate_core::math::dot(bt.col(i), bt.col(j));
            gram[j * k + i] = g;
            gram[i * k + j] = g;
        }
    }
    let (eigs, w) = jacobi_eigen(gram, k);
    let singular: Vec<f64> = eigs.iter().take(dim).map(|&e| e.max(0.0).sqrt()).collect();

    // beta = (B^T W) truncated to `dim` columns, transposed into L x P
    // column-major: beta[l, a] = sum_j bt[a, j] * w[j, l].
    let mut data = vec![0.0; dim * num_actions];
    for l in 0..dim {
        let wl = w.col(l);
        for j in 0..k {
            let wj = wl[j];
            if wj != 0.0 {
                let bj = bt.col(j);
                for a in 0..num_actions {
                    data[a * dim + l] += bj[a] * wj;
                }
            }
        }
    }
    Ok((
        EmbeddingMatrix::from_column_major(dim, num_actions, data)?,
        singular,
    ))
}

/// The embedding matrix used by the policies: see [`truncated_svd`].
pub fn compute_svd_embeddings(
    rows: &[ItemSet],
    num_actions: usize,
    dim: usize,
    iters: usize,
    seed: u64,
) -> Result<EmbeddingMatrix> {
    truncated_svd(rows, num_actions, dim, iters, seed).map(|(beta, _)| beta)
}
