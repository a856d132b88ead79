//! Domain types: actions, slates, embeddings and policy parameters.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math;
use crate::rng::RngStream;

/// Index of an action in a catalog of size `P`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(pub u32);

impl ActionId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u32> for ActionId {
    fn from(v: u32) -> Self {
        ActionId(v)
    }
}

/// An ordered list of `K >= 1` distinct actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slate {
    items: Vec<ActionId>,
}

impl Slate {
    /// Validates distinctness and non-emptiness.
    pub fn new(items: Vec<ActionId>) -> Result<Self> {
        if items.is_empty() {
            return Err(invalid("slate must contain at least one action"));
        }
        // K is small; quadratic scan avoids allocating.
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                if items[i] == items[j] {
                    return Err(invalid(alloc::format!(
                        "duplicate action {} in slate",
                        items[i].0
                    )));
                }
            }
        }
        Ok(Slate { items })
    }

    /// Caller guarantees distinctness; checked in debug builds only.
    pub(crate) fn from_distinct_unchecked(items: Vec<ActionId>) -> Self {
        debug_assert!(Slate::new(items.clone()).is_ok());
        Slate { items }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.items.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn items(&self) -> &[ActionId] {
        &self.items
    }

    /// Recovers the backing buffer (for reuse in sampling loops).
    #[inline]
    pub fn into_items(self) -> Vec<ActionId> {
        self.items
    }

    #[inline]
    pub fn contains(&self, a: ActionId) -> bool {
        self.items.contains(&a)
    }
}

impl core::ops::Index<usize> for Slate {
    type Output = ActionId;
    fn index(&self, i: usize) -> &ActionId {
        &self.items[i]
    }
}

/// A sorted, deduplicated set of actions (observed or hidden interactions
/// of one user).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ItemSet {
    ids: Vec<ActionId>,
}

impl ItemSet {
    pub fn new(mut ids: Vec<ActionId>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        ItemSet { ids }
    }

    pub fn contains(&self, a: ActionId) -> bool {
        self.ids.binary_search(&a).is_ok()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ActionId> + '_ {
        self.ids.iter().copied()
    }

    pub fn as_slice(&self) -> &[ActionId] {
        &self.ids
    }
}

impl FromIterator<ActionId> for ItemSet {
    fn from_iter<T: IntoIterator<Item = ActionId>>(iter: T) -> Self {
        ItemSet::new(iter.into_iter().collect())
    }
}

impl FromIterator<u32> for ItemSet {
    fn from_iter<T: IntoIterator<Item = u32>>(iter: T) -> Self {
        ItemSet::new(iter.into_iter().map(ActionId).collect())
    }
}

/// A vector in the latent space of dimension `L`. Entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentVector {
    values: Vec<f64>,
}

impl LatentVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("latent vector"));
        }
        Ok(LatentVector { values })
    }

    pub fn zeros(l: usize) -> Self {
        LatentVector {
            values: vec![0.0; l],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        LatentVector { values }
    }
}

/// The fixed action-embedding matrix: `L` rows by `P` columns, stored
/// column-major so one action's embedding is contiguous. Per-action
/// Euclidean norms are cached at construction.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    l: usize,
    p: usize,
    data: Vec<f64>,
    norms: Vec<f64>,
}

impl EmbeddingMatrix {
    /// `data` is column-major: entry `(row, action)` at `action * l + row`.
    pub fn from_column_major(l: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if l == 0 || p == 0 {
            return Err(invalid("embedding matrix needs L >= 1 and P >= 1"));
        }
        if data.len() != l * p {
            return Err(Error::DimensionMismatch {
                expected: l * p,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embedding matrix"));
        }
        let norms = (0..p)
            .map(|a| math::norm(&data[a * l..(a + 1) * l]))
            .collect();
        Ok(EmbeddingMatrix { l, p, data, norms })
    }

    /// Standard-Gaussian embeddings scaled by `scale`, for synthetic
    /// catalogs and tests.
    pub fn gaussian(l: usize, p: usize, scale: f64, rng: &mut RngStream) -> Result<Self> {
        if !scale.is_finite() || scale <= 0.0 {
            return Err(invalid("scale must be positive and finite"));
        }
        let mut data = vec![0.0; l * p];
        for v in &mut data {
            *v = scale * rng.standard_normal();
        }
        EmbeddingMatrix::from_column_major(l, p, data)
    }

    /// Embedding dimension `L`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.l
    }

    /// Catalog size `P`.
    #[inline]
    pub fn num_actions(&self) -> usize {
        self.p
    }

    /// The embedding of one action.
    #[inline]
    pub fn embedding(&self, a: ActionId) -> &[f64] {
        let i = a.index();
        &self.data[i * self.l..(i + 1) * self.l]
    }

    /// Cached Euclidean norm of one action's embedding.
    #[inline]
    pub fn norm(&self, a: ActionId) -> f64 {
        self.norms[a.index()]
    }

    /// Mean of the per-action embedding norms (the `B` in the 1/B noise
    /// scale heuristic).
    pub fn mean_norm(&self) -> f64 {
        math::pairwise_sum(&self.norms) / self.p as f64
    }

    /// Inner product of a query with one action's embedding.
    #[inline]
    pub fn score(&self, query: &[f64], a: ActionId) -> f64 {
        math::dot(query, self.embedding(a))
    }

    /// Scores of a query against every action, into a caller buffer.
    pub fn scores_into(&self, query: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(query.len(), self.l);
        out.clear();
        out.reserve(self.p);
        for a in 0..self.p {
            out.push(math::dot(query, &self.data[a * self.l..(a + 1) * self.l]));
        }
    }

    pub fn scores(&self, query: &[f64]) -> Vec<f64> {
        let mut out = Vec::new();
        self.scores_into(query, &mut out);
        out
    }

    /// Rebuilds the norm cache after external mutation of the columns
    /// (used by the embedding-learning study only).
    pub fn refresh_norms(&mut self) {
        for a in 0..self.p {
            self.norms[a] = math::norm(&self.data[a * self.l..(a + 1) * self.l]);
        }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Shape of the policy's context-embedding map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamShape {
    /// h(m) = m theta, theta an L x L matrix.
    Linear { dim: usize },
    /// h(m) = sigmoid(m theta1) theta2, both L x L.
    TwoLayer { dim: usize },
}

impl ParamShape {
    pub fn dim(self) -> usize {
        match self {
            ParamShape::Linear { dim } | ParamShape::TwoLayer { dim } => dim,
        }
    }

    /// Number of scalar parameters.
    pub fn param_len(self) -> usize {
        match self {
            ParamShape::Linear { dim } => dim * dim,
            ParamShape::TwoLayer { dim } => 2 * dim * dim,
        }
    }
}

/// Policy parameters: a linear or two-layer map from the mean embedding
/// to the context embedding. Matrices are row-major, so entry `(i, j)`
/// (input row i, output column j) sits at `i * L + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    shape: ParamShape,
    values: Vec<f64>,
}

impl PolicyParams {
    pub fn linear(dim: usize, theta: Vec<f64>) -> Result<Self> {
        PolicyParams::from_flat(ParamShape::Linear { dim }, theta)
    }

    pub fn two_layer(dim: usize, theta1: Vec<f64>, theta2: Vec<f64>) -> Result<Self> {
        let mut values = theta1;
        values.extend_from_slice(&theta2);
        PolicyParams::from_flat(ParamShape::TwoLayer { dim }, values)
    }

    pub fn from_flat(shape: ParamShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.param_len() {
            return Err(Error::DimensionMismatch {
                expected: shape.param_len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("policy parameters"));
        }
        Ok(PolicyParams { shape, values })
    }

    /// Identity map scaled by `s` (both layers for the two-layer shape).
    pub fn scaled_identity(shape: ParamShape, s: f64) -> Self {
        let dim = shape.dim();
        let mut values = vec![0.0; shape.param_len()];
        for block in 0..shape.param_len() / (dim * dim) {
            for i in 0..dim {
                values[block * dim * dim + i * dim + i] = s;
            }
        }
        PolicyParams { shape, values }
    }

    #[inline]
    pub fn shape(&self) -> ParamShape {
        self.shape
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    #[inline]
    pub fn param_len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn flat(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    fn layer(&self, which: usize) -> &[f64] {
        let n = self.dim() * self.dim();
        &self.values[which * n..(which + 1) * n]
    }

    /// The context embedding h(m). Errors if `m` has the wrong length.
    pub fn context_embedding(&self, m: &LatentVector) -> Result<LatentVector> {
        let l = self.dim();
        if m.len() != l {
            return Err(Error::DimensionMismatch {
                expected: l,
                got: m.len(),
            });
        }
        let m = m.as_slice();
        let h = match self.shape {
            ParamShape::Linear { .. } => mat_vec_left(m, self.layer(0), l),
            ParamShape::TwoLayer { .. } => {
                let mut u = mat_vec_left(m, self.layer(0), l);
                for v in &mut u {
                    *v = math::sigmoid(*v);
                }
                mat_vec_left(&u, self.layer(1), l)
            }
        };
        Ok(LatentVector::from_raw(h))
    }

    /// Reverse-mode pass: accumulates `scale * d(g_h . h(m))/d(params)`
    /// into `out`, a flat gradient of length `param_len()`. For the linear
    /// shape this is the outer product `m (x) g_h`; the two-layer shape
    /// chains through the sigmoid.
    pub fn accumulate_param_grad(&self, m: &[f64], g_h: &[f64], scale: f64, out: &mut [f64]) {
        let l = self.dim();
        debug_assert_eq!(m.len(), l);
        debug_assert_eq!(g_h.len(), l);
        debug_assert_eq!(out.len(), self.param_len());
        match self.shape {
            ParamShape::Linear { .. } => {
                for i in 0..l {
                    let mi = scale * m[i];
                    let row = &mut out[i * l..(i + 1) * l];
                    for (o, g) in row.iter_mut().zip(g_h) {
                        *o += mi * g;
                    }
                }
            }
            ParamShape::TwoLayer { .. } => {
                // Forward again: u = m theta1, s = sigmoid(u).
                let u = mat_vec_left(m, self.layer(0), l);
                let s: Vec<f64> = u.iter().map(|&x| math::sigmoid(x)).collect();
                // d/d theta2 = s (x) g_h.
                let n = l * l;
                for i in 0..l {
                    let si = scale * s[i];
                    let row = &mut out[n + i * l..n + (i + 1) * l];
                    for (o, g) in row.iter_mut().zip(g_h) {
                        *o += si * g;
                    }
                }
                // g_s = theta2 g_h, g_u = g_s * s(1-s), d/d theta1 = m (x) g_u.
                let theta2 = self.layer(1);
                let mut g_u = vec![0.0; l];
                for i in 0..l {
                    let g_si = math::dot(&theta2[i * l..(i + 1) * l], g_h);
                    g_u[i] = g_si * s[i] * (1.0 - s[i]);
                }
                for i in 0..l {
                    let mi = scale * m[i];
                    let row = &mut out[i * l..(i + 1) * l];
                    for (o, g) in row.iter_mut().zip(&g_u) {
                        *o += mi * g;
                    }
                }
            }
        }
    }
}

/// Row-vector times matrix: out_j = sum_i v_i M[i, j], M row-major L x L.
fn mat_vec_left(v: &[f64], m: &[f64], l: usize) -> Vec<f64> {
    let mut out = vec![0.0; l];
    for i in 0..l {
        let vi = v[i];
        if vi != 0.0 {
            let row = &m[i * l..(i + 1) * l];
            for (o, w) in out.iter_mut().zip(row) {
                *o += vi * w;
            }
        }
    }
    out
}
