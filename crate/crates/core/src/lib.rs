//! Core algorithms for slate decision systems over large discrete action
//! catalogs.
//!
//! A slate is an ordered list of `K` distinct actions chosen from a catalog
//! of `P` actions, each embedded in a latent space of dimension `L`. The
//! deterministic decision rule scores every action by inner product with a
//! context embedding and keeps the top `K`. This crate provides:
//!
//! - the decision rule itself and the domain types around it ([`types`],
//!   [`decision`]),
//! - two stochastic relaxations used for policy-gradient training: the
//!   Plackett-Luce distribution over slates and latent-perturbation
//!   policies that add noise to the context embedding before the top-K
//!   ([`policy`]),
//! - score-function and smoothing gradient estimators with an exhaustive
//!   reference gradient and variance probes ([`gradients`]),
//! - exact and approximate (graph-based) maximum inner product search
//!   ([`mips`]),
//! - an exact rejection sampler for softmax categoricals driven by a
//!   top-K envelope ([`rejection`]),
//! - a counter-based splittable RNG so every stochastic routine is
//!   reproducible across runs, platforms and thread counts ([`rng`]),
//! - the Adam update rule used by the training loops ([`adam`]).
//!
//! The crate is `no_std` (with `alloc`); IO, file formats, dataset
//! handling and the CLI live in the companion `slate-forge` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod adam;
pub mod decision;
pub mod error;
pub mod gradients;
pub mod math;
pub mod mips;
pub mod policy;
pub mod rejection;
pub mod reward;
pub mod rng;
pub mod types;

pub use decision::{decide, mean_embedding};
pub use error::{Error, Result};
pub use reward::slate_reward;
pub use rng::RngStream;
pub use types::{ActionId, EmbeddingMatrix, ItemSet, LatentVector, PolicyParams, Slate};
