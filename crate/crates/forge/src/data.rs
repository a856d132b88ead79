//! Interaction datasets: CSV ingestion, synthetic generation and the
//! observed/hidden session split.
//!
//! The interaction file is UTF-8 CSV with the header `user_id,item_id`
//! and one unsigned integer pair per line. User and action counts are
//! inferred from the largest ids present.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use slate_core::math::sigmoid;
use slate_core::{ActionId, ItemSet, RngStream};

use crate::{io_err, ForgeError, Result};

/// Sparse binary user-item interactions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionDataset {
    num_actions: usize,
    users: Vec<ItemSet>,
}

impl InteractionDataset {
    pub fn new(num_actions: usize, users: Vec<ItemSet>) -> Result<Self> {
        for (u, set) in users.iter().enumerate() {
            if let Some(a) = set.iter().find(|a| a.index() >= num_actions) {
                return Err(ForgeError::Validation(format!(
                    "user {u} references action {} outside catalog of {num_actions}",
                    a.0
                )));
            }
        }
        Ok(InteractionDataset { num_actions, users })
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn user(&self, u: usize) -> &ItemSet {
        &self.users[u]
    }

    pub fn users(&self) -> &[ItemSet] {
        &self.users
    }

    pub fn num_interactions(&self) -> usize {
        self.users.iter().map(|s| s.len()).sum()
    }

    /// Interaction density |pairs| / (U * P).
    pub fn density(&self) -> f64 {
        if self.users.is_empty() || self.num_actions == 0 {
            return 0.0;
        }
        self.num_interactions() as f64 / (self.num_users() as f64 * self.num_actions as f64)
    }
}

/// Parses an interaction CSV. Malformed lines and duplicate pairs are
/// errors carrying the line number.
pub fn load_interactions(path: &Path) -> Result<InteractionDataset> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let reader = BufReader::new(file);
    let parse_err = |line: usize, msg: String| ForgeError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut pairs: Vec<(u64, u64)> = Vec::new();
    let mut seen: HashSet<(u64, u64)> = HashSet::new();
    let mut max_user: Option<u64> = None;
    let mut max_item: Option<u64> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if idx == 0 {
            if trimmed != "user_id,item_id" {
                return Err(parse_err(
                    lineno,
                    format!("expected header 'user_id,item_id', found '{trimmed}'"),
                ));
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let (user_str, item_str) = trimmed
            .split_once(',')
            .ok_or_else(|| parse_err(lineno, format!("expected 'user,item', found '{trimmed}'")))?;
        let user: u64 = user_str
            .trim()
            .parse()
            .map_err(|e| parse_err(lineno, format!("bad user id '{user_str}': {e}")))?;
        let item: u64 = item_str
            .trim()
            .parse()
            .map_err(|e| parse_err(lineno, format!("bad item id '{item_str}': {e}")))?;
        if item >= u32::MAX as u64 {
            return Err(parse_err(lineno, format!("item id {item} out of range")));
        }
        if !seen.insert((user, item)) {
            return Err(parse_err(
                lineno,
                format!("duplicate interaction ({user}, {item})"),
            ));
        }
        max_user = Some(max_user.map_or(user, |m| m.max(user)));
        max_item = Some(max_item.map_or(item, |m| m.max(item)));
        pairs.push((user, item));
    }

    let num_users = max_user.map_or(0, |m| m as usize + 1);
    let num_actions = max_item.map_or(0, |m| m as usize + 1);
    let mut users: Vec<Vec<ActionId>> = vec![Vec::new(); num_users];
    for (u, a) in pairs {
        users[u as usize].push(ActionId(a as u32));
    }
    InteractionDataset::new(num_actions, users.into_iter().map(ItemSet::new).collect())
}

/// Writes the dataset back as canonical CSV (users ascending, items
/// ascending within a user).
pub fn save_interactions(ds: &InteractionDataset, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<fs::File>, s: &str| {
        w.write_all(s.as_bytes()).map_err(io_err(path))
    };
    write(&mut w, "user_id,item_id\n")?;
    for (u, set) in ds.users().iter().enumerate() {
        for a in set.iter() {
            write(&mut w, &format!("{u},{}\n", a.0))?;
        }
    }
    w.flush().map_err(io_err(path))
}

/// Synthetic low-rank-logit interactions: user and item factors of rank
/// `rank` produce logits whose global bias is calibrated so the realized
/// density lands within a few percent of the target. Deterministic per
/// seed.
pub fn generate_synthetic(
    num_users: usize,
    num_actions: usize,
    rank: usize,
    density: f64,
    seed: u64,
) -> Result<InteractionDataset> {
    if !(density > 0.0 && density < 1.0) {
        return Err(ForgeError::Validation(format!(
            "density must lie strictly between 0 and 1, got {density}"
        )));
    }
    if num_users == 0 || num_actions == 0 || rank == 0 {
        return Err(ForgeError::Validation(
            "users, actions and rank must all be positive".into(),
        ));
    }
    let mut rng = RngStream::new(seed);
    let scale = 1.0 / (rank as f64).sqrt();
    let mut user_factors = vec![0.0; num_users * rank];
    let mut item_factors = vec![0.0; num_actions * rank];
    for v in &mut user_factors {
        *v = scale * rng.standard_normal();
    }
    for v in &mut item_factors {
        *v = scale * rng.standard_normal();
    }
    let logit = |u: usize, a: usize| {
        let uf = &user_factors[u * rank..(u + 1) * rank];
        let af = &item_factors[a * rank..(a + 1) * rank];
        slate_core::math::dot(uf, af)
    };

    // Calibrate the bias on a pair sample so mean sigmoid(z + b) hits the
    // target density.
    let sample_size = 200_000.min(num_users * num_actions);
    let mut cal_rng = rng.child(1);
    let sampled: Vec<f64> = (0..sample_size)
        .map(|_| {
            let u = cal_rng.uniform_below(num_users as u64) as usize;
            let a = cal_rng.uniform_below(num_actions as u64) as usize;
            logit(u, a)
        })
        .collect();
    let mean_prob = |b: f64| {
        sampled.iter().map(|&z| sigmoid(z + b)).sum::<f64>() / sampled.len() as f64
    };
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mean_prob(mid) < density {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let bias = 0.5 * (lo + hi);

    let mut draw_rng = rng.child(2);
    let mut users = Vec::with_capacity(num_users);
    for u in 0..num_users {
        let mut items = Vec::new();
        for a in 0..num_actions {
            if draw_rng.uniform() < sigmoid(logit(u, a) + bias) {
                items.push(ActionId(a as u32));
            }
        }
        users.push(ItemSet::new(items));
    }
    InteractionDataset::new(num_actions, users)
}

/// Per-user observed/hidden partition plus the train/validation user
/// split. Users with fewer than two interactions are dropped (counted in
/// `dropped_users`); every retained user has non-empty halves.
#[derive(Debug, Clone)]
pub struct SessionSplit {
    pub observed: Vec<ItemSet>,
    pub hidden: Vec<ItemSet>,
    /// Indices (into `observed`/`hidden`) of training users.
    pub train_users: Vec<usize>,
    /// Indices of validation users.
    pub val_users: Vec<usize>,
    pub dropped_users: usize,
    pub num_actions: usize,
    pub split_ratio: f64,
    pub seed: u64,
}

impl SessionSplit {
    pub fn num_retained(&self) -> usize {
        self.observed.len()
    }
}

/// Randomly splits every user's interactions into observed and hidden
/// halves (observed fraction `ratio`, both halves non-empty) and holds
/// out `val_fraction` of the retained users for validation.
pub fn split_sessions(
    ds: &InteractionDataset,
    ratio: f64,
    val_fraction: f64,
    seed: u64,
) -> Result<SessionSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(ForgeError::Validation(format!(
            "split ratio must lie strictly between 0 and 1, got {ratio}"
        )));
    }
    if !(0.0..1.0).contains(&val_fraction) {
        return Err(ForgeError::Validation(format!(
            "validation fraction must lie in [0, 1), got {val_fraction}"
        )));
    }
    let rng = RngStream::new(seed);
    let mut observed = Vec::new();
    let mut hidden = Vec::new();
    let mut dropped = 0usize;
    for (u, set) in ds.users().iter().enumerate() {
        let n = set.len();
        if n < 2 {
            dropped += 1;
            continue;
        }
        let mut items: Vec<ActionId> = set.iter().collect();
        let mut user_rng = rng.child(u as u64);
        // Fisher-Yates.
        for i in (1..items.len()).rev() {
            let j = user_rng.uniform_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
        let raw = (ratio * n as f64).round() as usize;
        let take = raw.clamp(1, n - 1);
        observed.push(items[..take].iter().copied().collect::<ItemSet>());
        hidden.push(items[take..].iter().copied().collect::<ItemSet>());
    }
    let retained = observed.len();
    let mut order: Vec<usize> = (0..retained).collect();
    let mut val_rng = rng.child(u64::MAX);
    for i in (1..order.len()).rev() {
        let j = val_rng.uniform_below(i as u64 + 1) as usize;
        order.swap(i, j);
    }
    let val_count = (val_fraction * retained as f64).round() as usize;
    let val_count = val_count.min(retained.saturating_sub(1));
    let mut val_users: Vec<usize> = order[..val_count].to_vec();
    let mut train_users: Vec<usize> = order[val_count..].to_vec();
    val_users.sort_unstable();
    train_users.sort_unstable();
    Ok(SessionSplit {
        observed,
        hidden,
        train_users,
        val_users,
        dropped_users: dropped,
        num_actions: ds.num_actions(),
        split_ratio: ratio,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("slate_forge_data_tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn empty_file_with_header_is_empty_dataset() {
        let path = temp("empty.csv");
        std::fs::write(&path, "user_id,item_id\n").unwrap();
        let ds = load_interactions(&path).unwrap();
        assert_eq!(ds.num_users(), 0);
        assert_eq!(ds.num_actions(), 0);
    }

    #[test]
    fn small_file_round_trips() {
        let path = temp("small.csv");
        std::fs::write(&path, "user_id,item_id\n0,5\n1,2\n0,3\n").unwrap();
        let ds = load_interactions(&path).unwrap();
        assert_eq!(ds.num_users(), 2);
        assert_eq!(ds.num_actions(), 6);
        assert_eq!(ds.num_interactions(), 3);

        let out = temp("small_round.csv");
        save_interactions(&ds, &out).unwrap();
        let again = load_interactions(&out).unwrap();
        assert_eq!(ds, again);
        // Canonical output is stable under a second round trip.
        let out2 = temp("small_round2.csv");
        save_interactions(&again, &out2).unwrap();
        assert_eq!(
            std::fs::read(&out).unwrap(),
            std::fs::read(&out2).unwrap()
        );
    }

    #[test]
    fn duplicate_pair_rejected_with_line_number() {
        let path = temp("dup.csv");
        std::fs::write(&path, "user_id,item_id\n0,1\n0,1\n").unwrap();
        match load_interactions(&path) {
            Err(ForgeError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_lines_rejected() {
        for (body, bad_line) in [
            ("user_id,item_id\nnope\n", 2),
            ("user_id,item_id\n1,x\n", 2),
            ("user_id,item_id\n-1,2\n", 2),
            ("wrong,header\n", 1),
        ] {
            let path = temp("bad.csv");
            std::fs::write(&path, body).unwrap();
            match load_interactions(&path) {
                Err(ForgeError::Parse { line, .. }) => assert_eq!(line, bad_line, "{body:?}"),
                other => panic!("expected parse error for {body:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn synthetic_density_within_ten_percent() {
        let ds = generate_synthetic(1000, 5000, 8, 0.01, 7).unwrap();
        let d = ds.density();
        assert!((0.009..=0.011).contains(&d), "density {d}");
    }

    #[test]
    fn synthetic_rejects_boundary_density() {
        assert!(generate_synthetic(10, 10, 2, 0.0, 1).is_err());
        assert!(generate_synthetic(10, 10, 2, 1.0, 1).is_err());
    }

    #[test]
    fn synthetic_deterministic_per_seed() {
        let a = generate_synthetic(50, 80, 4, 0.05, 3).unwrap();
        let b = generate_synthetic(50, 80, 4, 0.05, 3).unwrap();
        let c = generate_synthetic(50, 80, 4, 0.05, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn split_user_with_two_items() {
        let ds = InteractionDataset::new(
            4,
            vec![[0u32, 3].into_iter().collect(), [1u32].into_iter().collect()],
        )
        .unwrap();
        let split = split_sessions(&ds, 0.5, 0.0, 1).unwrap();
        assert_eq!(split.dropped_users, 1);
        assert_eq!(split.num_retained(), 1);
        assert_eq!(split.observed[0].len(), 1);
        assert_eq!(split.hidden[0].len(), 1);
    }

    #[test]
    fn split_halves_are_disjoint_and_cover() {
        let ds = generate_synthetic(200, 100, 4, 0.1, 11).unwrap();
        let split = split_sessions(&ds, 0.8, 0.1, 2).unwrap();
        let mut checked = 0;
        let mut retained_iter = 0usize;
        for set in ds.users() {
            if set.len() < 2 {
                continue;
            }
            let obs = &split.observed[retained_iter];
            let hid = &split.hidden[retained_iter];
            retained_iter += 1;
            assert!(obs.iter().all(|a| !hid.contains(a)), "halves overlap");
            let mut union: Vec<_> = obs.iter().chain(hid.iter()).collect();
            union.sort_unstable();
            let full: Vec<_> = set.iter().collect();
            assert_eq!(union, full, "halves must cover the user's items");
            // ratio 0.8 of n, within rounding.
            let want = (0.8 * set.len() as f64).round().clamp(1.0, set.len() as f64 - 1.0);
            assert_eq!(obs.len(), want as usize);
            checked += 1;
        }
        assert!(checked > 100);
        // 10% validation holdout.
        let total = split.num_retained();
        assert_eq!(split.val_users.len(), (0.1 * total as f64).round() as usize);
        assert_eq!(split.val_users.len() + split.train_users.len(), total);
    }

    #[test]
    fn split_deterministic_per_seed() {
        let ds = generate_synthetic(100, 50, 4, 0.1, 5).unwrap();
        let a = split_sessions(&ds, 0.5, 0.1, 9).unwrap();
        let b = split_sessions(&ds, 0.5, 0.1, 9).unwrap();
        assert_eq!(a.observed, b.observed);
        assert_eq!(a.hidden, b.hidden);
        assert_eq!(a.train_users, b.train_users);
        assert_eq!(a.val_users, b.val_users);
    }
}
