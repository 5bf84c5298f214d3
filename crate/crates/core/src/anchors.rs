//! Seeded, deterministic anchor selection.
//!
//! Four strategies: uniform sampling, farthest point sampling, k-means
//! representatives, and frequency top-k. Equal inputs (seed included) always
//! produce the identical anchor set; every tie is broken by lowest index or
//! lexicographic id so results do not depend on platform or iteration order.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::euclidean;
use crate::space::{EmbeddingSpace, VectorSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Uniform,
    Fps,
    Kmeans,
    TopK,
}

/// Everything needed to reproduce a selection run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub strategy: Strategy,
    pub m: usize,
    pub seed: u64,
    /// Number of most-frequent ids to drop before taking anchors (top-k only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skip: Option<usize>,
}

impl SelectionConfig {
    pub fn new(strategy: Strategy, m: usize, seed: u64) -> Self {
        SelectionConfig {
            strategy,
            m,
            seed,
            skip: None,
        }
    }
}

/// Default skip for frequency-ranked selection; the head of a frequency table
/// is dominated by stopwords.
pub const DEFAULT_TOPK_SKIP: usize = 400;

#[derive(Debug, Clone)]
pub enum AnchorKind {
    /// Ordered indices into a host space.
    Internal(Vec<usize>),
    /// Standalone anchor vectors, independent of any host (out-of-domain
    /// anchors).
    External(EmbeddingSpace),
}

/// An ordered anchor list. The ordering is part of the identity: column `j`
/// of every projection built from this set refers to anchor `j`.
#[derive(Debug, Clone)]
pub struct AnchorSet {
    kind: AnchorKind,
    config: Option<SelectionConfig>,
}

/// Anchor vectors resolved against a concrete space, in anchor order.
pub struct ResolvedAnchors<'a> {
    pub vectors: Vec<&'a [f64]>,
    pub ids: Vec<String>,
    pub dim: usize,
}

impl AnchorSet {
    pub fn internal(indices: Vec<usize>) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(indices.len());
        for &i in &indices {
            if !seen.insert(i) {
                return Err(Error::DuplicateAnchor(i));
            }
        }
        if indices.is_empty() {
            return Err(Error::InsufficientSamples {
                requested: 1,
                available: 0,
            });
        }
        Ok(AnchorSet {
            kind: AnchorKind::Internal(indices),
            config: None,
        })
    }

    pub fn external(space: EmbeddingSpace) -> Self {
        AnchorSet {
            kind: AnchorKind::External(space),
            config: None,
        }
    }

    /// Internal anchor set referring to `ids` of `host`, in the given order.
    pub fn from_ids(host: &EmbeddingSpace, ids: &[String]) -> Result<Self> {
        let mut indices = Vec::with_capacity(ids.len());
        for id in ids {
            indices.push(
                host.index_of(id)
                    .ok_or_else(|| Error::UnknownId(id.clone()))?,
            );
        }
        AnchorSet::internal(indices)
    }

    pub fn with_config(mut self, config: SelectionConfig) -> Self {
        self.config = Some(config);
        self
    }

    pub fn kind(&self) -> &AnchorKind {
        &self.kind
    }

    pub fn config(&self) -> Option<&SelectionConfig> {
        self.config.as_ref()
    }

    pub fn len(&self) -> usize {
        match &self.kind {
            AnchorKind::Internal(ix) => ix.len(),
            AnchorKind::External(space) => space.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn indices(&self) -> Option<&[usize]> {
        match &self.kind {
            AnchorKind::Internal(ix) => Some(ix),
            AnchorKind::External(_) => None,
        }
    }

    /// Anchor ids in anchor order (host ids for internal sets).
    pub fn ids(&self, host: &EmbeddingSpace) -> Result<Vec<String>> {
        match &self.kind {
            AnchorKind::Internal(ix) => ix
                .iter()
                .map(|&i| {
                    host.ids()
                        .get(i)
                        .cloned()
                        .ok_or(Error::AnchorOutOfRange {
                            index: i,
                            len: host.len(),
                        })
                })
                .collect(),
            AnchorKind::External(space) => Ok(space.ids().to_vec()),
        }
    }

    /// Reorders the anchors; used to check column-permutation equivariance.
    pub fn permuted(&self, order: &[usize]) -> Result<AnchorSet> {
        if order.len() != self.len() {
            return Err(Error::InvalidParameter(format!(
                "permutation length {} does not match anchor count {}",
                order.len(),
                self.len()
            )));
        }
        match &self.kind {
            AnchorKind::Internal(ix) => {
                let permuted = order.iter().map(|&o| ix[o]).collect();
                AnchorSet::internal(permuted)
            }
            AnchorKind::External(space) => {
                let ids: Vec<String> =
                    order.iter().map(|&o| space.ids()[o].clone()).collect();
                Ok(AnchorSet::external(space.subspace(&ids)?))
            }
        }
    }

    /// Resolves the anchors to concrete vectors for `host`; internal indices
    /// must be in range and external anchors must match the host dimension.
    pub fn resolve<'a>(&'a self, host: &'a EmbeddingSpace) -> Result<ResolvedAnchors<'a>> {
        match &self.kind {
            AnchorKind::Internal(ix) => {
                let mut vectors = Vec::with_capacity(ix.len());
                let mut ids = Vec::with_capacity(ix.len());
                for &i in ix {
                    if i >= host.len() {
                        return Err(Error::AnchorOutOfRange {
                            index: i,
                            len: host.len(),
                        });
                    }
                    vectors.push(host.row(i));
                    ids.push(host.ids()[i].clone());
                }
                Ok(ResolvedAnchors {
                    vectors,
                    ids,
                    dim: host.dim(),
                })
            }
            AnchorKind::External(space) => {
                if space.dim() != host.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: host.dim(),
                        actual: space.dim(),
                    });
                }
                Ok(ResolvedAnchors {
                    vectors: (0..space.len()).map(|i| space.row(i)).collect(),
                    ids: space.ids().to_vec(),
                    dim: space.dim(),
                })
            }
        }
    }
}

/// Slot-aligned anchor ids across several named spaces: slot `j` refers to
/// semantically corresponding anchors everywhere.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnchorCorrespondence {
    per_space: Vec<(String, Vec<String>)>,
}

impl AnchorCorrespondence {
    pub fn new(per_space: Vec<(String, Vec<String>)>) -> Result<Self> {
        let Some(first) = per_space.first() else {
            return Err(Error::InvalidParameter(
                "correspondence needs at least one space".into(),
            ));
        };
        let m = first.1.len();
        if m == 0 {
            return Err(Error::InvalidParameter(
                "correspondence needs at least one anchor slot".into(),
            ));
        }
        for (name, ids) in &per_space {
            if ids.len() != m {
                return Err(Error::InvalidParameter(format!(
                    "space `{name}` lists {} anchors, expected {m}",
                    ids.len()
                )));
            }
        }
        Ok(AnchorCorrespondence { per_space })
    }

    pub fn slots(&self) -> usize {
        self.per_space[0].1.len()
    }

    pub fn ids_for(&self, space_name: &str) -> Option<&[String]> {
        self.per_space
            .iter()
            .find(|(name, _)| name == space_name)
            .map(|(_, ids)| ids.as_slice())
    }

    /// The internal anchor set this correspondence induces on `space`.
    pub fn anchors_for(&self, space: &EmbeddingSpace) -> Result<AnchorSet> {
        let ids = self
            .ids_for(space.name())
            .ok_or_else(|| Error::UnknownId(space.name().to_string()))?;
        AnchorSet::from_ids(space, ids)
    }
}

fn check_count(space: &EmbeddingSpace, m: usize) -> Result<()> {
    if m == 0 || m > space.len() {
        return Err(Error::InsufficientSamples {
            requested: m,
            available: space.len(),
        });
    }
    Ok(())
}

/// Dispatches on the configured strategy. Top-k requires a frequency table.
pub fn select(
    space: &EmbeddingSpace,
    config: &SelectionConfig,
    frequencies: Option<&HashMap<String, u64>>,
) -> Result<AnchorSet> {
    let set = match config.strategy {
        Strategy::Uniform => select_uniform(space, config.m, config.seed)?,
        Strategy::Fps => select_fps(space, config.m, config.seed)?,
        Strategy::Kmeans => select_kmeans(space, config.m, config.seed)?,
        Strategy::TopK => {
            let freqs = frequencies.ok_or_else(|| {
                Error::InvalidParameter("top-k selection needs a frequency table".into())
            })?;
            select_topk(
                space,
                freqs,
                config.m,
                config.skip.unwrap_or(DEFAULT_TOPK_SKIP),
            )?
        }
    };
    Ok(set.with_config(config.clone()))
}

/// `m` distinct indices drawn uniformly without replacement.
pub fn select_uniform(space: &EmbeddingSpace, m: usize, seed: u64) -> Result<AnchorSet> {
    check_count(space, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = rand::seq::index::sample(&mut rng, space.len(), m).into_vec();
    AnchorSet::internal(indices).map(|s| {
        s.with_config(SelectionConfig::new(Strategy::Uniform, m, seed))
    })
}

/// Greedy max-min (farthest point) sampling.
///
/// The start point is the row with maximum norm after centering; every later
/// pick maximizes the minimum Euclidean distance to the picks so far. Ties go
/// to the lowest index. The seed is recorded for provenance but the procedure
/// is fully deterministic.
pub fn select_fps(space: &EmbeddingSpace, m: usize, seed: u64) -> Result<AnchorSet> {
    check_count(space, m)?;
    let (centered, _) = space.center();
    let norms = centered.l2_norms();
    let mut start = 0;
    for (i, &n) in norms.iter().enumerate() {
        if n > norms[start] {
            start = i;
        }
    }

    let n = space.len();
    let mut selected = Vec::with_capacity(m);
    let mut taken = vec![false; n];
    selected.push(start);
    taken[start] = true;
    // Distances are translation invariant, so raw rows suffice.
    let mut min_dist: Vec<f64> = (0..n)
        .map(|i| euclidean(space.row(i), space.row(start)))
        .collect();
    while selected.len() < m {
        let mut best = usize::MAX;
        let mut best_dist = f64::NEG_INFINITY;
        for (i, &d) in min_dist.iter().enumerate() {
            if !taken[i] && d > best_dist {
                best_dist = d;
                best = i;
            }
        }
        selected.push(best);
        taken[best] = true;
        for i in 0..n {
            let d = euclidean(space.row(i), space.row(best));
            if d < min_dist[i] {
                min_dist[i] = d;
            }
        }
    }
    AnchorSet::internal(selected)
        .map(|s| s.with_config(SelectionConfig::new(Strategy::Fps, m, seed)))
}

/// Nearest samples to k-means centroids (K = m, k-means++ seeding, Lloyd
/// iterations until centroid movement < 1e-8 or 300 rounds). Duplicate
/// winners fall back to the next-nearest unused sample so the result always
/// holds `m` distinct anchors.
pub fn select_kmeans(space: &EmbeddingSpace, m: usize, seed: u64) -> Result<AnchorSet> {
    check_count(space, m)?;
    let centroids = lloyd(space, m, seed);

    let n = space.len();
    let mut used = vec![false; n];
    let mut selected = Vec::with_capacity(m);
    for centroid in &centroids {
        let mut best = usize::MAX;
        let mut best_dist = f64::INFINITY;
        for i in 0..n {
            if used[i] {
                continue;
            }
            let d = euclidean(space.row(i), centroid);
            if d < best_dist {
                best_dist = d;
                best = i;
            }
        }
        used[best] = true;
        selected.push(best);
    }
    AnchorSet::internal(selected)
        .map(|s| s.with_config(SelectionConfig::new(Strategy::Kmeans, m, seed)))
}

const KMEANS_TOL: f64 = 1e-8;
const KMEANS_MAX_ITERS: usize = 300;

fn lloyd(space: &EmbeddingSpace, k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = space.len();
    let dim = space.dim();

    // k-means++ seeding.
    let mut centers: Vec<usize> = Vec::with_capacity(k);
    let first = rand::Rng::random_range(&mut rng, 0..n);
    centers.push(first);
    let mut d2: Vec<f64> = (0..n)
        .map(|i| {
            let d = euclidean(space.row(i), space.row(first));
            d * d
        })
        .collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut r = rand::Rng::random::<f64>(&mut rng) * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if r < w {
                    chosen = i;
                    break;
                }
                r -= w;
            }
            chosen
        } else {
            // All remaining mass sits on already-chosen points; take the
            // lowest unchosen index.
            (0..n).find(|i| !centers.contains(i)).unwrap_or(0)
        };
        centers.push(next);
        for i in 0..n {
            let d = euclidean(space.row(i), space.row(next));
            d2[i] = d2[i].min(d * d);
        }
    }

    let mut centroids: Vec<Vec<f64>> = centers.iter().map(|&c| space.row(c).to_vec()).collect();
    let mut assign = vec![0usize; n];
    for _ in 0..KMEANS_MAX_ITERS {
        for (i, a) in assign.iter_mut().enumerate() {
            let row = space.row(i);
            let mut best = 0usize;
            let mut best_dist = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let d = euclidean(row, centroid);
                if d < best_dist {
                    best_dist = d;
                    best = c;
                }
            }
            *a = best;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, &a) in assign.iter().enumerate() {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(space.row(i)) {
                *s += v;
            }
        }
        let mut movement: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue; // empty cluster keeps its centroid
            }
            let new: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            movement = movement.max(euclidean(&new, &centroids[c]));
            centroids[c] = new;
        }
        if movement < KMEANS_TOL {
            break;
        }
    }
    centroids
}

/// Ids ranked by descending frequency (ties by id), minus the first `skip`.
pub fn select_topk(
    space: &EmbeddingSpace,
    frequencies: &HashMap<String, u64>,
    m: usize,
    skip: usize,
) -> Result<AnchorSet> {
    if m == 0 || m + skip > space.len() {
        return Err(Error::InsufficientSamples {
            requested: m + skip,
            available: space.len(),
        });
    }
    let mut ranked: Vec<(&String, u64)> = Vec::with_capacity(space.len());
    for id in space.ids() {
        let count = frequencies
            .get(id)
            .copied()
            .ok_or_else(|| Error::MissingFrequency(id.clone()))?;
        ranked.push((id, count));
    }
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let chosen: Vec<String> = ranked[skip..skip + m]
        .iter()
        .map(|(id, _)| (*id).clone())
        .collect();
    AnchorSet::from_ids(space, &chosen).map(|s| {
        s.with_config(SelectionConfig {
            strategy: Strategy::TopK,
            m,
            seed: 0,
            skip: Some(skip),
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_space() -> EmbeddingSpace {
        // 1-D points 0..=10 embedded as (x, 0).
        let ids = (0..=10).map(|i| format!("p{i}")).collect();
        let rows = (0..=10).map(|i| vec![i as f64, 0.0]).collect();
        EmbeddingSpace::from_rows("line", ids, rows).unwrap()
    }

    #[test]
    fn uniform_draws_m_distinct_in_range() {
        let space = line_space();
        let set = select_uniform(&space, 4, 7).unwrap();
        let ix = set.indices().unwrap();
        assert_eq!(ix.len(), 4);
        let mut sorted = ix.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 4);
        assert!(sorted.iter().all(|&i| i < space.len()));
    }

    #[test]
    fn uniform_exhaustive_draw_covers_everything() {
        let space = line_space();
        let set = select_uniform(&space, space.len(), 3).unwrap();
        let mut ix = set.indices().unwrap().to_vec();
        ix.sort_unstable();
        assert_eq!(ix, (0..space.len()).collect::<Vec<_>>());
    }

    #[test]
    fn uniform_is_deterministic_and_seed_sensitive() {
        let space = line_space();
        let a = select_uniform(&space, 5, 42).unwrap();
        let b = select_uniform(&space, 5, 42).unwrap();
        assert_eq!(a.indices(), b.indices());
        let c = select_uniform(&space, 5, 43).unwrap();
        assert_ne!(a.indices(), c.indices());
    }

    #[test]
    fn uniform_rejects_oversized_request() {
        let space = line_space();
        assert!(matches!(
            select_uniform(&space, space.len() + 1, 0),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn fps_on_a_line_picks_extremes_then_middle() {
        // Centered mean is 5; indices 0 and 10 tie at distance 5, lowest
        // index starts. Then 10 is farthest from 0, then 5 maximizes the
        // min distance to {0, 10}.
        let space = line_space();
        let set = select_fps(&space, 3, 0).unwrap();
        assert_eq!(set.indices().unwrap(), &[0, 10, 5]);
    }

    #[test]
    fn fps_base_case_takes_max_norm_after_centering() {
        let space = EmbeddingSpace::from_rows(
            "t",
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![5.0, 5.0], vec![5.1, 5.0], vec![9.0, 5.0]],
        )
        .unwrap();
        // Mean x is ~6.37; farthest from it is "c".
        let set = select_fps(&space, 1, 0).unwrap();
        assert_eq!(set.indices().unwrap(), &[2]);
    }

    #[test]
    fn fps_breaks_ties_by_lowest_index() {
        let rows = vec![vec![1.0, 1.0]; 4];
        let ids = (0..4).map(|i| format!("p{i}")).collect();
        let space = EmbeddingSpace::from_rows("dup", ids, rows).unwrap();
        let set = select_fps(&space, 2, 9).unwrap();
        assert_eq!(set.indices().unwrap(), &[0, 1]);
    }

    #[test]
    fn kmeans_finds_blob_representatives() {
        // Two tight blobs around (0,0) and (10,10); every seeding converges
        // to the same partition, so the anchors are the two points nearest
        // each blob mean.
        let rows = vec![
            vec![0.1, 0.0],
            vec![-0.1, 0.05],
            vec![0.0, -0.08],
            vec![10.1, 10.0],
            vec![9.9, 10.05],
            vec![10.0, 9.92],
        ];
        let ids = (0..6).map(|i| format!("p{i}")).collect::<Vec<_>>();
        let space = EmbeddingSpace::from_rows("blobs", ids, rows.clone()).unwrap();

        // Independent oracle: blob means over the known partition.
        let mean = |ix: &[usize]| -> Vec<f64> {
            let mut m = vec![0.0; 2];
            for &i in ix {
                m[0] += rows[i][0];
                m[1] += rows[i][1];
            }
            m.iter().map(|v| v / ix.len() as f64).collect()
        };
        let nearest = |c: &[f64], ix: &[usize]| -> usize {
            *ix.iter()
                .min_by(|&&a, &&b| {
                    euclidean(&rows[a], c)
                        .partial_cmp(&euclidean(&rows[b], c))
                        .unwrap()
                })
                .unwrap()
        };
        let expected_low = nearest(&mean(&[0, 1, 2]), &[0, 1, 2]);
        let expected_high = nearest(&mean(&[3, 4, 5]), &[3, 4, 5]);

        for seed in 0..5 {
            let set = select_kmeans(&space, 2, seed).unwrap();
            let mut got = set.indices().unwrap().to_vec();
            got.sort_unstable();
            let mut want = vec![expected_low, expected_high];
            want.sort_unstable();
            assert_eq!(got, want, "seed {seed}");
        }
    }

    #[test]
    fn kmeans_with_k_equal_n_returns_all_indices() {
        let space = line_space();
        let set = select_kmeans(&space, space.len(), 5).unwrap();
        let mut ix = set.indices().unwrap().to_vec();
        ix.sort_unstable();
        assert_eq!(ix, (0..space.len()).collect::<Vec<_>>());
    }

    #[test]
    fn kmeans_is_deterministic() {
        let space = line_space();
        let a = select_kmeans(&space, 3, 11).unwrap();
        let b = select_kmeans(&space, 3, 11).unwrap();
        assert_eq!(a.indices(), b.indices());
    }

    #[test]
    fn topk_skips_then_takes_by_frequency() {
        let ids: Vec<String> = ["a", "b", "c", "d", "e"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let rows = (0..5).map(|i| vec![i as f64]).collect();
        let space = EmbeddingSpace::from_rows("freq", ids, rows).unwrap();
        let freqs: HashMap<String, u64> = [
            ("a", 100u64),
            ("b", 90),
            ("c", 80),
            ("d", 70),
            ("e", 60),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();

        let set = select_topk(&space, &freqs, 2, 2).unwrap();
        assert_eq!(set.ids(&space).unwrap(), vec!["c", "d"]);

        let top1 = select_topk(&space, &freqs, 1, 0).unwrap();
        assert_eq!(top1.ids(&space).unwrap(), vec!["a"]);

        assert!(matches!(
            select_topk(&space, &freqs, 3, 3),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn topk_ties_break_lexicographically() {
        let ids: Vec<String> = ["z", "y", "x"].iter().map(|s| s.to_string()).collect();
        let rows = (0..3).map(|i| vec![i as f64]).collect();
        let space = EmbeddingSpace::from_rows("tie", ids, rows).unwrap();
        let freqs: HashMap<String, u64> = [("z", 5u64), ("y", 5), ("x", 5)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let set = select_topk(&space, &freqs, 2, 0).unwrap();
        assert_eq!(set.ids(&space).unwrap(), vec!["x", "y"]);
    }

    #[test]
    fn topk_requires_full_frequency_coverage() {
        let ids: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let rows = (0..2).map(|i| vec![i as f64]).collect();
        let space = EmbeddingSpace::from_rows("gap", ids, rows).unwrap();
        let freqs: HashMap<String, u64> = [("a".to_string(), 3u64)].into_iter().collect();
        assert!(matches!(
            select_topk(&space, &freqs, 1, 0),
            Err(Error::MissingFrequency(id)) if id == "b"
        ));
    }

    #[test]
    fn correspondence_requires_equal_slot_counts() {
        let ok = AnchorCorrespondence::new(vec![
            ("x".into(), vec!["a".into(), "b".into()]),
            ("y".into(), vec!["c".into(), "d".into()]),
        ]);
        assert!(ok.is_ok());
        let bad = AnchorCorrespondence::new(vec![
            ("x".into(), vec!["a".into()]),
            ("y".into(), vec!["c".into(), "d".into()]),
        ]);
        assert!(bad.is_err());
    }

    #[test]
    fn fps_last_pick_is_greedy_optimal_by_brute_force() {
        // Swapping the last selected point for any non-selected point must
        // not improve the max-min distance of the set.
        let ids = (0..12).map(|i| format!("p{i}")).collect::<Vec<_>>();
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                let t = i as f64;
                vec![(t * 0.7).sin() * 3.0, (t * 1.3).cos() * 2.0]
            })
            .collect();
        let space = EmbeddingSpace::from_rows("mix", ids, rows).unwrap();
        let m = 4;
        let set = select_fps(&space, m, 0).unwrap();
        let chosen = set.indices().unwrap();

        let min_pairwise = |ix: &[usize]| -> f64 {
            let mut best = f64::INFINITY;
            for (a, &i) in ix.iter().enumerate() {
                for &j in &ix[a + 1..] {
                    best = best.min(euclidean(space.row(i), space.row(j)));
                }
            }
            best
        };
        let greedy_score = min_pairwise(chosen);
        for candidate in 0..space.len() {
            if chosen.contains(&candidate) {
                continue;
            }
            let mut swapped = chosen.to_vec();
            *swapped.last_mut().unwrap() = candidate;
            assert!(
                min_pairwise(&swapped) <= greedy_score + 1e-12,
                "swap with {candidate} beat greedy"
            );
        }
    }
}
