//! Cross-space alignment metrics.
//!
//! Jaccard@k, mean reciprocal rank, and per-sample cosine between two spaces
//! that share sample ids, plus brute-force cosine KNN, Pearson correlation,
//! and the latent-similarity performance proxy. All neighbor queries follow
//! one tie rule: descending similarity, then ascending id.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::anchors::{AnchorSet, SelectionConfig, Strategy};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, KahanSum};
use crate::relative::project;
use crate::space::{EmbeddingSpace, VectorSet};

/// Ordered nearest neighbors of one query.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    /// Id of the query sample, when the query was one.
    pub query: Option<String>,
    /// Neighbor ids, best first. The query's own id is included when it is a
    /// member of the space: self-similarity is part of the neighborhood.
    pub ids: Vec<String>,
    pub k: usize,
}

/// A KNN query: either a member id or a raw vector.
#[derive(Debug, Clone, Copy)]
pub enum Query<'a> {
    Id(&'a str),
    Vector(&'a [f64]),
}

/// Top-k members of `space` by cosine similarity to the query.
pub fn knn<S: VectorSet>(space: &S, query: Query<'_>, k: usize) -> Result<NeighborList> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let (vector, query_id) = match query {
        Query::Id(id) => {
            let i = space
                .index_of(id)
                .ok_or_else(|| Error::UnknownId(id.to_string()))?;
            (space.vector(i), Some(id.to_string()))
        }
        Query::Vector(v) => (v, None),
    };
    let ids = ranked_ids(space, vector, k)?;
    Ok(NeighborList {
        query: query_id,
        ids,
        k,
    })
}

fn ranked_ids<S: VectorSet>(space: &S, query: &[f64], k: usize) -> Result<Vec<String>> {
    if query.len() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            actual: query.len(),
        });
    }
    let qn = norm(query);
    if qn == 0.0 {
        return Err(Error::degenerate());
    }
    let mut scored: Vec<(f64, &String)> = Vec::with_capacity(space.len());
    for i in 0..space.len() {
        let row = space.vector(i);
        let rn = norm(row);
        if rn == 0.0 {
            return Err(Error::degenerate_id(&space.ids()[i]));
        }
        let sim = (dot(query, row) / (qn * rn)).clamp(-1.0, 1.0);
        scored.push((sim, &space.ids()[i]));
    }
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("similarities are never NaN")
            .then_with(|| a.1.cmp(b.1))
    });
    Ok(scored
        .into_iter()
        .take(k)
        .map(|(_, id)| id.clone())
        .collect())
}

/// Intersection-over-union of the neighbor id sets retrieved by querying the
/// *source* representation of `id` in both spaces.
pub fn jaccard_at_k<S: VectorSet, T: VectorSet>(
    source: &S,
    target: &T,
    id: &str,
    k: usize,
) -> Result<f64> {
    let (fx, _) = pair_vectors(source, target, id)?;
    let in_source = ranked_ids(source, fx, k)?;
    let in_target = ranked_ids(target, fx, k)?;
    Ok(jaccard_of(&in_source, &in_target))
}

fn jaccard_of(a: &[String], b: &[String]) -> f64 {
    let sa: HashSet<&str> = a.iter().map(String::as_str).collect();
    let sb: HashSet<&str> = b.iter().map(String::as_str).collect();
    let inter = sa.intersection(&sb).count() as f64;
    let union = sa.union(&sb).count() as f64;
    inter / union
}

/// Reciprocal of the 1-based rank at which the target's own representation
/// of `id` shows up among the target-space neighbors of the source
/// representation; 0 when it is not in the top k.
pub fn mrr<S: VectorSet, T: VectorSet>(
    source: &S,
    target: &T,
    id: &str,
    k: usize,
) -> Result<f64> {
    let (fx, _) = pair_vectors(source, target, id)?;
    let in_target = ranked_ids(target, fx, k)?;
    Ok(reciprocal_rank(&in_target, id))
}

fn reciprocal_rank(ranked: &[String], id: &str) -> f64 {
    ranked
        .iter()
        .position(|r| r == id)
        .map(|p| 1.0 / (p + 1) as f64)
        .unwrap_or(0.0)
}

/// Cosine similarity between the two representations of the same sample.
pub fn cosine_pair<S: VectorSet, T: VectorSet>(
    source: &S,
    target: &T,
    id: &str,
) -> Result<f64> {
    let (fx, fy) = pair_vectors(source, target, id)?;
    crate::relative::cosine(fx, fy).map_err(|e| match e {
        Error::DegenerateVector { .. } => Error::degenerate_id(id),
        other => other,
    })
}

fn pair_vectors<'a, S: VectorSet, T: VectorSet>(
    source: &'a S,
    target: &'a T,
    id: &str,
) -> Result<(&'a [f64], &'a [f64])> {
    if source.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: source.dim(),
            actual: target.dim(),
        });
    }
    let i = source
        .index_of(id)
        .ok_or_else(|| Error::UnknownId(id.to_string()))?;
    let j = target
        .index_of(id)
        .ok_or_else(|| Error::UnknownId(id.to_string()))?;
    Ok((source.vector(i), target.vector(j)))
}

/// Provenance recorded on a report.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ReportFlags {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centered: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchors: Option<SelectionConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleAlignment {
    pub id: String,
    pub jaccard: f64,
    pub mrr: f64,
    pub cosine: f64,
}

/// Aggregate alignment between two spaces over their shared ids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub jaccard_mean: f64,
    pub jaccard_std: f64,
    pub mrr_mean: f64,
    pub mrr_std: f64,
    pub cosine_mean: f64,
    pub cosine_std: f64,
    pub k: usize,
    pub n_shared: usize,
    #[serde(default)]
    pub flags: ReportFlags,
    #[serde(skip)]
    pub per_sample: Vec<SampleAlignment>,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let mut acc = KahanSum::new();
    let mut n = 0usize;
    for v in values.clone() {
        acc.add(v);
        n += 1;
    }
    let mean = acc.value() / n as f64;
    let mut var = KahanSum::new();
    for v in values {
        let d = v - mean;
        var.add(d * d);
    }
    (mean, (var.value() / n as f64).sqrt())
}

/// Jaccard@k, MRR, and cosine means (± std) over the ids present in both
/// spaces, in source order.
pub fn alignment_report<S: VectorSet, T: VectorSet>(
    source: &S,
    target: &T,
    k: usize,
) -> Result<AlignmentReport> {
    let shared: Vec<&String> = source
        .ids()
        .iter()
        .filter(|id| target.index_of(id).is_some())
        .collect();
    if shared.is_empty() {
        return Err(Error::EmptySharedSet {
            source_name: source.name().to_string(),
            target_name: target.name().to_string(),
        });
    }

    let mut per_sample = Vec::with_capacity(shared.len());
    for id in shared {
        let (fx, fy) = pair_vectors(source, target, id)?;
        let in_source = ranked_ids(source, fx, k)?;
        let in_target = ranked_ids(target, fx, k)?;
        let cosine = crate::relative::cosine(fx, fy).map_err(|e| match e {
            Error::DegenerateVector { .. } => Error::degenerate_id(id.clone()),
            other => other,
        })?;
        per_sample.push(SampleAlignment {
            id: id.clone(),
            jaccard: jaccard_of(&in_source, &in_target),
            mrr: reciprocal_rank(&in_target, id),
            cosine,
        });
    }

    let (jaccard_mean, jaccard_std) = mean_std(per_sample.iter().map(|s| s.jaccard));
    let (mrr_mean, mrr_std) = mean_std(per_sample.iter().map(|s| s.mrr));
    let (cosine_mean, cosine_std) = mean_std(per_sample.iter().map(|s| s.cosine));
    Ok(AlignmentReport {
        jaccard_mean,
        jaccard_std,
        mrr_mean,
        mrr_std,
        cosine_mean,
        cosine_std,
        k,
        n_shared: per_sample.len(),
        flags: ReportFlags::default(),
        per_sample,
    })
}

/// Relative-mode alignment with anchors resampled per seed: both spaces are
/// restricted to their shared ids, optionally centered, projected onto the
/// same anchor ids (parallel anchors), and compared; the reported std is
/// across seeds.
pub fn alignment_report_over_seeds(
    source: &EmbeddingSpace,
    target: &EmbeddingSpace,
    strategy: Strategy,
    m: usize,
    seeds: &[u64],
    k: usize,
    center: bool,
) -> Result<AlignmentReport> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("need at least one seed".into()));
    }
    let shared: Vec<String> = source
        .ids()
        .iter()
        .filter(|id| target.index_of(id).is_some())
        .cloned()
        .collect();
    if shared.is_empty() {
        return Err(Error::EmptySharedSet {
            source_name: source.name().to_string(),
            target_name: target.name().to_string(),
        });
    }
    let mut src = source.subspace(&shared)?;
    let mut tgt = target.subspace(&shared)?;
    if center {
        src = src.center().0;
        tgt = tgt.center().0;
    }

    let mut means = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let cfg = SelectionConfig::new(strategy, m, seed);
        let anchors_src = crate::anchors::select(&src, &cfg, None)?;
        let anchor_ids = anchors_src.ids(&src)?;
        let anchors_tgt = AnchorSet::from_ids(&tgt, &anchor_ids)?;
        let rel_src = project(&src, &anchors_src)?;
        let rel_tgt = project(&tgt, &anchors_tgt)?;
        let report = alignment_report(&rel_src, &rel_tgt, k)?;
        means.push((report.jaccard_mean, report.mrr_mean, report.cosine_mean));
    }

    let (jaccard_mean, jaccard_std) = mean_std(means.iter().map(|m| m.0));
    let (mrr_mean, mrr_std) = mean_std(means.iter().map(|m| m.1));
    let (cosine_mean, cosine_std) = mean_std(means.iter().map(|m| m.2));
    Ok(AlignmentReport {
        jaccard_mean,
        jaccard_std,
        mrr_mean,
        mrr_std,
        cosine_mean,
        cosine_std,
        k,
        n_shared: shared.len(),
        flags: ReportFlags {
            centered: Some(center),
            relative: Some(true),
            anchors: Some(SelectionConfig::new(strategy, m, seeds[0])),
            seeds: Some(seeds.to_vec()),
        },
        per_sample: Vec::new(),
    })
}

/// Mean cosine between corresponding representations: the differentiable
/// stand-in for task performance.
pub fn latent_similarity_proxy<S: VectorSet, T: VectorSet>(
    space: &S,
    reference: &T,
) -> Result<f64> {
    if space.len() != reference.len() {
        return Err(Error::IdSetMismatch(format!(
            "{} vs {} ids",
            space.len(),
            reference.len()
        )));
    }
    let mut acc = KahanSum::new();
    for id in space.ids() {
        if reference.index_of(id).is_none() {
            return Err(Error::IdSetMismatch(id.clone()));
        }
        acc.add(cosine_pair(space, reference, id)?);
    }
    Ok(acc.value() / space.len() as f64)
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            got: x.len(),
        });
    }
    let mx = crate::linalg::compensated_mean(x.iter().copied());
    let my = crate::linalg::compensated_mean(y.iter().copied());
    let mut sxy = KahanSum::new();
    let mut sxx = KahanSum::new();
    let mut syy = KahanSum::new();
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy.add(dx * dy);
        sxx.add(dx * dx);
        syy.add(dy * dy);
    }
    if sxx.value() == 0.0 || syy.value() == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy.value() / (sxx.value() * syy.value()).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson correlation between the flattened upper-triangular pairwise
/// cosine-similarity matrices of two spaces over the same ids. Measures how
/// much of one space's metric structure the other preserves.
pub fn self_similarity_correlation<S: VectorSet, T: VectorSet>(a: &S, b: &T) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::IdSetMismatch(format!(
            "{} vs {} ids",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 3 {
        return Err(Error::SeriesTooShort {
            needed: 3,
            got: a.len(),
        });
    }
    let order: Vec<usize> = a
        .ids()
        .iter()
        .map(|id| {
            b.index_of(id)
                .ok_or_else(|| Error::IdSetMismatch(id.clone()))
        })
        .collect::<Result<_>>()?;

    let n = a.len();
    let mut sims_a = Vec::with_capacity(n * (n - 1) / 2);
    let mut sims_b = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            sims_a.push(crate::relative::cosine(a.vector(i), a.vector(j))?);
            sims_b.push(crate::relative::cosine(
                b.vector(order[i]),
                b.vector(order[j]),
            )?);
        }
    }
    pearson(&sims_a, &sims_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anchors::select_uniform;
    use crate::transforms::{apply, TransformSpec};
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space(name: &str, ids: &[&str], rows: Vec<Vec<f64>>) -> EmbeddingSpace {
        EmbeddingSpace::from_rows(
            name,
            ids.iter().map(|s| s.to_string()).collect(),
            rows,
        )
        .unwrap()
    }

    fn gaussian_space(name: &str, n: usize, d: usize, seed: u64) -> EmbeddingSpace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ids = (0..n).map(|i| format!("s{i}")).collect();
        let rows = (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                    .collect()
            })
            .collect();
        EmbeddingSpace::from_rows(name, ids, rows).unwrap()
    }

    #[test]
    fn knn_self_query_returns_itself_first() {
        let s = space(
            "s",
            &["a", "b", "c"],
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.2]],
        );
        let out = knn(&s, Query::Id("a"), 1).unwrap();
        assert_eq!(out.ids, vec!["a"]);
    }

    #[test]
    fn knn_breaks_exact_ties_by_ascending_id() {
        // (1,0) and (2,0) are colinear: both have similarity 1 to the query.
        let s = space(
            "s",
            &["a", "b", "c"],
            vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0]],
        );
        let out = knn(&s, Query::Id("a"), 2).unwrap();
        assert_eq!(out.ids, vec!["a", "b"]);
    }

    #[test]
    fn knn_with_k_beyond_n_returns_everything_ordered() {
        let s = space(
            "s",
            &["a", "b", "c",],
            vec![vec![1.0, 0.0], vec![0.9, 0.1], vec![-1.0, 0.0]],
        );
        let out = knn(&s, Query::Id("a"), 10).unwrap();
        assert_eq!(out.ids.len(), 3);
        assert_eq!(out.ids[0], "a");
        assert_eq!(out.ids[2], "c");
    }

    #[test]
    fn knn_rejects_zero_norm_query() {
        let s = space("s", &["a"], vec![vec![1.0, 0.0]]);
        assert!(matches!(
            knn(&s, Query::Vector(&[0.0, 0.0]), 1),
            Err(Error::DegenerateVector { .. })
        ));
    }

    #[test]
    fn jaccard_identical_spaces_is_one() {
        let s = gaussian_space("s", 20, 4, 1);
        for id in s.ids().iter().take(5) {
            assert_eq!(jaccard_at_k(&s, &s, id, 5).unwrap(), 1.0);
        }
    }

    #[test]
    fn jaccard_disjoint_neighbor_sets_is_zero() {
        // Source clusters near +x put a's neighbors at {a, b}; the target
        // flips those two onto -x while everything else stays, so the same
        // query retrieves {c, d} there.
        let source = space(
            "src",
            &["a", "b", "c", "d"],
            vec![
                vec![1.0, 0.0],
                vec![0.99, 0.01],
                vec![-1.0, 0.3],
                vec![-1.0, -0.3],
            ],
        );
        let target = space(
            "tgt",
            &["a", "b", "c", "d"],
            vec![
                vec![-1.0, 0.0],
                vec![-0.99, 0.01],
                vec![1.0, 0.3],
                vec![1.0, -0.3],
            ],
        );
        assert_eq!(jaccard_at_k(&source, &target, "a", 2).unwrap(), 0.0);
    }

    #[test]
    fn jaccard_five_of_ten_shared_is_a_third() {
        let a: Vec<String> = (0..10).map(|i| format!("n{i}")).collect();
        let b: Vec<String> = (5..15).map(|i| format!("n{i}")).collect();
        assert_abs_diff_eq!(jaccard_of(&a, &b), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn mrr_identical_spaces_is_one() {
        let s = gaussian_space("s", 10, 3, 2);
        assert_eq!(mrr(&s, &s, "s3", 10).unwrap(), 1.0);
    }

    #[test]
    fn mrr_rank_positions() {
        let ranked: Vec<String> = ["w", "x", "y", "z"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(reciprocal_rank(&ranked, "z"), 0.25);
        assert_eq!(reciprocal_rank(&ranked, "missing"), 0.0);
    }

    #[test]
    fn cosine_pair_identical_is_one() {
        let s = gaussian_space("s", 5, 4, 3);
        assert_eq!(cosine_pair(&s, &s, "s0").unwrap(), 1.0);
    }

    #[test]
    fn cosine_pair_rejects_dimension_mismatch() {
        let a = gaussian_space("a", 4, 3, 4);
        let b = gaussian_space("b", 4, 5, 5);
        assert!(matches!(
            cosine_pair(&a, &b, "s0"),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn alignment_report_on_self_is_perfect() {
        let s = gaussian_space("s", 30, 6, 6);
        let report = alignment_report(&s, &s, 10).unwrap();
        assert_eq!(report.jaccard_mean, 1.0);
        assert_eq!(report.mrr_mean, 1.0);
        assert_eq!(report.cosine_mean, 1.0);
        assert_eq!(report.n_shared, 30);
        assert_eq!(report.jaccard_std, 0.0);
    }

    #[test]
    fn alignment_report_relative_mode_sees_through_isometry() {
        let s = gaussian_space("s", 60, 8, 7);
        let spec = TransformSpec::random_angle_preserving(8, 11, 2.5).unwrap();
        let t = apply(&s, &spec).unwrap();
        let anchors = select_uniform(&s, 16, 3).unwrap();
        let anchor_ids = anchors.ids(&s).unwrap();
        let anchors_t = AnchorSet::from_ids(&t, &anchor_ids).unwrap();
        let rel_s = project(&s, &anchors).unwrap();
        let rel_t = project(&t, &anchors_t).unwrap();
        let report = alignment_report(&rel_s, &rel_t, 10).unwrap();
        assert_eq!(report.jaccard_mean, 1.0);
        assert_eq!(report.mrr_mean, 1.0);
        assert!(report.cosine_mean >= 1.0 - 1e-9);
    }

    #[test]
    fn alignment_report_requires_shared_ids() {
        let a = space("a", &["x"], vec![vec![1.0]]);
        let b = space("b", &["y"], vec![vec![1.0]]);
        assert!(matches!(
            alignment_report(&a, &b, 1),
            Err(Error::EmptySharedSet { .. })
        ));
    }

    #[test]
    fn report_serializes_with_fixed_field_names() {
        let s = gaussian_space("s", 5, 3, 8);
        let report = alignment_report(&s, &s, 2).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        for field in [
            "jaccard_mean",
            "jaccard_std",
            "mrr_mean",
            "mrr_std",
            "cosine_mean",
            "cosine_std",
            "k",
            "n_shared",
        ] {
            assert!(json.get(field).is_some(), "missing {field}");
        }
    }

    #[test]
    fn proxy_is_one_on_self_and_under_isometry() {
        let s = gaussian_space("s", 40, 8, 9);
        let anchors = select_uniform(&s, 12, 4).unwrap();
        let rel = project(&s, &anchors).unwrap();
        assert_eq!(latent_similarity_proxy(&rel, &rel).unwrap(), 1.0);

        let spec = TransformSpec::random_angle_preserving(8, 21, 0.7).unwrap();
        let t = apply(&s, &spec).unwrap();
        let anchors_t = AnchorSet::from_ids(&t, &anchors.ids(&s).unwrap()).unwrap();
        let rel_t = project(&t, &anchors_t).unwrap();
        let p = latent_similarity_proxy(&rel_t, &rel).unwrap();
        assert!(p > 1.0 - 1e-10, "proxy {p}");
    }

    #[test]
    fn proxy_decreases_monotonically_with_noise() {
        use crate::transforms::bounded_distortion;
        let s = gaussian_space("s", 60, 16, 10);
        let anchors = select_uniform(&s, 24, 5).unwrap();
        let rel_ref = project(&s, &anchors).unwrap();
        let mut last = f64::INFINITY;
        for eps in [0.1, 0.5, 1.0] {
            let noisy = bounded_distortion(&s, eps, 77).unwrap();
            let anchors_n = AnchorSet::from_ids(&noisy, &anchors.ids(&s).unwrap()).unwrap();
            let rel_n = project(&noisy, &anchors_n).unwrap();
            let p = latent_similarity_proxy(&rel_n, &rel_ref).unwrap();
            assert!(p < last, "eps {eps}: {p} !< {last}");
            assert!(p < 1.0);
            last = p;
        }
    }

    #[test]
    fn pearson_known_values() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_abs_diff_eq!(
            pearson(&x, &[5.0, 7.0, 9.0, 11.0]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            pearson(&x, &[-1.0, -2.0, -3.0, -4.0]).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            pearson(&x, &[2.0, 1.0, 4.0, 3.0]).unwrap(),
            0.6,
            epsilon = 1e-12
        );
    }

    #[test]
    fn pearson_rejects_zero_variance() {
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::ZeroVariance)
        ));
    }

    #[test]
    fn pearson_is_invariant_to_positive_affine_rescaling() {
        let x = [0.3, -1.2, 2.2, 0.9, -0.4];
        let y = [1.0, 0.2, 0.5, -0.8, 2.0];
        let scaled: Vec<f64> = x.iter().map(|v| 3.5 * v + 11.0).collect();
        let base = pearson(&x, &y).unwrap();
        let after = pearson(&scaled, &y).unwrap();
        assert_abs_diff_eq!(base, after, epsilon = 1e-12);
    }

    #[test]
    fn self_similarity_correlation_perfect_cases() {
        let s = gaussian_space("s", 20, 6, 11);
        assert_abs_diff_eq!(
            self_similarity_correlation(&s, &s).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let spec = TransformSpec::random_angle_preserving(6, 31, 1.8).unwrap();
        let t = apply(&s, &spec).unwrap();
        let c = self_similarity_correlation(&s, &t).unwrap();
        assert!(c > 1.0 - 1e-9, "correlation {c}");
    }

    #[test]
    fn self_similarity_between_absolute_and_relative_is_partial() {
        let s = gaussian_space("s", 40, 12, 12);
        let anchors = select_uniform(&s, 8, 6).unwrap();
        let rel = project(&s, &anchors).unwrap();
        let c = self_similarity_correlation(&s, &rel).unwrap();
        // Preserved only up to a degree: strictly between 0 and 1.
        assert!(c > 0.0 && c < 1.0, "correlation {c}");
    }

    #[test]
    fn self_similarity_needs_three_samples() {
        let s = gaussian_space("s", 2, 3, 13);
        assert!(matches!(
            self_similarity_correlation(&s, &s),
            Err(Error::SeriesTooShort { .. })
        ));
    }
}
