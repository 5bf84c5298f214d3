//! Anchor-relative coordinates.
//!
//! `project` turns an absolute space into the N×m matrix of cosine
//! similarities against an ordered anchor set. Cosine similarity is invariant
//! to rotations, reflections, and positive rescaling, so two spaces that
//! differ by such a transformation project to the same relative coordinates;
//! that invariance is what the rest of the crate measures and exploits. It
//! does not extend to translations, which is why centering exists as an
//! explicit step upstream.

use std::collections::HashMap;

use kodama::{linkage, Method};

use crate::anchors::{AnchorKind, AnchorSet, ResolvedAnchors, SelectionConfig};
use crate::error::{Error, Result};
use crate::linalg::{dot, euclidean, norm, Matrix};
use crate::space::{EmbeddingSpace, VectorSet};

/// Cosine similarity, clamped to [-1, 1] against floating-point spill.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::degenerate());
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// An N×m matrix of anchor similarities, one row per source sample, one
/// column per anchor (in anchor order).
#[derive(Debug, Clone)]
pub struct RelativeSpace {
    name: String,
    ids: Vec<String>,
    data: Vec<f64>,
    m: usize,
    anchor_ids: Vec<String>,
    selection: Option<SelectionConfig>,
    quantize_threshold: f64,
    index: HashMap<String, usize>,
}

impl RelativeSpace {
    fn new(
        name: String,
        ids: Vec<String>,
        data: Vec<f64>,
        anchor_ids: Vec<String>,
        selection: Option<SelectionConfig>,
        quantize_threshold: f64,
    ) -> Self {
        let m = anchor_ids.len();
        debug_assert_eq!(data.len(), ids.len() * m);
        let index = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        RelativeSpace {
            name,
            ids,
            data,
            m,
            anchor_ids,
            selection,
            quantize_threshold,
            index,
        }
    }

    pub fn anchor_ids(&self) -> &[String] {
        &self.anchor_ids
    }

    pub fn selection(&self) -> Option<&SelectionConfig> {
        self.selection.as_ref()
    }

    /// Agglomerative merge threshold used before projection; 0 means none.
    pub fn quantize_threshold(&self) -> f64 {
        self.quantize_threshold
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.m)
    }

    /// Copies the matrix into a plain embedding space (same ids), which lets
    /// relative coordinates flow through any API that takes absolute ones.
    pub fn to_embedding_space(&self) -> EmbeddingSpace {
        EmbeddingSpace::from_flat_unchecked(
            self.name.clone(),
            self.ids.clone(),
            self.data.clone(),
            self.m,
        )
    }
}

impl VectorSet for RelativeSpace {
    fn name(&self) -> &str {
        &self.name
    }

    fn len(&self) -> usize {
        self.ids.len()
    }

    fn dim(&self) -> usize {
        self.m
    }

    fn ids(&self) -> &[String] {
        &self.ids
    }

    fn vector(&self, i: usize) -> &[f64] {
        self.row(i)
    }

    fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }
}

/// Projects every sample onto cosine coordinates against `anchors`.
///
/// Zero-norm rows (sample or anchor) are hard errors naming the offending
/// id: mapping them silently to 0 would corrupt the invariance guarantee in
/// a way no downstream check could see.
pub fn project(space: &EmbeddingSpace, anchors: &AnchorSet) -> Result<RelativeSpace> {
    let resolved = anchors.resolve(space)?;
    let anchor_rows: Option<&[usize]> = anchors.indices();

    let anchor_norms = anchor_vector_norms(&resolved)?;
    let mut data = Vec::with_capacity(space.len() * resolved.vectors.len());
    for (i, row) in space.rows().enumerate() {
        let row_norm = norm(row);
        if row_norm == 0.0 {
            return Err(Error::degenerate_id(&space.ids()[i]));
        }
        for (j, (anchor, an)) in resolved.vectors.iter().zip(&anchor_norms).enumerate() {
            // A sample that *is* anchor j has similarity exactly 1 there.
            let is_self = anchor_rows.map(|ix| ix[j] == i).unwrap_or(false);
            let value = if is_self {
                1.0
            } else {
                (dot(row, anchor) / (row_norm * an)).clamp(-1.0, 1.0)
            };
            data.push(value);
        }
    }
    Ok(RelativeSpace::new(
        space.name().to_string(),
        space.ids().to_vec(),
        data,
        resolved.ids.clone(),
        anchors.config().cloned(),
        0.0,
    ))
}

fn anchor_vector_norms(resolved: &ResolvedAnchors<'_>) -> Result<Vec<f64>> {
    resolved
        .vectors
        .iter()
        .zip(&resolved.ids)
        .map(|(v, id)| {
            let n = norm(v);
            if n == 0.0 {
                Err(Error::degenerate_id(id))
            } else {
                Ok(n)
            }
        })
        .collect()
}

/// Quantized projection: replaces every vector by the centroid of its
/// average-linkage cluster (merging while the linkage distance is at most
/// `threshold`), then projects. Trades expressivity for robustness to
/// bounded distortion.
///
/// Clustering runs jointly over the samples and, for external anchor sets,
/// the anchor vectors. `threshold == 0` is exactly `project`.
pub fn project_quantized(
    space: &EmbeddingSpace,
    anchors: &AnchorSet,
    threshold: f64,
) -> Result<RelativeSpace> {
    if threshold < 0.0 {
        return Err(Error::InvalidParameter(
            "quantization threshold must be >= 0".into(),
        ));
    }
    if threshold == 0.0 {
        return project(space, anchors);
    }

    let resolved = anchors.resolve(space)?;
    let m = resolved.vectors.len();
    let n = space.len();

    // Point set to cluster: all samples, plus anchor vectors when they are
    // not already rows of the space.
    let mut points: Vec<&[f64]> = space.rows().collect();
    let anchor_points: Vec<usize> = match anchors.kind() {
        AnchorKind::Internal(ix) => ix.clone(),
        AnchorKind::External(_) => {
            let base = points.len();
            points.extend(resolved.vectors.iter().copied());
            (base..base + m).collect()
        }
    };

    let centroids = cluster_centroids(&points, threshold);

    let sample_vec = |i: usize| -> &[f64] { &centroids.coords[centroids.assignment[i]] };
    let mut anchor_vecs: Vec<&[f64]> = Vec::with_capacity(m);
    let mut anchor_cluster: Vec<usize> = Vec::with_capacity(m);
    for &p in &anchor_points {
        anchor_cluster.push(centroids.assignment[p]);
        anchor_vecs.push(&centroids.coords[centroids.assignment[p]]);
    }
    let anchor_norms: Vec<f64> = anchor_vecs
        .iter()
        .zip(&resolved.ids)
        .map(|(v, id)| {
            let nv = norm(v);
            if nv == 0.0 {
                Err(Error::degenerate_id(format!("cluster of anchor `{id}`")))
            } else {
                Ok(nv)
            }
        })
        .collect::<Result<_>>()?;

    let mut data = Vec::with_capacity(n * m);
    for i in 0..n {
        let row = sample_vec(i);
        let row_norm = norm(row);
        if row_norm == 0.0 {
            return Err(Error::degenerate_id(format!(
                "cluster of sample `{}`",
                space.ids()[i]
            )));
        }
        for j in 0..m {
            let value = if centroids.assignment[i] == anchor_cluster[j] {
                1.0
            } else {
                (dot(row, anchor_vecs[j]) / (row_norm * anchor_norms[j])).clamp(-1.0, 1.0)
            };
            data.push(value);
        }
    }
    Ok(RelativeSpace::new(
        space.name().to_string(),
        space.ids().to_vec(),
        data,
        resolved.ids.clone(),
        anchors.config().cloned(),
        threshold,
    ))
}

struct Clustering {
    /// Cluster index per input point.
    assignment: Vec<usize>,
    /// Centroid coordinates per cluster.
    coords: Vec<Vec<f64>>,
}

/// Average-linkage agglomerative clustering over Euclidean distances, cut at
/// `threshold`. Average linkage is monotone, so merging the dendrogram steps
/// whose dissimilarity is at most the threshold is a well-defined cut.
fn cluster_centroids(points: &[&[f64]], threshold: f64) -> Clustering {
    let n = points.len();
    let dim = points.first().map(|p| p.len()).unwrap_or(0);
    if n == 1 {
        return Clustering {
            assignment: vec![0],
            coords: vec![points[0].to_vec()],
        };
    }

    let mut condensed = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            condensed.push(euclidean(points[i], points[j]));
        }
    }
    let dendrogram = linkage(&mut condensed, n, Method::Average);

    // Union through the merge steps below the threshold. Step i creates
    // dendrogram node n + i from its two children.
    let total = n + dendrogram.steps().len();
    let mut parent: Vec<usize> = (0..total).collect();
    for (i, step) in dendrogram.steps().iter().enumerate() {
        if step.dissimilarity <= threshold {
            parent[step.cluster1] = n + i;
            parent[step.cluster2] = n + i;
        }
    }
    let root = |mut x: usize, parent: &[usize]| -> usize {
        while parent[x] != x {
            x = parent[x];
        }
        x
    };

    let mut cluster_of_root: HashMap<usize, usize> = HashMap::new();
    let mut assignment = vec![0usize; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for p in 0..n {
        let r = root(p, &parent);
        let next = members.len();
        let c = *cluster_of_root.entry(r).or_insert(next);
        if c == members.len() {
            members.push(Vec::new());
        }
        members[c].push(p);
        assignment[p] = c;
    }

    let coords = members
        .iter()
        .map(|ix| {
            let mut c = vec![0.0; dim];
            for &p in ix {
                for (acc, v) in c.iter_mut().zip(points[p]) {
                    *acc += v;
                }
            }
            for acc in &mut c {
                *acc /= ix.len() as f64;
            }
            c
        })
        .collect();
    Clustering {
        assignment,
        coords,
    }
}

/// Gradient of every anchor similarity with respect to the sample vector:
/// row `j` is `∂ cos(e, a_j)/∂e = a_j/(|e||a_j|) - (e·a_j) e/(|e|^3 |a_j|)`.
pub fn jacobian(e: &[f64], anchors: &ResolvedAnchors<'_>) -> Result<Matrix> {
    if e.len() != anchors.dim {
        return Err(Error::DimensionMismatch {
            expected: anchors.dim,
            actual: e.len(),
        });
    }
    let en = norm(e);
    if en == 0.0 {
        return Err(Error::degenerate());
    }
    let mut out = Matrix::zeros(anchors.vectors.len(), e.len());
    for (j, (a, id)) in anchors.vectors.iter().zip(&anchors.ids).enumerate() {
        let an = norm(a);
        if an == 0.0 {
            return Err(Error::degenerate_id(id));
        }
        let ea = dot(e, a);
        let row = out.row_mut(j);
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = a[k] / (en * an) - ea * e[k] / (en.powi(3) * an);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anchors::select_uniform;
    use approx::assert_abs_diff_eq;

    fn space(name: &str, rows: Vec<Vec<f64>>) -> EmbeddingSpace {
        let ids = (0..rows.len()).map(|i| format!("s{i}")).collect();
        EmbeddingSpace::from_rows(name, ids, rows).unwrap()
    }

    #[test]
    fn cosine_basics() {
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cosine(&[2.0, 0.0], &[5.0, 0.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(
            cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap(),
            0.7071067811865475,
            epsilon = 1e-15
        );
    }

    #[test]
    fn cosine_rejects_zero_norm() {
        assert!(matches!(
            cosine(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::DegenerateVector { .. })
        ));
    }

    #[test]
    fn project_hand_computed_row() {
        let s = space("s", vec![vec![3.0, 4.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        let anchors = AnchorSet::internal(vec![1, 2]).unwrap();
        let rel = project(&s, &anchors).unwrap();
        assert_abs_diff_eq!(rel.row(0)[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(rel.row(0)[1], 0.8, epsilon = 1e-15);
    }

    #[test]
    fn project_anchor_self_column_is_exactly_one() {
        let s = space(
            "s",
            vec![vec![0.3, -0.7, 0.1], vec![2.0, 0.4, 0.9], vec![-1.0, 0.2, 0.5]],
        );
        let anchors = AnchorSet::internal(vec![2, 0]).unwrap();
        let rel = project(&s, &anchors).unwrap();
        assert_eq!(rel.row(2)[0], 1.0);
        assert_eq!(rel.row(0)[1], 1.0);
    }

    #[test]
    fn project_names_offending_zero_row() {
        let ids = vec!["ok".to_string(), "dead".to_string()];
        let s =
            EmbeddingSpace::from_rows("z", ids, vec![vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let anchors = AnchorSet::internal(vec![0]).unwrap();
        let err = project(&s, &anchors).unwrap_err();
        assert!(err.to_string().contains("dead"), "{err}");
    }

    #[test]
    fn project_is_invariant_to_rotation() {
        // 90 degree rotation of every sample and anchor.
        let rows = vec![vec![1.0, 2.0], vec![-0.5, 0.3], vec![2.0, -1.0], vec![0.4, 0.4]];
        let rotated: Vec<Vec<f64>> = rows.iter().map(|r| vec![-r[1], r[0]]).collect();
        let a = space("a", rows);
        let b = space("b", rotated);
        let anchors = AnchorSet::internal(vec![0, 2]).unwrap();
        let ra = project(&a, &anchors).unwrap();
        let rb = project(&b, &anchors).unwrap();
        for (x, y) in ra.rows().flatten().zip(rb.rows().flatten()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn project_rejects_external_anchor_dim_mismatch() {
        let s = space("s", vec![vec![1.0, 0.0]]);
        let ext = space("anchors", vec![vec![1.0, 0.0, 0.0]]);
        let anchors = AnchorSet::external(ext);
        assert!(matches!(
            project(&s, &anchors),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn quantized_with_zero_threshold_is_project_bitwise() {
        let s = space(
            "s",
            vec![vec![0.9, 0.1], vec![1.3, -0.4], vec![-0.2, 0.8], vec![0.5, 0.5]],
        );
        let anchors = select_uniform(&s, 2, 3).unwrap();
        let plain = project(&s, &anchors).unwrap();
        let quant = project_quantized(&s, &anchors, 0.0).unwrap();
        assert_eq!(plain.data, quant.data);
        assert_eq!(quant.quantize_threshold(), 0.0);
    }

    #[test]
    fn quantized_merges_nearby_samples() {
        // Two samples 0.01 apart with threshold 0.1 collapse onto one
        // centroid, so their projected rows are identical.
        let s = space(
            "s",
            vec![
                vec![1.00, 0.0],
                vec![1.01, 0.0],
                vec![0.0, 5.0],
                vec![5.0, 0.1],
            ],
        );
        let anchors = AnchorSet::internal(vec![2, 3]).unwrap();
        let rel = project_quantized(&s, &anchors, 0.1).unwrap();
        assert_eq!(rel.row(0), rel.row(1));
        // The far-away samples keep distinct rows.
        assert_ne!(rel.row(2), rel.row(3));
    }

    #[test]
    fn quantized_entries_stay_bounded_and_anchor_clusters_hit_one() {
        let s = space(
            "s",
            vec![
                vec![1.0, 0.2],
                vec![1.05, 0.21],
                vec![-2.0, 1.0],
                vec![3.0, -0.5],
            ],
        );
        let anchors = AnchorSet::internal(vec![0, 2]).unwrap();
        let rel = project_quantized(&s, &anchors, 0.2).unwrap();
        for row in rel.rows() {
            for &v in row {
                assert!((-1.0..=1.0).contains(&v));
            }
        }
        // Sample 1 merged into anchor 0's cluster: exact 1 in that column.
        assert_eq!(rel.row(1)[0], 1.0);
    }

    #[test]
    fn jacobian_hand_computed_case() {
        let s = space("s", vec![vec![0.0, 1.0]]);
        let anchors = AnchorSet::internal(vec![0]).unwrap();
        let resolved = anchors.resolve(&s).unwrap();
        let j = jacobian(&[1.0, 0.0], &resolved).unwrap();
        assert_abs_diff_eq!(j.get(0, 0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j.get(0, 1), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn jacobian_vanishes_at_perfect_alignment() {
        let s = space("s", vec![vec![0.6, 0.8]]);
        let anchors = AnchorSet::internal(vec![0]).unwrap();
        let resolved = anchors.resolve(&s).unwrap();
        let j = jacobian(&[0.6, 0.8], &resolved).unwrap();
        for k in 0..2 {
            assert_abs_diff_eq!(j.get(0, k), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn jacobian_matches_central_differences() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let d = 32;
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
            (0..d)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect()
        };
        for _ in 0..50 {
            let e = draw(&mut rng);
            let a_row = draw(&mut rng);
            let ids = vec!["a".to_string()];
            let anchor_space =
                EmbeddingSpace::from_rows("anchor", ids, vec![a_row.clone()]).unwrap();
            let anchors = AnchorSet::external(anchor_space);
            let host = space("host", vec![e.clone()]);
            let resolved = anchors.resolve(&host).unwrap();
            let j = jacobian(&e, &resolved).unwrap();

            let h = 1e-6;
            for k in 0..d {
                let mut plus = e.clone();
                let mut minus = e.clone();
                plus[k] += h;
                minus[k] -= h;
                let fd = (cosine(&plus, &a_row).unwrap() - cosine(&minus, &a_row).unwrap())
                    / (2.0 * h);
                assert_abs_diff_eq!(j.get(0, k), fd, epsilon = 1e-7);
            }
        }
    }
}
