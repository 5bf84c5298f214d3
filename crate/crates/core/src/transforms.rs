//! Synthetic latent-space transformations.
//!
//! These model what retraining with different stochastic factors does to an
//! embedding space: an orthogonal map, a positive rescaling, optionally a
//! translation, and bounded non-isometric distortion. The relative module's
//! invariance claims are verified against exactly these generators.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{determinant_sign, householder_qr, Matrix};
use crate::space::{EmbeddingSpace, VectorSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Rotation,
    Reflection,
    Permutation,
    Composite,
}

/// A concrete latent transformation: rows map to `scale * Q * row +
/// translation`, in that order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformSpec {
    pub kind: TransformKind,
    pub seed: u64,
    pub scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orthogonal: Option<Matrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub translation: Option<Vec<f64>>,
}

impl TransformSpec {
    pub fn identity() -> Self {
        TransformSpec {
            kind: TransformKind::Composite,
            seed: 0,
            scale: 1.0,
            orthogonal: None,
            translation: None,
        }
    }

    /// Random orthogonal map times a positive scale; the kind tag records
    /// whether the draw was a rotation or a reflection.
    pub fn random_angle_preserving(dim: usize, seed: u64, scale: f64) -> Result<Self> {
        if scale <= 0.0 || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive and finite, got {scale}"
            )));
        }
        let q = random_orthogonal(dim, seed);
        let kind = if determinant_sign(&q) >= 0.0 {
            TransformKind::Rotation
        } else {
            TransformKind::Reflection
        };
        Ok(TransformSpec {
            kind,
            seed,
            scale,
            orthogonal: Some(q),
            translation: None,
        })
    }

    /// Random coordinate permutation (also angle-preserving).
    pub fn permutation(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let perm = rand::seq::index::sample(&mut rng, dim, dim).into_vec();
        let mut q = Matrix::zeros(dim, dim);
        for (row, &col) in perm.iter().enumerate() {
            q.set(row, col, 1.0);
        }
        TransformSpec {
            kind: TransformKind::Permutation,
            seed,
            scale: 1.0,
            orthogonal: Some(q),
            translation: None,
        }
    }

    pub fn with_translation(mut self, translation: Vec<f64>) -> Self {
        self.translation = Some(translation);
        self.kind = TransformKind::Composite;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }
}

/// Haar-distributed orthogonal matrix: QR of a seeded Gaussian matrix with
/// the R-diagonal sign correction (plain QR alone is not Haar and would bias
/// invariance sweeps).
pub fn random_orthogonal(dim: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gaussian = Matrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            gaussian.set(i, j, rng.sample(StandardNormal));
        }
    }
    let (mut q, r) = householder_qr(&gaussian);
    for j in 0..dim {
        if r.get(j, j) < 0.0 {
            for i in 0..dim {
                q.set(i, j, -q.get(i, j));
            }
        }
    }
    q
}

/// Applies `spec` to every row of `space`.
pub fn apply(space: &EmbeddingSpace, spec: &TransformSpec) -> Result<EmbeddingSpace> {
    let dim = space.dim();
    if let Some(q) = &spec.orthogonal {
        if q.rows() != dim || q.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: q.rows(),
            });
        }
    }
    if let Some(t) = &spec.translation {
        if t.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: t.len(),
            });
        }
    }

    let mut data = Vec::with_capacity(space.len() * dim);
    for row in space.rows() {
        let mut mapped = match &spec.orthogonal {
            Some(q) => q.matvec(row),
            None => row.to_vec(),
        };
        for v in &mut mapped {
            *v *= spec.scale;
        }
        if let Some(t) = &spec.translation {
            for (v, tv) in mapped.iter_mut().zip(t) {
                *v += tv;
            }
        }
        data.extend_from_slice(&mapped);
    }
    Ok(EmbeddingSpace::from_flat_unchecked(
        space.name().to_string(),
        space.ids().to_vec(),
        data,
        dim,
    ))
}

/// Perturbs each row by a seeded random vector of norm at most
/// `epsilon * |row|`.
pub fn bounded_distortion(
    space: &EmbeddingSpace,
    epsilon: f64,
    seed: u64,
) -> Result<EmbeddingSpace> {
    if epsilon < 0.0 || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = space.dim();
    let mut data = Vec::with_capacity(space.len() * dim);
    for row in space.rows() {
        let row_norm = crate::linalg::norm(row);
        let mut direction: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let dn = crate::linalg::norm(&direction);
        // Uniform in the ball of radius epsilon * |row|.
        let magnitude =
            rng.random::<f64>().powf(1.0 / dim as f64) * epsilon * row_norm;
        if dn > 0.0 && magnitude > 0.0 {
            for d in &mut direction {
                *d *= magnitude / dn;
            }
            for (v, d) in row.iter().zip(&direction) {
                data.push(v + d);
            }
        } else {
            data.extend_from_slice(row);
        }
    }
    Ok(EmbeddingSpace::from_flat_unchecked(
        space.name().to_string(),
        space.ids().to_vec(),
        data,
        dim,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;
    use approx::assert_abs_diff_eq;

    fn gaussian_space(n: usize, d: usize, seed: u64) -> EmbeddingSpace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ids = (0..n).map(|i| format!("s{i}")).collect();
        let rows = (0..n)
            .map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        EmbeddingSpace::from_rows("gauss", ids, rows).unwrap()
    }

    #[test]
    fn random_orthogonal_is_orthogonal() {
        for d in [1, 2, 7, 33] {
            let q = random_orthogonal(d, 5);
            assert!(q.orthogonality_defect() < 1e-12, "d={d}");
        }
    }

    #[test]
    fn random_orthogonal_preserves_norms() {
        let d = 16;
        let q = random_orthogonal(d, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            assert_abs_diff_eq!(norm(&q.matvec(&v)), norm(&v), epsilon = 1e-12);
        }
    }

    #[test]
    fn random_orthogonal_is_deterministic() {
        let a = random_orthogonal(8, 123);
        let b = random_orthogonal(8, 123);
        assert_eq!(a.data(), b.data());
    }

    #[test]
    fn both_determinant_signs_occur_across_seeds() {
        let mut signs = std::collections::HashSet::new();
        for seed in 0..16 {
            let q = random_orthogonal(5, seed);
            let s = determinant_sign(&q);
            assert!((s.abs() - 1.0).abs() < 1e-9);
            signs.insert(s as i64);
        }
        assert_eq!(signs.len(), 2, "reflections should occur");
    }

    #[test]
    fn identity_spec_is_a_no_op() {
        let space = gaussian_space(5, 3, 1);
        let out = apply(&space, &TransformSpec::identity()).unwrap();
        for (a, b) in space.rows().zip(out.rows()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn pure_scale_doubles_norms_keeps_cosines() {
        use crate::relative::cosine;
        let space = gaussian_space(6, 4, 2);
        let spec = TransformSpec {
            kind: TransformKind::Composite,
            seed: 0,
            scale: 2.0,
            orthogonal: None,
            translation: None,
        };
        let out = apply(&space, &spec).unwrap();
        for (a, b) in space.l2_norms().iter().zip(out.l2_norms()) {
            assert_abs_diff_eq!(a * 2.0, b, epsilon = 1e-12);
        }
        for i in 0..space.len() {
            for j in i + 1..space.len() {
                assert_abs_diff_eq!(
                    cosine(space.row(i), space.row(j)).unwrap(),
                    cosine(out.row(i), out.row(j)).unwrap(),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn angle_preserving_specs_preserve_pairwise_cosines() {
        use crate::relative::cosine;
        let space = gaussian_space(8, 6, 3);
        for seed in 0..5 {
            let spec = TransformSpec::random_angle_preserving(6, seed, 3.7).unwrap();
            let out = apply(&space, &spec).unwrap();
            for i in 0..space.len() {
                for j in i + 1..space.len() {
                    assert_abs_diff_eq!(
                        cosine(space.row(i), space.row(j)).unwrap(),
                        cosine(out.row(i), out.row(j)).unwrap(),
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn apply_rejects_mismatched_translation() {
        let space = gaussian_space(4, 3, 4);
        let spec = TransformSpec::identity().with_translation(vec![1.0, 2.0]);
        assert!(matches!(
            apply(&space, &spec),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bounded_distortion_zero_epsilon_is_identity() {
        let space = gaussian_space(5, 4, 6);
        let out = bounded_distortion(&space, 0.0, 7).unwrap();
        for (a, b) in space.rows().zip(out.rows()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn bounded_distortion_respects_per_row_bound() {
        let space = gaussian_space(20, 8, 8);
        let eps = 0.25;
        let out = bounded_distortion(&space, eps, 9).unwrap();
        for (a, b) in space.rows().zip(out.rows()) {
            let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
            assert!(norm(&diff) <= eps * norm(a) + 1e-12);
        }
    }

    #[test]
    fn bounded_distortion_is_deterministic() {
        let space = gaussian_space(5, 4, 10);
        let a = bounded_distortion(&space, 0.1, 11).unwrap();
        let b = bounded_distortion(&space, 0.1, 11).unwrap();
        for (x, y) in a.rows().zip(b.rows()) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn permutation_spec_is_orthogonal() {
        let spec = TransformSpec::permutation(6, 3);
        let q = spec.orthogonal.as_ref().unwrap();
        assert!(q.orthogonality_defect() < 1e-15);
        assert_eq!(spec.kind, TransformKind::Permutation);
    }
}
