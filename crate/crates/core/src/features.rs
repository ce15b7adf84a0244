//! Kernelized covariates: replace each `z` by its kernel evaluations
//! against the training covariates, so the linear margin machinery
//! picks up non-linear maps.

use crate::error::{Error, Result};
use crate::margin::TrainingSample;
use crate::{Matrix, Vector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum KernelSpec {
    Linear,
    /// `κ(u, v) = (uᵀv/γ + 1)^degree`
    Polynomial { gamma: f64, degree: u32 },
    /// `κ(u, v) = exp(−‖u − v‖²/γ)`
    Rbf { gamma: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Polynomial { gamma, degree } => {
                if gamma <= 0.0 {
                    Err(Error::Config("kernel gamma must be positive".into()))
                } else if degree == 0 {
                    Err(Error::Config("kernel degree must be at least 1".into()))
                } else {
                    Ok(())
                }
            }
            KernelSpec::Rbf { gamma } => {
                if gamma <= 0.0 {
                    Err(Error::Config("kernel gamma must be positive".into()))
                } else {
                    Ok(())
                }
            }
        }
    }
}

pub fn kernel_eval(spec: &KernelSpec, z1: &Vector, z2: &Vector) -> f64 {
    debug_assert_eq!(z1.len(), z2.len());
    match *spec {
        KernelSpec::Linear => z1.dot(z2),
        KernelSpec::Polynomial { gamma, degree } => {
            (z1.dot(z2) / gamma + 1.0).powi(degree as i32)
        }
        KernelSpec::Rbf { gamma } => (-(z1 - z2).norm_squared() / gamma).exp(),
    }
}

/// Maps new covariates into the span of the training set: the feature
/// of `z` is `(κ(z, z_t))_t`, optionally scaled so every training row
/// has norm at most one (keeps the boundedness assumptions alive).
#[derive(Debug, Clone)]
pub struct KernelTransformer {
    spec: KernelSpec,
    train_z: Vec<Vector>,
    scale: f64,
}

impl KernelTransformer {
    pub fn transform(&self, z: &Vector) -> Vector {
        Vector::from_fn(self.train_z.len(), |t, _| {
            self.scale * kernel_eval(&self.spec, z, &self.train_z[t])
        })
    }

    pub fn feature_dim(&self) -> usize {
        self.train_z.len()
    }
}

/// Kernelizes a training set. Each sample's covariates become its Gram
/// row against the whole set; the returned transformer applies the same
/// map to unseen covariates.
pub fn kernelize_dataset(
    train: &[TrainingSample],
    spec: &KernelSpec,
    normalize: bool,
) -> Result<(Vec<TrainingSample>, KernelTransformer)> {
    spec.validate()?;
    if train.is_empty() {
        return Err(Error::Config("empty dataset".into()));
    }
    let train_z: Vec<Vector> = train.iter().map(|s| s.z().clone()).collect();
    let mut transformer = KernelTransformer {
        spec: *spec,
        train_z,
        scale: 1.0,
    };
    if normalize {
        let max_norm = transformer
            .train_z
            .iter()
            .map(|z| transformer.transform(z).norm())
            .fold(0.0, f64::max);
        if max_norm > 0.0 {
            transformer.scale = 1.0 / max_norm;
        }
    }
    let transformed = train
        .iter()
        .map(|s| s.with_covariates(transformer.transform(s.z())))
        .collect();
    Ok((transformed, transformer))
}

/// Gram matrix of the covariates under the kernel (unscaled).
pub fn gram_matrix(spec: &KernelSpec, zs: &[Vector]) -> Matrix {
    Matrix::from_fn(zs.len(), zs.len(), |i, j| kernel_eval(spec, &zs[i], &zs[j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kernel_values() {
        let z = Vector::from_row_slice(&[0.3, -0.7]);
        let rbf = KernelSpec::Rbf { gamma: 2.5 };
        assert_abs_diff_eq!(kernel_eval(&rbf, &z, &z), 1.0, epsilon = 1e-15);
        let poly = KernelSpec::Polynomial {
            gamma: 1.0,
            degree: 2,
        };
        let zero = Vector::zeros(2);
        assert_abs_diff_eq!(kernel_eval(&poly, &zero, &zero), 1.0, epsilon = 1e-15);
        let ones = Vector::from_row_slice(&[1.0, 1.0]);
        let poly = KernelSpec::Polynomial {
            gamma: 2.0,
            degree: 2,
        };
        assert_abs_diff_eq!(kernel_eval(&poly, &ones, &ones), 4.0, epsilon = 1e-15);
    }

    #[test]
    fn kernel_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let specs = [
            KernelSpec::Linear,
            KernelSpec::Polynomial {
                gamma: 1.7,
                degree: 3,
            },
            KernelSpec::Rbf { gamma: 0.9 },
        ];
        for _ in 0..50 {
            let a = Vector::from_fn(4, |_, _| rng.random_range(-1.0..1.0));
            let b = Vector::from_fn(4, |_, _| rng.random_range(-1.0..1.0));
            for spec in &specs {
                assert_abs_diff_eq!(
                    kernel_eval(spec, &a, &b),
                    kernel_eval(spec, &b, &a),
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn gram_matrices_are_positive_semidefinite() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let zs: Vec<Vector> = (0..12)
            .map(|_| Vector::from_fn(3, |_, _| rng.random_range(-1.0..1.0)))
            .collect();
        for spec in [
            KernelSpec::Rbf { gamma: 1.0 },
            KernelSpec::Polynomial {
                gamma: 2.0,
                degree: 3,
            },
        ] {
            let gram = gram_matrix(&spec, &zs);
            let eig = gram.symmetric_eigen();
            let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-8, "min eigenvalue {min}");
        }
        // RBF diagonals are exactly one.
        let gram = gram_matrix(&KernelSpec::Rbf { gamma: 0.5 }, &zs);
        for i in 0..zs.len() {
            assert_abs_diff_eq!(gram[(i, i)], 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn linear_kernel_on_orthonormal_covariates_gives_identity_gram() {
        let zs = vec![
            Vector::from_row_slice(&[1.0, 0.0]),
            Vector::from_row_slice(&[0.0, 1.0]),
        ];
        let gram = gram_matrix(&KernelSpec::Linear, &zs);
        assert_abs_diff_eq!((gram - Matrix::identity(2, 2)).amax(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn transformer_reproduces_training_rows() {
        use crate::datagen::{gen_trial, FkGenConfig, GenConfig, KnapsackSpec, PriceMode};
        let cfg = GenConfig::Fk(FkGenConfig {
            spec: KnapsackSpec {
                n_items: 4,
                d: 3,
                price_mode: PriceMode::Uniform01,
            },
            ..FkGenConfig::default()
        });
        let (_, data) = gen_trial(&cfg, 31, 8).unwrap();
        let samples: Vec<_> = data.into_iter().map(|s| s.sample).collect();
        let spec = KernelSpec::Rbf { gamma: 1.5 };
        let (transformed, transformer) = kernelize_dataset(&samples, &spec, true).unwrap();
        for (orig, lifted) in samples.iter().zip(&transformed) {
            let again = transformer.transform(orig.z());
            assert_abs_diff_eq!((lifted.z() - again).amax(), 0.0, epsilon = 1e-14);
            assert!(lifted.z().norm() <= 1.0 + 1e-12);
        }
    }
}
