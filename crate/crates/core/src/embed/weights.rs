//! Named parameter bundles.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::EmbedConfig;
use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightBundle {
    pub params: BTreeMap<String, Tensor>,
    pub config_hash: String,
    pub seed: u64,
}

impl WeightBundle {
    /// Uniform `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` for weights and biases;
    /// layer norms start at the identity.
    pub fn init(cfg: &EmbedConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = BTreeMap::new();
        let shapes = cfg.parameter_shapes();
        let fan_in: BTreeMap<String, usize> = shapes
            .iter()
            .filter(|(n, s)| n.ends_with(".weight") && s.len() == 2)
            .map(|(n, s)| (n.trim_end_matches(".weight").to_string(), s[1]))
            .collect();
        for (name, shape) in shapes {
            let n: usize = shape.iter().product();
            let data: Vec<f32> = if name.ends_with(".gamma") {
                vec![1.0; n]
            } else if name.ends_with(".beta") {
                vec![0.0; n]
            } else {
                let fi = if shape.len() == 2 {
                    shape[1]
                } else {
                    let stem = name.trim_end_matches(".bias");
                    fan_in.get(stem).copied().unwrap_or(shape[0])
                };
                let bound = 1.0 / (fi as f32).sqrt();
                (0..n).map(|_| rng.random_range(-bound..=bound)).collect()
            };
            params.insert(name, Tensor::new(shape, data).expect("finite"));
        }
        Self {
            params,
            config_hash: cfg.config_hash(),
            seed,
        }
    }

    /// Every parameter set to `value`, layer norms included.
    pub fn constant(cfg: &EmbedConfig, value: f32) -> Self {
        let params = cfg
            .parameter_shapes()
            .into_iter()
            .map(|(name, shape)| {
                let t = Tensor::filled(&shape, value);
                (name, t)
            })
            .collect();
        Self {
            params,
            config_hash: cfg.config_hash(),
            seed: 0,
        }
    }

    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.params
            .get(name)
            .ok_or_else(|| Error::Config(format!("missing parameter {name}")))
    }

    /// Checks that every parameter the configuration needs is present with
    /// its exact shape, and that nothing else is.
    pub fn check(&self, cfg: &EmbedConfig) -> Result<()> {
        let shapes = cfg.parameter_shapes();
        for (name, shape) in &shapes {
            let t = self.get(name)?;
            if t.shape() != shape.as_slice() {
                return Err(Error::shape(shape, t.shape(), name.clone()));
            }
        }
        if self.params.len() != shapes.len() {
            let known: std::collections::BTreeSet<&str> = shapes.iter().map(|(n, _)| n.as_str()).collect();
            let extra: Vec<&str> = self
                .params
                .keys()
                .map(String::as_str)
                .filter(|n| !known.contains(n))
                .collect();
            return Err(Error::Config(format!("unexpected parameters: {}", extra.join(", "))));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_seeded_and_complete() {
        let cfg = EmbedConfig::default();
        let a = WeightBundle::init(&cfg, 3);
        assert_eq!(a, WeightBundle::init(&cfg, 3));
        assert_ne!(a, WeightBundle::init(&cfg, 4));
        a.check(&cfg).unwrap();
        let w = a.get("vertex.0.weight").unwrap();
        assert_eq!(w.shape(), &[64, 3]);
        let bound = 1.0 / 3f32.sqrt();
        assert!(w.data().iter().all(|v| v.abs() <= bound));
        assert!(a.get("tri_seq.1.norm2.gamma").unwrap().data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let cfg = EmbedConfig::default();
        let mut w = WeightBundle::init(&cfg, 0);
        w.params.insert("curve.0.weight".into(), Tensor::zeros(&[64, 14]));
        let err = w.check(&cfg).unwrap_err().to_string();
        assert!(err.contains("[64, 15]") && err.contains("[64, 14]"), "{err}");
    }
}
