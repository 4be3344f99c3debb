use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::SeedSpec;

/// Hyper-parameters of the prototype-contrastive trainer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContrastiveConfig {
    pub embed_dim: usize,
    pub tau: f64,
    pub epochs: usize,
    /// Peak learning rate; decays to zero on a half cosine.
    pub lr: f64,
    pub seed: SeedSpec,
}

impl Default for ContrastiveConfig {
    fn default() -> Self {
        Self {
            embed_dim: 32,
            tau: 0.07,
            epochs: 500,
            lr: 0.1,
            seed: SeedSpec::default(),
        }
    }
}

impl ContrastiveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::param("tau", format!("must be positive, got {}", self.tau)));
        }
        if self.embed_dim == 0 {
            return Err(Error::param("embed_dim", "must be positive"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::param("lr", "must be positive"));
        }
        Ok(())
    }
}

/// `-log softmax(sims / tau)[label]`, evaluated stably.
pub fn contrastive_loss(sims: &[f64], label: usize, tau: f64) -> f64 {
    let m = sims.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m / tau + sims.iter().map(|s| ((s - m) / tau).exp()).sum::<f64>().ln();
    lse - sims[label] / tau
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Linear embedding plus one unit prototype per class, scored by cosine.
///
/// Descriptors are scaled to unit length and standardized with training
/// statistics before the embedding, so predictions do not depend on the
/// descriptor's overall scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrototypeClassifier {
    pub input_dim: usize,
    pub embed_dim: usize,
    pub classes: usize,
    pub tau: f64,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// Row-major `embed_dim x input_dim`.
    pub embedding: Vec<f64>,
    /// Row-major `classes x embed_dim`, rows of unit length.
    pub prototypes: Vec<f64>,
    pub final_loss: f64,
}

/// Loss gradients with respect to the embedding and the raw prototypes.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub embedding: Vec<f64>,
    pub prototypes: Vec<f64>,
}

impl PrototypeClassifier {
    /// Builds a classifier without standardization; prototypes are normalized.
    pub fn from_parts(
        input_dim: usize,
        embed_dim: usize,
        tau: f64,
        embedding: Vec<f64>,
        prototypes: Vec<f64>,
    ) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::param("tau", "must be positive"));
        }
        if embedding.len() != input_dim * embed_dim || embed_dim == 0 || !prototypes.len().is_multiple_of(embed_dim) {
            return Err(Error::Dimension("embedding or prototype sizes do not match".into()));
        }
        let classes = prototypes.len() / embed_dim;
        let mut c = Self {
            input_dim,
            embed_dim,
            classes,
            tau,
            mean: vec![0.0; input_dim],
            scale: vec![1.0; input_dim],
            embedding,
            prototypes,
            final_loss: f64::NAN,
        };
        c.normalize_prototypes();
        Ok(c)
    }

    fn normalize_prototypes(&mut self) {
        for row in self.prototypes.chunks_mut(self.embed_dim) {
            let n = norm(row);
            if n > 0.0 {
                row.iter_mut().for_each(|v| *v /= n);
            }
        }
    }

    /// Unit-scaled, standardized input; `None` for the zero descriptor.
    fn prepare(&self, x: &[f64]) -> Option<Vec<f64>> {
        let n = norm(x);
        if n == 0.0 {
            return None;
        }
        Some(
            x.iter()
                .zip(self.mean.iter().zip(&self.scale))
                .map(|(v, (m, s))| (v / n - m) / s)
                .collect(),
        )
    }

    fn embed(&self, z: &[f64]) -> Vec<f64> {
        self.embedding.chunks(self.input_dim).map(|row| dot(row, z)).collect()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::Dimension(format!(
                "descriptor has {} entries, classifier expects {}",
                x.len(),
                self.input_dim
            )));
        }
        Ok(())
    }

    /// Cosine similarity of the embedded descriptor to every prototype.
    pub fn similarities(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let Some(z) = self.prepare(x) else {
            return Ok(vec![0.0; self.classes]);
        };
        let v = self.embed(&z);
        let r = norm(&v);
        if r == 0.0 {
            return Ok(vec![0.0; self.classes]);
        }
        Ok(self
            .prototypes
            .chunks(self.embed_dim)
            .map(|t| dot(&v, t) / (r * norm(t)))
            .collect())
    }

    /// Mean contrastive loss over a batch.
    pub fn loss(&self, xs: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
        Ok(self.loss_and_gradients(xs, labels)?.0)
    }

    /// Mean loss and its exact gradients.
    ///
    /// Prototypes enter through `t / |t|`, so the prototype gradient is the
    /// one of the raw parameter before renormalization.
    pub fn loss_and_gradients(&self, xs: &[Vec<f64>], labels: &[usize]) -> Result<(f64, Gradients)> {
        if xs.len() != labels.len() || xs.is_empty() {
            return Err(Error::Dimension(format!(
                "{} descriptors for {} labels",
                xs.len(),
                labels.len()
            )));
        }
        let (d, k) = (self.embed_dim, self.classes);
        let t_norm: Vec<f64> = self.prototypes.chunks(d).map(norm).collect();
        let t_hat: Vec<f64> = self
            .prototypes
            .chunks(d)
            .zip(&t_norm)
            .flat_map(|(t, n)| t.iter().map(move |v| v / n))
            .collect();
        let mut g_w = vec![0.0; self.embedding.len()];
        let mut c_t = vec![0.0; k * d];
        let inv_n = 1.0 / xs.len() as f64;
        let mut total = 0.0;
        for (x, &y) in xs.iter().zip(labels) {
            self.check_dim(x)?;
            if y >= k {
                return Err(Error::param("labels", format!("label {y} outside {k} classes")));
            }
            let z = self.prepare(x);
            let v = z.as_ref().map(|z| self.embed(z)).unwrap_or_else(|| vec![0.0; d]);
            let r = norm(&v);
            let v_hat: Vec<f64> = if r > 0.0 {
                v.iter().map(|a| a / r).collect()
            } else {
                vec![0.0; d]
            };
            let sims: Vec<f64> = t_hat.chunks(d).map(|t| dot(&v_hat, t)).collect();
            total += contrastive_loss(&sims, y, self.tau);

            let m = sims.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = sims.iter().map(|s| ((s - m) / self.tau).exp()).collect();
            let se: f64 = e.iter().sum();
            let g: Vec<f64> = e
                .iter()
                .enumerate()
                .map(|(j, ej)| (ej / se - if j == y { 1.0 } else { 0.0 }) * inv_n / self.tau)
                .collect();
            for (j, gj) in g.iter().enumerate() {
                for (c, vh) in c_t[j * d..(j + 1) * d].iter_mut().zip(&v_hat) {
                    *c += gj * vh;
                }
            }
            let (Some(z), true) = (z, r > 0.0) else { continue };
            let mut a = vec![0.0; d];
            for (j, gj) in g.iter().enumerate() {
                for (ai, ti) in a.iter_mut().zip(&t_hat[j * d..(j + 1) * d]) {
                    *ai += gj * ti;
                }
            }
            let av = dot(&a, &v_hat);
            for (i, row) in g_w.chunks_mut(self.input_dim).enumerate() {
                let b = (a[i] - av * v_hat[i]) / r;
                for (gw, zj) in row.iter_mut().zip(&z) {
                    *gw += b * zj;
                }
            }
        }
        let mut g_t = vec![0.0; k * d];
        for j in 0..k {
            let th = &t_hat[j * d..(j + 1) * d];
            let c = &c_t[j * d..(j + 1) * d];
            let ct = dot(c, th);
            for i in 0..d {
                g_t[j * d + i] = (c[i] - ct * th[i]) / t_norm[j];
            }
        }
        Ok((
            total * inv_n,
            Gradients {
                embedding: g_w,
                prototypes: g_t,
            },
        ))
    }
}

fn check_labels(n: usize, labels: &[usize]) -> Result<usize> {
    if n != labels.len() || n == 0 {
        return Err(Error::Dimension(format!("{n} descriptors for {} labels", labels.len())));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; classes];
    labels.iter().for_each(|&y| counts[y] += 1);
    if classes < 2 || counts.iter().any(|&c| c < 2) {
        return Err(Error::Degenerate(format!(
            "need at least 2 classes with 2 samples each, got counts {counts:?}"
        )));
    }
    Ok(classes)
}

/// Full-batch gradient descent on the prototype-contrastive loss.
pub fn train_contrastive(xs: &[Vec<f64>], labels: &[usize], cfg: &ContrastiveConfig) -> Result<PrototypeClassifier> {
    cfg.validate()?;
    let classes = check_labels(xs.len(), labels)?;
    let dim = xs[0].len();
    if dim == 0 || xs.iter().any(|x| x.len() != dim) {
        return Err(Error::Dimension("descriptors must share one nonzero length".into()));
    }

    let units: Vec<Vec<f64>> = xs
        .iter()
        .filter_map(|x| {
            let n = norm(x);
            (n > 0.0).then(|| x.iter().map(|v| v / n).collect())
        })
        .collect();
    let mut mean = vec![0.0; dim];
    let mut scale = vec![1.0; dim];
    if !units.is_empty() {
        let m = units.len() as f64;
        for u in &units {
            mean.iter_mut().zip(u).for_each(|(a, v)| *a += v / m);
        }
        for (j, s) in scale.iter_mut().enumerate() {
            let var = units.iter().map(|u| (u[j] - mean[j]).powi(2)).sum::<f64>() / m;
            *s = if var > 1e-24 { var.sqrt() } else { 1.0 };
        }
    }

    let mut rng = cfg.seed.stream("bench/contrastive/init");
    let w_scale = 1.0 / (dim as f64).sqrt();
    let embedding = (0..cfg.embed_dim * dim)
        .map(|_| w_scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let prototypes = (0..classes * cfg.embed_dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut c = PrototypeClassifier::from_parts(dim, cfg.embed_dim, cfg.tau, embedding, prototypes)?;
    c.mean = mean;
    c.scale = scale;

    let mut loss = f64::NAN;
    for epoch in 0..cfg.epochs {
        let (l, g) = c.loss_and_gradients(xs, labels)?;
        if !l.is_finite() || g.embedding.iter().chain(&g.prototypes).any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "contrastive loss became non-finite at epoch {epoch} (loss {l}, tau {}, lr {})",
                cfg.tau, cfg.lr
            )));
        }
        loss = l;
        let lr = cfg.lr * 0.5 * (1.0 + (std::f64::consts::PI * epoch as f64 / cfg.epochs as f64).cos());
        c.embedding.iter_mut().zip(&g.embedding).for_each(|(w, d)| *w -= lr * d);
        c.prototypes
            .iter_mut()
            .zip(&g.prototypes)
            .for_each(|(t, d)| *t -= lr * d);
        c.normalize_prototypes();
    }
    if cfg.epochs > 0 || loss.is_nan() {
        loss = c.loss(xs, labels)?;
    }
    c.final_loss = loss;
    Ok(c)
}

fn argmax_lowest(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Highest-similarity class, ties to the lowest id, with all similarities.
pub fn classify(c: &PrototypeClassifier, x: &[f64]) -> Result<(usize, Vec<f64>)> {
    let sims = c.similarities(x)?;
    Ok((argmax_lowest(&sims), sims))
}

/// Fraction of correct predictions.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    predicted.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

/// Euclidean nearest class mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NearestCentroid {
    /// One row per class id; `None` for ids absent from training.
    pub centroids: Vec<Option<Vec<f64>>>,
}

impl NearestCentroid {
    pub fn fit(xs: &[Vec<f64>], labels: &[usize]) -> Result<Self> {
        if xs.len() != labels.len() || xs.is_empty() {
            return Err(Error::Dimension(format!(
                "{} descriptors for {} labels",
                xs.len(),
                labels.len()
            )));
        }
        let dim = xs[0].len();
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        let mut sums = vec![vec![0.0; dim]; classes];
        let mut counts = vec![0usize; classes];
        for (x, &y) in xs.iter().zip(labels) {
            if x.len() != dim {
                return Err(Error::Dimension("descriptors must share one length".into()));
            }
            sums[y].iter_mut().zip(x).for_each(|(s, v)| *s += v);
            counts[y] += 1;
        }
        let centroids = sums
            .into_iter()
            .zip(counts)
            .map(|(s, n)| (n > 0).then(|| s.into_iter().map(|v| v / n as f64).collect()))
            .collect();
        Ok(Self { centroids })
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (k, c) in self.centroids.iter().enumerate() {
            let Some(c) = c else { continue };
            if c.len() != x.len() {
                return Err(Error::Dimension(format!(
                    "descriptor has {} entries, centroid {}",
                    x.len(),
                    c.len()
                )));
            }
            let d: f64 = c.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((k, d));
            }
        }
        best.map(|(k, _)| k)
            .ok_or_else(|| Error::Degenerate("nearest-centroid model has no classes".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_batch(classes: usize, per: usize, dim: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = SeedSpec::new(seed).stream("test/batch");
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for y in 0..classes {
            for _ in 0..per {
                xs.push((0..dim).map(|_| rng.random_range(0.0..1.0)).collect());
                ys.push(y);
            }
        }
        (xs, ys)
    }

    #[test]
    fn equal_similarities_give_log_classes() {
        let sims = [0.3; 8];
        assert!((contrastive_loss(&sims, 2, 0.07) - 8f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gradients_match_central_differences() {
        let (xs, ys) = random_batch(3, 4, 6, 11);
        let cfg = ContrastiveConfig {
            embed_dim: 4,
            tau: 0.5,
            epochs: 0,
            ..Default::default()
        };
        let mut c = train_contrastive(&xs, &ys, &cfg).unwrap();
        // perturb prototypes off the unit sphere so their gradient is exercised in general position
        c.prototypes
            .iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v *= 1.0 + 0.1 * i as f64);
        let (_, g) = c.loss_and_gradients(&xs, &ys).unwrap();
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for i in 0..c.embedding.len() {
            let mut p = c.clone();
            p.embedding[i] += h;
            let mut m = c.clone();
            m.embedding[i] -= h;
            let fd = (p.loss(&xs, &ys).unwrap() - m.loss(&xs, &ys).unwrap()) / (2.0 * h);
            worst = worst.max((fd - g.embedding[i]).abs() / fd.abs().max(g.embedding[i].abs()).max(1e-3));
        }
        for i in 0..c.prototypes.len() {
            let mut p = c.clone();
            p.prototypes[i] += h;
            let mut m = c.clone();
            m.prototypes[i] -= h;
            let fd = (p.loss(&xs, &ys).unwrap() - m.loss(&xs, &ys).unwrap()) / (2.0 * h);
            worst = worst.max((fd - g.prototypes[i]).abs() / fd.abs().max(g.prototypes[i].abs()).max(1e-3));
        }
        assert!(worst < 1e-4, "worst relative gradient error {worst}");
    }

    #[test]
    fn zero_descriptor_goes_to_class_zero() {
        let (xs, ys) = random_batch(3, 3, 5, 2);
        let c = train_contrastive(
            &xs,
            &ys,
            &ContrastiveConfig {
                epochs: 5,
                ..Default::default()
            },
        )
        .unwrap();
        let (k, sims) = classify(&c, &[0.0; 5]).unwrap();
        assert_eq!(k, 0);
        assert!(sims.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn rejects_bad_inputs() {
        let (xs, ys) = random_batch(2, 2, 3, 1);
        let bad = ContrastiveConfig {
            tau: 0.0,
            ..Default::default()
        };
        assert!(train_contrastive(&xs, &ys, &bad).is_err());
        assert!(train_contrastive(&xs[..3], &ys[..3], &ContrastiveConfig::default()).is_err());
        let c = train_contrastive(
            &xs,
            &ys,
            &ContrastiveConfig {
                epochs: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(classify(&c, &[1.0; 4]).is_err());
    }

    #[test]
    fn nearest_centroid_picks_closest_mean() {
        let xs = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![4.0, 4.0], vec![5.0, 4.0]];
        let nc = NearestCentroid::fit(&xs, &[0, 0, 1, 1]).unwrap();
        assert_eq!(nc.predict(&[0.5, 1.0]).unwrap(), 0);
        assert_eq!(nc.predict(&[4.0, 3.0]).unwrap(), 1);
        // equidistant: lowest id
        assert_eq!(nc.predict(&[2.5, 2.0]).unwrap(), 0);
    }
}
