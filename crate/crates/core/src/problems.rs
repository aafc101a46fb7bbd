//! Synthetic benchmark problems: noisy univariate linear regression and a diagonal quadratic bowl.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{OptimError, Result};
use crate::objective::{Batch, Gradient, Objective};
use crate::optimizer::BatchSource;

/// Parameters of `y = w0·x + b0 + ε`, `ε ~ N(0, noise_std²)`, `x ~ U[x_min, x_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinRegSpec {
    pub w0: f64,
    pub b0: f64,
    pub noise_std: f64,
    pub n: usize,
    pub seed: u64,
    pub x_min: f64,
    pub x_max: f64,
}

impl Default for LinRegSpec {
    fn default() -> Self {
        Self { w0: 5.0, b0: 9.0, noise_std: 1.0, n: 10_000, seed: 42, x_min: 0.0, x_max: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `(mean, std)` of the raw feature when normalized.
    pub norm_params: Option<(f64, f64)>,
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(OptimError::DimensionMismatch { expected: x.len(), got: y.len() });
        }
        Ok(Self { x, y, norm_params: None })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn normalized(&self) -> bool {
        self.norm_params.is_some()
    }

    /// Writes `x,y` rows with a header.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "y"])?;
        for (x, y) in self.x.iter().zip(&self.y) {
            wr.write_record([format!("{x:.16e}"), format!("{y:.16e}")])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> std::result::Result<Self, csv::Error> {
        #[derive(Deserialize)]
        struct Row {
            x: f64,
            y: f64,
        }
        let mut x = Vec::new();
        let mut y = Vec::new();
        for row in csv::Reader::from_reader(r).deserialize() {
            let row: Row = row?;
            x.push(row.x);
            y.push(row.y);
        }
        Ok(Self { x, y, norm_params: None })
    }
}

pub fn gen_linear_data(spec: &LinRegSpec) -> Result<Dataset> {
    if spec.n == 0 {
        return Err(OptimError::InvalidConfig("sample count must be >= 1".into()));
    }
    if !(spec.noise_std >= 0.0) {
        return Err(OptimError::InvalidConfig(format!("noise std must be >= 0, got {}", spec.noise_std)));
    }
    if !(spec.x_max > spec.x_min) {
        return Err(OptimError::InvalidConfig("feature interval is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let feature = Uniform::new(spec.x_min, spec.x_max).map_err(|e| OptimError::InvalidConfig(e.to_string()))?;
    let noise = Normal::new(0.0, spec.noise_std).map_err(|e| OptimError::InvalidConfig(e.to_string()))?;
    let mut x = Vec::with_capacity(spec.n);
    let mut y = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let xi = feature.sample(&mut rng);
        let eps = if spec.noise_std > 0.0 { noise.sample(&mut rng) } else { 0.0 };
        x.push(xi);
        y.push(spec.w0 * xi + spec.b0 + eps);
    }
    Ok(Dataset { x, y, norm_params: None })
}

/// Standardize the feature with its sample mean and sample (n−1) standard deviation.
pub fn normalize(data: &Dataset) -> Result<Dataset> {
    let n = data.len();
    if n < 2 {
        return Err(OptimError::ZeroVariance);
    }
    let mean = data.x.iter().sum::<f64>() / n as f64;
    let var = data.x.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let std = var.sqrt();
    if !(std > 0.0) {
        return Err(OptimError::ZeroVariance);
    }
    Ok(Dataset {
        x: data.x.iter().map(|x| (x - mean) / std).collect(),
        y: data.y.clone(),
        norm_params: Some((mean, std)),
    })
}

/// Mean squared error of `y ≈ W·x + b` over `θ = (W, b)`.
#[derive(Debug, Clone)]
pub struct LinRegObjective {
    data: Dataset,
}

impl LinRegObjective {
    pub fn new(data: Dataset) -> Result<Self> {
        if data.is_empty() {
            return Err(OptimError::EmptyBatch);
        }
        Ok(Self { data })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    fn for_each_residual(&self, theta: &[f64], batch: Batch<'_>, mut f: impl FnMut(f64, f64)) -> usize {
        let (w, b) = (theta[0], theta[1]);
        match batch {
            Batch::Full => {
                for (x, y) in self.data.x.iter().zip(&self.data.y) {
                    f(*x, w * x + b - y);
                }
                self.data.len()
            }
            Batch::Indices(idx) => {
                for &j in idx {
                    let x = self.data.x[j];
                    f(x, w * x + b - self.data.y[j]);
                }
                idx.len()
            }
        }
    }
}

impl Objective for LinRegObjective {
    fn dim(&self) -> usize {
        2
    }

    fn loss(&self, theta: &[f64], batch: Batch<'_>) -> f64 {
        let mut sum = 0.0;
        let n = self.for_each_residual(theta, batch, |_, r| sum += r * r);
        sum / n as f64
    }

    fn grad(&self, theta: &[f64], batch: Batch<'_>) -> Gradient {
        let (mut gw, mut gb) = (0.0, 0.0);
        let n = self.for_each_residual(theta, batch, |x, r| {
            gw += x * r;
            gb += r;
        });
        let n = n as f64;
        Gradient::new(vec![2.0 * gw / n, 2.0 * gb / n])
    }
}

/// `f(θ) = ½ Σ h_i θ_i²`, independent of the batch.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    curvatures: Vec<f64>,
}

impl QuadraticObjective {
    pub fn new(curvatures: Vec<f64>) -> Result<Self> {
        if curvatures.is_empty() || curvatures.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(OptimError::InvalidConfig("curvatures must be non-empty and positive".into()));
        }
        Ok(Self { curvatures })
    }

    pub fn curvatures(&self) -> &[f64] {
        &self.curvatures
    }
}

impl Objective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.curvatures.len()
    }

    fn loss(&self, theta: &[f64], _: Batch<'_>) -> f64 {
        0.5 * self.curvatures.iter().zip(theta).map(|(h, t)| h * t * t).sum::<f64>()
    }

    fn grad(&self, theta: &[f64], _: Batch<'_>) -> Gradient {
        Gradient::new(self.curvatures.iter().zip(theta).map(|(h, t)| h * t).collect())
    }
}

/// Shuffled mini-batches without replacement; each epoch draws a fresh seeded
/// permutation and keeps the final partial batch.
#[derive(Debug, Clone)]
pub struct BatchSampler {
    order: Vec<usize>,
    batch_size: usize,
    cursor: usize,
    epoch: usize,
    rng: ChaCha8Rng,
}

impl BatchSampler {
    pub fn new(n: usize, batch_size: usize, seed: u64) -> Result<Self> {
        if n == 0 || batch_size == 0 {
            return Err(OptimError::InvalidConfig("sampler needs n >= 1 and batch_size >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Separate stream from the data generator sharing the same seed.
        rng.set_stream(1);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        Ok(Self { order, batch_size, cursor: 0, epoch: 0, rng })
    }

    pub fn batches_per_epoch(&self) -> usize {
        self.order.len().div_ceil(self.batch_size)
    }
}

impl BatchSource for BatchSampler {
    fn next_batch(&mut self) -> (usize, Batch<'_>) {
        if self.cursor >= self.order.len() {
            self.order.shuffle(&mut self.rng);
            self.cursor = 0;
            self.epoch += 1;
        }
        let start = self.cursor;
        let end = (start + self.batch_size).min(self.order.len());
        self.cursor = end;
        (self.epoch, Batch::Indices(&self.order[start..end]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcheck::grad_check;

    fn noise_free(n: usize) -> Dataset {
        gen_linear_data(&LinRegSpec { noise_std: 0.0, n, ..Default::default() }).unwrap()
    }

    #[test]
    fn noise_free_line() {
        let d = noise_free(100);
        for (x, y) in d.x.iter().zip(&d.y) {
            assert_eq!(*y, 5.0 * x + 9.0);
            assert!((0.0..10.0).contains(x));
        }
        let single = Dataset::new(vec![1.0, 0.0], vec![14.0, 9.0]).unwrap();
        let obj = LinRegObjective::new(single).unwrap();
        assert_eq!(obj.loss(&[5.0, 9.0], Batch::Full), 0.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = LinRegSpec { n: 500, ..Default::default() };
        assert_eq!(gen_linear_data(&spec).unwrap(), gen_linear_data(&spec).unwrap());
        let other = LinRegSpec { seed: 7, ..spec.clone() };
        assert_ne!(gen_linear_data(&spec).unwrap(), gen_linear_data(&other).unwrap());
    }

    #[test]
    fn linreg_hand_arithmetic() {
        let d = Dataset::new(vec![1.0], vec![14.0]).unwrap();
        let obj = LinRegObjective::new(d).unwrap();
        assert_eq!(obj.loss(&[6.0, 9.0], Batch::Full), 1.0);
        assert_eq!(&*obj.grad(&[6.0, 9.0], Batch::Full), &[2.0, 2.0]);
    }

    #[test]
    fn linreg_exact_fit_at_true_parameters() {
        let obj = LinRegObjective::new(noise_free(1000)).unwrap();
        assert!(obj.loss(&[5.0, 9.0], Batch::Full) < 1e-12);
        assert!(obj.grad(&[5.0, 9.0], Batch::Full).l2_norm() < 1e-10);
        assert!(grad_check(&obj, &[5.0, 9.0], Batch::Full, 1e-5).unwrap() <= 1e-6);
    }

    #[test]
    fn linreg_batch_uses_only_indices() {
        let d = Dataset::new(vec![1.0, 2.0], vec![14.0, 0.0]).unwrap();
        let obj = LinRegObjective::new(d).unwrap();
        assert_eq!(obj.loss(&[5.0, 9.0], Batch::indices(&[0]).unwrap()), 0.0);
        assert!(obj.loss(&[5.0, 9.0], Batch::indices(&[1]).unwrap()) > 0.0);
    }

    #[test]
    fn empty_data_rejected() {
        assert!(LinRegObjective::new(Dataset::new(vec![], vec![]).unwrap()).is_err());
        assert!(gen_linear_data(&LinRegSpec { n: 0, ..Default::default() }).is_err());
    }

    #[test]
    fn noise_floor_matches_variance() {
        let sigma = 1.0;
        let n = 100_000;
        let d = gen_linear_data(&LinRegSpec { noise_std: sigma, n, ..Default::default() }).unwrap();
        let obj = LinRegObjective::new(d).unwrap();
        let loss = obj.loss(&[5.0, 9.0], Batch::Full);
        assert!((loss - sigma * sigma).abs() < 5.0 * sigma * sigma / (n as f64).sqrt());
    }

    #[test]
    fn quadratic_values() {
        let q = QuadraticObjective::new(vec![1.0]).unwrap();
        assert_eq!(q.loss(&[2.0], Batch::Full), 2.0);
        assert_eq!(&*q.grad(&[2.0], Batch::Full), &[2.0]);
        let q = QuadraticObjective::new(vec![1.0, 100.0]).unwrap();
        assert_eq!(q.loss(&[1.0, 1.0], Batch::Full), 50.5);
        assert_eq!(&*q.grad(&[1.0, 1.0], Batch::Full), &[1.0, 100.0]);
        assert_eq!(q.loss(&[0.0, 0.0], Batch::Full), 0.0);
        assert!(QuadraticObjective::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn normalize_two_points() {
        let d = Dataset::new(vec![0.0, 2.0], vec![1.0, 2.0]).unwrap();
        let n = normalize(&d).unwrap();
        let (mu, sigma) = n.norm_params.unwrap();
        assert_eq!(mu, 1.0);
        assert!((sigma - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(n.x[0], -n.x[1]);
        assert_eq!(n.y, d.y);
    }

    #[test]
    fn renormalize_is_identity() {
        let d = gen_linear_data(&LinRegSpec { n: 2000, ..Default::default() }).unwrap();
        let once = normalize(&d).unwrap();
        let twice = normalize(&once).unwrap();
        let (mu, sigma) = twice.norm_params.unwrap();
        assert!(mu.abs() < 1e-12);
        assert!((sigma - 1.0).abs() < 1e-12);
        for (a, b) in once.x.iter().zip(&twice.x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_feature_rejected() {
        let d = Dataset::new(vec![3.0; 5], vec![1.0; 5]).unwrap();
        assert_eq!(normalize(&d), Err(OptimError::ZeroVariance));
    }

    #[test]
    fn csv_round_trip() {
        let d = gen_linear_data(&LinRegSpec { n: 50, ..Default::default() }).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"x,y\n"));
        assert_eq!(Dataset::read_csv(&buf[..]).unwrap(), d);
    }

    #[test]
    fn sampler_covers_epoch_without_replacement() {
        let mut s = BatchSampler::new(10, 4, 3).unwrap();
        assert_eq!(s.batches_per_epoch(), 3);
        let mut seen = Vec::new();
        let mut sizes = Vec::new();
        for _ in 0..3 {
            let (epoch, b) = s.next_batch();
            assert_eq!(epoch, 0);
            let Batch::Indices(idx) = b else { panic!() };
            sizes.push(idx.len());
            seen.extend_from_slice(idx);
        }
        seen.sort();
        assert_eq!(seen, (0..10).collect::<Vec<_>>());
        assert_eq!(sizes, vec![4, 4, 2]);
        assert_eq!(s.next_batch().0, 1);
    }

    #[test]
    fn sampler_is_seeded() {
        let take = |seed| {
            let mut s = BatchSampler::new(100, 7, seed).unwrap();
            (0..30)
                .map(|_| match s.next_batch().1 {
                    Batch::Indices(i) => i.to_vec(),
                    Batch::Full => vec![],
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(take(1), take(1));
        assert_ne!(take(1), take(2));
    }
}
