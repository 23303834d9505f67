//! Joint learning of a similarity-transform regressor and a single
//! alignment prototype.
//!
//! The regressor is a one-hidden-layer tanh network over the flattened
//! normalized sample (`x0, y0, x1, y1, ...`). Its five raw outputs are
//! mapped to a [`SimilarityTransform`]:
//!
//! | output | meaning                                        |
//! |--------|------------------------------------------------|
//! | 0, 1   | translation                                    |
//! | 2, 3   | rotation direction, `alpha = atan2(o3, o2)`    |
//! | 4      | scale, `s = s_min + softplus(o4)`              |
//!
//! Predicting the rotation as a direction vector rather than a raw angle
//! lets the map from sample heading to rotation stay continuous all the
//! way round the circle. The scale floor keeps the loss from collapsing
//! every sample onto the origin.
//!
//! Training minimizes the mean squared pointwise distance between each
//! aligned sample and the prototype with plain minibatch SGD, updating the
//! regressor and the prototype in the same step.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{apply_transform, point_mse, Point2, SimilarityTransform, Trajectory};
use crate::normalize::NormalizedTrajectory;
use crate::scalar::Scalar;

pub const OUTPUT_DIM: usize = 5;
const OUT_TX: usize = 0;
const OUT_TY: usize = 1;
const OUT_ROT_COS: usize = 2;
const OUT_ROT_SIN: usize = 3;
const OUT_SCALE: usize = 4;

/// Parameters of the two-layer regressor. Matrices are row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressorParams<T> {
    input_dim: usize,
    hidden_width: usize,
    /// `hidden_width x input_dim`
    pub weights_in: Vec<T>,
    pub bias_in: Vec<T>,
    /// `OUTPUT_DIM x hidden_width`
    pub weights_out: Vec<T>,
    pub bias_out: Vec<T>,
}

impl<T: Scalar> RegressorParams<T> {
    pub fn zeros(input_dim: usize, hidden_width: usize) -> Self {
        Self {
            input_dim,
            hidden_width,
            weights_in: vec![T::zero(); hidden_width * input_dim],
            bias_in: vec![T::zero(); hidden_width],
            weights_out: vec![T::zero(); OUTPUT_DIM * hidden_width],
            bias_out: vec![T::zero(); OUTPUT_DIM],
        }
    }

    /// Uniform `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` for every weight and bias,
    /// except the rotation head, which starts at the identity direction `(1, 0)`.
    pub fn random<R: Rng>(input_dim: usize, hidden_width: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(input_dim, hidden_width);
        let bound_in = 1.0 / (input_dim as f64).sqrt();
        let bound_out = 1.0 / (hidden_width.max(1) as f64).sqrt();
        let mut fill = |v: &mut [T], b: f64| {
            for x in v {
                *x = T::lit(rng.random_range(-b..=b));
            }
        };
        fill(&mut p.weights_in, bound_in);
        fill(&mut p.bias_in, bound_in);
        fill(&mut p.weights_out, bound_out);
        fill(&mut p.bias_out, bound_out);
        p.bias_out[OUT_ROT_COS] = T::one();
        p.bias_out[OUT_ROT_SIN] = T::zero();
        p
    }

    pub fn from_parts(
        input_dim: usize,
        hidden_width: usize,
        weights_in: Vec<T>,
        bias_in: Vec<T>,
        weights_out: Vec<T>,
        bias_out: Vec<T>,
    ) -> Result<Self> {
        let shapes = [
            ("weights_in", weights_in.len(), hidden_width * input_dim),
            ("bias_in", bias_in.len(), hidden_width),
            ("weights_out", weights_out.len(), OUTPUT_DIM * hidden_width),
            ("bias_out", bias_out.len(), OUTPUT_DIM),
        ];
        for (name, got, want) in shapes {
            if got != want {
                return Err(Error::InvalidConfig(format!(
                    "{name} has {got} entries, expected {want}"
                )));
            }
        }
        let p = Self {
            input_dim,
            hidden_width,
            weights_in,
            bias_in,
            weights_out,
            bias_out,
        };
        if !p.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidConfig("regressor parameter is not finite".into()));
        }
        Ok(p)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_width(&self) -> usize {
        self.hidden_width
    }

    pub fn num_params(&self) -> usize {
        self.weights_in.len() + self.bias_in.len() + self.weights_out.len() + self.bias_out.len()
    }

    /// All parameters in declaration order.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.weights_in
            .iter()
            .chain(&self.bias_in)
            .chain(&self.weights_out)
            .chain(&self.bias_out)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.weights_in
            .iter_mut()
            .chain(&mut self.bias_in)
            .chain(&mut self.weights_out)
            .chain(&mut self.bias_out)
    }

    /// Returns the raw outputs and fills `hidden` with the tanh activations.
    fn forward(&self, x: &[T], hidden: &mut [T]) -> [T; OUTPUT_DIM] {
        debug_assert_eq!(x.len(), self.input_dim);
        for (h, out) in hidden.iter_mut().enumerate() {
            let row = &self.weights_in[h * self.input_dim..(h + 1) * self.input_dim];
            let mut z = self.bias_in[h];
            for (w, xi) in row.iter().zip(x) {
                z += *w * *xi;
            }
            *out = z.tanh();
        }
        let mut o = [T::zero(); OUTPUT_DIM];
        for (k, ok) in o.iter_mut().enumerate() {
            let row = &self.weights_out[k * self.hidden_width..(k + 1) * self.hidden_width];
            let mut z = self.bias_out[k];
            for (w, hv) in row.iter().zip(hidden.iter()) {
                z += *w * *hv;
            }
            *ok = z;
        }
        o
    }
}

/// Regressor plus the learned alignment prototype and the scale floor.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentModel<T> {
    regressor: RegressorParams<T>,
    prototype: Vec<Point2<T>>,
    s_min: T,
}

impl<T: Scalar> AlignmentModel<T> {
    pub fn new(regressor: RegressorParams<T>, prototype: Vec<Point2<T>>, s_min: T) -> Result<Self> {
        if regressor.input_dim() != 2 * prototype.len() {
            return Err(Error::LengthMismatch {
                expected: regressor.input_dim() / 2,
                found: prototype.len(),
            });
        }
        if prototype.len() < 2 {
            return Err(Error::InvalidConfig("prototype needs at least 2 points".into()));
        }
        if !(s_min > T::zero() && s_min.is_finite()) {
            return Err(Error::InvalidConfig(format!("s_min {s_min} must be positive")));
        }
        if !prototype.iter().all(|p| p.is_finite()) {
            return Err(Error::InvalidConfig("prototype point is not finite".into()));
        }
        Ok(Self {
            regressor,
            prototype,
            s_min,
        })
    }

    pub fn regressor(&self) -> &RegressorParams<T> {
        &self.regressor
    }

    pub fn prototype(&self) -> &[Point2<T>] {
        &self.prototype
    }

    pub fn s_min(&self) -> T {
        self.s_min
    }

    /// Sequence length the model was built for.
    pub fn m(&self) -> usize {
        self.prototype.len()
    }

    /// Regressor parameters followed by the prototype coordinates (`x, y` per point).
    pub fn params_flat(&self) -> Vec<T> {
        let mut v: Vec<T> = self.regressor.iter().copied().collect();
        v.extend(self.prototype.iter().flat_map(|p| [p.x, p.y]));
        v
    }

    /// Inverse of [`AlignmentModel::params_flat`].
    pub fn set_params_flat(&mut self, values: &[T]) -> Result<()> {
        let n = self.regressor.num_params() + 2 * self.prototype.len();
        if values.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: values.len(),
            });
        }
        let (reg, proto) = values.split_at(self.regressor.num_params());
        for (dst, src) in self.regressor.iter_mut().zip(reg) {
            *dst = *src;
        }
        for (p, xy) in self.prototype.iter_mut().zip(proto.chunks_exact(2)) {
            *p = Point2::new(xy[0], xy[1]);
        }
        Ok(())
    }

    fn check_len(&self, m: usize) -> Result<()> {
        if m != self.m() {
            return Err(Error::LengthMismatch {
                expected: self.m(),
                found: m,
            });
        }
        Ok(())
    }
}

/// Gradients shaped like the parameters they belong to.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignGradients<T> {
    pub regressor: RegressorParams<T>,
    pub prototype: Vec<Point2<T>>,
}

impl<T: Scalar> AlignGradients<T> {
    fn zeros_like(model: &AlignmentModel<T>) -> Self {
        Self {
            regressor: RegressorParams::zeros(model.regressor.input_dim, model.regressor.hidden_width),
            prototype: vec![Point2::zero(); model.m()],
        }
    }

    /// Same ordering as [`AlignmentModel::params_flat`].
    pub fn flatten(&self) -> Vec<T> {
        let mut v: Vec<T> = self.regressor.iter().copied().collect();
        v.extend(self.prototype.iter().flat_map(|p| [p.x, p.y]));
        v
    }
}

fn flatten_points<T: Scalar>(points: &[Point2<T>]) -> Vec<T> {
    points.iter().flat_map(|p| [p.x, p.y]).collect()
}

struct RawTransform<T> {
    translation: Point2<T>,
    alpha: T,
    scale: T,
}

fn decode<T: Scalar>(o: &[T; OUTPUT_DIM], s_min: T) -> RawTransform<T> {
    RawTransform {
        translation: Point2::new(o[OUT_TX], o[OUT_TY]),
        alpha: o[OUT_ROT_SIN].atan2(o[OUT_ROT_COS]),
        scale: s_min + o[OUT_SCALE].softplus(),
    }
}

pub fn predict_transform<T: Scalar>(
    model: &AlignmentModel<T>,
    sample: &NormalizedTrajectory<T>,
) -> Result<SimilarityTransform<T>> {
    model.check_len(sample.len())?;
    let x = flatten_points(sample.points());
    let mut hidden = vec![T::zero(); model.regressor.hidden_width];
    let o = model.regressor.forward(&x, &mut hidden);
    let raw = decode(&o, model.s_min);
    SimilarityTransform::new(raw.translation, raw.alpha, raw.scale)
}

/// Maps a normalized sample into the aligned frame; keeps the source id.
pub fn align<T: Scalar>(model: &AlignmentModel<T>, sample: &NormalizedTrajectory<T>) -> Result<Trajectory<T>> {
    let tf = predict_transform(model, sample)?;
    Ok(apply_transform(&tf, sample.as_trajectory()))
}

pub fn align_all<T: Scalar>(
    model: &AlignmentModel<T>,
    samples: &[NormalizedTrajectory<T>],
) -> Result<Vec<Trajectory<T>>> {
    samples.iter().map(|s| align(model, s)).collect()
}

/// Mean over the batch of the per-sample mse between aligned sample and prototype.
pub fn align_loss<T: Scalar>(model: &AlignmentModel<T>, batch: &[NormalizedTrajectory<T>]) -> Result<T> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut total = T::zero();
    for sample in batch {
        let aligned = align(model, sample)?;
        total += point_mse(aligned.points(), &model.prototype)?;
    }
    Ok(total / T::from_usize_lossy(batch.len()))
}

/// Exact gradients of [`align_loss`] with respect to every regressor
/// parameter and every prototype coordinate.
pub fn align_gradients<T: Scalar>(
    model: &AlignmentModel<T>,
    batch: &[NormalizedTrajectory<T>],
) -> Result<AlignGradients<T>> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    for s in batch {
        model.check_len(s.len())?;
    }
    let reg = &model.regressor;
    let (d_in, width) = (reg.input_dim, reg.hidden_width);
    let m = model.m();
    let mut grads = AlignGradients::zeros_like(model);
    let mut hidden = vec![T::zero(); width];
    let mut x = vec![T::zero(); d_in];
    // d(loss)/d(aligned point) = 2/(B*M) * residual
    let point_weight = T::lit(2.0) / (T::from_usize_lossy(batch.len()) * T::from_usize_lossy(m));

    for sample in batch {
        for (dst, p) in x.chunks_exact_mut(2).zip(sample.points()) {
            dst[0] = p.x;
            dst[1] = p.y;
        }
        let o = reg.forward(&x, &mut hidden);
        let raw = decode(&o, model.s_min);
        let (sin, cos) = raw.alpha.sin_cos();

        let mut d_t = Point2::zero();
        let mut d_scale = T::zero();
        let mut d_alpha = T::zero();
        for (j, &p) in sample.points().iter().enumerate() {
            let rotated = p.rotate(cos, sin);
            let aligned = rotated * raw.scale + raw.translation;
            let g = (aligned - model.prototype[j]) * point_weight;
            d_t = d_t + g;
            d_scale += g.dot(rotated);
            d_alpha += raw.scale * g.dot(rotated.perp());
            grads.prototype[j] = grads.prototype[j] - g;
        }

        let mut d_out = [T::zero(); OUTPUT_DIM];
        d_out[OUT_TX] = d_t.x;
        d_out[OUT_TY] = d_t.y;
        let (c, s) = (o[OUT_ROT_COS], o[OUT_ROT_SIN]);
        let rho_sq = c * c + s * s;
        if rho_sq > T::zero() {
            d_out[OUT_ROT_COS] = -d_alpha * s / rho_sq;
            d_out[OUT_ROT_SIN] = d_alpha * c / rho_sq;
        }
        d_out[OUT_SCALE] = d_scale * o[OUT_SCALE].sigmoid();

        let g = &mut grads.regressor;
        for (k, &dk) in d_out.iter().enumerate() {
            g.bias_out[k] += dk;
            let row = &mut g.weights_out[k * width..(k + 1) * width];
            for (w, &hv) in row.iter_mut().zip(&hidden) {
                *w += dk * hv;
            }
        }
        for (h, &hv) in hidden.iter().enumerate() {
            let mut d_hidden = T::zero();
            for (k, &dk) in d_out.iter().enumerate() {
                d_hidden += reg.weights_out[k * width + h] * dk;
            }
            let d_pre = d_hidden * (T::one() - hv * hv);
            g.bias_in[h] += d_pre;
            let row = &mut g.weights_in[h * d_in..(h + 1) * d_in];
            for (w, &xi) in row.iter_mut().zip(&x) {
                *w += d_pre * xi;
            }
        }
    }
    Ok(grads)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlignTrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Clamped to the dataset size when larger.
    pub batch_size: usize,
    pub seed: u64,
    pub s_min: f64,
    pub hidden_width: usize,
}

impl Default for AlignTrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.2,
            epochs: 1000,
            batch_size: 32,
            seed: 7,
            s_min: 0.2,
            hidden_width: 64,
        }
    }
}

impl AlignTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be at least 1".into()));
        }
        if !(self.s_min > 0.0 && self.s_min.is_finite()) {
            return Err(Error::InvalidConfig("s_min must be positive".into()));
        }
        if self.hidden_width == 0 {
            return Err(Error::InvalidConfig("hidden_width must be at least 1".into()));
        }
        Ok(())
    }

    /// `key=value` pairs echoed into model files and reports.
    pub fn echo(&self) -> Vec<(String, String)> {
        vec![
            ("learning_rate".into(), format!("{:?}", self.learning_rate)),
            ("epochs".into(), self.epochs.to_string()),
            ("batch_size".into(), self.batch_size.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("s_min".into(), format!("{:?}", self.s_min)),
            ("hidden_width".into(), self.hidden_width.to_string()),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentRun<T> {
    pub model: AlignmentModel<T>,
    /// Full-dataset loss after each epoch.
    pub loss_history: Vec<T>,
}

pub fn train_alignment<T: Scalar>(data: &[NormalizedTrajectory<T>], cfg: &AlignTrainConfig) -> Result<AlignmentRun<T>> {
    cfg.validate()?;
    let first = data
        .first()
        .ok_or_else(|| Error::EmptyResult("no samples to align".into()))?;
    let m = first.len();
    if let Some(bad) = data.iter().find(|s| s.len() != m) {
        return Err(Error::LengthMismatch {
            expected: m,
            found: bad.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let regressor = RegressorParams::random(2 * m, cfg.hidden_width, &mut rng);
    let inv_n = T::one() / T::from_usize_lossy(data.len());
    let prototype = (0..m)
        .map(|j| {
            let mut acc = Point2::zero();
            for s in data {
                acc = acc + s.points()[j];
            }
            acc * inv_n
        })
        .collect();
    let mut model = AlignmentModel::new(regressor, prototype, T::lit(cfg.s_min))?;

    let lr = T::lit(cfg.learning_rate);
    let batch_size = cfg.batch_size.min(data.len());
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut batch = Vec::with_capacity(batch_size);
    let mut loss_history = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| data[i].clone()));
            let grads = align_gradients(&model, &batch)?;
            sgd_step(&mut model, &grads, lr);
        }
        let loss = match align_loss(&model, data) {
            Ok(l) if l.is_finite() => l,
            _ => {
                return Err(Error::DivergedTraining {
                    stage: "alignment",
                    epoch,
                })
            }
        };
        loss_history.push(loss);
    }
    Ok(AlignmentRun { model, loss_history })
}

fn sgd_step<T: Scalar>(model: &mut AlignmentModel<T>, grads: &AlignGradients<T>, lr: T) {
    for (p, g) in model.regressor.iter_mut().zip(grads.regressor.iter()) {
        *p -= lr * *g;
    }
    for (p, g) in model.prototype.iter_mut().zip(&grads.prototype) {
        *p = *p - *g * lr;
    }
}
