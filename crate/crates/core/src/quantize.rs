//! Learning vector quantization of aligned samples.
//!
//! The objective is a winner-takes-all mean squared error (each sample
//! against its nearest prototype) plus `gamma` times the mean squared
//! error of every sample against every prototype. The second term pulls
//! prototypes without support towards the data mean. Prototypes start as
//! randomly chosen samples (Forgy) and are trained by minibatch gradient
//! descent with assignments recomputed before every step.
//!
//! After training, [`refine`] greedily rebuilds a smaller prototype set,
//! starting from the best-supported prototype.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{points_centroid, sq_dist_sum, Point2, Trajectory};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct PrototypeSet<T> {
    prototypes: Vec<Trajectory<T>>,
    support: Option<Vec<usize>>,
}

impl<T: Scalar> PrototypeSet<T> {
    pub fn new(prototypes: Vec<Trajectory<T>>) -> Result<Self> {
        let m = prototypes
            .first()
            .map(Trajectory::len)
            .ok_or_else(|| Error::InvalidConfig("prototype set needs K >= 1".into()))?;
        if let Some(bad) = prototypes.iter().find(|p| p.len() != m) {
            return Err(Error::LengthMismatch {
                expected: m,
                found: bad.len(),
            });
        }
        Ok(Self {
            prototypes,
            support: None,
        })
    }

    pub fn with_support(mut self, support: Vec<usize>) -> Result<Self> {
        if support.len() != self.prototypes.len() {
            return Err(Error::LengthMismatch {
                expected: self.prototypes.len(),
                found: support.len(),
            });
        }
        self.support = Some(support);
        Ok(self)
    }

    pub fn prototypes(&self) -> &[Trajectory<T>] {
        &self.prototypes
    }

    pub fn support(&self) -> Option<&[usize]> {
        self.support.as_deref()
    }

    pub fn k(&self) -> usize {
        self.prototypes.len()
    }

    pub fn m(&self) -> usize {
        self.prototypes[0].len()
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

#[derive(Clone, Debug, PartialEq)]
pub struct LvqConfig {
    pub k: usize,
    pub gamma: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Clamped to the dataset size when larger.
    pub batch_size: usize,
    pub seed: u64,
    /// Minimum relative error reduction for refinement to accept a prototype.
    pub refine_tau: f64,
    /// Minimum relative dissimilarity (see [`relative_dissimilarity`]).
    pub refine_delta_min: f64,
}

impl Default for LvqConfig {
    fn default() -> Self {
        Self {
            k: 10,
            gamma: 0.05,
            learning_rate: 1.0,
            epochs: 300,
            batch_size: 32,
            seed: 7,
            refine_tau: 0.02,
            refine_delta_min: 0.005,
        }
    }
}

impl LvqConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("K must be at least 1".into()));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidConfig("gamma must be non-negative".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidConfig("epochs and batch_size must be at least 1".into()));
        }
        if !(self.refine_tau > 0.0 && self.refine_delta_min > 0.0) {
            return Err(Error::InvalidConfig("refinement thresholds must be positive".into()));
        }
        Ok(())
    }

    pub fn echo(&self) -> Vec<(String, String)> {
        vec![
            ("k".into(), self.k.to_string()),
            ("gamma".into(), format!("{:?}", self.gamma)),
            ("learning_rate".into(), format!("{:?}", self.learning_rate)),
            ("epochs".into(), self.epochs.to_string()),
            ("batch_size".into(), self.batch_size.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("refine_tau".into(), format!("{:?}", self.refine_tau)),
            ("refine_delta_min".into(), format!("{:?}", self.refine_delta_min)),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantizationResult<T> {
    /// Carries support counts over the full training set.
    pub prototypes: PrototypeSet<T>,
    pub assignments: Vec<usize>,
    /// Mean over samples of the mse to the assigned prototype.
    pub global_error: T,
    /// Full-dataset objective after each epoch.
    pub loss_history: Vec<T>,
}

fn check_uniform<T: Scalar>(data: &[Trajectory<T>], m: usize) -> Result<()> {
    match data.iter().find(|s| s.len() != m) {
        Some(bad) => Err(Error::LengthMismatch {
            expected: m,
            found: bad.len(),
        }),
        None => Ok(()),
    }
}

pub fn forgy_init<T: Scalar>(data: &[Trajectory<T>], k: usize, seed: u64) -> Result<PrototypeSet<T>> {
    forgy_init_with(data, k, &mut ChaCha8Rng::seed_from_u64(seed)).map(|(set, _)| set)
}

/// Forgy initialization drawing from a caller-owned generator. Also returns
/// the source sample indices.
pub fn forgy_init_with<T: Scalar, R: Rng>(
    data: &[Trajectory<T>],
    k: usize,
    rng: &mut R,
) -> Result<(PrototypeSet<T>, Vec<usize>)> {
    if k == 0 || k > data.len() {
        return Err(Error::InvalidConfig(format!("K = {k} must be in 1..={}", data.len())));
    }
    let picked = index::sample(rng, data.len(), k).into_vec();
    let prototypes = picked
        .iter()
        .enumerate()
        .map(|(slot, &i)| data[i].clone().with_id(format!("proto-{slot}")))
        .collect();
    Ok((PrototypeSet::new(prototypes)?, picked))
}

/// Nearest prototype and its mse; ties go to the lowest index.
fn nearest<T: Scalar>(protos: &[Trajectory<T>], sample: &[Point2<T>]) -> (usize, T) {
    let mut best = (0, T::infinity());
    for (k, p) in protos.iter().enumerate() {
        let d = sq_dist_sum(sample, p.points());
        if d < best.1 {
            best = (k, d);
        }
    }
    (best.0, best.1 / T::from_usize_lossy(sample.len()))
}

pub fn assign<T: Scalar>(protos: &PrototypeSet<T>, sample: &Trajectory<T>) -> Result<usize> {
    protos.check_len(sample.len())?;
    Ok(nearest(&protos.prototypes, sample.points()).0)
}

pub fn assign_all<T: Scalar>(protos: &PrototypeSet<T>, data: &[Trajectory<T>]) -> Result<Vec<usize>> {
    check_uniform(data, protos.m())?;
    Ok(data.iter().map(|s| nearest(&protos.prototypes, s.points()).0).collect())
}

/// Objective with assignments computed from the current prototypes.
pub fn lvq_loss<T: Scalar>(protos: &PrototypeSet<T>, batch: &[Trajectory<T>], gamma: T) -> Result<T> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let assignments = assign_all(protos, batch)?;
    lvq_loss_with_assignments(protos, batch, &assignments, gamma)
}

/// Objective with caller-fixed assignments.
pub fn lvq_loss_with_assignments<T: Scalar>(
    protos: &PrototypeSet<T>,
    batch: &[Trajectory<T>],
    assignments: &[usize],
    gamma: T,
) -> Result<T> {
    validate_batch(protos, batch, assignments)?;
    let n = T::from_usize_lossy(batch.len());
    let m = T::from_usize_lossy(protos.m());
    let k = T::from_usize_lossy(protos.k());
    let mut winner = T::zero();
    let mut global = T::zero();
    for (sample, &a) in batch.iter().zip(assignments) {
        winner += sq_dist_sum(sample.points(), protos.prototypes[a].points()) / m;
        for p in &protos.prototypes {
            global += sq_dist_sum(sample.points(), p.points());
        }
    }
    Ok(winner / n + gamma * (global / (n * m * k)))
}

fn validate_batch<T: Scalar>(protos: &PrototypeSet<T>, batch: &[Trajectory<T>], assignments: &[usize]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    check_uniform(batch, protos.m())?;
    if assignments.len() != batch.len() {
        return Err(Error::LengthMismatch {
            expected: batch.len(),
            found: assignments.len(),
        });
    }
    if let Some(&bad) = assignments.iter().find(|&&a| a >= protos.k()) {
        return Err(Error::InvalidConfig(format!("assignment {bad} out of range")));
    }
    Ok(())
}

/// Gradient of the objective per prototype point, assignments recomputed
/// from the current prototypes and then held fixed.
pub fn lvq_gradients<T: Scalar>(
    protos: &PrototypeSet<T>,
    batch: &[Trajectory<T>],
    gamma: T,
) -> Result<Vec<Vec<Point2<T>>>> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let assignments = assign_all(protos, batch)?;
    lvq_gradients_with_assignments(protos, batch, &assignments, gamma)
}

pub fn lvq_gradients_with_assignments<T: Scalar>(
    protos: &PrototypeSet<T>,
    batch: &[Trajectory<T>],
    assignments: &[usize],
    gamma: T,
) -> Result<Vec<Vec<Point2<T>>>> {
    validate_batch(protos, batch, assignments)?;
    let (k, m) = (protos.k(), protos.m());
    let n = T::from_usize_lossy(batch.len());
    let two = T::lit(2.0);
    let winner_w = two / (n * T::from_usize_lossy(m));
    let global_w = gamma * two / (n * T::from_usize_lossy(m) * T::from_usize_lossy(k));

    // Winner term: sum of residuals of the assigned samples.
    let mut winner_sum = vec![vec![Point2::zero(); m]; k];
    // Global term: K * z - sum over the batch, shared by every prototype.
    let mut batch_sum = vec![Point2::zero(); m];
    for (sample, &a) in batch.iter().zip(assignments) {
        let proto = protos.prototypes[a].points();
        for (j, &x) in sample.points().iter().enumerate() {
            winner_sum[a][j] = winner_sum[a][j] + (proto[j] - x);
            batch_sum[j] = batch_sum[j] + x;
        }
    }
    let mut grads = winner_sum;
    if gamma > T::zero() {
        for (g, p) in grads.iter_mut().zip(&protos.prototypes) {
            for (j, gj) in g.iter_mut().enumerate() {
                let global = p.points()[j] * n - batch_sum[j];
                *gj = *gj * winner_w + global * global_w;
            }
        }
    } else {
        for g in grads.iter_mut() {
            for gj in g.iter_mut() {
                *gj = *gj * winner_w;
            }
        }
    }
    Ok(grads)
}

/// Mean over samples of the mse to the nearest prototype.
pub fn quantization_error<T: Scalar>(protos: &PrototypeSet<T>, data: &[Trajectory<T>]) -> Result<T> {
    if data.is_empty() {
        return Err(Error::EmptyResult("no samples to quantize".into()));
    }
    check_uniform(data, protos.m())?;
    Ok(subset_error(&protos.prototypes, data))
}

fn subset_error<T: Scalar>(protos: &[Trajectory<T>], data: &[Trajectory<T>]) -> T {
    let m = T::from_usize_lossy(data[0].len());
    let mut total = T::zero();
    for s in data {
        let (a, _) = nearest(protos, s.points());
        total += sq_dist_sum(s.points(), protos[a].points()) / m;
    }
    total / T::from_usize_lossy(data.len())
}

fn support_counts<T: Scalar>(protos: &[Trajectory<T>], data: &[Trajectory<T>]) -> (Vec<usize>, Vec<usize>) {
    let mut support = vec![0; protos.len()];
    let assignments: Vec<usize> = data.iter().map(|s| nearest(protos, s.points()).0).collect();
    for &a in &assignments {
        support[a] += 1;
    }
    (assignments, support)
}

pub fn train_lvq<T: Scalar>(data: &[Trajectory<T>], cfg: &LvqConfig) -> Result<QuantizationResult<T>> {
    cfg.validate()?;
    let first = data
        .first()
        .ok_or_else(|| Error::EmptyResult("no samples to quantize".into()))?;
    check_uniform(data, first.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (protos, _) = forgy_init_with(data, cfg.k, &mut rng)?;
    train_lvq_from(data, protos, cfg, &mut rng)
}

/// Trains starting from the given prototypes; `rng` drives batch shuffling.
pub fn train_lvq_from<T: Scalar, R: Rng>(
    data: &[Trajectory<T>],
    init: PrototypeSet<T>,
    cfg: &LvqConfig,
    rng: &mut R,
) -> Result<QuantizationResult<T>> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyResult("no samples to quantize".into()));
    }
    check_uniform(data, init.m())?;
    let mut protos = PrototypeSet::new(init.prototypes)?;
    let gamma = T::lit(cfg.gamma);
    let lr = T::lit(cfg.learning_rate);
    let batch_size = cfg.batch_size.min(data.len());
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut batch = Vec::with_capacity(batch_size);
    let mut loss_history = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| data[i].clone()));
            let grads = lvq_gradients(&protos, &batch, gamma)?;
            for (proto, g) in protos.prototypes.iter_mut().zip(&grads) {
                let points = proto.points().iter().zip(g).map(|(&z, &gz)| z - gz * lr).collect();
                *proto = Trajectory::from_parts(proto.id().to_string(), points);
            }
        }
        let loss = lvq_loss(&protos, data, gamma)?;
        if !loss.is_finite() {
            return Err(Error::DivergedTraining {
                stage: "quantization",
                epoch,
            });
        }
        loss_history.push(loss);
    }

    let (assignments, support) = support_counts(&protos.prototypes, data);
    let global_error = subset_error(&protos.prototypes, data);
    Ok(QuantizationResult {
        prototypes: protos.with_support(support)?,
        assignments,
        global_error,
        loss_history,
    })
}

/// Prototype mse normalized by the spread of `reference` about its centroid,
/// so the threshold does not depend on the absolute scale of the aligned frame.
pub fn relative_dissimilarity<T: Scalar>(candidate: &[Point2<T>], reference: &[Point2<T>]) -> T {
    let c = points_centroid(reference);
    let spread = reference.iter().map(|&p| (p - c).norm_sq()).sum::<T>();
    let diff = sq_dist_sum(candidate, reference);
    if spread > T::zero() {
        diff / spread
    } else if diff > T::zero() {
        T::infinity()
    } else {
        T::zero()
    }
}

/// Refined prototypes plus a trace of the greedy selection.
#[derive(Clone, Debug, PartialEq)]
pub struct Refinement<T> {
    pub prototypes: PrototypeSet<T>,
    /// Input indices in selection order; the first has maximum support.
    pub selected: Vec<usize>,
    /// Quantization error of the selected set after each addition.
    pub error_trace: Vec<T>,
    /// Input indices dropped for being too similar to a selected prototype.
    pub discarded: Vec<usize>,
}

/// Greedy prototype selection.
///
/// Starts from the prototype with the most support. Candidates whose
/// [`relative_dissimilarity`] to some selected prototype is below
/// `delta_min` are dropped. Among the rest, the one whose addition lowers
/// the quantization error the most is added, until the relative reduction
/// falls below `tau` or no candidates remain.
pub fn refine<T: Scalar>(
    result: &QuantizationResult<T>,
    data: &[Trajectory<T>],
    tau: T,
    delta_min: T,
) -> Result<PrototypeSet<T>> {
    refine_traced(result, data, tau, delta_min).map(|r| r.prototypes)
}

pub fn refine_traced<T: Scalar>(
    result: &QuantizationResult<T>,
    data: &[Trajectory<T>],
    tau: T,
    delta_min: T,
) -> Result<Refinement<T>> {
    let input = &result.prototypes;
    let support = input
        .support()
        .ok_or_else(|| Error::InvalidConfig("refinement needs support counts".into()))?;
    if data.is_empty() {
        return Err(Error::EmptyResult("no samples to refine against".into()));
    }
    check_uniform(data, input.m())?;
    let all = input.prototypes();

    let mut seed = 0;
    for (k, &s) in support.iter().enumerate() {
        if s > support[seed] {
            seed = k;
        }
    }
    let mut selected = vec![seed];
    let mut chosen: Vec<Trajectory<T>> = vec![all[seed].clone()];
    let mut error = subset_error(&chosen, data);
    let mut error_trace = vec![error];
    let mut discarded = Vec::new();
    let mut open: Vec<usize> = (0..all.len()).filter(|&k| k != seed).collect();

    loop {
        open.retain(|&k| {
            let similar = chosen
                .iter()
                .any(|c| relative_dissimilarity(all[k].points(), c.points()) < delta_min);
            if similar {
                discarded.push(k);
            }
            !similar
        });
        if open.is_empty() || error <= T::zero() {
            break;
        }
        let mut best: Option<(usize, T)> = None;
        for (slot, &k) in open.iter().enumerate() {
            chosen.push(all[k].clone());
            let e = subset_error(&chosen, data);
            chosen.pop();
            if best.is_none_or(|(_, b)| e < b) {
                best = Some((slot, e));
            }
        }
        let (slot, best_error) = best.expect("open is non-empty");
        if (error - best_error) / error < tau {
            break;
        }
        let k = open.remove(slot);
        selected.push(k);
        chosen.push(all[k].clone());
        error = best_error;
        error_trace.push(error);
    }

    let (_, support) = support_counts(&chosen, data);
    Ok(Refinement {
        prototypes: PrototypeSet::new(chosen)?.with_support(support)?,
        selected,
        error_trace,
        discarded,
    })
}

/// Mean mse of the samples assigned to each prototype (zero when unsupported).
pub fn per_prototype_error<T: Scalar>(protos: &PrototypeSet<T>, data: &[Trajectory<T>]) -> Result<Vec<T>> {
    check_uniform(data, protos.m())?;
    let m = T::from_usize_lossy(protos.m());
    let mut sums = vec![T::zero(); protos.k()];
    let mut counts = vec![0usize; protos.k()];
    for s in data {
        let (a, _) = nearest(&protos.prototypes, s.points());
        sums[a] += sq_dist_sum(s.points(), protos.prototypes[a].points()) / m;
        counts[a] += 1;
    }
    Ok(sums
        .into_iter()
        .zip(counts)
        .map(|(s, c)| if c == 0 { T::zero() } else { s / T::from_usize_lossy(c) })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(id: &str, pts: &[(f64, f64)]) -> Trajectory<f64> {
        Trajectory::new(id, pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap()
    }

    fn shifted(base: &[(f64, f64)], dx: f64, dy: f64, id: &str) -> Trajectory<f64> {
        traj(id, &base.iter().map(|&(x, y)| (x + dx, y + dy)).collect::<Vec<_>>())
    }

    const BASE: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.5), (3.0, 1.0)];

    fn five_protos() -> PrototypeSet<f64> {
        PrototypeSet::new(
            (0..5)
                .map(|k| shifted(&BASE, 10.0 * k as f64, 0.0, &format!("p{k}")))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn forgy_k_equals_n_uses_every_sample() {
        let data: Vec<_> = (0..6).map(|i| shifted(&BASE, i as f64, 0.0, &i.to_string())).collect();
        let (set, idx) = forgy_init_with(&data, 6, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let mut sorted = idx.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..6).collect::<Vec<_>>());
        for (p, &i) in set.prototypes().iter().zip(&idx) {
            assert_eq!(p.points(), data[i].points());
        }
    }

    #[test]
    fn forgy_rejects_bad_k() {
        let data = vec![traj("a", &BASE)];
        assert!(forgy_init(&data, 0, 1).is_err());
        assert!(forgy_init(&data, 2, 1).is_err());
    }

    #[test]
    fn assign_single_and_exact() {
        let one = PrototypeSet::new(vec![traj("p", &BASE)]).unwrap();
        assert_eq!(assign(&one, &shifted(&BASE, 100.0, -4.0, "s")).unwrap(), 0);
        let five = five_protos();
        let s = shifted(&BASE, 30.0, 0.0, "s");
        assert_eq!(assign(&five, &s).unwrap(), 3);
        assert!(matches!(
            assign(&five, &traj("short", &BASE[..3])),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn assign_tie_breaks_low() {
        let protos = PrototypeSet::new(vec![shifted(&BASE, -1.0, 0.0, "a"), shifted(&BASE, 1.0, 0.0, "b")]).unwrap();
        assert_eq!(assign(&protos, &traj("s", &BASE)).unwrap(), 0);
    }

    #[test]
    fn loss_zero_on_exact_members() {
        let protos = five_protos();
        let batch: Vec<_> = [1, 3, 3, 0].iter().map(|&k| protos.prototypes()[k].clone()).collect();
        assert_eq!(lvq_loss(&protos, &batch, 0.0).unwrap(), 0.0);
        assert!(matches!(lvq_loss(&protos, &[], 0.0), Err(Error::EmptyBatch)));
    }

    #[test]
    fn loss_single_prototype() {
        let protos = PrototypeSet::new(vec![traj("p", &BASE)]).unwrap();
        let s = shifted(&BASE, 0.5, -0.25, "s");
        let mse = 0.25 + 0.0625;
        let got = lvq_loss(&protos, &[s], 0.3).unwrap();
        assert!((got - 1.3 * mse).abs() < 1e-15);
    }

    #[test]
    fn gradient_sparsity_without_regularizer() {
        let protos = five_protos();
        let batch = vec![shifted(&BASE, 0.3, 0.1, "a"), shifted(&BASE, 20.2, 0.0, "b")];
        let g = lvq_gradients(&protos, &batch, 0.0).unwrap();
        for k in [1, 3, 4] {
            assert!(g[k].iter().all(|p| p.x == 0.0 && p.y == 0.0));
        }
        assert!(g[0].iter().any(|p| p.x != 0.0));
    }

    #[test]
    fn regularizer_pulls_unsupported_towards_batch_mean() {
        let protos = five_protos();
        let batch = vec![shifted(&BASE, 0.3, 0.1, "a"), shifted(&BASE, -0.1, 0.2, "b")];
        let g = lvq_gradients(&protos, &batch, 0.05).unwrap();
        let mean: Vec<_> = (0..4)
            .map(|j| (batch[0].points()[j] + batch[1].points()[j]) * 0.5)
            .collect();
        for (k, gk) in g.iter().enumerate().skip(1) {
            for (j, gj) in gk.iter().enumerate() {
                let towards = mean[j] - protos.prototypes()[k].points()[j];
                assert!(gj.norm() > 0.0);
                // descent direction -g is parallel to (mean - z)
                assert!((-*gj).dot(towards) > 0.0);
                assert!((-*gj).cross(towards).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quantization_error_cross_checks() {
        let protos = five_protos();
        let data: Vec<_> = (0..9)
            .map(|i| shifted(&BASE, 7.3 * i as f64 - 3.0, 0.4 * i as f64, &i.to_string()))
            .collect();
        assert_eq!(
            quantization_error(&protos, &data).unwrap(),
            lvq_loss(&protos, &data, 0.0).unwrap()
        );
        let one = PrototypeSet::new(vec![traj("p", &BASE)]).unwrap();
        let manual: f64 = data
            .iter()
            .map(|s| crate::geometry::mse(s, &one.prototypes()[0]).unwrap())
            .sum::<f64>()
            / 9.0;
        assert!((quantization_error(&one, &data).unwrap() - manual).abs() < 1e-12);
        assert!(quantization_error(&one, &[]).is_err());
    }

    fn result_from(protos: PrototypeSet<f64>, data: &[Trajectory<f64>]) -> QuantizationResult<f64> {
        let (assignments, support) = support_counts(protos.prototypes(), data);
        QuantizationResult {
            global_error: subset_error(protos.prototypes(), data),
            prototypes: protos.with_support(support).unwrap(),
            assignments,
            loss_history: vec![],
        }
    }

    #[test]
    fn refine_single_prototype_is_identity() {
        let data = vec![traj("a", &BASE), shifted(&BASE, 1.0, 0.0, "b")];
        let protos = PrototypeSet::new(vec![traj("p", &BASE)]).unwrap();
        let r = refine(&result_from(protos.clone(), &data), &data, 0.02, 0.01).unwrap();
        assert_eq!(r.prototypes(), protos.prototypes());
        assert_eq!(r.support(), Some(&[2usize][..]));
    }

    #[test]
    fn refine_drops_exact_duplicate() {
        let data: Vec<_> = (0..4)
            .map(|i| shifted(&BASE, 0.01 * i as f64, 0.0, &i.to_string()))
            .collect();
        let protos = PrototypeSet::new(vec![traj("p", &BASE), traj("q", &BASE)]).unwrap();
        let r = refine_traced(&result_from(protos, &data), &data, 0.02, 0.01).unwrap();
        assert_eq!(r.prototypes.k(), 1);
        assert_eq!(r.discarded, vec![1]);
    }

    #[test]
    fn refine_keeps_separated_clusters() {
        let mut data = Vec::new();
        for i in 0..6 {
            data.push(shifted(&BASE, 0.01 * i as f64, 0.0, "a"));
        }
        for i in 0..3 {
            data.push(shifted(&BASE, 50.0 + 0.01 * i as f64, 0.0, "b"));
        }
        let protos = PrototypeSet::new(vec![
            shifted(&BASE, 50.0, 0.0, "far"),
            traj("near", &BASE),
            shifted(&BASE, -0.001, 0.0, "dup"),
        ])
        .unwrap();
        let r = refine_traced(&result_from(protos, &data), &data, 0.02, 0.01).unwrap();
        assert_eq!(r.selected, vec![1, 0]);
        assert_eq!(r.prototypes.support(), Some(&[6usize, 3][..]));
        assert!(r.error_trace.windows(2).all(|w| w[1] < w[0]));
    }
}
