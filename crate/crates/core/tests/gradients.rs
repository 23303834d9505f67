//! Analytic gradients against central finite differences.

mod common;

use common::{grad_close, random_points, random_walk, rng};
use rand::Rng;
use trajproto::align::{align_gradients, align_loss, AlignmentModel, RegressorParams};
use trajproto::geometry::{Point2, Trajectory};
use trajproto::normalize::normalize;
use trajproto::quantize::{assign_all, lvq_gradients_with_assignments, lvq_loss_with_assignments, PrototypeSet};

const STEP: f64 = 1e-5;

#[test]
fn alignment_gradients_match_finite_differences() {
    for instance in 0..12u64 {
        let mut r = rng(100 + instance);
        let m = r.random_range(3..8);
        let hidden = r.random_range(2..7);
        let n = r.random_range(1..6);
        let batch: Vec<_> = (0..n)
            .map(|i| normalize(&random_walk(&mut r, &format!("s{i}"), m), 1e-6).unwrap())
            .collect();
        let regressor = RegressorParams::random(2 * m, hidden, &mut r);
        let prototype = random_points(&mut r, m, 1.0);
        let mut model = AlignmentModel::new(regressor, prototype, 0.2).unwrap();

        let analytic = align_gradients(&model, &batch).unwrap().flatten();
        let base = model.params_flat();
        assert_eq!(analytic.len(), base.len());
        for i in 0..base.len() {
            let mut p = base.clone();
            p[i] = base[i] + STEP;
            model.set_params_flat(&p).unwrap();
            let up = align_loss(&model, &batch).unwrap();
            p[i] = base[i] - STEP;
            model.set_params_flat(&p).unwrap();
            let down = align_loss(&model, &batch).unwrap();
            let numeric = (up - down) / (2.0 * STEP);
            assert!(
                grad_close(analytic[i], numeric),
                "instance {instance} coordinate {i}: analytic {} numeric {numeric}",
                analytic[i]
            );
        }
        model.set_params_flat(&base).unwrap();
    }
}

fn set_from(points: &[Vec<Point2<f64>>]) -> PrototypeSet<f64> {
    PrototypeSet::new(
        points
            .iter()
            .enumerate()
            .map(|(k, p)| Trajectory::new(format!("p{k}"), p.clone()).unwrap())
            .collect(),
    )
    .unwrap()
}

#[test]
fn lvq_gradients_match_finite_differences() {
    for instance in 0..12u64 {
        let mut r = rng(200 + instance);
        let (m, k, n) = (r.random_range(2..8), r.random_range(1..6), r.random_range(1..12));
        let gamma = [0.0, 0.05, 0.7][instance as usize % 3];
        let batch: Vec<_> = (0..n)
            .map(|i| Trajectory::new(format!("s{i}"), random_points(&mut r, m, 1.0)).unwrap())
            .collect();
        let protos: Vec<Vec<Point2<f64>>> = (0..k).map(|_| random_points(&mut r, m, 1.0)).collect();
        let set = set_from(&protos);
        let assignments = assign_all(&set, &batch).unwrap();
        let grads = lvq_gradients_with_assignments(&set, &batch, &assignments, gamma).unwrap();

        for kk in 0..k {
            for j in 0..m {
                for axis in 0..2 {
                    let loss_at = |delta: f64| {
                        let mut p = protos.clone();
                        if axis == 0 {
                            p[kk][j].x += delta;
                        } else {
                            p[kk][j].y += delta;
                        }
                        lvq_loss_with_assignments(&set_from(&p), &batch, &assignments, gamma).unwrap()
                    };
                    let numeric = (loss_at(STEP) - loss_at(-STEP)) / (2.0 * STEP);
                    let analytic = if axis == 0 { grads[kk][j].x } else { grads[kk][j].y };
                    assert!(
                        grad_close(analytic, numeric),
                        "instance {instance} proto {kk} point {j} axis {axis}: {analytic} vs {numeric}"
                    );
                }
            }
        }
    }
}
