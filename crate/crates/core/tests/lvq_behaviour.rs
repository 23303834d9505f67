mod common;

use common::{random_points, rng};
use rand::Rng;
use trajproto::geometry::{Point2, Trajectory};
use trajproto::quantize::{
    forgy_init, forgy_init_with, lvq_loss_with_assignments, refine_traced, train_lvq, train_lvq_from, LvqConfig,
    PrototypeSet, QuantizationResult,
};

fn samples<R: Rng>(r: &mut R, n: usize, m: usize) -> Vec<Trajectory<f64>> {
    (0..n)
        .map(|i| Trajectory::new(format!("s{i}"), random_points(r, m, 1.0)).unwrap())
        .collect()
}

#[test]
fn forgy_picks_distinct_samples() {
    let mut r = rng(1);
    let data = samples(&mut r, 30, 6);
    for seed in 0..20 {
        let (set, idx) = forgy_init_with(&data, 10, &mut rng(seed)).unwrap();
        let mut sorted = idx.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 10);
        for (p, &i) in set.prototypes().iter().zip(&idx) {
            assert_eq!(p.points(), data[i].points());
        }
        assert_eq!(
            forgy_init(&data, 10, seed).unwrap(),
            forgy_init(&data, 10, seed).unwrap()
        );
    }
    assert!(forgy_init(&data, 31, 0).is_err());
}

#[test]
fn objective_matches_triple_loop() {
    let (n, k, m, gamma) = (7, 3, 5, 0.05);
    let mut r = rng(2);
    let data = samples(&mut r, n, m);
    let protos = PrototypeSet::new(samples(&mut r, k, m)).unwrap();
    let assignments: Vec<usize> = (0..n).map(|_| r.random_range(0..k)).collect();

    let mse = |a: &Trajectory<f64>, b: &Trajectory<f64>| {
        let mut acc = 0.0;
        for j in 0..m {
            let (p, q) = (a.points()[j], b.points()[j]);
            acc += (p.x - q.x).powi(2) + (p.y - q.y).powi(2);
        }
        acc / m as f64
    };
    let mut winner = 0.0;
    let mut global = 0.0;
    for i in 0..n {
        winner += mse(&data[i], &protos.prototypes()[assignments[i]]);
        for kk in 0..k {
            global += mse(&data[i], &protos.prototypes()[kk]);
        }
    }
    let expected = winner / n as f64 + gamma * global / (n * k) as f64;
    let got = lvq_loss_with_assignments(&protos, &data, &assignments, gamma).unwrap();
    assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0));
}

#[test]
fn identical_samples_pull_both_prototypes_in() {
    let sample: Trajectory<f64> = Trajectory::new(
        "x",
        vec![Point2::new(0.3, -0.2), Point2::new(0.1, 0.5), Point2::new(-0.4, 0.0)],
    )
    .unwrap();
    let data = vec![sample.clone(); 20];
    let far = Trajectory::new(
        "far",
        sample.points().iter().map(|&p| p + Point2::new(2.0, -1.0)).collect(),
    )
    .unwrap();
    let init = PrototypeSet::new(vec![sample.clone(), far]).unwrap();
    let cfg = LvqConfig {
        k: 2,
        gamma: 0.05,
        epochs: 1000,
        ..LvqConfig::default()
    };
    let res = train_lvq_from(&data, init.clone(), &cfg, &mut rng(3)).unwrap();
    for p in res.prototypes.prototypes() {
        for (a, b) in p.points().iter().zip(sample.points()) {
            assert!((*a - *b).norm() < 1e-3);
        }
    }

    let cfg = LvqConfig { gamma: 0.0, ..cfg };
    let res = train_lvq_from(&data, init.clone(), &cfg, &mut rng(3)).unwrap();
    assert_eq!(res.prototypes.support(), Some(&[20, 0][..]));
    let (before, after) = (&init.prototypes()[1], &res.prototypes.prototypes()[1]);
    for (a, b) in before.points().iter().zip(after.points()) {
        assert_eq!(a.x.to_bits(), b.x.to_bits());
        assert_eq!(a.y.to_bits(), b.y.to_bits());
    }
}

#[test]
fn two_clusters_get_one_prototype_each() {
    let mut r = rng(5);
    let centers = [Point2::new(-3.0, 0.0), Point2::new(3.0, 1.0)];
    let data: Vec<_> = (0..40)
        .map(|i| {
            let c = centers[i % 2];
            let pts = random_points(&mut r, 4, 0.1).into_iter().map(|p| p + c).collect();
            Trajectory::new(format!("s{i}"), pts).unwrap()
        })
        .collect();
    let cfg = LvqConfig {
        k: 2,
        learning_rate: 0.5,
        epochs: 100,
        ..LvqConfig::default()
    };
    for seed in 0..5 {
        let res = train_lvq(&data, &LvqConfig { seed, ..cfg.clone() }).unwrap();
        let a = &res.assignments;
        assert!(a.iter().step_by(2).all(|&x| x == a[0]));
        assert!(a.iter().skip(1).step_by(2).all(|&x| x == a[1]));
        assert_ne!(a[0], a[1], "seed {seed}");
        assert!(res.loss_history.last().unwrap() <= &res.loss_history[0]);
    }
}

#[test]
fn training_is_deterministic() {
    let mut r = rng(6);
    let data = samples(&mut r, 25, 5);
    let cfg = LvqConfig {
        k: 4,
        epochs: 20,
        ..LvqConfig::default()
    };
    assert_eq!(train_lvq(&data, &cfg).unwrap(), train_lvq(&data, &cfg).unwrap());
}

fn with_support(protos: Vec<Trajectory<f64>>, data: &[Trajectory<f64>]) -> QuantizationResult<f64> {
    let set = PrototypeSet::new(protos).unwrap();
    let assignments = trajproto::quantize::assign_all(&set, data).unwrap();
    let mut support = vec![0; set.k()];
    for &a in &assignments {
        support[a] += 1;
    }
    let global_error = trajproto::quantize::quantization_error(&set, data).unwrap();
    QuantizationResult {
        prototypes: set.with_support(support).unwrap(),
        assignments,
        global_error,
        loss_history: vec![],
    }
}

#[test]
fn refinement_is_a_monotone_subset() {
    for seed in 0..20 {
        let mut r = rng(50 + seed);
        let data = samples(&mut r, 30, 4);
        let k = r.random_range(2..8);
        let mut protos = samples(&mut r, k, 4);
        // Exact duplicate of some prototype.
        let dup = protos[r.random_range(0..k)].clone().with_id("dup");
        protos.push(dup);
        let res = with_support(protos, &data);
        let full_error = res.global_error;
        let refined = refine_traced(&res, &data, 0.02, 0.01).unwrap();

        let input = res.prototypes.prototypes();
        for (p, &i) in refined.prototypes.prototypes().iter().zip(&refined.selected) {
            assert_eq!(p, &input[i]);
        }
        let mut sel = refined.selected.clone();
        sel.sort_unstable();
        sel.dedup();
        assert_eq!(sel.len(), refined.selected.len());
        assert!(refined.error_trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(*refined.error_trace.last().unwrap() >= full_error);
        let kept: Vec<_> = refined
            .prototypes
            .prototypes()
            .iter()
            .map(|p| p.points().to_vec())
            .collect();
        let uniq = kept
            .iter()
            .filter(|a| kept.iter().filter(|b| b == a).count() == 1)
            .count();
        assert_eq!(uniq, kept.len(), "refined set holds duplicate prototypes");
    }
}
