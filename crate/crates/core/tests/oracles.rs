use causalqa_core::datagen::{simulate_effect, simulate_sem, true_ate, true_hte, EffectParams, SemParams};
use causalqa_core::engine::linalg::{mean, ols};
use causalqa_core::engine::pc::{learn_graph, DEFAULT_ALPHA};
use causalqa_core::rng::from_seed;
use causalqa_core::{ConditionClause, Graph};
use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

fn names(j: usize) -> Vec<String> {
    (1..=j).map(|i| format!("x{i}")).collect()
}

fn columns(d: &causalqa_core::TabularDataset) -> Vec<Vec<f64>> {
    d.names().iter().map(|n| d.numeric(n).unwrap().to_vec()).collect()
}

fn covariance(cols: &[Vec<f64>]) -> DMatrix<f64> {
    let j = cols.len();
    let n = cols[0].len() as f64;
    let means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    DMatrix::from_fn(j, j, |a, b| cols[a].iter().zip(&cols[b]).map(|(x, y)| (x - means[a]) * (y - means[b])).sum::<f64>() / (n - 1.0))
}

#[test]
fn sem_sample_covariance_matches_implied() {
    let mut rng = from_seed(11);
    let p = SemParams::sample(5, 100_000, 0.3, &mut rng).unwrap();
    let d = simulate_sem(&p, &names(5), &mut rng).unwrap();
    let j = p.j();
    // X = Bᵀ X + e, so Σ = A D Aᵀ with A = (I - Bᵀ)⁻¹.
    let b = DMatrix::from_fn(j, j, |r, c| p.b[r][c]);
    let a = (DMatrix::identity(j, j) - b.transpose()).try_inverse().unwrap();
    let noise = DMatrix::from_diagonal(&DVector::from_iterator(j, p.noise_sd.iter().map(|s| s * s)));
    let implied = &a * noise * a.transpose();
    let sample = covariance(&columns(&d));
    for r in 0..j {
        for c in 0..j {
            let scale = (implied[(r, r)] * implied[(c, c)]).sqrt();
            assert!((sample[(r, c)] - implied[(r, c)]).abs() <= 0.02 * scale, "({r},{c}): {} vs {}", sample[(r, c)], implied[(r, c)]);
        }
    }
}

#[test]
fn closed_form_ate_matches_monte_carlo() {
    let mut rng = from_seed(5);
    for _ in 0..5 {
        let p = EffectParams::sample(3, &mut rng).unwrap();
        let draws = 200_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let s: Vec<f64> = p.mu.iter().zip(&p.sigma).map(|(m, sd)| Normal::new(*m, *sd).unwrap().sample(&mut rng)).collect();
            acc += p.expected_outcome(1.0, &s) - p.expected_outcome(0.0, &s);
        }
        let mc = acc / draws as f64;
        let truth = true_ate(&p);
        assert!((mc - truth).abs() <= 0.02 * truth.abs().max(1.0), "{mc} vs {truth}");
    }
}

#[test]
fn hte_at_means_equals_ate() {
    let p = EffectParams::sample(3, &mut from_seed(8)).unwrap();
    assert!((true_hte(&p, &[]).unwrap() - true_ate(&p)).abs() < 1e-12);
    let pinned = ConditionClause::new("s2", p.mu[1]);
    assert!((true_hte(&p, &[pinned]).unwrap() - true_ate(&p)).abs() < 1e-12);
}

#[test]
fn simulated_arms_differ_by_ate() {
    let mut rng = from_seed(21);
    let p = EffectParams::sample(2, &mut rng).unwrap();
    let d = simulate_effect(&p, 200_000, "a", "y", &mut rng).unwrap();
    let (a, y) = (d.numeric("a").unwrap(), d.numeric("y").unwrap());
    let arm = |v: f64| {
        let ys: Vec<f64> = a.iter().zip(y).filter(|(t, _)| **t == v).map(|(_, y)| *y).collect();
        mean(&ys)
    };
    let diff = arm(1.0) - arm(0.0);
    let truth = true_ate(&p);
    assert!((diff - truth).abs() <= 0.05 * truth.abs().max(1.0), "{diff} vs {truth}");
}

#[test]
fn ols_solves_normal_equations() {
    let mut rng = from_seed(3);
    let n = 500;
    let x: Vec<Vec<f64>> = (0..4).map(|_| (0..n).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
    let y: Vec<f64> = (0..n).map(|i| 1.5 - 2.0 * x[0][i] + 0.5 * x[2][i] + x[3][i] * x[1][i] + rng.random_range(-1.0..1.0)).collect();
    let fit = ols(&x, &y).unwrap();
    let design = DMatrix::from_fn(n, 5, |r, c| if c == 0 { 1.0 } else { x[c - 1][r] });
    let xtx = design.transpose() * &design;
    let xty = design.transpose() * DVector::from_vec(y);
    let beta = xtx.lu().solve(&xty).unwrap();
    assert!((fit.intercept - beta[0]).abs() < 1e-8);
    for k in 0..4 {
        assert!((fit.coefficients[k] - beta[k + 1]).abs() < 1e-8, "coef {k}");
    }
}

fn learn(b: Vec<Vec<f64>>, seed: u64) -> Graph {
    let j = b.len();
    let p = SemParams { b, p_mask: 0.0, noise_sd: vec![1.0; j], n: 3000 };
    let d = simulate_sem(&p, &names(j), &mut from_seed(seed)).unwrap();
    learn_graph(&columns(&d), &names(j), DEFAULT_ALPHA).unwrap()
}

#[test]
fn collider_is_oriented() {
    let g = learn(vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0], vec![0.0; 3]], 1);
    assert!(g.is_directed(0, 2) && g.is_directed(1, 2));
    assert!(!g.has_edge(0, 1) && !g.has_edge(1, 0));
}

#[test]
fn chain_keeps_skeleton_without_orientation() {
    let g = learn(vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0; 3]], 2);
    assert_eq!(g.skeleton(), vec![(0, 1), (1, 2)]);
    assert!(g.has_edge(0, 1) && g.has_edge(1, 0) && g.has_edge(1, 2) && g.has_edge(2, 1));
}

#[test]
fn independent_nodes_stay_apart() {
    let g = learn(vec![vec![0.0; 4]; 4], 3);
    assert!(g.skeleton().is_empty());
}

#[test]
fn conflicting_colliders_leave_no_directed_cycle() {
    let mut rng = from_seed(13_470_895_516_523_102_765);
    let p = SemParams::sample(6, 500, 0.5, &mut rng).unwrap();
    let d = simulate_sem(&p, &names(6), &mut rng).unwrap();
    let g = learn_graph(&columns(&d), &names(6), DEFAULT_ALPHA).unwrap();
    assert!(g.directed_part_is_acyclic());
}
