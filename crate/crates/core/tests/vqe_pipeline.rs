mod common;

use common::{random_instance, standard_xs};
use dpo_vqe::baselines::exhaustive_search;
use dpo_vqe::market::MarketModel;
use dpo_vqe::problem::{build_qubo, qubo_to_ising, DpoConfig, Preset};
use dpo_vqe::sim::SimError;
use dpo_vqe::vqe::{
    pct_below_offset, random_baseline, random_baseline_exact, run_vqe, AnsatzSpec, EstimatorMode,
    OptimizerSpec, ProblemContext, VqeError, VqeRunConfig,
};

fn de(pop_size: usize, generations: usize) -> OptimizerSpec {
    OptimizerSpec::De {
        pop_size,
        generations,
        elitist_pool: None,
    }
}

#[test]
fn exact_uniform_pct_equals_enumeration() {
    for seed in 0..20 {
        let inst = random_instance(seed, 12);
        let h = &inst.ising;
        let n = h.n_qubits();
        let below = (0..1usize << n)
            .filter(|&i| h.cost_of_index(i) < h.offset())
            .count();
        let report = random_baseline_exact(&ProblemContext::ising_only(h)).unwrap();
        assert_eq!(report.pct_below_offset, 100.0 * below as f64 / (1u64 << n) as f64);
    }
}

#[test]
fn sampled_uniform_pct_within_binomial_band() {
    let inst = standard_xs();
    let h = &inst.ising;
    let p = (0..64).filter(|&i| h.cost_of_index(i) < h.offset()).count() as f64 / 64.0;
    let shots = 100_000;
    let report = random_baseline(&ProblemContext::ising_only(h), shots, 9).unwrap();
    let sigma = (p * (1.0 - p) / shots as f64).sqrt();
    assert!((report.pct_below_offset / 100.0 - p).abs() <= 5.0 * sigma);
}

#[test]
fn ra_de_finds_ground_on_standard_instance() {
    let inst = standard_xs();
    let ctx = ProblemContext::portfolio(&inst.ising, &inst.config, &inst.model);
    let run = VqeRunConfig::new(AnsatzSpec::RealAmplitudes { reps: 3 }, de(6, 50), 0);
    let report = run_vqe(&ctx, &run).unwrap();
    let ground = exhaustive_search(&inst.ising).unwrap();
    assert_eq!(report.best_bitstring, ground.argmin);
    assert!((report.min_cost - ground.min_cost).abs() < 1e-12);
    assert!(report.sharpe.is_some());
    assert_eq!(report.pct_below_offset, pct_below_offset(&report.distribution, report.offset));
}

#[test]
fn reports_are_consistent_and_bounded() {
    let inst = standard_xs();
    let ground = exhaustive_search(&inst.ising).unwrap().min_cost;
    let ctx = ProblemContext::portfolio(&inst.ising, &inst.config, &inst.model);
    let specs = [
        (AnsatzSpec::cyclic(), OptimizerSpec::cg()),
        (AnsatzSpec::ora(), de(6, 10)),
        (AnsatzSpec::Tailored, de(6, 10)),
    ];
    for (ansatz, opt) in specs {
        let run = VqeRunConfig::new(ansatz, opt, 3);
        let r = run_vqe(&ctx, &run).unwrap();
        assert!(r.min_cost >= ground - 1e-12);
        assert_eq!(r.min_cost, inst.ising.cost_of_bitstring(&r.best_bitstring).unwrap());
        assert!(r.expectation.unwrap() >= ground - 1e-12);
        assert!((0.0..=100.0).contains(&r.pct_below_offset));
        assert_eq!(r.distribution.total, 10_000.0);
        let again = run_vqe(&ctx, &run).unwrap();
        assert_eq!(r.deterministic_json().unwrap(), again.deterministic_json().unwrap());
    }
}

#[test]
fn penalty_only_problem_reaches_its_minimum() {
    let config = DpoConfig::preset(Preset::Xs);
    let model = MarketModel::zeros(2, 3);
    let h = qubo_to_ising(&build_qubo(&config, &model).unwrap());
    let ground = exhaustive_search(&h).unwrap();
    let run = VqeRunConfig::new(AnsatzSpec::RealAmplitudes { reps: 2 }, de(10, 80), 1);
    let r = run_vqe(&ProblemContext::ising_only(&h), &run).unwrap();
    assert!((r.min_cost - ground.min_cost).abs() < 1e-9);
}

#[test]
fn shot_estimator_is_seeded() {
    let inst = standard_xs();
    let ctx = ProblemContext::ising_only(&inst.ising);
    let mut run = VqeRunConfig::new(AnsatzSpec::RealAmplitudes { reps: 1 }, de(6, 5), 8);
    run.estimator = EstimatorMode::Shots;
    run.estimator_shots = Some(500);
    let a = run_vqe(&ctx, &run).unwrap();
    let b = run_vqe(&ctx, &run).unwrap();
    assert_eq!(a.deterministic_json().unwrap(), b.deterministic_json().unwrap());
}

#[test]
fn qubit_cap_is_enforced_for_large_presets() {
    let config = DpoConfig::preset(Preset::Xxl);
    let h = qubo_to_ising(&build_qubo(&config, &MarketModel::zeros(4, 7)).unwrap());
    let run = VqeRunConfig::new(AnsatzSpec::RealAmplitudes { reps: 3 }, de(6, 1), 0);
    let err = run_vqe(&ProblemContext::ising_only(&h), &run).unwrap_err();
    assert!(matches!(
        err,
        VqeError::Sim(SimError::QubitCapExceeded { n_qubits: 112, cap: 24 })
    ));
}
