mod common;

use chebyshev_lowrank::alternating::{LineStatus, StartFactor, Termination};
use chebyshev_lowrank::synth::{synth_matrix, Spectrum, SpectrumSpec};
use chebyshev_lowrank::{alternating_minimize, verify_local_optimality, AlternatingOptions, Matrix};
use common::gaussian;
use proptest::prelude::*;

fn uniform_spectrum(n: usize, s: u64) -> Matrix {
    synth_matrix(n, n, &SpectrumSpec::new(Spectrum::UniformInterval { lo: 1.0, hi: 2.0 }, s)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn history_never_increases(m in 4usize..=12, n in 4usize..=12, r in 1usize..=3, s in any::<u64>()) {
        prop_assume!(m.min(n) > r);
        let a = gaussian(m, n, s);
        let res = alternating_minimize(&a, r, &AlternatingOptions { inits: 2, seed: s, ..Default::default() }).unwrap();
        for w in res.history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", res.history);
        }
        prop_assert!((res.error - res.history.last().unwrap()).abs() <= 1e-12 * (1.0 + res.error));
    }

    #[test]
    fn exact_low_rank_is_recovered(m in 4usize..=12, n in 4usize..=12, r in 1usize..=3, s in any::<u64>()) {
        prop_assume!(m.min(n) > r);
        let a = gaussian(m, r, s).matmul_transpose(&gaussian(n, r, !s)).unwrap();
        let res = alternating_minimize(&a, r, &AlternatingOptions { inits: 3, seed: s, ..Default::default() }).unwrap();
        prop_assert!(res.error <= 1e-8, "error {}", res.error);
    }

    #[test]
    fn more_starts_never_hurt(n in 5usize..=10, s in any::<u64>()) {
        let a = gaussian(n, n, s);
        let few = alternating_minimize(&a, 2, &AlternatingOptions { inits: 2, seed: s, ..Default::default() }).unwrap();
        let many = alternating_minimize(&a, 2, &AlternatingOptions { inits: 5, seed: s, ..Default::default() }).unwrap();
        prop_assert!(many.error <= few.error);
        prop_assert_eq!(&many.per_init_errors()[..2], &few.per_init_errors()[..]);
    }

    #[test]
    fn transposed_problem_mirrors(m in 4usize..=9, n in 4usize..=9, s in any::<u64>()) {
        let a = gaussian(m, n, s);
        let opts = AlternatingOptions { inits: 2, seed: s, ..Default::default() };
        let direct = alternating_minimize(&a, 1, &opts).unwrap();
        let mirrored = alternating_minimize(&a.transpose(), 1, &AlternatingOptions { start: StartFactor::U, ..opts }).unwrap();
        prop_assert_eq!(direct.error.to_bits(), mirrored.error.to_bits());
        prop_assert_eq!(direct.u.as_slice(), mirrored.v.as_slice());
    }
}

#[test]
fn identity_benchmarks() {
    let opts = AlternatingOptions { inits: 5, ..Default::default() };
    let r1 = alternating_minimize(&Matrix::identity(8), 1, &opts).unwrap();
    assert!(r1.error <= 0.5 + 1e-6, "error {}", r1.error);
    let e1 = alternating_minimize(&Matrix::identity(16), 1, &opts).unwrap().error;
    let e4 = alternating_minimize(&Matrix::identity(16), 4, &opts).unwrap().error;
    assert!(e4 <= e1, "r=4 {} r=1 {}", e4, e1);
}

#[test]
fn seeded_runs_repeat() {
    let a = uniform_spectrum(12, 3);
    let opts = AlternatingOptions { inits: 3, seed: 42, ..Default::default() };
    let x = alternating_minimize(&a, 3, &opts).unwrap();
    let y = alternating_minimize(&a, 3, &opts).unwrap();
    assert_eq!(x.u.as_slice(), y.u.as_slice());
    assert_eq!(x.v.as_slice(), y.v.as_slice());
    assert_eq!(x.history, y.history);
    assert_eq!(x.init_seed, y.init_seed);
}

#[test]
fn thread_count_does_not_change_results() {
    let a = uniform_spectrum(20, 9);
    let opts = AlternatingOptions { inits: 4, seed: 1, ..Default::default() };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| alternating_minimize(&a, 4, &opts).unwrap())
    };
    let (one, four) = (run(1), run(4));
    assert_eq!(one.u.as_slice(), four.u.as_slice());
    assert_eq!(one.per_init_errors(), four.per_init_errors());
}

#[test]
fn degenerate_iteration_limits() {
    let a = uniform_spectrum(10, 2);
    let res = alternating_minimize(&a, 2, &AlternatingOptions { inits: 1, max_outer: 1, ..Default::default() }).unwrap();
    assert_eq!(res.outer_iters, 1);
    assert!(matches!(res.termination, Termination::MaxIters | Termination::Converged));
    assert!(res.history.len() <= 2);
}

#[test]
fn converged_output_passes_the_check() {
    for s in 0..5 {
        let a = uniform_spectrum(10, s);
        let res = alternating_minimize(&a, 2, &AlternatingOptions { max_outer: 2000, ..Default::default() }).unwrap();
        let report = verify_local_optimality(&a, &res.u, &res.v).unwrap();
        assert!(report.locally_optimal_hint, "seed {}: {:?}", s, report);
        assert!(!report.per_row.is_empty() || !report.per_col.is_empty());
    }
}

#[test]
fn perturbed_factor_fails_the_check() {
    for s in 0..5 {
        let a = uniform_spectrum(10, s);
        let res = alternating_minimize(&a, 2, &AlternatingOptions::default()).unwrap();
        let resid = a.sub(&res.u.matmul_transpose(&res.v).unwrap()).unwrap();
        // push the largest residual further out through U
        let (mut bi, mut bj) = (0, 0);
        for i in 0..10 {
            for j in 0..10 {
                if resid[(i, j)].abs() > resid[(bi, bj)].abs() {
                    (bi, bj) = (i, j);
                }
            }
        }
        let k = if res.v[(bj, 0)].abs() >= res.v[(bj, 1)].abs() { 0 } else { 1 };
        let mut u = res.u.clone();
        u[(bi, k)] -= 0.1 * resid[(bi, bj)].signum() * res.v[(bj, k)].signum();
        let report = verify_local_optimality(&a, &u, &res.v).unwrap();
        assert!(!report.locally_optimal_hint, "seed {}", s);
        assert!(report.per_row.iter().chain(&report.per_col).any(|c| c.status == LineStatus::Fail));
    }
}

#[test]
fn exact_factors_report_zero_residual() {
    let u = gaussian(7, 2, 1);
    let v = gaussian(6, 2, 2);
    let a = u.matmul_transpose(&v).unwrap();
    let report = verify_local_optimality(&a, &u, &v).unwrap();
    assert!(report.error <= 1e-12);
    assert!(report.locally_optimal_hint);
    assert!(report.per_row.is_empty() && report.per_col.is_empty());
}
