//! Shared fixtures for the benchmarks in `benches/`.

use minimax_core::benchmarks::{self, BenchmarkProblem};
use minimax_core::{DecisionPoint, SubproblemInput};

/// The three benchmark problems at their default sizes.
pub fn problems() -> Vec<BenchmarkProblem> {
    benchmarks::BENCHMARK_IDS
        .iter()
        .map(|id| benchmarks::by_id(id, None).expect("known id"))
        .collect()
}

/// Deterministic start inside the problem's start box.
pub fn start(problem: &BenchmarkProblem) -> DecisionPoint {
    let b = problem.start_box();
    let coords = (0..problem.dimension())
        .map(|i| 0.6 * b * ((i as f64 + 1.0) * 1.7).sin())
        .collect();
    DecisionPoint::new(coords).expect("finite")
}

/// Subproblem with `r` gradients in dimension `n`, filled from a fixed
/// trigonometric pattern.
pub fn subproblem(r: usize, n: usize) -> SubproblemInput {
    let gradients = (0..r)
        .map(|i| (0..n).map(|j| ((i * n + j) as f64 * 0.37).sin() * 5.0).collect())
        .collect();
    let values = (0..r).map(|i| (i as f64 * 1.3).cos()).collect();
    SubproblemInput::new(gradients, values, (0..r).collect()).expect("consistent shapes")
}
