//! Convergence sweeps, rate fitting, optimal-`m` search and result files.

mod emit;
mod fit;
mod sweep;

pub use emit::{emit_results, read_csv, svg_plot, write_csv, Emitted, RunSummary, CSV_HEADER};
pub use fit::{fit_rate, pre_floor_rows};
pub use sweep::{
    bench_pool, optimal_m_for, optimal_m_search, pick_optimal_m, run_sweep, run_sweep_on, Benchmark,
    MChoice, SweepResult, SweepSpec, M_CANDIDATES, REFERENCE_STEP, REFERENCE_TOLERANCE,
};
