//! Binary contingency tables: exact counts, maximum-entropy typical tables,
//! the independence estimate, and the asymptotics of the two-level margin
//! family `(n, δ, B, C)`.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`margins`] | [`MarginPair`], Gale–Ryser feasibility, family margins, [`bmax`] |
//! | [`exact`] | brute force, column DP and row-insertion exact counters |
//! | [`typical`] | typical-table solver and entropy upper bound |
//! | [`independence`] | `ln I(r, c)` via log-gamma and exact fractions |
//! | [`asymptotics`] | expansion coefficients, `Δ_{B,C}`, `γ_c`, bounds |
//! | [`experiments`] | figure, convergence and sweep drivers with CSV output |

pub mod asymptotics;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod independence;
pub mod margins;
pub mod numeric;
pub mod typical;

pub use error::{Error, Result};
pub use exact::{count_brute_force, count_by_rows, count_dp, CountResult, DpOptions};
pub use independence::{log_heuristic, HeuristicResult};
pub use margins::{bmax, build_family_margins, is_feasible, FamilyParams, MarginPair};
pub use typical::{
    barvinok_bounds, bernoulli_entropy, solve_typical_table, SolverOptions, TypicalTable,
};
