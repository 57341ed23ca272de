//! Powell's method and the baseline algorithms.

mod cd_qaoa;
mod grid;
mod pg_qaoa;
mod powell;
mod qaoa;

pub use powell::{powell_minimize, PowellConfig, PowellResult};
pub use grid::{grid_oracle, grid_values, GridResult, GRID_BUDGET};
pub use qaoa::{alternating, optimize_durations, qaoa_env, qaoa_optimize, DurationSearch, QaoaResult, SearchResult};
pub use pg_qaoa::{pg_qaoa_train, pg_qaoa_train_order, PgQaoaOutcome, PgQaoaPolicy, PgQaoaRun};
pub use cd_qaoa::{cd_default_hyperparams, cd_default_search, cd_qaoa_train, CdQaoaOutcome, CdTask};
