//! Coherent-state configurations, semiclassical levels and bifurcations.

mod bifurcation;
mod config;
mod levels;

pub use bifurcation::{
    bifurcation_histogram, bifurcation_points, deviation, deviation_with_mode,
    lowest_semiclassical, stable_levels, BifurcationHistogram, DeviationPoint, HistogramSource,
};
pub use config::{
    distinct_couplings, effective_boundary_couplings, effective_couplings, enumerate_configs,
    ConfigEnumeration, ConfigMode, EffectiveCouplings, Reductions, SpinConfiguration,
    DEFAULT_ENUM_BUDGET,
};
pub use levels::{
    binomial, counting_function, counting_function_table, ferro_spectrum_b0, ising_levels,
    landscape_energy, lmg_levels, para_spectrum_j0, semiclassical_level, Branch, Level,
    SemiclassicalLevel,
};
