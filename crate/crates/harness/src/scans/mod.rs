pub mod approx;
pub mod arith;
pub mod multifreq;
pub mod tools;
pub mod variation;

pub use approx::{approx_error_scan, approx_point, resolve_s_max, ApproxPoint};
pub use arith::{quadratic_sum_scan, verify_arith, verify_arith_with_tables, QuadraticScan};
pub use multifreq::{multifreq_constant_scan, MultifreqMeasurement};
pub use tools::{arc_classify, dump_multiplier};
pub use variation::{variation_ratio, variation_ratio_scan, RatioMeasurement, VariationSetup};
