//! Boué–Dupuis machinery: the bump `f_M`, the low-pass process `Z_M`, the
//! drift `θ⁰`, per-sample objectives, and divergence scans.

pub mod bump;
pub mod drift;
pub mod objective;
pub mod ou;
pub mod scan;

pub use bump::BumpProfile;
pub use drift::{
    alpha_mn, build_fm, build_theta0, exact_ensemble, fm_mass, quartic_q, sample_terminal_exact, simulate_paths,
    DriftEnsemble, DriftSetup, PathRecord,
};
pub use objective::{
    bd_objective_complex_quartic, bd_objective_cubic, bd_objective_quartic, cubic_besov_norm, shifted_wick_mass, smoothed_sup_norm,
    ComplexQuarticObjective, CubicObjective, QuarticObjective,
};
pub use ou::{zm_moments_exact, ModeMoments};
pub use scan::{divergence_scan, DivergenceConfig, ScanRow};
