//! Simulation of a single qubit exposed simultaneously to a Markovian
//! (Kossakowski/Lindblad) channel and an Ising-coupled spin environment,
//! with the BLP, LPP, RHP and LFS non-Markovianity measures, their
//! Markovianity thresholds, positivity windows and phase-diagram scans.
//!
//! All numerics are generic over the floating-point scalar via
//! [`scalar::Scalar`]; the `*64` aliases below pin the shipped `f64`
//! instantiation. Rates are in units of the Ising exchange constant (J = 1),
//! times in 1/J.

pub mod channels;
pub mod error;
pub mod measures;
pub mod numerics;
pub mod oracle;
pub mod qstate;
pub mod scalar;
pub mod scan;
pub mod thresholds;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Concrete `f64` aliases for the main domain types.
pub type C64 = num_complex::Complex<f64>;
pub type CMatrix64 = qstate::CMatrix<f64>;
pub type DensityMatrix64 = qstate::DensityMatrix<f64>;
pub type BlochVector64 = qstate::BlochVector<f64>;
pub type AffineMap64 = qstate::AffineMap<f64>;
pub type KossakowskiMatrix64 = channels::KossakowskiMatrix<f64>;
pub type ChannelScenario64 = channels::ChannelScenario<f64>;
pub type EnvironmentSpec64 = channels::EnvironmentSpec<f64>;
pub type FullModel64 = oracle::FullModel<f64>;
pub type Trajectory64 = oracle::Trajectory<f64>;
pub type MeasureResult64 = measures::MeasureResult<f64>;
pub type PositivityWindow64 = measures::PositivityWindow<f64>;
pub type RateSeries64 = measures::RateSeries<f64>;
pub type ThresholdResult64 = thresholds::ThresholdResult<f64>;
pub type ScanSpec64 = scan::ScanSpec<f64>;
pub type ScanResult64 = scan::ScanResult<f64>;

#[cfg(test)]
mod tests {
    use super::*;

    // The crate is generic over the scalar; exercise the f32 instantiation
    // end to end at a loose tolerance.
    #[test]
    fn f32_instantiation_works() {
        let sc = channels::ChannelScenario::<f32>::isotropic(0.5, 0.5, 2).unwrap();
        let rho0 = qstate::bloch_to_density(&qstate::BlochVector::new(0.6f32, 0.0, 0.3).unwrap());
        let evolved = channels::evolve_analytic(&sc, &rho0, 1.25f32).unwrap();
        assert!((evolved.mat().trace().re - 1.0).abs() < 1e-5);
        let g = channels::coherence_factor(&sc, 1.25f32).unwrap();
        assert!(g.norm() <= 1.0 + 1e-5);
        let d = qstate::eigh(evolved.mat()).unwrap();
        assert!(d.reconstruct().max_abs_diff(evolved.mat()) < 1e-4);
        let rate = measures::rate_blp(&sc, 1.25f32);
        assert!(rate.is_finite());
    }
}
