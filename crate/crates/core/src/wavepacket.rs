//! Superpositions of `2N+1` consecutive eigenstates and their expectation
//! values.
//!
//! Expectations are evaluated from the full double sum
//! `Σ_{m'} Σ_m c̄_{m'} c_m ⟨n+m'|f|n+m⟩ e^{i(E_{n+m'} - E_{n+m})t/ħ}`
//! with exact eigenvalue differences.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qsystems::{EigenSystem, Observable};

/// Allowed imaginary residue of an expectation, relative to `Σ|terms|`.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-10;

pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    system: EigenSystem,
    center: i64,
    half_width: usize,
    coeffs: Vec<Complex64>,
}

impl WavePacket {
    /// All `2N+1` coefficients equal to `1/√(2N+1)`.
    pub fn equal_weight(system: EigenSystem, n: i64, half_width: usize) -> Result<Self> {
        check_width(&system, n, half_width)?;
        let count = 2 * half_width + 1;
        let c = Complex64::new(1.0 / (count as f64).sqrt(), 0.0);
        Ok(Self {
            system,
            center: n,
            half_width,
            coeffs: vec![c; count],
        })
    }

    /// Arbitrary coefficients `c_{-N}..=c_N`, normalized on construction.
    pub fn general(
        system: EigenSystem,
        n: i64,
        half_width: usize,
        coefficients: Vec<Complex64>,
    ) -> Result<Self> {
        check_width(&system, n, half_width)?;
        let expected = 2 * half_width + 1;
        if coefficients.len() != expected {
            return Err(Error::PacketLength {
                expected,
                got: coefficients.len(),
            });
        }
        let norm = coefficients
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            system,
            center: n,
            half_width,
            coeffs: coefficients.into_iter().map(|c| c / norm).collect(),
        })
    }

    /// Gaussian profile `c_m ∝ exp(-m²/(2σ²))`.
    pub fn gaussian(system: EigenSystem, n: i64, half_width: usize, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::NonPositive {
                name: "sigma",
                value: sigma,
            });
        }
        let hw = half_width as i64;
        let coeffs = (-hw..=hw)
            .map(|m| Complex64::new((-((m * m) as f64) / (2.0 * sigma * sigma)).exp(), 0.0))
            .collect();
        Self::general(system, n, half_width, coeffs)
    }

    pub fn system(&self) -> &EigenSystem {
        &self.system
    }

    pub fn center(&self) -> i64 {
        self.center
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn hbar(&self) -> f64 {
        self.system.hbar()
    }

    /// `c_{-N}..=c_N`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn norm_squared(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `Σ |c_m|² E_{n+m}`.
    pub fn mean_energy(&self) -> f64 {
        self.levels()
            .zip(&self.coeffs)
            .map(|(k, c)| c.norm_sqr() * self.system.energy(k).unwrap_or(f64::NAN))
            .sum()
    }

    /// `√(⟨H²⟩ - ⟨H⟩²)`, accumulated from the offsets `E_{n+m} - E_n` so the
    /// common level `E_n` drops out before any rounding.
    pub fn energy_spread(&self) -> f64 {
        let hbar = self.hbar();
        let (first, second) =
            self.levels()
                .zip(&self.coeffs)
                .fold((0.0, 0.0), |(first, second), (k, c)| {
                    let offset = self.system.transition_frequency_unchecked(k, self.center) * hbar;
                    let w = c.norm_sqr();
                    (first + w * offset, second + w * offset * offset)
                });
        (second - first * first).max(0.0).sqrt()
    }

    fn levels(&self) -> impl Iterator<Item = i64> {
        let hw = self.half_width as i64;
        (self.center - hw)..=(self.center + hw)
    }

    /// Precomputes the nonzero terms of the double sum for one observable.
    pub fn expectation_block(&self, obs: Observable) -> Result<ExpectationBlock> {
        let levels: Vec<i64> = self.levels().collect();
        let mut terms = Vec::new();
        for (&row, c_row) in levels.iter().zip(&self.coeffs) {
            for (&col, c_col) in levels.iter().zip(&self.coeffs) {
                let element = self.system.matrix_element(obs, row, col)?;
                if element == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let weight = c_row.conj() * c_col * element;
                let frequency = self.system.transition_frequency_unchecked(row, col);
                terms.push((weight, frequency));
            }
        }
        let scale = terms.iter().map(|(w, _)| w.norm()).sum();
        Ok(ExpectationBlock { terms, scale })
    }

    /// `⟨ψ(t)|f|ψ(t)⟩`.
    pub fn expectation(&self, obs: Observable, t: f64) -> Result<f64> {
        self.expectation_block(obs)?.value(t)
    }

    pub fn expectation_series(&self, obs: Observable, times: &[f64]) -> Result<ExpectationSeries> {
        check_times(times)?;
        let block = self.expectation_block(obs)?;
        let values = times
            .iter()
            .map(|&t| block.value(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExpectationSeries {
            observable: obs,
            center: self.center,
            half_width: self.half_width,
            hbar: self.hbar(),
            times: times.to_vec(),
            values,
        })
    }
}

fn check_width(system: &EigenSystem, n: i64, half_width: usize) -> Result<()> {
    let lowest = n - half_width as i64;
    if lowest <= 0 || lowest < system.ground_index() {
        return Err(Error::PacketWidth { n, half_width });
    }
    Ok(())
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NonIncreasingTimes);
    }
    Ok(())
}

/// Weighted phasors `w_k e^{i ν_k t}` making up one expectation value.
#[derive(Debug, Clone)]
pub struct ExpectationBlock {
    terms: Vec<(Complex64, f64)>,
    scale: f64,
}

impl ExpectationBlock {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Complex sum at time `t`, before the realness check.
    pub fn raw_value(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &(w, nu)| {
                acc + w * Complex64::cis(nu * t)
            })
    }

    /// Real part of [`raw_value`](Self::raw_value) after checking the
    /// imaginary residue.
    pub fn value(&self, t: f64) -> Result<f64> {
        let z = self.raw_value(t);
        if z.im.abs() > IMAGINARY_RESIDUE_TOL * self.scale.max(f64::MIN_POSITIVE) {
            return Err(Error::ImaginaryResidue {
                residue: z.im.abs(),
                scale: self.scale,
            });
        }
        Ok(z.re)
    }
}

/// Expectation values of one observable on one packet over a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationSeries {
    pub observable: Observable,
    pub center: i64,
    pub half_width: usize,
    pub hbar: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ExpectationSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn ho() -> EigenSystem {
        EigenSystem::oscillator(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn equal_weight_construction() {
        let p = WavePacket::equal_weight(ho(), 10, 0).unwrap();
        assert_eq!(p.coefficients(), &[Complex64::new(1.0, 0.0)]);
        let p = WavePacket::equal_weight(ho(), 10, 2).unwrap();
        assert_eq!(p.coefficients().len(), 5);
        for c in p.coefficients() {
            assert!((c.re - 0.447_213_595_499_958).abs() < 1e-15);
        }
        assert!((p.norm_squared() - 1.0).abs() < NORM_TOL);
        assert_eq!(
            WavePacket::equal_weight(ho(), 5, 5).unwrap_err(),
            Error::PacketWidth {
                n: 5,
                half_width: 5
            }
        );
    }

    #[test]
    fn general_construction() {
        let equal = WavePacket::general(ho(), 10, 2, vec![Complex64::new(3.0, 0.0); 5]).unwrap();
        let reference = WavePacket::equal_weight(ho(), 10, 2).unwrap();
        for (a, b) in equal.coefficients().iter().zip(reference.coefficients()) {
            assert!((a - b).norm() < 1e-15);
        }
        let alternating = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        let p = WavePacket::general(ho(), 10, 1, alternating).unwrap();
        assert!((p.norm_squared() - 1.0).abs() < NORM_TOL);
        for c in p.coefficients() {
            assert!((c.norm() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        }
        let g = WavePacket::gaussian(ho(), 100, 9, 3.0).unwrap();
        assert!((g.norm_squared() - 1.0).abs() < NORM_TOL);
        assert!(g.coefficients()[9].re > g.coefficients()[0].re);

        assert_eq!(
            WavePacket::general(ho(), 10, 1, vec![Complex64::new(0.0, 0.0); 3]).unwrap_err(),
            Error::ZeroNorm
        );
        assert!(matches!(
            WavePacket::general(ho(), 10, 1, vec![Complex64::new(1.0, 0.0); 2]),
            Err(Error::PacketLength {
                expected: 3,
                got: 2
            })
        ));
        assert!(WavePacket::general(ho(), 3, 3, vec![Complex64::new(1.0, 0.0); 7]).is_err());
    }

    #[test]
    fn energy_expectation_is_level() {
        let p = WavePacket::equal_weight(ho(), 10, 2).unwrap();
        for t in [0.0, 0.3, 5.0] {
            assert!((p.expectation(Observable::H, t).unwrap() - 10.5).abs() < 1e-13);
        }
        assert!((p.mean_energy() - 10.5).abs() < 1e-13);
    }

    #[test]
    fn stationary_state_has_zero_position() {
        for n in [1, 7, 300] {
            let p = WavePacket::equal_weight(ho(), n, 0).unwrap();
            for t in [0.0, 1.0, 2.5] {
                assert_eq!(p.expectation(Observable::X, t).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn position_matches_closed_form() {
        let p = WavePacket::equal_weight(ho(), 100, 5).unwrap();
        for t in [0.0, 0.7, 2.1] {
            let engine = p.expectation(Observable::X, t).unwrap();
            let closed = ho()
                .ho_expectation_closed_form(Observable::X, 100, 5, t)
                .unwrap();
            assert!((engine - closed).abs() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn series_basics() {
        let p = WavePacket::equal_weight(ho(), 100, 5).unwrap();
        let s = p.expectation_series(Observable::P, &[0.4]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.values[0], p.expectation(Observable::P, 0.4).unwrap());
        assert_eq!(
            p.expectation_series(Observable::X, &[]).unwrap_err(),
            Error::EmptyGrid
        );
        assert_eq!(
            p.expectation_series(Observable::X, &[0.0, 0.0])
                .unwrap_err(),
            Error::NonIncreasingTimes
        );
        assert!(p
            .expectation_series(Observable::X, &[0.0, f64::NAN])
            .is_err());
    }

    #[test]
    fn quadratic_observables_balance() {
        // μω²⟨x²⟩ + ⟨p²⟩/μ = 2⟨H⟩: the cos 2ωt terms cancel
        let sys = EigenSystem::oscillator(1.0, 1.0, 1.0).unwrap();
        let p = WavePacket::equal_weight(sys, 100, 5).unwrap();
        let times: Vec<f64> = (0..50).map(|k| 0.13 * k as f64).collect();
        let x2 = p.expectation_series(Observable::X2, &times).unwrap();
        let p2 = p.expectation_series(Observable::P2, &times).unwrap();
        let h = p.expectation(Observable::H, 0.0).unwrap();
        for (a, b) in x2.values.iter().zip(&p2.values) {
            assert!((a + b - 2.0 * h).abs() < 1e-10);
        }
    }

    #[test]
    fn oscillator_series_is_periodic() {
        let sys = EigenSystem::oscillator(1.0, 2.0, 0.5).unwrap();
        let p = WavePacket::equal_weight(sys, 60, 6).unwrap();
        let period = TAU / 2.0;
        for obs in Observable::ALL {
            for t in [0.0, 0.37, 1.9] {
                let a = p.expectation(obs, t).unwrap();
                let b = p.expectation(obs, t + period).unwrap();
                assert!((a - b).abs() < 1e-10, "{obs} t = {t}");
            }
        }
    }

    #[test]
    fn well_expectations_are_real() {
        let sys = EigenSystem::square_well(1.0, 1.0, 0.01).unwrap();
        let p = WavePacket::gaussian(sys, 100, 8, 3.0).unwrap();
        for obs in Observable::ALL {
            let block = p.expectation_block(obs).unwrap();
            for t in [0.0, 1e-3, 0.05, 0.3] {
                let z = block.raw_value(t);
                assert!(z.im.abs() <= IMAGINARY_RESIDUE_TOL * block.scale, "{obs}");
            }
        }
    }
}
