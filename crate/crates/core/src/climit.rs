//! Classical-limit experiments.
//!
//! A [`LimitSchedule`] drives `n → ∞` with `nħ = J` fixed and the packet
//! half-width `N = max(1, ⌊n^γ⌋)`, so that `N → ∞` while `N/n → 0`. At each
//! scan point the quantum expectation series is compared against the
//! classical trajectory and against the Fejér mean and the partial sum of the
//! classical Fourier series at matched order.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qsystems::{EigenSystem, Observable};
use crate::spectral::{
    band_excursion, fejer_series, overshoot_metric, partial_sum_series, uniform_grid,
    PeriodicSignal, SummationKind,
};
use crate::wavepacket::WavePacket;

/// Errors below this are reported as converged rather than fitted.
pub const ERROR_FLOOR: f64 = 1e-12;

/// Time points per classical period unless a grid is given explicitly.
pub const DEFAULT_POINTS_PER_PERIOD: usize = 256;

/// Samples used to locate the classical band `[min f, max f]`.
const BAND_SAMPLES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitSchedule {
    action: f64,
    n_values: Vec<i64>,
    gamma: f64,
}

impl LimitSchedule {
    pub fn new(action: f64, n_values: Vec<i64>, gamma: f64) -> Result<Self> {
        if !(action > 0.0 && action.is_finite()) {
            return Err(Error::NonPositive {
                name: "action",
                value: action,
            });
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Schedule(format!("exponent {gamma} outside (0, 1)")));
        }
        if n_values.is_empty() {
            return Err(Error::Schedule("no quantum numbers".into()));
        }
        if n_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Schedule("quantum numbers must increase".into()));
        }
        let schedule = Self {
            action,
            n_values,
            gamma,
        };
        for &n in &schedule.n_values {
            if n < 2 {
                return Err(Error::Schedule(format!("n = {n} is below 2")));
            }
            if n - schedule.half_width(n) as i64 <= 0 {
                return Err(Error::Schedule(format!(
                    "n = {n} leaves no room for N = {}",
                    schedule.half_width(n)
                )));
            }
        }
        let ratios: Vec<f64> = schedule
            .n_values
            .iter()
            .map(|&n| schedule.half_width(n) as f64 / n as f64)
            .collect();
        if ratios.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Schedule("N/n grows along the schedule".into()));
        }
        Ok(schedule)
    }

    pub fn action(&self) -> f64 {
        self.action
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_values(&self) -> &[i64] {
        &self.n_values
    }

    /// `N(n) = max(1, ⌊n^γ⌋)`.
    pub fn half_width(&self, n: i64) -> usize {
        // the nudge keeps exact powers such as 100^0.5 from flooring low
        let raw = (n as f64).powf(self.gamma) * (1.0 + 1e-12);
        (raw.floor() as usize).max(1)
    }

    /// `ħ(n) = J/n`.
    pub fn hbar(&self, n: i64) -> f64 {
        self.action / n as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TimeGrid {
    /// Uniform points over one Bohr period `2π/ω(n)` at each scan point.
    PerPeriod(usize),
    Explicit(Vec<f64>),
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid::PerPeriod(DEFAULT_POINTS_PER_PERIOD)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorNorms {
    pub sup: f64,
    pub rms: f64,
}

impl ErrorNorms {
    pub fn between(a: &[f64], b: &[f64]) -> Self {
        let (sup, sq) = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold((0.0f64, 0.0f64), |(sup, sq), d| (sup.max(d), sq + d * d));
        Self {
            sup,
            rms: (sq / a.len().max(1) as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub n: i64,
    pub hbar: f64,
    pub half_width: usize,
    /// `⟨H⟩` on the packet; the classical orbit is taken at this energy.
    pub reference_energy: f64,
    pub bohr_frequency: f64,
    /// Time shift applied to every classical reference.
    pub phase_offset: f64,
    pub classical: ErrorNorms,
    pub fejer: ErrorNorms,
    pub partial: ErrorNorms,
    pub band_lo: f64,
    pub band_hi: f64,
    pub quantum_overshoot: f64,
    pub fejer_overshoot: f64,
    pub partial_overshoot: f64,
    /// `√(⟨H²⟩ - ⟨H⟩²) / ⟨H⟩`.
    pub relative_energy_spread: f64,
    /// Largest `|⟨f⟩|` over the grid, for relative errors.
    pub quantum_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateFit {
    /// Least-squares slope of `log(error)` against `log(n)`.
    Exponent(f64),
    /// Some error sat below [`ERROR_FLOOR`]; nothing to fit.
    BelowFloor,
}

impl RateFit {
    pub fn exponent(self) -> Option<f64> {
        match self {
            RateFit::Exponent(e) => Some(e),
            RateFit::BelowFloor => None,
        }
    }
}

impl Serialize for RateFit {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RateFit::Exponent(e) => serializer.serialize_f64(*e),
            RateFit::BelowFloor => serializer.serialize_str("below_floor"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceRates {
    pub classical: RateFit,
    pub fejer: RateFit,
    pub partial: RateFit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub system: EigenSystem,
    pub observable: Observable,
    pub action: f64,
    pub gamma: f64,
    pub points: Vec<ScanPoint>,
    /// Present when the scan has at least three points.
    pub rates: Option<ReferenceRates>,
}

/// Runs the limit scan. Scan points are evaluated in parallel and reported
/// in schedule order.
pub fn run_scan(
    system: &EigenSystem,
    obs: Observable,
    schedule: &LimitSchedule,
    times: &TimeGrid,
) -> Result<ConvergenceReport> {
    for &n in schedule.n_values() {
        system.check_index(n - schedule.half_width(n) as i64)?;
    }
    let points = schedule
        .n_values()
        .par_iter()
        .map(|&n| scan_point(system, obs, schedule, times, n))
        .collect::<Result<Vec<_>>>()?;
    let mut report = ConvergenceReport {
        system: *system,
        observable: obs,
        action: schedule.action(),
        gamma: schedule.gamma(),
        points,
        rates: None,
    };
    if report.points.len() >= 3 {
        report.rates = Some(fit_rate(&report)?);
    }
    Ok(report)
}

fn scan_point(
    system: &EigenSystem,
    obs: Observable,
    schedule: &LimitSchedule,
    times: &TimeGrid,
    n: i64,
) -> Result<ScanPoint> {
    let hbar = schedule.hbar(n);
    let half_width = schedule.half_width(n);
    let sys = system.with_hbar(hbar)?;
    let packet = WavePacket::equal_weight(sys, n, half_width)?;
    let bohr_frequency = sys.classical_frequency(n)?;
    let grid = match times {
        TimeGrid::PerPeriod(k) => uniform_grid(TAU / bohr_frequency, *k),
        TimeGrid::Explicit(t) => t.clone(),
    };
    let quantum = packet.expectation_series(obs, &grid)?.values;

    let reference_energy = packet.mean_energy();
    let signal = sys.classical_signal(obs, reference_energy)?;
    let coeffs = signal.coefficients(2 * half_width)?;

    let phase_offset = if sys.is_oscillator() {
        0.0
    } else {
        fit_phase_offset(&signal, &grid, &quantum)
    };
    let shifted: Vec<f64> = grid.iter().map(|t| t + phase_offset).collect();
    let classical: Vec<f64> = shifted.iter().map(|&t| signal.value(t)).collect();
    let fejer: Vec<f64> = fejer_series(&coeffs, half_width, &shifted)?
        .iter()
        .map(|z| z.re)
        .collect();
    let partial: Vec<f64> = partial_sum_series(&coeffs, half_width, &shifted)?
        .iter()
        .map(|z| z.re)
        .collect();

    let (band_lo, band_hi) = signal.sampled_range(BAND_SAMPLES);
    let mean = reference_energy;
    let spread = packet.energy_spread();
    Ok(ScanPoint {
        n,
        hbar,
        half_width,
        reference_energy,
        bohr_frequency,
        phase_offset,
        classical: ErrorNorms::between(&quantum, &classical),
        fejer: ErrorNorms::between(&quantum, &fejer),
        partial: ErrorNorms::between(&quantum, &partial),
        band_lo,
        band_hi,
        quantum_overshoot: band_excursion(&quantum, band_lo, band_hi),
        fejer_overshoot: band_excursion(&fejer, band_lo, band_hi),
        partial_overshoot: band_excursion(&partial, band_lo, band_hi),
        relative_energy_spread: spread / mean,
        quantum_scale: quantum.iter().fold(0.0, |m, v| m.max(v.abs())),
    })
}

/// Time shift `τ` maximizing the normalized cross-correlation of the quantum
/// series with `c(t+τ)`, searched on a quarter-step grid over one classical
/// period. Ties go to the smallest `|τ|`.
pub fn fit_phase_offset(signal: &PeriodicSignal, times: &[f64], quantum: &[f64]) -> f64 {
    let period = signal.period();
    let candidates = 4 * times.len().max(1);
    let q_mean = quantum.iter().sum::<f64>() / quantum.len().max(1) as f64;
    let score = |tau: f64| -> f64 {
        let c: Vec<f64> = times.iter().map(|&t| signal.value(t + tau)).collect();
        let c_mean = c.iter().sum::<f64>() / c.len().max(1) as f64;
        let (cross, norm) = quantum
            .iter()
            .zip(&c)
            .fold((0.0, 0.0), |(cross, norm), (q, c)| {
                (
                    cross + (q - q_mean) * (c - c_mean),
                    norm + (c - c_mean).powi(2),
                )
            });
        if norm > 0.0 {
            cross / norm.sqrt()
        } else {
            0.0
        }
    };
    let mut best = (0.0, score(0.0));
    for j in 1..=candidates / 2 {
        for tau in [j as f64, -(j as f64)] {
            let tau = tau * period / candidates as f64;
            let s = score(tau);
            if s > best.1 + 1e-12 * best.1.abs() {
                best = (tau, s);
            }
        }
    }
    best.0
}

/// Least-squares slope of `log(error)` against `log(n)`.
pub fn fit_log_log(ns: &[f64], errors: &[f64]) -> Result<RateFit> {
    if ns.len() < 3 || ns.len() != errors.len() {
        return Err(Error::TooFewPoints(ns.len().min(errors.len())));
    }
    if errors.iter().any(|&e| e.is_nan() || e < ERROR_FLOOR) {
        return Ok(RateFit::BelowFloor);
    }
    let xs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let (x_mean, y_mean) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let (sxy, sxx) = xs.iter().zip(&ys).fold((0.0, 0.0), |(sxy, sxx), (x, y)| {
        (
            sxy + (x - x_mean) * (y - y_mean),
            sxx + (x - x_mean).powi(2),
        )
    });
    Ok(RateFit::Exponent(sxy / sxx))
}

/// Convergence exponents of the sup-norm errors against each reference.
pub fn fit_rate(report: &ConvergenceReport) -> Result<ReferenceRates> {
    let ns: Vec<f64> = report.points.iter().map(|p| p.n as f64).collect();
    let sup = |f: fn(&ScanPoint) -> ErrorNorms| -> Vec<f64> {
        report.points.iter().map(|p| f(p).sup).collect()
    };
    Ok(ReferenceRates {
        classical: fit_log_log(&ns, &sup(|p| p.classical))?,
        fejer: fit_log_log(&ns, &sup(|p| p.fejer))?,
        partial: fit_log_log(&ns, &sup(|p| p.partial))?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummationComparison {
    pub order: usize,
    pub times: Vec<f64>,
    pub signal: Vec<f64>,
    pub partial: Vec<f64>,
    pub fejer: Vec<f64>,
    pub band_lo: f64,
    pub band_hi: f64,
    pub partial_overshoot: f64,
    pub fejer_overshoot: f64,
}

/// Partial sum of order `order` against the Fejér mean with `N = order`
/// (which averages partial sums up to `2·order`).
pub fn compare_summations(
    signal: &PeriodicSignal,
    order: usize,
    times: &[f64],
) -> Result<SummationComparison> {
    let coeffs = signal.coefficients(2 * order)?;
    let (band_lo, band_hi) = signal.sampled_range(BAND_SAMPLES.max(32 * order));
    let real = |v: Vec<num_complex::Complex64>| -> Vec<f64> { v.iter().map(|z| z.re).collect() };
    Ok(SummationComparison {
        order,
        times: times.to_vec(),
        signal: times.iter().map(|&t| signal.value(t)).collect(),
        partial: real(partial_sum_series(&coeffs, order, times)?),
        fejer: real(fejer_series(&coeffs, order, times)?),
        band_lo,
        band_hi,
        partial_overshoot: overshoot_metric(
            &coeffs,
            SummationKind::Partial,
            order,
            band_lo,
            band_hi,
            times,
        )?,
        fejer_overshoot: overshoot_metric(
            &coeffs,
            SummationKind::Fejer,
            order,
            band_lo,
            band_hi,
            times,
        )?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeComparison {
    pub n: i64,
    pub half_width: usize,
    pub sigma: f64,
    pub equal_amplitude: f64,
    pub gaussian_amplitude: f64,
    /// Gaussian amplitude over equal-weight amplitude.
    pub ratio: f64,
}

/// Oscillation amplitude `(max - min)/2` of `⟨f⟩` over one Bohr period for
/// the equally weighted packet and a Gaussian packet of width
/// `σ = sigma_fraction·N`, with `N = ⌈n^exponent⌉` and `ħ = J/n`.
pub fn coefficient_dependence(
    system: &EigenSystem,
    obs: Observable,
    action: f64,
    n_values: &[i64],
    exponent: f64,
    sigma_fraction: f64,
) -> Result<Vec<AmplitudeComparison>> {
    n_values
        .iter()
        .map(|&n| {
            let half_width = ((n as f64).powf(exponent) * (1.0 - 1e-12)).ceil() as usize;
            let sys = system.with_hbar(action / n as f64)?;
            let sigma = sigma_fraction * half_width as f64;
            let grid = uniform_grid(TAU / sys.classical_frequency(n)?, DEFAULT_POINTS_PER_PERIOD);
            let amplitude = |packet: WavePacket| -> Result<f64> {
                let v = packet.expectation_series(obs, &grid)?.values;
                let (lo, hi) = v
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                        (lo.min(x), hi.max(x))
                    });
                Ok((hi - lo) / 2.0)
            };
            let equal_amplitude = amplitude(WavePacket::equal_weight(sys, n, half_width)?)?;
            let gaussian_amplitude = amplitude(WavePacket::gaussian(sys, n, half_width, sigma)?)?;
            Ok(AmplitudeComparison {
                n,
                half_width,
                sigma,
                equal_amplitude,
                gaussian_amplitude,
                ratio: gaussian_amplitude / equal_amplitude,
            })
        })
        .collect()
}
