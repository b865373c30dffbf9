//! Integrable quantum models with known spectra, matrix elements and
//! classical trajectories.
//!
//! Oscillator eigenstates are indexed from `n = 0`, well eigenstates
//! `ψ_n(x) = √(2/L) sin(nπx/L)` from `n = 1`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{FourierCoefficients, PeriodicSignal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    HarmonicOscillator { omega: f64 },
    InfiniteSquareWell { length: f64 },
}

/// A quantum model together with its mass and Planck constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenSystem {
    model: Model,
    mass: f64,
    hbar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    X,
    P,
    X2,
    P2,
    H,
    H2,
}

impl Observable {
    pub const ALL: [Observable; 6] = [
        Observable::X,
        Observable::P,
        Observable::X2,
        Observable::P2,
        Observable::H,
        Observable::H2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::X => "x",
            Observable::P => "p",
            Observable::X2 => "x2",
            Observable::P2 => "p2",
            Observable::H => "h",
            Observable::H2 => "h2",
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Observable::ALL
            .into_iter()
            .find(|o| o.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown observable `{s}` (expected x, p, x2, p2, h or h2)"))
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonPositive { name, value })
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

impl EigenSystem {
    pub fn oscillator(mass: f64, omega: f64, hbar: f64) -> Result<Self> {
        Ok(Self {
            model: Model::HarmonicOscillator {
                omega: positive("omega", omega)?,
            },
            mass: positive("mass", mass)?,
            hbar: positive("hbar", hbar)?,
        })
    }

    pub fn square_well(mass: f64, length: f64, hbar: f64) -> Result<Self> {
        Ok(Self {
            model: Model::InfiniteSquareWell {
                length: positive("length", length)?,
            },
            mass: positive("mass", mass)?,
            hbar: positive("hbar", hbar)?,
        })
    }

    /// Same model with a different Planck constant.
    pub fn with_hbar(&self, hbar: f64) -> Result<Self> {
        Ok(Self {
            hbar: positive("hbar", hbar)?,
            ..*self
        })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn is_oscillator(&self) -> bool {
        matches!(self.model, Model::HarmonicOscillator { .. })
    }

    /// Lowest admissible quantum number.
    pub fn ground_index(&self) -> i64 {
        match self.model {
            Model::HarmonicOscillator { .. } => 0,
            Model::InfiniteSquareWell { .. } => 1,
        }
    }

    pub fn check_index(&self, n: i64) -> Result<()> {
        let min = self.ground_index();
        if n < min {
            Err(Error::QuantumNumber { n, min })
        } else {
            Ok(())
        }
    }

    // π²ħ²/(2μL²), the well's energy unit
    fn well_unit(&self, length: f64) -> f64 {
        PI * PI * self.hbar * self.hbar / (2.0 * self.mass * length * length)
    }

    pub fn energy(&self, n: i64) -> Result<f64> {
        self.check_index(n)?;
        Ok(self.energy_unchecked(n))
    }

    fn energy_unchecked(&self, n: i64) -> f64 {
        match self.model {
            Model::HarmonicOscillator { omega } => (n as f64 + 0.5) * self.hbar * omega,
            Model::InfiniteSquareWell { length } => (n * n) as f64 * self.well_unit(length),
        }
    }

    /// `(E_a - E_b)/ħ`, evaluated in factored form so that large quantum
    /// numbers do not cancel catastrophically.
    pub fn transition_frequency(&self, a: i64, b: i64) -> Result<f64> {
        self.check_index(a)?;
        self.check_index(b)?;
        Ok(self.transition_frequency_unchecked(a, b))
    }

    pub(crate) fn transition_frequency_unchecked(&self, a: i64, b: i64) -> f64 {
        match self.model {
            Model::HarmonicOscillator { omega } => (a - b) as f64 * omega,
            Model::InfiniteSquareWell { length } => {
                ((a - b) * (a + b)) as f64 * self.well_unit(length) / self.hbar
            }
        }
    }

    /// Bohr frequency `(E_{n+1} - E_{n-1}) / 2ħ`.
    pub fn classical_frequency(&self, n: i64) -> Result<f64> {
        if n < 2 {
            return Err(Error::QuantumNumber { n, min: 2 });
        }
        Ok(self.transition_frequency_unchecked(n + 1, n - 1) / 2.0)
    }

    /// Angular frequency of the classical orbit at energy `E`.
    pub fn orbit_frequency(&self, energy: f64) -> Result<f64> {
        positive("energy", energy)?;
        Ok(match self.model {
            Model::HarmonicOscillator { omega } => omega,
            Model::InfiniteSquareWell { length } => PI * (2.0 * energy / self.mass).sqrt() / length,
        })
    }

    /// `⟨row|f|col⟩` in the energy eigenbasis.
    pub fn matrix_element(&self, obs: Observable, row: i64, col: i64) -> Result<Complex64> {
        self.check_index(row)?;
        self.check_index(col)?;
        Ok(match self.model {
            Model::HarmonicOscillator { omega } => self.oscillator_element(omega, obs, row, col),
            Model::InfiniteSquareWell { length } => self.well_element(length, obs, row, col),
        })
    }

    fn oscillator_element(&self, omega: f64, obs: Observable, row: i64, col: i64) -> Complex64 {
        let (mu, hbar) = (self.mass, self.hbar);
        let x_unit = hbar / (2.0 * mu * omega);
        let p_unit = mu * hbar * omega / 2.0;
        let diff = col - row;
        let low = row.min(col) as f64;
        match obs {
            Observable::X if diff.abs() == 1 => real(x_unit.sqrt() * (low + 1.0).sqrt()),
            Observable::P if diff == 1 => Complex64::new(0.0, -p_unit.sqrt() * (low + 1.0).sqrt()),
            Observable::P if diff == -1 => Complex64::new(0.0, p_unit.sqrt() * (low + 1.0).sqrt()),
            Observable::X2 if diff == 0 => real((2.0 * low + 1.0) * x_unit),
            Observable::X2 if diff.abs() == 2 => real(((low + 1.0) * (low + 2.0)).sqrt() * x_unit),
            Observable::P2 if diff == 0 => real((2.0 * low + 1.0) * p_unit),
            Observable::P2 if diff.abs() == 2 => real(-((low + 1.0) * (low + 2.0)).sqrt() * p_unit),
            Observable::H if diff == 0 => real(self.energy_unchecked(row)),
            Observable::H2 if diff == 0 => real(self.energy_unchecked(row).powi(2)),
            _ => ZERO,
        }
    }

    fn well_element(&self, length: f64, obs: Observable, row: i64, col: i64) -> Complex64 {
        let (m, n) = (row as f64, col as f64);
        let pi2 = PI * PI;
        let odd = (row + col) % 2 == 1;
        let gap = m * m - n * n;
        match obs {
            Observable::X if row == col => real(length / 2.0),
            Observable::X if odd => real(-8.0 * length * m * n / (pi2 * gap * gap)),
            Observable::P if odd => Complex64::new(0.0, -self.hbar * 4.0 * m * n / (length * gap)),
            Observable::X2 if row == col => {
                real(length * length * (1.0 / 3.0 - 1.0 / (2.0 * pi2 * n * n)))
            }
            Observable::X2 => {
                let sign = if odd { -1.0 } else { 1.0 };
                real(sign * 8.0 * length * length * m * n / (pi2 * gap * gap))
            }
            Observable::P2 if row == col => real(2.0 * self.mass * self.energy_unchecked(row)),
            Observable::H if row == col => real(self.energy_unchecked(row)),
            Observable::H2 if row == col => real(self.energy_unchecked(row).powi(2)),
            _ => ZERO,
        }
    }

    /// Closed-form expectation values on the equally weighted oscillator
    /// packet centred on `n` with half-width `N`.
    ///
    /// `⟨p⟩` carries `-sin ωt`, the sign fixed by the ladder-operator matrix
    /// elements above and by `d⟨x⟩/dt = ⟨p⟩/μ`.
    pub fn ho_expectation_closed_form(
        &self,
        obs: Observable,
        n: i64,
        half_width: usize,
        t: f64,
    ) -> Result<f64> {
        let Model::HarmonicOscillator { omega } = self.model else {
            return Err(Error::NotOscillator);
        };
        let big_n = half_width as i64;
        if n - big_n <= 0 {
            return Err(Error::PacketWidth { n, half_width });
        }
        let (mu, hbar) = (self.mass, self.hbar);
        let count = (2 * half_width + 1) as f64;
        let nf = n as f64;
        let level = (nf + 0.5) * hbar * omega;
        let first_band = || -> f64 {
            ((-big_n + 1)..=big_n)
                .map(|m| ((n + m) as f64).sqrt())
                .sum()
        };
        let second_band = || -> f64 {
            ((-big_n + 2)..=big_n)
                .map(|m| (((n + m) * (n + m - 1)) as f64).sqrt())
                .sum()
        };
        Ok(match obs {
            Observable::H => level,
            Observable::H2 => {
                let nn = half_width as f64;
                level * level + (hbar * omega).powi(2) * nn * (nn + 1.0) / 3.0
            }
            Observable::X => {
                2.0 / count * (hbar / (2.0 * mu * omega)).sqrt() * first_band() * (omega * t).cos()
            }
            Observable::P => {
                -2.0 / count * (hbar * mu * omega / 2.0).sqrt() * first_band() * (omega * t).sin()
            }
            Observable::X2 => {
                let unit = hbar / (mu * omega);
                (nf + 0.5) * unit + unit / count * second_band() * (2.0 * omega * t).cos()
            }
            Observable::P2 => {
                let unit = mu * hbar * omega;
                (nf + 0.5) * unit - unit / count * second_band() * (2.0 * omega * t).cos()
            }
        })
    }

    /// Value of the classical quantity at time `t` on the orbit of energy `E`.
    ///
    /// The oscillator starts at its right turning point; the well particle
    /// starts at `x = 0` moving right. At the well's turning instants `p`
    /// takes the midpoint value 0.
    pub fn classical_trajectory(&self, obs: Observable, energy: f64, t: f64) -> Result<f64> {
        positive("energy", energy)?;
        let mu = self.mass;
        Ok(match self.model {
            Model::HarmonicOscillator { omega } => {
                let phase = omega * t;
                match obs {
                    Observable::H => energy,
                    Observable::H2 => energy * energy,
                    Observable::X => (2.0 * energy / (mu * omega * omega)).sqrt() * phase.cos(),
                    Observable::P => -(2.0 * mu * energy).sqrt() * phase.sin(),
                    Observable::X2 => energy / (mu * omega * omega) * (1.0 + (2.0 * phase).cos()),
                    Observable::P2 => mu * energy * (1.0 - (2.0 * phase).cos()),
                }
            }
            Model::InfiniteSquareWell { .. } => self.classical_signal(obs, energy)?.value(t),
        })
    }

    /// Exact Fourier coefficients of the classical quantity at energy `E`,
    /// up to `max_order`.
    pub fn classical_coefficients(
        &self,
        obs: Observable,
        energy: f64,
        max_order: usize,
    ) -> Result<FourierCoefficients> {
        self.classical_signal(obs, energy)?.coefficients(max_order)
    }

    /// The classical quantity as a periodic signal with analytic coefficients.
    pub fn classical_signal(&self, obs: Observable, energy: f64) -> Result<PeriodicSignal> {
        let omega = self.orbit_frequency(energy)?;
        let period = TAU / omega;
        let mu = self.mass;
        match self.model {
            Model::HarmonicOscillator { .. } => {
                let this = *self;
                let rule = move |s: i64| -> Complex64 {
                    let amp_x2 = energy / (mu * omega * omega);
                    match (obs, s) {
                        (Observable::H, 0) => real(energy),
                        (Observable::H2, 0) => real(energy * energy),
                        (Observable::X, 1) => {
                            real((2.0 * energy / (mu * omega * omega)).sqrt() / 2.0)
                        }
                        (Observable::P, 1) => Complex64::new(0.0, (2.0 * mu * energy).sqrt() / 2.0),
                        (Observable::X2, 0) => real(amp_x2),
                        (Observable::X2, 2) => real(amp_x2 / 2.0),
                        (Observable::P2, 0) => real(mu * energy),
                        (Observable::P2, 2) => real(-mu * energy / 2.0),
                        _ => ZERO,
                    }
                };
                Ok(PeriodicSignal::new(period, move |t| {
                    this.classical_trajectory(obs, energy, t)
                        .unwrap_or(f64::NAN)
                })?
                .with_analytic_coefficients(rule))
            }
            Model::InfiniteSquareWell { length } => {
                let momentum = (2.0 * mu * energy).sqrt();
                match obs {
                    Observable::X => PeriodicSignal::triangle_wave(period, length),
                    Observable::P => PeriodicSignal::square_wave(period, momentum),
                    Observable::X2 => {
                        let x = PeriodicSignal::triangle_wave(period, length)?;
                        Ok(PeriodicSignal::new(period, move |t| x.value(t).powi(2))?
                            .with_analytic_coefficients(move |s| {
                                let l2 = length * length;
                                if s == 0 {
                                    real(l2 / 3.0)
                                } else {
                                    let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
                                    real(sign * 2.0 * l2 / (PI * PI * (s * s) as f64))
                                }
                            }))
                    }
                    Observable::P2 => PeriodicSignal::constant(period, momentum * momentum),
                    Observable::H => PeriodicSignal::constant(period, energy),
                    Observable::H2 => PeriodicSignal::constant(period, energy * energy),
                }
            }
        }
    }
}
