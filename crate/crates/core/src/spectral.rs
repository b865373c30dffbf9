//! Fourier-series machinery on the symmetric index range `-S..=S`.
//!
//! Every summation here works on a table of phasors `e^{i s ω t}` that is
//! built once per evaluation time. The block sum [`sigma`] is the primitive;
//! partial sums, Fejér means and the wave-packet double sum are all built on
//! top of it.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex Fourier coefficients `f_s`, `s = -S..=S`, of a periodic quantity
/// with fundamental angular frequency `omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoefficients {
    max_order: usize,
    omega: f64,
    coeffs: Vec<Complex64>,
    real_signal: bool,
}

impl FourierCoefficients {
    /// Wraps a dense coefficient array laid out as `[f_{-S}, ..., f_0, ..., f_S]`.
    pub fn new(omega: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        check_omega(omega)?;
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::CoefficientLength(coeffs.len()));
        }
        Ok(Self {
            max_order: coeffs.len() / 2,
            omega,
            coeffs,
            real_signal: false,
        })
    }

    /// Builds coefficients from a rule `s -> f_s`.
    ///
    /// With `real_signal` set only `s >= 0` is queried and negative indices
    /// are filled with the conjugate, so the symmetry holds exactly.
    pub fn from_fn<F>(max_order: usize, omega: f64, real_signal: bool, rule: F) -> Result<Self>
    where
        F: Fn(i64) -> Complex64,
    {
        check_omega(omega)?;
        let s_max = max_order as i64;
        let coeffs = if real_signal {
            let upper: Vec<Complex64> = (0..=s_max).map(&rule).collect();
            let mut all = Vec::with_capacity(2 * max_order + 1);
            all.extend(upper[1..].iter().rev().map(|c| c.conj()));
            all.push(Complex64::new(upper[0].re, 0.0));
            all.extend_from_slice(&upper[1..]);
            all
        } else {
            (-s_max..=s_max).map(rule).collect()
        };
        Ok(Self {
            max_order,
            omega,
            coeffs,
            real_signal,
        })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn period(&self) -> f64 {
        TAU / self.omega
    }

    pub fn is_real_signal(&self) -> bool {
        self.real_signal
    }

    /// Dense array `[f_{-S}, ..., f_S]`.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `f_s`, or an error when `|s| > S`.
    pub fn get(&self, s: i64) -> Result<Complex64> {
        self.check_index(s)?;
        Ok(self.at(s))
    }

    #[inline]
    fn at(&self, s: i64) -> Complex64 {
        self.coeffs[(s + self.max_order as i64) as usize]
    }

    fn check_index(&self, s: i64) -> Result<()> {
        if s.unsigned_abs() as usize > self.max_order {
            return Err(Error::IndexOutOfRange {
                index: s,
                max_order: self.max_order,
            });
        }
        Ok(())
    }

    fn check_fejer(&self, half_width: usize) -> Result<()> {
        if 2 * half_width > self.max_order {
            return Err(Error::OrderTooLarge {
                half_width,
                max_order: self.max_order,
            });
        }
        Ok(())
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive {
            name: "omega",
            value: omega,
        })
    }
}

/// `e^{i s ω t}` for `s = -order..=order` at one instant.
struct Phasors {
    order: usize,
    table: Vec<Complex64>,
}

impl Phasors {
    fn new(omega: f64, order: usize, t: f64) -> Self {
        let mut table = vec![Complex64::new(0.0, 0.0); 2 * order + 1];
        for s in 0..=order {
            let z = Complex64::cis(s as f64 * omega * t);
            table[order + s] = z;
            table[order - s] = z.conj();
        }
        Self { order, table }
    }

    #[inline]
    fn at(&self, s: i64) -> Complex64 {
        self.table[(s + self.order as i64) as usize]
    }
}

// Unchecked kernels; callers validate indices.

fn sigma_at(coeffs: &FourierCoefficients, phasors: &Phasors, alpha: i64, beta: i64) -> Complex64 {
    (beta..=alpha).fold(Complex64::new(0.0, 0.0), |acc, s| {
        acc + coeffs.at(s) * phasors.at(s)
    })
}

fn fejer_at(coeffs: &FourierCoefficients, phasors: &Phasors, half_width: usize) -> Complex64 {
    let mut partial = coeffs.at(0) * phasors.at(0);
    let mut acc = partial;
    for l in 1..=(2 * half_width) as i64 {
        partial += coeffs.at(-l) * phasors.at(-l) + coeffs.at(l) * phasors.at(l);
        acc += partial;
    }
    acc / (2 * half_width + 1) as f64
}

fn double_sum_at(coeffs: &FourierCoefficients, phasors: &Phasors, half_width: usize) -> Complex64 {
    let two_n = 2 * half_width as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 0..=two_n {
        acc += sigma_at(coeffs, phasors, two_n - l, -l);
    }
    acc / (two_n + 1) as f64
}

/// `Σ(α, β) = Σ_{s=β}^{α} f_s e^{i s ω t}`.
pub fn sigma(coeffs: &FourierCoefficients, alpha: i64, beta: i64, t: f64) -> Result<Complex64> {
    if beta > alpha {
        return Err(Error::EmptyRange { alpha, beta });
    }
    coeffs.check_index(alpha)?;
    coeffs.check_index(beta)?;
    let order = alpha.unsigned_abs().max(beta.unsigned_abs()) as usize;
    let phasors = Phasors::new(coeffs.omega, order, t);
    Ok(sigma_at(coeffs, &phasors, alpha, beta))
}

/// Order-`l` Fourier partial sum `Σ(l, -l)`.
pub fn partial_sum(coeffs: &FourierCoefficients, order: usize, t: f64) -> Result<Complex64> {
    let l = order as i64;
    sigma(coeffs, l, -l, t)
}

/// Arithmetic mean of the `2N+1` partial sums of orders `0..=2N`.
pub fn fejer_mean(coeffs: &FourierCoefficients, half_width: usize, t: f64) -> Result<Complex64> {
    coeffs.check_fejer(half_width)?;
    let phasors = Phasors::new(coeffs.omega, 2 * half_width, t);
    Ok(fejer_at(coeffs, &phasors, half_width))
}

/// `(1/(2N+1)) Σ_{l=0}^{2N} Σ(2N-l, -l)`, summed in exactly that block
/// arrangement. Agreement with [`fejer_mean`] is an identity, not a
/// consequence of shared code.
pub fn double_sum(coeffs: &FourierCoefficients, half_width: usize, t: f64) -> Result<Complex64> {
    coeffs.check_fejer(half_width)?;
    let phasors = Phasors::new(coeffs.omega, 2 * half_width, t);
    Ok(double_sum_at(coeffs, &phasors, half_width))
}

/// Partial sums of order `l` over a time grid.
pub fn partial_sum_series(
    coeffs: &FourierCoefficients,
    order: usize,
    times: &[f64],
) -> Result<Vec<Complex64>> {
    let l = order as i64;
    coeffs.check_index(l)?;
    Ok(times
        .iter()
        .map(|&t| sigma_at(coeffs, &Phasors::new(coeffs.omega, order, t), l, -l))
        .collect())
}

/// Fejér means with parameter `N` over a time grid.
pub fn fejer_series(
    coeffs: &FourierCoefficients,
    half_width: usize,
    times: &[f64],
) -> Result<Vec<Complex64>> {
    coeffs.check_fejer(half_width)?;
    Ok(times
        .iter()
        .map(|&t| {
            fejer_at(
                coeffs,
                &Phasors::new(coeffs.omega, 2 * half_width, t),
                half_width,
            )
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SummationKind {
    /// Fourier partial sum of order `order`.
    Partial,
    /// Fejér mean with parameter `N = order` (partial sums up to `2N`).
    Fejer,
}

impl fmt::Display for SummationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SummationKind::Partial => f.write_str("partial"),
            SummationKind::Fejer => f.write_str("fejer"),
        }
    }
}

/// Largest excursion of `values` outside the band `[lo, hi]` (0 when inside).
pub fn band_excursion(values: &[f64], lo: f64, hi: f64) -> f64 {
    values
        .iter()
        .map(|&v| (v - hi).max(lo - v).max(0.0))
        .fold(0.0, f64::max)
}

/// Maximum excursion of the chosen summation beyond `[lo, hi]` on `t_grid`.
///
/// The grid must carry at least `16 * order` points, which resolves the
/// kernel oscillations when it spans one period.
pub fn overshoot_metric(
    coeffs: &FourierCoefficients,
    kind: SummationKind,
    order: usize,
    lo: f64,
    hi: f64,
    t_grid: &[f64],
) -> Result<f64> {
    if t_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let required = 16 * order;
    if t_grid.len() < required {
        return Err(Error::CoarseGrid {
            len: t_grid.len(),
            order,
            required,
        });
    }
    let series = match kind {
        SummationKind::Partial => partial_sum_series(coeffs, order, t_grid)?,
        SummationKind::Fejer => fejer_series(coeffs, order, t_grid)?,
    };
    let values: Vec<f64> = series.iter().map(|z| z.re).collect();
    Ok(band_excursion(&values, lo, hi))
}

/// `n` equally spaced instants covering `[0, period)`.
pub fn uniform_grid(period: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| period * k as f64 / n as f64).collect()
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type CoefficientRule = Arc<dyn Fn(i64) -> Complex64 + Send + Sync>;

/// A real periodic function of time, optionally carrying its exact Fourier
/// coefficients.
///
/// Discontinuous signals take the midpoint value at their jumps, which is
/// where the Fourier series converges.
#[derive(Clone)]
pub struct PeriodicSignal {
    period: f64,
    evaluator: Evaluator,
    analytic: Option<CoefficientRule>,
}

impl fmt::Debug for PeriodicSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicSignal")
            .field("period", &self.period)
            .field("analytic", &self.analytic.is_some())
            .finish()
    }
}

impl PeriodicSignal {
    /// `evaluator` is called with `t` already reduced into `[0, period)`.
    pub fn new<F>(period: f64, evaluator: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidPeriod(period));
        }
        Ok(Self {
            period,
            evaluator: Arc::new(evaluator),
            analytic: None,
        })
    }

    /// Attaches the exact rule `s -> f_s` (queried for `s >= 0` only).
    pub fn with_analytic_coefficients<G>(mut self, rule: G) -> Self
    where
        G: Fn(i64) -> Complex64 + Send + Sync + 'static,
    {
        self.analytic = Some(Arc::new(rule));
        self
    }

    pub fn constant(period: f64, value: f64) -> Result<Self> {
        Ok(
            Self::new(period, move |_| value)?.with_analytic_coefficients(move |s| {
                if s == 0 {
                    Complex64::new(value, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        )
    }

    /// `amplitude · cos(ωt)`.
    pub fn cosine(period: f64, amplitude: f64) -> Result<Self> {
        let omega = TAU / period;
        Ok(
            Self::new(period, move |t| amplitude * (omega * t).cos())?.with_analytic_coefficients(
                move |s| {
                    if s.abs() == 1 {
                        Complex64::new(amplitude / 2.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                },
            ),
        )
    }

    /// `+amplitude` on the first half period, `-amplitude` on the second.
    pub fn square_wave(period: f64, amplitude: f64) -> Result<Self> {
        Ok(Self::new(period, move |t| {
            let half = period / 2.0;
            if t == 0.0 || t == half {
                0.0
            } else if t < half {
                amplitude
            } else {
                -amplitude
            }
        })?
        .with_analytic_coefficients(move |s| square_wave_coefficient(s, amplitude)))
    }

    /// Rises linearly from 0 to `amplitude` over the first half period and
    /// falls back over the second.
    pub fn triangle_wave(period: f64, amplitude: f64) -> Result<Self> {
        Ok(Self::new(period, move |t| {
            let u = t / period;
            if u <= 0.5 {
                2.0 * amplitude * u
            } else {
                2.0 * amplitude * (1.0 - u)
            }
        })?
        .with_analytic_coefficients(move |s| triangle_wave_coefficient(s, amplitude)))
    }

    /// `amplitude · (2t/T - 1)` on `(0, T)`, zero at the jump.
    pub fn sawtooth(period: f64, amplitude: f64) -> Result<Self> {
        Ok(Self::new(period, move |t| {
            if t == 0.0 {
                0.0
            } else {
                amplitude * (2.0 * t / period - 1.0)
            }
        })?
        .with_analytic_coefficients(move |s| {
            if s == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, amplitude / (std::f64::consts::PI * s as f64))
            }
        }))
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn omega(&self) -> f64 {
        TAU / self.period
    }

    pub fn has_analytic_coefficients(&self) -> bool {
        self.analytic.is_some()
    }

    /// Value at any real `t` (reduced modulo the period).
    pub fn value(&self, t: f64) -> f64 {
        let mut r = t.rem_euclid(self.period);
        if r >= self.period {
            r = 0.0;
        }
        (self.evaluator)(r)
    }

    /// Analytic coefficients when attached, otherwise quadrature with a
    /// sampling rate well above the floor.
    pub fn coefficients(&self, max_order: usize) -> Result<FourierCoefficients> {
        match &self.analytic {
            Some(rule) => FourierCoefficients::from_fn(max_order, self.omega(), true, |s| rule(s)),
            None => {
                let samples = (64 * max_order + 64).max(4096);
                compute_coefficients(self, max_order, samples)
            }
        }
    }

    /// Smallest and largest value over `samples` uniform instants.
    pub fn sampled_range(&self, samples: usize) -> (f64, f64) {
        uniform_grid(self.period, samples.max(1))
            .into_iter()
            .map(|t| self.value(t))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// `f_s` of the `±amplitude` square wave: `2A/(iπs)` for odd `s`, else 0.
pub fn square_wave_coefficient(s: i64, amplitude: f64) -> Complex64 {
    if s % 2 == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(0.0, -2.0 * amplitude / (std::f64::consts::PI * s as f64))
    }
}

/// `f_s` of the `0..amplitude` triangle wave: `A/2` at `s = 0`,
/// `-2A/(π²s²)` for odd `s`.
pub fn triangle_wave_coefficient(s: i64, amplitude: f64) -> Complex64 {
    if s == 0 {
        Complex64::new(amplitude / 2.0, 0.0)
    } else if s % 2 == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        Complex64::new(-2.0 * amplitude / (pi2 * (s * s) as f64), 0.0)
    }
}

/// Rectangle-rule Fourier coefficients on a uniform grid of
/// `samples_per_period` points.
///
/// Accuracy is spectral for smooth signals; for signals with jumps it drops
/// to `O(1/samples)` unless the jumps land on grid points with midpoint
/// values, in which case the error is aliasing only, `O(s/samples²)`.
pub fn compute_coefficients(
    signal: &PeriodicSignal,
    max_order: usize,
    samples_per_period: usize,
) -> Result<FourierCoefficients> {
    let required = 8 * max_order + 8;
    if samples_per_period < required {
        return Err(Error::Undersampled {
            max_order,
            samples: samples_per_period,
            required,
        });
    }
    let m = samples_per_period;
    let period = signal.period;
    let values: Vec<f64> = (0..m)
        .map(|k| (signal.evaluator)(period * k as f64 / m as f64))
        .collect();
    FourierCoefficients::from_fn(max_order, signal.omega(), true, |s| {
        let s = s as usize;
        let sum = values
            .iter()
            .enumerate()
            .fold(Complex64::new(0.0, 0.0), |acc, (k, &v)| {
                // reduce s·k mod m so the angle stays exact for large grids
                let phase = ((s * k) % m) as f64 / m as f64;
                acc + v * Complex64::cis(-TAU * phase)
            });
        sum / m as f64
    })
}
