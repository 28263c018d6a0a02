use rand::Rng;
use rayon::prelude::*;

use super::sampler::{wrapped_error, ErrorStats, OutcomeSampler, CHUNK_SIZE};
use crate::error::{Error, Result};
use crate::optimizer::noon_local_minimax_lower;
use crate::rng::derive_rng;
use crate::scalar::{wrap_angle, Real};
use crate::state::{build_noon, build_sine};

/// Shift after which `U_θ` maps the noon state to itself up to a global phase: `π/n`.
pub fn noon_branch_period<T: Real>(n: u64) -> T {
    T::PI() / T::from_u64(n).unwrap()
}

/// `x` reduced modulo `period` into `[-period/2, period/2)`.
fn centered_mod<T: Real>(x: T, period: T) -> T {
    let r = x - period * (x / period + T::lit(0.5)).floor();
    if r >= period / T::lit(2.0) {
        r - period
    } else {
        r
    }
}

/// Candidate `θ̂ + k·period` nearest to `center`; a tie goes to the smaller one.
fn resolve_branch<T: Real>(theta_hat: T, center: T, period: T) -> T {
    center + centered_mod(theta_hat - center, period)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlateauOptions<T> {
    pub theta0: T,
    /// True phases on the window `[θ₀-ε, θ₀+ε]`.
    pub theta_points: usize,
    /// Energy of the sine contrast row; the largest `n` when `None`.
    pub sine_energy: Option<u64>,
}

impl<T: Real> Default for PlateauOptions<T> {
    fn default() -> Self {
        Self {
            theta0: T::zero(),
            theta_points: 33,
            sine_energy: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlateauRow<T> {
    pub n: u64,
    /// Worst empirical MSE over the window grid.
    pub worst_mse: T,
    pub worst_stderr: T,
    pub worst_theta: T,
    /// `(π/n·⌊nε/π⌋)²`.
    pub lower_bound: T,
    /// `ε²(1 - π/(nε))²`, or 0 when `nε <= π`.
    pub trend: T,
    /// `n > 2π/ε`.
    pub in_plateau_regime: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlateauReport<T> {
    pub eps: T,
    pub theta0: T,
    pub count: usize,
    pub seed: u64,
    pub rows: Vec<PlateauRow<T>>,
    /// Sine state over the same window, estimated without branch resolution.
    pub contrast: PlateauRow<T>,
    pub warning: Option<String>,
}

struct WindowWorst<T> {
    mse: T,
    stderr: T,
    theta: T,
}

fn window_worst<T: Real>(
    thetas: &[T],
    sampler: &OutcomeSampler<T>,
    count: usize,
    seed: u64,
    tag: &str,
    error: impl Fn(T, T) -> T + Sync,
) -> Result<WindowWorst<T>> {
    let stats = thetas
        .par_iter()
        .enumerate()
        .map(|(j, &theta)| {
            let sq: Vec<T> = sampler
                .sample_tagged(theta, count, seed, &format!("{tag}/theta={j}"))
                .into_iter()
                .map(|hat| {
                    let e = error(theta, hat);
                    e * e
                })
                .collect();
            ErrorStats::from_squared_errors(&sq).map(|s| (theta, s))
        })
        .collect::<Result<Vec<_>>>()?;
    let (theta, worst) = stats
        .into_iter()
        .fold(None::<(T, ErrorStats<T>)>, |best, cur| match best {
            Some(b) if b.1.mse >= cur.1.mse => Some(b),
            _ => Some(cur),
        })
        .expect("nonempty window");
    Ok(WindowWorst {
        mse: worst.mse,
        stderr: worst.stderr,
        theta,
    })
}

/// Worst-case empirical MSE of noon states over an `ε`-window around `θ₀`.
///
/// Each outcome is mapped to the copy `θ̂ + kπ/n` nearest `θ₀`. A sine state of
/// comparable energy, estimated directly, is run over the same window.
pub fn noon_plateau_demo<T: Real>(
    n_list: &[u64],
    eps: T,
    count: usize,
    seed: u64,
    options: PlateauOptions<T>,
) -> Result<PlateauReport<T>> {
    if n_list.is_empty() {
        return Err(Error::invalid("n_list", "empty"));
    }
    if n_list.contains(&0) {
        return Err(Error::invalid("n_list", "entries must be positive"));
    }
    if !(eps > T::zero() && eps <= T::FRAC_PI_4()) {
        return Err(Error::invalid("eps", format!("must lie in (0, π/4], got {eps}")));
    }
    if count < 2 {
        return Err(Error::invalid("count", "need at least 2 samples per phase"));
    }
    if options.theta_points < 2 {
        return Err(Error::invalid("theta_points", "need at least 2 grid phases"));
    }
    let theta0 = options.theta0;
    let step = T::lit(2.0) * eps / T::from_usize(options.theta_points - 1).unwrap();
    let thetas: Vec<T> = (0..options.theta_points)
        .map(|j| theta0 - eps + step * T::from_usize(j).unwrap())
        .collect();
    let threshold = T::TAU() / eps;

    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let sampler = OutcomeSampler::new(&build_noon::<T>(n)?)?;
        let period = noon_branch_period::<T>(n);
        let worst = window_worst(&thetas, &sampler, count, seed, &format!("noon_plateau/n={n}"), |theta, hat| {
            resolve_branch(hat, theta0, period) - theta
        })?;
        let nf = T::from_u64(n).unwrap();
        let frac = T::one() - T::PI() / (nf * eps);
        rows.push(PlateauRow {
            n,
            worst_mse: worst.mse,
            worst_stderr: worst.stderr,
            worst_theta: worst.theta,
            lower_bound: noon_local_minimax_lower(n, eps)?,
            trend: if frac > T::zero() { eps * eps * frac * frac } else { T::zero() },
            in_plateau_regime: nf > threshold,
        });
    }

    let energy = options.sine_energy.unwrap_or_else(|| *n_list.iter().max().unwrap());
    let sampler = OutcomeSampler::new(&build_sine::<T>(energy)?)?;
    let worst = window_worst(&thetas, &sampler, count, seed, &format!("noon_plateau/sine={energy}"), |theta, hat| {
        wrapped_error(theta, hat).value()
    })?;
    let contrast = PlateauRow {
        n: energy,
        worst_mse: worst.mse,
        worst_stderr: worst.stderr,
        worst_theta: worst.theta,
        lower_bound: T::zero(),
        trend: T::zero(),
        in_plateau_regime: false,
    };

    let warning = if rows.iter().all(|r| !r.in_plateau_regime) {
        Some(format!(
            "no n exceeds 2π/ε = {:.3}; the plateau regime is not reached",
            threshold.to_f64_lossy()
        ))
    } else {
        None
    };
    Ok(PlateauReport {
        eps,
        theta0,
        count,
        seed,
        rows,
        contrast,
        warning,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoStepReport<T> {
    pub e_total: u64,
    pub split: T,
    pub e1: u64,
    pub e2: u64,
    /// Set when one stage gets the whole budget, so the run is a one-shot estimate.
    pub degenerate: bool,
    pub two_step: ErrorStats<T>,
    pub one_shot: ErrorStats<T>,
    /// Stage 2 replaced by `noon(E₂)`, branch `π/E₂` resolved near the stage-1 estimate.
    pub noon_stage2: Option<ErrorStats<T>>,
    /// `π²/(4E_total²)`.
    pub reference: T,
    pub trials: usize,
    pub seed: u64,
}

/// Coarse sine estimate with `E₁ = round(split·E)` photons, then a sine estimate
/// with the remaining `E₂` photons unwrapped around it.
pub fn two_step_demo<T: Real>(e_total: u64, split: T, trials: usize, seed: u64) -> Result<TwoStepReport<T>> {
    if e_total < 8 {
        return Err(Error::invalid("E_total", format!("must be at least 8, got {e_total}")));
    }
    if !(split > T::zero() && split <= T::one()) {
        return Err(Error::invalid("split", format!("must lie in (0, 1], got {split}")));
    }
    if trials < 2 {
        return Err(Error::invalid("trials", "need at least 2 trials"));
    }
    let e1 = (split * T::from_u64(e_total).unwrap()).round().to_u64().unwrap_or(0).min(e_total);
    let e2 = e_total - e1;
    let degenerate = e1 == 0 || e2 == 0;

    let one = OutcomeSampler::new(&build_sine::<T>(e_total)?)?;
    let stages = if degenerate {
        None
    } else {
        Some((
            OutcomeSampler::new(&build_sine::<T>(e1)?)?,
            OutcomeSampler::new(&build_sine::<T>(e2)?)?,
            OutcomeSampler::new(&build_noon::<T>(e2)?)?,
        ))
    };
    let period = noon_branch_period::<T>(e2.max(1));

    let chunks = trials.div_ceil(CHUNK_SIZE);
    let per_trial: Vec<[T; 3]> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|k| {
            let mut rng = derive_rng(seed, "two_step", k as u64);
            let len = CHUNK_SIZE.min(trials - k * CHUNK_SIZE);
            let stages = stages.as_ref();
            let one = &one;
            (0..len)
                .map(move |_| {
                    let theta = T::lit(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
                    let e_one = wrapped_error(theta, one.draw(theta, &mut rng)).value();
                    match stages {
                        None => [e_one * e_one, e_one * e_one, T::nan()],
                        Some((s1, s2, noon)) => {
                            let coarse = s1.draw(theta, &mut rng);
                            let fine = s2.draw(theta, &mut rng);
                            let e_two = wrapped_error(theta, coarse + wrap_angle(fine - coarse)).value();
                            let hat = noon.draw(theta, &mut rng);
                            let e_noon = wrapped_error(theta, resolve_branch(hat, coarse, period)).value();
                            [e_one * e_one, e_two * e_two, e_noon * e_noon]
                        }
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let column = |i: usize| per_trial.iter().map(|r| r[i]).collect::<Vec<T>>();
    let one_shot = ErrorStats::from_squared_errors(&column(0))?;
    let two_step = ErrorStats::from_squared_errors(&column(1))?;
    let noon_stage2 = if degenerate {
        None
    } else {
        Some(ErrorStats::from_squared_errors(&column(2))?)
    };
    let ef = T::from_u64(e_total).unwrap();
    Ok(TwoStepReport {
        e_total,
        split,
        e1,
        e2,
        degenerate,
        two_step,
        one_shot,
        noon_stage2,
        reference: T::PI() * T::PI() / (T::lit(4.0) * ef * ef),
        trials,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn branch_resolution() {
        let p = 0.5f64;
        assert!((resolve_branch(1.1, 0.0, p) - 0.1).abs() < 1e-15);
        assert!((resolve_branch(-0.9, 0.0, p) - 0.1).abs() < 1e-15);
        // Halfway between two copies: the smaller one.
        assert!((resolve_branch(0.25, 0.0, p) + 0.25).abs() < 1e-15);
        assert!((noon_branch_period::<f64>(4) - PI / 4.0).abs() < 1e-16);
    }

    #[test]
    fn plateau_small_run() {
        let r = noon_plateau_demo(&[20, 40], 0.3f64, 4000, 3, PlateauOptions::default()).unwrap();
        assert!(r.warning.is_none());
        for row in &r.rows {
            assert!(row.worst_mse >= row.lower_bound - 3.0 * row.worst_stderr);
        }
        assert!(r.contrast.worst_mse < r.rows[1].worst_mse);
        let again = noon_plateau_demo(&[20, 40], 0.3f64, 4000, 3, PlateauOptions::default()).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn plateau_warns_below_threshold() {
        let r = noon_plateau_demo(&[2, 3], 0.5f64, 100, 0, PlateauOptions::default()).unwrap();
        assert!(r.warning.is_some());
        assert!(noon_plateau_demo(&[2], 1.0f64, 100, 0, PlateauOptions::default()).is_err());
        assert!(noon_plateau_demo::<f64>(&[], 0.1, 100, 0, PlateauOptions::default()).is_err());
    }

    #[test]
    fn two_step_runs() {
        let r = two_step_demo(64, 0.25f64, 10_000, 9).unwrap();
        assert_eq!((r.e1, r.e2), (16, 48));
        assert!(!r.degenerate);
        assert!(r.two_step.mse < 4.0 * r.reference);
        let d = two_step_demo(64, 1.0f64, 1000, 9).unwrap();
        assert!(d.degenerate);
        assert_eq!(d.two_step, d.one_shot);
        assert!(d.noon_stage2.is_none());
        assert!(two_step_demo(4, 0.5f64, 1000, 9).is_err());
        assert!(two_step_demo(64, 0.0f64, 1000, 9).is_err());
    }
}
