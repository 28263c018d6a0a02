//! JSON state files: `{"lo": .., "hi": .., "amplitudes": [[re, im], ...]}`.

use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::state::{build_coherent_noon, build_gaussian, build_noon, build_sine, StateVector};

/// Normalization tolerance applied to loaded states.
pub const LOAD_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub lo: i64,
    pub hi: i64,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn from_state(state: &StateVector<f64>) -> Self {
        Self {
            lo: state.lo(),
            hi: state.hi(),
            amplitudes: state.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
        }
    }

    pub fn into_state(self) -> Result<StateVector<f64>, CliError> {
        if self.hi < self.lo {
            return Err(CliError::Usage(format!("state file has hi = {} < lo = {}", self.hi, self.lo)));
        }
        let expected = (self.hi - self.lo + 1) as usize;
        if self.amplitudes.len() != expected {
            return Err(CliError::Usage(format!(
                "state file lists {} amplitudes for the {expected} indices {}..={}",
                self.amplitudes.len(),
                self.lo,
                self.hi
            )));
        }
        let amps: Vec<Complex64> = self.amplitudes.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !((norm2 - 1.0).abs() <= LOAD_TOLERANCE) {
            return Err(CliError::Usage(format!(
                "state file is not normalized: |norm² - 1| = {:e} exceeds {LOAD_TOLERANCE:e}",
                (norm2 - 1.0).abs()
            )));
        }
        Ok(StateVector::normalized(self.lo, amps)?)
    }

    pub fn read(path: &Path) -> Result<StateVector<f64>, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read state file {}: {e}", path.display())))?;
        let file: StateFile = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("malformed state file {}: {e}", path.display())))?;
        file.into_state()
    }

    pub fn write(state: &StateVector<f64>, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(&Self::from_state(state)).expect("state serializes");
        std::fs::write(path, text + "\n").map_err(CliError::Io)
    }
}

/// Built-in state: `vacuum`, `noon:N`, `sine:E`, `gaussian:E[:CUTOFF]`, `coherent:ALPHA[:TAIL]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateSpec {
    Vacuum,
    Noon { n: u64 },
    Sine { energy: u64 },
    Gaussian { energy: f64, cutoff_sigmas: f64 },
    Coherent { alpha: f64, tail: f64 },
}

impl FromStr for StateSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default().to_ascii_lowercase();
        let args: Vec<&str> = parts.collect();
        let num = |i: usize, name: &str| -> Result<f64, String> {
            args.get(i)
                .ok_or_else(|| format!("`{kind}` needs {name}"))?
                .parse::<f64>()
                .map_err(|e| format!("bad {name} in `{s}`: {e}"))
        };
        let int = |i: usize, name: &str| -> Result<u64, String> {
            args.get(i)
                .ok_or_else(|| format!("`{kind}` needs {name}"))?
                .parse::<u64>()
                .map_err(|e| format!("bad {name} in `{s}`: {e}"))
        };
        let max_args = |k: usize| -> Result<(), String> {
            if args.len() > k {
                Err(format!("too many fields in `{s}`"))
            } else {
                Ok(())
            }
        };
        match kind.as_str() {
            "vacuum" => max_args(0).map(|_| StateSpec::Vacuum),
            "noon" => {
                max_args(1)?;
                Ok(StateSpec::Noon { n: int(0, "n")? })
            }
            "sine" => {
                max_args(1)?;
                Ok(StateSpec::Sine { energy: int(0, "E")? })
            }
            "gaussian" => {
                max_args(2)?;
                Ok(StateSpec::Gaussian {
                    energy: num(0, "E")?,
                    cutoff_sigmas: if args.len() > 1 { num(1, "cutoff")? } else { 8.0 },
                })
            }
            "coherent" => {
                max_args(2)?;
                Ok(StateSpec::Coherent {
                    alpha: num(0, "alpha")?,
                    tail: if args.len() > 1 { num(1, "tail")? } else { 1e-12 },
                })
            }
            _ => Err(format!("unknown state `{s}` (vacuum, noon:N, sine:E, gaussian:E[:CUTOFF], coherent:ALPHA[:TAIL])")),
        }
    }
}

impl StateSpec {
    pub fn build(&self) -> Result<StateVector<f64>, CliError> {
        Ok(match *self {
            StateSpec::Vacuum => StateVector::vacuum(),
            StateSpec::Noon { n } => build_noon(n)?,
            StateSpec::Sine { energy } => build_sine(energy)?,
            StateSpec::Gaussian { energy, cutoff_sigmas } => build_gaussian(energy, cutoff_sigmas)?.0,
            StateSpec::Coherent { alpha, tail } => build_coherent_noon(alpha, tail)?.state,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_specs() {
        assert_eq!("vacuum".parse::<StateSpec>().unwrap(), StateSpec::Vacuum);
        assert_eq!("noon:5".parse::<StateSpec>().unwrap(), StateSpec::Noon { n: 5 });
        assert_eq!(
            "gaussian:10".parse::<StateSpec>().unwrap(),
            StateSpec::Gaussian { energy: 10.0, cutoff_sigmas: 8.0 }
        );
        assert!("noon".parse::<StateSpec>().is_err());
        assert!("noon:1:2".parse::<StateSpec>().is_err());
        assert!("cat:3".parse::<StateSpec>().is_err());
    }

    #[test]
    fn rejects_inconsistent_files() {
        let f = StateFile { lo: 0, hi: 1, amplitudes: vec![[1.0, 0.0]] };
        assert!(matches!(f.into_state(), Err(CliError::Usage(_))));
        let f = StateFile { lo: 0, hi: 1, amplitudes: vec![[0.7, 0.0], [0.7, 0.0]] };
        assert!(matches!(f.into_state(), Err(CliError::Usage(_))));
        let h = 0.5f64.sqrt();
        let f = StateFile { lo: -1, hi: 0, amplitudes: vec![[h, 0.0], [0.0, h]] };
        assert!(f.into_state().is_ok());
    }
}
