//! Measure specification strings.
//!
//! `semicircle:σ`, `rademacher`, `atoms:loc/weight,…` (or `atoms:{loc:weight,…}`),
//! `wigner-nu:β,σ²,s²,α` and `zero`.

use infband::freeharm::{wigner_nu, Measure, SignedMeasure, WignerMomentParams};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSpec {
    Semicircle(f64),
    Rademacher,
    Atoms(Vec<(f64, f64)>),
    WignerNu(WignerMomentParams),
    Zero,
}

fn number(s: &str, what: &str) -> CliResult<f64> {
    s.trim().parse().map_err(|_| CliError::Usage(format!("cannot parse {what} {s:?} as a number")))
}

fn parse_atoms(body: &str) -> CliResult<Vec<(f64, f64)>> {
    let (body, sep) = match body.strip_prefix('{').and_then(|b| b.strip_suffix('}')) {
        Some(inner) => (inner, ':'),
        None => (body, '/'),
    };
    let atoms = body
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let (loc, weight) = item.split_once(sep).ok_or_else(|| CliError::Usage(format!("atom {item:?} must be loc{sep}weight")))?;
            Ok((number(loc, "atom location")?, number(weight, "atom weight")?))
        })
        .collect::<CliResult<Vec<_>>>()?;
    if atoms.is_empty() {
        return Err(CliError::Usage("atoms: needs at least one loc/weight pair".into()));
    }
    Ok(atoms)
}

impl std::str::FromStr for MeasureSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let (kind, body) = s.split_once(':').unwrap_or((s, ""));
        match kind.trim() {
            "semicircle" => Ok(MeasureSpec::Semicircle(number(body, "semicircle σ")?)),
            "rademacher" if body.is_empty() => Ok(MeasureSpec::Rademacher),
            "zero" if body.is_empty() => Ok(MeasureSpec::Zero),
            "atoms" => Ok(MeasureSpec::Atoms(parse_atoms(body)?)),
            "wigner-nu" => {
                let parts: Vec<&str> = body.split(',').collect();
                if parts.len() != 4 {
                    return Err(CliError::Usage(format!("wigner-nu needs β,σ²,s²,α, got {body:?}")));
                }
                let beta = match parts[0].trim() {
                    "1" => 1,
                    "2" => 2,
                    other => return Err(CliError::Usage(format!("β must be 1 or 2, got {other:?}"))),
                };
                Ok(MeasureSpec::WignerNu(WignerMomentParams {
                    beta,
                    sigma2: number(parts[1], "σ²")?,
                    s2: number(parts[2], "s²")?,
                    alpha: number(parts[3], "α")?,
                }))
            }
            _ => Err(CliError::Usage(format!(
                "unrecognised measure {s:?}; expected semicircle:σ, rademacher, atoms:loc/weight,…, wigner-nu:β,σ²,s²,α or zero"
            ))),
        }
    }
}

impl MeasureSpec {
    /// The probability measure this spec denotes.
    pub fn probability(&self) -> CliResult<Measure> {
        Ok(match self {
            MeasureSpec::Semicircle(sigma) => Measure::semicircle(*sigma)?,
            MeasureSpec::Rademacher => Measure::rademacher(),
            MeasureSpec::Atoms(atoms) => Measure::from_atoms(atoms)?,
            MeasureSpec::WignerNu(_) | MeasureSpec::Zero => {
                return Err(CliError::Usage("a zero-mass measure cannot be used as a probability distribution".into()))
            }
        })
    }

    /// The signed measure this spec denotes, for infinitesimal parts.
    pub fn signed(&self) -> CliResult<SignedMeasure> {
        Ok(match self {
            MeasureSpec::Semicircle(sigma) => SignedMeasure::semicircle(*sigma),
            MeasureSpec::Rademacher => SignedMeasure::from_atoms(&[(-1.0, 0.5), (1.0, 0.5)]),
            MeasureSpec::Atoms(atoms) => SignedMeasure::from_atoms(atoms),
            MeasureSpec::WignerNu(params) => wigner_nu(params)?,
            MeasureSpec::Zero => SignedMeasure::zero(),
        })
    }
}
