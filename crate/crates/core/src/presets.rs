//! The five named models, their closed-form polynomial coefficients, energies
//! and root equations, and the list of corrections applied to those formulas.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_model, ModelSpec, SectorLabels};
use crate::operator::{mode_offset, Poly};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    BoseHubbard,
    Lmg,
    RigidRotor,
    TavisCummings,
    TwoModeTc,
}

impl PresetName {
    pub const ALL: [PresetName; 5] = [
        PresetName::BoseHubbard,
        PresetName::Lmg,
        PresetName::RigidRotor,
        PresetName::TavisCummings,
        PresetName::TwoModeTc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::BoseHubbard => "bose_hubbard",
            PresetName::Lmg => "lmg",
            PresetName::RigidRotor => "rigid_rotor",
            PresetName::TavisCummings => "tavis_cummings",
            PresetName::TwoModeTc => "two_mode_tc",
        }
    }

    /// `(M, r, s, k)`
    pub fn structure(self) -> (usize, u32, u32, Vec<u32>) {
        match self {
            PresetName::BoseHubbard => (0, 1, 2, vec![]),
            PresetName::Lmg => (0, 2, 1, vec![]),
            PresetName::RigidRotor => (0, 2, 2, vec![]),
            PresetName::TavisCummings => (1, 1, 1, vec![1]),
            PresetName::TwoModeTc => (2, 1, 1, vec![1, 1]),
        }
    }

    /// Parameter names the constructor reads.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            PresetName::BoseHubbard | PresetName::Lmg => &["g", "g_prime"],
            PresetName::RigidRotor => &["a", "b", "c"],
            PresetName::TavisCummings => &["w", "g_prime", "g"],
            PresetName::TwoModeTc => &["w1", "w2", "g_prime", "g"],
        }
    }

    /// Values used by the command line when a parameter is not given.
    pub fn default_params(self) -> BTreeMap<String, f64> {
        let pairs: &[(&str, f64)] = match self {
            PresetName::BoseHubbard | PresetName::Lmg => &[("g", 0.5), ("g_prime", 1.0)],
            PresetName::RigidRotor => &[("a", 1.0), ("b", 2.0), ("c", 3.0)],
            PresetName::TavisCummings => &[("w", 1.0), ("g_prime", 1.0), ("g", 0.1)],
            PresetName::TwoModeTc => &[("w1", 1.0), ("w2", 1.5), ("g_prime", 1.0), ("g", 0.1)],
        };
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    pub fn default_grid(self) -> PresetGrid {
        let max_total_bosons = match self {
            PresetName::TavisCummings => 4,
            PresetName::TwoModeTc => 3,
            _ => 0,
        };
        PresetGrid {
            js: (0..=12).map(Rational::half).collect(),
            max_total_bosons,
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Spins and boson cutoff swept by the acceptance runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetGrid {
    pub js: Vec<Rational>,
    pub max_total_bosons: u64,
}

fn param(params: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    params.get(key).copied().ok_or_else(|| Error::MissingParam(key.to_string()))
}

/// Builds the model for a named preset.
pub fn preset(name: PresetName, params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    let (m, r, s, k) = name.structure();
    let base = ModelSpec {
        m,
        r,
        s,
        k,
        w: vec![],
        g_prime: 0.0,
        g: 0.0,
        constant_shift: 0.0,
        casimir_weight: 0.0,
    };
    let model = match name {
        PresetName::BoseHubbard | PresetName::Lmg => ModelSpec {
            g: param(params, "g")?,
            g_prime: param(params, "g_prime")?,
            ..base
        },
        PresetName::RigidRotor => {
            let (a, b, c) = (param(params, "a")?, param(params, "b")?, param(params, "c")?);
            ModelSpec {
                g_prime: (2.0 * c - a - b) / 2.0,
                g: (a - b) / 4.0,
                casimir_weight: (a + b) / 2.0,
                ..base
            }
        }
        PresetName::TavisCummings => ModelSpec {
            w: vec![param(params, "w")?],
            g_prime: param(params, "g_prime")?,
            g: param(params, "g")?,
            ..base
        },
        PresetName::TwoModeTc => ModelSpec {
            w: vec![param(params, "w1")?, param(params, "w2")?],
            g_prime: param(params, "g_prime")?,
            g: param(params, "g")?,
            ..base
        },
    };
    validate_model(model)
}

/// Which variant of a published formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    /// As printed.
    Printed,
    /// With the entries of [`ERRATA`] applied.
    Corrected,
}

/// One correction to a published formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Erratum {
    pub id: &'static str,
    pub location: &'static str,
    pub printed: &'static str,
    pub corrected: &'static str,
}

pub const ERRATA: [Erratum; 8] = [
    Erratum {
        id: "E1",
        location: "bose_hubbard P_1, P_0",
        printed: "P_1 = g'z(1-2j) + g(1+z^2), P_0 = g'j^2 - 2jgz",
        corrected: "P_1 = g'z(1-2j) + g(1-z^2), P_0 = g'j^2 + 2jgz",
    },
    Erratum {
        id: "E2",
        location: "bose_hubbard, lmg, rigid_rotor, tavis_cummings root equations",
        printed: "sum 2/(a_i - a_mu) = -P_1/P_2",
        corrected: "sum 2/(a_mu - a_i) = -P_1/P_2",
    },
    Erratum {
        id: "E3",
        location: "lmg root equations",
        printed: "g(3+2p-4) a^2",
        corrected: "g(3+2p-4j) a^2",
    },
    Erratum {
        id: "E4",
        location: "rigid_rotor root equations",
        printed: "(a-b)(3+2p-4) a^2",
        corrected: "(a-b)(3+2p-4j) a^2",
    },
    Erratum {
        id: "E5",
        location: "two_mode_tc B",
        printed: "9 j kappa / 2",
        corrected: "9 j kappa^2 / 2",
    },
    Erratum {
        id: "E6",
        location: "general energy, boson term",
        printed: "-(1/M) sum_mu l_mu",
        corrected: "-(1/M) sum_mu mu l_mu",
    },
    Erratum {
        id: "E7",
        location: "deformed commutator [P_+, P_-]",
        printed: "Psi(P_0) - Psi(P_0 - 1)",
        corrected: "(-1)^(M+1) (Psi(P_0 - 1) - Psi(P_0))",
    },
    Erratum {
        id: "E8",
        location: "sector size for M > 0 (tavis_cummings, two_mode_tc, general)",
        printed: "N = min(A_M, (2j-p-lambda)/r)",
        corrected: "N = min(min_i A_i, (2j-p-lambda)/r)",
    },
];

/// Couplings `(a, b, c)` of the rotor recovered from its model.
fn rotor_abc(model: &ModelSpec) -> (f64, f64, f64) {
    let sum = 2.0 * model.casimir_weight;
    let diff = 4.0 * model.g;
    let (a, b) = ((sum + diff) / 2.0, (sum - diff) / 2.0);
    (a, b, (2.0 * model.g_prime + sum) / 2.0)
}

fn check_compatible(name: PresetName, model: &ModelSpec, sector: &SectorLabels) -> Result<()> {
    let (m, r, s, k) = name.structure();
    if model.m != m || model.r != r || model.s != s || model.k != k {
        return Err(Error::IncompatiblePreset(format!(
            "{name} needs (M, r, s, k) = ({m}, {r}, {s}, {k:?})"
        )));
    }
    if sector.q.len() != m || sector.a.len() != m {
        return Err(Error::IncompatiblePreset(format!("sector {sector} has the wrong mode count")));
    }
    let zero_kappa = matches!(name, PresetName::BoseHubbard | PresetName::Lmg | PresetName::RigidRotor);
    if zero_kappa && sector.kappa != Rational::ZERO {
        return Err(Error::IncompatiblePreset(format!("{name} sectors have kappa = 0")));
    }
    Ok(())
}

fn p(coeffs: &[f64]) -> Poly {
    Poly::new(coeffs.to_vec())
}

/// The closed-form `P_0 … P_𝓜` of a preset.
pub fn published_polynomials(
    name: PresetName,
    model: &ModelSpec,
    sector: &SectorLabels,
    form: Form,
) -> Result<Vec<Poly>> {
    check_compatible(name, model, sector)?;
    let j = sector.j.to_f64();
    let pp = sector.p as f64;
    let kappa = sector.kappa.to_f64();
    let (g, gp) = (model.g, model.g_prime);
    let polys = match name {
        PresetName::BoseHubbard => {
            let sign = match form {
                Form::Printed => 1.0,
                Form::Corrected => -1.0,
            };
            vec![
                p(&[gp * j * j, -sign * 2.0 * j * g]),
                p(&[g, gp * (1.0 - 2.0 * j), sign * g]),
                p(&[0.0, 0.0, gp]),
            ]
        }
        PresetName::Lmg => vec![
            p(&[gp * (pp - j), g * (2.0 * j - pp) * (2.0 * j - pp - 1.0)]),
            p(&[g * (2.0 + 4.0 * pp), 2.0 * gp, g * (6.0 + 4.0 * pp - 8.0 * j)]),
            p(&[0.0, 4.0 * g, 0.0, 4.0 * g]),
        ],
        PresetName::RigidRotor => {
            let (a, b, c) = rotor_abc(model);
            let (amb, t) = (a - b, 2.0 * c - a - b);
            vec![
                p(&[
                    t / 2.0 * (pp - j).powi(2) + (a + b) / 2.0 * j * (j + 1.0),
                    amb / 4.0 * (2.0 * j - pp) * (2.0 * j - pp - 1.0),
                ]),
                p(&[
                    amb / 2.0 * (1.0 + 2.0 * pp),
                    2.0 * t * (1.0 + pp - j),
                    amb / 2.0 * (3.0 + 2.0 * pp - 4.0 * j),
                ]),
                p(&[0.0, amb, 2.0 * t, amb]),
            ]
        }
        PresetName::TavisCummings => {
            let w = model.w[0];
            let c = 2.0 * kappa + j - 1.0;
            vec![
                p(&[w * c - gp * j, 2.0 * g * j * c]),
                p(&[g, gp - w, -g * (3.0 * j + 2.0 * kappa - 2.0)]),
                p(&[0.0, 0.0, 0.0, g]),
            ]
        }
        PresetName::TwoModeTc => {
            let (w1, w2) = (model.w[0], model.w[1]);
            let l = sector.l[0].to_f64();
            let a = g * (-9.0 * j * kappa + 10.0 * j + 6.0 * kappa + l * l / 4.0 - 5.0 * j * j - 4.0
                - 9.0 / 4.0 * kappa * kappa);
            let first = match form {
                Form::Printed => 9.0 * j * kappa / 2.0,
                Form::Corrected => 9.0 * j * kappa * kappa / 2.0,
            };
            let b = g * (first + 6.0 * j * j * kappa - 6.0 * j * kappa + 2.0 * j - j * l * l / 2.0
                + 2.0 * j.powi(3)
                - 4.0 * j * j);
            let f = (w1 + w2) * (1.5 * kappa - 1.0 + j) + l / 2.0 * (w1 - w2) - gp * j;
            vec![
                p(&[f, b]),
                p(&[g, gp - w1 - w2, a]),
                p(&[0.0, 0.0, 0.0, g * (3.0 * kappa + 4.0 * j - 5.0)]),
                p(&[0.0, 0.0, 0.0, 0.0, -g]),
            ]
        }
    };
    Ok(polys)
}

/// Sector size `𝒩` as given for each preset.
pub fn published_n_max(name: PresetName, sector: &SectorLabels, form: Form) -> Result<i64> {
    let j = sector.j;
    let two_j = (j * 2).to_integer().unwrap_or(0);
    let printed = match name {
        PresetName::BoseHubbard => Rational::integer(two_j),
        PresetName::Lmg | PresetName::RigidRotor => {
            Rational::new(two_j - sector.p as i64 - sector.lambda as i64, 2)
        }
        PresetName::TavisCummings => (sector.kappa * 2 + j - 1).min(Rational::integer(two_j)),
        PresetName::TwoModeTc => {
            ((sector.kappa * 3 - sector.l[0]) / 2 - 1 + j).min(Rational::integer(two_j))
        }
    };
    let value = match form {
        Form::Printed => printed,
        Form::Corrected => Rational::integer(sector.n_max() as i64),
    };
    value
        .to_integer()
        .ok_or_else(|| Error::IncompatiblePreset(format!("non-integral size {value}")))
}

/// The closed-form energy of a preset at the given roots.
pub fn published_energy(
    name: PresetName,
    model: &ModelSpec,
    sector: &SectorLabels,
    roots: &[Complex64],
    form: Form,
) -> Result<f64> {
    check_compatible(name, model, sector)?;
    let j = sector.j.to_f64();
    let lam = sector.lambda as f64;
    let kappa = sector.kappa.to_f64();
    let n = published_n_max(name, sector, form)? as f64;
    let (g, gp) = (model.g, model.g_prime);
    let sum: Complex64 = roots.iter().sum();
    let (constant, slope) = match name {
        PresetName::BoseHubbard => (gp * j * j, g),
        PresetName::Lmg => (gp * (j - lam), g * (lam + 1.0) * (lam + 2.0)),
        PresetName::RigidRotor => {
            let (a, b, c) = rotor_abc(model);
            (
                (2.0 * c - a - b) / 2.0 * (j - lam).powi(2) + (a + b) / 2.0 * j * (j + 1.0),
                (a - b) / 4.0 * (lam + 1.0) * (lam + 2.0),
            )
        }
        PresetName::TavisCummings => (
            model.w[0] * (2.0 * kappa + j - n - 1.0) + gp * (n - j),
            g * (2.0 * j - n + 1.0) * (2.0 * kappa + j - n),
        ),
        PresetName::TwoModeTc => {
            let (w1, w2) = (model.w[0], model.w[1]);
            let l = sector.l[0].to_f64();
            (
                (w1 + w2) * (1.5 * kappa - 1.0 + j - n) + l / 2.0 * (w1 - w2) + gp * (n - j),
                g * (2.0 * j - n + 1.0) * ((1.5 * kappa + j - n).powi(2) - l * l / 4.0),
            )
        }
    };
    Ok((Complex64::new(constant, 0.0) - sum * slope).re)
}

/// Residuals of the root equations in their closed forms, scaled by the
/// largest term in each equation.
pub fn published_bae_residuals(
    name: PresetName,
    model: &ModelSpec,
    sector: &SectorLabels,
    roots: &[Complex64],
    form: Form,
) -> Result<Vec<f64>> {
    check_compatible(name, model, sector)?;
    let j = sector.j.to_f64();
    let pp = sector.p as f64;
    let kappa = sector.kappa.to_f64();
    let (g, gp) = (model.g, model.g_prime);
    let printed = form == Form::Printed;
    let four_j = if printed { 4.0 } else { 4.0 * j };
    let orient = if printed { -1.0 } else { 1.0 };
    let one = Complex64::new(1.0, 0.0);

    let mut out = Vec::with_capacity(roots.len());
    for (mu, &x) in roots.iter().enumerate() {
        let others: Vec<Complex64> = roots
            .iter()
            .enumerate()
            .filter(|&(t, _)| t != mu)
            .map(|(_, &a)| a)
            .collect();
        // Σ 2/(α_μ − α_i), or its printed orientation
        let pair: Vec<Complex64> = others.iter().map(|a| orient * 2.0 / (x - a)).collect();
        let lhs: Complex64 = pair.iter().sum();
        let lhs_scale: f64 = pair.iter().map(|t| t.norm()).sum();
        let (residual, scale) = match name {
            PresetName::BoseHubbard => {
                let sign = if printed { 1.0 } else { -1.0 };
                let num = [x * gp * (1.0 - 2.0 * j), g * one, sign * g * x * x];
                ratio(lhs, lhs_scale, &num, gp * x * x)
            }
            PresetName::Lmg => {
                let num = [g * (3.0 + 2.0 * pp - four_j) * x * x, gp * x, g * (1.0 + 2.0 * pp) * one];
                ratio(lhs, lhs_scale, &num, 2.0 * g * (x * x * x + x))
            }
            PresetName::RigidRotor => {
                let (a, b, c) = rotor_abc(model);
                let (amb, t) = (a - b, 2.0 * c - a - b);
                let num = [
                    amb * (3.0 + 2.0 * pp - four_j) * x * x,
                    4.0 * t * (1.0 + pp - j) * x,
                    amb * (1.0 + 2.0 * pp) * one,
                ];
                ratio(lhs, lhs_scale, &num, 2.0 * amb * (x * x * x + x) + 4.0 * t * x * x)
            }
            PresetName::TavisCummings => {
                let w = model.w[0];
                let num = [-g * (3.0 * j + 2.0 * kappa - 2.0) * x * x, (gp - w) * x, g * one];
                ratio(lhs, lhs_scale, &num, g * x * x * x)
            }
            PresetName::TwoModeTc => {
                let (w1, w2) = (model.w[0], model.w[1]);
                let l = sector.l[0].to_f64();
                let a = g * (-9.0 * j * kappa + 10.0 * j + 6.0 * kappa + l * l / 4.0 - 5.0 * j * j
                    - 4.0
                    - 9.0 / 4.0 * kappa * kappa);
                let x4 = x * x * x * x;
                let mut pairs = Complex64::new(0.0, 0.0);
                let mut pair_scale = 0.0;
                for u in 0..others.len() {
                    for v in u + 1..others.len() {
                        let t = 6.0 * g * x4 / ((x - others[u]) * (x - others[v]));
                        pairs += t;
                        pair_scale += t.norm();
                    }
                }
                let mut singles = Complex64::new(0.0, 0.0);
                let mut single_scale = 0.0;
                for o in &others {
                    let t = 2.0 * g * (3.0 * kappa + 4.0 * j - 5.0) * x * x * x / (x - o);
                    singles += t;
                    single_scale += t.norm();
                }
                let rhs = a * x * x + (gp - w1 - w2) * x + g;
                let rhs_scale = (a * x * x).norm() + ((gp - w1 - w2) * x).norm() + g.abs();
                (pairs - singles - rhs, pair_scale + single_scale + rhs_scale)
            }
        };
        out.push(residual.norm() / scale.max(f64::MIN_POSITIVE));
    }
    Ok(out)
}

/// `lhs + Σnum/den` and the magnitude of its terms.
fn ratio(lhs: Complex64, lhs_scale: f64, num: &[Complex64], den: Complex64) -> (Complex64, f64) {
    let total: Complex64 = num.iter().sum();
    let scale = num.iter().map(|t| t.norm()).sum::<f64>() / den.norm();
    (lhs + total / den, lhs_scale + scale)
}

/// The general closed-form energy, with the boson term of `Form::Printed`
/// weighting every `l_μ` equally.
pub fn general_energy(model: &ModelSpec, sector: &SectorLabels, roots: &[Complex64], form: Form) -> f64 {
    let n_max = sector.n_max() as i64;
    let m = model.m as i64;
    let mut e = 0.0;
    for i in 0..model.m {
        let k = model.k[i] as i64;
        let weighted: Rational = sector
            .l
            .iter()
            .enumerate()
            .map(|(mu, &l)| match form {
                Form::Printed => l,
                Form::Corrected => l * (mu as i64 + 1),
            })
            .sum();
        let tail: Rational = sector.l[i..].iter().copied().sum();
        let inner = sector.kappa * (m + 1) / m
            - (Rational::integer(sector.p as i64) - sector.j) / model.r as i64
            - n_max
            - weighted / m
            + tail;
        e += model.w[i] * (inner * k - Rational::new(1, k)).to_f64();
    }
    let mu = (Rational::integer(n_max * model.r as i64 + sector.p as i64) - sector.j).to_f64();
    e += model.g_prime * mu.powi(model.s as i32);
    e += model.shift_for(sector.j);
    if !roots.is_empty() {
        let prev = n_max as f64 - 1.0;
        let (r, pp) = (model.r as f64, sector.p as f64);
        let two_j = 2.0 * sector.j.to_f64();
        let mut raise: f64 = (1..=model.r).map(|i| two_j - pp - i as f64 + 1.0 - r * prev).product();
        for i in 0..model.m {
            let k = model.k[i];
            for nu in 1..=k {
                raise *= k as f64 * (mode_offset(sector, k, i, nu).to_f64() - prev);
            }
        }
        let sum: Complex64 = roots.iter().sum();
        e -= (sum * model.g * raise).re;
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for name in PresetName::ALL {
            assert_eq!(name.as_str().parse::<PresetName>().unwrap(), name);
            let json = serde_json::to_string(&name).unwrap();
            assert_eq!(json, format!("\"{name}\""));
        }
        assert!(matches!("bosehubbard".parse::<PresetName>(), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn missing_params_are_reported() {
        let err = preset(PresetName::TwoModeTc, &BTreeMap::new()).unwrap_err();
        assert_eq!(err, Error::MissingParam("w1".into()));
    }

    #[test]
    fn rotor_mapping() {
        let params: BTreeMap<String, f64> =
            [("a", 1.0), ("b", 2.0), ("c", 3.0)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let model = preset(PresetName::RigidRotor, &params).unwrap();
        assert_eq!((model.g_prime, model.g, model.casimir_weight), (1.5, -0.25, 1.5));
        assert_eq!(rotor_abc(&model), (1.0, 2.0, 3.0));

        let sym = [("a", 2.0), ("b", 2.0), ("c", 1.0)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
        assert_eq!(preset(PresetName::RigidRotor, &sym).unwrap().g, 0.0);
    }

    #[test]
    fn every_default_builds() {
        for name in PresetName::ALL {
            let model = preset(name, &name.default_params()).unwrap();
            assert_eq!(model.m, name.structure().0);
        }
    }
}
