//! The spin-boson Hamiltonian family and its conserved quantum numbers.
//!
//! ```text
//! H = Σ_i w_i N_i + g' J_0^s + g (J_+^r Π_i a_i^{k_i} + J_-^r Π_i a_i^{†k_i})
//! ```
//!
//! The coupling term moves one "excitation" between the spin and the modes:
//! `mu → mu + r` together with `n_i → n_i − k_i` for every mode. Each orbit of
//! that move is a finite chain, labelled here by [`SectorLabels`].

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Parameters of one member of the Hamiltonian family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Number of boson modes.
    pub m: usize,
    /// Power of the spin ladder operators in the coupling.
    pub r: u32,
    /// Power of `J_0`.
    pub s: u32,
    /// Boson powers `k_i`, one per mode.
    pub k: Vec<u32>,
    /// Mode frequencies `w_i`.
    pub w: Vec<f64>,
    pub g_prime: f64,
    pub g: f64,
    #[serde(default)]
    pub constant_shift: f64,
    /// Weight of the su(2) Casimir `j(j+1)`, added as a per-spin constant.
    #[serde(default)]
    pub casimir_weight: f64,
}

impl ModelSpec {
    /// Total additive constant for spin `j`.
    pub fn shift_for(&self, j: Rational) -> f64 {
        let jf = j.to_f64();
        self.constant_shift + self.casimir_weight * jf * (jf + 1.0)
    }

    /// Order of the differential realization, `max{r + Σk_i, s}`.
    pub fn operator_order(&self) -> usize {
        let raise = self.r as usize + self.k.iter().map(|&k| k as usize).sum::<usize>();
        raise.max(self.s as usize)
    }

    /// `Π_i (√k_i)^{k_i}`, the normalization between `a^k` and `Q_-`.
    pub fn boson_norm(&self) -> f64 {
        self.k
            .iter()
            .map(|&k| (k as f64).sqrt().powi(k as i32))
            .product()
    }
}

/// Checks the structural invariants of a model and returns it unchanged.
pub fn validate_model(raw: ModelSpec) -> Result<ModelSpec> {
    if raw.k.len() != raw.m || raw.w.len() != raw.m {
        return Err(Error::InvalidModel(format!(
            "length mismatch: M = {}, |k| = {}, |w| = {}",
            raw.m,
            raw.k.len(),
            raw.w.len()
        )));
    }
    if raw.r == 0 || raw.s == 0 {
        return Err(Error::InvalidModel("r and s must be positive".into()));
    }
    if raw.k.contains(&0) {
        return Err(Error::InvalidModel("every k_i must be positive".into()));
    }
    let finite = raw.w.iter().all(|w| w.is_finite())
        && raw.g.is_finite()
        && raw.g_prime.is_finite()
        && raw.constant_shift.is_finite()
        && raw.casimir_weight.is_finite();
    if !finite {
        return Err(Error::InvalidModel("non-finite coupling".into()));
    }
    Ok(raw)
}

/// Product state `|j, mu⟩ ⊗ |n_1 … n_M⟩` used to select a sector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReferenceState {
    pub mu: Rational,
    pub n_bosons: Vec<u64>,
}

/// Conserved labels of one finite invariant block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorLabels {
    pub j: Rational,
    pub p: u32,
    pub lambda: u32,
    pub kappa: Rational,
    pub q: Vec<Rational>,
    pub l: Vec<Rational>,
    #[serde(rename = "A")]
    pub a: Vec<Rational>,
    /// Block dimension `𝒩 + 1`.
    pub dim: usize,
}

impl SectorLabels {
    /// Highest chain index `𝒩`.
    pub fn n_max(&self) -> usize {
        self.dim - 1
    }

    pub fn casimir(&self) -> f64 {
        let j = self.j.to_f64();
        j * (j + 1.0)
    }

    /// Spin projection of the chain state with index `n`.
    pub fn mu_at(&self, model: &ModelSpec, n: usize) -> Rational {
        -self.j + (self.p as i64 + model.r as i64 * n as i64)
    }

    /// Exact boson number of mode `i` at chain index `n`: `k_i(A_i + q_i − n) − 1/k_i`.
    pub fn bosons_at(&self, model: &ModelSpec, i: usize, n: usize) -> Rational {
        let k = model.k[i] as i64;
        (self.a[i] + self.q[i] - n as i64) * k - Rational::new(1, k)
    }

    /// The product state at chain index `n`.
    pub fn reference_at(&self, model: &ModelSpec, n: usize) -> ReferenceState {
        ReferenceState {
            mu: self.mu_at(model, n),
            n_bosons: (0..model.m)
                .map(|i| {
                    self.bosons_at(model, i, n)
                        .to_integer()
                        .expect("boson numbers are integral for valid labels") as u64
                })
                .collect(),
        }
    }

    /// Largest boson number any chain state needs (attained at `n = 0`).
    pub fn max_bosons(&self, model: &ModelSpec) -> u64 {
        (0..model.m)
            .map(|i| self.bosons_at(model, i, 0).to_integer().unwrap_or(0) as u64)
            .max()
            .unwrap_or(0)
    }

    fn sort_key(&self) -> (u32, Rational, Vec<Rational>, Vec<Rational>) {
        (self.p, self.kappa, self.l.clone(), self.q.clone())
    }
}

impl std::fmt::Display for SectorLabels {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |v: &[Rational]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        write!(
            f,
            "j={} p={} kappa={} q=[{}] l=[{}] lambda={} N={}",
            self.j,
            self.p,
            self.kappa,
            join(&self.q),
            join(&self.l),
            self.lambda,
            self.n_max()
        )
    }
}

fn check_spin(j: Rational) -> Result<i64> {
    let two_j = (j * 2).to_integer();
    match two_j {
        Some(t) if t >= 0 => Ok(t),
        _ => Err(Error::InvalidSector(format!(
            "spin {j} is not a non-negative half-integer"
        ))),
    }
}

/// The unique `λ ∈ [0, r)` making `(2j − p − λ)/r` a non-negative integer.
pub fn lambda_of(j: Rational, p: u32, r: u32) -> Result<u32> {
    let two_j = check_spin(j)?;
    if r == 0 {
        return Err(Error::InvalidModel("r must be positive".into()));
    }
    let p_max = (r as i64 - 1).min(two_j);
    if p as i64 > p_max {
        return Err(Error::InvalidSector(format!(
            "p = {p} outside [0, {p_max}]"
        )));
    }
    Ok(((two_j - p as i64) % r as i64) as u32)
}

/// `𝒩 + 1`, with `𝒩 = (2j−p−λ)/r` for `M = 0` and
/// `𝒩 = min{ min_i A_i, (2j−p−λ)/r }` otherwise.
pub fn sector_dimension(
    model: &ModelSpec,
    j: Rational,
    p: u32,
    lambda: u32,
    a: &[Rational],
) -> Result<usize> {
    let two_j = check_spin(j)?;
    let top = two_j - p as i64 - lambda as i64;
    if top < 0 || top % model.r as i64 != 0 {
        return Err(Error::InvalidSector(format!(
            "(2j - p - lambda) = {top} not a non-negative multiple of r = {}",
            model.r
        )));
    }
    let mut n_max = top / model.r as i64;
    for ai in a {
        let ai = ai.to_integer().filter(|&v| v >= 0).ok_or_else(|| {
            Error::InvalidSector(format!("A_i = {ai} is not a non-negative integer"))
        })?;
        n_max = n_max.min(ai);
    }
    Ok(n_max as usize + 1)
}

/// Labels of the sector containing `reference`. All arithmetic is exact.
pub fn sector_from_reference(
    model: &ModelSpec,
    j: Rational,
    reference: &ReferenceState,
) -> Result<SectorLabels> {
    let two_j = check_spin(j)?;
    if reference.n_bosons.len() != model.m {
        return Err(Error::InvalidReference(format!(
            "expected {} boson numbers, got {}",
            model.m,
            reference.n_bosons.len()
        )));
    }
    let up = (reference.mu + j)
        .to_integer()
        .filter(|&v| (0..=two_j).contains(&v))
        .ok_or_else(|| {
            Error::InvalidReference(format!("mu = {} out of range for j = {j}", reference.mu))
        })?;
    let r = model.r as i64;
    let p = (up % r) as u32;
    let n_spin = up / r;

    let mut q = Vec::with_capacity(model.m);
    let mut occupation = Vec::with_capacity(model.m);
    for (i, &n) in reference.n_bosons.iter().enumerate() {
        let k = model.k[i] as i64;
        let n = n as i64;
        let qi = Rational::new((n % k) * k + 1, k * k);
        let mi = Rational::new(n, k) - qi + Rational::new(1, k * k);
        debug_assert!(mi.is_integer() && !mi.is_negative());
        q.push(qi);
        occupation.push(qi + mi);
    }

    let m = model.m as i64;
    let p0 = Rational::new(2 * p as i64 - two_j, 2 * r) + n_spin;
    let kappa = (p0 * m + occupation.iter().copied().sum::<Rational>()) / (m + 1);
    let l: Vec<Rational> = occupation.windows(2).map(|w| w[0] - w[1]).collect();
    let a: Vec<Rational> = occupation
        .iter()
        .zip(&q)
        .map(|(&occ, &qi)| occ - qi + n_spin)
        .collect();
    let lambda = lambda_of(j, p, model.r)?;
    let dim = sector_dimension(model, j, p, lambda, &a)?;
    Ok(SectorLabels {
        j,
        p,
        lambda,
        kappa,
        q,
        l,
        a,
        dim,
    })
}

/// All boson-number vectors of length `m` with total at most `cap`.
pub(crate) fn boson_vectors(m: usize, cap: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur = vec![0u64; m];
    fn rec(i: usize, left: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[i] = v;
            rec(i + 1, left - v, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, cap, &mut cur, &mut out);
    out
}

/// Spin projections `−j, −j+1, …, j`.
pub(crate) fn spin_projections(j: Rational) -> Vec<Rational> {
    let two_j = (j * 2).to_integer().unwrap_or(-1);
    (0..=two_j).map(|t| -j + t).collect()
}

/// Distinct sectors reached from every reference state with `Σ n_i ≤ max_total_bosons`,
/// sorted by `(p, κ, l, q)`.
pub fn enumerate_sectors(
    model: &ModelSpec,
    j: Rational,
    max_total_bosons: u64,
) -> Result<Vec<SectorLabels>> {
    check_spin(j)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for n in boson_vectors(model.m, max_total_bosons) {
        for mu in spin_projections(j) {
            let labels = sector_from_reference(
                model,
                j,
                &ReferenceState {
                    mu,
                    n_bosons: n.clone(),
                },
            )?;
            if seen.insert(labels.sort_key()) {
                out.push(labels);
            }
        }
    }
    out.sort_by_key(|s| s.sort_key());
    Ok(out)
}
