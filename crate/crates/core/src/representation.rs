//! Finite sector representations of the deformed algebra and the Hamiltonian.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelSpec, SectorLabels};
use crate::operator::{build_hamiltonian_operator, mode_offset};
use crate::rational::Rational;

/// Generators and Hamiltonian of one sector in its orthonormal chain basis.
#[derive(Debug, Clone)]
pub struct SectorMatrices {
    pub p0: DMatrix<f64>,
    pub pplus: DMatrix<f64>,
    pub pminus: DMatrix<f64>,
    pub h: DMatrix<f64>,
    /// Monomial normalization: chain state `n` maps to `z^n / norm_scale[n]`.
    /// Normalized so that `norm_scale[0] = 1`.
    pub norm_scale: Vec<f64>,
}

fn signed_sqrt_product(radicands: impl IntoIterator<Item = f64>, index: usize) -> Result<f64> {
    let mut prod = 1.0;
    for x in radicands {
        if x == 0.0 {
            return Ok(0.0);
        }
        prod *= x;
    }
    if prod < 0.0 {
        return Err(Error::NegativeRadicand { index, value: prod });
    }
    Ok(prod.sqrt())
}

/// Matrix element `⟨n+1| 𝒫_+ |n⟩` from the raising formula, for any integer `n`.
pub fn raise_coefficient(model: &ModelSpec, sector: &SectorLabels, n: i64) -> Result<f64> {
    let r = model.r as i64;
    let p = sector.p as i64;
    let two_j = (sector.j * 2).to_integer().unwrap_or(0);
    let spin = (1..=r).map(|i| ((p + i + r * n) * (two_j - p - i + 1 - r * n)) as f64);
    let modes = (0..model.m).flat_map(|i| {
        let k = model.k[i];
        (1..=k).map(move |mu| (mode_offset(sector, k, i, mu) - n).to_f64())
    });
    let index = n.max(0) as usize;
    signed_sqrt_product(spin.chain(modes.collect::<Vec<_>>()), index)
}

/// Matrix element `⟨n−1| 𝒫_- |n⟩` from the lowering formula, for any integer `n`.
pub fn lower_coefficient(model: &ModelSpec, sector: &SectorLabels, n: i64) -> Result<f64> {
    let r = model.r as i64;
    let p = sector.p as i64;
    let two_j = (sector.j * 2).to_integer().unwrap_or(0);
    let spin = (1..=r).map(|i| ((p - i + 1 + r * n) * (two_j - p + i - r * n)) as f64);
    let modes = (0..model.m).flat_map(|i| {
        let k = model.k[i] as i64;
        (1..=k).map(move |mu| {
            (sector.a[i] + sector.q[i] + Rational::new(mu * k - 1, k * k) - n).to_f64()
        })
    });
    let index = n.max(0) as usize;
    signed_sqrt_product(spin.chain(modes.collect::<Vec<_>>()), index)
}

/// Ratio `norm_scale[n+1] / norm_scale[n]` from the factorial denominators
/// `√((p+rn)! (2j−p−rn)! Π_i n_i!)`.
fn norm_ratio(model: &ModelSpec, sector: &SectorLabels, n: usize) -> f64 {
    let r = model.r as i64;
    let p = sector.p as i64;
    let two_j = (sector.j * 2).to_integer().unwrap_or(0);
    let rn = r * n as i64;
    let mut sq = 1.0;
    for i in 1..=r {
        sq *= (p + rn + i) as f64;
        sq /= (two_j - p - rn - i + 1) as f64;
    }
    for i in 0..model.m {
        let ni = sector.bosons_at(model, i, n).to_f64();
        for t in 0..model.k[i] {
            sq /= ni - t as f64;
        }
    }
    sq.sqrt()
}

pub fn norm_scale(model: &ModelSpec, sector: &SectorLabels) -> Vec<f64> {
    let mut out = Vec::with_capacity(sector.dim);
    out.push(1.0);
    for n in 0..sector.n_max() {
        let next = out[n] * norm_ratio(model, sector, n);
        out.push(next);
    }
    out
}

/// Builds `𝒫_{0,±}` and `H` on the sector.
pub fn sector_matrices(model: &ModelSpec, sector: &SectorLabels) -> Result<SectorMatrices> {
    let dim = sector.dim;
    let r = model.r as i64;
    let mut p0 = DMatrix::zeros(dim, dim);
    let mut pplus = DMatrix::zeros(dim, dim);
    let mut pminus = DMatrix::zeros(dim, dim);
    let mut h = DMatrix::zeros(dim, dim);
    let shift = model.shift_for(sector.j);
    let coupling = model.g * model.boson_norm();

    for n in 0..dim {
        let x = Rational::new(2 * sector.p as i64, 2 * r) - sector.j / r + n as i64 - sector.kappa;
        p0[(n, n)] = x.to_f64();
        let mu = sector.mu_at(model, n).to_f64();
        let bosons: f64 = (0..model.m)
            .map(|i| model.w[i] * sector.bosons_at(model, i, n).to_f64())
            .sum();
        h[(n, n)] = bosons + model.g_prime * mu.powi(model.s as i32) + shift;
        if n + 1 < dim {
            pplus[(n + 1, n)] = raise_coefficient(model, sector, n as i64)?;
        }
        if n > 0 {
            pminus[(n - 1, n)] = lower_coefficient(model, sector, n as i64)?;
        }
    }
    h += (&pplus + &pminus) * coupling;

    let asym = (&h - h.transpose()).amax();
    if asym > 1e-12 * h.amax().max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric(asym));
    }
    let h = (&h + h.transpose()) * 0.5;
    Ok(SectorMatrices {
        p0,
        pplus,
        pminus,
        h,
        norm_scale: norm_scale(model, sector),
    })
}

/// Deviations from the defining relations, each relative to its natural scale.
#[derive(Debug, Clone, Serialize)]
pub struct AlgebraDiagnostics {
    /// `‖[𝒫_0, 𝒫_+] − 𝒫_+‖`
    pub p0_plus: f64,
    /// `‖[𝒫_0, 𝒫_-] + 𝒫_-‖`
    pub p0_minus: f64,
    /// `‖[𝒫_+, 𝒫_-] − (−1)^{M+1}(Ψ(𝒫_0 − 1) − Ψ(𝒫_0))‖`
    pub plus_minus: f64,
    /// Same identity without the `(−1)^{M+1}` factor, as printed.
    pub plus_minus_printed: f64,
    /// `|⟨−1|𝒫_-|0⟩|`, lowering out of the lowest state.
    pub lowest_annihilation: f64,
    /// `|⟨𝒩+1|𝒫_+|𝒩⟩|`, raising out of the highest state.
    pub highest_annihilation: f64,
}

impl AlgebraDiagnostics {
    /// Largest deviation among the corrected identities.
    pub fn max_deviation(&self) -> f64 {
        self.p0_plus
            .max(self.p0_minus)
            .max(self.plus_minus)
            .max(self.lowest_annihilation)
            .max(self.highest_annihilation)
    }
}

/// `ψ^{(2r)}(κ, x, C) Π_i φ^{(k_i)}(κ, x, {l})`, the structure polynomial of the commutator.
pub fn structure_polynomial(model: &ModelSpec, sector: &SectorLabels, x: f64) -> f64 {
    structure_terms(model, sector, x).0
}

/// Value of the structure polynomial and the same product taken over the
/// absolute values of each factor's terms, the scale of its rounding error.
fn structure_terms(model: &ModelSpec, sector: &SectorLabels, x: f64) -> (f64, f64) {
    let r = model.r as f64;
    let kappa = sector.kappa.to_f64();
    let c = sector.casimir();
    let shifted = r * kappa + r * x;
    let (mut value, mut magnitude) = (-1.0, 1.0);
    for i in 1..=model.r {
        let i = i as f64;
        let (a, b) = (shifted + r - i + 1.0, shifted + r - i);
        let spread = (r * kappa).abs() + (r * x).abs();
        value *= c - a * b;
        magnitude *= c.abs() + (spread + (r - i + 1.0).abs()) * (spread + (r - i).abs());
    }
    if model.m == 0 {
        return (value, magnitude);
    }
    let m = model.m as f64;
    let weighted: f64 = sector
        .l
        .iter()
        .enumerate()
        .map(|(mu, l)| (mu as f64 + 1.0) * l.to_f64())
        .sum();
    for i in 0..model.m {
        let k = model.k[i] as f64;
        let tail: f64 = sector.l[i..].iter().map(|l| l.to_f64()).sum();
        let base = kappa / m - (x + 1.0) - weighted / m + tail;
        let base_mag = (kappa / m).abs() + (x + 1.0).abs() + (weighted / m).abs() + tail.abs();
        value = -value;
        for nu in 1..=model.k[i] {
            let shift = (nu as f64 * k - 1.0) / (k * k);
            value *= base + shift;
            magnitude *= base_mag + shift.abs();
        }
    }
    (value, magnitude)
}

fn rel(dev: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        dev / scale
    } else {
        dev
    }
}

/// Checks the commutation relations on the supplied matrices.
pub fn check_algebra_matrices(
    model: &ModelSpec,
    sector: &SectorLabels,
    mats: &SectorMatrices,
) -> Result<AlgebraDiagnostics> {
    let dim = sector.dim;
    let (p0, pp, pm) = (&mats.p0, &mats.pplus, &mats.pminus);
    let c_plus = p0 * pp - pp * p0 - pp;
    let c_minus = p0 * pm - pm * p0 + pm;
    let comm = pp * pm - pm * pp;

    let sign = if model.m.is_multiple_of(2) { -1.0 } else { 1.0 };
    let mut target = DMatrix::zeros(dim, dim);
    let mut scale = comm.amax();
    for n in 0..dim {
        let x = p0[(n, n)];
        let (below, below_mag) = structure_terms(model, sector, x - 1.0);
        let (here, here_mag) = structure_terms(model, sector, x);
        scale = scale.max(below_mag).max(here_mag);
        target[(n, n)] = below - here;
    }
    let plus_minus = rel((&comm - &target * sign).amax(), scale);
    let plus_minus_printed = rel((&comm - &target).amax(), scale);

    let ladder_scale = pp.amax().max(pm.amax());
    let lowest = lower_coefficient(model, sector, 0)?;
    let highest = raise_coefficient(model, sector, sector.n_max() as i64)?;
    Ok(AlgebraDiagnostics {
        p0_plus: rel(c_plus.amax(), pp.amax()),
        p0_minus: rel(c_minus.amax(), pm.amax()),
        plus_minus,
        plus_minus_printed,
        lowest_annihilation: rel(lowest.abs(), ladder_scale),
        highest_annihilation: rel(highest.abs(), ladder_scale),
    })
}

pub fn check_algebra(model: &ModelSpec, sector: &SectorLabels) -> Result<AlgebraDiagnostics> {
    let mats = sector_matrices(model, sector)?;
    check_algebra_matrices(model, sector, &mats)
}

/// `max |D H_mono D⁻¹ − H| / max|H|` with `D = diag(norm_scale)`.
pub fn monomial_conjugation_check(model: &ModelSpec, sector: &SectorLabels) -> Result<f64> {
    let mats = sector_matrices(model, sector)?;
    let op = build_hamiltonian_operator(model, sector)?;
    let mono = op.apply_to_monomials(sector.n_max());
    let d = &mats.norm_scale;
    let mut dev: f64 = 0.0;
    for m in 0..sector.dim {
        for n in 0..sector.dim {
            let conj = d[m] * mono[(m, n)] / d[n];
            dev = dev.max((conj - mats.h[(m, n)]).abs());
        }
    }
    Ok(rel(dev, mats.h.amax()))
}

/// Comma-separated dump of a matrix, one row per line.
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{enumerate_sectors, sector_from_reference, ReferenceState};

    fn tc(w: f64, gp: f64, g: f64) -> ModelSpec {
        ModelSpec {
            m: 1,
            r: 1,
            s: 1,
            k: vec![1],
            w: vec![w],
            g_prime: gp,
            g,
            constant_shift: 0.0,
            casimir_weight: 0.0,
        }
    }

    fn bh(gp: f64, g: f64) -> ModelSpec {
        ModelSpec {
            m: 0,
            r: 1,
            s: 2,
            k: vec![],
            w: vec![],
            g_prime: gp,
            g,
            constant_shift: 0.0,
            casimir_weight: 0.0,
        }
    }

    #[test]
    fn tc_doublet_matrix() {
        let model = tc(1.3, 0.7, 0.2);
        let sector = sector_from_reference(
            &model,
            Rational::half(1),
            &ReferenceState {
                mu: Rational::half(1),
                n_bosons: vec![0],
            },
        )
        .unwrap();
        assert_eq!(sector.kappa, Rational::new(3, 4));
        let mats = sector_matrices(&model, &sector).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[1.3 - 0.35, 0.2, 0.2, 0.35]);
        assert!((&mats.h - want).amax() < 1e-15);
    }

    #[test]
    fn one_dimensional_sectors() {
        let model = tc(1.0, 0.5, 0.3);
        let sector = sector_from_reference(
            &model,
            Rational::half(1),
            &ReferenceState {
                mu: Rational::half(-1),
                n_bosons: vec![0],
            },
        )
        .unwrap();
        let mats = sector_matrices(&model, &sector).unwrap();
        assert_eq!(mats.h.shape(), (1, 1));
        assert!((mats.h[(0, 0)] + 0.25).abs() < 1e-15);
        let diag = check_algebra(&model, &sector).unwrap();
        assert!(diag.max_deviation() < 1e-14);
        assert_eq!(monomial_conjugation_check(&model, &sector).unwrap(), 0.0);
    }

    #[test]
    fn bose_hubbard_spin_half() {
        let model = bh(0.8, 0.3);
        let sector = &enumerate_sectors(&model, Rational::half(1), 0).unwrap()[0];
        let mats = sector_matrices(&model, sector).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[0.2, 0.3, 0.3, 0.2]);
        assert!((&mats.h - want).amax() < 1e-15);
    }

    #[test]
    fn su2_commutator_for_plain_spin() {
        // M = 0, r = 1: [J_+, J_-] = 2 J_0, i.e. Ψ(x−1) − Ψ(x) = −2x with the opposite sign.
        let model = bh(1.0, 0.5);
        for two_j in 1..=8 {
            let sector = &enumerate_sectors(&model, Rational::half(two_j), 0).unwrap()[0];
            let mats = sector_matrices(&model, sector).unwrap();
            let comm = &mats.pplus * &mats.pminus - &mats.pminus * &mats.pplus;
            assert!((comm - &mats.p0 * 2.0).amax() < 1e-12);
            for n in 0..sector.dim {
                let x = mats.p0[(n, n)];
                let diff = structure_polynomial(&model, sector, x - 1.0)
                    - structure_polynomial(&model, sector, x);
                assert!((diff + 2.0 * x).abs() < 1e-12);
            }
            let d = check_algebra(&model, sector).unwrap();
            assert!(d.max_deviation() < 1e-12);
            if two_j > 1 {
                assert!(d.plus_minus_printed > 0.1);
            }
        }
    }

    #[test]
    fn sign_flip_is_detected() {
        let model = tc(1.0, 0.5, 0.3);
        let sector = &enumerate_sectors(&model, Rational::integer(2), 3).unwrap()[3];
        let mut mats = sector_matrices(&model, sector).unwrap();
        assert!(check_algebra_matrices(&model, sector, &mats).unwrap().max_deviation() < 1e-12);
        mats.pplus[(1, 0)] *= -1.0;
        let d = check_algebra_matrices(&model, sector, &mats).unwrap();
        assert!(d.plus_minus > 1e-3);
    }

    #[test]
    fn csv_dump() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(matrix_to_csv(&m), "1e0,2e0\n3e0,4e0\n");
    }
}
