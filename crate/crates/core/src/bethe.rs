//! Polynomial eigenfunctions, their roots, and the Bethe ansatz equations.
//!
//! Within a sector every eigenstate is `ψ(z) = Π_{t=1}^{𝒩} (z − α_t)` up to
//! normalization. The roots satisfy
//!
//! ```text
//! Σ_{i≥1} P_i(α_μ) i! e_{i−1}({1/(α_μ − α_t)}_{t≠μ}) = 0
//! ```
//!
//! and fix the energy through the `z^𝒩` coefficient of `Hψ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{jacobi_eigen, newton_solve, polynomial_roots, EigenDecomposition, NewtonOutcome};
use crate::model::{ModelSpec, SectorLabels};
use crate::operator::{build_hamiltonian_operator, extract_polynomials, mode_offset, EulerOperator, Poly};
use crate::representation::{sector_matrices, SectorMatrices};

/// One eigenstate of a sector, described by the roots of its eigenfunction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheState {
    pub sector: SectorLabels,
    /// Position in the ascending sector spectrum.
    pub index: usize,
    #[serde(with = "complex_pairs")]
    pub roots: Vec<Complex64>,
    /// Energy from the roots.
    pub energy: f64,
    /// Eigenvalue of the sector matrix the roots were recovered from.
    pub eigenvalue: f64,
    #[serde(with = "complex_pairs")]
    pub bae_residuals: Vec<Complex64>,
    /// `max_μ |residual_μ|` scaled by `max_{i≥1} max_{|z|≤R} |P_i(z)|`.
    pub bae_residual: f64,
    /// Two or more roots coincide to working precision (also set when `g = 0`).
    pub degenerate_roots: bool,
    /// `ψ` rebuilt from the roots satisfies `Hψ = Eψ`.
    pub verified: bool,
    pub refined: bool,
    pub refine_failed: bool,
}

/// `[re, im]` pairs on the wire.
pub mod complex_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

/// Everything computed once per sector and shared by its eigenstates.
#[derive(Debug, Clone)]
pub struct SectorContext {
    pub model: ModelSpec,
    pub sector: SectorLabels,
    pub tol: Tolerances,
    pub op: EulerOperator,
    pub polys: Vec<Poly>,
    pub mats: SectorMatrices,
    pub eigen: EigenDecomposition,
}

impl SectorContext {
    pub fn new(model: &ModelSpec, sector: &SectorLabels, tol: Tolerances) -> Result<Self> {
        let op = build_hamiltonian_operator(model, sector)?;
        let polys = extract_polynomials(&op);
        let mats = sector_matrices(model, sector)?;
        let eigen = jacobi_eigen(&mats.h, tol.eigen)?;
        Ok(SectorContext {
            model: model.clone(),
            sector: sector.clone(),
            tol,
            op,
            polys,
            mats,
            eigen,
        })
    }

    pub fn dim(&self) -> usize {
        self.sector.dim
    }

    /// Eigenvector `index` refined for small components, in the orthonormal basis.
    pub fn eigenvector(&self, index: usize) -> Vec<f64> {
        let guess = self.eigen.vector(index);
        refine_tridiagonal(&self.mats.h, self.eigen.values[index], &guess)
    }

    /// Recovers the roots of eigenstate `index` (ascending energy).
    pub fn recover(&self, index: usize) -> Result<BetheState> {
        let e = self.eigen.values[index];
        let x = self.eigenvector(index);
        if self.model.g == 0.0 {
            return Ok(self.decoupled_state(index, e, &x));
        }
        let n_max = self.sector.n_max();
        let coeffs: Vec<f64> = x
            .iter()
            .zip(&self.mats.norm_scale)
            .map(|(xn, s)| xn / s)
            .collect();
        let top = coeffs[n_max];
        let lead_scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if top == 0.0 || top.abs() < f64::EPSILON * 1e-3 * lead_scale {
            return Err(Error::VanishingLeadingCoefficient(self.sector.to_string()));
        }
        let rootset = polynomial_roots(&coeffs, self.tol.roots)?;
        let roots = rootset.roots;
        let energy = self.energy(&roots)?;
        let (bae_residuals, bae_residual) = match self.residuals(&roots) {
            Ok(res) => {
                let scaled = self.scaled_residual(&roots, &res);
                (res, scaled)
            }
            Err(Error::CoincidentRoots(..)) => (vec![], f64::INFINITY),
            Err(err) => return Err(err),
        };
        let verified = self.eigen_residual(&roots, energy) <= self.tol.matching;
        Ok(BetheState {
            sector: self.sector.clone(),
            index,
            roots,
            energy,
            eigenvalue: e,
            bae_residuals,
            bae_residual,
            degenerate_roots: rootset.clustered,
            verified,
            refined: false,
            refine_failed: false,
        })
    }

    /// At `g = 0` the eigenfunctions are bare monomials `z^n`.
    fn decoupled_state(&self, index: usize, e: f64, x: &[f64]) -> BetheState {
        let n = x
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (i, v)| if v.abs() > best.1 { (i, v.abs()) } else { best })
            .0;
        BetheState {
            sector: self.sector.clone(),
            index,
            roots: vec![Complex64::new(0.0, 0.0); n],
            energy: e,
            eigenvalue: e,
            bae_residuals: vec![],
            bae_residual: 0.0,
            degenerate_roots: true,
            verified: true,
            refined: false,
            refine_failed: false,
        }
    }

    /// Closed-form energy, cross-checked against `[z^𝒩](Hψ)`.
    pub fn energy(&self, roots: &[Complex64]) -> Result<f64> {
        let (closed, magnitude) = closed_form_energy(&self.model, &self.sector, roots);
        let psi = monic_from_roots(roots);
        let n_max = self.sector.n_max();
        let (mut ratio, mut scale) = (Complex64::new(0.0, 0.0), 0.0);
        for (n, c) in psi.iter().enumerate() {
            let h = self.op_top_row(n_max, n);
            ratio += c * h;
            scale += (c * h).norm();
        }
        let scale = scale.max(magnitude).max(f64::MIN_POSITIVE);
        if closed.im.abs() > 1e-9 * scale {
            return Err(Error::ComplexEnergy {
                imag: closed.im,
                scale,
            });
        }
        if (closed - ratio).norm() > 1e-9 * scale {
            return Err(Error::EnergyMismatch {
                closed: closed.re,
                ratio: ratio.re,
            });
        }
        Ok(closed.re)
    }

    /// `[z^m](H z^n)`
    fn op_top_row(&self, m: usize, n: usize) -> f64 {
        self.op
            .terms()
            .map(|(d, p)| {
                if d > n {
                    return 0.0;
                }
                let shift = m as i64 - n as i64 + d as i64;
                if shift < 0 {
                    return 0.0;
                }
                p.coeff(shift as usize) * falling(n, d)
            })
            .sum()
    }

    pub fn residuals(&self, roots: &[Complex64]) -> Result<Vec<Complex64>> {
        residuals_with(&self.polys, roots)
    }

    /// `max|res| / max_{i≥1} Σ_k |c_k| R^k` with `R = max(1, max|α|)`.
    pub fn scaled_residual(&self, roots: &[Complex64], res: &[Complex64]) -> f64 {
        let radius = roots.iter().fold(1.0f64, |m, z| m.max(z.norm()));
        let norm = self.polys[1..]
            .iter()
            .fold(0.0f64, |m, p| m.max(p.abs_bound(radius)))
            .max(f64::MIN_POSITIVE);
        res.iter().fold(0.0f64, |m, r| m.max(r.norm())) / norm
    }

    /// `‖(H − E) x‖_∞ / (‖H‖_∞ ‖x‖_∞)` for `x` rebuilt from the roots.
    pub fn eigen_residual(&self, roots: &[Complex64], energy: f64) -> f64 {
        let psi = monic_from_roots(roots);
        let x: Vec<Complex64> = psi
            .iter()
            .zip(&self.mats.norm_scale)
            .map(|(c, s)| c * s)
            .collect();
        let h = &self.mats.h;
        let dim = x.len();
        let mut worst = 0.0f64;
        let mut h_norm = 0.0f64;
        for a in 0..dim {
            let mut acc = -x[a] * energy;
            let mut row = 0.0;
            for b in 0..dim {
                acc += x[b] * h[(a, b)];
                row += h[(a, b)].abs();
            }
            worst = worst.max(acc.norm());
            h_norm = h_norm.max(row);
        }
        let x_norm = x.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        worst / (h_norm.max(energy.abs()).max(f64::MIN_POSITIVE) * x_norm.max(f64::MIN_POSITIVE))
    }

    /// Newton iteration on the Bethe equations, split into real and imaginary
    /// parts and scaled like [`Self::scaled_residual`].
    pub fn polish(&self, roots: &[Complex64]) -> Result<NewtonOutcome> {
        let radius = roots.iter().fold(1.0f64, |m, z| m.max(z.norm()));
        let norm = self.polys[1..]
            .iter()
            .fold(0.0f64, |m, p| m.max(p.abs_bound(radius)))
            .max(f64::MIN_POSITIVE);
        let f = |x: &[f64]| -> Vec<f64> {
            match residuals_with(&self.polys, &unpack(x)) {
                Ok(res) => res.iter().flat_map(|r| [r.re / norm, r.im / norm]).collect(),
                Err(_) => vec![f64::INFINITY; x.len()],
            }
        };
        let x0: Vec<f64> = roots.iter().flat_map(|z| [z.re, z.im]).collect();
        newton_solve(f, &x0, self.tol.newton, 30)
    }

    /// Newton polish of the roots on the Bethe equations themselves.
    pub fn refine(&self, state: &BetheState) -> BetheState {
        let mut out = state.clone();
        if state.roots.is_empty() || self.model.g == 0.0 {
            out.refined = true;
            return out;
        }
        let outcome = match self.polish(&state.roots) {
            Ok(o) => o,
            Err(_) => {
                out.refine_failed = true;
                return out;
            }
        };
        let roots = unpack(&outcome.x);
        let energy = match self.energy(&roots) {
            Ok(e) => e,
            Err(_) => {
                out.refine_failed = true;
                return out;
            }
        };
        let e_scale = self.mats.h.amax().max(energy.abs());
        if (energy - state.eigenvalue).abs() > 1e-8 * e_scale {
            out.refine_failed = true;
            return out;
        }
        let res = residuals_with(&self.polys, &roots).unwrap_or_default();
        out.bae_residual = self.scaled_residual(&roots, &res);
        out.bae_residuals = res;
        out.verified = self.eigen_residual(&roots, energy) <= self.tol.matching;
        out.roots = roots;
        out.energy = energy;
        out.refined = true;
        out
    }

    /// `(Hψ)(z)/ψ(z) − E` relative to its largest term.
    pub fn liouville(&self, roots: &[Complex64], energy: f64, z: Complex64) -> f64 {
        let inv: Vec<Complex64> = roots.iter().map(|a| (z - a).inv()).collect();
        let e = elementary_symmetric(&inv);
        let mut total = Complex64::new(-energy, 0.0);
        let mut scale = energy.abs();
        let mut fact = 1.0;
        for (i, p) in self.polys.iter().enumerate() {
            if i > 0 {
                fact *= i as f64;
            }
            let ei = e.get(i).copied().unwrap_or_default();
            let term = p.eval_complex(z) * fact * ei;
            scale = scale.max(term.norm());
            total += term;
        }
        total.norm() / scale.max(f64::MIN_POSITIVE)
    }
}

fn unpack(x: &[f64]) -> Vec<Complex64> {
    x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

fn falling(n: usize, d: usize) -> f64 {
    (0..d).map(|t| (n - t) as f64).product()
}

/// `Σ w_i n̄_i + g'(r𝒩 − j + p)^s − g R(𝒩−1) Σα + shift` where `R(n)` is the
/// raising factor evaluated on `z^n`. Also returns the summed magnitude of the terms.
fn closed_form_energy(model: &ModelSpec, sector: &SectorLabels, roots: &[Complex64]) -> (Complex64, f64) {
    let n_max = sector.n_max();
    let mut e: f64 = (0..model.m)
        .map(|i| model.w[i] * sector.bosons_at(model, i, n_max).to_f64())
        .sum();
    e += model.g_prime * sector.mu_at(model, n_max).to_f64().powi(model.s as i32);
    e += model.shift_for(sector.j);
    if roots.is_empty() {
        return (Complex64::new(e, 0.0), e.abs());
    }
    let prev = n_max as f64 - 1.0;
    let r = model.r as f64;
    let p = sector.p as f64;
    let two_j = 2.0 * sector.j.to_f64();
    let mut raise: f64 = (1..=model.r)
        .map(|i| two_j - p - i as f64 + 1.0 - r * prev)
        .product();
    for i in 0..model.m {
        let k = model.k[i];
        for nu in 1..=k {
            raise *= k as f64 * (mode_offset(sector, k, i, nu).to_f64() - prev);
        }
    }
    let sum: Complex64 = roots.iter().sum();
    let spread: f64 = roots.iter().map(|a| a.norm()).sum();
    let slope = model.g * raise;
    (Complex64::new(e, 0.0) - sum * slope, e.abs() + spread * slope.abs())
}

/// Ascending coefficients of `Π (z − α)`.
pub fn monic_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for a in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (k, ck) in c.iter().enumerate() {
            next[k + 1] += ck;
            next[k] -= ck * a;
        }
        c = next;
    }
    c
}

/// `e_0 … e_n` of the given values.
fn elementary_symmetric(v: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); v.len() + 1];
    e[0] = Complex64::new(1.0, 0.0);
    for (count, x) in v.iter().enumerate() {
        for k in (1..=count + 1).rev() {
            let prev = e[k - 1];
            e[k] += prev * x;
        }
    }
    e
}

fn residuals_with(polys: &[Poly], roots: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = roots.len();
    for a in 0..n {
        for b in 0..a {
            if roots[a] == roots[b] {
                return Err(Error::CoincidentRoots(b, a));
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    for (mu, &alpha) in roots.iter().enumerate() {
        let inv: Vec<Complex64> = roots
            .iter()
            .enumerate()
            .filter(|&(t, _)| t != mu)
            .map(|(_, a)| (alpha - a).inv())
            .collect();
        let e = elementary_symmetric(&inv);
        let mut res = Complex64::new(0.0, 0.0);
        let mut fact = 1.0;
        for (i, p) in polys.iter().enumerate().skip(1) {
            fact *= i as f64;
            let ei = e.get(i - 1).copied().unwrap_or_default();
            res += p.eval_complex(alpha) * fact * ei;
        }
        out.push(res);
    }
    Ok(out)
}

/// Two-sided continued-fraction solve of the tridiagonal system `(H − E)x = 0`,
/// twisted at the largest component of `guess`. Each component is then
/// accurate relative to itself, which the monomial coefficients need.
pub fn refine_tridiagonal(h: &nalgebra::DMatrix<f64>, e: f64, guess: &[f64]) -> Vec<f64> {
    let n = guess.len();
    if n == 1 {
        return vec![1.0f64.copysign(guess[0])];
    }
    let tiny = f64::EPSILON * h.amax().max(f64::MIN_POSITIVE);
    let safe = |x: f64| if x.abs() < tiny { tiny.copysign(x) } else { x };
    let k = guess
        .iter()
        .enumerate()
        .fold((0, -1.0f64), |best, (i, v)| if v.abs() > best.1 { (i, v.abs()) } else { best })
        .0;
    let d = |i: usize| h[(i, i)] - e;
    let b = |i: usize| h[(i, i + 1)];

    let mut x = vec![0.0; n];
    x[k] = 1.0;
    // above the twist: ρ_i = x_i / x_{i−1}
    let mut rho = vec![0.0; n];
    for i in (k + 1..n).rev() {
        let tail = if i + 1 < n { b(i) * rho[i + 1] } else { 0.0 };
        rho[i] = -b(i - 1) / safe(d(i) + tail);
    }
    for i in k + 1..n {
        x[i] = rho[i] * x[i - 1];
    }
    // below the twist: σ_i = x_i / x_{i+1}
    let mut sigma = vec![0.0; n];
    for i in 0..k {
        let head = if i > 0 { b(i - 1) * sigma[i - 1] } else { 0.0 };
        sigma[i] = -b(i) / safe(d(i) + head);
    }
    for i in (0..k).rev() {
        x[i] = sigma[i] * x[i + 1];
    }

    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let dot: f64 = x.iter().zip(guess).map(|(a, b)| a * b).sum();
    let sign = if dot < 0.0 { -1.0 } else { 1.0 };
    let refined: Vec<f64> = x.iter().map(|v| sign * v / norm).collect();
    if refined.iter().all(|v| v.is_finite()) {
        refined
    } else {
        guess.to_vec()
    }
}

/// Roots of eigenstate `eigen_index` of the sector.
pub fn recover_roots(model: &ModelSpec, sector: &SectorLabels, eigen_index: usize) -> Result<BetheState> {
    let ctx = SectorContext::new(model, sector, Tolerances::default())?;
    if eigen_index >= ctx.dim() {
        return Err(Error::InvalidSector(format!(
            "eigen index {eigen_index} out of range for dimension {}",
            ctx.dim()
        )));
    }
    ctx.recover(eigen_index)
}

/// Bethe-equation residuals for the given roots.
pub fn bae_residuals(model: &ModelSpec, sector: &SectorLabels, roots: &[Complex64]) -> Result<Vec<Complex64>> {
    let op = build_hamiltonian_operator(model, sector)?;
    residuals_with(&extract_polynomials(&op), roots)
}

/// Energy from the roots, cross-checked against the top coefficient of `Hψ`.
pub fn energy_from_roots(model: &ModelSpec, sector: &SectorLabels, roots: &[Complex64]) -> Result<f64> {
    if roots.len() != sector.n_max() {
        return Err(Error::InvalidSector(format!(
            "{} roots for a sector with 𝒩 = {}",
            roots.len(),
            sector.n_max()
        )));
    }
    let ctx = SectorContext::new(model, sector, Tolerances::default())?;
    ctx.energy(roots)
}

/// Newton polish of `state` on the Bethe equations. Failures come back flagged and unrefined.
pub fn newton_refine_bae(model: &ModelSpec, sector: &SectorLabels, state: &BetheState) -> Result<BetheState> {
    let ctx = SectorContext::new(model, sector, Tolerances::default())?;
    Ok(ctx.refine(state))
}

/// Options for [`solve_sector`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    pub tol: Tolerances,
    /// Newton-polish states whose scaled residual exceeds `tol.bae`.
    pub refine: bool,
}

/// All eigenstates of a sector, ascending in energy.
pub fn solve_sector(model: &ModelSpec, sector: &SectorLabels, opts: SolveOptions) -> Result<Vec<BetheState>> {
    let ctx = SectorContext::new(model, sector, opts.tol)?;
    let mut states = (0..ctx.dim())
        .map(|i| {
            let s = ctx.recover(i)?;
            Ok(if opts.refine && !s.degenerate_roots && (s.bae_residual > opts.tol.bae || !s.verified) {
                ctx.refine(&s)
            } else {
                s
            })
        })
        .collect::<Result<Vec<_>>>()?;
    states.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(states)
}

/// Solves many sectors, in order, with the given execution mode.
pub fn solve_sectors(
    model: &ModelSpec,
    sectors: &[SectorLabels],
    opts: SolveOptions,
    exec: Exec,
) -> Vec<Result<Vec<BetheState>>> {
    exec.map(sectors, |s| solve_sector(model, s, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::enumerate_sectors;
    use crate::rational::Rational;

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
    fn spin_half_bose_hubbard() {
        // H = g'/4 + g σ_x: E = g'/4 ∓ g with ψ = z ∓ 1.
        let model = bh(0.8, 0.3);
        let sector = &enumerate_sectors(&model, Rational::half(1), 0).unwrap()[0];
        let states = solve_sector(&model, sector, SolveOptions::default()).unwrap();
        assert!((states[0].energy - (0.2 - 0.3)).abs() < 1e-14);
        assert!((states[0].roots[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((states[1].energy - 0.5).abs() < 1e-14);
        assert!((states[1].roots[0] + Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(states.iter().all(|s| s.verified && s.bae_residual < 1e-12));
    }

    #[test]
    fn elementary_symmetric_small() {
        let v = [1.0, 2.0, 3.0].map(|x| Complex64::new(x, 0.0));
        let e: Vec<f64> = elementary_symmetric(&v).iter().map(|z| z.re).collect();
        assert_eq!(e, vec![1.0, 6.0, 11.0, 6.0]);
    }

    #[test]
    fn monic_expansion() {
        let r = [Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.0)];
        let c: Vec<f64> = monic_from_roots(&r).iter().map(|z| z.re).collect();
        assert_eq!(c, vec![-2.0, 1.0, 1.0]);
    }

    #[test]
    fn twisted_refinement_matches_eigenvector() {
        let h = nalgebra::DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.0, 0.5, 2.0, 0.3, 0.0, 0.3, 3.0]);
        let eig = jacobi_eigen(&h, 1e-14).unwrap();
        for k in 0..3 {
            let v = eig.vector(k);
            let r = refine_tridiagonal(&h, eig.values[k], &v);
            for (a, b) in v.iter().zip(&r) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn decoupled_sector_reports_zero_roots() {
        let model = bh(0.8, 0.0);
        let sector = &enumerate_sectors(&model, Rational::integer(1), 0).unwrap()[0];
        let states = solve_sector(&model, sector, SolveOptions::default()).unwrap();
        let counts: Vec<usize> = states.iter().map(|s| s.roots.len()).collect();
        assert_eq!(states.len(), 3);
        assert!(states.iter().all(|s| s.degenerate_roots));
        // E = 0.8 mu^2 with mu = −1 + n
        assert!((states[0].energy).abs() < 1e-15 && counts[0] == 1);
    }

    #[test]
    fn state_json_round_trip() {
        let model = bh(0.8, 0.3);
        let sector = &enumerate_sectors(&model, Rational::half(3), 0).unwrap()[0];
        let s = recover_roots(&model, sector, 1).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: BetheState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
