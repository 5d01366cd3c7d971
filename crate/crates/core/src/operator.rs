//! Normal-ordered differential operators `Σ_d P_d(z) (d/dz)^d` with polynomial
//! coefficients, and the single-variable realization of the Hamiltonian on a sector.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{ModelSpec, SectorLabels};
use crate::rational::Rational;

/// Dense real polynomial, `coeffs[k]` multiplies `z^k`. Exact trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// `c · z^deg`
    pub fn monomial(c: f64, deg: usize) -> Self {
        let mut v = vec![0.0; deg + 1];
        v[deg] = c;
        Poly::new(v)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `Σ |c_k| R^k`, an upper bound for `max_{|z| ≤ R} |P(z)|`.
    pub fn abs_bound(&self, radius: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * radius + c.abs())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn scale(&self, c: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|x| x * c).collect())
    }
}

/// `n! / (n − t)!`
fn falling(n: usize, t: usize) -> f64 {
    (0..t).map(|i| (n - i) as f64).product()
}

fn binomial(n: usize, t: usize) -> f64 {
    falling(n, t) / falling(t, t)
}

/// A differential operator in normal form, all derivatives to the right.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EulerOperator {
    terms: BTreeMap<usize, Poly>,
}

impl EulerOperator {
    pub fn zero() -> Self {
        EulerOperator::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (usize, Poly)>) -> Self {
        let mut op = EulerOperator::zero();
        for (d, p) in terms {
            op.add_term(d, &p);
        }
        op
    }

    pub fn constant(c: f64) -> Self {
        EulerOperator::from_terms([(0, Poly::constant(c))])
    }

    pub fn identity() -> Self {
        EulerOperator::constant(1.0)
    }

    /// Multiplication by `z`.
    pub fn z() -> Self {
        EulerOperator::from_terms([(0, Poly::monomial(1.0, 1))])
    }

    /// `d/dz`
    pub fn d() -> Self {
        EulerOperator::from_terms([(1, Poly::constant(1.0))])
    }

    /// `c0 + c1 · z d/dz`
    pub fn euler_affine(c0: f64, c1: f64) -> Self {
        EulerOperator::from_terms([(0, Poly::constant(c0)), (1, Poly::monomial(c1, 1))])
    }

    fn add_term(&mut self, d: usize, p: &Poly) {
        let sum = match self.terms.get(&d) {
            Some(existing) => existing.add(p),
            None => p.clone(),
        };
        if sum.is_zero() {
            self.terms.remove(&d);
        } else {
            self.terms.insert(d, sum);
        }
    }

    pub fn coefficient(&self, d: usize) -> Poly {
        self.terms.get(&d).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &Poly)> {
        self.terms.iter().map(|(&d, p)| (d, p))
    }

    /// Highest derivative order with a nonzero coefficient.
    pub fn order(&self) -> usize {
        self.terms.keys().next_back().copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |m, p| m.max(p.max_abs()))
    }

    pub fn add(&self, other: &EulerOperator) -> EulerOperator {
        let mut out = self.clone();
        for (&d, p) in &other.terms {
            out.add_term(d, p);
        }
        out
    }

    pub fn scale(&self, c: f64) -> EulerOperator {
        EulerOperator::from_terms(self.terms.iter().map(|(&d, p)| (d, p.scale(c))))
    }

    /// Normally ordered product `self ∘ other`, via
    /// `z^a D^d ∘ z^b D^e = Σ_t C(d,t) b!/(b−t)! z^{a+b−t} D^{d+e−t}`.
    pub fn compose(&self, other: &EulerOperator) -> EulerOperator {
        let mut out = EulerOperator::zero();
        for (&d, pa) in &self.terms {
            for (&e, pb) in &other.terms {
                for (a, &ca) in pa.coeffs.iter().enumerate() {
                    if ca == 0.0 {
                        continue;
                    }
                    for (b, &cb) in pb.coeffs.iter().enumerate() {
                        if cb == 0.0 {
                            continue;
                        }
                        for t in 0..=d.min(b) {
                            let c = ca * cb * binomial(d, t) * falling(b, t);
                            out.add_term(d + e - t, &Poly::monomial(c, a + b - t));
                        }
                    }
                }
            }
        }
        out
    }

    /// Left division by `z`. Fails if any coefficient has a `z^0` part larger than `tol`.
    pub fn div_z(&self, tol: f64) -> Result<EulerOperator> {
        let remainder = self.terms.values().fold(0.0f64, |m, p| m.max(p.coeff(0).abs()));
        if remainder > tol {
            return Err(Error::SingularLowering(remainder));
        }
        Ok(EulerOperator::from_terms(self.terms.iter().map(|(&d, p)| {
            let c = p.coeffs.get(1..).map(|s| s.to_vec()).unwrap_or_default();
            (d, Poly::new(c))
        })))
    }

    /// Applies the operator to a polynomial given by its coefficients.
    pub fn apply(&self, psi: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for (&d, p) in &self.terms {
            for (n, &c) in psi.iter().enumerate() {
                if n < d || c == 0.0 {
                    continue;
                }
                let f = c * falling(n, d);
                for (a, &pa) in p.coeffs.iter().enumerate() {
                    let deg = a + n - d;
                    if out.len() <= deg {
                        out.resize(deg + 1, 0.0);
                    }
                    out[deg] += pa * f;
                }
            }
        }
        out
    }

    /// `(N+2) × (N+1)` matrix whose column `n` holds `H z^n` in the basis `z^0 … z^{N+1}`.
    /// Degrees beyond `N+1` are dropped; see [`EulerOperator::max_raise`].
    pub fn apply_to_monomials(&self, n_max: usize) -> DMatrix<f64> {
        self.monomial_matrix(n_max, false)
    }

    /// Same as [`apply_to_monomials`](Self::apply_to_monomials) with every
    /// coefficient replaced by its absolute value; a magnitude scale for cancellations.
    pub fn apply_to_monomials_abs(&self, n_max: usize) -> DMatrix<f64> {
        self.monomial_matrix(n_max, true)
    }

    fn monomial_matrix(&self, n_max: usize, abs: bool) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(n_max + 2, n_max + 1);
        for (&d, p) in &self.terms {
            for n in d..=n_max {
                let f = falling(n, d);
                for (a, &pa) in p.coeffs.iter().enumerate() {
                    let deg = a + n - d;
                    if deg <= n_max + 1 {
                        out[(deg, n)] += if abs { pa.abs() * f } else { pa * f };
                    }
                }
            }
        }
        out
    }

    /// Largest `deg P_d − d`, i.e. how far the operator can raise monomial degree.
    pub fn max_raise(&self) -> Option<i64> {
        self.terms
            .iter()
            .filter_map(|(&d, p)| p.degree().map(|deg| deg as i64 - d as i64))
            .max()
    }

    /// Coefficient-wise comparison relative to the larger operator's max coefficient.
    pub fn approx_eq(&self, other: &EulerOperator, rel: f64) -> bool {
        self.max_deviation(other) <= rel * self.max_abs().max(other.max_abs()).max(f64::MIN_POSITIVE)
    }

    pub fn max_deviation(&self, other: &EulerOperator) -> f64 {
        self.add(&other.scale(-1.0)).max_abs()
    }
}

impl Serialize for EulerOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.terms.len()))?;
        for (d, p) in &self.terms {
            map.serialize_entry(&format!("order_{d}"), p.coeffs())?;
        }
        map.end()
    }
}

/// `[P_0, …, P_𝓜]` for `𝓜 = operator order`.
pub fn extract_polynomials(h: &EulerOperator) -> Vec<Poly> {
    (0..=h.order()).map(|d| h.coefficient(d)).collect()
}

fn product(factors: impl IntoIterator<Item = EulerOperator>) -> EulerOperator {
    factors
        .into_iter()
        .fold(EulerOperator::identity(), |acc, f| acc.compose(&f))
}

/// Constant `A_i + q_i − ((ν−1)k_i + 1)/k_i²` appearing in the mode factors.
pub(crate) fn mode_offset(sector: &SectorLabels, k: u32, i: usize, nu: u32) -> Rational {
    let k = k as i64;
    sector.a[i] + sector.q[i] - Rational::new((nu as i64 - 1) * k + 1, k * k)
}

/// Constant part of `N_i` in the realization: `(M+1)/M κ − (p−j)/r + Σ_{μ≥i} l_μ − (1/M) Σ μ l_μ`.
pub(crate) fn number_offset(model: &ModelSpec, sector: &SectorLabels, i: usize) -> Rational {
    let m = model.m as i64;
    let weighted: Rational = sector
        .l
        .iter()
        .enumerate()
        .map(|(mu, &l)| l * (mu as i64 + 1))
        .sum();
    let tail: Rational = sector.l[i..].iter().copied().sum();
    sector.kappa * (m + 1) / m - Rational::new(2 * sector.p as i64, 2 * model.r as i64)
        + sector.j / model.r as i64
        + tail
        - weighted / m
}

/// The Hamiltonian realized as a differential operator on the sector's monomial space.
pub fn build_hamiltonian_operator(model: &ModelSpec, sector: &SectorLabels) -> Result<EulerOperator> {
    if sector.q.len() != model.m || sector.a.len() != model.m {
        return Err(Error::InvalidSector(format!(
            "sector carries {} mode labels, model has M = {}",
            sector.q.len(),
            model.m
        )));
    }
    let r = model.r as f64;
    let p = sector.p as f64;
    let j = sector.j.to_f64();

    // Σ w_i N_i
    let mut h = EulerOperator::zero();
    for i in 0..model.m {
        let k = model.k[i] as f64;
        let c = number_offset(model, sector, i).to_f64();
        let n_i = EulerOperator::euler_affine(k * c - 1.0 / k, -k);
        h = h.add(&n_i.scale(model.w[i]));
    }

    // g' (r zD − j + p)^s
    let spin = EulerOperator::euler_affine(p - j, r);
    h = h.add(&product((0..model.s).map(|_| spin.clone())).scale(model.g_prime));

    if model.g != 0.0 {
        // g z^{-1} Π_i (r zD + p − i + 1)
        let lowering = product((1..=model.r).map(|i| EulerOperator::euler_affine(p - i as f64 + 1.0, r)));
        let tol = 1e-12 * lowering.max_abs().max(1.0);
        h = h.add(&lowering.div_z(tol)?.scale(model.g));

        // g z Π_i (2j − p − i + 1 − r zD) Π_i Π_ν k_i (A_i + q_i − ((ν−1)k_i+1)/k_i² − zD)
        let spin_part = (1..=model.r).map(|i| EulerOperator::euler_affine(2.0 * j - p - i as f64 + 1.0, -r));
        let mode_part = (0..model.m).flat_map(|i| {
            let k = model.k[i];
            (1..=k).map(move |nu| {
                let c = mode_offset(sector, k, i, nu).to_f64();
                EulerOperator::euler_affine(k as f64 * c, -(k as f64))
            })
        });
        let raising = EulerOperator::z().compose(&product(spin_part.chain(mode_part)));
        h = h.add(&raising.scale(model.g));
    }

    let shift = model.shift_for(sector.j);
    if shift != 0.0 {
        h = h.add(&EulerOperator::constant(shift));
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_pow_d(a: usize, d: usize) -> EulerOperator {
        EulerOperator::from_terms([(d, Poly::monomial(1.0, a))])
    }

    #[test]
    fn compose_examples() {
        let d = EulerOperator::d();
        let z = EulerOperator::z();
        let zd = EulerOperator::euler_affine(0.0, 1.0);
        assert_eq!(d.compose(&z), EulerOperator::from_terms([(1, Poly::monomial(1.0, 1)), (0, Poly::constant(1.0))]));
        assert_eq!(zd.compose(&zd), z_pow_d(2, 2).add(&z_pow_d(1, 1)));
        assert_eq!(
            z_pow_d(2, 2).compose(&zd),
            z_pow_d(3, 3).add(&z_pow_d(2, 2).scale(2.0))
        );
    }

    #[test]
    fn add_and_scale() {
        let zd = EulerOperator::euler_affine(0.0, 1.0);
        assert!(zd.add(&zd.scale(-1.0)).is_zero());
        assert!(zd.compose(&zd).scale(0.0).is_zero());
        let ident = EulerOperator::d()
            .compose(&EulerOperator::z())
            .add(&zd.scale(-1.0));
        assert_eq!(ident, EulerOperator::identity());
    }

    #[test]
    fn extract_and_monomials() {
        let zd = EulerOperator::euler_affine(0.0, 1.0);
        let ps = extract_polynomials(&zd);
        assert_eq!(ps, vec![Poly::zero(), Poly::monomial(1.0, 1)]);
        let rebuilt = EulerOperator::from_terms(ps.iter().cloned().enumerate());
        assert_eq!(extract_polynomials(&rebuilt), ps);

        let m = zd.apply_to_monomials(2);
        assert_eq!(m.shape(), (4, 3));
        for n in 0..3 {
            for row in 0..4 {
                let expect = if row == n { n as f64 } else { 0.0 };
                assert_eq!(m[(row, n)], expect);
            }
        }
    }

    #[test]
    fn div_z_rejects_remainder() {
        let op = EulerOperator::euler_affine(1.0, 1.0);
        assert!(matches!(op.div_z(1e-12), Err(Error::SingularLowering(_))));
        let ok = EulerOperator::euler_affine(0.0, 3.0).div_z(1e-12).unwrap();
        assert_eq!(ok, EulerOperator::d().scale(3.0));
    }

    #[test]
    fn json_snapshot_shape() {
        let op = EulerOperator::euler_affine(2.0, 1.0);
        assert_eq!(
            serde_json::to_string(&op).unwrap(),
            r#"{"order_0":[2.0],"order_1":[0.0,1.0]}"#
        );
    }

    #[test]
    fn poly_eval_and_bounds() {
        let p = Poly::new(vec![1.0, -2.0, 3.0, 0.0]);
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.eval(2.0), 9.0);
        assert_eq!(p.abs_bound(1.0), 6.0);
        assert_eq!(p.eval_complex(Complex64::new(0.0, 1.0)), Complex64::new(-2.0, -2.0));
    }
}
