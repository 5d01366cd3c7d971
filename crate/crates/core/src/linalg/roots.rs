use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 200;
const CLUSTER_REL: f64 = 1e-6;

/// All roots of a polynomial together with their quality indicators.
#[derive(Debug, Clone)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    /// Largest backward error `|p(z)| / Σ|c_k||z|^k` over the roots.
    pub residual_bound: f64,
    /// Set when two roots are closer than `1e-6` relative to their magnitude.
    pub clustered: bool,
    pub iterations: usize,
}

/// `p(z)/p'(z)` and the backward error at `z`; evaluates the reversed
/// polynomial when `|z| > 1` so large roots do not overflow.
fn newton_ratio(c: &[f64], z: Complex64) -> (Complex64, f64) {
    let n = c.len() - 1;
    let zero = Complex64::new(0.0, 0.0);
    if z.norm() <= 1.0 {
        let (mut p, mut dp) = (zero, zero);
        let mut bound = 0.0;
        let r = z.norm();
        for &ck in c.iter().rev() {
            dp = dp * z + p;
            p = p * z + ck;
            bound = bound * r + ck.abs();
        }
        (p / dp, p.norm() / bound)
    } else {
        let y = z.inv();
        let r = y.norm();
        let (mut q, mut dq) = (zero, zero);
        let mut bound = 0.0;
        for &ck in c.iter() {
            dq = dq * y + q;
            q = q * y + ck;
            bound = bound * r + ck.abs();
        }
        let denom = q * n as f64 - y * dq;
        (z * q / denom, q.norm() / bound)
    }
}

/// Initial guesses on circles whose radii come from the upper convex hull of
/// `(k, ln|c_k|)`, one circle per hull edge.
fn initial_guesses(c: &[f64]) -> Vec<Complex64> {
    let pts: Vec<(usize, f64)> = c
        .iter()
        .enumerate()
        .filter(|(_, x)| **x != 0.0)
        .map(|(k, x)| (k, x.abs().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as f64 - a.0 as f64) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut out = Vec::with_capacity(c.len() - 1);
    for (seg, w) in hull.windows(2).enumerate() {
        let count = w[1].0 - w[0].0;
        let radius = ((w[0].1 - w[1].1) / count as f64).exp();
        for i in 0..count {
            let angle = 2.0 * std::f64::consts::PI * i as f64 / count as f64 + 0.7 + 0.3 * seg as f64;
            out.push(Complex64::from_polar(radius, angle));
        }
    }
    out
}

/// Aberth–Ehrlich simultaneous iteration. `coeffs[k]` multiplies `z^k`.
pub fn polynomial_roots(coeffs: &[f64], tol: f64) -> Result<RootSet> {
    let top = coeffs.iter().rposition(|&c| c != 0.0).ok_or(Error::ZeroPolynomial)?;
    let low = coeffs.iter().position(|&c| c != 0.0).unwrap_or(0);
    let c = &coeffs[low..=top];
    let mut roots = vec![Complex64::new(0.0, 0.0); low];
    let n = c.len() - 1;
    if n == 0 {
        return Ok(finish(roots, 0.0, 0));
    }

    let mut z = initial_guesses(c);
    let mut done = vec![false; n];
    let mut backward = vec![0.0; n];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS && !done.iter().all(|&d| d) {
        iterations += 1;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (ratio, berr) = newton_ratio(c, z[i]);
            backward[i] = berr;
            if berr <= 4.0 * f64::EPSILON || !ratio.is_finite() {
                done[i] = berr.is_finite();
                continue;
            }
            let repulsion: Complex64 = (0..n)
                .filter(|&k| k != i)
                .map(|k| (z[i] - z[k]).inv())
                .filter(|x| x.is_finite())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                continue;
            }
            z[i] -= step;
            if step.norm() <= tol * z[i].norm() {
                done[i] = true;
                backward[i] = newton_ratio(c, z[i]).1;
            }
        }
    }
    if !done.iter().all(|&d| d) {
        return Err(Error::NoConvergence {
            method: "aberth",
            iterations,
        });
    }
    conjugate_symmetrize(c, &mut z);
    roots.extend(z);
    let bound = backward.iter().fold(0.0f64, |m, &b| m.max(b));
    Ok(finish(roots, bound, iterations))
}

/// Roots of a real polynomial come in conjugate pairs. Each root in the upper
/// half plane is paired with the lower-half root nearest its conjugate, when
/// that one is closer than the real axis, and the pair is replaced by the
/// symmetric average. Roots left without a partner are real: they are
/// projected onto the axis and polished by real Newton steps.
fn conjugate_symmetrize(c: &[f64], z: &mut [Complex64]) {
    let n = z.len();
    let mut used = vec![false; n];
    let mut order: Vec<usize> = (0..n).filter(|&i| z[i].im > 0.0).collect();
    order.sort_by(|&a, &b| z[b].im.total_cmp(&z[a].im));
    for i in order {
        let target = z[i].conj();
        let partner = (0..n)
            .filter(|&k| k != i && !used[k] && z[k].im < 0.0)
            .min_by(|&a, &b| (z[a] - target).norm().total_cmp(&(z[b] - target).norm()));
        if let Some(k) = partner {
            if (z[k] - target).norm() < z[i].im {
                let mid = (z[i] + z[k].conj()) * 0.5;
                z[i] = mid;
                z[k] = mid.conj();
                used[i] = true;
                used[k] = true;
            }
        }
    }
    for i in (0..n).filter(|&i| !used[i]) {
        let mut x = Complex64::new(z[i].re, 0.0);
        let mut berr = newton_ratio(c, x).1;
        for _ in 0..3 {
            let (ratio, _) = newton_ratio(c, x);
            let next = Complex64::new(x.re - ratio.re, 0.0);
            let next_err = newton_ratio(c, next).1;
            if !next_err.is_finite() || next_err >= berr {
                break;
            }
            x = next;
            berr = next_err;
        }
        z[i] = x;
    }
}

fn finish(roots: Vec<Complex64>, residual_bound: f64, iterations: usize) -> RootSet {
    let mut clustered = false;
    for i in 0..roots.len() {
        for k in (i + 1)..roots.len() {
            let scale = roots[i].norm().max(roots[k].norm());
            if (roots[i] - roots[k]).norm() <= CLUSTER_REL * scale {
                clustered = true;
            }
        }
    }
    RootSet {
        roots,
        residual_bound,
        clustered,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Coefficients of Π (z − ρ_k), real ρ only.
    fn from_roots(rho: &[f64]) -> Vec<f64> {
        let mut c = vec![1.0];
        for &r in rho {
            let mut next = vec![0.0; c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= r * ck;
            }
            c = next;
        }
        c
    }

    fn sorted_re(rs: &RootSet) -> Vec<f64> {
        let mut v: Vec<f64> = rs.roots.iter().map(|z| z.re).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn simple_quadratic() {
        let rs = polynomial_roots(&[-1.0, 0.0, 1.0], 1e-10).unwrap();
        let v = sorted_re(&rs);
        assert!((v[0] + 1.0).abs() < 1e-14 && (v[1] - 1.0).abs() < 1e-14);
        assert!(!rs.clustered);
    }

    #[test]
    fn double_root_is_flagged() {
        let rs = polynomial_roots(&[1.0, -2.0, 1.0], 1e-10).unwrap();
        for z in &rs.roots {
            assert!((z - 1.0).norm() < 1e-7);
        }
        assert!(rs.clustered);
    }

    #[test]
    fn complex_pairs_are_exact_conjugates() {
        // (z² + 1)(z² − 2z + 5)(z − 3)
        let c = [-15.0, 11.0, -20.0, 12.0, -5.0, 1.0];
        let rs = polynomial_roots(&c, 1e-12).unwrap();
        let sum: Complex64 = rs.roots.iter().sum();
        assert!(sum.im.abs() < 1e-14);
        assert!((sum.re - 5.0).abs() < 1e-12);
    }

    #[test]
    fn zero_polynomial_errors() {
        assert_eq!(polynomial_roots(&[0.0, 0.0], 1e-10).unwrap_err(), Error::ZeroPolynomial);
    }

    #[test]
    fn leading_zero_roots() {
        let rs = polynomial_roots(&[0.0, 0.0, 1.0], 1e-10).unwrap();
        assert_eq!(rs.roots, vec![Complex64::new(0.0, 0.0); 2]);
        assert!(rs.clustered);
    }

    #[test]
    fn recovers_random_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mut rho: Vec<f64> = (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let c = from_roots(&rho);
            let rs = polynomial_roots(&c, 1e-12).unwrap();
            rho.sort_by(f64::total_cmp);
            for (x, y) in sorted_re(&rs).iter().zip(&rho) {
                assert!((x - y).abs() < 1e-9, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn widely_graded_roots() {
        let rho = [1e-6, 1e-2, 3.0, 4e3, 5e7, -2e10];
        let c = from_roots(&rho);
        let rs = polynomial_roots(&c, 1e-12).unwrap();
        let mut want = rho.to_vec();
        want.sort_by(f64::total_cmp);
        for (x, y) in sorted_re(&rs).iter().zip(&want) {
            assert!(((x - y) / y).abs() < 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn vieta_relations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for deg in 1..=12 {
            let c: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let rs = polynomial_roots(&c, 1e-12).unwrap();
            let sum: Complex64 = rs.roots.iter().sum();
            let prod: Complex64 = rs.roots.iter().product();
            let want_sum = -c[deg - 1] / c[deg];
            let want_prod = if deg % 2 == 0 { c[0] / c[deg] } else { -c[0] / c[deg] };
            assert!((sum - want_sum).norm() <= 1e-8 * want_sum.abs().max(1.0), "deg {deg}");
            assert!((prod - want_prod).norm() <= 1e-8 * want_prod.abs().max(1.0), "deg {deg}");
        }
    }
}
