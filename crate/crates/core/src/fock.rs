//! Direct second-quantized construction of the Hamiltonian on a truncated
//! spin ⊗ Fock space, split into blocks connected by the coupling term.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::model::{boson_vectors, spin_projections, ModelSpec, ReferenceState};
use crate::rational::Rational;

/// One connected block of the truncated Fock-space Hamiltonian.
#[derive(Debug, Clone)]
pub struct FockBlock {
    /// Basis states in ascending `mu`.
    pub basis: Vec<ReferenceState>,
    pub h: DMatrix<f64>,
    pub kappa: Rational,
    pub l: Vec<Rational>,
    /// True iff the coupling term maps every block state back inside the cap.
    pub complete: bool,
}

/// `Q_0^{(i)} = (n_i + 1/k_i)/k_i` for each mode.
fn occupations(model: &ModelSpec, n: &[u64]) -> Vec<Rational> {
    n.iter()
        .zip(&model.k)
        .map(|(&ni, &k)| (Rational::integer(ni as i64) + Rational::new(1, k as i64)) / k as i64)
        .collect()
}

/// Eigenvalues of `𝒦` and `ℒ_μ` on a product state.
pub fn charges(model: &ModelSpec, state: &ReferenceState) -> (Rational, Vec<Rational>) {
    let occ = occupations(model, &state.n_bosons);
    let m = model.m as i64;
    let kappa = (state.mu / model.r as i64 * m + occ.iter().copied().sum::<Rational>()) / (m + 1);
    let l = occ.windows(2).map(|w| w[0] - w[1]).collect();
    (kappa, l)
}

/// `⟨mu + r| J_+^r |mu⟩` for spin `j`.
fn spin_raise(j: f64, mu: f64, r: u32) -> f64 {
    (0..r)
        .map(|t| {
            let m = mu + t as f64;
            ((j - m) * (j + m + 1.0)).max(0.0).sqrt()
        })
        .product()
}

/// `⟨n − k| a^k |n⟩ = √(n!/(n−k)!)`
fn boson_lower(n: u64, k: u32) -> f64 {
    (0..k as u64).map(|t| ((n - t) as f64).sqrt()).product()
}

struct Space<'a> {
    model: &'a ModelSpec,
    j: Rational,
    cap: u64,
    states: Vec<ReferenceState>,
    index: HashMap<ReferenceState, usize>,
}

impl<'a> Space<'a> {
    fn new(model: &'a ModelSpec, j: Rational, cap: u64) -> Self {
        let mut states = Vec::new();
        let vectors = per_mode_vectors(model.m, cap);
        for mu in spin_projections(j) {
            for n in &vectors {
                states.push(ReferenceState {
                    mu,
                    n_bosons: n.clone(),
                });
            }
        }
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Space {
            model,
            j,
            cap,
            states,
            index,
        }
    }

    /// Target of `J_+^r Π a_i^{k_i}`, if it exists.
    fn raised(&self, s: &ReferenceState) -> Option<(ReferenceState, f64)> {
        let mu = s.mu + self.model.r as i64;
        if mu > self.j {
            return None;
        }
        let mut n = s.n_bosons.clone();
        let mut amp = spin_raise(self.j.to_f64(), s.mu.to_f64(), self.model.r);
        for (i, ni) in n.iter_mut().enumerate() {
            let k = self.model.k[i];
            if *ni < k as u64 {
                return None;
            }
            amp *= boson_lower(*ni, k);
            *ni -= k as u64;
        }
        Some((ReferenceState { mu, n_bosons: n }, amp))
    }

    /// Target of `J_-^r Π a_i^{†k_i}` ignoring the cap.
    fn lowered(&self, s: &ReferenceState) -> Option<ReferenceState> {
        let mu = s.mu - self.model.r as i64;
        if mu < -self.j {
            return None;
        }
        let n = s
            .n_bosons
            .iter()
            .zip(&self.model.k)
            .map(|(&ni, &k)| ni + k as u64)
            .collect();
        Some(ReferenceState { mu, n_bosons: n })
    }

    fn diagonal(&self, s: &ReferenceState) -> f64 {
        let bosons: f64 = s
            .n_bosons
            .iter()
            .zip(&self.model.w)
            .map(|(&n, &w)| w * n as f64)
            .sum();
        bosons + self.model.g_prime * s.mu.to_f64().powi(self.model.s as i32) + self.model.shift_for(self.j)
    }
}

fn per_mode_vectors(m: usize, cap: u64) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=cap).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Every block of the truncated space, complete or not.
pub fn fock_blocks(model: &ModelSpec, j: Rational, boson_cap: u64) -> Vec<FockBlock> {
    let space = Space::new(model, j, boson_cap);
    let n = space.states.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut leaks = vec![false; n];
    for (i, s) in space.states.iter().enumerate() {
        if let Some((t, _)) = space.raised(s) {
            let ti = space.index[&t];
            let (a, b) = (find(&mut parent, i), find(&mut parent, ti));
            parent[a] = b;
        }
        if let Some(t) = space.lowered(s) {
            if t.n_bosons.iter().any(|&x| x > space.cap) {
                leaks[i] = true;
            }
        }
    }

    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }

    let mut blocks: Vec<FockBlock> = groups
        .into_values()
        .map(|mut members| {
            members.sort_by(|&a, &b| space.states[a].mu.cmp(&space.states[b].mu));
            let basis: Vec<ReferenceState> = members.iter().map(|&i| space.states[i].clone()).collect();
            let local: HashMap<&ReferenceState, usize> =
                basis.iter().enumerate().map(|(i, s)| (s, i)).collect();
            let dim = basis.len();
            let mut h = DMatrix::zeros(dim, dim);
            for (a, s) in basis.iter().enumerate() {
                h[(a, a)] = space.diagonal(s);
                if let Some((t, amp)) = space.raised(s) {
                    let b = local[&t];
                    h[(b, a)] += model.g * amp;
                    h[(a, b)] += model.g * amp;
                }
            }
            let (kappa, l) = charges(model, &basis[0]);
            debug_assert!(basis.iter().all(|s| charges(model, s) == (kappa, l.clone())));
            FockBlock {
                complete: !members.iter().any(|&i| leaks[i]),
                basis,
                h,
                kappa,
                l,
            }
        })
        .collect();
    blocks.sort_by(|a, b| {
        (a.kappa, &a.l, &a.basis[0].mu, &a.basis[0].n_bosons)
            .cmp(&(b.kappa, &b.l, &b.basis[0].mu, &b.basis[0].n_bosons))
    });
    blocks
}

/// Complete blocks of `H` on `span{|j,mu⟩ ⊗ |n⟩ : n_i ≤ boson_cap}`.
pub fn fock_oracle(model: &ModelSpec, j: Rational, boson_cap: u64) -> Vec<FockBlock> {
    fock_blocks(model, j, boson_cap)
        .into_iter()
        .filter(|b| b.complete)
        .collect()
}

/// Frobenius norms of `[H, 𝒦]` and `[H, ℒ_μ]` on the whole truncated space.
pub fn charge_commutators(model: &ModelSpec, j: Rational, boson_cap: u64) -> (f64, Vec<f64>) {
    let space = Space::new(model, j, boson_cap);
    let mut kappa_sq = 0.0;
    let mut l_sq = vec![0.0; model.m.saturating_sub(1)];
    for s in &space.states {
        if let Some((t, amp)) = space.raised(s) {
            let h = model.g * amp;
            let (ks, ls) = charges(model, s);
            let (kt, lt) = charges(model, &t);
            // both H_ts and H_st contribute
            kappa_sq += 2.0 * (h * (kt - ks).to_f64()).powi(2);
            for (acc, (a, b)) in l_sq.iter_mut().zip(ls.iter().zip(&lt)) {
                *acc += 2.0 * (h * (*b - *a).to_f64()).powi(2);
            }
        }
    }
    (kappa_sq.sqrt(), l_sq.into_iter().map(f64::sqrt).collect())
}

/// Total-boson enumeration re-exported for oracle sizing.
pub fn reference_states(m: usize, j: Rational, max_total_bosons: u64) -> Vec<ReferenceState> {
    let mut out = Vec::new();
    for n in boson_vectors(m, max_total_bosons) {
        for mu in spin_projections(j) {
            out.push(ReferenceState {
                mu,
                n_bosons: n.clone(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tc(g: f64) -> ModelSpec {
        ModelSpec {
            m: 1,
            r: 1,
            s: 1,
            k: vec![1],
            w: vec![1.3],
            g_prime: 0.7,
            g,
            constant_shift: 0.0,
            casimir_weight: 0.0,
        }
    }

    #[test]
    fn decoupled_blocks_are_diagonal() {
        let model = ModelSpec {
            m: 2,
            r: 1,
            s: 3,
            k: vec![1, 2],
            w: vec![0.5, 1.5],
            g_prime: 0.3,
            g: 0.0,
            constant_shift: 0.0,
            casimir_weight: 0.0,
        };
        let j = Rational::half(3);
        for b in fock_blocks(&model, j, 3) {
            for (a, s) in b.basis.iter().enumerate() {
                let mu = s.mu.to_f64();
                let want = 0.5 * s.n_bosons[0] as f64 + 1.5 * s.n_bosons[1] as f64 + 0.3 * mu * mu * mu;
                assert!((b.h[(a, a)] - want).abs() < 1e-14);
            }
            let mut off = b.h.clone();
            off.fill_diagonal(0.0);
            assert_eq!(off.amax(), 0.0);
        }
    }

    #[test]
    fn tc_doublet_block() {
        let model = tc(0.2);
        let blocks = fock_oracle(&model, Rational::half(1), 3);
        let b = blocks
            .iter()
            .find(|b| b.kappa == Rational::new(3, 4))
            .expect("κ = 3/4 block");
        assert_eq!(b.basis.len(), 2);
        assert_eq!(b.basis[0].n_bosons, vec![1]);
        let want = DMatrix::from_row_slice(2, 2, &[1.3 - 0.35, 0.2, 0.2, 0.35]);
        assert!((&b.h - want).amax() < 1e-15);
        // κ = 9/4 lowers into n = 4, over the cap
        assert!(blocks.iter().any(|b| b.kappa == Rational::new(7, 4)));
        assert!(blocks.iter().all(|b| b.kappa < Rational::new(9, 4)));
    }

    #[test]
    fn charges_commute_with_h() {
        let model = ModelSpec {
            m: 2,
            r: 2,
            s: 2,
            k: vec![1, 2],
            w: vec![0.5, 1.5],
            g_prime: 0.3,
            g: 0.7,
            constant_shift: 0.0,
            casimir_weight: 0.0,
        };
        let (k, l) = charge_commutators(&model, Rational::integer(2), 5);
        assert!(k < 1e-10);
        assert!(l.iter().all(|&x| x < 1e-10));
    }

    #[test]
    fn blocks_partition_the_space() {
        let model = tc(0.4);
        let j = Rational::integer(1);
        let total: usize = fock_blocks(&model, j, 4).iter().map(|b| b.basis.len()).sum();
        assert_eq!(total, 3 * 5);
    }
}
