use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinboson::bethe::SolveOptions;
use spinboson::linalg::jacobi_eigen;
use spinboson::{enumerate_sectors, fock_oracle, solve_sector, ModelSpec, Rational};

fn coupling(rng: &mut ChaCha8Rng) -> f64 {
    let x: f64 = rng.gen_range(0.1..2.0);
    if rng.gen_bool(0.5) {
        x
    } else {
        -x
    }
}

fn random_model(rng: &mut ChaCha8Rng, m: usize, r: u32, s: u32, kmax: u32) -> ModelSpec {
    ModelSpec {
        m,
        r,
        s,
        k: (0..m).map(|_| rng.gen_range(1..=kmax)).collect(),
        w: (0..m).map(|_| coupling(rng)).collect(),
        g_prime: coupling(rng),
        g: coupling(rng),
        constant_shift: 0.0,
        casimir_weight: 0.0,
    }
}

fn close(a: f64, b: f64, scale: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * scale.max(a.abs()).max(b.abs())
}

/// Every enumerated sector matches its Fock block and its own diagonalization.
fn check_model(model: &ModelSpec, j: Rational, total: u64) -> (usize, f64) {
    let sectors = enumerate_sectors(model, j, total).unwrap();
    let cap = sectors.iter().map(|s| s.max_bosons(model)).max().unwrap_or(0);
    let blocks = fock_oracle(model, j, cap);
    let mut worst_bae = 0.0f64;
    for sector in &sectors {
        let first = sector.reference_at(model, 0);
        let block = blocks
            .iter()
            .find(|b| b.basis[0] == first)
            .unwrap_or_else(|| panic!("no Fock block for {sector}"));
        assert_eq!(block.basis.len(), sector.dim, "dimension of {sector}");
        let fock = jacobi_eigen(&block.h, 1e-14).unwrap().values;
        let scale = fock.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        let states = solve_sector(model, sector, SolveOptions::default()).unwrap();
        for (s, e) in states.iter().zip(&fock) {
            assert!(close(s.energy, *e, scale, 1e-8), "{sector}: {} vs {e}", s.energy);
            assert!(close(s.eigenvalue, *e, scale, 1e-10));
            assert!(s.verified, "{sector} state {} not verified", s.index);
            if !s.degenerate_roots {
                worst_bae = worst_bae.max(s.bae_residual);
            }
        }
    }
    (sectors.len(), worst_bae)
}

#[test]
fn random_models_match_fock_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..40 {
        let m = rng.gen_range(0..=3);
        let r = rng.gen_range(1..=3);
        let s = rng.gen_range(1..=3);
        let model = random_model(&mut rng, m, r, s, 3);
        let j = Rational::half(rng.gen_range(0..=8));
        let (_, bae) = check_model(&model, j, 2);
        worst = worst.max(bae);
    }
    assert!(worst < 1e-6, "worst scaled BAE residual {worst:e}");
}

#[test]
fn large_spin_models_match() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (m, r, s) in [(0, 1, 2), (0, 2, 1), (0, 2, 2), (1, 1, 1), (2, 1, 1)] {
        for _ in 0..3 {
            let model = random_model(&mut rng, m, r, s, 1);
            let (_, bae) = check_model(&model, Rational::integer(6), 3);
            assert!(bae < 1e-6, "({m},{r},{s}) residual {bae:e}");
        }
    }
}
