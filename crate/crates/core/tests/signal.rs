use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sglab::signal::*;

type C = Complex64;

/// Reduced density matrix of particle 1 from the 8-dimensional state
/// (spatial ⊗ spin1 ⊗ spin2), with a spatial basis where
/// `ψ- = (1, 0)` and `ψ+ = (inner, √(1-|inner|²))`.
fn reduced_rho(inner: C, flipped: bool) -> [[C; 2]; 2] {
    let psi_minus = [C::new(1.0, 0.0), C::new(0.0, 0.0)];
    let psi_plus = [inner, C::new((1.0 - inner.norm_sqr()).sqrt(), 0.0)];
    let idx = |s: usize, a: usize, b: usize| s * 4 + a * 2 + b;
    let mut state = [C::default(); 8];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for s in 0..2 {
        // singlet: ↑1 ↓2 ψ-  −  ↓1 ↑2 ψ+, with the flip mapping ↑2 to ↓2
        state[idx(s, 0, 1)] += h * psi_minus[s];
        let second = if flipped { 1 } else { 0 };
        state[idx(s, 1, second)] -= h * psi_plus[s];
    }
    let mut rho = [[C::default(); 2]; 2];
    for a in 0..2 {
        for a2 in 0..2 {
            for s in 0..2 {
                for b in 0..2 {
                    rho[a][a2] += state[idx(s, a, b)] * state[idx(s, a2, b)].conj();
                }
            }
        }
    }
    rho
}

fn trace_with(rho: &[[C; 2]; 2], a: &[[C; 2]; 2]) -> C {
    let mut t = C::default();
    for i in 0..2 {
        for j in 0..2 {
            t += rho[i][j] * a[j][i];
        }
    }
    t
}

fn random_direction(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-3 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

#[test]
fn partial_trace_oracle_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let inner = C::from_polar(rng.random_range(0.0..1.0), rng.random_range(0.0..6.3));
        let n = random_direction(&mut rng);
        let scale = rng.random_range(0.1..3.0);
        let shift = rng.random_range(-1.0..1.0);
        let a = SpinObservable::from_direction(n);
        let m = a.matrix();
        let m = [
            [m[0][0] * scale + shift, m[0][1] * scale],
            [m[1][0] * scale, m[1][1] * scale + shift],
        ];
        let a = SpinObservable::new(m).unwrap();
        let before = trace_with(&reduced_rho(inner, false), &m);
        let after = trace_with(&reduced_rho(inner, true), &m);
        assert!((before.re - expectation_sg(&a)).abs() < 1e-12);
        let traced = expectation_sg_sf_traced(&a, inner).unwrap();
        assert!((after.re - traced).abs() < 1e-12, "{after} vs {traced}");
        let report = delta(&a, inner).unwrap();
        assert!(((after - before).re - report.delta_traced).abs() < 1e-12);
        assert!(report.delta_abs <= inner.norm() * m[0][1].norm() + 1e-12);
    }
}

#[test]
fn direction_sweep_reaches_the_inner_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dirs: Vec<[f64; 3]> = (0..1000).map(|_| random_direction(&mut rng)).collect();
    for modulus in [0.0, 0.05, 0.4, 0.93] {
        let inner = C::from_polar(modulus, 0.7);
        let (best, _) = max_delta_over_directions(inner, &dirs).unwrap().unwrap();
        assert!(best <= modulus + 1e-12);
        assert!((best - modulus).abs() < 1e-3, "{best} vs {modulus}");
    }
}

#[test]
fn diagonal_observables_never_signal() {
    let a = SpinObservable::sigma_z();
    for inner in [C::new(0.3, 0.1), C::new(1.0, 0.0)] {
        assert_eq!(delta(&a, inner).unwrap().delta, C::default());
    }
    let b = SpinObservable::sigma_x();
    assert_eq!(delta(&b, C::default()).unwrap().delta, C::default());
}
