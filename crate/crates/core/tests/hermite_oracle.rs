//! Hermite functions against exact rational evaluation of `H_n`.

use grin_coherence::hgbasis::{hermite_function, hermite_functions, hg_eval, PI_POW_NEG_QUARTER};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `H_n(u)` for rational `u`, exactly.
fn hermite_exact(n: usize, u: &BigRational) -> BigRational {
    let two = BigRational::from_integer(BigInt::from(2));
    let (mut prev, mut cur) = (BigRational::one(), &two * u);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = &two * u * &cur - &two * BigRational::from_integer(BigInt::from(k)) * &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `phi_n(u)`: the exact ratio `H_n^2 / (2^n n!)` is rounded once, the
/// Gaussian factor is applied in floating point.
fn phi_oracle(n: usize, num: i64, den: i64) -> f64 {
    let u = BigRational::new(BigInt::from(num), BigInt::from(den));
    let h = hermite_exact(n, &u);
    if h.is_zero() {
        return 0.0;
    }
    let mut norm = BigInt::one();
    for k in 1..=n {
        norm *= BigInt::from(2 * k);
    }
    let ratio = (&h * &h) / BigRational::from_integer(norm);
    let uf = num as f64 / den as f64;
    let mag = ratio.to_f64().unwrap().sqrt() * PI_POW_NEG_QUARTER * (-uf * uf / 2.0).exp();
    if h.is_negative() { -mag } else { mag }
}

#[test]
fn order_50_at_3_7() {
    let want = phi_oracle(50, 37, 10);
    let got = hermite_function(50, 3.7);
    assert!(((got - want) / want).abs() < 1e-10, "{got} vs {want}");
}

#[test]
fn recurrence_matches_exact_series_up_to_60() {
    let points = [(0, 1), (1, 4), (-7, 5), (37, 10), (61, 10), (-9, 1), (23, 2)];
    let mut all = vec![0.0; 61];
    for &(num, den) in &points {
        let u = num as f64 / den as f64;
        hermite_functions(u, &mut all);
        for n in 0..=60 {
            let want = phi_oracle(n, num, den);
            let scale = want.abs().max(1e-300);
            // far in the classically forbidden tail the value is tiny; compare absolutely there
            let err = (all[n] - want).abs();
            assert!(err <= 1e-10 * scale || err < 1e-14, "n={n} u={u}: {} vs {want}", all[n]);
            assert_eq!(all[n], hermite_function(n, u));
        }
    }
}

#[test]
fn scaled_form_uses_the_oracle_argument() {
    // sqrt(s) phi_n(s (x - c))
    let (s, c): (f64, f64) = (0.5, 2.0);
    let x = 2.0 + 3.7 / s;
    let want = s.sqrt() * phi_oracle(50, 37, 10);
    let got = hg_eval(50, s, c, x).unwrap();
    assert!(((got - want) / want).abs() < 1e-10);
}
