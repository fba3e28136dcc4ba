//! Closed-form moments of monomials over unit spheres.
//!
//! Integrands that depend on the tail `ξ' = (ξ₂, …, ξₙ)` only through
//! `|ξ'|` and a monomial `ξ'^β` reduce to a radial integral times
//! `∫_{S^{k-1}} |ω^β|^p dω = 2 ∏ Γ((pβᵢ+1)/2) / Γ(Σ (pβᵢ+1)/2)`.

/// `Γ(m/2)` for a positive integer `m`.
pub fn gamma_half(m: u32) -> f64 {
    assert!(m > 0, "Γ(0) is undefined");
    let mut value = if m.is_multiple_of(2) {
        1.0
    } else {
        std::f64::consts::PI.sqrt()
    };
    let mut x = if m.is_multiple_of(2) { 1.0 } else { 0.5 };
    while 2.0 * x < m as f64 {
        value *= x;
        x += 1.0;
    }
    value
}

/// `∫_{S^{k-1}} Π |ωᵢ|^{p βᵢ} dω` with `k = beta.len()`.
///
/// For `k = 0` (no tail coordinates) the "sphere" is a single point and the
/// moment is 1.
pub fn sphere_moment(beta: &[u32], p: u32) -> f64 {
    if beta.is_empty() {
        return 1.0;
    }
    let mut num = 2.0;
    let mut total = 0;
    for &b in beta {
        let m = p * b + 1;
        num *= gamma_half(m);
        total += m;
    }
    num / gamma_half(total)
}

/// `max_{|ω|=1} Π |ωᵢ|^{βᵢ}`, attained at `ωᵢ² = βᵢ/|β|`.
pub fn sphere_max(beta: &[u32]) -> f64 {
    let total: u32 = beta.iter().sum();
    if total == 0 {
        return 1.0;
    }
    beta.iter()
        .filter(|&&b| b > 0)
        .map(|&b| (b as f64 / total as f64).powf(b as f64 / 2.0))
        .product()
}

/// Surface area of `S^{k-1}`.
pub fn sphere_area(k: usize) -> f64 {
    sphere_moment(&vec![0; k], 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::GaussLegendre;
    use std::f64::consts::PI;

    #[test]
    fn gamma_half_values() {
        assert!((gamma_half(1) - PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(2), 1.0);
        assert!((gamma_half(3) - 0.5 * PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(8), 6.0);
        assert!((gamma_half(7) - 15.0 / 8.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn areas() {
        assert_eq!(sphere_area(1), 2.0);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn circle_moments_match_quadrature() {
        // Oracle: composite Gauss-Legendre in the angle.
        let rule = GaussLegendre::new(20);
        let breaks: Vec<f64> = (0..=8).map(|k| k as f64 * PI / 4.0).collect();
        let nodes = rule.composite(&breaks, 2);
        for (a, b) in [(0u32, 0u32), (1, 0), (2, 1), (3, 2), (0, 4)] {
            for p in [1u32, 2] {
                let want: f64 = nodes
                    .iter()
                    .map(|(th, w)| {
                        w * (th.cos().abs().powi((p * a) as i32)
                            * th.sin().abs().powi((p * b) as i32))
                    })
                    .sum();
                let got = sphere_moment(&[a, b], p);
                assert!(
                    (got - want).abs() < 1e-10 * want.max(1.0),
                    "{a},{b},{p}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn max_on_circle_matches_scan() {
        for (a, b) in [(1u32, 1u32), (2, 0), (3, 1)] {
            let scan = (0..200_000)
                .map(|k| {
                    let th = k as f64 * 2.0 * PI / 200_000.0;
                    th.cos().abs().powi(a as i32) * th.sin().abs().powi(b as i32)
                })
                .fold(0.0_f64, f64::max);
            assert!((sphere_max(&[a, b]) - scan).abs() < 1e-8);
        }
    }
}
