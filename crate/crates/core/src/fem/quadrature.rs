//! Quadrature on the reference triangle (area 1/2) and on `[0, 1]`.

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly.
    pub order: usize,
}

impl QuadratureRule {
    fn from_orbits(order: usize, centroid: Option<f64>, s3: &[(f64, f64)], s6: &[(f64, f64, f64)]) -> Self {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        if let Some(w) = centroid {
            points.push([1.0 / 3.0, 1.0 / 3.0]);
            weights.push(0.5 * w);
        }
        for &(a, w) in s3 {
            let b = 1.0 - 2.0 * a;
            for p in [[a, a], [b, a], [a, b]] {
                points.push(p);
                weights.push(0.5 * w);
            }
        }
        for &(a, b, w) in s6 {
            let c = 1.0 - a - b;
            for p in [[a, b], [b, a], [b, c], [c, b], [c, a], [a, c]] {
                points.push(p);
                weights.push(0.5 * w);
            }
        }
        Self {
            points,
            weights,
            order,
        }
    }

    /// Six-point rule exact for degree 4 (Dunavant).
    pub fn triangle_order4() -> Self {
        Self::from_orbits(
            4,
            None,
            &[
                (0.445_948_490_915_964_9, 0.223_381_589_678_011_47),
                (0.091_576_213_509_770_74, 0.109_951_743_655_321_87),
            ],
            &[],
        )
    }

    /// Twelve-point rule exact for degree 6 (Dunavant).
    pub fn triangle_order6() -> Self {
        Self::from_orbits(
            6,
            None,
            &[
                (0.249_286_745_170_910_4, 0.116_786_275_726_379_37),
                (0.063_089_014_491_502_23, 0.050_844_906_370_206_82),
            ],
            &[(
                0.053_145_049_844_816_95,
                0.310_352_451_033_784_4,
                0.082_851_075_618_373_58,
            )],
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Legendre rule on `[0, 1]`; weights sum to 1.
#[derive(Debug, Clone)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl EdgeRule {
    /// Three-point Gauss rule, exact for degree 5.
    pub fn gauss3() -> Self {
        let d = 0.5 * (0.6f64).sqrt();
        Self {
            points: vec![0.5 - d, 0.5, 0.5 + d],
            weights: vec![5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0],
            order: 5,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Exact integral of s^a t^b over the reference triangle: a! b! / (a+b+2)!.
    fn monomial_integral(a: usize, b: usize) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    fn check_exactness(rule: &QuadratureRule) {
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 0.5).abs() < 1e-14);
        assert!(rule.weights.iter().all(|&w| w > 0.0));
        for a in 0..=rule.order {
            for b in 0..=(rule.order - a) {
                let q: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                    .sum();
                let exact = monomial_integral(a, b);
                assert!((q - exact).abs() < 1e-13, "s^{a} t^{b}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn order4_exact() {
        let r = QuadratureRule::triangle_order4();
        assert_eq!(r.len(), 6);
        check_exactness(&r);
    }

    #[test]
    fn order6_exact() {
        let r = QuadratureRule::triangle_order6();
        assert_eq!(r.len(), 12);
        check_exactness(&r);
    }

    #[test]
    fn order4_is_not_order5() {
        let r = QuadratureRule::triangle_order4();
        let q: f64 = r
            .points
            .iter()
            .zip(&r.weights)
            .map(|(p, w)| w * p[0].powi(5))
            .sum();
        assert!((q - monomial_integral(5, 0)).abs() > 1e-8);
    }

    #[test]
    fn gauss3_exact_to_degree5() {
        let r = EdgeRule::gauss3();
        for k in 0..=5 {
            let q: f64 = r
                .points
                .iter()
                .zip(&r.weights)
                .map(|(s, w)| w * s.powi(k))
                .sum();
            assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-15);
        }
    }
}
