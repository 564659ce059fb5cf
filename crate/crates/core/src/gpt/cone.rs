use nalgebra::DVector;

use crate::gpt::model::ConeSpec;
use crate::hilbert::hermitian_eigen;
use crate::lp::{LinearProgram, LpOutcome};
use crate::TOL;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Membership {
    Inside,
    /// `distance` is the separation margin: L1 distance to the cone for
    /// vertex cones, the most negative block eigenvalue (negated) otherwise.
    Outside { distance: f64 },
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside)
    }

    pub fn distance(&self) -> f64 {
        match self {
            Membership::Inside => 0.0,
            Membership::Outside { distance } => *distance,
        }
    }
}

/// Decides whether `xi` is a non-negative combination of the cone's
/// generators (or has positive semidefinite blocks).
pub fn cone_membership(xi: &DVector<f64>, cone: &ConeSpec) -> Membership {
    let distance = cone_distance(xi, cone);
    let scale = xi.amax().max(1.0);
    if distance <= TOL * scale {
        Membership::Inside
    } else {
        Membership::Outside { distance }
    }
}

/// Raw separation margin, zero (up to rounding) for members.
pub fn cone_distance(xi: &DVector<f64>, cone: &ConeSpec) -> f64 {
    match cone {
        ConeSpec::Blocks(layout) => {
            let coords = xi.as_slice();
            let mut worst: f64 = 0.0;
            for k in 0..layout.sector_count() {
                let (vals, _) = hermitian_eigen(&layout.block(coords, k), layout.field());
                for v in vals {
                    worst = worst.max(-v);
                }
            }
            worst
        }
        ConeSpec::Vertex { generators } => vertex_distance(xi, generators),
    }
}

/// L1 distance from `xi` to the cone: min Σ(s⁺ + s⁻) with
/// `V λ + s⁺ − s⁻ = xi`, `λ, s± ≥ 0`.
fn vertex_distance(xi: &DVector<f64>, generators: &[DVector<f64>]) -> f64 {
    let dim = xi.len();
    let g = generators.len();
    let vars = g + 2 * dim;
    let mut lp = LinearProgram::new(vars);
    for r in 0..dim {
        let mut row = vec![0.0; vars];
        for (j, gen) in generators.iter().enumerate() {
            row[j] = gen[r];
        }
        row[g + r] = 1.0;
        row[g + dim + r] = -1.0;
        lp.equality(row, xi[r]);
    }
    let mut cost = vec![0.0; vars];
    for c in cost.iter_mut().skip(g) {
        *c = 1.0;
    }
    lp.minimise(cost);
    match lp.solve() {
        LpOutcome::Optimal { value, .. } => value.max(0.0),
        // the slack variables make the program always feasible and bounded
        other => panic!("cone membership program returned {other:?}"),
    }
}

/// Non-negative weights expressing `xi` in terms of the generators, when
/// it lies in the cone.
pub fn conic_weights(xi: &DVector<f64>, generators: &[DVector<f64>]) -> Option<Vec<f64>> {
    let dim = xi.len();
    let mut lp = LinearProgram::new(generators.len());
    for r in 0..dim {
        lp.equality(generators.iter().map(|g| g[r]).collect(), xi[r]);
    }
    lp.solve().optimal().map(|(x, _)| x.to_vec())
}

/// Searches for an observation test `{a_i}` with effects in the cone
/// generated by `effect_generators`, `Σ a_i = u` and `(a_i|ρ_j) = δ_ij`.
/// Returns the effects when the states are perfectly distinguishable.
pub fn distinguishing_test(
    effect_generators: &[DVector<f64>],
    unit: &DVector<f64>,
    states: &[DVector<f64>],
) -> Option<Vec<DVector<f64>>> {
    let g = effect_generators.len();
    let k = states.len();
    let dim = unit.len();
    let vars = g * k;
    let mut lp = LinearProgram::new(vars);
    for r in 0..dim {
        let mut row = vec![0.0; vars];
        for i in 0..k {
            for (j, e) in effect_generators.iter().enumerate() {
                row[i * g + j] = e[r];
            }
        }
        lp.equality(row, unit[r]);
    }
    for i in 0..k {
        for (s, rho) in states.iter().enumerate() {
            let mut row = vec![0.0; vars];
            for (j, e) in effect_generators.iter().enumerate() {
                row[i * g + j] = e.dot(rho);
            }
            lp.equality(row, if i == s { 1.0 } else { 0.0 });
        }
    }
    let (x, _) = lp.solve().optimal().map(|(x, v)| (x.to_vec(), v))?;
    Some(
        (0..k)
            .map(|i| {
                effect_generators
                    .iter()
                    .enumerate()
                    .fold(DVector::zeros(dim), |acc, (j, e)| acc + e * x[i * g + j])
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{Field, HilbertLayout};

    fn square() -> ConeSpec {
        ConeSpec::Vertex {
            generators: vec![
                DVector::from_vec(vec![1.0, 1.0, 1.0]),
                DVector::from_vec(vec![-1.0, 1.0, 1.0]),
                DVector::from_vec(vec![-1.0, -1.0, 1.0]),
                DVector::from_vec(vec![1.0, -1.0, 1.0]),
            ],
        }
    }

    #[test]
    fn square_centre_is_inside() {
        let c = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        assert!(cone_membership(&c, &square()).is_inside());
    }

    #[test]
    fn negated_vertex_is_outside() {
        let v = DVector::from_vec(vec![-1.0, -1.0, -1.0]);
        match cone_membership(&v, &square()) {
            Membership::Outside { distance } => assert!(distance > 0.5),
            Membership::Inside => panic!("negated vertex accepted"),
        }
    }

    #[test]
    fn convex_combination_is_inside() {
        let v = DVector::from_vec(vec![0.3 - 0.7, 0.3 + 0.7, 1.0]);
        assert!(cone_membership(&v, &square()).is_inside());
        let outside = DVector::from_vec(vec![1.2, 0.0, 1.0]);
        let m = cone_membership(&outside, &square());
        assert!((m.distance() - 0.2).abs() < 1e-9, "{m:?}");
    }

    #[test]
    fn block_cone_uses_eigenvalues() {
        let cone = ConeSpec::Blocks(HilbertLayout::new(Field::Complex, vec![2]));
        // diag(1, -0.5)
        let v = DVector::from_vec(vec![1.0, -0.5, 0.0, 0.0]);
        assert!((cone_membership(&v, &cone).distance() - 0.5).abs() < 1e-12);
        let psd = DVector::from_vec(vec![0.5, 0.5, 0.5 * 2f64.sqrt(), 0.0]);
        assert!(cone_membership(&psd, &cone).is_inside());
    }
}
