//! Finite-dimensional order unit spaces with a polyhedral positive cone.
//!
//! The cone is stored by its generators only; every membership question is
//! answered by a small linear program with an exact certificate.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::gain::Functional;
use crate::lp::{self, Bound, LpBuilder, LpOutcome, Sense};
use crate::rational::{
    dot, int, is_zero_vec, positively_proportional, primitive, rank, solve_in_basis, zeros,
    Rational, Vector,
};

/// Unchecked space description, as read from a model file.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSpace {
    pub dim: usize,
    pub order_unit: Vector,
    pub cone_generators: Vec<Vector>,
    pub name: Option<String>,
}

/// A validated order unit space `(E, E_+, u_E)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GptSpace {
    dim: usize,
    order_unit: Vector,
    generators: Vec<Vector>,
    name: Option<String>,
    interior_state: Functional,
}

/// Either membership coefficients over the generators or a separating
/// functional from the dual cone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConeCertificate {
    Member { coefficients: Vector },
    Separated { functional: Functional },
}

impl ConeCertificate {
    pub fn is_member(&self) -> bool {
        matches!(self, ConeCertificate::Member { .. })
    }
}

/// Outcome of a dual cone test: `Ok` or a generator on which the functional
/// is negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DualConeVerdict {
    Positive,
    Violated { generator: usize, value: Rational },
}

impl DualConeVerdict {
    pub fn is_positive(&self) -> bool {
        matches!(self, DualConeVerdict::Positive)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Classical(usize),
    Gbit,
    Polygon(usize),
}

const POLYGON_DATA: &str = include_str!("../data/polygons.txt");

pub fn validate_space(raw: RawSpace) -> Result<GptSpace> {
    GptSpace::new(raw)
}

impl GptSpace {
    pub fn new(raw: RawSpace) -> Result<Self> {
        let dim = raw.dim;
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        check_len(dim, &raw.order_unit)?;
        if raw.cone_generators.is_empty() {
            return Err(Error::NotGenerating { rank: 0, dim });
        }
        let mut generators: Vec<Vector> = Vec::new();
        for (i, g) in raw.cone_generators.into_iter().enumerate() {
            check_len(dim, &g)?;
            if is_zero_vec(&g) {
                return Err(Error::ZeroGenerator(i));
            }
            if !generators.iter().any(|h| positively_proportional(&g, h)) {
                generators.push(g);
            }
        }

        let r = rank(&generators);
        if r < dim {
            return Err(Error::NotGenerating { rank: r, dim });
        }
        if !is_pointed(&generators) {
            return Err(Error::NotProper);
        }
        for direction in 0..dim {
            for sign in [1, -1] {
                let mut e = zeros(dim);
                e[direction] = int(sign);
                if !unit_dominates(&generators, &raw.order_unit, &e) {
                    return Err(Error::NotOrderUnit { direction });
                }
            }
        }
        let interior_state = find_interior_state(&generators, &raw.order_unit);
        Ok(GptSpace {
            dim,
            order_unit: raw.order_unit,
            generators,
            name: raw.name,
            interior_state,
        })
    }

    pub fn standard(kind: SpaceKind) -> Result<Self> {
        standard_space(kind)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order_unit(&self) -> &Vector {
        &self.order_unit
    }

    /// Deduplicated cone generators.
    pub fn generators(&self) -> &[Vector] {
        &self.generators
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// A fixed state strictly positive on every nonzero cone element,
    /// normalized to `⟨σ, u⟩ = 1`.
    pub fn interior_state(&self) -> &Functional {
        &self.interior_state
    }

    pub fn check_dim(&self, v: &[Rational]) -> Result<()> {
        check_len(self.dim, v)
    }

    /// Decides `v ∈ E_+`.
    pub fn cone_member(&self, v: &[Rational]) -> Result<ConeCertificate> {
        self.check_dim(v)?;
        let mut b = LpBuilder::new(Sense::Minimize);
        let coeffs = b.add_vars(self.generators.len(), Bound::NonNegative);
        for d in 0..self.dim {
            let terms = coeffs
                .clone()
                .zip(&self.generators)
                .filter(|(_, g)| !g[d].is_zero())
                .map(|(j, g)| (j, g[d].clone()))
                .collect();
            b.add_eq(terms, v[d].clone());
        }
        let p = b.build();
        Ok(match lp::solve(&p)? {
            LpOutcome::Optimal { primal, .. } => ConeCertificate::Member { coefficients: primal },
            LpOutcome::Infeasible { farkas } => ConeCertificate::Separated {
                functional: Functional::new(farkas.eq),
            },
            LpOutcome::Unbounded { .. } => unreachable!("zero objective"),
        })
    }

    /// Shorthand for `cone_member(v)?.is_member()`.
    pub fn contains(&self, v: &[Rational]) -> Result<bool> {
        Ok(self.cone_member(v)?.is_member())
    }

    /// Checks a certificate from [`cone_member`](Self::cone_member) by direct
    /// arithmetic.
    pub fn verify_cone_certificate(&self, v: &[Rational], cert: &ConeCertificate) -> bool {
        match cert {
            ConeCertificate::Member { coefficients } => {
                if coefficients.len() != self.generators.len()
                    || coefficients.iter().any(Signed::is_negative)
                {
                    return false;
                }
                let mut sum = zeros(self.dim);
                for (c, g) in coefficients.iter().zip(&self.generators) {
                    crate::rational::axpy(&mut sum, c, g);
                }
                sum == v
            }
            ConeCertificate::Separated { functional } => {
                functional.dim() == self.dim
                    && self.dual_cone_member(functional).is_ok_and(|d| d.is_positive())
                    && functional.pair(v).is_negative()
            }
        }
    }

    /// `ψ ∈ E^*_+`, i.e. nonnegative on every generator.
    pub fn dual_cone_member(&self, psi: &Functional) -> Result<DualConeVerdict> {
        self.check_dim(psi.coords())?;
        for (i, g) in self.generators.iter().enumerate() {
            let value = psi.pair(g);
            if value.is_negative() {
                return Ok(DualConeVerdict::Violated { generator: i, value });
            }
        }
        Ok(DualConeVerdict::Positive)
    }

    /// `ψ ∈ E^*_+` with `⟨ψ, u⟩ = 1`.
    pub fn is_state(&self, psi: &Functional) -> bool {
        psi.dim() == self.dim
            && psi.pair(&self.order_unit).is_one()
            && self.generators.iter().all(|g| !psi.pair(g).is_negative())
    }

    /// Indices of the generators spanning extreme rays.
    pub fn extreme_rays(&self) -> Vec<usize> {
        (0..self.generators.len())
            .filter(|&i| {
                let others: Vec<Vector> = self
                    .generators
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, g)| g.clone())
                    .collect();
                !in_cone(&others, &self.generators[i])
            })
            .collect()
    }

    /// Simplicial cone (exactly `dim` extreme rays) with `u` interior, which
    /// validation already guarantees.
    pub fn is_classical(&self) -> bool {
        let rays = self.extreme_rays();
        rays.len() == self.dim
            && rank(&rays.iter().map(|&i| self.generators[i].clone()).collect::<Vec<_>>())
                == self.dim
    }

    /// The classical product `B(a, b)`: coordinates in the extreme ray basis
    /// normalized so that `u` has all-ones coordinates, multiplied
    /// componentwise.
    pub fn classical_product(&self, a: &[Rational], b: &[Rational]) -> Result<Vector> {
        self.check_dim(a)?;
        self.check_dim(b)?;
        if !self.is_classical() {
            return Err(Error::NotClassical);
        }
        let rays: Vec<Vector> = self
            .extreme_rays()
            .into_iter()
            .map(|i| self.generators[i].clone())
            .collect();
        let mu = solve_in_basis(&rays, &self.order_unit).ok_or(Error::NotClassical)?;
        let basis: Vec<Vector> = rays
            .iter()
            .zip(&mu)
            .map(|(r, m)| r.iter().map(|x| x * m).collect())
            .collect();
        let ca = solve_in_basis(&basis, a).ok_or(Error::NotClassical)?;
        let cb = solve_in_basis(&basis, b).ok_or(Error::NotClassical)?;
        let mut out = zeros(self.dim);
        for ((x, y), r) in ca.iter().zip(&cb).zip(&basis) {
            crate::rational::axpy(&mut out, &(x * y), r);
        }
        Ok(out)
    }
}

fn check_len(dim: usize, v: &[Rational]) -> Result<()> {
    if v.len() != dim {
        Err(Error::DimensionMismatch { expected: dim, found: v.len() })
    } else {
        Ok(())
    }
}

fn eq_rows(builder: &mut LpBuilder, cols: &[(usize, &Vector)], rhs: &[Rational]) {
    for (d, r) in rhs.iter().enumerate() {
        let terms = cols
            .iter()
            .filter(|(_, g)| !g[d].is_zero())
            .map(|&(j, g)| (j, g[d].clone()))
            .collect();
        builder.add_eq(terms, r.clone());
    }
}

fn in_cone(generators: &[Vector], v: &[Rational]) -> bool {
    if generators.is_empty() {
        return is_zero_vec(v);
    }
    let mut b = LpBuilder::new(Sense::Minimize);
    let vars = b.add_vars(generators.len(), Bound::NonNegative);
    let cols: Vec<(usize, &Vector)> = vars.zip(generators).collect();
    eq_rows(&mut b, &cols, v);
    matches!(lp::solve(&b.build()), Ok(LpOutcome::Optimal { .. }))
}

/// No nonzero nonnegative combination of generators vanishes.
fn is_pointed(generators: &[Vector]) -> bool {
    let dim = generators[0].len();
    let mut b = LpBuilder::new(Sense::Minimize);
    let vars = b.add_vars(generators.len(), Bound::NonNegative);
    let cols: Vec<(usize, &Vector)> = vars.clone().zip(generators).collect();
    eq_rows(&mut b, &cols, &zeros(dim));
    b.add_eq(vars.map(|j| (j, Rational::one())).collect(), Rational::one());
    !matches!(lp::solve(&b.build()), Ok(LpOutcome::Optimal { .. }))
}

/// `λ u + e ∈ cone` for some `λ >= 0`.
fn unit_dominates(generators: &[Vector], u: &[Rational], e: &[Rational]) -> bool {
    let mut b = LpBuilder::new(Sense::Minimize);
    let lambda = b.add_var(Bound::NonNegative, Rational::zero());
    let vars = b.add_vars(generators.len(), Bound::NonNegative);
    // Σ c_i g_i - λ u = e
    for d in 0..e.len() {
        let mut terms: Vec<(usize, Rational)> = vars
            .clone()
            .zip(generators)
            .filter(|(_, g)| !g[d].is_zero())
            .map(|(j, g)| (j, g[d].clone()))
            .collect();
        if !u[d].is_zero() {
            terms.push((lambda, -&u[d]));
        }
        b.add_eq(terms, e[d].clone());
    }
    matches!(lp::solve(&b.build()), Ok(LpOutcome::Optimal { .. }))
}

/// Maximizes `min_i ⟨σ, g_i⟩` over `⟨σ, u⟩ = 1`; positive for a proper,
/// generating cone with interior `u`.
fn find_interior_state(generators: &[Vector], u: &[Rational]) -> Functional {
    let dim = u.len();
    let mut b = LpBuilder::new(Sense::Maximize);
    let sigma = b.add_vars(dim, Bound::Free);
    let t = b.add_var(Bound::NonNegative, Rational::one());
    b.add_le(alloc::vec![(t, Rational::one())], Rational::one());
    for g in generators {
        // t - ⟨σ, g⟩ <= 0
        let mut terms: Vec<(usize, Rational)> = sigma
            .clone()
            .zip(g)
            .filter(|(_, x)| !x.is_zero())
            .map(|(j, x)| (j, -x))
            .collect();
        terms.push((t, Rational::one()));
        b.add_le(terms, Rational::zero());
    }
    b.add_eq(
        sigma.clone().zip(u).filter(|(_, x)| !x.is_zero()).map(|(j, x)| (j, x.clone())).collect(),
        Rational::one(),
    );
    match lp::solve(&b.build()) {
        Ok(LpOutcome::Optimal { primal, .. }) => Functional::new(primal[sigma].to_vec()),
        other => unreachable!("interior state LP must be solvable: {other:?}"),
    }
}

pub fn standard_space(kind: SpaceKind) -> Result<GptSpace> {
    match kind {
        SpaceKind::Classical(n) => {
            if n == 0 {
                return Err(Error::UnsupportedKind("classical(0)".into()));
            }
            let generators = (0..n)
                .map(|i| (0..n).map(|j| int((i == j) as i64)).collect())
                .collect();
            GptSpace::new(RawSpace {
                dim: n,
                order_unit: (0..n).map(|_| Rational::one()).collect(),
                cone_generators: generators,
                name: Some(format!("classical({n})")),
            })
        }
        SpaceKind::Gbit => GptSpace::new(RawSpace {
            dim: 3,
            order_unit: crate::rational::ivec(&[1, 0, 0]),
            cone_generators: [[1, 1, 0], [1, -1, 0], [1, 0, 1], [1, 0, -1]]
                .iter()
                .map(|g| crate::rational::ivec(g))
                .collect(),
            name: Some("gbit".into()),
        }),
        SpaceKind::Polygon(k) => {
            let vertices =
                polygon_vertices(k).ok_or_else(|| Error::UnsupportedKind(format!("polygon({k})")))?;
            GptSpace::new(polygon_from_states(&vertices, format!("polygon({k})")))
        }
    }
}

/// Parses the shipped vertex table. Vertices are states `(1, x, y)`.
fn polygon_vertices(k: usize) -> Option<Vec<Vector>> {
    let line = POLYGON_DATA
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .find(|l| l.split_whitespace().next().and_then(|s| s.parse().ok()) == Some(k))?;
    line.split_whitespace()
        .skip(1)
        .map(|triple| {
            let mut it = triple.split(',').map(|s| s.parse::<i64>().ok());
            let (a, b, c) = (it.next()??, it.next()??, it.next()??);
            Some(alloc::vec![
                Rational::one(),
                crate::rational::rat(a, c),
                crate::rational::rat(b, c)
            ])
        })
        .collect()
}

/// Effect cone of a polygon state space: one generator per edge, the normal
/// vanishing on both edge endpoints and positive on the remaining vertices.
fn polygon_from_states(states: &[Vector], name: String) -> RawSpace {
    let k = states.len();
    let generators = (0..k)
        .map(|j| {
            let (p, q) = (&states[j], &states[(j + 1) % k]);
            let mut n = alloc::vec![
                &p[1] * &q[2] - &p[2] * &q[1],
                &p[2] * &q[0] - &p[0] * &q[2],
                &p[0] * &q[1] - &p[1] * &q[0],
            ];
            let other = &states[(j + 2) % k];
            if dot(&n, other).is_negative() {
                n = n.into_iter().map(|x| -x).collect();
            }
            primitive(&n)
        })
        .collect();
    RawSpace {
        dim: 3,
        order_unit: crate::rational::ivec(&[1, 0, 0]),
        cone_generators: generators,
        name: Some(name),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{ivec, vec_of};

    fn bit() -> GptSpace {
        standard_space(SpaceKind::Classical(2)).unwrap()
    }

    fn gbit() -> GptSpace {
        standard_space(SpaceKind::Gbit).unwrap()
    }

    #[test]
    fn classical_bit_validates() {
        let s = bit();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.interior_state().coords(), &vec_of(&[(1, 2), (1, 2)]));
    }

    #[test]
    fn gbit_validates() {
        let s = gbit();
        assert_eq!(s.generators().len(), 4);
        assert_eq!(s.interior_state().coords(), &ivec(&[1, 0, 0]));
    }

    #[test]
    fn rank_deficient_is_not_generating() {
        let err = GptSpace::new(RawSpace {
            dim: 2,
            order_unit: ivec(&[1, 0]),
            cone_generators: vec![ivec(&[1, 0])],
            name: None,
        })
        .unwrap_err();
        assert_eq!(err, Error::NotGenerating { rank: 1, dim: 2 });
    }

    #[test]
    fn half_plane_is_not_proper() {
        let err = GptSpace::new(RawSpace {
            dim: 2,
            order_unit: ivec(&[1, 0]),
            cone_generators: vec![ivec(&[1, 0]), ivec(&[0, 1]), ivec(&[0, -1])],
            name: None,
        })
        .unwrap_err();
        assert_eq!(err, Error::NotProper);
    }

    #[test]
    fn boundary_unit_is_not_order_unit() {
        let err = GptSpace::new(RawSpace {
            dim: 2,
            order_unit: ivec(&[1, 0]),
            cone_generators: vec![ivec(&[1, 0]), ivec(&[0, 1])],
            name: None,
        })
        .unwrap_err();
        assert!(matches!(err, Error::NotOrderUnit { .. }));
    }

    #[test]
    fn dimension_mismatch_and_dedup() {
        let err = GptSpace::new(RawSpace {
            dim: 2,
            order_unit: ivec(&[1, 1, 1]),
            cone_generators: vec![ivec(&[1, 0])],
            name: None,
        })
        .unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, found: 3 });

        let s = GptSpace::new(RawSpace {
            dim: 2,
            order_unit: ivec(&[1, 1]),
            cone_generators: vec![ivec(&[1, 0]), ivec(&[0, 1]), ivec(&[2, 0]), ivec(&[1, 0])],
            name: None,
        })
        .unwrap();
        assert_eq!(s.generators(), &[ivec(&[1, 0]), ivec(&[0, 1])]);
    }

    #[test]
    fn cone_membership_examples() {
        let g = gbit();
        let v = ivec(&[1, 0, 0]);
        let c = g.cone_member(&v).unwrap();
        assert!(c.is_member());
        assert!(g.verify_cone_certificate(&v, &c));

        let v = ivec(&[1, 1, 1]);
        let c = g.cone_member(&v).unwrap();
        let ConeCertificate::Separated { functional } = &c else { panic!("expected separator") };
        assert!(functional.pair(&v).is_negative());
        assert!(g.verify_cone_certificate(&v, &c));
        // The vertex functional (1,-1,-1) also separates.
        let vertex = Functional::new(ivec(&[1, -1, -1]));
        assert!(g.dual_cone_member(&vertex).unwrap().is_positive());
        assert_eq!(vertex.pair(&v), int(-1));

        let b = bit();
        match b.cone_member(&ivec(&[0, 0])).unwrap() {
            ConeCertificate::Member { coefficients } => assert!(is_zero_vec(&coefficients)),
            _ => panic!(),
        }
        assert!(matches!(
            b.cone_member(&ivec(&[1])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dual_cone_examples() {
        assert!(bit().dual_cone_member(&Functional::new(ivec(&[1, 0]))).unwrap().is_positive());
        let g = gbit();
        assert!(g.dual_cone_member(&Functional::new(ivec(&[1, 1, 1]))).unwrap().is_positive());
        assert_eq!(
            g.dual_cone_member(&Functional::new(ivec(&[1, 2, 0]))).unwrap(),
            DualConeVerdict::Violated { generator: 1, value: int(-1) }
        );
        assert!(g.dual_cone_member(&Functional::new(ivec(&[1, 1, 0]))).unwrap().is_positive());
    }

    #[test]
    fn classicality() {
        assert!(bit().is_classical());
        assert!(!gbit().is_classical());
        assert!(standard_space(SpaceKind::Classical(3)).unwrap().is_classical());
        for k in 3..=12 {
            let p = standard_space(SpaceKind::Polygon(k)).unwrap();
            assert_eq!(p.generators().len(), k);
            assert_eq!(p.is_classical(), k == 3, "polygon({k})");
        }
        assert!(matches!(
            standard_space(SpaceKind::Polygon(13)),
            Err(Error::UnsupportedKind(_))
        ));
    }

    #[test]
    fn polygon_four_matches_gbit_cone_size() {
        let p = standard_space(SpaceKind::Polygon(4)).unwrap();
        // Rotated square: the generators are (1, ±1, ±1).
        for g in p.generators() {
            assert_eq!(g[0], int(1));
            assert_eq!(g[1].abs(), int(1));
            assert_eq!(g[2].abs(), int(1));
        }
    }

    #[test]
    fn classical_products() {
        let b = bit();
        assert_eq!(b.classical_product(&ivec(&[1, 0]), &ivec(&[1, 0])).unwrap(), ivec(&[1, 0]));
        assert_eq!(b.classical_product(&ivec(&[2, 3]), &ivec(&[1, 1])).unwrap(), ivec(&[2, 3]));
        let c3 = standard_space(SpaceKind::Classical(3)).unwrap();
        assert_eq!(
            c3.classical_product(&ivec(&[1, 2, 0]), &ivec(&[0, 1, 1])).unwrap(),
            ivec(&[0, 2, 0])
        );
        assert_eq!(
            gbit().classical_product(&ivec(&[1, 0, 0]), &ivec(&[1, 0, 0])),
            Err(Error::NotClassical)
        );
        // Triangle: unit law in a non-standard basis.
        let t = standard_space(SpaceKind::Polygon(3)).unwrap();
        let a = vec_of(&[(1, 3), (1, 5), (-2, 7)]);
        assert_eq!(t.classical_product(&a, t.order_unit()).unwrap(), a);
    }
}
