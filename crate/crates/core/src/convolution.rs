//! Convolution calculus on maps out of a coalgebra.
//!
//! A [`ConvMorphism`] over `C` assigns to each basis element of `C` a
//! [`MultiMap`] `A^⊗p → A^⊗q`. Composition and tensor product go through `Δ`:
//! `(g∗f)(c) = Σ g(c₍₁₎)∘f(c₍₂₎)` and `(f⊗f′)(c) = Σ f(c₍₁₎)⊗f′(c₍₂₎)`.

use std::sync::Arc;

use crate::coalgebra::Coalgebra;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Field, Scalar};
use crate::subspace::Subspace;

/// A linear map `A^⊗p → A^⊗q`, stored as an `a^q × a^p` matrix. Tensor factors
/// are ordered first-factor-major, matching [`Matrix::kron`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiMap {
    a_dim: usize,
    p: usize,
    q: usize,
    matrix: Matrix,
}

fn power(a: usize, n: usize) -> usize {
    a.pow(n as u32)
}

impl MultiMap {
    pub fn new(a_dim: usize, p: usize, q: usize, matrix: Matrix) -> Result<MultiMap> {
        if a_dim == 0 {
            return Err(Error::ShapeError("A must be nonzero".into()));
        }
        if matrix.shape() != (power(a_dim, q), power(a_dim, p)) {
            return Err(Error::ShapeError(format!(
                "map A^{p} → A^{q} needs a {}×{} matrix, got {}×{}",
                power(a_dim, q),
                power(a_dim, p),
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(MultiMap { a_dim, p, q, matrix })
    }

    pub fn zero(field: Field, a_dim: usize, p: usize, q: usize) -> MultiMap {
        MultiMap {
            a_dim,
            p,
            q,
            matrix: Matrix::zeros(field, power(a_dim, q), power(a_dim, p)),
        }
    }

    /// Identity of `A^⊗p`.
    pub fn identity(field: Field, a_dim: usize, p: usize) -> MultiMap {
        MultiMap {
            a_dim,
            p,
            q: p,
            matrix: Matrix::identity(field, power(a_dim, p)),
        }
    }

    pub fn field(&self) -> Field {
        self.matrix.field()
    }

    pub fn a_dim(&self) -> usize {
        self.a_dim
    }

    pub fn source_arity(&self) -> usize {
        self.p
    }

    pub fn target_arity(&self) -> usize {
        self.q
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    fn same_shape(&self, other: &MultiMap) -> Result<()> {
        if (self.a_dim, self.p, self.q) != (other.a_dim, other.p, other.q) {
            return Err(Error::ShapeError(format!(
                "maps A^{}→A^{} and A^{}→A^{} differ in shape",
                self.p, self.q, other.p, other.q
            )));
        }
        Ok(())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MultiMap) -> Result<MultiMap> {
        if self.a_dim != other.a_dim || self.p != other.q {
            return Err(Error::ShapeError(format!(
                "cannot compose A^{}→A^{} after A^{}→A^{}",
                self.p, self.q, other.p, other.q
            )));
        }
        Ok(MultiMap {
            a_dim: self.a_dim,
            p: other.p,
            q: self.q,
            matrix: self.matrix.checked_mul(&other.matrix)?,
        })
    }

    pub fn tensor(&self, other: &MultiMap) -> Result<MultiMap> {
        if self.a_dim != other.a_dim {
            return Err(Error::ShapeError("tensor factors act on different A".into()));
        }
        Ok(MultiMap {
            a_dim: self.a_dim,
            p: self.p + other.p,
            q: self.q + other.q,
            matrix: self.matrix.kron(&other.matrix),
        })
    }

    pub fn add(&self, other: &MultiMap) -> Result<MultiMap> {
        self.same_shape(other)?;
        Ok(MultiMap {
            matrix: self.matrix.checked_add(&other.matrix)?,
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &MultiMap) -> Result<MultiMap> {
        self.same_shape(other)?;
        Ok(MultiMap {
            matrix: &self.matrix - &other.matrix,
            ..self.clone()
        })
    }

    pub fn scale(&self, s: &Scalar) -> MultiMap {
        MultiMap {
            matrix: self.matrix.scale(s),
            ..self.clone()
        }
    }

    fn add_scaled(&mut self, s: &Scalar, other: &MultiMap) {
        self.matrix.add_scaled(s, &other.matrix);
    }
}

/// An element of `𝒱(C, Hom(A^⊗p, A^⊗q))`, one [`MultiMap`] per basis element of `C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvMorphism {
    coalgebra: Arc<Coalgebra>,
    components: Vec<MultiMap>,
}

impl ConvMorphism {
    pub fn new(coalgebra: Arc<Coalgebra>, components: Vec<MultiMap>) -> Result<ConvMorphism> {
        if components.len() != coalgebra.dim() {
            return Err(Error::ShapeError(format!(
                "{} components for a coalgebra of dimension {}",
                components.len(),
                coalgebra.dim()
            )));
        }
        for c in &components {
            c.same_shape(&components[0])?;
            if c.field() != coalgebra.field() {
                return Err(Error::FieldMismatch(
                    coalgebra.field().to_string(),
                    c.field().to_string(),
                ));
            }
        }
        Ok(ConvMorphism { coalgebra, components })
    }

    pub fn zero(coalgebra: Arc<Coalgebra>, a_dim: usize, p: usize, q: usize) -> ConvMorphism {
        let z = MultiMap::zero(coalgebra.field(), a_dim, p, q);
        let components = vec![z; coalgebra.dim()];
        ConvMorphism { coalgebra, components }
    }

    /// `c ↦ ε(c)·m0`.
    pub fn epsilon_embed(m0: &MultiMap, coalgebra: Arc<Coalgebra>) -> ConvMorphism {
        let components = coalgebra.counit().iter().map(|e| m0.scale(e)).collect();
        ConvMorphism { coalgebra, components }
    }

    /// The unit of `∗` on `Hom(A^⊗p, A^⊗p)`.
    pub fn identity(coalgebra: Arc<Coalgebra>, a_dim: usize, p: usize) -> ConvMorphism {
        let id = MultiMap::identity(coalgebra.field(), a_dim, p);
        ConvMorphism::epsilon_embed(&id, coalgebra)
    }

    pub fn coalgebra(&self) -> &Arc<Coalgebra> {
        &self.coalgebra
    }

    pub fn field(&self) -> Field {
        self.coalgebra.field()
    }

    pub fn components(&self) -> &[MultiMap] {
        &self.components
    }

    pub fn component(&self, c: usize) -> &MultiMap {
        &self.components[c]
    }

    pub fn a_dim(&self) -> usize {
        self.components[0].a_dim
    }

    pub fn source_arity(&self) -> usize {
        self.components[0].p
    }

    pub fn target_arity(&self) -> usize {
        self.components[0].q
    }

    /// The value on an arbitrary vector of `C`.
    pub fn eval(&self, v: &[Scalar]) -> MultiMap {
        let mut out = MultiMap::zero(self.field(), self.a_dim(), self.source_arity(), self.target_arity());
        for (s, m) in v.iter().zip(&self.components) {
            if !s.is_zero() {
                out.add_scaled(s, m);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(MultiMap::is_zero)
    }

    fn same_coalgebra(&self, other: &ConvMorphism) -> Result<()> {
        if !Arc::ptr_eq(&self.coalgebra, &other.coalgebra) && self.coalgebra != other.coalgebra {
            return Err(Error::CoalgebraMismatch(
                "morphisms live over different coalgebras".into(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &ConvMorphism) -> Result<ConvMorphism> {
        self.same_coalgebra(other)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(ConvMorphism {
            coalgebra: self.coalgebra.clone(),
            components,
        })
    }

    pub fn sub(&self, other: &ConvMorphism) -> Result<ConvMorphism> {
        self.same_coalgebra(other)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<_>>()?;
        Ok(ConvMorphism {
            coalgebra: self.coalgebra.clone(),
            components,
        })
    }

    pub fn scale(&self, s: &Scalar) -> ConvMorphism {
        ConvMorphism {
            coalgebra: self.coalgebra.clone(),
            components: self.components.iter().map(|m| m.scale(s)).collect(),
        }
    }

    /// Replaces component `c`.
    pub fn with_component(mut self, c: usize, m: MultiMap) -> Result<ConvMorphism> {
        m.same_shape(&self.components[0])?;
        self.components[c] = m;
        Ok(self)
    }

    /// `f∘L` for a linear map `L: T → S` given as a `dim S × dim T` matrix,
    /// where `self` lives over `S`. No coalgebra-morphism check; see [`pullback`].
    pub fn along_linear(&self, l: &Matrix, target: Arc<Coalgebra>) -> Result<ConvMorphism> {
        if l.shape() != (self.coalgebra.dim(), target.dim()) {
            return Err(Error::ShapeError("linear map does not match the coalgebras".into()));
        }
        let components = (0..target.dim()).map(|t| self.eval(&l.column_vector(t))).collect();
        Ok(ConvMorphism {
            coalgebra: target,
            components,
        })
    }
}

/// `(g∗f)(c) = Σ μ_c^{jk} g_j ∘ f_k`.
pub fn conv_compose(g: &ConvMorphism, f: &ConvMorphism) -> Result<ConvMorphism> {
    g.same_coalgebra(f)?;
    if g.source_arity() != f.target_arity() || g.a_dim() != f.a_dim() {
        return Err(Error::ShapeError("convolution factors are not composable".into()));
    }
    let c = &g.coalgebra;
    let mut components = Vec::with_capacity(c.dim());
    let mut cache = std::collections::HashMap::new();
    for i in 0..c.dim() {
        let mut acc = MultiMap::zero(c.field(), g.a_dim(), f.source_arity(), g.target_arity());
        for (j, k, mu) in c.delta_of(i) {
            if g.components[*j].is_zero() || f.components[*k].is_zero() {
                continue;
            }
            let prod = match cache.get(&(*j, *k)) {
                Some(p) => p,
                None => {
                    let p = g.components[*j].compose(&f.components[*k])?;
                    cache.entry((*j, *k)).or_insert(p)
                }
            };
            acc.add_scaled(mu, prod);
        }
        components.push(acc);
    }
    Ok(ConvMorphism {
        coalgebra: c.clone(),
        components,
    })
}

/// `(f⊗f′)(c) = Σ μ_c^{jk} f_j ⊗ f′_k`; requires `C` cocommutative.
pub fn conv_tensor(f: &ConvMorphism, f2: &ConvMorphism) -> Result<ConvMorphism> {
    f.same_coalgebra(f2)?;
    let c = &f.coalgebra;
    if !c.is_cocommutative() {
        return Err(Error::NotCocommutative);
    }
    if f.a_dim() != f2.a_dim() {
        return Err(Error::ShapeError("tensor factors act on different A".into()));
    }
    let (p, q) = (
        f.source_arity() + f2.source_arity(),
        f.target_arity() + f2.target_arity(),
    );
    let mut components = Vec::with_capacity(c.dim());
    for i in 0..c.dim() {
        let mut acc = MultiMap::zero(c.field(), f.a_dim(), p, q);
        for (j, k, mu) in c.delta_of(i) {
            if f.components[*j].is_zero() || f2.components[*k].is_zero() {
                continue;
            }
            acc.add_scaled(mu, &f.components[*j].tensor(&f2.components[*k])?);
        }
        components.push(acc);
    }
    Ok(ConvMorphism {
        coalgebra: c.clone(),
        components,
    })
}

/// `m∗(m⊗A) − m∗(A⊗m)` for `m` with values in `Hom(A⊗A, A)`.
pub fn associator(m: &ConvMorphism) -> Result<ConvMorphism> {
    if (m.source_arity(), m.target_arity()) != (2, 1) {
        return Err(Error::ShapeError("a multiplication maps A⊗A → A".into()));
    }
    let id = ConvMorphism::identity(m.coalgebra.clone(), m.a_dim(), 1);
    let left = conv_compose(m, &conv_tensor(m, &id)?)?;
    let right = conv_compose(m, &conv_tensor(&id, m)?)?;
    left.sub(&right)
}

pub fn is_associative(m: &ConvMorphism) -> Result<bool> {
    Ok(associator(m)?.is_zero())
}

/// True when `L` (a `dim T × dim S` matrix) is a coalgebra morphism `S → T`.
pub fn is_coalgebra_morphism(l: &Matrix, source: &Coalgebra, target: &Coalgebra) -> bool {
    if l.shape() != (target.dim(), source.dim()) || l.field() != source.field() {
        return false;
    }
    let counit_ok = Matrix::column(target.field(), target.counit())
        .transpose()
        .checked_mul(l)
        .map(|m| m.row(0) == source.counit());
    counit_ok == Ok(true) && &target.delta_matrix() * l == &l.kron(l) * &source.delta_matrix()
}

/// `ι^*(f) = f∘ι` for a coalgebra morphism `ι: C → C̃`, given as a `dim C̃ × dim C` matrix.
pub fn pullback(f: &ConvMorphism, iota: &Matrix, c: Arc<Coalgebra>) -> Result<ConvMorphism> {
    if !is_coalgebra_morphism(iota, &c, &f.coalgebra) {
        return Err(Error::CoalgebraMismatch("ι is not a coalgebra morphism C → C̃".into()));
    }
    f.along_linear(iota, c)
}

/// An increasing, exhaustive coalgebra filtration `C_0 ⊆ C_1 ⊆ … ⊆ C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Filtration {
    layers: Vec<Subspace>,
}

impl Filtration {
    /// `C_n = C_{≤n}` from the grading.
    pub fn from_grading(c: &Coalgebra) -> Result<Filtration> {
        let deg = c.grading().ok_or(Error::NoFiltration)?;
        let top = deg.iter().copied().max().unwrap_or(0);
        let layers = (0..=top)
            .map(|n| Subspace::coordinate(c.field(), c.dim(), (0..c.dim()).filter(|&i| deg[i] <= n)))
            .collect();
        Ok(Filtration { layers })
    }

    /// The coradical filtration started at `c0`.
    pub fn coradical(c: &Coalgebra, c0: &Subspace) -> Result<Filtration> {
        Ok(Filtration {
            layers: c.coradical_filtration(c0)?,
        })
    }

    /// Caller-supplied layers; must be a coalgebra filtration ending at `C`.
    pub fn custom(c: &Coalgebra, layers: Vec<Subspace>) -> Result<Filtration> {
        if layers.is_empty() || !layers.last().is_some_and(Subspace::is_full) {
            return Err(Error::InvalidCoalgebra(
                "filtration must end at the whole coalgebra".into(),
            ));
        }
        if !c.is_coalgebra_filtration(&layers) {
            return Err(Error::InvalidCoalgebra(
                "layers do not form a coalgebra filtration".into(),
            ));
        }
        Ok(Filtration { layers })
    }

    /// The attached filtration if any, else the grading one.
    pub fn of(c: &Coalgebra) -> Result<Filtration> {
        match c.filtration() {
            Some(l) => Ok(Filtration { layers: l.to_vec() }),
            None => Filtration::from_grading(c),
        }
    }

    pub fn layers(&self) -> &[Subspace] {
        &self.layers
    }

    /// `C_n`; layers past the top are all of `C`.
    pub fn layer(&self, n: usize) -> &Subspace {
        &self.layers[n.min(self.layers.len() - 1)]
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }
}

/// `f ≡_n g`: `f − g` vanishes on `C_n`.
pub fn congruent_mod(f: &ConvMorphism, g: &ConvMorphism, n: usize, filtration: Option<&Filtration>) -> Result<bool> {
    let filtration = filtration.ok_or(Error::NoFiltration)?;
    let diff = f.sub(g)?;
    if filtration.layer(0).ambient() != f.coalgebra.dim() {
        return Err(Error::ShapeError("filtration lives on another coalgebra".into()));
    }
    Ok(filtration
        .layer(n)
        .basis_vectors()
        .iter()
        .all(|v| diff.eval(v).is_zero()))
}

/// Convolution inverse of `f`, built layer by layer along the filtration:
/// a right inverse on `C_0` by a linear solve, then `g ← g∗(Id + h)` with
/// `h = Id − f∗g`, which kills `h` one layer further each time.
pub fn takeuchi_invert(f: &ConvMorphism, filtration: &Filtration) -> Result<ConvMorphism> {
    if f.source_arity() != f.target_arity() {
        return Err(Error::ShapeError(
            "only endomorphism-valued maps can be inverted".into(),
        ));
    }
    let c = f.coalgebra.clone();
    if filtration.layer(0).ambient() != c.dim() {
        return Err(Error::ShapeError("filtration lives on another coalgebra".into()));
    }
    let id = ConvMorphism::identity(c.clone(), f.a_dim(), f.source_arity());
    let mut g = bottom_layer_inverse(f, filtration.layer(0))?;
    for _ in 1..filtration.len() {
        let h = id.sub(&conv_compose(f, &g)?)?;
        if h.is_zero() {
            break;
        }
        g = conv_compose(&g, &id.add(&h)?)?;
    }
    if conv_compose(f, &g)? != id || conv_compose(&g, f)? != id {
        return Err(Error::NotInvertible(
            "inverse does not close on the full coalgebra".into(),
        ));
    }
    Ok(g)
}

/// Solves `(f∗g)(v) = ε(v)·Id` for `v ∈ C_0`; unknowns are all components of `g`,
/// free ones set to zero.
fn bottom_layer_inverse(f: &ConvMorphism, c0: &Subspace) -> Result<ConvMorphism> {
    let c = &f.coalgebra;
    let field = c.field();
    let d = f.components[0].matrix.rows();
    let n = c.dim();
    let basis = c0.basis_vectors();
    // Row (b, r, s) ↔ entry (r,s) of (f∗g)(v_b); column (k, t, s) ↔ g_k[t,s].
    let mut sys = Matrix::zeros(field, basis.len() * d * d, n * d * d);
    let mut rhs = Matrix::zeros(field, basis.len() * d * d, 1);
    for (b, v) in basis.iter().enumerate() {
        let eps = c.apply_counit(v);
        for (ci, vc) in v.iter().enumerate() {
            if vc.is_zero() {
                continue;
            }
            for (j, k, mu) in c.delta_of(ci) {
                let coeff = vc * mu;
                let fj = f.components[*j].matrix();
                for r in 0..d {
                    for t in 0..d {
                        let a = fj.get(r, t);
                        if a.is_zero() {
                            continue;
                        }
                        let w = a * &coeff;
                        for s in 0..d {
                            sys.entry_mut((b * d + r) * d + s, (k * d + t) * d + s)
                                .add_mul(&w, &field.one());
                        }
                    }
                }
            }
        }
        for r in 0..d {
            rhs.set((b * d + r) * d + r, 0, eps.clone());
        }
    }
    let sol = sys
        .solve(&rhs)?
        .ok_or_else(|| Error::NotInvertible("f is singular on the bottom filtration layer".into()))?;
    let x = sol.particular.column_vector(0);
    let components = (0..n)
        .map(|k| {
            let m = Matrix::from_fn(field, d, d, |t, s| x[(k * d + t) * d + s].clone());
            MultiMap {
                matrix: m,
                ..f.components[0].clone()
            }
        })
        .collect();
    Ok(ConvMorphism {
        coalgebra: c.clone(),
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const Q: Field = Field::Rational;

    fn random_map(rng: &mut ChaCha8Rng, field: Field, a: usize, p: usize, q: usize) -> MultiMap {
        let m = Matrix::from_fn(field, power(a, q), power(a, p), |_, _| {
            field.from_i64(rng.gen_range(-2..3))
        });
        MultiMap::new(a, p, q, m).unwrap()
    }

    fn random_morphism(rng: &mut ChaCha8Rng, c: &Arc<Coalgebra>, a: usize, p: usize, q: usize) -> ConvMorphism {
        let comps = (0..c.dim()).map(|_| random_map(rng, c.field(), a, p, q)).collect();
        ConvMorphism::new(c.clone(), comps).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = Arc::new(Coalgebra::divided_power(Q, 2));
        let f = random_morphism(&mut rng, &c, 2, 1, 1);
        let id = ConvMorphism::identity(c.clone(), 2, 1);
        assert_eq!(conv_compose(&id, &f).unwrap(), f);
        assert_eq!(conv_compose(&f, &id).unwrap(), f);
    }

    #[test]
    fn divided_power_composition_is_cauchy_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = Arc::new(Coalgebra::divided_power(Q, 3));
        let f = random_morphism(&mut rng, &c, 2, 1, 1);
        let g = random_morphism(&mut rng, &c, 2, 1, 1);
        let fg = conv_compose(&f, &g).unwrap();
        for n in 0..=3 {
            let mut expect = MultiMap::zero(Q, 2, 1, 1);
            for i in 0..=n {
                expect = expect
                    .add(&f.component(i).compose(g.component(n - i)).unwrap())
                    .unwrap();
            }
            assert_eq!(fg.component(n), &expect);
        }
        let ft = conv_tensor(&f, &g).unwrap();
        let mut expect = MultiMap::zero(Q, 2, 2, 2);
        for i in 0..=2 {
            expect = expect.add(&f.component(i).tensor(g.component(2 - i)).unwrap()).unwrap();
        }
        assert_eq!(ft.component(2), &expect);
    }

    #[test]
    fn trivial_coalgebra_is_plain_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = Arc::new(Coalgebra::trivial(Q));
        let f = random_morphism(&mut rng, &k, 3, 1, 1);
        let g = random_morphism(&mut rng, &k, 3, 2, 1);
        let fg = conv_compose(&f, &g).unwrap();
        assert_eq!(fg.component(0), &f.component(0).compose(g.component(0)).unwrap());
    }

    #[test]
    fn epsilon_embedded_identities_tensor() {
        let c = Arc::new(Coalgebra::polynomial(Q, 2, 2));
        let id = ConvMorphism::identity(c.clone(), 2, 1);
        assert_eq!(conv_tensor(&id, &id).unwrap(), ConvMorphism::identity(c, 2, 2));
    }

    #[test]
    fn interchange_law_over_f5() {
        let f5 = Field::prime(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for c in [Coalgebra::group_like(f5, 2), Coalgebra::divided_power(f5, 2)] {
            let c = Arc::new(c);
            let f = random_morphism(&mut rng, &c, 2, 1, 1);
            let g = random_morphism(&mut rng, &c, 2, 1, 1);
            let f2 = random_morphism(&mut rng, &c, 2, 1, 1);
            let g2 = random_morphism(&mut rng, &c, 2, 1, 1);
            let lhs = conv_compose(&conv_tensor(&f, &g).unwrap(), &conv_tensor(&f2, &g2).unwrap()).unwrap();
            let rhs = conv_tensor(&conv_compose(&f, &f2).unwrap(), &conv_compose(&g, &g2).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn non_cocommutative_tensor_rejected() {
        // Matrix coalgebra M_2^*: Δ(e_ij) = Σ_k e_ik ⊗ e_kj.
        let names = ["e11", "e12", "e21", "e22"].iter().map(|s| s.to_string()).collect();
        let idx = |i: usize, j: usize| i * 2 + j;
        let mut triples = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    triples.push((idx(i, j), idx(i, k), idx(k, j), Q.one()));
                }
            }
        }
        let counit = vec![Q.one(), Q.zero(), Q.zero(), Q.one()];
        let c = Arc::new(Coalgebra::new(Q, names, triples, counit).unwrap());
        let id = ConvMorphism::identity(c, 1, 1);
        assert!(matches!(conv_tensor(&id, &id), Err(Error::NotCocommutative)));
    }

    #[test]
    fn pullbacks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let k = Arc::new(Coalgebra::trivial(Q));
        let d = Arc::new(Coalgebra::divided_power(Q, 2));
        let f = random_morphism(&mut rng, &d, 2, 2, 1);
        let iota = Matrix::from_i64(Q, &[&[1], &[0], &[0]]);
        let pulled = pullback(&f, &iota, k.clone()).unwrap();
        assert_eq!(pulled.component(0), f.component(0));
        let id3 = Matrix::identity(Q, 3);
        assert_eq!(pullback(&f, &id3, d.clone()).unwrap(), f);
        let e = ConvMorphism::epsilon_embed(f.component(1), d.clone());
        assert_eq!(
            pullback(&e, &iota, k.clone()).unwrap(),
            ConvMorphism::epsilon_embed(f.component(1), k.clone())
        );
        // t ↦ 1 is not a coalgebra map.
        let bad = Matrix::from_i64(Q, &[&[0], &[1], &[0]]);
        assert!(pullback(&f, &bad, k).is_err());
    }

    #[test]
    fn congruence_on_divided_powers() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let d = Arc::new(Coalgebra::divided_power(Q, 3));
        let filt = Filtration::from_grading(&d).unwrap();
        let f = random_morphism(&mut rng, &d, 2, 1, 1);
        let bumped = f
            .clone()
            .with_component(3, f.component(3).add(&MultiMap::identity(Q, 2, 1)).unwrap())
            .unwrap();
        assert!(congruent_mod(&f, &f, 3, Some(&filt)).unwrap());
        assert!(congruent_mod(&f, &bumped, 2, Some(&filt)).unwrap());
        assert!(!congruent_mod(&f, &bumped, 3, Some(&filt)).unwrap());
        assert!(matches!(congruent_mod(&f, &f, 0, None), Err(Error::NoFiltration)));

        // f ≡_1 0 and f′ ≡_0 0 give f⊗f′ ≡_2 0.
        let mut a = random_morphism(&mut rng, &d, 2, 1, 1);
        let mut b = random_morphism(&mut rng, &d, 2, 1, 1);
        for i in 0..=1 {
            a = a.with_component(i, MultiMap::zero(Q, 2, 1, 1)).unwrap();
        }
        b = b.with_component(0, MultiMap::zero(Q, 2, 1, 1)).unwrap();
        let t = conv_tensor(&a, &b).unwrap();
        assert!(congruent_mod(&t, &ConvMorphism::zero(d.clone(), 2, 2, 2), 2, Some(&filt)).unwrap());
    }

    #[test]
    fn geometric_series_inverse() {
        let d = Arc::new(Coalgebra::divided_power(Q, 2));
        let n = Matrix::from_i64(Q, &[&[1, 2], &[0, 3]]);
        let id = MultiMap::identity(Q, 2, 1);
        let nm = MultiMap::new(2, 1, 1, n.clone()).unwrap();
        let f = ConvMorphism::new(d.clone(), vec![id.clone(), nm.clone(), MultiMap::zero(Q, 2, 1, 1)]).unwrap();
        let g = takeuchi_invert(&f, &Filtration::from_grading(&d).unwrap()).unwrap();
        assert_eq!(g.component(0), &id);
        assert_eq!(g.component(1), &nm.scale(&-Q.one()));
        assert_eq!(g.component(2).matrix(), &(&n * &n));
    }

    #[test]
    fn singular_bottom_layer() {
        let d = Arc::new(Coalgebra::divided_power(Q, 1));
        let f = ConvMorphism::zero(d.clone(), 2, 1, 1);
        assert!(matches!(
            takeuchi_invert(&f, &Filtration::from_grading(&d).unwrap()),
            Err(Error::NotInvertible(_))
        ));
    }

    #[test]
    fn inversion_over_grouplikes_and_coradical() {
        let f3 = Field::prime(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c =
            Arc::new(Coalgebra::direct_sum(&[Coalgebra::divided_power(f3, 2), Coalgebra::group_like(f3, 1)]).unwrap());
        let c0 = Subspace::coordinate(f3, c.dim(), [0, 3]);
        let filt = Filtration::coradical(&c, &c0).unwrap();
        let mut done = 0;
        while done < 5 {
            let f = random_morphism(&mut rng, &c, 2, 1, 1);
            match takeuchi_invert(&f, &filt) {
                Ok(g) => {
                    let id = ConvMorphism::identity(c.clone(), 2, 1);
                    assert_eq!(conv_compose(&f, &g).unwrap(), id);
                    done += 1;
                }
                Err(Error::NotInvertible(_)) => {
                    let singular = [0, 3].iter().any(|&i| f.component(i).matrix().inverse().is_none());
                    assert!(singular);
                }
                Err(e) => panic!("{e}"),
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn associativity_and_pullback_functoriality(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = Arc::new(Coalgebra::divided_power(Q, 2));
            let f = random_morphism(&mut rng, &d, 2, 1, 1);
            let g = random_morphism(&mut rng, &d, 2, 1, 1);
            let h = random_morphism(&mut rng, &d, 2, 1, 1);
            let left = conv_compose(&conv_compose(&f, &g).unwrap(), &h).unwrap();
            let right = conv_compose(&f, &conv_compose(&g, &h).unwrap()).unwrap();
            prop_assert_eq!(left, right);

            let d1 = Arc::new(Coalgebra::divided_power(Q, 1));
            let iota = Matrix::from_i64(Q, &[&[1, 0], &[0, 1], &[0, 0]]);
            let pf = pullback(&f, &iota, d1.clone()).unwrap();
            let pg = pullback(&g, &iota, d1.clone()).unwrap();
            prop_assert_eq!(pullback(&conv_compose(&f, &g).unwrap(), &iota, d1.clone()).unwrap(), conv_compose(&pf, &pg).unwrap());
            prop_assert_eq!(pullback(&conv_tensor(&f, &g).unwrap(), &iota, d1.clone()).unwrap(), conv_tensor(&pf, &pg).unwrap());
        }
    }
}
