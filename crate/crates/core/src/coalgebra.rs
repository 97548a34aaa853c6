//! Finite-dimensional coalgebras given by structure constants.
//!
//! A coalgebra on basis `e_0, …, e_{d-1}` stores `Δ(e_i) = Σ μ_i^{jk} e_j ⊗ e_k` as
//! sparse triples and the counit as a vector. Tensors in `C^{⊗p}` are dense
//! coordinate vectors flattened lexicographically, first factor major.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Vector};
use crate::scalar::{Field, Scalar};
use crate::subspace::Subspace;

/// A sparse structure-constant entry `(j, k, μ)` of `Δ(e_i)`.
pub type DeltaTerm = (usize, usize, Scalar);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coalgebra {
    field: Field,
    names: Vec<String>,
    delta: Vec<Vec<DeltaTerm>>,
    counit: Vector,
    grading: Option<Vec<usize>>,
    filtration: Option<Vec<Subspace>>,
}

/// Element of `C^{⊗order}` in dense coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tensor {
    pub dim: usize,
    pub order: usize,
    pub coeffs: Vector,
}

impl Tensor {
    pub fn zero(field: Field, dim: usize, order: usize) -> Tensor {
        Tensor {
            dim,
            order,
            coeffs: vec![field.zero(); dim.pow(order as u32)],
        }
    }

    /// Multi-index of a flat position.
    pub fn index_of(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.order];
        for slot in (0..self.order).rev() {
            idx[slot] = flat % self.dim;
            flat /= self.dim;
        }
        idx
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    /// Nonzero coefficients with their multi-indices.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, &Scalar)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_zero())
            .map(|(f, s)| (self.index_of(f), s))
    }
}

/// Result of [`Coalgebra::validate`]; one flag per axiom.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub coassociative: bool,
    pub counit_left: bool,
    pub counit_right: bool,
    pub cocommutative: bool,
    pub grading: Option<bool>,
    pub filtration: Option<bool>,
}

impl ValidationReport {
    /// All coalgebra axioms (and any supplied grading or filtration) hold.
    /// Cocommutativity is reported separately and not required here.
    pub fn is_valid(&self) -> bool {
        self.coassociative
            && self.counit_left
            && self.counit_right
            && self.grading.unwrap_or(true)
            && self.filtration.unwrap_or(true)
    }

    fn first_failure(&self) -> Option<&'static str> {
        [
            (self.coassociative, "coassociativity"),
            (self.counit_left, "left counit"),
            (self.counit_right, "right counit"),
            (self.grading.unwrap_or(true), "grading"),
            (self.filtration.unwrap_or(true), "filtration"),
        ]
        .into_iter()
        .find(|(ok, _)| !ok)
        .map(|(_, name)| name)
    }
}

/// Group-like elements `g` with `Δ(g) = g ⊗ g`, `ε(g) = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupLikeSet {
    pub elements: Vec<Vector>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupLikeSearch {
    BasisOnly,
    /// Enumerate every vector of a small prime-field coalgebra.
    Exhaustive,
}

impl Coalgebra {
    /// Builds a coalgebra from `(i, j, k, μ)` triples meaning `Δ(e_i) ∋ μ e_j ⊗ e_k`.
    /// Repeated triples are summed. Axioms are not checked; see [`Coalgebra::validate`]
    /// and [`Coalgebra::checked`].
    pub fn new(
        field: Field,
        names: Vec<String>,
        triples: impl IntoIterator<Item = (usize, usize, usize, Scalar)>,
        counit: Vector,
    ) -> Result<Coalgebra> {
        let dim = names.len();
        if dim == 0 {
            return Err(Error::InvalidCoalgebra("coalgebra must be nonzero".into()));
        }
        if counit.len() != dim {
            return Err(Error::ShapeError(format!(
                "counit has {} entries for dimension {dim}",
                counit.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for n in &names {
            if !seen.insert(n) {
                return Err(Error::InvalidCoalgebra(format!("duplicate basis name {n:?}")));
            }
        }
        for s in &counit {
            if s.field() != field {
                return Err(Error::FieldMismatch(field.to_string(), s.field().to_string()));
            }
        }
        let mut acc: Vec<BTreeMap<(usize, usize), Scalar>> = vec![BTreeMap::new(); dim];
        for (i, j, k, v) in triples {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::ShapeError(format!(
                    "triple ({i},{j},{k}) out of range for dimension {dim}"
                )));
            }
            if v.field() != field {
                return Err(Error::FieldMismatch(field.to_string(), v.field().to_string()));
            }
            *acc[i].entry((j, k)).or_insert_with(|| field.zero()) += &v;
        }
        let delta = acc
            .into_iter()
            .map(|m| {
                m.into_iter()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|((j, k), v)| (j, k, v))
                    .collect()
            })
            .collect();
        Ok(Coalgebra {
            field,
            names,
            delta,
            counit,
            grading: None,
            filtration: None,
        })
    }

    /// [`Coalgebra::new`] followed by validation of every axiom.
    pub fn checked(
        field: Field,
        names: Vec<String>,
        triples: impl IntoIterator<Item = (usize, usize, usize, Scalar)>,
        counit: Vector,
    ) -> Result<Coalgebra> {
        let c = Coalgebra::new(field, names, triples, counit)?;
        c.ensure_valid()?;
        Ok(c)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        match self.validate().first_failure() {
            None => Ok(()),
            Some(axiom) => Err(Error::InvalidCoalgebra(format!("{axiom} fails"))),
        }
    }

    pub fn with_grading(mut self, degrees: Vec<usize>) -> Result<Coalgebra> {
        if degrees.len() != self.dim() {
            return Err(Error::ShapeError("one degree per basis element is required".into()));
        }
        self.grading = Some(degrees);
        Ok(self)
    }

    pub fn with_filtration(mut self, layers: Vec<Subspace>) -> Result<Coalgebra> {
        if layers
            .iter()
            .any(|l| l.ambient() != self.dim() || l.field() != self.field)
        {
            return Err(Error::ShapeError(
                "filtration layer does not live in this coalgebra".into(),
            ));
        }
        self.filtration = Some(layers);
        Ok(self)
    }

    pub fn without_grading(mut self) -> Coalgebra {
        self.grading = None;
        self
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Structure constants of `Δ(e_i)`, sorted by `(j, k)`.
    pub fn delta_of(&self, i: usize) -> &[DeltaTerm] {
        &self.delta[i]
    }

    /// All triples `(i, j, k, μ)`.
    pub fn triples(&self) -> Vec<(usize, usize, usize, Scalar)> {
        self.delta
            .iter()
            .enumerate()
            .flat_map(|(i, ts)| ts.iter().map(move |(j, k, v)| (i, *j, *k, v.clone())))
            .collect()
    }

    pub fn counit(&self) -> &[Scalar] {
        &self.counit
    }

    pub fn grading(&self) -> Option<&[usize]> {
        self.grading.as_deref()
    }

    pub fn filtration(&self) -> Option<&[Subspace]> {
        self.filtration.as_deref()
    }

    pub fn basis_vector(&self, i: usize) -> Vector {
        let mut v = vec![self.field.zero(); self.dim()];
        v[i] = self.field.one();
        v
    }

    pub fn apply_counit(&self, v: &[Scalar]) -> Scalar {
        let mut acc = self.field.zero();
        for (a, b) in self.counit.iter().zip(v) {
            acc.add_mul(a, b);
        }
        acc
    }

    /// `Δ` as a `dim² × dim` matrix (column `i` is `Δ(e_i)`).
    pub fn delta_matrix(&self) -> Matrix {
        let d = self.dim();
        let mut m = Matrix::zeros(self.field, d * d, d);
        for (i, terms) in self.delta.iter().enumerate() {
            for (j, k, v) in terms {
                m.set(j * d + k, i, v.clone());
            }
        }
        m
    }

    /// Applies `Δ` in tensor slot `slot` (0-based), raising the order by one.
    pub fn expand_slot(&self, t: &Tensor, slot: usize) -> Tensor {
        assert!(slot < t.order, "slot {slot} out of range for order {}", t.order);
        let d = self.dim();
        let mut out = Tensor::zero(self.field, d, t.order + 1);
        for (idx, coeff) in t.terms() {
            for (j, k, mu) in &self.delta[idx[slot]] {
                let mut nidx = Vec::with_capacity(t.order + 1);
                nidx.extend_from_slice(&idx[..slot]);
                nidx.push(*j);
                nidx.push(*k);
                nidx.extend_from_slice(&idx[slot + 1..]);
                let f = out.flat(&nidx);
                out.coeffs[f].add_mul(coeff, mu);
            }
        }
        out
    }

    /// `Δ^{p-1}(c) ∈ C^{⊗p}`, expanding the first slot at every step.
    pub fn iterated_delta(&self, c: &[Scalar], p: usize) -> Tensor {
        self.iterated_delta_by(c, p, |_| 0)
    }

    /// `Δ^{p-1}(c)` where step `s` (1-based) expands the slot chosen by `choose(s)`,
    /// clamped to the current order. Coassociativity makes the result independent
    /// of the choice.
    pub fn iterated_delta_by(&self, c: &[Scalar], p: usize, choose: impl Fn(usize) -> usize) -> Tensor {
        assert!(p >= 1, "iterated comultiplication needs p ≥ 1");
        assert_eq!(c.len(), self.dim());
        let mut t = Tensor {
            dim: self.dim(),
            order: 1,
            coeffs: c.to_vec(),
        };
        for step in 1..p {
            let slot = choose(step).min(t.order - 1);
            t = self.expand_slot(&t, slot);
        }
        t
    }

    /// Checks every axiom and reports each separately.
    pub fn validate(&self) -> ValidationReport {
        let d = self.dim();
        let mut coassociative = true;
        let mut counit_left = true;
        let mut counit_right = true;
        let mut cocommutative = true;
        for i in 0..d {
            let e = self.basis_vector(i);
            let two = self.iterated_delta(&e, 2);
            let left = self.expand_slot(&two, 0);
            let right = self.expand_slot(&two, 1);
            coassociative &= left == right;

            let mut l = vec![self.field.zero(); d];
            let mut r = vec![self.field.zero(); d];
            for (j, k, mu) in &self.delta[i] {
                l[*k].add_mul(&self.counit[*j], mu);
                r[*j].add_mul(&self.counit[*k], mu);
            }
            counit_left &= l == e;
            counit_right &= r == e;

            let mut flipped: Vec<DeltaTerm> = self.delta[i].iter().map(|(j, k, v)| (*k, *j, v.clone())).collect();
            flipped.sort_by_key(|t| (t.0, t.1));
            cocommutative &= flipped == self.delta[i];
        }
        let grading = self.grading.as_ref().map(|deg| {
            (0..d).all(|i| {
                self.delta[i].iter().all(|(j, k, _)| deg[*j] + deg[*k] == deg[i])
                    && (deg[i] == 0 || self.counit[i].is_zero())
            })
        });
        let filtration = self
            .filtration
            .as_ref()
            .map(|layers| self.is_coalgebra_filtration(layers));
        ValidationReport {
            coassociative,
            counit_left,
            counit_right,
            cocommutative,
            grading,
            filtration,
        }
    }

    pub fn is_cocommutative(&self) -> bool {
        self.delta.iter().all(|terms| {
            let mut flipped: Vec<DeltaTerm> = terms.iter().map(|(j, k, v)| (*k, *j, v.clone())).collect();
            flipped.sort_by_key(|t| (t.0, t.1));
            flipped == *terms
        })
    }

    /// Increasing, exhaustive, and `Δ(C_n) ⊆ Σ_i C_i ⊗ C_{n−i}`.
    pub fn is_coalgebra_filtration(&self, layers: &[Subspace]) -> bool {
        let Some(last) = layers.last() else { return false };
        if !last.is_full() {
            return false;
        }
        if layers.windows(2).any(|w| !w[0].is_subspace_of(&w[1])) {
            return false;
        }
        let dm = self.delta_matrix();
        (0..layers.len()).all(|n| {
            let target = (0..=n)
                .map(|i| layers[i].tensor(&layers[n - i]))
                .reduce(|a, b| a.sum(&b).expect("same ambient"))
                .expect("at least one term");
            layers[n].image(&dm).expect("shapes match").is_subspace_of(&target)
        })
    }

    /// Indices of basis elements of degree `n`.
    pub fn degree_indices(&self, n: usize) -> Result<Vec<usize>> {
        let deg = self.grading.as_ref().ok_or(Error::NotGraded)?;
        Ok((0..self.dim()).filter(|&i| deg[i] == n).collect())
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.grading.as_ref().map(|g| g.iter().copied().max().unwrap_or(0))
    }

    /// Degree of a vector if it is homogeneous (the zero vector has every degree; `None`).
    pub fn degree_of(&self, c: &[Scalar]) -> Result<Option<usize>> {
        let deg = self.grading.as_ref().ok_or(Error::NotGraded)?;
        let mut found = None;
        for (i, s) in c.iter().enumerate() {
            if s.is_zero() {
                continue;
            }
            match found {
                None => found = Some(deg[i]),
                Some(d) if d != deg[i] => return Err(Error::InvalidCoalgebra("vector is not homogeneous".into())),
                _ => {}
            }
        }
        Ok(found)
    }

    /// The `C^{i_1} ⊗ … ⊗ C^{i_p}` component of `Δ^{p−1}(c)` for homogeneous `c`.
    pub fn delta_component(&self, c: &[Scalar], multi_index: &[usize]) -> Result<Tensor> {
        let deg = self.grading.clone().ok_or(Error::NotGraded)?;
        let total: usize = multi_index.iter().sum();
        if let Some(d) = self.degree_of(c)? {
            if d != total {
                return Err(Error::DegreeMismatch {
                    expected: d,
                    found: total,
                });
            }
        }
        let mut t = self.iterated_delta(c, multi_index.len().max(1));
        for f in 0..t.coeffs.len() {
            let idx = t.index_of(f);
            if idx.iter().zip(multi_index).any(|(&b, &want)| deg[b] != want) {
                t.coeffs[f] = self.field.zero();
            }
        }
        Ok(t)
    }

    /// Iterated preimage filtration `C_{n+1} = Δ^{-1}(C ⊗ C_n + C_0 ⊗ C)` starting from
    /// a caller-supplied subcoalgebra `C_0`; stops once `C` is reached.
    pub fn coradical_filtration(&self, c0: &Subspace) -> Result<Vec<Subspace>> {
        let d = self.dim();
        if c0.ambient() != d {
            return Err(Error::ShapeError("C_0 must live in the coalgebra".into()));
        }
        let dm = self.delta_matrix();
        if !c0.image(&dm)?.is_subspace_of(&c0.tensor(c0)) {
            return Err(Error::InvalidCoalgebra("C_0 is not a subcoalgebra".into()));
        }
        let full = Subspace::full(self.field, d);
        let c0_right = c0.tensor(&full);
        let mut chain = vec![c0.clone()];
        loop {
            let current = chain.last().expect("nonempty");
            if current.is_full() {
                return Ok(chain);
            }
            let target = full.tensor(current).sum(&c0_right)?;
            let next = Subspace::preimage(&dm, &target)?;
            if next == *current {
                return Err(Error::NotExhaustive {
                    reached: current.dim(),
                    dim: d,
                });
            }
            chain.push(next);
        }
    }

    fn is_grouplike(&self, v: &[Scalar]) -> bool {
        if !self.apply_counit(v).is_one() {
            return false;
        }
        let dv = self.iterated_delta(v, 2);
        let vv: Vector = v.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect();
        dv.coeffs == vv
    }

    pub fn find_grouplikes(&self, mode: GroupLikeSearch) -> Result<GroupLikeSet> {
        let elements = match mode {
            GroupLikeSearch::BasisOnly => (0..self.dim())
                .map(|i| self.basis_vector(i))
                .filter(|v| self.is_grouplike(v))
                .collect(),
            GroupLikeSearch::Exhaustive => {
                let Field::Prime(p) = self.field else {
                    return Err(Error::UnsupportedSearch("exhaustive search needs a prime field".into()));
                };
                let total = (p as u128).checked_pow(self.dim() as u32).unwrap_or(u128::MAX);
                if total > 1_000_000 {
                    return Err(Error::UnsupportedSearch(format!(
                        "{p}^{} candidates exceed 10^6",
                        self.dim()
                    )));
                }
                let mut out = Vec::new();
                for mut code in 0..total as u64 {
                    let mut v = vec![self.field.zero(); self.dim()];
                    for slot in (0..self.dim()).rev() {
                        v[slot] = self.field.from_i64((code % p) as i64);
                        code /= p;
                    }
                    if self.is_grouplike(&v) {
                        out.push(v);
                    }
                }
                out
            }
        };
        Ok(GroupLikeSet { elements })
    }

    /// Subcoalgebra spanned by the given basis elements, in the given order.
    /// Fails unless the span is closed under `Δ`.
    pub fn restrict(&self, indices: &[usize]) -> Result<Coalgebra> {
        let pos: BTreeMap<usize, usize> = indices.iter().enumerate().map(|(a, &b)| (b, a)).collect();
        let mut triples = Vec::new();
        for (new_i, &i) in indices.iter().enumerate() {
            for (j, k, v) in &self.delta[i] {
                match (pos.get(j), pos.get(k)) {
                    (Some(&nj), Some(&nk)) => triples.push((new_i, nj, nk, v.clone())),
                    _ => {
                        return Err(Error::InvalidCoalgebra(format!(
                            "span is not closed under Δ at {}",
                            self.names[i]
                        )))
                    }
                }
            }
        }
        let names = indices.iter().map(|&i| self.names[i].clone()).collect();
        let counit = indices.iter().map(|&i| self.counit[i].clone()).collect();
        let mut c = Coalgebra::new(self.field, names, triples, counit)?;
        if let Some(g) = &self.grading {
            c.grading = Some(indices.iter().map(|&i| g[i]).collect());
        }
        Ok(c)
    }

    /// Subcoalgebra of elements of degree `< n`.
    pub fn below_degree(&self, n: usize) -> Result<Coalgebra> {
        let deg = self.grading.as_ref().ok_or(Error::NotGraded)?;
        let idx: Vec<usize> = (0..self.dim()).filter(|&i| deg[i] < n).collect();
        self.restrict(&idx)
    }

    /// Basis reordered by degree (stable). Returns the reordered coalgebra and the
    /// permutation `new position → old index`.
    pub fn sorted_by_degree(&self) -> Result<(Coalgebra, Vec<usize>)> {
        let deg = self.grading.as_ref().ok_or(Error::NotGraded)?;
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by_key(|&i| deg[i]);
        Ok((self.restrict(&order)?, order))
    }

    /// The one-dimensional coalgebra `𝕜`.
    pub fn trivial(field: Field) -> Coalgebra {
        Coalgebra::new(field, vec!["1".into()], [(0, 0, 0, field.one())], vec![field.one()])
            .and_then(|c| c.with_grading(vec![0]))
            .expect("trivial coalgebra is well-formed")
    }

    /// `𝕜[t]_{≤N}` with `Δ(t^n) = Σ_{i+j=n} t^i ⊗ t^j`.
    pub fn divided_power(field: Field, n: usize) -> Coalgebra {
        Coalgebra::polynomial(field, 1, n)
    }

    /// Monomials of total degree ≤ `n` in `r` variables with
    /// `Δ(t^P) = Σ_{Q+R=P} t^Q ⊗ t^R`, ordered by degree and then by exponent
    /// vector (larger exponent of `t1` first).
    pub fn polynomial(field: Field, r: usize, n: usize) -> Coalgebra {
        assert!(r >= 1, "at least one variable");
        let mut monomials: Vec<Vec<usize>> = Vec::new();
        for deg in 0..=n {
            let mut layer = Vec::new();
            compositions(deg, r, &mut Vec::new(), &mut layer);
            monomials.extend(layer);
        }
        let index: BTreeMap<Vec<usize>, usize> = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let mut triples = Vec::new();
        for (i, p) in monomials.iter().enumerate() {
            let mut q = vec![0; r];
            loop {
                let rest: Vec<usize> = p.iter().zip(&q).map(|(a, b)| a - b).collect();
                triples.push((i, index[&q], index[&rest], field.one()));
                // Next q ≤ p in the product order.
                let mut slot = 0;
                while slot < r && q[slot] == p[slot] {
                    q[slot] = 0;
                    slot += 1;
                }
                if slot == r {
                    break;
                }
                q[slot] += 1;
            }
        }
        let names = monomials.iter().map(|m| monomial_name(m)).collect();
        let counit = monomials
            .iter()
            .map(|m| {
                if m.iter().all(|&e| e == 0) {
                    field.one()
                } else {
                    field.zero()
                }
            })
            .collect();
        let degrees = monomials.iter().map(|m| m.iter().sum()).collect();
        Coalgebra::new(field, names, triples, counit)
            .and_then(|c| c.with_grading(degrees))
            .expect("polynomial coalgebra is well-formed")
    }

    /// Group-like coalgebra `𝕜G` on `n` basis elements `g0, g1, …`.
    pub fn group_like(field: Field, n: usize) -> Coalgebra {
        let names = (0..n).map(|i| format!("g{i}")).collect();
        let triples = (0..n).map(|i| (i, i, i, field.one()));
        Coalgebra::new(field, names, triples, vec![field.one(); n])
            .and_then(|c| c.with_grading(vec![0; n]))
            .expect("group-like coalgebra is well-formed")
    }

    /// Direct sum; basis names are kept when unique across summands and
    /// prefixed by the summand index otherwise. The grading is kept when every
    /// summand is graded.
    pub fn direct_sum(parts: &[Coalgebra]) -> Result<Coalgebra> {
        let field = parts
            .first()
            .ok_or_else(|| Error::InvalidCoalgebra("empty direct sum".into()))?
            .field;
        if parts.iter().any(|p| p.field != field) {
            return Err(Error::FieldMismatch(field.to_string(), "another field".into()));
        }
        let all: Vec<&String> = parts.iter().flat_map(|p| p.names.iter()).collect();
        let unique = all.iter().collect::<std::collections::BTreeSet<_>>().len() == all.len();
        let mut names = Vec::new();
        let mut triples = Vec::new();
        let mut counit = Vec::new();
        let mut degrees = Some(Vec::new());
        let mut offset = 0;
        for (s, p) in parts.iter().enumerate() {
            for n in &p.names {
                names.push(if unique { n.clone() } else { format!("{s}:{n}") });
            }
            for (i, j, k, v) in p.triples() {
                triples.push((i + offset, j + offset, k + offset, v));
            }
            counit.extend(p.counit.iter().cloned());
            match (&mut degrees, &p.grading) {
                (Some(d), Some(g)) => d.extend(g.iter().copied()),
                _ => degrees = None,
            }
            offset += p.dim();
        }
        let c = Coalgebra::new(field, names, triples, counit)?;
        match degrees {
            Some(d) => c.with_grading(d),
            None => Ok(c),
        }
    }
}

fn compositions(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 1 {
        let mut m = prefix.clone();
        m.push(total);
        out.push(m);
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

fn monomial_name(exps: &[usize]) -> String {
    if exps.iter().all(|&e| e == 0) {
        return "1".into();
    }
    let single = exps.len() == 1;
    let factors: Vec<String> = exps
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(v, &e)| {
            let var = if single { "t".to_string() } else { format!("t{}", v + 1) };
            if e == 1 {
                var
            } else {
                format!("{var}^{e}")
            }
        })
        .collect();
    factors.join("*")
}

impl fmt::Display for Coalgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, terms) in self.delta.iter().enumerate() {
            let parts: Vec<String> = terms
                .iter()
                .map(|(j, k, v)| {
                    let coeff = if v.is_one() { String::new() } else { format!("{v}·") };
                    format!("{coeff}{}⊗{}", self.names[*j], self.names[*k])
                })
                .collect();
            writeln!(
                f,
                "Δ({}) = {}",
                self.names[i],
                if parts.is_empty() {
                    "0".into()
                } else {
                    parts.join(" + ")
                }
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: Field = Field::Rational;

    fn tensor_of(c: &Coalgebra, terms: &[(&[usize], i64)]) -> Tensor {
        let order = terms[0].0.len();
        let mut t = Tensor::zero(c.field(), c.dim(), order);
        for (idx, v) in terms {
            let f = t.flat(idx);
            t.coeffs[f] = c.field().from_i64(*v);
        }
        t
    }

    #[test]
    fn trivial_validates() {
        let k = Coalgebra::trivial(Q);
        let r = k.validate();
        assert!(r.is_valid() && r.cocommutative);
        assert_eq!(k.dim(), 1);
    }

    #[test]
    fn divided_power_validates_and_matches_formula() {
        let d = Coalgebra::divided_power(Q, 3);
        let r = d.validate();
        assert!(r.is_valid() && r.cocommutative);
        assert_eq!(d.names(), ["1", "t", "t^2", "t^3"]);
        let t2 = d.basis_vector(2);
        let expected = tensor_of(&d, &[(&[0, 2], 1), (&[1, 1], 1), (&[2, 0], 1)]);
        assert_eq!(d.iterated_delta(&t2, 2), expected);
    }

    #[test]
    fn broken_coassociativity_detected() {
        // Δ(t) = t ⊗ t in 𝕜[t]_{≤1}.
        let c = Coalgebra::new(
            Q,
            vec!["1".into(), "t".into()],
            [(0, 0, 0, Q.one()), (1, 1, 1, Q.one()), (1, 0, 1, Q.one())],
            vec![Q.one(), Q.zero()],
        )
        .unwrap();
        assert!(!c.validate().coassociative);
    }

    #[test]
    fn iterated_delta_examples() {
        let d = Coalgebra::divided_power(Q, 2);
        let t2 = d.basis_vector(2);
        assert_eq!(d.iterated_delta(&t2, 1).coeffs, t2);
        let three = d.iterated_delta(&t2, 3);
        let mut expected = Tensor::zero(Q, 3, 3);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    if i + j + k == 2 {
                        let f = expected.flat(&[i, j, k]);
                        expected.coeffs[f] = Q.one();
                    }
                }
            }
        }
        assert_eq!(three, expected);
        assert_eq!(d.iterated_delta_by(&t2, 3, |_| 1), expected);
    }

    #[test]
    fn delta_components() {
        let d = Coalgebra::divided_power(Q, 2);
        let t2 = d.basis_vector(2);
        assert_eq!(d.delta_component(&t2, &[2]).unwrap().coeffs, t2);
        let mid = d.delta_component(&t2, &[1, 1]).unwrap();
        assert_eq!(mid, tensor_of(&d, &[(&[1, 1], 1)]));
        assert_eq!(
            d.delta_component(&t2, &[1, 2]),
            Err(Error::DegreeMismatch { expected: 2, found: 3 })
        );

        let p = Coalgebra::polynomial(Q, 2, 2);
        assert_eq!(p.names(), ["1", "t1", "t2", "t1^2", "t1*t2", "t2^2"]);
        let t12 = p.basis_vector(4);
        let mid = p.delta_component(&t12, &[1, 1]).unwrap();
        assert_eq!(mid, tensor_of(&p, &[(&[1, 2], 1), (&[2, 1], 1)]));
    }

    #[test]
    fn coradical_filtration_of_divided_powers() {
        let n = 3;
        let d = Coalgebra::divided_power(Q, n);
        let c0 = Subspace::coordinate(Q, n + 1, [0]);
        let chain = d.coradical_filtration(&c0).unwrap();
        assert_eq!(chain.len(), n + 1);
        for (k, layer) in chain.iter().enumerate() {
            assert_eq!(*layer, Subspace::coordinate(Q, n + 1, 0..=k));
        }
        assert!(d.is_coalgebra_filtration(&chain));
    }

    #[test]
    fn coradical_of_cosemisimple_is_immediate() {
        let g = Coalgebra::group_like(Q, 3);
        let chain = g.coradical_filtration(&Subspace::full(Q, 3)).unwrap();
        assert_eq!(chain, vec![Subspace::full(Q, 3)]);
        let k = Coalgebra::trivial(Q);
        assert_eq!(k.coradical_filtration(&Subspace::full(Q, 1)).unwrap().len(), 1);
    }

    #[test]
    fn too_small_coradical_is_not_exhaustive() {
        let g = Coalgebra::group_like(Q, 2);
        let c0 = Subspace::coordinate(Q, 2, [0]);
        assert_eq!(
            g.coradical_filtration(&c0),
            Err(Error::NotExhaustive { reached: 1, dim: 2 })
        );
    }

    #[test]
    fn grouplike_searches() {
        let d = Coalgebra::divided_power(Q, 3);
        let g = d.find_grouplikes(GroupLikeSearch::BasisOnly).unwrap();
        assert_eq!(g.elements, vec![d.basis_vector(0)]);
        assert!(matches!(
            d.find_grouplikes(GroupLikeSearch::Exhaustive),
            Err(Error::UnsupportedSearch(_))
        ));

        let kg = Coalgebra::group_like(Q, 3);
        assert_eq!(
            kg.find_grouplikes(GroupLikeSearch::BasisOnly).unwrap().elements.len(),
            3
        );

        let f2 = Field::prime(2).unwrap();
        let c = Coalgebra::group_like(f2, 2);
        let found = c.find_grouplikes(GroupLikeSearch::Exhaustive).unwrap();
        assert_eq!(
            found.elements,
            vec![vec![f2.zero(), f2.one()], vec![f2.one(), f2.zero()]]
        );
    }

    #[test]
    fn builtins_validate() {
        let p = Coalgebra::polynomial(Q, 2, 1);
        assert_eq!(p.names(), ["1", "t1", "t2"]);
        for c in [
            Coalgebra::trivial(Q),
            Coalgebra::divided_power(Q, 4),
            Coalgebra::polynomial(Q, 2, 3),
            Coalgebra::polynomial(Q, 3, 2),
            Coalgebra::group_like(Field::Prime(5), 2),
            Coalgebra::direct_sum(&[Coalgebra::divided_power(Q, 1), Coalgebra::divided_power(Q, 2)]).unwrap(),
        ] {
            let r = c.validate();
            assert!(r.is_valid() && r.cocommutative, "{c}");
        }
        // dim D^n = C(n+r-1, n)
        let p = Coalgebra::polynomial(Q, 3, 3);
        for (n, want) in [(0, 1), (1, 3), (2, 6), (3, 10)] {
            assert_eq!(p.degree_indices(n).unwrap().len(), want);
        }
    }

    #[test]
    fn restriction_requires_closure() {
        let d = Coalgebra::divided_power(Q, 2);
        assert!(d.restrict(&[0, 1]).is_ok());
        assert!(matches!(d.restrict(&[0, 2]), Err(Error::InvalidCoalgebra(_))));
    }

    proptest::proptest! {
        #[test]
        fn slot_choice_is_irrelevant(seed in proptest::collection::vec(-3i64..4, 6), slots in proptest::collection::vec(0usize..4, 3), p in 1usize..5) {
            let c = Coalgebra::polynomial(Q, 2, 2);
            let v: Vector = seed.iter().map(|&x| Q.from_i64(x)).collect();
            let first = c.iterated_delta(&v, p);
            let other = c.iterated_delta_by(&v, p, |s| slots[(s - 1) % slots.len()]);
            proptest::prop_assert_eq!(first, other);
        }

        #[test]
        fn components_sum_to_iterated_delta(which in 0usize..10, p in 1usize..4) {
            let c = Coalgebra::polynomial(Q, 2, 3);
            let v = c.basis_vector(which);
            let deg = c.grading().unwrap()[which];
            let mut sum = Tensor::zero(Q, c.dim(), p);
            let mut idx = vec![0usize; p];
            loop {
                if idx.iter().sum::<usize>() == deg {
                    let comp = c.delta_component(&v, &idx).unwrap();
                    for (a, b) in sum.coeffs.iter_mut().zip(&comp.coeffs) {
                        *a += b;
                    }
                }
                let mut s = 0;
                while s < p && idx[s] == deg { idx[s] = 0; s += 1; }
                if s == p { break; }
                idx[s] += 1;
            }
            proptest::prop_assert_eq!(sum, c.iterated_delta(&v, p));
        }
    }
}
