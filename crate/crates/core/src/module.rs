//! Finitely generated modules over a local ring as explicit cyclic
//! decompositions `M = R/m^{r_1} x ... x R/m^{r_k}` with `r_1 >= r_2 >= ...`,
//! together with canonical submodules and normal-form linear algebra.
//!
//! A submodule is stored as the unique column-reduced triangular matrix
//! spanning its preimage in `R^k` (the relation columns `diag(pi^{r_a})`
//! are folded into the span). Pivots are powers of `pi`, entries left of
//! a pivot are reduced modulo the pivot, and for every pivot `pi^v` the
//! closure column `pi^{n-v} * c` is spanned by later columns, so equality
//! of submodules is equality of matrices.

pub use crate::linalg::snf_integer as snf;

use crate::linalg::{smith, Mat, Smith};
use crate::ring::{LocalRing, RingElem};
use crate::{Error, Result};
use std::collections::BTreeSet;

/// Cyclic decomposition type of a module: sorted factor lengths.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModuleShape {
    ring: LocalRing,
    lengths: Vec<u32>,
}

impl ModuleShape {
    /// Factor lengths may be given in any order; they are sorted descending.
    pub fn new(ring: LocalRing, mut lengths: Vec<u32>) -> Result<Self> {
        for &r in &lengths {
            if r == 0 || r > ring.n() {
                return Err(Error::InvalidShape(format!(
                    "factor length {r} out of range 1..={}",
                    ring.n()
                )));
            }
        }
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        Ok(ModuleShape { ring, lengths })
    }

    pub fn zero_module(ring: LocalRing) -> Self {
        ModuleShape { ring, lengths: Vec::new() }
    }

    pub fn ring(&self) -> LocalRing {
        self.ring
    }

    pub fn factor_lengths(&self) -> &[u32] {
        &self.lengths
    }

    pub fn num_factors(&self) -> usize {
        self.lengths.len()
    }

    /// Composition length over `R`.
    pub fn length(&self) -> u32 {
        self.lengths.iter().sum()
    }

    /// Exponent `r` with `Ann(M) = m^r`; zero for the zero module.
    pub fn exponent(&self) -> u32 {
        self.lengths.first().copied().unwrap_or(0)
    }

    pub fn is_semisimple(&self) -> bool {
        self.lengths.iter().all(|&r| r == 1)
    }

    /// Number of elements, `p^length`.
    pub fn size(&self) -> u128 {
        (self.ring.p() as u128).pow(self.length())
    }

    pub fn zero_elem(&self) -> ModuleElem {
        ModuleElem { shape: self.clone(), coords: vec![self.ring.zero(); self.lengths.len()] }
    }

    pub fn element(&self, coords: Vec<RingElem>) -> Result<ModuleElem> {
        if coords.len() != self.lengths.len() {
            return Err(Error::ShapeMismatch);
        }
        let coords = coords
            .iter()
            .zip(&self.lengths)
            .map(|(c, &r)| {
                if c.ring() != self.ring {
                    return Err(Error::RingMismatch);
                }
                Ok(c.reduce_mod_pi_pow(r))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModuleElem { shape: self.clone(), coords })
    }

    /// Element from integer coordinate encodings.
    pub fn element_from_ints(&self, coords: &[u64]) -> Result<ModuleElem> {
        let coords = coords.iter().map(|&c| self.ring.from_integer(c)).collect();
        self.element(coords)
    }

    pub fn basis_elem(&self, a: usize) -> ModuleElem {
        let mut e = self.zero_elem();
        e.coords[a] = self.ring.one();
        e
    }

    pub fn standard_basis(&self) -> Vec<ModuleElem> {
        (0..self.lengths.len()).map(|a| self.basis_elem(a)).collect()
    }

    /// All elements in a fixed lexicographic order (first coordinate most
    /// significant).
    pub fn elements(&self) -> impl Iterator<Item = ModuleElem> + '_ {
        let radices: Vec<u64> = self.lengths.iter().map(|&r| self.ring.p().pow(r)).collect();
        let total: u128 = radices.iter().map(|&x| x as u128).product();
        (0..total).map(move |mut idx| {
            let mut coords = vec![self.ring.zero(); radices.len()];
            for (a, &rad) in radices.iter().enumerate().rev() {
                coords[a] = self.ring.from_integer((idx % rad as u128) as u64);
                idx /= rad as u128;
            }
            ModuleElem { shape: self.clone(), coords }
        })
    }

    /// The whole module as a submodule of itself.
    pub fn full_submodule(&self) -> Submodule {
        submodule_from_generators(self, &self.standard_basis()).expect("own basis")
    }

    pub fn zero_submodule(&self) -> Submodule {
        submodule_from_generators(self, &[]).expect("no generators")
    }
}

/// Element of a module, coordinates reduced mod `pi^{r_a}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModuleElem {
    shape: ModuleShape,
    coords: Vec<RingElem>,
}

impl ModuleElem {
    pub fn shape(&self) -> &ModuleShape {
        &self.shape
    }

    pub fn coords(&self) -> &[RingElem] {
        &self.coords
    }

    pub fn coord_encodings(&self) -> Vec<u64> {
        self.coords.iter().map(|c| c.encoding()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &ModuleElem) -> Result<ModuleElem> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch);
        }
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .zip(self.shape.lengths.iter())
            .map(|((a, b), &r)| a.add(b).reduce_mod_pi_pow(r))
            .collect();
        Ok(ModuleElem { shape: self.shape.clone(), coords })
    }

    pub fn neg(&self) -> ModuleElem {
        let coords = self
            .coords
            .iter()
            .zip(self.shape.lengths.iter())
            .map(|(a, &r)| a.neg().reduce_mod_pi_pow(r))
            .collect();
        ModuleElem { shape: self.shape.clone(), coords }
    }

    pub fn sub(&self, other: &ModuleElem) -> Result<ModuleElem> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &RingElem) -> ModuleElem {
        let coords = self
            .coords
            .iter()
            .zip(self.shape.lengths.iter())
            .map(|(a, &r)| a.mul(c).reduce_mod_pi_pow(r))
            .collect();
        ModuleElem { shape: self.shape.clone(), coords }
    }

    /// Smallest `j` with `pi^j * x = 0`.
    pub fn order_exponent(&self) -> u32 {
        self.coords
            .iter()
            .zip(self.shape.lengths.iter())
            .map(|(c, &r)| r.saturating_sub(c.valuation().min(r)))
            .max()
            .unwrap_or(0)
    }
}

/// A submodule in canonical triangular form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Submodule {
    shape: ModuleShape,
    mat: Mat,
    /// `(row, valuation)` per column, pivot rows strictly increasing.
    pivots: Vec<(usize, u32)>,
}

impl Submodule {
    pub fn shape(&self) -> &ModuleShape {
        &self.shape
    }

    /// Canonical generator matrix; columns generate the submodule.
    pub fn matrix(&self) -> &Mat {
        &self.mat
    }

    pub fn generators(&self) -> Vec<ModuleElem> {
        self.mat
            .columns()
            .into_iter()
            .map(|col| self.shape.element(col).expect("canonical columns are reduced"))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.length() == 0
    }

    /// Composition length over `R`.
    pub fn length(&self) -> u32 {
        let n = self.shape.ring.n();
        let span: u32 = self.pivots.iter().map(|&(_, v)| n - v).sum();
        let rel: u32 = self.shape.lengths.iter().map(|&r| n - r).sum();
        span - rel
    }

    pub fn contains(&self, x: &ModuleElem) -> Result<bool> {
        if x.shape != self.shape {
            return Err(Error::ShapeMismatch);
        }
        let mut residual: Vec<RingElem> = x.coords.clone();
        for (j, &(row, v)) in self.pivots.iter().enumerate() {
            let e = &residual[row];
            if e.is_zero() {
                continue;
            }
            if e.valuation() < v {
                return Ok(false);
            }
            let q = e.divide_by_pi_power(v).expect("checked");
            for i in row..residual.len() {
                residual[i] = residual[i].sub(&q.mul(self.mat.get(i, j)));
            }
        }
        Ok(residual.iter().all(|e| e.is_zero()))
    }

    pub fn is_subset_of(&self, other: &Submodule) -> Result<bool> {
        for g in self.generators() {
            if !other.contains(&g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// All elements (the span of the generators), in canonical order.
    pub fn elements(&self) -> Vec<ModuleElem> {
        let mut seen = BTreeSet::new();
        let zero = self.shape.zero_elem();
        seen.insert(zero.clone());
        let mut frontier = vec![zero];
        // additive closure over pi^j * g covers the full R-span
        let mut gens = Vec::new();
        for g in self.generators() {
            for j in 0..self.shape.ring.n() {
                let s = g.scale(&self.shape.ring.pi_pow(j));
                if !s.is_zero() {
                    gens.push(s);
                }
            }
        }
        while let Some(x) = frontier.pop() {
            for g in &gens {
                let y = x.add(g).expect("same shape");
                if seen.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        seen.into_iter().collect()
    }
}

/// Canonical form of the submodule generated by `gens` (plus relations).
pub fn submodule_from_generators(shape: &ModuleShape, gens: &[ModuleElem]) -> Result<Submodule> {
    let mut cols: Vec<Vec<RingElem>> = Vec::with_capacity(gens.len());
    for g in gens {
        if g.shape != *shape {
            return Err(Error::ShapeMismatch);
        }
        cols.push(g.coords.clone());
    }
    Ok(canonicalize(shape, cols))
}

fn canonicalize(shape: &ModuleShape, mut work: Vec<Vec<RingElem>>) -> Submodule {
    let ring = shape.ring;
    let n = ring.n();
    let k = shape.lengths.len();
    // fold in the relation columns pi^{r_a} e_a (skip the zero ones)
    for (a, &r) in shape.lengths.iter().enumerate() {
        if r < n {
            let mut col = vec![ring.zero(); k];
            col[a] = ring.pi_pow(r);
            work.push(col);
        }
    }
    work.retain(|c| c.iter().any(|e| !e.is_zero()));

    let mut result: Vec<Vec<RingElem>> = Vec::new();
    let mut pivots: Vec<(usize, u32)> = Vec::new();
    for row in 0..k {
        // pick the column with minimal valuation at this row
        let mut best: Option<(usize, u32)> = None;
        for (j, col) in work.iter().enumerate() {
            let v = col[row].valuation();
            if v < n && best.map_or(true, |(_, bv)| v < bv) {
                best = Some((j, v));
            }
        }
        let Some((jbest, v)) = best else { continue };
        let mut pivot = work.swap_remove(jbest);
        let unit_inv = pivot[row].unit_part().invert_unit().expect("unit");
        for e in pivot.iter_mut() {
            *e = e.mul(&unit_inv);
        }
        // clear this row in the remaining working columns
        for col in work.iter_mut() {
            if col[row].is_zero() {
                continue;
            }
            let q = col[row].divide_by_pi_power(v).expect("pivot is minimal");
            for (e, pe) in col.iter_mut().zip(&pivot) {
                *e = e.sub(&q.mul(pe));
            }
        }
        work.retain(|c| c.iter().any(|e| !e.is_zero()));
        // reduce this row in the earlier pivot columns
        for col in result.iter_mut() {
            let rem = col[row].reduce_mod_pi_pow(v);
            let diff = col[row].sub(&rem);
            if diff.is_zero() {
                continue;
            }
            let q = diff.divide_by_pi_power(v).expect("multiple of pivot");
            for (e, pe) in col.iter_mut().zip(&pivot) {
                *e = e.sub(&q.mul(pe));
            }
        }
        // closure column keeps the span property for later rows
        if v > 0 {
            let aux: Vec<RingElem> = pivot.iter().map(|e| e.mul_pi_pow(n - v)).collect();
            if aux.iter().any(|e| !e.is_zero()) {
                work.push(aux);
            }
        }
        result.push(pivot);
        pivots.push((row, v));
    }
    let mat = Mat::from_columns(ring, k, &result);
    Submodule { shape: shape.clone(), mat, pivots }
}

/// Sum of two submodules of the same ambient module.
pub fn sum(l1: &Submodule, l2: &Submodule) -> Result<Submodule> {
    if l1.shape != l2.shape {
        return Err(Error::ShapeMismatch);
    }
    let mut cols = l1.mat.columns();
    cols.extend(l2.mat.columns());
    Ok(canonicalize(&l1.shape, cols))
}

/// Intersection, via the kernel of the stacked generator matrices.
pub fn intersect(l1: &Submodule, l2: &Submodule) -> Result<Submodule> {
    if l1.shape != l2.shape {
        return Err(Error::ShapeMismatch);
    }
    let a = &l1.mat;
    let mut negb = l2.mat.clone();
    for i in 0..negb.rows() {
        for j in 0..negb.cols() {
            let e = negb.get(i, j).neg();
            negb.set(i, j, e);
        }
    }
    let stacked = a.hcat(&negb);
    let s = smith(&stacked);
    let mut cols = Vec::new();
    for ker in s.kernel_columns() {
        let u = &ker[..a.cols()];
        let col = a.mul_vec(u);
        cols.push(col);
    }
    Ok(canonicalize(&l1.shape, cols))
}

/// `m^i * L`.
pub fn scale_submodule(l: &Submodule, i: u32) -> Submodule {
    let cols: Vec<Vec<RingElem>> = l
        .mat
        .columns()
        .into_iter()
        .map(|col| col.into_iter().map(|e| e.mul_pi_pow(i)).collect())
        .collect();
    canonicalize(&l.shape, cols)
}

fn relation_matrix(shape: &ModuleShape) -> Mat {
    let ring = shape.ring;
    let k = shape.lengths.len();
    let mut cols = Vec::new();
    for (a, &r) in shape.lengths.iter().enumerate() {
        if r < ring.n() {
            let mut col = vec![ring.zero(); k];
            col[a] = ring.pi_pow(r);
            cols.push(col);
        }
    }
    Mat::from_columns(ring, k, &cols)
}

/// `L[m^i] = {x in L : pi^i x = 0}`.
pub fn torsion_submodule(l: &Submodule, i: u32) -> Submodule {
    // solve pi^i * A u = 0 inside M, i.e. pi^i A u + Lambda w = 0 over R
    let mut scaled = l.mat.clone();
    for r in 0..scaled.rows() {
        for c in 0..scaled.cols() {
            let e = scaled.get(r, c).mul_pi_pow(i);
            scaled.set(r, c, e);
        }
    }
    let rel = relation_matrix(&l.shape);
    let stacked = scaled.hcat(&rel);
    let s = smith(&stacked);
    let mut cols = Vec::new();
    for ker in s.kernel_columns() {
        let u = &ker[..l.mat.cols()];
        cols.push(l.mat.mul_vec(u));
    }
    canonicalize(&l.shape, cols)
}

/// Decomposition data for a quotient `M / L`.
#[derive(Clone, Debug)]
pub struct QuotientData {
    ambient: ModuleShape,
    qshape: ModuleShape,
    lifts: Vec<ModuleElem>,
    u: Mat,
    /// `(original row index, factor length)` for retained factors, in the
    /// order of `qshape.factor_lengths()`.
    retained: Vec<(usize, u32)>,
}

impl QuotientData {
    pub fn shape(&self) -> &ModuleShape {
        &self.qshape
    }

    /// Elements of the ambient module whose classes form a decomposition
    /// basis of the quotient.
    pub fn lifts(&self) -> &[ModuleElem] {
        &self.lifts
    }

    /// Coordinates of the class of `x` in the quotient decomposition.
    pub fn project(&self, x: &ModuleElem) -> Result<ModuleElem> {
        if *x.shape() != self.ambient {
            return Err(Error::ShapeMismatch);
        }
        let y = self.u.mul_vec(x.coords());
        let coords = self.retained.iter().map(|&(row, _)| y[row].clone()).collect();
        self.qshape.element(coords)
    }
}

/// Cyclic decomposition of `M / L` with lifted basis.
pub fn quotient_shape(shape: &ModuleShape, l: &Submodule) -> Result<QuotientData> {
    if l.shape != *shape {
        return Err(Error::ShapeMismatch);
    }
    let ring = shape.ring;
    let k = shape.lengths.len();
    let s = smith(&l.mat);
    // factor at row i is R/pi^{v_i}; rows past the diagonal are free (R/0)
    let diag_len = l.mat.cols().min(k);
    let mut retained: Vec<(usize, u32)> = (0..k)
        .map(|i| (i, if i < diag_len { s.diag_val(i) } else { ring.n() }))
        .filter(|&(_, v)| v > 0)
        .collect();
    retained.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let lengths: Vec<u32> = retained.iter().map(|&(_, v)| v).collect();
    let qshape = ModuleShape::new(ring, lengths)?;
    let lifts = retained
        .iter()
        .map(|&(row, _)| shape.element(s.uinv.column(row)))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuotientData { ambient: shape.clone(), qshape, lifts, u: s.u.clone(), retained })
}

/// A decomposition basis for a submodule: elements `b_i` of the ambient
/// module with `L = R b_1 + ... + R b_t` direct, `ord(b_i) = pi^{s_i}`.
#[derive(Clone, Debug)]
pub struct SubmoduleBasis {
    ambient: ModuleShape,
    shape: ModuleShape,
    basis: Vec<ModuleElem>,
    solver: Smith,
    basis_cols: usize,
}

impl SubmoduleBasis {
    /// Abstract shape of the submodule.
    pub fn shape(&self) -> &ModuleShape {
        &self.shape
    }

    pub fn ambient(&self) -> &ModuleShape {
        &self.ambient
    }

    pub fn basis(&self) -> &[ModuleElem] {
        &self.basis
    }

    /// Coordinates of `x` (which must lie in the submodule) with respect
    /// to the decomposition basis.
    pub fn coordinates(&self, x: &ModuleElem) -> Result<ModuleElem> {
        if *x.shape() != self.ambient {
            return Err(Error::ShapeMismatch);
        }
        let sol = self.solver.solve(x.coords()).ok_or(Error::NotContained)?;
        let coords = sol[..self.basis_cols].to_vec();
        self.shape.element(coords)
    }

    /// Map an element of the abstract shape back into the ambient module.
    pub fn embed(&self, y: &ModuleElem) -> Result<ModuleElem> {
        if *y.shape() != self.shape {
            return Err(Error::ShapeMismatch);
        }
        let mut acc = self.ambient.zero_elem();
        for (c, b) in y.coords().iter().zip(&self.basis) {
            acc = acc.add(&b.scale(c))?;
        }
        Ok(acc)
    }
}

/// Compute a decomposition basis of a submodule.
pub fn decompose_submodule(l: &Submodule) -> Result<SubmoduleBasis> {
    let shape = &l.shape;
    let ring = shape.ring;
    let k = shape.lengths.len();
    let m = l.mat.cols();
    // kernel of R^m -> M, u |-> A u: solve A u + Lambda w = 0
    let rel = relation_matrix(shape);
    let stacked = l.mat.hcat(&rel);
    let s = smith(&stacked);
    let kernel: Vec<Vec<RingElem>> =
        s.kernel_columns().into_iter().map(|col| col[..m].to_vec()).collect();
    let kmat = Mat::from_columns(ring, m, &kernel);
    // decomposition of R^m / kernel
    let ks = smith(&kmat);
    let diag_len = kmat.cols().min(m);
    let mut retained: Vec<(usize, u32)> = (0..m)
        .map(|i| (i, if i < diag_len { ks.diag_val(i) } else { ring.n() }))
        .filter(|&(_, v)| v > 0)
        .collect();
    retained.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let lengths: Vec<u32> = retained.iter().map(|&(_, v)| v).collect();
    let sub_shape = ModuleShape::new(ring, lengths)?;
    let basis: Vec<ModuleElem> = retained
        .iter()
        .map(|&(row, _)| shape.element(l.mat.mul_vec(&ks.uinv.column(row))))
        .collect::<Result<Vec<_>>>()?;
    debug_assert_eq!(sub_shape.length(), l.length());
    // solver for expressing ambient elements in this basis
    let bmat =
        Mat::from_columns(ring, k, &basis.iter().map(|b| b.coords().to_vec()).collect::<Vec<_>>());
    let solver = smith(&bmat.hcat(&rel));
    Ok(SubmoduleBasis {
        ambient: shape.clone(),
        shape: sub_shape,
        basis_cols: bmat.cols(),
        basis,
        solver,
    })
}

/// Decomposition of a subquotient `T / S` (requires `S` a subset of `T`).
#[derive(Clone, Debug)]
pub struct SubquotientData {
    t_basis: SubmoduleBasis,
    inner: QuotientData,
    lifts: Vec<ModuleElem>,
}

impl SubquotientData {
    pub fn shape(&self) -> &ModuleShape {
        &self.inner.qshape
    }

    /// Lifts of the decomposition basis, as elements of the ambient module.
    pub fn lifts(&self) -> &[ModuleElem] {
        &self.lifts
    }

    /// Class of `x` (an element of `T`) in the quotient decomposition.
    pub fn project(&self, x: &ModuleElem) -> Result<ModuleElem> {
        let tx = self.t_basis.coordinates(x)?;
        self.inner.project(&tx)
    }

    /// Preimage in the ambient module of a submodule of the quotient:
    /// lifted generators plus the kernel `s`.
    pub fn preimage(&self, w: &Submodule, s: &Submodule) -> Result<Submodule> {
        let mut gens: Vec<ModuleElem> = s.generators();
        for g in w.generators() {
            let mut acc = self.t_basis.shape.zero_elem();
            for (c, lift) in g.coords().iter().zip(self.inner.lifts()) {
                acc = acc.add(&lift.scale(c))?;
            }
            gens.push(self.t_basis.embed(&acc)?);
        }
        submodule_from_generators(&self.t_basis.ambient, &gens)
    }
}

/// Decompose `T / S` for nested submodules of the same ambient module.
pub fn subquotient(t: &Submodule, s: &Submodule) -> Result<SubquotientData> {
    if t.shape != s.shape {
        return Err(Error::ShapeMismatch);
    }
    if !s.is_subset_of(t)? {
        return Err(Error::NotContained);
    }
    let t_basis = decompose_submodule(t)?;
    // rewrite S inside the abstract shape of T
    let s_in_t: Vec<ModuleElem> =
        s.generators().iter().map(|g| t_basis.coordinates(g)).collect::<Result<Vec<_>>>()?;
    let s_sub = submodule_from_generators(&t_basis.shape, &s_in_t)?;
    let inner = quotient_shape(&t_basis.shape, &s_sub)?;
    let lifts =
        inner.lifts().iter().map(|l| t_basis.embed(l)).collect::<Result<Vec<_>>>()?;
    Ok(SubquotientData { t_basis, inner, lifts })
}

/// Every submodule exactly once, sorted by canonical matrix.
pub fn enumerate_submodules(shape: &ModuleShape, budget: u64) -> Result<Vec<Submodule>> {
    let size = shape.size();
    if size > budget as u128 {
        return Err(Error::BudgetExceeded { size, budget });
    }
    let elements: Vec<ModuleElem> = shape.elements().collect();
    let mut seen: BTreeSet<Submodule> = BTreeSet::new();
    let zero = shape.zero_submodule();
    let mut frontier = vec![zero.clone()];
    seen.insert(zero);
    while let Some(l) = frontier.pop() {
        for x in &elements {
            if l.contains(x)? {
                continue;
            }
            let mut cols = l.mat.columns();
            cols.push(x.coords().to_vec());
            let bigger = canonicalize(shape, cols);
            if seen.insert(bigger.clone()) {
                frontier.push(bigger);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::LocalRing;

    fn z4_sq() -> ModuleShape {
        ModuleShape::new(LocalRing::zpn(2, 2).unwrap(), vec![2, 2]).unwrap()
    }

    /// brute-force closure of a generating set under addition and scalars
    fn brute_span(shape: &ModuleShape, gens: &[ModuleElem]) -> BTreeSet<ModuleElem> {
        let mut seen = BTreeSet::new();
        seen.insert(shape.zero_elem());
        let mut frontier = vec![shape.zero_elem()];
        let mut scaled = Vec::new();
        for g in gens {
            for c in shape.ring().elements() {
                scaled.push(g.scale(&c));
            }
        }
        while let Some(x) = frontier.pop() {
            for g in &scaled {
                let y = x.add(g).unwrap();
                if seen.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        seen
    }

    #[test]
    fn generators_closure_matches_brute_force() {
        let shape = z4_sq();
        let gens = vec![
            shape.element_from_ints(&[2, 0]).unwrap(),
            shape.element_from_ints(&[0, 2]).unwrap(),
            shape.element_from_ints(&[2, 2]).unwrap(),
        ];
        let l = submodule_from_generators(&shape, &gens).unwrap();
        let brute = brute_span(&shape, &gens);
        assert_eq!(brute.len(), 4); // derived: closure over 16 elements gives 2M
        assert_eq!(l.length(), 2);
        for x in shape.elements() {
            assert_eq!(l.contains(&x).unwrap(), brute.contains(&x));
        }
    }

    #[test]
    fn empty_and_full_generating_sets() {
        let shape = z4_sq();
        let zero = submodule_from_generators(&shape, &[]).unwrap();
        assert_eq!(zero.length(), 0);
        assert!(zero.is_zero());
        let full = submodule_from_generators(&shape, &shape.standard_basis()).unwrap();
        assert_eq!(full.length(), shape.length());
    }

    #[test]
    fn canonical_form_is_idempotent_and_generator_independent() {
        let shape = z4_sq();
        let subs = enumerate_submodules(&shape, 1 << 12).unwrap();
        for l in &subs {
            let re = submodule_from_generators(&shape, &l.generators()).unwrap();
            assert_eq!(&re, l);
            // shuffled/duplicated generators give the same canonical form
            let mut gens = l.generators();
            gens.reverse();
            let dup = gens.clone();
            gens.extend(dup);
            assert_eq!(submodule_from_generators(&shape, &gens).unwrap(), *l);
        }
    }

    #[test]
    fn canonical_form_unique_per_element_set() {
        // two submodules are equal iff they have the same element sets;
        // cross-check canonical-form equality against element sets
        for shape in [
            z4_sq(),
            ModuleShape::new(LocalRing::zpn(2, 3).unwrap(), vec![3, 1]).unwrap(),
            ModuleShape::new(LocalRing::fpt(2, 2).unwrap(), vec![2, 1]).unwrap(),
            ModuleShape::new(LocalRing::zpn(3, 2).unwrap(), vec![2, 1]).unwrap(),
            ModuleShape::new(LocalRing::fpt(3, 2).unwrap(), vec![2, 2]).unwrap(),
            ModuleShape::new(LocalRing::zpn(2, 2).unwrap(), vec![2, 1, 1]).unwrap(),
        ] {
            let subs = enumerate_submodules(&shape, 1 << 12).unwrap();
            let mut sets = Vec::new();
            for l in &subs {
                let set: BTreeSet<_> = l.elements().into_iter().collect();
                assert_eq!(set.len() as u64, shape.ring().p().pow(l.length()));
                sets.push(set);
            }
            for i in 0..sets.len() {
                for j in (i + 1)..sets.len() {
                    assert_ne!(sets[i], sets[j], "distinct canonical forms, same span");
                }
            }
        }
    }

    #[test]
    fn sum_intersect_examples() {
        let z4 = ModuleShape::new(LocalRing::zpn(2, 2).unwrap(), vec![2]).unwrap();
        let two = submodule_from_generators(&z4, &[z4.element_from_ints(&[2]).unwrap()]).unwrap();
        assert_eq!(sum(&two, &two).unwrap(), two);

        let shape = z4_sq();
        let e1 =
            submodule_from_generators(&shape, &[shape.element_from_ints(&[1, 0]).unwrap()])
                .unwrap();
        let e2 =
            submodule_from_generators(&shape, &[shape.element_from_ints(&[0, 1]).unwrap()])
                .unwrap();
        assert!(intersect(&e1, &e2).unwrap().is_zero());

        let diag =
            submodule_from_generators(&shape, &[shape.element_from_ints(&[1, 2]).unwrap()])
                .unwrap();
        let two_m = scale_submodule(&shape.full_submodule(), 1);
        let meet = intersect(&diag, &two_m).unwrap();
        // derived: {(0,0),(1,2),(2,0),(3,2)} meets 2M in {(0,0),(2,0)}
        assert_eq!(meet.length(), 1);
        assert!(meet.contains(&shape.element_from_ints(&[2, 0]).unwrap()).unwrap());
    }

    #[test]
    fn scale_and_torsion_examples() {
        let z8 = ModuleShape::new(LocalRing::zpn(2, 3).unwrap(), vec![3]).unwrap();
        let full = z8.full_submodule();
        let s2 = scale_submodule(&full, 2);
        assert_eq!(s2.length(), 1);
        assert!(s2.contains(&z8.element_from_ints(&[4]).unwrap()).unwrap());
        let t1 = torsion_submodule(&full, 1);
        assert_eq!(t1, s2);
        let t2 = torsion_submodule(&full, 2);
        assert_eq!(t2.length(), 2);
        assert!(t2.contains(&z8.element_from_ints(&[2]).unwrap()).unwrap());

        let shape = z4_sq();
        let full = shape.full_submodule();
        assert_eq!(scale_submodule(&full, 1), torsion_submodule(&full, 1));
    }

    #[test]
    fn scale_torsion_monotone_and_exact() {
        for shape in [
            z4_sq(),
            ModuleShape::new(LocalRing::zpn(2, 3).unwrap(), vec![3, 1]).unwrap(),
            ModuleShape::new(LocalRing::fpt(3, 2).unwrap(), vec![2, 1]).unwrap(),
        ] {
            let full = shape.full_submodule();
            let n = shape.ring().n();
            let pi = shape.ring().pi();
            for i in 0..n {
                let a = scale_submodule(&full, i);
                let b = scale_submodule(&full, i + 1);
                assert!(b.is_subset_of(&a).unwrap());
                let ta = torsion_submodule(&full, i);
                let tb = torsion_submodule(&full, i + 1);
                assert!(ta.is_subset_of(&tb).unwrap());
                // elementwise: torsion is exactly the annihilated set
                for x in shape.elements() {
                    let mut y = x.clone();
                    for _ in 0..i {
                        y = y.scale(&pi);
                    }
                    assert_eq!(ta.contains(&x).unwrap(), y.is_zero());
                }
            }
        }
    }

    #[test]
    fn quotient_shape_examples() {
        let shape = z4_sq();
        let two_m = scale_submodule(&shape.full_submodule(), 1);
        let q = quotient_shape(&shape, &two_m).unwrap();
        assert_eq!(q.shape().factor_lengths(), &[1, 1]);

        let q0 = quotient_shape(&shape, &shape.zero_submodule()).unwrap();
        assert_eq!(q0.shape(), &shape);

        let z8 = ModuleShape::new(LocalRing::zpn(2, 3).unwrap(), vec![3]).unwrap();
        let sub = submodule_from_generators(&z8, &[z8.element_from_ints(&[4]).unwrap()]).unwrap();
        let q = quotient_shape(&z8, &sub).unwrap();
        assert_eq!(q.shape().factor_lengths(), &[2]);
    }

    #[test]
    fn quotient_lengths_additive_and_lift_faithful() {
        let shape = ModuleShape::new(LocalRing::zpn(2, 2).unwrap(), vec![2, 1]).unwrap();
        for l in enumerate_submodules(&shape, 1 << 12).unwrap() {
            let q = quotient_shape(&shape, &l).unwrap();
            assert_eq!(q.shape().length() + l.length(), shape.length());
            // projections of lifts give the standard basis
            for (i, lift) in q.lifts().iter().enumerate() {
                let proj = q.project(lift).unwrap();
                assert_eq!(proj, q.shape().basis_elem(i));
            }
            // kernel of the projection is exactly l
            for x in shape.elements() {
                let in_l = l.contains(&x).unwrap();
                assert_eq!(q.project(&x).unwrap().is_zero(), in_l);
            }
        }
    }

    #[test]
    fn enumerate_submodules_counts() {
        let z4 = ModuleShape::new(LocalRing::zpn(2, 2).unwrap(), vec![2]).unwrap();
        assert_eq!(enumerate_submodules(&z4, 1 << 12).unwrap().len(), 3);

        let f22 = ModuleShape::new(LocalRing::zpn(2, 1).unwrap(), vec![1, 1]).unwrap();
        assert_eq!(enumerate_submodules(&f22, 1 << 12).unwrap().len(), 5);

        let zero = ModuleShape::zero_module(LocalRing::zpn(2, 1).unwrap());
        assert_eq!(enumerate_submodules(&zero, 1 << 12).unwrap().len(), 1);

        // (Z/4)^2 has 15 subgroups
        assert_eq!(enumerate_submodules(&z4_sq(), 1 << 12).unwrap().len(), 15);

        let big = ModuleShape::new(LocalRing::zpn(2, 1).unwrap(), vec![1; 20]).unwrap();
        assert!(matches!(enumerate_submodules(&big, 1 << 12), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn modular_law_and_length_additivity() {
        for shape in
            [z4_sq(), ModuleShape::new(LocalRing::fpt(2, 2).unwrap(), vec![2, 1]).unwrap()]
        {
            let subs = enumerate_submodules(&shape, 1 << 12).unwrap();
            for l1 in &subs {
                for l2 in &subs {
                    let s = sum(l1, l2).unwrap();
                    let i = intersect(l1, l2).unwrap();
                    assert_eq!(s.length() + i.length(), l1.length() + l2.length());
                    for l3 in &subs {
                        if l1.is_subset_of(l3).unwrap() {
                            let lhs = sum(l1, &intersect(l2, l3).unwrap()).unwrap();
                            let rhs = intersect(&sum(l1, l2).unwrap(), l3).unwrap();
                            assert_eq!(lhs, rhs, "modular law");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn submodule_decomposition_round_trip() {
        let shape = ModuleShape::new(LocalRing::zpn(2, 3).unwrap(), vec![3, 2]).unwrap();
        for l in enumerate_submodules(&shape, 1 << 12).unwrap() {
            let basis = decompose_submodule(&l).unwrap();
            assert_eq!(basis.shape().length(), l.length());
            // basis elements generate l
            let re = submodule_from_generators(&shape, basis.basis()).unwrap();
            assert_eq!(re, l);
            // coordinates round-trip
            for g in l.generators() {
                let c = basis.coordinates(&g).unwrap();
                assert_eq!(basis.embed(&c).unwrap(), g);
            }
        }
    }

    #[test]
    fn snf_reexported() {
        let (_, d, _) = snf(&[vec![6, 4], vec![2, 8]]);
        assert_eq!(d[0][0], 2);
        assert_eq!(d[1][1] % d[0][0], 0);
    }
}
