//! Symmetric bilinear forms as Gram matrices under a fixed identification
//! of the value module `N` with `R`.
//!
//! Compatibility requires `val(G_ab) >= n - min(r_a, r_b)` so the pairing
//! is well defined on `R/m^{r_a} x R/m^{r_b}`. Kernels and orthogonal
//! complements are computed by exact linear algebra over the ring; the
//! brute-force fallbacks live in the test suites only.

use crate::linalg::{smith, Mat};
use crate::module::{
    decompose_submodule, quotient_shape, submodule_from_generators, subquotient, ModuleElem,
    ModuleShape, SubquotientData, Submodule,
};
use crate::ring::{crt_decompose, LocalRing, RingElem};
use crate::{Error, Result};

/// A symmetric bilinear form on a module over a local ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramForm {
    shape: ModuleShape,
    gram: Mat,
}

impl GramForm {
    pub fn new(shape: ModuleShape, entries: Vec<Vec<RingElem>>) -> Result<Self> {
        let k = shape.num_factors();
        if entries.len() != k || entries.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidGram(format!("expected a {k}x{k} matrix")));
        }
        let n = shape.ring().n();
        let mut gram = Mat::zero(shape.ring(), k, k);
        for (a, row) in entries.iter().enumerate() {
            for (b, e) in row.iter().enumerate() {
                if e.ring() != shape.ring() {
                    return Err(Error::RingMismatch);
                }
                if *e != entries[b][a] {
                    return Err(Error::InvalidGram(format!("not symmetric at ({a},{b})")));
                }
                let need = n - shape.factor_lengths()[a].min(shape.factor_lengths()[b]);
                if e.valuation() < need {
                    return Err(Error::InvalidGram(format!(
                        "entry ({a},{b}) has valuation {} < {need}",
                        e.valuation()
                    )));
                }
                gram.set(a, b, e.clone());
            }
        }
        Ok(GramForm { shape, gram })
    }

    /// Build from integer encodings of the entries.
    pub fn from_ints(shape: ModuleShape, entries: &[Vec<u64>]) -> Result<Self> {
        let ring = shape.ring();
        let rows = entries
            .iter()
            .map(|r| r.iter().map(|&x| ring.decode(x)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        GramForm::new(shape, rows)
    }

    pub fn shape(&self) -> &ModuleShape {
        &self.shape
    }

    pub fn ring(&self) -> LocalRing {
        self.shape.ring()
    }

    pub fn gram(&self) -> &Mat {
        &self.gram
    }

    pub fn gram_encodings(&self) -> Vec<Vec<u64>> {
        (0..self.gram.rows())
            .map(|i| (0..self.gram.cols()).map(|j| self.gram.get(i, j).encoding()).collect())
            .collect()
    }

    /// `<x, y>` by bilinear extension of the Gram matrix.
    pub fn evaluate(&self, x: &ModuleElem, y: &ModuleElem) -> Result<RingElem> {
        if x.shape() != &self.shape || y.shape() != &self.shape {
            return Err(Error::ShapeMismatch);
        }
        let mut acc = self.ring().zero();
        for (a, xa) in x.coords().iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, yb) in y.coords().iter().enumerate() {
                acc = acc.add(&xa.mul(self.gram.get(a, b)).mul(yb));
            }
        }
        Ok(acc)
    }

    /// `M^perp = {x : <x, M> = 0}`.
    pub fn kernel(&self) -> Submodule {
        let s = smith(&self.gram);
        let gens: Vec<ModuleElem> = s
            .kernel_columns()
            .into_iter()
            .map(|col| self.shape.element(col).expect("kernel columns live in R^k"))
            .collect();
        submodule_from_generators(&self.shape, &gens).expect("same shape")
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.kernel().is_zero()
    }

    /// Orthogonal complement of a submodule.
    pub fn perp(&self, l: &Submodule) -> Result<Submodule> {
        if l.shape() != &self.shape {
            return Err(Error::ShapeMismatch);
        }
        // <x, g> = 0 for the generators g: kernel of B^T G
        let bt = l.matrix().transpose();
        let btg = bt.mul(&self.gram);
        let s = smith(&btg);
        let gens: Vec<ModuleElem> = s
            .kernel_columns()
            .into_iter()
            .map(|col| self.shape.element(col).expect("columns in R^k"))
            .collect();
        submodule_from_generators(&self.shape, &gens)
    }

    /// Rescale the whole form by a ring element (usually a unit).
    pub fn scale(&self, u: &RingElem) -> Result<GramForm> {
        if u.ring() != self.ring() {
            return Err(Error::RingMismatch);
        }
        let k = self.shape.num_factors();
        let entries: Vec<Vec<RingElem>> = (0..k)
            .map(|a| (0..k).map(|b| self.gram.get(a, b).mul(u)).collect())
            .collect();
        GramForm::new(self.shape.clone(), entries)
    }

    /// Orthogonal direct sum; factor lengths are merged and re-sorted.
    pub fn direct_sum(&self, other: &GramForm) -> Result<GramForm> {
        if self.ring() != other.ring() {
            return Err(Error::RingMismatch);
        }
        let ring = self.ring();
        let mut lengths: Vec<u32> = self.shape.factor_lengths().to_vec();
        lengths.extend_from_slice(other.shape.factor_lengths());
        let k1 = self.shape.num_factors();
        let k = lengths.len();
        // order of indices after the descending stable sort
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| lengths[b].cmp(&lengths[a]).then(a.cmp(&b)));
        let shape = ModuleShape::new(ring, lengths)?;
        let entry = |i: usize, j: usize| -> RingElem {
            if i < k1 && j < k1 {
                self.gram.get(i, j).clone()
            } else if i >= k1 && j >= k1 {
                other.gram.get(i - k1, j - k1).clone()
            } else {
                ring.zero()
            }
        };
        let entries: Vec<Vec<RingElem>> =
            order.iter().map(|&i| order.iter().map(|&j| entry(i, j)).collect()).collect();
        GramForm::new(shape, entries)
    }
}

/// A form restricted to a submodule, with the embedding basis.
#[derive(Clone, Debug)]
pub struct RestrictedForm {
    pub form: GramForm,
    /// Elements of the ambient module realizing the abstract basis.
    pub basis: Vec<ModuleElem>,
}

/// Gram matrix of the pairing restricted to a decomposition basis of `L`.
pub fn restrict(f: &GramForm, l: &Submodule) -> Result<RestrictedForm> {
    if l.shape() != f.shape() {
        return Err(Error::ShapeMismatch);
    }
    let basis = decompose_submodule(l)?;
    let b = basis.basis().to_vec();
    let entries: Vec<Vec<RingElem>> = b
        .iter()
        .map(|x| b.iter().map(|y| f.evaluate(x, y).expect("same shape")).collect::<Vec<_>>())
        .collect::<Vec<_>>();
    let form = GramForm::new(basis.shape().clone(), entries)?;
    Ok(RestrictedForm { form, basis: b })
}

/// The induced form on a subquotient `T/S` with `<S, T> = 0`.
#[derive(Clone, Debug)]
pub struct InducedForm {
    pub form: GramForm,
    pub data: SubquotientData,
}

/// Induced form on `T/S`; requires `S` inside `T` and `<S, T> = 0`.
pub fn induced_subquotient_form(f: &GramForm, t: &Submodule, s: &Submodule) -> Result<InducedForm> {
    for gs in s.generators() {
        for gt in t.generators() {
            if !f.evaluate(&gs, &gt)?.is_zero() {
                return Err(Error::NotIsotropic);
            }
        }
    }
    let data = subquotient(t, s)?;
    let lifts = data.lifts().to_vec();
    let entries: Vec<Vec<RingElem>> = lifts
        .iter()
        .map(|x| lifts.iter().map(|y| f.evaluate(x, y).expect("same shape")).collect())
        .collect();
    let form = GramForm::new(data.shape().clone(), entries)?;
    Ok(InducedForm { form, data })
}

/// Induced form on `L^perp / L` for an isotropic submodule `L`.
pub fn quotient_form(f: &GramForm, l: &Submodule) -> Result<InducedForm> {
    let p = f.perp(l)?;
    if !l.is_subset_of(&p)? {
        return Err(Error::NotIsotropic);
    }
    induced_subquotient_form(f, &p, l)
}

/// One homogeneous block of an orthogonal splitting.
#[derive(Clone, Debug)]
pub struct SplitBlock {
    /// The common factor length of the block (free over `R/m^i`).
    pub factor_length: u32,
    /// Gram form of the block in the embedded basis.
    pub form: GramForm,
    /// The embedded basis inside the original module.
    pub basis: Vec<ModuleElem>,
}

/// Split a non-degenerate form into homogeneous non-degenerate blocks,
/// one free over `R/m^i` per occurring factor length `i`.
pub fn orthogonal_split(f: &GramForm) -> Result<Vec<SplitBlock>> {
    if !f.is_nondegenerate() {
        return Err(Error::Degenerate);
    }
    let ring = f.ring();
    let n = ring.n();
    // pieces of the recursion: (factor length, basis vectors in M)
    let mut pieces: Vec<(u32, Vec<ModuleElem>)> = Vec::new();
    let mut current = f.clone();
    // basis of the current abstract module inside the original one
    let mut embed: Vec<ModuleElem> = f.shape().standard_basis();
    loop {
        let lengths = current.shape().factor_lengths().to_vec();
        if lengths.is_empty() {
            break;
        }
        let r = lengths[0];
        let min_val = n - r;
        // a cyclic summand with unit-normalized self-pairing, if any
        let diag_hit = (0..lengths.len())
            .find(|&a| lengths[a] == r && current.gram().get(a, a).valuation() == min_val);
        let piece: Vec<usize> = if let Some(a) = diag_hit {
            vec![a]
        } else {
            // hyperbolic-style two-generator block, needed when p = 2
            let mut found = None;
            'outer: for a in 0..lengths.len() {
                if lengths[a] != r {
                    continue;
                }
                for b in (a + 1)..lengths.len() {
                    if lengths[b] == r && current.gram().get(a, b).valuation() == min_val {
                        found = Some((a, b));
                        break 'outer;
                    }
                }
            }
            let (a, b) = found.ok_or(Error::Degenerate)?;
            vec![a, b]
        };
        let piece_elems: Vec<ModuleElem> = piece.iter().map(|&a| embed[a].clone()).collect();
        // perp of the piece inside the current abstract module
        let piece_sub = submodule_from_generators(
            current.shape(),
            &piece.iter().map(|&a| current.shape().basis_elem(a)).collect::<Vec<_>>(),
        )?;
        let perp = current.perp(&piece_sub)?;
        let restricted = restrict(&current, &perp)?;
        // map the new abstract basis back into the original module
        let mut new_embed = Vec::new();
        for b in &restricted.basis {
            let mut acc = f.shape().zero_elem();
            for (c, e) in b.coords().iter().zip(&embed) {
                acc = acc.add(&e.scale(c))?;
            }
            new_embed.push(acc);
        }
        pieces.push((r, piece_elems));
        current = restricted.form;
        embed = new_embed;
    }
    // merge pieces of equal factor length into homogeneous blocks
    let mut blocks: Vec<SplitBlock> = Vec::new();
    let mut lengths_seen: Vec<u32> = pieces.iter().map(|&(r, _)| r).collect();
    lengths_seen.sort_unstable_by(|a, b| b.cmp(a));
    lengths_seen.dedup();
    for r in lengths_seen {
        let basis: Vec<ModuleElem> = pieces
            .iter()
            .filter(|&&(pr, _)| pr == r)
            .flat_map(|(_, es)| es.clone())
            .collect();
        let block_shape = ModuleShape::new(ring, vec![r; basis.len()])?;
        let entries: Vec<Vec<RingElem>> = basis
            .iter()
            .map(|x| basis.iter().map(|y| f.evaluate(x, y).expect("same shape")).collect())
            .collect();
        let form = GramForm::new(block_shape, entries)?;
        if !form.is_nondegenerate() {
            return Err(Error::Degenerate);
        }
        blocks.push(SplitBlock { factor_length: r, form, basis });
    }
    let total: u32 = blocks.iter().map(|b| b.form.shape().length()).sum();
    debug_assert_eq!(total, f.shape().length());
    Ok(blocks)
}

/// A symmetric bilinear form over a composite modulus `Z/N`, given on a
/// direct sum of cyclic groups `Z/d_a` with values in `Z/N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositeForm {
    modulus: u64,
    orders: Vec<u64>,
    gram: Vec<Vec<u64>>,
}

impl CompositeForm {
    pub fn new(modulus: u64, orders: Vec<u64>, gram: Vec<Vec<u64>>) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidRing(format!("modulus {modulus} must be >= 2")));
        }
        let k = orders.len();
        if gram.len() != k || gram.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidGram(format!("expected a {k}x{k} matrix")));
        }
        for (a, &d) in orders.iter().enumerate() {
            if d < 2 || modulus % d != 0 {
                return Err(Error::InvalidShape(format!(
                    "order {d} of factor {a} does not divide the modulus {modulus}"
                )));
            }
        }
        let mut canon = vec![vec![0u64; k]; k];
        for a in 0..k {
            for b in 0..k {
                if gram[a][b] % modulus != gram[b][a] % modulus {
                    return Err(Error::InvalidGram(format!("not symmetric at ({a},{b})")));
                }
                let e = gram[a][b] % modulus;
                // the entry must be annihilated by both factor orders
                let d = gcd_u64(orders[a], orders[b]);
                if (e as u128 * d as u128) % modulus as u128 != 0 {
                    return Err(Error::InvalidGram(format!(
                        "entry ({a},{b}) = {e} is not annihilated by the factor orders"
                    )));
                }
                canon[a][b] = e;
            }
        }
        Ok(CompositeForm { modulus, orders, gram: canon })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn gram(&self) -> &[Vec<u64>] {
        &self.gram
    }

    /// CRT projection of shape and Gram entries per prime component.
    pub fn localize(&self) -> Result<MultiForm> {
        let spec = crt_decompose(self.modulus)?;
        let mut components = Vec::new();
        for &ring in spec.components() {
            let p = ring.p();
            let q = ring.size();
            // rows that survive at this prime, with their local lengths
            let mut rows: Vec<(usize, u32)> = Vec::new();
            for (a, &d) in self.orders.iter().enumerate() {
                let mut v = 0u32;
                let mut dd = d;
                while dd % p == 0 {
                    dd /= p;
                    v += 1;
                }
                if v > 0 {
                    rows.push((a, v));
                }
            }
            // descending factor lengths, stable in the original order
            rows.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
            let lengths: Vec<u32> = rows.iter().map(|&(_, v)| v).collect();
            let shape = ModuleShape::new(ring, lengths)?;
            let entries: Vec<Vec<RingElem>> = rows
                .iter()
                .map(|&(a, _)| {
                    rows.iter().map(|&(b, _)| ring.from_integer(self.gram[a][b] % q)).collect()
                })
                .collect();
            let form = GramForm::new(shape, entries)?;
            let row_map = rows.iter().map(|&(a, _)| a).collect();
            components.push(MultiComponent { ring, form, row_map });
        }
        Ok(MultiForm { modulus: self.modulus, components })
    }
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

/// One CRT component of a composite form.
#[derive(Clone, Debug)]
pub struct MultiComponent {
    pub ring: LocalRing,
    pub form: GramForm,
    /// Component row index -> original basis index.
    pub row_map: Vec<usize>,
}

/// A form split into its CRT components.
#[derive(Clone, Debug)]
pub struct MultiForm {
    modulus: u64,
    components: Vec<MultiComponent>,
}

impl MultiForm {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn components(&self) -> &[MultiComponent] {
        &self.components
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.components.iter().all(|c| c.form.is_nondegenerate())
    }
}

/// Quotient data of `M / L` for a plain shape (re-export convenience).
pub fn shape_quotient(shape: &ModuleShape, l: &Submodule) -> Result<crate::module::QuotientData> {
    quotient_shape(shape, l)
}
