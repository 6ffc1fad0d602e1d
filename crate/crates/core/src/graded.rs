//! The filtration and graded machinery: lower/upper roots, the `lr_s`
//! filtration, socle, shaving, the residue-field pieces `rho_i` and the
//! assembled odd/even forms.
//!
//! The roots quantify over the ideal generators `pi^i` only; `rM` and
//! `M[r]` depend only on the ideal `(r)`, so nothing is lost (this is
//! unit-tested against the elementwise definition).

use crate::form::{induced_subquotient_form, GramForm, InducedForm};
use crate::module::{
    intersect, scale_submodule, sum, torsion_submodule, ModuleElem, ModuleShape, Submodule,
};
use crate::ring::{LocalRing, RingElem};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// `lr(M) = sum_i (m^i M  ∩  M[m^i])`.
pub fn lower_root(shape: &ModuleShape) -> Submodule {
    let full = shape.full_submodule();
    let mut acc = shape.zero_submodule();
    for i in 0..=shape.ring().n() {
        let term = intersect(&scale_submodule(&full, i), &torsion_submodule(&full, i))
            .expect("same shape");
        acc = sum(&acc, &term).expect("same shape");
    }
    acc
}

/// `ur(M) = intersection_i (m^i M + M[m^i])`.
pub fn upper_root(shape: &ModuleShape) -> Submodule {
    let full = shape.full_submodule();
    let mut acc = full.clone();
    for i in 0..=shape.ring().n() {
        let term =
            sum(&scale_submodule(&full, i), &torsion_submodule(&full, i)).expect("same shape");
        acc = intersect(&acc, &term).expect("same shape");
    }
    acc
}

/// `lr_s(M) = sum_{i >= 0} (m^i M ∩ M[m^{i-s+1}])`, with `M[m^{-t}] = 0`.
pub fn lr_s(shape: &ModuleShape, s: i64) -> Submodule {
    let n = shape.ring().n() as i64;
    let full = shape.full_submodule();
    let mut acc = shape.zero_submodule();
    for i in 0..=n {
        let torsion_exp = i - s + 1;
        if torsion_exp <= 0 {
            continue;
        }
        let torsion_exp = torsion_exp.min(n) as u32;
        let term = intersect(&scale_submodule(&full, i as u32), &torsion_submodule(&full, torsion_exp))
            .expect("same shape");
        acc = sum(&acc, &term).expect("same shape");
    }
    acc
}

/// The socle `M[m]`, the sum of the simple submodules.
pub fn socle(shape: &ModuleShape) -> Submodule {
    torsion_submodule(&shape.full_submodule(), 1)
}

/// The induced form on `M / M[m]` over the smaller ring `R/m^{n-1}`.
#[derive(Clone, Debug)]
pub struct SocleQuotient {
    pub form: GramForm,
    /// Index into the original factor list per retained factor.
    pub kept: Vec<usize>,
}

/// Quotient by the socle: factor lengths drop by one, Gram entries are
/// read in `N/N[m]`, i.e. reduced into `R/m^{n-1}`. Requires `n >= 2`.
pub fn quotient_by_socle(f: &GramForm) -> Result<SocleQuotient> {
    let ring = f.ring();
    if ring.n() < 2 {
        return Err(Error::ExponentTooSmall { required: 2, actual: ring.n() });
    }
    let small = LocalRing::new(ring.family(), ring.p(), ring.n() - 1)?;
    let kept: Vec<usize> = f
        .shape()
        .factor_lengths()
        .iter()
        .enumerate()
        .filter(|&(_, &r)| r >= 2)
        .map(|(a, _)| a)
        .collect();
    let lengths: Vec<u32> = kept.iter().map(|&a| f.shape().factor_lengths()[a] - 1).collect();
    let shape = ModuleShape::new(small, lengths)?;
    let entries: Vec<Vec<RingElem>> = kept
        .iter()
        .map(|&a| kept.iter().map(|&b| f.gram().get(a, b).truncate_to(&small)).collect())
        .collect();
    let form = GramForm::new(shape, entries)?;
    Ok(SocleQuotient { form, kept })
}

/// Shaving: the induced form on `Sh(M) = M[m^{r-1}] / m^{r-1} M` where
/// `Ann(M) = m^r`. Requires `r >= 2`.
pub fn shave(f: &GramForm) -> Result<InducedForm> {
    let r = f.shape().exponent();
    if r < 2 {
        return Err(Error::ExponentTooSmall { required: 2, actual: r });
    }
    let full = f.shape().full_submodule();
    let t = torsion_submodule(&full, r - 1);
    let s = scale_submodule(&full, r - 1);
    induced_subquotient_form(f, &t, &s)
}

/// A symmetric bilinear form over the residue field `F_p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FFForm {
    p: u64,
    dim: usize,
    /// Row-major, entries in `[0, p)`.
    gram: Vec<u64>,
}

impl FFForm {
    pub fn new(p: u64, rows: &[Vec<u64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidGram("matrix is not square".into()));
        }
        let mut gram = vec![0u64; dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                if rows[a][b] % p != rows[b][a] % p {
                    return Err(Error::InvalidGram(format!("not symmetric at ({a},{b})")));
                }
                gram[a * dim + b] = rows[a][b] % p;
            }
        }
        Ok(FFForm { p, dim, gram })
    }

    pub fn empty(p: u64) -> FFForm {
        FFForm { p, dim: 0, gram: Vec::new() }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize) -> u64 {
        self.gram[a * self.dim + b]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        (0..self.dim).map(|a| (0..self.dim).map(|b| self.get(a, b)).collect()).collect()
    }

    /// `v^T G v` mod p.
    pub fn evaluate(&self, v: &[u64]) -> u64 {
        let mut acc: u128 = 0;
        for a in 0..self.dim {
            if v[a] % self.p == 0 {
                continue;
            }
            for b in 0..self.dim {
                acc += (v[a] % self.p) as u128 * self.get(a, b) as u128 * (v[b] % self.p) as u128;
            }
        }
        (acc % self.p as u128) as u64
    }

    pub fn rank(&self) -> usize {
        let mut m = self.rows();
        let p = self.p;
        let mut rank = 0;
        for col in 0..self.dim {
            let pivot = (rank..self.dim).find(|&r| m[r][col] % p != 0);
            let Some(pr) = pivot else { continue };
            m.swap(rank, pr);
            let inv = mod_pow(m[rank][col], p - 2, p);
            for c in 0..self.dim {
                m[rank][c] = m[rank][c] * inv % p;
            }
            for r in 0..self.dim {
                if r != rank && m[r][col] % p != 0 {
                    let f = m[r][col] % p;
                    for c in 0..self.dim {
                        m[r][c] = (m[r][c] + (p - f) * m[rank][c]) % p;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.rank() == self.dim
    }

    pub fn block_sum(&self, other: &FFForm) -> FFForm {
        assert_eq!(self.p, other.p);
        let dim = self.dim + other.dim;
        let mut gram = vec![0u64; dim * dim];
        for a in 0..self.dim {
            for b in 0..self.dim {
                gram[a * dim + b] = self.get(a, b);
            }
        }
        for a in 0..other.dim {
            for b in 0..other.dim {
                gram[(self.dim + a) * dim + self.dim + b] = other.get(a, b);
            }
        }
        FFForm { p: self.p, dim, gram }
    }

    pub fn scale(&self, c: u64) -> FFForm {
        let gram = self.gram.iter().map(|&x| x * (c % self.p) % self.p).collect();
        FFForm { p: self.p, dim: self.dim, gram }
    }

    /// Complete isometry invariant of a symmetric bilinear form over `F_p`:
    /// dimension, rank, and for the form modulo its radical either the
    /// square class of the determinant (odd `p`) or the alternating bit
    /// (`p = 2`).
    pub fn isometry_class(&self) -> (usize, usize, u8) {
        let rank = self.rank();
        if rank == 0 {
            return (self.dim, 0, 0);
        }
        // a symmetric matrix of rank r has a nonsingular r x r principal minor
        let subset = subsets_of_size(self.dim, rank)
            .into_iter()
            .find(|s| {
                let minor: Vec<Vec<u64>> = s
                    .iter()
                    .map(|&a| s.iter().map(|&b| self.get(a, b)).collect())
                    .collect();
                det_mod_p(&minor, self.p) != 0
            })
            .expect("rank-sized nonsingular principal minor exists");
        let minor: Vec<Vec<u64>> =
            subset.iter().map(|&a| subset.iter().map(|&b| self.get(a, b)).collect()).collect();
        let disc = if self.p == 2 {
            // alternating (all self-pairings zero) vs not
            if (0..rank).all(|a| minor[a][a] == 0) {
                2
            } else {
                1
            }
        } else {
            let d = det_mod_p(&minor, self.p);
            if mod_pow(d, (self.p - 1) / 2, self.p) == 1 {
                1
            } else {
                2
            }
        };
        (self.dim, rank, disc)
    }
}

fn mod_pow(mut base: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

fn det_mod_p(m: &[Vec<u64>], p: u64) -> u64 {
    let n = m.len();
    let mut m: Vec<Vec<u64>> = m.to_vec();
    let mut det = 1u64;
    for col in 0..n {
        let pivot = (col..n).find(|&r| m[r][col] % p != 0);
        let Some(pr) = pivot else { return 0 };
        if pr != col {
            m.swap(col, pr);
            det = (p - det) % p;
        }
        det = det * (m[col][col] % p) % p;
        let inv = mod_pow(m[col][col], p - 2, p);
        for r in (col + 1)..n {
            if m[r][col] % p != 0 {
                let f = m[r][col] * inv % p;
                for c in col..n {
                    m[r][c] = (m[r][c] + (p - f) * m[col][c] % p) % p;
                }
            }
        }
    }
    det
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// One graded piece `rho_i(M)` with its `F_p` form and lifted basis.
#[derive(Clone, Debug)]
pub struct RhoData {
    pub index: u32,
    pub ff: FFForm,
    /// Elements of `M` representing the classes.
    pub lifts: Vec<ModuleElem>,
}

/// `rho_i` of the form. Odd indices are computed from the defining
/// subquotient with the `F_p` pairing `<x,y> / pi^{n-1}`; even indices
/// recurse through the socle quotient.
pub fn rho(f: &GramForm, i: u32) -> Result<RhoData> {
    if i == 0 {
        return Err(Error::InvalidParameter("rho is defined for i >= 1".into()));
    }
    if i % 2 == 1 {
        rho_odd(f, i)
    } else {
        let ring = f.ring();
        if ring.n() < 2 {
            return Ok(RhoData { index: i, ff: FFForm::empty(ring.p()), lifts: Vec::new() });
        }
        let sq = quotient_by_socle(f)?;
        let inner = rho(&sq.form, i - 1)?;
        // lift representatives back into M along the retained coordinates
        let lifts = inner
            .lifts
            .iter()
            .map(|x| {
                let mut coords = vec![ring.zero(); f.shape().num_factors()];
                for (idx, c) in x.coords().iter().enumerate() {
                    coords[sq.kept[idx]] = c.lift_to(&ring);
                }
                f.shape().element(coords)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RhoData { index: i, ff: inner.ff, lifts })
    }
}

fn rho_odd(f: &GramForm, i: u32) -> Result<RhoData> {
    debug_assert!(i % 2 == 1);
    let shape = f.shape();
    let ring = shape.ring();
    let n = ring.n();
    let full = shape.full_submodule();
    let j = i / 2;
    let clamp = |e: u32| e.min(n);
    let top = scale_submodule(&torsion_submodule(&full, clamp(i)), j);
    let bot = sum(
        &scale_submodule(&torsion_submodule(&full, clamp(i.saturating_sub(1))), j),
        &scale_submodule(&torsion_submodule(&full, clamp(i + 1)), j + 1),
    )?;
    let induced = induced_rho_quotient(f, &top, &bot)?;
    Ok(RhoData { index: i, ff: induced.0, lifts: induced.1 })
}

/// Subquotient with the pairing read in `N[m] = pi^{n-1} N` as `F_p`.
fn induced_rho_quotient(
    f: &GramForm,
    top: &Submodule,
    bot: &Submodule,
) -> Result<(FFForm, Vec<ModuleElem>)> {
    let data = crate::module::subquotient(top, bot)?;
    let qshape = data.shape();
    if qshape.factor_lengths().iter().any(|&r| r != 1) {
        return Err(Error::InvalidShape(
            "graded piece is not a vector space; the input is inconsistent".into(),
        ));
    }
    let n = f.ring().n();
    let lifts = data.lifts().to_vec();
    let rows: Vec<Vec<u64>> = lifts
        .iter()
        .map(|x| {
            lifts
                .iter()
                .map(|y| {
                    let v = f.evaluate(x, y)?;
                    Ok(v.divide_by_pi_power(n - 1)?.residue())
                })
                .collect::<Result<Vec<u64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((FFForm::new(f.ring().p(), &rows)?, lifts))
}

/// A block-diagonal assembly of `rho_i` pieces over one parity.
#[derive(Clone, Debug)]
pub struct AssembledForm {
    pub ff: FFForm,
    pub parts: Vec<RhoData>,
}

impl AssembledForm {
    fn build(f: &GramForm, indices: impl Iterator<Item = u32>) -> Result<AssembledForm> {
        let mut ff = FFForm::empty(f.ring().p());
        let mut parts = Vec::new();
        for i in indices {
            let rd = rho(f, i)?;
            if rd.ff.dim() > 0 {
                ff = ff.block_sum(&rd.ff);
            }
            parts.push(rd);
        }
        Ok(AssembledForm { ff, parts })
    }
}

/// `rho_1 ⊥ rho_3 ⊥ ...` as an `F_p` form.
pub fn odd_form(f: &GramForm) -> Result<AssembledForm> {
    let r = f.shape().exponent();
    AssembledForm::build(f, (1..=r).filter(|i| i % 2 == 1))
}

/// `rho_2 ⊥ rho_4 ⊥ ...` as an `F_p` form.
pub fn even_form(f: &GramForm) -> Result<AssembledForm> {
    let r = f.shape().exponent();
    AssembledForm::build(f, (1..=r).filter(|i| i % 2 == 0))
}

/// The two tail assemblies `⊥_{i >= d odd} rho_i` and `⊥_{i >= d even} rho_i`.
pub fn tail_forms(f: &GramForm, d: u32) -> Result<(AssembledForm, AssembledForm)> {
    let r = f.shape().exponent();
    let odd = AssembledForm::build(f, (1..=r).filter(|&i| i % 2 == 1 && i >= d))?;
    let even = AssembledForm::build(f, (1..=r).filter(|&i| i % 2 == 0 && i >= d))?;
    Ok((odd, even))
}

/// Direct construction of the odd form on `ur(M)/lr(M)` (the cross-check
/// for the assembled block form): the induced pairing divided by
/// `pi^{n-1}`, together with the quotient data.
pub fn odd_form_direct(f: &GramForm) -> Result<(FFForm, crate::module::SubquotientData)> {
    let shape = f.shape();
    let ur = upper_root(shape);
    let lr = lower_root(shape);
    let data = crate::module::subquotient(&ur, &lr)?;
    if data.shape().factor_lengths().iter().any(|&r| r != 1) {
        return Err(Error::InvalidShape("ur/lr must be semisimple".into()));
    }
    let n = f.ring().n();
    let lifts = data.lifts().to_vec();
    let rows: Vec<Vec<u64>> = lifts
        .iter()
        .map(|x| {
            lifts
                .iter()
                .map(|y| {
                    let v = f.evaluate(x, y)?;
                    Ok(v.divide_by_pi_power(n - 1)?.residue())
                })
                .collect::<Result<Vec<u64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((FFForm::new(f.ring().p(), &rows)?, data))
}

/// Verify that the assembled odd form agrees with the direct construction
/// on `ur/lr` through the natural map: the lift classes form a basis and
/// the change of basis carries one Gram to the other.
pub fn verify_odd_assembly(f: &GramForm) -> Result<bool> {
    let assembled = odd_form(f)?;
    let (direct, data) = odd_form_direct(f)?;
    if assembled.ff.dim() != direct.dim() {
        return Ok(false);
    }
    let p = f.ring().p();
    let dim = direct.dim();
    if dim == 0 {
        return Ok(true);
    }
    // columns of phi: coordinates of each assembled lift in ur/lr
    let mut phi: Vec<Vec<u64>> = Vec::new();
    for part in &assembled.parts {
        for lift in &part.lifts {
            let class = data.project(lift)?;
            phi.push(class.coords().iter().map(|c| c.residue()).collect());
        }
    }
    // phi must be invertible over F_p
    let phi_rows: Vec<Vec<u64>> = (0..dim).map(|r| (0..dim).map(|c| phi[c][r]).collect()).collect();
    if det_mod_p(&phi_rows, p) == 0 {
        return Ok(false);
    }
    // pairings transported through phi must match the assembled Gram
    for (a, va) in phi.iter().enumerate() {
        for (b, vb) in phi.iter().enumerate() {
            let mut acc: u128 = 0;
            for (i, &xa) in va.iter().enumerate() {
                for (j, &xb) in vb.iter().enumerate() {
                    acc += xa as u128 * direct.get(i, j) as u128 * xb as u128;
                }
            }
            if (acc % p as u128) as u64 != assembled.ff.get(a, b) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
