//! Decision procedures: anisotropy over the residue field, anisotropy and
//! quasi-anisotropy of Gram forms, and the radical-root formula.
//!
//! The closed-form finite-field classifier is validated against brute
//! force before anything relies on it (see the classifier suites); below
//! the brute-force threshold the exhaustive scan is authoritative.

use crate::form::{GramForm, MultiForm};
use crate::graded::{even_form, quotient_by_socle, tail_forms, FFForm};
use crate::module::Submodule;
use crate::ring::LocalRing;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Exhaustive search is used while `p^dim` stays below this bound.
pub const FF_BRUTE_THRESHOLD: u128 = 1 << 16;

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

fn is_square_mod_p(x: u64, p: u64) -> bool {
    if x % p == 0 {
        return true;
    }
    mod_pow(x, (p - 1) / 2, p) == 1
}

fn det_mod_p(m: &[Vec<u64>], p: u64) -> u64 {
    let n = m.len();
    let mut m: Vec<Vec<u64>> = m.to_vec();
    let mut det = 1u64;
    for col in 0..n {
        let Some(pr) = (col..n).find(|&r| m[r][col] % p != 0) else { return 0 };
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

/// Scan nonzero vectors in lexicographic order (first coordinate most
/// significant) until an isotropic one is found.
fn lex_isotropic_witness(f: &FFForm, limit: Option<u128>) -> Option<Vec<u64>> {
    let p = f.p() as u128;
    let total = p.checked_pow(f.dim() as u32)?;
    let stop = limit.map_or(total, |l| l.min(total));
    let mut w: u128 = 1;
    while w < stop {
        let mut v = vec![0u64; f.dim()];
        let mut rest = w;
        for a in (0..f.dim()).rev() {
            v[a] = (rest % p) as u64;
            rest /= p;
        }
        if f.evaluate(&v) == 0 {
            return Some(v);
        }
        w += 1;
    }
    None
}

/// Closed-form classifier; only consulted above the brute-force threshold
/// (or by the suites that validate it against the exhaustive scan).
pub fn ff_is_anisotropic_closed_form(f: &FFForm) -> bool {
    let p = f.p();
    if f.dim() == 0 {
        return true;
    }
    if p == 2 {
        // over F_2 the self-pairing is a linear functional; anisotropic
        // means its kernel is trivial
        return f.dim() == 1 && f.get(0, 0) == 1;
    }
    match f.dim() {
        1 => f.get(0, 0) % p != 0,
        2 => {
            let det = det_mod_p(&f.rows(), p);
            det != 0 && !is_square_mod_p((p - det) % p, p)
        }
        _ => false,
    }
}

/// Anisotropy over `F_p`, with the lexicographically first isotropic
/// vector as witness on the negative side.
pub fn ff_is_anisotropic(f: &FFForm) -> (bool, Option<Vec<u64>>) {
    let size = (f.p() as u128).saturating_pow(f.dim() as u32);
    if size <= FF_BRUTE_THRESHOLD {
        match lex_isotropic_witness(f, None) {
            Some(w) => (false, Some(w)),
            None => (true, None),
        }
    } else if ff_is_anisotropic_closed_form(f) {
        (true, None)
    } else {
        // a witness exists; vectors supported on the last few coordinates
        // come first in the scan, so this terminates quickly
        let w = lex_isotropic_witness(f, None).expect("classifier says isotropic");
        (false, Some(w))
    }
}

/// One isotropic witness of a graded form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnisoWitness {
    pub p: u64,
    /// "odd" or "even".
    pub parity: String,
    pub vector: Vec<u64>,
}

/// Verdicts for one CRT component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentVerdict {
    pub p: u64,
    pub odd_anisotropic: bool,
    pub even_anisotropic: bool,
    pub quasi_anisotropic: bool,
}

/// Decision report for a form (possibly over a product ring).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnisoReport {
    pub per_prime: Vec<ComponentVerdict>,
    pub anisotropic: bool,
    pub quasi_anisotropic: bool,
    pub witnesses: Vec<AnisoWitness>,
}

fn component_report(f: &GramForm) -> Result<(ComponentVerdict, Vec<AnisoWitness>)> {
    let p = f.ring().p();
    let odd = crate::graded::odd_form(f)?;
    let even = even_form(f)?;
    let (odd_ok, odd_w) = ff_is_anisotropic(&odd.ff);
    let (even_ok, even_w) = ff_is_anisotropic(&even.ff);
    let mut witnesses = Vec::new();
    if let Some(v) = odd_w {
        witnesses.push(AnisoWitness { p, parity: "odd".into(), vector: v });
    }
    if let Some(v) = even_w {
        witnesses.push(AnisoWitness { p, parity: "even".into(), vector: v });
    }
    let quasi = is_quasi_anisotropic_local(f)?;
    Ok((
        ComponentVerdict { p, odd_anisotropic: odd_ok, even_anisotropic: even_ok, quasi_anisotropic: quasi },
        witnesses,
    ))
}

/// Anisotropy of a form over a local ring.
pub fn is_anisotropic(f: &GramForm) -> Result<AnisoReport> {
    let (verdict, witnesses) = component_report(f)?;
    let anisotropic = verdict.odd_anisotropic && verdict.even_anisotropic;
    let quasi = verdict.quasi_anisotropic;
    Ok(AnisoReport {
        per_prime: vec![verdict],
        anisotropic,
        quasi_anisotropic: quasi,
        witnesses,
    })
}

/// Anisotropy of a form over a product ring, component by component.
pub fn is_anisotropic_multi(multi: &MultiForm) -> Result<AnisoReport> {
    let mut per_prime = Vec::new();
    let mut witnesses = Vec::new();
    for c in multi.components() {
        let (v, w) = component_report(&c.form)?;
        per_prime.push(v);
        witnesses.extend(w);
    }
    let anisotropic = per_prime.iter().all(|v| v.odd_anisotropic && v.even_anisotropic);
    let quasi = per_prime.iter().all(|v| v.quasi_anisotropic);
    Ok(AnisoReport { per_prime, anisotropic, quasi_anisotropic: quasi, witnesses })
}

fn is_quasi_anisotropic_local(f: &GramForm) -> Result<bool> {
    if !f.is_nondegenerate() {
        return Ok(false);
    }
    let (odd_tail, even_tail) = tail_forms(f, 2)?;
    Ok(ff_is_anisotropic(&odd_tail.ff).0 && ff_is_anisotropic(&even_tail.ff).0)
}

/// Non-degenerate with both graded sums beyond index 1 anisotropic.
pub fn is_quasi_anisotropic(f: &GramForm) -> Result<bool> {
    is_quasi_anisotropic_local(f)
}

pub fn is_quasi_anisotropic_multi(multi: &MultiForm) -> Result<bool> {
    for c in multi.components() {
        if !is_quasi_anisotropic_local(&c.form)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Result of the radical-root formula `lr_{d-1}(M)`.
#[derive(Clone, Debug)]
pub struct RadicalRootFormula {
    pub submodule: Submodule,
    /// Minimal `d >= 2` with both tail forms anisotropic.
    pub d: u32,
    /// Equality with the definition-level radical root is guaranteed for
    /// odd residue characteristic; at `p = 2` only containment holds.
    pub equality_expected: bool,
}

/// `lr_{d-1}(M)` for the minimal `d >= 2` making both tails anisotropic.
pub fn radical_root_formula(f: &GramForm) -> Result<RadicalRootFormula> {
    if !f.is_nondegenerate() {
        return Err(Error::Degenerate);
    }
    let r = f.shape().exponent();
    let mut chosen = r + 1;
    for d in 2..=(r + 1) {
        let (odd_tail, even_tail) = tail_forms(f, d)?;
        if ff_is_anisotropic(&odd_tail.ff).0 && ff_is_anisotropic(&even_tail.ff).0 {
            chosen = d;
            break;
        }
    }
    let submodule = crate::graded::lr_s(f.shape(), chosen as i64 - 1);
    Ok(RadicalRootFormula {
        submodule,
        d: chosen,
        equality_expected: f.ring().p() != 2,
    })
}

/// Radical roots of the CRT components of a composite form.
pub fn radical_root_multi(multi: &MultiForm) -> Result<Vec<(LocalRing, RadicalRootFormula)>> {
    if !multi.is_nondegenerate() {
        return Err(Error::Degenerate);
    }
    multi
        .components()
        .iter()
        .map(|c| Ok((c.ring, radical_root_formula(&c.form)?)))
        .collect()
}

/// Relevant decision outputs for the unit-rescaling invariance check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionOutputs {
    pub per_prime: Vec<ComponentVerdict>,
    pub anisotropic: bool,
    pub quasi_anisotropic: bool,
    pub radical_root: Option<(Submodule, u32)>,
}

/// Decision outputs of a local form, for comparing `G` against `uG`.
pub fn decision_outputs(f: &GramForm) -> Result<DecisionOutputs> {
    let report = is_anisotropic(f)?;
    let rr = if f.is_nondegenerate() {
        let r = radical_root_formula(f)?;
        Some((r.submodule, r.d))
    } else {
        None
    };
    Ok(DecisionOutputs {
        per_prime: report.per_prime,
        anisotropic: report.anisotropic,
        quasi_anisotropic: report.quasi_anisotropic,
        radical_root: rr,
    })
}

/// The induced form on `M / Soc(M)` used by the quasi-anisotropy
/// equivalences: anisotropy of the socle quotient.
pub fn socle_quotient_anisotropic(f: &GramForm) -> Result<bool> {
    if f.ring().n() < 2 {
        // the quotient is the zero module over the zero ring
        return Ok(true);
    }
    let sq = quotient_by_socle(f)?;
    Ok(is_anisotropic(&sq.form)?.anisotropic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::ModuleShape;
    use crate::ring::LocalRing;

    fn paper_z4_form() -> GramForm {
        let shape = ModuleShape::new(LocalRing::zpn(2, 2).unwrap(), vec![2, 2]).unwrap();
        GramForm::from_ints(shape, &[vec![2, 1], vec![1, 2]]).unwrap()
    }

    /// brute-force anisotropy oracle, independent of the scan order
    fn brute_aniso(f: &FFForm) -> bool {
        let p = f.p();
        let total = (p as u128).pow(f.dim() as u32);
        for w in 1..total {
            let mut v = vec![0u64; f.dim()];
            let mut rest = w;
            for a in (0..f.dim()).rev() {
                v[a] = (rest % p as u128) as u64;
                rest /= p as u128;
            }
            if f.evaluate(&v) == 0 {
                return false;
            }
        }
        true
    }

    #[test]
    fn ff_examples() {
        let hyper = FFForm::new(2, &[vec![0, 1], vec![1, 0]]).unwrap();
        let (ok, w) = ff_is_anisotropic(&hyper);
        assert!(!ok);
        assert_eq!(w, Some(vec![0, 1])); // lexicographically first isotropic

        let unit = FFForm::new(3, &[vec![1]]).unwrap();
        assert!(ff_is_anisotropic(&unit).0);

        let diag11 = FFForm::new(3, &[vec![1, 0], vec![0, 1]]).unwrap();
        assert!(brute_aniso(&diag11)); // x^2 + y^2 != 0 mod 3
        assert!(ff_is_anisotropic(&diag11).0);
        // matches the closed form: -det = -1 = 2 is a nonsquare mod 3
        assert!(ff_is_anisotropic_closed_form(&diag11));

        // any nondegenerate dim-3 form over F_3 is isotropic
        let f3 =
            FFForm::new(3, &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 2]]).unwrap();
        assert!(!brute_aniso(&f3));
        assert!(!ff_is_anisotropic(&f3).0);
        assert!(!ff_is_anisotropic_closed_form(&f3));
    }

    #[test]
    fn classifier_matches_brute_force_exhaustive() {
        for p in [2u64, 3] {
            for dim in 0..=3usize {
                let entries = dim * (dim + 1) / 2;
                let total = p.pow(entries as u32);
                for code in 0..total {
                    let mut rest = code;
                    let mut rows = vec![vec![0u64; dim]; dim];
                    for a in 0..dim {
                        for b in a..dim {
                            let v = rest % p;
                            rest /= p;
                            rows[a][b] = v;
                            rows[b][a] = v;
                        }
                    }
                    let f = FFForm::new(p, &rows).unwrap();
                    assert_eq!(
                        ff_is_anisotropic_closed_form(&f),
                        brute_aniso(&f),
                        "p={p} rows={rows:?}"
                    );
                    // the public entry point agrees as well
                    assert_eq!(ff_is_anisotropic(&f).0, brute_aniso(&f));
                }
            }
        }
    }

    #[test]
    fn classifier_matches_brute_force_sampled() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(99);
        for _ in 0..10_000 {
            let p = if rng.gen_bool(0.5) { 5u64 } else { 7 };
            let dim = rng.gen_range(0..=3usize);
            let mut rows = vec![vec![0u64; dim]; dim];
            for a in 0..dim {
                for b in a..dim {
                    let v = rng.gen_range(0..p);
                    rows[a][b] = v;
                    rows[b][a] = v;
                }
            }
            let f = FFForm::new(p, &rows).unwrap();
            assert_eq!(ff_is_anisotropic_closed_form(&f), brute_aniso(&f));
        }
    }

    #[test]
    fn witness_is_lex_first_and_revalidates() {
        let f = FFForm::new(3, &[vec![0, 1], vec![1, 0]]).unwrap();
        let (ok, w) = ff_is_anisotropic(&f);
        assert!(!ok);
        let w = w.unwrap();
        assert_eq!(f.evaluate(&w), 0);
        assert_eq!(w, vec![0, 1]);
    }

    #[test]
    fn paper_matrix_is_not_anisotropic() {
        let f = paper_z4_form();
        let report = is_anisotropic(&f).unwrap();
        assert!(!report.anisotropic);
        assert!(report.per_prime[0].odd_anisotropic);
        assert!(!report.per_prime[0].even_anisotropic);
        assert!(!report.quasi_anisotropic); // rho_2 is the even tail
        for w in &report.witnesses {
            assert_eq!(w.parity, "even");
        }
    }

    #[test]
    fn cyclic_nondegenerate_is_anisotropic() {
        for ring in [
            LocalRing::zpn(2, 3).unwrap(),
            LocalRing::zpn(3, 2).unwrap(),
            LocalRing::fpt(2, 2).unwrap(),
        ] {
            for r in 1..=ring.n() {
                let shape = ModuleShape::new(ring, vec![r]).unwrap();
                let f = GramForm::new(shape, vec![vec![ring.pi_pow(ring.n() - r)]]).unwrap();
                assert!(f.is_nondegenerate());
                assert!(is_anisotropic(&f).unwrap().anisotropic, "{} r={r}", ring.name());
            }
        }
    }

    #[test]
    fn field_case_reduces_to_ff() {
        // n = 1: anisotropy is plain residue-field anisotropy of the Gram
        let ring = LocalRing::zpn(3, 1).unwrap();
        let shape = ModuleShape::new(ring, vec![1, 1]).unwrap();
        for rows in [
            vec![vec![1u64, 0], vec![0, 1]],
            vec![vec![0, 1], vec![1, 0]],
            vec![vec![1, 0], vec![0, 2]],
        ] {
            let f = GramForm::from_ints(shape.clone(), &rows).unwrap();
            let ff = FFForm::new(3, &rows).unwrap();
            assert_eq!(is_anisotropic(&f).unwrap().anisotropic, ff_is_anisotropic(&ff).0);
        }
    }

    #[test]
    fn quasi_examples() {
        // anisotropic implies quasi-anisotropic
        let ring = LocalRing::zpn(3, 2).unwrap();
        let shape = ModuleShape::new(ring, vec![2]).unwrap();
        let f = GramForm::from_ints(shape, &[vec![1]]).unwrap();
        assert!(is_anisotropic(&f).unwrap().anisotropic);
        assert!(is_quasi_anisotropic(&f).unwrap());

        // the paper matrix is not quasi-anisotropic
        assert!(!is_quasi_anisotropic(&paper_z4_form()).unwrap());

        // hyperbolic semisimple plane: isotropic rho_1 is excluded
        let ss = ModuleShape::new(LocalRing::zpn(3, 1).unwrap(), vec![1, 1]).unwrap();
        let f = GramForm::from_ints(ss, &[vec![0, 1], vec![1, 0]]).unwrap();
        assert!(f.is_nondegenerate());
        assert!(!is_anisotropic(&f).unwrap().anisotropic);
        assert!(is_quasi_anisotropic(&f).unwrap());
    }

    #[test]
    fn radical_root_formula_examples() {
        let f = paper_z4_form();
        let rr = radical_root_formula(&f).unwrap();
        assert_eq!(rr.d, 3);
        assert!(rr.submodule.is_zero());
        assert!(!rr.equality_expected);

        // quasi-anisotropic: d = 2 and the result is the lower root
        let ring = LocalRing::zpn(3, 2).unwrap();
        let shape = ModuleShape::new(ring, vec![2]).unwrap();
        let f = GramForm::from_ints(shape.clone(), &[vec![1]]).unwrap();
        let rr = radical_root_formula(&f).unwrap();
        assert_eq!(rr.d, 2);
        assert_eq!(rr.submodule, crate::graded::lower_root(&shape));
        assert!(rr.equality_expected);

        // semisimple nondegenerate: zero
        let ss = ModuleShape::new(LocalRing::zpn(3, 1).unwrap(), vec![1, 1]).unwrap();
        let f = GramForm::from_ints(ss, &[vec![0, 1], vec![1, 0]]).unwrap();
        assert!(radical_root_formula(&f).unwrap().submodule.is_zero());

        // degenerate rejected
        let shape = ModuleShape::new(LocalRing::zpn(2, 2).unwrap(), vec![2]).unwrap();
        let g = GramForm::from_ints(shape, &[vec![2]]).unwrap();
        assert!(matches!(radical_root_formula(&g), Err(Error::Degenerate)));
    }

    #[test]
    fn radical_root_contained_in_lower_root() {
        let forms = [
            paper_z4_form(),
            GramForm::from_ints(
                ModuleShape::new(LocalRing::zpn(2, 3).unwrap(), vec![3, 2, 1]).unwrap(),
                &[vec![1, 2, 4], vec![2, 2, 0], vec![4, 0, 4]],
            )
            .unwrap(),
        ];
        for f in forms {
            if !f.is_nondegenerate() {
                continue;
            }
            let rr = radical_root_formula(&f).unwrap();
            let lr = crate::graded::lower_root(f.shape());
            assert!(rr.submodule.is_subset_of(&lr).unwrap());
        }
    }

    #[test]
    fn radical_root_multi_examples() {
        // squarefree modulus: all components semisimple, radical root zero
        let f = crate::form::CompositeForm::new(30, vec![30], vec![vec![1]]).unwrap();
        let multi = f.localize().unwrap();
        for (_, rr) in radical_root_multi(&multi).unwrap() {
            assert!(rr.submodule.is_zero());
        }

        // paper matrix extended by an orthogonal unit block over Z/12
        let f = crate::form::CompositeForm::new(
            12,
            vec![4, 4, 3],
            vec![vec![6, 3, 0], vec![3, 6, 0], vec![0, 0, 4]],
        )
        .unwrap();
        let multi = f.localize().unwrap();
        // mod 4 this is [[2,3],[3,2]] ~ the paper matrix up to units
        let roots = radical_root_multi(&multi).unwrap();
        assert_eq!(roots.len(), 2);
        for (_, rr) in roots {
            assert!(rr.submodule.is_zero());
        }
    }

    #[test]
    fn unit_rescaling_invariance_spot() {
        let f = paper_z4_form();
        let base = decision_outputs(&f).unwrap();
        for u in [1u64, 3] {
            let uf = f.scale(&f.ring().from_integer(u)).unwrap();
            assert_eq!(decision_outputs(&uf).unwrap(), base);
        }
    }
}
