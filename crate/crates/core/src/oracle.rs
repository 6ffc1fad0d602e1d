//! Brute-force oracles and theorem suites.
//!
//! The checkers evaluate the structural statements directly from their
//! definitions (enumerating submodules and elements under a budget); the
//! suites sweep instance spaces of Gram matrices, exhaustively when the
//! space is small and by seeded sampling otherwise, and record every
//! violated relation with a replayable instance descriptor.

use crate::aniso::{
    decision_outputs, is_anisotropic, is_quasi_anisotropic, radical_root_formula,
    socle_quotient_anisotropic, AnisoWitness,
};
use crate::form::{quotient_form, GramForm};
use crate::graded::{even_form, lower_root, odd_form, quotient_by_socle, shave, upper_root};
use crate::module::{
    enumerate_submodules, intersect, scale_submodule, submodule_from_generators, subquotient,
    ModuleElem, ModuleShape, Submodule,
};
use crate::ring::{LocalRing, RingFamily};
use crate::{Error, Result, DEFAULT_ENUM_BUDGET, DEFAULT_GRAM_BUDGET};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// The five conditions of the anisotropy equivalence theorem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionTag {
    I,
    II,
    III,
    IV,
    V,
}

/// A witness refuting a condition.
#[derive(Clone, Debug)]
pub enum Witness {
    Submodule(Submodule),
    Element(ModuleElem),
    Graded(AnisoWitness),
}

#[derive(Clone, Debug)]
pub struct ConditionVerdict {
    pub tag: ConditionTag,
    pub holds: bool,
    pub witness: Option<Witness>,
}

/// Evaluate all five conditions in one sweep over the submodule lattice.
pub fn check_all_conditions(f: &GramForm, budget: u64) -> Result<Vec<ConditionVerdict>> {
    let subs = enumerate_submodules(f.shape(), budget)?;
    check_all_conditions_with_subs(f, &subs)
}

fn check_all_conditions_with_subs(
    f: &GramForm,
    subs: &[Submodule],
) -> Result<Vec<ConditionVerdict>> {
    let shape = f.shape();
    let nondeg = f.is_nondegenerate();
    let lr = lower_root(shape);
    let mut isotropic: Vec<(Submodule, Submodule)> = Vec::new();
    for l in subs {
        let p = f.perp(l)?;
        if l.is_subset_of(&p)? {
            isotropic.push((l.clone(), p));
        }
    }

    // I: the graded forms are anisotropic
    let report = is_anisotropic(f)?;
    let v1 = ConditionVerdict {
        tag: ConditionTag::I,
        holds: report.anisotropic,
        witness: report.witnesses.first().cloned().map(Witness::Graded),
    };

    // II: lr is the only isotropic L with semisimple L^perp/L
    let mut v2 = ConditionVerdict { tag: ConditionTag::II, holds: nondeg, witness: None };
    let mut saw_lr = false;
    for (l, p) in &isotropic {
        let q = subquotient(p, l)?;
        if q.shape().is_semisimple() {
            if *l == lr {
                saw_lr = true;
            } else if v2.witness.is_none() {
                v2.holds = false;
                v2.witness = Some(Witness::Submodule(l.clone()));
            }
        }
    }
    if !saw_lr {
        v2.holds = false;
    }

    // III: every isotropic L sits inside lr and lr(L^perp/L) = lr(M)/L
    let mut v3 = ConditionVerdict { tag: ConditionTag::III, holds: nondeg, witness: None };
    if nondeg {
        for (l, _) in &isotropic {
            if !l.is_subset_of(&lr)? {
                v3.holds = false;
                v3.witness = Some(Witness::Submodule(l.clone()));
                break;
            }
            if !lr_quotient_stable(f, l, &lr)? {
                v3.holds = false;
                v3.witness = Some(Witness::Submodule(l.clone()));
                break;
            }
        }
    }

    // IV: every isotropic L sits inside lr
    let mut v4 = ConditionVerdict { tag: ConditionTag::IV, holds: nondeg, witness: None };
    if nondeg {
        for (l, _) in &isotropic {
            if !l.is_subset_of(&lr)? {
                v4.holds = false;
                v4.witness = Some(Witness::Submodule(l.clone()));
                break;
            }
        }
    }

    // V: every self-isotropic element lies in lr
    let mut v5 = ConditionVerdict { tag: ConditionTag::V, holds: nondeg, witness: None };
    if nondeg {
        for x in shape.elements() {
            if f.evaluate(&x, &x)?.is_zero() && !lr.contains(&x)? {
                v5.holds = false;
                v5.witness = Some(Witness::Element(x));
                break;
            }
        }
    }

    Ok(vec![v1, v2, v3, v4, v5])
}

/// One of the five conditions on its own.
pub fn check_condition(f: &GramForm, tag: ConditionTag, budget: u64) -> Result<ConditionVerdict> {
    let all = check_all_conditions(f, budget)?;
    let idx = match tag {
        ConditionTag::I => 0,
        ConditionTag::II => 1,
        ConditionTag::III => 2,
        ConditionTag::IV => 3,
        ConditionTag::V => 4,
    };
    Ok(all[idx].clone())
}

/// Does `lr(L^perp/L) = lr(M)/L` hold (with `L` inside `lr(M)`)?
fn lr_quotient_stable(f: &GramForm, l: &Submodule, lr: &Submodule) -> Result<bool> {
    let induced = quotient_form(f, l)?;
    let lr_q = lower_root(induced.form.shape());
    // image of lr(M) in the quotient
    let mut imgs = Vec::new();
    for g in lr.generators() {
        imgs.push(induced.data.project(&g)?);
    }
    let image = submodule_from_generators(induced.form.shape(), &imgs)?;
    Ok(image == lr_q)
}

/// Re-evaluate a recorded witness against the defining predicate.
pub fn witness_refutes(f: &GramForm, tag: ConditionTag, witness: &Witness) -> Result<bool> {
    let lr = lower_root(f.shape());
    match (tag, witness) {
        (ConditionTag::I, Witness::Graded(w)) => {
            let assembled =
                if w.parity == "odd" { odd_form(f)? } else { even_form(f)? };
            let nonzero = w.vector.iter().any(|&c| c % w.p != 0);
            Ok(nonzero && assembled.ff.evaluate(&w.vector) == 0)
        }
        (ConditionTag::II, Witness::Submodule(l)) => {
            let p = f.perp(l)?;
            if !l.is_subset_of(&p)? {
                return Ok(false);
            }
            let q = subquotient(&p, l)?;
            Ok(q.shape().is_semisimple() && *l != lr)
        }
        (ConditionTag::III, Witness::Submodule(l)) => {
            let p = f.perp(l)?;
            if !l.is_subset_of(&p)? {
                return Ok(false);
            }
            if !l.is_subset_of(&lr)? {
                return Ok(true);
            }
            Ok(!lr_quotient_stable(f, l, &lr)?)
        }
        (ConditionTag::IV, Witness::Submodule(l)) => {
            let p = f.perp(l)?;
            Ok(l.is_subset_of(&p)? && !l.is_subset_of(&lr)?)
        }
        (ConditionTag::V, Witness::Element(x)) => {
            Ok(f.evaluate(x, x)?.is_zero() && !lr.contains(x)?)
        }
        _ => Ok(false),
    }
}

/// Definition-level radical root: the intersection of all isotropic `L`
/// with semisimple `L^perp/L`.
pub fn radical_root_oracle(f: &GramForm, budget: u64) -> Result<Submodule> {
    let subs = enumerate_submodules(f.shape(), budget)?;
    radical_root_oracle_with_subs(f, &subs)
}

fn radical_root_oracle_with_subs(f: &GramForm, subs: &[Submodule]) -> Result<Submodule> {
    if !f.is_nondegenerate() {
        return Err(Error::Degenerate);
    }
    let mut acc = f.shape().full_submodule();
    for l in subs {
        let p = f.perp(l)?;
        if !l.is_subset_of(&p)? {
            continue;
        }
        let q = subquotient(&p, l)?;
        if q.shape().is_semisimple() {
            acc = intersect(&acc, l)?;
        }
    }
    Ok(acc)
}

/// The three equivalent quasi-anisotropy conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KsiVerdicts {
    /// i: quasi-anisotropy of the graded tails.
    pub quasi: bool,
    /// ii: the induced form on `M/Soc(M)` is anisotropic.
    pub socle_quotient_anisotropic: bool,
    /// iii: `lr(L^perp/L) = lr(M)/L` for every `L` inside `lr(M)`.
    pub lr_stability: bool,
}

pub fn check_ksi(f: &GramForm, budget: u64) -> Result<KsiVerdicts> {
    let lr = lower_root(f.shape());
    let subs_in_lr: Vec<Submodule> = enumerate_submodules(f.shape(), budget)?
        .into_iter()
        .filter(|l| l.is_subset_of(&lr).unwrap_or(false))
        .collect();
    check_ksi_with_subs(f, &lr, &subs_in_lr)
}

fn check_ksi_with_subs(
    f: &GramForm,
    lr: &Submodule,
    subs_in_lr: &[Submodule],
) -> Result<KsiVerdicts> {
    if !f.is_nondegenerate() {
        return Err(Error::Degenerate);
    }
    let quasi = is_quasi_anisotropic(f)?;
    let socle_q = socle_quotient_anisotropic(f)?;
    let mut stable = true;
    for l in subs_in_lr {
        if !lr_quotient_stable(f, l, lr)? {
            stable = false;
            break;
        }
    }
    Ok(KsiVerdicts { quasi, socle_quotient_anisotropic: socle_q, lr_stability: stable })
}

/// The named verification suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteName {
    Main1,
    Ksi,
    Srt,
    Ar1,
    Ji,
    Per,
    Moma,
    Threes,
    Us,
}

impl SuiteName {
    pub fn parse(s: &str) -> Option<SuiteName> {
        Some(match s {
            "main1" => SuiteName::Main1,
            "ksi" => SuiteName::Ksi,
            "srt" => SuiteName::Srt,
            "ar1" => SuiteName::Ar1,
            "ji" => SuiteName::Ji,
            "per" => SuiteName::Per,
            "moma" => SuiteName::Moma,
            "threes" => SuiteName::Threes,
            "us" => SuiteName::Us,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SuiteName::Main1 => "main1",
            SuiteName::Ksi => "ksi",
            SuiteName::Srt => "srt",
            SuiteName::Ar1 => "ar1",
            SuiteName::Ji => "ji",
            SuiteName::Per => "per",
            SuiteName::Moma => "moma",
            SuiteName::Threes => "threes",
            SuiteName::Us => "us",
        }
    }

    pub fn all() -> [SuiteName; 9] {
        [
            SuiteName::Main1,
            SuiteName::Ksi,
            SuiteName::Srt,
            SuiteName::Ar1,
            SuiteName::Ji,
            SuiteName::Per,
            SuiteName::Moma,
            SuiteName::Threes,
            SuiteName::Us,
        ]
    }
}

/// Parameters of a suite run. Identical parameters and seed produce an
/// identical result.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteParams {
    pub suite: SuiteName,
    pub family: RingFamily,
    pub p: u64,
    /// Shapes are partitions of at most this total length ...
    pub max_len: u32,
    /// ... into at most this many parts.
    pub max_factors: usize,
    /// Explicit shape list overriding the partition filter.
    pub shapes: Option<Vec<Vec<u32>>>,
    /// Exhaustive iteration while the Gram count stays at or below this,
    /// seeded uniform sampling of this many instances otherwise.
    pub samples: u64,
    pub seed: u64,
    /// Element-count budget for submodule enumeration.
    pub enum_budget: u64,
}

impl SuiteParams {
    pub fn new(suite: SuiteName, p: u64) -> SuiteParams {
        SuiteParams {
            suite,
            family: RingFamily::IntegersModPrimePower,
            p,
            max_len: 4,
            max_factors: 2,
            shapes: None,
            samples: DEFAULT_GRAM_BUDGET,
            seed: 0,
            enum_budget: DEFAULT_ENUM_BUDGET,
        }
    }
}

/// A replayable description of one instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDescriptor {
    pub family: String,
    pub p: u64,
    pub n: u32,
    /// Cyclic factor sizes `p^{r_a}`.
    pub module: Vec<u64>,
    /// Integer encodings of the Gram entries.
    pub gram: Vec<Vec<u64>>,
}

impl InstanceDescriptor {
    pub fn from_form(f: &GramForm) -> InstanceDescriptor {
        let ring = f.ring();
        InstanceDescriptor {
            family: match ring.family() {
                RingFamily::IntegersModPrimePower => "Zp".into(),
                RingFamily::TruncatedPolynomials => "Fpt".into(),
            },
            p: ring.p(),
            n: ring.n(),
            module: f.shape().factor_lengths().iter().map(|&r| ring.p().pow(r)).collect(),
            gram: f.gram_encodings(),
        }
    }

    /// The instance as an input document accepted by the analyzer.
    pub fn to_spec_json(&self) -> serde_json::Value {
        serde_json::json!({
            "ring": {"family": self.family, "p": self.p, "n": self.n},
            "module": self.module,
            "gram": self.gram,
        })
    }

    /// Rebuild the Gram form.
    pub fn to_form(&self) -> Result<GramForm> {
        let family = match self.family.as_str() {
            "Zp" => RingFamily::IntegersModPrimePower,
            "Fpt" => RingFamily::TruncatedPolynomials,
            other => {
                return Err(Error::InvalidParameter(format!("unknown family {other}")));
            }
        };
        let ring = LocalRing::new(family, self.p, self.n)?;
        let mut lengths = Vec::new();
        for &m in &self.module {
            let mut r = 0u32;
            let mut mm = m;
            while mm > 1 {
                if mm % self.p != 0 {
                    return Err(Error::InvalidShape(format!("{m} is not a power of {}", self.p)));
                }
                mm /= self.p;
                r += 1;
            }
            lengths.push(r);
        }
        let shape = ModuleShape::new(ring, lengths)?;
        GramForm::from_ints(shape, &self.gram)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FailureRecord {
    pub instance: InstanceDescriptor,
    pub check: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteResult {
    pub params: SuiteParams,
    pub instances: u64,
    /// Instances skipped because the statement under test assumes
    /// non-degeneracy.
    pub degenerate_skipped: u64,
    pub failures: Vec<FailureRecord>,
    pub stats: BTreeMap<String, u64>,
    /// Wall-clock runtime; not part of the deterministic payload.
    pub duration_ms: u64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// All shapes matching the partition filter, in a fixed order.
pub fn shapes_for(params: &SuiteParams) -> Vec<Vec<u32>> {
    if let Some(shapes) = &params.shapes {
        return shapes.clone();
    }
    let mut out = Vec::new();
    for total in 1..=params.max_len {
        let mut cur = Vec::new();
        partitions(total, total, params.max_factors, &mut cur, &mut out);
    }
    // shaving needs exponent at least 2
    if params.suite == SuiteName::Threes {
        out.retain(|s| s[0] >= 2);
    }
    out
}

fn partitions(rest: u32, max_part: u32, slots: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if rest == 0 {
        out.push(cur.clone());
        return;
    }
    if slots == 0 {
        return;
    }
    let mut part = max_part.min(rest);
    while part >= 1 {
        cur.push(part);
        partitions(rest - part, part, slots - 1, cur, out);
        cur.pop();
        part -= 1;
    }
}

/// Number of symmetric Gram matrices on a shape.
pub fn gram_count(p: u64, lengths: &[u32]) -> u128 {
    let mut total: u128 = 1;
    for a in 0..lengths.len() {
        for b in a..lengths.len() {
            total = total.saturating_mul((p as u128).pow(lengths[a].min(lengths[b])));
        }
    }
    total
}

struct GramSpace {
    shape: ModuleShape,
    /// Upper-triangular entry slots `(a, b, radix)`.
    slots: Vec<(usize, usize, u64)>,
    /// Multiplier `p^{n - min(r_a, r_b)}` per slot.
    shifts: Vec<u64>,
    total: u128,
}

impl GramSpace {
    fn new(shape: ModuleShape) -> GramSpace {
        let p = shape.ring().p();
        let n = shape.ring().n();
        let lengths = shape.factor_lengths().to_vec();
        let mut slots = Vec::new();
        let mut shifts = Vec::new();
        for a in 0..lengths.len() {
            for b in a..lengths.len() {
                let min = lengths[a].min(lengths[b]);
                slots.push((a, b, p.pow(min)));
                shifts.push(p.pow(n - min));
            }
        }
        let total = gram_count(p, &lengths);
        GramSpace { shape, slots, shifts, total }
    }

    fn form_from_codes(&self, codes: &[u64]) -> GramForm {
        let k = self.shape.num_factors();
        let mut entries = vec![vec![0u64; k]; k];
        for (s, &(a, b, _)) in self.slots.iter().enumerate() {
            let v = codes[s] * self.shifts[s];
            entries[a][b] = v;
            entries[b][a] = v;
        }
        GramForm::from_ints(self.shape.clone(), &entries).expect("entries are compatible")
    }

    fn nth(&self, mut idx: u128) -> GramForm {
        let mut codes = vec![0u64; self.slots.len()];
        for (s, &(_, _, radix)) in self.slots.iter().enumerate() {
            codes[s] = (idx % radix as u128) as u64;
            idx /= radix as u128;
        }
        self.form_from_codes(&codes)
    }

    fn sample(&self, rng: &mut ChaCha20Rng) -> GramForm {
        let codes: Vec<u64> =
            self.slots.iter().map(|&(_, _, radix)| rng.gen_range(0..radix)).collect();
        self.form_from_codes(&codes)
    }
}

struct SuiteCtx {
    params: SuiteParams,
    instances: u64,
    degenerate_skipped: u64,
    failures: Vec<FailureRecord>,
    stats: BTreeMap<String, u64>,
    unit_rng: ChaCha20Rng,
    extra_rng: ChaCha20Rng,
}

impl SuiteCtx {
    fn fail(&mut self, f: &GramForm, check: &str, detail: String) {
        self.failures.push(FailureRecord {
            instance: InstanceDescriptor::from_form(f),
            check: check.into(),
            detail,
        });
    }

    fn bump(&mut self, key: &str) {
        *self.stats.entry(key.into()).or_insert(0) += 1;
    }
}

/// Per-shape data reused across the Gram sweep.
struct ShapeCache {
    subs: Vec<Submodule>,
    subs_in_lr: Vec<Submodule>,
    lr: Submodule,
    ur: Submodule,
    /// `(s, lr_s(M))` for the filtration range, for the duality check.
    lr_s_table: Vec<(i64, Submodule)>,
    sh_subs: Vec<Submodule>,
}

fn build_cache(shape: &ModuleShape, params: &SuiteParams) -> Result<ShapeCache> {
    let needs_subs = matches!(
        params.suite,
        SuiteName::Main1
            | SuiteName::Ksi
            | SuiteName::Srt
            | SuiteName::Ar1
            | SuiteName::Per
            | SuiteName::Us
            | SuiteName::Threes
    );
    let subs = if needs_subs {
        enumerate_submodules(shape, params.enum_budget)?
    } else {
        Vec::new()
    };
    let lr = lower_root(shape);
    let ur = upper_root(shape);
    let subs_in_lr = if params.suite == SuiteName::Ksi {
        subs.iter()
            .filter(|l| l.is_subset_of(&lr).unwrap_or(false))
            .cloned()
            .collect()
    } else {
        Vec::new()
    };
    let lr_s_table = if params.suite == SuiteName::Ji {
        let r = shape.exponent() as i64;
        ((-r)..=(r + 1)).map(|s| (s, crate::graded::lr_s(shape, s))).collect()
    } else {
        Vec::new()
    };
    let sh_subs = if params.suite == SuiteName::Threes {
        // the shaved shape is form-independent
        let r = shape.exponent();
        let mut lengths = Vec::new();
        for &ra in shape.factor_lengths() {
            let new = if ra == r { r.saturating_sub(2) } else { ra };
            if new > 0 {
                lengths.push(new);
            }
        }
        let sh = ModuleShape::new(shape.ring(), lengths)?;
        enumerate_submodules(&sh, params.enum_budget)?
    } else {
        Vec::new()
    };
    Ok(ShapeCache { subs, subs_in_lr, lr, ur, lr_s_table, sh_subs })
}

/// Run one named suite. Deterministic for fixed parameters (except the
/// recorded wall-clock runtime).
pub fn run_suite(params: &SuiteParams) -> Result<SuiteResult> {
    let start = std::time::Instant::now();
    // parameter validation; each shape brings its own n
    let _ = LocalRing::new(params.family, params.p, 1)?;
    let mut ctx = SuiteCtx {
        params: params.clone(),
        instances: 0,
        degenerate_skipped: 0,
        failures: Vec::new(),
        stats: BTreeMap::new(),
        unit_rng: ChaCha20Rng::seed_from_u64(params.seed ^ 0x9E37_79B9_7F4A_7C15),
        extra_rng: ChaCha20Rng::seed_from_u64(params.seed ^ 0x5851_F42D_4C95_7F2D),
    };
    let mut sample_rng = ChaCha20Rng::seed_from_u64(params.seed);
    for lengths in shapes_for(params) {
        let n = *lengths.iter().max().expect("nonempty shape");
        let ring = LocalRing::new(params.family, params.p, n)?;
        let shape = ModuleShape::new(ring, lengths)?;
        let cache = build_cache(&shape, params)?;
        let space = GramSpace::new(shape);
        if space.total <= params.samples as u128 {
            for idx in 0..space.total {
                let f = space.nth(idx);
                run_instance(&f, &cache, &mut ctx)?;
            }
        } else {
            for _ in 0..params.samples {
                let f = space.sample(&mut sample_rng);
                run_instance(&f, &cache, &mut ctx)?;
            }
        }
    }
    Ok(SuiteResult {
        params: params.clone(),
        instances: ctx.instances,
        degenerate_skipped: ctx.degenerate_skipped,
        failures: ctx.failures,
        stats: ctx.stats,
        duration_ms: start.elapsed().as_millis() as u64,
    })
}

fn run_instance(f: &GramForm, cache: &ShapeCache, ctx: &mut SuiteCtx) -> Result<()> {
    ctx.instances += 1;
    let nondeg = f.is_nondegenerate();
    ctx.bump(if nondeg { "nondegenerate" } else { "degenerate" });
    match ctx.params.suite {
        SuiteName::Main1 => check_main1(f, cache, nondeg, ctx)?,
        SuiteName::Ar1 => check_ar1(f, cache, nondeg, ctx)?,
        SuiteName::Per => check_per(f, cache, nondeg, ctx)?,
        SuiteName::Ji => check_ji(f, cache, nondeg, ctx)?,
        SuiteName::Moma => check_moma(f, nondeg, ctx)?,
        SuiteName::Threes => check_threes(f, cache, nondeg, ctx)?,
        SuiteName::Srt => check_srt(f, cache, nondeg, ctx)?,
        SuiteName::Us => check_us(f, cache, nondeg, ctx)?,
        SuiteName::Ksi => check_ksi_suite(f, cache, nondeg, ctx)?,
    }
    check_unit_invariance(f, ctx)?;
    Ok(())
}

fn check_main1(f: &GramForm, cache: &ShapeCache, nondeg: bool, ctx: &mut SuiteCtx) -> Result<()> {
    let verdicts = check_all_conditions_with_subs(f, &cache.subs)?;
    let holds: Vec<bool> = verdicts.iter().map(|v| v.holds).collect();
    let (i, ii, iii, iv, v) = (holds[0], holds[1], holds[2], holds[3], holds[4]);
    if i != ii {
        ctx.fail(f, "main1.i_iff_ii", format!("i={i} ii={ii}"));
    }
    if ii != iii {
        ctx.fail(f, "main1.ii_iff_iii", format!("ii={ii} iii={iii}"));
    }
    if iii && !iv {
        ctx.fail(f, "main1.iii_implies_iv", format!("iii={iii} iv={iv}"));
    }
    if iv != v {
        ctx.fail(f, "main1.iv_iff_v", format!("iv={iv} v={v}"));
    }
    // all five are equivalent when 2 is invertible in R/Ann(M)
    let two_invertible = ctx.params.p != 2 || f.shape().exponent() == 0;
    if two_invertible && iv != i {
        ctx.fail(f, "main1.full_equivalence", format!("i={i} iv={iv}"));
    }
    if iv && v && !i {
        ctx.bump("iv_v_not_i");
    }
    // recorded witnesses must replay
    for verdict in &verdicts {
        if let Some(w) = &verdict.witness {
            if verdict.holds {
                ctx.fail(f, "main1.witness_on_true", format!("{:?}", verdict.tag));
            } else if !witness_refutes(f, verdict.tag, w)? {
                ctx.fail(f, "main1.witness_replay", format!("{:?}", verdict.tag));
            }
        }
    }
    // standing invariant: lr always qualifies in the nondegenerate case
    if nondeg {
        let p = f.perp(&cache.lr)?;
        let qualifies = cache.lr.is_subset_of(&p)?
            && subquotient(&p, &cache.lr)?.shape().is_semisimple();
        if !qualifies {
            ctx.fail(f, "main1.lr_qualifies", "lower root does not qualify".into());
        }
    }
    Ok(())
}

fn check_ar1(f: &GramForm, cache: &ShapeCache, nondeg: bool, ctx: &mut SuiteCtx) -> Result<()> {
    if !nondeg {
        if f.kernel().is_zero() {
            ctx.fail(f, "ar1.kernel", "degenerate form with zero kernel".into());
        }
        return Ok(());
    }
    let total = f.shape().length();
    for l in &cache.subs {
        let p = f.perp(l)?;
        if l.length() + p.length() != total {
            ctx.fail(
                f,
                "ar1.length",
                format!("len {} + {} != {}", l.length(), p.length(), total),
            );
        }
        let pp = f.perp(&p)?;
        if pp != *l {
            ctx.fail(f, "ar1.double_perp", "perp(perp(L)) != L".into());
        }
    }
    Ok(())
}

fn check_per(f: &GramForm, cache: &ShapeCache, nondeg: bool, ctx: &mut SuiteCtx) -> Result<()> {
    if !nondeg {
        ctx.degenerate_skipped += 1;
        return Ok(());
    }
    let perps: Vec<Submodule> =
        cache.subs.iter().map(|l| f.perp(l)).collect::<Result<Vec<_>>>()?;
    for (a, l1) in cache.subs.iter().enumerate() {
        for (b, l2) in cache.subs.iter().enumerate() {
            let s = crate::module::sum(l1, l2)?;
            let lhs = f.perp(&s)?;
            let rhs = intersect(&perps[a], &perps[b])?;
            if lhs != rhs {
                ctx.fail(f, "per.sum", "perp(L1+L2) != perp(L1) ∩ perp(L2)".into());
            }
            let i = intersect(l1, l2)?;
            let lhs = f.perp(&i)?;
            let rhs = crate::module::sum(&perps[a], &perps[b])?;
            if lhs != rhs {
                ctx.fail(f, "per.intersect", "perp(L1∩L2) != perp(L1) + perp(L2)".into());
            }
        }
    }
    Ok(())
}

fn check_ji(f: &GramForm, cache: &ShapeCache, nondeg: bool, ctx: &mut SuiteCtx) -> Result<()> {
    // unconditional chain lr ⊆ ur^perp ⊆ lr^perp
    let urp = f.perp(&cache.ur)?;
    let lrp = f.perp(&cache.lr)?;
    if !cache.lr.is_subset_of(&urp)? {
        ctx.fail(f, "ji.lr_in_ur_perp", "lr not inside perp(ur)".into());
    }
    if !urp.is_subset_of(&lrp)? {
        ctx.fail(f, "ji.ur_perp_in_lr_perp", "perp(ur) not inside perp(lr)".into());
    }
    // per-factor root lengths
    let want_lr: u32 = f.shape().factor_lengths().iter().map(|r| r / 2).sum();
    let want_ur: u32 = f.shape().factor_lengths().iter().map(|r| r.div_ceil(2)).sum();
    if cache.lr.length() != want_lr || cache.ur.length() != want_ur {
        ctx.fail(f, "ji.root_lengths", "per-factor root length formula".into());
    }
    if nondeg {
        if lrp != cache.ur {
            ctx.fail(f, "ji.lr_perp_is_ur", "perp(lr) != ur".into());
        }
        if !cache.lr.is_subset_of(&lrp)? {
            ctx.fail(f, "ji.lr_isotropic", "lr not inside its perp".into());
        }
        let q = subquotient(&lrp, &cache.lr)?;
        if !q.shape().is_semisimple() {
            ctx.fail(f, "ji.semisimple", "perp(lr)/lr not semisimple".into());
        }
        // duality of the whole filtration: perp(lr_s) = lr_{1-s}
        for (s, sub) in &cache.lr_s_table {
            let dual = cache
                .lr_s_table
                .iter()
                .find(|(t, _)| *t == 1 - s)
                .map(|(_, l)| l.clone())
                .unwrap_or_else(|| crate::graded::lr_s(f.shape(), 1 - s));
            if f.perp(sub)? != dual {
                ctx.fail(f, "ji.lr_s_duality", format!("perp(lr_{s}) != lr_{}", 1 - s));
            }
        }
    }
    Ok(())
}

fn merk_cross_vanish(f: &GramForm) -> Result<bool> {
    let odd = odd_form(f)?;
    for (a, pa) in odd.parts.iter().enumerate() {
        for pb in odd.parts.iter().skip(a + 1) {
            for x in &pa.lifts {
                for y in &pb.lifts {
                    if !f.evaluate(x, y)?.is_zero() {
                        return Ok(false);
                    }
                }
            }
        }
    }
    if f.ring().n() >= 2 {
        let sq = quotient_by_socle(f)?;
        return merk_cross_vanish(&sq.form);
    }
    Ok(true)
}

fn check_moma(f: &GramForm, nondeg: bool, ctx: &mut SuiteCtx) -> Result<()> {
    let odd = odd_form(f)?;
    let even = even_form(f)?;
    // i: nondegeneracy transfers to the graded forms and back
    let graded_nondeg = odd.ff.is_nondegenerate() && even.ff.is_nondegenerate();
    if nondeg != graded_nondeg {
        ctx.fail(f, "moma.nondegeneracy", format!("module {nondeg} graded {graded_nondeg}"));
    }
    // rho dimensions equal factor multiplicities
    for part in odd.parts.iter().chain(even.parts.iter()) {
        let mult =
            f.shape().factor_lengths().iter().filter(|&&r| r == part.index).count();
        if part.ff.dim() != mult {
            ctx.fail(f, "moma.rho_dim", format!("rho_{} dim {}", part.index, part.ff.dim()));
        }
    }
    // orthogonality of the graded decomposition
    if !merk_cross_vanish(f)? {
        ctx.fail(f, "moma.orthogonal", "cross pairings of rho pieces".into());
    }
    // the assembled odd form agrees with the direct ur/lr construction
    if !crate::graded::verify_odd_assembly(f)? {
        ctx.fail(f, "moma.odd_assembly", "assembled vs direct odd form".into());
    }
    if f.ring().n() >= 2 {
        let sq = quotient_by_socle(f)?;
        if !crate::graded::verify_odd_assembly(&sq.form)? {
            ctx.fail(f, "moma.even_assembly", "assembled vs direct even form".into());
        }
    }
    // additivity of rho under orthogonal sums, against a seeded companion
    let companion = GramSpace::new(f.shape().clone()).sample(&mut ctx.extra_rng);
    let sum = f.direct_sum(&companion)?;
    let max_r = f.shape().exponent();
    for i in 1..=max_r {
        let lhs = crate::graded::rho(&sum, i)?.ff;
        let rhs = crate::graded::rho(f, i)?.ff.block_sum(&crate::graded::rho(&companion, i)?.ff);
        if lhs.isometry_class() != rhs.isometry_class() {
            ctx.fail(f, "moma.rho_additive", format!("rho_{i} of an orthogonal sum"));
        }
    }
    Ok(())
}

fn check_threes(f: &GramForm, cache: &ShapeCache, nondeg: bool, ctx: &mut SuiteCtx) -> Result<()> {
    let r = f.shape().exponent();
    debug_assert!(r >= 2);
    let sh = shave(f)?;
    let full = f.shape().full_submodule();
    let s = scale_submodule(&full, r - 1);
    // preimage identities for the roots
    let lr_sh = lower_root(sh.form.shape());
    let pre_lr = sh.data.preimage(&lr_sh, &s)?;
    if pre_lr != cache.lr {
        ctx.fail(f, "threes.lr_preimage", "lr(M) != preimage of lr(Sh(M))".into());
    }
    let ur_sh = upper_root(sh.form.shape());
    let pre_ur = sh.data.preimage(&ur_sh, &s)?;
    if pre_ur != cache.ur {
        ctx.fail(f, "threes.ur_preimage", "ur(M) != preimage of ur(Sh(M))".into());
    }
    // the rho merge at index r-2
    for i in 1..=r {
        let got = crate::graded::rho(&sh.form, i)?.ff;
        let want_class = if i >= r {
            crate::graded::FFForm::empty(f.ring().p()).isometry_class()
        } else if i + 2 == r && r >= 3 {
            let a = crate::graded::rho(f, r - 2)?.ff;
            let b = crate::graded::rho(f, r)?.ff;
            a.block_sum(&b).isometry_class()
        } else {
            crate::graded::rho(f, i)?.ff.isometry_class()
        };
        if got.isometry_class() != want_class {
            ctx.fail(f, "threes.rho_merge", format!("rho_{i} of Sh(M)"));
        }
    }
    // the shaving correspondence for nearly self-dual submodules
    if !nondeg {
        ctx.degenerate_skipped += 1;
        return Ok(());
    }
    let t = crate::module::torsion_submodule(&full, r - 1);
    let mut s1 = Vec::new();
    let mut s1_restricted = Vec::new();
    for l in &cache.subs {
        if !l.is_subset_of(&t)? {
            continue;
        }
        let perp = f.perp(l)?;
        if !l.is_subset_of(&perp)? {
            continue;
        }
        if !scale_submodule(&perp, 1).is_subset_of(l)? {
            continue;
        }
        s1.push(l.clone());
        if s.is_subset_of(l)? {
            s1_restricted.push(l.clone());
        }
    }
    let mut s2 = Vec::new();
    for l in &cache.sh_subs {
        let perp = sh.form.perp(l)?;
        if l.is_subset_of(&perp)? && scale_submodule(&perp, 1).is_subset_of(l)? {
            s2.push(l.clone());
        }
    }
    let image = |l: &Submodule| -> Result<Submodule> {
        let mut gens = Vec::new();
        for g in l.generators() {
            gens.push(sh.data.project(&g)?);
        }
        submodule_from_generators(sh.form.shape(), &gens)
    };
    let mut images = Vec::new();
    for l in &s1 {
        let img = image(l)?;
        if !s2.contains(&img) {
            ctx.fail(f, "threes.sat_into", "image not in the target family".into());
        }
        images.push(img);
    }
    for l2 in &s2 {
        if !images.contains(l2) {
            ctx.fail(f, "threes.sat_onto", "target member without preimage".into());
        }
    }
    // restricted to L containing m^{r-1}M the map is a bijection
    let mut restricted_images = Vec::new();
    for l in &s1_restricted {
        let img = image(l)?;
        if restricted_images.contains(&img) {
            ctx.fail(f, "threes.sat_injective", "restricted map not injective".into());
        }
        restricted_images.push(img);
    }
    for l2 in &s2 {
        if !restricted_images.contains(l2) {
            ctx.fail(f, "threes.sat_bijective", "restricted map not onto".into());
        }
    }
    Ok(())
}

fn check_srt(f: &GramForm, cache: &ShapeCache, nondeg: bool, ctx: &mut SuiteCtx) -> Result<()> {
    if !nondeg {
        ctx.degenerate_skipped += 1;
        return Ok(());
    }
    let formula = radical_root_formula(f)?;
    let oracle = radical_root_oracle_with_subs(f, &cache.subs)?;
    if !formula.submodule.is_subset_of(&oracle)? {
        ctx.fail(f, "srt.containment", "formula result not inside the oracle".into());
    }
    if !formula.submodule.is_subset_of(&cache.lr)? {
        ctx.fail(f, "srt.inside_lr", "formula result not inside lr".into());
    }
    if ctx.params.p != 2 {
        if formula.submodule != oracle {
            ctx.fail(f, "srt.equality", "formula != oracle at odd p".into());
        }
    } else {
        let gap = oracle.length() - formula.submodule.length();
        ctx.bump(&format!("gap_len_{gap}"));
    }
    Ok(())
}

fn check_us(f: &GramForm, cache: &ShapeCache, nondeg: bool, ctx: &mut SuiteCtx) -> Result<()> {
    if !nondeg {
        ctx.degenerate_skipped += 1;
        return Ok(());
    }
    let report = is_anisotropic(f)?;
    if report.anisotropic && !report.quasi_anisotropic {
        ctx.fail(f, "us.aniso_implies_quasi", "anisotropic but not quasi".into());
    }
    if report.quasi_anisotropic {
        ctx.bump("quasi_instances");
        let oracle = radical_root_oracle_with_subs(f, &cache.subs)?;
        if oracle != cache.lr {
            ctx.fail(f, "us.rr_is_lr", "radical root != lower root".into());
        }
    }
    Ok(())
}

fn check_ksi_suite(f: &GramForm, cache: &ShapeCache, nondeg: bool, ctx: &mut SuiteCtx) -> Result<()> {
    if !nondeg {
        ctx.degenerate_skipped += 1;
        return Ok(());
    }
    let kv = check_ksi_with_subs(f, &cache.lr, &cache.subs_in_lr)?;
    if kv.quasi != kv.socle_quotient_anisotropic || kv.quasi != kv.lr_stability {
        ctx.fail(
            f,
            "ksi.equivalence",
            format!(
                "i={} ii={} iii={}",
                kv.quasi, kv.socle_quotient_anisotropic, kv.lr_stability
            ),
        );
    }
    Ok(())
}

fn check_unit_invariance(f: &GramForm, ctx: &mut SuiteCtx) -> Result<()> {
    let ring = f.ring();
    let base = decision_outputs(f)?;
    for _ in 0..5 {
        let u = loop {
            let code = ctx.unit_rng.gen_range(0..ring.size());
            let e = ring.from_integer(code);
            if e.is_unit() {
                break e;
            }
        };
        let scaled = f.scale(&u)?;
        let got = decision_outputs(&scaled)?;
        if got != base {
            ctx.fail(f, "unit_invariance", format!("decisions changed under u = {u}"));
            break;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::LocalRing;

    fn paper_z4_form() -> GramForm {
        let shape = ModuleShape::new(LocalRing::zpn(2, 2).unwrap(), vec![2, 2]).unwrap();
        GramForm::from_ints(shape, &[vec![2, 1], vec![1, 2]]).unwrap()
    }

    #[test]
    fn paper_example_conditions() {
        let f = paper_z4_form();
        let v = check_all_conditions(&f, 1 << 12).unwrap();
        assert!(!v[0].holds, "i");
        assert!(!v[1].holds, "ii");
        assert!(!v[2].holds, "iii");
        assert!(v[3].holds, "iv");
        assert!(v[4].holds, "v");
        // the recorded II witness is a qualifying submodule different from lr
        let Witness::Submodule(w) = v[1].witness.as_ref().unwrap() else {
            panic!("expected a submodule witness")
        };
        assert!(witness_refutes(&f, ConditionTag::II, v[1].witness.as_ref().unwrap()).unwrap());
        assert_ne!(*w, lower_root(f.shape()));
    }

    #[test]
    fn anisotropic_odd_p_all_conditions_hold() {
        let ring = LocalRing::zpn(3, 2).unwrap();
        let shape = ModuleShape::new(ring, vec![2]).unwrap();
        let f = GramForm::from_ints(shape, &[vec![1]]).unwrap();
        let v = check_all_conditions(&f, 1 << 12).unwrap();
        assert!(v.iter().all(|c| c.holds));
    }

    #[test]
    fn radical_root_oracle_examples() {
        let f = paper_z4_form();
        assert!(radical_root_oracle(&f, 1 << 12).unwrap().is_zero());

        // anisotropic: oracle equals the lower root
        let ring = LocalRing::zpn(3, 2).unwrap();
        let shape = ModuleShape::new(ring, vec![2]).unwrap();
        let g = GramForm::from_ints(shape.clone(), &[vec![1]]).unwrap();
        assert_eq!(radical_root_oracle(&g, 1 << 12).unwrap(), lower_root(&shape));

        // semisimple nondegenerate: zero
        let ss = ModuleShape::new(LocalRing::zpn(3, 1).unwrap(), vec![1, 1]).unwrap();
        let h = GramForm::from_ints(ss, &[vec![0, 1], vec![1, 0]]).unwrap();
        assert!(radical_root_oracle(&h, 1 << 12).unwrap().is_zero());

        // degenerate rejected
        let shape = ModuleShape::new(LocalRing::zpn(2, 2).unwrap(), vec![2]).unwrap();
        let bad = GramForm::from_ints(shape, &[vec![2]]).unwrap();
        assert!(matches!(radical_root_oracle(&bad, 1 << 12), Err(Error::Degenerate)));
    }

    #[test]
    fn ksi_checker_on_examples() {
        let f = paper_z4_form();
        let kv = check_ksi(&f, 1 << 12).unwrap();
        assert!(!kv.quasi);
        assert!(!kv.socle_quotient_anisotropic);
        assert!(!kv.lr_stability);

        let ring = LocalRing::zpn(3, 2).unwrap();
        let shape = ModuleShape::new(ring, vec![2]).unwrap();
        let g = GramForm::from_ints(shape, &[vec![1]]).unwrap();
        let kv = check_ksi(&g, 1 << 12).unwrap();
        assert!(kv.quasi && kv.socle_quotient_anisotropic && kv.lr_stability);
    }

    #[test]
    fn shapes_filter_matches_expected_list() {
        let params = SuiteParams::new(SuiteName::Main1, 3);
        let shapes = shapes_for(&params);
        assert_eq!(
            shapes,
            vec![
                vec![1],
                vec![2],
                vec![1, 1],
                vec![3],
                vec![2, 1],
                vec![4],
                vec![3, 1],
                vec![2, 2],
            ]
        );
    }

    #[test]
    fn suite_main1_small_p2() {
        let mut params = SuiteParams::new(SuiteName::Main1, 2);
        params.max_len = 4;
        let result = run_suite(&params).unwrap();
        assert!(result.passed(), "failures: {:?}", result.failures);
        // the bundled counterexample pattern occurs
        assert!(result.stats.get("iv_v_not_i").copied().unwrap_or(0) >= 1);
    }

    #[test]
    fn suites_cover_truncated_polynomials() {
        for suite in [SuiteName::Main1, SuiteName::Srt, SuiteName::Threes, SuiteName::Moma] {
            let mut params = SuiteParams::new(suite, 2);
            params.family = crate::ring::RingFamily::TruncatedPolynomials;
            params.max_len = 3;
            let result = run_suite(&params).unwrap();
            assert!(result.passed(), "{} over F_2[t]: {:?}", suite.as_str(), result.failures);
            assert!(result.instances > 0);
        }
    }

    #[test]
    fn suite_determinism() {
        let mut params = SuiteParams::new(SuiteName::Srt, 2);
        params.max_len = 3;
        params.samples = 50;
        params.seed = 42;
        let a = run_suite(&params).unwrap();
        let b = run_suite(&params).unwrap();
        let redact = |r: &SuiteResult| {
            let mut v = serde_json::to_value(r).unwrap();
            v["duration_ms"] = serde_json::json!(0);
            serde_json::to_string(&v).unwrap()
        };
        assert_eq!(redact(&a), redact(&b));
    }

    #[test]
    fn descriptor_round_trip() {
        let f = paper_z4_form();
        let d = InstanceDescriptor::from_form(&f);
        assert_eq!(d.module, vec![4, 4]);
        let f2 = d.to_form().unwrap();
        assert_eq!(f2.gram_encodings(), f.gram_encodings());
        let json = d.to_spec_json();
        assert_eq!(json["ring"]["p"], 2);
    }
}
