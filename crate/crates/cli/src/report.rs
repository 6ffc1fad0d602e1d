//! Analysis reports, machine-readable and human-readable.

use crate::spec::Instance;
use aniso_core::aniso::{
    decision_outputs, ff_is_anisotropic, is_quasi_anisotropic, radical_root_formula,
    AnisoWitness,
};
use aniso_core::form::GramForm;
use aniso_core::graded::{even_form, lower_root, odd_form, upper_root, FFForm};
use aniso_core::module::{submodule_from_generators, Submodule};
use aniso_core::oracle::radical_root_oracle;
use aniso_core::ring::{LocalRing, RingFamily};
use aniso_core::Error;
use rand_like::UnitStream;
use serde::Serialize;
use std::time::Instant;

#[derive(Debug)]
pub enum AnalyzeError {
    /// Submodule enumeration would exceed the budget (exit code 3).
    Budget(String),
    /// Anything else that makes the analysis impossible (exit code 2).
    Input(String),
}

#[derive(Serialize)]
pub struct AnalysisReport {
    pub ring: String,
    pub module: Vec<u64>,
    pub nondegenerate: bool,
    pub anisotropic: bool,
    pub quasi_anisotropic: bool,
    pub unit_invariance: bool,
    pub components: Vec<ComponentReport>,
    pub timing_ms: u64,
}

#[derive(Serialize)]
pub struct ComponentReport {
    pub family: String,
    pub p: u64,
    pub n: u32,
    pub module: Vec<u64>,
    pub nondegenerate: bool,
    pub odd_anisotropic: bool,
    pub even_anisotropic: bool,
    pub quasi_anisotropic: bool,
    pub odd_form: FFReport,
    pub even_form: FFReport,
    pub lr: SubmoduleReport,
    pub ur: SubmoduleReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rr_formula: Option<RadicalRootReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rr_oracle: Option<SubmoduleReport>,
    pub witnesses: Vec<AnisoWitness>,
}

#[derive(Serialize)]
pub struct FFReport {
    pub dim: usize,
    pub gram: Vec<Vec<u64>>,
}

impl FFReport {
    fn from_ff(ff: &FFForm) -> FFReport {
        FFReport { dim: ff.dim(), gram: ff.rows() }
    }
}

#[derive(Serialize)]
pub struct SubmoduleReport {
    pub length: u32,
    pub generators: Vec<Vec<u64>>,
}

impl SubmoduleReport {
    fn from_submodule(l: &Submodule) -> SubmoduleReport {
        SubmoduleReport {
            length: l.length(),
            generators: l.generators().iter().map(|g| g.coord_encodings()).collect(),
        }
    }
}

#[derive(Serialize)]
pub struct RadicalRootReport {
    pub d: u32,
    pub equality_expected: bool,
    pub length: u32,
    pub generators: Vec<Vec<u64>>,
}

// a tiny deterministic unit stream so reports do not depend on rand
mod rand_like {
    use aniso_core::ring::{LocalRing, RingElem};

    pub struct UnitStream {
        state: u64,
    }

    impl UnitStream {
        pub fn new(seed: u64) -> UnitStream {
            UnitStream { state: seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1 }
        }

        fn next_u64(&mut self) -> u64 {
            // splitmix64 step
            self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = self.state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        }

        pub fn unit(&mut self, ring: &LocalRing) -> RingElem {
            loop {
                let e = ring.from_integer(self.next_u64() % ring.size());
                if e.is_unit() {
                    return e;
                }
            }
        }
    }
}

fn unit_invariance_ok(f: &GramForm) -> Result<bool, Error> {
    let base = decision_outputs(f)?;
    let mut units = UnitStream::new(0xA11CE);
    for _ in 0..5 {
        let u = units.unit(&f.ring());
        if decision_outputs(&f.scale(&u)?)? != base {
            return Ok(false);
        }
    }
    Ok(true)
}

fn component_report(
    ring: LocalRing,
    f: &GramForm,
    with_oracle: bool,
    budget: u64,
) -> Result<(ComponentReport, bool), AnalyzeError> {
    let to_input = |e: Error| AnalyzeError::Input(e.to_string());
    let nondeg = f.is_nondegenerate();
    let odd = odd_form(f).map_err(to_input)?;
    let even = even_form(f).map_err(to_input)?;
    let (odd_ok, odd_w) = ff_is_anisotropic(&odd.ff);
    let (even_ok, even_w) = ff_is_anisotropic(&even.ff);
    let quasi = is_quasi_anisotropic(f).map_err(to_input)?;
    let mut witnesses = Vec::new();
    if let Some(v) = odd_w {
        witnesses.push(AnisoWitness { p: ring.p(), parity: "odd".into(), vector: v });
    }
    if let Some(v) = even_w {
        witnesses.push(AnisoWitness { p: ring.p(), parity: "even".into(), vector: v });
    }
    let lr = lower_root(f.shape());
    let ur = upper_root(f.shape());
    let rr_formula = if nondeg {
        let rr = radical_root_formula(f).map_err(to_input)?;
        Some(RadicalRootReport {
            d: rr.d,
            equality_expected: rr.equality_expected,
            length: rr.submodule.length(),
            generators: rr.submodule.generators().iter().map(|g| g.coord_encodings()).collect(),
        })
    } else {
        None
    };
    let rr_oracle = if with_oracle && nondeg {
        match radical_root_oracle(f, budget) {
            Ok(l) => Some(SubmoduleReport::from_submodule(&l)),
            Err(Error::BudgetExceeded { size, budget }) => {
                return Err(AnalyzeError::Budget(format!(
                    "oracle needs {size} elements enumerated, budget is {budget} \
                     (raise --budget or pass --no-oracle)"
                )));
            }
            Err(e) => return Err(AnalyzeError::Input(e.to_string())),
        }
    } else {
        None
    };
    let invariant = unit_invariance_ok(f).map_err(to_input)?;
    let p = ring.p();
    Ok((
        ComponentReport {
            family: match ring.family() {
                RingFamily::IntegersModPrimePower => "Zp".into(),
                RingFamily::TruncatedPolynomials => "Fpt".into(),
            },
            p,
            n: ring.n(),
            module: f.shape().factor_lengths().iter().map(|&r| p.pow(r)).collect(),
            nondegenerate: nondeg,
            odd_anisotropic: odd_ok,
            even_anisotropic: even_ok,
            quasi_anisotropic: quasi,
            odd_form: FFReport::from_ff(&odd.ff),
            even_form: FFReport::from_ff(&even.ff),
            lr: SubmoduleReport::from_submodule(&lr),
            ur: SubmoduleReport::from_submodule(&ur),
            rr_formula,
            rr_oracle,
            witnesses,
        },
        invariant,
    ))
}

pub fn analyze(
    instance: &Instance,
    with_oracle: bool,
    budget: u64,
) -> Result<AnalysisReport, AnalyzeError> {
    let start = Instant::now();
    let mut components = Vec::new();
    let mut invariant = true;
    for (ring, f) in instance.components() {
        let (c, inv) = component_report(ring, &f, with_oracle, budget)?;
        invariant &= inv;
        components.push(c);
    }
    let nondeg = components.iter().all(|c| c.nondegenerate);
    let anisotropic = components.iter().all(|c| c.odd_anisotropic && c.even_anisotropic);
    let quasi = components.iter().all(|c| c.quasi_anisotropic);
    Ok(AnalysisReport {
        ring: instance.ring_name(),
        module: instance.module_orders(),
        nondegenerate: nondeg,
        anisotropic,
        quasi_anisotropic: quasi,
        unit_invariance: invariant,
        components,
        timing_ms: start.elapsed().as_millis() as u64,
    })
}

/// Sanity net for reports: every submodule descriptor must round-trip
/// through the canonical-form constructor.
pub fn descriptors_round_trip(instance: &Instance, report: &AnalysisReport) -> bool {
    for ((_, f), comp) in instance.components().iter().zip(&report.components) {
        let shape = f.shape();
        let mut described: Vec<(&[Vec<u64>], u32)> = vec![
            (&comp.lr.generators, comp.lr.length),
            (&comp.ur.generators, comp.ur.length),
        ];
        if let Some(rr) = &comp.rr_formula {
            described.push((&rr.generators, rr.length));
        }
        if let Some(rr) = &comp.rr_oracle {
            described.push((&rr.generators, rr.length));
        }
        for (gens, length) in described {
            let elems: Vec<_> = gens
                .iter()
                .map(|g| shape.element_from_ints(g).expect("generators fit the shape"))
                .collect();
            let rebuilt = submodule_from_generators(shape, &elems).expect("same shape");
            if rebuilt.length() != length {
                return false;
            }
        }
    }
    true
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn fmt_gens(gens: &[Vec<u64>]) -> String {
    if gens.is_empty() {
        return "0".into();
    }
    gens.iter()
        .map(|g| format!("({})", g.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
        .collect::<Vec<_>>()
        .join(" ")
}

fn fmt_ff(ff: &FFReport) -> String {
    if ff.dim == 0 {
        return "dim 0".into();
    }
    let rows: Vec<String> = ff
        .gram
        .iter()
        .map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
        .collect();
    format!("dim {} [{}]", ff.dim, rows.join(","))
}

pub fn render_text(report: &AnalysisReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("ring: {}\n", report.ring));
    out.push_str(&format!(
        "module: [{}]\n",
        report.module.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
    ));
    out.push_str(&format!("nondegenerate: {}\n", yes_no(report.nondegenerate)));
    out.push_str(&format!("anisotropic: {}\n", yes_no(report.anisotropic)));
    out.push_str(&format!("quasi-anisotropic: {}\n", yes_no(report.quasi_anisotropic)));
    out.push_str(&format!("unit-rescaling invariance: {}\n", yes_no(report.unit_invariance)));
    for c in &report.components {
        out.push_str(&format!(
            "\ncomponent p={} ({}), module [{}]\n",
            c.p,
            match c.family.as_str() {
                "Zp" =>
                    if c.n == 1 {
                        format!("Z/{}", c.p)
                    } else {
                        format!("Z/{}^{}", c.p, c.n)
                    },
                _ => format!("F_{}[t]/(t^{})", c.p, c.n),
            },
            c.module.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
        ));
        out.push_str(&format!("  nondegenerate: {}\n", yes_no(c.nondegenerate)));
        out.push_str(&format!(
            "  odd form: {} -> {}\n",
            fmt_ff(&c.odd_form),
            if c.odd_anisotropic { "anisotropic" } else { "isotropic" }
        ));
        out.push_str(&format!(
            "  even form: {} -> {}\n",
            fmt_ff(&c.even_form),
            if c.even_anisotropic { "anisotropic" } else { "isotropic" }
        ));
        out.push_str(&format!("  quasi-anisotropic: {}\n", yes_no(c.quasi_anisotropic)));
        out.push_str(&format!("  lr: length {}, generators {}\n", c.lr.length, fmt_gens(&c.lr.generators)));
        out.push_str(&format!("  ur: length {}, generators {}\n", c.ur.length, fmt_gens(&c.ur.generators)));
        if let Some(rr) = &c.rr_formula {
            out.push_str(&format!(
                "  rr (formula): d={}, length {}, generators {}{}\n",
                rr.d,
                rr.length,
                fmt_gens(&rr.generators),
                if rr.equality_expected { "" } else { " (containment only at p=2)" }
            ));
        }
        if let Some(rr) = &c.rr_oracle {
            out.push_str(&format!(
                "  rr (oracle): length {}, generators {}\n",
                rr.length,
                fmt_gens(&rr.generators)
            ));
        }
        for w in &c.witnesses {
            out.push_str(&format!(
                "  isotropic witness ({}): ({})\n",
                w.parity,
                w.vector.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            ));
        }
    }
    out.push_str(&format!("\ntiming: {} ms\n", report.timing_ms));
    out
}
