//! Input documents: one JSON file describes one symmetric bilinear form.
//!
//! The ring is either a composite modulus (`{"modulus": N}`) or a local
//! family (`{"family": "Zp"|"Fpt", "p": .., "n": ..}`). The module is a
//! list of cyclic factor sizes. Entries come either as ring-valued
//! integers (`gram`) or as exact rationals in the Q/Z convention
//! (`gram_qz`), which are converted by multiplying with the ring size.

use aniso_core::form::{CompositeForm, GramForm, MultiForm};
use aniso_core::module::ModuleShape;
use aniso_core::ring::{LocalRing, RingFamily};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInstance {
    pub ring: RawRing,
    pub module: Vec<u64>,
    #[serde(default)]
    pub gram: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    pub gram_qz: Option<Vec<Vec<QzEntry>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRing {
    #[serde(default)]
    pub modulus: Option<u64>,
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub p: Option<u64>,
    #[serde(default)]
    pub n: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum QzEntry {
    Int(i64),
    Ratio(String),
}

/// A fully validated instance, ready for analysis.
pub enum Instance {
    Local(GramForm),
    Composite(CompositeForm, MultiForm),
}

impl Instance {
    /// Components as (ring, local form) pairs, one per prime.
    pub fn components(&self) -> Vec<(LocalRing, GramForm)> {
        match self {
            Instance::Local(f) => vec![(f.ring(), f.clone())],
            Instance::Composite(_, multi) => {
                multi.components().iter().map(|c| (c.ring, c.form.clone())).collect()
            }
        }
    }

    pub fn ring_name(&self) -> String {
        match self {
            Instance::Local(f) => f.ring().name(),
            Instance::Composite(c, _) => format!("Z/{}", c.modulus()),
        }
    }

    pub fn module_orders(&self) -> Vec<u64> {
        match self {
            Instance::Local(f) => {
                let p = f.ring().p();
                f.shape().factor_lengths().iter().map(|&r| p.pow(r)).collect()
            }
            Instance::Composite(c, _) => c.orders().to_vec(),
        }
    }
}

fn parse_ratio(s: &str) -> Result<(i64, u64), String> {
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => {
            let num: i64 = a.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
            let den: u64 = b.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
            (num, den)
        }
        None => (s.trim().parse().map_err(|_| format!("bad rational {s:?}"))?, 1),
    };
    if den == 0 {
        return Err(format!("zero denominator in {s:?}"));
    }
    // reduce
    let g = gcd(num.unsigned_abs(), den);
    Ok((num / g as i64, den / g))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Validate and build; error strings carry field diagnostics.
pub fn build_instance(raw: &RawInstance) -> Result<Instance, String> {
    if raw.module.is_empty() {
        return Err("module: at least one cyclic factor is required".into());
    }
    if raw.gram.is_some() == raw.gram_qz.is_some() {
        return Err("exactly one of gram, gram_qz must be given".into());
    }
    let k = raw.module.len();
    let check_dims = |len: usize, rows: &[usize]| -> Result<(), String> {
        if len != k || rows.iter().any(|&r| r != k) {
            return Err(format!("gram: expected a {k}x{k} matrix"));
        }
        Ok(())
    };

    match (&raw.ring.modulus, &raw.ring.family) {
        (Some(_), Some(_)) => {
            Err("ring: give either modulus or family, not both".into())
        }
        (None, None) => Err("ring: modulus or family is required".into()),
        (Some(modulus), None) => {
            let modulus = *modulus;
            if modulus < 2 {
                return Err(format!("ring.modulus: {modulus} must be >= 2"));
            }
            let gram = integer_gram(raw, modulus, &raw.module, check_dims)?;
            let composite = CompositeForm::new(modulus, raw.module.clone(), gram)
                .map_err(|e| e.to_string())?;
            let multi = composite.localize().map_err(|e| e.to_string())?;
            Ok(Instance::Composite(composite, multi))
        }
        (None, Some(family)) => {
            let family = match family.as_str() {
                "Zp" => RingFamily::IntegersModPrimePower,
                "Fpt" => RingFamily::TruncatedPolynomials,
                other => return Err(format!("ring.family: unknown family {other:?}")),
            };
            let p = raw.ring.p.ok_or("ring.p: required for a family ring")?;
            let n = raw.ring.n.ok_or("ring.n: required for a family ring")?;
            let ring = LocalRing::new(family, p, n).map_err(|e| e.to_string())?;
            // factor sizes p^{r_a}
            let mut lengths = Vec::with_capacity(k);
            for (a, &m) in raw.module.iter().enumerate() {
                let mut mm = m;
                let mut r = 0u32;
                while mm > 1 && mm % p == 0 {
                    mm /= p;
                    r += 1;
                }
                if mm != 1 || r == 0 || r > n {
                    return Err(format!(
                        "module[{a}]: {m} is not a power of {p} within p^{n}"
                    ));
                }
                lengths.push(r);
            }
            if family == RingFamily::TruncatedPolynomials && raw.gram_qz.is_some() {
                return Err("gram_qz: the Q/Z convention needs an integer ring".into());
            }
            let gram = integer_gram(raw, ring.size(), &raw.module, check_dims)?;
            // sort factor lengths descending, permuting the matrix along
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| lengths[b].cmp(&lengths[a]).then(a.cmp(&b)));
            let sorted: Vec<u32> = order.iter().map(|&a| lengths[a]).collect();
            let shape = ModuleShape::new(ring, sorted).map_err(|e| e.to_string())?;
            let entries: Vec<Vec<u64>> = order
                .iter()
                .map(|&a| order.iter().map(|&b| gram[a][b]).collect())
                .collect();
            let form = GramForm::from_ints(shape, &entries).map_err(|e| e.to_string())?;
            Ok(Instance::Local(form))
        }
    }
}

/// Ring-valued entries, from `gram` directly or from `gram_qz` by
/// multiplying with the ring size.
fn integer_gram(
    raw: &RawInstance,
    ring_size: u64,
    orders: &[u64],
    check_dims: impl Fn(usize, &[usize]) -> Result<(), String>,
) -> Result<Vec<Vec<u64>>, String> {
    if let Some(g) = &raw.gram {
        check_dims(g.len(), &g.iter().map(|r| r.len()).collect::<Vec<_>>())?;
        return Ok(g
            .iter()
            .map(|row| row.iter().map(|&x| x.rem_euclid(ring_size as i64) as u64).collect())
            .collect());
    }
    let g = raw.gram_qz.as_ref().expect("one of the two is present");
    check_dims(g.len(), &g.iter().map(|r| r.len()).collect::<Vec<_>>())?;
    let exponent = orders.iter().copied().fold(1u64, lcm);
    let mut out = vec![vec![0u64; g.len()]; g.len()];
    for (a, row) in g.iter().enumerate() {
        for (b, entry) in row.iter().enumerate() {
            let (num, den) = match entry {
                QzEntry::Int(x) => (*x, 1),
                QzEntry::Ratio(s) => parse_ratio(s)?,
            };
            if exponent % den != 0 {
                return Err(format!(
                    "gram_qz[{a}][{b}]: denominator {den} does not divide the module exponent {exponent}"
                ));
            }
            if ring_size % den != 0 {
                return Err(format!(
                    "gram_qz[{a}][{b}]: denominator {den} does not divide the ring size {ring_size}"
                ));
            }
            let scaled = (num.rem_euclid(den as i64) as u64) * (ring_size / den);
            out[a][b] = scaled % ring_size;
        }
    }
    Ok(out)
}

/// Bundled example instances.
pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "paper-z4" => Some(
            r#"{
  "ring": {"family": "Zp", "p": 2, "n": 2},
  "module": [4, 4],
  "gram": [[2, 1], [1, 2]]
}
"#,
        ),
        "semisimple-hyperbolic" => Some(
            r#"{
  "ring": {"family": "Zp", "p": 3, "n": 1},
  "module": [3, 3],
  "gram": [[0, 1], [1, 0]]
}
"#,
        ),
        "cyclic-unit" => Some(
            r#"{
  "ring": {"family": "Zp", "p": 3, "n": 2},
  "module": [9],
  "gram": [[1]]
}
"#,
        ),
        "composite-12" => Some(
            r#"{
  "ring": {"modulus": 12},
  "module": [12],
  "gram": [[1]]
}
"#,
        ),
        "poly-mixed" => Some(
            r#"{
  "ring": {"family": "Fpt", "p": 3, "n": 2},
  "module": [9, 3],
  "gram": [[1, 3], [3, 3]]
}
"#,
        ),
        _ => None,
    }
}

pub fn bundled_names() -> &'static [&'static str] {
    &["paper-z4", "semisimple-hyperbolic", "cyclic-unit", "composite-12", "poly-mixed"]
}
