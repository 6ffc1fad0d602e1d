//! Local artinian principal ideal rings with prime residue field.
//!
//! Two families are supported: `Z/p^n` (maximal ideal generated by `p`)
//! and `F_p[t]/(t^n)` (maximal ideal generated by `t`). Elements carry
//! canonical representatives, so equality is representational. Every
//! nonzero element factors uniquely as `unit * pi^v` with `v < n`; the
//! zero element has valuation `n` by convention.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Which kind of local ring we are working in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RingFamily {
    /// `Z/p^n` with `pi = p`.
    IntegersModPrimePower,
    /// `F_p[t]/(t^n)` with `pi = t`.
    TruncatedPolynomials,
}

/// A local artinian principal ideal ring `(R, m)` with `m = (pi)`,
/// `m^n = 0`, `m^{n-1} != 0` and residue field `F_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LocalRing {
    family: RingFamily,
    p: u64,
    n: u32,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

impl LocalRing {
    pub fn new(family: RingFamily, p: u64, n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidRing(format!("{p} is not prime")));
        }
        if n == 0 {
            return Err(Error::InvalidRing("nilpotency length must be >= 1".into()));
        }
        let mut size: u64 = 1;
        for _ in 0..n {
            size = size
                .checked_mul(p)
                .ok_or_else(|| Error::InvalidRing(format!("p^n = {p}^{n} overflows")))?;
        }
        // products of canonical representatives must stay in range
        if size > (1u64 << 31) {
            return Err(Error::InvalidRing(format!("ring size {size} is too large")));
        }
        Ok(LocalRing { family, p, n })
    }

    /// `Z/p^n`.
    pub fn zpn(p: u64, n: u32) -> Result<Self> {
        Self::new(RingFamily::IntegersModPrimePower, p, n)
    }

    /// `F_p[t]/(t^n)`.
    pub fn fpt(p: u64, n: u32) -> Result<Self> {
        Self::new(RingFamily::TruncatedPolynomials, p, n)
    }

    pub fn family(&self) -> RingFamily {
        self.family
    }

    /// Residue characteristic.
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Nilpotency length of the maximal ideal; also the length of `R`.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of elements, `p^n`.
    pub fn size(&self) -> u64 {
        self.p.pow(self.n)
    }

    pub fn zero(&self) -> RingElem {
        self.from_integer(0)
    }

    pub fn one(&self) -> RingElem {
        self.from_integer(1)
    }

    /// The fixed generator of the maximal ideal (`p` resp. `t`).
    pub fn pi(&self) -> RingElem {
        self.pi_pow(1)
    }

    /// `pi^j`, with `pi^j = 0` for `j >= n`.
    pub fn pi_pow(&self, j: u32) -> RingElem {
        if j >= self.n {
            return self.zero();
        }
        match self.family {
            RingFamily::IntegersModPrimePower => self.from_integer(self.p.pow(j)),
            RingFamily::TruncatedPolynomials => {
                let mut coeffs = vec![0u64; self.n as usize];
                coeffs[j as usize] = 1;
                RingElem { ring: *self, value: Value::Poly(coeffs) }
            }
        }
    }

    /// Canonical element from an integer (reduced mod `p^n`). For the
    /// polynomial family the integer is read as base-`p` digits, the
    /// digit of `p^i` becoming the coefficient of `t^i`.
    pub fn from_integer(&self, x: u64) -> RingElem {
        let x = x % self.size();
        match self.family {
            RingFamily::IntegersModPrimePower => RingElem { ring: *self, value: Value::Int(x) },
            RingFamily::TruncatedPolynomials => {
                let mut coeffs = vec![0u64; self.n as usize];
                let mut rest = x;
                for c in coeffs.iter_mut() {
                    *c = rest % self.p;
                    rest /= self.p;
                }
                RingElem { ring: *self, value: Value::Poly(coeffs) }
            }
        }
    }

    /// Inverse of [`RingElem::encoding`].
    pub fn decode(&self, code: u64) -> Result<RingElem> {
        if code >= self.size() {
            return Err(Error::InvalidParameter(format!(
                "encoding {code} out of range for ring of size {}",
                self.size()
            )));
        }
        Ok(self.from_integer(code))
    }

    /// All elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = RingElem> + '_ {
        (0..self.size()).map(move |c| self.from_integer(c))
    }

    /// Short name such as `Z/2^3` or `F_3[t]/(t^2)`.
    pub fn name(&self) -> String {
        match self.family {
            RingFamily::IntegersModPrimePower => {
                if self.n == 1 {
                    format!("Z/{}", self.p)
                } else {
                    format!("Z/{}^{}", self.p, self.n)
                }
            }
            RingFamily::TruncatedPolynomials => format!("F_{}[t]/(t^{})", self.p, self.n),
        }
    }
}

impl fmt::Display for LocalRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Value {
    Int(u64),
    /// Coefficient vector of length `n`, entries in `[0, p)`.
    Poly(Vec<u64>),
}

/// An element of a [`LocalRing`], stored as its canonical representative.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RingElem {
    ring: LocalRing,
    value: Value,
}

impl RingElem {
    pub fn ring(&self) -> LocalRing {
        self.ring
    }

    pub fn is_zero(&self) -> bool {
        match &self.value {
            Value::Int(x) => *x == 0,
            Value::Poly(c) => c.iter().all(|&x| x == 0),
        }
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == 0
    }

    /// Largest `v` with `x` in `m^v`; `n` for the zero element.
    pub fn valuation(&self) -> u32 {
        let n = self.ring.n;
        match &self.value {
            Value::Int(x) => {
                if *x == 0 {
                    return n;
                }
                let mut v = 0;
                let mut x = *x;
                while x % self.ring.p == 0 {
                    x /= self.ring.p;
                    v += 1;
                }
                v
            }
            Value::Poly(c) => c
                .iter()
                .position(|&x| x != 0)
                .map(|i| i as u32)
                .unwrap_or(n),
        }
    }

    fn check_ring(&self, other: &RingElem) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &RingElem) -> RingElem {
        self.checked_add(other).expect("ring mismatch")
    }

    pub fn checked_add(&self, other: &RingElem) -> Result<RingElem> {
        self.check_ring(other)?;
        let value = match (&self.value, &other.value) {
            (Value::Int(a), Value::Int(b)) => Value::Int((a + b) % self.ring.size()),
            (Value::Poly(a), Value::Poly(b)) => {
                Value::Poly(a.iter().zip(b).map(|(x, y)| (x + y) % self.ring.p).collect())
            }
            _ => unreachable!("same ring implies same representation"),
        };
        Ok(RingElem { ring: self.ring, value })
    }

    pub fn neg(&self) -> RingElem {
        let value = match &self.value {
            Value::Int(a) => Value::Int((self.ring.size() - a) % self.ring.size()),
            Value::Poly(a) => Value::Poly(a.iter().map(|x| (self.ring.p - x) % self.ring.p).collect()),
        };
        RingElem { ring: self.ring, value }
    }

    pub fn sub(&self, other: &RingElem) -> RingElem {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RingElem) -> RingElem {
        self.checked_mul(other).expect("ring mismatch")
    }

    pub fn checked_mul(&self, other: &RingElem) -> Result<RingElem> {
        self.check_ring(other)?;
        let value = match (&self.value, &other.value) {
            (Value::Int(a), Value::Int(b)) => {
                Value::Int(((*a as u128 * *b as u128) % self.ring.size() as u128) as u64)
            }
            (Value::Poly(a), Value::Poly(b)) => {
                let n = self.ring.n as usize;
                let mut out = vec![0u64; n];
                for (i, &x) in a.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    for (j, &y) in b.iter().enumerate() {
                        if i + j >= n {
                            break;
                        }
                        out[i + j] = (out[i + j] + x * y) % self.ring.p;
                    }
                }
                Value::Poly(out)
            }
            _ => unreachable!(),
        };
        Ok(RingElem { ring: self.ring, value })
    }

    /// Multiply by `pi^j`.
    pub fn mul_pi_pow(&self, j: u32) -> RingElem {
        self.mul(&self.ring.pi_pow(j))
    }

    /// Unit `u` with `x = u * pi^v` and `u` the canonical quotient
    /// representative. Returns `1` for the zero element.
    pub fn unit_part(&self) -> RingElem {
        if self.is_zero() {
            return self.ring.one();
        }
        self.divide_by_pi_power(self.valuation()).expect("valuation is exact")
    }

    /// `y` with `pi^j * y = x`, valuation dropping by exactly `j` and the
    /// unit part preserved. Requires `valuation(x) >= j`.
    pub fn divide_by_pi_power(&self, j: u32) -> Result<RingElem> {
        let v = self.valuation();
        if v < j {
            return Err(Error::ValuationTooSmall { valuation: v, requested: j });
        }
        let value = match &self.value {
            Value::Int(x) => Value::Int(x / self.ring.p.pow(j)),
            Value::Poly(c) => {
                let n = self.ring.n as usize;
                let mut out = vec![0u64; n];
                for i in (j as usize)..n {
                    out[i - j as usize] = c[i];
                }
                Value::Poly(out)
            }
        };
        Ok(RingElem { ring: self.ring, value })
    }

    /// Multiplicative inverse; rejects non-units.
    pub fn invert_unit(&self) -> Result<RingElem> {
        let v = self.valuation();
        if v != 0 {
            return Err(Error::NotAUnit { valuation: v });
        }
        match &self.value {
            Value::Int(x) => {
                // extended Euclid mod p^n
                let m = self.ring.size() as i128;
                let (mut r0, mut r1) = (m, *x as i128);
                let (mut s0, mut s1) = (0i128, 1i128);
                while r1 != 0 {
                    let q = r0 / r1;
                    (r0, r1) = (r1, r0 - q * r1);
                    (s0, s1) = (s1, s0 - q * s1);
                }
                debug_assert_eq!(r0, 1);
                Ok(self.ring.from_integer(s0.rem_euclid(m) as u64))
            }
            Value::Poly(c) => {
                // power series inversion coefficient by coefficient
                let p = self.ring.p;
                let n = self.ring.n as usize;
                let c0_inv = mod_inverse(c[0], p);
                let mut out = vec![0u64; n];
                out[0] = c0_inv;
                for k in 1..n {
                    let mut acc = 0u64;
                    for i in 1..=k {
                        acc = (acc + c[i] * out[k - i]) % p;
                    }
                    out[k] = (p - acc % p) % p * c0_inv % p;
                }
                Ok(RingElem { ring: self.ring, value: Value::Poly(out) })
            }
        }
    }

    /// Image in the residue field `F_p`, as an integer in `[0, p)`.
    pub fn residue(&self) -> u64 {
        match &self.value {
            Value::Int(x) => x % self.ring.p,
            Value::Poly(c) => c[0],
        }
    }

    /// Canonical representative of `x mod pi^j R`.
    pub fn reduce_mod_pi_pow(&self, j: u32) -> RingElem {
        if j >= self.ring.n {
            return self.clone();
        }
        let value = match &self.value {
            Value::Int(x) => Value::Int(x % self.ring.p.pow(j)),
            Value::Poly(c) => {
                let mut out = c.clone();
                for e in out.iter_mut().skip(j as usize) {
                    *e = 0;
                }
                Value::Poly(out)
            }
        };
        RingElem { ring: self.ring, value }
    }

    /// Reinterpret the canonical representative in a smaller ring of the
    /// same family (used when passing to `R/m^k`). Requires `k <= n`.
    pub fn truncate_to(&self, target: &LocalRing) -> RingElem {
        debug_assert_eq!(target.family, self.ring.family);
        debug_assert_eq!(target.p, self.ring.p);
        debug_assert!(target.n <= self.ring.n);
        match &self.value {
            Value::Int(x) => target.from_integer(*x),
            Value::Poly(c) => {
                let coeffs: Vec<u64> = c.iter().take(target.n as usize).copied().collect();
                RingElem { ring: *target, value: Value::Poly(coeffs) }
            }
        }
    }

    /// Reinterpret the canonical representative in a larger ring of the
    /// same family (a section of [`RingElem::truncate_to`]).
    pub fn lift_to(&self, target: &LocalRing) -> RingElem {
        debug_assert_eq!(target.family, self.ring.family);
        debug_assert_eq!(target.p, self.ring.p);
        debug_assert!(target.n >= self.ring.n);
        match &self.value {
            Value::Int(x) => target.from_integer(*x),
            Value::Poly(c) => {
                let mut coeffs = c.clone();
                coeffs.resize(target.n as usize, 0);
                RingElem { ring: *target, value: Value::Poly(coeffs) }
            }
        }
    }

    /// Canonical integer encoding in `[0, p^n)`; see [`LocalRing::decode`].
    pub fn encoding(&self) -> u64 {
        match &self.value {
            Value::Int(x) => *x,
            Value::Poly(c) => {
                let mut acc = 0u64;
                for &d in c.iter().rev() {
                    acc = acc * self.ring.p + d;
                }
                acc
            }
        }
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Value::Int(x) => write!(f, "{x}"),
            Value::Poly(c) => {
                let mut terms = Vec::new();
                for (i, &x) in c.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    terms.push(match i {
                        0 => format!("{x}"),
                        1 if x == 1 => "t".into(),
                        1 => format!("{x}t"),
                        _ if x == 1 => format!("t^{i}"),
                        _ => format!("{x}t^{i}"),
                    });
                }
                if terms.is_empty() {
                    write!(f, "0")
                } else {
                    write!(f, "{}", terms.join("+"))
                }
            }
        }
    }
}

fn mod_inverse(x: u64, p: u64) -> u64 {
    // Fermat, fine for prime p
    let mut acc = 1u64;
    let mut base = x % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

/// A finite product of local rings, e.g. the CRT components of `Z/N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSpec {
    components: Vec<LocalRing>,
}

impl RingSpec {
    pub fn new(components: Vec<LocalRing>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidRing("a ring needs at least one component".into()));
        }
        Ok(RingSpec { components })
    }

    pub fn components(&self) -> &[LocalRing] {
        &self.components
    }
}

/// Split `Z/N` into its prime-power components, ordered by `p`.
pub fn crt_decompose(n: u64) -> Result<RingSpec> {
    if n < 2 {
        return Err(Error::InvalidRing(format!("modulus {n} must be >= 2")));
    }
    let mut components = Vec::new();
    let mut rest = n;
    let mut p = 2u64;
    while p * p <= rest {
        if rest % p == 0 {
            let mut k = 0u32;
            while rest % p == 0 {
                rest /= p;
                k += 1;
            }
            components.push(LocalRing::zpn(p, k)?);
        }
        p += 1;
    }
    if rest > 1 {
        components.push(LocalRing::zpn(rest, 1)?);
    }
    RingSpec::new(components)
}
