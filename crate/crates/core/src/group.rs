//! Exact arithmetic in `G_p = Z_p ⋊ Z_p^*`.
//!
//! An element is a normalized pair `(a, b)` with `a ∈ Z_p` (translation part)
//! and `b ∈ Z_p^*` (unit part). The product is
//! `(a₁, b₁)·(a₂, b₂) = (a₁ + b₁a₂, b₁b₂)`, i.e. composition of the affine maps
//! `x ↦ a + bx`.
//!
//! The generators are `δ₁ = (1, 1)` and `δ₂ = (0, k⁻¹)` where `k` is the
//! smallest primitive root. With this product law the choice `δ₂ = (0, k)`
//! would give `δ₂⁻¹δ₁δ₂ = δ₁^(k⁻¹)`; taking the inverse unit makes the relation
//! `δ₂⁻¹δ₁δ₂ = δ₁^k` hold literally.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut result = 1 % m;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    result
}

/// Inverse of a unit modulo a prime, by Fermat.
pub(crate) fn inv_mod(x: u64, p: u64) -> u64 {
    pow_mod(x, p - 2, p)
}

fn check_odd_prime(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    Ok(())
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest primitive root modulo the odd prime `p`.
pub fn primitive_root(p: u64) -> Result<u64> {
    check_odd_prime(p)?;
    let factors = prime_factors(p - 1);
    (2..p)
        .find(|&k| factors.iter().all(|&q| pow_mod(k, (p - 1) / q, p) != 1))
        .ok_or_else(|| Error::Presentation(format!("no primitive root found for p = {p}")))
}

/// Solves `j·κ ≡ −1 (mod p)` for `κ ∈ [0, p)`.
pub fn solve_kappa(j: u64, p: u64) -> Result<u64> {
    check_odd_prime(p)?;
    if j % p == 0 {
        return Err(Error::InvalidParameter(format!("j = {j} is divisible by p = {p}")));
    }
    Ok((p - 1) * inv_mod(j % p, p) % p)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    p: u32,
    a: u32,
    b: u32,
}

impl GroupElement {
    pub fn new(p: u32, a: u32, b: u32) -> Result<Self> {
        if a >= p || b == 0 || b >= p {
            return Err(Error::InvalidElement { p, a, b });
        }
        Ok(Self { p, a, b })
    }

    /// Builds an element from arbitrary integers, reducing modulo `p`.
    pub fn reduced(p: u32, a: i64, b: i64) -> Result<Self> {
        let pm = p as i64;
        Self::new(p, a.rem_euclid(pm) as u32, b.rem_euclid(pm) as u32)
    }

    pub fn identity(p: u32) -> Self {
        Self { p, a: 0, b: 1 }
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    /// Translation part.
    pub fn a(&self) -> u32 {
        self.a
    }

    /// Unit part.
    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn is_identity(&self) -> bool {
        self.a == 0 && self.b == 1
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.p != rhs.p {
            return Err(Error::MismatchedPrime(self.p, rhs.p));
        }
        let p = self.p as u64;
        let a = (self.a as u64 + self.b as u64 * rhs.a as u64) % p;
        let b = self.b as u64 * rhs.b as u64 % p;
        Ok(Self { p: self.p, a: a as u32, b: b as u32 })
    }

    pub fn inv(&self) -> Self {
        let p = self.p as u64;
        let b_inv = inv_mod(self.b as u64, p);
        // (a, b)⁻¹ = (−b⁻¹a, b⁻¹)
        let a = (p - (b_inv * self.a as u64) % p) % p;
        Self { p: self.p, a: a as u32, b: b_inv as u32 }
    }

    pub fn pow(&self, n: u64) -> Self {
        let mut result = Self::identity(self.p);
        let mut base = *self;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result * base;
            }
            base = base * base;
            n >>= 1;
        }
        result
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    /// Panics when the operands live in different groups; use
    /// [`GroupElement::try_mul`] for a fallible product.
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(&rhs).expect("group elements with different p")
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// `G_p` together with its distinguished generators.
#[derive(Clone, Debug)]
pub struct GroupContext {
    p: u32,
    k: u32,
    k_inv: u32,
    delta1: GroupElement,
    delta2: GroupElement,
    elements: Vec<GroupElement>,
}

impl GroupContext {
    /// Builds the context and checks the three presentation relations.
    pub fn new(p: u64) -> Result<Self> {
        check_odd_prime(p)?;
        if p > u32::MAX as u64 {
            return Err(Error::InvalidParameter(format!("p = {p} too large")));
        }
        let k = primitive_root(p)?;
        let k_inv = inv_mod(k, p);
        let p32 = p as u32;
        let delta1 = GroupElement::new(p32, 1, 1)?;
        let delta2 = GroupElement::new(p32, 0, k_inv as u32)?;
        let elements = (0..p32)
            .flat_map(|a| (1..p32).map(move |b| GroupElement { p: p32, a, b }))
            .collect();
        let ctx = Self { p: p32, k: k as u32, k_inv: k_inv as u32, delta1, delta2, elements };
        ctx.verify_presentation()?;
        Ok(ctx)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn k_inv(&self) -> u32 {
        self.k_inv
    }

    pub fn delta1(&self) -> GroupElement {
        self.delta1
    }

    pub fn delta2(&self) -> GroupElement {
        self.delta2
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.p)
    }

    pub fn order(&self) -> usize {
        (self.p as usize) * (self.p as usize - 1)
    }

    /// All elements in lexicographic `(a, b)` order.
    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    /// Position of `g` in [`GroupContext::elements`].
    pub fn index(&self, g: &GroupElement) -> usize {
        debug_assert_eq!(g.p, self.p);
        g.a as usize * (self.p as usize - 1) + (g.b as usize - 1)
    }

    pub fn element(&self, index: usize) -> GroupElement {
        self.elements[index]
    }

    pub fn element_of(&self, a: i64, b: i64) -> Result<GroupElement> {
        GroupElement::reduced(self.p, a, b)
    }

    /// Checks `δ₁^p = e`, `δ₂^(p−1) = e` and `δ₂⁻¹δ₁δ₂ = δ₁^k`.
    pub fn verify_presentation(&self) -> Result<PresentationReport> {
        let p = self.p as u64;
        let e = self.identity();
        let report = PresentationReport {
            delta1_order_p: self.delta1.pow(p) == e,
            delta2_order_p_minus_1: self.delta2.pow(p - 1) == e,
            conjugation: self.delta2.inv() * self.delta1 * self.delta2 == self.delta1.pow(self.k as u64),
        };
        if !report.all() {
            return Err(Error::Presentation(format!("{report:?}")));
        }
        Ok(report)
    }

    /// Unique `(a, m)` with `0 ≤ a < p`, `0 ≤ m < p−1` and `δ₁^a δ₂^m = g`.
    pub fn word_decompose(&self, g: &GroupElement) -> (u32, u32) {
        // δ₁^a δ₂^m = (a, k^(−m)), so m is the discrete log of b in base k⁻¹.
        let p = self.p as u64;
        let mut power = 1u64;
        for m in 0..self.p - 1 {
            if power == g.b as u64 {
                return (g.a, m);
            }
            power = power * self.k_inv as u64 % p;
        }
        unreachable!("k⁻¹ generates Z_p^*")
    }

    /// Projection `G_p → G_p/⟨δ₁⟩ ≅ Z_p^*`.
    pub fn quotient_to_units(&self, g: &GroupElement) -> u32 {
        g.b
    }

    /// `δ₁^a δ₂^m` for arbitrary integer exponents.
    pub fn word(&self, a: i64, m: i64) -> GroupElement {
        let a = a.rem_euclid(self.p as i64) as u64;
        let m = m.rem_euclid(self.p as i64 - 1) as u64;
        self.delta1.pow(a) * self.delta2.pow(m)
    }

    /// Conjugacy classes, each sorted, ordered by smallest member.
    pub fn conjugacy_classes(&self) -> Vec<Vec<GroupElement>> {
        let n = self.order();
        let mut class_of = vec![usize::MAX; n];
        let mut classes: Vec<Vec<GroupElement>> = Vec::new();
        for g in &self.elements {
            if class_of[self.index(g)] != usize::MAX {
                continue;
            }
            let id = classes.len();
            let mut members: Vec<GroupElement> =
                self.elements.iter().map(|h| h.inv() * *g * *h).collect();
            members.sort();
            members.dedup();
            for m in &members {
                class_of[self.index(m)] = id;
            }
            classes.push(members);
        }
        classes
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PresentationReport {
    pub delta1_order_p: bool,
    pub delta2_order_p_minus_1: bool,
    pub conjugation: bool,
}

impl PresentationReport {
    pub fn all(&self) -> bool {
        self.delta1_order_p && self.delta2_order_p_minus_1 && self.conjugation
    }
}
