//! Finitely generated abelian groups presented as cokernels of integer
//! matrices, with a tracked map from the presentation's meridian basis into
//! Smith-normal-form coordinates.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::format::bigints;
use crate::linalg::{smith_normal_form, IntMat};

/// `Z_{d_1} ⊕ … ⊕ Z_{d_k} ⊕ Z^r` with `d_1 | d_2 | … | d_k`, each `d_i ≥ 2`,
/// together with the matrix expressing each meridian in these coordinates.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AbelianGroup {
    torsion: Vec<BigInt>,
    free_rank: usize,
    /// (k + r) × n; column i is the class of meridian i. Torsion rows are
    /// reduced into [0, d).
    meridian_map: IntMat,
}

impl AbelianGroup {
    /// Cokernel of a square relation matrix (columns are relations among the
    /// meridians).
    pub fn from_relations(q: &IntMat) -> AbelianGroup {
        assert_eq!(q.rows(), q.cols(), "presentation matrix must be square");
        let n = q.rows();
        let smith = smith_normal_form(q);
        let diag = smith.diagonal();
        let torsion_rows: Vec<usize> = (0..n)
            .filter(|&i| diag.get(i).is_some_and(|d| d > &BigInt::one()))
            .collect();
        let free_rows: Vec<usize> = (0..n)
            .filter(|&i| diag.get(i).map_or(true, |d| d.is_zero()))
            .collect();
        let torsion: Vec<BigInt> = torsion_rows.iter().map(|&i| diag[i].clone()).collect();
        let free_rank = free_rows.len();
        let mut meridian_map = IntMat::zeros(torsion.len() + free_rank, n);
        for (row, &i) in torsion_rows.iter().chain(free_rows.iter()).enumerate() {
            for j in 0..n {
                let mut v = smith.u.at(i, j).clone();
                if row < torsion.len() {
                    v = v.mod_floor(&torsion[row]);
                }
                meridian_map.set(row, j, v);
            }
        }
        AbelianGroup { torsion, free_rank, meridian_map }
    }

    pub fn trivial() -> AbelianGroup {
        AbelianGroup { torsion: Vec::new(), free_rank: 0, meridian_map: IntMat::zeros(0, 0) }
    }

    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn meridian_count(&self) -> usize {
        self.meridian_map.cols()
    }

    pub fn is_trivial(&self) -> bool {
        self.torsion.is_empty() && self.free_rank == 0
    }

    /// Group order; `None` when infinite.
    pub fn order(&self) -> Option<BigInt> {
        (self.free_rank == 0).then(|| self.torsion.iter().product())
    }

    /// Canonical coordinates of a meridian-coefficient vector: torsion
    /// coordinates reduced into [0, d), free coordinates exact.
    pub fn coords(&self, meridian_vec: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(meridian_vec.len(), self.meridian_count(), "meridian count mismatch");
        let mut out = self.meridian_map.mul_vec(meridian_vec);
        for (i, d) in self.torsion.iter().enumerate() {
            out[i] = out[i].mod_floor(d);
        }
        out
    }

    pub fn is_zero_class(&self, meridian_vec: &[BigInt]) -> bool {
        self.coords(meridian_vec).iter().all(BigInt::is_zero)
    }

    pub fn classes_equal(&self, a: &[BigInt], b: &[BigInt]) -> bool {
        self.coords(a) == self.coords(b)
    }

    /// Same isomorphism type: equal torsion chain and free rank.
    pub fn isomorphic(&self, other: &AbelianGroup) -> bool {
        self.torsion == other.torsion && self.free_rank == other.free_rank
    }

    pub fn summary(&self) -> GroupSummary {
        GroupSummary { torsion: self.torsion.clone(), free_rank: self.free_rank }
    }
}

/// Isomorphism-type summary used in vertex keys and reports.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct GroupSummary {
    #[serde(with = "bigints")]
    pub torsion: Vec<BigInt>,
    pub free_rank: usize,
}

impl GroupSummary {
    pub fn trivial() -> Self {
        GroupSummary { torsion: Vec::new(), free_rank: 0 }
    }

    pub fn is_trivial(&self) -> bool {
        self.torsion.is_empty() && self.free_rank == 0
    }
}

impl std::fmt::Display for GroupSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts: Vec<String> = self.torsion.iter().map(|d| format!("Z/{d}")).collect();
        if self.free_rank == 1 {
            parts.push("Z".into());
        } else if self.free_rank > 1 {
            parts.push(format!("Z^{}", self.free_rank));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// An element of a homology group written in meridian coordinates.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct HomologyClass {
    #[serde(with = "bigints")]
    pub coordinates: Vec<BigInt>,
}

impl HomologyClass {
    pub fn zero(n: usize) -> Self {
        HomologyClass { coordinates: vec![BigInt::zero(); n] }
    }
}

/// Presentation-independent form of a group element up to automorphisms of
/// the group: the free part is recorded by the gcd of its coordinates, the
/// torsion part by per-prime height sequences (the classical indicator of an
/// element of a finite abelian p-group), computed in T/gT when the free
/// content g is nonzero.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct EulerCanon {
    #[serde(with = "crate::format::bigint")]
    pub free_content: BigInt,
    pub torsion_profile: Vec<PrimeIndicator>,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct PrimeIndicator {
    #[serde(with = "crate::format::bigint")]
    pub prime: BigInt,
    pub heights: Vec<u32>,
}

fn small_primes(values: &[BigInt]) -> Vec<BigInt> {
    let mut primes = Vec::new();
    for v in values {
        let mut v = v.abs();
        let mut p = BigInt::from(2);
        while &p * &p <= v {
            if (&v % &p).is_zero() {
                if !primes.contains(&p) {
                    primes.push(p.clone());
                }
                while (&v % &p).is_zero() {
                    v /= &p;
                }
            }
            p += 1;
        }
        if v > BigInt::one() && !primes.contains(&v) {
            primes.push(v);
        }
    }
    primes.sort();
    primes
}

/// Height of `x` in `⊕ Z_{d_i}` at the prime `p`: the largest `m` with
/// `x ∈ p^m · T`, capped by the p-adic valuation of the exponents.
fn height_at(moduli: &[BigInt], x: &[BigInt], p: &BigInt) -> u32 {
    let max_m = moduli
        .iter()
        .map(|d| {
            let mut m = 0u32;
            let mut d = d.clone();
            while (&d % p).is_zero() {
                m += 1;
                d /= p;
            }
            m
        })
        .max()
        .unwrap_or(0);
    let mut h = 0u32;
    'outer: while h < max_m {
        let pk: BigInt = p.pow(h + 1);
        for (xi, di) in x.iter().zip(moduli) {
            let g = pk.gcd(di);
            if !(xi % &g).is_zero() {
                break 'outer;
            }
        }
        h += 1;
    }
    h
}

/// Canonicalize a group element up to automorphism.
pub fn canonical_element(group: &AbelianGroup, meridian_vec: &[BigInt]) -> EulerCanon {
    let coords = group.coords(meridian_vec);
    let k = group.torsion().len();
    let (torsion_part, free_part) = coords.split_at(k);

    let free_content = free_part
        .iter()
        .fold(BigInt::zero(), |acc, v| acc.gcd(v));

    // With a nonzero free content g, automorphisms shear the torsion part by
    // g·T, so the well-defined residue lives in T/gT.
    let moduli: Vec<BigInt> = if free_content.is_zero() {
        group.torsion().to_vec()
    } else {
        group
            .torsion()
            .iter()
            .map(|d| d.gcd(&free_content))
            .collect()
    };
    let reduced: Vec<BigInt> = torsion_part
        .iter()
        .zip(&moduli)
        .map(|(x, d)| if d.is_zero() { x.clone() } else { x.mod_floor(d) })
        .collect();

    let mut torsion_profile = Vec::new();
    for p in small_primes(&moduli) {
        // indicators live in the p-primary part: project and reduce there, so
        // every multiplication by p strictly lowers the order
        let pm: Vec<BigInt> = moduli
            .iter()
            .map(|d| {
                let mut part = BigInt::one();
                let mut d = d.clone();
                while (&d % &p).is_zero() {
                    part *= &p;
                    d /= &p;
                }
                part
            })
            .collect();
        let mut x: Vec<BigInt> = reduced.iter().zip(&pm).map(|(xi, m)| xi.mod_floor(m)).collect();
        let mut heights = Vec::new();
        while x.iter().any(|xi| !xi.is_zero()) {
            heights.push(height_at(&pm, &x, &p));
            for (xi, m) in x.iter_mut().zip(&pm) {
                *xi = (&*xi * &p).mod_floor(m);
            }
        }
        if !heights.is_empty() {
            torsion_profile.push(PrimeIndicator { prime: p, heights });
        }
    }
    EulerCanon { free_content, torsion_profile }
}

impl EulerCanon {
    pub fn is_zero(&self) -> bool {
        self.free_content.is_zero() && self.torsion_profile.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cokernel_examples() {
        let g = AbelianGroup::from_relations(&IntMat::from_rows(&[vec![-5]]));
        assert_eq!(g.torsion(), &[BigInt::from(5)]);
        assert_eq!(g.free_rank(), 0);
        assert_eq!(g.order(), Some(BigInt::from(5)));

        let g = AbelianGroup::from_relations(&IntMat::from_rows(&[vec![0]]));
        assert_eq!(g.free_rank(), 1);
        assert!(g.order().is_none());

        let g = AbelianGroup::from_relations(&IntMat::from_rows(&[vec![-1, 1], vec![1, 0]]));
        assert!(g.is_trivial());
    }

    #[test]
    fn meridian_classes() {
        // Z_5 generated by the meridian
        let g = AbelianGroup::from_relations(&IntMat::from_rows(&[vec![-5]]));
        assert!(!g.is_zero_class(&[BigInt::one()]));
        assert!(g.is_zero_class(&[BigInt::from(5)]));
        assert!(g.classes_equal(&[BigInt::from(2)], &[BigInt::from(-3)]));
    }

    #[test]
    fn canonical_element_is_orbit_invariant() {
        // In Z_5, 2 and 3 = -2 lie in the same automorphism orbit.
        let g = AbelianGroup::from_relations(&IntMat::from_rows(&[vec![-5]]));
        let a = canonical_element(&g, &[BigInt::from(2)]);
        let b = canonical_element(&g, &[BigInt::from(3)]);
        assert_eq!(a, b);
        // 0 differs from a generator
        let z = canonical_element(&g, &[BigInt::from(5)]);
        assert!(z.is_zero());
        assert_ne!(a, z);

        // In Z_4, height separates 2·gen from gen
        let g = AbelianGroup::from_relations(&IntMat::from_rows(&[vec![4]]));
        let gen = canonical_element(&g, &[BigInt::one()]);
        let twice = canonical_element(&g, &[BigInt::from(2)]);
        assert_ne!(gen, twice);
        assert_eq!(gen.torsion_profile[0].heights, vec![0, 1]);
        assert_eq!(twice.torsion_profile[0].heights, vec![1]);
    }
}
