//! Invariants read off a surgery diagram: first homology with tracked
//! meridians, the Euler class of the surgered contact structure, the
//! normalized d3-invariant on rational homology spheres, characteristic
//! sublinks, and the spin-c comparison kernel built on Gompf's Γ-invariant
//! differences.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{AttachedComponent, SurgeryDiagram, Violation};
use crate::group::{AbelianGroup, HomologyClass};
use crate::linalg::{self, IntMat};

/// Hard ceiling on enumerated characteristic sublinks (2^20).
pub const SUBLINK_CAP: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum InvariantError {
    #[error("invalid diagram: {}", format_violations(.0))]
    InvalidDiagram(Vec<Violation>),
    #[error("not a rational homology sphere (det Q = 0) — d3 undefined in this kernel")]
    D3Undefined,
    #[error("mod-2 characteristic system unsolvable; malformed diagram")]
    NoCharacteristicSublink,
    #[error("characteristic sublink enumeration exceeds cap of {SUBLINK_CAP} solutions")]
    SublinkOverflow,
    #[error("precondition failed: {0}")]
    Precondition(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

fn checked_matrix(d: &SurgeryDiagram) -> Result<crate::diagram::ExtendedLinkingMatrix, InvariantError> {
    d.extended_matrix().map_err(InvariantError::InvalidDiagram)
}

/// First homology of the surgered manifold: the cokernel of the extended
/// linking matrix, meridians tracked in canonical id order.
pub fn homology(d: &SurgeryDiagram) -> Result<AbelianGroup, InvariantError> {
    let ext = checked_matrix(d)?;
    Ok(AbelianGroup::from_relations(&ext.q))
}

/// Rotation numbers in canonical id order.
pub fn rotation_vector(d: &SurgeryDiagram) -> Result<Vec<BigInt>, InvariantError> {
    let ext = checked_matrix(d)?;
    Ok(ext
        .order
        .iter()
        .map(|id| BigInt::from(d.component(id).expect("canonical id").rot))
        .collect())
}

/// Poincaré dual of the Euler class: Σ rot_i · μ_i in meridian coordinates.
pub fn euler_class(d: &SurgeryDiagram) -> Result<HomologyClass, InvariantError> {
    Ok(HomologyClass { coordinates: rotation_vector(d)? })
}

/// Normalized d3-invariant of the surgered contact structure. Exact rational;
/// defined only on rational homology spheres (det Q ≠ 0), integral when
/// |det Q| = 1. Normalized so the standard tight 3-sphere has value 0 and the
/// invariant is additive under connected sums.
pub fn d3(d: &SurgeryDiagram) -> Result<BigRational, InvariantError> {
    let ext = checked_matrix(d)?;
    let n = ext.order.len() as i64;
    if ext.q.determinant().is_zero() {
        return Err(InvariantError::D3Undefined);
    }
    let rot = rotation_vector(d)?;
    let x = linalg::solve_rational(&ext.q, &rot).expect("nonsingular by the det check");
    let c_squared: BigRational = x
        .iter()
        .zip(&rot)
        .map(|(xi, ri)| xi * BigRational::from(ri.clone()))
        .sum();
    let sigma = linalg::signature(&ext.q);
    let q_count = d.components.iter().filter(|c| c.sign == crate::diagram::Sign::Plus).count() as i64;
    let quarter = (c_squared
        - BigRational::from(BigInt::from(3 * sigma))
        - BigRational::from(BigInt::from(2 * (1 + n))))
        / BigRational::from(BigInt::from(4));
    let value = quarter
        + BigRational::from(BigInt::from(q_count))
        + BigRational::new(BigInt::one(), BigInt::from(2));
    debug_assert!(
        !ext.q.determinant().abs().is_one() || value.denom().is_one(),
        "d3 must be integral on homology spheres"
    );
    Ok(value)
}

/// A sublink J with Σ_{j∈J} Q_ij ≡ Q_ii (mod 2) for every component i.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct CharacteristicSublink {
    pub ids: Vec<String>,
}

impl CharacteristicSublink {
    pub fn contains(&self, id: &str) -> bool {
        self.ids.iter().any(|x| x == id)
    }
}

fn is_characteristic(q: &IntMat, indicator: &[u8]) -> bool {
    let n = q.rows();
    (0..n).all(|i| {
        let sum: BigInt = (0..n)
            .filter(|&j| indicator[j] == 1)
            .map(|j| q.at(i, j))
            .sum();
        !(sum - q.at(i, i)).bit(0)
    })
}

/// All characteristic sublinks, in canonical order. The count is
/// 2^(mod-2 nullity of Q) and is capped at 2^20.
pub fn characteristic_sublinks(d: &SurgeryDiagram) -> Result<Vec<CharacteristicSublink>, InvariantError> {
    let ext = checked_matrix(d)?;
    let n = ext.order.len();
    let diag: Vec<BigInt> = (0..n).map(|i| ext.q.at(i, i).clone()).collect();
    let sol = linalg::solve_gf2(&ext.q, &diag).ok_or(InvariantError::NoCharacteristicSublink)?;
    let k = sol.kernel.len();
    if k > SUBLINK_CAP.trailing_zeros() as usize {
        return Err(InvariantError::SublinkOverflow);
    }
    let count = 1usize << k;
    let mut out = Vec::with_capacity(count);
    for mask in 0..count {
        let mut indicator = sol.particular.clone();
        for (b, basis) in sol.kernel.iter().enumerate() {
            if mask & (1 << b) != 0 {
                for (x, y) in indicator.iter_mut().zip(basis) {
                    *x ^= y;
                }
            }
        }
        debug_assert!(is_characteristic(&ext.q, &indicator));
        let ids: Vec<String> = ext
            .order
            .iter()
            .zip(&indicator)
            .filter(|(_, &on)| on == 1)
            .map(|(id, _)| id.clone())
            .collect();
        out.push(CharacteristicSublink { ids });
    }
    out.sort();
    Ok(out)
}

/// Mod-2 nullity of the extended linking matrix.
pub fn mod2_nullity(d: &SurgeryDiagram) -> Result<usize, InvariantError> {
    let ext = checked_matrix(d)?;
    Ok(ext.order.len() - linalg::gf2_rank(&ext.q))
}

/// Γ-half-vector for a sublink J: ½(rot + Q·1_J), in meridian coordinates.
/// Requires J characteristic (which makes every coordinate even).
fn gamma_half_vector(q: &IntMat, rot: &[BigInt], indicator: &[u8]) -> Vec<BigInt> {
    let n = q.rows();
    (0..n)
        .map(|i| {
            let s: BigInt = (0..n)
                .filter(|&j| indicator[j] == 1)
                .map(|j| q.at(i, j))
                .sum();
            let total = &rot[i] + s;
            debug_assert!(!total.bit(0), "characteristic sublink must give even coordinates");
            total / 2
        })
        .collect()
}

fn indicator_for(ext: &crate::diagram::ExtendedLinkingMatrix, j: &CharacteristicSublink) -> Vec<u8> {
    ext.order
        .iter()
        .map(|id| u8::from(j.contains(id)))
        .collect()
}

/// Raw Γ-half-vectors of `d`, one per characteristic sublink, in meridian
/// coordinates (canonical sublink order).
pub fn gamma_half_vectors(d: &SurgeryDiagram) -> Result<Vec<Vec<BigInt>>, InvariantError> {
    let ext = checked_matrix(d)?;
    let rot = rotation_vector(d)?;
    characteristic_sublinks(d)?
        .iter()
        .map(|j| {
            let indicator = indicator_for(&ext, j);
            Ok(gamma_half_vector(&ext.q, &rot, &indicator))
        })
        .collect()
}

/// Write every Γ-half-class of `d` (one per characteristic sublink) in
/// canonical group coordinates, as a sorted multiset.
pub fn gamma_class_multiset(d: &SurgeryDiagram) -> Result<Vec<Vec<BigInt>>, InvariantError> {
    let ext = checked_matrix(d)?;
    let rot = rotation_vector(d)?;
    let group = AbelianGroup::from_relations(&ext.q);
    let mut out = Vec::new();
    for j in characteristic_sublinks(d)? {
        let indicator = indicator_for(&ext, &j);
        let half = gamma_half_vector(&ext.q, &rot, &indicator);
        out.push(group.coords(&half));
    }
    out.sort();
    Ok(out)
}

/// Difference of Gompf Γ-invariants between the diagram with one extra
/// surgery and the base, relative to the spin structure presented by J.
///
/// Preconditions, verified here: the extra component's meridian is
/// nullhomologous in the union, the homology types agree (so the meridian map
/// is an isomorphism), and J induces a characteristic sublink of the union
/// (J itself, or J plus the extra component, without touching the base part).
/// The result is expressed in the base group's meridian coordinates.
pub fn gamma_difference(
    base: &SurgeryDiagram,
    extra: &AttachedComponent,
    j: &CharacteristicSublink,
) -> Result<HomologyClass, InvariantError> {
    let base_ext = checked_matrix(base)?;
    let base_indicator = indicator_for(&base_ext, j);
    for id in &j.ids {
        if !base.has_component(id) {
            return Err(InvariantError::Precondition(format!(
                "sublink member {id:?} is not a component of the base diagram"
            )));
        }
    }
    if !is_characteristic(&base_ext.q, &base_indicator) {
        return Err(InvariantError::Precondition(
            "J is not characteristic for the base diagram".into(),
        ));
    }

    let union = base
        .attach(extra)
        .map_err(InvariantError::Precondition)?;
    let union_ext = checked_matrix(&union)?;
    let union_group = AbelianGroup::from_relations(&union_ext.q);
    let base_group = AbelianGroup::from_relations(&base_ext.q);

    let extra_idx = union_ext
        .index_of(&extra.component.id)
        .expect("extra component is in the union");
    let mut extra_meridian = vec![BigInt::zero(); union_ext.order.len()];
    extra_meridian[extra_idx] = BigInt::one();
    if !union_group.is_zero_class(&extra_meridian) {
        return Err(InvariantError::Precondition(
            "homology changed: the extra meridian is not nullhomologous in the union".into(),
        ));
    }
    if !union_group.isomorphic(&base_group) {
        return Err(InvariantError::Precondition(format!(
            "homology changed: base is {}, union is {}",
            base_group.summary(),
            union_group.summary()
        )));
    }

    // J induces a characteristic sublink of the union: itself, or itself plus
    // the extra component. Error if neither satisfies the mod-2 condition.
    let mut union_indicator: Vec<u8> = union_ext
        .order
        .iter()
        .map(|id| u8::from(j.contains(id)))
        .collect();
    if !is_characteristic(&union_ext.q, &union_indicator) {
        union_indicator[extra_idx] = 1;
        if !is_characteristic(&union_ext.q, &union_indicator) {
            return Err(InvariantError::Precondition(
                "J is not characteristic for base ∪ extra (with or without the extra component)"
                    .into(),
            ));
        }
    }

    let union_rot = rotation_vector(&union)?;
    let base_rot = rotation_vector(base)?;
    let union_half = gamma_half_vector(&union_ext.q, &union_rot, &union_indicator);
    let base_half = gamma_half_vector(&base_ext.q, &base_rot, &base_indicator);

    // Difference in the union's meridian coordinates (base meridians padded).
    let mut diff = union_half;
    for (pos, id) in union_ext.order.iter().enumerate() {
        if let Some(base_pos) = base_ext.index_of(id) {
            diff[pos] -= &base_half[base_pos];
        }
    }

    // Express the difference class through the base meridians: solve
    // pad(y) ≡ diff (mod im Q') for integer y.
    let n_union = union_ext.order.len();
    let n_base = base_ext.order.len();
    let mut system = IntMat::zeros(n_union, n_base + n_union);
    for (pos, id) in union_ext.order.iter().enumerate() {
        if let Some(base_pos) = base_ext.index_of(id) {
            system.set(pos, base_pos, BigInt::one());
        }
    }
    for r in 0..n_union {
        for c in 0..n_union {
            system.set(r, n_base + c, -union_ext.q.at(r, c).clone());
        }
    }
    let solution = linalg::solve_integer(&system, &diff).ok_or_else(|| {
        InvariantError::Precondition(
            "difference class is not in the image of the base meridians".into(),
        )
    })?;
    Ok(HomologyClass { coordinates: solution[..n_base].to_vec() })
}

/// Do two diagrams with identical link data (same ids, tb, sign, linking)
/// induce the same spin-c structure? True iff for every characteristic
/// sublink the Γ-half-classes agree in homology.
pub fn spinc_equal(d1: &SurgeryDiagram, d2: &SurgeryDiagram) -> Result<bool, InvariantError> {
    let e1 = checked_matrix(d1)?;
    let e2 = checked_matrix(d2)?;
    if e1.order != e2.order || e1.q != e2.q {
        return Err(InvariantError::Precondition(
            "extended matrices differ; spin-c comparison needs identical link data".into(),
        ));
    }
    for id in &e1.order {
        let c1 = d1.component(id).expect("canonical id");
        let c2 = d2.component(id).expect("canonical id");
        if (c1.tb, c1.sign) != (c2.tb, c2.sign) {
            return Err(InvariantError::Precondition(format!(
                "component {id:?} differs in tb or sign; only rot may vary"
            )));
        }
    }
    let group = AbelianGroup::from_relations(&e1.q);
    let r1 = rotation_vector(d1)?;
    let r2 = rotation_vector(d2)?;
    for j in characteristic_sublinks(d1)? {
        let indicator = indicator_for(&e1, &j);
        let h1 = gamma_half_vector(&e1.q, &r1, &indicator);
        let h2 = gamma_half_vector(&e2.q, &r2, &indicator);
        if !group.classes_equal(&h1, &h2) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{LinkTo, Sign, SurgeryComponent};

    fn single(tb: i64, rot: i64, sign: Sign) -> SurgeryDiagram {
        let mut d = SurgeryDiagram::new();
        d.add_component(SurgeryComponent::new("u", tb, rot, sign));
        d
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from(BigInt::from(n))
    }

    #[test]
    fn homology_examples() {
        assert!(homology(&SurgeryDiagram::new()).unwrap().is_trivial());
        let g = homology(&single(-4, 1, Sign::Minus)).unwrap();
        assert_eq!(g.torsion(), &[BigInt::from(5)]);
        assert!(homology(&single(-2, 1, Sign::Plus)).unwrap().is_trivial());

        // frozen from the row/column-reduction oracle on [[-1,1],[1,0]]
        let mut d = SurgeryDiagram::new();
        d.add_component(SurgeryComponent::new("a", -2, 1, Sign::Plus));
        d.add_component(SurgeryComponent::new("b", -1, 0, Sign::Plus));
        d.set_linking("a", "b", 1);
        assert!(homology(&d).unwrap().is_trivial());
    }

    #[test]
    fn euler_class_examples() {
        let d = single(1, 4, Sign::Minus);
        let g = homology(&d).unwrap();
        assert_eq!(g.free_rank(), 1);
        let e = euler_class(&d).unwrap();
        assert_eq!(e.coordinates, vec![BigInt::from(4)]);

        let d = single(-4, 1, Sign::Minus);
        let e = euler_class(&d).unwrap();
        let g = homology(&d).unwrap();
        assert_eq!(e.coordinates, vec![BigInt::one()]);
        assert!(!g.is_zero_class(&e.coordinates));
        let five_e: Vec<BigInt> = e.coordinates.iter().map(|x| x * 5).collect();
        assert!(g.is_zero_class(&five_e));
    }

    #[test]
    fn d3_anchors() {
        assert_eq!(d3(&SurgeryDiagram::new()).unwrap(), rat(0));
        assert_eq!(d3(&single(-2, 1, Sign::Plus)).unwrap(), rat(1));
        let (two, _) = single(-2, 1, Sign::Plus).disjoint_union(&single(-2, 1, Sign::Plus));
        assert_eq!(d3(&two).unwrap(), rat(2));
        assert!(matches!(d3(&single(-1, 0, Sign::Plus)), Err(InvariantError::D3Undefined)));
    }

    #[test]
    fn d3_lens_space_has_torsion_denominator() {
        let v = d3(&single(-4, 1, Sign::Minus)).unwrap();
        assert_eq!(v, BigRational::new(BigInt::one(), BigInt::from(5)));
    }

    #[test]
    fn characteristic_sublink_examples() {
        let out = characteristic_sublinks(&SurgeryDiagram::new()).unwrap();
        assert_eq!(out, vec![CharacteristicSublink { ids: vec![] }]);

        // odd framing forces the component in
        let out = characteristic_sublinks(&single(-2, 1, Sign::Plus)).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].ids, vec!["u".to_string()]);

        // even framing gives both spin structures of S^1 x S^2
        let out = characteristic_sublinks(&single(-1, 0, Sign::Plus)).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].ids, Vec::<String>::new());
        assert_eq!(out[1].ids, vec!["u".to_string()]);
        assert_eq!(mod2_nullity(&single(-1, 0, Sign::Plus)).unwrap(), 1);
    }

    #[test]
    fn gamma_difference_unlinked_extra() {
        let base = single(-4, 1, Sign::Minus);
        let j = characteristic_sublinks(&base).unwrap().remove(0);
        let extra = AttachedComponent {
            component: SurgeryComponent::new("e", -2, 1, Sign::Plus),
            linking: vec![],
        };
        let diff = gamma_difference(&base, &extra, &j).unwrap();
        let g = homology(&base).unwrap();
        assert!(g.is_zero_class(&diff.coordinates));
    }

    #[test]
    fn gamma_difference_rejects_homology_change() {
        let base = single(-4, 1, Sign::Minus);
        let j = characteristic_sublinks(&base).unwrap().remove(0);
        let extra = AttachedComponent {
            component: SurgeryComponent::new("e", -1, 0, Sign::Minus),
            linking: vec![],
        };
        let err = gamma_difference(&base, &extra, &j).unwrap_err();
        assert!(err.to_string().contains("homology changed"));
    }

    #[test]
    fn gamma_difference_cancelling_pair() {
        // base: unlinked unimodular component; extra: its opposite-sign push-off
        let base = single(0, 1, Sign::Minus);
        let j = characteristic_sublinks(&base).unwrap().remove(0);
        let extra = AttachedComponent {
            component: SurgeryComponent::new("p", 0, 1, Sign::Plus),
            linking: vec![LinkTo { to: "u".into(), lk: 0 }],
        };
        let diff = gamma_difference(&base, &extra, &j).unwrap();
        assert!(homology(&base).unwrap().is_zero_class(&diff.coordinates));
    }

    #[test]
    fn spinc_examples() {
        let d = single(-4, 1, Sign::Minus);
        assert!(spinc_equal(&d, &d).unwrap());
        let other = single(-4, -1, Sign::Minus);
        assert!(!spinc_equal(&d, &other).unwrap());

        // rot vectors differing by 2 Q x give equal spin-c structures
        let shifted = single(-4, 1 - 2 * 5, Sign::Minus);
        assert!(spinc_equal(&d, &shifted).unwrap());

        let mismatched = single(-2, 1, Sign::Plus);
        assert!(spinc_equal(&d, &mismatched).is_err());
    }
}
