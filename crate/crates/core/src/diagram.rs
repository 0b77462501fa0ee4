//! Surgery diagrams in the standard contact 3-sphere: components carrying
//! (tb, rot, contact sign) and a symmetric off-diagonal linking form. This is
//! the single substrate everything else (invariants, moves, exploration)
//! reads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::IntMat;

/// Contact surgery coefficient, restricted to ±1.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_int(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => write!(f, "+1"),
            Sign::Minus => write!(f, "-1"),
        }
    }
}

// The text format spells the coefficient literally as "+1" or "-1"; anything
// else (rational coefficients in particular) is rejected at parse time.
impl Serialize for Sign {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        match raw.as_str() {
            "+1" => Ok(Sign::Plus),
            "-1" => Ok(Sign::Minus),
            other => Err(serde::de::Error::custom(format!(
                "sign must be \"+1\" or \"-1\", got {other:?}"
            ))),
        }
    }
}

/// One Legendrian surgery component. The smooth framing is derived, never
/// stored: `f = tb + sign`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct SurgeryComponent {
    pub id: String,
    pub tb: i64,
    pub rot: i64,
    pub sign: Sign,
}

impl SurgeryComponent {
    pub fn new(id: impl Into<String>, tb: i64, rot: i64, sign: Sign) -> Self {
        Self { id: id.into(), tb, rot, sign }
    }

    /// Smooth surgery coefficient: contact framing plus the contact sign.
    pub fn framing(&self) -> i64 {
        self.tb + self.sign.as_int()
    }

    /// tb + rot must be odd for Legendrian knots in the standard 3-sphere.
    pub fn parity_ok(&self) -> bool {
        (self.tb + self.rot).rem_euclid(2) == 1
    }
}

/// Symmetric linking entry between two distinct components; unlisted pairs
/// are zero.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct LinkEntry {
    pub a: String,
    pub b: String,
    pub lk: i64,
}

/// A component to be attached to an existing diagram, together with its
/// linking row into that diagram.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct AttachedComponent {
    pub component: SurgeryComponent,
    #[serde(default)]
    pub linking: Vec<LinkTo>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct LinkTo {
    pub to: String,
    pub lk: i64,
}

/// A contact (±1)-surgery diagram: components plus the symmetric linking
/// form. The struct itself admits ill-formed states (duplicate ids, bad
/// parity, dangling link endpoints) so that parsed documents can be
/// inspected; `validate` reports every violation and the computational
/// operations refuse invalid diagrams.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SurgeryDiagram {
    #[serde(default)]
    pub components: Vec<SurgeryComponent>,
    #[serde(default)]
    pub linking: Vec<LinkEntry>,
}

/// A well-formedness violation; these are values, not failures.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Violation {
    DuplicateId(String),
    Parity { id: String, tb: i64, rot: i64 },
    UnknownLinkEndpoint { a: String, b: String },
    SelfLink(String),
    ConflictingLink { a: String, b: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId(id) => write!(f, "duplicate component id {id:?}"),
            Violation::Parity { id, tb, rot } => {
                write!(f, "component {id:?} violates parity: tb={tb}, rot={rot}, tb+rot must be odd")
            }
            Violation::UnknownLinkEndpoint { a, b } => {
                write!(f, "linking entry ({a:?}, {b:?}) references an unknown component")
            }
            Violation::SelfLink(id) => {
                write!(f, "linking entry for {id:?} with itself; self-linking lives in the framing")
            }
            Violation::ConflictingLink { a, b } => {
                write!(f, "multiple linking entries for the pair ({a:?}, {b:?})")
            }
        }
    }
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl SurgeryDiagram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, id: &str) -> Option<&SurgeryComponent> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn has_component(&self, id: &str) -> bool {
        self.component(id).is_some()
    }

    pub fn add_component(&mut self, c: SurgeryComponent) {
        self.components.push(c);
    }

    /// Sets lk(a, b); zero removes the entry.
    pub fn set_linking(&mut self, a: &str, b: &str, lk: i64) {
        let key = pair_key(a, b);
        self.linking.retain(|e| pair_key(&e.a, &e.b) != key);
        if lk != 0 {
            self.linking.push(LinkEntry { a: key.0, b: key.1, lk });
        }
    }

    pub fn linking_number(&self, a: &str, b: &str) -> i64 {
        let key = pair_key(a, b);
        self.linking
            .iter()
            .find(|e| pair_key(&e.a, &e.b) == key)
            .map_or(0, |e| e.lk)
    }

    /// Component ids in canonical (lexicographic) order; all matrix
    /// constructions use this order.
    pub fn canonical_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.components.iter().map(|c| c.id.clone()).collect();
        ids.sort();
        ids
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for c in &self.components {
            if !seen.insert(c.id.clone()) {
                out.push(Violation::DuplicateId(c.id.clone()));
            }
            if !c.parity_ok() {
                out.push(Violation::Parity { id: c.id.clone(), tb: c.tb, rot: c.rot });
            }
        }
        let mut pairs = BTreeSet::new();
        for e in &self.linking {
            if e.a == e.b {
                out.push(Violation::SelfLink(e.a.clone()));
                continue;
            }
            if !seen.contains(&e.a) || !seen.contains(&e.b) {
                out.push(Violation::UnknownLinkEndpoint { a: e.a.clone(), b: e.b.clone() });
            }
            let key = pair_key(&e.a, &e.b);
            if !pairs.insert(key.clone()) {
                out.push(Violation::ConflictingLink { a: key.0, b: key.1 });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// The extended linking matrix Q in canonical id order: framings on the
    /// diagonal, linking numbers off it.
    pub fn extended_matrix(&self) -> Result<ExtendedLinkingMatrix, Vec<Violation>> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(violations);
        }
        let order = self.canonical_ids();
        let n = order.len();
        let mut q = IntMat::zeros(n, n);
        for (i, a) in order.iter().enumerate() {
            let comp = self.component(a).expect("id from canonical order");
            q.set(i, i, comp.framing().into());
            for (j, b) in order.iter().enumerate().skip(i + 1) {
                let lk = self.linking_number(a, b);
                q.set(i, j, lk.into());
                q.set(j, i, lk.into());
            }
        }
        Ok(ExtendedLinkingMatrix { order, q })
    }

    /// Disjoint union: components of `other` are appended, relabeled only on
    /// id collision (deterministic `~k` suffixes), all cross linking zero.
    /// Returns the union and the id map applied to `other`.
    pub fn disjoint_union(&self, other: &SurgeryDiagram) -> (SurgeryDiagram, BTreeMap<String, String>) {
        let mut out = self.clone();
        let mut taken: BTreeSet<String> =
            self.components.iter().map(|c| c.id.clone()).collect();
        let mut rename = BTreeMap::new();
        for c in &other.components {
            let fresh = if taken.contains(&c.id) {
                let mut k = 1usize;
                loop {
                    let cand = format!("{}~{k}", c.id);
                    if !taken.contains(&cand) {
                        break cand;
                    }
                    k += 1;
                }
            } else {
                c.id.clone()
            };
            taken.insert(fresh.clone());
            rename.insert(c.id.clone(), fresh.clone());
            out.components.push(SurgeryComponent { id: fresh, ..c.clone() });
        }
        for e in &other.linking {
            let a = rename.get(&e.a).cloned().unwrap_or_else(|| e.a.clone());
            let b = rename.get(&e.b).cloned().unwrap_or_else(|| e.b.clone());
            out.linking.push(LinkEntry { a, b, lk: e.lk });
        }
        (out, rename)
    }

    /// Attach a single component with its linking row.
    pub fn attach(&self, attached: &AttachedComponent) -> Result<SurgeryDiagram, String> {
        if self.has_component(&attached.component.id) {
            return Err(format!("component id {:?} already present", attached.component.id));
        }
        let mut out = self.clone();
        out.add_component(attached.component.clone());
        for l in &attached.linking {
            if !self.has_component(&l.to) {
                return Err(format!("linking target {:?} not in diagram", l.to));
            }
            out.set_linking(&attached.component.id, &l.to, l.lk);
        }
        Ok(out)
    }

    /// Remove a component and every linking entry mentioning it.
    pub fn remove_component(&self, id: &str) -> SurgeryDiagram {
        SurgeryDiagram {
            components: self
                .components
                .iter()
                .filter(|c| c.id != id)
                .cloned()
                .collect(),
            linking: self
                .linking
                .iter()
                .filter(|e| e.a != id && e.b != id)
                .cloned()
                .collect(),
        }
    }

    /// The attached-component view of one component: its data plus its
    /// linking row into the rest of the diagram.
    pub fn detach_view(&self, id: &str) -> Option<AttachedComponent> {
        let component = self.component(id)?.clone();
        let linking = self
            .components
            .iter()
            .filter(|c| c.id != id)
            .filter_map(|c| {
                let lk = self.linking_number(id, &c.id);
                (lk != 0).then(|| LinkTo { to: c.id.clone(), lk })
            })
            .collect();
        Some(AttachedComponent { component, linking })
    }

    /// Structure-preserving copy with components sorted by id and linking
    /// entries normalized; used for order-insensitive comparison.
    pub fn canonicalized(&self) -> SurgeryDiagram {
        let mut components = self.components.clone();
        components.sort_by(|a, b| a.id.cmp(&b.id));
        let mut map: BTreeMap<(String, String), i64> = BTreeMap::new();
        for e in &self.linking {
            map.entry(pair_key(&e.a, &e.b)).or_insert(e.lk);
        }
        let linking = map
            .into_iter()
            .filter(|(_, lk)| *lk != 0)
            .map(|((a, b), lk)| LinkEntry { a, b, lk })
            .collect();
        SurgeryDiagram { components, linking }
    }

    /// Relabel components in canonical order to `prefix0, prefix1, ...`.
    pub fn canonical_relabel(&self, prefix: &str) -> SurgeryDiagram {
        let order = self.canonical_ids();
        let rename: BTreeMap<String, String> = order
            .iter()
            .enumerate()
            .map(|(k, id)| (id.clone(), format!("{prefix}{k}")))
            .collect();
        let mut components: Vec<SurgeryComponent> = self
            .components
            .iter()
            .map(|c| SurgeryComponent { id: rename[&c.id].clone(), ..c.clone() })
            .collect();
        components.sort_by(|a, b| a.id.cmp(&b.id));
        let linking = self
            .linking
            .iter()
            .map(|e| {
                let (a, b) = pair_key(&rename[&e.a], &rename[&e.b]);
                LinkEntry { a, b, lk: e.lk }
            })
            .collect();
        SurgeryDiagram { components, linking }.canonicalized()
    }
}

impl PartialEq for SurgeryDiagram {
    fn eq(&self, other: &Self) -> bool {
        self.components == other.components
            && normalized_links(self) == normalized_links(other)
    }
}

impl Eq for SurgeryDiagram {}

fn normalized_links(d: &SurgeryDiagram) -> BTreeMap<(String, String), i64> {
    d.linking
        .iter()
        .filter(|e| e.lk != 0)
        .map(|e| (pair_key(&e.a, &e.b), e.lk))
        .collect()
}

/// Symmetric integer matrix with framings on the diagonal, in canonical
/// component order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExtendedLinkingMatrix {
    pub order: Vec<String>,
    pub q: IntMat,
}

impl ExtendedLinkingMatrix {
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.order.iter().position(|x| x == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    pub(crate) fn unknot(id: &str, tb: i64, rot: i64, sign: Sign) -> SurgeryComponent {
        SurgeryComponent::new(id, tb, rot, sign)
    }

    #[test]
    fn validate_empty_and_standard() {
        assert!(SurgeryDiagram::new().validate().is_empty());
        let mut d = SurgeryDiagram::new();
        d.add_component(unknot("u", -1, 0, Sign::Plus));
        assert!(d.validate().is_empty());
    }

    #[test]
    fn validate_parity() {
        let mut d = SurgeryDiagram::new();
        d.add_component(unknot("u", -1, 1, Sign::Plus));
        let v = d.validate();
        assert_eq!(v.len(), 1);
        assert!(matches!(&v[0], Violation::Parity { id, .. } if id == "u"));
    }

    #[test]
    fn validate_duplicate_and_links() {
        let mut d = SurgeryDiagram::new();
        d.add_component(unknot("u", -1, 0, Sign::Plus));
        d.components.push(unknot("u", -2, 1, Sign::Plus));
        d.linking.push(LinkEntry { a: "u".into(), b: "x".into(), lk: 1 });
        d.linking.push(LinkEntry { a: "u".into(), b: "u".into(), lk: 1 });
        let v = d.validate();
        assert!(v.contains(&Violation::DuplicateId("u".into())));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::UnknownLinkEndpoint { b, .. } if b == "x")));
        assert!(v.contains(&Violation::SelfLink("u".into())));
    }

    #[test]
    fn extended_matrix_examples() {
        let d = SurgeryDiagram::new();
        assert_eq!(d.extended_matrix().unwrap().order.len(), 0);

        // contact (+1)-surgery along the tb=-2 unknot: Q = (-1)
        let mut d = SurgeryDiagram::new();
        d.add_component(unknot("u", -2, 1, Sign::Plus));
        let q = d.extended_matrix().unwrap().q;
        assert_eq!(q.at(0, 0), &BigInt::from(-1));

        // contact (-1)-surgery along the tb=1-p unknot: Q = (-p)
        let p = 5;
        let mut d = SurgeryDiagram::new();
        d.add_component(unknot("u", 1 - p, 1, Sign::Minus));
        let q = d.extended_matrix().unwrap().q;
        assert_eq!(q.at(0, 0), &BigInt::from(-p));
    }

    #[test]
    fn union_blocks_and_identity() {
        let mut a = SurgeryDiagram::new();
        a.add_component(unknot("u", -2, 1, Sign::Plus));
        let (two, rename) = a.disjoint_union(&a);
        assert_eq!(two.len(), 2);
        assert_eq!(rename["u"], "u~1");
        let q = two.extended_matrix().unwrap().q;
        assert_eq!(q.at(0, 0), &BigInt::from(-1));
        assert_eq!(q.at(1, 1), &BigInt::from(-1));
        assert_eq!(q.at(0, 1), &BigInt::from(0));

        let (same, _) = a.disjoint_union(&SurgeryDiagram::new());
        assert_eq!(same, a);
        let (from_empty, _) = SurgeryDiagram::new().disjoint_union(&a);
        assert_eq!(from_empty.canonical_relabel("c"), a.canonical_relabel("c"));
    }

    #[test]
    fn union_associative_up_to_relabel() {
        let mut a = SurgeryDiagram::new();
        a.add_component(unknot("x", -2, 1, Sign::Plus));
        let mut b = SurgeryDiagram::new();
        b.add_component(unknot("x", -1, 0, Sign::Minus));
        b.add_component(unknot("y", -3, 0, Sign::Plus));
        b.set_linking("x", "y", 2);
        let mut c = SurgeryDiagram::new();
        c.add_component(unknot("y", -4, 1, Sign::Plus));

        let (ab, _) = a.disjoint_union(&b);
        let (ab_c, _) = ab.disjoint_union(&c);
        let (bc, _) = b.disjoint_union(&c);
        let (a_bc, _) = a.disjoint_union(&bc);
        assert_eq!(ab_c.canonical_relabel("c"), a_bc.canonical_relabel("c"));
    }
}
