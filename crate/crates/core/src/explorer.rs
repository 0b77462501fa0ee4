//! Finite, certified subgraphs of the contact surgery graph.
//!
//! Vertex identity is certified only inside classified families: overtwisted
//! structures on the 3-sphere are keyed by their d3-invariant together with a
//! constructive overtwistedness witness (a recorded disjoint stored
//! overtwisted-sphere summand), and the tight 3-sphere is the empty diagram.
//! Everything else is an invariant-class vertex: equal keys mean equal
//! invariant tuples, not a certified contactomorphism.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{AttachedComponent, LinkTo, Sign, SurgeryComponent, SurgeryDiagram};
use crate::format::{self, rational_str};
use crate::group::{canonical_element, EulerCanon, GroupSummary};
use crate::invariants::{self, InvariantError};
use crate::linalg::IntMat;
use crate::moves::{self, block_intact, MoveError, OtBlock};

#[derive(Debug, Error)]
pub enum ExplorerError {
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("certificate verification failed: {0}")]
    Verification(String),
    #[error("a detour vertex for p = {p} collides with the forbidden set — increase p")]
    DetourCollision { p: i64 },
    #[error("budget exceeded: {0}")]
    Budget(String),
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "OT_S3")]
    OtS3,
    #[serde(rename = "TIGHT_S3")]
    TightS3,
    #[serde(rename = "RHS_GENERIC")]
    RhsGeneric,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::OtS3 => write!(f, "OT_S3"),
            Family::TightS3 => write!(f, "TIGHT_S3"),
            Family::RhsGeneric => write!(f, "RHS_GENERIC"),
        }
    }
}

/// Explorer vertex identity. Equality compares the canonicalized fields:
/// family, homology type, d3, canonical Euler data, and the presence (not the
/// content) of the overtwistedness certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VertexKey {
    pub family: Family,
    pub homology: GroupSummary,
    #[serde(with = "format::rational_opt")]
    pub d3: Option<BigRational>,
    pub euler: EulerCanon,
    pub ot_certificate: Option<OtBlock>,
}

impl VertexKey {
    fn canonical_tuple(&self) -> (Family, &GroupSummary, &Option<BigRational>, &EulerCanon, bool) {
        (self.family, &self.homology, &self.d3, &self.euler, self.ot_certificate.is_some())
    }

    pub fn d3_str(&self) -> String {
        self.d3.as_ref().map_or_else(|| "undefined".into(), rational_str)
    }
}

impl PartialEq for VertexKey {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_tuple() == other.canonical_tuple()
    }
}

impl Eq for VertexKey {}

impl PartialOrd for VertexKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for VertexKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.canonical_tuple().cmp(&other.canonical_tuple())
    }
}

impl std::fmt::Display for VertexKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:d3={}:H={}", self.family, self.d3_str(), self.homology)
    }
}

/// Classify a diagram into a vertex key. `evidence` lists candidate
/// overtwisted-sphere witnesses; the first one still intact in the diagram is
/// kept. Without intact evidence nothing is ever inferred overtwisted, and
/// tightness is claimed only for the empty diagram.
pub fn classify(d: &SurgeryDiagram, evidence: &[OtBlock]) -> Result<VertexKey, ExplorerError> {
    let group = invariants::homology(d)?;
    let euler = canonical_element(&group, &invariants::euler_class(d)?.coordinates);
    let d3 = match invariants::d3(d) {
        Ok(v) => Some(v),
        Err(InvariantError::D3Undefined) => None,
        Err(e) => return Err(e.into()),
    };
    let mut sorted: Vec<&OtBlock> = evidence.iter().collect();
    sorted.sort();
    sorted.dedup();
    let ot_certificate = sorted.into_iter().find(|b| block_intact(d, b)).cloned();

    let family = if d.is_empty() {
        Family::TightS3
    } else if group.is_trivial() && ot_certificate.is_some() {
        debug_assert!(
            d3.as_ref().is_some_and(|v| v.denom().is_one()),
            "overtwisted sphere keys must carry integral d3"
        );
        Family::OtS3
    } else {
        Family::RhsGeneric
    };
    Ok(VertexKey { family, homology: group.summary(), d3, euler, ot_certificate })
}

/// A secondary presentation of an edge target, with the meridian transport
/// from the witness presentation; used when the target vertex's key (and its
/// overtwistedness certificate) comes from a different diagram of the same
/// manifold.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct AliasPresentation {
    pub diagram: SurgeryDiagram,
    /// rows = alias meridians, cols = witness meridians, decimal entries
    pub transport: Vec<Vec<String>>,
}

fn transport_to_rows(t: &IntMat) -> Vec<Vec<String>> {
    (0..t.rows())
        .map(|i| (0..t.cols()).map(|j| t.at(i, j).to_string()).collect())
        .collect()
}

fn transport_from_rows(rows: &[Vec<String>]) -> Result<IntMat, ExplorerError> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    let mut m = IntMat::zeros(r, c);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != c {
            return Err(ExplorerError::Verification("ragged transport matrix".into()));
        }
        for (j, s) in row.iter().enumerate() {
            let v: BigInt = s
                .parse()
                .map_err(|_| ExplorerError::Verification(format!("bad transport entry {s:?}")))?;
            m.set(i, j, v);
        }
    }
    Ok(m)
}

/// One certified edge: the witness is the source diagram plus the single
/// added component. Edges realized by a sign=−1 component follow the surgery
/// graph's arrows from source to target; sign=+1 edges traverse the
/// underlying directed edge backwards.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct EdgeCertificate {
    pub from_key: VertexKey,
    pub to_key: VertexKey,
    pub witness: SurgeryDiagram,
    pub added: AttachedComponent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alias: Option<AliasPresentation>,
}

impl EdgeCertificate {
    pub fn sign(&self) -> Sign {
        self.added.component.sign
    }

    /// Endpoints of the underlying directed surgery-graph edge.
    pub fn gamma_arrow(&self) -> (&VertexKey, &VertexKey) {
        match self.sign() {
            Sign::Minus => (&self.from_key, &self.to_key),
            Sign::Plus => (&self.to_key, &self.from_key),
        }
    }
}

/// A replayable chain of edge certificates.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PathCertificate {
    pub start_key: VertexKey,
    pub start_diagram: SurgeryDiagram,
    pub edges: Vec<EdgeCertificate>,
}

impl PathCertificate {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn end_key(&self) -> &VertexKey {
        self.edges.last().map_or(&self.start_key, |e| &e.to_key)
    }

    pub fn end_diagram(&self) -> &SurgeryDiagram {
        self.edges.last().map_or(&self.start_diagram, |e| &e.witness)
    }

    /// Every key along the path, endpoints included.
    pub fn keys(&self) -> Vec<&VertexKey> {
        std::iter::once(&self.start_key)
            .chain(self.edges.iter().map(|e| &e.to_key))
            .collect()
    }

    fn evidence_pool(&self) -> Vec<OtBlock> {
        let mut pool: Vec<OtBlock> = self
            .keys()
            .into_iter()
            .filter_map(|k| k.ot_certificate.clone())
            .collect();
        pool.sort();
        pool.dedup();
        pool
    }

    /// Replay the whole certificate: chaining, witness reconstruction, and
    /// key recomputation (through the alias presentation where recorded).
    pub fn verify(&self) -> Result<(), ExplorerError> {
        let evidence = self.evidence_pool();
        let recomputed = classify(&self.start_diagram, &evidence)?;
        if recomputed != self.start_key {
            return Err(ExplorerError::Verification(format!(
                "start key mismatch: recorded {}, recomputed {}",
                self.start_key, recomputed
            )));
        }
        let mut cur_key = &self.start_key;
        let mut cur_diagram = &self.start_diagram;
        for (n, edge) in self.edges.iter().enumerate() {
            if &edge.from_key != cur_key {
                return Err(ExplorerError::Verification(format!("edge {n} does not chain")));
            }
            let rebuilt = cur_diagram
                .attach(&edge.added)
                .map_err(ExplorerError::Precondition)?;
            if rebuilt != edge.witness {
                return Err(ExplorerError::Verification(format!(
                    "edge {n}: witness is not source plus the added component"
                )));
            }
            let direct = classify(&edge.witness, &evidence)?;
            match &edge.alias {
                None => {
                    if direct != edge.to_key {
                        return Err(ExplorerError::Verification(format!(
                            "edge {n}: recomputed key {direct} does not reproduce recorded {}",
                            edge.to_key
                        )));
                    }
                }
                Some(alias) => {
                    let t = transport_from_rows(&alias.transport)?;
                    moves::verify_presentations_equivalent(&edge.witness, &alias.diagram, &t)?;
                    let mut alias_evidence = evidence.clone();
                    alias_evidence.extend(edge.to_key.ot_certificate.clone());
                    let via_alias = classify(&alias.diagram, &alias_evidence)?;
                    if via_alias != edge.to_key {
                        return Err(ExplorerError::Verification(format!(
                            "edge {n}: alias presentation key {via_alias} does not reproduce {}",
                            edge.to_key
                        )));
                    }
                }
            }
            cur_key = &edge.to_key;
            cur_diagram = &edge.witness;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// ladders

/// Diagram and witnesses of the overtwisted sphere with d3 = k, built from
/// the stored summands by repeated ambient connected sums.
pub fn ot_sphere_state(k: i64) -> (SurgeryDiagram, Vec<OtBlock>) {
    let mut diagram = SurgeryDiagram::new();
    let mut evidence = Vec::new();
    let steps: Vec<i8> = if k == 0 {
        vec![0]
    } else if k > 0 {
        vec![1; k as usize]
    } else {
        vec![-1; (-k) as usize]
    };
    for s in steps {
        let outcome = moves::ambient_connect_sum(&diagram, s).expect("valid by construction");
        diagram = outcome.diagram;
        evidence.extend(outcome.deposited);
    }
    (diagram, evidence)
}

/// A directed path of (+1)-edges from the overtwisted sphere with d3 = k_min
/// to the one with d3 = k_max, each edge verified by recomputing d3 and the
/// vertex key.
pub fn ot_ladder(k_min: i64, k_max: i64) -> Result<PathCertificate, ExplorerError> {
    if k_min > k_max {
        return Err(ExplorerError::Precondition(format!(
            "ladder needs k_min ≤ k_max, got {k_min} > {k_max}"
        )));
    }
    let (start_diagram, mut evidence) = ot_sphere_state(k_min);
    let start_key = classify(&start_diagram, &evidence)?;
    let mut edges = Vec::new();
    let mut cur = start_diagram.clone();
    let mut cur_key = start_key.clone();
    for k in k_min..k_max {
        let outcome = moves::ambient_connect_sum(&cur, 1)?;
        let added_id = outcome.deposited[0].ids[0].clone();
        evidence.extend(outcome.deposited.clone());
        let witness = outcome.diagram;
        let to_key = classify(&witness, &evidence)?;
        let expected = BigRational::from(BigInt::from(k + 1));
        if to_key.d3 != Some(expected) {
            return Err(ExplorerError::Verification(format!(
                "ladder rung to d3 = {} failed d3 recomputation (got {})",
                k + 1,
                to_key.d3_str()
            )));
        }
        if to_key.family != Family::OtS3 {
            return Err(ExplorerError::Verification(format!(
                "ladder rung landed outside the overtwisted-sphere family: {to_key}"
            )));
        }
        let added = witness.detach_view(&added_id).expect("added component exists");
        edges.push(EdgeCertificate {
            from_key: cur_key.clone(),
            to_key: to_key.clone(),
            witness: witness.clone(),
            added,
            alias: None,
        });
        cur = witness;
        cur_key = to_key;
    }
    Ok(PathCertificate { start_key, start_diagram, edges })
}

/// The single-component diagram data whose disjoint insertion undoes one
/// (+1)-rung at the level of every invariant: |det Q| = 1 and own d3 = −1.
fn inverse_rung_component() -> (i64, i64, Sign) {
    (2, 1, Sign::Minus)
}

/// Reverse a ladder-style certificate: walk the path backwards with one
/// (−1)-edge per forward rung, each landing verified against the forward
/// keys.
pub fn reverse_ladder(path: &PathCertificate) -> Result<PathCertificate, ExplorerError> {
    let evidence = path.evidence_pool();
    let keys: Vec<VertexKey> = path.keys().into_iter().cloned().collect();
    let mut cur = path.end_diagram().clone();
    let mut cur_key = path.end_key().clone();
    let start_key = cur_key.clone();
    let start_diagram = cur.clone();
    let (tb, rot, sign) = inverse_rung_component();
    let mut edges = Vec::new();
    for target in keys.iter().rev().skip(1) {
        let taken: BTreeSet<String> = cur.components.iter().map(|c| c.id.clone()).collect();
        let id = crate::moves::fresh_id(&taken, "rev");
        let added = AttachedComponent {
            component: SurgeryComponent::new(id, tb, rot, sign),
            linking: Vec::new(),
        };
        let witness = cur.attach(&added).map_err(ExplorerError::Precondition)?;
        let to_key = classify(&witness, &evidence)?;
        if &to_key != target {
            return Err(ExplorerError::Verification(format!(
                "reversed edge landed on {to_key}, expected {target}"
            )));
        }
        edges.push(EdgeCertificate {
            from_key: cur_key.clone(),
            to_key: to_key.clone(),
            witness: witness.clone(),
            added,
            alias: None,
        });
        cur = witness;
        cur_key = to_key;
    }
    Ok(PathCertificate { start_key, start_diagram, edges })
}

// ---------------------------------------------------------------------------
// the link of a vertex

fn all_path_ids(diagrams: &[&SurgeryDiagram]) -> BTreeSet<String> {
    diagrams
        .iter()
        .flat_map(|d| d.components.iter().map(|c| c.id.clone()))
        .collect()
}

/// Constructive connectivity of the link of a vertex: given a single-surgery
/// neighbor of `base`, produce a verified path of length ≤ 2 from that
/// neighbor to the vertex of base # (overtwisted sphere, d3 = 1).
///
/// A (+1)-neighbor reaches the target in one step: a further (+1)-surgery on
/// a tb=−1 meridian of the added component is the target manifold, verified
/// by the full presentation-equivalence check. A (−1)-neighbor first trades
/// its surgery for a (+1) via a stabilized meridian, then falls back to the
/// first case.
pub fn verify_link_theorem(
    base: &SurgeryDiagram,
    base_evidence: &[OtBlock],
    edge: &AttachedComponent,
) -> Result<PathCertificate, ExplorerError> {
    if !base.is_valid() {
        return Err(ExplorerError::Precondition("base diagram is invalid".into()));
    }
    let neighbor = base.attach(edge).map_err(ExplorerError::Precondition)?;
    if !neighbor.is_valid() {
        return Err(ExplorerError::Precondition("edge does not define a valid neighbor".into()));
    }

    // the common landing vertex: base # (overtwisted sphere, d3 = 1)
    let target_outcome = moves::ambient_connect_sum(base, 1)?;
    let target = target_outcome.diagram;
    let mut target_evidence: Vec<OtBlock> = base_evidence.to_vec();
    target_evidence.extend(target_outcome.deposited);
    let to_key = classify(&target, &target_evidence)?;

    let start_key = classify(&neighbor, base_evidence)?;
    let start_diagram = neighbor.clone();

    match edge.component.sign {
        Sign::Plus => {
            let e = avdek_edge(&neighbor, &start_key, &edge.component.id, &target, &to_key, None)?;
            Ok(PathCertificate { start_key, start_diagram, edges: vec![e] })
        }
        Sign::Minus => {
            // step one: a (+1)-surgery on a stabilized meridian of the added
            // component; the intermediate manifold is the (+1)-presentation of
            // the same surgery
            let taken = all_path_ids(&[&neighbor, &target]);
            let m_id = crate::moves::fresh_id(&taken, &format!("mu_{}", edge.component.id));
            let added1 = AttachedComponent {
                component: SurgeryComponent::new(m_id.clone(), -2, 1, Sign::Plus),
                linking: vec![LinkTo { to: edge.component.id.clone(), lk: 1 }],
            };
            let witness1 = neighbor.attach(&added1).map_err(ExplorerError::Precondition)?;
            let mid_key = classify(&witness1, base_evidence)?;
            let edge1 = EdgeCertificate {
                from_key: start_key.clone(),
                to_key: mid_key.clone(),
                witness: witness1.clone(),
                added: added1,
                alias: None,
            };
            // step two: the Avdek collapse applies to the converted component
            let edge2 = avdek_edge(
                &witness1,
                &mid_key,
                &edge.component.id,
                &target,
                &to_key,
                Some(m_id),
            )?;
            Ok(PathCertificate { start_key, start_diagram, edges: vec![edge1, edge2] })
        }
    }
}

/// Build the verified one-edge certificate for "a (+1)-surgery followed by a
/// (+1)-surgery on its tb=−1 meridian is the stabilization summand": attach
/// the meridian to `k_id` in `source` and verify equivalence with `target`.
/// `extra_collapse` carries the stabilized meridian of the (−1)-case, which
/// collapses together with the pair.
fn avdek_edge(
    source: &SurgeryDiagram,
    from_key: &VertexKey,
    k_id: &str,
    target: &SurgeryDiagram,
    to_key: &VertexKey,
    extra_collapse: Option<String>,
) -> Result<EdgeCertificate, ExplorerError> {
    let taken = all_path_ids(&[source, target]);
    let u_id = crate::moves::fresh_id(&taken, &format!("mu_{k_id}"));
    let added = AttachedComponent {
        component: SurgeryComponent::new(u_id.clone(), -1, 0, Sign::Plus),
        linking: vec![LinkTo { to: k_id.to_string(), lk: 1 }],
    };
    let witness = source.attach(&added).map_err(ExplorerError::Precondition)?;
    let w_ext = witness
        .extended_matrix()
        .map_err(InvariantError::InvalidDiagram)?;
    let t_ext = target
        .extended_matrix()
        .map_err(InvariantError::InvalidDiagram)?;
    let mut collapse = vec![k_id.to_string(), u_id];
    collapse.extend(extra_collapse);
    let transport = moves::transport_by_collapse(&w_ext, &t_ext, &collapse)?;
    moves::verify_presentations_equivalent(&witness, target, &transport)?;
    Ok(EdgeCertificate {
        from_key: from_key.clone(),
        to_key: to_key.clone(),
        witness,
        added,
        alias: Some(AliasPresentation {
            diagram: target.clone(),
            transport: transport_to_rows(&transport),
        }),
    })
}

// ---------------------------------------------------------------------------
// detours

/// Reroute a path so that every interior vertex carries a lens-space summand
/// of order p, avoiding the forbidden keys: insert the detour unknot first,
/// replay the path, close the detour last. Output length is input + 2 and the
/// endpoint keys are unchanged.
pub fn verify_detour(
    path: &PathCertificate,
    forbidden: &BTreeSet<VertexKey>,
    p: i64,
) -> Result<PathCertificate, ExplorerError> {
    path.verify()?;
    if forbidden.contains(&path.start_key) || forbidden.contains(path.end_key()) {
        return Err(ExplorerError::Precondition(
            "a path endpoint lies in the forbidden set".into(),
        ));
    }
    let evidence = path.evidence_pool();

    let diagrams: Vec<&SurgeryDiagram> = std::iter::once(&path.start_diagram)
        .chain(path.edges.iter().map(|e| &e.witness))
        .collect();
    let taken = all_path_ids(&diagrams);
    let up_id = crate::moves::fresh_id(&taken, &format!("u{p}"));

    // opening edge: the detour unknot, unlinked, inside a Darboux ball
    let insert = moves::detour_insert(&path.start_diagram, p)?;
    let mut cur = {
        // rename the inserted component to the path-wide fresh id
        let inserted = insert
            .diagram
            .components
            .iter()
            .find(|c| !path.start_diagram.has_component(&c.id))
            .expect("insert adds one component")
            .clone();
        let mut d = insert.diagram.remove_component(&inserted.id);
        d.add_component(SurgeryComponent { id: up_id.clone(), ..inserted });
        d
    };
    let added0 = cur.detach_view(&up_id).expect("detour component exists");
    let mut cur_key = classify(&cur, &evidence)?;
    if forbidden.contains(&cur_key) {
        return Err(ExplorerError::DetourCollision { p });
    }
    let mut edges = vec![EdgeCertificate {
        from_key: path.start_key.clone(),
        to_key: cur_key.clone(),
        witness: cur.clone(),
        added: added0,
        alias: None,
    }];

    // replay the original edges next to the detour summand
    for e in &path.edges {
        let witness = cur.attach(&e.added).map_err(ExplorerError::Precondition)?;
        let to_key = classify(&witness, &evidence)?;
        if forbidden.contains(&to_key) {
            return Err(ExplorerError::DetourCollision { p });
        }
        let has_p_torsion = to_key
            .homology
            .torsion
            .iter()
            .any(|d| (d % BigInt::from(p)).is_zero());
        if !has_p_torsion {
            return Err(ExplorerError::Verification(format!(
                "detour vertex lost its order-{p} summand: {to_key}"
            )));
        }
        edges.push(EdgeCertificate {
            from_key: cur_key.clone(),
            to_key: to_key.clone(),
            witness: witness.clone(),
            added: e.added.clone(),
            alias: None,
        });
        cur = witness;
        cur_key = to_key;
    }

    // closing edge: the (+1)-meridian of the detour unknot
    let close = moves::detour_close(&cur, &up_id)?;
    let witness = close.diagram;
    let m_added = witness
        .components
        .iter()
        .find(|c| !cur.has_component(&c.id))
        .expect("close adds one component")
        .clone();
    let added = witness.detach_view(&m_added.id).expect("meridian exists");
    let final_key = classify(&witness, &evidence)?;
    if &final_key != path.end_key() {
        return Err(ExplorerError::Verification(format!(
            "detour failed to restore the endpoint: got {final_key}, want {}",
            path.end_key()
        )));
    }
    edges.push(EdgeCertificate {
        from_key: cur_key,
        to_key: final_key,
        witness,
        added,
        alias: None,
    });

    Ok(PathCertificate {
        start_key: path.start_key.clone(),
        start_diagram: path.start_diagram.clone(),
        edges,
    })
}

// ---------------------------------------------------------------------------
// overtwisted rerouting

/// Reroute a path between two overtwisted-sphere vertices so that every
/// interior vertex carries an overtwistedness certificate, at the cost of
/// exactly two extra edges: first insert the d3=1 component of the stored
/// d3=0 sphere, then complete that sphere, then replay the path next to it.
/// The endpoint absorbs the summand (same key: d3 adds 0 and the homology is
/// untouched).
pub fn verify_ot_distance_bound(path: &PathCertificate) -> Result<PathCertificate, ExplorerError> {
    path.verify()?;
    if path.start_key.family != Family::OtS3 || path.end_key().family != Family::OtS3 {
        return Err(ExplorerError::Precondition(
            "both endpoints must be overtwisted-sphere vertices".into(),
        ));
    }
    let mut evidence = path.evidence_pool();

    let xi0 = moves::ot_sphere_block(0);
    let order = xi0.canonical_ids();
    let (partner_sid, xi1_sid) = (&order[0], &order[1]);
    let diagrams: Vec<&SurgeryDiagram> = std::iter::once(&path.start_diagram)
        .chain(path.edges.iter().map(|e| &e.witness))
        .collect();
    let mut taken = all_path_ids(&diagrams);
    let b_id = crate::moves::fresh_id(&taken, "ot0b");
    taken.insert(b_id.clone());
    let a_id = crate::moves::fresh_id(&taken, "ot0a");

    // first edge: the d3=1 component alone — itself a stored summand
    let xi1_data = xi0.component(xi1_sid).expect("stored block component");
    let added_b = AttachedComponent {
        component: SurgeryComponent { id: b_id.clone(), ..xi1_data.clone() },
        linking: Vec::new(),
    };
    let w1 = path.start_diagram.attach(&added_b).map_err(ExplorerError::Precondition)?;
    evidence.push(OtBlock { xi: 1, ids: vec![b_id.clone()] });
    let k1 = classify(&w1, &evidence)?;
    if k1.ot_certificate.is_none() {
        return Err(ExplorerError::Verification(
            "first rerouted vertex lost its overtwistedness certificate".into(),
        ));
    }

    // second edge: the partner completes the stored d3=0 sphere
    let partner = xi0.component(partner_sid).expect("stored block component");
    let lk = xi0.linking_number(partner_sid, xi1_sid);
    let added_a = AttachedComponent {
        component: SurgeryComponent { id: a_id.clone(), ..partner.clone() },
        linking: if lk != 0 {
            vec![LinkTo { to: b_id.clone(), lk }]
        } else {
            Vec::new()
        },
    };
    let w2 = w1.attach(&added_a).map_err(ExplorerError::Precondition)?;
    evidence.push(OtBlock { xi: 0, ids: vec![a_id.clone(), b_id.clone()] });
    let k2 = classify(&w2, &evidence)?;
    if k2.d3 != path.start_key.d3 || k2.homology != path.start_key.homology {
        return Err(ExplorerError::Verification(
            "completed d3=0 summand failed to restore the start invariants".into(),
        ));
    }

    let mut edges = vec![
        EdgeCertificate {
            from_key: path.start_key.clone(),
            to_key: k1.clone(),
            witness: w1.clone(),
            added: added_b,
            alias: None,
        },
        EdgeCertificate {
            from_key: k1,
            to_key: k2.clone(),
            witness: w2.clone(),
            added: added_a,
            alias: None,
        },
    ];

    // replay the original edges next to the inserted sphere
    let mut cur = w2;
    let mut cur_key = k2;
    for (n, e) in path.edges.iter().enumerate() {
        let witness = cur.attach(&e.added).map_err(ExplorerError::Precondition)?;
        let to_key = classify(&witness, &evidence)?;
        let is_last = n + 1 == path.edges.len();
        if to_key.ot_certificate.is_none() {
            return Err(ExplorerError::Verification(format!(
                "rerouted vertex {n} lost its overtwistedness certificate"
            )));
        }
        if is_last && &to_key != path.end_key() {
            return Err(ExplorerError::Verification(format!(
                "rerouted path failed to restore the endpoint: got {to_key}, want {}",
                path.end_key()
            )));
        }
        edges.push(EdgeCertificate {
            from_key: cur_key.clone(),
            to_key: to_key.clone(),
            witness: witness.clone(),
            added: e.added.clone(),
            alias: None,
        });
        cur = witness;
        cur_key = to_key;
    }

    Ok(PathCertificate {
        start_key: path.start_key.clone(),
        start_diagram: path.start_diagram.clone(),
        edges,
    })
}

// ---------------------------------------------------------------------------
// subgraph exploration

/// An unlinked single-unknot generator applied inside a Darboux ball.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Generator {
    pub tb: i64,
    pub rot: i64,
    pub sign: Sign,
}

impl std::fmt::Display for Generator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "U(tb={},rot={})({})", self.tb, self.rot, self.sign)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_vertices: usize,
    pub max_edges: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_vertices: 512, max_edges: 4096 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VertexEntry {
    pub key: VertexKey,
    pub diagram: SurgeryDiagram,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Subgraph {
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<SubgraphEdge>,
    pub truncated: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubgraphEdge {
    pub from: usize,
    pub to: usize,
    pub generator: Generator,
    pub certificate: EdgeCertificate,
}

/// Breadth-first expansion of the surgery graph over Darboux-ball generators,
/// deterministic in seeds, generators and limits. Every produced edge is
/// checked against d3 additivity: the target's d3 must exceed the source's by
/// the d3 of the generator's own one-component diagram whenever both are
/// defined.
pub fn build_subgraph(
    seeds: &[(SurgeryDiagram, Vec<OtBlock>)],
    generators: &[Generator],
    depth: usize,
    limits: Limits,
) -> Result<Subgraph, ExplorerError> {
    let mut vertices: Vec<VertexEntry> = Vec::new();
    let mut evidence_of: Vec<Vec<OtBlock>> = Vec::new();
    let mut index: BTreeMap<VertexKey, usize> = BTreeMap::new();
    let mut edges: Vec<SubgraphEdge> = Vec::new();
    let mut truncated = false;

    let gen_own_d3: BTreeMap<Generator, Option<BigRational>> = generators
        .iter()
        .map(|g| {
            let mut d = SurgeryDiagram::new();
            d.add_component(SurgeryComponent::new("g", g.tb, g.rot, g.sign));
            let own = match invariants::d3(&d) {
                Ok(v) => Some(v),
                Err(InvariantError::D3Undefined) => None,
                Err(_) => None,
            };
            (g.clone(), own)
        })
        .collect();

    let mut frontier: Vec<usize> = Vec::new();
    for (d, ev) in seeds {
        let key = classify(d, ev)?;
        if let std::collections::btree_map::Entry::Vacant(slot) = index.entry(key.clone()) {
            slot.insert(vertices.len());
            frontier.push(vertices.len());
            vertices.push(VertexEntry { key, diagram: d.clone() });
            evidence_of.push(ev.clone());
        }
    }

    let xi1 = &moves::ot_sphere_block(1).components[0];
    for _level in 0..depth {
        if frontier.is_empty() || truncated {
            break;
        }
        frontier.sort_by(|&a, &b| vertices[a].key.cmp(&vertices[b].key));
        let mut next = Vec::new();
        for &src in &frontier {
            for g in generators {
                if edges.len() >= limits.max_edges {
                    truncated = true;
                    break;
                }
                let probe = SurgeryComponent::new("g", g.tb, g.rot, g.sign);
                if !probe.parity_ok() {
                    continue;
                }
                let src_diagram = vertices[src].diagram.clone();
                let taken: BTreeSet<String> =
                    src_diagram.components.iter().map(|c| c.id.clone()).collect();
                let id = crate::moves::fresh_id(&taken, "g");
                let added = AttachedComponent {
                    component: SurgeryComponent::new(id.clone(), g.tb, g.rot, g.sign),
                    linking: Vec::new(),
                };
                let witness = src_diagram.attach(&added).map_err(ExplorerError::Precondition)?;
                let mut ev = evidence_of[src].clone();
                if g.tb == xi1.tb && g.rot.abs() == xi1.rot.abs() && g.sign == xi1.sign {
                    ev.push(OtBlock { xi: 1, ids: vec![id.clone()] });
                }
                let to_key = classify(&witness, &ev)?;
                if let (Some(from_d3), Some(own)) = (&vertices[src].key.d3, &gen_own_d3[g]) {
                    let want = from_d3 + own;
                    if to_key.d3 != Some(want.clone()) {
                        return Err(ExplorerError::Verification(format!(
                            "edge by {g} violates d3 additivity: {} + {} ≠ {}",
                            rational_str(from_d3),
                            rational_str(own),
                            to_key.d3_str()
                        )));
                    }
                }
                let dst = match index.get(&to_key) {
                    Some(&i) => i,
                    None => {
                        if vertices.len() >= limits.max_vertices {
                            truncated = true;
                            continue;
                        }
                        let i = vertices.len();
                        index.insert(to_key.clone(), i);
                        vertices.push(VertexEntry { key: to_key.clone(), diagram: witness.clone() });
                        evidence_of.push(ev.clone());
                        next.push(i);
                        i
                    }
                };
                edges.push(SubgraphEdge {
                    from: src,
                    to: dst,
                    generator: g.clone(),
                    certificate: EdgeCertificate {
                        from_key: vertices[src].key.clone(),
                        to_key: to_key.clone(),
                        witness,
                        added,
                        alias: None,
                    },
                });
            }
            if truncated {
                break;
            }
        }
        frontier = next;
    }
    Ok(Subgraph { vertices, edges, truncated })
}

/// Deterministic DOT rendering; parallel edges with identical labels are
/// deduplicated here (and only here).
pub fn to_dot(g: &Subgraph) -> String {
    let mut out = String::from("digraph surgery {\n");
    for (i, v) in g.vertices.iter().enumerate() {
        out.push_str(&format!(
            "  v{i} [label=\"{}:d3={}:H={}\"];\n",
            v.key.family,
            v.key.d3_str(),
            v.key.homology
        ));
    }
    let mut rendered: BTreeSet<(usize, usize, String)> = BTreeSet::new();
    for e in &g.edges {
        let label = format!("{}", e.generator);
        let (tail, head) = match e.generator.sign {
            Sign::Minus => (e.from, e.to),
            Sign::Plus => (e.to, e.from),
        };
        rendered.insert((tail, head, label));
    }
    for (tail, head, label) in rendered {
        out.push_str(&format!("  v{tail} -> v{head} [label=\"{label}\"];\n"));
    }
    if g.truncated {
        out.push_str("  truncated [shape=box, label=\"truncated: budget exceeded\"];\n");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64) -> BigRational {
        BigRational::from(BigInt::from(n))
    }

    #[test]
    fn classify_examples() {
        let key = classify(&SurgeryDiagram::new(), &[]).unwrap();
        assert_eq!(key.family, Family::TightS3);
        assert_eq!(key.d3, Some(rat(0)));

        let (fig, ev) = ot_sphere_state(1);
        let key = classify(&fig, &ev).unwrap();
        assert_eq!(key.family, Family::OtS3);
        assert_eq!(key.d3, Some(rat(1)));

        // without its construction witness the same diagram is only an
        // invariant class
        let bare = classify(&fig, &[]).unwrap();
        assert_eq!(bare.family, Family::RhsGeneric);

        let lens = moves::detour_insert(&SurgeryDiagram::new(), 5).unwrap().diagram;
        let key = classify(&lens, &[]).unwrap();
        assert_eq!(key.family, Family::RhsGeneric);
        assert_eq!(key.homology.torsion, vec![BigInt::from(5)]);
    }

    #[test]
    fn ladder_and_reverse() {
        let path = ot_ladder(0, 3).unwrap();
        assert_eq!(path.len(), 3);
        assert_eq!(path.end_key().d3, Some(rat(3)));
        path.verify().unwrap();

        let empty = ot_ladder(2, 2).unwrap();
        assert!(empty.is_empty());

        let spanning = ot_ladder(-2, 2).unwrap();
        assert_eq!(spanning.len(), 4);
        let d3s: Vec<String> = spanning.keys().iter().map(|k| k.d3_str()).collect();
        assert_eq!(d3s, vec!["-2", "-1", "0", "1", "2"]);
        spanning.verify().unwrap();

        let rev = reverse_ladder(&path).unwrap();
        assert_eq!(rev.len(), 3);
        assert_eq!(rev.start_key.d3, Some(rat(3)));
        assert_eq!(rev.end_key().d3, Some(rat(0)));
        assert!(rev.edges.iter().all(|e| e.sign() == Sign::Minus));
        rev.verify().unwrap();
    }

    #[test]
    fn link_theorem_plus_case() {
        let edge = AttachedComponent {
            component: SurgeryComponent::new("k", -2, 1, Sign::Plus),
            linking: Vec::new(),
        };
        let path = verify_link_theorem(&SurgeryDiagram::new(), &[], &edge).unwrap();
        assert_eq!(path.len(), 1);
        assert_eq!(path.end_key().family, Family::OtS3);
        assert_eq!(path.end_key().d3, Some(rat(1)));
        path.verify().unwrap();
    }

    #[test]
    fn link_theorem_minus_case() {
        let edge = AttachedComponent {
            component: SurgeryComponent::new("k", -1, 0, Sign::Minus),
            linking: Vec::new(),
        };
        let path = verify_link_theorem(&SurgeryDiagram::new(), &[], &edge).unwrap();
        assert_eq!(path.len(), 2);
        assert_eq!(path.end_key().d3, Some(rat(1)));
        assert_eq!(path.end_key().family, Family::OtS3);
        path.verify().unwrap();
    }

    #[test]
    fn link_theorem_disjoint_plus() {
        let (fig, ev) = ot_sphere_state(1);
        let edge = AttachedComponent {
            component: SurgeryComponent::new("k", -2, -1, Sign::Plus),
            linking: Vec::new(),
        };
        let path = verify_link_theorem(&fig, &ev, &edge).unwrap();
        assert_eq!(path.len(), 1);
        assert_eq!(path.end_key().d3, Some(rat(2)));
        path.verify().unwrap();
    }

    #[test]
    fn detour_roundtrip() {
        let path = ot_ladder(0, 2).unwrap();
        let forbidden: BTreeSet<VertexKey> =
            [ot_ladder(1, 1).unwrap().start_key].into_iter().collect();
        let rerouted = verify_detour(&path, &forbidden, 2).unwrap();
        assert_eq!(rerouted.len(), path.len() + 2);
        assert_eq!(rerouted.start_key, path.start_key);
        assert_eq!(rerouted.end_key(), path.end_key());
        for k in &rerouted.keys()[1..rerouted.len()] {
            assert!(!forbidden.contains(*k));
        }
        rerouted.verify().unwrap();

        // forbidden endpoint is a precondition error
        let bad: BTreeSet<VertexKey> = [path.start_key.clone()].into_iter().collect();
        assert!(matches!(
            verify_detour(&path, &bad, 2),
            Err(ExplorerError::Precondition(_))
        ));
    }

    #[test]
    fn ot_distance_bound() {
        let path = ot_ladder(1, 3).unwrap();
        let rerouted = verify_ot_distance_bound(&path).unwrap();
        assert_eq!(rerouted.len(), path.len() + 2);
        assert_eq!(rerouted.end_key(), path.end_key());
        let keys = rerouted.keys();
        for k in &keys[1..keys.len() - 1] {
            assert!(k.ot_certificate.is_some());
        }
        rerouted.verify().unwrap();

        // zero-length path at an overtwisted vertex gets a two-edge loop
        let point = ot_ladder(1, 1).unwrap();
        let looped = verify_ot_distance_bound(&point).unwrap();
        assert_eq!(looped.len(), 2);
        assert_eq!(&looped.start_key, looped.end_key());

        // tight endpoints are rejected
        let tight = PathCertificate {
            start_key: classify(&SurgeryDiagram::new(), &[]).unwrap(),
            start_diagram: SurgeryDiagram::new(),
            edges: vec![],
        };
        assert!(matches!(
            verify_ot_distance_bound(&tight),
            Err(ExplorerError::Precondition(_))
        ));
    }

    #[test]
    fn subgraph_ladder_collapse() {
        let seeds = vec![(SurgeryDiagram::new(), Vec::new())];
        let gens = vec![
            Generator { tb: -2, rot: 1, sign: Sign::Plus },
            Generator { tb: -2, rot: -1, sign: Sign::Plus },
        ];
        let g = build_subgraph(&seeds, &gens, 3, Limits::default()).unwrap();
        assert!(!g.truncated);
        // mixed-rot branches collapse: exactly the tight seed plus d3 = 1, 2, 3
        assert_eq!(g.vertices.len(), 4);
        let mut d3s: Vec<String> = g.vertices.iter().map(|v| v.key.d3_str()).collect();
        d3s.sort();
        assert_eq!(d3s, vec!["0", "1", "2", "3"]);
        assert!(g
            .vertices
            .iter()
            .all(|v| v.key.family == Family::OtS3 || v.key.family == Family::TightS3));

        let dot = to_dot(&g);
        assert!(dot.contains("TIGHT_S3"));
        let dot2 = to_dot(&build_subgraph(&seeds, &gens, 3, Limits::default()).unwrap());
        assert_eq!(dot, dot2);
    }

    #[test]
    fn subgraph_keeps_self_loops_and_multi_edges() {
        // this generator's own diagram has |det Q| = 1 and d3 = 0, so every
        // application loops on the same key
        let (fig, ev) = ot_sphere_state(1);
        let seeds = vec![(fig, ev)];
        let gens = vec![Generator { tb: 0, rot: 1, sign: Sign::Plus }];
        let g = build_subgraph(&seeds, &gens, 2, Limits::default()).unwrap();
        assert_eq!(g.vertices.len(), 1);
        assert_eq!(g.edges.len(), 1); // the loop target is never re-expanded
        assert_eq!(g.edges[0].from, g.edges[0].to);
    }

    #[test]
    fn subgraph_lens_vertex_and_depth_zero() {
        let seeds = vec![(SurgeryDiagram::new(), Vec::new())];
        let gens = vec![Generator { tb: 1 - 5, rot: 1, sign: Sign::Minus }];
        let g = build_subgraph(&seeds, &gens, 1, Limits::default()).unwrap();
        assert_eq!(g.vertices.len(), 2);
        assert_eq!(g.vertices[1].key.family, Family::RhsGeneric);
        assert_eq!(g.vertices[1].key.homology.torsion, vec![BigInt::from(5)]);

        let g0 = build_subgraph(&seeds, &gens, 0, Limits::default()).unwrap();
        assert_eq!(g0.vertices.len(), 1);
        assert!(g0.edges.is_empty());
    }
}
