//! A contact (±1)-surgery calculus engine: combinatorial surgery diagrams in
//! the standard contact 3-sphere, an exact invariants kernel (homology, Euler
//! class, normalized d3, characteristic sublinks, Γ-differences), a verified
//! rewrite-move system, and a finite explorer for certified subgraphs of the
//! contact surgery graph.

pub mod cli;
pub mod diagram;
pub mod explorer;
pub mod format;
pub mod group;
pub mod invariants;
pub mod linalg;
pub mod moves;
pub mod verification;

pub use diagram::{
    AttachedComponent, ExtendedLinkingMatrix, LinkEntry, LinkTo, Sign, SurgeryComponent,
    SurgeryDiagram, Violation,
};
pub use explorer::{
    classify, ot_ladder, verify_detour, verify_link_theorem, verify_ot_distance_bound,
    EdgeCertificate, ExplorerError, Family, PathCertificate, VertexKey,
};
pub use group::{AbelianGroup, EulerCanon, GroupSummary, HomologyClass};
pub use invariants::{
    characteristic_sublinks, d3, euler_class, gamma_difference, homology, mod2_nullity,
    spinc_equal, CharacteristicSublink, InvariantError,
};
pub use moves::{MoveError, MoveRecord, MoveSpec, OtBlock};
