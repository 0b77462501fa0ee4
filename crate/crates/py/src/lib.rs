//! Python bindings for the contact-surgery engine: the diagram type, the
//! invariants kernel, the verified moves, and the explorer entry points.
//! Structured results (certificates, keys, subgraphs) cross the boundary as
//! JSON strings in the same formats the CLI reads and writes.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use contact_surgery::diagram::{Sign, SurgeryComponent, SurgeryDiagram};
use contact_surgery::explorer::{self, Limits};
use contact_surgery::format::{
    canonical_diagram_json, content_hash, from_json, rational_str, to_json_pretty,
};
use contact_surgery::invariants::{self, InvariantError};
use contact_surgery::moves::{self, Direction, MoveSpec};
use contact_surgery::verification;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_sign(s: &str) -> PyResult<Sign> {
    match s {
        "+1" => Ok(Sign::Plus),
        "-1" => Ok(Sign::Minus),
        other => Err(PyValueError::new_err(format!(
            "sign must be \"+1\" or \"-1\", got {other:?}"
        ))),
    }
}

/// A contact (±1)-surgery diagram in the standard contact 3-sphere.
#[pyclass(name = "Diagram")]
#[derive(Clone)]
struct PyDiagram {
    inner: SurgeryDiagram,
}

#[pymethods]
impl PyDiagram {
    #[new]
    fn new() -> Self {
        PyDiagram { inner: SurgeryDiagram::new() }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyDiagram { inner: from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        to_json_pretty(&self.inner)
    }

    fn canonical_json(&self) -> String {
        canonical_diagram_json(&self.inner)
    }

    fn content_hash(&self) -> String {
        content_hash(&self.inner)
    }

    /// Append a component; sign is literally "+1" or "-1".
    fn add_component(&mut self, id: &str, tb: i64, rot: i64, sign: &str) -> PyResult<()> {
        if self.inner.has_component(id) {
            return Err(PyValueError::new_err(format!("component id {id:?} already present")));
        }
        self.inner.add_component(SurgeryComponent::new(id, tb, rot, parse_sign(sign)?));
        Ok(())
    }

    fn set_linking(&mut self, a: &str, b: &str, lk: i64) {
        self.inner.set_linking(a, b, lk);
    }

    fn linking_number(&self, a: &str, b: &str) -> i64 {
        self.inner.linking_number(a, b)
    }

    /// (id, tb, rot, sign) tuples in stored order.
    fn components(&self) -> Vec<(String, i64, i64, String)> {
        self.inner
            .components
            .iter()
            .map(|c| (c.id.clone(), c.tb, c.rot, c.sign.to_string()))
            .collect()
    }

    fn validate(&self) -> Vec<String> {
        self.inner.validate().iter().map(|v| v.to_string()).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Diagram({} components)", self.inner.len())
    }

    fn __eq__(&self, other: &PyDiagram) -> bool {
        self.inner == other.inner
    }
}

/// First homology of the surgered manifold: (torsion coefficients, free rank).
#[pyfunction]
fn homology(d: &PyDiagram) -> PyResult<(Vec<num_bigint::BigInt>, usize)> {
    let g = invariants::homology(&d.inner).map_err(err)?;
    Ok((g.torsion().to_vec(), g.free_rank()))
}

/// Normalized d3-invariant as an exact fraction string ("1", "-3/4", …).
/// Raises ValueError on diagrams with det Q = 0.
#[pyfunction]
fn d3(d: &PyDiagram) -> PyResult<String> {
    Ok(rational_str(&invariants::d3(&d.inner).map_err(err)?))
}

/// Is the d3-invariant defined (det Q ≠ 0)?
#[pyfunction]
fn d3_defined(d: &PyDiagram) -> PyResult<bool> {
    match invariants::d3(&d.inner) {
        Ok(_) => Ok(true),
        Err(InvariantError::D3Undefined) => Ok(false),
        Err(e) => Err(err(e)),
    }
}

/// Poincaré dual of the Euler class in meridian coordinates (canonical id
/// order).
#[pyfunction]
fn euler_class(d: &PyDiagram) -> PyResult<Vec<num_bigint::BigInt>> {
    Ok(invariants::euler_class(&d.inner).map_err(err)?.coordinates)
}

/// All characteristic sublinks as lists of component ids.
#[pyfunction]
fn characteristic_sublinks(d: &PyDiagram) -> PyResult<Vec<Vec<String>>> {
    Ok(invariants::characteristic_sublinks(&d.inner)
        .map_err(err)?
        .into_iter()
        .map(|s| s.ids)
        .collect())
}

/// Do two diagrams with the same link data induce the same spin-c structure?
#[pyfunction]
fn spinc_equal(d1: &PyDiagram, d2: &PyDiagram) -> PyResult<bool> {
    invariants::spinc_equal(&d1.inner, &d2.inner).map_err(err)
}

/// Γ-invariant difference against one extra surgery, in base meridian
/// coordinates. `extra_json` is an attached-component document; `sublink`
/// lists the ids of a characteristic sublink of the base.
#[pyfunction]
fn gamma_difference(
    d: &PyDiagram,
    extra_json: &str,
    sublink: Vec<String>,
) -> PyResult<Vec<num_bigint::BigInt>> {
    let extra = from_json(extra_json).map_err(err)?;
    let j = contact_surgery::invariants::CharacteristicSublink { ids: sublink };
    Ok(invariants::gamma_difference(&d.inner, &extra, &j).map_err(err)?.coordinates)
}

fn outcome(res: Result<moves::MoveOutcome, moves::MoveError>) -> PyResult<PyDiagram> {
    res.map(|o| PyDiagram { inner: o.diagram }).map_err(err)
}

#[pyfunction]
fn stabilize(d: &PyDiagram, id: &str, positive: bool) -> PyResult<PyDiagram> {
    let dir = if positive { Direction::Positive } else { Direction::Negative };
    outcome(moves::stabilize_component(&d.inner, id, dir))
}

#[pyfunction]
fn ambient_connect_sum(d: &PyDiagram, k: i8) -> PyResult<PyDiagram> {
    outcome(moves::ambient_connect_sum(&d.inner, k))
}

#[pyfunction]
fn cancel_pair(d: &PyDiagram, i: &str, j: &str) -> PyResult<PyDiagram> {
    outcome(moves::cancel_pair(&d.inner, i, j))
}

#[pyfunction]
fn handle_slide(d: &PyDiagram, i: &str, j: &str) -> PyResult<PyDiagram> {
    outcome(moves::handle_slide(&d.inner, i, j))
}

#[pyfunction]
fn add_meridian(d: &PyDiagram, i: &str, tb: i64, rot: i64, sign: &str) -> PyResult<PyDiagram> {
    outcome(moves::add_meridian(&d.inner, i, tb, rot, parse_sign(sign)?))
}

#[pyfunction]
fn meridian_conversion(d: &PyDiagram, i: &str, m: &str) -> PyResult<PyDiagram> {
    outcome(moves::meridian_conversion(&d.inner, i, m))
}

#[pyfunction]
fn meridian_merge(d: &PyDiagram, i: &str, m: &str) -> PyResult<PyDiagram> {
    outcome(moves::meridian_merge(&d.inner, i, m))
}

#[pyfunction]
fn detour_insert(d: &PyDiagram, p: i64) -> PyResult<PyDiagram> {
    outcome(moves::detour_insert(&d.inner, p))
}

#[pyfunction]
fn detour_close(d: &PyDiagram, id: &str) -> PyResult<PyDiagram> {
    outcome(moves::detour_close(&d.inner, id))
}

/// Replay a move script (JSON array of {kind, params} records); returns the
/// resulting diagram and the audit log as JSON.
#[pyfunction]
fn replay(d: &PyDiagram, script_json: &str) -> PyResult<(PyDiagram, String)> {
    let specs: Vec<MoveSpec> = from_json(script_json).map_err(err)?;
    let (end, records) = moves::replay(&d.inner, &specs).map_err(err)?;
    Ok((PyDiagram { inner: end }, to_json_pretty(&records)))
}

/// Vertex key of a diagram (no overtwistedness evidence), as a display string.
#[pyfunction]
fn classify(d: &PyDiagram) -> PyResult<String> {
    Ok(explorer::classify(&d.inner, &[]).map_err(err)?.to_string())
}

/// The verified ladder certificate between two overtwisted-sphere d3 values,
/// as JSON.
#[pyfunction]
fn ot_ladder(k_min: i64, k_max: i64) -> PyResult<String> {
    Ok(to_json_pretty(&explorer::ot_ladder(k_min, k_max).map_err(err)?))
}

/// DOT rendering of the breadth-first subgraph from the empty-diagram seed.
#[pyfunction]
#[pyo3(signature = (depth=3, tb_floor=2, rot_bound=1))]
fn subgraph_dot(depth: usize, tb_floor: i64, rot_bound: i64) -> PyResult<String> {
    let seeds = vec![(SurgeryDiagram::new(), Vec::new())];
    let gens = verification::default_generators(tb_floor, rot_bound);
    let g = explorer::build_subgraph(&seeds, &gens, depth, Limits::default()).map_err(err)?;
    Ok(explorer::to_dot(&g))
}

#[pymodule]
fn contact_surgery_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDiagram>()?;
    m.add_function(wrap_pyfunction!(homology, m)?)?;
    m.add_function(wrap_pyfunction!(d3, m)?)?;
    m.add_function(wrap_pyfunction!(d3_defined, m)?)?;
    m.add_function(wrap_pyfunction!(euler_class, m)?)?;
    m.add_function(wrap_pyfunction!(characteristic_sublinks, m)?)?;
    m.add_function(wrap_pyfunction!(spinc_equal, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_difference, m)?)?;
    m.add_function(wrap_pyfunction!(stabilize, m)?)?;
    m.add_function(wrap_pyfunction!(ambient_connect_sum, m)?)?;
    m.add_function(wrap_pyfunction!(cancel_pair, m)?)?;
    m.add_function(wrap_pyfunction!(handle_slide, m)?)?;
    m.add_function(wrap_pyfunction!(add_meridian, m)?)?;
    m.add_function(wrap_pyfunction!(meridian_conversion, m)?)?;
    m.add_function(wrap_pyfunction!(meridian_merge, m)?)?;
    m.add_function(wrap_pyfunction!(detour_insert, m)?)?;
    m.add_function(wrap_pyfunction!(detour_close, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(ot_ladder, m)?)?;
    m.add_function(wrap_pyfunction!(subgraph_dot, m)?)?;
    Ok(())
}
