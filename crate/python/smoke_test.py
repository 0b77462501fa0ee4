#!/usr/bin/env python3
"""Smoke test for the contact_surgery_py extension module.

Build the module and place contact_surgery_py.so next to this file (or on
PYTHONPATH) first; python/run_smoke.sh does both.
"""

import json
import os
import sys
from fractions import Fraction

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import contact_surgery_py as cs


def check(label, got, want):
    assert got == want, f"{label}: got {got!r}, want {want!r}"
    print(f"ok  {label}: {got!r}")


# --- anchors ---------------------------------------------------------------
empty = cs.Diagram()
check("d3(empty)", Fraction(cs.d3(empty)), Fraction(0))
check("classify(empty)", cs.classify(empty), "TIGHT_S3:d3=0:H=0")

fig = cs.Diagram()
fig.add_component("u", -2, 1, "+1")
check("validate(fig)", fig.validate(), [])
check("d3(fig)", Fraction(cs.d3(fig)), Fraction(1))
check("homology(fig)", cs.homology(fig), ([], 0))
check("euler(fig)", cs.euler_class(fig), [1])
check("sublinks(fig)", cs.characteristic_sublinks(fig), [["u"]])

# --- additivity and the json round trip ------------------------------------
two = cs.Diagram.from_json(fig.to_json())
check("round trip", two == fig, True)
double = cs.ambient_connect_sum(fig, 1)
check("d3(fig # xi_1)", Fraction(cs.d3(double)), Fraction(2))

# --- lens space detour ------------------------------------------------------
lens = cs.detour_insert(empty, 5)
check("homology(L(5,1))", cs.homology(lens), ([5], 0))
check("d3(L(5,1))", Fraction(cs.d3(lens)), Fraction(1, 5))
up = lens.components()[0][0]
closed = cs.detour_close(lens, up)
check("homology after close", cs.homology(closed), ([], 0))
check("d3 after close", Fraction(cs.d3(closed)), Fraction(0))

# --- verified moves ----------------------------------------------------------
l = cs.Diagram()
l.add_component("l", -1, 0, "-1")
with_m = cs.add_meridian(l, "l", -2, 1, "+1")
converted = cs.meridian_conversion(with_m, "l", [c[0] for c in with_m.components() if c[0] != "l"][0])
check("conversion result", converted.components(), [("l", -2, 1, "+1")])

pair = cs.Diagram()
pair.add_component("i", -1, 0, "+1")
pair.add_component("j", -1, 0, "-1")
pair.set_linking("i", "j", -1)
check("cancel pair", len(cs.cancel_pair(pair, "i", "j")), 0)

try:
    cs.cancel_pair(fig, "u", "u")
    raise AssertionError("cancel_pair accepted a non-pair")
except ValueError as e:
    print(f"ok  cancel_pair guard: {e}")

# --- spin-c comparison -------------------------------------------------------
a = cs.Diagram()
a.add_component("u", -4, 1, "-1")
b = cs.Diagram()
b.add_component("u", -4, -1, "-1")
check("spinc_equal differs", cs.spinc_equal(a, b), False)
check("spinc_equal same", cs.spinc_equal(a, a), True)

extra = json.dumps({"component": {"id": "x", "tb": -2, "rot": 1, "sign": "+1"}, "linking": []})
j = cs.characteristic_sublinks(a)[0]
check("gamma difference", cs.gamma_difference(a, extra, j), [0])

# --- explorer ----------------------------------------------------------------
ladder = json.loads(cs.ot_ladder(0, 3))
check("ladder length", len(ladder["edges"]), 3)
check("ladder endpoint d3", ladder["edges"][-1]["to_key"]["d3"], "3")

dot = cs.subgraph_dot(depth=2, tb_floor=2, rot_bound=1)
check("subgraph has tight seed", "TIGHT_S3:d3=0:H=0" in dot, True)
check("subgraph reaches d3=2", "OT_S3:d3=2:H=0" in dot, True)

# --- strict sign format ------------------------------------------------------
try:
    bad = cs.Diagram()
    bad.add_component("u", -1, 0, "1/2")
    raise AssertionError("rational coefficient accepted")
except ValueError as e:
    print(f"ok  sign guard: {e}")

print("\nsmoke test passed")
