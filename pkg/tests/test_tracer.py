import cmath
import math
from collections import Counter

import numpy as np
import pytest

from cubiccrit.curve import branch_points
from cubiccrit.sheets import find_a_star_from_trajectory, find_a_star_supercritical, trace_delta2
from cubiccrit.svg import render_graph
from cubiccrit.tracer import (TraceConfig, asymptotic_index, final_heading, local_structure,
                              orthogonal_extension, polyline_real_crossing, seed_directions,
                              seeds_at, special_points, trace)

from oracles import cuts, golden, graph, param

GOLDEN_TAUS = [0.04, 0.10, 0.15, 0.21, 0.24]
STEP = TraceConfig().step


def _special(tau, name, branch=True):
    bp = branch_points(param(tau))
    z = {"a1": bp.a1, "b1": bp.b1, "a2": bp.a2, "b2": bp.b2, "b*": bp.b_star}[name]
    return special_points(param(tau), {name: z}, {name: branch})[0]


def _gaps(angles):
    a = np.sort(np.mod(angles, 2 * np.pi))
    return np.diff(np.concatenate([a, [a[0] + 2 * np.pi]]))


def _hausdorff(a, b):
    d = np.abs(a[:, None] - b[None, :])
    return max(d.min(axis=1).max(), d.min(axis=0).max())


# -- local structure and seeds -----------------------------------------------------

def test_simple_zero_three_directions():
    loc = local_structure(param(0.1), _special(0.1, "a2"), "single")
    assert loc.order == 1
    ang = seed_directions(loc)
    assert len(ang) == 3
    assert _gaps(ang) == pytest.approx([2 * np.pi / 3] * 3, abs=1e-12)


def test_double_zero_four_directions():
    loc = local_structure(param(0.1), _special(0.1, "b*", branch=False), "single")
    assert (loc.order, loc.ram) == (2, 1)
    ang = seed_directions(loc)
    assert _gaps(ang) == pytest.approx([np.pi / 2] * 4, abs=1e-12)
    assert len(seeds_at(param(0.1), _special(0.1, "b*", branch=False), "single")) == 4


def test_double_zero_at_branch_point_four_prongs():
    # in the uniformizer the four prongs are at right angles; each z-direction
    # carries the two roots that meet there
    sp = _special(0.1, "b2")
    loc = local_structure(param(0.1), sp, "pair")
    assert (loc.order, loc.ram) == (2, 2)
    assert len(seed_directions(loc)) == 4
    assert len(seeds_at(param(0.1), sp, "pair")) == 4


def test_order_four_zero_at_merge():
    sp = _special(1 / 12, "b1")
    loc = local_structure(param(1 / 12), sp, "pair")
    assert loc.order == 4
    ang = seed_directions(loc)
    assert len(ang) == 6
    assert len(seeds_at(param(1 / 12), sp, "pair")) == 6


def test_seed_offsets():
    sp = _special(0.1, "a2")
    for z, xi, e in seeds_at(param(0.1), sp, "single", offset=1e-4):
        assert abs(z - sp.z) == pytest.approx(1e-4, rel=1e-12)
        assert abs(e) == pytest.approx(1.0)
        assert abs(xi - sp.xi_single) < 1e-2


# -- single trajectories -------------------------------------------------------------

@pytest.mark.parametrize("tau", [0.04, 0.10, 0.15])
def test_short_trajectory_a2_b2(tau):
    g = graph(tau)
    es = g.edges_between("a2^(2)", "b2^(2)")
    assert len(es) == 1
    z = es[0].trajectory.z
    bp = branch_points(param(tau))
    assert {complex(z[0]), complex(z[-1])} == {bp.a2, bp.b2}
    assert _hausdorff(np.conj(z), z) < 10 * STEP
    assert es[0].trajectory.drift < TraceConfig().conservation_tol


@pytest.mark.parametrize("tau", [0.2, 0.227])
def test_trajectory_from_b2_reaches_a_star(tau):
    arc = trace_delta2(param(tau))
    x = find_a_star_from_trajectory(param(tau), arc)
    bp = branch_points(param(tau))
    assert bp.a1 < x < bp.b1
    assert x == pytest.approx(find_a_star_supercritical(param(tau)), abs=1e-4)


def test_trace_terminates_on_axis_when_asked():
    sp = _special(0.2, "b2")
    cfg = TraceConfig(stop_on_real_axis=True)
    kinds = set()
    for z, xi, e in seeds_at(param(0.2), sp, "single"):
        tr = trace(param(0.2), z, xi, e, cfg, specials=[sp], start_point="b2")
        kinds.add(tr.termination.kind)
        if tr.termination.kind == "real_axis":
            assert tr.termination.x == pytest.approx(polyline_real_crossing(tr.z), abs=1e-9)
    assert "real_axis" in kinds


def test_trace_respects_radius_bound():
    sp = _special(0.1, "a2")
    cfg = TraceConfig(r_max=3.0)
    ends = []
    for z, xi, e in seeds_at(param(0.1), sp, "single"):
        tr = trace(param(0.1), z, xi, e, cfg, specials=[sp], start_point="a2")
        ends.append(tr.termination.kind)
        if tr.termination.kind == "radius":
            assert abs(tr.z[-1]) >= 3.0
            steps = np.abs(np.diff(tr.z))
            assert steps.max() <= 1.5 * cfg.step * max(1.0, np.abs(tr.z).max())
    assert "radius" in ends


def test_step_limit():
    sp = _special(0.1, "a2")
    z, xi, e = seeds_at(param(0.1), sp, "single")[0]
    tr = trace(param(0.1), z, xi, e, TraceConfig(max_steps=10), specials=[sp], start_point="a2")
    assert tr.termination.kind == "step_limit"


@pytest.mark.parametrize("tau", GOLDEN_TAUS)
def test_conservation_along_all_traces(tau):
    tol = TraceConfig().conservation_tol
    for _, _, tr, _ in graph(tau).traces:
        assert tr.drift < tol


# -- critical graph ------------------------------------------------------------------

@pytest.mark.parametrize("tau", GOLDEN_TAUS)
def test_golden_vertices(tau):
    g = graph(tau)
    gold = golden(tau)
    assert {k: v.order for k, v in g.vertices.items()} == gold["vertices"]


@pytest.mark.parametrize("tau", GOLDEN_TAUS)
def test_golden_required_and_forbidden_edges(tau):
    labels = Counter(graph(tau).labels())
    gold = golden(tau)
    for e, n in Counter(gold["required_edges"]).items():
        assert labels[e] >= n, e
    for e in gold["forbidden_edges"]:
        assert labels[e] == 0, e


@pytest.mark.parametrize("tau", GOLDEN_TAUS)
def test_golden_edge_multiset(tau):
    assert graph(tau).labels() == golden(tau)["edges"]


@pytest.mark.parametrize("tau", GOLDEN_TAUS)
def test_degree_law(tau):
    g = graph(tau)
    assert g.failures == []
    assert g.prong_defects() == {}


@pytest.mark.parametrize("tau", GOLDEN_TAUS)
def test_conjugation_symmetry(tau):
    assert graph(tau).conjugation_defect() < 10 * STEP


def test_loops_encircle_delta2_at_004():
    g = graph(0.04)
    d2 = cuts(0.04).delta2
    for vid in ("a1^(1,2)", "b1^(1,2)"):
        loops = [e for e in g.edges_between(vid, vid)]
        assert loops
        z = loops[0].trajectory.z
        # winding number of the closed loop around the point where D2 meets the axis
        w = np.unwrap(np.angle(np.concatenate([z, z[:1]]) - cuts(0.04).a_star))
        assert abs(w[-1] - w[0]) == pytest.approx(2 * np.pi, abs=1e-6)
        assert np.abs(z).max() > np.abs(d2).max() * 0.9


def test_asymptotic_directions_at_02():
    g = graph(0.2)
    unbounded = [e for e in g.edges if e.end.startswith("inf")]
    assert unbounded
    for e in unbounded:
        assert e.end in ("inf^(2)", "inf^(3)")
        j = e.direction_index
        th = (2 * j - 1) * np.pi / 6
        assert abs(cmath.exp(1j * final_heading(e.trajectory)) - cmath.exp(1j * th)) < 0.05
        assert asymptotic_index(th) == j


def test_edge_from_a1_passes_through_a_star_at_024():
    g = graph(0.24)
    a_star = cuts(0.24).a_star
    for other in ("a2^(2)", "b2^(2)"):
        es = g.edges_between("a1^(1)", other)
        assert len(es) == 1
        assert np.min(np.abs(es[0].trajectory.z - a_star)) < 2 * STEP


# -- orthogonal extension --------------------------------------------------------------

@pytest.fixture(scope="module")
def gamma():
    return orthogonal_extension(param(0.2), cuts(0.2))


def test_orthogonal_extension_heading(gamma):
    g1, g2, ok = gamma
    assert ok
    assert abs(g1.z[-1]) >= TraceConfig().r_max
    assert final_heading(g1) == pytest.approx(2 * math.pi / 3, abs=0.01)
    assert final_heading(g2) == pytest.approx(-2 * math.pi / 3, abs=0.01)


def test_orthogonal_extension_conjugate(gamma):
    g1, g2, _ = gamma
    assert _hausdorff(np.conj(g1.z[::7]), g2.z[::7]) < 10 * STEP


def test_orthogonal_extension_conservation(gamma):
    g1, g2, _ = gamma
    assert g1.kind == "orthogonal"
    assert max(g1.drift, g2.drift) < TraceConfig().conservation_tol


# -- output ---------------------------------------------------------------------------

def test_svg_rendering():
    g = graph(0.1)
    text = render_graph(g, cuts(0.1))
    lines = text.splitlines()
    assert lines[0].startswith("<svg")
    assert "cubiccrit" in lines[1] and "schema 1" in lines[1]
    assert text.count('class="simple-zero"') == 4
    assert text.count('class="double-zero"') >= 5
    assert text.rstrip().endswith("</svg>")
