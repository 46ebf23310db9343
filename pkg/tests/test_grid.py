import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlmaxwell.errors import ParameterError, StructuralError
from nlmaxwell.grid import (
    FieldState,
    StaggeredGrid,
    curl_E,
    curl_H,
    div_H,
    inner_product,
    lq_norm,
    weighted_lq,
    write_field_csv,
)

from oracles import curl_e_2d, curl_h_2d, curl_h_3d, node_weights_2d


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_pec_e(grid, rng):
    return grid.apply_pec(rng.standard_normal(grid.size("E")))


# -- construction and layout ----------------------------------------------------

def test_rejects_too_few_cells_and_bad_extents():
    with pytest.raises(StructuralError):
        StaggeredGrid((1, 4), ((0, 1), (0, 1)))
    with pytest.raises(StructuralError):
        StaggeredGrid((4, 4), ((0, 1), (1, 1)))
    with pytest.raises(StructuralError):
        StaggeredGrid((4,), ((0, 1),))


def test_2d_layout_sizes():
    g = StaggeredGrid((3, 5), ((0, 3), (0, 1)))
    assert g.shapes("E") == [(4, 6)]
    assert g.shapes("H") == [(4, 5), (3, 6)]
    assert g.size("C") == 15
    assert g.spacing == (1.0, 0.2)


def test_3d_yee_layout():
    g = StaggeredGrid.square(2, dim=3)
    assert g.shapes("E") == [(2, 3, 3), (3, 2, 3), (3, 3, 2)]
    assert g.shapes("H") == [(3, 2, 2), (2, 3, 2), (2, 2, 3)]


def test_quadrature_weights_integrate_constants():
    for g in (StaggeredGrid((5, 7), ((0, 2), (-1, 1))), StaggeredGrid.square(3, 2.0, dim=3)):
        for loc in ("E", "H", "C"):
            ncomp = len(g.components(loc))
            assert g.weights(loc).sum() == pytest.approx(ncomp * g.volume, rel=1e-14)


def test_pec_mask_2d_is_the_boundary_ring():
    g = StaggeredGrid.square(4)
    (m,) = g.split(g.pec_mask.astype(float), "E")
    expected = np.ones((5, 5))
    expected[1:-1, 1:-1] = 0
    assert np.array_equal(m, expected)


# -- curl_E -------------------------------------------------------------------------

def test_curl_e_of_constant_is_zero():
    for g in (StaggeredGrid.square(4), StaggeredGrid.square(3, dim=3)):
        assert np.all(curl_E(g, np.full(g.size("E"), 3.7)) == 0)


def test_curl_e_affine_field_unit_spacing():
    g = StaggeredGrid((4, 4), ((0, 4), (0, 4)))
    E = g.sample("E", lambda c, x, y: x)
    hx, hy = g.split(curl_E(g, E), "H")
    assert np.allclose(hx, 0, atol=1e-15)
    assert np.allclose(hy, -1, atol=1e-15)


def test_curl_e_matches_loop_oracle_2d(rng):
    g = StaggeredGrid((4, 4), ((0, 1), (0, 1.5)))
    E = rng.standard_normal(g.size("E"))
    (ez,) = g.split(E, "E")
    ox, oy = curl_e_2d(ez, *g.spacing)
    hx, hy = g.split(curl_E(g, E), "H")
    assert np.max(np.abs(hx - ox)) <= 1e-14 * max(1, np.abs(ox).max())
    assert np.max(np.abs(hy - oy)) <= 1e-14 * max(1, np.abs(oy).max())


# -- curl_H -------------------------------------------------------------------------

def test_curl_h_of_constant_is_zero():
    for g in (StaggeredGrid.square(4), StaggeredGrid.square(3, dim=3)):
        assert np.all(curl_H(g, np.full(g.size("H"), -2.0)) == 0)


def test_curl_h_rotation_field_gives_one():
    g = StaggeredGrid((4, 4), ((0, 4), (0, 4)))
    H = g.sample("H", lambda c, x, y: -0.5 * y if c == 0 else 0.5 * x)
    assert np.allclose(curl_H(g, H), 1.0, atol=1e-14)


def test_curl_h_matches_loop_oracle_2d(rng):
    g = StaggeredGrid((5, 3), ((0, 1), (0, 2)))
    H = rng.standard_normal(g.size("H"))
    hx, hy = g.split(H, "H")
    (ez,) = g.split(curl_H(g, H), "E")
    assert np.allclose(ez, curl_h_2d(hx, hy, *g.spacing), rtol=0, atol=1e-13)


def test_curl_h_matches_loop_oracle_3d(rng):
    g = StaggeredGrid((3, 3, 3), ((0, 1), (0, 1.5), (0, 0.75)))
    H = rng.standard_normal(g.size("H"))
    oracle = curl_h_3d(*g.split(H, "H"), g.cells, g.spacing)
    got = g.split(curl_H(g, H), "E")
    for a, b in zip(got, oracle):
        assert np.max(np.abs(a - b)) <= 1e-14 * max(1.0, np.abs(b).max())


# -- div_H, adjointness, linearity -------------------------------------------------

def test_div_of_constant_and_affine_solenoidal_fields():
    g = StaggeredGrid.square(4, dim=3)
    assert np.all(div_H(g, np.ones(g.size("H"))) == 0)
    H = g.sample("H", lambda c, x, y, z: [x, -y, 0 * z][c])
    assert np.max(np.abs(div_H(g, H))) <= 1e-14


@pytest.mark.parametrize("dim,n", [(2, 9), (3, 4)])
def test_div_curl_vanishes(rng, dim, n):
    g = StaggeredGrid.square(n, 1.3, dim=dim)
    for _ in range(50):
        E = rng.standard_normal(g.size("E"))
        assert np.max(np.abs(div_H(g, curl_E(g, E)))) <= 1e-13 * n


@pytest.mark.parametrize("dim,n", [(2, 10), (3, 5)])
def test_adjointness_with_pec(rng, dim, n):
    g = StaggeredGrid.square(n, 2.0, dim=dim)
    for _ in range(20):
        E = random_pec_e(g, rng)
        H = rng.standard_normal(g.size("H"))
        lhs = inner_product(g, curl_H(g, H), E)
        rhs = inner_product(g, curl_E(g, E), H)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_adjointness_needs_pec(rng):
    g = StaggeredGrid.square(6)
    E = rng.standard_normal(g.size("E"))  # boundary values left in on purpose
    H = rng.standard_normal(g.size("H"))
    assert abs(inner_product(g, curl_H(g, H), E) - inner_product(g, curl_E(g, E), H)) > 1e-6


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**31))
def test_curls_are_linear(alpha, beta, seed):
    r = np.random.default_rng(seed)
    g = StaggeredGrid.square(3, dim=3)
    A, B = r.standard_normal((2, g.size("E")))
    lhs = curl_E(g, alpha * A + beta * B)
    assert np.allclose(lhs, alpha * curl_E(g, A) + beta * curl_E(g, B), atol=1e-12)
    P, Q = r.standard_normal((2, g.size("H")))
    lhs = curl_H(g, alpha * P + beta * Q)
    assert np.allclose(lhs, alpha * curl_H(g, P) + beta * curl_H(g, Q), atol=1e-12)


def test_curl_second_order_consistency():
    """Truncation error of curl_H(curl_E) against -Laplacian of a smooth mode."""
    errs = []
    for n in (16, 32, 64):
        g = StaggeredGrid.square(n, 1.0)
        E = g.sample("E", lambda c, x, y: np.sin(np.pi * x) * np.sin(2 * np.pi * y))
        exact_H = g.sample(
            "H",
            lambda c, x, y: 2 * np.pi * np.sin(np.pi * x) * np.cos(2 * np.pi * y) if c == 0
            else -np.pi * np.cos(np.pi * x) * np.sin(2 * np.pi * y),
        )
        errs.append(np.max(np.abs(curl_E(g, E) - exact_H)))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 1.9


def test_pure_operators_do_not_mutate(rng):
    g = StaggeredGrid.square(4)
    E = rng.standard_normal(g.size("E"))
    keep = E.copy()
    curl_E(g, E)
    assert np.array_equal(E, keep)


def test_operators_reject_wrong_length():
    g = StaggeredGrid.square(4)
    with pytest.raises(StructuralError):
        curl_E(g, np.zeros(g.size("H")))
    with pytest.raises(StructuralError):
        curl_H(g, np.zeros(3))
    with pytest.raises(StructuralError):
        inner_product(g, np.zeros(g.size("E")), np.zeros(g.size("H")))


# -- inner product and norms -------------------------------------------------------

def test_inner_product_all_ones_3d_unit_cube():
    g = StaggeredGrid.square(5, 1.0, dim=3)
    A = np.ones(g.size("E"))
    assert inner_product(g, A, A) == pytest.approx(3.0, abs=1e-12)


def test_inner_product_symmetric(rng):
    g = StaggeredGrid.square(6)
    A, B = rng.standard_normal((2, g.size("H")))
    assert inner_product(g, A, B) == inner_product(g, B, A)


def test_inner_product_matches_hand_weights(rng):
    g = StaggeredGrid((3, 4), ((0, 1), (0, 2)))
    A, B = rng.standard_normal((2, g.size("E")))
    w = node_weights_2d(3, 4, *g.spacing).ravel()
    assert inner_product(g, A, B) == pytest.approx(float(np.sum(w * A * B)), rel=1e-14)


def test_lq_norm_of_ones_is_one_for_any_q():
    g = StaggeredGrid.square(4, 1.0)
    for q in (1, 1.5, 2, 4, math.inf):
        assert lq_norm(g, np.ones(g.size("C")), q) == pytest.approx(1.0, rel=1e-14)


def test_lq_norm_q2_matches_inner_product(rng):
    g = StaggeredGrid.square(6)
    A = rng.standard_normal(g.size("H"))
    assert lq_norm(g, A, 2) == pytest.approx(math.sqrt(inner_product(g, A, A)), rel=1e-14)


def test_two_cell_q4_hand_value():
    # two cells with volume 1/2 each holding 1 and 2
    got = weighted_lq(np.array([1.0, 2.0]), np.array([0.5, 0.5]), 4)
    assert got == pytest.approx(((1 + 16) / 2) ** 0.25, rel=1e-15)


def test_lq_norm_rejects_q_below_one():
    g = StaggeredGrid.square(3)
    with pytest.raises(ParameterError):
        lq_norm(g, np.ones(g.size("E")), 0.5)


# -- state and serialization --------------------------------------------------------

def test_field_state_checks_lengths_and_finiteness():
    g = StaggeredGrid.square(3)
    with pytest.raises(StructuralError):
        FieldState(g, np.zeros(3), g.zeros("H"))
    E = g.zeros("E")
    E[2] = np.nan
    with pytest.raises(StructuralError):
        FieldState(g, E, g.zeros("H"))


def test_e_magnitude_3d_uses_averaged_transverse_components():
    g = StaggeredGrid.square(3, dim=3)
    E = g.sample("E", lambda c, x, y, z: [3.0, 4.0, 0.0][c] + 0 * x)
    mag = g.e_magnitude(E)
    assert np.allclose(mag, 5.0)


def test_write_field_csv(tmp_path):
    g = StaggeredGrid.square(2)
    E = np.arange(g.size("E"), dtype=float)
    path = tmp_path / "f.csv"
    write_field_csv(g, path, {"E": E})
    lines = path.read_text().splitlines()
    assert lines[0] == "field,component,i,j,value"
    assert len(lines) == 1 + g.size("E")
    assert lines[4].startswith("E,z,1,0,")
