import numpy as np
import pytest

from latsweep.errors import InfeasibleSetError, InvalidInputError
from latsweep.projection import (
    PolyhedralSet,
    WarmStart,
    find_feasible_point,
    project,
    project_cone,
)

from helpers import projection_oracle, random_projection_problem, random_spd


def unit_box(n):
    return PolyhedralSet(A=np.vstack([np.eye(n), -np.eye(n)]), b=np.ones(2 * n))


def s_norm(S, v):
    Sv = S * v if np.ndim(S) == 1 else S @ v
    return np.sqrt(v @ Sv)


def test_interior_point_is_fixed():
    res = project(np.ones(2), np.array([0.2, -0.3]), unit_box(2))
    assert np.allclose(res.point, [0.2, -0.3], atol=1e-12)
    assert res.active_inequalities == ()


def test_identity_weight_clamps_to_box():
    res = project(np.ones(2), np.array([2.0, 0.5]), unit_box(2))
    assert np.allclose(res.point, [1.0, 0.5], atol=1e-10)
    assert res.active_inequalities == (0,)


def test_weighted_halfplane_hand_kkt():
    # diag(1, 4) weight onto {y1 + y2 <= 1}: multiplier 12/5 by hand
    S = np.array([1.0, 4.0])
    poly = PolyhedralSet(A=np.array([[1.0, 1.0]]), b=np.array([1.0]))
    res = project(S, np.array([2.0, 2.0]), poly)
    assert np.allclose(res.point, [-0.4, 1.4], atol=1e-9)


def test_weighted_halfplane_matches_grid_search():
    S = np.array([1.0, 4.0])
    x = np.array([2.0, 2.0])
    grid = np.linspace(-3, 3, 601)
    best, best_obj = None, np.inf
    for y1 in grid:
        y2 = np.minimum(1.0 - y1, grid)
        obj = S[0] * (y1 - x[0]) ** 2 + S[1] * (y2 - x[1]) ** 2
        i = int(np.argmin(obj))
        if obj[i] < best_obj:
            best_obj, best = obj[i], np.array([y1, y2[i]])
    poly = PolyhedralSet(A=np.array([[1.0, 1.0]]), b=np.array([1.0]))
    res = project(S, x, poly)
    assert np.linalg.norm(res.point - best) < 2e-2  # grid resolution


def test_infeasible_set_raises():
    poly = PolyhedralSet(
        A=np.array([[1.0, 0.0], [-1.0, 0.0]]), b=np.array([0.0, -1.0])
    )
    with pytest.raises(InfeasibleSetError):
        project(np.ones(2), np.zeros(2), poly)
    with pytest.raises(InfeasibleSetError):
        find_feasible_point(poly)


def test_equality_only_set():
    poly = PolyhedralSet(
        A=np.zeros((0, 2)),
        b=np.zeros(0),
        A_eq=np.array([[1.0, 1.0]]),
        b_eq=np.array([1.0]),
    )
    res = project(np.ones(2), np.array([3.0, 0.0]), poly)
    assert np.allclose(res.point, [2.0, -1.0], atol=1e-9)


def test_cone_membership_is_identity():
    cone = PolyhedralSet(A=np.array([[0.0, 1.0]]), b=np.array([0.0]))
    x = np.array([0.5, -2.0])
    res = project_cone(np.ones(2), x, cone)
    assert np.allclose(res.point, x, atol=1e-12)


def test_cone_halfspace():
    cone = PolyhedralSet(A=np.array([[0.0, 1.0]]), b=np.array([0.0]))
    res = project_cone(np.ones(2), np.array([1.0, 1.0]), cone)
    assert np.allclose(res.point, [1.0, 0.0], atol=1e-10)


def test_cone_nonnegative_orthant():
    cone = PolyhedralSet(A=-np.eye(2), b=np.zeros(2))
    res = project_cone(np.ones(2), np.array([-1.0, -1.0]), cone)
    assert np.allclose(res.point, [0.0, 0.0], atol=1e-10)
    # matches componentwise clamping for the identity weight
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.standard_normal(2) * 2
        res = project_cone(np.ones(2), x, cone)
        assert np.allclose(res.point, np.maximum(x, 0.0), atol=1e-10)


def test_cone_rejects_nonzero_rhs():
    bad = PolyhedralSet(A=np.eye(2), b=np.array([1.0, 0.0]))
    with pytest.raises(InvalidInputError):
        project_cone(np.ones(2), np.zeros(2), bad)


def test_oracle_equivalence_bulk():
    rng = np.random.default_rng(42)
    for _ in range(300):
        S, x, poly = random_projection_problem(rng)
        res = project(S, x, poly)
        oracle = projection_oracle(S, x, poly)
        assert oracle is not None
        assert np.linalg.norm(res.point - oracle) <= 1e-9 * (1 + np.linalg.norm(x))


def test_idempotence():
    rng = np.random.default_rng(5)
    for _ in range(100):
        S, x, poly = random_projection_problem(rng)
        y = project(S, x, poly).point
        y2 = project(S, y, poly).point
        assert np.linalg.norm(y2 - y) <= 1e-8


def random_feasible_probe(rng, poly, anchor):
    """A random point of the set: shrink a ray from a known member."""
    direction = rng.standard_normal(poly.dim)
    if poly.A_eq is not None:
        # stay on the affine part
        Aeq = poly.A_eq
        direction -= Aeq.T @ np.linalg.lstsq(Aeq @ Aeq.T, Aeq @ direction, rcond=None)[0]
    scale = 2.0
    for _ in range(60):
        c = anchor + scale * direction
        if poly.contains(c, tol=1e-12):
            return c
        scale *= 0.5
    return anchor


def test_variational_inequality():
    rng = np.random.default_rng(6)
    for _ in range(25):
        S, x, poly = random_projection_problem(rng)
        y = project(S, x, poly).point
        S2 = np.diag(S) if np.ndim(S) == 1 else S
        anchor = find_feasible_point(poly)
        for _ in range(100):
            c = random_feasible_probe(rng, poly, anchor)
            lhs = (x - y) @ S2 @ (c - y)
            assert lhs <= 1e-8 * (1 + np.linalg.norm(x)) * (1 + np.linalg.norm(c))


def test_nonexpansiveness():
    rng = np.random.default_rng(8)
    for _ in range(100):
        S, x1, poly = random_projection_problem(rng)
        x2 = x1 + rng.standard_normal(x1.shape)
        y1 = project(S, x1, poly).point
        y2 = project(S, x2, poly).point
        assert s_norm(S, y1 - y2) <= s_norm(S, x1 - x2) + 1e-9


def test_warm_start_consistency():
    # warm-started projections must agree with cold ones
    rng = np.random.default_rng(9)
    S = np.array([1.0, 2.0, 0.5])
    box = unit_box(3)
    warm = WarmStart()
    x = rng.standard_normal(3) * 2
    for _ in range(20):
        x = x + 0.3 * rng.standard_normal(3)
        hot = project(S, x, box, warm=warm).point
        cold = project(S, x, box).point
        assert np.allclose(hot, cold, atol=1e-10)


def test_degenerate_duplicate_rows():
    # duplicated active rows exercise the pseudoinverse equality solves
    A = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    poly = PolyhedralSet(A=A, b=np.array([1.0, 1.0, 1.0]))
    res = project(np.ones(2), np.array([3.0, 0.2]), poly)
    assert np.allclose(res.point, [1.0, 0.2], atol=1e-10)
    assert set(res.active_inequalities) == {0, 1}


def test_kkt_residual_reported_small():
    rng = np.random.default_rng(10)
    for _ in range(20):
        S, x, poly = random_projection_problem(rng)
        res = project(S, x, poly)
        assert res.kkt_residual <= 1e-7 * (1 + np.linalg.norm(x))
