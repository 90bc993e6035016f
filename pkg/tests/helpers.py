"""Shared test utilities: brute-force oracles and random problem factories."""

from itertools import combinations

import numpy as np
import scipy.spatial

from latsweep.lattice import LatticeDefinition
from latsweep.projection import PolyhedralSet


def projection_oracle(S, x, poly, feas_tol=1e-9):
    """Exhaustive active-set enumeration for small projection problems.

    Tries every subset of inequality rows as forced equalities, solves the
    equality-constrained problem through its KKT system, and keeps the
    feasible candidate with the smallest objective.  Independent of the
    active-set solver being tested.
    """
    n = poly.dim
    A, b = poly.A, poly.b
    S2 = np.diag(S) if np.ndim(S) == 1 else np.asarray(S)
    best_obj, best_y = None, None
    for r in range(A.shape[0] + 1):
        for J in combinations(range(A.shape[0]), r):
            blocks, rhs_parts = [], []
            if J:
                blocks.append(A[list(J)])
                rhs_parts.append(b[list(J)])
            if poly.A_eq is not None:
                blocks.append(poly.A_eq)
                rhs_parts.append(poly.b_eq)
            if blocks:
                C = np.vstack(blocks)
                d = np.concatenate(rhs_parts)
                kkt = np.block([[S2, C.T], [C, np.zeros((C.shape[0], C.shape[0]))]])
                rhs = np.concatenate([S2 @ x, d])
                sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
                y = sol[:n]
                if np.max(np.abs(C @ y - d), initial=0.0) > feas_tol:
                    continue
            else:
                y = np.asarray(x, dtype=float)
            if np.max(A @ y - b, initial=0.0) <= feas_tol:
                obj = float((y - x) @ S2 @ (y - x))
                if best_obj is None or obj < best_obj - 1e-15:
                    best_obj, best_y = obj, y
    return best_y


def random_spd(rng, n, diag_probability=0.5):
    """Random weight: sometimes diagonal, sometimes a full SPD matrix."""
    if rng.random() < diag_probability:
        return rng.uniform(0.3, 3.0, n)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (Q * rng.uniform(0.3, 3.0, n)) @ Q.T


def random_projection_problem(rng, with_equalities=True):
    """A feasible random polyhedron (n <= 4, l <= 6) and a probe point."""
    n = int(rng.integers(2, 5))
    l = int(rng.integers(1, 7))
    A = rng.standard_normal((l, n))
    interior = rng.standard_normal(n)
    b = A @ interior + rng.uniform(0.1, 1.0, l)
    A_eq = b_eq = None
    if with_equalities and rng.random() < 0.4:
        A_eq = rng.standard_normal((1, n))
        b_eq = A_eq @ interior
    poly = PolyhedralSet(A=A, b=b, A_eq=A_eq, b_eq=b_eq)
    x = rng.standard_normal(n) * rng.uniform(0.5, 3.0)
    S = random_spd(rng, n)
    return S, x, poly


def triangle_lattice(q_rows=0):
    """Single equilateral triangle, optionally with pinned coordinates."""
    Q = np.array([[1.0, 0.0, -1.0], [-1.0, 1.0, 0.0], [0.0, -1.0, 1.0]])
    R = np.zeros((q_rows, 6))
    if q_rows >= 1:
        R[0, 0] = 1.0
    if q_rows >= 2:
        R[1, 1] = 1.0
    if q_rows >= 3:
        R[2, 3] = 1.0
    return LatticeDefinition(
        incidence=Q,
        reference_coords=np.array([0.0, 0.0, 1.0, 0.0, 0.5, np.sqrt(3) / 2]),
        dimension=2,
        stiffness=np.ones(3),
        lower_limits=-np.ones(3) * 1e-3,
        upper_limits=np.ones(3) * 1e-3,
        constraint_matrix=R,
    )


def braced_square_frame():
    """Four corner nodes, four edges, both diagonals; no constraints."""
    edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)]
    Q = np.zeros((4, 6))
    for s, (a, b) in enumerate(edges):
        Q[a, s] = 1.0
        Q[b, s] = -1.0
    return LatticeDefinition(
        incidence=Q,
        reference_coords=np.array([0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0]),
        dimension=2,
        stiffness=np.ones(6),
        lower_limits=-np.ones(6),
        upper_limits=np.ones(6),
        constraint_matrix=np.zeros((0, 8)),
    )


def random_feasible_probe_anchor(rng, poly, member):
    """A random point of the set, found by shrinking a ray from a member."""
    direction = rng.standard_normal(poly.dim)
    if poly.A_eq is not None:
        Aeq = poly.A_eq
        direction -= Aeq.T @ np.linalg.lstsq(Aeq @ Aeq.T, Aeq @ direction, rcond=None)[0]
    scale = 2.0
    for _ in range(60):
        c = member + scale * direction
        if poly.contains(c, tol=1e-12):
            return c
        scale *= 0.5
    return member


def random_small_lattice(rng, max_tries=50):
    """A random Delaunay-triangulated lattice passing all assumptions.

    Nodes 0 and 1 are pinned completely, which generically yields
    kinematic determinacy with at least one self-stress state, and makes
    boundary motion produce nonzero stresses (it cannot be absorbed by a
    rigid motion).
    """
    from latsweep.assembly import validate_assumptions

    for _ in range(max_tries):
        n = int(rng.integers(5, 9))
        pts = rng.uniform(0.0, 1.0, (n, 2))
        try:
            tri = scipy.spatial.Delaunay(pts)
        except scipy.spatial.QhullError:
            continue
        edges = set()
        for simplex in tri.simplices:
            for i in range(3):
                a, b = int(simplex[i]), int(simplex[(i + 1) % 3])
                edges.add((min(a, b), max(a, b)))
        edges = sorted(edges)
        m = len(edges)
        if m - 2 * n + 4 <= 0:
            continue
        Q = np.zeros((n, m))
        for s, (a, b) in enumerate(edges):
            Q[a, s] = 1.0
            Q[b, s] = -1.0
        R = np.zeros((4, 2 * n))
        R[0, 0] = R[1, 1] = 1.0
        R[2, 2] = R[3, 3] = 1.0
        definition = LatticeDefinition(
            incidence=Q,
            reference_coords=pts.reshape(-1),
            dimension=2,
            stiffness=rng.uniform(0.5, 2.0, m),
            lower_limits=-rng.uniform(0.5, 2.0, m) * 1e-3,
            upper_limits=rng.uniform(0.5, 2.0, m) * 1e-3,
            constraint_matrix=R,
        )
        report = validate_assumptions(definition)
        if report.kinematically_determinate and report.constrained_self_stress_states > 0:
            return definition
    raise RuntimeError("could not build a valid random lattice")
