"""Construction of the sweeping process: moving set, change of variables,
safe-load check, and stress recovery, in full and reduced coordinates.

The sweeping variable lives either in the spring space (dimension m, with
the self-stress plane as an equality constraint) or in coordinates of the
self-stress plane itself (dimension dim_v, inequalities only).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .assembly import AssembledSystem
from .errors import InitialConditionError, InfeasibleSetError, InvalidInputError
from .lattice import LoadSchedule
from .projection import PolyhedralSet, find_feasible_point

#: Membership tolerance for initial conditions; small violations of the
#: yield box (file rounding) are clamped, larger ones rejected.
INITIAL_TOL = 1e-9


class Space(enum.Enum):
    FULL = "full"
    REDUCED = "reduced"


def strain_elongations(system: AssembledSystem, axis: int) -> np.ndarray:
    """Spring elongations per unit box strain along ``axis``.

    First-order elongation of spring ``i`` under an affine stretch of the
    box: reference length times the squared direction cosine on the loaded
    axis.
    """
    if not 0 <= axis < system.dims.dimension:
        raise InvalidInputError(f"strain axis {axis} out of range")
    return system.reference_lengths * system.directions[:, axis] ** 2


@dataclass(frozen=True)
class MovingSetSpec:
    """Time-independent description of the moving constraint set.

    The set at time ``t`` is the yield box (after Hooke scaling) shifted by
    ``offset(loads, t)``, intersected with the self-stress plane; in
    reduced coordinates the plane is implicit and the box rows act through
    ``W``.
    """

    system: AssembledSystem
    space: Space
    box_lower: np.ndarray          # K^-1 c^-
    box_upper: np.ndarray          # K^-1 c^+
    equality_rows: np.ndarray | None   # U^T K (full space only)
    W: np.ndarray | None               # bound rows (reduced space only)
    strain_direction: np.ndarray | None  # box translation per unit strain

    @property
    def n_vars(self) -> int:
        return self.system.dims.n_springs if self.space is Space.FULL else self.system.dims.dim_v

    def weight(self) -> np.ndarray:
        """Weight of the inner product the process is projected in."""
        return self.system.stiffness if self.space is Space.FULL else self.system.S_V

    def offset(self, loads: LoadSchedule, t: float) -> np.ndarray:
        """Translation of the yield box at time ``t`` (a vector in R^m)."""
        sys = self.system
        out = sys.G @ loads.r(t)
        if loads.strain_times is not None:
            if self.strain_direction is None:
                raise InvalidInputError(
                    "moving set was built without a strain direction but the "
                    "schedule carries a strain load; rebuild with these loads"
                )
            out = out + self.strain_direction * loads.gamma(t)
        f = loads.f(t)
        if f is not None:
            out = out - sys.F @ f
        return out

    def offset_rate(self, loads: LoadSchedule, t: float) -> np.ndarray:
        """Right derivative of the box translation (constant-force loads)."""
        sys = self.system
        out = sys.G @ loads.rdot(t)
        if loads.strain_times is not None and self.strain_direction is not None:
            out = out + self.strain_direction * loads.gamma_rate(t)
        return out

    def reduce(self, v: np.ndarray) -> np.ndarray:
        """Coordinates of a full-space vector on the self-stress plane."""
        return self.system.P_V @ v

    def lift(self, y: np.ndarray) -> np.ndarray:
        """Full-space vector of reduced coordinates ``y``."""
        return self.system.V_basis @ y


def build_moving_set(
    system: AssembledSystem, space: Space, loads: LoadSchedule | None = None
) -> MovingSetSpec:
    strain_direction = None
    if loads is not None and loads.strain_times is not None:
        # Box strain adds elongations u*gamma to the geometric constraint, so
        # it translates the moving set opposite to the way r(t) enters: by
        # -VP_V u per unit strain (stretching must load the springs in
        # tension during the elastic phase).
        elong = strain_elongations(system, loads.strain_axis)
        strain_direction = -(system.V_basis @ (system.P_V @ elong))
    k = system.stiffness
    if space is Space.FULL:
        equality = system.equality_rows()
        W = None
    else:
        equality = None
        W = system.W
    return MovingSetSpec(
        system=system,
        space=space,
        box_lower=system.lower_limits / k,
        box_upper=system.upper_limits / k,
        equality_rows=equality,
        W=W,
        strain_direction=strain_direction,
    )


def moving_set_at(spec: MovingSetSpec, t: float, loads: LoadSchedule) -> PolyhedralSet:
    """The constraint polyhedron at time ``t``."""
    offset = spec.offset(loads, t)
    return static_set(spec, offset)


def static_set(spec: MovingSetSpec, offset: np.ndarray) -> PolyhedralSet:
    """The constraint polyhedron for a frozen box translation."""
    upper = spec.box_upper + offset
    lower = spec.box_lower + offset
    b = np.concatenate([upper, -lower])
    if spec.space is Space.FULL:
        m = spec.system.dims.n_springs
        A = np.vstack([np.eye(m), -np.eye(m)])
        return PolyhedralSet(
            A=A,
            b=b,
            A_eq=spec.equality_rows,
            b_eq=np.zeros(spec.equality_rows.shape[0]),
        )
    A = np.vstack([spec.W, -spec.W])
    return PolyhedralSet(A=A, b=b)


@dataclass(frozen=True)
class SweepingState:
    """One sample of the evolution: sweeping variable plus recovered stresses."""

    time: float
    y: np.ndarray        # sweeping variable, full or reduced coordinates
    sigma: np.ndarray    # spring stresses
    epsilon: np.ndarray  # elastic elongations


def initial_state(
    system: AssembledSystem,
    sigma0: np.ndarray,
    loads: LoadSchedule,
    space: Space,
    spec: MovingSetSpec | None = None,
    tol: float = INITIAL_TOL,
) -> SweepingState:
    """State at t=0 from an admissible, self-equilibrated initial stress."""
    sigma0 = np.asarray(sigma0, dtype=float)
    sys = system
    m = sys.dims.n_springs
    if sigma0.shape != (m,):
        raise InitialConditionError(
            f"initial stress has shape {sigma0.shape}, expected ({m},)"
        )
    lo, hi = sys.lower_limits, sys.upper_limits
    over = np.maximum(sigma0 - hi, 0.0) + np.minimum(sigma0 - lo, 0.0)
    over_elongation = np.abs(over) / sys.stiffness
    if np.max(over_elongation) > tol:
        j = int(np.argmax(over_elongation))
        raise InitialConditionError(
            f"initial stress of spring {j} is outside its elastic range"
        )
    sigma0 = np.clip(sigma0, lo, hi)

    if spec is None:
        spec = build_moving_set(sys, space, loads)
    f0 = loads.f(0.0)
    balance = sys.U_basis.T @ sigma0
    if f0 is not None:
        balance = balance - sys.equality_rows() @ (sys.F @ f0)
    if np.max(np.abs(balance), initial=0.0) > tol:
        raise InitialConditionError(
            "initial stress is not self-equilibrated with the initial force load"
        )

    epsilon = sigma0 / sys.stiffness
    y_full = epsilon + spec.offset(loads, 0.0)
    y = y_full if space is Space.FULL else spec.reduce(y_full)
    return SweepingState(time=0.0, y=y, sigma=sigma0, epsilon=epsilon)


def recover_stress(
    system: AssembledSystem,
    y: np.ndarray,
    t: float,
    loads: LoadSchedule,
    space: Space,
    spec: MovingSetSpec | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Elastic elongations and stresses from the sweeping variable."""
    if spec is None:
        spec = build_moving_set(system, space, loads)
    y_full = y if space is Space.FULL else spec.lift(y)
    epsilon = y_full - spec.offset(loads, t)
    return epsilon, system.stiffness * epsilon


def safe_load_check(system: AssembledSystem, f: np.ndarray | None) -> bool:
    """Whether a force load can be balanced within the yield limits.

    Feasibility of the shifted yield box intersected with the zero-balance
    rows; solved as the feasibility phase of the projection kernel.
    """
    m = system.dims.n_springs
    shift = np.zeros(m) if f is None else system.stiffness * (system.F @ np.asarray(f, dtype=float))
    upper = system.upper_limits - shift
    lower = system.lower_limits - shift
    poly = PolyhedralSet(
        A=np.vstack([np.eye(m), -np.eye(m)]),
        b=np.concatenate([upper, -lower]),
        A_eq=system.U_basis.T,
        b_eq=np.zeros(system.dims.dim_u),
    )
    try:
        find_feasible_point(poly)
    except InfeasibleSetError:
        return False
    return True
