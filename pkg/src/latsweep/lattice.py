"""Lattice input data: graph, geometry, spring laws, and load schedules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


def _frozen(a, dtype=float):
    out = np.array(a, dtype=dtype)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class LatticeDefinition:
    """A spring network: incidence, reference geometry, and spring laws.

    ``incidence`` is the node-by-spring matrix with +1 at each spring's
    origin and -1 at its terminus.  ``constraint_matrix`` holds the rows of
    the external displacement constraint.  Periodic lattices mark springs
    that wrap around the box with integer ``edge_shifts``; the terminus of
    such a spring is taken at its shifted image ``coords + box * shift``.
    """

    incidence: np.ndarray
    reference_coords: np.ndarray
    dimension: int
    stiffness: np.ndarray
    lower_limits: np.ndarray
    upper_limits: np.ndarray
    constraint_matrix: np.ndarray
    edge_shifts: np.ndarray | None = None
    box_lengths: np.ndarray | None = None
    volume: float | None = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "incidence", _frozen(self.incidence))
        object.__setattr__(self, "reference_coords", _frozen(self.reference_coords))
        object.__setattr__(self, "stiffness", _frozen(self.stiffness))
        object.__setattr__(self, "lower_limits", _frozen(self.lower_limits))
        object.__setattr__(self, "upper_limits", _frozen(self.upper_limits))
        object.__setattr__(
            self, "constraint_matrix", _frozen(np.atleast_2d(self.constraint_matrix))
        )
        if self.edge_shifts is not None:
            object.__setattr__(self, "edge_shifts", _frozen(self.edge_shifts, int))
        if self.box_lengths is not None:
            object.__setattr__(self, "box_lengths", _frozen(self.box_lengths))
        self.validate()

    @property
    def n_nodes(self) -> int:
        return self.incidence.shape[0]

    @property
    def n_springs(self) -> int:
        return self.incidence.shape[1]

    @property
    def n_constraints(self) -> int:
        return self.constraint_matrix.shape[0]

    @property
    def n_dof(self) -> int:
        return self.n_nodes * self.dimension

    def node_coords(self) -> np.ndarray:
        """Reference coordinates as an (n, d) array."""
        return self.reference_coords.reshape(self.n_nodes, self.dimension)

    def spring_endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """(origins, termini) node indices per spring."""
        Q = self.incidence
        origins = np.argmax(Q == 1, axis=0)
        termini = np.argmax(Q == -1, axis=0)
        return origins, termini

    def spring_vectors(self) -> np.ndarray:
        """Chords from terminus (or its periodic image) to origin, (m, d)."""
        coords = self.node_coords()
        origins, termini = self.spring_endpoints()
        chords = coords[origins] - coords[termini]
        if self.edge_shifts is not None:
            chords = chords - self.edge_shifts * self.box_lengths[None, :]
        return chords

    def validate(self):
        d = self.dimension
        if d not in (1, 2, 3):
            raise InvalidInputError(f"dimension must be 1, 2 or 3, got {d}")
        n, m = self.incidence.shape
        if m == 0 or n == 0:
            raise InvalidInputError("lattice needs at least one node and spring")
        Q = self.incidence
        if not np.all(np.isin(Q, (-1.0, 0.0, 1.0))):
            raise InvalidInputError("incidence entries must be -1, 0 or +1")
        if np.any(np.sum(Q == 1, axis=0) != 1) or np.any(np.sum(Q == -1, axis=0) != 1):
            raise InvalidInputError(
                "each incidence column needs exactly one origin (+1) and one terminus (-1)"
            )
        if self.reference_coords.shape != (n * d,):
            raise InvalidInputError(
                f"reference coordinates have shape {self.reference_coords.shape}, "
                f"expected ({n * d},)"
            )
        for name in ("reference_coords", "stiffness", "lower_limits", "upper_limits"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise InvalidInputError(f"{name} has non-finite entries")
        if self.stiffness.shape != (m,) or np.any(self.stiffness <= 0):
            raise InvalidInputError("stiffness must be positive, one value per spring")
        if self.lower_limits.shape != (m,) or self.upper_limits.shape != (m,):
            raise InvalidInputError("yield limits must have one value per spring")
        if np.any(self.lower_limits >= self.upper_limits):
            raise InvalidInputError("lower yield limits must be below upper limits")
        if self.constraint_matrix.shape[1] != n * d:
            raise InvalidInputError(
                f"constraint matrix has {self.constraint_matrix.shape[1]} columns, "
                f"expected {n * d}"
            )
        if not np.all(np.isfinite(self.constraint_matrix)):
            raise InvalidInputError("constraint matrix has non-finite entries")
        if self.edge_shifts is not None:
            if self.box_lengths is None:
                raise InvalidInputError("edge shifts require box lengths")
            if self.edge_shifts.shape != (m, d):
                raise InvalidInputError("edge shifts must have shape (m, d)")
            if self.box_lengths.shape != (d,) or np.any(self.box_lengths <= 0):
                raise InvalidInputError("box lengths must be positive, one per axis")


@dataclass(frozen=True)
class LoadSchedule:
    """Displacement, force, and box-strain loads on ``[0, horizon]``.

    The displacement load is ``r(t) = displacement_offset + integral of the
    piecewise-constant rate``; ``rate_times`` are segment start times and
    ``rate_values`` the rate on each segment.  The force load and the box
    strain are piecewise linear between breakpoints and constant beyond
    them.
    """

    displacement_offset: np.ndarray
    rate_times: np.ndarray
    rate_values: np.ndarray
    horizon: float
    force_times: np.ndarray | None = None
    force_values: np.ndarray | None = None
    strain_axis: int | None = None
    strain_times: np.ndarray | None = None
    strain_values: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "displacement_offset", _frozen(self.displacement_offset))
        object.__setattr__(self, "rate_times", _frozen(np.atleast_1d(self.rate_times)))
        object.__setattr__(self, "rate_values", _frozen(np.atleast_2d(self.rate_values)))
        if self.horizon <= 0:
            raise InvalidInputError("horizon must be positive")
        if self.rate_times[0] != 0.0 or np.any(np.diff(self.rate_times) <= 0):
            raise InvalidInputError("rate segment times must increase from 0")
        if self.rate_values.shape[0] != self.rate_times.shape[0]:
            raise InvalidInputError("one rate vector per rate segment required")
        if self.rate_values.shape[1] != self.displacement_offset.shape[0]:
            raise InvalidInputError("rate vectors must match the offset length")
        if (self.force_times is None) != (self.force_values is None):
            raise InvalidInputError("force times and values must come together")
        if self.force_times is not None:
            object.__setattr__(self, "force_times", _frozen(np.atleast_1d(self.force_times)))
            object.__setattr__(self, "force_values", _frozen(np.atleast_2d(self.force_values)))
            if self.force_values.shape[0] != self.force_times.shape[0]:
                raise InvalidInputError("one force vector per breakpoint required")
            if np.any(np.diff(self.force_times) <= 0):
                raise InvalidInputError("force breakpoints must increase")
        has_strain = self.strain_times is not None
        if has_strain != (self.strain_values is not None) or (
            has_strain and self.strain_axis is None
        ):
            raise InvalidInputError("strain needs axis, times and values together")
        if has_strain:
            object.__setattr__(self, "strain_times", _frozen(np.atleast_1d(self.strain_times)))
            object.__setattr__(self, "strain_values", _frozen(np.atleast_1d(self.strain_values)))
            if self.strain_values.shape != self.strain_times.shape:
                raise InvalidInputError("one strain value per breakpoint required")
            if np.any(np.diff(self.strain_times) <= 0):
                raise InvalidInputError("strain breakpoints must increase")

    @classmethod
    def constant_rate(
        cls,
        displacement_offset,
        rate,
        horizon,
        force_times=None,
        force_values=None,
        strain_axis=None,
        strain_times=None,
        strain_values=None,
    ) -> "LoadSchedule":
        return cls(
            displacement_offset=np.asarray(displacement_offset, dtype=float),
            rate_times=np.array([0.0]),
            rate_values=np.atleast_2d(np.asarray(rate, dtype=float)),
            horizon=float(horizon),
            force_times=force_times,
            force_values=force_values,
            strain_axis=strain_axis,
            strain_times=strain_times,
            strain_values=strain_values,
        )

    def _segment(self, times: np.ndarray, t: float) -> int:
        idx = int(np.searchsorted(times, t, side="right")) - 1
        return min(max(idx, 0), len(times) - 1)

    def r(self, t: float) -> np.ndarray:
        """Displacement load at time ``t``."""
        times = self.rate_times
        idx = self._segment(times, t)
        out = self.displacement_offset.copy()
        for j in range(idx):
            out += self.rate_values[j] * (times[j + 1] - times[j])
        out += self.rate_values[idx] * (t - times[idx])
        return out

    def rdot(self, t: float) -> np.ndarray:
        """Displacement rate on the segment containing ``t``."""
        return self.rate_values[self._segment(self.rate_times, t)].copy()

    def f(self, t: float) -> np.ndarray | None:
        """Force load at time ``t``; ``None`` means identically zero."""
        if self.force_times is None:
            return None
        times, values = self.force_times, self.force_values
        if t <= times[0]:
            return values[0].copy()
        if t >= times[-1]:
            return values[-1].copy()
        idx = self._segment(times, t)
        w = (t - times[idx]) / (times[idx + 1] - times[idx])
        return (1 - w) * values[idx] + w * values[idx + 1]

    def force_is_constant(self) -> bool:
        if self.force_times is None:
            return True
        return bool(np.all(self.force_values == self.force_values[0]))

    def gamma(self, t: float) -> float:
        """Box strain at time ``t`` (0 when the schedule has no strain load)."""
        if self.strain_times is None:
            return 0.0
        return float(np.interp(t, self.strain_times, self.strain_values))

    def gamma_rate(self, t: float) -> float:
        if self.strain_times is None:
            return 0.0
        times, values = self.strain_times, self.strain_values
        if t >= times[-1] or t < times[0]:
            return 0.0
        idx = self._segment(times, t)
        idx = min(idx, len(times) - 2)
        return float((values[idx + 1] - values[idx]) / (times[idx + 1] - times[idx]))

    def rate_breakpoints(self) -> np.ndarray:
        """Times where any load rate may jump, clipped to [0, horizon]."""
        pts = {0.0, float(self.horizon)}
        pts.update(float(t) for t in self.rate_times)
        if self.strain_times is not None:
            pts.update(float(t) for t in self.strain_times)
        if self.force_times is not None:
            pts.update(float(t) for t in self.force_times)
        return np.array(sorted(p for p in pts if 0.0 <= p <= self.horizon))
