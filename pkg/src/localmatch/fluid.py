"""Fixed-step RK4 solvers for the hydrodynamic-limit ODE systems.

The finite-support systems for greedy, uni-min and uni-max evolve the weight
vector (x_0, ..., x_N) on [0, 1].  The dynamics freeze once the mass on
positive degrees drops to ``halt_eps``; the crossing is located inside its
mesh cell by bisection on the RK4 substep length, so the frozen state carries
an O(halt_eps) residual instead of an O(h) overshoot.  Negative weights from
roundoff are clamped to zero and the clamped magnitude is recorded per step.

The Poisson/greedy case reduces to the scalar ODE

    v' = -(1 + 1/(1 - exp(-rho*v))),  v(0) = 1,  frozen at v <= 0,

whose solution feeds a Simpson quadrature for the limiting coverage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .criteria import CriterionKind
from .errors import MeshInvalid, UnsupportedKernel

DEFAULT_HALT_EPS = 1e-9
_DENOM_GUARD = 0.0  # fields return zero when a denominator is not strictly positive
_SCALAR_GUARD = 1e-12

_INITIAL_MASS_TOL = 1e-9


@dataclass(frozen=True)
class FluidSystem:
    """A finite-support limit system: criterion, initial pmf, halting threshold."""

    kind: CriterionKind
    initial: "np.ndarray"
    halt_eps: float = DEFAULT_HALT_EPS

    def __post_init__(self):
        if not self.kind.has_kernel():
            raise UnsupportedKernel(f"no fluid system for {self.kind.value}")
        w = np.asarray(getattr(self.initial, "weights", self.initial), dtype=float)
        if abs(w.sum() - 1.0) > _INITIAL_MASS_TOL:
            raise ValueError(f"initial mass {w.sum()!r} is not 1")
        object.__setattr__(self, "initial", w)

    @property
    def support_bound(self) -> int:
        return self.initial.size - 1


@dataclass
class FluidSolution:
    grid: np.ndarray
    states: np.ndarray  # shape (len(grid), N+1)
    t_halt: float | None
    clamped: np.ndarray  # per-step clamped negative mass

    @property
    def coverage(self) -> float:
        return 1.0 - float(self.states[-1, 0])

    def state_at(self, index: int) -> np.ndarray:
        return self.states[index]


# The right-hand side is the mean one-step transition of the chain at a
# scaled state x:  removing the explored atom (law K(k) = x_k/m), removing
# the match atom (marginal Km), and shifting one unit down per partner stub
# consumed from a third party.  The explored node contributes K partner
# draws of which the chosen match is one, so the shifting draws have
# intensity K*sb - Km, not (K-1)*sb: the two coincide only when the match
# choice ignores the drawn availabilities (greedy).  Collecting terms, with
# C = M/m + <Km, x> - 1 and grad_j = j*x_j - (j+1)*x_{j+1}:
#
#   dx_j = -( x_j/m + C*grad_j/M + Km(j+1) ),  j = 1..N   (Km(N+1) = 0)
#   dx_0 = C*x_1/M - Km(1)
#
# For greedy Km is the size-biased pmf and this reduces to the classical
# A(x)-form of the finite-support system.


def _match_marginal(kind: CriterionKind, x: np.ndarray, m: float, shift: np.ndarray,
                    big_m: float) -> np.ndarray:
    """Km(j) = sum_k (x_k/m) K'(k)(j) on 0..N+1 (entries 0 and N+1 are zero)."""
    n = x.size - 1
    km = np.zeros(n + 2)
    if kind is CriterionKind.GREEDY:
        km[1 : n + 1] = shift[1:] / big_m
        return km
    if kind is CriterionKind.UNI_MIN:
        # q[i] = P(size-biased degree >= i), i = 0..N+1
        q = np.zeros(n + 2)
        q[: n + 1] = np.cumsum(shift[::-1])[::-1] / big_m
        powers = np.cumprod(np.tile(q, (n, 1)), axis=0)
        u = x[1:] @ powers  # u[i] = sum_k x_k q[i]^k
        km[1 : n + 1] = (u[1 : n + 1] - u[2 : n + 2]) / m
        return km
    # UNI_MAX: through the size-biased c.d.f., F(0) = 0
    cdf = np.cumsum(shift) / big_m
    powers = np.cumprod(np.tile(cdf, (n, 1)), axis=0)
    u = x[1:] @ powers
    km[1 : n + 1] = (u[1:] - u[:-1]) / m
    return km


def _make_field(kind: CriterionKind):
    def field(x: np.ndarray) -> np.ndarray:
        n = x.size - 1
        deg = np.arange(x.size, dtype=float)
        m = x[1:].sum()
        shift = deg * x
        big_m = shift.sum()
        if m <= _DENOM_GUARD or big_m <= _DENOM_GUARD:
            return np.zeros_like(x)
        km = _match_marginal(kind, x, m, shift, big_m)
        amp = big_m / m + float((np.arange(n + 2) * km).sum()) - 1.0
        grad = shift[1:] - np.concatenate((shift[2:], [0.0]))
        out = np.empty_like(x)
        out[1:] = -(x[1:] / m + amp * grad / big_m + km[2 : n + 2])
        out[0] = amp * x[1] / big_m - km[1]
        return out

    return field


_field_greedy = _make_field(CriterionKind.GREEDY)
_field_unimin = _make_field(CriterionKind.UNI_MIN)
_field_unimax = _make_field(CriterionKind.UNI_MAX)


_FIELDS = {
    CriterionKind.GREEDY: _field_greedy,
    CriterionKind.UNI_MIN: _field_unimin,
    CriterionKind.UNI_MAX: _field_unimax,
}


def rhs(kind: CriterionKind, x, halt_eps: float = DEFAULT_HALT_EPS) -> np.ndarray:
    """Coordinatewise time derivative; the zero vector once the positive-degree
    mass is at or below halt_eps (the halting indicator)."""
    w = np.asarray(getattr(x, "weights", x), dtype=float)
    field = _FIELDS.get(kind)
    if field is None:
        raise UnsupportedKernel(f"no fluid system for {kind.value}")
    if w[1:].sum() <= halt_eps:
        return np.zeros_like(w)
    return field(w)


def _rk4_with_k1(field, x, h, k1):
    k2 = field(x + (0.5 * h) * k1)
    k3 = field(x + (0.5 * h) * k2)
    k4 = field(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _mesh_cells(h: float) -> int:
    if not 0.0 < h <= 0.01:
        raise MeshInvalid(f"mesh {h!r} outside (0, 0.01]")
    return int(math.ceil(1.0 / h - 1e-12))


_MAX_SUBSTEPS = 100_000
_SUBSTEP_FRACTION = 0.25


def _solve_vector_pure(field, x0, h, halt_eps):
    """Cell loop with graded substeps near extinction.

    The field's Jacobian grows like 1/mass as the positive-degree mass
    drains, so near the halt a full mesh step leaves the RK4 stability
    region.  A substep is therefore capped so the state moves by at most a
    fixed fraction of the remaining mass (|k1|_1 * h <= fraction * mass),
    and the final substep aims just below the halting threshold.  Far from
    the halt every cell is a single classical step.
    """
    ncells = _mesh_cells(h)
    dim = x0.size
    states = np.empty((ncells + 1, dim))
    clamped = np.zeros(ncells)
    states[0] = x0
    x = x0.copy()
    frozen = False
    t_halt = None
    for c in range(ncells):
        t0 = c * h
        t1 = min((c + 1) * h, 1.0)
        if not frozen:
            tcur = t0
            neg_total = 0.0
            for _ in range(_MAX_SUBSTEPS):
                mp = x[1:].sum()
                if mp <= halt_eps:
                    frozen = True
                    t_halt = tcur
                    break
                remaining = t1 - tcur
                if remaining <= 0.0:
                    break
                k1 = field(x)
                mdot = k1[1:].sum()
                speed = float(np.abs(k1).sum())
                h_sub = remaining
                if speed > 0.0:
                    h_sub = min(h_sub, _SUBSTEP_FRACTION * mp / speed)
                if mdot < 0.0:
                    h_sub = min(h_sub, (mp - 0.75 * halt_eps) / -mdot)
                full = h_sub >= remaining
                x = _rk4_with_k1(field, x, remaining if full else h_sub, k1)
                neg = x < 0
                if neg.any():
                    neg_total -= float(x[neg].sum())
                    x[neg] = 0.0
                tcur = t1 if full else tcur + h_sub
                if full:
                    break
            clamped[c] = neg_total
        states[c + 1] = x
    return states, t_halt, clamped


def solve(system: FluidSystem, h: float, backend: str | None = None) -> FluidSolution:
    """Integrate the system over [0, 1] at mesh h (last cell lands on 1)."""
    from . import backend as _backend

    ncells = _mesh_cells(h)
    grid = np.minimum(np.arange(ncells + 1) * h, 1.0)
    impl = _backend.select(backend)
    if impl.name == "compiled":
        kind_code = {CriterionKind.GREEDY: 0, CriterionKind.UNI_MIN: 1,
                     CriterionKind.UNI_MAX: 2}[system.kind]
        states, t_halt, clamped = impl.core.fluid_solve(
            kind_code, system.initial, h, system.halt_eps)
        t_halt = None if t_halt < 0 else float(t_halt)
    else:
        states, t_halt, clamped = _solve_vector_pure(
            _FIELDS[system.kind], system.initial.copy(), h, system.halt_eps)
    return FluidSolution(grid=grid, states=states, t_halt=t_halt, clamped=clamped)


@dataclass
class PoissonSolution:
    rho: float
    grid: np.ndarray
    v: np.ndarray
    coverage: float
    t_halt: float | None = None


def _poisson_slope(v: float, rho: float) -> float:
    if v <= _SCALAR_GUARD:
        return 0.0
    return -(1.0 + 1.0 / (-math.expm1(-rho * v)))


def _poisson_integrand(v: np.ndarray, rho: float) -> np.ndarray:
    out = np.zeros_like(v)
    live = v > _SCALAR_GUARD
    rv = rho * v[live]
    out[live] = np.exp(-rv) * (rv / (-np.expm1(-rv)) - 1.0 + rv)
    return out


def solve_poisson_greedy(rho: float, h: float, backend: str | None = None) -> PoissonSolution:
    """Scalar RK4 for the Poisson/greedy reduction plus Simpson coverage."""
    from . import backend as _backend

    if rho <= 0:
        raise ValueError("rho must be > 0")
    ncells = _mesh_cells(h)
    grid = np.minimum(np.arange(ncells + 1) * h, 1.0)
    impl = _backend.select(backend)
    if impl.name == "compiled":
        v = impl.core.poisson_solve(rho, h)
    else:
        v = np.empty(ncells + 1)
        v[0] = 1.0
        cur = 1.0
        for c in range(ncells):
            dt = grid[c + 1] - grid[c]
            if cur > _SCALAR_GUARD:
                k1 = _poisson_slope(cur, rho)
                k2 = _poisson_slope(cur + 0.5 * dt * k1, rho)
                k3 = _poisson_slope(cur + 0.5 * dt * k2, rho)
                k4 = _poisson_slope(cur + dt * k3, rho)
                cur = cur + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                if cur < 0.0:
                    cur = 0.0
            v[c + 1] = cur
    halted = np.nonzero(v <= _SCALAR_GUARD)[0]
    t_halt = float(grid[halted[0]]) if halted.size else None
    integral = float(simpson(_poisson_integrand(v, rho), x=grid))
    coverage = 1.0 - math.exp(-rho) - integral
    return PoissonSolution(rho=rho, grid=grid, v=v, coverage=coverage, t_halt=t_halt)


def poisson_coverage_closed_form(rho: float) -> float:
    """Reference value 1 - log(2 - exp(-rho))/rho (matched numerically, no
    analytic proof; treated as a tolerance target, not an identity)."""
    return 1.0 - math.log(2.0 - math.exp(-rho)) / rho
