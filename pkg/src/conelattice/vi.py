"""Projection fixed-point iteration for variational inequalities and NCPs.

``x_{k+1} = P_D(x_k - step * F(x_k))`` with a fixed step.  Each trajectory
also records how long the iterates stay monotone in the cone order.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import DEFAULT_TOL, DimensionError, as_vector
from .cones import ConeSpec
from .lattice import ncp_residual
from .sets import Polyhedron, project_polyhedron


class NonFiniteMapError(ValueError):
    """The map returned NaN or infinite values."""


def affine_map(M, q):
    """``F(x) = M x + q``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    q = as_vector(q, M.shape[0], "q")
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"affine map needs a square matrix, got {M.shape}")
    return lambda x: M @ x + q


def domain_projector(domain):
    """Projection onto a cone, a polyhedron, or a caller-supplied callable."""
    if isinstance(domain, ConeSpec):
        return domain.dim, domain.project
    if isinstance(domain, Polyhedron):
        return domain.dim, lambda x: project_polyhedron(domain, x)
    if callable(domain):
        return None, domain
    raise TypeError(f"cannot project onto {type(domain).__name__}")


@dataclass
class VIProblem:
    domain: object
    F: callable
    x0: np.ndarray
    step: float = 0.5
    tol: float = 1e-8
    max_iter: int = 1000

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        dim, _ = domain_projector(self.domain)
        self.x0 = as_vector(self.x0, dim, "x0")


@dataclass
class Trajectory:
    iterates: list
    residuals: list
    converged: bool
    order_monotone_prefix: int = 0
    direction: int = 0
    info: dict = field(default_factory=dict)

    @property
    def solution(self):
        return self.iterates[-1]

    @property
    def iterations(self):
        return len(self.iterates) - 1

    def to_dict(self, thin=1):
        """JSON form; ``thin`` keeps every ``thin``-th iterate plus the last one."""
        keep = list(range(0, len(self.iterates), max(1, int(thin))))
        if keep[-1] != len(self.iterates) - 1:
            keep.append(len(self.iterates) - 1)
        return {
            "iterates": [np.asarray(self.iterates[i]).tolist() for i in keep],
            "iterate_indices": keep,
            "residuals": [float(r) for r in self.residuals],
            "converged": bool(self.converged),
            "iterations": self.iterations,
            "order_monotone_prefix": int(self.order_monotone_prefix),
            "direction": int(self.direction),
        }


def _order_prefix(K, iterates, tol):
    """Longest run of steps from the start that move consistently up (+1) or
    down (-1) in the order of ``K``."""
    direction = 0
    count = 0
    for a, b in zip(iterates, iterates[1:]):
        up = bool(K.contains(b - a, tol))
        down = bool(K.contains(a - b, tol))
        if up and down:
            count += 1
            continue
        step_dir = 1 if up else -1 if down else 0
        if step_dir == 0 or (direction and step_dir != direction):
            break
        direction = step_dir
        count += 1
    return count, direction


def _evaluate(F, x):
    fx = np.asarray(F(x), dtype=float)
    if fx.shape != x.shape:
        raise DimensionError(f"map returned shape {fx.shape}, expected {x.shape}")
    if not np.all(np.isfinite(fx)):
        raise NonFiniteMapError(f"map value is not finite at {x.tolist()}")
    return fx


def solve_vi(p, K, order_tol=DEFAULT_TOL):
    """Run the projection iteration; ``K`` is the cone used to track order.

    The residual at step ``k`` is ``||x_{k+1} - x_k|| / step`` and the run
    stops as soon as it drops to ``p.tol``.
    """
    _, proj = domain_projector(p.domain)
    if p.x0.size != K.dim:
        raise DimensionError(f"x0 has dimension {p.x0.size}, cone {K.dim}")
    x = p.x0
    iterates = [x]
    residuals = []
    converged = False
    for _ in range(p.max_iter):
        x_new = proj(x - p.step * _evaluate(p.F, x))
        r = float(np.linalg.norm(x_new - x)) / p.step
        iterates.append(x_new)
        residuals.append(r)
        x = x_new
        if r <= p.tol:
            converged = True
            break
    prefix, direction = _order_prefix(K, iterates, order_tol)
    return Trajectory(iterates, residuals, converged, prefix, direction)


def ncp_solve(K, F, x0, step=0.5, tol=1e-8, max_iter=1000, order_tol=DEFAULT_TOL):
    """Projection iteration on the cone ``K``, stopping on ``||x meet F(x)|| <= tol``.

    ``residuals[k]`` is the complementarity residual of ``iterates[k]``.
    """
    p = VIProblem(K, F, x0, step, tol, max_iter)
    x = p.x0
    iterates = [x]
    fx = _evaluate(F, x)
    residuals = [float(ncp_residual(K, x, fx))]
    converged = residuals[0] <= tol
    k = 0
    while not converged and k < max_iter:
        x = K.project(x - step * fx)
        fx = _evaluate(F, x)
        iterates.append(x)
        residuals.append(float(ncp_residual(K, x, fx)))
        converged = residuals[-1] <= tol
        k += 1
    prefix, direction = _order_prefix(K, iterates, order_tol)
    return Trajectory(iterates, residuals, converged, prefix, direction)
