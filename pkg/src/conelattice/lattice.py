"""Generalized lattice operations induced by a self-dual cone.

``meet(K, x, y)`` is the projection of ``y`` onto ``x - K`` and
``join(K, x, y)`` the projection of ``y`` onto ``x + K``.  For the
nonnegative orthant they reduce to the componentwise minimum and maximum.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import DEFAULT_TOL, check_tol
from .cones import _prep


def meet(K, x, y):
    """Return ``x - P_K(x - y)``."""
    x, y = _prep(K, x, y)
    return x - K.project(x - y)


def join(K, x, y):
    """Return ``x + P_K(y - x)``."""
    x, y = _prep(K, x, y)
    return x + K.project(y - x)


def comparable(K, x, y, tol=DEFAULT_TOL):
    x, y = _prep(K, x, y)
    tol = check_tol(tol)
    res = K.contains(y - x, tol) | K.contains(x - y, tol)
    return bool(res) if np.ndim(res) == 0 else res


@dataclass(frozen=True, eq=False)
class Rectangle:
    """Planar rectangle with vertices ``x``, ``meet``, ``y``, ``join``.

    The edges ``x - meet`` and ``y - meet`` are orthogonal and
    ``meet + join = x + y``.
    """

    v_x: np.ndarray
    v_y: np.ndarray
    v_meet: np.ndarray
    v_join: np.ndarray

    @property
    def vertices(self):
        return np.stack([self.v_x, self.v_meet, self.v_y, self.v_join])

    def edges(self):
        return self.v_x - self.v_meet, self.v_y - self.v_meet

    def coordinates(self, p):
        """Edge coordinates ``(a, b)`` of the nearest point of the rectangle's plane
        and the distance from ``p`` to that plane.

        ``p`` lies in the rectangle iff the distance is zero and ``a, b`` are in ``[0, 1]``.
        """
        e1, e2 = self.edges()
        d = np.asarray(p, dtype=float) - self.v_meet
        a = d @ e1 / (e1 @ e1)
        b = d @ e2 / (e2 @ e2)
        resid = d - np.multiply.outer(a, e1) - np.multiply.outer(b, e2)
        return a, b, np.linalg.norm(resid, axis=-1)

    def contains(self, p, tol=1e-8):
        a, b, dist = self.coordinates(p)
        scale = max(1.0, float(np.linalg.norm(self.v_join - self.v_meet)))
        return (
            (dist <= tol * scale)
            & (a >= -tol) & (a <= 1 + tol)
            & (b >= -tol) & (b <= 1 + tol)
        )

    def sample(self, rng, n):
        """Uniform points of the rectangle."""
        e1, e2 = self.edges()
        ab = rng.random((n, 2))
        return self.v_meet + np.outer(ab[:, 0], e1) + np.outer(ab[:, 1], e2)

    def to_dict(self):
        return {
            "x": self.v_x.tolist(),
            "y": self.v_y.tolist(),
            "meet": self.v_meet.tolist(),
            "join": self.v_join.tolist(),
        }


@dataclass(frozen=True, eq=False)
class MinimalInvariantSet:
    """Smallest invariant convex set containing two points.

    For comparable points this is the segment between ``endpoints``;
    otherwise the rectangle ``rect``.
    """

    endpoints: tuple
    rect: Rectangle = None

    @property
    def is_comparable(self):
        return self.rect is None


def minimal_invariant(K, x, y, tol=DEFAULT_TOL):
    x, y = _prep(K, x, y)
    if x.ndim != 1:
        raise ValueError("minimal_invariant takes single points, not batches")
    if comparable(K, x, y, tol):
        return MinimalInvariantSet((x, y))
    lo = x - K.project(x - y)
    hi = x + K.project(y - x)
    return MinimalInvariantSet((x, y), Rectangle(x, y, lo, hi))


def ncp_residual(K, x, fx):
    """Norm of ``meet(K, x, fx)``; zero exactly at complementary pairs."""
    return np.linalg.norm(meet(K, x, fx), axis=-1)
