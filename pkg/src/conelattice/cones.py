"""Self-dual cones: membership, metric projection, Moreau decomposition and order.

Four families are supported:

* :class:`Orthant` -- the nonnegative orthant ``R^m_+``.
* :class:`Lorentz` -- the second-order cone ``{(x, t): ||x|| <= t}`` of total
  dimension ``dim`` (so ``dim = m + 1``).
* :class:`RotatedOrthant` -- ``Q R^m_+`` for an orthogonal matrix ``Q``.
* :class:`Product` -- a Cartesian product of the above.

Every operation accepts a single vector of shape ``(dim,)`` or a batch of
shape ``(n, dim)``; batches are processed row by row.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._validation import (
    DEFAULT_TOL,
    DimensionError,
    SchemaError,
    as_vector,
    check_tol,
)

_EPS = np.finfo(float).eps


class ConeSpec:
    """Base class of the self-dual cone descriptions."""

    dim: int

    def contains(self, x, tol=DEFAULT_TOL):
        raise NotImplementedError

    def project(self, x):
        raise NotImplementedError

    def sample(self, rng, n):
        raise NotImplementedError

    def generators(self):
        """Extreme rays as rows of a matrix, or ``None`` if the cone is not polyhedral."""
        return None

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Orthant(ConeSpec):
    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"orthant dimension must be a positive integer, got {self.dim}")

    def contains(self, x, tol=DEFAULT_TOL):
        return np.all(x >= -tol, axis=-1)

    def project(self, x):
        return np.maximum(x, 0.0)

    def sample(self, rng, n):
        return np.abs(rng.standard_normal((n, self.dim)))

    def generators(self):
        return np.eye(self.dim)

    def to_dict(self):
        return {"type": "orthant", "dim": int(self.dim)}


@dataclass(frozen=True)
class Lorentz(ConeSpec):
    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"Lorentz cone needs dimension >= 2, got {self.dim}")

    def contains(self, x, tol=DEFAULT_TOL):
        return np.linalg.norm(x[..., :-1], axis=-1) <= x[..., -1] + tol

    def project(self, x):
        shape = x.shape
        x = x.reshape(-1, shape[-1])
        v, t = x[:, :-1], x[:, -1]
        nv = np.linalg.norm(v, axis=-1)
        out = np.zeros_like(x)
        inside = nv <= t
        polar = ~inside & (nv <= -t)
        mid = ~inside & ~polar
        out[inside] = x[inside]
        # mid implies nv > |t| >= 0, so the division is safe
        scale = 0.5 * (t[mid] + nv[mid])
        out[mid, :-1] = (scale / nv[mid])[:, None] * v[mid]
        out[mid, -1] = scale
        return out.reshape(shape)

    def sample(self, rng, n):
        v = rng.standard_normal((n, self.dim - 1))
        nv = np.linalg.norm(v, axis=-1)
        slack = np.abs(rng.standard_normal(n))
        # a quarter of the draws sit exactly on the boundary
        slack[rng.random(n) < 0.25] = 0.0
        return np.column_stack([v, nv + slack])

    def generators(self):
        if self.dim == 2:
            return np.array([[1.0, 1.0], [-1.0, 1.0]]) / np.sqrt(2.0)
        return None

    def to_dict(self):
        return {"type": "lorentz", "dim": int(self.dim)}


@dataclass(frozen=True, eq=False)
class RotatedOrthant(ConeSpec):
    """The image ``Q R^m_+`` of the orthant under an orthogonal matrix."""

    q: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] == 0:
            raise DimensionError(f"Q must be a nonempty square matrix, got shape {q.shape}")
        if not np.all(np.isfinite(q)):
            raise ValueError("Q has non-finite entries")
        if np.max(np.abs(q.T @ q - np.eye(q.shape[0]))) > 1e-9:
            raise ValueError("Q is not orthogonal (Q^T Q != I within 1e-9)")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def dim(self):
        return self.q.shape[0]

    def __eq__(self, other):
        return isinstance(other, RotatedOrthant) and np.array_equal(self.q, other.q)

    def __hash__(self):
        return hash(self.q.tobytes())

    def contains(self, x, tol=DEFAULT_TOL):
        # allow for the rounding error of the change of basis itself
        slack = tol + 4 * self.dim * _EPS * np.linalg.norm(x, axis=-1)
        return np.all(x @ self.q >= -slack[..., None], axis=-1)

    def project(self, x):
        return np.maximum(x @ self.q, 0.0) @ self.q.T

    def sample(self, rng, n):
        return np.abs(rng.standard_normal((n, self.dim))) @ self.q.T

    def generators(self):
        return self.q.T.copy()

    def to_dict(self):
        return {"type": "rotated_orthant", "q": self.q.tolist()}


@dataclass(frozen=True)
class Product(ConeSpec):
    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("product cone needs at least one part")
        for p in parts:
            if not isinstance(p, ConeSpec):
                raise TypeError(f"product part must be a ConeSpec, got {type(p).__name__}")
        object.__setattr__(self, "parts", parts)

    @property
    def dim(self):
        return sum(p.dim for p in self.parts)

    def blocks(self):
        """Yield ``(part, slice)`` for each factor."""
        start = 0
        for p in self.parts:
            yield p, slice(start, start + p.dim)
            start += p.dim

    def contains(self, x, tol=DEFAULT_TOL):
        result = np.ones(x.shape[:-1], dtype=bool)
        for p, sl in self.blocks():
            result &= p.contains(x[..., sl], tol)
        return result

    def project(self, x):
        out = np.empty_like(x)
        for p, sl in self.blocks():
            out[..., sl] = p.project(x[..., sl])
        return out

    def sample(self, rng, n):
        return np.concatenate([p.sample(rng, n) for p in self.parts], axis=-1)

    def generators(self):
        gens = [p.generators() for p in self.parts]
        if any(g is None for g in gens):
            return None
        rows = []
        for g, (_, sl) in zip(gens, self.blocks()):
            block = np.zeros((g.shape[0], self.dim))
            block[:, sl] = g
            rows.append(block)
        return np.vstack(rows)

    def to_dict(self):
        return {"type": "product", "parts": [p.to_dict() for p in self.parts]}


class MoreauPair(NamedTuple):
    """``plus = P_K x`` and ``minus = P_K(-x)``, so ``x = plus - minus``."""

    plus: np.ndarray
    minus: np.ndarray


def _prep(K, *xs):
    if not isinstance(K, ConeSpec):
        raise TypeError(f"expected a ConeSpec, got {type(K).__name__}")
    return [as_vector(x, K.dim, name) for x, name in zip(xs, "xyzw")]


def contains(K, x, tol=DEFAULT_TOL):
    """Membership of ``x`` in the ``tol``-relaxation of ``K``.

    Orthant: every coordinate ``>= -tol``.  Lorentz: ``||x|| <= t + tol``.
    Rotated orthant: coordinates in the rotated frame ``>= -tol``.
    Product: every factor.
    """
    (x,) = _prep(K, x)
    tol = check_tol(tol)
    res = K.contains(x, tol)
    return bool(res) if np.ndim(res) == 0 else res


def project_cone(K, x):
    """Metric projection onto ``K`` by closed form."""
    (x,) = _prep(K, x)
    return K.project(x)


def moreau(K, x):
    """Moreau decomposition of ``x`` with respect to the self-dual cone ``K``."""
    (x,) = _prep(K, x)
    return MoreauPair(K.project(x), K.project(-x))


def leq(K, x, y, tol=DEFAULT_TOL):
    """Cone order ``x <=_K y``, i.e. ``y - x`` in ``K``."""
    x, y = _prep(K, x, y)
    tol = check_tol(tol)
    res = K.contains(y - x, tol)
    return bool(res) if np.ndim(res) == 0 else res


def sample_cone(K, n, seed=None):
    """Draw ``n`` members of ``K``; deterministic for a given integer seed.

    ``seed`` may also be a :class:`numpy.random.Generator`, which is advanced.
    """
    if n < 0:
        raise ValueError(f"sample count must be nonnegative, got {n}")
    rng = np.random.default_rng(seed)
    return K.sample(rng, int(n)).reshape(int(n), K.dim)


def cone_generators(K):
    """Rows spanning ``K`` as a conic hull, or ``None`` when ``K`` is not polyhedral."""
    return K.generators()


def cone_from_dict(d):
    """Parse the JSON form of a cone (see :meth:`ConeSpec.to_dict`)."""
    if not isinstance(d, dict) or "type" not in d:
        raise SchemaError("cone must be an object with a 'type' field")
    kind = d["type"]
    try:
        if kind == "orthant":
            return Orthant(int(d["dim"]))
        if kind == "lorentz":
            return Lorentz(int(d["dim"]))
        if kind == "rotated_orthant":
            return RotatedOrthant(np.array(d["q"], dtype=float))
        if kind == "product":
            return Product(tuple(cone_from_dict(p) for p in d["parts"]))
    except KeyError as exc:
        raise SchemaError(f"cone of type {kind!r} is missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, (SchemaError, DimensionError)):
            raise
        raise SchemaError(f"invalid {kind} cone: {exc}") from None
    raise SchemaError(f"unknown cone type {kind!r}")


def cone_to_dict(K):
    return K.to_dict()
