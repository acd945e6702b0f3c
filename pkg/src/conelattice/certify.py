"""Decision procedures for invariance under meet/join and isotone projections.

Closed-form and generator-pair tests can prove a property; the sampled
falsifiers can only refute it or report that no counterexample was found.

Batch conventions used by the falsifiers:

* a *sampler* is ``sampler(rng, n) -> (n, dim) array`` of points of the set;
* a *pair sampler* is ``sampler(rng, n) -> (X, Y)`` with ``X[i] <=_K Y[i]``;
* a *member* oracle is ``member(X) -> (n,) bool array``;
* a *projector* maps an ``(n, dim)`` array to an ``(n, dim)`` array.

:func:`pointwise` lifts single-point callables to this convention.
"""

import itertools

import numpy as np

from ._validation import DEFAULT_TOL, DimensionError, as_vector
from .cones import Lorentz, Orthant, Product
from .results import Certificate, Method, PolyhedronReport, Verdict
from .sets import project_polyhedron

NO_CE = Verdict.NO_COUNTEREXAMPLE


class SamplerError(ValueError):
    """A sampler produced points outside the set it claims to sample."""


def _unit(u):
    u = as_vector(u, name="u")
    if u.ndim != 1:
        raise DimensionError("normal must be a single vector")
    nrm = np.linalg.norm(u)
    if nrm == 0:
        raise ValueError("normal vector must be nonzero")
    return u / nrm


def bilinear_gap(x, y, u):
    """``<x, y> - <u, x><u, y>`` for a unit normal ``u``; rows are paired."""
    return np.sum(x * y, axis=-1) - (x @ u) * (y @ u)


def _unit_orthogonal(a):
    """A unit vector orthogonal to ``a`` (``a`` needs at least two entries)."""
    if not np.any(a):
        z = np.zeros_like(a)
        z[0] = 1.0
        return z
    _, _, vt = np.linalg.svd(a[None, :])
    return vt[1]


def hyperplane_isotone_orthant(u, tol=DEFAULT_TOL):
    """Coordinate-order test: projection onto ``{<u, x> = 0}`` is isotone for
    the orthant iff ``u_i u_j <= 0`` for all ``i != j``."""
    b = _unit(u)
    prod = np.outer(b, b)
    np.fill_diagonal(prod, -np.inf)
    i, j = np.unravel_index(np.argmax(prod), prod.shape)
    if prod[i, j] <= tol:
        return Certificate(Verdict.PROVEN, Method.CLOSED_FORM)
    eye = np.eye(b.size)
    return Certificate(
        Verdict.REFUTED, Method.CLOSED_FORM, (eye[i], eye[j]),
        note=f"u[{i}]*u[{j}] = {prod[i, j]:.6g} > 0 (unit normal)",
    )


def hyperplane_isotone_lorentz(u, tol=DEFAULT_TOL):
    """Lorentz-cone test: isotone iff the last coordinate of the normal vanishes.

    Needs total dimension at least 3; the 2-dimensional Lorentz cone is a
    rotated quadrant and is handled by :func:`hyperplane_isotone_bilinear`.
    """
    b = _unit(u)
    if b.size < 3:
        raise ValueError("Lorentz closed form needs dimension >= 3 (use the generator test in dim 2)")
    if abs(b[-1]) <= tol:
        return Certificate(Verdict.PROVEN, Method.CLOSED_FORM)
    z = _unit_orthogonal(b[:-1])
    w1 = np.append(z, 1.0)
    w2 = np.append(-z, 1.0)
    return Certificate(
        Verdict.REFUTED, Method.CLOSED_FORM, (w1, w2),
        note=f"last normal coordinate {b[-1]:.6g} != 0; gap at witness = {bilinear_gap(w1, w2, b):.6g}",
    )


def hyperplane_isotone_bilinear(generators, u, tol=DEFAULT_TOL):
    """Generator-pair test for a polyhedral self-dual cone spanned by ``generators``.

    The gap ``<x, y> - <u, x><u, y>`` is bilinear, so it is nonnegative on the
    whole cone iff it is nonnegative on all pairs of generators.
    """
    G = np.atleast_2d(np.asarray(generators, dtype=float))
    if G.size == 0:
        raise ValueError("generator list is empty")
    b = _unit(u)
    if G.shape[1] != b.size:
        raise DimensionError(f"generators have dimension {G.shape[1]}, normal {b.size}")
    if np.min(G @ G.T) < -tol:
        raise ValueError("generators have a negative inner product; they cannot span a self-dual cone")
    Gu = G @ b
    gap = G @ G.T - np.outer(Gu, Gu)
    i, j = np.unravel_index(np.argmin(gap), gap.shape)
    pairs = G.shape[0] * (G.shape[0] + 1) // 2
    if gap[i, j] >= -tol:
        return Certificate(Verdict.PROVEN, Method.GENERATOR_PAIRS, samples_used=pairs)
    return Certificate(
        Verdict.REFUTED, Method.GENERATOR_PAIRS, (G[i], G[j]), pairs,
        note=f"gap {gap[i, j]:.6g} at generators {i}, {j}",
    )


def probe_points(K, u):
    """Deterministic points of ``K`` that expose non-isotone hyperplane projections."""
    if isinstance(K, Product):
        blocks = []
        for part, sl in K.blocks():
            pts = probe_points(part, u[sl])
            emb = np.zeros((pts.shape[0], K.dim))
            emb[:, sl] = pts
            blocks.append(emb)
        return np.vstack(blocks)
    if isinstance(K, Lorentz) and K.dim >= 3:
        a = u[:-1]
        z = _unit_orthogonal(a)
        pts = [np.append(z, 1.0), np.append(-z, 1.0)]
        na = np.linalg.norm(a)
        if na > 0:
            pts += [np.append(a / na, 1.0), np.append(-a / na, 1.0)]
        return np.array(pts)
    G = K.generators()
    if G is not None:
        return G
    return np.zeros((0, K.dim))


def hyperplane_isotone_sampled(K, u, n, seed=None, tol=DEFAULT_TOL):
    """Monte-Carlo falsifier of the generator-pair inequality on ``K``.

    Deterministic probe pairs from :func:`probe_points` are tried before the
    ``n`` random pairs.
    """
    b = _unit(u)
    if b.size != K.dim:
        raise DimensionError(f"normal has dimension {b.size}, cone {K.dim}")
    if n <= 0:
        return Certificate(NO_CE, Method.SAMPLED, samples_used=0, seed=seed)
    pts = probe_points(K, b)
    idx = list(itertools.combinations_with_replacement(range(len(pts)), 2))
    rng = np.random.default_rng(seed)
    X = K.sample(rng, n)
    Y = K.sample(rng, n)
    if idx:
        i, j = np.array(idx).T
        X = np.vstack([pts[i], X])
        Y = np.vstack([pts[j], Y])
    gap = bilinear_gap(X, Y, b)
    bad = np.flatnonzero(gap < -tol)
    used = len(X)
    if bad.size:
        k = bad[0]
        kind = "probe" if k < len(idx) else "random"
        return Certificate(
            Verdict.REFUTED, Method.SAMPLED, (X[k], Y[k]), used, seed,
            note=f"{kind} pair with gap {gap[k]:.6g}",
        )
    return Certificate(NO_CE, Method.SAMPLED, None, used, seed)


def subspace_invariant(K, basis, n, seed=None, tol=DEFAULT_TOL):
    """Falsify ``P_K(S) in S`` for ``S`` the span of ``basis``."""
    B = np.atleast_2d(np.asarray(basis, dtype=float))
    if B.shape[1] != K.dim:
        raise DimensionError(f"basis has dimension {B.shape[1]}, cone {K.dim}")
    sv = np.linalg.svd(B, compute_uv=False)
    if sv.size < B.shape[0] or sv[-1] <= 1e-12 * max(1.0, sv[0]):
        raise ValueError("basis vectors are linearly dependent")
    Q, _ = np.linalg.qr(B.T)
    rng = np.random.default_rng(seed)
    S = rng.standard_normal((n, B.shape[0])) @ B
    PS = K.project(S)
    dist = np.linalg.norm(PS - (PS @ Q) @ Q.T, axis=1)
    bad = np.flatnonzero(dist > tol * np.maximum(1.0, np.linalg.norm(S, axis=1)))
    if bad.size:
        k = bad[0]
        return Certificate(
            Verdict.REFUTED, Method.SAMPLED, (S[k], PS[k]), n, seed,
            note=f"projection leaves the subspace by {dist[k]:.6g}",
        )
    return Certificate(NO_CE, Method.SAMPLED, None, n, seed)


def _facet_method(K, method):
    if method in (None, "auto"):
        if isinstance(K, Orthant):
            return "closed"
        if isinstance(K, Lorentz) and K.dim >= 3:
            return "closed"
        if K.generators() is not None:
            return "bilinear"
        return "sampled"
    if method not in ("closed", "bilinear", "sampled"):
        raise ValueError(f"unknown method {method!r}")
    return method


def certify_hyperplane(K, u, method=None, n=1000, seed=None, tol=DEFAULT_TOL, generators=None):
    """Dispatch to the hyperplane test matching ``K`` and ``method``.

    ``method`` is ``"closed"``, ``"bilinear"``, ``"sampled"`` or ``None`` for
    the strongest test available.
    """
    u = as_vector(u, K.dim, "u")
    if generators is not None and method is None:
        method = "bilinear"
    method = _facet_method(K, method)
    if method == "closed":
        if isinstance(K, Orthant):
            return hyperplane_isotone_orthant(u, tol)
        if isinstance(K, Lorentz):
            return hyperplane_isotone_lorentz(u, tol)
        raise ValueError(f"no closed form for {type(K).__name__}")
    if method == "bilinear":
        G = K.generators() if generators is None else generators
        if G is None:
            raise ValueError(f"{type(K).__name__} is not polyhedral; give generators explicitly")
        return hyperplane_isotone_bilinear(G, u, tol)
    return hyperplane_isotone_sampled(K, u, n, seed, tol)


def certify_polyhedron(K, P, method=None, n=1000, seed=None, tol=DEFAULT_TOL):
    """Certify invariance and isotone projection of a sharp polyhedron facet by facet.

    Offsets are irrelevant: only the facet normals are tested.
    """
    if len(P) == 0:
        raise ValueError("polyhedron has no facets")
    if P.dim != K.dim:
        raise DimensionError(f"polyhedron has dimension {P.dim}, cone {K.dim}")
    facets = [(i, certify_hyperplane(K, h.u, method, n, seed, tol)) for i, h in enumerate(P.halfspaces)]
    return PolyhedronReport(facets, P.sharp)


def pointwise(fn):
    """Lift a single-point callable to act on the rows of a batch."""

    def batched(X):
        X = np.atleast_2d(X)
        return np.array([fn(x) for x in X])

    return batched


def _falsify_pairs(meet_fn, join_fn, member, sampler, n, seed):
    rng = np.random.default_rng(seed)
    if n <= 0:
        return Certificate(NO_CE, Method.SAMPLED, samples_used=0, seed=seed)
    X = np.atleast_2d(sampler(rng, n))
    Y = np.atleast_2d(sampler(rng, n))
    if not (np.all(member(X)) and np.all(member(Y))):
        raise SamplerError("sampler produced points that fail the membership oracle")
    lo = meet_fn(X, Y)
    hi = join_fn(X, Y)
    ok_lo = np.asarray(member(lo), dtype=bool)
    ok_hi = np.asarray(member(hi), dtype=bool)
    bad = np.flatnonzero(~(ok_lo & ok_hi))
    if bad.size:
        k = bad[0]
        which = "meet" if not ok_lo[k] else "join"
        return Certificate(
            Verdict.REFUTED, Method.SAMPLED, (X[k], Y[k]), n, seed,
            note=f"{which} leaves the set",
        )
    return Certificate(NO_CE, Method.SAMPLED, None, n, seed)


def falsify_invariance(K, member, sampler, n, seed=None):
    """Search for ``x, y`` in the set whose meet or join leaves it."""
    return _falsify_pairs(
        lambda X, Y: X - K.project(X - Y),
        lambda X, Y: X + K.project(Y - X),
        member, sampler, n, seed,
    )


def sublattice_check_orthant(member, sampler, n, seed=None):
    """Search for ``x, y`` in the set whose componentwise min or max leaves it."""
    return _falsify_pairs(np.minimum, np.maximum, member, sampler, n, seed)


def falsify_isotonicity(K, projector, sampler, n, seed=None, tol=DEFAULT_TOL):
    """Search for ``x <=_K y`` with ``projector(x) <=_K projector(y)`` false."""
    rng = np.random.default_rng(seed)
    if n <= 0:
        return Certificate(NO_CE, Method.SAMPLED, samples_used=0, seed=seed)
    X, Y = sampler(rng, n)
    X, Y = np.atleast_2d(X), np.atleast_2d(Y)
    if not np.all(K.contains(Y - X, tol)):
        raise SamplerError("pair sampler produced pairs that are not ordered")
    ok = K.contains(np.atleast_2d(projector(Y)) - np.atleast_2d(projector(X)), tol)
    bad = np.flatnonzero(~ok)
    if bad.size:
        k = bad[0]
        return Certificate(
            Verdict.REFUTED, Method.SAMPLED, (X[k], Y[k]), n, seed,
            note="projections of an ordered pair are not ordered",
        )
    return Certificate(NO_CE, Method.SAMPLED, None, n, seed)


def ordered_pair_sampler(K, point_sampler, spread=1.0):
    """Pair sampler ``(x, x + k)`` with ``k`` drawn from ``K``.

    ``spread`` scales the cone draws; a quarter of them are shrunk by 1e-3 so
    nearby ordered pairs are also explored.  For polyhedral cones another
    quarter of the steps are single extreme rays, where order violations of
    a projection are easiest to see.
    """
    G = K.generators()

    def sample(rng, n):
        X = point_sampler(rng, n)
        step = K.sample(rng, n)
        if G is not None:
            ray = rng.random(n) < 0.25
            step[ray] = G[rng.integers(0, len(G), int(ray.sum()))] * np.abs(rng.standard_normal((int(ray.sum()), 1)))
        scale = spread * np.where(rng.random(n) < 0.25, 1e-3, 1.0)
        return X, X + scale[:, None] * step

    return sample


def gaussian_sampler(dim, center=0.0, radius=1.0):
    def sample(rng, n):
        return center + radius * rng.standard_normal((n, dim))

    return sample


def polyhedron_sampler(P, radius=2.0, center=None, tol=1e-12):
    """Points of ``P`` obtained by projecting Gaussian draws around ``center``.

    Draws already inside stay interior; the rest land on faces, which is
    where meet/join violations show up.
    """
    if center is None:
        center = project_polyhedron(P, np.zeros(P.dim), tol)

    def sample(rng, n):
        Z = center + radius * rng.standard_normal((n, P.dim))
        return project_polyhedron(P, Z, tol)

    return sample


def polyhedron_member(P, tol=1e-8):
    return lambda X: P.contains(X, tol)


def polyhedron_projector(P, tol=1e-12):
    return lambda X: project_polyhedron(P, X, tol)


def recheck_witness(cert, predicate):
    """True when a REFUTED certificate's witness really fails ``predicate(x, y)``."""
    if not cert.refuted:
        return False
    x, y = cert.witness
    return not bool(predicate(x, y))


__all__ = [
    "SamplerError",
    "bilinear_gap",
    "certify_hyperplane",
    "certify_polyhedron",
    "falsify_invariance",
    "falsify_isotonicity",
    "gaussian_sampler",
    "hyperplane_isotone_bilinear",
    "hyperplane_isotone_lorentz",
    "hyperplane_isotone_orthant",
    "hyperplane_isotone_sampled",
    "ordered_pair_sampler",
    "pointwise",
    "polyhedron_member",
    "polyhedron_projector",
    "polyhedron_sampler",
    "probe_points",
    "recheck_witness",
    "sublattice_check_orthant",
    "subspace_invariant",
]
