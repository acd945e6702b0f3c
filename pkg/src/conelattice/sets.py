"""Metric projection onto hyperplanes, halfspaces, affine sets and H-polyhedra.

Polyhedra are intersections of halfspaces ``{x: <u, x> <= b}``.  Projection
onto them uses Dykstra's cyclic scheme, vectorized over batches of points so
that falsifiers can project thousands of samples at once.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import lsq_linear, nnls

from ._validation import DEFAULT_TOL, DimensionError, SchemaError, as_vector, check_tol
from .results import Certificate, Method, Verdict


class ConvergenceError(RuntimeError):
    """Dykstra's iteration ran out of budget; ``residuals`` holds the final
    (max violation, max change of the Dykstra increments over a sweep)."""

    def __init__(self, msg, residuals):
        super().__init__(msg)
        self.residuals = residuals


class InfeasibleError(ConvergenceError):
    """The constraints are inconsistent, or the iteration stopped contracting."""


def _normal(u):
    u = as_vector(u, name="u")
    if u.ndim != 1:
        raise DimensionError("normal must be a single vector")
    if not np.any(u):
        raise ValueError("normal vector must be nonzero")
    return u


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """``{x: <u, x> = b}``."""

    u: np.ndarray
    b: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "u", _normal(self.u))
        object.__setattr__(self, "b", float(self.b))

    @classmethod
    def through(cls, u, a):
        """Hyperplane with normal ``u`` passing through the point ``a``."""
        u = _normal(u)
        return cls(u, float(u @ as_vector(a, u.size, "a")))

    @property
    def dim(self):
        return self.u.size

    def contains(self, x, tol=DEFAULT_TOL):
        return np.abs(np.asarray(x) @ self.u - self.b) <= tol * np.linalg.norm(self.u)

    def basis(self):
        """Orthonormal basis (rows) of the direction subspace ``{x: <u, x> = 0}``."""
        _, _, vt = np.linalg.svd(self.u[None, :])
        return vt[1:]

    def to_dict(self):
        return {"u": self.u.tolist(), "b": self.b}


@dataclass(frozen=True, eq=False)
class Halfspace:
    """``{x: <u, x> <= b}``."""

    u: np.ndarray
    b: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "u", _normal(self.u))
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self):
        return self.u.size

    @property
    def boundary(self):
        return Hyperplane(self.u, self.b)

    def contains(self, x, tol=DEFAULT_TOL):
        return np.asarray(x) @ self.u - self.b <= tol * np.linalg.norm(self.u)

    def to_dict(self):
        return {"u": self.u.tolist(), "b": self.b}


class Polyhedron:
    """Finite intersection of halfspaces.

    ``sharp`` records the caller's claim that no halfspace is redundant; it is
    not verified.
    """

    def __init__(self, halfspaces, sharp=True):
        halfspaces = [h if isinstance(h, Halfspace) else Halfspace(*h) for h in halfspaces]
        if not halfspaces:
            raise ValueError("a polyhedron needs at least one halfspace")
        dims = {h.dim for h in halfspaces}
        if len(dims) != 1:
            raise DimensionError(f"halfspaces of mixed dimension: {sorted(dims)}")
        self.halfspaces = halfspaces
        self.sharp = bool(sharp)
        self.A = np.array([h.u for h in halfspaces])
        self.b = np.array([h.b for h in halfspaces])

    @classmethod
    def from_arrays(cls, A, b, sharp=True):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).reshape(-1)
        if A.shape[0] != b.size:
            raise DimensionError(f"{A.shape[0]} normals but {b.size} offsets")
        return cls([Halfspace(u, bi) for u, bi in zip(A, b)], sharp)

    @classmethod
    def box(cls, lo, hi):
        lo = as_vector(lo, name="lo")
        hi = as_vector(hi, lo.size, "hi")
        if np.any(lo > hi):
            raise ValueError("box needs lo <= hi")
        eye = np.eye(lo.size)
        return cls.from_arrays(np.vstack([eye, -eye]), np.concatenate([hi, -lo]))

    @property
    def dim(self):
        return self.A.shape[1]

    def __len__(self):
        return len(self.halfspaces)

    def __repr__(self):
        return f"Polyhedron(dim={self.dim}, halfspaces={len(self)}, sharp={self.sharp})"

    def facets(self):
        return [h.boundary for h in self.halfspaces]

    def contains(self, x, tol=DEFAULT_TOL):
        x = np.asarray(x, dtype=float)
        slack = (x @ self.A.T - self.b) / np.linalg.norm(self.A, axis=1)
        return np.all(slack <= tol, axis=-1)

    def negated(self):
        """The polyhedron ``-P``."""
        return Polyhedron.from_arrays(-self.A, self.b, self.sharp)

    def translated(self, a):
        """The polyhedron ``a + P``."""
        a = as_vector(a, self.dim, "a")
        return Polyhedron.from_arrays(self.A, self.b + self.A @ a, self.sharp)

    def cylinder(self):
        """``P x R``: the same constraints with a free extra last coordinate."""
        A = np.column_stack([self.A, np.zeros(len(self))])
        return Polyhedron.from_arrays(A, self.b, self.sharp)

    def to_dict(self):
        return {"halfspaces": [h.to_dict() for h in self.halfspaces], "sharp": self.sharp}

    @classmethod
    def from_dict(cls, d):
        try:
            hs = [Halfspace(h["u"], h["b"]) for h in d["halfspaces"]]
            return cls(hs, d.get("sharp", True))
        except DimensionError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"invalid polyhedron: {exc}") from None


def project_hyperplane(H, x):
    x = as_vector(x, H.dim)
    u = H.u
    return x - np.multiply.outer((x @ u - H.b) / (u @ u), u)


def project_halfspace(Hm, x):
    x = as_vector(x, Hm.dim)
    u = Hm.u
    excess = np.maximum(x @ u - Hm.b, 0.0)
    return x - np.multiply.outer(excess / (u @ u), u)


def project_affine(U, b, x):
    """Projection onto ``{z: U z = b}`` via the least-squares normal equations."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    x = as_vector(x, U.shape[1])
    if U.shape[0] != b.size:
        raise DimensionError(f"{U.shape[0]} constraints but {b.size} offsets")
    r = x @ U.T - b
    # min-norm correction: U^T (U U^T)^+ r
    coef = np.linalg.lstsq(U @ U.T, r.T, rcond=None)[0]
    return x - (U.T @ coef).T


_EMPTY = object()


def _nnls_bvls(E, f):
    return lsq_linear(E, f, bounds=(0.0, np.inf), method="bvls", tol=1e-15).x


def _ldp_project(A, b, x, feas_tol):
    """Exact projection of one point onto ``{z: A z <= b}`` through the
    least-distance reduction to nonnegative least squares.

    The reduction yields multipliers ``lam >= 0`` with ``z = x - A^T lam``, so
    a candidate is the projection iff it is feasible and complementary; this
    is checked because ``nnls`` occasionally stops at a non-optimal point, in
    which case bounded-variable least squares is tried.  Returns the point,
    ``_EMPTY`` for a verified infeasibility certificate, or ``None``.
    """
    E = np.vstack([-A.T, A @ x - b])
    f = np.zeros(E.shape[0])
    f[-1] = 1.0
    scale = 1.0 + np.linalg.norm(x) + np.abs(b).max()
    for solve in (lambda E, f: nnls(E, f, maxiter=50 * E.shape[1])[0], _nnls_bvls):
        u = solve(E, f)
        r = E @ u - f
        if r[-1] > -1e-12:
            # Farkas: u >= 0, A^T u = 0 and b^T u < 0 means no feasible point
            if np.linalg.norm(A.T @ u) <= 1e-9 * np.abs(u).sum() * scale and b @ u < 0:
                return _EMPTY
            continue
        lam = u / -r[-1]
        z = x - lam @ A
        slack = b - A @ z
        if np.min(slack / np.linalg.norm(A, axis=1)) < -feas_tol:
            continue
        if lam @ np.maximum(slack, 0.0) <= 1e-12 * scale**2:
            return z
    return None


def _is_projection(A, norms, b, X, lam, Z, thresh):
    """Rows where ``Z = X - lam A`` with ``lam >= 0`` satisfy the optimality
    conditions: feasibility within ``thresh`` and complementary slackness."""
    slack = b - Z @ A.T
    scale = 1.0 + np.linalg.norm(X, axis=1) + np.abs(b).max(axis=-1)
    feasible = np.min(slack / norms, axis=1) >= -thresh
    nonneg = np.min(lam, axis=1) >= -1e-12 * scale
    comp = np.sum(np.maximum(lam, 0.0) * np.abs(slack), axis=1) <= 1e-12 * scale**2
    return feasible & nonneg & comp


def _active_set_solve(A, norms, B, X, lam_est, thresh):
    """Solve the projection exactly on the active set suggested by the Dykstra
    multiplier estimates; rows are grouped by their active pattern."""
    n, q = lam_est.shape
    Z = np.empty_like(X)
    ok = np.zeros(n, dtype=bool)
    cut = 1e-9 * (1.0 + np.linalg.norm(X, axis=1))
    active = lam_est > cut[:, None]
    patterns, inverse = np.unique(active, axis=0, return_inverse=True)
    for k, S in enumerate(patterns):
        rows = np.flatnonzero(inverse.reshape(-1) == k)
        if not S.any():
            continue
        As = A[S]
        R = X[rows] @ As.T - B[rows][:, S]
        lam_s = R @ np.linalg.pinv(As @ As.T)
        lam = np.zeros((rows.size, q))
        lam[:, S] = lam_s
        Zr = X[rows] - lam_s @ As
        good = _is_projection(A, norms, B[rows], X[rows], lam, Zr, thresh[rows])
        Z[rows[good]] = Zr[good]
        ok[rows[good]] = True
    return Z, ok


def _dykstra(A, B, X, tol, max_iter):
    """Batched Dykstra projection of the rows of ``X`` onto ``{z: A z <= B}``.

    ``B`` has shape ``(q,)`` or ``(n, q)``.  Near corners where several
    constraints meet Dykstra can crawl, so rows still running after 8, 16,
    32, ... sweeps are finished exactly: first on the active set suggested by
    the Dykstra multipliers, then by a least-distance solve.  Either result is
    kept only if it passes the optimality check.
    """
    n = X.shape[0]
    q = A.shape[0]
    B = np.broadcast_to(B, (n, q))
    norms = np.linalg.norm(A, axis=1)
    inv_sq = 1.0 / norms**2
    Y = X.copy()
    incr = np.zeros((q, n, X.shape[1]))
    # stopping thresholds scale with the size of each input point
    thresh = tol * (1.0 + np.linalg.norm(X, axis=1))
    active = np.arange(n)
    viol_hist, disp_hist = [], []
    viol = disp = 0.0
    next_polish = 8
    for it in range(1, max_iter + 1):
        y = Y[active]
        b = B[active]
        # the iterate can stall for a whole sweep while the increments still
        # move, so convergence is judged on the change of the increments
        change = np.zeros(len(active))
        for i in range(q):
            z = y + incr[i, active]
            excess = np.maximum(z @ A[i] - b[:, i], 0.0)
            y = z - np.outer(excess * inv_sq[i], A[i])
            change += np.sum((incr[i, active] - (z - y)) ** 2, axis=1)
            incr[i, active] = z - y
        Y[active] = y
        d = np.sqrt(change)
        v = np.max((y @ A.T - b) / norms, axis=1)
        done = (d <= thresh[active]) & (v <= thresh[active])
        viol, disp = float(v.max()), float(d.max())
        viol_hist.append(viol)
        disp_hist.append(disp)
        if it == next_polish:
            next_polish *= 2
            pend = np.flatnonzero(~done)
            rows = active[pend]
            lam_est = np.einsum("qnd,qd->nq", incr[:, rows], A) * inv_sq
            Z, ok = _active_set_solve(A, norms, B[rows], X[rows], lam_est, thresh[rows])
            Y[rows[ok]] = Z[ok]
            done[pend[ok]] = True
            for j in pend[~ok]:
                row = active[j]
                zp = _ldp_project(A, B[row], X[row], thresh[row])
                if zp is _EMPTY:
                    raise InfeasibleError(
                        "constraints are inconsistent; polyhedron is empty",
                        {"max_violation": viol, "max_increment_change": disp, "iterations": it},
                    )
                if zp is not None:
                    Y[row] = zp
                    done[j] = True
        active = active[~done]
        if active.size == 0:
            return Y
    residuals = {"max_violation": viol, "max_increment_change": disp, "iterations": max_iter}
    h = len(disp_hist) // 2
    # an empty intersection leaves both the increment change and the
    # violation bounded away from zero; slow convergence shrinks them
    if disp > 0.9 * disp_hist[h] and viol > 0.9 * viol_hist[h] and viol > np.sqrt(tol):
        raise InfeasibleError(
            f"increment change did not contract ({disp_hist[h]:.3g} -> {disp:.3g}); "
            "polyhedron is probably empty",
            residuals,
        )
    raise ConvergenceError(f"no convergence in {max_iter} sweeps: {residuals}", residuals)


def project_polyhedron(P, x, tol=1e-12, max_iter=10000):
    """Nearest point of ``P`` to ``x`` (or to each row of a batch)."""
    x = as_vector(x, P.dim)
    check_tol(tol)
    X = x.reshape(-1, P.dim)
    return _dykstra(P.A, P.b, X, tol, max_iter).reshape(x.shape)


def project_cylinder(C, x, tol=1e-12, max_iter=10000):
    """Projection onto ``C x R``: project the leading coordinates onto ``C``
    and keep the last one."""
    x = as_vector(x, C.dim + 1)
    out = x.copy()
    out[..., :-1] = project_polyhedron(C, x[..., :-1], tol, max_iter)
    return out


def charac_residual(p, x, ys):
    """Largest ``<p - x, p - y>`` over the rows ``y`` of ``ys``; nonpositive when
    ``p`` is the projection of ``x`` onto a convex set containing ``ys``."""
    p = np.asarray(p, dtype=float)
    return float(np.max((np.asarray(ys) - p) @ (x - p)))


def projection_identities_check(D, n=500, seed=None, tol=1e-6, scale=None):
    """Check reflection, translation and segment identities of ``P_D`` on random data.

    For sampled ``x, y`` and ``t`` in ``[0, 1]``:

    * ``P_D(-x) = -P_{-D}(x)``
    * ``P_{x+D}(y) = x + P_D(y - x)``
    * ``P_D(t x + (1 - t) P_D x) = P_D x``

    The first failing sample is returned as the witness ``(x, y)``.
    """
    rng = np.random.default_rng(seed)
    if scale is None:
        scale = 1.0 + 2.0 * float(np.max(np.abs(D.b)))
    X = scale * rng.standard_normal((n, D.dim))
    Y = scale * rng.standard_normal((n, D.dim))
    t = rng.random(n)
    if n == 0:
        return Certificate(Verdict.NO_COUNTEREXAMPLE, Method.SAMPLED, seed=seed)
    dtol = 1e-3 * tol
    proj = lambda P, Z: _dykstra(P.A, P.b, Z, dtol, 100000)  # noqa: E731
    PX = proj(D, X)
    err_en = np.linalg.norm(proj(D, -X) + proj(D.negated(), X), axis=1)
    shifted_b = D.b + X @ D.A.T
    err_et = np.linalg.norm(
        _dykstra(D.A, shifted_b, Y, dtol, 100000) - (X + proj(D, Y - X)), axis=1
    )
    seg = t[:, None] * X + (1 - t[:, None]) * PX
    err_sun = np.linalg.norm(proj(D, seg) - PX, axis=1)
    worst = np.maximum(np.maximum(err_en, err_et), err_sun)
    bad = np.flatnonzero(worst > tol)
    if bad.size:
        i = bad[0]
        names = [k for k, e in (("reflection", err_en), ("translation", err_et), ("segment", err_sun)) if e[i] > tol]
        return Certificate(
            Verdict.REFUTED, Method.SAMPLED, (X[i], Y[i]), n, seed,
            note=f"failed {', '.join(names)} at t={t[i]:.6g}",
        )
    return Certificate(
        Verdict.NO_COUNTEREXAMPLE, Method.SAMPLED, None, n, seed,
        note=f"max identity error {float(worst.max()):.3g}",
    )
