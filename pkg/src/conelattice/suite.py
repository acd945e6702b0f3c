"""Randomized property suite for cone projections and the induced meet/join.

Each property returns the worst observed error and the bound it is held to;
a property passes when ``worst <= bound``.  The Lipschitz property also
reports the largest ratio seen, i.e. the empirical best constant.
"""

from dataclasses import dataclass

import numpy as np

from .cones import Lorentz, Orthant, Product, RotatedOrthant

CONE_FAMILIES = ("orthant", "lorentz", "rotated", "product")

LIPSCHITZ_CONSTANT = 1.5


@dataclass
class PropertyResult:
    name: str
    cone: str
    dim: int
    worst: float
    bound: float
    extra: dict = None

    @property
    def passed(self):
        return bool(self.worst <= self.bound)

    @property
    def slack(self):
        return self.bound - self.worst

    def to_dict(self):
        d = {
            "property": self.name,
            "cone": self.cone,
            "dim": self.dim,
            "passed": self.passed,
            "worst": float(self.worst),
            "bound": float(self.bound),
            "slack": float(self.slack),
        }
        if self.extra:
            d.update(self.extra)
        return d


def make_cone(family, dim, seed=0):
    """Representative cone of ``family`` in dimension ``dim``."""
    if family == "orthant":
        return Orthant(dim)
    if family == "lorentz":
        return Lorentz(dim)
    if family == "rotated":
        rng = np.random.default_rng(seed)
        q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
        return RotatedOrthant(q * np.sign(np.diag(r)))
    if family == "product":
        if dim < 3:
            return Product((Orthant(1),) * dim)
        return Product((Orthant(1), Lorentz(dim - 1)))
    raise ValueError(f"unknown cone family {family!r}")


def standard_meet(K, X, Y):
    return X - K.project(X - Y)


def standard_join(K, X, Y):
    return X + K.project(Y - X)


def faulty_meet(K, X, Y):
    """Meet with the outer subtraction dropped; used to check the harness."""
    return K.project(X - Y)


def _points(rng, n, dim):
    # mixed magnitudes so both tiny and large coordinates are exercised
    scale = 10.0 ** rng.uniform(-1, 1, size=(n, 1))
    return scale * rng.standard_normal((n, dim))


def _norm(a):
    return np.linalg.norm(a, axis=-1)


def _rows_dot(a, b):
    return np.sum(a * b, axis=-1)


def run_properties(K, n, seed, meet=standard_meet, join=standard_join, label=None):
    """Evaluate every property on ``n`` random samples for the cone ``K``."""
    rng = np.random.default_rng(seed)
    d = K.dim
    label = label or type(K).__name__.lower()
    X, Y, Z, W = (_points(rng, n, d) for _ in range(4))
    P = K.project
    out = []

    def add(name, worst, bound, **extra):
        out.append(PropertyResult(name, label, d, float(worst), bound, extra or None))

    # projection and Moreau decomposition
    plus, minus = P(X), P(-X)
    add("moreau_reconstruction", _norm(plus - minus - X).max(), 1e-9)
    add("moreau_orthogonality", np.abs(_rows_dot(plus, minus)).max(), 1e-9)
    add("projection_idempotent", _norm(P(plus) - plus).max(), 1e-9)
    add("nonexpansive", (_norm(P(X) - P(Y)) - _norm(X - Y)).max(), 1e-9)
    ka, kb = K.sample(rng, n), K.sample(rng, n)
    add("self_duality", (-_rows_dot(ka, kb)).max(), 1e-9)
    add("variational_characterization", _rows_dot(plus - X, plus - ka).max(), 1e-9)

    mxy, jxy = meet(K, X, Y), join(K, X, Y)
    in_k = lambda V: K.contains(V, 1e-8)  # noqa: E731
    add("ll_i_alternate_forms",
        max(_norm(mxy - (Y - P(Y - X))).max(), _norm(jxy - (Y + P(X - Y))).max()), 1e-8)
    add("ll_ii_commutative",
        max(_norm(mxy - meet(K, Y, X)).max(), _norm(jxy - join(K, Y, X)).max()), 1e-8)
    bounds_ok = in_k(X - mxy) & in_k(Y - mxy) & in_k(jxy - X) & in_k(jxy - Y)
    add("ll_iii_iv_bounds", float(np.count_nonzero(~bounds_ok)), 0.0)
    add("ll_v_sum", _norm(mxy + jxy - X - Y).max(), 1e-9)
    add("ll_vi_translation",
        max(_norm(meet(K, X + Z, Y + Z) - mxy - Z).max(), _norm(join(K, X + Z, Y + Z) - jxy - Z).max()), 1e-8)
    lam = rng.uniform(0.01, 100.0, size=(n, 1))
    add("ll_vii_homogeneity",
        max(_norm(meet(K, lam * X, lam * Y) - lam * mxy).max(),
            _norm(join(K, lam * X, lam * Y) - lam * jxy).max()), 1e-8)
    add("ll_viii_orthogonality", np.abs(_rows_dot(X - mxy, jxy - X)).max(), 1e-9)
    add("ll_ix_duality", _norm(join(K, -X, -Y) + mxy).max(), 1e-8)

    gap = _norm(X - Z) + _norm(Y - W)
    dj = _norm(jxy - join(K, Z, W))
    dm = _norm(mxy - meet(K, Z, W))
    ratio = np.maximum(dj, dm) / np.maximum(gap, 1e-300)
    add("ll_x_lipschitz", (np.maximum(dj, dm) - LIPSCHITZ_CONSTANT * gap).max(), 1e-9,
        constant=LIPSCHITZ_CONSTANT, empirical_best_constant=float(ratio.max()))

    lam, mu = rng.random((n, 1)), rng.random((n, 1))
    zm, wm = lam * X + (1 - lam) * mxy, mu * Y + (1 - mu) * mxy
    zj, wj = lam * X + (1 - lam) * jxy, mu * Y + (1 - mu) * jxy
    add("ll_xi_segment_stability",
        max(_norm(meet(K, zm, wm) - mxy).max(), _norm(join(K, zj, wj) - jxy).max()), 1e-8)

    # complementary pairs x = P_K v, y = P_K(-v) have meet exactly 0
    cx, cy = P(Z), P(-Z)
    zero = _norm(meet(K, cx, cy)) <= 1e-10
    xii = np.abs(_rows_dot(cx, cy))[zero]
    add("ll_xii_complementary", xii.max() if xii.size else 0.0, 1e-8,
        pairs_with_zero_meet=int(np.count_nonzero(zero)))

    xs, ys = X - mxy, Y - mxy
    corner = np.abs(_rows_dot(xs, ys)).max() if np.all(in_k(xs) & in_k(ys)) else np.inf
    add("ketdiminv_orthogonal_corner", corner, 1e-8)

    add("minimal_rectangle_closure", _rectangle_closure(K, X, Y, mxy, jxy, rng, meet, join), 1e-8)

    A = _points(rng, n, d)
    lhs = (_rows_dot(X, Y) + _norm(X) * _norm(Y)) * _norm(A) ** 2
    add("ltr_inequality", (_rows_dot(A, X) * _rows_dot(A, Y) - lhs).max(), 1e-9)
    return out


def _rectangle_closure(K, X, Y, mxy, jxy, rng, meet, join):
    """Worst violation of meet/join of rectangle points staying in the rectangle."""
    e1, e2 = X - mxy, Y - mxy
    ok = (_norm(e1) > 1e-3) & (_norm(e2) > 1e-3)
    if not np.any(ok):
        return 0.0
    e1, e2, base = e1[ok], e2[ok], mxy[ok]
    m = base.shape[0]

    def pts():
        a, b = rng.random((m, 1)), rng.random((m, 1))
        return base + a * e1 + b * e2

    U, V = pts(), pts()
    worst = 0.0
    for R in (meet(K, U, V), join(K, U, V)):
        rel = R - base
        a = _rows_dot(rel, e1) / _rows_dot(e1, e1)
        b = _rows_dot(rel, e2) / _rows_dot(e2, e2)
        off_plane = _norm(rel - a[:, None] * e1 - b[:, None] * e2)
        outside = np.maximum.reduce([-a, a - 1, -b, b - 1, np.zeros_like(a)])
        worst = max(worst, float(off_plane.max()), float(outside.max()))
    return worst


def run_suite(families=("orthant", "lorentz"), dims=range(2, 7), n=500, seed=42, meet=standard_meet,
              join=standard_join):
    """Run the properties for every (family, dim) pair in a fixed order."""
    results = []
    for fam in families:
        for d in dims:
            if fam == "lorentz" and d < 2:
                continue
            K = make_cone(fam, d, seed)
            results.extend(run_properties(K, n, seed + d, meet, join, label=fam))
    return results
