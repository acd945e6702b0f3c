"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line (also collected into the
pytest terminal summary) and then asserts the same condition.  Reference
values are computed with formulas independent of the code under test where
one exists: componentwise min/max, clamping, the halfspace formula, the
Moreau decomposition identities.
"""

import time

import numpy as np

from conelattice import (
    Halfspace,
    Lorentz,
    Orthant,
    Polyhedron,
    Verdict,
    certify_polyhedron,
    falsify_invariance,
    falsify_isotonicity,
    hyperplane_isotone_bilinear,
    hyperplane_isotone_lorentz,
    hyperplane_isotone_orthant,
    hyperplane_isotone_sampled,
    join,
    meet,
    ncp_residual,
    ncp_solve,
    affine_map,
    project_halfspace,
    project_polyhedron,
    projection_identities_check,
    sublattice_check_orthant,
)
from conelattice.certify import (
    bilinear_gap,
    gaussian_sampler,
    ordered_pair_sampler,
    polyhedron_member,
    polyhedron_projector,
    polyhedron_sampler,
)
from conelattice.sets import charac_residual
from conelattice.suite import CONE_FAMILIES, LIPSCHITZ_CONSTANT, make_cone, run_suite

from conftest import ACCEPTANCE_LINES
from corpus import cylinder, lorentz_corpus, orthant_corpus, random_box, random_polygon, rotate, sliced_box

DIMS = range(2, 11)


def report(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} [{number:>2}] {title}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_criterion_01_moreau_suite():
    t0 = time.perf_counter()
    worst_rec = worst_orth = 0.0
    count = 0
    for fam in CONE_FAMILIES:
        for d in DIMS:
            K = make_cone(fam, d, seed=d)
            X = 3 * np.random.default_rng(100 + d).standard_normal((500, d))
            plus, minus = K.project(X), K.project(-X)
            worst_rec = max(worst_rec, np.linalg.norm(plus - minus - X, axis=1).max())
            worst_orth = max(worst_orth, np.abs(np.sum(plus * minus, axis=1)).max())
            count += len(X)
    elapsed = time.perf_counter() - t0
    ok = worst_rec <= 1e-9 and worst_orth <= 1e-9 and elapsed < 5
    report(1, "Moreau decomposition", ok,
           f"{count} samples, reconstruction {worst_rec:.2e}, orthogonality {worst_orth:.2e}, {elapsed:.2f}s")


def test_criterion_02_lattice_items():
    t0 = time.perf_counter()
    results = run_suite(CONE_FAMILIES, DIMS, n=500, seed=42)
    elapsed = time.perf_counter() - t0
    items = [r for r in results if r.name.startswith("ll_")]
    names = {r.name for r in items}
    expected = {
        "ll_i_alternate_forms", "ll_ii_commutative", "ll_iii_iv_bounds", "ll_v_sum",
        "ll_vi_translation", "ll_vii_homogeneity", "ll_viii_orthogonality", "ll_ix_duality",
        "ll_x_lipschitz", "ll_xi_segment_stability", "ll_xii_complementary",
    }
    failed = [r.to_dict() for r in items if not r.passed]
    loose = [r.name for r in items if r.name != "ll_x_lipschitz" and r.bound > 1e-8]
    lip = [r for r in items if r.name == "ll_x_lipschitz"]
    lip_ok = all(r.extra["constant"] == 1.5 for r in lip) and LIPSCHITZ_CONSTANT == 1.5
    best = max(r.extra["empirical_best_constant"] for r in lip)
    ok = names == expected and not failed and not loose and lip_ok and elapsed < 10
    report(2, "lattice operation items", ok,
           f"{len(items)} checks over {len(CONE_FAMILIES)} families x dims 2-10, {len(failed)} failed, "
           f"Lipschitz constant 3/2 (largest observed ratio {best:.3f}), {elapsed:.2f}s")


def test_criterion_03_orthant_min_max():
    rng = np.random.default_rng(3)
    worst = 0.0
    per_dim = 10000 // len(DIMS) + 1
    total = 0
    for d in DIMS:
        X = 10 * rng.standard_normal((per_dim, d))
        Y = 10 * rng.standard_normal((per_dim, d))
        K = Orthant(d)
        worst = max(worst, np.abs(meet(K, X, Y) - np.minimum(X, Y)).max(),
                    np.abs(join(K, X, Y) - np.maximum(X, Y)).max())
        total += per_dim
    ok = worst <= 1e-12 and total >= 10000
    report(3, "orthant meet/join = min/max", ok, f"{total} pairs, max deviation {worst:.2e}")


def _random_normals(rng, d, n, kind):
    """Normals mixing generic, sparse and exactly isotone shapes."""
    U = rng.standard_normal((n, d))
    if kind == "orthant":
        # sign pattern with at most one positive and one negative entry
        special = rng.random(n) < 0.4
        for k in np.flatnonzero(special):
            u = np.zeros(d)
            i, j = rng.choice(d, 2, replace=False)
            u[i] = abs(rng.standard_normal())
            if rng.random() < 0.8:
                u[j] = -abs(rng.standard_normal())
            U[k] = u
        sparse = (~special) & (rng.random(n) < 0.3)
        U[sparse] *= rng.random((int(sparse.sum()), d)) < 0.5
    else:
        flat = rng.random(n) < 0.5
        U[flat, -1] = 0.0
    U[np.linalg.norm(U, axis=1) == 0, 0] = 1.0
    return U


def test_criterion_04_hyperplane_certifier_agreement():
    rng = np.random.default_rng(4)
    disagreements = []
    bad_witness = 0
    counts = {"orthant": [0, 0], "lorentz": [0, 0]}
    for k in range(1000):
        d = int(rng.integers(2, 11))
        u = _random_normals(rng, d, 1, "orthant")[0]
        closed = hyperplane_isotone_orthant(u)
        gens = hyperplane_isotone_bilinear(np.eye(d), u)
        samp = hyperplane_isotone_sampled(Orthant(d), u, 500, seed=k)
        verdicts = (closed.refuted, gens.refuted, samp.refuted)
        counts["orthant"][closed.refuted] += 1
        if len(set(verdicts)) != 1:
            disagreements.append(("orthant", u))
        for c in (closed, gens, samp):
            if c.refuted:
                x, y = c.witness
                b = u / np.linalg.norm(u)
                bad_witness += not (np.all(x >= 0) and np.all(y >= 0) and bilinear_gap(x, y, b) < 0)
    for k in range(1000):
        d = int(rng.integers(3, 11))
        u = _random_normals(rng, d, 1, "lorentz")[0]
        closed = hyperplane_isotone_lorentz(u)
        samp = hyperplane_isotone_sampled(Lorentz(d), u, 500, seed=k)
        counts["lorentz"][closed.refuted] += 1
        if closed.refuted != samp.refuted:
            disagreements.append(("lorentz", u))
        for c in (closed, samp):
            if c.refuted:
                x, y = c.witness
                b = u / np.linalg.norm(u)
                inside = Lorentz(d).contains(np.vstack([x, y]), 1e-12).all()
                bad_witness += not (inside and bilinear_gap(x, y, b) < 0)
    both_kinds = all(min(v) > 0 for v in counts.values())
    ok = not disagreements and not bad_witness and both_kinds
    report(4, "hyperplane certifier agreement", ok,
           f"orthant proven/refuted {counts['orthant'][0]}/{counts['orthant'][1]}, "
           f"lorentz {counts['lorentz'][0]}/{counts['lorentz'][1]}, "
           f"{len(disagreements)} disagreements, {bad_witness} invalid witnesses")


def _chain(K, P, seed):
    """Certificate, falsifiers and witness re-checks for one polyhedron."""
    rep = certify_polyhedron(K, P)
    member = polyhedron_member(P)
    project = polyhedron_projector(P)
    inv = falsify_invariance(K, member, polyhedron_sampler(P, 2.0), 5000, seed)
    ctr = project_polyhedron(P, np.zeros(P.dim))
    iso = falsify_isotonicity(K, project, ordered_pair_sampler(K, gaussian_sampler(P.dim, ctr, 2.0), 2.0),
                              5000, seed, 1e-8)
    agree = (rep.invariant is Verdict.PROVEN) == (inv.verdict is Verdict.NO_COUNTEREXAMPLE)
    agree &= rep.invariant is not Verdict.PROVEN or iso.verdict is Verdict.NO_COUNTEREXAMPLE

    valid = True
    for i, c in rep.per_facet:
        if c.refuted:
            x, y = c.witness
            u = P.A[i] / np.linalg.norm(P.A[i])
            valid &= bool(K.contains(np.vstack([x, y]), 1e-9).all() and bilinear_gap(x, y, u) < 0)
    if inv.refuted:
        x, y = inv.witness
        pair_in = member(np.vstack([x, y])).all()
        out = ~member(np.vstack([x - K.project(x - y), x + K.project(y - x)]))
        valid &= bool(pair_in and out.any())
    if iso.refuted:
        x, y = iso.witness
        valid &= bool(K.contains(y - x, 1e-8) and not K.contains(project(y) - project(x), 1e-8).all())
    return agree, valid, rep.invariant


def test_criterion_05_polyhedron_chain():
    t0 = time.perf_counter()
    summary = []
    all_ok = True
    for name in ("orthant", "lorentz", "rotated"):
        rng = np.random.default_rng(5)
        corpus = lorentz_corpus(rng, 100) if name == "lorentz" else orthant_corpus(rng, 100)
        disagree = invalid = proven = 0
        for k, (_, P) in enumerate(corpus):
            if name == "orthant":
                K = Orthant(P.dim)
            elif name == "lorentz":
                K = Lorentz(P.dim)
            else:
                K = make_cone("rotated", P.dim, k)
                P = rotate(P, K.q)
            agree, valid, verdict = _chain(K, P, 1000 + k)
            disagree += not agree
            invalid += not valid
            proven += verdict is Verdict.PROVEN
        all_ok &= disagree == 0 and invalid == 0 and 0 < proven < len(corpus)
        summary.append(f"{name} {proven}/{len(corpus)} proven, {disagree} disagreements, {invalid} bad witnesses")
    report(5, "polyhedron certificate chain", all_ok,
           "; ".join(summary) + f", {time.perf_counter() - t0:.0f}s")


def test_criterion_06_lorentz_cylinders():
    rng = np.random.default_rng(6)
    failures = 0
    for k in range(50):
        C = random_box(rng, 2) if k % 2 else random_polygon(rng, 2)
        P = C.cylinder()
        K = Lorentz(3)
        rep = certify_polyhedron(K, P)
        inv = falsify_invariance(K, polyhedron_member(P), polyhedron_sampler(P, 2.0), 5000, 600 + k)
        ctr = project_polyhedron(P, np.zeros(3))
        iso = falsify_isotonicity(K, polyhedron_projector(P),
                                  ordered_pair_sampler(K, gaussian_sampler(3, ctr, 2.0), 2.0), 5000, 600 + k, 1e-8)
        ok = (rep.invariant is Verdict.PROVEN and inv.verdict is Verdict.NO_COUNTEREXAMPLE
              and iso.verdict is Verdict.NO_COUNTEREXAMPLE)
        failures += not ok
    report(6, "Lorentz cylinders C x R", failures == 0, f"50 cylinders, {failures} failures")


def _ball(center, radius):
    center = np.asarray(center, dtype=float)

    def project(X):
        V = np.atleast_2d(X) - center
        nrm = np.linalg.norm(V, axis=1, keepdims=True)
        return center + V * np.minimum(1.0, radius / np.maximum(nrm, 1e-300))

    def member(X):
        return np.linalg.norm(np.atleast_2d(X) - center, axis=1) <= radius + 1e-8

    def sample(rng, n):
        return project(center + 2 * radius * rng.standard_normal((n, center.size)))

    return project, member, sample, False


def _poly_oracle(P, expected):
    return polyhedron_projector(P), polyhedron_member(P), polyhedron_sampler(P, 2.0), expected


def _halfspace_oracle(u, b, expected):
    Hm = Halfspace(u, b)
    P = Polyhedron([Hm])

    def sample(rng, n):
        return project_halfspace(Hm, 2 * rng.standard_normal((n, len(u))))

    return (lambda X: project_halfspace(Hm, X)), polyhedron_member(P), sample, expected


def _box_oracle(rng, d):
    lo = rng.uniform(-2, 0, d)
    hi = lo + rng.uniform(0.5, 2, d)

    def sample(rng, n):
        return np.clip(rng.uniform(lo - 1, hi + 1, (n, d)), lo, hi)

    member = lambda X: np.all((X >= lo - 1e-8) & (X <= hi + 1e-8), axis=1)  # noqa: E731
    return (lambda X: np.clip(X, lo, hi)), member, sample, True


def test_criterion_07_orthant_sublattice_converse():
    rng = np.random.default_rng(7)
    oracles = []
    for d in (2, 3, 4, 5, 6):
        oracles.append(_box_oracle(rng, d))
    for d in (2, 3, 4, 5):
        oracles.append(_poly_oracle(sliced_box(rng, d, True), True))
    oracles.append(_halfspace_oracle([1.0, -2.0], 0.5, True))
    oracles.append(_halfspace_oracle([0.0, 1.0, -1.0], -0.3, True))
    oracles.append(_halfspace_oracle([0.0, 0.0, 0.0, 1.0], 1.0, True))
    oracles.append(_halfspace_oracle([1.0, 1.0], 1.0, False))
    oracles.append(_halfspace_oracle([1.0, 0.5, -1.0], 0.0, False))
    oracles.append(_halfspace_oracle([-1.0, -1.0, 0.0, 2.0], 0.7, False))
    oracles.append(_ball([0.0, 0.0], 1.0))
    oracles.append(_ball([1.0, -1.0, 0.5], 0.7))
    for d in (2, 3, 4):
        oracles.append(_poly_oracle(sliced_box(rng, d, False), False))
    assert len(oracles) == 20

    violations = []
    refuted = 0
    for k, (project, member, sample, expected) in enumerate(oracles):
        d = sample(np.random.default_rng(0), 1).shape[1]
        K = Orthant(d)
        iso = falsify_isotonicity(K, project, ordered_pair_sampler(K, gaussian_sampler(d, 0.0, 2.0), 2.0),
                                  10000, 700 + k, 1e-8)
        sub = sublattice_check_orthant(member, sample, 10000, 700 + k)
        refuted += iso.refuted
        if iso.refuted != sub.refuted or iso.refuted == expected:
            violations.append((k, iso.verdict.value, sub.verdict.value, expected))
    report(7, "orthant isotone projection vs sublattice", not violations,
           f"20 oracles, {20 - refuted} isotone and sublattice, {refuted} refuted by both, "
           f"{len(violations)} mismatches {violations}")


def test_criterion_08_dykstra_vs_closed_forms():
    rng = np.random.default_rng(8)
    worst = worst_charac = 0.0
    for d in (2, 3, 5, 7, 10):
        lo = rng.uniform(-2, 0, d)
        hi = lo + rng.uniform(0.2, 2, d)
        X = 3 * rng.standard_normal((1000, d))
        Pt = project_polyhedron(Polyhedron.box(lo, hi), X)
        worst = max(worst, np.abs(Pt - np.clip(X, lo, hi)).max())
        Y = rng.uniform(lo, hi, (100, d))
        worst_charac = max(worst_charac, max(charac_residual(p, x, Y) for x, p in zip(X, Pt)))

        u, b = rng.standard_normal(d), rng.standard_normal()
        Pt = project_polyhedron(Polyhedron([Halfspace(u, b)]), X)
        un = u / np.linalg.norm(u)
        ref = X - np.maximum(X @ un - b / np.linalg.norm(u), 0)[:, None] * un
        worst = max(worst, np.abs(Pt - ref).max())
        Y = rng.standard_normal((100, d))
        Y -= (np.maximum(Y @ un - b / np.linalg.norm(u), 0) + rng.random(100))[:, None] * un
        worst_charac = max(worst_charac, max(charac_residual(p, x, Y) for x, p in zip(X, Pt)))
    ok = worst <= 1e-6 and worst_charac <= 1e-6
    report(8, "Dykstra vs clamp/halfspace", ok,
           f"10 sets x 1000 points, max deviation {worst:.2e}, variational residual {worst_charac:.2e}")


def _simplex(d, scale=1.0, shift=None):
    A = np.vstack([-np.eye(d), np.ones((1, d))])
    b = np.append(np.zeros(d), scale)
    P = Polyhedron.from_arrays(A, b)
    return P if shift is None else P.translated(shift)


def test_criterion_09_projection_identities():
    rng = np.random.default_rng(9)
    sets = []
    for d in (2, 3, 4, 6, 8):
        sets.append(random_box(rng, d))
        sets.append(_simplex(d, rng.uniform(0.5, 2), rng.uniform(-1, 1, d)))
    failed = []
    for k, D in enumerate(sets):
        cert = projection_identities_check(D, n=50, seed=900 + k, tol=1e-6)
        if cert.verdict is not Verdict.NO_COUNTEREXAMPLE:
            failed.append((k, cert.note))
    report(9, "projection identities", not failed,
           f"{50 * len(sets)} configurations on 5 boxes and 5 simplices, {len(failed)} failures {failed}")


def test_criterion_10_vi_demo():
    F = affine_map(np.eye(2), [-1, 1])
    traj = ncp_solve(Orthant(2), F, [0.0, 0.0], step=0.5, tol=1e-8, max_iter=200)
    res = ncp_residual(Orthant(2), traj.solution, F(traj.solution))
    ok1 = traj.converged and traj.iterations <= 200 and res <= 1e-8 and np.allclose(traj.solution, [1, 0], atol=1e-8)

    # F(x) = x - c solves the Lorentz NCP at P_K(c) by the Moreau decomposition
    c = np.array([3.0, 4.0, 0.0])
    K = Lorentz(3)
    G = lambda x: x - c  # noqa: E731
    lt = ncp_solve(K, G, [0.0, 0.0, 0.0], step=0.5, tol=1e-6, max_iter=1000)
    lres = ncp_residual(K, lt.solution, G(lt.solution))
    ok2 = lt.converged and lres <= 1e-6 and np.allclose(lt.solution, [1.5, 2.0, 2.5], atol=1e-5)
    report(10, "VI demo", ok1 and ok2,
           f"affine NCP -> {np.round(traj.solution, 10).tolist()} in {traj.iterations} iterations, residual {res:.1e}; "
           f"Lorentz NCP -> {np.round(lt.solution, 6).tolist()} in {lt.iterations} iterations, residual {lres:.1e}")
