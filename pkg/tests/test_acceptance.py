"""Acceptance gate: one test per criterion, printed pass/fail lines.

The certificate has no closed-form numerical targets, so acceptance is
property- and oracle-based at desk scale: classical-equivalence against an
independent rational de Casteljau evaluator, reproduction of the collapsed
edge counterexample, a certificate-vs-oracle sweep over randomized instances,
piecewise-linear and halfspace diagnostics, invariance of the verdict, a
performance bound on the cubic scan, and the basic patch axioms.
"""
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np
import pytest

from toricpatch import (LatticeSet, PatchSpec, SampleCloud, check_compatible,
                        check_weak, convex_hull, default_triangulation,
                        edge_point_indices, eval_patch_many,
                        halfspace_diagnostic, hull_vertex_indices,
                        pl_map_check, randomized_triangulation, random_weights,
                        restrict_to_edge, sample_patch, stress_certificate,
                        tensor_lattice, tensor_weights, triangle_lattice,
                        triangle_weights, weights_array, find_collisions)
from toricpatch import basis as basis_mod
from toricpatch import oracle as oracle_mod
from oracles import (decasteljau_tensor, decasteljau_triangle, float_hull,
                     hull_margins)


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL")
        raise
    print(f"[ACCEPTANCE] {name}: PASS")


# --------------------------------------------------------------- the corpus

@dataclass(frozen=True)
class Instance:
    name: str
    lattice: LatticeSet
    control: np.ndarray
    kind: str  # identity | reflected | perturbed | swap | collapse


def _perturb(ident: np.ndarray, rng, magnitude: float) -> np.ndarray:
    r = magnitude * np.sqrt(rng.uniform(0, 1, len(ident)))
    th = rng.uniform(0, 2 * np.pi, len(ident))
    return ident + np.stack([r * np.cos(th), r * np.sin(th)], axis=1)


def build_corpus() -> list[Instance]:
    """Grids and triangles up to degree 3; identity, reflections, random
    perturbations up to 0.6 of the lattice spacing, adjacent-corner swaps,
    and collapsed edges."""
    shapes = [(f"grid{m}x{n}", tensor_lattice(m, n))
              for m in (1, 2, 3) for n in (1, 2, 3)]
    shapes += [(f"tri{m}", triangle_lattice(m)) for m in (1, 2, 3)]
    out: list[Instance] = []
    for si, (name, lat) in enumerate(shapes):
        ident = np.array(lat.points, float)
        poly = convex_hull(lat)
        out.append(Instance(f"{name}-identity", lat, ident, "identity"))
        out.append(Instance(f"{name}-reflected", lat,
                            ident @ np.array([[-1.0, 0.0], [0.0, 1.0]]),
                            "reflected"))
        for k in range(11):
            rng = np.random.default_rng(1000 * si + k)
            mag = 0.05 + 0.55 * k / 10
            out.append(Instance(f"{name}-perturb{k}", lat,
                                _perturb(ident, rng, mag), "perturbed"))
        verts = hull_vertex_indices(lat, poly)
        for k, (a, b) in enumerate([(verts[0], verts[1]), (verts[1], verts[2])]):
            ctrl = ident.copy()
            ctrl[[a, b]] = ctrl[[b, a]]
            out.append(Instance(f"{name}-swap{k}", lat, ctrl, "swap"))
        for k in (0, 1):
            idx, _ = edge_point_indices(lat, poly, k % poly.edge_count)
            ctrl = ident.copy()
            ctrl[idx] = ctrl[idx[0]]
            out.append(Instance(f"{name}-collapse{k}", lat, ctrl, "collapse"))
    return out


@pytest.fixture(scope="module")
def corpus():
    return build_corpus()


@pytest.fixture(scope="module")
def verdicts(corpus):
    return {inst.name: check_compatible(inst.lattice, inst.control)
            for inst in corpus}


# ------------------------------------------------------------ criterion 1

def test_criterion_classical_equivalence():
    """Toric patch with binomial / multinomial weights == independent rational
    de Casteljau after reparameterization, max abs error < 1e-10, < 10 s."""
    with criterion("classical-equivalence"):
        t0 = time.perf_counter()
        worst = 0.0
        g = np.linspace(0.0, 1.0, 101)
        gx, gy = np.meshgrid(g, g, indexing="ij")
        unit = np.stack([gx.ravel(), gy.ravel()], axis=1)
        for m in (1, 2, 3, 4):
            for n in (1, 2, 3, 4):
                lat = tensor_lattice(m, n)
                rng = np.random.default_rng(100 * m + n)
                ctrl = np.array(lat.points, float) + \
                    rng.uniform(-0.4, 0.4, (len(lat), 2))
                spec = PatchSpec.build(
                    lat, ctrl, weights_array(lat, tensor_weights(m, n)))
                pts = unit * [m, n]
                ours = eval_patch_many(spec, pts)
                ref = decasteljau_tensor(ctrl.reshape(m + 1, n + 1, 2),
                                         np.ones((m + 1, n + 1)),
                                         unit[:, 0], unit[:, 1])
                worst = max(worst, float(np.abs(ours - ref).max()))
        for m in (1, 2, 3, 4):
            lat = triangle_lattice(m)
            rng = np.random.default_rng(900 + m)
            ctrl = np.array(lat.points, float) + \
                rng.uniform(-0.3, 0.3, (len(lat), 2))
            spec = PatchSpec.build(
                lat, ctrl, weights_array(lat, triangle_weights(m)))
            keep = unit.sum(axis=1) <= 1.0
            pts = unit[keep] * m
            ours = eval_patch_many(spec, pts)
            cd = {p: ctrl[i] for i, p in enumerate(lat)}
            wd = {p: 1.0 for p in lat}
            ref = decasteljau_triangle(cd, wd, m, unit[keep, 0], unit[keep, 1])
            worst = max(worst, float(np.abs(ours - ref).max()))
        elapsed = time.perf_counter() - t0
        assert worst < 1e-10, f"max abs error {worst}"
        assert elapsed < 10.0, f"took {elapsed:.1f}s"


# ------------------------------------------------------------ criterion 2

def test_criterion_collapsed_edge_counterexample():
    """The collapsed bilinear patch: weakly compatible only; the x = 1 edge
    maps to (1, 0) for 20 random weight vectors; a 200 x 200 interior grid
    shows no interior collision."""
    with criterion("collapsed-edge-counterexample"):
        sq = LatticeSet.of([(0, 0), (0, 1), (1, 0), (1, 1)])
        ctrl = np.array([(0, 0), (0, 1), (1, 0), (1, 0)], float)
        rep = check_compatible(sq, ctrl)
        assert rep.verdict == "weakly_compatible_only"

        g = np.linspace(0.0, 1.0, 200)
        gx, gy = np.meshgrid(g, g, indexing="ij")
        grid = np.stack([gx.ravel(), gy.ravel()], axis=1)
        poly = convex_hull(sq)
        H = basis_mod.h_matrix(poly, grid)
        interior = grid[np.all(H > 0, axis=1)]
        bas = basis_mod.basis_matrix(poly, sq, interior)
        nbrs = oracle_mod.domain_neighbor_indices(interior)
        edge_t = np.linspace(0.0, 1.0, 101)
        edge_pts = np.stack([np.ones_like(edge_t), edge_t], axis=1)

        for trial in range(20):
            w = random_weights(sq, seed=4200 + trial, spread=100.0)
            spec = PatchSpec.build(sq, ctrl, w, poly=poly)
            on_edge = eval_patch_many(spec, edge_pts)
            assert np.abs(on_edge - np.array([1.0, 0.0])).max() < 1e-12
            img = eval_patch_many(spec, interior, basis=bas)
            cloud = SampleCloud(interior, img, 200, 1.0 / 199,
                                oracle_mod.weight_hash(w), spec, nbrs)
            report = find_collisions(cloud, delta_dom=0.05,
                                     eps_img=1e-7 * spec.image_diameter)
            assert report.verdict != "collision", report.to_dict()
            assert all(p.on_boundary for p in report.pairs)


# ------------------------------------------------------------ criterion 3

def test_criterion_certificate_oracle_agreement(corpus, verdicts):
    """>= 200 randomized instances, 25 weight trials each at grid 96:
    stress_certificate reports zero disagreements."""
    with criterion("certificate-oracle-agreement"):
        assert len(corpus) >= 200
        kinds = {verdicts[i.name].verdict for i in corpus}
        assert kinds == {"compatible", "weakly_compatible_only",
                         "not_weakly_compatible"}
        for i, inst in enumerate(corpus):
            summary = stress_certificate(inst.lattice, inst.control,
                                         trials=25, n=96, spread=100.0,
                                         seed=31 * i)
            assert not summary.disagreements, inst.name
            assert summary.agreements == 25


# ------------------------------------------------------------ criterion 4

def test_criterion_pl_map_consistency(corpus, verdicts):
    """check_weak passes => PL map consistent on the default and 10 random
    triangulations; every crossed-corner instance exhibits a violating
    triangle in at least one of them."""
    with criterion("pl-map-consistency"):
        crossed_seen = 0
        for inst in corpus:
            tris = [default_triangulation(inst.lattice)]
            tris += [randomized_triangulation(inst.lattice, seed)
                     for seed in range(10)]
            if verdicts[inst.name].weakly_compatible:
                for t in tris:
                    rep = pl_map_check(inst.lattice, inst.control, t)
                    assert rep.consistent, inst.name
            elif inst.kind == "swap":
                crossed_seen += 1
                assert any(not pl_map_check(inst.lattice, inst.control, t).consistent
                           for t in tris), inst.name
        assert crossed_seen >= 15


# ------------------------------------------------------------ criterion 5

def test_criterion_halfspace_containment(corpus, verdicts):
    """Every compatible instance passes the halfspace diagnostic on every
    hull edge."""
    with criterion("halfspace-containment"):
        compatible = 0
        for inst in corpus:
            rep = verdicts[inst.name]
            if rep.verdict != "compatible":
                continue
            compatible += 1
            poly = convex_hull(inst.lattice)
            for k in range(poly.edge_count):
                hs = halfspace_diagnostic(inst.lattice, inst.control, k,
                                          report=rep)
                assert hs.contained, (inst.name, k, hs.violations[:3])
                assert hs.side != "interior_violation", (inst.name, k)
        assert compatible >= 40


# ------------------------------------------------------------ criterion 6

def test_criterion_invariance(corpus, verdicts):
    """Verdict survives 50 random relabelings / unimodular domain maps /
    affine image maps per instance; global sign negates under reflection."""
    with criterion("invariance"):
        for ii, inst in enumerate(corpus):
            base = verdicts[inst.name]
            rng = np.random.default_rng(777 + ii)
            pts = np.asarray(inst.lattice.points, dtype=np.int64)
            for t in range(50):
                kind = t % 3
                if kind == 0:
                    perm = rng.permutation(len(inst.lattice))
                    rep = check_weak(
                        LatticeSet.of([inst.lattice[i] for i in perm]),
                        inst.control[perm])
                    expect_sign = base.global_sign
                elif kind == 1:
                    s_, u_ = int(rng.integers(-2, 3)), int(rng.integers(-2, 3))
                    M = np.array([[1, s_], [0, 1]]) @ np.array([[1, 0], [u_, 1]])
                    shift = rng.integers(-4, 5, size=2)
                    rep = check_weak(LatticeSet.of((pts @ M.T + shift).tolist()),
                                     inst.control)
                    expect_sign = base.global_sign
                else:
                    A = rng.uniform(-1, 1, size=(2, 2))
                    while abs(np.linalg.det(A)) < 0.3:
                        A = rng.uniform(-1, 1, size=(2, 2))
                    rep = check_weak(inst.lattice,
                                     inst.control @ A.T + rng.uniform(-2, 2, 2))
                    expect_sign = None if base.global_sign is None else \
                        base.global_sign * int(np.sign(np.linalg.det(A)))
                assert rep.weakly_compatible == base.weakly_compatible, inst.name
                if base.weakly_compatible:
                    assert rep.global_sign == expect_sign, inst.name
            if base.weakly_compatible:
                mirrored = check_weak(
                    inst.lattice, inst.control @ np.array([[1.0, 0], [0, -1.0]]))
                assert mirrored.global_sign == -base.global_sign, inst.name


# ------------------------------------------------------------ criterion 7

def test_criterion_triple_scan_performance():
    """Full scan of a 300-point lattice in < 10 s, single-threaded, counting
    exactly C(300, 3) triples."""
    with criterion("triple-scan-performance"):
        lat = LatticeSet.of([(i, j) for i in range(20) for j in range(15)])
        ctrl = np.array(lat.points, float)
        t0 = time.perf_counter()
        rep = check_weak(lat, ctrl)
        elapsed = time.perf_counter() - t0
        assert rep.triples_checked == math.comb(300, 3) == 4_455_100
        assert rep.weakly_compatible
        assert elapsed < 10.0, f"took {elapsed:.1f}s"


# ------------------------------------------------------------ criterion 8

def test_criterion_patch_axioms(corpus):
    """Vertex interpolation (< 1e-12), convex hull containment (< 1e-10),
    strict interior images for central samples, on every instance."""
    with criterion("patch-axioms"):
        for ii, inst in enumerate(corpus):
            poly = convex_hull(inst.lattice)
            hull = float_hull(inst.control)
            verts = np.array(poly.vertices, float)
            vert_ctrl = inst.control[[inst.lattice.index[v]
                                      for v in poly.vertices]]
            weightings = [None]
            for t in (0, 1):
                weightings.append(random_weights(inst.lattice,
                                                 seed=515 + 7 * ii + t,
                                                 spread=10.0))
            for w in weightings:
                spec = PatchSpec.build(inst.lattice, inst.control, w, poly=poly)
                imgs = eval_patch_many(spec, verts)
                assert np.abs(imgs - vert_ctrl).max() < 1e-12, inst.name
                cloud = sample_patch(spec, 32)
                assert hull_margins(hull, cloud.image).min() > -1e-10, inst.name
                if len(hull) >= 3:
                    H = basis_mod.h_matrix(poly, cloud.domain)
                    central = np.all(H >= 0.2 * H.max(axis=0)[None, :], axis=1)
                    if central.any():
                        m = hull_margins(hull, cloud.image[central]).min()
                        assert m > 0, (inst.name, m)
