"""End-to-end acceptance criteria, one test per criterion at its stated tolerance.

Runs under pytest (a PASS/FAIL line per criterion is printed in the
terminal summary) or directly as ``python3 tests/test_acceptance.py``.
"""

import math
import subprocess
import sys
import time
from pathlib import Path

import pytest
from gmpy2 import mpq
from hypothesis import settings

from pwa_entropy.conformal import builtin_conformal_map, run_contrast
from pwa_entropy.entropy import greedy_separated_estimate, greedy_spanning_estimate, dyadic_cover
from pwa_entropy.errors import CoverageFailure
from pwa_entropy.geometry import Matrix2, Metric, gram_eigenvalues, operator_norm_l1
from pwa_entropy.orbits import attractor_profile, lyapunov_batch
from pwa_entropy.pwa import A, B, build_rhombus, conformality_report
from pwa_entropy.symbolic import (
    cell_counts,
    dyadic_crosscheck,
    growth_rate,
    multiplicity_profile,
    transition_graph,
)

HALF, QUARTER = mpq(1, 2), mpq(1, 4)
LOG2 = math.log(2)
TESTS = Path(__file__).resolve().parent


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def ratios(counts):
    return {n1: c1 / c0 for (_, c0), (n1, c1) in zip(counts, counts[1:])}


@pytest.fixture(scope="module")
def grid_counts():
    """Greedy spanning (eps 1/2) and separated (eps 1, eps 1/2) counts on the mesh-1/64 grid, n = 1..8."""
    f = build_rhombus(HALF)
    out = {"spanning": [], "separated": [], "separated_half": []}
    with Timer() as clock:
        for n in range(1, 9):
            out["spanning"].append((n, greedy_spanning_estimate(f, n, HALF, mpq(1, 64)).count))
            out["separated"].append((n, greedy_separated_estimate(f, n, mpq(1), mpq(1, 64)).count))
            out["separated_half"].append((n, greedy_separated_estimate(f, n, HALF, mpq(1, 64)).count))
    out["seconds"] = clock.seconds
    return out


@pytest.mark.parametrize("t", [QUARTER, HALF], ids=["t=1/4", "t=1/2"])
def test_c01_exact_cell_counts(t):
    with Timer() as clock:
        counts = cell_counts(build_rhombus(t), 12)
    assert counts == [(n, 2 ** (n + 1)) for n in range(1, 13)]
    assert all(r == LOG2 for _, r in growth_rate(counts))
    assert clock.seconds < 60


def test_c02_transition_spectral_radius():
    with Timer() as clock:
        g = transition_graph(build_rhombus(HALF))
    assert abs(g.spectral_radius - 2) <= 1e-9
    assert abs(math.log(g.spectral_radius) - LOG2) <= 1e-9
    assert clock.seconds < 1


def test_c03_spanning_growth(grid_counts):
    counts = dict(grid_counts["spanning"])
    r = ratios(grid_counts["spanning"])
    for n in range(3, 8):
        assert 1.7 <= r[n + 1] <= 2.3, (n, r[n + 1])
        assert 2 ** (n + 1) <= counts[n] <= 2 ** (n + 4), (n, counts[n])
    assert grid_counts["seconds"] < 300


def test_c04_separated_growth_and_sandwich(grid_counts):
    r = ratios(grid_counts["separated"])
    for n in range(3, 8):
        assert 1.7 <= r[n + 1] <= 2.3, (n, r[n + 1])
    for (n, sep2), (_, span), (_, sep1) in zip(grid_counts["separated"], grid_counts["spanning"],
                                               grid_counts["separated_half"]):
        assert sep2 <= span <= sep1, n


_COVER_SECONDS = []


@pytest.mark.parametrize("n", range(1, 9), ids=[f"n={n}" for n in range(1, 9)])
def test_c05_explicit_cover(n):
    with Timer() as clock:
        try:
            est = dyadic_cover(HALF, n, HALF, 2)
        except CoverageFailure as exc:
            _COVER_SECONDS.append(0.0)
            pytest.fail(f"coverage failure at n={n}: worst point {exc.worst_point}, gap {exc.gap:.6g}")
    _COVER_SECONDS.append(clock.seconds)
    assert est.verified and est.count == 2 ** (n + 2) <= 2 ** (n + 3)
    assert sum(_COVER_SECONDS) < 180


@pytest.mark.parametrize("t", [QUARTER, HALF], ids=["t=1/4", "t=1/2"])
def test_c06_dyadic_structure(t):
    for n in range(1, 9):
        assert dyadic_crosscheck(t, n), n


@pytest.mark.parametrize("t", [QUARTER, mpq(3, 8)], ids=["t=1/4", "t=3/8"])
def test_c07_attractor(t):
    with Timer() as clock:
        prof = attractor_profile(build_rhombus(t), 1000, 50, seed=2024)
    assert prof.sample_count == 1000
    for i, d in prof.max_distance[1:]:
        assert d <= (2 * t) ** i, i
    assert clock.seconds < 30


def test_c08_lyapunov_negative():
    with Timer() as clock:
        batch = lyapunov_batch(build_rhombus(QUARTER), 100, 200, seed=2024)
    assert len(batch) == 100
    assert all(e.value <= math.log(0.5) + 1e-12 for _, e in batch)
    assert clock.seconds < 30


def test_c09_conformal_contrast():
    with Timer() as clock:
        report = run_contrast(depth=12)
    conf, rho = report["conformal"], report["rhombus"]
    assert all(r.conformal and r.scale_sq == mpq(25, 64) for r in conformality_report(builtin_conformal_map()))
    assert conf.counts["cells"][-1][0] == 12 and conf.rates["cells"] <= 0.05
    assert not rho.conformal and not any(r.conformal for r in conformality_report(build_rhombus(HALF)))
    assert abs(rho.rates["cells"] - LOG2) <= 1e-12
    assert clock.seconds < 120


def test_c10_multiplicity():
    prof = multiplicity_profile(build_rhombus(HALF), 10)
    for r in prof[1:]:
        assert r.max_multiplicity == 2 ** r.depth and r.witness in (A, B), r
    rates = growth_rate([(r.depth, r.max_multiplicity) for r in prof[1:]])
    assert all(x == LOG2 for _, x in rates)


def test_c11_metric_ledger():
    m = Matrix2.of([[1, "-1/2"], [0, "1/2"]])
    assert operator_norm_l1(m) == 1
    assert build_rhombus(HALF).pieces[0].map.linear == m
    assert abs(gram_eigenvalues(m).eigenvalues[0] - (3 + math.sqrt(5)) / 4) <= 1e-12
    assert build_rhombus(HALF).metric == Metric.L1


def test_c12_property_suites_and_cli_determinism():
    assert settings.default.max_examples >= 200
    others = sorted(str(p) for p in TESTS.glob("test_*.py") if p.name != Path(__file__).name)
    assert any(p.endswith("test_cli.py") for p in others)
    res = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *others],
                         capture_output=True, text=True, cwd=TESTS.parent)
    assert res.returncode == 0, res.stdout[-3000:]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-p", "no:cacheprovider"]))
