import math

import numpy as np
import pytest

import oracles as O
from entanglemeter.detection import (
    SCAN_COLUMNS,
    criterion_terms,
    detection_scan,
    ghz_criterion,
    ghz_margin,
    k_eff,
    switch_points,
    threshold,
    verdict,
    verdict_record,
    w_criterion,
    w_margin,
)
from entanglemeter.qstate import random_density, state_factory


def test_terms_on_pure_ghz_and_w():
    t = criterion_terms(state_factory("ghz", 3))
    assert (t.A, t.B, t.C, t.D, t.E) == pytest.approx((0.5, 0, 0, 0, 0))
    assert k_eff(state_factory("ghz", 3)) == (1.0, math.inf)
    w = criterion_terms(state_factory("w", 3))
    assert w.A == 0 and w.C == pytest.approx(2) and w.E == pytest.approx(1)
    assert k_eff(state_factory("w", 3))[0] == math.inf


def test_needs_qubits_and_valid_k():
    with pytest.raises(ValueError):
        criterion_terms(random_density((2, 3), np.random.default_rng(0)))
    with pytest.raises(ValueError):
        ghz_criterion(state_factory("ghz", 3), 4)


def test_ghz_noise_example():
    rho = state_factory("ghz_noise", 4, t=0.5)
    assert ghz_criterion(rho, 2) and not w_criterion(rho, 2)
    assert not ghz_criterion(state_factory("ghz_noise", 4, t=0.45), 2)
    full_sep_edge = 1 / (2**3 + 1)
    assert not ghz_criterion(state_factory("ghz_noise", 4, t=full_sep_edge - 1e-6), 4)
    assert ghz_criterion(state_factory("ghz_noise", 4, t=full_sep_edge + 1e-6), 4)


def test_keff_consistent_with_criteria():
    r = np.random.default_rng(3)
    for _ in range(200):
        a, b = r.uniform(0, 1, 2)
        if a + b > 1:
            continue
        rho = state_factory("ghz_w_noise", 4, a=a, b=b)
        t = criterion_terms(rho)
        k1, k2 = k_eff(rho)
        for k in range(2, 5):
            if abs(ghz_margin(t, k)) > 1e-9 and t.A > 0:
                assert ghz_criterion(rho, k, t) == (k1 < k)
            if abs(w_margin(t, k)) > 1e-9 and t.E > 0:
                assert w_criterion(rho, k, t) == (k2 < k)


def test_detection_nests_in_k():
    grid = {"a": np.linspace(0, 1, 21), "b": np.linspace(0, 1, 21)}
    rows = detection_scan("ghz_w_noise", 4, [2, 3, 4], grid)
    by_point = {}
    for r in rows:
        by_point.setdefault((r["param1"], r["param2"]), {})[r["k"]] = r
    for per_k in by_point.values():
        for col in ("ghz_violated", "w_violated"):
            flags = [per_k[k][col] for k in (2, 3, 4)]
            assert flags == sorted(flags)  # once detected, stays detected for larger k


def test_scan_order_and_skipped_points():
    rows = detection_scan("ghz-w-noise", 3, [3, 2], {"a": [0.0, 0.6], "b": [0.2, 0.6]})
    assert [tuple(r[c] for c in ("k", "param1", "param2")) for r in rows] == [
        (3, 0.0, 0.2), (3, 0.0, 0.6), (3, 0.6, 0.2), (2, 0.0, 0.2), (2, 0.0, 0.6), (2, 0.6, 0.2)]
    assert list(rows[0]) == list(SCAN_COLUMNS)


def test_switch_points_bracket_threshold():
    n, k = 4, 2
    rows = detection_scan("ghz_noise", n, k, {"t": np.linspace(0, 1, 101)})
    (lo, hi), = switch_points(rows, "ghz_violated")
    assert lo < O.example2_threshold(n, k) <= hi


def test_threshold_w_noise_w_test():
    t = threshold("w_noise", 3, 2, "a", test="w")
    rho = state_factory("w_noise", 3, a=t + 1e-6)
    assert w_criterion(rho, 2)


def _first_detector(phi, k=2):
    ca, cb = math.cos(phi), math.sin(phi)
    top = 1 / (ca + cb)
    out = {}
    for name, margin in (("ghz", ghz_margin), ("w", w_margin)):
        def f(s):
            return margin(criterion_terms(state_factory("ghz_w_noise", 4, a=s * ca, b=s * cb)), k)
        from scipy.optimize import bisect
        out[name] = bisect(f, 0, top, xtol=1e-12) if f(top) > 0 else math.inf
    return min(out, key=out.get)


@pytest.mark.parametrize("deg", [5, 15, 25, 35, 44])
def test_ghz_test_detects_first_when_a_exceeds_b(deg):
    assert _first_detector(math.radians(deg)) == "ghz"


@pytest.mark.parametrize("deg", [60, 70, 80, 88])
def test_w_test_detects_first_when_b_dominates(deg):
    assert _first_detector(math.radians(deg)) == "w"


@pytest.mark.xfail(strict=True, reason="the two k=2 boundaries cross near b/a = 1.61, not on a = b")
@pytest.mark.parametrize("deg", [47, 52, 56])
def test_w_test_detects_first_just_above_diagonal(deg):
    assert _first_detector(math.radians(deg)) == "w"


def test_verdict_record():
    rec = verdict_record(verdict(state_factory("ghz_noise", 4, t=0.5), 2))
    assert rec["ghz_test_violated"] and rec["k_nonseparable"]
    assert verdict(state_factory("ghz_noise", 4, t=0.1), 2).uninformative(4) == (True, True)
