import math
from types import SimpleNamespace

import numpy as np
import pytest

from opplab.errors import ConfigurationError, DomainError
from opplab.families import DistributionFamily as D
from opplab.model import iid_model, preset
from opplab.statistics import WeightScheme
from opplab.verify import (JUDGED, K_SE, LemmaReport, Row, lemma4_constant, lemma4_d_constants,
                           verify_cov_bound, verify_dominance, verify_moment_bound,
                           verify_second_moment, verify_tail_sum, verify_trunc_moments)

LUROTH = preset("luroth")


def test_row_margin_and_status():
    assert Row("a", {}, 1.0, 1.2, 0.1).passed
    assert Row("a", {}, 1.5, 1.2, 0.1).passed is True
    assert Row("a", {}, 1.6, 1.2, 0.1).passed is False
    assert Row("a", {}, 1.0, 2.0, kind="info").passed is None
    assert math.isnan(Row("a", {}, 1.0, 2.0, kind="skipped").margin)


def test_verdict_recomputable_from_rows():
    rep = verify_dominance(LUROTH, [1.5, 2, 5], 20_000, seed=4, min_samples=1000)
    judged = [r for r in rep.rows if r.kind in JUDGED]
    manual = all(r.margin >= -K_SE * r.se for r in judged)
    assert rep.verdict == ("PASS" if manual else "FAIL")
    assert LemmaReport("x", "m", "g", [Row("a", {}, 0, 1, kind="info")]).verdict == "FAIL"


def test_dominance_luroth_exact_row():
    rep = verify_dominance(LUROTH, [2.0], 50_000, seed=1, min_samples=1000)
    (exact,) = [r for r in rep.rows if r.label == "upper-exact"]
    # uniform digits: P(R > x) = 1/(floor x + 1)
    assert exact.lhs == pytest.approx(1 / 3) and exact.rhs == pytest.approx(0.5)
    assert rep.verdict == "PASS"


def test_dominance_trivial_at_one():
    rep = verify_dominance(LUROTH, [1.0], 20_000, seed=2, min_samples=1000)
    assert all(r.passed for r in rep.rows if r.label.startswith("upper"))


def test_trunc_moments_luroth():
    rep = verify_trunc_moments(LUROTH, [1], [2], N=20_000, seed=3)
    (row,) = [r for r in rep.rows if r.label == "trunc-exact"]
    assert row.lhs == pytest.approx(5 / 6) and row.rhs == pytest.approx(2 + math.log(2))
    rep = verify_trunc_moments(LUROTH, [0.5, 1], [1], N=5_000, seed=3)
    assert rep.verdict == "PASS"
    assert any(r.kind == "skipped" for r in rep.rows)


def test_trunc_moments_power_two_tail():
    model = iid_model(D.power(2))
    rep = verify_trunc_moments(model, [1], [10], N=40_000, seed=5)
    (exact,) = [r for r in rep.rows if r.label == "tail-exact"]
    assert exact.rhs == pytest.approx(0.2)
    assert any(r.label == "tail-mc" for r in rep.rows) and rep.verdict == "PASS"


def test_trunc_moments_alpha_keyword_skips_tail():
    rep = verify_trunc_moments(LUROTH, ["alpha"], [5], N=2_000, seed=0)
    assert [r.kind for r in rep.rows if r.label.startswith("tail")] == ["skipped", "skipped"]


def test_tail_sum_precondition_skip():
    grow = WeightScheme(-1, 0, 0, 0, 1, j0=1)    # a_j = j, b_n = 1: caps b_n/a_j = 1/j < 1
    rep = verify_tail_sum(LUROTH, grow, 1.0, [10, 20], N=100)
    assert [r.kind for r in rep.rows] == ["skipped", "skipped"]
    assert rep.verdict == "FAIL"    # nothing judged


def test_tail_sum_luroth_value():
    rep = verify_tail_sum(LUROTH, WeightScheme(1, 0, 0, 2, 1, j0=1), 1.0, [10**4], N=300, seed=1)
    (proxy,) = [r for r in rep.rows if r.label == "proxy"]
    assert proxy.lhs == pytest.approx(0.1154, abs=1e-3)


def test_lemma4_constants():
    assert lemma4_constant(2, 1, 1.1) == pytest.approx(5.4)
    assert lemma4_d_constants(1.1) == {"statement": pytest.approx(3.2), "proof": pytest.approx(4.3)}
    with pytest.raises(DomainError):
        lemma4_constant(1, 1, 1.1)


def test_moment_bound_luroth():
    w = WeightScheme(1, 0, 0, 2, 2, j0=1)
    rep = verify_moment_bound(LUROTH, w, 2.0, 1.1, [1000], 20_000, seed=0)
    assert rep.verdict == "PASS"
    assert any(r.label == "all-j-exact" for r in rep.rows)


def test_second_moment_zero_weights():
    base = WeightScheme(1, 0, 1, 1, 2)
    zero = SimpleNamespace(j0=2, a=lambda j: np.zeros(np.shape(j)), b=base.b, indices=base.indices)
    rep = verify_second_moment(LUROTH, zero, 1.0, [20, 40], N=50, seed=0)
    assert all(r.lhs == 0 for r in rep.rows)


def test_second_moment_cases():
    w = WeightScheme(1, 0, 1, 1, 2)
    rep = verify_second_moment(iid_model(D.power(3)), w, 3.0, [50, 100, 200, 400], N=200, seed=2, mc_reps=200)
    assert rep.params["case"] == "alpha>2"
    assert {r.kind for r in rep.rows} == {"calibration", "check"}


def test_cov_luroth_independence():
    rep = verify_cov_bound(LUROTH, [(2, 5), (5, 10), (10, 50), (50, 100), (5, 5)], 20_000, seed=1)
    indep = [r for r in rep.rows if r.label == "independent-zero"]
    assert len(indep) == 4 and all(r.passed for r in indep)
    assert rep.verdict == "PASS"


def test_cov_hypothesis_unmet():
    rep = verify_cov_bound(iid_model(D.power(0.5)), [(2, 3)], 100, seed=0)
    assert rep.verdict == "HYPOTHESIS-UNMET" and rep.rows == []
    with pytest.raises(DomainError):
        verify_cov_bound(LUROTH, [(1, 3)], 100)


def test_dominance_sample_floor():
    with pytest.raises(ConfigurationError):
        verify_dominance(LUROTH, [2.0], 10)
