import random

import pytest

from ameslocc.operators import LocalOperator, SiteOperator
from ameslocc.phases import ONE, root_of_unity
from ameslocc.reductions import (ReductionError, _supports_permutation_match,
                                 build_u4_u5, reduced_lm_filter,
                                 verify_ame5_nonequivalence,
                                 verify_rho345_lemma)
from ameslocc.states import ame_linear_5, construct_ame43, construct_ame44


def random_lm(n, d, rng):
    sites = []
    for _ in range(n):
        sigma = list(range(d))
        rng.shuffle(sigma)
        diag = [root_of_unity(d, rng.randrange(d)) for _ in range(d)]
        sites.append(SiteOperator.monomial(sigma, diag))
    return LocalOperator(sites)


def test_filter_passes_on_self():
    s = ame_linear_5(5)
    report = reduced_lm_filter(s, s)
    assert report.passed and report.exact
    assert report.subsets_checked == 10  # C(5, 3) three-party marginals


def test_filter_passes_under_lm_image():
    rng = random.Random(2)
    s = ame_linear_5(5)
    for _ in range(3):
        img = random_lm(5, 5, rng).apply(s)
        assert reduced_lm_filter(s, img).passed


def test_filter_rejects_different_supports():
    # two AME(5,5) states built from different sets of linear forms
    from ameslocc.states import construct_linear
    a = ame_linear_5(5)
    b = construct_linear(5, [[1, 0], [0, 1], [1, 1], [1, 2], [1, 4]])
    report = reduced_lm_filter(a, b)
    obj = report.to_json()
    assert obj["verdict"] == report.verdict
    if not report.passed:
        assert report.failed_subset is not None


def test_filter_subset_size_validation():
    s = ame_linear_5(5)
    with pytest.raises(ReductionError):
        reduced_lm_filter(s, s, subset_size=2)  # must exceed the uniformity
    with pytest.raises(ReductionError):
        reduced_lm_filter(s, s, subset_size=5)


def test_filter_needs_strict_split():
    # with N = 2k the complementary marginals are not forced diagonal
    s = construct_ame43()
    with pytest.raises(ReductionError):
        reduced_lm_filter(s, s)


def test_supports_permutation_match_direct():
    rows = [(0, 0), (1, 1), (2, 2)]
    shifted = [(1, 0), (2, 1), (0, 2)]
    assert _supports_permutation_match(rows, shifted, 3, 2)
    # no per-site relabeling maps a diagonal onto a non-injective set
    assert not _supports_permutation_match(rows, [(0, 0), (1, 1), (2, 0)], 3, 2)


def test_triangular_exponents_d3():
    pair = build_u4_u5(3)
    assert pair.w == ((0, 0, 2), (2, 0, 0), (0, 2, 0))
    assert pair.v == ((0, 0, 1), (0, 1, 0), (1, 0, 0))


def test_triangular_exponents_d5_doubled():
    # the d = 5 reference tables list exponents of a different primitive
    # root; doubling ours modulo 5 reproduces them entry by entry
    pair = build_u4_u5(5)
    printed_w = ((0, 0, 4, 2, 4), (4, 0, 0, 4, 2), (2, 4, 0, 0, 4),
                 (4, 2, 4, 0, 0), (0, 4, 2, 4, 0))
    printed_v = ((0, 0, 1, 3, 1), (1, 3, 1, 0, 0), (1, 0, 0, 1, 3),
                 (0, 1, 3, 1, 0), (3, 1, 0, 0, 1))
    assert tuple(tuple(2 * x % 5 for x in row) for row in pair.w) == printed_w
    assert tuple(tuple(2 * x % 5 for x in row) for row in pair.v) == printed_v


def test_triangular_needs_odd_dimension():
    with pytest.raises(ReductionError):
        build_u4_u5(4)
    with pytest.raises(ReductionError):
        build_u4_u5(1)


def test_closed_form_matches_recursion():
    # build_u4_u5 cross-checks its recursion against the closed forms and
    # raises on any mismatch, so constructing is the assertion
    for d in range(3, 23, 2):
        pair = build_u4_u5(d)
        assert len(pair.w) == d and len(pair.v) == d


def test_rho345_lemma_small_dimension():
    assert verify_rho345_lemma(3)


def test_five_party_nonequivalence_report():
    report = verify_ame5_nonequivalence(5)
    assert report["all_passed"] and report["verdict"] == "inequivalent"
    names = [step["step"] for step in report["steps"]]
    assert "rho345-lemma" in names
    assert all(step["passed"] for step in report["steps"])


def test_five_party_pipeline_input_validation():
    with pytest.raises(ReductionError):
        verify_ame5_nonequivalence(4)  # composite dimension
    with pytest.raises(ReductionError):
        verify_ame5_nonequivalence(3)  # too small: both families coincide
