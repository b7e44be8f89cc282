import numpy as np
import pytest

from trustlab.local_trust import CredibilityMode, CredibilityWeights, DirectTrustMatrix
from trustlab.propagation import (
    EmptyMatrix,
    Fixed,
    KernelConfig,
    KernelKind,
    MeanNonzero,
    NormalizedTrustMatrix,
    Percentile,
    PreTrustVector,
    normalize,
    one_hop_aggregate,
    power_iterate,
    propagate,
    resolve_threshold,
    tctp_filter,
)


def linear_solve(m, p, eps):
    """Closed-form stationary vector including dangling-row redistribution."""
    n = len(p)
    d = (m.sum(axis=1) == 0).astype(float)
    a = np.eye(n) - (1 - eps) * (m.T + np.outer(p, d))
    return np.linalg.solve(a, eps * p)


def test_normalize_examples():
    m = normalize(np.array([[0, 0.2, 0.2], [0, 0, 0], [0.9, 0, 0]])).values
    np.testing.assert_allclose(m[0], [0, 0.5, 0.5])
    np.testing.assert_array_equal(m[1], [0, 0, 0])
    np.testing.assert_array_equal(m[2], [1.0, 0, 0])


def test_power_iterate_eps_one_is_pretrust():
    m = normalize(np.array([[0, 1.0, 0], [0, 0, 1.0], [1.0, 0, 0]]))
    pre = PreTrustVector.of(3, [0], eps=1.0)
    t = power_iterate(m, pre)
    np.testing.assert_array_equal(t.values, pre.p)
    assert t.iteration == 1 and t.converged


def test_power_iterate_swap_symmetry():
    m = NormalizedTrustMatrix(np.array([[0, 1.0], [1.0, 0]]))
    t = power_iterate(m, PreTrustVector.of(2, [], eps=0.0))
    np.testing.assert_allclose(t.values, [0.5, 0.5])


def test_power_iterate_matches_linear_solve_n3():
    rng = np.random.default_rng(3)
    raw = rng.random((3, 3))
    np.fill_diagonal(raw, 0)
    m = normalize(raw)
    pre = PreTrustVector.of(3, [0, 1], eps=0.15)
    t = power_iterate(m, pre)
    assert np.abs(t.values - linear_solve(m.values, pre.p, 0.15)).sum() <= 1e-8


def test_power_iterate_nonconvergence_flag():
    m = NormalizedTrustMatrix(np.array([[0, 1.0], [1.0, 0]]))
    t = power_iterate(m, PreTrustVector.of(2, [0], eps=0.0), KernelConfig(max_iter=5))
    assert not t.converged and t.iteration == 5 and t.residual > 0


def test_dangling_mass_goes_to_pretrust():
    m = normalize(np.array([[0, 1.0, 0], [0, 0, 0], [0, 0, 0]]))
    pre = PreTrustVector.of(3, [0], eps=0.15)
    t = power_iterate(m, pre)
    assert t.values.sum() == pytest.approx(1.0, abs=1e-12)
    assert t.values[2] == 0.0
    np.testing.assert_allclose(t.values, linear_solve(m.values, pre.p, 0.15), atol=1e-10)


def test_resolve_threshold_examples():
    s = DirectTrustMatrix([[0, 0.2, 0.4], [0.8, 0, 0], [0, 0, 0]])
    assert resolve_threshold(s, Fixed(0.5)) == 0.5
    assert resolve_threshold(s, Percentile(0.5)) == pytest.approx(0.4)
    assert resolve_threshold(DirectTrustMatrix([[0, 0.2], [0.4, 0]]), MeanNonzero()) == pytest.approx(0.3)


def test_resolve_threshold_empty():
    with pytest.raises(EmptyMatrix):
        resolve_threshold(np.zeros((2, 2)), MeanNonzero())


@pytest.mark.parametrize("bad", [-0.1, 1.1])
def test_threshold_policies_validate(bad):
    with pytest.raises(ValueError):
        Fixed(bad)
    with pytest.raises(ValueError):
        Percentile(bad)


def test_tctp_filter_examples():
    s = DirectTrustMatrix([[0, 0.3], [0.6, 0]])
    np.testing.assert_array_equal(tctp_filter(s, 0.5).values, [[0, 0], [0.6, 0]])
    np.testing.assert_array_equal(tctp_filter(s, 0.0).values, s.values)
    assert not tctp_filter(DirectTrustMatrix([[0, 1.0], [0.6, 0]]), 1.0).values.any()


def test_tctp_needs_policy():
    with pytest.raises(ValueError):
        KernelConfig(KernelKind.TCTP)


def test_one_hop_examples():
    s = DirectTrustMatrix([[0, 0, 0.8], [0, 0, 0.4], [0, 0, 0]])
    assert one_hop_aggregate(s, 2) == pytest.approx(0.6)
    w = CredibilityWeights(CredibilityMode.RATER_LEVEL, {0: 0.75, 1: 0.25})
    assert one_hop_aggregate(s, 2, w) == pytest.approx(0.7)
    assert one_hop_aggregate(s, 0) == 0.5


def test_propagate_reports_threshold():
    s = DirectTrustMatrix([[0, 0.2, 0.4], [0.8, 0, 0], [0, 0.6, 0]])
    pre = PreTrustVector.of(3, [0])
    _, tau = propagate(s, pre, KernelConfig(KernelKind.TCTP, MeanNonzero()))
    assert tau == pytest.approx(0.5)
    t, tau = propagate(s, pre, KernelConfig(KernelKind.UDTP))
    assert tau is None and t.values.sum() == pytest.approx(1.0)


def test_zero_in_edge_participant_scores_zero():
    s = DirectTrustMatrix([[0, 0.9, 0.0], [0.5, 0, 0.0], [0.7, 0.7, 0]])
    t, _ = propagate(s, PreTrustVector.of(3, [0]), KernelConfig(KernelKind.UDTP))
    assert t.values[2] == 0.0


def test_pretrust_of_validates_eps():
    with pytest.raises(ValueError):
        PreTrustVector.of(3, [0], eps=1.5)
    assert PreTrustVector.of(4, [2, 2, 0]).members() == [0, 2]


def test_trust_vector_csv(tmp_path):
    t = power_iterate(normalize(np.array([[0, 1.0], [1.0, 0]])), PreTrustVector.of(2, [0]))
    path = tmp_path / "t.csv"
    t.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "id,score,iteration" and len(lines) == 3
