import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import ev
from trustlab.attack_cost import (
    CostParams,
    IngredientBreakdown,
    PreconditionViolated,
    attack_success_ratio,
    closed_form_cost,
    distrust_ingredient,
    trust_ingredient,
)
from trustlab.ledger import Honesty, InteractionLedger, decay_weight
from trustlab.local_trust import (
    CredibilityMode,
    CredibilityWeights,
    DirectTrustMatrix,
    beta_expectation_trust,
    exp_credibility,
    fcw_direct_trust,
    feedback_similarity,
    ledger_similarity_matrix,
    success_ratio_trust,
)
from trustlab.metrics import (
    Credibility,
    Taxonomy,
    TrustMetricSpec,
    amend_on_bad_service,
    evaluate,
    get_metric,
    initial_state,
)
from trustlab.propagation import (
    Fixed,
    KernelConfig,
    KernelKind,
    MeanNonzero,
    PreTrustVector,
    normalize,
    power_iterate,
    propagate,
)
from trustlab.simulation import SimulationConfig, run_experiment
from trustlab.threats import Model, ThreatModelConfig

N = 1000
many = settings(max_examples=N, deadline=None, database=None,
                suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])

counts = st.integers(0, 200)
unit = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def event_lists(draw, max_n=6, max_len=40):
    """Hypothesis picks the shape and a seed; numpy fills in the events."""
    n = draw(st.integers(2, max_n))
    length = draw(st.integers(0, max_len))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    raters = rng.integers(0, n, length)
    # shift the ratee past the rater so self-ratings never occur
    ratees = rng.integers(0, n - 1, length)
    ratees += ratees >= raters
    values = rng.choice([0.0, 0.25, 0.5, 0.75, 1.0], length)
    return n, [(int(i), int(j), float(v)) for i, j, v in zip(raters, ratees, values)]


def build(n, triples):
    led = InteractionLedger(n)
    for t, (i, j, v) in enumerate(triples):
        led.record(ev(i, j, t, v))
    return led


@st.composite
def square(draw, min_n=2, max_n=12):
    n = draw(st.integers(min_n, max_n))
    density = draw(st.sampled_from([0.0, 0.2, 0.5, 0.8, 1.0]))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    vals = rng.random((n, n))
    # exact endpoints show up often enough to hit the threshold boundaries
    vals = np.where(rng.random((n, n)) < 0.1, rng.choice([0.5, 1.0], (n, n)), vals)
    vals = np.where(rng.random((n, n)) < density, vals, 0.0)
    np.fill_diagonal(vals, 0.0)
    return vals


# --- ledger -----------------------------------------------------------------

@many
@given(event_lists())
def test_ledger_fold_replay_and_tag_partition(data):
    n, triples = data
    led = build(n, triples)
    for (i, j), (d, s) in led.counts.items():
        assert d + s == sum(1 for a, b, _ in triples if (a, b) == (i, j))
    assert sum(d + s for d, s in led.counts.values()) == len(triples)
    again = InteractionLedger.replay(n, led.events)
    assert again.counts == led.counts and again.now == led.now
    parts = [[e for e in led.events if e.honesty is h] for h in Honesty]
    assert sum(map(len, parts)) == len(led.events)


# --- local trust ----------------------------------------------------------

@many
@given(counts, counts, st.floats(0.0, 1.0), st.integers(0, 50), st.integers(0, 50),
       st.floats(0.01, 0.999), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_local_rule_algebra(d, s, theta, g1, g2, a, x, y):
    lo, hi = sorted((g1, g2))
    assert decay_weight(0, hi, a) <= decay_weight(0, lo, a)

    x, y = sorted((x, y))
    assert exp_credibility(x) <= exp_credibility(y)
    # strict once the gap is resolvable and exp(1 - 1/x) stays above underflow
    if x >= 0.01 and y - x > 1e-9:
        assert exp_credibility(x) < exp_credibility(y)

    # symmetry of the beta expectation, exactly and in floating point
    assert Fraction(d + 1, d + s + 2) + Fraction(s + 1, d + s + 2) == 1
    be = beta_expectation_trust(d, s)
    assert be + beta_expectation_trust(s, d) == pytest.approx(1.0, abs=1e-12)

    sr = success_ratio_trust(d, s, theta)
    assert 0.0 <= sr < 1.0
    assert 0.0 < be < 1.0

    assert beta_expectation_trust(d + 1, s) >= be >= beta_expectation_trust(d, s + 1)

    def branch(dd, ss):
        return ss / (dd + ss + 1) <= theta
    if branch(d, s) and branch(d + 1, s):
        assert success_ratio_trust(d + 1, s, theta) >= sr
    if branch(d, s) and branch(d, s + 1):
        assert success_ratio_trust(d, s + 1, theta) <= sr


@many
@given(event_lists())
def test_similarity_symmetric(data):
    n, triples = data
    led = build(n, triples)
    sim = ledger_similarity_matrix(led)
    np.testing.assert_allclose(sim, sim.T, atol=1e-12)
    assert ((0.0 <= sim) & (sim <= 1.0)).all()
    v, w = 0, n - 1
    assert feedback_similarity(led, v, w) == pytest.approx(feedback_similarity(led, w, v), abs=1e-12)


@many
@given(square(), st.data())
def test_fcw_shrinkage(vals, data):
    raw = DirectTrustMatrix(vals)
    n = raw.n
    w = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1))).random(n)
    out = fcw_direct_trust(raw, CredibilityWeights(CredibilityMode.RATER_LEVEL, dict(enumerate(w))))
    assert (out.values <= raw.values + 1e-15).all()
    pw = {e: data.draw(unit) for e in raw.edges()[:8]}
    pw.update({e: 1.0 for e in raw.edges()[8:]})
    out = fcw_direct_trust(raw, CredibilityWeights(CredibilityMode.PAIRWISE, pw))
    assert (out.values <= raw.values + 1e-15).all()


# --- propagation ------------------------------------------------------------

def linear_solve(m, p, eps):
    n = len(p)
    d = (m.sum(axis=1) == 0).astype(float)
    return np.linalg.solve(np.eye(n) - (1 - eps) * (m.T + np.outer(p, d)), eps * p)


@st.composite
def pretrust(draw, n):
    members = draw(st.sets(st.integers(0, n - 1), max_size=n))
    eps = draw(st.floats(0.05, 1.0))
    return PreTrustVector.of(n, members, eps)


@many
@given(square(), st.data())
def test_mass_conservation_and_linear_solve(vals, data):
    n = vals.shape[0]
    m = normalize(vals)
    pre = data.draw(pretrust(n))
    assert abs(power_iterate(m, pre).values.sum() - 1.0) <= 1e-9

    pre = PreTrustVector.of(n, pre.members(), 0.15)
    t = power_iterate(m, pre)
    assert t.converged
    step = (1 - pre.eps) * (m.values.T @ t.values + t.values[m.dangling()].sum() * pre.p) + pre.eps * pre.p
    assert np.abs(t.values - step).sum() < 1e-8
    assert np.abs(t.values - linear_solve(m.values, pre.p, pre.eps)).sum() <= 1e-8


@many
@given(square(), st.data())
def test_tctp_blocking_and_zero_in_edges(vals, data):
    n = vals.shape[0]
    pre = data.draw(pretrust(n))
    tau = data.draw(st.one_of(st.sampled_from([0.0, 0.5, 1.0]), unit))
    t, _ = propagate(DirectTrustMatrix(vals), pre, KernelConfig(KernelKind.TCTP, Fixed(tau)))
    blocked = (vals <= tau).all(axis=0) & (pre.p == 0)
    assert (t.values[blocked] == 0.0).all()

    target = data.draw(st.integers(0, n - 1))
    vals = vals.copy()
    vals[:, target] = 0.0
    members = set(pre.members()) - {target} or {(target + 1) % n}
    t, _ = propagate(DirectTrustMatrix(vals), PreTrustVector.of(n, members), KernelConfig(KernelKind.UDTP))
    assert t.values[target] == 0.0


# --- metrics ----------------------------------------------------------------

@many
@given(st.sampled_from(list(Taxonomy)), st.sampled_from(list(Credibility)),
       st.sampled_from(list(KernelKind)))
def test_taxonomy_consistency(tax, cred, kind):
    kernel = KernelConfig(kind, MeanNonzero() if kind is KernelKind.TCTP else None)
    expected = ("R" if cred is Credibility.NONE else "C") + {"NP": "NP", "UDTP": "UDP", "TCTP": "TCP"}[kind.value]
    if tax is Taxonomy.RANDOM or tax.value == expected:
        TrustMetricSpec("x", tax, credibility=cred, kernel=kernel)
    else:
        with pytest.raises(ValueError):
            TrustMetricSpec("x", tax, credibility=cred, kernel=kernel)


@many
@given(event_lists(max_len=25), st.data())
def test_pinned_participants_stay_zero(data, more):
    n, triples = data
    led = build(n, triples)
    state = initial_state(get_metric("AdaptiveTrust"), n, [0])
    pinned = more.draw(st.sets(st.integers(0, n - 1), min_size=1))
    for p in pinned:
        state = amend_on_bad_service(state, p)
    state = evaluate(state, led)
    assert (state.trust.values[sorted(pinned)] == 0.0).all()


# --- simulation -------------------------------------------------------------

@st.composite
def tiny_configs(draw):
    model = draw(st.sampled_from(list(Model)))
    n_mal = draw(st.integers(2, 4))
    n_b = draw(st.integers(1, n_mal - 1))
    threat = ThreatModelConfig(model, f=draw(unit), eta=draw(unit), gamma=draw(unit),
                               n_type_b=n_b if model in (Model.D, Model.F) else 0,
                               n_type_d=n_mal - n_b if model in (Model.D, Model.F) else 0)
    return SimulationConfig(n_good=draw(st.integers(2, 4)), n_malicious=n_mal, n_pretrusted=1,
                            transactions=draw(st.integers(1, 16)), reeval_every=draw(st.integers(1, 8)),
                            metric=draw(st.sampled_from(["NoneTrust", "BetaTrust", "EigenTrust",
                                                         "ServiceTrust++", "AdaptiveTrust"])),
                            threat=threat, seed=draw(st.integers(0, 2**32 - 1)))


@many
@given(tiny_configs())
def test_simulation_determinism(cfg):
    a, b = run_experiment(cfg), run_experiment(cfg)
    assert a.ledger.events == b.ledger.events
    np.testing.assert_array_equal(a.trajectories, b.trajectories)
    assert a.failed_fraction == b.failed_fraction == a.recomputed_failed_fraction()
    assert a.rounds == cfg.transactions // cfg.reeval_every


# --- attack analysis ------------------------------------------------------

@many
@given(event_lists(), st.data())
def test_attack_ratio_scale_invariant(data, more):
    n, triples = data
    led = build(n, triples)
    rng = np.random.default_rng(more.draw(st.integers(0, 2**32 - 1)))
    m = normalize(rng.random((n, n))).values
    trust = rng.uniform(0.01, 1.0, n)
    c = more.draw(st.floats(0.1, 10.0))
    target = more.draw(st.integers(0, n - 1))

    def ratio(t):
        return attack_success_ratio(IngredientBreakdown(
            target, trust_ingredient(led, t, m, target), distrust_ingredient(led, t, m, target)))
    r1, r2 = ratio(trust), ratio(c * trust)
    if math.isnan(r1):
        assert math.isnan(r2)
    elif math.isinf(r1):
        assert math.isinf(r2)
    else:
        assert r2 == pytest.approx(r1, rel=1e-9)


cost_points = st.tuples(st.integers(1, 30), st.integers(1, 40),
                        st.sampled_from([0.75, 0.85, 0.95]), st.sampled_from([0.05, 0.1, 0.2, 0.3, 0.5]))


@many
@given(cost_points, st.sampled_from([0.2, 0.35, 0.5]))
def test_cost_curve_shape(point, t_m):
    n_h, i_h, t_g, rate = point
    for model in Model:
        try:
            base = closed_form_cost(model, n_h, i_h, t_g, t_m, rate, rate).n_malicious
            more_h = closed_form_cost(model, n_h + 1, i_h, t_g, t_m, rate, rate).n_malicious
        except PreconditionViolated:
            continue
        assert more_h >= base
        if model not in (Model.A, Model.B):
            assert closed_form_cost(model, n_h, i_h + 1, t_g, t_m, rate, rate).n_malicious <= base

    a = closed_form_cost(Model.A, n_h, t_g=t_g, t_m=t_m)
    b = closed_form_cost(Model.B, n_h, t_g=t_g, t_m=t_m)
    assert b.n_malicious == a.n_malicious and b.total_ratings == 2 * a.total_ratings

    # leaked trust raises the price of the attack
    c = closed_form_cost(Model.C, n_h, i_h).n_malicious
    d = closed_form_cost(Model.D, n_h, i_h).n_malicious
    assert closed_form_cost(Model.F, n_h, i_h, gamma=rate).n_malicious >= d
    try:
        assert closed_form_cost(Model.E, n_h, i_h, eta=rate).n_malicious >= c
    except PreconditionViolated:
        pass
