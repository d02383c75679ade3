import numpy as np
import pytest

from adlab.population import (N_STRUCTURED, PopulationConfig, ResponseModel,
                              SegmentParams, generate_population,
                              organic_conversion, response_probs,
                              response_probs_batch)


def test_invalid_configs_rejected():
    with pytest.raises(ValueError):
        PopulationConfig(n_users=0)
    with pytest.raises(ValueError):
        PopulationConfig(n_users=10, d=0)
    with pytest.raises(ValueError):
        PopulationConfig(n_users=10, n_segments=2, segments=[
            SegmentParams(weight=0.7), SegmentParams(weight=0.7)])


def test_generation_deterministic():
    cfg = PopulationConfig(n_users=1000, d=16, seed=7)
    a = generate_population(cfg)
    b = generate_population(PopulationConfig(n_users=1000, d=16, seed=7))
    assert np.array_equal(a.user_ids, b.user_ids)
    assert np.array_equal(a.embedding, b.embedding)
    assert np.array_equal(a.feature_matrix(), b.feature_matrix())
    c = generate_population(PopulationConfig(n_users=1000, d=16, seed=8))
    assert not np.array_equal(a.embedding, c.embedding)


def test_recency_nesting_holds_everywhere():
    pop = generate_population(PopulationConfig(n_users=20_000, d=4, seed=3))
    assert not np.any(pop.active_1d & ~pop.active_7d)
    assert not np.any(pop.active_7d & ~pop.active_28d)


def test_user_ids_unique():
    pop = generate_population(PopulationConfig(n_users=50_000, d=4, seed=5))
    assert len(np.unique(pop.user_ids)) == len(pop)


def test_disjoint_age_segments_separate_means():
    young = SegmentParams(weight=0.5, age_probs=(0.5, 0.5, 0, 0, 0, 0))
    old = SegmentParams(weight=0.5, age_probs=(0, 0, 0, 0, 0.5, 0.5))
    pop = generate_population(PopulationConfig(
        n_users=4000, d=8, n_segments=2, seed=11, segments=[young, old]))
    m0 = pop.age_bin[pop.segment == 0].mean()
    m1 = pop.age_bin[pop.segment == 1].mean()
    assert m1 - m0 > 1.0


def test_segments_linearly_separable_from_embedding():
    from sklearn.linear_model import LogisticRegression

    pop = generate_population(PopulationConfig(n_users=4000, d=72, seed=13))
    clf = LogisticRegression(max_iter=2000)
    clf.fit(pop.embedding[:3000], pop.segment[:3000])
    acc = clf.score(pop.embedding[3000:], pop.segment[3000:])
    assert acc > 0.9


def test_feature_matrix_layout():
    pop = generate_population(PopulationConfig(n_users=200, d=12, seed=1))
    feats = pop.feature_matrix()
    assert feats.shape == (200, N_STRUCTURED + 12)
    names = pop.feature_names()
    assert names[0] == "gender_male" and names[N_STRUCTURED] == "embedding_00"
    # per-user view agrees with the matrix row
    u = pop[17]
    assert np.allclose(u.structured_features(), feats[17, :N_STRUCTURED])
    assert np.allclose(u.embedding, feats[17, N_STRUCTURED:])
    # exactly one age indicator set per user
    assert np.all(feats[:, 1:7].sum(axis=1) == 1.0)


def test_response_probs_logistic():
    model = ResponseModel(click_weight=np.zeros(3), conv_weight=np.zeros(3),
                          click_bias=0.0, conv_bias=0.0)
    pop = generate_population(PopulationConfig(n_users=5, d=3, seed=2))
    p_click, p_conv = response_probs(model, pop[0], np.zeros(3))
    assert p_click == 0.5 and p_conv == 0.5

    saturated = ResponseModel(click_weight=np.zeros(3), conv_weight=np.zeros(3),
                              click_bias=-50.0, conv_bias=0.0)
    p_click, _ = response_probs(saturated, pop[0], np.zeros(3))
    assert p_click < 1e-9

    # d=2 hand evaluation: logit = bias + sum(w * e * c)
    model2 = ResponseModel(click_weight=np.array([2.0, -1.0]),
                           conv_weight=np.array([0.5, 0.5]),
                           click_bias=0.3, conv_bias=-0.2)
    user = pop[1]
    user.embedding = np.array([0.4, -1.2])
    creative = np.array([1.0, 0.5])
    p_click, p_conv = response_probs(model2, user, creative)
    logit_click = 0.3 + 2.0 * 0.4 * 1.0 + (-1.0) * (-1.2) * 0.5
    logit_conv = -0.2 + 0.5 * 0.4 * 1.0 + 0.5 * (-1.2) * 0.5
    assert p_click == pytest.approx(1 / (1 + np.exp(-logit_click)), rel=1e-12)
    assert p_conv == pytest.approx(1 / (1 + np.exp(-logit_conv)), rel=1e-12)


def test_response_dimension_mismatch():
    model = ResponseModel.default(4)
    pop = generate_population(PopulationConfig(n_users=2, d=4, seed=0))
    with pytest.raises(ValueError):
        response_probs(model, pop[0], np.zeros(5))


def test_batch_matches_scalar():
    pop = generate_population(PopulationConfig(n_users=50, d=6, seed=9))
    model = ResponseModel.default(6, click_bias=-1.0, conv_bias=-2.0)
    vec = np.linspace(-1, 1, 6)
    pc, pv = response_probs_batch(model, pop, vec)
    for i in (0, 13, 49):
        a, b = response_probs(model, pop[i], vec)
        assert pc[i] == pytest.approx(a, rel=1e-12)
        assert pv[i] == pytest.approx(b, rel=1e-12)


def test_organic_conversion_rates():
    pop = generate_population(PopulationConfig(n_users=1, d=4, seed=0))
    user = pop[0]
    never = ResponseModel.default(4, organic_rate=0.0)
    always = ResponseModel.default(4, organic_rate=1.0)
    rng = np.random.default_rng(0)
    assert not any(organic_conversion(never, user, rng) for _ in range(200))
    assert all(organic_conversion(always, user, rng) for _ in range(200))

    model = ResponseModel.default(4, organic_rate=0.1)
    rng = np.random.default_rng(1)
    hits = sum(organic_conversion(model, user, rng) for _ in range(100_000))
    assert abs(hits / 100_000 - 0.1) < 0.005


def test_invalid_model_params():
    with pytest.raises(ValueError):
        ResponseModel.default(3, organic_rate=1.5)
    with pytest.raises(ValueError):
        ResponseModel(click_weight=np.array([np.inf]), conv_weight=np.ones(1))


def test_csv_round_trip(tmp_path):
    pop = generate_population(PopulationConfig(n_users=300, d=9, seed=21))
    path = tmp_path / "pop.csv"
    pop.to_csv(path)
    back = type(pop).from_csv(path)
    assert np.array_equal(back.user_ids, pop.user_ids)
    assert np.array_equal(back.age_bin, pop.age_bin)
    assert np.allclose(back.feature_matrix(), pop.feature_matrix())
