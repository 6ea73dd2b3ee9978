import math

import pytest

import dcs


def test_filter_and_prompts():
    text = "Inflation moved higher. The weather was pleasant. Interest rates were lowered."
    assert dcs.filter_sentences(text) == ["Inflation moved higher.", "Interest rates were lowered."]
    a = dcs.Statement("m1", "2020-01-29", "Inflation moved higher.")
    b = dcs.Statement("m2", "2020-03-15", "Unemployment was rising.")
    absolute, relative = dcs.build_prompts(None, a)
    assert "Inflation moved higher." in absolute and relative is None
    _, relative = dcs.build_prompts(a, b)
    assert relative.index("Inflation") < relative.index("Unemployment")


def test_statistics():
    assert dcs.aggregate_meeting(3, 1, 10) == 0.2
    assert dcs.spearman([1, 2, 3, 4], [10, 20, 25, 100]) == pytest.approx(1.0)
    r = dcs.ols_newey_west([3.0 * x for x in range(10)], list(range(10)), lag=0)
    assert r.beta == pytest.approx(3.0)
    with pytest.raises(dcs.ValidationError):
        dcs.pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(ValueError):
        dcs.aggregate_meeting(0, 0, 0)


def test_store_round_trip(tmp_path):
    recs = [dcs.EmbeddingRecord("m1", dcs.View.absolute, 0, [1.0, -2.5]),
            dcs.EmbeddingRecord("m2", dcs.View.absolute, 0, [0.5, 0.25]),
            dcs.EmbeddingRecord("m2", dcs.View.relative, 0, [3.0, 4.0])]
    path = tmp_path / "s.dcse"
    dcs.write_store(dcs.EmbeddingStore(recs), path)
    back = dcs.read_store(path)
    assert len(back) == 3
    assert back.records[0].vector == [1.0, -2.5]
    assert back.dim(dcs.View.relative, 0) == 2
    with pytest.raises(dcs.ConflictError):
        dcs.EmbeddingStore(recs + recs[:1])
    with pytest.raises(dcs.IoError):
        dcs.read_store(tmp_path / "missing.dcse")


def test_synthetic_pipeline():
    cfg = dcs.SynthConfig()
    cfg.seed = 3
    cfg.signal_scale = 10.0
    data = dcs.generate(cfg)
    assert len(data.corpus) == 50 and len(data.anchors) == 30
    train_cfg = dcs.TrainConfig.preset("deepseek-r1-14b")
    train_cfg.seed = 3
    params, scores = dcs.pipeline(data.corpus, data.store, data.anchors, config=train_cfg)
    assert len(scores) == 50
    assert scores[0].z_rel is None and scores[1].delta is not None
    assert all(abs(m.delta) < params.alpha for m in scores[1:])
    rho = dcs.spearman([m.s for m in scores], data.true_stance)
    assert rho > 0.9


def test_training_is_deterministic_and_validated():
    data = dcs.generate(dcs.SynthConfig())
    pairs = dcs.build_pairs(data.corpus, data.store, 0)
    assert (pairs.n_meetings, pairs.n_pairs, pairs.dim) == (50, 49, 16)
    cfg = dcs.TrainConfig()
    cfg.epochs = 50
    a, b = dcs.train(pairs, cfg), dcs.train(pairs, cfg)
    assert a.params.theta_abs == b.params.theta_abs
    assert [r.epoch for r in a.trace] == list(range(50))
    assert dcs.lambda_schedule(150, cfg) == pytest.approx(cfg.lambda_max / 2)
    flipped = a.params.flipped()
    assert dcs.loss(pairs, a.params, 0.1, 5.0).total == pytest.approx(dcs.loss(pairs, flipped, 0.1, 5.0).total,
                                                                       abs=1e-12)
    cfg.epochs = 0
    with pytest.raises(dcs.ValidationError):
        dcs.train(pairs, cfg)
    assert not math.isnan(a.trace[-1].l_conf)
