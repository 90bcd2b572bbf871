import numpy as np
import pytest

from fsparse import (Corpus, ScorerConfig, SelfTrainConfig, Sentence, TrainConfig,
                     build_vocabulary, init_model, normalize_corpus, predict_corpus,
                     relabel, score_corpus, self_train, train)
from fsparse.treebank import bracketed_to_tree

from sample_grammar import generate_lines


def _setup(n_labeled=12, n_pool=40, seed=55):
    corpus = normalize_corpus(Corpus([bracketed_to_tree(l)
                                      for l in generate_lines(n_labeled + n_pool, seed=seed)]))
    labeled = corpus[:n_labeled]
    pool = [t.sentence for t in corpus[n_labeled:]]
    vocab = build_vocabulary(corpus, 10_000)
    config = ScorerConfig(emb_dim=32, encoder="embedding", hidden_dim=16,
                          ff_dim=32, seed=1, max_positions=64)
    model = init_model(config, vocab)
    tc = TrainConfig(epochs=10, batch_size=8, learning_rate=3e-3, patience=10, seed=1)
    model, _ = train(model, labeled, labeled, tc)
    return model, pool, tc


def test_relabel_deterministic_and_sized():
    model, pool, _ = _setup()
    a = relabel(model, pool)
    b = relabel(model, pool)
    assert len(a) == len(pool)
    assert a == b
    for tree in a:
        tree.validate()


def test_relabel_empty_pool():
    model, _, _ = _setup(n_pool=5)
    assert len(relabel(model, [])) == 0


def test_relabel_single_token_sentence():
    model, _, _ = _setup(n_pool=5)
    single = [Sentence(["cat"])]
    corpus = relabel(model, single)
    assert corpus[0].spans == {(0, 1)}


def test_zero_steps_returns_input_model():
    model, pool, tc = _setup()
    out, reports = self_train(model, pool, None, SelfTrainConfig(steps=0, train=tc))
    assert out is model
    assert reports == []


def test_steps_require_pool():
    model, _, tc = _setup(n_pool=5)
    with pytest.raises(ValueError):
        self_train(model, [], None, SelfTrainConfig(steps=1, train=tc))


def test_self_train_two_steps_reports_and_fit():
    model, pool, tc = _setup()
    config = SelfTrainConfig(steps=2, train=tc, seed=3)
    student, reports = self_train(model, pool, None, config)
    assert [r.step for r in reports] == [1, 2]
    assert all(0.0 <= r.teacher_fit_f1 <= 100.0 for r in reports)
    assert student is not model


def test_self_train_deterministic():
    model, pool, tc = _setup()
    config = SelfTrainConfig(steps=2, train=tc, seed=3)
    m1, r1 = self_train(model, pool, None, config)
    m2, r2 = self_train(model, pool, None, config)
    for name in m1.params:
        assert np.array_equal(m1.params[name], m2.params[name])
    assert [r.teacher_fit_f1 for r in r1] == [r.teacher_fit_f1 for r in r2]


def test_self_train_uses_no_gold_interface():
    # the pool interface accepts sentences only; passing a Corpus must fail
    model, pool, tc = _setup(n_pool=8)
    trees = relabel(model, pool)
    with pytest.raises(AttributeError):
        self_train(model, trees, None, SelfTrainConfig(steps=1, train=tc))


def test_explicit_dev_pool_keeps_whole_pool_for_training():
    model, pool, tc = _setup(n_pool=20)
    dev_pool = pool[:4]
    config = SelfTrainConfig(steps=1, train=tc, seed=5)
    _, reports = self_train(model, pool, dev_pool, config)
    assert len(reports) == 1


def test_dump_dir_writes_step_files(tmp_path):
    model, pool, tc = _setup(n_pool=15)
    config = SelfTrainConfig(steps=1, train=tc, seed=2, dump_dir=str(tmp_path))
    self_train(model, pool, None, config)
    assert (tmp_path / "step1_pool.trees").is_file()
    assert (tmp_path / "step1_dev.trees").is_file()


def test_warm_start_mode_runs():
    model, pool, tc = _setup()
    config = SelfTrainConfig(steps=1, train=tc, seed=4, from_scratch=False)
    student, reports = self_train(model, pool, None, config)
    assert len(reports) == 1


def test_student_fits_teacher_predictions():
    model, pool, _ = _setup(n_labeled=15, n_pool=60)
    tc = TrainConfig(epochs=25, batch_size=8, learning_rate=3e-3, patience=25, seed=1)
    config = SelfTrainConfig(steps=1, train=tc, seed=7)
    student, reports = self_train(model, pool, None, config)
    assert reports[0].teacher_fit_f1 >= 85.0
