import numpy as np
import pytest

from fsparse import Corpus, load_model, normalize_corpus, read_treebank
from fsparse.cli import main
from fsparse.treebank import write_treebank

from sample_grammar import write_sample

FAST_FIT = ["--epochs", "4", "--batch-size", "8", "--patience", "10"]
FAST_MODEL = ["--encoder", "embedding", "--emb-dim", "24", "--hidden-dim", "8",
              "--ff-dim", "24", "--max-positions", "64"]
FAST_TRAIN = FAST_MODEL + FAST_FIT


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    write_sample(d / "bank.trees", 60, seed=404)
    return d


@pytest.fixture(scope="module")
def trained_model(data_dir):
    path = data_dir / "model.npz"
    code = main(["-q", "train", str(data_dir / "bank.trees"), "--split", "20/5",
                 "--seed", "1", "--model-out", str(path), *FAST_TRAIN])
    assert code == 0
    return path


def test_train_missing_file_exit_2(tmp_path, capsys):
    code = main(["-q", "train", str(tmp_path / "nope.trees"), "--split", "5/2",
                 "--model-out", str(tmp_path / "m.npz")])
    assert code == 2
    assert "not found" in capsys.readouterr().err


def test_train_needs_dev_or_split(data_dir, tmp_path):
    code = main(["-q", "train", str(data_dir / "bank.trees"),
                 "--model-out", str(tmp_path / "m.npz")])
    assert code == 2


def test_train_take_first_split(data_dir, tmp_path, capsys):
    out = tmp_path / "m.npz"
    metrics = tmp_path / "metrics.csv"
    code = main(["-q", "train", str(data_dir / "bank.trees"),
                 "--take-first", "15", "--split", "10/5", "--seed", "3",
                 "--model-out", str(out), "--metrics-out", str(metrics),
                 *FAST_FIT])
    assert code == 0
    assert out.is_file()
    lines = metrics.read_text().strip().splitlines()
    assert lines[0] == "epoch,train_loss,dev_f1"
    assert "best_dev_f1=" in capsys.readouterr().out


def test_train_take_first_too_large(data_dir, tmp_path):
    code = main(["-q", "train", str(data_dir / "bank.trees"),
                 "--take-first", "10000", "--split", "10/5",
                 "--model-out", str(tmp_path / "m.npz")])
    assert code == 2


def test_vocab_size_changes_model(data_dir, tmp_path):
    a, b = tmp_path / "a.npz", tmp_path / "b.npz"
    common = ["-q", "train", str(data_dir / "bank.trees"), "--split", "20/5",
              "--seed", "1", *FAST_TRAIN]
    assert main([*common, "--vocab-size", "10", "--model-out", str(a)]) == 0
    assert main([*common, "--model-out", str(b)]) == 0
    small, full = load_model(a), load_model(b)
    assert len(small.vocab) < len(full.vocab)
    assert len(small.vocab) == 10 + 5  # cap plus specials


def test_parse_writes_one_tree_per_line(trained_model, data_dir, tmp_path):
    raw = tmp_path / "raw.txt"
    raw.write_text("the cat sees a dog\ncat\n", encoding="utf-8")
    out = tmp_path / "pred.trees"
    assert main(["-q", "parse", str(trained_model), str(raw), str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 2
    assert lines[1] == "(NT cat)"


def test_parse_deterministic(trained_model, tmp_path):
    raw = tmp_path / "raw.txt"
    raw.write_text("a man sees the bird near a tree\n", encoding="utf-8")
    out1, out2 = tmp_path / "p1.trees", tmp_path / "p2.trees"
    main(["-q", "parse", str(trained_model), str(raw), str(out1)])
    main(["-q", "parse", str(trained_model), str(raw), str(out2)])
    assert out1.read_bytes() == out2.read_bytes()


def test_parse_empty_line_error(trained_model, tmp_path, capsys):
    raw = tmp_path / "raw.txt"
    raw.write_text("a cat\n\n", encoding="utf-8")
    code = main(["-q", "parse", str(trained_model), str(raw), str(tmp_path / "o.trees")])
    assert code == 1
    assert "line 2" in capsys.readouterr().err


def test_augment_grows_file(data_dir, tmp_path):
    out = tmp_path / "aug.trees"
    code = main(["-q", "augment", str(data_dir / "bank.trees"), str(out),
                 "--size", "100", "--seed", "9"])
    assert code == 0
    grown = read_treebank(out)
    assert len(grown) == 100
    base = normalize_corpus(read_treebank(data_dir / "bank.trees"))
    assert [t.spans for t in grown[:60]] == [t.spans for t in base]


def test_augment_size_equal_passthrough(data_dir, tmp_path):
    out = tmp_path / "same.trees"
    code = main(["-q", "augment", str(data_dir / "bank.trees"), str(out),
                 "--size", "60"])
    assert code == 0
    expected = tmp_path / "expected.trees"
    write_treebank(normalize_corpus(read_treebank(data_dir / "bank.trees")), expected)
    assert out.read_bytes() == expected.read_bytes()


def test_augment_shrink_is_usage_error(data_dir, tmp_path):
    code = main(["-q", "augment", str(data_dir / "bank.trees"),
                 str(tmp_path / "x.trees"), "--size", "3"])
    assert code == 2


def test_selftrain_steps_zero_keeps_predictions(trained_model, data_dir, tmp_path):
    pool = tmp_path / "pool.txt"
    pool.write_text("the cat sees a dog\nevery man buys a book\n", encoding="utf-8")
    out = tmp_path / "st0.npz"
    code = main(["-q", "selftrain", "--model", str(trained_model),
                 "--pool", str(pool), "--steps", "0",
                 "--model-out", str(out), *FAST_FIT])
    assert code == 0
    before, after = load_model(trained_model), load_model(out)
    for name in before.params:
        assert np.array_equal(before.params[name], after.params[name])


def test_selftrain_missing_pool_usage_error(trained_model, tmp_path):
    code = main(["-q", "selftrain", "--model", str(trained_model),
                 "--steps", "2", "--model-out", str(tmp_path / "m.npz")])
    assert code == 2


def test_selftrain_runs_steps(trained_model, data_dir, tmp_path):
    corpus = read_treebank(data_dir / "bank.trees")
    pool = tmp_path / "pool.txt"
    pool.write_text("".join(" ".join(t.sentence.tokens) + "\n" for t in corpus[30:60]),
                    encoding="utf-8")
    out = tmp_path / "st.npz"
    metrics = tmp_path / "st.csv"
    code = main(["-q", "selftrain", "--model", str(trained_model),
                 "--pool", str(pool), "--steps", "2", "--seed", "4",
                 "--model-out", str(out), "--metrics-out", str(metrics),
                 *FAST_FIT])
    assert code == 0
    lines = metrics.read_text().strip().splitlines()
    assert lines[0] == "step,teacher_fit_f1,best_dev_f1,best_epoch"
    assert len(lines) == 3


def test_evaluate_identical_files(data_dir, capsys):
    code = main(["-q", "evaluate", str(data_dir / "bank.trees"),
                 str(data_dir / "bank.trees")])
    assert code == 0
    out = capsys.readouterr().out
    assert "F1" in out and "100.00" in out


def test_evaluate_derived_example(tmp_path, capsys):
    gold = tmp_path / "gold.trees"
    pred = tmp_path / "pred.trees"
    gold.write_text("(NT (NT a cat) (NT is drinking milk))\n", encoding="utf-8")
    pred.write_text("(NT a (NT cat (NT is (NT drinking milk))))\n", encoding="utf-8")
    code = main(["-q", "evaluate", str(gold), str(pred)])
    assert code == 0
    assert "57.14" in capsys.readouterr().out


def test_evaluate_line_count_mismatch(tmp_path, capsys):
    gold = tmp_path / "gold.trees"
    pred = tmp_path / "pred.trees"
    gold.write_text("(NT a b)\n(NT c d)\n", encoding="utf-8")
    pred.write_text("(NT a b)\n", encoding="utf-8")
    code = main(["-q", "evaluate", str(gold), str(pred)])
    assert code == 1


def test_config_file_defaults_and_override(data_dir, tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("split=20/5\nseed=1\nencoder=embedding\nemb_dim=24\n"
                      "hidden_dim=8\nff_dim=24\nepochs=2\nmax_positions=64\n",
                      encoding="utf-8")
    out = tmp_path / "m.npz"
    code = main(["-q", "train", str(data_dir / "bank.trees"), "--config", str(config),
                 "--epochs", "1", "--model-out", str(out)])
    assert code == 0
    model = load_model(out)
    assert model.config.emb_dim == 24  # from the file


def test_config_file_append_flag(trained_model, data_dir, tmp_path):
    corpus = read_treebank(data_dir / "bank.trees")
    pool = tmp_path / "pool.txt"
    pool.write_text("".join(" ".join(t.sentence.tokens) + "\n" for t in corpus[:20]),
                    encoding="utf-8")
    config = tmp_path / "st.cfg"
    config.write_text(f"pool={pool}\nsteps=1\nepochs=2\n", encoding="utf-8")
    out = tmp_path / "m.npz"
    code = main(["-q", "selftrain", "--model", str(trained_model),
                 "--config", str(config), "--model-out", str(out)])
    assert code == 0
    assert out.is_file()


def test_config_file_unknown_key(data_dir, tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("nonsense=1\n", encoding="utf-8")
    code = main(["-q", "train", str(data_dir / "bank.trees"), "--config", str(config),
                 "--split", "5/2", "--model-out", str(tmp_path / "m.npz")])
    assert code == 2


def test_experiment_single_cell(data_dir, tmp_path, capsys):
    out = tmp_path / "grid.csv"
    code = main(["-q", "experiment", "--data", str(data_dir / "bank.trees"),
                 "--test", str(data_dir / "bank.trees"),
                 "--budgets", "10", "--dev-size", "3", "--augment", "0",
                 "--st-steps", "0", "--vocab-sizes", "0", "--seeds", "1",
                 "--out", str(out), *FAST_TRAIN])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "budget,augment,st_steps,vocab_size,n_seeds,mean_f1,std_f1"
    assert len(lines) == 2
    assert lines[1].startswith("10,0,0,0,1,")


def test_experiment_multi_seed_mean(data_dir, tmp_path):
    out = tmp_path / "grid.csv"
    code = main(["-q", "experiment", "--data", str(data_dir / "bank.trees"),
                 "--test", str(data_dir / "bank.trees"),
                 "--budgets", "10", "--dev-size", "3", "--augment", "0",
                 "--st-steps", "0", "--vocab-sizes", "0", "--seeds", "1,2",
                 "--out", str(out), *FAST_TRAIN])
    assert code == 0
    row = out.read_text().strip().splitlines()[1].split(",")
    assert row[4] == "2"  # n_seeds


def test_experiment_malformed_grid(data_dir, tmp_path, capsys):
    code = main(["-q", "experiment", "--data", str(data_dir / "bank.trees"),
                 "--test", str(data_dir / "bank.trees"),
                 "--budgets", "ten", "--seeds", "1"])
    assert code == 2
    assert "budgets" in capsys.readouterr().err


def test_experiment_missing_data_usage_error():
    assert main(["-q", "experiment", "--budgets", "10"]) == 2
