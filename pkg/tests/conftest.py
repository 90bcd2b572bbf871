import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sample_grammar import write_sample  # noqa: E402

from fsparse import Corpus, read_treebank  # noqa: E402


@pytest.fixture(scope="session")
def sample_path(tmp_path_factory) -> Path:
    """A 1,200-tree deterministic toy treebank (labeled, with punctuation)."""
    path = tmp_path_factory.mktemp("data") / "sample.trees"
    write_sample(path, 1200, seed=20240)
    return path


@pytest.fixture(scope="session")
def sample_corpus(sample_path) -> Corpus:
    return read_treebank(sample_path)
