import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from subalign.bpe import learn_bpe  # noqa: E402
from subalign.synthetic import synthetic_pair  # noqa: E402


class SmallFixture:
    """A few hundred synthetic pairs with gold on the appended evaluation part."""

    def __init__(self, n_train=400, n_eval=80, seed=0):
        self.pair = synthetic_pair(n_train, n_eval, seed)
        self.corpus, self.gold = self.pair.combined()
        self.tables = (learn_bpe(self.corpus.source_sentences, 100_000),
                       learn_bpe(self.corpus.target_sentences, 100_000))


@pytest.fixture(scope="session")
def small():
    return SmallFixture()


@pytest.fixture(scope="session")
def small_b():
    return SmallFixture(seed=1)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
