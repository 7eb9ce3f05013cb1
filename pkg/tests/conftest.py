from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from protest_pipeline.store import EventStore
from protest_pipeline.text_features import featurize, tokenize
from protest_pipeline.training import LabeledDoc

FIXTURES = Path(__file__).parent / "fixtures"

# One line per acceptance criterion, printed after the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

FILLER_WORDS = (
    "the a of on in at to and for with from said over after before city "
    "state county street park school board year month week report local "
    "people group members public plan budget new two three office"
).split()

# One distinctive marker vocabulary per counting class.
CLASS_MARKERS = {
    0: "market stocks earnings shares index trading quarterly dividend".split(),
    1: "protest rally march demonstrators chanting signs downtown crowd".split(),
    2: "counterprotest opposing factions dueling rival confrontation across".split(),
    3: "statewide nationwide cities simultaneous coordinated walkouts chapters sister".split(),
}


def make_planted_doc(cls: int, rng: np.random.Generator, dim: int) -> LabeledDoc:
    n_filler = int(rng.integers(30, 60))
    words = [FILLER_WORDS[int(i)] for i in rng.integers(0, len(FILLER_WORDS), n_filler)]
    markers = CLASS_MARKERS[cls]
    for _ in range(int(rng.integers(6, 12))):
        words.insert(int(rng.integers(0, len(words))), markers[int(rng.integers(0, len(markers)))])
    text = " ".join(words)
    return LabeledDoc(features=featurize(tokenize(text), dim), label=cls)


def make_planted_corpus(
    n: int = 400,
    dim: int = 4096,
    seed: int = 7,
    proportions: tuple[float, ...] = (0.45, 0.33, 0.12, 0.10),
) -> list[LabeledDoc]:
    """Linearly separable 4-class corpus with class-specific keywords."""
    rng = np.random.default_rng(seed)
    docs = []
    counts = [round(p * n) for p in proportions]
    counts[0] += n - sum(counts)
    for cls, count in enumerate(counts):
        for _ in range(count):
            docs.append(make_planted_doc(cls, rng, dim))
    order = rng.permutation(len(docs))
    return [docs[i] for i in order]


@pytest.fixture
def store() -> EventStore:
    s = EventStore(":memory:")
    yield s
    s.close()


@pytest.fixture
def fixture_site_url() -> str:
    return (FIXTURES / "site").resolve().as_uri() + "/"


PROTEST_VOCAB = (
    "teachers rally capitol school funding several hundred rallied steps "
    "tuesday demanding higher pay smaller class sizes public schools across "
    "state educators wearing red shirts chanted waved hand painted signs "
    "lawmakers arrived morning session union leaders protest actions planned "
    "legislative season statewide walkout possible spring spokesperson "
    "governor budget proposal money classrooms claim disputes marchers "
    "demonstrators marched downtown gun laws organizers crowd chanting "
    "counterprotesters courthouse vigil picket strike statehouse"
).split()

FINANCE_VOCAB = (
    "dow jones industrial average rallied points thursday quarterly earnings "
    "major banks beat analyst expectations shares technology companies led "
    "market higher broader index closing near record trading volume above "
    "recent analysts investors shrugged weak retail sales data betting "
    "consumer spending recover next quarter inventories stabilize bond "
    "yields edged lower dollar little changed against currencies ahead "
    "central bank meeting week stocks rally futures"
).split()

DOMAIN_DIM = 2048


def make_domain_corpus(n_per_class: int = 150, seed: int = 17) -> list[LabeledDoc]:
    rng = np.random.default_rng(seed)
    docs = []
    for label, vocab in ((0, FINANCE_VOCAB), (1, PROTEST_VOCAB)):
        for _ in range(n_per_class):
            length = int(rng.integers(30, 60))
            words = [vocab[int(i)] for i in rng.integers(0, len(vocab), length)]
            # Realistic dilution: articles are mostly neutral words.
            words += [FILLER_WORDS[int(i)] for i in rng.integers(0, len(FILLER_WORDS), length)]
            docs.append(LabeledDoc(features=featurize(words, DOMAIN_DIM), label=label))
    order = rng.permutation(len(docs))
    return [docs[i] for i in order]


@pytest.fixture(scope="session")
def domain_model_and_threshold():
    """Domain model trained on fixture-flavored vocabulary plus its skip threshold."""
    from protest_pipeline.linear_model import TASK_DOMAIN2, predict
    from protest_pipeline.training import TrainConfig, calibrate_threshold, split_corpus, train

    corpus = make_domain_corpus()
    config = TrainConfig(iterations=600, eval_every=200, seed=17)
    model, _ = train(corpus, TASK_DOMAIN2, ("out_domain", "in_domain"), DOMAIN_DIM, config)
    _, val_idx, _ = split_corpus(len(corpus), config.split, config.seed)
    scored = [
        (float(predict(model, corpus[i].features)[1]), bool(corpus[i].label)) for i in val_idx
    ]
    threshold = calibrate_threshold(scored, max_fpr=0.017)
    return model, threshold
