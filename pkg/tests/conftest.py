import json
import time
from pathlib import Path

import pytest

from audioactive import RuleSpec, analyze, char_poly
from audioactive.chemistry import relabel

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def stutter10():
    """Base-10 stutter chemistry from seed 0, ordered by abundance."""
    return analyze(RuleSpec.stutter(), "0", exact=False)


@pytest.fixture(scope="session")
def charpoly10_timed(stutter10):
    # a few minutes on one core; shared by every test that needs it
    start = time.perf_counter()
    poly = char_poly(stutter10.matrix)
    return poly, time.perf_counter() - start


@pytest.fixture(scope="session")
def charpoly10(charpoly10_timed):
    return charpoly10_timed[0]


@pytest.fixture(scope="session")
def published_table():
    rows = [line.rstrip("\n").split("\t") for line in (DATA / "published_table.tsv").read_text().splitlines()]
    return {int(n): expr for n, expr in rows}


@pytest.fixture(scope="session")
def minimal_poly():
    return json.loads((DATA / "minimal_poly_b10.json").read_text())


@pytest.fixture(scope="session")
def published_order(stutter10):
    """The chemistry renumbered to the published table's ids.

    Our ids sort by exact abundance; the published table differs on 132
    elements, recorded as ``our id -> published id``.
    """
    moved = {int(k): v for k, v in json.loads((DATA / "published_permutation.json").read_text()).items()}
    n = stutter10.chemistry.n
    ours = {moved.get(i, i): i for i in range(1, n + 1)}
    return relabel(stutter10.chemistry, [ours[k] for k in range(1, n + 1)])
