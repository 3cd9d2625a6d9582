import os
import random
from fractions import Fraction as F

import pytest

from quartnest.nests import domain_ok, evaluate, get_family


def pytest_collection_modifyitems(config, items):
    if os.environ.get("QUARTNEST_EXTENDED"):
        return
    skip = pytest.mark.skip(reason="set QUARTNEST_EXTENDED=1 to run")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)


def random_rat(rng, max_height):
    """Uniform-ish nonzero rational with height <= max_height."""
    return F(rng.choice((-1, 1)) * rng.randint(1, max_height), rng.randint(1, max_height))


def random_points(family, count, max_height=30, seed=0):
    """`count` admissible NestPoints of the family with parameter heights <= max_height."""
    rng = random.Random(f"{family}-{seed}")
    fam = get_family(family)
    out = []
    while len(out) < count:
        args = tuple(random_rat(rng, max_height) for _ in range(fam.nparams))
        if domain_ok(fam, *args):
            out.append(evaluate(fam, *args))
    return out


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
