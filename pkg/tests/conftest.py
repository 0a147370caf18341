import random
from fractions import Fraction

import pytest

from privext.core import Prior, StateSpace, complete_graph, cycle_graph, path_graph
from privext.diffpriv import differential_graph

CORPUS_NAMES = [
    "K3", "K4", "K5", "P3", "P4", "C4",
    "D2x2", "D2x3", "D3x3", "D2x2x2", "D3x2",
]

DIFFERENTIAL_DIMS = {
    "D2x2": (2, 2),
    "D2x3": (2, 3),
    "D3x3": (3, 3),
    "D2x2x2": (2, 2, 2),
    "D3x2": (3, 2),
}


def corpus_graph(name):
    if name in DIFFERENTIAL_DIMS:
        return differential_graph(DIFFERENTIAL_DIMS[name])
    kind, n = name[0], int(name[1:])
    states = StateSpace.of_size(n)
    return {"K": complete_graph, "P": path_graph, "C": cycle_graph}[kind](states)


def random_prior(n, seed):
    """Interior rational prior with small integer weights; fixed by the seed."""
    rng = random.Random(1000 * seed + n)
    w = [rng.randint(1, 9) for _ in range(n)]
    total = sum(w)
    return Prior(tuple(Fraction(x, total) for x in w))


def corpus_priors(n):
    return [("uniform", Prior.uniform(n)), ("rand1", random_prior(n, 1)), ("rand2", random_prior(n, 2))]


@pytest.fixture(params=CORPUS_NAMES)
def corpus_name(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
