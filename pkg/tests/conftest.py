import pytest

from gameexp.localmodel import LocalModel
from gameexp.tree import iid_tree, stationary_tree

BIN = ("0", "1")


@pytest.fixture
def point_mass_tree():
    """Every local model puts all mass on state 0."""
    return iid_tree(LocalModel(BIN, ((1.0, 0.0),)))


@pytest.fixture
def imprecise_stationary():
    root = LocalModel(BIN, ((0.5, 0.5),))
    return stationary_tree(root, {
        "0": LocalModel(BIN, ((0.5, 0.5), (0.9, 0.1))),
        "1": LocalModel(BIN, ((1.0, 0.0),)),
    })


@pytest.fixture
def fair_chain():
    """Two states; from 'a' stay or leave to 'b' with probability 1/2, 'b' absorbs."""
    states = ("a", "b")
    half = LocalModel(states, ((0.5, 0.5),))
    return stationary_tree(half, {"a": half, "b": LocalModel(states, ((0.0, 1.0),))})


@pytest.fixture
def gb_chain():
    states = ("g", "b")
    return stationary_tree(LocalModel(states, ((1.0, 0.0),)), {
        "g": LocalModel(states, ((0.9, 0.1), (0.5, 0.5))),
        "b": LocalModel(states, ((0.0, 1.0),)),
    })


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance_line(request):
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    def emit(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else "")
        request.config.stash[_ACCEPTANCE].append((number, line))
        print(line)
        return ok
    return emit


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
