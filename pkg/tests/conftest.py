import re

import numpy as np
import pytest

from repeater_sched.policies import EntPair, NetworkSnapshot, Span


def make_snapshot(sr_f, rd_f, births_sr=None, births_rd=None, slot=0):
    m = max(len(sr_f), len(rd_f), 1)
    births_sr = births_sr or [0] * len(sr_f)
    births_rd = births_rd or [0] * len(rd_f)
    sr = [EntPair(f"sr{i}", Span.SR, i, i, f, births_sr[i]) for i, f in enumerate(sr_f)]
    rd = [EntPair(f"rd{i}", Span.RD, m + i, i, f, births_rd[i]) for i, f in enumerate(rd_f)]
    return NetworkSnapshot(tuple(sr), tuple(rd), slot)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def leaf_ids(pair_id: str) -> list[str]:
    """Link-level ancestors named in an operation output id like ``s(p(a,b),c)``."""
    return re.findall(r"(?:sr|rd)\d+(?:@\d+)?", pair_id)


def lle_birth(leaf: str) -> int:
    return int(leaf.split("@")[1])


def check_slot_invariants(state, params, report):
    """Occupancy, threshold and birth-slot checks after one advance_slot."""
    occ = state.occupancy()
    m = params.memories
    assert len(occ["s"]) <= m and len(occ["d"]) <= m and len(occ["r"]) <= 2 * m
    assert occ["s"] <= set(range(m)) and occ["d"] <= set(range(m)) and occ["r"] <= set(range(2 * m))
    # one pair per memory
    mems = [mem for lp in state.live for mem in lp.pair.memories()]
    assert len(mems) == len(set(mems))
    for lp in state.live:
        if lp.anchor_slot < state.slot:  # excludes pairs generated this step
            assert lp.fidelity_at(state.slot, params.decay) >= params.discard_threshold
    for p in report.delivered:
        assert p.fidelity >= params.discard_threshold
        assert p.birth_slot == min(lle_birth(x) for x in leaf_ids(p.id))


# --- acceptance summary ------------------------------------------------------

_CRITERIA: list[tuple[int, str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    number, title = mark.args
    detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    _CRITERIA.append((number, title, "PASS" if rep.passed else "FAIL", detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status, detail in sorted(_CRITERIA):
        line = f"[{status}] criterion {number}: {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
