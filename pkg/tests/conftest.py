from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dirichlet_lab.circle_sets import (CantorSpec, build_cantor, build_point_sequence,
                                       build_theta_sequence, finite_set, single_point)

settings.register_profile("lab", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lab")


@pytest.fixture(scope="session")
def point():
    return single_point(0.0)


@pytest.fixture(scope="session")
def two_points():
    return finite_set([0.0, math.pi])


@pytest.fixture(scope="session")
def cantor_third():
    return build_cantor(CantorSpec(1.0 / 3.0, 14))


@pytest.fixture(scope="session")
def cantor_quarter():
    return build_cantor(CantorSpec(0.25, 14))


@pytest.fixture(scope="session")
def cantor_small():
    return build_cantor(CantorSpec(1.0 / 3.0, 6))


@pytest.fixture(scope="session")
def symmetric_seq():
    return build_point_sequence("symmetric", 1.0, 4096)


@pytest.fixture(scope="session")
def one_sided_seq():
    return build_point_sequence("one_sided", 1.0, 4096)


@pytest.fixture(scope="session")
def theta_set():
    return build_theta_sequence(0.25, 3.0, 4096)


@pytest.fixture(scope="session")
def bundled_sets(point, cantor_third, symmetric_seq, one_sided_seq, theta_set):
    return {"point": point, "cantor": cantor_third, "symmetric": symmetric_seq,
            "one_sided": one_sided_seq, "theta": theta_set}


def scan_distance(E, thetas):
    """Brute-force chordal distance: the minimum over the gap endpoints, 0 inside E."""
    ends = np.concatenate([E.starts, E.starts + E.lengths])
    th = np.asarray(thetas, float)
    d = np.abs(np.exp(1j * th)[:, None] - np.exp(1j * ends)[None, :]).min(axis=1)
    _, _, inside = E.locate(th)
    return np.where(inside, d, 0.0)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(label: str, ok: bool, detail: str) -> bool:
    """Remember a PASS/FAIL line for the terminal summary and echo it."""
    line = f"criterion {label}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
