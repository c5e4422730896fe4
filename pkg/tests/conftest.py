import re
from functools import lru_cache

import numpy as np
import pytest

from mastertau.model import SpinChainSpec
from mastertau.spinchain import spectrum


@lru_cache(maxsize=None)
def random_spec(N: int, n: int, seed: int = 1, K: int = 6) -> SpinChainSpec:
    return SpinChainSpec.random(N, n, seed=seed, K=K)


@lru_cache(maxsize=None)
def cached_spectrum(spec: SpinChainSpec):
    return spectrum(spec)


def crandn(rng, size=None, scale=1.0):
    return scale * (rng.normal(size=size) + 1j * rng.normal(size=size))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def spec23():
    return random_spec(2, 3)


@pytest.fixture(scope="session")
def spec32():
    return random_spec(3, 2)


# acceptance verdicts, printed as a block at the end of the run
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def record_verdict(label: str, ok: bool, detail: str) -> bool:
    line = f"{label}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    ACCEPTANCE[label] = (ok, detail)
    return ok


def _label_key(label: str):
    num, suffix = re.match(r"\D*(\d+)(.*)", label).groups()
    return int(num), suffix


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE, key=_label_key):
        ok, detail = ACCEPTANCE[label]
        terminalreporter.write_line(f"{label}: {'PASS' if ok else 'FAIL'} ({detail})")
