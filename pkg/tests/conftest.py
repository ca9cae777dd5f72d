import re
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import strategies as st

from nhstab.dynamics import NHHamiltonian


def random_hermitian(rng, dim, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (a + a.conj().T) / 2


def random_pure(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    r = a @ a.conj().T
    return r / np.trace(r).real


def random_traceless(rng, dim, scale=1.0):
    h = random_hermitian(rng, dim, scale)
    return h - np.trace(h) / dim * np.eye(dim)


def random_nh(rng, dim, gamma_scale=1.0, hbar=1.0):
    return NHHamiltonian(random_hermitian(rng, dim), random_hermitian(rng, dim, gamma_scale), hbar)


seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


_CRITERION = re.compile(r"test_acceptance\.py::test_c(\d+)_")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes = defaultdict(list)
    for key in ("passed", "failed", "xfailed", "xpassed", "error", "skipped"):
        for rep in terminalreporter.stats.get(key, []):
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if m and (rep.when == "call" or key in ("error", "skipped")):
                outcomes[int(m.group(1))].append(key)
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(outcomes):
        res = outcomes[n]
        bad = [r for r in res if r in ("failed", "error", "xfailed", "xpassed")]
        status = "PASS" if not bad else "FAIL"
        note = ""
        if "xfailed" in res:
            note = f" ({res.count('xfailed')} case(s) known unattainable, see ledger)"
        terminalreporter.write_line(f"criterion {n:2d}: {status}  [{len(res) - len(bad)}/{len(res)} cases]{note}")
