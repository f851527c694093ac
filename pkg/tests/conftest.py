import numpy as np
import pytest

from qbsc import qmath
from qbsc.ensembles import Ensemble, all_labels, average_state, random_density_matrix
from qbsc.protocols import lockcom, two_basis_set

_CRITERIA = []


def record_criterion(number, name, passed, detail=""):
    line = f"[criterion {number}] {'PASS' if passed else 'FAIL'}  {name}"
    if detail:
        line += f"  ({detail})"
    print(line)
    _CRITERIA.append(line)


@pytest.fixture
def criterion():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA):
            terminalreporter.write_line(line)


def random_full_ensemble(n, d, rng, uniform=True):
    priors = np.full(2 ** n, 2.0 ** -n) if uniform else rng.dirichlet(np.ones(2 ** n))
    states = np.array([random_density_matrix(d, rng, int(rng.integers(1, d + 1))) for _ in range(2 ** n)])
    return Ensemble(n, all_labels(n), priors, states)


def two_basis_ensemble(n):
    return lockcom(two_basis_set(n)).ensemble()


def ket(*amps):
    v = np.array(amps, dtype=complex)
    return v / np.linalg.norm(v)


PLUS = ket(1, 1)
ZERO = ket(1, 0)
ONE = ket(0, 1)


def proj(v):
    return qmath.projector(v)


def joint_nonuniformity(e):
    """Direct definition: trace distance of the joint label-state matrix from the decoupled one."""
    k = 2 ** e.n
    rho = average_state(e)
    joint = np.zeros((k * e.dim, k * e.dim), dtype=complex)
    for lab, p, r in zip(e.labels, e.priors, e.states):
        joint += p * np.kron(qmath.projector(qmath.basis_state(int(lab, 2), k)), r)
    decoupled = np.kron(np.eye(k) / k, rho)
    return 0.5 * np.abs(np.linalg.eigvalsh(joint - decoupled)).sum()
