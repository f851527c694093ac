"""
Labeled-state ensembles ``{p_x, rho_x}``, measurements on them and the
nonuniformity ``d(E)``.

Labels are bit strings; index ``i`` of a full ensemble corresponds to the
label ``format(i, f"0{n}b")`` so the first character is the most
significant bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import qmath
from .errors import ValidationError

__all__ = [
    "Ensemble",
    "Povm",
    "Channel",
    "all_labels",
    "label_bits",
    "average_state",
    "lockcom_ensemble",
    "trivial_ensemble",
    "orthogonal_ensemble",
    "identical_ensemble",
    "random_ensemble",
    "random_density_matrix",
    "product_ensemble",
    "nonuniformity",
    "computational_povm",
    "induced_channel",
    "ensemble_to_json",
    "ensemble_from_json",
    "load_ensemble",
]


def all_labels(n: int) -> list[str]:
    return [format(i, f"0{n}b") if n else "" for i in range(2 ** n)]


def label_bits(labels: Sequence[str]) -> np.ndarray:
    """``(K, n)`` uint8 array of label bits."""
    return np.array([[int(c) for c in lab] for lab in labels], dtype=np.uint8).reshape(len(labels), -1)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Finite ensemble of labeled density matrices.

    ``states`` is a ``(K, d, d)`` array aligned with ``labels`` and ``priors``.
    """

    n: int
    labels: tuple
    priors: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        priors = np.asarray(self.priors, dtype=float).ravel()
        states = np.asarray(self.states, dtype=complex)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "states", states)
        if self.n < 0:
            raise ValidationError(f"n must be non-negative, got {self.n}")
        if states.ndim != 3 or states.shape[1] != states.shape[2]:
            raise ValidationError(f"states must share a common dim: got array of shape {states.shape}")
        if not (len(labels) == priors.size == states.shape[0]):
            raise ValidationError(
                f"label/prior/state counts differ: {len(labels)}, {priors.size}, {states.shape[0]}")
        if len(set(labels)) != len(labels):
            raise ValidationError("labels must be distinct")
        for lab in labels:
            if len(lab) != self.n or any(c not in "01" for c in lab):
                raise ValidationError(f"label {lab!r} is not an {self.n}-bit string")
        if np.any(priors < -1e-12) or abs(priors.sum() - 1) > 1e-9:
            raise ValidationError(f"priors must be a probability vector (sum {priors.sum():.12g})")
        for lab, rho in zip(labels, states):
            try:
                qmath.check_density_matrix(rho)
            except ValidationError as exc:
                raise ValidationError(f"state for label {lab!r}: {exc}") from None

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def __len__(self):
        return len(self.labels)

    def is_full(self) -> bool:
        """True when the labels are exactly all ``2**n`` bit strings."""
        return len(self.labels) == 2 ** self.n and set(self.labels) == set(all_labels(self.n))

    def require_full(self):
        if not self.is_full():
            raise ValidationError(f"ensemble must carry all 2^{self.n} labels, has {len(self.labels)}")

    def sorted(self) -> "Ensemble":
        order = np.argsort(self.labels, kind="stable")
        return Ensemble(self.n, tuple(self.labels[i] for i in order), self.priors[order], self.states[order])


@dataclass(frozen=True, eq=False)
class Povm:
    """Measurement with elements ``operators[k]``; ``outcomes`` names them.

    An outcome whose name is ``None`` does not guess any label.
    """

    operators: np.ndarray
    outcomes: tuple = field(default=None)

    def __post_init__(self):
        ops = np.asarray(self.operators, dtype=complex)
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
            raise ValidationError(f"POVM operators must be square and share a dim, got shape {ops.shape}")
        object.__setattr__(self, "operators", ops)
        if self.outcomes is None:
            object.__setattr__(self, "outcomes", tuple(range(ops.shape[0])))
        elif len(self.outcomes) != ops.shape[0]:
            raise ValidationError("one outcome name per POVM element is required")
        for k, op in enumerate(ops):
            if np.max(np.abs(op - op.conj().T)) > 1e-9:
                raise ValidationError(f"POVM element {k} is not Hermitian")
            if np.linalg.eigvalsh((op + op.conj().T) / 2)[0] < -1e-9:
                raise ValidationError(f"POVM element {k} is not positive semidefinite")
        total = ops.sum(axis=0)
        if np.max(np.abs(total - np.eye(ops.shape[1]))) > 1e-8:
            raise ValidationError("POVM elements do not sum to the identity")

    @property
    def dim(self) -> int:
        return self.operators.shape[1]

    def __len__(self):
        return self.operators.shape[0]


@dataclass(frozen=True, eq=False)
class Channel:
    """Classical channel ``cond[x, y] = P(y|x)`` with input distribution ``priors``."""

    cond: np.ndarray
    priors: np.ndarray

    def __post_init__(self):
        cond = np.asarray(self.cond, dtype=float)
        priors = np.asarray(self.priors, dtype=float).ravel()
        object.__setattr__(self, "cond", cond)
        object.__setattr__(self, "priors", priors)
        if cond.ndim != 2 or cond.shape[0] != priors.size:
            raise ValidationError(f"channel shape {cond.shape} does not match {priors.size} inputs")
        if np.any(cond < -1e-12) or np.max(np.abs(cond.sum(axis=1) - 1)) > 1e-9:
            raise ValidationError("channel rows must be probability vectors")


def average_state(e: Ensemble) -> np.ndarray:
    """``rho = sum_x p_x rho_x``."""
    return np.einsum("x,xij->ij", e.priors, e.states)


def _unitaries(us) -> np.ndarray:
    return np.asarray(getattr(us, "unitaries", us), dtype=complex)


def lockcom_ensemble(n: int, us) -> Ensemble:
    """Bob's view of LOCKCOM: ``rho_x = (1/|U|) sum_r U_r |x><x| U_r^dagger``, uniform priors.

    ``us`` is a UnitarySet or any sequence of ``2**n``-dim unitaries.
    """
    u = _unitaries(us)
    d = 2 ** n
    if u.ndim != 3 or u.shape[1:] != (d, d):
        raise ValidationError(f"unitaries must have dim {d} for n={n}, got shape {u.shape}")
    # column x of U_r is U_r|x>
    states = np.einsum("rix,rjx->xij", u, u.conj()) / u.shape[0]
    return Ensemble(n, all_labels(n), np.full(d, 1.0 / d), states)


def trivial_ensemble(n: int, beta: int) -> Ensemble:
    """Bob holds the first ``beta`` bits of ``x`` as a basis state of dim ``2**beta``."""
    if not 0 <= beta <= n:
        raise ValidationError(f"beta must satisfy 0 <= beta <= n, got beta={beta}, n={n}")
    d = 2 ** beta
    states = np.zeros((2 ** n, d, d), dtype=complex)
    for i in range(2 ** n):
        pre = i >> (n - beta)
        states[i, pre, pre] = 1.0
    return Ensemble(n, all_labels(n), np.full(2 ** n, 2.0 ** -n), states)


def orthogonal_ensemble(n: int) -> Ensemble:
    """Computational basis states ``|x><x|`` with uniform priors."""
    return trivial_ensemble(n, n)


def identical_ensemble(n: int, rho) -> Ensemble:
    rho = qmath.check_density_matrix(rho)
    states = np.broadcast_to(rho, (2 ** n,) + rho.shape).copy()
    return Ensemble(n, all_labels(n), np.full(2 ** n, 2.0 ** -n), states)


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Induced-measure random state: ``G G^dagger / Tr`` with complex Gaussian ``G`` (d x rank)."""
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_ensemble(num_labels: int, d: int, rng: np.random.Generator, uniform: bool = False,
                    max_rank: int | None = None) -> Ensemble:
    """Random ensemble with labels ``0..num_labels-1`` written on ``ceil(log2 K)`` bits."""
    n = max(1, int(np.ceil(np.log2(num_labels)))) if num_labels > 1 else 0
    labels = all_labels(n)[:num_labels]
    if uniform:
        priors = np.full(num_labels, 1.0 / num_labels)
    else:
        priors = rng.dirichlet(np.ones(num_labels))
    top = d if max_rank is None else max_rank
    states = np.array([random_density_matrix(d, rng, int(rng.integers(1, top + 1))) for _ in labels])
    return Ensemble(n, labels, priors, states)


def product_ensemble(a: Ensemble, b: Ensemble) -> Ensemble:
    """Labels concatenate, priors multiply, states tensor."""
    labels = [x + y for x in a.labels for y in b.labels]
    priors = np.outer(a.priors, b.priors).ravel()
    states = np.array([np.kron(ra, rb) for ra in a.states for rb in b.states])
    return Ensemble(a.n + b.n, labels, priors, states)


def nonuniformity(e: Ensemble) -> float:
    """``d(E) = sum_x 1/2 ||p_x rho_x - 2^-n rho||_1`` (block-diagonal form).

    Equals the trace distance between ``sum_x p_x |x><x| ⊗ rho_x`` and
    ``1/2^n ⊗ rho`` without building the ``2^n d``-dimensional operators.
    """
    e.require_full()
    rho = average_state(e)
    blocks = e.priors[:, None, None] * e.states - rho[None] / 2 ** e.n
    w = np.linalg.eigvalsh(blocks)
    return float(0.5 * np.abs(w).sum())


def computational_povm(d: int) -> Povm:
    ops = np.zeros((d, d, d), dtype=complex)
    ops[np.arange(d), np.arange(d), np.arange(d)] = 1.0
    return Povm(ops)


def induced_channel(e: Ensemble, m: Povm) -> Channel:
    """``P(y|x) = Tr(M_y rho_x)``, clipped at zero and row-normalized."""
    if m.dim != e.dim:
        raise ValidationError(f"POVM dim {m.dim} does not match state dim {e.dim}")
    cond = np.einsum("yij,xji->xy", m.operators, e.states).real
    cond = np.clip(cond, 0.0, None)
    cond /= cond.sum(axis=1, keepdims=True)
    return Channel(cond, e.priors)


def ensemble_to_json(e: Ensemble) -> dict:
    return {
        "n": e.n,
        "labels": list(e.labels),
        "priors": [float(p) for p in e.priors],
        "dim": e.dim,
        "states": [qmath.matrix_to_json(r) for r in e.states],
    }


def ensemble_from_json(obj) -> Ensemble:
    """Build an Ensemble from its JSON form, naming the first violated invariant."""
    if not isinstance(obj, dict):
        raise ValidationError("ensemble JSON must be an object")
    missing = [k for k in ("n", "labels", "priors", "dim", "states") if k not in obj]
    if missing:
        raise ValidationError(f"ensemble JSON is missing field(s): {', '.join(missing)}")
    dim = int(obj["dim"])
    states = [qmath.matrix_from_json(s) for s in obj["states"]]
    for i, s in enumerate(states):
        if s.shape != (dim, dim):
            raise ValidationError(f"state {i} has shape {s.shape}, expected ({dim}, {dim}) from 'dim'")
    if not states:
        raise ValidationError("ensemble JSON has no states")
    return Ensemble(int(obj["n"]), tuple(obj["labels"]), np.asarray(obj["priors"], dtype=float),
                    np.array(states))


def load_ensemble(path) -> Ensemble:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read ensemble file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"ensemble file {path} is not valid JSON: {exc}") from None
    return ensemble_from_json(obj)
