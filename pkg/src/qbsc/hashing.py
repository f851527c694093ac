"""
Two-universal hashing with random GF(2) matrices, hashed ensembles and the
Monte-Carlo privacy-amplification audit.

For ``x != x'`` a uniformly random ``s x n`` matrix ``M`` satisfies
``P[Mx = Mx'] = P[M(x ^ x') = 0] = 2**-s``, so the linear family is
two-universal without an affine offset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensembles import Ensemble, all_labels, average_state, label_bits, nonuniformity
from .errors import ValidationError
from .infomeasures import h2_conditional

__all__ = [
    "Gf2Hash",
    "HashedEnsemble",
    "PaAuditReport",
    "sample_hash",
    "hashed_ensemble",
    "pa_audit",
]


@dataclass(frozen=True, eq=False)
class Gf2Hash:
    """Linear hash ``g(x) = M x`` over GF(2) with ``M`` of shape ``(s, n)``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2:
            raise ValidationError(f"hash matrix must be 2-D, got shape {m.shape}")
        if not np.all((m == 0) | (m == 1)):
            raise ValidationError("hash matrix entries must be bits")
        if m.shape[0] > m.shape[1]:
            raise ValidationError(f"hash output bits s={m.shape[0]} exceed input bits n={m.shape[1]}")
        object.__setattr__(self, "matrix", m.astype(np.uint8))

    @property
    def s(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def identity(cls, n: int) -> "Gf2Hash":
        return cls(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_rows(cls, rows) -> "Gf2Hash":
        return cls(np.array([[int(c) for c in r] for r in rows], dtype=np.uint8))

    def rows(self) -> list[str]:
        return ["".join(str(int(b)) for b in row) for row in self.matrix]

    def apply_bits(self, bits: np.ndarray) -> np.ndarray:
        """Hash a ``(K, n)`` bit array to ``(K, s)``."""
        return (np.asarray(bits, dtype=np.int64) @ self.matrix.T.astype(np.int64)) % 2

    def __call__(self, x: str) -> str:
        if len(x) != self.n:
            raise ValidationError(f"input {x!r} is not an {self.n}-bit string")
        y = self.apply_bits(label_bits([x]))[0]
        return "".join(str(int(b)) for b in y)

    def rank(self) -> int:
        """Rank over GF(2) by Gaussian elimination."""
        m = self.matrix.copy()
        rank = 0
        for col in range(self.n):
            pivot = next((r for r in range(rank, self.s) if m[r, col]), None)
            if pivot is None:
                continue
            m[[rank, pivot]] = m[[pivot, rank]]
            for r in range(self.s):
                if r != rank and m[r, col]:
                    m[r] ^= m[rank]
            rank += 1
        return rank

    def to_json(self) -> dict:
        return {"n": self.n, "s": self.s, "rows": self.rows()}


def sample_hash(n: int, s: int, rng: np.random.Generator) -> Gf2Hash:
    """Uniformly random ``s x n`` bit matrix."""
    if not 1 <= s <= n:
        raise ValidationError(f"need 1 <= s <= n, got s={s}, n={n}")
    return Gf2Hash(rng.integers(0, 2, size=(s, n), dtype=np.uint8))


@dataclass(frozen=True, eq=False)
class HashedEnsemble:
    """The ensemble ``E_g = {q_y, sigma_y}`` induced by hashing the labels of ``base``.

    Every one of the ``2**s`` outputs is present. An output with an empty
    preimage has ``q_y = 0``, is listed in ``empty``, and carries the base
    average state as a placeholder.
    """

    base: Ensemble
    hash: Gf2Hash
    ensemble: Ensemble
    preimages: tuple
    empty: tuple

    @property
    def labels(self):
        return self.ensemble.labels

    @property
    def priors(self):
        return self.ensemble.priors

    @property
    def states(self):
        return self.ensemble.states


def hashed_ensemble(e: Ensemble, g: Gf2Hash) -> HashedEnsemble:
    e.require_full()
    if g.n != e.n:
        raise ValidationError(f"hash input length {g.n} does not match ensemble n={e.n}")
    ys = g.apply_bits(label_bits(e.labels))
    yidx = ys @ (1 << np.arange(g.s - 1, -1, -1)) if g.s else np.zeros(len(e), dtype=int)
    rho = average_state(e)
    ny = 2 ** g.s
    q = np.zeros(ny)
    sigma = np.zeros((ny, e.dim, e.dim), dtype=complex)
    np.add.at(q, yidx, e.priors)
    np.add.at(sigma, yidx, e.priors[:, None, None] * e.states)
    pre = [[] for _ in range(ny)]
    for lab, y in zip(e.labels, yidx):
        pre[y].append(lab)
    empty = tuple(all_labels(g.s)[y] for y in range(ny) if q[y] <= 0)
    for y in range(ny):
        sigma[y] = sigma[y] / q[y] if q[y] > 0 else rho
    out = Ensemble(g.s, all_labels(g.s), q, sigma)
    return HashedEnsemble(e, g, out, tuple(tuple(p) for p in pre), empty)


@dataclass
class PaAuditReport:
    s: int
    samples: int
    mean_d: float
    stderr: float
    bound: float
    h2: float
    best_hash: Gf2Hash
    best_d: float
    seed: int

    @property
    def holds(self) -> bool:
        return self.mean_d <= self.bound + 3 * self.stderr

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "samples": self.samples,
            "mean_d": self.mean_d,
            "stderr": self.stderr,
            "bound": self.bound,
            "h2": self.h2,
            "best_hash": self.best_hash.rows(),
            "best_d": self.best_d,
            "seed": self.seed,
            "holds": self.holds,
        }


def pa_audit(e: Ensemble, s: int, samples: int = 500, seed: int = 0) -> PaAuditReport:
    """Estimate the family average of ``d(E_g)`` and compare to ``1/2 2^{-(H2 - s)/2}``.

    Sample ``i`` draws its hash from ``default_rng(seed ^ i)``; the first
    minimum-``d`` hash is kept.
    """
    e.require_full()
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    h2 = h2_conditional(e)
    ds = np.empty(samples)
    best = None
    for i in range(samples):
        g = sample_hash(e.n, s, np.random.default_rng(seed ^ i))
        ds[i] = nonuniformity(hashed_ensemble(e, g).ensemble)
        if best is None or ds[i] < ds[best[0]]:
            best = (i, g)
    stderr = float(ds.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    bound = 0.5 * 2.0 ** (-0.5 * (h2 - s))
    return PaAuditReport(s, samples, float(ds.mean()), stderr, bound, h2, best[1], float(ds[best[0]]), seed)
