"""
Information measures on ensembles: Shannon/von Neumann entropies, Holevo
information, the conditional collision entropy H2 and xi = n - H2, the
pretty-good measurement, Helstrom discrimination and a certified bracket on
the accessible information.

All logarithms are base 2 with ``0 log 0 = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qmath
from .ensembles import Channel, Ensemble, Povm, average_state, computational_povm, induced_channel
from .errors import ValidationError

__all__ = [
    "OptimizerSettings",
    "IaccBracket",
    "entropy",
    "shannon_mutual_information",
    "von_neumann_entropy",
    "holevo_chi",
    "h2_conditional",
    "xi",
    "pretty_good_measurement",
    "guessing_probability",
    "helstrom_optimum",
    "accessible_info_bracket",
]


def entropy(p) -> float:
    """Shannon entropy in bits."""
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def _xlogx(p: np.ndarray) -> np.ndarray:
    safe = np.where(p > 0, p, 1.0)
    return np.where(p > 0, p * np.log2(safe), 0.0)


def _mutual_information(priors: np.ndarray, cond: np.ndarray) -> float:
    py = priors @ cond
    return float(np.dot(priors, _xlogx(cond).sum(axis=1)) - _xlogx(py).sum())


def shannon_mutual_information(ch: Channel) -> float:
    """``I(X;Y) = H(Y) - H(Y|X)``."""
    return max(0.0, _mutual_information(ch.priors, ch.cond))


def von_neumann_entropy(r, cutoff: float = qmath.SUPPORT_CUTOFF) -> float:
    w = np.linalg.eigvalsh(qmath.check_hermitian(r))
    w = w[w > cutoff]
    return float(-np.sum(w * np.log2(w)))


def holevo_chi(e: Ensemble) -> float:
    """``S(rho) - sum_x p_x S(rho_x)``."""
    inner = sum(p * von_neumann_entropy(r) for p, r in zip(e.priors, e.states) if p > 0)
    return max(0.0, von_neumann_entropy(average_state(e)) - inner)


def _collision_trace(e: Ensemble) -> float:
    # sum_x p_x^2 Tr(R rho_x R rho_x) with R = rho^{-1/2} on the support
    r = qmath.mat_inv_sqrt(average_state(e))
    ys = r @ e.states @ r
    t = np.einsum("xij,xji->x", ys, e.states).real
    return float(np.dot(e.priors ** 2, t))


def h2_conditional(e: Ensemble) -> float:
    """Conditional collision entropy ``H2(rho_AB | rho)``, computed blockwise."""
    return float(-np.log2(_collision_trace(e)))


def xi(e: Ensemble) -> float:
    """``n - H2(rho_AB | rho)`` for a full ``2**n``-label ensemble."""
    e.require_full()
    return e.n - h2_conditional(e)


def pretty_good_measurement(e: Ensemble) -> Povm:
    """Square-root measurement ``M_x = p_x rho^{-1/2} rho_x rho^{-1/2}``.

    If ``rho`` is rank deficient a final ``reject`` outcome (name ``None``)
    holds ``1 - Pi_supp``; it has zero probability on every ``rho_x``.
    """
    rho = average_state(e)
    r = qmath.mat_inv_sqrt(rho)
    ops = e.priors[:, None, None] * (r @ e.states @ r)
    ops = (ops + ops.conj().transpose(0, 2, 1)) / 2
    outcomes = list(e.labels)
    rest = np.eye(e.dim) - qmath.support_projector(rho)
    if np.linalg.norm(rest) > 1e-9:
        ops = np.concatenate([ops, rest[None]])
        outcomes.append(None)
    return Povm(ops, tuple(outcomes))


def guessing_probability(e: Ensemble, m: Povm) -> float:
    """``sum_x p_x Tr(M_x rho_x)``; outcome ``i`` is read as a guess of label ``i``."""
    if m.dim != e.dim:
        raise ValidationError(f"POVM dim {m.dim} does not match state dim {e.dim}")
    if len(m) < len(e):
        raise ValidationError(f"POVM has {len(m)} outcomes for {len(e)} labels")
    k = len(e)
    t = np.einsum("xij,xji->x", m.operators[:k], e.states).real
    return float(np.dot(e.priors, t))


def helstrom_optimum(e: Ensemble):
    """Optimal two-label guessing probability and the projective measurement achieving it."""
    if len(e) != 2:
        raise ValidationError(f"Helstrom discrimination needs exactly 2 labels, got {len(e)}")
    gamma = e.priors[0] * e.states[0] - e.priors[1] * e.states[1]
    dec = qmath.eig_hermitian(gamma)
    v = dec.eigenvectors[:, dec.eigenvalues > 0]
    p0 = v @ v.conj().T
    povm = Povm(np.array([p0, np.eye(e.dim) - p0]), tuple(e.labels))
    value = 0.5 * (e.priors.sum() + np.abs(dec.eigenvalues).sum())
    return float(value), povm


@dataclass
class OptimizerSettings:
    """See-saw optimizer configuration; ``outcomes=None`` means ``min(d**2, 64)``."""

    restarts: int = 20
    max_iters: int = 500
    tol: float = 1e-7
    seed: int = 0
    outcomes: int | None = None

    @classmethod
    def from_json(cls, obj) -> "OptimizerSettings":
        allowed = {"restarts", "max_iters", "tol", "seed", "outcomes"}
        unknown = set(obj) - allowed
        if unknown:
            raise ValidationError(f"unknown optimizer setting(s): {', '.join(sorted(unknown))}")
        s = cls(**obj)
        if s.restarts < 0 or s.max_iters < 0 or s.tol <= 0:
            raise ValidationError("optimizer settings need restarts >= 0, max_iters >= 0, tol > 0")
        return s

    def to_json(self) -> dict:
        return {"restarts": self.restarts, "max_iters": self.max_iters, "tol": self.tol,
                "seed": self.seed, "outcomes": self.outcomes}


@dataclass
class IaccBracket:
    lower: float
    upper: float
    best_measurement: Povm
    method_notes: str
    candidates: dict = field(default_factory=dict)

    @property
    def closed(self) -> bool:
        return self.lower >= self.upper - 1e-3

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "method_notes": self.method_notes,
                "candidates": dict(self.candidates)}


def _rank_one_probs(phis: np.ndarray, states: np.ndarray) -> np.ndarray:
    # P[x, k] = <phi_k| rho_x |phi_k>
    return np.einsum("ki,xij,kj->xk", phis.conj(), states, phis).real.clip(0.0, None)


def _normalize_rank_one(phis: np.ndarray) -> np.ndarray:
    # phi_k <- T^{-1/2} phi_k with T = sum_k |phi_k><phi_k|
    t = phis.T @ phis.conj()
    w, v = np.linalg.eigh((t + t.conj().T) / 2)
    inv = np.where(w > 1e-14, 1 / np.sqrt(np.where(w > 1e-14, w, 1.0)), 0.0)
    return phis @ ((v * inv) @ v.conj().T).T


def _seesaw(e: Ensemble, phis: np.ndarray, max_iters: int, tol: float):
    priors, states = e.priors, e.states
    phis = _normalize_rank_one(phis)
    value = _mutual_information(priors, _rank_one_probs(phis, states))
    step = 1.0
    for _ in range(max_iters):
        p = _rank_one_probs(phis, states)
        py = priors @ p
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(py[None] > 0, p / py[None], 1.0)
        logr = np.log2(np.clip(ratio, 2.0 ** -60, None))
        # gradient direction G_k phi_k with G_k = sum_x p_x log(P(k|x)/P(k)) rho_x
        rho_phi = np.einsum("xij,kj->xki", states, phis)
        grad = np.einsum("x,xk,xki->ki", priors, logr, rho_phi)
        improved = False
        while step > 1e-10:
            cand = _normalize_rank_one(phis + step * grad)
            cand_value = _mutual_information(priors, _rank_one_probs(cand, states))
            if cand_value > value:
                improved = True
                break
            step /= 2
        if not improved:
            break
        gain = cand_value - value
        phis, value = cand, cand_value
        step = min(step * 2, 1e3)
        if gain < tol:
            break
    return phis, value


def _povm_from_vectors(phis: np.ndarray) -> Povm:
    ops = np.einsum("ki,kj->kij", phis, phis.conj())
    return Povm(ops)


def accessible_info_bracket(e: Ensemble, opts: OptimizerSettings | None = None) -> IaccBracket:
    """Interval ``[lower, upper]`` containing the accessible information of ``e``.

    ``lower`` is the best mutual information over the computational basis,
    the pretty-good measurement, the Helstrom measurement (two labels) and
    see-saw-refined random rank-one POVMs; ``upper = min(n, chi)``.
    Restart ``i`` draws from ``default_rng(seed ^ i)``; restarts stop once
    the lower bound reaches the upper one within 1e-9.
    """
    opts = opts or OptimizerSettings()
    d = e.dim
    candidates: dict[str, tuple[float, Povm]] = {}

    def consider(name, povm):
        candidates[name] = (shannon_mutual_information(induced_channel(e, povm)), povm)

    consider("computational", computational_povm(d))
    consider("pgm", pretty_good_measurement(e))
    if len(e) == 2:
        consider("helstrom", helstrom_optimum(e)[1])

    chi = holevo_chi(e)
    upper = min(float(e.n), chi)
    k = opts.outcomes or min(d * d, 64)
    k = max(1, min(k, d * d))
    # restarts cannot push the lower bound past the upper one
    closed_early = max(v for v, _ in candidates.values()) >= upper - 1e-9
    best_seesaw = None
    for i in range(0 if closed_early else opts.restarts):
        rng = np.random.default_rng(opts.seed ^ i)
        phis = rng.normal(size=(k, d)) + 1j * rng.normal(size=(k, d))
        phis, _ = _seesaw(e, phis, opts.max_iters, opts.tol)
        povm = _povm_from_vectors(phis)
        val = shannon_mutual_information(induced_channel(e, povm))
        if best_seesaw is None or val > best_seesaw[0]:
            best_seesaw = (val, povm)
        if val >= upper - 1e-9:
            break
    if best_seesaw is not None:
        candidates["seesaw"] = best_seesaw

    best_name = max(candidates, key=lambda name: candidates[name][0])
    lower, best = candidates[best_name]
    if closed_early:
        search = "seesaw skipped, bracket already closed"
    else:
        search = f"seesaw {opts.restarts} restarts x {opts.max_iters} iters, {k} outcomes, seed {opts.seed}"
    notes = f"lower from {best_name}; upper = min(n, chi); {search}"
    # a lower bound can exceed chi only by rounding
    if upper < lower <= upper + 1e-9:
        lower = upper
    return IaccBracket(lower, upper, best, notes, {name: v for name, (v, _) in candidates.items()})
