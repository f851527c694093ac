"""
Executable commitment protocols: LOCKCOM over a unitary set and the trivial
protocol that discloses a prefix of the string.

Both are modeled by their commit-phase ensemble plus a rank-one acceptance
test. For the attack simulations each protocol also exposes its honest
commit state as a pure state on (Alice's randomness register) ⊗ (Bob).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import qmath
from .ensembles import Ensemble, all_labels, lockcom_ensemble, trivial_ensemble
from .errors import DimensionCapError, ValidationError
from .infomeasures import IaccBracket, OptimizerSettings, accessible_info_bracket, holevo_chi, xi

__all__ = [
    "DEFAULT_ENSEMBLE_CAP",
    "DEFAULT_ATTACK_CAP",
    "dimension_caps",
    "UnitarySet",
    "CommitTranscript",
    "Lockcom",
    "TrivialProtocol",
    "SecurityReport",
    "two_basis_set",
    "haar_set",
    "identity_set",
    "custom_set",
    "commit",
    "reveal_verify",
    "open_commitment",
    "binding_bound_audit",
    "trivial_protocol",
    "lockcom",
    "protocol_from_descriptor",
    "security_report",
]

DEFAULT_ENSEMBLE_CAP = 6
DEFAULT_ATTACK_CAP = 4


def dimension_caps() -> tuple[int, int]:
    """``(ensemble_cap, attack_cap)`` in qubits; ``QBSC_DIM_CAP`` is ``"N"`` or ``"N,M"``."""
    raw = os.environ.get("QBSC_DIM_CAP")
    if not raw:
        return DEFAULT_ENSEMBLE_CAP, DEFAULT_ATTACK_CAP
    try:
        parts = [int(p) for p in raw.split(",")]
    except ValueError:
        raise ValidationError(f"QBSC_DIM_CAP must be 'N' or 'N,M', got {raw!r}") from None
    if len(parts) == 1:
        return parts[0], parts[0]
    if len(parts) == 2:
        return parts[0], parts[1]
    raise ValidationError(f"QBSC_DIM_CAP must be 'N' or 'N,M', got {raw!r}")


def _check_bits(x: str, n: int) -> int:
    if len(x) != n or any(c not in "01" for c in x):
        raise ValidationError(f"{x!r} is not an {n}-bit string")
    return int(x, 2) if n else 0


@dataclass(frozen=True, eq=False)
class UnitarySet:
    """Published unitaries ``U_r`` of dimension ``2**n``; ``kind`` is two-basis, haar or custom."""

    n: int
    unitaries: np.ndarray
    kind: str = "custom"
    seed: int | None = None

    def __post_init__(self):
        u = np.asarray(self.unitaries, dtype=complex)
        d = 2 ** self.n
        if u.ndim != 3 or u.shape[1:] != (d, d) or u.shape[0] < 1:
            raise ValidationError(f"need at least one {d}x{d} unitary for n={self.n}, got shape {u.shape}")
        for r, ur in enumerate(u):
            try:
                qmath.check_unitary(ur)
            except ValidationError:
                raise ValidationError(f"element {r} of the unitary set is not unitary") from None
        object.__setattr__(self, "unitaries", u)

    def __len__(self):
        return self.unitaries.shape[0]

    @property
    def dim(self) -> int:
        return 2 ** self.n

    def descriptor(self) -> dict:
        d = {"bases": self.kind, "n": self.n, "k": len(self)}
        if self.seed is not None:
            d["seed"] = self.seed
        return d


def two_basis_set(n: int) -> UnitarySet:
    """``{1^{⊗n}, H^{⊗n}}``."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    return UnitarySet(n, np.array([np.eye(2 ** n), qmath.tensor_power(qmath.HADAMARD, n)]), "two")


def haar_set(n: int, k: int, seed: int = 0) -> UnitarySet:
    """``k`` independent Haar unitaries drawn from ``default_rng(seed)``.

    The first ``j`` elements of ``haar_set(n, k, seed)`` equal
    ``haar_set(n, j, seed)``, so sweeps over ``k`` are nested.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    rng = np.random.default_rng(seed)
    return UnitarySet(n, np.array([qmath.haar_unitary(2 ** n, rng) for _ in range(k)]), "haar", seed)


def identity_set(n: int) -> UnitarySet:
    return UnitarySet(n, np.eye(2 ** n)[None], "identity")


def custom_set(n: int, unitaries) -> UnitarySet:
    return UnitarySet(n, unitaries, "custom")


@dataclass(frozen=True, eq=False)
class CommitTranscript:
    n: int
    x: str
    r: int
    commit_state: np.ndarray
    revealed: tuple | None = None
    accepted: bool | None = None


def commit(x: str, r: int, us: UnitarySet) -> CommitTranscript:
    """Alice sends ``U_r |x>``; the transcript holds Bob's density matrix."""
    xi_ = _check_bits(x, us.n)
    if not 0 <= r < len(us):
        raise ValidationError(f"basis index r={r} out of range for {len(us)} unitaries")
    v = us.unitaries[r][:, xi_]
    return CommitTranscript(us.n, x, r, qmath.projector(v))


def reveal_verify(t: CommitTranscript, x: str, r: int, us: UnitarySet) -> float:
    """Probability that Bob accepts the opening ``(x, r)``: ``<x|U_r^† rho U_r|x>``."""
    xi_ = _check_bits(x, us.n)
    if not 0 <= r < len(us):
        raise ValidationError(f"basis index r={r} out of range for {len(us)} unitaries")
    if t.commit_state.shape != (us.dim, us.dim):
        raise ValidationError("transcript state dimension does not match the unitary set")
    v = us.unitaries[r][:, xi_]
    return float(np.vdot(v, t.commit_state @ v).real)


def open_commitment(t: CommitTranscript, x: str, r: int, us: UnitarySet,
                    rng: np.random.Generator) -> CommitTranscript:
    """Run Bob's measurement once and record the verdict."""
    p = reveal_verify(t, x, r, us)
    return replace(t, revealed=(x, r), accepted=bool(rng.random() < p))


def binding_bound_audit(us: UnitarySet, rho) -> float:
    """``sum_{x,r} <x|U_r^† rho U_r|x>``, which equals ``|U| Tr rho``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (us.dim, us.dim):
        raise ValidationError(f"state shape {rho.shape} does not match unitary dim {us.dim}")
    rotated = np.einsum("rji,jk,rkl->ril", us.unitaries.conj(), rho, us.unitaries, optimize=True)
    return float(np.einsum("rii->", rotated).real)


@dataclass(frozen=True, eq=False)
class Lockcom:
    """LOCKCOM(n, U): commit ``U_r|x>`` for uniform ``r``; open by announcing ``(r, x)``."""

    unitaries: UnitarySet

    @property
    def n(self) -> int:
        return self.unitaries.n

    @property
    def bob_dim(self) -> int:
        return self.unitaries.dim

    @property
    def randomness_dim(self) -> int:
        return len(self.unitaries)

    def descriptor(self) -> dict:
        return {"kind": "lockcom", **self.unitaries.descriptor()}

    def ensemble(self) -> Ensemble:
        return lockcom_ensemble(self.n, self.unitaries)

    def a_bound(self) -> float:
        return float(np.log2(len(self.unitaries)))

    def commit(self, x: str, r: int) -> CommitTranscript:
        return commit(x, r, self.unitaries)

    def reveal_verify(self, t: CommitTranscript, x: str, r: int) -> float:
        return reveal_verify(t, x, r, self.unitaries)

    def honest_state(self, x: int) -> np.ndarray:
        """``|phi_x> = |U|^{-1/2} sum_r |r>|U_r x>`` as a (randomness, Bob) amplitude matrix."""
        return self.unitaries.unitaries[:, :, x] / np.sqrt(len(self.unitaries))

    def accept_vectors(self, x: int) -> np.ndarray:
        """Row ``r``: the vector whose projector is Bob's test for the opening ``(x, r)``."""
        return self.unitaries.unitaries[:, :, x]


@dataclass(frozen=True, eq=False)
class TrivialProtocol:
    """Alice sends the first ``beta`` bits of ``x``; Bob checks the prefix on opening."""

    n: int
    beta: int

    def __post_init__(self):
        if not 0 <= self.beta <= self.n:
            raise ValidationError(f"beta must satisfy 0 <= beta <= n, got beta={self.beta}, n={self.n}")

    @property
    def bob_dim(self) -> int:
        return 2 ** self.beta

    @property
    def randomness_dim(self) -> int:
        return 1

    def descriptor(self) -> dict:
        return {"kind": "trivial", "n": self.n, "beta": self.beta}

    def ensemble(self) -> Ensemble:
        return trivial_ensemble(self.n, self.beta)

    def _prefix(self, x: int) -> int:
        return x >> (self.n - self.beta)

    def commit(self, x: str, r: int = 0) -> CommitTranscript:
        xi_ = _check_bits(x, self.n)
        return CommitTranscript(self.n, x, 0, qmath.projector(qmath.basis_state(self._prefix(xi_), self.bob_dim)))

    def reveal_verify(self, t: CommitTranscript, x: str, r: int = 0) -> float:
        xi_ = _check_bits(x, self.n)
        p = self._prefix(xi_)
        return float(t.commit_state[p, p].real)

    def a_bound(self) -> float:
        """log2 of the number of strings Alice opens with certainty after committing to one prefix."""
        t = self.commit("0" * self.n)
        total = sum(self.reveal_verify(t, x) for x in all_labels(self.n))
        return float(np.log2(total))

    def honest_state(self, x: int) -> np.ndarray:
        return qmath.basis_state(self._prefix(x), self.bob_dim)[None]

    def accept_vectors(self, x: int) -> np.ndarray:
        return qmath.basis_state(self._prefix(x), self.bob_dim)[None]


def trivial_protocol(n: int, beta: int) -> TrivialProtocol:
    return TrivialProtocol(n, beta)


def lockcom(us: UnitarySet) -> Lockcom:
    return Lockcom(us)


def protocol_from_descriptor(desc: dict):
    """Rebuild a protocol from ``descriptor()`` output."""
    kind = desc.get("kind")
    n = int(desc["n"])
    if kind == "trivial":
        return TrivialProtocol(n, int(desc["beta"]))
    if kind == "lockcom":
        bases = desc.get("bases", "two")
        if bases == "two":
            return Lockcom(two_basis_set(n))
        if bases == "haar":
            return Lockcom(haar_set(n, int(desc["k"]), int(desc.get("seed", 0))))
        if bases == "identity":
            return Lockcom(identity_set(n))
        raise ValidationError(f"cannot rebuild unitary set of kind {bases!r} from a descriptor")
    raise ValidationError(f"unknown protocol kind {kind!r}")


@dataclass
class SecurityReport:
    n: int
    a_bound: float
    b_guess: float | None
    b_chi: float | None
    b_iacc: IaccBracket | None
    seed: int
    protocol: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "protocol": dict(self.protocol),
            "n": self.n,
            "a_bound": self.a_bound,
            "b_guess": self.b_guess,
            "b_chi": self.b_chi,
            "b_iacc": None if self.b_iacc is None else self.b_iacc.to_json(),
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj) -> "SecurityReport":
        try:
            iacc = obj.get("b_iacc")
            bracket = None
            if iacc is not None:
                bracket = IaccBracket(float(iacc["lower"]), float(iacc["upper"]), None,
                                      iacc.get("method_notes", ""), dict(iacc.get("candidates", {})))
            return cls(int(obj["n"]), float(obj["a_bound"]),
                       None if obj.get("b_guess") is None else float(obj["b_guess"]),
                       None if obj.get("b_chi") is None else float(obj["b_chi"]),
                       bracket, int(obj.get("seed", 0)), dict(obj.get("protocol", {})))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed security report: {exc}") from None


MEASURES = ("guess", "chi", "iacc")


def security_report(protocol, opts: OptimizerSettings | None = None, measures=MEASURES,
                    cap: int | None = None) -> SecurityReport:
    """``(n, a, b)`` of ``protocol`` with ``b`` under xi, Holevo chi and the I_acc bracket.

    ``measures`` selects which of ``"guess"``, ``"chi"``, ``"iacc"`` to compute.
    """
    opts = opts or OptimizerSettings()
    cap = dimension_caps()[0] if cap is None else cap
    if protocol.n > cap:
        raise DimensionCapError(f"n={protocol.n} exceeds the ensemble dimension cap n <= {cap}")
    unknown = set(measures) - set(MEASURES)
    if unknown:
        raise ValidationError(f"unknown measure(s): {', '.join(sorted(unknown))}")
    e = protocol.ensemble()
    return SecurityReport(
        n=protocol.n,
        a_bound=protocol.a_bound(),
        b_guess=xi(e) if "guess" in measures else None,
        b_chi=holevo_chi(e) if "chi" in measures else None,
        b_iacc=accessible_info_bracket(e, opts) if "iacc" in measures else None,
        seed=opts.seed,
        protocol=protocol.descriptor(),
    )
