"""
Concrete attacks on commitment protocols and the no-go bookkeeping.

* Bob's pretty-good-measurement guess.
* Alice's hash-superposition attack: she commits to a uniform superposition
  over a hash preimage ``g^{-1}(y0)``, then, for any target ``y``, steers
  her purification toward the honest superposition over ``g^{-1}(y)`` with
  an Uhlmann unitary and opens by measuring her registers.
* The trade-off constant ``c``, the trade-off verdict and tensor-power
  (parallel execution) measures.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import qmath
from .ensembles import Ensemble, all_labels, average_state, nonuniformity, product_ensemble
from .errors import DimensionCapError, ValidationError
from .hashing import Gf2Hash, hashed_ensemble, sample_hash
from .infomeasures import guessing_probability, h2_conditional, holevo_chi, pretty_good_measurement, xi
from .protocols import SecurityReport, dimension_caps

__all__ = [
    "TradeoffConstants",
    "AttackReport",
    "RevealDistribution",
    "RevealComparison",
    "TradeoffVerdict",
    "bob_pgm_attack",
    "cheat_bound",
    "kernel_aligned_hash",
    "superposition_state",
    "reveal_verifier",
    "alice_hash_attack",
    "reveal_distributions",
    "constant_c",
    "tradeoff_audit",
    "tensor_power_ensemble",
    "parallel_audit",
]

MAX_PARALLEL_DIM = 2 ** 12


def bob_pgm_attack(e: Ensemble) -> tuple[float, float]:
    """``(achieved, bound)``: PGM guessing probability and ``2^{-H2}``."""
    achieved = guessing_probability(e, pretty_good_measurement(e))
    return achieved, float(2.0 ** -h2_conditional(e))


def cheat_bound(epsilon: float) -> float:
    """Lower bound ``max(0, 1 - sqrt(2 eps))`` on opening the other bit when ``delta(rho0, rho1) <= eps``."""
    if epsilon < 0:
        raise ValidationError(f"epsilon must be non-negative, got {epsilon}")
    return max(0.0, 1.0 - np.sqrt(2 * epsilon))


def kernel_aligned_hash(n: int, beta: int, s: int) -> Gf2Hash:
    """Hash reading ``s`` of the ``n - beta`` bits Bob never sees; the disclosed bits lie in its kernel."""
    if not 1 <= s <= n - beta:
        raise ValidationError(f"need 1 <= s <= n - beta, got s={s}, n={n}, beta={beta}")
    m = np.zeros((s, n), dtype=np.uint8)
    m[np.arange(s), beta + np.arange(s)] = 1
    return Gf2Hash(m)


def superposition_state(protocol, preimage) -> np.ndarray:
    """``|psi> = |g^{-1}(y)|^{-1/2} sum_x |x>_A |phi_x>_{RB}`` as a ((A R), B) amplitude matrix."""
    k, d = protocol.randomness_dim, protocol.bob_dim
    psi = np.zeros((2 ** protocol.n * k, d), dtype=complex)
    norm = 1 / np.sqrt(len(preimage))
    for lab in preimage:
        x = int(lab, 2)
        psi[x * k:(x + 1) * k] = protocol.honest_state(x) * norm
    return psi


def reveal_verifier(protocol) -> list:
    """Joint-space projectors ``|x><x|_A ⊗ |r><r|_R ⊗ Pi^acc_{x,r}`` for every opening ``(x, r)``."""
    k, d = protocol.randomness_dim, protocol.bob_dim
    dim_ar = 2 ** protocol.n * k
    out = []
    for x in range(2 ** protocol.n):
        for r, v in enumerate(protocol.accept_vectors(x)):
            reg = np.zeros((dim_ar, dim_ar))
            reg[x * k + r, x * k + r] = 1.0
            out.append(((format(x, f"0{protocol.n}b"), r), np.kron(reg, qmath.projector(v))))
    return out


@dataclass
class RevealDistribution:
    outcomes: list
    probabilities: np.ndarray

    def __post_init__(self):
        self.probabilities = np.asarray(self.probabilities, dtype=float)
        if abs(self.probabilities.sum() - 1) > 1e-9:
            raise ValidationError(f"reveal probabilities sum to {self.probabilities.sum():.12g}")


@dataclass
class RevealComparison:
    honest: RevealDistribution
    steered: RevealDistribution
    statistical_distance: float
    state_distance: float


def _reveal_distribution(state: np.ndarray, verifier) -> RevealDistribution:
    names, probs = [], []
    for name, proj in verifier:
        names.append(name)
        probs.append(float(np.vdot(state, proj @ state).real))
    probs.append(max(0.0, 1.0 - sum(probs)))
    names.append("reject")
    return RevealDistribution(names, np.clip(probs, 0.0, None))


def reveal_distributions(phi0, psi0, verifier) -> RevealComparison:
    """Outcome distributions of the reveal measurement on ``phi0`` and ``psi0``.

    ``verifier`` lists ``(outcome, projector)`` pairs with orthogonal
    projectors; the remainder is ``reject``. Raises if the statistical
    distance exceeds the trace distance of the states.
    """
    phi0 = qmath.check_pure_state(np.asarray(phi0).ravel())
    psi0 = qmath.check_pure_state(np.asarray(psi0).ravel())
    if phi0.shape != psi0.shape:
        raise ValidationError(f"state dimension mismatch: {phi0.shape} vs {psi0.shape}")
    for _, proj in verifier:
        if proj.shape != (phi0.size, phi0.size):
            raise ValidationError(f"verifier projector shape {proj.shape} does not match state dim {phi0.size}")
    py = _reveal_distribution(phi0, verifier)
    pz = _reveal_distribution(psi0, verifier)
    stat = 0.5 * float(np.abs(py.probabilities - pz.probabilities).sum())
    dist = qmath.pure_trace_distance(phi0, psi0)
    if stat > dist + 1e-9:
        raise RuntimeError(f"measurement increased distinguishability: {stat} > {dist}")
    return RevealComparison(py, pz, stat, dist)


@dataclass
class AttackReport:
    """Outcome of the hash-superposition attack.

    ``per_y_steering_bound[y] = 1 - sqrt(2 delta(sigma_y0, sigma_y))`` lower-bounds
    ``per_y_reveal_prob[y]``; ``mean_distance = 2^-s sum_y delta(sigma, sigma_y)``
    is at most ``mean_distance_bound = 2 epsilon``. Outputs with an empty
    preimage count with distance 1.
    """

    n: int
    m: int
    s: int
    chosen_hash: Gf2Hash
    d_best: float
    d_mean: float
    epsilon: float
    epsilon_family: float
    b_guess: float
    y0: str
    labels: list
    empty: list
    per_y_trace_distances: np.ndarray
    per_y_distance_to_average: np.ndarray
    per_y_fidelity: np.ndarray
    per_y_overlap: np.ndarray
    per_y_reveal_prob: np.ndarray
    per_y_steering_bound: np.ndarray
    p_tilde: dict
    mean_distance: float
    mean_distance_bound: float
    predicted_lower: float
    simulated_sum: float
    sum_q_tilde: float
    implied_a: float
    seed: int
    protocol: dict = field(default_factory=dict)

    def steering_holds(self, tol: float = 1e-6) -> bool:
        return bool(np.all(self.per_y_reveal_prob >= self.per_y_steering_bound - tol))

    def mean_distance_holds(self, tol: float = 1e-9) -> bool:
        return self.mean_distance <= self.mean_distance_bound + tol

    def prediction_holds(self, tol: float = 1e-6) -> bool:
        return self.predicted_lower <= 0 or self.simulated_sum >= self.predicted_lower - tol

    def to_json(self) -> dict:
        return {
            "protocol": dict(self.protocol),
            "n": self.n,
            "m": self.m,
            "s": self.s,
            "chosen_hash": self.chosen_hash.rows(),
            "d_best": self.d_best,
            "d_mean": self.d_mean,
            "epsilon": self.epsilon,
            "epsilon_family": self.epsilon_family,
            "b_guess": self.b_guess,
            "y0": self.y0,
            "labels": list(self.labels),
            "empty": list(self.empty),
            "per_y_trace_distances": [float(v) for v in self.per_y_trace_distances],
            "per_y_distance_to_average": [float(v) for v in self.per_y_distance_to_average],
            "per_y_fidelity": [float(v) for v in self.per_y_fidelity],
            "per_y_overlap": [float(v) for v in self.per_y_overlap],
            "per_y_reveal_prob": [float(v) for v in self.per_y_reveal_prob],
            "per_y_steering_bound": [float(v) for v in self.per_y_steering_bound],
            "p_tilde": {k: float(v) for k, v in self.p_tilde.items()},
            "mean_distance": self.mean_distance,
            "mean_distance_bound": self.mean_distance_bound,
            "predicted_lower": self.predicted_lower,
            "simulated_sum": self.simulated_sum,
            "sum_q_tilde": self.sum_q_tilde,
            "implied_a": self.implied_a,
            "seed": self.seed,
            "checks": {
                "steering": self.steering_holds(),
                "mean_distance": self.mean_distance_holds(),
                "prediction": self.prediction_holds(),
            },
        }


def alice_hash_attack(protocol, m: int, hash_samples: int = 64, seed: int = 0,
                      hash: Gf2Hash | None = None, cap: int | None = None) -> AttackReport:
    """Run the hash-superposition attack with ``s = n - m`` output bits.

    Among ``hash_samples`` hashes (sample ``i`` from ``default_rng(seed ^ i)``)
    the first one minimizing ``d(E_g)`` is used, unless ``hash`` is given.
    ``epsilon`` is that measured ``d(E_g)``; the a-priori family value is
    recorded as ``epsilon_family``. Openings are simulated exactly: Alice
    measures her label and randomness registers and announces the result.
    """
    n = protocol.n
    cap = dimension_caps()[1] if cap is None else cap
    if n > cap:
        raise DimensionCapError(f"n={n} exceeds the attack dimension cap n <= {cap}")
    if not 0 <= m < n:
        raise ValidationError(f"need 0 <= m < n, got m={m}, n={n}")
    s = n - m
    e = protocol.ensemble()
    b_guess = xi(e)

    if hash is not None:
        if (hash.n, hash.s) != (n, s):
            raise ValidationError(f"forced hash has shape {hash.s}x{hash.n}, expected {s}x{n}")
        g = hash
        d_best = d_mean = nonuniformity(hashed_ensemble(e, g).ensemble)
    else:
        if hash_samples < 1:
            raise ValidationError("hash_samples must be >= 1")
        g, d_best, total = None, np.inf, 0.0
        for i in range(hash_samples):
            cand = sample_hash(n, s, np.random.default_rng(seed ^ i))
            d = nonuniformity(hashed_ensemble(e, cand).ensemble)
            total += d
            if d < d_best:
                g, d_best = cand, d
        d_mean = total / hash_samples
    eps = float(d_best)

    he = hashed_ensemble(e, g)
    labels = list(he.labels)
    ny = len(labels)
    nonempty = [y for y in range(ny) if he.preimages[y]]
    sigma = average_state(e)
    to_avg = np.ones(ny)
    for y in nonempty:
        to_avg[y] = qmath.trace_distance(he.states[y], sigma)
    y0 = min(nonempty, key=lambda y: (to_avg[y], y))

    k = protocol.randomness_dim
    local_dim = 2 ** n * k
    psi0 = superposition_state(protocol, he.preimages[y0])

    dist = np.ones(ny)
    fid = np.zeros(ny)
    overlap = np.zeros(ny)
    q_tilde = np.zeros(ny)
    p_tilde = {lab: 0.0 for lab in all_labels(n)}
    for y in nonempty:
        dist[y] = qmath.trace_distance(he.states[y0], he.states[y])
        fid[y] = qmath.fidelity(he.states[y0], he.states[y])
        target = superposition_state(protocol, he.preimages[y])
        u = qmath.uhlmann_unitary(target.ravel(), psi0.ravel(), local_dim)
        steered = u @ psi0
        overlap[y] = abs(np.vdot(target, steered))
        for lab in he.preimages[y]:
            x = int(lab, 2)
            block = steered[x * k:(x + 1) * k]
            amps = np.einsum("rb,rb->r", protocol.accept_vectors(x).conj(), block)
            p_tilde[lab] = float(np.sum(np.abs(amps) ** 2))
            q_tilde[y] += p_tilde[lab]

    steer_bound = 1.0 - np.sqrt(2 * dist)
    predicted = max(0.0, 2.0 ** s * (1 - 2 * np.sqrt(2 * eps)))
    simulated = float(sum(p_tilde.values()))
    return AttackReport(
        n=n, m=m, s=s, chosen_hash=g, d_best=float(d_best), d_mean=float(d_mean), epsilon=eps,
        epsilon_family=float(0.5 * 2.0 ** (-0.5 * (m - b_guess))), b_guess=b_guess,
        y0=labels[y0], labels=labels, empty=list(he.empty),
        per_y_trace_distances=dist, per_y_distance_to_average=to_avg, per_y_fidelity=fid,
        per_y_overlap=overlap, per_y_reveal_prob=q_tilde, per_y_steering_bound=steer_bound, p_tilde=p_tilde,
        mean_distance=float(2.0 ** -s * to_avg.sum()), mean_distance_bound=2 * eps,
        predicted_lower=float(predicted), simulated_sum=simulated, sum_q_tilde=float(q_tilde.sum()),
        implied_a=float(np.log2(simulated)) if simulated > 0 else float("-inf"),
        seed=seed, protocol=protocol.descriptor(),
    )


@dataclass(frozen=True)
class TradeoffConstants:
    gamma_star: float
    delta_star: float
    c: float
    gamma_closed_form: float
    delta_closed_form: float

    def to_json(self) -> dict:
        return {"gamma_star": self.gamma_star, "delta_star": self.delta_star, "c": self.c,
                "gamma_closed_form": self.gamma_closed_form, "delta_closed_form": self.delta_closed_form}


def _delta_of_gamma(gamma: float) -> float:
    u = 2.0 ** (-gamma / 4 + 1)
    if u >= 1:
        return np.inf
    return gamma - np.log2(1 - u)


def constant_c() -> TradeoffConstants:
    """Minimize ``delta(gamma) = gamma - log2(1 - 2^{1 - gamma/4})`` over ``gamma > 4``."""
    res = minimize_scalar(_delta_of_gamma, bracket=(4.5, 5.0, 8.0), method="golden", tol=1e-10)
    g_closed = 4 * (np.log2(5) - 1)
    d_closed = 5 * np.log2(5) - 4
    return TradeoffConstants(float(res.x), float(res.fun), float(res.fun), float(g_closed), float(d_closed))


@dataclass
class TradeoffVerdict:
    n: int
    a: float
    b: float
    c: float
    lhs: float
    holds: bool
    attack_lhs: float | None = None
    attack_holds: bool | None = None
    notes: list = field(default_factory=list)

    @property
    def violation(self) -> bool:
        return not self.holds or self.attack_holds is False

    def to_json(self) -> dict:
        return {"n": self.n, "a": self.a, "b": self.b, "c": self.c, "lhs": self.lhs, "holds": self.holds,
                "attack_lhs": self.attack_lhs, "attack_holds": self.attack_holds,
                "violation": self.violation, "notes": list(self.notes)}


def tradeoff_audit(report: SecurityReport, attack: AttackReport | None = None) -> TradeoffVerdict:
    """Check ``a + b_guess + c >= n`` (and the attack-implied ``a`` when supplied).

    A violation cannot happen for a correct implementation; it is an alarm.
    """
    if report.b_guess is None:
        raise ValidationError("trade-off audit needs b_guess (xi) in the security report")
    c = constant_c().c
    lhs = report.a_bound + report.b_guess + c
    v = TradeoffVerdict(report.n, report.a_bound, report.b_guess, c, lhs, lhs >= report.n - 1e-9)
    if not v.holds:
        v.notes.append(f"a + b + c = {lhs:.6f} < n = {report.n}")
    if attack is not None:
        v.attack_lhs = attack.implied_a + report.b_guess + c
        v.attack_holds = bool(v.attack_lhs >= report.n - 1e-9)
        if not v.attack_holds:
            v.notes.append(f"implied_a + b + c = {v.attack_lhs:.6f} < n = {report.n}")
    return v


def tensor_power_ensemble(e: Ensemble, copies: int) -> Ensemble:
    if copies < 1:
        raise ValidationError(f"copies must be >= 1, got {copies}")
    if e.dim ** copies > MAX_PARALLEL_DIM:
        raise DimensionCapError(f"state dim {e.dim}^{copies} exceeds {MAX_PARALLEL_DIM}")
    out = e
    for _ in range(copies - 1):
        out = product_ensemble(out, e)
    return out


PARALLEL_MEASURES = {"chi": holevo_chi, "xi": xi, "h2": h2_conditional}


def parallel_audit(e: Ensemble, copies: int, measure: str = "chi") -> float:
    """Measure (``chi``, ``xi`` or ``h2``) of the ``copies``-fold tensor-power ensemble."""
    if measure not in PARALLEL_MEASURES:
        raise ValidationError(f"unknown measure {measure!r}; choose from {sorted(PARALLEL_MEASURES)}")
    return float(PARALLEL_MEASURES[measure](tensor_power_ensemble(e, copies)))
