import numpy as np
import pytest

from conftest import PLUS, ZERO, proj, random_full_ensemble, two_basis_ensemble
from qbsc import qmath
from qbsc.ensembles import (
    Channel,
    Ensemble,
    Povm,
    average_state,
    computational_povm,
    identical_ensemble,
    induced_channel,
    orthogonal_ensemble,
    random_density_matrix,
    random_ensemble,
)
from qbsc.errors import ValidationError
from qbsc.infomeasures import (
    OptimizerSettings,
    accessible_info_bracket,
    entropy,
    guessing_probability,
    h2_conditional,
    helstrom_optimum,
    holevo_chi,
    pretty_good_measurement,
    shannon_mutual_information,
    von_neumann_entropy,
    xi,
)
from qbsc.infomeasures import _seesaw


def h(p):
    return -p * np.log2(p) - (1 - p) * np.log2(1 - p)


def joint_h2(e):
    """Conditional collision entropy from the joint matrix ``sum_x p_x |x><x| ⊗ rho_x``."""
    k = len(e)
    joint = np.zeros((k * e.dim, k * e.dim), dtype=complex)
    for i, (p, r) in enumerate(zip(e.priors, e.states)):
        joint += p * np.kron(proj(qmath.basis_state(i, k)), r)
    w, v = np.linalg.eigh(average_state(e))
    inv = np.where(w > 1e-10, 1 / np.sqrt(np.clip(w, 1e-300, None)), 0.0)
    r = np.kron(np.eye(k), (v * inv) @ v.conj().T)
    m = r @ joint
    return -np.log2(np.trace(m @ m).real)


FAST = OptimizerSettings(restarts=4, max_iters=200)


def helstrom_mi(e):
    return shannon_mutual_information(induced_channel(e, helstrom_optimum(e)[1]))


class TestClassical:
    def test_identity_channel(self):
        assert abs(shannon_mutual_information(Channel(np.eye(4), np.full(4, 0.25))) - 2) < 1e-12

    def test_constant_channel(self):
        assert abs(shannon_mutual_information(Channel(np.full((4, 3), 1 / 3), np.full(4, 0.25)))) < 1e-12

    def test_two_bit_lockcom_channel(self):
        cond = 0.5 * np.eye(4) + 0.125
        hyx = -(5 / 8) * np.log2(5 / 8) - 3 * (1 / 8) * np.log2(1 / 8)
        val = shannon_mutual_information(Channel(cond, np.full(4, 0.25)))
        assert abs(val - (2 - hyx)) < 1e-12
        assert abs(val - 0.45120505930460175) < 1e-12

    def test_entropy_zero_mass(self):
        assert entropy([0.5, 0.5, 0.0]) == pytest.approx(1.0, abs=1e-15)


class TestVonNeumann:
    def test_pure(self):
        assert abs(von_neumann_entropy(proj(PLUS))) < 1e-12

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_maximally_mixed(self, n):
        assert abs(von_neumann_entropy(np.eye(2 ** n) / 2 ** n) - n) < 1e-12

    def test_binary(self):
        rho = 0.5 * (proj(ZERO) + proj(PLUS))
        assert abs(von_neumann_entropy(rho) - h(np.sin(np.pi / 8) ** 2)) < 1e-12
        assert abs(von_neumann_entropy(rho) - 0.6009) < 1e-4


class TestHolevo:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_orthogonal(self, n):
        assert abs(holevo_chi(orthogonal_ensemble(n)) - n) < 1e-10

    def test_identical(self):
        rho = random_density_matrix(4, np.random.default_rng(0))
        assert abs(holevo_chi(identical_ensemble(2, rho))) < 1e-10

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_two_basis_closed_form(self, n):
        expect = n - h(0.5 * (1 - 2 ** (-n / 2)))
        assert abs(holevo_chi(two_basis_ensemble(n)) - expect) < 1e-10

    def test_two_basis_n1_value(self):
        assert abs(holevo_chi(two_basis_ensemble(1)) - 0.3991) < 1e-4


class TestCollisionEntropy:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_orthogonal(self, n):
        assert abs(h2_conditional(orthogonal_ensemble(n))) < 1e-10
        assert abs(xi(orthogonal_ensemble(n)) - n) < 1e-10

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_identical(self, n):
        rho = random_density_matrix(3, np.random.default_rng(n))
        assert abs(h2_conditional(identical_ensemble(n, rho)) - n) < 1e-10
        assert abs(xi(identical_ensemble(n, rho))) < 1e-10

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_two_basis_closed_form(self, n):
        assert abs(h2_conditional(two_basis_ensemble(n)) + np.log2(0.5 * (1 + 2.0 ** -n))) < 1e-10

    def test_two_basis_values(self):
        assert abs(h2_conditional(two_basis_ensemble(1)) - 0.41504) < 1e-5
        assert abs(xi(two_basis_ensemble(3)) - 2.16993) < 1e-5

    @pytest.mark.parametrize("seed", range(15))
    def test_blockwise_matches_joint(self, seed):
        rng = np.random.default_rng(100 + seed)
        e = random_ensemble(int(rng.integers(2, 5)), int(rng.integers(1, 5)), rng)
        assert abs(h2_conditional(e) - joint_h2(e)) < 1e-10

    def test_xi_requires_full(self):
        e = Ensemble(2, ["00", "01"], [0.5, 0.5], [proj(ZERO), proj(PLUS)])
        with pytest.raises(ValidationError):
            xi(e)


class TestPgm:
    def test_orthogonal_projectors(self):
        m = pretty_good_measurement(orthogonal_ensemble(2))
        assert len(m) == 4
        assert np.allclose(m.operators, computational_povm(4).operators)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_two_basis_is_states(self, n):
        e = two_basis_ensemble(n)
        m = pretty_good_measurement(e)
        assert len(m) == 2 ** n
        assert np.max(np.abs(m.operators - e.states)) < 1e-10

    def test_reject_on_singular_average(self):
        e = Ensemble(1, ["0", "1"], [0.5, 0.5], [proj(ZERO), proj(PLUS)])
        e3 = Ensemble(1, e.labels, e.priors, [np.pad(r, ((0, 1), (0, 1))) for r in e.states])
        m = pretty_good_measurement(e3)
        assert m.outcomes[-1] is None
        assert np.allclose(m.operators[-1], np.diag([0, 0, 1]))
        assert all(np.trace(m.operators[-1] @ r).real < 1e-12 for r in e3.states)

    def test_completeness_random(self):
        rng = np.random.default_rng(9)
        for _ in range(40):
            e = random_ensemble(int(rng.integers(1, 9)), int(rng.integers(1, 7)), rng, max_rank=2)
            m = pretty_good_measurement(e)
            assert np.max(np.abs(m.operators.sum(axis=0) - np.eye(e.dim))) < 1e-8


class TestGuessing:
    def test_orthogonal(self):
        e = orthogonal_ensemble(3)
        assert abs(guessing_probability(e, pretty_good_measurement(e)) - 1) < 1e-12

    def test_identical_uniform(self):
        rng = np.random.default_rng(4)
        e = identical_ensemble(2, random_density_matrix(3, rng))
        padded = Povm(np.concatenate([computational_povm(3).operators, np.zeros((1, 3, 3))]))
        assert abs(guessing_probability(e, padded) - 0.25) < 1e-12

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_two_basis_pgm(self, n):
        e = two_basis_ensemble(n)
        assert abs(guessing_probability(e, pretty_good_measurement(e)) - 0.5 * (1 + 2.0 ** -n)) < 1e-10

    @pytest.mark.parametrize("seed", range(30))
    def test_pgm_equals_collision_bound(self, seed):
        rng = np.random.default_rng(seed)
        e = random_ensemble(int(rng.integers(1, 9)), int(rng.integers(1, 9)), rng)
        pg = guessing_probability(e, pretty_good_measurement(e))
        assert abs(pg - 2.0 ** -h2_conditional(e)) < 1e-10

    def test_too_few_outcomes(self):
        with pytest.raises(ValidationError, match="outcomes"):
            guessing_probability(orthogonal_ensemble(2), Povm(np.eye(4)[None]))


class TestHelstrom:
    def test_orthogonal(self):
        assert abs(helstrom_optimum(orthogonal_ensemble(1))[0] - 1) < 1e-12

    def test_identical(self):
        e = identical_ensemble(1, random_density_matrix(2, np.random.default_rng(0)))
        assert abs(helstrom_optimum(e)[0] - 0.5) < 1e-12

    def test_two_basis(self):
        val, povm = helstrom_optimum(two_basis_ensemble(1))
        assert abs(val - 0.5 * (1 + 1 / np.sqrt(2))) < 1e-12
        assert abs(guessing_probability(two_basis_ensemble(1), povm) - val) < 1e-12

    def test_requires_two_labels(self):
        with pytest.raises(ValidationError, match="2 labels"):
            helstrom_optimum(orthogonal_ensemble(2))

    def test_sandwich(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            e = random_ensemble(2, int(rng.integers(1, 9)), rng)
            pgm = guessing_probability(e, pretty_good_measurement(e))
            hel, povm = helstrom_optimum(e)
            assert pgm <= hel + 1e-10
            assert abs(guessing_probability(e, povm) - hel) < 1e-10
            # guessing more likely prior is always possible
            assert hel >= e.priors.max() - 1e-12


class TestBracket:
    @pytest.mark.parametrize("n", [1, 2])
    def test_orthogonal(self, n):
        b = accessible_info_bracket(orthogonal_ensemble(n), FAST)
        assert abs(b.lower - n) < 1e-9 and abs(b.upper - n) < 1e-9

    def test_identical(self):
        e = identical_ensemble(2, random_density_matrix(2, np.random.default_rng(0)))
        b = accessible_info_bracket(e, FAST)
        assert abs(b.lower) < 1e-9 and abs(b.upper) < 1e-9

    def test_two_basis_n1_closes(self):
        b = accessible_info_bracket(two_basis_ensemble(1))
        assert b.closed
        assert abs(b.lower - 0.3991) < 1e-3 and abs(b.upper - 0.3991) < 1e-3
        assert abs(b.candidates["helstrom"] - holevo_chi(two_basis_ensemble(1))) < 1e-9

    def test_seesaw_alone_reaches_helstrom(self):
        e = two_basis_ensemble(1)
        best = max(_seesaw(e, rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2)), 500, 1e-7)[1]
                   for rng in (np.random.default_rng(i) for i in range(5)))
        assert abs(best - helstrom_mi(e)) < 1e-3

    @pytest.mark.parametrize("seed", range(8))
    def test_sound_and_replayable(self, seed):
        rng = np.random.default_rng(seed)
        e = random_full_ensemble(int(rng.integers(1, 3)), int(rng.integers(2, 5)), rng, uniform=False)
        b = accessible_info_bracket(e, OptimizerSettings(restarts=3, max_iters=100, seed=seed))
        assert b.lower <= b.upper + 1e-9
        assert b.lower <= holevo_chi(e) + 1e-9
        replay = shannon_mutual_information(induced_channel(e, b.best_measurement))
        assert abs(replay - b.lower) < 1e-9 or b.lower == b.upper

    def test_deterministic(self):
        e = two_basis_ensemble(2)
        a = accessible_info_bracket(e, OptimizerSettings(restarts=2, max_iters=50, seed=3))
        b = accessible_info_bracket(e, OptimizerSettings(restarts=2, max_iters=50, seed=3))
        assert a.lower == b.lower and a.candidates == b.candidates

    @pytest.mark.parametrize("n", [2, 3])
    def test_two_basis_below_half_n(self, n):
        e = two_basis_ensemble(n)
        b = accessible_info_bracket(e, FAST)
        assert all(v <= n / 2 + 1e-6 for v in b.candidates.values())
        hyx = entropy(0.5 * np.eye(2 ** n)[0] + 0.5 / 2 ** n)
        assert abs(b.candidates["computational"] - (n - hyx)) < 1e-9

    def test_settings_json(self):
        s = OptimizerSettings.from_json({"restarts": 3, "tol": 1e-5})
        assert s.restarts == 3 and s.max_iters == 500 and s.to_json()["tol"] == 1e-5
        with pytest.raises(ValidationError, match="unknown"):
            OptimizerSettings.from_json({"restart": 3})
        with pytest.raises(ValidationError):
            OptimizerSettings.from_json({"tol": 0})
