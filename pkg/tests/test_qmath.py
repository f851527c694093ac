import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from qbsc import qmath
from qbsc.errors import ValidationError
from qbsc.ensembles import random_density_matrix

from conftest import ONE, PLUS, ZERO, proj


def random_hermitian(d, rng):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return a + a.conj().T


def random_pure(d, rng):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


class TestTensor:
    def test_identity(self):
        assert np.allclose(qmath.tensor(np.eye(2), np.eye(2)), np.eye(4))

    def test_basis_projectors(self):
        out = qmath.tensor(np.diag([1, 0]), np.diag([0, 1]))
        assert np.allclose(out, np.diag([0, 1, 0, 0]))

    def test_hadamard_on_zero_zero(self):
        hh = qmath.tensor(qmath.HADAMARD, qmath.HADAMARD)
        assert np.allclose(hh @ np.array([1, 0, 0, 0]), [0.5, 0.5, 0.5, 0.5])


class TestPartialTrace:
    def test_bell_marginal(self):
        phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
        assert np.allclose(qmath.partial_trace(proj(phi), [2, 2], {1}), np.eye(2) / 2)

    def test_product_state(self):
        rng = np.random.default_rng(3)
        rho, sigma = random_density_matrix(3, rng), random_density_matrix(2, rng)
        full = np.kron(rho, sigma)
        assert np.allclose(qmath.partial_trace(full, [3, 2], {0}), rho)
        assert np.allclose(qmath.partial_trace(full, [3, 2], {1}), sigma)

    def test_three_subsystems_against_einsum(self):
        rng = np.random.default_rng(4)
        m = random_density_matrix(12, rng)
        t = m.reshape(2, 3, 2, 2, 3, 2)
        assert np.allclose(qmath.partial_trace(m, [2, 3, 2], {1}), np.einsum("aibajb->ij", t))
        assert np.allclose(qmath.partial_trace(m, [2, 3, 2], {0, 2}), np.einsum("aibcid->abcd", t).reshape(4, 4))

    def test_trace_preserved(self):
        rng = np.random.default_rng(5)
        m = random_density_matrix(8, rng)
        for keep in ({0}, {1}, {2}, {0, 1}, set()):
            assert np.trace(qmath.partial_trace(m, [2, 2, 2], keep)) == pytest.approx(1.0)

    def test_dim_mismatch(self):
        with pytest.raises(ValidationError):
            qmath.partial_trace(np.eye(4), [2, 3], {0})


class TestEig:
    def test_diagonal(self):
        dec = qmath.eig_hermitian(np.diag([1.0, 3.0]))
        assert np.allclose(dec.eigenvalues, [3, 1])

    def test_hadamard_spectrum(self):
        assert np.allclose(qmath.eig_hermitian(qmath.HADAMARD).eigenvalues, [1, -1])

    def test_two_state_mixture_closed_form(self):
        rho = 0.5 * (proj(ZERO) + proj(PLUS))
        expected = [0.5 * (1 + 1 / np.sqrt(2)), 0.5 * (1 - 1 / np.sqrt(2))]
        assert np.allclose(qmath.eig_hermitian(rho).eigenvalues, expected, atol=1e-12)
        assert np.allclose(expected, [np.cos(np.pi / 8) ** 2, np.sin(np.pi / 8) ** 2])

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValidationError):
            qmath.eig_hermitian(np.array([[0, 1], [0, 0]]))

    @pytest.mark.parametrize("backend", ["lapack", "jacobi"])
    def test_reconstruction_random(self, backend):
        rng = np.random.default_rng(11)
        trials = 100 if backend == "lapack" else 25
        for _ in range(trials):
            d = int(rng.integers(1, 17))
            m = random_hermitian(d, rng)
            dec = qmath.eig_hermitian(m, backend=backend)
            v = dec.eigenvectors
            assert np.max(np.abs(dec.reconstruct() - m)) <= 1e-9
            assert np.max(np.abs(v.conj().T @ v - np.eye(d))) <= 1e-9
            assert np.all(np.diff(dec.eigenvalues) <= 1e-12)

    def test_jacobi_matches_lapack(self):
        rng = np.random.default_rng(12)
        m = random_hermitian(9, rng)
        w, _ = qmath.jacobi_eigh(m)
        assert np.allclose(np.sort(w), np.linalg.eigvalsh(m), atol=1e-10)

    def test_jacobi_degenerate(self):
        u = qmath.haar_unitary(6, np.random.default_rng(1))
        m = u @ np.diag([2, 2, 2, -1, -1, 0.5]) @ u.conj().T
        dec = qmath.eig_hermitian(m, backend="jacobi")
        assert np.allclose(dec.eigenvalues, [2, 2, 2, 0.5, -1, -1], atol=1e-10)
        assert np.max(np.abs(dec.reconstruct() - m)) <= 1e-9


class TestHermitianFunction:
    def test_inv_sqrt_maximally_mixed(self):
        assert np.allclose(qmath.mat_inv_sqrt(np.eye(2) / 2), np.sqrt(2) * np.eye(2))

    def test_inv_sqrt_support_restricted(self):
        assert np.allclose(qmath.mat_inv_sqrt(np.diag([1.0, 0.0])), np.diag([1.0, 0.0]))

    def test_sqrt(self):
        assert np.allclose(qmath.mat_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))

    def test_sqrt_rejects_negative(self):
        with pytest.raises(ValidationError):
            qmath.mat_sqrt(np.diag([1.0, -0.1]))

    def test_sqrt_agrees_with_scipy(self):
        rho = random_density_matrix(5, np.random.default_rng(2))
        assert np.allclose(qmath.mat_sqrt(rho), scipy.linalg.sqrtm(rho), atol=1e-9)


class TestDistances:
    def test_trace_distance_examples(self):
        rho = random_density_matrix(3, np.random.default_rng(0))
        assert qmath.trace_distance(rho, rho) == pytest.approx(0, abs=1e-12)
        assert qmath.trace_distance(proj(ZERO), proj(ONE)) == pytest.approx(1)
        # eigenvalues of |0><0| - |+><+| are +-sin(45 deg)
        assert qmath.trace_distance(proj(ZERO), proj(PLUS)) == pytest.approx(np.sin(np.pi / 4), abs=1e-12)

    def test_trace_distance_dim_mismatch(self):
        with pytest.raises(ValidationError):
            qmath.trace_distance(np.eye(2) / 2, np.eye(3) / 3)

    def test_fidelity_examples(self):
        rho = random_density_matrix(3, np.random.default_rng(1))
        assert qmath.fidelity(rho, rho) == pytest.approx(1, abs=1e-9)
        assert qmath.fidelity(proj(ZERO), proj(ONE)) == pytest.approx(0, abs=1e-12)
        assert qmath.fidelity(proj(ZERO), proj(PLUS)) == pytest.approx(1 / np.sqrt(2), abs=1e-12)

    def test_fidelity_pure_overlap(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a, b = random_pure(4, rng), random_pure(4, rng)
            assert qmath.fidelity(proj(a), proj(b)) == pytest.approx(abs(np.vdot(a, b)), abs=1e-9)

    def test_fidelity_against_direct_formula(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            r, s = random_density_matrix(4, rng), random_density_matrix(4, rng)
            sr = scipy.linalg.sqrtm(r)
            direct = np.trace(scipy.linalg.sqrtm(sr @ s @ sr)).real
            assert qmath.fidelity(r, s) == pytest.approx(direct, abs=1e-8)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(1, 6))
    def test_metric_properties(self, seed, d):
        rng = np.random.default_rng(seed)
        r, s, t = (random_density_matrix(d, rng, int(rng.integers(1, d + 1))) for _ in range(3))
        drs = qmath.trace_distance(r, s)
        assert 0 <= drs <= 1
        assert drs == pytest.approx(qmath.trace_distance(s, r), abs=1e-12)
        assert qmath.trace_distance(r, t) <= drs + qmath.trace_distance(s, t) + 1e-12
        f = qmath.fidelity(r, s)
        assert 1 - f <= drs + 1e-9
        assert drs <= np.sqrt(max(0.0, 1 - f ** 2)) + 1e-9


class TestPurify:
    def test_pure_input(self):
        assert np.allclose(qmath.purify(proj(ZERO)), [1, 0, 0, 0])

    def test_maximally_mixed(self):
        psi = qmath.purify(np.eye(2) / 2)
        a = psi.reshape(2, 2)
        assert np.allclose(a @ a.conj().T, np.eye(2) / 2)
        v0, v1 = a[0] * np.sqrt(2), a[1] * np.sqrt(2)
        assert abs(np.vdot(v0, v1)) < 1e-12
        assert np.linalg.norm(v0) == pytest.approx(1) and np.linalg.norm(v1) == pytest.approx(1)

    def test_round_trip_random(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            rho = random_density_matrix(4, rng, int(rng.integers(1, 5)))
            psi = qmath.purify(rho)
            assert np.linalg.norm(psi) == pytest.approx(1, abs=1e-12)
            marg = qmath.partial_trace(proj(psi), [4, 4], {1})
            assert np.max(np.abs(marg - rho)) <= 1e-9

    def test_canonical_phase(self):
        rho = random_density_matrix(3, np.random.default_rng(10))
        a = qmath.purify(rho).reshape(3, 3)
        for row in a:
            nz = row[np.abs(row) > 1e-12]
            assert abs(nz[0].imag) < 1e-12 and nz[0].real > 0
        assert np.array_equal(qmath.purify(rho), qmath.purify(rho))

    def test_rejects_invalid(self):
        with pytest.raises(ValidationError):
            qmath.purify(np.diag([0.7, 0.7]))


class TestUhlmann:
    def test_equal_states(self):
        phi = random_pure(8, np.random.default_rng(0))
        u = qmath.uhlmann_unitary(phi, phi, 2)
        assert abs(np.vdot(phi, np.kron(u, np.eye(4)) @ phi)) == pytest.approx(1, abs=1e-12)

    def test_flip_local_bit(self):
        phi0 = np.array([1, 0, 0, 0], dtype=complex)
        phi1 = np.array([0, 0, 1, 0], dtype=complex)
        u = qmath.uhlmann_unitary(phi0, phi1, 2)
        assert np.allclose(u.conj().T @ u, np.eye(2))
        assert abs(np.vdot(phi0, np.kron(u, np.eye(2)) @ phi1)) == pytest.approx(1, abs=1e-12)

    def test_overlap_equals_fidelity(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            phi0, phi1 = random_pure(8, rng), random_pure(8, rng)
            u = qmath.uhlmann_unitary(phi0, phi1, 2)
            assert np.max(np.abs(u.conj().T @ u - np.eye(2))) <= 1e-12
            overlap = abs(np.vdot(phi0, np.kron(u, np.eye(4)) @ phi1))
            r0 = qmath.partial_trace(proj(phi0), [2, 4], {1})
            r1 = qmath.partial_trace(proj(phi1), [2, 4], {1})
            assert overlap == pytest.approx(qmath.fidelity(r0, r1), abs=1e-9)

    def test_factorization_mismatch(self):
        with pytest.raises(ValidationError):
            qmath.uhlmann_unitary(np.ones(6) / np.sqrt(6), np.ones(6) / np.sqrt(6), 4)


class TestHaar:
    @pytest.mark.parametrize("d", [2, 4, 8])
    def test_unitary(self, d):
        u = qmath.haar_unitary(d, np.random.default_rng(d))
        assert np.max(np.abs(u.conj().T @ u - np.eye(d))) <= 1e-9

    def test_deterministic(self):
        a = qmath.haar_unitary(4, np.random.default_rng(42))
        b = qmath.haar_unitary(4, np.random.default_rng(42))
        assert a.tobytes() == b.tobytes()

    def test_first_moment(self):
        # E|U_00|^2 = 1/d under the Haar measure
        rng = np.random.default_rng(2024)
        vals = [abs(qmath.haar_unitary(2, rng)[0, 0]) ** 2 for _ in range(10_000)]
        assert np.mean(vals) == pytest.approx(0.5, abs=0.02)

    def test_second_moment(self):
        # E|U_00|^4 = 2/(d(d+1)); QR without the phase fix is biased here
        rng = np.random.default_rng(7)
        vals = [abs(qmath.haar_unitary(3, rng)[0, 0]) ** 4 for _ in range(20_000)]
        assert np.mean(vals) == pytest.approx(2 / 12, abs=0.01)


class TestJson:
    def test_round_trip(self):
        rng = np.random.default_rng(1)
        m = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
        obj = qmath.matrix_to_json(m)
        assert obj["rows"] == 3 and obj["cols"] == 2 and len(obj["entries"]) == 6
        assert obj["entries"][1] == [m[0, 1].real, m[0, 1].imag]
        assert np.array_equal(qmath.matrix_from_json(obj), m)

    def test_rejects_bad_length(self):
        with pytest.raises(ValidationError, match="entries"):
            qmath.matrix_from_json({"rows": 2, "cols": 2, "entries": [[1, 0]]})

    def test_seventeen_digits(self):
        from qbsc.jsonfmt import dumps
        import json
        text = dumps(qmath.matrix_to_json(np.array([[0.1 + 1 / 3j]])))
        assert "0.10000000000000001" in text
        back = qmath.matrix_from_json(json.loads(text))
        assert back[0, 0] == 0.1 + 1 / 3j
