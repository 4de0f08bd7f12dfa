import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import BUILTIN_SPECS, I2, S1, S2, S3, random_complex, random_hermitian
from stroboscopic.algebra import Superoperator, matrix_exp, numerical_rank, to_coords, vec
from stroboscopic.channels import KrausFamilySpec, Model
from stroboscopic.errors import InvariantViolation
from stroboscopic.generators import GkslComponents, gksl_generator, model_generator, spectrum_report
from stroboscopic.observability import (
    AlphaFunctions,
    ObservableSet,
    alpha_at,
    is_reconstructible,
    krylov_dims,
    krylov_subspace,
    suggest_observables,
    validate_time_grid,
)

DEPH = model_generator(KrausFamilySpec(Model.DEPHASING, 1.0))
FAMILY = model_generator(KrausFamilySpec(Model.ONE_PARAMETRIC, 1.0, 0.5))


def alpha_oracle(l, t, mu):
    """Fit exp(L t) in the span of L^0..L^(mu-1) by least squares."""
    m = l.matrix
    powers = np.array([vec(np.linalg.matrix_power(m, k)) for k in range(mu)]).T
    coef, *_ = np.linalg.lstsq(powers, vec(matrix_exp(m, t)), rcond=None)
    return coef.real


def random_gksl(n, rng, k=2):
    jumps = tuple((random_complex(n, rng), float(rng.uniform(0.2, 1.5))) for _ in range(k))
    return gksl_generator(GkslComponents(random_hermitian(n, rng) * 0.5, jumps))


class TestKrylov:
    def test_dephasing_sigma1(self):
        ks = krylov_subspace(DEPH, S1)
        assert len(ks) == 2
        assert np.abs(ks[1] + S1).max() < 1e-15
        assert numerical_rank([to_coords(k) for k in ks]) == 1

    def test_dephasing_sigma2_plus_sigma3(self):
        gamma = 2.5
        l = model_generator(KrausFamilySpec(Model.DEPHASING, gamma))
        ks = krylov_subspace(l, S2 + S3)
        assert np.abs(ks[1] + gamma * S2).max() < 1e-15
        assert numerical_rank([to_coords(k) for k in ks]) == 2

    @pytest.mark.parametrize("spec", BUILTIN_SPECS, ids=str)
    def test_identity(self, spec):
        ks = krylov_subspace(model_generator(spec), I2)
        assert np.array_equal(ks[0], I2)
        assert all(np.abs(k).max() < 1e-15 for k in ks[1:])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            krylov_subspace(DEPH, np.eye(3))


class TestIsReconstructible:
    def test_dephasing_standard_pair(self):
        assert is_reconstructible(DEPH, [S1, S2 + S3]) == (True, 4, 4)
        assert krylov_dims(DEPH, [S1, S2 + S3]) == [1, 2]

    def test_dephasing_insufficient(self):
        assert is_reconstructible(DEPH, [S1, S2]) == (False, 3, 4)

    @pytest.mark.parametrize("spec", BUILTIN_SPECS, ids=str)
    def test_identity_alone(self, spec):
        assert is_reconstructible(model_generator(spec), [I2]) == (False, 1, 4)

    def test_empty(self):
        with pytest.raises(InvariantViolation):
            is_reconstructible(DEPH, [])

    def test_non_hermitian(self):
        with pytest.raises(InvariantViolation):
            ObservableSet((np.array([[0, 1], [0, 0]]),))

    @settings(max_examples=40)
    @given(seed=st.integers(0, 2**32 - 1), spec_idx=st.integers(0, 2))
    def test_monotone(self, seed, spec_idx):
        rng = np.random.default_rng(seed)
        l = model_generator(BUILTIN_SPECS[spec_idx])
        qs = [random_hermitian(2, rng) * (rng.random() < 0.7) + 1e-300 * I2 for _ in range(3)]
        dims = [is_reconstructible(l, qs[:k]).achieved_dim for k in range(1, 4)]
        assert dims == sorted(dims)

    @pytest.mark.parametrize("spec", BUILTIN_SPECS, ids=str)
    def test_eigenvector_observables_bound(self, spec):
        # eigen-observables of L* contribute one dimension each
        l = model_generator(spec)
        w, v = np.linalg.eig(l.matrix.conj().T)
        qs = []
        for i in range(4):
            q = v[:, i].reshape(2, 2, order="F")
            q = q + q.conj().T
            if np.abs(q).max() > 1e-9 and abs(w[i].imag) < 1e-12:
                qs.append(q)
        for r in range(1, len(qs) + 1):
            assert is_reconstructible(l, qs[:r]).achieved_dim <= 1 + r


class TestAlpha:
    @pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
    def test_dephasing_closed_form(self, gamma):
        l = model_generator(KrausFamilySpec(Model.DEPHASING, gamma))
        alphas = AlphaFunctions(l)
        for t in np.linspace(0, 5, 50):
            assert np.abs(alphas(t) - [1, (1 - np.exp(-gamma * t)) / gamma]).max() <= 1e-10

    @pytest.mark.parametrize("spec", BUILTIN_SPECS, ids=str)
    def test_at_zero(self, spec):
        a = alpha_at(model_generator(spec), 0.0)
        assert np.array_equal(a, np.eye(len(a))[0])

    def test_family_against_oracle(self):
        got = alpha_at(FAMILY, 1.0)
        assert np.abs(got - alpha_oracle(FAMILY, 1.0, 4)).max() < 1e-10
        rebuilt = sum(c * np.linalg.matrix_power(FAMILY.matrix, k) for k, c in enumerate(got))
        assert np.abs(rebuilt - matrix_exp(FAMILY.matrix, 1.0)).max() <= 1e-10

    @pytest.mark.parametrize(
        "spec", BUILTIN_SPECS + [KrausFamilySpec(Model.ONE_PARAMETRIC, 2.0, 1.0)], ids=str
    )
    def test_exp_identity(self, spec):
        l = model_generator(spec)
        alphas = AlphaFunctions(l)
        powers = [np.linalg.matrix_power(l.matrix, k) for k in range(alphas.mu)]
        for t in np.linspace(0, 5, 50):
            rebuilt = sum(c * p for c, p in zip(alphas(t), powers))
            assert np.abs(rebuilt - matrix_exp(l.matrix, t)).max() <= 1e-10

    def test_complex_spectrum_and_hamiltonian(self, rng):
        l = random_gksl(3, rng)
        alphas = AlphaFunctions(l)
        assert alphas.mu == 9
        powers = [np.linalg.matrix_power(l.matrix, k) for k in range(alphas.mu)]
        for t in (0.0, 0.4, 1.3):
            rebuilt = sum(c * p for c, p in zip(alphas(t), powers))
            assert np.abs(rebuilt - matrix_exp(l.matrix, t)).max() <= 1e-8

    def test_defective_generator(self):
        m = np.zeros((4, 4))
        m[1, 2] = 1.0
        m[1, 1] = m[2, 2] = -1.0
        l = Superoperator(m)
        alphas = AlphaFunctions(l)
        assert alphas.mu == 3
        for t in (0.5, 2.0):
            rebuilt = sum(c * np.linalg.matrix_power(m, k) for k, c in enumerate(alphas(t)))
            assert np.abs(rebuilt - matrix_exp(m, t)).max() <= 1e-10

    @pytest.mark.parametrize("spec", BUILTIN_SPECS, ids=str)
    def test_linear_independence_random_grids(self, spec, rng):
        l = model_generator(spec)
        alphas = AlphaFunctions(l)
        for _ in range(20):
            times = np.cumsum(rng.uniform(0.1, 1.5, alphas.mu)) - 0.1
            assert validate_time_grid(l, times, alphas=alphas).valid

    def test_non_finite_time(self):
        with pytest.raises(ValueError):
            alpha_at(DEPH, float("inf"))


class TestTimeGrid:
    @pytest.mark.parametrize("t1,t2", [(0.5, 1.0), (0.0, 3.0), (2.0, 0.1)])
    @pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
    def test_dephasing_determinant(self, gamma, t1, t2):
        l = model_generator(KrausFamilySpec(Model.DEPHASING, gamma))
        cert = validate_time_grid(l, [t1, t2])
        # det [[1, a1(t1)], [1, a1(t2)]] = a1(t2) - a1(t1)
        want = (np.exp(-gamma * t1) - np.exp(-gamma * t2)) / gamma
        assert cert.valid
        assert abs(cert.determinant - want) <= 1e-12

    def test_repeated_instant_invalid(self):
        cert = validate_time_grid(DEPH, [1.0, 1.0])
        assert not cert.valid and cert.determinant == 0

    def test_family_grid(self):
        times = [0.0, 0.5, 1.0, 1.5]
        cert = validate_time_grid(FAMILY, times)
        oracle = np.linalg.det(np.array([alpha_oracle(FAMILY, t, 4) for t in times]))
        assert cert.valid
        assert abs(cert.determinant - oracle) <= 1e-9 * abs(oracle)

    def test_wrong_count(self):
        with pytest.raises(ValueError):
            validate_time_grid(DEPH, [0.1, 0.2, 0.3])


class TestSuggest:
    @pytest.mark.parametrize("spec,eta", list(zip(BUILTIN_SPECS, [2, 3, 1])), ids=str)
    def test_size_and_validity(self, spec, eta):
        l = model_generator(spec)
        qs = suggest_observables(l)
        assert len(qs) == eta
        assert is_reconstructible(l, qs).ok
        for q in qs:
            assert abs(np.trace(q)) < 1e-12
            assert np.linalg.norm(q) == pytest.approx(1.0)
        for subset in itertools.combinations(qs, eta - 1):
            if subset:
                assert not is_reconstructible(l, subset).ok

    def test_dephasing_prefers_sparse(self):
        qs = suggest_observables(DEPH)
        supports = [np.count_nonzero(np.abs(to_coords(q)[1:]) > 1e-12) for q in qs]
        assert sorted(supports) == [1, 2]

    @pytest.mark.parametrize("a", [0.0, 1.0, 2.0])
    def test_degenerate_family(self, a):
        l = model_generator(KrausFamilySpec(Model.ONE_PARAMETRIC, 1.0, a))
        qs = suggest_observables(l)
        assert len(qs) == 2 and is_reconstructible(l, qs).ok

    @pytest.mark.parametrize("n", [3, 4])
    def test_random_larger_systems(self, n, rng):
        l = random_gksl(n, rng)
        qs = suggest_observables(l, seed=1)
        assert len(qs) == spectrum_report(l).eta
        assert is_reconstructible(l, qs).ok

    def test_deterministic(self):
        a = suggest_observables(FAMILY, seed=3)
        b = suggest_observables(FAMILY, seed=3)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))
