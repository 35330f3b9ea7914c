import numpy as np
import pytest
from hypothesis import given, settings

from conftest import complex_vector, dims, seeds, tensor_from_seed, unitary_from_seed
from kahlerlab import tensor_core as tc
from kahlerlab.errors import PreconditionError, StructuralError, SymmetryError
from kahlerlab.models import example_1_2, flat, fubini_study, product, riemann_surface


# ------------------------------------------------------------------ validate

def test_validate_accepts_fubini_study_and_zero():
    assert tc.validate(fubini_study(2, 4)) == []
    for n in (1, 2, 3):
        assert tc.validate(flat(n)) == []


def test_validate_reports_single_orbit_defect():
    arr = np.zeros((2,) * 4, dtype=complex)
    arr[0, 0, 1, 1] = 1.0
    bad = tc.validate(tc.KahlerCurvatureTensor(arr))
    assert len(bad) == 1
    v = bad[0]
    assert {v.index, v.partner} & {(0, 0, 1, 1), (1, 1, 0, 0)}
    assert v.defect == pytest.approx(1.0)
    assert "hermitian" in v.kinds or "unbarred-exchange" in v.kinds


def test_validate_shape_error():
    with pytest.raises(StructuralError):
        tc.validate(np.zeros((2, 2, 2)))
    with pytest.raises(StructuralError):
        tc.KahlerCurvatureTensor(np.zeros((2, 3, 2, 2)))


def test_symmetrize_is_exact_projection(rng):
    raw = rng.standard_normal((3,) * 4) + 1j * rng.standard_normal((3,) * 4)
    s = tc.symmetrize(raw)
    assert tc.validate(s, 0.0) == []
    np.testing.assert_array_equal(tc.symmetrize(s), s)


def test_symmetry_orbit_of_generic_index():
    orbit = tc.symmetry_orbit((0, 1, 2, 3))
    assert len(orbit) == 8
    assert (2, 1, 0, 3) in orbit and (1, 0, 3, 2) in orbit


def test_entries_are_read_only():
    T = fubini_study(2, 4)
    with pytest.raises(ValueError):
        T.entries[0, 0, 0, 0] = 1


# -------------------------------------------------------------- bisectional

def test_bisectional_examples(frozen):
    e = np.eye(3)
    assert tc.evaluate_bisectional(fubini_study(2, 4), e[0, :2], e[1, :2]) == pytest.approx(2.0)
    assert tc.evaluate_bisectional(fubini_study(3, 4), e[0], e[1]) == pytest.approx(frozen["fs3_bisectional_e1e2"])
    assert tc.evaluate_bisectional(flat(3), e[0] + 2j * e[1], e[2]) == 0.0
    assert tc.evaluate_bisectional(example_1_2(2), e[0], e[1]) == 0.0


def test_bisectional_dimension_and_symmetry_errors():
    T = fubini_study(2, 4)
    with pytest.raises(StructuralError):
        tc.evaluate_bisectional(T, np.ones(3), np.ones(2))
    arr = np.zeros((2,) * 4, dtype=complex)
    arr[0, 1, 0, 0] = 1.0  # no partners: R(X,X̄,Y,Ȳ) picks up an imaginary part
    with pytest.raises(SymmetryError):
        tc.evaluate_bisectional(tc.KahlerCurvatureTensor(arr), np.array([1, 1j]), np.array([1, 0]))


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=dims)
def test_bisectional_phase_invariant_and_real(seed, n):
    T = tensor_from_seed(seed, n)
    rng = np.random.default_rng(seed)
    X, Y = complex_vector(rng, n), complex_vector(rng, n)
    base = tc.bisectional_complex(T, X, Y)
    assert abs(base.imag) <= 1e-10 * (1 + abs(base))
    for th, ph in rng.uniform(0, 2 * np.pi, size=(100, 2)):
        v = tc.evaluate_bisectional(T, np.exp(1j * th) * X, np.exp(1j * ph) * Y)
        assert v == pytest.approx(base.real, abs=1e-10 * (1 + abs(base)))


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=dims)
def test_bisectional_quadratic_scaling(seed, n):
    T = tensor_from_seed(seed, n)
    rng = np.random.default_rng(seed)
    X, Y = complex_vector(rng, n), complex_vector(rng, n)
    s, t = rng.uniform(0.1, 3, size=2)
    lhs = tc.evaluate_bisectional(T, s * X, t * Y)
    rhs = s**2 * t**2 * tc.evaluate_bisectional(T, X, Y)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_holomorphic_sectional_examples():
    e = np.eye(2)
    assert tc.holomorphic_sectional(fubini_study(2, 4), e[0]) == pytest.approx(4.0)
    assert tc.holomorphic_sectional(riemann_surface(-4), np.array([1.0])) == -4.0
    X = np.array([1, 1j]) / np.sqrt(2)
    assert tc.holomorphic_sectional(flat(2), X) == 0.0
    with pytest.raises(PreconditionError):
        tc.holomorphic_sectional(flat(2), np.array([1.0, 1.0]))


# ------------------------------------------------------------ frame change

def test_fubini_study_is_unitarily_invariant(rng):
    T = fubini_study(3, 4)
    for _ in range(5):
        U = tc.random_unitary(rng, 3)
        np.testing.assert_allclose(tc.conjugate_frame(T, U).entries, T.entries, atol=1e-10)


def test_conjugate_identity_and_scalar_invariance(rng):
    T = product(fubini_study(2, 4), flat(1))
    np.testing.assert_allclose(tc.conjugate_frame(T, np.eye(3)).entries, T.entries, atol=0)
    T2 = tc.conjugate_frame(T, tc.random_unitary(rng, 3))
    assert tc.scalar(T2) == pytest.approx(tc.scalar(T), abs=1e-9)
    assert tc.validate(T2) == []


def test_conjugate_rejects_non_unitary():
    with pytest.raises(PreconditionError):
        tc.conjugate_frame(flat(2), np.array([[1, 1], [0, 1]]))
    with pytest.raises(StructuralError):
        tc.conjugate_frame(flat(2), np.eye(3))


@settings(max_examples=25, deadline=None)
@given(seed=seeds, n=dims)
def test_conjugation_is_group_action(seed, n):
    T = tensor_from_seed(seed, n)
    U = unitary_from_seed(seed, n)
    V = unitary_from_seed(seed + 1, n)
    two_step = tc.conjugate_frame(tc.conjugate_frame(T, U), V)
    np.testing.assert_allclose(two_step.entries, tc.conjugate_frame(T, V @ U).entries, atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(seed=seeds, n=dims)
def test_conjugation_preserves_invariants(seed, n):
    T = tensor_from_seed(seed, n)
    T2 = tc.conjugate_frame(T, unitary_from_seed(seed, n))
    assert tc.validate(T2, 1e-10) == []
    assert tc.scalar(T2) == pytest.approx(tc.scalar(T), abs=1e-9)
    np.testing.assert_allclose(np.linalg.eigvalsh(tc.ricci(T2)), np.linalg.eigvalsh(tc.ricci(T)), atol=1e-9)


def test_conjugated_bisectional_matches_rotated_vectors(rng):
    T = tc.random_tensor(rng, 3)
    U = tc.random_unitary(rng, 3)
    T2 = tc.conjugate_frame(T, U)
    e = np.eye(3)
    # the new basis vector e'_a has coordinates U[a, :]
    assert tc.evaluate_bisectional(T2, e[0], e[2]) == pytest.approx(
        tc.evaluate_bisectional(T, U[0], U[2]), abs=1e-12
    )


# ----------------------------------------------------------- ricci, scalar

def test_ricci_and_scalar_examples(frozen):
    np.testing.assert_allclose(tc.ricci(fubini_study(2, 4)), frozen["fs2_ricci"], atol=1e-14)
    assert tc.scalar(fubini_study(2, 4)) == frozen["fs2_scalar"]
    assert tc.scalar(example_1_2(2)) == frozen["example2_scalar"]
    assert not tc.ricci(flat(3)).any() and tc.scalar(flat(3)) == 0


def test_ricci_of_product_is_block_diagonal(rng):
    A, B = tc.random_tensor(rng, 2), tc.random_tensor(rng, 3)
    Ric = tc.ricci(product(A, B))
    np.testing.assert_allclose(Ric[:2, :2], tc.ricci(A), atol=1e-14)
    np.testing.assert_allclose(Ric[2:, 2:], tc.ricci(B), atol=1e-14)
    assert not Ric[:2, 2:].any()


@settings(max_examples=20, deadline=None)
@given(seed=seeds, n=dims)
def test_ricci_hermitian(seed, n):
    Ric = tc.ricci(tensor_from_seed(seed, n))
    np.testing.assert_allclose(Ric, Ric.conj().T, atol=1e-12)


# ----------------------------------------------------------------- realify

def test_realify_symmetries_and_identity(rng):
    for _ in range(50):
        n = int(rng.integers(1, 4))
        T = tc.random_tensor(rng, n)
        Rr = tc.realify(T)
        assert max(tc.validate_real(Rr).values()) <= 1e-10
        for i in range(n):
            for j in range(n):
                if i != j:
                    u_i, Ju_i = np.eye(2 * n)[i], np.eye(2 * n)[n + i]
                    u_j, Ju_j = np.eye(2 * n)[j], np.eye(2 * n)[n + j]
                    val = Rr.evaluate(u_i, Ju_i, Ju_j, u_j)
                    assert val == pytest.approx(T.entries[i, i, j, j].real, abs=1e-10)


def test_realify_fubini_study_sectional_range(rng):
    Rr = tc.realify(fubini_study(3, 4))
    vals = []
    for _ in range(2000):
        u, v = rng.standard_normal((2, 6))
        vals.append(Rr.sectional(u, v))
    vals = np.array(vals)
    assert vals.min() >= 1 - 1e-10 and vals.max() <= 4 + 1e-10
    # the extremes are attained by totally real and complex planes
    J = Rr.complex_structure
    u = rng.standard_normal(6)
    assert Rr.sectional(u, J @ u) == pytest.approx(4.0)
    assert Rr.sectional(np.eye(6)[0], np.eye(6)[1]) == pytest.approx(1.0)


def test_realify_flat_is_zero():
    assert not tc.realify(flat(2)).entries.any()


def test_realify_commutes_with_frame_change(rng):
    T = tc.random_tensor(rng, 3)
    U = tc.random_unitary(rng, 3)
    lhs = tc.realify(tc.conjugate_frame(T, U))
    rhs = tc.conjugate_real(tc.realify(T), tc.real_rotation(U))
    np.testing.assert_allclose(lhs.entries, rhs.entries, atol=1e-10)


def test_complex_structure_is_isometry_of_realified_tensor(rng):
    Rr = tc.realify(tc.random_tensor(rng, 2))
    J = Rr.complex_structure
    np.testing.assert_allclose(tc.conjugate_real(Rr, J).entries, Rr.entries, atol=1e-12)


def test_orthonormal_two_frame_check():
    f = tc.OrthonormalTwoFrame(np.array([1, 0]), np.array([0, 1j]))
    assert f.check() is f
    with pytest.raises(PreconditionError):
        tc.OrthonormalTwoFrame(np.array([1, 0]), np.array([1, 1])).check()
