import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_force_expansion, brute_force_solve
from smkaf.exceptions import DimensionError
from smkaf.kernel_filters import KAPA2, KLMS, SMKAP, SMNKLMS, Dictionary, kernel_predict
from smkaf.kernels import KernelSpec


def snapshot(f):
    d = f.dictionary_
    extra = [list(getattr(f, a)) for a in ("window_targets_", "window_fitted_") if hasattr(f, a)]
    return d.centers.copy(), d.coefficients.copy(), extra


def assert_same_state(a, b):
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])
    assert a[2] == b[2]


def random_stream(rng, n, scale=0.5):
    return rng.normal(scale=scale, size=(n, 7)), rng.normal(size=n)


# -- dictionary and prediction ------------------------------------------------

def test_predict_empty_dictionary():
    assert kernel_predict(Dictionary(7), np.ones(7)) == 0.0


def test_predict_single_center():
    d = Dictionary(3)
    c = np.array([0.1, 0.2, 0.3])
    d.append(c, 0.5)
    assert kernel_predict(d, c, KernelSpec()) == 0.5


def test_predict_matches_term_by_term_oracle(rng):
    for _ in range(20):
        d = Dictionary(7)
        centers, coefs = rng.normal(size=(3, 7)), rng.normal(size=3)
        for c, a in zip(centers, coefs):
            d.append(c, a)
        x = rng.normal(size=7)
        assert abs(kernel_predict(d, x) - brute_force_expansion(centers, coefs, x)) < 1e-12


def test_predict_dimension_mismatch():
    d = Dictionary(3)
    d.append(np.zeros(3), 1.0)
    with pytest.raises(DimensionError):
        kernel_predict(d, np.zeros(4))


def test_dictionary_growth_beyond_capacity(rng):
    d = Dictionary(2, capacity=2)
    pts = rng.normal(size=(9, 2))
    for i, p in enumerate(pts):
        d.append(p, float(i))
    assert len(d) == 9
    np.testing.assert_array_equal(d.centers, pts)
    np.testing.assert_array_equal(d.coefficients, np.arange(9.0))
    np.testing.assert_array_equal(d.tail(3), pts[[8, 7, 6]])
    d.add_to_tail(np.array([10.0, 20.0]))
    assert d.coefficients[8] == 18.0 and d.coefficients[7] == 27.0


def test_prediction_linear_in_coefficients(rng):
    centers = rng.normal(size=(6, 7))
    a, b = rng.normal(size=6), rng.normal(size=6)
    dicts = [Dictionary(7) for _ in range(3)]
    for c, ai, bi in zip(centers, a, b):
        dicts[0].append(c, ai + bi)
        dicts[1].append(c, ai)
        dicts[2].append(c, bi)
    x = rng.normal(size=7)
    lhs = kernel_predict(dicts[0], x)
    assert abs(lhs - kernel_predict(dicts[1], x) - kernel_predict(dicts[2], x)) < 1e-12


def test_to_records_roundtrip(rng):
    f = KLMS().fit(*random_stream(rng, 5))
    rows = f.dictionary_.to_records(f.kernel_)
    assert len(rows) == 5
    assert rows[0]["bandwidth"] == 1.0 and rows[0]["family"] == "gaussian"
    np.testing.assert_array_equal([r["x_3"] for r in rows], f.dictionary_.centers[:, 2])


# -- KLMS ------------------------------------------------------------------------

def test_klms_grows_every_step(rng):
    f = KLMS()
    X, y = random_stream(rng, 100)
    for i, (x, d) in enumerate(zip(X, y), start=1):
        out = f.step(x, d)
        assert out.updated and out.dictionary_size == i
    assert f.dictionary_size == 100


def test_klms_zero_stream(rng):
    f = KLMS().fit(rng.normal(size=(20, 7)), np.zeros(20))
    np.testing.assert_array_equal(f.dictionary_.coefficients, 0.0)
    np.testing.assert_array_equal(f.predict(rng.normal(size=(5, 7))), 0.0)


def test_klms_single_step_coefficient():
    f = KLMS(step_size=0.05)
    f.step(np.zeros(7), 1.0)
    assert f.dictionary_.coefficients[0] == pytest.approx(0.05)


# -- SM-NKLMS --------------------------------------------------------------------

def test_fresh_filter_size_zero():
    assert SMNKLMS().dictionary_size == 0


def test_sm_nklms_gated_step():
    f = SMNKLMS(gamma=0.5)
    f.step(np.zeros(7), 2.0)
    before = snapshot(f)
    out = f.step(np.zeros(7), f.predict(np.zeros((1, 7)))[0] + 0.4)
    assert not out.updated and out.step_used == 0.0
    assert_same_state(before, snapshot(f))


def test_sm_nklms_step_size_half():
    gamma = 0.1
    out = SMNKLMS(gamma=gamma).step(np.ones(7), 2 * gamma)
    assert out.step_used == pytest.approx(0.5)


def test_sm_nklms_pins_a_posteriori_error(rng):
    gamma = 0.2
    f = SMNKLMS(gamma=gamma, epsilon=0.0)
    X, y = random_stream(rng, 300)
    fired = 0
    for x, d in zip(X, y):
        out = f.step(x, d)
        if out.updated:
            fired += 1
            post = d - kernel_predict(f.dictionary_, x, f.kernel_)
            assert abs(abs(post) - gamma) < 1e-10
            assert np.sign(post) == np.sign(out.prior_error)
    assert fired > 50


def test_sm_nklms_gamma_zero_is_unit_step_nklms(rng):
    f = SMNKLMS(gamma=0.0, epsilon=0.0)
    X, y = random_stream(rng, 30)
    for x, d in zip(X, y):
        out = f.step(x, d)
        assert out.step_used == 1.0
        assert abs(d - kernel_predict(f.dictionary_, x)) < 1e-12


def test_sm_nklms_zero_error_skips_update():
    f = SMNKLMS(gamma=0.0)
    out = f.step(np.ones(7), 0.0)
    assert not out.updated and f.dictionary_size == 0


def test_sm_nklms_size_counts_updates(rng):
    f = SMNKLMS(gamma=0.5)
    X, y = random_stream(rng, 100)
    fired = sum(f.step(x, d).step_used > 0 for x, d in zip(X, y))
    assert f.dictionary_size == fired == f.n_updates_


# -- SM-KAP ----------------------------------------------------------------------

def test_sm_kap_k1_matches_sm_nklms(rng):
    X, y = random_stream(rng, 300)
    a, b = SMKAP(gamma=0.3, K=1), SMNKLMS(gamma=0.3)
    for x, d in zip(X, y):
        oa, ob = a.step(x, d), b.step(x, d)
        assert abs(oa.prediction - ob.prediction) < 1e-12
        assert oa.dictionary_size == ob.dictionary_size
    np.testing.assert_allclose(a.dictionary_.coefficients, b.dictionary_.coefficients, atol=1e-12, rtol=0)


def test_sm_kap_gated_step(rng):
    f = SMKAP(gamma=0.5, K=3)
    X, y = random_stream(rng, 20)
    f.fit(X, y)
    x = rng.normal(size=7)
    before = snapshot(f)
    out = f.step(x, f.predict(x[None])[0] + 0.49)
    assert not out.updated
    assert_same_state(before, snapshot(f))


@pytest.mark.parametrize("K", [2, 3, 7])
def test_sm_kap_pins_newest_error(K, rng):
    gamma = 0.1
    f = SMKAP(gamma=gamma, K=K, epsilon=0.0)
    X, y = random_stream(rng, 200)
    for x, d in zip(X, y):
        window = f.dictionary_.tail(K - 1).copy() if f.dictionary_size else np.empty((0, 7))
        before = [kernel_predict(f.dictionary_, w) for w in window] if len(window) else []
        out = f.step(x, d)
        if out.updated:
            post = d - kernel_predict(f.dictionary_, x)
            assert abs(post - gamma * np.sign(out.prior_error)) < 1e-8
            # the other window members keep their fitted values
            after = [kernel_predict(f.dictionary_, w) for w in window]
            np.testing.assert_allclose(after, before, atol=1e-8)


def test_sm_kap_window_skips_gated_steps(rng):
    f = SMKAP(gamma=0.3, K=3)
    X, y = random_stream(rng, 60)
    updated_inputs = [x for x, d in zip(X, y) if f.step(x, d).updated]
    np.testing.assert_array_equal(f.dictionary_.tail(2), np.array(updated_inputs[::-1][:2]))


# -- KAPA-2 ----------------------------------------------------------------------

def test_kapa2_k1_normalized_klms():
    f = KAPA2(step_size=0.3, K=1, epsilon=0.1)
    f.step(np.zeros(7), 2.0)
    assert f.dictionary_.coefficients[0] == pytest.approx(0.3 * 2.0 / 1.1)


def test_kapa2_zero_error_appends_zero():
    f = KAPA2(K=3)
    f.step(np.zeros(7), 0.0)
    f.step(np.ones(7), 0.0)
    assert f.dictionary_size == 2
    np.testing.assert_array_equal(f.dictionary_.coefficients, 0.0)


def test_kapa2_corrections_match_dense_oracle(rng):
    mu, eps, K = 0.4, 1e-3, 3
    f = KAPA2(step_size=mu, K=K, epsilon=eps)
    X, y = random_stream(rng, 40)
    for t, (x, d) in enumerate(zip(X, y)):
        centers = f.dictionary_.centers.copy() if f.dictionary_size else np.empty((0, 7))
        coefs = f.dictionary_.coefficients.copy() if f.dictionary_size else np.empty(0)
        # window: current pair first, then the K-1 previous pairs, newest first
        idx = list(range(t - 1, max(t - K, -1), -1))
        wx = [x] + [X[j] for j in idx]
        wd = [d] + [y[j] for j in idx]
        errs = [dj - brute_force_expansion(centers, coefs, xj) for xj, dj in zip(wx, wd)]
        G = [[math.exp(-sum((a - b) ** 2 for a, b in zip(xi, xj)) / 2) + (eps if i == j else 0.0)
              for j, xj in enumerate(wx)] for i, xi in enumerate(wx)]
        corr = mu * brute_force_solve(G, errs)
        expected = np.append(coefs, corr[0])
        for k, j in enumerate(idx, start=1):
            expected[j] += corr[k]
        f.step(x, d)
        np.testing.assert_allclose(f.dictionary_.coefficients, expected, atol=1e-10, rtol=0)


# -- shared invariants -------------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["sm-nklms", "sm-kap"]), st.floats(0.05, 1.0), st.integers(1, 7),
       st.integers(0, 2**31 - 1))
def test_sm_gating_and_step_range(kind, gamma, K, seed):
    rng = np.random.default_rng(seed)
    f = SMNKLMS(gamma=gamma) if kind == "sm-nklms" else SMKAP(gamma=gamma, K=K)
    X, y = random_stream(rng, 150)
    last = 0
    for i, (x, d) in enumerate(zip(X, y), start=1):
        before = snapshot(f) if f.dictionary_size else None
        out = f.step(x, d)
        if abs(out.prior_error) <= gamma:
            assert not out.updated and out.step_used == 0.0
            if before is not None:
                assert_same_state(before, snapshot(f))
        else:
            assert 0.0 < out.step_used < 1.0 and out.grew
        assert out.grew == (out.step_used > 0)
        assert last <= out.dictionary_size <= i
        last = out.dictionary_size


@pytest.mark.parametrize("cls", [KLMS, SMNKLMS, KAPA2, SMKAP])
def test_dimension_mismatch(cls, rng):
    f = cls()
    f.step(rng.normal(size=7), 1.0)
    with pytest.raises(DimensionError):
        f.step(rng.normal(size=5), 1.0)
    with pytest.raises(DimensionError):
        f.predict(rng.normal(size=(2, 5)))


@pytest.mark.parametrize("est", [KLMS(step_size=0), SMNKLMS(gamma=-0.1), KAPA2(K=0), SMKAP(epsilon=-1),
                                 KLMS(bandwidth=0.0), SMKAP(convention="wide")])
def test_invalid_params_rejected(est):
    with pytest.raises(ValueError):
        est.fit(np.zeros((2, 3)), np.zeros(2))
