"""Mean-field inference: window mechanics, CAVI properties, and oracles."""

import numpy as np
import pytest

from ancs import inference as inf


def _window_from(reports):
    reports = np.asarray(reports)
    win = inf.ObservationWindow(reports.shape[1], capacity=len(reports))
    for row in reports:
        win.push(row)
    return win


# ---------------------------------------------------------------------------
# Observation window


def test_window_counts_and_eviction():
    win = inf.ObservationWindow(3, capacity=2)
    win.push([1, 0, 1])
    assert win.obs_count == 1
    assert np.array_equal(win.ones_count, [1, 0, 1])
    win.push([1, 1, 0])
    assert np.array_equal(win.ones_count, [2, 1, 1])
    win.push([0, 0, 0])  # evicts the first report
    assert win.obs_count == 2
    assert np.array_equal(win.ones_count, [1, 1, 0])


def test_window_shape_and_param_validation():
    with pytest.raises(ValueError):
        inf.ObservationWindow(0, capacity=1)
    with pytest.raises(ValueError):
        inf.ObservationWindow(3, capacity=0)
    win = inf.ObservationWindow(3, capacity=2)
    with pytest.raises(ValueError):
        win.push([1, 0])


def test_window_clear():
    win = _window_from([[1, 1], [0, 1]])
    win.clear()
    assert win.obs_count == 0
    assert np.array_equal(win.ones_count, [0, 0])


# ---------------------------------------------------------------------------
# Priors and degenerate inference


def test_priors_validated():
    with pytest.raises(ValueError):
        inf.PriorHyperParams.uniform(3, b1=0.0)
    with pytest.raises(ValueError):
        inf.PriorHyperParams.uniform(3, beta0=-1.0)
    with pytest.raises(ValueError):
        inf.PriorHyperParams(b1=1.0, b0=1.0, beta1=np.ones(2), beta0=np.ones(3))


def test_empty_window_returns_prior_state():
    priors = inf.PriorHyperParams.uniform(4)
    win = inf.ObservationWindow(4, capacity=5)
    result = inf.infer(win, priors)
    assert result.sweeps == 0
    assert result.converged
    assert np.allclose(result.posterior.cbar(), 0.5)
    assert np.allclose(result.posterior.tau, 0.75)  # reliability prior mean 3/4
    assert result.posterior.bhat1 == priors.b1
    assert result.posterior.bhat0 == priors.b0


def test_infer_validates_arguments():
    priors = inf.PriorHyperParams.uniform(4)
    win = inf.ObservationWindow(4, capacity=5)
    with pytest.raises(ValueError):
        inf.infer(win, priors, max_iter=0)
    with pytest.raises(ValueError):
        inf.infer(win, priors, tol=0.0)
    with pytest.raises(ValueError):
        inf.infer(inf.ObservationWindow(3, capacity=5), priors)


# ---------------------------------------------------------------------------
# Update algebra


def test_update_c_count_conservation():
    # The pseudo-count mass added to each coefficient's Beta factor equals the
    # number of observations, however the reliability splits it.
    rng = np.random.default_rng(0)
    priors = inf.PriorHyperParams.uniform(6, beta1=1.3, beta0=0.7)
    a = rng.integers(0, 6, size=6)
    tau = rng.random(6)
    b1, b0 = inf.update_c(a, 5, tau, priors)
    added = (b1 - priors.beta1) + (b0 - priors.beta0)
    assert np.allclose(added, 5.0)


def test_update_c_trusted_reports_add_raw_counts():
    priors = inf.PriorHyperParams.uniform(3)
    b1, b0 = inf.update_c(np.array([4, 0, 2]), 5, np.ones(3), priors)
    assert np.array_equal(b1, [5.0, 1.0, 3.0])
    assert np.array_equal(b0, [2.0, 6.0, 4.0])


def test_update_r_sums_responsibilities():
    bhat1, bhat0 = inf.update_r(np.array([0.25, 0.75, 1.0]), 3.0, 1.0)
    assert bhat1 == pytest.approx(5.0)
    assert bhat0 == pytest.approx(2.0)


def test_full_sweep_complement_duality():
    # With a symmetric importance prior, complementing every report flips the
    # importance posterior (cbar -> 1 - cbar) and leaves the reliability
    # posterior untouched: the model cannot tell "reliable reports of ROI"
    # from "reliable reports of non-ROI" apart through c.
    rng = np.random.default_rng(8)
    reports = (rng.random((4, 12)) < 0.4).astype(int)
    priors = inf.PriorHyperParams.uniform(12, b1=3.0, b0=1.0, beta1=1.0, beta0=1.0)
    res = inf.infer(_window_from(reports), priors, max_iter=60)
    res_c = inf.infer(_window_from(1 - reports), priors, max_iter=60)
    assert np.allclose(res.posterior.cbar() + res_c.posterior.cbar(), 1.0, atol=1e-9)
    assert np.allclose(res.posterior.tau, res_c.posterior.tau, atol=1e-9)
    assert res.posterior.bhat1 == pytest.approx(res_c.posterior.bhat1, abs=1e-9)


def test_unanimous_reports_hit_window_ceiling():
    # W identical positive reports with beta=(1,1) can push cbar no higher
    # than (1+W)/(2+W); trustful tau -> 1 attains it.
    priors = inf.PriorHyperParams.uniform(8)
    reports = np.tile(np.array([1, 1, 1, 1, 0, 0, 0, 0]), (5, 1))
    res = inf.infer(_window_from(reports), priors, max_iter=60)
    cbar = res.posterior.cbar()
    assert np.all(res.posterior.tau > 0.99)
    assert np.allclose(cbar[:4], 6.0 / 7.0, atol=1e-3)
    assert np.allclose(cbar[4:], 1.0 / 7.0, atol=1e-3)


# ---------------------------------------------------------------------------
# ELBO


def test_elbo_monotone_under_coordinate_ascent():
    rng = np.random.default_rng(123)
    for _ in range(25):
        reports = (rng.random((5, 20)) < rng.uniform(0.1, 0.9)).astype(int)
        win = _window_from(reports)
        priors = inf.PriorHyperParams.uniform(20)
        res = inf.infer(win, priors, max_iter=40, record_elbo=True)
        trace = np.array(res.elbo_trace)
        assert trace.size >= 2
        assert np.all(np.diff(trace) >= -1e-9)


def test_elbo_improves_over_initialization():
    rng = np.random.default_rng(5)
    reports = (rng.random((5, 10)) < 0.3).astype(int)
    win = _window_from(reports)
    priors = inf.PriorHyperParams.uniform(10)
    res = inf.infer(win, priors, record_elbo=True)
    assert res.elbo_trace[-1] > res.elbo_trace[0]


def test_convergence_flag_and_sweep_cap():
    rng = np.random.default_rng(9)
    reports = (rng.random((5, 30)) < 0.2).astype(int)
    res = inf.infer(_window_from(reports), inf.PriorHyperParams.uniform(30), max_iter=40)
    assert res.converged
    assert 1 <= res.sweeps <= 40
    capped = inf.infer(_window_from(reports), inf.PriorHyperParams.uniform(30), max_iter=1)
    assert capped.sweeps == 1


def test_infer_is_deterministic():
    reports = np.array([[1, 0, 1], [0, 0, 1]])
    priors = inf.PriorHyperParams.uniform(3)
    a = inf.infer(_window_from(reports), priors)
    b = inf.infer(_window_from(reports), priors)
    assert np.array_equal(a.posterior.cbar(), b.posterior.cbar())
    assert np.array_equal(a.posterior.tau, b.posterior.tau)


# ---------------------------------------------------------------------------
# Oracles


def _cavi_fixed_point(win, priors, sweeps=500):
    """Iterate the coordinate updates to stationarity.

    The production stopping rule watches cbar only (that is what drives the
    sensing step), and on reports that are symmetric under the ROI/non-ROI
    relabeling cbar is frozen at 0.5 while tau and the reliability posterior
    are still moving. Oracle comparisons need the true fixed point, so this
    helper just sweeps a fixed large number of times.
    """
    state = inf.PosteriorState(
        bhat1=priors.b1,
        bhat0=priors.b0,
        betahat1=priors.beta1.copy(),
        betahat0=priors.beta0.copy(),
        tau=np.full(priors.n, priors.r_mean),
    )
    a, w = win.ones_count, win.obs_count
    for _ in range(sweeps):
        state.betahat1, state.betahat0 = inf.update_c(a, w, state.tau, priors)
        state.tau = inf.update_u(a, w, state.betahat1, state.betahat0, state.bhat1, state.bhat0)
        state.bhat1, state.bhat0 = inf.update_r(state.tau, priors.b1, priors.b0)
    return state


def _elbo_of_params(theta, win, priors):
    n = priors.n
    state = inf.PosteriorState(
        bhat1=np.exp(theta[0]),
        bhat0=np.exp(theta[1]),
        betahat1=np.exp(theta[2 : 2 + n]),
        betahat0=np.exp(theta[2 + n : 2 + 2 * n]),
        tau=1.0 / (1.0 + np.exp(-theta[2 + 2 * n :])),
    )
    return inf.elbo(win, state, priors)


def _numeric_elbo_argmax(win, priors, seed):
    """Exhaustive (multistart quasi-Newton) maximization over the mean-field
    family, log/logit-parametrized so the search is unconstrained."""
    from scipy.optimize import minimize

    rng = np.random.default_rng(seed)
    n = priors.n
    best, best_val = None, -np.inf
    for _ in range(12):
        theta0 = rng.normal(0.0, 1.5, size=2 + 3 * n)
        out = minimize(
            lambda th: -_elbo_of_params(th, win, priors),
            theta0,
            method="L-BFGS-B",
            options={"maxiter": 2000, "ftol": 1e-15, "gtol": 1e-12},
        )
        if -out.fun > best_val:
            best_val, best = -out.fun, out.x
    state = inf.PosteriorState(
        bhat1=np.exp(best[0]),
        bhat0=np.exp(best[1]),
        betahat1=np.exp(best[2 : 2 + n]),
        betahat0=np.exp(best[2 + n : 2 + 2 * n]),
        tau=1.0 / (1.0 + np.exp(-best[2 + 2 * n :])),
    )
    return state, best_val


def test_cavi_matches_numeric_elbo_maximum_small_instance():
    rng = np.random.default_rng(77)
    for seed in range(3):
        n, w = 2, 2
        reports = (rng.random((w, n)) < 0.5).astype(int)
        win = _window_from(reports)
        priors = inf.PriorHyperParams.uniform(n, b1=3.0, b0=1.0)
        state = _cavi_fixed_point(win, priors)
        oracle_state, oracle_val = _numeric_elbo_argmax(win, priors, seed)
        cavi_val = inf.elbo(win, state, priors)
        # The fixed point attains the family-wide maximum...
        assert cavi_val >= oracle_val - 1e-6
        # ...and the maximizing moments agree.
        assert np.allclose(inf.expected_importance(state), oracle_state.cbar(), atol=1e-3)
        assert np.allclose(state.tau, oracle_state.tau, atol=1e-3)


def test_single_report_tracks_exact_posterior_mean():
    # Exact Bayes for N=1, W=1, alpha=1 under priors r~Beta(3,1), c~Beta(1,1):
    # p(alpha=1|c) = E_r[r c + (1-r)(1-c)] = 1/4 + c/2, so the posterior mean
    # of c is (integrate) 7/12. Mean-field keeps the coupling only through
    # point moments, but must land near the exact answer and on the correct
    # side of 1/2.
    from scipy.integrate import quad

    norm = quad(lambda c: 0.25 + 0.5 * c, 0.0, 1.0)[0]
    exact = quad(lambda c: c * (0.25 + 0.5 * c), 0.0, 1.0)[0] / norm
    assert exact == pytest.approx(7.0 / 12.0, abs=1e-12)

    priors = inf.PriorHyperParams.uniform(1, b1=3.0, b0=1.0)
    win = inf.ObservationWindow(1, capacity=1).push([1])
    res = inf.infer(win, priors, max_iter=100, tol=1e-12)
    cbar = float(res.posterior.cbar()[0])
    assert cbar > 0.5
    assert abs(cbar - exact) < 0.08


def test_posterior_to_dict_is_json_ready():
    import json

    reports = np.array([[1, 0, 1]])
    res = inf.infer(_window_from(reports), inf.PriorHyperParams.uniform(3))
    blob = json.dumps(res.posterior.to_dict())
    assert "cbar" in blob
