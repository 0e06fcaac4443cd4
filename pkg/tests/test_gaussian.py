"""Gaussian engine: state preparation, QND coupling, homodyne conditioning."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linear_oracle import conditioned_atom_cov, qnd_output_cov

from spinlight.gaussian import (
    GaussianState,
    InvariantViolation,
    add_vacuum_modes,
    apply_beta_decay,
    apply_qnd,
    apply_symplectic,
    coherent_fidelity,
    displace,
    duan_sum,
    measure_x,
    rotate,
    symplectic_eigenvalues,
    symplectic_form,
    two_mode_squeeze,
    vacuum_state,
    validate,
)

KAPPA_GRID = [0.1, 0.5, 1.0, 2.0, 10.0]


class TestVacuum:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_mean_and_cov(self, n):
        state = vacuum_state(n)
        assert np.array_equal(state.mean, np.zeros(2 * n))
        assert np.array_equal(state.cov, 0.5 * np.eye(2 * n))

    def test_symplectic_spectrum_is_half(self):
        state = vacuum_state(3)
        assert np.allclose(symplectic_eigenvalues(state), 0.5, atol=1e-12)

    def test_zero_modes_rejected(self):
        with pytest.raises(ValueError):
            vacuum_state(0)

    def test_labels(self):
        state = vacuum_state(2, ["atom", "light"])
        assert state.index("light") == 1
        with pytest.raises(ValueError):
            state.index("missing")
        with pytest.raises(ValueError):
            state.index(5)


class TestDisplace:
    def test_zero_shift_is_identity(self):
        state = vacuum_state(1)
        shifted = displace(state, 0, 0.0, 0.0)
        assert np.array_equal(shifted.mean, state.mean)
        assert np.array_equal(shifted.cov, state.cov)

    def test_shifts_mean_only(self):
        shifted = displace(vacuum_state(1), 0, 1.0, 0.0)
        assert np.array_equal(shifted.mean, [1.0, 0.0])
        assert np.array_equal(shifted.cov, 0.5 * np.eye(2))

    def test_inverse_restores_state(self):
        state = displace(vacuum_state(2), 1, 0.7, -1.3)
        state = displace(state, 1, -0.7, 1.3)
        assert np.allclose(state.mean, 0.0, atol=1e-15)


class TestQnd:
    def test_kappa_zero_is_identity(self):
        state = vacuum_state(2)
        out = apply_qnd(state, 0, 1, 0.0)
        assert np.array_equal(out.cov, state.cov)

    def test_kappa_one_matches_matrix_oracle(self):
        out = apply_qnd(vacuum_state(2, ["atom", "light"]), "atom", "light", 1.0)
        assert np.allclose(out.cov, qnd_output_cov(1.0), atol=1e-14)
        assert out.variance("light", "x") == pytest.approx(1.0)
        assert out.variance("atom", "x") == pytest.approx(1.0)
        assert out.variance("atom", "p") == pytest.approx(0.5)
        # cov(X_l, P_a)
        assert out.cov[out.x_index("light"), out.p_index("atom")] == pytest.approx(0.5)

    @pytest.mark.parametrize("kappa", KAPPA_GRID)
    def test_minimum_uncertainty_after_measurement(self, kappa):
        state = apply_qnd(vacuum_state(2, ["atom", "light"]), "atom", "light", kappa)
        _, post = measure_x(state, "light", np.random.default_rng(0))
        product = post.variance("atom", "x") * post.variance("atom", "p")
        assert product == pytest.approx(0.25, abs=1e-10)

    def test_same_mode_rejected(self):
        with pytest.raises(ValueError):
            apply_qnd(vacuum_state(2), 1, 1, 1.0)

    @pytest.mark.parametrize("kappa", KAPPA_GRID)
    def test_map_is_symplectic(self, kappa):
        smat = np.eye(4)
        smat[2, 1] = kappa
        smat[0, 3] = kappa
        omega = symplectic_form(2)
        assert np.allclose(smat @ omega @ smat.T, omega, atol=1e-12)

    @given(st.floats(min_value=0.0, max_value=50.0, allow_nan=False))
    @settings(max_examples=50, deadline=None)
    def test_symplectic_for_any_kappa(self, kappa):
        out = apply_qnd(vacuum_state(2), 0, 1, kappa)
        # purity: symplectic map keeps the vacuum spectrum at 1/2
        assert np.allclose(symplectic_eigenvalues(out), 0.5,
                           atol=1e-10 * max(1.0, kappa**2))


class TestMeasure:
    def test_uncorrelated_mode_left_in_vacuum(self):
        rng = np.random.default_rng(3)
        _, post = measure_x(vacuum_state(2), 0, rng)
        assert post.n_modes == 1
        assert np.array_equal(post.cov, 0.5 * np.eye(2))
        assert np.array_equal(post.mean, np.zeros(2))

    def test_outcome_variance_matches_marginal(self):
        rng = np.random.default_rng(5)
        n = 20_000
        values = np.array([measure_x(vacuum_state(1), 0, rng)[0].value
                           for _ in range(n)])
        sample = np.var(values, ddof=1)
        assert abs(sample - 0.5) <= 5.0 * np.sqrt(2.0 / n) * 0.5

    def test_conditional_atom_variance_kappa_one(self):
        state = apply_qnd(vacuum_state(2, ["atom", "light"]), "atom", "light", 1.0)
        _, post = measure_x(state, "light", np.random.default_rng(1))
        assert post.variance("atom", "p") == pytest.approx(0.25, abs=1e-12)
        # two such pairs: sum = 1/2 = 1/(1 + kappa^2)
        assert 2 * post.variance("atom", "p") == pytest.approx(0.5, abs=1e-12)

    def test_conditional_variance_kappa_two_schur_oracle(self):
        state = apply_qnd(vacuum_state(2, ["atom", "light"]), "atom", "light", 2.0)
        _, post = measure_x(state, "light", np.random.default_rng(1))
        assert post.variance("atom", "p") == pytest.approx(0.1, abs=1e-12)
        assert np.allclose(post.mode_cov("atom"), conditioned_atom_cov(2.0), atol=1e-12)

    def test_conditioning_is_outcome_independent(self):
        state = apply_qnd(vacuum_state(2), 0, 1, 1.3)
        rng = np.random.default_rng(11)
        covs = {measure_x(state, 1, rng)[1].cov.tobytes() for _ in range(1000)}
        assert len(covs) == 1

    @pytest.mark.parametrize("kappa", KAPPA_GRID)
    def test_purity_preserved(self, kappa):
        state = apply_qnd(vacuum_state(2), 0, 1, kappa)
        _, post = measure_x(state, 1, np.random.default_rng(2))
        assert np.allclose(symplectic_eigenvalues(post), 0.5, atol=1e-10)

    def test_degenerate_marginal_is_deterministic(self):
        # X pinned at 0.75 with zero variance, P carrying the uncertainty
        state = GaussianState(("pin",), np.array([0.75, 0.0]),
                              np.diag([0.0, 13.0]))
        outcome, _ = measure_x(state, 0, np.random.default_rng(0))
        assert outcome.value == 0.75

    def test_conditional_mean_tracks_outcome(self):
        state = apply_qnd(vacuum_state(2, ["atom", "light"]), "atom", "light", 1.0)
        outcome, post = measure_x(state, "light", np.random.default_rng(9))
        # E[P_a | X_l = v] = v * kappa var(P_a) / var(X_l) = v / 2 at kappa = 1
        assert post.mode_mean("atom")[1] == pytest.approx(outcome.value / 2.0)


class TestBetaDecay:
    def test_beta_one_is_identity(self):
        state = apply_qnd(vacuum_state(2), 0, 1, 1.0)
        out = apply_beta_decay(state, 0, 1.0)
        assert np.allclose(out.cov, state.cov, atol=1e-15)

    def test_beta_zero_resets_to_vacuum(self):
        state = apply_qnd(vacuum_state(2), 0, 1, 1.5)
        out = apply_beta_decay(state, 0, 0.0)
        assert np.allclose(out.mode_cov(0), 0.5 * np.eye(2), atol=1e-15)
        # cross covariances vanish
        assert np.allclose(out.cov[:2, 2:], 0.0, atol=1e-15)

    def test_admixture_rule(self):
        # variance 1/4 decayed with beta = 0.65
        state = apply_qnd(vacuum_state(2, ["atom", "light"]), "atom", "light", 1.0)
        _, post = measure_x(state, "light", np.random.default_rng(1))
        out = apply_beta_decay(post, "atom", 0.65)
        expected = 0.65**2 * 0.25 + (1 - 0.65**2) * 0.5
        assert out.variance("atom", "p") == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.394375)

    @pytest.mark.parametrize("beta", [-0.1, 1.1])
    def test_range_checked(self, beta):
        with pytest.raises(ValueError):
            apply_beta_decay(vacuum_state(1), 0, beta)

    def test_mean_scales(self):
        state = displace(vacuum_state(1), 0, 2.0, -4.0)
        out = apply_beta_decay(state, 0, 0.5)
        assert np.allclose(out.mean, [1.0, -2.0])

    def test_duan_sum_monotone_in_decay(self):
        base = _entangled_pair(1.0)
        sums = [duan_sum(apply_beta_decay(apply_beta_decay(base, "pair_a", b),
                                          "pair_b", b), "pair_a", "pair_b")
                for b in (1.0, 0.9, 0.65, 0.3, 0.0)]
        assert all(s2 >= s1 - 1e-12 for s1, s2 in zip(sums, sums[1:]))

    @given(st.floats(0.0, 1.0), st.floats(0.0, 5.0))
    @settings(max_examples=50, deadline=None)
    def test_channel_preserves_physicality(self, beta, kappa):
        # probe + homodyne + decay must never break the uncertainty relation
        state = apply_qnd(vacuum_state(2), 0, 1, kappa)
        _, state = measure_x(state, 1, np.random.default_rng(0))
        state = apply_beta_decay(state, 0, beta)
        validate(state, atol=1e-9)


def _entangled_pair(kappa: float) -> "GaussianState":
    state = vacuum_state(2, ["pair_a", "pair_b"])
    rng = np.random.default_rng(0)
    for mode in ("pair_a", "pair_b"):
        state = add_vacuum_modes(state, ["probe"])
        state = apply_qnd(state, mode, "probe", kappa)
        _, state = measure_x(state, "probe", rng)
    return state


class TestDuanSum:
    def test_vacuum_boundary(self):
        assert duan_sum(vacuum_state(2), 0, 1) == pytest.approx(1.0)

    def test_ideal_entangling_pulse(self):
        assert duan_sum(_entangled_pair(1.0), "pair_a", "pair_b") == pytest.approx(0.5, abs=1e-12)

    def test_paper_headline_point(self):
        state = _entangled_pair(np.sqrt(1.449))
        state = apply_beta_decay(state, "pair_a", 0.65)
        state = apply_beta_decay(state, "pair_b", 0.65)
        expected = (1 + (1 - 0.65**2) * 1.449) / (1 + 1.449)
        assert duan_sum(state, "pair_a", "pair_b") == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.75, abs=2e-5)

    def test_distinct_modes_required(self):
        with pytest.raises(ValueError):
            duan_sum(vacuum_state(2), 1, 1)


class TestHelpers:
    def test_two_mode_squeeze_duan(self):
        state = two_mode_squeeze(vacuum_state(2), 0, 1, 0.8)
        assert duan_sum(state, 0, 1) > 1.0  # individual P variances grow
        # but the pair combinations squeeze: var(p0 - p1) = e^(-2r)
        cov = state.cov
        var_diff = cov[1, 1] + cov[3, 3] - 2 * cov[1, 3]
        assert var_diff == pytest.approx(np.exp(-1.6), rel=1e-12)

    def test_rotation_exchanges_quadratures(self):
        state = displace(vacuum_state(1), 0, 1.0, 2.0)
        out = rotate(state, 0, np.pi / 2)
        assert np.allclose(out.mean, [2.0, -1.0])

    def test_apply_symplectic_rejects_non_symplectic(self):
        with pytest.raises(ValueError):
            apply_symplectic(vacuum_state(1), 2.0 * np.eye(2), [0])

    def test_coherent_fidelity_bounds(self):
        assert coherent_fidelity(vacuum_state(1), 0, 0.0, 0.0) == pytest.approx(1.0)
        displaced = displace(vacuum_state(1), 0, 1.0, 0.0)
        fid = coherent_fidelity(displaced, 0, 0.0, 0.0)
        assert fid == pytest.approx(np.exp(-0.5), rel=1e-12)

    def test_validate_flags_unphysical_state(self):
        bad = GaussianState(("m0",), np.zeros(2), 0.1 * np.eye(2))
        with pytest.raises(InvariantViolation):
            validate(bad)
        validate(vacuum_state(3))

    def test_add_vacuum_modes_keeps_block(self):
        state = apply_qnd(vacuum_state(2), 0, 1, 1.0)
        grown = add_vacuum_modes(state, ["extra"])
        assert grown.n_modes == 3
        assert np.array_equal(grown.cov[:4, :4], state.cov)
        assert np.array_equal(grown.cov[4:, 4:], 0.5 * np.eye(2))
