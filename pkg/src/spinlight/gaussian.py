"""Exact Gaussian-state engine over labeled quadrature modes.

States are value objects: every operation returns a new state and never
mutates its input, so states can be fanned out across parallel workers
freely.  Conventions: mode-major quadrature ordering (X0, P0, X1, P1, ...),
[X, P] = i, vacuum variance 1/2 on every quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

ModeRef = Union[int, str]

#: Variance of each quadrature of the vacuum state.
VACUUM_VAR = 0.5


class InvariantViolation(RuntimeError):
    """A state failed a physicality check (symmetry / uncertainty relation)."""


@dataclass(frozen=True)
class GaussianState:
    """Mean vector and covariance matrix over an ordered list of modes.

    Attributes:
        labels: mode identifiers; mode k owns quadratures (2k, 2k+1) = (X, P).
        mean:   real vector of length 2n.
        cov:    real symmetric (2n, 2n) matrix.
    """

    labels: tuple[str, ...]
    mean: np.ndarray = field(repr=False)
    cov: np.ndarray = field(repr=False)

    @property
    def n_modes(self) -> int:
        return len(self.labels)

    def index(self, mode: ModeRef) -> int:
        """Resolve a mode given either its position or its label."""
        if isinstance(mode, str):
            try:
                return self.labels.index(mode)
            except ValueError:
                raise ValueError(f"unknown mode label {mode!r}") from None
        idx = int(mode)
        if not 0 <= idx < self.n_modes:
            raise ValueError(f"mode index {idx} out of range for {self.n_modes} modes")
        return idx

    def x_index(self, mode: ModeRef) -> int:
        return 2 * self.index(mode)

    def p_index(self, mode: ModeRef) -> int:
        return 2 * self.index(mode) + 1

    def mode_mean(self, mode: ModeRef) -> tuple[float, float]:
        i = self.x_index(mode)
        return float(self.mean[i]), float(self.mean[i + 1])

    def mode_cov(self, mode: ModeRef) -> np.ndarray:
        i = self.x_index(mode)
        return self.cov[i:i + 2, i:i + 2].copy()

    def variance(self, mode: ModeRef, quadrature: str) -> float:
        q = self.x_index(mode) if quadrature.lower() == "x" else self.p_index(mode)
        return float(self.cov[q, q])


@dataclass(frozen=True)
class MeasurementOutcome:
    """One homodyne result in canonical units."""

    value: float
    mode: str
    quadrature: str = "x"


def _new_state(labels: Sequence[str], mean: np.ndarray, cov: np.ndarray) -> GaussianState:
    cov = 0.5 * (cov + cov.T)  # keep exactly symmetric after every update
    return GaussianState(tuple(labels), np.asarray(mean, float), cov)


def _auto_labels(n: int, start: int = 0) -> list[str]:
    return [f"m{start + k}" for k in range(n)]


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal form Omega with [[0, 1], [-1, 0]] per mode."""
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        omega[2 * k, 2 * k + 1] = 1.0
        omega[2 * k + 1, 2 * k] = -1.0
    return omega


def vacuum_state(n_modes: int, labels: Sequence[str] | None = None) -> GaussianState:
    """n-mode vacuum: zero mean, covariance (1/2) * identity."""
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    if labels is None:
        labels = _auto_labels(n_modes)
    elif len(labels) != n_modes:
        raise ValueError("labels length must equal n_modes")
    return _new_state(labels, np.zeros(2 * n_modes), VACUUM_VAR * np.eye(2 * n_modes))


def add_vacuum_modes(state: GaussianState, labels: Sequence[str]) -> GaussianState:
    """Tensor fresh vacuum modes onto the state (appended at the end)."""
    k = len(labels)
    if k == 0:
        return state
    n = state.n_modes
    mean = np.concatenate([state.mean, np.zeros(2 * k)])
    cov = VACUUM_VAR * np.eye(2 * (n + k))
    cov[: 2 * n, : 2 * n] = state.cov
    return _new_state(list(state.labels) + list(labels), mean, cov)


def displace(state: GaussianState, mode: ModeRef, dx: float, dp: float) -> GaussianState:
    """Shift the mode mean by (dx, dp); covariance is unchanged."""
    i = state.x_index(mode)
    mean = state.mean.copy()
    mean[i] += dx
    mean[i + 1] += dp
    return _new_state(state.labels, mean, state.cov.copy())


def apply_symplectic(state: GaussianState, smat: np.ndarray,
                     modes: Sequence[ModeRef]) -> GaussianState:
    """Apply a symplectic matrix to the quadratures of the listed modes.

    ``smat`` is (2k, 2k) acting on the concatenated (X, P) pairs of ``modes``
    in the given order.  Raises if the matrix is not symplectic to 1e-10.
    """
    idx = []
    for m in modes:
        i = state.x_index(m)
        idx.extend((i, i + 1))
    idx = np.asarray(idx)
    k = len(modes)
    smat = np.asarray(smat, float)
    if smat.shape != (2 * k, 2 * k):
        raise ValueError("symplectic matrix shape does not match mode count")
    omega = symplectic_form(k)
    # tolerance scales with ||S||^2: that is the size of the rounding noise
    # in S Omega S^T for strongly squeezing maps
    scale = max(1.0, float(np.abs(smat).max()) ** 2)
    if not np.allclose(smat @ omega @ smat.T, omega, atol=1e-10 * scale, rtol=0.0):
        raise ValueError("matrix is not symplectic")

    full = np.eye(2 * state.n_modes)
    full[np.ix_(idx, idx)] = smat
    mean = full @ state.mean
    cov = full @ state.cov @ full.T
    return _new_state(state.labels, mean, cov)


def apply_qnd(state: GaussianState, atom: ModeRef, light: ModeRef,
              kappa: float) -> GaussianState:
    """QND coupling: X_light += kappa * P_atom and X_atom += kappa * P_light.

    Both P quadratures are conserved; the map is symplectic for any kappa.
    """
    ia, il = state.index(atom), state.index(light)
    if ia == il:
        raise ValueError("atom and light must be distinct modes")
    smat = np.eye(4)
    # order (X_a, P_a, X_l, P_l)
    smat[0, 3] = kappa  # X_a += kappa P_l
    smat[2, 1] = kappa  # X_l += kappa P_a
    return apply_symplectic(state, smat, [ia, il])


def measure_x(state: GaussianState, mode: ModeRef,
              rng: np.random.Generator) -> tuple[MeasurementOutcome, GaussianState]:
    """Homodyne the X quadrature of a mode and remove that mode.

    The outcome is drawn from the Gaussian marginal; the remaining modes are
    conditioned with the standard linear-update / Schur-complement rule, so
    the post-measurement covariance depends only on the prior covariance.
    A degenerate (zero-variance) marginal yields the exact outcome and a
    deterministic update.
    """
    im = state.index(mode)
    xq = 2 * im
    keep = [q for q in range(2 * state.n_modes) if q not in (xq, xq + 1)]
    var_m = float(state.cov[xq, xq])
    mu_m = float(state.mean[xq])
    round_off = 1e-12 * max(1.0, float(np.max(np.abs(state.cov))))
    if var_m < -round_off:
        raise InvariantViolation("negative marginal variance")
    var_m = max(var_m, 0.0)

    if var_m > 0:
        value = float(rng.normal(mu_m, np.sqrt(var_m)))
        gain = state.cov[keep, xq] / var_m
    else:
        value = mu_m
        gain = np.zeros(len(keep))

    mean = state.mean[keep] + gain * (value - mu_m)
    cov = state.cov[np.ix_(keep, keep)] - np.outer(gain, state.cov[xq, keep])
    labels = [lab for k, lab in enumerate(state.labels) if k != im]
    return (MeasurementOutcome(value, state.labels[im], "x"),
            _new_state(labels, mean, cov))


def apply_beta_decay(state: GaussianState, mode: ModeRef, beta: float) -> GaussianState:
    """Partial decay of one mode toward vacuum with survival amplitude beta.

    mean -> beta * mean on the mode; its covariance block -> beta^2 * block
    + (1 - beta^2) * vacuum; cross-covariances scale by beta.  beta = 1 is a
    no-op, beta = 0 resets the mode to vacuum.  Applied to both quadratures
    (trace-preserving Gaussian admixture channel).
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    i = state.x_index(mode)
    sel = [i, i + 1]
    mean = state.mean.copy()
    cov = state.cov.copy()
    mean[sel] *= beta
    cov[sel, :] *= beta
    cov[:, sel] *= beta
    # the block got beta^2; add the vacuum admixture
    cov[np.ix_(sel, sel)] += (1.0 - beta**2) * VACUUM_VAR * np.eye(2)
    return _new_state(state.labels, mean, cov)


def rotate(state: GaussianState, mode: ModeRef, phi: float) -> GaussianState:
    """Phase-space rotation: X' = X cos(phi) + P sin(phi), P' = -X sin(phi) + P cos(phi)."""
    c, s = np.cos(phi), np.sin(phi)
    return apply_symplectic(state, np.array([[c, s], [-s, c]]), [mode])


def two_mode_squeeze(state: GaussianState, mode_a: ModeRef, mode_b: ModeRef,
                     r: float) -> GaussianState:
    """Two-mode squeezing by r: (P_a - P_b) and (X_a + X_b) shrink by e^-r.

    The conjugate combinations (P_a + P_b) and (X_a - X_b) stretch by e^r,
    so the map is symplectic and the output is pure for pure input.
    """
    ch, sh = np.cosh(r), np.sinh(r)
    smat = np.array([
        [ch, 0.0, -sh, 0.0],
        [0.0, ch, 0.0, sh],
        [-sh, 0.0, ch, 0.0],
        [0.0, sh, 0.0, ch],
    ])
    return apply_symplectic(state, smat, [mode_a, mode_b])


def duan_sum(state: GaussianState, mode_a: ModeRef, mode_b: ModeRef) -> float:
    """var(P_a) + var(P_b); below 1 certifies two-mode entanglement."""
    ia, ib = state.index(mode_a), state.index(mode_b)
    if ia == ib:
        raise ValueError("modes must be distinct")
    return float(state.cov[2 * ia + 1, 2 * ia + 1] + state.cov[2 * ib + 1, 2 * ib + 1])


def coherent_fidelity(state: GaussianState, mode: ModeRef,
                      target_x: float, target_p: float) -> float:
    """Overlap of one reduced mode with the pure coherent state at (x, p).

    F = det(Sigma + I/2)^(-1/2) * exp(-delta^T (Sigma + I/2)^(-1) delta / 2);
    equals 1 iff the mode is exactly that coherent state.
    """
    sigma = state.mode_cov(mode) + VACUUM_VAR * np.eye(2)
    mx, mp = state.mode_mean(mode)
    delta = np.array([mx - target_x, mp - target_p])
    det = float(np.linalg.det(sigma))
    if det <= 0:
        raise InvariantViolation("unphysical reduced covariance")
    return float(np.exp(-0.5 * delta @ np.linalg.solve(sigma, delta)) / np.sqrt(det))


def symplectic_eigenvalues(state: GaussianState) -> np.ndarray:
    """Sorted symplectic spectrum of the covariance; >= 1/2 for physical states."""
    omega = symplectic_form(state.n_modes)
    ev = np.abs(np.linalg.eigvals(1j * omega @ state.cov))
    return np.sort(ev)[::2]  # each value appears twice; keep one copy, ascending


def validate(state: GaussianState, atol: float = 1e-10) -> None:
    """Assert symmetry and the uncertainty relation; raise InvariantViolation.

    This is a diagnostic hook: operations never auto-correct a failing state.
    """
    asym = np.max(np.abs(state.cov - state.cov.T))
    scale = max(1.0, float(np.max(np.abs(state.cov))))
    if asym > 1e-12 * scale:
        raise InvariantViolation(f"covariance asymmetry {asym:.3e}")
    nu_min = float(symplectic_eigenvalues(state)[0])
    if nu_min < VACUUM_VAR - atol:
        raise InvariantViolation(f"symplectic eigenvalue {nu_min} below 1/2")
