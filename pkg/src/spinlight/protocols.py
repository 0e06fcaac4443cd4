"""Quantum-information protocols built on the Gaussian engine.

All three protocols track individual vapour cells as canonical modes.  A
probe pulse through two oppositely oriented cells couples two decoupled
light channels (cos/sin lock-in components) to the pair combinations

    cos channel: reads (p_i - p_j)/sqrt2, back-acts on x_i - x_j,
    sin channel: reads (x_i + x_j)/sqrt2, back-acts on p_i + p_j,

which is the same interaction the two-cell experiment uses, expressed in
per-cell variables.  Feedback displacements are classical: they move means
and never covariances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussian import (
    GaussianState,
    add_vacuum_modes,
    apply_qnd,
    apply_symplectic,
    coherent_fidelity,
    displace,
    measure_x,
    rotate,
    two_mode_squeeze,
    vacuum_state,
)


@dataclass(frozen=True)
class ProtocolResult:
    """Diagnostics of a protocol ensemble run.

    When per-run recording is requested, ``runs`` holds one row per run with
    the outcomes and applied displacements named by ``run_columns``.
    """

    n_runs: int
    mean_fidelity: float | None = None
    duan_sum_out: float | None = None
    mean_displacement_error: tuple[float, float] = (0.0, 0.0)
    runs: np.ndarray | None = None
    run_columns: tuple[str, ...] = ()


def _pair_pulse_matrix(kappa: float) -> np.ndarray:
    """Symplectic map of one pulse through an oppositely oriented cell pair.

    Quadrature order: (x_+, p_+, x_-, p_-, X_cos, P_cos, X_sin, P_sin).
    """
    g = kappa / np.sqrt(2.0)
    smat = np.eye(8)
    smat[4, 1] += g   # X_cos <- p_+
    smat[4, 3] -= g   # X_cos <- -p_-
    smat[0, 5] += g   # x_+ <- P_cos
    smat[2, 5] -= g   # x_- <- -P_cos
    smat[6, 0] += g   # X_sin <- x_+
    smat[6, 2] += g   # X_sin <- x_-
    smat[1, 7] -= g   # p_+ <- -P_sin
    smat[3, 7] -= g   # p_- <- -P_sin
    return smat


def entangling_pulse(state: GaussianState, cell_plus: str, cell_minus: str,
                     kappa: float, rng: np.random.Generator) -> tuple[float, float, GaussianState]:
    """Send one pulse through a cell pair and homodyne both lock-in channels.

    Returns the cos-channel and sin-channel outcomes; the light modes are
    consumed by the measurement.
    """
    state = add_vacuum_modes(state, ["_pulse_cos", "_pulse_sin"])
    state = apply_symplectic(state, _pair_pulse_matrix(kappa),
                             [cell_plus, cell_minus, "_pulse_cos", "_pulse_sin"])
    out_cos, state = measure_x(state, "_pulse_cos", rng)
    out_sin, state = measure_x(state, "_pulse_sin", rng)
    return out_cos.value, out_sin.value, state


def _pair_sum_variances(state: GaussianState, cell_plus: str, cell_minus: str) -> float:
    """var((p_+ - p_-)/sqrt2) + var((x_+ + x_-)/sqrt2) for an opposite pair."""
    cov = state.cov
    xp, pp = state.x_index(cell_plus), state.p_index(cell_plus)
    xm, pm = state.x_index(cell_minus), state.p_index(cell_minus)
    var_p = 0.5 * (cov[pp, pp] + cov[pm, pm] - 2.0 * cov[pp, pm])
    var_x = 0.5 * (cov[xp, xp] + cov[xm, xm] + 2.0 * cov[xp, xm])
    return float(var_p + var_x)


def _pair_sum_means(state: GaussianState, cell_plus: str, cell_minus: str) -> tuple[float, float]:
    mxp, mpp = state.mode_mean(cell_plus)
    mxm, mpm = state.mode_mean(cell_minus)
    return (mxp + mxm) / np.sqrt(2.0), (mpp - mpm) / np.sqrt(2.0)


def _run_seeds(seed: int, n_runs: int):
    for run in range(n_runs):
        yield np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(run,)))


def teleport_spin_state(input_disp: tuple[float, float], kappa2: float,
                        gain: float = 1.0, n_runs: int = 400,
                        seed: int = 0, record_runs: bool = False) -> ProtocolResult:
    """Teleport a displaced-vacuum spin state from cell 3 onto cell 2.

    Cells 1 and 2 are entangled by a first pulse (outcomes A1, B1); a second
    pulse through cells 1 and 3 reads the unknown state (A2, B2); cell 2 is
    then displaced by gain * sqrt2/kappa * (A1 - A2) on p and
    gain * sqrt2/kappa * (B2 - B1) on x.  At unity gain the input mean
    transfers exactly for every kappa and the added noise shrinks as 2/kappa^2.
    """
    if kappa2 < 0 or gain < 0:
        raise ValueError("kappa2 and gain must be >= 0")
    dx, dp = float(input_disp[0]), float(input_disp[1])
    kappa = float(np.sqrt(kappa2))
    coeff = gain * np.sqrt(2.0) / kappa if kappa > 0 else 0.0

    fidelities = np.empty(n_runs)
    err = np.zeros(2)
    rows = np.empty((n_runs, 7)) if record_runs else None
    for i, rng in enumerate(_run_seeds(seed, n_runs)):
        state = vacuum_state(3, ["cell1", "cell2", "cell3"])
        state = displace(state, "cell3", dx, dp)
        a1, b1, state = entangling_pulse(state, "cell1", "cell2", kappa, rng)
        a2, b2, state = entangling_pulse(state, "cell1", "cell3", kappa, rng)
        disp_x, disp_p = coeff * (b2 - b1), coeff * (a1 - a2)
        state = displace(state, "cell2", disp_x, disp_p)
        fidelities[i] = coherent_fidelity(state, "cell2", dx, dp)
        mx, mp = state.mode_mean("cell2")
        err += (mx - dx, mp - dp)
        if rows is not None:
            rows[i] = (a1, b1, a2, b2, disp_x, disp_p, fidelities[i])
    return ProtocolResult(n_runs=n_runs, mean_fidelity=float(fidelities.mean()),
                          mean_displacement_error=(err[0] / n_runs, err[1] / n_runs),
                          runs=rows,
                          run_columns=("a1", "b1", "a2", "b2", "disp_x", "disp_p",
                                       "fidelity") if record_runs else ())


def entanglement_swap(kappa2: float, n_runs: int = 100, seed: int = 0,
                      record_runs: bool = False) -> ProtocolResult:
    """Entangle cells 2 and 4, which never interact, via cells 1 and 3.

    Pairs (1,2) and (3,4) are entangled first; a pulse through Alice's cells
    (1,3) plus a displacement of cell 2 computed from all outcomes leaves the
    (2,4) pair two-mode squeezed.  duan_sum_out is read off the conditioned
    covariance and is therefore outcome-independent; entangled iff < 1.
    """
    if kappa2 < 0:
        raise ValueError("kappa2 must be >= 0")
    kappa = float(np.sqrt(kappa2))
    coeff = np.sqrt(2.0) / kappa if kappa > 0 else 0.0

    duan_out = 1.0
    err = np.zeros(2)
    rows = np.empty((n_runs, 8)) if record_runs else None
    for i, rng in enumerate(_run_seeds(seed, n_runs)):
        state = vacuum_state(4, ["cell1", "cell2", "cell3", "cell4"])
        a1, b1, state = entangling_pulse(state, "cell1", "cell2", kappa, rng)
        a1p, b1p, state = entangling_pulse(state, "cell4", "cell3", kappa, rng)
        a2, b2, state = entangling_pulse(state, "cell1", "cell3", kappa, rng)
        disp_x, disp_p = coeff * (b2 - b1 - b1p), -coeff * (a2 - a1 - a1p)
        state = displace(state, "cell2", disp_x, disp_p)
        duan_out = _pair_sum_variances(state, "cell4", "cell2")
        mean_x, mean_p = _pair_sum_means(state, "cell4", "cell2")
        err += (mean_x, mean_p)
        if rows is not None:
            rows[i] = (a1, b1, a1p, b1p, a2, b2, disp_x, disp_p)
    return ProtocolResult(n_runs=n_runs, duan_sum_out=float(duan_out),
                          mean_displacement_error=(err[0] / n_runs, err[1] / n_runs),
                          runs=rows,
                          run_columns=("a1", "b1", "a1_prime", "b1_prime", "a2", "b2",
                                       "disp_x", "disp_p") if record_runs else ())


def quantum_memory(light_disp: tuple[float, float], resource_squeeze_r: float,
                   kappa2_readout: float, n_runs: int = 400,
                   seed: int = 0, record_runs: bool = False) -> ProtocolResult:
    """Store an unknown light state in an atomic pair via an EPR resource.

    The resource is a two-mode squeezed pair (squeezing r) approximating the
    ideal zero-sum spin state.  The input pulse writes its X onto the atoms
    through a unit-coupling probe + homodyne + feedback; after a 90 degree
    rotation of cell 1's transverse spins, a strong readout pulse
    (kappa2_readout) + feedback stores the light's P.  With an ideal resource
    the atomic contributions cancel and the stored mean equals the input mean.
    """
    if resource_squeeze_r < 0 or kappa2_readout < 0:
        raise ValueError("squeeze parameter and readout coupling must be >= 0")
    lx, lp = float(light_disp[0]), float(light_disp[1])
    kappa_r = float(np.sqrt(kappa2_readout))
    read_gain = -1.0 / kappa_r if kappa_r > 0 else 0.0

    fidelities = np.empty(n_runs)
    err = np.zeros(2)
    rows = np.empty((n_runs, 5)) if record_runs else None
    for i, rng in enumerate(_run_seeds(seed, n_runs)):
        state = vacuum_state(3, ["light", "mem1", "mem2"])
        state = displace(state, "light", lx, lp)
        state = two_mode_squeeze(state, "mem1", "mem2", resource_squeeze_r)

        # write: the input pulse probes cell 1, X-homodyne, feedback onto p2
        state = apply_qnd(state, "mem1", "light", 1.0)
        m1, state = measure_x(state, "light", rng)
        state = displace(state, "mem2", 0.0, -m1.value)

        # move the stored P_light component into the readout quadrature
        state = rotate(state, "mem1", np.pi / 2.0)
        state = add_vacuum_modes(state, ["readout"])
        state = apply_qnd(state, "mem1", "readout", kappa_r)
        m2, state = measure_x(state, "readout", rng)
        state = displace(state, "mem2", read_gain * m2.value, 0.0)

        # the logical stored mode is (-p2, x2): undo the quadrature exchange
        state = rotate(state, "mem2", -np.pi / 2.0)
        fidelities[i] = coherent_fidelity(state, "mem2", lx, lp)
        mx, mp = state.mode_mean("mem2")
        err += (mx - lx, mp - lp)
        if rows is not None:
            rows[i] = (m1.value, m2.value, -m1.value, read_gain * m2.value,
                       fidelities[i])
    return ProtocolResult(n_runs=n_runs, mean_fidelity=float(fidelities.mean()),
                          mean_displacement_error=(err[0] / n_runs, err[1] / n_runs),
                          runs=rows,
                          run_columns=("m_write", "m_readout", "disp_p_write",
                                       "disp_x_read", "fidelity") if record_runs else ())
