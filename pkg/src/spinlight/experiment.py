"""Monte Carlo measurement cycles and entanglement statistics.

One cycle: prepare both canonical atomic pair modes in vacuum, probe each
with a fresh light mode (QND coupling sqrt(kappa2) followed by an X homodyne,
outcomes a1/b1), decohere the atoms with survival amplitude beta, probe again
(a2/b2).  The sampler exploits that the whole cycle is linear-Gaussian:

    a1 = l1 + kappa p,      a2 = l2 + kappa (beta p + sqrt(1-beta^2) w),

with l1, l2, p, w independent N(0, 1/2) per channel, which is exactly the
joint outcome distribution produced by sequential Gaussian conditioning.
The symplectic engine provides the independent deterministic route for the
same quantities (see engine_conditioned_duan); the two are cross-checked in
the test suite rather than sharing code.

Cycles are simulated in fixed-size chunks whose generators derive from the
master seed and the chunk index, so any degree of parallelism produces
byte-identical results.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from . import gaussian
from .physics import kappa2_experimental

#: Cycles simulated per RNG stream; fixed so parallel scheduling cannot
#: change the output.
CYCLE_CHUNK = 4096


class CalibrationError(RuntimeError):
    """First-pulse noise is inconsistent with shot + projection noise."""


@dataclass(frozen=True)
class CycleRecord:
    """Outcomes of one measurement cycle (canonical units)."""

    a1: float
    b1: float
    a2: float
    b2: float


class CycleSet:
    """Column store of cycle outcomes; iterates as CycleRecord values."""

    __slots__ = ("a1", "b1", "a2", "b2")

    def __init__(self, a1: np.ndarray, b1: np.ndarray, a2: np.ndarray, b2: np.ndarray):
        self.a1, self.b1, self.a2, self.b2 = (np.asarray(v, float) for v in (a1, b1, a2, b2))

    def __len__(self) -> int:
        return self.a1.size

    def __getitem__(self, i: int) -> CycleRecord:
        return CycleRecord(float(self.a1[i]), float(self.b1[i]),
                           float(self.a2[i]), float(self.b2[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


Records = Union[CycleSet, Iterable[CycleRecord]]


def _columns(records: Records) -> CycleSet:
    if isinstance(records, CycleSet):
        return records
    rows = list(records)
    return CycleSet(np.array([r.a1 for r in rows]), np.array([r.b1 for r in rows]),
                    np.array([r.a2 for r in rows]), np.array([r.b2 for r in rows]))


@dataclass(frozen=True)
class CycleStats:
    """Summary statistics and the entanglement verdict of a cycle ensemble."""

    n: int
    var1: float
    var2: float
    alpha_star: float
    cond_var: float
    atomic_var_inferred: float
    entangled: bool
    kappa2: float
    beta: float
    calibration_ok: bool


@dataclass(frozen=True)
class SweepRow:
    """One atomic-density point of a projection-noise / entanglement sweep.

    Noise columns are shot-subtracted and shot-normalized; theory columns are
    given in the same presentation (conditional variance minus the shot
    unit).  The *_ideal columns are the no-decoherence (beta = 1) overlay.
    """

    theta_deg: float
    kappa2: float
    pn1: float
    pn2: float
    cond_var_minus_shot: float
    alpha_star: float
    theory_cond: float
    theory_alpha: float
    theory_cond_ideal: float
    theory_alpha_ideal: float


def _simulate_chunk(kappa2: float, beta: float, seed: int, chunk: int,
                    count: int, electronics_std: float) -> np.ndarray:
    """Simulate `count` cycles of chunk index `chunk`; returns (count, 4)."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))
    kappa = np.sqrt(kappa2)
    z = np.sqrt(0.5) * rng.standard_normal((count, 8))
    elec = rng.standard_normal((count, 4))  # drawn even when unused: stream stability
    p_a, p_b = z[:, 0], z[:, 1]
    l1a, l1b, w_a, w_b, l2a, l2b = z[:, 2], z[:, 3], z[:, 4], z[:, 5], z[:, 6], z[:, 7]

    decay = np.sqrt(1.0 - beta**2)
    p_a2 = beta * p_a + decay * w_a
    p_b2 = beta * p_b + decay * w_b
    out = np.empty((count, 4))
    out[:, 0] = l1a + kappa * p_a
    out[:, 1] = l1b + kappa * p_b
    out[:, 2] = l2a + kappa * p_a2
    out[:, 3] = l2b + kappa * p_b2
    if electronics_std > 0.0:
        out += electronics_std * elec
    return out


def run_cycles(kappa2: float, beta: float, n_cycles: int, seed: int,
               parallel: int = 1, electronics_std: float = 0.0) -> CycleSet:
    """Simulate the two-pulse measurement cycle n_cycles times.

    Deterministic for a given seed at every parallelism level: chunk results
    are computed from per-chunk generators and concatenated in chunk order.
    """
    if kappa2 < 0:
        raise ValueError("kappa2 must be >= 0")
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    if n_cycles < 1:
        raise ValueError("n_cycles must be positive")

    chunks = [(c, start, min(CYCLE_CHUNK, n_cycles - start))
              for c, start in enumerate(range(0, n_cycles, CYCLE_CHUNK))]
    if parallel > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            parts = list(pool.map(
                _simulate_chunk,
                [kappa2] * len(chunks), [beta] * len(chunks), [seed] * len(chunks),
                [c for c, _, _ in chunks], [m for _, _, m in chunks],
                [electronics_std] * len(chunks)))
    else:
        parts = [_simulate_chunk(kappa2, beta, seed, c, m, electronics_std)
                 for c, _, m in chunks]
    data = np.vstack(parts)
    return CycleSet(data[:, 0], data[:, 1], data[:, 2], data[:, 3])


def optimal_alpha(records: Records) -> float:
    """Closed-form minimizer of the pooled conditional variance.

    alpha* = sum(a1 a2 + b1 b2) / sum(a1^2 + b1^2): one weight shared by both
    lock-in channels.  Degenerate data (all first-pulse outcomes zero) gives
    0 with a warning.
    """
    cols = _columns(records)
    if len(cols) < 2:
        raise ValueError("need at least two cycles")
    denom = float(np.dot(cols.a1, cols.a1) + np.dot(cols.b1, cols.b1))
    if denom == 0.0:
        warnings.warn("degenerate cycle data: first-pulse outcomes are all zero",
                      RuntimeWarning, stacklevel=2)
        return 0.0
    num = float(np.dot(cols.a1, cols.a2) + np.dot(cols.b1, cols.b2))
    return num / denom


def per_channel_alphas(records: Records) -> tuple[float, float]:
    """Diagnostic per-channel weights (the production path pools channels)."""
    cols = _columns(records)
    alpha_a = float(np.dot(cols.a1, cols.a2) / np.dot(cols.a1, cols.a1))
    alpha_b = float(np.dot(cols.b1, cols.b2) / np.dot(cols.b1, cols.b1))
    return alpha_a, alpha_b


def conditional_variance(records: Records, alpha: float) -> float:
    """(1/(N-1)) sum((a2 - alpha a1)^2 + (b2 - alpha b1)^2)."""
    cols = _columns(records)
    n = len(cols)
    if n < 2:
        raise ValueError("need at least two cycles")
    res_a = cols.a2 - alpha * cols.a1
    res_b = cols.b2 - alpha * cols.b1
    return float((np.dot(res_a, res_a) + np.dot(res_b, res_b)) / (n - 1))


def theory_curves(kappa2: float, beta: float) -> tuple[float, float]:
    """Model conditional variance and weight for given coupling and decay.

    cond_var = 1 + kappa^2 (1 + (1 - beta^2) kappa^2) / (1 + kappa^2),
    alpha    = beta kappa^2 / (1 + kappa^2); beta = 1 recovers the ideal case.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    cond = 1.0 + kappa2 * (1.0 + (1.0 - beta**2) * kappa2) / (1.0 + kappa2)
    alpha = beta * kappa2 / (1.0 + kappa2)
    return cond, alpha


def cycle_stats(records: Records, kappa2: float, beta: float) -> CycleStats:
    """Estimate variances, the optimal weight, and the entanglement verdict.

    Pulse variances are raw second moments over N-1: outcomes have zero mean
    by construction and this matches the conditional-variance normalization,
    so cond_var <= var2 + var1 alpha*^2 holds identically.
    """
    cols = _columns(records)
    n = len(cols)
    var1 = float((np.dot(cols.a1, cols.a1) + np.dot(cols.b1, cols.b1)) / (n - 1))
    var2 = float((np.dot(cols.a2, cols.a2) + np.dot(cols.b2, cols.b2)) / (n - 1))
    alpha = optimal_alpha(cols)
    cond = conditional_variance(cols, alpha)
    bound = 1.0 + kappa2
    atomic = (cond - 1.0) / kappa2 if kappa2 > 0 else float("nan")
    # first pulse must look quantum-noise limited: var1 = 1 + kappa^2 to 5 sigma
    se_var1 = bound / np.sqrt(max(n - 1, 1))
    calibration_ok = abs(var1 - bound) <= 5.0 * se_var1
    return CycleStats(n=n, var1=var1, var2=var2, alpha_star=alpha, cond_var=cond,
                      atomic_var_inferred=atomic, entangled=bool(cond < bound),
                      kappa2=kappa2, beta=beta, calibration_ok=calibration_ok)


def entanglement_verdict(stats: CycleStats) -> bool:
    """True iff the conditional variance beats the separable bound 1 + kappa^2.

    Refuses to rule when the first-pulse noise fails the projection-noise
    calibration check (the bound is only meaningful for quantum-noise-limited
    input pulses).
    """
    if not stats.calibration_ok:
        raise CalibrationError(
            f"var1 = {stats.var1:.4f} deviates from 1 + kappa^2 = "
            f"{1.0 + stats.kappa2:.4f} by more than 5 standard errors")
    return stats.entangled


def duan_spin_check(varsum_y: float, varsum_z: float, j_x: float) -> bool:
    """Spin-unit entanglement check: Var(Jy1+Jy2) + Var(Jz1+Jz2) < 2 Jx."""
    if j_x <= 0:
        raise ValueError("j_x must be positive")
    return bool(varsum_y + varsum_z < 2.0 * j_x)


def engine_conditioned_duan(kappa2: float, beta: float) -> float:
    """Deterministic route to the post-measurement atomic variance sum.

    Runs the measurement cycle through the symplectic engine (probe, homodyne,
    decay) and reads duan_sum off the conditioned covariance, which does not
    depend on the sampled outcomes.
    """
    rng = np.random.default_rng(0)  # outcomes do not affect the covariance
    kappa = float(np.sqrt(kappa2))
    state = gaussian.vacuum_state(2, ["pair_a", "pair_b"])
    for mode in ("pair_a", "pair_b"):
        state = gaussian.add_vacuum_modes(state, ["probe"])
        state = gaussian.apply_qnd(state, mode, "probe", kappa)
        _, state = gaussian.measure_x(state, "probe", rng)
        state = gaussian.apply_beta_decay(state, mode, beta)
    return gaussian.duan_sum(state, "pair_a", "pair_b")


def density_sweep(theta_list: Sequence[float], beta: float, n_cycles: int,
                  seed: int, parallel: int = 1,
                  electronics_std: float = 0.0) -> list[SweepRow]:
    """Scan atomic density via the Faraday angle; kappa^2 = 0.10 theta per point.

    Emits shot-subtracted noise columns plus the decoherence-model and ideal
    overlays.  Electronics noise, when enabled, is subtracted as the same
    kappa = 0 floor that a measurement would see.
    """
    if len(theta_list) == 0:
        raise ValueError("theta grid must be nonempty")
    row_seeds = np.random.SeedSequence(seed).generate_state(len(theta_list), np.uint64)
    floor = 1.0 + 2.0 * electronics_std**2
    rows = []
    for theta, row_seed in zip(theta_list, row_seeds):
        if theta < 0:
            raise ValueError("theta values must be >= 0")
        kappa2 = kappa2_experimental(theta)
        records = run_cycles(kappa2, beta, n_cycles, int(row_seed),
                             parallel=parallel, electronics_std=electronics_std)
        stats = cycle_stats(records, kappa2, beta)
        cond_model, alpha_model = theory_curves(kappa2, beta)
        cond_ideal, alpha_ideal = theory_curves(kappa2, 1.0)
        rows.append(SweepRow(
            theta_deg=float(theta), kappa2=kappa2,
            pn1=stats.var1 - floor, pn2=stats.var2 - floor,
            cond_var_minus_shot=stats.cond_var - floor,
            alpha_star=stats.alpha_star,
            theory_cond=cond_model - 1.0, theory_alpha=alpha_model,
            theory_cond_ideal=cond_ideal - 1.0, theory_alpha_ideal=alpha_ideal))
    return rows


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_cycles_csv(records: Records, path: str) -> None:
    """cycle_index, a1, b1, a2, b2 with round-trip-exact reals."""
    cols = _columns(records)
    with open(path, "w", newline="") as fh:
        fh.write("cycle_index,a1,b1,a2,b2\n")
        for i in range(len(cols)):
            fh.write(f"{i},{_fmt(cols.a1[i])},{_fmt(cols.b1[i])},"
                     f"{_fmt(cols.a2[i])},{_fmt(cols.b2[i])}\n")


def write_sweep_csv(rows: Sequence[SweepRow], path: str) -> None:
    """SweepRow columns in declared order."""
    fields = ["theta_deg", "kappa2", "pn1", "pn2", "cond_var_minus_shot",
              "alpha_star", "theory_cond", "theory_alpha",
              "theory_cond_ideal", "theory_alpha_ideal"]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(fields) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(getattr(row, f)) for f in fields) + "\n")


def summary_text(stats: CycleStats) -> str:
    """Flat key-value block describing one run."""
    lines = [
        f"n = {stats.n}",
        f"kappa2 = {_fmt(stats.kappa2)}",
        f"beta = {_fmt(stats.beta)}",
        f"var1 = {_fmt(stats.var1)}",
        f"var2 = {_fmt(stats.var2)}",
        f"alpha_star = {_fmt(stats.alpha_star)}",
        f"cond_var = {_fmt(stats.cond_var)}",
        f"atomic_var = {_fmt(stats.atomic_var_inferred)}",
        f"entangled = {'true' if stats.entangled else 'false'}",
    ]
    return "\n".join(lines) + "\n"
