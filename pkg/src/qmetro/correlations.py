"""Photon-statistics correlation parameters and Fisher-information tools.

Covers the Mandel Q parameter, the two-mode number-correlation coefficient J,
quantum Fisher information for pure states under number-diagonal generators,
classical Fisher information of a measured probability curve, the usual
estimation benchmarks (Cramer-Rao, shot-noise and Heisenberg limits), and the
closed-form (Q, J, QFI) catalogue for the standard interferometer probe
states together with their exact Fock-space counterparts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from . import fock
from .fock import PureState

#: Outcomes with probability below this are skipped by the Fisher sum.
FISHER_PROBABILITY_FLOOR = 1e-12
#: Maximum norm deficit a state may carry into a QFI evaluation.
QFI_NORM_DEFICIT_LIMIT = 1e-6
#: Relative disagreement of the two half-step estimates that triggers
#: Richardson extrapolation in the finite-difference routines.
RICHARDSON_TRIGGER = 1e-4

GENERATORS = ("n", "n_diff", "half_n_diff")
SNL_CONVENTIONS = ("two-mode", "single-mode")


class UndefinedStatisticError(ValueError):
    """A statistic was requested where it is undefined (e.g. Q at <n> = 0)."""


def mandel_q(mean_n: float, var_n: float) -> float:
    """(Var n - <n>) / <n>: 0 for Poissonian light, -1 for a number state."""
    if mean_n <= 0:
        raise UndefinedStatisticError(f"Mandel Q undefined at mean photon number {mean_n!r}")
    return (var_n - mean_n) / mean_n


def mode_correlation(var_a: float, var_b: float, cov: float) -> float | None:
    """Cov[n_a, n_b] / (dn_a dn_b), or None when either variance vanishes."""
    if var_a <= 0 or var_b <= 0:
        return None
    return cov / math.sqrt(var_a * var_b)


@dataclass(frozen=True)
class ProbeStatistics:
    """Number statistics of a two-mode probe, plus its quantum Fisher information.

    ``j`` is None when either mode has zero number variance; ``qfi`` is the
    variance of the half photon-number difference times four, i.e. the pure
    state value for the interferometer generator (n_a - n_b)/2.
    """

    mean_n_a: float
    mean_n_b: float
    var_n_a: float
    var_n_b: float
    cov_nn: float
    q_a: float | None
    q_b: float | None
    j: float | None
    qfi: float

    def __post_init__(self) -> None:
        if self.var_n_a < -1e-10 or self.var_n_b < -1e-10:
            raise ValueError("negative number variance")
        if self.j is not None and abs(self.j) > 1.0 + 1e-10:
            raise ValueError(f"|J| = {abs(self.j)!r} violates the Cauchy-Schwarz bound")
        if self.qfi < -1e-10:
            raise ValueError(f"negative quantum Fisher information {self.qfi!r}")

    @property
    def n_bar(self) -> float:
        return self.mean_n_a + self.mean_n_b

    @classmethod
    def from_state(cls, state: PureState) -> "ProbeStatistics":
        if state.modes != 2:
            raise ValueError("probe statistics need a two-mode state")
        moments = fock.observable_moments(state)
        mean_a, mean_b = moments.mean_n
        var_a, var_b = moments.var_n
        cov = moments.cross_nn - mean_a * mean_b
        return cls(
            mean_n_a=mean_a,
            mean_n_b=mean_b,
            var_n_a=var_a,
            var_n_b=var_b,
            cov_nn=cov,
            q_a=mandel_q(mean_a, var_a) if mean_a > 0 else None,
            q_b=mandel_q(mean_b, var_b) if mean_b > 0 else None,
            j=mode_correlation(var_a, var_b, cov),
            qfi=var_a + var_b - 2.0 * cov,
        )


def probe_statistics(state: PureState) -> ProbeStatistics:
    return ProbeStatistics.from_state(state)


def pure_state_qfi(state: PureState, generator: str) -> float:
    """4 Var(G) for a number-diagonal generator G.

    ``generator``: ``n`` (one mode), ``n_diff`` = n_a - n_b, or
    ``half_n_diff`` = (n_a - n_b)/2 (the interferometer convention).
    """
    if generator not in GENERATORS:
        raise ValueError(f"unknown generator {generator!r}; pick one of {GENERATORS}")
    if state.norm_deficit > QFI_NORM_DEFICIT_LIMIT:
        raise ValueError(
            f"state norm deficit {state.norm_deficit:.3e} too large for a QFI evaluation"
        )
    weights = np.abs(state.amplitudes) ** 2
    n = np.arange(state.cutoff + 1, dtype=float)
    if generator == "n":
        if state.modes != 1:
            raise ValueError("generator 'n' needs a one-mode state")
        values = n
    else:
        if state.modes != 2:
            raise ValueError(f"generator {generator!r} needs a two-mode state")
        values = n[:, None] - n[None, :]
        if generator == "half_n_diff":
            values = 0.5 * values
    mean = float(np.sum(values * weights))
    mean_sq = float(np.sum(values**2 * weights))
    return 4.0 * (mean_sq - mean**2)


def path_symmetric_qfi(n_bar: float, q: float, j: float) -> float:
    """n_bar (1 + Q)(1 - J), the QFI of an arm-exchange-symmetric probe."""
    if q < -1.0:
        raise ValueError("Mandel Q cannot be below -1")
    if abs(j) > 1.0 + 1e-10:
        raise ValueError("|J| cannot exceed 1")
    return n_bar * (1.0 + q) * (1.0 - j)


# ---------------------------------------------------------------------------
# classical Fisher information and benchmarks
# ---------------------------------------------------------------------------


def _probability_stencil(
    prob_curve: Callable[[float], np.ndarray], phi: float, step: float
) -> dict[float, np.ndarray]:
    points = {}
    for x in (phi, phi + step, phi - step, phi + step / 2, phi - step / 2):
        p = np.asarray(prob_curve(x), dtype=float)
        if p.min() < -1e-14:
            raise ValueError(f"negative probability {p.min():.3e} at phi={x!r}")
        points[x] = np.clip(p, 0.0, None)
    sums = [p.sum() for p in points.values()]
    if max(sums) - min(sums) > 1e-8:
        raise ValueError(
            "probability curve does not conserve total probability over the stencil "
            f"(spread {max(sums) - min(sums):.3e})"
        )
    return points


def classical_fisher_information(
    prob_curve: Callable[[float], np.ndarray],
    phi: float,
    step: float = 1e-4,
    full_output: bool = False,
):
    """Fisher information sum_i (dp_i/dphi)^2 / p_i by central differences.

    Derivatives are estimated at ``step`` and ``step/2``; when the two
    estimates differ by more than ``RICHARDSON_TRIGGER`` relative, the
    Richardson combination (4 F_{h/2} - F_h)/3 of the derivative estimates is
    used.  Outcomes with probability below ``FISHER_PROBABILITY_FLOOR`` are
    skipped; their total mass is reported via ``full_output``.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    points = _probability_stencil(prob_curve, phi, step)
    p0 = points[phi]
    mask = p0 >= FISHER_PROBABILITY_FLOOR
    skipped_mass = float(p0[~mask].sum())

    d_h = (points[phi + step] - points[phi - step]) / (2.0 * step)
    d_h2 = (points[phi + step / 2] - points[phi - step / 2]) / step

    def fisher(d: np.ndarray) -> float:
        return float(np.sum(d[mask] ** 2 / p0[mask]))

    f_h, f_h2 = fisher(d_h), fisher(d_h2)
    refined = abs(f_h - f_h2) > RICHARDSON_TRIGGER * max(abs(f_h2), 1e-300)
    value = fisher((4.0 * d_h2 - d_h) / 3.0) if refined else f_h2
    if full_output:
        return value, {
            "skipped_mass": skipped_mass,
            "skipped_count": int(np.sum(~mask)),
            "refined": refined,
        }
    return value


def cramer_rao_bound(fisher_information: float) -> float:
    """Phase-error floor 1/sqrt(F)."""
    if fisher_information <= 0:
        raise ValueError("Fisher information must be positive")
    return 1.0 / math.sqrt(fisher_information)


def shot_noise_limit(n_bar: float, convention: str = "two-mode") -> float:
    """1/sqrt(n) for a two-mode interferometer, 1/sqrt(4n) for a single mode."""
    if n_bar <= 0:
        raise ValueError("mean photon number must be positive")
    if convention not in SNL_CONVENTIONS:
        raise ValueError(f"unknown SNL convention {convention!r}; pick one of {SNL_CONVENTIONS}")
    return 1.0 / math.sqrt(n_bar if convention == "two-mode" else 4.0 * n_bar)


def heisenberg_limit(n_bar: float) -> float:
    """1/n scaling floor of noiseless quantum phase estimation."""
    if n_bar <= 0:
        raise ValueError("mean photon number must be positive")
    return 1.0 / n_bar


# ---------------------------------------------------------------------------
# probe-state catalogue: closed forms and Fock realisations
# ---------------------------------------------------------------------------


class ProbeFamily(str, Enum):
    """The catalogued interferometer probe states."""

    LASER = "laser"
    NOON = "noon"
    TWIN_SQUEEZED = "twin_squeezed_vacuum"
    CAVES = "caves"
    AMPLIFIED_BELL = "amplified_bell"
    TWIN_FOCK = "twin_fock"
    TMSV = "two_mode_squeezed_vacuum"
    ECS = "entangled_coherent"


#: Families with no direct Fock construction here (closed forms only).
FORMULA_ONLY = frozenset({ProbeFamily.AMPLIFIED_BELL})

#: The entangled-coherent closed forms assume e^{-n_bar} is negligible.
ECS_ASSUMPTION_LIMIT = 1e-6


@dataclass(frozen=True)
class TableRow:
    """Closed-form (Q, J, QFI) of one probe family at mean photon number n_bar."""

    state_id: ProbeFamily
    n_bar: float
    q: float
    j: float
    qfi: float


def table_row(state_id: ProbeFamily | str, n_bar: float) -> TableRow:
    """Exact closed-form Mandel Q, mode correlation J and QFI of a probe family.

    ``n_bar`` is the total mean photon number of the probe, except for the
    two-mode squeezed vacuum where it is the per-mode occupancy sinh^2(r)
    (the standard convention for that state, and the only reading consistent
    with its Q = n_bar row).  The entangled-coherent row additionally
    requires e^{-n_bar} < 1e-6, the regime its closed forms assume.
    """
    family = ProbeFamily(state_id)
    if n_bar <= 0:
        raise ValueError("n_bar must be positive")
    n = float(n_bar)
    if family is ProbeFamily.LASER:
        return TableRow(family, n, 0.0, 0.0, n)
    if family is ProbeFamily.NOON:
        return TableRow(family, n, n / 2.0 - 1.0, -1.0, n**2)
    if family is ProbeFamily.TWIN_SQUEEZED:
        return TableRow(family, n, n + 1.0, 0.0, n**2 + 2.0 * n)
    if family is ProbeFamily.CAVES:
        s = math.sqrt(n * (n + 2.0))
        return TableRow(
            family,
            n,
            (1.0 + 2.0 * n + s) / 4.0,
            (1.0 - s) / (5.0 + 2.0 * n + s),
            (2.0 * n + n * s + n**2) / 2.0,
        )
    if family is ProbeFamily.AMPLIFIED_BELL:
        return TableRow(
            family,
            n,
            (5.0 * n - 11.0 / n + 2.0) / 8.0,
            -((n + 1.0) ** 2) / (5.0 * n**2 + 10.0 * n - 11.0),
            (3.0 * n**2 + 6.0 * n - 5.0) / 4.0,
        )
    if family is ProbeFamily.TWIN_FOCK:
        return TableRow(family, n, (n / 2.0 - 1.0) / 2.0, -1.0, n**2 / 2.0 + n)
    if family is ProbeFamily.TMSV:
        return TableRow(family, n, n, 1.0, 0.0)
    if family is ProbeFamily.ECS:
        if math.exp(-n) >= ECS_ASSUMPTION_LIMIT:
            raise ValueError(
                f"entangled-coherent closed forms need e^(-n_bar) < {ECS_ASSUMPTION_LIMIT:g}; "
                f"got n_bar={n}"
            )
        return TableRow(family, n, n / 2.0, -1.0 / (1.0 + 2.0 / n), n**2 + n)
    raise ValueError(f"unknown probe family {state_id!r}")  # pragma: no cover


def _as_integer(x: float, what: str) -> int:
    if abs(x - round(x)) > 1e-9:
        raise ValueError(f"{what} requires an integer photon number, got {x}")
    return int(round(x))


def _poisson_cutoff(mean: float) -> int:
    return int(math.ceil(mean + 12.0 * math.sqrt(mean + 1.0) + 18.0))


def _geometric_cutoff(mean_per_mode: float) -> int:
    # Number distribution falls like (m/(m+1))^n; reach a ~1e-20 tail so that
    # n^2-weighted moment sums stay good to ~1e-12.
    if mean_per_mode <= 0:
        return 16
    ratio = mean_per_mode / (mean_per_mode + 1.0)
    return int(math.ceil(48.0 / -math.log(ratio))) + 8


def oracle_cutoff(state_id: ProbeFamily | str, n_bar: float) -> int:
    """Default per-mode cutoff that keeps the family's tail below ~1e-14."""
    family = ProbeFamily(state_id)
    if family is ProbeFamily.LASER:
        return _poisson_cutoff(n_bar)
    if family in (ProbeFamily.NOON, ProbeFamily.TWIN_FOCK):
        return _as_integer(n_bar, family.value)
    if family is ProbeFamily.TWIN_SQUEEZED:
        return _geometric_cutoff(n_bar / 2.0)
    if family is ProbeFamily.CAVES:
        return max(_geometric_cutoff(n_bar / 2.0), _poisson_cutoff(n_bar / 2.0))
    if family is ProbeFamily.TMSV:
        return _geometric_cutoff(n_bar)
    if family is ProbeFamily.ECS:
        return _poisson_cutoff(n_bar)
    raise ValueError(f"no Fock construction for {family.value}")


def oracle_probe(state_id: ProbeFamily | str, n_bar: float, cutoff: int | None = None) -> PureState:
    """Exact in-interferometer Fock state for a catalogued probe family.

    States that the interferometer prepares from its inputs (laser, Caves,
    twin Fock) are built by passing the inputs through the 50:50 beam
    splitter; the others are constructed directly.
    """
    family = ProbeFamily(state_id)
    if family in FORMULA_ONLY:
        raise ValueError(f"{family.value} has no Fock construction; its row is formula-only")
    if n_bar <= 0:
        raise ValueError("n_bar must be positive")
    c = cutoff if cutoff is not None else oracle_cutoff(family, n_bar)

    if family is ProbeFamily.LASER:
        alpha = math.sqrt(n_bar)
        return fock.beam_splitter(fock.product(fock.coherent(alpha, c), fock.vacuum(c)))
    if family is ProbeFamily.NOON:
        return fock.noon(_as_integer(n_bar, "noon"), c)
    if family is ProbeFamily.TWIN_SQUEEZED:
        r = math.asinh(math.sqrt(n_bar / 2.0))
        one = fock.squeezed_vacuum(r, 0.0, c)
        return fock.product(one, one)
    if family is ProbeFamily.CAVES:
        # Equal intensities in both inputs; real laser amplitude against the
        # r > 0 squeezing axis is the phase choice that minimises the QFI
        # denominator, i.e. the canonical operating point.
        alpha = math.sqrt(n_bar / 2.0)
        r = math.asinh(math.sqrt(n_bar / 2.0))
        return fock.beam_splitter(
            fock.product(fock.coherent(alpha, c), fock.squeezed_vacuum(r, 0.0, c))
        )
    if family is ProbeFamily.TWIN_FOCK:
        n_total = _as_integer(n_bar, "twin_fock")
        if n_total % 2:
            raise ValueError("twin Fock needs an even total photon number")
        return fock.beam_splitter(fock.twin_fock(n_total // 2, c))
    if family is ProbeFamily.TMSV:
        return fock.two_mode_squeezed_vacuum(math.asinh(math.sqrt(n_bar)), c)
    if family is ProbeFamily.ECS:
        return fock.entangled_coherent(math.sqrt(n_bar), c)
    raise ValueError(f"unknown probe family {state_id!r}")  # pragma: no cover


def oracle_row(state_id: ProbeFamily | str, n_bar: float, cutoff: int | None = None) -> TableRow:
    """(Q, J, QFI) measured on the exact Fock realisation of a probe family."""
    stats = probe_statistics(oracle_probe(state_id, n_bar, cutoff))
    if stats.q_a is None or stats.j is None:
        raise UndefinedStatisticError(f"{state_id}: oracle statistics undefined")
    return TableRow(ProbeFamily(state_id), n_bar, stats.q_a, stats.j, stats.qfi)
