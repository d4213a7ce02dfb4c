"""Truncated Fock-space states, linear-optics unitaries, and photon loss.

Single- and two-mode bosonic states are dense complex amplitude tensors over
the number basis |0>, ..., |cutoff>.  Every state records how much probability
weight truncation is allowed to have cost it (``truncation_tol``), and every
operation either preserves weight exactly or measures what it discarded and
fails loudly when that exceeds its budget.  This module is the slow, exact
oracle that the closed-form machinery elsewhere in the package is checked
against, so correctness is preferred over speed throughout.

All states are immutable values and all operations are pure functions; they
are safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal, expm
from scipy.sparse import diags
from scipy.sparse.linalg import expm_multiply
from scipy.special import gammaln

DEFAULT_TRUNCATION_TOL = 1e-10
# Constructors refuse to return a state missing more weight than this.
CONSTRUCTOR_DEFICIT_LIMIT = 1e-6
# Squeezing refuses when the result spills more weight than this past the cutoff.
SQUEEZE_DEFICIT_LIMIT = 1e-8

_HERMITICITY_TOL = 1e-12
_EIGENVALUE_FLOOR = -1e-10
_BS_ANGLE = np.pi / 4
# Above this working dimension the squeeze unitary is applied matrix-free.
_DENSE_EXPM_DIM = 700

OBSERVABLES = ("n", "n2", "cross_nn", "a2", "adag2a2")
PHASE_CONVENTIONS = ("single-mode", "relative-half")


class TruncationOverflowError(RuntimeError):
    """A truncated-basis operation lost more weight than its budget allows."""


class EmptyProjectionError(ValueError):
    """Projection onto a subspace the state has numerically no support on."""


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=complex)
    out.flags.writeable = False
    return out


def _tol_for(deficit: float, base: float = DEFAULT_TRUNCATION_TOL) -> float:
    # Small slack so the recorded tolerance always covers the measured
    # deficit despite rounding in the norm sum itself (~dim * eps).
    return max(base, deficit * (1.0 + 1e-6) + 1e-12)


@dataclass(frozen=True, eq=False)
class PureState:
    """Ket over the truncated number basis of one or two modes.

    ``amplitudes`` has shape ``(cutoff + 1,)`` or ``(cutoff + 1, cutoff + 1)``
    and squared norm in ``[1 - truncation_tol, 1]``.
    """

    amplitudes: np.ndarray
    truncation_tol: float = DEFAULT_TRUNCATION_TOL

    def __post_init__(self) -> None:
        amps = _frozen(self.amplitudes)
        if amps.ndim not in (1, 2):
            raise ValueError(f"expected a 1- or 2-mode amplitude tensor, got ndim={amps.ndim}")
        if amps.ndim == 2 and amps.shape[0] != amps.shape[1]:
            raise ValueError(f"two-mode tensor must be square, got shape {amps.shape}")
        if amps.shape[0] < 1:
            raise ValueError("cutoff must be >= 0")
        object.__setattr__(self, "amplitudes", amps)
        norm_sq = self.norm_squared
        if not 1.0 - self.truncation_tol <= norm_sq <= 1.0 + 1e-12:
            raise ValueError(
                f"squared norm {norm_sq!r} outside [1 - {self.truncation_tol:g}, 1]"
            )

    @property
    def modes(self) -> int:
        return self.amplitudes.ndim

    @property
    def cutoff(self) -> int:
        return self.amplitudes.shape[0] - 1

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def norm_deficit(self) -> float:
        return max(0.0, 1.0 - self.norm_squared)


@dataclass(frozen=True, eq=False)
class MixedState:
    """Density matrix over the truncated number basis.

    The matrix is indexed by the flattened basis, so its dimension is
    ``(cutoff + 1) ** modes``.  Hermiticity and trace are checked on
    construction; the (more expensive) positivity check lives in
    :meth:`validate`.
    """

    matrix: np.ndarray
    modes: int
    cutoff: int
    truncation_tol: float = DEFAULT_TRUNCATION_TOL

    def __post_init__(self) -> None:
        mat = _frozen(self.matrix)
        dim = (self.cutoff + 1) ** self.modes
        if self.modes not in (1, 2):
            raise ValueError("only 1- and 2-mode density matrices are supported")
        if mat.shape != (dim, dim):
            raise ValueError(f"expected shape {(dim, dim)}, got {mat.shape}")
        if np.max(np.abs(mat - mat.conj().T)) > _HERMITICITY_TOL:
            raise ValueError("density matrix is not Hermitian within 1e-12")
        object.__setattr__(self, "matrix", mat)
        tr = self.trace
        if not 1.0 - self.truncation_tol <= tr <= 1.0 + 1e-12:
            raise ValueError(f"trace {tr!r} outside [1 - {self.truncation_tol:g}, 1]")

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def trace_deficit(self) -> float:
        return max(0.0, 1.0 - self.trace)

    def validate(self) -> None:
        """Check positivity in addition to the constructor invariants."""
        eigenvalues = np.linalg.eigvalsh(self.matrix)
        if eigenvalues.min() < _EIGENVALUE_FLOOR:
            raise ValueError(f"negative eigenvalue {eigenvalues.min():.3e}")


State = PureState | MixedState


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def vacuum(cutoff: int, modes: int = 1) -> PureState:
    if modes == 1:
        amps = np.zeros(cutoff + 1, dtype=complex)
        amps[0] = 1.0
    else:
        amps = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        amps[0, 0] = 1.0
    return PureState(amps)


def number_state(n: int, cutoff: int) -> PureState:
    if not 0 <= n <= cutoff:
        raise ValueError(f"photon number {n} outside [0, {cutoff}]")
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[n] = 1.0
    return PureState(amps)


def _check_constructor_deficit(amps: np.ndarray, what: str) -> float:
    deficit = max(0.0, 1.0 - float(np.vdot(amps, amps).real))
    if deficit > CONSTRUCTOR_DEFICIT_LIMIT:
        raise TruncationOverflowError(
            f"{what}: truncated norm deficit {deficit:.3e} exceeds "
            f"{CONSTRUCTOR_DEFICIT_LIMIT:g}; increase the cutoff"
        )
    return deficit


def coherent(alpha: complex, cutoff: int) -> PureState:
    """Coherent state with amplitude alpha, c_n = e^{-|a|^2/2} a^n / sqrt(n!)."""
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[0] = np.exp(-abs(alpha) ** 2 / 2.0)
    for n in range(1, cutoff + 1):
        amps[n] = amps[n - 1] * alpha / np.sqrt(n)
    deficit = _check_constructor_deficit(amps, f"coherent(alpha={alpha!r}, cutoff={cutoff})")
    return PureState(amps, truncation_tol=_tol_for(deficit))


def squeezed_vacuum(r: float, phi: float, cutoff: int) -> PureState:
    """Single-mode squeezed vacuum; only even number states are populated.

    The even amplitudes are
    ``c_{2j} = (-1)^j sqrt((2j)!)/(2^j j!) tanh(r)^j / sqrt(cosh r) e^{2 i j phi}``,
    which is what exp[(r/2)(a^2 - a^dag^2)] produces from vacuum followed by a
    number-basis phase rotation.
    """
    if r < 0:
        raise ValueError("squeezing magnitude r must be >= 0 (the axis is set by phi)")
    if cutoff < 2 and r > 0:
        raise ValueError("cutoff must be >= 2 to hold a squeezed vacuum")
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[0] = 1.0 / np.sqrt(np.cosh(r))
    t = np.tanh(r)
    rot = np.exp(2j * phi)
    for j in range(1, cutoff // 2 + 1):
        two_j = 2 * j
        amps[two_j] = (
            -amps[two_j - 2] * t * rot * np.sqrt(two_j * (two_j - 1)) / two_j
        )
    deficit = _check_constructor_deficit(amps, f"squeezed_vacuum(r={r}, cutoff={cutoff})")
    return PureState(amps, truncation_tol=_tol_for(deficit))


def noon(n: int, cutoff: int) -> PureState:
    """Path-entangled (|n,0> + |0,n>)/sqrt(2)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if cutoff < n:
        raise ValueError(f"cutoff {cutoff} < photon number {n}")
    amps = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    amps[n, 0] = amps[0, n] = 1.0 / np.sqrt(2.0)
    return PureState(amps)


def twin_fock(n_half: int, cutoff: int) -> PureState:
    """Product number state |n_half> x |n_half>."""
    if n_half < 0:
        raise ValueError("n_half must be >= 0")
    if cutoff < n_half:
        raise ValueError(f"cutoff {cutoff} < photon number {n_half}")
    amps = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    amps[n_half, n_half] = 1.0
    return PureState(amps)


def entangled_coherent(alpha: complex, cutoff: int) -> PureState:
    """(|alpha,0> + |0,alpha>)/N with N from the exact <alpha|0> overlap."""
    if abs(alpha) ** 2 < 1e-8:
        raise ValueError("|alpha|^2 < 1e-8: the normalisation degenerates near vacuum")
    coh = coherent(alpha, cutoff)
    vac = np.zeros(cutoff + 1, dtype=complex)
    vac[0] = 1.0
    raw = np.multiply.outer(coh.amplitudes, vac) + np.multiply.outer(vac, coh.amplitudes)
    norm = np.sqrt(2.0 * (1.0 + np.exp(-abs(alpha) ** 2)))
    amps = raw / norm
    deficit = _check_constructor_deficit(
        amps, f"entangled_coherent(alpha={alpha!r}, cutoff={cutoff})"
    )
    return PureState(amps, truncation_tol=_tol_for(deficit))


def two_mode_squeezed_vacuum(r: float, cutoff: int) -> PureState:
    """Schmidt series sum_n tanh(r)^n / cosh(r) |n,n>."""
    if r < 0:
        raise ValueError("squeezing magnitude r must be >= 0")
    n = np.arange(cutoff + 1)
    schmidt = np.tanh(r) ** n / np.cosh(r)
    amps = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    amps[n, n] = schmidt
    deficit = _check_constructor_deficit(
        amps, f"two_mode_squeezed_vacuum(r={r}, cutoff={cutoff})"
    )
    return PureState(amps, truncation_tol=_tol_for(deficit))


def product(a: PureState, b: PureState) -> PureState:
    """Two-mode product state a x b from two single-mode states."""
    if a.modes != 1 or b.modes != 1:
        raise ValueError("product() takes two single-mode states")
    if a.cutoff != b.cutoff:
        raise ValueError("both factors must share one cutoff")
    amps = np.multiply.outer(a.amplitudes, b.amplitudes)
    tol = _tol_for(a.norm_deficit + b.norm_deficit, base=max(a.truncation_tol, b.truncation_tol))
    return PureState(amps, truncation_tol=tol)


def to_density(state: State) -> MixedState:
    if isinstance(state, MixedState):
        return state
    psi = state.amplitudes.reshape(-1)
    return MixedState(
        np.outer(psi, psi.conj()),
        modes=state.modes,
        cutoff=state.cutoff,
        truncation_tol=_tol_for(state.norm_deficit, base=state.truncation_tol),
    )


# ---------------------------------------------------------------------------
# unitaries
# ---------------------------------------------------------------------------


def beam_splitter(state: PureState) -> PureState:
    """50:50 beam splitter sending |alpha> x |0> to |i alpha/sqrt2> x |alpha/sqrt2>.

    Realised as i^N exp[-i pi/4 (a^dag b + a b^dag)], whose mode map is
    (a, b) -> ((i a + b)/sqrt2, (a + i b)/sqrt2).  The generator conserves
    total photon number, so the unitary is applied exactly within each
    total-number block; blocks with total above the per-mode cutoff are
    rotated within their clipped span, which is harmless whenever the state
    carries negligible weight there (caller's cutoff responsibility, as for
    every constructor).
    """
    if not isinstance(state, PureState) or state.modes != 2:
        raise ValueError("beam_splitter() acts on two-mode pure states")
    c = state.cutoff
    amps = state.amplitudes
    out = np.zeros_like(amps)
    for total in range(2 * c + 1):
        lo, hi = max(0, total - c), min(total, c)
        idx_a = np.arange(lo, hi + 1)
        block = amps[idx_a, total - idx_a]
        phase = 1j**total
        if idx_a.size == 1:
            out[idx_a, total - idx_a] = phase * block
            continue
        n_a = idx_a[:-1]
        off = np.sqrt((n_a + 1.0) * (total - n_a))
        w, v = eigh_tridiagonal(np.zeros(idx_a.size), off)
        rotated = (v * np.exp(-1j * _BS_ANGLE * w)) @ (v.T @ block)
        out[idx_a, total - idx_a] = phase * rotated
    return PureState(out, truncation_tol=state.truncation_tol)


def _phase_factors(state: State, phi: float, convention: str) -> np.ndarray:
    if convention not in PHASE_CONVENTIONS:
        raise ValueError(f"unknown phase convention {convention!r}")
    n = np.arange(state.cutoff + 1)
    if convention == "single-mode":
        if state.modes != 1:
            raise ValueError("single-mode phase requires a one-mode state")
        return np.exp(1j * phi * n)
    if state.modes != 2:
        raise ValueError("relative-half phase requires a two-mode state")
    half_diff = 0.5 * (n[:, None] - n[None, :])
    return np.exp(1j * phi * half_diff)


def phase_shift(state: State, phi: float, convention: str = "single-mode") -> State:
    """Diagonal number-basis phase: e^{i phi n} or e^{i phi (n_a - n_b)/2}."""
    factors = _phase_factors(state, phi, convention)
    if isinstance(state, PureState):
        return PureState(factors * state.amplitudes, truncation_tol=state.truncation_tol)
    flat = factors.reshape(-1)
    mat = (flat[:, None] * state.matrix) * flat.conj()[None, :]
    return MixedState(mat, state.modes, state.cutoff, truncation_tol=state.truncation_tol)


@lru_cache(maxsize=32)
def _squeeze_unitary(r: float, dim: int) -> np.ndarray:
    out = expm(np.asarray(_squeeze_generator(r, dim).todense()))
    out.flags.writeable = False
    return out


def _squeeze_generator(r: float, dim: int):
    # (r/2)(a^2 - a^dag^2), anti-Hermitian band matrix with offsets +-2.
    n = np.arange(dim, dtype=float)
    a2 = np.sqrt(n[2:] * n[1:-1])  # <n-2| a^2 |n>
    return diags([0.5 * r * a2, -0.5 * r * a2], offsets=[2, -2], format="csc", dtype=complex)


def _apply_squeeze_padded(block: np.ndarray, r: float, dim: int, work_dim: int) -> np.ndarray:
    if work_dim <= _DENSE_EXPM_DIM:
        u = _squeeze_unitary(r, work_dim)
        return u @ block
    return expm_multiply(_squeeze_generator(r, work_dim), block)


def squeeze(state: State, r: float, grow: bool = False) -> State:
    """Single-mode squeeze exp[(r/2)(a^2 - a^dag^2)]; negative r un-squeezes.

    By default the unitary is evaluated in a padded basis and the result
    restricted back to the state's cutoff; weight left in the pad is the
    truncation deficit and must stay below ``SQUEEZE_DEFICIT_LIMIT``.  With
    ``grow=True`` the result instead keeps whatever enlarged basis it needs
    (the working dimension doubles until the population at its edge is
    negligible), so no weight is discarded; the output cutoff may then exceed
    the input one.  Growth is what a readout stage wants: the input cutoff
    describes the probe, not the inflated state the unsqueezer hands to the
    detector.
    """
    if state.modes != 1:
        raise ValueError("squeeze() acts on single-mode states")
    if r == 0.0:
        return state
    dim = state.cutoff + 1

    work_dim = 2 * max(dim, 32)
    while True:
        out, edge = _squeezed_array(state, r, dim, work_dim)
        if edge <= 0.1 * SQUEEZE_DEFICIT_LIMIT:
            break
        if not grow or work_dim >= 8192:
            if grow:
                raise TruncationOverflowError(
                    f"squeeze(r={r:+.4f}): no convergence below dimension 8192"
                )
            break
        work_dim *= 2

    if isinstance(state, PureState):
        weights = np.abs(out) ** 2
    else:
        weights = np.clip(np.diag(out).real, 0.0, None)

    if grow:
        # Keep every level that carries weight; trim only a <=1e-16 tail.
        tail = np.cumsum(weights[::-1])[::-1]
        keep = int(np.searchsorted(-tail, -1e-16))
        keep = max(dim, min(work_dim, keep + 1))
        spill = float(tail[keep]) if keep < work_dim else 0.0
    else:
        keep = dim
        spill = float(weights[dim:].sum())
        _check_squeeze_spill(spill, edge, state.cutoff, r)

    if isinstance(state, PureState):
        return PureState(
            out[:keep],
            truncation_tol=_tol_for(state.norm_deficit + spill, base=state.truncation_tol),
        )
    mat = 0.5 * (out[:keep, :keep] + out[:keep, :keep].conj().T)
    return MixedState(
        mat,
        modes=1,
        cutoff=keep - 1,
        truncation_tol=_tol_for(state.trace_deficit + spill, base=state.truncation_tol),
    )


def _squeezed_array(state: State, r: float, dim: int, work_dim: int):
    """Squeezed amplitudes or density matrix at work_dim, plus edge weight."""
    if isinstance(state, PureState):
        psi = np.zeros(work_dim, dtype=complex)
        psi[:dim] = state.amplitudes
        out = _apply_squeeze_padded(psi, r, dim, work_dim)
        edge = float(np.vdot(out[-4:], out[-4:]).real)
        return out, edge
    sigma = np.zeros((work_dim, work_dim), dtype=complex)
    sigma[:dim, :dim] = state.matrix
    half = _apply_squeeze_padded(sigma, r, dim, work_dim)
    out = _apply_squeeze_padded(half.conj().T, r, dim, work_dim).conj().T
    edge = float(np.sum(np.diag(out).real[-4:]))
    return out, edge


def _check_squeeze_spill(spill: float, edge: float, cutoff: int, r: float) -> None:
    if spill > SQUEEZE_DEFICIT_LIMIT or edge > 0.1 * SQUEEZE_DEFICIT_LIMIT:
        raise TruncationOverflowError(
            f"squeeze(r={r:+.4f}) at cutoff {cutoff} spills weight {spill:.3e} "
            f"past the cutoff (pad edge {edge:.3e}); increase the cutoff"
        )


# ---------------------------------------------------------------------------
# photon loss channel
# ---------------------------------------------------------------------------


def loss_kraus(eta: float, cutoff: int) -> list[np.ndarray]:
    """Kraus operators of the transmissivity-eta damping channel.

    ``K_j[n-j, n] = sqrt(C(n, j)) (1-eta)^{j/2} eta^{(n-j)/2}`` for
    j = 0..cutoff; they satisfy sum_j K_j^dag K_j = 1 exactly on the
    truncated space (binomial identity).
    """
    _check_eta(eta)
    dim = cutoff + 1
    ops = []
    for j in range(dim):
        k = np.zeros((dim, dim))
        n = np.arange(j, dim)
        k[n - j, n] = _loss_weights(eta, j, n)
        ops.append(k)
    return ops


def _loss_weights(eta: float, j: int, n: np.ndarray) -> np.ndarray:
    # sqrt(C(n, j)) (1-eta)^{j/2} eta^{(n-j)/2}, evaluated in log space.
    if eta == 1.0:
        return np.where(j == 0, 1.0, 0.0) * np.ones_like(n, dtype=float)
    if eta == 0.0:
        return np.where(n - j == 0, 1.0, 0.0).astype(float)
    log_binom = gammaln(n + 1) - gammaln(n - j + 1) - gammaln(j + 1)
    return np.exp(0.5 * (log_binom + j * np.log1p(-eta) + (n - j) * np.log(eta)))


def _check_eta(eta: float) -> None:
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmissivity eta={eta!r} outside [0, 1]")


def loss(state: State, eta: float, mode: int = 0) -> MixedState:
    """Amplitude damping of one mode: sigma = sum_j K_j rho K_j^dag."""
    _check_eta(eta)
    if not 0 <= mode < state.modes:
        raise ValueError(f"mode {mode} invalid for a {state.modes}-mode state")
    rho = to_density(state)
    if eta == 1.0:
        return rho
    dim = state.cutoff + 1

    if state.modes == 1:
        out = np.zeros_like(rho.matrix)
        if eta == 0.0:
            out[0, 0] = rho.trace
        else:
            for j in range(dim):
                n = np.arange(j, dim)
                g = _loss_weights(eta, j, n)
                out[: dim - j, : dim - j] += np.outer(g, g) * rho.matrix[j:, j:]
        out = 0.5 * (out + out.conj().T)
        return MixedState(out, 1, state.cutoff, truncation_tol=_tol_for(rho.trace_deficit, base=rho.truncation_tol))

    eye = np.eye(dim)
    out = np.zeros_like(rho.matrix)
    for k in loss_kraus(eta, state.cutoff):
        full = np.kron(k, eye) if mode == 0 else np.kron(eye, k)
        out += full @ rho.matrix @ full.T
    out = 0.5 * (out + out.conj().T)
    return MixedState(out, 2, state.cutoff, truncation_tol=_tol_for(rho.trace_deficit, base=rho.truncation_tol))


# ---------------------------------------------------------------------------
# measurements and projections
# ---------------------------------------------------------------------------


def expectation(state: State, observable: str, mode: int | None = None):
    """Exact expectation value over the truncated basis.

    ``observable`` is one of ``n``, ``n2``, ``cross_nn``, ``a2`` or
    ``adag2a2`` (the normally ordered n(n-1)).  Hermitian observables return
    a float, ``a2`` returns a complex number.
    """
    if observable not in OBSERVABLES:
        raise ValueError(f"unknown observable {observable!r}; pick one of {OBSERVABLES}")
    if observable == "cross_nn":
        if state.modes != 2:
            raise ValueError("cross_nn needs a two-mode state")
    elif state.modes == 2 and mode is None:
        raise ValueError(f"observable {observable!r} on a two-mode state needs a mode index")
    mode = 0 if mode is None else mode
    if not 0 <= mode < state.modes:
        raise ValueError(f"mode {mode} invalid for a {state.modes}-mode state")

    n = np.arange(state.cutoff + 1, dtype=float)
    if isinstance(state, PureState):
        amps = state.amplitudes
        if state.modes == 2 and mode == 1:
            amps = amps.T
        weights = np.abs(amps) ** 2
        marginal = weights if state.modes == 1 else weights.sum(axis=1)
        if observable == "n":
            return float(n @ marginal)
        if observable == "n2":
            return float((n**2) @ marginal)
        if observable == "adag2a2":
            return float((n * (n - 1.0)) @ marginal)
        if observable == "cross_nn":
            return float(n @ weights @ n)
        coeff = np.sqrt(n[2:] * n[1:-1])
        if state.modes == 1:
            return complex(np.sum(amps[:-2].conj() * coeff * amps[2:]))
        return complex(np.sum(amps[:-2].conj() * coeff[:, None] * amps[2:]))

    dim = state.cutoff + 1
    rho = state.matrix
    if state.modes == 1:
        pop = np.diag(rho).real
        if observable == "n":
            return float(n @ pop)
        if observable == "n2":
            return float((n**2) @ pop)
        if observable == "adag2a2":
            return float((n * (n - 1.0)) @ pop)
        coeff = np.sqrt(n[2:] * n[1:-1])
        return complex(np.sum(coeff * np.diagonal(rho, offset=-2)))

    rho4 = rho.reshape(dim, dim, dim, dim)  # (a, b; a', b')
    if observable == "cross_nn":
        pop = np.einsum("abab->ab", rho4).real
        return float(n @ pop @ n)
    if mode == 1:
        rho4 = rho4.transpose(1, 0, 3, 2)
    reduced = np.einsum("mbnb->mn", rho4)  # partial trace over the other mode
    pop = np.diag(reduced).real
    if observable == "n":
        return float(n @ pop)
    if observable == "n2":
        return float((n**2) @ pop)
    if observable == "adag2a2":
        return float((n * (n - 1.0)) @ pop)
    coeff = np.sqrt(n[2:] * n[1:-1])
    return complex(np.sum(coeff * np.diagonal(reduced, offset=-2)))


def project_total_photon(state: PureState, n_total: int) -> PureState:
    """Renormalised restriction of a two-mode ket to n_a + n_b = n_total."""
    if not isinstance(state, PureState) or state.modes != 2:
        raise ValueError("project_total_photon() acts on two-mode pure states")
    if n_total < 0:
        raise ValueError("n_total must be >= 0")
    c = state.cutoff
    n = np.arange(c + 1)
    mask = (n[:, None] + n[None, :]) == n_total
    projected = np.where(mask, state.amplitudes, 0.0)
    weight = float(np.vdot(projected, projected).real)
    if weight <= 1e-12:
        raise EmptyProjectionError(
            f"state has weight {weight:.3e} <= 1e-12 in the {n_total}-photon subspace"
        )
    return PureState(projected / np.sqrt(weight))


def number_distribution(state: State) -> np.ndarray:
    """Photon-number probabilities: vector (one mode) or matrix (two modes)."""
    if isinstance(state, PureState):
        return np.abs(state.amplitudes) ** 2
    pop = np.diag(state.matrix).real
    if state.modes == 1:
        return pop
    dim = state.cutoff + 1
    return pop.reshape(dim, dim)


def fidelity(a: PureState, b: State) -> float:
    """|<a|b>|^2 against a ket, or <a|rho|a> against a density matrix."""
    if not isinstance(a, PureState):
        raise ValueError("first argument must be a pure state")
    psi = a.amplitudes.reshape(-1)
    if isinstance(b, PureState):
        if b.amplitudes.shape != a.amplitudes.shape:
            raise ValueError("states live on different truncated bases")
        return float(abs(np.vdot(psi, b.amplitudes.reshape(-1))) ** 2)
    if (b.cutoff, b.modes) != (a.cutoff, a.modes):
        raise ValueError("states live on different truncated bases")
    return float((psi.conj() @ b.matrix @ psi).real)


# ---------------------------------------------------------------------------
# moment bundle
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ObservableMoments:
    """Per-mode number moments plus the two-mode number covariance inputs."""

    mean_n: tuple[float, ...]
    mean_n2: tuple[float, ...]
    mean_a2: tuple[complex, ...]
    var_n: tuple[float, ...]
    cross_nn: float | None

    def __post_init__(self) -> None:
        for mean, mean2, var in zip(self.mean_n, self.mean_n2, self.var_n):
            if var < -1e-10:
                raise ValueError(f"negative number variance {var:.3e}")
            if abs(var - (mean2 - mean**2)) > 1e-10 * max(1.0, abs(mean2)):
                raise ValueError("variance inconsistent with first and second moments")


def observable_moments(state: State) -> ObservableMoments:
    mean_n, mean_n2, mean_a2, var_n = [], [], [], []
    for mode in range(state.modes):
        m1 = expectation(state, "n", mode)
        m2 = expectation(state, "n2", mode)
        mean_n.append(m1)
        mean_n2.append(m2)
        mean_a2.append(expectation(state, "a2", mode))
        var_n.append(m2 - m1**2)
    cross = expectation(state, "cross_nn") if state.modes == 2 else None
    return ObservableMoments(
        tuple(mean_n), tuple(mean_n2), tuple(mean_a2), tuple(var_n), cross
    )
