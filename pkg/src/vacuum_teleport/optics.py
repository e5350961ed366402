"""Linear-optical elements acting on :class:`~vacuum_teleport.fock.PureState`.

Beam splitters use the real, involutive convention

    a^dag -> t c^dag + r d^dag
    b^dag -> r c^dag - t d^dag

for inputs ``(a, b)`` and outputs ``(c, d)``. The 50:50 element with
``r = t = 1/sqrt(2)`` reproduces ``a_S^dag = (a_1^dag + a_2^dag)/sqrt(2)``,
``a_A^dag = (a_1^dag - a_2^dag)/sqrt(2)`` when ``(a, b, c, d) = (S, A, 1, 2)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from math import comb, factorial

from .fock import EPS_AMP, FockError, Occupation, PhotonCapError, PureState

#: Wavelength of the down-converted photons, in micrometres.
DEFAULT_WAVELENGTH_UM = 0.7276

_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class BeamSplitterParams:
    """Real reflectivity/transmissivity amplitudes plus port wiring.

    ``outputs`` defaults to ``inputs`` (the element acts in place).
    """

    r: float
    t: float
    inputs: tuple[str, str]
    outputs: tuple[str, str] | None = None

    def __post_init__(self) -> None:
        r, t = float(self.r), float(self.t)
        if not (0.0 <= r <= 1.0 and 0.0 <= t <= 1.0):
            raise FockError(f"r and t must lie in [0, 1], got r={r}, t={t}")
        if abs(r * r + t * t - 1.0) > _UNIT_TOL:
            raise FockError(f"r^2 + t^2 = {r * r + t * t!r} is not 1")
        inputs = tuple(self.inputs)
        outputs = inputs if self.outputs is None else tuple(self.outputs)
        if len(inputs) != 2 or inputs[0] == inputs[1]:
            raise FockError(f"input modes must be two distinct names, got {inputs}")
        if len(outputs) != 2 or outputs[0] == outputs[1]:
            raise FockError(f"output modes must be two distinct names, got {outputs}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)

    @classmethod
    def from_reflectance(
        cls,
        r_sq: float,
        inputs: tuple[str, str],
        outputs: tuple[str, str] | None = None,
    ) -> BeamSplitterParams:
        """Build from the intensity reflectance ``|r|^2``."""
        if not 0.0 <= r_sq <= 1.0:
            raise FockError(f"reflectance must lie in [0, 1], got {r_sq}")
        return cls(math.sqrt(r_sq), math.sqrt(1.0 - r_sq), inputs, outputs)

    @classmethod
    def balanced(
        cls, inputs: tuple[str, str], outputs: tuple[str, str] | None = None
    ) -> BeamSplitterParams:
        h = math.sqrt(0.5)
        return cls(h, h, inputs, outputs)

    @property
    def matrix(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """Mode-transfer matrix; column ``j`` is the image of input ``j``."""
        return ((self.t, self.r), (self.r, -self.t))


def _expand_pair(n: int, m: int, r: float, t: float) -> dict[tuple[int, int], float]:
    """Output amplitudes for ``|n, m>`` on a beam splitter, by binomial expansion.

    (t c + r d)^n (r c - t d)^m / sqrt(n! m!) applied to vacuum; the monomial
    c^p d^q contributes sqrt(p! q!) |p, q>.
    """
    out: dict[tuple[int, int], float] = {}
    norm_in = factorial(n) * factorial(m)
    for k in range(n + 1):
        a_coeff = comb(n, k) * t**k * r ** (n - k)
        for l in range(m + 1):
            b_coeff = comb(m, l) * r**l * (-t) ** (m - l)
            p, q = k + l, (n - k) + (m - l)
            key = (p, q)
            out[key] = out.get(key, 0.0) + a_coeff * b_coeff
    return {
        key: c * math.sqrt(factorial(key[0]) * factorial(key[1]) / norm_in)
        for key, c in out.items()
    }


def apply_beam_splitter(state: PureState, bs: BeamSplitterParams) -> PureState:
    """Exact multi-photon beam-splitter transform.

    The input modes' positions in the registry are taken over by the output
    modes. Raises :class:`PhotonCapError` if an output term exceeds ``n_max``.
    """
    ia, ib = state.registry.index(bs.inputs[0]), state.registry.index(bs.inputs[1])
    cache: dict[tuple[int, int], dict[tuple[int, int], float]] = {}
    acc: dict[Occupation, complex] = {}
    for occ, amp in state.terms.items():
        pair = (occ[ia], occ[ib])
        if pair not in cache:
            cache[pair] = _expand_pair(*pair, bs.r, bs.t)
        for (p, q), coeff in cache[pair].items():
            new = list(occ)
            new[ia], new[ib] = p, q
            key = tuple(new)
            acc[key] = acc.get(key, 0j) + amp * coeff
    for key, amp in acc.items():
        if abs(amp) >= EPS_AMP and max(key) > state.n_max:
            raise PhotonCapError(
                f"beam splitter output term {key} over {state.modes} exceeds n_max={state.n_max}"
            )
    registry = state.registry.rename({bs.inputs[0]: bs.outputs[0], bs.inputs[1]: bs.outputs[1]})
    return PureState(registry, {k: a for k, a in acc.items() if abs(a) >= EPS_AMP}, state.n_max)


def apply_phase_shift(state: PureState, mode: str, phi: float) -> PureState:
    """Multiply each term by ``exp(i n phi)``, ``n`` being the occupation of ``mode``."""
    i = state.registry.index(mode)
    return PureState(
        state.registry,
        {occ: amp * cmath.exp(1j * occ[i] * phi) for occ, amp in state.terms.items()},
        state.n_max,
    )


def apply_pauli_z(state: PureState, mode: str) -> PureState:
    """sigma_z on a vacuum/one-photon qubit mode: ``|1> -> -|1>``."""
    i = state.registry.index(mode)
    bad = [occ for occ in state.terms if occ[i] > 1]
    if bad:
        raise FockError(f"sigma_z undefined on {mode!r}: term {bad[0]} leaves the qubit subspace")
    return PureState(
        state.registry,
        {occ: -amp if occ[i] == 1 else amp for occ, amp in state.terms.items()},
        state.n_max,
    )


def apply_loss(state: PureState, mode: str, eta: float, loss_mode: str) -> PureState:
    """Efficiency ``eta`` as a beam splitter (``t = sqrt(eta)``) into a vacuum loss mode.

    ``loss_mode`` is appended to the registry if absent; if present it must be
    empty in every term.
    """
    if not 0.0 <= eta <= 1.0:
        raise FockError(f"efficiency must lie in [0, 1], got {eta}")
    if loss_mode in state.registry:
        if state.occupation_of(loss_mode) - {0}:
            raise FockError(f"loss mode {loss_mode!r} is not in vacuum")
    else:
        state = state.with_mode(loss_mode)
    if eta == 1.0:
        return state
    bs = BeamSplitterParams(math.sqrt(1.0 - eta), math.sqrt(eta), (mode, loss_mode))
    return apply_beam_splitter(state, bs)


@dataclass(frozen=True)
class PhaseSetting:
    """Interferometer phase and, optionally, the equivalent mirror position."""

    phi: float
    mirror_um: float | None = None
    wavelength_um: float = DEFAULT_WAVELENGTH_UM

    def __post_init__(self) -> None:
        if self.mirror_um is not None:
            expected = mirror_to_phase(self.mirror_um, self.wavelength_um)
            if abs(expected - self.phi) > 1e-9 * max(1.0, abs(self.phi)):
                raise FockError(
                    f"phi={self.phi} inconsistent with mirror X={self.mirror_um} um "
                    f"at lambda={self.wavelength_um} um"
                )

    @classmethod
    def from_mirror(cls, mirror_um: float, wavelength_um: float = DEFAULT_WAVELENGTH_UM) -> PhaseSetting:
        return cls(mirror_to_phase(mirror_um, wavelength_um), mirror_um, wavelength_um)

    @classmethod
    def from_phase(cls, phi: float, wavelength_um: float = DEFAULT_WAVELENGTH_UM) -> PhaseSetting:
        return cls(phi, phase_to_mirror(phi, wavelength_um), wavelength_um)


def mirror_to_phase(x: float, wavelength: float) -> float:
    """Phase in radians for mirror displacement ``x`` (same units as ``wavelength``).

    Inverse of ``x = 2**-1.5 * wavelength * phi / pi``.
    """
    if wavelength <= 0:
        raise FockError(f"wavelength must be positive, got {wavelength}")
    return 2.0**1.5 * math.pi * x / wavelength


def phase_to_mirror(phi: float, wavelength: float) -> float:
    if wavelength <= 0:
        raise FockError(f"wavelength must be positive, got {wavelength}")
    return 2.0**-1.5 * wavelength * phi / math.pi
