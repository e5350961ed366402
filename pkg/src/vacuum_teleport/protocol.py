"""Transfer of a vacuum/one-photon qubit through a single-photon entangled channel.

Pipeline::

    photon --BS_S--> (k_S, k_a~)          alpha|0>_S|1>_a~ + beta|1>_S|0>_a~
    photon --BS----> (k_A, k_B)           (|1>_A|0>_B - |0>_A|1>_B)/sqrt(2)
    phase phi on k_S
    BS_A: (k_S, k_A) -> (D2, D1)          Alice's partial Bell measurement
    [active] sigma_z on k_B if D2 fires
    BS_B: (k_a~, k_B) -> (D2*, D1*)       Bob's verification

Convention stack. With the involutive beam splitter of :mod:`.optics`, BS_A
acts as ``a_S^dag -> (a_1^dag + a_2^dag)/sqrt(2)`` and
``a_A^dag -> -(a_1^dag - a_2^dag)/sqrt(2)``: a single photon at D1 then heralds
Bob holding ``alpha|0> + beta|1>`` and D2 heralds ``alpha|0> - beta|1>``. The
BS_B wiring makes the success-conditioned coincidences equal
``(D1-D1*) = (D2-D2*) = sin^2(phi/2)/2`` and
``(D1-D2*) = (D2-D1*) = cos^2(phi/2)/2`` in the balanced case. A global phase
offset of pi would swap sin^2 and cos^2; nothing observable fixes it.

With BS_B matched to BS_S, D2* is dark at ``phi = VERIFICATION_NULL_PHASE``
once the active correction is applied.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import NamedTuple, TypeVar

from scipy.optimize import minimize_scalar

from .fock import FockError, PureState, basis_state, tensor
from .measurement import (
    DetectorModel,
    OutcomeDistribution,
    click_distribution,
    coincidence_probability,
    condition_on_pattern,
    outcome_distribution,
    partition_on_modes,
)
from .optics import (
    DEFAULT_WAVELENGTH_UM,
    BeamSplitterParams,
    apply_beam_splitter,
    apply_loss,
    apply_pauli_z,
    apply_phase_shift,
    mirror_to_phase,
    phase_to_mirror,
)

MODE_S = "k_S"
MODE_ANCILLA = "k_a~"
MODE_A = "k_A"
MODE_B = "k_B"
MODE_D1 = "k_1"
MODE_D2 = "k_2"
MODE_D1_STAR = "k_1*"
MODE_D2_STAR = "k_2*"

ALICE_MODES = (MODE_D1, MODE_D2)
BOB_MODES = (MODE_D1_STAR, MODE_D2_STAR)
DETECTORS = ("D1", "D2", "D1*", "D2*")
ALICE_DETECTORS = ("D1", "D2")
PAIRS: tuple[tuple[str, str], ...] = (
    ("D1", "D1*"),
    ("D1", "D2*"),
    ("D2", "D1*"),
    ("D2", "D2*"),
)

#: Phase at which D2* stays dark under active correction with matched BS_B.
VERIFICATION_NULL_PHASE = math.pi

_UNIT_TOL = 1e-12
_DEGENERATE_TOL = 1e-12

T = TypeVar("T")
R = TypeVar("R")


class ProtocolError(FockError):
    """Inconsistent experiment configuration."""


class ImpossiblePatternError(RuntimeError):
    """An Alice pattern with zero amplitude under ideal HOM interference was reached."""


def pair_label(pair: tuple[str, str]) -> str:
    return f"{pair[0]}-{pair[1]}"


def parse_pair(label: str) -> tuple[str, str]:
    for pair in PAIRS:
        if pair_label(pair) == label:
            return pair
    raise ProtocolError(f"unknown detector pair {label!r}; expected one of {[pair_label(p) for p in PAIRS]}")


@dataclass(frozen=True)
class InputQubitSpec:
    """Real amplitudes of the qubit ``alpha|0> + beta|1>`` carried by k_S."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 1.0):
            raise ProtocolError(f"alpha, beta must lie in [0, 1], got {self.alpha}, {self.beta}")
        if abs(self.alpha**2 + self.beta**2 - 1.0) > _UNIT_TOL:
            raise ProtocolError(f"alpha^2 + beta^2 = {self.alpha**2 + self.beta**2!r} is not 1")

    @classmethod
    def from_alpha_sq(cls, alpha_sq: float) -> InputQubitSpec:
        if not 0.0 <= alpha_sq <= 1.0:
            raise ProtocolError(f"alpha^2 must lie in [0, 1], got {alpha_sq}")
        return cls(math.sqrt(alpha_sq), math.sqrt(1.0 - alpha_sq))

    @property
    def alpha_sq(self) -> float:
        return self.alpha**2

    def bs_s(self) -> BeamSplitterParams:
        """BS_S: reflected port is the ancilla (``r = alpha``), transmitted is k_S."""
        return BeamSplitterParams(self.alpha, self.beta, ("src_in", "src_vac"), (MODE_S, MODE_ANCILLA))


class BellOutcome(enum.Enum):
    PSI1 = "psi1"
    PSI2 = "psi2"
    PSI3 = "psi3"
    PSI4 = "psi4"

    @property
    def signatures(self) -> tuple[tuple[int, int], ...]:
        """Photon-number patterns on (D1, D2) belonging to this class."""
        return _SIGNATURES[self]

    @property
    def is_success(self) -> bool:
        return self in (BellOutcome.PSI3, BellOutcome.PSI4)


_SIGNATURES = {
    BellOutcome.PSI1: ((0, 0),),
    BellOutcome.PSI2: ((2, 0), (0, 2)),
    BellOutcome.PSI3: ((1, 0),),
    BellOutcome.PSI4: ((0, 1),),
}


def classify_alice(pattern: Sequence[int]) -> BellOutcome:
    """Map a photon-number pattern on (D1, D2) to Alice's Bell class."""
    pattern = tuple(int(n) for n in pattern)
    if len(pattern) != 2 or min(pattern) < 0 or sum(pattern) > 2:
        raise ProtocolError(f"invalid Alice pattern {pattern}")
    if pattern == (1, 1):
        raise ImpossiblePatternError("impossible pattern (1, 1) under ideal HOM interference")
    for outcome, sigs in _SIGNATURES.items():
        if pattern in sigs:
            return outcome
    raise AssertionError(pattern)  # unreachable: classes cover every pattern with <= 2 photons


def classify_event(alice_clicks: Sequence[int], bob_clicks: Sequence[int]) -> BellOutcome | None:
    """Classify a click record the way the coincidence electronics can.

    Alice silent with a Bob click is the idle PSI1 branch; an Alice click with
    Bob silent is PSI2. ``None`` when nothing fired.
    """
    d1, d2 = (int(c > 0) for c in alice_clicks)
    bob = any(c > 0 for c in bob_clicks)
    if not d1 and not d2:
        return BellOutcome.PSI1 if bob else None
    if not bob:
        return BellOutcome.PSI2
    if d1 and d2:
        raise ImpossiblePatternError("both Alice detectors fired together with Bob")
    return BellOutcome.PSI3 if d1 else BellOutcome.PSI4


# -- state preparation -------------------------------------------------------


@lru_cache(maxsize=256)
def prepare_source(spec: InputQubitSpec) -> PureState:
    """``alpha|0>_S|1>_a~ + beta|1>_S|0>_a~`` from one photon on BS_S."""
    photon = basis_state(("src_in", "src_vac"), (1, 0))
    return apply_beam_splitter(photon, spec.bs_s())


@lru_cache(maxsize=1)
def prepare_channel() -> PureState:
    """``(|1>_A|0>_B - |0>_A|1>_B)/sqrt(2)``: one photon fed to the second port of a 50:50 BS."""
    photon = basis_state(("ch_vac", "ch_in"), (0, 1))
    return apply_beam_splitter(photon, BeamSplitterParams.balanced(("ch_vac", "ch_in"), (MODE_A, MODE_B)))


def bs_a() -> BeamSplitterParams:
    return BeamSplitterParams.balanced((MODE_S, MODE_A), (MODE_D2, MODE_D1))


def bs_b(r_sq: float) -> BeamSplitterParams:
    return BeamSplitterParams.from_reflectance(r_sq, (MODE_ANCILLA, MODE_B), (MODE_D2_STAR, MODE_D1_STAR))


def assemble_total_state(spec: InputQubitSpec, phi: float = 0.0) -> PureState:
    """Source (with phase ``phi`` on k_S) times channel, over (k_S, k_a~, k_A, k_B)."""
    source = apply_phase_shift(prepare_source(spec), MODE_S, phi)
    return tensor(source, prepare_channel())


def alice_output_state(spec: InputQubitSpec, phi: float = 0.0) -> PureState:
    return apply_beam_splitter(assemble_total_state(spec, phi), bs_a())


def bell_branch_probabilities(spec: InputQubitSpec, phi: float = 0.0) -> dict[BellOutcome, float]:
    """Probability of each Bell class from ideal photon counting at D1, D2."""
    dist = outcome_distribution(alice_output_state(spec, phi), ALICE_MODES)
    probs = {outcome: 0.0 for outcome in BellOutcome}
    for pattern, p in dist.probs.items():
        probs[classify_alice(pattern)] += p
    return probs


def teleported_state(
    spec: InputQubitSpec, outcome: BellOutcome, phi: float = 0.0, correct: bool = False
) -> PureState:
    """Bob+ancilla state over (k_B, k_a~) heralded by a PSI3 or PSI4 detection.

    With ``correct`` the sigma_z correction is applied to PSI4 branches.
    """
    if not outcome.is_success:
        raise ProtocolError(f"{outcome.name} does not herald a teleported state")
    (pattern,) = outcome.signatures
    p, rest = condition_on_pattern(alice_output_state(spec, phi), ALICE_MODES, pattern)
    if rest is None:
        raise ProtocolError(f"{outcome.name} has zero probability")
    if correct and outcome is BellOutcome.PSI4:
        rest = apply_pauli_z(rest, MODE_B)
    return rest.reorder((MODE_B, MODE_ANCILLA))


# -- experiment configuration ------------------------------------------------


@dataclass(frozen=True)
class PhaseSweep:
    """Endpoint-exclusive phase grid ``start + k (stop - start) / steps``.

    If ``mirror`` is set, ``start``/``stop`` are mirror positions in
    micrometres and are converted with ``wavelength_um``.
    """

    start: float = 0.0
    stop: float = 2.0 * math.pi
    steps: int = 64
    mirror: bool = False
    wavelength_um: float = DEFAULT_WAVELENGTH_UM

    def __post_init__(self) -> None:
        if self.steps < 2:
            raise ProtocolError(f"sweep needs at least 2 steps, got {self.steps}")
        if self.wavelength_um <= 0:
            raise ProtocolError(f"wavelength must be positive, got {self.wavelength_um}")

    def phases(self) -> list[float]:
        vals = [self.start + k * (self.stop - self.start) / self.steps for k in range(self.steps)]
        if self.mirror:
            return [mirror_to_phase(x, self.wavelength_um) for x in vals]
        return vals


@dataclass(frozen=True)
class ExperimentConfig:
    """Free parameters of one run. ``bsb_r_sq=None`` matches BS_B to BS_S."""

    alpha_sq: float = 0.5
    bsb_r_sq: float | None = None
    sweep: PhaseSweep = field(default_factory=PhaseSweep)
    detector: DetectorModel = field(default_factory=DetectorModel)
    variant: str = "passive"
    shots: int = 0
    seed: int = 0
    normalization: str = "conditional"

    def __post_init__(self) -> None:
        if self.variant not in ("passive", "active"):
            raise ProtocolError(f"variant must be 'passive' or 'active', got {self.variant!r}")
        if self.normalization not in ("joint", "conditional"):
            raise ProtocolError(f"normalization must be 'joint' or 'conditional', got {self.normalization!r}")
        if self.shots < 0:
            raise ProtocolError(f"shots must be >= 0, got {self.shots}")
        if not 0 <= self.seed < 2**64:
            raise ProtocolError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        InputQubitSpec.from_alpha_sq(self.alpha_sq)
        if self.bsb_r_sq is not None and not 0.0 <= self.bsb_r_sq <= 1.0:
            raise ProtocolError(f"bsb_r_sq must lie in [0, 1], got {self.bsb_r_sq}")

    @property
    def input(self) -> InputQubitSpec:
        return InputQubitSpec.from_alpha_sq(self.alpha_sq)

    @property
    def effective_bsb_r_sq(self) -> float:
        return self.alpha_sq if self.bsb_r_sq is None else self.bsb_r_sq

    def with_(self, **changes) -> ExperimentConfig:
        return replace(self, **changes)


@dataclass
class FringeRecord:
    """Coincidence statistics of the four detector pairs at one phase.

    ``joint`` are absolute probabilities per source emission; ``conditional``
    are normalized over the four coincidence pairs (the success ensemble).
    """

    phi: float
    mirror_um: float
    joint: dict[tuple[str, str], float]
    conditional: dict[tuple[str, str], float]
    counts: dict[tuple[str, str], int] | None = None

    def value(self, pair: tuple[str, str], normalization: str = "conditional") -> float:
        return (self.conditional if normalization == "conditional" else self.joint)[pair]


# -- pipeline ----------------------------------------------------------------


def _alice_branches(config: ExperimentConfig, phi: float):
    """Yield ``(alice_click_pattern, probability, remaining_state)`` branches."""
    state = alice_output_state(config.input, phi)
    det = config.detector
    if det.eta < 1.0:
        for mode in ALICE_MODES:
            state = apply_loss(state, mode, det.eta, f"loss:{mode}")
    for pattern, (p, rest) in sorted(partition_on_modes(state, ALICE_MODES).items()):
        clicks = pattern if det.resolving else tuple(int(n > 0) for n in pattern)
        yield clicks, p, rest


def _bob_distribution(config: ExperimentConfig, rest: PureState, trigger: bool) -> OutcomeDistribution:
    if trigger:
        rest = apply_pauli_z(rest, MODE_B)
    verified = apply_beam_splitter(rest, bs_b(config.effective_bsb_r_sq))
    return click_distribution(verified, [(m, config.detector) for m in BOB_MODES], ("D1*", "D2*"))


def detector_distribution(config: ExperimentConfig, phi: float) -> OutcomeDistribution:
    """Joint click statistics of (D1, D2, D1*, D2*) for one source emission.

    In the active variant a D2 click triggers sigma_z on k_B before BS_B.
    """
    acc: dict[tuple[int, ...], float] = {}
    for clicks, p, rest in _alice_branches(config, phi):
        trigger = config.variant == "active" and clicks[1] > 0
        for bob, q in _bob_distribution(config, rest, trigger).probs.items():
            key = tuple(clicks) + bob
            acc[key] = acc.get(key, 0.0) + p * q
    return OutcomeDistribution(DETECTORS, acc)


def bob_conditionals(config: ExperimentConfig, phi: float) -> dict[BellOutcome, OutcomeDistribution]:
    """Bob's (D1*, D2*) click statistics conditioned on Alice's Bell class.

    The class is read from the photon numbers reaching D1, D2 (before detector
    loss), so PSI2 bunching never leaks into PSI3/PSI4. In the active variant
    the PSI4 branch is corrected.
    """
    state = alice_output_state(config.input, phi)
    out = {}
    for outcome in (BellOutcome.PSI3, BellOutcome.PSI4):
        (pattern,) = outcome.signatures
        _, rest = condition_on_pattern(state, ALICE_MODES, pattern)
        trigger = config.variant == "active" and outcome is BellOutcome.PSI4
        out[outcome] = _bob_distribution(config, rest, trigger)
    return out


def total_variation(a: OutcomeDistribution, b: OutcomeDistribution) -> float:
    keys = set(a.probs) | set(b.probs)
    return 0.5 * math.fsum(abs(a.prob(k) - b.prob(k)) for k in keys)


def fringe_record(config: ExperimentConfig, phi: float) -> FringeRecord:
    dist = detector_distribution(config, phi)
    joint = {pair: coincidence_probability(dist, pair, silent=ALICE_DETECTORS) for pair in PAIRS}
    total = math.fsum(joint.values())
    conditional = {pair: (p / total if total > 0 else 0.0) for pair, p in joint.items()}
    return FringeRecord(
        phi=phi,
        mirror_um=phase_to_mirror(phi, config.sweep.wavelength_um),
        joint=joint,
        conditional=conditional,
    )


def run_passive(config: ExperimentConfig, phi: float) -> FringeRecord:
    """Bob forwards his mode unmodified to the verification stage."""
    if config.variant != "passive":
        raise ProtocolError("run_passive needs variant='passive'")
    return fringe_record(config, phi)


def run_active(config: ExperimentConfig, phi: float) -> FringeRecord:
    """Bob applies sigma_z to k_B whenever D2 fires."""
    if config.variant != "active":
        raise ProtocolError("run_active needs variant='active'")
    return fringe_record(config, phi)


def run_protocol(config: ExperimentConfig, phi: float) -> FringeRecord:
    return run_active(config, phi) if config.variant == "active" else run_passive(config, phi)


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    """Order-preserving map; results are indexed by input position whatever the schedule."""
    items = list(items)
    if not workers or workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def fringe_sweep(config: ExperimentConfig, workers: int | None = None) -> list[FringeRecord]:
    return parallel_map(lambda phi: run_protocol(config, phi), config.sweep.phases(), workers)


# -- visibility ----------------------------------------------------------------


class Visibility(NamedTuple):
    value: float
    degenerate: bool


class VisibilityPoint(NamedTuple):
    alpha_sq: float
    visibility: float
    degenerate: bool


def fringe_visibility(values: Sequence[float]) -> Visibility:
    """``(max - min) / (max + min)``; flat or empty-signal fringes give ``V = 0``."""
    hi, lo = max(values), min(values)
    if hi + lo <= 0.0 or hi - lo <= _DEGENERATE_TOL * (hi + lo):
        return Visibility(0.0, True)
    return Visibility((hi - lo) / (hi + lo), False)


def visibility_at(config: ExperimentConfig, pair: tuple[str, str]) -> Visibility:
    records = fringe_sweep(config)
    return fringe_visibility([r.value(pair, config.normalization) for r in records])


def visibility_sweep(
    config: ExperimentConfig,
    alpha_sq_grid: Sequence[float],
    pair: tuple[str, str],
    workers: int | None = None,
) -> list[VisibilityPoint]:
    """Fringe visibility of ``pair`` for each input splitting ``alpha^2``.

    Each grid point runs the full phase sweep of ``config.sweep``; BS_B stays
    as configured (``bsb_r_sq=None`` tracks ``alpha^2``).
    """

    def point(a2: float) -> VisibilityPoint:
        v = visibility_at(config.with_(alpha_sq=a2), pair)
        return VisibilityPoint(a2, v.value, v.degenerate)

    return parallel_map(point, alpha_sq_grid, workers)


def locate_visibility_peak(
    config: ExperimentConfig, pair: tuple[str, str], bounds: tuple[float, float]
) -> VisibilityPoint:
    """Maximize sweep visibility over ``alpha^2`` within ``bounds``."""
    res = minimize_scalar(
        lambda a2: -visibility_at(config.with_(alpha_sq=float(a2)), pair).value,
        bounds=bounds,
        method="bounded",
        options={"xatol": 1e-10},
    )
    a2 = float(res.x)
    v = visibility_at(config.with_(alpha_sq=a2), pair)
    return VisibilityPoint(a2, v.value, v.degenerate)
