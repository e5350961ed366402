"""Born-rule statistics, post-selection and click detection."""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from types import MappingProxyType

from .fock import FockError, ModeRegistry, Occupation, PureState
from .optics import apply_loss

Pattern = tuple[int, ...]


@dataclass(frozen=True)
class DetectorModel:
    """Detector with efficiency ``eta``; threshold (click/no-click) unless ``resolving``."""

    eta: float = 1.0
    resolving: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta <= 1.0:
            raise FockError(f"detector efficiency must lie in [0, 1], got {self.eta}")


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities of joint patterns over the detectors named in ``labels``.

    For threshold detectors a pattern entry is 1 (click) or 0; for resolving
    detectors it is the photon count.
    """

    labels: tuple[str, ...]
    probs: Mapping[Pattern, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(set(self.labels)) != len(self.labels):
            raise FockError(f"duplicate detector labels {self.labels}")
        probs = {}
        for pattern, p in self.probs.items():
            pattern = tuple(int(n) for n in pattern)
            if len(pattern) != len(self.labels):
                raise FockError(f"pattern {pattern} does not match labels {self.labels}")
            if p < 0:
                raise FockError(f"negative probability {p} for {pattern}")
            if p > 0:
                probs[pattern] = probs.get(pattern, 0.0) + float(p)
        object.__setattr__(self, "probs", MappingProxyType(probs))

    def total(self) -> float:
        return math.fsum(self.probs.values())

    def prob(self, pattern: Sequence[int]) -> float:
        return self.probs.get(tuple(pattern), 0.0)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise FockError(f"unknown detector {label!r}; have {self.labels}") from None

    def marginal(self, labels: Sequence[str]) -> OutcomeDistribution:
        idx = [self.index(lbl) for lbl in labels]
        acc: dict[Pattern, float] = {}
        for pattern, p in self.probs.items():
            key = tuple(pattern[i] for i in idx)
            acc[key] = acc.get(key, 0.0) + p
        return OutcomeDistribution(tuple(labels), acc)

    def relabel(self, labels: Sequence[str]) -> OutcomeDistribution:
        if len(labels) != len(self.labels):
            raise FockError("relabel needs one label per detector")
        return OutcomeDistribution(tuple(labels), self.probs)

    def thresholded(self) -> OutcomeDistribution:
        """Collapse photon counts to click (1) / no click (0)."""
        acc: dict[Pattern, float] = {}
        for pattern, p in self.probs.items():
            key = tuple(1 if n > 0 else 0 for n in pattern)
            acc[key] = acc.get(key, 0.0) + p
        return OutcomeDistribution(self.labels, acc)

    def click_probability(self, label: str) -> float:
        i = self.index(label)
        return math.fsum(p for pattern, p in self.probs.items() if pattern[i] > 0)

    def combine(self, weight: float, other: OutcomeDistribution) -> OutcomeDistribution:
        """``self + weight * other`` on identical labels (used to mix branches)."""
        if other.labels != self.labels:
            raise FockError(f"label mismatch {self.labels} vs {other.labels}")
        acc = dict(self.probs)
        for pattern, p in other.probs.items():
            acc[pattern] = acc.get(pattern, 0.0) + weight * p
        return OutcomeDistribution(self.labels, acc)

    def to_text(self) -> str:
        lines = [f"# {','.join(self.labels)}"]
        for pattern in sorted(self.probs):
            lines.append(f"{','.join(map(str, pattern))} : {self.probs[pattern]:.15g}")
        return "\n".join(lines) + "\n"


def outcome_distribution(state: PureState, modes: Sequence[str]) -> OutcomeDistribution:
    """Photon-number statistics on ``modes``, marginalizing all other modes."""
    idx = [state.registry.index(m) for m in modes]
    norm = state.norm_sq()
    acc: dict[Pattern, float] = {}
    for occ, amp in state.terms.items():
        key = tuple(occ[i] for i in idx)
        acc[key] = acc.get(key, 0.0) + abs(amp) ** 2 / norm
    return OutcomeDistribution(tuple(modes), acc)


def condition_on_pattern(
    state: PureState, modes: Sequence[str], pattern: Sequence[int]
) -> tuple[float, PureState | None]:
    """Project ``modes`` onto ``pattern``.

    Returns the pattern's probability and the renormalized state of the
    remaining modes, or ``(0.0, None)`` when the pattern cannot occur.
    """
    pattern = tuple(int(n) for n in pattern)
    if len(pattern) != len(modes):
        raise FockError(f"pattern {pattern} does not match modes {tuple(modes)}")
    idx = [state.registry.index(m) for m in modes]
    keep = [i for i in range(len(state.registry)) if i not in idx]
    norm = state.norm_sq()
    terms: dict[Occupation, complex] = {}
    for occ, amp in state.terms.items():
        if tuple(occ[i] for i in idx) == pattern:
            terms[tuple(occ[i] for i in keep)] = amp
    p = math.fsum(abs(a) ** 2 for a in terms.values()) / norm
    if not terms or p == 0.0:
        return 0.0, None
    registry = ModeRegistry(tuple(state.modes[i] for i in keep))
    return p, PureState(registry, terms, state.n_max).normalize()


def partition_on_modes(
    state: PureState, modes: Sequence[str]
) -> dict[Pattern, tuple[float, PureState]]:
    """Every nonzero branch of :func:`condition_on_pattern`, in one pass."""
    idx = [state.registry.index(m) for m in modes]
    keep = [i for i in range(len(state.registry)) if i not in idx]
    registry = ModeRegistry(tuple(state.modes[i] for i in keep))
    norm = state.norm_sq()
    groups: dict[Pattern, dict[Occupation, complex]] = {}
    for occ, amp in state.terms.items():
        groups.setdefault(tuple(occ[i] for i in idx), {})[tuple(occ[i] for i in keep)] = amp
    out = {}
    for pattern, terms in groups.items():
        p = math.fsum(abs(a) ** 2 for a in terms.values()) / norm
        if p > 0.0:
            out[pattern] = (p, PureState(registry, terms, state.n_max).normalize())
    return out


def _fresh_name(state: PureState, base: str) -> str:
    name, k = base, 1
    while name in state.registry:
        name = f"{base}#{k}"
        k += 1
    return name


def click_distribution(
    state: PureState,
    detectors: Sequence[tuple[str, DetectorModel]],
    labels: Sequence[str] | None = None,
) -> OutcomeDistribution:
    """Detector statistics including efficiency.

    Each detector's loss is applied as a beam splitter into a fresh vacuum
    mode, which is then traced out. Threshold detectors report 1 for any
    surviving photon.
    """
    modes = [m for m, _ in detectors]
    for mode, det in detectors:
        if det.eta < 1.0:
            state = apply_loss(state, mode, det.eta, _fresh_name(state, f"loss:{mode}"))
    dist = outcome_distribution(state, modes)
    acc: dict[Pattern, float] = {}
    for pattern, p in dist.probs.items():
        key = tuple(
            n if det.resolving else int(n > 0) for n, (_, det) in zip(pattern, detectors)
        )
        acc[key] = acc.get(key, 0.0) + p
    return OutcomeDistribution(tuple(labels) if labels is not None else tuple(modes), acc)


def coincidence_probability(
    dist: OutcomeDistribution, pair: tuple[str, str], silent: Sequence[str] = ()
) -> float:
    """Probability that both detectors in ``pair`` fire.

    Detectors listed in ``silent`` must additionally stay dark, which is how
    post-selected coincidences exclude events with both Alice detectors firing.
    """
    i, j = dist.index(pair[0]), dist.index(pair[1])
    quiet = [dist.index(s) for s in silent if s not in pair]
    return math.fsum(
        p
        for pattern, p in dist.probs.items()
        if pattern[i] > 0 and pattern[j] > 0 and all(pattern[k] == 0 for k in quiet)
    )
