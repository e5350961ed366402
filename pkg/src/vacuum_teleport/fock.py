"""Sparse pure states of a few bosonic modes with a bounded photon number.

A :class:`PureState` maps occupation tuples (one entry per mode of a
:class:`ModeRegistry`) to complex amplitudes. Only non-negligible terms are
stored, so a two-photon state over eight modes stays a handful of entries.
All objects are immutable; every operation returns a new state.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from types import MappingProxyType

#: Amplitudes with modulus below this are treated as floating-point dust.
EPS_AMP = 1e-14
DEFAULT_N_MAX = 2
MAX_N_MAX = 4

Occupation = tuple[int, ...]


class FockError(ValueError):
    """Invalid state construction or incompatible operands."""


class PhotonCapError(FockError):
    """An occupation exceeds the configured per-mode photon cap."""


class RegistryMismatchError(FockError):
    """Operands are indexed against different (or overlapping) mode sets."""


@dataclass(frozen=True)
class ModeRegistry:
    """Ordered, immutable set of named optical modes."""

    modes: tuple[str, ...]

    def __post_init__(self) -> None:
        modes = tuple(self.modes)
        object.__setattr__(self, "modes", modes)
        if len(set(modes)) != len(modes):
            raise FockError(f"duplicate mode names in {modes}")
        if not all(isinstance(m, str) and m for m in modes):
            raise FockError(f"mode names must be non-empty strings: {modes}")

    def __len__(self) -> int:
        return len(self.modes)

    def __contains__(self, mode: object) -> bool:
        return mode in self.modes

    def __iter__(self) -> Iterator[str]:
        return iter(self.modes)

    def index(self, mode: str) -> int:
        try:
            return self.modes.index(mode)
        except ValueError:
            raise FockError(f"unknown mode {mode!r}; registry has {self.modes}") from None

    def concat(self, other: ModeRegistry) -> ModeRegistry:
        overlap = set(self.modes) & set(other.modes)
        if overlap:
            raise RegistryMismatchError(f"overlapping modes: {sorted(overlap)}")
        return ModeRegistry(self.modes + other.modes)

    def rename(self, mapping: Mapping[str, str]) -> ModeRegistry:
        for old in mapping:
            self.index(old)
        return ModeRegistry(tuple(mapping.get(m, m) for m in self.modes))


def _registry(modes: ModeRegistry | Sequence[str]) -> ModeRegistry:
    return modes if isinstance(modes, ModeRegistry) else ModeRegistry(tuple(modes))


def _check_occupation(occ: Sequence[int], size: int, n_max: int) -> Occupation:
    occ = tuple(int(n) for n in occ)
    if len(occ) != size:
        raise FockError(f"occupation {occ} has {len(occ)} entries, registry has {size}")
    for n in occ:
        if n < 0:
            raise FockError(f"negative occupation in {occ}")
        if n > n_max:
            raise PhotonCapError(f"occupation {occ} exceeds photon cap n_max={n_max}")
    return occ


@dataclass(frozen=True)
class PureState:
    """Sparse complex amplitudes over occupation tuples of ``registry``.

    Construct through :func:`basis_state`, :func:`superpose`, :func:`tensor` or
    :meth:`from_terms`; the constructor itself validates and prunes.
    """

    registry: ModeRegistry
    terms: Mapping[Occupation, complex]
    n_max: int = DEFAULT_N_MAX

    def __post_init__(self) -> None:
        if not 0 <= self.n_max <= MAX_N_MAX:
            raise FockError(f"n_max must lie in [0, {MAX_N_MAX}], got {self.n_max}")
        size = len(self.registry)
        clean: dict[Occupation, complex] = {}
        for occ, amp in self.terms.items():
            amp = complex(amp)
            if abs(amp) < EPS_AMP:
                continue
            clean[_check_occupation(occ, size, self.n_max)] = amp
        object.__setattr__(self, "terms", MappingProxyType(clean))

    @classmethod
    def from_terms(
        cls,
        modes: ModeRegistry | Sequence[str],
        terms: Mapping[Sequence[int], complex] | Iterable[tuple[Sequence[int], complex]],
        n_max: int = DEFAULT_N_MAX,
    ) -> PureState:
        """Build a state from raw amplitudes, summing repeated occupations."""
        pairs = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Occupation, complex] = {}
        for occ, amp in pairs:
            key = tuple(int(n) for n in occ)
            acc[key] = acc.get(key, 0j) + complex(amp)
        return cls(_registry(modes), acc, n_max)

    @property
    def modes(self) -> tuple[str, ...]:
        return self.registry.modes

    def __len__(self) -> int:
        return len(self.terms)

    def amplitude(self, occ: Sequence[int]) -> complex:
        return self.terms.get(tuple(occ), 0j)

    def norm_sq(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.terms.values())

    def normalize(self) -> PureState:
        n2 = self.norm_sq()
        if n2 <= 0.0:
            raise FockError("cannot normalize a zero state")
        scale = 1.0 / math.sqrt(n2)
        return PureState(self.registry, {k: a * scale for k, a in self.terms.items()}, self.n_max)

    def scale(self, factor: complex) -> PureState:
        return PureState(self.registry, {k: a * factor for k, a in self.terms.items()}, self.n_max)

    def photon_numbers(self) -> set[int]:
        """Distinct total photon numbers present in the superposition."""
        return {sum(occ) for occ in self.terms}

    def occupation_of(self, mode: str) -> set[int]:
        i = self.registry.index(mode)
        return {occ[i] for occ in self.terms}

    def relabel(self, mapping: Mapping[str, str]) -> PureState:
        """Rename modes without touching amplitudes."""
        return PureState(self.registry.rename(mapping), self.terms, self.n_max)

    def reorder(self, modes: Sequence[str]) -> PureState:
        """Permute the registry into ``modes`` (same set of names)."""
        if sorted(modes) != sorted(self.modes):
            raise RegistryMismatchError(f"cannot reorder {self.modes} into {tuple(modes)}")
        perm = [self.registry.index(m) for m in modes]
        terms = {tuple(occ[i] for i in perm): a for occ, a in self.terms.items()}
        return PureState(ModeRegistry(tuple(modes)), terms, self.n_max)

    def with_mode(self, mode: str) -> PureState:
        """Append a vacuum mode to the registry."""
        reg = self.registry.concat(ModeRegistry((mode,)))
        return PureState(reg, {occ + (0,): a for occ, a in self.terms.items()}, self.n_max)

    def to_text(self) -> str:
        """Canonical serialization, one ``n1,...,nk : re,im`` line per term.

        Lines are sorted by occupation and the global phase is fixed so the
        first stored amplitude is real and positive.
        """
        return "".join(line + "\n" for line in _text_lines(self))

    @classmethod
    def from_text(
        cls, modes: ModeRegistry | Sequence[str], text: str, n_max: int = DEFAULT_N_MAX
    ) -> PureState:
        terms = []
        for raw in text.splitlines():
            raw = raw.strip()
            if not raw or raw.startswith("#"):
                continue
            occ_part, amp_part = (p.strip() for p in raw.split(":"))
            re, im = (float(x) for x in amp_part.split(","))
            terms.append((tuple(int(n) for n in occ_part.split(",")), complex(re, im)))
        return cls.from_terms(modes, terms, n_max)


def _fmt(x: float) -> str:
    if abs(x) < EPS_AMP:
        x = 0.0
    return f"{x + 0.0:.15g}"


def _text_lines(state: PureState) -> list[str]:
    keys = sorted(state.terms)
    phase = 1.0 + 0j
    if keys:
        first = state.terms[keys[0]]
        phase = cmath.exp(-1j * cmath.phase(first))
    lines = []
    for occ in keys:
        amp = state.terms[occ] * phase
        lines.append(f"{','.join(map(str, occ))} : {_fmt(amp.real)},{_fmt(amp.imag)}")
    return lines


def basis_state(
    modes: ModeRegistry | Sequence[str], occ: Sequence[int], n_max: int = DEFAULT_N_MAX
) -> PureState:
    """Fock ket ``|occ>`` with amplitude 1."""
    reg = _registry(modes)
    return PureState(reg, {_check_occupation(occ, len(reg), n_max): 1.0 + 0j}, n_max)


def vacuum(modes: ModeRegistry | Sequence[str], n_max: int = DEFAULT_N_MAX) -> PureState:
    reg = _registry(modes)
    return basis_state(reg, (0,) * len(reg), n_max)


def _require_same_registry(a: PureState, b: PureState) -> None:
    if a.registry != b.registry:
        raise RegistryMismatchError(f"registry mismatch: {a.modes} vs {b.modes}")


def superpose(terms: Sequence[tuple[complex, PureState]]) -> PureState:
    """Normalized linear combination ``sum(c_i |psi_i>)``."""
    if not terms:
        raise FockError("superpose needs at least one term")
    first = terms[0][1]
    acc: dict[Occupation, complex] = {}
    n_max = first.n_max
    for coeff, state in terms:
        _require_same_registry(first, state)
        n_max = max(n_max, state.n_max)
        for occ, amp in state.terms.items():
            acc[occ] = acc.get(occ, 0j) + complex(coeff) * amp
    combined = PureState(first.registry, acc, n_max)
    if combined.norm_sq() <= 0.0:
        raise FockError("superposition has zero norm")
    return combined.normalize()


def inner_product(a: PureState, b: PureState) -> complex:
    """``<a|b>``, antilinear in the first argument."""
    _require_same_registry(a, b)
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = 0j
    for occ, amp in small.terms.items():
        other = large.terms.get(occ)
        if other is None:
            continue
        pa, pb = (amp, other) if small is a else (other, amp)
        total += pa.conjugate() * pb
    return total


def fidelity(a: PureState, b: PureState) -> float:
    """``|<a|b>|^2`` for normalized inputs."""
    return abs(inner_product(a, b)) ** 2


def tensor(a: PureState, b: PureState) -> PureState:
    """Product state over the concatenated registries (``a`` modes first)."""
    reg = a.registry.concat(b.registry)
    terms = {
        oa + ob: amp_a * amp_b
        for oa, amp_a in a.terms.items()
        for ob, amp_b in b.terms.items()
    }
    return PureState(reg, terms, max(a.n_max, b.n_max))
