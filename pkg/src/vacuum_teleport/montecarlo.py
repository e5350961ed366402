"""Seeded Monte Carlo emulation of coincidence counting.

Every phase point draws from its own Philox (counter-based) stream keyed by
``(seed, point_index)``, so results do not depend on evaluation order or on
how points are distributed over workers.
"""

from __future__ import annotations

import json
import math
import time
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .fitting import FitError, FitResult, fit_visibility
from .measurement import OutcomeDistribution, outcome_distribution
from .protocol import (
    ALICE_DETECTORS,
    ALICE_MODES,
    PAIRS,
    BellOutcome,
    ExperimentConfig,
    FringeRecord,
    InputQubitSpec,
    ProtocolError,
    alice_output_state,
    classify_alice,
    classify_event,
    detector_distribution,
    fringe_record,
    pair_label,
    parallel_map,
)

RNG_ALGORITHM = "numpy.random.Philox(4x64-10) via SeedSequence(seed, spawn_key=(point,))"


def point_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for sweep point ``index``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def sample_patterns(
    dist: OutcomeDistribution, shots: int, rng: np.random.Generator
) -> dict[tuple[int, ...], int]:
    """Tally ``shots`` independent draws from ``dist``."""
    patterns = sorted(dist.probs)
    probs = np.array([dist.probs[p] for p in patterns])
    counts = rng.multinomial(shots, probs / probs.sum())
    return {p: int(c) for p, c in zip(patterns, counts) if c}


def sample_bell_outcomes(
    spec: InputQubitSpec, phi: float, shots: int, rng: np.random.Generator
) -> Counter[BellOutcome]:
    """Draw photon-number patterns at (D1, D2) shot by shot and classify them."""
    dist = outcome_distribution(alice_output_state(spec, phi), ALICE_MODES)
    patterns = sorted(dist.probs)
    probs = np.array([dist.probs[p] for p in patterns])
    draws = rng.choice(len(patterns), size=shots, p=probs / probs.sum())
    tally: Counter[BellOutcome] = Counter()
    for idx, n in zip(*np.unique(draws, return_counts=True)):
        tally[classify_alice(patterns[idx])] += int(n)
    return tally


def _pair_counts(counts: dict[tuple[int, ...], int]) -> dict[tuple[str, str], int]:
    # detector order is (D1, D2, D1*, D2*)
    col = {"D1": 0, "D2": 1, "D1*": 2, "D2*": 3}
    out = {}
    for pair in PAIRS:
        i, j = col[pair[0]], col[pair[1]]
        quiet = [col[d] for d in ALICE_DETECTORS if d not in pair]
        out[pair] = sum(
            n for pat, n in counts.items() if pat[i] and pat[j] and not any(pat[k] for k in quiet)
        )
    return out


def _bell_tally(counts: dict[tuple[int, ...], int]) -> dict[str, int]:
    tally = {o.value: 0 for o in BellOutcome}
    tally["none"] = 0
    for pat, n in counts.items():
        outcome = classify_event(pat[:2], pat[2:])
        tally[outcome.value if outcome else "none"] += n
    return tally


@dataclass
class RunReport:
    """Outcome of a Monte Carlo run.

    ``elapsed_s`` is kept out of the default serialization so reports with
    the same config and seed are byte-identical.
    """

    config: ExperimentConfig
    records: list[FringeRecord]
    bell_tallies: list[dict[str, int]]
    fits: dict[tuple[str, str], FitResult | None]
    seed: int
    rng_algorithm: str = RNG_ALGORITHM
    elapsed_s: float = 0.0

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "config": config_to_dict(self.config),
            "seed": self.seed,
            "rng_algorithm": self.rng_algorithm,
            "records": [record_to_dict(r) for r in self.records],
            "bell_tallies": self.bell_tallies,
            "fits": {
                pair_label(p): (f.as_dict() if f is not None else None) for p, f in self.fits.items()
            },
        }
        if include_timing:
            out["elapsed_s"] = self.elapsed_s
        return out

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True, allow_nan=True) + "\n"


def config_to_dict(config: ExperimentConfig) -> dict:
    sweep = config.sweep
    key = "mirror" if sweep.mirror else "phase"
    sweep_dict = {"start": sweep.start, "stop": sweep.stop, "steps": sweep.steps}
    if sweep.mirror:
        sweep_dict = {
            "start_um": sweep.start,
            "stop_um": sweep.stop,
            "steps": sweep.steps,
            "lambda_um": sweep.wavelength_um,
        }
    return {
        "alpha_sq": config.alpha_sq,
        "bsb_r_sq": config.effective_bsb_r_sq,
        key: sweep_dict,
        "eta": config.detector.eta,
        "variant": config.variant,
        "shots": config.shots,
        "seed": config.seed,
        "normalization": config.normalization,
    }


def record_to_dict(record: FringeRecord) -> dict:
    out = {
        "phi_rad": record.phi,
        "mirror_um": record.mirror_um,
        "p_joint": {pair_label(p): v for p, v in record.joint.items()},
        "p_conditional": {pair_label(p): v for p, v in record.conditional.items()},
    }
    if record.counts is not None:
        out["counts"] = {pair_label(p): v for p, v in record.counts.items()}
    return out


def simulate_point(config: ExperimentConfig, index: int, phi: float) -> tuple[FringeRecord, dict[str, int]]:
    record = fringe_record(config, phi)
    counts = sample_patterns(detector_distribution(config, phi), config.shots, point_rng(config.seed, index))
    record.counts = _pair_counts(counts)
    return record, _bell_tally(counts)


def simulate_counts(config: ExperimentConfig, workers: int | None = None) -> RunReport:
    """Sample ``config.shots`` source emissions at every phase of the sweep.

    Each emission yields one joint click pattern of (D1, D2, D1*, D2*); pair
    tallies count coincidences with the other Alice detector dark. Fringes of
    every pair are fitted when the sweep covers a full period.
    """
    if config.shots <= 0:
        raise ProtocolError("Monte Carlo needs shots > 0")
    t0 = time.perf_counter()
    phases = config.sweep.phases()
    results = parallel_map(lambda item: simulate_point(config, *item), list(enumerate(phases)), workers)
    records = [r for r, _ in results]
    fits: dict[tuple[str, str], FitResult | None] = {}
    for pair in PAIRS:
        try:
            fits[pair] = fit_visibility(phases, [r.counts[pair] for r in records])
        except FitError:
            fits[pair] = None
    return RunReport(
        config=config,
        records=records,
        bell_tallies=[t for _, t in results],
        fits=fits,
        seed=config.seed,
        elapsed_s=time.perf_counter() - t0,
    )


def degraded_fringe_counts(
    values: Sequence[float],
    visibility: float,
    total_counts: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Poisson counts of a fringe whose contrast is reduced to ``visibility``.

    ``values`` is an ideal unit-visibility fringe; it is mixed with its mean
    (an incoherent background such as residual mode mismatch) and scaled so
    the sweep holds ``total_counts`` expected counts.
    """
    v = np.asarray(values, dtype=float)
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility}")
    mixed = visibility * v + (1.0 - visibility) * v.mean()
    rate = mixed * (total_counts / mixed.sum())
    return rng.poisson(rate)


def binomial_sigma(n: int, p: float) -> float:
    return math.sqrt(n * p * (1.0 - p))
