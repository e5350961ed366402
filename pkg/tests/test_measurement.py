import math
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import threshold_click_probability
from vacuum_teleport.fock import FockError, PureState, basis_state, inner_product
from vacuum_teleport.measurement import (
    DetectorModel,
    OutcomeDistribution,
    click_distribution,
    coincidence_probability,
    condition_on_pattern,
    outcome_distribution,
    partition_on_modes,
)
from vacuum_teleport.optics import BeamSplitterParams, apply_beam_splitter
from vacuum_teleport.protocol import ALICE_MODES, InputQubitSpec, alice_output_state

GOLDEN = Path(__file__).parent / "golden"
H = math.sqrt(0.5)
SINGLET = PureState.from_terms(["k_A", "k_B"], {(1, 0): H, (0, 1): -H})


@st.composite
def three_mode_states(draw):
    occ = st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2))
    amp = st.complex_numbers(min_magnitude=1e-2, max_magnitude=5, allow_nan=False, allow_infinity=False)
    terms = draw(st.dictionaries(occ, amp, min_size=1, max_size=10))
    return PureState.from_terms(("a", "b", "c"), terms).normalize()


class TestOutcomeDistribution:
    def test_singlet(self):
        dist = outcome_distribution(SINGLET, ["k_A", "k_B"])
        assert dist.prob((1, 0)) == pytest.approx(0.5, abs=1e-15)
        assert dist.prob((0, 1)) == pytest.approx(0.5, abs=1e-15)

    def test_basis_state(self):
        dist = outcome_distribution(basis_state(["k_1", "k_2"], [1, 0]), ["k_1", "k_2"])
        assert dict(dist.probs) == {(1, 0): 1.0}

    def test_total_state_after_bs_a(self):
        dist = outcome_distribution(alice_output_state(InputQubitSpec.from_alpha_sq(0.3)), ALICE_MODES)
        assert dist.prob((0, 0)) == pytest.approx(0.15, abs=1e-12)
        assert dist.prob((2, 0)) + dist.prob((0, 2)) == pytest.approx(0.35, abs=1e-12)
        assert dist.prob((1, 0)) == pytest.approx(0.25, abs=1e-12)
        assert dist.prob((0, 1)) == pytest.approx(0.25, abs=1e-12)
        assert dist.prob((1, 1)) == 0.0

    def test_unknown_mode(self):
        with pytest.raises(FockError):
            outcome_distribution(SINGLET, ["k_X"])

    @given(three_mode_states(), st.sampled_from([["a"], ["b", "c"], ["c", "a"], ["a", "b", "c"]]))
    def test_sums_to_one(self, s, modes):
        assert outcome_distribution(s, modes).total() == pytest.approx(1.0, abs=1e-10)

    def test_golden_text(self):
        dist = outcome_distribution(alice_output_state(InputQubitSpec.from_alpha_sq(0.5)), ALICE_MODES)
        assert dist.to_text() == (GOLDEN / "alice_half.txt").read_text()


class TestConditioning:
    spec = InputQubitSpec.from_alpha_sq(0.3)

    def test_success_branch(self):
        p, rest = condition_on_pattern(alice_output_state(self.spec), ALICE_MODES, (1, 0))
        assert p == pytest.approx(0.25, abs=1e-12)
        rest = rest.reorder(("k_B", "k_a~"))
        expected = PureState.from_terms(
            ("k_B", "k_a~"), {(0, 1): self.spec.alpha, (1, 0): self.spec.beta}
        )
        assert abs(inner_product(expected, rest)) ** 2 == pytest.approx(1.0, abs=1e-12)

    def test_idle_vacuum_branch(self):
        p, rest = condition_on_pattern(alice_output_state(self.spec), ALICE_MODES, (0, 0))
        assert p == pytest.approx(0.3 / 2, abs=1e-12)
        assert outcome_distribution(rest, ["k_B"]).prob((1,)) == pytest.approx(1.0, abs=1e-12)

    def test_basis_on_own_pattern(self):
        p, rest = condition_on_pattern(basis_state(["a", "b"], [1, 0]), ["a"], [1])
        assert p == 1.0
        assert dict(rest.terms) == {(0,): 1 + 0j}

    def test_zero_probability_branch(self):
        assert condition_on_pattern(alice_output_state(self.spec), ALICE_MODES, (1, 1)) == (0.0, None)

    @given(three_mode_states())
    def test_branches_are_complete_and_reconstruct_marginals(self, s):
        total = 0.0
        recon: dict[tuple[int, ...], float] = {}
        for pattern in [(0,), (1,), (2,)]:
            p, rest = condition_on_pattern(s, ["a"], pattern)
            total += p
            if rest is None:
                continue
            for sub, q in outcome_distribution(rest, ["b"]).probs.items():
                recon[(pattern[0],) + sub] = recon.get((pattern[0],) + sub, 0.0) + p * q
        assert total == pytest.approx(1.0, abs=1e-10)
        joint = outcome_distribution(s, ["a", "b"])
        for key in set(recon) | set(joint.probs):
            assert recon.get(key, 0.0) == pytest.approx(joint.prob(key), abs=1e-10)


class TestClickDistribution:
    def test_perfect(self):
        assert click_distribution(basis_state(["a"], [1]), [("a", DetectorModel())]).prob((1,)) == 1.0

    def test_qe(self):
        dist = click_distribution(basis_state(["a"], [1]), [("a", DetectorModel(0.45))])
        assert dist.prob((1,)) == pytest.approx(0.45, abs=1e-12)

    def test_two_photons_threshold(self):
        dist = click_distribution(basis_state(["a"], [2]), [("a", DetectorModel(0.45))])
        assert dist.prob((1,)) == pytest.approx(0.6975, abs=1e-12)

    @given(st.integers(0, 4), st.floats(0.0, 1.0))
    def test_loss_mode_route_matches_binomial(self, n, eta):
        s = basis_state(["a"], [n], n_max=4)
        dist = click_distribution(s, [("a", DetectorModel(eta))])
        assert dist.click_probability("a") == pytest.approx(threshold_click_probability(n, eta), abs=1e-12)

    @given(three_mode_states())
    def test_ideal_resolving_equals_born_rule(self, s):
        det = DetectorModel(1.0, resolving=True)
        clicks = click_distribution(s, [("a", det), ("c", det)])
        born = outcome_distribution(s, ["a", "c"])
        assert dict(clicks.probs) == dict(born.probs)

    @given(three_mode_states(), st.floats(0.0, 1.0), st.booleans())
    def test_sums_to_one(self, s, eta, resolving):
        det = DetectorModel(eta, resolving)
        assert click_distribution(s, [("a", det), ("b", det)]).total() == pytest.approx(1.0, abs=1e-10)

    def test_bad_detector(self):
        with pytest.raises(FockError):
            DetectorModel(-0.1)


class TestCoincidence:
    def test_direct_marginal(self):
        dist = OutcomeDistribution(("D1", "D1*"), {(1, 1): 0.25, (0, 1): 0.75})
        assert coincidence_probability(dist, ("D1", "D1*")) == 0.25

    def test_hom_branch_has_no_cross_coincidence(self):
        out = apply_beam_splitter(
            basis_state(["k_S", "k_A"], [1, 1]), BeamSplitterParams.balanced(("k_S", "k_A"), ("k_1", "k_2"))
        )
        dist = click_distribution(out, [("k_1", DetectorModel()), ("k_2", DetectorModel())], ("D1", "D2"))
        assert coincidence_probability(dist, ("D1", "D2")) < 1e-28

    def test_silent_detectors(self):
        dist = OutcomeDistribution(("D1", "D2", "D1*"), {(1, 0, 1): 0.2, (1, 1, 1): 0.3, (0, 0, 0): 0.5})
        assert coincidence_probability(dist, ("D1", "D1*")) == pytest.approx(0.5)
        assert coincidence_probability(dist, ("D1", "D1*"), silent=("D1", "D2")) == pytest.approx(0.2)

    def test_unknown_detector(self):
        dist = OutcomeDistribution(("D1",), {(1,): 1.0})
        with pytest.raises(FockError):
            coincidence_probability(dist, ("D1", "D9"))


@given(three_mode_states(), st.sampled_from([["a"], ["b", "c"], ["c", "a"]]))
def test_partition_matches_pattern_by_pattern(s, modes):
    parts = partition_on_modes(s, modes)
    assert math.fsum(p for p, _ in parts.values()) == pytest.approx(1.0, abs=1e-10)
    for pattern, (p, rest) in parts.items():
        q, ref = condition_on_pattern(s, modes, pattern)
        assert p == pytest.approx(q, abs=1e-14)
        assert dict(rest.terms) == dict(ref.terms)
