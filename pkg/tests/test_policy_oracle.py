"""
Exhaustive-enumeration oracles and properties for the load-balancing policies.

The reference implementations below enumerate every (station, target AP) pair
of small networks with exact rational arithmetic and compare against the
production decisions.
"""

from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from wlanbalance.network import associate
from wlanbalance.policies import (
    BalanceClass,
    Move,
    PolicyKind,
    classify_load,
    distribution_check,
    initial_association,
    rebalance,
    select_candidate,
    snr_guard,
)

from .fixtures import TestFixtures

LOADS = [0, 300, 600, 1200, 12237]
BETAS = [0.1, 0.2, 0.5]
SNRS = [0.0, 2.0, 4.0, 10.0, 20.0, 30.0, 39.0, 40.0, 45.0, 60.0, 80.0]


@st.composite
def networks(draw):
    aps = [f"ap{i}" for i in range(draw(st.integers(1, 4)))]
    stations = [f"s{i}" for i in range(draw(st.integers(1, 6)))]
    return dict(
        snr={sta: {ap: draw(st.sampled_from(SNRS)) for ap in aps} for sta in stations},
        offered={sta: float(draw(st.sampled_from(LOADS))) for sta in stations},
        association={sta: draw(st.sampled_from(aps)) for sta in stations},
        beta=draw(st.sampled_from(BETAS)),
        guard_inclusive=draw(st.booleans()),
    )


def brute_loads(state):
    return {
        ap: sum(
            (Fraction(state.offered[sta]) for sta, cur in state.association.items() if cur == ap),
            Fraction(0),
        )
        for ap in state.access_points
    }


def brute_classes(loads, beta):
    beta = Fraction(str(beta))
    mean = Fraction(sum(loads.values(), Fraction(0)), len(loads))
    classes = {}
    for ap, load in loads.items():
        if load > (1 + beta) * mean:
            classes[ap] = BalanceClass.OVERLOADED
        elif load < (1 - beta) * mean:
            classes[ap] = BalanceClass.UNDERLOADED
        else:
            classes[ap] = BalanceClass.BALANCED
    return classes


def brute_select(state, scenario, params, guard):
    loads = brute_loads(state)
    classes = brute_classes(loads, params.beta)
    spread = max(loads.values()) - min(loads.values())
    links = {(ap, sta): value for (ap, sta), value in scenario.snr_overrides.items()}

    admissible = []
    for station, source in state.association.items():
        for target in state.access_points:
            if target == source:
                continue
            if classes[source] is not BalanceClass.OVERLOADED:
                continue
            if classes[target] is not BalanceClass.UNDERLOADED:
                continue
            snr_new = links[(target, station)]
            if snr_new < params.assoc_threshold:
                continue
            after = dict(loads)
            after[source] -= Fraction(state.offered[station])
            after[target] += Fraction(state.offered[station])
            new_spread = max(after.values()) - min(after.values())
            if not new_spread < spread:
                continue
            if brute_classes(after, params.beta)[target] is BalanceClass.OVERLOADED:
                continue
            if guard:
                half = Fraction(links[(source, station)]) / 2
                if snr_new < half or (not params.guard_inclusive and snr_new == half):
                    continue
            admissible.append(((new_spread, -snr_new, station, target), Move(station, source, target)))
    return min(admissible)[1] if admissible else None


def brute_rebalance(state, scenario, params, guard):
    moves = []
    while params.max_handoffs is None or len(moves) < params.max_handoffs:
        move = brute_select(state, scenario, params, guard)
        if move is None:
            break
        moves.append(move)
        state = associate(state, move.station, move.to_ap)
    return state, moves


def handoff_moves(handoffs):
    return [Move(h.station, h.from_ap, h.to_ap) for h in handoffs]


class TestBruteForceAgreement:
    """Production decisions match exhaustive enumeration"""

    @given(networks())
    @settings(max_examples=300, deadline=None)
    def test_classify_load(self, net):
        scenario, state = TestFixtures.multi_ap(
            net["snr"], net["offered"], net["association"], beta=net["beta"]
        )
        assert classify_load(state, scenario.policy) == brute_classes(brute_loads(state), net["beta"])

    @given(networks(), st.booleans())
    @settings(max_examples=300, deadline=None)
    def test_select_candidate(self, net, guard):
        scenario, state = TestFixtures.multi_ap(
            net["snr"],
            net["offered"],
            net["association"],
            beta=net["beta"],
            guard_inclusive=net["guard_inclusive"],
        )
        expected = brute_select(state, scenario, scenario.policy, guard)
        assert select_candidate(state, scenario, scenario.policy, guard) == expected

    @given(networks(), st.sampled_from([PolicyKind.LBA, PolicyKind.SNR_AWARE_LBA]))
    @settings(max_examples=200, deadline=None)
    def test_rebalance(self, net, kind):
        scenario, state = TestFixtures.multi_ap(
            net["snr"],
            net["offered"],
            net["association"],
            kind=kind,
            beta=net["beta"],
            guard_inclusive=net["guard_inclusive"],
        )
        final, handoffs = rebalance(state, scenario, scenario.policy, kind)
        expected_state, expected_moves = brute_rebalance(
            state, scenario, scenario.policy, kind is PolicyKind.SNR_AWARE_LBA
        )
        assert handoff_moves(handoffs) == expected_moves
        assert final.association == expected_state.association


class TestRebalanceProperties:
    """Guard subset, termination and target safety"""

    @given(networks())
    @settings(max_examples=200, deadline=None)
    def test_guarded_handoffs_are_admissible_lba_moves(self, net):
        scenario, state = TestFixtures.multi_ap(
            net["snr"],
            net["offered"],
            net["association"],
            kind=PolicyKind.SNR_AWARE_LBA,
            beta=net["beta"],
            guard_inclusive=net["guard_inclusive"],
        )
        params = scenario.policy
        _final, handoffs = rebalance(state, scenario, params, PolicyKind.SNR_AWARE_LBA)

        current = state
        for handoff in handoffs:
            classes = classify_load(current, params)
            assert classes[handoff.from_ap] is BalanceClass.OVERLOADED
            assert classes[handoff.to_ap] is BalanceClass.UNDERLOADED
            assert handoff.snr_new >= params.assoc_threshold
            assert distribution_check(current, (handoff.station, handoff.from_ap, handoff.to_ap), params)
            assert snr_guard(handoff.snr_old, handoff.snr_new, params.guard_inclusive)
            assert handoff.snr_new >= handoff.snr_old / 2
            current = associate(current, handoff.station, handoff.to_ap)
            assert classify_load(current, params)[handoff.to_ap] is not BalanceClass.OVERLOADED

    @given(networks(), st.one_of(st.none(), st.integers(0, 3)))
    @settings(max_examples=200, deadline=None)
    def test_termination_bound(self, net, cap):
        scenario, state = TestFixtures.multi_ap(
            net["snr"], net["offered"], net["association"], beta=net["beta"], max_handoffs=cap
        )
        _final, handoffs = rebalance(state, scenario, scenario.policy, PolicyKind.LBA)
        assert len(handoffs) <= len(state.offered) * len(state.access_points)
        if cap is not None:
            assert len(handoffs) <= cap

    @given(networks())
    @settings(max_examples=200, deadline=None)
    def test_loads_stay_coherent(self, net):
        scenario, state = TestFixtures.multi_ap(
            net["snr"], net["offered"], net["association"], beta=net["beta"]
        )
        final, _handoffs = rebalance(state, scenario, scenario.policy, PolicyKind.LBA)
        assert final.loads == final.recomputed_loads()
        assert sorted(final.association) == sorted(state.association)


class TestSnrGuardMonotone:
    """A better target or a weaker source never flips the guard to refusal"""

    @given(
        st.floats(0, 100, allow_nan=False),
        st.floats(0, 100, allow_nan=False),
        st.floats(0, 50, allow_nan=False),
        st.booleans(),
    )
    def test_monotone(self, old, new, delta, inclusive):
        if snr_guard(old, new, inclusive):
            assert snr_guard(old, new + delta, inclusive)
            assert snr_guard(old - delta, new, inclusive)


class TestScaleInvariance:
    """Multiplying every offered load by a constant changes no decision"""

    @given(networks(), st.sampled_from([PolicyKind.LBA, PolicyKind.SNR_AWARE_LBA]))
    @settings(max_examples=200, deadline=None)
    def test_random_networks(self, net, kind):
        scenario, state = TestFixtures.multi_ap(
            net["snr"], net["offered"], net["association"], kind=kind, beta=net["beta"]
        )
        params = scenario.policy
        scaled = state.scaled(7)
        guard = kind is PolicyKind.SNR_AWARE_LBA

        assert classify_load(scaled, params) == classify_load(state, params)
        assert select_candidate(scaled, scenario, params, guard) == select_candidate(
            state, scenario, params, guard
        )
        assert handoff_moves(rebalance(scaled, scenario, params, kind)[1]) == handoff_moves(
            rebalance(state, scenario, params, kind)[1]
        )

    def test_shipped_two_ap_scenario(self):
        scenario = TestFixtures.shipped("exp2")
        for kind in (PolicyKind.LBA, PolicyKind.SNR_AWARE_LBA):
            params = scenario.policy.for_kind(kind)
            state = initial_association(scenario, params, scenario.policy_kind)
            scaled = state.scaled(7)
            guard = params.guard_enabled

            assert classify_load(scaled, params) == classify_load(state, params)
            assert select_candidate(scaled, scenario, params, guard) == select_candidate(
                state, scenario, params, guard
            )
            original = rebalance(state, scenario, params, kind)[1]
            assert original
            assert rebalance(scaled, scenario, params, kind)[1] == original
