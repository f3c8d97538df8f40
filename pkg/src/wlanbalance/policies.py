"""
Association and load-balancing decisions.

Three policies share this module:

* ``strongest-snr``: every station joins the AP it hears best.
* ``lba``: overloaded APs hand stations over to underloaded ones. A selection
  step picks the move, a distribution step checks it against the balancing
  criterion beta before it is applied.
* ``snr-lba``: ``lba`` that refuses any move whose target SNR falls below half
  the SNR of the station's current AP (both in dB).

APs are classified against the mean load m: above (1 + beta) * m is
overloaded, below (1 - beta) * m underloaded. Comparisons are done on exact
fractions so a uniform rescaling of every offered load never flips a decision.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import TYPE_CHECKING, NamedTuple

from .errors import PolicyUsageError, UnknownEntityError
from .network import Handoff, HandoffReason, NetworkState, associate, audible_aps
from .radio import snr_db

if TYPE_CHECKING:
    from .scenario import Scenario

logger = logging.getLogger(__name__)


class PolicyKind(str, Enum):
    STRONGEST_SNR = "strongest-snr"
    LBA = "lba"
    SNR_AWARE_LBA = "snr-lba"

    @property
    def balances(self) -> bool:
        return self is not PolicyKind.STRONGEST_SNR


class BalanceClass(str, Enum):
    OVERLOADED = "overloaded"
    BALANCED = "balanced"
    UNDERLOADED = "underloaded"


@dataclass(frozen=True)
class PolicyParams:
    beta: float = 0.2
    assoc_threshold: float = 4.0  # dB
    guard_enabled: bool = False
    max_handoffs: int | None = None  # None: run until no candidate is left
    guard_inclusive: bool = True  # snr_new == snr_old / 2 passes

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.max_handoffs is not None and self.max_handoffs < 0:
            raise ValueError(f"max_handoffs must be non-negative, got {self.max_handoffs}")

    def for_kind(self, kind: PolicyKind) -> PolicyParams:
        """Params with the guard switched on exactly for the SNR-aware policy."""
        return replace(self, guard_enabled=kind is PolicyKind.SNR_AWARE_LBA)


class Move(NamedTuple):
    station: str
    from_ap: str
    to_ap: str


def _exact_loads(state: NetworkState) -> dict[str, Fraction]:
    return {ap: Fraction(state.loads[ap]) for ap in state.access_points}


def _classify(loads: dict[str, Fraction], beta: Fraction) -> dict[str, BalanceClass]:
    total = sum(loads.values(), Fraction(0))
    count = len(loads)
    classes = {}
    for ap in sorted(loads):
        scaled = loads[ap] * count
        if total == 0:
            classes[ap] = BalanceClass.BALANCED
        elif scaled > (1 + beta) * total:
            classes[ap] = BalanceClass.OVERLOADED
        elif scaled < (1 - beta) * total:
            classes[ap] = BalanceClass.UNDERLOADED
        else:
            classes[ap] = BalanceClass.BALANCED
    return classes


def _spread(loads: dict[str, Fraction]) -> Fraction:
    return max(loads.values()) - min(loads.values())


def _moved(state: NetworkState, move: Move) -> dict[str, Fraction]:
    loads = _exact_loads(state)
    offered = Fraction(state.offered[move.station])
    loads[move.from_ap] -= offered
    loads[move.to_ap] += offered
    return loads


def classify_load(state: NetworkState, params: PolicyParams) -> dict[str, BalanceClass]:
    if not state.access_points:
        raise UnknownEntityError("cannot classify a network without access points")
    return _classify(_exact_loads(state), Fraction(str(params.beta)))


def admission_check(state: NetworkState, ap: str, params: PolicyParams) -> bool:
    """Overloaded access points do not accept new stations."""
    classes = classify_load(state, params)
    if ap not in classes:
        raise UnknownEntityError(f"unknown access point '{ap}'")
    return classes[ap] is not BalanceClass.OVERLOADED


def snr_guard(snr_old: float, snr_new: float, inclusive: bool = True) -> bool:
    half = snr_old / 2
    return snr_new >= half if inclusive else snr_new > half


def distribution_check(state: NetworkState, move, params: PolicyParams) -> bool:
    """The move must shrink the load spread and leave its target below overload."""
    move = Move(*move)
    for ap in (move.from_ap, move.to_ap):
        if ap not in state.loads:
            raise UnknownEntityError(f"unknown access point '{ap}'")
    if state.association.get(move.station) != move.from_ap:
        raise UnknownEntityError(f"station '{move.station}' is not associated to '{move.from_ap}'")

    after = _moved(state, move)
    if not _spread(after) < _spread(_exact_loads(state)):
        return False
    classes = _classify(after, Fraction(str(params.beta)))
    return classes[move.to_ap] is not BalanceClass.OVERLOADED


def select_candidate(
    state: NetworkState, scenario: Scenario, params: PolicyParams, guard: bool
) -> Move | None:
    """Best single move from an overloaded to an underloaded AP, or None.

    Survivors are ranked by post-move spread, then the stronger target SNR,
    then station id, then target AP id.
    """
    classes = classify_load(state, params)
    overloaded = [ap for ap, cls in classes.items() if cls is BalanceClass.OVERLOADED]
    underloaded = [ap for ap, cls in classes.items() if cls is BalanceClass.UNDERLOADED]

    best, best_rank = None, None
    for source in overloaded:
        for station in state.stations_on(source):
            heard = dict(audible_aps(station, scenario, params.assoc_threshold))
            for target in underloaded:
                if target not in heard:
                    continue
                move = Move(station, source, target)
                if not distribution_check(state, move, params):
                    continue
                snr_new = heard[target]
                if guard and not snr_guard(
                    snr_db(source, station, scenario), snr_new, params.guard_inclusive
                ):
                    logger.debug(f"guard refused {station}: {source} -> {target} at {snr_new} dB")
                    continue
                rank = (_spread(_moved(state, move)), -snr_new, station, target)
                if best_rank is None or rank < best_rank:
                    best, best_rank = move, rank
    return best


def rebalance(
    state: NetworkState, scenario: Scenario, params: PolicyParams, kind: PolicyKind
) -> tuple[NetworkState, list[Handoff]]:
    """Apply selection and distribution until no move is left or the cap is hit."""
    if not kind.balances:
        raise PolicyUsageError(f"rebalance is undefined for policy '{kind.value}'")

    guard = params.for_kind(kind).guard_enabled
    handoffs: list[Handoff] = []
    while params.max_handoffs is None or len(handoffs) < params.max_handoffs:
        move = select_candidate(state, scenario, params, guard)
        if move is None:
            break
        handoff = Handoff(
            station=move.station,
            from_ap=move.from_ap,
            to_ap=move.to_ap,
            snr_old=snr_db(move.from_ap, move.station, scenario),
            snr_new=snr_db(move.to_ap, move.station, scenario),
            reason=HandoffReason.LOAD_BALANCE,
        )
        state = associate(state, move.station, move.to_ap)
        handoffs.append(handoff)
        logger.info(
            f"{kind.value}: handoff {handoff.station} {handoff.from_ap} -> {handoff.to_ap} "
            f"(snr {handoff.snr_old:g} -> {handoff.snr_new:g} dB)"
        )
    return state, handoffs


def strongest_snr_associate(station: str, scenario: Scenario, params: PolicyParams) -> str | None:
    heard = audible_aps(station, scenario, params.assoc_threshold)
    return heard[0][0] if heard else None


def admit_station(
    state: NetworkState, scenario: Scenario, station: str, params: PolicyParams
) -> NetworkState:
    """Join the strongest audible AP that is not overloaded.

    When every audible AP is overloaded the station still joins the strongest
    one; a station nobody hears stays unassociated.
    """
    heard = audible_aps(station, scenario, params.assoc_threshold)
    if not heard:
        logger.warning(f"station {station} hears no access point above {params.assoc_threshold} dB")
        return state
    for ap, _snr in heard:
        if admission_check(state, ap, params):
            return associate(state, station, ap)
    logger.info(f"station {station}: every audible AP is overloaded, joining {heard[0][0]}")
    return associate(state, station, heard[0][0])


def initial_association(scenario: Scenario, params: PolicyParams, kind: PolicyKind) -> NetworkState:
    """Explicit assignments first, then each remaining station in id order by policy."""
    state = NetworkState.empty(scenario)
    for station in sorted(scenario.assignments):
        state = associate(state, station, scenario.assignments[station])

    for station in sorted(sta.id for sta in scenario.stations):
        if station in state.association:
            continue
        if kind.balances:
            state = admit_station(state, scenario, station, params)
            continue
        ap = strongest_snr_associate(station, scenario, params)
        if ap is None:
            logger.warning(f"station {station} hears no access point above {params.assoc_threshold} dB")
        else:
            state = associate(state, station, ap)
    return state
