"""
Experiment sweeps.

``run_exp1`` sweeps the video station's SNR against the background load on a
single cell. ``run_exp2`` compares an unbalanced two-AP network against the
same network after one round of plain and SNR-guarded load balancing, with the
mover's SNR to the target AP pinned to each swept value.

Every (cell, seed) pair is an independent task. Tasks fan out to ray when it
is installed, to a process pool otherwise, and results are collected by task
key so the emitted rows never depend on worker count or completion order.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..errors import ExperimentError
from ..macsim import SimResult, run
from ..metrics import QosReport, qos_report
from ..policies import BalanceClass, PolicyKind, classify_load, initial_association, rebalance
from ..scenario import Scenario

try:
    import ray

    RAY_AVAILABLE = True
except ImportError:
    RAY_AVAILABLE = False

logger = logging.getLogger(__name__)

DEFAULT_SEEDS = [1, 2, 3, 4, 5]
MEDIAN = "median"
UNBALANCED = "unbalanced"
METRIC_COLUMNS = [
    "throughput_kbps",
    "delay_mean_ms",
    "delay_p95_ms",
    "packet_jitter_ms",
    "frame_jitter_ms",
    "frame_rate_fps",
    "loss_ratio",
    "psnr_db",
    "handoffs",
]


class Comparison(str, Enum):
    NONE = "none"
    BALANCED_VS_UNBALANCED = "balanced-vs-unbalanced"


class Backend(str, Enum):
    AUTO = "auto"
    RAY = "ray"
    PROCESS = "process"
    SERIAL = "serial"


class ExperimentSpec(BaseModel):
    """Sweep definition shared by both experiment runners"""

    model_config = ConfigDict(frozen=True)

    scenario: Any = Field(..., description="Base Scenario")
    snr_axis: List[float] = Field(..., min_length=1, description="SNR values in dB")
    load_axis: List[float] = Field(default_factory=list, description="Background loads in kbps")
    seeds: List[int] = Field(default_factory=lambda: list(DEFAULT_SEEDS), min_length=1)
    comparison: Comparison = Field(Comparison.NONE, description="Balanced vs unbalanced rows")
    source_snr_db: Optional[float] = Field(None, description="Pin the mover's SNR to its current AP")
    workers: int = Field(1, ge=1, description="Parallel workers")
    backend: Backend = Field(Backend.AUTO)

    @field_validator("scenario")
    @classmethod
    def _is_scenario(cls, value):
        if not isinstance(value, Scenario):
            raise ValueError("scenario must be a Scenario")
        return value

    @field_validator("load_axis")
    @classmethod
    def _non_negative_loads(cls, value):
        if any(load < 0 for load in value):
            raise ValueError("background loads must be non-negative")
        return value

    @field_validator("seeds")
    @classmethod
    def _unsigned_seeds(cls, value):
        if any(not 0 <= seed < 2**64 for seed in value):
            raise ValueError("seeds must be 64-bit unsigned integers")
        return value

    @classmethod
    def build(cls, **fields) -> ExperimentSpec:
        """Construct a spec, reporting invalid fields as an ExperimentError."""
        try:
            return cls(**fields)
        except ValidationError as e:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
            )
            raise ExperimentError(f"Invalid experiment spec: {problems}") from e


@dataclass(frozen=True)
class CellTask:
    key: tuple
    scenario: Scenario
    seed: int
    station: str
    policy: Optional[PolicyKind] = None  # None: no rebalancing


@dataclass(frozen=True)
class CellOutcome:
    key: tuple
    report: QosReport
    handoffs: int


def simulate(scenario: Scenario, seed: int, policy: Optional[PolicyKind] = None) -> SimResult:
    """Associate, optionally rebalance with ``policy``, then run one seed."""
    params = scenario.policy
    state = initial_association(scenario, params, scenario.policy_kind)
    handoffs = []
    if policy is not None and policy.balances:
        state, handoffs = rebalance(state, scenario, params, policy)
    return run(scenario, state, replace(scenario.sim, seed=seed), handoffs)


def run_cell(task: CellTask) -> CellOutcome:
    result = simulate(task.scenario, task.seed, task.policy)
    report = qos_report(result, task.scenario, task.station)
    return CellOutcome(task.key, report, len(result.handoffs))


def _run_serial(tasks: List[CellTask]) -> List[CellOutcome]:
    return [run_cell(task) for task in tasks]


def _run_process(tasks: List[CellTask], workers: int) -> List[CellOutcome]:
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_cell, tasks))


def _run_ray(tasks: List[CellTask], workers: int) -> List[CellOutcome]:
    import wlanbalance

    # workers import the package from the shipped copy, installed or not
    ray.init(
        num_cpus=workers,
        ignore_reinit_error=True,
        include_dashboard=False,
        runtime_env={"py_modules": [wlanbalance]},
    )
    try:
        remote_cell = ray.remote(run_cell)
        return ray.get([remote_cell.remote(task) for task in tasks])
    finally:
        ray.shutdown()


def execute(tasks: List[CellTask], workers: int = 1, backend: Backend = Backend.AUTO) -> Dict[tuple, CellOutcome]:
    """Run every task and index the outcomes by task key."""
    if backend is Backend.RAY and not RAY_AVAILABLE:
        logger.warning("Ray not available, falling back to a process pool")
        backend = Backend.PROCESS
    if workers == 1 or backend is Backend.SERIAL:
        outcomes = _run_serial(tasks)
    elif backend is Backend.PROCESS or not RAY_AVAILABLE:
        logger.info(f"Running {len(tasks)} task(s) on a {workers}-process pool")
        outcomes = _run_process(tasks, workers)
    else:
        logger.info(f"Running {len(tasks)} task(s) on ray with {workers} worker(s)")
        outcomes = _run_ray(tasks, workers)
    return {outcome.key: outcome for outcome in outcomes}


def _row(tag: str, policy: str, seed, snr: float, outcome: CellOutcome) -> Dict[str, Any]:
    report = outcome.report
    return {
        "scenario": tag,
        "policy": policy,
        "seed": seed,
        "snr_db": float(snr),
        "offered_kbps": report.offered_kbps,
        "station": report.station,
        "throughput_kbps": report.throughput,
        "delay_mean_ms": report.delay_mean,
        "delay_p95_ms": report.delay_p95,
        "packet_jitter_ms": report.packet_jitter,
        "frame_jitter_ms": report.frame_jitter,
        "frame_rate_fps": report.frame_rate,
        "loss_ratio": report.loss_ratio,
        "psnr_db": report.psnr,
        "handoffs": outcome.handoffs,
    }


def median_row(rows: List[Dict[str, Any]]) -> Dict[str, Any]:
    """Per-column median of one cell's seed rows."""
    frame = pd.DataFrame(rows)
    medians = frame[METRIC_COLUMNS].astype(float).median()
    row = dict(rows[0])
    row["seed"] = MEDIAN
    for column in METRIC_COLUMNS:
        value = medians[column]
        row[column] = None if pd.isna(value) else float(value)
    return row


def _cell_rows(cell_rows: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    return cell_rows + [median_row(cell_rows)]


def run_exp1(spec: ExperimentSpec) -> List[Dict[str, Any]]:
    """SNR x background-load sweep of the video station on its own cell."""
    if spec.comparison is not Comparison.NONE:
        raise ExperimentError("exp1 takes no comparison mode")
    if not spec.load_axis:
        raise ExperimentError("exp1 needs a non-empty load axis")

    base = spec.scenario
    station = base.video_station()
    state = initial_association(base, base.policy, base.policy_kind)
    ap = state.association.get(station)
    if ap is None:
        raise ExperimentError(f"video station '{station}' hears no access point")

    cells = []
    tasks = []
    for snr in spec.snr_axis:
        for load in spec.load_axis:
            scenario = base.with_snr_override(ap, station, snr).with_background_load(load)
            tag = f"{base.name}/load={load:g}"
            cells.append((snr, load, tag))
            for seed in spec.seeds:
                tasks.append(CellTask((snr, load, seed), scenario, seed, station))

    logger.info(
        f"exp1 '{base.name}': {len(spec.snr_axis)} SNR x {len(spec.load_axis)} load cells, "
        f"{len(spec.seeds)} seed(s)"
    )
    outcomes = execute(tasks, spec.workers, spec.backend)

    rows = []
    for snr, load, tag in cells:
        seed_rows = [
            _row(tag, base.policy_kind.value, seed, snr, outcomes[(snr, load, seed)])
            for seed in spec.seeds
        ]
        rows.extend(_cell_rows(seed_rows))
    return rows


def run_exp2(spec: ExperimentSpec) -> List[Dict[str, Any]]:
    """Unbalanced vs lba vs snr-lba for each pinned target SNR."""
    if spec.comparison is not Comparison.BALANCED_VS_UNBALANCED:
        raise ExperimentError("exp2 needs the balanced-vs-unbalanced comparison mode")

    base = spec.scenario
    if len(base.access_points) < 2:
        raise ExperimentError("exp2 needs at least two access points")
    mover = base.video_station()
    state = initial_association(base, base.policy, base.policy_kind)
    source = state.association.get(mover)
    if source is None:
        raise ExperimentError(f"video station '{mover}' hears no access point")
    classes = classify_load(state, base.policy)
    if BalanceClass.OVERLOADED not in classes.values():
        raise ExperimentError(
            f"scenario '{base.name}' is not unbalanced at beta={base.policy.beta}: "
            + ", ".join(f"{ap}={state.loads[ap]:g} kbps" for ap in state.access_points)
        )
    if spec.source_snr_db is not None:
        base = base.with_snr_override(source, mover, spec.source_snr_db)

    policies = [(UNBALANCED, None), (PolicyKind.LBA.value, PolicyKind.LBA),
                (PolicyKind.SNR_AWARE_LBA.value, PolicyKind.SNR_AWARE_LBA)]
    tasks = []
    for snr in spec.snr_axis:
        scenario = base
        for ap in base.access_points:
            if ap.id != source:
                scenario = scenario.with_snr_override(ap.id, mover, snr)
        for label, kind in policies:
            for seed in spec.seeds:
                tasks.append(CellTask((snr, label, seed), scenario, seed, mover, kind))

    logger.info(
        f"exp2 '{base.name}': mover {mover} on {source}, {len(spec.snr_axis)} target SNR(s), "
        f"{len(spec.seeds)} seed(s)"
    )
    outcomes = execute(tasks, spec.workers, spec.backend)

    rows = []
    for snr in spec.snr_axis:
        for label, _kind in policies:
            seed_rows = [
                _row(base.name, label, seed, snr, outcomes[(snr, label, seed)])
                for seed in spec.seeds
            ]
            rows.extend(_cell_rows(seed_rows))
    return rows
