"""
Scenario loader

Parses JSON scenario documents, validates them against the strict scenario
schema plus a semantic pass, and builds immutable Scenario values. The echo
functions turn a Scenario back into a document that parses to an equal value.
"""

import json
import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml
from jsonschema import Draft7Validator

from ..errors import ConfigurationError, ScenarioError
from ..macsim import SimConfig
from ..metrics import PsnrParams
from ..network import AccessPoint, Station
from ..policies import PolicyKind, PolicyParams
from ..radio import PerModel, PerTier, RadioParams, RateTable
from ..scenario import Scenario
from ..traffic import CbrProfile, VideoProfile

logger = logging.getLogger(__name__)

HERE = os.path.dirname(__file__)
DEFAULT_SCHEMA_PATH = os.path.join(HERE, "scenario_schema.json")
DEFAULT_TABLES_PATH = os.path.join(HERE, "rate_tables.yaml")


def _location(path) -> str:
    return " -> ".join(str(p) for p in path)


class ScenarioLoader:
    """Validates scenario documents and turns them into Scenario values"""

    def __init__(self, schema_path: Optional[str] = None, tables_path: Optional[str] = None):
        with open(schema_path or DEFAULT_SCHEMA_PATH, "r") as f:
            self.schema = json.load(f)
        with open(tables_path or DEFAULT_TABLES_PATH, "r") as f:
            manifest = yaml.safe_load(f)

        self.validator = Draft7Validator(self.schema)
        self.default_table = manifest.get("default", "80211b")
        self.tables: Dict[str, RateTable] = {
            name: RateTable.from_pairs(entry["tiers"])
            for name, entry in manifest["tables"].items()
        }

    def decode(self, text: str) -> Dict[str, Any]:
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise ScenarioError(
                f"Syntax error: {e.msg}", kind="syntax", location=f"line {e.lineno}, column {e.colno}"
            ) from e

    def validate_document(self, doc: Dict[str, Any]) -> Tuple[bool, List[ScenarioError]]:
        """Schema validation first; semantics only run on schema-valid documents."""
        errors = [self._schema_error(e) for e in self._sorted_schema_errors(doc)]
        if not errors:
            errors.extend(self._validate_semantics(doc))
        return len(errors) == 0, errors

    def parse(self, text: str) -> Scenario:
        doc = self.decode(text)
        if not isinstance(doc, dict):
            raise ScenarioError("Scenario document must be a JSON object", kind="schema")
        is_valid, errors = self.validate_document(doc)
        if not is_valid:
            raise errors[0]
        return self.build(doc)

    def _sorted_schema_errors(self, doc):
        return sorted(
            self.validator.iter_errors(doc), key=lambda e: [str(p) for p in e.absolute_path]
        )

    def _schema_error(self, error) -> ScenarioError:
        location = _location(error.absolute_path)
        if error.validator == "additionalProperties":
            known = set(error.schema.get("properties", {}))
            unknown = sorted(set(error.instance) - known)
            names = ", ".join(f"'{name}'" for name in unknown)
            return ScenarioError(f"Unknown field {names}", kind="unknown-field", location=location)
        return ScenarioError(f"Schema validation error: {error.message}", kind="schema", location=location)

    def _validate_semantics(self, doc: Dict[str, Any]) -> List[ScenarioError]:
        """Cross references and domain invariants beyond the schema"""
        errors = []

        def fail(message, *path):
            errors.append(ScenarioError(message, kind="invariant", location=_location(path)))

        ap_ids = [ap["id"] for ap in doc["access_points"]]
        station_ids = [sta["id"] for sta in doc["stations"]]
        for i, ap_id in enumerate(ap_ids):
            if ap_ids.index(ap_id) != i:
                fail(f"Duplicate access point id '{ap_id}'", "access_points", i, "id")
        for i, sta_id in enumerate(station_ids):
            if station_ids.index(sta_id) != i:
                fail(f"Duplicate station id '{sta_id}'", "stations", i, "id")

        # json accepts NaN and Infinity; every number below must be a finite real
        for section in ("access_points", "stations"):
            for i, entry in enumerate(doc[section]):
                if not all(math.isfinite(v) for v in entry.get("position", [0, 0])):
                    fail(f"'{entry['id']}': position must be finite", section, i, "position")
                if not math.isfinite(entry.get("offered_kbps", 0)):
                    fail(f"'{entry['id']}': offered_kbps must be finite", section, i, "offered_kbps")
        for key, value in doc.get("radio", {}).items():
            if not math.isfinite(value):
                fail(f"Radio constant {key} must be finite, got {value}", "radio", key)

        profiles = doc.get("profiles", {})
        video_sinks = {name: [] for name, p in profiles.items() if p["type"] == "video"}
        for i, sta in enumerate(doc["stations"]):
            traffic = sta.get("traffic")
            if traffic is not None:
                if traffic not in profiles:
                    fail(f"Station '{sta['id']}': unknown traffic profile '{traffic}'", "stations", i, "traffic")
                elif traffic in video_sinks:
                    video_sinks[traffic].append(sta["id"])
            if "ap" in sta and sta["ap"] not in ap_ids:
                fail(f"Station '{sta['id']}': unknown access point '{sta['ap']}'", "stations", i, "ap")
        for name, sinks in video_sinks.items():
            if len(sinks) != 1:
                fail(f"Video profile '{name}' must feed exactly one station, found {len(sinks)}", "profiles", name)

        pinned = set()
        for i, override in enumerate(doc.get("snr_overrides", [])):
            pair = (override["ap"], override["station"])
            if override["ap"] not in ap_ids:
                fail(f"SNR override references unknown access point '{override['ap']}'", "snr_overrides", i, "ap")
            if override["station"] not in station_ids:
                fail(f"SNR override references unknown station '{override['station']}'", "snr_overrides", i, "station")
            if pair in pinned:
                fail(f"Duplicate SNR override for {pair[0]}/{pair[1]}", "snr_overrides", i)
            if not math.isfinite(override["snr_db"]):
                fail(f"SNR override for {pair[0]}/{pair[1]} must be finite, got {override['snr_db']}",
                     "snr_overrides", i, "snr_db")
            pinned.add(pair)

        positions_ap = {ap["id"]: ap.get("position", [0, 0]) for ap in doc["access_points"]}
        for i, sta in enumerate(doc["stations"]):
            for ap_id, ap_position in positions_ap.items():
                if (ap_id, sta["id"]) in pinned:
                    continue
                if math.dist(ap_position, sta.get("position", [0, 0])) == 0:
                    fail(
                        f"Station '{sta['id']}' sits on access point '{ap_id}' without an SNR override",
                        "stations", i, "position",
                    )

        table = None
        spec = doc.get("rate_table", self.default_table)
        if isinstance(spec, str):
            if spec not in self.tables:
                fail(f"Unknown rate table '{spec}' (known: {', '.join(sorted(self.tables))})", "rate_table")
            else:
                table = self.tables[spec]
        else:
            try:
                table = RateTable.from_pairs(spec["tiers"])
            except ValueError as e:
                fail(f"Rate table: {e}", "rate_table", "tiers")

        builders = [
            ("radio", lambda: RadioParams(**doc.get("radio", {}))),
            ("policy", lambda: self._policy(doc, table)),
            ("sim", lambda: self._sim(doc)),
            ("psnr", lambda: PsnrParams(**doc.get("psnr", {}))),
        ]
        for name, profile in profiles.items():
            builders.append((f"profiles -> {name}", lambda p=profile: self._profile(p)))
        if table is not None:
            builders.append(("per_model", lambda: self._per_model(doc, table).check_against(table)))

        for where, build in builders:
            try:
                build()
            except (ValueError, ConfigurationError) as e:
                errors.append(ScenarioError(str(e), kind="invariant", location=where))

        return errors

    def build(self, doc: Dict[str, Any]) -> Scenario:
        spec = doc.get("rate_table", self.default_table)
        if isinstance(spec, str):
            table, table_name = self.tables[spec], spec
        else:
            table, table_name = RateTable.from_pairs(spec["tiers"]), None

        profiles = {name: self._profile(p) for name, p in doc.get("profiles", {}).items()}
        stations = []
        for sta in doc["stations"]:
            traffic = sta.get("traffic")
            nominal = profiles[traffic].nominal_kbps if traffic else 0.0
            stations.append(
                Station(
                    id=sta["id"],
                    position=tuple(float(v) for v in sta.get("position", [0, 0])),
                    traffic=traffic,
                    offered_kbps=float(sta.get("offered_kbps", nominal)),
                )
            )

        policy = doc.get("policy", {})
        scenario = Scenario(
            name=doc["name"],
            description=doc.get("description", ""),
            radio=RadioParams(**{k: float(v) for k, v in doc.get("radio", {}).items()}),
            rate_table=table,
            rate_table_name=table_name,
            per_model=self._per_model(doc, table),
            access_points=tuple(
                AccessPoint(
                    id=ap["id"],
                    position=tuple(float(v) for v in ap.get("position", [0, 0])),
                    channel=ap.get("channel", 1),
                )
                for ap in doc["access_points"]
            ),
            stations=tuple(stations),
            profiles=profiles,
            assignments={sta["id"]: sta["ap"] for sta in doc["stations"] if "ap" in sta},
            snr_overrides={
                (o["ap"], o["station"]): float(o["snr_db"]) for o in doc.get("snr_overrides", [])
            },
            policy_kind=PolicyKind(policy.get("kind", PolicyKind.STRONGEST_SNR.value)),
            policy=self._policy(doc, table),
            sim=self._sim(doc),
            psnr=PsnrParams(**{k: float(v) for k, v in doc.get("psnr", {}).items()}),
        )
        logger.debug(
            f"Loaded scenario '{scenario.name}': {len(scenario.access_points)} APs, "
            f"{len(scenario.stations)} stations, table {table_name or 'inline'}"
        )
        return scenario

    def _profile(self, profile: Dict[str, Any]):
        fields = {k: v for k, v in profile.items() if k != "type"}
        if profile["type"] == "video":
            for key in ("fps", "i_frame_ratio"):
                if key in fields:
                    fields[key] = float(fields[key])
            return VideoProfile(**fields)
        return CbrProfile(rate=float(fields["rate"]), packet=fields.get("packet", 1500))

    def _per_model(self, doc: Dict[str, Any], table: RateTable) -> PerModel:
        per = doc.get("per_model", {})
        reference = per.get("reference_packet", PerModel.for_table(table).reference_packet)
        if "tiers" in per:
            if "offset_db" in per or "slope" in per:
                raise ValueError("per_model takes either explicit tiers or offset_db/slope, not both")
            tiers = tuple(PerTier(float(mid), float(slope)) for mid, slope in per["tiers"])
            return PerModel(tiers, reference)
        kwargs = {k: float(per[k]) for k in ("offset_db", "slope") if k in per}
        return PerModel.for_table(table, reference_packet=reference, **kwargs)

    def _policy(self, doc: Dict[str, Any], table: Optional[RateTable]) -> PolicyParams:
        policy = doc.get("policy", {})
        kind = PolicyKind(policy.get("kind", PolicyKind.STRONGEST_SNR.value))
        threshold = policy.get("assoc_threshold", table.lowest_snr if table else 0.0)
        return PolicyParams(
            beta=float(policy.get("beta", 0.2)),
            assoc_threshold=float(threshold),
            max_handoffs=policy.get("max_handoffs"),
            guard_inclusive=policy.get("guard_inclusive", True),
        ).for_kind(kind)

    def _sim(self, doc: Dict[str, Any]) -> SimConfig:
        sim = dict(doc.get("sim", {}))
        for key in ("duration", "per_packet_overhead"):
            if key in sim:
                sim[key] = float(sim[key])
        sim.setdefault("duration", 60.0)
        sim.setdefault("seed", 1)
        return SimConfig(**sim)

    def generate_validation_report(self, doc: Dict[str, Any], source: str = "") -> str:
        is_valid, errors = self.validate_document(doc)
        report = ["Scenario Validation Report", "=" * 30]
        if source:
            report.append(f"File: {source}")
        report.append(f"Name: {doc.get('name', '?')}")
        report.append(f"Access points: {len(doc.get('access_points', []))}")
        report.append(f"Stations: {len(doc.get('stations', []))}")
        report.append("")
        if is_valid:
            report.append("✅ VALID")
        else:
            report.append(f"❌ INVALID ({len(errors)} error(s))")
            for error in errors:
                report.append(f"  - [{error.kind}] {error}")
        return "\n".join(report)


_default_loader: Optional[ScenarioLoader] = None


def default_loader() -> ScenarioLoader:
    global _default_loader
    if _default_loader is None:
        _default_loader = ScenarioLoader()
    return _default_loader


def parse_scenario(text: str) -> Scenario:
    return default_loader().parse(text)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ScenarioError(f"Cannot read scenario file: {e.strerror}", kind="syntax", location=str(path)) from e
    return parse_scenario(text)


def _number(value: float):
    return int(value) if float(value).is_integer() else value


def scenario_to_dict(scenario: Scenario) -> Dict[str, Any]:
    """Document form of a Scenario; parse_scenario of it yields an equal Scenario."""
    profiles = {}
    for name, profile in sorted(scenario.profiles.items()):
        if isinstance(profile, VideoProfile):
            profiles[name] = {
                "type": "video",
                "fps": profile.fps,
                "mean_frame": profile.mean_frame,
                "gop_length": profile.gop_length,
                "i_frame_ratio": profile.i_frame_ratio,
                "mtu": profile.mtu,
            }
        else:
            profiles[name] = {"type": "cbr", "rate": profile.rate, "packet": profile.packet}

    stations = []
    for sta in scenario.stations:
        entry = {"id": sta.id, "position": list(sta.position), "offered_kbps": sta.offered_kbps}
        if sta.traffic is not None:
            entry["traffic"] = sta.traffic
        if sta.id in scenario.assignments:
            entry["ap"] = scenario.assignments[sta.id]
        stations.append(entry)

    sim, policy, radio, psnr = scenario.sim, scenario.policy, scenario.radio, scenario.psnr
    return {
        "name": scenario.name,
        "description": scenario.description,
        "radio": {
            "tx_power": radio.tx_power,
            "noise_floor": radio.noise_floor,
            "ref_loss": radio.ref_loss,
            "pathloss_exponent": radio.pathloss_exponent,
        },
        "rate_table": scenario.rate_table_name
        or {"tiers": [[_number(s), _number(r)] for s, r in scenario.rate_table.to_pairs()]},
        "per_model": {
            "reference_packet": scenario.per_model.reference_packet,
            "tiers": [[t.midpoint, t.slope] for t in scenario.per_model.tiers],
        },
        "access_points": [
            {"id": ap.id, "position": list(ap.position), "channel": ap.channel}
            for ap in scenario.access_points
        ],
        "profiles": profiles,
        "stations": stations,
        "snr_overrides": [
            {"ap": ap, "station": station, "snr_db": snr}
            for (ap, station), snr in sorted(scenario.snr_overrides.items())
        ],
        "policy": {
            "kind": scenario.policy_kind.value,
            "beta": policy.beta,
            "assoc_threshold": policy.assoc_threshold,
            "max_handoffs": policy.max_handoffs,
            "guard_inclusive": policy.guard_inclusive,
        },
        "sim": {
            "duration": sim.duration,
            "seed": sim.seed,
            "queue_capacity": sim.queue_capacity,
            "retry_limit": sim.retry_limit,
            "per_packet_overhead": sim.per_packet_overhead,
        },
        "psnr": {
            "psnr_max": psnr.psnr_max,
            "psnr_min": psnr.psnr_min,
            "playout_deadline": psnr.playout_deadline,
        },
    }


def dump_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2) + "\n"
