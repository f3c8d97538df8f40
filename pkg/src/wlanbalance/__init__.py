"""
wlanbalance - downlink 802.11 multi-AP simulator comparing strongest-SNR,
load-balancing and SNR-guarded load-balancing association policies
"""

from .errors import (
    ConfigurationError,
    ExperimentError,
    PolicyUsageError,
    ScenarioError,
    UndefinedStatisticError,
    UnknownEntityError,
    WlanSimError,
)
from .macsim import SimConfig, SimResult, run
from .metrics import PsnrParams, QosReport, qos_report
from .network import NetworkState, associate
from .policies import PolicyKind, PolicyParams, initial_association, rebalance
from .scenario import Scenario

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "ExperimentError",
    "NetworkState",
    "PolicyKind",
    "PolicyParams",
    "PolicyUsageError",
    "PsnrParams",
    "QosReport",
    "Scenario",
    "ScenarioError",
    "SimConfig",
    "SimResult",
    "UndefinedStatisticError",
    "UnknownEntityError",
    "WlanSimError",
    "associate",
    "initial_association",
    "qos_report",
    "rebalance",
    "run",
]
