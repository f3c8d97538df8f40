#!/usr/bin/env python3
"""
WLAN load-balancing simulator CLI

Thin wrapper so the harness runs from a source checkout without installing:

  python simulate.py exp2 --scenario scenarios/exp2.json --snr 80 --out exp2.csv
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent / "src"))

from wlanbalance.harness.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
