"""Setup script for the wlanbalance package."""

from setuptools import find_packages, setup

setup(
    name="wlanbalance",
    version="0.1.0",
    description="Discrete-event simulator for SNR-aware load balancing across overlapping 802.11 cells",
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    package_data={"wlanbalance.harness": ["scenario_schema.json", "rate_tables.yaml"]},
    install_requires=[
        "numpy>=1.21.0",
        "pandas>=1.5.0",
        "PyYAML>=6.0.0",
        "jsonschema>=4.0.0",
        "pydantic>=2.0.0",
    ],
    extras_require={"parallel": ["ray>=2.0.0"]},
    entry_points={
        "console_scripts": [
            "wlanbalance=wlanbalance.harness.cli:main",
        ],
    },
    python_requires=">=3.11",
)
