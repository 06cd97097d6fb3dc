"""Scripted-client load and correctness harness."""

from .harness import SimConfig, SimReport, SimTimeout, ConnectFailure, run_simulation

__all__ = ["SimConfig", "SimReport", "SimTimeout", "ConnectFailure", "run_simulation"]
