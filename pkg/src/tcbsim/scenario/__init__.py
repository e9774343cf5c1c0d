"""Scenario scripts: schema-validated deterministic event programs."""

from tcbsim.scenario.runner import build_world, run_script, run_world
from tcbsim.scenario.script import load_script, validate_script

__all__ = ["build_world", "load_script", "run_script", "run_world",
           "validate_script"]
