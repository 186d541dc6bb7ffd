"""Python access to the STAR-RIS coverage/capacity simulator."""

import json

from ._starcco import Env, pareto_front, verify
from ._starcco import run_plan as _run_plan
from ._starcco import scenario_preset as _scenario_preset


def scenario_preset(name):
    return json.loads(_scenario_preset(name))


def make_env(scenario="desk", seed=0):
    """Environment from a preset name or a scenario dict."""
    if isinstance(scenario, str):
        scenario = {"preset": scenario}
    return Env(json.dumps(scenario), seed)


def run_plan(plan, out_dir, threads=0, resume=True):
    """Runs a plan dict (or path to a plan file); returns results.csv rows as dicts."""
    if isinstance(plan, dict):
        plan = json.dumps(plan)
    else:
        with open(plan) as f:
            plan = f.read()
    return _run_plan(plan, str(out_dir), threads, resume)


__all__ = ["Env", "make_env", "pareto_front", "run_plan", "scenario_preset", "verify"]
