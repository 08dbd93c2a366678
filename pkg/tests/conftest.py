"""Shared test fixtures: shipped run configs and construction helpers."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from carpenter.carpenter import construct_dispatch
from carpenter.cli import config_from_mapping
from carpenter.operators import dirichlet_target, neumann_model

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def all_config_names() -> list[str]:
    return sorted(p.stem for p in CONFIG_DIR.glob("*.json"))


def load_config_doc(name: str) -> dict:
    path = CONFIG_DIR / name
    if path.suffix != ".json":
        path = path.with_suffix(".json")
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def load_run_config(name: str):
    return config_from_mapping(load_config_doc(name), label=name)


def construct_from_config(name: str):
    """Build a shipped config the way the command line would.

    Returns (config, oracle, result); the oracle is None for explicit
    sequence configs and the model oracle for demo-backed ones.
    """
    cfg = load_run_config(name)
    if cfg.demo == "neumann-dirichlet":
        oracle, lam = neumann_model(cfg.window)
        d = dirichlet_target(cfg.window)
    else:
        oracle, lam, d = None, cfg.lam, cfg.d
    result = construct_dispatch(
        oracle,
        lam,
        d,
        cfg.window,
        steps=cfg.steps,
        regime=cfg.regime,
        alpha=cfg.alpha,
        zero_tol=cfg.zero_tol,
        guard=cfg.guard,
        max_chains=cfg.max_chains,
    )
    return cfg, oracle, result


@pytest.fixture(scope="session")
def configs_dir() -> Path:
    assert CONFIG_DIR.is_dir(), "shipped configs directory is missing"
    return CONFIG_DIR
