# config.py: scenario / experiment JSON ingestion with env fallbacks
#
# Scenario documents use 1-based indices for duplicate_pairs; the in-memory
# Scenario is 0-based. Conversion happens only here.
import json
import logging
import os
from pathlib import Path
from typing import Any

from errors import ConfigError, KernelGramError
from models import (DEFAULT_COND_THRESHOLD, ExperimentConfig, Harmonic,
                    NoiseSpec, Scenario, SignalEnsemble)

logger = logging.getLogger("config")


def get_val(doc: dict, key: str, env_key: str, default: Any = None) -> Any:
    """File value first, then the environment, then the default."""
    value = doc.get(key)
    if value is None or str(value).strip() == "":
        value = os.getenv(env_key)
    if value is None or str(value).strip() == "":
        value = default
    return value


def default_workers() -> int:
    try:
        return max(1, int(os.getenv("KGRAM_WORKERS", "1")))
    except ValueError:
        raise ConfigError(f"KGRAM_WORKERS must be an integer, got {os.getenv('KGRAM_WORKERS')!r}") from None


def _read_json(path) -> dict:
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON in {path}: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path} must hold a JSON object")
    return doc


# ─── Scenario ─────────────────────────────────────────────────────────────────

def scenario_from_dict(doc: dict) -> Scenario:
    try:
        signals = SignalEnsemble(tuple(
            tuple(Harmonic(h=int(t["h"]), a=float(t.get("a", 0.0)), b=float(t.get("b", 0.0)))
                  for t in sig["harmonics"])
            for sig in doc["signals"]
        ))
        n = int(doc.get("n", signals.n))
        if n != signals.n:
            raise ConfigError(f"n={n} but {signals.n} signals were given")
        noise = NoiseSpec(
            family=doc.get("noise_family", "gaussian_iid"),
            sigma_bar_sq=float(doc.get("sigma_bar_sq", 0.0)),
            hetero_amplitude=float(doc.get("hetero_amplitude", 0.0)),
            seed=int(doc.get("seed", 0)),
        )
        pairs = []
        for pair in doc.get("duplicate_pairs", []):
            i, j = (int(v) for v in pair)
            if i < 1 or j < 1:
                raise ConfigError(f"duplicate_pairs are 1-based, got {list(pair)}")
            pairs.append((i - 1, j - 1))
        return Scenario(
            signals=signals,
            noise=noise,
            clean_prefix=int(doc.get("clean_prefix", 0)),
            gamma=float(doc.get("gamma", 1.0)),
            duplicate_pairs=tuple(pairs),
        )
    except KernelGramError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"invalid scenario: {e}") from e
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"malformed scenario document: {e!r}") from e


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "n": scenario.n,
        "gamma": scenario.gamma,
        "sigma_bar_sq": scenario.noise.sigma_bar_sq,
        "noise_family": scenario.noise.family.value,
        "hetero_amplitude": scenario.noise.hetero_amplitude,
        "clean_prefix": scenario.clean_prefix,
        "seed": scenario.noise.seed,
        "signals": [
            {"harmonics": [{"h": t.h, "a": t.a, "b": t.b} for t in sig]}
            for sig in scenario.signals.signals
        ],
        "duplicate_pairs": [[i + 1, j + 1] for i, j in scenario.duplicate_pairs],
    }


def load_scenario(path) -> Scenario:
    scenario = scenario_from_dict(_read_json(path))
    logger.info(f"[CONFIG] Loaded scenario {path}: n={scenario.n} ℓ={scenario.clean_prefix}")
    return scenario


# ─── Experiment ───────────────────────────────────────────────────────────────

def experiment_from_dict(doc: dict, base_dir: Path = Path(".")) -> ExperimentConfig:
    if "scenario" in doc:
        scenario = scenario_from_dict(doc["scenario"])
        default_id = "scenario"
    elif "scenario_path" in doc:
        scenario_path = Path(doc["scenario_path"])
        if not scenario_path.is_absolute():
            scenario_path = base_dir / scenario_path
        scenario = load_scenario(scenario_path)
        default_id = scenario_path.stem
    else:
        raise ConfigError("experiment config needs either 'scenario' or 'scenario_path'")

    try:
        return ExperimentConfig(
            scenario=scenario,
            dims=tuple(int(d) for d in doc["dims"]),
            trials=int(doc.get("trials", 20)),
            estimators=tuple(doc.get("estimators", ("raw", "full_noise"))),
            output_path=Path(doc.get("output_path", "report.csv")),
            cond_threshold=float(get_val(doc, "cond_threshold", "KGRAM_COND_THRESHOLD", DEFAULT_COND_THRESHOLD)),
            scenario_id=str(doc.get("scenario_id", default_id)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"malformed experiment config: {e!r}") from e


def load_experiment(path) -> ExperimentConfig:
    path = Path(path)
    cfg = experiment_from_dict(_read_json(path), base_dir=path.parent)
    logger.info(f"[CONFIG] Loaded experiment {path}: dims={list(cfg.dims)} trials={cfg.trials} "
                f"estimators={list(cfg.estimators)}")
    return cfg


def load_any_scenario(path) -> Scenario:
    """A scenario document, or the scenario embedded in an experiment config."""
    path = Path(path)
    doc = _read_json(path)
    if "signals" in doc:
        return scenario_from_dict(doc)
    return experiment_from_dict(doc, base_dir=path.parent).scenario
