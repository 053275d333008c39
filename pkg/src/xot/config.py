"""Run configuration: defaults, file loading, validation, hashing.

Configuration is a plain nested dict. A YAML or JSON file (JSON being a
YAML subset) is merged over the defaults; unknown keys are rejected so
typos fail loudly instead of silently running with defaults. The hash
of the validated config identifies a run in report metadata.
"""

from __future__ import annotations

import copy
import hashlib
import json
from typing import Any, Dict, Mapping, Optional

import yaml

from .core import parse_method_order

VERIFY_MODES = ("passive_and_active", "passive_only")
PLAN_MODES = ("llm", "fixed")
RUN_MODES = ("xot", "vote", "oracle", "single:pot", "single:eot", "single:cot")

DEFAULTS: Dict[str, Any] = {
    "model": "gpt-3.5-turbo",
    "provider_id": "openai",
    "methods": "PEC",
    "mode": "xot",
    "refine_rounds": 0,
    "plan": {
        "mode": "llm",
        "fixed_order": "PEC",
    },
    "verify": {
        "mode": "passive_and_active",
        "dataset_overrides": {"aqua": "passive_only"},
    },
    "prompts": {
        "dir": None,
        "exemplar_count": 8,
        "exemplar_seeds": None,
    },
    "decoding": {
        "temperature": 0.0,
        "max_tokens": 512,
    },
    "exec": {
        "timeout_secs": 10.0,
        "max_procs": None,
        "runtime": None,
    },
    "gateway": {
        "rate_per_min": 60,
        "max_retries": 3,
    },
    "bench": {
        "workers": 4,
    },
}


class ConfigError(Exception):
    pass


def _merge(base: Dict[str, Any], override: Mapping[str, Any], prefix: str = "") -> None:
    for key, value in override.items():
        dotted = prefix + key
        if key not in base:
            raise ConfigError("unknown config key %r" % dotted)
        current = base[key]
        if isinstance(current, dict) and key != "dataset_overrides":
            if not isinstance(value, Mapping):
                raise ConfigError("config key %r must be a mapping" % dotted)
            _merge(current, value, dotted + ".")
        else:
            base[key] = value


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _check_order(value: Any, key: str) -> None:
    _require(isinstance(value, str) and value != "", "%s must be a non-empty string" % key)
    try:
        parse_method_order(value)
    except (KeyError, ValueError) as exc:
        raise ConfigError("%s: %s" % (key, exc)) from None


def validate_config(cfg: Dict[str, Any]) -> None:
    _require(isinstance(cfg["model"], str) and cfg["model"] != "", "model must be set")
    _require(isinstance(cfg["provider_id"], str), "provider_id must be a string")
    _check_order(cfg["methods"], "methods")
    _require(cfg["mode"] in RUN_MODES, "mode must be one of %s" % ", ".join(RUN_MODES))
    _require(cfg["refine_rounds"] in (0, 1), "refine_rounds must be 0 or 1")

    plan = cfg["plan"]
    _require(plan["mode"] in PLAN_MODES, "plan.mode must be llm or fixed")
    _check_order(plan["fixed_order"], "plan.fixed_order")

    verify = cfg["verify"]
    _require(verify["mode"] in VERIFY_MODES, "verify.mode must be one of %s" % ", ".join(VERIFY_MODES))
    overrides = verify["dataset_overrides"]
    _require(isinstance(overrides, Mapping), "verify.dataset_overrides must be a mapping")
    for dataset, mode in overrides.items():
        _require(
            mode in VERIFY_MODES,
            "verify.dataset_overrides[%r] must be one of %s" % (dataset, ", ".join(VERIFY_MODES)),
        )

    prompts = cfg["prompts"]
    _require(
        prompts["dir"] is None or isinstance(prompts["dir"], str),
        "prompts.dir must be a path or null",
    )
    count = prompts["exemplar_count"]
    _require(isinstance(count, int) and count > 0, "prompts.exemplar_count must be a positive integer")
    seeds = prompts["exemplar_seeds"]
    if seeds is not None:
        _require(
            isinstance(seeds, (list, tuple))
            and len(seeds) > 0
            and all(isinstance(s, int) for s in seeds),
            "prompts.exemplar_seeds must be a non-empty list of integers",
        )

    decoding = cfg["decoding"]
    _require(
        isinstance(decoding["temperature"], (int, float)) and decoding["temperature"] >= 0,
        "decoding.temperature must be >= 0",
    )
    _require(
        isinstance(decoding["max_tokens"], int) and decoding["max_tokens"] > 0,
        "decoding.max_tokens must be a positive integer",
    )

    exec_cfg = cfg["exec"]
    _require(
        isinstance(exec_cfg["timeout_secs"], (int, float)) and exec_cfg["timeout_secs"] > 0,
        "exec.timeout_secs must be > 0",
    )
    max_procs = exec_cfg["max_procs"]
    _require(
        max_procs is None or (isinstance(max_procs, int) and max_procs > 0),
        "exec.max_procs must be a positive integer or null",
    )
    _require(
        exec_cfg["runtime"] is None or isinstance(exec_cfg["runtime"], str),
        "exec.runtime must be a path or null",
    )

    gateway = cfg["gateway"]
    _require(
        isinstance(gateway["rate_per_min"], (int, float)) and gateway["rate_per_min"] > 0,
        "gateway.rate_per_min must be > 0",
    )
    _require(
        isinstance(gateway["max_retries"], int) and gateway["max_retries"] >= 0,
        "gateway.max_retries must be >= 0",
    )

    workers = cfg["bench"]["workers"]
    _require(isinstance(workers, int) and workers >= 1, "bench.workers must be >= 1")


def load_config(
    path: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> Dict[str, Any]:
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        with open(path, encoding="utf-8") as handle:
            try:
                loaded = yaml.safe_load(handle)
            except yaml.YAMLError as exc:
                raise ConfigError("cannot parse %s: %s" % (path, exc)) from None
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, Mapping):
            raise ConfigError("%s: top level must be a mapping" % path)
        _merge(cfg, loaded)
    if overrides:
        _merge(cfg, overrides)
    validate_config(cfg)
    return cfg


def config_hash(cfg: Mapping[str, Any]) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
