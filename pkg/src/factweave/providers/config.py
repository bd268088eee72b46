"""Provider configuration files.

One document maps provider kinds to endpoint settings:

    {
      "chat_llm": {
        "endpoint": "https://api.example.com/v1/chat/completions",
        "model": "general-8b",
        "api_key_env": "CHAT_API_KEY",
        "max_in_flight": 4,
        "timeout": 30,
        "cost": {"per_1k_prompt_tokens": 0.002, "per_1k_completion_tokens": 0.006}
      },
      ...
    }

JSON always works; TOML works on interpreters that ship tomllib.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

from .base import CostTable, ProviderKind, ProviderSettings

try:  # tomllib arrived in Python 3.11
    import tomllib  # type: ignore[import-not-found]
except ImportError:
    tomllib = None


class MalformedProviderConfig(ValueError):
    pass


def _parse_cost(raw: dict) -> CostTable:
    known = {"per_call", "per_1k_prompt_tokens", "per_1k_completion_tokens"}
    unknown = set(raw) - known
    if unknown:
        raise MalformedProviderConfig(f"unknown cost fields: {sorted(unknown)}")
    return CostTable(
        per_call=float(raw.get("per_call", 0.0)),
        per_1k_prompt_tokens=float(raw.get("per_1k_prompt_tokens", 0.0)),
        per_1k_completion_tokens=float(raw.get("per_1k_completion_tokens", 0.0)),
    )


def _parse_settings(kind: str, raw: dict) -> ProviderSettings:
    if not isinstance(raw, dict):
        raise MalformedProviderConfig(f"{kind}: settings must be an object")
    try:
        return ProviderSettings(
            endpoint=str(raw.get("endpoint", "")),
            model=str(raw.get("model", "")),
            api_key_env=str(raw.get("api_key_env", "")),
            max_in_flight=int(raw.get("max_in_flight", 8)),
            context_limit_chars=int(raw.get("context_limit_chars", 120_000)),
            timeout=float(raw.get("timeout", 30.0)),
            cost=_parse_cost(raw.get("cost", {})),
        )
    except (TypeError, ValueError) as exc:
        raise MalformedProviderConfig(f"{kind}: {exc}") from exc


def parse_provider_config(data: dict) -> dict[ProviderKind, ProviderSettings]:
    out: dict[ProviderKind, ProviderSettings] = {}
    valid = {k.value for k in ProviderKind}
    for key, raw in data.items():
        if key not in valid:
            raise MalformedProviderConfig(
                f"unknown provider kind {key!r}; expected one of {sorted(valid)}"
            )
        out[ProviderKind(key)] = _parse_settings(key, raw)
    return out


def load_provider_config(path: Union[str, Path]) -> dict[ProviderKind, ProviderSettings]:
    path = Path(path)
    raw = path.read_bytes()
    if path.suffix == ".toml":
        if tomllib is None:
            raise MalformedProviderConfig(
                "TOML config needs Python 3.11+; use JSON on this interpreter"
            )
        data = tomllib.loads(raw.decode("utf-8"))
    else:
        try:
            data = json.loads(raw.decode("utf-8"))
        except ValueError as exc:
            raise MalformedProviderConfig(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise MalformedProviderConfig(f"{path}: top level must be an object")
    return parse_provider_config(data)
