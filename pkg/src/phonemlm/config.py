"""Flat ``key = value`` experiment config files.

Values are written as JSON literals so that types survive a round trip;
unquoted values that are not valid JSON are read back as plain strings.
"""
import json
import os
from pathlib import Path
from typing import Dict, Mapping

from .errors import ConfigError

ENV_PREFIX = "PHONEMLM_"


class PipelineConfig(dict):
    @classmethod
    def parse(cls, text: str, source: str = "<config>") -> "PipelineConfig":
        cfg = cls()
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{source}:{lineno}: expected key = value")
            key, value = (p.strip() for p in line.split("=", 1))
            key = key.replace("-", "_")
            if not key.isidentifier():
                raise ConfigError(f"{source}:{lineno}: invalid key {key!r}")
            try:
                cfg[key] = json.loads(value)
            except ValueError:
                cfg[key] = value
        return cfg

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
        return cls.parse(text, str(path))

    @classmethod
    def from_env(cls, environ: Mapping[str, str] = os.environ) -> "PipelineConfig":
        """String values of ``PHONEMLM_<KEY>`` variables (converted later by the flag types)."""
        return cls({k[len(ENV_PREFIX):].lower(): v for k, v in environ.items() if k.startswith(ENV_PREFIX)})

    def dumps(self) -> str:
        return "".join(f"{k} = {json.dumps(v, ensure_ascii=False)}\n" for k, v in sorted(self.items()))

    def to_file(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")
