"""Run configuration: flat key=value files, defaults, and stable hashing.

Every command-line artifact embeds the configuration hash computed here, so
a report can always be traced back to the exact knob settings that made it.
"""

import hashlib
import os
from dataclasses import dataclass, field, fields

from . import __version__
from .core import Precision, UsageError
from .explicit_formula import CONSTANT_NAMES

__all__ = [
    "Config",
    "DEFAULT_CONFIG",
    "CACHE_ENV_VAR",
    "load_config",
    "parse_overrides",
    "merge_config",
    "effective_cache_path",
    "report_envelope",
]

CACHE_ENV_VAR = "WITNESSKIT_CACHE"

# constant names accepted in config files: the estimation-chain family plus
# the three theorem constants and the direct-sum threshold constant
ALLOWED_CONSTANTS = tuple(CONSTANT_NAMES) + ("C_A", "C_B", "C_C", "A_threshold")

_INT_KEYS = ("precision_digits", "witness_cap", "seed")
_FLOAT_KEYS = ("H", "delta", "epsilon", "zero_height")
_STR_KEYS = ("cache_path",)


@dataclass(frozen=True)
class Config:
    """Flat run configuration; all numeric entries must be positive."""

    precision_digits: int = 30
    H: float = 0.5
    delta: float = 0.1
    epsilon: float = 0.1
    zero_height: float = 30.0
    witness_cap: int = 1_000_000
    cache_path: str = "witnesskit_zeros.tsv"
    seed: int = 1
    constants: tuple[tuple[str, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        for name in _INT_KEYS + _FLOAT_KEYS:
            if getattr(self, name) <= 0:
                raise UsageError(f"config entry {name} must be positive")
        seen = set()
        for name, value in self.constants:
            if name not in ALLOWED_CONSTANTS:
                raise UsageError(f"unknown constant {name!r} in config")
            if name in seen:
                raise UsageError(f"constant {name!r} set twice")
            if value <= 0:
                raise UsageError(f"constant {name} must be positive")
            seen.add(name)

    def constant(self, name: str, default: float = 1.0) -> float:
        for key, value in self.constants:
            if key == name:
                return value
        return default

    def constants_dict(self) -> dict:
        return dict(self.constants)

    def precision(self) -> Precision:
        return Precision(decimal_digits=self.precision_digits)

    def as_lines(self) -> list[str]:
        """Canonical key=value serialization (sorted, constants inline)."""
        out = []
        for f in fields(self):
            if f.name == "constants":
                continue
            out.append(f"{f.name}={getattr(self, f.name)}")
        out.extend(f"{k}={v}" for k, v in self.constants)
        return sorted(out)

    def hash(self) -> str:
        digest = hashlib.sha256("\n".join(self.as_lines()).encode("ascii"))
        return digest.hexdigest()[:12]

    def echo(self) -> dict:
        """Full flat settings map for embedding in reports."""
        out = {f.name: getattr(self, f.name) for f in fields(self)
               if f.name != "constants"}
        out.update(dict(self.constants))
        return out


DEFAULT_CONFIG = Config()


def _parse_pairs(pairs, where: str) -> Config:
    plain: dict = {}
    consts: dict = {}
    for key, raw in pairs:
        if key in plain or key in consts:
            raise UsageError(f"duplicate key {key!r} in {where}")
        if key in _STR_KEYS:
            plain[key] = raw
            continue
        if key in _INT_KEYS:
            cast: type = int
        elif key in _FLOAT_KEYS or key in ALLOWED_CONSTANTS:
            cast = float
        else:
            raise UsageError(f"unknown config key {key!r} in {where}")
        try:
            value = cast(raw)
        except ValueError:
            raise UsageError(f"bad value {raw!r} for {key} in {where}") from None
        if key in ALLOWED_CONSTANTS:
            consts[key] = value
        else:
            plain[key] = value
    return Config(**plain, constants=tuple(sorted(consts.items())))


def load_config(path: str) -> Config:
    """Read a flat key=value file; '#' starts a comment, blank lines skip."""
    pairs = []
    try:
        with open(path, encoding="ascii") as fh:
            for lineno, line in enumerate(fh, start=1):
                body = line.split("#", 1)[0].strip()
                if not body:
                    continue
                if "=" not in body:
                    raise UsageError(
                        f"{path}:{lineno}: expected key=value, got {body!r}")
                key, raw = body.split("=", 1)
                pairs.append((key.strip(), raw.strip()))
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    return _parse_pairs(pairs, path)


def parse_overrides(tokens) -> list[tuple[str, str]]:
    """Split command-line key=value override tokens."""
    pairs = []
    for tok in tokens:
        if "=" not in tok:
            raise UsageError(f"override {tok!r} is not key=value")
        key, raw = tok.split("=", 1)
        pairs.append((key.strip(), raw.strip()))
    return pairs


def merge_config(base: Config, overrides) -> Config:
    """Apply key=value override pairs on top of an existing Config."""
    merged = {key: raw for key, raw in
              ((f.name, str(getattr(base, f.name))) for f in fields(base)
               if f.name != "constants")}
    consts = {k: str(v) for k, v in base.constants}
    for key, raw in overrides:
        if key in ALLOWED_CONSTANTS:
            consts[key] = raw
        else:
            merged[key] = raw
    pairs = list(merged.items()) + list(sorted(consts.items()))
    return _parse_pairs(pairs, "overrides")


def effective_cache_path(cfg: Config) -> str:
    """Config cache path, unless the environment overrides it."""
    return os.environ.get(CACHE_ENV_VAR, cfg.cache_path)


def report_envelope(cfg: Config, command: str) -> dict:
    """The provenance block every emitted report carries."""
    return {
        "command": command,
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "precision_digits": cfg.precision_digits,
        "version": __version__,
    }
