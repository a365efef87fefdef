"""Run configuration.

Plain-text files with ``key = value`` lines, ``#`` comments, and
``include <path>`` directives (relative to the including file).  Keys are
registered with a type and default; unknown keys are rejected.  Environment
variables named ``SOCCERSUM_<KEY>`` (dots become underscores, uppercase)
override file values; explicit CLI flags override both.

Every run artifact embeds ``config_hash`` (short sha256 of the resolved
key=value listing) plus the seed, so downstream steps can refuse to mix
artifacts produced under different configurations.
"""
from __future__ import annotations

import hashlib
import os

from .core import ConfigError
from .stage1 import MilConfig
from .stage2 import HmaConfig
from .synth import GenConfig

ENV_PREFIX = "SOCCERSUM_"

# key -> (type, default); bool values parse from true/false/1/0/yes/no
KNOWN_KEYS: dict[str, tuple[type, object]] = {
    "seed": (int, 7),
    "jobs": (int, 1),
    "gen.matches": (int, 60),
    "gen.events_mean": (int, 1500),
    "gen.budget_min": (float, 110.0),
    "gen.budget_max": (float, 270.0),
    "gen.audio_rate": (int, 8000),
    "gen.audio_gain": (float, 3.0),
    "gen.audio_base_amp": (float, 0.05),
    "gen.noise_insert": (float, 0.08),
    "gen.noise_swap": (float, 0.02),
    "gen.goals_min": (int, 1),
    "gen.goals_max": (int, 3),
    "features.qualifier_dims": (int, 8),
    "pad.pre": (float, 5.0),
    "pad.post": (float, 10.0),
    "stage1.hidden": (int, 16),
    "stage1.window": (int, 10),
    "stage1.stride": (int, 5),
    "stage1.lse_r": (float, 8.0),
    "stage1.literal_lse": (bool, False),
    "stage1.epochs": (int, 100),
    "stage1.patience": (int, 20),
    "stage1.batch": (int, 32),
    "stage1.lr": (float, 1e-3),
    "stage1.neg_min_len": (int, 4),
    "stage1.beta": (float, 2.0),
    "stage2.hidden_modality": (int, 32),
    "stage2.hidden_fusion": (int, 16),
    "stage2.epochs": (int, 100),
    "stage2.patience": (int, 20),
    "stage2.batch": (int, 32),
    "stage2.lr": (float, 1e-3),
    "stage2.overlap_ratio": (float, 0.5),
    "stage3.samples": (int, 10),
    "stage3.sigma": (float, 0.05),
    "stage3.budget_tol": (float, 0.1),
    "stage3.mode": (str, "stop_first"),
    "eval.kfold": (int, 10),
    "eval.folds": (int, 10),
    "eval.beta": (float, 2.0),
}


def _parse_value(key: str, raw: str):
    typ, _default = KNOWN_KEYS[key]
    raw = raw.strip()
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        return typ(raw)
    except ValueError:
        raise ConfigError("key %r: cannot parse %r as %s" % (key, raw, typ.__name__))


class PipelineConfig:
    def __init__(self, values: dict | None = None):
        self.values = {k: d for k, (_t, d) in KNOWN_KEYS.items()}
        if values:
            for k, v in values.items():
                self.set(k, v)

    def set(self, key: str, value) -> None:
        if key not in KNOWN_KEYS:
            raise ConfigError("unknown configuration key %r" % key)
        if isinstance(value, str):
            value = _parse_value(key, value)
        self.values[key] = value

    def __getitem__(self, key: str):
        if key not in KNOWN_KEYS:
            raise ConfigError("unknown configuration key %r" % key)
        return self.values[key]

    def apply_env(self, environ=None) -> None:
        env = os.environ if environ is None else environ
        for key in KNOWN_KEYS:
            name = ENV_PREFIX + key.upper().replace(".", "_")
            if name in env:
                self.set(key, env[name])

    def canonical(self) -> str:
        lines = []
        for key in sorted(self.values):
            if key == "jobs":
                # worker count cannot change any result, so it is not part
                # of the experiment identity
                continue
            v = self.values[key]
            if isinstance(v, bool):
                v = "true" if v else "false"
            lines.append("%s = %s" % (key, v))
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:12]

    # typed sub-config builders -------------------------------------------
    def gen_config(self) -> GenConfig:
        return GenConfig(
            matches=self["gen.matches"],
            events_mean=self["gen.events_mean"],
            budget_min=self["gen.budget_min"],
            budget_max=self["gen.budget_max"],
            audio_rate=self["gen.audio_rate"],
            audio_gain=self["gen.audio_gain"],
            audio_base_amp=self["gen.audio_base_amp"],
            noise_insert=self["gen.noise_insert"],
            noise_swap=self["gen.noise_swap"],
            goals_min=self["gen.goals_min"],
            goals_max=self["gen.goals_max"],
            pad_pre=self["pad.pre"],
            pad_post=self["pad.post"],
        )

    def mil_config(self) -> MilConfig:
        return MilConfig(
            hidden=self["stage1.hidden"],
            window=self["stage1.window"],
            stride=self["stage1.stride"],
            lse_r=self["stage1.lse_r"],
            literal_lse=self["stage1.literal_lse"],
            epochs=self["stage1.epochs"],
            patience=self["stage1.patience"],
            batch=self["stage1.batch"],
            lr=self["stage1.lr"],
            neg_min_len=self["stage1.neg_min_len"],
            beta=self["stage1.beta"],
        )

    def hma_config(self) -> HmaConfig:
        return HmaConfig(
            hidden_modality=self["stage2.hidden_modality"],
            hidden_fusion=self["stage2.hidden_fusion"],
            epochs=self["stage2.epochs"],
            patience=self["stage2.patience"],
            batch=self["stage2.batch"],
            lr=self["stage2.lr"],
            overlap_ratio=self["stage2.overlap_ratio"],
        )


def _read_config_file(path: str, seen: set[str], cfg: PipelineConfig) -> None:
    real = os.path.realpath(path)
    if real in seen:
        raise ConfigError("include cycle at %r" % path)
    seen.add(real)
    if not os.path.exists(path):
        raise ConfigError("config file %r does not exist" % path)
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("include "):
                target = line[len("include ") :].strip()
                if not os.path.isabs(target):
                    target = os.path.join(os.path.dirname(path), target)
                _read_config_file(target, seen, cfg)
                continue
            if "=" not in line:
                raise ConfigError("%s:%d: expected 'key = value', got %r" % (path, lineno, line))
            key, _, raw = line.partition("=")
            try:
                cfg.set(key.strip(), raw.strip())
            except ConfigError as exc:
                raise ConfigError("%s:%d: %s" % (path, lineno, exc))


def load_config(path: str | None = None, overrides: dict | None = None,
                use_env: bool = True) -> PipelineConfig:
    """File -> environment -> explicit overrides, later wins."""
    cfg = PipelineConfig()
    if path:
        _read_config_file(path, set(), cfg)
    if use_env:
        cfg.apply_env()
    if overrides:
        for k, v in overrides.items():
            cfg.set(k, v)
    return cfg
