"""TOML configuration shared by the CLI: scoring, density, mask, experiment.

The bundled defaults (``data/default.toml``) carry the reference parameter
set; a user file overrides any subset of keys, and CLI flags override the
file. Every load is validated through the dataclass constructors, so a
bad value fails early with ConfigError.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .confidence import EmaInit, ScoringConfig, ScoringVariant
from .density_control import DensityPolicyConfig, Modulation, ScaleSource
from .errors import ConfigError
from .quality_mask import MaskConfig
from .splat_sim.experiment import ExperimentConfig
from .splat_sim.sequence import SequenceConfig

_SECTIONS = ("scoring", "density", "mask", "experiment", "sequence")


@dataclass
class CliConfig:
    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    density: DensityPolicyConfig = field(default_factory=DensityPolicyConfig)
    mask: MaskConfig = field(default_factory=MaskConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    sequence: SequenceConfig = field(default_factory=SequenceConfig)


def _enum_lookup(enum_cls, value: str, where: str):
    for member in enum_cls:
        if member.value == value:
            return member
    choices = ", ".join(m.value for m in enum_cls)
    raise ConfigError(f"{where}: unknown value {value!r} (choose from {choices})")


def _build_scoring(raw: dict) -> ScoringConfig:
    kwargs = dict(raw)
    if "variant" in kwargs:
        kwargs["variant"] = _enum_lookup(ScoringVariant, kwargs["variant"], "scoring.variant")
    if "ema_init" in kwargs:
        kwargs["ema_init"] = _enum_lookup(EmaInit, kwargs["ema_init"], "scoring.ema_init")
    return ScoringConfig(**kwargs)


def _build_density(raw: dict) -> DensityPolicyConfig:
    kwargs = dict(raw)
    if "modulation" in kwargs:
        kwargs["modulation"] = _enum_lookup(Modulation, kwargs["modulation"], "density.modulation")
    if "scale_source" in kwargs:
        kwargs["scale_source"] = _enum_lookup(ScaleSource, kwargs["scale_source"], "density.scale_source")
    return DensityPolicyConfig(**kwargs)


def _merged_sections(*documents: dict) -> dict:
    merged: dict[str, dict] = {name: {} for name in _SECTIONS}
    for doc in documents:
        for name, section in doc.items():
            if name not in merged:
                raise ConfigError(f"unknown config section [{name}]")
            if not isinstance(section, dict):
                raise ConfigError(f"section [{name}] must be a table")
            merged[name].update(section)
    return merged


def default_toml_text() -> str:
    return resources.files("splatctl").joinpath("data/default.toml").read_text(encoding="utf-8")


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> CliConfig:
    """Layered load: bundled defaults, then ``path``, then ``overrides``.

    ``overrides`` maps section name to a dict of replacement keys, mirroring
    the TOML structure.
    """
    documents = [tomllib.loads(default_toml_text())]
    if path is not None:
        try:
            documents.append(tomllib.loads(Path(path).read_text(encoding="utf-8")))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config file {path}: {exc}") from None
    if overrides:
        documents.append({k: dict(v) for k, v in overrides.items() if v})

    merged = _merged_sections(*documents)
    # The experiment table embeds the other configs; a single seed fans out.
    try:
        scoring = _build_scoring(merged["scoring"])
        density = _build_density(merged["density"])
        mask = MaskConfig(**merged["mask"])
        sequence = SequenceConfig(**merged["sequence"])
        experiment = ExperimentConfig(scoring=scoring, density=density, mask=mask, **merged["experiment"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return CliConfig(scoring=scoring, density=density, mask=mask, experiment=experiment, sequence=sequence)


def apply_seed(cfg: CliConfig, seed: int) -> CliConfig:
    """Route one root seed to every randomness consumer."""
    from dataclasses import replace

    mask = replace(cfg.mask, seed_base=seed)
    return CliConfig(
        scoring=cfg.scoring,
        density=cfg.density,
        mask=mask,
        experiment=replace(cfg.experiment, seed=seed, mask=mask),
        sequence=replace(cfg.sequence, seed=seed),
    )
