"""Experiment configuration: flat ``key = value`` files with sections.

A config file fully determines one experiment (representation, model,
cross-validation protocol, and input paths), so rerunning the same file
reproduces the same outputs byte for byte.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .bow import RepresentationConfig, MTERM_STRATEGIES, THIRDS_CORPUS_WIDE, THIRDS_PER_FORMULA
from .mterms import WeightScheme

METHOD_LSI = "lsi"
METHOD_LDA = "lda"
METHOD_TFIDF_LSI = "tfidf-lsi"
METHOD_TFIDF_LDA = "tfidf-lda"
METHODS = (METHOD_LSI, METHOD_LDA, METHOD_TFIDF_LSI, METHOD_TFIDF_LDA)


class ConfigError(ValueError):
    """Raised for unknown keys, bad values, or missing required fields."""


@dataclass
class ExperimentConfig:
    config_id: str
    method: str = METHOD_TFIDF_LSI
    num_topics: int = 50
    folds: int = 2
    reruns: int = 4
    base_seed: int = 42
    include_diagonal: bool = True
    representation: RepresentationConfig = field(default_factory=RepresentationConfig)
    weight_scheme: WeightScheme = field(default_factory=WeightScheme)
    lda_gamma_threshold: float = 1e-3
    lda_iterations: int = 100
    lda_passes: int = 10
    corpus_dir: str | None = None
    metadata_path: str | None = None
    msc_spec_path: str | None = None
    ordering_path: str | None = None

    def __post_init__(self) -> None:
        if not self.config_id:
            raise ConfigError("config_id must be nonempty")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.num_topics < 1:
            raise ConfigError("num_topics must be at least 1")
        if self.folds < 2:
            raise ConfigError("folds must be at least 2")
        if self.reruns < 1:
            raise ConfigError("reruns must be at least 1")
        if self.lda_iterations < 1 or self.lda_passes < 1:
            raise ConfigError("lda iterations and passes must be at least 1")
        if self.lda_gamma_threshold <= 0:
            raise ConfigError("lda gamma_threshold must be positive")


# section -> key -> (type tag, target attribute)
_SCHEMA: dict[str, dict[str, tuple[str, str]]] = {
    "experiment": {
        "config_id": ("str", "config_id"),
        "method": ("str", "method"),
        "num_topics": ("int", "num_topics"),
        "folds": ("int", "folds"),
        "reruns": ("int", "reruns"),
        "base_seed": ("int", "base_seed"),
        "include_diagonal": ("bool", "include_diagonal"),
    },
    "representation": {
        "use_text": ("bool", "use_text"),
        "use_tex": ("bool", "use_tex"),
        "mterm_strategy": ("str", "mterm_strategy"),
        "mtmod_scale": ("float", "mtmod_scale"),
        "remove_stopwords": ("bool", "remove_stopwords"),
        "apply_stemming": ("bool", "apply_stemming"),
        "include_operand_runs": ("bool", "include_operand_runs"),
        "thirds_scope": ("str", "thirds_scope"),
    },
    "weights": {
        "level_coeff": ("float", "level_coeff"),
        "var_coeff": ("float", "var_coeff"),
        "const_coeff": ("float", "const_coeff"),
    },
    "lda": {
        "gamma_threshold": ("float", "lda_gamma_threshold"),
        "iterations": ("int", "lda_iterations"),
        "passes": ("int", "lda_passes"),
    },
    "paths": {
        "corpus": ("str", "corpus_dir"),
        "metadata": ("str", "metadata_path"),
        "msc_spec": ("str", "msc_spec_path"),
        "ordering": ("str", "ordering_path"),
    },
}


def _convert(kind: str, raw: str, where: str):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            lowered = raw.strip().lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {kind}") from exc


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate one experiment config file.

    Unknown sections and keys are rejected by name so typos cannot silently
    fall back to defaults.
    """
    parser = configparser.ConfigParser(interpolation=None)
    read = parser.read(path, encoding="utf-8")
    if not read:
        raise ConfigError(f"config file not found: {path}")

    values: dict[str, object] = {}
    rep_values: dict[str, object] = {}
    weight_values: dict[str, object] = {}
    for section in parser.sections():
        schema = _SCHEMA.get(section)
        if schema is None:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, raw in parser.items(section):
            entry = schema.get(key)
            if entry is None:
                raise ConfigError(f"{path}: unknown key {key!r} in section [{section}]")
            kind, attr = entry
            converted = _convert(kind, raw, f"{path} [{section}] {key}")
            if section == "representation":
                rep_values[attr] = converted
            elif section == "weights":
                weight_values[attr] = converted
            else:
                values[attr] = converted

    if "config_id" not in values:
        raise ConfigError(f"{path}: [experiment] config_id is required")
    try:
        representation = RepresentationConfig(**rep_values)
        weight_scheme = WeightScheme(**weight_values)
        return ExperimentConfig(
            representation=representation, weight_scheme=weight_scheme, **values
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def write_config(config: ExperimentConfig, path: str | Path) -> None:
    """Render a config back to the flat file format (used by generators)."""
    rep = config.representation
    scheme = config.weight_scheme
    lines = [
        "[experiment]",
        f"config_id = {config.config_id}",
        f"method = {config.method}",
        f"num_topics = {config.num_topics}",
        f"folds = {config.folds}",
        f"reruns = {config.reruns}",
        f"base_seed = {config.base_seed}",
        f"include_diagonal = {str(config.include_diagonal).lower()}",
        "",
        "[representation]",
        f"use_text = {str(rep.use_text).lower()}",
        f"use_tex = {str(rep.use_tex).lower()}",
        f"mterm_strategy = {rep.mterm_strategy}",
        f"mtmod_scale = {rep.mtmod_scale!r}",
        f"remove_stopwords = {str(rep.remove_stopwords).lower()}",
        f"apply_stemming = {str(rep.apply_stemming).lower()}",
        f"include_operand_runs = {str(rep.include_operand_runs).lower()}",
        f"thirds_scope = {rep.thirds_scope}",
        "",
        "[weights]",
        f"level_coeff = {scheme.level_coeff!r}",
        f"var_coeff = {scheme.var_coeff!r}",
        f"const_coeff = {scheme.const_coeff!r}",
        "",
        "[lda]",
        f"gamma_threshold = {config.lda_gamma_threshold!r}",
        f"iterations = {config.lda_iterations}",
        f"passes = {config.lda_passes}",
    ]
    paths = [
        ("corpus", config.corpus_dir),
        ("metadata", config.metadata_path),
        ("msc_spec", config.msc_spec_path),
        ("ordering", config.ordering_path),
    ]
    set_paths = [(k, v) for k, v in paths if v is not None]
    if set_paths:
        lines.append("")
        lines.append("[paths]")
        lines.extend(f"{k} = {v}" for k, v in set_paths)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
