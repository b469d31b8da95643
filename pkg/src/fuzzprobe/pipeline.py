"""Pipeline orchestration: config parsing, validation, staged runs, manifest.

A single JSON config document drives a full reproduction:

    {"stimuli": {...}, "scorer": {...}, "smoother": {...},
     "analysis": {...}, "output": {...}}

`run_pipeline` executes generate -> score -> smooth -> analyze -> plot into
an artifact directory and finishes with a manifest of content digests. With
the oracle scorer the whole run is a pure function of the config: reruns are
byte-identical except for manifest timestamps.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import __version__
from .analysis import build_report, write_report
from .errors import ConfigurationError, StageError
from .membership import membership_from_dict
from .plotting import render_all
from .scoring import (
    OracleSpec,
    RemoteScorerConfig,
    cache_write,
    score_oracle,
    score_remote,
)
from .smoothing import SmootherConfig, build_curves, smooth, write_curves
from .stimuli import StimulusConfig, Unit, generate_dataset, write_pairs

__all__ = [
    "Diagnostic",
    "PipelineConfig",
    "RunResult",
    "default_config_path",
    "load_config",
    "parse_config",
    "validate",
    "run_pipeline",
    "verify_manifest",
]

ENDPOINT_ENV_VAR = "FUZZPROBE_ENDPOINT"


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding: where in the config, and what is wrong."""

    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


@dataclass(frozen=True)
class PipelineConfig:
    stimuli: StimulusConfig
    scorer_kind: str
    oracle: OracleSpec | None
    remote: RemoteScorerConfig | None
    smoother: SmootherConfig
    per_location: bool
    exponent_grid: tuple[float, ...]
    base_category: str
    target_category: str
    fit_on: str
    output_dir: str


@dataclass(frozen=True)
class RunResult:
    directory: Path
    manifest: dict


def default_config_path() -> Path:
    """Path of the shipped default configuration (oracle scorer)."""
    return Path(str(resources.files("fuzzprobe").joinpath("data/default_config.json")))


def load_config(path: str | Path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from exc


def _fail(path: str, message: str):
    err = ConfigurationError(f"{path}: {message}")
    err.config_path = path
    raise err


def _parse_stimuli(doc: Mapping) -> StimulusConfig:
    section = doc.get("stimuli")
    if section is None:
        return StimulusConfig()
    if not isinstance(section, Mapping):
        _fail("stimuli", "must be an object")
    kwargs: dict[str, Any] = {}
    if "units" in section:
        try:
            kwargs["units"] = tuple(Unit(u) for u in section["units"])
        except ValueError as exc:
            _fail("stimuli.units", str(exc))
    if "ranges" in section:
        ranges = {}
        for name, pair in section["ranges"].items():
            try:
                unit = Unit(name)
            except ValueError as exc:
                _fail("stimuli.ranges", str(exc))
            if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
                _fail(f"stimuli.ranges.{name}", "must be a [min, max] pair")
            ranges[unit] = (int(pair[0]), int(pair[1]))
        kwargs["ranges"] = ranges
    if "locations" in section:
        kwargs["locations"] = tuple(section["locations"])
    if "categories" in section:
        kwargs["categories"] = tuple(section["categories"])
    if section.get("negative_word") is not None:
        kwargs["negative_word"] = str(section["negative_word"])
    if "unit_labels" in section:
        try:
            kwargs["unit_labels"] = {
                Unit(name): str(label) for name, label in section["unit_labels"].items()
            }
        except ValueError as exc:
            _fail("stimuli.unit_labels", str(exc))
    try:
        return StimulusConfig(**kwargs)
    except ValueError as exc:
        _fail("stimuli", str(exc))


def _parse_oracle(section: Mapping, path: str, stimuli: StimulusConfig | None) -> OracleSpec:
    if "memberships" not in section:
        _fail(f"{path}.memberships", "oracle scorer needs per-unit membership functions")
    memberships: dict[Unit, dict[str, Any]] = {}
    for unit_name, per_category in section["memberships"].items():
        try:
            unit = Unit(unit_name)
        except ValueError as exc:
            _fail(f"{path}.memberships", str(exc))
        memberships[unit] = {}
        for category, mf_spec in per_category.items():
            try:
                memberships[unit][category] = membership_from_dict(mf_spec)
            except (KeyError, ValueError) as exc:
                _fail(f"{path}.memberships.{unit_name}.{category}", str(exc))
    try:
        spec = OracleSpec(
            memberships=memberships,
            noise_sigma=float(section.get("noise_sigma", 0.0)),
            seed=int(section.get("seed", 0)),
        )
    except ValueError as exc:
        _fail(path, str(exc))
    if stimuli is not None:
        for unit in stimuli.units:
            for category in stimuli.categories:
                if category not in memberships.get(unit, {}):
                    _fail(
                        f"{path}.memberships",
                        f"no membership for unit {unit.value!r}, category {category!r}",
                    )
    return spec


def _parse_scorer(
    doc: Mapping, stimuli: StimulusConfig | None, env: Mapping = os.environ
) -> tuple[str, OracleSpec | None, RemoteScorerConfig | None]:
    section = doc.get("scorer")
    if section is None:
        _fail("scorer", "missing section")
    kind = section.get("kind")
    if kind == "oracle":
        return "oracle", _parse_oracle(section, "scorer", stimuli), None
    if kind == "remote":
        endpoint = env.get(ENDPOINT_ENV_VAR) or section.get("endpoint")
        if not endpoint:
            _fail(
                "scorer.endpoint",
                f"remote scorer needs an endpoint (or {ENDPOINT_ENV_VAR})",
            )
        try:
            remote = RemoteScorerConfig(
                endpoint=str(endpoint),
                batch_size=int(section.get("batch_size", 64)),
                concurrency=int(section.get("concurrency", 4)),
            )
        except ValueError as exc:
            _fail("scorer", str(exc))
        return "remote", None, remote
    _fail("scorer.kind", f"must be 'oracle' or 'remote', got {kind!r}")


def _parse_smoother(doc: Mapping) -> tuple[SmootherConfig, bool]:
    section = doc.get("smoother") or {}
    lambda_min = float(section.get("lambda_min", 1e-4))
    lambda_max = float(section.get("lambda_max", 1e4))
    count = int(section.get("lambda_count", 50))
    if lambda_min <= 0:
        _fail("smoother.lambda_min", "must be positive")
    if lambda_max < lambda_min:
        _fail("smoother.lambda_max", f"max {lambda_max} below min {lambda_min}")
    if count < 1:
        _fail("smoother.lambda_count", "must be at least 1")
    grid = tuple(np.logspace(np.log10(lambda_min), np.log10(lambda_max), count))
    try:
        config = SmootherConfig(
            lambda_grid=grid,
            selection=section.get("selection", "gcv"),
            fixed_lambda=section.get("fixed_lambda"),
            clamp_output=bool(section.get("clamp_output", True)),
        )
    except ValueError as exc:
        _fail("smoother", str(exc))
    return config, bool(section.get("per_location", False))


def _parse_analysis(doc: Mapping, stimuli: StimulusConfig | None):
    section = doc.get("analysis") or {}
    rng = section.get("lambda_range", [1.0, 8.0])
    if not (isinstance(rng, (list, tuple)) and len(rng) == 2):
        _fail("analysis.lambda_range", "must be a [min, max] pair")
    lo, hi = float(rng[0]), float(rng[1])
    if lo <= 0:
        _fail("analysis.lambda_range", "exponents must be positive")
    if hi < lo:
        _fail("analysis.lambda_range", f"descending range [{rng[0]}, {rng[1]}]")
    count = int(section.get("lambda_count", 100))
    if count < 1:
        _fail("analysis.lambda_count", "must be at least 1")
    grid = tuple(np.linspace(lo, hi, count))
    base = section.get("base_category", "warm")
    target = section.get("target_category", "hot")
    fit_on = section.get("fit_on", "smoothed")
    if fit_on not in ("smoothed", "raw"):
        _fail("analysis.fit_on", f"must be 'smoothed' or 'raw', got {fit_on!r}")
    if stimuli is not None:
        for name, value in (("base_category", base), ("target_category", target)):
            if value not in stimuli.categories:
                _fail(f"analysis.{name}", f"{value!r} is not a configured category")
    return grid, base, target, fit_on


def _parse_output(doc: Mapping) -> str:
    section = doc.get("output") or {}
    return str(section.get("directory", "artifacts"))


def parse_config(doc: Mapping, env: Mapping = os.environ) -> PipelineConfig:
    """Parse and fully validate a config document; raises ConfigurationError."""
    stimuli = _parse_stimuli(doc)
    scorer_kind, oracle, remote = _parse_scorer(doc, stimuli, env)
    smoother, per_location = _parse_smoother(doc)
    exponent_grid, base, target, fit_on = _parse_analysis(doc, stimuli)
    return PipelineConfig(
        stimuli=stimuli,
        scorer_kind=scorer_kind,
        oracle=oracle,
        remote=remote,
        smoother=smoother,
        per_location=per_location,
        exponent_grid=exponent_grid,
        base_category=base,
        target_category=target,
        fit_on=fit_on,
        output_dir=_parse_output(doc),
    )


def validate(config_path: str | Path, env: Mapping = os.environ) -> list[Diagnostic]:
    """Collect every config problem found, one diagnostic per issue.

    An empty list means `run_pipeline` will accept the config.
    """
    doc = load_config(config_path)
    diagnostics: list[Diagnostic] = []
    stimuli = None
    try:
        stimuli = _parse_stimuli(doc)
    except ConfigurationError as exc:
        diagnostics.append(_diagnostic(exc, "stimuli"))
    for parser, section in (
        (lambda: _parse_scorer(doc, stimuli, env), "scorer"),
        (lambda: _parse_smoother(doc), "smoother"),
        (lambda: _parse_analysis(doc, stimuli), "analysis"),
        (lambda: _parse_output(doc), "output"),
    ):
        try:
            parser()
        except ConfigurationError as exc:
            diagnostics.append(_diagnostic(exc, section))
    return diagnostics


def _diagnostic(exc: ConfigurationError, fallback_path: str) -> Diagnostic:
    path = getattr(exc, "config_path", fallback_path)
    message = str(exc)
    prefix = f"{path}: "
    if message.startswith(prefix):
        message = message[len(prefix):]
    return Diagnostic(path=path, message=message)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(
    directory: Path, config_path: Path, scorer_id: str, artifacts: list[Path]
) -> dict:
    manifest = {
        "tool": "fuzzprobe",
        "version": __version__,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "config_sha256": _sha256(config_path),
        "scorer_id": scorer_id,
        "artifacts": {
            str(path.relative_to(directory)): {
                "sha256": _sha256(path),
                "bytes": path.stat().st_size,
            }
            for path in sorted(artifacts)
        },
    }
    with open(directory / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest


def verify_manifest(directory: str | Path) -> list[str]:
    """Re-hash artifacts against the manifest; returns mismatch descriptions."""
    directory = Path(directory)
    with open(directory / "manifest.json", "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    problems = []
    for rel, meta in manifest["artifacts"].items():
        path = directory / rel
        if not path.exists():
            problems.append(f"{rel}: missing")
            continue
        actual = _sha256(path)
        if actual != meta["sha256"]:
            problems.append(f"{rel}: digest mismatch")
    return problems


def run_pipeline(
    config_path: str | Path,
    out_dir: str | Path | None = None,
    env: Mapping = os.environ,
) -> RunResult:
    """Run generate -> score -> smooth -> analyze -> plot under one config.

    Any stage failure raises StageError naming the stage; artifacts written
    before the failure are left in place for inspection.
    """
    config_path = Path(config_path)
    config = parse_config(load_config(config_path), env)
    directory = Path(out_dir) if out_dir is not None else Path(config.output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    artifacts: list[Path] = []

    def _stage(name, func):
        try:
            return func()
        except StageError:
            raise
        except Exception as exc:
            raise StageError(name, exc) from exc

    def _generate():
        pairs = generate_dataset(config.stimuli)
        path = directory / "pairs.jsonl"
        write_pairs(pairs, path)
        artifacts.append(path)
        return pairs

    pairs = _stage("generate", _generate)

    def _score():
        if config.scorer_kind == "oracle":
            scored = score_oracle(pairs, config.oracle)
        else:
            scored = score_remote(pairs, config.remote)
        path = directory / "scores.jsonl"
        cache_write(scored, path)
        artifacts.append(path)
        return scored

    scored = _stage("score", _score)

    def _smooth():
        curves = build_curves(scored, per_location=config.per_location)
        smoothed = [smooth(curve, config.smoother) for curve in curves]
        path = directory / "curves.jsonl"
        write_curves(smoothed, path)
        artifacts.append(path)
        return smoothed

    curves = _stage("smooth", _smooth)

    def _analyze():
        report = build_report(
            curves,
            scored,
            base_category=config.base_category,
            target_category=config.target_category,
            grid=config.exponent_grid,
            fit_on=config.fit_on,
        )
        path = directory / "report.json"
        write_report(report, path)
        artifacts.append(path)
        return report

    report = _stage("analyze", _analyze)

    def _plot():
        written = render_all(curves, report.hedge_fits, directory / "plots")
        artifacts.extend(written)

    _stage("plot", _plot)

    scorer_id = (
        config.oracle.scorer_id()
        if config.scorer_kind == "oracle"
        else f"remote({config.remote.endpoint})"
    )
    manifest = _write_manifest(directory, config_path, scorer_id, artifacts)
    return RunResult(directory=directory, manifest=manifest)
