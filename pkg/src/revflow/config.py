"""Run configuration: INI-style files with ``[section]`` headers.

A config resolves to an ambient space, a slab, a grid, an initial profile,
and flow thresholds.  Example::

    [space]
    preset = hyperbolic     ; euclidean | hyperbolic | spherical | custom
    lambda = -1.0
    n = 2

    [domain]
    a = 0.0
    b = 1.0

    [grid]
    m = 201

    [initial]
    expr = 1 + 0.1*cos(pi*z)
    ; or: csv = profile.csv
    ; or: cylinder = 1.0  with optional  perturb = 0.1*cos(pi*z)

    [flow]
    max_t = 10.0
    record_every = 100

Custom spaces give the six warp expressions in ``r``: ``f, df, d2f, h, dh,
d2h`` (first and second derivatives must be supplied analytically) plus an
optional ``r_max``.  ``summary.json`` files echo the parsed sections under
the ``config`` key; ``load_config`` accepts such a JSON file directly, which
reproduces the run bit for bit.
"""

from __future__ import annotations

import configparser
import json
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .ambient import AmbientSpace, make_preset, space_from_expressions
from .expressions import ExpressionError, compile_expression
from .flow import FlowConfig
from .hypersurface import ProfileGrid, load_profile_csv

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config", "config_to_ini"]


class ConfigError(ValueError):
    """Config file cannot be parsed or fails validation."""


_FLOW_KEYS = {"dt_safety", "max_t", "r_min_stop", "v_max_stop", "conv_tol",
              "record_every", "volume_projection"}


@dataclass
class RunConfig:
    space: AmbientSpace
    a: float
    b: float
    m: int
    initial: ProfileGrid
    flow: FlowConfig
    outdir: Optional[str] = None
    validate_probe: float = 3.0
    validate_samples: int = 129
    cmc: Dict[str, str] = field(default_factory=dict)
    sweep_items: List[Tuple[Tuple[str, str], List[str]]] = field(default_factory=list)
    echo: Dict[str, Dict[str, str]] = field(default_factory=dict)


def _get(sections, section, key, default=None, required=False):
    try:
        return sections[section][key]
    except KeyError:
        if required:
            raise ConfigError(f"[{section}] {key}: missing required option")
        return default


def _get_float(sections, section, key, default=None, required=False):
    raw = _get(sections, section, key, required=required)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected a number, got {raw!r}")


def _get_int(sections, section, key, default=None, required=False):
    raw = _get(sections, section, key, required=required)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected an integer, got {raw!r}")


def _get_bool(sections, section, key, default=None):
    raw = _get(sections, section, key)
    if raw is None:
        return default
    val = raw.strip().lower()
    if val in ("true", "yes", "on", "1"):
        return True
    if val in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"[{section}] {key}: expected a boolean, got {raw!r}")


def _build_space(sections) -> AmbientSpace:
    preset = _get(sections, "space", "preset", required=True).strip().lower()
    n = _get_int(sections, "space", "n", default=2)
    if preset in ("euclidean", "hyperbolic", "spherical"):
        lam = _get_float(sections, "space", "lambda")
        try:
            return make_preset(preset, lam, n=n)
        except ValueError as exc:
            raise ConfigError(f"[space] {exc}")
    if preset == "custom":
        exprs = {}
        for key in ("f", "df", "d2f", "h", "dh", "d2h"):
            exprs[key] = _get(sections, "space", key, required=True)
        r_max_raw = _get(sections, "space", "r_max", default="inf")
        try:
            r_max = math.inf if r_max_raw.strip().lower() == "inf" else float(r_max_raw)
        except ValueError:
            raise ConfigError(f"[space] r_max: expected a number or 'inf', got {r_max_raw!r}")
        try:
            return space_from_expressions(n, r_max=r_max, **exprs)
        except ExpressionError as exc:
            raise ConfigError(f"[space] warp expression: {exc}")
    raise ConfigError(f"[space] preset: unknown value {preset!r}")


def _build_initial(sections, space, a, b, m, base_dir) -> ProfileGrid:
    z = np.linspace(a, b, m)
    expr = _get(sections, "initial", "expr")
    csv_path = _get(sections, "initial", "csv")
    cylinder = _get(sections, "initial", "cylinder")
    given = [k for k, v in (("expr", expr), ("csv", csv_path), ("cylinder", cylinder)) if v]
    if len(given) != 1:
        raise ConfigError("[initial] give exactly one of: expr, csv, cylinder")

    if csv_path is not None:
        path = csv_path if os.path.isabs(csv_path) else os.path.join(base_dir, csv_path)
        try:
            profile = load_profile_csv(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"[initial] csv: {exc}")
        if profile.m != m or abs(profile.a - a) > 1e-12 or abs(profile.b - b) > 1e-12:
            raise ConfigError("[initial] csv: grid does not match [domain]/[grid]")
        return profile

    if expr is not None:
        try:
            r = compile_expression(expr, var="z")(z)
        except ExpressionError as exc:
            raise ConfigError(f"[initial] expr: {exc}")
    else:
        try:
            radius = float(cylinder)
        except ValueError:
            raise ConfigError(f"[initial] cylinder: expected a number, got {cylinder!r}")
        r = np.full(m, radius)
        perturb = _get(sections, "initial", "perturb")
        if perturb is not None:
            try:
                r = r + compile_expression(perturb, var="z")(z)
            except ExpressionError as exc:
                raise ConfigError(f"[initial] perturb: {exc}")

    if np.any(~np.isfinite(r)) or np.any(r <= 0.0):
        raise ConfigError("[initial] profile must be strictly positive on the grid")
    if space.r_max_domain < math.inf and np.any(r >= space.r_max_domain):
        raise ConfigError("[initial] profile leaves the ambient domain")
    return ProfileGrid(a, b, r)


def _build_flow(sections) -> FlowConfig:
    if "flow" in sections:
        unknown = set(sections["flow"]) - _FLOW_KEYS
        if unknown:
            raise ConfigError(f"[flow] unknown option(s): {', '.join(sorted(unknown))}")
    kwargs = {}
    for key in ("dt_safety", "max_t", "r_min_stop", "v_max_stop", "conv_tol"):
        val = _get_float(sections, "flow", key)
        if val is not None:
            kwargs[key] = val
    rec = _get_int(sections, "flow", "record_every")
    if rec is not None:
        kwargs["record_every"] = rec
    proj = _get_bool(sections, "flow", "volume_projection")
    if proj is not None:
        kwargs["volume_projection"] = proj
    try:
        return FlowConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"[flow] {exc}")


def _build_sweep(sections) -> List[Tuple[Tuple[str, str], List[str]]]:
    items = []
    for key, raw in sections.get("sweep", {}).items():
        if "." not in key:
            raise ConfigError(f"[sweep] {key}: keys must look like section.option")
        sect, opt = key.split(".", 1)
        values = [v.strip() for v in raw.split(",") if v.strip()]
        items.append(((sect, opt), values))
    return items


def parse_config(sections: Dict[str, Dict[str, str]], base_dir: str = ".") -> RunConfig:
    """Build a RunConfig from normalized ``{section: {key: value}}`` strings."""
    sections = {s.lower(): {k.lower(): v for k, v in kv.items()} for s, kv in sections.items()}
    for required in ("space", "domain", "grid", "initial"):
        if required not in sections:
            raise ConfigError(f"[{required}] section is missing")
    # absolutize csv paths so an echoed config reproduces the run from any cwd
    csv_raw = sections["initial"].get("csv")
    if csv_raw and not os.path.isabs(csv_raw):
        sections["initial"]["csv"] = os.path.abspath(os.path.join(base_dir, csv_raw))

    space = _build_space(sections)
    a = _get_float(sections, "domain", "a", required=True)
    b = _get_float(sections, "domain", "b", required=True)
    if not b > a:
        raise ConfigError("[domain] need b > a")
    m = _get_int(sections, "grid", "m", required=True)
    if m < 11:
        raise ConfigError(f"[grid] m: need m >= 11, got {m}")

    initial = _build_initial(sections, space, a, b, m, base_dir)
    flow_cfg = _build_flow(sections)

    probe = _get_float(sections, "validate", "r_probe_max")
    if probe is None:
        probe = 3.0
        if space.r_max_domain < math.inf:
            probe = min(probe, 0.99 * space.r_max_domain)
    samples = _get_int(sections, "validate", "samples", default=129)

    return RunConfig(
        space=space, a=a, b=b, m=m, initial=initial, flow=flow_cfg,
        outdir=_get(sections, "output", "dir"),
        validate_probe=probe, validate_samples=samples,
        cmc=dict(sections.get("cmc", {})),
        sweep_items=_build_sweep(sections),
        echo=sections,
    )


def load_config(path: str) -> RunConfig:
    """Load an INI config, or the ``config`` echo inside a summary.json."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(str(exc))
    base_dir = os.path.dirname(os.path.abspath(path))

    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: bad JSON ({exc})")
        sections = payload.get("config", payload)
        if not isinstance(sections, dict):
            raise ConfigError(f"{path}: no config sections found")
        return parse_config(sections, base_dir)

    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"),
                                       interpolation=None)
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        raise ConfigError(str(exc))
    sections = {name: dict(parser.items(name)) for name in parser.sections()}
    return parse_config(sections, base_dir)


def config_to_ini(sections: Dict[str, Dict[str, str]]) -> str:
    """Render normalized sections back to INI text (used by sweep workers)."""
    lines = []
    for name, kv in sections.items():
        lines.append(f"[{name}]")
        for key, value in kv.items():
            lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)
