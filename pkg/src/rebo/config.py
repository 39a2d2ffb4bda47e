"""Flat ``key = value`` config files and the shipped fixture data."""
from __future__ import annotations

import csv
from importlib import resources

from .errors import ReboError
from .juggle import BallSpec, JugglerSpec
from .kinematics import RigConfig


def parse_flat(text: str, source: str = "<config>") -> dict[str, float]:
    """Parse ``key = value`` lines; ``#`` starts a comment. Values must be numeric."""
    out: dict[str, float] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ReboError(f"{source}:{n}: expected 'key = value'")
        key = key.strip()
        try:
            out[key] = float(value)
        except ValueError:
            raise ReboError(f"{source}:{n}: {key!r} is not a number: {value.strip()!r}") from None
    return out


def load_flat(path) -> dict[str, float]:
    with open(path) as fh:
        return parse_flat(fh.read(), str(path))


def data_path(name: str):
    return resources.files("rebo") / "data" / name


def _fixture_text(name: str) -> str:
    return data_path(name).read_text()


def read_fixture_csv(name: str) -> list[dict[str, str]]:
    lines = [ln for ln in _fixture_text(name).splitlines() if ln and not ln.startswith("#")]
    return list(csv.DictReader(lines))


def default_rig() -> RigConfig:
    return RigConfig.from_mapping(parse_flat(_fixture_text("rig_default.cfg"), "rig_default.cfg"))


def load_rig(path=None) -> RigConfig:
    if path is None:
        return default_rig()
    return RigConfig.from_mapping(load_flat(path))


def default_operating_point() -> tuple[BallSpec, JugglerSpec, float]:
    """The calibrated 1 kg shot, its juggler spec and the target apex (m)."""
    v = parse_flat(_fixture_text("juggler_default.cfg"), "juggler_default.cfg")
    ball = BallSpec(v["mass_kg"], v["restitution"], "1 kg shot")
    spec = JugglerSpec(v["k_es_npm"], v["b_s_nspm"], v["p_com_mm"] * 1e-3)
    return ball, spec, v["target_apex_mm"] * 1e-3


def stiffness_points() -> list[tuple[float, float]]:
    return [(float(r["beta_deg"]), float(r["k_npm"])) for r in read_fixture_csv("stiffness_single_layer.csv")]


def double_layer_table() -> list[dict[str, float]]:
    return [{k: float(v) for k, v in r.items()} for r in read_fixture_csv("double_layer_measured.csv")]
