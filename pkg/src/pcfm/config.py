"""Scenario files: YAML with unit-suffixed keys, validated and normalized.

Loading does three things: schema validation (field paths in every error),
unit normalization (dBm to mW, dB/km to 1/km, symbol rate to bandwidth) and
expansion of channel combs to explicit channel lists. The normalized form
is itself a valid scenario, so normalizing twice changes nothing.
"""
import copy
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import List, Optional

import jsonschema
import numpy as np
import yaml

from .engine import SpanSetup
from .errors import ConfigError, DomainError
from .spp import DEFAULT_RAMAN_GAIN, DEFAULT_RAMAN_REF_THZ, Channel, ChannelPlan, FiberSpec, LumpedLoss, RamanPump

__all__ = [
    "OracleOptions",
    "ScenarioConfig",
    "SCHEMA",
    "bundled_scenarios",
    "load_scenario",
    "normalize",
    "dump_scenario",
    "build",
]

DB_PER_KM_TO_PER_KM = math.log(10.0) / 10.0
MODES = ("pcfm", "oracle", "compare")

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_pair = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}
_table = {"type": "array", "items": _pair, "minItems": 1}
_num_or_table = {"oneOf": [_num, _table]}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


_power = {"power_dbm": _num, "power_mw": _nonneg}
_rate = {"symbol_rate_gbaud": _pos, "roll_off": {"type": "number", "minimum": 0, "maximum": 1}, "bandwidth_thz": _pos}

_channel = _obj({"freq_thz": _pos, **_rate, **_power}, ["freq_thz"])
_comb = _obj(
    {
        "count": {"type": "integer", "minimum": 1},
        "spacing_ghz": _pos,
        "first_thz": _pos,
        "center_thz": _pos,
        "band_thz": {**_pair, "items": _pos},
        **_rate,
        **_power,
    },
    ["count", "spacing_ghz"],
)
_plan = _obj(
    {
        "channels": {"type": "array", "items": _channel, "minItems": 1},
        "combs": {"type": "array", "items": _comb, "minItems": 1},
        "cut_index": {"type": "integer", "minimum": 0},
    }
)
_fiber = _obj(
    {
        "length_km": _pos,
        "attenuation_db_per_km": _num_or_table,
        "attenuation_per_km": _num_or_table,
        "beta2_ps2_per_km": _num,
        "beta3_ps3_per_km": _num,
        "beta4_ps4_per_km": _num,
        "ref_freq_thz": _pos,
        "aeff_um2": _num_or_table,
        "n2_m2_per_w": _pos,
        "raman_gain_per_w_km": {"oneOf": [_num, _table, {"const": "default"}]},
        "raman_ref_thz": _pos,
        "lumped_losses": {
            "type": "array",
            "items": _obj(
                {"position_km": _pos, "loss_db": _num, "applies_to": {"enum": ["signals", "pumps", "both"]}},
                ["position_km", "loss_db"],
            ),
        },
    },
    ["length_km"],
)
_pump = _obj({"freq_thz": _pos, **_power, "direction": {"enum": ["forward", "backward"]}}, ["freq_thz"])
_span = _obj(
    {
        "plan": {"type": "string"},
        "repeat": {"type": "integer", "minimum": 1},
        "fiber": _fiber,
        "pumps": {"type": "array", "items": _pump},
        "gain_db": {"oneOf": [{"type": "null"}, _num, {"type": "array", "items": _num}]},
        "raman": {"type": "boolean"},
    },
    ["fiber"],
)
SCHEMA = _obj(
    {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "fit_degree": {"type": "integer", "minimum": 0, "maximum": 20},
        "mode": {"enum": list(MODES)},
        "grid_points": {"type": "integer", "minimum": 11},
        "pin_origin": {"type": "boolean"},
        "correction_db": {"oneOf": [{"type": "null"}, _num, {"type": "array", "items": _num}]},
        "oracle": _obj(
            {
                "rtol": _pos,
                "domain": {"enum": ["lozenge", "rectangle"]},
                "include_mci": {"type": "boolean"},
                "profile_source": {"enum": ["poly", "sampled"]},
                "budget": {"oneOf": [{"type": "null"}, {"type": "integer", "minimum": 1}]},
            }
        ),
        "plans": {"type": "object", "additionalProperties": _plan, "minProperties": 1},
        "spans": {"type": "array", "items": _span, "minItems": 1},
    },
    ["plans", "spans"],
)

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


def _path(parts):
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _validate(doc):
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        e = errors[0]
        raise ConfigError(e.message, path=_path(e.absolute_path) or "<root>")


def _one_of(d, keys, path, required=True):
    present = [k for k in keys if k in d]
    if len(present) > 1:
        raise ConfigError(f"ambiguous units: give only one of {', '.join(present)}", path=f"{path}.{present[1]}")
    if not present and required:
        raise ConfigError(f"missing required field (one of {', '.join(keys)})", path=f"{path}.{keys[0]}")
    return present[0] if present else None


def _power_mw(d, path):
    key = _one_of(d, ("power_dbm", "power_mw"), path)
    return 10.0 ** (d["power_dbm"] / 10.0) if key == "power_dbm" else float(d["power_mw"])


def _bandwidth(d, path):
    if "bandwidth_thz" in d:
        if "symbol_rate_gbaud" in d or "roll_off" in d:
            raise ConfigError("ambiguous units: give bandwidth_thz or symbol_rate_gbaud, not both", path=f"{path}.bandwidth_thz")
        return float(d["bandwidth_thz"])
    if "symbol_rate_gbaud" not in d:
        raise ConfigError("missing required field (one of bandwidth_thz, symbol_rate_gbaud)", path=f"{path}.bandwidth_thz")
    return d["symbol_rate_gbaud"] * 1e-3 * (1.0 + d.get("roll_off", 0.0))


def _comb_channels(c, path):
    n = c["count"]
    dt = c["spacing_ghz"] * 1e-3
    key = _one_of(c, ("first_thz", "center_thz", "band_thz"), path)
    if key == "first_thz":
        first = c["first_thz"]
    elif key == "center_thz":
        first = c["center_thz"] - 0.5 * (n - 1) * dt
    else:
        lo, hi = c["band_thz"]
        if hi - lo < (n - 1) * dt:
            raise ConfigError(f"{n} channels at {c['spacing_ghz']} GHz do not fit in the band", path=f"{path}.band_thz")
        # comb centred inside the band edges
        first = lo + 0.5 * ((hi - lo) - (n - 1) * dt)
    b = _bandwidth(c, path)
    p = _power_mw(c, path)
    return [{"freq_thz": float(first + i * dt), "bandwidth_thz": b, "power_mw": p} for i in range(n)]


def _norm_plan(plan, path):
    if "channels" not in plan and "combs" not in plan:
        raise ConfigError("plan needs channels or combs", path=f"{path}.channels")
    chans = []
    for i, c in enumerate(plan.get("channels", [])):
        p = f"{path}.channels[{i}]"
        chans.append({"freq_thz": float(c["freq_thz"]), "bandwidth_thz": _bandwidth(c, p), "power_mw": _power_mw(c, p)})
    for i, c in enumerate(plan.get("combs", [])):
        chans.extend(_comb_channels(c, f"{path}.combs[{i}]"))
    chans.sort(key=lambda c: c["freq_thz"])
    cut = plan.get("cut_index", len(chans) // 2)
    if cut >= len(chans):
        raise ConfigError(f"cut_index {cut} out of range for {len(chans)} channels", path=f"{path}.cut_index")
    return {"channels": chans, "cut_index": cut}


def _scale(v, k):
    if isinstance(v, list):
        return [[float(x), float(y) * k] for x, y in v]
    return float(v) * k


def _norm_fiber(f, path):
    key = _one_of(f, ("attenuation_db_per_km", "attenuation_per_km"), path)
    att = _scale(f[key], DB_PER_KM_TO_PER_KM if key == "attenuation_db_per_km" else 1.0)
    gain = f.get("raman_gain_per_w_km", 0.0)
    if gain == "default":
        gain = [list(p) for p in DEFAULT_RAMAN_GAIN]
    L = float(f["length_km"])
    losses = []
    for i, e in enumerate(f.get("lumped_losses", [])):
        if not e["position_km"] < L:
            raise ConfigError(f"position {e['position_km']} km lies beyond the span end", path=f"{path}.lumped_losses[{i}].position_km")
        losses.append({"position_km": float(e["position_km"]), "loss_db": float(e["loss_db"]), "applies_to": e.get("applies_to", "both")})
    return {
        "length_km": L,
        "attenuation_per_km": att,
        "beta2_ps2_per_km": float(f.get("beta2_ps2_per_km", -21.3)),
        "beta3_ps3_per_km": float(f.get("beta3_ps3_per_km", 0.0)),
        "beta4_ps4_per_km": float(f.get("beta4_ps4_per_km", 0.0)),
        "ref_freq_thz": float(f.get("ref_freq_thz", 193.5)),
        "aeff_um2": _scale(f.get("aeff_um2", 80.0), 1.0),
        "n2_m2_per_w": float(f.get("n2_m2_per_w", 2.6e-20)),
        "raman_gain_per_w_km": _scale(gain, 1.0),
        "raman_ref_thz": float(f.get("raman_ref_thz", DEFAULT_RAMAN_REF_THZ)),
        "lumped_losses": losses,
    }


def normalize(doc):
    """Validated, unit-normalized, fully explicit copy of a scenario document."""
    doc = copy.deepcopy(doc)
    _validate(doc)
    plans = {name: _norm_plan(p, f"plans.{name}") for name, p in sorted(doc["plans"].items())}
    default_plan = next(iter(doc["plans"]))
    spans = []
    for i, s in enumerate(doc["spans"]):
        path = f"spans[{i}]"
        plan = s.get("plan", default_plan)
        if plan not in plans:
            raise ConfigError(f"unknown plan {plan!r}", path=f"{path}.plan")
        pumps = []
        for j, p in enumerate(s.get("pumps", [])):
            pumps.append({"freq_thz": float(p["freq_thz"]), "power_mw": _power_mw(p, f"{path}.pumps[{j}]"),
                          "direction": p.get("direction", "backward")})
        gain = s.get("gain_db")
        if isinstance(gain, list):
            if len(gain) != len(plans[plan]["channels"]):
                raise ConfigError("gain_db needs one entry per channel", path=f"{path}.gain_db")
            gain = [float(g) for g in gain]
        elif gain is not None:
            gain = float(gain)
        spans.append({
            "plan": plan,
            "repeat": int(s.get("repeat", 1)),
            "fiber": _norm_fiber(s["fiber"], f"{path}.fiber"),
            "pumps": pumps,
            "gain_db": gain,
            "raman": bool(s.get("raman", True)),
        })
    used = {s["plan"] for s in spans}
    if len({len(plans[p]["channels"]) for p in used}) > 1:
        raise ConfigError("all spans must carry the same number of channels", path="spans")
    corr = doc.get("correction_db")
    if isinstance(corr, list):
        corr = [float(c) for c in corr]
    elif corr is not None:
        corr = float(corr)
    oracle = doc.get("oracle", {})
    out = {
        "name": doc.get("name", "scenario"),
        "fit_degree": int(doc.get("fit_degree", 9)),
        "mode": doc.get("mode", "pcfm"),
        "grid_points": int(doc.get("grid_points", 1001)),
        "pin_origin": bool(doc.get("pin_origin", False)),
        "correction_db": corr,
        "oracle": {
            "rtol": float(oracle.get("rtol", 1e-4)),
            "domain": oracle.get("domain", "lozenge"),
            "include_mci": bool(oracle.get("include_mci", True)),
            "profile_source": oracle.get("profile_source", "poly"),
            "budget": oracle.get("budget"),
        },
        "plans": plans,
        "spans": spans,
    }
    if "description" in doc:
        out["description"] = doc["description"]
    _validate(out)
    return out


@dataclass
class OracleOptions:
    rtol: float = 1e-4
    domain: str = "lozenge"
    include_mci: bool = True
    profile_source: str = "poly"
    budget: Optional[int] = None


@dataclass
class ScenarioConfig:
    """A normalized scenario and the engine objects built from it."""

    name: str
    spans: List[SpanSetup]
    fit_degree: int = 9
    mode: str = "pcfm"
    grid_points: int = 1001
    pin_origin: bool = False
    correction: Optional[np.ndarray] = None
    oracle: OracleOptions = field(default_factory=OracleOptions)
    document: dict = field(default_factory=dict)

    @property
    def plan(self):
        return self.spans[-1].plan


def _fiber_spec(f, path):
    att = f["attenuation_per_km"]
    att = _scale(att, 1.0 / DB_PER_KM_TO_PER_KM)
    try:
        return FiberSpec(
            length_km=f["length_km"],
            alpha_db_per_km=att,
            beta2=f["beta2_ps2_per_km"],
            beta3=f["beta3_ps3_per_km"],
            beta4=f["beta4_ps4_per_km"],
            fc=f["ref_freq_thz"],
            aeff_table=f["aeff_um2"],
            n2=f["n2_m2_per_w"],
            raman_gain=f["raman_gain_per_w_km"],
            raman_ref_thz=f["raman_ref_thz"],
            lumped_events=tuple(LumpedLoss(e["position_km"], e["loss_db"], e["applies_to"]) for e in f["lumped_losses"]),
        )
    except DomainError as exc:
        raise ConfigError(str(exc), path=path) from exc


def build(doc):
    """ScenarioConfig from a scenario document (normalized here if needed)."""
    norm = normalize(doc)
    plans = {}
    for name, p in norm["plans"].items():
        try:
            plans[name] = ChannelPlan([Channel(c["freq_thz"], c["bandwidth_thz"], c["power_mw"]) for c in p["channels"]],
                                      p["cut_index"])
        except DomainError as exc:
            raise ConfigError(str(exc), path=f"plans.{name}") from exc
    spans = []
    for i, s in enumerate(norm["spans"]):
        fiber = _fiber_spec(s["fiber"], f"spans[{i}].fiber")
        plan = plans[s["plan"]]
        pumps = tuple(RamanPump(p["freq_thz"], p["power_mw"], p["direction"]) for p in s["pumps"])
        gain = s["gain_db"]
        if gain is not None and not isinstance(gain, list):
            gain = [gain] * len(plan)
        spans.extend(SpanSetup(fiber, plan, pumps, gain, s["raman"]) for _ in range(s["repeat"]))
    corr = norm["correction_db"]
    if corr is not None:
        corr = 10.0 ** (np.asarray(corr, dtype=float) / 10.0)
        if corr.ndim == 1 and corr.size != len(spans[-1].plan):
            raise ConfigError("correction_db needs one entry per channel", path="correction_db")
    return ScenarioConfig(
        name=norm["name"],
        spans=spans,
        fit_degree=norm["fit_degree"],
        mode=norm["mode"],
        grid_points=norm["grid_points"],
        pin_origin=norm["pin_origin"],
        correction=corr,
        oracle=OracleOptions(**norm["oracle"]),
        document=norm,
    )


def bundled_scenarios():
    """Names of the scenarios shipped with the package."""
    root = resources.files("pcfm") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def _resolve(path):
    p = Path(path)
    if p.exists():
        return p.read_text()
    if p.suffix == "" and str(path) in bundled_scenarios():
        return (resources.files("pcfm") / "scenarios" / f"{path}.yaml").read_text()
    raise ConfigError(f"no such scenario file or bundled scenario: {path}", path="<file>")


def load_scenario(path):
    """Parse, validate and normalize a scenario file (or a bundled scenario name)."""
    try:
        doc = yaml.safe_load(_resolve(path))
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML parse error: {exc}", path="<file>") from exc
    if not isinstance(doc, dict):
        raise ConfigError("scenario must be a mapping", path="<root>")
    return build(doc)


def dump_scenario(config_or_doc):
    """YAML text of the normalized form."""
    doc = config_or_doc.document if isinstance(config_or_doc, ScenarioConfig) else normalize(config_or_doc)
    return yaml.safe_dump(doc, sort_keys=True, default_flow_style=None)
