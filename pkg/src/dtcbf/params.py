"""Parameter sets, unit conventions, and the config file loader.

All values are stored in SI units (m, s, rad, N). Conversions from the
human-friendly units used in config files (degrees, miles per hour) happen
once at load time; nothing downstream ever converts units.

Config files are flat ``key = value`` text, one parameter per line, with
``#`` comments. Keys are listed in KEY_TABLE below: every parameter has an
SI key (e.g. ``fw_bank_max``, radians) and angle/speed parameters also
accept a unit-suffixed alternate (``fw_bank_max_deg``, ``car_speed_limit_mph``).
``write_params`` always emits SI keys with full precision so that a
write/load round trip reproduces the parameters bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from .errors import ParamError

DEG = math.pi / 180.0
MPH = 0.44704  # exact: 1609.344 m per mile / 3600 s


@dataclass(frozen=True)
class SimParams:
    """Timestep, gravity, and the per-step barrier decay rate."""

    dt: float = 0.1
    gravity: float = 9.81
    decay: float = 0.5  # must lie in (0, 1]


@dataclass(frozen=True)
class FwParams:
    """Fixed-wing airframe limits and drag model coefficients."""

    air_density: float = 1.2251  # kg/m^3
    wing_area: float = 1.058  # m^2
    weight: float = 68.68  # N
    thrust_max: float = 20.60  # N
    load_min: float = -1.0
    load_max: float = 2.5
    drag_parasitic: float = 0.02544
    drag_induced: float = 0.059
    bank_max: float = 30.0 * DEG
    v_min: float = 15.0  # m/s
    v_max: float = 20.0  # m/s
    pitch_min: float = -10.0 * DEG
    pitch_max: float = 10.0 * DEG
    alt_floor: float = 400.0  # m


@dataclass(frozen=True)
class CarParams:
    """Bicycle-model geometry, actuator boxes, and road limits."""

    lf: float = 1.17  # m, front axle to center of gravity
    lr: float = 1.77  # m, rear axle to center of gravity
    lead_acc_min: float = -2.87  # m/s^2
    lead_acc_max: float = 2.87  # m/s^2
    evasive_brake: float = -2.86  # m/s^2, ego braking rate, in [lead_acc_min, 0)
    evasive_push: float = 2.86  # m/s^2, ego forward rate, in (0, lead_acc_max]
    steer_max: float = 1.0 * DEG
    headway: float = 1.8  # s, required time gap to a lead car
    min_gap: float = 10.0  # m, hard minimum intervehicle distance
    car_width: float = 1.83  # m
    lane_width: float = 3.6  # m
    speed_limit: float = 70.0 * MPH  # m/s


def validate_sim(p: SimParams) -> SimParams:
    if not p.dt > 0:
        raise ParamError(f"dt must be > 0, got {p.dt}")
    if not p.gravity > 0:
        raise ParamError(f"gravity must be > 0, got {p.gravity}")
    if not 0 < p.decay <= 1:
        raise ParamError(f"decay must be in (0, 1], got {p.decay}")
    return p


def validate_fw(p: FwParams) -> FwParams:
    if not p.v_min > 0:
        raise ParamError(f"v_min must be > 0, got {p.v_min}")
    if not p.v_max > p.v_min:
        raise ParamError(f"v_max must exceed v_min, got [{p.v_min}, {p.v_max}]")
    if not p.load_max > 1:
        raise ParamError(f"load_max must be > 1, got {p.load_max}")
    if not p.load_min <= p.load_max:
        raise ParamError(f"load_min must not exceed load_max, got {p.load_min}")
    if not p.pitch_max > 0:
        raise ParamError(f"pitch_max must be > 0, got {p.pitch_max}")
    if not p.pitch_min < 0:
        raise ParamError(f"pitch_min must be < 0, got {p.pitch_min}")
    if not p.thrust_max > 0:
        raise ParamError(f"thrust_max must be > 0, got {p.thrust_max}")
    if not p.bank_max > 0:
        raise ParamError(f"bank_max must be > 0, got {p.bank_max}")
    for name in ("air_density", "wing_area", "weight"):
        if not getattr(p, name) > 0:
            raise ParamError(f"{name} must be > 0, got {getattr(p, name)}")
    for name in ("drag_parasitic", "drag_induced"):
        if getattr(p, name) < 0:
            raise ParamError(f"{name} must be >= 0, got {getattr(p, name)}")
    return p


def validate_car(p: CarParams) -> CarParams:
    if not p.lf > 0 or not p.lr > 0:
        raise ParamError(f"lf and lr must be > 0, got lf={p.lf}, lr={p.lr}")
    if not p.lead_acc_min < 0 < p.lead_acc_max:
        raise ParamError(
            f"lead acceleration box must straddle 0, got "
            f"[{p.lead_acc_min}, {p.lead_acc_max}]"
        )
    if not (p.lead_acc_min <= p.evasive_brake < 0):
        raise ParamError(
            f"evasive_brake must lie in [lead_acc_min, 0), got {p.evasive_brake}"
        )
    if not (0 < p.evasive_push <= p.lead_acc_max):
        raise ParamError(
            f"evasive_push must lie in (0, lead_acc_max], got {p.evasive_push}"
        )
    if not 0 < p.steer_max < math.pi / 2:
        raise ParamError(f"steer_max must lie in (0, pi/2), got {p.steer_max}")
    if not p.car_width < p.lane_width:
        raise ParamError(
            f"car_width must be less than lane_width, got "
            f"{p.car_width} >= {p.lane_width}"
        )
    if not p.car_width > 0:
        raise ParamError(f"car_width must be > 0, got {p.car_width}")
    if not p.speed_limit > 0:
        raise ParamError(f"speed_limit must be > 0, got {p.speed_limit}")
    if p.headway < 0:
        raise ParamError(f"headway must be >= 0, got {p.headway}")
    if p.min_gap < 0:
        raise ParamError(f"min_gap must be >= 0, got {p.min_gap}")
    return p


def default_params() -> tuple[SimParams, FwParams, CarParams]:
    return validate_sim(SimParams()), validate_fw(FwParams()), validate_car(CarParams())


# key -> (section, field, converter). Sections are "sim", "fw", "car".
def _ident(x: float) -> float:
    return x


def _from_deg(x: float) -> float:
    return x * DEG


def _from_mph(x: float) -> float:
    return x * MPH


def _build_key_table() -> dict:
    table = {}
    for section, cls in (("sim", SimParams), ("fw", FwParams), ("car", CarParams)):
        prefix = "" if section == "sim" else section + "_"
        for f in fields(cls):
            table[prefix + f.name] = (section, f.name, _ident)
    for key in (
        "fw_bank_max",
        "fw_pitch_min",
        "fw_pitch_max",
        "car_steer_max",
    ):
        section, name, _ = table[key]
        table[key + "_deg"] = (section, name, _from_deg)
    table["car_speed_limit_mph"] = ("car", "speed_limit", _from_mph)
    return table


KEY_TABLE = _build_key_table()


def _parse_line(raw: str, lineno: int) -> tuple[str, float] | None:
    line = raw.split("#", 1)[0].strip()
    if not line:
        return None
    if "=" not in line:
        raise ParamError(f"line {lineno}: expected 'key = value', got {raw!r}")
    key, _, value = line.partition("=")
    key = key.strip()
    try:
        return key, float(value.strip())
    except ValueError:
        raise ParamError(f"line {lineno}: cannot parse value for {key!r}: {value.strip()!r}")


def load_params(path) -> tuple[SimParams, FwParams, CarParams]:
    """Read a config file on top of the defaults and validate the result."""
    values: dict[str, dict[str, float]] = {"sim": {}, "fw": {}, "car": {}}
    seen: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            parsed = _parse_line(raw, lineno)
            if parsed is None:
                continue
            key, value = parsed
            if key not in KEY_TABLE:
                raise ParamError(f"line {lineno}: unknown parameter {key!r}")
            section, name, convert = KEY_TABLE[key]
            if name in seen and seen[name] != key:
                raise ParamError(
                    f"line {lineno}: {key!r} conflicts with earlier {seen[name]!r}"
                )
            seen[name] = key
            values[section][name] = convert(value)
    sim = replace(SimParams(), **values["sim"])
    fw = replace(FwParams(), **values["fw"])
    car = replace(CarParams(), **values["car"])
    return validate_sim(sim), validate_fw(fw), validate_car(car)


def write_params(path, sim: SimParams, fw: FwParams, car: CarParams) -> None:
    """Write all parameters as SI key = value lines (bit-exact round trip)."""
    lines = ["# generated parameter file, SI units\n"]
    for section, obj in (("sim", sim), ("fw", fw), ("car", car)):
        prefix = "" if section == "sim" else section + "_"
        for f in fields(obj):
            lines.append(f"{prefix}{f.name} = {getattr(obj, f.name)!r}\n")
    with open(path, "w", encoding="utf-8") as fh:
        fh.writelines(lines)
