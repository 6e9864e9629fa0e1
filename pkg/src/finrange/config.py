"""Flat ``key = value`` experiment configuration.

Recognised keys (``#`` and ``;`` start comments)::

    family     = quasilinear | quadratic_money
    alpha      = money curvature for quadratic_money (>= 0)
    low, high  = preference interval, 0 <= low < high
    mechanism  = none | quadratic_sp | posted_price | linear_raw | piecewise | step | zero
    price      = posted price (posted_price)
    intercept, slope = payment line (linear_raw)
    pieces     = theta:t:q, ...   bundle (t, q) from each breakpoint theta (piecewise)
    menu       = t:q, ...         menu items, first one 0:0 (step)
    thresholds = theta, ...       one per menu transition (step; derived by
                                  indifference when omitted)
    measure    = uniform | power | piecewise_linear
    gamma      = power exponent (power)
    knots      = theta:cdf, ...   interior CDF knots (piecewise_linear)
    n          = comma list of resolutions, ranges like 1-12 allowed
    m_max      = largest menu size to optimise (>= 1)
    grid_size  = verification grid size (>= 2)
    sp_tol     = strategy-proofness / rationality tolerance
    quad_tol   = quadrature tolerance
    restarts   = optimiser restarts
    step_tol   = optimiser step tolerance
    out        = output path (overridden by --out)
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, fields

from finrange.domain import Bundle, PreferenceFamily, PreferenceInterval
from finrange.measure import ParamMeasure
from finrange.mechanism import (
    Mechanism,
    StepMechanism,
    linear_raw,
    piecewise,
    posted_price,
    quadratic_sp,
    step_from_menu,
    zero_mechanism,
)

FAMILIES = ("quasilinear", "quadratic_money")
MECHANISMS = ("none", "quadratic_sp", "posted_price", "linear_raw", "piecewise", "step", "zero")
MEASURES = ("uniform", "power", "piecewise_linear")
_SECTION = "experiment"


class ConfigError(ValueError):
    def __init__(self, key: str, message: str) -> None:
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class ExperimentConfig:
    family: str = "quasilinear"
    alpha: float = 0.0
    low: float = 0.01
    high: float = 1.0
    mechanism: str = "none"
    price: float = 0.5
    intercept: float = 0.0
    slope: float = 0.0
    pieces: str = ""
    menu: str = ""
    thresholds: str = ""
    measure: str = "uniform"
    gamma: float = 1.0
    knots: str = ""
    n: tuple[int, ...] = tuple(range(1, 13))
    m_max: int = 1
    grid_size: int = 401
    sp_tol: float = 1e-9
    quad_tol: float = 1e-9
    restarts: int = 8
    step_tol: float = 1e-6
    out: str = ""

    def interval(self) -> PreferenceInterval:
        fam = (
            PreferenceFamily.quasilinear()
            if self.family == "quasilinear"
            else PreferenceFamily.quadratic_money(self.alpha)
        )
        return PreferenceInterval(fam, self.low, self.high)

    def build_measure(self) -> ParamMeasure:
        iv = self.interval()
        if self.measure == "uniform":
            return ParamMeasure.uniform(iv)
        if self.measure == "power":
            return ParamMeasure.power(iv, self.gamma)
        try:
            return ParamMeasure.piecewise_linear(iv, _pairs(self.knots, 2, "knots"))
        except ValueError as exc:
            raise ConfigError("knots", str(exc)) from exc

    def build_mechanism(self) -> Mechanism | None:
        iv = self.interval()
        kind = self.mechanism
        try:
            if kind == "none":
                return None
            if kind == "quadratic_sp":
                return quadratic_sp(iv)
            if kind == "posted_price":
                return posted_price(self.price, iv)
            if kind == "linear_raw":
                return linear_raw(self.intercept, self.slope, iv)
            if kind == "zero":
                return zero_mechanism(iv)
            if kind == "piecewise":
                pts = [(x, Bundle(t, q)) for x, t, q in _pairs(self.pieces, 3, "pieces")]
                return piecewise(pts, iv)
            items = [Bundle(t, q) for t, q in _pairs(self.menu, 2, "menu")]
            if not self.thresholds.strip():
                return step_from_menu(items, iv)
            cuts = _floats(self.thresholds, "thresholds")
            return StepMechanism(tuple(items), tuple(cuts), iv)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError("mechanism", str(exc)) from exc


def _floats(text: str, key: str) -> list[float]:
    try:
        return [float(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(key, f"expected numbers, got {text!r}") from exc


def _pairs(text: str, width: int, key: str) -> list[tuple[float, ...]]:
    out = []
    for tok in text.replace(";", ",").split(","):
        if not tok.strip():
            continue
        parts = tok.split(":")
        if len(parts) != width:
            raise ConfigError(key, f"expected {width} colon-separated numbers in {tok.strip()!r}")
        try:
            out.append(tuple(float(p) for p in parts))
        except ValueError as exc:
            raise ConfigError(key, f"bad number in {tok.strip()!r}") from exc
    if not out:
        raise ConfigError(key, "must not be empty")
    return out


def _parse_n(text: str) -> tuple[int, ...]:
    values: list[int] = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            if "-" in tok:
                a, b = (int(x) for x in tok.split("-", 1))
                values.extend(range(a, b + 1))
            else:
                values.append(int(tok))
        except ValueError as exc:
            raise ConfigError("n", f"bad entry {tok!r}") from exc
    if any(v < 1 for v in values):
        raise ConfigError("n", "resolutions must be positive integers")
    return tuple(values)


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#",), comment_prefixes=("#", ";")
    )
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n{text}")
    except configparser.Error as exc:
        raise ConfigError("<file>", str(exc).splitlines()[0]) from exc
    raw = dict(parser[_SECTION])
    known = {f.name: f for f in fields(ExperimentConfig)}
    kwargs = {}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(key, "unknown key")
        ftype = known[key].type
        value = value.strip()
        if key == "n":
            kwargs[key] = _parse_n(value)
        elif ftype == "float":
            try:
                kwargs[key] = float(value)
            except ValueError as exc:
                raise ConfigError(key, f"expected a number, got {value!r}") from exc
        elif ftype == "int":
            try:
                kwargs[key] = int(value)
            except ValueError as exc:
                raise ConfigError(key, f"expected an integer, got {value!r}") from exc
        else:
            kwargs[key] = value
    cfg = ExperimentConfig(**kwargs)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    if cfg.family not in FAMILIES:
        raise ConfigError("family", f"expected one of {', '.join(FAMILIES)}")
    if cfg.mechanism not in MECHANISMS:
        raise ConfigError("mechanism", f"expected one of {', '.join(MECHANISMS)}")
    if cfg.measure not in MEASURES:
        raise ConfigError("measure", f"expected one of {', '.join(MEASURES)}")
    if cfg.alpha < 0.0:
        raise ConfigError("alpha", "must be >= 0")
    if cfg.family == "quasilinear" and cfg.alpha != 0.0:
        raise ConfigError("alpha", "only used with family = quadratic_money")
    if not 0.0 <= cfg.low < cfg.high:
        raise ConfigError("low" if cfg.low < 0.0 else "high", "need 0 <= low < high")
    if cfg.gamma <= 0.0:
        raise ConfigError("gamma", "must be positive")
    if cfg.m_max < 1:
        raise ConfigError("m_max", "must be at least 1")
    if cfg.grid_size < 2:
        raise ConfigError("grid_size", "must be at least 2")
    if cfg.restarts < 1:
        raise ConfigError("restarts", "must be at least 1")
    for key in ("sp_tol", "quad_tol", "step_tol"):
        if not getattr(cfg, key) > 0.0:
            raise ConfigError(key, "must be positive")
    cfg.build_measure()
    cfg.build_mechanism()


def dump_config(cfg: ExperimentConfig) -> str:
    lines = []
    for key, value in asdict(cfg).items():
        if key == "n":
            value = ",".join(str(v) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
