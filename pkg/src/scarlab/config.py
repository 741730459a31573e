"""Flat ``key = value`` run configuration."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

from .errors import ParseError, ValidationError
from .spectral import DEFAULT_L_XI, SpectralWindow, is_resonant, resonant_r

E5 = math.exp(5.0)


@dataclass
class RunConfig:
    # window
    r: float | None = None
    resonant_index: int | None = None
    C: float = 200.0
    L: int | None = None
    L_cap: int = 4096
    l_xi: float | None = None
    # group and collar
    group: str = "cylinder"
    eta: float = 0.1
    angle_bound: float | None = None
    # grids and tolerances
    grid_tau: int = 64
    grid_y: int = 256
    grid_theta: int = 64
    tol: float = 1e-6
    n_validate: int = 32
    validate_tol: float = 1e-3
    # kernel-eval
    x: float = 0.0
    t: float = 0.0
    theta: float = 0.0
    s: float | None = None
    mode: str = "asymptotic"
    variant: str = "full_kappa"
    # transform-check / phase-check
    n_samples: int = 50
    n_t: int = 100
    # collar-injectivity
    pairs: int = 10_000
    seed: int = 0
    # dilute
    epsilon: float = 1.0
    C_prime: float = 200.0
    K_weyl: float = 10.0
    eigen_gap: float = 0.0
    base_mass_on_collar: float = 0.0
    base_defect: float = 0.0
    # orchestration
    threads: int = 1
    out: str = "out"

    def window(self) -> SpectralWindow:
        return SpectralWindow(self.r, self.C, self.l_xi, self.L, self.L_cap)

    def load_group(self):
        from .groups import cylinder, load_group_file, octagon_group

        if self.group == "cylinder":
            return cylinder(self.l_xi)
        if self.group == "octagon":
            return octagon_group()
        return load_group_file(self.group)

    def as_dict(self) -> dict:
        return asdict(self)


_FIELDS = {f.name: f for f in fields(RunConfig)}
_INT = {"resonant_index", "L", "L_cap", "grid_tau", "grid_y", "grid_theta", "n_validate",
        "n_samples", "n_t", "pairs", "seed", "threads"}
_STR = {"group", "mode", "variant", "out"}
_POSITIVE = ("C", "eta", "tol", "validate_tol", "epsilon")
_RESOLUTIONS = ("grid_tau", "grid_y", "grid_theta", "n_samples", "n_t")


def _convert(key, raw, line):
    try:
        if key in _STR:
            return raw
        if key in _INT:
            v = float(raw)
            if v != int(v):
                raise ValueError
            return int(v)
        return float(raw)
    except ValueError:
        raise ParseError(f"bad value for {key!r}: {raw!r}", line) from None


def _group_l_xi(cfg: RunConfig):
    if cfg.group == "cylinder":
        return None
    return cfg.load_group().l_xi


def validate(cfg: RunConfig) -> RunConfig:
    for k in _POSITIVE:
        if not getattr(cfg, k) > 0:
            raise ValidationError(f"{k} must be positive")
    for k in _RESOLUTIONS:
        if getattr(cfg, k) < 8:
            raise ValidationError(f"{k} must be at least 8")
    if cfg.mode not in ("asymptotic", "quadrature"):
        raise ValidationError(f"mode must be asymptotic or quadrature, got {cfg.mode!r}")
    if cfg.variant not in ("full_kappa", "spectral_component", "defect_kappa"):
        raise ValidationError(f"unknown variant {cfg.variant!r}")
    if cfg.threads < 1:
        raise ValidationError("threads must be at least 1")
    gl = _group_l_xi(cfg)
    if cfg.l_xi is None:
        cfg.l_xi = gl if gl is not None else DEFAULT_L_XI
    elif gl is not None and abs(cfg.l_xi - gl) > 1e-9:
        raise ValidationError(f"l_xi={cfg.l_xi!r} disagrees with the group's axis length {gl!r}")
    if cfg.resonant_index is not None:
        if cfg.resonant_index < 1:
            raise ValidationError("resonant_index must be at least 1")
        r = 2 * math.pi * cfg.resonant_index / cfg.l_xi
        if cfg.r is not None and abs(cfg.r - r) > 1e-9 * r:
            raise ValidationError(f"r={cfg.r!r} disagrees with resonant_index (r={r!r})")
        cfg.r = r
    elif cfg.r is None:
        cfg.r = resonant_r(cfg.l_xi, E5)
    if not is_resonant(cfg.r, cfg.l_xi):
        near = resonant_r(cfg.l_xi, cfg.r)
        raise ValidationError(f"r={cfg.r!r} is not resonant for l_xi={cfg.l_xi!r}; nearest resonant r={near!r}")
    if cfg.resonant_index is None:
        cfg.resonant_index = int(round(cfg.r * cfg.l_xi / (2 * math.pi)))
    w = cfg.window()
    if cfg.angle_bound is None:
        cfg.angle_bound = w.r ** (-5 / w.C)
    if not 0 < cfg.angle_bound < math.pi / 2:
        raise ValidationError("angle_bound must lie in (0, pi/2)")
    if cfg.L is None:
        cfg.L = w.L
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines with ``#`` comments; fills and validates defaults."""
    vals = {}
    for i, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParseError(f"expected 'key = value', got {body!r}", i)
        key, raw = (p.strip() for p in body.split("=", 1))
        if key not in _FIELDS:
            raise ParseError(f"unknown key {key!r}", i)
        if key in vals:
            raise ParseError(f"duplicate key {key!r}", i)
        if not raw:
            raise ParseError(f"empty value for {key!r}", i)
        vals[key] = _convert(key, raw, i)
    return validate(RunConfig(**vals))


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
