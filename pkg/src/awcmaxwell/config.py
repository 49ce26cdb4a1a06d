"""Run configuration: defaults, validation, and key=value parsing."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

#: Keys accepted in configuration text and as CLI overrides.
CONFIG_KEYS = (
    "domain_length_um",
    "jmin",
    "jmax",
    "order",
    "zeta",
    "dt_factor",
    "steps",
    "boundary",
    "pml_width_frac",
    "sigma_um",
    "snapshot_every",
    "out_dir",
)

_INT_KEYS = {"jmin", "jmax", "order", "steps", "snapshot_every"}
_FLOAT_KEYS = {"domain_length_um", "zeta", "dt_factor", "pml_width_frac",
               "sigma_um"}


@dataclass
class SimulationConfig:
    """Parameters of one run.  Defaults reproduce the free-space
    Gaussian-pulse experiment at full scale."""

    domain_length_um: float = 6.0
    jmin: int = 3
    jmax: int = 9
    order: int = 4
    zeta: float = 5e-4
    dt_factor: float | None = None  # None: the documented step Delta/(1.6 c)
    steps: int = 100
    boundary: str = "PML"
    pml_width_frac: float = 0.25
    sigma_um: float = 1.0 / (4.0 * math.sqrt(2.0))
    snapshot_every: int = 50
    out_dir: str = "out"

    # Programmatic knobs, not part of the config-file surface.
    eps_r: float = 1.0
    ic: str = "gaussian"  # gaussian | zero
    center_frac: tuple = (0.5, 0.5)
    full_grid: bool = False
    enforce_cfl: bool = True

    def validate(self) -> "SimulationConfig":
        def bad(key, constraint):
            raise ConfigError(f"{key}: {constraint} (got {getattr(self, key)})")

        if self.domain_length_um <= 0:
            bad("domain_length_um", "must be positive")
        if not 1 <= self.jmin:
            bad("jmin", "must be at least 1")
        if not self.jmin < self.jmax:
            bad("jmax", f"must exceed jmin={self.jmin}")
        if self.jmax > 12:
            bad("jmax", "must be at most 12")
        if self.order not in (2, 3, 4):
            bad("order", "must be one of 2, 3, 4")
        if self.zeta < 0:
            bad("zeta", "must be nonnegative")
        if self.dt_factor is not None:
            if not self.dt_factor > 0:
                bad("dt_factor", "must be positive")
            if self.enforce_cfl and self.dt_factor > 1:
                bad("dt_factor", "must be at most 1 (fraction of the CFL bound)")
        if self.steps < 0:
            bad("steps", "must be nonnegative")
        if self.boundary not in ("PEC", "PML"):
            bad("boundary", "must be PEC or PML")
        if not 0 < self.pml_width_frac < 0.5:
            bad("pml_width_frac", "must lie in (0, 0.5)")
        if self.sigma_um <= 0:
            bad("sigma_um", "must be positive")
        if self.snapshot_every < 1:
            bad("snapshot_every", "must be at least 1")
        if np.any(np.asarray(self.eps_r) < 1):
            bad("eps_r", "must be at least 1 everywhere")
        if self.ic not in ("gaussian", "zero"):
            bad("ic", "must be gaussian or zero")
        if not all(0 < c < 1 for c in self.center_frac):
            bad("center_frac", "must place the pulse inside the domain")
        return self


def parse_config(text: str) -> SimulationConfig:
    """Build a validated config from flat ``key = value`` text.

    Blank lines and ``#`` comments are ignored; unknown keys and
    invariant violations raise ConfigError naming the key.
    """
    config = SimulationConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r} (line {lineno})")
        try:
            if key in _INT_KEYS:
                parsed = int(value)
            elif key in _FLOAT_KEYS:
                parsed = float(value)
            else:
                parsed = value
        except ValueError:
            raise ConfigError(f"{key}: cannot parse value {value!r}") from None
        if key == "boundary":
            parsed = parsed.upper()
        setattr(config, key, parsed)
    return config.validate()
