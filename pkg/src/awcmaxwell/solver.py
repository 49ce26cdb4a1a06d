"""Transverse-magnetic Maxwell stepping on the adaptive grid.

The y-polarized system couples Ey with Hx and Hz on a 2D x-z domain.
Every step first adapts the grid to the current Ey (threshold the
transform, grow safety and stencil closures, reconstruct), then
advances the fields leapfrog-style: H lives at half-integer times, Ey
at integer times.  Ey is carried as the split pair Eyx + Eyz so the
absorbing layer can damp each sweep direction separately; outside the
layer the pair behaves exactly like the plain field.

Grids, levels and stencils come from the grid/wavelets/derivatives
modules; this module owns the physics, the step-size control, and the
boundary treatment.
"""

import math
from dataclasses import dataclass

import numpy as np

from .config import SimulationConfig
from .derivatives import diff_x, diff_z
from .errors import ConfigError, InstabilityError
from .filters import FilterBank, build_filter_bank
from .grid import (
    GridSpec,
    add_adjacent_zone,
    compute_levels,
    extend_for_derivatives,
    reconstruction_check,
)
from .wavelets import (
    CoeffPyramid,
    fwt_full,
    interpolate_missing,
    iwt_full,
    threshold_coeffs,
)

EPS0 = 8.8541878128e-12  # F/m
MU0 = 1.25663706212e-6  # H/m
C0 = 1.0 / math.sqrt(EPS0 * MU0)  # m/s
ETA0 = math.sqrt(MU0 / EPS0)  # Ohm


def cfl_max_dt(delta_m: float, bank: FilterBank, c: float = C0) -> float:
    """Largest stable time step for mesh size delta_m (meters)."""
    if delta_m <= 0:
        raise ConfigError(f"mesh size must be positive, got {delta_m}")
    return delta_m / (math.sqrt(2.0) * c * bank.deriv_abs_sum)


def default_dt_factor(bank: FilterBank) -> float:
    """CFL fraction reproducing the step Delta/(1.6 c)."""
    return math.sqrt(2.0) * bank.deriv_abs_sum / 1.6


@dataclass
class FieldState:
    """Fields plus the mask chain of the current step.

    Ey is sampled at t = k dt, the magnetic fields at t = (k - 1/2) dt
    entering a step.  eyx/eyz sum to ey on mask0.  pmask0 and pmask1
    are the previous step's final mask0/mask1: the supports on which
    the electric splits and the magnetic fields carry valid values
    when a new step begins.
    """

    ey: np.ndarray
    eyx: np.ndarray
    eyz: np.ndarray
    hx: np.ndarray
    hz: np.ndarray
    pmask0: np.ndarray
    pmask1: np.ndarray
    mask0: np.ndarray
    mask1: np.ndarray
    mask2: np.ndarray
    level0: np.ndarray
    level1: np.ndarray
    k: int = 0
    t: float = 0.0


def _require_subset(inner, outer, what):
    if np.any(inner & ~outer):
        raise RuntimeError(f"mask chain broken: {what}")


class Simulation:
    """One configured run: grid, filters, step size, boundary, state.

    initial_ey overrides the configured initial condition with an
    explicit Ey(t=0) array.  initial_h provides user magnetic fields at
    t = -dt/2 as a pair (hx, hz); without it the magnetic start-up is
    the explicit Euler half-step from the t=0 electric field.
    """

    def __init__(self, config: SimulationConfig, initial_ey=None,
                 initial_h=None):
        config.validate()
        self.config = config
        self.spec = GridSpec(config.jmin, config.jmax)
        self.bank = build_filter_bank(config.order)
        self.length_m = config.domain_length_um * 1e-6
        self.delta_m = self.length_m / 2**config.jmax

        factor = config.dt_factor
        if factor is None:
            factor = default_dt_factor(self.bank)
        self.dt = factor * cfl_max_dt(self.delta_m, self.bank)
        if config.enforce_cfl and self.dt > cfl_max_dt(self.delta_m, self.bank):
            raise ConfigError(
                f"dt_factor {factor} exceeds the CFL bound; refusing to run"
            )

        self._build_update_coefficients()
        self.state = self._initialize(initial_ey, initial_h)

    # ------------------------------------------------------------ setup

    def _sigma_profile(self) -> tuple[np.ndarray, np.ndarray]:
        """Conductivity along each axis: cubic-graded inside the layer,
        zero elsewhere (and everywhere for the reflecting boundary)."""
        n = self.spec.n
        if self.config.boundary != "PML":
            zero = np.zeros(n)
            return zero, zero.copy()
        depth_m = self.config.pml_width_frac * self.length_m
        reflection = 1e-6
        grade = 3
        sigma_max = -(grade + 1) * EPS0 * C0 * math.log(reflection) / (2 * depth_m)
        x = np.arange(n) * self.delta_m
        left = np.clip((depth_m - x) / depth_m, 0.0, 1.0)
        right = np.clip((x - (self.length_m - depth_m)) / depth_m, 0.0, 1.0)
        profile = sigma_max * (left**grade + right**grade)
        return profile, profile.copy()

    def _build_update_coefficients(self):
        sig_x, sig_z = self._sigma_profile()
        eps = EPS0 * self.config.eps_r
        qx = (sig_x * self.dt / (2.0 * eps))[:, None]
        qz = (sig_z * self.dt / (2.0 * eps))[None, :]
        self.ea_x = (1.0 - qx) / (1.0 + qx)
        self.eb_x = (self.dt / eps) / (1.0 + qx)
        self.ea_z = (1.0 - qz) / (1.0 + qz)
        self.eb_z = (self.dt / eps) / (1.0 + qz)
        # Matched-impedance magnetic losses share the dimensionless ramp.
        self.ha_x = self.ea_x
        self.hb_x = (self.dt / MU0) / (1.0 + qx)
        self.ha_z = self.ea_z
        self.hb_z = (self.dt / MU0) / (1.0 + qz)

    def _initial_ey(self, initial_ey) -> np.ndarray:
        n = self.spec.n
        if initial_ey is not None:
            field = np.array(initial_ey, dtype=float)
            if field.shape != (n, n):
                raise ConfigError(
                    f"initial field shape {field.shape} does not match ({n}, {n})"
                )
            return field
        if self.config.ic == "zero":
            return np.zeros((n, n))
        coords = np.linspace(0.0, self.config.domain_length_um, n)
        cx = self.config.center_frac[0] * self.config.domain_length_um
        cz = self.config.center_frac[1] * self.config.domain_length_um
        r2 = (coords[:, None] - cx) ** 2 + (coords[None, :] - cz) ** 2
        return np.exp(-r2 / (2.0 * self.config.sigma_um**2))

    def _initialize(self, initial_ey, initial_h) -> FieldState:
        n = self.spec.n
        full = self.spec.full_mask()
        levels = np.full((n, n), self.spec.j_max, dtype=np.int64)
        ey = self._initial_ey(initial_ey)
        if initial_h is not None:
            hx = np.array(initial_h[0], dtype=float)
            hz = np.array(initial_h[1], dtype=float)
            if hx.shape != (n, n) or hz.shape != (n, n):
                raise ConfigError("initial_h arrays must match the grid shape")
        else:
            # Synthetic t = -dt/2 fields: the first leapfrog advance then
            # lands exactly on the Euler half-step values +-(dt/2)/mu0 d(Ey).
            half = 0.5 * self.dt / MU0
            hx = -half * diff_z(ey, full, levels, self.spec, self.bank,
                                self.length_m)
            hz = half * diff_x(ey, full, levels, self.spec, self.bank,
                               self.length_m)
        state = FieldState(
            ey=ey,
            eyx=0.5 * ey,
            eyz=0.5 * ey,
            hx=hx,
            hz=hz,
            pmask0=full.copy(),
            pmask1=full.copy(),
            mask0=full.copy(),
            mask1=full.copy(),
            mask2=full.copy(),
            level0=levels.copy(),
            level1=levels.copy(),
        )
        self.apply_boundary(state)
        state.ey = state.eyx + state.eyz
        return state

    # ------------------------------------------------------------ stepping

    def adapt_step(self):
        """Re-fit the grid to the current Ey (no-op in full-grid mode).

        The transform of the summed field decides only grid membership:
        detail positions below the threshold leave the mask (unless the
        safety zone or a stencil closure keeps them).  The electric
        splits are carried through their own transforms and come back
        on the new grid with their coefficients intact; only positions
        dropped from the grid lose their content.  Zeroing retained
        sub-threshold coefficients instead deletes just-below-threshold
        field content every step and the deviation from the full-grid
        reference then grows far past the threshold scale.
        """
        state, spec, bank = self.state, self.spec, self.bank
        if self.config.full_grid:
            state.pmask0 = state.mask0
            state.pmask1 = state.mask1
            return
        state.pmask0 = state.mask0
        state.pmask1 = state.mask1
        pyr_x = CoeffPyramid.from_field(state.eyx, spec, mask=state.pmask0)
        pyr_z = CoeffPyramid.from_field(state.eyz, spec, mask=state.pmask0)
        # The masks fed to the transforms here and below come from the
        # closure operations, which guarantee stencil completeness, so
        # the per-call validation is skipped.
        fwt_full(pyr_x, state.pmask0, bank, check=False)
        fwt_full(pyr_z, state.pmask0, bank, check=False)
        total = CoeffPyramid(pyr_x.data + pyr_z.data, spec, "wavelet")
        _, mask0 = threshold_coeffs(total, self.config.zeta,
                                    mask=state.pmask0)
        mask0 = reconstruction_check(add_adjacent_zone(mask0, spec), spec, bank)
        level0 = compute_levels(mask0, spec)
        mask1 = extend_for_derivatives(mask0, spec, level0, bank)
        level1 = compute_levels(mask1, spec)
        mask2 = extend_for_derivatives(mask1, spec, level1, bank)
        _require_subset(mask0, mask1, "mask0 not within mask1")
        _require_subset(mask1, mask2, "mask1 not within mask2")
        iwt_full(pyr_x, mask2, bank, check=False)
        iwt_full(pyr_z, mask2, bank, check=False)
        state.eyx = pyr_x.data
        state.eyz = pyr_z.data
        state.ey = state.eyx + state.eyz
        state.mask0, state.mask1, state.mask2 = mask0, mask1, mask2
        state.level0, state.level1 = level0, level1

    def update_step(self):
        """Advance H by dt, then Ey by dt, on the adapted grid."""
        with np.errstate(over="ignore", invalid="ignore"):
            # Blow-ups surface through the finite check below, not as
            # per-operation warnings.
            self._update_fields()
        state = self.state
        state.k += 1
        state.t += self.dt
        if not (np.isfinite(state.ey).all() and np.isfinite(state.hx).all()
                and np.isfinite(state.hz).all()):
            raise InstabilityError(state.k)

    def _update_fields(self):
        state, spec, bank = self.state, self.spec, self.bank
        length = self.length_m

        # The magnetic fields carry genuine values on the whole previous
        # Mask1 (update ring included); interpolating from that support
        # instead of the previous Mask0 keeps them, and the error against
        # the full-grid reference stays at the threshold scale instead of
        # accumulating ring-prediction glitches every step.
        state.hx = interpolate_missing(state.hx, state.pmask1, state.mask1,
                                       spec, bank, check=False)
        state.hz = interpolate_missing(state.hz, state.pmask1, state.mask1,
                                       spec, bank, check=False)
        dz_ey = diff_z(state.ey, state.mask2, state.level1, spec, bank, length)
        dx_ey = diff_x(state.ey, state.mask2, state.level1, spec, bank, length)
        state.hx = np.where(state.mask1, self.ha_z * state.hx
                            + self.hb_z * dz_ey, 0.0)
        state.hz = np.where(state.mask1, self.ha_x * state.hz
                            - self.hb_x * dx_ey, 0.0)

        # The splits came out of adapt_step valid on mask2, a superset
        # of mask0, so they need no separate interpolation pass here.
        dz_hx = diff_z(state.hx, state.mask1, state.level0, spec, bank, length)
        dx_hz = diff_x(state.hz, state.mask1, state.level0, spec, bank, length)
        state.eyz = np.where(state.mask0, self.ea_z * state.eyz
                             + self.eb_z * dz_hx, 0.0)
        state.eyx = np.where(state.mask0, self.ea_x * state.eyx
                             - self.eb_x * dx_hz, 0.0)
        self.apply_boundary(state)
        state.ey = state.eyx + state.eyz

    def step(self):
        """One full time step: adapt, then update."""
        self.adapt_step()
        self.update_step()

    def dense_ey(self) -> np.ndarray:
        """Ey over the whole finest lattice.

        Inactive points hold no value of their own; they are filled by
        wavelet interpolation from the active representation, which is
        how the adaptive solution is defined between mask points.
        """
        return interpolate_missing(self.state.ey, self.state.mask0,
                                   self.spec.full_mask(), self.spec,
                                   self.bank, check=False)

    def full_grid_step(self):
        """Reference step with the grid pinned to the full finest lattice."""
        if not self.config.full_grid:
            raise ConfigError("full_grid_step requires a full_grid config")
        self.step()

    def apply_boundary(self, state: FieldState):
        """Outermost ring acts as a perfect conductor in both modes; the
        absorbing layer itself lives in the update coefficients."""
        for part in (state.eyx, state.eyz):
            part[0, :] = 0.0
            part[-1, :] = 0.0
            part[:, 0] = 0.0
            part[:, -1] = 0.0
        return state

    def run(self, steps=None, on_step=None):
        """Advance the configured number of steps.

        on_step, when given, is called after every step with this
        simulation; the harness uses it for metrics and snapshots.
        """
        count = self.config.steps if steps is None else steps
        for _ in range(count):
            self.step()
            if on_step is not None:
                on_step(self)
        return self.state
