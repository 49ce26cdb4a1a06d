"""Experiment orchestration: runs, snapshots, oracle comparison, timing.

A run writes everything needed to reproduce and plot it into one output
directory: a manifest with the config echo and per-step metrics, field
snapshots as headered CSV, and grid masks as plain P2 graymaps.  The
compression rate cp of a step is the active-point count divided by the
full finest-lattice count (2^jmax + 1)^2.

Field CSVs print values with repr so a re-run reproduces them byte for
byte; wall-clock times are measured with a monotonic clock around the
adapt+update pair only, never around I/O.
"""

import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import SimulationConfig
from .errors import ConfigError
from .grid import GridSpec
from .solver import FieldState, Simulation

MANIFEST_HEADER = "k,t,cardinality,card1,card2,cp,wall_ms"
ERROR_HEADER = "k,t,max_full,rel_err"
TIMING_HEADER = "k,cardinality,wall_ms"
FIELD_HEADER = "row,col,x_um,z_um,Ey,Hx,Hz"

# Oracle comparison stops once the reference field has decayed below
# this fraction of its initial peak; relative error against a vanished
# field would be noise.
ORACLE_FLOOR = 1e-6


@dataclass
class StepRecord:
    """Per-step metrics as stored in the manifest."""

    k: int
    t: float
    cardinality: int
    card1: int
    card2: int
    cp: float
    wall_ms: float


@dataclass
class ErrorRecord:
    """One lockstep comparison point against the full-grid reference."""

    k: int
    t: float
    max_full: float
    rel_err: float


@dataclass
class RunResult:
    """Everything a finished run leaves behind."""

    config: SimulationConfig
    out_dir: Path
    manifest_path: Path
    records: list
    snapshots: dict
    final_state: FieldState


def _fmt(value) -> str:
    """Shortest decimal string that round-trips to the same float."""
    return repr(float(value))


def write_field_csv(path, state: FieldState, spec: GridSpec,
                    domain_length_um: float) -> Path:
    """Write every finest-lattice point as row,col,x_um,z_um,Ey,Hx,Hz."""
    path = Path(path)
    delta_um = domain_length_um / (spec.n - 1)
    ey, hx, hz = state.ey, state.hx, state.hz

    def rows():
        yield FIELD_HEADER + "\n"
        for m in range(spec.n):
            x = _fmt(m * delta_um)
            row_ey, row_hx, row_hz = ey[m], hx[m], hz[m]
            for n in range(spec.n):
                yield (f"{m},{n},{x},{_fmt(n * delta_um)},"
                       f"{_fmt(row_ey[n])},{_fmt(row_hx[n])},"
                       f"{_fmt(row_hz[n])}\n")

    with open(path, "w") as fh:
        fh.writelines(rows())
    return path


def write_mask_pgm(path, mask: np.ndarray) -> Path:
    """Write a boolean mask as a P2 graymap, 255 = active point."""
    path = Path(path)
    values = np.where(mask, 255, 0)
    with open(path, "w") as fh:
        fh.write(f"P2\n{mask.shape[1]} {mask.shape[0]}\n255\n")
        for row in values:
            tokens = [str(v) for v in row]
            # Keep lines below the 70-character limit of the format.
            for start in range(0, len(tokens), 15):
                fh.write(" ".join(tokens[start:start + 15]) + "\n")
    return path


def read_mask_pgm(path) -> np.ndarray:
    """Read a P2 graymap back into a boolean mask (nonzero = active)."""
    tokens = []
    with open(path) as fh:
        for line in fh:
            body = line.split("#", 1)[0]
            tokens.extend(body.split())
    if not tokens or tokens[0] != "P2":
        raise ValueError(f"{path}: not a plain P2 graymap")
    width, height = int(tokens[1]), int(tokens[2])
    pixels = np.array([int(t) for t in tokens[4:4 + width * height]])
    if pixels.size != width * height:
        raise ValueError(f"{path}: truncated pixel data")
    return pixels.reshape(height, width) > 0


def emit_snapshot(state: FieldState, spec: GridSpec,
                  config: SimulationConfig, out_dir,
                  index: dict | None = None) -> tuple:
    """Write the field CSV and mask image for the state's current step.

    When an index dict is given the pair of file names is recorded
    under the step number, ready for the manifest trailer.
    """
    out_dir = Path(out_dir)
    field_path = write_field_csv(out_dir / f"field_k{state.k}.csv", state,
                                 spec, config.domain_length_um)
    mask_path = write_mask_pgm(out_dir / f"mask_k{state.k}.pgm", state.mask0)
    if index is not None:
        index[state.k] = (field_path.name, mask_path.name)
    return field_path, mask_path


def _write_manifest(path, config: SimulationConfig, records, snapshots,
                    final_rel_error=None) -> Path:
    path = Path(path)
    factor = config.dt_factor
    if factor is None:
        from .solver import default_dt_factor
        from .filters import build_filter_bank
        factor = default_dt_factor(build_filter_bank(config.order))
    echo = {
        "domain_length_um": config.domain_length_um,
        "jmin": config.jmin,
        "jmax": config.jmax,
        "order": config.order,
        "zeta": config.zeta,
        "dt_factor": factor,
        "steps": config.steps,
        "boundary": config.boundary,
        "pml_width_frac": config.pml_width_frac,
        "sigma_um": config.sigma_um,
        "snapshot_every": config.snapshot_every,
        "out_dir": config.out_dir,
    }
    with open(path, "w") as fh:
        fh.write("# run manifest\n")
        for key, value in echo.items():
            fh.write(f"# {key} = {value}\n")
        fh.write(MANIFEST_HEADER + "\n")
        for r in records:
            fh.write(f"{r.k},{_fmt(r.t)},{r.cardinality},{r.card1},"
                     f"{r.card2},{_fmt(r.cp)},{_fmt(r.wall_ms)}\n")
        for k in sorted(snapshots):
            field_name, mask_name = snapshots[k]
            fh.write(f"# snapshot {k}: {field_name} {mask_name}\n")
        if records:
            fh.write(f"# summary: min_cp = {_fmt(min(r.cp for r in records))}\n")
            fh.write(f"# summary: max_cp = {_fmt(max(r.cp for r in records))}\n")
        else:
            fh.write("# summary: min_cp = undefined\n")
            fh.write("# summary: max_cp = undefined\n")
        if final_rel_error is not None:
            fh.write(f"# summary: final_rel_error = {_fmt(final_rel_error)}\n")
    return path


def read_manifest(path) -> list:
    """Parse the per-step records back out of a manifest file."""
    records = []
    saw_header = False
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if not saw_header:
                if line != MANIFEST_HEADER:
                    raise ConfigError(
                        f"{path}: unexpected manifest header {line!r}")
                saw_header = True
                continue
            k, t, card, card1, card2, cp, wall = line.split(",")
            records.append(StepRecord(int(k), float(t), int(card),
                                      int(card1), int(card2), float(cp),
                                      float(wall)))
    if not saw_header:
        raise ConfigError(f"{path}: no manifest header found")
    return records


def run_simulation(config: SimulationConfig, out_dir=None,
                   oracle: bool = False) -> RunResult:
    """Run the configured experiment, writing snapshots and a manifest.

    Snapshots go out at step 0, every snapshot_every steps, and at the
    final step.  With oracle=True a full-grid twin advances in lockstep
    (outside the timed section) and the final relative max Ey deviation
    lands in the manifest summary.
    """
    sim = Simulation(config)
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    twin = Simulation(replace(config, full_grid=True)) if oracle else None

    records = []
    snapshots = {}
    full_count = sim.spec.n ** 2
    emit_snapshot(sim.state, sim.spec, config, out, snapshots)
    for _ in range(config.steps):
        start = time.perf_counter()
        sim.step()
        wall_ms = (time.perf_counter() - start) * 1e3
        state = sim.state
        card = int(state.mask0.sum())
        records.append(StepRecord(
            k=state.k, t=state.t, cardinality=card,
            card1=int(state.mask1.sum()), card2=int(state.mask2.sum()),
            cp=card / full_count, wall_ms=wall_ms))
        if twin is not None:
            twin.step()
        if state.k % config.snapshot_every == 0 or state.k == config.steps:
            emit_snapshot(state, sim.spec, config, out, snapshots)

    final_rel_error = None
    if twin is not None:
        peak = float(np.abs(twin.state.ey).max())
        if peak > 0:
            final_rel_error = float(
                np.abs(sim.dense_ey() - twin.state.ey).max()) / peak
    manifest_path = _write_manifest(out / "manifest.csv", config, records,
                                    snapshots, final_rel_error)
    return RunResult(config=config, out_dir=out, manifest_path=manifest_path,
                     records=records, snapshots=snapshots,
                     final_state=sim.state)


def compare_adaptive_vs_oracle(config: SimulationConfig,
                               out_dir=None) -> list:
    """Advance the adaptive and full-grid solvers in lockstep.

    Emits one relative-error record per step to error_series.csv and
    returns the records.  Reporting stops once the reference field's
    peak falls below ORACLE_FLOOR times its initial value; past that
    point the pulse has left the domain and the ratio means nothing.
    """
    adaptive = Simulation(replace(config, full_grid=False))
    reference = Simulation(replace(config, full_grid=True))
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    floor = ORACLE_FLOOR * float(np.abs(reference.state.ey).max())
    records = []
    for _ in range(config.steps):
        adaptive.step()
        reference.step()
        max_full = float(np.abs(reference.state.ey).max())
        if max_full < floor:
            break
        # Compare the adaptive solution as it is defined over the whole
        # domain: active values plus interpolation at inactive points.
        rel = float(np.abs(adaptive.dense_ey()
                           - reference.state.ey).max()) / max_full
        records.append(ErrorRecord(k=reference.state.k, t=reference.state.t,
                                   max_full=max_full, rel_err=rel))

    with open(out / "error_series.csv", "w") as fh:
        fh.write(ERROR_HEADER + "\n")
        for r in records:
            fh.write(f"{r.k},{_fmt(r.t)},{_fmt(r.max_full)},"
                     f"{_fmt(r.rel_err)}\n")
    return records


def proportionality_report(manifest, out_dir=None):
    """Correlate per-step wall time with mask cardinality.

    manifest is a manifest path or a list of StepRecord.  Writes the
    paired series to timing.csv (next to the manifest unless out_dir
    says otherwise) and returns the Pearson coefficient, or None when
    either series has zero variance.
    """
    if isinstance(manifest, (str, Path)):
        manifest_path = Path(manifest)
        records = read_manifest(manifest_path)
        if out_dir is None:
            out_dir = manifest_path.parent
    else:
        records = list(manifest)
    if len(records) < 50:
        raise ConfigError(
            f"need at least 50 step records for a stable correlation, "
            f"got {len(records)}")

    card = np.array([r.cardinality for r in records], dtype=float)
    wall = np.array([r.wall_ms for r in records], dtype=float)
    if card.std() == 0.0 or wall.std() == 0.0:
        pearson = None
    else:
        pearson = float(np.corrcoef(card, wall)[0, 1])

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "timing.csv", "w") as fh:
            fh.write(TIMING_HEADER + "\n")
            for r in records:
                fh.write(f"{r.k},{r.cardinality},{_fmt(r.wall_ms)}\n")
            shown = "undefined" if pearson is None else _fmt(pearson)
            fh.write(f"# pearson = {shown}\n")
    return pearson
