"""Pipeline orchestration, configuration, and bit-exact exports.

Configuration is a flat UTF-8 ``key = value`` file (``#`` starts a
comment, unknown keys are hard errors).  The frame loop runs: blur per the
smoothing schedule, spatial and temporal derivatives (optionally dense
optical flow), inhibition update at the current gaze point, mass density,
then substeps of potential evolution interleaved with particle steps, the
potential always updating first.  Scanpaths serialize to CSV with 9
significant digits and LF endings; fields serialize to a small binary
format ("FOAF" magic, little-endian u32 width and height, row-major f32
samples) so runs are byte-reproducible across platforms.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
error.
"""

from __future__ import annotations

import argparse
import glob
import io
import math
import os
import struct
import sys
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DataError,
    DimensionError,
    GazefieldError,
    NumericalError,
)
from .foa import (
    AttractionSign,
    BoundaryPolicy,
    FoaParams,
    FoaSample,
    FoaState,
    Scanpath,
    detect_saccades,
    foa_step,
)
from .mass import IorField, IorParams, MassParams, MotionSource, ior_step, mass_density
from .optical_flow import HsParams, horn_schunck
from .potential import (
    Mode,
    PotentialState,
    TelegraphParams,
    convergence_in_c,
    direct_potential,
    evolve_potential,
    poisson_solve,
)
from .retina import (
    BlurSchedule,
    Field2D,
    FlowField,
    FrameSequence,
    gaussian_blur,
    gradient,
    load_pgm,
    magnitude,
    save_pgm,
    schedule_sigma,
    temporal_derivative,
)
from . import synth

__all__ = [
    "SimConfig",
    "FieldDump",
    "parse_config",
    "load_config",
    "run_simulation",
    "export_scanpath",
    "import_scanpath",
    "export_field",
    "read_field",
    "export_flow",
    "read_flow",
    "main",
]


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_MOTION_SOURCES = {m.value: m for m in MotionSource}
_MODES = {m.value: m for m in Mode}
_ATTRACTION_SIGNS = {"attract": AttractionSign.ATTRACT,
                     "repel": AttractionSign.REPEL}
_BOUNDARIES = {b.value: b for b in BoundaryPolicy}

_FLOAT_KEYS = {
    "alpha1", "alpha2", "beta", "sigma_ior", "hs_lambda", "hs_tol",
    "gamma", "lambda_drag", "c", "h", "dissipation", "frame_dt",
    "blur_sigma0", "blur_decay_rate", "blur_floor",
}
_INT_KEYS = {"hs_max_iters", "substeps_per_frame", "dump_every"}
_ENUM_KEYS = {
    "motion_source": _MOTION_SOURCES,
    "mode": _MODES,
    "attraction_sign": _ATTRACTION_SIGNS,
    "boundary": _BOUNDARIES,
}
_SPECIAL_KEYS = {"initial_foa"}
_ALL_KEYS = _FLOAT_KEYS | _INT_KEYS | set(_ENUM_KEYS) | _SPECIAL_KEYS


@dataclass(frozen=True)
class SimConfig:
    """Every knob of one simulation run.

    The two step sizes are not stored: both the potential stepper and the
    particle advance by frame_dt / substeps_per_frame, derived at run
    time, and stability of that step is checked here at construction so a
    bad combination fails before any frame is read.
    """

    mass: MassParams = MassParams()
    ior: IorParams = IorParams()
    hs: HsParams = HsParams()
    blur: BlurSchedule = BlurSchedule()
    gamma: float = 1.0
    lambda_drag: float = 1.0
    c: float = 1.0
    h: float = 1.0
    mode: Mode = Mode.DAMPED_WAVE
    dissipation: float = 1.0
    attraction_sign: AttractionSign = AttractionSign.ATTRACT
    boundary: BoundaryPolicy = BoundaryPolicy.REFLECT
    frame_dt: float = 1.0 / 30.0
    substeps_per_frame: int = 8
    dump_every: int = 0
    initial_foa: tuple[float, float] | None = None

    def __post_init__(self):
        if not (isinstance(self.frame_dt, (int, float))
                and math.isfinite(self.frame_dt) and self.frame_dt > 0):
            raise ConfigError(f"frame_dt must be a positive real, got {self.frame_dt}")
        if not (isinstance(self.substeps_per_frame, int)
                and self.substeps_per_frame >= 1):
            raise ConfigError(
                f"substeps_per_frame must be an integer >= 1, got {self.substeps_per_frame}")
        if not (isinstance(self.dump_every, int) and self.dump_every >= 0):
            raise ConfigError(
                f"dump_every must be an integer >= 0, got {self.dump_every}")
        if self.initial_foa is not None:
            x, y = self.initial_foa
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ConfigError(f"initial_foa must be finite, got {self.initial_foa}")
            object.__setattr__(self, "initial_foa", (float(x), float(y)))
        # constructing the derived parameter sets validates ranges and the
        # stability of the shared substep before any frame is touched
        self.telegraph_params()
        self.foa_params()

    @property
    def substep_dt(self) -> float:
        return self.frame_dt / self.substeps_per_frame

    def telegraph_params(self) -> TelegraphParams:
        return TelegraphParams(gamma=self.gamma, lambda_drag=self.lambda_drag,
                               c=self.c, h=self.h, dt=self.substep_dt,
                               mode=self.mode)

    def foa_params(self) -> FoaParams:
        return FoaParams(dissipation=self.dissipation, dt=self.substep_dt,
                         attraction_sign=self.attraction_sign,
                         boundary=self.boundary)


def parse_config(text: str) -> SimConfig:
    """Build a SimConfig from flat ``key = value`` lines.

    ``#`` starts a comment anywhere on a line; blank lines are skipped;
    unknown and duplicate keys are hard errors so misspellings fail loudly.
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        key, _, value = body.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"config line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"config line {lineno}: empty value for {key!r}")
        raw[key] = value

    def take_float(key: str, default: float) -> float:
        if key not in raw:
            return default
        try:
            return float(raw[key])
        except ValueError:
            raise ConfigError(f"config key {key!r}: not a number: {raw[key]!r}") from None

    def take_int(key: str, default: int) -> int:
        if key not in raw:
            return default
        try:
            return int(raw[key])
        except ValueError:
            raise ConfigError(f"config key {key!r}: not an integer: {raw[key]!r}") from None

    def take_enum(key: str, default):
        if key not in raw:
            return default
        table = _ENUM_KEYS[key]
        if raw[key] not in table:
            raise ConfigError(
                f"config key {key!r}: expected one of {sorted(table)}, got {raw[key]!r}")
        return table[raw[key]]

    initial = None
    if "initial_foa" in raw:
        value = raw["initial_foa"]
        if value != "center":
            parts = value.split(",")
            if len(parts) != 2:
                raise ConfigError(
                    f"config key 'initial_foa': expected 'center' or 'x,y', got {value!r}")
            try:
                initial = (float(parts[0]), float(parts[1]))
            except ValueError:
                raise ConfigError(
                    f"config key 'initial_foa': not a coordinate pair: {value!r}") from None

    return SimConfig(
        mass=MassParams(alpha1=take_float("alpha1", 1.0),
                        alpha2=take_float("alpha2", 1.0),
                        motion_source=take_enum("motion_source",
                                                MotionSource.TEMPORAL_DERIVATIVE)),
        ior=IorParams(beta=take_float("beta", 1.0),
                      sigma_ior=take_float("sigma_ior", 4.0)),
        hs=HsParams(lam=take_float("hs_lambda", 0.01),
                    max_iters=take_int("hs_max_iters", 500),
                    tol=take_float("hs_tol", 1e-4)),
        blur=BlurSchedule(sigma0=take_float("blur_sigma0", 0.0),
                          decay_rate=take_float("blur_decay_rate", 0.0),
                          floor=take_float("blur_floor", 0.0)),
        gamma=take_float("gamma", 1.0),
        lambda_drag=take_float("lambda_drag", 1.0),
        c=take_float("c", 1.0),
        h=take_float("h", 1.0),
        mode=take_enum("mode", Mode.DAMPED_WAVE),
        dissipation=take_float("dissipation", 1.0),
        attraction_sign=take_enum("attraction_sign", AttractionSign.ATTRACT),
        boundary=take_enum("boundary", BoundaryPolicy.REFLECT),
        frame_dt=take_float("frame_dt", 1.0 / 30.0),
        substeps_per_frame=take_int("substeps_per_frame", 8),
        dump_every=take_int("dump_every", 0),
        initial_foa=initial,
    )


def load_config(path: str) -> SimConfig:
    """Read and parse a config file; unreadable files are config errors."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text)


# ---------------------------------------------------------------------------
# simulation loop
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldDump:
    """Snapshot of the field state at the end of one frame."""

    frame_index: int
    mass: Field2D
    potential: Field2D
    ior: IorField


@contextmanager
def _stage(frame_index: int, name: str):
    # failures anywhere in the loop surface with the frame and stage that
    # produced them, keeping their error category (and so the exit code)
    try:
        yield
    except GazefieldError as e:
        if isinstance(e, ConfigError):
            root = ConfigError
        elif isinstance(e, DataError):
            root = DataError
        elif isinstance(e, NumericalError):
            root = NumericalError
        else:
            root = GazefieldError
        raise root(f"frame {frame_index}, stage {name}: {e}") from e


def run_simulation(frames: FrameSequence,
                   cfg: SimConfig) -> tuple[Scanpath, list[FieldDump]]:
    """Drive the full pipeline over a frame sequence.

    Per frame: smooth both endpoint frames per the schedule, take spatial
    and temporal derivatives (plus dense flow when the mass wants it),
    decay-and-deposit inhibition at the current gaze point, assemble the
    mass density, then run substeps_per_frame rounds of potential
    evolution each followed by one particle step.  The scanpath holds the
    initial state plus one sample per substep; dumps snapshot (mass,
    potential, inhibition) every dump_every-th frame.  Deterministic:
    identical inputs give bit-identical results.
    """
    tp = cfg.telegraph_params()
    fp = cfg.foa_params()
    w, h_px = frames.width, frames.height
    if w < 3 or h_px < 3:
        raise DimensionError(f"simulation needs frames of at least 3x3, got {w}x{h_px}")
    if cfg.initial_foa is None:
        state = FoaState((w - 1) / 2.0, (h_px - 1) / 2.0)
    else:
        x0, y0 = cfg.initial_foa
        if not (0.0 <= x0 <= w - 1 and 0.0 <= y0 <= h_px - 1):
            raise ConfigError(
                f"initial_foa {cfg.initial_foa} outside grid "
                f"[0, {w - 1}] x [0, {h_px - 1}]")
        state = FoaState(x0, y0)

    ior = IorField.zeros(w, h_px)
    pot = PotentialState.zero(w, h_px)
    substeps = cfg.substeps_per_frame
    dt_sub = cfg.substep_dt
    samples = [FoaSample(0.0, state.x, state.y, state.vx, state.vy)]
    dumps: list[FieldDump] = []

    for k in range(len(frames) - 1):
        with _stage(k, "blur"):
            sigma = schedule_sigma(cfg.blur, k * frames.dt_frame)
            b_now = gaussian_blur(frames.frames[k], sigma)
            b_next = gaussian_blur(frames.frames[k + 1], sigma)
        with _stage(k, "differentiation"):
            grad_b = gradient(b_now, cfg.h)
            ddt = temporal_derivative(b_now, b_next, frames.dt_frame)
        with _stage(k, "motion"):
            if cfg.mass.motion_source is MotionSource.FLOW_MAGNITUDE:
                flow = horn_schunck(b_now, b_next, frames.dt_frame, cfg.hs)
                motion = magnitude(flow)
            else:
                motion = Field2D(np.abs(ddt.values))
        with _stage(k, "inhibition"):
            ior = ior_step(ior, (state.x, state.y), frames.dt_frame, cfg.ior)
        with _stage(k, "mass"):
            mu = mass_density(grad_b, motion, ior, cfg.mass)
        for j in range(substeps):
            with _stage(k, "potential"):
                pot = evolve_potential(pot, mu, tp)
            with _stage(k, "particle"):
                state = foa_step(state, pot.u, fp, cfg.h)
            samples.append(FoaSample((k * substeps + j + 1) * dt_sub,
                                     state.x, state.y, state.vx, state.vy))
        if cfg.dump_every > 0 and k % cfg.dump_every == 0:
            dumps.append(FieldDump(k, mu, pot.u, ior))

    return Scanpath(tuple(samples)), dumps


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def export_scanpath(path: Scanpath, sink) -> None:
    """Write a scanpath as CSV bytes: header, then one row per sample.

    Floats carry 9 significant digits, the saccade flag is 0 or 1, lines
    end with LF; identical paths serialize to identical bytes on every
    platform.
    """
    lines = ["t,x,y,vx,vy,saccade"]
    for s in path.samples:
        lines.append(",".join((_fmt(s.t), _fmt(s.x), _fmt(s.y),
                               _fmt(s.vx), _fmt(s.vy),
                               "1" if s.saccade else "0")))
    sink.write(("\n".join(lines) + "\n").encode("ascii"))


def import_scanpath(data: bytes) -> Scanpath:
    """Parse bytes produced by export_scanpath back into a Scanpath."""
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as e:
        raise DataError(f"scanpath CSV is not ASCII: {e}") from e
    lines = text.split("\n")
    if not lines or lines[0] != "t,x,y,vx,vy,saccade":
        raise DataError("scanpath CSV header missing or malformed")
    if lines[-1] != "":
        raise DataError("scanpath CSV must end with a newline")
    samples = []
    for lineno, line in enumerate(lines[1:-1], 2):
        parts = line.split(",")
        if len(parts) != 6 or parts[5] not in ("0", "1"):
            raise DataError(f"scanpath CSV line {lineno}: malformed row")
        try:
            t, x, y, vx, vy = (float(p) for p in parts[:5])
        except ValueError as e:
            raise DataError(f"scanpath CSV line {lineno}: {e}") from e
        samples.append(FoaSample(t, x, y, vx, vy, parts[5] == "1"))
    return Scanpath(tuple(samples))


def export_field(f: Field2D, sink) -> None:
    """Write a field: "FOAF", u32le width and height, row-major f32le values."""
    sink.write(b"FOAF" + struct.pack("<II", f.width, f.height)
               + f.values.astype("<f4").tobytes())


def read_field(source) -> Field2D:
    """Read one field record; leaves the stream after its payload."""
    magic = source.read(4)
    if magic != b"FOAF":
        raise DataError(f"bad field magic {magic!r}, expected b'FOAF'")
    dims = source.read(8)
    if len(dims) < 8:
        raise DataError("field header truncated")
    w, h = struct.unpack("<II", dims)
    if w < 1 or h < 1:
        raise DataError(f"field dimensions must be positive, got {w}x{h}")
    payload = source.read(4 * w * h)
    if len(payload) < 4 * w * h:
        raise DataError(f"field payload truncated: expected {4 * w * h} bytes, "
                        f"got {len(payload)}")
    values = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    return Field2D(values.reshape((h, w)))


def export_flow(v: FlowField, sink) -> None:
    """Write a flow as two concatenated field records: dx, then dy."""
    export_field(Field2D(v.dx), sink)
    export_field(Field2D(v.dy), sink)


def read_flow(source) -> FlowField:
    """Read the two-record flow layout written by export_flow."""
    dx = read_field(source)
    dy = read_field(source)
    if dx.values.shape != dy.values.shape:
        raise DimensionError(
            f"flow components disagree: {dx.values.shape} vs {dy.values.shape}")
    return FlowField(dx.values, dy.values)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _read_bytes(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e


def _write_bytes(path: str, writer) -> None:
    try:
        with open(path, "wb") as fh:
            writer(fh)
    except OSError as e:
        raise DataError(f"cannot write {path}: {e}") from e


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    # Accept both a quoted glob and a shell-expanded file list.
    matched = set()
    for pat in args.frames:
        hits = glob.glob(pat)
        matched.update(hits if hits else ([pat] if os.path.exists(pat) else []))
    paths = sorted(matched)
    if len(paths) < 2:
        raise DataError(f"frame pattern {' '.join(args.frames)!r} matched "
                        f"{len(paths)} files, need at least 2")
    frames = FrameSequence(tuple(load_pgm(_read_bytes(p)) for p in paths),
                           cfg.frame_dt)
    path, dumps = run_simulation(frames, cfg)
    if args.saccade_threshold is not None:
        path = detect_saccades(path, args.saccade_threshold, args.min_fixation)

    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "scanpath.csv")
    _write_bytes(csv_path, lambda fh: export_scanpath(path, fh))
    for d in dumps:
        for name, field in (("mass", d.mass), ("potential", d.potential),
                            ("ior", d.ior)):
            out = os.path.join(args.out, f"{name}_{d.frame_index:06d}.foaf")
            _write_bytes(out, lambda fh, f=field: export_field(f, fh))
    print(f"{csv_path}: {len(path)} samples over "
          f"{(len(frames) - 1) * cfg.frame_dt:g} s")
    if dumps:
        print(f"{3 * len(dumps)} field dumps in {args.out}")
    return 0


def _cmd_flow(args) -> int:
    cfg = load_config(args.config)
    sigma = schedule_sigma(cfg.blur, 0.0)
    a = gaussian_blur(load_pgm(_read_bytes(args.frame_a)), sigma)
    b = gaussian_blur(load_pgm(_read_bytes(args.frame_b)), sigma)
    v = horn_schunck(a, b, cfg.frame_dt, cfg.hs)
    _write_bytes(args.out, lambda fh: export_flow(v, fh))
    speed = magnitude(v)
    print(f"{args.out}: {a.width}x{a.height} flow, "
          f"mean speed {float(speed.values.mean()):.6g} px/s")
    return 0


def _cmd_poisson(args) -> int:
    mu = read_field(io.BytesIO(_read_bytes(args.source)))
    if args.oracle:
        u = direct_potential(mu, args.h)
    else:
        u = poisson_solve(mu, h=args.h, tol=args.tol, max_iters=args.max_iters)
    _write_bytes(args.out, lambda fh: export_field(u, fh))
    print(f"{args.out}: potential for {mu.width}x{mu.height} source"
          + (" (dense oracle)" if args.oracle else ""))
    return 0


def _cmd_converge(args) -> int:
    mu = read_field(io.BytesIO(_read_bytes(args.source)))
    try:
        cs = [float(p) for p in args.c.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"--c expects comma-separated numbers, got {args.c!r}") from None
    if not cs:
        raise ConfigError("--c needs at least one speed")
    mode = _MODES.get(args.mode)
    if mode is None:
        raise ConfigError(f"--mode must be one of {sorted(_MODES)}, got {args.mode!r}")
    dt = args.dt
    if dt is None:
        c_max = max(cs)
        if mode is Mode.HEAT:
            dt = 0.9 * args.h * args.h * args.drag / (4.0 * c_max * c_max)
        else:
            dt = 0.9 * args.h / (math.sqrt(2.0) * c_max
                                 * max(1.0, 1.0 / math.sqrt(args.gamma)))
    base = TelegraphParams(gamma=args.gamma, lambda_drag=args.drag, c=max(cs),
                           h=args.h, dt=dt, mode=mode)
    errors = convergence_in_c(mu, cs, args.horizon, base)
    for c, err in zip(cs, errors):
        print(f"c={c:g} relative_gradient_error={err:.6g}")
    return 0


def _cmd_synth(args) -> int:
    w, h, n = args.width, args.height, args.frames
    if args.kind == "black":
        frames = synth.black_frames(w, h, n)
    elif args.kind == "two-blobs":
        frames = synth.static_frames(
            synth.two_blob_image(w, h, args.blob_sigma, args.amp), n)
    else:
        frames = synth.moving_blob_frames(
            w, h, n, (w / 4.0, h / 2.0), (args.speed, 0.0), args.frame_dt,
            args.blob_sigma, args.amp)
    frames = synth.add_noise(frames, args.noise, args.seed)
    os.makedirs(args.out, exist_ok=True)
    for k, f in enumerate(frames):
        _write_bytes(os.path.join(args.out, f"frame_{k:04d}.pgm"),
                     lambda fh, f=f: fh.write(save_pgm(f, args.maxval)))
    print(f"{len(frames)} {args.kind} frames ({w}x{h}) in {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gazefield",
        description="Scanpath simulation driven by attention potential fields.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the full pipeline over a frame sequence")
    p.add_argument("config", help="path to a key = value config file")
    p.add_argument("frames", nargs="+",
                   help="glob or file list for PGM frames, sorted lexically")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--saccade-threshold", type=float, default=None,
                   help="annotate saccades above this speed (px/s) before export")
    p.add_argument("--min-fixation", type=float, default=0.1,
                   help="fixations shorter than this (s) merge into saccades")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("flow", help="dense optical flow between two frames")
    p.add_argument("config")
    p.add_argument("frame_a")
    p.add_argument("frame_b")
    p.add_argument("--out", required=True, help="output flow file (two field records)")
    p.set_defaults(func=_cmd_flow)

    p = sub.add_parser("poisson", help="solve the elliptic potential for a mass field")
    p.add_argument("source", help="mass density field file")
    p.add_argument("--out", required=True)
    p.add_argument("--oracle", action="store_true",
                   help="use the dense log-kernel sum instead of relaxation")
    p.add_argument("--h", type=float, default=1.0, help="grid spacing")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iters", type=int, default=20000)
    p.set_defaults(func=_cmd_poisson)

    p = sub.add_parser("converge",
                       help="error of the evolved potential vs the elliptic limit per speed")
    p.add_argument("source", help="mass density field file")
    p.add_argument("--c", required=True, help="comma-separated wave speeds, ascending")
    p.add_argument("--mode", default="damped_wave")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--drag", type=float, default=4.0,
                   help="first-order damping coefficient")
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=None,
                   help="step size (default: 90%% of the stability bound)")
    p.add_argument("--horizon", type=float, default=30.0)
    p.set_defaults(func=_cmd_converge)

    p = sub.add_parser("synth", help="generate synthetic PGM test frames")
    p.add_argument("kind", choices=["black", "two-blobs", "moving-blob"])
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--frames", type=int, default=61)
    p.add_argument("--blob-sigma", type=float, default=3.0)
    p.add_argument("--amp", type=float, default=1.0)
    p.add_argument("--speed", type=float, default=6.0,
                   help="blob velocity in px/s (moving-blob)")
    p.add_argument("--frame-dt", type=float, default=1.0 / 30.0)
    p.add_argument("--noise", type=float, default=0.0,
                   help="uniform pixel noise amplitude")
    p.add_argument("--seed", type=int, default=0,
                   help="noise seed (generation only; the pipeline is deterministic)")
    p.add_argument("--maxval", type=int, default=255)
    p.set_defaults(func=_cmd_synth)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except NumericalError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except GazefieldError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
