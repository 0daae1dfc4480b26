"""Run configuration: a flat ``section.key = value`` text format.

Lines starting with ``#`` and blank lines are ignored. Every key must be one
of the documented fields below; values are re-validated against the types
they configure when the file is parsed.

==========================  =======================  =====================================
key                         default                  meaning
==========================  =======================  =====================================
grid.n                      64                       3D points per axis (even, >= 8)
grid.L                      300                      3D box half-extent
radial.nr                   6000                     radial cells
radial.rmax                 600                      radial ball radius
physics.p                   8/3                      Slater exponent, in (18/7, 3]
solver.tol                  1e-6                     residual tolerance
solver.max_iter             20000                    iteration cap
solver.step0                0.1                      initial step
solver.backtrack            0.5                      step reduction factor
solver.armijo               1e-4                     sufficient-decrease constant
solver.max_rejections       20                       backtracks before a step reset
solver.precondition         true                     Sobolev preconditioning
solver.seed                 0                        seed for randomized inputs
sweep.rho_sq_min            100/2048                 smallest mass
sweep.rho_sq_max            100                      largest mass
sweep.factor                sqrt(2)                  geometric mass ratio
sweep.grid_rho_sq_max       0.3                      3D grid runs up to this mass
sweep.grid_max_iter         300                      iteration cap of 3D sweep runs
sweep.starts                radial,twobump,pair      3D start names
init.sigma                  0                        start width (0: automatic)
init.separation             0                        two-bump distance (0: automatic)
init.annulus_R1             1.0                      shell radius scale, R = R1 rho^4
init.annulus_w1             0.5                      shell width scale, w = w1 rho^2
verify.pairs                10                       random pairs for gradcheck
verify.rearrange_n          96                       grid size of the rearrangement test
io.out_dir                  out                      output directory
==========================  =======================  =====================================
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .analysis import GRID_STARTS, SweepSettings, geometric_rho_sq
from .energy import check_exponent
from .errors import ConfigError
from .fields import Grid3, RadialGrid
from .optimize import MinimizeOptions

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass(frozen=True)
class RunConfig:
    grid_n: int = 64
    grid_L: float = 300.0
    radial_nr: int = 6000
    radial_rmax: float = 600.0
    physics_p: float = 8.0 / 3.0
    solver_tol: float = 1e-6
    solver_max_iter: int = 20000
    solver_step0: float = 0.1
    solver_backtrack: float = 0.5
    solver_armijo: float = 1e-4
    solver_max_rejections: int = 20
    solver_precondition: bool = True
    solver_seed: int = 0
    sweep_rho_sq_min: float = 100.0 / 2048.0
    sweep_rho_sq_max: float = 100.0
    sweep_factor: float = math.sqrt(2.0)
    sweep_grid_rho_sq_max: float = 0.3
    sweep_grid_max_iter: int = 300
    sweep_starts: tuple[str, ...] = ("radial", "twobump", "pair")
    init_sigma: float = 0.0
    init_separation: float = 0.0
    init_annulus_R1: float = 1.0
    init_annulus_w1: float = 0.5
    verify_pairs: int = 10
    verify_rearrange_n: int = 96
    io_out_dir: str = "out"

    def __post_init__(self):
        try:
            self.grid()
            self.radial_grid()
            check_exponent(self.physics_p)
            self.options()
            geometric_rho_sq(self.sweep_rho_sq_min, self.sweep_rho_sq_max, self.sweep_factor)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        bad = [s for s in self.sweep_starts if s not in GRID_STARTS]
        if bad or not self.sweep_starts:
            raise ConfigError(f"sweep.starts must be a nonempty subset of {GRID_STARTS}, got {self.sweep_starts}")
        if self.sweep_grid_max_iter < 0 or self.verify_pairs < 1:
            raise ConfigError("sweep.grid_max_iter must be >= 0 and verify.pairs >= 1")
        if self.verify_rearrange_n < 8 or self.verify_rearrange_n % 2:
            raise ConfigError("verify.rearrange_n must be even and >= 8")
        if min(self.init_sigma, self.init_separation) < 0:
            raise ConfigError("init.sigma and init.separation must be >= 0")
        if self.init_annulus_R1 <= 0 or self.init_annulus_w1 <= 0:
            raise ConfigError("annulus scales must be positive")

    def grid(self) -> Grid3:
        return Grid3(self.grid_n, self.grid_L)

    def radial_grid(self) -> RadialGrid:
        return RadialGrid(self.radial_nr, self.radial_rmax)

    def options(self) -> MinimizeOptions:
        return MinimizeOptions(max_iter=self.solver_max_iter, tol=self.solver_tol,
                               step0=self.solver_step0, backtrack=self.solver_backtrack,
                               armijo=self.solver_armijo, seed=self.solver_seed,
                               precondition=self.solver_precondition,
                               max_rejections=self.solver_max_rejections)

    def sweep_settings(self) -> SweepSettings:
        return SweepSettings(nr=self.radial_nr, rmax=self.radial_rmax, grid_n=self.grid_n,
                             grid_L=self.grid_L, grid_rho_sq_max=self.sweep_grid_rho_sq_max,
                             grid_max_iter=self.sweep_grid_max_iter)

    def rho_values(self) -> list[float]:
        return [math.sqrt(m) for m in geometric_rho_sq(self.sweep_rho_sq_min, self.sweep_rho_sq_max,
                                                       self.sweep_factor)]

    def items(self) -> list[tuple[str, str]]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            key = f.name.replace("_", ".", 1)
            if isinstance(v, tuple):
                v = ",".join(v)
            elif isinstance(v, bool):
                v = str(v).lower()
            elif isinstance(v, float):
                v = repr(v)
            out.append((key, str(v)))
        return out


KEYS = {f.name.replace("_", ".", 1): f for f in fields(RunConfig)}


def _convert(key: str, raw: str):
    f = KEYS[key]
    default = f.default
    try:
        if isinstance(default, bool):
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            return tuple(s.strip() for s in raw.split(",") if s.strip())
        return raw
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse ``key = value`` lines on top of ``base`` (defaults if omitted)."""
    updates = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        updates[KEYS[key].name] = _convert(key, raw)
    return replace(base or RunConfig(), **updates)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def format_config(cfg: RunConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in cfg.items())
