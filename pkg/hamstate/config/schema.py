# -*- coding: utf-8 -*-

"""
Typed, validated view of a merged configuration mapping.

Every section becomes a frozen dataclass. Validation errors are
:class:`~hamstate.exc.ConfigError` naming the dotted path of the key.
"""

import typing as T
import dataclasses
import enum

import numpy as np

from ..discretization import SpatialGrid
from ..exc import make_config_error
from ..highfidelity import TimeGrid, NEWTON_TOL, MAX_NEWTON
from ..models import DEFAULT_BOXES, ModelKind, ModelSpec, ParameterGrid
from ..observation import SensorArray
from ..pbdw import BETA_MIN
from ..placement import PlacementConfig

_MISSING = object()


class Mode(str, enum.Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"


class SensorLayout(str, enum.Enum):
    EXPLICIT = "explicit"
    EQUISPACED = "equispaced"
    RANDOM = "random"


class _Section:
    """
    Reader of one table that checks types and rejects unknown keys.
    """

    def __init__(self, path: str, data: T.Any):
        if not isinstance(data, dict):
            raise make_config_error(path, f"must be a table, got {type(data).__name__}")
        self.path = path
        self.data = data
        self.seen = set()

    def _key_path(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def _raw(self, key: str, default: T.Any) -> T.Any:
        self.seen.add(key)
        if key in self.data:
            return self.data[key]
        if default is _MISSING:
            raise make_config_error(self._key_path(key), "is required")
        return default

    def number(self, key: str, default: T.Any = _MISSING) -> float:
        value = self._raw(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise make_config_error(self._key_path(key), f"must be a number, got {value!r}")
        if not np.isfinite(value):
            raise make_config_error(self._key_path(key), f"must be finite, got {value!r}")
        return float(value)

    def integer(self, key: str, default: T.Any = _MISSING) -> int:
        value = self._raw(key, default)
        if isinstance(value, bool) or not isinstance(value, int):
            raise make_config_error(self._key_path(key), f"must be an integer, got {value!r}")
        return value

    def optional_int(self, key: str) -> T.Optional[int]:
        if key not in self.data:
            self.seen.add(key)
            return None
        return self.integer(key)

    def flag(self, key: str, default: T.Any = _MISSING) -> bool:
        value = self._raw(key, default)
        if not isinstance(value, bool):
            raise make_config_error(self._key_path(key), f"must be true or false, got {value!r}")
        return value

    def text(self, key: str, default: T.Any = _MISSING) -> str:
        value = self._raw(key, default)
        if not isinstance(value, str):
            raise make_config_error(self._key_path(key), f"must be a string, got {value!r}")
        return value

    def choice(self, key: str, enum_cls: T.Type[enum.Enum], default: T.Any = _MISSING):
        value = self.text(key, default)
        try:
            return enum_cls(value)
        except ValueError:
            allowed = ", ".join(e.value for e in enum_cls)
            raise make_config_error(
                self._key_path(key), f"must be one of {allowed}, got {value!r}"
            )

    def array(
        self,
        key: str,
        ndim: int,
        default: T.Any = _MISSING,
        width: T.Optional[int] = None,
    ) -> np.ndarray:
        """
        A numeric array of the given rank; ``width`` fixes the row length.
        """
        value = self._raw(key, default)
        try:
            arr = np.array(value, dtype=float)
        except (TypeError, ValueError):
            raise make_config_error(self._key_path(key), f"must be a numeric array, got {value!r}")
        if ndim == 2 and arr.ndim == 1 and arr.size == 0:
            arr = arr.reshape(0, width or 0)
        if arr.ndim != ndim or (width is not None and arr.ndim == 2 and arr.shape[1] != width):
            raise make_config_error(
                self._key_path(key),
                f"must be a {ndim}D array"
                + (f" with rows of length {width}" if width else "")
                + f", got shape {arr.shape}",
            )
        if not np.all(np.isfinite(arr)):
            raise make_config_error(self._key_path(key), "must contain finite numbers only")
        return arr

    def section(self, key: str) -> "_Section":
        return _Section(self._key_path(key), self._raw(key, {}))

    def done(self) -> None:
        unknown = sorted(set(self.data) - self.seen)
        if unknown:
            raise make_config_error(
                self._key_path(unknown[0]),
                f"unknown key (allowed: {', '.join(sorted(self.seen))})",
            )


def _positive(path: str, value: float) -> None:
    if not value > 0:
        raise make_config_error(path, f"must be positive, got {value}")


@dataclasses.dataclass(frozen=True)
class ModelConfig:
    kind: ModelKind
    n_x: int
    half_extent: float
    n_y: T.Optional[int] = None
    box: T.Optional[T.Tuple[T.Tuple[float, float], T.Tuple[float, float]]] = None

    @classmethod
    def from_section(cls, sec: _Section) -> "ModelConfig":
        kind = sec.choice("kind", ModelKind)
        n_x = sec.integer("n_x")
        n_y = sec.optional_int("n_y")
        half_extent = sec.number("half_extent")
        box_arr = sec.array("box", 2, default=None, width=2) if "box" in sec.data else None
        sec.seen.add("box")
        sec.done()
        if n_x < 2:
            raise make_config_error(f"{sec.path}.n_x", f"must be >= 2, got {n_x}")
        if n_y is not None and kind is not ModelKind.SWE2D:
            raise make_config_error(f"{sec.path}.n_y", f"only applies to swe2d, not {kind.value}")
        _positive(f"{sec.path}.half_extent", half_extent)
        box = None
        if box_arr is not None:
            if box_arr.shape != (2, 2) or np.any(box_arr[:, 0] >= box_arr[:, 1]):
                raise make_config_error(
                    f"{sec.path}.box", "must be [[lo_1, hi_1], [lo_2, hi_2]] with lo < hi"
                )
            box = tuple((float(lo), float(hi)) for lo, hi in box_arr)
        return cls(kind=kind, n_x=n_x, half_extent=half_extent, n_y=n_y, box=box)

    def spec(self) -> ModelSpec:
        box = self.box or DEFAULT_BOXES[self.kind]
        if self.kind is ModelKind.NLS1D:
            return ModelSpec.nls1d(self.n_x, self.half_extent, box)
        if self.kind is ModelKind.SWE1D:
            return ModelSpec.swe1d(self.n_x, self.half_extent, box)
        return ModelSpec.swe2d(self.n_x, self.n_y, self.half_extent, box)


@dataclasses.dataclass(frozen=True)
class TimeConfig:
    t_final: float
    n_steps: int
    stride: int = 10
    newton_tol: float = NEWTON_TOL
    max_newton: int = MAX_NEWTON

    @classmethod
    def from_section(cls, sec: _Section) -> "TimeConfig":
        out = cls(
            t_final=sec.number("t_final"),
            n_steps=sec.integer("n_steps"),
            stride=sec.integer("stride", 10),
            newton_tol=sec.number("newton_tol", NEWTON_TOL),
            max_newton=sec.integer("max_newton", MAX_NEWTON),
        )
        sec.done()
        _positive(f"{sec.path}.t_final", out.t_final)
        _positive(f"{sec.path}.newton_tol", out.newton_tol)
        if out.n_steps < 1:
            raise make_config_error(f"{sec.path}.n_steps", f"must be >= 1, got {out.n_steps}")
        if out.stride < 1 or out.n_steps % out.stride != 0:
            raise make_config_error(
                f"{sec.path}.stride",
                f"must be >= 1 and divide n_steps = {out.n_steps}, got {out.stride}",
            )
        if out.max_newton < 1:
            raise make_config_error(f"{sec.path}.max_newton", f"must be >= 1, got {out.max_newton}")
        return out

    def time_grid(self) -> TimeGrid:
        return TimeGrid(t_final=self.t_final, n_steps=self.n_steps)


@dataclasses.dataclass(frozen=True)
class ReducedConfig:
    """
    :param n: half the dimension of the approximation space
    :param k_h: training parameters per axis, ``|Theta_h| = k_h^2``
    :param k_s: test parameters per axis, ``|Theta_s| = k_s^2``
    :param substeps: reduced steps per high-fidelity step
    """

    n: int
    k_h: int
    k_s: int
    substeps: int = 1

    @classmethod
    def from_section(cls, sec: _Section) -> "ReducedConfig":
        out = cls(
            n=sec.integer("n"),
            k_h=sec.integer("k_h"),
            k_s=sec.integer("k_s"),
            substeps=sec.integer("substeps", 1),
        )
        sec.done()
        for key in ("n", "k_h", "k_s", "substeps"):
            if getattr(out, key) < 1:
                raise make_config_error(f"{sec.path}.{key}", f"must be >= 1, got {getattr(out, key)}")
        return out


@dataclasses.dataclass(frozen=True, eq=False)
class ObservationConfig:
    """
    Initial sensor layout and measurement noise.

    ``explicit`` reads ``positions``; ``equispaced`` puts ``count`` sensors on
    ``[lo, hi]`` (1D only); ``random`` draws ``count`` sensors uniformly in
    ``[lo, hi]^d`` with ``layout_seed``.
    """

    sigma: float
    layout: SensorLayout = SensorLayout.EXPLICIT
    positions: T.Optional[np.ndarray] = None
    count: T.Optional[int] = None
    lo: float = 0.0
    hi: float = 0.0
    layout_seed: int = 0
    noise: float = 0.0

    @classmethod
    def from_section(cls, sec: _Section) -> "ObservationConfig":
        sigma = sec.number("sigma")
        layout = sec.choice("layout", SensorLayout, SensorLayout.EXPLICIT.value)
        positions = None
        if layout is SensorLayout.EXPLICIT:
            ndim = 1 if _is_flat(sec.data.get("positions")) else 2
            positions = sec.array("positions", ndim)
        sec.seen.add("positions")
        out = cls(
            sigma=sigma,
            layout=layout,
            positions=positions,
            count=sec.optional_int("count"),
            lo=sec.number("lo", 0.0),
            hi=sec.number("hi", 0.0),
            layout_seed=sec.integer("layout_seed", 0),
            noise=sec.number("noise", 0.0),
        )
        sec.done()
        _positive(f"{sec.path}.sigma", sigma)
        if out.noise < 0:
            raise make_config_error(f"{sec.path}.noise", f"must be >= 0, got {out.noise}")
        if layout is not SensorLayout.EXPLICIT:
            if out.count is None or out.count < 1:
                raise make_config_error(f"{sec.path}.count", f"must be >= 1 for layout {layout.value}")
            if not out.lo < out.hi:
                raise make_config_error(f"{sec.path}.hi", f"must exceed lo = {out.lo}, got {out.hi}")
        elif positions is None or positions.size == 0:
            raise make_config_error(f"{sec.path}.positions", "must list at least one sensor")
        return out

    def sensors(self, grid: SpatialGrid) -> SensorArray:
        if self.layout is SensorLayout.EXPLICIT:
            positions = self.positions
            if positions.ndim == 1:
                positions = positions[:, None]
            if positions.shape[1] != grid.dim:
                raise make_config_error(
                    "observation.positions",
                    f"sensors must have {grid.dim} coordinates, got {positions.shape[1]}",
                )
        elif self.layout is SensorLayout.EQUISPACED:
            if grid.dim != 1:
                raise make_config_error("observation.layout", "equispaced layout is 1D only")
            positions = np.linspace(self.lo, self.hi, self.count)[:, None]
        else:
            rng = np.random.default_rng(self.layout_seed)
            positions = rng.uniform(self.lo, self.hi, size=(self.count, grid.dim))
        return SensorArray(positions=positions, sigma=self.sigma)


def _is_flat(value: T.Any) -> bool:
    return isinstance(value, list) and all(not isinstance(v, list) for v in value)


def _placement_from_section(sec: _Section) -> PlacementConfig:
    defaults = PlacementConfig()
    kwargs = {}
    for field in dataclasses.fields(PlacementConfig):
        default = getattr(defaults, field.name)
        if isinstance(default, int):
            kwargs[field.name] = sec.integer(field.name, default)
        else:
            kwargs[field.name] = sec.number(field.name, default)
    sec.done()
    return PlacementConfig(**kwargs)


@dataclasses.dataclass(frozen=True, eq=False)
class TransportConfig:
    """
    Pure transport scenario with an analytic solution.
    """

    half_extent: float = 40.0
    n_x: int = 1600
    sigma: float = 0.5
    positions: np.ndarray = dataclasses.field(
        default_factory=lambda: np.array([-1.5, -0.5, 0.5, 1.5])
    )
    snapshot_thetas: np.ndarray = dataclasses.field(
        default_factory=lambda: np.array([[0.8, 1.0], [1.0, 1.1]])
    )
    test_thetas: np.ndarray = dataclasses.field(
        default_factory=lambda: np.array([[0.9, 1.05]])
    )
    t_final: float = 20.0
    n_times: int = 200

    @classmethod
    def from_section(cls, sec: _Section) -> "TransportConfig":
        d = cls()
        out = cls(
            half_extent=sec.number("half_extent", d.half_extent),
            n_x=sec.integer("n_x", d.n_x),
            sigma=sec.number("sigma", d.sigma),
            positions=sec.array("positions", 1, d.positions),
            snapshot_thetas=sec.array("snapshot_thetas", 2, d.snapshot_thetas, width=2),
            test_thetas=sec.array("test_thetas", 2, d.test_thetas, width=2),
            t_final=sec.number("t_final", d.t_final),
            n_times=sec.integer("n_times", d.n_times),
        )
        sec.done()
        for key in ("half_extent", "sigma", "t_final"):
            _positive(f"{sec.path}.{key}", getattr(out, key))
        if out.n_x < 2:
            raise make_config_error(f"{sec.path}.n_x", f"must be >= 2, got {out.n_x}")
        if out.n_times < 2:
            raise make_config_error(f"{sec.path}.n_times", f"must be >= 2, got {out.n_times}")
        for key in ("snapshot_thetas", "test_thetas"):
            thetas = getattr(out, key)
            if thetas.shape[0] < 1 or np.any(thetas[:, 0] <= 0):
                raise make_config_error(
                    f"{sec.path}.{key}", "needs at least one row and positive widths"
                )
        if out.positions.size < out.snapshot_thetas.shape[0]:
            raise make_config_error(
                f"{sec.path}.positions",
                "needs at least as many sensors as snapshots",
            )
        return out

    def grid(self) -> SpatialGrid:
        return SpatialGrid.uniform_1d(self.half_extent, self.n_x)

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_final, self.n_times)


@dataclasses.dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """
    Everything one assimilation run needs.

    :param true_thetas: when non-empty, replaces the test grid ``Theta_s``
    :param figure_thetas: extra single parameters reported in their own CSV
        file and left out of the maxima
    :param trace: write the per-iteration ascent trace
    :param dump_basis_every: write the basis every that many assimilation
        times (0 disables)
    :param workers: threads used for the test parameter sweep and the truth
        trajectories
    """

    model: ModelConfig
    time: TimeConfig
    reduced: ReducedConfig
    observation: ObservationConfig
    placement: PlacementConfig
    transport: TransportConfig
    mode: Mode = Mode.DYNAMIC
    seed: int = 0
    out_dir: str = "output"
    true_thetas: np.ndarray = dataclasses.field(default_factory=lambda: np.zeros((0, 2)))
    figure_thetas: np.ndarray = dataclasses.field(default_factory=lambda: np.zeros((0, 2)))
    beta_min: float = BETA_MIN
    include_w_correction: bool = False
    trace: bool = False
    dump_basis_every: int = 0
    workers: int = 1

    @classmethod
    def from_mapping(cls, data: T.Dict[str, T.Any]) -> "ExperimentConfig":
        root = _Section("", data)
        model = ModelConfig.from_section(root.section("model"))
        time = TimeConfig.from_section(root.section("time"))
        reduced = ReducedConfig.from_section(root.section("reduced"))
        observation = ObservationConfig.from_section(root.section("observation"))
        placement = _placement_from_section(root.section("placement"))
        transport = TransportConfig.from_section(root.section("transport"))

        exp = root.section("experiment")
        out = cls(
            model=model,
            time=time,
            reduced=reduced,
            observation=observation,
            placement=placement,
            transport=transport,
            mode=exp.choice("mode", Mode, Mode.DYNAMIC.value),
            seed=exp.integer("seed", 0),
            out_dir=exp.text("out_dir", "output"),
            true_thetas=exp.array("true_thetas", 2, [], width=2),
            figure_thetas=exp.array("figure_thetas", 2, [], width=2),
            beta_min=exp.number("beta_min", BETA_MIN),
            include_w_correction=exp.flag("include_w_correction", False),
            trace=exp.flag("trace", False),
            dump_basis_every=exp.integer("dump_basis_every", 0),
            workers=exp.integer("workers", 1),
        )
        exp.done()
        root.done()
        out._validate()
        return out

    def _validate(self) -> None:
        spec = self.model_spec()
        for key in ("true_thetas", "figure_thetas"):
            for theta in getattr(self, key):
                if not spec.contains(theta):
                    raise make_config_error(
                        f"experiment.{key}",
                        f"{tuple(theta)} is outside the parameter box {spec.parameter_box}",
                    )
        if len(self.true_thetas) == 0 and self.parameter_grid().overlapping():
            raise make_config_error(
                "reduced.k_s",
                f"the test grid ({self.reduced.k_s} per axis) intersects the "
                f"training grid ({self.reduced.k_h} per axis)",
            )
        if self.reduced.n > self.reduced.k_h**2:
            raise make_config_error(
                "reduced.n",
                f"n = {self.reduced.n} exceeds the {self.reduced.k_h**2} training parameters",
            )
        sensors = self.observation.sensors(spec.grid)
        if 2 * self.reduced.n > 2 * sensors.m:
            raise make_config_error(
                "reduced.n",
                f"2n = {2 * self.reduced.n} exceeds 2m = {2 * sensors.m} measurements",
            )
        if self.dump_basis_every < 0:
            raise make_config_error(
                "experiment.dump_basis_every", f"must be >= 0, got {self.dump_basis_every}"
            )
        if self.workers < 1:
            raise make_config_error("experiment.workers", f"must be >= 1, got {self.workers}")
        if not self.beta_min >= 0:
            raise make_config_error("experiment.beta_min", f"must be >= 0, got {self.beta_min}")

    def model_spec(self) -> ModelSpec:
        return self.model.spec()

    def parameter_grid(self) -> ParameterGrid:
        box = self.model.box or DEFAULT_BOXES[self.model.kind]
        return ParameterGrid.uniform(box, self.reduced.k_h, self.reduced.k_s)

    def test_thetas(self) -> np.ndarray:
        if len(self.true_thetas):
            return self.true_thetas
        return self.parameter_grid().theta_s

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


@dataclasses.dataclass(frozen=True, eq=False)
class TransportRunConfig:
    """
    The sections the transport scenario reads.
    """

    transport: TransportConfig
    placement: PlacementConfig

    @classmethod
    def from_mapping(cls, data: T.Dict[str, T.Any]) -> "TransportRunConfig":
        root = _Section("", data)
        return cls(
            transport=TransportConfig.from_section(root.section("transport")),
            placement=_placement_from_section(root.section("placement")),
        )
