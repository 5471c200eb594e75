"""Experiment configuration: a TOML file with dotted sections, lossless round-trip."""
from __future__ import annotations

import math

try:
    import tomllib
except ModuleNotFoundError:          # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, asdict

from .diagnostics import AuxiliaryConfig
from .model import ModelParams
from .timestepping import StepControl


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class InitialSpec:
    profile: str = "sine_halfwave"
    amplitude: float = 1.0
    velocity_profile: str = "zero"
    velocity_amplitude: float = 1.0


@dataclass(frozen=True)
class DiagnosticsSpec:
    epsilon: float = 1e-2
    auto_epsilon: bool = True
    fit_window: tuple[float, float] = (0.2, 0.9)
    space: str = "H1_Gamma0"

    def aux(self) -> AuxiliaryConfig:
        return AuxiliaryConfig(epsilon=self.epsilon, auto_epsilon=self.auto_epsilon)


@dataclass(frozen=True)
class PicardSpec:
    k_max: int = 8
    tol: float = 1e-9
    horizons: tuple[float, ...] = (0.02, 0.08, 0.32)


@dataclass(frozen=True)
class OracleSpec:
    n_modes: tuple[int, ...] = (2, 4, 6, 8)
    generator: str = "monomials"
    ode_tol: float = 1e-10


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = ModelParams(alpha=0.1, r=1.0, p=4.0, m=2.0)
    mesh_n: int = 128
    initial: InitialSpec = InitialSpec()
    step: StepControl = StepControl(dt=1e-3, t_end=1.0)
    diagnostics: DiagnosticsSpec = DiagnosticsSpec()
    kind: str = "run"
    seed: int = 0
    out_dir: str = "out"
    sweep: dict = field(default_factory=dict)        # param name -> list of values
    picard: PicardSpec = PicardSpec()
    oracle: OracleSpec = OracleSpec()


SWEEPABLE = ("amplitude", "alpha", "r", "p", "m")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ConfigError(f"non-finite float {value!r} cannot be serialized")
        return repr(value)
    if isinstance(value, int):
        return repr(value)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    raise ConfigError(f"cannot serialize {value!r}")


def to_toml(cfg: RunConfig) -> str:
    lines = []

    def section(name, pairs):
        lines.append(f"[{name}]")
        for key, val in pairs:
            lines.append(f"{key} = {_fmt(val)}")
        lines.append("")

    m = cfg.model
    section("model", [("alpha", m.alpha), ("r", m.r), ("p", m.p), ("m", m.m),
                      ("strict_theorem_mode", m.strict_theorem_mode),
                      ("source_enabled", m.source_enabled)])
    section("mesh", [("n_elem", cfg.mesh_n)])
    ini = cfg.initial
    section("initial", [("profile", ini.profile), ("amplitude", ini.amplitude),
                        ("velocity_profile", ini.velocity_profile),
                        ("velocity_amplitude", ini.velocity_amplitude)])
    s = cfg.step
    section("step", [("dt", s.dt), ("t_end", s.t_end), ("newton_tol", s.newton_tol),
                     ("newton_max_iter", s.newton_max_iter),
                     ("output_every", s.output_every),
                     ("blowup_guard", s.blowup_guard)])
    d = cfg.diagnostics
    section("diagnostics", [("epsilon", d.epsilon), ("auto_epsilon", d.auto_epsilon),
                            ("fit_window", list(d.fit_window)), ("space", d.space)])
    section("experiment", [("kind", cfg.kind), ("seed", cfg.seed)])
    section("output", [("dir", cfg.out_dir)])
    if cfg.sweep:
        section("sweep", [(k, list(v)) for k, v in cfg.sweep.items()])
    pc = cfg.picard
    section("picard", [("k_max", pc.k_max), ("tol", pc.tol),
                       ("horizons", list(pc.horizons))])
    oc = cfg.oracle
    section("oracle", [("n_modes", list(oc.n_modes)), ("generator", oc.generator),
                       ("ode_tol", oc.ode_tol)])
    return "\n".join(lines)


def _get(table: dict, section: str, key: str, kind, default=...):
    try:
        raw = table[section][key]
    except KeyError:
        if default is not ...:
            return default
        raise ConfigError(f"missing required field {section}.{key}") from None
    if kind is float and isinstance(raw, int) and not isinstance(raw, bool):
        raw = float(raw)
    if kind is not None and not isinstance(raw, kind):
        raise ConfigError(f"field {section}.{key} has wrong type "
                          f"({type(raw).__name__}, expected {kind.__name__})")
    return raw


def from_toml(text: str) -> RunConfig:
    try:
        table = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    model = ModelParams(
        alpha=_get(table, "model", "alpha", float),
        r=_get(table, "model", "r", float),
        p=_get(table, "model", "p", float),
        m=_get(table, "model", "m", float),
        strict_theorem_mode=_get(table, "model", "strict_theorem_mode", bool, False),
        source_enabled=_get(table, "model", "source_enabled", bool, True))
    step = StepControl(
        dt=_get(table, "step", "dt", float),
        t_end=_get(table, "step", "t_end", float),
        newton_tol=_get(table, "step", "newton_tol", float, 1e-10),
        newton_max_iter=_get(table, "step", "newton_max_iter", int, 25),
        output_every=_get(table, "step", "output_every", int, 1),
        blowup_guard=_get(table, "step", "blowup_guard", float, 1e8))
    initial = InitialSpec(
        profile=_get(table, "initial", "profile", str, "sine_halfwave"),
        amplitude=_get(table, "initial", "amplitude", float, 1.0),
        velocity_profile=_get(table, "initial", "velocity_profile", str, "zero"),
        velocity_amplitude=_get(table, "initial", "velocity_amplitude", float, 1.0))
    fit_window = _get(table, "diagnostics", "fit_window", list, [0.2, 0.9])
    diagnostics = DiagnosticsSpec(
        epsilon=_get(table, "diagnostics", "epsilon", float, 1e-2),
        auto_epsilon=_get(table, "diagnostics", "auto_epsilon", bool, True),
        fit_window=(float(fit_window[0]), float(fit_window[1])),
        space=_get(table, "diagnostics", "space", str, "H1_Gamma0"))

    sweep = {}
    for key, values in table.get("sweep", {}).items():
        if key not in SWEEPABLE:
            raise ConfigError(f"field sweep.{key} is not sweepable "
                              f"(allowed: {', '.join(SWEEPABLE)})")
        sweep[key] = [float(v) for v in values]

    picard = PicardSpec(
        k_max=_get(table, "picard", "k_max", int, 8),
        tol=_get(table, "picard", "tol", float, 1e-9),
        horizons=tuple(float(h) for h in _get(table, "picard", "horizons", list,
                                              [0.02, 0.08, 0.32])))
    oracle = OracleSpec(
        n_modes=tuple(int(n) for n in _get(table, "oracle", "n_modes", list, [2, 4, 6, 8])),
        generator=_get(table, "oracle", "generator", str, "monomials"),
        ode_tol=_get(table, "oracle", "ode_tol", float, 1e-10))

    return RunConfig(
        model=model, mesh_n=_get(table, "mesh", "n_elem", int),
        initial=initial, step=step, diagnostics=diagnostics,
        kind=_get(table, "experiment", "kind", str, "run"),
        seed=_get(table, "experiment", "seed", int, 0),
        out_dir=_get(table, "output", "dir", str, "out"),
        sweep=sweep, picard=picard, oracle=oracle)


def load(path) -> RunConfig:
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8")
    return from_toml(text)


def config_dict(cfg: RunConfig) -> dict:
    """JSON-friendly echo of a config (for manifests)."""
    return asdict(cfg)
