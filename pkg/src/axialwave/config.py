"""Run configuration for the command-line harness.

One structured-text (TOML) file describes one run.  Sections:

  [run]        study = "evolve" | "verify" | "decay" | "converge" |
               "normalize-kerr"; plus out, scheme, seed
  [grid]       mass, r_star_min, r_star_max, spacing (all required)
  [time]       t_final (required), and at most one of dt / cfl
  [[modes]]    spin, ell, kind, plus the initial-data parameters
  [coupled]    beta1_c1, residual_times, [[coupled.alpha]], [[coupled.beta]]
  [output]     snapshots, slice_taus, families
  [foliation]  null_margin, blend
  [redshift]   r0, R0, delta1, delta2
  [morawetz]   windows
  [converge]   spacings (exactly three, nested refinement)
  [kerr]       c1, c2, drift_t_final
  [verify]     spin2_numerator, post_numerator, with_quadrature

Unknown sections or keys are rejected so a typo fails loudly instead of
silently falling back to a default.  The parsed dictionary is kept verbatim
on the config (raw), and its canonical-JSON hash identifies the run in every
manifest; parsing the raw dictionary again reproduces the config exactly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

try:
    import tomllib as tomli
except ModuleNotFoundError:  # Python < 3.11
    import tomli

STUDIES = ("evolve", "verify", "decay", "converge", "normalize-kerr")
FAMILIES = ("sigma", "tilde")
DATA_KINDS = ("gaussian-bump", "static-beta1")
VELOCITIES = ("time-symmetric", "outgoing", "ingoing")


class ConfigError(ValueError):
    """The configuration cannot drive a run (exit code 2 at the CLI)."""


def config_sha256(raw: dict) -> str:
    """Canonical hash of the parsed configuration dictionary."""
    return hashlib.sha256(
        json.dumps(raw, sort_keys=True).encode("utf-8")
    ).hexdigest()


# ---------------------------------------------------------------------------
# section records


@dataclass(frozen=True)
class GridSpec:
    mass: float
    r_star_min: float
    r_star_max: float
    spacing: float


@dataclass(frozen=True)
class TimeSpec:
    t_final: float
    dt: float | None
    cfl: float


@dataclass(frozen=True)
class ModeSpec:
    spin: int
    ell: int
    kind: str
    params: dict  # passed through to the initial-data factory


@dataclass(frozen=True)
class ProfileSpec:
    ell: int
    params: dict  # center / sigma / amplitude of one coupled seed profile


@dataclass(frozen=True)
class CoupledSpec:
    alpha: tuple
    beta: tuple
    beta1_c1: float
    residual_times: tuple


@dataclass(frozen=True)
class OutputSpec:
    snapshots: tuple | None
    slice_taus: tuple
    families: tuple


@dataclass(frozen=True)
class FoliationSpec:
    null_margin: float
    blend: tuple


@dataclass(frozen=True)
class RedshiftSpec:
    r0: float | None
    R0: float | None
    delta1: float
    delta2: float


@dataclass(frozen=True)
class MorawetzSpec:
    windows: tuple


@dataclass(frozen=True)
class ConvergeSpec:
    spacings: tuple


@dataclass(frozen=True)
class KerrSpec:
    c1: float
    c2: float
    drift_t_final: float


@dataclass(frozen=True)
class VerifySpec:
    spin2_numerator: tuple | None
    post_numerator: tuple | None
    with_quadrature: bool


@dataclass(frozen=True)
class RunConfig:
    study: str
    out: str | None
    scheme: int
    seed: int
    grid: GridSpec | None
    time: TimeSpec | None
    modes: tuple
    coupled: CoupledSpec | None
    output: OutputSpec
    foliation: FoliationSpec
    redshift: RedshiftSpec
    morawetz: MorawetzSpec | None
    converge: ConvergeSpec | None
    kerr: KerrSpec
    verify: VerifySpec
    raw: dict
    sha256: str


# ---------------------------------------------------------------------------
# strict table access


def _check_keys(section: str, table: dict, required=(), optional=()) -> None:
    for key in required:
        if key not in table:
            raise ConfigError("[%s] is missing required key %r" % (section, key))
    allowed = set(required) | set(optional)
    for key in table:
        if key not in allowed:
            raise ConfigError("[%s] has unknown key %r" % (section, key))


def _num(section: str, table: dict, key: str, default=None, *, positive=False):
    if key not in table:
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("[%s] %s must be a number" % (section, key))
    value = float(value)
    if positive and value <= 0.0:
        raise ConfigError("[%s] %s must be positive" % (section, key))
    return value


def _int(section: str, table: dict, key: str, default=None, *, choices=None):
    if key not in table:
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError("[%s] %s must be an integer" % (section, key))
    if choices is not None and value not in choices:
        raise ConfigError(
            "[%s] %s must be one of %s" % (section, key, sorted(choices))
        )
    return value


def _numbers(section: str, table: dict, key: str, default=None):
    if key not in table:
        return default
    value = table[key]
    if not isinstance(value, list) or any(
        isinstance(v, bool) or not isinstance(v, (int, float)) for v in value
    ):
        raise ConfigError("[%s] %s must be a list of numbers" % (section, key))
    return tuple(float(v) for v in value)


# ---------------------------------------------------------------------------
# section parsers


def _parse_run(table: dict):
    _check_keys("run", table, required=("study",), optional=("out", "scheme", "seed"))
    study = table["study"]
    if study not in STUDIES:
        raise ConfigError(
            "[run] study must be one of %s, not %r" % ("/".join(STUDIES), study)
        )
    out = table.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError("[run] out must be a path string")
    scheme = _int("run", table, "scheme", 2, choices=(2, 4))
    seed = _int("run", table, "seed", 0)
    if seed < 0:
        raise ConfigError("[run] seed must be nonnegative")
    return study, out, scheme, seed


def _parse_grid(table: dict) -> GridSpec:
    _check_keys("grid", table, required=("mass", "r_star_min", "r_star_max", "spacing"))
    spec = GridSpec(
        mass=_num("grid", table, "mass", positive=True),
        r_star_min=_num("grid", table, "r_star_min"),
        r_star_max=_num("grid", table, "r_star_max"),
        spacing=_num("grid", table, "spacing", positive=True),
    )
    if spec.r_star_min >= spec.r_star_max:
        raise ConfigError("[grid] r_star_min must lie below r_star_max")
    _check_divisible("grid", spec.r_star_max - spec.r_star_min, spec.spacing)
    return spec


def _check_divisible(section: str, span: float, spacing: float) -> None:
    cells = round(span / spacing)
    if abs(cells * spacing - span) > 1e-9 * max(1.0, abs(span)):
        raise ConfigError(
            "[%s] window length %g is not a multiple of spacing %g"
            % (section, span, spacing)
        )


def _parse_time(table: dict) -> TimeSpec:
    _check_keys("time", table, required=("t_final",), optional=("dt", "cfl"))
    if "dt" in table and "cfl" in table:
        raise ConfigError("[time] give dt or cfl, not both")
    return TimeSpec(
        t_final=_num("time", table, "t_final", positive=True),
        dt=_num("time", table, "dt", None, positive=True),
        cfl=_num("time", table, "cfl", 0.5, positive=True),
    )


def _parse_mode(index: int, table: dict) -> ModeSpec:
    section = "modes[%d]" % index
    bump_keys = ("center", "sigma", "amplitude", "velocity")
    _check_keys(section, table, required=("spin", "ell", "kind"),
                optional=bump_keys + ("c1",))
    spin = _int(section, table, "spin", choices=(1, 2))
    ell = _int(section, table, "ell")
    if ell is None or ell < spin:
        raise ConfigError("[%s] needs ell >= spin" % section)
    kind = table["kind"]
    if kind not in DATA_KINDS:
        raise ConfigError(
            "[%s] kind must be one of %s" % (section, "/".join(DATA_KINDS))
        )
    params: dict = {}
    if kind == "gaussian-bump":
        if "c1" in table:
            raise ConfigError("[%s] c1 applies to static-beta1 data" % section)
        for key in ("center", "sigma", "amplitude"):
            value = _num(section, table, key, None, positive=(key == "sigma"))
            if value is not None:
                params[key] = value
        if "velocity" in table:
            if table["velocity"] not in VELOCITIES:
                raise ConfigError(
                    "[%s] velocity must be one of %s"
                    % (section, "/".join(VELOCITIES))
                )
            params["velocity"] = table["velocity"]
    else:
        if (spin, ell) != (1, 1):
            raise ConfigError("[%s] static-beta1 data requires spin 1, ell 1" % section)
        for key in bump_keys:
            if key in table:
                raise ConfigError("[%s] %s applies to gaussian-bump data" % (section, key))
        value = _num(section, table, "c1", None)
        if value is not None:
            params["c1"] = value
    return ModeSpec(spin=spin, ell=ell, kind=kind, params=params)


def _parse_profile(section: str, table: dict) -> ProfileSpec:
    _check_keys(section, table, required=("ell",),
                optional=("center", "sigma", "amplitude"))
    ell = _int(section, table, "ell")
    if ell is None or ell < 2:
        raise ConfigError(
            "[%s] needs ell >= 2 (lowest spin-1 content is seeded through"
            " beta1_c1)" % section
        )
    params = {}
    for key in ("center", "sigma", "amplitude"):
        value = _num(section, table, key, None, positive=(key == "sigma"))
        if value is not None:
            params[key] = value
    return ProfileSpec(ell=ell, params=params)


def _parse_coupled(table: dict) -> CoupledSpec:
    _check_keys("coupled", table,
                optional=("alpha", "beta", "beta1_c1", "residual_times"))
    for key in ("alpha", "beta"):
        entries = table.get(key, [])
        if not isinstance(entries, list) or any(
            not isinstance(e, dict) for e in entries
        ):
            raise ConfigError("[coupled] %s must be an array of tables" % key)
    alpha = tuple(
        _parse_profile("coupled.alpha[%d]" % i, entry)
        for i, entry in enumerate(table.get("alpha", []))
    )
    beta = tuple(
        _parse_profile("coupled.beta[%d]" % i, entry)
        for i, entry in enumerate(table.get("beta", []))
    )
    seen = set()
    for label, entries in (("alpha", alpha), ("beta", beta)):
        for spec in entries:
            if (label, spec.ell) in seen:
                raise ConfigError(
                    "[coupled] duplicate %s entry for ell=%d" % (label, spec.ell)
                )
            seen.add((label, spec.ell))
    beta1_c1 = _num("coupled", table, "beta1_c1", 0.0)
    residual_times = _numbers("coupled", table, "residual_times", ())
    if any(t < 0.0 for t in residual_times):
        raise ConfigError("[coupled] residual_times must be nonnegative")
    return CoupledSpec(
        alpha=alpha, beta=beta, beta1_c1=beta1_c1, residual_times=residual_times
    )


def _parse_output(table: dict) -> OutputSpec:
    _check_keys("output", table, optional=("snapshots", "slice_taus", "families"))
    snapshots = _numbers("output", table, "snapshots", None)
    slice_taus = _numbers("output", table, "slice_taus", ())
    if any(t < 0.0 for t in slice_taus):
        raise ConfigError("[output] slice_taus must be nonnegative")
    families = table.get("families", list(FAMILIES))
    if (
        not isinstance(families, list)
        or not families
        or any(f not in FAMILIES for f in families)
    ):
        raise ConfigError(
            "[output] families must be a nonempty subset of %s" % "/".join(FAMILIES)
        )
    return OutputSpec(
        snapshots=snapshots, slice_taus=slice_taus, families=tuple(families)
    )


def _parse_foliation(table: dict) -> FoliationSpec:
    _check_keys("foliation", table, optional=("null_margin", "blend"))
    blend = _numbers("foliation", table, "blend", (3.0, 20.0))
    if len(blend) != 2 or blend[0] >= blend[1]:
        raise ConfigError("[foliation] blend must be an ascending pair")
    return FoliationSpec(
        null_margin=_num("foliation", table, "null_margin", 4.0, positive=True),
        blend=blend,
    )


def _parse_redshift(table: dict) -> RedshiftSpec:
    _check_keys("redshift", table, optional=("r0", "R0", "delta1", "delta2"))
    spec = RedshiftSpec(
        r0=_num("redshift", table, "r0", None, positive=True),
        R0=_num("redshift", table, "R0", None, positive=True),
        delta1=_num("redshift", table, "delta1", -0.75),
        delta2=_num("redshift", table, "delta2", 0.15),
    )
    if spec.r0 is not None and spec.R0 is not None and spec.r0 >= spec.R0:
        raise ConfigError("[redshift] r0 must lie below R0")
    return spec


def _parse_morawetz(table: dict) -> MorawetzSpec:
    _check_keys("morawetz", table, required=("windows",))
    windows = table["windows"]
    if not isinstance(windows, list) or not windows:
        raise ConfigError("[morawetz] windows must be a nonempty list of pairs")
    parsed = []
    for i, window in enumerate(windows):
        if (
            not isinstance(window, list)
            or len(window) != 2
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in window)
        ):
            raise ConfigError("[morawetz] windows[%d] must be a number pair" % i)
        a, b = float(window[0]), float(window[1])
        if a < 0.0 or a >= b:
            raise ConfigError(
                "[morawetz] windows[%d] must satisfy 0 <= start < end" % i
            )
        parsed.append((a, b))
    return MorawetzSpec(windows=tuple(parsed))


def _parse_converge(table: dict) -> ConvergeSpec:
    _check_keys("converge", table, required=("spacings",))
    spacings = _numbers("converge", table, "spacings")
    if len(spacings) != 3 or any(h <= 0.0 for h in spacings):
        raise ConfigError("[converge] spacings must list exactly three positive steps")
    return ConvergeSpec(spacings=tuple(sorted(spacings, reverse=True)))


def _parse_kerr(table: dict) -> KerrSpec:
    _check_keys("kerr", table, optional=("c1", "c2", "drift_t_final"))
    drift = _num("kerr", table, "drift_t_final", 20.0)
    if drift < 0.0:
        raise ConfigError("[kerr] drift_t_final must be nonnegative (0 skips)")
    return KerrSpec(
        c1=_num("kerr", table, "c1", 3.0),
        c2=_num("kerr", table, "c2", 0.0),
        drift_t_final=drift,
    )


def _parse_verify(table: dict) -> VerifySpec:
    _check_keys("verify", table,
                optional=("spin2_numerator", "post_numerator", "with_quadrature"))
    numerators = {}
    for key in ("spin2_numerator", "post_numerator"):
        value = table.get(key)
        if value is not None:
            if (
                not isinstance(value, list)
                or len(value) != 6
                or any(isinstance(v, bool) or not isinstance(v, int) for v in value)
            ):
                raise ConfigError(
                    "[verify] %s must list six integer coefficients" % key
                )
            value = tuple(value)
        numerators[key] = value
    with_quadrature = table.get("with_quadrature", True)
    if not isinstance(with_quadrature, bool):
        raise ConfigError("[verify] with_quadrature must be a boolean")
    return VerifySpec(
        spin2_numerator=numerators["spin2_numerator"],
        post_numerator=numerators["post_numerator"],
        with_quadrature=with_quadrature,
    )


# ---------------------------------------------------------------------------
# whole-file parsing and per-study validation


_SECTIONS = (
    "run", "grid", "time", "modes", "coupled", "output", "foliation",
    "redshift", "morawetz", "converge", "kerr", "verify",
)


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a table")
    for key in raw:
        if key not in _SECTIONS:
            raise ConfigError("unknown section [%s]" % key)
    if "run" not in raw:
        raise ConfigError("a [run] section with a study is required")
    study, out, scheme, seed = _parse_run(raw["run"])

    modes_raw = raw.get("modes", [])
    if not isinstance(modes_raw, list) or any(
        not isinstance(entry, dict) for entry in modes_raw
    ):
        raise ConfigError("[[modes]] must be an array of tables")

    cfg = RunConfig(
        study=study,
        out=out,
        scheme=scheme,
        seed=seed,
        grid=_parse_grid(raw["grid"]) if "grid" in raw else None,
        time=_parse_time(raw["time"]) if "time" in raw else None,
        modes=tuple(_parse_mode(i, entry) for i, entry in enumerate(modes_raw)),
        coupled=_parse_coupled(raw["coupled"]) if "coupled" in raw else None,
        output=_parse_output(raw.get("output", {})),
        foliation=_parse_foliation(raw.get("foliation", {})),
        redshift=_parse_redshift(raw.get("redshift", {})),
        morawetz=_parse_morawetz(raw["morawetz"]) if "morawetz" in raw else None,
        converge=_parse_converge(raw["converge"]) if "converge" in raw else None,
        kerr=_parse_kerr(raw.get("kerr", {})),
        verify=_parse_verify(raw.get("verify", {})),
        raw=raw,
        sha256=config_sha256(raw),
    )
    _validate_study(cfg)
    return cfg


def _validate_study(cfg: RunConfig) -> None:
    study = cfg.study
    if study != "verify" and cfg.grid is None:
        raise ConfigError("study %r needs a [grid] section" % study)

    if study in ("evolve", "decay", "converge"):
        if cfg.time is None:
            raise ConfigError("study %r needs a [time] section" % study)
        window = cfg.grid.r_star_max - cfg.grid.r_star_min
        if cfg.time.t_final > window:
            raise ConfigError(
                "t_final %g exceeds the grid window %g; enlarge the grid"
                % (cfg.time.t_final, window)
            )

    if study == "evolve":
        if bool(cfg.modes) == (cfg.coupled is not None):
            raise ConfigError(
                "evolve needs [[modes]] or a [coupled] section (exactly one)"
            )
        if cfg.coupled is not None:
            for t in cfg.coupled.residual_times:
                if t >= cfg.time.t_final:
                    raise ConfigError(
                        "[coupled] residual_times must precede t_final"
                    )
        for t in cfg.output.snapshots or ():
            if t < 0.0 or t > cfg.time.t_final:
                raise ConfigError(
                    "[output] snapshots must lie within [0, t_final]"
                )
    elif study == "decay":
        if not cfg.modes:
            raise ConfigError("decay needs at least one [[modes]] entry")
        if cfg.coupled is not None:
            raise ConfigError("decay evolves single-field modes, not [coupled]")
        if not cfg.output.slice_taus:
            raise ConfigError("decay needs [output] slice_taus")
        if cfg.time.t_final < 250.0 * cfg.grid.mass:
            raise ConfigError(
                "decay needs t_final >= 250 grid masses (got %g)"
                % cfg.time.t_final
            )
    elif study == "converge":
        if cfg.converge is None:
            raise ConfigError("converge needs a [converge] section")
        if cfg.time.dt is not None:
            raise ConfigError(
                "converge scales the time step with each spacing; give cfl,"
                " not a fixed dt"
            )
        window = cfg.grid.r_star_max - cfg.grid.r_star_min
        for spacing in cfg.converge.spacings:
            _check_divisible("converge", window, spacing)
        if cfg.modes:
            lead = cfg.modes[0]
            if lead.kind != "gaussian-bump" or lead.spin != 2:
                raise ConfigError(
                    "converge drives a spin-2 gaussian-bump; the leading"
                    " [[modes]] entry must be one"
                )
    elif study == "normalize-kerr":
        if cfg.modes or cfg.coupled is not None:
            raise ConfigError(
                "normalize-kerr synthesizes its own profile; drop [[modes]]"
                " and [coupled]"
            )

    if cfg.redshift.r0 is not None and cfg.grid is not None:
        if cfg.redshift.r0 <= 2.0 * cfg.grid.mass:
            raise ConfigError("[redshift] r0 must lie outside the horizon")


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomli.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError("no configuration file at %s" % path) from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError("cannot parse %s: %s" % (path, exc)) from exc
    return parse_config(raw)
