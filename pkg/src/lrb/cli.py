"""Command-line front end: model configs in, machine-friendly artifacts out.

The ``lrb`` tool reads a JSON model description and emits simulated paths
as CSV, instrument prices and reserving reports as JSON, and plot-ready
``x,value`` tables::

    lrb simulate --config model.json --seed 7 --n-paths 200 --grid 0:1:51 --out paths.csv
    lrb price    --config model.json --instrument call --params '{"t":0.5,"K":0.55}' --out px.json
    lrb reserve  --config model.json --claims paid.csv --asof 1.0 --out report.json
    lrb table    --config model.json --quantity density --at 0.5 --grid 0.01:6:120 --out dens.csv

Exit codes: 0 success, 2 bad input, 3 unsupported regime, 4 numeric
failure; failures print a one-line JSON error report to stderr.  JSON
output carries floats at 17 significant digits, CSV uses shortest
round-trip formatting, and every command is bit-reproducible under a
fixed ``--seed`` (``--threads`` splits Monte Carlo work into fixed chunks
keyed by independent substreams, so the thread count never changes the
numbers).  The ``LRB_QUAD_TOL`` environment variable overrides the
tolerance of every quadrature the engines run.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import click
import numpy as np
from scipy import stats as ss

from . import __version__
from ._quad import integrate, quad_tol
from .core import (
    LrbSpec,
    TailHint,
    TerminalLaw,
    condition,
    is_increasing,
    marginal_density,
    rebase,
)
from .errors import ConfigError, DomainError, NumericError, UnsupportedRegimeError
from .marginals import VG, Brownian, CauchyF, Gamma, IG, NIG, PoissonF, StableHalf
from .pricing import (
    BasketSpec,
    DiscountCurve,
    binary_bond_price,
    call_on_bond,
    equity_model_check,
    ntd_swap_value,
    prb_intensity,
    prb_transition_pmf,
)
from .reserving import (
    ReinsuranceLayer,
    ReserveModel,
    TimeChange,
    best_estimate,
    claims_state,
    cvar_exceedence,
    gig_terminal_law,
    gpd_terminal_law,
    layer_recovery,
    ultimate_quantile,
)
from .simulate import RngStream, sample_paths, sample_terminal

__all__ = ["ModelConfig", "main"]


# ---------------------------------------------------------------------------
# model configs

_REQUIRED = object()

# JSON family blocks: name -> (constructor, ((json key, ctor key, default), ...))
_FAMILIES = {
    "brownian": (Brownian, (("theta", "theta", 0.0), ("sigma", "sigma", 1.0))),
    "gamma": (Gamma, (("m", "m", _REQUIRED),)),
    "stable-half": (StableHalf, (("c", "c", _REQUIRED),)),
    "ig": (IG, (("c", "c", _REQUIRED), ("gamma", "gamma_", _REQUIRED))),
    "cauchy": (CauchyF, (("c", "c", _REQUIRED),)),
    "vg": (VG, (("m", "m", _REQUIRED), ("theta", "theta", 0.0), ("sigma", "sigma", 1.0))),
    "nig": (NIG, (("c", "c", _REQUIRED), ("theta", "theta", 0.0), ("sigma", "sigma", 1.0))),
    "poisson": (PoissonF, (("rate", "lambda_", _REQUIRED),)),
}

# named terminal densities: name -> ((json key, default), ...)
_DENSITIES = {
    "gig": (("lam", _REQUIRED), ("delta", _REQUIRED), ("gamma", _REQUIRED)),
    "gpd": (("threshold", 1.0), ("scale", 4.0), ("index", 5.0)),
    "normal": (("mean", 0.0), ("sd", 1.0)),
}


def _require_mapping(doc, what: str) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError(f"{what} must be a JSON object, got {type(doc).__name__}")
    return doc


def _as_float(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{what} must be a number, got {value!r}")
    return float(value)


def _reject_unknown(block: dict, allowed, what: str) -> None:
    extra = sorted(set(block) - set(allowed))
    if extra:
        raise ConfigError(f"unknown {what} key(s) {extra}; allowed: {sorted(allowed)}")


def _canonical_params(block: dict, table, what: str, allowed_extra=("name",)) -> dict:
    out = {}
    for key, default in table:
        raw = block.get(key, default)
        if raw is _REQUIRED:
            raise ConfigError(f"{what} needs parameter {key!r}")
        out[key] = _as_float(raw, f"{what} parameter {key!r}")
    _reject_unknown(block, {*allowed_extra, *out}, what)
    return out


def _as_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{what} must be an integer, got {value!r}")
    return int(value)


def _normal_law(mean: float, sd: float) -> TerminalLaw:
    if sd <= 0.0:
        raise ConfigError(f"normal terminal law needs sd > 0, got {sd}")
    dist = ss.norm(loc=mean, scale=sd)
    return TerminalLaw(
        density=dist.pdf,
        support=(-math.inf, math.inf),
        tail=TailHint("gaussian", 1.0 / (2.0 * sd * sd)),
        sampler=lambda rng, n: rng.normal(mean, sd, n),
        cdf=dist.cdf,
        points=(mean,),
    )


def _named_law(name: str, p: dict) -> TerminalLaw:
    if name == "gig":
        return gig_terminal_law(p["lam"], p["delta"], p["gamma"])
    if name == "gpd":
        return gpd_terminal_law(p["threshold"], p["scale"], p["index"])
    return _normal_law(p["mean"], p["sd"])


def _mix_terminal(atoms, law: TerminalLaw, weight: float) -> TerminalLaw:
    """Atoms plus a ``weight``-scaled named density, as one terminal law."""
    if not atoms and weight == 1.0:
        return law
    cdf = None
    if law.cdf is not None:
        def cdf(x, _cdf=law.cdf):
            mass = sum(w for z, w in atoms if z <= x)
            return mass + weight * _cdf(x)

    return TerminalLaw(
        atoms=tuple((z, w) for z, w in atoms),
        density=lambda z: weight * law.density(z),
        support=law.support,
        tail=law.tail,
        sampler=law.sampler,
        cdf=cdf,
        points=law.points,
    )


@dataclass(frozen=True)
class ModelConfig:
    """A bridge model as a plain JSON document.

    ``family`` names the increment family and its parameters, ``T`` the
    horizon, ``terminal`` the terminal law (an ``atoms`` list of
    ``[location, weight]`` pairs and/or a named ``density`` block —
    ``gig``, ``gpd`` or ``normal`` — with an optional mixing ``weight``),
    plus an optional ``time_change`` (``weibull`` or ``tabulated``) and
    an optional default ``seed``.  ``from_dict`` canonicalizes (fills
    defaults, coerces numbers), so parse -> serialize -> parse is the
    identity.
    """

    family: dict
    T: float
    terminal: dict
    time_change: dict | None = None
    seed: int | None = None

    @classmethod
    def from_dict(cls, doc) -> "ModelConfig":
        _require_mapping(doc, "model config")
        _reject_unknown(doc, ("family", "T", "terminal", "time_change", "seed"), "config")
        for key in ("family", "T", "terminal"):
            if key not in doc:
                raise ConfigError(f"config needs a {key!r} entry")

        fam = _require_mapping(doc["family"], "family block")
        name = fam.get("name")
        if name not in _FAMILIES:
            raise ConfigError(
                f"unknown family {name!r}; use one of {sorted(_FAMILIES)}"
            )
        table = tuple((jk, dflt) for jk, _ck, dflt in _FAMILIES[name][1])
        family = {"name": name, **_canonical_params(fam, table, f"family {name!r}")}

        T = _as_float(doc["T"], "horizon T")
        if T <= 0.0:
            raise ConfigError(f"horizon T must be positive, got {T}")

        terminal = cls._canonical_terminal(doc["terminal"])
        time_change = cls._canonical_clock(doc.get("time_change"), T)

        seed = doc.get("seed")
        if seed is not None:
            if isinstance(seed, bool) or not isinstance(seed, int):
                raise ConfigError(f"seed must be an integer, got {seed!r}")
            if not 0 <= seed < 2**64:
                raise ConfigError("seed must fit in an unsigned 64-bit integer")
        return cls(family=family, T=T, terminal=terminal,
                   time_change=time_change, seed=seed)

    @staticmethod
    def _canonical_terminal(block) -> dict:
        _require_mapping(block, "terminal block")
        _reject_unknown(block, ("atoms", "density"), "terminal")
        out: dict = {}
        atom_mass = 0.0
        if "atoms" in block:
            atoms = block["atoms"]
            if not isinstance(atoms, list) or not atoms:
                raise ConfigError("terminal atoms must be a non-empty list")
            canon = []
            for pair in atoms:
                if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                    raise ConfigError(f"each atom must be a [location, weight] pair, got {pair!r}")
                z = _as_float(pair[0], "atom location")
                w = _as_float(pair[1], "atom weight")
                if w <= 0.0:
                    raise ConfigError(f"atom weights must be positive, got {w}")
                canon.append([z, w])
                atom_mass += w
            out["atoms"] = canon
        if "density" in block:
            dens = _require_mapping(block["density"], "terminal density block")
            name = dens.get("name")
            if name not in _DENSITIES:
                raise ConfigError(
                    f"unknown terminal density {name!r}; use one of {sorted(_DENSITIES)}"
                )
            params = _canonical_params(dens, _DENSITIES[name],
                                       f"terminal density {name!r}",
                                       allowed_extra=("name", "weight"))
            weight = _as_float(dens.get("weight", 1.0 - atom_mass), "density weight")
            if not 0.0 < weight <= 1.0:
                raise ConfigError(f"density weight must lie in (0, 1], got {weight}")
            out["density"] = {"name": name, **params, "weight": weight}
        if not out:
            raise ConfigError("terminal block needs atoms, a density, or both")
        total = atom_mass + (out["density"]["weight"] if "density" in out else 0.0)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"terminal masses must sum to 1, got {total}")
        return out

    @staticmethod
    def _canonical_clock(block, T: float) -> dict | None:
        if block is None:
            return None
        _require_mapping(block, "time_change block")
        kind = block.get("kind")
        if kind == "weibull":
            _reject_unknown(block, ("kind", "a", "b"), "time_change")
            for key in ("a", "b"):
                if key not in block:
                    raise ConfigError(f"weibull time change needs {key!r}")
            return {"kind": "weibull",
                    "a": _as_float(block["a"], "weibull a"),
                    "b": _as_float(block["b"], "weibull b")}
        if kind == "tabulated":
            _reject_unknown(block, ("kind", "times", "exposures"), "time_change")
            for key in ("times", "exposures"):
                if key not in block or not isinstance(block[key], list):
                    raise ConfigError(f"tabulated time change needs a {key!r} list")
            times = [_as_float(x, "clock time") for x in block["times"]]
            expos = [_as_float(x, "clock exposure") for x in block["exposures"]]
            if times and times[-1] != T:
                raise ConfigError(
                    f"tabulated clock must end at the horizon T={T}, got {times[-1]}"
                )
            return {"kind": "tabulated", "times": times, "exposures": expos}
        raise ConfigError(f"unknown time change kind {kind!r}; use weibull or tabulated")

    @classmethod
    def load(cls, path: str) -> "ModelConfig":
        return cls.from_dict(_read_json(path, "config"))

    def to_dict(self) -> dict:
        out = {
            "family": dict(self.family),
            "T": self.T,
            "terminal": {
                key: ([list(p) for p in val] if key == "atoms" else dict(val))
                for key, val in self.terminal.items()
            },
        }
        if self.time_change is not None:
            out["time_change"] = dict(self.time_change)
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    def build(self) -> LrbSpec:
        """The executable model: family + terminal law + optional clock."""
        cls, table = _FAMILIES[self.family["name"]]
        family = cls(**{ck: self.family[jk] for jk, ck, _ in table})

        atoms = [tuple(p) for p in self.terminal.get("atoms", [])]
        if "density" in self.terminal:
            dens = self.terminal["density"]
            base = _named_law(dens["name"], dens)
            nu = _mix_terminal(atoms, base, dens["weight"])
        else:
            nu = TerminalLaw(atoms=tuple(atoms))

        clock = None
        if self.time_change is not None:
            tc = self.time_change
            if tc["kind"] == "weibull":
                clock = TimeChange.weibull(tc["a"], tc["b"], self.T)
            else:
                clock = TimeChange.tabulated(tc["times"], tc["exposures"])
        return LrbSpec(family=family, T=self.T, nu=nu, time_change=clock)


# ---------------------------------------------------------------------------
# plumbing: IO, formatting, errors, Monte Carlo chunking


def _read_json(path: str, what: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} file {path!r} is not valid JSON: {exc}") from exc


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _to_json(obj) -> str:
    """JSON text with floats at 17 significant digits."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        body = ", ".join(f"{json.dumps(str(k))}: {_to_json(v)}" for k, v in obj.items())
        return "{" + body + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_to_json(obj) + "\n")


def _write_table(path: str, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _bail(code: int, exc: Exception) -> None:
    report = {"error": type(exc).__name__, "message": str(exc)}
    click.echo(json.dumps(report), err=True)
    raise SystemExit(code)


def _run(body) -> None:
    """Map library errors onto the documented exit codes."""
    try:
        body()
    except click.ClickException:
        raise
    except (ConfigError, DomainError) as exc:
        _bail(2, exc)
    except UnsupportedRegimeError as exc:
        _bail(3, exc)
    except NumericError as exc:
        _bail(4, exc)
    except OSError as exc:
        _bail(2, exc)


_CHUNK = 512  # Monte Carlo paths per RNG substream; fixed so --threads is inert


def _chunked(fn, total: int, seed: int, threads: int) -> np.ndarray:
    """Concatenate ``fn(generator, count)`` over fixed-size seeded chunks.

    Chunk ``i`` always draws from ``RngStream(seed, i)``, so the result is
    one deterministic array no matter how many workers run the chunks.
    """
    sizes = [(i, min(_CHUNK, total - i * _CHUNK))
             for i in range((total + _CHUNK - 1) // _CHUNK)]
    work = [(i, n) for i, n in sizes if n > 0]
    if threads <= 1 or len(work) <= 1:
        parts = [fn(RngStream(seed, i).generator(), n) for i, n in work]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(
                lambda job: fn(RngStream(seed, job[0]).generator(), job[1]), work
            ))
    return np.concatenate(parts, axis=0)


def _resolve_seed(cfg: ModelConfig, flag: int | None) -> int:
    if flag is not None:
        return int(flag)
    if cfg.seed is not None:
        return cfg.seed
    raise ConfigError("this command draws random numbers: pass --seed "
                      "or put a seed in the config")


def _parse_grid(text: str) -> np.ndarray:
    """``a:b:n`` -> inclusive linspace; ``x1,x2,...`` -> literal points."""
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ConfigError(f"grid {text!r} must look like start:stop:count")
            a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 2 or not b > a:
                raise ConfigError(f"grid {text!r} needs stop > start and count >= 2")
            return np.linspace(a, b, n)
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"grid {text!r} is not numeric: {exc}") from exc
    if not vals:
        raise ConfigError("grid is empty")
    return np.asarray(vals, dtype=float)


def _load_params(text: str | None) -> dict:
    """Instrument parameters: inline JSON object, or a path to one."""
    if text is None:
        return {}
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--params is not valid JSON: {exc}") from exc
    else:
        doc = _read_json(stripped, "params")
    return _require_mapping(doc, "instrument params")


def _need(params: dict, key: str, instrument: str):
    if key not in params:
        raise ConfigError(f"instrument {instrument!r} needs param {key!r}")
    return params[key]


def _curve_from(params: dict) -> DiscountCurve:
    if "pieces" in params and "rate" in params:
        raise ConfigError("give rate or pieces, not both")
    if "pieces" in params:
        return DiscountCurve(
            pieces=tuple((float(a), float(b)) for a, b in params["pieces"])
        )
    return DiscountCurve(rate=float(params.get("rate", 0.0)))


# ---------------------------------------------------------------------------
# the command group

_config_opt = click.option(
    "--config", "config_path", required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="JSON model description.",
)
_seed_opt = click.option(
    "--seed", type=click.IntRange(0, 2**64 - 1), default=None,
    help="RNG seed; overrides the config seed. Deterministic commands ignore it.",
)
_threads_opt = click.option(
    "--threads", type=click.IntRange(1, 64), default=1, show_default=True,
    help="Worker threads for Monte Carlo chunks; never changes the output.",
)
_out_opt = click.option(
    "--out", "out_path", required=True, type=click.Path(dir_okay=False),
    help="Destination file.",
)


@click.group()
@click.version_option(__version__, prog_name="lrb")
def main():
    """Random-bridge toolkit: simulate paths, price claims, reserve, tabulate."""


@main.command()
@_config_opt
@_seed_opt
@_threads_opt
@_out_opt
@click.option("--n-paths", type=click.IntRange(0), required=True,
              help="Number of sample paths.")
@click.option("--grid", "grid_text", required=True,
              help="Time grid: start:stop:count or a comma list.")
def simulate(config_path, seed, threads, out_path, n_paths, grid_text):
    """Sample paths of the configured model to CSV (path_id,t,value)."""
    _run(lambda: _cmd_simulate(config_path, seed, threads, out_path, n_paths, grid_text))


def _cmd_simulate(config_path, seed, threads, out_path, n_paths, grid_text):
    cfg = ModelConfig.load(config_path)
    spec = cfg.build()
    grid = _parse_grid(grid_text)
    rows = []
    if n_paths > 0:
        paths = _chunked(
            lambda rng, n: sample_paths(spec, grid, rng, n),
            n_paths, _resolve_seed(cfg, seed), threads,
        )
        rows = [
            (pid, float(t), float(v))
            for pid, row in enumerate(paths)
            for t, v in zip(grid, row)
        ]
    _write_table(out_path, ("path_id", "t", "value"), rows)


_PARAM_KEYS = {
    "binary-bond": {"rate", "pieces", "t", "xi", "method"},
    "call": {"rate", "pieces", "s", "xi", "t", "K", "method"},
    "ntd": {"n", "q", "r", "R", "s", "n_s"},
    "equity-check": {"kind", "params", "r", "s0"},
}


@main.command()
@_config_opt
@_seed_opt
@_threads_opt
@_out_opt
@click.option("--instrument", required=True,
              type=click.Choice(sorted(_PARAM_KEYS)),
              help="What to price.")
@click.option("--params", "params_text", default=None,
              help="Instrument parameters: inline JSON or a path to a JSON file.")
@click.option("--mc-paths", type=click.IntRange(0), default=0, show_default=True,
              help="Also run this many Monte Carlo paths as a cross-check "
                   "(binary-bond and call only).")
def price(config_path, seed, threads, out_path, instrument, params_text, mc_paths):
    """Price an instrument; writes JSON {price, diagnostics}."""
    _run(lambda: _cmd_price(config_path, seed, threads, out_path,
                            instrument, params_text, mc_paths))


def _cmd_price(config_path, seed, threads, out_path, instrument, params_text, mc_paths):
    cfg = ModelConfig.load(config_path)
    params = _load_params(params_text)
    _reject_unknown(params, _PARAM_KEYS[instrument], f"{instrument} param")
    if cfg.time_change is not None:
        raise UnsupportedRegimeError(
            "pricing on a time-changed model is not supported; "
            "state the model in operational time instead"
        )
    if mc_paths and instrument not in ("binary-bond", "call"):
        raise ConfigError(f"--mc-paths is not available for {instrument!r}")

    diagnostics: dict = {"quadrature_error": quad_tol()}

    if instrument == "binary-bond":
        spec = cfg.build()
        curve = _curve_from(params)
        t = _as_float(params.get("t", 0.0), "t")
        xi = _as_float(params.get("xi", 0.0), "xi")
        value = binary_bond_price(spec, curve, t, xi,
                                  method=params.get("method", "auto"))
        if mc_paths:
            post = condition(spec, t, xi).posterior
            draws = _chunked(
                lambda rng, n: np.asarray(sample_terminal(post, rng, n)),
                mc_paths, _resolve_seed(cfg, seed), threads,
            )
            payoffs = curve.discount(t, spec.T) * draws
            diagnostics["mc_price"] = float(payoffs.mean())
            diagnostics["mc_stderr"] = float(payoffs.std(ddof=1) / math.sqrt(mc_paths))

    elif instrument == "call":
        spec = cfg.build()
        curve = _curve_from(params)
        s = _as_float(params.get("s", 0.0), "s")
        xi = _as_float(params.get("xi", 0.0), "xi")
        t = _as_float(_need(params, "t", instrument), "t")
        K = _as_float(_need(params, "K", instrument), "K")
        value = call_on_bond(spec, curve, s, xi, t, K,
                             method=params.get("method", "auto"))
        if mc_paths:
            base = rebase(condition(spec, s, xi))

            def chunk(rng, n):
                x_t = xi + sample_paths(base, [t - s], rng, n)[:, 0]
                return np.array([
                    max(binary_bond_price(spec, curve, t, float(x)) - K, 0.0)
                    for x in x_t
                ])

            payoffs = curve.discount(s, t) * _chunked(
                chunk, mc_paths, _resolve_seed(cfg, seed), threads
            )
            diagnostics["mc_price"] = float(payoffs.mean())
            diagnostics["mc_stderr"] = float(payoffs.std(ddof=1) / math.sqrt(mc_paths))

    elif instrument == "ntd":
        value = _price_ntd(cfg, params)

    else:  # equity-check
        value, extra = _price_equity_check(cfg, params)
        diagnostics.update(extra)

    _write_json(out_path, {"price": value, "diagnostics": diagnostics})


def _price_ntd(cfg: ModelConfig, params: dict) -> float:
    """Basket default swap: the default-count pmf comes from the config atoms."""
    if cfg.family["name"] != "poisson":
        raise ConfigError("ntd pricing needs a poisson family config")
    if "density" in cfg.terminal:
        raise ConfigError("ntd pricing needs a purely atomic terminal law "
                          "(the default-count pmf)")
    locs = {}
    for z, w in cfg.terminal["atoms"]:
        if z < 0 or z != int(z):
            raise ConfigError(f"default counts must be nonnegative integers, got {z}")
        locs[int(z)] = w
    kmax = max(locs)
    if kmax < 1:
        raise ConfigError("the default-count pmf must reach at least one name")
    pmf = tuple(locs.get(k, 0.0) for k in range(kmax + 1))
    basket = BasketSpec(
        K=kmax,
        P=pmf,
        n=_as_int(_need(params, "n", "ntd"), "n"),
        q=_as_float(_need(params, "q", "ntd"), "q"),
        r=_as_float(_need(params, "r", "ntd"), "r"),
        R=_as_float(_need(params, "R", "ntd"), "R"),
        T=cfg.T,
    )
    return ntd_swap_value(basket, s=_as_float(params.get("s", 0.0), "s"),
                          n_s=_as_int(params.get("n_s", 0), "n_s"))


def _price_equity_check(cfg: ModelConfig, params: dict):
    """Rebuild an exponential-Levy stock model and report the residuals."""
    kind = params.get("kind", cfg.family["name"])
    if "params" in params:
        triple = tuple(_as_float(x, "equity param") for x in params["params"])
        if len(triple) != 3:
            raise ConfigError("equity params must be three numbers")
    elif kind == "vg":
        triple = (cfg.family["m"], cfg.family["theta"], cfg.family["sigma"])
    elif kind == "nig":
        triple = (cfg.family["c"], cfg.family["theta"], cfg.family["sigma"])
    else:
        raise ConfigError(
            f"equity-check needs a vg or nig family (or explicit params), got {kind!r}"
        )
    report = equity_model_check(
        kind, triple, cfg.T,
        r=_as_float(params.get("r", 0.0), "r"),
        s0=_as_float(params.get("s0", 1.0), "s0"),
    )
    extra = {
        "martingale_gap": report.martingale_gap,
        "price_gap": report.price_gap,
        "drift_correction": report.w,
        "scale": report.scale,
    }
    return report.price(0.0, 0.0), extra


@main.command()
@_config_opt
@_seed_opt
@_out_opt
@click.option("--claims", "claims_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="CSV of cumulative paid amounts with header t,paid.")
@click.option("--asof", type=float, required=True,
              help="Valuation time (>= the last claim time, < T).")
@click.option("--layers", "layers_text", default="[]", show_default=True,
              help='Excess-of-loss layers as JSON, e.g. \'[{"attachment":3,"limit":2}]\'.')
@click.option("--quantiles", "quantiles_text", default="0.75,0.9,0.95,0.995",
              show_default=True, help="Ultimate-loss quantile levels.")
def reserve(config_path, seed, out_path, claims_path, asof, layers_text, quantiles_text):
    """Reserving report: ultimate, reserve, variance, quantiles, layers, CVaR."""
    _run(lambda: _cmd_reserve(config_path, out_path, claims_path, asof,
                              layers_text, quantiles_text))


def _future_recovery(model: ReserveModel, asof: float, paid: float,
                     layer: ReinsuranceLayer) -> float:
    """Expected reinsurance receipts still to come on an excess-of-loss layer.

    The treaty settles periodically on the paid amount, so receipts over
    the remaining period telescope to the ultimate layer exceedence minus
    the part already accrued by ``asof``.
    """
    accrued = max(paid - layer.attachment, 0.0)
    if math.isfinite(layer.limit):
        accrued -= max(paid - layer.attachment - layer.limit, 0.0)
    return layer_recovery(model, asof, paid, layer) - accrued


def _read_claims(path: str):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        names = reader.fieldnames
        if names is None or [n.strip() for n in names] != ["t", "paid"]:
            raise ConfigError(f"claims CSV must have header t,paid; got {names}")
        try:
            rows = [(float(row["t"]), float(row["paid"])) for row in reader]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"claims CSV has a non-numeric row: {exc}") from exc
    return rows


def _cmd_reserve(config_path, out_path, claims_path, asof, layers_text, quantiles_text):
    cfg = ModelConfig.load(config_path)
    model = ReserveModel(cfg.build())
    rows = _read_claims(claims_path)
    if rows:
        t_last, paid = claims_state([t for t, _ in rows], [x for _, x in rows])
    else:
        t_last, paid = 0.0, 0.0
    if not t_last <= asof < model.T:
        raise ConfigError(
            f"asof must lie in [last claim time, T): {t_last} <= asof < {model.T}, "
            f"got {asof}"
        )

    try:
        layers_doc = json.loads(layers_text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--layers is not valid JSON: {exc}") from exc
    if not isinstance(layers_doc, list):
        raise ConfigError("--layers must be a JSON list of layer objects")
    layers = []
    for block in layers_doc:
        _require_mapping(block, "layer")
        _reject_unknown(block, ("attachment", "limit"), "layer")
        limit = block.get("limit")
        layers.append(ReinsuranceLayer(
            attachment=_as_float(_need(block, "attachment", "layer"), "attachment"),
            limit=math.inf if limit is None else _as_float(limit, "limit"),
        ))

    levels = []
    for token in quantiles_text.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            levels.append((token, float(token)))
        except ValueError as exc:
            raise ConfigError(f"bad quantile level {token!r}") from exc

    estimate = best_estimate(model, asof, paid)
    quantiles = {tok: ultimate_quantile(model, asof, paid, q) for tok, q in levels}
    cvar = {
        tok: cvar_exceedence(model, asof, paid, model.T, quantiles[tok])
        for tok, _ in levels
    }
    recoveries = [
        {
            "attachment": layer.attachment,
            "limit": layer.limit,
            "recovery": _future_recovery(model, asof, paid, layer),
        }
        for layer in layers
    ]
    _write_json(out_path, {
        "U": estimate.ultimate,
        "R": estimate.reserve,
        "var": estimate.variance,
        "quantiles": quantiles,
        "layer_recoveries": recoveries,
        "cvar": cvar,
    })


@main.command()
@_config_opt
@_seed_opt
@_out_opt
@click.option("--quantity", required=True,
              type=click.Choice(("density", "cdf", "lambda")),
              help="What to tabulate.")
@click.option("--grid", "grid_text", required=True,
              help="Evaluation grid: start:stop:count or a comma list.")
@click.option("--at", "at_value", type=float, default=None,
              help="Observation time for density/cdf; current count for lambda.")
def table(config_path, seed, out_path, quantity, grid_text, at_value):
    """Tabulate a model quantity on a grid to CSV (x,value)."""
    _run(lambda: _cmd_table(config_path, out_path, quantity, grid_text, at_value))


def _cmd_table(config_path, out_path, quantity, grid_text, at_value):
    cfg = ModelConfig.load(config_path)
    spec = cfg.build()
    grid = _parse_grid(grid_text)

    if quantity == "lambda":
        if spec.time_change is not None:
            raise UnsupportedRegimeError(
                "intensity tables on a time-changed model are not supported"
            )
        n_s = 0 if at_value is None else at_value
        if n_s < 0 or n_s != int(n_s):
            raise ConfigError(f"--at must be a nonnegative count, got {n_s}")
        rows = [(float(t), prb_intensity(spec, float(t), int(n_s))) for t in grid]
        _write_table(out_path, ("x", "value"), rows)
        return

    if at_value is None:
        raise ConfigError(f"--at (the observation time) is required for {quantity}")
    # value laws live on operational time; the clock maps the calendar query
    t_eval = spec.time_change(at_value) if spec.time_change is not None else at_value

    if quantity == "density":
        rows = [(float(x), marginal_density(spec, t_eval, float(x))) for x in grid]
        _write_table(out_path, ("x", "value"), rows)
        return

    if np.any(np.diff(grid) <= 0):
        raise ConfigError("cdf grids must be strictly increasing")
    if isinstance(spec.family, PoissonF):
        kmax = int(max(z for z, _ in spec.nu.atoms))
        pmf = [marginal_density(spec, t_eval, k) for k in range(kmax + 1)]
        rows = [
            (float(x), float(sum(pmf[: min(int(math.floor(x)), kmax) + 1])) if x >= 0 else 0.0)
            for x in grid
        ]
        _write_table(out_path, ("x", "value"), rows)
        return
    lo = 0.0 if is_increasing(spec.family) else -math.inf
    total, prev = 0.0, lo
    rows = []
    for x in grid:
        x = float(x)
        if x > prev:
            step, _ = integrate(lambda y: marginal_density(spec, t_eval, y), prev, x)
            total += step
            prev = x
        rows.append((x, total))
    _write_table(out_path, ("x", "value"), rows)


if __name__ == "__main__":  # pragma: no cover
    main()
