"""Keyed-text configuration files for the CLI.

Format: INI-style sections. Example::

    [matrix]
    kind = fast_decay
    n = 256
    r = 15
    d = 2
    seed = 1

    [sweep]
    algorithm = rsvd
    q = 1
    k = 15
    distributions = gaussian, sparse_rademacher{s=10}
    ell_grid = 15, 20, 25
    trials = 100
    master_seed = 42
    delta = 0.1

    [output]
    csv = out.csv
    svg = out.svg
    log_y = 0
"""

import configparser
import io

from .distributions import format_spec, parse_spec
from .errors import ConfigError
from .sweep import SweepConfig
from .testmatrices import MatrixRecipe

_MATRIX_INT = ("n", "m", "r", "seed", "header")
_MATRIX_FLOAT = ("d", "density")


def _parse_matrix(section):
    kind = section.get("kind")
    if not kind:
        raise ConfigError("[matrix] needs a kind")
    params = {}
    seed = 0
    for key, value in section.items():
        if key == "kind":
            continue
        if key == "seed":
            seed = int(value)
        elif key in _MATRIX_INT:
            params[key] = int(value)
        elif key in _MATRIX_FLOAT:
            params[key] = float(value)
        else:
            params[key] = value
    return MatrixRecipe(kind=kind, params=params, seed=seed)


def _split_list(text):
    return [item.strip() for item in text.replace("\n", ",").split(",") if item.strip()]


def load_config(path_or_text, is_text=False):
    parser = configparser.ConfigParser()
    try:
        if is_text:
            parser.read_string(path_or_text)
        else:
            with open(path_or_text) as fh:
                parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"bad config: {exc}") from exc

    if "matrix" not in parser or "sweep" not in parser:
        raise ConfigError("config needs [matrix] and [sweep] sections")
    try:
        matrix = _parse_matrix(parser["matrix"])
        sw = parser["sweep"]
        out = parser["output"] if "output" in parser else {}
        config = SweepConfig(
            matrix=matrix,
            algorithm=sw.get("algorithm", "rsvd"),
            q=int(sw.get("q", 1)),
            k=int(sw.get("k", 10)),
            distributions=[parse_spec(s) for s in _split_list(sw.get("distributions", ""))],
            ell_grid=[int(s) for s in _split_list(sw.get("ell_grid", ""))],
            trials=int(sw.get("trials", 100)),
            master_seed=int(sw.get("master_seed", 0)),
            delta=float(sw.get("delta", 0.1)),
            bounds=sw.get("bounds", "0").strip() in ("1", "true", "yes"),
            truncate_to_k=sw.get("truncate_to_k", "1").strip() in ("1", "true", "yes"),
            csv_path=out.get("csv") if out else None,
            svg_path=out.get("svg") if out else None,
            log_y=(out.get("log_y", "0").strip() in ("1", "true", "yes")) if out else False,
        )
        config.validate()
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    return config


def dump_config(config):
    """Canonical round-trippable text form of a SweepConfig."""
    parser = configparser.ConfigParser()
    parser["matrix"] = {"kind": config.matrix.kind, "seed": str(config.matrix.seed)}
    for key, value in sorted(config.matrix.params.items()):
        parser["matrix"][key] = str(value)
    parser["sweep"] = {
        "algorithm": config.algorithm,
        "q": str(config.q),
        "k": str(config.k),
        "distributions": ", ".join(format_spec(s) for s in config.distributions),
        "ell_grid": ", ".join(str(e) for e in config.ell_grid),
        "trials": str(config.trials),
        "master_seed": str(config.master_seed),
        "delta": str(config.delta),
        "bounds": "1" if config.bounds else "0",
        "truncate_to_k": "1" if config.truncate_to_k else "0",
    }
    parser["output"] = {}
    if config.csv_path:
        parser["output"]["csv"] = config.csv_path
    if config.svg_path:
        parser["output"]["svg"] = config.svg_path
    parser["output"]["log_y"] = "1" if config.log_y else "0"
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
