"""Random sketch matrix generators under reproducible counter-based streams.

Every generator is a pure function of (spec, n, ell, seed): the same inputs
produce a bit-identical matrix on any machine or worker schedule. Streams
are Philox counter-based generators keyed by (master_seed, trial,
distribution_id), so trial-level parallelism cannot reorder draws.
"""

import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import (
    InvalidInput,
    InvalidParam,
    InvalidProbabilities,
    Unsupported,
    UnsupportedSize,
)

_SQRT3 = math.sqrt(3.0)

# kind -> (allowed param names, entrywise?, finite variance?)
_KINDS = {
    "gaussian": ((), True, True),
    "rademacher": ((), True, True),
    "sparse_rademacher": (("s",), True, True),
    "uniform_sym": ((), True, True),
    "sparse_subgaussian": (("alpha", "base"), True, True),
    "laplace": (("scale",), True, True),
    "poisson_centered": (("lam",), True, True),
    "logistic": (("scale",), True, True),
    "weibull_centered": (("a", "b"), True, True),
    "gamma_centered": (("a", "b"), True, True),
    "student_t": (("nu",), True, None),  # finite variance iff nu > 2
    "cauchy": ((), True, False),
    "stable": (("alpha", "beta", "gamma", "delta"), True, False),
    "spherical_columns": ((), False, True),
    "sparse_sign_columns": (("N",), False, True),
    "hadamard_columns": (("with_replacement",), False, True),
    "l1_ball_columns": ((), False, True),
    "l2_ball_columns": ((), False, True),
    "coordinate": ((), False, True),
    "leverage_score": (("gamma",), False, True),
}

_SUBGAUSSIAN_BASES = ("gaussian", "rademacher", "uniform_sym")


@dataclass
class DistributionSpec:
    """Tagged description of one sketch distribution.

    `normalize` rescales entrywise kinds to unit variance where the variance
    is finite; kinds without a finite variance are always generated raw.
    `probabilities` (leverage score sampling only) is attached at run time
    and never serialized.
    """

    kind: str
    params: dict = field(default_factory=dict)
    normalize: bool = True
    probabilities: np.ndarray = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidParam(f"unknown distribution kind {self.kind!r}")
        allowed = _KINDS[self.kind][0]
        for name in self.params:
            if name not in allowed:
                raise InvalidParam(f"{self.kind}: unexpected parameter {name!r}")
        _validate_params(self.kind, self.params)

    @property
    def entrywise(self):
        return _KINDS[self.kind][1]

    @property
    def finite_variance(self):
        fv = _KINDS[self.kind][2]
        if fv is None:  # student_t
            return self.params.get("nu", 1.0) > 2.0
        return fv

    def label(self):
        return format_spec(self)


def _validate_params(kind, params):
    p = params
    if kind == "sparse_rademacher" and p.get("s", 1.0) < 1.0:
        raise InvalidParam("sparse_rademacher needs s >= 1")
    if kind == "sparse_subgaussian":
        alpha = p.get("alpha", 1.0)
        if not (0.0 < alpha <= 1.0):
            raise InvalidParam("sparse_subgaussian needs alpha in (0, 1]")
        base = p.get("base", "gaussian")
        if base not in _SUBGAUSSIAN_BASES:
            raise InvalidParam(f"sparse_subgaussian base must be one of {_SUBGAUSSIAN_BASES}")
    if kind == "sparse_sign_columns":
        if int(p.get("N", 1)) < 1:
            raise InvalidParam("sparse_sign_columns needs N >= 1")
    if kind == "leverage_score":
        g = p.get("gamma", 1.0)
        if not (0.0 < g <= 1.0):
            raise InvalidParam("leverage_score needs gamma in (0, 1]")
    if kind in ("laplace", "logistic") and p.get("scale", 1.0) <= 0:
        raise InvalidParam(f"{kind} needs scale > 0")
    if kind == "poisson_centered" and p.get("lam", 1.0) <= 0:
        raise InvalidParam("poisson_centered needs lam > 0")
    if kind in ("weibull_centered", "gamma_centered"):
        if p.get("a", 1.0) <= 0 or p.get("b", 1.0) <= 0:
            raise InvalidParam(f"{kind} needs a > 0 and b > 0")
    if kind == "student_t" and p.get("nu", 1.0) <= 0:
        raise InvalidParam("student_t needs nu > 0")
    if kind == "stable":
        alpha = p.get("alpha", 2.0)
        if not (0.0 < alpha <= 2.0):
            raise InvalidParam("stable needs alpha in (0, 2]")
        if not (-1.0 <= p.get("beta", 0.0) <= 1.0):
            raise InvalidParam("stable needs beta in [-1, 1]")
        if p.get("gamma", 1.0) <= 0:
            raise InvalidParam("stable needs gamma > 0")


@dataclass(frozen=True)
class SeedSpec:
    """(master_seed, trial, distribution_id) names one independent stream."""

    master_seed: int
    trial: int = 0
    distribution_id: int = 0


def stream(seed):
    if isinstance(seed, int):
        seed = SeedSpec(seed)
    key = ((seed.master_seed & ((1 << 64) - 1)) << 64) | (
        (seed.trial & 0xFFFFFFFF) << 32
    ) | (seed.distribution_id & 0xFFFFFFFF)
    return np.random.Generator(np.random.Philox(key=key))


# ---------------------------------------------------------------------------
# serialization:  kind{name=value,...}

_SPEC_RE = re.compile(r"^([a-z0-9_]+)(?:\{([^}]*)\})?$")


def parse_spec(text):
    m = _SPEC_RE.match(text.strip())
    if m is None:
        raise InvalidParam(f"cannot parse distribution spec {text!r}")
    kind, body = m.group(1), m.group(2)
    params = {}
    normalize = True
    if body:
        for item in body.split(","):
            item = item.strip()
            if not item:
                continue
            if "=" not in item:
                raise InvalidParam(f"bad parameter {item!r} in {text!r}")
            name, value = (s.strip() for s in item.split("=", 1))
            if name == "raw":
                normalize = value.lower() not in ("1", "true", "yes")
                continue
            if name in ("base",):
                params[name] = value
            elif name in ("N", "with_replacement"):
                params[name] = int(value)
            else:
                params[name] = float(value)
    return DistributionSpec(kind=kind, params=params, normalize=normalize)


def _fmt_value(v):
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def format_spec(spec):
    parts = [f"{k}={_fmt_value(v)}" for k, v in sorted(spec.params.items())]
    if not spec.normalize:
        parts.append("raw=1")
    if parts:
        return f"{spec.kind}{{{','.join(parts)}}}"
    return spec.kind


# ---------------------------------------------------------------------------
# entrywise samplers


def _weibull_moments(a, b):
    mean = a * math.gamma(1.0 + 1.0 / b)
    var = a * a * (math.gamma(1.0 + 2.0 / b) - math.gamma(1.0 + 1.0 / b) ** 2)
    return mean, math.sqrt(var)


def _sample_stable(rng, alpha, beta, gam, delta, size):
    """Chambers-Mallows-Stuck transform."""
    u = rng.uniform(-math.pi / 2.0, math.pi / 2.0, size)
    w = rng.standard_exponential(size)
    if alpha != 1.0:
        zeta = beta * math.tan(math.pi * alpha / 2.0)
        b0 = math.atan(zeta) / alpha
        s0 = (1.0 + zeta * zeta) ** (1.0 / (2.0 * alpha))
        x = (
            s0
            * np.sin(alpha * (u + b0))
            / np.cos(u) ** (1.0 / alpha)
            * (np.cos(u - alpha * (u + b0)) / w) ** ((1.0 - alpha) / alpha)
        )
        return gam * x + delta
    half_pi = math.pi / 2.0
    x = (1.0 / half_pi) * (
        (half_pi + beta * u) * np.tan(u)
        - beta * np.log((half_pi * w * np.cos(u)) / (half_pi + beta * u))
    )
    return gam * x + delta + (1.0 / half_pi) * beta * gam * math.log(gam)


def _sample_entrywise(spec, rng, size):
    kind, p, norm = spec.kind, spec.params, spec.normalize
    if kind == "gaussian":
        return rng.standard_normal(size)
    if kind == "rademacher":
        return rng.integers(0, 2, size).astype(np.float64) * 2.0 - 1.0
    if kind == "sparse_rademacher":
        s = float(p.get("s", 1.0))
        u = rng.random(size)
        root = math.sqrt(s)
        return np.where(u < 0.5 / s, -root, np.where(u < 1.0 / s, root, 0.0))
    if kind == "uniform_sym":
        return rng.uniform(-_SQRT3, _SQRT3, size)
    if kind == "sparse_subgaussian":
        alpha = float(p.get("alpha", 1.0))
        base = DistributionSpec(kind=p.get("base", "gaussian"))
        mask = rng.random(size) < alpha
        z = _sample_entrywise(base, rng, size)
        return np.where(mask, z / math.sqrt(alpha), 0.0)
    if kind == "laplace":
        lam = float(p.get("scale", 1.0))
        x = rng.laplace(0.0, lam, size)
        return x / (lam * math.sqrt(2.0)) if norm else x
    if kind == "poisson_centered":
        lam = float(p.get("lam", 1.0))
        x = rng.poisson(lam, size).astype(np.float64) - lam
        return x / math.sqrt(lam) if norm else x
    if kind == "logistic":
        s = float(p.get("scale", 1.0))
        x = rng.logistic(0.0, s, size)
        return x * _SQRT3 / (s * math.pi) if norm else x
    if kind == "weibull_centered":
        a, b = float(p.get("a", 1.0)), float(p.get("b", 1.0))
        mean, std = _weibull_moments(a, b)
        x = a * rng.weibull(b, size) - mean
        return x / std if norm else x
    if kind == "gamma_centered":
        a, b = float(p.get("a", 1.0)), float(p.get("b", 1.0))
        x = rng.gamma(a, b, size) - a * b
        return x / (math.sqrt(a) * b) if norm else x
    if kind == "student_t":
        nu = float(p.get("nu", 1.0))
        x = rng.standard_t(nu, size)
        if norm and nu > 2.0:
            return x * math.sqrt((nu - 2.0) / nu)
        return x
    if kind == "cauchy":
        return rng.standard_cauchy(size)
    if kind == "stable":
        return _sample_stable(
            rng,
            float(p.get("alpha", 2.0)),
            float(p.get("beta", 0.0)),
            float(p.get("gamma", 1.0)),
            float(p.get("delta", 0.0)),
            size,
        )
    raise InvalidParam(f"{kind} is not an entrywise kind")


# ---------------------------------------------------------------------------
# column samplers


def sample_l2_ball_column(n, rng):
    """Uniform in the Euclidean ball of radius sqrt(n): Gaussian direction,
    radius sqrt(n) * U^(1/n)."""
    if n < 1:
        raise InvalidParam("n must be >= 1")
    g = rng.standard_normal(n)
    g /= np.linalg.norm(g)
    r = math.sqrt(n) * rng.random() ** (1.0 / n)
    return r * g


def sample_l1_ball_column(n, rng):
    """Uniform in the unit l1 ball: Laplace-normalized direction with
    radius U^(1/n)."""
    if n < 1:
        raise InvalidParam("n must be >= 1")
    x = rng.laplace(0.0, 1.0, n)
    x /= np.abs(x).sum()
    return x * rng.random() ** (1.0 / n)


def hadamard_matrix(n):
    """Sylvester-construction +-1 matrix with H'H = nI exactly."""
    if n < 1 or (n & (n - 1)) != 0:
        raise UnsupportedSize(f"Hadamard matrix needs n a power of two, got {n}")
    H = np.ones((1, 1))
    while H.shape[0] < n:
        H = np.block([[H, H], [H, -H]])
    return H


def derive_leverage_probabilities(Vk, gamma=1.0):
    """Sampling measure p_i = gamma * p_lev_i + (1 - gamma)/n, which
    satisfies p_i >= gamma * p_lev_i with equality at gamma = 1."""
    if not (0.0 < gamma <= 1.0):
        raise InvalidParam("gamma must be in (0, 1]")
    p_lev = kernels.leverage_scores(Vk)
    n = p_lev.shape[0]
    p = gamma * p_lev + (1.0 - gamma) / n
    if np.any(p <= 0.0):
        raise InvalidProbabilities("sampling measure must be strictly positive")
    return p / p.sum()


def with_probabilities(spec, probabilities):
    p = np.asarray(probabilities, dtype=np.float64)
    if np.any(p <= 0.0):
        raise InvalidProbabilities("all probabilities must be positive")
    if abs(p.sum() - 1.0) > 1e-10:
        raise InvalidProbabilities("probabilities must sum to one")
    return replace(spec, probabilities=p)


def _sample_columns(spec, rng, n, ell):
    kind, p = spec.kind, spec.params
    if kind == "spherical_columns":
        g = rng.standard_normal((n, ell))
        return math.sqrt(n) * g / np.linalg.norm(g, axis=0)
    if kind == "sparse_sign_columns":
        N = int(p.get("N", 1))
        if N > n:
            raise InvalidParam(f"sparse_sign_columns needs N <= n, got N={N}, n={n}")
        # one uniform N-subset per column via partial argsort of uniforms
        idx = np.argpartition(rng.random((ell, n)), N - 1, axis=1)[:, :N]
        signs = rng.integers(0, 2, (ell, N)) * 2 - 1
        out = np.zeros((n, ell))
        cols = np.repeat(np.arange(ell), N)
        out[idx.ravel(), cols] = math.sqrt(n / N) * signs.ravel()
        return out
    if kind == "hadamard_columns":
        with_repl = bool(p.get("with_replacement", 0))
        if not with_repl and ell > n:
            raise UnsupportedSize(
                f"hadamard without replacement needs ell <= n, got ell={ell}, n={n}"
            )
        H = hadamard_matrix(n)
        idx = rng.choice(n, size=ell, replace=with_repl)
        return H[:, idx].astype(np.float64)
    if kind == "l1_ball_columns":
        X = rng.laplace(0.0, 1.0, (n, ell))
        X /= np.abs(X).sum(axis=0)
        return X * rng.random(ell) ** (1.0 / n)
    if kind == "l2_ball_columns":
        G = rng.standard_normal((n, ell))
        G /= np.linalg.norm(G, axis=0)
        return G * (math.sqrt(n) * rng.random(ell) ** (1.0 / n))
    if kind == "coordinate":
        idx = rng.integers(0, n, ell)
        out = np.zeros((n, ell))
        out[idx, np.arange(ell)] = math.sqrt(n)
        return out
    if kind == "leverage_score":
        probs = spec.probabilities
        if probs is None:
            raise InvalidProbabilities(
                "leverage_score sampling needs probabilities; "
                "use derive_leverage_probabilities + with_probabilities"
            )
        if probs.shape[0] != n:
            raise InvalidProbabilities(f"probabilities have length {probs.shape[0]}, need {n}")
        if np.any(probs <= 0.0):
            raise InvalidProbabilities("all probabilities must be positive")
        idx = rng.choice(n, size=ell, replace=True, p=probs)
        out = np.zeros((n, ell))
        out[idx, np.arange(ell)] = 1.0 / np.sqrt(ell * probs[idx])
        return out
    raise InvalidParam(f"{kind} is not a column kind")


def _generate(spec, rng, n, ell):
    if spec.entrywise:
        omega = _sample_entrywise(spec, rng, (n, ell))
    else:
        omega = _sample_columns(spec, rng, n, ell)
    if not np.all(np.isfinite(omega)):
        raise InvalidInput("generated matrix has non-finite entries")
    return omega


def sample(spec, n, ell, seed):
    """Draw the n x ell sketch matrix for `spec` from the stream `seed`."""
    if ell < 1:
        raise InvalidParam("ell must be >= 1")
    unrestricted = spec.kind in ("coordinate", "leverage_score") or (
        spec.kind == "hadamard_columns" and spec.params.get("with_replacement")
    )
    if ell > n and not unrestricted:
        raise InvalidParam(f"ell={ell} exceeds n={n} for kind {spec.kind}")
    return _generate(spec, stream(seed), n, ell)


def column_scale(spec, n, ell):
    """Scale c such that each column x satisfies E[x x'] = c I.

    Returns None for kinds without a finite second moment.
    """
    if not spec.finite_variance:
        return None
    kind = spec.kind
    if kind == "leverage_score":
        return 1.0 / ell
    if kind == "l2_ball_columns":
        return n / (n + 2.0)
    if kind == "l1_ball_columns":
        return 2.0 / ((n + 1.0) * (n + 2.0))
    if kind == "student_t" and not spec.normalize:
        nu = spec.params.get("nu", 3.0)
        return nu / (nu - 2.0)
    if spec.entrywise and not spec.normalize:
        raise Unsupported(f"column scale unknown for raw {kind}")
    return 1.0


def empirical_isotropy_deficit(spec, n, trials, seed, chunk=2000):
    """||mean of x x' - c I||_2 / c over `trials` sampled columns.

    Columns are rescaled to unit scale per chunk, so the returned deficit is
    directly comparable across kinds.
    """
    if not spec.finite_variance:
        raise Unsupported(f"{spec.kind} has no finite variance")
    if spec.kind == "hadamard_columns":
        spec = replace(spec, params={**spec.params, "with_replacement": 1})
    acc = np.zeros((n, n))
    done = 0
    block = 0
    while done < trials:
        ell = min(chunk, trials - done)
        sub = SeedSpec(seed.master_seed, seed.trial + block, seed.distribution_id)
        # bypass the ell <= n sketch-shape guard: chunks are column draws,
        # not sketches
        X = _generate(spec, stream(sub), n, ell)
        c = column_scale(spec, n, ell)
        X = X / math.sqrt(c)
        acc += X @ X.T
        done += ell
        block += 1
    G = acc / trials
    return float(np.linalg.norm(G - np.eye(n), 2))


def estimate_subgaussian_norm(samples):
    """Empirical psi_2 norm: bisection on t over mean exp(X^2/t^2) vs 2.

    Diagnostic only; biased for heavy-tailed samples.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 10_000:
        raise InvalidInput("need at least 1e4 samples")
    if not np.all(np.isfinite(x)):
        raise InvalidInput("samples must be finite")
    x2 = x * x
    if not x2.any():
        return 0.0

    def mean_exp(t):
        # cap the exponent so the mean stays finite for any sample size
        return float(np.mean(np.exp(np.minimum(x2 / (t * t), 500.0))))

    lo = math.sqrt(x2.mean()) * 1e-3
    hi = math.sqrt(x2.max() / math.log(2.0)) + math.sqrt(x2.mean())
    while mean_exp(lo) < 2.0:
        lo *= 0.5
    while mean_exp(hi) > 2.0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mean_exp(mid) > 2.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    return 0.5 * (lo + hi)
