"""Closed-form sample-size and error-bound evaluators, plus a Monte-Carlo
checker for the ellipsoid width inequality.

Absolute constants that the source analysis leaves unspecified default to 1
and are user-settable through BoundParams; only the Gaussian evaluator
(gauss_bound) and the bounded-columns evaluators carry fully explicit
constants.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .distributions import stream
from .errors import InvalidParam

SAMPLE_SIZE_CLASSES = (
    "entries",
    "columns",
    "bounded",
    "moment",
    "coordinate",
    "leverage",
    "alpha_subexp",
    "log_concave",
)

TERM_BOUND_CLASSES = ("entries", "columns", "bounded", "moment")

# Classes whose sample-size formulas are order-of-magnitude only; evaluators
# return the expression inside O(.) times the user constant.
ASYMPTOTIC_CLASSES = ("alpha_subexp", "log_concave")


@dataclass
class BoundParams:
    epsilon: float = 0.5
    delta: float = 0.1
    constants: dict = field(default_factory=dict)  # C_ES, C_EB, C_CS, C_CB, C_BCS, C
    tails: dict = field(default_factory=dict)  # K_E, K_C, K_k, K_perp, K_M
    gamma: float = 1.0  # leverage-score mixing weight
    coherence: float = None  # mu(V_k), coordinate class
    alpha: float = None  # alpha-sub-exponential tail exponent
    M: float = None  # psi_alpha norm bound

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise InvalidParam("epsilon must be in (0,1)")
        if not (0.0 < self.delta < 1.0):
            raise InvalidParam("delta must be in (0,1)")
        for name, value in {**self.constants, **self.tails}.items():
            if value <= 0:
                raise InvalidParam(f"{name} must be positive, got {value}")

    def constant(self, name):
        return float(self.constants.get(name, 1.0))

    def tail(self, name):
        if name not in self.tails:
            raise InvalidParam(f"missing tail parameter {name}")
        return float(self.tails[name])

    @property
    def v_delta(self):
        return math.sqrt(math.log(4.0 / self.delta))


@dataclass(frozen=True)
class BoundReport:
    klass: str
    k: int
    ell: int
    epsilon: float
    delta: float
    ell_required: int
    term_bound: float
    approx_error_bound: float
    asymptotic: bool = False


def gauss_bound(k, p, delta, sigma_perp_norm, sr_perp):
    """Fully explicit Gaussian cross-term bound at failure level delta.

    Requires oversampling p >= 4; ell = k + p.
    """
    if p < 4:
        raise InvalidParam("oversampling p must be >= 4")
    if not (0.0 < delta < 1.0):
        raise InvalidParam("delta must be in (0,1)")
    if k < 1 or sigma_perp_norm < 0 or sr_perp < 1:
        raise InvalidParam("need k >= 1, sigma_perp_norm >= 0, sr_perp >= 1")
    ell = k + p
    cap_delta = math.sqrt(2.0 * math.log(2.0 / delta))
    return (
        sigma_perp_norm
        * (4.0 / delta) ** (1.0 / p)
        * (
            math.sqrt(3.0 * k / (p + 1.0))
            + math.e * math.sqrt(ell) / (p + 1.0) * (cap_delta + math.sqrt(sr_perp))
        )
    )


def sample_size(klass, k, n, params):
    """Minimal sample count for the given distribution class."""
    if klass not in SAMPLE_SIZE_CLASSES:
        raise InvalidParam(f"unknown class {klass!r}")
    if k < 1:
        raise InvalidParam("k must be >= 1")
    eps, delta = params.epsilon, params.delta
    vd = params.v_delta
    if klass == "entries":
        ke = params.tail("K_E")
        raw = params.constant("C_ES") * ke**4 / eps**2 * (math.sqrt(k) + vd) ** 2
    elif klass == "columns":
        kc = params.tail("K_C")
        raw = params.constant("C_CS") * kc**4 / eps**2 * (math.sqrt(k) + vd) ** 2
    elif klass == "bounded":
        kk = params.tail("K_k")
        raw = 2.0 * kk**2 / eps**2 * math.log(4.0 * k / delta)
    elif klass == "leverage":
        kk = math.sqrt(k / params.gamma)
        raw = 2.0 * kk**2 / eps**2 * math.log(4.0 * k / delta)
    elif klass == "coordinate":
        if params.coherence is None:
            raise InvalidParam("missing tail parameter coherence")
        raw = 2.0 * n * params.coherence / eps**2 * math.log(2.0 * k / delta)
    elif klass == "moment":
        km = params.tail("K_M")
        raw = km * params.constant("C_BCS") / (eps**2 * delta**2) * math.log(k)
    elif klass == "alpha_subexp":
        if params.alpha is None or params.M is None:
            raise InvalidParam("missing tail parameter alpha or M")
        a, m_ = params.alpha, params.M
        raw = (
            params.constant("C")
            * (k + m_**2 * (math.sqrt(k * math.log(n)) + (2.0 / a) ** (2.0 / a)))
            * math.log(k)
        )
    else:  # log_concave
        raw = params.constant("C") * (k + math.log(n)) * math.log(k)
    return int(math.ceil(raw))


def _term_and_error(klass, params, k, sigma_perp_norm, sr_perp, gamma_k, ell, q):
    eps, delta, vd = params.epsilon, params.delta, params.v_delta
    if klass == "entries":
        ke = params.tail("K_E")
        ceb = params.constant("C_EB")
        term = (
            ceb
            * ke
            * sigma_perp_norm
            / ((1.0 - eps) * math.sqrt(ell))
            * (math.sqrt(sr_perp) + math.sqrt(k) + vd)
        )
        err = sigma_perp_norm**2 + gamma_k ** (4 * q) * term * term
        return term, err
    if klass == "columns":
        kc = params.tail("K_C")
        ccb = params.constant("C_CB")
        term = (
            sigma_perp_norm
            / ((1.0 - eps) * math.sqrt(ell))
            * (math.sqrt(ell) + ccb * kc**2 * (math.sqrt(sr_perp) + vd))
        )
        err = sigma_perp_norm**2 + gamma_k ** (4 * q) * term * term
        return term, err
    if klass == "bounded":
        kperp = params.tail("K_perp")
        if kperp < 1.0:
            raise InvalidParam("K_perp must be >= 1")
        log_term = math.log(16.0 * sr_perp / delta)
        # The two displays in the source analysis differ: K_perp^2/3 inside
        # the cross-term bound, K_perp^2 in the approximation bound. Both are
        # evaluated exactly as printed.
        term = (
            sigma_perp_norm
            / math.sqrt((1.0 - eps) * ell)
            * math.sqrt(3.0 * ell + kperp**2 / 3.0 * log_term)
        )
        err = sigma_perp_norm**2 + gamma_k ** (4 * q) * sigma_perp_norm**2 / (
            (1.0 - eps) * ell
        ) * (3.0 * ell + kperp**2 * log_term)
        return term, err
    if klass == "moment":
        term = sigma_perp_norm / ((1.0 - eps) * delta) * (1.0 + 2.0 * math.sqrt(sr_perp))
        err = sigma_perp_norm**2 + gamma_k ** (4 * q) * term * term
        return term, err
    raise InvalidParam(f"unknown class {klass!r}")


def term_bound(klass, params, spectrum, ell, q=0):
    """Evaluate the class's cross-term bound and the corresponding
    approximation-error bound for a concrete spectrum."""
    if klass not in TERM_BOUND_CLASSES:
        raise InvalidParam(f"unknown class {klass!r}")
    k = spectrum.k
    n = spectrum.Vk.shape[0]
    sigma_perp_norm = float(spectrum.sigma_perp[0])
    sr_perp = float(np.sum(spectrum.sigma_perp**2)) / sigma_perp_norm**2
    gamma_k = float(spectrum.gamma[-1])
    try:
        ell_req = sample_size(klass, k, n, params)
    except InvalidParam:
        ell_req = 0
    if ell_req and ell < ell_req:
        warnings.warn(
            f"ell={ell} below the {klass} sample-size requirement {ell_req}",
            stacklevel=2,
        )
    term, err = _term_and_error(klass, params, k, sigma_perp_norm, sr_perp, gamma_k, ell, q)
    return BoundReport(
        klass=klass,
        k=k,
        ell=ell,
        epsilon=params.epsilon,
        delta=params.delta,
        ell_required=ell_req,
        term_bound=term,
        approx_error_bound=err,
        asymptotic=klass in ASYMPTOTIC_CLASSES,
    )


def nystrom_bound(params, eigen_perp, ell):
    """Error bound for the Nystrom approximation with sub-Gaussian columns."""
    lam = np.asarray(eigen_perp, dtype=np.float64)
    if np.any(lam < 0):
        raise InvalidParam("tail eigenvalues must be nonnegative")
    if not lam.size or not lam.any():
        return 0.0
    eps, vd = params.epsilon, params.v_delta
    kc = params.tail("K_C")
    ccb = params.constant("C_CB")
    lam_norm = float(lam.max())
    trace = float(lam.sum())
    root = math.sqrt(lam_norm)
    inner = math.sqrt(ell) * root + ccb * kc**2 * (math.sqrt(trace) + vd * root)
    return lam_norm + inner * inner / ((1.0 - eps) ** 2 * ell)


def mc_gaussian_width(H, samples, seed, chunk=1000):
    """Monte-Carlo estimate of E ||H' g||_2, the width of the ellipsoid
    H S^{n-1}; returns (estimate, standard error)."""
    H = np.asarray(H, dtype=np.float64)
    if samples < 1000:
        raise InvalidParam("need at least 1e3 samples")
    if not H.any():
        return 0.0, 0.0
    rng = stream(seed) if not hasattr(seed, "standard_normal") else seed
    m = H.shape[0]
    vals = []
    done = 0
    while done < samples:
        b = min(chunk, samples - done)
        G = rng.standard_normal((b, m))
        vals.append(np.linalg.norm(G @ H, axis=1))
        done += b
    vals = np.concatenate(vals)
    est = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(vals.size))
    return est, stderr
