# -*- coding: utf-8 -*-
"""Gaussian response with an intrinsic spatial random effect.

    c = mu 1 + beta x + sigma eta + eps,   eps ~ N(0, tau2 I),   eta ~ N(0, (QQ')^-), 1'eta = 0

SpatialRandomEffect uses the covariate as given; GraphDiffusion first
smooths it through the constrained inverse of Q', so x = (Q')^- h. In that
variant the diffusion rate is not identified and the coefficients are
reported as beta_tilde and sigma_tilde. The two variants share every other
line of the sampler.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Tuple

import numpy as np
import scipy.linalg as la

from walkfield.errors import DataError
from walkfield.field import constrained_solve, sample_constrained_gaussian, stationary_precision
from walkfield.generator import GeneratorMatrix, RateModel, check_irreducible
from walkfield.graph import GraphError, SpatialGraph
from walkfield.infer.priors import PriorSpec
from walkfield.infer.samples import PosteriorSamples, SamplerConfig, SamplerMeta
from walkfield.utils.rng import stream

log = logging.getLogger("infer.gaussian")

SIGMA_TARGET_ACCEPTANCE = 0.44
LOG2PI = math.log(2 * math.pi)


class Variant(str, Enum):
    SPATIAL = "SpatialRandomEffect"
    DIFFUSION = "GraphDiffusion"


def parameter_names(variant: Variant, m: int) -> Tuple[str, ...]:
    beta, sigma = ("beta", "sigma") if variant is Variant.SPATIAL else ("beta_tilde", "sigma_tilde")
    return ("mu", beta, sigma, "tau2", "tau") + tuple(f"eta[{i}]" for i in range(m))


def smooth_covariate(q: GeneratorMatrix, h) -> np.ndarray:
    """(Q')^- h on the sum-zero subspace; constants map to zero."""
    return constrained_solve(q, np.asarray(h, dtype=float))


def standardize(x: np.ndarray) -> np.ndarray:
    sd = float(np.std(x, ddof=1))
    if not sd > 0:
        raise DataError("covariate is constant; nothing to regress on")
    return (x - x.mean()) / sd


@dataclass(frozen=True, eq=False)
class GaussianModelSpec:
    response: np.ndarray
    covariate: np.ndarray
    graph: SpatialGraph
    variant: Variant = Variant.SPATIAL
    priors: PriorSpec = field(default_factory=PriorSpec)
    standardize_covariate: bool = True

    def __post_init__(self):
        c = np.asarray(self.response, dtype=float).ravel()
        h = np.asarray(self.covariate, dtype=float).ravel()
        m = self.graph.node_count
        if c.shape != (m,) or h.shape != (m,):
            raise DataError(f"response and covariate need {m} values, got {c.size} and {h.size}")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(h))):
            raise DataError("response and covariate must be finite")
        object.__setattr__(self, "response", c)
        object.__setattr__(self, "covariate", h)
        object.__setattr__(self, "variant", Variant(self.variant))

    def generator(self) -> GeneratorMatrix:
        """Unit log-rates: a_ij = 1/d_ij, i.e. the binary adjacency rule for unit distances."""
        if not self.graph.is_symmetric():
            raise GraphError("graph is not symmetric; the Gaussian models need an undirected neighbour relation")
        q = RateModel(self.graph).generator(np.zeros(3))
        if not check_irreducible(q):
            raise GraphError("graph is not connected; the spatial effect is not a proper intrinsic field")
        return q

    def design(self, q: GeneratorMatrix) -> np.ndarray:
        x = self.covariate if self.variant is Variant.SPATIAL else smooth_covariate(q, self.covariate)
        return standardize(x) if self.standardize_covariate else x


# ---------- full conditionals ----------

def sample_regression(y: np.ndarray, X: np.ndarray, tau2: float, prior_sd: float,
                      rng: np.random.Generator) -> np.ndarray:
    """theta | y ~ N(A^-1 X'y / tau2, A^-1), A = X'X / tau2 + I / prior_sd^2."""
    p = X.shape[1]
    a = X.T @ X / tau2 + np.eye(p) / prior_sd**2
    chol = la.cholesky(a, lower=True)
    mean = la.cho_solve((chol, True), X.T @ y / tau2)
    return mean + la.solve_triangular(chol, rng.standard_normal(p), lower=True, trans="T")


def sample_tau2(resid: np.ndarray, shape: float, scale: float, rng: np.random.Generator) -> float:
    """Inverse-gamma update: IG(shape + n/2, scale + |r|^2/2)."""
    a = shape + 0.5 * resid.size
    b = scale + 0.5 * float(resid @ resid)
    return b / rng.gamma(a)


def update_log_sigma(sigma: float, step: float, log_lik: Callable[[float], float],
                     log_prior: Callable[[float], float], rng: np.random.Generator) -> Tuple[float, bool]:
    """One random-walk Metropolis step on log sigma (Jacobian included)."""
    prop = sigma * math.exp(step * rng.standard_normal())

    def target(s: float) -> float:
        return log_lik(s) + log_prior(s) + math.log(s)

    ratio = target(prop) - target(sigma)
    if math.log(rng.random()) < ratio:
        return prop, True
    return sigma, False


def gaussian_log_lik(resid: np.ndarray, tau2: float) -> float:
    return -0.5 * resid.size * (LOG2PI + math.log(tau2)) - float(resid @ resid) / (2.0 * tau2)


def robbins_monro(log_step: float, accepted: bool, target: float, it: int) -> float:
    return log_step + (float(accepted) - target) / (it + 1) ** 0.6


# ---------- the sampler ----------

def fit_gaussian(spec: GaussianModelSpec, config: SamplerConfig, chain: int = 0) -> PosteriorSamples:
    q = spec.generator()
    p = stationary_precision(q).toarray()
    m = q.dim
    c = spec.response
    x = spec.design(q)
    X = np.column_stack([np.ones(m), x])
    pri = spec.priors
    rng = stream(config.seed, chain)

    theta, *_ = np.linalg.lstsq(X, c, rcond=None)
    resid = c - X @ theta
    tau2 = max(float(np.var(resid, ddof=2)), 1e-8 * float(np.var(c)) + 1e-12)
    sigma = 0.5 * math.sqrt(tau2)
    eta = np.zeros(m)
    log_step = math.log(0.5)
    eye = np.eye(m)

    names = parameter_names(spec.variant, m)
    rows = np.empty((config.retained, len(names)))
    loglik = np.empty(config.retained)
    accepted = 0
    kept = 0
    report_every = max(config.iterations // 10, 1)

    for it in range(config.iterations):
        theta = sample_regression(c - sigma * eta, X, tau2, pri.regression_sd, rng)
        r0 = c - X @ theta
        eta = sample_constrained_gaussian(p + (sigma**2 / tau2) * eye, (sigma / tau2) * r0, rng)
        sigma, acc = update_log_sigma(
            sigma, math.exp(log_step),
            lambda s: gaussian_log_lik(r0 - s * eta, tau2),
            pri.log_half_normal, rng,
        )
        resid = r0 - sigma * eta
        tau2 = sample_tau2(resid, pri.tau2_shape, pri.tau2_scale, rng)

        if it < config.burn_in:
            log_step = robbins_monro(log_step, acc, SIGMA_TARGET_ACCEPTANCE, it)
            if it == config.burn_in - 1:
                log.debug("sigma step frozen at %.4g", math.exp(log_step))
        else:
            accepted += acc
        if config.keeps(it):
            rows[kept, :5] = (theta[0], theta[1], sigma, tau2, math.sqrt(tau2))
            rows[kept, 5:] = eta
            loglik[kept] = gaussian_log_lik(resid, tau2)
            kept += 1
        if (it + 1) % report_every == 0:
            done = max(it + 1 - config.burn_in, 1)
            log.info("%s chain %d: %d/%d iterations, sigma acceptance %.3f",
                     spec.variant.value, chain, it + 1, config.iterations,
                     accepted / done if it >= config.burn_in else float("nan"))

    post = config.iterations - config.burn_in
    meta = SamplerMeta(spec.variant.value, config.seed, config.iterations, config.burn_in, config.thin,
                       chain, (("sigma", accepted / post),))
    extra = {"variant": spec.variant.value, "response": c.tolist(), "design": x.tolist()}
    return PosteriorSamples(names, rows, loglik, meta, extra)


# ---------- deviance ----------

class GaussianLikelihood:
    """log p(c | mu, beta, sigma, eta, tau2), conditional on eta."""

    def __init__(self, response: np.ndarray, design: np.ndarray, variant: Variant):
        self.response = np.asarray(response, dtype=float)
        self.design = np.asarray(design, dtype=float)
        self.variant = Variant(variant)

    @classmethod
    def from_samples(cls, samples: PosteriorSamples) -> "GaussianLikelihood":
        try:
            return cls(samples.extra["response"], samples.extra["design"], samples.extra["variant"])
        except KeyError as e:
            raise DataError(f"samples carry no {e.args[0]!r}; not a Gaussian model run") from None

    def log_likelihood(self, point: Mapping[str, float]) -> float:
        names = parameter_names(self.variant, self.response.size)
        mu, beta, sigma, tau2 = (float(point[n]) for n in names[:4])
        eta = np.array([point[n] for n in names[5:]], dtype=float)
        resid = self.response - mu - beta * self.design - sigma * eta
        return gaussian_log_lik(resid, tau2)
