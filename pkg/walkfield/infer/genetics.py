# -*- coding: utf-8 -*-
"""Multinomial-probit model for allele frequencies on a migration graph.

Every allele copy (individual i at node s, slot p, locus l) carries latent
utilities z_k = mu_lk + eta_slk + N(0, 1), k = 1..K_l, and the observed
allele is the arg max. mu_l1 = 0 fixes the location. Each field eta_.lk
is an intrinsic field with precision Q(beta)Q(beta)' and unit scale, where
Q(beta) comes from the log-linear edge-rate model; beta therefore enters
through the fields' normalising constants, which the Metropolis step keeps.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np
from scipy.special import ndtr

from walkfield.errors import DataError, NumericalError
from walkfield.field import (IntrinsicField, log_constrained_det, sample_constrained_gaussian, sample_fields,
                             stationary_precision)
from walkfield.generator import RateModel, RateParams
from walkfield.graph import SpatialGraph
from walkfield.infer.gaussian import robbins_monro
from walkfield.infer.priors import PriorSpec
from walkfield.infer.samples import PosteriorSamples, SamplerConfig, SamplerMeta
from walkfield.infer.truncnorm import sample_truncated_normal
from walkfield.utils.rng import stream

log = logging.getLogger("infer.genetics")

MODEL_NAME = "ProbitGenetics"
BETA_TARGET_ACCEPTANCE = 0.234
QUADRATURE_NODES = 40
LOG2PI = math.log(2 * math.pi)

_GH_X, _GH_W = np.polynomial.hermite.hermgauss(QUADRATURE_NODES)


@dataclass(frozen=True, eq=False)
class GeneticsData:
    """alleles[i, l, p] in 1..K_l for individual i sampled at node nodes[i]."""

    nodes: np.ndarray
    alleles: np.ndarray
    n_alleles: Tuple[int, ...]

    def __post_init__(self):
        nodes = np.asarray(self.nodes)
        alleles = np.asarray(self.alleles)
        k = tuple(int(v) for v in self.n_alleles)
        if alleles.ndim != 3 or alleles.shape[2] != 2:
            raise DataError("alleles must have shape (individuals, loci, 2)")
        if nodes.shape != (alleles.shape[0],):
            raise DataError("one node per individual")
        if len(k) != alleles.shape[1]:
            raise DataError(f"{alleles.shape[1]} loci but {len(k)} allele counts")
        for l, kl in enumerate(k):
            if kl < 2:
                raise DataError(f"locus {l + 1} has K = {kl}; a locus needs at least two alleles")
            col = alleles[:, l, :]
            if np.any(col < 1) or np.any(col > kl):
                raise DataError(f"locus {l + 1}: allele categories must lie in 1..{kl}; missing slots are not supported")
        if not (np.issubdtype(alleles.dtype, np.integer) and np.issubdtype(nodes.dtype, np.integer)):
            raise DataError("nodes and alleles must be integers")
        object.__setattr__(self, "nodes", nodes.astype(np.int64))
        object.__setattr__(self, "alleles", alleles.astype(np.int64))
        object.__setattr__(self, "n_alleles", k)

    @property
    def loci(self) -> int:
        return len(self.n_alleles)

    def copies(self, locus: int) -> Tuple[np.ndarray, np.ndarray]:
        """(node, 0-based category) for every allele copy at a locus."""
        return np.repeat(self.nodes, 2), self.alleles[:, locus, :].ravel() - 1

    def to_dict(self) -> Dict[str, list]:
        return {"nodes": self.nodes.tolist(), "alleles": self.alleles.tolist(), "n_alleles": list(self.n_alleles)}

    @classmethod
    def from_dict(cls, d: Mapping[str, list]) -> "GeneticsData":
        return cls(np.array(d["nodes"], dtype=np.int64), np.array(d["alleles"], dtype=np.int64),
                   tuple(d["n_alleles"]))


@dataclass(frozen=True, eq=False)
class GeneticsModelSpec:
    data: GeneticsData
    graph: SpatialGraph
    rate_param_names: Tuple[str, ...] = ()
    priors: PriorSpec = field(default_factory=PriorSpec)
    proposal_scale: float = 0.1

    def __post_init__(self):
        m = self.graph.node_count
        if np.any(self.data.nodes < 0) or np.any(self.data.nodes >= m):
            raise DataError(f"individuals reference nodes outside 0..{m - 1}")
        object.__setattr__(self, "rate_param_names", tuple(self.rate_param_names))

    @property
    def beta_names(self) -> Tuple[str, ...]:
        return ("beta0", "beta1", "beta2") + tuple(f"beta_{n}" for n in self.rate_param_names)


def parameter_names(spec: GeneticsModelSpec) -> Tuple[str, ...]:
    m = spec.graph.node_count
    names: List[str] = list(spec.beta_names)
    for l, kl in enumerate(spec.data.n_alleles):
        names += [f"mu[{l + 1},{k + 1}]" for k in range(1, kl)]
    for l, kl in enumerate(spec.data.n_alleles):
        for k in range(kl):
            names += [f"eta[{l + 1},{k + 1},{s}]" for s in range(m)]
    return tuple(names)


# ---------- category probabilities ----------

def allele_probabilities(mu, eta) -> np.ndarray:
    """P(z_k is the maximum) per node and category, z_k ~ N(mu_k + eta_sk, 1) independent.

    P_k = E[prod_{j != k} Phi(m_k - m_j + sqrt(2) x)] under Gauss-Hermite weight.
    """
    mu = np.asarray(mu, dtype=float)
    eta = np.atleast_2d(np.asarray(eta, dtype=float))
    m = mu[None, :] + eta
    n, k = m.shape
    out = np.empty((n, k))
    shift = math.sqrt(2.0) * _GH_X
    for c in range(k):
        diff = m[:, c, None] - np.delete(m, c, axis=1)
        prod = np.prod(ndtr(diff[:, :, None] + shift[None, None, :]), axis=1)
        out[:, c] = prod @ _GH_W / math.sqrt(math.pi)
    out = np.clip(out, 0.0, None)
    return out / out.sum(axis=1, keepdims=True)


def genetics_log_lik(data: GeneticsData, mu: Sequence[np.ndarray], eta: Sequence[np.ndarray]) -> float:
    """sum over allele copies of log p(observed category); eta[l] has shape (M, K_l)."""
    total = 0.0
    for l in range(data.loci):
        probs = allele_probabilities(mu[l], eta[l])
        s, y = data.copies(l)
        total += float(np.log(np.maximum(probs[s, y], 1e-300)).sum())
    return total


# ---------- full conditionals ----------

def sample_latent_utilities(z: np.ndarray, observed: np.ndarray, mean: np.ndarray,
                            rng: np.random.Generator) -> np.ndarray:
    """One Gibbs sweep over categories; the observed category stays the strict maximum."""
    z = z.copy()
    n, k = z.shape
    rows = np.arange(n)
    for c in range(k):
        is_obs = observed == c
        others = z.copy()
        others[rows, observed] = -np.inf
        others[:, c] = -np.inf
        lower = np.where(is_obs, others.max(axis=1), -np.inf)
        upper = np.where(is_obs, np.inf, z[rows, observed])
        z[:, c] = sample_truncated_normal(mean[:, c], lower, upper, rng)
    return z


def sample_allele_intercepts(sums: np.ndarray, counts: np.ndarray, prior_sd: float,
                             rng: np.random.Generator) -> np.ndarray:
    """mu_k | z ~ N(sums / (counts + 1/sd^2), 1 / (counts + 1/sd^2)), elementwise."""
    prec = np.asarray(counts, dtype=float) + 1.0 / prior_sd**2
    return np.asarray(sums, dtype=float) / prec + rng.standard_normal(prec.shape) / np.sqrt(prec)


def _field_log_prior(eta_fields: Sequence[np.ndarray], p: np.ndarray, log_det: float) -> float:
    """sum over (l, k) of the unit-scale intrinsic log density of eta_.lk."""
    total = 0.0
    m = p.shape[0]
    for e in eta_fields:
        quad = np.einsum("ik,ij,jk->", e, p, e)
        total += e.shape[1] * (-0.5 * (m - 1) * LOG2PI + 0.5 * log_det) - 0.5 * float(quad)
    return total


# ---------- the sampler ----------

def fit_probit_genetics(spec: GeneticsModelSpec, config: SamplerConfig, chain: int = 0) -> PosteriorSamples:
    data, graph, pri = spec.data, spec.graph, spec.priors
    m = graph.node_count
    rate_model = RateModel(graph, spec.rate_param_names)
    rng = stream(config.seed, chain)

    beta = np.zeros(len(spec.beta_names))
    p = stationary_precision(rate_model.generator(beta)).toarray()
    log_det = log_constrained_det(p)
    copies = [data.copies(l) for l in range(data.loci)]
    counts = [np.bincount(s, minlength=m).astype(float) for s, _ in copies]
    mu = [np.zeros(kl) for kl in data.n_alleles]
    eta = [np.zeros((m, kl)) for kl in data.n_alleles]
    z = [np.where(np.arange(kl)[None, :] == y[:, None], 0.5, -0.5) for (s, y), kl in zip(copies, data.n_alleles)]

    names = parameter_names(spec)
    rows = np.empty((config.retained, len(names)))
    loglik = np.empty(config.retained)
    log_step = math.log(spec.proposal_scale)
    accepted = kept = 0
    report_every = max(config.iterations // 10, 1)

    for it in range(config.iterations):
        for l, ((s, y), kl) in enumerate(zip(copies, data.n_alleles)):
            z[l] = sample_latent_utilities(z[l], y, mu[l][None, :] + eta[l][s], rng)
            resid = z[l] - eta[l][s]
            new_mu = sample_allele_intercepts(resid[:, 1:].sum(axis=0), np.full(kl - 1, s.size),
                                              pri.mu_lk_sd, rng)
            mu[l] = np.concatenate([[0.0], new_mu])
            for k in range(kl):
                lin = np.bincount(s, weights=z[l][:, k] - mu[l][k], minlength=m)
                eta[l][:, k] = sample_constrained_gaussian(p + np.diag(counts[l]), lin, rng)

        beta, p, log_det, acc = _update_rate_params(beta, p, log_det, eta, rate_model, pri,
                                                    math.exp(log_step), rng)
        if it < config.burn_in:
            log_step = robbins_monro(log_step, acc, BETA_TARGET_ACCEPTANCE, it)
            if it == config.burn_in - 1:
                log.debug("beta step frozen at %.4g", math.exp(log_step))
        else:
            accepted += acc

        if config.keeps(it):
            rows[kept] = np.concatenate([beta] + [v[1:] for v in mu] + [e.T.ravel() for e in eta])
            loglik[kept] = genetics_log_lik(data, mu, eta)
            kept += 1
        if (it + 1) % report_every == 0:
            done = max(it + 1 - config.burn_in, 1)
            log.info("genetics chain %d: %d/%d iterations, beta acceptance %.3f", chain, it + 1,
                     config.iterations, accepted / done if it >= config.burn_in else float("nan"))

    post = config.iterations - config.burn_in
    meta = SamplerMeta(MODEL_NAME, config.seed, config.iterations, config.burn_in, config.thin, chain,
                       (("beta", accepted / post),))
    extra = {"data": data.to_dict(), "rate_param_names": list(spec.rate_param_names)}
    return PosteriorSamples(names, rows, loglik, meta, extra)


def _update_rate_params(beta, p, log_det, eta, rate_model: RateModel, pri: PriorSpec, step: float,
                        rng: np.random.Generator):
    prop = beta + step * rng.standard_normal(beta.size)
    try:
        p_new = stationary_precision(rate_model.generator(prop)).toarray()
        ld_new = log_constrained_det(p_new)
    except NumericalError as e:
        log.debug("rejected beta proposal: %s", e)
        return beta, p, log_det, False
    ratio = (_field_log_prior(eta, p_new, ld_new) + pri.log_rate_beta(prop)
             - _field_log_prior(eta, p, log_det) - pri.log_rate_beta(beta))
    if math.log(rng.random()) < ratio:
        return prop, p_new, ld_new, True
    return beta, p, log_det, False


# ---------- forward simulation ----------

def simulate_genetics(graph: SpatialGraph, params: RateParams, loci: int, alleles: int,
                      individuals_per_node: int, seed: int,
                      mu_sd: float = 1.0) -> Tuple[GeneticsData, Dict[str, np.ndarray]]:
    """Draw fields, intercepts and genotypes from the model; returns (data, truth)."""
    if loci < 1 or alleles < 2 or individuals_per_node < 1:
        raise DataError("need loci >= 1, alleles >= 2 and at least one individual per node")
    m = graph.node_count
    q = RateModel(graph, params.extra_names).generator(params.vector())
    fields = sample_fields(IntrinsicField(q), seed, loci * alleles).reshape(loci, alleles, m)
    rng_mu, rng_z = stream(seed, 1), stream(seed, 2)
    mu = mu_sd * rng_mu.standard_normal((loci, alleles))
    mu[:, 0] = 0.0
    nodes = np.repeat(np.arange(m), individuals_per_node)
    util = (mu[None, :, None, :] + np.transpose(fields, (2, 0, 1))[nodes][:, :, None, :]
            + rng_z.standard_normal((nodes.size, loci, 2, alleles)))
    data = GeneticsData(nodes, util.argmax(axis=3) + 1, (alleles,) * loci)
    return data, {"beta": params.vector(), "mu": mu, "eta": fields}


# ---------- deviance ----------

class GeneticsLikelihood:
    """log p(alleles | mu, eta), integrating the latent utilities out."""

    def __init__(self, data: GeneticsData, m: int):
        self.data = data
        self.m = m

    @classmethod
    def from_samples(cls, samples: PosteriorSamples) -> "GeneticsLikelihood":
        try:
            data = GeneticsData.from_dict(samples.extra["data"])
        except KeyError:
            raise DataError("samples carry no genotype data; not a genetics model run") from None
        m = sum(1 for n in samples.names if n.startswith("eta[1,1,"))
        return cls(data, m)

    def log_likelihood(self, point: Mapping[str, float]) -> float:
        mu, eta = unpack_point(point, self.data.n_alleles, self.m)
        return genetics_log_lik(self.data, mu, eta)


def unpack_point(point: Mapping[str, float], n_alleles: Sequence[int], m: int,
                 ) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    mu, eta = [], []
    for l, kl in enumerate(n_alleles):
        mu.append(np.array([0.0] + [point[f"mu[{l + 1},{k + 1}]"] for k in range(1, kl)]))
        eta.append(np.array([[point[f"eta[{l + 1},{k + 1},{s}]"] for k in range(kl)] for s in range(m)]))
    return mu, eta


def rate_posterior(samples: PosteriorSamples, name: str = "beta1") -> Dict[str, float]:
    """Mean, 95% interval and P(coef > 0) for one rate coefficient."""
    x = samples.column(name)
    lo, hi = np.quantile(x, [0.025, 0.975])
    return {"mean": float(x.mean()), "q025": float(lo), "q975": float(hi), "p_positive": float((x > 0).mean())}
