# -*- coding: utf-8 -*-
"""Deviance information criterion, with the deviance conditional on the sampled effects."""
import logging
from dataclasses import asdict, dataclass
from typing import Dict, Mapping, Optional, Protocol

from walkfield.errors import DataError
from walkfield.infer.gaussian import GaussianLikelihood
from walkfield.infer.genetics import MODEL_NAME as GENETICS_MODEL, GeneticsLikelihood
from walkfield.infer.samples import PosteriorSamples

log = logging.getLogger("infer.dic")

MIN_DRAWS = 100


class Likelihood(Protocol):
    def log_likelihood(self, point: Mapping[str, float]) -> float: ...


def likelihood_for(samples: PosteriorSamples) -> Likelihood:
    """Rebuild the likelihood a run was fitted with from what its samples carry."""
    if samples.meta.model == GENETICS_MODEL:
        return GeneticsLikelihood.from_samples(samples)
    return GaussianLikelihood.from_samples(samples)


@dataclass(frozen=True)
class DICResult:
    dbar: float
    d_at_mean: float
    p_d: float
    dic: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def compute_dic(samples: PosteriorSamples, model: Optional[Likelihood] = None) -> DICResult:
    """dbar = mean of -2 log L over draws; D(theta_bar) at componentwise posterior means."""
    if samples.n_draws < MIN_DRAWS:
        raise DataError(f"DIC needs at least {MIN_DRAWS} retained draws, got {samples.n_draws}")
    if model is None:
        model = likelihood_for(samples)
    dbar = float(-2.0 * samples.loglik.mean())
    d_at_mean = float(-2.0 * model.log_likelihood(samples.posterior_mean()))
    p_d = dbar - d_at_mean
    result = DICResult(dbar, d_at_mean, p_d, 2.0 * dbar - d_at_mean)
    log.info("%s: DIC %.3f (pD %.3f)", samples.meta.model, result.dic, p_d)
    return result
