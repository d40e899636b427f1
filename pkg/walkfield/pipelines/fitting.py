# -*- coding: utf-8 -*-
"""fit, dic and diagnose."""
import logging
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import Field, field_validator

from walkfield.config import RunConfig
from walkfield.data.genotypes import load_genotypes
from walkfield.data.graphfile import GraphFile
from walkfield.errors import ConfigError, DataError
from walkfield.infer.diagnostics import split_half_diagnostic
from walkfield.infer.dic import compute_dic
from walkfield.infer.gaussian import GaussianModelSpec, Variant, fit_gaussian
from walkfield.infer.genetics import GeneticsModelSpec, fit_probit_genetics, rate_posterior
from walkfield.infer.priors import PriorSpec
from walkfield.infer.samples import PosteriorSamples, SamplerConfig, read_samples, run_chains, summarize, \
    write_samples
from walkfield.pipelines.common import COLUMBUS, CommandResult, load_graph_source, read_label_map, require_seed, \
    split_list
from walkfield.utils.files import write_csv, write_json

log = logging.getLogger("pipelines.fitting")

VARIANTS = {"spatial": Variant.SPATIAL, "diffusion": Variant.DIFFUSION}
PRIOR_KEYS = tuple(PriorSpec.model_fields)


class FitConfig(RunConfig):
    model: Literal["spatial", "diffusion", "genetics"] = "spatial"
    graph: str = COLUMBUS
    response: str = "CRIME"
    covariate: str = "HOVAL"
    standardize_covariate: bool = True
    genotypes: Optional[str] = None
    rate_params: List[str] = Field(default_factory=list)
    proposal_scale: float = Field(0.1, gt=0)
    iterations: int = Field(20000, ge=1)
    burn_in: int = Field(5000, ge=0)
    thin: int = Field(1, ge=1)
    chains: int = Field(1, ge=1)
    workers: Optional[int] = Field(None, ge=1)
    regression_sd: Optional[float] = None
    re_sd_scale: Optional[float] = None
    tau2_shape: Optional[float] = None
    tau2_scale: Optional[float] = None
    rate_beta_sd: Optional[float] = None
    mu_lk_sd: Optional[float] = None

    @field_validator("rate_params", mode="before")
    @classmethod
    def split_rate_params(cls, value):
        return split_list(value)

    def priors(self) -> PriorSpec:
        given = {k: getattr(self, k) for k in PRIOR_KEYS if getattr(self, k) is not None}
        try:
            return PriorSpec(**given)
        except ValueError as e:
            raise ConfigError(f"invalid prior: {e}") from None

    def sampler(self, seed: int) -> SamplerConfig:
        try:
            return SamplerConfig(iterations=self.iterations, burn_in=self.burn_in, thin=self.thin, seed=seed)
        except ValueError as e:
            raise ConfigError(f"invalid sampler settings: {e}") from None


def _node_column(gf: GraphFile, name: str):
    if name not in gf.attributes.columns:
        raise DataError(f"node attribute {name!r} not found; have {', '.join(gf.attributes.columns) or 'none'}")
    try:
        return gf.attributes[name].astype(float).to_numpy()
    except ValueError:
        raise DataError(f"node attribute {name!r} is not numeric") from None


def run_fit(cfg: FitConfig, out: Path) -> CommandResult:
    seed = require_seed(cfg, "fit")
    if cfg.model == "genetics" and not cfg.genotypes:
        raise ConfigError("model = genetics needs genotypes = <file>")
    result = CommandResult()
    gf = load_graph_source(cfg.graph, result)
    sampler = cfg.sampler(seed)
    if cfg.model == "genetics":
        data = load_genotypes(Path(cfg.genotypes), gf.graph)
        result.inputs.append(Path(cfg.genotypes))
        spec = GeneticsModelSpec(data, gf.graph, tuple(cfg.rate_params), cfg.priors(), cfg.proposal_scale)
        fit_fn = fit_probit_genetics
    else:
        spec = GaussianModelSpec(_node_column(gf, cfg.response), _node_column(gf, cfg.covariate), gf.graph,
                                 VARIANTS[cfg.model], cfg.priors(), cfg.standardize_covariate)
        fit_fn = fit_gaussian

    chains = run_chains(fit_fn, spec, sampler, cfg.chains, cfg.workers)
    samples = chains[0] if len(chains) == 1 else PosteriorSamples.concat(chains)
    write_samples(samples, out)
    summary = summarize(samples)
    if cfg.model == "genetics":
        summary["rates"] = {name: rate_posterior(samples, name) for name in spec.beta_names}
    result.outputs += [out / "samples.csv", out / "sampler.json", write_json(summary, out / "summary.json")]
    result.summary = {"model": samples.meta.model, "draws": samples.n_draws,
                      "acceptance": dict(samples.meta.acceptance)}
    return result


class DicConfig(RunConfig):
    runs: List[str] = Field(default_factory=list)

    @field_validator("runs", mode="before")
    @classmethod
    def split_runs(cls, value):
        return split_list(value)


def run_dic(cfg: DicConfig, out: Path) -> CommandResult:
    """DIC for each fit directory; lower is better."""
    if not cfg.runs:
        raise ConfigError("dic needs runs = <fit dir>[,<fit dir>...]")
    result = CommandResult()
    table = {}
    for run in cfg.runs:
        path = Path(run)
        samples = read_samples(path)
        result.inputs += [path / "samples.csv", path / "sampler.json"]
        if result.labels is None:
            result.labels = read_label_map(path)
        res = compute_dic(samples)
        table[run] = {"model": samples.meta.model, **res.to_dict()}
    best = min(table, key=lambda k: table[k]["dic"])
    result.outputs.append(write_json({"runs": table, "best": best}, out / "dic.json"))
    result.summary = {run: round(v["dic"], 3) for run, v in table.items()}
    return result


class DiagnoseConfig(RunConfig):
    run: Optional[str] = None
    threshold: float = Field(0.2, gt=0)


def run_diagnose(cfg: DiagnoseConfig, out: Path) -> CommandResult:
    if not cfg.run:
        raise ConfigError("diagnose needs run = <fit dir>")
    result = CommandResult()
    path = Path(cfg.run)
    samples = read_samples(path)
    result.inputs += [path / "samples.csv", path / "sampler.json"]
    result.labels = read_label_map(path)
    frame = split_half_diagnostic(samples, cfg.threshold)
    flagged = frame.loc[frame["flagged"], "parameter"].tolist()
    if flagged:
        log.warning("%d parameter(s) differ between halves: %s", len(flagged), ", ".join(flagged[:10]))
    result.outputs += [write_csv(frame, out / "diagnostic.csv"), write_json(flagged, out / "flagged.json")]
    result.summary = {"parameters": len(frame), "flagged": len(flagged)}
    return result
