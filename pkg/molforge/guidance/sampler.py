"""
Two-phase reverse process: structure guidance first, structure and property guidance fused afterwards
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import torch
from tqdm import tqdm

from molforge.diffusion.models import DenoiserParams
from molforge.diffusion.schedule import reverse_step
from molforge.errors import DecodeFailure, DependencyMissing
from molforge.guidance.config import GuidanceConfig
from molforge.guidance.modules import combine_structure, fused_estimate, property_gradients
from molforge.guidance.predictor import PropertyPredictor
from molforge.numeric.random import derive_seed, make_generator, rng_gaussian

logger = logging.getLogger("molforge")


@dataclass
class StepRecord:
    """
    :param step: timestep the prediction was made at
    :param phase: ``"one"`` or ``"two"``
    :param norms: norm of each score component of this chain
    :param decode: intermediate decode of the predicted x0, when traced
    """

    step: int
    phase: str
    norms: Dict[str, float]
    decode: Optional[str] = None


@dataclass
class SampleTrace:
    records: List[StepRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def phase_changes(self) -> int:
        return sum(1 for prev, record in zip(self.records, self.records[1:]) if prev.phase != record.phase)


@dataclass
class SampleResult:
    """
    Outcome of one chain.

    :param chain: chain index
    :param seed: seed the chain drew its noise from
    :param smiles: decoded text, ``None`` when no end token was produced
    :param raw: every rounded token, specials included
    :param reason: why decoding failed
    :param trace: per-step record
    """

    chain: int
    seed: int
    smiles: Optional[str]
    raw: str
    reason: Optional[str] = None
    trace: SampleTrace = field(default_factory=SampleTrace)

    @property
    def decoded(self) -> bool:
        return self.smiles is not None


def _chain_norms(values: torch.Tensor) -> List[float]:
    return values.reshape(values.shape[0], -1).norm(dim=1).tolist()


# pylint: disable=too-many-locals, too-many-branches, too-many-statements
def _run_batch(
    config: GuidanceConfig,
    params: DenoiserParams,
    predictors: Mapping[str, PropertyPredictor],
    seeds: Sequence[int],
) -> List[Tuple[torch.Tensor, SampleTrace]]:
    schedule = params.schedule
    steps = len(schedule)
    boundary = config.boundary(steps)
    shape = (params.config.seq_len, params.config.dim)
    generators = [make_generator(seed) for seed in seeds]
    dtype = params.embedding_table.dtype
    x_t = torch.stack([rng_gaussian(shape, dtype=dtype, generator=generator) for generator in generators])
    scaffold, scaffold_mask = None, None
    if config.structure_active:
        with torch.no_grad():
            encoded, mask = params.encode_scaffolds([config.scaffold])
        scaffold = encoded.expand(len(seeds), -1, -1)
        scaffold_mask = mask.expand(len(seeds), -1)
    predictor_scaffold, predictor_mask = scaffold, scaffold_mask
    if scaffold is None and params.has_structure and any(item.spec.use_scaffold for item in predictors.values()):
        # scaffold-aware predictors see the empty scaffold when no structure goal is set
        with torch.no_grad():
            encoded, mask = params.encode_scaffolds([None])
        predictor_scaffold = encoded.expand(len(seeds), -1, -1)
        predictor_mask = mask.expand(len(seeds), -1)
    traces = [SampleTrace() for _ in seeds]
    for step in range(steps, 0, -1):
        phase = "one" if step > boundary else "two"
        if step == boundary and step < steps:
            logger.debug("switching to fused guidance at t=%d", step)
        norms: Dict[str, List[float]] = {}
        with torch.no_grad():
            uncond = params.denoise_uncond(x_t, step)
            norms["uncond"] = _chain_norms(uncond)
            cond = None
            if scaffold is not None and config.w_s != 1:
                cond = params.denoise_cond(x_t, step, scaffold, scaffold_mask)
                norms["cond"] = _chain_norms(cond)
        structure = combine_structure(uncond, cond, config.w_s)
        x0_hat = structure
        if phase == "two" and config.property_active:
            gradients = property_gradients(
                predictors,
                x_t,
                step,
                config.targets,
                predictor_scaffold,
                predictor_mask,
                config.sigma_g,
                config.kappa,
                config.normalize_gradients,
                uncond,
            )
            for target, gradient in zip(config.targets, gradients):
                norms[f"grad_{target.descriptor}"] = _chain_norms(gradient)
            x0_hat = fused_estimate(
                uncond,
                None if scaffold is None else structure,
                gradients,
                config.w_p,
                [target.weight for target in config.targets],
            )
        if config.clamp_x0:
            x0_hat = params.embed(params.round(x0_hat))
        decodes = None
        if config.trace_every and (step % config.trace_every == 0 or step == 1):
            decodes = [params.vocab.decode(row, strict=False) for row in params.round(x0_hat).tolist()]
        for idx, trace in enumerate(traces):
            trace.records.append(
                StepRecord(
                    step,
                    phase,
                    {name: values[idx] for name, values in norms.items()},
                    decodes[idx] if decodes else None,
                )
            )
        if step == 1:
            x_t = reverse_step(x_t, step, x0_hat, schedule)
        else:
            noise = torch.stack([rng_gaussian(shape, dtype=dtype, generator=generator) for generator in generators])
            x_t = reverse_step(x_t, step, x0_hat, schedule, noise=noise)
        x_t = x_t.detach()
    return list(zip(params.round(x_t), traces))


def _check_ready(config: GuidanceConfig, params: DenoiserParams, predictors: Mapping[str, PropertyPredictor]) -> None:
    if config.structure_active and not params.has_structure:
        raise DependencyMissing("scaffold guidance needs a trained structure module, run train-scm first")
    missing = [target.descriptor for target in config.targets if target.descriptor not in predictors]
    if missing:
        raise DependencyMissing(f"no trained predictor for {', '.join(missing)}, run train-pcm first")
    config.boundary(len(params.schedule))


# pylint: disable=too-many-arguments
def sample_many(
    config: GuidanceConfig,
    params: DenoiserParams,
    seed: int,
    count: int,
    predictors: Optional[Mapping[str, PropertyPredictor]] = None,
    workers: int = 1,
    batch_size: int = 32,
    progress: bool = False,
) -> List[SampleResult]:
    """
    Run ``count`` chains, chain ``i`` seeded with ``derive_seed(seed, i)``.

    Chains are grouped into consecutive batches of ``batch_size``, batches run on up to ``workers`` threads.
    Results are ordered by chain index.

    :param config: guidance settings
    :param params: trained denoisers
    :param seed: global seed
    :param count: number of chains
    :param predictors: property regressors by descriptor id
    :param workers: worker threads
    :param batch_size: chains per batch
    :param progress: show a progress bar over batches
    """
    predictors = predictors or {}
    _check_ready(config, params, predictors)
    params.eval()
    for predictor in predictors.values():
        predictor.eval()
    seeds = [derive_seed(seed, chain) for chain in range(count)]
    batches = [seeds[start : start + batch_size] for start in range(0, count, batch_size)]
    logger.debug("sampling %d chains in %d batches on %d workers", count, len(batches), workers)

    def run(batch: Sequence[int]) -> List[Tuple[torch.Tensor, SampleTrace]]:
        return _run_batch(config, params, predictors, batch)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outputs = list(tqdm(pool.map(run, batches), total=len(batches), disable=not progress))
    else:
        outputs = [run(batch) for batch in tqdm(batches, disable=not progress)]

    results = []
    for chain, (tokens, trace) in enumerate(item for batch in outputs for item in batch):
        raw = params.vocab.raw(tokens.tolist())
        try:
            smiles, reason = params.vocab.decode(tokens.tolist()), None
        except DecodeFailure as exc:
            smiles, reason = None, str(exc)
        results.append(SampleResult(chain, seeds[chain], smiles, raw, reason, trace))
    failed = sum(1 for result in results if not result.decoded)
    if failed:
        logger.info("%d of %d chains produced no end token", failed, count)
    return results


def sample(
    config: GuidanceConfig,
    params: DenoiserParams,
    seed: int,
    predictors: Optional[Mapping[str, PropertyPredictor]] = None,
) -> Tuple[str, SampleTrace]:
    """
    One chain, the same as chain 0 of :func:`sample_many`.

    :return: SMILES text and the step trace
    """
    result = sample_many(config, params, seed, 1, predictors)[0]
    if not result.decoded:
        raise DecodeFailure(result.reason, result.raw)
    return result.smiles, result.trace
