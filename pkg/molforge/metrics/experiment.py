"""
Evaluation of a generated sample set and comparison of several runs
"""
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from molforge.chem import MAXIMIZE, MINIMIZE, TARGET, CorpusStats, MoleculeGraph, Scaffold, default_direction
from molforge.data import PathLike
from molforge.errors import ConfigError
from molforge.guidance.config import PropertyTarget
from molforge.metrics.base_metric import SampleSet
from molforge.metrics.basic import Diversity, Novelty, Validity
from molforge.metrics.improvement import DescriptorMean, baseline_mean, baseline_molecules, directed_improvement
from molforge.metrics.structure import ScaffoldExistence, ScaffoldSimilarity

logger = logging.getLogger("molforge")

REPORT_JSON = "report.json"
REPORT_TXT = "report.txt"
TOP_KS = (1, 5, 10, 100, 1000)
BASIC, PROPERTY, STRUCTURE = "Basic", "Property", "Structure"

FOOTER = (
    "Improvement (%) = sign * (m_a - m_b) / |m_b| * 100, sign +1 to maximize and -1 to minimize; "
    "for a set point it is the reduction of |m - value|. m_b is the mean over training molecules "
    "that contain the scaffold, or over the whole corpus without one."
)


# pylint: disable=too-many-instance-attributes
@dataclass
class EvalReport:
    """
    Metrics of one sample set.

    :param raw_count: samples before duplicate removal
    :param unique_count: distinct samples
    :param valid_count: distinct samples that parse and pass the valence check
    :param descriptor_means: mean of every reported descriptor over valid samples
    :param descriptor_conf: half width of the confidence interval of each mean
    :param baseline_means: corpus baseline of each descriptor
    :param directions: goal direction of each descriptor
    :param improvements: percent improvement, ``None`` when undefined
    :param baseline_size: number of corpus molecules in the baseline
    :param scaffold_baseline: whether the baseline was restricted to the scaffold
    """

    raw_count: int
    unique_count: int
    valid_count: int
    validity: float
    novelty: float
    diversity_unique: float
    scaffold: Optional[str] = None
    scaffold_existence: Optional[float] = None
    scaffold_similarity: Optional[float] = None
    descriptor_means: Dict[str, float] = field(default_factory=dict)
    descriptor_conf: Dict[str, float] = field(default_factory=dict)
    baseline_means: Dict[str, float] = field(default_factory=dict)
    directions: Dict[str, str] = field(default_factory=dict)
    improvements: Dict[str, Optional[float]] = field(default_factory=dict)
    baseline_size: int = 0
    scaffold_baseline: bool = False
    conf_level: float = 0.95

    def to_dict(self) -> Dict:
        return asdict(self)

    def to_frame(self, name: str = "generated") -> pd.DataFrame:
        """
        One row with columns grouped as Basic, Property and Structure.

        :param name: row label
        """
        columns: List[Tuple[str, str]] = [
            (BASIC, "Validity"),
            (BASIC, "Novelty"),
            (BASIC, "DiversityUnique"),
        ]
        values: List[Optional[float]] = [self.validity, self.novelty, self.diversity_unique]
        for desc, mean in self.descriptor_means.items():
            columns += [(PROPERTY, desc), (PROPERTY, f"{desc} ±"), (PROPERTY, f"{desc} impr (%)")]
            values += [mean, self.descriptor_conf.get(desc), self.improvements.get(desc)]
        if self.scaffold is not None:
            columns += [(STRUCTURE, "ScaffoldSimilarity"), (STRUCTURE, "ScaffoldExistence (%)")]
            existence = None if self.scaffold_existence is None else self.scaffold_existence * 100
            values += [self.scaffold_similarity, existence]
        frame = pd.DataFrame([values], index=[name], columns=pd.MultiIndex.from_tuples(columns), dtype=float)
        return frame


def _directions(
    targets: Sequence[PropertyTarget], descriptors: Iterable[str]
) -> Tuple[Dict[str, str], Dict[str, Optional[float]]]:
    directions = {target.descriptor: target.direction for target in targets}
    values = {target.descriptor: target.value for target in targets}
    for desc in descriptors:
        if desc not in directions:
            directions[desc] = default_direction(desc)
            values[desc] = None
    return directions, values


# pylint: disable=too-many-arguments, too-many-locals
def evaluate(
    samples: Union[SampleSet, Iterable[str]],
    corpus: Sequence[MoleculeGraph],
    scaffold: Optional[Union[str, Scaffold]] = None,
    targets: Sequence[PropertyTarget] = (),
    stats: Optional[CorpusStats] = None,
    descriptors: Sequence[str] = (),
    conf_level: float = 0.95,
) -> EvalReport:
    """
    Full metric suite of a sample set.

    :param samples: generated SMILES or a prepared sample set
    :param corpus: training molecules
    :param scaffold: scaffold the samples were generated for
    :param targets: property goals, their descriptors are reported with their directions
    :param stats: corpus statistics, needed for PLogP
    :param descriptors: further descriptors to report with their default directions
    :param conf_level: confidence level of the descriptor mean intervals
    """
    if not 0 < conf_level < 1:
        raise ConfigError(f"conf_level must be in (0, 1), got {conf_level}")
    if not isinstance(samples, SampleSet):
        samples = SampleSet.from_smiles(samples)
    report = EvalReport(
        raw_count=samples.raw_count,
        unique_count=len(samples),
        valid_count=len(samples.valid),
        validity=Validity()(samples),
        novelty=Novelty(corpus)(samples),
        diversity_unique=Diversity()(samples),
        conf_level=conf_level,
    )
    if scaffold is not None:
        scaffold = scaffold if isinstance(scaffold, Scaffold) else Scaffold.from_smiles(scaffold)
        report.scaffold = scaffold.smiles
        report.scaffold_existence = ScaffoldExistence(scaffold)(samples)
        report.scaffold_similarity = ScaffoldSimilarity(scaffold)(samples)

    directions, set_points = _directions(targets, descriptors)
    if directions:
        reference, report.scaffold_baseline = baseline_molecules(corpus, scaffold)
        report.baseline_size = len(reference)
        for desc, direction in directions.items():
            metric = DescriptorMean(desc, stats)
            mean = metric(samples)
            report.descriptor_means[desc] = mean
            report.descriptor_conf[desc] = metric.conf_interval(samples, conf_level) if samples.valid else float("nan")
            report.baseline_means[desc] = baseline_mean(reference, desc, stats)
            report.directions[desc] = direction
            report.improvements[desc] = directed_improvement(
                mean, report.baseline_means[desc], direction, set_points[desc]
            )
    logger.info(
        "evaluated %d samples: %d unique, %d valid", report.raw_count, report.unique_count, report.valid_count
    )
    return report


def top_k_scores(
    samples: Union[SampleSet, Iterable[str]],
    descriptor: str,
    ks: Sequence[int] = TOP_KS,
    stats: Optional[CorpusStats] = None,
    direction: Optional[str] = None,
) -> pd.Series:
    """
    Mean descriptor value of the best k distinct valid molecules, for each k that is available.

    >>> top_k_scores(["CCO", "OCC", "OCCO", "C"], "HBD", ks=(1, 2, 5))
    top1    2.0
    top2    1.5
    dtype: float64

    :param samples: generated SMILES or a prepared sample set
    :param descriptor: descriptor to rank by
    :param ks: list sizes
    :param stats: corpus statistics, needed for PLogP
    :param direction: ``maximize`` or ``minimize``, the descriptor default when ``None``
    """
    direction = direction or default_direction(descriptor)
    if direction == TARGET:
        raise ConfigError("top-k ranking needs maximize or minimize")
    if not isinstance(samples, SampleSet):
        samples = SampleSet.from_smiles(samples)
    metric = DescriptorMean(descriptor, stats)
    unique = dict(zip(samples.canonical, samples.valid))
    values = np.sort([metric.func(mol) for mol in unique.values()])
    if direction == MAXIMIZE:
        values = values[::-1]
    scores = {f"top{k}": float(values[:k].mean()) for k in sorted(ks) if 0 < k <= len(values)}
    return pd.Series(scores, dtype=float)


class Experiment:
    """
    Collects evaluation reports of several runs and compares them.

    >>> exp = Experiment()
    >>> exp.add_result("unguided", EvalReport(10, 10, 5, 0.5, 1.0, 1.0))
    >>> exp.add_result("guided", EvalReport(10, 10, 8, 0.8, 1.0, 0.5))
    >>> exp.results.loc["guided", "Validity"]
    0.8
    >>> exp.compare("unguided").loc["guided"].tolist()
    ['60.0%', '0.0%', '-50.0%']
    """

    def __init__(self):
        self.results = pd.DataFrame()
        self.reports: Dict[str, EvalReport] = {}

    def add_result(self, name: str, report: EvalReport) -> None:
        """
        :param name: run name to store in the resulting DataFrame
        :param report: evaluation of the run
        """
        self.reports[name] = report
        row = report.to_frame(name)
        for (_, column), value in row.iloc[0].items():
            self.results.at[name, column] = value

    def compare(self, name: str) -> pd.DataFrame:
        """
        Show results as a percentage difference to record ``name``.

        :param name: name of the baseline record
        :return: results table in a percentage format
        """
        if name not in self.results.index:
            raise ValueError(f"No results for run {name}")
        data_frame = self.results.copy().astype(object)
        baseline = self.results.loc[name]
        for idx in data_frame.index:
            if idx != name:
                diff = self.results.loc[idx] / baseline - 1
                data_frame.loc[idx] = [str(round(v * 100, 2)) + "%" for v in diff]
            else:
                data_frame.loc[name] = ["–"] * len(baseline)
        return data_frame


def format_report(report: EvalReport) -> str:
    """Aligned text table followed by the improvement footer"""
    frame = report.to_frame().T
    frame.columns = ["value"]
    lines = [frame.to_string(float_format=lambda value: f"{value:.4f}", na_rep="n/a"), ""]
    lines.append(
        f"samples: {report.raw_count} raw, {report.unique_count} unique, {report.valid_count} valid; "
        f"confidence level {report.conf_level}"
    )
    if report.directions:
        scope = "scaffold-containing" if report.scaffold_baseline else "whole-corpus"
        lines.append(f"baseline: {report.baseline_size} {scope} training molecules")
        for desc, direction in report.directions.items():
            goal = direction if direction != MINIMIZE else "minimize (lower is better)"
            lines.append(f"  {desc}: {goal}, m_b = {report.baseline_means[desc]:.4f}")
    lines.append(FOOTER)
    return "\n".join(lines) + "\n"


def write_report(report: EvalReport, out_dir: PathLike) -> Dict[str, Path]:
    """
    Write ``report.json`` and ``report.txt``.

    :param report: evaluation result
    :param out_dir: output directory, created when missing
    :return: written paths by file name
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {REPORT_JSON: out_dir / REPORT_JSON, REPORT_TXT: out_dir / REPORT_TXT}
    data = report.to_dict()
    data["footer"] = FOOTER
    with open(paths[REPORT_JSON], "w", encoding="utf-8") as file:
        json.dump(_finite(data), file, indent=2, default=_json_default)
    paths[REPORT_TXT].write_text(format_report(report), encoding="utf-8")
    logger.info("report written to %s", out_dir)
    return paths


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _finite(value):
    """Replace ``nan`` with ``None`` so the file stays strict JSON"""
    if isinstance(value, dict):
        return {key: _finite(item) for key, item in value.items()}
    if isinstance(value, float) and np.isnan(value):
        return None
    return value
