"""
Metrics are computed over a :class:`SampleSet`: generated SMILES with
duplicates removed and every distinct string parsed once.

- Basic: validity over distinct samples, novelty against the training corpus
  and diversity read as uniqueness of canonical forms among valid samples.
- Property: mean descriptor value over valid samples with a normal
  confidence half width, and its improvement over a corpus baseline.
  The baseline is the mean over training molecules that contain the
  scaffold, or over the whole corpus when there is no scaffold.
- Structure: scaffold existence and scaffold similarity, means over valid samples.

Improvement is direction-aware::

    sign * (m_a - m_b) / |m_b| * 100

with ``sign = +1`` to maximize and ``-1`` to minimize, so a gain is positive
even when the baseline is negative. A set point is scored by how much the
distance ``|m - value|`` shrinks.

:func:`evaluate` runs the whole suite and returns an :class:`EvalReport`,
:func:`write_report` stores it as ``report.json`` and ``report.txt``, and
:class:`Experiment` compares several runs.
"""
from molforge.metrics.base_metric import Metric, SampleSet, ValidMoleculeMetric, conf_interval
from molforge.metrics.basic import Diversity, Novelty, Validity
from molforge.metrics.experiment import (
    REPORT_JSON,
    REPORT_TXT,
    TOP_KS,
    EvalReport,
    Experiment,
    evaluate,
    format_report,
    top_k_scores,
    write_report,
)
from molforge.metrics.improvement import (
    DescriptorMean,
    baseline_mean,
    baseline_molecules,
    directed_improvement,
    improvement,
    target_improvement,
)
from molforge.metrics.structure import ScaffoldExistence, ScaffoldSimilarity
